"""
Default (de)serialization logic shipped with the package.
"""

from __future__ import annotations

import importlib

PLUGINS_STR = (
    "tno.regression.nonparametric.serializer_plugins.numpy",
    "tno.regression.nonparametric.serializer_plugins.estimators",
)


def register_defaults() -> None:
    """
    Register the logic of every plugin module in PLUGINS_STR. Plugins are imported on first use,
    since they import the estimator modules, which in turn import the serialization module.
    """
    for name in PLUGINS_STR:
        importlib.import_module(name).register()
