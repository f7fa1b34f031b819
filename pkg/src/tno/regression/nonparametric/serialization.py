"""
This module contains the serialization logic used to store fitted models as self-describing
documents, either as JSON text or as MessagePack bytes.
"""

from __future__ import annotations

import inspect
import json
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence, Union

import ormsgpack
from mypy_extensions import Arg, KwArg

from tno.regression.nonparametric import serializer_plugins
from tno.regression.nonparametric.exceptions import (
    AnnotationError,
    DataFormatError,
    RepetitionError,
)
from tno.regression.nonparametric.functions import init

logger = init(__name__)

SerializerFunction = Union[
    Callable[[Arg(Any, "self"), KwArg(Any)], Any],
    Callable[[Arg(Any, "obj"), KwArg(Any)], Any],
]
DeserializerFunction = Callable[[Arg(Any, "obj"), KwArg(Any)], Any]

DEFAULT_PACK_OPTION = ormsgpack.OPT_PASSTHROUGH_DATACLASS

MSGPACK_SUFFIXES = (".msgpack", ".mpk")


class SupportsSerialization(Protocol):
    """
    Type placeholder for classes that store themselves as plain data.
    """

    def serialize(self, **kwargs: Any) -> Any:
        r"""
        :param \**kwargs: optional extra keyword arguments
        :return: plain data describing this instance
        """

    @staticmethod
    def deserialize(obj: Any, **kwargs: Any) -> SupportsSerialization:
        r"""
        :param obj: plain data produced by serialize
        :param \**kwargs: optional extra keyword arguments
        :return: the rebuilt instance
        """


SERIALIZER_FUNCS: dict[str, SerializerFunction] = {}
DESERIALIZER_FUNCS: dict[str, DeserializerFunction] = {}


class Serialization:
    """
    Registry of (de)serialization logic keyed by class name, together with the encoders of
    model files. Every registered object is stored as {"type": <class name>, "data": ...};
    a file holds one such object next to the version of the package that wrote it.
    """

    @staticmethod
    def register_class(
        obj_class: type[SupportsSerialization],
        check_annotations: bool = True,
        overwrite: bool = False,
    ) -> None:
        """
        Register the serialize and deserialize methods of a class.

        :param obj_class: class to register
        :param check_annotations: validate the annotations of both methods
        :param overwrite: silently replace logic that is already registered
        :raise RepetitionError: logic for the class is already registered
        :raise AnnotationError: the annotations of the methods disagree
        """
        Serialization.register(
            obj_class.serialize,
            obj_class.deserialize,
            obj_class.__name__,
            check_annotations=check_annotations,
            overwrite=overwrite,
        )

    @staticmethod
    def register(
        serializer: SerializerFunction,
        deserializer: DeserializerFunction,
        *types: str,
        check_annotations: bool = True,
        overwrite: bool = False,
    ) -> None:
        """
        Register a serializer and deserializer pair for one or more class names.

        :param serializer: maps an object to plain data
        :param deserializer: maps plain data back to an object
        :param types: names of the classes handled by the pair
        :param check_annotations: validate the signatures and annotations of the pair
        :param overwrite: silently replace logic that is already registered
        :raise TypeError: a function is not callable or lacks a required parameter
        :raise AnnotationError: the annotations of the pair disagree with each other or with types
        :raise RepetitionError: logic for one of the types is already registered
        """
        if not callable(serializer) or not callable(deserializer):
            raise TypeError("Serializers and deserializers must be callable.")
        if check_annotations:
            _check_signatures(inspect.signature(serializer), inspect.signature(deserializer), types)
        if not overwrite:
            taken = [t for t in types if t in SERIALIZER_FUNCS or t in DESERIALIZER_FUNCS]
            if taken:
                raise RepetitionError(f"The logic for type {taken[0]} has already been set")
        for type_ in types:
            SERIALIZER_FUNCS[type_] = serializer
            DESERIALIZER_FUNCS[type_] = deserializer

    @staticmethod
    def clear_serialization_logic(reload_defaults: bool = True) -> None:
        """
        Remove all registered logic.

        :param reload_defaults: register the logic shipped with the package again afterwards
        """
        SERIALIZER_FUNCS.clear()
        DESERIALIZER_FUNCS.clear()
        if reload_defaults:
            serializer_plugins.register_defaults()

    @staticmethod
    def serialize(obj: Any, **kwargs: Any) -> dict[str, Any]:
        r"""
        Apply the serializer registered for the class of an object.

        :param obj: object to serialize
        :param \**kwargs: optional extra keyword arguments
        :raise NotImplementedError: no serializer is registered for the class
        :return: serialized object, annotated with its type
        """
        type_ = obj.__class__.__name__
        if type_ not in SERIALIZER_FUNCS:
            raise NotImplementedError(
                f"There is no serialization function defined for {type_} objects."
            )
        try:
            data = SERIALIZER_FUNCS[type_](obj, **kwargs)
        except Exception:
            logger.exception(f"Serialization of a {type_} failed!")
            raise
        return {"type": type_, "data": data}

    @staticmethod
    def deserialize(obj: Any, **kwargs: Any) -> Any:
        r"""
        Rebuild the objects in plain data, innermost first.

        :param obj: plain data, possibly holding annotated objects at any depth
        :param \**kwargs: optional extra keyword arguments
        :raise NotImplementedError: no deserializer is registered for an annotated type
        :return: deserialized data
        """
        if isinstance(obj, list):
            return [Serialization.deserialize(item, **kwargs) for item in obj]
        if not isinstance(obj, dict):
            return obj
        if "type" not in obj or "data" not in obj:
            return {key: Serialization.deserialize(value, **kwargs) for key, value in obj.items()}
        type_, data = obj["type"], obj["data"]
        if type_ not in DESERIALIZER_FUNCS:
            raise NotImplementedError(
                f"There is no deserialization function defined for {type_} objects."
            )
        if isinstance(data, dict):
            data = {key: Serialization.deserialize(value, **kwargs) for key, value in data.items()}
        return DESERIALIZER_FUNCS[type_](data, **kwargs)

    @staticmethod
    def pack(obj: Any, option: int | None = DEFAULT_PACK_OPTION, **kwargs: Any) -> bytes:
        r"""
        Encode an object, annotated with the package version, as MessagePack bytes.

        :param obj: object to pack
        :param option: ormsgpack options can be specified through this parameter
        :param \**kwargs: optional extra keyword arguments
        :raise TypeError: Failed to serialize the provided object
        :return: packed object
        """
        try:
            return ormsgpack.packb(
                _document(obj),
                default=lambda _: Serialization.serialize(_, **kwargs),
                option=option,
            )
        except TypeError:
            logger.exception(
                "Packing failed, implement a serialization method for this type/structure."
            )
            raise

    @staticmethod
    def unpack(obj: bytes, option: int | None = None, **kwargs: Any) -> tuple[str, Any]:
        r"""
        Decode MessagePack bytes produced by pack.

        :param obj: bytes object to unpack
        :param option: ormsgpack options can be specified through this parameter
        :param \**kwargs: optional extra keyword arguments
        :raise DataFormatError: the bytes do not hold a packed document
        :return: the package version that packed the object and the object itself
        """
        try:
            dict_obj = ormsgpack.unpackb(obj, option=option)
        except (TypeError, ValueError) as exception:
            logger.exception("Unpacking failed!")
            raise DataFormatError(
                "The model file is not a valid MessagePack document."
            ) from exception
        return _open_document(dict_obj, **kwargs)

    @staticmethod
    def dumps(obj: Any, **kwargs: Any) -> str:
        r"""
        Encode an object, annotated with the package version, as JSON text.

        :param obj: object to encode
        :param \**kwargs: optional extra keyword arguments
        :return: JSON text
        """
        return json.dumps(
            _document(obj), default=lambda _: Serialization.serialize(_, **kwargs), indent=1
        )

    @staticmethod
    def loads(text: str, **kwargs: Any) -> tuple[str, Any]:
        r"""
        Decode JSON text produced by dumps.

        :param text: JSON text
        :param \**kwargs: optional extra keyword arguments
        :raise DataFormatError: the text does not hold an encoded document
        :return: the package version that encoded the object and the object itself
        """
        try:
            dict_obj = json.loads(text)
        except json.JSONDecodeError as exception:
            logger.exception("Decoding failed!")
            raise DataFormatError(f"The model file is not valid JSON: {exception}") from exception
        return _open_document(dict_obj, **kwargs)

    @staticmethod
    def save(obj: Any, path: Path | str, **kwargs: Any) -> None:
        r"""
        Write an object to a model file; MessagePack for the suffixes in MSGPACK_SUFFIXES,
        JSON otherwise.

        :param obj: object to store
        :param path: destination file
        :param \**kwargs: optional extra keyword arguments
        """
        target = Path(path)
        if target.suffix in MSGPACK_SUFFIXES:
            target.write_bytes(Serialization.pack(obj, **kwargs))
        else:
            target.write_text(Serialization.dumps(obj, **kwargs), encoding="utf-8")

    @staticmethod
    def load(path: Path | str, **kwargs: Any) -> Any:
        r"""
        Read an object from a model file written by save.

        :param path: model file
        :param \**kwargs: optional extra keyword arguments
        :raise DataFormatError: the file does not hold a stored object
        :return: the stored object
        """
        source = Path(path)
        if source.suffix in MSGPACK_SUFFIXES:
            version, obj = Serialization.unpack(source.read_bytes(), **kwargs)
        else:
            try:
                text = source.read_text(encoding="utf-8")
            except UnicodeDecodeError as exception:
                logger.exception("Decoding failed!")
                raise DataFormatError(
                    f"The model file is not UTF-8 text: {exception}"
                ) from exception
            version, obj = Serialization.loads(text, **kwargs)
        logger.debug(f"Loaded {obj.__class__.__name__} written by version {version}")
        return obj


def _document(obj: Any) -> dict[str, Any]:
    """
    :param obj: object to store
    :return: the object wrapped together with the package version
    """
    # pylint: disable=import-outside-toplevel,cyclic-import
    from tno.regression.nonparametric import __version__

    return {"object": obj, "version": __version__}


def _open_document(dict_obj: Any, **kwargs: Any) -> tuple[str, Any]:
    """
    :param dict_obj: decoded document
    :param kwargs: optional extra keyword arguments
    :raise DataFormatError: the document lacks the object or version entries
    :return: version and deserialized object
    """
    if not isinstance(dict_obj, dict) or "object" not in dict_obj or "version" not in dict_obj:
        raise DataFormatError("The model file does not contain a serialized object.")
    return dict_obj["version"], Serialization.deserialize(dict_obj["object"], **kwargs)


def _check_signatures(
    serializer: inspect.Signature, deserializer: inspect.Signature, types: Sequence[str]
) -> None:
    """
    Validate a serializer and deserializer pair against each other and against the class names
    it is registered for. Annotations are compared as written, so postponed (string)
    annotations match class names.

    :param serializer: signature of the serializer
    :param deserializer: signature of the deserializer
    :param types: names of the classes the pair handles
    :raise TypeError: a function does not take **kwargs, or the deserializer has no obj parameter
    :raise AnnotationError: the deserializer returns another type, or does not take what the
        serializer produces
    """
    for signature in (serializer, deserializer):
        if all(param.kind != param.VAR_KEYWORD for param in signature.parameters.values()):
            raise TypeError("A (de)serializer must accept arbitrary keyword arguments (**kwargs).")
    if "obj" not in deserializer.parameters:
        raise TypeError("A deserializer must take the serialized data as parameter 'obj'.")
    returned = deserializer.return_annotation
    if returned not in types and getattr(returned, "__name__", None) not in types:
        raise AnnotationError(
            f"The deserializer for {', '.join(types)} is annotated to return {returned}. Fix the "
            "annotation or register with check_annotations=False."
        )
    produced, expected = serializer.return_annotation, deserializer.parameters["obj"].annotation
    if produced != expected:
        raise AnnotationError(
            f"The serializer returns {produced}, but the deserializer expects {expected}."
        )
