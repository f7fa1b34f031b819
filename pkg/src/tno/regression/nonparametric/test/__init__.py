"""
Testing module of the tno.regression.nonparametric library
"""
