from .field import PolyVectorField, linear_field
from .parser import (ExponentError, ParameterOrderError, ParseError, UnknownIdentifierError,
                     parse_system)
from .polynomial import MAX_DEGREE, Monomial, TriPolynomial, X, Y, Z
from .zoo import (ParameterRangeError, UnknownSystemError, ZooEntry, resolve_params, zoo,
                  zoo_entry, zoo_ids)

__all__ = [
    "ExponentError", "MAX_DEGREE", "Monomial", "ParameterOrderError", "ParameterRangeError",
    "ParseError", "PolyVectorField", "TriPolynomial", "UnknownIdentifierError",
    "UnknownSystemError", "X", "Y", "Z", "ZooEntry", "linear_field", "parse_system",
    "resolve_params", "zoo", "zoo_entry", "zoo_ids",
]
