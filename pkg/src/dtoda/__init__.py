"""Conformal welding, Grunsky coefficients, Toda coordinates and tau functions."""

from .coords import CoordinateVector, direct_chart, extended_chart, inverse_chart, wz_moments
from .grunsky import UnivalentPair, faber, grunsky
from .series import TruncatedSeries
from .tau import log_tau_direct, log_tau_extended, log_tau_inverse
from .welding import CircleHomeo, MobiusParams, mobius_pair, weld

__version__ = "0.1.0"

__all__ = [
    "CircleHomeo",
    "CoordinateVector",
    "MobiusParams",
    "TruncatedSeries",
    "UnivalentPair",
    "direct_chart",
    "extended_chart",
    "faber",
    "grunsky",
    "inverse_chart",
    "log_tau_direct",
    "log_tau_extended",
    "log_tau_inverse",
    "mobius_pair",
    "weld",
    "wz_moments",
]
