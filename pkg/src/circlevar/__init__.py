"""circlevar: change of variable on the circle and Fourier coefficient decay.

Toolkit for desk-scale experiments with circle homeomorphisms: thin
Cantor schemes, smoothing changes of variable, adversarial function
families, critical Sobolev seminorms, and the conformal (star-shaped
domain) change of variable, each paired with certificate-style
verification.
"""

from .core import (
    CircleFunction,
    Descriptor,
    FourierSpectrum,
    LacunaryCosine,
    ModulusOfContinuity,
    PiecewiseConstant,
    PiecewiseLinear,
    SineOfPiecewiseLinear,
    TrigPolynomial,
    WeightSequence,
    a_eps_norm,
    ap_norm,
    compute_spectrum,
    decay_profile,
    difference_identity_check,
    fejer_sum,
    integral_modulus,
    integral_modulus_table,
    integral_seminorm,
    pairing_inequality_check,
    partial_sum,
    sinc_squared_integral,
    sobolev_seminorm,
    stieltjes_integral,
    uniform_modulus,
)
from .exact import PiLinear
from . import errors

__all__ = [
    "CircleFunction",
    "Descriptor",
    "FourierSpectrum",
    "LacunaryCosine",
    "ModulusOfContinuity",
    "PiecewiseConstant",
    "PiecewiseLinear",
    "SineOfPiecewiseLinear",
    "TrigPolynomial",
    "WeightSequence",
    "PiLinear",
    "errors",
    "a_eps_norm",
    "ap_norm",
    "compute_spectrum",
    "decay_profile",
    "difference_identity_check",
    "fejer_sum",
    "integral_modulus",
    "integral_modulus_table",
    "integral_seminorm",
    "pairing_inequality_check",
    "partial_sum",
    "sinc_squared_integral",
    "sobolev_seminorm",
    "stieltjes_integral",
    "uniform_modulus",
]
