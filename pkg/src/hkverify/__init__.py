"""Numerical verification of heat kernel and Green function envelopes for
Brownian motion plus an independent isotropic α-stable process, killed on
leaving an open set."""

from .envelopes import (ComparabilityConstants, EnvelopePair, dirichlet_envelope, green_f, green_g,
                        h_envelope, jump_intensity, levy_exponent, phi, q_form, stable_constant, stable_form,
                        survival_envelope)
from .errors import CensoringError, ConvergenceError, InputError, NoThresholdError, SingularInputError
from .fitting import fit_constant
from .gk import QuadratureResult
from .model import (Ball, Box, HalfSpace, Interval, ModelParams, SinusoidalHalfSpaceLike, contains, delta,
                    regime_thresholds, scaled_domain)

__version__ = "0.1.0"

__all__ = [
    "Ball", "Box", "CensoringError", "ComparabilityConstants", "ConvergenceError", "EnvelopePair",
    "HalfSpace", "InputError", "Interval", "ModelParams", "NoThresholdError", "QuadratureResult",
    "SingularInputError", "SinusoidalHalfSpaceLike", "contains", "delta", "dirichlet_envelope",
    "fit_constant", "green_f", "green_g", "h_envelope", "jump_intensity", "levy_exponent", "phi",
    "q_form", "regime_thresholds", "scaled_domain", "stable_constant", "stable_form", "survival_envelope",
]
