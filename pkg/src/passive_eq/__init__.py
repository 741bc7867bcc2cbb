"""Coherent equalizers for linear passive quantum channels.

Typical use::

    from passive_eq import build_example1, synthesize
    eq, report = synthesize(build_example1())
"""

from .channel import (
    NoiseModel,
    PassiveChannel,
    build_example1,
    build_example2,
    check_condition21,
    check_realizability,
    error_psd,
    make_phi_lambda,
    netlist,
)
from .lti import StateSpace
from .sdp import gamma_sdp, pointwise_bound, reconstruct_K
from .spectral import factor_phi, partition_factor, z_factors
from .synth import Equalizer, SynthesisError, SynthOptions, synthesize, verify

__version__ = "0.1.0"

__all__ = [
    "NoiseModel",
    "PassiveChannel",
    "StateSpace",
    "Equalizer",
    "SynthesisError",
    "SynthOptions",
    "build_example1",
    "build_example2",
    "netlist",
    "check_realizability",
    "check_condition21",
    "make_phi_lambda",
    "error_psd",
    "factor_phi",
    "partition_factor",
    "z_factors",
    "gamma_sdp",
    "reconstruct_K",
    "pointwise_bound",
    "synthesize",
    "verify",
]
