"""Dynamical sweet spots of flux-modulated fluxonium.

Energies and rates are angular frequencies in rad/us (hbar = 1); coherence
times are in us. Gate-level quantities use ns.
"""
import math

from ._core import (
    CircuitParams,
    EffectiveQubit,
    EvalContext,
    Genome,
    NoiseModel,
    SweetspotError,
    __version__,
    aggregate,
    bounds,
    classify,
    design_gate,
    diagonalize_circuit,
    evaluate,
    filter_weights,
    load_config,
    non_dominated_sort,
    optimize,
    process_fidelity_of_kraus,
    spectral_density,
    truncation_infidelity,
)

TWO_PI = 2.0 * math.pi


def ghz(x):
    """GHz to rad/us."""
    return TWO_PI * 1000.0 * x


__all__ = [
    "CircuitParams", "EffectiveQubit", "EvalContext", "Genome", "NoiseModel", "SweetspotError",
    "aggregate", "bounds", "classify", "design_gate", "diagonalize_circuit", "evaluate",
    "filter_weights", "load_config", "non_dominated_sort", "optimize", "process_fidelity_of_kraus",
    "spectral_density", "truncation_infidelity", "ghz", "TWO_PI", "__version__",
]
