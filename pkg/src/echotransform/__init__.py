"""Temporal-mode state transformation with three-pulse photon echoes.

Compile a transfer matrix into read-pulse schedules, simulate the echoes they
produce, and design optimal unambiguous state discrimination on top.
"""
from .core import (ModeVector, Pulse, PulseTrain, Role, Shape, UnitaryMatrix,
                   apply_unitary, check_unitary, inner_product, phases_equal)
from .kernel import (CALIBRATED_JITTER_SIGMA, EchoEvent, EchoTrace, EnsembleModel,
                     apply_phase_jitter, echo_events, simulate_abstract, simulate_spectral)
from .compiler import (CollisionReport, LayoutParams, Schedule, compile_cascade,
                       decompose_reck, validate)
from .compiler import compile as compile_schedule
from .usd import (DiscriminationDesign, design_n_states, design_qubit_pair, helstrom_bound,
                  idp_bound, qubit_family, symmetric_states)
from .analysis import (AreaReport, BackgroundModel, RateCurve, compute_rates, integrate_areas,
                       sweep_alpha)

__version__ = "0.1.0"

__all__ = [
    "ModeVector", "Pulse", "PulseTrain", "Role", "Shape", "UnitaryMatrix", "apply_unitary",
    "check_unitary", "inner_product", "phases_equal",
    "CALIBRATED_JITTER_SIGMA", "EchoEvent", "EchoTrace", "EnsembleModel", "apply_phase_jitter",
    "echo_events", "simulate_abstract", "simulate_spectral",
    "CollisionReport", "LayoutParams", "Schedule", "compile_cascade", "compile_schedule",
    "decompose_reck", "validate",
    "DiscriminationDesign", "design_n_states", "design_qubit_pair", "helstrom_bound", "idp_bound",
    "qubit_family", "symmetric_states",
    "AreaReport", "BackgroundModel", "RateCurve", "compute_rates", "integrate_areas", "sweep_alpha",
]
