"""Shared value types and small dense linear algebra.

Complex amplitudes are plain Python/numpy ``complex`` values. All times are in
nanoseconds, phases in radians.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, NotUnitaryError, OrderingError, ShapeError

UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
PHASE_TOL = 1e-9

# default pulse length of the experiment
DEFAULT_DURATION_NS = 15.0


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def phases_equal(a: float, b: float, tol: float = PHASE_TOL) -> bool:
    """Compare two phases modulo 2*pi."""
    d = np.angle(np.exp(1j * (a - b)))
    return abs(d) <= tol


@dataclass(frozen=True, eq=False)
class ModeVector:
    """Complex amplitudes over an ordered set of labelled temporal modes."""

    amplitudes: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        labels = tuple(self.labels) if len(self.labels) else tuple(f"m{j}" for j in range(amps.size))
        if amps.size < 1 or len(labels) != amps.size:
            raise DimensionError(f"{amps.size} amplitudes but {len(labels)} labels")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitude")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    @property
    def is_normalized(self) -> bool:
        return abs(np.sum(np.abs(self.amplitudes) ** 2) - 1.0) <= NORM_TOL

    def normalized(self) -> "ModeVector":
        return ModeVector(self.amplitudes / self.norm, self.labels)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, ModeVector):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.amplitudes, other.amplitudes)

    def __repr__(self):
        return f"ModeVector({np.array2string(self.amplitudes, precision=4)}, labels={self.labels})"


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = _frozen(self.entries)
        ok, dev = check_unitary(m)
        if not ok:
            raise NotUnitaryError(f"max |U^H U - I| = {dev:.3e} exceeds {UNITARY_TOL:g}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def check_unitary(m) -> tuple[bool, float]:
    """Return ``(is_unitary, max_deviation)`` for a square matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) if m.size else 0.0
    return dev <= UNITARY_TOL, dev


def inner_product(a: ModeVector, b: ModeVector) -> complex:
    """<a|b> = sum conj(a_j) b_j."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.labels != b.labels:
        raise DimensionError("mode labels differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_unitary(u: UnitaryMatrix, v: ModeVector, labels: Sequence[str] | None = None) -> ModeVector:
    if u.dim != v.dim:
        raise DimensionError(f"{u.dim}x{u.dim} matrix applied to {v.dim}-vector")
    return ModeVector(u.entries @ v.amplitudes, labels if labels is not None else v.labels)


class Role(str, Enum):
    WRITE = "write"
    DATA = "data"
    READ = "read"


class Shape(str, Enum):
    RECTANGULAR = "rectangular"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class Pulse:
    """A single optical pulse.

    ``duration`` is the full width in ns (for gaussians, the intensity FWHM);
    ``amplitude`` is a dimensionless field scale.
    """

    center_time: float
    role: Role
    amplitude: float = 1.0
    phase: float = 0.0
    duration: float = DEFAULT_DURATION_NS
    shape: Shape = Shape.RECTANGULAR

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "shape", Shape(self.shape))
        for name in ("center_time", "amplitude", "phase", "duration"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")

    @property
    def complex_amplitude(self) -> complex:
        return self.amplitude * np.exp(1j * self.phase)

    def envelope(self, t):
        """Real field envelope with unit peak, evaluated at absolute times ``t``."""
        x = np.asarray(t, dtype=float) - self.center_time
        if self.shape is Shape.RECTANGULAR:
            half = 0.5 * self.duration
            return ((x >= -half) & (x < half)).astype(float)
        return np.exp(-2.0 * np.log(2.0) * (x / self.duration) ** 2)

    @property
    def envelope_area(self) -> float:
        """Integral of the unit-peak envelope, in ns."""
        if self.shape is Shape.RECTANGULAR:
            return self.duration
        return self.duration * np.sqrt(np.pi / (2.0 * np.log(2.0)))

    @property
    def support(self) -> float:
        """Half-width beyond which the envelope is negligible."""
        return 0.5 * self.duration if self.shape is Shape.RECTANGULAR else 3.0 * self.duration


@dataclass(frozen=True)
class PulseTrain:
    """Time-ordered pulses; construction sorts and rejects coincident centers."""

    pulses: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ps = tuple(sorted(self.pulses, key=lambda p: p.center_time))
        for a, b in zip(ps, ps[1:]):
            if b.center_time == a.center_time:
                raise OrderingError(f"two pulses at t = {a.center_time} ns")
        object.__setattr__(self, "pulses", ps)

    def __iter__(self):
        return iter(self.pulses)

    def __len__(self):
        return len(self.pulses)

    def insert(self, pulse: Pulse) -> "PulseTrain":
        return PulseTrain(self.pulses + (pulse,))

    def by_role(self, role) -> list[Pulse]:
        role = Role(role)
        return [p for p in self.pulses if p.role is role]

    @property
    def writes(self):
        return self.by_role(Role.WRITE)

    @property
    def data(self):
        return self.by_role(Role.DATA)

    @property
    def reads(self):
        return self.by_role(Role.READ)

    @property
    def role_complete(self) -> bool:
        w = self.writes
        return (len(w) == 1 and self.pulses[0] is w[0]
                and len(self.data) > 0 and len(self.reads) > 0)

    def map_role(self, role, fn) -> "PulseTrain":
        """Apply ``fn(index, pulse) -> pulse`` to every pulse of ``role``."""
        role = Role(role)
        out, k = [], 0
        for p in self.pulses:
            if p.role is role:
                p = fn(k, p)
                k += 1
            out.append(p)
        return PulseTrain(tuple(out))

    def with_data(self, amplitudes: Iterable[complex]) -> "PulseTrain":
        """Load complex amplitudes onto the data pulses in time order."""
        amps = np.asarray(list(amplitudes), dtype=complex)
        if amps.size != len(self.data):
            raise DimensionError(f"{amps.size} amplitudes for {len(self.data)} data pulses")
        return self.map_role(Role.DATA, lambda k, p: replace(
            p, amplitude=float(abs(amps[k])), phase=float(np.angle(amps[k]))))
