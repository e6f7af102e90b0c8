"""Compile a transfer matrix into a read-pulse schedule.

Data mode ``j`` is a data pulse at ``d_j``. Output component ``i`` is built by
a cluster of read pulses, one per nonzero ``U[i, j]``, with read ``(i, j)`` at
``T_i + d_max - d_j``. The echo of data ``j`` via read ``(i, j)`` then lands at
``T_i + d_max - t_write`` for every ``j``, so the cluster's echoes interfere
into ``sum_j U[i, j] a_j``. All other (read, data) pairs produce auxiliary
echoes; cluster base times ``T_i`` are chosen greedily so that none of them
falls near an output time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_DURATION_NS, Pulse, PulseTrain, Role, Shape,
                   check_unitary)
from .errors import (AmplitudeRangeError, LayoutInfeasibleError,
                     NotUnitaryError, ShapeError)

ZERO_AMPLITUDE = 1e-12


@dataclass(frozen=True)
class LayoutParams:
    mode_spacing: float = 100.0         # ns between data modes
    data_offset: float = 300.0          # ns, write -> first data pulse
    read_delay: float = 2000.0          # ns, last data pulse -> first read cluster
    write_time: float = 0.0
    pulse_duration: float = DEFAULT_DURATION_NS
    shape: Shape = Shape.RECTANGULAR
    cluster_guard: float | None = None  # ns; None -> 2 * pulse_duration
    max_horizon: int = 50               # max cluster-to-cluster step, in mode spacings
    t2_compensation: float | None = 18.0  # us; equalises storage decay within a cluster
    allow_nonunitary: bool = False
    write_amplitude: float = 1.0
    write_phase: float = 0.0

    @property
    def guard(self) -> float:
        return 2.0 * self.pulse_duration if self.cluster_guard is None else self.cluster_guard


@dataclass(frozen=True, eq=False)
class Schedule:
    train: PulseTrain
    input_bindings: tuple          # ((label, data time ns), ...)
    output_bindings: tuple         # ((label, echo time ns), ...)
    aux_times: tuple
    target: np.ndarray
    read_cells: tuple              # (row, col) of each read pulse, time order
    mode_spacing: float
    cluster_guard: float
    write_factor: complex = 1.0    # conj(w): overall factor on every output
    cluster_bases: tuple = field(default=())

    @property
    def pulse_duration(self) -> float:
        return max(p.duration for p in self.train)

    @property
    def output_times(self) -> np.ndarray:
        return np.array([t for _, t in self.output_bindings])

    @property
    def read_clusters(self) -> list[int]:
        return [i for i, _ in self.read_cells]

    def with_input(self, amplitudes) -> PulseTrain:
        """Pulse train with the data pulses carrying ``amplitudes``."""
        return self.train.with_data(np.asarray(amplitudes, dtype=complex))

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return (self.train == other.train and self.input_bindings == other.input_bindings
                and self.output_bindings == other.output_bindings
                and self.aux_times == other.aux_times
                and np.array_equal(self.target, other.target)
                and self.read_cells == other.read_cells
                and self.mode_spacing == other.mode_spacing
                and self.cluster_guard == other.cluster_guard
                and self.write_factor == other.write_factor
                and self.cluster_bases == other.cluster_bases)


def _as_matrix(u, allow_nonunitary):
    m = np.atleast_2d(np.asarray(u, dtype=complex))
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {m.shape}")
    if not allow_nonunitary:
        ok, dev = check_unitary(m)
        if not ok:
            raise NotUnitaryError(f"max |U^H U - I| = {dev:.3e}; pass allow_nonunitary for projective designs")
    if np.any(np.abs(m) > 1 + ZERO_AMPLITUDE):
        raise AmplitudeRangeError(f"|U_ij| = {np.abs(m).max():.6g} > 1")
    return m


def compile(u, layout: LayoutParams = LayoutParams()) -> Schedule:
    m = _as_matrix(u, layout.allow_nonunitary)
    d_out, d_in = m.shape
    s = layout.mode_spacing
    tw = layout.write_time
    data_t = tw + layout.data_offset + s * np.arange(d_in)
    d_max, d_min = data_t[-1], data_t[0]
    guard = layout.guard
    dur = layout.pulse_duration
    nonzero = [[j for j in range(d_in) if abs(m[i, j]) > ZERO_AMPLITUDE] for i in range(d_out)]

    outputs: list[float] = []
    aux: list[float] = []
    read_times: list[float] = []
    bases: list[float] = []
    base0 = d_max + layout.read_delay
    for i in range(d_out):
        start = base0 if i == 0 else bases[-1] + s
        for step in range(layout.max_horizon + 1):
            base = start + step * s
            out = base + d_max - tw
            reads = [base + d_max - data_t[j] for j in nonzero[i]]
            new_aux = [r + data_t[jp] - tw for r, j in zip(reads, nonzero[i])
                       for jp in range(d_in) if jp != j]
            all_out = outputs + [out]
            all_aux = aux + new_aux
            if any(abs(a - o) < guard for a in all_aux for o in all_out):
                continue
            if any(abs(o - out) < max(dur, guard) for o in outputs):
                continue
            if any(abs(r - q) < dur for r in reads for q in read_times):
                continue
            break
        else:
            raise LayoutInfeasibleError(
                f"no collision-free position for output {i} within {layout.max_horizon} mode spacings")
        bases.append(base)
        outputs.append(out)
        aux.extend(new_aux)
        read_times.extend(reads)

    pulses = [Pulse(tw, Role.WRITE, layout.write_amplitude, layout.write_phase, dur, layout.shape)]
    pulses += [Pulse(t, Role.DATA, 1.0, 0.0, dur, layout.shape) for t in data_t]
    cells = []
    for i, base in enumerate(bases):
        ref = base + d_max - d_min  # latest read slot of the cluster
        for j in nonzero[i]:
            t = base + d_max - data_t[j]
            amp = abs(m[i, j])
            if layout.t2_compensation is not None:
                amp *= np.exp(-(ref - t) / (layout.t2_compensation * 1e3))
            pulses.append(Pulse(t, Role.READ, amp, float(np.angle(m[i, j])), dur, layout.shape))
            cells.append((t, i, j))
    cells.sort()
    w = layout.write_amplitude * np.exp(1j * layout.write_phase)

    return Schedule(
        train=PulseTrain(tuple(pulses)),
        input_bindings=tuple((f"in{j}", float(t)) for j, t in enumerate(data_t)),
        output_bindings=tuple((f"out{i}", float(t)) for i, t in enumerate(outputs)),
        aux_times=tuple(_merge(sorted(aux), 0.5 * dur)),
        target=m,
        read_cells=tuple((i, j) for _, i, j in cells),
        mode_spacing=s,
        cluster_guard=guard,
        write_factor=complex(np.conj(w)),
        cluster_bases=tuple(float(b) for b in bases),
    )


def _merge(times, tol):
    out = []
    for t in times:
        if not out or t - out[-1] > tol:
            out.append(float(t))
    return out


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Collision:
    time: float
    pairs: tuple          # ((read_index, data_index), ...)
    classification: str   # intended | auxiliary | forbidden
    reason: str = ""


@dataclass(frozen=True)
class CollisionReport:
    collisions: tuple

    @property
    def forbidden(self) -> list[Collision]:
        return [c for c in self.collisions if c.classification == "forbidden"]

    @property
    def intended(self) -> list[Collision]:
        return [c for c in self.collisions if c.classification == "intended"]

    @property
    def auxiliary(self) -> list[Collision]:
        return [c for c in self.collisions if c.classification == "auxiliary"]

    @property
    def ok(self) -> bool:
        return not self.forbidden

    def summary(self) -> str:
        lines = [f"{len(self.intended)} output echoes, {len(self.auxiliary)} auxiliary, "
                 f"{len(self.forbidden)} forbidden"]
        for c in self.forbidden:
            lines.append(f"  FORBIDDEN t={c.time:.3f} ns pairs={list(c.pairs)} {c.reason}")
        return "\n".join(lines)


def validate(schedule: Schedule, duration: float | None = None) -> CollisionReport:
    """Enumerate every (read, data) echo and classify it against the outputs."""
    dur = schedule.pulse_duration if duration is None else duration
    train = schedule.train
    tw = train.writes[0].center_time
    data_t = [p.center_time for p in train.data]
    reads = train.reads
    echoes = sorted(
        (r.center_time + data_t[jp] - tw, k, jp)
        for k, r in enumerate(reads) for jp in range(len(data_t)))
    groups: list[list] = []
    for e in echoes:
        if groups and e[0] - groups[-1][0][0] <= 0.5 * dur:
            groups[-1].append(e)
        else:
            groups.append([e])

    outs = schedule.output_bindings
    result = []
    for g in groups:
        t = float(np.mean([e[0] for e in g]))
        pairs = tuple((k, jp) for _, k, jp in g)
        hit = [i for i, (_, to) in enumerate(outs) if abs(t - to) <= 0.5 * dur]
        if hit:
            i = hit[0]
            stray = [(k, jp) for k, jp in pairs if schedule.read_cells[k] != (i, jp)]
            if stray:
                result.append(Collision(t, pairs, "forbidden", f"auxiliary pairs {stray} on {outs[i][0]}"))
            else:
                result.append(Collision(t, pairs, "intended"))
            continue
        near = [lab for lab, to in outs if abs(t - to) <= dur]
        if near:
            result.append(Collision(t, pairs, "forbidden", f"within {dur} ns of {near}"))
        else:
            result.append(Collision(t, pairs, "auxiliary"))
    for a in range(len(outs)):
        for b in range(a + 1, len(outs)):
            if abs(outs[a][1] - outs[b][1]) < dur:
                result.append(Collision(outs[a][1], (), "forbidden",
                                        f"outputs {outs[a][0]} and {outs[b][0]} overlap"))
    return CollisionReport(tuple(result))


# -- triangular (Reck) decomposition -------------------------------------------

@dataclass(frozen=True)
class Rotation:
    """Two-mode rotation on modes ``(p, p+1)``.

    ``[[cos t, -exp(-i phi) sin t], [exp(i phi) sin t, cos t]]``; ``tan t`` is
    the amplitude ratio transferred between the two modes.
    """

    modes: tuple
    theta: float
    phi: float

    def block(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        e = np.exp(1j * self.phi)
        return np.array([[c, -np.conj(e) * s], [e * s, c]], dtype=complex)

    def matrix(self, d: int) -> np.ndarray:
        out = np.eye(d, dtype=complex)
        p, q = self.modes
        out[np.ix_([p, q], [p, q])] = self.block()
        return out


@dataclass(frozen=True)
class ReckDecomposition:
    rotations: tuple
    phases: np.ndarray  # unit-modulus diagonal applied first

    @property
    def dim(self) -> int:
        return len(self.phases)

    def product(self) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for r in self.rotations:
            u = u @ r.matrix(self.dim)
        return u @ np.diag(self.phases)


def decompose_reck(u, skip_below: float = 1e-13) -> ReckDecomposition:
    """Factor ``U = R_1 R_2 ... R_m diag(phases)`` into nearest-neighbour rotations.

    Entries below the diagonal are nulled column by column from the bottom up;
    rotations that would act on an already-zero entry are omitted.
    """
    v = np.array(u, dtype=complex)
    ok, dev = check_unitary(v)
    if not ok:
        raise NotUnitaryError(f"max |U^H U - I| = {dev:.3e}")
    d = v.shape[0]
    rots = []
    for j in range(d - 1):
        for i in range(d - 1, j, -1):
            x, y = v[i - 1, j], v[i, j]
            if abs(y) < skip_below:
                continue
            theta = float(np.arctan2(abs(y), abs(x)))
            phi = float(np.angle(y) - (np.angle(x) if abs(x) > 0 else 0.0))
            r = Rotation((i - 1, i), theta, phi)
            v = r.matrix(d).conj().T @ v
            rots.append(r)
    phases = np.diag(v).copy()
    return ReckDecomposition(tuple(rots), phases / np.abs(phases))


def compile_cascade(u, layout: LayoutParams = LayoutParams()) -> list[Schedule]:
    """One schedule per elementary stage, in the order they act on the data:
    the phase layer first, then the rotations from last to first."""
    dec = decompose_reck(u)
    d = dec.dim
    stages = [compile(np.diag(dec.phases), layout)]
    stages += [compile(r.matrix(d), layout) for r in reversed(dec.rotations)]
    return stages
