"""From echo traces to error and inconclusive rates.

Areas are integrals of detected intensity over a window around each output
echo. Rates follow the usual definitions

    p_e = A_wrong / (A_wrong + A_right)
    p_? = A_inconclusive / (A_wrong + A_right + A_inconclusive)

after background subtraction and per-mode normalisation.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from . import compiler, kernel
from .errors import NoSignalError, WindowError
from .usd import DiscriminationDesign, design_qubit_pair, helstrom_bound, idp_bound

ROLES = ("right", "wrong", "inconclusive", "aux")


@dataclass(frozen=True, eq=False)
class DetectorTrace:
    """Photodetector record: intensity only, may include background."""

    times: np.ndarray
    intensity: np.ndarray
    sample_dt: float

    @classmethod
    def of(cls, trace) -> "DetectorTrace":
        return cls(np.asarray(trace.times), np.asarray(trace.intensity), trace.sample_dt)

    def __add__(self, other):
        other = np.asarray(other.intensity if hasattr(other, "intensity") else other)
        return DetectorTrace(self.times, self.intensity + other, self.sample_dt)


def read_pulse_tails(times, read_times, height: float, decay: float) -> np.ndarray:
    """Exponential detector ring-down following each read pulse (intensity units)."""
    times = np.asarray(times, dtype=float)
    out = np.zeros_like(times)
    for r in read_times:
        after = times >= r
        out[after] += height * np.exp(-(times[after] - r) / decay)
    return out


@dataclass(frozen=True)
class BackgroundModel:
    """Constant intensity offset plus an optional data-free reference trace."""

    offset: float = 0.0
    reference: DetectorTrace | None = None

    def area(self, t0: float, t1: float, dt: float, samples: int | None = None) -> float:
        """Background area over ``[t0, t1]``; ``samples`` matches the offset
        term to the number of trace samples actually summed."""
        total = 0.0
        if self.offset:
            total += self.offset * (samples * dt if samples is not None else t1 - t0)
        if self.reference is not None:
            ref = self.reference
            sel = (ref.times >= t0) & (ref.times <= t1)
            total += float(np.sum(ref.intensity[sel]) * ref.sample_dt)
        return total


@dataclass(frozen=True)
class ModeArea:
    label: str
    window: tuple
    raw_area: float
    background: float
    corrected_area: float
    role: str
    scaling: float = 1.0

    @property
    def normalized_area(self) -> float:
        return self.corrected_area * self.scaling


@dataclass(frozen=True)
class AreaReport:
    modes: tuple

    def area(self, role: str) -> float:
        return sum(m.normalized_area for m in self.modes if m.role == role)

    def by_label(self, label: str) -> ModeArea:
        return next(m for m in self.modes if m.label == label)


def integrate_areas(trace, bindings, window_half_width: float = 15.0,
                    background: BackgroundModel | None = None, scaling=None) -> AreaReport:
    """Integrate intensity over ``[t - w, t + w]`` around each bound output.

    ``bindings`` is a sequence of ``(label, time_ns, role)``. ``scaling`` is an
    optional per-binding factor applied to corrected areas.
    """
    background = background or BackgroundModel()
    times = np.asarray(trace.times)
    intensity = np.asarray(trace.intensity)
    dt = trace.sample_dt
    windows = sorted((t - window_half_width, t + window_half_width, k) for k, (_, t, _) in enumerate(bindings))
    for (a0, a1, _), (b0, b1, _) in zip(windows, windows[1:]):
        if b0 <= a1:
            raise WindowError(f"windows [{a0}, {a1}] and [{b0}, {b1}] overlap")
    if windows and (windows[0][0] < times[0] - 0.5 * dt or windows[-1][1] > times[-1] + 0.5 * dt):
        raise WindowError("integration window extends beyond the trace")
    scaling = np.ones(len(bindings)) if scaling is None else np.asarray(scaling, dtype=float)

    modes = []
    for k, (label, t, role) in enumerate(bindings):
        if role not in ROLES:
            raise ValueError(f"unknown role {role!r}")
        t0, t1 = t - window_half_width, t + window_half_width
        sel = (times >= t0) & (times <= t1)
        raw = float(np.sum(intensity[sel]) * dt)
        bg = background.area(t0, t1, dt, int(np.count_nonzero(sel)))
        modes.append(ModeArea(label, (t0, t1), raw, bg, max(raw - bg, 0.0), role, float(scaling[k])))
    return AreaReport(tuple(modes))


@dataclass(frozen=True)
class Rates:
    p_e: float
    p_q: float

    @property
    def p_e_defined(self) -> bool:
        return not np.isnan(self.p_e)


def compute_rates(*reports: AreaReport) -> Rates:
    """Error and inconclusive rates from one or more reports (areas are pooled)."""
    a_r = sum(r.area("right") for r in reports)
    a_w = sum(r.area("wrong") for r in reports)
    a_q = sum(r.area("inconclusive") for r in reports)
    total = a_r + a_w + a_q
    if total <= 0:
        raise NoSignalError("all output areas are zero")
    p_e = a_w / (a_w + a_r) if a_w + a_r > 0 else float("nan")
    return Rates(p_e, a_q / total)


# -- schedule helpers ----------------------------------------------------------

def mode_gains(schedule: compiler.Schedule, model: kernel.EnsembleModel) -> np.ndarray:
    """Magnitude of the overall gain of each output mode relative to the target."""
    m = kernel.effective_matrix(schedule.train, model, schedule.read_cells)
    gains = np.ones(len(schedule.output_bindings))
    for i in range(min(m.shape[0], len(gains))):
        nz = np.flatnonzero(np.abs(schedule.target[i]) > compiler.ZERO_AMPLITUDE)
        if nz.size:
            gains[i] = abs(m[i, nz[0]]) / abs(schedule.target[i, nz[0]])
    return gains


def cluster_scaling(schedule, model) -> np.ndarray:
    """Per-output area normalisation undoing storage decay and read depletion."""
    return 1.0 / mode_gains(schedule, model) ** 2


def usd_bindings(schedule, design: DiscriminationDesign, state: int) -> list[tuple]:
    out = []
    for (label, t), (role, idx) in zip(schedule.output_bindings, design.mode_roles):
        if role == "inconclusive":
            out.append((label, t, "inconclusive"))
        else:
            out.append((label, t, "right" if idx == state else "wrong"))
    return out


def projective_bindings(schedule, state: int) -> list[tuple]:
    return [(label, t, "right" if i == state else "wrong")
            for i, (label, t) in enumerate(schedule.output_bindings)]


# Optimal two-outcome projective measurement for (cos a, +-sin a): project on
# (1, 1)/sqrt2 and (1, -1)/sqrt2 of the two occupied modes.
VON_NEUMANN = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def trace_window(schedule) -> tuple[float, float]:
    """Echo window widened to cover every output binding; rows without read
    pulses still need their (empty) integration window."""
    t0, t1 = kernel.echo_window(schedule.train)
    pad = 4 * schedule.pulse_duration
    return min(t0, schedule.output_times.min() - pad), max(t1, schedule.output_times.max() + pad)


def averaged_trace(schedule, amplitudes, model, trials: int, seed_prefix, window=None) -> DetectorTrace:
    """Mean detected intensity over ``trials`` jittered runs of one input."""
    window = window or trace_window(schedule)
    train = schedule.with_input(amplitudes)
    runs = 1 if model.phase_jitter_sigma == 0 else trials
    acc = None
    for k in range(runs):
        noisy = kernel.apply_phase_jitter(train, model, [*seed_prefix, k], schedule.mode_spacing)
        tr, _ = kernel.simulate_abstract(noisy, model, window)
        acc = tr.intensity if acc is None else acc + tr.intensity
    return DetectorTrace(tr.times, acc / runs, tr.sample_dt)


def measure_design(schedule, design, model, trials=1, seed_prefix=(0,),
                   window_half_width=15.0, background=None, states=None) -> tuple[Rates, list[AreaReport]]:
    """Simulate every input of a USD design through its schedule and pool the areas."""
    scaling = cluster_scaling(schedule, model)
    states = range(design.n_states) if states is None else states
    reports = []
    for i in states:
        tr = averaged_trace(schedule, design.input_amplitudes(i), model, trials, (*seed_prefix, i))
        reports.append(integrate_areas(tr, usd_bindings(schedule, design, i), window_half_width,
                                       background, scaling))
    return compute_rates(*reports), reports


# -- alpha sweep -----------------------------------------------------------------

CURVE_COLUMNS = ("alpha_rad", "overlap", "p_e_vn", "p_e_usd", "p_q_usd", "helstrom", "idp")


@dataclass(frozen=True)
class RatePoint:
    alpha: float
    overlap: float
    p_e_vn: float
    p_e_usd: float
    p_q_usd: float
    helstrom: float
    idp: float

    def row(self):
        return (self.alpha, self.overlap, self.p_e_vn, self.p_e_usd, self.p_q_usd, self.helstrom, self.idp)


@dataclass(frozen=True)
class RateCurve:
    points: tuple
    trials_per_point: int

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, "alpha" if name == "alpha_rad" else name) for p in self.points])


def sweep_alpha(alphas, scenario: str = "both", model: kernel.EnsembleModel = kernel.EnsembleModel(),
                seed: int = 0, trials: int = 1000,
                layout: compiler.LayoutParams = compiler.LayoutParams(),
                window_half_width: float = 15.0,
                background: BackgroundModel | None = None) -> RateCurve:
    """Design, compile, simulate and analyse the qubit family for each alpha.

    Trial ``t`` of input ``i`` at sweep index ``a`` in scenario ``s`` uses the
    seed ``(seed, a, s, i, t)``, so results do not depend on execution order.
    """
    if scenario not in ("usd", "von_neumann", "both"):
        raise ValueError(f"unknown scenario {scenario!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lay = replace(layout, allow_nonunitary=True)
    vn_sched = compiler.compile(VON_NEUMANN, layout) if scenario != "usd" else None
    points = []
    for a_idx, alpha in enumerate(alphas):
        design = design_qubit_pair(alpha)
        plus, minus = design.inputs
        nan = float("nan")
        p_e_usd = p_q_usd = p_e_vn = nan
        if scenario in ("usd", "both"):
            sched = compiler.compile(design.transfer_matrix(), lay)
            rates, _ = measure_design(sched, design, model, trials, (seed, a_idx, 0),
                                      window_half_width, background)
            p_e_usd, p_q_usd = rates.p_e, rates.p_q
        if vn_sched is not None:
            scaling = cluster_scaling(vn_sched, model)
            reports = []
            for i in range(2):
                tr = averaged_trace(vn_sched, design.input_amplitudes(i), model, trials, (seed, a_idx, 1, i))
                reports.append(integrate_areas(tr, projective_bindings(vn_sched, i), window_half_width,
                                               background, scaling))
            p_e_vn = compute_rates(*reports).p_e
        points.append(RatePoint(float(alpha), abs(np.cos(2 * alpha)), p_e_vn, p_e_usd, p_q_usd,
                                helstrom_bound(plus, minus), idp_bound(plus, minus)))
    return RateCurve(tuple(points), trials)


# -- export ----------------------------------------------------------------------

def _g(x) -> str:
    return format(float(x), ".17g")


def curve_to_csv(curve: RateCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CURVE_COLUMNS)
    for p in curve.points:
        w.writerow([_g(x) for x in p.row()])
    return buf.getvalue()


def curve_from_csv(text: str, trials_per_point: int = 0) -> RateCurve:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CURVE_COLUMNS:
        raise ValueError(f"expected header {','.join(CURVE_COLUMNS)}")
    return RateCurve(tuple(RatePoint(*(float(x) for x in r)) for r in rows[1:]), trials_per_point)


def curve_to_plotdata(curve: RateCurve) -> str:
    lines = ["# " + " ".join(CURVE_COLUMNS)]
    lines += [" ".join(_g(x) for x in p.row()) for p in curve.points]
    return "\n".join(lines) + "\n"


AREA_COLUMNS = ("label", "t0_ns", "t1_ns", "raw_area", "background", "corrected_area", "scaling", "role")


def areas_to_csv(report: AreaReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AREA_COLUMNS)
    for m in report.modes:
        w.writerow([m.label, _g(m.window[0]), _g(m.window[1]), _g(m.raw_area), _g(m.background),
                    _g(m.corrected_area), _g(m.scaling), m.role])
    return buf.getvalue()


def areas_from_csv(text: str) -> AreaReport:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != AREA_COLUMNS:
        raise ValueError(f"expected header {','.join(AREA_COLUMNS)}")
    modes = [ModeArea(r[0], (float(r[1]), float(r[2])), float(r[3]), float(r[4]), float(r[5]),
                      r[7], float(r[6])) for r in rows[1:]]
    return AreaReport(tuple(modes))
