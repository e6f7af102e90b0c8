"""Echo formation in an inhomogeneously broadened ensemble.

Two independent routes are provided:

* :func:`simulate_abstract` works directly in the temporal-mode algebra: every
  (read pulse, data pulse) pair emits one echo at ``t_read + t_data - t_write``
  and coincident echoes add coherently.
* :func:`simulate_spectral` evaluates the small-area three-pulse echo spectrum
  ``conj(E_write(f)) * E_data(f) * E_read(f)`` on a frequency grid and inverse
  transforms it.

Both apply the same storage decay ``exp(-(t_echo - t_data) / T2)`` to every
echo contribution. Times are in ns, T2 in microseconds, frequencies in GHz.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .core import Pulse, PulseTrain, Role, Shape
from .errors import GridTooCoarseError, IncompleteTrainError, OrderingError

# Read-phase noise giving ~4 % USD error rate (see tests/test_kernel.py::test_jitter_calibration)
CALIBRATED_JITTER_SIGMA = 0.4
ALIAS_LEVEL = 1e-6


@dataclass(frozen=True)
class EnsembleModel:
    bandwidth: float = 2.0          # GHz, spectral grid span; also sets sample_dt
    grid_points: int = 2 ** 16
    t2_coherence: float = 18.0      # us
    optical_depth_scale: float = 1.0
    phase_jitter_sigma: float = 0.0  # rad
    jitter_intra_factor: float = 0.2
    read_depletion: float = 0.0     # fraction of coherence consumed per read pulse
    edge_sigma: float = 1.0         # ns, gaussian rounding of rectangular edges (spectral path)

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.bandwidth <= 0 or self.t2_coherence <= 0:
            raise ValueError("bandwidth and t2_coherence must be positive")
        if self.optical_depth_scale < 0 or self.phase_jitter_sigma < 0:
            raise ValueError("optical_depth_scale and phase_jitter_sigma must be >= 0")
        if not 0 <= self.read_depletion < 1:
            raise ValueError("read_depletion must be in [0, 1)")
        if self.edge_sigma <= 0:
            raise ValueError("edge_sigma must be positive")

    @property
    def sample_dt(self) -> float:
        return 1.0 / self.bandwidth

    def decay(self, storage_ns):
        return np.exp(-np.asarray(storage_ns, dtype=float) / (self.t2_coherence * 1e3))


@dataclass(frozen=True, eq=False)
class EchoTrace:
    times: np.ndarray
    field: np.ndarray
    sample_dt: float

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        f = np.array(self.field, dtype=complex)
        if t.shape != f.shape:
            raise ValueError("times and field differ in length")
        t.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "field", f)
        object.__setattr__(self, "sample_dt", float(self.sample_dt))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class EchoEvent:
    time: float
    amplitude: complex
    contributions: tuple  # ((read_index, data_index), ...)


@dataclass(frozen=True)
class _Contribution:
    time: float
    amplitude: complex
    read_index: int
    data_index: int
    data_pulse: Pulse


def check_train(train: PulseTrain):
    """Return ``(write, data, reads)`` or raise for malformed trains."""
    writes, data, reads = train.writes, train.data, train.reads
    if len(writes) != 1 or not data or not reads:
        raise IncompleteTrainError(
            f"need 1 write, >=1 data, >=1 read; got {len(writes)}/{len(data)}/{len(reads)}")
    if train.pulses[0] is not writes[0]:
        raise OrderingError("write pulse must come first")
    if reads[0].center_time < data[-1].center_time:
        raise OrderingError("read pulses interleaved with data pulses")
    return writes[0], data, reads


def read_gains(reads, write: Pulse, model: EnsembleModel) -> np.ndarray:
    """Per-read-pulse echo gain: storage decay times sequential depletion."""
    storage = np.array([r.center_time - write.center_time for r in reads])
    depletion = (1.0 - model.read_depletion) ** np.arange(len(reads))
    return model.decay(storage) * depletion


def _contributions(train, model):
    write, data, reads = check_train(train)
    prefactor = model.optical_depth_scale * np.conj(write.complex_amplitude)
    gains = read_gains(reads, write, model)
    out = []
    for k, r in enumerate(reads):
        for j, d in enumerate(data):
            t = r.center_time + d.center_time - write.center_time
            a = prefactor * d.complex_amplitude * r.complex_amplitude * gains[k]
            out.append(_Contribution(t, complex(a), k, j, d))
    out.sort(key=lambda c: (c.time, c.read_index, c.data_index))
    return out


def _group(contribs):
    groups = []
    for c in contribs:
        if groups and c.time - groups[-1][0].time <= 0.5 * c.data_pulse.duration:
            groups[-1].append(c)
        else:
            groups.append([c])
    return groups


def echo_events(train: PulseTrain, model: EnsembleModel) -> list[EchoEvent]:
    """Distinct echo times with their coherently summed amplitudes."""
    events = []
    for g in _group(_contributions(train, model)):
        events.append(EchoEvent(
            time=float(np.mean([c.time for c in g])),
            amplitude=complex(sum(c.amplitude for c in g)),
            contributions=tuple((c.read_index, c.data_index) for c in g)))
    return events


def echo_window(train: PulseTrain, margin: float | None = None) -> tuple[float, float]:
    """Default time window covering every possible echo."""
    write, data, reads = check_train(train)
    if margin is None:
        margin = 2.0 * max(p.support for p in train)
    t0 = reads[0].center_time + data[0].center_time - write.center_time
    t1 = reads[-1].center_time + data[-1].center_time - write.center_time
    return t0 - margin, t1 + margin


def _grid(window, dt):
    t0 = np.floor(window[0] / dt) * dt
    n = int(np.ceil((window[1] - t0) / dt)) + 1
    return t0 + dt * np.arange(n)


def simulate_abstract(train: PulseTrain, model: EnsembleModel = EnsembleModel(),
                      window: tuple[float, float] | None = None):
    """Mode-algebra echo simulation.

    Returns ``(trace, events)``. Each echo contribution is rendered with the
    envelope of the data pulse it replicates.
    """
    contribs = _contributions(train, model)
    events = echo_events(train, model)
    times = _grid(window or echo_window(train), model.sample_dt)
    field = np.zeros(times.size, dtype=complex)
    for c in contribs:
        if c.amplitude == 0:
            continue
        shifted = replace(c.data_pulse, center_time=c.time)
        field += c.amplitude * shifted.envelope(times)
    return EchoTrace(times, field, model.sample_dt), events


def effective_matrix(train: PulseTrain, model: EnsembleModel, read_cells) -> np.ndarray:
    """Complex transfer matrix realised by a train.

    ``read_cells`` gives ``(row, col)`` for each read pulse in time order; the
    result ``M`` satisfies ``output_row = sum_j M[row, j] * data_j`` whenever
    the compiled timing lines the intended echoes up.
    """
    write, data, reads = check_train(train)
    gains = read_gains(reads, write, model)
    rows = 1 + max(r for r, _ in read_cells)
    m = np.zeros((rows, len(data)), dtype=complex)
    pref = model.optical_depth_scale * np.conj(write.complex_amplitude)
    for k, (i, j) in enumerate(read_cells):
        m[i, j] += pref * reads[k].complex_amplitude * gains[k]
    return m


# -- spectral route ---------------------------------------------------------

def pulse_spectrum(p: Pulse, f, edge_sigma: float) -> np.ndarray:
    """Fourier transform (e^{-i 2 pi f t} convention) of a pulse's complex field."""
    f = np.asarray(f, dtype=float)
    return p.complex_amplitude * _shape_spectrum(p, f, edge_sigma) * np.exp(-2j * np.pi * f * p.center_time)


def _shape_spectrum(p, f, edge_sigma):
    if p.shape is Shape.RECTANGULAR:
        return p.duration * np.sinc(f * p.duration) * np.exp(-2 * (np.pi * edge_sigma * f) ** 2)
    sigma = p.duration / (2.0 * np.sqrt(np.log(2.0)))
    return sigma * np.sqrt(2 * np.pi) * np.exp(-2 * (np.pi * sigma * f) ** 2)


def _check_alias(p, f_nyq, edge_sigma):
    band = np.linspace(0.95 * f_nyq, f_nyq, 64)
    level = np.max(np.abs(_shape_spectrum(p, band, edge_sigma))) / abs(_shape_spectrum(p, 0.0, edge_sigma))
    if level > ALIAS_LEVEL:
        raise GridTooCoarseError(
            f"{p.role.value} pulse at {p.center_time} ns has spectral level {level:.1e} at the grid edge")


def simulate_spectral(train: PulseTrain, model: EnsembleModel = EnsembleModel(),
                      window: tuple[float, float] | None = None) -> EchoTrace:
    """Spectral-grid echo simulation in the small-area regime.

    Write and read spectra are normalised to unit area so that, for spectra
    flat over the data band, the echo is ``kappa * conj(w) * c * data(t - T)``.
    Contributions of different read pulses add coherently; transmitted pulses
    are not part of the returned trace.
    """
    write, data, reads = check_train(train)
    dt = model.sample_dt
    n = model.grid_points
    f = np.fft.fftfreq(n, dt)
    f_nyq = 0.5 / dt
    for p in train:
        _check_alias(p, f_nyq, model.edge_sigma)

    if window is None:
        margin = sum(max(p.support for p in group) for group in ([write], data, reads))
        window = echo_window(train, margin + 5 * model.edge_sigma)
    times = _grid(window, dt)
    if times.size >= n:
        raise GridTooCoarseError(f"echo window of {times.size} samples exceeds the {n}-point grid")

    sig = model.edge_sigma
    e1 = pulse_spectrum(write, f, sig) / write.envelope_area
    e2 = sum(pulse_spectrum(d, f, sig) for d in data)
    gains = read_gains(reads, write, model)
    e3 = sum(g * pulse_spectrum(r, f, sig) / r.envelope_area for g, r in zip(gains, reads))
    spectrum = model.optical_depth_scale * np.conj(e1) * e2 * e3
    field = np.fft.ifft(spectrum * np.exp(2j * np.pi * f * times[0]))[: times.size] / dt
    return EchoTrace(times, field, dt)


def integrate_events(trace: EchoTrace, event_times, half_width: float, reference_area: float) -> np.ndarray:
    """Complex field integrated over a window around each event, divided by
    ``reference_area`` (the data pulse envelope area)."""
    out = []
    for t in event_times:
        sel = np.abs(trace.times - t) <= half_width
        out.append(np.sum(trace.field[sel]) * trace.sample_dt / reference_area)
    return np.array(out)


# -- noise ------------------------------------------------------------------

def apply_phase_jitter(train: PulseTrain, model: EnsembleModel, seed,
                       reference_spacing: float = 100.0) -> PulseTrain:
    """Randomise read-pulse phases to mimic laser frequency drift.

    A single Gaussian draw ``xi`` (std ``phase_jitter_sigma``) is the phase
    accumulated per ``reference_spacing`` ns by a laser frequency offset
    between data and read creation, so read pulse k gains
    ``xi * (t_k - t_first_read) / reference_spacing``. Each read pulse also
    gets an independent offset of std ``sigma * jitter_intra_factor``.
    """
    sigma = model.phase_jitter_sigma
    if sigma == 0:
        return train
    rng = np.random.default_rng(seed)
    reads = train.reads
    xi = rng.normal(0.0, sigma)
    own = rng.normal(0.0, sigma * model.jitter_intra_factor, size=len(reads))
    t_ref = reads[0].center_time if reads else 0.0
    return train.map_role(Role.READ, lambda k, p: replace(
        p, phase=p.phase + xi * (p.center_time - t_ref) / reference_spacing + own[k]))


# -- CSV --------------------------------------------------------------------

TRACE_COLUMNS = ("time_ns", "field_re", "field_im", "intensity")


def _g(x) -> str:
    return format(float(x), ".17g")


def trace_to_csv(trace: EchoTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for t, e, i in zip(trace.times, trace.field, trace.intensity):
        w.writerow([_g(t), _g(e.real), _g(e.imag), _g(i)])
    return buf.getvalue()


def trace_from_csv(text: str) -> EchoTrace:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ValueError(f"expected header {','.join(TRACE_COLUMNS)}")
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, 4)
    dt = data[1, 0] - data[0, 0] if len(data) > 1 else 1.0
    return EchoTrace(data[:, 0], data[:, 1] + 1j * data[:, 2], dt)
