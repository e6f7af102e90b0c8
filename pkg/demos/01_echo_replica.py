"""A single data pulse stored and recalled by one read pulse.

The echo comes back at t_read + (t_data - t_write) and has the shape of the
data pulse smoothed by the write and read spectra.
"""
import numpy as np

from echotransform import EnsembleModel, Pulse, PulseTrain, simulate_abstract, simulate_spectral

train = PulseTrain((
    Pulse(0.0, "write"),
    Pulse(300.0, "data", amplitude=0.8, phase=0.6),
    Pulse(2000.0, "read"),
))
model = EnsembleModel()

trace, events = simulate_abstract(train, model)
for e in events:
    print(f"abstract echo at {e.time:.1f} ns, amplitude {abs(e.amplitude):.6f}, phase {np.angle(e.amplitude):.3f}")

# the 18 us coherence time costs exp(-2000/18000) of amplitude over 2 us of storage
print("expected amplitude", 0.8 * np.exp(-2000 / 18000))

spec = simulate_spectral(train, model)
i = np.argmax(spec.intensity)
print(f"spectral peak at {spec.times[i]:.2f} ns, |field| {abs(spec.field[i]):.4f}")

# coarse text plot of the detected intensity
for t, inten in zip(spec.times[::6], spec.intensity[::6]):
    print(f"{t:8.1f} " + "#" * int(60 * inten / spec.intensity.max()))
