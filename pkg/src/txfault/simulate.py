"""Parametric 3-phase differential-current synthesis.

Stands in for an electromagnetic transient simulation of the transformer.
The models are deliberately simple but trace every swept parameter:

* internal faults: ``A * (sin(wt' + th - pi/2) + cos(th) * exp(-t'/tau))``
  on the faulted phases during the fault window, where the amplitude ``A``
  grows with the winding percentage, falls with the fault resistance and
  is scaled by the turns ratio for secondary-side faults, plus Gaussian
  noise with a standard deviation of 0.5 % of ``A`` over the whole record;
* magnetizing inrush: a sinusoidal flux with a decaying offset, passed
  through a saturation knee, which yields unipolar peaky current pulses;
* no fault: bounded mismatch noise only.

All randomness comes from a counter-based Philox stream keyed by the
scenario seed.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .scenarios import (DatasetManifest, EVENT_TIME, FAULT_DURATION,
                        FREQUENCY, RUN_TIME, SAMPLE_PERIOD,
                        ScenarioSpec)

PHASES = ("a", "b", "c")
CYCLE_SAMPLES = 167
TURNS_RATIO = 400.0 / 220.0


@dataclass(frozen=True)
class SignalModel:
    """Constants of the synthetic signal model (amperes, seconds, per-unit)."""

    frequency: float = FREQUENCY
    fault_duration: float = FAULT_DURATION
    amplitude_gain: float = 1000.0      # A * ohm per unit winding fraction
    series_resistance: float = 0.5      # ohm, keeps A finite for small R
    dc_tau: float = 0.02
    clear_tau: float = 0.002            # decay after the fault window
    fault_noise: float = 0.005          # fault sigma as a fraction of the record's amplitude
    inrush_noise: float = 0.005         # inrush sigma as a fraction of the reference amplitude
    llg_zero_sequence: float = 0.5
    tpg_zero_sequence: float = 0.2
    inrush_gain: float = 500.0          # A per unit of flux above the knee
    inrush_knee: float = 1.2
    inrush_tau: float = 0.5
    load_mismatch: float = 0.02         # fraction of the reference amplitude
    nofault_noise: float = 0.0015
    nofault_clip: float = 6.0           # in units of sigma

    def fault_amplitude(self, winding_percent: float, resistance: float,
                        side: str) -> float:
        amp = (self.amplitude_gain * winding_percent / 100.0
               / (resistance + self.series_resistance))
        return amp * TURNS_RATIO if side == "secondary" else amp

    @property
    def reference_amplitude(self) -> float:
        """Weakest fault-window amplitude on the scenario grid."""
        return self.fault_amplitude(20.0, 10.0, "primary")


DEFAULT_MODEL = SignalModel()


@dataclass
class WaveformRecord:
    """Three equal-length phase currents plus the scenario that produced them."""

    spec: ScenarioSpec
    samples: np.ndarray          # shape (3, n), rows are phases a, b, c
    sample_period: float = SAMPLE_PERIOD
    t0: float = 0.0
    event_time: float = EVENT_TIME

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[0] != 3:
            raise ValueError("samples must have shape (3, n)")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite values")

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.n) * self.sample_period

    @property
    def event_index(self) -> int:
        return int(round((self.event_time - self.t0) / self.sample_period))

    def phase(self, name: str) -> np.ndarray:
        return self.samples[PHASES.index(name)]

    def window(self, start: int, length: int) -> np.ndarray:
        """Samples ``[start, start + length)`` of all phases, shape (3, length)."""
        if start < 0 or start + length > self.n:
            raise ValueError(f"window [{start}, {start + length}) outside record of "
                             f"length {self.n}")
        return self.samples[:, start:start + length]

    def cycle_window(self, length: int = CYCLE_SAMPLES) -> np.ndarray:
        """First full cycle after the event instant."""
        return self.window(self.event_index, length)

    def __eq__(self, other):
        if not isinstance(other, WaveformRecord):
            return NotImplemented
        return (self.spec == other.spec
                and self.sample_period == other.sample_period
                and self.t0 == other.t0 and self.event_time == other.event_time
                and np.array_equal(self.samples, other.samples))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def _time_grid(sample_period: float, run_time: float) -> np.ndarray:
    return np.arange(int(round(run_time / sample_period))) * sample_period


def _fault_shape(t: np.ndarray, angle: float, event_time: float,
                 model: SignalModel) -> np.ndarray:
    """Unit-amplitude fault current for a phase whose source angle at
    inception is ``angle`` (radians); zero before the event."""
    w = 2.0 * math.pi * model.frequency
    tp = t - event_time
    out = np.zeros_like(t)
    on = (tp >= 0) & (tp < model.fault_duration)
    out[on] = (np.sin(w * tp[on] + angle - math.pi / 2)
               + math.cos(angle) * np.exp(-tp[on] / model.dc_tau))
    after = tp >= model.fault_duration
    if after.any():
        d = model.fault_duration
        end = math.sin(w * d + angle - math.pi / 2) + math.cos(angle) * math.exp(-d / model.dc_tau)
        out[after] = end * np.exp(-(tp[after] - d) / model.clear_tau)
    return out


def _angle_of(*angles: float, signs: Sequence[float] = None) -> float:
    signs = signs or [1.0] * len(angles)
    z = sum(s * complex(math.cos(a), math.sin(a)) for s, a in zip(signs, angles))
    return math.atan2(z.imag, z.real)


def synth_fault(spec: ScenarioSpec, *, sample_period: float = SAMPLE_PERIOD,
                run_time: float = RUN_TIME, event_time: float = EVENT_TIME,
                model: SignalModel = DEFAULT_MODEL) -> WaveformRecord:
    """Differential currents for an internal fault scenario."""
    if spec.kind != "fault":
        raise ValueError(f"synth_fault needs a fault scenario, got {spec.kind!r}")
    t = _time_grid(sample_period, run_time)
    amp = model.fault_amplitude(spec.winding_percent, spec.fault_resistance,
                                spec.side)
    base = math.radians(spec.inception_angle)
    phase_angle = [base, base - 2 * math.pi / 3, base + 2 * math.pi / 3]
    ft = spec.fault_type
    involved = ft.phases
    cur = np.zeros((3, t.size))

    if len(involved) == 1:
        (p,) = involved
        cur[p] = amp * _fault_shape(t, phase_angle[p], event_time, model)
    elif len(involved) == 2:
        p, q = involved
        ll = _angle_of(phase_angle[p], phase_angle[q], signs=[1.0, -1.0])
        shape = amp * _fault_shape(t, ll, event_time, model)
        cur[p] = shape
        cur[q] = -shape
        if ft.grounded:
            zero = _angle_of(phase_angle[p], phase_angle[q])
            z = model.llg_zero_sequence * amp * _fault_shape(t, zero, event_time, model)
            cur[p] += z
            cur[q] += z
    else:
        for p in involved:
            cur[p] = amp * _fault_shape(t, phase_angle[p], event_time, model)
        if ft.grounded:
            z = model.tpg_zero_sequence * amp * _fault_shape(t, base, event_time, model)
            cur += z

    sigma = model.fault_noise * amp
    cur += sigma * _rng(spec.seed).standard_normal(cur.shape)
    return WaveformRecord(spec, cur, sample_period, 0.0, event_time)


def synth_inrush(spec: ScenarioSpec, *, sample_period: float = SAMPLE_PERIOD,
                 run_time: float = RUN_TIME, event_time: float = EVENT_TIME,
                 model: SignalModel = DEFAULT_MODEL) -> WaveformRecord:
    """Magnetizing-inrush differential currents for an energization scenario.

    The per-unit flux of each phase is a sinusoid switched in at the
    event instant plus a slowly decaying offset set by the switching angle
    and the residual flux; current flows only while the flux magnitude
    exceeds the saturation knee.
    """
    if spec.kind != "inrush":
        raise ValueError(f"synth_inrush needs an inrush scenario, got {spec.kind!r}")
    t = _time_grid(sample_period, run_time)
    w = 2.0 * math.pi * model.frequency
    tp = t - event_time
    on = tp >= 0
    residual = spec.residual_flux / 100.0
    base = math.radians(spec.switching_angle)
    cur = np.zeros((3, t.size))
    for k in range(3):
        angle = base - 2 * math.pi * k / 3
        r = residual if k == spec.flux_pattern else -residual / 2.0
        flux = (-np.cos(w * tp[on] + angle)
                + (math.cos(angle) + r) * np.exp(-tp[on] / model.inrush_tau))
        knee = model.inrush_knee
        cur[k, on] = model.inrush_gain * (np.maximum(flux - knee, 0.0)
                                          - np.maximum(-flux - knee, 0.0))
        if spec.load_state == "load":
            cur[k, on] += (model.load_mismatch * model.reference_amplitude
                           * np.sin(w * tp[on] + angle))

    sigma = model.inrush_noise * model.reference_amplitude
    cur += sigma * _rng(spec.seed).standard_normal(cur.shape)
    return WaveformRecord(spec, cur, sample_period, 0.0, event_time)


def synth_nofault(spec: ScenarioSpec, *, sample_period: float = SAMPLE_PERIOD,
                  run_time: float = RUN_TIME, event_time: float = EVENT_TIME,
                  model: SignalModel = DEFAULT_MODEL) -> WaveformRecord:
    """Healthy operation: clipped mismatch noise on all three phases."""
    if spec.kind != "nofault":
        raise ValueError(f"synth_nofault needs a nofault scenario, got {spec.kind!r}")
    n = _time_grid(sample_period, run_time).size
    sigma = model.nofault_noise * model.reference_amplitude
    noise = np.clip(_rng(spec.seed).standard_normal((3, n)),
                    -model.nofault_clip, model.nofault_clip)
    return WaveformRecord(spec, sigma * noise, sample_period, 0.0, event_time)


_SYNTH = {"fault": synth_fault, "inrush": synth_inrush, "nofault": synth_nofault}


def synthesize(spec: ScenarioSpec, **kwargs) -> WaveformRecord:
    return _SYNTH[spec.kind](spec, **kwargs)


def _synth_chunk(args):
    specs, kwargs = args
    return [synthesize(s, **kwargs) for s in specs]


def generate_dataset(manifest: DatasetManifest, *, n_jobs: int = 1,
                     model: SignalModel = DEFAULT_MODEL,
                     sink: Callable[[WaveformRecord], None] | None = None,
                     chunk_size: int = 256) -> list[WaveformRecord]:
    """Synthesize one record per manifest entry, in manifest order.

    ``n_jobs > 1`` farms chunks out to worker processes; the result is
    identical to sequential generation because every record depends only
    on its own spec.  ``sink`` is called on each record in order (e.g. a
    container writer) and any error it raises propagates.
    """
    kwargs = dict(sample_period=manifest.sample_period,
                  run_time=manifest.run_time, event_time=manifest.event_time,
                  model=model)
    specs = list(manifest.specs)
    if n_jobs > 1 and len(specs) > chunk_size:
        chunks = [(specs[i:i + chunk_size], kwargs)
                  for i in range(0, len(specs), chunk_size)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            records = [r for part in pool.map(_synth_chunk, chunks) for r in part]
    else:
        records = [synthesize(s, **kwargs) for s in specs]
    if sink is not None:
        for rec in records:
            sink(rec)
    return records


def iter_dataset(specs: Iterable[ScenarioSpec], **kwargs):
    """Lazy variant of :func:`generate_dataset` for very large manifests."""
    for spec in specs:
        yield synthesize(spec, **kwargs)
