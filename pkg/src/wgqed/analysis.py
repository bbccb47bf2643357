"""Extraction of effective parameters from simulated traces.

Decay rates come from straight-line fits of log |c|^2 (variance stable over
several decades); frequencies from the unwrapped phase.  Two-qubit traces are
fitted channel by channel and recombined through the exact channel algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import TimeTrace
from .markov import MarkovParameters

UNDERFLOW = 1e-12
DARK_CHANNEL = 1e-12


@dataclass(frozen=True)
class FitResult:
    """Exponential-decay fit of one complex amplitude channel.

    rate is the decay of the population |c|^2, frequency the angular frequency
    of exp(-i w t) in the trace's own frame.  The residual norm of the linear
    fits is reported, never hidden.
    """

    rate: float
    frequency: float
    amplitude: float
    window: tuple[float, float]
    residual_norm: float


def default_window(trace: TimeTrace, channel=None) -> tuple[float, float]:
    """Post-flight, pre-revival fit window.

    Starts five gap periods after the photon arrival (so the channels have
    split and transients decayed) and stops at 90% of the revival horizon or
    where the population underflows, whichever is earlier.
    """
    t0 = trace.flight_time + 5.0 / trace.base_gap
    t1 = trace.times[-1]
    if np.isfinite(trace.horizon):
        t1 = min(t1, 0.9 * trace.horizon)
    series = np.abs(trace.channel_amps(channel)) ** 2
    weak = np.nonzero(series < 1e-6)[0]
    if weak.size:
        t_weak = trace.times[weak[0]]
        if t_weak > t0:
            t1 = min(t1, t_weak)
    return (t0, t1)


def fit_decay(trace: TimeTrace, channel=None, window: tuple[float, float] | None = None) -> FitResult:
    """Fit one channel of a trace to exp(-i*w*t - rate*t/2).

    The rate comes from a linear fit of ln|c|^2, the frequency from the
    unwrapped phase.  The window must span at least five periods of the bare
    gap and stay clear of population underflow.
    """
    if window is None:
        window = default_window(trace, channel)
    t0, t1 = window
    if (
        trace.qubit_count == 2
        and channel in ("plus", "minus")
        and trace.flight_time > 0.0
        and t0 <= trace.flight_time
    ):
        raise ValueError(
            f"fit window starts at {t0:g}, inside the light cone "
            f"(flight time {trace.flight_time:g}); channels have not split yet"
        )
    periods = (t1 - t0) * trace.base_gap / (2.0 * np.pi)
    if periods < 5.0:
        raise ValueError(f"fit window spans {periods:.2f} gap periods; need at least 5")
    mask = (trace.times >= t0) & (trace.times <= t1)
    if np.count_nonzero(mask) < 8:
        raise ValueError("fewer than 8 samples inside the fit window")
    t = trace.times[mask]
    c = trace.channel_amps(channel)[mask]
    p = np.abs(c) ** 2
    if np.any(p < UNDERFLOW):
        raise ValueError(
            f"population underflows {UNDERFLOW:g} inside the window; shrink it"
        )
    A = np.column_stack([t, np.ones_like(t)])
    logp = np.log(p)
    (slope_p, icept_p), res_p = np.linalg.lstsq(A, logp, rcond=None)[:2]
    phase = np.unwrap(np.angle(c))
    (slope_f, _), res_f = np.linalg.lstsq(A, phase, rcond=None)[:2]
    n = t.size
    rms_p = float(np.sqrt(res_p[0] / n)) if res_p.size else 0.0
    rms_f = float(np.sqrt(res_f[0] / n)) if res_f.size else 0.0
    return FitResult(
        rate=float(-slope_p),
        frequency=float(-slope_f),
        amplitude=float(np.exp(icept_p / 2.0)),
        window=(float(t0), float(t1)),
        residual_norm=max(rms_p, rms_f),
    )


def _channel_gap(trace: TimeTrace, fit: FitResult) -> float:
    """Absolute channel frequency: rotating traces measure the shift only."""
    if trace.frame == "rotating":
        return trace.base_gap + fit.frequency
    return fit.frequency


def extract_two_qubit(trace: TimeTrace, window: tuple[float, float] | None = None) -> MarkovParameters:
    """Fit both collective channels of a two-qubit trace and recombine.

    The symmetric and antisymmetric amplitudes are fitted separately for
    (rate, frequency); their averages and half-differences give the decay,
    collective decay, renormalized gap and coherent coupling.  A channel that
    stays dark (numerically zero, e.g. the antisymmetric one at zero
    separation) contributes zero rate at the bare gap.
    """
    if trace.qubit_count != 2:
        raise ValueError("two-qubit extraction needs a two-qubit trace")
    channels = {}
    for name in ("plus", "minus"):
        amps = trace.channel_amps(name)
        if float(np.max(np.abs(amps) ** 2)) < DARK_CHANNEL:
            channels[name] = (0.0, trace.base_gap)
            continue
        fit = fit_decay(trace, name, window)
        rate = fit.rate
        if -1e-9 < rate < 0.0:
            rate = 0.0  # fit noise on a non-decaying channel
        channels[name] = (rate, _channel_gap(trace, fit))
    rate_p, gap_p = channels["plus"]
    rate_m, gap_m = channels["minus"]
    return MarkovParameters.from_channels(
        base_gap=trace.base_gap,
        gap_plus=gap_p,
        gap_minus=gap_m,
        decay_plus=rate_p,
        decay_minus=rate_m,
        scheme="fitted",
    )


def detect_light_cone(traces, threshold: float = 1e-4) -> np.ndarray:
    """Earliest time the collective channels split, per trace.

    Returns the linearly interpolated crossing of ||c+|^2 - |c-|^2| through
    the threshold; unbounded (never split) is reported as infinity, not an
    error.
    """
    times = None
    out = []
    for trace in traces:
        if times is None:
            times = trace.times
        elif trace.times.shape != times.shape or not np.allclose(trace.times, times):
            raise ValueError("light-cone detection needs traces on a shared time grid")
        gap = np.abs(np.abs(trace.c_plus) ** 2 - np.abs(trace.c_minus) ** 2)
        above = np.nonzero(gap > threshold)[0]
        if above.size == 0:
            out.append(np.inf)
            continue
        i = int(above[0])
        if i == 0:
            out.append(float(times[0]))
            continue
        g0, g1 = gap[i - 1], gap[i]
        frac = (threshold - g0) / (g1 - g0)
        out.append(float(times[i - 1] + frac * (times[i] - times[i - 1])))
    return np.asarray(out)


def extract_gap_from_period(separations, values, velocity: float = 1.0) -> tuple[float, float]:
    """Renormalized gap from the spatial periodicity of a coupling curve.

    Finds the sign-change zeros of the sampled curve by local linear
    interpolation; the mean zero spacing is half a wavelength, so the gap is
    pi*velocity/spacing.  Returns (gap, spread) with the spread propagated
    from the scatter of the spacings.
    """
    d = np.asarray(separations, dtype=float)
    y = np.asarray(values, dtype=float)
    if d.size != y.size:
        raise ValueError("separations and values must have the same length")
    sign_change = np.nonzero(y[:-1] * y[1:] < 0)[0]
    zeros = d[sign_change] - y[sign_change] * (d[sign_change + 1] - d[sign_change]) / (
        y[sign_change + 1] - y[sign_change]
    )
    if zeros.size < 3:
        raise ValueError(f"found {zeros.size} zeros; need at least 3 to measure a period")
    spacing = np.diff(zeros)
    mean = float(np.mean(spacing))
    gap = np.pi * velocity / mean
    spread = gap * float(np.std(spacing)) / mean
    return gap, spread
