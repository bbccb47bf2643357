"""Single-excitation dynamics: exact mode ODEs and the implicit memory solver.

Both solvers produce a :class:`TimeTrace`.  The mode solver works in the lab
frame for the qubits but rotates every photon amplitude at its own frequency,
which removes the stiffness of the large-cutoff modes.  The memory solver
works in the frame rotating at the bare gap, so its amplitudes expose the
Lamb shift directly as a slow residual phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .kernels import CLOSED_FORM, KernelSpec, phase_weighted_antiderivative
from .models import ModeSet, QubitArray, group_velocity

IDE_CHANNELS = ("single", "plus", "minus")


@dataclass(frozen=True)
class ExcitationState:
    """Amplitudes of the single-excitation sector at one instant."""

    qubit_amps: np.ndarray
    photon_amps: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "qubit_amps", np.asarray(self.qubit_amps, dtype=complex))
        object.__setattr__(self, "photon_amps", np.asarray(self.photon_amps, dtype=complex))

    def norm(self) -> float:
        return float(
            np.sum(np.abs(self.qubit_amps) ** 2) + np.sum(np.abs(self.photon_amps) ** 2)
        )


def initial_qubit_excited(s: int, qubit_count: int, mode_count: int) -> ExcitationState:
    """One qubit excited (zero-based index), no photons; normalized by construction."""
    if not 0 <= s < qubit_count:
        raise ValueError(f"qubit index {s} out of range for {qubit_count} qubits")
    c = np.zeros(qubit_count, dtype=complex)
    c[s] = 1.0
    return ExcitationState(qubit_amps=c, photon_amps=np.zeros(mode_count, dtype=complex))


@dataclass(frozen=True)
class TimeTrace:
    """Sampled qubit amplitudes plus the metadata the fitting layer needs.

    frame is 'lab' (amplitudes carry the full e^{-i gap t} phase) or
    'rotating' (phases measured relative to the bare gap).  For two-qubit
    traces the symmetric/antisymmetric combinations are exposed as
    properties.
    """

    times: np.ndarray
    amplitudes: np.ndarray  # (T, S) complex
    frame: str
    base_gap: float
    separation: float | None = None
    velocity: float = 1.0
    horizon: float = np.inf
    channel: str | None = None
    photon_amps: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim == 1:
            amps = amps[:, np.newaxis]
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))

    @property
    def qubit_count(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def flight_time(self) -> float:
        if self.separation is None:
            return 0.0
        return abs(self.separation) / self.velocity

    def _pair(self):
        if self.qubit_count != 2:
            raise ValueError("symmetric/antisymmetric channels need exactly two qubits")
        return self.amplitudes[:, 0], self.amplitudes[:, 1]

    @property
    def c_plus(self) -> np.ndarray:
        c1, c2 = self._pair()
        return (c1 + c2) / np.sqrt(2.0)

    @property
    def c_minus(self) -> np.ndarray:
        c1, c2 = self._pair()
        return (c1 - c2) / np.sqrt(2.0)

    def channel_amps(self, channel) -> np.ndarray:
        if isinstance(channel, int):
            return self.amplitudes[:, channel]
        if channel in ("single", None):
            return self.amplitudes[:, 0]
        if channel == "plus":
            return self.c_plus
        if channel == "minus":
            return self.c_minus
        raise ValueError(f"unknown trace channel {channel!r}")

    def population(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)


def evolve_modes(
    modes: ModeSet,
    qubits: QubitArray,
    initial: ExcitationState,
    t_end: float,
    dt_out: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    keep_photons: bool = False,
    norm_tol: float = 1e-6,
) -> TimeTrace:
    """Integrate the coupled qubit-photon amplitudes with adaptive Runge-Kutta.

    Photon amplitudes are integrated as psi_k * exp(i w_k t); the explicit
    phases are restored only at the output samples.  Excitation number is
    monitored and a drift above ``norm_tol`` aborts the run.
    """
    model = modes.model
    lo, hi = model.band
    vmax = 1.0 if model.kind in ("gapless_chain", "exponential_continuum", "constant_spectrum") else model.bandwidth
    horizon = model.length / vmax
    if t_end >= horizon:
        raise ValueError(
            f"t_end {t_end:g} reaches the ring revival at {horizon:g}; shorten the run "
            "or enlarge the line"
        )
    norm0 = initial.norm()
    if abs(norm0 - 1.0) > 1e-9:
        raise ValueError(f"initial state norm {norm0:.3e} is not 1")
    S = qubits.count
    freqs = modes.frequencies
    G = modes.couplings
    Gct = np.conj(G).T
    gaps = qubits.gaps
    if initial.photon_amps.size != freqs.size or initial.qubit_amps.size != S:
        raise ValueError("initial state does not match the mode set / qubit array")

    y0 = np.concatenate([initial.qubit_amps, initial.photon_amps]).astype(complex)
    mixed = np.empty(freqs.size, dtype=complex)
    neg_ifreqs = -1j * freqs

    def rhs(t, y):
        # scipy's steppers keep references to returned arrays, so allocate out.
        out = np.empty(y.size, dtype=complex)
        c = y[:S]
        ph = np.exp(neg_ifreqs * t)
        np.multiply(ph, y[S:], out=mixed)
        out[:S] = -1j * (gaps * c + G @ mixed)
        np.conj(ph, out=ph)
        np.multiply(ph, -1j * (Gct @ c), out=out[S:])
        return out

    times = np.arange(0.0, t_end + 0.5 * dt_out, dt_out)
    sol = solve_ivp(
        rhs, (0.0, float(times[-1])), y0, method="DOP853", t_eval=times, rtol=rtol, atol=atol
    )
    if not sol.success:
        raise RuntimeError(f"mode integration failed: {sol.message}")
    y = sol.y
    norms = np.sum(np.abs(y) ** 2, axis=0)
    drift = float(np.max(np.abs(norms - norm0)))
    if drift > norm_tol:
        worst = float(times[int(np.argmax(np.abs(norms - norm0)))])
        raise RuntimeError(
            f"excitation number drifted by {drift:.3e} (worst at t = {worst:g}); "
            "tighten rtol/atol"
        )

    photons = None
    if keep_photons:
        phases = np.exp(-1j * np.outer(times, freqs))
        photons = phases * y[S:].T

    separation = abs(qubits.separation(0, 1)) if S == 2 else None
    try:
        vel = group_velocity(model, float(gaps[0]))
    except ValueError:
        vel = vmax
    return TimeTrace(
        times=times,
        amplitudes=y[:S].T,
        frame="lab",
        base_gap=float(gaps[0]),
        separation=separation,
        velocity=vel,
        horizon=horizon,
        photon_amps=photons,
    )


def _ide_weights(spec: KernelSpec, grid: np.ndarray, gap: float, channel: str, d: float):
    """Antiderivative of the rotating-frame channel kernel on the step grid."""
    base = 2.0 * phase_weighted_antiderivative(spec, grid, 0.0, gap)
    if channel == "single":
        return base
    pair = phase_weighted_antiderivative(spec, grid, d, gap) + phase_weighted_antiderivative(
        spec, grid, -d, gap
    )
    return base + pair if channel == "plus" else base - pair


def evolve_ide(
    spec: KernelSpec,
    gap: float,
    channel: str = "single",
    d: float = 0.0,
    t_end: float = 100.0,
    dt: float | None = None,
    dt_out: float | None = None,
) -> TimeTrace:
    """Implicit solve of the memory equation for one channel amplitude.

    The equation of motion is integrated twice and the order of integration
    interchanged, leaving a Volterra relation

        c(T) = c(0) - int_0^T G(T - t) c(t) dt

    whose weight G is the running integral of the rotating-frame kernel.  The
    discretization symmetrizes each panel in both factors (trapezoid on the
    weight and on the amplitude), which makes the rule second order while
    keeping the newest amplitude inside the sum: every step solves a linear
    scalar equation, one complex division.
    """
    if spec.mode != CLOSED_FORM:
        raise ValueError("the implicit memory solver needs the closed-form kernel")
    if channel not in IDE_CHANNELS:
        raise ValueError(f"channel must be one of {IDE_CHANNELS}")
    if channel != "single" and d < 0:
        raise ValueError("separation must be non-negative")
    if gap <= 0:
        raise ValueError("gap must be positive")
    cutoff = spec.model.cutoff
    if dt is None:
        dt = min(0.02 / gap, 0.2 / cutoff)
    if dt_out is None:
        dt_out = max(dt, t_end / 4000.0)
    steps = int(round(t_end / dt))
    if steps < 2:
        raise ValueError("fewer than two time steps; decrease dt or extend t_end")

    grid = dt * np.arange(steps + 1)
    gvals = _ide_weights(spec, grid, gap, channel, d)
    # Panel weights: B_l averages the running integral over panel l; the
    # amplitude is averaged over the same panel, so the newest value c_j
    # enters through B_0 with weight dt/4.
    bpanel = gvals[:-1] + gvals[1:]  # B_l = G(t_l) + G(t_{l+1}), l = 0 .. steps-1
    denom = 1.0 + 0.25 * dt * bpanel[0]
    if abs(denom) < 0.1:
        raise ValueError(
            f"time step {dt:g} too large: implicit-step denominator {abs(denom):.3f} "
            "is near zero"
        )
    # Combined history weights: sum over panels of B_{j-l} (c_l + c_{l-1})/2
    # regroups into (B_m + B_{m-1}) acting on each interior amplitude.
    wsum = np.zeros(steps, dtype=complex)  # index 0 never used
    wsum[1:] = bpanel[1:] + bpanel[:-1]
    wrev = wsum[::-1].copy()
    M = steps
    c = np.empty(steps + 1, dtype=complex)
    c[0] = 1.0
    for j in range(1, steps + 1):
        hist = np.dot(wrev[M - j : M - 1], c[1:j]) if j > 1 else 0.0
        edge = bpanel[j - 1] * c[0]
        c[j] = (c[0] - 0.25 * dt * (hist + edge)) / denom

    stride = max(1, int(round(dt_out / dt)))
    idx = np.arange(0, steps + 1, stride)
    return TimeTrace(
        times=grid[idx],
        amplitudes=c[idx],
        frame="rotating",
        base_gap=gap,
        separation=d if channel != "single" else None,
        velocity=1.0,
        horizon=spec.horizon,
        channel=channel,
    )
