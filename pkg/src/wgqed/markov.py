"""Markovian effective parameters: renormalized gaps, decay rates, couplings.

Conventions.  The memoryless limit replaces each kernel channel by a complex
constant in the "shift minus i*rate/2" form,

    M(probe) = -i * int_0^inf K(tau) * exp(i*probe*tau) dtau
             = PV int w(omega)/(probe - omega) domega  -  i*pi*w(probe),

where w is the channel's spectral weight (J/2pi on the diagonal).  The real
part shifts the frequency, -2 times the imaginary part is the decay rate.
The sign convention was pinned numerically: for ohmic-type spectra the shift
is negative and grows with the cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import exp1, expi

from .kernels import KernelSpec, MODE_SUM, channel_weight
from .models import (
    CONSTANT_SPECTRUM,
    EXPONENTIAL_CONTINUUM,
    PhotonicModel,
    group_velocity,
    spectral_density,
)

SCHEMES = ("none", "simplified", "self_consistent")

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=800)


@dataclass(frozen=True)
class MarkovParameters:
    """Effective two-qubit constants and their symmetric/antisymmetric channels.

    The recombination identities

        shifted_gap = (gap_plus + gap_minus)/2
        decay = (decay_plus + decay_minus)/2
        coherent_coupling = (gap_plus - gap_minus)/2
        collective_decay = (decay_plus - decay_minus)/2

    hold exactly by construction; both constructors fill the redundant fields
    from the independent ones.
    """

    base_gap: float
    shifted_gap: float
    lamb_shift: float
    decay: float
    coherent_coupling: float
    collective_decay: float
    gap_plus: float
    gap_minus: float
    decay_plus: float
    decay_minus: float
    scheme: str

    def __post_init__(self):
        scale = max(abs(self.gap_plus), abs(self.gap_minus), 1.0)
        tol = 1e-9 * scale
        checks = (
            self.shifted_gap - 0.5 * (self.gap_plus + self.gap_minus),
            self.coherent_coupling - 0.5 * (self.gap_plus - self.gap_minus),
            self.decay - 0.5 * (self.decay_plus + self.decay_minus),
            self.collective_decay - 0.5 * (self.decay_plus - self.decay_minus),
            self.lamb_shift - (self.shifted_gap - self.base_gap),
        )
        if any(abs(c) > tol for c in checks):
            raise ValueError("channel recombination identities violated")
        rate_tol = 1e-12 * max(self.decay_plus, self.decay_minus, 1e-30)
        if self.decay_plus < -rate_tol or self.decay_minus < -rate_tol:
            raise ValueError("channel decay rates must be non-negative")

    @classmethod
    def from_channels(cls, base_gap, gap_plus, gap_minus, decay_plus, decay_minus, scheme):
        shifted = 0.5 * (gap_plus + gap_minus)
        return cls(
            base_gap=base_gap,
            shifted_gap=shifted,
            lamb_shift=shifted - base_gap,
            decay=0.5 * (decay_plus + decay_minus),
            coherent_coupling=0.5 * (gap_plus - gap_minus),
            collective_decay=0.5 * (decay_plus - decay_minus),
            gap_plus=gap_plus,
            gap_minus=gap_minus,
            decay_plus=decay_plus,
            decay_minus=decay_minus,
            scheme=scheme,
        )

    @classmethod
    def from_parameters(cls, base_gap, shifted_gap, decay, coherent, collective, scheme):
        return cls(
            base_gap=base_gap,
            shifted_gap=shifted_gap,
            lamb_shift=shifted_gap - base_gap,
            decay=decay,
            coherent_coupling=coherent,
            collective_decay=collective,
            gap_plus=shifted_gap + coherent,
            gap_minus=shifted_gap - coherent,
            decay_plus=decay + collective,
            decay_minus=decay - collective,
            scheme=scheme,
        )


def principal_value(weight, pole: float, lo: float, hi: float) -> float:
    """PV integral of weight(omega)/(pole - omega) over [lo, hi].

    The singular part is removed by global subtraction: the remainder
    integrand is regular at the pole and the subtracted piece integrates to an
    exact logarithm, which cancels identically for symmetric weights.
    """
    if not lo < pole < hi:

        def plain(w):
            return weight(w) / (pole - w)

        val, _ = quad(plain, lo, hi, **_QUAD_OPTS)
        return val

    w0 = weight(pole)
    if np.isinf(hi):
        split = pole + 40.0 * max(pole, 1.0)
    else:
        split = hi

    def regular(w):
        if w == pole:
            return 0.0  # removable point; quad never lands exactly here anyway
        return (weight(w) - w0) / (pole - w)

    val, _ = quad(regular, lo, split, points=[pole], **_QUAD_OPTS)
    val += w0 * np.log((pole - lo) / (split - pole))
    if np.isinf(hi):

        def tail(w):
            return weight(w) / (pole - w)

        tail_val, _ = quad(tail, split, np.inf, **_QUAD_OPTS)
        val += tail_val
    return val


def _mode_sum_constant(spec: KernelSpec, probe: float, channel: str, d: float) -> complex:
    """Damped-sum evaluation with linear extrapolation of the regulator to zero."""
    ms = spec._modes
    w2 = ms.magnitudes.astype(complex) ** 2
    if channel == "self":
        wk = w2
    else:
        pair = w2 * np.exp(-1j * ms.momenta * d)
        if channel == "pair":
            wk = pair
        elif channel == "plus":
            wk = w2 + pair
        elif channel == "minus":
            wk = w2 - pair
        else:
            raise ValueError(f"unknown kernel channel {channel!r}")
    if spec.eps > 0:
        eps = spec.eps
    else:
        vg = group_velocity(spec.model, probe)
        eps = 5.0 * vg * 2.0 * np.pi / spec.model.length

    def damped(e):
        return complex(np.sum(wk / (probe - ms.frequencies + 1j * e)))

    return 2.0 * damped(eps) - damped(2.0 * eps)


def markov_integral(spec: KernelSpec, probe: float, channel: str = "self", d: float = 0.0) -> complex:
    """Markov constant of a kernel channel at the probe frequency.

    Returns shift - i*rate/2.  Continuum kernels use the principal-value plus
    half-residue decomposition in frequency space; mode sums use a damped time
    integral extrapolated to zero regulator.
    """
    if probe <= 0:
        raise ValueError("probe frequency must be positive")
    if spec.mode == MODE_SUM:
        return _mode_sum_constant(spec, probe, channel, d)
    model = spec.model
    lo, hi = model.band

    def weight(w):
        return channel_weight(model, w, channel, d)

    shift = principal_value(weight, probe, lo, hi)
    onshell = weight(probe) if lo < probe < hi else 0.0
    return shift - 1j * np.pi * onshell


def _channel_shift(model: PhotonicModel, probe: float, channel: str, d: float) -> float:
    lo, hi = model.band

    def weight(w):
        return channel_weight(model, w, channel, d)

    return principal_value(weight, probe, lo, hi)


def _channel_rate(model: PhotonicModel, probe: float, channel: str, d: float) -> float:
    lo, hi = model.band
    if not lo < probe < hi:
        return 0.0
    return 2.0 * np.pi * channel_weight(model, probe, channel, d)


def _self_consistent_channel(
    model: PhotonicModel,
    gap: float,
    channel: str,
    d: float,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> tuple[float, float]:
    """Fixed point of the channel shift; plain iteration, corrections are O(g^2)."""
    lo, hi = model.band
    shifted = gap
    for _ in range(max_iter):
        new = gap + _channel_shift(model, shifted, channel, d)
        if not lo < new < hi:
            raise RuntimeError(
                f"renormalized frequency {new:g} drifted outside the band ({lo:g}, {hi:g})"
            )
        if abs(new - shifted) < tol:
            shifted = new
            break
        shifted = new
    else:
        raise RuntimeError(f"self-consistency iteration did not converge in {max_iter} steps")
    return shifted, _channel_rate(model, shifted, channel, d)


def lamb_shift_self_consistent(model: PhotonicModel, gap: float) -> tuple[float, float]:
    """Solve the self-consistent renormalized gap; returns (shifted gap, decay)."""
    lo, hi = model.band
    if not lo < gap < hi:
        raise ValueError(f"gap {gap} must lie inside the band support ({lo}, {hi})")
    return _self_consistent_channel(model, gap, "self", 0.0)


def lamb_shift_simplified(model: PhotonicModel, gap: float) -> tuple[float, float]:
    """One-shot approximation: shift evaluated at the bare gap, decay at the result."""
    lo, hi = model.band
    if not lo < gap < hi:
        raise ValueError(f"gap {gap} must lie inside the band support ({lo}, {hi})")
    shifted = gap + _channel_shift(model, gap, "self", 0.0)
    if not lo < shifted < hi:
        raise RuntimeError(f"shifted gap {shifted:g} left the band ({lo:g}, {hi:g})")
    return shifted, _channel_rate(model, shifted, "self", 0.0)


def single_qubit_closed_form(g: float, shifted_gap: float, cutoff: float) -> tuple[float, float]:
    """Closed-form (shift, decay) for the exponential-cutoff continuum.

    decay = g^2 * D' * exp(-D'/wc); the shift is the exact principal-value
    integral, -(g^2/2pi) * [wc - D' * exp(-D'/wc) * Ei(D'/wc)].  The shift
    grows linearly with the cutoff while the decay saturates.
    """
    if g == 0.0:
        return 0.0, 0.0
    x = shifted_gap / cutoff
    decay = g**2 * shifted_gap * np.exp(-x)
    shift = -(g**2 / (2.0 * np.pi)) * (cutoff - shifted_gap * np.exp(-x) * expi(x))
    return shift, decay


def two_qubit_params(model: PhotonicModel, gap, d: float, scheme: str) -> MarkovParameters:
    """Effective parameters of two equal qubits separated by d.

    The problem decouples into symmetric/antisymmetric channels; the chosen
    scheme fixes how much Lamb-shift feedback enters each channel:

    - ``none``            bare gap everywhere (resonant-dipole reference);
      the decay is distance independent by construction.
    - ``simplified``      one-shot shifts evaluated at the bare gap, fed into
      the on-shell rates only.
    - ``self_consistent`` per-channel fixed points; the two channels acquire
      different frequencies, which is what produces the distance beatings in
      the mean decay.
    """
    gaps = np.atleast_1d(np.asarray(gap, dtype=float))
    if gaps.size > 1 and not np.allclose(gaps, gaps[0], rtol=0, atol=0):
        raise ValueError(
            "channel decoupling requires equal gaps; use the energy-dependent "
            "effective Hamiltonian (scattering module) for detuned qubits"
        )
    gap = float(gaps[0])
    if d < 0:
        raise ValueError("separation must be non-negative")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    lo, hi = model.band
    if not lo < gap < hi:
        raise ValueError(f"gap {gap} must lie inside the band support ({lo}, {hi})")

    if scheme == "none":
        # Bare gap in every integral: the decay is the single-qubit rate and
        # stays distance independent; only the coherent coupling keeps its
        # principal-value part (it is an interaction, not a renormalization).
        rate = _channel_rate(model, gap, "self", 0.0)
        collective = 0.5 * (
            _channel_rate(model, gap, "plus", d) - _channel_rate(model, gap, "minus", d)
        )
        coherent = 0.5 * (
            _channel_shift(model, gap, "plus", d) - _channel_shift(model, gap, "minus", d)
        )
        return MarkovParameters.from_parameters(
            base_gap=gap,
            shifted_gap=gap,
            decay=rate,
            coherent=coherent,
            collective=collective,
            scheme=scheme,
        )

    if scheme == "simplified":
        channels = {}
        for name in ("plus", "minus"):
            shifted = gap + _channel_shift(model, gap, name, d)
            channels[name] = (shifted, _channel_rate(model, shifted, name, d))
    else:
        channels = {
            name: _self_consistent_channel(model, gap, name, d)
            for name in ("plus", "minus")
        }

    gp, rate_p = channels["plus"]
    gm, rate_m = channels["minus"]
    return MarkovParameters.from_channels(
        base_gap=gap,
        gap_plus=gp,
        gap_minus=gm,
        decay_plus=rate_p,
        decay_minus=rate_m,
        scheme=scheme,
    )


def resonant_dipole_params(rate: float, k_res: float, d: float) -> tuple[float, float]:
    """Sin/cos dipole-dipole constants with no Lamb-shift feedback."""
    if k_res < 0 or d < 0:
        raise ValueError("resonant momentum and separation must be non-negative")
    coherent = 0.5 * rate * np.sin(k_res * abs(d))
    collective = rate * np.cos(k_res * d)
    return coherent, collective


def two_qubit_closed_form(g: float, gap: float, cutoff: float, d: float) -> MarkovParameters:
    """Lowest-order closed-form two-qubit constants for the exponential cutoff.

    Reproduces the analytic expressions verbatim, including the short-range
    divergence of the coherent coupling (scale -g^2*wc/pi as d -> 0) and the
    sinusoidal large-separation limit.  Used as a qualitative cross-check of
    ``two_qubit_params``; its overall prefactor conventions are looser than
    the principal-value route.
    """
    if g == 0.0:
        return MarkovParameters.from_parameters(gap, gap, 0.0, 0.0, 0.0, "closed_form")
    x = d * gap
    a = gap / cutoff
    expfac = np.exp(-a)
    f = -np.real(np.exp(1j * x) * exp1(1j * x + a)) if x > 0 else -np.real(exp1(a))
    shifted = gap - (g**2 / np.pi) * (cutoff + expfac * expi(a))
    coherent = -(g**2 / (2.0 * np.pi)) * 2.0 * cutoff / (1.0 + d**2 * cutoff)
    coherent += 0.5 * g**2 * gap * expfac * (np.sin(x) + f)
    decay = g**2 * gap * expfac
    collective = decay * np.cos(x)
    return MarkovParameters.from_parameters(
        base_gap=gap,
        shifted_gap=shifted,
        decay=decay,
        coherent=coherent,
        collective=collective,
        scheme="closed_form",
    )
