"""Photonic memory kernels, their channel combinations, and antiderivatives.

The elementary kernel is the retarded influence of the field on a qubit,
K(t; d) = integral of J(w)/(4*pi) * exp(-i*w*(t + d/v)) over the band.  A pair
of qubits sees K(t; d) + K(t; -d); the symmetric/antisymmetric channels see
2K(t; 0) +- that pair.  For the exponential-cutoff continuum everything has
closed forms; discrete media use direct mode sums with a finite validity
horizon set by the ring recurrence time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1, expi

from .models import (
    CONSTANT_SPECTRUM,
    EXPONENTIAL_CONTINUUM,
    PhotonicModel,
    QubitArray,
    build_modes,
    spectral_density,
)

CLOSED_FORM = "closed_form"
MODE_SUM = "mode_sum"

# Pair-level term lists: weight(w) = (J(w)/2pi) * sum(coef * cos(k(w) d)).
CHANNEL_TERMS = {
    "self": ((1.0, 0.0),),
    "plus": ((1.0, 0.0), (1.0, None)),
    "minus": ((1.0, 0.0), (-1.0, None)),
}


@dataclass(frozen=True)
class KernelSpec:
    """Binds a photonic model to an evaluation strategy for its kernel.

    mode        'closed_form' (exponential continuum only) or 'mode_sum'
    eps         damping regulator for mode sums (>= 0)
    horizon     largest time for which the kernel is trustworthy; mode sums
                recur after the ring circulation time L/v_max
    """

    model: PhotonicModel
    mode: str = CLOSED_FORM
    eps: float = 0.0
    horizon: float = field(default=0.0)
    _modes: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in (CLOSED_FORM, MODE_SUM):
            raise ValueError(f"unknown kernel mode {self.mode!r}")
        if self.eps < 0:
            raise ValueError("regulator eps must be non-negative")
        if self.mode == CLOSED_FORM:
            if self.model.kind != EXPONENTIAL_CONTINUUM:
                raise ValueError(
                    "closed-form kernels exist only for the exponential continuum"
                )
            object.__setattr__(self, "horizon", np.inf)
        else:
            if self.model.mode_count <= 0:
                raise ValueError("mode_sum evaluation needs a discretized model")
            modes = build_modes(self.model, QubitArray(gaps=[1.0], positions=[0.0]))
            object.__setattr__(self, "_modes", modes)
            # ring recurrence at the fastest group velocity in the band
            vmax = self.model.bandwidth if self.model.kind in ("photonic_crystal", "tight_binding") else 1.0
            object.__setattr__(self, "horizon", self.model.length / vmax)

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("kernel times must be non-negative")
        if np.any(t > self.horizon):
            raise ValueError(
                f"kernel evaluated beyond its validity horizon {self.horizon:g} "
                "(ring recurrence)"
            )
        return t


def _closed_kernel(model: PhotonicModel, t, d) -> np.ndarray:
    g2 = model.coupling**2
    return (g2 / (4.0 * np.pi)) / (1.0 / model.cutoff + 1j * (t + d)) ** 2


def _mode_kernel_one_sided(spec: KernelSpec, t, d) -> np.ndarray:
    """Positive-momentum branch sum; the k = 0 mode carries half weight."""
    ms = spec._modes
    k = ms.momenta
    pos = k > 0
    w2 = ms.magnitudes**2
    t = np.atleast_1d(np.asarray(t, dtype=float))
    damp = np.exp(-spec.eps * t) if spec.eps else 1.0
    phase = np.exp(-1j * (np.outer(t, ms.frequencies[pos]) + k[pos] * d))
    out = phase @ w2[pos]
    zero = k == 0
    if np.any(zero):
        out = out + 0.5 * w2[zero][0] * np.exp(-1j * ms.frequencies[zero][0] * t)
    return out * damp


def kernel(spec: KernelSpec, t, d: float = 0.0):
    """Elementary one-sided kernel K(t; d).

    Closed form for the exponential continuum; otherwise the direct sum over
    the positive-momentum branch of the mode set (the two branches together
    reproduce the pair kernel below).
    """
    t = spec.check_time(t)
    scalar = t.ndim == 0
    if spec.mode == CLOSED_FORM:
        out = _closed_kernel(spec.model, t, d)
    else:
        out = _mode_kernel_one_sided(spec, t, d)
    return complex(np.asarray(out).reshape(-1)[0]) if scalar else out


def kernel_pair(spec: KernelSpec, t, d: float):
    """Two-qubit kernel K(t; d) + K(t; -d); even in d by construction."""
    t = spec.check_time(t)
    scalar = t.ndim == 0
    if spec.mode == CLOSED_FORM:
        out = _closed_kernel(spec.model, t, d) + _closed_kernel(spec.model, t, -d)
    else:
        ms = spec._modes
        w2 = ms.magnitudes**2
        t = np.atleast_1d(t)
        phase = np.exp(-1j * (np.outer(t, ms.frequencies) + ms.momenta * d))
        out = phase @ w2
        if spec.eps:
            out = out * np.exp(-spec.eps * t)
    return complex(np.asarray(out).reshape(-1)[0]) if scalar else out


def kernel_pm(spec: KernelSpec, t, d: float, sign: int):
    """Channel kernel 2K(t; 0) +- [K(t; d) + K(t; -d)]."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    t = spec.check_time(t)
    base = 2.0 * kernel(spec, t, 0.0)
    return base + sign * kernel_pair(spec, t, d)


def kernel_antiderivative(spec: KernelSpec, u, d: float = 0.0):
    """Running integral of the closed-form kernel, int_0^u K(s; d) ds."""
    if spec.mode != CLOSED_FORM:
        raise ValueError(
            "closed-form antiderivative requires the exponential continuum; "
            "mode-sum kernels are integrated inside the dynamics solver"
        )
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("upper limit must be non-negative")
    g2 = spec.model.coupling**2
    inv = 1.0 / spec.model.cutoff
    out = (g2 / (4.0 * np.pi * 1j)) * (1.0 / (inv + 1j * d) - 1.0 / (inv + 1j * (u + d)))
    return out if np.ndim(out) else complex(out)


def _e1_on_path(w: np.ndarray, started_above: bool) -> np.ndarray:
    """Exponential integral E1 continued along a vertical descending path.

    The path starts at Im(w) >= 0 and moves down.  Crossing the branch cut on
    the negative real axis costs -2*pi*i relative to the principal branch.
    Points exactly on the cut take the below-cut limit -Ei(|w|) + i*pi.
    """
    w = np.atleast_1d(w)
    vals = exp1(w)
    on_cut = (w.imag == 0.0) & (w.real < 0.0)
    if np.any(on_cut):
        vals[on_cut] = -expi(-w.real[on_cut]) + 1j * np.pi
    if started_above:
        below = w.imag <= 0.0
        vals = np.where(below, vals - 2j * np.pi, vals)
    return vals


def phase_weighted_antiderivative(spec: KernelSpec, u, d: float, probe: float):
    """int_0^u K(s; d) * exp(i * probe * s) ds in closed form.

    This is the weight of the twice-integrated Volterra formulation of the
    excitation dynamics: interchanging the order of the double time integral
    leaves the antiderivative of the rotating-frame kernel.  probe = 0 reduces
    to ``kernel_antiderivative``.
    """
    if spec.mode != CLOSED_FORM:
        raise ValueError("phase-weighted antiderivative needs the closed-form kernel")
    if probe < 0:
        raise ValueError("probe frequency must be non-negative")
    if probe == 0.0:
        return kernel_antiderivative(spec, u, d)
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("upper limit must be non-negative")
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    g2 = spec.model.coupling**2
    inv = 1.0 / spec.model.cutoff

    z0 = inv + 1j * d
    zu = inv + 1j * (u + d)
    started_above = d < 0.0

    def antideriv(z, above):
        w = -probe * z
        return -np.exp(probe * z) / z - probe * _e1_on_path(w, above)

    f0 = antideriv(np.atleast_1d(z0), started_above)[0]
    fu = antideriv(zu, started_above)
    pref = np.exp(-probe * inv - 1j * probe * d)
    out = (g2 / (4.0 * np.pi)) * pref * (fu - f0) / 1j
    return complex(out[0]) if scalar else out


def channel_weight(model: PhotonicModel, omega, channel: str, d: float = 0.0):
    """Spectral weight w(omega) whose one-sided Fourier transform is the kernel.

    The diagonal channel carries J/(2*pi); a pair displaced by d multiplies by
    cos(k(omega) d) with the model's own momentum-frequency relation, so the
    retarded phases survive lattice dispersion.
    """
    if channel == "pair":
        terms = ((1.0, d),)
    elif channel in CHANNEL_TERMS:
        terms = tuple((c, d if dd is None else dd) for c, dd in CHANNEL_TERMS[channel])
    else:
        raise ValueError(f"unknown kernel channel {channel!r}")
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    out = np.zeros_like(omega)
    for i, w in enumerate(omega):
        j = spectral_density(model, float(w))
        if j == 0.0:
            continue
        acc = 0.0
        for coef, dd in terms:
            if dd == 0.0:
                acc += coef
            else:
                acc += coef * np.cos(model.momentum_of(float(w)) * dd)
        out[i] = j / (2.0 * np.pi) * acc
    return float(out[0]) if scalar else out


def tight_binding_self_energy(gap: float, center: float, hopping: float, g: float = 1.0) -> complex:
    """On-resonance self-energy of a qubit on a flat-coupling hopping chain.

    Real for a qubit inside the band |gap - center| < hopping (pure decay, no
    frequency pull) and purely imaginary outside it.  The band edge is a
    square-root singularity and is rejected.
    """
    if hopping <= 0 or gap <= 0:
        raise ValueError("gap and hopping must be positive")
    a = hopping - gap + center
    b = hopping + gap - center
    prod = a * b
    if prod == 0.0:
        raise ValueError("band-edge singularity: |gap - center| equals the hopping")
    return g**2 / np.sqrt(complex(prod))
