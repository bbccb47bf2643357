"""Single-photon scattering: energy-dependent self-energy, effective
Hamiltonian, scattered amplitudes, Born truncation and resonance search.

The self-energy matrix is

    Sigma_sr(E) = sum_k g_sk conj(g_rk) / (E + i eps - w_k),

evaluated either as a regulated sum over a discrete mode set or, for
continuum media, as a principal-value integral plus half residue.  The
continuum route deliberately uses a different quadrature algorithm
(Clenshaw-Curtis with a Cauchy weight) than the Markov solver, so agreement
between the two is a genuine cross-check, not a tautology.

Sign convention, fixed numerically against the regulated mode sums: every
entry of the effective Hamiltonian is retarded, i.e. both the diagonal and
the off-diagonal carry "shift minus i*rate/2" with the collective rate on the
off-diagonal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .models import (
    CONSTANT_SPECTRUM,
    EXPONENTIAL_CONTINUUM,
    GAPLESS_CHAIN,
    PHOTONIC_CRYSTAL,
    TIGHT_BINDING,
    ModeSet,
    PhotonicModel,
    QubitArray,
    group_velocity,
    spectral_density,
)

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=800)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Non-Hermitian qubit-sector Hamiltonian at a probe energy."""

    matrix: np.ndarray
    energy: float
    regulator: float

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _pair_weight(model: PhotonicModel, omega: float, d: float) -> float:
    """Spectral weight of one self-energy entry: (J/2pi) * cos(k(w) d)."""
    j = spectral_density(model, omega)
    if j == 0.0:
        return 0.0
    w = j / (2.0 * np.pi)
    if d != 0.0:
        w *= np.cos(model.momentum_of(omega) * d)
    return w


def _cauchy_pv(model: PhotonicModel, energy: float, d: float) -> float:
    """PV integral of the entry weight over the band via the Cauchy-weight rule."""
    lo, hi = model.band

    def weight(w):
        return _pair_weight(model, w, d)

    if not lo < energy < hi:
        val, _ = quad(lambda w: weight(w) / (energy - w), lo, hi, **_QUAD_OPTS)
        return val
    split = hi if np.isfinite(hi) else energy + 40.0 * max(energy, 1.0)
    # quad's 'cauchy' weight computes PV int f(w)/(w - wvar): flip the sign.
    val, _ = quad(weight, lo, split, weight="cauchy", wvar=energy, limit=800)
    val = -val
    if not np.isfinite(hi):
        tail, _ = quad(lambda w: weight(w) / (energy - w), split, np.inf, **_QUAD_OPTS)
        val += tail
    return val


def _continuum_self_energy(model: PhotonicModel, qubits: QubitArray, energy: float) -> np.ndarray:
    S = qubits.count
    lo, hi = model.band
    sigma = np.zeros((S, S), dtype=complex)
    for s in range(S):
        for r in range(s, S):
            d = qubits.separation(s, r)
            pv = _cauchy_pv(model, energy, d)
            onshell = _pair_weight(model, energy, d) if lo < energy < hi else 0.0
            sigma[s, r] = sigma[r, s] = pv - 1j * np.pi * onshell
    return sigma


def default_regulator(model: PhotonicModel, energy: float) -> float:
    """Five mode spacings in frequency at the probe energy."""
    vg = group_velocity(model, energy)
    return 5.0 * vg * 2.0 * np.pi / model.length


def self_energy_matrix(modes: ModeSet, energy: float, eps: float) -> np.ndarray:
    """Discrete self-energy sum over a mode set with an explicit regulator."""
    if eps < 0:
        raise ValueError("regulator must be non-negative")
    if eps == 0.0 and np.any(np.abs(modes.frequencies - energy) < 1e-12):
        raise ValueError(
            "probe energy coincides with a discrete mode; use a positive regulator"
        )
    G = modes.couplings
    denom = energy + 1j * eps - modes.frequencies
    return (G / denom) @ np.conj(G).T


def effective_hamiltonian(medium, qubits: QubitArray, energy: float, eps: float | None = None) -> EffectiveHamiltonian:
    """diag(gaps) + Sigma(E).

    Pass a :class:`ModeSet` for the regulated discrete sum (default regulator
    five mode spacings) or a :class:`PhotonicModel` for the continuum
    principal-value route with a vanishing regulator.
    """
    if isinstance(medium, ModeSet):
        if eps is None:
            eps = default_regulator(medium.model, energy)
        sigma = self_energy_matrix(medium, energy, eps)
        used = eps
    elif isinstance(medium, PhotonicModel):
        sigma = _continuum_self_energy(medium, qubits, energy)
        used = 0.0
    else:
        raise TypeError("medium must be a ModeSet or a PhotonicModel")
    return EffectiveHamiltonian(
        matrix=np.diag(qubits.gaps.astype(complex)) + sigma, energy=energy, regulator=used
    )


@dataclass(frozen=True)
class ScatteringResult:
    """Stationary scattering amplitudes at one incident momentum."""

    energy: float
    qubit_amps: np.ndarray
    qubit_amps_born: np.ndarray
    photon_amps: np.ndarray | None


def _incident_vector(model: PhotonicModel, qubits: QubitArray, k0: float, energy: float) -> np.ndarray:
    """conj(g_{s,k0}) with the per-branch density normalization for continua."""
    if model.mode_count > 0:
        L = model.length
        if model.kind == TIGHT_BINDING:
            mag = model.coupling / np.sqrt(model.mode_count)
            return mag * np.exp(1j * k0 * qubits.positions)
        mag = model.coupling * np.sqrt(energy / (2.0 * L))
        if model.kind == EXPONENTIAL_CONTINUUM:
            mag *= np.exp(-energy / (2.0 * model.cutoff))
        if model.kind == CONSTANT_SPECTRUM:
            mag = model.coupling / np.sqrt(2.0 * L)
        return mag * np.exp(-1j * k0 * qubits.positions)
    mag = np.sqrt(spectral_density(model, energy) / (4.0 * np.pi))
    return mag * np.exp(-1j * k0 * qubits.positions)


def scattering_amplitudes(
    medium, qubits: QubitArray, k0: float, eps: float | None = None
) -> ScatteringResult:
    """Solve the qubit amplitudes of the stationary scattering state.

    The incident photon has momentum k0 and energy w(k0); the qubit vector
    solves (E+ - H_eff) c = conj(g_{k0}), and the first-order Born truncation
    replaces H_eff by the bare gaps.  For discrete media the scattered photon
    amplitudes are reconstructed mode by mode.
    """
    model = medium.model if isinstance(medium, ModeSet) else medium
    energy = float(model.dispersion(k0))
    lo, hi = model.band
    if not lo < energy < hi:
        raise ValueError(f"incident energy {energy:g} is outside the band ({lo:g}, {hi:g})")
    heff = effective_hamiltonian(medium, qubits, energy, eps)
    rhs = _incident_vector(model, qubits, k0, energy)
    ident = np.eye(qubits.count)
    lhs = (energy + 1j * heff.regulator) * ident - heff.matrix
    c = np.linalg.solve(lhs, rhs)
    if not np.all(np.isfinite(c)):
        raise AssertionError("scattering solve produced non-finite amplitudes")
    born = rhs / (energy + 1j * heff.regulator - qubits.gaps)
    photons = None
    if isinstance(medium, ModeSet):
        denom = energy + 1j * heff.regulator - medium.frequencies
        photons = (np.conj(medium.couplings).T @ c) / denom
    return ScatteringResult(
        energy=energy, qubit_amps=c, qubit_amps_born=born, photon_amps=photons
    )


def _analytic_weight(model: PhotonicModel, z: complex, d: float) -> complex:
    """Entry weight continued to complex energies (second-sheet residue term)."""
    g2 = model.coupling**2
    if model.kind == EXPONENTIAL_CONTINUUM:
        w = g2 * z * np.exp(-z / model.cutoff) / (2.0 * np.pi)
        k = z
    elif model.kind == CONSTANT_SPECTRUM:
        w = g2 / (2.0 * np.pi) + 0.0j
        k = z
    elif model.kind == GAPLESS_CHAIN:
        vg = np.sqrt(1.0 - (z / (2.0 * model.cutoff)) ** 2 + 0j)
        w = g2 * z / vg / (2.0 * np.pi)
        k = 2.0 * model.cutoff * np.arcsin(z / (2.0 * model.cutoff) + 0j)
    elif model.kind in (PHOTONIC_CRYSTAL, TIGHT_BINDING):
        vg = np.sqrt(model.bandwidth**2 - (z - model.center) ** 2 + 0j)
        pref = 2.0 * g2 if model.kind == TIGHT_BINDING else g2 * z
        w = pref / vg / (2.0 * np.pi)
        k = np.arccos((model.center - z) / model.bandwidth + 0j)
    else:
        raise ValueError(f"no analytic continuation for {model.kind}")
    if d != 0.0:
        w = w * np.cos(k * d)
    return complex(w)


def _heff_complex(medium, qubits: QubitArray, z: complex, eps: float | None) -> np.ndarray:
    """Effective Hamiltonian continued below the real axis (second sheet)."""
    if isinstance(medium, ModeSet):
        if eps is None:
            eps = default_regulator(medium.model, float(np.real(z)))
        G = medium.couplings
        denom = z + 1j * eps - medium.frequencies
        return np.diag(qubits.gaps.astype(complex)) + (G / denom) @ np.conj(G).T
    model = medium
    S = qubits.count
    sigma = np.zeros((S, S), dtype=complex)
    lo, hi = model.band
    for s in range(S):
        for r in range(s, S):
            d = qubits.separation(s, r)
            if np.imag(z) == 0.0:
                pv = _cauchy_pv(model, float(np.real(z)), d)
                onshell = _pair_weight(model, float(np.real(z)), d)
                val = pv - 1j * np.pi * onshell
            else:
                # subtract the near-pole weight analytically so the quadrature
                # only sees a smooth remainder even for tiny Im(z)
                x0 = float(np.real(z))
                split = hi if np.isfinite(hi) else x0 + 40.0 * max(x0, 1.0)
                w0 = _pair_weight(model, x0, d) if lo < x0 < split else 0.0

                def remainder(w, dd=d):
                    return (_pair_weight(model, w, dd) - w0) / (z - w)

                pts = [x0] if lo < x0 < split else None
                with warnings.catch_warnings():
                    # the subtracted remainder still has a kink of width Im(z);
                    # QUADPACK flags slow convergence while delivering ~1e-10,
                    # which the resonance cross-checks validate
                    warnings.simplefilter("ignore", IntegrationWarning)
                    val = complex(
                        quad(lambda w: np.real(remainder(w)), lo, split, points=pts, **_QUAD_OPTS)[0],
                        quad(lambda w: np.imag(remainder(w)), lo, split, points=pts, **_QUAD_OPTS)[0],
                    )
                # Im(z - w) keeps its sign along the segment, so the two
                # principal logs differ without crossing the branch cut.
                val += w0 * (np.log(z - lo) - np.log(z - split))
                if not np.isfinite(hi):
                    val += quad(lambda w: np.real(_pair_weight(model, w, d) / (z - w)), split, np.inf, **_QUAD_OPTS)[0]
                    val += 1j * quad(lambda w: np.imag(_pair_weight(model, w, d) / (z - w)), split, np.inf, **_QUAD_OPTS)[0]
                if np.imag(z) < 0.0 and lo < np.real(z) < hi:
                    # continue through the cut onto the second sheet
                    val -= 2j * np.pi * _analytic_weight(model, z, d)
            sigma[s, r] = sigma[r, s] = val
    return np.diag(qubits.gaps.astype(complex)) + sigma


def resonances(
    medium,
    qubits: QubitArray,
    eps: float | None = None,
    max_iter: int = 50,
    tol: float = 1e-12,
) -> list[complex]:
    """Complex roots of det(E - H_eff(E)), one per qubit-sector resonance.

    Newton iteration seeded at the eigenvalues of the effective Hamiltonian
    frozen at the mean bare gap; real parts are resonance positions, minus
    twice the imaginary parts the linewidths.
    """
    if qubits.count > 4:
        raise ValueError("resonance search is meant for small arrays (S <= 4)")

    def det_fn(z):
        h = _heff_complex(medium, qubits, z, eps)
        return complex(np.linalg.det(z * np.eye(qubits.count) - h))

    seed_h = _heff_complex(medium, qubits, complex(float(np.mean(qubits.gaps))), eps)
    seeds = np.linalg.eigvals(seed_h)
    roots = []
    for seed in seeds:
        z = complex(seed)
        scale = max(1.0, abs(z))
        for _ in range(max_iter):
            h = 1e-7 * scale
            f = det_fn(z)
            df = (det_fn(z + h) - det_fn(z - h)) / (2.0 * h)
            step = f / df
            z = z - step
            if abs(step) < tol * scale:
                break
        else:
            raise RuntimeError(f"resonance Newton iteration stalled near {z}")
        if not any(abs(z - r) < 1e-9 * scale for r in roots):
            roots.append(z)
    return sorted(roots, key=lambda r: r.real)
