"""Microscopic 1D photonic media: dispersions, couplings, and spectral functions.

Units: the speed of light in the linear-dispersion regime is v = 1 and the
qubit gap sets the frequency scale, so lengths are measured in v/Delta and the
qubit wavelength is lambda_0 = 2*pi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAPLESS_CHAIN = "gapless_chain"
PHOTONIC_CRYSTAL = "photonic_crystal"
EXPONENTIAL_CONTINUUM = "exponential_continuum"
CONSTANT_SPECTRUM = "constant_spectrum"
TIGHT_BINDING = "tight_binding"

MODEL_KINDS = (
    GAPLESS_CHAIN,
    PHOTONIC_CRYSTAL,
    EXPONENTIAL_CONTINUUM,
    CONSTANT_SPECTRUM,
    TIGHT_BINDING,
)

# Kinds whose couplings are frequency independent in magnitude.
_FLAT_COUPLING = (CONSTANT_SPECTRUM, TIGHT_BINDING)


@dataclass(frozen=True)
class PhotonicModel:
    """A one-dimensional photonic medium.

    kind        one of MODEL_KINDS
    length      physical length L of the line (ring boundary conditions)
    mode_count  number N of momentum intervals; the grid holds N + 1 modes
    coupling    dimensionless light-matter coupling strength g
    cutoff      UV cutoff (gapless_chain: fixed to N/L; exponential_continuum:
                scale of the exponential suppression in the couplings)
    center      band center omega_0 (photonic_crystal, tight_binding,
                constant_spectrum)
    bandwidth   half-bandwidth J; band is [center - J, center + J]

    The power spectral function conventions per kind are recorded in
    ``spectral_form`` and used consistently by every consumer: the decay rate
    of a resonant qubit is J(omega) evaluated at its renormalized gap.
    """

    kind: str
    coupling: float
    length: float = 0.0
    mode_count: int = 0
    cutoff: float = 0.0
    center: float = 0.0
    bandwidth: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == GAPLESS_CHAIN:
            if self.length <= 0 or self.mode_count <= 0:
                raise ValueError("gapless_chain needs positive length and mode_count")
            # The chain cutoff is tied to the discretization step.
            object.__setattr__(self, "cutoff", self.mode_count / self.length)
        if self.kind == EXPONENTIAL_CONTINUUM and self.cutoff <= 0:
            raise ValueError("exponential_continuum needs a positive cutoff")
        if self.kind in (PHOTONIC_CRYSTAL, TIGHT_BINDING):
            if self.bandwidth <= 0:
                raise ValueError(f"{self.kind} needs a positive bandwidth")
            if self.center - self.bandwidth < 0:
                raise ValueError("band must not extend below zero frequency")
            # Lattice constant 1: the length equals the number of sites.
            if self.mode_count > 0 and self.length == 0.0:
                object.__setattr__(self, "length", float(self.mode_count))
        if self.kind == CONSTANT_SPECTRUM and self.bandwidth <= 0:
            raise ValueError(
                "constant_spectrum needs explicit band limits: set center and "
                "bandwidth (its flat spectral function requires cutoffs)"
            )

    @property
    def spacing(self) -> float:
        """Lattice constant of the discretized line."""
        if self.kind == GAPLESS_CHAIN:
            return self.length / self.mode_count
        return 1.0

    @property
    def band(self) -> tuple[float, float]:
        """Frequency support [min, max] of the spectral function."""
        if self.kind == GAPLESS_CHAIN:
            return (0.0, 2.0 * self.cutoff)
        if self.kind == EXPONENTIAL_CONTINUUM:
            return (0.0, np.inf)
        return (self.center - self.bandwidth, self.center + self.bandwidth)

    @property
    def spectral_form(self) -> str:
        """Human-readable record of the spectral-function convention."""
        g = self.coupling
        if self.kind == EXPONENTIAL_CONTINUUM:
            return f"J(w) = {g**2:.6g} * w * exp(-w/{self.cutoff:.6g})"
        if self.kind == CONSTANT_SPECTRUM:
            return f"J(w) = {g**2:.6g} inside the band"
        if self.kind == TIGHT_BINDING:
            return f"J(w) = 2*{g**2:.6g} / v_g(w)"
        return f"J(w) = {g**2:.6g} * w / v_g(w)"

    def momentum_of(self, omega: float) -> float:
        """Positive-branch momentum k(omega), strictly inside the band."""
        lo, hi = self.band
        if not lo < omega < hi:
            raise ValueError(f"frequency {omega} outside the open band ({lo}, {hi})")
        if self.kind == GAPLESS_CHAIN:
            return 2.0 * self.cutoff * np.arcsin(omega / (2.0 * self.cutoff))
        if self.kind in (PHOTONIC_CRYSTAL, TIGHT_BINDING):
            return float(np.arccos((self.center - omega) / self.bandwidth))
        return omega

    def dispersion(self, k) -> np.ndarray:
        """Mode frequency omega(k) for momenta ``k`` (array friendly)."""
        k = np.asarray(k, dtype=float)
        dx = self.spacing
        if self.kind == GAPLESS_CHAIN:
            return self.cutoff * np.sqrt(2.0 - 2.0 * np.cos(k * dx))
        if self.kind in (PHOTONIC_CRYSTAL, TIGHT_BINDING):
            return self.center - self.bandwidth * np.cos(k * dx)
        return np.abs(k)


@dataclass(frozen=True)
class QubitArray:
    """Qubit gaps and positions along the line (common coupling g lives in the model)."""

    gaps: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        gaps = np.atleast_1d(np.asarray(self.gaps, dtype=float))
        pos = np.atleast_1d(np.asarray(self.positions, dtype=float))
        if gaps.shape != pos.shape:
            raise ValueError("gaps and positions must have matching shapes")
        if np.any(gaps <= 0):
            raise ValueError("qubit gaps must be positive")
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return self.gaps.size

    def separation(self, s: int, r: int) -> float:
        return float(self.positions[s] - self.positions[r])


@dataclass(frozen=True)
class ModeSet:
    """Discretized field: momenta, frequencies and the per-qubit coupling table."""

    momenta: np.ndarray
    frequencies: np.ndarray
    couplings: np.ndarray  # shape (S, N + 1), complex
    model: PhotonicModel = field(repr=False)

    @property
    def mode_count(self) -> int:
        return self.frequencies.size

    @property
    def magnitudes(self) -> np.ndarray:
        """|g_k| shared by all qubits (phases alone distinguish positions)."""
        return np.abs(self.couplings[0])


def build_modes(model: PhotonicModel, qubits: QubitArray) -> ModeSet:
    """Build the exact momentum grid and coupling table for a discretized model.

    The grid is k = (2*pi/L) * {0, +-1, ..., +-N/2} (N even, N + 1 modes).
    Coupling amplitudes are g*sqrt(omega/2L)*exp(i k x) for the realistic
    media; the exponential-continuum discretization carries exp(-omega/2wc) so
    that the power spectrum matches its nominal J(omega); constant_spectrum
    and tight_binding have frequency-independent magnitudes.
    """
    N = model.mode_count
    if N <= 0:
        raise ValueError("model carries no mode grid (set mode_count)")
    if N % 2:
        raise ValueError(f"mode_count must be even, got {N}")
    L = model.length
    if L <= 0:
        raise ValueError("model needs a positive length")
    indices = np.arange(-(N // 2), N // 2 + 1)
    k = (2.0 * np.pi / L) * indices
    omega = model.dispersion(k)

    g = model.coupling
    if model.kind == TIGHT_BINDING:
        # Fourier-diagonalized hopping chain: flat magnitude, opposite phase sign.
        mag = np.full_like(omega, g / np.sqrt(N))
        phases = np.exp(-1j * np.outer(qubits.positions, k))
    elif model.kind == CONSTANT_SPECTRUM:
        lo, hi = model.band
        mag = np.where((omega >= lo) & (omega <= hi), g / np.sqrt(2.0 * L), 0.0)
        phases = np.exp(1j * np.outer(qubits.positions, k))
    else:
        mag = g * np.sqrt(omega / (2.0 * L))
        if model.kind == EXPONENTIAL_CONTINUUM:
            mag = mag * np.exp(-omega / (2.0 * model.cutoff))
        phases = np.exp(1j * np.outer(qubits.positions, k))

    couplings = mag[np.newaxis, :] * phases
    return ModeSet(momenta=k, frequencies=omega, couplings=couplings, model=model)


def spectral_density(model: PhotonicModel, omega: float) -> float:
    """Power spectral function J(omega); zero outside the band support.

    Continuum density-of-states form for the discrete media: J = g^2*w/v_g(w)
    for sqrt(w)-type couplings, J = 2 g^2/v_g(w) for the flat-coupling hopping
    chain, a constant g^2 for the flat-spectrum toy model, and
    g^2*w*exp(-w/wc) for the exponential-cutoff continuum.
    """
    lo, hi = model.band
    if omega <= lo or omega >= hi:
        return 0.0
    g2 = model.coupling**2
    if model.kind == EXPONENTIAL_CONTINUUM:
        return g2 * omega * np.exp(-omega / model.cutoff)
    if model.kind == CONSTANT_SPECTRUM:
        return g2
    vg = group_velocity(model, omega)
    if model.kind == TIGHT_BINDING:
        return 2.0 * g2 / vg
    return g2 * omega / vg


def group_velocity(model: PhotonicModel, omega: float) -> float:
    """Group velocity d(omega)/dk at a frequency strictly inside the band."""
    lo, hi = model.band
    if not lo < omega < hi:
        raise ValueError(
            f"group velocity undefined at {omega}: band edge or outside "
            f"({lo}, {hi}); the density of states diverges there"
        )
    if model.kind == GAPLESS_CHAIN:
        return float(np.sqrt(1.0 - (omega / (2.0 * model.cutoff)) ** 2))
    if model.kind in (PHOTONIC_CRYSTAL, TIGHT_BINDING):
        return float(np.sqrt(model.bandwidth**2 - (omega - model.center) ** 2))
    return 1.0
