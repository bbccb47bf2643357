import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import expi

from wgqed import (
    CONSTANT_SPECTRUM,
    EXPONENTIAL_CONTINUUM,
    TIGHT_BINDING,
    KernelSpec,
    MarkovParameters,
    PhotonicModel,
    lamb_shift_self_consistent,
    lamb_shift_simplified,
    markov_integral,
    principal_value,
    resonant_dipole_params,
    single_qubit_closed_form,
    spectral_density,
    two_qubit_closed_form,
    two_qubit_params,
)

LAMBDA0 = 2.0 * np.pi


def test_principal_value_log_oracle():
    # PV of a constant weight has the exact boundary logarithm
    val = principal_value(lambda w: 1.0, 1.0, 0.5, 3.0)
    assert val == pytest.approx(np.log(0.5 / 2.0), rel=1e-12)
    # symmetric band: exact zero
    assert principal_value(lambda w: 2.7, 1.0, 0.4, 1.6) == pytest.approx(0.0, abs=1e-13)


def test_principal_value_against_eps_limit():
    # independent oracle: Im-regularized integral extrapolated to eps -> 0
    def weight(w):
        return w * np.exp(-w / 3.0)

    pole = 1.3

    def smeared(eps):
        re = quad(
            lambda w: weight(w) * (pole - w) / ((pole - w) ** 2 + eps**2),
            0.0,
            np.inf,
            epsabs=1e-13,
            epsrel=1e-11,
            limit=400,
        )[0]
        return re

    rich = 2 * smeared(1e-4) - smeared(2e-4)
    assert principal_value(weight, pole, 0.0, np.inf) == pytest.approx(rich, abs=2e-7)


def test_markov_integral_frozen_values(exp_spec):
    """shift = -2.9204e-3 and rate = 1.4477e-3 at the bare gap."""
    val = markov_integral(exp_spec, 1.0, "self")
    assert val.real == pytest.approx(-2.9204e-3, rel=1e-4)
    assert -2.0 * val.imag == pytest.approx(1.4477398688575354e-3, rel=1e-10)
    # closed-form oracle at the same probe
    shift, rate = single_qubit_closed_form(0.04, 1.0, 10.0)
    assert val == pytest.approx(shift - 0.5j * rate, rel=1e-10)


def test_markov_integral_zero_coupling():
    spec = KernelSpec(model=PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.0, cutoff=10.0))
    assert markov_integral(spec, 1.0, "self") == 0.0


def test_markov_integral_constant_spectrum_imaginary():
    # flat weight, probe at band center: the shift vanishes, decay survives
    model = PhotonicModel(
        kind=CONSTANT_SPECTRUM, coupling=0.04, center=1.0, bandwidth=0.6, mode_count=40000, length=4000.0
    )
    val = markov_integral(KernelSpec(model=model, mode="mode_sum", eps=0.01), 1.0, "self")
    assert abs(val.real) < 5e-5
    assert -2.0 * val.imag == pytest.approx(0.0016, rel=5e-3)
    from wgqed.markov import _channel_shift

    assert abs(_channel_shift(model, 1.0, "self", 0.0)) < 1e-13


def test_markov_integral_mode_sum_matches_continuum(exp_spec):
    dense = PhotonicModel(
        kind=EXPONENTIAL_CONTINUUM, coupling=0.04, cutoff=10.0, length=3000.0, mode_count=120000
    )
    spec = KernelSpec(model=dense, mode="mode_sum")
    ms = markov_integral(spec, 1.0, "self")
    cont = markov_integral(exp_spec, 1.0, "self")
    assert ms == pytest.approx(cont, abs=2e-6)


def test_self_consistent_frozen(exp_model):
    shifted, rate = lamb_shift_self_consistent(exp_model, 1.0)
    assert shifted == pytest.approx(0.99708, abs=2e-5)
    assert rate == pytest.approx(1.4439e-3, rel=1e-4)
    # independent closed-form fixed-point oracle
    s_cf, r_cf = single_qubit_closed_form(0.04, shifted, 10.0)
    assert shifted == pytest.approx(1.0 + s_cf, abs=1e-10)
    assert rate == pytest.approx(r_cf, rel=1e-9)


def test_self_consistent_zero_coupling():
    model = PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.0, cutoff=10.0)
    assert lamb_shift_self_consistent(model, 1.0) == (1.0, 0.0)


def test_self_consistent_constant_spectrum_exact():
    model = PhotonicModel(kind=CONSTANT_SPECTRUM, coupling=0.04, center=1.0, bandwidth=0.6)
    shifted, rate = lamb_shift_self_consistent(model, 1.0)
    assert shifted == 1.0
    assert rate == pytest.approx(0.0016, rel=1e-12)


def test_simplified_scheme(exp_model):
    model0 = PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.0, cutoff=10.0)
    assert lamb_shift_simplified(model0, 1.0) == (1.0, 0.0)
    s1, _ = lamb_shift_simplified(exp_model, 1.0)
    s2, _ = lamb_shift_self_consistent(exp_model, 1.0)
    # one-shot vs fixed point differ at second order in the shift
    assert 1e-8 < abs(s1 - s2) < 1e-6
    tb = PhotonicModel(kind=TIGHT_BINDING, coupling=0.04, center=1.0, bandwidth=0.5)
    shifted, _ = lamb_shift_simplified(tb, 1.1)
    assert shifted == pytest.approx(1.1, abs=1e-10)


def test_closed_form_values():
    shift, rate = single_qubit_closed_form(0.04, 1.0, 10.0)
    assert rate == pytest.approx(0.0016 * np.exp(-0.1), rel=1e-14)
    expected_shift = -(0.0016 / (2 * np.pi)) * (10.0 - np.exp(-0.1) * expi(0.1))
    assert shift == pytest.approx(expected_shift, rel=1e-14)
    assert shift == pytest.approx(-2.9203994e-3, rel=1e-6)
    assert single_qubit_closed_form(0.0, 1.0, 10.0) == (0.0, 0.0)


def test_closed_form_cutoff_divergence():
    # the shift grows linearly with the cutoff, slope -g^2/2pi
    s1, _ = single_qubit_closed_form(0.04, 1.0, 1000.0)
    s2, _ = single_qubit_closed_form(0.04, 1.0, 2000.0)
    slope = (s2 - s1) / 1000.0
    assert slope == pytest.approx(-(0.04**2) / (2 * np.pi), rel=2e-2)


def test_closed_form_oracle_quadrature():
    """The shift equals the principal-value integral of J/(2 pi (D' - w))."""
    g, wc, probe = 0.05, 7.0, 1.3

    def weight(w):
        return g**2 * w * np.exp(-w / wc) / (2 * np.pi)

    pv = principal_value(weight, probe, 0.0, np.inf)
    shift, _ = single_qubit_closed_form(g, probe, wc)
    assert shift == pytest.approx(pv, rel=1e-10)


def test_two_qubit_coincident(exp_model):
    for scheme in ("none", "simplified", "self_consistent"):
        p = two_qubit_params(exp_model, 1.0, 0.0, scheme)
        assert p.decay_minus == pytest.approx(0.0, abs=1e-15)
        assert p.decay == pytest.approx(p.decay_plus / 2.0, rel=1e-12)
        assert p.collective_decay == pytest.approx(p.decay, rel=1e-12)


def test_two_qubit_zero_coupling():
    model = PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.0, cutoff=10.0)
    p = two_qubit_params(model, 1.0, LAMBDA0, "self_consistent")
    assert p.shifted_gap == 1.0
    assert p.decay == p.collective_decay == p.coherent_coupling == 0.0


def test_two_qubit_unequal_gaps_guidance(exp_model):
    with pytest.raises(ValueError, match="effective Hamiltonian"):
        two_qubit_params(exp_model, (1.0, 1.1), LAMBDA0, "self_consistent")


def test_two_qubit_beatings_only_with_self_consistency():
    model = PhotonicModel(kind=EXPONENTIAL_CONTINUUM, coupling=0.04, cutoff=10.0)
    ds = np.linspace(LAMBDA0, 4 * LAMBDA0, 9)
    none_rates = [two_qubit_params(model, 1.0, d, "none").decay for d in ds]
    sc_rates = [two_qubit_params(model, 1.0, d, "self_consistent").decay for d in ds]
    assert np.ptp(none_rates) == pytest.approx(0.0, abs=1e-15)
    assert np.ptp(sc_rates) > 1e-3 * np.mean(sc_rates)


def test_recombination_identities_exact(exp_model):
    p = two_qubit_params(exp_model, 1.0, 1.7, "self_consistent")
    assert p.shifted_gap == pytest.approx(0.5 * (p.gap_plus + p.gap_minus), abs=1e-15)
    assert p.coherent_coupling == pytest.approx(0.5 * (p.gap_plus - p.gap_minus), abs=1e-15)
    assert p.decay == pytest.approx(0.5 * (p.decay_plus + p.decay_minus), abs=1e-18)
    assert p.collective_decay == pytest.approx(0.5 * (p.decay_plus - p.decay_minus), abs=1e-18)
    with pytest.raises(ValueError, match="identities"):
        MarkovParameters(
            base_gap=1.0,
            shifted_gap=1.0,
            lamb_shift=0.0,
            decay=1e-3,
            coherent_coupling=0.0,
            collective_decay=0.0,
            gap_plus=1.1,
            gap_minus=1.0,
            decay_plus=1e-3,
            decay_minus=1e-3,
            scheme="none",
        )
    with pytest.raises(ValueError, match="non-negative"):
        MarkovParameters.from_channels(1.0, 1.0, 1.0, -1e-3, 1e-3, "none")


def test_resonant_dipole_special_points():
    rate = 2e-3
    coherent, collective = resonant_dipole_params(rate, 1.0, np.pi)
    assert collective == pytest.approx(-rate, rel=1e-15)
    assert coherent == pytest.approx(0.0, abs=1e-18)
    coherent, collective = resonant_dipole_params(rate, 1.0, 0.0)
    assert (coherent, collective) == (0.0, rate)
    coherent, collective = resonant_dipole_params(rate, 1.0, np.pi / 2)
    assert collective == pytest.approx(0.0, abs=1e-18)
    assert coherent == pytest.approx(rate / 2.0, rel=1e-15)


def test_none_scheme_approaches_resonant_dipole(exp_model):
    """Far outside the cutoff length the bare-gap integrals give sin/cos."""
    rate = spectral_density(exp_model, 1.0)
    for d in np.linspace(1.5 * LAMBDA0, 4 * LAMBDA0, 7):
        p = two_qubit_params(exp_model, 1.0, float(d), "none")
        coh_rd, col_rd = resonant_dipole_params(rate, 1.0, float(d))
        assert abs(p.coherent_coupling - coh_rd) < 0.05 * rate
        assert abs(p.collective_decay - col_rd) < 0.05 * rate


def test_two_qubit_closed_form_limits():
    g, wc = 0.04, 10.0
    p0 = two_qubit_closed_form(g, 1.0, wc, 1e-9)
    # short-distance divergence toward the -g^2 wc / pi scale
    assert p0.coherent_coupling < -0.5 * g**2 * wc / np.pi
    pbig = two_qubit_closed_form(g, 1.0, 100.0, 1e-9)
    assert pbig.coherent_coupling < 5.0 * p0.coherent_coupling
    # large separations: approximately sinusoidal with the decay amplitude
    rate = g**2 * np.exp(-1.0 / wc)
    for d in (60.25, 71.4):
        p = two_qubit_closed_form(g, 1.0, wc, d)
        assert p.collective_decay == pytest.approx(rate * np.cos(d), rel=1e-12)
        assert p.coherent_coupling == pytest.approx(0.5 * rate * np.sin(d), abs=0.05 * rate)
    z = two_qubit_closed_form(0.0, 1.0, wc, 3.0)
    assert z.decay == z.coherent_coupling == z.collective_decay == 0.0


def test_two_qubit_channel_rates_positive(exp_model):
    for d in np.linspace(0.0, 3 * LAMBDA0, 8):
        p = two_qubit_params(exp_model, 1.0, float(d), "self_consistent")
        assert p.decay_plus >= 0.0
        assert p.decay_minus >= 0.0
