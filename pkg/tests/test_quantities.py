import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonprobe.quantities import (CrossSectionInput, DomainError, Lifetime, Linewidth, angular,
                                    cross_section, fwhm_to_lifetime, lifetime_to_fwhm, phase,
                                    shot_noise_depth, shot_noise_flux)

positive = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


@given(positive)
def test_linewidth_lifetime_round_trip(g):
    assert lifetime_to_fwhm(fwhm_to_lifetime(g)).fwhm == pytest.approx(g, rel=1e-13)


@given(positive)
def test_lifetime_linewidth_product(g):
    # gamma * tau = 1 / (2 pi) with MHz * ns = 1e-3
    assert g * fwhm_to_lifetime(g).tau * 1e-3 == pytest.approx(1 / (2 * np.pi), rel=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_nonpositive_widths_rejected(bad):
    with pytest.raises(DomainError):
        Linewidth(bad)
    with pytest.raises(DomainError):
        Lifetime(bad)
    with pytest.raises(DomainError):
        fwhm_to_lifetime(bad)


def test_one_cycle_per_microsecond_at_one_megahertz():
    assert phase(1.0, 1000.0) == pytest.approx(2 * np.pi)
    assert angular(1.0) == pytest.approx(2 * np.pi * 1e-3)


@given(st.floats(1e-8, 1e-5), st.floats(1.0, 100.0))
def test_cross_section_scales_inversely_with_broadening(lam, ratio):
    g0 = Linewidth(10.0)
    full = cross_section(CrossSectionInput(lam, g0, g0))
    broad = cross_section(CrossSectionInput(lam, g0, Linewidth(10.0 * ratio)))
    assert broad == pytest.approx(full / ratio, rel=1e-12)
    assert full == pytest.approx(3 * lam ** 2 / (2 * np.pi), rel=1e-12)


def test_cross_section_domain():
    with pytest.raises(DomainError):
        CrossSectionInput(589e-9, Linewidth(20.0), Linewidth(10.0))
    with pytest.raises(DomainError):
        CrossSectionInput(-1.0, Linewidth(20.0), Linewidth(20.0))


@given(st.floats(1e-4, 1.0), st.floats(1e-3, 1e3), st.floats(0.1, 100.0))
def test_shot_noise_inverse_pair(depth, T, snr):
    flux = shot_noise_flux(depth, T, snr)
    assert shot_noise_depth(flux, T, snr) == pytest.approx(depth, rel=1e-12)


@given(st.floats(1e-4, 1.0), st.floats(1e-3, 1e3))
def test_shot_noise_flux_quadruples_for_double_snr(depth, T):
    assert shot_noise_flux(depth, T, 2.0) == pytest.approx(4 * shot_noise_flux(depth, T, 1.0))


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.5, 1.0), (0.01, 0.0), (0.01, 1.0, -1.0)])
def test_shot_noise_domain(args):
    with pytest.raises(DomainError):
        shot_noise_flux(*args)
