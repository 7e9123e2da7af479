import math

import pytest
from hypothesis import given, strategies as st

from qmemtwin.metrics import (
    INFINITE_SNR,
    CountRecord,
    fringe_visibility,
    mu1,
    mu1_from_snr,
    snr,
    token_correctness,
    visibility,
)


def test_snr_basic():
    assert snr(CountRecord(2.0, 1.0)) == 1.0
    assert snr(CountRecord(0.5, 0.0)) == INFINITE_SNR
    with pytest.raises(ValueError):
        CountRecord(0.1, 0.2)
    with pytest.raises(ValueError):
        CountRecord(0.1, -0.2)


def test_mu1_lambda895():
    rec = CountRecord(0.0231 + 0.13, 0.0231, 1.0)
    assert mu1(rec, 0.33) == pytest.approx(0.07)
    with pytest.raises(ValueError):
        mu1(rec, 0.0)


def test_snr_from_noise_figure():
    # unit efficiency, one input photon: SNR = 1 / mu1
    rec = CountRecord(1 + 0.07, 0.07, 1.0)
    assert snr(rec) == pytest.approx(1 / 0.07)
    assert snr(rec) == pytest.approx(14.3, abs=0.1)


@given(st.floats(1e-6, 1.0), st.floats(1e-3, 1.0), st.floats(1e-4, 0.1))
def test_both_noise_figure_forms_agree(signal_eta, eta_int, mu):
    n_in = 1.3
    noise = mu * eta_int
    # the detection-referred input photon number is signal / eta_int
    rec = CountRecord(noise + signal_eta * eta_int * n_in, noise, signal_eta * n_in)
    assert mu1(rec, eta_int) == pytest.approx(mu1_from_snr(rec), rel=1e-12)


def test_zero_noise_figure():
    rec = CountRecord(0.3, 0.0)
    assert mu1(rec, 0.5) == 0.0
    assert mu1_from_snr(rec) == 0.0


def test_visibility():
    assert visibility(1.0, 0.0) == 1.0
    assert visibility(1.0, 1.0) == 0.0
    assert fringe_visibility([0.2, 0.5, 0.8]) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        visibility(0.0, 0.0)
    with pytest.raises(ValueError):
        visibility(0.2, 0.5)


@given(st.floats(1e-3, 10), st.floats(0, 1), st.floats(1e-3, 1e3))
def test_visibility_scale_invariant(a, frac, k):
    b = a * frac
    assert visibility(k * a, k * b) == pytest.approx(visibility(a, b), abs=1e-12)


def test_token_correctness_values():
    assert token_correctness(1.0, 0.0) == (1.0, 0.0)
    c0, c1 = token_correctness(0.5, 0.5)
    assert c0 == c1 == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        token_correctness(0.0, 0.0)
    with pytest.raises(ValueError):
        token_correctness(1.2, 0.0)


@given(st.floats(0, 1), st.floats(0, 1))
def test_token_correctness_symmetry(p0, p1):
    if p0 == 0 and p1 == 0:
        return
    c0, c1 = token_correctness(p0, p1)
    d0, d1 = token_correctness(p1, p0)
    assert (c0, c1) == pytest.approx((d1, d0))
    assert 0 <= c0 <= 1 and 0 <= c1 <= 1
    assert not math.isnan(c0)
