import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmemtwin.channels import (
    BeamsplitterParams,
    NoiseChannelParams,
    amplifier_kraus,
    amplifier_trace_deficit,
    attenuator_kraus_single_mode,
    beamsplitter_matrix,
    beamsplitter_unitary,
    lift_two_mode_linear,
    loss_kraus,
    mode_selector,
    mode_selector_matrix,
    phase_shift,
    thermal_noise_channel,
)
from qmemtwin.fock import (
    DensityState,
    ModeDescriptor,
    apply_kraus,
    apply_unitary,
    fock_state,
    mean_photon_number,
    partial_trace,
    pure_state,
    tensor,
    vacuum_state,
)
from qmemtwin.polynomials import jacobi, laguerre, scaled_laguerre_sequence


def ladder(k):
    return np.diag(np.sqrt(np.arange(1, k + 1)), 1)


def brute_bs(T, k):
    """Beamsplitter from exponentiating the generator in a large space, cut to k."""
    big = 2 * k + 2
    a = np.kron(ladder(big), np.eye(big + 1))
    b = np.kron(np.eye(big + 1), ladder(big))
    theta = math.atan2(math.sqrt(1 - T), math.sqrt(T))
    # e^G a^dag e^-G = cos(theta) a^dag + sin(theta) b^dag for this sign
    gen = theta * (b.T @ a - a.T @ b)
    w, v = np.linalg.eig(gen)
    U = (v * np.exp(w)) @ np.linalg.inv(v)
    idx = [p * (big + 1) + q for p in range(k + 1) for q in range(k + 1)]
    return U[np.ix_(idx, idx)]


# --- polynomials --------------------------------------------------------------


def test_jacobi_known_values():
    assert jacobi(0, 2, 3, 0.4) == 1.0
    assert jacobi(1, 0, 0, 0.3) == pytest.approx(0.3)
    # P_2^(0,0) is the Legendre polynomial
    assert jacobi(2, 0, 0, 0.5) == pytest.approx((3 * 0.25 - 1) / 2)
    # negative parameters are checked through the beamsplitter tests below
    with pytest.raises(ValueError):
        jacobi(1, -3, 0, 0.0)


def test_laguerre_known_values():
    x = 0.7
    assert laguerre(2, 0, x) == pytest.approx((x * x - 4 * x + 2) / 2)
    assert laguerre(1, 1, x) == pytest.approx(2 - x)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(1.01, 3.0), st.integers(0, 1))
def test_scaled_laguerre_matches_direct(b2, G, order):
    y, s = (G - 1) / G, b2 / G
    x = b2 / (1 - G)
    seq = scaled_laguerre_sequence(8, order, y, s)
    for n in range(9):
        assert seq[n] == pytest.approx(y**n * laguerre(n, order, x), rel=1e-9, abs=1e-12)


# --- beamsplitter ------------------------------------------------------------------


@pytest.mark.parametrize("T", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_beamsplitter_blocks_unitary(T):
    U = beamsplitter_unitary(T, 8, 8)
    for N in range(9):
        blk = U.block(N)
        assert np.abs(blk.conj().T @ blk - np.eye(N + 1)).max() < 1e-12


@pytest.mark.parametrize("T", [0.1, 0.5, 0.8])
def test_beamsplitter_matches_generator_exponential(T):
    k = 3
    assert np.abs(beamsplitter_unitary(T, k, k).matrix - brute_bs(T, k)).max() < 1e-10


@pytest.mark.parametrize("T", [0.0, 0.3, 0.5, 1.0])
def test_beamsplitter_equals_lift(T):
    U = beamsplitter_unitary(T, 5, 4).matrix
    L = lift_two_mode_linear(beamsplitter_matrix(T), 5, 4).matrix
    assert np.abs(U - L).max() < 1e-12


def test_beamsplitter_limits():
    assert np.allclose(beamsplitter_unitary(1.0, 3, 3).matrix, np.eye(16))
    swap = beamsplitter_unitary(0.0, 2, 2)
    a, b = ModeDescriptor("a", truncation=2), ModeDescriptor("b", truncation=2)
    out = apply_unitary(tensor(fock_state(2, a), fock_state(1, b)), swap, ["a", "b"])
    assert out.matrix[5, 5].real == pytest.approx(1.0)


def test_hong_ou_mandel():
    a, b = ModeDescriptor("a", truncation=2), ModeDescriptor("b", truncation=2)
    out = apply_unitary(tensor(fock_state(1, a), fock_state(1, b)), beamsplitter_unitary(0.5, 2, 2), ["a", "b"])
    # expanding (t a + r b)(-r a + t b) by hand: -tr a^2 + (t^2 - r^2) ab + rt b^2
    psi = np.zeros(9)
    psi[6], psi[2] = -1 / math.sqrt(2), 1 / math.sqrt(2)
    assert np.allclose(out.matrix, np.outer(psi, psi), atol=1e-12)


def test_single_photon_split():
    a, b = ModeDescriptor("a", truncation=1), ModeDescriptor("b", truncation=1)
    out = apply_unitary(tensor(fock_state(1, a), fock_state(0, b)), beamsplitter_unitary(0.5, 1, 1), ["a", "b"])
    psi = np.array([0, 1, 1, 0]) / math.sqrt(2)
    assert np.allclose(out.matrix, np.outer(psi, psi), atol=1e-12)


def test_bs_params():
    p = BeamsplitterParams(0.36)
    assert p.t == pytest.approx(0.6) and p.r == pytest.approx(0.8)
    assert math.cos(p.coupling) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        BeamsplitterParams(1.2)


def test_lift_rejects_non_unitary():
    with pytest.raises(ValueError):
        lift_two_mode_linear(np.ones((2, 2)), 2, 2)


def test_mode_selector_token_states():
    a, b = ModeDescriptor("a", truncation=1), ModeDescriptor("b", truncation=1)
    src = tensor(fock_state(1, a), vacuum_state([b]))
    s = 1 / math.sqrt(2)
    # pi/2 -> photon stays in a, 3pi/4 -> photon in b
    out = apply_unitary(src, mode_selector(math.pi / 2, 1, 1), ["a", "b"])
    assert out.matrix[2, 2].real == pytest.approx(1.0)
    out = apply_unitary(src, mode_selector(3 * math.pi / 4, 1, 1), ["a", "b"])
    assert out.matrix[1, 1].real == pytest.approx(1.0)
    # 5pi/8 gives the symmetric superposition, 3pi/8 the antisymmetric one
    plus = pure_state([0, s, s, 0], [a, b])
    minus = pure_state([0, s, -s, 0], [a, b])
    out = apply_unitary(src, mode_selector(5 * math.pi / 8, 1, 1), ["a", "b"])
    assert np.allclose(out.matrix, plus.matrix, atol=1e-12)
    out = apply_unitary(src, mode_selector(3 * math.pi / 8, 1, 1), ["a", "b"])
    assert np.allclose(out.matrix, minus.matrix, atol=1e-12)
    m = mode_selector_matrix(0.3)
    assert np.allclose(m @ m, np.eye(2))


def test_phase_shift():
    assert np.allclose(phase_shift(math.pi, 2).diagonal(), [1, -1, 1])


# --- loss and gain --------------------------------------------------------------------


def test_loss_equals_attenuator():
    for T in (0.0, 0.3, 1.0):
        for A, W in zip(loss_kraus(T, 6), attenuator_kraus_single_mode(T, 6)):
            assert np.abs(A - W).max() < 1e-15


def test_loss_matches_beamsplitter_with_ancilla():
    rng = np.random.default_rng(7)
    k, T = 6, 0.37
    sys_mode, env = ModeDescriptor("s", truncation=k), ModeDescriptor("e", truncation=k)
    U = beamsplitter_unitary(T, k, k)
    ks = loss_kraus(T, k)
    worst = 0.0
    for _ in range(50):
        x = rng.normal(size=(k + 1, 3)) + 1j * rng.normal(size=(k + 1, 3))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        st0 = DensityState([sys_mode], rho)
        via_bs = partial_trace(apply_unitary(tensor(st0, vacuum_state([env])), U, ["s", "e"]), "e")
        via_kraus = apply_kraus(st0, ks, ["s"])
        worst = max(worst, np.abs(via_bs.matrix - via_kraus.matrix).max())
    assert worst < 1e-12


def test_loss_is_trace_preserving():
    ks = loss_kraus(0.4, 5)
    assert np.allclose(ks.completeness(), np.eye(6))


@pytest.mark.parametrize("G", [1.01, 1.1, 1.5])
def test_amplifier_on_vacuum(G):
    k = 15
    m = ModeDescriptor("a", truncation=k)
    out = apply_kraus(vacuum_state([m]), amplifier_kraus(G, k), ["a"])
    expected = [(1 / G) * ((G - 1) / G) ** n for n in range(k + 1)]
    assert np.abs(out.matrix.diagonal().real - expected).max() < 1e-14


def test_amplifier_trace_deficit():
    G, k = 1.3, 6
    m = ModeDescriptor("a", truncation=k)
    for n in (0, 2, 5):
        out = apply_kraus(fock_state(n, m), amplifier_kraus(G, k), ["a"])
        assert 1 - out.trace == pytest.approx(amplifier_trace_deficit(G, k, n), abs=1e-13)
    assert amplifier_kraus(G, k).is_trace_nonincreasing()
    with pytest.raises(ValueError):
        amplifier_kraus(0.9, 3)


def test_amplifier_gain_one_is_identity():
    ks = amplifier_kraus(1.0, 4)
    assert np.allclose(ks.operators[0], np.eye(5))
    assert all(np.allclose(op, 0) for op in ks.operators[1:])


def test_noise_params():
    p = NoiseChannelParams(0.13 / 0.33, 0.07 * 0.33 / (1 - 0.13 / 0.33))
    assert p.gain - 1 == pytest.approx(0.0231)
    assert p.tau * p.gain == pytest.approx(p.kappa)
    with pytest.raises(ValueError):
        NoiseChannelParams(1.5, 0.0)


def test_thermal_channel_mean_photon_number():
    # loss then gain: <n> -> G tau n + (G - 1) = kappa n + (1 - kappa) n_B
    kappa, nb, k = 0.6, 0.3, 12
    ch = thermal_noise_channel(kappa, nb, k)
    m = ModeDescriptor("a", truncation=k)
    st0 = fock_state(2, m)
    for stage in ch.stages:
        st0 = apply_kraus(st0, stage, ["a"])
    assert mean_photon_number(st0, "a") == pytest.approx(kappa * 2 + (1 - kappa) * nb, abs=1e-7)
    composed = apply_kraus(fock_state(2, m), ch.composed(), ["a"])
    assert np.allclose(composed.matrix, st0.matrix)
    assert thermal_noise_channel(1.0, 0.0, 3).is_identity()
    assert not ch.is_identity()
