"""Linear-optics unitaries and bosonic Kraus channels in the Fock basis.

Beamsplitter convention: with amplitudes ``t = sqrt(T)`` and
``r = sqrt(1 - T)`` the creation operators of modes ``(a, b)`` map as
``a^dag -> t a^dag + r b^dag`` and ``b^dag -> -r a^dag + t b^dag``.

The thermal noise channel is built as a pure-loss channel with
transmissivity ``tau = kappa / G`` followed by a quantum-limited amplifier
with gain ``G = 1 + (1 - kappa) * n_bar_B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial, sqrt

import numpy as np

from .fock import KrausSet
from .polynomials import jacobi

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class BeamsplitterParams:
    """Power transmissivity and the derived amplitudes of a beamsplitter."""

    t_power: float

    def __post_init__(self):
        if not 0.0 <= self.t_power <= 1.0:
            raise ValueError(f"transmissivity {self.t_power} outside [0, 1]")

    @property
    def r_power(self) -> float:
        return 1.0 - self.t_power

    @property
    def t(self) -> float:
        return sqrt(self.t_power)

    @property
    def r(self) -> float:
        return sqrt(self.r_power)

    @property
    def coupling(self) -> float:
        """Mixing angle ``zeta`` with ``cos(zeta) = t``, ``sin(zeta) = r``."""
        return math.atan2(self.r, self.t)


@dataclass(frozen=True)
class NoiseChannelParams:
    kappa: float
    n_bar_B: float

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa {self.kappa} outside [0, 1]")
        if self.n_bar_B < 0:
            raise ValueError("n_bar_B must be non-negative")

    @property
    def gain(self) -> float:
        return 1.0 + (1.0 - self.kappa) * self.n_bar_B

    @property
    def tau(self) -> float:
        return self.kappa / self.gain


@dataclass(frozen=True)
class TwoModeUnitary:
    """A Fock-space operator on two modes.

    Attributes:
        matrix: ``(da*db, da*db)`` matrix in the mixed-radix layout.
        dims: ``(da, db)``.
        clipped_blocks: Total photon numbers whose block is only partly
            representable; the operator is not unitary there.
    """

    matrix: np.ndarray
    dims: tuple
    clipped_blocks: tuple = ()

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def max_complete_photons(self) -> int:
        return min(self.dims) - 1

    def block(self, n_total: int) -> np.ndarray:
        """The ``(N+1) x (N+1)`` sub-matrix on ``|N-m, m>`` states."""
        da, db = self.dims
        idx = [(n_total - m) * db + m for m in range(n_total + 1)
               if n_total - m < da and m < db]
        return self.matrix[np.ix_(idx, idx)]


def _clipped(trunc_a: int, trunc_b: int) -> tuple:
    complete = min(trunc_a, trunc_b)
    return tuple(range(complete + 1, trunc_a + trunc_b + 1))


def beamsplitter_matrix(T: float) -> np.ndarray:
    """Mode-transfer matrix of the beamsplitter in the lift convention.

    Column ``j`` holds the image of the ``j``-th creation operator, so this
    is the transpose of the row-wise ``[[t, r], [-r, t]]`` form.
    """
    p = BeamsplitterParams(T)
    return np.array([[p.t, -p.r], [p.r, p.t]])


def _bs_element(N: int, m: int, n: int, t: float, r: float) -> float:
    """``<N-m, m| U |N-n, n>`` from the Jacobi-polynomial closed form."""
    weight = sqrt(factorial(N - n) * factorial(n) / (factorial(N - m) * factorial(m)))
    return weight * t ** (N - n - m) * r ** (m - n) * jacobi(n, m - n, N - n - m, t * t - r * r)


def beamsplitter_unitary(T: float, trunc_a: int, trunc_b: int) -> TwoModeUnitary:
    """Two-mode beamsplitter with power transmissivity ``T``.

    Matrix elements use the Jacobi-polynomial closed form. ``T = 1`` is the
    identity and ``T = 0`` the signed swap ``|p, q> -> (-1)^q |q, p>``.
    """
    p = BeamsplitterParams(T)
    t, r = p.t, p.r
    da, db = trunc_a + 1, trunc_b + 1
    U = np.zeros((da * db, da * db))
    for N in range(trunc_a + trunc_b + 1):
        for n in range(max(0, N - trunc_a), min(N, trunc_b) + 1):
            col = (N - n) * db + n
            for m in range(max(0, N - trunc_a), min(N, trunc_b) + 1):
                row = (N - m) * db + m
                if T == 1.0:
                    U[row, col] = 1.0 if m == n else 0.0
                elif T == 0.0:
                    U[row, col] = (-1.0) ** n if m == N - n else 0.0
                else:
                    U[row, col] = _bs_element(N, m, n, t, r)
    return TwoModeUnitary(U.astype(complex), (da, db), _clipped(trunc_a, trunc_b))


def _poly_power(c_a: complex, c_b: complex, k: int) -> np.ndarray:
    # coefficients of (c_a a^dag + c_b b^dag)^k indexed by the a^dag power
    return np.array([comb(k, i) * c_a**i * c_b ** (k - i) for i in range(k + 1)], dtype=complex)


def lift_two_mode_linear(U2, trunc_a: int, trunc_b: int) -> TwoModeUnitary:
    """Fock-space lift of a 2x2 passive mode transformation.

    Creation operators map as ``a^dag -> U2[0,0] a^dag + U2[1,0] b^dag`` and
    ``b^dag -> U2[0,1] a^dag + U2[1,1] b^dag``; each number state is expanded
    binomially.
    """
    U2 = np.asarray(U2, dtype=complex)
    if U2.shape != (2, 2):
        raise ValueError("U2 must be 2x2")
    if np.abs(U2.conj().T @ U2 - np.eye(2)).max() > UNITARY_TOL:
        raise ValueError("U2 is not unitary")
    da, db = trunc_a + 1, trunc_b + 1
    out = np.zeros((da * db, da * db), dtype=complex)
    for p in range(da):
        for q in range(db):
            poly = np.convolve(_poly_power(U2[0, 0], U2[1, 0], p), _poly_power(U2[0, 1], U2[1, 1], q))
            N = p + q
            norm = 1.0 / sqrt(factorial(p) * factorial(q))
            for i, c in enumerate(poly):
                j = N - i
                if i < da and j < db:
                    out[i * db + j, p * db + q] = norm * c * sqrt(factorial(i) * factorial(j))
    return TwoModeUnitary(out, (da, db), _clipped(trunc_a, trunc_b))


def mode_selector_matrix(theta: float) -> np.ndarray:
    """Polarization mode selector ``[[cos 2th, sin 2th], [sin 2th, -cos 2th]]``."""
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    return np.array([[c, s], [s, -c]])


def mode_selector(theta: float, trunc_a: int, trunc_b: int) -> TwoModeUnitary:
    return lift_two_mode_linear(mode_selector_matrix(theta), trunc_a, trunc_b)


def phase_shift(phi: float, trunc: int) -> np.ndarray:
    return np.diag(np.exp(1j * phi * np.arange(trunc + 1)))


def _ladder(trunc: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, trunc + 1)), k=1)


def attenuator_kraus_single_mode(T: float, trunc: int) -> KrausSet:
    """Beamsplitter-with-vacuum attenuator ``W_l = r^l / sqrt(l!) t^n a^l``."""
    p = BeamsplitterParams(T)
    a = _ladder(trunc)
    t_n = np.diag(p.t ** np.arange(trunc + 1))
    ops = []
    a_l = np.eye(trunc + 1)
    for l in range(trunc + 1):
        ops.append(p.r**l / sqrt(factorial(l)) * t_n @ a_l)
        a_l = a_l @ a
    return KrausSet(ops)


def loss_kraus(tau: float, trunc: int) -> KrausSet:
    """Pure-loss channel ``A_l = p_l tau^(n/2) a^l``, ``p_l = sqrt((1-tau)^l / l!)``."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau {tau} outside [0, 1]")
    a = _ladder(trunc)
    tau_n = np.diag(tau ** (np.arange(trunc + 1) / 2))
    ops = []
    a_l = np.eye(trunc + 1)
    for l in range(trunc + 1):
        ops.append(sqrt((1 - tau) ** l / factorial(l)) * tau_n @ a_l)
        a_l = a_l @ a
    return KrausSet(ops)


def amplifier_kraus(G: float, trunc: int) -> KrausSet:
    """Quantum-limited amplifier ``B_k = q_k (a^dag)^k G^(-n/2)``.

    ``q_k = sqrt((1/k!) (1/G) ((G-1)/G)^k)``. Photons pushed above the
    truncation are dropped, so the set is trace non-increasing.
    """
    if G < 1:
        raise ValueError(f"gain {G} must be >= 1")
    adag = _ladder(trunc).T
    g_n = np.diag(G ** (-np.arange(trunc + 1) / 2))
    ops = []
    adag_k = np.eye(trunc + 1)
    for k in range(trunc + 1):
        q_k = sqrt(((G - 1) / G) ** k / (factorial(k) * G))
        ops.append(q_k * adag_k @ g_n)
        adag_k = adag_k @ adag
    return KrausSet(ops)


def amplifier_trace_deficit(G: float, trunc: int, n: int) -> float:
    """Trace lost by ``amplifier_kraus(G, trunc)`` on ``|n><n|``.

    Equals ``sum_{k > trunc-n} q_k^2 (n+k)!/n! G^(-n)``; evaluated as one
    minus the kept part so no infinite sum is needed.
    """
    kept = sum(((G - 1) / G) ** k / (factorial(k) * G) * factorial(n + k) / factorial(n) * G ** (-n)
               for k in range(trunc - n + 1))
    return 1.0 - kept


@dataclass(frozen=True)
class ThermalNoiseChannel:
    """Loss followed by amplification; apply ``stages`` in order."""

    params: NoiseChannelParams
    loss: KrausSet
    amplifier: KrausSet

    @property
    def stages(self) -> tuple:
        return (self.loss, self.amplifier)

    def composed(self) -> KrausSet:
        """All products ``B_k A_l`` as one Kraus set."""
        return KrausSet([b @ a for a in self.loss for b in self.amplifier])

    def is_identity(self) -> bool:
        return self.params.kappa == 1.0


def thermal_noise_channel(kappa: float, n_bar_B: float, trunc: int) -> ThermalNoiseChannel:
    params = NoiseChannelParams(kappa, n_bar_B)
    return ThermalNoiseChannel(params, loss_kraus(params.tau, trunc), amplifier_kraus(params.gain, trunc))
