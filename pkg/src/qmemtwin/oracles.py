"""Closed-form reference results for memory-in-one-arm interferometry.

These are independent of the numerical Fock pipeline and serve as its
test oracles. Notation: ``alpha`` is the coherent amplitude in each MZI
arm, ``r`` the effective amplitude transmission of the memory
(``r**2`` is the internal efficiency), ``tau`` and ``G`` the loss and gain
of the late-bin noise channel, and ``beta = sqrt(tau) * r * alpha`` the
amplitude entering the amplifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .polynomials import scaled_laguerre_sequence

SERIES_RTOL = 1e-12
SERIES_MAX_TERMS = 10_000


@dataclass(frozen=True)
class MziParams:
    alpha: complex = 0.0
    r: float = 1.0
    tau: float = 1.0
    G: float = 1.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")
        if self.G < 1:
            raise ValueError("G must be >= 1")

    @property
    def beta(self) -> complex:
        return math.sqrt(self.tau) * self.r * self.alpha

    @classmethod
    def from_memory(cls, mem, alpha: complex = 0.0, phi: float = 0.0) -> "MziParams":
        """Effective parameters of a configured memory's late-bin channel."""
        noise = mem.late_noise_params
        return cls(alpha=alpha, r=math.sqrt(mem.eta_int), tau=noise.tau, G=noise.gain, phi=phi)


def _series(beta: complex, G: float, order: int, weight, n_terms: int | None):
    """Sum ``weight(n) * y^n L_n^{(order)}(|beta|^2/(1-G))`` adaptively."""
    if G < 1:
        raise ValueError("the amplifier series needs G >= 1")
    b2 = abs(beta) ** 2
    y, s = (G - 1) / G, b2 / G
    cap = n_terms if n_terms is not None else SERIES_MAX_TERMS
    # scaled recurrence in chunks so adaptive stopping does not recompute from zero
    total = 0.0
    chunk = 64
    seq = scaled_laguerre_sequence(min(chunk, cap), order, y, s)
    n = 0
    while n < cap:
        if n >= len(seq):
            seq = scaled_laguerre_sequence(min(len(seq) * 2, cap), order, y, s)
        term = weight(n) * seq[n]
        total += term
        n += 1
        if n_terms is None and n > 2 and total != 0 and abs(term) < 1e-3 * SERIES_RTOL * abs(total):
            # the geometric tail is comparable to the last term, hence the margin
            break
        if n_terms is None and n > 2 and total == 0 and b2 == 0 and y == 0:
            break
    return total


def coherent_gamma(beta: complex, G: float, n_terms: int | None = None) -> float:
    """Mean photon number of ``|beta>`` after the quantum-limited amplifier."""
    if G == 1:
        return abs(beta) ** 2
    total = _series(beta, G, 0, lambda n: n, n_terms)
    return math.exp(-abs(beta) ** 2) / G * total


def coherent_xi(beta: complex, G: float, n_terms: int | None = None) -> complex:
    """``sum_n sqrt(n+1) rho_{n,n+1}`` of the amplified coherent state (i.e. ``<a^dag>``)."""
    if G == 1:
        return complex(beta).conjugate()
    total = _series(beta, G, 1, lambda n: 1.0, n_terms)
    return math.exp(-abs(beta) ** 2) / G * G ** -0.5 * complex(beta).conjugate() * total


def amplified_coherent_element(n: int, m: int, beta: complex, G: float) -> complex:
    """Matrix element ``<n| rho |n+m>`` of ``|beta>`` after the amplifier."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be non-negative")
    if G < 1:
        raise ValueError("G must be >= 1")
    b2 = abs(beta) ** 2
    ell = scaled_laguerre_sequence(n, m, (G - 1) / G, b2 / G)[n]
    ratio = math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(n + m + 1)))
    return math.exp(-b2) / G * ratio * (G ** -0.5 * complex(beta).conjugate()) ** m * ell


def coherent_fringe(p: MziParams) -> float:
    """Mean photon number in output A for coherent amplitude ``alpha`` per arm."""
    gamma = coherent_gamma(p.beta, p.G)
    xi = coherent_xi(p.beta, p.G)
    cross = 2 * (p.alpha * complex(math.cos(p.phi), math.sin(p.phi)) * xi).real
    return 0.5 * (gamma + abs(p.alpha) ** 2 - cross)


def coherent_visibility(p: MziParams) -> float:
    gamma = coherent_gamma(p.beta, p.G)
    xi = coherent_xi(p.beta, p.G)
    return 2 * abs(p.alpha) * abs(xi) / (gamma + abs(p.alpha) ** 2)


def single_photon_fringe(p: MziParams) -> float:
    """Mean photon number in output A for a single photon split across both arms."""
    amp = p.r * math.sqrt(p.tau * p.G)
    return p.G / 2 * (1 + p.tau * p.r**2 / 2) - 0.25 - amp / 2 * math.cos(p.phi)


def single_photon_visibility(p: MziParams) -> float:
    amp = p.r * math.sqrt(p.tau * p.G)
    return amp / (p.G * (1 + p.tau * p.r**2 / 2) - 0.5)


def single_photon_arm_mean(p: MziParams) -> float:
    """Mean photon number of the memory arm with the recombining beamsplitter removed."""
    return p.G * (1 + p.tau * p.r**2 / 2) - 1
