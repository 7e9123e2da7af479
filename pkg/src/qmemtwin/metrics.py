"""Scalar figures of merit: SNR, noise figure, visibility and token correctness."""

from __future__ import annotations

import math
from dataclasses import dataclass

# returned by snr() when no noise photons are present
INFINITE_SNR = math.inf


@dataclass(frozen=True)
class CountRecord:
    """Mean counts in a retrieval window.

    Attributes:
        n_exp: Total counts, signal plus noise.
        n_noise: Counts with no input.
        n_in: Input photons referred to the detection setup.
    """

    n_exp: float
    n_noise: float
    n_in: float = 1.0

    def __post_init__(self):
        if self.n_noise < 0:
            raise ValueError("n_noise must be non-negative")
        # allow round-off when the signal is zero
        if self.n_exp < self.n_noise - 1e-12 * max(1.0, self.n_noise):
            raise ValueError("n_exp must be at least n_noise")


def snr(rec: CountRecord) -> float:
    """``(n_exp - n_noise) / n_noise``; :data:`INFINITE_SNR` for zero noise."""
    if rec.n_noise == 0:
        return INFINITE_SNR
    return (rec.n_exp - rec.n_noise) / rec.n_noise


def mu1(rec: CountRecord, eta_int: float) -> float:
    """Unconditional noise figure ``n_noise / eta_int``."""
    if eta_int <= 0:
        raise ValueError("eta_int must be positive")
    return rec.n_noise / eta_int


def mu1_from_snr(rec: CountRecord) -> float:
    """The equivalent form ``n_in / SNR``; zero when the record is noiseless."""
    s = snr(rec)
    if math.isinf(s):
        return 0.0
    if s == 0:
        raise ValueError("SNR is zero; noise figure is unbounded")
    return rec.n_in / s


def visibility(n_max: float, n_min: float) -> float:
    if n_min < 0 or n_max < n_min:
        raise ValueError("need n_max >= n_min >= 0")
    if n_max == 0:
        raise ValueError("visibility undefined when both extremes are zero")
    return (n_max - n_min) / (n_max + n_min)


def fringe_visibility(values) -> float:
    """Visibility from the extremes of a sampled fringe."""
    values = list(values)
    return visibility(max(values), min(values))


def token_correctness(p0: float, p1: float) -> tuple:
    """Probabilities that only detector 0, respectively only detector 1, clicks.

    Both are conditioned on at least one click:
    ``c0 = p0 (1 - p1) / (1 - (1 - p0)(1 - p1))``.

    Args:
        p0: Click probability of detector 0 (or +).
        p1: Click probability of detector 1 (or -).

    Returns:
        ``(c0, c1)``.
    """
    for p in (p0, p1):
        if not 0 <= p <= 1:
            raise ValueError(f"probability {p} outside [0, 1]")
    any_click = p0 + p1 - p0 * p1
    if any_click == 0:
        raise ValueError("correctness undefined: no detector ever clicks")
    return min(1.0, p0 * (1 - p1) / any_click), min(1.0, p1 * (1 - p0) / any_click)
