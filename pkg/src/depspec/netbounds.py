"""Closed-form entropy bounds for two coded q-ary network settings.

All logarithms are base 2, so bounds are in bits. `avg_agreement` is the
blockwise average probability that the two relevant encodings agree per
letter, written p_bar below.
"""

from __future__ import annotations

import math

import numpy as np

from .model import DomainError


def entropy_bits(probs) -> float:
    """Shannon entropy of a finite distribution, in bits. Zeros contribute 0."""
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("entropy needs a probability vector")
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError("binary entropy argument must lie in [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def _check_pbar_q(avg_agreement: float, q: int):
    if not 0.0 <= avg_agreement <= 1.0:
        raise DomainError("avg_agreement must lie in [0, 1]")
    if not (isinstance(q, int) and q >= 2):
        raise DomainError("alphabet size q must be an integer >= 2")


def noise_entropy_bits(q: int, delta: float) -> float:
    """Entropy of the q-ary symmetric noise letter: stays put with 1-delta,
    otherwise uniform over the q-1 other symbols."""
    _check_pbar_q(1.0, q)
    if not 0.0 <= delta <= (q - 1) / q:
        raise DomainError("delta must lie in [0, (q-1)/q]")
    return binary_entropy(delta) + delta * math.log2(q - 1)


def ic_hz_bound(avg_agreement: float, q: int) -> float:
    """Interference-channel side entropy bound: p_bar * log2(q) + 1."""
    _check_pbar_q(avg_agreement, q)
    return avg_agreement * math.log2(q) + 1.0


def mac_hx_bound(avg_agreement: float, q: int, delta: float) -> float:
    """Multiple-access source entropy bound:
    p_bar * (log2(q) - H(noise)) + 1."""
    _check_pbar_q(avg_agreement, q)
    return avg_agreement * (math.log2(q) - noise_entropy_bits(q, delta)) + 1.0


def mac_single_user_rate(q: int, delta: float) -> float:
    """Single-user rate benchmark for the q-ary noisy adder setting.

    Difference of two q-point entropies; equals 1 - h(delta) at q = 2 and
    decreases to 0 as delta reaches (q-1)/q.
    """
    _check_pbar_q(1.0, q)
    if not 0.0 <= delta <= (q - 1) / q:
        raise DomainError("delta must lie in [0, (q-1)/q]")
    tail = delta / (q - 1)
    head = 0.5 * (1.0 - (q - 2) * tail)
    first = [head, head] + [tail] * (q - 2)
    second = [1.0 - delta] + [tail] * (q - 1)
    return entropy_bits(first) - entropy_bits(second)


def suboptimality_gap(target_bits: float, bound_bits: float) -> float:
    """How far a required entropy target exceeds an achievable bound; floored at 0."""
    if not (math.isfinite(target_bits) and math.isfinite(bound_bits)):
        raise DomainError("gap arguments must be finite")
    return max(0.0, target_bits - bound_bits)
