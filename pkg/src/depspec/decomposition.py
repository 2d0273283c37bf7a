"""Orthogonal decomposition of Boolean functions of memoryless sources.

A function e over words of length n is first centered into a real table
with mean zero under the product source (the "real transform"). That table
splits uniquely into orthogonal components, one per subset mask i of the
coordinates, through the recursion

    e_i = E[e | X_i] - sum over strict submasks j of i of e_j,

where X_i is the subword of coordinates in i. The variances P_i of these
components form the dependency spectrum: they are nonnegative and add up
to the total variance s(1-s), where s is the probability that e outputs 1.

The spectrum is computed without materializing components, by taking the
second moments M_i = E[(E[e|X_i])^2] for all masks and then removing
submask sums with a fast subset Moebius pass, since M_i equals the sum of
P_j over all j contained in i.

For binary alphabets a second, independent route expands the table in the
product of per-coordinate bases {1, h} with h(1) = 1-q and h(0) = -q under
bias q = P(X=1). A coordinate-wise butterfly yields the coefficients c_i,
and P_i = c_i^2 * (q(1-q))**weight(i). Both routes must agree; tests hold
them to 1e-9.

All functions are pure; sharing inputs across threads is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    MAX_EXACT_N,
    MAX_FAST_BINARY_N,
    AlphabetError,
    BooleanFunction,
    DomainError,
    Marginal,
    SubsetMask,
    check_exact_size,
    iter_submask_bits,
    mask_bits,
    mask_weights,
    product_weights,
)

# Variance estimates this far below zero indicate a real defect, not roundoff.
NEGATIVE_VARIANCE_LIMIT = -1e-9

# Cap on the (d+1)**n work array of the batched moment pass; larger blocks
# recurse coordinate by coordinate first.
_BATCH_ELEMENT_LIMIT = 1 << 23


@dataclass(frozen=True)
class RealTransform:
    """Centered real table of a Boolean function: 1-s on the support, -s off it."""

    n: int
    d: int
    values: np.ndarray
    one_prob: float

    @property
    def total_variance(self) -> float:
        return self.one_prob * (1.0 - self.one_prob)


@dataclass(frozen=True)
class ComponentTable:
    """One orthogonal component, tabulated over all d**n words."""

    mask: SubsetMask
    n: int
    d: int
    values: np.ndarray


@dataclass(frozen=True)
class DependencySpectrum:
    """Per-mask component variances P_i, indexed by mask bits."""

    n: int
    by_mask: np.ndarray
    total: float

    def mass(self, mask) -> float:
        return float(self.by_mask[mask_bits(mask)])

    def as_dict(self) -> dict:
        return {int(i): float(v) for i, v in enumerate(self.by_mask)}

    def weight_profile(self) -> np.ndarray:
        """Total mass at each subset weight 0..n."""
        w = mask_weights(self.n)
        out = np.zeros(self.n + 1)
        np.add.at(out, w, self.by_mask)
        return out


@dataclass(frozen=True)
class BiasedBasis:
    """Orthogonal single-letter basis h_1..h_{d-1}, all with mean zero and
    second moment q(1-q) under the marginal, where q = P(X != 0)."""

    d: int
    vectors: np.ndarray  # shape (d-1, d); vectors[l-1][x] = h_l(x)
    moment: float


def real_transform(f: BooleanFunction, source: Marginal) -> RealTransform:
    """Center the truth table to mean zero under the product source."""
    if f.d != source.d:
        raise DomainError(f"function alphabet {f.d} != marginal alphabet {source.d}")
    check_exact_size(f.n, MAX_EXACT_N, "real_transform")
    w = product_weights(source, f.n)
    s = float(w @ f.table)
    values = np.where(f.table == 1, 1.0 - s, -s)
    return RealTransform(f.n, f.d, values, s)


def _cond_mean_keepdims(arr: np.ndarray, probs: np.ndarray, bits: int, n: int) -> np.ndarray:
    """E[arr | coordinates in bits], as a tensor with size-1 axes elsewhere.

    arr has shape (d,)*n with axis k = coordinate k.
    """
    out = arr
    for k in range(n):
        if not (bits >> k) & 1:
            shape = [1] * n
            shape[k] = -1
            out = (out * probs.reshape(shape)).sum(axis=k, keepdims=True)
    return out


def _null_subword_mask(probs: np.ndarray, bits: int, n: int) -> np.ndarray | None:
    """Broadcastable 0/1 tensor that is 0 wherever an in-mask coordinate has
    zero marginal probability. None when the marginal has full support."""
    if not np.any(probs == 0):
        return None
    keep = np.ones((1,) * n)
    ind = (probs > 0).astype(float)
    for k in range(n):
        if (bits >> k) & 1:
            shape = [1] * n
            shape[k] = -1
            keep = keep * ind.reshape(shape)
    return keep


def _component_tensors(rt: RealTransform, source: Marginal, top_bits: int) -> dict:
    """Compact component tensors for every submask of top_bits.

    Each entry has shape d on in-mask axes and 1 elsewhere, so memory totals
    (d+1)**weight(top) rather than 2**weight(top) * d**n.
    """
    n, d = rt.n, rt.d
    arr = rt.values.reshape((d,) * n, order="F")
    probs = source.probs
    comp: dict = {}
    for j in iter_submask_bits(top_bits):  # increasing order: submasks come first
        cm = _cond_mean_keepdims(arr, probs, j, n)
        keep = _null_subword_mask(probs, j, n)
        if keep is not None:
            # Conditioning on a zero-probability subword is defined as 0.
            cm = cm * keep
        acc = cm
        for l in iter_submask_bits(j):
            if l != j:
                acc = acc - comp[l]
        comp[j] = acc
    return comp


def component(f: RealTransform, i, source: Marginal) -> ComponentTable:
    """The orthogonal component of the transform belonging to coordinate set i."""
    if f.d != source.d:
        raise DomainError("transform and marginal alphabets differ")
    bits = mask_bits(i)
    if bits >= (1 << f.n):
        raise DomainError(f"mask {bits:#x} has bits outside the {f.n} coordinates")
    check_exact_size(f.n, MAX_EXACT_N, "component")
    comp = _component_tensors(f, source, bits)
    full = np.broadcast_to(comp[bits], (f.d,) * f.n)
    return ComponentTable(SubsetMask(bits), f.n, f.d, np.ravel(full, order="F"))


def all_components(f: RealTransform, source: Marginal) -> dict:
    """ComponentTable for every mask; the reconstruction sum of their values
    returns the transform pointwise (off zero-probability words)."""
    comp = _component_tensors(f, source, (1 << f.n) - 1)
    out = {}
    for bits, tensor in comp.items():
        full = np.broadcast_to(tensor, (f.d,) * f.n)
        out[bits] = ComponentTable(SubsetMask(bits), f.n, f.d, np.ravel(full, order="F"))
    return out


def _masked_second_moments_batched(values: np.ndarray, probs: np.ndarray, n: int) -> np.ndarray:
    """M[mask] = E[(E[values | X_mask])^2] for all 2**n masks at once.

    Peels one coordinate per level, stacking the marginalized row above the d
    conditioned rows, so the final work array holds every conditioning
    pattern in {avg, x=0, .., x=d-1}**n. Squaring and contracting each
    pattern axis with (1 | probs) yields the probability-weighted moments.
    """
    d = probs.size
    if n == 0:
        return np.array([float(values[0]) ** 2])
    work = values.reshape(1, -1)
    for _ in range(n):
        r, m = work.shape
        blk = work.reshape(r, d, m // d)
        marg = np.einsum("rdm,d->rm", blk, probs)
        work = np.concatenate([marg[:, None, :], blk], axis=1).reshape(r * (d + 1), m // d)
    pat = (work.reshape(-1) ** 2).reshape((d + 1,) * n)
    lin = np.zeros((2, d + 1))
    lin[0, 0] = 1.0
    lin[1, 1:] = probs
    t = pat
    for ax in range(n):
        t = np.moveaxis(np.moveaxis(t, ax, -1) @ lin.T, -1, ax)
    # Axis j of the pattern tensor is coordinate n-1-j, so the flat C-order
    # index is exactly the mask integer with bit k = coordinate k.
    return t.reshape(-1)


def _masked_second_moments(values: np.ndarray, probs: np.ndarray, n: int) -> np.ndarray:
    d = probs.size
    if (d + 1) ** n <= _BATCH_ELEMENT_LIMIT:
        return _masked_second_moments_batched(values, probs, n)
    blk = values.reshape(d, -1)
    low = _masked_second_moments(probs @ blk, probs, n - 1)
    high = probs[0] * _masked_second_moments(blk[0], probs, n - 1)
    for a in range(1, d):
        high += probs[a] * _masked_second_moments(blk[a], probs, n - 1)
    return np.concatenate([low, high])


def _subtract_submask_sums(m: np.ndarray, n: int) -> np.ndarray:
    """Invert M_i = sum_{j <= i} P_j in place-order over the subset lattice."""
    out = m.copy()
    idx = np.arange(out.size)
    for k in range(n):
        has = (idx & (1 << k)) != 0
        out[has] -= out[~has]
    return out


def _finish_spectrum(n: int, raw: np.ndarray, total: float) -> DependencySpectrum:
    low = float(raw.min())
    if low < NEGATIVE_VARIANCE_LIMIT:
        raise ArithmeticError(
            f"component variance {low} below {NEGATIVE_VARIANCE_LIMIT}; "
            "spectrum computation is inconsistent"
        )
    clean = np.clip(raw, 0.0, None)
    clean.flags.writeable = False
    return DependencySpectrum(n, clean, total)


def spectrum(f: BooleanFunction, source: Marginal) -> DependencySpectrum:
    """Dependency spectrum over all 2**n masks via conditional second moments."""
    rt = real_transform(f, source)
    m = _masked_second_moments(rt.values, source.probs, f.n)
    raw = _subtract_submask_sums(m, f.n)
    return _finish_spectrum(f.n, raw, rt.total_variance)


def spectrum_fast_binary(f: BooleanFunction, q: float) -> DependencySpectrum:
    """Binary-alphabet spectrum via the coordinate-wise basis butterfly.

    Independent of spectrum(): expands the centered table in the product
    basis with h(1) = 1-q, h(0) = -q per coordinate, then squares and
    scales coefficients by (q(1-q))**weight.
    """
    if f.d != 2:
        raise AlphabetError("fast path requires a binary alphabet")
    if not 0.0 <= q <= 1.0:
        raise DomainError("bias must lie in [0, 1]")
    check_exact_size(f.n, MAX_FAST_BINARY_N, "spectrum_fast_binary")
    source = Marginal.bernoulli(q)
    w = product_weights(source, f.n)
    s = float(w @ f.table)
    arr = np.where(f.table == 1, 1.0 - s, -s).reshape((2,) * f.n, order="F")
    for k in range(f.n):
        sl0 = (slice(None),) * k + (0,)
        sl1 = (slice(None),) * k + (1,)
        a0 = arr[sl0].copy()
        a1 = arr[sl1]
        arr[sl0] = (1.0 - q) * a0 + q * a1
        arr[sl1] = a1 - a0
    coeff = np.ravel(arr, order="F")
    scale = (q * (1.0 - q)) ** mask_weights(f.n)
    return _finish_spectrum(f.n, coeff**2 * scale, s * (1.0 - s))


def k_letter_profile(spec: DependencySpectrum) -> list:
    """(weight, mass) pairs: total spectrum mass carried by k-coordinate sets."""
    return [(k, float(v)) for k, v in enumerate(spec.weight_profile())]


def biased_basis(source: Marginal) -> BiasedBasis:
    """Gram-Schmidt the centered symbol indicators 1{X=l} - P(l), l = 1..d-1,
    under the marginal, rescaling every vector to second moment q(1-q)."""
    p = source.probs
    if np.any(p <= 0):
        raise DomainError("biased basis requires a full-support marginal")
    d = source.d
    q = 1.0 - float(p[0])
    moment = q * (1.0 - q)
    vecs = []
    for l in range(1, d):
        v = -p[l] * np.ones(d)
        v[l] += 1.0
        for u in vecs:
            v = v - (np.sum(p * v * u) / np.sum(p * u * u)) * u
        norm2 = float(np.sum(p * v * v))
        v = v * np.sqrt(moment / norm2)
        vecs.append(v)
    mat = np.array(vecs)
    mat.flags.writeable = False
    return BiasedBasis(d, mat, moment)
