"""Agreement bounds between Boolean functions of coupled memoryless sources.

Given e acting on X^n and f acting on Y^n, with (X_t, Y_t) drawn i.i.d.
from a fixed joint, the disagreement probability sigma = P(e != f) is
sandwiched by closed forms built from the two dependency spectra and the
maximal correlation of the letter pair:

    lower = 2 sqrt(P) sqrt(Q) - 2 sum_i C_i sqrt(P_i Q_i)
    upper = 1 - lower-style mirror

with C_i = psi**weight(i), P = sum P_i, Q = sum Q_i. A simplified lower
bound 2 sum_i (1 - C_i) sqrt(P_i Q_i) is also reported. For binary pairs
psi has a closed form in the marginals and the crossover; the spectral
route (singular values of the normalized joint) must agree with it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .decomposition import DependencySpectrum, spectrum
from .model import (
    BooleanFunction,
    DomainError,
    Marginal,
    PairSource,
    SizeLimitError,
    mask_weights,
)

PSI_CROSSCHECK_TOL = 1e-9
DEGENERATE_VARIANCE_TOL = 1e-15

# Exhaustive pair enumeration cap: (dx*dy)**n word pairs.
MAX_ENUM_PAIRS = 1 << 26


@dataclass(frozen=True)
class MaximalCorrelation:
    """Second singular value of joint(x,y)/sqrt(px(x) py(y)), in [0, 1]."""

    value: float
    method: str  # "spectral" or "binary-closed-form"


@dataclass(frozen=True)
class AgreementStats:
    """Exact joint outcome probabilities of a function pair.

    a = P(e=1, f=1), b = P(e=0, f=1), c = P(e=1, f=0), d = P(e=0, f=0).
    """

    a: float
    b: float
    c: float
    d: float

    @property
    def sigma(self) -> float:
        return self.b + self.c

    @property
    def s(self) -> float:
        return self.a + self.c

    @property
    def r(self) -> float:
        return self.a + self.b


@dataclass(frozen=True)
class CorrelationBoundReport:
    """Sandwich bounds on P(e != f), with raw (unclamped) values retained."""

    lower: float
    upper: float
    lower_simplified: float
    raw_lower: float
    raw_upper: float
    psi: MaximalCorrelation
    total_p: float
    total_q: float
    degenerate: bool
    exact_sigma: float | None
    coefficients: np.ndarray
    spectrum_p: DependencySpectrum
    spectrum_q: DependencySpectrum
    notes: tuple = field(default_factory=tuple)


def _binary_closed_form(p: float, q: float, eps: float) -> float:
    return abs(p + q - 2.0 * p * q - eps) / (2.0 * np.sqrt(p * q * (1.0 - p) * (1.0 - q)))


def maximal_correlation(source: PairSource) -> MaximalCorrelation:
    """Maximal correlation of the letter pair.

    Zero-probability symbols are dropped before normalizing. If either
    variable is almost surely constant the correlation is 0 by convention
    (with a warning). Binary full-support pairs return the closed form,
    cross-checked against the spectral value.
    """
    joint = source.joint
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    sx = px > 0
    sy = py > 0
    if sx.sum() < 2 or sy.sum() < 2:
        warnings.warn("a deterministic variable has maximal correlation 0 by convention")
        return MaximalCorrelation(0.0, "spectral")
    sub = joint[np.ix_(sx, sy)]
    b = sub / np.sqrt(np.outer(px[sx], py[sy]))
    sv = np.linalg.svd(b, compute_uv=False)
    spectral = float(min(max(sv[1], 0.0), 1.0))
    if source.dx == 2 and source.dy == 2 and sx.all() and sy.all():
        closed = _binary_closed_form(float(px[1]), float(py[1]), source.crossover)
        if abs(closed - spectral) > PSI_CROSSCHECK_TOL:
            raise ArithmeticError(
                f"closed form {closed} and spectral value {spectral} disagree "
                f"beyond {PSI_CROSSCHECK_TOL}"
            )
        return MaximalCorrelation(float(min(closed, 1.0)), "binary-closed-form")
    return MaximalCorrelation(spectral, "spectral")


def bound_coefficients(source: PairSource, n: int | None = None) -> np.ndarray:
    """C_i = psi**weight(i) for every mask, with 0**0 = 1 so C of the empty set is 1."""
    n = source.n if n is None else n
    psi = maximal_correlation(source).value
    return np.power(psi, mask_weights(n).astype(np.float64))


def exact_agreement(e: BooleanFunction, f: BooleanFunction, source: PairSource) -> AgreementStats:
    """Exhaustive joint enumeration of (x^n, y^n) word pairs.

    Accumulates the four outcome cells by walking every x word and forming
    the joint weight vector over all y words with a product (kron) chain.
    """
    _check_pair(e, f, source)
    n = source.n
    if (source.dx * source.dy) ** n > MAX_ENUM_PAIRS:
        raise SizeLimitError(
            "pair enumeration infeasible at this size; estimate sigma by sampling "
            "(see the ensemble experiments)"
        )
    joint = source.joint
    ftab = f.table.astype(np.float64)
    etab = e.table
    dx = source.dx
    a = b = c = d = 0.0
    for tx in range(dx**n):
        w = np.ones(1)
        t = tx
        for _ in range(n):
            w = np.kron(joint[t % dx], w)
            t //= dx
        on = float(w @ ftab)
        block = float(w.sum())
        if etab[tx]:
            a += on
            c += block - on
        else:
            b += on
            d += block - on
    return AgreementStats(a, b, c, d)


def _check_pair(e: BooleanFunction, f: BooleanFunction, source: PairSource):
    if e.n != source.n or f.n != source.n:
        raise DomainError("function blocklengths must match the pair source")
    if e.d != source.dx:
        raise DomainError(f"first function alphabet {e.d} != source X alphabet {source.dx}")
    if f.d != source.dy:
        raise DomainError(f"second function alphabet {f.d} != source Y alphabet {source.dy}")


def disagreement_bounds(
    e: BooleanFunction,
    f: BooleanFunction,
    source: PairSource,
    exact: bool | None = None,
) -> CorrelationBoundReport:
    """Sandwich bounds on P(e(X^n) != f(Y^n)).

    exact=None fills exact_sigma whenever enumeration is feasible; True
    forces it (SizeLimitError otherwise); False skips it.
    """
    _check_pair(e, f, source)
    n = source.n
    spec_p = spectrum(e, source.marginal_x)
    spec_q = spectrum(f, source.marginal_y)
    mc = maximal_correlation(source)
    weights = mask_weights(n).astype(np.float64)
    coeff = np.power(mc.value, weights)
    geo = np.sqrt(spec_p.by_mask * spec_q.by_mask)
    cross = float(coeff @ geo)
    total_p = float(spec_p.by_mask.sum())
    total_q = float(spec_q.by_mask.sum())
    root = 2.0 * np.sqrt(total_p * total_q)
    raw_lower = root - 2.0 * cross
    raw_upper = 1.0 - root + 2.0 * cross
    lower_simplified = float(2.0 * ((1.0 - coeff) @ geo))

    notes = []
    degenerate = total_p <= DEGENERATE_VARIANCE_TOL or total_q <= DEGENERATE_VARIANCE_TOL
    if degenerate:
        notes.append("a constant function makes the sandwich trivial: lower 0, upper 1")
    if source.dx == 2 and source.dy == 2:
        try:
            if source.crossover > 0.5:
                notes.append(
                    "crossover above 1/2: coefficients use |1-2*crossover| via the "
                    "spectral value, which folds the sign"
                )
        except DomainError:
            pass

    exact_sigma = None
    if exact is None:
        if (source.dx * source.dy) ** n <= MAX_ENUM_PAIRS:
            exact_sigma = exact_agreement(e, f, source).sigma
    elif exact:
        exact_sigma = exact_agreement(e, f, source).sigma

    return CorrelationBoundReport(
        lower=float(min(max(raw_lower, 0.0), 1.0)),
        upper=float(min(max(raw_upper, 0.0), 1.0)),
        lower_simplified=lower_simplified,
        raw_lower=float(raw_lower),
        raw_upper=float(raw_upper),
        psi=mc,
        total_p=total_p,
        total_q=total_q,
        degenerate=degenerate,
        exact_sigma=exact_sigma,
        coefficients=coeff,
        spectrum_p=spec_p,
        spectrum_q=spec_q,
        notes=tuple(notes),
    )
