"""Random-codebook encoder ensembles over binary memoryless sources.

An encoder realization is drawn in two seeded stages. First a codebook of
ceil(2**(n*rate)) words is sampled uniformly with replacement from the
typical set of the channel output letter (all words whose relative weight
is within eps of P(U=1), enumerated exactly through per-weight binomial
counts). Then every input word is mapped to a uniform choice among the
codewords jointly typical with it; when no codeword qualifies, a uniformly
seeded fallback codeword is used and counted.

All randomness is drawn from streams keyed by (seed, stream id, role,
sample index, input word), so realizations are reproducible regardless of
evaluation order or worker count. Experiments on top:

* concentration_experiment: spectrum mass of one output bit at low subset
  weights, excluding the bit's own dictator mask, across sample draws.
* discontinuity_experiment: Monte Carlo disagreement of an encoder pair
  under a coupled source sweep, against bound values from realized spectra.
* single_letter_marginal_check: how far the ensemble-averaged conditional
  law of one output bit given the full input word drifts from its law given
  the matching input coordinate alone.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .correlation import maximal_correlation
from .decomposition import DependencySpectrum, spectrum
from .model import (
    BooleanFunction,
    DomainError,
    Marginal,
    PairSource,
    SizeLimitError,
    mask_weights,
    product_weights,
)

MATERIALIZE_LIMIT_N = 16
NORMAL_Z = 1.96

_STREAM_CODEBOOK = 0
_STREAM_ASSIGN = 1
_STREAM_MC = 2


def _rng(seed: int, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def bsc_channel(flip: float) -> np.ndarray:
    """Binary symmetric test channel: P(U != X) = flip."""
    if not 0.0 <= flip <= 1.0:
        raise DomainError("flip probability must lie in [0, 1]")
    return np.array([[1.0 - flip, flip], [flip, 1.0 - flip]])


@dataclass(frozen=True)
class EnsembleConfig:
    """Parameters of the encoder ensemble (binary alphabets throughout)."""

    n: int
    rate: float
    source_bias: float
    channel: np.ndarray  # channel[x, u] = P(U=u | X=x)
    eps_typ: float | None
    seed: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError("blocklength n must be a positive integer")
        if not 0.0 < self.rate <= 1.0:
            raise DomainError("rate must lie in (0, 1]")
        if not 0.0 < self.source_bias < 1.0:
            raise DomainError("source bias must lie strictly inside (0, 1)")
        ch = np.asarray(self.channel, dtype=np.float64)
        if ch.shape != (2, 2) or np.any(ch < 0) or np.any(np.abs(ch.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("channel must be a 2x2 row-stochastic matrix")
        ch.flags.writeable = False
        object.__setattr__(self, "channel", ch)
        if self.eps_typ is not None and not 0.0 < self.eps_typ < 0.5:
            raise DomainError("typicality eps must lie in (0, 1/2)")
        if not isinstance(self.seed, int):
            raise DomainError("seed must be an integer")

    @property
    def resolved_eps(self) -> float:
        if self.eps_typ is not None:
            return self.eps_typ
        return 0.1 if self.n <= 10 else 0.05

    @property
    def letter_one_prob(self) -> float:
        q = self.source_bias
        return float((1.0 - q) * self.channel[0, 1] + q * self.channel[1, 1])

    @property
    def joint_xu(self) -> np.ndarray:
        q = self.source_bias
        return np.array([(1.0 - q) * self.channel[0], q * self.channel[1]])

    @property
    def codeword_count(self) -> int:
        v = 2.0 ** (self.n * self.rate)
        r = round(v)
        # guard float noise right at integer rates
        return int(r) if abs(v - r) < 1e-9 * max(r, 1) else int(math.ceil(v))


def typical_weights(n: int, p_one: float, eps: float) -> list:
    """Hamming weights w with |w/n - p_one| < eps."""
    return [w for w in range(n + 1) if abs(w - n * p_one) < n * eps]


def typical_set_size(n: int, p_one: float, eps: float) -> int:
    return sum(math.comb(n, w) for w in typical_weights(n, p_one, eps))


@dataclass(frozen=True)
class Codebook:
    n: int
    words: np.ndarray  # int64 bit patterns, bit t = coordinate t

    @property
    def size(self) -> int:
        return int(self.words.size)

    def weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).astype(np.int64)


def sample_codebook(cfg: EnsembleConfig, sample_index: int = 0, role: int = 0) -> Codebook:
    """Draw ceil(2**(n*rate)) words uniformly with replacement from the typical set."""
    p1 = cfg.letter_one_prob
    eps = cfg.resolved_eps
    ws = typical_weights(cfg.n, p1, eps)
    if not ws:
        raise DomainError("typical set is empty at this eps; widen eps_typ")
    sizes = np.array([math.comb(cfg.n, w) for w in ws], dtype=np.float64)
    total = int(sizes.sum())
    m = cfg.codeword_count
    if m > total:
        raise DomainError(
            f"codebook needs {m} words but the typical set has only {total}; "
            "lower the rate or widen eps_typ"
        )
    g = _rng(cfg.seed, _STREAM_CODEBOOK, role, sample_index)
    # uniform over the set = weight class by its share, then a uniform
    # support of that size
    widx = g.choice(len(ws), size=m, p=sizes / sizes.sum())
    words = np.empty(m, dtype=np.int64)
    for j, wi in enumerate(widx):
        w = ws[int(wi)]
        if w == 0:
            words[j] = 0
            continue
        pos = g.choice(cfg.n, size=w, replace=False).astype(np.int64)
        words[j] = int(np.left_shift(np.int64(1), pos).sum())
    words.flags.writeable = False
    return Codebook(cfg.n, words)


def _typicality_box(cfg: EnsembleConfig):
    """Per-cell targets n*P_XU(a,b) and the slack n*eps for joint typicality."""
    return cfg.n * cfg.joint_xu, cfg.n * cfg.resolved_eps


def _candidate_matrix(
    words: np.ndarray, cw: np.ndarray, wu: np.ndarray, n: int, np_xu: np.ndarray, ne: float
) -> np.ndarray:
    """Boolean (len(words), len(cw)) matrix of joint typicality."""
    wx = np.bitwise_count(words).astype(np.int64)[:, None]
    n11 = np.bitwise_count(words[:, None] & cw[None, :]).astype(np.int64)
    n10 = wx - n11
    n01 = wu[None, :] - n11
    n00 = n - wx - wu[None, :] + n11
    return (
        (np.abs(n11 - np_xu[1, 1]) < ne)
        & (np.abs(n10 - np_xu[1, 0]) < ne)
        & (np.abs(n01 - np_xu[0, 1]) < ne)
        & (np.abs(n00 - np_xu[0, 0]) < ne)
    )


@dataclass
class EncoderRealization:
    """One sampled encoder: its codebook plus the word-to-codeword assignment.

    assignment holds codebook indices for every input word when materialized
    (n <= 16); above that, assignment_of computes entries lazily from the
    same keyed streams, so both modes agree word for word.
    """

    config: EnsembleConfig
    codebook: Codebook
    sample_index: int
    role: int
    assignment: np.ndarray | None
    fallback_count: int | None

    def assignment_of(self, t: int) -> int:
        if self.assignment is not None:
            return int(self.assignment[t])
        cfg = self.config
        cw = self.codebook.words
        np_xu, ne = _typicality_box(cfg)
        ok = _candidate_matrix(np.array([t], dtype=np.int64), cw, self.codebook.weights(),
                               cfg.n, np_xu, ne)[0]
        cand = np.flatnonzero(ok)
        g = _rng(cfg.seed, _STREAM_ASSIGN, self.role, self.sample_index, t)
        if cand.size:
            return int(cand[g.integers(cand.size)])
        return int(g.integers(self.codebook.size))

    def output_bit(self, k: int = 0) -> BooleanFunction:
        """Coordinate k of the assigned codeword, as a Boolean function of the input."""
        if self.assignment is None:
            raise SizeLimitError("output_bit needs a materialized assignment (n <= 16)")
        if not 0 <= k < self.config.n:
            raise DomainError(f"bit index {k} outside 0..{self.config.n - 1}")
        bits = (self.codebook.words[self.assignment] >> k) & 1
        return BooleanFunction(self.config.n, 2, bits.astype(np.uint8))


def sample_encoder(
    cfg: EnsembleConfig,
    sample_index: int = 0,
    role: int = 0,
    materialize: bool | None = None,
) -> EncoderRealization:
    """Draw one encoder realization from the ensemble."""
    cb = sample_codebook(cfg, sample_index, role)
    if materialize is None:
        materialize = cfg.n <= MATERIALIZE_LIMIT_N
    if not materialize:
        return EncoderRealization(cfg, cb, sample_index, role, None, None)
    if cfg.n > MATERIALIZE_LIMIT_N:
        raise SizeLimitError(f"materialized assignment supports n <= {MATERIALIZE_LIMIT_N}")
    n = cfg.n
    cw = cb.words
    wu = cb.weights()
    np_xu, ne = _typicality_box(cfg)
    size = 1 << n
    assignment = np.empty(size, dtype=np.int64)
    fallback = 0
    chunk = 1 << 12
    for start in range(0, size, chunk):
        words = np.arange(start, min(start + chunk, size), dtype=np.int64)
        ok = _candidate_matrix(words, cw, wu, n, np_xu, ne)
        for row, t in enumerate(words):
            cand = np.flatnonzero(ok[row])
            g = _rng(cfg.seed, _STREAM_ASSIGN, role, sample_index, int(t))
            if cand.size:
                assignment[t] = cand[g.integers(cand.size)]
            else:
                assignment[t] = g.integers(cw.size)
                fallback += 1
    assignment.flags.writeable = False
    return EncoderRealization(cfg, cb, sample_index, role, assignment, fallback)


def encoder_bit_spectrum(enc: EncoderRealization, k: int = 0) -> DependencySpectrum:
    """Dependency spectrum of output bit k under the Bernoulli source."""
    return spectrum(enc.output_bit(k), Marginal.bernoulli(enc.config.source_bias))


def _run_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class ConcentrationResult:
    """Low-weight spectrum mass of one output bit across encoder samples."""

    n: int
    m: int
    k: int
    samples: int
    low_weight_mass: np.ndarray  # per sample: mass at weight <= m, dictator excluded
    dictator_mass: np.ndarray
    total_mass: np.ndarray
    fallback_counts: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.low_weight_mass.mean())

    @property
    def std_err(self) -> float:
        if self.samples < 2:
            return 0.0
        return float(self.low_weight_mass.std(ddof=1) / math.sqrt(self.samples))

    def quantiles(self, qs=(0.1, 0.5, 0.9)) -> dict:
        return {float(q): float(np.quantile(self.low_weight_mass, q)) for q in qs}


def concentration_experiment(
    cfg: EnsembleConfig, m: int = 2, samples: int = 50, k: int = 0, threads: int = 1
) -> ConcentrationResult:
    """Sample encoders and collect the mass their bit-k spectra place on
    subsets of at most m coordinates other than coordinate k itself."""
    if not 1 <= m <= cfg.n:
        raise DomainError("weight cutoff m must lie in 1..n")
    weights = mask_weights(cfg.n)
    select = weights <= m
    select[1 << k] = False

    def one(i):
        enc = sample_encoder(cfg, i)
        sp = encoder_bit_spectrum(enc, k)
        return (
            float(sp.by_mask[select].sum()),
            float(sp.by_mask[1 << k]),
            float(sp.by_mask.sum()),
            enc.fallback_count,
        )

    rows = _run_ordered(one, range(samples), threads)
    low, dic, tot, fb = (np.array(col) for col in zip(*rows))
    return ConcentrationResult(cfg.n, m, k, samples, low, dic, tot, fb.astype(np.int64))


@dataclass(frozen=True)
class DisagreementSample:
    """One encoder pair at one coupling: estimate and realized bound values."""

    eps: float
    sample_index: int
    estimate: float
    half_width: float
    bound_dictator: float  # 2 sqrt(P Q) - 2 (1-2eps) sqrt(P_i1 Q_i1)
    bound_full: float  # 2 sqrt(P Q) - 2 sum_i psi**w(i) sqrt(P_i Q_i)
    total_p: float
    total_q: float
    dictator_p: float
    dictator_q: float
    fallback_first: int
    fallback_second: int


@dataclass(frozen=True)
class DiscontinuityReport:
    config: EnsembleConfig
    mode: str
    samples: int
    draws: int
    eps_grid: tuple
    records: tuple

    def per_eps(self) -> list:
        out = []
        for eps in self.eps_grid:
            rows = [r for r in self.records if r.eps == eps]
            out.append(
                {
                    "eps": float(eps),
                    "mean_estimate": float(np.mean([r.estimate for r in rows])),
                    "mean_bound_dictator": float(np.mean([r.bound_dictator for r in rows])),
                    "mean_bound_full": float(np.mean([r.bound_full for r in rows])),
                }
            )
        return out


def _coupled_word_indices(g: np.random.Generator, joint: np.ndarray, n: int, draws: int):
    """Sample (x word index, y word index) pairs under the coordinate-wise joint."""
    cells = joint.reshape(-1)
    cum = np.cumsum(cells)
    u = g.random((draws, n))
    cid = np.minimum(np.searchsorted(cum, u.ravel(), side="right").reshape(draws, n), 3)
    powers = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    tx = ((cid >> 1) * powers).sum(axis=1)
    ty = ((cid & 1) * powers).sum(axis=1)
    return tx, ty


def discontinuity_experiment(
    cfg: EnsembleConfig,
    eps_grid: Sequence[float],
    mode: str = "shared",
    samples: int = 5,
    draws: int = 100_000,
    k: int = 0,
    threads: int = 1,
) -> DiscontinuityReport:
    """Disagreement of encoder-pair output bits under a coupling sweep.

    mode "shared" evaluates one realization against itself; "independent"
    draws the partner from its own streams. Per record, the estimate comes
    from `draws` Monte Carlo pairs and the two bound values are evaluated
    at the spectra of the realized bits: one keeping only the dictator
    cross term with coefficient 1-2*eps, one keeping every cross term with
    coefficients psi**weight.
    """
    if mode not in ("shared", "independent"):
        raise DomainError("mode must be 'shared' or 'independent'")
    if min(eps_grid) < 0 or 2.0 * max(eps_grid) > 1.0 + 1e-12:
        raise DomainError("couplings need eps in [0, 1/2] at uniform bias")
    q = cfg.source_bias

    def one(job):
        j, i = job
        eps = float(eps_grid[j])
        pair = PairSource.symmetric_binary(q, eps, cfg.n)
        enc_e = sample_encoder(cfg, i, role=0)
        enc_f = enc_e if mode == "shared" else sample_encoder(cfg, i, role=1)
        bit_e = enc_e.output_bit(k)
        bit_f = enc_f.output_bit(k)
        sp_e = spectrum(bit_e, Marginal.bernoulli(q))
        sp_f = spectrum(bit_f, Marginal.bernoulli(q))
        tot_p, tot_q = float(sp_e.by_mask.sum()), float(sp_f.by_mask.sum())
        dic_p, dic_q = float(sp_e.by_mask[1 << k]), float(sp_f.by_mask[1 << k])
        root = 2.0 * math.sqrt(tot_p * tot_q)
        bound_dic = root - 2.0 * (1.0 - 2.0 * eps) * math.sqrt(dic_p * dic_q)
        psi = maximal_correlation(PairSource.symmetric_binary(q, eps, 1)).value
        coeff = np.power(psi, mask_weights(cfg.n).astype(np.float64))
        bound_full = root - 2.0 * float(coeff @ np.sqrt(sp_e.by_mask * sp_f.by_mask))
        g = _rng(cfg.seed, _STREAM_MC, j, i)
        tx, ty = _coupled_word_indices(g, pair.joint, cfg.n, draws)
        est = float(np.mean(bit_e.table[tx] != bit_f.table[ty]))
        half = NORMAL_Z * math.sqrt(est * (1.0 - est) / draws)
        return DisagreementSample(
            eps=eps,
            sample_index=i,
            estimate=est,
            half_width=half,
            bound_dictator=float(bound_dic),
            bound_full=float(bound_full),
            total_p=tot_p,
            total_q=tot_q,
            dictator_p=dic_p,
            dictator_q=dic_q,
            fallback_first=int(enc_e.fallback_count),
            fallback_second=int(enc_f.fallback_count),
        )

    jobs = [(j, i) for j in range(len(eps_grid)) for i in range(samples)]
    records = tuple(_run_ordered(one, jobs, threads))
    return DiscontinuityReport(cfg, mode, samples, draws, tuple(float(e) for e in eps_grid), records)


@dataclass(frozen=True)
class MarginalCheckResult:
    """Largest gap between the ensemble law of bit k given the full input
    word and its law given coordinate k alone."""

    n: int
    k: int
    samples: int
    max_deviation: float
    conditional_given_letter: tuple  # P(bit=1 | x_k = 0), P(bit=1 | x_k = 1)


def single_letter_marginal_check(
    cfg: EnsembleConfig, samples: int = 200, k: int = 0, threads: int = 1
) -> MarginalCheckResult:
    if cfg.n > MATERIALIZE_LIMIT_N:
        raise SizeLimitError("marginal check needs materialized assignments (n <= 16)")

    def one(i):
        return sample_encoder(cfg, i).output_bit(k).table.astype(np.float64)

    tables = _run_ordered(one, range(samples), threads)
    phat = np.sum(tables, axis=0) / samples
    w = product_weights(Marginal.bernoulli(cfg.source_bias), cfg.n)
    idx = np.arange(1 << cfg.n)
    letter = (idx >> k) & 1
    cond = np.empty(2)
    for v in (0, 1):
        sel = letter == v
        cond[v] = float(w[sel] @ phat[sel] / w[sel].sum())
    dev = float(np.max(np.abs(phat - cond[letter])))
    return MarginalCheckResult(cfg.n, k, samples, dev, (float(cond[0]), float(cond[1])))
