"""Shared domain objects: sources, Boolean functions, subset masks.

Conventions used across the package:

* Words of length n over an alphabet of size d are indexed little-endian:
  word index t encodes (x_0, ..., x_{n-1}) with t = sum_k x_k * d**k, so
  coordinate 0 varies fastest.
* Subset masks are n-bit integers; bit k corresponds to coordinate k.
* Truth tables are flat arrays of length d**n in word-index order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Exact-table ceilings. Beyond these the closed-form machinery would need
# more memory than a workstation has; callers get a SizeLimitError and
# should switch to sampling.
MAX_EXACT_N = 20
MAX_FAST_BINARY_N = 24

PROB_SUM_TOL = 1e-12

SCHEMA_VERSION = 1


class DomainError(ValueError):
    """Invalid input: bad probabilities, mismatched alphabets, malformed files."""


class AlphabetError(DomainError):
    """Operation requires a different alphabet size than the one supplied."""


class SizeLimitError(RuntimeError):
    """Instance too large for exact computation; use the sampling paths."""


def _as_prob_vector(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError(f"{what} must be a one-dimensional probability vector")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} entries must be finite and nonnegative")
    if abs(arr.sum() - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"{what} entries must sum to 1 within {PROB_SUM_TOL}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Marginal:
    """Distribution of a single source letter over symbols 0..d-1."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_prob_vector(self.probs, "marginal"))
        if self.probs.size < 2:
            raise DomainError("marginal needs at least two symbols")

    @property
    def d(self) -> int:
        return int(self.probs.size)

    @classmethod
    def uniform(cls, d: int) -> "Marginal":
        return cls(np.full(d, 1.0 / d))

    @classmethod
    def bernoulli(cls, q: float) -> "Marginal":
        """Binary marginal with P(X=1) = q."""
        if not 0.0 <= q <= 1.0:
            raise DomainError("bias must lie in [0, 1]")
        return cls(np.array([1.0 - q, q]))

    @classmethod
    def from_json(cls, obj) -> "Marginal":
        if not isinstance(obj, dict) or "probs" not in obj:
            raise DomainError('marginal JSON must be {"probs": [...]}')
        return cls(obj["probs"])

    def to_json(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "probs": [float(p) for p in self.probs]}


def product_prob(source: Marginal, word) -> float:
    """Probability of a word under the n-fold product of `source`."""
    p = 1.0
    for s in word:
        s = int(s)
        if not 0 <= s < source.d:
            raise DomainError(f"symbol {s} outside alphabet of size {source.d}")
        p *= source.probs[s]
    return float(p)


def product_weights(source: Marginal, n: int) -> np.ndarray:
    """Vector of all d**n word probabilities in word-index order."""
    w = np.ones(1)
    for _ in range(n):
        # kron puts the new coordinate in the most significant digit,
        # matching t = sum_k x_k * d**k built up from k = 0.
        w = np.kron(source.probs, w)
    return w


@dataclass(frozen=True)
class PairSource:
    """Joint distribution of one coupled letter pair (X, Y), used i.i.d. n times.

    joint[x, y] = P(X=x, Y=y); rows index X, columns index Y.
    """

    joint: np.ndarray
    n: int

    def __post_init__(self):
        arr = np.asarray(self.joint, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise DomainError("joint must be a 2-d matrix with both alphabets >= 2")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise DomainError("joint entries must be finite and nonnegative")
        if abs(arr.sum() - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"joint entries must sum to 1 within {PROB_SUM_TOL}")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError("blocklength n must be a positive integer")
        arr.flags.writeable = False
        object.__setattr__(self, "joint", arr)

    @property
    def dx(self) -> int:
        return int(self.joint.shape[0])

    @property
    def dy(self) -> int:
        return int(self.joint.shape[1])

    @property
    def marginal_x(self) -> Marginal:
        return Marginal(self.joint.sum(axis=1))

    @property
    def marginal_y(self) -> Marginal:
        return Marginal(self.joint.sum(axis=0))

    @property
    def crossover(self) -> float:
        """P(X != Y) for square alphabets."""
        if self.dx != self.dy:
            raise DomainError("crossover requires equal alphabets")
        return float(self.joint.sum() - np.trace(self.joint))

    @classmethod
    def symmetric_binary(cls, q: float, eps: float, n: int) -> "PairSource":
        """Binary pair with both marginals Bernoulli(q) and P(X != Y) = eps.

        Valid when eps/2 <= min(q, 1-q).
        """
        half = eps / 2.0
        j = np.array([[1.0 - q - half, half], [half, q - half]])
        if np.any(j < -PROB_SUM_TOL):
            raise DomainError("no symmetric coupling: eps/2 must not exceed min(q, 1-q)")
        return cls(np.clip(j, 0.0, None), n)

    @classmethod
    def dsbs(cls, eps: float, n: int) -> "PairSource":
        """Doubly symmetric binary source: uniform marginals, crossover eps."""
        return cls.symmetric_binary(0.5, eps, n)

    @classmethod
    def from_json(cls, obj) -> "PairSource":
        if not isinstance(obj, dict) or "joint" not in obj or "n" not in obj:
            raise DomainError('pair source JSON must be {"joint": [[...]], "n": int}')
        return cls(np.asarray(obj["joint"], dtype=np.float64), int(obj["n"]))

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "joint": [[float(v) for v in row] for row in self.joint],
            "n": self.n,
        }


def word_of_index(t: int, n: int, d: int) -> tuple:
    """Decode word index t into its n symbols (coordinate 0 first)."""
    return tuple((t // d**k) % d for k in range(n))


def index_of_word(word, d: int) -> int:
    return sum(int(s) * d**k for k, s in enumerate(word))


@dataclass(frozen=True)
class BooleanFunction:
    """A map from words of length n over symbols 0..d-1 into {0, 1}.

    `table[t]` is the output on the word with index t.
    """

    n: int
    d: int
    table: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError("n must be a positive integer")
        if not (isinstance(self.d, int) and self.d >= 2):
            raise DomainError("alphabet size d must be at least 2")
        tab = np.asarray(self.table)
        if tab.ndim != 1 or tab.size != self.d**self.n:
            raise DomainError(f"table must be flat with d**n = {self.d ** self.n} entries")
        if not np.all((tab == 0) | (tab == 1)):
            raise DomainError("table entries must be 0 or 1")
        tab = tab.astype(np.uint8)
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)

    @classmethod
    def from_callable(cls, n: int, d: int, fn) -> "BooleanFunction":
        tab = np.fromiter(
            (1 if fn(word_of_index(t, n, d)) else 0 for t in range(d**n)),
            dtype=np.uint8,
            count=d**n,
        )
        return cls(n, d, tab)

    @classmethod
    def dictator(cls, n: int, d: int = 2, k: int = 0) -> "BooleanFunction":
        """Indicator of coordinate k being nonzero."""
        return cls.from_callable(n, d, lambda w: w[k] != 0)

    @classmethod
    def parity(cls, n: int) -> "BooleanFunction":
        """XOR of all n binary coordinates."""
        return cls.from_callable(n, 2, lambda w: sum(w) % 2 == 1)

    def complement(self) -> "BooleanFunction":
        return BooleanFunction(self.n, self.d, 1 - self.table)

    @classmethod
    def from_json(cls, obj) -> "BooleanFunction":
        if (
            not isinstance(obj, dict)
            or not isinstance(obj.get("n"), int)
            or not isinstance(obj.get("d"), int)
            or not isinstance(obj.get("table"), str)
        ):
            raise DomainError('function JSON must be {"n": int, "d": int, "table": "010..."}')
        s = obj["table"]
        if set(s) - {"0", "1"}:
            raise DomainError("table string may contain only '0' and '1'")
        if len(s) != obj["d"] ** obj["n"]:
            raise DomainError("table string length must equal d**n")
        tab = np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(obj["n"], obj["d"], tab)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "d": self.d,
            "table": "".join("1" if v else "0" for v in self.table),
        }


@dataclass(frozen=True, order=False)
class SubsetMask:
    """A subset of the n coordinates, stored as a bit mask (bit k = coordinate k)."""

    bits: int
    weight: int = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.bits, int) and self.bits >= 0):
            raise DomainError("mask bits must be a nonnegative integer")
        object.__setattr__(self, "weight", self.bits.bit_count())

    def is_submask_of(self, other: "SubsetMask | int") -> bool:
        o = other.bits if isinstance(other, SubsetMask) else int(other)
        return (self.bits & o) == self.bits

    def coordinates(self) -> tuple:
        return tuple(k for k in range(self.bits.bit_length()) if (self.bits >> k) & 1)

    def __int__(self) -> int:
        return self.bits


def mask_bits(mask) -> int:
    """Accept SubsetMask or plain int; return the bit pattern."""
    if isinstance(mask, SubsetMask):
        return mask.bits
    if isinstance(mask, (int, np.integer)):
        if mask < 0:
            raise DomainError("mask must be nonnegative")
        return int(mask)
    raise DomainError(f"not a subset mask: {mask!r}")


def iter_submask_bits(bits: int):
    """All submasks of `bits` as ints, in increasing numeric order."""
    s = 0
    while True:
        yield s
        if s == bits:
            return
        s = (s - bits) & bits


def enumerate_submasks(mask) -> list:
    """Submasks of `mask` in increasing order; SubsetMask in, SubsetMask out."""
    bits = mask_bits(mask)
    subs = list(iter_submask_bits(bits))
    if isinstance(mask, SubsetMask):
        return [SubsetMask(s) for s in subs]
    return subs


def mask_weights(n: int) -> np.ndarray:
    """Population counts of all masks 0..2**n-1."""
    w = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        w[1 << k : 1 << (k + 1)] = w[: 1 << k] + 1
    return w


def load_json_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DomainError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc}") from None


def check_exact_size(n: int, limit: int, what: str):
    if n > limit:
        raise SizeLimitError(
            f"{what} supports n <= {limit} (got n={n}); use the sampling paths instead"
        )
