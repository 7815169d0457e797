"""Exact binomial arithmetic, parity-conditioned core probabilities, and the
enumeration oracles that certify them.

All probabilities stay rational (:class:`ExactProbability`); floats appear
only in :class:`SpencerEstimate` and in report formatting.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .core import SignVector
from .errors import DimensionMismatch, OddN, ParityMismatch, ParityViolation, TooLarge

ORACLE_CAP = 20


class ExactProbability(Fraction):
    """A probability held as a reduced fraction of arbitrary-precision integers."""

    def __new__(cls, numerator=0, denominator=None):
        self = super().__new__(cls, numerator, denominator)
        if not 0 <= self <= 1:
            raise ValueError(f"{self} is not a probability")
        return self

    @property
    def reduced(self) -> bool:
        return math.gcd(self.numerator, self.denominator) == 1

    def __repr__(self) -> str:
        return f"ExactProbability({self.numerator}, {self.denominator})"


def binom(n: int, k: int) -> int:
    """C(n, k), zero outside ``0 <= k <= n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _require_even(n: int) -> None:
    if n % 2:
        raise OddN(f"n = {n} must be even")


def count_S_t(n: int, t: int) -> int:
    """Number of ±1 vectors of length ``n`` whose coordinates sum to ``2t``."""
    _require_even(n)
    return binom(n, n // 2 + t)


# ---------------------------------------------------------------- near-centre

@dataclass(frozen=True)
class SpencerEstimate:
    n: int
    t: int
    exact_log_ratio: float
    approx_log_ratio: float
    error_budget: float

    @property
    def gap(self) -> float:
        return abs(self.exact_log_ratio - self.approx_log_ratio)

    @property
    def within_budget(self) -> bool:
        return self.gap <= self.error_budget


def spencer_budget(n: int, t: int) -> float:
    t = abs(t)
    return 3.0 * (t**3 + t**2 + 1) / n**2 + t**2 / (n * (n + t))


def _log_ratio_product(n: int, t: int) -> mpmath.mpf:
    # log C(n, (n+t)/2) - log C(n, n/2) = sum_{j=1}^{t/2} log((n/2 - j + 1) / (n/2 + j))
    h = n // 2
    return mpmath.fsum(mpmath.log(mpmath.mpf(h - j + 1) / (h + j)) for j in range(1, t // 2 + 1))


def _log_ratio_exact(n: int, t: int) -> mpmath.mpf:
    num, den = binom(n, (n + t) // 2), binom(n, n // 2)
    return mpmath.log(num) - mpmath.log(den)


def spencer_estimate(n: int, t: int, *, check_regime: bool = True, prec: int = 128) -> SpencerEstimate:
    """Exact log-ratio ``log C(n,(n+t)/2)/C(n,n/2)`` against ``-t^2/(2n)``.

    The ratio is formed from exact binomials and its log taken at ``prec``
    bits; the telescoping product form is evaluated as well and the two must
    agree to ``2^-(prec-16)``.
    """
    _require_even(n)
    if (n + t) % 2:
        raise ParityViolation(f"(n + t)/2 is not an integer for n={n}, t={t}")
    t = abs(t)
    if check_regime and t**3 > n**2:
        raise ValueError(f"|t| = {t} exceeds n^(2/3)")
    with mpmath.workprec(prec):
        exact = _log_ratio_exact(n, t)
        product = _log_ratio_product(n, t)
        if abs(exact - product) > mpmath.mpf(2) ** (-(prec - 16)) * (1 + abs(exact)):
            raise ArithmeticError("product form and exact binomial ratio disagree")
        exact_f = float(exact)
    return SpencerEstimate(n, t, exact_f, -(t * t) / (2.0 * n), spencer_budget(n, t))


# ---------------------------------------------------------------- even class

@dataclass(frozen=True)
class EvenClassInfo:
    """Achievable values of ``<r, x>`` when ``r`` is uniform on the even class."""

    n: int
    x: SignVector

    @property
    def support(self) -> frozenset[int]:
        # |Diff(r, x)| = m must have the parity of #1(x) for r to be even
        return frozenset(self.n - 2 * m for m in range(self.n + 1) if m % 2 == self.x.parity)

    def contains(self, value: int) -> bool:
        m2 = self.n - value
        if m2 % 2 or not 0 <= m2 // 2 <= self.n:
            return False
        return (m2 // 2) % 2 == self.x.parity


def support_even_inner(n: int, x: SignVector) -> EvenClassInfo:
    _require_even(n)
    if len(x) != n:
        raise DimensionMismatch(f"x has length {len(x)}, expected {n}")
    return EvenClassInfo(n, x)


def in_even_support(n: int, x: SignVector, value: int) -> bool:
    return support_even_inner(n, x).contains(value)


def prob_single_even(n: int, x: SignVector, t: int) -> ExactProbability:
    """``Pr[<r, x> = 2t]`` for ``r`` uniform on the even class of length ``n``.

    Exactly 0 when ``2t`` is not achievable; the binomial alone can be
    nonzero there.
    """
    if not support_even_inner(n, x).contains(2 * t):
        return ExactProbability(0)
    return ExactProbability(binom(n, n // 2 + t), 2 ** (n - 1))


def agreement(x: SignVector, y: SignVector) -> int:
    """Number of coordinates where ``x`` and ``y`` coincide."""
    if len(x) != len(y):
        raise DimensionMismatch("vectors differ in length")
    return int(np.count_nonzero(x.entries == y.entries))


def prob_joint_even(n: int, x: SignVector, y: SignVector, t_x: int, t_y: int) -> ExactProbability:
    """``Pr[<r, x> = 2 t_x, <r, y> = 2 t_y]`` for ``r`` uniform on the even class.

    ``x`` and ``y`` must have +1 counts of equal parity.
    """
    _require_even(n)
    if len(x) != n or len(y) != n:
        raise DimensionMismatch("vector lengths must equal n")
    if x.parity != y.parity:
        raise ParityMismatch("#1(x) and #1(y) differ in parity")
    if (t_x - t_y) % 2:
        return ExactProbability(0)
    if not (in_even_support(n, x, 2 * t_x) and in_even_support(n, y, 2 * t_y)):
        return ExactProbability(0)
    same = agreement(x, y)
    diff = n - same
    top = same + t_x + t_y
    bot = diff + t_x - t_y
    # both even once the parities above hold
    count = binom(same, top // 2) * binom(diff, bot // 2)
    return ExactProbability(count, 2 ** (n - 1))


# ---------------------------------------------------------------- oracles

def even_class(n: int) -> np.ndarray:
    """All ``2^(n-1)`` even members of ``{-1,1}^n`` as an int8 array."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > ORACLE_CAP:
        raise TooLarge(f"n = {n} exceeds the oracle cap {ORACLE_CAP}")
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(np.int8)
    # bit set means +1
    even = bits[bits.sum(axis=1) % 2 == 0]
    assert even.shape[0] == 1 << (n - 1)
    return (2 * even - 1).astype(np.int8)


def all_sign_vectors(n: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(np.int8)
    return (2 * bits - 1).astype(np.int8)


def enumerate_even_oracle(n: int, predicate) -> ExactProbability:
    """Exact probability that ``predicate`` holds for ``r`` uniform on the even class.

    ``predicate`` maps the ``(2^(n-1), n)`` array of even vectors to a boolean
    mask, one entry per row.
    """
    E = even_class(n)
    mask = np.asarray(predicate(E), dtype=bool)
    if mask.shape != (E.shape[0],):
        raise ValueError("predicate must return one boolean per even vector")
    return ExactProbability(int(np.count_nonzero(mask)), E.shape[0])


def inner_product_law(n: int, x: SignVector) -> dict[int, ExactProbability]:
    """Enumerated law of ``<r, x>`` over the even class."""
    E = even_class(n).astype(np.int64)
    vals, counts = np.unique(E @ x.entries.astype(np.int64), return_counts=True)
    return {int(v): ExactProbability(int(c), E.shape[0]) for v, c in zip(vals, counts)}


def joint_inner_product_law(n: int, x: SignVector, y: SignVector) -> dict[tuple[int, int], ExactProbability]:
    E = even_class(n).astype(np.int64)
    pairs = np.stack([E @ x.entries.astype(np.int64), E @ y.entries.astype(np.int64)], axis=1)
    vals, counts = np.unique(pairs, axis=0, return_counts=True)
    return {(int(a), int(b)): ExactProbability(int(c), E.shape[0]) for (a, b), c in zip(vals, counts)}


# ---------------------------------------------------------------- parity lemmas

@dataclass(frozen=True)
class ParityChecks:
    """Three implications, each vacuously true when its premise fails."""

    parity_match_implies_even_diff: bool
    equal_sum_implies_even_diff: bool
    even_v_and_even_diff_implies_even_u: bool

    @property
    def all_hold(self) -> bool:
        return (self.parity_match_implies_even_diff and self.equal_sum_implies_even_diff
                and self.even_v_and_even_diff_implies_even_u)


def parity_checks(u: SignVector, v: SignVector) -> ParityChecks:
    if len(u) != len(v):
        raise DimensionMismatch("vectors differ in length")
    diff_even = int(np.count_nonzero(u.entries != v.entries)) % 2 == 0
    same_parity = u.parity == v.parity
    same_sum = int(u.entries.sum()) == int(v.entries.sum())
    return ParityChecks(
        parity_match_implies_even_diff=(not same_parity) or diff_even,
        equal_sum_implies_even_diff=(not same_sum) or diff_even,
        even_v_and_even_diff_implies_even_u=(not (v.parity == 0 and diff_even)) or u.parity == 0,
    )


def parity_checks_exhaustive(n: int) -> dict[str, int]:
    """Count violations of each implication over all ``4^n`` ordered pairs."""
    V = all_sign_vectors(n).astype(np.int64)
    ones = (V == 1).sum(axis=1)
    sums = V.sum(axis=1)
    # Hamming distance via packed codes
    codes = ((V == -1) * (1 << np.arange(n))).sum(axis=1)
    diff = np.array([bin(int(c)).count("1") for c in range(1 << n)])[codes[:, None] ^ codes[None, :]]
    diff_even = diff % 2 == 0
    par = ones % 2
    same_parity = par[:, None] == par[None, :]
    same_sum = sums[:, None] == sums[None, :]
    v_even = np.broadcast_to(par[None, :] == 0, diff.shape)
    u_even = np.broadcast_to(par[:, None] == 0, diff.shape)
    return {
        "pairs": int(diff.size),
        "parity-implies-even-diff": int(np.count_nonzero(same_parity & ~diff_even)),
        "equal-sum-implies-even-diff": int(np.count_nonzero(same_sum & ~diff_even)),
        "even-diff-preserves-parity": int(np.count_nonzero(v_even & diff_even & ~u_even)),
    }


# ---------------------------------------------------------------- reporting

REPORT_COLUMNS = ["lemma_id", "n", "case_id", "exact_num", "exact_den", "oracle_num", "oracle_den", "match"]


@dataclass(frozen=True)
class VerificationRow:
    lemma_id: str
    n: int
    case_id: str
    exact: Fraction
    oracle: Fraction

    @property
    def match(self) -> bool:
        return self.exact == self.oracle


def verification_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([r.lemma_id, r.n, r.case_id, r.exact.numerator, r.exact.denominator,
                    r.oracle.numerator, r.oracle.denominator, int(r.match)])
    return buf.getvalue()
