"""Hamming/overlap helpers and the shallow / antipodal / uncorrelated tests."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import KomlosMatrix, SignVector
from .errors import AttemptsExhausted, DimensionMismatch, MaxRejectionsExceeded
from .walk import TruncationConfig, sample_truncated_many


@dataclass(frozen=True)
class RelevanceConfig:
    c_const: float = 4.0
    max_attempts: int = 500

    def __post_init__(self):
        if self.c_const <= 0:
            raise ValueError("c_const must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


class Check(NamedTuple):
    ok: bool
    margin: float


@dataclass(frozen=True)
class Diff:
    """Disagreement set (0-based indices) of two sign vectors."""

    indices: frozenset
    n: int

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def alpha(self) -> float:
        """Fraction of coordinates where the vectors agree."""
        return (self.n - self.size) / self.n


def _same_length(x: SignVector, y: SignVector) -> None:
    if len(x) != len(y):
        raise DimensionMismatch(f"lengths {len(x)} and {len(y)} differ")


def diff_set(x: SignVector, y: SignVector) -> Diff:
    _same_length(x, y)
    idx = np.flatnonzero(x.entries != y.entries)
    return Diff(frozenset(int(i) for i in idx), len(x))


def hamming(x: SignVector, y: SignVector) -> int:
    _same_length(x, y)
    return int(np.count_nonzero(x.entries != y.entries))


def inner_from_diff(x: SignVector, y: SignVector) -> int:
    _same_length(x, y)
    ip = int(np.dot(x.entries.astype(np.int64), y.entries.astype(np.int64)))
    assert abs(ip) == abs(len(x) - 2 * hamming(x, y))
    return ip


def _log_d(d: int) -> float:
    if d < 2:
        raise ValueError("relevance tests need d >= 2 so that log d > 0")
    return math.log(d)


def is_shallow(M: KomlosMatrix, x: SignVector, cfg: RelevanceConfig) -> Check:
    """``||Mx||_inf <= c sqrt(log d)``."""
    if len(x) != M.n:
        raise DimensionMismatch("x does not match the column count of M")
    limit = cfg.c_const * math.sqrt(_log_d(M.d))
    margin = limit - float(np.max(np.abs(M.values @ x.as_float())))
    return Check(margin >= 0, margin)


def is_antipodal(x: SignVector, y: SignVector, d: int, cfg: RelevanceConfig) -> Check:
    """``| |Diff(x,y)| - n/2 | <= c sqrt(n log d)``."""
    _same_length(x, y)
    n = len(x)
    limit = cfg.c_const * math.sqrt(n * _log_d(d))
    margin = limit - abs(hamming(x, y) - n / 2)
    return Check(margin >= 0, margin)


def is_uncorrelated(M: KomlosMatrix, x: SignVector, y: SignVector, cfg: RelevanceConfig) -> Check:
    """``|<Mx, My>| <= c sqrt(d log d)``."""
    _same_length(x, y)
    if len(x) != M.n:
        raise DimensionMismatch("vectors do not match the column count of M")
    limit = cfg.c_const * math.sqrt(M.d * _log_d(M.d))
    ip = float(np.dot(M.values @ x.as_float(), M.values @ y.as_float()))
    margin = limit - abs(ip)
    return Check(margin >= 0, margin)


@dataclass
class RelevantSet:
    members: list[SignVector]
    config: RelevanceConfig
    shallow_margins: list[float] = field(default_factory=list)
    # keyed by (i, j) with i < j
    antipodal_margins: dict = field(default_factory=dict)
    uncorrelated_margins: dict = field(default_factory=dict)

    @classmethod
    def certify(cls, M: KomlosMatrix, members, cfg: RelevanceConfig) -> RelevantSet:
        members = list(members)
        rs = cls(members, cfg)
        for x in members:
            rs.shallow_margins.append(is_shallow(M, x, cfg).margin)
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                rs.antipodal_margins[(i, j)] = is_antipodal(members[i], members[j], M.d, cfg).margin
                rs.uncorrelated_margins[(i, j)] = is_uncorrelated(M, members[i], members[j], cfg).margin
        return rs

    def __len__(self) -> int:
        return len(self.members)

    @property
    def valid(self) -> bool:
        return (all(m >= 0 for m in self.shallow_margins)
                and all(m >= 0 for m in self.antipodal_margins.values())
                and all(m >= 0 for m in self.uncorrelated_margins.values()))

    def reverify(self, M: KomlosMatrix) -> bool:
        """Recompute every certificate and require bit-for-bit equality."""
        fresh = RelevantSet.certify(M, self.members, self.config)
        return (fresh.shallow_margins == self.shallow_margins
                and fresh.antipodal_margins == self.antipodal_margins
                and fresh.uncorrelated_margins == self.uncorrelated_margins
                and fresh.valid)

    def same_parity(self) -> bool:
        return len({x.parity for x in self.members}) <= 1

    def to_json(self) -> str:
        pairs = sorted(self.antipodal_margins)
        return json.dumps({
            "members": [x.tolist() for x in self.members],
            "certificates": {
                "shallow": self.shallow_margins,
                "pairs": [{"i": i, "j": j,
                           "antipodal": self.antipodal_margins[(i, j)],
                           "uncorrelated": self.uncorrelated_margins[(i, j)]} for i, j in pairs],
            },
            "config": {"c_const": self.config.c_const, "max_attempts": self.config.max_attempts},
        })

    @classmethod
    def from_json(cls, text: str) -> RelevantSet:
        doc = json.loads(text)
        rs = cls([SignVector(m) for m in doc["members"]], RelevanceConfig(**doc["config"]))
        rs.shallow_margins = [float(v) for v in doc["certificates"]["shallow"]]
        for p in doc["certificates"]["pairs"]:
            rs.antipodal_margins[(p["i"], p["j"])] = float(p["antipodal"])
            rs.uncorrelated_margins[(p["i"], p["j"])] = float(p["uncorrelated"])
        return rs


def find_relevant_set(
    M: KomlosMatrix,
    cfg: RelevanceConfig,
    rng: np.random.Generator,
    target_size: int = 2,
    trunc: TruncationConfig | None = None,
    parity: int | None = None,
    chunk: int = 8,
) -> RelevantSet:
    """Greedily keep truncated-walk samples that stay relevant to everything kept.

    With ``parity`` set, only samples whose +1 count has that parity are
    considered. Raises :class:`AttemptsExhausted` after ``cfg.max_attempts``
    samples, including when the truncated sampler itself gives up.
    """
    if target_size < 2:
        raise ValueError("target_size must be at least 2")
    trunc = trunc or TruncationConfig()
    n = M.n
    distinct_forced = n / 2 - cfg.c_const * math.sqrt(n * _log_d(M.d)) > 0
    kept: list[SignVector] = []
    attempts = 0
    while attempts < cfg.max_attempts:
        want = min(chunk, cfg.max_attempts - attempts)
        try:
            batch, _ = sample_truncated_many(M, trunc, rng, want)
        except MaxRejectionsExceeded as exc:
            raise AttemptsExhausted(kept, f"truncated sampler gave up: {exc}") from exc
        for x in batch:
            attempts += 1
            if parity is not None and x.parity != parity:
                continue
            if not is_shallow(M, x, cfg).ok:
                continue
            if any(x == k for k in kept):
                continue
            if all(is_antipodal(x, k, M.d, cfg).ok and is_uncorrelated(M, x, k, cfg).ok for k in kept):
                if distinct_forced:
                    assert all(x != k for k in kept)
                kept.append(x)
                if len(kept) == target_size:
                    return RelevantSet.certify(M, kept, cfg)
    raise AttemptsExhausted(kept, f"{attempts} attempts gave {len(kept)} of {target_size} members")
