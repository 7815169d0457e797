"""Gram-Schmidt walk sampler and its norm-window truncation."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import KomlosMatrix, SignVector
from .errors import EmptySampleSet, MaxRejectionsExceeded, NumericalFailure

LSQ_RCOND = 1e-12
LSQ_RESIDUAL_TOL = 1e-8
SNAP_TOL = 1e-12


def sample_stream(master_seed: int, stream_index: int) -> np.random.Generator:
    """Independent generator keyed by ``(master_seed, stream_index)``."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(stream_index)]))


@dataclass
class WalkState:
    """Fractional colouring driven by a single walk.

    ``alive`` holds the coordinates strictly inside ``(-1, 1)``; the pivot is
    always the largest alive index.
    """

    fractional: np.ndarray
    alive: np.ndarray
    pivot: int | None
    steps: int = 0

    @classmethod
    def start(cls, n: int) -> WalkState:
        return cls(np.zeros(n), np.ones(n, dtype=bool), n - 1, 0)

    @property
    def done(self) -> bool:
        return self.pivot is None

    def copy(self) -> WalkState:
        return WalkState(self.fractional.copy(), self.alive.copy(), self.pivot, self.steps)

    def _repick(self) -> None:
        live = np.flatnonzero(self.alive)
        self.pivot = int(live[-1]) if live.size else None

    def proposal(self, V: np.ndarray) -> tuple[np.ndarray, float, float]:
        """Direction and the two maximal step sizes for the next move."""
        u, ok = kernels.walk_direction(V, self.alive, self.pivot, LSQ_RCOND, LSQ_RESIDUAL_TOL)
        if not ok:
            raise NumericalFailure("least-squares step direction failed its residual check")
        dplus, dminus = kernels.walk_step_sizes(self.fractional, u, self.alive)
        return u, dplus, dminus

    def apply(self, u: np.ndarray, delta: float) -> None:
        kernels.walk_move(self.fractional, u, self.alive, delta, SNAP_TOL)
        self.steps += 1
        if self.pivot is not None and not self.alive[self.pivot]:
            self._repick()

    def advance(self, V: np.ndarray, coin: float) -> None:
        u, dplus, dminus = self.proposal(V)
        self.apply(u, dplus if coin < dminus / (dplus + dminus) else -dminus)

    def result(self) -> SignVector:
        if not self.done:
            raise RuntimeError("walk has alive coordinates left")
        return SignVector(self.fractional.astype(np.int8))


def gs_walk_sample(M: KomlosMatrix, rng: np.random.Generator) -> SignVector:
    """One Gram-Schmidt walk output. Consumes ``n`` uniforms from ``rng``."""
    return gs_walk_samples(M, rng, 1)[0]


def gs_walk_samples(M: KomlosMatrix, rng: np.random.Generator, count: int) -> list[SignVector]:
    return [SignVector(x) for x in _walk_batch(M.values, rng, count)[0]]


def _walk_batch(V: np.ndarray, rng: np.random.Generator, count: int):
    n = V.shape[1]
    coins = rng.random((count, n))
    X, steps, status = kernels.gs_walk_batch(
        np.ascontiguousarray(V), coins, LSQ_RCOND, LSQ_RESIDUAL_TOL, SNAP_TOL
    )
    if np.any(status != kernels.WALK_OK):
        raise NumericalFailure("least-squares step direction failed its residual check")
    assert np.all(steps <= n), "walk exceeded n freezing steps"
    assert np.all(np.abs(X) == 1.0), "walk terminated with a fractional coordinate"
    return X.astype(np.int8), steps


def walk_distribution(M: KomlosMatrix, max_n: int = 10) -> dict[SignVector, float]:
    """Exact output law of the walk, by following both branches of every step."""
    if M.n > max_n:
        raise ValueError(f"branch exhaustion limited to n <= {max_n}")
    V = np.ascontiguousarray(M.values)
    law: dict[SignVector, float] = {}
    stack = [(WalkState.start(M.n), 1.0)]
    while stack:
        state, prob = stack.pop()
        if state.done:
            x = state.result()
            law[x] = law.get(x, 0.0) + prob
            continue
        u, dplus, dminus = state.proposal(V)
        p_plus = dminus / (dplus + dminus)
        for delta, p in ((dplus, p_plus), (-dminus, 1.0 - p_plus)):
            if p > 0.0:
                child = state.copy()
                child.apply(u, delta)
                stack.append((child, prob * p))
    return law


# ---------------------------------------------------------------- truncation

@dataclass(frozen=True)
class TruncationConfig:
    """Acceptance window ``c_lo*sqrt(d) <= ||Mx||_2 <= c_hi*sqrt(d)``."""

    c_lo: float = 0.2
    c_hi: float = 5.0
    max_rejections: int = 10_000
    tail_scale: float = 8.0
    batch: int = 32

    def __post_init__(self):
        if not 0 < self.c_lo < self.c_hi:
            raise ValueError("need 0 < c_lo < c_hi")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")
        if self.tail_scale <= 0:
            raise ValueError("tail_scale must be positive")

    def window(self, d: int) -> tuple[float, float]:
        s = math.sqrt(d)
        return self.c_lo * s, self.c_hi * s


def in_window(M: KomlosMatrix, x: SignVector, cfg: TruncationConfig) -> bool:
    lo, hi = cfg.window(M.d)
    r = float(np.linalg.norm(M.values @ x.as_float()))
    return lo <= r <= hi


def sample_truncated_many(
    M: KomlosMatrix, cfg: TruncationConfig, rng: np.random.Generator, count: int
) -> tuple[list[SignVector], int]:
    """``count`` walk outputs accepted by the norm window, plus the rejection total.

    Raises :class:`MaxRejectionsExceeded` once ``cfg.max_rejections``
    consecutive draws fall outside the window.
    """
    lo, hi = cfg.window(M.d)
    V = np.ascontiguousarray(M.values)
    accepted: list[SignVector] = []
    streak = rejected = 0
    while len(accepted) < count:
        want = min(cfg.batch, max(1, count - len(accepted)))
        X, _ = _walk_batch(V, rng, want)
        norms = np.linalg.norm(X @ V.T, axis=1)
        for x, r in zip(X, norms):
            if lo <= r <= hi:
                accepted.append(SignVector(x))
                streak = 0
                if len(accepted) == count:
                    break
            else:
                rejected += 1
                streak += 1
                if streak >= cfg.max_rejections:
                    raise MaxRejectionsExceeded(
                        f"{streak} consecutive draws outside [{lo:.4g}, {hi:.4g}]"
                    )
    return accepted, rejected


def sample_truncated(M: KomlosMatrix, cfg: TruncationConfig, rng: np.random.Generator) -> SignVector:
    return sample_truncated_many(M, cfg, rng, 1)[0][0]


# ---------------------------------------------------------------- tail report

@dataclass(frozen=True)
class TailRow:
    direction_id: int
    t: float
    frequency: float
    bound: float
    slack: float
    passed: bool
    flagged: bool = field(default=False)


def subgaussian_tail_report(
    samples, M: KomlosMatrix, directions, thresholds, tail_scale: float = 8.0
) -> list[TailRow]:
    """Empirical ``Pr[|<Mx, v>| >= t]`` against ``2 exp(-t^2 / tail_scale)``.

    A row passes when the frequency is within the bound plus three binomial
    standard deviations; it is flagged when it exceeds the bound but stays
    inside the slack.
    """
    X = np.array([s.as_float() if isinstance(s, SignVector) else np.asarray(s, float) for s in samples])
    if X.size == 0:
        raise EmptySampleSet("no samples given")
    dirs = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("every direction must be a unit vector (within 1e-9)")
    proj = np.abs((X @ M.values.T) @ dirs.T)
    N = X.shape[0]
    rows = []
    for j in range(dirs.shape[0]):
        for t in thresholds:
            freq = float(np.mean(proj[:, j] >= t))
            bound = 2.0 * math.exp(-t * t / tail_scale)
            p = min(bound, 1.0)
            slack = 3.0 * math.sqrt(p * (1.0 - p) / N)
            rows.append(TailRow(j, float(t), freq, bound, slack,
                                passed=freq <= bound + slack, flagged=bound < freq <= bound + slack))
    return rows


def tail_report_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction_id", "t", "frequency", "bound", "slack", "pass"])
    for r in rows:
        w.writerow([r.direction_id, r.t, r.frequency, r.bound, r.slack, int(r.passed)])
    return buf.getvalue()
