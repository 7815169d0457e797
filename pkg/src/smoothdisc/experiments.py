"""Matrix ensembles, Monte Carlo trials, second-moment diagnostics and sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import exact
from .core import KomlosMatrix, SignVector, validate_komlos
from .errors import InvalidEnsembleParams, MaxRejectionsExceeded, OddN, TooLarge
from .perturbation import (
    pad_matrix,
    pad_vector,
    pad_vectors,
    resample_first_column,
    sample_even_rademacher,
    target_sets,
    unpad,
)
from .relevance import RelevanceConfig, RelevantSet
from .walk import TruncationConfig, sample_truncated_many

ENSEMBLES = ("gaussian-unit-columns", "beck-fiala-incidence", "duplicated-columns",
             "all-ones-over-sqrt-d", "zero")
DIAG_ENUMERATION_BITS = 24
THRESHOLD_TOL = 1e-12


def parse_ensemble(text: str) -> tuple[str, int | None]:
    """``"beck-fiala-incidence(3)"`` or ``"beck-fiala-incidence:3"`` -> (name, 3)."""
    m = re.fullmatch(r"\s*([a-z\-]+)\s*(?:[:(]\s*(\d+)\s*\)?)?\s*", text)
    if not m or m.group(1) not in ENSEMBLES:
        raise InvalidEnsembleParams(f"unknown ensemble {text!r}; choose from {', '.join(ENSEMBLES)}")
    name, arg = m.group(1), m.group(2)
    if name == "beck-fiala-incidence" and arg is None:
        raise InvalidEnsembleParams("beck-fiala-incidence needs a column weight, e.g. beck-fiala-incidence(3)")
    return name, int(arg) if arg is not None else None


@dataclass(frozen=True)
class ExperimentConfig:
    d: int
    n: int
    ensemble: str = "gaussian-unit-columns"
    samples_per_trial: int = 200
    trials: int = 1
    relevance: RelevanceConfig = field(default_factory=RelevanceConfig)
    truncation: TruncationConfig = field(default_factory=TruncationConfig)
    master_seed: int = 0
    # divisor applied to R in the final perturbed matrix; None means sqrt(d)
    perturb_divisor: float | None = None

    def __post_init__(self):
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if self.samples_per_trial < 1 or self.trials < 1:
            raise ValueError("samples_per_trial and trials must be >= 1")
        parse_ensemble(self.ensemble)

    @property
    def threshold(self) -> float:
        return 1.0 + 6.0 / math.sqrt(self.d)


def generate_matrix(cfg: ExperimentConfig, rng: np.random.Generator) -> KomlosMatrix:
    name, t = parse_ensemble(cfg.ensemble)
    d, n = cfg.d, cfg.n
    if name == "gaussian-unit-columns":
        G = rng.standard_normal((d, n))
        return validate_komlos(G / np.linalg.norm(G, axis=0))
    if name == "beck-fiala-incidence":
        if not 1 <= t <= d:
            raise InvalidEnsembleParams(f"column weight t = {t} must lie in [1, d = {d}]")
        A = np.zeros((d, n))
        for j in range(n):
            A[rng.choice(d, size=t, replace=False), j] = 1.0
        return validate_komlos(A / math.sqrt(t))
    if name == "duplicated-columns":
        G = rng.standard_normal((d, (n + 1) // 2))
        G /= np.linalg.norm(G, axis=0)
        return validate_komlos(np.repeat(G, 2, axis=1)[:, :n])
    if name == "all-ones-over-sqrt-d":
        return validate_komlos(np.full((d, n), 1.0 / math.sqrt(d)))
    return validate_komlos(np.zeros((d, n)))


# ---------------------------------------------------------------- trials

@dataclass(frozen=True)
class TrialRecord:
    d: int
    n: int
    ensemble: str
    trial: int
    seed: int
    best_disc: float
    threshold: float
    passed: bool
    padded_passed: bool
    setup_failed: bool
    samples_used: int
    wall_ms: float
    pad_parity_ok: bool = True
    roundtrip_ok: bool = True
    resample_slack_ok: bool = True
    transfer_ok: bool = True

    @property
    def bookkeeping_ok(self) -> bool:
        return self.pad_parity_ok and self.roundtrip_ok and self.resample_slack_ok and self.transfer_ok


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(cell), int(trial)]).generate_state(1, np.uint64)[0])


def run_trial(cfg: ExperimentConfig, seed: int, trial: int = 0, M: KomlosMatrix | None = None,
              candidates: np.ndarray | None = None, timing: bool = True) -> TrialRecord:
    """Pad, condition, perturb, resample, unpad; score the best candidate.

    ``candidates`` (an int8 array of base-length sign vectors) replaces the
    truncated-walk draws, e.g. to force a known witness.
    """
    t0 = time.perf_counter()
    s_matrix, s_cand, s_rows, s_resample = np.random.SeedSequence(int(seed)).spawn(4)
    if M is None:
        M = generate_matrix(cfg, np.random.default_rng(s_matrix))
    d, n = M.shape
    thr = 1.0 + 6.0 / math.sqrt(d)
    base = dict(d=d, n=n, ensemble=cfg.ensemble, trial=trial, seed=int(seed), threshold=thr)

    def elapsed():
        return (time.perf_counter() - t0) * 1e3 if timing else 0.0

    if candidates is None:
        try:
            drawn, rejected = sample_truncated_many(M, cfg.truncation, np.random.default_rng(s_cand),
                                                    cfg.samples_per_trial)
        except MaxRejectionsExceeded:
            return TrialRecord(**base, best_disc=math.nan, passed=False, padded_passed=False,
                               setup_failed=True, samples_used=0, wall_ms=elapsed())
        X = np.array([x.entries for x in drawn], dtype=np.int8)
        used = len(drawn) + rejected
    else:
        X = np.atleast_2d(np.asarray(candidates, dtype=np.int8))
        used = X.shape[0]

    inst = pad_matrix(M)
    k = inst.pad_count
    Xp = pad_vectors(X, k)
    pad_parity_ok = bool(np.all(np.count_nonzero(Xp == 1, axis=1) % 2 == 0))

    R = sample_even_rademacher(d, n + k, np.random.default_rng(s_rows))
    sq = math.sqrt(d)
    Xpf = Xp.astype(np.float64)
    padded_vals = np.abs(Xpf @ (inst.padded.values + R.as_float() / sq).T).max(axis=1)
    padded_hit = padded_vals <= 1.0 / sq + THRESHOLD_TOL

    R1 = resample_first_column(R, np.random.default_rng(s_resample))
    slack = np.abs(Xpf @ (R1.as_float() - R.as_float()).T).max(axis=1) / sq
    resample_slack_ok = bool(np.all(slack <= 2.0 / sq + THRESHOLD_TOL))

    x0, R_final = unpad(SignVector(Xp[0]), R1, k)
    roundtrip_ok = (R_final.d, R_final.n) == (d, n) and x0 == SignVector(X[0]) \
        and SignVector(Xp[0]) == pad_vector(x0, k)

    divisor = cfg.perturb_divisor or sq
    final = np.abs(X.astype(np.float64) @ (M.values + R_final.as_float() / divisor).T).max(axis=1)
    best = float(final.min())
    # a padded Delta-hit must survive resampling and unpadding
    transfer_ok = bool(np.all(final[padded_hit] <= thr + THRESHOLD_TOL)) if cfg.perturb_divisor is None else True

    return TrialRecord(**base, best_disc=best, passed=best <= thr + THRESHOLD_TOL,
                       padded_passed=bool(padded_hit.any()), setup_failed=False, samples_used=used,
                       wall_ms=elapsed(), pad_parity_ok=pad_parity_ok, roundtrip_ok=roundtrip_ok,
                       resample_slack_ok=resample_slack_ok, transfer_ok=transfer_ok)


# ---------------------------------------------------------------- second moment

@dataclass(frozen=True)
class SecondMomentReport:
    mean_S: Fraction
    mean_S2: Fraction
    pr_positive: Fraction
    exact: bool
    samples: int
    P_x: tuple[Fraction, ...]
    P_xy: dict
    reachable: tuple[bool, ...]
    product_form_ok: bool | None = None
    # pair -> |<x,y>| >= 3n/4
    overlap_event: dict = field(default_factory=dict)

    @property
    def paley_zygmund_bound(self) -> Fraction:
        if self.mean_S2 == 0:
            return Fraction(0)
        return self.mean_S ** 2 / self.mean_S2

    def independence_ratio(self, i: int, j: int) -> float:
        den = self.P_x[i] * self.P_x[j]
        return math.inf if den == 0 else float(self.P_xy[(i, j)] / den)


def _row_hits(M: KomlosMatrix, x: SignVector, E: np.ndarray) -> np.ndarray:
    """``hits[i, r]``: row ``r`` of the even class lands ``(r . x)`` in row i's target set."""
    vals = E.astype(np.int64) @ x.entries.astype(np.int64)
    hits = np.zeros((M.d, E.shape[0]), dtype=bool)
    for ts in target_sets(M, x):
        hits[ts.i] = np.isin(vals, ts.values)
    return hits


def reachable_targets(M: KomlosMatrix, x: SignVector) -> bool:
    """Every row's target set meets the achievable values of ``<r, x>``, r even."""
    info = exact.support_even_inner(M.n, x)
    return all(any(info.contains(v) for v in ts.values) for ts in target_sets(M, x))


def _product_form(M: KomlosMatrix, x: SignVector, y: SignVector | None = None) -> Fraction:
    total = Fraction(1)
    if y is None:
        for ts in target_sets(M, x):
            total *= sum((exact.prob_single_even(M.n, x, v // 2) for v in ts.values), Fraction(0))
        return total
    for tx, ty in zip(target_sets(M, x), target_sets(M, y)):
        total *= sum((exact.prob_joint_even(M.n, x, y, a // 2, b // 2)
                      for a in tx.values for b in ty.values), Fraction(0))
    return total


def second_moment_diag(M: KomlosMatrix, relevant, mode: str = "enumerate", n_r: int = 10_000,
                       rng: np.random.Generator | None = None) -> SecondMomentReport:
    """Moments of ``S(R)``, the fraction of relevant members hitting the Delta-bound.

    Rows of R are uniform on the even class; members are weighted uniformly.
    ``enumerate`` walks all ``(2^(n-1))^d`` matrices exactly; ``sample``
    draws ``n_r`` of them.
    """
    members = list(relevant.members if isinstance(relevant, RelevantSet) else relevant)
    if not members:
        raise ValueError("relevant set is empty")
    d, n = M.shape
    if n % 2:
        raise OddN("second-moment diagnostics need an even column count")
    m = len(members)
    E = exact.even_class(n)
    hits = [_row_hits(M, x, E) for x in members]

    if mode == "enumerate":
        if d * (n - 1) > DIAG_ENUMERATION_BITS:
            raise TooLarge(f"d(n-1) = {d * (n - 1)} exceeds {DIAG_ENUMERATION_BITS} bits")
        N = E.shape[0] ** d
        ind = []
        for h in hits:
            a = h[0]
            for i in range(1, d):
                a = np.multiply.outer(a, h[i])
            ind.append(a.reshape(-1))
    elif mode == "sample":
        rng = rng or np.random.default_rng()
        N = int(n_r)
        idx = rng.integers(0, E.shape[0], size=(N, d))
        ind = [np.all(h[np.arange(d), idx], axis=1) for h in hits]
    else:
        raise ValueError("mode must be 'enumerate' or 'sample'")

    counts = np.zeros(N, dtype=np.int64)
    for a in ind:
        counts += a
    mean_S = Fraction(int(counts.sum()), m * N)
    mean_S2 = Fraction(int((counts * counts).sum()), m * m * N)
    pr_pos = Fraction(int(np.count_nonzero(counts)), N)
    P_x = tuple(Fraction(int(np.count_nonzero(a)), N) for a in ind)
    P_xy, overlap = {}, {}
    for i, j in itertools.combinations(range(m), 2):
        P_xy[(i, j)] = Fraction(int(np.count_nonzero(ind[i] & ind[j])), N)
        ip = int(np.dot(members[i].entries.astype(np.int64), members[j].entries.astype(np.int64)))
        overlap[(i, j)] = 4 * abs(ip) >= 3 * n

    product_ok = None
    if mode == "enumerate" and all(x.parity == members[0].parity for x in members):
        product_ok = all(P_x[i] == _product_form(M, x) for i, x in enumerate(members)) and all(
            P_xy[(i, j)] == _product_form(M, members[i], members[j]) for i, j in P_xy)
    elif mode == "enumerate":
        product_ok = all(P_x[i] == _product_form(M, x) for i, x in enumerate(members))

    report = SecondMomentReport(mean_S, mean_S2, pr_pos, exact=(mode == "enumerate"), samples=N,
                                P_x=P_x, P_xy=P_xy,
                                reachable=tuple(reachable_targets(M, x) for x in members),
                                product_form_ok=product_ok, overlap_event=overlap)
    assert report.mean_S2 >= report.mean_S ** 2
    if report.exact:
        # positivity needs a member whose targets meet the even-class support
        assert (report.mean_S > 0) == any(report.reachable)
    assert 0 <= report.paley_zygmund_bound <= 1
    return report


# ---------------------------------------------------------------- verify-core

@dataclass
class CoreReport:
    rows: list = field(default_factory=list)
    parity_violations: dict = field(default_factory=dict)

    @property
    def mismatches(self) -> int:
        return sum(not r.match for r in self.rows) + sum(
            v for k, v in self.parity_violations.items() if k != "pairs")

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def to_csv(self) -> str:
        return exact.verification_csv(self.rows)


def _random_sign(n: int, rng: np.random.Generator) -> SignVector:
    return SignVector(rng.choice(np.array([-1, 1], dtype=np.int8), size=n))


def verify_core(n_max: int = 12, seed: int = 0, per_n: int = 50, *, single=None, joint=None,
                count=None, parity_n: int = 8) -> CoreReport:
    """Check every closed form against its enumeration oracle.

    ``single``, ``joint`` and ``count`` default to the library functions and
    exist so a deliberately broken formula can be injected.
    """
    if not 2 <= n_max <= exact.ORACLE_CAP:
        raise ValueError(f"n_max must lie in [2, {exact.ORACLE_CAP}]")
    single = single or exact.prob_single_even
    joint = joint or exact.prob_joint_even
    count = count or exact.count_S_t
    rng = np.random.default_rng(seed)
    rep = CoreReport()
    for n in range(2, n_max + 1, 2):
        sums = exact.all_sign_vectors(n).astype(np.int64).sum(axis=1)
        for t in range(-n // 2 - 1, n // 2 + 2):
            rep.rows.append(exact.VerificationRow("sum-count", n, f"t={t}", Fraction(count(n, t)),
                                                  Fraction(int(np.count_nonzero(sums == 2 * t)))))
        for c in range(per_n):
            x = _random_sign(n, rng)
            law = exact.inner_product_law(n, x)
            for t in range(-n // 2, n // 2 + 1):
                rep.rows.append(exact.VerificationRow("single-inner", n, f"x{c}:t={t}", single(n, x, t),
                                                      law.get(2 * t, Fraction(0))))
        if n < 4:
            continue
        for c in range(per_n):
            x = _random_sign(n, rng)
            y = _random_sign(n, rng)
            if y.parity != x.parity:
                flip = int(rng.integers(n))
                e = y.entries.copy()
                e[flip] = -e[flip]
                y = SignVector(e)
            law = exact.joint_inner_product_law(n, x, y)
            ts = range(-n // 2, n // 2 + 1)
            for tx in ts:
                marginal = Fraction(0)
                for ty in ts:
                    p = joint(n, x, y, tx, ty)
                    marginal += p
                    rep.rows.append(exact.VerificationRow("joint-inner", n, f"p{c}:tx={tx}:ty={ty}", p,
                                                          law.get((2 * tx, 2 * ty), Fraction(0))))
                rep.rows.append(exact.VerificationRow("joint-marginal", n, f"p{c}:tx={tx}",
                                                      marginal, single(n, x, tx)))
    rep.parity_violations = exact.parity_checks_exhaustive(min(parity_n, n_max))
    return rep


# ---------------------------------------------------------------- sweeps

CSV_COLUMNS = ["d", "n", "ensemble", "trial", "seed", "best_disc", "threshold", "passed",
               "padded_passed", "setup_failed", "wall_ms"]


def _run_job(args):
    cfg, seed, trial, timing = args
    return run_trial(cfg, seed, trial, timing=timing)


def sweep(grid, cfg: ExperimentConfig, workers: int = 1, timing: bool = False) -> list[TrialRecord]:
    """One trial record per (cell, trial), in grid order.

    Seeds derive from ``(master_seed, cell index, trial index)`` so the output
    does not depend on ``workers``.
    """
    grid = [(int(d), int(n)) for d, n in grid]
    if not grid:
        raise ValueError("grid is empty")
    jobs = []
    for c, (d, n) in enumerate(grid):
        cell = replace(cfg, d=d, n=n)
        for t in range(cfg.trials):
            jobs.append((cell, trial_seed(cfg.master_seed, c, t), t, timing))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_job, jobs))
    return [_run_job(j) for j in jobs]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def aggregate(records) -> list[dict]:
    """Per-cell summary: ``passed``/``padded_passed`` hold pass rates over
    non-setup-failed trials, ``best_disc`` the median, ``setup_failed`` the count."""
    cells: dict = {}
    for r in records:
        cells.setdefault((r.d, r.n, r.ensemble), []).append(r)
    out = []
    for (d, n, ens), rs in cells.items():
        ok = [r for r in rs if not r.setup_failed]
        out.append(dict(
            d=d, n=n, ensemble=ens, trial="aggregate", seed="",
            best_disc=float(np.median([r.best_disc for r in ok])) if ok else math.nan,
            threshold=rs[0].threshold,
            passed=(sum(r.passed for r in ok) / len(ok)) if ok else math.nan,
            padded_passed=(sum(r.padded_passed for r in ok) / len(ok)) if ok else math.nan,
            setup_failed=sum(r.setup_failed for r in rs),
            wall_ms=float(sum(r.wall_ms for r in rs)),
        ))
    return out


def sweep_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    for a in aggregate(records):
        w.writerow([_fmt(a[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def read_grid(path) -> list[tuple[int, int]]:
    """Grid file: one ``d n`` pair per line; ``#`` starts a comment."""
    grid = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"bad grid line: {line!r}")
            grid.append((int(parts[0]), int(parts[1])))
    return grid
