"""Command-line front door: ``smoothdisc {verify-core,trial,sweep,diag,disc}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from .core import brute_force_disc, read_matrix
from .errors import AttemptsExhausted
from .experiments import (
    ExperimentConfig,
    generate_matrix,
    read_grid,
    run_trial,
    second_moment_diag,
    sweep,
    sweep_csv,
    verify_core,
)
from .relevance import RelevanceConfig, find_relevant_set
from .walk import TruncationConfig

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _config(args, d=None, n=None) -> ExperimentConfig:
    return ExperimentConfig(
        d=d if d is not None else args.d,
        n=n if n is not None else args.n,
        ensemble=args.ensemble,
        samples_per_trial=args.k,
        trials=getattr(args, "trials", 1),
        relevance=RelevanceConfig(c_const=args.c_const, max_attempts=args.max_attempts),
        truncation=TruncationConfig(c_lo=args.c_lo, c_hi=args.c_hi, max_rejections=args.max_rejections),
        master_seed=args.seed,
    )


def _cmd_verify_core(args) -> int:
    rep = verify_core(args.n_max, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rep.to_csv())
    bad = [r for r in rep.rows if not r.match]
    for r in bad[:20]:
        print(f"MISMATCH {r.lemma_id} n={r.n} {r.case_id}: {r.exact} != {r.oracle}", file=sys.stderr)
    print(f"{len(rep.rows)} cases, {len(bad)} mismatches; parity violations: "
          + ", ".join(f"{k}={v}" for k, v in rep.parity_violations.items() if k != "pairs"))
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def _cmd_trial(args) -> int:
    rec = run_trial(_config(args), args.seed, timing=True)
    out = asdict(rec)
    out["bookkeeping_ok"] = rec.bookkeeping_ok
    print(json.dumps({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()},
                     indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    grid = read_grid(args.grid) if args.grid else [(args.d, args.n)]
    records = sweep(grid, _config(args, *grid[0]), workers=args.workers, timing=args.timing)
    text = sweep_csv(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_diag(args) -> int:
    rng = np.random.default_rng(args.seed)
    cfg = _config(args)
    M = generate_matrix(cfg, rng)
    try:
        rs = find_relevant_set(M, cfg.relevance, rng, target_size=args.size, trunc=cfg.truncation, parity=0)
    except AttemptsExhausted as exc:
        print(f"setup failed: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    rep = second_moment_diag(M, rs, mode=args.mode, n_r=args.n_r, rng=rng)
    print(json.dumps({
        "exact": rep.exact,
        "samples": rep.samples,
        "mean_S": str(rep.mean_S),
        "mean_S2": str(rep.mean_S2),
        "pr_positive": str(rep.pr_positive),
        "paley_zygmund_bound": str(rep.paley_zygmund_bound),
        "pz_holds": rep.pr_positive >= rep.paley_zygmund_bound,
        "P_x": [str(p) for p in rep.P_x],
        "reachable": list(rep.reachable),
        "product_form_ok": rep.product_form_ok,
        "pairs": [{"i": i, "j": j, "P_xy": str(p), "independence_ratio": rep.independence_ratio(i, j),
                   "large_overlap": rep.overlap_event[(i, j)]} for (i, j), p in rep.P_xy.items()],
    }, indent=2))
    return EXIT_OK


def _cmd_disc(args) -> int:
    M = read_matrix(args.matrix)
    rep = brute_force_disc(M)
    print(f"{rep.value!r}")
    print(rep.witness.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smoothdisc", description="Discrepancy of randomly perturbed Komlós matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify-core", help="check closed-form probabilities against enumeration")
    v.add_argument("--n-max", type=int, default=12)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="write the per-case CSV report here")
    v.set_defaults(func=_cmd_verify_core)

    def experiment_args(sp, d, n):
        sp.add_argument("--d", type=int, default=d)
        sp.add_argument("--n", type=int, default=n)
        sp.add_argument("--ensemble", default="gaussian-unit-columns")
        sp.add_argument("--k", type=int, default=200, help="candidate draws per trial")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--c-const", type=float, default=4.0)
        sp.add_argument("--max-attempts", type=int, default=500)
        sp.add_argument("--c-lo", type=float, default=0.2)
        sp.add_argument("--c-hi", type=float, default=5.0)
        sp.add_argument("--max-rejections", type=int, default=10_000)

    t = sub.add_parser("trial", help="run one perturbation trial and print its record")
    experiment_args(t, 9, 128)
    t.set_defaults(func=_cmd_trial)

    s = sub.add_parser("sweep", help="run trials over a grid of (d, n) and emit CSV")
    experiment_args(s, 9, 128)
    s.add_argument("--grid", help="file with one 'd n' pair per line")
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", help="CSV path (default stdout)")
    s.add_argument("--timing", action="store_true", help="record wall_ms (breaks byte-identical replay)")
    s.set_defaults(func=_cmd_sweep)

    g = sub.add_parser("diag", help="second-moment diagnostics on a small instance")
    experiment_args(g, 2, 4)
    g.add_argument("--mode", choices=("enumerate", "sample"), default="enumerate")
    g.add_argument("--n-r", type=int, default=10_000, help="matrices drawn in sample mode")
    g.add_argument("--size", type=int, default=2, help="relevant set size")
    g.set_defaults(func=_cmd_diag)

    b = sub.add_parser("disc", help="exact discrepancy of a matrix file by enumeration")
    b.add_argument("matrix")
    b.set_defaults(func=_cmd_disc)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"smoothdisc: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
