"""Command-line front end.

Subcommands:

- generate: draw one replicate's data matrix for a scenario file, optionally
  writing the scenario's true precision matrix next to it.
- estimate: run one chain on a data file and write the posterior mean.
- diverge: print the divergence table between two precision matrices.
- reproduce-table1: run the four benchmark cells over alpha in
  {1.0, 0.9, 0.5, 0.1} and write the replicate-level CSV.
- concentration: error decay over a growing sample-size ladder.

The environment variable FGHS_SEED, when set, overrides any seed given on
the command line. Exit codes: 0 on success, 1 when at least one replicate
cell failed (results are still written), 2 on configuration errors (bad
arguments, unreadable files, malformed inputs).
"""

from __future__ import annotations

import argparse
import os
import sys

from .diverge import (
    c_alpha,
    divergence_report,
    hellinger_sq_gaussian,
    kl_gaussian,
    kl_variance_gaussian,
)
from .errors import FghsError, NotPositiveDefiniteError, ParameterDomainError
from .harness import (
    aggregate,
    concentration_sweep,
    run_grid,
    write_aggregate_csv,
    write_results_csv,
    write_trend_csv,
)
from .matcore import DiagMode, frobenius_dist_sq, load_matrix, save_matrix
from .sampler import SamplerConfig, run_chain
from .scenarios import (
    dense_table_scenario,
    generate_data,
    load_data,
    load_scenario,
    save_data,
    scenario_truth,
    sparse_table_scenario,
)

__all__ = ["main"]

SEED_ENV_VAR = "FGHS_SEED"

TABLE1_ALPHAS = (1.0, 0.9, 0.5, 0.1)


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ParameterDomainError(
            f"{SEED_ENV_VAR} must be an integer, got {raw!r}"
        ) from None


def _resolve_seed(cli_seed: int | None) -> int | None:
    env = _env_seed()
    return cli_seed if env is None else env


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _print_table(header: tuple[str, ...], rows: list[tuple], out) -> None:
    cells = [header] + [tuple(_fmt(v) for v in row) for row in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def cmd_generate(args) -> int:
    scenario = load_scenario(args.scenario)
    seed_root = _resolve_seed(args.seed)
    y = generate_data(scenario, args.replicate, seed_root)
    effective = scenario.master_seed if seed_root is None else seed_root
    save_data(
        args.out,
        y,
        comments=(
            f"scenario {scenario.name} ({scenario.truth}, {scenario.law})",
            f"replicate {args.replicate}, master seed {effective}",
        ),
    )
    if args.truth_out is not None:
        truth = scenario_truth(scenario, seed_root)
        save_matrix(
            args.truth_out,
            truth,
            comments=(f"true precision matrix of scenario {scenario.name}",),
        )
    return 0


def cmd_estimate(args) -> int:
    y = load_data(args.data)
    seed = _resolve_seed(args.seed)
    config = SamplerConfig(
        alpha=args.alpha,
        n_iter=args.iters,
        burn_in=args.burnin,
        thin=args.thin,
        diag_mode=DiagMode(args.diag_mode),
        seed=seed,
    )
    try:
        out = run_chain(y, config)
    except NotPositiveDefiniteError as exc:
        print(f"fghs estimate: chain failed: {exc}", file=sys.stderr)
        return 1
    estimate = out.mean_omega_psd if args.psd else out.mean_omega
    save_matrix(
        args.out,
        estimate,
        comments=(
            "posterior mean precision matrix"
            + (" (PSD projected)" if args.psd else ""),
            f"alpha {args.alpha:g}, iters {args.iters}, burnin {args.burnin}, "
            f"thin {args.thin}, diag mode {args.diag_mode}, seed {seed}",
            f"samples kept {out.samples_kept}, scale clamps {out.clamp_events}",
        ),
    )
    return 0


def cmd_diverge(args) -> int:
    a = load_matrix(args.a)
    b = load_matrix(args.b)
    if args.alpha == 1.0:
        # Renyi order 1 is the KL limit; report it directly.
        kl = kl_gaussian(a, b)
        rows = [
            ("kl", kl),
            ("kl_variance", kl_variance_gaussian(a, b)),
            ("renyi", kl),
            ("hellinger_sq", hellinger_sq_gaussian(a, b)),
            ("frobenius_sq", frobenius_dist_sq(a, b)),
            ("c_alpha", 1.0),
        ]
    else:
        report = divergence_report(a, b, args.alpha)
        rows = [
            ("kl", report.kl),
            ("kl_variance", report.kl_variance),
            ("renyi", report.renyi),
            ("hellinger_sq", report.hellinger_sq),
            ("frobenius_sq", report.frobenius_sq),
            ("c_alpha", c_alpha(args.alpha)),
        ]
    for name, value in rows:
        print(f"{name} = {value:.12g}")
    return 0


def cmd_reproduce_table1(args) -> int:
    seed = _resolve_seed(args.seed)
    scenarios = [
        dense_table_scenario("gaussian"),
        dense_table_scenario("student_t"),
        sparse_table_scenario("gaussian"),
        sparse_table_scenario("student_t"),
    ]
    results = run_grid(
        scenarios,
        list(TABLE1_ALPHAS),
        replicates=args.reps,
        n_iter=args.iters,
        burn_in=args.burnin,
        master_seed=seed,
        jobs=args.jobs,
    )
    write_results_csv(args.out, results)
    rows = aggregate(results)
    if args.aggregate_out is not None:
        write_aggregate_csv(args.aggregate_out, rows)
    _print_table(
        ("scenario", "alpha", "n_reps", "dropped", "mean_err", "sd_err",
         "mean_err_psd", "mean_kl", "mean_renyi"),
        [(r.scenario, r.alpha, r.n_reps, r.dropped, r.mean_err, r.sd_err,
          r.mean_err_psd, r.mean_kl, r.mean_renyi) for r in rows],
        sys.stdout,
    )
    failed = sum(not r.ok for r in results)
    if failed:
        print(f"fghs reproduce-table1: {failed} replicate(s) failed", file=sys.stderr)
        return 1
    return 0


def cmd_concentration(args) -> int:
    scenario = load_scenario(args.scenario)
    try:
        n_values = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
    except ValueError:
        raise ParameterDomainError(f"--n-list must be comma-separated integers, got {args.n_list!r}") from None
    seed = _resolve_seed(args.seed)
    rows, slope = concentration_sweep(
        scenario,
        n_values,
        alpha=args.alpha,
        replicates=args.reps,
        n_iter=args.iters,
        burn_in=args.burnin,
        master_seed=seed,
        jobs=args.jobs,
    )
    write_trend_csv(args.out, rows, slope)
    _print_table(
        ("n", "n_reps", "dropped", "mean_err", "sd_err"),
        [(r.n, r.n_reps, r.dropped, r.mean_err, r.sd_err) for r in rows],
        sys.stdout,
    )
    print(f"log-log slope = {slope:.6g}")
    if any(r.dropped for r in rows):
        print("fghs concentration: some replicates failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fghs",
        description="Tempered-posterior estimation of sparse precision matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="draw one replicate's data matrix")
    gen.add_argument("--scenario", required=True, help="scenario definition file")
    gen.add_argument("--replicate", type=int, default=0, help="replicate index (default 0)")
    gen.add_argument("--out", required=True, help="output data file")
    gen.add_argument("--truth-out", default=None, help="also write the true precision matrix here")
    gen.add_argument("--seed", type=int, default=None,
                     help="master seed (default: the scenario file's own)")
    gen.set_defaults(func=cmd_generate)

    est = sub.add_parser("estimate", help="run one chain on a data file")
    est.add_argument("--data", required=True, help="input data file (rows = observations)")
    est.add_argument("--alpha", type=float, required=True, help="likelihood power in (0, 1]")
    est.add_argument("--iters", type=int, default=1100, help="total sweeps (default 1100)")
    est.add_argument("--burnin", type=int, default=100, help="discarded sweeps (default 100)")
    est.add_argument("--thin", type=int, default=1, help="keep every k-th sweep (default 1)")
    est.add_argument("--diag-mode", choices=[m.value for m in DiagMode],
                     default=DiagMode.FREE.value, help="diagonal handling (default free)")
    est.add_argument("--seed", type=int, default=0, help="chain seed (default 0)")
    est.add_argument("--psd", action="store_true",
                     help="write the PSD-projected posterior mean instead of the raw mean")
    est.add_argument("--out", required=True, help="output matrix file")
    est.set_defaults(func=cmd_estimate)

    div = sub.add_parser("diverge", help="divergences between two precision matrices")
    div.add_argument("--a", required=True, help="first precision matrix file")
    div.add_argument("--b", required=True, help="second precision matrix file")
    div.add_argument("--alpha", type=float, default=0.5,
                     help="Renyi order in (0, 1]; 1 reports the KL limit (default 0.5)")
    div.set_defaults(func=cmd_diverge)

    tab = sub.add_parser("reproduce-table1",
                         help="benchmark grid: four scenario cells x four alphas")
    tab.add_argument("--reps", type=int, default=50,
                     help="replicates per cell (default 50; 10 or fewer for desk scale)")
    tab.add_argument("--out", required=True, help="replicate-level results CSV")
    tab.add_argument("--aggregate-out", default=None, help="also write the aggregate CSV here")
    tab.add_argument("--iters", type=int, default=1100, help="sweeps per chain (default 1100)")
    tab.add_argument("--burnin", type=int, default=100, help="burn-in per chain (default 100)")
    tab.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    tab.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="parallel worker processes (default: all cores)")
    tab.set_defaults(func=cmd_reproduce_table1)

    con = sub.add_parser("concentration", help="error decay over growing sample sizes")
    con.add_argument("--scenario", required=True, help="scenario definition file")
    con.add_argument("--n-list", default="30,60,120,240",
                     help="comma-separated sample sizes (default 30,60,120,240)")
    con.add_argument("--reps", type=int, default=20, help="replicates per sample size (default 20)")
    con.add_argument("--alpha", type=float, default=0.9, help="likelihood power (default 0.9)")
    con.add_argument("--iters", type=int, default=1100, help="sweeps per chain (default 1100)")
    con.add_argument("--burnin", type=int, default=100, help="burn-in per chain (default 100)")
    con.add_argument("--seed", type=int, default=None,
                     help="master seed (default: the scenario file's own)")
    con.add_argument("--out", required=True, help="trend CSV")
    con.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                     help="parallel worker processes (default: all cores)")
    con.set_defaults(func=cmd_concentration)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help
        return 0 if exc.code in (None, 0) else 2
    try:
        return args.func(args)
    except (FghsError, OSError, ValueError) as exc:
        print(f"fghs {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
