"""Simulation harness: replicate grids over (scenario, alpha), aggregation,
sample-size sweeps, and the CSV formats they write.

Layout of one grid run: every (scenario, alpha, replicate) cell generates
its data, runs one chain, and reports errors against the scenario's truth.
Chain seeds are derived from the master seed and the cell's position, so a
rerun of the same grid reproduces every number except the runtime columns.
A failing cell is recorded with a failure status and NaN metrics instead of
aborting the grid; aggregation excludes such rows from moments and counts
them in the `dropped` column.

Error metrics per replicate: squared Frobenius distance of the posterior
mean to the truth (raw), the same divided by the p^2 entries (the primary
comparison scale), and the raw distance after PSD projection. kl_to_truth
and renyi_to_truth are divergences from the estimated Gaussian law to the
true one; at alpha = 1 the Renyi column reports the KL limit.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .diverge import kl_gaussian, renyi_gaussian
from .errors import FghsError, ParameterDomainError
from .matcore import DiagMode, frobenius_dist_sq
from .rngdist import derive_seed
from .sampler import SamplerConfig, run_chain
from .scenarios import Scenario, generate_data, scenario_truth

__all__ = [
    "ReplicateResult",
    "AggregateRow",
    "TrendRow",
    "run_grid",
    "aggregate",
    "concentration_sweep",
    "write_results_csv",
    "read_results_csv",
    "write_aggregate_csv",
    "write_trend_csv",
    "RESULTS_SCHEMA_TAG",
]

RESULTS_SCHEMA_TAG = "fghs results v1"

_RESULT_COLUMNS = (
    "scenario",
    "alpha",
    "p",
    "replicate",
    "frob_sq_raw",
    "frob_sq_per_entry",
    "frob_sq_psd",
    "kl_to_truth",
    "renyi_to_truth",
    "runtime_seconds",
    "clamp_events",
    "status",
)


@dataclass(frozen=True)
class ReplicateResult:
    """Metrics of one (scenario, alpha, replicate) cell."""

    scenario: str
    alpha: float
    p: int
    replicate: int
    frob_sq_raw: float
    frob_sq_per_entry: float
    frob_sq_psd: float
    kl_to_truth: float
    renyi_to_truth: float
    runtime_seconds: float
    clamp_events: int
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def __post_init__(self):
        if self.ok:
            vals = (
                self.frob_sq_raw,
                self.frob_sq_per_entry,
                self.frob_sq_psd,
                self.kl_to_truth,
                self.renyi_to_truth,
            )
            if not all(math.isfinite(v) and v >= 0.0 for v in vals):
                raise ParameterDomainError("ok replicate carries non-finite or negative metrics")


@dataclass(frozen=True)
class AggregateRow:
    """Moments of one (scenario, alpha) cell over its ok replicates.

    mean_err and mean_err_psd are per-entry squared Frobenius errors;
    sd_err is the ddof=1 standard deviation of the per-entry error, None
    when fewer than two replicates survived.
    """

    scenario: str
    alpha: float
    n_reps: int
    dropped: int
    mean_err: float
    sd_err: float | None
    mean_err_psd: float
    mean_kl: float
    mean_renyi: float


@dataclass(frozen=True)
class TrendRow:
    """One sample size of a concentration sweep (raw squared errors)."""

    n: int
    n_reps: int
    dropped: int
    mean_err: float
    sd_err: float | None


def _sanitize(msg: str) -> str:
    return msg.replace(",", ";").replace("\n", " ")[:200]


def _run_cell(args) -> ReplicateResult:
    (scenario, alpha, replicate, si, ai, n_iter, burn_in, thin, diag_value, master_seed) = args
    seed_root = scenario.master_seed if master_seed is None else master_seed
    try:
        y = generate_data(scenario, replicate, seed_root)
        truth = np.asarray(scenario_truth(scenario, seed_root))
        cfg = SamplerConfig(
            alpha=alpha,
            n_iter=n_iter,
            burn_in=burn_in,
            thin=thin,
            diag_mode=DiagMode(diag_value),
            seed=derive_seed(seed_root, 2, si, ai, replicate),
        )
        out = run_chain(y, cfg)
        raw = frobenius_dist_sq(out.mean_omega, truth)
        psd = frobenius_dist_sq(out.mean_omega_psd, truth)
        kl = kl_gaussian(out.mean_omega, truth)
        renyi = kl if alpha == 1.0 else renyi_gaussian(out.mean_omega, truth, alpha)
        return ReplicateResult(
            scenario=scenario.name,
            alpha=alpha,
            p=scenario.p,
            replicate=replicate,
            frob_sq_raw=raw,
            frob_sq_per_entry=raw / scenario.p**2,
            frob_sq_psd=psd,
            kl_to_truth=kl,
            renyi_to_truth=renyi,
            runtime_seconds=out.runtime_seconds,
            clamp_events=out.clamp_events,
            status="ok",
        )
    except Exception as exc:  # cell isolation: one bad draw must not kill a grid
        return ReplicateResult(
            scenario=scenario.name,
            alpha=alpha,
            p=scenario.p,
            replicate=replicate,
            frob_sq_raw=float("nan"),
            frob_sq_per_entry=float("nan"),
            frob_sq_psd=float("nan"),
            kl_to_truth=float("nan"),
            renyi_to_truth=float("nan"),
            runtime_seconds=float("nan"),
            clamp_events=0,
            status=_sanitize(f"failed: {type(exc).__name__}: {exc}"),
        )


def run_grid(
    scenarios: list[Scenario],
    alphas: list[float],
    *,
    replicates: int | None = None,
    n_iter: int = 1100,
    burn_in: int = 100,
    thin: int = 1,
    diag_mode: DiagMode = DiagMode.FREE,
    master_seed: int | None = None,
    jobs: int = 1,
) -> list[ReplicateResult]:
    """Run every (scenario, alpha, replicate) cell; returns results in grid
    order regardless of jobs. `replicates=None` takes each scenario's own
    count; `master_seed=None` takes each scenario's own seed."""
    if not scenarios or not alphas:
        raise ParameterDomainError("need at least one scenario and one alpha")
    for alpha in alphas:
        if not (0.0 < alpha <= 1.0):
            raise ParameterDomainError(f"alpha must lie in (0, 1], got {alpha}")
    if jobs < 1:
        raise ParameterDomainError("jobs must be >= 1")

    tasks = []
    for si, scenario in enumerate(scenarios):
        reps = scenario.replicates if replicates is None else replicates
        for ai, alpha in enumerate(alphas):
            for k in range(reps):
                tasks.append(
                    (scenario, alpha, k, si, ai, n_iter, burn_in, thin,
                     diag_mode.value, master_seed)
                )
    if jobs == 1:
        return [_run_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, tasks, chunksize=1))


def aggregate(results: list[ReplicateResult]) -> list[AggregateRow]:
    """Collapse replicate rows into per-(scenario, alpha) moments, keeping
    first-appearance order."""
    order: list[tuple[str, float]] = []
    groups: dict[tuple[str, float], list[ReplicateResult]] = {}
    for r in results:
        key = (r.scenario, r.alpha)
        if key not in groups:
            order.append(key)
            groups[key] = []
        groups[key].append(r)

    rows = []
    for key in order:
        cell = groups[key]
        good = [r for r in cell if r.ok]
        dropped = len(cell) - len(good)
        if not good:
            rows.append(AggregateRow(key[0], key[1], 0, dropped,
                                     float("nan"), None, float("nan"),
                                     float("nan"), float("nan")))
            continue
        per_entry = np.array([r.frob_sq_per_entry for r in good])
        psd_per_entry = np.array([r.frob_sq_psd / r.p**2 for r in good])
        rows.append(
            AggregateRow(
                scenario=key[0],
                alpha=key[1],
                n_reps=len(good),
                dropped=dropped,
                mean_err=float(per_entry.mean()),
                sd_err=float(per_entry.std(ddof=1)) if len(good) > 1 else None,
                mean_err_psd=float(psd_per_entry.mean()),
                mean_kl=float(np.mean([r.kl_to_truth for r in good])),
                mean_renyi=float(np.mean([r.renyi_to_truth for r in good])),
            )
        )
    return rows


def concentration_sweep(
    scenario: Scenario,
    n_values: list[int],
    *,
    alpha: float = 0.9,
    replicates: int | None = None,
    n_iter: int = 1100,
    burn_in: int = 100,
    thin: int = 1,
    master_seed: int | None = None,
    jobs: int = 1,
) -> tuple[list[TrendRow], float]:
    """Re-run one scenario over increasing sample sizes with its truth held
    fixed. Returns per-n moments of the raw squared error and the slope of
    log mean error against log n (clean 1/n decay gives about -1)."""
    if len(n_values) < 2 or sorted(set(n_values)) != list(n_values):
        raise ParameterDomainError("n_values must be strictly increasing, length >= 2")
    cells = [replace(scenario, n=n, name=f"{scenario.name}[n={n}]") for n in n_values]
    results = run_grid(
        cells, [alpha], replicates=replicates, n_iter=n_iter, burn_in=burn_in,
        thin=thin, master_seed=master_seed, jobs=jobs,
    )
    rows = []
    for n, cell in zip(n_values, cells):
        good = [r for r in results if r.scenario == cell.name and r.ok]
        total = [r for r in results if r.scenario == cell.name]
        errs = np.array([r.frob_sq_raw for r in good])
        rows.append(
            TrendRow(
                n=n,
                n_reps=len(good),
                dropped=len(total) - len(good),
                mean_err=float(errs.mean()) if len(good) else float("nan"),
                sd_err=float(errs.std(ddof=1)) if len(good) > 1 else None,
            )
        )
    valid = [(r.n, r.mean_err) for r in rows if r.n_reps > 0 and r.mean_err > 0.0]
    if len(valid) < 2:
        raise FghsError("concentration sweep has fewer than two usable sample sizes")
    slope = float(np.polyfit(np.log([n for n, _ in valid]),
                             np.log([e for _, e in valid]), 1)[0])
    return rows, slope


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".17g")
    return str(value)


def write_results_csv(path, results: list[ReplicateResult]) -> None:
    """Replicate-level CSV; first line carries the schema tag."""
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(f"# {RESULTS_SCHEMA_TAG}\n")
        writer = csv.writer(fh)
        writer.writerow(_RESULT_COLUMNS)
        for r in results:
            writer.writerow([_fmt(getattr(r, c)) for c in _RESULT_COLUMNS])


def read_results_csv(path) -> list[ReplicateResult]:
    """Inverse of write_results_csv."""
    with open(path, newline="", encoding="ascii") as fh:
        first = fh.readline().strip()
        if first != f"# {RESULTS_SCHEMA_TAG}":
            raise FghsError(f"{path}: missing schema tag {RESULTS_SCHEMA_TAG!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != _RESULT_COLUMNS:
            raise FghsError(f"{path}: unexpected column layout")
        out = []
        for row in reader:
            vals = dict(zip(_RESULT_COLUMNS, row))
            out.append(
                ReplicateResult(
                    scenario=vals["scenario"],
                    alpha=float(vals["alpha"]),
                    p=int(vals["p"]),
                    replicate=int(vals["replicate"]),
                    frob_sq_raw=float(vals["frob_sq_raw"] or "nan"),
                    frob_sq_per_entry=float(vals["frob_sq_per_entry"] or "nan"),
                    frob_sq_psd=float(vals["frob_sq_psd"] or "nan"),
                    kl_to_truth=float(vals["kl_to_truth"] or "nan"),
                    renyi_to_truth=float(vals["renyi_to_truth"] or "nan"),
                    runtime_seconds=float(vals["runtime_seconds"] or "nan"),
                    clamp_events=int(vals["clamp_events"]),
                    status=vals["status"],
                )
            )
        return out


def write_aggregate_csv(path, rows: list[AggregateRow]) -> None:
    cols = ("scenario", "alpha", "n_reps", "dropped", "mean_err", "sd_err",
            "mean_err_psd", "mean_kl", "mean_renyi")
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(f"# {RESULTS_SCHEMA_TAG} aggregate\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in cols])


def write_trend_csv(path, rows: list[TrendRow], slope: float) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(f"# {RESULTS_SCHEMA_TAG} trend, log-log slope = {_fmt(slope)}\n")
        writer = csv.writer(fh)
        writer.writerow(("n", "n_reps", "dropped", "mean_err", "sd_err"))
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in ("n", "n_reps", "dropped", "mean_err", "sd_err")])
