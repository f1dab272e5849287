"""Simulation scenarios: ground-truth precision matrices, data laws, and a
small text format describing both.

A scenario fixes one truth matrix and a data law; replicates re-draw the
data only. Streams are split off the master seed by purpose: the truth uses
substream (0,), replicate k's data uses substream (1, k). Because data rows
are drawn in order, the first n rows of a larger-n replicate coincide with
the smaller-n replicate of the same index, which keeps sample-size sweeps
on common random numbers.

Truth kinds:
- "sparse": unit diagonal, s uniformly chosen off-diagonal pairs with
  magnitudes U(lo, hi) and random signs, then all off-diagonals scaled by
  the largest factor in (0, 1] that keeps the smallest eigenvalue at or
  above 0.05 (bisection; the factor is 1 when no rescue is needed),
- "dense": the equicorrelation family, covariance (1-rho) I + rho 11',
  inverted in closed form via the rank-one update,
- "file": a matrix loaded from the shared text format.

Data laws: "gaussian" draws N(0, inv(omega0)); "student_t" draws a
multivariate t with scale inv(omega0) and the scenario's df, so the data
covariance is df/(df-2) times inv(omega0).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    FormatError,
    InfeasibleSparsityError,
    ParameterDomainError,
)
from .matcore import DiagMode, PrecisionMatrix, load_matrix, min_eigenvalue, pd_inverse
from .rngdist import draw_mvn_from_precision, draw_mvt, substream

__all__ = [
    "Scenario",
    "make_sparse_truth",
    "make_dense_truth",
    "scenario_truth",
    "generate_data",
    "load_scenario",
    "save_scenario",
    "save_data",
    "load_data",
    "dense_table_scenario",
    "sparse_table_scenario",
    "MIN_EIG_TARGET",
]

# smallest eigenvalue the sparse truth construction guarantees
MIN_EIG_TARGET = 0.05

_TRUTH_KINDS = ("sparse", "dense", "file")
_LAWS = ("gaussian", "student_t")


@dataclass(frozen=True)
class Scenario:
    """One simulation cell description. Fields irrelevant to the chosen
    truth kind or law must stay None so files cannot carry dead settings."""

    name: str
    p: int
    n: int
    truth: str
    law: str = "gaussian"
    s: int | None = None
    magnitude_lo: float | None = None
    magnitude_hi: float | None = None
    rho: float | None = None
    truth_path: str | None = None
    df: float | None = None
    replicates: int = 50
    master_seed: int = 0

    def __post_init__(self):
        def need(cond, msg):
            if not cond:
                raise ParameterDomainError(f"scenario {self.name!r}: {msg}")

        need(bool(self.name) and "\n" not in self.name, "name must be a nonempty single line")
        need(self.p >= 2, "p must be >= 2")
        need(self.n >= 1, "n must be >= 1")
        need(self.replicates >= 1, "replicates must be >= 1")
        need(self.master_seed >= 0, "master_seed must be >= 0")
        need(self.truth in _TRUTH_KINDS, f"truth must be one of {_TRUTH_KINDS}")
        need(self.law in _LAWS, f"law must be one of {_LAWS}")

        sparse_fields = (self.s, self.magnitude_lo, self.magnitude_hi)
        if self.truth == "sparse":
            need(all(v is not None for v in sparse_fields), "sparse truth needs s and magnitudes")
            need(0.0 < self.magnitude_lo <= self.magnitude_hi, "need 0 < magnitude_lo <= magnitude_hi")
        else:
            need(all(v is None for v in sparse_fields), "s/magnitudes only apply to sparse truth")
        if self.truth == "dense":
            need(self.rho is not None, "dense truth needs rho")
            need(-1.0 / (self.p - 1) < self.rho < 1.0, "rho outside the positive definite range")
        else:
            need(self.rho is None, "rho only applies to dense truth")
        if self.truth == "file":
            need(bool(self.truth_path), "file truth needs truth_path")
        else:
            need(self.truth_path is None, "truth_path only applies to file truth")
        if self.law == "student_t":
            need(self.df is not None and self.df > 0.0, "student_t law needs df > 0")
        else:
            need(self.df is None, "df only applies to the student_t law")


def make_sparse_truth(
    p: int, s: int, magnitude_lo: float, magnitude_hi: float, rng
) -> PrecisionMatrix:
    """Unit-diagonal truth with exactly s nonzero off-diagonal pairs.

    Pairs are drawn uniformly without replacement, magnitudes from
    U(magnitude_lo, magnitude_hi) with independent random signs. If the
    smallest eigenvalue of I + O falls under MIN_EIG_TARGET, every
    off-diagonal is shrunk by the largest feasible factor in (0, 1];
    the support never changes.
    """
    if p < 2:
        raise ParameterDomainError("p must be >= 2")
    n_pairs = p * (p - 1) // 2
    if not (0 <= s <= n_pairs):
        raise InfeasibleSparsityError(f"s must lie in [0, {n_pairs}] for p = {p}, got {s}")
    if not (0.0 < magnitude_lo <= magnitude_hi):
        raise ParameterDomainError("need 0 < magnitude_lo <= magnitude_hi")

    iu = np.triu_indices(p, 1)
    chosen = rng.choice(n_pairs, size=s, replace=False)
    vals = rng.uniform(magnitude_lo, magnitude_hi, size=s)
    signs = np.where(rng.random(s) < 0.5, -1.0, 1.0)

    off = np.zeros((p, p))
    rows, cols = iu[0][chosen], iu[1][chosen]
    off[rows, cols] = vals * signs
    off[cols, rows] = off[rows, cols]

    def min_eig_at(c):
        return min_eigenvalue(np.eye(p) + c * off)

    scale = 1.0
    if s > 0 and min_eig_at(1.0) < MIN_EIG_TARGET:
        # min_eig_at is concave in c with value 1 at c = 0, so the feasible
        # region is an interval [0, c*]; bisect for its right edge.
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if min_eig_at(mid) >= MIN_EIG_TARGET:
                lo = mid
            else:
                hi = mid
        scale = lo

    omega = np.eye(p) + scale * off
    assert min_eigenvalue(omega) >= MIN_EIG_TARGET - 1e-12
    assert np.count_nonzero(omega[iu]) == s
    return PrecisionMatrix(omega, DiagMode.FIXED_UNIT)


def make_dense_truth(p: int, rho: float) -> PrecisionMatrix:
    """Inverse of the equicorrelation covariance (1-rho) I + rho 11'.

    Closed form by the rank-one inversion identity:
    omega = I/(1-rho) - rho / ((1-rho)(1 + (p-1) rho)) 11'.
    """
    if p < 2:
        raise ParameterDomainError("p must be >= 2")
    if not (-1.0 / (p - 1) < rho < 1.0):
        raise ParameterDomainError(f"rho = {rho} leaves the covariance indefinite for p = {p}")
    ones = np.ones((p, p))
    omega = np.eye(p) / (1.0 - rho) - (rho / ((1.0 - rho) * (1.0 + (p - 1) * rho))) * ones
    sigma = (1.0 - rho) * np.eye(p) + rho * ones
    assert np.max(np.abs(omega @ sigma - np.eye(p))) < 1e-10
    return PrecisionMatrix(omega, DiagMode.FREE)


@functools.lru_cache(maxsize=64)
def _cached_truth(scenario: Scenario, master_seed: int) -> PrecisionMatrix:
    if scenario.truth == "sparse":
        gen = substream(master_seed, 0)
        return make_sparse_truth(
            scenario.p, scenario.s, scenario.magnitude_lo, scenario.magnitude_hi, gen
        )
    if scenario.truth == "dense":
        return make_dense_truth(scenario.p, scenario.rho)
    mat = load_matrix(scenario.truth_path)
    if mat.shape != (scenario.p, scenario.p):
        raise FormatError(
            f"truth file {scenario.truth_path} has shape {mat.shape}, scenario says p = {scenario.p}"
        )
    return PrecisionMatrix(mat, DiagMode.FREE)


def scenario_truth(scenario: Scenario, master_seed: int | None = None) -> PrecisionMatrix:
    """The scenario's truth matrix; fixed given (scenario, master seed).

    Independent of n and of the replicate index, so the same truth serves a
    whole sample-size sweep. Cached per process; PrecisionMatrix instances
    are immutable so sharing is safe.
    """
    seed = scenario.master_seed if master_seed is None else master_seed
    return _cached_truth(scenario, seed)


def generate_data(scenario: Scenario, replicate: int, master_seed: int | None = None) -> np.ndarray:
    """Data matrix (n, p) for one replicate of the scenario."""
    if replicate < 0:
        raise ParameterDomainError("replicate index must be >= 0")
    seed = scenario.master_seed if master_seed is None else master_seed
    truth = scenario_truth(scenario, seed)
    gen = substream(seed, 1, replicate)
    if scenario.law == "gaussian":
        return draw_mvn_from_precision(gen, truth.values, size=scenario.n)
    scale = pd_inverse(np.asarray(truth))
    return draw_mvt(gen, scale, scenario.df, size=scenario.n)


def dense_table_scenario(law: str = "gaussian", replicates: int = 50, master_seed: int = 0) -> Scenario:
    """Equicorrelation benchmark cell: p = 50, n = 30, rho = 0.2."""
    return Scenario(
        name=f"dense-{'t3' if law == 'student_t' else 'gaussian'}",
        p=50,
        n=30,
        truth="dense",
        rho=0.2,
        law=law,
        df=3.0 if law == "student_t" else None,
        replicates=replicates,
        master_seed=master_seed,
    )


def sparse_table_scenario(law: str = "gaussian", replicates: int = 50, master_seed: int = 0) -> Scenario:
    """Sparse benchmark cell: p = 100, n = 30, s = 86 pairs in [0.2, 0.6]."""
    return Scenario(
        name=f"sparse-{'t3' if law == 'student_t' else 'gaussian'}",
        p=100,
        n=30,
        truth="sparse",
        s=86,
        magnitude_lo=0.2,
        magnitude_hi=0.6,
        law=law,
        df=3.0 if law == "student_t" else None,
        replicates=replicates,
        master_seed=master_seed,
    )


_INT_KEYS = {"p", "n", "s", "replicates", "master_seed"}
_FLOAT_KEYS = {"magnitude_lo", "magnitude_hi", "rho", "df"}
_STR_KEYS = {"name", "truth", "law", "truth_path"}


def save_scenario(path, scenario: Scenario) -> None:
    """Write `key = value` lines; omitted keys are the inapplicable ones."""
    lines = []
    for key in (
        "name p n truth law s magnitude_lo magnitude_hi rho truth_path df replicates master_seed"
    ).split():
        val = getattr(scenario, key)
        if val is not None:
            lines.append(f"{key} = {val}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_scenario(path) -> Scenario:
    """Parse a scenario file. Unknown keys are errors, not warnings, so a
    typo cannot silently fall back to a default. A relative truth_path is
    resolved against the scenario file's directory."""
    path = Path(path)
    fields: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in fields:
            raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            if key in _INT_KEYS:
                fields[key] = int(value)
            elif key in _FLOAT_KEYS:
                fields[key] = float(value)
            elif key in _STR_KEYS:
                fields[key] = value
            else:
                raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError:
            raise FormatError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    for required in ("name", "p", "n", "truth"):
        if required not in fields:
            raise FormatError(f"{path}: missing required key {required!r}")
    try:
        scenario = Scenario(**fields)
    except ParameterDomainError as exc:
        raise FormatError(f"{path}: {exc}") from None
    except TypeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if scenario.truth_path is not None and not Path(scenario.truth_path).is_absolute():
        scenario = replace(scenario, truth_path=str(path.parent / scenario.truth_path))
    return scenario


def save_data(path, y: np.ndarray, *, comments=()) -> None:
    """Write a rectangular data matrix: '# ' comments, a line 'n p', then
    n rows of p values in '%.17g'."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ParameterDomainError(f"data must be 2-D, got shape {y.shape}")
    n, p = y.shape
    with open(path, "w", encoding="ascii") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(f"{n} {p}\n")
        for row in y:
            fh.write(" ".join(format(x, ".17g") for x in row))
            fh.write("\n")


def load_data(path) -> np.ndarray:
    """Read a data matrix written by save_data."""
    with open(path, encoding="ascii") as fh:
        body = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise FormatError(f"{path}: no data content")
    head = body[0].split()
    if len(head) != 2:
        raise FormatError(f"{path}: first line must be 'n p'")
    try:
        n, p = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(f"{path}: first line must be 'n p'") from None
    if len(body) != n + 1:
        raise FormatError(f"{path}: expected {n} rows, found {len(body) - 1}")
    rows = []
    for k, ln in enumerate(body[1:], start=1):
        parts = ln.split()
        if len(parts) != p:
            raise FormatError(f"{path}: row {k} has {len(parts)} values, expected {p}")
        try:
            rows.append([float(x) for x in parts])
        except ValueError:
            raise FormatError(f"{path}: row {k} contains a non-numeric token") from None
    return np.array(rows)
