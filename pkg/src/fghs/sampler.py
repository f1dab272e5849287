"""Blocked Gibbs sampler for precision-matrix estimation under an
element-wise horseshoe prior, with the likelihood tempered by a power
alpha in (0, 1].

Tempering enters only through the sufficient statistics: raising the
Gaussian likelihood to alpha is the same as replacing (Y^T Y, n) by
(alpha Y^T Y, alpha n). Every conditional below is therefore written as a
function of the effective pair (s_eff, n_eff) and the sampler has a single
code path for all alpha; `column_conditional_params` and
`shrinkage_conditional_params` expose the conditional parameters so the
identity can be checked directly against the alpha = 1 path.

One sweep updates each column/row block of omega in turn, then the local
shrinkage scales, then the global scale:

- column i given the rest: with the partition that puts index i last,
  beta = omega[-i, i] is Gaussian,
      beta ~ N(-C s_eff[-i, i], C),
      C = (s_eff[i, i] * inv(omega[-i, -i]) + diag(1 / (lambda_sq tau_sq)))^-1.
  In FREE diagonal mode gamma = omega[i, i] - beta' inv(omega[-i, -i]) beta
  is drawn Gamma(n_eff/2 + 1, rate s_eff[i, i]/2), which keeps every iterate
  positive definite by construction. In FIXED_UNIT mode omega[i, i] stays
  pinned at 1 and only beta is drawn; the Gaussian block is then the usual
  large-n surrogate for the unit-diagonal conditional (the log-det term is
  linearized), so FIXED_UNIT chains are approximate and meant for small
  problems and diagnostics.
- lambda_sq[i, j] | rest ~ InvGamma(1, 1/nu[i, j] + omega[i, j]^2 / (2 tau_sq))
  and nu[i, j] | rest ~ InvGamma(1, 1 + 1/lambda_sq[i, j]) for i < j,
- tau_sq | rest ~ InvGamma((m + 1)/2, 1/xi + sum omega[i, j]^2 / (2 lambda_sq[i, j]))
  with m = p (p - 1) / 2, then xi | rest ~ InvGamma(1, 1 + 1/tau_sq).

Every scale draw is clamped to [1e-12, 1e12]; clamp events are counted and
reported on the chain output. FREE mode keeps sigma = inv(omega) current
across the column loop with rank-one updates (a sweep is O(p^3) overall)
and re-inverts once per sweep to stop rounding drift.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NotPositiveDefiniteError, ParameterDomainError
from .matcore import DiagMode, log_det, nearest_psd
from .rngdist import RngStream

__all__ = [
    "SamplerConfig",
    "ShrinkageState",
    "ChainOutput",
    "sufficient_stats",
    "gibbs_sweep",
    "run_chain",
    "run_fixed_scale_chain",
    "log_posterior_unnorm",
    "column_conditional_params",
    "shrinkage_conditional_params",
    "SCALE_FLOOR",
    "SCALE_CEIL",
]

SCALE_FLOOR = 1e-12
SCALE_CEIL = 1e12

# half the log-density constant of a standard half-Cauchy: log(2/pi)
_LOG_TWO_OVER_PI = float(np.log(2.0 / np.pi))


@dataclass(frozen=True)
class SamplerConfig:
    """Chain settings. Defaults give the committed baseline schedule:
    1100 sweeps, the first 100 discarded, no thinning."""

    alpha: float
    n_iter: int = 1100
    burn_in: int = 100
    thin: int = 1
    diag_mode: DiagMode = DiagMode.FREE
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ParameterDomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.n_iter < 1:
            raise ParameterDomainError("n_iter must be >= 1")
        if not (0 <= self.burn_in < self.n_iter):
            raise ParameterDomainError("burn_in must satisfy 0 <= burn_in < n_iter")
        if self.thin < 1:
            raise ParameterDomainError("thin must be >= 1")
        if (self.n_iter - self.burn_in) // self.thin < 1:
            raise ParameterDomainError("schedule keeps no samples; lower thin or burn_in")

    @property
    def samples_kept(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin


@dataclass
class ShrinkageState:
    """Horseshoe scales: local lambda_sq/nu per off-diagonal pair (stored as
    full symmetric matrices; diagonals are unused) plus global tau_sq/xi."""

    lambda_sq: np.ndarray
    nu: np.ndarray
    tau_sq: float
    xi: float

    def __post_init__(self):
        p = self.lambda_sq.shape[0]
        if self.lambda_sq.shape != (p, p) or self.nu.shape != (p, p):
            raise DimensionMismatchError("lambda_sq and nu must be square and same shape")
        iu = np.triu_indices(p, 1)
        for name, arr in (("lambda_sq", self.lambda_sq), ("nu", self.nu)):
            vals = arr[iu]
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
                raise ParameterDomainError(f"{name} must be positive and finite off the diagonal")
        for name, val in (("tau_sq", self.tau_sq), ("xi", self.xi)):
            if not np.isfinite(val) or val <= 0.0:
                raise ParameterDomainError(f"{name} must be positive and finite")

    @classmethod
    def initial(cls, p: int) -> "ShrinkageState":
        """All scales start at 1."""
        return cls(np.ones((p, p)), np.ones((p, p)), 1.0, 1.0)


@dataclass
class ChainOutput:
    """Posterior summaries of one chain.

    mean_omega averages the kept iterates; mean_omega_psd is its projection
    onto the PSD cone; per_entry_variance is the entrywise sample variance
    (denominator = samples kept). clamp_events counts scale draws that hit
    the [1e-12, 1e12] guard.
    """

    mean_omega: np.ndarray
    mean_omega_psd: np.ndarray
    per_entry_variance: np.ndarray
    samples_kept: int
    runtime_seconds: float
    clamp_events: int
    config: SamplerConfig


def sufficient_stats(y: np.ndarray, alpha: float) -> tuple[np.ndarray, float]:
    """Effective scatter and sample size (alpha * Y'Y, alpha * n).

    These are the only quantities through which the data and the tempering
    power reach the conditionals.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise DimensionMismatchError(f"data must be 2-D (n, p), got shape {y.shape}")
    n, p = y.shape
    if n < 1 or p < 2:
        raise DimensionMismatchError(f"need n >= 1 and p >= 2, got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ParameterDomainError("data contains non-finite entries")
    if not (0.0 < alpha <= 1.0):
        raise ParameterDomainError(f"alpha must lie in (0, 1], got {alpha}")
    s = y.T @ y
    s_eff = alpha * (s + s.T) * 0.5
    return s_eff, alpha * n


def _gaussian_block_precision(m_inv11, s22, prior_var):
    """Conditional precision of a column block: s22 * inv(omega_11) plus the
    diagonal of reciprocal prior variances."""
    inv_c = s22 * m_inv11
    k = inv_c.shape[0]
    inv_c.flat[:: k + 1] += 1.0 / prior_var
    return inv_c


# Raw LAPACK handles: the column loop runs tens of thousands of small
# factorizations per chain and the scipy wrapper checks would dominate.
_POTRF, _POTRS, _POTRI, _TRTRS = scipy.linalg.get_lapack_funcs(
    ("potrf", "potrs", "potri", "trtrs"), (np.empty(0, dtype=np.float64),)
)


def _chol(a) -> np.ndarray:
    """Factor an internal conditional precision (lower triangle; the upper
    is left untouched). Heavy shrinkage makes these matrices legitimately
    ill-conditioned (prior precisions up to 1e24), so only LAPACK's own
    failure counts as not positive definite here; the stricter
    relative-pivot contract stays on the public cholesky."""
    lc, info = _POTRF(a, lower=1, overwrite_a=1, clean=0)
    if info != 0:
        raise NotPositiveDefiniteError("conditional precision failed factorization")
    return lc


def _inv(a) -> np.ndarray:
    """Inverse of an internal PD matrix; exactly symmetrized."""
    lc = _chol(np.array(a))
    inv, info = _POTRI(lc, lower=1, overwrite_c=1)
    if info != 0:
        raise NotPositiveDefiniteError("inverse from factor failed")
    lower = np.tril(inv)
    return lower + np.tril(inv, -1).T


@functools.lru_cache(maxsize=8)
def _column_views(p: int):
    """Per-column complements 0..p-1 and their open-mesh index pairs."""
    out = []
    for i in range(p):
        idx = np.concatenate((np.arange(i), np.arange(i + 1, p)))
        out.append((idx, np.ix_(idx, idx)))
    return tuple(out)


def _clamp_scales(arr) -> int:
    """Clip scale draws into [SCALE_FLOOR, SCALE_CEIL]; returns events."""
    events = int(np.count_nonzero((arr < SCALE_FLOOR) | (arr > SCALE_CEIL)))
    np.clip(arr, SCALE_FLOOR, SCALE_CEIL, out=arr)
    return events


def gibbs_sweep(
    omega: np.ndarray,
    state: ShrinkageState,
    s_eff: np.ndarray,
    n_eff: float,
    rng,
    diag_mode: DiagMode = DiagMode.FREE,
    *,
    sigma: np.ndarray | None = None,
    update_scales: bool = True,
) -> int:
    """One full sweep, updating ``omega`` and ``state`` in place.

    ``rng`` is an RngStream or numpy Generator. In FREE mode ``sigma`` must
    hold inv(omega) on entry and is maintained through the column updates;
    pass None to have it computed here. Returns the clamp-event count.
    """
    gen = rng.generator if isinstance(rng, RngStream) else rng
    p = omega.shape[0]
    free = diag_mode is DiagMode.FREE
    if free and sigma is None:
        sigma = _inv(omega)

    lam_sq = state.lambda_sq
    tau_sq = state.tau_sq

    for i, (idx, mesh) in enumerate(_column_views(p)):
        s12 = s_eff[idx, i]
        s22 = s_eff[i, i]
        if free:
            if s22 <= 0.0:
                raise ParameterDomainError(
                    f"column {i} has zero effective scatter; diagonal draw undefined"
                )
            sig12 = sigma[idx, i]
            m_inv11 = sigma[mesh]
            m_inv11 -= sig12[:, None] * (sig12 / sigma[i, i])
        else:
            m_inv11 = _inv(omega[mesh])

        inv_c = _gaussian_block_precision(m_inv11, s22, lam_sq[idx, i] * tau_sq)
        lc = _chol(inv_c)
        mu, info = _POTRS(lc, s12, lower=1)
        if info != 0:
            raise NotPositiveDefiniteError("conditional mean solve failed")
        z = gen.standard_normal(p - 1)
        noise, info = _TRTRS(lc, z, lower=1, trans=1)
        if info != 0:
            raise NotPositiveDefiniteError("conditional noise solve failed")
        beta = noise - mu

        omega[idx, i] = beta
        omega[i, idx] = beta
        if free:
            gam = gen.standard_gamma(0.5 * n_eff + 1.0) / (0.5 * s22)
            mb = m_inv11 @ beta
            omega[i, i] = gam + beta @ mb
            # rank-one refresh keeps sigma = inv(omega) after this column
            mbg = mb / gam
            m_inv11 += mb[:, None] * mbg
            sigma[mesh] = m_inv11
            sigma[idx, i] = -mbg
            sigma[i, idx] = -mbg
            sigma[i, i] = 1.0 / gam
        else:
            omega[i, i] = 1.0

    if not update_scales:
        return 0

    events = 0
    iu = np.triu_indices(p, 1)
    m = len(iu[0])
    om_sq = omega[iu] ** 2

    rate_lam = 1.0 / state.nu[iu] + om_sq / (2.0 * tau_sq)
    lam_new = rate_lam / gen.standard_gamma(1.0, size=m)
    events += _clamp_scales(lam_new)
    nu_new = (1.0 + 1.0 / lam_new) / gen.standard_gamma(1.0, size=m)
    events += _clamp_scales(nu_new)

    rate_tau = 1.0 / state.xi + 0.5 * float(np.sum(om_sq / lam_new))
    tau_draw = np.array([rate_tau / gen.standard_gamma(0.5 * (m + 1.0))])
    events += _clamp_scales(tau_draw)
    xi_draw = np.array([(1.0 + 1.0 / tau_draw[0]) / gen.standard_gamma(1.0)])
    events += _clamp_scales(xi_draw)

    lam_full = state.lambda_sq
    nu_full = state.nu
    lam_full[iu] = lam_new
    lam_full[iu[1], iu[0]] = lam_new
    nu_full[iu] = nu_new
    nu_full[iu[1], iu[0]] = nu_new
    state.tau_sq = float(tau_draw[0])
    state.xi = float(xi_draw[0])
    return events


def run_chain(y: np.ndarray, config: SamplerConfig) -> ChainOutput:
    """Run one chain from the fixed start (omega = I, all scales 1).

    Keeps every ``thin``-th sweep after burn-in, so exactly
    ``(n_iter - burn_in) // thin`` samples enter the summaries.
    """
    t0 = time.perf_counter()
    s_eff, n_eff = sufficient_stats(y, config.alpha)
    p = s_eff.shape[0]
    gen = RngStream(config.seed, 0).generator

    omega = np.eye(p)
    sigma = np.eye(p) if config.diag_mode is DiagMode.FREE else None
    state = ShrinkageState.initial(p)

    total = np.zeros((p, p))
    total_sq = np.zeros((p, p))
    kept = 0
    clamp_events = 0

    for t in range(config.n_iter):
        try:
            clamp_events += gibbs_sweep(
                omega, state, s_eff, n_eff, gen, config.diag_mode, sigma=sigma
            )
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(f"sweep {t}: {exc}") from exc
        if sigma is not None:
            # fresh inverse once per sweep; rank-one updates carry it within one
            sigma = _inv(omega)
        if t >= config.burn_in and (t - config.burn_in) % config.thin == config.thin - 1:
            total += omega
            total_sq += omega * omega
            kept += 1

    assert kept == config.samples_kept
    mean = total / kept
    var = np.maximum(total_sq / kept - mean * mean, 0.0)
    return ChainOutput(
        mean_omega=mean,
        mean_omega_psd=nearest_psd(mean),
        per_entry_variance=var,
        samples_kept=kept,
        runtime_seconds=time.perf_counter() - t0,
        clamp_events=clamp_events,
        config=config,
    )


def run_fixed_scale_chain(
    s_eff: np.ndarray,
    n_eff: float,
    lambda_sq: np.ndarray,
    tau_sq: float,
    *,
    n_iter: int,
    burn_in: int,
    seed: int = 0,
    thin: int = 1,
    diag_mode: DiagMode = DiagMode.FIXED_UNIT,
) -> np.ndarray:
    """Diagnostic chain with the shrinkage scales frozen.

    Returns the kept upper-triangle samples, shape (kept, p(p-1)/2). Used to
    compare the sweep's invariant law against grid oracles on tiny p, where
    the fixed scales make the target density explicit.
    """
    p = s_eff.shape[0]
    state = ShrinkageState(np.asarray(lambda_sq, dtype=float).copy(), np.ones((p, p)), tau_sq, 1.0)
    gen = RngStream(seed, 0).generator
    omega = np.eye(p)
    sigma = np.eye(p) if diag_mode is DiagMode.FREE else None
    iu = np.triu_indices(p, 1)
    out = []
    for t in range(n_iter):
        gibbs_sweep(omega, state, s_eff, n_eff, gen, diag_mode, sigma=sigma, update_scales=False)
        if sigma is not None:
            sigma = _inv(omega)
        if t >= burn_in and (t - burn_in) % thin == thin - 1:
            out.append(omega[iu].copy())
    return np.array(out)


def log_posterior_unnorm(
    omega: np.ndarray,
    state: ShrinkageState,
    s_eff: np.ndarray,
    n_eff: float,
    *,
    validate: bool = True,
) -> float:
    """Unnormalized log posterior density at (omega, scales).

    Tempered likelihood plus the Gaussian log-prior of each off-diagonal
    given its scales and the half-Cauchy log-densities of the local and
    global scales. Diagnostics only; the sampler never evaluates this.
    """
    ld = log_det(omega, validate=validate)
    ll = 0.5 * n_eff * ld - 0.5 * float(np.sum(s_eff * omega))

    p = omega.shape[0]
    iu = np.triu_indices(p, 1)
    var = state.lambda_sq[iu] * state.tau_sq
    om = omega[iu]
    lp = float(np.sum(-0.5 * np.log(2.0 * np.pi * var) - om * om / (2.0 * var)))
    lam_sq = state.lambda_sq[iu]
    lp += float(np.sum(_LOG_TWO_OVER_PI - np.log1p(lam_sq)))
    lp += _LOG_TWO_OVER_PI - float(np.log1p(state.tau_sq))
    return ll + lp


@dataclass(frozen=True)
class ColumnParams:
    """Parameters of one column block's conditional."""

    mean: np.ndarray
    precision: np.ndarray
    gamma_shape: float | None
    gamma_rate: float | None


def column_conditional_params(
    omega: np.ndarray,
    state: ShrinkageState,
    s_eff: np.ndarray,
    n_eff: float,
    i: int,
    diag_mode: DiagMode = DiagMode.FREE,
) -> ColumnParams:
    """Exact parameters of column i's conditional at the current state.

    Computed from scratch (no running inverse), so tests can compare the
    tempered route against the plain route parameter by parameter.
    """
    p = omega.shape[0]
    idx = np.concatenate((np.arange(i), np.arange(i + 1, p)))
    m_inv11 = _inv(omega[np.ix_(idx, idx)])
    s22 = s_eff[i, i]
    inv_c = _gaussian_block_precision(m_inv11, s22, state.lambda_sq[idx, i] * state.tau_sq)
    lc = _chol(inv_c.copy())
    mean = -scipy.linalg.cho_solve((lc, True), s_eff[idx, i], check_finite=False)
    if diag_mode is DiagMode.FREE:
        return ColumnParams(mean, inv_c, 0.5 * n_eff + 1.0, 0.5 * s22)
    return ColumnParams(mean, inv_c, None, None)


@dataclass(frozen=True)
class ShrinkageParams:
    """Rates (and shapes) of the scale conditionals at the current state."""

    lambda_shape: float
    lambda_rate: np.ndarray
    nu_shape: float
    nu_rate: np.ndarray
    tau_shape: float
    tau_rate: float
    xi_shape: float
    xi_rate: float


def shrinkage_conditional_params(omega: np.ndarray, state: ShrinkageState) -> ShrinkageParams:
    """Conditional parameters of the shrinkage stage given omega and state."""
    p = omega.shape[0]
    iu = np.triu_indices(p, 1)
    m = len(iu[0])
    om_sq = omega[iu] ** 2
    lam_rate = 1.0 / state.nu[iu] + om_sq / (2.0 * state.tau_sq)
    nu_rate = 1.0 + 1.0 / state.lambda_sq[iu]
    tau_rate = 1.0 / state.xi + 0.5 * float(np.sum(om_sq / state.lambda_sq[iu]))
    return ShrinkageParams(
        lambda_shape=1.0,
        lambda_rate=lam_rate,
        nu_shape=1.0,
        nu_rate=nu_rate,
        tau_shape=0.5 * (m + 1.0),
        tau_rate=tau_rate,
        xi_shape=1.0,
        xi_rate=1.0 + 1.0 / state.tau_sq,
    )
