"""Divergences between centered Gaussians specified by precision matrices.

All quantities are computed from Cholesky log-determinants and one
generalized eigenvalue problem; no covariance matrix is ever formed. With
P_k = N(0, inv(omega_k)):

- kl_gaussian(o1, o2) = KL(P1 || P2)
    = (log det o1 - log det o2 + tr(inv(o1) o2) - p) / 2,
- kl_variance_gaussian(o1, o2) = Var_{P1}[log dP1/dP2]
    = sum_i (1 - d_i)^2 / 2, with d_i the generalized eigenvalues of
    (o2, o1),
- renyi_gaussian(o1, o2, alpha), alpha in (0, 1):
    = [log det(alpha o1 + (1-alpha) o2)
       - alpha log det o1 - (1-alpha) log det o2] / (2 (1 - alpha)),
  which is nonnegative (log det is concave) and tends to KL(P1 || P2) as
  alpha -> 1,
- hellinger_sq_gaussian(o1, o2) = 1 - BC with Bhattacharyya coefficient
    BC = exp(log det o1 / 4 + log det o2 / 4 - log det((o1 + o2)/2) / 2),
  equivalently 1 - exp(-renyi(o1, o2, 1/2) / 2).

c_alpha is the constant multiplying divergence bounds derived from
tempered-posterior concentration: 1 on [1/2, 1), (1 - alpha)/alpha on
(0, 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, ParameterDomainError
from .matcore import as_sym, cholesky, frobenius_dist_sq, log_det

__all__ = [
    "DivergenceReport",
    "kl_gaussian",
    "kl_variance_gaussian",
    "renyi_gaussian",
    "hellinger_sq_gaussian",
    "c_alpha",
    "divergence_report",
]


def _pair(omega1, omega2):
    a = as_sym(omega1, name="first precision matrix")
    b = as_sym(omega2, name="second precision matrix")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"precision shapes differ: {a.shape} vs {b.shape}")
    return a, b


def kl_gaussian(omega1, omega2) -> float:
    """KL(N(0, inv(omega1)) || N(0, inv(omega2)))."""
    a, b = _pair(omega1, omega2)
    p = a.shape[0]
    la = cholesky(a, validate=False)
    ld_a = 2.0 * float(np.sum(np.log(np.diagonal(la))))
    ld_b = log_det(b, validate=False)
    trace = float(np.trace(scipy.linalg.cho_solve((la, True), b, check_finite=False)))
    # provably >= 0; the floor only absorbs last-bit rounding on equal inputs
    return max(0.5 * (ld_a - ld_b + trace - p), 0.0)


def kl_variance_gaussian(omega1, omega2) -> float:
    """Variance of the log-likelihood ratio log dP1/dP2 under P1.

    Equals sum (1 - d_i)^2 / 2 over the generalized eigenvalues of
    (omega2, omega1); zero exactly when the two laws coincide.
    """
    a, b = _pair(omega1, omega2)
    cholesky(a, validate=False)  # definiteness gate; eigh assumes it
    d = scipy.linalg.eigh(b, a, eigvals_only=True, check_finite=False)
    return 0.5 * float(np.sum((1.0 - d) ** 2))


def renyi_gaussian(omega1, omega2, alpha: float) -> float:
    """Renyi divergence of order alpha in (0, 1) between P1 and P2."""
    if not (0.0 < alpha < 1.0):
        raise ParameterDomainError(f"Renyi order must lie in (0, 1), got {alpha}")
    a, b = _pair(omega1, omega2)
    ld_a = log_det(a, validate=False)
    ld_b = log_det(b, validate=False)
    mix = alpha * a + (1.0 - alpha) * b
    ld_mix = log_det(mix, validate=False)
    val = (ld_mix - alpha * ld_a - (1.0 - alpha) * ld_b) / (2.0 * (1.0 - alpha))
    return max(val, 0.0)


def hellinger_sq_gaussian(omega1, omega2) -> float:
    """Squared Hellinger distance between P1 and P2, in [0, 1)."""
    a, b = _pair(omega1, omega2)
    ld_a = log_det(a, validate=False)
    ld_b = log_det(b, validate=False)
    ld_mix = log_det((a + b) * 0.5, validate=False)
    bc = np.exp(0.25 * ld_a + 0.25 * ld_b - 0.5 * ld_mix)
    return max(1.0 - float(bc), 0.0)


def c_alpha(alpha: float) -> float:
    """Tempering constant: 1 on [1/2, 1), (1 - alpha) / alpha on (0, 1/2)."""
    if not (0.0 < alpha < 1.0):
        raise ParameterDomainError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha >= 0.5:
        return 1.0
    return (1.0 - alpha) / alpha


@dataclass(frozen=True)
class DivergenceReport:
    """Bundle of pairwise divergences at a given Renyi order."""

    alpha: float
    kl: float
    kl_variance: float
    renyi: float
    hellinger_sq: float
    frobenius_sq: float

    def __post_init__(self):
        vals = (self.kl, self.kl_variance, self.renyi, self.hellinger_sq, self.frobenius_sq)
        if not all(np.isfinite(v) for v in vals):
            raise ParameterDomainError("divergence report contains non-finite values")
        if min(vals) < 0.0:
            raise ParameterDomainError("divergences must be nonnegative")
        if self.hellinger_sq > 1.0:
            raise ParameterDomainError("squared Hellinger distance cannot exceed 1")


def divergence_report(omega1, omega2, alpha: float) -> DivergenceReport:
    """All divergences between two precision matrices at Renyi order alpha."""
    a, b = _pair(omega1, omega2)
    return DivergenceReport(
        alpha=alpha,
        kl=kl_gaussian(a, b),
        kl_variance=kl_variance_gaussian(a, b),
        renyi=renyi_gaussian(a, b, alpha),
        hellinger_sq=hellinger_sq_gaussian(a, b),
        frobenius_sq=frobenius_dist_sq(a, b),
    )
