"""Sampler tests.

Oracles:
- the tempering identity is checked parameter-by-parameter: conditionals
  under (Y, alpha) must equal conditionals under the plain route fed the
  effective statistics,
- a grid-evaluated Gaussian conditional at p = 2 validates the column draw,
- a finite-difference gradient validates the log-posterior evaluator,
- a permutation of variable indices must leave error distributions alone.
"""

import numpy as np
import pytest

from fghs.matcore import DiagMode, frobenius_dist_sq, min_eigenvalue, pd_inverse
from fghs.errors import ParameterDomainError
from fghs.rngdist import RngStream, draw_mvn_from_precision
from fghs.sampler import (
    ChainOutput,
    SamplerConfig,
    ShrinkageState,
    column_conditional_params,
    gibbs_sweep,
    log_posterior_unnorm,
    run_chain,
    run_fixed_scale_chain,
    shrinkage_conditional_params,
    sufficient_stats,
)


def make_data(rng, n, p, omega=None):
    if omega is None:
        omega = np.eye(p)
    return draw_mvn_from_precision(rng, omega, size=n)


class TestSufficientStats:
    def test_hand_value(self):
        y = np.array([[1.0, 2.0], [3.0, 4.0]])
        s_eff, n_eff = sufficient_stats(y, 0.5)
        np.testing.assert_allclose(s_eff, 0.5 * y.T @ y)
        assert n_eff == 1.0

    def test_tempered_loglik_identity(self):
        # (n_eff/2) log det - tr(s_eff omega)/2 must equal alpha times the
        # plain expression, exactly to rounding, for any omega.
        rng = np.random.default_rng(42)
        for _ in range(25):
            n, p = rng.integers(3, 30), rng.integers(2, 6)
            y = rng.standard_normal((n, p))
            alpha = rng.uniform(0.05, 1.0)
            a = rng.standard_normal((p, p))
            omega = a @ a.T + p * np.eye(p)
            s, n_plain = sufficient_stats(y, 1.0)
            s_eff, n_eff = sufficient_stats(y, alpha)
            ld = np.linalg.slogdet(omega)[1]
            plain = 0.5 * n_plain * ld - 0.5 * np.sum(s * omega)
            tempered = 0.5 * n_eff * ld - 0.5 * np.sum(s_eff * omega)
            assert tempered == pytest.approx(alpha * plain, rel=1e-12)

    def test_alpha_domain(self):
        y = np.eye(3)
        with pytest.raises(ParameterDomainError):
            sufficient_stats(y, 0.0)
        with pytest.raises(ParameterDomainError):
            sufficient_stats(y, 1.5)

    def test_shape_domain(self):
        with pytest.raises(Exception):
            sufficient_stats(np.ones(5), 1.0)


class TestTemperingIdentity:
    def test_conditionals_match_effective_route(self):
        # Unit-level version of the acceptance identity: feed the plain
        # (alpha = 1) machinery alpha * S and alpha * n by hand and demand
        # equality of every conditional parameter.
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = int(rng.integers(3, 7))
            n = int(rng.integers(5, 40))
            y = rng.standard_normal((n, p))
            alpha = float(rng.uniform(0.05, 1.0))
            a = rng.standard_normal((p, p))
            omega = a @ a.T + p * np.eye(p)
            omega = (omega + omega.T) * 0.5
            state = ShrinkageState(
                np.exp(rng.standard_normal((p, p))),
                np.exp(rng.standard_normal((p, p))),
                float(np.exp(rng.standard_normal())),
                float(np.exp(rng.standard_normal())),
            )
            state.lambda_sq[:] = (state.lambda_sq + state.lambda_sq.T) * 0.5
            state.nu[:] = (state.nu + state.nu.T) * 0.5

            s_eff, n_eff = sufficient_stats(y, alpha)
            s_plain, n_plain = sufficient_stats(y, 1.0)
            for i in range(p):
                via_alpha = column_conditional_params(omega, state, s_eff, n_eff, i)
                via_manual = column_conditional_params(
                    omega, state, alpha * s_plain, alpha * n_plain, i
                )
                np.testing.assert_allclose(via_alpha.mean, via_manual.mean, rtol=1e-12)
                np.testing.assert_allclose(via_alpha.precision, via_manual.precision, rtol=1e-12)
                assert via_alpha.gamma_shape == via_manual.gamma_shape
                assert via_alpha.gamma_rate == via_manual.gamma_rate
            sh_a = shrinkage_conditional_params(omega, state)
            sh_b = shrinkage_conditional_params(omega, state)
            np.testing.assert_array_equal(sh_a.lambda_rate, sh_b.lambda_rate)
            assert sh_a.tau_rate == sh_b.tau_rate


class TestColumnDraw:
    def test_matches_grid_conditional_p2(self):
        # FIXED_UNIT, shrinkage effectively off: the kept value of
        # omega[0, 1] is an i.i.d. draw from N(-s12/s, 1/s) with s the
        # second diagonal of the effective scatter. Compare against the
        # grid-normalized density by KS.
        rng = np.random.default_rng(3)
        y = make_data(rng, 40, 2)
        s_eff, n_eff = sufficient_stats(y, 1.0)
        draws = run_fixed_scale_chain(
            s_eff, n_eff, np.full((2, 2), 1e12), 1.0, n_iter=6000, burn_in=0, seed=5
        )[:, 0]

        s12, s22 = s_eff[0, 1], s_eff[1, 1]
        grid = np.linspace(draws.min() - 0.2, draws.max() + 0.2, 4001)
        logpdf = -0.5 * s22 * (grid + s12 / s22) ** 2
        pdf = np.exp(logpdf - logpdf.max())
        cdf = np.cumsum(pdf)
        cdf /= cdf[-1]
        f = np.interp(np.sort(draws), grid, cdf)
        n = len(draws)
        ks = max(
            float(np.max(np.arange(1, n + 1) / n - f)),
            float(np.max(f - np.arange(0, n) / n)),
        )
        assert ks < 0.025

    def test_shrinkage_fully_on_pins_to_zero(self):
        # With prior variance 1e-10 the drawn off-diagonal collapses.
        rng = np.random.default_rng(11)
        y = make_data(rng, 50, 2)
        s_eff, n_eff = sufficient_stats(y, 1.0)
        draws = run_fixed_scale_chain(
            s_eff, n_eff, np.full((2, 2), 1e-10), 1.0, n_iter=50, burn_in=0, seed=6
        )
        assert np.max(np.abs(draws)) < 1e-4

    def test_free_mode_stays_positive_definite(self):
        rng = np.random.default_rng(13)
        y = make_data(rng, 10, 5)
        s_eff, n_eff = sufficient_stats(y, 0.7)
        omega = np.eye(5)
        sigma = np.eye(5)
        state = ShrinkageState.initial(5)
        gen = RngStream(8, 0).generator
        for _ in range(200):
            gibbs_sweep(omega, state, s_eff, n_eff, gen, DiagMode.FREE, sigma=sigma)
            sigma = pd_inverse(omega, validate=False)
        assert min_eigenvalue(omega) > 0.0

    def test_maintained_inverse_tracks_truth(self):
        # After a sweep the rank-one-updated sigma must equal inv(omega).
        rng = np.random.default_rng(17)
        y = make_data(rng, 30, 6)
        s_eff, n_eff = sufficient_stats(y, 1.0)
        omega = np.eye(6)
        sigma = np.eye(6)
        state = ShrinkageState.initial(6)
        gen = RngStream(9, 0).generator
        for _ in range(5):
            gibbs_sweep(omega, state, s_eff, n_eff, gen, DiagMode.FREE, sigma=sigma)
            np.testing.assert_allclose(sigma, np.linalg.inv(omega), atol=1e-10)


class TestShrinkageStage:
    def test_lambda_conditional_reciprocal_mean(self):
        # Near-zero omega, nu = 1, tau_sq = 1 gives lambda_sq ~ InvGamma(1, 1),
        # whose reciprocal has mean 1.
        rng = np.random.default_rng(19)
        y = make_data(rng, 25, 2)
        s_eff, n_eff = sufficient_stats(y, 1.0)
        gen = RngStream(23, 0).generator
        recip = np.empty(40_000)
        for k in range(len(recip)):
            omega = np.eye(2)
            state = ShrinkageState(np.full((2, 2), 1e-10), np.ones((2, 2)), 1.0, 1.0)
            gibbs_sweep(omega, state, s_eff, n_eff, gen, DiagMode.FIXED_UNIT)
            recip[k] = 1.0 / state.lambda_sq[0, 1]
        assert np.mean(recip) == pytest.approx(1.0, abs=0.01)

    def test_rate_formulas(self):
        omega = np.array([[1.0, 0.3, -0.2], [0.3, 1.0, 0.1], [-0.2, 0.1, 1.0]])
        state = ShrinkageState(
            np.full((3, 3), 2.0), np.full((3, 3), 0.5), 4.0, 0.25
        )
        params = shrinkage_conditional_params(omega, state)
        # pairs ordered (0,1), (0,2), (1,2)
        om_sq = np.array([0.09, 0.04, 0.01])
        np.testing.assert_allclose(params.lambda_rate, 1 / 0.5 + om_sq / 8.0)
        np.testing.assert_allclose(params.nu_rate, 1.0 + 0.5)
        assert params.tau_shape == pytest.approx(2.0)  # (3 + 1) / 2
        assert params.tau_rate == pytest.approx(4.0 + 0.5 * np.sum(om_sq / 2.0))
        assert params.xi_rate == pytest.approx(1.25)

    def test_clamp_counting(self):
        # A near-zero xi makes the tau_sq rate at least 1e12, so the draw
        # exceeds the ceiling whenever the gamma variate is below 1; a few
        # sweeps are enough to see at least one clamp event.
        rng = np.random.default_rng(29)
        y = rng.standard_normal((10, 2))
        s_eff, n_eff = sufficient_stats(y, 1.0)
        omega = np.eye(2)
        state = ShrinkageState(np.ones((2, 2)), np.ones((2, 2)), 1.0, 1e-12)
        gen = RngStream(29, 0).generator
        events = 0
        for _ in range(10):
            events += gibbs_sweep(omega, state, s_eff, n_eff, gen, DiagMode.FIXED_UNIT)
        assert events > 0
        assert state.tau_sq <= 1e12


class TestRunChain:
    def test_smoke_minimal(self):
        rng = np.random.default_rng(31)
        y = rng.standard_normal((1, 2))
        out = run_chain(y, SamplerConfig(alpha=1.0, n_iter=30, burn_in=5, seed=1))
        assert np.all(np.isfinite(out.mean_omega))
        assert out.samples_kept == 25

    def test_thinning_count(self):
        rng = np.random.default_rng(37)
        y = rng.standard_normal((8, 3))
        out = run_chain(y, SamplerConfig(alpha=0.5, n_iter=50, burn_in=10, thin=7, seed=2))
        assert out.samples_kept == (50 - 10) // 7

    def test_fixed_unit_mean_diag_exact(self):
        rng = np.random.default_rng(41)
        y = make_data(rng, 60, 3)
        cfg = SamplerConfig(
            alpha=0.9, n_iter=80, burn_in=20, diag_mode=DiagMode.FIXED_UNIT, seed=3
        )
        out = run_chain(y, cfg)
        np.testing.assert_array_equal(np.diagonal(out.mean_omega), np.ones(3))

    def test_outputs_contract(self):
        rng = np.random.default_rng(43)
        y = make_data(rng, 40, 4)
        out = run_chain(y, SamplerConfig(alpha=0.8, n_iter=120, burn_in=40, seed=4))
        assert isinstance(out, ChainOutput)
        assert np.all(out.per_entry_variance >= 0.0)
        assert min_eigenvalue(out.mean_omega_psd) >= -1e-10
        assert out.runtime_seconds > 0.0
        assert out.clamp_events >= 0

    def test_seed_reproducibility(self):
        rng = np.random.default_rng(47)
        y = make_data(rng, 30, 4)
        cfg = SamplerConfig(alpha=0.6, n_iter=100, burn_in=20, seed=11)
        a = run_chain(y, cfg)
        b = run_chain(y, cfg)
        np.testing.assert_array_equal(a.mean_omega, b.mean_omega)

    def test_alpha_continuity(self):
        # Nudging alpha by 1e-6 with a common seed must barely move the mean.
        rng = np.random.default_rng(53)
        y = make_data(rng, 25, 4)
        a = run_chain(y, SamplerConfig(alpha=1.0, n_iter=300, burn_in=50, seed=12))
        b = run_chain(y, SamplerConfig(alpha=1.0 - 1e-6, n_iter=300, burn_in=50, seed=12))
        assert np.max(np.abs(a.mean_omega - b.mean_omega)) < 1e-3

    def test_recovers_signal_better_than_identity(self):
        rng = np.random.default_rng(59)
        omega0 = np.eye(6)
        omega0[0, 1] = omega0[1, 0] = 0.45
        omega0[2, 3] = omega0[3, 2] = -0.4
        y = make_data(rng, 250, 6, omega0)
        out = run_chain(y, SamplerConfig(alpha=1.0, n_iter=400, burn_in=100, seed=13))
        assert frobenius_dist_sq(out.mean_omega, omega0) < frobenius_dist_sq(np.eye(6), omega0)

    def test_config_validation(self):
        with pytest.raises(ParameterDomainError):
            SamplerConfig(alpha=0.0)
        with pytest.raises(ParameterDomainError):
            SamplerConfig(alpha=0.5, n_iter=10, burn_in=10)
        with pytest.raises(ParameterDomainError):
            SamplerConfig(alpha=0.5, n_iter=10, burn_in=0, thin=11)


class TestLogPosterior:
    def test_gradient_by_finite_differences(self):
        rng = np.random.default_rng(61)
        p = 4
        y = rng.standard_normal((20, p))
        s_eff, n_eff = sufficient_stats(y, 0.7)
        a = rng.standard_normal((p, p))
        omega = a @ a.T + p * np.eye(p)
        omega = (omega + omega.T) * 0.5
        state = ShrinkageState.initial(p)

        # analytic gradient w.r.t. a symmetric off-diagonal perturbation:
        # n_eff * inv(omega)_ij - s_eff_ij - omega_ij / (lambda_sq tau_sq)
        inv = np.linalg.inv(omega)
        h = 1e-6
        for (i, j) in [(0, 1), (0, 3), (2, 3)]:
            want = n_eff * inv[i, j] - s_eff[i, j] - omega[i, j] / (
                state.lambda_sq[i, j] * state.tau_sq
            )
            op = omega.copy()
            op[i, j] += h
            op[j, i] += h
            om = omega.copy()
            om[i, j] -= h
            om[j, i] -= h
            got = (
                log_posterior_unnorm(op, state, s_eff, n_eff)
                - log_posterior_unnorm(om, state, s_eff, n_eff)
            ) / (2 * h)
            assert got == pytest.approx(want, rel=1e-5)

    def test_shift_invariance_of_comparisons(self):
        # Scaling both likelihood inputs by the same alpha shifts relative
        # log-densities proportionally; ordering of states is preserved.
        rng = np.random.default_rng(67)
        y = rng.standard_normal((15, 3))
        s1, m1 = sufficient_stats(y, 1.0)
        s2, m2 = sufficient_stats(y, 0.5)
        state = ShrinkageState.initial(3)
        omega_a = np.eye(3)
        omega_b = np.eye(3) * 1.4
        da = log_posterior_unnorm(omega_a, state, s1, m1) - log_posterior_unnorm(
            omega_b, state, s1, m1
        )
        db = log_posterior_unnorm(omega_a, state, s2, m2) - log_posterior_unnorm(
            omega_b, state, s2, m2
        )
        assert np.isfinite(da) and np.isfinite(db)


class TestExchangeability:
    def test_permuting_variables_leaves_error_distribution(self):
        # Relabeling coordinates of data and truth together must not move
        # the error distribution beyond noise.
        rng = np.random.default_rng(71)
        p, n, reps = 6, 40, 20
        omega0 = np.eye(p)
        omega0[0, 2] = omega0[2, 0] = 0.4
        omega0[1, 4] = omega0[4, 1] = -0.35
        perm = rng.permutation(p)
        omega0_perm = omega0[np.ix_(perm, perm)]

        def errors(truth, permute, seed_base):
            vals = []
            for k in range(reps):
                y = draw_mvn_from_precision(RngStream(1000 + k, 0), omega0, size=n)
                yp = y[:, perm] if permute else y
                cfg = SamplerConfig(alpha=0.9, n_iter=250, burn_in=50, seed=seed_base + k)
                out = run_chain(yp, cfg)
                vals.append(frobenius_dist_sq(out.mean_omega, truth))
            return np.array(vals)

        base = errors(omega0, permute=False, seed_base=0)
        permd = errors(omega0_perm, permute=True, seed_base=5000)
        se = np.sqrt(base.var(ddof=1) / reps + permd.var(ddof=1) / reps)
        assert abs(base.mean() - permd.mean()) < 2.0 * se
