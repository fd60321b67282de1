import numpy as np
import pytest

from nsfd.analysis import positivity_audit
from nsfd.errors import JacobianMissing, NegativeState
from nsfd.problems import get_problem, get_scheme
from nsfd.systems import (
    DEFAULT_STARTS,
    validate_components,
    SystemComponent,
    SystemProblem,
    SystemSchemeConfig,
    conserved_series,
    euler_system_map,
    get_system,
    integrate_system,
    lotka_volterra,
    plain_config,
    reference_system_solution,
    second_order_config,
    second_order_denominators,
    sirs,
    stability_thresholds,
    system_nsfd_step,
    system_step_map,
)


class TestSystemStep:
    def test_lv_plain_step_hand_arithmetic(self):
        # (2, 0.5) with h = 1/2, phi = h, beta = 1:
        #   x1 = (2 + 0.5*2*1)/(1 + 0.5*0.5) = 2.4
        #   y1 = (0.5 + 0.5*0.5*2)/(1 + 0.5*1) = 2/3
        lv = get_system("lv")
        out = system_nsfd_step(lv, plain_config(lv), np.array([2.0, 0.5]), 0.5)
        assert out[0] == pytest.approx(2.4, rel=1e-15)
        assert out[1] == pytest.approx(2.0 / 3.0, rel=1e-15)

    @pytest.mark.parametrize("h", [0.1, 1.0, 50.0])
    def test_lv_coexistence_fixed(self, h):
        lv = get_system("lv")
        out = system_nsfd_step(lv, second_order_config(lv), np.array([1.0, 1.0]), h)
        np.testing.assert_array_equal(out, [1.0, 1.0])

    @pytest.mark.parametrize("h", [0.1, 2.0, 40.0])
    def test_sirs_disease_free_state_fixed(self, h):
        s = get_system("sirs")
        out = system_nsfd_step(s, second_order_config(s), np.array([0.7, 0.0, 0.0]), h)
        np.testing.assert_array_equal(out, [0.7, 0.0, 0.0])

    def test_negative_state_rejected(self):
        lv = get_system("lv")
        with pytest.raises(NegativeState):
            system_nsfd_step(lv, plain_config(lv), np.array([1.0, -0.1]), 0.5)

    def test_zero_start_stays_zero(self):
        lv = get_system("lv")
        traj = integrate_system(lv, second_order_config(lv), (0.0, 0.0), 0.5, 20.0)
        assert np.all(traj.states == 0.0)

    def test_batched_states_match_scalar(self):
        lv = get_system("lv")
        cfg = second_order_config(lv)
        batch = np.array([[2.0, 0.5], [1.0, 1.0], [0.3, 4.0]])
        out = system_nsfd_step(lv, cfg, batch, 0.7)
        for i, s in enumerate(batch):
            np.testing.assert_allclose(out[i], system_nsfd_step(lv, cfg, s, 0.7), rtol=1e-15)


class TestConfigs:
    def test_weight_validation(self):
        with pytest.raises(ValueError):
            SystemSchemeConfig(alphas=(0.5,), betas=(0.5,), denominators=(None,))
        with pytest.raises(ValueError):
            SystemSchemeConfig(alphas=(0.0, 0.0), betas=(1.0,), denominators=(None, None))

    def test_jacobian_missing(self):
        lv = get_system("lv")
        bare = SystemProblem(name="bare", dim=2, F=lv.F, components=lv.components)
        with pytest.raises(JacobianMissing):
            second_order_denominators(bare, plain_config(bare))

    def test_component_count_checked(self):
        lv = get_system("lv")
        with pytest.raises(ValueError):
            SystemProblem(name="odd", dim=3, F=lv.F, components=lv.components)


class TestSecondOrderDenominators:
    def test_one_dimensional_reduction_matches_scalar_rate(self):
        # a dim-1 system wrapping the logistic equation must reproduce the
        # scalar rate lambda = -f' + 2*beta*f_minus wherever f != 0
        p = get_problem("logistic")
        b = get_scheme("logistic", "snsfd3")  # beta = 1 rep (2y, -y)
        sys1 = SystemProblem(
            name="logistic1d", dim=1,
            F=lambda s: np.stack([2.0 * np.asarray(s, float)[..., 0]
                                  - np.asarray(s, float)[..., 0] ** 2], axis=-1),
            components=(SystemComponent(
                form="affine",
                f_plus=lambda s: 2.0 * np.asarray(s, float)[..., 0],
                f_minus=lambda s: -np.asarray(s, float)[..., 0],
            ),),
            jacobian=lambda s: np.stack(
                [np.stack([2.0 - 2.0 * np.asarray(s, float)[..., 0]], axis=-1)], axis=-2),
        )
        dens = second_order_denominators(sys1, plain_config(sys1))
        scalar_lam = b.spec.lambda_fn
        for y in (0.1, 0.5, 1.5, 3.0, 9.0):
            got = float(dens[0].lambda_fn(np.array([y])))
            assert got == pytest.approx(float(scalar_lam(y)), rel=1e-12)

    def test_rate_zero_where_f_vanishes(self):
        lv = get_system("lv")
        dens = second_order_denominators(lv, plain_config(lv))
        assert float(dens[0].lambda_fn(np.array([1.0, 1.0]))) == 0.0

    def test_sirs_quick_rate_estimate(self):
        # cheap two-grid order probe; the full fit lives in the acceptance suite
        s = get_system("sirs")
        cfg = second_order_config(s)
        ref = reference_system_solution(s, DEFAULT_STARTS["sirs"], h_out=10.0, t_end=10.0,
                                        substeps=4000).final_state
        errs = []
        for h in (0.1, 0.01):
            traj = integrate_system(s, cfg, DEFAULT_STARTS["sirs"], h, 10.0)
            errs.append(float(np.max(np.abs(traj.final_state - ref))))
        rate = np.log(errs[0] / errs[1]) / np.log(10.0)
        assert 1.9 <= rate <= 2.1


class TestPositivityContrast:
    def test_lv_nsfd_nonnegative_where_euler_fails(self):
        lv = get_system("lv")
        euler = positivity_audit(euler_system_map(lv), np.array([[2.0, 0.5]]), [0.9], n_steps=50)
        assert not euler.passed
        nsfd = positivity_audit(system_step_map(lv, second_order_config(lv)),
                                np.array([[2.0, 0.5]]), [0.9], n_steps=2000)
        assert nsfd.passed

    def test_sirs_positivity_over_step_grid(self):
        s = get_system("sirs")
        step = system_step_map(s, second_order_config(s))
        starts = np.array([[0.9, 0.1, 0.0], [5.0, 3.0, 2.0], [0.0, 1.0, 0.0]])
        report = positivity_audit(step, starts, [0.1, 1.0, 10.0, 100.0], n_steps=2000)
        assert report.passed


class TestIntegrateSystem:
    def test_grid_shape_and_metadata(self):
        lv = get_system("lv")
        traj = integrate_system(lv, second_order_config(lv), (2.0, 0.5), 0.1, 2.0)
        assert traj.states.shape == (21, 2)
        assert traj.problem_name == "lv"

    def test_conserved_series(self):
        s = get_system("sirs")
        traj = integrate_system(s, second_order_config(s), DEFAULT_STARTS["sirs"], 0.1, 1.0)
        cons = conserved_series(s, traj)
        assert cons.shape == (11,)
        assert cons[0] == pytest.approx(1.0, rel=1e-15)
        # population total drifts only at the truncation level
        assert np.max(np.abs(cons - 1.0)) < 1e-3

    def test_lv_conserved_diagnostic_available(self):
        lv = get_system("lv")
        traj = integrate_system(lv, second_order_config(lv), (2.0, 0.5), 0.01, 1.0)
        cons = conserved_series(lv, traj)
        assert np.max(np.abs(cons - cons[0])) < 1e-3


class TestStabilityThresholds:
    def test_sirs_endemic_transverse_stability(self):
        # the endemic point sits on a line of equilibria (total population is
        # conserved), so one unit eigenvalue is structural; the transverse
        # modes must contract for every sampled step
        s = get_system("sirs")
        cfg = second_order_config(s)
        eq = s.equilibria[0]
        np.testing.assert_allclose(np.asarray(s.F(eq)), 0.0, atol=1e-15)
        tangent = [0.0, 1.0, 0.1 / 0.05]  # d/dI of (S*, I, gamma*I/mu)
        rows = stability_thresholds(s, cfg, eq, [0.1, 1.0, 10.0, 100.0],
                                    fixed_line_tangent=tangent)
        for row in rows:
            assert row.rho_full == pytest.approx(1.0, abs=1e-6)
            assert row.rho_transverse < 1.0

    def test_without_tangent_reports_full_radius(self):
        s = get_system("sirs")
        rows = stability_thresholds(s, second_order_config(s), s.equilibria[0], [1.0])
        assert rows[0].rho_transverse == rows[0].rho_full


class TestModelRegistry:
    def test_lv_parameterization(self):
        lv = lotka_volterra(a=0.67, b=1.33, c=1.0, e=1.0)
        eq = lv.equilibria[1]
        np.testing.assert_allclose(eq, [1.0, 0.67 / 1.33])
        np.testing.assert_allclose(np.asarray(lv.F(eq)), 0.0, atol=1e-15)

    def test_sirs_endemic_point(self):
        s = sirs(beta=0.3, gamma=0.1, mu=0.05, N=1.0)
        np.testing.assert_allclose(s.equilibria[0], [1.0 / 3.0, 2.0 / 9.0, 4.0 / 9.0], rtol=1e-14)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            get_system("rossler")


class TestComponentSigns:
    @pytest.mark.parametrize("name", ["lv", "sirs"])
    def test_registry_components_satisfy_sign_conditions(self, name):
        assert validate_components(get_system(name)) == 0.0

    def test_violation_reported(self):
        lv = get_system("lv")
        bad = SystemProblem(
            name="bad", dim=2, F=lv.F,
            components=(
                SystemComponent(form="product",
                                f_plus=lambda s: -np.ones_like(np.asarray(s, float)[..., 0]),
                                f_minus=lambda s: np.asarray(s, float)[..., 1]),
                lv.components[1],
            ),
        )
        assert validate_components(bad, n_samples=500) >= 1.0
