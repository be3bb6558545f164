"""Reference-dynamics construction, recovery, initialization and stability test."""
import math

import numpy as np
import pytest

from adaptarm import dynamics as dyn
from adaptarm import reference as ref
from adaptarm.reference import (
    ConfigError,
    FeedbackKind,
    Interconnection,
    ReferenceConfig,
    ReferenceForm,
    ReferenceState,
    SineTrajectory,
    effective_alphas,
    hurwitz_check,
)

THETA = dyn.derive_theta(3.6, 2.7, 1.8, 1.8)
RNG = np.random.default_rng(3)

A0 = 100.0
FIG2_ALPHAS = (A0, 3 * A0 ** (2 / 3), 3 * A0 ** (1 / 3))
FIG3_ALPHAS = (A0, 4 * A0 ** (3 / 4), 6 * A0 ** 0.5, 4 * A0 ** 0.25)


def cfg_l1(**kw):
    base = dict(ell=1, alphas=(100.0, 20.0), lambda_s=0.5, lambda_c=10.0,
                interconnection=Interconnection.LOWFREQ)
    base.update(kw)
    return ReferenceConfig(**base)


def cfg_l2(**kw):
    base = dict(ell=2, alphas=FIG2_ALPHAS, lambda_s=0.5, lambda_c=10.0,
                interconnection=Interconnection.FULL)
    base.update(kw)
    return ReferenceConfig(**base)


def cfg_l3(**kw):
    base = dict(ell=3, alphas=FIG3_ALPHAS, lambda_s=0.5, lambda_c=10.0,
                interconnection=Interconnection.FULL)
    base.update(kw)
    return ReferenceConfig(**base)


class TestHurwitz:
    def test_degree_one_preset(self):
        assert hurwitz_check((100.0, 20.0))

    def test_sign_condition(self):
        assert not hurwitz_check((1.0, -1.0))

    def test_degree_two_preset(self):
        assert hurwitz_check(FIG2_ALPHAS)

    def test_degree_three_binomial(self):
        a = A0 ** 0.25
        assert hurwitz_check((a ** 4, 4 * a ** 3, 6 * a ** 2, 4 * a))

    def test_flipped_coefficient_fails(self):
        assert not hurwitz_check((100.0, -20.0))
        assert not hurwitz_check((A0, -FIG3_ALPHAS[1], FIG3_ALPHAS[2], FIG3_ALPHAS[3]))

    def test_unstable_despite_positive_coefficients(self):
        # x^3 + x^2 + x + 10 has positive coefficients but right-half-plane roots
        assert not hurwitz_check((10.0, 1.0, 1.0))
        roots = np.roots([1.0, 1.0, 1.0, 10.0])
        assert roots.real.max() > 0.0

    def test_effective_alphas_modified(self):
        a = A0 ** (1 / 3)
        cfg = cfg_l2(alphas=(), alpha=a, Lambda=a * np.eye(2),
                     form=ReferenceForm.MODIFIED)
        np.testing.assert_allclose(effective_alphas(cfg), FIG2_ALPHAS, rtol=1e-12)


class TestTrajectory:
    def test_derivatives_match_finite_differences(self):
        traj = SineTrajectory()
        h = 1e-6
        for t in (0.0, 0.37, 2.9):
            rows = traj.eval(t, 4)
            for k in range(4):
                fd = (traj.eval(t + h, k)[k] - traj.eval(t - h, k)[k]) / (2 * h)
                np.testing.assert_allclose(rows[k + 1], fd, rtol=1e-6, atol=1e-4)

    def test_start_values(self):
        rows = SineTrajectory().eval(0.0, 2)
        np.testing.assert_allclose(rows[0], [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(rows[1], [math.pi ** 2 / 3] * 2, rtol=1e-15)
        np.testing.assert_allclose(rows[2], [0.0, 0.0], atol=1e-12)


class TestValidation:
    def test_degree_one_rejects_full_coupling(self):
        with pytest.raises(ConfigError):
            cfg_l1(interconnection=Interconnection.FULL).validate()

    def test_alpha_count(self):
        with pytest.raises(ConfigError):
            cfg_l2(alphas=(100.0, 20.0)).validate()

    def test_unstable_set_rejected(self):
        with pytest.raises(ConfigError, match="Routh-Hurwitz"):
            cfg_l1(alphas=(100.0, -20.0)).validate()

    def test_modified_needs_spd_lambda(self):
        with pytest.raises(ConfigError):
            cfg_l2(alphas=(), alpha=4.0, Lambda=np.array([[1.0, 2.0], [2.0, 1.0]]),
                   form=ReferenceForm.MODIFIED).validate()

    def test_constant_gain_needs_rate(self):
        with pytest.raises(ConfigError):
            cfg_l2(feedback=FeedbackKind.CONSTANT_GAIN).validate()

    def test_presets_validate(self):
        for ctor in (cfg_l1, cfg_l2, cfg_l3):
            ctor().validate()


def _traj_rows(t=0.3):
    return SineTrajectory().eval(t, 2), t


class TestRhsDegreeOne:
    def test_exact_tracking_fixed_point(self):
        traj, _ = _traj_rows()
        cfg = cfg_l1()
        q, qdot = traj[0], traj[1]
        state = ReferenceState(x=qdot.copy())  # z = qdot on trajectory
        mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
        dz = ref.reference_rhs(state, q, qdot, traj, mhat, cfg)
        np.testing.assert_allclose(dz, traj[2], atol=1e-12)

    def test_direct_evaluation(self):
        traj, _ = _traj_rows()
        cfg = cfg_l1()
        q, qdot = RNG.normal(size=2), RNG.normal(size=2)
        z = RNG.normal(size=2)
        mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
        dz = ref.reference_rhs(ReferenceState(x=z), q, qdot, traj, mhat, cfg)
        a0, a1 = cfg.alphas
        want = (traj[2] - a1 * (qdot - traj[1]) - a0 * (q - traj[0])
                + cfg.lambda_s * cfg.lambda_c * (mhat @ (qdot - z)))
        np.testing.assert_allclose(dz, want, atol=1e-12)

    def test_coupling_off(self):
        traj, _ = _traj_rows()
        cfg = cfg_l1(lambda_s=0.0)
        q, qdot, z = (RNG.normal(size=2) for _ in range(3))
        mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
        dz = ref.reference_rhs(ReferenceState(x=z), q, qdot, traj, mhat, cfg)
        want = traj[2] - cfg.alphas[1] * (qdot - traj[1]) - cfg.alphas[0] * (q - traj[0])
        np.testing.assert_allclose(dz, want, atol=1e-12)

    def test_modified_direct_evaluation(self):
        traj, _ = _traj_rows()
        a = 10.0 ** 0.5
        lam = np.array([[3.0, 1.0], [1.0, 4.0]])
        cfg = cfg_l1(alphas=(), alpha=a, Lambda=lam, form=ReferenceForm.MODIFIED)
        q, qdot, z = (RNG.normal(size=2) for _ in range(3))
        mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
        dz = ref.reference_rhs(ReferenceState(x=z), q, qdot, traj, mhat, cfg)
        want = (traj[2] - a * (qdot - traj[1]) - lam @ (z - traj[1])
                - a * (lam @ (q - traj[0]))
                + cfg.lambda_s * cfg.lambda_c * (mhat @ (qdot - z)))
        np.testing.assert_allclose(dz, want, atol=1e-12)


class TestRhsHigherDegrees:
    def test_zero_estimate_reduces_to_linear_part(self):
        traj, _ = _traj_rows()
        cfg = cfg_l2()
        q, qdot = RNG.normal(size=2), RNG.normal(size=2)
        x = RNG.normal(size=4)
        mhat = np.zeros((2, 2))
        dx = ref.reference_rhs(ReferenceState(x=x), q, qdot, traj, mhat, cfg)
        a0, a1, a2 = cfg.alphas
        np.testing.assert_allclose(dx[:2], x[2:] + traj[2] - a2 * qdot, atol=1e-12)
        np.testing.assert_allclose(
            dx[2:], a2 * traj[2] - a1 * (qdot - traj[1]) - a0 * (q - traj[0]), atol=1e-12)

    def test_degree_three_zero_estimate(self):
        traj, _ = _traj_rows()
        cfg = cfg_l3()
        q, qdot = RNG.normal(size=2), RNG.normal(size=2)
        x = RNG.normal(size=6)
        dx = ref.reference_rhs(ReferenceState(x=x), q, qdot, traj, np.zeros((2, 2)), cfg)
        a0, a1, a2, a3 = cfg.alphas
        np.testing.assert_allclose(dx[4:], a2 * traj[2] - a1 * (qdot - traj[1])
                                   - a0 * (q - traj[0]), atol=1e-12)

    def test_state_dimension_checked(self):
        traj, _ = _traj_rows()
        with pytest.raises(ConfigError):
            ref.reference_rhs(ReferenceState(x=np.zeros(4)), np.zeros(2), np.zeros(2),
                              traj, np.zeros((2, 2)), cfg_l3())

    def test_rhs_accepts_only_low_order_trajectory_rows(self):
        # the whole point of the reduced realization: no acceleration inputs
        traj = SineTrajectory().eval(0.2, 2)
        assert traj.shape == (3, 2)
        for ctor in (cfg_l2, cfg_l3):
            cfg = ctor()
            x = RNG.normal(size=2 * cfg.ell)
            dx = ref.reference_rhs(ReferenceState(x=x), RNG.normal(size=2),
                                   RNG.normal(size=2), traj,
                                   dyn.inertia(np.zeros(2), THETA), cfg)
            assert np.all(np.isfinite(dx))


class TestRecoverInit:
    def test_on_trajectory_recovery(self):
        traj0 = SineTrajectory().eval(0.0, 2)
        for ctor in (cfg_l1, cfg_l2, cfg_l3):
            cfg = ctor()
            q0, qd0 = traj0[0], traj0[1]
            mhat0 = np.zeros((2, 2))
            st = ref.init_reference(q0, qd0, traj0, mhat0, cfg)
            z, zdot = ref.recover_z(st, q0, qd0, traj0, mhat0, cfg)
            np.testing.assert_allclose(z, traj0[1], atol=1e-12)
            np.testing.assert_allclose(zdot, traj0[2], atol=1e-12)

    def test_degree_three_block(self):
        traj0 = SineTrajectory().eval(0.0, 2)
        cfg = cfg_l3()
        q0, qd0 = traj0[0], traj0[1]
        st = ref.init_reference(q0, qd0, traj0, np.zeros((2, 2)), cfg)
        a = A0 ** 0.25
        np.testing.assert_allclose(st.x[4:6], 6.0 * a * a * qd0, atol=1e-12)

    def test_documented_formulas_off_trajectory(self):
        traj0 = SineTrajectory().eval(0.0, 2)
        cfg = cfg_l3()
        q0 = traj0[0] + np.array([0.2, -0.1])
        qd0 = traj0[1] + np.array([-0.3, 0.4])
        theta0 = np.array([1.0, 0.5, 0.2])
        mhat0 = dyn.inertia(q0, theta0)
        st = ref.init_reference(q0, qd0, traj0, mhat0, cfg)
        a = A0 ** 0.25
        e0, edot0 = q0 - traj0[0], qd0 - traj0[1]
        zdot0 = traj0[2] - 3 * a * edot0 - 3 * a * a * e0
        x3 = (a * (zdot0 - traj0[2]) + 6 * a * a * qd0 - 3 * a * a * edot0
              - a ** 3 * e0 + cfg.lambda_s * (mhat0 @ (st.x[:2] - qd0)))
        np.testing.assert_allclose(st.x[4:6], x3, atol=1e-12)
        _, zdot = ref.recover_z(st, q0, qd0, traj0, mhat0, cfg)
        np.testing.assert_allclose(zdot, zdot0, atol=1e-12)

    def test_recovered_zdot_consistent_with_rhs(self):
        # d/dt of the first state block must equal the recovered zdot
        traj, _ = _traj_rows()
        for ctor in (cfg_l2, cfg_l3):
            cfg = ctor()
            q, qdot = RNG.normal(size=2), RNG.normal(size=2)
            x = RNG.normal(size=2 * cfg.ell)
            mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
            st = ReferenceState(x=x)
            dx = ref.reference_rhs(st, q, qdot, traj, mhat, cfg)
            _, zdot = ref.recover_z(st, q, qdot, traj, mhat, cfg)
            np.testing.assert_allclose(dx[:2], zdot, atol=1e-12)
