"""Torque laws, filters and adaptation laws at the single-evaluation level."""
import numpy as np
import pytest

from adaptarm import control as ctl
from adaptarm import dynamics as dyn
from adaptarm.control import ControlLaw, ControllerState

THETA = dyn.derive_theta(3.6, 2.7, 1.8, 1.8)
RNG = np.random.default_rng(11)
GAMMA = 10.0 * np.eye(3)
LAM_C, LAM_CS = 10.0, 70.0


def test_sliding_variable():
    qd = np.array([1.0, 0.0])
    z = np.array([0.0, 1.0])
    np.testing.assert_array_equal(ctl.sliding_variable(qd, z), [1.0, -1.0])
    np.testing.assert_array_equal(ctl.sliding_variable(z, z), np.zeros(2))


def test_filter_rhs_definition():
    for _ in range(50):
        w = RNG.normal(size=(2, 3))
        y = RNG.normal(size=(2, 3))
        lam = RNG.uniform(0.1, 30.0)
        np.testing.assert_allclose(ctl.filter_rhs(w, y, lam), -lam * w + y, atol=1e-15)


class TestAdaptation:
    def test_filtered_arithmetic(self):
        w = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        got = ctl.adaptation_filtered(w, np.array([1.0, 2.0]), GAMMA)
        np.testing.assert_array_equal(got, [-10.0, -20.0, 0.0])

    def test_filtered_vanishes(self):
        z = np.zeros(2)
        w = RNG.normal(size=(2, 3))
        np.testing.assert_array_equal(ctl.adaptation_filtered(w, z, GAMMA), np.zeros(3))
        np.testing.assert_array_equal(
            ctl.adaptation_filtered(np.zeros((2, 3)), RNG.normal(size=2), GAMMA), np.zeros(3))

    def test_no_m_direct_evaluation(self):
        for _ in range(50):
            q, s = RNG.normal(size=2), RNG.normal(size=2)
            wstar = RNG.normal(size=(2, 3))
            mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
            got = ctl.adaptation_no_m(q, wstar, mhat, s, GAMMA, LAM_C, LAM_CS)
            wss = wstar - dyn.inertia_regressor(q, s)
            want = -GAMMA @ (LAM_C * wstar.T @ (mhat @ s) + LAM_CS * wss.T @ s)
            np.testing.assert_allclose(got, want, atol=1e-12)

    def test_no_m_gated_by_s(self):
        q = RNG.normal(size=2)
        wstar = RNG.normal(size=(2, 3))
        mhat = dyn.inertia(q, RNG.uniform(0.5, 5.0, 3))
        got = ctl.adaptation_no_m(q, wstar, mhat, np.zeros(2), GAMMA, LAM_C, LAM_CS)
        np.testing.assert_array_equal(got, np.zeros(3))

    def test_no_m_zero_filter_keeps_inertia_term(self):
        q, s = RNG.normal(size=2), RNG.normal(size=2)
        got = ctl.adaptation_no_m(q, np.zeros((2, 3)), np.zeros((2, 2)), s,
                                  GAMMA, LAM_C, LAM_CS)
        want = GAMMA @ (LAM_CS * dyn.inertia_regressor(q, s).T @ s)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_direct_forms(self):
        wstar = RNG.normal(size=(2, 3))
        s = RNG.normal(size=2)
        np.testing.assert_allclose(ctl.adaptation_direct(wstar, s, GAMMA),
                                   -GAMMA @ wstar.T @ s, atol=1e-14)
        # identity weighting makes the two direct forms coincide
        np.testing.assert_allclose(
            ctl.adaptation_direct(wstar, s, GAMMA, mhat=np.eye(2)),
            ctl.adaptation_direct(wstar, s, GAMMA), atol=1e-14)
        np.testing.assert_array_equal(
            ctl.adaptation_direct(wstar, np.zeros(2), GAMMA), np.zeros(3))

    def test_indirect_zero_prediction_error(self):
        wstar = RNG.normal(size=(2, 3))
        th = RNG.normal(size=3)
        got = ctl.adaptation_indirect(wstar, th, wstar @ th, GAMMA)
        np.testing.assert_allclose(got, np.zeros(3), atol=1e-12)
        np.testing.assert_array_equal(
            ctl.adaptation_indirect(np.zeros((2, 3)), th, np.zeros(2), GAMMA), np.zeros(3))


class TestTorque:
    def _state(self, theta_hat=None, W=None, Wstar=None):
        c = ControllerState()
        if theta_hat is not None:
            c.theta_hat = theta_hat
        if W is not None:
            c.W = W
        if Wstar is not None:
            c.Wstar = Wstar
        return c

    def test_zero_estimate_variable_gain(self):
        q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
        s = qd - z
        tau = ctl.torque_variable_gain(q, qd, z, zd, s, np.zeros(3),
                                       np.zeros((2, 3)), np.zeros(3), LAM_C)
        np.testing.assert_array_equal(tau, np.zeros(2))

    def test_zero_estimate_constant_gain_is_damping(self):
        q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
        s = qd - z
        tau = ctl.torque_constant_gain(q, qd, z, zd, s, np.zeros(3),
                                       np.zeros((2, 3)), np.zeros(3), LAM_CS)
        np.testing.assert_allclose(tau, -LAM_CS * s, atol=1e-14)

    def test_certainty_equivalence_feedforward(self):
        # true parameters, zero sliding error, frozen estimate: pure feedforward
        q, qd, zd = (RNG.normal(size=2) for _ in range(3))
        z = qd.copy()
        s = np.zeros(2)
        tau = ctl.torque_variable_gain(q, qd, z, zd, s, THETA, RNG.normal(size=(2, 3)),
                                       np.zeros(3), LAM_C)
        want = dyn.inertia(q, THETA) @ zd + dyn.coriolis(q, qd, THETA) @ qd
        np.testing.assert_allclose(tau, want, atol=1e-12)

    def test_variable_gain_equals_regressor_form(self):
        # the torque law is algebraically Y theta_hat + W theta_hat_dot
        for _ in range(100):
            q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
            s = qd - z
            th = RNG.uniform(0.1, 10.0, 3)
            w = RNG.normal(size=(2, 3))
            thd = ctl.adaptation_filtered(w, s, GAMMA)
            tau = ctl.torque_variable_gain(q, qd, z, zd, s, th, w, thd, LAM_C)
            y = dyn.tracking_regressor(q, qd, z, zd, s, LAM_C)
            np.testing.assert_allclose(tau, y @ th + w @ thd, atol=1e-9)

    def test_constant_gain_equals_regressor_form(self):
        for _ in range(100):
            q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
            s = qd - z
            th = RNG.uniform(0.1, 10.0, 3)
            w = RNG.normal(size=(2, 3))
            thd = ctl.adaptation_filtered(w, s, GAMMA)
            tau = ctl.torque_constant_gain(q, qd, z, zd, s, th, w, thd, LAM_CS)
            y = dyn.tracking_regressor(q, qd, z, zd, s, LAM_C, include_feedback=False)
            np.testing.assert_allclose(tau, -LAM_CS * s + y @ th + w @ thd, atol=1e-9)

    def test_wstar_laws_use_full_estimate_rate(self):
        # the estimate-rate part of d/dt[Mhat] must appear: M(q, theta_hat_dot) s
        q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
        s = qd - z
        th = RNG.uniform(0.1, 10.0, 3)
        thd = RNG.normal(size=3)
        wstar = RNG.normal(size=(2, 3))
        tau = ctl.torque_constant_gain_no_m(q, qd, z, zd, s, th, wstar, thd, LAM_CS)
        base = ctl.torque_constant_gain(q, qd, z, zd, s, th, wstar, thd, LAM_CS)
        np.testing.assert_allclose(tau - base, -dyn.inertia(q, thd) @ s, atol=1e-12)

    def test_dispatch_covers_all_laws(self):
        q, qd, z, zd = (RNG.normal(size=2) for _ in range(4))
        s = qd - z
        ctrl = self._state(theta_hat=RNG.uniform(0.1, 5.0, 3),
                           W=RNG.normal(size=(2, 3)), Wstar=RNG.normal(size=(2, 3)))
        for law in ControlLaw:
            thd = ctl.theta_hat_rate(law, q, s, dyn.inertia(q, ctrl.theta_hat), ctrl,
                                     GAMMA, LAM_C, LAM_CS)
            tau = ctl.control_torque(law, q, qd, z, zd, s, ctrl, thd, LAM_C, LAM_CS)
            assert tau.shape == (2,) and np.all(np.isfinite(tau))
