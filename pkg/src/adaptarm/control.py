"""Torque laws, regressor filters and parameter-adaptation laws.

Two filter channels exist: W filters the tracking regressor (velocity-level),
Wstar filters the acceleration-level regressor used by the inverse-dynamics
style laws. Both obey Xdot = -lam_c X + Y and start at zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import (
    N_JOINTS,
    N_PARAMS,
    coriolis,
    gravity,
    inertia,
    inertia_dot,
    inertia_regressor,
)

__all__ = [
    "ControlLaw",
    "ControllerState",
    "sliding_variable",
    "filter_rhs",
    "torque_variable_gain",
    "torque_constant_gain",
    "torque_constant_gain_no_m",
    "torque_inverse_dynamics",
    "adaptation_filtered",
    "adaptation_no_m",
    "adaptation_direct",
    "adaptation_indirect",
]


class ControlLaw(Enum):
    """Selectable torque/adaptation pairings."""

    DC_VARIABLE_GAIN = "dc_variable_gain"        # inertia-weighted feedback + W filter
    DC_CONSTANT_GAIN = "dc_constant_gain"        # constant feedback + W filter (plain regressor)
    DC_CONSTANT_GAIN_NO_M = "dc_constant_gain_no_m"  # constant feedback + Wstar filter
    ID_DIRECT_A = "id_direct_a"                  # inverse-dynamics torque, -Gamma Wstar^T s
    ID_DIRECT_B = "id_direct_b"                  # inverse-dynamics torque, -Gamma Wstar^T Mhat s
    ID_INDIRECT = "id_indirect"                  # inverse-dynamics torque, prediction error

    @property
    def uses_wstar(self) -> bool:
        return self in (ControlLaw.DC_CONSTANT_GAIN_NO_M, ControlLaw.ID_DIRECT_A,
                        ControlLaw.ID_DIRECT_B, ControlLaw.ID_INDIRECT)

    @property
    def constant_gain(self) -> bool:
        return self in (ControlLaw.DC_CONSTANT_GAIN, ControlLaw.DC_CONSTANT_GAIN_NO_M)

    @property
    def plain_regressor(self) -> bool:
        """True when the W channel filters the regressor without the feedback term."""
        return self is ControlLaw.DC_CONSTANT_GAIN


@dataclass
class ControllerState:
    """Parameter estimate and filter states (all start at zero by convention)."""

    theta_hat: np.ndarray = field(default_factory=lambda: np.zeros(N_PARAMS))
    W: np.ndarray = field(default_factory=lambda: np.zeros((N_JOINTS, N_PARAMS)))
    Wstar: np.ndarray = field(default_factory=lambda: np.zeros((N_JOINTS, N_PARAMS)))
    tau_f: np.ndarray = field(default_factory=lambda: np.zeros(N_JOINTS))

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta_hat)) and np.all(np.isfinite(self.W))
                    and np.all(np.isfinite(self.Wstar)) and np.all(np.isfinite(self.tau_f)))


def sliding_variable(qdot: np.ndarray, z: np.ndarray) -> np.ndarray:
    """s = qdot - z."""
    return qdot - z


def filter_rhs(state: np.ndarray, drive: np.ndarray, lam_c: float) -> np.ndarray:
    """First-order filter dynamics Xdot = -lam_c X + drive (shared integrator)."""
    return -lam_c * state + drive


def _feedforward(q, qdot, zdot, s, theta_hat, mhat=None):
    """Mhat zdot + Chat qdot + ghat - Mdot_hat s (frozen-estimate derivative)."""
    if mhat is None:
        mhat = inertia(q, theta_hat)
    return (mhat @ zdot + coriolis(q, qdot, theta_hat) @ qdot + gravity(q)
            - inertia_dot(q, qdot, theta_hat) @ s), mhat


def torque_variable_gain(q, qdot, z, zdot, s, theta_hat, W, theta_hat_dot,
                         lam_c, mhat=None) -> np.ndarray:
    """Inertia-weighted feedback law: -lam_c Mhat s + feedforward + W theta_hat_dot."""
    ff, mhat = _feedforward(q, qdot, zdot, s, theta_hat, mhat)
    return -lam_c * (mhat @ s) + ff + W @ theta_hat_dot


def torque_constant_gain(q, qdot, z, zdot, s, theta_hat, W, theta_hat_dot,
                         lam_c_star, mhat=None) -> np.ndarray:
    """Constant feedback law: -lam_c_star s + feedforward + W theta_hat_dot."""
    ff, _ = _feedforward(q, qdot, zdot, s, theta_hat, mhat)
    return -lam_c_star * s + ff + W @ theta_hat_dot


def torque_constant_gain_no_m(q, qdot, z, zdot, s, theta_hat, Wstar, theta_hat_dot,
                              lam_c_star, mhat=None) -> np.ndarray:
    """Constant feedback with the acceleration-regressor filter.

    The estimate-derivative term here is the full d/dt of Mhat, i.e. the
    configuration rate at frozen theta_hat plus the rate induced by
    theta_hat_dot; the latter is M(q, theta_hat_dot) by linearity.
    """
    ff, _ = _feedforward(q, qdot, zdot, s, theta_hat, mhat)
    return (-lam_c_star * s + ff - inertia(q, theta_hat_dot) @ s
            + Wstar @ theta_hat_dot)


def torque_inverse_dynamics(q, qdot, z, zdot, s, theta_hat, Wstar, theta_hat_dot,
                            lam_c, mhat=None) -> np.ndarray:
    """Inverse-dynamics style law: -lam_c Mhat s + feedforward (full Mhat rate)."""
    ff, mhat = _feedforward(q, qdot, zdot, s, theta_hat, mhat)
    return (-lam_c * (mhat @ s) + ff - inertia(q, theta_hat_dot) @ s
            + Wstar @ theta_hat_dot)


def adaptation_filtered(W: np.ndarray, s: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """theta_hat_dot = -Gamma W^T s."""
    return -gamma @ (W.T @ s)


def adaptation_no_m(q, Wstar, mhat, s, gamma, lam_c, lam_c_star) -> np.ndarray:
    """theta_hat_dot = -Gamma [lam_c Wstar^T Mhat s + lam_c_star Wss^T s].

    Wss @ theta = Wstar @ theta - M(q) s for every theta, so
    Wss = Wstar - inertia_regressor(q, s); no true parameter is consumed.
    """
    wss = Wstar - inertia_regressor(q, s)
    return -gamma @ (lam_c * (Wstar.T @ (mhat @ s)) + lam_c_star * (wss.T @ s))


def adaptation_direct(Wstar, s, gamma, mhat=None) -> np.ndarray:
    """-Gamma Wstar^T s, or -Gamma Wstar^T Mhat s when mhat is given."""
    if mhat is None:
        return -gamma @ (Wstar.T @ s)
    return -gamma @ (Wstar.T @ (mhat @ s))


def adaptation_indirect(Wstar, theta_hat, tau_f, gamma) -> np.ndarray:
    """-Gamma Wstar^T e with prediction error e = Wstar theta_hat - tau_f."""
    e = Wstar @ theta_hat - tau_f
    return -gamma @ (Wstar.T @ e)


def theta_hat_rate(law: ControlLaw, q, s, mhat, ctrl: ControllerState,
                   gamma: np.ndarray, lam_c: float, lam_c_star: float) -> np.ndarray:
    """Adaptation value for the selected law (also embedded in the torque)."""
    if law in (ControlLaw.DC_VARIABLE_GAIN, ControlLaw.DC_CONSTANT_GAIN):
        return adaptation_filtered(ctrl.W, s, gamma)
    if law is ControlLaw.DC_CONSTANT_GAIN_NO_M:
        return adaptation_no_m(q, ctrl.Wstar, mhat, s, gamma, lam_c, lam_c_star)
    if law is ControlLaw.ID_DIRECT_A:
        return adaptation_direct(ctrl.Wstar, s, gamma)
    if law is ControlLaw.ID_DIRECT_B:
        return adaptation_direct(ctrl.Wstar, s, gamma, mhat=mhat)
    return adaptation_indirect(ctrl.Wstar, ctrl.theta_hat, ctrl.tau_f, gamma)


def control_torque(law: ControlLaw, q, qdot, z, zdot, s, ctrl: ControllerState,
                   theta_hat_dot, lam_c: float, lam_c_star: float,
                   mhat=None) -> np.ndarray:
    """Torque for the selected law, given the already-computed adaptation value."""
    if law is ControlLaw.DC_VARIABLE_GAIN:
        return torque_variable_gain(q, qdot, z, zdot, s, ctrl.theta_hat, ctrl.W,
                                    theta_hat_dot, lam_c, mhat)
    if law is ControlLaw.DC_CONSTANT_GAIN:
        return torque_constant_gain(q, qdot, z, zdot, s, ctrl.theta_hat, ctrl.W,
                                    theta_hat_dot, lam_c_star, mhat)
    if law is ControlLaw.DC_CONSTANT_GAIN_NO_M:
        return torque_constant_gain_no_m(q, qdot, z, zdot, s, ctrl.theta_hat,
                                         ctrl.Wstar, theta_hat_dot, lam_c_star, mhat)
    return torque_inverse_dynamics(q, qdot, z, zdot, s, ctrl.theta_hat, ctrl.Wstar,
                                   theta_hat_dot, lam_c, mhat)
