"""Rigid-body dynamics of a 2-DOF planar arm in a horizontal plane.

All terms are expressed through the composite parameter vector
theta = (th1, th2, th3), so every torque-level quantity is linear in theta
(the regressor factorizations below make that linearity explicit).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ManipulatorParams",
    "RobotState",
    "derive_theta",
    "inertia",
    "coriolis",
    "gravity",
    "inertia_dot",
    "forward_dynamics",
    "kinetic_energy",
    "inertia_regressor",
    "coriolis_regressor",
    "inertia_dot_regressor",
    "tracking_regressor",
    "accel_regressor",
]

N_JOINTS = 2
N_PARAMS = 3


def derive_theta(m1: float, m2: float, l1: float, l2: float) -> np.ndarray:
    """Composite parameters of a uniform-density two-link chain.

    With lc_i = l_i/2 and I_i = m_i*l_i^2/12:
        th1 = m1*lc1^2 + I1 + m2*l1^2
        th2 = m2*lc2^2 + I2
        th3 = m2*l1*lc2
    """
    if min(m1, m2, l1, l2) <= 0.0:
        raise ValueError("link masses and lengths must be strictly positive")
    th1 = m1 * l1 * l1 / 3.0 + m2 * l1 * l1
    th2 = m2 * l2 * l2 / 3.0
    th3 = m2 * l1 * l2 / 2.0
    return np.array([th1, th2, th3])


@dataclass(frozen=True)
class ManipulatorParams:
    """Physical description of the arm plus its composite parameter vector."""

    m1: float
    m2: float
    l1: float
    l2: float
    theta: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.theta is None:
            object.__setattr__(self, "theta", derive_theta(self.m1, self.m2, self.l1, self.l2))
        else:
            object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))


@dataclass
class RobotState:
    """Joint positions (rad) and velocities (rad/s)."""

    q: np.ndarray
    qdot: np.ndarray

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qdot)))


def inertia(q: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Inertia matrix M(q); symmetric, positive definite for physical theta."""
    c2 = math.cos(q[1])
    off = theta[1] + theta[2] * c2
    return np.array([[theta[0] + theta[1] + 2.0 * theta[2] * c2, off],
                     [off, theta[1]]])


def coriolis(q: np.ndarray, qdot: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal matrix in Christoffel form (keeps Mdot - 2C skew)."""
    h = theta[2] * math.sin(q[1])
    return np.array([[-h * qdot[1], -h * (qdot[0] + qdot[1])],
                     [h * qdot[0], 0.0]])


def gravity(q: np.ndarray) -> np.ndarray:
    """Gravity torque; identically zero for motion in a horizontal plane."""
    return np.zeros(N_JOINTS)


def inertia_dot(q: np.ndarray, qdot: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Analytic time derivative of M(q) at frozen theta: (dM/dq2) * qdot2."""
    k = theta[2] * math.sin(q[1]) * qdot[1]
    return np.array([[-2.0 * k, -k],
                     [-k, 0.0]])


def forward_dynamics(q: np.ndarray, qdot: np.ndarray, tau: np.ndarray,
                     tau_star: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Joint accelerations qddot = M(q)^-1 (tau + tau_star - C qdot - g)."""
    m = inertia(q, theta)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if not math.isfinite(det) or abs(det) < 1e-12:
        raise ArithmeticError("singular inertia matrix; parameter vector is not physical")
    rhs = tau + tau_star - coriolis(q, qdot, theta) @ qdot - gravity(q)
    return np.array([(m[1, 1] * rhs[0] - m[0, 1] * rhs[1]) / det,
                     (m[0, 0] * rhs[1] - m[1, 0] * rhs[0]) / det])


def kinetic_energy(q: np.ndarray, qdot: np.ndarray, theta: np.ndarray) -> float:
    """(1/2) qdot^T M(q) qdot."""
    return 0.5 * float(qdot @ inertia(q, theta) @ qdot)


# -- regressor factorizations -------------------------------------------------
#
# Each builder returns Y in R^{2x3} with Y @ theta equal to the named product,
# for every parameter vector theta (not only the physical one).

def inertia_regressor(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Y with Y @ theta = M(q) v."""
    c2 = math.cos(q[1])
    return np.array([[v[0], v[0] + v[1], c2 * (2.0 * v[0] + v[1])],
                     [0.0, v[0] + v[1], c2 * v[0]]])


def coriolis_regressor(q: np.ndarray, qdot: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Y with Y @ theta = C(q, qdot) w."""
    s2 = math.sin(q[1])
    return np.array([[0.0, 0.0, -s2 * (qdot[1] * w[0] + (qdot[0] + qdot[1]) * w[1])],
                     [0.0, 0.0, s2 * qdot[0] * w[0]]])


def inertia_dot_regressor(q: np.ndarray, qdot: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Y with Y @ theta = Mdot(q, qdot) v."""
    k = math.sin(q[1]) * qdot[1]
    return np.array([[0.0, 0.0, -k * (2.0 * v[0] + v[1])],
                     [0.0, 0.0, -k * v[0]]])


def tracking_regressor(q: np.ndarray, qdot: np.ndarray, z: np.ndarray, zdot: np.ndarray,
                       s: np.ndarray, lam_c: float, include_feedback: bool = True) -> np.ndarray:
    """Regressor of M zdot + C qdot + g - Mdot s - lam_c M s.

    With include_feedback=False the lam_c M s term is omitted entirely, which
    is the form paired with the constant-gain torque laws (lam_c then only
    drives the associated filter, not the regressor).
    """
    y = inertia_regressor(q, zdot) + coriolis_regressor(q, qdot, qdot) \
        - inertia_dot_regressor(q, qdot, s)
    if include_feedback:
        y -= lam_c * inertia_regressor(q, s)
    return y


def accel_regressor(q: np.ndarray, qdot: np.ndarray, qddot: np.ndarray) -> np.ndarray:
    """Regressor of the inverse dynamics: Y @ theta = M qddot + C qdot + g."""
    return inertia_regressor(q, qddot) + coriolis_regressor(q, qdot, qdot)
