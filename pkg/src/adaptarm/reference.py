"""Reference dynamics generating the velocity target z for cascade degrees 1-3.

The degree-reduced realizations integrate an auxiliary state x (dimension 2*ell)
from which z and zdot are recovered; their right-hand sides never touch a joint
acceleration, which is the whole point of the construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import N_JOINTS, inertia

__all__ = [
    "ReferenceForm",
    "Interconnection",
    "FeedbackKind",
    "ReferenceConfig",
    "ReferenceState",
    "SineTrajectory",
    "SetpointTrajectory",
    "ConfigError",
    "hurwitz_check",
    "effective_alphas",
    "reference_rhs",
    "recover_z",
    "init_reference",
]


class ConfigError(ValueError):
    """Raised for ill-posed controller/reference configurations."""


class ReferenceForm(Enum):
    ORIGINAL = "original"
    MODIFIED = "modified"


class Interconnection(Enum):
    """Which part of the inertia-weighted coupling enters the reference dynamics."""

    LOWFREQ = "lowfreq"            # zero-order coupling only (degree-1 controller)
    FULL = "full"                  # zero-order plus differentiated coupling
    FULL_PLUS_LC = "full_plus_lc"  # differentiated coupling scaled by (1 + lam_c)


class FeedbackKind(Enum):
    VARIABLE_GAIN = "variable"     # zero-order coupling lam_s*lam_c*Mhat*(qdot - z)
    CONSTANT_GAIN = "constant"     # zero-order coupling lam_s*lam_c_star*(qdot - z)


@dataclass
class ReferenceConfig:
    """Gains and structural switches of the reference dynamics."""

    ell: int = 1
    alphas: tuple = (100.0, 20.0)      # alpha_0 .. alpha_ell (original form)
    lambda_s: float = 0.5
    lambda_c: float = 10.0
    lambda_c_star: float = 0.0         # constant-gain feedback only
    alpha: float = 0.0                 # scalar gain of the modified form
    Lambda: np.ndarray = None          # type: ignore[assignment]  # modified form, SPD 2x2
    form: ReferenceForm = ReferenceForm.ORIGINAL
    interconnection: Interconnection = Interconnection.LOWFREQ
    feedback: FeedbackKind = FeedbackKind.VARIABLE_GAIN

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        if self.Lambda is not None:
            self.Lambda = np.asarray(self.Lambda, dtype=float)

    @property
    def deriv_gain(self) -> float:
        """Scale mu of the differentiated coupling mu*lam_s*d/dt[Mhat (qdot - z)]."""
        if self.interconnection is Interconnection.LOWFREQ:
            return 0.0
        if self.interconnection is Interconnection.FULL:
            return 1.0
        return 1.0 + self.lambda_c

    @property
    def state_shift(self) -> float:
        """Velocity coefficient folded into the second state block (degree >= 2)."""
        if self.form is ReferenceForm.ORIGINAL:
            return self.alphas[self.ell]
        return self.ell * self.alpha

    def validate(self):
        if self.ell not in (1, 2, 3):
            raise ConfigError(f"cascade degree must be 1, 2 or 3, got {self.ell}")
        if self.lambda_c <= 0.0:
            raise ConfigError("lambda_c must be positive")
        if self.ell == 1 and self.interconnection is not Interconnection.LOWFREQ:
            raise ConfigError("degree 1 admits only the lowfreq interconnection "
                              "(the differentiated coupling would need qddot)")
        if self.feedback is FeedbackKind.CONSTANT_GAIN and self.lambda_c_star <= 0.0:
            raise ConfigError("constant-gain feedback requires lambda_c_star > 0")
        if self.form is ReferenceForm.ORIGINAL:
            if len(self.alphas) != self.ell + 1:
                raise ConfigError(f"need {self.ell + 1} error-polynomial coefficients "
                                  f"alpha_0..alpha_{self.ell}, got {len(self.alphas)}")
            if not hurwitz_check(self.alphas):
                raise ConfigError("error polynomial fails the Routh-Hurwitz test "
                                  "(stability precondition of the convergence theorems)")
        else:
            if self.alpha <= 0.0:
                raise ConfigError("modified form requires a positive scalar alpha")
            lam = _lambda_matrix(self)
            eig = np.linalg.eigvalsh(lam)
            if np.any(np.abs(lam - lam.T) > 0.0) or eig[0] <= 0.0:
                raise ConfigError("Lambda must be symmetric positive definite")
            for a in effective_alphas(self):
                if a <= 0.0:
                    raise ConfigError("composite error polynomial of the modified form "
                                      "has a non-positive coefficient")
            if not hurwitz_check(effective_alphas(self)):
                raise ConfigError("composite error polynomial of the modified form "
                                  "fails the Routh-Hurwitz test")


@dataclass
class ReferenceState:
    """Degree-reduced state: blocks [z, x2, ..., x_ell], each in R^2."""

    x: np.ndarray

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.x)))


def _lambda_matrix(cfg: ReferenceConfig) -> np.ndarray:
    if cfg.Lambda is None:
        return cfg.alpha * np.eye(N_JOINTS)
    return cfg.Lambda


def _lambda_scalar(cfg: ReferenceConfig) -> float:
    lam = _lambda_matrix(cfg)
    if abs(lam[0, 0] - lam[1, 1]) > 1e-12 or abs(lam[0, 1]) > 1e-12 or abs(lam[1, 0]) > 1e-12:
        raise ConfigError("this operation needs Lambda to be a scalar multiple of I")
    return float(lam[0, 0])


# -- desired trajectories -----------------------------------------------------

class SineTrajectory:
    """q_d(t) = amplitude * sin(omega t) per joint, derivatives to any order."""

    def __init__(self, amplitude=(math.pi / 3.0, math.pi / 3.0), omega: float = math.pi):
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.omega = float(omega)

    def eval(self, t: float, order: int) -> np.ndarray:
        """Rows 0..order of d^k q_d / dt^k at time t; shape (order+1, 2)."""
        out = np.empty((order + 1, N_JOINTS))
        for k in range(order + 1):
            out[k] = self.amplitude * self.omega ** k * math.sin(self.omega * t + 0.5 * k * math.pi)
        return out


class SetpointTrajectory:
    """Constant desired position; all derivatives vanish."""

    def __init__(self, q_d=(0.0, 0.0)):
        self.q_d = np.asarray(q_d, dtype=float)

    def eval(self, t: float, order: int) -> np.ndarray:
        out = np.zeros((order + 1, N_JOINTS))
        out[0] = self.q_d
        return out


# -- stability test -----------------------------------------------------------

def hurwitz_check(alphas) -> bool:
    """Routh-Hurwitz test for p(x) = x^(ell+1) + a_ell x^ell + ... + a_0.

    `alphas` lists (a_0, ..., a_ell). True iff every root lies in the open
    left half-plane (all first-column Routh entries strictly positive).
    """
    coeffs = [1.0] + [float(a) for a in reversed(list(alphas))]
    n = len(coeffs) - 1
    if n < 1 or any(not math.isfinite(c) for c in coeffs):
        return False
    if any(c <= 0.0 for c in coeffs):
        return False  # positive coefficients are necessary
    width = (n + 2) // 2
    table = np.zeros((n + 1, width + 1))
    table[0, : len(coeffs[0::2])] = coeffs[0::2]
    table[1, : len(coeffs[1::2])] = coeffs[1::2]
    for i in range(2, n + 1):
        pivot = table[i - 1, 0]
        if pivot == 0.0:
            return False
        for j in range(width):
            table[i, j] = (pivot * table[i - 2, j + 1]
                           - table[i - 2, 0] * table[i - 1, j + 1]) / pivot
    return bool(np.all(table[:, 0] > 0.0))


def effective_alphas(cfg: ReferenceConfig) -> tuple:
    """Coefficients (a_0..a_ell) of the composite error polynomial.

    ORIGINAL: cfg.alphas verbatim. MODIFIED with Lambda = lam*I: the product
    (x + alpha)^ell * (x + lam) expanded, which is what the closed loop obeys.
    """
    if cfg.form is ReferenceForm.ORIGINAL:
        return cfg.alphas
    lam = _lambda_scalar(cfg)
    base = [math.comb(cfg.ell, k) * cfg.alpha ** (cfg.ell - k) for k in range(cfg.ell + 1)]
    poly = np.polymul(base[::-1], [1.0, lam])  # descending powers
    return tuple(float(c) for c in poly[::-1][:-1])  # ascending, drop leading 1


# -- coupling terms -----------------------------------------------------------

def _zero_order_coupling(cfg: ReferenceConfig, mhat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Zero-order interconnection applied to v = qdot - z."""
    if cfg.feedback is FeedbackKind.VARIABLE_GAIN:
        return cfg.lambda_s * cfg.lambda_c * (mhat @ v)
    return cfg.lambda_s * cfg.lambda_c_star * v


# -- right-hand sides ----------------------------------------------------------

def reference_rhs(state: ReferenceState, q: np.ndarray, qdot: np.ndarray,
                  traj: np.ndarray, mhat: np.ndarray, cfg: ReferenceConfig) -> np.ndarray:
    """Time derivative of the degree-reduced state.

    `traj` holds rows (q_d, qdot_d, qddot_d); no acceleration of the plant and
    no desired derivative beyond order two is consumed, for any degree.
    """
    x = state.x
    if x.shape != (2 * cfg.ell,):
        raise ConfigError(f"reference state has dimension {x.shape[0]}, "
                          f"expected {2 * cfg.ell} for degree {cfg.ell}")
    q_d, qd_d, qdd_d = traj[0], traj[1], traj[2]
    e = q - q_d
    edot = qdot - qd_d
    z = x[:N_JOINTS]
    v = qdot - z
    couple = _zero_order_coupling(cfg, mhat, v)
    mu_ls = cfg.deriv_gain * cfg.lambda_s

    if cfg.ell == 1:
        if cfg.form is ReferenceForm.ORIGINAL:
            a0, a1 = cfg.alphas
            return qdd_d - a1 * edot - a0 * e + couple
        lam = _lambda_matrix(cfg)
        a = cfg.alpha
        return qdd_d - a * edot - lam @ (z - qd_d) - a * (lam @ e) + couple

    if cfg.ell == 2:
        x2 = x[2:4]
        dz = x2 + qdd_d - mu_ls * (mhat @ (z - qdot)) - cfg.state_shift * qdot
        if cfg.form is ReferenceForm.ORIGINAL:
            a0, a1, a2 = cfg.alphas
            dx2 = a2 * qdd_d - a1 * edot - a0 * e + couple
        else:
            lam = _lambda_matrix(cfg)
            a = cfg.alpha
            dx2 = (-lam @ x2 + 2.0 * a * (qdd_d + lam @ qd_d)
                   - a * a * (edot + lam @ e) + couple - mu_ls * (lam @ (mhat @ v)))
        return np.concatenate([dz, dx2])

    x2, x3 = x[2:4], x[4:6]
    dz = x2 + qdd_d - cfg.state_shift * qdot
    dx2 = x3 - mu_ls * (mhat @ (z - qdot))
    if cfg.form is ReferenceForm.ORIGINAL:
        a0, a1, a2, a3 = cfg.alphas
        dx2 = dx2 + a3 * qdd_d - a2 * qdot
        dx3 = a2 * qdd_d - a1 * edot - a0 * e + couple
    else:
        lam = _lambda_matrix(cfg)
        a = cfg.alpha
        dx2 = dx2 + 3.0 * a * qdd_d - 3.0 * a * a * qdot
        dx3 = (-lam @ x3 + 3.0 * a * a * (qdd_d + lam @ qd_d)
               - a ** 3 * (edot + lam @ e) + couple - mu_ls * (lam @ (mhat @ v)))
    return np.concatenate([dz, dx2, dx3])


def recover_z(state: ReferenceState, q: np.ndarray, qdot: np.ndarray,
              traj: np.ndarray, mhat: np.ndarray, cfg: ReferenceConfig):
    """(z, zdot) from the degree-reduced state; zdot never needs qddot."""
    x = state.x
    z = x[:N_JOINTS]
    if cfg.ell == 1:
        zdot = reference_rhs(state, q, qdot, traj, mhat, cfg)
        return z, zdot
    qdd_d = traj[2]
    zdot = x[2:4] + qdd_d - cfg.state_shift * qdot
    if cfg.ell == 2:
        zdot = zdot - cfg.deriv_gain * cfg.lambda_s * (mhat @ (z - qdot))
    return z, zdot


def init_reference(q0: np.ndarray, qdot0: np.ndarray, traj0: np.ndarray,
                   mhat0: np.ndarray, cfg: ReferenceConfig) -> ReferenceState:
    """Initial degree-reduced state from the documented start-up conventions.

    z(0) = qdot_d(0) always; for degrees 2 and 3 the auxiliary blocks follow
    the binomial-gain recipe with alpha = alpha_0^(1/(ell+1)) (original form)
    or the configured scalar alpha (modified form).
    """
    q_d, qd_d, qdd_d = traj0[0], traj0[1], traj0[2]
    e0 = q0 - q_d
    edot0 = qdot0 - qd_d
    z0 = qd_d.copy()
    if cfg.ell == 1:
        return ReferenceState(x=z0)

    if cfg.form is ReferenceForm.ORIGINAL:
        a = cfg.alphas[0] ** (1.0 / (cfg.ell + 1))
    else:
        a = cfg.alpha
    mu_ls = cfg.deriv_gain * cfg.lambda_s
    if cfg.ell == 2:
        zdot0 = qdd_d - 2.0 * a * edot0 - a * a * e0
        x2 = zdot0 - qdd_d + mu_ls * (mhat0 @ (z0 - qdot0)) + cfg.state_shift * qdot0
        return ReferenceState(x=np.concatenate([z0, x2]))

    zdot0 = qdd_d - 3.0 * a * edot0 - 3.0 * a * a * e0
    x2 = zdot0 - qdd_d + cfg.state_shift * qdot0
    if cfg.form is ReferenceForm.ORIGINAL:
        x3 = (a * (zdot0 - qdd_d) + 6.0 * a * a * qdot0 - 3.0 * a * a * edot0
              - a ** 3 * e0 + mu_ls * (mhat0 @ (z0 - qdot0)))
    else:
        # the qddot(0) stand-in cancels exactly for the modified state map
        x3 = (3.0 * a * a * qdot0 - 3.0 * a * a * edot0 - a ** 3 * e0
              + mu_ls * (mhat0 @ (z0 - qdot0)))
    return ReferenceState(x=np.concatenate([z0, x2, x3]))


def build_mhat(q: np.ndarray, theta_hat: np.ndarray) -> np.ndarray:
    """Inertia matrix evaluated at the current parameter estimate."""
    return inertia(q, theta_hat)
