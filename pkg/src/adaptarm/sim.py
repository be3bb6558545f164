"""Closed-loop simulation engine, signal library and run diagnostics.

The coupled plant + reference + filter + estimate system is integrated by a
classical fixed-step 4th-order Runge-Kutta scheme at the plant substep. The
torque is either held over a control period (zero-order hold, the experiment
protocol) or re-evaluated inside every stage (continuous mode, used by the
identity-level diagnostics, which probe continuous-time properties).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import control as ctl
from . import dynamics as dyn
from . import reference as ref
from .control import ControlLaw, ControllerState
from .dynamics import ManipulatorParams, N_JOINTS, N_PARAMS
from .reference import (
    ConfigError,
    FeedbackKind,
    Interconnection,
    ReferenceConfig,
    ReferenceForm,
    ReferenceState,
    SineTrajectory,
)

__all__ = [
    "TauStar",
    "SimConfig",
    "SimLog",
    "SimAborted",
    "run",
    "step",
    "diag_psi",
    "diag_remainder",
    "diag_lyapunov",
    "linear_ce_response",
    "gain_condition_check",
    "GainCondition",
    "rms_window",
    "accel_error_rms",
]


# -- reference-torque signals --------------------------------------------------

class TauStar:
    """Reference/disturbance torque signal tau_star(t) in R^2.

    Kinds: zero; step (amplitude after t_on); sine (amplitude, freq in Hz,
    phase); file (sampled table, linear interpolation, end values held).
    """

    def __init__(self, kind: str = "zero", amplitude=(0.0, 0.0), t_on: float = 0.0,
                 freq: float = 0.0, phase: float = 0.0, path: str = ""):
        self.kind = kind
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.t_on = float(t_on)
        self.freq = float(freq)
        self.phase = float(phase)
        self.path = path
        self._table = None
        if kind not in ("zero", "step", "sine", "file"):
            raise ConfigError(f"unknown tau_star kind '{kind}'")
        if kind == "file":
            data = np.loadtxt(path, delimiter=",", ndmin=2)
            if data.shape[1] != 3:
                raise ConfigError("tau_star sample file needs columns t, v1, v2")
            self._table = data

    def __call__(self, t: float) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(N_JOINTS)
        if self.kind == "step":
            return self.amplitude if t >= self.t_on else np.zeros(N_JOINTS)
        if self.kind == "sine":
            return self.amplitude * math.sin(2.0 * math.pi * self.freq * t + self.phase)
        tbl = self._table
        return np.array([np.interp(t, tbl[:, 0], tbl[:, 1]),
                         np.interp(t, tbl[:, 0], tbl[:, 2])])


class ControlUpdate(Enum):
    ZOH = "zoh"
    CONTINUOUS = "continuous"


# -- configuration -------------------------------------------------------------

@dataclass
class SimConfig:
    """Complete description of one closed-loop run."""

    plant: ManipulatorParams = field(default_factory=lambda: ManipulatorParams(3.6, 2.7, 1.8, 1.8))
    ref: ReferenceConfig = field(default_factory=ReferenceConfig)
    law: ControlLaw = ControlLaw.DC_VARIABLE_GAIN
    gamma: np.ndarray = field(default_factory=lambda: 10.0 * np.eye(N_PARAMS))
    theta_hat0: np.ndarray = field(default_factory=lambda: np.zeros(N_PARAMS))
    trajectory: object = field(default_factory=SineTrajectory)
    q0: np.ndarray = None          # type: ignore[assignment]  # None -> q_d(0)
    qdot0: np.ndarray = None       # type: ignore[assignment]  # None -> qdot_d(0)
    dt_control: float = 0.005
    dt_plant: float = 0.001
    t_end: float = 20.0
    tau_star: TauStar = field(default_factory=TauStar)
    seed: int = 0
    log_every: int = 1
    control_update: ControlUpdate = ControlUpdate.ZOH
    theta_box: tuple = None        # type: ignore[assignment]  # (lo, hi) arrays, ID laws
    z0_offset: np.ndarray = None   # type: ignore[assignment]  # verification aid
    freeze_adaptation_at: float = None  # type: ignore[assignment]  # hold theta_hat from here on
    literal_shadow: bool = False   # co-integrate the literal reference dynamics
    log_extras: bool = False       # record W, Wstar, qdd, ... for diagnostics

    def validate(self):
        if self.t_end < 0.0:
            raise ConfigError("t_end must be non-negative")
        if self.dt_plant <= 0.0 or self.dt_control <= 0.0:
            raise ConfigError("time steps must be positive")
        ratio = self.dt_control / self.dt_plant
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("dt_control must be a positive integer multiple of dt_plant")
        if self.log_every < 1:
            raise ConfigError("log_every must be >= 1")
        gam = np.asarray(self.gamma, dtype=float)
        if gam.shape != (N_PARAMS, N_PARAMS) or np.any(np.abs(gam - gam.T) > 0.0) \
                or np.linalg.eigvalsh(gam)[0] <= 0.0:
            raise ConfigError("adaptation gain must be symmetric positive definite")
        want_constant = self.law.constant_gain
        have_constant = self.ref.feedback is FeedbackKind.CONSTANT_GAIN
        if want_constant != have_constant:
            raise ConfigError("feedback kind of the reference dynamics must match the "
                              "torque law (constant-gain laws pair with constant-gain "
                              "reference coupling)")
        if self.literal_shadow and self.ref.ell not in (2, 3):
            raise ConfigError("the co-integrated literal reference exists for degrees 2 and 3")
        self.ref.validate()

    def initial_states(self):
        traj0 = self.trajectory.eval(0.0, 2)
        q0 = traj0[0].copy() if self.q0 is None else np.asarray(self.q0, dtype=float)
        qdot0 = traj0[1].copy() if self.qdot0 is None else np.asarray(self.qdot0, dtype=float)
        mhat0 = dyn.inertia(q0, np.asarray(self.theta_hat0, dtype=float))
        rstate = ref.init_reference(q0, qdot0, traj0, mhat0, self.ref)
        if self.z0_offset is not None:
            rstate.x[:N_JOINTS] += np.asarray(self.z0_offset, dtype=float)
        cstate = ControllerState(theta_hat=np.asarray(self.theta_hat0, dtype=float).copy())
        return dyn.RobotState(q=q0, qdot=qdot0), rstate, cstate


class SimAborted(RuntimeError):
    """Raised internally when the state stops being finite."""


# -- run log -------------------------------------------------------------------

CSV_COLUMNS = ("t", "q1", "q2", "qd1", "qd2", "dq1", "dq2", "e1", "e2",
               "edot1", "edot2", "z1", "z2", "s1", "s2", "tau1", "tau2",
               "taustar1", "taustar2", "that1", "that2", "that3",
               "psi1", "psi2", "V", "rem1", "rem2")


@dataclass
class SimLog:
    """Time-indexed record of a run at the (decimated) control rate."""

    t: np.ndarray
    q: np.ndarray
    q_d: np.ndarray
    qdot: np.ndarray
    e: np.ndarray
    edot: np.ndarray
    z: np.ndarray
    s: np.ndarray
    tau: np.ndarray
    tau_star: np.ndarray
    theta_hat: np.ndarray
    psi: np.ndarray
    V: np.ndarray
    rem: np.ndarray = None          # type: ignore[assignment]  # filled by a later pass
    aborted: bool = False
    abort_row: int = -1
    abort_reason: str = ""
    extras: dict = None             # type: ignore[assignment]
    config: SimConfig = None        # type: ignore[assignment]

    def __len__(self):
        return self.t.shape[0]


# -- engine internals ----------------------------------------------------------

class _Engine:
    """Precomputed bindings for one run (slices, gains, trajectory)."""

    def __init__(self, cfg: SimConfig):
        cfg.validate()
        self.cfg = cfg
        self.theta = cfg.plant.theta
        self.gamma = np.asarray(cfg.gamma, dtype=float)
        self.gamma_inv = np.linalg.inv(self.gamma)
        self.lam_c = cfg.ref.lambda_c
        self.lam_c_star = cfg.ref.lambda_c_star
        ell = cfg.ref.ell
        o = 4 + 2 * ell
        self.sl_q = slice(0, 2)
        self.sl_qdot = slice(2, 4)
        self.sl_ref = slice(4, o)
        self.sl_w = slice(o, o + 6)
        self.sl_wstar = slice(o + 6, o + 12)
        self.sl_tauf = slice(o + 12, o + 14)
        self.sl_theta = slice(o + 14, o + 17)
        self.n_state = o + 17
        if cfg.literal_shadow:
            self.sl_shadow = slice(self.n_state, self.n_state + 2 * cfg.ref.ell)
            self.n_state += 2 * cfg.ref.ell
        self.traj_order = cfg.ref.ell + 1 if cfg.literal_shadow else 2
        # invertibility of the estimated inertia is the known hazard of the
        # inverse-dynamics baselines; flag it once the estimate has entered
        # (and then leaves) the positive definite region
        self.monitor_mhat = cfg.law in (ControlLaw.ID_DIRECT_A, ControlLaw.ID_DIRECT_B,
                                        ControlLaw.ID_INDIRECT)
        self.mhat_was_pd = False

    def pack(self, plant, rstate, cstate) -> np.ndarray:
        y = np.zeros(self.n_state)
        y[self.sl_q] = plant.q
        y[self.sl_qdot] = plant.qdot
        y[self.sl_ref] = rstate.x
        y[self.sl_w] = cstate.W.ravel()
        y[self.sl_wstar] = cstate.Wstar.ravel()
        y[self.sl_tauf] = cstate.tau_f
        y[self.sl_theta] = cstate.theta_hat
        if self.cfg.literal_shadow:
            rc = self.cfg.ref
            traj0 = self.cfg.trajectory.eval(0.0, 3)
            mhat0 = dyn.inertia(plant.q, cstate.theta_hat)
            z0, zdot0 = ref.recover_z(rstate, plant.q, plant.qdot, traj0, mhat0, rc)
            if rc.ell == 2:
                y[self.sl_shadow] = np.concatenate([z0, zdot0])
            else:
                # auxiliary block w = zddot + shift*qddot; the state map makes
                # its initial value acceleration-free
                mu_ls = rc.deriv_gain * rc.lambda_s
                extra = (rc.alphas[2] if rc.form is ReferenceForm.ORIGINAL
                         else 3.0 * rc.alpha ** 2) * plant.qdot
                w0 = (rstate.x[4:6] + traj0[3] - mu_ls * (mhat0 @ (z0 - plant.qdot))
                      + rc.state_shift * traj0[2] - extra)
                y[self.sl_shadow] = np.concatenate([z0, zdot0, w0])
        return y

    def unpack(self, y):
        plant = dyn.RobotState(q=y[self.sl_q].copy(), qdot=y[self.sl_qdot].copy())
        rstate = ReferenceState(x=y[self.sl_ref].copy())
        cstate = ControllerState(theta_hat=y[self.sl_theta].copy(),
                                 W=y[self.sl_w].reshape(2, 3).copy(),
                                 Wstar=y[self.sl_wstar].reshape(2, 3).copy(),
                                 tau_f=y[self.sl_tauf].copy())
        return plant, rstate, cstate

    def _theta_rate(self, q, s, mhat, W, Wstar, theta_hat, tau_f):
        cfg = self.cfg
        law = cfg.law
        if law in (ControlLaw.DC_VARIABLE_GAIN, ControlLaw.DC_CONSTANT_GAIN):
            rate = ctl.adaptation_filtered(W, s, self.gamma)
        elif law is ControlLaw.DC_CONSTANT_GAIN_NO_M:
            rate = ctl.adaptation_no_m(q, Wstar, mhat, s, self.gamma,
                                       self.lam_c, self.lam_c_star)
        elif law is ControlLaw.ID_DIRECT_A:
            rate = ctl.adaptation_direct(Wstar, s, self.gamma)
        elif law is ControlLaw.ID_DIRECT_B:
            rate = ctl.adaptation_direct(Wstar, s, self.gamma, mhat=mhat)
        else:
            rate = ctl.adaptation_indirect(Wstar, theta_hat, tau_f, self.gamma)
        if cfg.theta_box is not None:
            lo, hi = cfg.theta_box
            theta_hat = np.asarray(theta_hat)
            rate = rate.copy()
            rate[(theta_hat <= lo) & (rate < 0.0)] = 0.0
            rate[(theta_hat >= hi) & (rate > 0.0)] = 0.0
        return rate

    def control_tuple(self, t, y):
        """(z, zdot, s, theta_hat_dot, tau, mhat, traj) at the given instant."""
        cfg = self.cfg
        q = y[self.sl_q]
        qdot = y[self.sl_qdot]
        theta_hat = y[self.sl_theta]
        traj = cfg.trajectory.eval(t, self.traj_order)
        mhat = dyn.inertia(q, theta_hat)
        rstate = ReferenceState(x=y[self.sl_ref])
        z, zdot = ref.recover_z(rstate, q, qdot, traj, mhat, cfg.ref)
        s = qdot - z
        W = y[self.sl_w].reshape(2, 3)
        Wstar = y[self.sl_wstar].reshape(2, 3)
        if cfg.freeze_adaptation_at is not None and t >= cfg.freeze_adaptation_at:
            th_dot = np.zeros(N_PARAMS)
        else:
            th_dot = self._theta_rate(q, s, mhat, W, Wstar, theta_hat, y[self.sl_tauf])
        cstate = ControllerState(theta_hat=theta_hat, W=W, Wstar=Wstar,
                                 tau_f=y[self.sl_tauf])
        tau = ctl.control_torque(cfg.law, q, qdot, z, zdot, s, cstate, th_dot,
                                 self.lam_c, self.lam_c_star, mhat=mhat)
        return z, zdot, s, th_dot, tau, mhat, traj

    def rhs(self, t, y, tau_held):
        cfg = self.cfg
        z, zdot, s, th_dot, tau_law, mhat, traj = self.control_tuple(t, y)
        tau = tau_law if tau_held is None else tau_held
        q = y[self.sl_q]
        qdot = y[self.sl_qdot]
        tau_star = cfg.tau_star(t)
        qdd = dyn.forward_dynamics(q, qdot, tau, tau_star, self.theta)
        dy = np.empty_like(y)
        dy[self.sl_q] = qdot
        dy[self.sl_qdot] = qdd
        rstate = ReferenceState(x=y[self.sl_ref])
        if cfg.ref.ell == 1:
            dy[self.sl_ref] = zdot
        else:
            dy[self.sl_ref] = ref.reference_rhs(rstate, q, qdot, traj, mhat, cfg.ref)
        y_track = dyn.tracking_regressor(q, qdot, z, zdot, s, self.lam_c,
                                         include_feedback=not cfg.law.plain_regressor)
        dy[self.sl_w] = (-self.lam_c * y[self.sl_w].reshape(2, 3) + y_track).ravel()
        y_star = dyn.accel_regressor(q, qdot, qdd)
        dy[self.sl_wstar] = (-self.lam_c * y[self.sl_wstar].reshape(2, 3) + y_star).ravel()
        dy[self.sl_tauf] = -self.lam_c * y[self.sl_tauf] + tau
        dy[self.sl_theta] = th_dot
        if cfg.literal_shadow:
            dy[self.sl_shadow] = self._shadow_rhs(y, qdot, qdd, th_dot, mhat, traj, q)
        return dy

    def _shadow_rhs(self, y, qdot, qdd, th_dot, mhat, traj, q):
        """Literal reference dynamics co-integrated as a passenger.

        Unlike the production realization this consumes the exact plant
        acceleration available inside the engine (for degree 3 the jerk term
        is absorbed into an auxiliary block w = zddot + shift*qddot so that it
        never needs an explicit jerk input). Matching z trajectories certify
        the degree-reduced realization.
        """
        cfg = self.cfg.ref
        sh = y[self.sl_shadow]
        z_lit, zdot_lit = sh[:2], sh[2:4]
        e = q - traj[0]
        edot = qdot - traj[1]
        eddot = qdd - traj[2]
        v = qdot - z_lit
        # full d/dt[Mhat v]: configuration rate + estimate rate + Mhat vdot
        dmv = (dyn.inertia_dot(q, qdot, y[self.sl_theta]) @ v
               + dyn.inertia(q, th_dot) @ v + mhat @ (qdd - zdot_lit))
        couple = ref._zero_order_coupling(cfg, mhat, v)
        mu_ls = cfg.deriv_gain * cfg.lambda_s

        if cfg.ell == 2:
            if cfg.form is ReferenceForm.ORIGINAL:
                a0, a1, a2 = cfg.alphas
                zddot = traj[3] - a2 * eddot - a1 * edot - a0 * e + mu_ls * dmv + couple
            else:
                lam = ref._lambda_matrix(cfg)
                a = cfg.alpha
                zddot = (traj[3] - 2.0 * a * eddot - a * a * edot
                         - lam @ (zdot_lit - traj[2]) - 2.0 * a * (lam @ edot)
                         - a * a * (lam @ e) + mu_ls * dmv + couple)
            return np.concatenate([zdot_lit, zddot])

        w = sh[4:6]
        zddot_lit = w - cfg.state_shift * qdd
        if cfg.form is ReferenceForm.ORIGINAL:
            a0, a1, a2, a3 = cfg.alphas
            dw = (traj[4] + a3 * traj[3] - a2 * eddot - a1 * edot - a0 * e
                  + mu_ls * dmv + couple)
        else:
            lam = ref._lambda_matrix(cfg)
            a = cfg.alpha
            dw = (traj[4] + 3.0 * a * traj[3] - 3.0 * a * a * eddot - a ** 3 * edot
                  - lam @ (zddot_lit - traj[3]) - 3.0 * a * (lam @ eddot)
                  - 3.0 * a * a * (lam @ edot) - a ** 3 * (lam @ e)
                  + mu_ls * dmv + couple)
        return np.concatenate([zdot_lit, zddot_lit, dw])

    def rk4(self, t, y, h, tau_held):
        k1 = self.rhs(t, y, tau_held)
        k2 = self.rhs(t + 0.5 * h, y + (0.5 * h) * k1, tau_held)
        k3 = self.rhs(t + 0.5 * h, y + (0.5 * h) * k2, tau_held)
        k4 = self.rhs(t + h, y + h * k3, tau_held)
        return y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)

    def advance_period(self, t, y):
        """One control period: freeze the torque if configured, substep with RK4."""
        cfg = self.cfg
        if cfg.control_update is ControlUpdate.ZOH:
            tau_held = self.control_tuple(t, y)[4]
        else:
            tau_held = None
        n_sub = int(round(cfg.dt_control / cfg.dt_plant))
        h = cfg.dt_control / n_sub
        try:
            for j in range(n_sub):
                y = self.rk4(t + j * h, y, h, tau_held)
                if cfg.theta_box is not None:
                    np.clip(y[self.sl_theta], cfg.theta_box[0], cfg.theta_box[1],
                            out=y[self.sl_theta])
        except (ValueError, ArithmeticError) as exc:
            # trig/linalg on a non-finite state: the run has already blown up
            raise SimAborted(f"state left the finite range ({exc})") from None
        if not np.all(np.isfinite(y)):
            raise SimAborted("state left the finite range")
        if self.monitor_mhat:
            mhat = dyn.inertia(y[self.sl_q], y[self.sl_theta])
            pd = (mhat[1, 1] > 0.0
                  and mhat[0, 0] * mhat[1, 1] - mhat[0, 1] * mhat[1, 0] > 1e-12)
            if pd:
                self.mhat_was_pd = True
            elif self.mhat_was_pd:
                raise SimAborted("estimated inertia lost positive definiteness "
                                 "(known hazard of the inverse-dynamics laws)")
        return y

    def observe(self, t, y):
        cfg = self.cfg
        z, zdot, s, th_dot, tau, mhat, traj = self.control_tuple(t, y)
        q = y[self.sl_q]
        qdot = y[self.sl_qdot]
        theta_hat = y[self.sl_theta]
        dtheta = theta_hat - self.theta
        W = y[self.sl_w].reshape(2, 3)
        Wstar = y[self.sl_wstar].reshape(2, 3)
        if cfg.law.uses_wstar:
            psi = mhat @ s - Wstar @ dtheta
        else:
            psi = dyn.inertia(q, self.theta) @ s - W @ dtheta
        weight = self.lam_c_star if cfg.law is ControlLaw.DC_CONSTANT_GAIN else 1.0
        v_val = 0.5 * float(psi @ psi) + 0.5 * weight * float(dtheta @ (self.gamma_inv @ dtheta))
        ts = cfg.tau_star(t)
        row = dict(t=t, q=q.copy(), q_d=traj[0].copy(), qdot=qdot.copy(),
                   e=q - traj[0], edot=qdot - traj[1], z=z.copy(), s=s.copy(),
                   tau=tau.copy(), tau_star=ts, theta_hat=theta_hat.copy(),
                   psi=psi, V=v_val)
        if cfg.log_extras:
            qdd = dyn.forward_dynamics(q, qdot, tau, ts, self.theta)
            row["extras"] = dict(W=W.copy(), Wstar=Wstar.copy(), qdd=qdd,
                                 theta_hat_dot=th_dot.copy(), zdot=zdot.copy(),
                                 tau_f=y[self.sl_tauf].copy())
            if cfg.literal_shadow:
                row["extras"]["z_lit"] = y[self.sl_shadow][:2].copy()
                row["extras"]["zdot_lit"] = y[self.sl_shadow][2:].copy()
        return row


def step(plant, rstate, cstate, t, cfg: SimConfig):
    """Advance the coupled system by one control period; returns new states."""
    eng = _Engine(cfg)
    y = eng.pack(plant, rstate, cstate)
    y = eng.advance_period(t, y)
    return eng.unpack(y)


def run(cfg: SimConfig) -> SimLog:
    """Integrate the full horizon and return the control-rate log."""
    eng = _Engine(cfg)
    plant, rstate, cstate = cfg.initial_states()
    if cfg.law.constant_gain:
        gc = gain_condition_check(cfg.ref.lambda_c_star, cfg.ref.lambda_c,
                                  cfg.plant.theta)
        if cfg.law is ControlLaw.DC_CONSTANT_GAIN and not gc.ok:
            raise ConfigError(
                f"constant-gain condition violated: lambda_c_star = "
                f"{cfg.ref.lambda_c_star} <= threshold {gc.threshold:.6g}")
    y = eng.pack(plant, rstate, cstate)
    n_ctrl = int(round(cfg.t_end / cfg.dt_control)) if cfg.t_end > 0 else 0
    rows = []
    aborted = False
    abort_row = -1
    abort_reason = ""
    for k in range(n_ctrl + 1):
        t = k * cfg.dt_control
        if k % cfg.log_every == 0 or k == n_ctrl:
            rows.append(eng.observe(t, y))
        if k == n_ctrl:
            break
        try:
            y = eng.advance_period(t, y)
        except SimAborted as exc:
            aborted = True
            abort_row = len(rows) - 1
            abort_reason = str(exc)
            break
    return _collect(rows, cfg, aborted, abort_row, abort_reason)


def _collect(rows, cfg, aborted, abort_row, abort_reason="") -> SimLog:
    def stack(key):
        return np.array([r[key] for r in rows])

    extras = None
    if cfg.log_extras:
        keys = rows[0]["extras"].keys()
        extras = {k: np.array([r["extras"][k] for r in rows]) for k in keys}
    return SimLog(t=stack("t"), q=stack("q"), q_d=stack("q_d"), qdot=stack("qdot"),
                  e=stack("e"), edot=stack("edot"), z=stack("z"), s=stack("s"),
                  tau=stack("tau"), tau_star=stack("tau_star"),
                  theta_hat=stack("theta_hat"), psi=stack("psi"), V=stack("V"),
                  aborted=aborted, abort_row=abort_row, abort_reason=abort_reason,
                  extras=extras, config=cfg)


# -- diagnostics ---------------------------------------------------------------

def diag_psi(q, s, W, theta_hat, theta_true) -> np.ndarray:
    """Composite error M(q) s - W (theta_hat - theta_true); ground truth only."""
    dtheta = theta_hat - theta_true
    return dyn.inertia(q, theta_true) @ s - W @ dtheta


def _fd_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the order-th derivative at offset zero."""
    a = np.vander(offsets.astype(float), increasing=True).T
    b = np.zeros(len(offsets))
    b[order] = math.factorial(order)
    return np.linalg.solve(a, b)


def diag_remainder(s: np.ndarray, dt: float, ell: int) -> np.ndarray:
    """d^ell s / dt^ell by central finite differences (one-sided at the ends)."""
    if ell not in (1, 2, 3):
        raise ValueError("remainder order must be 1, 2 or 3")
    n = s.shape[0]
    half = {1: 1, 2: 1, 3: 2}[ell]
    width = ell + 3  # one-sided window, keeps O(h^2) at the ends
    if n < width:
        raise ValueError(f"log too short for the order-{ell} stencil ({n} < {width})")
    out = np.empty_like(s)
    if ell == 1:
        out[1:-1] = (s[2:] - s[:-2]) / (2.0 * dt)
    elif ell == 2:
        out[1:-1] = (s[2:] - 2.0 * s[1:-1] + s[:-2]) / dt ** 2
    else:
        out[2:-2] = (s[4:] - 2.0 * s[3:-1] + 2.0 * s[1:-3] - s[:-4]) / (2.0 * dt ** 3)
    idx = np.arange(width)
    for i in range(half):
        w = _fd_weights(idx - i, ell)
        out[i] = np.tensordot(w, s[:width], axes=(0, 0)) / dt ** ell
        w = _fd_weights(idx - (width - 1 - i), ell)
        out[n - 1 - i] = np.tensordot(w, s[-width:], axes=(0, 0)) / dt ** ell
    return out


def diag_lyapunov(log: SimLog, theta_true: np.ndarray, law: ControlLaw,
                  gamma: np.ndarray, lam_c_star: float = 0.0,
                  quasi: bool = False) -> np.ndarray:
    """Lyapunov-style diagnostic series along a logged run.

    Pointwise form: 0.5 |composite|^2 + 0.5 w dtheta^T Gamma^-1 dtheta with
    w = lam_c_star for the constant-gain law, else 1. With quasi=True the
    velocity-level integral form is accumulated by trapezoid quadrature and
    its bounding constant is fixed to the run's final accumulated value.
    """
    gamma_inv = np.linalg.inv(np.asarray(gamma, dtype=float))
    dtheta = log.theta_hat - theta_true
    quad = 0.5 * np.einsum("ij,jk,ik->i", dtheta, gamma_inv, dtheta)
    if not quasi:
        w = lam_c_star if law is ControlLaw.DC_CONSTANT_GAIN else 1.0
        return 0.5 * np.sum(log.psi ** 2, axis=1) + w * quad
    n = len(log)
    s_m_s = np.empty(n)
    psi_minv_psi = np.empty(n)
    for i in range(n):
        m = dyn.inertia(log.q[i], theta_true)
        s_m_s[i] = log.s[i] @ m @ log.s[i]
        psi_minv_psi[i] = log.psi[i] @ np.linalg.solve(m, log.psi[i])
    int_sms = _cumtrapz(s_m_s, log.t)
    int_psi = _cumtrapz(psi_minv_psi, log.t)
    bound = int_psi[-1]
    return 0.5 * int_sms + quad + (bound - int_psi)


def _cumtrapz(y, t):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def linear_ce_response(cfg: SimConfig, tau_star: TauStar = None,
                       t_end: float = None):
    """Tracking error of the certainty-equivalence linear comparison model.

    The filtered-torque channel pdot = -lam_c p + tau_star cascades into the
    error polynomial; the full interconnection feeds lam_s * tau_star exactly,
    the lowfreq one feeds lam_s * lam_c * p. Only variable-gain feedback has a
    linear comparison model.
    """
    rc = cfg.ref
    if rc.feedback is not FeedbackKind.VARIABLE_GAIN:
        raise ConfigError("the linear comparison model is defined for "
                          "variable-gain feedback only")
    alphas = np.array(ref.effective_alphas(rc))
    ell_eff = len(alphas) - 1
    signal = cfg.tau_star if tau_star is None else tau_star
    horizon = cfg.t_end if t_end is None else t_end
    mu = rc.deriv_gain
    lam_c, lam_s = rc.lambda_c, rc.lambda_s
    nblk = ell_eff + 1

    def rhs(t, x):
        e_blocks = x[: 2 * nblk].reshape(nblk, 2)
        p = x[2 * nblk:]
        ts = signal(t)
        drive = lam_s * (lam_c * p + mu * (ts - lam_c * p))
        top = -np.tensordot(alphas, e_blocks, axes=(0, 0)) + drive
        dx = np.empty_like(x)
        dx[: 2 * (nblk - 1)] = x[2: 2 * nblk]
        dx[2 * (nblk - 1): 2 * nblk] = top
        dx[2 * nblk:] = -lam_c * p + ts
        return dx

    x = np.zeros(2 * nblk + 2)
    n_ctrl = int(round(horizon / cfg.dt_control)) if horizon > 0 else 0
    n_sub = int(round(cfg.dt_control / cfg.dt_plant))
    h = cfg.dt_control / n_sub
    t_out = np.empty(n_ctrl + 1)
    e_out = np.empty((n_ctrl + 1, 2))
    for k in range(n_ctrl + 1):
        t_out[k] = k * cfg.dt_control
        e_out[k] = x[:2]
        if k == n_ctrl:
            break
        t = t_out[k]
        for j in range(n_sub):
            tj = t + j * h
            k1 = rhs(tj, x)
            k2 = rhs(tj + 0.5 * h, x + 0.5 * h * k1)
            k3 = rhs(tj + 0.5 * h, x + 0.5 * h * k2)
            k4 = rhs(tj + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return t_out, e_out


@dataclass(frozen=True)
class GainCondition:
    ok: bool
    margin: float
    threshold: float
    max_eig: float
    q2_at_max: float


def gain_condition_check(lam_c_star: float, lam_c: float, theta: np.ndarray,
                         q2_step: float = 0.005) -> GainCondition:
    """Constant-gain feedback condition lam_c_star > lam_c/4 * max eig M(q).

    The inertia matrix depends on q2 only, so the maximum eigenvalue is swept
    over one revolution of q2 at the given resolution.
    """
    grid = np.arange(0.0, 2.0 * math.pi, q2_step)
    c2 = np.cos(grid)
    a = theta[0] + theta[1] + 2.0 * theta[2] * c2
    b = theta[1] + theta[2] * c2
    d = theta[1]
    # closed-form larger eigenvalue of [[a, b], [b, d]]
    eig = 0.5 * (a + d) + np.sqrt(0.25 * (a - d) ** 2 + b ** 2)
    i = int(np.argmax(eig))
    max_eig = float(eig[i])
    threshold = 0.25 * lam_c * max_eig
    return GainCondition(ok=lam_c_star > threshold, margin=lam_c_star - threshold,
                         threshold=threshold, max_eig=max_eig, q2_at_max=float(grid[i]))


# -- scalar summaries ----------------------------------------------------------

def rms_window(t: np.ndarray, x: np.ndarray, t0: float, t1: float) -> float:
    """RMS of |x| rows over t in [t0, t1]."""
    mask = (t >= t0) & (t <= t1)
    if not np.any(mask):
        raise ValueError("empty window")
    vals = x[mask]
    if vals.ndim == 1:
        return float(np.sqrt(np.mean(vals ** 2)))
    return float(np.sqrt(np.mean(np.sum(vals ** 2, axis=1))))


def accel_error_rms(log: SimLog, t0: float, t1: float) -> float:
    """Smoothness proxy: RMS of the second error derivative over a window."""
    dt = float(log.t[1] - log.t[0])
    eddot = diag_remainder(log.edot, dt, 1)
    return rms_window(log.t, eddot, t0, t1)
