"""Consensus ADMM for the waveform subproblem.

For fixed reflection coefficients v and Dinkelbach parameter mu, minimizes

    x^H (I_N (x) (mu Sigma_s - Sigma_m)) x
    s.t. ||V G x(n)||^2 + ||v||^2 sigma_v^2 <= P_A  for every snapshot n,
         x in the waveform set (CM / PAR / BM),

with one copy of x per constraint family (``xbar`` for the power balls,
``xhat`` for the waveform set) and scaled duals ``p`` and ``r``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .beampattern import RegionIntegrals, blocks, composite_sigma
from .projections import (DualRootConfig, InfeasibleBudgetError, PowerBall,
                          WaveformConstraint, project_waveform)


class IndefiniteSystemError(ArithmeticError):
    """beta1 I + mu Sigma_s - Sigma_m is not positive definite; raise beta1."""


@dataclass
class CadmmConfig:
    beta1: float | None = None      # None: 2 max(0, lambda_max(Sigma_m - mu Sigma_s)) + 1
    iota1: float | None = None      # None: 1e-4 sqrt(N L1)
    K_max: int = 500
    root: DualRootConfig = field(default_factory=DualRootConfig)


@dataclass
class CadmmState:
    x: np.ndarray
    xbar: np.ndarray
    xhat: np.ndarray
    p: np.ndarray
    r: np.ndarray
    k: int = 0

    @classmethod
    def start(cls, x0) -> "CadmmState":
        x0 = np.asarray(x0, dtype=complex).ravel().copy()
        zero = np.zeros_like(x0)
        return cls(x=x0, xbar=x0.copy(), xhat=x0.copy(), p=zero, r=zero.copy())


@dataclass
class CadmmResult:
    x: np.ndarray
    converged: bool
    iterations: int
    beta1: float
    power_violation: float
    trace: list = field(default_factory=list)   # (k, |dp|, |dr|, objective at xhat)


def default_beta(mu: float, sigma_s, sigma_m) -> float:
    lam = np.linalg.eigvalsh(sigma_m - mu * sigma_s)[-1]
    return 2.0 * max(0.0, float(lam)) + 1.0


def aris_power_ball(v, G, PA: float, sigma_v2: float,
                    cfg: DualRootConfig | None = None) -> PowerBall | None:
    """Per-snapshot constraint x(n)^H R x(n) <= P_A - ||v||^2 sigma_v^2, R = G^H V^H V G.

    Returns None when v = 0 (the constraint is vacuous).
    """
    v = np.asarray(v)
    pbar = PA - float(np.vdot(v, v).real) * sigma_v2
    if not pbar > 0:
        raise InfeasibleBudgetError(
            f"ARIS noise power {PA - pbar:.3e} W exhausts the budget P_A = {PA} W")
    if not np.any(v):
        return None
    VG = v[:, None] * G
    return PowerBall(VG.conj().T @ VG, pbar, cfg)


def power_violation(x, v, G, PA: float, sigma_v2: float) -> float:
    """max_n (||V G x(n)||^2 + ||v||^2 sigma_v^2 - P_A) / P_A, clipped at 0."""
    xb = blocks(x, G.shape[1])
    v = np.asarray(v)
    load = np.sum(np.abs((xb @ G.T) * v) ** 2, axis=1) + float(np.vdot(v, v).real) * sigma_v2
    return max(0.0, float(np.max(load) - PA) / PA)


def update_xbar(state: CadmmState, ball: PowerBall | None, L1: int) -> np.ndarray:
    t = state.x - state.p
    if ball is None:
        return t
    return ball.project_rows(blocks(t, L1)).ravel()


def update_xhat(state: CadmmState, constraint: WaveformConstraint) -> np.ndarray:
    return project_waveform(state.x - state.r, constraint)


class XSystem:
    """Factorization of beta1 I + mu Sigma_s - Sigma_m, shared by all N blocks."""

    def __init__(self, mu: float, sigma_s, sigma_m, beta1: float):
        self.beta1 = float(beta1)
        self.L1 = sigma_s.shape[0]
        Q = mu * sigma_s - sigma_m
        Mat = self.beta1 * np.eye(self.L1) + 0.5 * (Q + Q.conj().T)
        try:
            self.factor = sla.cho_factor(Mat, lower=True)
        except np.linalg.LinAlgError as exc:
            raise IndefiniteSystemError(str(exc)) from exc

    def solve(self, xbar, xhat, p, r) -> np.ndarray:
        rhs = 0.5 * self.beta1 * (xbar + xhat + p + r)
        sol = sla.cho_solve(self.factor, blocks(rhs, self.L1).T)
        return sol.T.ravel()


def update_x(state: CadmmState, system: XSystem) -> np.ndarray:
    return system.solve(state.xbar, state.xhat, state.p, state.r)


def update_duals(state: CadmmState) -> tuple[np.ndarray, np.ndarray]:
    return state.p + state.xbar - state.x, state.r + state.xhat - state.x


def quadratic_objective(x, mu: float, sigma_s, sigma_m) -> float:
    xb = blocks(x, sigma_s.shape[0])
    Q = mu * sigma_s - sigma_m
    return float(np.real(np.einsum("ni,ij,nj->", xb.conj(), Q, xb)))


def run_cadmm(x0, v, mu: float, G, isets: RegionIntegrals, constraint: WaveformConstraint,
              PA: float, sigma_v2: float, cfg: CadmmConfig | None = None,
              record_trace: bool = False) -> CadmmResult:
    """Optimize the waveform for fixed v and mu, starting from ``x0``.

    The returned waveform is the final ``xhat``, which lies in the waveform
    set exactly; its residual power-constraint violation is reported.  If the
    dual increments never fall below ``iota1``, the snapped iterate with the
    lowest objective is returned with ``converged=False``.
    """
    cfg = cfg or CadmmConfig()
    L1 = G.shape[1]
    x0 = np.asarray(x0, dtype=complex).ravel()
    sigma_s = composite_sigma(isets.side, G, v)
    sigma_m = composite_sigma(isets.main, G, v)
    beta1 = cfg.beta1 if cfg.beta1 is not None else default_beta(mu, sigma_s, sigma_m)
    iota1 = cfg.iota1 if cfg.iota1 is not None else 1e-4 * np.sqrt(x0.size)
    ball = aris_power_ball(v, G, PA, sigma_v2, cfg.root)
    system = XSystem(mu, sigma_s, sigma_m, beta1)

    st = CadmmState.start(x0)
    trace = []
    best_obj, best_x = np.inf, st.xhat
    converged = False
    for k in range(1, cfg.K_max + 1):
        st.xbar = update_xbar(st, ball, L1)
        st.xhat = update_xhat(st, constraint)
        st.x = update_x(st, system)
        p_new, r_new = update_duals(st)
        dp = float(np.linalg.norm(p_new - st.p))
        dr = float(np.linalg.norm(r_new - st.r))
        st.p, st.r, st.k = p_new, r_new, k
        obj = quadratic_objective(st.xhat, mu, sigma_s, sigma_m)
        if obj < best_obj:
            best_obj, best_x = obj, st.xhat
        if record_trace:
            trace.append((k, dp, dr, obj))
        if dp <= iota1 and dr <= iota1:
            converged = True
            break
    x_out = st.xhat if converged else best_x
    return CadmmResult(x=x_out, converged=converged, iterations=st.k, beta1=beta1,
                       power_violation=power_violation(x_out, v, G, PA, sigma_v2),
                       trace=trace)
