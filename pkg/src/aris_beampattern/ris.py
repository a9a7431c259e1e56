"""Reflection-coefficient update: CCCP over a difference-of-convex quadratic.

For fixed waveform x and Dinkelbach parameter mu, the energies are quadratic
in v = diag(V):

    x^H Omega x = tr(A X X^H) + 2 Re{v^H dhat} + v^H Bhat v,
    dhat = diag(D X X^H G^H),  Bhat = B (.) (G X X^H G^H)^T,

and the ARIS power constraints become v^H Pi_n v <= P_A with diagonal
Pi_n = |Diag(G x(n))|^2 + sigma_v^2 I.  The concave part -v^H Bhat_m v is
linearized at the current iterate; each convex surrogate is solved by
consensus ADMM with one copy per ellipsoid plus one for the modulus box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .beampattern import RegionIntegrals, blocks, waveform_gram
from .projections import (DualRootConfig, project_diag_ellipsoid_rows,
                          project_disk)


@dataclass(frozen=True)
class RisQuadratics:
    mu: float
    Bhat_s: np.ndarray
    Bhat_m: np.ndarray
    dhat_s: np.ndarray
    dhat_m: np.ndarray
    Pi: np.ndarray          # (N, L2): diagonals of Pi_n
    const_s: float          # tr(A_s X X^H)
    const_m: float

    @property
    def dhat(self) -> np.ndarray:
        return self.mu * self.dhat_s - self.dhat_m


@dataclass
class CccpConfig:
    iota2: float | None = None      # None: 1e-4 sqrt(L2)
    J_max: int = 50
    rho: float | None = None        # None: default_rho
    inner_abs_tol: float = 1e-7
    inner_rel_tol: float = 1e-5
    inner_max_iter: int = 500
    adaptive_rho: bool = False      # residual balancing between primal and dual
    root: DualRootConfig = field(default_factory=DualRootConfig)


@dataclass
class SurrogateResult:
    v: np.ndarray
    converged: bool
    iterations: int


@dataclass
class CccpResult:
    v: np.ndarray
    converged: bool
    iterations: int
    inner_iterations: int
    inner_converged: bool
    trace: list = field(default_factory=list)   # (j, DC objective, max violation)


def _hadamard_quadratic(B, H):
    Bh = B * H.T
    return 0.5 * (Bh + Bh.conj().T)


def build_quadratics(x, G, isets: RegionIntegrals, mu: float, sigma_v2: float) -> RisQuadratics:
    L1 = G.shape[1]
    gram = waveform_gram(x, L1)                      # X X^H
    H = G @ gram @ G.conj().T
    GX = blocks(x, L1) @ G.T                         # rows: (G x(n))^T

    def dhat(iset):
        return np.sum((iset.D @ gram) * G.conj(), axis=1)

    def const(iset):
        return float(np.real(np.sum(iset.A * gram.T)))

    return RisQuadratics(
        mu=float(mu),
        Bhat_s=_hadamard_quadratic(isets.side.B, H),
        Bhat_m=_hadamard_quadratic(isets.main.B, H),
        dhat_s=dhat(isets.side),
        dhat_m=dhat(isets.main),
        Pi=np.abs(GX) ** 2 + sigma_v2,
        const_s=const(isets.side),
        const_m=const(isets.main),
    )


def _quad(M, v) -> float:
    return float(np.real(np.vdot(v, M @ v)))


def upsilon(q: RisQuadratics, v) -> float:
    """mu x^H Omega_s x - x^H Omega_m x as a function of v."""
    side = q.const_s + 2.0 * np.real(np.vdot(v, q.dhat_s)) + _quad(q.Bhat_s, v)
    main = q.const_m + 2.0 * np.real(np.vdot(v, q.dhat_m)) + _quad(q.Bhat_m, v)
    return q.mu * side - main


def dc_objective(q: RisQuadratics, v) -> float:
    return q.mu * _quad(q.Bhat_s, v) - _quad(q.Bhat_m, v) + 2.0 * float(np.real(np.vdot(v, q.dhat)))


def surrogate(q: RisQuadratics, v, vj) -> float:
    """DC objective with -v^H Bhat_m v replaced by its tangent at ``vj``."""
    Bvj = q.Bhat_m @ vj
    return (q.mu * _quad(q.Bhat_s, v) - 2.0 * float(np.real(np.vdot(v, Bvj)))
            + float(np.real(np.vdot(vj, Bvj))) + 2.0 * float(np.real(np.vdot(v, q.dhat))))


def power_loads(q: RisQuadratics, v) -> np.ndarray:
    return q.Pi @ (np.abs(v) ** 2)


def max_violation(q: RisQuadratics, v, varsigma: float, PA: float) -> float:
    """Largest relative violation of the power and modulus constraints."""
    pv = (np.max(power_loads(q, v)) - PA) / PA
    mv = (np.max(np.abs(v)) - varsigma) / varsigma if varsigma > 0 else np.max(np.abs(v))
    return max(0.0, float(pv), float(mv))


def make_feasible(v, Pi, varsigma: float, PA: float) -> np.ndarray:
    """Clip moduli to ``varsigma``, then shrink uniformly into every ellipsoid."""
    v = project_disk(v, varsigma)
    load = float(np.max(Pi @ (np.abs(v) ** 2))) if v.size else 0.0
    if load > PA:
        v = v * math.sqrt(PA / load) * (1.0 - 1e-12)
    return v


def init_reflection(x, G, varsigma: float, PA: float, sigma_v2: float,
                    rng: np.random.Generator) -> np.ndarray:
    """Random phases at a common modulus strictly inside every constraint."""
    L2 = G.shape[0]
    Pi = np.abs(blocks(x, G.shape[1]) @ G.T) ** 2 + sigma_v2
    rho0 = min(varsigma, 0.9 * math.sqrt(PA / float(np.max(Pi.sum(axis=1)))))
    return rho0 * np.exp(2j * np.pi * rng.random(L2))


def default_rho(q: RisQuadratics) -> float:
    """Penalty whose consensus term rho (N+1)/2 matches the mean curvature of mu Bhat_s."""
    N, L2 = q.Pi.shape
    mean_curv = float(np.real(np.trace(q.mu * q.Bhat_s))) / L2
    return 2.0 * mean_curv / (N + 1) if mean_curv > 0 else 1.0


class SurrogateSolver:
    """Consensus ADMM for min_v mu v^H Bhat_s v + 2 Re{v^H c}
    s.t. v^H Pi_n v <= P_A (all n) and |v_l| <= varsigma.

    The system matrix mu Bhat_s + rho (N+1)/2 I is factored once; scaled duals
    persist between calls so successive CCCP steps warm-start.
    """

    def __init__(self, q: RisQuadratics, varsigma: float, PA: float, cfg: CccpConfig):
        self.q, self.varsigma, self.PA, self.cfg = q, varsigma, PA, cfg
        self.rho = cfg.rho if cfg.rho is not None else default_rho(q)
        N, L2 = q.Pi.shape
        self.copies = N + 1
        self._factorize()
        self.lam = np.zeros((N, L2), dtype=complex)
        self.kap = np.zeros(L2, dtype=complex)

    def _factorize(self):
        L2 = self.q.Pi.shape[1]
        M = self.q.mu * self.q.Bhat_s + 0.5 * self.rho * self.copies * np.eye(L2)
        self.factor = sla.cho_factor(M, lower=True)

    def solve(self, vj) -> SurrogateResult:
        q, cfg, rho = self.q, self.cfg, self.rho
        c = q.dhat - q.Bhat_m @ vj
        v = np.asarray(vj, dtype=complex).copy()
        lam, kap = self.lam, self.kap
        sqrt_copies = math.sqrt(self.copies)
        n_dim = math.sqrt(self.copies * v.size)
        converged = False
        it = 0
        for it in range(1, cfg.inner_max_iter + 1):
            W = project_diag_ellipsoid_rows(v - lam, q.Pi, self.PA, cfg.root)
            u = project_disk(v - kap, self.varsigma)
            rhs = 0.5 * rho * (W.sum(axis=0) + lam.sum(axis=0) + u + kap) - c
            v_new = sla.cho_solve(self.factor, rhs)
            rW = W - v_new
            ru = u - v_new
            lam = lam + rW
            kap = kap + ru
            r_pri = math.sqrt(float(np.sum(np.abs(rW) ** 2) + np.sum(np.abs(ru) ** 2)))
            s_dual = rho * sqrt_copies * float(np.linalg.norm(v_new - v))
            v = v_new
            z_norm = math.sqrt(float(np.sum(np.abs(W) ** 2) + np.sum(np.abs(u) ** 2)))
            eps_pri = n_dim * cfg.inner_abs_tol + cfg.inner_rel_tol * max(
                z_norm, sqrt_copies * float(np.linalg.norm(v)))
            y_norm = rho * math.sqrt(float(np.sum(np.abs(lam) ** 2) + np.sum(np.abs(kap) ** 2)))
            eps_dual = n_dim * cfg.inner_abs_tol + cfg.inner_rel_tol * y_norm
            if r_pri <= eps_pri and s_dual <= eps_dual:
                converged = True
                break
            if cfg.adaptive_rho and it % 10 == 0:
                scale = 1.0
                if r_pri > 10.0 * s_dual:
                    scale = 2.0
                elif s_dual > 10.0 * r_pri:
                    scale = 0.5
                if scale != 1.0:
                    # scaled duals carry a factor 1/rho
                    rho *= scale
                    lam = lam / scale
                    kap = kap / scale
                    self.rho = rho
                    self._factorize()
        self.lam, self.kap = lam, kap
        return SurrogateResult(make_feasible(v, q.Pi, self.varsigma, self.PA), converged, it)


def solve_surrogate(q: RisQuadratics, vj, varsigma: float, PA: float,
                    cfg: CccpConfig | None = None) -> SurrogateResult:
    return SurrogateSolver(q, varsigma, PA, cfg or CccpConfig()).solve(vj)


def run_cccp(q: RisQuadratics, v0, varsigma: float, PA: float,
             cfg: CccpConfig | None = None, record_trace: bool = False) -> CccpResult:
    """Minimize the DC objective from feasible ``v0``.

    A surrogate step is kept only if it lowers the surrogate value at the
    expansion point, which makes the true objective non-increasing.
    """
    cfg = cfg or CccpConfig()
    iota2 = cfg.iota2 if cfg.iota2 is not None else 1e-4 * math.sqrt(len(v0))
    v = make_feasible(np.asarray(v0, dtype=complex), q.Pi, varsigma, PA)
    solver = SurrogateSolver(q, varsigma, PA, cfg)
    concave_free = not np.any(q.Bhat_m)
    trace = []
    if record_trace:
        trace.append((0, dc_objective(q, v), max_violation(q, v, varsigma, PA)))
    inner_total = 0
    inner_ok = True
    converged = False
    j = 0
    for j in range(1, cfg.J_max + 1):
        res = solver.solve(v)
        inner_total += res.iterations
        inner_ok &= res.converged
        if surrogate(q, res.v, v) > dc_objective(q, v):
            converged = True
            break
        step = float(np.linalg.norm(res.v - v))
        v = res.v
        if record_trace:
            trace.append((j, dc_objective(q, v), max_violation(q, v, varsigma, PA)))
        if step <= iota2 or concave_free:
            converged = True
            break
    return CccpResult(v=v, converged=converged, iterations=j, inner_iterations=inner_total,
                      inner_converged=inner_ok, trace=trace)
