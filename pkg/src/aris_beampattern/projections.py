"""Nearest-point projections used by the waveform and ARIS solvers.

Zero entries take phase 0 wherever a phase is needed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .kernels import dual_roots


class InfeasibleBudgetError(ValueError):
    """A power budget is not positive, so the constraint set is empty."""


class DegenerateInputWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CM:
    """Constant modulus |x_n| = eps1."""

    eps1: float = 1.0

    def __post_init__(self):
        if not self.eps1 > 0:
            raise ValueError("CM modulus must be positive")


@dataclass(frozen=True)
class PAR:
    """||x||^2 = E and PAR(x) <= eta.  ``E=None`` means E = N*L1."""

    eta: float = 1.2
    E: float | None = None

    def __post_init__(self):
        if self.eta < 1:
            raise ValueError("PAR bound eta must be >= 1")
        if self.E is not None and not self.E > 0:
            raise ValueError("PAR energy E must be positive")


@dataclass(frozen=True)
class BM:
    """Bounded modulus eps2 - delta <= |x_n| <= eps2 + delta."""

    eps2: float = 1.0
    delta: float = 0.1

    def __post_init__(self):
        if not 0 <= self.delta <= self.eps2:
            raise ValueError("BM requires 0 <= delta <= eps2")


WaveformConstraint = Union[CM, PAR, BM]


@dataclass(frozen=True)
class DualRootConfig:
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def unit_phase(t: np.ndarray) -> np.ndarray:
    """t/|t| with the convention angle(0) = 0."""
    t = np.asarray(t, dtype=complex)
    mag = np.abs(t)
    out = np.ones_like(t)
    nz = mag > 0
    # via the angle so subnormal entries do not overflow t/|t|
    out[nz] = np.exp(1j * np.angle(t[nz]))
    return out


def project_cm(t, eps1: float = 1.0) -> np.ndarray:
    return eps1 * unit_phase(t)


def project_bm(t, eps2: float = 1.0, delta: float = 0.1) -> np.ndarray:
    if not 0 <= delta <= eps2:
        raise ValueError("BM requires 0 <= delta <= eps2")
    t = np.asarray(t, dtype=complex)
    mag = np.abs(t)
    clipped = np.clip(mag, eps2 - delta, eps2 + delta)
    return np.where(mag == clipped, t, clipped * unit_phase(t))


def project_par(t, eta: float, E: float | None = None) -> np.ndarray:
    """Nearest vector with ||x||^2 = E and max |x_n|^2 <= eta E / M (M = len(t)).

    The k largest-magnitude entries are pinned to the cap with their phase
    kept; the rest are scaled by a common factor to restore the energy.  k is
    the smallest count for which the scaled remainder respects the cap.  Ties
    in magnitude keep index order.
    """
    t = np.asarray(t, dtype=complex).ravel()
    M = t.size
    if E is None:
        E = float(M)
    if not 1 <= eta <= M * (1 + 1e-12):
        raise ValueError(f"eta must lie in [1, {M}]")
    cap = math.sqrt(eta * E / M)
    mag = np.abs(t)
    if not np.any(mag > 0):
        warnings.warn("PAR projection of the zero vector", DegenerateInputWarning, stacklevel=2)
        return np.full(M, math.sqrt(E / M), dtype=complex)

    order = np.argsort(-mag, kind="stable")
    ms = mag[order]
    tail = np.cumsum((ms**2)[::-1])[::-1]                  # sum_{i>=k} |t_(i)|^2
    k = np.arange(M)
    remaining = E - k * cap**2
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = np.sqrt(np.maximum(remaining, 0.0) / tail)
        ok = (remaining >= 0) & (tail > 0) & (gamma * ms <= cap * (1 + 1e-12))
    out = np.empty(M, dtype=complex)
    hits = np.nonzero(ok)[0]
    if hits.size:
        n_cap = int(hits[0])
        rest = order[n_cap:]
        out[order[:n_cap]] = cap * unit_phase(t[order[:n_cap]])
        out[rest] = gamma[n_cap] * t[rest]
        # pin the scaled entries against roundoff above the cap
        over = np.abs(out[rest]) > cap
        if over.any():
            out[rest[over]] = cap * unit_phase(t[rest[over]])
    else:
        # the non-pinned entries are all zero: spread the remaining energy
        n_cap = int(np.count_nonzero(ms > 0))
        n_zero = M - n_cap
        if n_zero == 0:
            out[order] = cap * unit_phase(t[order])
        else:
            fill = math.sqrt(max(E - n_cap * cap**2, 0.0) / n_zero)
            out[order[:n_cap]] = cap * unit_phase(t[order[:n_cap]])
            out[order[n_cap:]] = min(fill, cap)
    return out * math.sqrt(E / np.vdot(out, out).real)


def project_waveform(t, constraint: WaveformConstraint) -> np.ndarray:
    if isinstance(constraint, CM):
        return project_cm(t, constraint.eps1)
    if isinstance(constraint, PAR):
        return project_par(t, constraint.eta, constraint.E)
    if isinstance(constraint, BM):
        return project_bm(t, constraint.eps2, constraint.delta)
    raise TypeError(f"unknown waveform constraint {constraint!r}")


def nominal_modulus(constraint: WaveformConstraint, M: int) -> float:
    if isinstance(constraint, CM):
        return constraint.eps1
    if isinstance(constraint, PAR):
        E = float(M) if constraint.E is None else constraint.E
        return math.sqrt(E / M)
    if isinstance(constraint, BM):
        return constraint.eps2
    raise TypeError(f"unknown waveform constraint {constraint!r}")


def waveform_violation(x, constraint: WaveformConstraint) -> float:
    """Largest violation of the waveform constraint (0 when feasible)."""
    x = np.asarray(x).ravel()
    mag = np.abs(x)
    if isinstance(constraint, CM):
        return float(np.max(np.abs(mag - constraint.eps1)))
    if isinstance(constraint, BM):
        lo, hi = constraint.eps2 - constraint.delta, constraint.eps2 + constraint.delta
        return float(max(np.max(lo - mag), np.max(mag - hi), 0.0))
    if isinstance(constraint, PAR):
        M = x.size
        E = float(M) if constraint.E is None else constraint.E
        energy = float(np.vdot(x, x).real)
        cap2 = constraint.eta * E / M
        return float(max(abs(energy - E) / E, max(np.max(mag**2) - cap2, 0.0) / cap2))
    raise TypeError(f"unknown waveform constraint {constraint!r}")


class PowerBall:
    """Projection onto {y : y^H R y <= Pbar}, R Hermitian PSD.

    The eigendecomposition of R is computed once so that many points (the N
    snapshots, over all iterations) can be projected against the same R.
    """

    def __init__(self, R, Pbar: float, cfg: DualRootConfig | None = None):
        if not Pbar > 0:
            raise InfeasibleBudgetError(f"power budget must be positive, got {Pbar}")
        R = np.asarray(R, dtype=complex)
        try:
            gam, T = np.linalg.eigh(0.5 * (R + R.conj().T))
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"eigendecomposition failed: {exc}") from exc
        self.gamma = np.maximum(gam, 0.0)
        self.T = T
        self.Pbar = float(Pbar)
        self.cfg = cfg or DualRootConfig()

    def multipliers(self, t_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        tp = t_rows @ self.T.conj()                        # rows of T^H t
        w2 = np.abs(tp) ** 2
        curv = np.broadcast_to(self.gamma, w2.shape)
        eps = dual_roots(w2, curv, np.full(w2.shape[0], self.Pbar),
                         self.cfg.tol, self.cfg.max_iter)
        return eps, tp

    def project_rows(self, t_rows: np.ndarray, return_multiplier: bool = False):
        """Project each row of the (B, L) array ``t_rows``."""
        t_rows = np.atleast_2d(np.asarray(t_rows, dtype=complex))
        eps, tp = self.multipliers(t_rows)
        active = eps > 0
        out = t_rows.copy()
        if active.any():
            y = tp[active] / (1.0 + eps[active, None] * self.gamma)
            out[active] = y @ self.T.T
        return (out, eps) if return_multiplier else out


def project_power_ball(t, R, Pbar: float, cfg: DualRootConfig | None = None,
                       return_multiplier: bool = False):
    """argmin ||y - t||^2 s.t. y^H R y <= Pbar, via the scalar dual root."""
    out, eps = PowerBall(R, Pbar, cfg).project_rows(np.asarray(t)[None, :], True)
    return (out[0], float(eps[0])) if return_multiplier else out[0]


def project_diag_ellipsoid_rows(t_rows, pi_rows, PA: float,
                                cfg: DualRootConfig | None = None) -> np.ndarray:
    """Row-wise projection onto {y : sum_l pi_l |y_l|^2 <= PA}."""
    if not PA > 0:
        raise InfeasibleBudgetError(f"power budget must be positive, got {PA}")
    cfg = cfg or DualRootConfig()
    t_rows = np.atleast_2d(np.asarray(t_rows, dtype=complex))
    pi_rows = np.broadcast_to(np.asarray(pi_rows, dtype=float), t_rows.shape)
    eps = dual_roots(np.abs(t_rows) ** 2, pi_rows, np.full(t_rows.shape[0], float(PA)),
                     cfg.tol, cfg.max_iter)
    return t_rows / (1.0 + eps[:, None] * pi_rows)


def project_diag_ellipsoid(t, pi_diag, PA: float, cfg: DualRootConfig | None = None) -> np.ndarray:
    if np.any(np.asarray(pi_diag) < 0):
        raise ValueError("ellipsoid weights must be nonnegative")
    return project_diag_ellipsoid_rows(np.asarray(t)[None, :], np.asarray(pi_diag)[None, :],
                                       PA, cfg)[0]


def project_disk(t, radius: float) -> np.ndarray:
    """Clip each entry's modulus to ``radius``, keeping its phase."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    t = np.asarray(t, dtype=complex)
    mag = np.abs(t)
    scale = np.where(mag > radius, radius / np.where(mag > 0, mag, 1.0), 1.0)
    return t * scale
