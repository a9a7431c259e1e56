"""Region integrals, composite covariances, energies and the ISMR.

A waveform ``x`` is the column stack vec(X) of the L1 x N space-time matrix,
so ``x.reshape(N, L1)[n]`` is the n-th snapshot x(n).  The block-diagonal
I_N (x) Sigma matrices are never formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import AngularRegion, ArrayGeometry, ula_response

DEFAULT_GRID_STEP = 0.1


class DegenerateInputError(ValueError):
    """Raised when a ratio is undefined (zero mainlobe or sidelobe energy)."""


@dataclass(frozen=True)
class IntegralSet:
    """A = int a a^H, D = int b a^H, B = int b b^H over ``region`` (d theta in radians)."""

    A: np.ndarray
    D: np.ndarray
    B: np.ndarray
    region: AngularRegion


@dataclass(frozen=True)
class RegionIntegrals:
    main: IntegralSet
    side: IntegralSet


def quadrature_nodes(region: AngularRegion, grid_step: float = DEFAULT_GRID_STEP):
    """Composite-trapezoid nodes (degrees) and weights (radians) for ``region``."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    nodes, weights = [], []
    for lo, hi in region.intervals:
        n = max(2, int(math.ceil((hi - lo) / grid_step - 1e-9)) + 1)
        th = np.linspace(lo, hi, n)
        h = math.radians((hi - lo) / (n - 1))
        w = np.full(n, h)
        w[0] = w[-1] = h / 2
        nodes.append(th)
        weights.append(w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_region(geom: ArrayGeometry, region: AngularRegion,
                     grid_step: float = DEFAULT_GRID_STEP) -> IntegralSet:
    theta, w = quadrature_nodes(region, grid_step)
    a = ula_response(geom.L1, geom.d, theta).reshape(-1, geom.L1)
    b = ula_response(geom.L2, geom.d_tilde, theta + geom.theta_p).reshape(-1, geom.L2)
    wa = w[:, None] * a.conj()
    A = a.T @ wa
    D = b.T @ wa
    B = b.T @ (w[:, None] * b.conj())
    return IntegralSet(A=A, D=D, B=B, region=region)


def integrate_regions(geom: ArrayGeometry, main: AngularRegion, side: AngularRegion,
                      grid_step: float = DEFAULT_GRID_STEP) -> RegionIntegrals:
    return RegionIntegrals(integrate_region(geom, main, grid_step),
                           integrate_region(geom, side, grid_step))


def blocks(x: np.ndarray, L1: int) -> np.ndarray:
    """View of ``x`` as an (N, L1) array of snapshots."""
    return np.asarray(x).reshape(-1, L1)


def waveform_gram(x: np.ndarray, L1: int) -> np.ndarray:
    """X X^H (L1 x L1)."""
    xb = blocks(x, L1)
    return xb.T @ xb.conj()


def composite_sigma(iset: IntegralSet, G: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sigma = A + G^H V^H D + D^H V G + G^H V^H B V G with V = Diag(v)."""
    VG = np.asarray(v)[:, None] * G
    cross = VG.conj().T @ iset.D
    sigma = iset.A + cross + cross.conj().T + VG.conj().T @ iset.B @ VG
    return 0.5 * (sigma + sigma.conj().T)


def quadratic_energy(x: np.ndarray, sigma: np.ndarray) -> float:
    """x^H (I_N (x) Sigma) x = tr(Sigma X X^H)."""
    gram = waveform_gram(x, sigma.shape[0])
    return float(np.real(np.sum(sigma * gram.T)))


def region_energies(x, v, G, isets: RegionIntegrals) -> tuple[float, float]:
    """(sidelobe energy, mainlobe energy)."""
    return (quadratic_energy(x, composite_sigma(isets.side, G, v)),
            quadratic_energy(x, composite_sigma(isets.main, G, v)))


def ismr(x, v, G, isets: RegionIntegrals) -> float:
    """Integrated sidelobe-to-mainlobe ratio (linear)."""
    e_side, e_main = region_energies(x, v, G, isets)
    if not e_main > 0:
        raise DegenerateInputError("mainlobe energy is zero")
    return e_side / e_main


def to_db(value: float) -> float:
    return 10.0 * math.log10(value) if value > 0 else -math.inf


def ismr_db(x, v, G, isets: RegionIntegrals) -> float:
    return to_db(ismr(x, v, G, isets))


def beampattern(x, v, G, geom: ArrayGeometry, theta_deg) -> np.ndarray:
    """P(theta) = sum_n |c^H(theta) x(n)|^2 with c = a + G^H V^H b(theta + theta_p)."""
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    xb = blocks(x, geom.L1)                                   # (N, L1)
    a = ula_response(geom.L1, geom.d, theta)                  # (T, L1)
    b = ula_response(geom.L2, geom.d_tilde, theta + geom.theta_p)
    los = a.conj() @ xb.T                                     # (T, N)
    nlos = b.conj() @ ((np.asarray(v)[:, None] * G) @ xb.T)
    return np.sum(np.abs(los + nlos) ** 2, axis=1)


def beampattern_curve(x, v, G, geom: ArrayGeometry, theta_grid=None,
                      grid_step: float = DEFAULT_GRID_STEP):
    """(theta_deg, P_dB) arrays over ``theta_grid`` (default -90..90 at ``grid_step``)."""
    if theta_grid is None:
        n = int(round(180.0 / grid_step)) + 1
        theta_grid = np.linspace(-90.0, 90.0, n)
    theta_grid = np.asarray(theta_grid, dtype=float)
    p = beampattern(x, v, G, geom, theta_grid)
    with np.errstate(divide="ignore"):
        p_db = 10.0 * np.log10(np.maximum(p, 1e-300))
    return theta_grid, p_db
