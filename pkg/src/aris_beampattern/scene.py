"""Array geometry, angular regions and the array-to-ARIS channel.

All spacings are in wavelengths, so the carrier wavelength never appears.
Angles cross the public interface in degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


@dataclass(frozen=True)
class ArrayGeometry:
    L1: int = 10
    L2: int = 64
    N: int = 32
    d: float = 0.5
    d_tilde: float = 0.5
    theta_p: float = 10.0

    def __post_init__(self):
        for name in ("L1", "L2", "N"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.d <= 0 or self.d_tilde <= 0:
            raise DomainError("element spacings must be positive")


@dataclass(frozen=True)
class ChannelModel:
    """Rician array-to-ARIS channel with log-distance path loss.

    ``sigma_v2`` is the ARIS incident-noise variance in watts.  ``position``
    is the ARIS location (metres) relative to the array; it only fixes the
    line-of-sight directions, the path loss uses ``D``.
    """

    PL0_dB: float = -30.0
    D0: float = 1.0
    D: float = 2.0
    alpha: float = 2.2
    K_R: float = 3.0
    sigma_v2: float = 1e-11
    seed: int = 0
    position: tuple[float, float] = (-1.94, 0.5)

    @property
    def path_loss(self) -> float:
        """Linear power path loss PL0 * (D/D0)^-alpha."""
        return 10.0 ** (self.PL0_dB / 10.0) * (self.D / self.D0) ** (-self.alpha)


@dataclass(frozen=True)
class AngularRegion:
    """Union of disjoint closed angular intervals, in degrees."""

    intervals: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        for lo, hi in ivs:
            if not (-90.0 <= lo < hi <= 90.0):
                raise DomainError(f"interval ({lo}, {hi}) must satisfy -90 <= lo < hi <= 90")
        for (_, hi0), (lo1, _) in zip(ivs, ivs[1:]):
            if lo1 < hi0:
                raise DomainError(f"intervals overlap near {lo1} deg")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, intervals: Sequence[Sequence[float]]) -> "AngularRegion":
        return cls(tuple((float(lo), float(hi)) for lo, hi in intervals))

    @property
    def measure(self) -> float:
        """Total angular width in radians."""
        return sum(math.radians(hi - lo) for lo, hi in self.intervals)

    def complement(self) -> "AngularRegion":
        """The rest of [-90, 90]; shared endpoints are kept on both sides."""
        out = []
        cur = -90.0
        for lo, hi in self.intervals:
            if lo > cur:
                out.append((cur, lo))
            cur = hi
        if cur < 90.0:
            out.append((cur, 90.0))
        return AngularRegion(tuple(out))

    def shifted(self, offset: float) -> "AngularRegion":
        return AngularRegion(tuple((lo + offset, hi + offset) for lo, hi in self.intervals))


def _check_angle(theta_deg):
    theta = np.asarray(theta_deg, dtype=float)
    if np.any(~np.isfinite(theta)) or np.any(np.abs(theta) > 90.0):
        raise DomainError(f"angle must lie in [-90, 90] degrees, got {theta_deg}")
    return theta


def ula_response(n_elements: int, spacing: float, theta_deg) -> np.ndarray:
    """ULA phase response exp(j 2 pi l d sin(theta)), l = 0..n-1.

    No range check; ``theta_deg`` may be an array, in which case the result
    has shape ``theta.shape + (n_elements,)``.
    """
    s = np.sin(np.deg2rad(np.asarray(theta_deg, dtype=float)))
    idx = np.arange(n_elements)
    return np.exp(2j * np.pi * spacing * np.multiply.outer(s, idx))


def steering_mimo(geom: ArrayGeometry, theta_deg) -> np.ndarray:
    """Transmit response a(theta) of the MIMO array."""
    theta = _check_angle(theta_deg)
    return ula_response(geom.L1, geom.d, theta)


def steering_ris(geom: ArrayGeometry, theta_deg) -> np.ndarray:
    """ARIS response b(theta + theta_p) towards target angle ``theta_deg``."""
    theta = _check_angle(theta_deg)
    return ula_response(geom.L2, geom.d_tilde, theta + geom.theta_p)


def los_directions(model: ChannelModel, geom: ArrayGeometry) -> tuple[float, float]:
    """(departure angle at the array, arrival angle in the ARIS frame), degrees.

    Angles are measured from broadside (+y) and are positive counter-clockwise.
    """
    x, y = model.position
    depart = math.degrees(math.atan2(-x, y))
    arrive = math.degrees(math.atan2(x, -y)) + geom.theta_p
    return depart, arrive


def gen_channel(model: ChannelModel, geom: ArrayGeometry) -> np.ndarray:
    """Draw the L2 x L1 channel G from the MIMO array to the ARIS.

    G = sqrt(PL) * (sqrt(K/(1+K)) b a^H + sqrt(1/(1+K)) W) with W i.i.d. CN(0, 1)
    and a, b the array/ARIS responses along the line joining the apertures.
    Pure function of (model, geom).
    """
    depart, arrive = los_directions(model, geom)
    los = np.outer(ula_response(geom.L2, geom.d_tilde, arrive),
                   ula_response(geom.L1, geom.d, depart).conj())
    rng = np.random.default_rng(model.seed)
    scatter = (rng.standard_normal((geom.L2, geom.L1))
               + 1j * rng.standard_normal((geom.L2, geom.L1))) / math.sqrt(2.0)
    K = float(model.K_R)
    if math.isinf(K):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = math.sqrt(K / (1.0 + K)), math.sqrt(1.0 / (1.0 + K))
    return math.sqrt(model.path_loss) * (w_los * los + w_nlos * scatter)
