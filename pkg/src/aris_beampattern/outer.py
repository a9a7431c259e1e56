"""Alternating Dinkelbach loop over waveform, reflection coefficients and mu."""
from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .beampattern import (DegenerateInputError, RegionIntegrals, integrate_regions,
                          region_energies, to_db)
from .projections import CM, WaveformConstraint, nominal_modulus, project_waveform
from .ris import CccpConfig, build_quadratics, init_reflection, make_feasible, run_cccp
from .scene import AngularRegion, ArrayGeometry, ChannelModel, gen_channel
from .waveform import CadmmConfig, run_cadmm

log = logging.getLogger(__name__)

# independent RNG streams derived from the scenario seed
_STREAM_X0, _STREAM_V0, _STREAM_CENTER = 1, 2, 3
# penalty multiplier for the single CADMM retry
_RETRY_BETA_FACTOR = 10.0


@dataclass
class OuterConfig:
    iota3: float = 1e-3
    T_max: int = 50
    mode: str = "aris"              # "aris" | "ris_free"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("aris", "ris_free"):
            raise ValueError(f"mode must be 'aris' or 'ris_free', got {self.mode!r}")
        if not self.iota3 > 0 or self.T_max < 1:
            raise ValueError("iota3 must be positive and T_max >= 1")


@dataclass
class Scenario:
    """Complete experiment description.

    ``sidelobe=None`` means the complement of the mainlobe in [-90, 90].
    ``channel_seed=None`` reuses ``outer.seed`` for the channel draw.
    With ``randomize_center`` the regions are shifted by a centre drawn
    uniformly from ``center_range``.
    """

    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    channel: ChannelModel = field(default_factory=ChannelModel)
    mainlobe: AngularRegion = field(default_factory=lambda: AngularRegion.of([(-11, 11)]))
    sidelobe: AngularRegion | None = None
    constraint: WaveformConstraint = field(default_factory=CM)
    varsigma: float = 5.0
    PA: float = 1.0
    integral_step: float = 0.1
    randomize_center: bool = False
    center_range: tuple[float, float] = (-10.0, 10.0)
    channel_seed: int | None = None
    outer: OuterConfig = field(default_factory=OuterConfig)
    cadmm: CadmmConfig = field(default_factory=CadmmConfig)
    cccp: CccpConfig = field(default_factory=CccpConfig)

    def with_seed(self, seed: int) -> "Scenario":
        return dataclasses.replace(self, outer=dataclasses.replace(self.outer, seed=seed))


@dataclass
class Problem:
    """A scenario resolved to numbers: channel, regions and their integrals."""

    geometry: ArrayGeometry
    G: np.ndarray
    mainlobe: AngularRegion
    sidelobe: AngularRegion
    isets: RegionIntegrals
    constraint: WaveformConstraint
    varsigma: float
    PA: float
    sigma_v2: float


def _stream(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def build_problem(sc: Scenario) -> Problem:
    seed = sc.outer.seed
    geom = sc.geometry
    ch_seed = sc.channel_seed if sc.channel_seed is not None else seed
    G = gen_channel(dataclasses.replace(sc.channel, seed=ch_seed), geom)
    main = sc.mainlobe
    side = sc.sidelobe
    if sc.randomize_center:
        lo, hi = sc.center_range
        main = main.shifted(float(_stream(seed, _STREAM_CENTER).uniform(lo, hi)))
        side = None
    if side is None:
        side = main.complement()
    isets = integrate_regions(geom, main, side, sc.integral_step)
    return Problem(geom, G, main, side, isets, sc.constraint, sc.varsigma, sc.PA,
                   sc.channel.sigma_v2)


def init_waveform(constraint: WaveformConstraint, NL1: int, seed) -> np.ndarray:
    """Uniform random phases at the constraint's nominal modulus."""
    rng = seed if isinstance(seed, np.random.Generator) else _stream(seed, _STREAM_X0)
    x0 = nominal_modulus(constraint, NL1) * np.exp(2j * np.pi * rng.random(NL1))
    return project_waveform(x0, constraint)


def update_mu(x, v, G, isets: RegionIntegrals) -> float:
    """mu = mainlobe energy / sidelobe energy = 1 / ISMR."""
    e_side, e_main = region_energies(x, v, G, isets)
    if not e_side > 0:
        raise DegenerateInputError("sidelobe energy is zero (perfect beam); mu is unbounded")
    return e_main / e_side


@dataclass
class TraceRecord:
    t: int
    gamma_db: float
    mu: float
    side_db: float
    main_db: float
    cadmm_iters: int
    cccp_iters: int
    wall_time: float


@dataclass
class RunResult:
    x: np.ndarray
    v: np.ndarray
    problem: Problem
    trace: list[TraceRecord]
    converged: bool
    flags: list[str]
    timings: dict[str, float]
    seed: int

    @property
    def energies(self) -> tuple[float, float]:
        return region_energies(self.x, self.v, self.problem.G, self.problem.isets)

    @property
    def ismr_db(self) -> float:
        side, main = self.energies
        return to_db(side) - to_db(main)


def _record(t, x, v, pb: Problem, cadmm_iters, cccp_iters, t0) -> TraceRecord:
    e_side, e_main = region_energies(x, v, pb.G, pb.isets)
    return TraceRecord(t=t, gamma_db=to_db(e_side) - to_db(e_main), mu=e_main / e_side,
                       side_db=to_db(e_side), main_db=to_db(e_main), cadmm_iters=cadmm_iters,
                       cccp_iters=cccp_iters, wall_time=time.perf_counter() - t0)


def _gamma(x, v, pb: Problem) -> float:
    e_side, e_main = region_energies(x, v, pb.G, pb.isets)
    return e_side / e_main


def run(sc: Scenario, problem: Problem | None = None) -> RunResult:
    """Alternate waveform (CADMM), reflection (CCCP) and mu updates.

    A waveform update that raises the ISMR, or whose CADMM run did not
    converge, is retried once with a ten-fold penalty; the better of the two
    is kept if it does not raise the ISMR and discarded otherwise, so the
    recorded ISMR never increases.
    In ``ris_free`` mode (or with varsigma = 0) v stays at zero.
    """
    t0 = time.perf_counter()
    pb = problem or build_problem(sc)
    cfg = sc.outer
    geom = pb.geometry
    NL1 = geom.N * geom.L1
    use_ris = cfg.mode == "aris" and pb.varsigma > 0

    x = init_waveform(pb.constraint, NL1, _stream(cfg.seed, _STREAM_X0))
    if use_ris:
        v = init_reflection(x, pb.G, pb.varsigma, pb.PA, pb.sigma_v2,
                            _stream(cfg.seed, _STREAM_V0))
    else:
        v = np.zeros(geom.L2, dtype=complex)
    gamma = _gamma(x, v, pb)
    mu = 1.0 / gamma
    trace = [_record(0, x, v, pb, 0, 0, t0)]
    flags: list[str] = []
    t_x = t_v = 0.0
    converged = False

    for t in range(1, cfg.T_max + 1):
        tic = time.perf_counter()
        res = run_cadmm(x, v, mu, pb.G, pb.isets, pb.constraint, pb.PA, pb.sigma_v2, sc.cadmm)
        cadmm_iters = res.iterations
        x_new, v_new, g_new = _waveform_candidate(res.x, x, v, pb, use_ris)
        if not res.converged or g_new > gamma:
            retry_cfg = dataclasses.replace(sc.cadmm, beta1=_RETRY_BETA_FACTOR * res.beta1)
            res2 = run_cadmm(x, v, mu, pb.G, pb.isets, pb.constraint, pb.PA, pb.sigma_v2,
                             retry_cfg)
            cadmm_iters += res2.iterations
            cand = _waveform_candidate(res2.x, x, v, pb, use_ris)
            if cand[2] < g_new:
                res, (x_new, v_new, g_new) = res2, cand
        if g_new > gamma:
            flags.append(f"t={t}: waveform update rejected")
            x_new, v_new = x, v
        elif not res.converged:
            flags.append(f"t={t}: CADMM hit K_max")
        x, v = x_new, v_new
        t_x += time.perf_counter() - tic

        cccp_iters = 0
        if use_ris:
            tic = time.perf_counter()
            q = build_quadratics(x, pb.G, pb.isets, mu, pb.sigma_v2)
            cres = run_cccp(q, v, pb.varsigma, pb.PA, sc.cccp)
            cccp_iters = cres.iterations
            if not cres.converged:
                flags.append(f"t={t}: CCCP hit J_max")
            if _gamma(x, cres.v, pb) <= gamma:
                v = cres.v
            t_v += time.perf_counter() - tic

        mu_new = update_mu(x, v, pb.G, pb.isets)
        gamma = 1.0 / mu_new
        trace.append(_record(t, x, v, pb, cadmm_iters, cccp_iters, t0))
        log.debug("t=%d ISMR=%.4f dB", t, trace[-1].gamma_db)
        if abs(mu_new - mu) <= cfg.iota3:
            mu = mu_new
            converged = True
            break
        mu = mu_new

    return RunResult(x=x, v=v, problem=pb, trace=trace, converged=converged, flags=flags,
                     timings={"update_x": t_x, "update_v": t_v,
                              "total": time.perf_counter() - t0},
                     seed=cfg.seed)


def _waveform_candidate(x_new, x, v, pb: Problem, use_ris: bool):
    v_new = make_feasible(v, _pi(x_new, pb), pb.varsigma, pb.PA) if use_ris else v
    return x_new, v_new, _gamma(x_new, v_new, pb)


def _pi(x, pb: Problem) -> np.ndarray:
    GX = x.reshape(-1, pb.geometry.L1) @ pb.G.T
    return np.abs(GX) ** 2 + pb.sigma_v2
