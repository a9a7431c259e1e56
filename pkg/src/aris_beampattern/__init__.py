"""Joint MIMO-radar waveform and active-RIS design for low-ISMR beampatterns."""
from .beampattern import (IntegralSet, RegionIntegrals, beampattern, beampattern_curve,
                          composite_sigma, integrate_region, integrate_regions, ismr,
                          ismr_db, region_energies)
from .kernels import BACKEND
from .outer import (OuterConfig, Problem, RunResult, Scenario, TraceRecord, build_problem,
                    init_waveform, run, update_mu)
from .projections import (BM, CM, PAR, DualRootConfig, project_bm, project_cm,
                          project_diag_ellipsoid, project_disk, project_par,
                          project_power_ball, project_waveform)
from .ris import CccpConfig, build_quadratics, run_cccp
from .scene import (AngularRegion, ArrayGeometry, ChannelModel, gen_channel, steering_mimo,
                    steering_ris)
from .waveform import CadmmConfig, run_cadmm

__version__ = "0.1.0"

__all__ = [
    "IntegralSet",
    "RegionIntegrals",
    "beampattern",
    "beampattern_curve",
    "composite_sigma",
    "integrate_region",
    "integrate_regions",
    "ismr",
    "ismr_db",
    "region_energies",
    "BACKEND",
    "OuterConfig",
    "Problem",
    "RunResult",
    "Scenario",
    "TraceRecord",
    "build_problem",
    "init_waveform",
    "run",
    "update_mu",
    "BM",
    "CM",
    "PAR",
    "DualRootConfig",
    "project_bm",
    "project_cm",
    "project_diag_ellipsoid",
    "project_disk",
    "project_par",
    "project_power_ball",
    "project_waveform",
    "CccpConfig",
    "build_quadratics",
    "run_cccp",
    "AngularRegion",
    "ArrayGeometry",
    "ChannelModel",
    "gen_channel",
    "steering_mimo",
    "steering_ris",
    "CadmmConfig",
    "run_cadmm",
]
