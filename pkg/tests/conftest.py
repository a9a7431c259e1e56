import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from aris_beampattern.beampattern import integrate_regions
from aris_beampattern.scene import AngularRegion, ArrayGeometry, ChannelModel, gen_channel

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def small_instance(seed=0, L1=3, L2=4, N=2, step=1.0, main=((-20.0, 20.0),)):
    """Random channel and region integrals for a small geometry."""
    geom = ArrayGeometry(L1=L1, L2=L2, N=N)
    G = gen_channel(ChannelModel(seed=seed, PL0_dB=0.0), geom)
    mainlobe = AngularRegion.of(main)
    isets = integrate_regions(geom, mainlobe, mainlobe.complement(), step)
    return geom, G, isets


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_REPORT: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_REPORT.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
