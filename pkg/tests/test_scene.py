import math

import numpy as np
import pytest

from aris_beampattern.scene import (AngularRegion, ArrayGeometry, ChannelModel, DomainError,
                                    gen_channel, los_directions, steering_mimo, steering_ris)


def test_steering_mimo_broadside_and_endfire():
    g = ArrayGeometry(L1=2)
    np.testing.assert_allclose(steering_mimo(g, 0.0), [1, 1])
    np.testing.assert_allclose(steering_mimo(g, 90.0), [1, -1], atol=1e-15)


def test_steering_mimo_thirty_degrees():
    # sin 30 = 1/2, half-wavelength spacing: phase pi/2 per element
    out = steering_mimo(ArrayGeometry(L1=4), 30.0)
    np.testing.assert_allclose(out, np.exp(1j * np.pi * np.arange(4) / 2), atol=1e-14)


def test_steering_ris_adds_offset():
    g = ArrayGeometry(L2=5, theta_p=10.0)
    np.testing.assert_allclose(steering_ris(g, -10.0), np.ones(5))
    g2 = ArrayGeometry(L2=2, theta_p=10.0)
    np.testing.assert_allclose(steering_ris(g2, 80.0), [1, -1], atol=1e-15)
    g3 = ArrayGeometry(L2=3, theta_p=10.0)
    np.testing.assert_allclose(steering_ris(g3, 20.0), np.exp(1j * np.pi * np.arange(3) / 2),
                               atol=1e-14)


@pytest.mark.parametrize("theta", [90.0001, -91.0, np.nan])
def test_steering_rejects_out_of_range(theta):
    with pytest.raises(DomainError):
        steering_mimo(ArrayGeometry(), theta)
    with pytest.raises(DomainError):
        steering_ris(ArrayGeometry(), theta)


def test_steering_unit_modulus_and_first_entry(rng):
    g = ArrayGeometry(L1=7, L2=9)
    th = rng.uniform(-90, 90, size=50)
    for f in (steering_mimo, steering_ris):
        out = f(g, th)
        np.testing.assert_allclose(np.abs(out), 1.0, atol=1e-14)
        np.testing.assert_allclose(out[:, 0], 1.0)


@pytest.mark.parametrize("kw", [dict(L1=0), dict(L2=0), dict(N=0), dict(d=0.0),
                                dict(d_tilde=-1.0)])
def test_geometry_validation(kw):
    with pytest.raises(DomainError):
        ArrayGeometry(**kw)


def test_region_validation_and_complement():
    with pytest.raises(DomainError):
        AngularRegion.of([(10, 5)])
    with pytest.raises(DomainError):
        AngularRegion.of([(-95, 0)])
    with pytest.raises(DomainError):
        AngularRegion.of([(0, 20), (10, 30)])
    r = AngularRegion.of([(29, 51), (-51, -29)])
    assert r.intervals == ((-51.0, -29.0), (29.0, 51.0))
    assert r.complement().intervals == ((-90.0, -51.0), (-29.0, 29.0), (51.0, 90.0))
    assert math.isclose(r.measure + r.complement().measure, math.pi)
    assert r.shifted(5).intervals == ((-46.0, -24.0), (34.0, 56.0))


def test_channel_is_deterministic_and_shaped():
    g = ArrayGeometry(L1=4, L2=6)
    G1 = gen_channel(ChannelModel(seed=7), g)
    G2 = gen_channel(ChannelModel(seed=7), g)
    assert G1.shape == (6, 4)
    np.testing.assert_array_equal(G1, G2)
    assert not np.array_equal(G1, gen_channel(ChannelModel(seed=8), g))


def test_channel_rician_limit_is_deterministic():
    g = ArrayGeometry(L1=3, L2=5)
    G = [gen_channel(ChannelModel(seed=s, K_R=math.inf), g) for s in range(4)]
    for Gs in G[1:]:
        np.testing.assert_array_equal(Gs, G[0])
    model = ChannelModel(K_R=math.inf)
    # rank one with entries of modulus sqrt(PL)
    np.testing.assert_allclose(np.abs(G[0]), math.sqrt(model.path_loss))
    assert np.linalg.matrix_rank(G[0]) == 1


def test_channel_power_monte_carlo():
    g = ArrayGeometry(L1=4, L2=8)
    model = ChannelModel()
    ratios = np.array([np.linalg.norm(gen_channel(ChannelModel(seed=s), g)) ** 2
                       for s in range(1000)]) / (model.path_loss * g.L1 * g.L2)
    assert abs(ratios.mean() - 1.0) < 3 * ratios.std(ddof=1) / math.sqrt(ratios.size)


def test_path_loss_value():
    assert math.isclose(ChannelModel().path_loss, 1e-3 * 2 ** -2.2)


def test_los_directions_point_at_each_other():
    depart, arrive = los_directions(ChannelModel(position=(0.0, 1.0)), ArrayGeometry(theta_p=0))
    assert depart == 0.0
    assert abs(abs(arrive) - 180.0) < 1e-12
