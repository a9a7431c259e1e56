import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from aris_beampattern.beampattern import (DegenerateInputError, RegionIntegrals,
                                          beampattern, beampattern_curve, composite_sigma,
                                          integrate_region, ismr, quadratic_energy,
                                          quadrature_nodes, region_energies)
from aris_beampattern.scene import AngularRegion, ArrayGeometry

from conftest import crandn, small_instance

FULL = AngularRegion.of([(-90, 90)])


def test_scalar_array_integral_is_region_measure():
    region = AngularRegion.of([(-30, 10), (40, 60)])
    iset = integrate_region(ArrayGeometry(L1=1, L2=1), region)
    assert iset.A.shape == (1, 1)
    assert math.isclose(iset.A[0, 0].real, region.measure, rel_tol=1e-12)


def test_two_element_full_region_integral():
    A = integrate_region(ArrayGeometry(L1=2), FULL).A
    np.testing.assert_allclose(np.diag(A).real, math.pi, rtol=1e-12)
    # int_{-pi/2}^{pi/2} exp(j pi sin t) dt = pi J0(pi)
    assert abs(A[0, 1] - math.pi * scipy.special.j0(math.pi)) < 1e-6 * math.pi
    fine = integrate_region(ArrayGeometry(L1=2), FULL, grid_step=0.01).A
    assert abs(A[0, 1] - fine[0, 1]) < 1e-6 * abs(fine[0, 1])


def test_empty_region_gives_zero_matrices():
    iset = integrate_region(ArrayGeometry(L1=3, L2=2), AngularRegion())
    assert not np.any(iset.A) and not np.any(iset.D) and not np.any(iset.B)


def test_quadrature_nodes_cover_intervals():
    th, w = quadrature_nodes(AngularRegion.of([(-11, 11)]), 0.1)
    assert th[0] == -11 and th[-1] == 11 and th.size == 221
    assert math.isclose(w.sum(), math.radians(22), rel_tol=1e-12)
    with pytest.raises(ValueError):
        quadrature_nodes(FULL, 0.0)


@given(lo=st.floats(-90, 80), width=st.floats(1, 90), seed=st.integers(0, 2**16))
def test_integrals_are_hermitian_psd(lo, width, seed):
    hi = min(lo + width, 90.0)
    geom = ArrayGeometry(L1=4, L2=6, theta_p=float(np.random.default_rng(seed).uniform(-20, 20)))
    iset = integrate_region(geom, AngularRegion.of([(lo, hi)]), 0.5)
    for M in (iset.A, iset.B):
        np.testing.assert_allclose(M, M.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(M)[0] >= -1e-10 * np.trace(M).real


def test_toeplitz_structure_of_A():
    A = integrate_region(ArrayGeometry(L1=5), AngularRegion.of([(-20, 35)])).A
    for k in range(-4, 5):
        d = np.diag(A, k)
        np.testing.assert_allclose(d, d[0], atol=1e-12)


def test_composite_sigma_with_zero_v_is_A(rng):
    geom, G, isets = small_instance()
    sig = composite_sigma(isets.main, G, np.zeros(geom.L2))
    np.testing.assert_allclose(sig, isets.main.A, atol=1e-15)


def test_composite_sigma_scalar_case():
    geom = ArrayGeometry(L1=1, L2=1, theta_p=7.0)
    iset = integrate_region(geom, AngularRegion.of([(-30, 50)]))
    g, v = 0.3 - 0.7j, 1.5 + 0.4j
    A, D, B = iset.A[0, 0], iset.D[0, 0], iset.B[0, 0]
    expected = A + 2 * np.real(np.conj(g) * np.conj(v) * D) + abs(v) ** 2 * abs(g) ** 2 * B
    sig = composite_sigma(iset, np.array([[g]]), np.array([v]))
    assert abs(sig[0, 0] - expected) < 1e-12 * abs(expected)


def test_composite_sigma_matches_direct_integral(rng):
    # Sigma = int c c^H with c = a + G^H V^H b, by the same quadrature
    geom, G, isets = small_instance(L1=3, L2=5, step=0.5)
    v = crandn(rng, geom.L2)
    sig = composite_sigma(isets.side, G, v)
    from aris_beampattern.scene import ula_response
    th, w = quadrature_nodes(isets.side.region, 0.5)
    a = ula_response(geom.L1, geom.d, th)
    b = ula_response(geom.L2, geom.d_tilde, th + geom.theta_p)
    c = a + (b * np.conj(v)) @ G.conj()                 # rows c(theta)^T
    direct = (c.T * w) @ c.conj()
    np.testing.assert_allclose(sig, direct, atol=1e-12 * np.abs(direct).max())
    np.testing.assert_allclose(sig, sig.conj().T, atol=1e-12)


def test_quadratic_energy_examples(rng):
    x = crandn(rng, 12)
    assert math.isclose(quadratic_energy(x, np.eye(3)), np.vdot(x, x).real, rel_tol=1e-12)
    assert quadratic_energy(np.zeros(12, complex), np.eye(3)) == 0.0
    S = crandn(rng, 3, 3)
    S = S @ S.conj().T
    x2 = crandn(rng, 6)
    omega = np.kron(np.eye(2), S)
    assert math.isclose(quadratic_energy(x2, S), np.vdot(x2, omega @ x2).real, rel_tol=1e-12)


def test_ismr_scalar_array_is_measure_ratio():
    geom = ArrayGeometry(L1=1, L2=1, N=1)
    main = AngularRegion.of([(-11, 11)])
    isets = RegionIntegrals(integrate_region(geom, main), integrate_region(geom, main.complement()))
    val = ismr(np.ones(1, complex), np.zeros(1), np.zeros((1, 1)), isets)
    assert math.isclose(val, main.complement().measure / main.measure, rel_tol=1e-12)


def test_ismr_same_regions_is_one(rng):
    geom, G, isets = small_instance()
    same = RegionIntegrals(isets.main, isets.main)
    assert math.isclose(ismr(crandn(rng, 6), crandn(rng, geom.L2), G, same), 1.0, rel_tol=1e-12)


def test_ismr_zero_mainlobe_energy_raises():
    geom, G, isets = small_instance()
    with pytest.raises(DegenerateInputError):
        ismr(np.zeros(6, complex), np.zeros(geom.L2), G, isets)


@given(seed=st.integers(0, 2**16), re=st.floats(-5, 5), im=st.floats(-5, 5))
def test_ismr_invariant_to_complex_scaling(seed, re, im):
    c = complex(re, im)
    if abs(c) < 1e-3:
        c = 1.0 + 0j
    rng = np.random.default_rng(seed)
    geom, G, isets = small_instance(seed=seed % 7)
    x, v = crandn(rng, 6), crandn(rng, geom.L2)
    assert math.isclose(ismr(c * x, v, G, isets), ismr(x, v, G, isets), rel_tol=1e-10)


def test_beampattern_equal_samples_at_broadside(rng):
    geom = ArrayGeometry(L1=4, L2=3, N=5)
    x1 = crandn(rng, 4)
    x = np.tile(x1, 5)
    p = beampattern(x, np.zeros(3), crandn(rng, 3, 4), geom, 0.0)
    assert math.isclose(p[0], 5 * abs(x1.sum()) ** 2, rel_tol=1e-12)


def test_beampattern_without_ris_is_conventional(rng):
    geom = ArrayGeometry(L1=4, L2=3, N=2)
    x = crandn(rng, 8)
    th = np.linspace(-90, 90, 37)
    p = beampattern(x, np.zeros(3), crandn(rng, 3, 4), geom, th)
    from aris_beampattern.scene import steering_mimo
    a = steering_mimo(geom, th)
    expected = np.sum(np.abs(a.conj() @ x.reshape(2, 4).T) ** 2, axis=1)
    np.testing.assert_allclose(p, expected, rtol=1e-12)


def test_beampattern_integral_matches_energy(rng):
    geom, G, _ = small_instance(L1=3, L2=4, N=2)
    x, v = crandn(rng, 6), crandn(rng, 4)
    full = integrate_region(geom, FULL, 0.1)
    energy = quadratic_energy(x, composite_sigma(full, G, v))
    th = np.linspace(-90, 90, 18001)
    riemann = np.sum(beampattern(x, v, G, geom, th)[:-1]) * math.radians(0.01)
    assert abs(riemann - energy) < 1e-3 * energy


def test_region_energies_against_beampattern(rng):
    geom, G, isets = small_instance(step=0.1)
    x, v = crandn(rng, 6), crandn(rng, geom.L2)
    side, main = region_energies(x, v, G, isets)
    th, w = quadrature_nodes(isets.main.region, 0.1)
    assert math.isclose(main, float(w @ beampattern(x, v, G, geom, th)), rel_tol=1e-10)


def test_beampattern_curve_grid_and_floor():
    geom = ArrayGeometry(L1=2, L2=2, N=1)
    th, p_db = beampattern_curve(np.array([1, -1], complex), np.zeros(2), np.zeros((2, 2)),
                                 geom, grid_step=0.5)
    assert th.size == 361 and th[0] == -90 and th[-1] == 90
    assert np.all(np.isfinite(p_db))
    # a(0)^H x = 0 for x = (1, -1)
    assert p_db[180] < -250
