import numpy as np
import pytest
from scipy.linalg import eigvalsh

from pencilstab.grid import diff_matrix, inner_product, make_grid
from pencilstab.operators import (
    analytic_kernel,
    boussinesq_H_direct,
    build_beam_H,
    build_boussinesq_H,
    build_hill_L,
    build_kgz_H,
    build_operator,
)
from pencilstab.profiles import Model, WaveProfile, boussinesq_profile, kgz_profile, make_profile


def rel_max(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def zero_profile(model, c, p):
    g = make_grid(20, 128, "antiperiodic")
    comp = np.zeros(128) if model is Model.KGZ else None
    return WaveProfile(model, c, p, np.zeros(128), g, companion=comp)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("c", [0.0, 0.3, 0.9])
def test_boussinesq_kernel(c, p):
    prof = make_profile("boussinesq", c, p)
    H = build_boussinesq_H(prof)
    # entries of H reach 1e5 at N=512; the bound is roundoff relative to ||H|| ||phi||
    bound = 1e-12 * np.max(np.abs(H.matrix)) * np.max(prof.values)
    assert np.max(np.abs(H.matrix @ prof.values)) <= bound


def test_boussinesq_factorization_matches_direct():
    prof = make_profile("boussinesq", 0.3, 3)
    H = build_boussinesq_H(prof)
    assert rel_max(H.matrix, boussinesq_H_direct(prof)) <= 1e-10


def test_boussinesq_symmetric_real():
    H = build_operator(make_profile("boussinesq", 0.3, 2))
    assert H.symmetry_defect() <= 1e-12
    assert H.matrix.dtype == np.float64


def test_boussinesq_free_operator_nonnegative():
    H = build_boussinesq_H(zero_profile(Model.BOUSSINESQ, 0.3, 2.0))
    w = eigvalsh(H.matrix)
    assert w[0] >= -1e-10 * np.max(np.abs(w))


@pytest.mark.parametrize("p", [3, 4])
def test_boussinesq_quadratic_form_identity(p):
    prof = make_profile("boussinesq", 0.3, p)
    g = prof.grid
    H = build_operator(prof)
    d = diff_matrix(g, 1) @ prof.values
    lhs = inner_product(g, H.matrix @ d, d)
    rhs = -p * (p - 1) * (p - 2) / 3 * inner_product(g, prof.values ** (p - 3), d**4)
    assert lhs < 0
    assert abs(lhs - rhs) <= 1e-6 * abs(rhs)


def test_boussinesq_quadratic_form_vanishes_at_p2():
    prof = make_profile("boussinesq", 0.3, 2)
    g = prof.grid
    H = build_operator(prof)
    d = diff_matrix(g, 1) @ prof.values
    assert abs(inner_product(g, H.matrix @ d, d)) <= 1e-9


def test_hill_operator():
    prof = make_profile("boussinesq", 0.0, 2)
    L = build_hill_L(prof)
    dphi = diff_matrix(prof.grid, 1) @ prof.values
    assert np.max(np.abs(L.matrix @ dphi)) <= 1e-8
    w = eigvalsh(L.matrix)
    assert np.sum(w < -1e-8) == 1


def test_hill_free_spectrum():
    L = build_hill_L(zero_profile(Model.BOUSSINESQ, 0.6, 2.0))
    assert eigvalsh(L.matrix)[0] >= 0.64 - 1e-10


def test_hill_factorization():
    prof = make_profile("boussinesq", 0.5, 2)
    d1 = diff_matrix(prof.grid, 1)
    H = build_boussinesq_H(prof)
    L = build_hill_L(prof)
    assert rel_max(H.matrix, -d1 @ L.matrix @ d1) <= 1e-12


@pytest.mark.parametrize("c", [0.0, 0.5, 0.95])
def test_kgz_kernel(c):
    prof = make_profile("kgz", c)
    H = build_kgz_H(prof)
    k = analytic_kernel(H)
    assert np.max(np.abs(H.matrix @ k)) <= 1e-8
    assert H.symmetry_defect() <= 1e-12
    assert H.block and H.size == 2 * prof.grid.n_points


def test_kgz_single_negative_eigenvalue():
    w = eigvalsh(build_kgz_H(make_profile("kgz", 0.0)).matrix)
    assert np.sum(w < -1e-8) == 1


def test_kgz_kernel_relation():
    prof = make_profile("kgz", 0.4)
    H = build_kgz_H(prof)
    w, v = np.linalg.eigh(H.matrix)
    k = v[:, np.argmin(np.abs(w))]
    n = prof.grid.n_points
    f, g = k[:n], k[n:]
    mu2 = 1 - 0.4**2
    gp = diff_matrix(prof.grid, 1) @ g
    assert np.max(np.abs(gp + prof.values * f / mu2)) <= 1e-8 * np.max(np.abs(gp))


def test_kgz_requires_companion():
    prof = make_profile("kgz", 0.3)
    bare = WaveProfile(Model.KGZ, prof.c, prof.p, prof.values, prof.grid)
    with pytest.raises(ValueError):
        build_kgz_H(bare)


@pytest.mark.parametrize("c", [0.0, 0.8, 1.2])
def test_beam_kernel_and_form(c):
    prof = make_profile("beam", c, 3)
    g = prof.grid
    H = build_beam_H(prof)
    assert np.max(np.abs(H.matrix @ (diff_matrix(g, 1) @ prof.values))) <= 1e-7
    q = inner_product(g, H.matrix @ prof.values, prof.values)
    expected = -2 * inner_product(g, prof.values**4, np.ones(g.n_points))
    assert q < 0
    assert abs(q - expected) <= 1e-6 * abs(expected)


def test_beam_free_spectrum():
    c = 1.3
    H = build_beam_H(zero_profile(Model.BEAM, c, 3.0))
    assert eigvalsh(H.matrix)[0] >= 1 - c**4 / 4 - 1e-10


def test_model_mismatch():
    with pytest.raises(ValueError):
        build_beam_H(make_profile("boussinesq", 0.3, 3))
    with pytest.raises(ValueError):
        build_hill_L(make_profile("kgz", 0.3))


def test_periodic_grid_gauge_shift():
    g = make_grid(31.5, 512, "periodic")
    H = build_boussinesq_H(boussinesq_profile(0.3, 2, g))
    w = eigvalsh(H.matrix)
    assert np.sum(np.abs(w) < 1e-8 * np.max(np.abs(w))) == 1
    k = analytic_kernel(H)
    assert abs(k.mean()) <= 1e-14
    assert np.max(np.abs(H.matrix @ k)) <= 1e-12 * np.max(np.abs(H.matrix)) * np.max(k)
    gk = make_grid(30, 384, "periodic")
    Hk = build_kgz_H(kgz_profile(0.3, gk))
    wk = eigvalsh(Hk.matrix)
    assert np.sum(np.abs(wk) < 1e-8 * np.max(np.abs(wk))) == 1
    assert np.max(np.abs(Hk.matrix @ analytic_kernel(Hk))) <= 1e-8
