import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pencilstab.grid import (
    apply_multiplier,
    diff_matrix,
    fourier_multiplier,
    inner_product,
    make_grid,
    norm,
)

BCS = ["periodic", "antiperiodic"]


def test_nodes_small_grid():
    g = make_grid(np.pi, 16)
    assert g.nodes[0] == -np.pi
    np.testing.assert_allclose(g.nodes[1], -np.pi + np.pi / 8)
    np.testing.assert_allclose(g.nodes[-1], np.pi - g.spacing)
    assert np.all(np.diff(g.nodes) > 0)


def test_spacing():
    assert make_grid(30, 512).spacing == 0.1171875


@pytest.mark.parametrize("args", [(30, 17), (30, 14), (0, 64), (-1, 64), (30, 64, "dirichlet")])
def test_make_grid_rejects(args):
    with pytest.raises(ValueError):
        make_grid(*args)


def test_nodes_read_only():
    g = make_grid(10, 32)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0


def test_d1_on_sine():
    L = 7.0
    g = make_grid(L, 64)
    x = g.nodes
    d = diff_matrix(g, 1) @ np.sin(np.pi * x / L)
    assert np.max(np.abs(d - np.pi / L * np.cos(np.pi * x / L))) <= 1e-10


def test_d1_on_antiperiodic_sine():
    L = 7.0
    g = make_grid(L, 64, "antiperiodic")
    x = g.nodes
    d = diff_matrix(g, 1) @ np.sin(np.pi * x / (2 * L))
    assert np.max(np.abs(d - np.pi / (2 * L) * np.cos(np.pi * x / (2 * L)))) <= 1e-10


@pytest.mark.parametrize("bc", BCS)
def test_symmetry(bc):
    g = make_grid(30, 128, bc)
    d1, d2, d4 = (diff_matrix(g, k) for k in (1, 2, 4))
    assert np.max(np.abs(d1 + d1.T)) <= 1e-12 * np.max(np.abs(d1))
    assert np.max(np.abs(d2 - d2.T)) <= 1e-12 * np.max(np.abs(d2))
    assert np.max(np.abs(d4 - d4.T)) <= 1e-12 * np.max(np.abs(d4))


@pytest.mark.parametrize("bc", BCS)
def test_d4_is_d2_squared(bc):
    g = make_grid(20, 64, bc)
    d2, d4 = diff_matrix(g, 2), diff_matrix(g, 4)
    assert np.max(np.abs(d2 @ d2 - d4)) <= 1e-9 * np.max(np.abs(d4))


def test_antiperiodic_d1_squared_is_d2():
    g = make_grid(20, 64, "antiperiodic")
    d1, d2 = diff_matrix(g, 1), diff_matrix(g, 2)
    assert np.max(np.abs(d1 @ d1 - d2)) <= 1e-9 * np.max(np.abs(d2))


def test_periodic_d1_kills_nyquist():
    g = make_grid(5, 32)
    nyq = np.cos(np.pi * np.arange(32))
    assert np.max(np.abs(diff_matrix(g, 1) @ nyq)) <= 1e-12


def test_unsupported_order():
    with pytest.raises(ValueError):
        diff_matrix(make_grid(5, 32), 3)


def test_inner_product_examples():
    g = make_grid(np.pi, 16)
    one = np.ones(16)
    np.testing.assert_allclose(inner_product(g, one, one), 2 * np.pi)
    assert abs(inner_product(g, np.sin(g.nodes), np.cos(g.nodes))) <= 1e-14
    g = make_grid(30, 512)
    s = 1 / np.cosh(g.nodes)
    assert abs(inner_product(g, s, s) - 2.0) <= 1e-10


def test_inner_product_blocks_and_mismatch():
    g = make_grid(5, 32)
    f = np.ones(64)
    np.testing.assert_allclose(inner_product(g, f, f), 2 * 10.0)
    with pytest.raises(ValueError):
        inner_product(g, np.ones(32), np.ones(33))
    with pytest.raises(ValueError):
        inner_product(g, np.ones(40), np.ones(40))
    np.testing.assert_allclose(norm(g, np.ones(32)), np.sqrt(10.0))


def test_spectral_accuracy_sech():
    errs = []
    for n in (64, 256):
        g = make_grid(30, n)
        x = g.nodes
        exact = -np.tanh(x) / np.cosh(x)
        errs.append(np.max(np.abs(diff_matrix(g, 1) @ (1 / np.cosh(x)) - exact)))
    assert errs[0] / errs[1] >= 1e6


@pytest.mark.parametrize("bc", BCS)
def test_fft_multiplier_matches_dense(bc):
    g = make_grid(9, 48, bc)
    rng = np.random.default_rng(3)
    f = rng.standard_normal(48)
    sym = g.wavenumbers**2 + 1.0
    np.testing.assert_allclose(apply_multiplier(g, sym, f), fourier_multiplier(g, sym) @ f, atol=1e-11)


@pytest.mark.parametrize("bc", BCS)
def test_reflect(bc):
    g = make_grid(9, 64, bc)
    x = g.nodes
    f = np.exp(-(x - 0.3) ** 2)
    np.testing.assert_allclose(g.reflect(f), np.exp(-(-x - 0.3) ** 2), atol=1e-12)
    np.testing.assert_array_equal(g.reflect(g.reflect(f)), f)


@settings(max_examples=25, deadline=None)
@given(
    L=st.floats(min_value=1.0, max_value=50.0),
    half_n=st.integers(min_value=8, max_value=48),
    bc=st.sampled_from(BCS),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_d1_adjoint_property(L, half_n, bc, seed):
    g = make_grid(L, 2 * half_n, bc)
    rng = np.random.default_rng(seed)
    f, h = rng.standard_normal((2, g.n_points))
    d1 = diff_matrix(g, 1)
    a = inner_product(g, f, d1 @ h)
    b = -inner_product(g, d1 @ f, h)
    scale = np.linalg.norm(d1 @ f) * np.linalg.norm(h) * g.spacing
    assert abs(a - b) <= 1e-12 * max(scale, 1.0)
