import math

import numpy as np
import pytest

import blindspots as bs


@pytest.fixture
def triplet():
    return bs.superposition(1.0, [(0.0, 0.0), (0.0, 3.0), (3.0, 0.0)])


def test_chord_origin_is_norm(triplet):
    assert abs(bs.chord_exact(triplet, (0.0, 0.0)) - 1.0) < 1e-12


def test_exact_matches_quadrature(triplet):
    for xi in [(0.3, -0.7), (1.1, 0.4), (-2.0, 1.5)]:
        assert abs(bs.chord_exact(triplet, xi) - bs.chord_quadrature(triplet, xi)) < 1e-8


def test_coherent_state_anchor():
    eta = (0.4, -1.2)
    s = bs.superposition(0.5, [eta])
    xi = (0.3, 0.8)
    expected = np.exp(1j * bs.skew(eta, xi) / 0.5 - (xi[0] ** 2 + xi[1] ** 2) / 2.0)
    assert abs(bs.chord_exact(s, xi) - expected) < 1e-12


def test_vectorised_chord(triplet):
    pts = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, -1.0]])
    values = bs.chord_at(triplet, pts)
    assert values.shape == (3,)
    for x, v in zip(pts, values):
        assert abs(v - bs.chord_exact(triplet, tuple(x))) < 1e-14


def test_lattice_nodes_are_zeros(triplet):
    model = bs.DiffractionModel.from_superposition(triplet)
    lattice = bs.hexagonal_lattice(model, bs.IndexRange.square(1))
    spots = bs.refine_lattice(triplet, lattice)
    assert spots
    assert max(abs(bs.chord_exact(triplet, s.xi)) for s in spots) < 1e-10


def test_triangle_closure():
    plus, minus = bs.triangle_close(1 / 3, 1 / 3, 1 / 3)
    assert math.isclose(plus.theta1, 4 * math.pi / 3)
    assert math.isclose(plus.theta2, 2 * math.pi / 3)
    assert math.isclose(minus.theta1, 2 * math.pi / 3)
    with pytest.raises(bs.BlindSpotsError, match="NoClosure"):
        bs.triangle_close(0.8, 0.1, 0.1)


def test_grid_values(triplet):
    grid = bs.chord_grid(triplet, bs.Window.symmetric(3.0, 3.0), 11, 13)
    assert grid.shape == (11, 13)
    assert grid.values.shape == (11, 13)
    assert grid.values.dtype == np.complex128


def test_decoherence_matrix_free_diffusion():
    model = bs.LindbladModel(np.zeros((2, 2)), [bs.Coupling((1.0, 0.0)), bs.Coupling((0.0, 1.0))])
    m = bs.decoherence_matrix(model, 0.4, 1.0)
    assert np.allclose(m, 0.2 * np.eye(2), atol=1e-10)


def test_evolved_chord_reduces_to_pure(triplet):
    model = bs.LindbladModel.position_momentum()
    xi = (0.7, -0.2)
    assert abs(bs.evolved_chord(triplet, model, xi, 0.0) - bs.chord_exact(triplet, xi)) < 1e-12


def test_zero_norm_raises():
    with pytest.raises(bs.BlindSpotsError, match="ZeroNorm"):
        bs.normalize(bs.Superposition(1.0, [bs.Term(0.0, (0.0, 0.0))]))


def test_bad_points_shape(triplet):
    with pytest.raises(ValueError):
        bs.chord_at(triplet, np.zeros((3, 3)))
