import numpy as np
import pytest
from numpy.random import default_rng

from filstokes.errors import PreconditionError, SingularPointError
from filstokes.kernels import drag_matrix, oseen, pressure_kernel, s0

PI = np.pi


def test_oseen_axis_values():
    assert np.allclose(oseen([1.0, 0, 0]), np.diag([2.0, 1, 1]) / (8 * PI), atol=1e-15)
    assert np.allclose(oseen([0, 2.0, 0]), np.diag([1.0, 2, 1]) / (16 * PI), atol=1e-15)


def test_oseen_even_and_homogeneous():
    rng = default_rng(1)
    for _ in range(50):
        x = rng.standard_normal(3)
        lam = rng.uniform(0.5, 3.0)
        assert np.allclose(oseen(x), oseen(-x), atol=1e-14)
        assert np.allclose(oseen(lam * x), oseen(x) / lam, atol=1e-12)


def test_kernel_outputs_symmetric():
    rng = default_rng(2)
    for _ in range(20):
        x = rng.standard_normal(3)
        p = x / np.linalg.norm(x)
        for M in (oseen(x), s0(p), drag_matrix(x)):
            assert np.max(np.abs(M - M.T)) <= 1e-14


def test_oseen_singular_point():
    with pytest.raises(SingularPointError):
        oseen(np.zeros(3))


def test_pressure_values():
    assert np.allclose(pressure_kernel([1.0, 0, 0]), [1 / (4 * PI), 0, 0])
    assert np.allclose(pressure_kernel([0, 0, 2.0]), [0, 0, 1 / (16 * PI)])


def test_pressure_odd_and_homogeneous():
    rng = default_rng(3)
    for _ in range(50):
        x = rng.standard_normal(3)
        lam = rng.uniform(0.5, 3.0)
        assert np.allclose(pressure_kernel(-x), -pressure_kernel(x), atol=1e-15)
        assert np.allclose(pressure_kernel(lam * x), pressure_kernel(x) / lam**2,
                           atol=1e-12)


def test_pressure_singular_point():
    with pytest.raises(SingularPointError):
        pressure_kernel([0.0, 0.0, 0.0])


def test_drag_axis_values():
    assert np.allclose(drag_matrix([0, 0, 1.0]), np.diag([8 * PI, 8 * PI, 4 * PI]))
    assert np.allclose(drag_matrix(np.zeros(3)), 8 * PI * np.eye(3))


def test_drag_eigendecomposition():
    # rank-one update of the identity: eigenvalues {8pi, 8pi, 4pi},
    # eigenvector p for the 4pi branch
    rng = default_rng(4)
    for _ in range(50):
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        k = drag_matrix(p)
        eigs = np.sort(np.linalg.eigvalsh(k))
        assert np.allclose(eigs, [4 * PI, 8 * PI, 8 * PI], atol=1e-12)
        assert np.allclose(k @ p, 4 * PI * p, atol=1e-12)


def test_s0_values_and_oseen_match():
    assert np.allclose(s0([1.0, 0, 0]), np.diag([2.0, 1, 1]) / (8 * PI))
    rng = default_rng(5)
    for _ in range(20):
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        assert np.allclose(s0(p), oseen(p), atol=1e-15)


def test_s0_rejects_non_unit():
    with pytest.raises(PreconditionError):
        s0([1.0, 1.0, 0.0])


def test_s0_drag_inverse_identity():
    rng = default_rng(6)
    worst = 0.0
    for _ in range(1000):
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        worst = max(worst, np.max(np.abs(s0(p) @ drag_matrix(p) - np.eye(3))))
    assert worst <= 1e-12


def test_drag_lower_bound():
    rng = default_rng(7)
    for _ in range(1000):
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        v = rng.standard_normal(3)
        assert v @ drag_matrix(p) @ v >= 4 * PI * (v @ v) - 1e-10
