import math

import numpy as np
import pytest

from sparsecov.errors import AsymmetryError, DomainError, NormOrderError
from sparsecov.matrices import (
    as_symmetric,
    frobenius_norm,
    load_matrix_csv,
    matrix_function,
    operator_norm,
    operator_norm_bound,
    save_matrix_csv,
    sym_eigen,
)


def test_as_symmetric_repairs_roundoff():
    a = np.array([[1.0, 2.0], [2.0 + 1e-15, 3.0]])
    out = as_symmetric(a)
    assert out[0, 1] == out[1, 0]
    assert out is not a


def test_as_symmetric_rejects_real_asymmetry():
    with pytest.raises(AsymmetryError):
        as_symmetric([[1.0, 2.0], [0.5, 3.0]])


def test_as_symmetric_rejects_bad_shapes_and_values():
    with pytest.raises(ValueError):
        as_symmetric(np.ones((2, 3)))
    with pytest.raises(ValueError):
        as_symmetric([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_symmetric(np.ones(3))


def test_sym_eigen_two_by_two():
    eig = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(eig.eigenvalues, [3.0, 1.0])
    # descending order and orthonormal columns
    assert eig.eigenvalues[0] >= eig.eigenvalues[1]
    assert np.allclose(eig.eigenvectors.T @ eig.eigenvectors, np.eye(2), atol=1e-12)


def test_sym_eigen_reconstructs():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((12, 12))
    a = (a + a.T) / 2
    eig = sym_eigen(a)
    back = (eig.eigenvectors * eig.eigenvalues) @ eig.eigenvectors.T
    assert np.max(np.abs(back - a)) < 1e-10 * (1 + np.max(np.abs(a)))


def test_operator_norms_small_matrix():
    a = [[1.0, 2.0], [2.0, -1.0]]
    # column sums of |entries| are both 3
    assert operator_norm(a, 1) == 3.0
    assert operator_norm(a, np.inf) == 3.0
    assert abs(operator_norm(a, 2) - math.sqrt(5.0)) < 1e-12


def test_norm_one_equals_norm_inf_exactly():
    # symmetric input makes these the same number; same code path, same bits
    rng = np.random.default_rng(3)
    a = rng.standard_normal((15, 15))
    a = a + a.T
    assert operator_norm(a, 1) == operator_norm(a, np.inf)


def test_spectral_norm_against_power_iteration():
    """Independent route: power iteration on A @ A drives to the top
    squared eigenvalue; agreement to 1e-8 relative."""
    rng = np.random.default_rng(11)
    a = rng.standard_normal((20, 20))
    a = (a + a.T) / 2
    a2 = a @ a
    v = np.ones(20) / math.sqrt(20)
    for _ in range(600):
        v = a2 @ v
        v /= np.linalg.norm(v)
    power = math.sqrt(float(v @ a2 @ v))
    assert abs(operator_norm(a, 2) - power) < 1e-8 * power


def test_norm_order_interpolation_bound():
    rng = np.random.default_rng(5)
    a = rng.standard_normal((10, 10))
    a = a + a.T
    with pytest.raises(NormOrderError):
        operator_norm(a, 1.5)
    b = operator_norm_bound(a, 1.5)
    assert b >= operator_norm(a, 2) - 1e-12
    assert b >= operator_norm(a, 1) - 1e-12
    with pytest.raises(NormOrderError):
        operator_norm_bound(a, 0.5)


def test_frobenius_norm_value():
    assert abs(frobenius_norm([[3.0, 0.0], [0.0, 3.0]]) - math.sqrt(18.0)) < 1e-14


def test_matrix_function_exp_of_diagonal():
    out = matrix_function(np.diag([0.0, 1.0]), math.exp)
    assert np.allclose(out, np.diag([1.0, math.e]), atol=1e-12)


def test_matrix_function_log_names_bad_eigenvalue():
    with pytest.raises(DomainError) as err:
        matrix_function(np.diag([1.0, 0.0]), math.log)
    assert "0.0" in str(err.value)


def test_matrix_function_square_matches_matmul():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((8, 8))
    a = (a + a.T) / 2
    assert np.max(np.abs(matrix_function(a, lambda x: x * x) - a @ a)) < 1e-10


def test_matrix_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(9)
    a = rng.standard_normal((6, 6))
    a = (a + a.T) / 2
    path = tmp_path / "m.csv"
    save_matrix_csv(path, a)
    back = load_matrix_csv(path)
    # 17 significant digits round-trips float64 exactly
    assert np.array_equal(back, a)
