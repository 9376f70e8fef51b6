import numpy as np
import pytest

from eigenbridge import (
    BadTheta,
    DiscreteLaw,
    MarchenkoPastur,
    NoRoot,
    NotOrthogonal,
    NotUnit,
    RngStream,
    build_spiked,
    detectability_threshold,
    largest_eig_secular,
    projection_stat,
    sym_eig,
    theoretical_solution,
    top_eigvec_resolvent,
)

SECULAR_VS_DENSE_TOL = 1e-10

LAMBDA1_Y05_THETA3 = 4.2
VARIANCE_Y05_THETA3 = 0.009661835748792244
NORM_Y05_THETA3 = 0.3475240234284579
THRESHOLD_Y05 = 1.2071067811865475


def test_build_spiked_basic():
    b = build_spiked(np.zeros((2, 2)), 2.0, np.array([1.0, 0.0]))
    assert np.array_equal(b, np.diag([2.0, 0.0]))


def test_build_spiked_hermitian():
    gen = RngStream(40, 0).generator
    v = gen.standard_normal(5) + 1j * gen.standard_normal(5)
    v /= np.linalg.norm(v)
    a = gen.standard_normal((5, 5)) + 1j * gen.standard_normal((5, 5))
    s = (a + a.conj().T) / 2
    b = build_spiked(s, 1.5, v)
    assert np.abs(b - b.conj().T).max() == 0.0


def test_build_spiked_validation():
    v = np.array([1.0, 0.0])
    with pytest.raises(BadTheta):
        build_spiked(np.zeros((2, 2)), -1.0, v)
    with pytest.raises(BadTheta):
        build_spiked(np.zeros((2, 2)), 0.0, v)
    with pytest.raises(NotUnit):
        build_spiked(np.zeros((2, 2)), 1.0, 2 * v)


def test_secular_hand_2x2():
    d = sym_eig(np.diag([0.0, 1.0]))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    lam = largest_eig_secular(d, 1.0, v)
    assert abs(lam - (1 + np.sqrt(2) / 2)) < 1e-10


def test_secular_zero_matrix_gives_theta():
    d = sym_eig(np.zeros((4, 4)))
    v = np.full(4, 0.5)
    assert abs(largest_eig_secular(d, 2.0, v) - 2.0) < 1e-9


def test_secular_matches_dense_eigensolver():
    gen = RngStream(41, 0).generator
    for trial in range(100):
        n = int(gen.integers(2, 17))
        complex_field = trial % 2 == 1
        if complex_field:
            a = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
            v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        else:
            a = gen.standard_normal((n, n))
            v = gen.standard_normal(n)
        s = (a + a.conj().T) / 2
        v /= np.linalg.norm(v)
        theta = float(gen.uniform(0.5, 3.0))
        lam = largest_eig_secular(sym_eig(s), theta, v)
        dense = np.linalg.eigvalsh(build_spiked(s, theta, v)).max()
        assert abs(lam - dense) < SECULAR_VS_DENSE_TOL


def test_secular_no_root():
    d = sym_eig(np.diag([0.0, 1.0]))
    with pytest.raises(NoRoot):
        largest_eig_secular(d, 0.5, np.array([1.0, 0.0]))


def test_secular_validation():
    d = sym_eig(np.eye(2))
    with pytest.raises(BadTheta):
        largest_eig_secular(d, -2.0, np.array([1.0, 0.0]))


def test_top_eigvec_satisfies_eigen_equation():
    gen = RngStream(42, 0).generator
    a = gen.standard_normal((8, 8))
    s = (a + a.T) / 2
    v = gen.standard_normal(8)
    v /= np.linalg.norm(v)
    d = sym_eig(s)
    theta = 2.0
    lam = largest_eig_secular(d, theta, v)
    q = top_eigvec_resolvent(d, lam, v)
    b = build_spiked(s, theta, v)
    assert np.linalg.norm(b @ q - lam * q) < 1e-8 * np.linalg.norm(q)


def test_threshold_atomic_law_is_zero():
    assert detectability_threshold(DiscreteLaw(np.array([0.0]), np.array([1.0]))) == 0.0


def test_threshold_mp_values():
    # soft-edge laws: theta_c = sqrt(y) (1 + sqrt(y))
    assert abs(detectability_threshold(MarchenkoPastur(1.0)) - 2.0) < 5e-4
    assert abs(detectability_threshold(MarchenkoPastur(0.5)) - THRESHOLD_Y05) < 2e-4


def test_solution_point_mass():
    sol = theoretical_solution(DiscreteLaw(np.array([0.0]), np.array([1.0])), 2.0)
    assert sol.is_supercritical
    assert sol.threshold_theta_c == 0.0
    assert abs(sol.lambda1 - 2.0) < 1e-9
    assert sol.limit_variance == 0.0
    assert abs(sol.limit_norm - 0.5) < 1e-9


def test_solution_regimes_mp1():
    law = MarchenkoPastur(1.0)
    sub = theoretical_solution(law, 1.9)
    assert sub.regime == "subcritical"
    assert sub.lambda1 is None and sub.limit_variance is None and sub.limit_norm is None
    sup = theoretical_solution(law, 2.1)
    assert sup.is_supercritical
    # detached location theta (theta - y + 1) / (theta - y)
    assert abs(sup.lambda1 - 2.1 * 2.1 / 1.1) < 1e-7


def test_solution_frozen_values_y05():
    sol = theoretical_solution(MarchenkoPastur(0.5), 3.0)
    assert sol.is_supercritical
    assert abs(sol.lambda1 - LAMBDA1_Y05_THETA3) < 1e-8
    assert abs(sol.limit_variance - VARIANCE_Y05_THETA3) < 1e-9
    assert abs(sol.limit_norm - NORM_Y05_THETA3) < 1e-9
    assert abs(sol.threshold_theta_c - THRESHOLD_Y05) < 2e-4


def test_solution_norm_variance_identity():
    for theta in (1.5, 2.0, 3.0, 5.0):
        sol = theoretical_solution(MarchenkoPastur(0.5), theta)
        assert abs(sol.limit_norm**2 - sol.limit_variance - 1.0 / theta**2) < 1e-12


def test_solution_lambda1_monotone_in_theta():
    law = MarchenkoPastur(0.5)
    lams = [theoretical_solution(law, t).lambda1 for t in (1.3, 1.5, 2.0, 3.0, 5.0)]
    assert np.all(np.diff(lams) > 0)
    assert lams[0] > law.upper_edge


def test_solution_validation():
    with pytest.raises(BadTheta):
        theoretical_solution(MarchenkoPastur(1.0), 0.0)


def test_projection_hand_values():
    d = sym_eig(np.diag([0.0, 1.0]))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    x = np.array([1.0, -1.0]) / np.sqrt(2)
    lam = 1 + np.sqrt(2) / 2
    real_val = projection_stat(d, lam, v, x, "real")
    assert abs(real_val - (np.sqrt(2) - 2)) < 1e-12
    complex_val = projection_stat(d, lam, v, x, "complex")
    assert abs(complex_val - (2 - 2 * np.sqrt(2))) < 1e-12


def test_projection_zero_matrix_vanishes():
    d = sym_eig(np.zeros((4, 4)))
    v = np.array([1.0, 0.0, 0.0, 0.0])
    x = np.array([0.0, 1.0, 0.0, 0.0])
    # (lam I)^{-1} keeps x orthogonal to v, so the form is exactly zero
    assert projection_stat(d, 2.0, v, x, "real") == 0.0


def test_projection_validation():
    d = sym_eig(np.diag([0.0, 1.0]))
    v = np.array([1.0, 0.0])
    x = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        projection_stat(d, 2.0, v, x, "quaternion")
    with pytest.raises(NotUnit):
        projection_stat(d, 2.0, v, 2 * x, "real")
    with pytest.raises(NotOrthogonal):
        projection_stat(d, 2.0, v, v, "real")
