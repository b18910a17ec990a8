import numpy as np
import pytest

from spherenorm import geometry, link
from spherenorm.frechet import (
    CovMatrix2,
    empirical_covariance,
    frechet_mean,
    transport_covariance,
)
from spherenorm.geometry import AntipodalError, canonical_basis, exp_map, geodesic_distance
from spherenorm.projnorm import ProjNormParams, sample

POLE = np.array([0.0, 0.0, 1.0])


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis /= np.linalg.norm(axis)
    K = np.array([
        [0, -axis[2], axis[1]],
        [axis[2], 0, -axis[0]],
        [-axis[1], axis[0], 0],
    ])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


def test_single_point():
    p = geometry.from_spherical(0.4, 1.1)
    res = frechet_mean(p[None, :])
    assert np.allclose(res.mean, p, atol=1e-15)
    assert res.iterations == 1
    assert res.converged


def test_two_points_geodesic_midpoint():
    p = geometry.from_spherical(0.0, 0.3)
    q = geometry.from_spherical(1.2, 1.4)
    res = frechet_mean(np.stack([p, q]))
    assert res.converged
    dp = geodesic_distance(res.mean, p)
    dq = geodesic_distance(res.mean, q)
    assert dp == pytest.approx(dq, abs=1e-9)
    assert dp + dq == pytest.approx(geodesic_distance(p, q), abs=1e-9)


def test_equilateral_triangle_centered_at_pole():
    base = geometry.from_spherical(0.0, 0.8)
    pts = np.stack([
        rotation_matrix([0, 0, 1], ang) @ base for ang in (0, 2 * np.pi / 3, 4 * np.pi / 3)
    ])
    res = frechet_mean(pts, tol=1e-12)
    assert res.converged
    assert geodesic_distance(res.mean, POLE) < 1e-12


def test_objective_descends_along_iterations():
    params = ProjNormParams(direction=geometry.from_spherical(2.0, 1.0), lam=1.5)
    pts = sample(params, 400, seed=21)

    def objective(mu):
        return np.sum(np.arccos(np.clip(pts @ mu, -1, 1)) ** 2)

    values = []
    for k in range(1, 9):
        res = frechet_mean(pts, tol=1e-300, max_iter=k)
        values.append(objective(res.mean))
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_rotation_equivariance():
    params = ProjNormParams(direction=geometry.from_spherical(0.7, 0.9), lam=0.8)
    pts = sample(params, 2000, seed=22)
    R = rotation_matrix([1.0, 2.0, 3.0], 0.7)
    res = frechet_mean(pts, tol=1e-12)
    res_rot = frechet_mean(pts @ R.T, tol=1e-12)
    assert geodesic_distance(res_rot.mean, R @ res.mean) < 1e-9

    cov = empirical_covariance(pts, res.mean)
    cov_rot = empirical_covariance(pts @ R.T, res_rot.mean)
    assert cov_rot.trace == pytest.approx(cov.trace, abs=1e-10)


def test_nonconvergence_flagged_not_raised():
    params = ProjNormParams(direction=POLE, lam=5.0)
    pts = sample(params, 500, seed=23)
    res = frechet_mean(pts, tol=1e-300, max_iter=2)
    assert not res.converged
    assert res.iterations == 2
    assert res.final_gradient_norm > 1e-300


def test_mean_concentrates_at_direction():
    # 100 seeded runs at L = 1e4, lam = 1: at least 95 land within 0.06 rad
    direction = geometry.from_spherical(0.3, 1.2)
    params = ProjNormParams(direction=direction, lam=1.0)
    hits = 0
    for r in range(100):
        pts = sample(params, 10**4, seed=[77, r])
        res = frechet_mean(pts)
        if geodesic_distance(res.mean, direction) < 0.06:
            hits += 1
    assert hits >= 95


def test_half_trace_converges_at_sqrt_rate():
    # averaged covariance error vs f(1) over L in {1e2, 1e3, 1e4}
    params = ProjNormParams(direction=POLE, lam=1.0)
    target = link.f_of_lambda(1.0)
    mean_errs = []
    sizes = [100, 1000, 10000]
    for L in sizes:
        errs = []
        for r in range(40):
            pts = sample(params, L, seed=[88, L, r])
            res = frechet_mean(pts)
            cov = empirical_covariance(pts, res.mean)
            errs.append(abs(cov.trace / 2 - target))
        mean_errs.append(np.mean(errs))
    slope = np.polyfit(np.log(sizes), np.log(mean_errs), 1)[0]
    assert -0.65 <= slope <= -0.35


def test_covariance_trivial_cases():
    pts = np.tile(POLE, (4, 1))
    cov = empirical_covariance(pts, POLE)
    assert np.allclose(cov.matrix, 0.0)

    # two symmetric points exp(+v), exp(-v) about the mean: matrix 2 v v^T
    basis = canonical_basis(POLE)
    a = 0.45
    plus = exp_map(POLE, geometry.TangentVector(basis=basis, c1=a, c2=0.0))
    minus = exp_map(POLE, geometry.TangentVector(basis=basis, c1=-a, c2=0.0))
    cov = empirical_covariance(np.stack([plus, minus]), POLE)
    assert cov.m11 == pytest.approx(2 * a * a, rel=1e-12)
    assert cov.m12 == pytest.approx(0.0, abs=1e-15)
    assert cov.m22 == pytest.approx(0.0, abs=1e-15)


def test_covariance_errors():
    with pytest.raises(ValueError):
        empirical_covariance(POLE[None, :], POLE)
    pts = np.stack([POLE, [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    with pytest.raises(AntipodalError) as err:
        empirical_covariance(pts, POLE)
    assert err.value.index == 2


def test_covariance_uniform_sample():
    rng = np.random.default_rng(42)
    pts = rng.standard_normal((3 * 10**4, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    cov = empirical_covariance(pts, POLE)
    assert cov.trace / 2 == pytest.approx(link.F_UPPER_BOUND, rel=0.03)


def test_covariance_trace_invariant_under_basis_rotation():
    params = ProjNormParams(direction=POLE, lam=0.5)
    pts = sample(params, 300, seed=31)
    cov = empirical_covariance(pts, POLE)
    # re-express the same second moments in a rotated tangent frame
    ang = 0.6
    R2 = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    rotated = R2 @ cov.matrix @ R2.T
    assert rotated[0, 0] + rotated[1, 1] == pytest.approx(cov.trace, abs=1e-12)


def test_transport_covariance():
    params = ProjNormParams(direction=POLE, lam=0.4)
    pts = sample(params, 500, seed=32)
    cov = empirical_covariance(pts, POLE)

    same = transport_covariance(cov, POLE)
    assert np.array_equal(same.matrix, cov.matrix)

    target = geometry.from_spherical(1.0, 0.9)
    moved = transport_covariance(cov, target)
    assert moved.trace == pytest.approx(cov.trace, abs=1e-12)
    assert np.allclose(
        np.linalg.eigvalsh(moved.matrix), np.linalg.eigvalsh(cov.matrix), atol=1e-12
    )

    iso = CovMatrix2(basis=canonical_basis(POLE), matrix=0.3 * np.eye(2))
    moved_iso = transport_covariance(iso, target)
    assert np.allclose(moved_iso.matrix, 0.3 * np.eye(2), atol=1e-12)

    with pytest.raises(AntipodalError):
        transport_covariance(cov, -POLE)


def test_covmatrix_validation():
    basis = canonical_basis(POLE)
    with pytest.raises(ValueError):
        CovMatrix2(basis=basis, matrix=np.array([[1.0, 0.0], [0.0, -1.0]]))
    with pytest.raises(ValueError):
        CovMatrix2(basis=basis, matrix=np.eye(3))
