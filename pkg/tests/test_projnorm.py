import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from spherenorm.projnorm import (
    SQRT_2PI,
    GeneralNormalParams,
    ProjNormParams,
    density,
    density_general,
    exp_weighted_mills,
    mills_ratio,
    mills_ratio_series,
    sample,
)

POLE = np.array([0.0, 0.0, 1.0])

# reference values from a 50-digit quadrature of exp(x^2/2) * integral of
# the Gaussian kernel up to x
MILLS_AT_1 = 3.4770518117036945
MILLS_AT_MINUS_10 = 0.099028596471731921
MILLS_AT_HALF = 1.9640174953579938


def test_mills_ratio_reference_values():
    assert mills_ratio(0.0) == pytest.approx(SQRT_2PI / 2, rel=1e-14)
    assert mills_ratio(1.0) == pytest.approx(MILLS_AT_1, rel=1e-12)
    assert mills_ratio(-10.0) == pytest.approx(MILLS_AT_MINUS_10, rel=1e-10)
    assert mills_ratio(0.5) == pytest.approx(MILLS_AT_HALF, rel=1e-12)


def test_mills_ratio_positive_increasing_and_saturation():
    xs = np.linspace(-40, 37, 3000)
    vals = mills_ratio(xs)
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) > 0)
    assert np.isposinf(mills_ratio(40.0))
    with pytest.raises(ValueError):
        mills_ratio(np.inf)


def test_mills_ratio_ode_relation():
    # d/dx mills = 1 + x * mills, checked by central differences
    h = 1e-6
    for x in np.linspace(-5, 5, 41):
        fd = (mills_ratio(x + h) - mills_ratio(x - h)) / (2 * h)
        assert fd == pytest.approx(1.0 + x * mills_ratio(x), rel=1e-6, abs=1e-6)


def test_mills_ratio_series():
    assert mills_ratio_series(0.0, 0) == pytest.approx(SQRT_2PI / 2, rel=1e-15)
    assert mills_ratio_series(0.0, 25) == pytest.approx(SQRT_2PI / 2, rel=1e-15)
    assert mills_ratio_series(0.5, 60) == pytest.approx(mills_ratio(0.5), abs=1e-12)
    assert mills_ratio_series(0.5, 0) == pytest.approx(SQRT_2PI / 2 + 0.5, rel=1e-15)
    with pytest.raises(ValueError):
        mills_ratio_series(0.5, -1)


def test_exp_weighted_mills_matches_naive_product():
    for x in [0.3, 1.0, 3.0]:
        for c in [-0.9, -0.2, 0.0, 0.4, 1.0]:
            naive = np.exp(-0.5 * x * x) * mills_ratio(x * c)
            assert exp_weighted_mills(x, c) == pytest.approx(naive, rel=1e-13)
    # survives regimes where the naive product is inf * 0
    assert np.isfinite(exp_weighted_mills(100.0, 0.99))


def test_density_rejects_point_mass():
    with pytest.raises(ValueError):
        density(ProjNormParams(direction=POLE, lam=0.0), POLE)


def test_density_pole_value_lambda_1():
    expected = (2 * np.pi) ** -1.5 * np.exp(-0.5) * (1 + 2 * mills_ratio(1.0))
    assert density(ProjNormParams(direction=POLE, lam=1.0), POLE) == pytest.approx(
        expected, rel=1e-14
    )


def test_density_rotational_symmetry():
    params = ProjNormParams(direction=POLE, lam=0.7)
    angles = np.linspace(0, 2 * np.pi, 33)
    ring = np.stack(
        [np.cos(angles) * np.sin(1.1), np.sin(angles) * np.sin(1.1), np.full_like(angles, np.cos(1.1))],
        axis=1,
    )
    vals = density(params, ring)
    assert vals.max() - vals.min() < 1e-12


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_density_normalization(lam):
    params = ProjNormParams(direction=POLE, lam=lam)

    def ring_mass(phi):
        return 2 * np.pi * np.sin(phi) * density(params, np.array([np.sin(phi), 0, np.cos(phi)]))

    total, _ = quad(ring_mass, 0, np.pi, epsabs=1e-10, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_density_uniform_limit_law():
    # at lam the relative deviation from 1/(4pi) is (4/sqrt(2pi)) c lam^-0.5
    params = ProjNormParams(direction=POLE, lam=1e8)
    cs = np.linspace(-1, 1, 41)
    probes = np.stack([np.sqrt(1 - cs**2), np.zeros_like(cs), cs], axis=1)
    rel = np.abs(density(params, probes) * 4 * np.pi - 1.0)
    assert rel.max() < 2e-4
    predicted = (4 / SQRT_2PI) * np.abs(cs) * 1e-4
    assert np.all(np.abs(rel - predicted) < 2e-8)


def test_density_matches_general_isotropic():
    for lam in [0.1, 1.0, 10.0]:
        iso = ProjNormParams(direction=POLE, lam=lam)
        gen = GeneralNormalParams(mu=POLE, sigma=lam * np.eye(3))
        rng = np.random.default_rng(12)
        U = rng.standard_normal((50, 3))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        assert np.allclose(density(iso, U), density_general(gen, U), rtol=1e-12)


def test_general_params_validation():
    with pytest.raises(ValueError):
        GeneralNormalParams(mu=POLE, sigma=np.array([[1, 0.1, 0], [0, 1, 0], [0, 0, 1.0]]))
    with pytest.raises(ValueError):
        GeneralNormalParams(mu=POLE, sigma=np.diag([1.0, 1.0, 0.0]))


COUNTER_SIGMA = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.5, 1.0]])


def test_general_density_normalizes():
    gen = GeneralNormalParams(mu=POLE, sigma=COUNTER_SIGMA)

    def point_mass(phi, theta):
        u = np.array(
            [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
        )
        return density_general(gen, u) * np.sin(phi)

    total, _ = dblquad(point_mass, 0, 2 * np.pi, 0, np.pi, epsabs=1e-8)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_general_density_asymmetric_around_mean():
    # the cross term couples y and z, so reflecting y flips the density;
    # x decouples, so reflecting x is an exact symmetry of this example
    gen = GeneralNormalParams(mu=POLE, sigma=COUNTER_SIGMA)
    u = np.array([np.cos(np.pi / 2) * np.sin(0.52), np.sin(np.pi / 2) * np.sin(0.52), np.cos(0.52)])
    p = density_general(gen, u)
    assert abs(p - density_general(gen, u * np.array([1, -1, 1]))) > 1e-3
    assert density_general(gen, u * np.array([-1, 1, 1])) == pytest.approx(p, rel=1e-14)


def test_sample_point_mass_and_determinism():
    params = ProjNormParams(direction=POLE, lam=0.0)
    pts = sample(params, 5, seed=1)
    assert np.array_equal(pts, np.tile(POLE, (5, 1)))

    params = ProjNormParams(direction=POLE, lam=1.0)
    a = sample(params, 1000, seed=123)
    b = sample(params, 1000, seed=123)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(params, 1000, seed=124))
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-15)


def test_sample_mean_z_matches_quadrature():
    params = ProjNormParams(direction=POLE, lam=1.0)

    def z_mass(phi):
        return (
            2 * np.pi * np.cos(phi) * np.sin(phi)
            * density(params, np.array([np.sin(phi), 0, np.cos(phi)]))
        )

    expected, _ = quad(z_mass, 0, np.pi, epsabs=1e-12)
    pts = sample(params, 10**5, seed=7)
    se = pts[:, 2].std(ddof=1) / np.sqrt(len(pts))
    assert abs(pts[:, 2].mean() - expected) < 3 * se


def test_sample_cdf_kolmogorov_smirnov():
    # empirical law of u . direction vs the quadrature CDF, n = 1e6
    params = ProjNormParams(direction=POLE, lam=1.0)
    grid = np.linspace(-1, 1, 4001)
    probes = np.stack([np.sqrt(1 - grid**2), np.zeros_like(grid), grid], axis=1)
    pdf_c = 2 * np.pi * density(params, probes)
    cdf = np.concatenate([[0.0], np.cumsum((pdf_c[1:] + pdf_c[:-1]) / 2 * np.diff(grid))])
    cdf /= cdf[-1]

    n = 10**6
    c = np.sort(sample(params, n, seed=11)[:, 2])
    F = np.interp(c, grid, cdf)
    ks = max(np.max(np.arange(1, n + 1) / n - F), np.max(F - np.arange(0, n) / n))
    assert ks < 1.6276 / np.sqrt(n)  # 1% critical value
