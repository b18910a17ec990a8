"""The variance link function and its series machinery.

``f_of_lambda`` maps the variance ratio lam = sigma^2/||mu||^2 of an
isotropic projected normal to the half-trace of its intrinsic covariance
on the sphere. It is a strictly increasing bijection from [0, inf) onto
[0, (pi^2-4)/4), evaluated by adaptive quadrature and inverted by
bracketing plus bisection; ``invert_f`` is what turns an observed
covariance half-trace into an estimate of lam.

Monotonicity is certifiable through the series expansion of the
derivative in the x = 1/sqrt(lam) parameterization:

    (d/dx f)(x) * exp(x^2/2) = sum_k fprime_coeff(k) x^k

whose coefficients alternate in sign (even negative, odd positive) with
closed forms built from double factorials, the cosine moments
``cos_moment`` and the combinatorial factor ``odd_coeff_factor``. The
series functions here exist chiefly as cross-checking oracles for the
quadrature route and are kept overflow-free up to index ~200 by using
iterative ratio products instead of factorials.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from ._validation import check_scalar
from .projnorm import SQRT_2PI, exp_weighted_mills

# supremum of the link function: half-trace of the intrinsic covariance
# of the uniform distribution, (pi^2 - 4)/4
F_UPPER_BOUND = (np.pi**2 - 4.0) / 4.0

# margin below F_UPPER_BOUND within which inversion refuses to run
SATURATION_MARGIN = 1e-9


def _double_factorial_ratio(m: int) -> float:
    """m!!/(m+1)!! as a product of ratios, safe for large m."""
    r = 1.0
    k = m
    while k >= 1:
        r *= k / (k + 1.0)
        k -= 2
    return r


def _inv_double_factorial(n: int) -> float:
    """1/n!! without forming n!! (which overflows near n ~ 300)."""
    r = 1.0
    k = n
    while k >= 2:
        r /= k
        k -= 2
    return r


def _halved_binom(j_max: int) -> np.ndarray:
    """t_j = C(2j+1, j) / 2^(2j+1) for j = 0..j_max, by ratio recurrence."""
    t = np.empty(j_max + 1)
    t[0] = 0.5
    for j in range(j_max):
        t[j + 1] = t[j] * (2 * j + 3) / (2.0 * (j + 2))
    return t


def cos_moment(m: int) -> float:
    """Closed form of the integral of phi^2 cos^m(phi) sin(phi) over [0, pi].

    For m = 0 this is pi^2 - 4; odd m give (pi^2/(m+1)) (m!!/(m+1)!! - 1);
    even m >= 2 combine the double-factorial ratio with a halved-binomial
    sum. These moments drive the coefficient recurrences below.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return np.pi**2 - 4.0
    if m % 2 == 1:
        return np.pi**2 / (m + 1) * (_double_factorial_ratio(m) - 1.0)
    t = _halved_binom(m // 2 - 1)
    s = sum(t[j] / (2 * j + 3) for j in range(m // 2))
    return (np.pi**2 - 4.0 * _double_factorial_ratio(m) * (1.0 + s)) / (m + 1)


def mills_series_coeff(k: int) -> float:
    """Coefficient of x^k in the power series of ``mills_ratio``.

    1/k!! for odd k, (sqrt(2pi)/2)/k!! for even k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    inv = _inv_double_factorial(k)
    return inv if k % 2 == 1 else (SQRT_2PI / 2.0) * inv


def mills_term_coeff(k: int) -> float:
    """Series coefficient of the mills-weighted part of the derivative.

    The x-derivative of the link integral splits into polynomial pieces
    plus one term carrying the mills ratio; this returns the coefficient
    of x^k in that term's expansion. k = 1 and 2 are the hand-reduced
    constants 4 sqrt(2pi)/9 and -7 pi^2/32; k >= 3 follows the recurrence

        d_{k-1} (3 J_{k+1} - J_{k-1}) + d_{k-3} (J_{k+1} - J_{k-1})

    with d = mills_series_coeff and J = cos_moment.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return 4.0 * SQRT_2PI / 9.0
    if k == 2:
        return -7.0 * np.pi**2 / 32.0
    hi, lo = cos_moment(k + 1), cos_moment(k - 1)
    return mills_series_coeff(k - 1) * (3.0 * hi - lo) + mills_series_coeff(k - 3) * (hi - lo)


def _odd_factor(k: int) -> float:
    """Bracketed factor of odd-index derivative coefficients, any odd k >= 1."""
    j_top = (k - 1) // 2
    t = _halved_binom(j_top)
    s = 1.0 + sum(t[j] / (2 * j + 3) for j in range(j_top))
    return s - t[j_top] * (k + 1) / (k + 2.0)


def odd_coeff_factor(k: int) -> float:
    """The combinatorial factor S with 2 sqrt(2pi) S(k) pinched in [pi, pi^2].

    S(k) = 1 + sum_{j < (k-1)/2} C(2j+1, j)/(2^(2j+1) (2j+3))
             - C(k, (k-1)/2) (k+1)/(2^k (k+2))

    Increasing in odd k; defined here for odd k >= 3 only.
    """
    if k < 3 or k % 2 == 0:
        raise ValueError("defined for odd k >= 3 only")
    return _odd_factor(k)


def fprime_coeff(k: int) -> float:
    """Coefficient of x^k in the series of (d/dx f)(x) exp(x^2/2).

    Even k: -pi^2/(k+2)!!. Odd k >= 3: 2 sqrt(2pi) S(k)/(k+2)!! with S
    from ``odd_coeff_factor``; k = 1 is 4 sqrt(2pi)/9. Strictly
    alternating in sign: negative at even k, positive at odd k.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k % 2 == 0:
        return -np.pi**2 * _inv_double_factorial(k + 2)
    if k == 1:
        return 4.0 * SQRT_2PI / 9.0
    return 2.0 * SQRT_2PI * _inv_double_factorial(k + 2) * _odd_factor(k)


class SeriesSum(NamedTuple):
    """Partial series value together with its alternating-tail bound."""

    value: float
    tail_bound: float


def fprime_series(x: float, k_max: int = 80) -> SeriesSum:
    """Partial sum of the derivative series at x >= 0, with error bound.

    Terms are accumulated as ratio products so that x^k and (k+2)!! never
    appear separately (either would overflow for x ~ 10, k > 300). Since
    the series alternates with eventually decreasing terms, the truncation
    error is bounded by the first omitted term once the term-ratio bound
    pi * x * (k+2)!!/(k+3)!! falls below 1; if k_max is too small for that
    certificate at this x, a ValueError asks for a larger k_max.

    The sum is strictly negative for every x >= 0, which is what makes
    the link function invertible.
    """
    x = check_scalar(x, "x", nonnegative=True)
    if k_max < 0:
        raise ValueError("k_max must be >= 0")

    total = 0.0
    p = 0.5  # x^k / (k+2)!!, starting at k = 0
    # r[k] = (k+2)!!/(k+3)!!; parity chains decrease, consecutive pair kept
    r_prev, r_cur = 0.5, 2.0 / 3.0  # r_{-1}, r_0
    # incremental odd factor: S at odd k = 2*j_odd + 1
    s_base, t_j, j_odd = 1.0, 0.5, 0
    term = 0.0
    for k in range(k_max + 2):
        if k % 2 == 0:
            term = -np.pi**2 * p
        else:
            s_val = s_base - t_j * (k + 1) / (k + 2.0)
            term = 2.0 * SQRT_2PI * s_val * p
            s_base += t_j / (2 * j_odd + 3)
            t_j *= (2 * j_odd + 3) / (2.0 * (j_odd + 2))
            j_odd += 1
        if k <= k_max:
            total += term
        p *= x * r_cur
        r_prev, r_cur = r_cur, r_prev * (k + 3) / (k + 4.0)

    # Rigorous tail bound: each term ratio obeys |t_{j+1}|/|t_j| <= pi x r_j
    # with r_j = (j+2)!!/(j+3)!! -> 0, so the omitted terms are dominated by
    # a ratio chain that eventually contracts; sum the chain until it does.
    b = abs(term)  # |t_{k_max+1}| computed exactly above
    ra, rb = r_prev, r_cur  # r_{k_max+1}, r_{k_max+2}
    j = k_max + 1
    tail_bound = 0.0
    certified = False
    for _ in range(500000):
        rho = np.pi * x * ra
        if rho < 0.9:
            tail_bound += b / (1.0 - rho)
            certified = True
            break
        tail_bound += b
        b *= rho
        if b > 1e200 or tail_bound > 1e200:
            break
        ra, rb = rb, ra * (j + 4) / (j + 5.0)
        j += 1
    if not certified or tail_bound > 1e-12:
        raise ValueError(
            f"series tail not certified at x={x!r} with k_max={k_max}: "
            f"bound {tail_bound:.3e}; raise k_max"
        )
    return SeriesSum(value=total, tail_bound=tail_bound)


def even_series(x: float) -> float:
    """sum_k x^(2k)/(2k+2)!!, converged to tail below 1e-14."""
    x = check_scalar(x, "x", nonnegative=True)
    term, total, k = 0.5, 0.5, 0
    while True:
        ratio = x * x / (2 * k + 4.0)
        term *= ratio
        total += term
        k += 1
        if ratio < 0.5 and term < 5e-15:
            return total


def odd_series(x: float) -> float:
    """sum_k x^(2k+1)/(2k+3)!!, converged to tail below 1e-14.

    Envelope of the odd derivative coefficients, to be compared with
    ``even_series``. The even series dominates only up to x ~ 1.78; the
    two cross there and the odd one wins asymptotically (their ratio
    tends to sqrt(2pi)/2), so the comparison certifies the negativity of
    the derivative series on the small-x range alone. The negativity
    itself holds for every x (see ``fprime_series``).
    """
    x = check_scalar(x, "x", nonnegative=True)
    term, total, k = x / 3.0, x / 3.0, 0
    while True:
        ratio = x * x / (2 * k + 5.0)
        term *= ratio
        total += term
        k += 1
        if ratio < 0.5 and term < 5e-15:
            return total


def f_of_x(x: float, *, epsabs: float = 1e-12, epsrel: float = 1e-12) -> float:
    """Link integral in the x = 1/sqrt(lam) parameterization, no prefactor.

    exp(-x^2/2) * int_0^pi phi^2 (x cos(phi)
        + (x^2 cos^2(phi) + 1) mills_ratio(x cos(phi))) sin(phi) dphi

    with the exponential folded into the integrand so that small lam
    (large x) stays in floating range. This is the form whose derivative
    the ``fprime_*`` series describe.
    """
    x = check_scalar(x, "x", nonnegative=True)

    def integrand(phi):
        c = np.cos(phi)
        drift = np.exp(-0.5 * x * x) * x * c
        return phi * phi * np.sin(phi) * (drift + (x * x * c * c + 1.0) * exp_weighted_mills(x, c))

    val, _ = quad(integrand, 0.0, np.pi, epsabs=epsabs, epsrel=epsrel, limit=400)
    return val


def f_of_lambda(lam: float) -> float:
    """Half-trace of the intrinsic covariance as a function of lam > 0.

    Equals f_of_x(1/sqrt(lam)) / (2 sqrt(2pi)); strictly increasing, with
    values filling (0, (pi^2-4)/4). Evaluated by adaptive Gauss-Kronrod
    quadrature on the smooth folded integrand.
    """
    lam = check_scalar(lam, "lam", positive=True)
    return f_of_x(1.0 / np.sqrt(lam)) / (2.0 * SQRT_2PI)


def invert_f(v: float) -> float:
    """Solve f_of_lambda(lam) = v for lam by bracketing and bisection.

    v must lie in [0, (pi^2-4)/4 - 1e-9); v = 0 returns 0 by convention.
    The bracket starts at [1e-8, 1], doubling the upper end until f
    exceeds v (capped at 1e12, beyond which a saturation error names the
    bound) and extending the lower end downward for targets below
    f(1e-8). Bisection stops when |f(lam) - v| <= 1e-10.
    """
    v = float(v)
    if not np.isfinite(v) or v < 0:
        raise ValueError(f"v must be a finite value >= 0, got {v!r}")
    if v >= F_UPPER_BOUND - SATURATION_MARGIN:
        raise ValueError(
            f"v={v!r} is at or beyond the attainable range; the link "
            f"saturates at (pi^2-4)/4 = {F_UPPER_BOUND!r}"
        )
    if v == 0.0:
        return 0.0

    lo, hi = 1e-8, 1.0
    while f_of_lambda(lo) > v:
        lo *= 0.25
        if lo < 1e-300:
            return 0.0
    while f_of_lambda(hi) < v:
        lo = hi
        hi *= 2.0
        if hi > 1e12:
            raise ValueError(
                f"no bracket below lam=1e12 for v={v!r}; the link "
                f"saturates at (pi^2-4)/4 = {F_UPPER_BOUND!r}"
            )
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f_of_lambda(mid)
        if abs(fm - v) <= 1e-10:
            return mid
        if fm < v:
            lo = mid
        else:
            hi = mid
    return mid


@dataclass(frozen=True)
class LinkTable:
    """Tabulated (lam, f) pairs, strictly increasing in both columns."""

    lambdas: np.ndarray
    f_values: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        fv = np.asarray(self.f_values, dtype=float)
        if lam.shape != fv.shape or lam.ndim != 1 or lam.size == 0:
            raise ValueError("lambdas and f_values must be matching 1-d arrays")
        if np.any(np.diff(lam) <= 0) or np.any(np.diff(fv) <= 0):
            raise ValueError("table columns must be strictly increasing")
        if np.any(fv < 0) or np.any(fv >= F_UPPER_BOUND):
            raise ValueError("f values must lie in [0, (pi^2-4)/4)")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "f_values", fv)

    def __len__(self):
        return self.lambdas.size


def build_link_table(lambda_min: float, lambda_max: float, n_points: int,
                     log_spacing: bool = True) -> LinkTable:
    """Evaluate the link on a grid; one row when n_points == 1."""
    lambda_min = check_scalar(lambda_min, "lambda_min", positive=True)
    lambda_max = check_scalar(lambda_max, "lambda_max", positive=True)
    if lambda_max < lambda_min:
        raise ValueError("lambda_max must be >= lambda_min")
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    if n_points == 1:
        grid = np.array([lambda_min])
    elif log_spacing:
        grid = np.geomspace(lambda_min, lambda_max, n_points)
    else:
        grid = np.linspace(lambda_min, lambda_max, n_points)
    values = np.array([f_of_lambda(l) for l in grid])
    return LinkTable(lambdas=grid, f_values=values)
