"""Intrinsic sample statistics on the sphere.

The Frechet (intrinsic) mean minimizes the summed squared geodesic
distance to the sample. It is located by the classical fixed-point sweep:
average the log maps of the data at the current iterate and step along
that tangent average with the exponential map, until the tangent average
is small. The empirical covariance is the (1/(L-1))-normalized second
moment of the log maps taken at that mean, a 2x2 matrix in the canonical
tangent basis.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from ._validation import as_unit_vector, check_scalar, check_unit_points
from .geometry import AntipodalError, TangentBasis


@dataclass(frozen=True)
class MeanResult:
    """Outcome of the mean iteration.

    ``final_gradient_norm`` is the norm of the averaged log map at the
    returned point; ``converged`` is True when it reached the tolerance
    within the iteration budget.
    """

    mean: np.ndarray
    iterations: int
    final_gradient_norm: float
    converged: bool


@dataclass(frozen=True)
class CovMatrix2:
    """Symmetric PSD 2x2 covariance on a tangent plane, in radians^2."""

    basis: TangentBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("covariance matrix must be 2x2")
        m = 0.5 * (m + m.T)
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("covariance matrix must be PSD up to roundoff")
        object.__setattr__(self, "matrix", m)

    @property
    def m11(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def m12(self) -> float:
        return float(self.matrix[0, 1])

    @property
    def m22(self) -> float:
        return float(self.matrix[1, 1])

    @property
    def trace(self) -> float:
        return float(self.matrix[0, 0] + self.matrix[1, 1])


def _mean_log(points, mu):
    """Averaged ambient log map of the data at mu (numpy pairwise sum)."""
    return geometry.log_ambient(mu, points).mean(axis=0)


def frechet_mean(points, tol: float = 1e-10, max_iter: int = 1000) -> MeanResult:
    """Fixed-point iteration for the intrinsic mean of points on the sphere.

    Starts from the projected extrinsic average (falling back to the
    first point when the coordinate sum nearly vanishes), which lands in
    the right basin for any reasonably concentrated sample. Each pass
    averages the log maps at the current iterate and moves by the
    exponential map; the loop stops when that tangent step has norm at
    most ``tol``. Non-convergence is reported through the result flags
    rather than an exception; an iterate antipodal to a data point raises
    AntipodalError carrying the point's index.
    """
    points = check_unit_points(points, "points")
    tol = check_scalar(tol, "tol", positive=True)
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    total = points.sum(axis=0)
    if np.linalg.norm(total) < 1e-12:
        mu = points[0]
    else:
        mu = geometry.project(total)

    gnorm = np.inf
    for it in range(1, max_iter + 1):
        step = _mean_log(points, mu)
        gnorm = float(np.linalg.norm(step))
        if gnorm <= tol:
            return MeanResult(mean=mu, iterations=it, final_gradient_norm=gnorm, converged=True)
        mu = np.cos(gnorm) * mu + np.sin(gnorm) * (step / gnorm)
        mu /= np.linalg.norm(mu)
    gnorm = float(np.linalg.norm(_mean_log(points, mu)))
    return MeanResult(
        mean=mu,
        iterations=max_iter,
        final_gradient_norm=gnorm,
        converged=gnorm <= tol,
    )


def empirical_covariance(points, mean) -> CovMatrix2:
    """Sample covariance of the log maps at ``mean``, 1/(L-1) normalized.

    Expressed in the canonical basis at ``mean`` so serialized results
    are comparable across runs. Requires at least two points, none
    antipodal to the mean.
    """
    points = check_unit_points(points, "points")
    if points.shape[0] < 2:
        raise ValueError("need at least 2 points for a covariance")
    basis = geometry.canonical_basis(mean)
    coords = geometry.tangent_coords(basis, geometry.log_ambient(basis.base, points))
    mat = coords.T @ coords / (points.shape[0] - 1)
    return CovMatrix2(basis=basis, matrix=mat)


def transport_covariance(cov: CovMatrix2, to) -> CovMatrix2:
    """Re-express a covariance at another point via parallel transport.

    Conjugates the matrix by the 2x2 rotation that transport induces
    between the two canonical bases; trace and eigenvalues are preserved.
    """
    to = as_unit_vector(to, "to")
    frm = cov.basis.base
    if np.array_equal(frm, to):
        return CovMatrix2(basis=cov.basis, matrix=cov.matrix)
    if float(frm @ to) < -1.0 + geometry.ZERO_TOL:
        raise AntipodalError("target is antipodal to the covariance base point")
    target_basis = geometry.canonical_basis(to)
    moved = np.stack(
        [
            geometry._transport_ambient(frm, to, cov.basis.e1),
            geometry._transport_ambient(frm, to, cov.basis.e2),
        ]
    )
    # rot[i, j] = <target e_i, transported source e_j>
    rot = geometry.tangent_coords(target_basis, moved).T
    return CovMatrix2(basis=target_basis, matrix=rot @ cov.matrix @ rot.T)
