"""Riemannian primitives on the unit 2-sphere embedded in R^3.

Points are unit vectors stored as plain numpy arrays of shape (3,), with
(theta, phi) spherical coordinates available through converters:
x = cos(theta) sin(phi), y = sin(theta) sin(phi), z = cos(phi),
theta in [0, 2*pi), phi in [0, pi].

Tangent vectors carry an explicit orthonormal basis of the tangent plane
so that quantities living in different tangent spaces (e.g. transported
covariances) are never compared coordinate-blind.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_unit_vector

# below this, angles and tangent norms are treated as exactly zero to
# avoid 0/0 in sin ratios
ZERO_TOL = 1e-12


class AntipodalError(ValueError):
    """Raised where the cut locus makes an operation non-unique.

    ``index`` identifies the offending data point when the error arises
    while sweeping a point set, else it is None.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal basis (e1, e2) of the tangent plane at ``base``."""

    base: np.ndarray
    e1: np.ndarray
    e2: np.ndarray


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector with components (c1, c2) in an explicit basis."""

    basis: TangentBasis
    c1: float
    c2: float

    def norm(self) -> float:
        return float(np.hypot(self.c1, self.c2))

    def ambient(self) -> np.ndarray:
        """The vector as a 3-vector in the embedding space."""
        return self.c1 * self.basis.e1 + self.c2 * self.basis.e2


def from_spherical(theta: float, phi: float) -> np.ndarray:
    """Unit vector for azimuth theta (mod 2*pi) and polar angle phi in [0, pi]."""
    theta = float(theta)
    phi = float(phi)
    if not (np.isfinite(theta) and np.isfinite(phi)):
        raise ValueError("spherical coordinates must be finite")
    if not 0.0 <= phi <= np.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi!r}")
    theta = theta % (2.0 * np.pi)
    s = np.sin(phi)
    return np.array([np.cos(theta) * s, np.sin(theta) * s, np.cos(phi)])


def to_spherical(p) -> tuple[float, float]:
    """(theta, phi) of a point; theta is 0 at the poles by convention."""
    p = as_unit_vector(p)
    phi = float(np.arccos(np.clip(p[2], -1.0, 1.0)))
    theta = float(np.arctan2(p[1], p[0])) % (2.0 * np.pi)
    if min(phi, np.pi - phi) < ZERO_TOL:
        theta = 0.0
    return theta, phi


def project(x) -> np.ndarray:
    """Radial projection x / ||x||. The origin is outside the domain."""
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot project a non-finite vector")
    n = np.linalg.norm(x)
    if n == 0.0:
        raise ValueError("cannot project the zero vector onto the sphere")
    return x / n


def geodesic_distance(p, q) -> float:
    """Great-circle distance in radians, in [0, pi].

    Computed as arccos of the clamped dot product, which is equivalent to
    the spherical-coordinate formula but stable near 0 and pi.
    """
    p = as_unit_vector(p, "p")
    q = as_unit_vector(q, "q")
    return float(np.arccos(np.clip(p @ q, -1.0, 1.0)))


def canonical_basis(base) -> TangentBasis:
    """Deterministic orthonormal tangent basis at ``base``.

    Gram-Schmidt of the coordinate axis least aligned with the base point
    (first such axis on ties), completed by e2 = base x e1. At the north
    pole this yields e1 = (1,0,0), e2 = (0,1,0).
    """
    base = as_unit_vector(base, "base")
    axis = int(np.argmin(np.abs(base)))
    e = np.zeros(3)
    e[axis] = 1.0
    e1 = e - (e @ base) * base
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(base, e1)
    e2 /= np.linalg.norm(e2)
    return TangentBasis(base=base, e1=e1, e2=e2)


def log_ambient(base, points) -> np.ndarray:
    """Log maps of many points at ``base`` as ambient 3-vectors, shape (n, 3).

    Raises AntipodalError naming the first point at the cut locus.
    """
    base = np.asarray(base, dtype=float)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dots = np.clip(points @ base, -1.0, 1.0)
    near_antipode = dots < -1.0 + ZERO_TOL
    if np.any(near_antipode):
        i = int(np.argmax(near_antipode))
        raise AntipodalError(
            f"point {i} is antipodal to the base point; log map undefined",
            index=i,
        )
    resid = points - dots[:, None] * base
    rn = np.linalg.norm(resid, axis=1)
    ang = np.arccos(dots)
    scale = np.where(rn > ZERO_TOL, ang / np.where(rn > 0.0, rn, 1.0), 0.0)
    return resid * scale[:, None]


def log_map(base, q) -> TangentVector:
    """Riemannian log of q at base, in the canonical basis of base.

    Undefined at the antipode; returns the zero vector for q == base.
    Its norm equals geodesic_distance(base, q).
    """
    basis = canonical_basis(base)
    v = log_ambient(basis.base, as_unit_vector(q, "q")[None, :])[0]
    return TangentVector(basis=basis, c1=float(v @ basis.e1), c2=float(v @ basis.e2))


def exp_map(base, v: TangentVector) -> np.ndarray:
    """Riemannian exponential: follow the great circle from base along v."""
    base = as_unit_vector(base, "base")
    if not np.array_equal(v.basis.base, base):
        raise ValueError("tangent vector is not based at the given point")
    w = v.ambient()
    n = np.linalg.norm(w)
    if n < ZERO_TOL:
        return base
    out = np.cos(n) * base + np.sin(n) * (w / n)
    return out / np.linalg.norm(out)


def _transport_ambient(frm, to, w):
    """Parallel transport of ambient tangent vector w along the geodesic."""
    lv = log_ambient(frm, to[None, :])[0]
    lw = log_ambient(to, frm[None, :])[0]
    d2 = lv @ lv
    if d2 < ZERO_TOL**2:
        return w.copy()
    return w - ((lv @ w) / d2) * (lv + lw)


def parallel_transport(frm, to, v: TangentVector) -> TangentVector:
    """Transport v along the connecting geodesic from ``frm`` to ``to``.

    This is the rotation about frm x to by the geodesic angle; it is an
    isometry of the tangent planes. The result is expressed in the
    canonical basis at ``to``. Antipodal endpoints are rejected.
    """
    frm = as_unit_vector(frm, "frm")
    to = as_unit_vector(to, "to")
    if frm @ to < -1.0 + ZERO_TOL:
        raise AntipodalError("endpoints are antipodal; transport is ambiguous")
    if np.array_equal(frm, to):
        return v
    w = _transport_ambient(frm, to, v.ambient())
    basis = canonical_basis(to)
    # numerical cleanup: drop any radial leak
    w = w - (w @ to) * to
    return TangentVector(basis=basis, c1=float(w @ basis.e1), c2=float(w @ basis.e2))


def tangent_coords(basis: TangentBasis, ambient) -> np.ndarray:
    """Components of ambient tangent vectors (n, 3) in the given basis, (n, 2)."""
    ambient = np.atleast_2d(np.asarray(ambient, dtype=float))
    return np.stack([ambient @ basis.e1, ambient @ basis.e2], axis=1)
