"""Input validation helpers shared across the package."""

import numpy as np

# Euclidean norms this far from 1 are treated as data errors rather than
# roundoff; inside the band points are silently renormalized.
UNIT_NORM_BAND = 1e-6


def as_unit_vector(p, name="point"):
    """Validate a single point on the sphere and renormalize it.

    Accepts any length-3 sequence with norm within 1e-12 of 1.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} has non-finite entries")
    n = np.linalg.norm(p)
    if abs(n - 1.0) > 1e-12:
        raise ValueError(f"{name} is not a unit vector (norm {n!r})")
    return p / n


def check_unit_points(X, name="X"):
    """Validate an (n, 3) array of sphere points for ingestion paths.

    Norms must lie within ``UNIT_NORM_BAND`` of 1; rows are renormalized
    to machine precision. A single (3,) point is promoted to (1, 3).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {X.shape}")
    if X.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} has non-finite entries")
    norms = np.linalg.norm(X, axis=1)
    bad = np.abs(norms - 1.0) > UNIT_NORM_BAND
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ValueError(
            f"{name}[{i}] has norm {norms[i]!r}, outside the accepted band "
            f"[1-{UNIT_NORM_BAND}, 1+{UNIT_NORM_BAND}]"
        )
    return X / norms[:, None]


def check_scalar(value, name, *, positive=False, nonnegative=False):
    """Validate a finite real scalar, optionally restricted in sign."""
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if nonnegative and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value
