"""File formats: sample CSVs, result JSON, study and link-table CSVs.

All numeric output uses locale-independent decimals with 17 significant
digits, which round-trips IEEE doubles exactly. Lines starting with '#'
are comments; sample files use them for provenance (seed, parameters).
"""

import json
import math
from pathlib import Path

import numpy as np

from . import geometry
from .estimator import ConvergenceStudy, EstimationResult, StudyRow
from .link import F_UPPER_BOUND, LinkTable

_FMT = "{:.17g}"


def _fmt(x: float) -> str:
    return _FMT.format(float(x))


def write_samples(points, path, fmt: str = "cartesian", provenance: dict | None = None):
    """Write sphere points as CSV with header ``x,y,z`` or ``theta,phi``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if fmt not in ("cartesian", "spherical"):
        raise ValueError(f"unknown sample format {fmt!r}")
    lines = []
    for key, value in (provenance or {}).items():
        lines.append(f"# {key}: {value}")
    if fmt == "cartesian":
        lines.append("x,y,z")
        for p in points:
            lines.append(",".join(_fmt(c) for c in p))
    else:
        lines.append("theta,phi")
        for p in points:
            theta, phi = geometry.to_spherical(p)
            lines.append(f"{_fmt(theta)},{_fmt(phi)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_samples(path) -> np.ndarray:
    """Parse a sample CSV back into an (n, 3) array of unit vectors.

    Cartesian rows must have norm within 1e-6 of 1 (then renormalized to
    machine precision); spherical rows need phi in [0, pi]. Malformed
    rows are rejected with their line number.
    """
    text = _read_text(path)
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            cols = [c.strip().lower() for c in line.split(",")]
            if cols == ["x", "y", "z"]:
                header = "cartesian"
            elif cols == ["theta", "phi"]:
                header = "spherical"
            else:
                raise ValueError(
                    f"{path}: line {lineno}: expected header 'x,y,z' or 'theta,phi', got {line!r}"
                )
            continue
        parts = line.split(",")
        want = 3 if header == "cartesian" else 2
        if len(parts) != want:
            raise ValueError(f"{path}: line {lineno}: expected {want} fields, got {len(parts)}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric field in {line!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"{path}: line {lineno}: non-finite value")
        if header == "cartesian":
            norm = math.sqrt(sum(v * v for v in vals))
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(
                    f"{path}: line {lineno}: norm {norm!r} outside [1-1e-6, 1+1e-6]"
                )
            # renormalize only genuine deviations; rows already unit to
            # machine precision pass through so round trips stay bit-exact
            if abs(norm - 1.0) > 4e-16:
                vals = [v / norm for v in vals]
            rows.append(vals)
        else:
            theta, phi = vals
            if not 0.0 <= phi <= math.pi:
                raise ValueError(f"{path}: line {lineno}: phi {phi!r} outside [0, pi]")
            rows.append(geometry.from_spherical(theta, phi).tolist())
    if header is None or not rows:
        raise ValueError(f"{path}: no data rows found")
    return np.asarray(rows, dtype=float)


def result_to_dict(result: EstimationResult) -> dict:
    theta, phi = geometry.to_spherical(result.direction_hat)
    d = result.direction_hat
    return {
        "direction_hat": {"x": d[0], "y": d[1], "z": d[2], "theta": theta, "phi": phi},
        "lambda_hat": "inf" if math.isinf(result.lambda_hat) else result.lambda_hat,
        "v_hat": {"m11": result.v_hat.m11, "m12": result.v_hat.m12, "m22": result.v_hat.m22},
        "half_trace": result.half_trace,
        "mean_diag": {
            "iterations": result.mean_diag.iterations,
            "final_gradient_norm": result.mean_diag.final_gradient_norm,
            "converged": result.mean_diag.converged,
        },
        "saturated": result.saturated,
    }


def write_result(result: EstimationResult, path):
    """EstimationResult as JSON; a saturated lambda_hat becomes the string 'inf'."""
    _write_text(path, json.dumps(result_to_dict(result), indent=2) + "\n")


def write_study(study: ConvergenceStudy, path):
    """Study rows as CSV: L,mean_abs_error,std_error,reps (NaN as 'nan')."""
    lines = ["L,mean_abs_error,std_error,reps"]
    for r in study.rows:
        lines.append(f"{r.L},{_fmt(r.mean_abs_error)},{_fmt(r.std_error)},{r.repetitions}")
    _write_text(path, "\n".join(lines) + "\n")


def read_study(path) -> ConvergenceStudy:
    """Read back a study CSV (seed/true_lambda default to the JSON form)."""
    text = _read_text(path)
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not lines or lines[0] != "L,mean_abs_error,std_error,reps":
        raise ValueError(f"{path}: not a study CSV")
    rows = []
    for line in lines[1:]:
        L, mae, se, reps = line.split(",")
        rows.append(StudyRow(L=int(L), mean_abs_error=float(mae),
                             std_error=float(se), repetitions=int(reps)))
    return ConvergenceStudy(rows=tuple(rows), seed=0, true_lambda=math.nan)


def write_study_json(study: ConvergenceStudy, path):
    """Full study document: parameters, seed and rows."""
    doc = {
        "seed": study.seed,
        "true_lambda": study.true_lambda,
        "rows": [
            {
                "L": r.L,
                "mean_abs_error": r.mean_abs_error,
                "std_error": None if math.isnan(r.std_error) else r.std_error,
                "reps": r.repetitions,
            }
            for r in study.rows
        ],
    }
    _write_text(path, json.dumps(doc, indent=2) + "\n")


def write_link_table(table: LinkTable, path):
    """Link-table CSV with a trailing comment row naming the range bound."""
    lines = ["lambda,f_value"]
    for lam, fv in zip(table.lambdas, table.f_values):
        lines.append(f"{_fmt(lam)},{_fmt(fv)}")
    lines.append(f"# upper_bound,(pi^2-4)/4 = {_fmt(F_UPPER_BOUND)}")
    _write_text(path, "\n".join(lines) + "\n")


def read_link_table(path) -> LinkTable:
    text = _read_text(path)
    lams, fvs = [], []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != "lambda,f_value":
                raise ValueError(f"{path}: line {lineno}: expected header 'lambda,f_value'")
            saw_header = True
            continue
        a, b = line.split(",")
        lams.append(float(a))
        fvs.append(float(b))
    if not lams:
        raise ValueError(f"{path}: no data rows found")
    return LinkTable(lambdas=np.array(lams), f_values=np.array(fvs))


def _write_text(path, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
