"""Nonlinear least-squares estimation of the scaling-law constants.

The seven constants (E, A, alpha, B, beta, c1, c2) are fitted to observed
accuracies by a damped least-squares iteration with a forward-difference
Jacobian. Damping follows the standard schedule (lambda starts at 1e-3,
grows 10x on a rejected step, shrinks 10x on an accepted one) applied to
a column-scaled normal matrix; the scale for each parameter is the running
maximum of its Jacobian column norm, which keeps badly scaled directions
from blowing up early in the search.

Goodness of fit is reported as R-squared and the Pearson correlation of
predictions against observations. Parameter uncertainty comes from
refitting on seeded bootstrap resamples.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import FittingError
from .scaling_law import FORMS, ScalingConstants

N_PARAMS = 7
DEFAULT_MAX_EVALS = 2000
DEFAULT_MAX_ITERS = 200
DEFAULT_FTOL = 1e-10
DEFAULT_LAMBDA0 = 1e-3
FD_REL_STEP = 1e-6
LAMBDA_MAX = 1e30
GRAD_TOL = 1e-12

EXPERIMENTS_CSV_HEADER = [
    "model_size_m",
    "data_label",
    "fraction_pct",
    "n_tokens",
    "train_loss",
    "eval_loss",
    "accuracy_pct",
    "diversity",
    "syntheticity",
]


@dataclass(frozen=True)
class ExperimentPoint:
    """One observed training run joined with its corpus quality scores."""

    n_millions: float
    d_tokens: float
    dr: float
    s: float
    accuracy: float
    train_loss: float | None = None
    eval_loss: float | None = None
    label: str = ""
    fraction_pct: int = 100

    def __post_init__(self):
        for name in ("n_millions", "d_tokens", "dr", "s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise FittingError(f"{name} must be finite and > 0, got {value}")
        if not (0.0 <= self.accuracy <= 1.0):
            raise FittingError(f"accuracy must be in [0, 1], got {self.accuracy}")


@dataclass
class FitReport:
    """Fit outcome: constants, diagnostics, and per-point residuals."""

    constants: ScalingConstants
    se: dict[str, float] | None
    r2: float
    pearson: float
    sse: float
    n_points: int
    n_evals: int
    n_iters: int
    converged: bool
    residuals: list[float]


def _point_arrays(points: Sequence[ExperimentPoint]):
    n = np.array([p.n_millions for p in points], dtype=float)
    d = np.array([p.d_tokens for p in points], dtype=float)
    dr = np.array([p.dr for p in points], dtype=float)
    s = np.array([p.s for p in points], dtype=float)
    y = np.array([p.accuracy for p in points], dtype=float)
    return n, d, dr, s, y


def _dq_arrays(d, dr, s, c1, c2, form):
    if form == "F1":
        return d * np.exp(c1 * dr + c2 * s)
    if form == "F2":
        return d * dr**c1 * np.exp(c2 * s)
    if form == "F3":
        return d * np.exp(c1 * dr) * s**c2
    return d * dr**c1 * s**c2


def model_predictions(
    theta: np.ndarray, n, d, dr, s, form: str, clamp: bool = False
) -> np.ndarray:
    """Vectorized model over experiment arrays; may return non-finite
    values for wild parameters (callers reject those trial steps)."""
    e, a, alpha, b, beta, c1, c2 = theta
    with np.errstate(all="ignore"):
        dq = _dq_arrays(d, dr, s, c1, c2, form)
        pred = e + a / n**alpha + b / dq**beta
    if clamp:
        pred = np.clip(pred, 0.0, 1.0)
    return pred


def _theta_of(consts: ScalingConstants) -> np.ndarray:
    return np.array(
        [consts.e, consts.a, consts.alpha, consts.b, consts.beta, consts.c1, consts.c2]
    )


def _consts_of(theta: np.ndarray, form: str) -> ScalingConstants:
    e, a, alpha, b, beta, c1, c2 = (float(v) for v in theta)
    return ScalingConstants(e=e, a=a, alpha=alpha, b=b, beta=beta, c1=c1, c2=c2, form=form)


def _levenberg_marquardt(
    residual: Callable[[np.ndarray], np.ndarray],
    theta0: np.ndarray,
    max_evals: int,
    max_iters: int,
    ftol: float,
    lambda0: float,
) -> tuple[np.ndarray, float, int, int, bool]:
    """Minimize ||residual(theta)||^2; returns (theta, sse, evals, iters, converged)."""
    n_evals = 0

    def call(th):
        nonlocal n_evals
        n_evals += 1
        return residual(th)

    theta = np.asarray(theta0, dtype=float).copy()
    r = call(theta)
    sse = float(r @ r)
    if not math.isfinite(sse):
        raise FittingError("model is not finite at the initial guess")
    lam = lambda0
    col_scale = np.zeros(theta.size)
    n_iters = 0
    converged = False
    while n_iters < max_iters and n_evals + theta.size < max_evals:
        n_iters += 1
        jac = np.empty((r.size, theta.size))
        for j in range(theta.size):
            h = FD_REL_STEP * max(abs(theta[j]), 1.0)
            probe = theta.copy()
            probe[j] += h
            jac[:, j] = (call(probe) - r) / h
        if not np.all(np.isfinite(jac)):
            jac = np.nan_to_num(jac, nan=0.0, posinf=0.0, neginf=0.0)
        col_scale = np.maximum(col_scale, np.linalg.norm(jac, axis=0))
        scale = np.where(col_scale > 0, col_scale, 1.0)
        gradient = jac.T @ r
        normal = jac.T @ jac
        if float(np.max(np.abs(gradient))) < GRAD_TOL:
            converged = True
            break
        accepted = False
        while n_evals < max_evals and lam <= LAMBDA_MAX:
            try:
                step = np.linalg.solve(normal + lam * np.diag(scale**2), -gradient)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            r_new = call(theta + step)
            sse_new = float(r_new @ r_new)
            if math.isfinite(sse_new) and sse_new < sse:
                improvement = (sse - sse_new) / sse
                theta = theta + step
                r = r_new
                sse = sse_new
                lam = max(lam / 10, 1e-15)
                accepted = True
                if improvement < ftol or sse == 0.0:
                    converged = True
                break
            lam *= 10
        if not accepted:
            converged = bool(float(np.max(np.abs(gradient))) < math.sqrt(GRAD_TOL))
            break
        if converged:
            break
    return theta, sse, n_evals, n_iters, converged


def fit_constants(
    points: Sequence[ExperimentPoint],
    init: ScalingConstants,
    form: str | None = None,
    max_evals: int = DEFAULT_MAX_EVALS,
    max_iters: int = DEFAULT_MAX_ITERS,
    clamp_during_fit: bool = False,
    ftol: float = DEFAULT_FTOL,
    n_restarts: int = 0,
    restart_seed: int = 0,
) -> FitReport:
    """Fit the seven constants to observed accuracies.

    The returned SSE is never worse than at the initial guess, and the
    whole procedure is deterministic for identical inputs. Residuals use
    the unclamped model unless ``clamp_during_fit`` is set (the clamp
    zeroes gradients wherever predictions saturate).

    ``n_restarts`` extra runs start from seeded perturbations of the
    initial guess (each with its own evaluation budget); the best SSE
    wins. Off by default.
    """
    if form is None:
        form = init.form
    if form not in FORMS:
        raise FittingError(f"unknown functional form {form!r}")
    if len(points) < N_PARAMS + 1:
        raise FittingError(
            f"need at least {N_PARAMS + 1} points to fit {N_PARAMS} parameters, "
            f"got {len(points)}"
        )
    n, d, dr, s, y = _point_arrays(points)

    def residual(theta):
        return model_predictions(theta, n, d, dr, s, form, clamp=clamp_during_fit) - y

    theta0 = _theta_of(init)
    theta, sse, n_evals, n_iters, converged = _levenberg_marquardt(
        residual, theta0, max_evals, max_iters, ftol, DEFAULT_LAMBDA0
    )
    for i in range(n_restarts):
        rng = np.random.default_rng([restart_seed, i])
        perturbed = theta0 * rng.uniform(0.5, 1.5, size=theta0.size) + rng.normal(
            0.0, 0.1, size=theta0.size
        )
        try:
            theta_r, sse_r, evals_r, iters_r, conv_r = _levenberg_marquardt(
                residual, perturbed, max_evals, max_iters, ftol, DEFAULT_LAMBDA0
            )
        except FittingError:
            continue
        n_evals += evals_r
        n_iters += iters_r
        if sse_r < sse:
            theta, sse, converged = theta_r, sse_r, conv_r
    constants = _consts_of(theta, form)
    pred = model_predictions(theta, n, d, dr, s, form, clamp=clamp_during_fit)
    residuals = (pred - y).tolist()
    return FitReport(
        constants=constants,
        se=None,
        r2=r_squared(pred.tolist(), y.tolist()),
        pearson=pearson(pred.tolist(), y.tolist()),
        sse=sse,
        n_points=len(points),
        n_evals=n_evals,
        n_iters=n_iters,
        converged=converged,
        residuals=residuals,
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation of two equal-length sequences."""
    if len(x) != len(y):
        raise FittingError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise FittingError("pearson needs at least 2 points")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise FittingError("undefined correlation: zero variance")
    return float((xc @ yc) / math.sqrt(sx * sy))


def r_squared(predicted: Sequence[float], observed: Sequence[float]) -> float:
    """Coefficient of determination, 1 - SSE / SStot."""
    if len(predicted) != len(observed):
        raise FittingError(f"length mismatch: {len(predicted)} vs {len(observed)}")
    if len(observed) < 2:
        raise FittingError("r_squared needs at least 2 points")
    pred = np.asarray(predicted, dtype=float)
    obs = np.asarray(observed, dtype=float)
    sstot = float(np.sum((obs - obs.mean()) ** 2))
    if sstot == 0.0:
        raise FittingError("undefined r_squared: zero variance in observed")
    sse = float(np.sum((obs - pred) ** 2))
    return 1.0 - sse / sstot


PARAM_NAMES = ("E", "A", "alpha", "B", "beta", "c1", "c2")


def bootstrap_se(
    points: Sequence[ExperimentPoint],
    base: FitReport,
    n_resamples: int,
    seed: int,
    max_evals: int = DEFAULT_MAX_EVALS,
    max_iters: int = DEFAULT_MAX_ITERS,
    clamp_during_fit: bool = False,
) -> dict[str, float]:
    """Per-parameter standard errors from seeded with-replacement resamples.

    Each resample's index stream derives from (seed, resample index), so
    results do not depend on evaluation order. Refits start from the base
    fit's constants.
    """
    if n_resamples < 2:
        raise FittingError(f"n_resamples must be >= 2, got {n_resamples}")
    n = len(points)
    fitted = []
    failures = 0
    for i in range(n_resamples):
        rng = np.random.default_rng([seed, i])
        idx = rng.integers(0, n, size=n)
        resample = [points[j] for j in idx]
        try:
            report = fit_constants(
                resample,
                base.constants,
                form=base.constants.form,
                max_evals=max_evals,
                max_iters=max_iters,
                clamp_during_fit=clamp_during_fit,
            )
        except FittingError:
            failures += 1
            continue
        fitted.append(_theta_of(report.constants))
    if failures > n_resamples // 2:
        raise FittingError(
            f"bootstrap failed: {failures} of {n_resamples} resample fits errored"
        )
    if len(fitted) < 2:
        raise FittingError("bootstrap needs at least 2 successful resample fits")
    spread = np.std(np.vstack(fitted), axis=0, ddof=1)
    return {name: float(v) for name, v in zip(PARAM_NAMES, spread)}


def join_fixture_tables(
    results: Sequence[tuple],
    quality: Sequence[tuple],
) -> list[ExperimentPoint]:
    """Join result rows to quality rows on (label, percent).

    Result rows are (size_m, label, pct, n_tokens, train_loss, eval_loss,
    accuracy_pct); quality rows are (label, pct, dr, s). Accuracy percent
    is converted to a fraction.
    """
    lookup: dict[tuple[str, int], tuple[float, float]] = {}
    for label, pct, dr, s in quality:
        key = (label, int(pct))
        if key in lookup:
            raise FittingError(f"duplicate quality row for {key}")
        lookup[key] = (float(dr), float(s))
    missing = sorted(
        {(row[1], int(row[2])) for row in results if (row[1], int(row[2])) not in lookup}
    )
    if missing:
        raise FittingError(f"result rows with no quality match: {missing}")
    points = []
    for size_m, label, pct, n_tokens, train_loss, eval_loss, acc_pct in results:
        dr, s = lookup[(label, int(pct))]
        points.append(
            ExperimentPoint(
                n_millions=float(size_m),
                d_tokens=float(n_tokens),
                dr=dr,
                s=s,
                accuracy=float(acc_pct) / 100.0,
                train_loss=float(train_loss) if train_loss is not None else None,
                eval_loss=float(eval_loss) if eval_loss is not None else None,
                label=label,
                fraction_pct=int(pct),
            )
        )
    return points


def load_experiments_csv(
    path: str, quality: Sequence[tuple] | None = None
) -> list[ExperimentPoint]:
    """Read experiment points from CSV.

    The diversity/syntheticity columns may be empty when a separate
    quality table is supplied; in that case rows are joined on
    (data_label, fraction_pct).
    """
    lookup = None
    if quality is not None:
        lookup = {}
        for label, pct, dr, s in quality:
            key = (label, int(pct))
            if key in lookup:
                raise FittingError(f"duplicate quality row for {key}")
            lookup[key] = (float(dr), float(s))
    points = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        got = reader.fieldnames or []
        required = set(EXPERIMENTS_CSV_HEADER) - {"diversity", "syntheticity"}
        if not required.issubset(got):
            raise FittingError(
                f"experiments CSV missing columns: {sorted(required - set(got))}"
            )
        for row_no, row in enumerate(reader, start=2):
            try:
                label = row["data_label"]
                pct = int(row["fraction_pct"])
                div = row.get("diversity") or ""
                syn = row.get("syntheticity") or ""
                if div and syn:
                    dr, s = float(div), float(syn)
                elif lookup is not None:
                    if (label, pct) not in lookup:
                        raise FittingError(f"no quality row for {(label, pct)}")
                    dr, s = lookup[(label, pct)]
                else:
                    raise FittingError("diversity/syntheticity columns empty "
                                       "and no quality table supplied")
                points.append(
                    ExperimentPoint(
                        n_millions=float(row["model_size_m"]),
                        d_tokens=float(row["n_tokens"]),
                        dr=dr,
                        s=s,
                        accuracy=float(row["accuracy_pct"]) / 100.0,
                        train_loss=float(row["train_loss"]) if row.get("train_loss") else None,
                        eval_loss=float(row["eval_loss"]) if row.get("eval_loss") else None,
                        label=label,
                        fraction_pct=pct,
                    )
                )
            except FittingError as exc:
                raise FittingError(f"row {row_no}: {exc}") from exc
            except (KeyError, ValueError) as exc:
                raise FittingError(f"row {row_no}: {exc}") from exc
    return points


def fit_report_to_dict(
    report: FitReport, points: Sequence[ExperimentPoint] | None = None, seed: int | None = None
) -> dict:
    """JSON-ready view of a fit report, with per-point records when the
    fitted points are supplied (the plotting command consumes those)."""
    out = {
        "constants": report.constants.to_dict(),
        "se": report.se,
        "r2": report.r2,
        "pearson": report.pearson,
        "sse": report.sse,
        "n_points": report.n_points,
        "n_evals": report.n_evals,
        "n_iters": report.n_iters,
        "converged": report.converged,
        "residuals": report.residuals,
    }
    if seed is not None:
        out["seed"] = seed
    if points is not None:
        records = []
        for point, residual in zip(points, report.residuals):
            records.append(
                {
                    "n_millions": point.n_millions,
                    "d_tokens": point.d_tokens,
                    "dr": point.dr,
                    "s": point.s,
                    "label": point.label,
                    "fraction_pct": point.fraction_pct,
                    "observed": point.accuracy,
                    "predicted": point.accuracy + residual,
                    "residual": residual,
                }
            )
        out["points"] = records
    return out


def fit_report_from_dict(data: dict) -> FitReport:
    return FitReport(
        constants=ScalingConstants.from_dict(data["constants"]),
        se=data.get("se"),
        r2=data["r2"],
        pearson=data["pearson"],
        sse=data["sse"],
        n_points=data["n_points"],
        n_evals=data["n_evals"],
        n_iters=data.get("n_iters", 0),
        converged=data["converged"],
        residuals=list(data["residuals"]),
    )
