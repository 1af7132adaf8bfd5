"""Correlation, CHSH, visibility and curve-shape estimators."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .engine import CoincidenceTally, CorrelationCurve, RunConfig, map_settings, run_setting
from .errors import DegenerateFitError, EmptyTallyError
from .oracle import STANDARD_ANGLES, chsh_combination

TERMS = ("ab", "ab'", "a'b", "a'b'")


def correlation_E(tally: CoincidenceTally) -> float:
    """Post-selected correlation: only pairs with two definite outcomes count."""
    c = tally.counts
    n = int(c[0, 0] + c[0, 1] + c[1, 0] + c[1, 1])
    if n == 0:
        raise EmptyTallyError("tally has no double detections")
    return float(c[0, 0] + c[1, 1] - c[0, 1] - c[1, 0]) / n


@dataclass
class ChshResult:
    angle_set: tuple[float, float, float, float]
    e_values: tuple[float, float, float, float]
    s_value: float
    violation: float
    runs: int
    s_mean: float
    s_stddev: float
    s_runs: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        a, ap, b, bp = self.angle_set
        return {
            "angles": {"a": a, "a_prime": ap, "b": b, "b_prime": bp},
            "e_values": dict(zip(TERMS, self.e_values)),
            "s_value": self.s_value,
            "violation": self.violation,
            "runs": self.runs,
            "s_mean": self.s_mean,
            "s_stddev": self.s_stddev,
            "s_runs": list(self.s_runs),
        }


def chsh(config: RunConfig, angles=STANDARD_ANGLES, runs: int = 10,
         pairs_per_run: int = 10000, workers: int | None = None) -> ChshResult:
    """Replicated CHSH experiment with angles ``(a, a', b, b')``.

    Run ``r`` uses setting indices ``4r .. 4r+3``. ``s_value`` and
    ``e_values`` come from the tallies pooled over runs; ``s_stddev`` is the
    sample standard deviation of the per-run values (0 for a single run).
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    a, ap, b, bp = (float(x) for x in angles)
    pairs = ((a, b), (a, bp), (ap, b), (ap, bp))
    jobs = [
        (config, x, 4 * r + k, y, pairs_per_run)
        for r in range(runs)
        for k, (x, y) in enumerate(pairs)
    ]
    tallies = map_settings(run_setting, jobs, workers)
    per_run = [tallies[4 * r: 4 * r + 4] for r in range(runs)]
    s_runs = [chsh_combination(*(correlation_E(t) for t in ts)) for ts in per_run]
    pooled = [sum((ts[k] for ts in per_run), CoincidenceTally()) for k in range(4)]
    e_values = tuple(correlation_E(t) for t in pooled)
    s = chsh_combination(*e_values)
    return ChshResult(
        angle_set=(a, ap, b, bp),
        e_values=e_values,
        s_value=s,
        violation=s - 2.0,
        runs=runs,
        s_mean=statistics.fmean(s_runs),
        s_stddev=statistics.stdev(s_runs) if runs > 1 else 0.0,
        s_runs=s_runs,
    )


def _counts(curve) -> np.ndarray:
    if isinstance(curve, CorrelationCurve):
        return curve.n_pp.astype(float)
    return np.asarray(curve, dtype=float)


def smooth(values, window: int = 5) -> np.ndarray:
    """Moving average over ``window`` settings, no padding at the ends."""
    values = np.asarray(values, dtype=float)
    window = min(window, values.size)
    return np.convolve(values, np.ones(window) / window, mode="valid")


def visibility(curve, window: int = 5) -> float:
    """(max - min) / (max + min) of the smoothed N++ curve."""
    y = smooth(_counts(curve), window)
    if y.size == 0:
        raise ValueError("empty curve")
    hi, lo = y.max(), y.min()
    if hi <= 0:
        raise EmptyTallyError("every N++ count is zero")
    return float((hi - lo) / (hi + lo))


def triangle_wave(x):
    """Period-pi triangle wave: +1 at 0, -1 at pi/2."""
    frac = np.mod(np.asarray(x) / math.pi, 1.0)
    return 4.0 * np.abs(frac - 0.5) - 1.0


def _linear_rmse(design: np.ndarray, y: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(np.sqrt(np.mean((design @ coef - y) ** 2)))


def normalized_curve(curve: CorrelationCurve) -> tuple[np.ndarray, np.ndarray]:
    """Alphas and N++ / recorded, scaled so the peak is 1."""
    rate = curve.n_pp / np.maximum(curve.recorded, 1)
    if curve.n_pp.size < 3:
        raise ValueError("shape fit needs at least 3 settings")
    if np.ptp(rate) == 0:
        raise DegenerateFitError("constant curve has no shape to fit")
    return curve.alphas, rate / rate.max()


def sin2_fit_rmse(x, y) -> float:
    # A sin^2(x - x0) + C is linear in (1, cos 2x, sin 2x)
    design = np.column_stack([np.ones_like(x), np.cos(2 * x), np.sin(2 * x)])
    return _linear_rmse(design, y)


def triangle_fit_rmse(x, y, grid: int = 360) -> float:
    ones = np.ones_like(x)

    def rmse(shift):
        return _linear_rmse(np.column_stack([ones, triangle_wave(x - shift)]), y)

    shifts = np.linspace(0.0, math.pi, grid, endpoint=False)
    k = int(np.argmin([rmse(s) for s in shifts]))
    step = math.pi / grid
    res = minimize_scalar(rmse, bounds=(shifts[k] - step, shifts[k] + step),
                          method="bounded", options={"xatol": 1e-10})
    return float(min(res.fun, rmse(shifts[k])))


def shape_fit(curve: CorrelationCurve) -> dict:
    """RMS residuals of sin^2 and triangle-wave fits to the normalized N++ curve."""
    x, y = normalized_curve(curve)
    return {"sin2_rmse": sin2_fit_rmse(x, y), "triangle_rmse": triangle_fit_rmse(x, y)}
