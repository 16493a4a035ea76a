"""Representation measurement, gamma fitting, and predicted limits.

The package scores how a slate splits across types against the family

    r_t = p_t**gamma / sum_i p_i**gamma

indexed by a single exponent gamma: gamma = 0 is equal representation,
gamma = 1 matches type likelihoods exactly (calibrated), and gamma = inf
is a one-hot slate for the most likely type.  Smaller gamma means more
diversity.

``predict_limit`` returns the large-n limit of the optimal slate's
representation for each supported model family, as a closed form; the
``convergence_probe`` helper measures how fast solved slates approach a
predicted limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .allocate import SolveReport, solve_greedy
from .errors import HypothesisViolated, UnidentifiableError
from .values import ObjectiveSpec

__all__ = [
    "representation",
    "gamma_vector",
    "GammaFit",
    "fit_gamma",
    "PredictedLimit",
    "predict_limit",
    "ProbeRow",
    "convergence_probe",
    "uniform_topk_slack",
    "PREDICTION_SETTINGS",
]

_PROB_TOL = 1e-12
_GAMMA_MAX = 64.0
_GRID_POINTS = 33
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def representation(counts: Sequence[int]) -> np.ndarray:
    """Share of the slate belonging to each type, counts / n."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n <= 0 or np.any(counts < 0):
        raise ValueError("counts must be non-negative with positive total")
    return counts / n


def _check_likelihoods(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("likelihoods must be a non-empty vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > _PROB_TOL:
        raise ValueError(f"likelihoods must be non-negative and sum to 1 within {_PROB_TOL}")
    return p


def gamma_vector(p, gamma: float) -> np.ndarray:
    """The representation vector p_t**gamma / sum p_i**gamma.

    gamma = 0 returns the exactly uniform vector; gamma = inf returns a
    one-hot at the largest likelihood (lowest index on ties).
    """
    p = _check_likelihoods(p)
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if math.isinf(gamma):
        out = np.zeros_like(p)
        out[int(np.argmax(p))] = 1.0
        return out
    if gamma == 0.0:
        return np.full_like(p, 1.0 / p.size)
    w = (p / p.max()) ** gamma
    return w / w.sum()


@dataclass(frozen=True)
class GammaFit:
    """Best-fitting exponent for an observed representation."""

    gamma: float
    residual: float
    method: str = "golden_section"


def _golden_min(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def fit_gamma(r, p, gamma_max: float = _GAMMA_MAX) -> GammaFit:
    """Exponent minimizing the RMS gap between r and the gamma vector of p.

    Golden-section search on [0, gamma_max] seeded by a coarse 33-point
    grid scan, with the infinite (one-hot) candidate compared explicitly.
    Beyond gamma of about 64 the vector is numerically one-hot for any
    non-uniform p at double precision, hence the cap.
    """
    r = np.asarray(r, dtype=np.float64)
    p = _check_likelihoods(p)
    if p.size < 2:
        raise UnidentifiableError("gamma is unidentifiable with a single type")
    if np.ptp(p) <= _PROB_TOL:
        raise UnidentifiableError("gamma is unidentifiable when likelihoods are all equal")
    if r.shape != p.shape:
        raise ValueError("representation and likelihoods must have the same length")

    def residual(g: float) -> float:
        return float(np.sqrt(np.mean((r - gamma_vector(p, g)) ** 2)))

    grid = np.linspace(0.0, gamma_max, _GRID_POINTS)
    grid_res = [residual(g) for g in grid]
    j = int(np.argmin(grid_res))
    lo = grid[max(0, j - 1)]
    hi = grid[min(_GRID_POINTS - 1, j + 1)]
    gamma, res = _golden_min(residual, lo, hi)
    if grid_res[j] < res:
        gamma, res = float(grid[j]), grid_res[j]
    res_inf = residual(math.inf)
    if res_inf < res:
        return GammaFit(math.inf, res_inf)
    return GammaFit(float(gamma), float(res))


@dataclass(frozen=True)
class PredictedLimit:
    """Large-n representation limit for one model setting.

    ``gamma_inf`` is the exponent when the limit lies in the gamma
    family (math.inf for one-hot limits) and None otherwise.
    """

    setting: str
    r_inf: tuple[float, ...]
    gamma_inf: float | None

    @property
    def m(self) -> int:
        return len(self.r_inf)


def _gamma_limit(setting: str, p: np.ndarray, gamma: float) -> PredictedLimit:
    return PredictedLimit(setting, tuple(float(x) for x in gamma_vector(p, gamma)), gamma)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise HypothesisViolated(message)


#: setting tag -> short description of the model it covers
PREDICTION_SETTINGS = {
    "finite_discrete": "shared finite-support values, fixed cap",
    "bounded_tail": "shared bounded density ~ (M - x)**(beta - 1) near its top, fixed cap",
    "exponential_tail": "shared exponential values, fixed cap",
    "calibration": "alias of exponential_tail (the calibrated limit)",
    "heavy_tail": "shared Pareto(alpha) values, fixed cap",
    "use_all_iid": "shared values, cap k = n (every item consumed)",
    "iid_bernoulli_top1": "shared Bernoulli(q) values, cap 1",
    "decaying_top1": "rank-decaying Bernoulli q_i = c (i+d)**-alpha, cap 1",
    "decaying_use_all": "rank-decaying Bernoulli, cap k = n",
    "varying_success_top1": "per-type Bernoulli(q_t), cap 1",
    "varying_success_use_all": "per-type Bernoulli(q_t), cap k = n",
    "uniform_topk": "shared uniform values, cap below the square-root share of n",
    "dual_preference_top1": "two types, user may prefer both, cap 1",
}


def predict_limit(setting: str, p, **params) -> PredictedLimit:
    """Closed-form representation limit for one of the supported settings.

    Raises :class:`HypothesisViolated` when the parameters fall outside
    the preconditions of the requested setting.
    """
    p = _check_likelihoods(p)
    if setting == "finite_discrete":
        return _gamma_limit(setting, p, 0.0)
    if setting == "bounded_tail":
        beta = float(params["beta"])
        _require(beta > 0, "bounded_tail requires beta > 0")
        return _gamma_limit(setting, p, beta / (beta + 1.0))
    if setting in ("exponential_tail", "calibration"):
        return _gamma_limit(setting, p, 1.0)
    if setting == "heavy_tail":
        alpha = float(params["alpha"])
        _require(alpha > 1, "heavy_tail requires alpha > 1 (finite mean)")
        return _gamma_limit(setting, p, alpha / (alpha - 1.0))
    if setting == "use_all_iid":
        return _gamma_limit(setting, p, math.inf)
    if setting == "iid_bernoulli_top1":
        q = float(params["q"])
        _require(0 < q <= 1, "iid_bernoulli_top1 requires q in (0, 1]")
        return _gamma_limit(setting, p, 0.0)
    if setting == "decaying_top1":
        alpha = float(params["alpha"])
        c = float(params["c"])
        d = float(params.get("d", 0.0))
        _require(c > 0, "decaying_top1 requires c > 0")
        _require(alpha >= 0 and d >= 0, "decaying_top1 requires alpha, d >= 0")
        if alpha < 1:
            gamma = 0.0
        elif alpha == 1:
            gamma = 1.0 / (1.0 + c)
        else:
            gamma = 1.0 / alpha
        return _gamma_limit(setting, p, gamma)
    if setting == "decaying_use_all":
        alpha = float(params["alpha"])
        c = float(params["c"])
        _require(c > 0, "decaying_use_all requires c > 0")
        _require(alpha >= 0, "decaying_use_all requires alpha >= 0")
        gamma = math.inf if alpha == 0 else 1.0 / alpha
        return _gamma_limit(setting, p, gamma)
    if setting == "varying_success_top1":
        q = np.asarray(params["q"], dtype=np.float64)
        _require(q.shape == p.shape, "need one success probability per type")
        _require(bool(np.all((q > 0) & (q < 1))), "varying_success_top1 requires q_t in (0, 1)")
        w = 1.0 / np.log(1.0 / (1.0 - q))
        w = w / w.sum()
        return PredictedLimit(setting, tuple(float(x) for x in w), None)
    if setting == "varying_success_use_all":
        q = np.asarray(params["q"], dtype=np.float64)
        _require(q.shape == p.shape, "need one success probability per type")
        _require(bool(np.all((q > 0) & (q <= 1))), "varying_success_use_all requires q_t in (0, 1]")
        out = np.zeros_like(p)
        out[int(np.argmax(p * q))] = 1.0
        return PredictedLimit(setting, tuple(float(x) for x in out), math.inf)
    if setting == "uniform_topk":
        return _gamma_limit(setting, p, 0.5)
    if setting == "dual_preference_top1":
        return PredictedLimit(setting, (0.5, 0.5), 0.0)
    raise ValueError(f"unknown prediction setting {setting!r}")


def uniform_topk_slack(m: int, n: int) -> float:
    """Finite-n representation slack (m + 1) / n for the uniform square-root limit."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return (m + 1.0) / n


@dataclass(frozen=True)
class ProbeRow:
    n: int
    r: tuple[float, ...]
    gap: float
    gamma_fit: float


def convergence_probe(
    spec_factory: Callable[[int], ObjectiveSpec],
    prediction: PredictedLimit,
    ns: Iterable[int],
    solver: Callable[[ObjectiveSpec], SolveReport] = solve_greedy,
) -> list[ProbeRow]:
    """Solve a family of slate sizes and report gaps to a predicted limit.

    The gap is the largest per-type deviation of the solved
    representation from ``prediction.r_inf``.  ``gamma_fit`` is NaN when
    the exponent is unidentifiable (equal likelihoods).
    """
    target = np.asarray(prediction.r_inf, dtype=np.float64)
    rows: list[ProbeRow] = []
    for n in ns:
        spec = spec_factory(int(n))
        report = solver(spec)
        r = representation(report.allocation.counts)
        gap = float(np.max(np.abs(r - target)))
        try:
            gfit = fit_gamma(r, spec.profile.p).gamma
        except UnidentifiableError:
            gfit = math.nan
        rows.append(ProbeRow(int(n), tuple(float(x) for x in r), gap, gfit))
    return rows
