"""Parameter sweeps of phase-space observables and detectors for critical signatures.

A sweep evaluates one observable on a uniform grid of the driving parameter
(lambda for the XY chain, Delta for the XXZ chain).  Refinement is dyadic: level
``k`` halves the spacing ``k`` times inside a window of +-10% of the full range
around the candidate found at level ``k - 1``.  Grid points are generated from
integer indices so that a point shared by two levels is bitwise identical.

Three detectors read a refinement series:

* divergence: max |d1| keeps growing as the spacing halves;
* discontinuity: one adjacent jump dwarfs the median variation and does not
  shrink under refinement (on the value or on d1);
* cusp: a d1 discontinuity where the value itself is continuous.
"""

from __future__ import annotations

import enum
import functools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .chains import ModelSpec
from .correlators import (
    CorrelatorSet,
    build_rho_pair,
    xxz_correlators,
    xy_thermo_correlators,
    xy_thermo_triple,
)
from .phasespace import (
    AngleConfig,
    DWFGrid,
    PhasePoint,
    dwf,
    dwf_pair_closed,
    dwf_single_closed,
    extremize_dwf,
    extremize_gwf,
    gwf,
    gwf_pair_closed,
    gwf_single_closed,
    gwf_triple_closed,
    matrix_sqrt,
)

MIN_SWEEP_POINTS = 64
MAX_REFINEMENT = 4
REFINE_WINDOW = 0.1

# detector thresholds, calibrated on the synthetic plant suite
DIVERGENCE_MIN_GROWTH = 0.03
DIVERGENCE_MIN_RATIO = 0.65
JUMP_FACTOR = 10.0
JUMP_PERSIST = 0.75
MAX_DRIFT = 2.0
CUSP_GUARD = 3

FACTORIZATION_SPREAD = 1e-6

OBSERVABLE_KINDS = (
    "dwf", "dwf-single", "dwf-extremes", "gwf", "gwf-extremes", "negativity", "concurrence",
)
_TWO_SITE = {"dwf", "dwf-extremes", "gwf-extremes", "negativity", "concurrence"}

# the two uniform angle configurations used for the XY chain
Z_DOWN = (math.pi / 2, 2 * math.pi)
Z_UP = (0.0, 0.0)


class EvaluationError(RuntimeError):
    """An observable could not be evaluated at a grid point."""


# ---------------------------------------------------------------- sweep specs

@dataclass(frozen=True)
class Observable:
    """Which phase-space quantity a sweep records.

    ``point`` is a phase-space point such as ``"00,01"`` (``"0,1"`` for one site);
    ``thetas``/``phis`` give one angle per site for the GWF; ``sqrt`` evaluates
    on the principal square root of the two-site state; ``m`` is the distance.
    """

    kind: str = "dwf"
    point: str | None = None
    thetas: tuple[float, ...] = ()
    phis: tuple[float, ...] = ()
    sqrt: bool = False
    m: int = 1

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise ValueError(f"unknown observable {self.kind!r}; choose from {OBSERVABLE_KINDS}")
        if self.m < 1:
            raise ValueError(f"distance m must be >= 1, got {self.m}")
        if self.kind in ("dwf", "dwf-single"):
            if self.point is None:
                raise ValueError(f"observable {self.kind!r} needs a phase-space point")
            want = 2 if self.kind == "dwf" else 1
            if PhasePoint.parse(self.point).n != want:
                raise ValueError(f"point {self.point!r} is not a {want}-site point")
        if self.kind == "gwf":
            if not 1 <= len(self.thetas) <= 3 or len(self.thetas) != len(self.phis):
                raise ValueError("gwf needs one (theta, phi) pair per site, 1 to 3 sites")
        if self.sqrt and self.n_sites != 2:
            raise ValueError("the sqrt flag requires a two-site observable")

    @property
    def n_sites(self) -> int:
        if self.kind == "gwf":
            return len(self.thetas)
        return 1 if self.kind == "dwf-single" else 2

    @property
    def columns(self) -> tuple[str, ...]:
        return {
            "dwf": ("W",),
            "dwf-single": ("W",),
            "dwf-extremes": ("W_M", "W_m"),
            "gwf": ("GWF",),
            "gwf-extremes": ("GWF_max", "GWF_min", "theta_max"),
            "negativity": ("negativity",),
            "concurrence": ("concurrence",),
        }[self.kind]


@dataclass(frozen=True)
class SweepSpec:
    model: str
    observable: Observable
    lo: float
    hi: float
    points: int = 256
    levels: int = 0
    gamma: float = 0.5
    n_sites: int = 16

    def __post_init__(self):
        if self.model not in ("xy", "xxz"):
            raise ValueError(f"model must be 'xy' or 'xxz', got {self.model!r}")
        if not self.lo < self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")
        if self.points < MIN_SWEEP_POINTS:
            raise ValueError(f"grid needs >= {MIN_SWEEP_POINTS} points, got {self.points}")
        if not 0 <= self.levels <= MAX_REFINEMENT:
            raise ValueError(f"refinement levels must be in [0, {MAX_REFINEMENT}]")
        obs = self.observable
        if self.model == "xy":
            ModelSpec.xy(1.0, self.gamma)
        else:
            if self.n_sites % 2 or self.n_sites < 4:
                raise ValueError("XXZ sweeps need an even ring of at least 4 sites")
            if 2 * obs.m >= self.n_sites:
                raise ValueError(f"distance {obs.m} too large for N={self.n_sites}")
            if obs.n_sites == 3:
                raise ValueError("three-site observables are available for the XY chain only")
        if obs.kind == "gwf-extremes" and self.model != "xxz":
            raise ValueError("gwf-extremes assumes the XX-symmetric XXZ correlators")

    @property
    def parameter(self) -> str:
        return "lambda" if self.model == "xy" else "delta"


@functools.lru_cache(maxsize=1 << 16)
def _xxz_pair(delta: float, m: int, n_sites: int) -> CorrelatorSet:
    return xxz_correlators(delta, m, n_sites)


def pair_correlators(spec: SweepSpec, x: float) -> CorrelatorSet:
    m = spec.observable.m
    if spec.model == "xy":
        return xy_thermo_correlators(x, spec.gamma, m)
    return _xxz_pair(x, m, spec.n_sites)


@dataclass(frozen=True)
class PointEvaluator:
    """Picklable map from a parameter value to the observable's columns."""

    spec: SweepSpec

    def __call__(self, x: float) -> tuple[float, ...]:
        spec, obs = self.spec, self.spec.observable
        x = float(x)
        if obs.kind == "dwf-single":
            c = pair_correlators(spec, x)
            return (dwf_single_closed(c.mz, PhasePoint.parse(obs.point).x[0]),)
        if obs.kind == "gwf" and obs.n_sites == 1:
            c = pair_correlators(spec, x)
            return (gwf_single_closed(c.mz, obs.thetas[0]),)
        if obs.kind == "gwf" and obs.n_sites == 3:
            t = xy_thermo_triple(x, spec.gamma, obs.m, obs.m)
            return (gwf_triple_closed(t, AngleConfig(obs.thetas, obs.phis)),)
        c = pair_correlators(spec, x)
        if obs.kind == "concurrence":
            return (concurrence_pair(c),)
        if obs.kind == "gwf-extremes":
            ext = extremize_gwf(c)
            return ext.max, ext.min, ext.argmax.thetas[0]
        if not obs.sqrt and obs.kind == "dwf":
            return (dwf_pair_closed(c, obs.point),)
        if not obs.sqrt and obs.kind == "gwf":
            return (gwf_pair_closed(c, AngleConfig(obs.thetas, obs.phis)),)
        op = build_rho_pair(c)
        op = matrix_sqrt(op) if obs.sqrt else op.entries
        if obs.kind == "gwf":
            return (gwf(op, AngleConfig(obs.thetas, obs.phis)),)
        grid = dwf(op, 2)
        if obs.kind == "dwf":
            return (grid.at(obs.point),)
        if obs.kind == "dwf-extremes":
            return extremize_dwf(grid)
        return (dwf_negativity(grid),)


# ---------------------------------------------------------------- sweeps

def _diff(y: np.ndarray, h: float, order: int) -> np.ndarray:
    if y.shape[0] < 5:
        raise ValueError(f"finite differences need >= 5 grid points, got {y.shape[0]}")
    if order == 1:
        return np.gradient(y, h, axis=0, edge_order=2)
    if order == 2:
        out = np.empty_like(y)
        out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / h ** 2
        out[0] = (y[0] - 2 * y[1] + y[2]) / h ** 2
        out[-1] = (y[-1] - 2 * y[-2] + y[-3]) / h ** 2
        return out
    raise ValueError(f"order must be 1 or 2, got {order}")


@dataclass
class SweepResult:
    """Values on a uniform grid with aligned derivative arrays.

    ``values``, ``d1`` and ``d2`` have shape (points, columns).  Derivatives are
    full length: three-point central stencils inside, one-sided at the ends.
    """

    grid: np.ndarray
    values: np.ndarray
    columns: tuple[str, ...] = ("value",)
    parameter: str = "x"
    level: int = 0
    window: tuple[float, float] | None = None
    d1: np.ndarray = field(init=False)
    d2: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.shape[0] or v.shape[1] != len(self.columns):
            raise ValueError(f"values of shape {v.shape} do not match grid/columns")
        if not np.all(np.isfinite(v)):
            bad = self.grid[~np.all(np.isfinite(v), axis=1)][0]
            raise EvaluationError(f"non-finite value at {self.parameter}={bad!r}")
        self.values = v
        if self.window is None:
            self.window = (float(self.grid[0]), float(self.grid[-1]))
        self.d1 = finite_diff(self, 1)
        self.d2 = finite_diff(self, 2)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def column(self, col: int | str = 0) -> int:
        return self.columns.index(col) if isinstance(col, str) else int(col)


def finite_diff(result: SweepResult, order: int) -> np.ndarray:
    """Central first or second differences of ``result.values``; endpoints one-sided."""
    g = result.grid
    if g.shape[0] < 5:
        raise ValueError(f"finite differences need >= 5 grid points, got {g.shape[0]}")
    h = g[1] - g[0]
    if not np.allclose(np.diff(g), h, rtol=1e-9, atol=0.0):
        raise ValueError("finite differences need a uniform grid")
    return _diff(result.values, h, order)


def _call_point(evaluate, x):
    try:
        return tuple(float(v) for v in evaluate(x)), None
    except Exception as exc:  # reported with the grid point below
        return None, f"{type(exc).__name__}: {exc}"


def default_workers() -> int:
    env = os.environ.get("PHASECRIT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def evaluate_grid(evaluate, grid: np.ndarray, *, workers: int = 1, parameter: str = "x") -> np.ndarray:
    """Evaluate at every grid point, in grid order, optionally in worker processes."""
    if workers > 1 and len(grid) > 1:
        chunk = max(1, len(grid) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_call_point, [evaluate] * len(grid), grid, chunksize=chunk))
    else:
        out = [_call_point(evaluate, x) for x in grid]
    rows = []
    for x, (row, err) in zip(grid, out):
        if err is not None:
            raise EvaluationError(f"evaluation failed at {parameter}={float(x)!r}: {err}")
        rows.append(row)
    return np.array(rows, dtype=float)


class Sweeper:
    """Samples a function on a base grid and on dyadically refined windows."""

    def __init__(self, evaluate, lo: float, hi: float, points: int, *, levels: int = 0,
                 columns=("value",), parameter: str = "x", workers: int = 1,
                 window: float = REFINE_WINDOW):
        if not lo < hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        if points < 5:
            raise ValueError("a sweep needs at least 5 points")
        self.evaluate = evaluate
        self.lo, self.hi, self.points = float(lo), float(hi), int(points)
        self.levels = int(levels)
        self.columns = tuple(columns)
        self.parameter = parameter
        self.workers = workers
        self.window = window
        self._cache: dict = {}

    @classmethod
    def from_spec(cls, spec: SweepSpec, *, workers: int = 1) -> "Sweeper":
        return cls(PointEvaluator(spec), spec.lo, spec.hi, spec.points, levels=spec.levels,
                   columns=spec.observable.columns, parameter=spec.parameter, workers=workers)

    @property
    def base_spacing(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    def _x(self, idx: np.ndarray, level: int) -> np.ndarray:
        # exact dyadic rescaling keeps shared points bitwise equal across levels
        return self.lo + (idx * (self.hi - self.lo)) / ((self.points - 1) * 2 ** level)

    def indices(self, level: int = 0, center: float | None = None) -> np.ndarray:
        n = (self.points - 1) * 2 ** level
        if level == 0 or center is None:
            return np.arange(n + 1)
        half = self.window * (self.hi - self.lo)
        a, b = max(self.lo, center - half), min(self.hi, center + half)
        h = (self.hi - self.lo) / n
        i0 = max(0, math.ceil((a - self.lo) / h - 1e-9))
        i1 = min(n, math.floor((b - self.lo) / h + 1e-9))
        return np.arange(i0, i1 + 1)

    def sample(self, level: int = 0, center: float | None = None) -> SweepResult:
        idx = self.indices(level, center)
        key = (level, int(idx[0]), int(idx[-1]))
        if key not in self._cache:
            grid = self._x(idx.astype(float), level)
            vals = evaluate_grid(self.evaluate, grid, workers=self.workers, parameter=self.parameter)
            self._cache[key] = SweepResult(grid, vals, self.columns, self.parameter, level,
                                           (float(grid[0]), float(grid[-1])))
        return self._cache[key]


def run_sweep(spec: SweepSpec, *, workers: int = 1) -> SweepResult:
    """Evaluate the observable of ``spec`` on its base grid."""
    return Sweeper.from_spec(spec, workers=workers).sample(0)


def sample_function(f, lo: float, hi: float, points: int, *, levels: int = 0) -> Sweeper:
    """Sweeper over a plain scalar function (used for synthetic test curves)."""
    return Sweeper(lambda x: (f(x),), lo, hi, points, levels=levels)


# ---------------------------------------------------------------- detectors

class DetectionKind(enum.Enum):
    DIVERGENCE = "Divergence"
    DISCONTINUITY = "Discontinuity"
    CUSP = "Cusp"
    FACTORIZATION_LINE = "FactorizationLine"
    NONE = "None"


@dataclass
class DetectionReport:
    kind: DetectionKind
    location: float
    metrics: dict = field(default_factory=dict)

    @property
    def detected(self) -> bool:
        return self.kind is not DetectionKind.NONE

    def line(self) -> str:
        bits = [self.kind.value, f"{self.location:.6f}"]
        for k, v in self.metrics.items():
            if isinstance(v, (float, int, np.floating)) and not isinstance(v, bool):
                bits.append(f"{k}={float(v):.6g}")
            elif isinstance(v, (bool, str)):
                bits.append(f"{k}={v}")
        return " ".join(bits)


def _series(source, locate, levels: int | None) -> list[SweepResult]:
    if isinstance(source, Sweeper):
        n = source.levels if levels is None else levels
        res = source.sample(0)
        out = [res]
        for k in range(1, n + 1):
            res = source.sample(k, center=locate(res))
            out.append(res)
        return out
    if isinstance(source, SweepResult):
        return [source]
    return list(source)


def _interior_argmax(a: np.ndarray) -> int:
    return 1 + int(np.argmax(np.abs(a[1:-1])))


def _growth_profile(maxima) -> tuple[list[float], list[float]]:
    m = np.asarray(maxima, dtype=float)
    growth = [float(g) for g in m[1:] / np.maximum(m[:-1], 1e-300) - 1.0]
    inc = np.diff(m)
    ratios = [float(inc[k] / inc[k - 1]) if inc[k - 1] > 0 else 0.0 for k in range(1, len(inc))]
    return growth, ratios


def _is_growing(maxima, min_growth: float, min_ratio: float) -> bool:
    growth, ratios = _growth_profile(maxima)
    return bool(growth) and min(growth) >= min_growth and all(r >= min_ratio for r in ratios)


def detect_divergence(source, column: int | str = 0, *, levels: int | None = None,
                      min_growth: float = DIVERGENCE_MIN_GROWTH,
                      min_ratio: float = DIVERGENCE_MIN_RATIO,
                      max_drift: float = MAX_DRIFT) -> DetectionReport:
    """Divergent first derivative: max |d1| grows under every refinement.

    Positive when each halving of the spacing raises max |d1| by a relative
    amount >= ``min_growth``, successive increments do not shrink faster than
    ``min_ratio`` (a resolved smooth peak converges geometrically), and the
    argmax stays within ``max_drift`` coarse spacings.
    """
    def locate(res):
        j = res.column(column)
        return float(res.grid[_interior_argmax(res.d1[:, j])])

    series = _series(source, locate, levels)
    if len(series) < 2:
        raise ValueError("divergence detection needs at least two refinement levels")
    j = series[0].column(column)
    maxima = [float(np.max(np.abs(r.d1[1:-1, j]))) for r in series]
    locs = [locate(r) for r in series]
    h0 = series[0].spacing
    drift = max(abs(x - locs[-1]) for x in locs)
    growth, ratios = _growth_profile(maxima)
    metrics = {"growth": min(growth), "max_d1": maxima[-1], "drift": drift,
               "growth_per_level": growth, "increment_ratios": ratios}
    ok = _is_growing(maxima, min_growth, min_ratio) and drift < max_drift * h0
    return DetectionReport(DetectionKind.DIVERGENCE if ok else DetectionKind.NONE, locs[-1], metrics)


def _value_jumps(v: np.ndarray) -> list[int]:
    """Intervals whose |dv| dwarfs the nearby intervals (2 to 4 steps away)."""
    vd = np.abs(np.diff(v))
    scale = 1e-14 * max(float(np.max(np.abs(v))), 1e-300)
    out = []
    for i in range(len(vd)):
        near = np.concatenate([vd[max(0, i - 4): max(0, i - 1)], vd[i + 2: i + 5]])
        if near.size and vd[i] >= JUMP_FACTOR * max(float(np.median(near)), scale):
            out.append(i)
    return out


def _largest_jump(res: SweepResult, j: int, target: str, guard_values: bool):
    t = res.values[:, j] if target == "value" else res.d1[:, j]
    diffs = np.abs(np.diff(t))
    mask = np.ones_like(diffs, dtype=bool)
    if target == "d1":
        # one-sided end stencils are less accurate
        mask[0] = mask[-1] = False
    if guard_values:
        for i in _value_jumps(res.values[:, j]):
            mask[max(0, i - CUSP_GUARD): i + CUSP_GUARD + 1] = False
    scale = float(np.max(np.abs(t))) if t.size else 0.0
    med = max(float(np.median(diffs)), 1e-14 * max(scale, 1e-300))
    if not mask.any():
        return 0.0, 0.0, float(res.grid[len(res.grid) // 2])
    i = int(np.flatnonzero(mask)[np.argmax(diffs[mask])])
    return float(diffs[i]), float(diffs[i] / med), 0.5 * float(res.grid[i] + res.grid[i + 1])


def _jump_detector(source, column, levels, target, guard_values, factor, persist, max_drift, kind):
    if target not in ("value", "d1"):
        raise ValueError(f"target must be 'value' or 'd1', got {target!r}")

    def locate(res):
        return _largest_jump(res, res.column(column), target, guard_values)[2]

    series = _series(source, locate, levels)
    if len(series) < 2:
        raise ValueError("jump detection needs refinement data (at least two levels)")
    j = series[0].column(column)
    jumps, ratios, locs = zip(*(_largest_jump(r, j, target, guard_values) for r in series))
    h0 = series[0].spacing
    drift = max(abs(x - locs[-1]) for x in locs)
    keeps = [jumps[k] / jumps[k - 1] if jumps[k - 1] > 0 else 0.0 for k in range(1, len(jumps))]
    # a jump is finite: the target itself must not be diverging
    peaks = [float(np.max(np.abs((r.values if target == "value" else r.d1)[1:-1, j]))) for r in series]
    bounded = not _is_growing(peaks, DIVERGENCE_MIN_GROWTH, DIVERGENCE_MIN_RATIO)
    ok = (min(ratios) >= factor and min(keeps) >= persist and drift < max_drift * h0 and bounded)
    metrics = {"jump": jumps[-1], "ratio": min(ratios), "persistence": min(keeps),
               "drift": drift, "bounded": bounded, "target": target}
    return DetectionReport(kind if ok else DetectionKind.NONE, locs[-1], metrics)


def detect_discontinuity(source, target: str = "value", column: int | str = 0, *,
                         levels: int | None = None, factor: float = JUMP_FACTOR,
                         persist: float = JUMP_PERSIST, max_drift: float = MAX_DRIFT) -> DetectionReport:
    """Finite jump of the value (``target='value'``) or of d1 (``target='d1'``).

    The largest adjacent difference must exceed ``factor`` times the median
    adjacent difference at every level and keep at least ``persist`` of its size
    from one level to the next.  Location is the midpoint of the jump interval.
    """
    return _jump_detector(source, column, levels, target, False, factor, persist, max_drift,
                          DetectionKind.DISCONTINUITY)


def detect_cusp(source, column: int | str = 0, *, levels: int | None = None,
                factor: float = JUMP_FACTOR, persist: float = JUMP_PERSIST,
                max_drift: float = MAX_DRIFT) -> DetectionReport:
    """d1 jumps while the value stays continuous; value jumps are masked out."""
    return _jump_detector(source, column, levels, "d1", True, factor, persist, max_drift,
                          DetectionKind.CUSP)


# ---------------------------------------------------------------- factorization line

def factorization_field(gamma: float) -> float:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    return 1.0 / math.sqrt(1.0 - gamma ** 2)


def distance_spread(lam: float, gamma: float, distances, config: AngleConfig, *, sqrt: bool = False) -> float:
    """max_m - min_m of the pair GWF over the given distances."""
    vals = []
    for m in distances:
        c = xy_thermo_correlators(lam, gamma, m)
        if sqrt:
            vals.append(gwf(matrix_sqrt(build_rho_pair(c)), config))
        else:
            vals.append(gwf_pair_closed(c, config))
    return float(max(vals) - min(vals))


def factorization_scan(gamma: float, distances=(1, 2, 5, 20), *, points: int = 512,
                       lam_range: tuple[float, float] = (1.005, 3.0), levels: int = 2,
                       point: str = "00,00", config: tuple[float, float] = Z_DOWN) -> DetectionReport:
    """Locate the factorization field of the XY chain in the ordered phase.

    Two independent routes:

    1. the distance spread of the pair GWF over ``lam_range`` is minimized on a
       ``points`` grid and polished with a bounded Brent search;
    2. the d1 discontinuity of the DWF of sqrt(rho) is searched on a ``points``
       grid around the spread minimum (half-width (lambda - 1) / 2, at most 0.25).

    The same jump search on rho itself is also run and should find nothing.
    """
    lam_f = factorization_field(gamma)
    cfg = AngleConfig.uniform(*config, 2)
    grid = np.linspace(*lam_range, points)
    spread = np.array([distance_spread(x, gamma, distances, cfg) for x in grid])
    i = int(np.argmin(spread))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    res = minimize_scalar(lambda x: distance_spread(x, gamma, distances, cfg), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-12})
    lam_spread, spread_min = float(res.x), float(res.fun)

    half = min(0.5 * (lam_spread - 1.0), 0.25)
    lo, hi = lam_spread - half, lam_spread + half
    reports = {}
    for sq in (True, False):
        spec = SweepSpec("xy", Observable("dwf", point=point, sqrt=sq), lo, hi, points, levels, gamma=gamma)
        reports[sq] = detect_discontinuity(Sweeper.from_spec(spec), target="d1")
    rho_value = detect_discontinuity(
        Sweeper.from_spec(SweepSpec("xy", Observable("dwf", point=point), lo, hi, points, levels, gamma=gamma)),
        target="value")
    sq = reports[True]
    spacing = (hi - lo) / (points - 1)
    ok = spread_min < FACTORIZATION_SPREAD and sq.detected and abs(sq.location - lam_spread) <= spacing
    metrics = {
        "spread_min": spread_min,
        "sqrt_location": sq.location,
        "sqrt_ratio": sq.metrics["ratio"],
        "sqrt_detected": sq.detected,
        "rho_detected": reports[False].detected or rho_value.detected,
        "analytic": lam_f,
        "spacing": spacing,
        "window": (lo, hi),
    }
    return DetectionReport(DetectionKind.FACTORIZATION_LINE if ok else DetectionKind.NONE, lam_spread, metrics)


# ---------------------------------------------------------------- entanglement checks

def _wootters(rho: np.ndarray) -> float:
    # lambda_i are the singular values of sqrt(rho) sqrt(rho~); this avoids taking
    # square roots of the tiny eigenvalues of rho rho~ for nearly pure states
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)
    s = matrix_sqrt(rho)
    lam = np.linalg.svd(s @ yy @ np.conj(s) @ yy, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def concurrence_x_state(c: CorrelatorSet) -> float:
    """Closed form for the Z2-symmetric X state built from ``c``."""
    r11 = (1 + 2 * c.mz + c.zz) / 4
    r44 = (1 - 2 * c.mz + c.zz) / 4
    r22 = r33 = (1 - c.zz) / 4
    r23 = (c.xx + c.yy) / 4
    r14 = (c.xx - c.yy) / 4
    return max(0.0, 2 * (abs(r23) - math.sqrt(max(r11 * r44, 0.0))),
               2 * (abs(r14) - math.sqrt(max(r22 * r33, 0.0))))


def concurrence_pair(c: CorrelatorSet) -> float:
    """Two-qubit concurrence of the pair state, from Wootters' spin-flip construction.

    The X-state closed form is asserted as a consistency check; for XX-symmetric
    sets with mz = 0 it reduces to max(0, |xx| - (1 + zz)/2).
    """
    rho = build_rho_pair(c).entries
    val = _wootters(rho)
    closed = concurrence_x_state(c)
    if abs(val - closed) > 1e-7:
        raise ArithmeticError(f"concurrence mismatch: Wootters {val} vs X-state {closed}")
    return val


def concurrence_simplified(c: CorrelatorSet) -> float:
    """The shortcut 2|xx| quoted for the XXZ chain, kept for comparison only."""
    return 2 * abs(c.xx)


def dwf_negativity(grid: DWFGrid) -> float:
    """Total negative volume: sum over points of max(0, -W)."""
    if grid.n != 2:
        raise ValueError("negativity is defined here for two-qubit grids")
    return float(np.sum(np.clip(-grid.values, 0.0, None)))


# ---------------------------------------------------------------- XXZ interference class

def interference_report(n_sites: int = 16, lo: float = -0.95, hi: float = 2.5, points: int = 256) -> dict:
    """d1/d2 extrema of the interference-class DWF W(00,01); no verdict attached."""
    spec = SweepSpec("xxz", Observable("dwf", point="00,01"), lo, hi, points, n_sites=n_sites)
    res = run_sweep(spec)
    d1, d2 = res.d1[1:-1, 0], res.d2[1:-1, 0]
    g = res.grid[1:-1]
    return {
        "d1_max_at": float(g[np.argmax(d1)]),
        "d1_min_at": float(g[np.argmin(d1)]),
        "d2_max_at": float(g[np.argmax(d2)]),
        "d2_min_at": float(g[np.argmin(d2)]),
        "value_max_at": float(res.grid[np.argmax(res.values[:, 0])]),
    }
