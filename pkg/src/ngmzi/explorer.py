"""Parameter sweeps, (r, tau) grids and transmissivity optimisation."""

from __future__ import annotations

import math
import os
import struct
import threading
from functools import partial
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyError, ContractError, NoOptimumError, UndefinedStateError
from .interferometry import (
    DEFAULT_STEP,
    Sensitivity,
    baseline_scenario,
    difference,
    phase_sensitivity,
)
from .phase_space import MZIScenario, NGOpParams
from .states import success_probability

AXES = ("r", "tau", "phi")
TAU_EPS = 1e-3
COARSE_POINTS = 101
GOLDEN_TOL = 1e-4

State = tuple[int, int]


@dataclass(frozen=True)
class Record:
    """One evaluated point; field order is the CSV column order."""

    m: int
    n: int
    r: float
    tau: float
    phi: float
    dx: float
    dp: float
    p_ng: float = math.nan
    parity: float = math.nan
    dparity: float = math.nan
    delta_phi: float = math.nan
    delta_phi_svs: float = math.nan
    d_ng: float = math.nan
    pxd: float = math.nan
    flags: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    lo: float
    hi: float
    points: int
    states: tuple[State, ...]
    r: float = 0.5
    tau: float = 0.9
    phi: float = 0.01
    dx: float = 2.0
    dp: float = 2.0

    def __post_init__(self):
        if self.axis not in AXES:
            raise ContractError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.lo < self.hi:
            raise ContractError(f"empty range [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise ContractError("a sweep needs at least two points")
        if self.axis == "tau" and (self.lo < 0 or self.hi > 1):
            raise ContractError("transmissivity range must lie within [0, 1]")
        if not self.states:
            raise ContractError("no states to sweep")
        object.__setattr__(self, "states", tuple(tuple(int(v) for v in s) for s in self.states))

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class GridSpec:
    r_range: tuple[float, float]
    tau_range: tuple[float, float]
    r_points: int
    tau_points: int
    state: State
    phi: float = 0.01
    dx: float = 2.0
    dp: float = 2.0
    probability_only: bool = False

    def __post_init__(self):
        (r0, r1), (t0, t1) = self.r_range, self.tau_range
        if not (r0 < r1 and t0 < t1):
            raise ContractError("grid ranges must be non-empty")
        if t0 < 0 or t1 > 1 or r0 < 0:
            raise ContractError("grid ranges outside the physical domain")
        if self.r_points < 2 or self.tau_points < 2:
            raise ContractError("a grid needs at least two points per axis")


class BaselineCache:
    """Write-once cache of the plain squeezed-vacuum sensitivity.

    Keyed by the exact bytes of (r, phi, dx, dp); a race can only compute the
    same value twice.
    """

    def __init__(self):
        self._data: dict[bytes, Sensitivity] = {}
        self._lock = threading.Lock()

    def get(self, s: MZIScenario, h: float = DEFAULT_STEP) -> Sensitivity:
        key = struct.pack("<5d", s.ng.r, s.phi, s.dx, s.dp, h)
        hit = self._data.get(key)
        if hit is None:
            hit = phase_sensitivity(baseline_scenario(s), h)
            with self._lock:
                hit = self._data.setdefault(key, hit)
        return hit


def evaluate(
    m: int, n: int, r: float, tau: float, phi: float, dx: float, dp: float,
    cache: BaselineCache | None = None, probability_only: bool = False,
) -> Record:
    """Evaluate every tabulated quantity at one point; failures become flags."""
    base = Record(m, n, float(r), float(tau), float(phi), float(dx), float(dp))
    ng = NGOpParams(r, tau, m, n)
    s = MZIScenario(ng, dx, dp, phi)
    flags = []
    try:
        prob = success_probability(ng)
    except ConsistencyError:
        return replace(base, flags="inconsistent")
    if probability_only:
        return replace(base, p_ng=prob)
    cache = cache or BaselineCache()
    try:
        svs = cache.get(s)
    except ConsistencyError:
        svs = None
        flags.append("baseline_inconsistent")
    try:
        sens = phase_sensitivity(s)
    except UndefinedStateError:
        flags.append("herald_impossible")
        sens = None
    except ConsistencyError:
        flags.append("inconsistent")
        sens = None
    if svs is not None and svs.divergent:
        flags.append("baseline_divergent")
    if sens is not None and sens.divergent:
        flags.append("divergent")
    d_ng = difference(svs, sens) if svs is not None and sens is not None else math.nan
    return replace(
        base,
        p_ng=prob,
        parity=sens.parity if sens else math.nan,
        dparity=sens.dparity if sens else math.nan,
        delta_phi=sens.delta_phi if sens else math.nan,
        delta_phi_svs=svs.delta_phi if svs else math.nan,
        d_ng=d_ng,
        pxd=prob * d_ng,
        flags="|".join(flags),
    )


def worker_count(requested: int | None = None) -> int:
    """Requested workers, capped by the NGMZI_THREADS environment variable."""
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("NGMZI_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _evaluate_args(args, probability_only=False):
    return evaluate(*args, probability_only=probability_only)


def _run(tasks: Sequence[tuple], workers: int | None, probability_only: bool = False) -> list[Record]:
    n = worker_count(workers)
    if n == 1 or len(tasks) < 2:
        cache = BaselineCache()
        return [evaluate(*t, cache=cache, probability_only=probability_only) for t in tasks]
    job = partial(_evaluate_args, probability_only=probability_only)
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(job, tasks, chunksize=max(1, len(tasks) // (4 * n))))


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[Record]:
    """One record per (state, axis value); state-major, axis-minor order."""
    tasks, order = [], []
    for si, (m, n) in enumerate(spec.states):
        for vi, v in enumerate(spec.values()):
            point = {"r": spec.r, "tau": spec.tau, "phi": spec.phi}
            point[spec.axis] = float(v)
            tasks.append((m, n, point["r"], point["tau"], point["phi"], spec.dx, spec.dp))
            order.append((si, vi))
    records = _run(tasks, workers)
    return [rec for _, rec in sorted(zip(order, records), key=lambda x: x[0])]


def run_grid(spec: GridSpec, workers: int | None = None) -> list[Record]:
    """Dense (r, tau) grid; r-major, tau-minor order."""
    m, n = spec.state
    rs = np.linspace(*spec.r_range, spec.r_points)
    taus = np.linspace(*spec.tau_range, spec.tau_points)
    tasks = [(m, n, float(r), float(t), spec.phi, spec.dx, spec.dp) for r in rs for t in taus]
    return _run(tasks, workers, spec.probability_only)


# ---------------------------------------------------------------------------
# transmissivity optimisation

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f, a: float, b: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b].

    Returns the best point seen and its value; ``nan`` counts as ``-inf``.
    """

    def g(x):
        v = f(x)
        return -math.inf if math.isnan(v) else v

    c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    best = max((fc, -c, c), (fd, -d, d))
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = g(c)
            best = max(best, (fc, -c, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = g(d)
            best = max(best, (fd, -d, d))
    return best[2], best[0]


@dataclass(frozen=True)
class Optimum:
    tau: float
    value: float
    flags: tuple[str, ...] = field(default=())


def objective_function(state: State, r: float, phi: float, dx: float, dp: float, objective: str):
    """tau -> D or P x D at fixed (r, phi, dx, dp); ``nan`` where undefined."""
    if objective not in ("D", "PxD"):
        raise ContractError(f"objective must be 'D' or 'PxD', got {objective!r}")
    cache = BaselineCache()
    m, n = state

    def f(tau: float) -> float:
        rec = evaluate(m, n, r, tau, phi, dx, dp, cache=cache)
        return rec.d_ng if objective == "D" else rec.pxd

    return f


def optimize_tau(
    state: State, r: float, phi: float = 0.01, dx: float = 2.0, dp: float = 2.0,
    objective: str = "PxD", eps: float = TAU_EPS, coarse: int = COARSE_POINTS,
) -> Optimum:
    """Maximise the objective over tau in [eps, 1 - eps].

    A coarse grid picks the incumbent (ties go to the smaller tau); golden
    section then refines within the neighbouring grid cells and is kept only
    if it does not lose to the incumbent.
    """
    f = objective_function(state, r, phi, dx, dp, objective)
    taus = np.linspace(eps, 1.0 - eps, coarse)
    vals = np.array([f(float(t)) for t in taus])
    finite = ~np.isnan(vals)
    if not finite.any():
        raise NoOptimumError(f"objective undefined everywhere for state {state} at r={r}")
    masked = np.where(finite, vals, -np.inf)
    i = int(np.argmax(masked))
    flags = []
    if i in (0, coarse - 1):
        flags.append("boundary")
    peaks = [
        k for k in range(coarse)
        if finite[k]
        and (k == 0 or masked[k] >= masked[k - 1])
        and (k == coarse - 1 or masked[k] > masked[k + 1])
    ]
    if len(peaks) > 1:
        flags.append("multimodal")
    lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, coarse - 1)]
    t_ref, v_ref = golden_max(f, float(lo), float(hi))
    if v_ref > masked[i]:
        return Optimum(t_ref, v_ref, tuple(flags))
    return Optimum(float(taus[i]), float(vals[i]), tuple(flags))


# ---------------------------------------------------------------------------
# figure presets

PS_STATES = ((0, 1), (0, 2), (0, 3))
PA_STATES = ((1, 0), (2, 0), (3, 0))
PC_STATES = ((1, 1), (2, 2), (3, 3))

FIGURES: dict[str, SweepSpec | GridSpec] = {
    "2a": SweepSpec("r", 0.01, 2.0, 100, PS_STATES, tau=0.9),
    "2b": SweepSpec("r", 0.01, 2.0, 100, PA_STATES, tau=0.9),
    "2c": SweepSpec("r", 0.01, 2.0, 100, PC_STATES, tau=0.1),
    "3a": SweepSpec("tau", 0.01, 0.99, 99, PS_STATES, r=0.5),
    "3b": SweepSpec("tau", 0.01, 0.99, 99, PA_STATES, r=0.5),
    "3c": SweepSpec("tau", 0.01, 0.99, 99, PC_STATES, r=0.5),
    "5a": SweepSpec("phi", 0.01, 3.0, 100, PS_STATES, r=0.5, tau=0.9),
    "5b": SweepSpec("phi", 0.01, 3.0, 100, PA_STATES, r=0.5, tau=0.9),
    "5c": SweepSpec("phi", 0.01, 3.0, 100, PC_STATES, r=0.5, tau=0.1),
    "4a": GridSpec((0.0, 2.0), (0.0, 1.0), 41, 41, (0, 1)),
    "4b": GridSpec((0.0, 2.0), (0.0, 1.0), 41, 41, (1, 0)),
    "4c": GridSpec((0.0, 2.0), (0.0, 1.0), 41, 41, (1, 1)),
    "6": SweepSpec("tau", 0.01, 0.99, 99, PS_STATES + PA_STATES + PC_STATES, r=0.5),
}


def contour_levels() -> tuple[float, ...]:
    """D^NG levels drawn over the (r, tau) plane."""
    return (0.0, 0.025, 0.05, 0.10, 0.15, 0.20)


def sign_changes(xs: Iterable[float], ys: Iterable[float]) -> list[tuple[float, float]]:
    """Brackets ``(x_k, x_{k+1})`` where ``ys`` changes sign (``nan`` skipped)."""
    pts = [(x, y) for x, y in zip(xs, ys) if not math.isnan(y)]
    return [(x0, x1) for (x0, y0), (x1, y1) in zip(pts, pts[1:]) if (y0 > 0) != (y1 > 0)]
