"""Parity-detection phase estimation with coherent + heralded inputs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, UndefinedStateError
from .phase_space import MZIScenario, NGOpParams, build_M4, build_M5, build_M6
from .series import QuadExponent, apply_F1, series_from_exponent
from .states import PROB_FLOOR, _real, gauss_legendre_2d, success_probability, wigner_box, wigner_ng

PARITY_SLACK = 1e-9
DIVERGENCE_FLOOR = 1e-12
DEFAULT_STEP = 1e-5


def parity_expectation(s: MZIScenario, prob: float | None = None) -> float:
    """Closed-form parity of output mode 2, normalised by the heralding probability."""
    ng = s.ng
    if prob is None:
        prob = success_probability(ng)
    if prob <= PROB_FLOOR:
        raise UndefinedStateError(f"heralding probability {prob:.3e} too small for {ng}")
    wm = 4.0 * s.w3 * s.w4
    d = s.d
    e = QuadExponent(build_M4(s) / -wm, build_M5(s) @ d / -wm)
    series = series_from_exponent(e, (ng.m, ng.n))
    scale = math.pi / math.sqrt(s.w3 * s.w4) * math.exp(-(d @ build_M6(s) @ d).real / wm)
    value = float(_real(scale * apply_F1(series, ng.m, ng.n), "parity")) / prob
    return _clamp_parity(value)


def _clamp_parity(value: float) -> float:
    if abs(value) > 1.0 + PARITY_SLACK:
        raise ConsistencyError(f"parity expectation {value} outside [-1, 1]")
    return max(-1.0, min(1.0, value))


def _parity_box(s: MZIScenario) -> tuple[tuple[float, float], tuple[float, float]]:
    # integrand exp(-|c x - d0|^2) * W(-s x): intersect the boxes where each factor lives
    c, sn = math.cos(s.phi / 2.0), abs(math.sin(s.phi / 2.0))
    reach = wigner_box(s.ng) * math.sqrt(1.0 + s.ng.m + s.ng.n)
    lims = []
    for centre in (s.dx, s.dp):
        lo, hi = -math.inf, math.inf
        if abs(c) > 1e-12:
            mid, half = centre / c, 8.0 / abs(c)
            lo, hi = mid - half, mid + half
        if sn > 1e-12:
            lo, hi = max(lo, -reach / sn), min(hi, reach / sn)
        if not lo < hi:
            lo, hi = -1.0, 1.0  # factors do not overlap; integral is ~0
        lims.append((lo, hi))
    return lims[0], lims[1]


def parity_via_quadrature(s: MZIScenario, nodes: int = 200, tol: float = 1e-6) -> float:
    """Parity from the 2D phase-space integral over the free output quadratures.

    Uses the coherent and heralded Wigner functions composed with the inverse
    interferometer map; independent of the M4-M6 closed form.  Raises
    :class:`ConsistencyError` if doubling the node count moves the result by
    more than ``tol``.
    """
    prob = success_probability(s.ng)
    c, sn = math.cos(s.phi / 2.0), math.sin(s.phi / 2.0)

    def integrand(q1, p1):
        coh = np.exp(-((c * q1 - s.dx) ** 2) - (c * p1 - s.dp) ** 2)
        return coh * wigner_ng(s.ng, -sn * q1, -sn * p1, prob)

    xlim, ylim = _parity_box(s)
    coarse = gauss_legendre_2d(integrand, xlim, ylim, nodes)
    fine = gauss_legendre_2d(integrand, xlim, ylim, 2 * nodes)
    if abs(fine - coarse) > tol:
        raise ConsistencyError(f"parity quadrature not converged: shift {abs(fine - coarse):.2e}")
    return _clamp_parity(fine)


def dparity_dphi(s: MZIScenario, h: float = DEFAULT_STEP, prob: float | None = None) -> float:
    """d<parity>/dphi: central differences at h and h/2 plus one Richardson step."""
    if not h > 0:
        raise ValueError("step must be positive")
    if prob is None:
        prob = success_probability(s.ng)

    def central(step):
        up = parity_expectation(s.with_phi(s.phi + step), prob)
        down = parity_expectation(s.with_phi(s.phi - step), prob)
        return (up - down) / (2.0 * step)

    return (4.0 * central(h / 2.0) - central(h)) / 3.0


@dataclass(frozen=True)
class Sensitivity:
    """Error-propagation phase uncertainty and the quantities it was built from.

    ``delta_phi`` is ``inf`` when the slope vanishes; ``divergent`` flags that.
    """

    delta_phi: float
    parity: float
    dparity: float
    divergent: bool


def phase_sensitivity(s: MZIScenario, h: float = DEFAULT_STEP) -> Sensitivity:
    prob = success_probability(s.ng)
    parity = parity_expectation(s, prob)
    slope = dparity_dphi(s, h, prob)
    if abs(slope) <= DIVERGENCE_FLOOR:
        return Sensitivity(math.inf, parity, slope, True)
    return Sensitivity(math.sqrt(max(0.0, 1.0 - parity**2)) / abs(slope), parity, slope, False)


def baseline_scenario(s: MZIScenario) -> MZIScenario:
    """Same squeezing, displacement and phase with the heralding switched off."""
    return MZIScenario(NGOpParams(s.ng.r, 1.0, 0, 0), s.dx, s.dp, s.phi)


def difference(baseline: Sensitivity, ng: Sensitivity) -> float:
    if baseline.divergent or ng.divergent:
        return math.nan
    return baseline.delta_phi - ng.delta_phi


def sensitivity_diff(s: MZIScenario, h: float = DEFAULT_STEP) -> float:
    """Baseline minus heralded phase uncertainty; positive means the heralded
    state helps.  ``nan`` if either uncertainty diverges."""
    return difference(phase_sensitivity(baseline_scenario(s), h), phase_sensitivity(s, h))


def figure_of_merit(s: MZIScenario, h: float = DEFAULT_STEP) -> float:
    """Heralding probability times :func:`sensitivity_diff`."""
    return success_probability(s.ng) * sensitivity_diff(s, h)
