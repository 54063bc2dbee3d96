"""Wigner function and heralding statistics of the non-Gaussian squeezed vacuum."""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConsistencyError, UndefinedStateError
from .phase_space import NGOpParams, build_M1, build_M2, build_M3
from .series import QuadExponent, apply_F1, f1_of_exponential, series_from_exponent

IMAG_TOL = 1e-10
PROB_FLOOR = 1e-12
QUAD_NODES = 200


def _real(z, what: str):
    z = np.asarray(z)
    bad = np.abs(z.imag) > IMAG_TOL * (1.0 + np.abs(z.real))
    if np.any(bad):
        worst = np.max(np.abs(z.imag))
        raise ConsistencyError(f"{what}: imaginary residue {worst:.3e} is not negligible")
    return z.real


def success_probability(p: NGOpParams) -> float:
    """Probability of detecting ``p.n`` photons in the ancilla."""
    s = p.scalars
    ww = s.w1 * s.w2
    series = series_from_exponent(QuadExponent(build_M3(p) / (-4.0 * ww), np.zeros(4)), (p.m, p.n))
    value = float(_real(math.pi / math.sqrt(ww) * apply_F1(series, p.m, p.n), "success probability"))
    if value < -1e-12 or value > 1.0 + 1e-9:
        raise ConsistencyError(f"success probability {value} outside [0, 1] for {p}")
    return min(max(value, 0.0), 1.0)


def herald_distribution(m: int, r: float, tau: float, n_max: int) -> list[float]:
    """Success probabilities for every detected photon number 0..n_max."""
    return [success_probability(NGOpParams(r, tau, m, n)) for n in range(n_max + 1)]


def wigner_unnormalized(p: NGOpParams, q2, p2) -> np.ndarray:
    """Wigner function of the heralded (unnormalised) state; integrates to P^NG.

    Vectorised over ``q2`` and ``p2``.
    """
    s = p.scalars
    ww = s.w1 * s.w2
    q2 = np.asarray(q2, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    L = build_M2(p, q2, p2) / (-ww)
    f1 = f1_of_exponential(build_M1(p) / (-ww), L, p.m, p.n)
    gauss = np.exp(-(s.w1**2 * q2**2 + s.w2**2 * p2**2) / ww) / math.sqrt(ww)
    return _real(gauss * f1, "Wigner function")


def wigner_ng(p: NGOpParams, q2, p2, prob: float | None = None):
    """Normalised Wigner function of the heralded state at (q2, p2).

    ``prob`` may pass a precomputed success probability.
    """
    if prob is None:
        prob = success_probability(p)
    if prob <= PROB_FLOOR:
        raise UndefinedStateError(f"heralding probability {prob:.3e} too small for {p}")
    w = wigner_unnormalized(p, q2, p2) / prob
    return float(w) if np.ndim(w) == 0 else w


def wigner_box(p: NGOpParams) -> float:
    """Half-width of the square on which the Wigner function is negligible outside."""
    return 6.0 * max(1.0, math.exp(p.r))


def gauss_legendre_2d(f, xlim, ylim, nodes: int = QUAD_NODES) -> float:
    """Tensor-product Gauss-Legendre rule for a vectorised ``f(x, y)``."""
    x, wx = leggauss(nodes)
    (xa, xb), (ya, yb) = xlim, ylim
    xs = 0.5 * (xb - xa) * x + 0.5 * (xb + xa)
    ys = 0.5 * (yb - ya) * x + 0.5 * (yb + ya)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = f(X, Y)
    return float(0.25 * (xb - xa) * (yb - ya) * (wx @ vals @ wx))


def wigner_integral(p: NGOpParams, nodes: int = QUAD_NODES) -> float:
    """Quadrature of the normalised Wigner function over its bounding square."""
    prob = success_probability(p)
    half = wigner_box(p)
    return gauss_legendre_2d(lambda q, pp: wigner_ng(p, q, pp, prob), (-half, half), (-half, half), nodes)
