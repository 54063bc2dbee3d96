"""Truncated power series in the four auxiliary variables (u1, v1, u2, v2).

The heralded-state formulas are all of the form "apply a mixed derivative
at the origin to the exponential of a quadratic form".  Instead of
differentiating symbolically we expand the exponential as a dense,
truncated Taylor series and read the wanted coefficient off directly:

    d^m/du1^m d^m/dv1^m d^n/du2^n d^n/dv2^n f |_0 = (m!)^2 (n!)^2 [u1^m v1^m u2^n v2^n] f

Variables 0 and 1 (u1, v1) share the degree cap d1; variables 2 and 3
(u2, v2) share the cap d2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import ContractError, ResourceError

Caps = Tuple[int, int]

#: Largest derivative order accepted by :func:`apply_F1`.
MAX_ORDER = 10
#: Refuse dense arrays with more coefficients than this.
MAX_COEFFS = 1 << 24

_UNIT = np.eye(4, dtype=int)


def _shape(caps: Caps) -> tuple[int, int, int, int]:
    d1, d2 = caps
    if d1 < 0 or d2 < 0 or int(d1) != d1 or int(d2) != d2:
        raise ContractError(f"degree caps must be non-negative integers, got {caps!r}")
    size = (d1 + 1) ** 2 * (d2 + 1) ** 2
    if size > MAX_COEFFS:
        raise ResourceError(
            f"caps {caps!r} need {size} coefficients (limit {MAX_COEFFS})"
        )
    return (d1 + 1, d1 + 1, d2 + 1, d2 + 1)


@dataclass(frozen=True)
class QuadExponent:
    """Exponent ``u^T M u + u^T L + c`` with u = (u1, v1, u2, v2).

    ``M`` need not be symmetric; only the quadratic form it induces matters.
    """

    M: np.ndarray
    L: np.ndarray
    c: complex = 0.0

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        L = np.asarray(self.L, dtype=complex)
        if M.shape != (4, 4):
            raise ContractError(f"M must be 4x4, got shape {M.shape}")
        if L.shape != (4,):
            raise ContractError(f"L must have length 4, got shape {L.shape}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "c", complex(self.c))

    def monomials(self) -> list[tuple[tuple[int, int, int, int], complex]]:
        """Non-zero (multi-degree, coefficient) pairs of the non-constant part."""
        terms: dict[tuple[int, int, int, int], complex] = {}
        for i in range(4):
            if self.L[i] != 0:
                terms[tuple(_UNIT[i])] = self.L[i]
            for j in range(i, 4):
                val = self.M[i, i] if i == j else self.M[i, j] + self.M[j, i]
                if val != 0:
                    key = tuple(_UNIT[i] + _UNIT[j])
                    terms[key] = terms.get(key, 0) + val
        return [(k, v) for k, v in terms.items() if v != 0]


@dataclass(frozen=True)
class MultiSeries:
    """Dense truncated series ``sum c[i,j,k,l] u1^i v1^j u2^k v2^l``."""

    caps: Caps
    coeffs: np.ndarray

    def __post_init__(self):
        caps = (int(self.caps[0]), int(self.caps[1]))
        shape = _shape(caps)
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != shape:
            raise ContractError(f"coefficient array shape {coeffs.shape} does not match caps {caps}")
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, caps: Caps) -> MultiSeries:
        return cls(caps, np.zeros(_shape(caps), dtype=complex))

    @classmethod
    def constant(cls, value: complex, caps: Caps) -> MultiSeries:
        out = np.zeros(_shape(caps), dtype=complex)
        out[0, 0, 0, 0] = value
        return cls(caps, out)

    @classmethod
    def monomial(cls, degree: tuple[int, int, int, int], value: complex, caps: Caps) -> MultiSeries:
        out = np.zeros(_shape(caps), dtype=complex)
        if all(d <= s - 1 for d, s in zip(degree, out.shape)):
            out[tuple(degree)] = value
        return cls(caps, out)

    def coeff(self, i: int, j: int, k: int, l: int) -> complex:
        """Coefficient of ``u1^i v1^j u2^k v2^l`` (zero beyond the caps)."""
        shape = self.coeffs.shape
        if min(i, j, k, l) < 0:
            raise ContractError("negative degree")
        if i >= shape[0] or j >= shape[1] or k >= shape[2] or l >= shape[3]:
            return 0j
        return complex(self.coeffs[i, j, k, l])

    def with_caps(self, caps: Caps) -> MultiSeries:
        """Re-truncate (or zero-pad) to new caps."""
        out = np.zeros(_shape(caps), dtype=complex)
        a, b, c, d = (min(x, y) for x, y in zip(out.shape, self.coeffs.shape))
        out[:a, :b, :c, :d] = self.coeffs[:a, :b, :c, :d]
        return MultiSeries(caps, out)

    def _check(self, other: MultiSeries) -> None:
        if self.caps != other.caps:
            raise ContractError(f"cap mismatch: {self.caps} vs {other.caps}")

    def __add__(self, other):
        if isinstance(other, MultiSeries):
            self._check(other)
            return MultiSeries(self.caps, self.coeffs + other.coeffs)
        return self + MultiSeries.constant(other, self.caps)

    __radd__ = __add__

    def __neg__(self):
        return MultiSeries(self.caps, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MultiSeries):
            self._check(other)
            out = np.zeros_like(self.coeffs)
            for idx in zip(*np.nonzero(other.coeffs)):
                _shift_add(out, self.coeffs, idx, other.coeffs[idx])
            return MultiSeries(self.caps, out)
        return MultiSeries(self.caps, self.coeffs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return MultiSeries(self.caps, self.coeffs / complex(scalar))


def _shift_add(out: np.ndarray, src: np.ndarray, shift, scale) -> None:
    """out += scale * u^shift * src, dropping terms beyond the caps."""
    a, b, c, d = shift
    A, B, C, D = out.shape
    if a >= A or b >= B or c >= C or d >= D:
        return
    out[a:, b:, c:, d:] += scale * src[: A - a, : B - b, : C - c, : D - d]


def series_from_exponent(e: QuadExponent, caps: Caps) -> MultiSeries:
    """Truncated Taylor series of ``exp(u^T M u + u^T L)``.

    The constant ``e.c`` is *not* included; callers multiply by
    ``exp(e.c)`` themselves.  The non-constant part has no degree-0 term,
    so its k-th power has total degree >= k and the sum stops after
    ``2*d1 + 2*d2`` powers: within the caps the result is exact.
    """
    shape = _shape(caps)
    terms = e.monomials()
    total = np.zeros(shape, dtype=complex)
    total[0, 0, 0, 0] = 1.0
    power = total.copy()
    for k in range(1, 2 * caps[0] + 2 * caps[1] + 1):
        nxt = np.zeros(shape, dtype=complex)
        for deg, val in terms:
            _shift_add(nxt, power, deg, val / k)
        power = nxt
        if not power.any():
            break
        total += power
    return MultiSeries(caps, total)


def _check_orders(m: int, n: int) -> None:
    if m < 0 or n < 0:
        raise ContractError(f"derivative orders must be non-negative, got ({m}, {n})")
    if m > MAX_ORDER or n > MAX_ORDER:
        raise ContractError(f"derivative orders above {MAX_ORDER} are not supported")


def f1_prefactor(m: int, n: int) -> float:
    """(-2)^(m+n)/(pi m! n!) times the (m!)^2 (n!)^2 from derivative-vs-coefficient."""
    _check_orders(m, n)
    return ((-2) ** (m + n) * math.factorial(m) * math.factorial(n)) / math.pi


def apply_F1(s: MultiSeries, m: int, n: int) -> complex:
    """Mixed derivative d^m_{u1} d^m_{v1} d^n_{u2} d^n_{v2} at zero, with the
    ``(-2)^(m+n) / (pi m! n!)`` prefactor of the heralding operator."""
    _check_orders(m, n)
    if s.caps[0] < m or s.caps[1] < n:
        raise ContractError(f"series caps {s.caps} too small for orders ({m}, {n})")
    return f1_prefactor(m, n) * s.coeffs[m, m, n, n]


def f1_of_exponential(M: np.ndarray, L: np.ndarray, m: int, n: int) -> np.ndarray:
    """``apply_F1(series_from_exponent(QuadExponent(M, L)), m, n)`` for many ``L``.

    ``L`` has shape ``(..., 4)``; the result has shape ``L.shape[:-1]``.
    Uses exp(u^T M u + u^T L) = exp(u^T M u) * prod_i exp(L_i u_i): the
    quadratic series is built once and each linear exponential factorises
    into one-variable power series, so only a small contraction is done per
    point.
    """
    _check_orders(m, n)
    L = np.asarray(L, dtype=complex)
    if L.shape[-1:] != (4,):
        raise ContractError(f"L must have trailing dimension 4, got shape {L.shape}")
    quad = series_from_exponent(QuadExponent(M, np.zeros(4)), (m, n)).coeffs
    rev = quad[::-1, ::-1, ::-1, ::-1]
    pows = []
    for var, top in zip(range(4), (m, m, n, n)):
        k = np.arange(top + 1)
        inv_fact = np.array([1.0 / math.factorial(int(j)) for j in k])
        pows.append(L[..., var, None] ** k * inv_fact)
    coef = np.einsum("...a,...b,...c,...d,abcd->...", *pows, rev, optimize=True)
    return f1_prefactor(m, n) * coef
