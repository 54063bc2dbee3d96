"""Parameter containers and the matrices of the heralded-state formulas.

Phase-space convention: xi = (q, p) with vacuum Wigner function
exp(-q^2 - p^2)/pi, coherent amplitude alpha = (dx + i dp)/sqrt(2).  The
squeezer is exp[r(a^2 - a^dag^2)/2], so the squeezed vacuum has Wigner
function exp(-e^{2r} q^2 - e^{-2r} p^2)/pi.

The auxiliary vector is always ordered u = (u1, v1, u2, v2): (u1, v1)
generate the Laguerre polynomial of the injected Fock state |m>, (u2, v2)
that of the detected state |n>.

Four matrix entries differ from the commonly quoted closed forms; each was
re-derived by Gaussian integration and is checked against the Fock-space
simulator in the test-suite:

* M3[0,2] = M3[1,3] (and transposes) = -alpha beta t'^2 t (no w0 factor);
* M4[0,3] = M4[1,2] (and transposes) = t (1 + alpha^2 (1 - tau gamma^2));
* M4, M5 and M6 enter the parity exponent over ``-4 w3 w4``, matching the
  ``-4 w1 w2`` used with M3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError
from .series import MAX_ORDER


@dataclass(frozen=True)
class DerivedScalars:
    alpha: float
    beta: float
    t: float
    tp: float
    w1: float
    w2: float
    w0: float


@dataclass(frozen=True)
class NGOpParams:
    """Heralded operation: squeezing ``r``, transmissivity ``tau``, ``m``
    photons injected into the ancilla port, ``n`` photons detected."""

    r: float
    tau: float
    m: int
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r >= 0):
            raise ContractError(f"squeezing r must be finite and >= 0, got {self.r}")
        if not (0.0 <= self.tau <= 1.0):
            raise ContractError(f"transmissivity must lie in [0, 1], got {self.tau}")
        for name in ("m", "n"):
            v = getattr(self, name)
            if int(v) != v or v < 0 or v > MAX_ORDER:
                raise ContractError(f"{name} must be an integer in [0, {MAX_ORDER}], got {v}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))

    @property
    def operation(self) -> str:
        """'subtraction', 'addition' or 'catalysis'."""
        if self.m < self.n:
            return "subtraction"
        if self.m > self.n:
            return "addition"
        return "catalysis"

    @cached_property
    def scalars(self) -> DerivedScalars:
        return derived_scalars(self)


def derived_scalars(p: NGOpParams) -> DerivedScalars:
    alpha, beta = math.sinh(p.r), math.cosh(p.r)
    t, tp = math.sqrt(p.tau), math.sqrt(1.0 - p.tau)
    w1 = beta + p.tau * alpha
    w2 = beta - p.tau * alpha
    # w0 is informational only (it does not enter M3); its denominator
    # changes sign at large r and small tau
    den = w1 - tp**2 * alpha**2
    w0 = math.exp(-2 * p.r) * (w2 + tp**2 * alpha**2) / den if den != 0 else math.inf
    return DerivedScalars(alpha, beta, t, tp, w1, w2, w0)


@dataclass(frozen=True)
class MZIScenario:
    """Full interferometer setting: heralded state, coherent displacement
    (dx, dp) and phase ``phi``."""

    ng: NGOpParams
    dx: float = 2.0
    dp: float = 2.0
    phi: float = 0.01

    def __post_init__(self):
        for name in ("dx", "dp", "phi"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ContractError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @property
    def gamma(self) -> float:
        return math.cos(self.phi)

    @property
    def delta(self) -> float:
        return math.sin(self.phi)

    @property
    def w3(self) -> float:
        return math.cosh(self.ng.r) + self.ng.tau * math.sinh(self.ng.r) * self.gamma

    @property
    def w4(self) -> float:
        return math.cosh(self.ng.r) - self.ng.tau * math.sinh(self.ng.r) * self.gamma

    @property
    def d(self) -> np.ndarray:
        return np.array([2.0 * self.dx, 2.0 * self.dp])

    @property
    def coherent_amplitude(self) -> complex:
        return complex(self.dx, self.dp) / math.sqrt(2.0)

    def with_phi(self, phi: float) -> MZIScenario:
        return MZIScenario(self.ng, self.dx, self.dp, phi)


def _cross4(diag_a, diag_b, off_12, off_34, cross_13, cross_14) -> np.ndarray:
    """4x4 symmetric matrix with the block pattern shared by M1, M3 and M4."""
    return np.array(
        [
            [diag_a, off_12, cross_13, cross_14],
            [off_12, diag_a, cross_14, cross_13],
            [cross_13, cross_14, diag_b, off_34],
            [cross_14, cross_13, off_34, diag_b],
        ],
        dtype=complex,
    )


def build_M1(p: NGOpParams) -> np.ndarray:
    s = p.scalars
    a, b, t, tp2 = s.alpha, s.beta, s.t, s.tp**2
    return 0.25 * _cross4(
        a * b * tp2 * t**2,
        a * b * tp2,
        -(b**2) * tp2,
        -(a**2) * tp2 * t**2,
        a * b * tp2 * t,
        a**2 * tp2 * t + t,
    )


def build_M2(p: NGOpParams, q2: float, p2: float) -> np.ndarray:
    """Linear coefficient vector; broadcasts over array-valued ``q2``/``p2``
    (result shape ``(..., 4)``)."""
    s = p.scalars
    q2 = np.asarray(q2, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    plus = q2 * s.w1 + 1j * p2 * s.w2
    minus = q2 * s.w1 - 1j * p2 * s.w2
    return np.stack(
        [
            -s.beta * s.tp * plus,
            s.beta * s.tp * minus,
            -s.alpha * s.tp * s.t * minus,
            s.alpha * s.tp * s.t * plus,
        ],
        axis=-1,
    )


def build_M3(p: NGOpParams) -> np.ndarray:
    s = p.scalars
    a, b, t, tp2 = s.alpha, s.beta, s.t, s.tp**2
    return _cross4(
        a * b * tp2 * t**2,
        a * b * tp2,
        b**2 * tp2,
        a**2 * tp2 * t**2,
        -a * b * tp2 * t,
        t + a**2 * tp2 * t,
    )


def build_M4(s: MZIScenario) -> np.ndarray:
    k = s.ng.scalars
    a, b, t, tp2, g = k.alpha, k.beta, k.t, k.tp**2, s.gamma
    return _cross4(
        a * b * g**2 * tp2 * t**2,
        a * b * tp2,
        -(b**2) * g * tp2,
        -(a**2) * g * tp2 * t**2,
        a * b * g * tp2 * t,
        t * (1.0 + a**2 * (1.0 - s.ng.tau * g**2)),
    )


def build_M5(s: MZIScenario) -> np.ndarray:
    k = s.ng.scalars
    a, b, t, tp, dl = k.alpha, k.beta, k.t, k.tp, s.delta
    w3, w4 = s.w3, s.w4
    return np.array(
        [
            [b * dl * tp * w3, 1j * b * dl * tp * w4],
            [-b * dl * tp * w3, 1j * b * dl * tp * w4],
            [a * dl * tp * t * w3, -1j * a * dl * tp * t * w4],
            [-a * dl * tp * t * w3, -1j * a * dl * tp * t * w4],
        ],
        dtype=complex,
    )


def build_M6(s: MZIScenario) -> np.ndarray:
    k = s.ng.scalars
    half = math.sin(s.phi / 2.0) ** 2
    return half * np.diag([s.w3 * k.w1, s.w4 * k.w2])
