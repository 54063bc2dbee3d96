"""Photon-number-basis simulator used as ground truth for the analytic formulas.

Conventions fixed here and followed everywhere else:

* squeezer ``exp[r(a^2 - a^dag^2)/2]``;
* a passive two-mode unitary U is described by the 2x2 matrix W with
  ``U a_i^dag U^dag = sum_j W[j, i] a_j^dag``; the heralding beam splitter
  has ``W = [[t, t'], [-t', t]]`` so that |1,0> -> t|1,0> - t'|0,1>;
* Wigner functions integrate to one, ``W(q, p) = Tr[rho D Pi D^dag]/pi``
  with ``alpha = (q + i p)/sqrt(2)``.

Two-mode states are truncated on *total* photon number, which makes every
passive unitary exactly block diagonal on the stored amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from .errors import ContractError, CutoffError, HeraldImpossible

TAIL_TOL = 1e-10
HERALD_FLOOR = 1e-14


@dataclass(frozen=True)
class FockVector:
    amps: np.ndarray
    tail: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "amps", np.asarray(self.amps, dtype=complex))

    @property
    def cutoff(self) -> int:
        return len(self.amps) - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    @property
    def tail_mass(self) -> float:
        return float(self.probabilities[-2:].sum())

    @property
    def parity(self) -> float:
        k = np.arange(len(self.amps))
        return float(np.sum((-1.0) ** k * self.probabilities))

    @property
    def mean_photon(self) -> float:
        return float(np.sum(np.arange(len(self.amps)) * self.probabilities))

    def padded(self, cutoff: int) -> FockVector:
        if cutoff < self.cutoff:
            raise ContractError("padding cannot shrink a state")
        out = np.zeros(cutoff + 1, dtype=complex)
        out[: len(self.amps)] = self.amps
        return FockVector(out, self.tail)

    def normalized(self) -> FockVector:
        nrm = self.norm
        if nrm**2 < HERALD_FLOOR:
            raise HeraldImpossible("state has vanishing norm")
        return FockVector(self.amps / nrm, self.tail)


@dataclass(frozen=True)
class TwoModeFock:
    """amps[j, k]: j photons in mode 1, k in mode 2, with j + k <= cutoff."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ContractError("two-mode amplitudes must be a square matrix")
        object.__setattr__(self, "amps", a)

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def number_distribution(self) -> np.ndarray:
        """Probability of each total photon number 0..cutoff."""
        probs = np.abs(self.amps) ** 2
        c = self.cutoff
        return np.array([np.trace(np.fliplr(probs), offset=c - N) for N in range(c + 1)])

    def mode2_parity(self) -> float:
        k = np.arange(self.cutoff + 1)
        return float(np.sum(np.abs(self.amps) ** 2 * (-1.0) ** k[None, :]))

    @classmethod
    def product(cls, mode1: FockVector, mode2: FockVector, cutoff: int | None = None) -> TwoModeFock:
        c = mode1.cutoff + mode2.cutoff if cutoff is None else cutoff
        out = np.zeros((c + 1, c + 1), dtype=complex)
        a, b = mode1.amps[: c + 1], mode2.amps[: c + 1]
        out[: len(a), : len(b)] = np.outer(a, b)
        j, k = np.indices(out.shape)
        out[j + k > c] = 0.0
        return cls(out)


def _check_tail(vec: FockVector, what: str, tol: float) -> None:
    if vec.tail > tol:
        raise CutoffError(f"{what}: tail mass {vec.tail:.2e} exceeds {tol:.0e}; raise the cutoff")


def squeezed_vacuum_fock(r: float, cutoff: int, tol: float = TAIL_TOL) -> FockVector:
    """Squeezed vacuum exp[r(a^2 - a^dag^2)/2]|0>, renormalised after truncation."""
    if cutoff < 2:
        raise ContractError("cutoff must be at least 2")
    amps = np.zeros(cutoff + 1, dtype=complex)
    k = np.arange(cutoff // 2 + 1)
    th = math.tanh(r)
    if th == 0.0:
        amps[0] = 1.0
    else:
        log_mag = 0.5 * gammaln(2 * k + 1) - k * math.log(2.0) - gammaln(k + 1) + k * math.log(th)
        amps[2 * k] = (-1.0) ** k * np.exp(log_mag - 0.5 * math.log(math.cosh(r)))
    raw = FockVector(amps)
    vec = FockVector(amps / raw.norm, raw.tail_mass)
    _check_tail(vec, "squeezed vacuum", tol)
    return vec


def coherent_fock(alpha: complex, cutoff: int, tol: float = TAIL_TOL) -> FockVector:
    amps = np.empty(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2.0)
    for k in range(1, cutoff + 1):
        amps[k] = amps[k - 1] * alpha / math.sqrt(k)
    raw = FockVector(amps)
    vec = FockVector(amps / raw.norm, raw.tail_mass)
    _check_tail(vec, "coherent state", tol)
    return vec


def fock_state(m: int, cutoff: int | None = None) -> FockVector:
    c = max(m, 1) if cutoff is None else cutoff
    amps = np.zeros(c + 1, dtype=complex)
    amps[m] = 1.0
    return FockVector(amps)


def choose_cutoff(r: float = 0.0, alpha: complex = 0.0, tol: float = TAIL_TOL) -> int:
    """Start at ceil(8 (sinh^2 r + |alpha|^2) + 20) and double until both the
    squeezed and the coherent truncations leave less than ``tol`` in the tail."""
    N = math.ceil(8.0 * (math.sinh(r) ** 2 + abs(alpha) ** 2) + 20.0)
    while True:
        svs = squeezed_vacuum_fock(r, N, tol=math.inf)
        coh = coherent_fock(alpha, N, tol=math.inf)
        if svs.tail <= tol and coh.tail <= tol:
            return N
        N *= 2


# ---------------------------------------------------------------------------
# passive two-mode unitaries


def passive_blocks(W: np.ndarray, n_max: int) -> list[np.ndarray]:
    """Matrices of a passive unitary restricted to each total photon number.

    ``blocks[N][l2, l1] = <N - l2, l2| U |N - l1, l1>``.  Column l of block N
    follows from block N-1 by one application of the image of a creation
    operator, so every entry is built from normalised quantities.
    """
    W = np.asarray(W, dtype=complex)
    blocks = [np.ones((1, 1), dtype=complex)]
    for N in range(1, n_max + 1):
        prev = blocks[-1]
        up = np.sqrt(N - np.arange(N))[:, None]  # a1^dag on |N-1-l, l>
        right = np.sqrt(np.arange(1, N + 1))[:, None]  # a2^dag on |N-1-l, l>

        def create(cols, x, y):
            out = np.zeros((N + 1, cols.shape[1]), dtype=complex)
            out[:N] += x * up * cols
            out[1:] += y * right * cols
            return out

        block = np.empty((N + 1, N + 1), dtype=complex)
        block[:, 1:] = create(prev, W[0, 1], W[1, 1]) / np.sqrt(np.arange(1, N + 1))
        block[:, :1] = create(prev[:, :1], W[0, 0], W[1, 0]) / math.sqrt(N)
        blocks.append(block)
    return blocks


def apply_passive(st: TwoModeFock, W: np.ndarray) -> TwoModeFock:
    c = st.cutoff
    blocks = passive_blocks(W, c)
    out = np.zeros_like(st.amps)
    for N, block in enumerate(blocks):
        l = np.arange(N + 1)
        out[N - l, l] = block @ st.amps[N - l, l]
    return TwoModeFock(out)


def beam_splitter_matrix(tau: float) -> np.ndarray:
    if not 0.0 <= tau <= 1.0:
        raise ContractError(f"transmissivity must lie in [0, 1], got {tau}")
    t, tp = math.sqrt(tau), math.sqrt(1.0 - tau)
    return np.array([[t, tp], [-tp, t]], dtype=complex)


def beam_splitter_apply(st: TwoModeFock, tau: float) -> TwoModeFock:
    return apply_passive(st, beam_splitter_matrix(tau))


def j1_rotation(theta: float) -> np.ndarray:
    """W for exp(-i theta J1), J1 = (a1^dag a2 + a1 a2^dag)/2."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]])


def j2_rotation(theta: float) -> np.ndarray:
    """W for exp(-i theta J2), J2 = (a1^dag a2 - a1 a2^dag)/(2i)."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def j3_phase(st: TwoModeFock, phi: float) -> TwoModeFock:
    """exp(i phi J3) with J3 = (n1 - n2)/2."""
    j, k = np.indices(st.amps.shape)
    return TwoModeFock(st.amps * np.exp(0.5j * phi * (j - k)))


# ---------------------------------------------------------------------------
# heralding and ideal operations


def herald(st: TwoModeFock, n: int) -> tuple[FockVector, float]:
    """Project mode 2 onto |n>; returns the normalised mode-1 state and its probability."""
    if n > st.cutoff:
        raise ContractError(f"outcome {n} beyond cutoff {st.cutoff}")
    column = st.amps[:, n]
    prob = float(np.sum(np.abs(column) ** 2))
    if prob < HERALD_FLOOR:
        raise HeraldImpossible(f"outcome n={n} has probability {prob:.2e}")
    return FockVector(column / math.sqrt(prob)), prob


def heralded_state(r: float, tau: float, m: int, n: int, cutoff: int | None = None) -> tuple[FockVector, float]:
    """Squeezed vacuum mixed with |m> at transmissivity tau, n photons detected.

    Without an explicit ``cutoff`` the truncation is doubled until the
    dropped squeezed-vacuum mass is below ``TAIL_TOL`` relative to the
    heralding probability, since the output is renormalised by it.
    """
    c = choose_cutoff(r) if cutoff is None else cutoff
    while True:
        svs = squeezed_vacuum_fock(r, c)
        st = TwoModeFock.product(svs, fock_state(m), cutoff=c + m)
        out, prob = herald(beam_splitter_apply(st, tau), n)
        if cutoff is not None or svs.tail <= TAIL_TOL * prob:
            return FockVector(out.amps, svs.tail), prob
        c *= 2


def herald_probabilities(r: float, tau: float, m: int, n_max: int, cutoff: int | None = None) -> np.ndarray:
    c = choose_cutoff(r) if cutoff is None else cutoff
    svs = squeezed_vacuum_fock(r, c)
    st = beam_splitter_apply(TwoModeFock.product(svs, fock_state(m), cutoff=c + m), tau)
    return np.sum(np.abs(st.amps[:, : n_max + 1]) ** 2, axis=0)


def ideal_ps(st: FockVector, n: int) -> FockVector:
    """Normalised a^n |psi>."""
    amps = st.amps.copy()
    for _ in range(n):
        k = np.arange(1, len(amps))
        amps = np.concatenate([np.sqrt(k) * amps[1:], [0.0]])
    return FockVector(amps, st.tail).normalized()


def ideal_pa(st: FockVector, m: int) -> FockVector:
    """Normalised (a^dag)^m |psi>; the basis grows by m."""
    amps = st.amps.copy()
    for _ in range(m):
        k = np.arange(1, len(amps) + 1)
        amps = np.concatenate([[0.0], np.sqrt(k) * amps])
    return FockVector(amps, st.tail).normalized()


# ---------------------------------------------------------------------------
# interferometer and Wigner function


def mzi_state(sig: FockVector, alpha: complex, phi: float, cutoff: int | None = None) -> TwoModeFock:
    """Coherent |alpha> in mode 1, ``sig`` in mode 2, through
    exp(-i pi/2 J1) exp(i phi J3) exp(i pi/2 J1)."""
    c = choose_cutoff(0.0, alpha) if cutoff is None else cutoff
    coh = coherent_fock(alpha, c)
    st = TwoModeFock.product(coh, sig)
    st = apply_passive(st, j1_rotation(-math.pi / 2.0))
    st = j3_phase(st, phi)
    return apply_passive(st, j1_rotation(math.pi / 2.0))


def mzi_parity(sig: FockVector, alpha: complex, phi: float, cutoff: int | None = None) -> float:
    """Parity of output mode 2; ``cutoff`` applies to the coherent input."""
    return mzi_state(sig, alpha, phi, cutoff).mode2_parity()


def _displace(st: FockVector, beta: complex) -> FockVector:
    pad = math.ceil(8 * abs(beta) ** 2 + 12 * abs(beta) + 40)
    big = st.padded(st.cutoff + pad)
    k = np.sqrt(np.arange(1, big.cutoff + 1))
    gen = diags([beta * k, -np.conj(beta) * k], [-1, 1], format="csc")
    out = FockVector(expm_multiply(gen, big.amps), st.tail)
    if out.tail_mass > TAIL_TOL:
        raise CutoffError(f"displaced state leaks {out.tail_mass:.2e} into the padding edge")
    return out


def wigner_displaced_parity(st: FockVector, q: float, p: float) -> float:
    """W(q, p) = <D(-alpha)psi| Pi |D(-alpha)psi>/pi with alpha = (q + i p)/sqrt(2)."""
    return _displace(st, -complex(q, p) / math.sqrt(2.0)).parity / math.pi


def fock_wigner(m: int, q, p):
    """Closed-form Wigner function of |m>: (-1)^m exp(-|xi|^2) L_m(2|xi|^2)/pi."""
    rho2 = np.asarray(q, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2
    x = 2.0 * rho2
    prev, cur = np.ones_like(x), 1.0 - x
    if m == 0:
        cur = prev
    for k in range(1, m):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return (-1.0) ** m * np.exp(-rho2) * cur / math.pi
