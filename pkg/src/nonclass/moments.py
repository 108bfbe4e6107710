"""Normal-ordered moment objects for two-mode states.

The four number-like quadratics N_mu = adag sigma_mu a (mu = 0..3, sigma_0 the
identity and sigma_1..3 the Pauli matrices) generate U(2); the three
pair-annihilation quadratics A_j = i a^T sigma_2 sigma_j a transform as a
Cartesian vector.  The product of two N's splits into a normally ordered
quartic plus a linear remainder,

    N_mu N_nu = t_{mu nu j k} Adag_j A_k + (l_{mu nu lam} + i eps_{0 mu nu lam}) N_lam,

with constant tensors t, l, eps materialized below.  The anticommutator
matrix is computed both directly from operator products and through this
decomposition; disagreement beyond tolerance raises DecompositionMismatch.

Direct operator products are evaluated exactly on the truncated box by
building them on a two-layer padded space and cropping: products of the
number-conserving quadratics move occupations by at most two, so the padded
block reproduces the untruncated matrix elements and the dual-path check
probes only the tensor transcription, not truncation noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import CutoffTooSmall, DecompositionMismatch, ImaginaryResidue
from .fock import FockSpace, State, trace_product, _annihilator_matrix

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# reality coercion: below DROP it is truncation noise, above RAISE it is a bug
IMAG_DROP = 1e-10
IMAG_RAISE = 1e-8

DECOMPOSITION_TOL = 1e-7
PSD_FLOOR = -1e-9


def _real(value: complex, what: str) -> float:
    im = abs(value.imag) if isinstance(value, complex) else 0.0
    if im > IMAG_RAISE:
        raise ImaginaryResidue(f"{what} has imaginary residue {im:.3e}")
    return float(np.real(value))


def _levi_civita0() -> np.ndarray:
    """eps_{0 mu nu lam} with eps_{0123} = 1; zero unless (mu,nu,lam) permutes (1,2,3)."""
    eps = np.zeros((4, 4, 4))
    for (mu, nu, lam), sign in (((1, 2, 3), 1), ((2, 3, 1), 1), ((3, 1, 2), 1),
                                ((3, 2, 1), -1), ((2, 1, 3), -1), ((1, 3, 2), -1)):
        eps[mu, nu, lam] = sign
    return eps


def _build_tensors() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # t_{mu nu jk} = (d_mn d_jk - d_mj d_nk - d_nj d_mk - i d_m0 e_{0njk} - i d_n0 e_{0mjk}) / 2
    # l_{mu nu lam} = d_mn d_l0 + d_m0 d_nl + d_n0 d_ml - 2 d_m0 d_n0 d_l0
    eps = _levi_civita0()
    t = np.zeros((4, 4, 3, 3), dtype=complex)
    l = np.zeros((4, 4, 4))
    for mu in range(4):
        for nu in range(4):
            for j in range(1, 4):
                for k in range(1, 4):
                    v = 0.0 + 0.0j
                    if mu == nu and j == k:
                        v += 0.5
                    if mu == j and nu == k:
                        v -= 0.5
                    if nu == j and mu == k:
                        v -= 0.5
                    if mu == 0:
                        v -= 0.5j * eps[nu, j, k]
                    if nu == 0:
                        v -= 0.5j * eps[mu, j, k]
                    t[mu, nu, j - 1, k - 1] = v
            for lam in range(4):
                v = 0.0
                if mu == nu and lam == 0:
                    v += 1.0
                if mu == 0 and nu == lam:
                    v += 1.0
                if nu == 0 and mu == lam:
                    v += 1.0
                if mu == 0 and nu == 0 and lam == 0:
                    v -= 2.0
                l[mu, nu, lam] = v
    return t, l, eps


@dataclass(frozen=True)
class OrderingTensors:
    """Constant tensors of the normal-ordering decomposition of N_mu N_nu."""

    t: np.ndarray = field(repr=False)
    l: np.ndarray = field(repr=False)
    eps0: np.ndarray = field(repr=False)


_T, _L, _EPS0 = _build_tensors()
ORDERING = OrderingTensors(t=_T, l=_L, eps0=_EPS0)


@dataclass(frozen=True)
class StokesVector:
    """First moments n_mu = <N_mu>; the two-mode analogue of Stokes parameters."""

    n: np.ndarray

    def __post_init__(self):
        vec = np.linalg.norm(self.n[1:])
        if self.n[0] < vec - 1e-9:
            raise ValueError(f"n0 = {self.n[0]} < |n_vec| = {vec}")


@dataclass(frozen=True)
class QMatrix:
    """q_jk = <Adag_j A_k>: 3x3 Hermitian positive semidefinite."""

    q: np.ndarray

    def __post_init__(self):
        if np.abs(self.q - self.q.conj().T).max() > 1e-10:
            raise ValueError("q matrix is not Hermitian")
        if np.linalg.eigvalsh(self.q).min() < PSD_FLOOR * max(1.0, np.abs(self.q).max()):
            raise ValueError("q matrix is not positive semidefinite")


@dataclass(frozen=True)
class MomentMatrix:
    """Generalized factorial-moment matrix gamma^(j), (2j+1) x (2j+1).

    Stored in the Gram orientation gamma[m1, m2] = <Bdag_{m1} B_{m2}> with
    B_m = a1^{j+m} a2^{j-m} / sqrt((j+m)!(j-m)!) and rows/columns ordered
    m = j, j-1, ..., -j.  This orientation is Hermitian positive semidefinite
    and transforms as gamma -> D gamma Ddag.
    """

    j: float
    gamma: np.ndarray

    def __post_init__(self):
        dim = int(round(2 * self.j)) + 1
        if self.gamma.shape != (dim, dim):
            raise ValueError("gamma dimension does not match j")
        if np.abs(self.gamma - self.gamma.conj().T).max() > 1e-9 * max(1.0, np.abs(self.gamma).max()):
            raise ValueError("gamma is not Hermitian")
        if np.linalg.eigvalsh(self.gamma).min() < PSD_FLOOR * max(1.0, np.abs(self.gamma).max()):
            raise ValueError("gamma is not positive semidefinite")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Delta(N_mu, N_nu) and the anticommutator matrix <1/2{N_mu, N_nu}>."""

    delta: np.ndarray
    anticomm: np.ndarray

    def __post_init__(self):
        for name, m in (("delta", self.delta), ("anticomm", self.anticomm)):
            if np.abs(m - m.T).max() > 1e-9 * max(1.0, np.abs(m).max()):
                raise ValueError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(m).min() < PSD_FLOOR * max(1.0, np.abs(m).max()):
                raise ValueError(f"{name} is not positive semidefinite")


# ---------------------------------------------------------------------------
# cached operator families


@lru_cache(maxsize=64)
def _number_ops(space: FockSpace) -> tuple[sp.csr_matrix, ...]:
    """The four quadratics N_mu = adag sigma_mu a as sparse matrices."""
    a = [_annihilator_matrix(space, 1), _annihilator_matrix(space, 2)]
    ops = []
    for mu in range(4):
        op = sp.csr_matrix((space.dim, space.dim), dtype=complex)
        for r in range(2):
            for s in range(2):
                if PAULI[mu, r, s] != 0:
                    op = op + PAULI[mu, r, s] * (a[r].conj().T @ a[s])
        ops.append(op.tocsr())
    return tuple(ops)


@lru_cache(maxsize=64)
def _pair_ops(space: FockSpace) -> tuple[sp.csr_matrix, ...]:
    """A_j = i a^T sigma_2 sigma_j a, j = 1..3."""
    a = [_annihilator_matrix(space, 1), _annihilator_matrix(space, 2)]
    ops = []
    for j in range(1, 4):
        m = 1j * (PAULI[2] @ PAULI[j])
        op = sp.csr_matrix((space.dim, space.dim), dtype=complex)
        for r in range(2):
            for s in range(2):
                if m[r, s] != 0:
                    op = op + m[r, s] * (a[r] @ a[s])
        ops.append(op.tocsr())
    return tuple(ops)


def _crop_indices(space: FockSpace, pad: int) -> np.ndarray:
    """Indices of the (cutoff1, cutoff2) box inside the padded space."""
    n1, n2 = space.occupations()
    return n1 * (space.cutoff2 + 1 + pad) + n2


def exact_product_block(space: FockSpace, build, pad: int = 2) -> sp.csr_matrix:
    """Exact box-restricted matrix of an operator product.

    ``build(space)`` must return the product's matrix on a given space; it is
    evaluated on a padded space and cropped back.  Exact whenever the product
    moves occupations by at most ``pad`` quanta per mode.
    """
    padded = FockSpace(space.cutoff1 + pad, space.cutoff2 + pad)
    big = build(padded).tocsr()
    idx = _crop_indices(space, pad)
    return big[np.ix_(idx, idx)].tocsr()


@lru_cache(maxsize=64)
def _number_products_exact(space: FockSpace) -> dict:
    """Exact box blocks of N_mu N_nu for mu <= nu."""
    out = {}
    for mu in range(4):
        for nu in range(mu, 4):
            def build(s, _mu=mu, _nu=nu):
                ops = _number_ops(s)
                return ops[_mu] @ ops[_nu]
            out[(mu, nu)] = exact_product_block(space, build)
    return out


@lru_cache(maxsize=64)
def _pair_products_exact(space: FockSpace) -> dict:
    """Exact box blocks of Adag_j A_k (these truncate exactly, no padding needed)."""
    ops = _pair_ops(space)
    return {(j, k): (ops[j].conj().T @ ops[k]).tocsr()
            for j in range(3) for k in range(3)}


# ---------------------------------------------------------------------------
# moment operations


def stokes_vector(state: State) -> StokesVector:
    ops = _number_ops(state.space)
    n = np.array([_real(trace_product(state.rho, ops[mu]), f"n_{mu}")
                  for mu in range(4)])
    return StokesVector(n=n)


def q_matrix(state: State) -> QMatrix:
    prods = _pair_products_exact(state.space)
    q = np.empty((3, 3), dtype=complex)
    for j in range(3):
        q[j, j] = _real(trace_product(state.rho, prods[(j, j)]), f"q_{j}{j}")
        for k in range(j + 1, 3):
            v = trace_product(state.rho, prods[(j, k)])
            q[j, k] = v
            q[k, j] = np.conj(v)
    return QMatrix(q=q)


def photon_dist(state: State) -> np.ndarray:
    """Joint photon-number table p(n1, n2); nonnegative, sums to one."""
    p = state.photon_probabilities()
    p = np.clip(p, 0.0, None)
    return p


def factorial_moments(state: State, mode: int, m_max: int) -> np.ndarray:
    """Falling-factorial moments gamma_m = <adag^m a^m> of one mode, m = 0..m_max."""
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    cutoff = state.space.cutoff1 if mode == 1 else state.space.cutoff2
    if m_max > cutoff:
        raise CutoffTooSmall(f"m_max={m_max} exceeds mode-{mode} cutoff {cutoff}")
    p = photon_dist(state)
    marg = p.sum(axis=1) if mode == 1 else p.sum(axis=0)
    n = np.arange(len(marg), dtype=float)
    out = np.empty(m_max + 1)
    ff = np.ones_like(n)
    for m in range(m_max + 1):
        out[m] = float(marg @ ff)
        ff = ff * (n - m)
    return out


def gamma_moment_matrix(state: State, j: float) -> MomentMatrix:
    """gamma^(j)[m1, m2] = <Bdag_{m1} B_{m2}>, m ordered j, j-1, ..., -j."""
    twoj = int(round(2 * j))
    if twoj < 0 or abs(2 * j - twoj) > 1e-12:
        raise ValueError("j must be a nonnegative half-integer")
    if state.space.cutoff1 < twoj or state.space.cutoff2 < twoj:
        raise CutoffTooSmall(f"cutoffs must be at least 2j = {twoj}")
    b_ops = _monomial_ops(state.space, twoj)
    dim = twoj + 1
    g = np.empty((dim, dim), dtype=complex)
    for i in range(dim):
        for k in range(i, dim):
            v = trace_product(state.rho, (b_ops[i].conj().T @ b_ops[k]).tocsr())
            g[i, k] = v
            g[k, i] = np.conj(v)
        g[i, i] = _real(g[i, i], f"gamma_{i}{i}")
    return MomentMatrix(j=j, gamma=g)


@lru_cache(maxsize=64)
def _monomial_ops(space: FockSpace, twoj: int) -> tuple[sp.csr_matrix, ...]:
    """B_m = a1^{j+m} a2^{j-m} / sqrt((j+m)!(j-m)!), m = j, ..., -j."""
    import math
    a1 = _annihilator_matrix(space, 1)
    a2 = _annihilator_matrix(space, 2)
    ops = []
    for k in range(twoj + 1):
        p1, p2 = twoj - k, k  # j+m, j-m
        op = sp.identity(space.dim, format="csr", dtype=complex)
        for _ in range(p1):
            op = op @ a1
        for _ in range(p2):
            op = op @ a2
        ops.append((op / math.sqrt(math.factorial(p1) * math.factorial(p2))).tocsr())
    return tuple(ops)


def anticommutator_direct(state: State) -> np.ndarray:
    """<1/2 {N_mu, N_nu}> from exact box blocks of the operator products."""
    prods = _number_products_exact(state.space)
    m = np.empty((4, 4))
    for mu in range(4):
        for nu in range(mu, 4):
            v = trace_product(state.rho, prods[(mu, nu)])
            # Tr(rho N_nu N_mu) is the conjugate, so the anticommutator is the real part
            m[mu, nu] = m[nu, mu] = v.real
    return m


def anticommutator_assembled(n: np.ndarray, q: np.ndarray,
                             tensors: OrderingTensors = ORDERING) -> np.ndarray:
    """<1/2 {N_mu, N_nu}> = t_{mu nu jk} q_jk + l_{mu nu lam} n_lam."""
    tq = np.einsum("mnjk,jk->mn", tensors.t, q)
    ln = np.einsum("mnl,l->mn", tensors.l, n)
    out = tq + ln
    if np.abs(out.imag).max() > IMAG_RAISE:
        raise ImaginaryResidue("assembled anticommutator is not real")
    return out.real


def covariance_matrices(state: State, *,
                        tensors: OrderingTensors = ORDERING) -> CovarianceMatrix:
    """Both 4x4 matrices: the anticommutator expectations and the covariances.

    The anticommutator is computed directly from operator products and through
    the t,l decomposition; the two must agree (DecompositionMismatch beyond
    1e-7).  delta = anticomm - n_mu n_nu.
    """
    n = stokes_vector(state).n
    q = q_matrix(state).q
    direct = anticommutator_direct(state)
    assembled = anticommutator_assembled(n, q, tensors)
    resid = np.abs(direct - assembled).max()
    if resid > DECOMPOSITION_TOL:
        raise DecompositionMismatch(
            f"operator-product and tensor paths disagree by {resid:.3e}")
    anticomm = 0.5 * (direct + direct.T)
    delta = anticomm - np.outer(n, n)
    return CovarianceMatrix(delta=delta, anticomm=anticomm)


def commutator_check(state: State) -> float:
    """max_{mu,nu} |<[N_mu, N_nu]> - 2i eps_{0 mu nu lam} n_lam|."""
    n = stokes_vector(state).n
    prods = _number_products_exact(state.space)
    worst = 0.0
    for mu in range(4):
        for nu in range(mu, 4):
            v = trace_product(state.rho, prods[(mu, nu)])
            comm = 2j * v.imag  # <N_mu N_nu> - <N_nu N_mu> = 2i Im
            rhs = 2j * ORDERING.eps0[mu, nu] @ n
            worst = max(worst, abs(comm - rhs))
    return worst
