"""U(2) mode mixing on the truncated space, Wigner D matrices, covariant
transformation of moment matrices, and single-mode projection geometry.

Conventions
-----------
- ``u2_unitary(space, u)`` returns the metaplectic representative U(u)
  satisfying U(u) a_r U(u)^{-1} = u_{sr} a_s, built by exponentiating the
  quadratic generator adag X a with X = -(log u)^T.  The generator is
  number-conserving, so the truncated exponential is exactly unitary and its
  action is faithful on all total-number sectors that fit inside the box.
  On coherent states it acts as U(u)|z> = |u* z> up to a global phase.
- ``wigner_d(j, a)`` produces the spin-j irreducible representation matrix in
  the basis ordered m = j, j-1, ..., -j via the polynomial realization of
  SU(2); D^{1/2}(a) = a and the Condon-Shortley d-matrices are reproduced.
  Moment matrices transform as gamma -> D gamma Ddag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import NonUnitaryInput
from .fock import FockSpace, MatrixOperator
from .moments import PAULI, ORDERING, MomentMatrix, exact_product_block, _real

UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class ModeVector:
    """Normalized complex two-vector selecting a single mode a(alpha) = alphadag a."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex).reshape(2)
        object.__setattr__(self, "alpha", a)
        if abs(np.vdot(a, a).real - 1.0) > UNITARY_TOL:
            raise ValueError("mode vector must be normalized to 1e-12")

    @classmethod
    def normalized(cls, vec) -> "ModeVector":
        v = np.asarray(vec, dtype=complex).reshape(2)
        return cls(v / np.linalg.norm(v))


@dataclass(frozen=True)
class XiVector:
    """Projection four-vector: either xi_mu(alpha) = alphadag sigma_mu alpha / 2
    (the half-sphere cone xi0 = |xi_vec| = 1/2) or the total-number vector
    (1, 0, 0, 0)."""

    xi: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.xi, dtype=float).reshape(4)
        object.__setattr__(self, "xi", x)
        vec = np.linalg.norm(x[1:])
        mode_like = abs(x[0] - 0.5) <= 1e-12 and abs(vec - 0.5) <= 1e-12
        total_like = abs(x[0] - 1.0) <= 1e-12 and vec <= 1e-12
        if not (mode_like or total_like):
            raise ValueError("xi must satisfy xi0 = |xi_vec| = 1/2 or be (1,0,0,0)")

    @classmethod
    def total_number(cls) -> "XiVector":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]))


@dataclass(frozen=True)
class U2Element:
    """A 2x2 unitary matrix."""

    u: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.u, dtype=complex).reshape(2, 2)
        object.__setattr__(self, "u", m)
        if np.abs(m @ m.conj().T - np.eye(2)).max() > UNITARY_TOL:
            raise NonUnitaryInput("u is not unitary to 1e-12")

    def su2_part(self) -> np.ndarray:
        """An SU(2) representative a with u = e^{i phi} a (branch irrelevant
        for gamma -> D gamma Ddag)."""
        det = np.linalg.det(self.u)
        return self.u / np.sqrt(det)


def _as_u2(u) -> U2Element:
    return u if isinstance(u, U2Element) else U2Element(np.asarray(u))


def u2_unitary(space: FockSpace, u) -> MatrixOperator:
    """Number-conserving unitary implementing the mode mixing u on the box."""
    el = _as_u2(u)
    w, v = np.linalg.eig(el.u)
    logu = v @ np.diag(np.log(w)) @ np.linalg.inv(v)
    x = -logu.T
    from .fock import _annihilator_matrix
    a1 = _annihilator_matrix(space, 1)
    a2 = _annihilator_matrix(space, 2)
    gen = (x[0, 0] * (a1.conj().T @ a1) + x[0, 1] * (a1.conj().T @ a2)
           + x[1, 0] * (a2.conj().T @ a1) + x[1, 1] * (a2.conj().T @ a2))
    big = expm(gen.toarray())
    return MatrixOperator(space, sp.csr_matrix(big))


def wigner_d(j: float, a) -> np.ndarray:
    """Spin-j representation matrix D^(j)(a) for a in SU(2), basis m = j..-j."""
    a = np.asarray(a, dtype=complex).reshape(2, 2)
    if abs(np.linalg.det(a) - 1.0) > 1e-12:
        raise ValueError("wigner_d requires det(a) = 1 to 1e-12")
    twoj = int(round(2 * j))
    if twoj < 0 or abs(2 * j - twoj) > 1e-12:
        raise ValueError("j must be a nonnegative half-integer")
    dim = twoj + 1
    d = np.zeros((dim, dim), dtype=complex)
    fact = [math.factorial(k) for k in range(twoj + 1)]
    for i1 in range(dim):        # row m, with j+m = twoj - i1
        jm, jmm = twoj - i1, i1  # j+m, j-m
        for i2 in range(dim):    # column m'
            jp, jpp = twoj - i2, i2
            pref = math.sqrt(fact[jp] * fact[jpp] / (fact[jm] * fact[jmm]))
            s = 0.0 + 0.0j
            for k in range(max(0, jp - jmm), min(jm, jp) + 1):
                s += (math.comb(jm, k) * math.comb(jmm, jp - k)
                      * a[0, 0] ** k * a[0, 1] ** (jm - k)
                      * a[1, 0] ** (jp - k) * a[1, 1] ** (jmm - jp + k))
            d[i1, i2] = pref * s
    return d


def transform_gamma(gamma: MomentMatrix, a) -> MomentMatrix:
    """gamma -> D^(j)(a) gamma D^(j)(a)dag."""
    d = wigner_d(gamma.j, a)
    return MomentMatrix(j=gamma.j, gamma=d @ gamma.gamma @ d.conj().T)


def xi_vector(alpha) -> XiVector:
    """xi_mu = alphadag sigma_mu alpha / 2; satisfies l_{mu nu lam} xi_mu xi_nu = xi_lam."""
    al = alpha.alpha if isinstance(alpha, ModeVector) else ModeVector.normalized(alpha).alpha
    xi = np.array([_real(complex(0.5 * (al.conj() @ PAULI[mu] @ al)), f"xi_{mu}")
                   for mu in range(4)])
    return XiVector(xi=xi)


def single_mode_number_ops(space: FockSpace, alpha) -> tuple[MatrixOperator, MatrixOperator]:
    """N(alpha) = a(alpha)dag a(alpha) and its square as operators on the box.

    The square is evaluated on a padded space and cropped, so its box matrix
    elements are exact.
    """
    al = alpha.alpha if isinstance(alpha, ModeVector) else ModeVector.normalized(alpha).alpha

    def n_of(s: FockSpace) -> sp.csr_matrix:
        from .fock import _annihilator_matrix
        a_al = (np.conj(al[0]) * _annihilator_matrix(s, 1)
                + np.conj(al[1]) * _annihilator_matrix(s, 2))
        return (a_al.conj().T @ a_al).tocsr()

    n_op = n_of(space)
    n_sq = exact_product_block(space, lambda s: n_of(s) @ n_of(s))
    return MatrixOperator(space, n_op), MatrixOperator(space, n_sq)


def cone_residual(alpha) -> float:
    """max_lam |l_{mu nu lam} xi_mu xi_nu - xi_lam| for the mode's xi vector."""
    xi = xi_vector(alpha).xi
    res = np.einsum("mnl,m,n->l", ORDERING.l, xi, xi) - xi
    return float(np.abs(res).max())
