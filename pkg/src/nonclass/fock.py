"""Truncated two-mode Fock space: basis bookkeeping, ladder operators, and
builders for every state family the package analyzes.

Conventions
-----------
- Basis ordering is lexicographic in (n1, n2): index(n1, n2) = n1*(cutoff2+1) + n2.
- Density matrices are scipy CSR matrices (complex128).  Two-mode mixed states
  at large cutoffs do not fit densely, so sparse storage is the uniform
  representation for every family.
- Every builder records ``tail_mass``: the probability weight the ideally
  normalized state places on the outermost two basis layers
  (n1 >= cutoff1-1 or n2 >= cutoff2-1), measured before renormalization.
  States are renormalized to unit trace after truncation.
- Squeeze parameterization: ``squeeze_unitary(space, a, b)`` is the product
  of single-mode squeezers exp[((a-b)/4)(ad1^2 - a1^2)] exp[((a+b)/4)(ad2^2 - a2^2)],
  i.e. per-mode squeeze parameters (a-b)/2 and (a+b)/2.  The *state families*
  ``squeezed_vacuum(a, b)`` / ``squeezed_thermal(a, b, beta)`` are parameterized
  by per-mode squeeze parameters a-b and a+b, so that at b=0 the fluctuation
  matrix takes the closed diagonal form diag(..., -2 sinh^2 a, ...) used by
  the analytic oracles.

States and operators are immutable after construction; all operations are
pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import CutoffTooSmall, DimensionMismatch, OutOfRange

# Tail thresholds enforced by the builders (see each builder's docstring).
COHERENT_LOST_MAX = 1e-8
THERMAL_LOST_MAX = 1e-12
PAIR_LOST_MAX = 1e-12
SQUEEZE_TAIL_MAX = 1e-10

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

# Above this dimension State construction skips the O(nnz) hermiticity scan
# (builders guarantee hermiticity structurally); State.validate still checks.
_CHEAP_CHECK_NNZ = 5_000_000


@dataclass(frozen=True)
class FockSpace:
    """Two-mode Fock space truncated at (cutoff1, cutoff2) photons inclusive."""

    cutoff1: int
    cutoff2: int

    def __post_init__(self):
        if self.cutoff1 < 0 or self.cutoff2 < 0:
            raise ValueError("cutoffs must be nonnegative")

    @property
    def dim(self) -> int:
        return (self.cutoff1 + 1) * (self.cutoff2 + 1)

    def index(self, n1: int, n2: int) -> int:
        if not (0 <= n1 <= self.cutoff1 and 0 <= n2 <= self.cutoff2):
            raise OutOfRange(f"({n1},{n2}) outside cutoffs ({self.cutoff1},{self.cutoff2})")
        return n1 * (self.cutoff2 + 1) + n2

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        """(n1, n2) occupation arrays over the basis, in index order."""
        n1 = np.repeat(np.arange(self.cutoff1 + 1), self.cutoff2 + 1)
        n2 = np.tile(np.arange(self.cutoff2 + 1), self.cutoff1 + 1)
        return n1, n2

    def layer_mask(self) -> np.ndarray:
        """Boolean mask of the outermost two layers (n1 >= cutoff1-1 or n2 >= cutoff2-1)."""
        n1, n2 = self.occupations()
        return (n1 >= self.cutoff1 - 1) | (n2 >= self.cutoff2 - 1)

    def interior_mask(self, depth: int = 2) -> np.ndarray:
        n1, n2 = self.occupations()
        return (n1 <= self.cutoff1 - depth) & (n2 <= self.cutoff2 - depth)

    def sector_mask(self, max_total: int) -> np.ndarray:
        """Basis states with n1+n2 <= max_total (sectors fully inside the box)."""
        n1, n2 = self.occupations()
        return n1 + n2 <= max_total


def make_space(cutoff1: int, cutoff2: int) -> FockSpace:
    return FockSpace(int(cutoff1), int(cutoff2))


@dataclass(frozen=True)
class MatrixOperator:
    """An operator realized as a sparse matrix on a truncated space."""

    space: FockSpace
    matrix: sp.csr_matrix = field(repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatch("operator matrix does not match space dimension")

    def dag(self) -> "MatrixOperator":
        return MatrixOperator(self.space, self.matrix.conj().T.tocsr())

    def __matmul__(self, other: "MatrixOperator") -> "MatrixOperator":
        if self.space != other.space:
            raise DimensionMismatch("operator product across different spaces")
        return MatrixOperator(self.space, (self.matrix @ other.matrix).tocsr())

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class State:
    """Density matrix on a truncated space, with tail diagnostics.

    Invariants (see ``validate``): Hermitian to 1e-12, unit trace to 1e-10,
    eigenvalues >= -1e-10.
    """

    space: FockSpace
    rho: sp.csr_matrix = field(repr=False)
    tail_mass: float = 0.0

    def purity(self) -> float:
        """tr(rho^2); equals the squared Frobenius norm for Hermitian rho."""
        return float((self.rho.multiply(self.rho.conj())).sum().real)

    def photon_probabilities(self) -> np.ndarray:
        """Diagonal of rho reshaped to a (cutoff1+1, cutoff2+1) table."""
        diag = np.asarray(self.rho.diagonal()).real
        return diag.reshape(self.space.cutoff1 + 1, self.space.cutoff2 + 1)

    def validate(self, check_spectrum: bool = True) -> None:
        """Raise ValueError if a type invariant fails."""
        herm = abs(self.rho - self.rho.conj().T)
        if herm.nnz and herm.max() > HERMITICITY_TOL:
            raise ValueError(f"rho not Hermitian: residual {herm.max():.3e}")
        tr = self.rho.diagonal().sum()
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace(rho) = {tr}, not 1 within {TRACE_TOL}")
        if check_spectrum:
            if self.space.dim <= 4096:
                eigs = np.linalg.eigvalsh(self.rho.toarray())
                low = eigs.min()
            else:
                low = sp.linalg.eigsh(self.rho, k=1, which="SA",
                                      return_eigenvectors=False, tol=1e-9)[0]
            if low < EIGENVALUE_FLOOR:
                raise ValueError(f"rho has eigenvalue {low:.3e} below floor")


def _finalize_state(space: FockSpace, rho: sp.spmatrix, tail_mass: float) -> State:
    rho = rho.tocsr().astype(np.complex128, copy=False)
    if rho.nnz <= _CHEAP_CHECK_NNZ:
        herm = abs(rho - rho.conj().T)
        if herm.nnz and herm.max() > HERMITICITY_TOL:
            raise ValueError("constructed rho is not Hermitian")
    tr = rho.diagonal().sum().real
    if tr <= 0:
        raise ValueError("constructed rho has nonpositive trace")
    rho.data /= tr
    return State(space, rho, float(tail_mass))


def _pure_state(space: FockSpace, psi: np.ndarray, tail_mass: float) -> State:
    """Build |psi><psi| (psi need not be normalized) as a sparse State."""
    col = sp.csr_matrix(psi.reshape(-1, 1))
    rho = (col @ col.conj().T).tocsr()
    return _finalize_state(space, rho, tail_mass)


def _layer_weight_product(p1: np.ndarray, p2: np.ndarray) -> float:
    """Weight a product distribution p1 x p2 puts on the outer two layers."""
    t1, t2 = p1.sum(), p2.sum()
    i1 = p1[:-2].sum() if len(p1) > 2 else 0.0
    i2 = p2[:-2].sum() if len(p2) > 2 else 0.0
    return float(t1 * t2 - i1 * i2)


# ---------------------------------------------------------------------------
# single-mode building blocks


def _destroy_1m(nmax: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, nmax + 1)), 1)


def _squeeze_1m(nmax: int, r: float) -> np.ndarray:
    """exp[(r/2)(adag^2 - a^2)] on the cutoff-nmax single-mode space.

    The truncated generator is exactly antisymmetric, so the exponential is
    exactly orthogonal; truncation shows up only as wrong action near the
    edge, not as loss of unitarity.  Entries with odd n-m are zeroed: the
    generator couples n to n+-2 only, so they vanish identically.
    """
    a = _destroy_1m(nmax)
    s = expm(0.5 * r * (a.T @ a.T - a @ a))
    n = np.arange(nmax + 1)
    s[(n[:, None] - n[None, :]) % 2 == 1] = 0.0
    return s


def _coherent_amps_1m(z: complex, nmax: int) -> np.ndarray:
    """Ideally normalized coherent amplitudes e^{-|z|^2/2} z^n / sqrt(n!)."""
    c = np.zeros(nmax + 1, dtype=complex)
    c[0] = math.exp(-0.5 * abs(z) ** 2)
    for n in range(1, nmax + 1):
        c[n] = c[n - 1] * z / math.sqrt(n)
    return c


def _thermal_weights_1m(beta: float, nmax: int) -> np.ndarray:
    """Ideally normalized weights (1 - e^-beta) e^{-beta n}; sum < 1 on the box."""
    x = math.exp(-beta)
    return (1.0 - x) * x ** np.arange(nmax + 1)


# ---------------------------------------------------------------------------
# operators


def annihilator(space: FockSpace, mode: int) -> MatrixOperator:
    """Mode annihilation operator a_mode on the two-mode space; mode in {1, 2}."""
    return MatrixOperator(space, _annihilator_matrix(space, mode))


def _annihilator_matrix(space: FockSpace, mode: int) -> sp.csr_matrix:
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode}")
    d1, d2 = space.cutoff1 + 1, space.cutoff2 + 1
    a1 = sp.diags(np.sqrt(np.arange(1.0, d1)), 1, format="csr")
    a2 = sp.diags(np.sqrt(np.arange(1.0, d2)), 1, format="csr")
    if mode == 1:
        m = sp.kron(a1, sp.identity(d2, format="csr"), format="csr")
    else:
        m = sp.kron(sp.identity(d1, format="csr"), a2, format="csr")
    return m.astype(np.complex128)


def squeeze_unitary(space: FockSpace, a: float, b: float) -> MatrixOperator:
    """Two-mode squeezing transformation with intrinsic parameters a >= b >= 0.

    Product of single-mode squeezers with per-mode squeeze parameters
    (a-b)/2 on mode 1 and (a+b)/2 on mode 2.  Exactly unitary on the
    truncated space; its action is faithful only away from the cutoff edge.
    """
    if not (a >= b >= 0):
        raise ValueError("squeeze parameters must satisfy a >= b >= 0")
    s1 = _squeeze_1m(space.cutoff1, 0.5 * (a - b))
    s2 = _squeeze_1m(space.cutoff2, 0.5 * (a + b))
    u = sp.kron(sp.csr_matrix(s1), sp.csr_matrix(s2), format="csr")
    return MatrixOperator(space, u.astype(np.complex128))


def expect(state: State, op: MatrixOperator) -> complex:
    """Tr(rho F)."""
    if state.space != op.space:
        raise DimensionMismatch("state and operator live on different spaces")
    return trace_product(state.rho, op.matrix)


def trace_product(rho: sp.csr_matrix, op: sp.spmatrix) -> complex:
    """Tr(rho @ op) by gathering rho at op's nonzero positions.

    O(nnz(op) log) instead of O(nnz(rho)); the moment operators are far
    sparser than large density matrices.
    """
    coo = op.tocoo()
    if coo.nnz == 0:
        return 0.0 + 0.0j
    vals = np.asarray(rho[coo.col, coo.row]).ravel()
    return complex(np.sum(coo.data * vals))


# ---------------------------------------------------------------------------
# state builders


def coherent_state(space: FockSpace, z1: complex, z2: complex) -> State:
    """Two-mode coherent state |z1, z2>, truncated and renormalized.

    Raises CutoffTooSmall when the Poisson weight lost beyond the cutoffs
    exceeds 1e-8.
    """
    c1 = _coherent_amps_1m(z1, space.cutoff1)
    c2 = _coherent_amps_1m(z2, space.cutoff2)
    p1, p2 = np.abs(c1) ** 2, np.abs(c2) ** 2
    lost = 1.0 - p1.sum() * p2.sum()
    if lost > COHERENT_LOST_MAX:
        raise CutoffTooSmall(
            f"coherent state loses {lost:.3e} probability beyond cutoffs "
            f"({space.cutoff1},{space.cutoff2})")
    tail = _layer_weight_product(p1, p2)
    return _pure_state(space, np.kron(c1, c2), tail)


def number_state(space: FockSpace, n1: int, n2: int) -> State:
    """Projector |n1, n2><n1, n2|."""
    idx = space.index(n1, n2)  # raises OutOfRange
    psi = np.zeros(space.dim)
    psi[idx] = 1.0
    on_layer = (n1 >= space.cutoff1 - 1) or (n2 >= space.cutoff2 - 1)
    return _pure_state(space, psi, 1.0 if on_layer else 0.0)


def thermal_state(space: FockSpace, beta: float) -> State:
    """Product thermal state with weights proportional to e^{-beta(n1+n2)}.

    Raises CutoffTooSmall when the geometric weight beyond the cutoffs
    exceeds 1e-12.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    w1 = _thermal_weights_1m(beta, space.cutoff1)
    w2 = _thermal_weights_1m(beta, space.cutoff2)
    lost = 1.0 - w1.sum() * w2.sum()
    if lost > THERMAL_LOST_MAX:
        raise CutoffTooSmall(
            f"thermal state at beta={beta} loses {lost:.3e} beyond cutoffs")
    tail = _layer_weight_product(w1, w2)
    rho = sp.diags(np.kron(w1, w2).astype(np.complex128), format="csr")
    return _finalize_state(space, rho, tail)


def squeezed_vacuum(space: FockSpace, a: float, b: float = 0.0) -> State:
    """Two-mode squeezed vacuum with per-mode squeeze parameters a-b and a+b.

    At b=0 both modes carry squeeze parameter a and the fluctuation matrix is
    diag(2 cosh(2a) sinh^2 a, ..., -2 sinh^2 a, ...).  Raises CutoffTooSmall
    when the outer-layer weight exceeds 1e-10.
    """
    if not (a >= b >= 0):
        raise ValueError("squeeze parameters must satisfy a >= b >= 0")
    psi1 = _squeeze_1m(space.cutoff1, a - b)[:, 0]
    psi2 = _squeeze_1m(space.cutoff2, a + b)[:, 0]
    p1, p2 = np.abs(psi1) ** 2, np.abs(psi2) ** 2
    tail = _layer_weight_product(p1, p2)
    if tail > SQUEEZE_TAIL_MAX:
        raise CutoffTooSmall(
            f"squeezed vacuum (a={a}, b={b}) has outer-layer weight {tail:.3e} "
            f"at cutoffs ({space.cutoff1},{space.cutoff2})")
    return _pure_state(space, np.kron(psi1, psi2), tail)


def squeezed_thermal(space: FockSpace, a: float, b: float, beta: float) -> State:
    """Squeezed thermal state: the thermal state conjugated by the squeezer
    with per-mode squeeze parameters a-b and a+b.

    Raises CutoffTooSmall when the outer-layer weight exceeds 1e-10.
    """
    if not (a >= b >= 0):
        raise ValueError("squeeze parameters must satisfy a >= b >= 0")
    if beta <= 0:
        raise ValueError("beta must be positive")
    sig1 = _squeezed_thermal_1m(space.cutoff1, a - b, beta)
    sig2 = _squeezed_thermal_1m(space.cutoff2, a + b, beta)
    p1 = np.diag(sig1).real.copy()
    p2 = np.diag(sig2).real.copy()
    tail = _layer_weight_product(p1, p2)
    if tail > SQUEEZE_TAIL_MAX:
        raise CutoffTooSmall(
            f"squeezed thermal (a={a}, b={b}, beta={beta}) has outer-layer "
            f"weight {tail:.3e} at cutoffs ({space.cutoff1},{space.cutoff2})")
    s1 = _prune_sparse(sig1)
    s2 = _prune_sparse(sig2)
    rho = _kron_csr(s1, s2)
    return _finalize_state(space, rho, tail)


def _squeezed_thermal_1m(nmax: int, r: float, beta: float) -> np.ndarray:
    s = _squeeze_1m(nmax, r)
    w = _thermal_weights_1m(beta, nmax)
    return (s * w) @ s.T


def _kron_csr(a: sp.csr_matrix, b: sp.csr_matrix) -> sp.csr_matrix:
    """Kronecker product assembled directly in CSR.

    Equivalent to scipy's kron but without the COO intermediate, which at
    ~1e8 output nonzeros would more than double the peak memory.
    """
    a = a.tocsr()
    b = b.tocsr()
    na, nb = a.shape[0], b.shape[0]
    row_nnz = (np.diff(a.indptr)[:, None] * np.diff(b.indptr)[None, :]).ravel()
    nnz = int(row_nnz.sum())
    indptr = np.zeros(na * nb + 1, dtype=np.int64)
    np.cumsum(row_nnz, out=indptr[1:])
    indices = np.empty(nnz, dtype=np.int32)
    data = np.empty(nnz, dtype=np.complex128)
    pos = 0
    for i in range(na):
        a_cols = a.indices[a.indptr[i]:a.indptr[i + 1]]
        a_vals = a.data[a.indptr[i]:a.indptr[i + 1]]
        if len(a_cols) == 0:
            continue
        base = a_cols.astype(np.int64) * nb
        for k in range(nb):
            b_cols = b.indices[b.indptr[k]:b.indptr[k + 1]]
            b_vals = b.data[b.indptr[k]:b.indptr[k + 1]]
            m = len(a_cols) * len(b_cols)
            if m == 0:
                continue
            indices[pos:pos + m] = (base[:, None] + b_cols[None, :]).ravel()
            data[pos:pos + m] = (a_vals[:, None] * b_vals[None, :]).ravel()
            pos += m
    out = sp.csr_matrix((data, indices, indptr), shape=(na * nb, na * nb))
    return out


def _prune_sparse(m: np.ndarray, rel: float = 1e-18) -> sp.csr_matrix:
    # entries below rel*max contribute < 1e-14 to any fourth-order moment
    out = m.copy()
    out[np.abs(out) < rel * np.abs(out).max()] = 0.0
    return sp.csr_matrix(out)


def pair_coherent(space: FockSpace, zeta: complex, q: int) -> State:
    """Joint eigenstate of a1 a2 (eigenvalue zeta) and n1 - n2 (eigenvalue q >= 0).

    Coefficients zeta^n / sqrt(n! (n+q)!) on |n+q, n>; the normalization series
    is summed directly with term-ratio stopping at relative 1e-16.  Raises
    CutoffTooSmall when the series weight beyond the cutoffs exceeds 1e-12.
    """
    if q < 0 or int(q) != q:
        raise ValueError("q must be a nonnegative integer")
    q = int(q)
    if space.cutoff1 < q:
        raise CutoffTooSmall(f"cutoff1={space.cutoff1} cannot hold the n1 = n2 + {q} band")
    n_in_box = min(space.cutoff1 - q, space.cutoff2)
    az2 = abs(zeta) ** 2
    terms = [1.0 / math.factorial(q)]
    n = 0
    while True:
        nxt = terms[-1] * az2 / ((n + 1) * (n + 1 + q))
        if nxt < 1e-16 * terms[0] and n >= n_in_box:
            break
        terms.append(nxt)
        n += 1
        if n > 100_000:
            raise ValueError("pair-coherent normalization series did not converge")
    total = math.fsum(terms)
    lost = math.fsum(terms[n_in_box + 1:]) / total
    if lost > PAIR_LOST_MAX:
        raise CutoffTooSmall(
            f"pair-coherent (zeta={zeta}, q={q}) loses {lost:.3e} beyond cutoffs")
    psi = np.zeros(space.dim, dtype=complex)
    amp = 1.0 / math.sqrt(math.factorial(q) * total)
    for m in range(n_in_box + 1):
        psi[space.index(m + q, m)] = amp
        amp *= zeta / math.sqrt((m + 1) * (m + 1 + q))
    # outer-layer weight under ideal normalization
    p1 = np.zeros(space.cutoff1 + 1)
    p2 = np.zeros(space.cutoff2 + 1)
    for m in range(min(len(terms) - 1, n_in_box) + 1):
        w = terms[m] / total
        p1[m + q] += w
        p2[m] += w
    layer = (p1[max(0, space.cutoff1 - 1):].sum()
             + p2[max(0, space.cutoff2 - 1):].sum())
    tail = float(min(1.0, layer + lost))
    return _pure_state(space, psi, tail)


def kerr_evolve(state: State, alpha_coef: float, beta_coef: float, t: float) -> State:
    """Evolve under the mode-1 Kerr Hamiltonian alpha*n + beta*n^2 for time t.

    Diagonal phases in the number basis; the photon-number distribution is
    exactly preserved.
    """
    n1, _ = state.space.occupations()
    phases = np.exp(-1j * t * (alpha_coef * n1 + beta_coef * n1.astype(float) ** 2))
    d = sp.diags(phases, format="csr")
    rho = (d @ state.rho @ d.conj().T).tocsr()
    return State(state.space, rho, state.tail_mass)
