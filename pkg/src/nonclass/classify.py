"""Fluctuation-matrix assembly and the nonclassicality criteria battery.

The central object is the 4x4 real symmetric fluctuation matrix

    A_{mu nu} = Delta(N_mu, N_nu) - l_{mu nu lam} n_lam,

positive semidefinite for classical and semiclassical-I states.  Its
indefiniteness is a generalized, possibly irreducibly two-mode, subpoissonian
signature: contracting with the projection vectors xi(alpha) reproduces the
single-mode Mandel combination (Delta N(alpha))^2 - <N(alpha)> for every
normalized mode alpha, and with (1,0,0,0) the total-photon-number combination
A_00, yet nonnegativity of all those projections does not imply A >= 0.

The verdict deliberately certifies only exclusions: the criteria here are
necessary conditions for classicality/semiclassicality-I, so a state that
passes everything is reported as consistent with those levels, never as a
member.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IdentityMismatch, VacuumMode
from .fock import State
from .moments import (ORDERING, CovarianceMatrix, covariance_matrices,
                      factorial_moments, photon_dist, q_matrix, stokes_vector)
from .su2 import ModeVector, XiVector, xi_vector

PSD_FLOOR = 1e-9          # relative to max-norm; below it truncation noise must not flip verdicts
INEQ_SLACK = 1e-9
LEE_IDENTITY_TOL = 1e-7

CONSISTENT = "consistent-with-classical-or-semiI"
NONCLASSICAL = "not-classical-not-semiI"


@dataclass(frozen=True)
class FluctuationMatrix:
    """The 4x4 real symmetric fluctuation matrix A."""

    a: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.a, dtype=float).reshape(4, 4)
        object.__setattr__(self, "a", m)
        if np.abs(m - m.T).max() > 1e-10 * max(1.0, np.abs(m).max()):
            raise ValueError("fluctuation matrix must be symmetric")


@dataclass(frozen=True)
class LeeReport:
    """<n1(n1-1) + n2(n2-1) - 2 n1 n2> and its two algebraic identities."""

    lhs: float
    identity_residual: float
    a33: float
    n3: float


@dataclass(frozen=True)
class FactorialViolation:
    m: int
    n: int
    lhs: float
    rhs: float
    kind: str  # "product" for g_m g_n <= g_{m+n}, "cauchy" for g_{m+n} <= sqrt(g_2m g_2n)


@dataclass(frozen=True)
class LocalPnViolation:
    mode: int
    n0: int
    least_eig: float


@dataclass(frozen=True)
class VerdictConfig:
    n_samples: int = 100_000
    seed: int = 7
    refine_steps: int = 100
    m_max: int = 6
    n0_max: int = 10
    psd_floor: float = PSD_FLOOR
    slack: float = INEQ_SLACK


@dataclass(frozen=True)
class Verdict:
    any_state_psd_ok: bool
    A_psd: bool
    least_eig: float
    min_projection: float
    lee_violated: bool
    sharpened_lee_violated: bool
    factorial_violations: tuple
    local_pn_violations: tuple
    verdict_text: str


def _as_xi(alpha_or_xi) -> np.ndarray:
    if isinstance(alpha_or_xi, XiVector):
        return alpha_or_xi.xi
    return xi_vector(alpha_or_xi).xi


def _a_from(cov: CovarianceMatrix, n: np.ndarray) -> FluctuationMatrix:
    a = cov.delta - np.einsum("mnl,l->mn", ORDERING.l, n)
    return FluctuationMatrix(a=0.5 * (a + a.T))


def a_matrix(state: State) -> FluctuationMatrix:
    """Assemble A = Delta - l.n (dual-path checked covariances inside)."""
    n = stokes_vector(state).n
    cov = covariance_matrices(state)
    return _a_from(cov, n)


def least_eigenvalue(a) -> float:
    m = a.a if isinstance(a, FluctuationMatrix) else np.asarray(a, dtype=float)
    return float(np.linalg.eigvalsh(m)[0])


def projection_value(a, alpha_or_xi) -> float:
    """xi^T A xi for the given mode vector (or an explicit xi)."""
    m = a.a if isinstance(a, FluctuationMatrix) else np.asarray(a, dtype=float)
    xi = _as_xi(alpha_or_xi)
    return float(xi @ m @ xi)


def _xi_from_angles(theta: float, phi: float) -> np.ndarray:
    return 0.5 * np.array([1.0, np.sin(theta) * np.cos(phi),
                           np.sin(theta) * np.sin(phi), np.cos(theta)])


def _alpha_from_angles(theta: float, phi: float) -> ModeVector:
    return ModeVector(np.array([np.cos(theta / 2),
                                np.exp(1j * phi) * np.sin(theta / 2)]))


def min_projection(a, n_samples: int = 100_000, *, seed: int = 7,
                   refine_steps: int = 100) -> tuple[float, ModeVector | None]:
    """Minimum of xi^T A xi over seeded mode samples plus the total-number
    projection A_00, with local refinement from the best sample.

    A certified upper bound on the true minimum (global optimality is not
    claimed); deterministic for a given seed.  The returned mode vector is
    None when the total-number projection is the minimizer.
    """
    m = a.a if isinstance(a, FluctuationMatrix) else np.asarray(a, dtype=float)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_samples, 4))
    al = g[:, 0] + 1j * g[:, 1], g[:, 2] + 1j * g[:, 3]
    norm = np.sqrt(np.abs(al[0]) ** 2 + np.abs(al[1]) ** 2)
    a1, a2 = al[0] / norm, al[1] / norm
    cross = np.conj(a1) * a2
    xis = np.column_stack([np.full(n_samples, 0.5), cross.real, cross.imag,
                           0.5 * (np.abs(a1) ** 2 - np.abs(a2) ** 2)])
    vals = np.einsum("ij,jk,ik->i", xis, m, xis)
    best = int(np.argmin(vals))
    theta = float(np.arccos(np.clip(2.0 * xis[best, 3], -1.0, 1.0)))
    phi = float(np.arctan2(xis[best, 2], xis[best, 1]))

    def f(th, ph):
        xi = _xi_from_angles(th, ph)
        return float(xi @ m @ xi)

    cur = f(theta, phi)
    step = 0.3
    for _ in range(refine_steps):
        improved = False
        for dth, dph in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            cand = f(theta + dth, phi + dph)
            if cand < cur - 1e-15:
                theta, phi, cur = theta + dth, phi + dph, cand
                improved = True
        if not improved:
            step *= 0.5
            if step < 1e-8:
                break
    total = float(m[0, 0])  # xi = (1,0,0,0)
    if total < cur:
        return total, None
    return cur, _alpha_from_angles(theta, phi)


def mandel_q(state: State, mode_or_alpha) -> float:
    """Mandel Q of a bare mode (1 or 2) or of the mode picked by alpha.

    Computed as xi^T A xi / (xi . n); the projection identity ties this to
    ((Delta N(alpha))^2 - <N(alpha)>) / <N(alpha)>.
    """
    alpha = _mode_alpha(mode_or_alpha)
    n = stokes_vector(state).n
    cov = covariance_matrices(state)
    return _mandel_from_parts(_a_from(cov, n).a, n, alpha)


def _mode_alpha(mode_or_alpha) -> ModeVector:
    if mode_or_alpha == 1:
        return ModeVector(np.array([1.0, 0.0], dtype=complex))
    if mode_or_alpha == 2:
        return ModeVector(np.array([0.0, 1.0], dtype=complex))
    if isinstance(mode_or_alpha, ModeVector):
        return mode_or_alpha
    return ModeVector.normalized(mode_or_alpha)


def _mandel_from_parts(a: np.ndarray, n: np.ndarray, alpha: ModeVector) -> float:
    xi = xi_vector(alpha).xi
    mean = float(xi @ n)
    if mean <= 1e-12:
        raise VacuumMode("Mandel Q undefined: mode has vanishing mean photon number")
    return float(xi @ a @ xi) / mean


def lee_report(state: State) -> LeeReport:
    """Evaluate <n1(n1-1) + n2(n2-1) - 2 n1 n2> directly and check its
    identities against A_33 + n3^2 and (q11 + q22 - q33)/2."""
    n = stokes_vector(state).n
    cov = covariance_matrices(state)
    a = _a_from(cov, n).a
    q = q_matrix(state).q
    return _lee_from_parts(state, a, n, q)


def _lee_from_parts(state: State, a: np.ndarray, n: np.ndarray,
                    q: np.ndarray) -> LeeReport:
    p = photon_dist(state)
    n1 = np.arange(p.shape[0], dtype=float)[:, None]
    n2 = np.arange(p.shape[1], dtype=float)[None, :]
    lhs = float((p * (n1 * (n1 - 1) + n2 * (n2 - 1) - 2 * n1 * n2)).sum())
    via_a = a[3, 3] + n[3] ** 2
    via_q = 0.5 * (q[0, 0] + q[1, 1] - q[2, 2]).real
    resid = max(abs(lhs - via_a), abs(lhs - via_q))
    if resid > LEE_IDENTITY_TOL:
        raise IdentityMismatch(f"Lee identity residual {resid:.3e}")
    return LeeReport(lhs=lhs, identity_residual=float(resid),
                     a33=float(a[3, 3]), n3=float(n[3]))


def factorial_inequality_report(gammas, rel_slack: float = INEQ_SLACK):
    """All product / Cauchy-Schwarz inequalities among falling-factorial
    moments that fit in range; returns the violations."""
    g = np.asarray(gammas, dtype=float)
    m_max = len(g) - 1
    out = []
    for m in range(1, m_max + 1):
        for n in range(m, m_max + 1):
            if m + n <= m_max:
                lhs, rhs = g[m] * g[n], g[m + n]
                if lhs > rhs + rel_slack * max(1.0, abs(lhs), abs(rhs)):
                    out.append(FactorialViolation(m, n, lhs, rhs, "product"))
            if 2 * m <= m_max and 2 * n <= m_max and m + n <= m_max:
                lhs = g[m + n]
                rhs = float(np.sqrt(max(g[2 * m] * g[2 * n], 0.0)))
                if lhs > rhs + rel_slack * max(1.0, abs(lhs), abs(rhs)):
                    out.append(FactorialViolation(m, n, lhs, rhs, "cauchy"))
    return out


def local_pn_matrix(p, n0: int) -> np.ndarray:
    """2x2 matrix whose least eigenvalue is the minimum over unit (a, b) of
    the local three-probability quadratic form at n0."""
    p = np.asarray(p, dtype=float)
    if n0 < 0 or n0 + 2 >= len(p):
        from .errors import OutOfRange
        raise OutOfRange(f"n0={n0} needs p(n0..n0+2) inside the table")
    return np.array([
        [p[n0], (n0 + 1) * p[n0 + 1]],
        [(n0 + 1) * p[n0 + 1], (n0 + 1) * (n0 + 2) * p[n0 + 2]],
    ])


def local_pn_value(p, n0: int, a: float, b: float) -> float:
    """a^2 p(n0) + 2(n0+1) a b p(n0+1) + (n0+1)(n0+2) b^2 p(n0+2).

    Nonnegative for every (n0, a, b) when the single-mode distribution comes
    from a classical or semiclassical state."""
    m = local_pn_matrix(p, n0)
    v = np.array([a, b])
    return float(v @ m @ v)


def local_pn_scan(p, n0_max: int | None = None, floor: float = PSD_FLOOR):
    """Least eigenvalue of the local 2x2 form for each n0; negatives listed."""
    p = np.asarray(p, dtype=float)
    top = len(p) - 3 if n0_max is None else min(n0_max, len(p) - 3)
    results = []
    for n0 in range(top + 1):
        m = local_pn_matrix(p, n0)
        lam = float(np.linalg.eigvalsh(m)[0])
        tol = floor * max(1.0, np.abs(m).max())
        if lam < -tol:
            results.append((n0, lam))
    return results


def phase_insensitive_submatrix(a) -> np.ndarray:
    """The 2x2 block [[A00, A03], [A30, A33]]: every entry is expressible in
    bare-mode number expectations, so this criterion needs no phase reference."""
    m = a.a if isinstance(a, FluctuationMatrix) else np.asarray(a, dtype=float)
    return m[np.ix_([0, 3], [0, 3])].copy()


def verdict(state: State, config: VerdictConfig | None = None) -> Verdict:
    """Run every criterion and report what the batteries can certify."""
    cfg = config or VerdictConfig()
    n = stokes_vector(state).n
    cov = covariance_matrices(state)
    a = _a_from(cov, n)
    q = q_matrix(state).q

    def psd(m):
        return float(np.linalg.eigvalsh(m)[0]) >= -cfg.psd_floor * max(1.0, np.abs(m).max())

    any_state_ok = psd(cov.delta) and psd(cov.anticomm)
    least = least_eigenvalue(a)
    a_psd = least >= -cfg.psd_floor * max(1.0, np.abs(a.a).max())
    minproj, _ = min_projection(a, cfg.n_samples, seed=cfg.seed,
                                refine_steps=cfg.refine_steps)

    lee = _lee_from_parts(state, a.a, n, q)
    lee_tol = cfg.slack * max(1.0, abs(lee.lhs))
    lee_violated = lee.lhs < -lee_tol
    sharpened = lee.a33 < -cfg.psd_floor * max(1.0, np.abs(a.a).max())

    fact_viol = []
    local_viol = []
    p = photon_dist(state)
    for mode in (1, 2):
        cutoff = state.space.cutoff1 if mode == 1 else state.space.cutoff2
        m_max = min(cfg.m_max, cutoff)
        if m_max >= 1:
            g = factorial_moments(state, mode, m_max)
            for v in factorial_inequality_report(g, cfg.slack):
                fact_viol.append((mode, v))
        marg = p.sum(axis=1) if mode == 1 else p.sum(axis=0)
        for n0, lam in local_pn_scan(marg, cfg.n0_max, cfg.psd_floor):
            local_viol.append(LocalPnViolation(mode, n0, lam))

    nonclassical = (not a_psd or lee_violated or sharpened
                    or bool(fact_viol) or bool(local_viol))
    return Verdict(
        any_state_psd_ok=bool(any_state_ok),
        A_psd=bool(a_psd),
        least_eig=least,
        min_projection=float(minproj),
        lee_violated=bool(lee_violated),
        sharpened_lee_violated=bool(sharpened),
        factorial_violations=tuple(fact_viol),
        local_pn_violations=tuple(local_viol),
        verdict_text=NONCLASSICAL if nonclassical else CONSISTENT,
    )
