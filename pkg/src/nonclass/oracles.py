"""Closed-form reference values used as test oracles.

The two-mode squeezed vacuum (per-mode squeeze a) and the squeezed thermal
state (per-mode squeeze a on top of a thermal state at inverse temperature
beta) have diagonal fluctuation matrices with entries in closed form.  The
forms below were derived from the Gaussian moment structure of these states
(for a zero-displacement Gaussian single mode, Var(n) - <n> = <n>^2 + |<aa>|^2)
and are verified against the truncated-Fock pipeline by the acceptance suite.

For the product states considered here A00 = A11 = A33, and

    squeezed vacuum:   diag(2 c2 s^2, 2 c2 s^2, -2 s^2, 2 c2 s^2),
                       c2 = cosh 2a, s = sinh a;
    squeezed thermal:  prefactor 1/(e^beta - 1)^2 times
                       diag(B, B, 1 + E^2 + (1 - E^2) c2, B),
                       B = [(1-E)^2 + 2(1-E^2) c2 + (1+E)^2 cosh 4a]/2, E = e^beta.

The A22 entry crosses zero at cosh 2a = coth beta, i.e. at
a = arccosh(coth beta)/2 = ln(coth(beta/2))/2: exactly half the quadrature
squeezing onset ln coth(beta/2), so the intrinsically two-mode subpoissonian
signature always precedes squeezing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleResult:
    """Labeled closed-form values with a provenance note."""

    values: tuple
    source: str


def a_matrix_squeezed_vacuum(a: float) -> np.ndarray:
    """Diagonal of the fluctuation matrix for the two-mode squeezed vacuum."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    c2, s2 = math.cosh(2 * a), math.sinh(a) ** 2
    side = 2 * c2 * s2
    return np.array([side, side, -2 * s2, side])


def a_matrix_squeezed_thermal(a: float, beta: float) -> np.ndarray:
    """Diagonal of the fluctuation matrix for the squeezed thermal state."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    if beta <= 0:
        raise ValueError("beta must be positive")
    e = math.exp(beta)
    c2, c4 = math.cosh(2 * a), math.cosh(4 * a)
    pref = 1.0 / (e - 1.0) ** 2
    side = 0.5 * ((1 - e) ** 2 + 2 * (1 - e * e) * c2 + (1 + e) ** 2 * c4) * pref
    mid = (1 + e * e + (1 - e * e) * c2) * pref
    return np.array([side, side, mid, side])


def squeezing_onset(beta: float) -> float:
    """Squeeze parameter at which quadrature squeezing sets in: ln coth(beta/2)."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return math.log(1.0 / math.tanh(beta / 2.0))


def subpoissonian_onset(beta: float) -> float:
    """Zero crossing of the A22 entry: arccosh(coth beta)/2 = squeezing_onset/2."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 0.5 * math.acosh(1.0 / math.tanh(beta))


def reference_q(kind: str, **params) -> float:
    """Textbook Mandel Q: coherent -> 0, thermal -> nbar, number -> -1."""
    if kind == "coherent":
        return 0.0
    if kind == "thermal":
        if "nbar" in params:
            return float(params["nbar"])
        if "beta" in params:
            return 1.0 / (math.exp(float(params["beta"])) - 1.0)
        raise ValueError("thermal reference needs nbar or beta")
    if kind == "number":
        return -1.0
    raise ValueError(f"unknown kind {kind!r}")


def oracle_summary(a: float, beta: float | None = None) -> OracleResult:
    labels = ("A00", "A11", "A22", "A33")
    if beta is None:
        vals = a_matrix_squeezed_vacuum(a)
        src = f"closed-form squeezed-vacuum diagonal at a={a}"
    else:
        vals = a_matrix_squeezed_thermal(a, beta)
        src = f"closed-form squeezed-thermal diagonal at a={a}, beta={beta}"
    return OracleResult(values=tuple(zip(labels, (float(v) for v in vals))), source=src)
