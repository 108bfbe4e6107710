"""Shared fixtures and independent oracle helpers.

The helpers here intentionally avoid the package's moment machinery: they
compute reference values from photon-number tables or scratch-built dense
matrices so the tests check the library against an independent path.
"""

import math

import numpy as np
import pytest

import nonclass as nc


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)


def marginal_moments(state, mode):
    """(mean, variance) of one mode's photon number from the joint table."""
    p = state.photon_probabilities()
    marg = p.sum(axis=1) if mode == 1 else p.sum(axis=0)
    n = np.arange(len(marg), dtype=float)
    mean = float(marg @ n)
    var = float(marg @ n**2) - mean**2
    return mean, var


def diagonal_a_entries(state):
    """A00, A03, A33 from the photon table alone (diagonal observables)."""
    p = state.photon_probabilities()
    n1 = np.arange(p.shape[0], dtype=float)[:, None]
    n2 = np.arange(p.shape[1], dtype=float)[None, :]
    s, d = n1 + n2, n1 - n2
    m_s, m_d = float((p * s).sum()), float((p * d).sum())
    a00 = float((p * s**2).sum()) - m_s**2 - m_s
    a33 = float((p * d**2).sum()) - m_d**2 - m_s
    a03 = float((p * s * d).sum()) - m_s * m_d - m_d
    return a00, a03, a33


def random_su2(rng):
    x = rng.normal(size=4)
    x /= np.linalg.norm(x)
    return np.array([[x[0] + 1j * x[1], x[2] + 1j * x[3]],
                     [-x[2] + 1j * x[3], x[0] - 1j * x[1]]])


def random_u2(rng):
    return np.exp(1j * rng.uniform(0, 2 * np.pi)) * random_su2(rng)


def random_alpha(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return nc.ModeVector(v / np.linalg.norm(v))


def pair_coherent_mode2_q(zeta_abs, q):
    """Independent Mandel Q of the second mode from the coefficient series."""
    az2 = zeta_abs**2
    terms = [1.0 / math.factorial(q)]
    while terms[-1] > 1e-25 * terms[0] or len(terms) < 5:
        n = len(terms) - 1
        terms.append(terms[-1] * az2 / ((n + 1) * (n + 1 + q)))
        if len(terms) > 5000:
            break
    p = np.array(terms)
    p /= p.sum()
    n = np.arange(len(p), dtype=float)
    mean = float(p @ n)
    var = float(p @ n**2) - mean**2
    return (var - mean) / mean
