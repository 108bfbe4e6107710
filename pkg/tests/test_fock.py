"""Fock-space core: spaces, operators, state builders, and their invariants."""

import math

import numpy as np
import pytest

import nonclass as nc
from nonclass.errors import CutoffTooSmall, DimensionMismatch, OutOfRange

from conftest import marginal_moments


def test_space_dimensions_and_indexing():
    assert nc.make_space(0, 0).dim == 1
    assert nc.make_space(3, 3).dim == 16
    sp = nc.make_space(20, 20)
    assert sp.dim == 441
    assert sp.index(2, 5) == 2 * 21 + 5 == 47
    with pytest.raises(OutOfRange):
        sp.index(21, 0)
    with pytest.raises(ValueError):
        nc.make_space(-1, 2)


def test_annihilator_ladder_rule():
    sp = nc.make_space(1, 0)
    a1 = nc.annihilator(sp, 1).toarray()
    assert a1[sp.index(0, 0), sp.index(1, 0)] == pytest.approx(1.0)

    sp = nc.make_space(5, 5)
    a1 = nc.annihilator(sp, 1).toarray()
    # vacuum annihilation for every n2
    for n2 in range(6):
        assert np.all(a1[:, sp.index(0, n2)] == 0)
    assert a1[sp.index(2, 0), sp.index(3, 0)] == pytest.approx(math.sqrt(3))
    with pytest.raises(ValueError):
        nc.annihilator(sp, 3)


def test_commutation_relation_on_interior():
    # <[a_r, a_s^dag]> = delta_rs evaluated away from the truncation edge
    sp = nc.make_space(18, 18)
    st = nc.coherent_state(sp, 0.8, 0.5j)
    assert st.tail_mass < 1e-12
    interior = sp.interior_mask(2)
    ops = [nc.annihilator(sp, 1).matrix.toarray(),
           nc.annihilator(sp, 2).matrix.toarray()]
    rho = st.rho.toarray()
    proj = np.diag(interior.astype(float))
    for r in range(2):
        for s in range(2):
            comm = proj @ (ops[r] @ ops[s].conj().T - ops[s].conj().T @ ops[r]) @ proj
            val = np.trace(rho @ comm)
            expected = np.trace(rho @ proj) if r == s else 0.0
            assert abs(val - expected) < 1e-9


def test_expect_and_dimension_mismatch():
    sp = nc.make_space(20, 20)
    st = nc.coherent_state(sp, 1.0, 0.0)
    a1 = nc.annihilator(sp, 1)
    n1 = a1.dag() @ a1
    assert nc.expect(st, n1).real == pytest.approx(1.0, abs=1e-12)
    other = nc.annihilator(nc.make_space(9, 9), 1)
    with pytest.raises(DimensionMismatch):
        nc.expect(st, other)


class TestCoherent:
    def test_vacuum_on_smallest_space(self):
        st = nc.coherent_state(nc.make_space(0, 0), 0.0, 0.0)
        assert st.rho.toarray() == pytest.approx(np.array([[1.0]]))

    def test_poisson_law(self):
        st = nc.coherent_state(nc.make_space(20, 20), 1.0, 0.0)
        p = st.photon_probabilities()
        for n in range(6):
            assert p[n, 0] == pytest.approx(math.exp(-1.0) / math.factorial(n), abs=1e-12)

    def test_poissonian_variance(self):
        st = nc.coherent_state(nc.make_space(22, 22), 1.0, 1.0)
        for mode in (1, 2):
            mean, var = marginal_moments(st, mode)
            assert var - mean == pytest.approx(0.0, abs=1e-10)

    def test_cutoff_error(self):
        with pytest.raises(CutoffTooSmall):
            nc.coherent_state(nc.make_space(3, 3), 3.0, 0.0)


class TestNumber:
    def test_vacuum_projector(self):
        st = nc.number_state(nc.make_space(0, 0), 0, 0)
        assert st.rho.toarray() == pytest.approx(np.array([[1.0]]))

    def test_total_number(self):
        st = nc.number_state(nc.make_space(8, 8), 2, 1)
        assert nc.stokes_vector(st).n[0] == pytest.approx(3.0, abs=1e-12)

    def test_sharp_number_q(self):
        st = nc.number_state(nc.make_space(8, 8), 5, 0)
        assert nc.mandel_q(st, 1) == pytest.approx(-1.0, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            nc.number_state(nc.make_space(3, 3), 4, 0)


class TestThermal:
    def test_zero_temperature_limit(self):
        sp = nc.make_space(6, 6)
        st = nc.thermal_state(sp, 50.0)
        vac = nc.number_state(sp, 0, 0)
        dist = 0.5 * np.abs(st.rho.toarray() - vac.rho.toarray()).sum()
        assert dist < 1e-20

    def test_bose_einstein_mean_and_q(self):
        st = nc.thermal_state(nc.make_space(35, 35), 1.0)
        nbar = 1.0 / (math.e - 1.0)
        assert nbar == pytest.approx(0.5819767, abs=5e-8)
        for mode in (1, 2):
            mean, var = marginal_moments(st, mode)
            assert mean == pytest.approx(nbar, abs=1e-11)
            assert (var - mean) / mean == pytest.approx(nbar, abs=1e-9)

    def test_cutoff_error(self):
        with pytest.raises(CutoffTooSmall):
            nc.thermal_state(nc.make_space(5, 5), 0.5)
        with pytest.raises(ValueError):
            nc.thermal_state(nc.make_space(5, 5), -1.0)


class TestSqueezeUnitary:
    def test_identity_at_zero(self):
        sp = nc.make_space(10, 10)
        u = nc.squeeze_unitary(sp, 0.0, 0.0)
        assert np.abs(u.toarray() - np.eye(sp.dim)).max() < 1e-14

    def test_exact_unitarity(self):
        # the truncated generator is exactly antisymmetric, so the exponential
        # is orthogonal on the whole box, interior included
        sp = nc.make_space(14, 14)
        u = nc.squeeze_unitary(sp, 0.5, 0.2).matrix
        err = abs(u.conj().T @ u - np.eye(sp.dim)).max()
        assert err < 1e-10

    def test_per_mode_mean_photon_numbers(self):
        # applied to vacuum: <n_i> = sinh^2 of the per-mode parameter (a -+ b)/2
        sp = nc.make_space(20, 20)
        a_par, b_par = 0.5, 0.0
        u = nc.squeeze_unitary(sp, a_par, b_par)
        vac = np.zeros(sp.dim)
        vac[sp.index(0, 0)] = 1.0
        psi = u.matrix @ vac
        p = np.abs(psi.reshape(21, 21)) ** 2
        n = np.arange(21, dtype=float)
        mean1 = float(p.sum(axis=1) @ n)
        mean2 = float(p.sum(axis=0) @ n)
        assert mean1 == pytest.approx(math.sinh(0.25) ** 2, abs=1e-10)
        assert mean2 == pytest.approx(math.sinh(0.25) ** 2, abs=1e-10)
        total = mean1 + mean2
        assert total == pytest.approx(2 * math.sinh((a_par + b_par) / 2) ** 2, abs=1e-10)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            nc.squeeze_unitary(nc.make_space(5, 5), 0.1, 0.2)


class TestSqueezedVacuum:
    def test_zero_is_vacuum(self):
        sp = nc.make_space(10, 10)
        st = nc.squeezed_vacuum(sp, 0.0)
        vac = nc.number_state(sp, 0, 0)
        assert np.abs(st.rho.toarray() - vac.rho.toarray()).max() < 1e-14

    def test_even_photon_support(self):
        st = nc.squeezed_vacuum(nc.make_space(80, 80), 1.0)
        p = st.photon_probabilities()
        assert p[1::2, :].max() < 1e-30
        assert p[:, 1::2].max() < 1e-30

    def test_single_mode_squeezed_statistics(self):
        # per-mode squeeze parameter a: <n> = sinh^2 a, Var(n) = sinh^2(2a)/2
        st = nc.squeezed_vacuum(nc.make_space(50, 50), 0.5)
        for mode in (1, 2):
            mean, var = marginal_moments(st, mode)
            assert mean == pytest.approx(math.sinh(0.5) ** 2, rel=1e-10)
            assert var == pytest.approx(0.5 * math.sinh(1.0) ** 2, rel=1e-10)

    def test_purity(self):
        st = nc.squeezed_vacuum(nc.make_space(40, 40), 0.6)
        assert st.purity() == pytest.approx(1.0, abs=1e-10)

    def test_cutoff_error(self):
        with pytest.raises(CutoffTooSmall):
            nc.squeezed_vacuum(nc.make_space(10, 10), 1.0)


class TestSqueezedThermal:
    def test_zero_squeeze_is_thermal(self):
        sp = nc.make_space(30, 30)
        st = nc.squeezed_thermal(sp, 0.0, 0.0, 1.0)
        th = nc.thermal_state(sp, 1.0)
        assert np.abs(st.rho.toarray() - th.rho.toarray()).max() < 1e-13

    def test_zero_temperature_limit(self):
        sp = nc.make_space(30, 30)
        st = nc.squeezed_thermal(sp, 0.3, 0.0, 50.0)
        sv = nc.squeezed_vacuum(sp, 0.3)
        # trace distance via eigenvalues of the (Hermitian) difference
        diff = (st.rho - sv.rho).toarray()
        dist = 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum()
        assert dist < 1e-8

    def test_hermitian_unit_trace(self):
        st = nc.squeezed_thermal(nc.make_space(60, 60), 0.4, 0.1, 1.5)
        st.validate(check_spectrum=False)
        # spectrum is the thermal one transported by an exact unitary
        eigs = np.linalg.eigvalsh(st.rho.toarray())
        assert eigs.min() > -1e-10

    def test_cutoff_error(self):
        with pytest.raises(CutoffTooSmall):
            nc.squeezed_thermal(nc.make_space(12, 12), 1.0, 0.0, 1.0)


class TestPairCoherent:
    def test_zero_zeta_vacuum(self):
        sp = nc.make_space(8, 8)
        st = nc.pair_coherent(sp, 0.0, 0)
        vac = nc.number_state(sp, 0, 0)
        assert np.abs(st.rho.toarray() - vac.rho.toarray()).max() < 1e-14

    def test_zero_zeta_band_head(self):
        sp = nc.make_space(8, 8)
        st = nc.pair_coherent(sp, 0.0, 2)
        ref = nc.number_state(sp, 2, 0)
        assert np.abs(st.rho.toarray() - ref.rho.toarray()).max() < 1e-14

    def test_eigenvalue_relation(self):
        # a1 a2 |zeta, q> = zeta |zeta, q> on the interior block
        sp = nc.make_space(40, 40)
        zeta = 2.0
        st = nc.pair_coherent(sp, zeta, 0)
        a1 = nc.annihilator(sp, 1).matrix
        a2 = nc.annihilator(sp, 2).matrix
        # recover the vector from the rank-one density matrix
        rho = st.rho.toarray()
        k = int(np.argmax(np.abs(np.diag(rho))))
        psi = rho[:, k] / math.sqrt(rho[k, k].real)
        resid = (a1 @ (a2 @ psi)) - zeta * psi
        interior = sp.interior_mask(2)
        assert np.abs(resid[interior]).max() < 1e-9

    def test_band_structure(self):
        st = nc.pair_coherent(nc.make_space(25, 25), 1.0, 2)
        p = st.photon_probabilities()
        # support only on n1 = n2 + 2
        mask = np.ones_like(p, dtype=bool)
        for n in range(24):
            mask[n + 2, n] = False
        assert p[mask].max() < 1e-30
        # p(n+2, n) proportional to 1/(n! (n+2)!)
        expected = np.array([1.0 / (math.factorial(n) * math.factorial(n + 2))
                             for n in range(6)])
        got = np.array([p[n + 2, n] for n in range(6)])
        got /= got[0]
        expected /= expected[0]
        assert got == pytest.approx(expected, rel=1e-9)

    def test_cutoff_error(self):
        with pytest.raises(CutoffTooSmall):
            nc.pair_coherent(nc.make_space(6, 6), 3.0, 1)


class TestKerr:
    def test_zero_time_identity(self):
        sp = nc.make_space(18, 18)
        st = nc.coherent_state(sp, 1.0, 0.0)
        out = nc.kerr_evolve(st, 0.7, 0.3, 0.0)
        assert np.abs(out.rho.toarray() - st.rho.toarray()).max() < 1e-15

    def test_photon_distribution_invariant(self):
        sp = nc.make_space(20, 20)
        st = nc.coherent_state(sp, 1.2, 0.4)
        p0 = st.photon_probabilities()
        out = nc.kerr_evolve(st, 0.9, 2.3, 1.7)
        assert np.abs(out.photon_probabilities() - p0).max() < 1e-14

    def test_purity_preserved(self):
        sp = nc.make_space(20, 20)
        st = nc.coherent_state(sp, 1.0, 0.0)
        out = nc.kerr_evolve(st, 0.0, math.pi, 1.0)
        assert out.purity() == pytest.approx(1.0, abs=1e-12)
        # and the state genuinely changed (off-diagonal phases)
        assert np.abs(out.rho.toarray() - st.rho.toarray()).max() > 1e-3


ALL_FAMILIES = [
    ("coherent", 30, lambda sp: nc.coherent_state(sp, 1.0, 0.6j)),
    ("number", 30, lambda sp: nc.number_state(sp, 2, 1)),
    ("thermal", 35, lambda sp: nc.thermal_state(sp, 1.2)),
    ("squeezed_vacuum", 35, lambda sp: nc.squeezed_vacuum(sp, 0.4)),
    ("squeezed_thermal", 45, lambda sp: nc.squeezed_thermal(sp, 0.3, 0.0, 1.5)),
    ("pair_coherent", 30, lambda sp: nc.pair_coherent(sp, 1.5, 1)),
    ("kerr_coherent", 30,
     lambda sp: nc.kerr_evolve(nc.coherent_state(sp, 1.0, 0.0), 0.5, 1.1, 1.0)),
]

FAMILY_IDS = [f[0] for f in ALL_FAMILIES]


@pytest.mark.parametrize("name,base,build", ALL_FAMILIES, ids=FAMILY_IDS)
def test_builder_type_invariants(name, base, build):
    st = build(nc.make_space(base, base))
    st.validate(check_spectrum=st.space.dim <= 2000)
    assert st.tail_mass >= 0.0


@pytest.mark.parametrize("name,base,build", ALL_FAMILIES, ids=FAMILY_IDS)
def test_truncation_monotonicity(name, base, build):
    """Growing the box by 5 moves first/second moments by an amount controlled
    by the recorded tail mass (scaled by the moment's cutoff power)."""
    small = build(nc.make_space(base, base))
    big = build(nc.make_space(base + 5, base + 5))
    for mode in (1, 2):
        m_s, v_s = marginal_moments(small, mode)
        m_b, v_b = marginal_moments(big, mode)
        bound1 = 10.0 * small.tail_mass * (base + 1) + 1e-12
        bound2 = 10.0 * small.tail_mass * (base + 1) ** 2 + 1e-12
        assert abs(m_s - m_b) < bound1
        assert abs((v_s + m_s**2) - (v_b + m_b**2)) < bound2


@pytest.mark.parametrize("name,base,build", ALL_FAMILIES[:4], ids=FAMILY_IDS[:4])
def test_unitary_conjugation_preserves_purity(name, base, build):
    sp = nc.make_space(base, base)
    st = build(sp)
    pure_before = st.purity()
    out = nc.kerr_evolve(st, 0.3, 0.7, 2.0)
    assert out.purity() == pytest.approx(pure_before, abs=1e-10)
