import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vaetsim.model import (
    BasisLabel,
    DimerParams,
    DissipationParams,
    FockTruncationWarning,
    VibrationParams,
    basis_index,
    basis_label,
    dimer_hamiltonian,
    donor_hamiltonian,
    effective_single_excitation_hamiltonian,
    full_hamiltonian,
    lowering_operator,
    number_operator,
    passive_pt_offset,
    uphill_condition,
)
from vaetsim.linalg import kron
from vaetsim.model import IDENTITY_2, SIGMA_X, SIGMA_Z


def eigvals_sorted(h):
    w = np.linalg.eigvals(h)
    return np.sort_complex(w)


class TestParams:
    def test_j_positive_required(self):
        with pytest.raises(ValueError):
            DimerParams(j_tunnel=0.0)

    def test_negative_rates_rejected(self):
        with pytest.raises(ValueError):
            DimerParams(gamma=-0.1)
        with pytest.raises(ValueError):
            DissipationParams(gamma_a=-1e-9)

    def test_fock_dim_floor(self):
        with pytest.raises(ValueError):
            VibrationParams(fock_dim=1)

    def test_mean_occupation(self):
        v = VibrationParams(nu=16.12, kbt=40.0)
        assert_allclose(v.mean_occupation, 1.0 / math.expm1(16.12 / 40.0))
        assert VibrationParams(kbt=0.0).mean_occupation == 0.0

    def test_fock_adequacy_flag(self):
        assert VibrationParams(nu=16.12, kbt=40.0, fock_dim=50).fock_adequate
        assert not VibrationParams(nu=1.0, kbt=40.0, fock_dim=50).fock_adequate


class TestBasisLabels:
    def test_round_trip(self):
        for idx in range(4 * 5):
            assert basis_index(basis_label(idx, 5), 5) == idx

    def test_fixed_ordering(self):
        assert basis_index(BasisLabel("e", "e"), 1) == 0
        assert basis_index(BasisLabel("e", "g"), 1) == 1
        assert basis_index(BasisLabel("g", "e"), 1) == 2
        assert basis_index(BasisLabel("g", "g"), 1) == 3

    def test_phonon_out_of_range(self):
        with pytest.raises(ValueError):
            basis_index(BasisLabel("e", "g", phonon_number=5), 5)


class TestDimerHamiltonian:
    def test_explicit_matrix(self):
        p = DimerParams(j_tunnel=1.0, gamma=0.3, alpha=0.7, delta=2.0)
        h = dimer_hamiltonian(p)
        expected = np.array(
            [
                [2 - 0.3j, 0, 1, 0.7],
                [0, -2 - 0.3j, 0.7, 1],
                [1, 0.7, 2 + 0.3j, 0],
                [0.7, 1, 0, -2 + 0.3j],
            ],
            dtype=complex,
        )
        assert_allclose(h, expected, atol=1e-15)

    def test_decoupled_eigenvalues(self):
        # alpha=0: sums of monomer energies -> {+/-7, +/-9} at delta=8
        h = dimer_hamiltonian(DimerParams(gamma=0.0, alpha=0.0, delta=8.0))
        assert_allclose(np.sort(np.linalg.eigvals(h).real), [-9, -7, 7, 9],
                        atol=1e-12)

    def test_reference_hermitian_row(self):
        h = dimer_hamiltonian(DimerParams(gamma=0.0))
        got = np.sort(np.linalg.eigvals(h).real)
        assert_allclose(got, [-9.062, -7.062, 7.062, 9.062], atol=1e-3)

    def test_reference_broken_row(self):
        h = dimer_hamiltonian(DimerParams(gamma=1.02))
        got = np.linalg.eigvals(h)
        expected = np.array(
            [-8.061 + 0.156j, 8.061 - 0.156j, -8.061 - 0.156j, 8.061 + 0.156j]
        )
        for e in expected:
            assert np.abs(got - e).min() < 1.5e-3

    def test_plain_transpose_symmetry(self):
        h = dimer_hamiltonian(DimerParams(gamma=0.9, alpha=1.3, delta=4.0))
        assert np.abs(h - h.T).max() == 0.0

    def test_pt_symmetry(self):
        h = dimer_hamiltonian(DimerParams(gamma=0.8))
        parity = kron(SIGMA_X, IDENTITY_2)
        assert np.abs(parity @ h.conj() @ parity - h).max() < 1e-14

    def test_hermitian_limit(self):
        h = dimer_hamiltonian(DimerParams(gamma=0.0))
        assert np.abs(h - h.conj().T).max() < 1e-14


class TestDonorHamiltonian:
    def test_hermitian_limit(self):
        w = eigvals_sorted(donor_hamiltonian(1.0, 0.0))
        assert_allclose(w.real, [-1, 1], atol=1e-14)

    def test_second_order_ep(self):
        w = np.linalg.eigvals(donor_hamiltonian(1.0, 1.0))
        assert np.abs(w).max() < 1e-7

    def test_broken_phase(self):
        w = np.linalg.eigvals(donor_hamiltonian(1.0, 1.5))
        assert_allclose(np.sort(w.imag), [-math.sqrt(1.25), math.sqrt(1.25)],
                        atol=1e-12)
        assert np.abs(w.real).max() < 1e-12


class TestFullHamiltonian:
    def test_decoupled_block_structure(self):
        p = DimerParams(gamma=0.4)
        v = VibrationParams(nu=16.12, kappa=0.0, kbt=0.0, fock_dim=3)
        h = full_hamiltonian(p, v)
        base = kron(dimer_hamiltonian(p), np.eye(3))
        assert_allclose(h - 16.12 * kron(np.eye(4), number_operator(3)), base,
                        atol=1e-14)

    def test_number_operator_diagonal(self):
        n = number_operator(6)
        assert_allclose(np.diag(n).real, np.arange(6))

    def test_ladder_truncation(self):
        a = lowering_operator(4)
        ad = a.conj().T
        top = np.zeros(4); top[3] = 1.0
        assert np.abs(ad @ top).max() == 0.0  # creation out of the top is cut

    def test_number_conservation_when_decoupled(self):
        p = DimerParams(gamma=0.7)
        v = VibrationParams(kappa=0.0, fock_dim=4)
        h = full_hamiltonian(p, v)
        n_op = kron(np.eye(4), number_operator(4))
        comm = h @ n_op - n_op @ h
        assert np.abs(comm).max() < 1e-12

    def test_ladder_shift_structure(self):
        # weak-coupling check: real parts of the lowest eigenvalues track
        # the dimer levels plus the phonon ladder to within the coupling
        p = DimerParams(gamma=0.0)
        v = VibrationParams(nu=16.12, kappa=0.3, kbt=40.0, fock_dim=50)
        h = full_hamiltonian(p, v)
        got = np.sort(np.linalg.eigvals(h).real)[:8]
        dimer = np.sort(np.linalg.eigvals(dimer_hamiltonian(p)).real)
        ladder = np.sort(
            np.concatenate([dimer + 16.12 * n for n in range(3)])
        )[:8]
        assert np.abs(got - ladder).max() < 0.3

    def test_truncation_warning(self):
        v = VibrationParams(nu=1.0, kbt=40.0, fock_dim=50)
        with pytest.warns(FockTruncationWarning):
            full_hamiltonian(DimerParams(), v)


class TestEffectiveSingleExcitation:
    def closed_form(self, p, v):
        core = np.sqrt(complex(p.alpha**2 - (p.gamma - 1j * p.delta) ** 2))
        vals = []
        for n in range(v.fock_dim):
            vals.extend([v.nu * n + core, v.nu * n - core])
        return np.sort_complex(np.asarray(vals))

    def test_closed_form_at_zero_coupling(self):
        p = DimerParams(gamma=0.5, alpha=1.0, delta=8.0)
        v = VibrationParams(nu=3.0, kappa=0.0, fock_dim=4)
        h = effective_single_excitation_hamiltonian(p, v)
        got = np.sort_complex(np.linalg.eigvals(h))
        assert_allclose(got, self.closed_form(p, v), atol=1e-10)

    def test_ep_at_gamma_equals_alpha(self):
        p = DimerParams(gamma=1.0, alpha=1.0, delta=0.0)
        v = VibrationParams(nu=5.0, kappa=0.0, fock_dim=3)
        h = effective_single_excitation_hamiltonian(p, v)
        w = np.linalg.eigvals(h)
        # each ladder level is doubly degenerate at the EP
        for n in range(3):
            assert np.sort(np.abs(w - 5.0 * n))[1] < 1e-7

    def test_hermitian_decoupled(self):
        p = DimerParams(gamma=0.0, alpha=0.8, delta=0.0)
        v = VibrationParams(nu=4.0, kappa=0.0, fock_dim=2)
        w = np.linalg.eigvals(effective_single_excitation_hamiltonian(p, v))
        assert_allclose(
            np.sort(w.real), [-0.8, -0.8 + 4.0, 0.8, 0.8 + 4.0], atol=1e-12
        )


class TestPassiveOffset:
    def test_zero_offset_is_identity(self):
        h = donor_hamiltonian(1.0, 0.7)
        assert_allclose(passive_pt_offset(h, 0.0), h)

    def test_ep_eigenvalues_shift(self):
        h = donor_hamiltonian(1.0, 1.0)
        w = np.linalg.eigvals(passive_pt_offset(h, 1.0))
        assert np.abs(w - (-1j)).max() < 1e-7

    def test_trace_shift(self):
        h = donor_hamiltonian(1.0, 0.3)
        out = passive_pt_offset(h, 0.825)
        assert_allclose(np.trace(out), np.trace(h) - 2j * 0.825)


class TestUphillCondition:
    def test_reference_parameters(self):
        ok, margin = uphill_condition(DimerParams())
        assert ok and abs(margin - 6.5) < 1e-12

    def test_boundary(self):
        ok, margin = uphill_condition(DimerParams(delta=1.5))
        assert not ok and abs(margin) < 1e-12

    def test_gapless(self):
        ok, _ = uphill_condition(DimerParams(alpha=0.0, delta=0.0))
        assert not ok
