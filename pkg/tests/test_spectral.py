import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from vaetsim.errors import PhaseDomainError
from vaetsim.linalg import eig_general
from vaetsim.model import DimerParams, dimer_hamiltonian
from vaetsim.spectral import (
    classify_delta_zero,
    dimer_eigensystem_sorted,
    dimer_spectrum_closed_form,
    donor_eigensystem,
    eigvec_coalescence,
    find_ep,
    match_to_closed_form,
    simultaneous_transition_count,
    slow_period,
    trace_exceptional_line,
    transition_matrix_elements,
)

# Reference eigenvalues for J=1, alpha=1, delta=8 at increasing gamma.
REFERENCE_SPECTRA = {
    0.0: (-7.062, 7.062, -9.062, 9.062),
    0.8: (-7.453, 7.453, -8.67, 8.67),
    0.9: (-7.611, 7.611, -8.511, 8.511),
    1.0: (-7.937, 7.937, -8.185, 8.185),
    1.02: (-8.061 + 0.156j, 8.061 - 0.156j, -8.061 - 0.156j, 8.061 + 0.156j),
    1.04: (-8.061 + 0.255j, 8.061 - 0.255j, -8.061 - 0.255j, 8.061 + 0.255j),
    1.06: (-8.061 + 0.326j, 8.061 - 0.326j, -8.061 - 0.326j, 8.061 + 0.326j),
    1.08: (-8.061 + 0.385j, 8.061 - 0.385j, -8.061 - 0.385j, 8.061 + 0.385j),
}

GAMMA_STAR = math.sqrt(65.0) / 8.0  # J sqrt(1 + alpha^2/delta^2) at (1, 8)


class TestClosedForm:
    @pytest.mark.parametrize("gamma", sorted(REFERENCE_SPECTRA))
    def test_reference_values(self, gamma):
        spec = dimer_spectrum_closed_form(DimerParams(gamma=gamma))
        got = spec.values
        expected = np.asarray(REFERENCE_SPECTRA[gamma])
        assert np.abs(got - expected).max() < 1e-3

    def test_branch_pairing(self):
        spec = dimer_spectrum_closed_form(DimerParams(gamma=1.05))
        assert abs(spec.lambda1 + spec.lambda2) < 1e-10
        assert abs(spec.lambda3 + spec.lambda4) < 1e-10

    def test_bare_tunneling(self):
        spec = dimer_spectrum_closed_form(
            DimerParams(gamma=0.0, alpha=0.0, delta=0.0)
        )
        assert_allclose(
            np.sort(spec.values.real), [-1, -1, 1, 1], atol=1e-12
        )

    def test_matches_numerics_random(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            p = DimerParams(
                gamma=rng.uniform(0, 2),
                alpha=rng.uniform(0, 2),
                delta=rng.uniform(0, 10),
            )
            spec = dimer_spectrum_closed_form(p)
            numeric = eig_general(dimer_hamiltonian(p)).values
            perm = match_to_closed_form(numeric, spec)
            assert np.abs(numeric[perm] - spec.values).max() < 1e-8

    def test_transition_accessor(self):
        spec = dimer_spectrum_closed_form(DimerParams(gamma=0.0))
        assert abs(spec.transition(4, 2) - (spec.lambda4 - spec.lambda2)) == 0
        assert_allclose(spec.transition(2, 1).real, 2 * abs(spec.lambda1),
                        atol=1e-12)


class TestDonorEigensystem:
    def test_hermitian_vectors(self):
        sys = donor_eigensystem(1.0, 0.0)
        assert_allclose(np.sort(sys.values.real), [-1, 1], atol=1e-14)
        for j, sign in ((0, -1.0), (1, 1.0)):
            v = sys.right_vectors[:, j]
            assert_allclose(v[0] / v[1], sign, atol=1e-12)

    def test_coalescence_at_ep(self):
        sys = donor_eigensystem(1.0, 1.0)
        v1, v2 = sys.right_vectors.T
        assert abs(abs(np.vdot(v1, v2)) - 1.0) < 1e-12
        assert_allclose(v1[0] / v1[1], -1j, atol=1e-12)

    def test_unbroken_values(self):
        sys = donor_eigensystem(1.0, 0.6)
        assert_allclose(np.sort(sys.values.real), [-0.8, 0.8], atol=1e-12)

    def test_residuals(self):
        for gamma in (0.0, 0.5, 1.0, 1.7):
            sys = donor_eigensystem(1.0, gamma)
            assert sys.residuals.max() < 1e-12


class TestFindEP:
    def test_reference_location(self):
        rep = find_ep(DimerParams())
        assert abs(rep.gamma_star - 1.00778) < 1e-4
        assert abs(rep.gamma_star - GAMMA_STAR) < 1e-12

    def test_monomer_limit(self):
        rep = find_ep(DimerParams(alpha=0.0))
        assert abs(rep.gamma_star - 1.0) < 1e-12

    def test_stronger_coupling(self):
        rep = find_ep(DimerParams(alpha=2.0))
        assert abs(rep.gamma_star - math.sqrt(1 + 4 / 64)) < 1e-10

    def test_classification(self):
        rep = find_ep(DimerParams())
        assert rep.order_n == 2
        assert rep.degeneracy_s == 2
        assert rep.transition_count == 4
        assert rep.coalesced_groups == ((1, 3), (2, 4))
        assert rep.eigvec_min_angle < 1e-3

    def test_certificate_gap(self):
        rep = find_ep(DimerParams())
        h = dimer_hamiltonian(DimerParams(gamma=rep.gamma_star))
        w = np.linalg.eigvals(h)
        gaps = np.abs(w[:, None] - w[None, :]) + np.eye(4)
        pairs = np.argwhere(gaps < 1e-6 * np.linalg.norm(h, 2))
        # two disjoint coalescing pairs
        assert len(pairs) == 4  # each pair counted twice
        members = set(pairs.flatten().tolist())
        assert len(members) == 4

    def test_delta_zero_rejected(self):
        with pytest.raises(PhaseDomainError):
            find_ep(DimerParams(delta=0.0, alpha=0.5))


class TestExceptionalLine:
    def test_endpoints_and_monotonicity(self):
        grid = np.linspace(0.0, 1.0, 11)
        line = trace_exceptional_line(8.0, grid)
        alphas = [a for a, _ in line.samples]
        gammas = [g for _, g in line.samples]
        assert abs(gammas[0] - 1.0) < 1e-12
        assert abs(gammas[-1] - GAMMA_STAR) < 1e-12
        assert all(b > a for a, b in zip(gammas, gammas[1:]))
        assert max(abs(g - 1.0) for g in gammas) < 0.01

    def test_weak_gap(self):
        line = trace_exceptional_line(2.0, [1.0])
        assert abs(line.samples[0][1] - math.sqrt(1.25)) < 1e-10

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            trace_exceptional_line(8.0, [0.5, 0.2])


class TestDeltaZero:
    def test_fourth_order_point(self):
        reports = classify_delta_zero(1.0, 0.0)
        assert len(reports) == 1
        rep = reports[0]
        assert rep.order_n == 4
        assert abs(rep.gamma_star - 1.0) < 1e-12
        assert rep.transition_count == 0
        w = np.linalg.eigvals(
            dimer_hamiltonian(DimerParams(gamma=1.0, alpha=0.0, delta=0.0))
        )
        assert np.abs(w).max() < 1e-6

    def test_branch_points_alpha_one(self):
        reports = classify_delta_zero(1.0, 1.0)
        assert sorted(r.gamma_star for r in reports) == [0.0, 2.0]
        assert all(r.order_n == 2 for r in reports)
        assert all(r.transition_count == 2 for r in reports)

    def test_branch_points_alpha_half(self):
        reports = classify_delta_zero(1.0, 0.5)
        assert_allclose(sorted(r.gamma_star for r in reports), [0.5, 1.5])

    def test_hermitian_crossing_exposed(self):
        # at alpha=J the lower branch point sits at gamma=0, where the
        # matrix is Hermitian: eigenvalues cross but eigenvectors stay
        # orthogonal, and the report's angle shows it
        reports = classify_delta_zero(1.0, 1.0)
        low = min(reports, key=lambda r: r.gamma_star)
        high = max(reports, key=lambda r: r.gamma_star)
        assert low.eigvec_min_angle > 0.1
        assert high.eigvec_min_angle < 1e-3


class TestCoalescence:
    def test_hermitian_angles_bounded_away(self):
        rep = eigvec_coalescence(DimerParams(gamma=0.0))
        assert min(rep.pair_angles.values()) > 0.1

    def test_angles_at_ep(self):
        rep = eigvec_coalescence(DimerParams(gamma=GAMMA_STAR))
        assert rep.pair_angles[(1, 3)] < 1e-3
        assert rep.pair_angles[(2, 4)] < 1e-3
        assert rep.pair_angles[(1, 2)] > 0.1

    def test_projection_match_at_ep(self):
        rep = eigvec_coalescence(DimerParams(gamma=GAMMA_STAR))
        proj = rep.projections
        assert np.abs(proj[:, 0] - proj[:, 2]).max() < 1e-3
        assert np.abs(proj[:, 1] - proj[:, 3]).max() < 1e-3


class TestTransitionElements:
    def test_hermitian_selection_rule(self):
        elems = transition_matrix_elements(DimerParams(gamma=0.0))
        assert elems[(4, 1)] < 1e-10
        assert elems[(3, 2)] < 1e-10

    def test_hermitian_allowed_pair(self):
        # exact value alpha / sqrt(alpha^2 + delta^2) from the two-block
        # reduction of the gamma = 0 dimer
        elems = transition_matrix_elements(DimerParams(gamma=0.0))
        expected = 1.0 / math.sqrt(65.0)
        assert abs(elems[(2, 1)] - expected) < 1e-12
        assert abs(elems[(4, 3)] - expected) < 1e-12

    def test_equality_near_ep(self):
        p = DimerParams(gamma=GAMMA_STAR - 1e-4)
        elems = transition_matrix_elements(p, allow_near_ep=True)
        four = [elems[(2, 1)], elems[(4, 3)], elems[(4, 1)], elems[(3, 2)]]
        spread = (max(four) - min(four)) / max(four)
        assert spread < 0.01

    def test_gamma_independence_of_allowed_pair(self):
        vals = []
        for gamma in np.linspace(0.0, 0.95, 20):
            e = transition_matrix_elements(DimerParams(gamma=gamma))
            vals.extend([e[(2, 1)], e[(4, 3)]])
        vals = np.asarray(vals)
        assert (vals.max() - vals.min()) / vals.max() < 0.02

    def test_near_ep_guard(self):
        with pytest.raises(PhaseDomainError):
            transition_matrix_elements(DimerParams(gamma=GAMMA_STAR))


class TestSlowPeriod:
    def test_reference_point(self):
        t_star = slow_period(DimerParams(gamma=0.8))
        lam42 = math.sqrt(65.36 + 2 * math.sqrt(24.04)) - math.sqrt(
            65.36 - 2 * math.sqrt(24.04)
        )
        assert_allclose(t_star, 2 * math.pi / lam42, rtol=1e-12)
        assert abs(t_star - 5.16) < 0.02

    def test_hermitian_limit(self):
        assert_allclose(slow_period(DimerParams(gamma=0.0)), math.pi,
                        atol=2e-4)

    def test_broken_phase_rejected(self):
        with pytest.raises(PhaseDomainError):
            slow_period(DimerParams(gamma=1.05))

    def test_inverse_square_root_law(self):
        # asymptotic coefficient 2 pi sqrt(xi*) / (2 delta sqrt(2 gamma*))
        xi_star = 1 + 1 - GAMMA_STAR**2 + 64
        c_expected = (
            2 * math.pi * math.sqrt(xi_star)
            / (2 * 8.0 * math.sqrt(2 * GAMMA_STAR))
        )
        assert abs(c_expected - 2.23) < 0.05
        for gamma in (1.0, 1.005):
            t_star = slow_period(DimerParams(gamma=gamma))
            guide = c_expected / math.sqrt(GAMMA_STAR - gamma)
            assert abs(t_star - guide) / t_star < 0.05


class TestTransitionCount:
    def test_degenerate_second_order(self):
        assert simultaneous_transition_count(2, 2, 4) == 4

    def test_full_spectrum_ep(self):
        assert simultaneous_transition_count(1, 4, 4) == 0

    def test_partial_nondegenerate(self):
        assert simultaneous_transition_count(1, 2, 4) == 2
        assert simultaneous_transition_count(1, 3, 4) == 3


class TestSortedEigensystem:
    def test_vectors_match_branch_labels(self):
        p = DimerParams(gamma=0.5)
        spec, vectors = dimer_eigensystem_sorted(p)
        h = dimer_hamiltonian(p)
        for j in range(4):
            v = vectors[:, j]
            lam = spec.values[j]
            assert np.linalg.norm(h @ v - lam * v) < 1e-8
