import numpy as np
import pytest
from numpy.testing import assert_allclose

from vaetsim.errors import SizingError
from vaetsim.linalg import EIG_RESIDUAL_RTOL, MAX_DIM, eig_general, expm, kron

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def random_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


class TestKron:
    def test_identity(self):
        assert_allclose(kron(I2, I2), np.eye(4))

    def test_sigma_z_with_identity(self):
        assert_allclose(kron(SZ, I2), np.diag([1, 1, -1, -1]).astype(complex))

    def test_double_flip_maps_eg_to_ge(self):
        # hand-expanded 4x4 oracle for sigma_x (x) sigma_x
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 3] = expected[3, 0] = 1.0
        expected[1, 2] = expected[2, 1] = 1.0
        assert_allclose(kron(SX, SX), expected)
        eg = np.array([0, 1, 0, 0], dtype=complex)
        ge = np.array([0, 0, 1, 0], dtype=complex)
        assert_allclose(kron(SX, SX) @ eg, ge)

    def test_associativity(self):
        rng = np.random.default_rng(7)
        a, b, c = (random_complex(rng, 3), random_complex(rng, 2),
                   random_complex(rng, 4))
        left = kron(kron(a, b), c)
        right = kron(a, kron(b, c))
        assert left.shape == right.shape
        assert np.abs(left - right).max() < 1e-14 * np.abs(left).max()

    def test_dimension_cap(self):
        big = np.eye(MAX_DIM // 2 + 1)
        with pytest.raises(SizingError):
            kron(big, np.eye(3))

    def test_rejects_non_finite(self):
        bad = np.array([[np.nan, 0], [0, 1]])
        with pytest.raises(ValueError):
            kron(bad, I2)


class TestEigGeneral:
    def test_diagonal(self):
        sys = eig_general(np.diag([1.0, 2.0]))
        assert_allclose(sorted(sys.values.real), [1.0, 2.0], atol=1e-14)
        assert np.abs(sys.values.imag).max() < 1e-14

    def test_reference_dimer_eigenvalues(self):
        # gamma=0, alpha=1, delta=8: +/-7.062, +/-9.062
        h = kron(SX, I2) + 8 * kron(I2, SZ) + kron(SX, SX)
        sys = eig_general(h)
        got = np.sort(sys.values.real)
        assert_allclose(got, [-9.0623, -7.0622, 7.0622, 9.0623], atol=1e-3)

    def test_donor_half_gamma(self):
        h = np.array([[-0.5j, 1.0], [1.0, 0.5j]])
        sys = eig_general(h)
        expected = np.sqrt(0.75)
        assert_allclose(np.sort(sys.values.real), [-expected, expected],
                        atol=1e-12)

    def test_residual_bound_random(self):
        rng = np.random.default_rng(42)
        for n in (2, 5, 17, 60):
            h = random_complex(rng, n)
            sys = eig_general(h)
            scale = np.linalg.norm(h, 2)
            assert sys.residuals.max() <= EIG_RESIDUAL_RTOL * scale
            assert_allclose(np.linalg.norm(sys.right_vectors, axis=0), 1.0,
                            atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            eig_general(np.ones((2, 3)))


class TestExpm:
    def test_zero(self):
        assert_allclose(expm(np.zeros((3, 3))), np.eye(3))

    def test_pauli_rotation(self):
        got = expm(-1j * np.pi / 2 * SX)
        assert_allclose(got, -1j * SX, atol=1e-14)

    def test_broken_phase_growth_vs_eigendecomposition(self):
        # donor at gamma/J = 1.5 is diagonalizable; compare propagators
        gamma = 1.5
        h = np.array([[-1j * gamma, 1.0], [1.0, 1j * gamma]])
        w, v = np.linalg.eig(h)
        oracle = v @ np.diag(np.exp(-1j * w * 1.0)) @ np.linalg.inv(v)
        assert_allclose(expm(-1j * h * 1.0), oracle, atol=1e-12)
        growth = np.linalg.norm(expm(-1j * h * 1.0), 2)
        assert growth > np.exp(np.sqrt(gamma**2 - 1) * 1.0) - 1e-6

    def test_inverse_pairing(self):
        rng = np.random.default_rng(3)
        for n in (2, 8, 25):
            a = random_complex(rng, n)
            a *= min(1.0, 20.0 / np.linalg.norm(a, 2))
            prod = expm(a) @ expm(-a)
            assert np.linalg.norm(prod - np.eye(n)) < 1e-10

    def test_hermitian_gives_unitary(self):
        rng = np.random.default_rng(5)
        a = random_complex(rng, 12)
        h = 0.5 * (a + a.conj().T)
        u = expm(-1j * h * 0.7)
        assert np.linalg.norm(u @ u.conj().T - np.eye(12)) < 1e-10

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            expm(np.ones((2, 4)))
