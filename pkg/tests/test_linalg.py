import numpy as np
import pytest

from renyi_ent import (
    HermitianOperator,
    Partition,
    density,
    eig_hermitian,
    load_operator_json,
    matrix_power,
    partial_trace,
    partial_transpose,
    permute_factors,
    pure_density,
    random_density,
    save_operator_json,
    support_projector,
    tensor_product,
    tensor_product_merged,
)

PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)


def herm(matrix, dims):
    return HermitianOperator(np.asarray(matrix, dtype=complex), dims)


class TestTypes:
    def test_partition_validation(self):
        with pytest.raises(ValueError):
            Partition(())
        with pytest.raises(ValueError):
            Partition((2, 0))
        assert Partition((2, 3)).total_dim == 6

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            herm([[0, 1], [0, 0]], (2,))

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            herm(np.eye(3), (2,))

    def test_density_rejects_negative(self):
        with pytest.raises(ValueError):
            density(np.diag([1.5, -0.5]), (2,))

    def test_density_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            density(np.diag([0.6, 0.6]), (2,))

    def test_entries_immutable(self):
        op = herm(np.eye(2), (2,))
        with pytest.raises(ValueError):
            op.entries[0, 0] = 5.0


class TestEig:
    def test_identity(self):
        dec = eig_hermitian(herm(np.eye(2), (2,)))
        assert np.allclose(dec.eigenvalues, [1, 1])
        assert np.allclose(np.abs(dec.vectors), np.eye(2))

    def test_diagonal_sorted_ascending(self):
        dec = eig_hermitian(herm(np.diag([3.0, 1.0]), (2,)))
        assert np.allclose(dec.eigenvalues, [1, 3])

    def test_pauli_x(self):
        dec = eig_hermitian(herm([[0, 1], [1, 0]], (2,)))
        assert np.allclose(dec.eigenvalues, [-1, 1])

    @pytest.mark.parametrize("seed", range(5))
    def test_reconstruction_and_unitarity(self, seed):
        rho = random_density(6, 6, seed)
        dec = eig_hermitian(rho)
        rebuilt = (dec.vectors * dec.eigenvalues) @ dec.vectors.conj().T
        scale = 1.0 + np.max(np.abs(rho.entries))
        assert np.max(np.abs(rebuilt - rho.entries)) <= 1e-10 * scale
        gram = dec.vectors.conj().T @ dec.vectors
        assert np.max(np.abs(gram - np.eye(6))) <= 1e-10


class TestMatrixPower:
    def test_generalized_inverse_ignores_kernel(self):
        out = matrix_power(herm(np.diag([4.0, 0.0]), (2,)), -1.0)
        assert np.allclose(out.entries, np.diag([0.25, 0.0]))

    def test_square_root_diagonal(self):
        out = matrix_power(herm(np.diag([4.0, 1.0]), (2,)), 0.5)
        assert np.allclose(out.entries, np.diag([2.0, 1.0]))

    def test_zeroth_power_is_support_projector(self):
        rho = random_density(5, 3, seed=1)
        p0 = matrix_power(rho, 0.0)
        proj = support_projector(rho)
        assert np.allclose(p0.entries, proj.entries, atol=1e-12)

    def test_all_zero_with_negative_power(self):
        out = matrix_power(herm(np.zeros((3, 3)), (3,)), -1.0)
        assert np.allclose(out.entries, 0.0)

    def test_invalid_rel_cut(self):
        with pytest.raises(ValueError):
            matrix_power(herm(np.eye(2), (2,)), 1.0, rel_cut=0.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_power_addition_on_support(self, seed):
        rho = random_density(5, 3, seed=seed)
        a = matrix_power(rho, 0.7).entries @ matrix_power(rho, 0.6).entries
        b = matrix_power(rho, 1.3).entries
        assert np.max(np.abs(a - b)) <= 1e-8

    @pytest.mark.parametrize("seed", range(8))
    def test_inverse_times_power_is_projector(self, seed):
        rho = random_density(5, 3, seed=seed)
        prod = matrix_power(rho, -0.9).entries @ matrix_power(rho, 0.9).entries
        assert np.max(np.abs(prod - support_projector(rho).entries)) <= 1e-8


class TestSupportProjector:
    def test_diagonal(self):
        assert np.allclose(
            support_projector(herm(np.diag([1.0, 0.0]), (2,))).entries, np.diag([1.0, 0.0])
        )

    def test_full_rank_is_identity(self):
        rho = random_density(4, 4, seed=3)
        assert np.allclose(support_projector(rho).entries, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("rank", [1, 2, 4])
    def test_rank_matches(self, rank):
        rho = random_density(4, rank, seed=9)
        proj = support_projector(rho)
        assert round(proj.trace()) == rank


class TestTensorOps:
    def test_identity_kron(self):
        out = tensor_product(herm(np.eye(2), (2,)), herm(np.eye(2), (2,)))
        assert out.dims == (2, 2)
        assert np.allclose(out.entries, np.eye(4))

    def test_rank_one_placement(self):
        zero = herm(np.diag([1.0, 0.0]), (2,))
        one = herm(np.diag([0.0, 1.0]), (2,))
        out = tensor_product(zero, one)
        expect = np.zeros((4, 4))
        expect[1, 1] = 1.0
        assert np.allclose(out.entries, expect)

    def test_merged_interleaves_factors(self):
        # (A B) (x) (A' B') merged to (AA' : BB') must physically permute B and A'
        rng = np.random.default_rng(0)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        ha = herm((a + a.conj().T) / 2, (2, 2))
        hb = herm((b + b.conj().T) / 2, (2, 2))
        merged = tensor_product_merged(ha, hb)
        assert merged.dims == (4, 4)
        manual = np.kron(ha.entries, hb.entries).reshape([2] * 8)
        manual = manual.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
        assert np.allclose(merged.entries, manual)

    def test_merged_rejects_party_mismatch(self):
        with pytest.raises(ValueError):
            tensor_product_merged(herm(np.eye(2), (2,)), herm(np.eye(4), (2, 2)))

    def test_permute_factors_roundtrip(self):
        rho = random_density(8, 8, seed=5, dims=(2, 2, 2))
        perm = permute_factors(rho, (2, 0, 1))
        back = permute_factors(perm, (1, 2, 0))
        assert np.allclose(back.entries, rho.entries)

    def test_permute_rejects_bad_perm(self):
        with pytest.raises(ValueError):
            permute_factors(random_density(4, 4, 0, dims=(2, 2)), (0, 0))


class TestPartialTrace:
    def test_maximally_entangled_marginal(self):
        rho = pure_density(PHI_PLUS, (2, 2))
        out = partial_trace(rho, [0])
        assert np.allclose(out.entries, np.eye(2) / 2)

    def test_product_split(self):
        a = random_density(2, 2, seed=11)
        b = random_density(3, 3, seed=12)
        joint = tensor_product(a, b)
        assert np.allclose(partial_trace(joint, [0]).entries, a.entries, atol=1e-12)
        assert np.allclose(partial_trace(joint, [1]).entries, b.entries, atol=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_preserved(self, seed):
        rho = random_density(12, 12, seed=seed, dims=(2, 2, 3))
        out = partial_trace(rho, [1])
        assert abs(out.trace() - 1.0) <= 1e-12

    def test_composition(self):
        rho = random_density(12, 12, seed=7, dims=(2, 2, 3))
        two_step = partial_trace(partial_trace(rho, [0, 1]), [0])
        one_step = partial_trace(rho, [0])
        assert np.allclose(two_step.entries, one_step.entries)

    def test_recovers_factor_scaled(self):
        a = herm(np.diag([2.0, 1.0]), (2,))  # trace 3
        b = herm(np.diag([0.5, 0.5]), (2,))  # trace 1
        joint = tensor_product(a, b)
        assert np.allclose(partial_trace(joint, [1]).entries, 3.0 * b.entries)

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError):
            partial_trace(random_density(4, 4, 0, dims=(2, 2)), [])


class TestPartialTranspose:
    def test_product_state_stays_psd(self):
        a = random_density(2, 2, seed=21)
        b = random_density(2, 2, seed=22)
        joint = tensor_product(a, b)
        flipped = partial_transpose(joint, [1])
        assert np.linalg.eigvalsh(flipped.entries)[0] >= -1e-12
        assert np.allclose(flipped.entries, np.kron(a.entries, b.entries.T))

    def test_bell_state_negative_eigenvalue(self):
        rho = pure_density(PHI_PLUS, (2, 2))
        flipped = partial_transpose(rho, [1])
        assert abs(np.linalg.eigvalsh(flipped.entries)[0] - (-0.5)) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_involution(self, seed):
        rho = random_density(6, 6, seed=seed, dims=(2, 3))
        twice = partial_transpose(partial_transpose(rho, [0]), [0])
        assert np.allclose(twice.entries, rho.entries)


class TestRandomDensity:
    def test_deterministic(self):
        a = random_density(4, 2, seed=42)
        b = random_density(4, 2, seed=42)
        assert np.array_equal(a.entries, b.entries)

    def test_valid_state(self):
        rho = random_density(5, 5, seed=1)
        assert abs(rho.op.trace() - 1.0) <= 1e-12
        assert np.linalg.eigvalsh(rho.entries)[0] >= -1e-12

    def test_full_rank(self):
        rho = random_density(5, 5, seed=2)
        assert np.linalg.matrix_rank(rho.entries) == 5

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            random_density(3, 4, seed=0)


class TestMatrixFiles:
    def test_round_trip(self, tmp_path):
        rho = random_density(4, 4, seed=8, dims=(2, 2))
        path = str(tmp_path / "rho.json")
        save_operator_json(rho, path)
        loaded = load_operator_json(path)
        assert loaded.dims == (2, 2)
        assert np.allclose(loaded.entries, rho.entries)

    def test_rejects_missing_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dims": [2], "re": [[1, 0], [0, 1]]}')
        with pytest.raises(ValueError):
            load_operator_json(str(path))

    def test_rejects_non_hermitian_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"dims": [2], "re": [[0, 1], [0, 0]], "im": [[0, 0], [0, 0]]}')
        with pytest.raises(ValueError):
            load_operator_json(str(path))
