from math import comb

import numpy as np
import pytest

from conftest import kron_sector_hamiltonian
from xxz_droplets import SectorTooLarge
from xxz_droplets.chain import ChainGeometry, PERIODIC, block_mask, config_wall_count
from xxz_droplets.oracle import (build_open_hamiltonian, build_periodic_blocks,
                                 build_periodic_dense, lowest_band, sector_basis,
                                 spectrum_json)


def test_sector_basis_is_sorted_and_complete():
    basis = sector_basis(8, 3)
    assert len(basis) == comb(8, 3)
    assert basis.masks == sorted(basis.masks)
    assert all(mask.bit_count() == 3 for mask in basis.masks)
    assert all(basis.masks[basis.index[mask]] == mask for mask in basis.masks)


def test_sector_cap_enforced():
    with pytest.raises(SectorTooLarge):
        sector_basis(20, 10, cap=1000)


@pytest.mark.parametrize("topology", ["open", "periodic"])
def test_sector_hamiltonian_matches_pauli_kronecker(topology):
    # independent construction: explicit Pauli matrices and tensor products
    n, m, eps = 6, 2, 0.07
    if topology == "open":
        h, basis = build_open_hamiltonian(n, m, eps, 1.25, 1.5)
        h_ref, masks = kron_sector_hamiltonian(n, m, eps, topology, 1.25, 1.5)
    else:
        h, basis = build_periodic_dense(n, m, eps)
        h_ref, masks = kron_sector_hamiltonian(n, m, eps, topology)
    perm = [basis.index[mask] for mask in masks]
    np.testing.assert_allclose(h[np.ix_(perm, perm)], h_ref, rtol=0, atol=1e-13)


def test_open_diagonal_at_zero_coupling():
    n, m = 8, 3
    h, basis = build_open_hamiltonian(n, m, 0.0)
    diag = np.diag(h)
    assert np.count_nonzero(h - np.diag(diag)) == 0
    ground_rows = np.nonzero(diag == diag.min())[0]
    assert diag.min() == 2.0
    assert list(ground_rows) == [basis.index[block_mask(m)]]


def test_off_diagonal_support_counts_walls():
    n, m, eps = 8, 3, 0.05
    h, basis = build_open_hamiltonian(n, m, eps)
    geom = ChainGeometry(n, "open")
    for i, config in enumerate(basis.masks):
        coupled = np.count_nonzero(h[i]) - 1  # minus the diagonal
        assert coupled == config_wall_count(geom, config)


def test_block_dimensions_partition_the_sector():
    n, m = 8, 3
    blocks = build_periodic_blocks(n, m, 0.05)
    assert sum(b.dim for b in blocks) == comb(n, m)
    assert [b.k_index for b in blocks] == list(range(n))


@pytest.mark.parametrize("n,m,eps", [(8, 2, 0.1), (6, 3, 0.05), (7, 3, 0.08)])
def test_block_union_equals_dense_spectrum(n, m, eps):
    blocks = build_periodic_blocks(n, m, eps)
    union = np.sort(np.concatenate([b.eigenvalues for b in blocks]))
    h, _ = build_periodic_dense(n, m, eps)
    dense = np.sort(np.linalg.eigvalsh(h))
    assert np.abs(union - dense).max() <= 1e-12


def test_one_magnon_blocks_are_diagonal():
    n, eps = 10, 0.05
    blocks = build_periodic_blocks(n, 1, eps)
    for b in blocks:
        assert b.dim == 1
        assert abs(b.eigenvalues[0] - (4.0 + 4.0 * eps * np.cos(b.k))) <= 1e-13


def test_zero_coupling_band_and_gap():
    n, m = 8, 3
    band = lowest_band(build_periodic_blocks(n, m, 0.0))
    np.testing.assert_array_equal(band.minima, np.full(n, 4.0))
    np.testing.assert_array_equal(band.second, np.full(n, 8.0))
    np.testing.assert_array_equal(band.gaps, np.full(n, 4.0))
    assert band.band_width == 0.0


def test_gap_stays_open_at_small_coupling():
    band = lowest_band(build_periodic_blocks(10, 3, 0.05))
    assert band.gaps.min() > 3.0


def test_coupling_sign_symmetry_recorded():
    # even rings and open chains: flipping the sign of eps relabels nothing
    # in the sector spectrum (sublattice rotation); verified, not assumed
    for n, m in [(8, 2), (6, 3)]:
        plus, _ = build_periodic_dense(n, m, 0.09)
        minus, _ = build_periodic_dense(n, m, -0.09)
        assert np.abs(np.sort(np.linalg.eigvalsh(plus))
                      - np.sort(np.linalg.eigvalsh(minus))).max() <= 1e-12
    plus, _ = build_open_hamiltonian(7, 3, 0.09)
    minus, _ = build_open_hamiltonian(7, 3, -0.09)
    assert np.abs(np.sort(np.linalg.eigvalsh(plus))
                  - np.sort(np.linalg.eigvalsh(minus))).max() <= 1e-12


def test_oracle_determinism():
    a = build_periodic_blocks(9, 3, 0.05)
    b = build_periodic_blocks(9, 3, 0.05)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.eigenvalues, y.eigenvalues)
        assert x.representatives == y.representatives


def test_block_eigenvectors_solve_the_block():
    blocks = build_periodic_blocks(8, 2, 0.05, with_vectors=True)
    b = blocks[3]
    assert b.eigenvectors is not None
    # reconstruct H v = lambda v for the lowest pair via completeness
    v = b.eigenvectors[:, 0]
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-12


def test_spectrum_json_shape():
    blocks = build_periodic_blocks(6, 2, 0.05)
    doc = spectrum_json(6, 2, 0.05, blocks)
    assert doc["N"] == 6 and doc["m"] == 2 and doc["epsilon"] == 0.05
    assert len(doc["blocks"]) == 6
    assert sum(b["dim"] for b in doc["blocks"]) == comb(6, 2)
    assert all(b["eigenvalues"] == sorted(b["eigenvalues"]) for b in doc["blocks"])
