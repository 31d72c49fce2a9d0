"""Exact-diagonalization ground truth for the m-down-spin sector.

Builds the sector Hamiltonian of the anisotropic chain

    H_open     = sum_{j=1}^{N-1} [1 - s^z_j s^z_{j+1} + eps (s^x_j s^x_{j+1} + s^y_j s^y_{j+1})]
                 + A (1 + s^z_1) + B (1 - s^z_N)
    H_periodic = sum_{j=1}^{N}   [1 - s^z_j s^z_{j+1} + eps (s^x_j s^x_{j+1} + s^y_j s^y_{j+1})]

in the basis of down-spin site sets.  Diagonal entries are twice the wall
count plus boundary terms; the transverse term flips an anti-parallel pair
and contributes an off-diagonal matrix element 2*eps.  With this sign the
sector eigenvectors carry the same coefficient signs as the fixed-point
expansions; on open chains and even rings the spectrum is identical to the
opposite-sign convention (sublattice rotation), which is also checked
empirically by the test suite rather than assumed.

The periodic Hamiltonian commutes with translation, so it splits into
momentum blocks built from translation orbits; each block is diagonalized
densely.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .chain import (ChainGeometry, OPEN, PERIODIC, boundary_bonds,
                    config_wall_count, translate)
from .errors import SectorTooLarge

DEFAULT_SECTOR_CAP = 200_000


@dataclass
class SectorBasis:
    """All C(N, m) down-spin site sets, ordered ascending by canonical key."""

    n_sites: int
    m: int
    masks: list[int]
    index: dict[int, int]

    def __len__(self):
        return len(self.masks)


def sector_basis(n_sites: int, m: int, cap: int = DEFAULT_SECTOR_CAP) -> SectorBasis:
    if not 0 < m < n_sites:
        raise ValueError(f"need 0 < m < N, got m={m}, N={n_sites}")
    dim = comb(n_sites, m)
    if dim > cap:
        raise SectorTooLarge(n_sites, m, dim, cap)
    masks = []
    # Gosper's hack: next integer with the same popcount
    x = (1 << m) - 1
    limit = 1 << n_sites
    while x < limit:
        masks.append(x)
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r
    return SectorBasis(n_sites, m, masks, {s: i for i, s in enumerate(masks)})


def _diag_open(geom: ChainGeometry, config: int, boundary_a: float, boundary_b: float) -> float:
    val = 2.0 * config_wall_count(geom, config)
    if not config & 1:  # site 1 up costs 2A
        val += 2.0 * boundary_a
    if (config >> (geom.n_sites - 1)) & 1:  # site N down costs 2B
        val += 2.0 * boundary_b
    return val


def build_open_hamiltonian(n_sites, m, epsilon, boundary_a=1.0, boundary_b=1.0,
                           cap=DEFAULT_SECTOR_CAP):
    """Dense real-symmetric sector Hamiltonian of the open chain.

    Returns (H, basis).  Each basis state couples to exactly one state per
    domain wall, with matrix element 2*eps.
    """
    geom = ChainGeometry(n_sites, OPEN)
    basis = sector_basis(n_sites, m, cap)
    dim = len(basis)
    h = np.zeros((dim, dim))
    for col, config in enumerate(basis.masks):
        h[col, col] = _diag_open(geom, config, boundary_a, boundary_b)
        for j in boundary_bonds(geom, config):
            row = basis.index[config ^ geom.bond_mask(j)]
            h[row, col] += 2.0 * epsilon
    return h, basis


def build_periodic_dense(n_sites, m, epsilon, cap=DEFAULT_SECTOR_CAP):
    """Dense sector Hamiltonian of the ring, with no use of translation symmetry.

    Serves as a second, independent route to the sector spectrum for
    cross-checking the momentum-block construction.
    """
    geom = ChainGeometry(n_sites, PERIODIC)
    basis = sector_basis(n_sites, m, cap)
    dim = len(basis)
    h = np.zeros((dim, dim))
    for col, config in enumerate(basis.masks):
        h[col, col] = 2.0 * config_wall_count(geom, config)
        for j in boundary_bonds(geom, config):
            row = basis.index[config ^ geom.bond_mask(j)]
            h[row, col] += 2.0 * epsilon
    return h, basis


@dataclass
class SpectrumBlock:
    """Eigenvalues (ascending) of one momentum block of the periodic sector."""

    k_index: int
    k: float
    representatives: list[int]
    orbit_sizes: list[int]
    dim: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def _orbits(geom: ChainGeometry, basis: SectorBasis):
    """Translation orbits as (representative, period); rep = smallest translate."""
    n = geom.n_sites
    seen = set()
    orbits = []
    member = {}
    for mask in basis.masks:  # ascending scan => first member seen is the minimum
        if mask in seen:
            continue
        period = n
        for r in range(1, n):
            if translate(geom, mask, r) == mask:
                period = r
                break
        for r in range(period):
            t = translate(geom, mask, r)
            seen.add(t)
            member[t] = (mask, r)  # t = rep + r
        orbits.append((mask, period))
    return orbits, member


def build_periodic_blocks(n_sites, m, epsilon, cap=DEFAULT_SECTOR_CAP,
                          with_vectors=False) -> list[SpectrumBlock]:
    """Momentum blocks of the periodic sector Hamiltonian.

    An orbit of period p enters the block of momentum index j iff j*p = 0
    (mod N); summed over j the block dimensions recover C(N, m).  Matrix
    elements between normalized momentum states of orbits with periods
    p_col, p_row pick up a phase exp(-i k d) from translating the flipped
    configuration back to its representative, and a factor
    sqrt(p_col / p_row) from the norms.
    """
    geom = ChainGeometry(n_sites, PERIODIC)
    basis = sector_basis(n_sites, m, cap)
    orbits, member = _orbits(geom, basis)
    period_of = dict(orbits)
    blocks = []
    for j in range(n_sites):
        k = 2.0 * np.pi * j / n_sites
        allowed = [(rep, p) for rep, p in orbits if (j * p) % n_sites == 0]
        pos = {rep: i for i, (rep, _) in enumerate(allowed)}
        dim = len(allowed)
        h = np.zeros((dim, dim), dtype=complex)
        for col, (rep, p_col) in enumerate(allowed):
            h[col, col] += 2.0 * config_wall_count(geom, rep)
            for b in boundary_bonds(geom, rep):
                flipped = rep ^ geom.bond_mask(b)
                rep2, d = member[flipped]
                row = pos.get(rep2)
                if row is None:  # orbit incompatible with this momentum
                    continue
                amp = 2.0 * epsilon * np.exp(-1j * k * d)
                h[row, col] += amp * np.sqrt(p_col / period_of[rep2])
        herm_defect = np.abs(h - h.conj().T).max() if dim else 0.0
        if herm_defect > 1e-12:
            raise AssertionError(f"momentum block k_index={j} not Hermitian: {herm_defect:.3e}")
        if with_vectors:
            vals, vecs = np.linalg.eigh(h)
        else:
            vals = np.linalg.eigvalsh(h) if dim else np.empty(0)
            vecs = None
        blocks.append(SpectrumBlock(
            k_index=j, k=k,
            representatives=[rep for rep, _ in allowed],
            orbit_sizes=[p for _, p in allowed],
            dim=dim, eigenvalues=vals, eigenvectors=vecs,
        ))
    return blocks


@dataclass
class BandSummary:
    """Per-momentum minima of the block spectra and the gap above them."""

    k_indices: np.ndarray
    k_values: np.ndarray
    minima: np.ndarray
    second: np.ndarray
    gaps: np.ndarray
    band_width: float


def lowest_band(blocks: list[SpectrumBlock]) -> BandSummary:
    k_idx = np.array([b.k_index for b in blocks])
    k_val = np.array([b.k for b in blocks])
    minima = np.array([b.eigenvalues[0] for b in blocks])
    second = np.array([b.eigenvalues[1] if b.dim > 1 else np.nan for b in blocks])
    gaps = second - minima
    return BandSummary(k_idx, k_val, minima, second, gaps,
                       float(minima.max() - minima.min()))


def apply_periodic_hamiltonian(basis: SectorBasis, epsilon: float, vec: np.ndarray) -> np.ndarray:
    """H @ vec on the ring sector, without materializing the dense matrix."""
    geom = ChainGeometry(basis.n_sites, PERIODIC)
    out = np.zeros_like(vec, dtype=complex)
    for i, config in enumerate(basis.masks):
        amp = vec[i]
        out[i] += 2.0 * config_wall_count(geom, config) * amp
        if amp != 0:
            for j in boundary_bonds(geom, config):
                out[basis.index[config ^ geom.bond_mask(j)]] += 2.0 * epsilon * amp
    return out


def apply_open_hamiltonian(basis: SectorBasis, epsilon: float, boundary_a: float,
                           boundary_b: float, vec: np.ndarray) -> np.ndarray:
    geom = ChainGeometry(basis.n_sites, OPEN)
    out = np.zeros_like(vec, dtype=float)
    for i, config in enumerate(basis.masks):
        amp = vec[i]
        out[i] += _diag_open(geom, config, boundary_a, boundary_b) * amp
        if amp != 0:
            for j in boundary_bonds(geom, config):
                out[basis.index[config ^ geom.bond_mask(j)]] += 2.0 * epsilon * amp
    return out


def translate_state_vector(basis: SectorBasis, vec: np.ndarray) -> np.ndarray:
    """One-site right translation T acting on a sector state vector."""
    geom = ChainGeometry(basis.n_sites, PERIODIC)
    out = np.zeros_like(vec)
    for i, config in enumerate(basis.masks):
        out[basis.index[translate(geom, config, 1)]] = vec[i]
    return out


def spectrum_json(n_sites, m, epsilon, blocks) -> dict:
    return {
        "N": n_sites,
        "m": m,
        "epsilon": epsilon,
        "blocks": [
            {
                "k_index": b.k_index,
                "dim": b.dim,
                "eigenvalues": [float(v) for v in b.eigenvalues],
            }
            for b in blocks
        ],
    }
