"""Shared test helpers: an independent Pauli-matrix Hamiltonian builder."""

import numpy as np


def kron_sector_hamiltonian(n_sites, m, epsilon, topology,
                            boundary_a=1.0, boundary_b=1.0):
    """Sector Hamiltonian assembled from explicit Pauli Kronecker products.

    Completely independent of the package's bitmask bookkeeping: spin
    operators are 2x2 matrices, the chain is a plain tensor product, and the
    m-down-spin sector is cut out afterwards.  Returns (H, masks) where
    masks[i] is the down-spin site set of basis state i (bit j-1 <-> site j).
    """
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)

    def site_op(ops):
        out = np.array([[1.0 + 0j]])
        for s in range(1, n_sites + 1):
            out = np.kron(out, ops.get(s, eye))
        return out

    dim = 2 ** n_sites
    h = np.zeros((dim, dim), dtype=complex)
    bonds = [(j, j + 1) for j in range(1, n_sites)]
    if topology == "periodic":
        bonds.append((n_sites, 1))
    for a, b in bonds:
        h += np.eye(dim) - site_op({a: sz, b: sz})
        h += epsilon * (site_op({a: sx, b: sx}) + site_op({a: sy, b: sy}))
    if topology == "open":
        h += boundary_a * (np.eye(dim) + site_op({1: sz}))
        h += boundary_b * (np.eye(dim) - site_op({n_sites: sz}))

    sel = [b for b in range(dim) if bin(b).count("1") == m]
    sector = h[np.ix_(sel, sel)]
    assert np.abs(sector.imag).max() < 1e-13

    def to_mask(b):
        # kron index has site 1 as the most significant qubit; bit 1 = down
        mask = 0
        for s in range(1, n_sites + 1):
            if (b >> (n_sites - s)) & 1:
                mask |= 1 << (s - 1)
        return mask

    return sector.real, [to_mask(b) for b in sel]
