"""Chain geometry and site-set algebra on bitmasks.

Sites are numbered 1..N and a set of sites is an integer bitmask with bit
j-1 standing for site j.  A spin configuration is identified with the set
of its down spins; the reference block M = {1,...,m} is the mask with the
lowest m bits set.  Everything that depends on the topology (which bonds
exist, index wrap-around) goes through an explicit ChainGeometry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

OPEN = "open"
PERIODIC = "periodic"


def sites_to_mask(sites: Iterable[int]) -> int:
    mask = 0
    for s in sites:
        mask |= 1 << (s - 1)
    return mask


def mask_to_sites(mask: int) -> list[int]:
    sites = []
    s = 1
    while mask:
        if mask & 1:
            sites.append(s)
        mask >>= 1
        s += 1
    return sites


def block_mask(m: int) -> int:
    """Mask of the reference block M = {1,...,m}."""
    return (1 << m) - 1


@dataclass(frozen=True)
class ChainGeometry:
    """A chain of n_sites sites, either open (bonds 1..N-1) or periodic (bonds 1..N)."""

    n_sites: int
    topology: str = PERIODIC

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"need at least 2 sites, got {self.n_sites}")
        if self.topology not in (OPEN, PERIODIC):
            raise ValueError(f"unknown topology {self.topology!r}")

    @property
    def periodic(self) -> bool:
        return self.topology == PERIODIC

    @property
    def full_mask(self) -> int:
        return (1 << self.n_sites) - 1

    @property
    def n_bonds(self) -> int:
        return self.n_sites if self.periodic else self.n_sites - 1

    def bonds(self) -> range:
        """Bond indices j, where bond j joins sites j and j+1 (site N+1 = 1 on a ring)."""
        return range(1, self.n_bonds + 1)

    def bond_mask(self, j: int) -> int:
        if not 1 <= j <= self.n_bonds:
            raise ValueError(f"bond {j} out of range for {self.topology} chain of {self.n_sites}")
        right = j % self.n_sites if self.periodic else j
        return (1 << (j - 1)) | (1 << right)


def sym_diff(x: int, y: int) -> int:
    """Symmetric difference of two site sets: sites in exactly one of them."""
    return x ^ y


def translate(geom: ChainGeometry, mask: int, shift: int) -> int:
    """Shift every member by `shift` sites (mod N).  Periodic chains only."""
    if not geom.periodic:
        raise ValueError("translation is only defined on the periodic chain")
    n = geom.n_sites
    shift %= n
    if shift == 0:
        return mask
    return ((mask << shift) | (mask >> (n - shift))) & geom.full_mask


def _wall_mask(geom: ChainGeometry, config: int) -> int:
    # bit j-1 of the result <=> the spins at sites j and j+1 differ
    n = geom.n_sites
    if geom.periodic:
        rolled = (config >> 1) | ((config & 1) << (n - 1))
        return config ^ rolled
    return (config ^ (config >> 1)) & ((1 << (n - 1)) - 1)


def boundary_bonds(geom: ChainGeometry, mask: int) -> list[int]:
    """Bonds with exactly one endpoint in `mask` (the domain walls of that configuration)."""
    walls = _wall_mask(geom, mask)
    out = []
    j = 1
    while walls:
        if walls & 1:
            out.append(j)
        walls >>= 1
        j += 1
    return out


def config_wall_count(geom: ChainGeometry, config: int) -> int:
    """Number of domain walls of a spin configuration under this topology."""
    return _wall_mask(geom, config).bit_count()


def wall_count(geom: ChainGeometry, m: int, x: int) -> int:
    """Wall count n(X) of the configuration X Δ M on the periodic chain.  Always even."""
    if not geom.periodic:
        raise ValueError("wall_count is defined for the periodic chain")
    return config_wall_count(geom, x ^ block_mask(m))


def lambda_open(geom: ChainGeometry, m: int, x: int, boundary_a: float, boundary_b: float) -> float:
    """Zero-coupling energy of |X Δ M> on the open chain with pinning fields.

    Twice the wall count of X Δ M, plus 2A if site 1 flipped up (1 in X) and
    2B if site N flipped down (N in X).  Fields below 1 are outside the
    implemented regime and rejected.
    """
    if geom.periodic:
        raise ValueError("lambda_open is defined for the open chain")
    if boundary_a < 1.0 or boundary_b < 1.0:
        raise ValueError("boundary fields must each be >= 1")
    val = 2.0 * config_wall_count(geom, x ^ block_mask(m))
    if x & 1:
        val += 2.0 * boundary_a
    if (x >> (geom.n_sites - 1)) & 1:
        val += 2.0 * boundary_b
    return val


def flip_neighbors(geom: ChainGeometry, m: int, x: int) -> list[tuple[int, int]]:
    """All single-bond spin-pair flips available from X.

    One entry (bond, X Δ {j, j+1}) per domain wall of X Δ M, in ascending
    bond order.  Flips conserve the number of down spins, and flipping the
    same bond again returns X.
    """
    config = x ^ block_mask(m)
    return [(j, x ^ geom.bond_mask(j)) for j in boundary_bonds(geom, config)]
