"""Truncated configuration space with perturbation orders.

The admissible configurations X (those for which |X Δ M> stays in the
m-down-spin sector) form a graph under single-bond spin-pair flips.  The
perturbation order w(X) is the flip distance from the empty set; it is the
lowest order at which the coefficient of X picks up a nonzero contribution.
Enumeration is a breadth-first closure of {∅} truncated at w <= w_max.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import (ChainGeometry, block_mask, config_wall_count,
                    flip_neighbors, mask_to_sites, translate)


@dataclass(frozen=True)
class ConfigEntry:
    """Perturbation order and wall count of one enumerated configuration.

    `walls` counts the domain walls of X Δ M under the space's topology; on
    the open chain the pinning-field energy is derived from it on demand.
    """

    w: int
    walls: int


@dataclass
class ConfigSpace:
    """BFS closure of {∅} under flips, truncated at depth w_max.

    Immutable after construction; `masks` preserves the deterministic BFS
    order (ascending parent key, then ascending bond index) and indexes the
    coefficient vectors used by the solvers.
    """

    geometry: ChainGeometry
    m: int
    w_max: int
    entries: dict[int, ConfigEntry]
    masks: list[int] = field(default_factory=list)
    index: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.masks:
            self.masks = list(self.entries)
        if not self.index:
            self.index = {x: i for i, x in enumerate(self.masks)}
        self.w_orders = np.array([self.entries[x].w for x in self.masks], dtype=np.int64)
        self.wall_counts = np.array([self.entries[x].walls for x in self.masks], dtype=np.int64)

    def __len__(self):
        return len(self.masks)

    def __contains__(self, mask):
        return mask in self.entries

    @property
    def m_mask(self) -> int:
        return block_mask(self.m)

    def depth_counts(self) -> list[int]:
        """Number of enumerated configurations per perturbation order 0..w_max.

        Exposed so truncation growth can be inspected empirically; no a
        priori bound on the count per depth is assumed.
        """
        counts = [0] * (self.w_max + 1)
        for e in self.entries.values():
            counts[e.w] += 1
        return counts

    def gauge_shift(self, mask: int) -> int | None:
        """If X Δ M is a translate M+s of the block, return s (else None).

        These are exactly the configurations with two domain walls; s = 0
        corresponds to X = ∅.  Periodic chains only.
        """
        geom = self.geometry
        if not geom.periodic:
            return None
        config = mask ^ self.m_mask
        for s in range(geom.n_sites):
            if translate(geom, self.m_mask, s) == config:
                return s
        return None

    def to_json_dict(self) -> dict:
        return {
            "geometry": {"N": self.geometry.n_sites, "topology": self.geometry.topology},
            "m": self.m,
            "w_max": self.w_max,
            "entries": [
                {
                    "sites": mask_to_sites(x),
                    "w": self.entries[x].w,
                    "walls": self.entries[x].walls,
                }
                for x in self.masks
            ],
        }


def enumerate_space(geometry: ChainGeometry, m: int, w_max: int) -> ConfigSpace:
    """Breadth-first closure of {∅} under flips, recording w(X) and wall counts.

    Visit order is ascending canonical key within each depth and ascending
    bond index per configuration, which fixes the entry order for golden
    tests; w itself is a graph distance and independent of the order.
    """
    if not 0 < m < geometry.n_sites:
        raise ValueError(f"need 0 < m < N, got m={m}, N={geometry.n_sites}")
    if w_max < 0:
        raise ValueError(f"w_max must be >= 0, got {w_max}")

    def walls_of(x: int) -> int:
        return config_wall_count(geometry, x ^ block_mask(m))

    entries = {0: ConfigEntry(0, walls_of(0))}
    frontier = [0]
    for depth in range(1, w_max + 1):
        discovered = []
        for x in frontier:
            for _, y in flip_neighbors(geometry, m, x):
                if y not in entries:
                    entries[y] = ConfigEntry(depth, walls_of(y))
                    discovered.append(y)
        if not discovered:
            break
        frontier = sorted(discovered)
    return ConfigSpace(geometry, m, w_max, entries)
