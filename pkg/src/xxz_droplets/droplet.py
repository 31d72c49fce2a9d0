"""Fixed-point solver for the droplet band on the periodic chain.

Momentum eigenstates are built from a single coefficient family e(X) shared
by all translates,

    Psi_k = sum_{l=1}^N e^{ikl} sum_{X:m} e(X) |(X Δ M) + l>,

with band energy E(k) = 4 + sum_{n=1}^N e_n e^{ikn} (two domain walls give
the zero-coupling energy 4).  The normalization freedom of the N eigenstates
is fixed by the gauge e(∅) = 1, e(M Δ (M+n)) = 0 for n != 0, which leaves
the unknowns {e_n} plus e(X) for configurations with more than two walls:

    e_n  = 2 eps sum_{walls j of M-n} e(M Δ (M-n) Δ {j, j+1})
    e(X) = -eps/(n(X)-2) sum_{walls j} e(X Δ {j, j+1})
           + 1/(2 (n(X)-2)) sum_{s=1}^N e_s e((X+s) Δ (M+s) Δ M)

Inside the sums e(∅) contributes 1, gauge sets contribute 0, and anything
outside the truncated space contributes 0.  The translated argument in the
bilinear sum has the same wall count as X, so it can never collide with the
gauge sets.  The map contracts (rate bounded by 4 eps + delta on the
delta-ball), and plain iteration from 0 converges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (ChainGeometry, PERIODIC, boundary_bonds, mask_to_sites,
                    sites_to_mask, translate)
from .config_space import ConfigSpace, enumerate_space
from .errors import ComplexLeak, NonConvergence
from .oracle import (DEFAULT_SECTOR_CAP, SectorBasis, build_periodic_blocks,
                     sector_basis)

IMAG_FLOOR = 1e-10


@dataclass(frozen=True)
class DropletParams:
    """Run parameters for the periodic-chain solver.

    The fixed-point path needs m >= 2: in the one-magnon sector every
    configuration is a translate of the block, so the band comes straight
    out of the (diagonal) momentum blocks; see one_magnon_dispersion.
    """

    n_sites: int
    m: int
    epsilon: float
    w_max: int = 7
    tol: float = 1e-13
    max_iter: int = 300
    K: float = 10.0

    def __post_init__(self):
        if not 0 < self.m < self.n_sites:
            raise ValueError(f"need 0 < m < N, got m={self.m}, N={self.n_sites}")
        if self.m == 1:
            raise ValueError("m = 1 has no fixed-point unknowns; "
                             "use one_magnon_dispersion instead")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.w_max < 0:
            raise ValueError("w_max must be >= 0")
        if self.K <= 0 or self.K * abs(self.epsilon) >= 1.0:
            raise ValueError(f"need K|eps| < 1, got {self.K * abs(self.epsilon)}")

    @property
    def geometry(self) -> ChainGeometry:
        return ChainGeometry(self.n_sites, PERIODIC)

    def to_json_dict(self) -> dict:
        return {
            "N": self.n_sites, "m": self.m, "epsilon": self.epsilon,
            "w_max": self.w_max, "tol": self.tol, "max_iter": self.max_iter,
            "K": self.K,
        }


@dataclass
class DropletCoefficients:
    """Unknown vector ({e_n}, {e(X)}) over the truncated space.

    `fourier[n-1]` holds e_n; entries whose gauge translate lies beyond the
    truncation depth are structurally zero.  `values` follows the space's
    BFS order restricted to configurations with more than two walls; the
    gauge values e(∅) = 1 and e(M Δ (M+n)) = 0 are never stored.
    """

    fourier: np.ndarray
    values: np.ndarray

    @classmethod
    def zeros(cls, fmap: "_DropletMap") -> "DropletCoefficients":
        return cls(np.zeros(fmap.n_sites), np.zeros(fmap.n_stored))


class _DropletMap:
    """Precomputed index tables for one (params, space) pair."""

    def __init__(self, params: DropletParams, space: ConfigSpace):
        if space.geometry != params.geometry or space.m != params.m:
            raise ValueError("space was enumerated for different geometry or sector")
        self.params = params
        self.space = space
        geom = params.geometry
        n = geom.n_sites
        self.n_sites = n
        m_mask = space.m_mask

        self.stored_masks = [x for x in space.masks
                             if x != 0 and space.entries[x].walls > 2]
        index = {x: i for i, x in enumerate(self.stored_masks)}
        self.n_stored = len(self.stored_masks)
        self.walls = np.array([space.entries[x].walls for x in self.stored_masks],
                              dtype=float)
        self.nm2 = self.walls - 2.0
        self.inv_nm2 = 1.0 / self.nm2
        self.w = np.array([space.entries[x].w for x in self.stored_masks], dtype=float)

        one, zero = self.n_stored, self.n_stored + 1

        def code(y: int) -> int:
            if y == 0:
                return one
            # gauge sets and out-of-space flips both contribute exact zeros
            return index.get(y, zero)

        fsrc, fdst = [], []
        for i, x in enumerate(self.stored_masks):
            for j in boundary_bonds(geom, x ^ m_mask):
                fsrc.append(i)
                fdst.append(code(x ^ geom.bond_mask(j)))
        self.flip_src = np.array(fsrc, dtype=np.int64)
        self.flip_dst = np.array(fdst, dtype=np.int64)

        # Fourier unknowns e_n are active only when their gauge translate is
        # inside the truncation (w_n <= w_max); the rest stay exactly 0.
        self.active_n = []
        self.w_n = np.full(n, np.inf)
        esrc, edst = [], []
        for nn in range(1, n + 1):
            base_config = translate(geom, m_mask, -nn)
            gauge = m_mask ^ base_config
            if gauge not in space.entries:
                continue
            self.active_n.append(nn)
            self.w_n[nn - 1] = space.entries[gauge].w
            for j in boundary_bonds(geom, base_config):
                esrc.append(nn - 1)
                edst.append(code(gauge ^ geom.bond_mask(j)))
        self.en_src = np.array(esrc, dtype=np.int64)
        self.en_dst = np.array(edst, dtype=np.int64)
        self.active_mask = np.zeros(n, dtype=bool)
        for nn in self.active_n:
            self.active_mask[nn - 1] = True

        # Bilinear table: (stored X, shift s) -> stored index of the translated
        # argument.  Same wall count as X, so never ∅ or a gauge set; shifts
        # with inactive e_s or out-of-space arguments drop out.
        ssrc, sshift, scol = [], [], []
        for i, x in enumerate(self.stored_masks):
            config = x ^ m_mask
            for nn in self.active_n:
                y = translate(geom, config, nn) ^ m_mask
                col = index.get(y)
                if col is not None:
                    ssrc.append(i)
                    sshift.append(nn - 1)
                    scol.append(col)
        self.s_src = np.array(ssrc, dtype=np.int64)
        self.s_shift = np.array(sshift, dtype=np.int64)
        self.s_col = np.array(scol, dtype=np.int64)

    def apply(self, fourier: np.ndarray, values: np.ndarray):
        eps = self.params.epsilon
        ext = np.concatenate([values, [1.0, 0.0]])
        flip_sums = np.bincount(self.flip_src, weights=ext[self.flip_dst],
                                minlength=self.n_stored)
        bilinear = np.bincount(self.s_src,
                               weights=fourier[self.s_shift] * values[self.s_col],
                               minlength=self.n_stored)
        new_values = (-eps * flip_sums + 0.5 * bilinear) * self.inv_nm2
        en_sums = np.bincount(self.en_src, weights=ext[self.en_dst],
                              minlength=self.n_sites)
        new_fourier = 2.0 * eps * en_sums
        return new_fourier, new_values

    def norm(self, fourier: np.ndarray, values: np.ndarray) -> float:
        return float(np.sum(np.abs(fourier))
                     + 2.0 * np.sum(np.abs(values) * self.nm2))

    def weighted_norm(self, fourier: np.ndarray, values: np.ndarray) -> float:
        base = self.params.K * abs(self.params.epsilon)
        inactive = fourier[~self.active_mask]
        if np.any(inactive):
            raise ValueError("nonzero Fourier coefficient outside the truncation")
        if base == 0.0:
            if not np.any(fourier) and not np.any(values):
                return 0.0
            raise ValueError("weighted norm undefined at eps = 0 for a nonzero vector")
        active = self.active_mask
        return float(
            np.sum(np.abs(fourier[active]) * base ** -self.w_n[active])
            + 2.0 * np.sum(np.abs(values) * self.nm2 * base ** -self.w)
        )

    def random_in_ball(self, rng: np.random.Generator, delta: float):
        fourier = np.zeros(self.n_sites)
        fourier[self.active_mask] = rng.uniform(-1.0, 1.0, len(self.active_n))
        values = rng.uniform(-1.0, 1.0, self.n_stored)
        raw = self.norm(fourier, values)
        scale = delta * rng.uniform(0.0, 1.0) / raw if raw > 0 else 0.0
        return fourier * scale, values * scale


def apply_F_droplet(coeffs: DropletCoefficients, params: DropletParams,
                    space: ConfigSpace) -> DropletCoefficients:
    """One application of the droplet fixed-point map."""
    fourier, values = _DropletMap(params, space).apply(coeffs.fourier, coeffs.values)
    return DropletCoefficients(fourier, values)


def droplet_norm(coeffs: DropletCoefficients, params: DropletParams,
                 space: ConfigSpace, weighted: bool = False) -> float:
    """sum |e_n| + 2 sum |e(X)| (n(X)-2), optionally with (K|eps|)^-w weights."""
    fmap = _DropletMap(params, space)
    if weighted:
        return fmap.weighted_norm(coeffs.fourier, coeffs.values)
    return fmap.norm(coeffs.fourier, coeffs.values)


@dataclass
class DropletResult:
    params: DropletParams
    space: ConfigSpace
    coefficients: DropletCoefficients
    stored_masks: list[int]
    iterations: int
    residual: float

    @property
    def fourier(self) -> np.ndarray:
        return self.coefficients.fourier

    def coefficient(self, sites) -> float:
        mask = sites_to_mask(sites)
        if mask == 0:
            return 1.0
        for x, v in zip(self.stored_masks, self.coefficients.values):
            if x == mask:
                return float(v)
        return 0.0

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "baseline": 4.0,
            "e_n": [float(v) for v in self.coefficients.fourier],
            "iterations": self.iterations,
            "residual": self.residual,
            "coefficients": [
                {"sites": mask_to_sites(x),
                 "w": int(self.space.entries[x].w),
                 "walls": int(self.space.entries[x].walls),
                 "value": float(v)}
                for x, v in zip(self.stored_masks, self.coefficients.values)
            ],
        }


def solve_droplet(params: DropletParams, space: ConfigSpace | None = None) -> DropletResult:
    """Iterate e <- F(e) from e = 0 until the norm of the update drops below tol."""
    if space is None:
        space = enumerate_space(params.geometry, params.m, params.w_max)
    fmap = _DropletMap(params, space)
    fourier = np.zeros(fmap.n_sites)
    values = np.zeros(fmap.n_stored)
    for iteration in range(1, params.max_iter + 1):
        new_fourier, new_values = fmap.apply(fourier, values)
        residual = fmap.norm(new_fourier - fourier, new_values - values)
        fourier, values = new_fourier, new_values
        if residual < params.tol:
            return DropletResult(params, space, DropletCoefficients(fourier, values),
                                 fmap.stored_masks, iteration, residual)
    raise NonConvergence(params.max_iter, residual, params.tol)


@dataclass
class DispersionResult:
    """Band energies sampled on the momentum grid k = 2 pi j / N."""

    baseline: float
    fourier: np.ndarray
    k_indices: np.ndarray
    k_values: np.ndarray
    energies: np.ndarray
    bandwidth: float

    def energy_at(self, k) -> np.ndarray:
        """Trig-interpolated band energy at arbitrary momentum.

        Harmonics are folded to the symmetric range |s| <= N/2, which keeps
        the extension real for the reflection-symmetric coefficients.
        """
        k = np.atleast_1d(np.asarray(k, dtype=float))
        n = len(self.fourier)
        total = np.full(k.shape, self.baseline)
        for idx, coeff in enumerate(self.fourier):
            s = idx + 1
            folded = s if s <= n // 2 else s - n
            total += coeff * np.cos(k * folded)
        return total

    def to_json_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "e_n": [float(v) for v in self.fourier],
            "samples": [
                {"k_index": int(j), "k": float(k), "E": float(e)}
                for j, k, e in zip(self.k_indices, self.k_values, self.energies)
            ],
            "bandwidth": self.bandwidth,
        }


def dispersion(coeffs_or_result, params: DropletParams | None = None) -> DispersionResult:
    """Evaluate E(k) = 4 + sum_n e_n e^{ikn} on the momentum grid.

    The converged coefficients satisfy e_n = e_{N-n}, so the grid samples
    are real; an imaginary part above the numerical floor raises
    ComplexLeak, which signals broken reflection symmetry.
    """
    if isinstance(coeffs_or_result, DropletResult):
        fourier = coeffs_or_result.coefficients.fourier
        n = coeffs_or_result.params.n_sites
    else:
        if params is None:
            raise ValueError("params required when passing bare coefficients")
        fourier = coeffs_or_result.fourier
        n = params.n_sites
    k_indices = np.arange(n)
    k_values = 2.0 * np.pi * k_indices / n
    harmonics = np.arange(1, n + 1)
    phases = np.exp(1j * np.outer(k_values, harmonics))
    samples = 4.0 + phases @ fourier
    max_imag = float(np.abs(samples.imag).max())
    if max_imag >= IMAG_FLOOR:
        raise ComplexLeak(max_imag, IMAG_FLOOR)
    energies = samples.real
    return DispersionResult(
        baseline=4.0, fourier=fourier.copy(), k_indices=k_indices,
        k_values=k_values, energies=energies,
        bandwidth=float(energies.max() - energies.min()),
    )


def assemble_eigenvector(result: DropletResult, k_index: int,
                         cap: int = DEFAULT_SECTOR_CAP,
                         basis: SectorBasis | None = None) -> np.ndarray:
    """Explicit (unnormalized) momentum eigenvector over the sector basis.

    By construction T Psi_k = e^{-ik} Psi_k for one-site right translation T.
    """
    params = result.params
    geom = params.geometry
    if basis is None:
        basis = sector_basis(params.n_sites, params.m, cap)
    k = 2.0 * np.pi * k_index / params.n_sites
    psi = np.zeros(len(basis), dtype=complex)
    terms = [(0, 1.0)]
    terms += list(zip(result.stored_masks, result.coefficients.values))
    phases = np.exp(1j * k * np.arange(1, params.n_sites + 1))
    for x, val in terms:
        if val == 0.0:
            continue
        config = x ^ result.space.m_mask
        for l in range(1, params.n_sites + 1):
            psi[basis.index[translate(geom, config, l)]] += phases[l - 1] * val
    return psi


def one_magnon_dispersion(n_sites: int, epsilon: float,
                          cap: int = DEFAULT_SECTOR_CAP) -> DispersionResult:
    """Exact band for m = 1 from the momentum blocks, which are all 1x1.

    The single down spin forms one translation orbit of full period, so each
    momentum block is diagonal and the band needs no expansion.
    """
    blocks = build_periodic_blocks(n_sites, 1, epsilon, cap)
    energies = np.empty(n_sites)
    for b in blocks:
        if b.dim != 1:
            raise AssertionError(f"one-magnon block k_index={b.k_index} has dim {b.dim}")
        energies[b.k_index] = b.eigenvalues[0]
    k_indices = np.arange(n_sites)
    k_values = 2.0 * np.pi * k_indices / n_sites
    # invert the finite Fourier series for the e_n record
    harmonics = np.arange(1, n_sites + 1)
    phases = np.exp(-1j * np.outer(harmonics, k_values))
    fourier = (phases @ (energies - 4.0)) / n_sites
    fourier = np.where(np.abs(fourier.real) < 1e-14, 0.0, fourier.real)
    return DispersionResult(
        baseline=4.0, fourier=fourier, k_indices=k_indices, k_values=k_values,
        energies=energies, bandwidth=float(energies.max() - energies.min()),
    )


def certify_contraction_droplet(params: DropletParams, space: ConfigSpace | None = None,
                                delta: float = 0.1, samples: int = 200,
                                seed: int = 0) -> float:
    """Empirical Lipschitz ratio of the droplet map over the delta-ball.

    The analytic bound is 4 eps + delta (flip part plus bilinear part).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if space is None:
        space = enumerate_space(params.geometry, params.m, params.w_max)
    fmap = _DropletMap(params, space)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f1, v1 = fmap.random_in_ball(rng, delta)
        f2, v2 = fmap.random_in_ball(rng, delta)
        dist = fmap.norm(f1 - f2, v1 - v2)
        if dist == 0.0:
            continue
        g1 = fmap.apply(f1, v1)
        g2 = fmap.apply(f2, v2)
        worst = max(worst, fmap.norm(g1[0] - g2[0], g1[1] - g2[1]) / dist)
    return worst


def decay_delta(result: DropletResult) -> float:
    """Smallest delta with |e(X)| <= delta (K|eps|)^w / (n(X)-2) and |e_n| <= delta (K|eps|)^w_n."""
    fmap = _DropletMap(result.params, result.space)
    base = result.params.K * abs(result.params.epsilon)
    if base == 0.0:
        return 0.0
    worst = 0.0
    if fmap.n_stored:
        terms = (np.abs(result.coefficients.values) * fmap.nm2
                 * base ** -fmap.w)
        worst = float(terms.max())
    active = fmap.active_mask
    if active.any():
        terms = (np.abs(result.coefficients.fourier[active])
                 * base ** -fmap.w_n[active])
        worst = max(worst, float(terms.max()))
    return worst
