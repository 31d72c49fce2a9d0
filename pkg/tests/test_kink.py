import numpy as np
import pytest

from xxz_droplets import (KinkCoefficients, KinkParams, NonConvergence,
                          apply_F_kink, build_open_hamiltonian,
                          certify_contraction_kink, check_kink_ground_energy,
                          enumerate_space, kink_norm, solve_kink)
from xxz_droplets.kink import decay_delta


def make_space(params):
    return enumerate_space(params.geometry, params.m, params.w_max)


def test_params_validation():
    with pytest.raises(ValueError):
        KinkParams(8, 0, 0.05)
    with pytest.raises(ValueError):
        KinkParams(8, 8, 0.05)
    with pytest.raises(ValueError):
        KinkParams(8, 3, 0.05, boundary_a=0.5)
    with pytest.raises(ValueError):
        KinkParams(8, 3, 0.2, K=10.0)  # K|eps| = 2 >= 1
    with pytest.raises(ValueError):
        KinkParams(8, 3, 0.05, tol=0.0)


def test_first_sweep_seed_is_machine_exact():
    params = KinkParams(10, 4, 0.05, w_max=6)
    space = make_space(params)
    f0 = apply_F_kink(KinkCoefficients.zeros(space), params, space)
    assert f0.energy_shift == 0.0
    nonzero = {x: v for x, v in zip(space.masks[1:], f0.values) if v != 0.0}
    from xxz_droplets.chain import sites_to_mask
    assert nonzero == {sites_to_mask({4, 5}): -params.epsilon / 2.0}
    assert kink_norm(f0, params, space) == 2.0 * params.epsilon


def test_weighted_norm_of_first_sweep():
    # single term (lambda-2)|e| (K|eps|)^-1 = 4 (eps/2) / (K eps) = 2/K
    params = KinkParams(10, 4, 0.05, w_max=6, K=10.0)
    space = make_space(params)
    f0 = apply_F_kink(KinkCoefficients.zeros(space), params, space)
    assert kink_norm(f0, params, space, weighted=True) == 2.0 / params.K


def test_zero_norms():
    params = KinkParams(10, 4, 0.05, w_max=5)
    space = make_space(params)
    zero = KinkCoefficients.zeros(space)
    assert kink_norm(zero, params, space) == 0.0
    assert kink_norm(zero, params, space, weighted=True) == 0.0


def test_map_at_zero_coupling_is_linear_in_energy_term():
    params = KinkParams(8, 3, 0.0, w_max=4)
    space = make_space(params)
    coeffs = KinkCoefficients(0.7, np.linspace(-0.01, 0.01, len(space) - 1))
    out = apply_F_kink(coeffs, params, space)
    assert out.energy_shift == 0.0
    from xxz_droplets.chain import lambda_open
    lam = np.array([
        lambda_open(params.geometry, params.m, x, 1.0, 1.0)
        for x in space.masks[1:]
    ])
    np.testing.assert_allclose(out.values, 0.7 * coeffs.values / (lam - 2.0),
                               rtol=0, atol=1e-15)


def test_zero_coupling_solution_is_immediate():
    result = solve_kink(KinkParams(9, 4, 0.0, w_max=5))
    assert result.energy == 2.0
    assert result.iterations == 1
    assert not np.any(result.coefficients.values)


def test_fixed_point_property_and_sign():
    params = KinkParams(10, 5, 0.05, w_max=7)
    result = solve_kink(params)
    again = apply_F_kink(result.coefficients, params, result.space)
    drift = KinkCoefficients(
        again.energy_shift - result.energy_shift,
        again.values - result.coefficients.values,
    )
    assert kink_norm(drift, params, result.space) < params.tol
    assert result.coefficient({params.m, params.m + 1}) < 0.0
    assert result.energy_shift < 0.0


def test_ground_energy_matches_oracle_small_chain():
    check = check_kink_ground_energy(KinkParams(8, 3, 0.05, w_max=8))
    assert check.abs_diff <= 1e-12


def test_leading_order_energy_coefficient():
    # E = -eps^2 + O(eps^4): Richardson extrapolation of E/eps^2 over a
    # halving grid lands on -1, and the solver tracks the oracle throughout.
    ratios = {}
    for eps in (0.02, 0.01, 0.005):
        h, _ = build_open_hamiltonian(10, 5, eps)
        shift = float(np.linalg.eigvalsh(h)[0]) - 2.0
        ratios[eps] = shift / eps**2
        result = solve_kink(KinkParams(10, 5, eps, w_max=8))
        assert abs(result.energy - (2.0 + shift)) <= 1e-11
    extrapolated = (4.0 * ratios[0.005] - ratios[0.01]) / 3.0
    assert abs(extrapolated + 1.0) <= 1e-6
    assert abs(ratios[0.005] + 1.0) < abs(ratios[0.02] + 1.0)


def test_truncation_differences_shrink():
    energies = {
        w: solve_kink(KinkParams(12, 6, 0.08, w_max=w)).energy_shift
        for w in range(2, 7)
    }
    diffs = [abs(energies[w + 1] - energies[w]) for w in range(2, 6)]
    assert all(d2 < d1 for d1, d2 in zip(diffs, diffs[1:]))
    base = KinkParams(12, 6, 0.08).K * 0.08
    assert all(d <= base**w for w, d in zip(range(2, 6), diffs))


def test_eigenvector_residual_small():
    # assembled Psi over the truncated space is an approximate eigenvector
    from xxz_droplets.oracle import sector_basis, apply_open_hamiltonian

    params = KinkParams(10, 5, 0.05, w_max=7)
    result = solve_kink(params)
    basis = sector_basis(params.n_sites, params.m)
    psi = np.zeros(len(basis))
    mm = result.space.m_mask
    psi[basis.index[mm]] = 1.0
    for x, v in zip(result.space.masks[1:], result.coefficients.values):
        psi[basis.index[x ^ mm]] = v
    h_psi = apply_open_hamiltonian(basis, params.epsilon, 1.0, 1.0, psi)
    residual = np.linalg.norm(h_psi - result.energy * psi) / np.linalg.norm(psi)
    assert residual <= 10.0 * (params.K * params.epsilon) ** params.w_max


def test_contraction_certificate_zero_coupling():
    params = KinkParams(8, 3, 0.0, w_max=4)
    ratio = certify_contraction_kink(params, delta=0.1, samples=100, seed=3)
    assert ratio <= 0.1 / 4.0 + 1e-12


def test_decay_delta_below_one():
    result = solve_kink(KinkParams(10, 5, 0.05, w_max=7))
    assert 0.0 < decay_delta(result) < 1.0


def test_non_convergence_is_reported():
    params = KinkParams(10, 5, 0.05, w_max=6, tol=1e-13, max_iter=2)
    with pytest.raises(NonConvergence):
        solve_kink(params)


def test_json_dump_shape():
    result = solve_kink(KinkParams(8, 3, 0.05, w_max=4))
    doc = result.to_json_dict()
    assert doc["energy"] == 2.0 + doc["E"]
    assert doc["params"]["N"] == 8 and doc["params"]["A"] == 1.0
    assert len(doc["coefficients"]) == len(result.space) - 1
    first = doc["coefficients"][0]
    assert set(first) == {"sites", "w", "value"}
