import math

import numpy as np
import pytest

from wignerlab.dbm import (
    FlowError,
    FlowState,
    SampleSizeError,
    equilibrium_gap_reference,
    gap_distribution,
    ou_endpoint,
    ou_path,
)
from wignerlab.profile import flat_profile
from wignerlab.sampler import HERMITIAN, SYMMETRIC, derive_stream, gaussian, sample_matrix
from wignerlab.semicircle import classical_locations, rho_sc


def start_matrix(n, seed=0):
    return sample_matrix(flat_profile(n), gaussian(), SYMMETRIC, derive_stream(seed, 0)).h


def test_endpoint_t0_identity():
    h0 = start_matrix(16)
    ht = ou_endpoint(h0, 0.0, SYMMETRIC, derive_stream(1, 0))
    assert np.array_equal(ht, h0)


def test_endpoint_negative_t_rejected():
    with pytest.raises(FlowError):
        ou_endpoint(start_matrix(4), -0.1, SYMMETRIC, derive_stream(1, 0))


def test_endpoint_large_t_forgets_start():
    h0 = np.diag(np.full(64, 100.0))
    ht = ou_endpoint(h0, 80.0, SYMMETRIC, derive_stream(2, 0))
    assert np.max(np.abs(np.diag(ht))) < 10.0  # e^{-40} * 100 + Gaussian noise


def test_endpoint_variance_interpolation():
    # E|H_t,ij|^2 = e^{-t} sigma2 + (1 - e^{-t})/n, Monte Carlo vs analytic
    n, t, m = 32, 0.7, 400
    h0 = start_matrix(n, seed=3)
    iu = np.triu_indices(n, k=1)
    sigma2 = np.abs(h0[iu]) ** 2
    vals = np.empty((m, iu[0].size))
    for r in range(m):
        ht = ou_endpoint(h0, t, SYMMETRIC, derive_stream(4, r))
        vals[r] = np.abs(ht[iu]) ** 2
    target = math.exp(-t) * sigma2.mean() + (1.0 - math.exp(-t)) / n
    obs = vals.mean()
    se = vals.mean(axis=1).std(ddof=1) / math.sqrt(m)
    assert abs(obs - target) <= 4 * se


def test_flat_profile_is_fixed_point():
    state = FlowState(t=1.3, h=np.zeros((8, 8)), initial_profile=flat_profile(8), path_mode="exact_ou")
    assert np.allclose(state.expected_variance(), 1.0 / 8, atol=1e-15)


def test_semigroup_coefficient_identity():
    for s, t in ((0.1, 0.5), (0.02, 1.7)):
        assert math.exp(-s / 2) * math.exp(-(t - s) / 2) == pytest.approx(math.exp(-t / 2), rel=1e-14)


def test_path_single_step_equals_endpoint():
    h0 = start_matrix(12, seed=5)
    a = ou_path(h0, [0.4], SYMMETRIC, derive_stream(6, 0))[0]
    b = ou_endpoint(h0, 0.4, SYMMETRIC, derive_stream(6, 0))
    assert np.array_equal(a, b)


def test_path_requires_increasing_grid():
    h0 = start_matrix(4)
    with pytest.raises(FlowError):
        ou_path(h0, [0.2, 0.1], SYMMETRIC, derive_stream(0, 0))
    with pytest.raises(FlowError):
        ou_path(h0, [0.1], SYMMETRIC, derive_stream(0, 0), mode="heun")


def test_path_preserves_symmetry():
    h0 = sample_matrix(flat_profile(10), gaussian(), HERMITIAN, derive_stream(7, 0)).h
    path = ou_path(h0, [0.1, 0.3, 0.9], HERMITIAN, derive_stream(7, 1))
    for h in path:
        assert np.max(np.abs(h - h.conj().T)) == 0.0


def test_euler_matches_exact_second_moments():
    # strong-order check on the entrywise second moment at a fixed time
    n, t, m = 16, 0.25, 300
    h0 = start_matrix(n, seed=8)
    iu = np.triu_indices(n, k=1)
    target = math.exp(-t) * float(np.mean(np.abs(h0[iu]) ** 2)) + (1 - math.exp(-t)) / n
    obs = np.empty(m)
    for r in range(m):
        h = ou_path(h0, [t], SYMMETRIC, derive_stream(9, r), mode="euler", euler_dt=5e-3)[0]
        obs[r] = float(np.mean(np.abs(h[iu]) ** 2))
    se = obs.std(ddof=1) / math.sqrt(m)
    assert abs(obs.mean() - target) <= 4 * se + 10 * 5e-3 * target


def test_gap_unfolding_equispaced():
    # equispaced eigenvalues at spacing (n rho)^-1 give unit unfolded gaps
    n = 400
    center = 0.0
    spacing = 1.0 / (n * rho_sc(center))
    eigs = center + (np.arange(n) - n / 2) * spacing
    gs = gap_distribution(eigs, (center, 30 * spacing))
    # density variation across the narrow window bounds the deviation
    assert np.allclose(gs.gaps, 1.0, atol=2e-2)


def test_gap_mean_near_one_for_goe():
    gaps = equilibrium_gap_reference(512, SYMMETRIC, 4, derive_stream(10, 0))
    assert abs(gaps.mean() - 1.0) <= 0.02


def test_gap_window_too_small():
    with pytest.raises(SampleSizeError):
        gap_distribution(np.linspace(-2, 2, 400), (0.0, 0.01))
    with pytest.raises(SampleSizeError):
        gap_distribution(np.array([5.0, 6.0]), (0.0, 0.5))


def test_rigid_start_has_degenerate_gaps():
    gamma = classical_locations(512)
    gs = gap_distribution(gamma, (0.0, 1.0))
    assert gs.gaps.std() < 0.05  # near point mass at 1
