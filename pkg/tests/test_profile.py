import numpy as np
import pytest

from wignerlab.profile import (
    ProfileError,
    assumption_report,
    band_profile,
    custom_profile,
    flat_profile,
    load_txt,
    symmetric_offsets,
)


def indicator_half(x):
    return 0.5 if abs(x) <= 1.0 else 0.0


def test_flat_entries():
    p = flat_profile(4)
    assert np.all(p.sigma2 == 0.25)
    assert np.allclose(p.sigma2.sum(axis=0), 1.0, atol=1e-12)
    assert p.c_inf == 1.0 and p.c_sup == 1.0


def test_flat_n2():
    assert np.all(flat_profile(2).sigma2 == 0.5)


def test_flat_dimension_error():
    with pytest.raises(ProfileError):
        flat_profile(1)


def test_flat_spectral_gap():
    rep = assumption_report(flat_profile(16))
    assert rep.eigenvalue_one_simple
    assert rep.delta_minus == pytest.approx(1.0, abs=1e-10)
    assert rep.delta_plus == pytest.approx(1.0, abs=1e-10)


def test_band_indicator_example():
    # n=8, w=2: admissible offsets -2..2, raw row sum 5/4, normalized to 1/5
    p = band_profile(8, 2, indicator_half)
    assert p.sigma2[0, 0] == pytest.approx(0.2)
    assert p.sigma2[0, 2] == pytest.approx(0.2)
    assert p.sigma2[0, 6] == pytest.approx(0.2)  # wraparound offset -2
    assert p.sigma2[0, 3] == 0.0
    assert np.allclose(p.sigma2.sum(axis=0), 1.0, atol=1e-12)


def test_band_half_bandwidth_close_to_flat():
    n = 8
    p = band_profile(n, n // 2, indicator_half)
    assert np.all(p.sigma2 > 0)
    assert np.allclose(p.sigma2.sum(axis=0), 1.0, atol=1e-12)


@pytest.mark.parametrize("n,w", [(16, 3), (17, 4), (32, 8)])
def test_band_column_sums(n, w):
    p = band_profile(n, w, indicator_half)
    assert np.allclose(p.sigma2.sum(axis=0), 1.0, atol=1e-12)
    assert np.allclose(p.sigma2, p.sigma2.T)


def test_band_negative_shape_rejected():
    with pytest.raises(ProfileError):
        band_profile(8, 2, lambda x: -1.0)


def test_band_bandwidth_range():
    with pytest.raises(ProfileError):
        band_profile(8, 5, indicator_half)
    with pytest.raises(ProfileError):
        band_profile(8, 0, indicator_half)


def test_band_spectrum_matches_circulant_fourier():
    # For a circulant profile Spec(B) is the DFT of the offset weights.
    n, w = 64, 16
    p = band_profile(n, w, indicator_half)
    weights = p.sigma2[0]
    fourier = np.sort(np.fft.fft(weights).real)
    rep = assumption_report(p)
    assert np.allclose(np.sort(rep.spectrum_of_b), fourier, atol=1e-8)
    assert rep.eigenvalue_one_simple
    # upper spectral gap of order (w/n)^2
    assert 0 < rep.delta_plus < 1.0


def test_custom_flat_accepted_unchanged():
    p = custom_profile(np.full((4, 4), 0.25))
    assert np.all(p.sigma2 == 0.25)


def test_custom_bad_column_rejected():
    m = np.full((4, 4), 0.25)
    m[:, 0] = 0.225  # column sums to 0.9
    m[0, :] = 0.225
    with pytest.raises(ProfileError):
        custom_profile(m)


def test_custom_permutation_similar_flat():
    n = 6
    rng = np.random.default_rng(3)
    perm = rng.permutation(n)
    base = flat_profile(n).sigma2
    p = custom_profile(base[np.ix_(perm, perm)])
    assert np.allclose(p.sigma2.sum(axis=0), 1.0, atol=1e-12)


def test_identity_profile_not_simple():
    rep = assumption_report(custom_profile(np.eye(8)))
    assert not rep.eigenvalue_one_simple


def test_symmetric_offsets():
    assert list(symmetric_offsets(8)) == list(range(-3, 5))
    assert list(symmetric_offsets(7)) == list(range(-3, 4))


def test_txt_roundtrip(tmp_path):
    p = band_profile(16, 4, indicator_half)
    path = tmp_path / "profile.txt"
    p.save_txt(path)
    q = load_txt(path)
    assert np.allclose(p.sigma2, q.sigma2, atol=1e-12)


def test_profile_immutable():
    p = flat_profile(4)
    with pytest.raises(ValueError):
        p.sigma2[0, 0] = 1.0
