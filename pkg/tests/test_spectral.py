import numpy as np
import pytest

from protcascade.features import N_PHYSICO, physico_vector
from protcascade.seqio import LabeledCorpus, ProteinSequence
from protcascade.spectral import (
    SpectralError,
    build_family_bands,
    build_family_bands_from_vectors,
    candidate_families,
    fft,
    ifft,
    keep_top_k,
    reconstruct_top_k,
    smoothed_range,
    spectral_features,
)


def naive_dft(x):
    x = np.asarray(x, dtype=complex)
    n = len(x)
    return np.array(
        [sum(x[j] * np.exp(-2j * np.pi * k * j / n) for j in range(n)) for k in range(n)]
    )


def random_complex(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


class TestFft:
    def test_impulse(self):
        np.testing.assert_allclose(fft([1, 0, 0, 0]), [1, 1, 1, 1], atol=1e-15)

    def test_constant(self):
        out = fft([2.5] * 8)
        np.testing.assert_allclose(out, [20] + [0] * 7, atol=1e-12)

    def test_random_length8_vs_dft(self):
        x = random_complex(np.random.default_rng(0), 8)
        assert np.max(np.abs(fft(x) - naive_dft(x))) < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 32])
    def test_dft_oracle(self, n):
        rng = np.random.default_rng(n)
        for _ in range(10):
            x = random_complex(rng, n)
            assert np.max(np.abs(fft(x) - naive_dft(x))) < 1e-9

    @pytest.mark.parametrize("n", [3, 6, 12, 0])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(SpectralError):
            fft(np.ones(n))

    def test_round_trip_and_parseval(self):
        rng = np.random.default_rng(1)
        for p in range(11):
            x = random_complex(rng, 2**p)
            X = fft(x)
            assert np.max(np.abs(ifft(X) - x)) < 1e-9
            energy = np.sum(np.abs(x) ** 2)
            assert np.sum(np.abs(X) ** 2) / len(x) == pytest.approx(energy, rel=1e-6)


class TestSpectralFeatures:
    def test_homopolymer_is_silent(self):
        np.testing.assert_allclose(spectral_features("G" * 40, 16), 0, atol=1e-9)

    def test_alternation_hits_nyquist(self):
        # G/W alternation, length 32: mean-removed signal is +-d, a pure Nyquist tone
        s = "GW" * 16
        out = spectral_features(s, 16)
        d = (186.2132 - 57.0519) / 2
        assert out[15] == pytest.approx(32 * d / 32, rel=1e-12)
        np.testing.assert_allclose(out[:15], 0, atol=1e-9)

    @pytest.mark.parametrize("m", [1, 4, 16])
    def test_length(self, m):
        assert spectral_features("ACDEFGHIKLMNPQRSTVWY", m).shape == (m,)

    def test_short_sequence_padded_to_2m(self):
        assert spectral_features("ACD", 16).shape == (16,)


class TestTopK:
    def test_conjugate_pairs_kept(self):
        rng = np.random.default_rng(3)
        X = fft(rng.uniform(size=16))
        kept = keep_top_k(X, 3)
        nz = set(np.flatnonzero(kept))
        assert all((16 - k) % 16 in nz for k in nz)
        assert np.allclose(ifft(kept).imag, 0, atol=1e-12)

    def test_full_budget_is_lossless(self):
        x = np.random.default_rng(4).uniform(size=13)
        np.testing.assert_allclose(reconstruct_top_k(x, 16), x, atol=1e-12)

    def test_dc_only(self):
        x = np.random.default_rng(5).uniform(1, 2, size=16)
        np.testing.assert_allclose(reconstruct_top_k(x, 1), x.mean(), atol=1e-12)

    def test_band_width_nonincreasing(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 40))
            x = rng.uniform(0, 10, size=n)
            size = 1 << (n - 1).bit_length()
            widths = [smoothed_range(x, k)[1] - smoothed_range(x, k)[0] for k in range(1, size + 1)]
            assert all(a <= b + 1e-9 for a, b in zip(widths, widths[1:]))

    def test_band_inside_raw_range(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.uniform(-5, 5, size=int(rng.integers(2, 30)))
            lo, hi = smoothed_range(x, int(rng.integers(1, 8)))
            assert x.min() - 1e-12 <= lo <= hi <= x.max() + 1e-12


def _family_vectors(rng, families=("A", "B"), per=8):
    vectors, labels = [], []
    for f, fam in enumerate(families):
        for _ in range(per):
            vectors.append(rng.uniform(10 * f, 10 * f + 5, size=3))
            labels.append(fam)
    return np.array(vectors), labels


class TestFamilyBands:
    def test_full_top_k_gives_raw_band(self):
        rng = np.random.default_rng(8)
        X, labels = _family_vectors(rng)
        kb = build_family_bands_from_vectors(X, labels, ["A", "B"], top_k=8, slack=0.0)
        for f, fam in enumerate(["A", "B"]):
            rows = X[np.array(labels) == fam]
            np.testing.assert_allclose(kb.bands[f, :, 0], rows.min(axis=0), atol=1e-6)
            np.testing.assert_allclose(kb.bands[f, :, 1], rows.max(axis=0), atol=1e-6)

    def test_slack_arithmetic(self):
        X = np.array([[10.0], [20.0], [15.0], [12.0]])
        kb = build_family_bands_from_vectors(X, ["A"] * 4, ["A"], top_k=4, slack=0.1)
        np.testing.assert_allclose(kb.bands[0, 0], [9.0, 21.0])

    def test_top_k_one_collapses(self):
        rng = np.random.default_rng(9)
        X, labels = _family_vectors(rng)
        kb = build_family_bands_from_vectors(X, labels, ["A", "B"], top_k=1, slack=0.0)
        for f, fam in enumerate(["A", "B"]):
            rows = X[np.array(labels) == fam]
            # DC-only reconstruction of 8 values padded to 8 is the mean itself
            np.testing.assert_allclose(kb.bands[f, :, 0], rows.mean(axis=0), atol=1e-9)
            width = kb.bands[f, :, 1] - kb.bands[f, :, 0]
            assert np.all(width <= np.ptp(rows, axis=0) + 1e-12)

    def test_small_family_rejected(self):
        X = np.ones((5, 2))
        with pytest.raises(SpectralError, match="'B'"):
            build_family_bands_from_vectors(X, ["A"] * 4 + ["B"], ["A", "B"])

    def test_scaler_bounds(self):
        rng = np.random.default_rng(10)
        X, labels = _family_vectors(rng)
        kb = build_family_bands_from_vectors(X, labels, ["A", "B"])
        np.testing.assert_array_equal(kb.scaler_min, X.min(axis=0))
        assert np.all(kb.scale(X) >= 0) and np.all(kb.scale(X) <= 1)
        np.testing.assert_array_equal(kb.scale(X + 100), 1.0)


@pytest.fixture(scope="module")
def corpus():
    rng = np.random.default_rng(11)
    recs = []
    for fam, alphabet in (("acid", "DEDEGS"), ("base", "KRKRGS")):
        for i in range(8):
            res = "".join(rng.choice(list(alphabet), size=int(rng.integers(20, 40))))
            recs.append((ProteinSequence(f"{fam}{i}", res), fam))
    return LabeledCorpus(recs)


class TestCandidateFamilies:
    def test_training_sequence_in_own_family(self, corpus):
        kb = build_family_bands(corpus, top_k=64, slack=0.0)
        for seq, fam in corpus.records:
            assert fam in candidate_families(kb, physico_vector(seq), theta=1.0)

    def test_fail_open(self, corpus):
        kb = build_family_bands(corpus, top_k=4, slack=0.0)
        far = np.full(N_PHYSICO, 1e6)
        assert candidate_families(kb, far) == kb.families

    def test_theta_zero(self, corpus):
        kb = build_family_bands(corpus, top_k=2, slack=0.0)
        rng = np.random.default_rng(12)
        for _ in range(20):
            assert candidate_families(kb, rng.normal(size=N_PHYSICO), theta=0.0) == kb.families

    def test_never_empty(self, corpus):
        kb = build_family_bands(corpus, top_k=2, slack=0.0)
        rng = np.random.default_rng(13)
        for _ in range(100):
            f = physico_vector(corpus.records[0][0]) * rng.uniform(0.5, 1.5, N_PHYSICO)
            assert candidate_families(kb, f, theta=float(rng.uniform())) != []
