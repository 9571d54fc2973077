import math
from collections import Counter

import numpy as np
import pytest

from protcascade.seqio import LabeledCorpus, ProteinSequence
from protcascade.strsvm import (
    SvmError,
    SvmModel,
    kkt_residuals,
    kmer_weights,
    svm_prune,
    train_binary_svm,
    train_ovr_svm,
    weighted_feature,
)

TOY = [("WWAC", "F"), ("ACWW", "F"), ("WWAA", "F"), ("ACAC", "G"), ("CAAC", "G"), ("AACC", "G")]


def toy_corpus(rows=TOY):
    return LabeledCorpus([(ProteinSequence(f"s{i}", r), lab) for i, (r, lab) in enumerate(rows)])


def oracle_weights(rows, k, pc):
    fam_counts, total = {}, Counter()
    for res, lab in rows:
        for i in range(len(res) - k + 1):
            s = res[i : i + k]
            fam_counts.setdefault(lab, Counter())[s] += 1
            total[s] += 1
    V = len(total)
    return {
        (lab, s): math.log((fam_counts[lab][s] + pc) / (total[s] + pc * V))
        for lab in fam_counts
        for s in total
    }, V


class TestKmerWeights:
    def test_matches_enumeration(self):
        table = kmer_weights(toy_corpus(), k=2, pseudocount=1.0)
        expected, V = oracle_weights(TOY, 2, 1.0)
        for (lab, s), w in expected.items():
            assert table.weight(s)[table.families.index(lab)] == pytest.approx(w, abs=1e-12)
        assert len(table.kmers) == V

    def test_exclusive_kmer_is_maximal(self):
        table = kmer_weights(toy_corpus(), k=2)
        expected, _ = oracle_weights(TOY, 2, 1.0)
        best = max((w, s) for (lab, s), w in expected.items() if lab == "F")[1]
        assert best == "WW"
        f = table.families.index("F")
        assert table.kmers[int(np.argmax(table.weights[:, f]))] == "WW"

    def test_single_family_uniform_sign(self):
        rows = [("ACDE", "F"), ("CDEF", "F"), ("ACAC", "F")]
        table = kmer_weights(toy_corpus(rows), k=2)
        assert np.all(table.weights <= 0)

    def test_unseen_smoothing(self):
        table = kmer_weights(toy_corpus(), k=2, pseudocount=0.5)
        V = len(table.kmers)
        np.testing.assert_allclose(table.weight("YY"), math.log(0.5 / (0.5 * V)))
        assert np.all(np.isfinite(table.weight("YY")))

    def test_k_too_large(self):
        with pytest.raises(SvmError):
            kmer_weights(toy_corpus(), k=9)


class TestWeightedFeature:
    def test_length(self):
        table = kmer_weights(toy_corpus(), k=2)
        assert weighted_feature("ACDEFG", table).shape == (2,)

    def test_homopolymer(self):
        table = kmer_weights(toy_corpus(), k=2)
        np.testing.assert_allclose(weighted_feature("WWWWW", table), table.weight("WW"))

    def test_exclusive_sequence_maximizes_family(self):
        table = kmer_weights(toy_corpus(), k=2)
        v = weighted_feature("WWW", table)
        assert np.argmax(v) == table.families.index("F")

    def test_too_short(self):
        table = kmer_weights(toy_corpus(), k=3)
        with pytest.raises(SvmError):
            weighted_feature("AC", table)


def separable_toy(rng, n=30):
    w = rng.normal(size=2)
    X = rng.normal(size=(n, 2))
    score = X @ w
    keep = np.abs(score) > 0.3
    X, score = X[keep], score[keep]
    y = np.where(score > 0, 1.0, -1.0)
    if len(set(y)) < 2:
        return separable_toy(rng, n)
    return X, y


class TestBinarySvm:
    def test_analytic_max_margin(self):
        m = train_binary_svm([[1, 0], [-1, 0]], [1, -1], C=1e6)
        np.testing.assert_allclose(m.w, [1, 0], atol=1e-3)
        assert m.b == pytest.approx(0, abs=1e-3)

    def test_duplicated_data_same_signs(self):
        rng = np.random.default_rng(0)
        X, y = separable_toy(rng)
        a = train_binary_svm(X, y, C=10)
        b = train_binary_svm(np.vstack([X, X]), np.concatenate([y, y]), C=10)
        probe = rng.normal(size=(200, 2)) * 3
        agree = np.mean(np.sign(a.decision(probe)) == np.sign(b.decision(probe)))
        assert np.array_equal(np.sign(a.decision(X)), np.sign(b.decision(X)))
        assert agree > 0.97

    def test_xor_small_c(self):
        X = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1], [2, 2], [-2, -2], [2, -2], [-2, 2]], float)
        y = np.array([1, 1, -1, -1, 1, 1, -1, -1], float)
        m = train_binary_svm(X, y, C=0.1)
        assert np.any(y * m.decision(X) < 1)  # some slack is used
        assert kkt_residuals(m.alpha, y, m.decision(X), 0.1).max() <= 1e-3
        assert np.all(np.isfinite(m.w))

    def test_dual_objective_nondecreasing(self):
        rng = np.random.default_rng(1)
        for C in (0.1, 1.0, 10.0):
            X = rng.normal(size=(40, 3))
            y = np.where(X[:, 0] + 0.5 * rng.normal(size=40) > 0, 1.0, -1.0)
            m = train_binary_svm(X, y, C=C, trace=True)
            assert len(m.dual_trace) > 0
            assert np.all(np.diff(m.dual_trace) >= -1e-10)

    def test_separable_margins(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            X, y = separable_toy(rng)
            m = train_binary_svm(X, y, C=1e4)
            assert np.all(y * m.decision(X) >= 1 - 1e-3)

    def test_single_class(self):
        with pytest.raises(SvmError):
            train_binary_svm([[0, 1], [1, 0]], [1, 1])


class TestOvr:
    def test_three_blobs(self):
        rng = np.random.default_rng(3)
        centers = {"A": (5, 0), "B": (-5, 0), "C": (0, 6)}
        X, y = [], []
        for lab, c in centers.items():
            X.append(rng.normal(c, 0.5, size=(15, 2)))
            y += [lab] * 15
        model = train_ovr_svm(np.vstack(X), y, C=1.0)
        assert model.families == ["A", "B", "C"]
        for lab, c in centers.items():
            assert model.families[int(np.argmax(model.margins(c)))] == lab

    def test_single_label(self):
        with pytest.raises(SvmError):
            train_ovr_svm([[0.0], [1.0]], ["A", "A"])


class TestPrune:
    model = SvmModel(["A", "B", "C", "D", "E"], np.eye(5), np.zeros(5))

    def test_all_negative_keeps_two(self):
        survivors, margins = svm_prune(self.model, [-5, -1, -3, -2, -4], list("ABCDE"))
        assert sorted(survivors) == ["B", "D"]
        assert margins["B"] == -1

    def test_single_positive(self):
        survivors, _ = svm_prune(self.model, [-1, -1, 2, -1, -1], list("ABCDE"))
        assert survivors == ["C"]

    def test_single_candidate(self):
        survivors, _ = svm_prune(self.model, [-1, -1, -1, -1, -1], ["D"])
        assert survivors == ["D"]

    def test_subset_and_nonempty(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            cands = [f for f in "ABCDE" if rng.uniform() < 0.6] or ["A"]
            survivors, _ = svm_prune(self.model, rng.normal(size=5), cands)
            assert survivors and set(survivors) <= set(cands)
