"""k-mer log-odds string weighting and one-vs-rest linear SVMs trained by SMO."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from protcascade.seqio import LabeledCorpus

DEFAULT_K = 3
DEFAULT_PSEUDOCOUNT = 1.0
DEFAULT_C = 1.0
KKT_TOL = 1e-3


class SvmError(ValueError):
    pass


def _residues(seq) -> str:
    return getattr(seq, "residues", seq)


def kmers(residues: str, k: int) -> list[str]:
    return [residues[i : i + k] for i in range(len(residues) - k + 1)]


@dataclass
class KmerWeightTable:
    k: int
    families: list[str]
    kmers: list[str]
    weights: np.ndarray  # (n_kmers, n_families)
    unseen: np.ndarray  # (n_families,) weight for k-mers absent from training
    pseudocount: float = DEFAULT_PSEUDOCOUNT
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self._index = {s: i for i, s in enumerate(self.kmers)}

    def weight(self, kmer: str) -> np.ndarray:
        i = self._index.get(kmer)
        return self.unseen if i is None else self.weights[i]

    def validate(self) -> "KmerWeightTable":
        if self.k < 2:
            raise SvmError("k must be >= 2")
        if self.weights.shape != (len(self.kmers), len(self.families)):
            raise SvmError(f"k-mer weight matrix has shape {self.weights.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.unseen))):
            raise SvmError("non-finite k-mer weight")
        return self


def kmer_weights(
    corpus: LabeledCorpus, k: int = DEFAULT_K, pseudocount: float = DEFAULT_PSEUDOCOUNT
) -> KmerWeightTable:
    """Per-family smoothed log-odds of every observed k-mer.

    ``w_F(s) = ln((n_F(s) + pc) / (n(s) + pc * V))`` with overlapping counts
    and V the number of distinct observed k-mers.
    """
    if k < 2:
        raise SvmError("k must be >= 2")
    if pseudocount <= 0:
        raise SvmError("pseudocount must be positive")
    if len(corpus) == 0:
        raise SvmError("empty corpus")
    families = corpus.families
    fam_index = {f: i for i, f in enumerate(families)}
    per_family = [Counter() for _ in families]
    for seq, label in corpus.records:
        per_family[fam_index[label]].update(kmers(_residues(seq), k))
    total = Counter()
    for c in per_family:
        total.update(c)
    if not total:
        raise SvmError(f"k={k} exceeds every sequence length")
    observed = sorted(total)
    V = len(observed)
    counts = np.array([[c[s] for c in per_family] for s in observed], dtype=float)
    background = np.array([total[s] for s in observed], dtype=float)
    weights = np.log((counts + pseudocount) / (background[:, None] + pseudocount * V))
    unseen = np.full(len(families), np.log(pseudocount / (pseudocount * V)))
    return KmerWeightTable(k, families, observed, weights, unseen, pseudocount)


def weighted_feature(seq, table: KmerWeightTable) -> np.ndarray:
    """Mean per-family weight over the sequence's k-mers."""
    residues = _residues(seq)
    if len(residues) < table.k:
        raise SvmError(f"sequence shorter than k={table.k}")
    rows = [table.weight(s) for s in kmers(residues, table.k)]
    return np.mean(rows, axis=0)


@dataclass
class BinarySvm:
    w: np.ndarray
    b: float
    alpha: np.ndarray
    n_steps: int = 0
    dual_trace: list = field(default_factory=list)

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.w + self.b


def dual_objective(alpha, y, K) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_residuals(alpha, y, f, C, bound_eps: float = 1e-8) -> np.ndarray:
    """Per-sample KKT violation of a soft-margin solution with decision values f."""
    yf = y * f
    at_zero = alpha <= bound_eps * C
    at_c = alpha >= C * (1 - bound_eps)
    free = ~(at_zero | at_c)
    res = np.zeros_like(yf)
    res[at_zero] = np.maximum(0.0, 1.0 - yf[at_zero])
    res[at_c] = np.maximum(0.0, yf[at_c] - 1.0)
    res[free] = np.abs(yf[free] - 1.0)
    return res


class _Smo:
    """Platt's SMO with a cached error vector, for a precomputed kernel."""

    def __init__(self, K, y, C, tol, eps, max_steps, trace):
        self.K, self.y, self.C, self.tol, self.eps = K, y, C, tol, eps
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.E = -y.astype(float)  # f = 0 initially
        self.steps = 0
        self.max_steps = max_steps
        self.trace = [] if trace else None

    def take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        K, y, C = self.K, self.y, self.C
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        if y1 != y2:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a2 + a1 - C), min(C, a2 + a1)
        if L >= H:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = min(max(a2 + y2 * (E1 - E2) / eta, L), H)
        else:
            # objective is linear along the constraint line: pick the better end
            def obj_at(a2v):
                trial = self.alpha.copy()
                trial[i2] = a2v
                trial[i1] = a1 + s * (a2 - a2v)
                return dual_objective(trial, y, K)

            lo_obj, hi_obj = obj_at(L), obj_at(H)
            if lo_obj > hi_obj + self.eps:
                a2_new = L
            elif hi_obj > lo_obj + self.eps:
                a2_new = H
            else:
                a2_new = a2
        if abs(a2_new - a2) < self.eps * (a2_new + a2 + self.eps):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < 0:  # rounding guard
            a2_new += s * a1_new
            a1_new = 0.0
        elif a1_new > C:
            a2_new += s * (a1_new - C)
            a1_new = C

        d1, d2 = y1 * (a1_new - a1), y2 * (a2_new - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0 < a1_new < C:
            b_new = b1
        elif 0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        self.E += d1 * K[i1] + d2 * K[i2] + (b_new - self.b)
        self.b = b_new
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        self.steps += 1
        if self.trace is not None:
            self.trace.append(dual_objective(self.alpha, y, K))
        return True

    def examine(self, i2: int) -> int:
        y2, a2, E2 = self.y[i2], self.alpha[i2], self.E[i2]
        r2 = E2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return 0
        free = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
        if len(free) > 1:
            i1 = int(free[np.argmax(np.abs(self.E[free] - E2))])
            if self.take_step(i1, i2):
                return 1
        for i1 in free:
            if self.take_step(int(i1), i2):
                return 1
        for i1 in range(self.n):
            if self.take_step(i1, i2):
                return 1
        return 0

    def run(self):
        changed, examine_all = 0, True
        while (changed > 0 or examine_all) and self.steps < self.max_steps:
            changed = 0
            if examine_all:
                candidates = range(self.n)
            else:
                candidates = np.flatnonzero((self.alpha > 0) & (self.alpha < self.C))
            for i in candidates:
                changed += self.examine(int(i))
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True


def train_binary_svm(
    X, y, C: float = DEFAULT_C, tol: float = KKT_TOL, max_steps: int = 200_000, trace: bool = False
) -> BinarySvm:
    """Soft-margin linear SVM dual by SMO; labels must be +1/-1."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if C <= 0:
        raise SvmError("C must be positive")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise SvmError("binary SVM needs both +1 and -1 labels")
    K = X @ X.T
    smo = _Smo(K, y, C, tol, 1e-12, max_steps, trace)
    smo.run()
    alpha = smo.alpha
    w = (alpha * y) @ X
    b = _recover_bias(alpha, y, X @ w, C, smo.b)
    return BinarySvm(w=w, b=b, alpha=alpha, n_steps=smo.steps, dual_trace=smo.trace or [])


def _recover_bias(alpha, y, wx, C, fallback: float, bound_eps: float = 1e-8) -> float:
    """Bias from the free support vectors, else the middle of the KKT-feasible interval."""
    free = (alpha > bound_eps * C) & (alpha < C * (1 - bound_eps))
    if np.any(free):
        return float(np.mean(y[free] - wx[free]))
    # b must satisfy y_i (wx_i + b) >= 1 at alpha=0 and <= 1 at alpha=C
    threshold = y - wx
    pos, neg = y > 0, y < 0
    at_zero, at_c = alpha <= bound_eps * C, ~free & (alpha > bound_eps * C)
    lo_parts = list(threshold[pos & at_zero]) + list(threshold[neg & at_c])
    hi_parts = list(threshold[neg & at_zero]) + list(threshold[pos & at_c])
    lo = max(lo_parts) if lo_parts else None
    hi = min(hi_parts) if hi_parts else None
    if lo is not None and hi is not None and lo <= hi:
        return float(0.5 * (lo + hi))
    return float(fallback)


@dataclass
class SvmModel:
    families: list[str]
    W: np.ndarray  # (n_families, dim)
    b: np.ndarray  # (n_families,)
    C: float = DEFAULT_C

    def margins(self, x) -> np.ndarray:
        return self.W @ np.asarray(x, dtype=float) + self.b

    def validate(self) -> "SvmModel":
        if self.W.shape[0] != len(self.families) or self.b.shape != (len(self.families),):
            raise SvmError("SVM parameter shapes disagree with the family list")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise SvmError("non-finite SVM parameter")
        return self


def train_ovr_svm(X, y, C: float = DEFAULT_C, families=None) -> SvmModel:
    """One binary SVM per family against the rest."""
    X = np.asarray(X, dtype=float)
    labels = list(y)
    families = list(families) if families is not None else sorted(set(labels))
    if len(set(labels)) < 2:
        raise SvmError("one-vs-rest training needs at least two distinct labels")
    W = np.zeros((len(families), X.shape[1]))
    b = np.zeros(len(families))
    for i, fam in enumerate(families):
        yy = np.array([1.0 if lab == fam else -1.0 for lab in labels])
        if np.all(yy < 0):
            raise SvmError(f"family {fam!r} has no training samples")
        model = train_binary_svm(X, yy, C)
        W[i], b[i] = model.w, model.b
    return SvmModel(families, W, b, C)


def svm_prune(model: SvmModel, x, candidates) -> tuple[list[str], dict[str, float]]:
    """Keep candidates with a positive one-vs-rest margin.

    With no positive margin, the two best-scoring candidates survive (one
    if only one was given).
    """
    candidates = list(candidates)
    scores = model.margins(x)
    margins = {f: float(scores[model.families.index(f)]) for f in candidates}
    survivors = [f for f in candidates if margins[f] > 0]
    if not survivors:
        ranked = sorted(candidates, key=lambda f: (-margins[f], candidates.index(f)))
        survivors = ranked[: min(2, len(candidates))]
        survivors = [f for f in candidates if f in survivors]
    return survivors, margins
