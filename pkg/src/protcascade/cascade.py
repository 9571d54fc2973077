"""Four-phase cascade: band prefilter, Fuzzy ARTMAP, SVM + MLP, rough sets.

Each phase either decides or narrows the candidate family set for the next.
The last phase always decides.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from protcascade import artmap as am
from protcascade.features import exchange_two_gram, physico_vector, two_gram
from protcascade.neuralnet import DEFAULT_EPOCHS, DEFAULT_HIDDEN, DEFAULT_LEARNING_RATE
from protcascade.neuralnet import MlpConfig, forward, init_mlp, restrict, train_backprop
from protcascade.roughset import (
    DEFAULT_BINS,
    NO_MATCH,
    build_rdt,
    discretize,
    greedy_reduct,
    neighborhood_classify,
    rule_classify,
)
from protcascade.seqio import LabeledCorpus, ProteinSequence, SequenceError
from protcascade.spectral import (
    DEFAULT_SLACK,
    DEFAULT_SPECTRAL_BINS,
    DEFAULT_THETA,
    DEFAULT_TOP_K,
    KnowledgeBase,
    build_family_bands_from_vectors,
    spectral_features,
)
from protcascade.strsvm import (
    DEFAULT_C,
    DEFAULT_K,
    DEFAULT_PSEUDOCOUNT,
    SvmModel,
    kmer_weights,
    svm_prune,
    train_ovr_svm,
    weighted_feature,
)
from protcascade.warehouse import ModelBundle, RoughSetArtifacts


class CascadeError(ValueError):
    pass


class FamilyMismatchError(CascadeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    k: int = DEFAULT_K
    pseudocount: float = DEFAULT_PSEUDOCOUNT
    C: float = DEFAULT_C
    bins: int = DEFAULT_BINS
    rho: float = 0.75
    beta: float = 1.0
    hidden: int = DEFAULT_HIDDEN
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 1
    top_k: int = DEFAULT_TOP_K
    slack: float = DEFAULT_SLACK
    spectral_bins: int = DEFAULT_SPECTRAL_BINS


@dataclass(frozen=True)
class CascadeConfig:
    theta_prefilter: float = DEFAULT_THETA
    tau2: float = 0.9
    tau3: float = 0.9
    radius: int = 1

    def __post_init__(self):
        for name in ("theta_prefilter", "tau2", "tau3"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise CascadeError(f"{name} must lie in [0, 1], got {v}")
        if self.radius < 0:
            raise CascadeError("radius must be >= 0")


@dataclass
class Verdict:
    id: str
    family: str
    confidence: float
    phase_decided: int
    candidates_per_phase: list[list[str]]
    fail_open: list[bool]  # per phase: candidate set restored instead of emptied
    timings: list[float] = field(default_factory=list)  # seconds per executed phase

    def to_line(self) -> str:
        counts = ",".join(str(len(c)) for c in self.candidates_per_phase)
        return f"{self.id}\t{self.family}\t{self.confidence:.6f}\t{self.phase_decided}\t{counts}"


def gate(confidence: float, tau: float) -> bool:
    """Early-exit test. A threshold of 1.0 closes the gate entirely."""
    return tau < 1.0 and confidence >= tau


def nn_features(seq, m: int = DEFAULT_SPECTRAL_BINS) -> np.ndarray:
    """2-gram (400) + exchange 2-gram (36) + spectral magnitudes (m)."""
    return np.concatenate([two_gram(seq), exchange_two_gram(seq), spectral_features(seq, m)])


def train_bundle(corpus: LabeledCorpus, cfg: TrainConfig = TrainConfig()) -> ModelBundle:
    """Fit every phase's model on a cleaned corpus."""
    if len(corpus) == 0:
        raise CascadeError("empty training corpus")
    corpus.check()
    families = corpus.families
    fam_index = {f: i for i, f in enumerate(families)}
    seqs = [seq for seq, _ in corpus.records]
    labels = [label for _, label in corpus.records]
    short = [s.id for s in seqs if len(s) < max(2, cfg.k)]
    if short:
        raise CascadeError(f"sequence {short[0]!r} shorter than max(2, k={cfg.k})")

    physico = np.array([physico_vector(s) for s in seqs])
    kb = build_family_bands_from_vectors(physico, labels, families, cfg.top_k, cfg.slack)

    params = am.ArtmapParams(rho_base=cfg.rho, beta=cfg.beta)
    artmap = am.train(zip(kb.scale(physico), labels), params)

    table = kmer_weights(corpus, cfg.k, cfg.pseudocount)
    svm_x = np.array([weighted_feature(s, table) for s in seqs])
    if len(families) >= 2:
        svm = train_ovr_svm(svm_x, labels, cfg.C, families)
    else:
        # one-vs-rest is undefined for one family; a constant positive margin keeps it
        svm = SvmModel(families, np.zeros((1, svm_x.shape[1])), np.ones(1), cfg.C)

    nn_x = np.array([nn_features(s, cfg.spectral_bins) for s in seqs])
    nn_mean = nn_x.mean(axis=0)
    nn_scale = nn_x.std(axis=0)
    nn_scale[nn_scale == 0] = 1.0
    mlp_cfg = MlpConfig(
        layer_sizes=(nn_x.shape[1], cfg.hidden, len(families)),
        learning_rate=cfg.learning_rate,
        epochs=cfg.epochs,
        seed=cfg.seed,
    )
    mlp = train_backprop(
        init_mlp(mlp_cfg), zip((nn_x - nn_mean) / nn_scale, (fam_index[l] for l in labels))
    )

    dtable = discretize(physico, labels, cfg.bins)
    reduct = greedy_reduct(dtable)
    rules = build_rdt(dtable, reduct)

    return ModelBundle(
        families=families,
        kb=kb,
        artmap=artmap,
        kmer_table=table,
        svm=svm,
        mlp=mlp,
        nn_mean=nn_mean,
        nn_scale=nn_scale,
        rough=RoughSetArtifacts(dtable, reduct, rules),
        config=asdict(cfg),
    )


def _prefilter(kb: KnowledgeBase, features, theta: float) -> tuple[list[str], bool]:
    f = np.asarray(features, dtype=float)
    inside = (f >= kb.bands[..., 0]) & (f <= kb.bands[..., 1])
    hits = [fam for fam, frac in zip(kb.families, inside.mean(axis=1)) if frac >= theta]
    return (hits, False) if hits else (list(kb.families), True)


def classify_cascade(
    kb: KnowledgeBase, bundle: ModelBundle, seq: ProteinSequence, cfg: CascadeConfig = CascadeConfig()
) -> Verdict:
    if list(kb.families) != list(bundle.families):
        raise FamilyMismatchError(
            f"knowledge base families {kb.families} differ from bundle families {bundle.families}"
        )
    seq.validate()
    k = bundle.kmer_table.k
    if len(seq) < max(2, k):
        raise SequenceError(f"sequence {seq.id!r} shorter than max(2, k={k})")

    stages: list[list[str]] = []
    fail_open: list[bool] = []
    timings: list[float] = []

    def verdict(family, confidence):
        return Verdict(seq.id, family, float(confidence), len(stages), stages, fail_open, timings)

    # phase 1: spectral band prefilter
    t0 = time.perf_counter()
    phys = physico_vector(seq)
    cands, restored = _prefilter(kb, phys, cfg.theta_prefilter)
    stages.append(cands)
    fail_open.append(restored)
    timings.append(time.perf_counter() - t0)
    if len(cands) == 1:
        return verdict(cands[0], 1.0)

    # phase 2: Fuzzy ARTMAP on scaled physicochemical features
    t0 = time.perf_counter()
    scaled = kb.scale(phys)
    label, conf = am.classify(bundle.artmap, scaled, candidates=cands)
    if gate(conf, cfg.tau2):
        stages.append(list(cands))
        fail_open.append(False)
        timings.append(time.perf_counter() - t0)
        return verdict(label, conf)
    best = am.family_matches(bundle.artmap, scaled)
    kept = [f for f in cands if best.get(f, 0.0) >= cfg.tau2 / 2]
    restored = not kept
    cands = kept if kept else list(cands)
    stages.append(cands)
    fail_open.append(restored)
    timings.append(time.perf_counter() - t0)

    # phase 3: SVM pruning, MLP decision among survivors
    t0 = time.perf_counter()
    survivors, _ = svm_prune(bundle.svm, weighted_feature(seq, bundle.kmer_table), cands)
    m = int(bundle.config.get("spectral_bins", DEFAULT_SPECTRAL_BINS))
    x = (nn_features(seq, m) - bundle.nn_mean) / bundle.nn_scale
    probs = restrict(forward(bundle.mlp, x), [bundle.families.index(f) for f in survivors])
    best_i = int(np.argmax(probs))
    stages.append(survivors)
    fail_open.append(False)
    timings.append(time.perf_counter() - t0)
    if gate(probs[best_i], cfg.tau3):
        return verdict(survivors[best_i], probs[best_i])

    # phase 4: reduct rules, neighbourhood vote as fallback
    t0 = time.perf_counter()
    rough = bundle.rough
    row = rough.table.bin_row(phys)
    rule_label = rule_classify(rough.rules, row, candidates=survivors)
    if rule_label is not NO_MATCH:
        rule = next(r for r in rough.rules.ordered() if r.label in survivors and r.matches(row))
        family, conf = rule_label, rule.purity
    else:
        family, conf = neighborhood_classify(
            rough.table, rough.reduct, row, cfg.radius, candidates=survivors
        )
    stages.append(list(survivors))
    fail_open.append(False)
    timings.append(time.perf_counter() - t0)
    return verdict(family, conf)


@dataclass
class Metrics:
    n: int
    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    phase_counts: dict[int, int]
    phase_latency: dict[int, float]  # mean seconds per sequence that ran the phase
    verdicts: list[Verdict] = field(default_factory=list, repr=False)

    def to_tsv(self) -> str:
        lines = [f"n\t{self.n}", f"accuracy\t{self.accuracy:.6f}"]
        for fam in sorted(self.precision):
            lines.append(f"family\t{fam}\tprecision\t{self.precision[fam]:.6f}\trecall\t{self.recall[fam]:.6f}")
        for p in range(1, 5):
            lines.append(
                f"phase\t{p}\tdecided\t{self.phase_counts.get(p, 0)}"
                f"\tmean_ms\t{1000 * self.phase_latency.get(p, 0.0):.3f}"
            )
        return "\n".join(lines) + "\n"


def evaluate(
    kb: KnowledgeBase, bundle: ModelBundle, test: LabeledCorpus, cfg: CascadeConfig = CascadeConfig()
) -> Metrics:
    if len(test) == 0:
        raise CascadeError("empty test set")
    verdicts = [classify_cascade(kb, bundle, seq, cfg) for seq, _ in test.records]
    truth = [label for _, label in test.records]
    pred = [v.family for v in verdicts]
    correct = sum(t == p for t, p in zip(truth, pred))
    precision, recall = {}, {}
    for fam in sorted(set(truth) | set(pred)):
        tp = sum(t == fam and p == fam for t, p in zip(truth, pred))
        n_pred = sum(p == fam for p in pred)
        n_true = sum(t == fam for t in truth)
        precision[fam] = tp / n_pred if n_pred else 0.0
        recall[fam] = tp / n_true if n_true else 0.0
    counts = Counter(v.phase_decided for v in verdicts)
    latency = {}
    for p in range(1, 5):
        ran = [v.timings[p - 1] for v in verdicts if len(v.timings) >= p]
        if ran:
            latency[p] = sum(ran) / len(ran)
    return Metrics(
        n=len(verdicts),
        accuracy=correct / len(verdicts),
        precision=precision,
        recall=recall,
        phase_counts=dict(sorted(counts.items())),
        phase_latency=latency,
        verdicts=verdicts,
    )
