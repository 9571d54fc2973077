"""The trained model bundle and its ``CPSC1`` text serialization.

File layout: the first line is the version tag. Each section opens with an
``@name`` line and holds tab-separated entries ``kind, key, [shape], values``
where kind is one of ``i`` (int), ``f`` (float), ``S`` (string list),
``I`` (int array) or ``F`` (float array). Reals are written with 17
significant digits. The file ends with ``@end``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from protcascade.artmap import ArtmapModel, ArtmapParams
from protcascade.neuralnet import MlpConfig, MlpModel
from protcascade.roughset import DecisionTable, Reduct, Rule, RuleBase
from protcascade.spectral import KnowledgeBase
from protcascade.strsvm import KmerWeightTable, SvmModel

FORMAT_VERSION = "CPSC1"
SECTIONS = ("families", "config", "knowledge_base", "artmap", "kmers", "svm", "mlp", "roughset")


class WarehouseError(Exception):
    pass


class VersionError(WarehouseError):
    pass


class BundleParseError(WarehouseError):
    pass


class BundleValidationError(WarehouseError):
    pass


@dataclass
class RoughSetArtifacts:
    table: DecisionTable
    reduct: Reduct
    rules: RuleBase


@dataclass
class ModelBundle:
    families: list[str]
    kb: KnowledgeBase
    artmap: ArtmapModel
    kmer_table: KmerWeightTable
    svm: SvmModel
    mlp: MlpModel
    nn_mean: np.ndarray
    nn_scale: np.ndarray
    rough: RoughSetArtifacts
    config: dict = field(default_factory=dict)
    version: str = FORMAT_VERSION

    def validate(self) -> "ModelBundle":
        fams = self.families
        if self.version != FORMAT_VERSION:
            raise BundleValidationError(f"bundle version {self.version!r}")
        if len(set(fams)) != len(fams) or not fams:
            raise BundleValidationError("family list empty or repeated")
        try:
            self.kb.validate()
            self.artmap.validate(fams)
            self.kmer_table.validate()
            self.svm.validate()
            self.mlp.validate()
            self.rough.table.validate()
        except ValueError as exc:
            raise BundleValidationError(str(exc)) from exc
        for name, other in (
            ("knowledge base", self.kb.families),
            ("k-mer table", self.kmer_table.families),
            ("svm", self.svm.families),
        ):
            if list(other) != list(fams):
                raise BundleValidationError(f"{name} family list differs from bundle families")
        if self.mlp.config.layer_sizes[-1] != len(fams):
            raise BundleValidationError("MLP output size differs from family count")
        if self.nn_mean.shape != (self.mlp.config.layer_sizes[0],) or self.nn_scale.shape != self.nn_mean.shape:
            raise BundleValidationError("NN standardiser shape differs from MLP input")
        if not set(self.rough.table.labels) <= set(fams):
            raise BundleValidationError("decision table label outside family list")
        reduct = set(self.rough.reduct.attrs)
        if not reduct <= set(range(self.rough.table.n_attrs)):
            raise BundleValidationError("reduct attribute out of range")
        for rule in self.rough.rules.rules:
            if rule.label not in fams:
                raise BundleValidationError(f"rule label {rule.label!r} outside family list")
            if any(a not in reduct for a, _ in rule.conditions):
                raise BundleValidationError("rule uses a non-reduct attribute")
        return self


# -- writing ---------------------------------------------------------------


def _fmt_float(x) -> str:
    return format(float(x), ".17g")


def _check_token(s: str) -> str:
    if not s or any(c in s for c in "\t\n\r"):
        raise WarehouseError(f"string {s!r} cannot be stored (empty or contains tab/newline)")
    return s


class _Writer:
    def __init__(self):
        self.lines = [FORMAT_VERSION]

    def section(self, name):
        self.lines.append(f"@{name}")

    def int(self, key, v):
        self.lines.append(f"i\t{key}\t{int(v)}")

    def float(self, key, v):
        self.lines.append(f"f\t{key}\t{_fmt_float(v)}")

    def strings(self, key, items):
        self.lines.append("\t".join(["S", key] + [_check_token(s) for s in items]))

    def ints(self, key, arr):
        arr = np.asarray(arr, dtype=np.int64)
        shape = ",".join(str(d) for d in arr.shape)
        self.lines.append("\t".join(["I", key, shape] + [str(int(v)) for v in arr.reshape(-1)]))

    def floats(self, key, arr):
        arr = np.asarray(arr, dtype=float)
        shape = ",".join(str(d) for d in arr.shape)
        self.lines.append("\t".join(["F", key, shape] + [_fmt_float(v) for v in arr.reshape(-1)]))

    def text(self) -> str:
        return "\n".join(self.lines + ["@end"]) + "\n"


def _config_entries(w: _Writer, config: dict):
    for key in sorted(config):
        v = config[key]
        if isinstance(v, bool) or isinstance(v, (int, np.integer)):
            w.int(key, int(v))
        elif isinstance(v, (float, np.floating)):
            w.float(key, v)
        else:
            w.strings(key, [str(v)])


def dumps_bundle(bundle: ModelBundle) -> str:
    w = _Writer()
    w.section("families")
    w.strings("names", bundle.families)

    w.section("config")
    _config_entries(w, bundle.config)

    kb = bundle.kb
    w.section("knowledge_base")
    w.int("top_k", kb.top_k)
    w.float("slack", kb.slack)
    w.floats("bands", kb.bands)
    w.floats("scaler_min", kb.scaler_min)
    w.floats("scaler_max", kb.scaler_max)

    am = bundle.artmap
    w.section("artmap")
    w.float("rho_base", am.params.rho_base)
    w.float("alpha", am.params.alpha)
    w.float("beta", am.params.beta)
    w.float("eps_mt", am.params.eps_mt)
    w.int("epochs", am.params.epochs)
    w.int("d", am.d)
    w.floats("weights", am.weights)
    w.ints("labels", [bundle.families.index(lab) for lab in am.labels])

    kt = bundle.kmer_table
    w.section("kmers")
    w.int("k", kt.k)
    w.float("pseudocount", kt.pseudocount)
    w.strings("kmers", kt.kmers)
    w.floats("weights", kt.weights)
    w.floats("unseen", kt.unseen)

    w.section("svm")
    w.float("C", bundle.svm.C)
    w.floats("W", bundle.svm.W)
    w.floats("b", bundle.svm.b)

    mlp = bundle.mlp
    w.section("mlp")
    w.ints("layer_sizes", list(mlp.config.layer_sizes))
    w.float("learning_rate", mlp.config.learning_rate)
    w.int("epochs", mlp.config.epochs)
    w.int("seed", mlp.config.seed)
    for i, (wt, b) in enumerate(zip(mlp.weights, mlp.biases)):
        w.floats(f"W{i}", wt)
        w.floats(f"b{i}", b)
    w.floats("input_mean", bundle.nn_mean)
    w.floats("input_scale", bundle.nn_scale)

    rs = bundle.rough
    w.section("roughset")
    w.int("bins", rs.table.bins)
    w.ints("boundary_counts", [len(c) for c in rs.table.boundaries])
    w.floats("boundaries", [v for cuts in rs.table.boundaries for v in cuts])
    w.ints("rows", rs.table.rows)
    w.ints("row_labels", [bundle.families.index(lab) for lab in rs.table.labels])
    w.ints("reduct", rs.reduct.attrs)
    w.float("gamma", rs.reduct.gamma)
    rules = rs.rules.rules
    w.ints("rule_labels", [bundle.families.index(r.label) for r in rules])
    w.ints("rule_support", [r.support for r in rules])
    w.floats("rule_purity", [r.purity for r in rules])
    w.ints("rule_sizes", [len(r.conditions) for r in rules])
    conds = [pair for r in rules for pair in r.conditions]
    w.ints("rule_conditions", np.array(conds, dtype=np.int64).reshape(-1, 2))
    return w.text()


def save_bundle(bundle: ModelBundle, path) -> None:
    text = dumps_bundle(bundle)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise WarehouseError(f"cannot write bundle to {os.fspath(path)}: {exc.strerror}") from exc


# -- reading ---------------------------------------------------------------


def _parse_sections(text: str) -> dict[str, dict]:
    lines = text.split("\n")
    if not lines or lines[0].strip() != FORMAT_VERSION:
        found = lines[0].strip() if lines else ""
        raise VersionError(f"bundle version {found!r}, expected {FORMAT_VERSION!r}")
    sections: dict[str, dict] = {}
    current = None
    ended = False
    for line in lines[1:]:
        if ended:
            if line.strip():
                raise BundleParseError("content after @end")
            continue
        if line == "@end":
            ended = True
            continue
        if line.startswith("@"):
            current = line[1:]
            if current in sections:
                raise BundleParseError(f"section {current!r} repeated")
            sections[current] = {}
            continue
        if current is None:
            raise BundleParseError("entry before first section")
        try:
            key, value = _parse_entry(line)
        except (ValueError, IndexError) as exc:
            raise BundleParseError(f"section {current!r}: malformed entry ({exc})") from None
        sections[current][key] = value
    if not ended:
        raise BundleParseError(f"truncated bundle: no @end (last section {current!r})")
    missing = [s for s in SECTIONS if s not in sections]
    if missing:
        raise BundleParseError(f"missing section(s): {', '.join(missing)}")
    return sections


def _parse_entry(line: str):
    parts = line.split("\t")
    kind, key = parts[0], parts[1]
    if kind == "i":
        (v,) = parts[2:]
        return key, int(v)
    if kind == "f":
        (v,) = parts[2:]
        return key, float(v)
    if kind == "S":
        return key, parts[2:]
    if kind in ("I", "F"):
        shape = tuple(int(d) for d in parts[2].split(",")) if parts[2] else ()
        dtype = np.int64 if kind == "I" else float
        values = np.array([dtype(v) for v in parts[3:]], dtype=dtype)
        if values.size != int(np.prod(shape)):
            raise ValueError(f"{key}: {values.size} values for shape {shape}")
        return key, values.reshape(shape)
    raise ValueError(f"unknown entry kind {kind!r}")


def _get(sections, section, key):
    try:
        return sections[section][key]
    except KeyError:
        raise BundleParseError(f"section {section!r}: missing entry {key!r}") from None


def loads_bundle(text: str) -> ModelBundle:
    s = _parse_sections(text)
    g = lambda sec, key: _get(s, sec, key)  # noqa: E731
    families = list(g("families", "names"))

    def labels_of(idx):
        try:
            return [families[int(i)] for i in idx]
        except IndexError:
            raise BundleValidationError("family index out of range") from None

    try:
        kb = KnowledgeBase(
            families=families,
            bands=g("knowledge_base", "bands"),
            scaler_min=g("knowledge_base", "scaler_min"),
            scaler_max=g("knowledge_base", "scaler_max"),
            top_k=g("knowledge_base", "top_k"),
            slack=g("knowledge_base", "slack"),
        )
        params = ArtmapParams(
            rho_base=g("artmap", "rho_base"),
            alpha=g("artmap", "alpha"),
            beta=g("artmap", "beta"),
            eps_mt=g("artmap", "eps_mt"),
            epochs=g("artmap", "epochs"),
        )
        artmap = ArtmapModel(
            weights=g("artmap", "weights"),
            labels=labels_of(g("artmap", "labels")),
            d=g("artmap", "d"),
            params=params,
        )
        kmer_table = KmerWeightTable(
            k=g("kmers", "k"),
            families=families,
            kmers=list(g("kmers", "kmers")),
            weights=g("kmers", "weights").reshape(-1, len(families)),
            unseen=g("kmers", "unseen"),
            pseudocount=g("kmers", "pseudocount"),
        )
        svm = SvmModel(families, g("svm", "W"), g("svm", "b"), g("svm", "C"))
        sizes = tuple(int(v) for v in g("mlp", "layer_sizes"))
        mlp_cfg = MlpConfig(
            layer_sizes=sizes,
            learning_rate=g("mlp", "learning_rate"),
            epochs=g("mlp", "epochs"),
            seed=g("mlp", "seed"),
        )
        n_layers = len(sizes) - 1
        mlp = MlpModel(
            [g("mlp", f"W{i}") for i in range(n_layers)],
            [g("mlp", f"b{i}") for i in range(n_layers)],
            mlp_cfg,
        )
        counts = [int(c) for c in g("roughset", "boundary_counts")]
        flat = list(g("roughset", "boundaries"))
        if sum(counts) != len(flat):
            raise BundleParseError("section 'roughset': boundary counts disagree with values")
        boundaries, pos = [], 0
        for c in counts:
            boundaries.append([float(v) for v in flat[pos : pos + c]])
            pos += c
        rows = g("roughset", "rows")
        table = DecisionTable(
            rows=rows.reshape(-1, len(counts)),
            labels=labels_of(g("roughset", "row_labels")),
            boundaries=boundaries,
            bins=g("roughset", "bins"),
        )
        reduct = Reduct([int(a) for a in g("roughset", "reduct")], g("roughset", "gamma"))
        sizes_r = [int(v) for v in g("roughset", "rule_sizes")]
        conds = g("roughset", "rule_conditions").reshape(-1, 2)
        if sum(sizes_r) != len(conds):
            raise BundleParseError("section 'roughset': rule sizes disagree with conditions")
        rule_labels = labels_of(g("roughset", "rule_labels"))
        support = g("roughset", "rule_support")
        purity = g("roughset", "rule_purity")
        rules, pos = [], 0
        for i, n in enumerate(sizes_r):
            cond = tuple((int(a), int(v)) for a, v in conds[pos : pos + n])
            rules.append(Rule(cond, rule_labels[i], int(support[i]), float(purity[i])))
            pos += n
        config = {}
        for key, v in s["config"].items():
            config[key] = v[0] if isinstance(v, list) and len(v) == 1 else v
        bundle = ModelBundle(
            families=families,
            kb=kb,
            artmap=artmap,
            kmer_table=kmer_table,
            svm=svm,
            mlp=mlp,
            nn_mean=g("mlp", "input_mean"),
            nn_scale=g("mlp", "input_scale"),
            rough=RoughSetArtifacts(table, reduct, RuleBase(rules, sorted(reduct.attrs))),
            config=config,
        )
    except WarehouseError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise BundleValidationError(str(exc)) from exc
    return bundle.validate()


def load_bundle(path) -> ModelBundle:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise WarehouseError(f"cannot read bundle {os.fspath(path)}: {exc.strerror}") from exc
    return loads_bundle(text)
