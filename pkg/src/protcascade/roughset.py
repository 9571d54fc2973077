"""Rough-set classification: decision tables, reducts, reduct-based decision trees
and Hamming-ball neighbourhood voting."""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

DEFAULT_BINS = 5
NO_MATCH = None


class RoughSetError(ValueError):
    pass


@dataclass
class DecisionTable:
    rows: np.ndarray  # (n_rows, n_attrs) bin indices
    labels: list[str]
    boundaries: list[list[float]]  # per attribute, strictly increasing cut points
    bins: int = DEFAULT_BINS

    @property
    def n_attrs(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def bin_row(self, values) -> np.ndarray:
        """Map raw attribute values to bins; out-of-range values land in edge bins."""
        return np.array([bisect_right(cuts, v) for cuts, v in zip(self.boundaries, values)])

    def validate(self) -> "DecisionTable":
        if self.rows.ndim != 2 or len(self.labels) != self.rows.shape[0]:
            raise RoughSetError("decision table rows and labels disagree")
        if len(self.boundaries) != self.n_attrs:
            raise RoughSetError("boundary list length differs from attribute count")
        for a, cuts in enumerate(self.boundaries):
            if any(x >= y for x, y in zip(cuts, cuts[1:])):
                raise RoughSetError(f"boundaries of attribute {a} not strictly increasing")
            if len(cuts) >= self.bins:
                raise RoughSetError(f"attribute {a} has more than {self.bins} bins")
        if self.rows.size and (self.rows.min() < 0 or self.rows.max() >= self.bins):
            raise RoughSetError("bin index out of range")
        return self


def equal_frequency_cuts(values, bins: int) -> list[float]:
    """Cut points at the b/B quantile order statistics, duplicates and the minimum dropped."""
    ordered = sorted(values)
    n = len(ordered)
    cuts: list[float] = []
    for b in range(1, bins):
        c = float(ordered[(b * n) // bins])
        if c > ordered[0] and (not cuts or c > cuts[-1]):
            cuts.append(c)
    return cuts


def discretize(vectors, labels, bins: int = DEFAULT_BINS) -> DecisionTable:
    X = np.asarray(vectors, dtype=float)
    if X.size == 0 or X.ndim != 2:
        raise RoughSetError("cannot discretize an empty table")
    if bins < 2:
        raise RoughSetError("need at least 2 bins")
    if len(labels) != X.shape[0]:
        raise RoughSetError("label count differs from row count")
    boundaries = [equal_frequency_cuts(X[:, a], bins) for a in range(X.shape[1])]
    rows = np.array(
        [[bisect_right(cuts, v) for cuts, v in zip(boundaries, row)] for row in X], dtype=np.int64
    )
    return DecisionTable(rows, list(labels), boundaries, bins)


def _positive_count(table: DecisionTable, attrs) -> int:
    attrs = list(attrs)
    groups: dict[tuple, set] = defaultdict(set)
    sizes: Counter = Counter()
    for row, label in zip(table.rows[:, attrs].tolist() if attrs else [[]] * len(table), table.labels):
        key = tuple(row)
        groups[key].add(label)
        sizes[key] += 1
    return sum(sizes[k] for k, labs in groups.items() if len(labs) == 1)


def dependency(table: DecisionTable, attrs) -> float:
    """Fraction of rows whose indiscernibility class is decision-pure."""
    if len(table) == 0:
        return 0.0
    return _positive_count(table, attrs) / len(table)


@dataclass
class Reduct:
    attrs: list[int]
    gamma: float


def greedy_reduct(table: DecisionTable) -> Reduct:
    """Forward selection by dependency gain, then backward pruning.

    Dependencies are compared as integer positive-region counts, so
    preservation of the full-attribute gamma is exact.
    """
    if len(table) == 0:
        raise RoughSetError("empty decision table")
    target = _positive_count(table, range(table.n_attrs))
    chosen: list[int] = []
    current = _positive_count(table, chosen)
    remaining = list(range(table.n_attrs))
    while current < target:
        best_attr, best_count = None, -1
        for a in remaining:
            c = _positive_count(table, sorted(chosen + [a]))
            if c > best_count:
                best_attr, best_count = a, c
        chosen.append(best_attr)
        remaining.remove(best_attr)
        current = best_count
    chosen.sort()
    for a in list(chosen):
        trial = [x for x in chosen if x != a]
        if _positive_count(table, trial) == target:
            chosen = trial
    return Reduct(chosen, target / len(table))


def exhaustive_reducts(table: DecisionTable) -> list[list[int]]:
    """All minimum-size gamma-preserving attribute subsets (test oracle)."""
    target = _positive_count(table, range(table.n_attrs))
    for size in range(table.n_attrs + 1):
        found = [list(c) for c in combinations(range(table.n_attrs), size)
                 if _positive_count(table, c) == target]
        if found:
            return found
    return [list(range(table.n_attrs))]


@dataclass
class Rule:
    conditions: tuple[tuple[int, int], ...]  # (attribute, bin)
    label: str
    support: int
    purity: float = 1.0  # fraction of supporting rows carrying the label

    def matches(self, row) -> bool:
        return all(row[a] == v for a, v in self.conditions)


@dataclass
class TreeNode:
    label: str
    support: int
    purity: float = 1.0
    attr: int | None = None
    children: dict[int, "TreeNode"] = field(default_factory=dict)


@dataclass
class RuleBase:
    rules: list[Rule]
    reduct: list[int]

    def ordered(self) -> list[Rule]:
        # stable: emission order breaks support ties
        return sorted(self.rules, key=lambda r: -r.support)


def _majority(labels: list[str]) -> str:
    counts = Counter(labels)
    best = max(counts.values())
    return next(lab for lab in labels if counts[lab] == best)


def _entropy(labels) -> float:
    n = len(labels)
    return -sum((c / n) * math.log2(c / n) for c in Counter(labels).values())


def build_tree(table: DecisionTable, reduct: Reduct) -> TreeNode:
    """ID3 over reduct attributes; children only for observed bin values."""

    def grow(idx: list[int], attrs: list[int]) -> TreeNode:
        labels = [table.labels[i] for i in idx]
        majority = _majority(labels)
        node = TreeNode(majority, len(idx), labels.count(majority) / len(idx))
        if len(set(labels)) == 1 or not attrs or len(idx) < 2:
            return node
        base = _entropy(labels)
        best_attr, best_gain = None, -1.0
        for a in attrs:
            split = defaultdict(list)
            for i in idx:
                split[int(table.rows[i, a])].append(table.labels[i])
            rem = sum(len(part) / len(idx) * _entropy(part) for part in split.values())
            gain = base - rem
            if gain > best_gain + 1e-12:
                best_attr, best_gain = a, gain
        node.attr = best_attr
        parts = defaultdict(list)
        for i in idx:
            parts[int(table.rows[i, best_attr])].append(i)
        rest = [a for a in attrs if a != best_attr]
        for value in sorted(parts):
            node.children[value] = grow(parts[value], rest)
        return node

    return grow(list(range(len(table))), sorted(reduct.attrs))


def tree_classify(node: TreeNode, row):
    while node.attr is not None:
        child = node.children.get(int(row[node.attr]))
        if child is None:
            return NO_MATCH
        node = child
    return node.label


def build_rdt(table: DecisionTable, reduct: Reduct) -> RuleBase:
    """Root-to-leaf paths of the reduct-restricted tree, as rules."""
    rules: list[Rule] = []

    def walk(node: TreeNode, path: tuple):
        if node.attr is None:
            rules.append(Rule(path, node.label, node.support, node.purity))
            return
        for value, child in node.children.items():
            walk(child, path + ((node.attr, value),))

    walk(build_tree(table, reduct), ())
    return RuleBase(rules, sorted(reduct.attrs))


def rule_classify(rules: RuleBase, row, candidates=None):
    """Label of the first matching rule by support (then emission order), or NO_MATCH.

    With ``candidates``, rules for other labels are skipped.
    """
    for rule in rules.ordered():
        if candidates is not None and rule.label not in candidates:
            continue
        if rule.matches(row):
            return rule.label
    return NO_MATCH


def neighborhood_classify(
    table: DecisionTable, reduct: Reduct, row, r: int = 1, candidates=None
) -> tuple[str, float]:
    """Majority vote among training rows within Hamming radius r on reduct attributes.

    The radius grows until some row qualifies. Vote ties go to the label
    with more training rows overall, then lexicographic order.
    """
    if r < 0:
        raise RoughSetError("radius must be >= 0")
    attrs = list(reduct.attrs)
    keep = np.arange(len(table))
    if candidates is not None:
        cand = set(candidates)
        keep = np.array([i for i, lab in enumerate(table.labels) if lab in cand], dtype=np.intp)
        if len(keep) == 0:
            raise RoughSetError("no training rows carry a candidate label")
    query = np.asarray(row)[attrs] if attrs else np.zeros(0, dtype=np.int64)
    sub = table.rows[np.ix_(keep, attrs)] if attrs else np.zeros((len(keep), 0), dtype=np.int64)
    distance = (sub != query).sum(axis=1)
    totals = Counter(table.labels[i] for i in keep)
    radius = r
    while True:
        near = keep[distance <= radius]
        if len(near) or radius >= len(attrs):
            break
        radius += 1
    votes = Counter(table.labels[i] for i in near)
    label = min(votes, key=lambda lab: (-votes[lab], -totals[lab], lab))
    return label, votes[label] / len(near)
