"""Deterministic motif-implant corpora with controllable family separability."""

from __future__ import annotations

from dataclasses import dataclass

from protcascade.rng import XorShift64Star
from protcascade.seqio import AMINO_ACIDS, LabeledCorpus, ProteinSequence


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    families: int = 5
    per_family: int = 100
    len_min: int = 60
    len_max: int = 120
    motifs: int = 3
    motif_len: int = 6
    seed: int = 42

    def validate(self) -> "SynthSpec":
        if self.families < 1 or self.per_family < 1:
            raise SynthError("need at least one family and one sequence per family")
        if self.motifs < 0 or self.motif_len < 1:
            raise SynthError("motif count must be >= 0 and motif length >= 1")
        if self.len_min > self.len_max:
            raise SynthError("len_min exceeds len_max")
        # motifs are implanted without overlap
        if self.len_min < self.motifs * self.motif_len + 2:
            raise SynthError(
                f"len_min={self.len_min} too short for {self.motifs} motifs of length "
                f"{self.motif_len} (need >= {self.motifs * self.motif_len + 2})"
            )
        if self.motifs and self.families * self.motifs > 20**self.motif_len // 2:
            raise SynthError("motif space too small for distinct motifs")
        return self


def family_name(i: int) -> str:
    return f"fam{i + 1:02d}"


def _random_residues(rng: XorShift64Star, n: int) -> str:
    return "".join(AMINO_ACIDS[rng.randbelow(20)] for _ in range(n))


def gen_motifs(spec: SynthSpec, rng: XorShift64Star) -> list[list[str]]:
    """Distinct motifs per family; collisions are resampled."""
    used: set[str] = set()
    out = []
    for _ in range(spec.families):
        fam = []
        while len(fam) < spec.motifs:
            m = _random_residues(rng, spec.motif_len)
            if m not in used:
                used.add(m)
                fam.append(m)
        out.append(fam)
    return out


def gen_synth(spec: SynthSpec) -> tuple[LabeledCorpus, list[list[str]]]:
    """Random background sequences, each carrying every family motif once.

    Motifs are inserted, in shuffled order, at random non-overlapping
    offsets; total length is drawn uniformly from ``[len_min, len_max]``.
    """
    spec.validate()
    rng = XorShift64Star(spec.seed)
    motifs = gen_motifs(spec, rng)
    records = []
    for f in range(spec.families):
        name = family_name(f)
        for j in range(spec.per_family):
            length = rng.randint(spec.len_min, spec.len_max)
            background = _random_residues(rng, length - spec.motifs * spec.motif_len)
            order = list(motifs[f])
            for i in range(len(order) - 1, 0, -1):
                k = rng.randbelow(i + 1)
                order[i], order[k] = order[k], order[i]
            cuts = sorted(rng.randint(0, len(background)) for _ in order)
            pieces, prev = [], 0
            for cut, motif in zip(cuts, order):
                pieces.append(background[prev:cut])
                pieces.append(motif)
                prev = cut
            pieces.append(background[prev:])
            records.append((ProteinSequence(f"{name}_{j + 1:04d}", "".join(pieces)), name))
    return LabeledCorpus(records), motifs
