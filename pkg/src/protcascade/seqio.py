"""FASTA parsing and corpus de-noising."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
_ALPHABET = frozenset(AMINO_ACIDS)

DEFAULT_MIN_LEN = 10
DEFAULT_MAX_LEN = 10000


class FastaParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class ProteinSequence:
    id: str
    residues: str

    def validate(self) -> "ProteinSequence":
        if not self.id:
            raise SequenceError("sequence id is empty")
        if not self.residues:
            raise SequenceError(f"sequence {self.id!r} is empty")
        bad = set(self.residues) - _ALPHABET
        if bad:
            raise SequenceError(
                f"sequence {self.id!r} has non-standard residues: {''.join(sorted(bad))}"
            )
        return self

    def __len__(self) -> int:
        return len(self.residues)


@dataclass
class LabeledCorpus:
    records: list[tuple[ProteinSequence, str]] = field(default_factory=list)

    @property
    def families(self) -> list[str]:
        """Distinct labels, sorted."""
        return sorted({label for _, label in self.records})

    def by_family(self, family: str) -> list[ProteinSequence]:
        return [seq for seq, label in self.records if label == family]

    def __len__(self) -> int:
        return len(self.records)

    def check(self) -> "LabeledCorpus":
        seen: set[str] = set()
        for seq, _ in self.records:
            seq.validate()
            if seq.id in seen:
                raise SequenceError(f"duplicate id {seq.id!r} in corpus")
            seen.add(seq.id)
        return self


@dataclass
class CleanReport:
    kept: int = 0
    dropped_invalid_residue: int = 0
    dropped_duplicate: int = 0
    dropped_length: int = 0

    @property
    def total(self) -> int:
        return (
            self.kept
            + self.dropped_invalid_residue
            + self.dropped_duplicate
            + self.dropped_length
        )

    def to_tsv(self) -> str:
        return "".join(
            f"{key}\t{getattr(self, key)}\n"
            for key in ("kept", "dropped_invalid_residue", "dropped_duplicate", "dropped_length")
        )


def parse_fasta(text: str) -> list[ProteinSequence]:
    """Parse FASTA text into sequences.

    The id is the header up to the first whitespace; residues are
    uppercased with all whitespace removed. Residues are not checked
    against the alphabet here, that is the job of :func:`clean_corpus`.
    """
    records: list[ProteinSequence] = []
    header: str | None = None
    chunks: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            if header is not None:
                records.append(ProteinSequence(header, "".join(chunks).upper()))
            parts = line[1:].split(None, 1)
            header = parts[0] if parts else ""
            chunks = []
        else:
            if header is None:
                raise FastaParseError("sequence data before first '>' header", lineno)
            chunks.append("".join(line.split()))
    if header is not None:
        records.append(ProteinSequence(header, "".join(chunks).upper()))
    return records


def read_fasta(path) -> list[ProteinSequence]:
    with open(path, encoding="utf-8") as fh:
        return parse_fasta(fh.read())


def format_fasta(records: Iterable[ProteinSequence], width: int = 60) -> str:
    out = []
    for rec in records:
        out.append(f">{rec.id}\n")
        for i in range(0, len(rec.residues), width):
            out.append(rec.residues[i : i + width] + "\n")
    return "".join(out)


def write_fasta(path, records: Iterable[ProteinSequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_fasta(records))


def clean_corpus(
    records: Sequence[tuple[ProteinSequence, str]],
    min_len: int = DEFAULT_MIN_LEN,
    max_len: int = DEFAULT_MAX_LEN,
) -> tuple[LabeledCorpus, CleanReport]:
    """Drop records the feature extractors cannot handle.

    Rules, applied in order per record: any residue outside the 20-letter
    alphabet; length outside ``[min_len, max_len]``; residue string (or id)
    already seen earlier in the input.
    """
    if min_len < 2:
        raise ValueError("min_len must be >= 2")
    report = CleanReport()
    kept: list[tuple[ProteinSequence, str]] = []
    seen_residues: set[str] = set()
    seen_ids: set[str] = set()
    for seq, label in records:
        res = seq.residues
        if not res or not _ALPHABET.issuperset(res):
            report.dropped_invalid_residue += 1
        elif not min_len <= len(res) <= max_len:
            report.dropped_length += 1
        elif res in seen_residues or not seq.id or seq.id in seen_ids:
            report.dropped_duplicate += 1
        else:
            seen_residues.add(res)
            seen_ids.add(seq.id)
            kept.append((seq, label))
            report.kept += 1
    return LabeledCorpus(kept), report
