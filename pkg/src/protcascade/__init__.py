"""Four-phase cascade classifier for assigning protein sequences to families."""

from protcascade.seqio import (
    AMINO_ACIDS,
    CleanReport,
    LabeledCorpus,
    ProteinSequence,
    clean_corpus,
    parse_fasta,
)

__version__ = "0.1.0"

__all__ = [
    "AMINO_ACIDS",
    "CleanReport",
    "LabeledCorpus",
    "ProteinSequence",
    "clean_corpus",
    "parse_fasta",
]
