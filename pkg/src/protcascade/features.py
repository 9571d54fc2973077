"""Per-sequence physicochemical and n-gram features.

The physicochemical vector has 43 entries in this fixed order::

    [0]      molecular weight (Da)
    [1]      isoelectric point
    [2:22]   amino-acid composition, alphabetical residue order
    [22:25]  hydropathy composition (hydrophobic, neutral, polar)
    [25:28]  hydropathy transition (1-2, 1-3, 2-3)
    [28:43]  hydropathy distribution, five positions per class
"""

from __future__ import annotations

import numpy as np

from protcascade.seqio import AMINO_ACIDS, ProteinSequence

# Expasy average residue masses (Da)
RESIDUE_MASS = {
    "A": 71.0788, "R": 156.1875, "N": 114.1038, "D": 115.0886, "C": 103.1388,
    "E": 129.1155, "Q": 128.1307, "G": 57.0519, "H": 137.1411, "I": 113.1594,
    "L": 113.1594, "K": 128.1741, "M": 131.1926, "F": 147.1766, "P": 97.1167,
    "S": 87.0782, "T": 101.1051, "W": 186.2132, "Y": 163.1760, "V": 99.1326,
}
WATER_MASS = 18.01524

# EMBOSS pKa set
PKA_NTERM = 8.6
PKA_CTERM = 3.6
PKA_ACIDIC = {"C": 8.5, "D": 3.9, "E": 4.1, "Y": 10.1}
PKA_BASIC = {"H": 6.5, "K": 10.8, "R": 12.5}

HYDROPATHY_CLASSES = ("CFILMVW", "AGHPSTY", "DEKNQR")
EXCHANGE_GROUPS = ("HRK", "DENQ", "C", "STPAG", "MILV", "FYW")

N_PHYSICO = 43
N_GRAM = 400
N_EXCHANGE_GRAM = 36

AA_INDEX = {aa: i for i, aa in enumerate(AMINO_ACIDS)}
_HYDRO_INDEX = {aa: c for c, members in enumerate(HYDROPATHY_CLASSES) for aa in members}
_EXCHANGE_INDEX = {aa: g for g, members in enumerate(EXCHANGE_GROUPS) for aa in members}
_MASS_VEC = np.array([RESIDUE_MASS[aa] for aa in AMINO_ACIDS])
_TRANSITION_PAIRS = ((0, 1), (0, 2), (1, 2))
_DISTRIBUTION_QUANTILES = (0.25, 0.5, 0.75)

PHYSICO_NAMES = (
    ["W", "pI"]
    + [f"aac_{aa}" for aa in AMINO_ACIDS]
    + [f"hydro_c{i}" for i in range(1, 4)]
    + [f"hydro_t{i}{j}" for i, j in ((1, 2), (1, 3), (2, 3))]
    + [f"hydro_d{c}_{p}" for c in range(1, 4) for p in ("first", "q25", "q50", "q75", "last")]
)


class FeatureError(ValueError):
    pass


def _residues(seq) -> str:
    return seq.residues if isinstance(seq, ProteinSequence) else seq


def _indices(residues: str, table: dict) -> np.ndarray:
    try:
        return np.fromiter((table[r] for r in residues), dtype=np.intp, count=len(residues))
    except KeyError as exc:
        raise FeatureError(f"non-standard residue {exc.args[0]!r}") from None


def residue_masses(seq) -> np.ndarray:
    """Per-position average residue mass."""
    return _MASS_VEC[_indices(_residues(seq), AA_INDEX)]


def molecular_weight(seq) -> float:
    return float(residue_masses(seq).sum()) + WATER_MASS


def _ionizable_counts(residues: str) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    acid_pk = [PKA_CTERM] + list(PKA_ACIDIC.values())
    acid_n = [1] + [residues.count(aa) for aa in PKA_ACIDIC]
    base_pk = [PKA_NTERM] + list(PKA_BASIC.values())
    base_n = [1] + [residues.count(aa) for aa in PKA_BASIC]
    return (np.array(acid_pk), np.array(acid_n, float), np.array(base_pk), np.array(base_n, float))


def net_charge(seq, ph: float) -> float:
    """Henderson-Hasselbalch net charge at ``ph``."""
    acid_pk, acid_n, base_pk, base_n = _ionizable_counts(_residues(seq))
    positive = np.sum(base_n / (1.0 + 10.0 ** (ph - base_pk)))
    negative = np.sum(acid_n / (1.0 + 10.0 ** (acid_pk - ph)))
    return float(positive - negative)


def isoelectric_point(seq, tol: float = 1e-4) -> float:
    """pH of zero net charge, by bisection on [0, 14]."""
    acid_pk, acid_n, base_pk, base_n = _ionizable_counts(_residues(seq))

    def charge(ph):
        return np.sum(base_n / (1.0 + 10.0 ** (ph - base_pk))) - np.sum(
            acid_n / (1.0 + 10.0 ** (acid_pk - ph))
        )

    lo, hi = 0.0, 14.0
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if charge(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def amino_acid_composition(seq) -> np.ndarray:
    idx = _indices(_residues(seq), AA_INDEX)
    return np.bincount(idx, minlength=20) / len(idx)


def hydropathy_ctd(seq) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hydropathy composition, transition and distribution.

    Transition fractions are taken over the between-class adjacent pairs, so
    they sum to one whenever any exist and are all zero otherwise.
    Distribution gives, per class, the 1-based positions of the first,
    25%, 50%, 75% and last occurrence divided by the length; the q-th
    occurrence index is ``max(1, floor(q * count))``.
    """
    classes = _indices(_residues(seq), _HYDRO_INDEX)
    n = len(classes)
    if n == 0:
        raise FeatureError("empty sequence")
    comp = np.bincount(classes, minlength=3) / n

    trans = np.zeros(3)
    if n >= 2:
        a, b = classes[:-1], classes[1:]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        for t, (i, j) in enumerate(_TRANSITION_PAIRS):
            trans[t] = np.count_nonzero((lo == i) & (hi == j))
        total = trans.sum()
        if total > 0:
            trans /= total

    dist = np.zeros(15)
    for c in range(3):
        pos = np.flatnonzero(classes == c) + 1
        m = len(pos)
        if m == 0:
            continue
        picks = [1] + [max(1, int(np.floor(q * m))) for q in _DISTRIBUTION_QUANTILES] + [m]
        dist[5 * c : 5 * c + 5] = pos[np.array(picks) - 1] / n
    return comp, trans, dist


def _gram(idx: np.ndarray, alphabet: int) -> np.ndarray:
    if len(idx) < 2:
        raise FeatureError("2-gram features need length >= 2")
    pairs = idx[:-1] * alphabet + idx[1:]
    return np.bincount(pairs, minlength=alphabet * alphabet) / (len(idx) - 1)


def two_gram(seq) -> np.ndarray:
    """400 pair fractions, index ``20*idx(a) + idx(b)``."""
    return _gram(_indices(_residues(seq), AA_INDEX), 20)


def exchange_two_gram(seq) -> np.ndarray:
    """36 pair fractions over the six Dayhoff exchange groups."""
    return _gram(_indices(_residues(seq), _EXCHANGE_INDEX), 6)


def exchange_group(residue: str) -> int:
    return _EXCHANGE_INDEX[residue]


def physico_vector(seq) -> np.ndarray:
    residues = _residues(seq)
    if len(residues) < 2:
        raise FeatureError("physico features need length >= 2")
    c, t, d = hydropathy_ctd(residues)
    head = np.array([molecular_weight(residues), isoelectric_point(residues)])
    return np.concatenate([head, amino_acid_composition(residues), c, t, d])
