"""Radix-2 FFT, mass-signal spectra, and the per-family feature bands.

The band knowledge base is the cascade's first, cheapest filter: each
family's training values for every physicochemical feature are treated as
a series, spectrally smoothed, and summarised as an interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from protcascade.features import N_PHYSICO, physico_vector, residue_masses
from protcascade.seqio import LabeledCorpus

DEFAULT_TOP_K = 64
DEFAULT_SLACK = 0.05
DEFAULT_THETA = 0.8
DEFAULT_SPECTRAL_BINS = 16
MIN_FAMILY_SIZE = 4


class SpectralError(ValueError):
    pass


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x) -> np.ndarray:
    """Forward DFT ``X_k = sum_n x_n exp(-2*pi*i*k*n/N)``, iterative Cooley-Tukey."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 1:
        raise SpectralError("fft expects a 1-D vector")
    n = a.shape[0]
    if n == 0 or n & (n - 1):
        raise SpectralError(f"fft length must be a power of two, got {n}")
    a = a[_bit_reverse_permutation(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(-1, size)
        even = blocks[:, :half].copy()
        odd = blocks[:, half:] * twiddle
        blocks[:, :half] = even + odd
        blocks[:, half:] = even - odd
        a = blocks.reshape(n)
        size *= 2
    return a


def ifft(x) -> np.ndarray:
    """Inverse DFT as conjugate, forward, conjugate, scale by 1/N."""
    a = np.asarray(x, dtype=np.complex128)
    return np.conj(fft(np.conj(a))) / a.shape[0]


def spectral_features(seq, m: int = DEFAULT_SPECTRAL_BINS) -> np.ndarray:
    """Magnitudes of bins 1..m of the mean-removed residue-mass signal, over L.

    The signal is zero-padded to the next power of two, and to at least
    ``2*m`` so that short sequences still yield m bins.
    """
    signal = residue_masses(seq)
    n = len(signal)
    if n < 2:
        raise SpectralError("spectral features need length >= 2")
    padded = np.zeros(max(next_pow2(n), next_pow2(2 * m)))
    padded[:n] = signal - signal.mean()
    spectrum = fft(padded)
    return np.abs(spectrum[1 : m + 1]) / n


def _coefficient_groups(spectrum: np.ndarray) -> list[tuple[int, ...]]:
    """Coefficients in selection order: decreasing magnitude, ties by index.

    Each group is a coefficient together with its conjugate partner.
    """
    n = len(spectrum)
    order = np.lexsort((np.arange(n), -np.abs(spectrum)))
    taken = np.zeros(n, dtype=bool)
    groups = []
    for k in order:
        if taken[k]:
            continue
        partner = (n - k) % n
        taken[k] = taken[partner] = True
        groups.append((int(k),) if partner == k else (int(k), partner))
    return groups


def _groups_for(groups: list[tuple[int, ...]], top_k: int) -> int:
    """Number of leading groups kept for a budget of top_k coefficients."""
    count = 0
    for g, members in enumerate(groups):
        if count >= top_k:
            return g
        count += len(members)
    return len(groups)


def keep_top_k(spectrum, top_k: int) -> np.ndarray:
    """Zero all but the top_k largest-magnitude coefficients.

    Conjugate partners are kept together, so one more than top_k
    coefficients may survive.
    """
    spectrum = np.asarray(spectrum, dtype=np.complex128)
    groups = _coefficient_groups(spectrum)
    out = np.zeros_like(spectrum)
    for members in groups[: _groups_for(groups, top_k)]:
        out[list(members)] = spectrum[list(members)]
    return out


def reconstruct_top_k(series, top_k: int) -> np.ndarray:
    """Top-k spectral reconstruction of a zero-padded series, original indices only."""
    values = np.asarray(series, dtype=float)
    n = len(values)
    padded = np.zeros(next_pow2(n))
    padded[:n] = values
    return ifft(keep_top_k(fft(padded), top_k)).real[:n]


def smoothed_range(series, top_k: int) -> tuple[float, float]:
    """Band of a series after top-k spectral smoothing.

    Truncated reconstructions can overshoot (ringing), so the raw range of
    one reconstruction is not monotone in top_k. The band is therefore
    nested: starting from the raw [min, max], each coarser level intersects
    the previous band with its own reconstruction range. When the two are
    disjoint the band collapses to the nearest point of the previous band.
    """
    values = np.asarray(series, dtype=float)
    n = len(values)
    lo, hi = float(values.min()), float(values.max())
    size = next_pow2(n)
    if top_k >= size:
        return lo, hi
    padded = np.zeros(size)
    padded[:n] = values
    spectrum = fft(padded)
    groups = _coefficient_groups(spectrum)
    target = _groups_for(groups, top_k)

    # contribution of each coefficient group to the first n samples
    t = np.arange(n)
    contrib = np.zeros((len(groups), n))
    for g, members in enumerate(groups):
        idx = np.array(members)
        phase = np.exp(2j * np.pi * np.outer(idx, t) / size)
        contrib[g] = (spectrum[idx, None] * phase).sum(axis=0).real / size
    levels = np.cumsum(contrib, axis=0)

    # levels[g] keeps the first g + 1 groups
    for g in range(len(groups) - 1, target - 2, -1):
        rlo, rhi = levels[g].min(), levels[g].max()
        new_lo, new_hi = max(lo, rlo), min(hi, rhi)
        if new_lo > new_hi:
            new_lo = new_hi = min(max(rlo, lo), hi)
        lo, hi = float(new_lo), float(new_hi)
    return lo, hi


@dataclass
class FamilyBand:
    family: str
    bands: np.ndarray  # shape (n_features, 2): lo, hi


@dataclass
class KnowledgeBase:
    families: list[str]
    bands: np.ndarray  # (n_families, n_features, 2)
    scaler_min: np.ndarray
    scaler_max: np.ndarray
    top_k: int
    slack: float

    def family_band(self, family: str) -> FamilyBand:
        return FamilyBand(family, self.bands[self.families.index(family)])

    def scale(self, x) -> np.ndarray:
        """Min-max scale into [0, 1], clamping out-of-range values."""
        x = np.asarray(x, dtype=float)
        span = self.scaler_max - self.scaler_min
        safe = np.where(span > 0, span, 1.0)
        out = np.where(span > 0, (x - self.scaler_min) / safe, 0.0)
        return np.clip(out, 0.0, 1.0)

    def validate(self) -> "KnowledgeBase":
        if not self.families:
            raise SpectralError("knowledge base has no families")
        if self.bands.shape != (len(self.families), len(self.scaler_min), 2):
            raise SpectralError(f"band array has shape {self.bands.shape}")
        if np.any(self.bands[..., 0] > self.bands[..., 1]):
            raise SpectralError("band with lo > hi")
        if np.any(self.scaler_min > self.scaler_max):
            raise SpectralError("scaler min exceeds max")
        return self


def build_family_bands_from_vectors(
    vectors: np.ndarray,
    labels: list[str],
    families: list[str],
    top_k: int = DEFAULT_TOP_K,
    slack: float = DEFAULT_SLACK,
) -> KnowledgeBase:
    if top_k < 1:
        raise SpectralError("top_k must be >= 1")
    vectors = np.asarray(vectors, dtype=float)
    labels_arr = np.asarray(labels)
    bands = np.zeros((len(families), vectors.shape[1], 2))
    for f, family in enumerate(families):
        rows = vectors[labels_arr == family]
        if len(rows) < MIN_FAMILY_SIZE:
            raise SpectralError(
                f"family {family!r} has {len(rows)} sequences; at least {MIN_FAMILY_SIZE} required"
            )
        for j in range(vectors.shape[1]):
            lo, hi = smoothed_range(rows[:, j], top_k)
            pad = slack * (hi - lo)
            bands[f, j] = (lo - pad, hi + pad)
    return KnowledgeBase(
        families=list(families),
        bands=bands,
        scaler_min=vectors.min(axis=0),
        scaler_max=vectors.max(axis=0),
        top_k=top_k,
        slack=slack,
    )


def build_family_bands(
    corpus: LabeledCorpus, top_k: int = DEFAULT_TOP_K, slack: float = DEFAULT_SLACK
) -> KnowledgeBase:
    vectors = np.array([physico_vector(seq) for seq, _ in corpus.records]).reshape(-1, N_PHYSICO)
    labels = [label for _, label in corpus.records]
    return build_family_bands_from_vectors(vectors, labels, corpus.families, top_k, slack)


def candidate_families(kb: KnowledgeBase, features, theta: float = DEFAULT_THETA) -> list[str]:
    """Families whose bands contain at least ``theta`` of the feature values.

    Fails open: an empty result is replaced by every family.
    """
    f = np.asarray(features, dtype=float)
    inside = (f >= kb.bands[..., 0]) & (f <= kb.bands[..., 1])
    frac = inside.mean(axis=1)
    hits = [fam for fam, score in zip(kb.families, frac) if score >= theta]
    return hits if hits else list(kb.families)
