"""Progressive multiple sequence alignment and ambiguity resolution.

Year groups are aligned independently: all-vs-all pairwise global alignments
give p-distances, UPGMA on those distances gives a guide tree, and profiles
are merged bottom-up along that tree with profile-profile global alignment.
Afterwards each IUPAC ambiguity cell is replaced by the column-consensus
nucleotide compatible with its code.

The affine-gap DP (one shared core for character pairs and profile columns)
keeps three score matrices: M ends in an aligned column, Ix in a gap run in
the second sequence, Iy in a gap run in the first.  Rows are swept with
numpy; the within-row Iy recurrence folds into a running prefix maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dataset_io import AMBIGUITY_SETS, GAP, NUCLEOTIDES, SequenceRecord
from .errors import ConfigError, DataError

_COLUMN_ALPHABET = frozenset(NUCLEOTIDES) | frozenset(AMBIGUITY_SETS) | {GAP}
# symbol order for profile frequency vectors
_SYMBOLS = NUCLEOTIDES + GAP


@dataclass(frozen=True)
class ScoringScheme:
    match: int = 5
    mismatch: int = -4
    gap_open: int = -10
    gap_extend: int = -1

    def __post_init__(self):
        if self.match <= 0:
            raise ConfigError(f"match reward must be positive, got {self.match}")
        if self.mismatch >= 0:
            raise ConfigError(f"mismatch penalty must be negative, got {self.mismatch}")
        if not self.gap_open <= self.gap_extend < 0:
            raise ConfigError(
                f"need gap_open <= gap_extend < 0, got open={self.gap_open} extend={self.gap_extend}"
            )


@dataclass(frozen=True)
class Msa:
    """Aligned rows of equal width; de-gapping a row recovers its input."""

    rows: tuple[tuple[str, str], ...]  # (label, aligned residues)
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise DataError("alignment width must be >= 1")
        if not self.rows:
            raise DataError("alignment has no rows")
        for label, seq in self.rows:
            if len(seq) != self.width:
                raise DataError(f"row {label!r} has length {len(seq)}, expected {self.width}")
            bad = set(seq) - _COLUMN_ALPHABET
            if bad:
                raise DataError(f"row {label!r} has characters outside alphabet: {sorted(bad)}")
        for j in range(self.width):
            if all(seq[j] == GAP for _, seq in self.rows):
                raise DataError(f"column {j} is all gaps")

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str]]) -> "Msa":
        rows = tuple((label, seq) for label, seq in rows)
        if not rows:
            raise DataError("alignment has no rows")
        return cls(rows=rows, width=len(rows[0][1]))

    def labels(self) -> list[str]:
        return [label for label, _ in self.rows]

    def sequences(self) -> list[str]:
        return [seq for _, seq in self.rows]

    def column(self, j: int) -> list[str]:
        return [seq[j] for _, seq in self.rows]


def msa_to_fasta(m: Msa, width: int = 70) -> str:
    out = []
    for label, seq in m.rows:
        out.append(f">{label}")
        for i in range(0, len(seq), width):
            out.append(seq[i : i + width])
    return "\n".join(out) + "\n"


def msa_from_fasta(text: str) -> Msa:
    rows: list[tuple[str, str]] = []
    label = None
    chunks: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if label is not None:
                rows.append((label, "".join(chunks).upper()))
            label = line[1:].strip()
            chunks = []
        elif label is None:
            raise DataError("aligned FASTA: sequence data before first header")
        else:
            chunks.append(line)
    if label is not None:
        rows.append((label, "".join(chunks).upper()))
    return Msa.from_rows(rows)


# ---------------------------------------------------------------------------
# affine-gap DP core


def _affine_dp(score: np.ndarray, go: float, ge: float):
    """Fill M/Ix/Iy for a global alignment with gap run cost go+(k-1)*ge.

    score[i, j] is the reward for pairing position i of the first sequence
    with position j of the second (0-based); matrices are (n+1, m+1).
    """
    n, m = score.shape
    neg = -np.inf
    M = np.full((n + 1, m + 1), neg)
    Ix = np.full((n + 1, m + 1), neg)
    Iy = np.full((n + 1, m + 1), neg)
    M[0, 0] = 0.0
    cols = np.arange(m + 1)
    Iy[0, 1:] = go + (cols[1:] - 1) * ge
    for i in range(1, n + 1):
        Ix[i] = np.maximum(M[i - 1] + go, np.maximum(Ix[i - 1] + ge, Iy[i - 1] + go))
        best_prev = np.maximum(M[i - 1], np.maximum(Ix[i - 1], Iy[i - 1]))
        M[i, 1:] = score[i - 1] + best_prev[:-1]
        # Iy[i, j] = max over k < j of max(M[i,k], Ix[i,k]) + go + (j-1-k)*ge,
        # rewritten so the max over k becomes a prefix maximum
        z = np.maximum(M[i], Ix[i]) - cols * ge
        c = np.maximum.accumulate(z)
        Iy[i, 1:] = go + (cols[1:] - 1) * ge + c[:-1]
    return M, Ix, Iy


def _argpref(candidates) -> int:
    """Index of the maximum; first index wins ties (M > Ix > Iy order)."""
    best = 0
    for k in range(1, len(candidates)):
        if candidates[k] > candidates[best]:
            best = k
    return best


def _traceback(M, Ix, Iy, score, go: float, ge: float):
    """Alignment as (i, j) pairs left to right; None marks a gap."""
    n, m = score.shape
    i, j = n, m
    state = _argpref((M[n, m], Ix[n, m], Iy[n, m]))
    ops: list[tuple[int | None, int | None]] = []
    while i > 0 or j > 0:
        if state == 0:
            ops.append((i - 1, j - 1))
            state = _argpref((M[i - 1, j - 1], Ix[i - 1, j - 1], Iy[i - 1, j - 1]))
            i -= 1
            j -= 1
        elif state == 1:
            ops.append((i - 1, None))
            state = _argpref((M[i - 1, j] + go, Ix[i - 1, j] + ge, Iy[i - 1, j] + go))
            i -= 1
        else:
            ops.append((None, j - 1))
            state = _argpref((M[i, j - 1] + go, Ix[i, j - 1] + go, Iy[i, j - 1] + ge))
            j -= 1
    ops.reverse()
    return ops


def pairwise_align(a: str, b: str, scheme: ScoringScheme | None = None):
    """Optimal global alignment of two residue strings.

    Returns (aligned_a, aligned_b, score).  Traceback prefers an aligned
    column over a gap in the second sequence over a gap in the first, so
    equal-scoring alignments resolve the same way every time.
    """
    if not a or not b:
        raise ValueError("pairwise_align requires two non-empty sequences")
    scheme = scheme or ScoringScheme()
    eq = np.frombuffer(a.encode(), dtype="S1")[:, None] == np.frombuffer(b.encode(), dtype="S1")[None, :]
    score = np.where(eq, float(scheme.match), float(scheme.mismatch))
    go, ge = float(scheme.gap_open), float(scheme.gap_extend)
    M, Ix, Iy = _affine_dp(score, go, ge)
    ops = _traceback(M, Ix, Iy, score, go, ge)
    aligned_a = "".join(a[ia] if ia is not None else GAP for ia, _ in ops)
    aligned_b = "".join(b[jb] if jb is not None else GAP for _, jb in ops)
    return aligned_a, aligned_b, float(max(M[-1, -1], Ix[-1, -1], Iy[-1, -1]))


# ---------------------------------------------------------------------------
# guide tree


def _p_distance_aligned(aa: str, bb: str) -> float:
    """Mismatch fraction over columns where both rows have a residue."""
    compared = 0
    diffs = 0
    for x, y in zip(aa, bb):
        if x == GAP or y == GAP:
            continue
        compared += 1
        if x != y:
            diffs += 1
    return diffs / compared if compared else 1.0


def _as_residues(seqs) -> tuple[list[str], list[str]]:
    labels, residues = [], []
    for i, item in enumerate(seqs):
        if isinstance(item, str):
            labels.append(f"seq{i}")
            residues.append(item.upper())
        else:
            labels.append(item.label)
            residues.append(item.residues)
    return labels, residues


def _pairwise_pdist(residues: list[str], scheme: ScoringScheme) -> np.ndarray:
    n = len(residues)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            aa, bb, _ = pairwise_align(residues[i], residues[j], scheme)
            d[i, j] = d[j, i] = _p_distance_aligned(aa, bb)
    return d


def _upgma(dist: np.ndarray) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Merge events over input indices; ties go to the lowest-index pair."""
    clusters: list[tuple[int, ...]] = [(i,) for i in range(dist.shape[0])]
    sizes = [1] * len(clusters)
    d = dist.astype(float).copy()
    events = []
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                key = (d[i, j], clusters[i][0], clusters[j][0])
                if best is None or key < best[0]:
                    best = (key, i, j)
        _, i, j = best
        events.append((clusters[i], clusters[j]))
        merged_row = (sizes[i] * d[i] + sizes[j] * d[j]) / (sizes[i] + sizes[j])
        d[i], d[:, i] = merged_row, merged_row
        d[i, i] = 0.0
        d = np.delete(np.delete(d, j, axis=0), j, axis=1)
        clusters[i] = tuple(sorted(clusters[i] + clusters[j]))
        sizes[i] += sizes[j]
        del clusters[j]
        del sizes[j]
    return events


def guide_tree(seqs: Sequence, scheme: ScoringScheme | None = None):
    """UPGMA join order over p-distances from all pairwise alignments."""
    if len(seqs) < 2:
        raise ValueError("guide_tree requires at least 2 sequences")
    scheme = scheme or ScoringScheme()
    _, residues = _as_residues(seqs)
    return _upgma(_pairwise_pdist(residues, scheme))


# ---------------------------------------------------------------------------
# progressive profile merging

_SYM_INDEX = {ch: k for k, ch in enumerate(_SYMBOLS)}
_CHAR_WEIGHTS = {ch: np.eye(len(_SYMBOLS))[k] for ch, k in _SYM_INDEX.items()}
for _code, _members in AMBIGUITY_SETS.items():
    _w = np.zeros(len(_SYMBOLS))
    for _b in _members:
        _w[_SYM_INDEX[_b]] = 1.0 / len(_members)
    _CHAR_WEIGHTS[_code] = _w


def _profile_freqs(rows: list[str]) -> np.ndarray:
    """Column frequency vectors over (A, C, G, T, gap); ambiguity codes are
    spread uniformly over their compatible bases."""
    width = len(rows[0])
    freq = np.zeros((width, len(_SYMBOLS)))
    for row in rows:
        for j, ch in enumerate(row):
            freq[j] += _CHAR_WEIGHTS[ch]
    return freq / len(rows)


def _pair_kernel(scheme: ScoringScheme) -> np.ndarray:
    k = np.full((len(_SYMBOLS), len(_SYMBOLS)), float(scheme.mismatch))
    np.fill_diagonal(k, float(scheme.match))
    gap = _SYM_INDEX[GAP]
    k[gap, :] = k[:, gap] = float(scheme.gap_extend)
    k[gap, gap] = 0.0
    return k


def _merge_profiles(rows_a: list[str], rows_b: list[str], scheme: ScoringScheme):
    freq_a = _profile_freqs(rows_a)
    freq_b = _profile_freqs(rows_b)
    score = freq_a @ _pair_kernel(scheme) @ freq_b.T
    go, ge = float(scheme.gap_open), float(scheme.gap_extend)
    M, Ix, Iy = _affine_dp(score, go, ge)
    ops = _traceback(M, Ix, Iy, score, go, ge)
    out_a = ["".join(row[ia] if ia is not None else GAP for ia, _ in ops) for row in rows_a]
    out_b = ["".join(row[jb] if jb is not None else GAP for _, jb in ops) for row in rows_b]
    return out_a, out_b


def progressive_align(seqs: Sequence, scheme: ScoringScheme | None = None) -> Msa:
    """Align sequences by merging profiles along the guide tree.

    Output rows keep the input order regardless of merge order.
    """
    if len(seqs) < 2:
        raise ValueError("progressive_align requires at least 2 sequences")
    scheme = scheme or ScoringScheme()
    labels, residues = _as_residues(seqs)
    events = _upgma(_pairwise_pdist(residues, scheme))
    profiles: dict[tuple[int, ...], list[str]] = {(i,): [r] for i, r in enumerate(residues)}
    members: dict[tuple[int, ...], list[int]] = {(i,): [i] for i in range(len(residues))}
    for left, right in events:
        rows_a, rows_b = _merge_profiles(profiles.pop(left), profiles.pop(right), scheme)
        key = tuple(sorted(left + right))
        profiles[key] = rows_a + rows_b
        members[key] = members.pop(left) + members.pop(right)
    (key,) = profiles
    by_input = dict(zip(members[key], profiles[key]))
    return Msa.from_rows((labels[i], by_input[i]) for i in range(len(residues)))


# ---------------------------------------------------------------------------
# ambiguity resolution


def resolve_ambiguities(m: Msa) -> Msa:
    """Replace each ambiguity cell by the most frequent compatible nucleotide
    in its column; ties and empty columns fall back alphabetically."""
    counts_per_col = []
    for j in range(m.width):
        counts = {b: 0 for b in NUCLEOTIDES}
        for _, seq in m.rows:
            if seq[j] in counts:
                counts[seq[j]] += 1
        counts_per_col.append(counts)
    new_rows = []
    for label, seq in m.rows:
        cells = []
        for j, ch in enumerate(seq):
            if ch in AMBIGUITY_SETS:
                counts = counts_per_col[j]
                ch = min(AMBIGUITY_SETS[ch], key=lambda b: (-counts[b], b))
            cells.append(ch)
        new_rows.append((label, "".join(cells)))
    return Msa(rows=tuple(new_rows), width=m.width)
