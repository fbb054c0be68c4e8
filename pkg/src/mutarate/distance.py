"""Site classification and evolutionary distance corrections.

Aligned pairs are compared column by column under pairwise deletion: any
column holding a gap or an ambiguity code in either row is skipped, the rest
are counted as matches, transitions (within purines or within pyrimidines)
or transversions.  The observed fractions feed the Jukes-Cantor and Kimura
two-parameter corrections; both treat a saturated pair (logarithm domain
violated) as an error rather than returning infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset_io import AMBIGUITY_SETS, GAP, NUCLEOTIDES
from .errors import ConfigError, DataError, SaturationError
from .msa import ScoringScheme, pairwise_align

_PURINES = frozenset("AG")
_PYRIMIDINES = frozenset("CT")

_EXCLUDED, _MATCH, _TS, _TV = range(4)


def _classify(x: str, y: str) -> int:
    if x not in NUCLEOTIDES or y not in NUCLEOTIDES:
        return _EXCLUDED
    if x == y:
        return _MATCH
    if {x, y} <= _PURINES or {x, y} <= _PYRIMIDINES:
        return _TS
    return _TV


_FULL_ALPHABET = NUCLEOTIDES + "".join(AMBIGUITY_SETS) + GAP
_PAIR_CLASS = {
    (x, y): _classify(x, y) for x in _FULL_ALPHABET for y in _FULL_ALPHABET
}


@dataclass(frozen=True)
class SiteComparison:
    """Counts from one aligned pair; fractions are over comparable sites."""

    sites: int
    transitions: int
    transversions: int

    def __post_init__(self):
        if self.sites < 1:
            raise DataError("comparison must cover at least one site")
        if self.transitions < 0 or self.transversions < 0:
            raise DataError("negative substitution count")
        if self.transitions + self.transversions > self.sites:
            raise DataError("more substitutions than sites")

    @property
    def P(self) -> float:
        return self.transitions / self.sites

    @property
    def Q(self) -> float:
        return self.transversions / self.sites

    @property
    def D(self) -> float:
        return (self.transitions + self.transversions) / self.sites


def compare_sites(a: str, b: str) -> SiteComparison:
    """Classify the columns of an aligned pair (pairwise deletion)."""
    if len(a) != len(b):
        raise DataError(f"aligned lengths differ: {len(a)} vs {len(b)}")
    sites = ts = tv = 0
    for pair in zip(a, b):
        cls = _PAIR_CLASS.get(pair)
        if cls is None:
            raise DataError(f"unknown residue pair {pair!r}")
        if cls == _EXCLUDED:
            continue
        sites += 1
        if cls == _TS:
            ts += 1
        elif cls == _TV:
            tv += 1
    if sites == 0:
        raise DataError("no comparable sites after removing gap and ambiguity columns")
    return SiteComparison(sites=sites, transitions=ts, transversions=tv)


def jc_correction(d: float) -> float:
    """Jukes-Cantor corrected distance from an observed difference fraction."""
    if d >= 0.75:
        raise SaturationError(
            f"observed difference {d:.6f} is at or beyond the 0.75 correction limit"
        )
    if d == 0:
        return 0.0
    return -0.75 * math.log(1.0 - d * 4.0 / 3.0)


def k2p_correction(p: float, q: float) -> float:
    """Kimura two-parameter distance from transition/transversion fractions."""
    w1 = 1.0 - 2.0 * p - q
    w2 = 1.0 - 2.0 * q
    if w1 <= 0 or w2 <= 0:
        raise SaturationError(
            f"transition fraction {p:.6f} / transversion fraction {q:.6f} "
            "outside the correction domain"
        )
    if p == 0 and q == 0:
        return 0.0
    return -0.5 * math.log(w1 * math.sqrt(w2))


def jukes_cantor(c: SiteComparison) -> float:
    return jc_correction(c.D)


def kimura(c: SiteComparison) -> float:
    return k2p_correction(c.P, c.Q)


def p_distance(a: str, b: str) -> float:
    """Observed difference fraction of an aligned pair (diagnostic)."""
    return compare_sites(a, b).D


_METHODS = {
    "jc": jukes_cantor,
    "jukes-cantor": jukes_cantor,
    "kimura": kimura,
    "k2p": kimura,
    "p-distance": lambda c: c.D,
    "p": lambda c: c.D,
}


def _method_fn(method: str):
    try:
        return _METHODS[method.lower()]
    except KeyError:
        raise ConfigError(
            f"unknown distance method {method!r}; expected jc, kimura or p-distance"
        ) from None


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = self.values
        n = len(self.labels)
        if v.shape != (n, n):
            raise DataError(f"matrix shape {v.shape} does not match {n} labels")
        if np.abs(v - v.T).max() > 1e-12:
            raise DataError("matrix is not symmetric")
        if np.abs(np.diag(v)).max() != 0:
            raise DataError("matrix diagonal is not zero")
        if v.min() < 0:
            raise DataError("matrix has negative entries")

    def get(self, a: str, b: str) -> float:
        i, j = self.labels.index(a), self.labels.index(b)
        return float(self.values[i, j])

    def min_off_diagonal(self) -> tuple[str, str, float]:
        """Smallest off-diagonal entry as (label_i, label_j, value); the
        first pair in row-major order wins ties."""
        n = len(self.labels)
        best = None
        for i in range(n):
            for j in range(i + 1, n):
                if best is None or self.values[i, j] < best[2]:
                    best = (self.labels[i], self.labels[j], float(self.values[i, j]))
        if best is None:
            raise DataError("matrix has no off-diagonal entries")
        return best

    def to_tsv(self) -> str:
        lines = ["\t".join(["", *self.labels])]
        for label, row in zip(self.labels, self.values):
            lines.append("\t".join([label, *(f"{x:.6f}" for x in row)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "DistanceMatrix":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise DataError("empty distance matrix file")
        header = lines[0].split("\t")
        labels = tuple(header[1:])
        rows = []
        for ln in lines[1:]:
            parts = ln.split("\t")
            rows.append([float(x) for x in parts[1:]])
        return cls(labels=labels, values=np.array(rows))


def comparison_table(seqs, scheme: ScoringScheme | None = None):
    """Globally align every unordered pair and classify its sites.

    Returns (labels, {(i, j): SiteComparison}) with i < j.  Inputs may be
    (label, residues) tuples or records with .label/.residues; residues are
    unaligned (each pair gets its own alignment, since cross-year sequences
    come from different alignments).
    """
    labels, residues = [], []
    for item in seqs:
        if isinstance(item, tuple):
            label, res = item
        else:
            label, res = item.label, item.residues
        labels.append(label)
        residues.append(res.replace(GAP, ""))
    if len(labels) < 2:
        raise DataError("need at least 2 sequences for a distance matrix")
    table = {}
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            aa, bb, _ = pairwise_align(residues[i], residues[j], scheme)
            try:
                table[(i, j)] = compare_sites(aa, bb)
            except DataError as exc:
                raise DataError(f"pair ({labels[i]}, {labels[j]}): {exc}") from exc
    return labels, table


def matrix_from_comparisons(labels, table, method: str) -> DistanceMatrix:
    fn = _method_fn(method)
    n = len(labels)
    values = np.zeros((n, n))
    for (i, j), comp in table.items():
        try:
            d = fn(comp)
        except SaturationError as exc:
            raise SaturationError(f"pair ({labels[i]}, {labels[j]}): {exc}") from exc
        values[i, j] = values[j, i] = d
    return DistanceMatrix(labels=tuple(labels), values=values)


def distance_matrix(seqs, method: str, scheme: ScoringScheme | None = None) -> DistanceMatrix:
    """Pairwise-align all sequence pairs and apply the chosen distance."""
    labels, table = comparison_table(seqs, scheme)
    return matrix_from_comparisons(labels, table, method)
