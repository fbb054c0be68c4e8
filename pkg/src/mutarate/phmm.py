"""Profile hidden Markov models over year groups.

One model per year group: match/insert/delete states per alignment column
(match columns chosen by gap fraction, or by occupancy rank when sweeping
model lengths), Baum-Welch training on the group's unaligned sequences, and
log-odds scoring against a uniform 1/4 background to pick the group's
representative sequence.

The forward and backward passes run in scaled linear space (per-row scale
factors, not log space) so Baum-Welch can take expected counts directly from
the scaled tables.  Delete states are silent: within a row the delete chain
is filled left to right after the emitting states, and backward mirrors that
right to left.  Kernels compile with numba when it is importable and fall
back to plain Python otherwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset_io import AMBIGUITY_SETS, GAP, NUCLEOTIDES
from .errors import ConfigError, DataError
from .msa import Msa

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba present in normal installs
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


PROB_FLOOR = 1e-12
_BASE_INDEX = {b: k for k, b in enumerate(NUCLEOTIDES)}
_MODEL_FORMAT = "phmm-1"


@dataclass(frozen=True)
class TrainingConfig:
    pseudocount: float = 0.01
    gap_threshold: float = 0.5
    ll_tolerance: float = 1e-4
    max_iterations: int = 100

    def __post_init__(self):
        if self.pseudocount <= 0:
            raise ConfigError(f"pseudocount must be positive, got {self.pseudocount}")
        if not 0 < self.gap_threshold < 1:
            raise ConfigError(f"gap_threshold must be in (0,1), got {self.gap_threshold}")
        if self.ll_tolerance <= 0:
            raise ConfigError(f"ll_tolerance must be positive, got {self.ll_tolerance}")
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(eq=False)
class ProfileHmm:
    """Krogh-style architecture with L match states.

    Transition arrays are indexed by source position k = 0..L, where M_0 is
    Begin and a move to M_{L+1} means End: t_mm[k] is M_k -> M_{k+1} and so
    on.  Moves that have no target state (t_md[L], t_id[L], t_dd[L], and the
    whole k=0 delete row) are structural zeros.
    """

    length: int
    match_emissions: np.ndarray  # (L, 4)
    insert_emissions: np.ndarray  # (L+1, 4)
    t_mm: np.ndarray  # each (L+1,)
    t_mi: np.ndarray
    t_md: np.ndarray
    t_im: np.ndarray
    t_ii: np.ndarray
    t_id: np.ndarray
    t_dm: np.ndarray
    t_di: np.ndarray
    t_dd: np.ndarray

    def check(self, atol: float = 1e-9) -> None:
        """Raise DataError if any normalization or floor invariant fails."""
        L = self.length
        if L < 1:
            raise DataError("model must have at least one match state")
        if self.match_emissions.shape != (L, 4):
            raise DataError(f"match emission shape {self.match_emissions.shape}")
        if self.insert_emissions.shape != (L + 1, 4):
            raise DataError(f"insert emission shape {self.insert_emissions.shape}")
        for name in ("t_mm", "t_mi", "t_md", "t_im", "t_ii", "t_id", "t_dm", "t_di", "t_dd"):
            if getattr(self, name).shape != (L + 1,):
                raise DataError(f"{name} shape {getattr(self, name).shape}")
        for name, rows in (("match", self.match_emissions), ("insert", self.insert_emissions)):
            sums = rows.sum(axis=1)
            if np.abs(sums - 1.0).max() > atol:
                raise DataError(f"{name} emission rows do not sum to 1")
            if rows.min() < PROB_FLOOR:
                raise DataError(f"{name} emission below probability floor")
        for k in range(L + 1):
            self._check_row("M", k, (self.t_mm[k], self.t_mi[k], self.t_md[k]), k < L, atol)
            self._check_row("I", k, (self.t_im[k], self.t_ii[k], self.t_id[k]), k < L, atol)
            if k >= 1:
                self._check_row("D", k, (self.t_dm[k], self.t_di[k], self.t_dd[k]), k < L, atol)
        for name in ("t_dm", "t_di", "t_dd"):
            if getattr(self, name)[0] != 0.0:
                raise DataError(f"{name}[0] must be a structural zero")

    @staticmethod
    def _check_row(state, k, probs, has_delete_target, atol):
        legal = probs if has_delete_target else probs[:2]
        if not has_delete_target and probs[2] != 0.0:
            raise DataError(f"{state}_{k}: move to nonexistent delete state has mass")
        if abs(sum(legal) - 1.0) > atol:
            raise DataError(f"{state}_{k}: outgoing probabilities sum to {sum(legal)}")
        if min(legal) < PROB_FLOOR:
            raise DataError(f"{state}_{k}: probability below floor")

    def to_json(self) -> str:
        doc = {
            "format": _MODEL_FORMAT,
            "length": self.length,
            "alphabet": NUCLEOTIDES,
            "match_emissions": self.match_emissions.tolist(),
            "insert_emissions": self.insert_emissions.tolist(),
            "transitions": {
                "mm": self.t_mm.tolist(),
                "mi": self.t_mi.tolist(),
                "md": self.t_md.tolist(),
                "im": self.t_im.tolist(),
                "ii": self.t_ii.tolist(),
                "id": self.t_id.tolist(),
                "dm": self.t_dm.tolist(),
                "di": self.t_di.tolist(),
                "dd": self.t_dd.tolist(),
            },
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ProfileHmm":
        doc = json.loads(text)
        if doc.get("format") != _MODEL_FORMAT:
            raise DataError(f"unsupported model format {doc.get('format')!r}")
        t = doc["transitions"]
        h = cls(
            length=int(doc["length"]),
            match_emissions=np.array(doc["match_emissions"], dtype=float),
            insert_emissions=np.array(doc["insert_emissions"], dtype=float),
            t_mm=np.array(t["mm"], dtype=float),
            t_mi=np.array(t["mi"], dtype=float),
            t_md=np.array(t["md"], dtype=float),
            t_im=np.array(t["im"], dtype=float),
            t_ii=np.array(t["ii"], dtype=float),
            t_id=np.array(t["id"], dtype=float),
            t_dm=np.array(t["dm"], dtype=float),
            t_di=np.array(t["di"], dtype=float),
            t_dd=np.array(t["dd"], dtype=float),
        )
        h.check()
        return h


def _floor_normalize(raw: np.ndarray) -> np.ndarray:
    """Normalize to a distribution with every entry >= PROB_FLOOR exactly.

    Floored entries are pinned and the rest rescaled around them; rescaling
    can push a borderline entry under the floor, so the pinning repeats until
    the free entries are all clear of it."""
    v = raw / raw.sum()
    pinned = np.zeros(v.shape, dtype=bool)
    while True:
        low = (v < PROB_FLOOR) & ~pinned
        if not low.any():
            return v
        pinned = pinned | low
        free = ~pinned
        if not free.any():
            return np.full(v.shape, 1.0 / v.size)
        v = v.copy()
        v[pinned] = PROB_FLOOR
        v[free] = raw[free] * (1.0 - pinned.sum() * PROB_FLOOR) / raw[free].sum()


def _encode(seq: str) -> np.ndarray:
    if not seq:
        raise DataError("cannot score an empty sequence")
    codes = np.empty(len(seq), dtype=np.int64)
    for i, ch in enumerate(seq):
        k = _BASE_INDEX.get(ch)
        if k is None:
            raise DataError(f"residue {ch!r} at position {i} is not one of {NUCLEOTIDES}")
        codes[i] = k
    return codes


def _residues_of(item) -> str:
    if isinstance(item, str):
        return item
    if isinstance(item, tuple):
        return item[1]
    return item.residues


def _label_of(item, fallback: str) -> str:
    if isinstance(item, str):
        return fallback
    if isinstance(item, tuple):
        return item[0]
    return item.label


# ---------------------------------------------------------------------------
# model construction from an alignment


def gap_fractions(m: Msa) -> list[float]:
    n = len(m.rows)
    return [sum(1 for _, s in m.rows if s[j] == GAP) / n for j in range(m.width)]


def match_columns_by_threshold(m: Msa, gap_threshold: float) -> list[int]:
    return [j for j, f in enumerate(gap_fractions(m)) if f < gap_threshold]


def match_columns_by_occupancy(m: Msa, length: int) -> list[int]:
    """The `length` best-occupied columns, ties to the leftmost, kept in
    left-to-right order."""
    if not 1 <= length <= m.width:
        raise DataError(f"model length {length} outside 1..{m.width}")
    fractions = gap_fractions(m)
    ranked = sorted(range(m.width), key=lambda j: (fractions[j], j))
    return sorted(ranked[:length])


def init_from_msa(m: Msa, cfg: TrainingConfig) -> ProfileHmm:
    """Model whose match states are the columns with gap fraction below
    cfg.gap_threshold; parameters are smoothed state-path counts."""
    cols = match_columns_by_threshold(m, cfg.gap_threshold)
    if not cols:
        raise DataError(
            f"no column has gap fraction below {cfg.gap_threshold}; cannot place match states"
        )
    return init_with_match_columns(m, cols, cfg)


def init_with_match_columns(m: Msa, match_cols: list[int], cfg: TrainingConfig) -> ProfileHmm:
    L = len(match_cols)
    position_of = {col: k + 1 for k, col in enumerate(match_cols)}
    pc = cfg.pseudocount
    cM = np.full((L, 4), pc)
    cI = np.full((L + 1, 4), pc)
    trans = {name: np.zeros(L + 1) for name in ("mm", "mi", "md", "im", "ii", "id", "dm", "di", "dd")}
    for name in ("mm", "mi", "im", "ii"):
        trans[name] += pc
    for name in ("md", "id"):
        trans[name][:L] += pc
    for name in ("dm", "di"):
        trans[name][1:] += pc
    trans["dd"][1:L] += pc

    def add_emission(counts, row_index, ch):
        if ch in _BASE_INDEX:
            counts[row_index, _BASE_INDEX[ch]] += 1.0
        else:
            members = AMBIGUITY_SETS[ch]
            for b in members:
                counts[row_index, _BASE_INDEX[b]] += 1.0 / len(members)

    for _, seq in m.rows:
        prev = ("M", 0)  # Begin
        passed = 0
        for col, ch in enumerate(seq):
            if col in position_of:
                j = position_of[col]
                if ch == GAP:
                    state = ("D", j)
                else:
                    state = ("M", j)
                    add_emission(cM, j - 1, ch)
                trans[prev[0].lower() + state[0].lower()][prev[1]] += 1.0
                prev = state
                passed = j
            elif ch != GAP:
                state = ("I", passed)
                add_emission(cI, passed, ch)
                trans[prev[0].lower() + state[0].lower()][prev[1]] += 1.0
                prev = state
        trans[prev[0].lower() + "m"][prev[1]] += 1.0  # move to End
    return _model_from_counts(L, cM, cI, trans)


def _model_from_counts(L, cM, cI, trans) -> ProfileHmm:
    match_em = np.vstack([_floor_normalize(cM[j]) for j in range(L)])
    insert_em = np.vstack([_floor_normalize(cI[j]) for j in range(L + 1)])
    out = {name: np.zeros(L + 1) for name in trans}
    for k in range(L + 1):
        has_d = k < L
        m_row = _normalize_row((trans["mm"][k], trans["mi"][k], trans["md"][k]), has_d)
        out["mm"][k], out["mi"][k], out["md"][k] = m_row
        i_row = _normalize_row((trans["im"][k], trans["ii"][k], trans["id"][k]), has_d)
        out["im"][k], out["ii"][k], out["id"][k] = i_row
        if k >= 1:
            d_row = _normalize_row((trans["dm"][k], trans["di"][k], trans["dd"][k]), has_d)
            out["dm"][k], out["di"][k], out["dd"][k] = d_row
    h = ProfileHmm(
        length=L,
        match_emissions=match_em,
        insert_emissions=insert_em,
        t_mm=out["mm"],
        t_mi=out["mi"],
        t_md=out["md"],
        t_im=out["im"],
        t_ii=out["ii"],
        t_id=out["id"],
        t_dm=out["dm"],
        t_di=out["di"],
        t_dd=out["dd"],
    )
    h.check()
    return h


def _normalize_row(values, has_delete_target) -> tuple[float, float, float]:
    if has_delete_target:
        v = _floor_normalize(np.array(values))
        return v[0], v[1], v[2]
    v = _floor_normalize(np.array(values[:2]))
    return v[0], v[1], 0.0


# ---------------------------------------------------------------------------
# forward / backward kernels


@njit(cache=True)
def _forward_kernel(codes, eM, eI, tmm, tmi, tmd, tim, tii, tid, tdm, tdi, tdd):
    n = codes.shape[0]
    L = eM.shape[0]
    fM = np.zeros((n + 1, L + 1))
    fI = np.zeros((n + 1, L + 1))
    fD = np.zeros((n + 1, L + 1))
    logc = np.zeros(n + 1)
    fM[0, 0] = 1.0
    if L >= 1:
        fD[0, 1] = fM[0, 0] * tmd[0]
        for j in range(2, L + 1):
            fD[0, j] = fD[0, j - 1] * tdd[j - 1]
    c = fM[0].sum() + fI[0].sum() + fD[0].sum()
    for j in range(L + 1):
        fM[0, j] /= c
        fD[0, j] /= c
    logc[0] = np.log(c)
    for i in range(1, n + 1):
        x = codes[i - 1]
        for j in range(L + 1):
            acc = fM[i - 1, j] * tmi[j] + fI[i - 1, j] * tii[j]
            if j >= 1:
                acc += fD[i - 1, j] * tdi[j]
            fI[i, j] = eI[j, x] * acc
        for j in range(1, L + 1):
            acc = fM[i - 1, j - 1] * tmm[j - 1] + fI[i - 1, j - 1] * tim[j - 1]
            if j - 1 >= 1:
                acc += fD[i - 1, j - 1] * tdm[j - 1]
            fM[i, j] = eM[j - 1, x] * acc
        fD[i, 1] = fM[i, 0] * tmd[0] + fI[i, 0] * tid[0]
        for j in range(2, L + 1):
            fD[i, j] = fM[i, j - 1] * tmd[j - 1] + fI[i, j - 1] * tid[j - 1] + fD[i, j - 1] * tdd[j - 1]
        c = 0.0
        for j in range(L + 1):
            c += fM[i, j] + fI[i, j] + fD[i, j]
        for j in range(L + 1):
            fM[i, j] /= c
            fI[i, j] /= c
            fD[i, j] /= c
        logc[i] = np.log(c)
    send = fM[n, L] * tmm[L] + fI[n, L] * tim[L] + fD[n, L] * tdm[L]
    logp = logc.sum() + np.log(send)
    return fM, fI, fD, logc, send, logp


@njit(cache=True)
def _backward_counts_kernel(
    codes, eM, eI, tmm, tmi, tmd, tim, tii, tid, tdm, tdi, tdd,
    fM, fI, fD, logc, send,
    cM, cI, kmm, kmi, kmd, kim, kii, kid, kdm, kdi, kdd,
):
    n = codes.shape[0]
    L = eM.shape[0]
    c = np.exp(logc)
    bM = np.zeros((n + 1, L + 1))
    bI = np.zeros((n + 1, L + 1))
    bD = np.zeros((n + 1, L + 1))
    bM[n, L] = tmm[L] / send
    bI[n, L] = tim[L] / send
    bD[n, L] = tdm[L] / send
    for j in range(L - 1, -1, -1):
        dnext = bD[n, j + 1]
        bM[n, j] = tmd[j] * dnext
        bI[n, j] = tid[j] * dnext
        if j >= 1:
            bD[n, j] = tdd[j] * dnext
    for i in range(n - 1, -1, -1):
        x = codes[i]
        ci1 = c[i + 1]
        for j in range(L, -1, -1):
            cross_m = 0.0
            d_same = 0.0
            if j < L:
                cross_m = eM[j, x] * bM[i + 1, j + 1]
                d_same = bD[i, j + 1]
            cross_i = eI[j, x] * bI[i + 1, j]
            bM[i, j] = (tmm[j] * cross_m + tmi[j] * cross_i) / ci1 + tmd[j] * d_same
            bI[i, j] = (tim[j] * cross_m + tii[j] * cross_i) / ci1 + tid[j] * d_same
            if j >= 1:
                bD[i, j] = (tdm[j] * cross_m + tdi[j] * cross_i) / ci1 + tdd[j] * d_same
    # emission occupancies
    for i in range(1, n + 1):
        x = codes[i - 1]
        for j in range(1, L + 1):
            cM[j - 1, x] += fM[i, j] * bM[i, j]
        for j in range(L + 1):
            cI[j, x] += fI[i, j] * bI[i, j]
    # transitions that consume the next residue
    for i in range(n):
        x = codes[i]
        ci1 = c[i + 1]
        for j in range(L + 1):
            mnext = 0.0
            if j < L:
                mnext = eM[j, x] * bM[i + 1, j + 1] / ci1
            inext = eI[j, x] * bI[i + 1, j] / ci1
            kmm[j] += fM[i, j] * tmm[j] * mnext
            kmi[j] += fM[i, j] * tmi[j] * inext
            kim[j] += fI[i, j] * tim[j] * mnext
            kii[j] += fI[i, j] * tii[j] * inext
            if j >= 1:
                kdm[j] += fD[i, j] * tdm[j] * mnext
                kdi[j] += fD[i, j] * tdi[j] * inext
    # silent moves into delete states (same row)
    for i in range(n + 1):
        for j in range(L):
            dnext = bD[i, j + 1]
            kmd[j] += fM[i, j] * tmd[j] * dnext
            kid[j] += fI[i, j] * tid[j] * dnext
            if j >= 1:
                kdd[j] += fD[i, j] * tdd[j] * dnext
    # end moves
    kmm[L] += fM[n, L] * tmm[L] / send
    kim[L] += fI[n, L] * tim[L] / send
    kdm[L] += fD[n, L] * tdm[L] / send


def _model_arrays(h: ProfileHmm):
    return (
        h.match_emissions, h.insert_emissions,
        h.t_mm, h.t_mi, h.t_md, h.t_im, h.t_ii, h.t_id, h.t_dm, h.t_di, h.t_dd,
    )


def forward_log_likelihood(h: ProfileHmm, seq: str) -> float:
    """log P(seq | h) by the scaled forward algorithm."""
    codes = _encode(seq)
    *_, logp = _forward_kernel(codes, *_model_arrays(h))
    return float(logp)


def log_odds_score(h: ProfileHmm, seq: str) -> float:
    """Forward log-likelihood minus the uniform 1/4-per-residue null."""
    return forward_log_likelihood(h, seq) - len(seq) * np.log(0.25)


# ---------------------------------------------------------------------------
# Baum-Welch


def _estep(h: ProfileHmm, codes_list):
    """Expected counts and total log-likelihood, accumulated in list order."""
    L = h.length
    cM = np.zeros((L, 4))
    cI = np.zeros((L + 1, 4))
    kt = {name: np.zeros(L + 1) for name in ("mm", "mi", "md", "im", "ii", "id", "dm", "di", "dd")}
    arrays = _model_arrays(h)
    total = 0.0
    for codes in codes_list:
        fM, fI, fD, logc, send, logp = _forward_kernel(codes, *arrays)
        _backward_counts_kernel(
            codes, *arrays, fM, fI, fD, logc, send,
            cM, cI,
            kt["mm"], kt["mi"], kt["md"], kt["im"], kt["ii"], kt["id"],
            kt["dm"], kt["di"], kt["dd"],
        )
        total += logp
    return (cM, cI, kt), total


def _mstep(h: ProfileHmm, counts) -> ProfileHmm:
    """Maximum-likelihood update; rows with no posterior mass keep their
    previous parameters, and every row is floored and renormalized."""
    cM, cI, kt = counts
    L = h.length
    match_em = h.match_emissions.copy()
    insert_em = h.insert_emissions.copy()
    for j in range(L):
        if cM[j].sum() > 0:
            match_em[j] = _floor_normalize(cM[j])
    for j in range(L + 1):
        if cI[j].sum() > 0:
            insert_em[j] = _floor_normalize(cI[j])
    new = {
        "mm": h.t_mm.copy(), "mi": h.t_mi.copy(), "md": h.t_md.copy(),
        "im": h.t_im.copy(), "ii": h.t_ii.copy(), "id": h.t_id.copy(),
        "dm": h.t_dm.copy(), "di": h.t_di.copy(), "dd": h.t_dd.copy(),
    }
    for k in range(L + 1):
        has_d = k < L
        rows = [("mm", "mi", "md"), ("im", "ii", "id")]
        if k >= 1:
            rows.append(("dm", "di", "dd"))
        for a, b, d in rows:
            raw = (kt[a][k], kt[b][k], kt[d][k])
            if sum(raw) > 0:
                new[a][k], new[b][k], new[d][k] = _normalize_row(raw, has_d)
    out = ProfileHmm(
        length=L,
        match_emissions=match_em,
        insert_emissions=insert_em,
        t_mm=new["mm"], t_mi=new["mi"], t_md=new["md"],
        t_im=new["im"], t_ii=new["ii"], t_id=new["id"],
        t_dm=new["dm"], t_di=new["di"], t_dd=new["dd"],
    )
    out.check()
    return out


def _em_iterations(h: ProfileHmm, codes_list, cfg: TrainingConfig):
    """Yield (log-likelihood of current model, model after its update) per
    EM round; stops early once the log-likelihood change drops below
    cfg.ll_tolerance."""
    prev = None
    for _ in range(cfg.max_iterations):
        counts, ll = _estep(h, codes_list)
        if prev is not None and abs(ll - prev) < cfg.ll_tolerance:
            return
        h = _mstep(h, counts)
        yield ll, h
        prev = ll


def baum_welch(h0: ProfileHmm, seqs, cfg: TrainingConfig):
    """Train h0 on the sequences; returns (model, log-likelihood trace).

    The trace holds the total log-likelihood (sum over sequences) of the
    model at the start of each EM round, so it is non-decreasing.
    """
    if not seqs:
        raise DataError("baum_welch needs at least one training sequence")
    codes_list = [_encode(_residues_of(s)) for s in seqs]
    trace: list[float] = []
    model = h0
    for ll, model in _em_iterations(h0, codes_list, cfg):
        trace.append(ll)
    return model, trace


# ---------------------------------------------------------------------------
# scoring, length sweep, representative selection


def score_sequences(h: ProfileHmm, seqs) -> list[tuple[str, float]]:
    return [
        (_label_of(s, f"seq{i}"), log_odds_score(h, _residues_of(s)))
        for i, s in enumerate(seqs)
    ]


@dataclass(eq=False)
class ScoreTable:
    lengths: tuple[int, ...]
    labels: tuple[str, ...]
    scores: np.ndarray = field(repr=False)  # (len(lengths), len(labels))

    def __post_init__(self):
        if self.scores.shape != (len(self.lengths), len(self.labels)):
            raise DataError(
                f"score table shape {self.scores.shape} does not match axes"
            )

    def row(self, length: int) -> list[tuple[str, float]]:
        i = self.lengths.index(length)
        return list(zip(self.labels, (float(x) for x in self.scores[i])))

    def to_tsv(self) -> str:
        lines = ["\t".join(["length", *self.labels])]
        for length, row in zip(self.lengths, self.scores):
            lines.append("\t".join([str(length), *(f"{x:.6f}" for x in row)]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "ScoreTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        labels = tuple(lines[0].split("\t")[1:])
        lengths = []
        rows = []
        for ln in lines[1:]:
            parts = ln.split("\t")
            lengths.append(int(parts[0]))
            rows.append([float(x) for x in parts[1:]])
        return cls(lengths=tuple(lengths), labels=tuple(labels), scores=np.array(rows))


def length_sweep(m: Msa, seqs, lengths, cfg: TrainingConfig) -> ScoreTable:
    """Train one model per requested length (match columns = occupancy rank)
    and log-odds score every sequence against it."""
    if not lengths:
        raise DataError("length_sweep needs at least one length")
    labels = tuple(_label_of(s, f"seq{i}") for i, s in enumerate(seqs))
    scores = np.zeros((len(lengths), len(labels)))
    for r, length in enumerate(lengths):
        cols = match_columns_by_occupancy(m, length)
        h0 = init_with_match_columns(m, cols, cfg)
        model, _ = baum_welch(h0, seqs, cfg)
        for k, s in enumerate(seqs):
            scores[r, k] = log_odds_score(model, _residues_of(s))
    return ScoreTable(lengths=tuple(lengths), labels=labels, scores=scores)


def select_representative(group_scores) -> str:
    """Label with the maximum score; the earliest entry wins ties."""
    items = list(group_scores.items()) if isinstance(group_scores, dict) else list(group_scores)
    if not items:
        raise DataError("no scored sequences to select from")
    best_label, best_score = items[0]
    for label, score in items[1:]:
        if score > best_score:
            best_label, best_score = label, score
    return best_label
