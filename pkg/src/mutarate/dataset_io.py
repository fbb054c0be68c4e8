"""Parse, validate, persist and (optionally) fetch the year-grouped dataset.

File formats:
  FASTA    header ">label|accession|year[|date]" or a bare accession header
           (then label/year come from the manifest); sequence lines are
           case-folded and joined.
  Manifest tab-separated "label<TAB>accession<TAB>year[<TAB>ISO-date]",
           '#' comment lines and blank lines skipped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path

from .errors import DataError

# IUPAC nucleotide ambiguity codes -> set of compatible unambiguous bases
AMBIGUITY_SETS = {
    "R": "AG",
    "Y": "CT",
    "S": "CG",
    "W": "AT",
    "K": "GT",
    "M": "AC",
    "B": "CGT",
    "D": "AGT",
    "H": "ACT",
    "V": "ACG",
    "N": "ACGT",
}
NUCLEOTIDES = "ACGT"
ALPHABET = frozenset(NUCLEOTIDES) | frozenset(AMBIGUITY_SETS)
GAP = "-"


@dataclass(frozen=True)
class SequenceRecord:
    """One accession-tagged nucleotide sequence with a collection year."""

    accession: str
    label: str
    year: int
    residues: str
    collection_date: date | None = None

    def __post_init__(self):
        if not self.accession:
            raise DataError("record has empty accession")
        if not self.residues:
            raise DataError(f"record {self.label or self.accession}: empty residues")
        for pos, ch in enumerate(self.residues):
            if ch not in ALPHABET:
                raise DataError(
                    f"record {self.label or self.accession}: residue {ch!r} "
                    f"at position {pos} outside alphabet"
                )


@dataclass(frozen=True)
class DatasetManifest:
    """Year -> ordered (label, accession) groups, plus the reference year.

    Group order and intra-group order follow the manifest file and are the
    tie-breaking order used downstream.
    """

    groups: dict[int, tuple[tuple[str, str], ...]]
    reference_year: int
    reference_date: date | None = None

    def years(self) -> list[int]:
        return sorted(self.groups)

    def labels(self) -> list[str]:
        return [lab for year in self.years() for lab, _ in self.groups[year]]

    def accessions(self) -> list[str]:
        return [acc for year in self.years() for _, acc in self.groups[year]]

    def by_accession(self) -> dict[str, tuple[str, int]]:
        """accession -> (label, year)"""
        out = {}
        for year, rows in self.groups.items():
            for lab, acc in rows:
                out[acc] = (lab, year)
        return out


def collection_date_for(record: SequenceRecord) -> date:
    """Explicit collection date, else July 1 of the record's year."""
    return record.collection_date or date(record.year, 7, 1)


def reference_date_for(manifest: DatasetManifest) -> date:
    """Manifest reference date, else March 23 of the reference year."""
    return manifest.reference_date or date(manifest.reference_year, 3, 23)


def _parse_iso_date(text: str, where: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise DataError(f"{where}: bad ISO date {text!r}") from exc


def parse_fasta(text: str, manifest: DatasetManifest | None = None) -> list[SequenceRecord]:
    """Parse FASTA text into records.

    Structured headers "label|accession|year[|date]" are self-describing.
    Bare headers (first whitespace token, optional ".N" version suffix) are
    resolved against the manifest; without one they are an error.  The
    manifest is authoritative on conflict.
    """
    records: list[SequenceRecord] = []
    by_acc = manifest.by_accession() if manifest is not None else {}
    header: str | None = None
    chunks: list[str] = []

    def flush():
        if header is None:
            return
        residues = "".join(chunks).upper()
        records.append(_record_from_header(header, residues, manifest, by_acc))

    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            header = line[1:].strip()
            chunks = []
        else:
            if header is None:
                raise DataError("FASTA: sequence data before first header")
            chunks.append(line)
    flush()
    return records


def _record_from_header(header, residues, manifest, by_acc) -> SequenceRecord:
    parts = [p.strip() for p in header.split("|")]
    if len(parts) >= 3:
        label, accession = parts[0], parts[1]
        if not label or not accession:
            raise DataError(f"FASTA header {header!r}: empty label or accession")
        try:
            year = int(parts[2])
        except ValueError:
            raise DataError(f"FASTA header {header!r}: year {parts[2]!r} not an integer")
        cdate = _parse_iso_date(parts[3], f"header {header!r}") if len(parts) > 3 and parts[3] else None
        if manifest is not None:
            known = by_acc.get(accession)
            if known is not None:
                label, year = known
        return SequenceRecord(accession, label, year, residues, cdate)
    if len(parts) == 2:
        raise DataError(f"FASTA header {header!r}: expected label|accession|year[|date]")
    # bare header: accession is the first whitespace token
    accession = header.split()[0] if header.split() else ""
    if not accession:
        raise DataError("FASTA: empty header")
    if manifest is None:
        raise DataError(f"FASTA header {accession!r}: bare accession needs a manifest for its year")
    known = by_acc.get(accession)
    if known is None and "." in accession:
        known = by_acc.get(accession.rsplit(".", 1)[0])
    if known is None:
        raise DataError(f"FASTA header {accession!r}: accession not in manifest")
    label, year = known
    return SequenceRecord(accession.split(".", 1)[0], label, year, residues)


def write_fasta(records: list[SequenceRecord], width: int = 70) -> str:
    """Serialize records with structured headers; inverse of parse_fasta."""
    out = []
    for rec in records:
        head = f">{rec.label}|{rec.accession}|{rec.year}"
        if rec.collection_date is not None:
            head += f"|{rec.collection_date.isoformat()}"
        out.append(head)
        for i in range(0, len(rec.residues), width):
            out.append(rec.residues[i : i + width])
    return "\n".join(out) + "\n"


def load_manifest(
    text: str,
    reference_year: int | None = None,
    reference_date: date | None = None,
) -> DatasetManifest:
    """Parse a manifest TSV.  reference_year defaults to the minimum year."""
    groups: dict[int, list[tuple[str, str]]] = {}
    seen_labels: set[str] = set()
    seen_accessions: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise DataError(f"manifest line {lineno}: expected 3 or 4 tab-separated fields")
        label, accession, year_s = parts[0].strip(), parts[1].strip(), parts[2].strip()
        if not label or not accession:
            raise DataError(f"manifest line {lineno}: empty label or accession")
        if label in seen_labels:
            raise DataError(f"manifest line {lineno}: duplicate label {label!r}")
        if accession in seen_accessions:
            raise DataError(f"manifest line {lineno}: duplicate accession {accession!r}")
        try:
            year = int(year_s)
        except ValueError:
            raise DataError(f"manifest line {lineno}: year {year_s!r} not an integer")
        if len(parts) == 4 and parts[3].strip():
            _parse_iso_date(parts[3].strip(), f"manifest line {lineno}")
        seen_labels.add(label)
        seen_accessions.add(accession)
        groups.setdefault(year, []).append((label, accession))
    if len(groups) < 2:
        raise DataError(f"manifest has {len(groups)} year(s); at least 2 required")
    ref = min(groups) if reference_year is None else reference_year
    if ref not in groups:
        raise DataError(f"reference year {ref} not present in manifest")
    return DatasetManifest(
        groups={y: tuple(rows) for y, rows in groups.items()},
        reference_year=ref,
        reference_date=reference_date,
    )


def record_dates_from_manifest(text: str) -> dict[str, date]:
    """Optional per-record dates from 4-column manifest rows, keyed by label."""
    dates = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 4 and parts[3].strip():
            dates[parts[0].strip()] = date.fromisoformat(parts[3].strip())
    return dates


@dataclass
class FetchResult:
    fasta_text: str
    fetched: list[str] = field(default_factory=list)
    from_snapshot: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)


def fetch_genbank(
    accessions: list[str],
    endpoint: str,
    snapshot_dir: str | Path,
    max_retries: int = 3,
    backoff: float = 1.0,
    timeout: float = 30.0,
) -> FetchResult:
    """Fetch nucleotide FASTA per accession from an efetch-compatible endpoint.

    Each accession is written to ``snapshot_dir/<accession>.fasta`` on first
    fetch; accessions already present in the snapshot are served from disk
    without touching the network.  HTTP failures are retried with exponential
    backoff (max_retries attempts); accessions the endpoint cannot produce are
    collected in ``missing`` rather than raised one by one.
    """
    import requests

    snapshot_dir = Path(snapshot_dir)
    result = FetchResult(fasta_text="")
    if not accessions:
        return result
    snapshot_dir.mkdir(parents=True, exist_ok=True)
    pieces = []
    for acc in accessions:
        snap = snapshot_dir / f"{acc}.fasta"
        if snap.exists():
            pieces.append(snap.read_text())
            result.from_snapshot.append(acc)
            continue
        text = None
        for attempt in range(max_retries):
            try:
                resp = requests.get(
                    endpoint,
                    params={"db": "nuccore", "id": acc, "rettype": "fasta", "retmode": "text"},
                    timeout=timeout,
                )
                if resp.status_code == 200 and resp.text.lstrip().startswith(">"):
                    text = resp.text
                break  # non-retryable outcome (success or a definitive miss)
            except requests.RequestException:
                if attempt + 1 < max_retries:
                    time.sleep(backoff * (2**attempt))
        if text is None:
            result.missing.append(acc)
            continue
        if not text.endswith("\n"):
            text += "\n"
        snap.write_text(text)
        pieces.append(text)
        result.fetched.append(acc)
    result.fasta_text = "".join(pieces)
    return result


@dataclass
class ValidationReport:
    """Cross-check of manifest vs records; report-only, never raises."""

    missing_records: list[str] = field(default_factory=list)  # manifest accession, no record
    unknown_records: list[str] = field(default_factory=list)  # record accession, no manifest row
    ambiguities: list[tuple[str, int, str]] = field(default_factory=list)  # (label, pos, char)

    @property
    def ok(self) -> bool:
        return not self.missing_records and not self.unknown_records


def validate_dataset(manifest: DatasetManifest, records: list[SequenceRecord]) -> ValidationReport:
    report = ValidationReport()
    by_acc = manifest.by_accession()
    record_accs = {rec.accession for rec in records}
    for acc in manifest.accessions():
        if acc not in record_accs:
            report.missing_records.append(acc)
    for rec in records:
        if rec.accession not in by_acc:
            report.unknown_records.append(rec.accession)
        for pos, ch in enumerate(rec.residues):
            if ch in AMBIGUITY_SETS:
                report.ambiguities.append((rec.label, pos, ch))
    return report


def bundled_manifest_text() -> str:
    return resources.files("mutarate").joinpath("data/manifest.tsv").read_text()


def bundled_snapshot_text() -> str:
    return resources.files("mutarate").joinpath("data/snapshot.fasta").read_text()
