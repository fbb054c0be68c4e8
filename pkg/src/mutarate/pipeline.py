"""End-to-end orchestration and per-stage entry points.

Every stage reads its inputs from files (or the bundled dataset) and writes
its outputs to the configured directory, so the full run and the stage
subcommands are the same code path.  All artifacts are plain text with fixed
formatting; a rerun with the same config produces byte-identical files.
Wall-clock numbers go to a separate log, not into the run report, to keep
the report reproducible.
"""

from __future__ import annotations

import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from datetime import date
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dataset_io import (
    DatasetManifest,
    SequenceRecord,
    bundled_manifest_text,
    bundled_snapshot_text,
    collection_date_for,
    fetch_genbank,
    load_manifest,
    parse_fasta,
    record_dates_from_manifest,
    reference_date_for,
    validate_dataset,
)
from .distance import DistanceMatrix, comparison_table, matrix_from_comparisons
from .errors import ConfigError, DataError, MutarateError
from .msa import (
    Msa,
    ScoringScheme,
    msa_from_fasta,
    msa_to_fasta,
    progressive_align,
    resolve_ambiguities,
)
from .phmm import (
    ProfileHmm,
    TrainingConfig,
    baum_welch,
    init_from_msa,
    init_with_match_columns,
    length_sweep,
    match_columns_by_occupancy,
    score_sequences,
    select_representative,
)
from .phylo import neighbor_joining, reroot, to_newick
from .rate_model import (
    Representative,
    build_observations,
    confidence_band,
    fit_polynomial,
    fit_to_json,
    observations_to_csv,
)
from .svgplot import rate_plot_svg

PARTIAL_MARKER = "run.partial"
TIMINGS_FILE = "stage_timings.log"
EVENTS_FILE = "events.json"
STAGE_ORDER = ("load", "align", "train", "score", "select", "distances", "tree", "rate")


@dataclass
class PipelineConfig:
    """Knobs for the full run; every field has a CLI flag of the same name."""

    manifest: str | None = None  # path; None -> bundled dataset
    fasta: str | None = None  # path; None -> snapshot dir or bundled
    snapshot_dir: str | None = None
    endpoint: str | None = None
    out: str = "out"
    seed: int = 0
    match: float = 5.0
    mismatch: float = -4.0
    gap_open: float = -10.0
    gap_extend: float = -1.0
    pseudocount: float = 0.01
    gap_threshold: float = 0.5
    ll_tolerance: float = 1e-4
    max_iterations: int = 100
    model_length: int | None = None
    tree_method: str = "jc"
    rate_method: str = "kimura"
    degree: int = 1
    reference_year: int | None = None
    reference_date: str | None = None  # ISO, e.g. 2007-03-23
    include_reference: bool = True

    def scoring(self) -> ScoringScheme:
        return ScoringScheme(
            match=self.match,
            mismatch=self.mismatch,
            gap_open=self.gap_open,
            gap_extend=self.gap_extend,
        )

    def training(self) -> TrainingConfig:
        return TrainingConfig(
            pseudocount=self.pseudocount,
            gap_threshold=self.gap_threshold,
            ll_tolerance=self.ll_tolerance,
            max_iterations=self.max_iterations,
        )

    def parsed_reference_date(self) -> date | None:
        if self.reference_date is None:
            return None
        try:
            return date.fromisoformat(self.reference_date)
        except ValueError:
            raise ConfigError(f"reference_date {self.reference_date!r} is not an ISO date")

    def out_path(self, name: str) -> Path:
        return Path(self.out) / name

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)


def load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def load_inputs(cfg: PipelineConfig) -> tuple[DatasetManifest, list[SequenceRecord], dict]:
    """Manifest plus sequence records, from files, the snapshot, or the
    bundled dataset."""
    if cfg.manifest is not None:
        try:
            manifest_text = Path(cfg.manifest).read_text()
        except OSError as exc:
            raise DataError(f"cannot read manifest {cfg.manifest}: {exc}")
    else:
        manifest_text = bundled_manifest_text()
    manifest = load_manifest(
        manifest_text,
        reference_year=cfg.reference_year,
        reference_date=cfg.parsed_reference_date(),
    )
    if cfg.fasta is not None:
        try:
            fasta_text = Path(cfg.fasta).read_text()
        except OSError as exc:
            raise DataError(f"cannot read FASTA {cfg.fasta}: {exc}")
    elif cfg.snapshot_dir is not None:
        result = fetch_genbank(
            manifest.accessions(), endpoint=cfg.endpoint, snapshot_dir=cfg.snapshot_dir
        )
        if result.missing:
            raise DataError(
                "no sequence available for: " + ", ".join(sorted(result.missing))
            )
        fasta_text = result.fasta_text
    else:
        fasta_text = bundled_snapshot_text()
    records = parse_fasta(fasta_text, manifest=manifest)
    report = validate_dataset(manifest, records)
    if report.missing_records:
        raise DataError(
            "manifest entries without sequence data: "
            + ", ".join(report.missing_records)
        )
    explicit_dates = record_dates_from_manifest(manifest_text)
    return manifest, records, explicit_dates


def _records_by_year(manifest: DatasetManifest, records: list[SequenceRecord]):
    by_label = {rec.label: rec for rec in records}
    grouped = {}
    for year in manifest.years():
        grouped[year] = [by_label[label] for label, _ in manifest.groups[year]]
    return grouped


def _read_artifact(path: Path, producer: str) -> str:
    if not path.is_file():
        raise DataError(f"missing {path.name}; run the {producer} stage first")
    return path.read_text()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _record_events(cfg: PipelineConfig, updates: dict) -> None:
    """Merge stage findings into events.json so a later report (from this
    process or a chained subcommand) sees the same picture."""
    path = cfg.out_path(EVENTS_FILE)
    current = {}
    if path.is_file():
        current = json.loads(path.read_text())
    current.update(updates)
    _write(path, json.dumps(current, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# stages


def stage_load(cfg: PipelineConfig) -> dict:
    manifest, records, _ = load_inputs(cfg)
    result = {
        "dataset": {
            "years": {str(y): len(manifest.groups[y]) for y in manifest.years()},
            "records": len(records),
            "reference_year": manifest.reference_year,
        }
    }
    _record_events(cfg, result)
    return result


def stage_fetch(cfg: PipelineConfig) -> dict:
    if cfg.snapshot_dir is None:
        raise ConfigError("fetch needs --snapshot-dir to store the records")
    if cfg.manifest is not None:
        manifest_text = Path(cfg.manifest).read_text()
    else:
        manifest_text = bundled_manifest_text()
    manifest = load_manifest(manifest_text)
    result = fetch_genbank(
        manifest.accessions(), endpoint=cfg.endpoint, snapshot_dir=cfg.snapshot_dir
    )
    summary = {
        "fetched": sorted(result.fetched),
        "from_snapshot": sorted(result.from_snapshot),
        "missing": sorted(result.missing),
    }
    if result.missing:
        raise DataError("could not obtain: " + ", ".join(summary["missing"]))
    return summary


def stage_align(cfg: PipelineConfig) -> dict:
    manifest, records, _ = load_inputs(cfg)
    scheme = cfg.scoring()
    replaced = {}
    for year, group in _records_by_year(manifest, records).items():
        aligned = progressive_align(group, scheme)
        _write(cfg.out_path(f"aligned_{year}.fasta"), msa_to_fasta(aligned))
        resolved = resolve_ambiguities(aligned)
        _write(cfg.out_path(f"resolved_{year}.fasta"), msa_to_fasta(resolved))
        replaced[str(year)] = sum(
            1
            for (_, a), (_, b) in zip(aligned.rows, resolved.rows)
            for x, y in zip(a, b)
            if x != y
        )
    result = {"ambiguity_replacements": replaced}
    _record_events(cfg, result)
    return result


def _resolved_msa(cfg: PipelineConfig, year: int) -> Msa:
    return msa_from_fasta(_read_artifact(cfg.out_path(f"resolved_{year}.fasta"), "align"))


def _degapped_rows(m: Msa) -> list[tuple[str, str]]:
    return [(label, row.replace("-", "")) for label, row in m.rows]


def stage_train(cfg: PipelineConfig) -> dict:
    manifest, _, _ = load_inputs(cfg)
    tcfg = cfg.training()
    iterations = {}
    lengths = {}
    for year in manifest.years():
        m = _resolved_msa(cfg, year)
        if cfg.model_length is not None:
            cols = match_columns_by_occupancy(m, cfg.model_length)
            model = init_with_match_columns(m, cols, tcfg)
        else:
            model = init_from_msa(m, tcfg)
        model, trace = baum_welch(model, _degapped_rows(m), tcfg)
        _write(cfg.out_path(f"phmm_{year}.json"), model.to_json())
        iterations[str(year)] = len(trace)
        lengths[str(year)] = model.length
    result = {"em_iterations": iterations, "model_lengths": lengths}
    _record_events(cfg, result)
    return result


def stage_score(cfg: PipelineConfig, lengths: list[int] | None = None) -> dict:
    manifest, _, _ = load_inputs(cfg)
    tcfg = cfg.training()
    for year in manifest.years():
        m = _resolved_msa(cfg, year)
        model = ProfileHmm.from_json(
            _read_artifact(cfg.out_path(f"phmm_{year}.json"), "train")
        )
        rows = _degapped_rows(m)
        scored = score_sequences(model, rows)
        lines = ["label\tscore"]
        lines += [f"{label}\t{value:.6f}" for label, value in scored]
        _write(cfg.out_path(f"scores_{year}.tsv"), "\n".join(lines) + "\n")
        if lengths:
            table = length_sweep(m, rows, lengths, tcfg)
            _write(cfg.out_path(f"sweep_{year}.tsv"), table.to_tsv())
    return {}


def _read_scores(path: Path) -> list[tuple[str, float]]:
    lines = _read_artifact(path, "score").splitlines()
    if not lines or lines[0] != "label\tscore":
        raise DataError(f"{path.name}: unexpected header")
    out = []
    for line in lines[1:]:
        label, value = line.split("\t")
        out.append((label, float(value)))
    return out


def stage_select(cfg: PipelineConfig) -> dict:
    manifest, records, explicit_dates = load_inputs(cfg)
    by_label = {rec.label: rec for rec in records}
    chosen = {}
    for year in manifest.years():
        scored = _read_scores(cfg.out_path(f"scores_{year}.tsv"))
        winner = select_representative(scored)
        m = _resolved_msa(cfg, year)
        residues = dict(_degapped_rows(m))[winner]
        record = by_label[winner]
        when = explicit_dates.get(winner) or collection_date_for(record)
        chosen[str(year)] = {
            "label": winner,
            "accession": record.accession,
            "score": round(dict(scored)[winner], 6),
            "collection_date": when.isoformat(),
            "residues": residues,
        }
    _write(
        cfg.out_path("representatives.json"),
        json.dumps(chosen, indent=2, sort_keys=True) + "\n",
    )
    result = {"representatives": {y: v["label"] for y, v in chosen.items()}}
    _record_events(cfg, result)
    return result


def _read_representatives(cfg: PipelineConfig) -> dict:
    text = _read_artifact(cfg.out_path("representatives.json"), "select")
    return json.loads(text)


def stage_distances(cfg: PipelineConfig, only_method: str | None = None) -> dict:
    reps = _read_representatives(cfg)
    seqs = [(year, info["residues"]) for year, info in sorted(reps.items())]
    labels, table = comparison_table(seqs, cfg.scoring())
    methods = [only_method] if only_method else [cfg.tree_method, cfg.rate_method]
    for method in dict.fromkeys(methods):
        matrix = matrix_from_comparisons(labels, table, method)
        _write(cfg.out_path(f"distances_{method}.tsv"), matrix.to_tsv())
    return {}


def stage_tree(cfg: PipelineConfig) -> dict:
    matrix = DistanceMatrix.from_tsv(
        _read_artifact(cfg.out_path(f"distances_{cfg.tree_method}.tsv"), "distances")
    )
    tree = neighbor_joining(matrix)
    _write(cfg.out_path("tree_nj.newick"), to_newick(tree) + "\n")
    if cfg.manifest is not None:
        manifest_text = Path(cfg.manifest).read_text()
    else:
        manifest_text = bundled_manifest_text()
    manifest = load_manifest(manifest_text, reference_year=cfg.reference_year)
    rerooted = reroot(tree, str(manifest.reference_year))
    _write(cfg.out_path("tree_rerooted.newick"), to_newick(rerooted) + "\n")
    clamped = [
        {"node": label, "raw_length": raw} for label, raw in tree.clamp_events()
    ]
    result = {"clamped_branches": clamped}
    _record_events(cfg, result)
    return result


def stage_rate(cfg: PipelineConfig) -> dict:
    manifest, _, _ = load_inputs(cfg)
    matrix = DistanceMatrix.from_tsv(
        _read_artifact(cfg.out_path(f"distances_{cfg.rate_method}.tsv"), "distances")
    )
    reps = []
    for year_s, info in sorted(_read_representatives(cfg).items()):
        reps.append(
            Representative(
                year=int(year_s),
                label=info["label"],
                residues=info["residues"],
                collection_date=date.fromisoformat(info["collection_date"]),
            )
        )
    obs = build_observations(
        reps,
        matrix,
        manifest.reference_year,
        reference_date_for(manifest),
        include_reference=cfg.include_reference,
    )
    _write(cfg.out_path("observations.csv"), observations_to_csv(obs))
    fit = fit_polynomial(obs, cfg.degree)
    band = None
    if fit.n > cfg.degree + 1:
        band = confidence_band(fit, obs)
        fit.ci95 = tuple(band)
    _write(cfg.out_path("rate_fit.json"), fit_to_json(fit) + "\n")
    _write(cfg.out_path("rate_fit.svg"), rate_plot_svg(obs, fit, band))
    result = {"rate_per_day": fit.rate, "observations": len(obs)}
    _record_events(cfg, result)
    return result


# ---------------------------------------------------------------------------
# full run


@dataclass
class RunReport:
    package_version: str
    python_version: str
    numpy_version: str
    scipy_version: str
    config: dict
    seed: int
    stages: list[str]
    representatives: dict
    events: dict
    artifacts: list[str]
    timings_file: str = TIMINGS_FILE

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


_STAGE_ARTIFACT_GLOBS = (
    "aligned_*.fasta",
    "resolved_*.fasta",
    "phmm_*.json",
    "scores_*.tsv",
    "sweep_*.tsv",
    "representatives.json",
    "distances_*.tsv",
    "tree_nj.newick",
    "tree_rerooted.newick",
    "observations.csv",
    "rate_fit.json",
    "rate_fit.svg",
)


def _artifact_names(out_dir: Path) -> list[str]:
    names = []
    for pattern in _STAGE_ARTIFACT_GLOBS:
        names.extend(p.name for p in out_dir.glob(pattern))
    return sorted(set(names))


def build_report(cfg: PipelineConfig) -> RunReport:
    """Assemble the run report from whatever the stages left in the output
    directory; a full run and chained subcommands produce the same bytes."""
    out_dir = Path(cfg.out)
    reps = {}
    reps_path = out_dir / "representatives.json"
    if reps_path.is_file():
        reps = {
            year: {k: info[k] for k in ("label", "accession", "score")}
            for year, info in json.loads(reps_path.read_text()).items()
        }
    events = {}
    events_path = out_dir / EVENTS_FILE
    if events_path.is_file():
        events = json.loads(events_path.read_text())
    return RunReport(
        package_version=__version__,
        python_version="{}.{}.{}".format(*sys.version_info[:3]),
        numpy_version=np.__version__,
        scipy_version=scipy.__version__,
        config=asdict(cfg),
        seed=cfg.seed,
        stages=list(STAGE_ORDER) + ["report"],
        representatives=reps,
        events=events,
        artifacts=_artifact_names(out_dir),
    )


def stage_report(cfg: PipelineConfig) -> RunReport:
    report = build_report(cfg)
    _write(Path(cfg.out) / "run_report.json", report.to_json())
    return report


_STAGE_FUNCTIONS = {
    "load": stage_load,
    "align": stage_align,
    "train": stage_train,
    "score": stage_score,
    "select": stage_select,
    "distances": stage_distances,
    "tree": stage_tree,
    "rate": stage_rate,
}


def run_pipeline(cfg: PipelineConfig) -> RunReport:
    out_dir = Path(cfg.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / PARTIAL_MARKER
        probe.write_text("run in progress\n")
    except OSError as exc:
        raise ConfigError(f"output directory {cfg.out} is not writable: {exc}")

    timings: list[tuple[str, float]] = []
    for name in STAGE_ORDER:
        started = time.perf_counter()
        try:
            _STAGE_FUNCTIONS[name](cfg)
        except MutarateError as exc:
            raise type(exc)(f"stage {name}: {exc}") from exc
        except Exception as exc:
            raise DataError(f"stage {name}: {exc}") from exc
        timings.append((name, time.perf_counter() - started))

    report = stage_report(cfg)
    lines = [f"{name}\t{seconds:.3f}" for name, seconds in timings]
    lines.append(f"total\t{sum(s for _, s in timings):.3f}")
    _write(out_dir / TIMINGS_FILE, "\n".join(lines) + "\n")
    (out_dir / PARTIAL_MARKER).unlink()
    return report
