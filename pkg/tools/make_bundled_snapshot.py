"""Regenerate the bundled offline dataset under src/mutarate/data/.

The manifest lists the study's real GenBank accessions grouped by collection
year.  The snapshot holds synthetic surrogate sequences (the records say so
in their descriptions): fetching from GenBank needs network access, and the
test suite has to run without it.

The surrogates are not arbitrary.  Year consensus sequences are planted on a
small tree so the downstream numbers land where the end-to-end tests expect
them:

    2007 --15--> U --8--> 2008        (U is an unobserved intermediate)
                  \--2--> 2010
    2007 --23--> 2009

with all mutated positions disjoint and a roughly 2:1 transition bias.
Over 320 nt that gives hamming distances 07-08=23, 07-09=23, 07-10=17,
08-10=10 (the minimum), 08-09=46, 09-10=40, and a distance-versus-days
slope of about 4.5e-5 with July-1 collection dates against the 2007-03-23
reference.  One member per year is an exact consensus copy (the intended
score winner); every other member carries private substitutions plus
occasional indels, end truncations, and ambiguity codes.

Run from the repository root:  python3 tools/make_bundled_snapshot.py
"""

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mutarate.dataset_io import load_manifest, parse_fasta, validate_dataset
from mutarate.distance import jc_correction, k2p_correction

SEED = 20070323
LENGTH = 320
DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "mutarate" / "data"

ACCESSIONS = {
    2007: [
        "DQ911222", "DQ911173", "DQ911190", "DQ911228", "DQ911183", "DQ911164",
        "DQ911172", "DQ911208", "DQ911205", "AY548725", "DQ911206", "AY548723",
        "DQ911231", "DQ911163", "DQ911207", "AY548722", "DQ911218",
    ],
    2008: [
        "EF694448", "EF694425", "EF694438", "EF694446", "EF694408", "EF694420",
        "EF694424", "EF694455", "EF694502", "EF694517", "EF694456", "EF694413",
        "EF694525", "EF694501", "EF694513", "EF694498", "EF694396", "EF694486",
        "EF694450", "EF694418", "EF694439", "EF694434", "EF694442", "EF694440",
        "EF694493", "EF694499", "EF694445", "EF694463", "EF694505", "EF694476",
        "EF694475", "EF694433", "EF694478", "EF694459", "EF694524",
    ],
    2009: [
        "AB470254", "AB470018", "AB470024", "AB470055", "AB470015", "AB470046",
        "AB470009", "AB470048", "AB470030", "AB470036", "AB470019", "AB470060",
        "AB470057", "AB470021", "B470039", "AB470028", "AB470008", "AB470014",
        "AB470037", "AB470027", "AB470052", "AB470043", "AB470049", "AB470026",
        "AB470006", "AB470053", "AB470013", "AB470023", "AB470005", "AB470007",
        "AB470056", "AB470017", "AB470059", "AB470252", "AB470033",
    ],
    2010: [
        "FN668600", "FN668570", "FN668577", "FN668587", "FN668591", "FN668593",
        "FN668574", "FN668588", "FN668589", "FN668586", "FN668583",
    ],
}

# one-based member index of the exact-consensus copy in each year
WINNERS = {2007: 11, 2008: 9, 2009: 14, 2010: 10}

TRANSITION = {"A": "G", "G": "A", "C": "T", "T": "C"}
TRANSVERSIONS = {"A": "CT", "G": "CT", "C": "AG", "T": "AG"}
COMPATIBLE_CODES = {"A": "RMN", "C": "YSN", "G": "RKN", "T": "YWN"}


def mutate(seq, positions, n_transitions, rng):
    """Apply substitutions at the given positions, the first n as transitions."""
    out = list(seq)
    for k, pos in enumerate(positions):
        base = out[pos]
        if k < n_transitions:
            out[pos] = TRANSITION[base]
        else:
            out[pos] = rng.choice(TRANSVERSIONS[base])
    return "".join(out)


def build_consensuses(rng):
    root = "".join(rng.choice("ACGT") for _ in range(LENGTH))
    sites = rng.sample(range(10, LENGTH - 10), 48)
    edge_ru, edge_u08, edge_u10, edge_r09 = (
        sites[:15], sites[15:23], sites[23:25], sites[25:48]
    )
    intermediate = mutate(root, edge_ru, 10, rng)
    consensus = {
        2007: root,
        2008: mutate(intermediate, edge_u08, 5, rng),
        2009: mutate(root, edge_r09, 15, rng),
        2010: mutate(intermediate, edge_u10, 1, rng),
    }
    designed = set(sites)
    return consensus, designed


def make_variant(consensus, designed, rng):
    free = [i for i in range(LENGTH) if i not in designed]
    seq = list(consensus)
    for pos in rng.sample(free, rng.randint(1, 6)):
        base = seq[pos]
        if rng.random() < 0.67:
            seq[pos] = TRANSITION[base]
        else:
            seq[pos] = rng.choice(TRANSVERSIONS[base])
    if rng.random() < 0.25:
        for pos in rng.sample(free, rng.randint(1, 2)):
            if seq[pos] in COMPATIBLE_CODES:
                seq[pos] = rng.choice(COMPATIBLE_CODES[seq[pos]])
    seq = "".join(seq)
    roll = rng.random()
    if roll < 0.15:
        at = rng.randint(40, LENGTH - 44)
        seq = seq[:at] + seq[at + rng.randint(1, 3):]
    elif roll < 0.22:
        at = rng.randint(40, LENGTH - 44)
        seq = seq[:at] + "".join(rng.choice("ACGT") for _ in range(rng.randint(1, 2))) + seq[at:]
    if rng.random() < 0.3:
        cut = rng.randint(5, 20)
        seq = seq[cut:] if rng.random() < 0.5 else seq[:-cut]
    return seq


def hamming(a, b):
    assert len(a) == len(b)
    return sum(x != y for x, y in zip(a, b))


def pq(a, b):
    p = sum(1 for x, y in zip(a, b) if x != y and TRANSITION[x] == y)
    q = sum(1 for x, y in zip(a, b) if x != y and TRANSITION[x] != y)
    return p / len(a), q / len(a)


def check_design(consensus):
    years = [2007, 2008, 2009, 2010]
    expected = {
        (2007, 2008): 23, (2007, 2009): 23, (2007, 2010): 17,
        (2008, 2009): 46, (2008, 2010): 10, (2009, 2010): 40,
    }
    jc = {}
    kim = {}
    for (a, b), d in expected.items():
        assert hamming(consensus[a], consensus[b]) == d, (a, b)
        p, q = pq(consensus[a], consensus[b])
        jc[(a, b)] = jc_correction(p + q)
        kim[(a, b)] = k2p_correction(p, q)
    assert abs(jc[(2007, 2008)] - 0.1077) < 0.05
    assert min(jc, key=jc.get) == (2008, 2010)

    xs = [0.0, 466.0, 831.0, 1196.0]
    ys = [0.0, kim[(2007, 2008)], kim[(2007, 2009)], kim[(2007, 2010)]]
    xbar = sum(xs) / 4
    ybar = sum(ys) / 4
    slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
        (x - xbar) ** 2 for x in xs
    )
    assert 3.2e-5 < slope < 5.8e-5, slope
    return jc, kim, slope


def main():
    rng = random.Random(SEED)
    consensus, designed = build_consensuses(rng)
    jc, kim, slope = check_design(consensus)

    manifest_lines = ["# label\taccession\tyear"]
    fasta_lines = []
    lengths = []
    for year in (2007, 2008, 2009, 2010):
        for i, accession in enumerate(ACCESSIONS[year], start=1):
            label = f"{year}_{i}"
            manifest_lines.append(f"{label}\t{accession}\t{year}")
            if i == WINNERS[year]:
                seq = consensus[year]
            else:
                seq = make_variant(consensus[year], designed, rng)
            lengths.append(len(seq))
            fasta_lines.append(
                f">{accession}.1 synthetic surrogate record for offline use"
            )
            fasta_lines.extend(seq[j:j + 70] for j in range(0, len(seq), 70))

    assert max(lengths) <= 339 and min(lengths) >= 286, (min(lengths), max(lengths))

    manifest_text = "\n".join(manifest_lines) + "\n"
    fasta_text = "\n".join(fasta_lines) + "\n"

    manifest = load_manifest(manifest_text)
    records = parse_fasta(fasta_text, manifest=manifest)
    report = validate_dataset(manifest, records)
    assert report.ok, (report.missing_records, report.unknown_records)
    assert len(records) == 98
    assert manifest.reference_year == 2007

    DATA_DIR.mkdir(parents=True, exist_ok=True)
    (DATA_DIR / "manifest.tsv").write_text(manifest_text)
    (DATA_DIR / "snapshot.fasta").write_text(fasta_text)

    print(f"wrote {len(records)} records, lengths {min(lengths)}..{max(lengths)}")
    for pair in sorted(jc):
        print(f"  {pair}: jc={jc[pair]:.4f} kimura={kim[pair]:.4f}")
    print(f"  slope with July-1 dates: {slope:.3e} per day")


if __name__ == "__main__":
    main()
