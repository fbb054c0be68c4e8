import math
import random

import numpy as np
import pytest

from mutarate.distance import (
    DistanceMatrix,
    SiteComparison,
    compare_sites,
    distance_matrix,
    jc_correction,
    jukes_cantor,
    k2p_correction,
    kimura,
    p_distance,
)
from mutarate.errors import ConfigError, DataError, SaturationError


def brute_classify(a, b):
    """Independent per-column classifier used as the oracle."""
    sites = ts = tv = 0
    for x, y in zip(a, b):
        if x not in "ACGT" or y not in "ACGT":
            continue
        sites += 1
        if x == y:
            continue
        if {x, y} in ({"A", "G"}, {"C", "T"}):
            ts += 1
        else:
            tv += 1
    return sites, ts, tv


def test_identity_pair():
    c = compare_sites("ACGT", "ACGT")
    assert (c.sites, c.transitions, c.transversions) == (4, 0, 0)
    assert c.D == 0


def test_transversion_classified():
    c = compare_sites("ACGT", "ACGA")
    assert (c.sites, c.transitions, c.transversions) == (4, 0, 1)
    assert c.D == 0.25


def test_gap_column_excluded():
    c = compare_sites("AC-T", "ACGT")
    assert c.sites == 3
    assert c.D == 0


def test_ambiguity_column_excluded():
    c = compare_sites("ACNT", "ACGT")
    assert c.sites == 3


def test_length_mismatch_rejected():
    with pytest.raises(DataError, match="lengths differ"):
        compare_sites("ACG", "AC")


def test_no_comparable_sites_rejected():
    with pytest.raises(DataError, match="comparable"):
        compare_sites("--N", "AC-")


def test_site_comparison_invariants():
    with pytest.raises(DataError):
        SiteComparison(sites=0, transitions=0, transversions=0)
    with pytest.raises(DataError):
        SiteComparison(sites=2, transitions=2, transversions=1)
    c = SiteComparison(sites=10, transitions=2, transversions=3)
    assert c.P + c.Q == c.D == 0.5


def test_compare_sites_matches_brute_force_sample():
    rng = random.Random(777)
    alphabet = "ACGT-NRY"
    for _ in range(3000):
        a = "".join(rng.choice(alphabet) for _ in range(6))
        b = "".join(rng.choice(alphabet) for _ in range(6))
        expected = brute_classify(a, b)
        if expected[0] == 0:
            with pytest.raises(DataError):
                compare_sites(a, b)
        else:
            c = compare_sites(a, b)
            assert (c.sites, c.transitions, c.transversions) == expected, (a, b)


def test_jc_values():
    assert jc_correction(0.0) == 0.0
    assert abs(jc_correction(0.1) - 0.107326) < 1e-6
    with pytest.raises(SaturationError):
        jc_correction(0.75)


def test_kimura_values():
    assert k2p_correction(0.0, 0.0) == 0.0
    assert abs(k2p_correction(0.1, 0.05) - 0.170189) < 1e-5
    with pytest.raises(SaturationError):
        k2p_correction(0.5, 0.0)
    with pytest.raises(SaturationError):
        k2p_correction(0.0, 0.5)


def test_kimura_reduces_to_one_parameter_form_without_transversions():
    for sites, ts in [(100, 1), (100, 10), (50, 20), (12, 5)]:
        c = SiteComparison(sites=sites, transitions=ts, transversions=0)
        assert kimura(c) == pytest.approx(-0.5 * math.log(1 - 2 * c.P), abs=1e-12)


def test_corrections_expand_observed_difference():
    rng = random.Random(4242)
    for _ in range(200):
        n = rng.randint(1, 12)
        a = "".join(rng.choice("ACGT") for _ in range(n))
        b = "".join(rng.choice("ACGT") for _ in range(n))
        c = compare_sites(a, b)
        try:
            assert jukes_cantor(c) >= c.D
        except SaturationError:
            pass
        try:
            assert kimura(c) >= c.D
        except SaturationError:
            pass


def test_distance_matrix_identical_pair_zero():
    m = distance_matrix([("a", "ACGTACGT"), ("b", "ACGTACGT")], "jc")
    assert m.values[0, 1] == 0.0


def test_distance_matrix_permutation_equivariant():
    seqs = [
        ("a", "ACGTACGTACGTACGT"),
        ("b", "ACGTACGAACGTACGA"),
        ("c", "ACATACGTACATACGT"),
        ("d", "ACGTTCGTACGTTCGA"),
    ]
    m = distance_matrix(seqs, "kimura")
    perm = [2, 0, 3, 1]
    mp = distance_matrix([seqs[i] for i in perm], "kimura")
    assert mp.labels == tuple(seqs[i][0] for i in perm)
    np.testing.assert_allclose(mp.values, m.values[np.ix_(perm, perm)], atol=1e-15)


def test_distance_matrix_saturation_names_offending_pair():
    # single-residue pair leaves the aligner no way around a full mismatch
    with pytest.raises(SaturationError, match=r"\(a, b\)"):
        distance_matrix([("a", "A"), ("b", "C"), ("c", "A")], "jc")


def test_unknown_method_rejected():
    with pytest.raises(ConfigError, match="unknown distance method"):
        distance_matrix([("a", "ACGT"), ("b", "ACGT")], "hamming")


def test_p_distance_examples():
    assert p_distance("ACGT", "ACGT") == 0.0
    assert p_distance("AAAA", "CCCC") == 1.0
    assert p_distance("AACC", "AATT") == 0.5


def test_p_distance_method_tolerates_saturation():
    m = distance_matrix([("a", "AAAA"), ("b", "CCCC")], "p-distance")
    assert m.values[0, 1] == 1.0


def test_matrix_invariants_enforced():
    with pytest.raises(DataError, match="symmetric"):
        DistanceMatrix(labels=("a", "b"), values=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(DataError, match="diagonal"):
        DistanceMatrix(labels=("a", "b"), values=np.array([[0.5, 1.0], [1.0, 0.0]]))
    with pytest.raises(DataError, match="negative"):
        DistanceMatrix(labels=("a", "b"), values=np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(DataError, match="shape"):
        DistanceMatrix(labels=("a",), values=np.zeros((2, 2)))


def test_tsv_round_trip_is_byte_stable():
    seqs = [("x", "ACGTACGTAC"), ("y", "ACGAACGTAC"), ("z", "TCGTACGTAA")]
    m = distance_matrix(seqs, "jc")
    text = m.to_tsv()
    again = DistanceMatrix.from_tsv(text)
    assert again.labels == m.labels
    assert again.to_tsv() == text


def test_min_off_diagonal():
    values = np.array(
        [
            [0.0, 0.3, 0.2],
            [0.3, 0.0, 0.1],
            [0.2, 0.1, 0.0],
        ]
    )
    m = DistanceMatrix(labels=("a", "b", "c"), values=values)
    assert m.min_off_diagonal() == ("b", "c", 0.1)
