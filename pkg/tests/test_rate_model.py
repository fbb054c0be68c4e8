"""Regression fit, confidence band, and observation plumbing."""

import json
import math
import random
import xml.etree.ElementTree as ET
from datetime import date, timedelta

import numpy as np
import pytest

from mutarate.distance import DistanceMatrix
from mutarate.errors import DataError
from mutarate.rate_model import (
    RateObservation,
    Representative,
    build_observations,
    confidence_band,
    fit_polynomial,
    fit_to_json,
    observations_from_csv,
    observations_to_csv,
    predict,
)
from mutarate.svgplot import rate_plot_svg

REF_DATE = date(2007, 3, 23)


def _matrix():
    labels = ("2007", "2008", "2009", "2010")
    values = np.zeros((4, 4))
    d = {(0, 1): 0.059, (0, 2): 0.042, (0, 3): 0.052, (1, 2): 0.029, (1, 3): 0.058, (2, 3): 0.040}
    for (i, j), v in d.items():
        values[i, j] = values[j, i] = v
    return DistanceMatrix(labels=labels, values=values)


def _reps():
    return [
        Representative(2007, "A2007", "ACGT", date(2007, 7, 1)),
        Representative(2008, "A2008", "ACGT", date(2008, 7, 1)),
        Representative(2009, "A2009", "ACGT", date(2009, 7, 1)),
        Representative(2010, "A2010", "ACGT", date(2010, 7, 1)),
    ]


def test_build_observations_origin_and_order():
    obs = build_observations(_reps(), _matrix(), 2007, REF_DATE)
    assert [o.elapsed_days for o in obs] == [0, 466, 831, 1196]
    assert obs[0].distance == 0.0
    assert obs[0].date == REF_DATE
    assert obs[1].label == "A2008" and obs[1].distance == pytest.approx(0.059)


def test_build_observations_can_drop_origin():
    obs = build_observations(_reps(), _matrix(), 2007, REF_DATE, include_reference=False)
    assert [o.elapsed_days for o in obs] == [466, 831, 1196]


def test_build_observations_requires_reference():
    reps = [r for r in _reps() if r.year != 2007]
    with pytest.raises(DataError, match="reference year 2007"):
        build_observations(reps, _matrix(), 2007, REF_DATE)


def test_build_observations_rejects_pre_reference_collection():
    reps = _reps()
    reps[1] = Representative(2008, "A2008", "ACGT", date(2006, 1, 1))
    with pytest.raises(DataError, match="before the reference"):
        build_observations(reps, _matrix(), 2007, REF_DATE)


def _obs(pairs, start=REF_DATE):
    return [
        RateObservation(
            label=f"p{i}",
            date=start + timedelta(days=x),
            elapsed_days=x,
            distance=y,
        )
        for i, (x, y) in enumerate(pairs)
    ]


def test_exact_line_fit():
    fit = fit_polynomial(_obs([(0, 0.0), (10, 1.0)]))
    assert fit.rate == pytest.approx(0.1, abs=1e-12)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.rss < 1e-18


def test_collinear_points_have_zero_rss():
    fit = fit_polynomial(_obs([(0, 0.1), (5, 0.35), (10, 0.6)]))
    assert fit.rss < 1e-18


def test_slope_matches_closed_form():
    # lstsq against the textbook Sxy/Sxx formula on random data
    rng = random.Random(42)
    for _ in range(100):
        n = rng.randint(3, 12)
        xs = rng.sample(range(0, 200), n)
        pairs = [(x, rng.uniform(0.0, 0.5)) for x in xs]
        fit = fit_polynomial(_obs(pairs))
        x = np.array([p[0] for p in pairs], dtype=float)
        y = np.array([p[1] for p in pairs])
        sxx = np.sum((x - x.mean()) ** 2)
        sxy = np.sum((x - x.mean()) * (y - y.mean()))
        slope = sxy / sxx
        assert fit.rate == pytest.approx(slope, abs=1e-10)
        assert fit.intercept == pytest.approx(y.mean() - slope * x.mean(), abs=1e-10)


def test_residuals_orthogonal_to_design():
    rng = random.Random(7)
    for degree in (1, 2):
        for _ in range(30):
            n = rng.randint(degree + 2, 10)
            xs = rng.sample(range(0, 60), n)
            pairs = [(x, rng.uniform(0.0, 1.0)) for x in xs]
            fit = fit_polynomial(_obs(pairs), degree=degree)
            design = np.vander(
                np.array(xs, dtype=float), degree + 1, increasing=True
            )
            dots = design.T @ np.array(fit.residuals)
            assert np.all(np.abs(dots) < 1e-8)


def test_slope_scales_inversely_with_x():
    rng = random.Random(3)
    pairs = [(x, rng.uniform(0.0, 0.4)) for x in (1, 4, 9, 16, 30)]
    scaled = [(x * 3, y) for x, y in pairs]
    f1 = fit_polynomial(_obs(pairs))
    f2 = fit_polynomial(_obs(scaled))
    assert f2.rate == pytest.approx(f1.rate / 3.0, rel=1e-9)
    assert f2.intercept == pytest.approx(f1.intercept, rel=1e-9)


def test_underdetermined_fit_rejected():
    with pytest.raises(DataError, match="cannot determine"):
        fit_polynomial(_obs([(0, 0.0)]), degree=1)
    with pytest.raises(DataError, match="non-negative"):
        fit_polynomial(_obs([(0, 0.0), (1, 1.0)]), degree=-1)


def test_band_width_uses_t_quantile():
    # x = 0,1,2 and y = 0,1,1 give rss = 1/6 with one residual degree of
    # freedom, so the half-width at x=0 is t(1) * sqrt((1/6) * (5/6)).
    obs = _obs([(0, 0.0), (1, 1.0), (2, 1.0)])
    fit = fit_polynomial(obs)
    band = confidence_band(fit, obs)
    assert fit.rate == pytest.approx(0.5)
    assert fit.rss == pytest.approx(1.0 / 6.0)
    t_one_df = 12.706204736174698
    expected = t_one_df * math.sqrt((1.0 / 6.0) * (5.0 / 6.0))
    assert band[0].upper - band[0].fitted == pytest.approx(expected, rel=1e-9)
    assert band[0].fitted - band[0].lower == pytest.approx(expected, rel=1e-9)


def test_band_is_narrowest_at_mean_x():
    obs = _obs([(0, 0.02), (10, 0.15), (20, 0.21), (30, 0.33), (40, 0.38)])
    fit = fit_polynomial(obs)
    band = confidence_band(fit, obs)
    widths = [p.upper - p.lower for p in band]
    assert widths[2] == min(widths)
    assert widths[0] > widths[2] and widths[4] > widths[2]


def test_band_contains_fitted_line():
    rng = random.Random(11)
    pairs = [(x, rng.uniform(0.0, 0.5)) for x in (0, 3, 7, 12, 20, 31)]
    obs = _obs(pairs)
    fit = fit_polynomial(obs)
    for p in confidence_band(fit, obs):
        assert p.lower <= p.fitted <= p.upper


def test_band_has_zero_width_on_exact_fit():
    obs = _obs([(0, 0.1), (5, 0.35), (10, 0.6)])
    fit = fit_polynomial(obs)
    for p in confidence_band(fit, obs):
        assert p.upper - p.lower < 1e-12


def test_band_needs_residual_degrees_of_freedom():
    obs = _obs([(0, 0.0), (10, 1.0)])
    fit = fit_polynomial(obs)
    with pytest.raises(DataError, match="degrees of freedom"):
        confidence_band(fit, obs)


def test_predict():
    fit = fit_polynomial(_obs([(0, 0.0), (10, 1.0)]))
    at_ref, extrapolated = predict(fit, REF_DATE)
    assert at_ref == pytest.approx(fit.intercept, abs=1e-12)
    assert not extrapolated
    mid, extrapolated = predict(fit, REF_DATE + timedelta(days=5))
    assert mid == pytest.approx(0.5)
    assert not extrapolated
    beyond, extrapolated = predict(fit, REF_DATE + timedelta(days=20))
    assert beyond == pytest.approx(2.0)
    assert extrapolated
    with pytest.raises(DataError, match="before the reference"):
        predict(fit, REF_DATE - timedelta(days=1))


def test_observations_csv_round_trip():
    obs = build_observations(_reps(), _matrix(), 2007, REF_DATE)
    text = observations_to_csv(obs)
    assert text.splitlines()[0] == "label,date,elapsed_days,distance"
    back = observations_from_csv(text)
    assert back == obs
    assert observations_to_csv(back) == text


def test_observations_csv_rejects_unknown_header():
    with pytest.raises(DataError, match="header"):
        observations_from_csv("a,b\n1,2\n")


def test_fit_json_reports_both_rate_units():
    obs = build_observations(_reps(), _matrix(), 2007, REF_DATE)
    fit = fit_polynomial(obs)
    fit.ci95 = tuple(confidence_band(fit, obs))
    doc = json.loads(fit_to_json(fit))
    assert doc["coefficient_order"] == "ascending"
    assert doc["rate_per_year"] == pytest.approx(doc["rate_per_day"] * 365.25)
    assert doc["reference_date"] == "2007-03-23"
    assert len(doc["band"]) == len(obs)
    assert fit_to_json(fit) == fit_to_json(fit)


def test_svg_plot_is_deterministic_and_well_formed():
    obs = build_observations(_reps(), _matrix(), 2007, REF_DATE)
    fit = fit_polynomial(obs)
    band = confidence_band(fit, obs)
    svg = rate_plot_svg(obs, fit, band)
    assert svg == rate_plot_svg(obs, fit, band)
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    assert root.tag == f"{ns}svg"
    assert len(root.findall(f"{ns}circle")) == len(obs)
    assert len(root.findall(f"{ns}polygon")) == 1
    without_band = rate_plot_svg(obs, fit, None)
    assert ET.fromstring(without_band).findall(f"{ns}polygon") == []
