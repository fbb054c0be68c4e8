"""Distance-versus-time series and the mutation-rate regression.

Each year's representative contributes one observation: its Kimura distance
to the reference-year representative against the days elapsed since the
reference date.  The reference itself enters as (0, 0) by default (the flag
exists because including the origin is a modeling choice, not a datum).  A
least-squares polynomial (degree 1 by default) gives the rate; the 95% band
is the pointwise confidence interval of the mean response.

The x unit is days.  The rate is reported per day and per year (times
365.25) because sources describing this kind of fit mix the two units.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np
from scipy import stats

from .distance import DistanceMatrix
from .errors import DataError

DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class Representative:
    """A year group's chosen sequence with its collection date."""

    year: int
    label: str
    residues: str
    collection_date: date


@dataclass(frozen=True)
class RateObservation:
    label: str
    date: date
    elapsed_days: int
    distance: float

    def __post_init__(self):
        if self.elapsed_days < 0:
            raise DataError(f"observation {self.label}: negative elapsed days")
        if self.distance < 0:
            raise DataError(f"observation {self.label}: negative distance")


@dataclass(frozen=True)
class BandPoint:
    x: float
    fitted: float
    lower: float
    upper: float


@dataclass
class RateFit:
    degree: int
    coefficients: tuple[float, ...]  # ascending powers
    residuals: tuple[float, ...]
    rss: float
    n: int
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    reference_date: date
    ci95: tuple[BandPoint, ...] | None = field(default=None)

    @property
    def intercept(self) -> float:
        return self.coefficients[0]

    @property
    def rate(self) -> float:
        """Slope coefficient: distance per day."""
        return self.coefficients[1] if self.degree >= 1 else 0.0


def build_observations(
    reps: list[Representative],
    d: DistanceMatrix,
    reference_year: int,
    reference_date: date,
    include_reference: bool = True,
) -> list[RateObservation]:
    """One observation per representative: Kimura distance to the reference
    year against elapsed days; the reference appears as (0, 0)."""
    by_year = {rep.year: rep for rep in reps}
    if reference_year not in by_year:
        raise DataError(f"reference year {reference_year} has no representative")
    obs = []
    if include_reference:
        obs.append(
            RateObservation(
                label=by_year[reference_year].label,
                date=reference_date,
                elapsed_days=0,
                distance=0.0,
            )
        )
    for rep in reps:
        if rep.year == reference_year:
            continue
        elapsed = (rep.collection_date - reference_date).days
        if elapsed < 0:
            raise DataError(
                f"representative {rep.label} was collected before the reference date"
            )
        obs.append(
            RateObservation(
                label=rep.label,
                date=rep.collection_date,
                elapsed_days=elapsed,
                distance=d.get(str(reference_year), str(rep.year)),
            )
        )
    return sorted(obs, key=lambda o: o.elapsed_days)


def fit_polynomial(obs: list[RateObservation], degree: int = 1) -> RateFit:
    """Least-squares fit of distance against elapsed days (SVD-based)."""
    if degree < 0:
        raise DataError(f"degree must be non-negative, got {degree}")
    if len(obs) < degree + 1:
        raise DataError(
            f"{len(obs)} observation(s) cannot determine a degree-{degree} fit"
        )
    x = np.array([o.elapsed_days for o in obs], dtype=float)
    y = np.array([o.distance for o in obs], dtype=float)
    design = np.vander(x, degree + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ coeffs
    reference = obs[0].date - timedelta(days=obs[0].elapsed_days)
    return RateFit(
        degree=degree,
        coefficients=tuple(float(c) for c in coeffs),
        residuals=tuple(float(r) for r in residuals),
        rss=float(residuals @ residuals),
        n=len(obs),
        xs=tuple(float(v) for v in x),
        ys=tuple(float(v) for v in y),
        reference_date=reference,
    )


def confidence_band(fit: RateFit, obs: list[RateObservation], level: float = 0.95):
    """Pointwise mean-response interval at each observed x."""
    df = fit.n - (fit.degree + 1)
    if df <= 0:
        raise DataError("no residual degrees of freedom for a confidence band")
    x = np.array([o.elapsed_days for o in obs], dtype=float)
    design = np.vander(x, fit.degree + 1, increasing=True)
    fitted = design @ np.array(fit.coefficients)
    sigma2 = fit.rss / df
    gram_inv = np.linalg.pinv(design.T @ design)
    leverage = np.einsum("ij,jk,ik->i", design, gram_inv, design)
    se = np.sqrt(np.maximum(sigma2 * leverage, 0.0))
    t = stats.t.ppf(0.5 + level / 2.0, df)
    return [
        BandPoint(x=float(xi), fitted=float(fi), lower=float(fi - t * si), upper=float(fi + t * si))
        for xi, fi, si in zip(x, fitted, se)
    ]


def predict(fit: RateFit, when: date) -> tuple[float, bool]:
    """Polynomial value at a date; the flag marks extrapolation beyond the
    observed range."""
    if when < fit.reference_date:
        raise DataError(f"{when.isoformat()} is before the reference date")
    x = float((when - fit.reference_date).days)
    value = float(np.polyval(list(reversed(fit.coefficients)), x))
    return value, x > max(fit.xs)


# ---------------------------------------------------------------------------
# serialization


def observations_to_csv(obs: list[RateObservation]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "date", "elapsed_days", "distance"])
    for o in obs:
        writer.writerow([o.label, o.date.isoformat(), o.elapsed_days, f"{o.distance:.6f}"])
    return buf.getvalue()


def observations_from_csv(text: str) -> list[RateObservation]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["label", "date", "elapsed_days", "distance"]:
        raise DataError("unexpected observations CSV header")
    return [
        RateObservation(
            label=label,
            date=date.fromisoformat(iso),
            elapsed_days=int(days),
            distance=float(dist),
        )
        for label, iso, days, dist in rows[1:]
    ]


def fit_to_json(fit: RateFit) -> str:
    doc = {
        "degree": fit.degree,
        "coefficient_order": "ascending",
        "coefficients": list(fit.coefficients),
        "rate_per_day": fit.rate,
        "rate_per_year": fit.rate * DAYS_PER_YEAR,
        "intercept": fit.intercept,
        "rss": fit.rss,
        "n": fit.n,
        "reference_date": fit.reference_date.isoformat(),
        "units_note": (
            "x is days since the reference date; rate_per_year is the per-day "
            "slope scaled by 365.25"
        ),
    }
    if fit.ci95 is not None:
        doc["band_level"] = 0.95
        doc["band"] = [
            {"x": p.x, "fitted": p.fitted, "lower": p.lower, "upper": p.upper}
            for p in fit.ci95
        ]
    return json.dumps(doc, indent=2)
