"""Sweep orchestration: spectra matching, splitting measurement, scaling fits.

For each h in a geometric sweep this computes the Bohr-Sommerfeld set, the
predicted split pairs, shooting and grid spectra over the window, matches
the numerical spectra to the predictions, measures pair gaps, and fits the
gap-versus-h power law.  A per-h record is excluded from bijection
assertions when two Bohr-Sommerfeld roots from different wells approach
within 10 h^(3/2) without being merged as a multiplicity-2 root; such h
fall outside the admissible set the asymptotics are stated along, and the
exclusion is reported rather than silently asserted through.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import actions, grid_eig, predict, shooting
from ._fmt import dump_csv, dump_json
from .errors import InsufficientData, NotSymmetric
from .model import CrossingModel, model_from_dict

SHOOT_TOL = 1e-8          # conservative eigenvalue error of the ODE route


def pair_capture_radius(h: float) -> float:
    return 10.0 * h ** 1.5 + 10.0 * h * h


@dataclass
class MatchReport:
    h: float
    pairs: list               # (numerical E, matched root E, distance)
    max_distance: float
    n_numerical: int
    n_expected: int
    failed: bool
    unmatched: list

    def as_dict(self):
        return {
            "h": self.h,
            "pairs": [list(p) for p in self.pairs],
            "max_distance": self.max_distance,
            "n_numerical": self.n_numerical,
            "n_expected": self.n_expected,
            "failed": self.failed,
            "unmatched": list(self.unmatched),
        }


@dataclass
class SplitRecord:
    h: float
    center: float
    measured_gap: float
    predicted_gap: float
    d_value: float
    ratio: float | None       # None when d_value is below the filter threshold

    def as_dict(self):
        return {"h": self.h, "center": self.center, "measured_gap": self.measured_gap,
                "predicted_gap": self.predicted_gap, "d_value": self.d_value,
                "ratio": self.ratio}


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    n_points: int
    filter_threshold: float
    corrected_slope: float
    corrected_intercept: float
    corrected_residual: float

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept,
                "residual": self.residual, "n_points": self.n_points,
                "filter_threshold": self.filter_threshold,
                "corrected_slope": self.corrected_slope,
                "corrected_intercept": self.corrected_intercept,
                "corrected_residual": self.corrected_residual}


def expand_multiplicity(uh):
    out = []
    for r in uh:
        out.extend([r.E] * r.multiplicity)
    return sorted(out)


def match_spectra(numerical, uh, h: float) -> MatchReport:
    """Pair the sorted numerical spectrum with the multiplicity-expanded roots.

    For near-sorted lists the sorted elementwise pairing minimizes the
    maximum distance, so no assignment solver is needed.  Mismatched counts
    yield failed=True with the surplus energies named.
    """
    expected = expand_multiplicity(uh)
    nums = sorted(float(e) for e in numerical)
    if len(nums) == len(expected):
        pairs = [(a, b, abs(a - b)) for a, b in zip(nums, expected)]
        return MatchReport(
            h=h, pairs=pairs,
            max_distance=max((p[2] for p in pairs), default=0.0),
            n_numerical=len(nums), n_expected=len(expected),
            failed=False, unmatched=[],
        )
    longer, shorter = (nums, expected) if len(nums) > len(expected) else (expected, nums)
    dropped = []
    pool = list(longer)
    while len(pool) > len(shorter):
        worst = max(pool, key=lambda e: min((abs(e - s) for s in shorter), default=0.0))
        pool.remove(worst)
        dropped.append(worst)
    pairs = [(a, b, abs(a - b)) for a, b in zip(sorted(pool), shorter)] \
        if len(nums) > len(expected) else \
        [(a, b, abs(a - b)) for a, b in zip(shorter, sorted(pool))]
    return MatchReport(
        h=h, pairs=pairs,
        max_distance=max((p[2] for p in pairs), default=0.0),
        n_numerical=len(nums), n_expected=len(expected),
        failed=True, unmatched=sorted(dropped),
    )


def measure_splittings(m: CrossingModel, numerical, uh, h: float,
                       d_filter: float = 0.2):
    """Per-center pair gaps; returns (records, failures).

    Each multiplicity-2 center captures its two nearest numerical
    eigenvalues within 10 h^(3/2) + 10 h^2.  The ratio against the predicted
    width is reported only where D(e) clears d_filter times the coupling
    amplitude bound; near zeros of the leading term the remainder dominates
    and the ratio is not meaningful.
    """
    if not m.symmetric:
        raise NotSymmetric("splitting measurement needs the symmetric pairing")
    if any(r.multiplicity != 2 for r in uh):
        raise ValueError("every Bohr-Sommerfeld root must have multiplicity 2")
    nums = sorted(float(e) for e in numerical)
    radius = pair_capture_radius(h)
    records, failures = [], []
    for root in uh:
        e = root.E
        near = sorted((x for x in nums if abs(x - e) <= radius),
                      key=lambda x: abs(x - e))
        if len(near) < 2:
            failures.append({"center": e, "found": len(near)})
            continue
        a, b = sorted(near[:2])
        gap = b - a
        d = predict.splitting_amplitude(m, e, h)
        ap = actions.action_derivative(m, 1, e)
        predicted = 2.0 * math.sqrt(max(d, 0.0)) / ap * h ** 1.5
        bound = predict.splitting_amplitude_bound(m, e)
        ratio = gap / predicted if (d >= d_filter * bound and predicted > 0.0) else None
        records.append(SplitRecord(h=h, center=e, measured_gap=gap,
                                   predicted_gap=predicted, d_value=d, ratio=ratio))
    return records, failures


def fit_scaling(records, d_filter: float = 0.2) -> FitResult:
    """Least-squares log-log fit of gap versus h over the filtered records.

    Also fits log(gap / (2 sqrt(D)/A')) whose slope removes the oscillating
    prefactor and must recover the bare exponent.
    """
    filt = [r for r in records if r.ratio is not None and r.measured_gap > 0.0]
    if len(filt) < 4:
        raise InsufficientData(f"only {len(filt)} filtered records; need >= 4")
    hs = np.array([r.h for r in filt])
    if hs.max() / hs.min() < 4.0:
        raise InsufficientData("filtered records span less than a factor 4 in h")
    x = np.log(hs)
    y = np.log(np.array([r.measured_gap for r in filt]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    pref = np.array([r.predicted_gap / r.h ** 1.5 for r in filt])
    y2 = y - np.log(pref)
    c_slope, c_intercept = np.polyfit(x, y2, 1)
    c_resid = float(np.sqrt(np.mean((y2 - (c_slope * x + c_intercept)) ** 2)))
    return FitResult(slope=float(slope), intercept=float(intercept), residual=resid,
                     n_points=len(filt), filter_threshold=d_filter,
                     corrected_slope=float(c_slope),
                     corrected_intercept=float(c_intercept),
                     corrected_residual=c_resid)


def _excluded(uh, h: float) -> bool:
    singles = [r for r in uh if r.multiplicity == 1]
    for i, a in enumerate(singles):
        for b in singles[i + 1:]:
            if a.j != b.j and abs(a.E - b.E) < 10.0 * h ** 1.5:
                return True
    return False


def _sweep_entry(m, e0, c0, h, d_filter):
    """Per-h pipeline with failures recorded instead of raised."""
    try:
        return _sweep_one_h(m, e0, c0, h, d_filter)
    except Exception as exc:
        return {
            "h": h, "window": (e0 - c0 * h, e0 + c0 * h), "excluded": True,
            "uh": [], "predicted_pairs": [], "errors": [f"setup: {exc}"],
            "oracles_agree": False, "oracle_detail": [str(exc)],
        }


def _sweep_one_h(m: CrossingModel, e0: float, c0: float, h: float, d_filter: float):
    lo, hi = e0 - c0 * h, e0 + c0 * h
    uh = predict.bohr_sommerfeld_roots(m, e0, c0, h)
    preds = predict.predicted_pairs(m, e0, c0, h) if m.symmetric else []
    excluded = _excluded(uh, h)

    entry = {
        "h": h, "window": (lo, hi), "excluded": excluded,
        "uh": [r.as_dict() for r in uh],
        "predicted_pairs": [p.as_dict() for p in preds],
        "errors": [],
    }
    try:
        shoot = shooting.shooting_roots(m, e0, c0, h)
        entry["shooting_roots"] = list(shoot)
        entry["match_shooting"] = match_spectra(shoot, uh, h).as_dict()
    except Exception as exc:   # recorded, sweep continues
        shoot = None
        entry["errors"].append(f"shooting: {exc}")
    try:
        grid = grid_eig.converged_window(m, h, lo, hi, target_err=h ** 1.5 / 100.0)
        entry["grid"] = grid.as_dict()
        entry["match_grid"] = match_spectra(grid.eigenvalues, uh, h).as_dict()
    except Exception as exc:
        grid = None
        entry["errors"].append(f"grid: {exc}")

    if m.symmetric:
        if shoot is not None:
            rec, fails = measure_splittings(m, shoot, uh, h, d_filter)
            entry["splits_shooting"] = [r.as_dict() for r in rec]
            entry["split_failures_shooting"] = fails
        if grid is not None:
            rec, fails = measure_splittings(m, grid.eigenvalues, uh, h, d_filter)
            entry["splits_grid"] = [r.as_dict() for r in rec]
            entry["split_failures_grid"] = fails

    # oracle cross-check: sorted pairing within combined reported tolerances
    agree = True
    detail = []
    if shoot is not None and grid is not None:
        if len(shoot) != len(grid.eigenvalues):
            agree = False
            detail.append(f"count mismatch {len(shoot)} vs {len(grid.eigenvalues)}")
        else:
            for s, gv, ge in zip(sorted(shoot), grid.eigenvalues, grid.error_estimates):
                tol = ge + SHOOT_TOL
                if abs(s - gv) > tol:
                    agree = False
                    detail.append(f"|{s!r} - {gv!r}| > {tol!r}")
        if not grid.converged:
            detail.append("grid did not converge to target")
    else:
        agree = False
    entry["oracles_agree"] = agree
    entry["oracle_detail"] = detail
    return entry


def run_sweep(config: dict, workers: int = 1) -> dict:
    """Full experiment bundle over the configured h values.

    Writes sweep.csv, sweep.json and plot_gap_vs_h.csv into out_dir when the
    config names one.  Per-h failures are recorded in the bundle and the
    sweep continues; oracle disagreement anywhere sets the top-level flag.
    """
    m = config["model"] if isinstance(config["model"], CrossingModel) \
        else model_from_dict(config["model"])
    e0 = float(config["e0"])
    c0 = float(config["c0"])
    h_values = [float(h) for h in config["h_values"]]
    d_filter = float(config.get("filter_d", 0.2))
    out_dir = config.get("out_dir")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {h: pool.submit(_sweep_entry, m, e0, c0, h, d_filter)
                    for h in h_values}
            per_h = [futs[h].result() for h in sorted(h_values)]
    else:
        per_h = [_sweep_entry(m, e0, c0, h, d_filter) for h in sorted(h_values)]

    records = []
    for entry in per_h:
        for rd in entry.get("splits_shooting", []):
            records.append(SplitRecord(**rd))
    bundle = {
        "config": {
            "e0": e0, "c0": c0, "h_values": sorted(h_values),
            "filter_d": d_filter, "symmetric": m.symmetric,
        },
        "per_h": per_h,
        "oracle_disagreement": any(not e.get("oracles_agree", False) for e in per_h),
    }
    try:
        fit = fit_scaling(records, d_filter)
        bundle["fit"] = fit.as_dict()
    except InsufficientData as exc:
        fit = None
        bundle["fit"] = None
        bundle["fit_error"] = str(exc)

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        rows = []
        for entry in per_h:
            match = entry.get("match_shooting")
            maxd = None if match is None or match["failed"] else match["max_distance"]
            for rd in entry.get("splits_shooting", []):
                rows.append((entry["h"], rd["center"], rd["measured_gap"],
                             rd["predicted_gap"], rd["ratio"], rd["d_value"],
                             maxd, entry["excluded"]))
        rows.sort(key=lambda r: (r[0], r[1]))
        with open(os.path.join(out_dir, "sweep.csv"), "w") as f:
            f.write(dump_csv(
                ["h", "center", "measured_gap", "predicted_gap", "ratio",
                 "d_value", "max_bijection_distance", "excluded_flag"], rows))
        with open(os.path.join(out_dir, "sweep.json"), "w") as f:
            f.write(dump_json(bundle))
        plot_rows = []
        for r in sorted(records, key=lambda r: (r.h, r.center)):
            if r.ratio is None or r.measured_gap <= 0.0:
                continue
            lh = math.log10(r.h)
            lg = math.log10(r.measured_gap)
            fitted = None
            if fit is not None:
                fitted = (fit.slope * math.log(r.h) + fit.intercept) / math.log(10.0)
            plot_rows.append((lh, lg, fitted))
        with open(os.path.join(out_dir, "plot_gap_vs_h.csv"), "w") as f:
            f.write(dump_csv(["log10_h", "log10_measured_gap", "fit_log10_gap"],
                             plot_rows))
    return bundle
