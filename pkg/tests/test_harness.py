import json

import pytest

from levelcross import harness, predict
from levelcross.errors import InsufficientData
from levelcross.harness import SplitRecord, fit_scaling, match_spectra, measure_splittings
from levelcross.model import reference_model
from levelcross.predict import BsRoot


def _uh(centers, mult=2):
    return [BsRoot(j=1, k=i, E=e, multiplicity=mult) for i, e in enumerate(centers)]


def test_match_identity():
    uh = _uh([0.9, 1.1])
    numerical = [0.9, 0.9, 1.1, 1.1]
    rep = match_spectra(numerical, uh, 0.1)
    assert not rep.failed
    assert rep.max_distance == 0.0


def test_match_count_mismatch_names_unmatched():
    uh = _uh([0.9, 1.1])
    rep = match_spectra([0.9, 0.9, 1.1, 1.1, 1.3], uh, 0.1)
    assert rep.failed
    assert rep.unmatched == [1.3]
    assert rep.n_numerical == 5 and rep.n_expected == 4


def test_match_distances():
    uh = _uh([0.9, 1.1])
    rep = match_spectra([0.899, 0.901, 1.098, 1.102], uh, 0.1)
    assert not rep.failed
    assert abs(rep.max_distance - 0.002) <= 1e-15


def test_measure_splittings_round_trip(ref):
    h = 0.05
    pairs = predict.predicted_pairs(ref, 1.0, 1.25, h)
    uh = predict.bohr_sommerfeld_roots(ref, 1.0, 1.25, h)
    numerical = [e for p in pairs for e in p.pair]
    records, failures = measure_splittings(ref, numerical, uh, h)
    assert not failures
    for rec, p in zip(records, pairs):
        assert rec.measured_gap == pytest.approx(p.width, abs=1e-15)
        if rec.ratio is not None:
            assert rec.ratio == pytest.approx(1.0, abs=1e-12)


def test_measure_splittings_degenerate():
    m0 = reference_model(0.0, 0.0)
    h = 0.1
    uh = predict.bohr_sommerfeld_roots(m0, 1.0, 1.25, h)
    numerical = [0.9, 0.9 + 1e-11, 1.1, 1.1 + 1e-11]
    records, failures = measure_splittings(m0, numerical, uh, h)
    assert not failures
    assert all(r.measured_gap <= 1e-10 for r in records)
    assert all(r.ratio is None for r in records)    # D = 0 filtered


def test_measure_splittings_pair_not_found(ref):
    h = 0.05
    uh = predict.bohr_sommerfeld_roots(ref, 1.0, 1.25, h)
    records, failures = measure_splittings(ref, [uh[0].E], uh, h)
    assert failures and failures[0]["found"] == 1


def test_fit_scaling_exact_power_law():
    hs = [0.05 / (2 ** (k / 2)) for k in range(7)]
    records = [SplitRecord(h=h, center=1.0, measured_gap=0.37 * h ** 1.5,
                           predicted_gap=0.37 * h ** 1.5, d_value=1.0, ratio=1.0)
               for h in hs]
    fit = fit_scaling(records)
    assert abs(fit.slope - 1.5) <= 1e-6
    assert abs(fit.corrected_slope - 1.5) <= 1e-10
    assert fit.n_points == len(hs)


def test_fit_scaling_insufficient():
    records = [SplitRecord(h=h, center=1.0, measured_gap=h ** 1.5,
                           predicted_gap=h ** 1.5, d_value=1.0, ratio=1.0)
               for h in (0.05, 0.04, 0.03)]
    with pytest.raises(InsufficientData):
        fit_scaling(records)
    narrow = [SplitRecord(h=h, center=1.0, measured_gap=h ** 1.5,
                          predicted_gap=h ** 1.5, d_value=1.0, ratio=1.0)
              for h in (0.05, 0.045, 0.04, 0.035, 0.03)]
    with pytest.raises(InsufficientData):
        fit_scaling(narrow)


def test_excluded_rule():
    close = [BsRoot(j=1, k=0, E=0.9, multiplicity=1),
             BsRoot(j=2, k=0, E=0.9 + 5.0 * 0.04 ** 1.5, multiplicity=1)]
    assert harness._excluded(close, 0.04)
    assert not harness._excluded(_uh([0.9, 1.1]), 0.04)
    far = [BsRoot(j=1, k=0, E=0.9, multiplicity=1),
           BsRoot(j=2, k=0, E=1.1, multiplicity=1)]
    assert not harness._excluded(far, 0.04)


def test_run_sweep_uncoupled(tmp_path):
    m0 = reference_model(0.0, 0.0)
    config = {
        "model": m0, "e0": 1.0, "c0": 1.25,
        "h_values": [0.1, 0.08], "filter_d": 0.2,
        "out_dir": str(tmp_path / "out"),
    }
    bundle = harness.run_sweep(config)
    assert not bundle["oracle_disagreement"]
    for entry in bundle["per_h"]:
        assert not entry["errors"]
        assert not entry["match_shooting"]["failed"]
        assert not entry["match_grid"]["failed"]
        ests = entry["grid"]["error_estimates"]
        assert entry["match_grid"]["max_distance"] <= max(ests) + 1e-8
        for rec in entry["splits_shooting"]:
            assert rec["measured_gap"] <= 1e-8
    assert bundle["fit"] is None       # everything filtered out at D = 0

    out = tmp_path / "out"
    csv1 = (out / "sweep.csv").read_bytes()
    js1 = (out / "sweep.json").read_bytes()
    plot1 = (out / "plot_gap_vs_h.csv").read_bytes()
    bundle2 = harness.run_sweep(config)
    assert (out / "sweep.csv").read_bytes() == csv1
    assert (out / "sweep.json").read_bytes() == js1
    assert (out / "plot_gap_vs_h.csv").read_bytes() == plot1
    assert json.loads(js1.decode()) is not None     # valid JSON with 17g floats


def test_run_sweep_worker_count_invariance():
    m = reference_model(1.0, 0.0)
    config = {"model": m, "e0": 1.0, "c0": 1.25, "h_values": [0.1, 0.08]}
    b1 = harness.run_sweep(config, workers=1)
    b2 = harness.run_sweep(config, workers=2)
    r1 = [r for e in b1["per_h"] for r in e["splits_shooting"]]
    r2 = [r for e in b2["per_h"] for r in e["splits_shooting"]]
    assert r1 == r2


def test_run_sweep_records_per_h_failures():
    m = reference_model(1.0, 0.0)
    config = {"model": m, "e0": 1.45, "c0": 2.0, "h_values": [0.1]}
    bundle = harness.run_sweep(config)
    entry = bundle["per_h"][0]
    assert entry["errors"]
    assert bundle["oracle_disagreement"]
