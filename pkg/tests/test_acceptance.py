"""Acceptance suite: one test per criterion, each printing a pass line.

Window configurations are pinned here.  The h-sweep uses E0 = 0.802,
C0 = 6.5: the window stays inside (0.5, 1.5) for every swept h, every
Bohr-Sommerfeld root keeps a safe margin to the window edges, and the
filtered record set is phase-balanced enough for the raw log-log slope to
reflect the bare 3/2 exponent for both coupling regimes.  Cross-oracle runs
at h in {0.1, 0.05, 0.02} use E0 = 1.0, C0 = 1.25.
"""

import math
import time

import numpy as np
import pytest

from levelcross import (actions, grid_eig, harness, monodromy, predict,
                        shooting)
from levelcross.model import reference_model
from levelcross.monodromy import kappa_leading, schrodinger_crossing_data
from test_monodromy import _random_crossing

SWEEP_E0, SWEEP_C0 = 0.802, 6.5
SWEEP_H = [0.04, 0.028, 0.02, 0.014, 0.01]
CROSS_E0, CROSS_C0 = 1.0, 1.25
CROSS_H = [0.1, 0.05, 0.02]
SHOOT_TOL = harness.SHOOT_TOL


def _report(num, ok, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def sweep_r0():
    m = reference_model(r0=1.0, r1=0.0)
    return harness.run_sweep({"model": m, "e0": SWEEP_E0, "c0": SWEEP_C0,
                              "h_values": SWEEP_H, "filter_d": 0.2})


@pytest.fixture(scope="module")
def sweep_r1():
    m = reference_model(r0=0.0, r1=1.0)
    return harness.run_sweep({"model": m, "e0": SWEEP_E0, "c0": SWEEP_C0,
                              "h_values": SWEEP_H, "filter_d": 0.2})


@pytest.fixture(scope="module")
def cross_r0():
    m = reference_model(r0=1.0, r1=0.0)
    return [harness._sweep_entry(m, CROSS_E0, CROSS_C0, h, 0.2) for h in CROSS_H]


@pytest.fixture(scope="module")
def cross_r1():
    m = reference_model(r0=0.0, r1=1.0)
    return [harness._sweep_entry(m, CROSS_E0, CROSS_C0, h, 0.2) for h in CROSS_H]


def test_criterion_1_closed_form_actions(ref):
    t0 = time.monotonic()
    worst_a = worst_ap = 0.0
    for e in np.linspace(0.55, 1.45, 20):
        e = float(e)
        worst_a = max(worst_a, abs(actions.action(ref, 1, e) - math.pi * (e + 1.0) / 2.0))
        worst_ap = max(worst_ap, abs(actions.action_derivative(ref, 1, e) - math.pi / 2.0))
    dt = time.monotonic() - t0
    _report(1, worst_a <= 1e-10 and worst_ap <= 1e-8 and dt < 1.0,
            f"|A - pi(E+1)/2| <= {worst_a:.2e}, |A' - pi/2| <= {worst_ap:.2e}, {dt:.2f}s")


def test_criterion_2_uncoupled_exactness(ref_uncoupled):
    t0 = time.monotonic()
    worst_grid = worst_shoot = 0.0
    ratios = []
    for h in (0.1, 0.05):
        lo, hi = CROSS_E0 - CROSS_C0 * h, CROSS_E0 + CROSS_C0 * h
        ks = [k for k in range(200) if lo < (2 * k + 1) * h - 1.0 < hi]
        exact = sorted([(2 * k + 1) * h - 1.0 for k in ks] * 2)
        g = grid_eig.Grid(x_half_width=5.0, n=4000)
        evs = grid_eig.eigen_window(grid_eig.assemble(ref_uncoupled, h, g), lo, hi)
        assert len(evs) == len(exact)
        errs = [abs(a - b) for a, b in zip(evs, exact)]
        worst_grid = max(worst_grid, max(errs))
        g2 = grid_eig.Grid(x_half_width=5.0, n=8000)
        evs2 = grid_eig.eigen_window(grid_eig.assemble(ref_uncoupled, h, g2), lo, hi)
        errs2 = [abs(a - b) for a, b in zip(evs2, exact)]
        ratios.extend(a / b for a, b in zip(errs, errs2))
        roots = shooting.shooting_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        assert len(roots) == len(exact)
        worst_shoot = max(worst_shoot, max(abs(a - b) for a, b in zip(roots, exact)))
    dt = time.monotonic() - t0
    ok = worst_grid <= 5e-4 and worst_shoot <= 1e-8 \
        and all(3.5 <= r <= 4.5 for r in ratios) and dt < 120.0
    _report(2, ok, f"grid err {worst_grid:.2e} (<=5e-4), shooting err "
                   f"{worst_shoot:.2e} (<=1e-8), ratios {min(ratios):.2f}-"
                   f"{max(ratios):.2f} in [3.5,4.5], {dt:.0f}s")


def _assert_cross_agreement(entries):
    details = []
    for entry in entries:
        assert not entry["errors"], entry["errors"]
        assert entry["oracles_agree"], entry["oracle_detail"]
        h = entry["h"]
        target = h ** 1.5 / 100.0
        assert entry["grid"]["converged"]
        assert max(entry["grid"]["error_estimates"]) <= target
        details.append(f"h={h}: max est {max(entry['grid']['error_estimates']):.1e}")
    return "; ".join(details)


def test_criterion_3_cross_oracle_agreement(cross_r0):
    t0 = time.monotonic()
    detail = _assert_cross_agreement(cross_r0)
    dt = time.monotonic() - t0
    _report(3, dt < 600.0, f"shooting and grid agree within combined tolerances ({detail}), {dt:.0f}s")


def _bijection_ratios(bundle):
    out = []
    for entry in bundle["per_h"]:
        if entry["excluded"]:
            continue
        match = entry["match_shooting"]
        assert not match["failed"]
        out.append((entry["h"], match["max_distance"] / entry["h"] ** 1.5))
    return out


def test_criterion_4_bijection(sweep_r0):
    ratios = _bijection_ratios(sweep_r0)
    assert len(ratios) == len(SWEEP_H)
    vals = [r for _, r in ratios]
    spread = max(vals) / min(vals)
    _report(4, spread <= 3.0,
            f"max|num - U_h|/h^1.5 in [{min(vals):.3f}, {max(vals):.3f}], "
            f"largest/smallest {spread:.2f} <= 3")


def test_criterion_5_splitting_exponent(sweep_r0):
    fit = sweep_r0["fit"]
    ok = fit is not None and 1.4 <= fit["slope"] <= 1.6
    _report(5, ok, f"log-log slope {fit['slope']:.3f} in [1.4, 1.6] "
                   f"({fit['n_points']} filtered records); corrected slope "
                   f"{fit['corrected_slope']:.3f}")


def _ratio_trend(bundle, h_max=0.02):
    per_h = []
    for entry in bundle["per_h"]:
        h = entry["h"]
        if h > h_max:
            continue
        devs = [abs(r["ratio"] - 1.0) for r in entry["splits_shooting"]
                if r["ratio"] is not None]
        assert devs, f"no filtered centers at h={h}"
        for r in entry["splits_shooting"]:
            if r["ratio"] is not None:
                assert 0.8 <= r["ratio"] <= 1.2, (h, r)
        per_h.append((h, max(devs)))
    per_h.sort(reverse=True)      # h descending
    inversions = sum(1 for (_, a), (_, b) in zip(per_h, per_h[1:]) if b > a)
    return per_h, inversions


def test_criterion_6_splitting_prefactor(sweep_r0):
    per_h, inversions = _ratio_trend(sweep_r0)
    # harness invariant: the same trend over the whole sweep, one inversion allowed
    full = []
    for entry in sweep_r0["per_h"]:
        devs = [abs(r["ratio"] - 1.0) for r in entry["splits_shooting"]
                if r["ratio"] is not None]
        if devs:
            full.append((entry["h"], max(devs)))
    full.sort(reverse=True)
    full_inv = sum(1 for (_, a), (_, b) in zip(full, full[1:]) if b > a)
    _report(6, inversions <= 1 and full_inv <= 1,
            "all filtered ratios in [0.8, 1.2]; |ratio-1| by h: "
            + ", ".join(f"{h}:{d:.4f}" for h, d in per_h)
            + f"; inversions {inversions} <= 1 (full sweep: {full_inv} <= 1)")


def test_criterion_7_degenerate_consistency(ref_uncoupled):
    worst = 0.0
    gaps = []
    for h in (0.1, 0.05):
        uh = [r.E for r in predict.bohr_sommerfeld_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)]
        mono = monodromy.monodromy_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        shoot = sorted(set_like(shooting.shooting_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)))
        assert len(uh) == len(mono) == len(shoot)
        for a, b, c in zip(uh, mono, shoot):
            worst = max(worst, abs(a - b), abs(b - c), abs(a - c))
        roots_all = shooting.shooting_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        uh_full = predict.bohr_sommerfeld_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        recs, fails = harness.measure_splittings(ref_uncoupled, roots_all, uh_full, h)
        assert not fails
        gaps.extend(r.measured_gap for r in recs)
    ok = worst <= 1e-8 and max(gaps) <= 1e-8
    _report(7, ok, f"pairwise coincidence {worst:.1e} <= 1e-8; "
                   f"degenerate gaps <= {max(gaps):.1e}")


def set_like(roots, tol=1e-9):
    out = []
    for r in sorted(roots):
        if not out or r - out[-1] > tol:
            out.append(r)
    return out


def test_criterion_8_microlocal_identities(ref, rng):
    worst_d = worst_k = worst_t = 0.0
    for _ in range(100):
        e = float(rng.uniform(0.55, 1.45))
        h = float(rng.uniform(0.005, 0.2))
        b = actions.b_action(ref, e)
        th = b / h + math.pi / 4.0
        direct = (math.pi / 4.0) * e ** -0.5 * math.sin(th) ** 2
        t0 = predict.tau0(ref, e).value
        ph = complex(math.cos(b / h), math.sin(b / h))
        via = 0.25 * abs(t0.conjugate() * ph + t0 / ph) ** 2
        worst_d = max(worst_d, abs(direct - via))
        worst_d = max(worst_d, abs(predict.splitting_amplitude(ref, e, h) - direct))
    for _ in range(1000):
        c = _random_crossing(rng)
        _, k12, k21, _ = kappa_leading(c)
        expect = 2.0 * math.pi * abs(c.r) ** 2 / c.dbrace
        worst_k = max(worst_k, abs(k12 * k21 - expect) / max(1.0, expect))
    for e in np.linspace(0.55, 1.45, 21):
        e = float(e)
        _, k12, _, _ = kappa_leading(schrodinger_crossing_data(ref, e))
        worst_t = max(worst_t, abs(abs(k12) - abs(predict.tau0(ref, e).value)))
    ok = worst_d <= 1e-12 and worst_k <= 1e-12 and worst_t <= 1e-12
    _report(8, ok, f"D dual-form {worst_d:.1e}, kappa product {worst_k:.1e}, "
                   f"|kappa12| vs |tau0| {worst_t:.1e} (all <= 1e-12)")


def test_criterion_9_wronskian_zero_structure(ref_uncoupled):
    min_mid = float("inf")
    counts_ok = True
    for h in (0.1, 0.05):
        uh = predict.bohr_sommerfeld_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        expected = sum(r.multiplicity for r in uh)
        roots = shooting.shooting_roots(ref_uncoupled, CROSS_E0, CROSS_C0, h)
        counts_ok = counts_ok and len(roots) == expected
        distinct = set_like(roots)
        for a, b in zip(distinct, distinct[1:]):
            mid = 0.5 * (a + b)
            min_mid = min(min_mid, abs(shooting.wronskian(ref_uncoupled, mid, h).value))
    ok = counts_ok and min_mid >= 1e-3
    _report(9, ok, f"root counts match cos*cos zero structure; "
                   f"min midpoint |W| {min_mid:.2e} >= 1e-3")


def test_criterion_10_r1_pathway(ref_r1, cross_r1, sweep_r1):
    # closed form of D for the r1 coupling
    worst_d = 0.0
    for e in np.linspace(0.55, 1.45, 11):
        e = float(e)
        for h in (0.05, 0.02):
            b = actions.b_action(ref_r1, e)
            direct = (math.pi / 4.0) * math.sqrt(e) * math.cos(b / h + math.pi / 4.0) ** 2
            worst_d = max(worst_d, abs(predict.splitting_amplitude(ref_r1, e, h) - direct))
    assert worst_d <= 1e-12

    detail3 = _assert_cross_agreement(cross_r1)

    ratios = _bijection_ratios(sweep_r1)
    vals = [r for _, r in ratios]
    spread = max(vals) / min(vals)
    assert spread <= 3.0

    fit = sweep_r1["fit"]
    assert fit is not None and 1.4 <= fit["slope"] <= 1.6

    per_h, inversions = _ratio_trend(sweep_r1)
    ok = inversions <= 1
    _report(10, ok, f"r1 pathway: D closed form {worst_d:.1e}; oracles agree "
                    f"({detail3}); bijection spread {spread:.2f}; slope "
                    f"{fit['slope']:.3f}; |ratio-1| trend "
                    + ", ".join(f"{h}:{d:.4f}" for h, d in per_h))
