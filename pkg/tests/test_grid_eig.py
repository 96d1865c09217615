import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from levelcross import grid_eig, shooting
from levelcross.errors import GridTooCoarse
from levelcross.grid_eig import BandedSymmetric, Grid, assemble, eigen_window
from levelcross.model import reference_model


def _dense_scalar_channel(m, h, g, channel):
    v = m.v1 if channel == 1 else m.v2
    xs = g.points
    lap = h * h / g.step**2
    diag = 2.0 * lap + np.asarray(v.value(xs), dtype=float)
    off = np.full(g.n - 1, -lap)
    return diag, off


def test_assemble_symmetric_and_blocks(ref, ref_uncoupled):
    g = Grid(x_half_width=4.0, n=700)
    a = assemble(ref, 0.1, g)
    dense = a.dense()
    np.testing.assert_array_equal(dense, dense.T)
    # uncoupled: strictly block structure, coupling bands vanish
    a0 = assemble(ref_uncoupled, 0.1, g)
    assert np.all(a0.bands[1] == 0.0) and np.all(a0.bands[3] == 0.0)


def test_assemble_coupling_adjoint_rows():
    # constant r1, r0 = 0: interior row sums of the A12 block vanish exactly
    m = reference_model(r0=0.0, r1=0.7)
    g = Grid(x_half_width=4.0, n=700)
    dense = assemble(m, 0.1, g).dense()
    a12 = dense[0::2, 1::2]
    sums = a12.sum(axis=1)
    assert np.all(sums[1:-1] == 0.0)
    np.testing.assert_array_equal(dense, dense.T)


def test_grid_too_coarse(ref):
    with pytest.raises(GridTooCoarse):
        assemble(ref, 0.01, Grid(x_half_width=4.0, n=500))
    with pytest.raises(ValueError):
        assemble(ref, 0.1, Grid(x_half_width=1.5, n=500))


def test_uncoupled_union_of_channels(ref_uncoupled):
    h, lo, hi = 0.1, 0.85, 1.15
    g = Grid(x_half_width=5.0, n=1500)
    mine = eigen_window(assemble(ref_uncoupled, h, g), lo, hi)
    expect = []
    for ch in (1, 2):
        diag, off = _dense_scalar_channel(ref_uncoupled, h, g, ch)
        vals = eigh_tridiagonal(diag, off, eigvals_only=True,
                                select="v", select_range=(lo, hi))
        expect.extend(vals.tolist())
    expect.sort()
    assert len(mine) == len(expect)
    assert max(abs(a - b) for a, b in zip(mine, expect)) <= 1e-12


def test_eigen_window_counts_and_partition(ref):
    h = 0.1
    g = Grid(x_half_width=4.0, n=1200)
    a = assemble(ref, h, g)
    lo, hi = 0.82, 1.18
    full = eigen_window(a, lo, hi)
    mid = 1.01
    left = eigen_window(a, lo, mid)
    right = eigen_window(a, mid, hi)
    assert len(full) == len(left) + len(right)
    merged = sorted(left + right)
    assert max(abs(x - y) for x, y in zip(full, merged)) <= 2e-12
    assert grid_eig._count_below(a, hi) - grid_eig._count_below(a, lo) == len(full)


def test_pivot_breakdown_retry():
    # diagonal matrix with sigma landing exactly on an eigenvalue
    bands = np.zeros((4, 6))
    bands[0] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    a = BandedSymmetric(dim=6, bands=bands)
    assert grid_eig._count_below(a, 2.0) in (1, 2)
    assert eigen_window(a, 0.5, 3.5) == pytest.approx([1.0, 2.0, 3.0], abs=1e-11)


def test_grid_criterion2_resolution(ref_uncoupled):
    # n = 4000, X = 5: all four eigenvalues within 5e-4 of (2k+1)h - 1
    h = 0.1
    exact = [0.9, 0.9, 1.1, 1.1]
    evs = eigen_window(assemble(ref_uncoupled, h, Grid(5.0, 4000)), 0.85, 1.15)
    assert len(evs) == 4
    errs_n = [abs(a - b) for a, b in zip(evs, exact)]
    assert max(errs_n) <= 5e-4
    evs2 = eigen_window(assemble(ref_uncoupled, h, Grid(5.0, 8000)), 0.85, 1.15)
    errs_2n = [abs(a - b) for a, b in zip(evs2, exact)]
    ratios = [a / b for a, b in zip(errs_n, errs_2n)]
    assert all(3.5 <= r <= 4.5 for r in ratios)


def test_converged_window_honest_estimates(ref_uncoupled):
    h = 0.1
    rep = grid_eig.converged_window(ref_uncoupled, h, 0.875, 1.125, target_err=1e-6)
    assert rep.converged
    assert max(rep.error_estimates) <= 1e-6
    exact = [0.9, 0.9, 1.1, 1.1]
    for ev, est, ex in zip(rep.eigenvalues, rep.error_estimates, exact):
        assert abs(ev - ex) <= max(est, 1e-8)
    assert len(rep.eigenvalues) == 4


def test_converged_window_matches_shooting(ref):
    h = 0.1
    lo, hi = 0.875, 1.125
    rep = grid_eig.converged_window(ref, h, lo, hi, target_err=h ** 1.5 / 100.0)
    roots = shooting.shooting_roots(ref, 1.0, 1.25, h)
    assert len(rep.eigenvalues) == len(roots)
    for g, ge, s in zip(rep.eigenvalues, rep.error_estimates, sorted(roots)):
        assert abs(g - s) <= ge + 1e-8


def test_resolution_cap_reports_best(ref_uncoupled):
    rep = grid_eig.converged_window(ref_uncoupled, 0.1, 0.875, 1.125,
                                    target_err=1e-14, n_cap=1600)
    assert not rep.converged
    assert rep.eigenvalues and rep.error_estimates
    assert "cap" in rep.notes
