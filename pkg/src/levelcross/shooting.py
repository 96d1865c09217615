"""Exact eigenvalues by two-sided shooting on the coupled system.

The eigenvalue condition is the vanishing of the 4x4 Wronskian of four
solutions: two integrated from the left truncation point with each channel
seeded in its decaying WKB direction, two from the right.  The determinant
of values and derivatives at the matching point, column-normalized, changes
sign at simple eigenvalues and dips to zero at degenerate ones, so roots
are found by a window scan plus bracketed refinement, with a fine local
pass around each Bohr-Sommerfeld root where the split pair is below scan
resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import actions, predict
from ._kernels import (STATUS_OK, STATUS_STEP_UNDERFLOW, STATUS_TRACE_OVERFLOW,
                       integrate_columns)
from .errors import StepUnderflow, TruncationTooSmall
from .model import CrossingModel, admissible_half_width

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
ROOT_XTOL = 1e-12           # refinement bracket width
DOUBLE_ROOT_REL = 1e-3      # |W| at a parabolic minimum, relative to the local scale


@dataclass(frozen=True)
class StateVec:
    u1: float
    du1: float
    u2: float
    du2: float

    def as_array(self):
        return np.array([self.u1, self.du1, self.u2, self.du2])

    @staticmethod
    def from_array(a):
        return StateVec(u1=float(a[0]), du1=float(a[1]), u2=float(a[2]), du2=float(a[3]))


@dataclass(frozen=True)
class IntegrationResult:
    state: StateVec
    log_scale: float
    xs: np.ndarray | None = None
    states: np.ndarray | None = None


@dataclass(frozen=True)
class WronskianResult:
    value: float
    log_scale: float


def _coefficient_arrays(m: CrossingModel):
    p1 = np.ascontiguousarray(m.v1.as_polynomial(), dtype=np.float64)
    p2 = np.ascontiguousarray(m.v2.as_polynomial(), dtype=np.float64)
    q0 = np.ascontiguousarray(m.coupling.r0.as_polynomial(), dtype=np.float64)
    q1 = np.ascontiguousarray(m.coupling.r1.as_polynomial(), dtype=np.float64)
    if len(q1) > 1:
        q1d = np.ascontiguousarray(np.arange(1, len(q1)) * q1[1:], dtype=np.float64)
    else:
        q1d = np.zeros(1)
    return p1, p2, q0, q1, q1d


def rhs(m: CrossingModel, E: float, h: float, x: float, s: StateVec) -> StateVec:
    """First-order right-hand side of the coupled system at one point.

    hW u2 = h r0 u2 + h^2 r1 u2' and hW* u1 = h r0 u1 - h^2 r1' u1
    - h^2 r1 u1' (formal adjoint by integration by parts).
    """
    v1 = float(m.v1.value(x))
    v2 = float(m.v2.value(x))
    r0 = float(m.coupling.r0.value(x))
    r1 = float(m.coupling.r1.value(x))
    r1d = float(m.coupling.r1.derivative(x))
    h2 = h * h
    return StateVec(
        u1=s.du1,
        du1=((v1 - E) * s.u1 + h * r0 * s.u2 + h2 * r1 * s.du2) / h2,
        u2=s.du2,
        du2=((v2 - E) * s.u2 + h * r0 * s.u1 - h2 * r1d * s.u1 - h2 * r1 * s.du1) / h2,
    )


def decaying_init(m: CrossingModel, j: int, side: str, E: float, h: float,
                  X: float) -> StateVec:
    """State at x = -+X seeding channel j in its decaying WKB direction."""
    x0 = -X if side.upper() == "L" else X
    vj = m.v1 if j == 1 else m.v2
    barrier = float(vj.value(x0)) - E
    if barrier < 0.5:
        raise TruncationTooSmall(
            f"V{j}({x0!r}) - E = {barrier!r} < 0.5; enlarge the truncation"
        )
    slope = math.sqrt(barrier) / h
    du = slope if side.upper() == "L" else -slope
    if j == 1:
        return StateVec(u1=1.0, du1=du, u2=0.0, du2=0.0)
    return StateVec(u1=0.0, du1=0.0, u2=1.0, du2=du)


def integrate(m: CrossingModel, E: float, h: float, x_from: float, x_to: float,
              s: StateVec, rtol: float = ODE_RTOL, atol: float = ODE_ATOL,
              trace: bool = False) -> IntegrationResult:
    """Adaptive embedded RK 5(4) propagation of a single state column."""
    if x_from == x_to:
        raise ValueError("x_from and x_to must differ")
    p1, p2, q0, q1, q1d = _coefficient_arrays(m)
    y = s.as_array().reshape(1, 4).copy()
    logs = np.zeros(1)
    cap = 400_000 if trace else 0
    tx = np.empty(cap)
    ty = np.empty((cap, 1, 4))
    status, n = integrate_columns(
        y, logs, x_from, x_to, E, h, p1, p2, q0, q1, q1d,
        rtol, atol, h / 10.0, False, tx, ty, cap,
    )
    if status == STATUS_STEP_UNDERFLOW:
        raise StepUnderflow(f"step underflow integrating at E={E!r}")
    if status == STATUS_TRACE_OVERFLOW:
        raise RuntimeError("trace buffer exhausted")
    if status != STATUS_OK:
        raise RuntimeError(f"integration failed with status {status}")
    return IntegrationResult(
        state=StateVec.from_array(y[0]), log_scale=float(logs[0]),
        xs=tx[:n].copy() if trace else None,
        states=ty[:n, 0, :].copy() if trace else None,
    )


def _shoot_side(m, E, h, X, match_x, side, p1, p2, q0, q1, q1d,
                rtol=ODE_RTOL, atol=ODE_ATOL):
    """Integrate the channel-1 and channel-2 seeded columns from one side.

    The pair is Gram-Schmidt-reduced along the way: the two columns span the
    decaying solution plane, and only the span enters the determinant.
    """
    y = np.empty((2, 4))
    y[0] = decaying_init(m, 1, side, E, h, X).as_array()
    y[1] = decaying_init(m, 2, side, E, h, X).as_array()
    logs = np.zeros(2)
    x0 = -X if side == "L" else X
    status, _ = integrate_columns(
        y, logs, x0, match_x, E, h, p1, p2, q0, q1, q1d,
        rtol, atol, h / 10.0, True, np.empty(0), np.empty((0, 2, 4)), 0,
    )
    if status == STATUS_STEP_UNDERFLOW:
        raise StepUnderflow(f"step underflow shooting from {side} at E={E!r}")
    if status != STATUS_OK:
        raise RuntimeError(f"shooting failed with status {status}")
    return y, logs


def wronskian(m: CrossingModel, E: float, h: float, X: float | None = None,
              match_x: float = 0.0, rtol: float = ODE_RTOL,
              atol: float = ODE_ATOL) -> WronskianResult:
    """Column-normalized 4x4 Wronskian at the matching point.

    Rows are (u1, u2, u1', u2'); columns are the four decaying solutions.
    The normalized value is independent of the tracked rescalings and, up to
    solver tolerance, of the matching point.
    """
    if X is None:
        X = admissible_half_width(m, h)
    p1, p2, q0, q1, q1d = _coefficient_arrays(m)
    yl, logs_l = _shoot_side(m, E, h, X, match_x, "L", p1, p2, q0, q1, q1d, rtol, atol)
    yr, logs_r = _shoot_side(m, E, h, X, match_x, "R", p1, p2, q0, q1, q1d, rtol, atol)

    cols = np.empty((4, 4))
    for idx, col in enumerate((yl[0], yl[1], yr[0], yr[1])):
        cols[:, idx] = (col[0], col[2], col[1], col[3])   # (u1, u2, u1', u2')
    log_scale = float(logs_l.sum() + logs_r.sum())
    norms = np.linalg.norm(cols, axis=0)
    if np.any(norms == 0.0):
        return WronskianResult(value=0.0, log_scale=log_scale)
    log_scale += float(np.sum(np.log(norms)))
    return WronskianResult(value=float(np.linalg.det(cols / norms)),
                           log_scale=log_scale)


def _scan_sign_roots(w_of, es, ws):
    roots = []
    for i in range(len(es) - 1):
        if ws[i] == 0.0:
            roots.append(float(es[i]))
        elif ws[i] * ws[i + 1] < 0.0:
            roots.append(brentq(w_of, float(es[i]), float(es[i + 1]),
                                xtol=ROOT_XTOL, rtol=8.9e-16))
    if ws[-1] == 0.0:
        roots.append(float(es[-1]))
    return roots


def shooting_roots(m: CrossingModel, e0: float, c0: float, h: float,
                   X: float | None = None):
    """Eigenvalues in [e0 - c0 h, e0 + c0 h] from the Wronskian zero set.

    Window scan at step h/40 with bracketed refinement; each Bohr-Sommerfeld
    root then gets a fine pass at step h^(3/2)/50 when the scan found fewer
    roots nearby than the predicted multiplicity, falling back to a 3-point
    parabolic minimum to resolve a degenerate (double) root.
    """
    if X is None:
        X = admissible_half_width(m, h)
    lo, hi = predict.check_window(m, e0, c0, h)
    w_of = lambda e: wronskian(m, e, h, X).value
    uh = predict.bohr_sommerfeld_roots(m, e0, c0, h)

    n = max(int(math.ceil((hi - lo) / (h / 40.0))), 8)
    es = np.linspace(lo, hi, n + 1)
    ws = np.array([w_of(float(e)) for e in es])
    found = _scan_sign_roots(w_of, es, ws)

    doubles = []
    fine = h ** 1.5 / 50.0
    for root in uh:
        e = root.E
        if m.symmetric and root.multiplicity == 2:
            d = predict.splitting_amplitude(m, e, h)
            width = 2.0 * math.sqrt(max(d, 0.0)) / actions.action_derivative(m, 1, e) * h ** 1.5
        else:
            width = 0.0
        radius = max(3.0 * width, 2.0 * h ** (7.0 / 6.0), 8.0 * fine)
        # never reach into a neighboring root's basin
        other = [abs(r.E - e) for r in uh if r.E != e]
        if other:
            radius = min(radius, 0.45 * min(other))
        a = max(lo, e - radius)
        b = min(hi, e + radius)
        near = [r for r in found if a <= r <= b]
        if len(near) >= root.multiplicity:
            continue
        k = max(int(math.ceil((b - a) / fine)), 16)
        efs = np.linspace(a, b, k + 1)
        wfs = np.array([w_of(float(x)) for x in efs])
        for r in _scan_sign_roots(w_of, efs, wfs):
            if all(abs(r - p) > 5e-11 for p in found):
                found.append(r)
        near = [r for r in found if a <= r <= b]
        if len(near) >= root.multiplicity:
            continue
        # no sign change: treat the deepest local parabolic minimum as a double
        # root.  The vertex is re-fit at shrinking steps: each level removes
        # the O(step^2) cubic bias while the sample values stay far enough
        # above the fp noise floor of the determinant to stay conditioned.
        i = int(np.argmin(np.abs(wfs)))
        e_star = float(efs[i])
        step = float(efs[1] - efs[0])
        for dlt in (step, step / 10.0, step / 100.0):
            f0, f1, f2 = abs(w_of(e_star - dlt)), abs(w_of(e_star)), abs(w_of(e_star + dlt))
            denom = f0 - 2.0 * f1 + f2
            if denom > 0.0:
                shift = 0.5 * dlt * (f0 - f2) / denom
                e_star += max(-dlt, min(dlt, shift))
        w_star = abs(w_of(e_star))
        local_scale = float(np.max(np.abs(wfs)))
        if w_star <= DOUBLE_ROOT_REL * local_scale + 1e-10:
            if all(abs(e_star - p) > 5e-11 for p in found + doubles):
                doubles.append(e_star)

    return sorted(found + doubles * 2)
