"""Turning points, action integrals and WKB phases.

For energy E in the window, channel j has turning points alpha_j < beta_j
with V_j = E there.  The quantities computed here:

    A_j(E)   = integral_{alpha_j}^{beta_j} sqrt(E - V_j) dt
    A_j'(E)  = (1/2) integral (E - V_j)^(-1/2) dt        (same interval)
    S_{j,L}  = integral_{alpha_j}^{0} sqrt(E - V_j) dt
    S_{j,R}  = integral_{0}^{beta_j} sqrt(E - V_j) dt
    B(E)     = 2 S_{1,R}(E)
    phi_j(x) = integral_{0}^{x} sqrt(E - V_j) dt

Endpoint behavior is (E - V)^{1/2} or (E - V)^{-1/2}; substituting
t = alpha + s^2 (resp. t = beta - s^2) near each turning point makes every
integrand smooth, after which adaptive Gauss-Kronrod panels converge to
near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import MultipleRoots, NotSymmetric, NoWell, OutsideAllowedRegion
from .model import CrossingModel, truncation_half_width

TURNING_TOL = 1e-13
_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-13, limit=200)


@dataclass(frozen=True)
class TurningPoints:
    alpha: float
    beta: float


@dataclass(frozen=True)
class ActionSet:
    a1: float
    a2: float
    a1p: float
    a2p: float
    s1l: float
    s1r: float
    s2l: float
    s2r: float
    b: float | None          # None when the model is not flagged symmetric
    tp1: TurningPoints
    tp2: TurningPoints

    def as_dict(self):
        return {
            "a1": self.a1, "a2": self.a2, "a1p": self.a1p, "a2p": self.a2p,
            "s1l": self.s1l, "s1r": self.s1r, "s2l": self.s2l, "s2r": self.s2r,
            "b": self.b,
            "tp1": {"alpha": self.tp1.alpha, "beta": self.tp1.beta},
            "tp2": {"alpha": self.tp2.alpha, "beta": self.tp2.beta},
        }


def _channel(m: CrossingModel, j: int):
    if j == 1:
        return m.v1
    if j == 2:
        return m.v2
    raise ValueError(f"potential index must be 1 or 2, got {j}")


def _well_bottom_and_brackets(m: CrossingModel, j: int, E: float, n_scan: int = 4000):
    """Scan the truncated domain: well bottom plus brackets of V_j - E sign changes."""
    v = _channel(m, j)
    x_half = truncation_half_width(m)
    xs = np.linspace(-x_half, x_half, n_scan + 1)
    vals = np.asarray(v.value(xs)) - E
    cells = [i for i in range(n_scan) if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0]
    if len(cells) > 2:
        raise MultipleRoots(f"V{j} - E has {len(cells)} sign changes in the truncated domain")
    if len(cells) < 2:
        raise NoWell(f"V{j} - E has {len(cells)} sign changes; no well at E={E!r}")
    bottom = float(xs[int(np.argmin(vals))])
    return bottom, [(float(xs[i]), float(xs[i + 1])) for i in cells]


def turning_points(m: CrossingModel, j: int, E: float) -> TurningPoints:
    """Bracket the sign changes of V_j - E by outward scan, refine by Brent.

    Postcondition: |V_j(x) - E| <= 1e-13 * max(1, |E|) at both points, and
    V_j'(alpha) < 0 < V_j'(beta).
    """
    v = _channel(m, j)
    _, brackets = _well_bottom_and_brackets(m, j, E)
    roots = []
    for a, b in brackets:
        r = brentq(lambda x: float(v.value(x)) - E, a, b, xtol=1e-15, rtol=8.9e-16)
        # Brent leaves |f| at the rounding floor of V near the root; one guarded
        # Newton step mops up the residual when the slope allows it.
        f, fp = float(v.value(r)) - E, float(v.derivative(r))
        if abs(f) > TURNING_TOL * max(1.0, abs(E)) and fp != 0.0:
            r = r - f / fp
        roots.append(r)
    alpha, beta = sorted(roots)
    tol = TURNING_TOL * max(1.0, abs(E))
    if abs(float(v.value(alpha)) - E) > tol or abs(float(v.value(beta)) - E) > tol:
        raise NoWell(f"turning point refinement failed for j={j}, E={E!r}")
    if not (float(v.derivative(alpha)) < 0.0 < float(v.derivative(beta))):
        raise NoWell(f"turning points of V{j} at E={E!r} are not simple well boundaries")
    return TurningPoints(alpha=alpha, beta=beta)


def _sqrt_pos(y):
    # quadrature abscissae may graze the turning point from outside by rounding
    return math.sqrt(y) if y > 0.0 else 0.0


def _int_from_alpha(v, E, alpha, up, power: float) -> float:
    """integral_alpha^up (E-V)^power dt via t = alpha + s^2 (power in {1/2, -1/2})."""
    smax = math.sqrt(up - alpha)
    if power > 0.0:
        f = lambda s: 2.0 * s * _sqrt_pos(E - float(v.value(alpha + s * s)))
    else:
        def f(s):
            t = alpha + s * s
            y = E - float(v.value(t))
            if y <= 0.0:
                # removable endpoint: limit 2/sqrt(-V'(alpha))
                return 2.0 / math.sqrt(max(-float(v.derivative(alpha)), 1e-300))
            return 2.0 * s / math.sqrt(y)
    return quad(f, 0.0, smax, **_QUAD_OPTS)[0]


def _int_to_beta(v, E, lo, beta, power: float) -> float:
    """integral_lo^beta (E-V)^power dt via t = beta - s^2."""
    smax = math.sqrt(beta - lo)
    if power > 0.0:
        f = lambda s: 2.0 * s * _sqrt_pos(E - float(v.value(beta - s * s)))
    else:
        def f(s):
            t = beta - s * s
            y = E - float(v.value(t))
            if y <= 0.0:
                return 2.0 / math.sqrt(max(float(v.derivative(beta)), 1e-300))
            return 2.0 * s / math.sqrt(y)
    return quad(f, 0.0, smax, **_QUAD_OPTS)[0]


def action(m: CrossingModel, j: int, E: float) -> float:
    """A_j(E), absolute quadrature error target 1e-10."""
    v = _channel(m, j)
    bottom, _ = _well_bottom_and_brackets(m, j, E)
    tp = turning_points(m, j, E)
    mid = bottom if tp.alpha < bottom < tp.beta else 0.5 * (tp.alpha + tp.beta)
    return _int_from_alpha(v, E, tp.alpha, mid, 0.5) + _int_to_beta(v, E, mid, tp.beta, 0.5)


def action_derivative(m: CrossingModel, j: int, E: float) -> float:
    """dA_j/dE = (1/2) integral (E - V_j)^(-1/2), evaluated directly.

    The singular integral is computed on its own rather than by differencing
    action(); differencing would amplify quadrature noise.
    """
    v = _channel(m, j)
    bottom, _ = _well_bottom_and_brackets(m, j, E)
    tp = turning_points(m, j, E)
    mid = bottom if tp.alpha < bottom < tp.beta else 0.5 * (tp.alpha + tp.beta)
    return 0.5 * (_int_from_alpha(v, E, tp.alpha, mid, -0.5)
                  + _int_to_beta(v, E, mid, tp.beta, -0.5))


def partial_actions(m: CrossingModel, j: int, E: float):
    """(S_{j,L}, S_{j,R}): the action split at x = 0."""
    v = _channel(m, j)
    tp = turning_points(m, j, E)
    if not (tp.alpha < 0.0 < tp.beta):
        raise NoWell(f"well of V{j} at E={E!r} does not straddle the crossing point")
    s_l = _int_from_alpha(v, E, tp.alpha, 0.0, 0.5)
    s_r = _int_to_beta(v, E, 0.0, tp.beta, 0.5)
    return s_l, s_r


def b_action(m: CrossingModel, E: float) -> float:
    """B(E) = 2 S_{1,R}(E); consistency-checked against A - (S_L - S_R)."""
    if not m.symmetric:
        raise NotSymmetric("B(E) enters only the symmetric splitting formula")
    s_l, s_r = partial_actions(m, 1, E)
    b = 2.0 * s_r
    a = action(m, 1, E)
    if abs(b - (a - s_l + s_r)) > 1e-10:
        raise RuntimeError(
            f"action additivity violated at E={E!r}: |2*S1R - (A - S1L + S1R)| = "
            f"{abs(b - (a - s_l + s_r)):.3e}"
        )
    return b


def phase(m: CrossingModel, j: int, E: float, x: float) -> float:
    """phi_j(x) = integral_0^x sqrt(E - V_j); phi_j(0) = 0 exactly."""
    v = _channel(m, j)
    tp = turning_points(m, j, E)
    tol = 1e-12 * max(1.0, abs(tp.alpha), abs(tp.beta))
    if not (tp.alpha - tol <= x <= tp.beta + tol):
        raise OutsideAllowedRegion(
            f"x={x!r} outside [{tp.alpha!r}, {tp.beta!r}] for j={j}, E={E!r}"
        )
    if x == 0.0:
        return 0.0
    width = tp.beta - tp.alpha
    if x > 0.0:
        if x < tp.beta - 0.05 * width:
            return quad(lambda t: _sqrt_pos(E - float(v.value(t))), 0.0, x, **_QUAD_OPTS)[0]
        # near the turning point, integrate the tail with the smooth substitution
        s_r = _int_to_beta(v, E, 0.0, tp.beta, 0.5)
        return s_r - _int_to_beta(v, E, min(x, tp.beta), tp.beta, 0.5)
    if x > tp.alpha + 0.05 * width:
        return -quad(lambda t: _sqrt_pos(E - float(v.value(t))), x, 0.0, **_QUAD_OPTS)[0]
    s_l = _int_from_alpha(v, E, tp.alpha, 0.0, 0.5)
    return -(s_l - _int_from_alpha(v, E, tp.alpha, max(x, tp.alpha), 0.5))


def action_set(m: CrossingModel, E: float) -> ActionSet:
    """All action quantities at one energy (CLI payload)."""
    tp1 = turning_points(m, 1, E)
    tp2 = turning_points(m, 2, E)
    s1l, s1r = partial_actions(m, 1, E)
    s2l, s2r = partial_actions(m, 2, E)
    return ActionSet(
        a1=action(m, 1, E), a2=action(m, 2, E),
        a1p=action_derivative(m, 1, E), a2p=action_derivative(m, 2, E),
        s1l=s1l, s1r=s1r, s2l=s2l, s2r=s2r,
        b=2.0 * s1r if m.symmetric else None,
        tp1=tp1, tp2=tp2,
    )
