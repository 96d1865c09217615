"""Crossing transfer matrices, turning factors, and the global monodromy.

General transversal crossing (leading order): with symbol data
alpha = dx q1, beta = dxi q1, gamma = dx q2, delta = dxi q2 at the crossing
point, D = {q1, q2} = beta*gamma - alpha*delta > 0 and interaction value r,

    kappa11 = kappa22 = 1
    kappa12 = -e^(+i pi/4) r       sqrt(2 pi delta / (beta D))
    kappa21 = -e^(-i pi/4) conj(r) sqrt(2 pi beta / (delta D))

Schrodinger specialization (leading order, entries of the two crossing
matrices taken verbatim from the connection formulae):

    M- = [[1, tau0 sqrt(h)], [conj(tau0) sqrt(h), 1]]
         maps (t1L-, t2R-) to (t1R-, t2L-)
    M+ = [[1, -conj(tau0) sqrt(h)], [-tau0 sqrt(h), 1]]
         maps (t1R+, t2L+) to (t1L+, t2R+)

Turning factors T_{j,S} = i exp(-2i S_{j,S}/h) reflect a WKB coefficient at
the caustic.  The cycle condition is det(Lambda - I) = 0 with

    Lambda = diag(T1L, T2R^-1) M+ diag(T1R, T2L^-1) M-.

All O(h) diagonal and O(h^(3/2) log(1/h)) off-diagonal corrections are
dropped, so roots of the implemented condition carry an intrinsic O(h^(3/2))
error which the tests measure rather than assume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from . import actions, predict
from .errors import (AtCrossing, InvalidCrossingData, NoConvergence,
                     OutsideAllowedRegion, VanishingXiDerivative)
from .model import CrossingModel


@dataclass(frozen=True)
class CrossingData:
    """Derivatives of the two symbols and the interaction at a crossing point."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    dbrace: float
    r: complex

    def __post_init__(self):
        if not self.beta * self.delta > 0.0:
            raise InvalidCrossingData("requires dxi(q1) * dxi(q2) > 0")
        if not self.dbrace > 0.0:
            raise InvalidCrossingData("requires {q1, q2} > 0 at the crossing")
        if abs(self.dbrace - (self.beta * self.gamma - self.alpha * self.delta)) > 1e-12:
            raise InvalidCrossingData("dbrace inconsistent with beta*gamma - alpha*delta")
        if self.r == 0:
            raise InvalidCrossingData("interaction value must not vanish")


@dataclass(frozen=True)
class TransferData:
    m_minus: np.ndarray
    m_plus: np.ndarray
    t1l: complex
    t1r: complex
    t2l: complex
    t2r: complex
    lam: np.ndarray


@dataclass(frozen=True)
class WkbAmplitudes:
    a1: complex | None
    a2: complex | None
    b1: complex | None
    b2: complex | None
    phase: float


def kappa_leading(c: CrossingData):
    """Leading transfer coefficients (kappa11, kappa12, kappa21, kappa22)."""
    e_p = cmath.exp(1j * math.pi / 4.0)
    k12 = -e_p * c.r * math.sqrt(2.0 * math.pi * c.delta / (c.beta * c.dbrace))
    k21 = -e_p.conjugate() * complex(c.r).conjugate() \
        * math.sqrt(2.0 * math.pi * c.beta / (c.delta * c.dbrace))
    return (1.0 + 0.0j, k12, k21, 1.0 + 0.0j)


def schrodinger_crossing_data(m: CrossingModel, E: float) -> CrossingData:
    """Symbol data of q_j = xi^2 + V_j - E at the lower crossing (0, -sqrt(E))."""
    se = math.sqrt(E)
    v1p = float(m.v1.derivative(0.0))
    v2p = float(m.v2.derivative(0.0))
    return CrossingData(
        alpha=v1p, beta=-2.0 * se, gamma=v2p, delta=-2.0 * se,
        dbrace=2.0 * se * (v1p - v2p),
        r=complex(float(m.coupling.r0.value(0.0)), -float(m.coupling.r1.value(0.0)) * se),
    )


def crossing_matrices(m: CrossingModel, E: float, h: float):
    """(M-, M+) at leading order."""
    t0 = predict.tau0(m, E).value
    sh = math.sqrt(h)
    m_minus = np.array([[1.0, t0 * sh], [t0.conjugate() * sh, 1.0]], dtype=complex)
    m_plus = np.array([[1.0, -t0.conjugate() * sh], [-t0 * sh, 1.0]], dtype=complex)
    return m_minus, m_plus


def turning_factor(m: CrossingModel, j: int, side: str, E: float, h: float) -> complex:
    """T_{j,side} = i exp(-2i S_{j,side}/h); unimodular."""
    s_l, s_r = actions.partial_actions(m, j, E)
    s = s_l if side.upper() == "L" else s_r
    return 1j * cmath.exp(-2j * s / h)


def lambda_matrix(m: CrossingModel, E: float, h: float) -> TransferData:
    """Assemble Lambda = diag(T1L, 1/T2R) M+ diag(T1R, 1/T2L) M-."""
    m_minus, m_plus = crossing_matrices(m, E, h)
    s1l, s1r = actions.partial_actions(m, 1, E)
    s2l, s2r = actions.partial_actions(m, 2, E)
    t1l = 1j * cmath.exp(-2j * s1l / h)
    t1r = 1j * cmath.exp(-2j * s1r / h)
    t2l = 1j * cmath.exp(-2j * s2l / h)
    t2r = 1j * cmath.exp(-2j * s2r / h)
    lam = (np.diag([t1l, 1.0 / t2r]) @ m_plus @ np.diag([t1r, 1.0 / t2l]) @ m_minus)
    return TransferData(m_minus=m_minus, m_plus=m_plus,
                        t1l=t1l, t1r=t1r, t2l=t2l, t2r=t2r, lam=lam)


def lambda_leading_offdiag(m: CrossingModel, E: float, h: float):
    """(lambda12^0, lambda21^0): leading off-diagonal amplitudes of Lambda.

    lambda12^0 = -(tau0 e^(-2i A1/h) + conj(tau0) e^(2i (S2L - S1L)/h))
    lambda21^0 = -(conj(tau0) e^(2i A2/h) + tau0 e^(2i (S2R - S1R)/h))
    """
    t0 = predict.tau0(m, E).value
    s1l, s1r = actions.partial_actions(m, 1, E)
    s2l, s2r = actions.partial_actions(m, 2, E)
    a1, a2 = s1l + s1r, s2l + s2r
    l12 = -(t0 * cmath.exp(-2j * a1 / h) + t0.conjugate() * cmath.exp(2j * (s2l - s1l) / h))
    l21 = -(t0.conjugate() * cmath.exp(2j * a2 / h) + t0 * cmath.exp(2j * (s2r - s1r) / h))
    return l12, l21


def m0_leading(m: CrossingModel, E: float, h: float) -> complex:
    """General-case leading m0 = (1/4) e^(i(A1-A2)/h) lambda12 lambda21 h."""
    l12, l21 = lambda_leading_offdiag(m, E, h)
    a1 = actions.action(m, 1, E)
    a2 = actions.action(m, 2, E)
    return 0.25 * cmath.exp(1j * (a1 - a2) / h) * l12 * l21 * h


def _det_lambda_minus_id(m, E, h):
    lam = lambda_matrix(m, E, h).lam
    return (lam[0, 0] - 1.0) * (lam[1, 1] - 1.0) - lam[0, 1] * lam[1, 0]


def monodromy_roots(m: CrossingModel, e0: float, c0: float, h: float):
    """Real roots of det(Lambda(E;h) - I) in the window, leading order.

    Dense |g| scan at step h/20 locates candidate basins.  In the symmetric
    case each basin refines through the real reduced residual
    cos^2(A/h) = D(E) h, split as cos(A/h) = +-sqrt(D h) so plain bracketing
    resolves the near-degenerate pair; otherwise the |g| minimum itself is
    polished by bounded scalar minimization.
    """
    lo, hi = predict.check_window(m, e0, c0, h)
    n = max(int(math.ceil((hi - lo) / (h / 20.0))), 8)
    es = np.linspace(lo, hi, n + 1)
    g = np.array([abs(_det_lambda_minus_id(m, float(e), h)) for e in es])
    basins = [i for i in range(1, n) if g[i] <= g[i - 1] and g[i] <= g[i + 1]]

    roots = []
    if m.symmetric:
        for root in predict.bohr_sommerfeld_roots(m, e0, c0, h):
            e = root.E
            ap = actions.action_derivative(m, 1, e)
            delta = 0.45 * math.pi * h / ap
            for s in (-1.0, 1.0):
                f = lambda x: math.cos(actions.action(m, 1, x) / h) \
                    - s * math.sqrt(max(predict.splitting_amplitude(m, x, h), 0.0) * h)
                a, b = e - delta, e + delta
                fa, fb = f(a), f(b)
                if fa * fb > 0.0:
                    raise NoConvergence(
                        f"no sign change of the reduced residual around E={e!r}"
                    )
                roots.append(brentq(f, a, b, xtol=1e-14, rtol=8.9e-16))
    else:
        t0 = predict.tau0(m, e0).value
        accept = 1e-8 + 20.0 * h ** 1.5 * (1.0 + abs(t0) ** 2)
        for i in basins:
            res = minimize_scalar(
                lambda e: abs(_det_lambda_minus_id(m, float(e), h)),
                bounds=(float(es[i - 1]), float(es[i + 1])), method="bounded",
                options={"xatol": 1e-13},
            )
            if not res.success:
                raise NoConvergence(f"|det(Lambda - I)| minimization failed near {es[i]!r}")
            if res.fun <= accept:
                roots.append(float(res.x))

    roots.sort()
    out = []
    for e in roots:
        if not out or e - out[-1] > 1e-12:
            out.append(e)
    return out


def wkb_leading(m: CrossingModel, j: int, branch: int, E: float, x: float) -> WkbAmplitudes:
    """Leading WKB amplitudes for channel j, branch +-1, at position x.

    The requested channel's pair is always returned; the opposite channel's
    pair is populated only where that channel is classically allowed (its
    quarter-power weights are undefined otherwise).
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    tp = actions.turning_points(m, j, E)
    if not (tp.alpha < x < tp.beta):
        raise OutsideAllowedRegion(f"x={x!r} outside well {j} at E={E!r}")
    v1 = float(m.v1.value(x))
    v2 = float(m.v2.value(x))
    if abs(v1 - v2) < 1e-8:
        raise AtCrossing("leading amplitudes have a pole where V1 = V2")
    r0 = float(m.coupling.r0.value(x))
    r1 = float(m.coupling.r1.value(x))
    s = float(branch)

    a1 = a2 = b1 = b2 = None
    if E > v1:
        k1 = math.sqrt(E - v1)
        a1 = complex((E - v1) ** -0.25)
        a2 = complex(r0, -s * r1 * k1) / ((v1 - v2) * (E - v1) ** 0.25)
    if E > v2:
        k2 = math.sqrt(E - v2)
        b2 = complex((E - v2) ** -0.25)
        b1 = complex(r0, s * r1 * k2) / ((v2 - v1) * (E - v2) ** 0.25)
    if (j == 1 and a1 is None) or (j == 2 and b2 is None):
        raise OutsideAllowedRegion(f"channel {j} not allowed at x={x!r}")
    return WkbAmplitudes(a1=a1, a2=a2, b1=b1, b2=b2,
                         phase=actions.phase(m, j, E, x))


@dataclass(frozen=True)
class SymbolDerivatives:
    """Fiber derivatives of a symbol q(x, xi), each callable as f(x, xi)."""

    dxi: Callable
    dxi2: Callable
    dxdxi: Callable


@dataclass(frozen=True)
class PhaseFunction:
    """Phase with first and second derivative callables."""

    d1: Callable
    d2: Callable


def transport_amplitude(symbol: SymbolDerivatives, phi: PhaseFunction, x: float) -> float:
    """a_{q,0}(x) = exp(-int_0^x [dxdxi(q) + phi'' dxi2(q)] / (2 dxi(q)) dt).

    The fiber derivative dxi(q) is evaluated along (t, phi'(t)) and must not
    vanish on the path.
    """
    scale = max(abs(symbol.dxi(0.0, phi.d1(0.0))), 1.0)
    for t in np.linspace(0.0, x, 257):
        if abs(symbol.dxi(float(t), phi.d1(float(t)))) < 1e-6 * scale:
            raise VanishingXiDerivative(f"dxi(q) vanishes near t={float(t)!r}")

    def integrand(t):
        xi = phi.d1(t)
        return (symbol.dxdxi(t, xi) + phi.d2(t) * symbol.dxi2(t, xi)) \
            / (2.0 * symbol.dxi(t, xi))

    if x == 0.0:
        return 1.0
    val = quad(integrand, 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    return math.exp(-val)
