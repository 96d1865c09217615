"""Semiclassical spectral predictions.

Bohr-Sommerfeld roots solve A_j(E) = (k + 1/2) pi h.  In the symmetric case
each root is doubly degenerate at leading order and splits into the pair

    E_-, E_+ = e -+ sqrt(D(e)) / A'(e) * h^(3/2)

where the splitting amplitude is

    D(E) = pi / (2 V1'(0)) * | r0(0) E^(-1/4) sin(B/h + pi/4)
                              + r1(0) E^(1/4) cos(B/h + pi/4) |^2

and, equivalently, D = (1/4) |conj(tau0) e^(iB/h) + tau0 e^(-iB/h)|^2 with
the crossing transition coefficient

    tau0 = e^(i pi/4) sqrt(pi / (V1'(0) - V2'(0)))
           * (r0(0) E^(-1/4) - i r1(0) E^(1/4)).

Both D forms are evaluated and must agree to 1e-12.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import actions
from .errors import NotSymmetric, WindowOutsideI0
from .model import CrossingModel

ROOT_TOL = 1e-13          # |A_j(E) - (k+1/2) pi h| at accepted roots
MERGE_TOL = 1e-10         # coincidence threshold for multiplicity-2 merging
D_FORM_TOL = 1e-12


@dataclass(frozen=True)
class BsRoot:
    j: int
    k: int
    E: float
    multiplicity: int

    def as_dict(self):
        return {"j": self.j, "k": self.k, "E": self.E, "mult": self.multiplicity}


@dataclass(frozen=True)
class Tau0:
    value: complex


@dataclass(frozen=True)
class SplittingPrediction:
    center: float
    d_value: float
    a_prime: float
    width: float
    pair: tuple

    def as_dict(self):
        return {"center": self.center, "D": self.d_value, "width": self.width,
                "Eminus": self.pair[0], "Eplus": self.pair[1]}


@dataclass(frozen=True)
class QuantizationResidual:
    value: float
    m0_evaluated: bool


def check_window(m: CrossingModel, e0: float, c0: float, h: float):
    lo, hi = e0 - c0 * h, e0 + c0 * h
    if not (m.e1 < lo and hi < m.e2):
        raise WindowOutsideI0(
            f"[{lo!r}, {hi!r}] not inside ({m.e1!r}, {m.e2!r})"
        )
    return lo, hi


def _invert_action(m, j, target, e_lo, e_hi, a_lo, a_hi):
    """Solve A_j(E) = target on [e_lo, e_hi] by bracketed Newton on A - target.

    A_j is strictly increasing, so the bracket never degenerates; Newton uses
    the singular-integral derivative and falls back to bisection whenever an
    iterate leaves the bracket.
    """
    lo, hi, f_lo, f_hi = e_lo, e_hi, a_lo - target, a_hi - target
    # allow roundoff-level protrusion when the target grazes a window edge
    if f_lo > 0.0 or f_hi < 0.0:
        pad = max(1e-12, 1e-9 * abs(target))
        lo, hi = e_lo - pad, e_hi + pad
        f_lo = actions.action(m, j, lo) - target
        f_hi = actions.action(m, j, hi) - target
    e = lo + (hi - lo) * (0.0 - f_lo) / (f_hi - f_lo)
    for _ in range(60):
        f = actions.action(m, j, e) - target
        if abs(f) <= ROOT_TOL:
            return e
        if f > 0.0:
            hi = e
        else:
            lo = e
        step = f / actions.action_derivative(m, j, e)
        e_next = e - step
        if not (lo < e_next < hi):
            e_next = 0.5 * (lo + hi)
        e = e_next
    raise RuntimeError(f"action inversion stalled for j={j}, target={target!r}")


def bohr_sommerfeld_roots(m: CrossingModel, e0: float, c0: float, h: float):
    """All roots of A_j(E) = (k+1/2) pi h for E in [e0 - c0*h, e0 + c0*h].

    Coincident roots across the two channels (|dE| <= 1e-10) merge into one
    entry of multiplicity 2; in the symmetric case that is every root.
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    lo, hi = check_window(m, e0, c0, h)
    per_channel = {}
    for j in (1, 2):
        a_lo = actions.action(m, j, lo)
        a_hi = actions.action(m, j, hi)
        ktol = 1e-9
        k_min = math.ceil(a_lo / (math.pi * h) - 0.5 - ktol)
        k_max = math.floor(a_hi / (math.pi * h) - 0.5 + ktol)
        roots = []
        for k in range(k_min, k_max + 1):
            target = (k + 0.5) * math.pi * h
            roots.append((k, _invert_action(m, j, target, lo, hi, a_lo, a_hi)))
        per_channel[j] = roots
    merged = [BsRoot(j=1, k=k, E=e, multiplicity=1) for k, e in per_channel[1]]
    for k, e in per_channel[2]:
        hit = None
        for i, r in enumerate(merged):
            if abs(r.E - e) <= MERGE_TOL:
                hit = i
                break
        if hit is None:
            merged.append(BsRoot(j=2, k=k, E=e, multiplicity=1))
        else:
            r = merged[hit]
            merged[hit] = BsRoot(j=r.j, k=r.k, E=r.E, multiplicity=2)
    return sorted(merged, key=lambda r: r.E)


def tau0(m: CrossingModel, E: float) -> Tau0:
    """Leading transition coefficient at the lower crossing point."""
    if not (m.e1 < E < m.e2):
        raise ValueError(f"E={E!r} outside the model window")
    dv = float(m.v1.derivative(0.0)) - float(m.v2.derivative(0.0))
    if dv <= 0.0:
        raise ValueError("requires V1'(0) - V2'(0) > 0")
    r0 = float(m.coupling.r0.value(0.0))
    r1 = float(m.coupling.r1.value(0.0))
    z = complex(r0 * E ** -0.25, -r1 * E ** 0.25)
    return Tau0(value=cmath.exp(1j * math.pi / 4.0) * math.sqrt(math.pi / dv) * z)


def splitting_amplitude(m: CrossingModel, E: float, h: float) -> float:
    """D(E); both closed forms evaluated, agreement asserted to 1e-12."""
    if not m.symmetric:
        raise NotSymmetric("splitting amplitude is defined for the symmetric case")
    b = actions.b_action(m, E)
    r0 = float(m.coupling.r0.value(0.0))
    r1 = float(m.coupling.r1.value(0.0))
    v1p = float(m.v1.derivative(0.0))
    th = b / h + math.pi / 4.0
    direct = (math.pi / (2.0 * v1p)) * (
        r0 * E ** -0.25 * math.sin(th) + r1 * E ** 0.25 * math.cos(th)
    ) ** 2
    t0 = tau0(m, E).value
    ph = cmath.exp(1j * b / h)
    via_tau = 0.25 * abs(t0.conjugate() * ph + t0 / ph) ** 2
    if abs(direct - via_tau) > D_FORM_TOL:
        raise RuntimeError(
            f"D(E) dual forms disagree at E={E!r}, h={h!r}: {direct!r} vs {via_tau!r}"
        )
    return direct


def splitting_amplitude_bound(m: CrossingModel, E: float) -> float:
    """Modulus bound max_theta D: pi/(2 V1'(0)) (|r0| E^-1/4 + |r1| E^1/4)^2."""
    r0 = float(m.coupling.r0.value(0.0))
    r1 = float(m.coupling.r1.value(0.0))
    v1p = float(m.v1.derivative(0.0))
    return (math.pi / (2.0 * v1p)) * (abs(r0) * E ** -0.25 + abs(r1) * E ** 0.25) ** 2


def predicted_pairs(m: CrossingModel, e0: float, c0: float, h: float):
    """One SplittingPrediction per Bohr-Sommerfeld root in the window."""
    if not m.symmetric:
        raise NotSymmetric("predicted pairs are defined for the symmetric case")
    preds = []
    for root in bohr_sommerfeld_roots(m, e0, c0, h):
        d = splitting_amplitude(m, root.E, h)
        ap = actions.action_derivative(m, 1, root.E)
        width = 2.0 * math.sqrt(max(d, 0.0)) / ap * h ** 1.5
        preds.append(SplittingPrediction(
            center=root.E, d_value=d, a_prime=ap, width=width,
            pair=(root.E - 0.5 * width, root.E + 0.5 * width),
        ))
    return preds


def quantization_residual(m: CrossingModel, E: float, h: float) -> QuantizationResidual:
    """cos(A1/h) cos(A2/h) - D(E) h in the symmetric case; cos*cos otherwise.

    For non-symmetric models the subleading term has no closed form here, so
    the residual is the product of cosines alone with m0_evaluated=False.
    """
    if not (m.e1 < E < m.e2):
        raise ValueError(f"E={E!r} outside the model window")
    c1 = math.cos(actions.action(m, 1, E) / h)
    c2 = math.cos(actions.action(m, 2, E) / h)
    if m.symmetric:
        return QuantizationResidual(value=c1 * c2 - splitting_amplitude(m, E, h) * h,
                                    m0_evaluated=True)
    return QuantizationResidual(value=c1 * c2, m0_evaluated=False)
