"""Jitted numerical kernels: the coupled-system integrator and band inertia.

The ODE kernel advances one or more 4-component columns (u1, u1', u2, u2')
of the first-order rewrite of the coupled system with a Dormand-Prince 5(4)
embedded pair.  Columns are renormalized into [1e-100, 1e100] with the scale
factor tracked in log space, and, when requested, the second column of a
pair is Gram-Schmidt-reduced against the first after every accepted step.
Subtracting a multiple of one column from another and rescaling columns by
tracked positive factors both leave the matching-point determinant
reconstructible, while keeping the pair numerically independent despite the
e^(S/h) growth ratio between the channels under the barrier.

The band kernel computes the inertia (negative-pivot count) of A - sigma*I
for a symmetric band matrix in lower storage via an unpivoted LDL^T sweep.
"""

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_TRACE_OVERFLOW = 3

RENORM_HI = 1e100
RENORM_LO = 1e-100


@njit(cache=True, nogil=True)
def _polyval(c, x):
    acc = 0.0
    for i in range(len(c) - 1, -1, -1):
        acc = acc * x + c[i]
    return acc


@njit(cache=True, nogil=True)
def _rhs_into(y, x, E, h, p1, p2, q0, q1, q1d, out):
    # u1'' = ((V1-E) u1 + h r0 u2 + h^2 r1 u2') / h^2
    # u2'' = ((V2-E) u2 + h r0 u1 - h^2 r1' u1 - h^2 r1 u1') / h^2
    v1 = _polyval(p1, x)
    v2 = _polyval(p2, x)
    r0 = _polyval(q0, x)
    r1 = _polyval(q1, x)
    r1d = _polyval(q1d, x)
    h2 = h * h
    for c in range(y.shape[0]):
        u1 = y[c, 0]
        du1 = y[c, 1]
        u2 = y[c, 2]
        du2 = y[c, 3]
        out[c, 0] = du1
        out[c, 1] = ((v1 - E) * u1 + h * r0 * u2 + h2 * r1 * du2) / h2
        out[c, 2] = du2
        out[c, 3] = ((v2 - E) * u2 + h * r0 * u1 - h2 * r1d * u1 - h2 * r1 * du1) / h2


@njit(cache=True, nogil=True)
def integrate_columns(y, logs, x0, x1, E, h, p1, p2, q0, q1, q1d,
                      rtol, atol, first_step, reduce_pair,
                      trace_x, trace_y, trace_cap):
    """Advance columns y (ncols, 4) from x0 to x1 in place.

    Returns (status, n_trace).  logs accumulates per-column log rescaling.
    trace_cap = 0 disables recording of accepted steps.
    """
    ncols = y.shape[0]
    span = x1 - x0
    if span == 0.0:
        return STATUS_OK, 0
    direction = 1.0 if span > 0.0 else -1.0
    dx = direction * min(abs(first_step), abs(span))

    k1 = np.empty((ncols, 4))
    k2 = np.empty((ncols, 4))
    k3 = np.empty((ncols, 4))
    k4 = np.empty((ncols, 4))
    k5 = np.empty((ncols, 4))
    k6 = np.empty((ncols, 4))
    k7 = np.empty((ncols, 4))
    yt = np.empty((ncols, 4))
    ynew = np.empty((ncols, 4))

    x = x0
    n_trace = 0
    min_dx = 1e-14 * max(abs(span), 1.0)

    for _ in range(100_000_000):
        if direction * (x - x1) >= 0.0:
            return STATUS_OK, n_trace
        if direction * (x + dx - x1) > 0.0:
            dx = x1 - x
        if abs(dx) < min_dx:
            return STATUS_STEP_UNDERFLOW, n_trace

        _rhs_into(y, x, E, h, p1, p2, q0, q1, q1d, k1)

        for c in range(ncols):
            for i in range(4):
                yt[c, i] = y[c, i] + dx * 0.2 * k1[c, i]
        _rhs_into(yt, x + 0.2 * dx, E, h, p1, p2, q0, q1, q1d, k2)

        for c in range(ncols):
            for i in range(4):
                yt[c, i] = y[c, i] + dx * (3.0 / 40.0 * k1[c, i] + 9.0 / 40.0 * k2[c, i])
        _rhs_into(yt, x + 0.3 * dx, E, h, p1, p2, q0, q1, q1d, k3)

        for c in range(ncols):
            for i in range(4):
                yt[c, i] = y[c, i] + dx * (44.0 / 45.0 * k1[c, i]
                                           - 56.0 / 15.0 * k2[c, i]
                                           + 32.0 / 9.0 * k3[c, i])
        _rhs_into(yt, x + 0.8 * dx, E, h, p1, p2, q0, q1, q1d, k4)

        for c in range(ncols):
            for i in range(4):
                yt[c, i] = y[c, i] + dx * (19372.0 / 6561.0 * k1[c, i]
                                           - 25360.0 / 2187.0 * k2[c, i]
                                           + 64448.0 / 6561.0 * k3[c, i]
                                           - 212.0 / 729.0 * k4[c, i])
        _rhs_into(yt, x + 8.0 / 9.0 * dx, E, h, p1, p2, q0, q1, q1d, k5)

        for c in range(ncols):
            for i in range(4):
                yt[c, i] = y[c, i] + dx * (9017.0 / 3168.0 * k1[c, i]
                                           - 355.0 / 33.0 * k2[c, i]
                                           + 46732.0 / 5247.0 * k3[c, i]
                                           + 49.0 / 176.0 * k4[c, i]
                                           - 5103.0 / 18656.0 * k5[c, i])
        _rhs_into(yt, x + dx, E, h, p1, p2, q0, q1, q1d, k6)

        for c in range(ncols):
            for i in range(4):
                ynew[c, i] = y[c, i] + dx * (35.0 / 384.0 * k1[c, i]
                                             + 500.0 / 1113.0 * k3[c, i]
                                             + 125.0 / 192.0 * k4[c, i]
                                             - 2187.0 / 6784.0 * k5[c, i]
                                             + 11.0 / 84.0 * k6[c, i])
        _rhs_into(ynew, x + dx, E, h, p1, p2, q0, q1, q1d, k7)

        # embedded 4th-order error, scaled per component within each column
        err = 0.0
        for c in range(ncols):
            colmax = 0.0
            for i in range(4):
                a = abs(y[c, i])
                b = abs(ynew[c, i])
                if a > colmax:
                    colmax = a
                if b > colmax:
                    colmax = b
            for i in range(4):
                ei = dx * (71.0 / 57600.0 * k1[c, i]
                           - 71.0 / 16695.0 * k3[c, i]
                           + 71.0 / 1920.0 * k4[c, i]
                           - 17253.0 / 339200.0 * k5[c, i]
                           + 22.0 / 525.0 * k6[c, i]
                           - 1.0 / 40.0 * k7[c, i])
                sc = atol + rtol * (max(abs(y[c, i]), abs(ynew[c, i])) + 0.01 * colmax)
                r = ei / sc
                err += r * r
        err = math.sqrt(err / (4.0 * ncols))

        if err <= 1.0:
            x += dx
            for c in range(ncols):
                for i in range(4):
                    y[c, i] = ynew[c, i]

            if reduce_pair and ncols == 2:
                # keep the dominant column, orthogonalize the other against it
                n0 = 0.0
                n1 = 0.0
                for i in range(4):
                    n0 += y[0, i] * y[0, i]
                    n1 += y[1, i] * y[1, i]
                a = 0 if n0 >= n1 else 1
                b = 1 - a
                na = n0 if a == 0 else n1
                if na > 0.0:
                    dot = 0.0
                    for i in range(4):
                        dot += y[a, i] * y[b, i]
                    coef = dot / na
                    for i in range(4):
                        y[b, i] -= coef * y[a, i]

            for c in range(ncols):
                mx = 0.0
                for i in range(4):
                    if abs(y[c, i]) > mx:
                        mx = abs(y[c, i])
                if mx > RENORM_HI or (0.0 < mx < RENORM_LO):
                    for i in range(4):
                        y[c, i] /= mx
                    logs[c] += math.log(mx)

            if trace_cap > 0:
                if n_trace >= trace_cap:
                    return STATUS_TRACE_OVERFLOW, n_trace
                trace_x[n_trace] = x
                for c in range(ncols):
                    for i in range(4):
                        trace_y[n_trace, c, i] = y[c, i]
                n_trace += 1

            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            dx *= fac
        else:
            dx *= max(0.2, 0.9 * err ** -0.2)

    return STATUS_MAX_STEPS, n_trace


@njit(cache=True, nogil=True)
def band_inertia(bands, sigma):
    """Negative-pivot count of A - sigma*I by unpivoted band LDL^T.

    bands has lower storage: bands[k, i] = A[i + k, i], k = 0..hb.
    Returns (count, status); status != 0 flags a pivot too close to zero
    for the factorization to be trusted.
    """
    hb = bands.shape[0] - 1
    n = bands.shape[1]
    d = np.empty(n)
    w = np.zeros((hb, n))
    neg = 0
    for i in range(n):
        di = bands[0, i] - sigma
        kmin = i - hb if i - hb > 0 else 0
        for k in range(kmin, i):
            off = i - k
            di -= w[off - 1, k] * w[off - 1, k] * d[k]
        if abs(di) < 1e-280:
            return 0, 1
        d[i] = di
        if di < 0.0:
            neg += 1
        jmax = i + hb if i + hb < n - 1 else n - 1
        for j in range(i + 1, jmax + 1):
            acc = bands[j - i, i]
            kmin2 = j - hb if j - hb > 0 else 0
            for k in range(kmin2, i):
                acc -= w[j - k - 1, k] * w[i - k - 1, k] * d[k]
            w[j - i - 1, i] = acc / di
    return neg, 0
