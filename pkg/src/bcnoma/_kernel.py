"""Compiled primal-dual sub-gradient loop shared by both sub-problems.

The problem is given already rescaled (variables z, constraints divided by
their natural magnitude) in the generic form

    min  c.z
    s.t. r_j = (A0[j] + xi*A1[j]).z - (b0[j] + xi*b1[j]) >= 0   j = 0, 1
         l_k = d[k] - E[k].z >= 0                              k = 0, 1
         1 - xi >= 0,  0 <= z <= ub,  0 <= xi <= 1

Multipliers are ordered (rate0, rate1, lin0, lin1, xi_bound).

With ``rho > 0`` the primal step descends the augmented Lagrangian, i.e. each
multiplier is replaced by ``max(0, mult - rho*residual)`` in the z-gradient.
On these linear programs the plain Lagrangian has no curvature in z and the
iterates keep bouncing between vertices; the augmentation damps that.
"""

import math

import numpy as np
from numba import njit

SCHEDULE_CONSTANT = 0
SCHEDULE_INVERSE_SQRT = 1


@njit(cache=True)
def _residuals(A0, A1, b0, b1, E, d, z, xi, out):
    for j in range(2):
        acc = 0.0
        for k in range(2):
            acc += (A0[j, k] + xi * A1[j, k]) * z[k]
        out[j] = acc - (b0[j] + xi * b1[j])
    for j in range(2):
        out[2 + j] = d[j] - E[j, 0] * z[0] - E[j, 1] * z[1]
    out[4] = 1.0 - xi


@njit(cache=True)
def primal_dual(
    A0, A1, b0, b1, c, E, d, ub, z0, xi0, has_xi, xi_scale, mult0,
    step0, schedule, max_iters, tol_obj, tol_feas, patience, record, rho,
):
    z = z0.copy()
    xi = xi0
    mult = mult0.copy()
    if not has_xi:
        mult[4] = 0.0
    res = np.empty(5)
    eff = np.empty(5)
    grad = np.empty(2)
    trace = np.empty((max_iters if record else 0, 4))

    best_obj = np.inf
    best_z = z.copy()
    best_xi = xi
    prev_obj = np.nan
    calm = 0
    converged = False
    iters = 0
    for it in range(1, max_iters + 1):
        iters = it
        if schedule == SCHEDULE_INVERSE_SQRT:
            step = step0 / math.sqrt(it)
        else:
            step = step0

        # primal descent on the (augmented) Lagrangian
        if rho > 0.0:
            _residuals(A0, A1, b0, b1, E, d, z, xi, res)
            for j in range(5):
                eff[j] = max(mult[j] - rho * res[j], 0.0)
        else:
            for j in range(5):
                eff[j] = mult[j]
        for k in range(2):
            g = c[k]
            for j in range(2):
                g -= eff[j] * (A0[j, k] + xi * A1[j, k])
            for j in range(2):
                g += eff[2 + j] * E[j, k]
            grad[k] = g
        if has_xi:
            gxi = 0.0
            for j in range(2):
                gxi -= eff[j] * (A1[j, 0] * z[0] + A1[j, 1] * z[1] - b1[j])
            # xi_scale preconditions the rate terms only; the bound term stays unit
            gxi = xi_scale * gxi + eff[4]
            # the objective is nearly flat in xi: take sign steps (normalized sub-gradient)
            if gxi > 0.0:
                gxi = 1.0
            elif gxi < 0.0:
                gxi = -1.0
        for k in range(2):
            z[k] = min(max(z[k] - step * grad[k], 0.0), ub[k])
        if has_xi:
            xi = min(max(xi - step * gxi, 0.0), 1.0)

        # dual sub-gradient step, projected onto the non-negative orthant
        _residuals(A0, A1, b0, b1, E, d, z, xi, res)
        for j in range(5):
            if j == 4 and not has_xi:
                continue
            mult[j] = max(mult[j] - step * res[j], 0.0)

        obj = c[0] * z[0] + c[1] * z[1]
        viol = 0.0
        for j in range(5):
            if -res[j] > viol:
                viol = -res[j]
        if record:
            trace[it - 1, 0] = obj
            trace[it - 1, 1] = viol
            trace[it - 1, 2] = step
            trace[it - 1, 3] = xi
        if viol <= tol_feas and obj < best_obj:
            best_obj = obj
            best_z[:] = z
            best_xi = xi
        if it > 1 and abs(obj - prev_obj) <= tol_obj * max(abs(obj), 1e-300) and viol <= tol_feas:
            calm += 1
            if calm >= patience:
                converged = True
                prev_obj = obj
                break
        else:
            calm = 0
        prev_obj = obj
    return z, xi, mult, iters, converged, best_z, best_xi, best_obj, trace[:iters]
