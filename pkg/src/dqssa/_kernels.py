"""Compiled numerical kernels.

Everything in here works on plain float64 arrays so numba can compile it.
Rate constants travel as a length-15 vector in the order given by
``PARAM_NAMES``; the public wrappers in :mod:`dqssa.model`,
:mod:`dqssa.delays` and :mod:`dqssa.integrator` convert to and from the
dataclass types.
"""

import math

import numpy as np
from numba import njit

PARAM_NAMES = (
    "alpha_A", "alpha_A_p", "alpha_R", "alpha_R_p", "beta_A", "beta_R",
    "gamma_A", "gamma_R", "gamma_C", "delta_A", "delta_R",
    "delta_MA", "delta_MR", "theta_A", "theta_R",
)

# parameter slots
AA, AAP, AR, ARP, BA, BR, GA, GR, GC, DA, DR, DMA, DMR, THA, THR = range(15)

# history channels
H_ATAU, H_AS, H_R, H_C = range(4)
N_CHANNELS = 4

# delay variants
DERIVED, SIMPLIFIED, CONSTANT = 0, 1, 2

# solver status codes
OK, NONCONVERGENCE, NONFINITE, EXTRAPOLATION = 0, 1, 2, 3

_jit = njit(cache=True, nogil=True)


# ---------------------------------------------------------------------------
# model

@_jit
def full_rhs(y, k):
    DA_, DAp, DR_, DRp, MA, MR, A, R, C = y
    out = np.empty(9)
    act_A = k[THA] * DAp - k[GA] * DA_ * A
    act_R = k[THR] * DRp - k[GR] * DR_ * A
    out[0] = act_A
    out[1] = -act_A
    out[2] = act_R
    out[3] = -act_R
    out[4] = k[AAP] * DAp + k[AA] * DA_ - k[DMA] * MA
    out[5] = k[ARP] * DRp + k[AR] * DR_ - k[DMR] * MR
    out[6] = (k[BA] * MA + k[THA] * DAp + k[THR] * DRp
              - A * (k[GA] * DA_ + k[GR] * DR_ + k[GC] * R + k[DA]))
    out[7] = k[BR] * MR - k[GC] * A * R + k[DA] * C - k[DR] * R
    out[8] = k[GC] * A * R - k[DA] * C
    return out


@_jit
def steady_DA(A, k):
    return k[THA] / (k[THA] + k[GA] * A)


@_jit
def steady_DR(A, k):
    return k[THR] / (k[THR] + k[GR] * A)


@_jit
def steady_MA(A, k):
    return (k[AAP] / k[DMA]
            + k[THA] * (k[AA] - k[AAP]) / (k[DMA] * (k[THA] + k[GA] * A)))


@_jit
def steady_MR(A, k):
    return (k[ARP] / k[DMR]
            + k[THR] * (k[AR] - k[ARP]) / (k[DMR] * (k[THR] + k[GR] * A)))


@_jit
def a_tilde_s(R, k):
    rho = k[BA] / (k[DMA] * (k[GC] * R + k[DA]))
    kd = k[THA] / k[GA]
    b = k[AAP] * rho - kd
    return 0.5 * b + 0.5 * math.sqrt(b * b + 4.0 * k[AA] * rho * kd)


@_jit
def reduced_rhs(y, k):
    R = y[0]
    C = y[1]
    A = a_tilde_s(R, k)
    out = np.empty(2)
    out[0] = k[BR] * steady_MR(A, k) - k[GC] * A * R + k[DA] * C - k[DR] * R
    out[1] = k[GC] * A * R - k[DA] * C
    return out


# ---------------------------------------------------------------------------
# history lookup

@_jit
def lookup(hist, n, prov, has_prov, pre0, c, s, dt):
    """Value of channel ``c`` at time ``s`` (grid origin at 0).

    ``hist[:, :n + 1]`` are committed samples.  When ``has_prov`` is set,
    ``prov`` holds the provisional values at grid point ``n + 1``.
    Returns NaN when ``s`` lies beyond the newest available sample.
    """
    if s <= 0.0:
        return pre0[c]
    x = s / dt
    i = int(math.floor(x))
    frac = x - i
    if i < n:
        return hist[c, i] + frac * (hist[c, i + 1] - hist[c, i])
    if i == n:
        if frac <= 1e-12:
            return hist[c, n]
        if not has_prov:
            return np.nan
        return hist[c, n] + frac * (prov[c] - hist[c, n])
    # round-off just past the provisional point
    if has_prov and i == n + 1 and frac <= 1e-9:
        return prov[c]
    return np.nan


# ---------------------------------------------------------------------------
# delayed quasi-steady state chain

@_jit
def delays(variant, R_now, DA_tau, DR_tau, k):
    out = np.empty(5)
    if variant == DERIVED:
        at = a_tilde_s(R_now, k)
        out[0] = 1.0 / (k[THA] + k[GA] * at)
        out[1] = 1.0 / (k[THR] + k[GR] * at)
    else:
        out[0] = 1.0 / k[THA]
        out[1] = 1.0 / k[THR]
    out[2] = 1.0 / k[DMA]
    out[3] = 1.0 / k[DMR]
    if variant == DERIVED:
        out[4] = 1.0 / (k[GA] * DA_tau + k[GR] * DR_tau + k[GC] * R_now + k[DA])
    elif variant == SIMPLIFIED:
        out[4] = 1.0 / (k[GC] * R_now + k[DA])
    else:
        out[4] = out[2]
    return out


@_jit
def delayed_aux(t, R_now, hist, n, prov, has_prov, pre0, dt, variant, k):
    """Returns (D_A_tau, D_R_tau, M_A_tau, M_R_tau, A_tau, A_s_now, tau_*5)."""
    out = np.empty(11)
    if variant == DERIVED:
        at = a_tilde_s(R_now, k)
        tau_DA = 1.0 / (k[THA] + k[GA] * at)
        tau_DR = 1.0 / (k[THR] + k[GR] * at)
    else:
        tau_DA = 1.0 / k[THA]
        tau_DR = 1.0 / k[THR]
    tau_MA = 1.0 / k[DMA]
    tau_MR = 1.0 / k[DMR]

    DA_tau = steady_DA(lookup(hist, n, prov, has_prov, pre0, H_ATAU, t - tau_DA, dt), k)
    DR_tau = steady_DR(lookup(hist, n, prov, has_prov, pre0, H_ATAU, t - tau_DR, dt), k)
    MA_tau = steady_MA(lookup(hist, n, prov, has_prov, pre0, H_ATAU, t - tau_MA, dt), k)
    MR_tau = steady_MR(lookup(hist, n, prov, has_prov, pre0, H_ATAU, t - tau_MR, dt), k)

    if variant == DERIVED:
        tau_A = 1.0 / (k[GA] * DA_tau + k[GR] * DR_tau + k[GC] * R_now + k[DA])
    elif variant == SIMPLIFIED:
        tau_A = 1.0 / (k[GC] * R_now + k[DA])
    else:
        tau_A = tau_MA
    if t <= 0.0:
        # before the start A_tau is part of the constant initial extension
        A_tau = pre0[H_ATAU]
    else:
        A_tau = lookup(hist, n, prov, has_prov, pre0, H_AS, t - tau_A, dt)

    A_s = ((k[BA] * MA_tau + k[THA] * (1.0 - DA_tau) + k[THR] * (1.0 - DR_tau))
           / (k[GA] * DA_tau + k[GR] * DR_tau + k[GC] * R_now + k[DA]))

    out[0] = DA_tau
    out[1] = DR_tau
    out[2] = MA_tau
    out[3] = MR_tau
    out[4] = A_tau
    out[5] = A_s
    out[6] = tau_DA
    out[7] = tau_DR
    out[8] = tau_MA
    out[9] = tau_MR
    out[10] = tau_A
    return out


@_jit
def delayed_derivs(R, C, aux, k):
    MR_tau = aux[3]
    A_tau = aux[4]
    dR = k[BR] * MR_tau - k[GC] * A_tau * R + k[DA] * C - k[DR] * R
    dC = k[GC] * A_tau * R - k[DA] * C
    return dR, dC


# ---------------------------------------------------------------------------
# implicit Euler, ODE

def implicit_euler_loop(rhs, y0, k, dt, n_steps, tol, max_iters, stride):
    """Fixed-step backward Euler with damped finite-difference Newton.

    Runs uncompiled for arbitrary Python callables and compiled (see
    ``implicit_euler_jit``) for jitted right-hand sides.
    Returns (status, fail_time, fail_residual, output_samples).
    """
    m = y0.shape[0]
    n_out = n_steps // stride + 1
    out = np.empty((n_out, m))
    y = y0.copy()
    out[0, :] = y
    eye = np.eye(m)
    jac = np.empty((m, m))
    for step in range(n_steps):
        y_old = y.copy()
        z = y_old.copy()
        converged = False
        res = np.inf
        for _ in range(max_iters):
            f = rhs(z, k)
            F = z - y_old - dt * f
            res = np.max(np.abs(F))
            if not np.isfinite(res):
                return NONFINITE, (step + 1) * dt, res, out
            if res <= tol * (1.0 + np.max(np.abs(z))):
                converged = True
                break
            for j in range(m):
                h = 1.4901161193847656e-08 * (1.0 + abs(z[j]))
                zp = z.copy()
                zp[j] += h
                jac[:, j] = (rhs(zp, k) - f) / h
            delta = np.linalg.solve(eye - dt * jac, F)
            # backtrack while the full step increases the residual
            lam = 1.0
            for _ in range(30):
                z_try = z - lam * delta
                res_try = np.max(np.abs(z_try - y_old - dt * rhs(z_try, k)))
                if res_try < res:
                    break
                lam *= 0.5
            z = z_try
        if not converged:
            return NONCONVERGENCE, (step + 1) * dt, res, out
        y = z
        if (step + 1) % stride == 0:
            out[(step + 1) // stride, :] = y
    return OK, n_steps * dt, 0.0, out


implicit_euler_jit = njit(nogil=True)(implicit_euler_loop)


# ---------------------------------------------------------------------------
# implicit Euler, delay system (method of steps)

@_jit
def _provisional_map(x, t, R, hist, n, prov, pre0, dt, variant, k, tol, max_iters, aux):
    """A_tau at the new grid point given the provisional guess ``x`` for it.

    The provisional A_s value is relaxed to its fixed point along the way
    (a contraction: it only feeds back through sub-step interpolation).
    """
    prov[H_ATAU] = x
    prov[H_R] = R
    for _ in range(max_iters):
        a = delayed_aux(t, R, hist, n, prov, True, pre0, dt, variant, k)
        change = abs(a[5] - prov[H_AS]) / (1.0 + abs(a[5]))
        prov[H_AS] = a[5]
        if a[10] >= dt or change <= tol:
            break
    for i in range(11):
        aux[i] = a[i]
    return aux[4]


@_jit
def _resolve_provisional(t, R, hist, n, prov, pre0, dt, variant, k, tol, max_iters, aux):
    """Makes (A_tau, A_s) at the new grid point self-consistent for given R.

    Plain fixed-point first; when it does not settle (the map can be much
    steeper than -1) fall back to Illinois regula falsi on
    g(x) = map(x) - x, which always has a sign change because the map is
    bounded.  Returns True on success, ``aux`` holds the auxiliaries.
    """
    x = prov[H_ATAU]
    for _ in range(4):
        fx = _provisional_map(x, t, R, hist, n, prov, pre0, dt, variant, k,
                              tol, max_iters, aux)
        # A_tau lookups stay on committed samples: no dependence on x
        if aux[6] >= dt and aux[7] >= dt:
            prov[H_ATAU] = fx
            return True
        if abs(fx - x) <= tol * (1.0 + abs(fx)):
            prov[H_ATAU] = fx
            return True
        x = fx

    g = _provisional_map(x, t, R, hist, n, prov, pre0, dt, variant, k,
                         tol, max_iters, aux) - x
    if g == 0.0:
        return True
    step = abs(g) + 1.0
    lo, g_lo, hi, g_hi = x, g, x, g
    for _ in range(200):
        if (g_lo > 0.0) != (g_hi > 0.0):
            break
        if g > 0.0:
            hi = hi + step
            g_hi = _provisional_map(hi, t, R, hist, n, prov, pre0, dt, variant, k,
                                    tol, max_iters, aux) - hi
        else:
            lo = lo - step
            g_lo = _provisional_map(lo, t, R, hist, n, prov, pre0, dt, variant, k,
                                    tol, max_iters, aux) - lo
        step *= 2.0
    if (g_lo > 0.0) == (g_hi > 0.0):
        return False
    side = 0
    for _ in range(4 * max_iters):
        xm = (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
        gm = _provisional_map(xm, t, R, hist, n, prov, pre0, dt, variant, k,
                              tol, max_iters, aux) - xm
        if abs(gm) <= tol * (1.0 + abs(xm)) or hi - lo <= tol * (1.0 + abs(xm)):
            prov[H_ATAU] = aux[4]
            return True
        if (gm > 0.0) == (g_lo > 0.0):
            lo, g_lo = xm, gm
            if side == -1:
                g_hi *= 0.5
            side = -1
        else:
            hi, g_hi = xm, gm
            if side == 1:
                g_lo *= 0.5
            side = 1
    return False


@_jit
def _dde_residual(R, t, R_old, C_old, hist, n, pre0, dt, variant, k, tol, max_iters, prov, aux):
    """Implicit-Euler residual of the R equation at the new grid point.

    C is eliminated exactly (linear given A_tau).
    Returns (residual, C_new, inner_ok); ``aux`` receives the auxiliaries.
    """
    ok = _resolve_provisional(t, R, hist, n, prov, pre0, dt, variant, k, tol, max_iters, aux)
    C = (C_old + dt * k[GC] * aux[4] * R) / (1.0 + dt * k[DA])
    prov[H_C] = C
    dR, _ = delayed_derivs(R, C, aux, k)
    return R - R_old - dt * dR, C, ok


@_jit
def dde_run(variant, k, dt, n_steps, tol, max_iters, hist, pre0, aux_rec):
    """Integrates the delayed (R, C) system on the uniform grid.

    ``hist`` (4 x n_steps+1) must hold the t = 0 sample in column 0.
    Each step solves the scalar R equation by Newton safeguarded with a
    bisection bracket; near the steep ramps that the constant initial
    history leaves in the delayed channels the residual can be too steep
    for an absolute tolerance, so a collapsed bracket also counts as
    converged.  ``aux_rec`` (11 x n_steps+1) receives the auxiliaries.
    Returns (status, fail_time, fail_residual, steps_done).
    """
    prov = np.empty(N_CHANNELS)
    aux = np.empty(11)
    aux_h = np.empty(11)
    prov_h = np.empty(N_CHANNELS)
    sqrt_eps = 1.4901161193847656e-08
    for n in range(n_steps):
        t = (n + 1) * dt
        R_old = hist[H_R, n]
        C_old = hist[H_C, n]
        for c in range(N_CHANNELS):
            prov[c] = hist[c, n]
        R = R_old
        F, C, ok = _dde_residual(R, t, R_old, C_old, hist, n, pre0, dt, variant, k,
                                 tol, max_iters, prov, aux)
        lo = -np.inf
        hi = np.inf
        converged = False
        stalled = False
        expand = 1.0
        for _ in range(2 * max_iters):
            if not np.isfinite(F):
                for i in range(11):
                    if np.isnan(aux[i]):
                        return EXTRAPOLATION, t, F, n
                return NONFINITE, t, F, n
            if not ok:
                break
            scale = 1.0 + abs(R)
            if abs(F) <= tol * scale:
                converged = True
                break
            if F > 0.0:
                hi = min(hi, R)
            else:
                lo = max(lo, R)
            if hi - lo <= tol * scale:
                converged = True
                break
            R_new = np.nan
            if not stalled:
                h = sqrt_eps * scale
                for c in range(N_CHANNELS):
                    prov_h[c] = prov[c]
                Fh, _, _ = _dde_residual(R + h, t, R_old, C_old, hist, n, pre0, dt,
                                         variant, k, tol, max_iters, prov_h, aux_h)
                slope = (Fh - F) / h
                if slope > 0.0 and np.isfinite(slope):
                    R_new = R - F / slope
            if not (R_new > lo and R_new < hi):
                if np.isfinite(lo) and np.isfinite(hi):
                    R_new = 0.5 * (lo + hi)
                else:
                    # F = R - R_old - dt*dR/dt has slope near 1: |F| is a fair first step
                    step = expand * max(abs(F), tol * scale)
                    expand *= 2.0
                    R_new = lo + step if np.isfinite(lo) else hi - step
            F_old = F
            R = R_new
            F, C, ok = _dde_residual(R, t, R_old, C_old, hist, n, pre0, dt, variant, k,
                                     tol, max_iters, prov, aux)
            # Newton that stops contracting hands over to bracketing
            if abs(F) > 0.5 * abs(F_old):
                stalled = True
        if not converged:
            return NONCONVERGENCE, t, F, n
        hist[H_R, n + 1] = R
        hist[H_C, n + 1] = C
        hist[H_ATAU, n + 1] = aux[4]
        hist[H_AS, n + 1] = aux[5]
        for i in range(11):
            aux_rec[i, n + 1] = aux[i]
    return OK, n_steps * dt, 0.0, n_steps
