"""Pure-Python/numpy implementations of the hot kernels.

Mirrors ``_kernels.pyx`` operation for operation; used when the compiled
extension is unavailable or when ``FINSIM_PURE_PYTHON=1``.
"""
import math

import numpy as np

# |theta_a| below this switches to Taylor series; the closed forms for the
# second derivative lose ~1e-16/u^3 to cancellation.
SERIES_EPS = 0.05
_SERIES_TERMS = 8
_CHUNK = 2048


def _powers(x, n):
    out = [np.ones_like(x), x]
    for _ in range(n - 1):
        out.append(out[-1] * x)
    return out


def _series(u, a, L):
    u, a = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(a, dtype=float))
    up = _powers(u, 2 * _SERIES_TERMS)
    ap = _powers(a, 2 * _SERIES_TERMS + 1)
    rx, ry, jx, jy, hx, hy = (np.zeros(u.shape) for _ in range(6))
    for k in range(_SERIES_TERMS + 1):
        sgn = -1.0 if k % 2 else 1.0
        # sin(ua)/u = sum (-1)^k a^(2k+1) u^(2k) / (2k+1)!
        c = sgn * ap[2 * k + 1] / math.factorial(2 * k + 1)
        rx += c * up[2 * k]
        if k >= 1:
            jx += c * (2 * k) * up[2 * k - 1]
            hx += c * (2 * k) * (2 * k - 1) * up[2 * k - 2]
            # (1 - cos(ua))/u = sum_{k>=1} (-1)^(k+1) a^(2k) u^(2k-1) / (2k)!
            d = -sgn * ap[2 * k] / math.factorial(2 * k)
            ry += d * up[2 * k - 1]
            jy += d * (2 * k - 1) * up[2 * k - 2]
            if k >= 2:
                hy += d * (2 * k - 1) * (2 * k - 2) * up[2 * k - 3]
    return tuple(L * v for v in (rx, ry, jx, jy, hx, hy))


def _closed(u, a, L):
    ua = u * a
    sn = np.sin(ua)
    c = np.cos(ua)
    omc = 1.0 - c
    iu = 1.0 / u
    iu2 = iu * iu
    iu3 = iu2 * iu
    rx = L * sn * iu
    ry = L * omc * iu
    jx = L * (a * c * iu - sn * iu2)
    jy = L * (a * sn * iu - omc * iu2)
    hx = L * (-a * a * sn * iu - 2.0 * a * c * iu2 + 2.0 * sn * iu3)
    hy = L * (a * a * c * iu - 2.0 * a * sn * iu2 + 2.0 * omc * iu3)
    return rx, ry, jx, jy, hx, hy


def shape_terms(u, a, L):
    """Position, first and second theta_a-derivatives of the constant-curvature arc.

    ``u`` is the attack angle, ``a = s/L`` the normalised arc length; both
    broadcast. Returns ``(rx, ry, jx, jy, hx, hy)``.
    """
    u, a = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(a, dtype=float))
    small = np.abs(u) < SERIES_EPS
    if np.all(small):
        return _series(u, a, L)
    safe_u = np.where(small, 1.0, u)
    out = _closed(safe_u, a, L)
    if np.any(small):
        ser = _series(u[small], a[small], L)
        out = tuple(c.copy() for c in out)
        for c, s in zip(out, ser):
            c[small] = s
    return out


def tail_integrals(theta_a, theta_a_dot, s, w, diam, masses, coms, L, rho, cd, a_fin, added_mass_coeff):
    """Per-sample arc-length integrals of the tail model.

    Returns an ``(n, 5)`` array with columns ``I_eff, dI_dtheta, Q_drag,
    F_long, F_lat`` (see :mod:`finsim.body` and :mod:`finsim.swim`).
    """
    theta_a = np.ascontiguousarray(theta_a, dtype=float)
    theta_a_dot = np.ascontiguousarray(theta_a_dot, dtype=float)
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    diam = np.asarray(diam, dtype=float)
    masses = np.asarray(masses, dtype=float)
    coms = np.asarray(coms, dtype=float)
    n = theta_a.shape[0]
    out = np.empty((n, 5))
    a = (s / L)[None, :]
    a_c = (coms / L)[None, :]
    half_rho_cd = 0.5 * rho * cd
    for lo in range(0, n, _CHUNK):
        hi = min(n, lo + _CHUNK)
        u = theta_a[lo:hi, None]
        ud = theta_a_dot[lo:hi]
        _, _, jx, jy, hx, hy = shape_terms(u, a, L)
        jj = jx * jx + jy * jy
        jh = jx * hx + jy * hy
        i_eff = added_mass_coeff * rho * ((jj * diam) @ w)
        di = 2.0 * added_mass_coeff * rho * ((jh * diam) @ w)
        if masses.size:
            _, _, mjx, mjy, mhx, mhy = shape_terms(u, a_c, L)
            i_eff = i_eff + (mjx * mjx + mjy * mjy) @ masses
            di = di + 2.0 * ((mjx * mhx + mjy * mhy) @ masses)
        jn = np.sqrt(jj)
        cube = jn * jn * jn
        q_drag = -half_rho_cd * ud * np.abs(ud) * ((cube * diam) @ w + a_fin * cube[:, -1])

        th = u * a
        sn = np.sin(th)
        cs = np.cos(th)
        vn = (jx * sn - jy * cs) * ud[:, None]
        q = half_rho_cd * vn * vn * np.abs(sn)
        q_fin = half_rho_cd * a_fin * vn[:, -1] ** 2 * np.abs(sn[:, -1])
        f_long = (q * diam * cs) @ w + q_fin * cs[:, -1]
        f_lat = (q * diam * sn) @ w + q_fin * sn[:, -1]
        out[lo:hi, 0] = i_eff
        out[lo:hi, 1] = di
        out[lo:hi, 2] = q_drag
        out[lo:hi, 3] = f_long
        out[lo:hi, 4] = f_lat
    return out


def swim_rk4(state0, force, moment, dt, mass, inertia, c_surge, c_yaw):
    """RK4 on the planar surge/yaw model with forcing sampled every half step.

    ``force`` and ``moment`` hold ``2n+1`` samples at ``t0 + k*dt/2``; the
    result has ``n+1`` rows of ``(x, y, psi, u, r)``.
    """
    force = np.asarray(force, dtype=float)
    moment = np.asarray(moment, dtype=float)
    n = (force.shape[0] - 1) // 2
    out = np.empty((n + 1, 5))
    x, y, psi, u, r = (float(v) for v in state0)
    out[0] = (x, y, psi, u, r)
    half = 0.5 * dt
    inv_m = 1.0 / mass
    inv_i = 1.0 / inertia
    cos = math.cos
    sin = math.sin
    for k in range(n):
        f1 = force[2 * k]
        f2 = force[2 * k + 1]
        f4 = force[2 * k + 2]
        m1 = moment[2 * k]
        m2 = moment[2 * k + 1]
        m4 = moment[2 * k + 2]

        k1x = u * cos(psi)
        k1y = u * sin(psi)
        k1p = r
        k1u = (f1 - c_surge * u * abs(u)) * inv_m
        k1r = (m1 - c_yaw * r * abs(r)) * inv_i

        p2 = psi + half * k1p
        u2 = u + half * k1u
        r2 = r + half * k1r
        k2x = u2 * cos(p2)
        k2y = u2 * sin(p2)
        k2p = r2
        k2u = (f2 - c_surge * u2 * abs(u2)) * inv_m
        k2r = (m2 - c_yaw * r2 * abs(r2)) * inv_i

        p3 = psi + half * k2p
        u3 = u + half * k2u
        r3 = r + half * k2r
        k3x = u3 * cos(p3)
        k3y = u3 * sin(p3)
        k3p = r3
        k3u = (f2 - c_surge * u3 * abs(u3)) * inv_m
        k3r = (m2 - c_yaw * r3 * abs(r3)) * inv_i

        p4 = psi + dt * k3p
        u4 = u + dt * k3u
        r4 = r + dt * k3r
        k4x = u4 * cos(p4)
        k4y = u4 * sin(p4)
        k4p = r4
        k4u = (f4 - c_surge * u4 * abs(u4)) * inv_m
        k4r = (m4 - c_yaw * r4 * abs(r4)) * inv_i

        sixth = dt / 6.0
        x = x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
        y = y + sixth * (k1y + 2.0 * (k2y + k3y) + k4y)
        psi = psi + sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
        u = u + sixth * (k1u + 2.0 * (k2u + k3u) + k4u)
        r = r + sixth * (k1r + 2.0 * (k2r + k3r) + k4r)
        out[k + 1, 0] = x
        out[k + 1, 1] = y
        out[k + 1, 2] = psi
        out[k + 1, 3] = u
        out[k + 1, 4] = r
    return out
