# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_kernels_py``; same signatures and results."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs

cnp.import_array()

cdef double SERIES_EPS = 0.05
cdef int SERIES_TERMS = 8


cdef inline void _shape(double u, double a, double L, double* out) noexcept nogil:
    cdef double ua, sn, c, omc, iu, iu2, iu3
    cdef double rx = 0.0, ry = 0.0, jx = 0.0, jy = 0.0, hx = 0.0, hy = 0.0
    cdef double sgn, cc, d, fact, apow, a2
    cdef int k
    if fabs(u) < SERIES_EPS:
        # running factorial and powers of a
        a2 = a * a
        fact = 1.0          # (2k+1)!
        apow = a            # a^(2k+1)
        for k in range(SERIES_TERMS + 1):
            sgn = -1.0 if k % 2 else 1.0
            if k >= 1:
                fact *= (2 * k) * (2 * k + 1)
                apow *= a2
            cc = sgn * apow / fact
            rx += cc * _ipow(u, 2 * k)
            if k >= 1:
                jx += cc * (2 * k) * _ipow(u, 2 * k - 1)
                hx += cc * (2 * k) * (2 * k - 1) * _ipow(u, 2 * k - 2)
                # a^(2k)/(2k)! = apow/a * (2k+1)/fact, avoid dividing by a
                d = -sgn * _ipow(a, 2 * k) * (2 * k + 1) / fact
                ry += d * _ipow(u, 2 * k - 1)
                jy += d * (2 * k - 1) * _ipow(u, 2 * k - 2)
                if k >= 2:
                    hy += d * (2 * k - 1) * (2 * k - 2) * _ipow(u, 2 * k - 3)
    else:
        ua = u * a
        sn = sin(ua)
        c = cos(ua)
        omc = 1.0 - c
        iu = 1.0 / u
        iu2 = iu * iu
        iu3 = iu2 * iu
        rx = sn * iu
        ry = omc * iu
        jx = a * c * iu - sn * iu2
        jy = a * sn * iu - omc * iu2
        hx = -a * a * sn * iu - 2.0 * a * c * iu2 + 2.0 * sn * iu3
        hy = a * a * c * iu - 2.0 * a * sn * iu2 + 2.0 * omc * iu3
    out[0] = L * rx
    out[1] = L * ry
    out[2] = L * jx
    out[3] = L * jy
    out[4] = L * hx
    out[5] = L * hy


cdef inline double _ipow(double x, int n) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(n):
        r *= x
    return r


def shape_terms(u, a, double L):
    u_arr, a_arr = np.broadcast_arrays(np.asarray(u, dtype=np.float64), np.asarray(a, dtype=np.float64))
    shape = u_arr.shape
    cdef double[::1] uf = np.ascontiguousarray(u_arr).ravel()
    cdef double[::1] af = np.ascontiguousarray(a_arr).ravel()
    cdef Py_ssize_t n = uf.shape[0], i
    res = np.empty((6, n))
    cdef double[:, ::1] r = res
    cdef double buf[6]
    with nogil:
        for i in range(n):
            _shape(uf[i], af[i], L, buf)
            r[0, i] = buf[0]
            r[1, i] = buf[1]
            r[2, i] = buf[2]
            r[3, i] = buf[3]
            r[4, i] = buf[4]
            r[5, i] = buf[5]
    return tuple(res[j].reshape(shape) for j in range(6))


def tail_integrals(theta_a, theta_a_dot, s, w, diam, masses, coms,
                   double L, double rho, double cd, double a_fin, double added_mass_coeff):
    cdef double[::1] ta = np.ascontiguousarray(theta_a, dtype=np.float64)
    cdef double[::1] td = np.ascontiguousarray(theta_a_dot, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(diam, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(masses, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(coms, dtype=np.float64)
    cdef Py_ssize_t n = ta.shape[0], m = sv.shape[0], nm = mv.shape[0]
    res = np.empty((n, 5))
    cdef double[:, ::1] out = res
    cdef double buf[6]
    cdef Py_ssize_t i, j
    cdef double u, ud, uu, jj, jh, jn, th, sn, cs, vn, q
    cdef double s_jj, s_jh, s_cube, s_long, s_lat, m_jj, m_jh
    cdef double half_rho_cd = 0.5 * rho * cd
    cdef double cube_L = 0.0, q_fin = 0.0, sn_L = 0.0, cs_L = 0.0
    with nogil:
        for i in range(n):
            u = ta[i]
            ud = td[i]
            s_jj = 0.0
            s_jh = 0.0
            s_cube = 0.0
            s_long = 0.0
            s_lat = 0.0
            for j in range(m):
                _shape(u, sv[j] / L, L, buf)
                jj = buf[2] * buf[2] + buf[3] * buf[3]
                jh = buf[2] * buf[4] + buf[3] * buf[5]
                jn = sqrt(jj)
                s_jj += wv[j] * (jj * dv[j])
                s_jh += wv[j] * (jh * dv[j])
                s_cube += wv[j] * (jn * jn * jn * dv[j])
                th = u * (sv[j] / L)
                sn = sin(th)
                cs = cos(th)
                vn = (buf[2] * sn - buf[3] * cs) * ud
                q = half_rho_cd * vn * vn * fabs(sn)
                s_long += wv[j] * (q * dv[j] * cs)
                s_lat += wv[j] * (q * dv[j] * sn)
                if j == m - 1:
                    cube_L = jn * jn * jn
                    q_fin = half_rho_cd * a_fin * vn * vn * fabs(sn)
                    sn_L = sn
                    cs_L = cs
            m_jj = 0.0
            m_jh = 0.0
            for j in range(nm):
                _shape(u, cv[j] / L, L, buf)
                m_jj += (buf[2] * buf[2] + buf[3] * buf[3]) * mv[j]
                m_jh += (buf[2] * buf[4] + buf[3] * buf[5]) * mv[j]
            out[i, 0] = added_mass_coeff * rho * s_jj + m_jj
            out[i, 1] = 2.0 * added_mass_coeff * rho * s_jh + 2.0 * m_jh
            out[i, 2] = -half_rho_cd * ud * fabs(ud) * (s_cube + a_fin * cube_L)
            out[i, 3] = s_long + q_fin * cs_L
            out[i, 4] = s_lat + q_fin * sn_L
    return res


def swim_rk4(state0, force, moment, double dt, double mass, double inertia,
             double c_surge, double c_yaw):
    cdef double[::1] fv = np.ascontiguousarray(force, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(moment, dtype=np.float64)
    cdef Py_ssize_t n = (fv.shape[0] - 1) // 2, k
    res = np.empty((n + 1, 5))
    cdef double[:, ::1] out = res
    cdef double x = state0[0], y = state0[1], psi = state0[2], u = state0[3], r = state0[4]
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef double inv_m = 1.0 / mass, inv_i = 1.0 / inertia
    cdef double f1, f2, f4, m1, m2, m4
    cdef double k1x, k1y, k1p, k1u, k1r, k2x, k2y, k2p, k2u, k2r
    cdef double k3x, k3y, k3p, k3u, k3r, k4x, k4y, k4p, k4u, k4r
    cdef double p2, u2, r2, p3, u3, r3, p4, u4, r4
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = psi
    out[0, 3] = u
    out[0, 4] = r
    with nogil:
        for k in range(n):
            f1 = fv[2 * k]
            f2 = fv[2 * k + 1]
            f4 = fv[2 * k + 2]
            m1 = mv[2 * k]
            m2 = mv[2 * k + 1]
            m4 = mv[2 * k + 2]

            k1x = u * cos(psi)
            k1y = u * sin(psi)
            k1p = r
            k1u = (f1 - c_surge * u * fabs(u)) * inv_m
            k1r = (m1 - c_yaw * r * fabs(r)) * inv_i

            p2 = psi + half * k1p
            u2 = u + half * k1u
            r2 = r + half * k1r
            k2x = u2 * cos(p2)
            k2y = u2 * sin(p2)
            k2p = r2
            k2u = (f2 - c_surge * u2 * fabs(u2)) * inv_m
            k2r = (m2 - c_yaw * r2 * fabs(r2)) * inv_i

            p3 = psi + half * k2p
            u3 = u + half * k2u
            r3 = r + half * k2r
            k3x = u3 * cos(p3)
            k3y = u3 * sin(p3)
            k3p = r3
            k3u = (f2 - c_surge * u3 * fabs(u3)) * inv_m
            k3r = (m2 - c_yaw * r3 * fabs(r3)) * inv_i

            p4 = psi + dt * k3p
            u4 = u + dt * k3u
            r4 = r + dt * k3r
            k4x = u4 * cos(p4)
            k4y = u4 * sin(p4)
            k4p = r4
            k4u = (f4 - c_surge * u4 * fabs(u4)) * inv_m
            k4r = (m4 - c_yaw * r4 * fabs(r4)) * inv_i

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
    return res
