# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled flow kernels: radial velocity of the expanding flow.

Mirrors fallback.py exactly; see there for the formulas. The loops are the
per-stage hot path of the time stepper.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, cosh, sin, sinh, sqrt, tan

cnp.import_array()


def axisym_rhs(double[::1] r, double[::1] psi, double h, int n):
    cdef Py_ssize_t N = r.shape[0]
    cdef cnp.ndarray[double, ndim=1] pad_arr = np.empty(N + 4)
    cdef cnp.ndarray[double, ndim=1] out_arr = np.empty(N)
    cdef double[::1] pad = pad_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double r1, r2, lam, lam_p, phi_p, v_sq, v, phi_pp, kap_r, kap_a, p1
    cdef double min_p1 = 1e300
    cdef double inv12h = 1.0 / (12.0 * h)
    cdef double inv12hh = 1.0 / (12.0 * h * h)
    cdef double nm1 = n - 1.0
    cdef double nm2 = n - 2.0

    for i in range(N):
        pad[i + 2] = r[i]
    pad[1] = r[0]
    pad[0] = r[1]
    pad[N + 2] = r[N - 1]
    pad[N + 3] = r[N - 2]

    for i in range(N):
        r1 = (-pad[i + 4] + 8.0 * pad[i + 3] - 8.0 * pad[i + 1] + pad[i]) * inv12h
        r2 = (
            -pad[i + 4]
            + 16.0 * pad[i + 3]
            - 30.0 * pad[i + 2]
            + 16.0 * pad[i + 1]
            - pad[i]
        ) * inv12hh
        lam = sinh(r[i])
        lam_p = cosh(r[i])
        phi_p = r1 / lam
        v_sq = 1.0 + phi_p * phi_p
        v = sqrt(v_sq)
        phi_pp = r2 / lam - lam_p / (lam * lam) * r1 * r1
        kap_r = lam_p / (v * lam) - phi_pp / (lam * v * v_sq)
        kap_a = lam_p / (v * lam) - phi_p / (tan(psi[i]) * v * lam)
        p1 = (kap_r + nm2 * kap_a) / nm1
        if p1 < min_p1:
            min_p1 = p1
        out[i] = v / (nm1 * p1)
    return out_arr, min_p1


def s2_rhs(double[:, ::1] r, double[::1] psi, double h_psi, double h_theta):
    cdef Py_ssize_t np_ = r.shape[0]
    cdef Py_ssize_t nt = r.shape[1]
    cdef Py_ssize_t half = nt // 2
    cdef cnp.ndarray[double, ndim=2] rt_arr = np.empty((np_, nt))
    cdef cnp.ndarray[double, ndim=2] rtt_arr = np.empty((np_, nt))
    cdef cnp.ndarray[double, ndim=2] pad_arr = np.empty((np_ + 4, nt))
    cdef cnp.ndarray[double, ndim=2] padt_arr = np.empty((np_ + 4, nt))
    cdef cnp.ndarray[double, ndim=2] out_arr = np.empty((np_, nt))
    cdef double[:, ::1] rt = rt_arr
    cdef double[:, ::1] rtt = rtt_arr
    cdef double[:, ::1] pad = pad_arr
    cdef double[:, ::1] padt = padt_arr
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, jp1, jp2, jm1, jm2, jg
    cdef double inv12ht = 1.0 / (12.0 * h_theta)
    cdef double inv12htt = 1.0 / (12.0 * h_theta * h_theta)
    cdef double inv12hp = 1.0 / (12.0 * h_psi)
    cdef double inv12hpp = 1.0 / (12.0 * h_psi * h_psi)
    cdef double r_p, r_pp, r_t, r_tt, r_pt, sin_i, cos_i, cot_i, sin2
    cdef double c_pp, c_pt, c_tt, lam, lam_p, phi_p, phi_t
    cdef double f_pp, f_pt, f_tt, lam2, g_pp, g_pt, g_tt, grad_sq, v, s
    cdef double h_pp, h_pt, h_tt, det, p1
    cdef double min_p1 = 1e300

    for i in range(np_):
        for j in range(nt):
            jp1 = j + 1 if j + 1 < nt else j + 1 - nt
            jp2 = j + 2 if j + 2 < nt else j + 2 - nt
            jm1 = j - 1 if j >= 1 else j - 1 + nt
            jm2 = j - 2 if j >= 2 else j - 2 + nt
            rt[i, j] = (
                -r[i, jp2] + 8.0 * r[i, jp1] - 8.0 * r[i, jm1] + r[i, jm2]
            ) * inv12ht
            rtt[i, j] = (
                -r[i, jp2]
                + 16.0 * r[i, jp1]
                - 30.0 * r[i, j]
                + 16.0 * r[i, jm1]
                - r[i, jm2]
            ) * inv12htt

    # ghost rows across the poles: (psi, theta) -> (-psi, theta + pi)
    for j in range(nt):
        jg = j + half if j + half < nt else j + half - nt
        pad[0, j] = r[1, jg]
        pad[1, j] = r[0, jg]
        pad[np_ + 2, j] = r[np_ - 1, jg]
        pad[np_ + 3, j] = r[np_ - 2, jg]
        padt[0, j] = rt[1, jg]
        padt[1, j] = rt[0, jg]
        padt[np_ + 2, j] = rt[np_ - 1, jg]
        padt[np_ + 3, j] = rt[np_ - 2, jg]
    for i in range(np_):
        for j in range(nt):
            pad[i + 2, j] = r[i, j]
            padt[i + 2, j] = rt[i, j]

    for i in range(np_):
        sin_i = sin(psi[i])
        cos_i = cos(psi[i])
        cot_i = cos_i / sin_i
        sin2 = sin_i * sin_i
        for j in range(nt):
            r_p = (
                -pad[i + 4, j] + 8.0 * pad[i + 3, j] - 8.0 * pad[i + 1, j] + pad[i, j]
            ) * inv12hp
            r_pp = (
                -pad[i + 4, j]
                + 16.0 * pad[i + 3, j]
                - 30.0 * pad[i + 2, j]
                + 16.0 * pad[i + 1, j]
                - pad[i, j]
            ) * inv12hpp
            r_t = rt[i, j]
            r_tt = rtt[i, j]
            r_pt = (
                -padt[i + 4, j]
                + 8.0 * padt[i + 3, j]
                - 8.0 * padt[i + 1, j]
                + padt[i, j]
            ) * inv12hp

            c_pp = r_pp
            c_pt = r_pt - cot_i * r_t
            c_tt = r_tt + sin_i * cos_i * r_p

            lam = sinh(r[i, j])
            lam_p = cosh(r[i, j])
            phi_p = r_p / lam
            phi_t = r_t / lam
            f_pp = c_pp / lam - lam_p / (lam * lam) * r_p * r_p
            f_pt = c_pt / lam - lam_p / (lam * lam) * r_p * r_t
            f_tt = c_tt / lam - lam_p / (lam * lam) * r_t * r_t

            lam2 = lam * lam
            g_pp = lam2 * (1.0 + phi_p * phi_p)
            g_pt = lam2 * phi_p * phi_t
            g_tt = lam2 * (sin2 + phi_t * phi_t)
            grad_sq = phi_p * phi_p + (phi_t * phi_t) / sin2
            v = sqrt(1.0 + grad_sq)

            s = lam_p / (v * lam)
            h_pp = s * g_pp - (lam / v) * f_pp
            h_pt = s * g_pt - (lam / v) * f_pt
            h_tt = s * g_tt - (lam / v) * f_tt

            det = g_pp * g_tt - g_pt * g_pt
            p1 = 0.5 * (g_tt * h_pp - 2.0 * g_pt * h_pt + g_pp * h_tt) / det
            if p1 < min_p1:
                min_p1 = p1
            out[i, j] = v / (2.0 * p1)
    return out_arr, min_p1
