# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels. Signatures mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, cosh, tanh, fabs, M_PI

cnp.import_array()

cdef double RESCALE = 1e100


def beamsplitter_tensor(double complex w00, double complex w01,
                        double complex w10, double complex w11, int cutoff):
    cdef int D = cutoff
    cdef cnp.ndarray[cnp.complex128_t, ndim=4] B = np.zeros((D, D, D, D), dtype=np.complex128)
    cdef double complex[:, :, :, ::1] b = B
    cdef double[::1] sq = np.sqrt(np.arange(D + 1, dtype=np.float64))
    cdef int n, m, k, l, tot, kmin, kmax
    cdef double complex v
    b[0, 0, 0, 0] = 1.0
    for n in range(D):
        for m in range(D):
            if n == 0 and m == 0:
                continue
            tot = n + m
            kmin = tot - D + 1
            if kmin < 0:
                kmin = 0
            kmax = tot if tot < D else D - 1
            for k in range(kmin, kmax + 1):
                l = tot - k
                v = 0.0
                if n > 0:
                    if k > 0:
                        v = v + w00 * sq[k] * b[k - 1, l, n - 1, m]
                    if l > 0:
                        v = v + w10 * sq[l] * b[k, l - 1, n - 1, m]
                    b[k, l, n, m] = v / sq[n]
                else:
                    if k > 0:
                        v = v + w01 * sq[k] * b[k - 1, l, 0, m - 1]
                    if l > 0:
                        v = v + w11 * sq[l] * b[k, l - 1, 0, m - 1]
                    b[k, l, n, m] = v / sq[m]
    return B


def squeezing_matrix(double r, int cutoff):
    cdef int D = cutoff
    cdef cnp.ndarray[cnp.float64_t, ndim=2] S = np.zeros((D, D), dtype=np.float64)
    cdef double[:, ::1] s = S
    cdef double sech = 1.0 / cosh(r)
    cdef double t = tanh(r)
    cdef int m, n
    cdef double v
    s[0, 0] = sqrt(sech)
    for m in range(2, D, 2):
        s[m, 0] = -sqrt((m - 1.0) / m) * t * s[m - 2, 0]
    for n in range(1, D):
        for m in range(D):
            if (m + n) % 2:
                continue
            v = 0.0
            if n >= 2:
                v = v + sqrt((n - 1.0) / n) * t * s[m, n - 2]
            if m >= 1:
                v = v + sqrt(<double>m / n) * sech * s[m - 1, n - 1]
            s[m, n] = v
    return S


def displacement_matrix(d, int cutoff):
    cdef int D = cutoff
    cdef double complex dd = complex(d)
    cdef double complex dc = dd.conjugate()
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] M = np.zeros((D, D), dtype=np.complex128)
    cdef double complex[:, ::1] mm = M
    cdef int m, n
    mm[0, 0] = exp(-0.5 * (dd.real * dd.real + dd.imag * dd.imag))
    for m in range(1, D):
        mm[m, 0] = dd / sqrt(<double>m) * mm[m - 1, 0]
    for n in range(1, D):
        mm[0, n] = -dc / sqrt(<double>n) * mm[0, n - 1]
        for m in range(1, D):
            mm[m, n] = (-dc * mm[m, n - 1] + sqrt(<double>m) * mm[m - 1, n - 1]) / sqrt(<double>n)
    return M


def hermite_functions(x, int nmax):
    xa = np.asarray(x, dtype=np.float64)
    cdef const double[::1] flat = np.ascontiguousarray(xa.ravel())
    cdef Py_ssize_t npts = flat.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nmax + 1, npts), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] prev = np.zeros(npts)
    cdef double[::1] cur = np.ones(npts)
    cdef double[::1] scale = np.empty(npts)
    cdef double[::1] logscale = np.empty(npts)
    cdef double lq = -0.25 * log(M_PI)
    cdef double lr = log(RESCALE)
    cdef Py_ssize_t i
    cdef int n
    cdef double a, b, nxt
    for i in range(npts):
        logscale[i] = -0.5 * flat[i] * flat[i] + lq
        scale[i] = exp(logscale[i])
        o[0, i] = scale[i]
    for n in range(nmax):
        a = sqrt(2.0 / (n + 1))
        b = sqrt(<double>n / (n + 1))
        for i in range(npts):
            nxt = a * flat[i] * cur[i] - b * prev[i]
            prev[i] = cur[i]
            cur[i] = nxt
            if fabs(nxt) > RESCALE:
                cur[i] = nxt / RESCALE
                prev[i] = prev[i] / RESCALE
                logscale[i] = logscale[i] + lr
                scale[i] = exp(logscale[i])
            o[n + 1, i] = cur[i] * scale[i]
    return out.reshape((nmax + 1,) + xa.shape)


def wigner_pure(psi, q, p):
    cdef cnp.ndarray cpsi = np.ascontiguousarray(psi, dtype=np.complex128)
    qb, pb = np.broadcast_arrays(np.asarray(q, dtype=np.float64), np.asarray(p, dtype=np.float64))
    shape = qb.shape
    cdef const double[::1] qf = np.ascontiguousarray(qb.ravel())
    cdef const double[::1] pf = np.ascontiguousarray(pb.ravel())
    cdef Py_ssize_t npts = qf.shape[0]
    cdef int N = cpsi.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(npts, dtype=np.float64)
    # complex arithmetic spelled out in doubles: C99 complex products go
    # through __muldc3 and dominate the run time otherwise
    cdef double[::1] wr = np.empty(N)
    cdef double[::1] wi = np.empty(N)
    # off-diagonal weights carry the factor 2
    rho = 2.0 * np.outer(cpsi, np.conj(cpsi))
    rho[np.diag_indices(N)] *= 0.5
    cdef const double[:, ::1] rr = np.ascontiguousarray(rho.real)
    cdef const double[:, ::1] ri = np.ascontiguousarray(rho.imag)
    cdef double[::1] sq = np.sqrt(np.arange(N + 1, dtype=np.float64))
    cdef double[::1] isq = 1.0 / np.sqrt(np.arange(1, N + 1, dtype=np.float64))
    cdef Py_ssize_t i
    cdef int m, n
    cdef double ar, ai, W, tr, ti, t2r, t2i, s, r2 = sqrt(2.0)
    for i in range(npts):
        ar = r2 * qf[i]
        ai = r2 * pf[i]
        wr[0] = exp(-0.5 * (ar * ar + ai * ai)) / M_PI
        wi[0] = 0.0
        W = rr[0, 0] * wr[0]
        for n in range(1, N):
            s = isq[n - 1]
            wr[n] = (ar * wr[n - 1] - ai * wi[n - 1]) * s
            wi[n] = (ar * wi[n - 1] + ai * wr[n - 1]) * s
            W += rr[0, n] * wr[n] - ri[0, n] * wi[n]
        for m in range(1, N):
            tr = wr[m]
            ti = wi[m]
            s = isq[m - 1]
            # conj(2A) * temp - sqrt(m) * w[m-1]
            wr[m] = (ar * tr + ai * ti - sq[m] * wr[m - 1]) * s
            wi[m] = (ar * ti - ai * tr - sq[m] * wi[m - 1]) * s
            W += rr[m, m] * wr[m] - ri[m, m] * wi[m]
            for n in range(m + 1, N):
                s = isq[n - 1]
                t2r = (ar * wr[n - 1] - ai * wi[n - 1] - sq[m] * tr) * s
                t2i = (ar * wi[n - 1] + ai * wr[n - 1] - sq[m] * ti) * s
                tr = wr[n]
                ti = wi[n]
                wr[n] = t2r
                wi[n] = t2i
                W += rr[m, n] * t2r - ri[m, n] * t2i
        out[i] = W
    return out.reshape(shape)
