"""Pure-numpy versions of the numerical kernels.

Every function here has a twin with the same signature in the compiled
``_ckernels`` extension. :mod:`heraldgen.kernels` picks one at import.
"""

import numpy as np

_LOG_PI_QUARTER = -0.25 * np.log(np.pi)
_RESCALE = 1e100


def beamsplitter_tensor(w00, w01, w10, w11, cutoff):
    """Fock tensor ``B[k, l, n, m] = <k, l| B |n, m>`` of a two-mode passive gate.

    ``w`` is the single-particle unitary: ``B a_j^dag B^dag = sum_k w_kj a_k^dag``.
    Filled with the creation-operator recurrence, which is exact inside the
    truncated box and never divides by small numbers.
    """
    D = int(cutoff)
    B = np.zeros((D, D, D, D), dtype=np.complex128)
    sq = np.sqrt(np.arange(D + 1, dtype=np.float64))
    B[0, 0, 0, 0] = 1.0
    for n in range(D):
        for m in range(D):
            if n == 0 and m == 0:
                continue
            if n > 0:
                prev = B[:, :, n - 1, m]
                ca, cb, norm = w00, w10, sq[n]
            else:
                prev = B[:, :, 0, m - 1]
                ca, cb, norm = w01, w11, sq[m]
            out = np.zeros((D, D), dtype=np.complex128)
            out[1:, :] += ca * sq[1:D, None] * prev[:-1, :]
            out[:, 1:] += cb * sq[None, 1:D] * prev[:, :-1]
            B[:, :, n, m] = out / norm
    return B


def squeezing_matrix(r, cutoff):
    """Matrix ``<m| exp(r (a^2 - a^dag^2) / 2) |n>`` for real ``r``.

    The recurrence drifts with the cutoff: max error ~1e-12 at 42, ~1e-10
    at 60, ~1e-6 at 80, unusable by 120. Circuits here stay below 40.
    """
    D = int(cutoff)
    S = np.zeros((D, D), dtype=np.float64)
    sech = 1.0 / np.cosh(r)
    t = np.tanh(r)
    S[0, 0] = np.sqrt(sech)
    for m in range(2, D, 2):
        S[m, 0] = -np.sqrt((m - 1) / m) * t * S[m - 2, 0]
    for n in range(1, D):
        for m in range(D):
            if (m + n) % 2:
                continue
            v = 0.0
            if n >= 2:
                v += np.sqrt((n - 1) / n) * t * S[m, n - 2]
            if m >= 1:
                v += np.sqrt(m / n) * sech * S[m - 1, n - 1]
            S[m, n] = v
    return S


def displacement_matrix(d, cutoff):
    """Matrix ``<m| exp(d a^dag - d* a) |n>``."""
    D = int(cutoff)
    d = complex(d)
    M = np.zeros((D, D), dtype=np.complex128)
    sq = np.sqrt(np.arange(D, dtype=np.float64))
    M[0, 0] = np.exp(-0.5 * abs(d) ** 2)
    for m in range(1, D):
        M[m, 0] = d / sq[m] * M[m - 1, 0]
    dc = d.conjugate()
    for n in range(1, D):
        M[0, n] = -dc / sq[n] * M[0, n - 1]
        M[1:, n] = (-dc * M[1:, n - 1] + sq[1:] * M[:-1, n - 1]) / sq[n]
    return M


def hermite_functions(x, nmax):
    """Harmonic-oscillator eigenfunctions ``psi_n(x)`` for ``n = 0..nmax``.

    Convention ``psi_0(x) = pi^(-1/4) exp(-x^2/2)``. The Gaussian factor is
    carried as a per-point log scale so large ``|x|`` does not underflow.
    """
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    out = np.empty((nmax + 1, flat.size), dtype=np.float64)
    logscale = -0.5 * flat**2 + _LOG_PI_QUARTER
    prev = np.zeros_like(flat)
    cur = np.ones_like(flat)
    out[0] = np.exp(logscale)
    for n in range(nmax):
        nxt = np.sqrt(2.0 / (n + 1)) * flat * cur - np.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE
        if big.any():
            cur[big] /= _RESCALE
            prev[big] /= _RESCALE
            logscale[big] += np.log(_RESCALE)
        out[n + 1] = cur * np.exp(logscale)
    return out.reshape((nmax + 1,) + x.shape)


def wigner_pure(psi, q, p):
    """Wigner function of the pure state ``psi`` on the points ``(q, p)``.

    hbar = 1 quadratures, so the vacuum peaks at ``1/pi``. Uses the
    Laguerre-type iteration over matrix elements ``|m><n|``.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    A = (q + 1j * p) / np.sqrt(2.0)
    N = psi.size
    rho = np.outer(psi, psi.conj())
    wlist = [None] * N
    wlist[0] = np.exp(-2.0 * np.abs(A) ** 2) / np.pi
    W = rho[0, 0].real * wlist[0]
    for n in range(1, N):
        wlist[n] = 2.0 * A * wlist[n - 1] / np.sqrt(n)
        W = W + 2.0 * np.real(rho[0, n] * wlist[n])
    Ac = A.conjugate()
    for m in range(1, N):
        temp = wlist[m]
        wlist[m] = (2.0 * Ac * temp - np.sqrt(m) * wlist[m - 1]) / np.sqrt(m)
        W = W + np.real(rho[m, m] * wlist[m])
        for n in range(m + 1, N):
            temp2 = (2.0 * A * wlist[n - 1] - np.sqrt(m) * temp) / np.sqrt(n)
            temp = wlist[n]
            wlist[n] = temp2
            W = W + 2.0 * np.real(rho[m, n] * wlist[n])
    return np.real(W)
