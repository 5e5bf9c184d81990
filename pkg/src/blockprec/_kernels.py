"""Numba-compiled scalar kernels.

Everything here is a plain loop over float64/uint64 arrays; the wrappers in
:mod:`blockprec.linalg` and :mod:`blockprec.rng` own validation and API.
"""

import math

import numpy as np
from numba import njit

_EPS = 2.220446049250313e-16


@njit(cache=True)
def xoshiro256pp_fill(state, out):
    """Fill ``out`` with uniform doubles in [0, 1) from a xoshiro256++ stream.

    ``state`` is a uint64[4] array, advanced in place.
    """
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    for i in range(out.shape[0]):
        tmp = s0 + s3
        result = ((tmp << np.uint64(23)) | (tmp >> np.uint64(41))) + s0
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
        out[i] = (result >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3


@njit(cache=True)
def solve_unit_lower(lu, b):
    """Forward substitution with the packed unit-lower factor, in place on b (n, m)."""
    n = lu.shape[0]
    m = b.shape[1]
    for i in range(1, n):
        for c in range(m):
            s = b[i, c]
            for k in range(i):
                s -= lu[i, k] * b[k, c]
            b[i, c] = s


@njit(cache=True)
def solve_upper(lu, b):
    """Back substitution with the packed upper factor, in place on b (n, m)."""
    n = lu.shape[0]
    m = b.shape[1]
    for i in range(n - 1, -1, -1):
        piv = lu[i, i]
        for c in range(m):
            s = b[i, c]
            for k in range(i + 1, n):
                s -= lu[i, k] * b[k, c]
            b[i, c] = s / piv
    return 0


@njit(cache=True)
def tridiag_eigvals(d, e, max_sweeps):
    """Implicit-shift QL eigenvalues of a symmetric tridiagonal matrix.

    ``d`` holds the diagonal (overwritten with eigenvalues, unordered),
    ``e`` the subdiagonal in e[0:n-1] (destroyed).  Returns 0 on success,
    1 + index of the stuck eigenvalue on sweep-count overflow.
    """
    n = d.shape[0]
    if n == 1:
        return 0
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return 1 + l
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            sign_r = r if g >= 0.0 else -r
            g = d[m] - d[l] + e[l] / (g + sign_r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


@njit(cache=True)
def symmetric_tridiag(t, d, e):
    """Householder tridiagonalization of a symmetric matrix (lower triangle).

    ``t`` is destroyed; diagonal lands in ``d``, subdiagonal in ``e[0:n-1]``.
    """
    n = t.shape[0]
    p = np.zeros(n)
    q = np.zeros(n)
    for k in range(n - 2):
        nx2 = 0.0
        for i in range(k + 1, n):
            nx2 += t[i, k] * t[i, k]
        nx = math.sqrt(nx2)
        if nx == 0.0:
            e[k] = 0.0
            continue
        x0 = t[k + 1, k]
        alpha = -nx if x0 >= 0.0 else nx
        t[k + 1, k] = x0 - alpha
        vn2 = 0.0
        for i in range(k + 1, n):
            vn2 += t[i, k] * t[i, k]
        vn = math.sqrt(vn2)
        if vn == 0.0:
            e[k] = alpha
            continue
        for i in range(k + 1, n):
            t[i, k] /= vn
        # p = (trailing block) @ v, using the lower triangle only
        for i in range(k + 1, n):
            p[i] = 0.0
        for i in range(k + 1, n):
            vi = t[i, k]
            s = t[i, i] * vi
            for j in range(k + 1, i):
                s += t[i, j] * t[j, k]
                p[j] += t[i, j] * vi
            p[i] += s
        kappa = 0.0
        for i in range(k + 1, n):
            kappa += t[i, k] * p[i]
        for i in range(k + 1, n):
            q[i] = 2.0 * (p[i] - kappa * t[i, k])
        # symmetric rank-2 update of the trailing lower triangle
        for i in range(k + 1, n):
            vi = t[i, k]
            qi = q[i]
            for j in range(k + 1, i + 1):
                t[i, j] -= vi * q[j] + qi * t[j, k]
        e[k] = alpha
    for i in range(n):
        d[i] = t[i, i]
    if n >= 2:
        e[n - 2] = t[n - 1, n - 2]


@njit(cache=True)
def hessenberg_eigvals(h, max_sweeps):
    """Francis double-shift QR with deflation on an upper Hessenberg matrix.

    ``h`` is destroyed.  Returns (wr, wi, status, lo, hi); status 0 means all
    eigenvalues converged, 1 flags the active window [lo, hi] that failed to
    deflate within ``max_sweeps`` sweeps.
    """
    n = h.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    if n == 0:
        return wr, wi, 0, 0, 0
    if n == 1:
        wr[0] = h[0, 0]
        return wr, wi, 0, 0, 0

    anorm = 0.0
    for i in range(n):
        lo0 = i - 1 if i > 0 else 0
        for j in range(lo0, n):
            anorm += abs(h[i, j])
    if anorm == 0.0:
        return wr, wi, 0, 0, 0

    hi = n - 1
    sweeps = 0
    while hi >= 0:
        # Scan for a negligible subdiagonal entry to split the active window.
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = anorm
            if abs(h[lo, lo - 1]) <= _EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1

        if lo == hi:
            wr[hi] = h[hi, hi]
            hi -= 1
            sweeps = 0
            continue
        if lo == hi - 1:
            a = h[hi - 1, hi - 1]
            b = h[hi - 1, hi]
            c = h[hi, hi - 1]
            dd = h[hi, hi]
            mean = 0.5 * (a + dd)
            q = 0.25 * (a - dd) * (a - dd) + b * c
            if q >= 0.0:
                z = math.sqrt(q)
                lam1 = mean + z if mean >= 0.0 else mean - z
                det = a * dd - b * c
                lam2 = det / lam1 if lam1 != 0.0 else mean - z
                wr[hi - 1] = lam1
                wr[hi] = lam2
            else:
                z = math.sqrt(-q)
                wr[hi - 1] = mean
                wr[hi] = mean
                wi[hi - 1] = z
                wi[hi] = -z
            hi -= 2
            sweeps = 0
            continue

        sweeps += 1
        if sweeps > max_sweeps:
            return wr, wi, 1, lo, hi

        if sweeps % 10 == 0:
            # dlahqr-style exceptional shift from a synthetic trailing 2x2.
            sx = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            h11 = 0.75 * sx + h[hi, hi]
            h12 = -0.4375 * sx
            h21 = sx
            h22 = h11
            tr = h11 + h22
            det = h11 * h22 - h12 * h21
        else:
            tr = h[hi - 1, hi - 1] + h[hi, hi]
            det = (h[hi - 1, hi - 1] * h[hi, hi]
                   - h[hi - 1, hi] * h[hi, hi - 1])

        # First column of (H - aI)(H - bI) with a + b = tr, a*b = det.
        x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - tr * h[lo, lo] + det
        y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - tr)
        z = h[lo + 1, lo] * h[lo + 2, lo + 1]

        for k in range(lo, hi):
            if k > lo:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
                z = h[k + 2, k - 1] if k + 2 <= hi else 0.0

            scale = abs(x) + abs(y) + abs(z)
            if scale == 0.0:
                continue
            x /= scale
            y /= scale
            z /= scale
            alpha = math.sqrt(x * x + y * y + z * z)
            if x >= 0.0:
                alpha = -alpha
            if k + 2 > hi:
                z = 0.0

            v0 = x - alpha
            v1 = y
            v2 = z
            vnorm2 = v0 * v0 + v1 * v1 + v2 * v2
            if vnorm2 == 0.0:
                continue
            beta = 2.0 / vnorm2
            last = min(k + 2, hi)

            # Apply I - beta v v^T from the left (rows k..last).
            cstart = k - 1 if k > lo else lo
            for j in range(cstart, hi + 1):
                t = v0 * h[k, j] + v1 * h[k + 1, j]
                if last == k + 2:
                    t += v2 * h[k + 2, j]
                t *= beta
                h[k, j] -= t * v0
                h[k + 1, j] -= t * v1
                if last == k + 2:
                    h[k + 2, j] -= t * v2
            # ... and from the right (columns k..last).
            rend = min(k + 3, hi)
            for i in range(lo, rend + 1):
                t = v0 * h[i, k] + v1 * h[i, k + 1]
                if last == k + 2:
                    t += v2 * h[i, k + 2]
                t *= beta
                h[i, k] -= t * v0
                h[i, k + 1] -= t * v1
                if last == k + 2:
                    h[i, k + 2] -= t * v2

            if k > lo:
                h[k + 1, k - 1] = 0.0
                if k + 2 <= hi:
                    h[k + 2, k - 1] = 0.0
    return wr, wi, 0, 0, 0
