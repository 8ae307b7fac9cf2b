# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, fabs, INFINITY
from libc.string cimport memcpy

cnp.import_array()


cdef inline double _logaddexp(double a, double b) nogil:
    cdef double hi, lo
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a > b:
        hi = a
        lo = b
    else:
        hi = b
        lo = a
    return hi + log1p(exp(lo - hi))


def ctc_forward_backward(log_probs, ext):
    cdef double[:, ::1] lp = np.ascontiguousarray(log_probs, dtype=np.float64)
    cdef long long[::1] e = np.ascontiguousarray(ext, dtype=np.int64)
    cdef Py_ssize_t T = lp.shape[0]
    cdef Py_ssize_t S = e.shape[0]
    alpha_arr = np.full((T, S), -np.inf)
    beta_arr = np.full((T, S), -np.inf)
    if T == 0:
        return alpha_arr, beta_arr
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef Py_ssize_t t, s
    cdef double acc
    cdef long long blank = e[0]

    with nogil:
        alpha[0, 0] = lp[0, e[0]]
        if S > 1:
            alpha[0, 1] = lp[0, e[1]]
        for t in range(1, T):
            for s in range(S):
                acc = alpha[t - 1, s]
                if s >= 1:
                    acc = _logaddexp(acc, alpha[t - 1, s - 1])
                if s >= 2 and e[s] != blank and e[s] != e[s - 2]:
                    acc = _logaddexp(acc, alpha[t - 1, s - 2])
                alpha[t, s] = acc + lp[t, e[s]]

        beta[T - 1, S - 1] = lp[T - 1, e[S - 1]]
        if S > 1:
            beta[T - 1, S - 2] = lp[T - 1, e[S - 2]]
        for t in range(T - 2, -1, -1):
            for s in range(S):
                acc = beta[t + 1, s]
                if s + 1 < S:
                    acc = _logaddexp(acc, beta[t + 1, s + 1])
                if s + 2 < S and e[s + 2] != blank and e[s + 2] != e[s]:
                    acc = _logaddexp(acc, beta[t + 1, s + 2])
                beta[t, s] = acc + lp[t, e[s]]
    return alpha_arr, beta_arr


def edit_counts(ref, hyp):
    cdef long long[::1] r = np.ascontiguousarray(ref, dtype=np.int64)
    cdef long long[::1] h = np.ascontiguousarray(hyp, dtype=np.int64)
    cdef Py_ssize_t n = r.shape[0], m = h.shape[0]
    table_arr = np.empty((n + 1, m + 1), dtype=np.int64)
    cdef long long[:, ::1] tb = table_arr
    cdef Py_ssize_t i, j
    cdef long long best, cur, diff
    cdef long long subs = 0, dels = 0, ins = 0

    with nogil:
        for i in range(n + 1):
            tb[i, 0] = i
        for j in range(m + 1):
            tb[0, j] = j
        for i in range(1, n + 1):
            for j in range(1, m + 1):
                best = tb[i - 1, j - 1] + (r[i - 1] != h[j - 1])
                if tb[i, j - 1] + 1 < best:
                    best = tb[i, j - 1] + 1
                if tb[i - 1, j] + 1 < best:
                    best = tb[i - 1, j] + 1
                tb[i, j] = best

        i = n
        j = m
        while i > 0 or j > 0:
            cur = tb[i, j]
            if i > 0 and j > 0:
                diff = r[i - 1] != h[j - 1]
                if cur == tb[i - 1, j - 1] + diff:
                    subs += diff
                    i -= 1
                    j -= 1
                    continue
            if j > 0 and cur == tb[i, j - 1] + 1:
                ins += 1
                j -= 1
            else:
                dels += 1
                i -= 1
    return int(subs), int(dels), int(ins)


cdef inline double _fmin(double a, double b) nogil:
    cdef double ma = fabs(a), mb = fabs(b)
    cdef double mag = ma if ma < mb else mb
    if (a < 0) != (b < 0):
        return -mag
    return mag


def polar_scl_decode(llr, frozen, int list_size):
    cdef double[::1] ch = np.ascontiguousarray(llr, dtype=np.float64)
    cdef unsigned char[::1] fz = np.ascontiguousarray(frozen, dtype=np.uint8)
    cdef Py_ssize_t N = ch.shape[0]
    cdef int n = int(N).bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"block length must be a power of two, got {N}")
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    if fz.shape[0] != N:
        raise ValueError("frozen mask length must equal block length")

    cdef Py_ssize_t W = 2 * N
    alpha_arr = np.zeros((list_size, W))
    alpha_tmp_arr = np.zeros((list_size, W))
    left_arr = np.zeros((list_size, W), dtype=np.uint8)
    left_tmp_arr = np.zeros((list_size, W), dtype=np.uint8)
    cur_arr = np.zeros((list_size, W), dtype=np.uint8)
    cur_tmp_arr = np.zeros((list_size, W), dtype=np.uint8)
    u_arr = np.zeros((list_size, N), dtype=np.uint8)
    u_tmp_arr = np.zeros((list_size, N), dtype=np.uint8)
    pm_arr = np.zeros(list_size)
    offs_arr = np.array([2 * N - 2 * (N >> d) for d in range(n + 1)], dtype=np.int64)
    cand_arr = np.zeros(2 * list_size)
    order_arr = np.zeros(2 * list_size, dtype=np.int64)

    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] alpha_tmp = alpha_tmp_arr
    cdef unsigned char[:, ::1] left = left_arr
    cdef unsigned char[:, ::1] left_tmp = left_tmp_arr
    cdef unsigned char[:, ::1] cur = cur_arr
    cdef unsigned char[:, ::1] cur_tmp = cur_tmp_arr
    cdef unsigned char[:, ::1] u = u_arr
    cdef unsigned char[:, ::1] u_tmp = u_tmp_arr
    cdef double[::1] pm = pm_arr
    cdef long long[::1] offs = offs_arr
    cdef double[::1] cand = cand_arr
    cdef long long[::1] order = order_arr

    cdef Py_ssize_t i, j, m, src, dst, o, p, idx, tz, k, q, best
    cdef int d, d0, path, active = 1, nc
    cdef double a, b, lam, pen0, pen1, key
    cdef long long tmpi

    for j in range(N):
        alpha[0, j] = ch[j]

    with nogil:
        for i in range(N):
            if i == 0:
                d0 = 0
            else:
                tz = 0
                while ((i >> tz) & 1) == 0:
                    tz += 1
                d0 = n - 1 - <int>tz
                m = N >> (d0 + 1)
                src = offs[d0]
                dst = offs[d0 + 1]
                for path in range(active):
                    for j in range(m):
                        a = alpha[path, src + j]
                        b = alpha[path, src + m + j]
                        if left[path, dst + j] == 0:
                            alpha[path, dst + j] = b + a
                        else:
                            alpha[path, dst + j] = b - a
                d0 += 1
            for d in range(d0, n):
                m = N >> (d + 1)
                src = offs[d]
                dst = offs[d + 1]
                for path in range(active):
                    for j in range(m):
                        alpha[path, dst + j] = _fmin(alpha[path, src + j], alpha[path, src + m + j])

            if fz[i]:
                for path in range(active):
                    lam = alpha[path, W - 2]
                    if lam < 0:
                        pm[path] += fabs(lam)
                    u[path, i] = 0
            else:
                nc = 2 * active
                for path in range(active):
                    lam = alpha[path, W - 2]
                    pen0 = fabs(lam) if lam < 0 else 0.0
                    pen1 = fabs(lam) if lam > 0 else 0.0
                    cand[2 * path] = pm[path] + pen0
                    cand[2 * path + 1] = pm[path] + pen1
                    order[2 * path] = 2 * path
                    order[2 * path + 1] = 2 * path + 1
                # stable insertion sort by candidate metric
                for q in range(1, nc):
                    tmpi = order[q]
                    key = cand[tmpi]
                    k = q - 1
                    while k >= 0 and cand[order[k]] > key:
                        order[k + 1] = order[k]
                        k -= 1
                    order[k + 1] = tmpi
                k = nc if nc < list_size else list_size
                for q in range(k):
                    path = <int>(order[q] // 2)
                    memcpy(&alpha_tmp[q, 0], &alpha[path, 0], W * sizeof(double))
                    memcpy(&left_tmp[q, 0], &left[path, 0], W)
                    memcpy(&cur_tmp[q, 0], &cur[path, 0], W)
                    memcpy(&u_tmp[q, 0], &u[path, 0], N)
                    u_tmp[q, i] = <unsigned char>(order[q] % 2)
                for q in range(k):
                    pm[q] = cand[order[q]]
                    memcpy(&alpha[q, 0], &alpha_tmp[q, 0], W * sizeof(double))
                    memcpy(&left[q, 0], &left_tmp[q, 0], W)
                    memcpy(&cur[q, 0], &cur_tmp[q, 0], W)
                    memcpy(&u[q, 0], &u_tmp[q, 0], N)
                active = <int>k

            for path in range(active):
                d = n
                idx = i
                cur[path, offs[n]] = u[path, i]
                while d > 0:
                    m = N >> d
                    o = offs[d]
                    if idx % 2 == 0:
                        for j in range(m):
                            left[path, o + j] = cur[path, o + j]
                        break
                    p = offs[d - 1]
                    for j in range(m):
                        cur[path, p + j] = left[path, o + j] ^ cur[path, o + j]
                        cur[path, p + m + j] = cur[path, o + j]
                    d -= 1
                    idx >>= 1

    best = 0
    for path in range(1, active):
        if pm[path] < pm[best]:
            best = path
    return u_arr[best].copy()
