"""Pure-Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation so that both backends
produce bit-identical results. They are used when the compiled extension is
unavailable, or when ``DEEPSC_SR_PURE=1`` is set.
"""

import numpy as np

NEG_INF = -np.inf


def ctc_forward_backward(log_probs, ext):
    """Log-space CTC forward and backward variables.

    Args:
        log_probs: (L, C) float64 array of log token probabilities.
        ext: int64 array of the blank-interleaved target, length 2K+1.

    Returns:
        (log_alpha, log_beta), each (L, 2K+1). Both include the emission at
        their own time step.
    """
    log_probs = np.ascontiguousarray(log_probs, dtype=np.float64)
    ext = np.ascontiguousarray(ext, dtype=np.int64)
    T = log_probs.shape[0]
    S = ext.shape[0]
    alpha = np.full((T, S), NEG_INF)
    beta = np.full((T, S), NEG_INF)
    if T == 0:
        return alpha, beta

    emit = log_probs[:, ext]  # (T, S)
    # s may receive from s-2 only for a non-blank label differing from s-2
    skip = np.zeros(S, dtype=bool)
    if S > 2:
        skip[2:] = (ext[2:] != ext[0]) & (ext[2:] != ext[:-2])

    alpha[0, 0] = emit[0, 0]
    if S > 1:
        alpha[0, 1] = emit[0, 1]
    for t in range(1, T):
        prev = alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        alpha[t] = acc + emit[t]

    beta[T - 1, S - 1] = emit[T - 1, S - 1]
    if S > 1:
        beta[T - 1, S - 2] = emit[T - 1, S - 2]
    for t in range(T - 2, -1, -1):
        nxt = beta[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        beta[t] = acc + emit[t]
    return alpha, beta


def edit_counts(ref, hyp):
    """Minimum edit alignment counts (S, D, I) between two int sequences.

    Backtrace prefers the diagonal, then insertion, then deletion.
    """
    ref = [int(v) for v in ref]
    hyp = [int(v) for v in hyp]
    n, m = len(ref), len(hyp)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        row, up = table[i], table[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            best = up[j - 1] + (r != hyp[j - 1])
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            if up[j] + 1 < best:
                best = up[j] + 1
            row[j] = best

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        cur = table[i][j]
        if i > 0 and j > 0 and cur == table[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            subs += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif j > 0 and cur == table[i][j - 1] + 1:
            ins += 1
            j -= 1
        else:
            dels += 1
            i -= 1
    return subs, dels, ins


def _f(a, b):
    mag = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) != (b < 0), -mag, mag)


def polar_scl_decode(llr, frozen, list_size):
    """Successive-cancellation list decoding of a natural-order polar code.

    Args:
        llr: (N,) channel LLRs, positive favouring bit 0.
        frozen: (N,) uint8 mask, 1 where the input bit is frozen to 0.
        list_size: number of surviving paths.

    Returns:
        (N,) uint8 array of decided input bits u for the best path.
    """
    llr = np.ascontiguousarray(llr, dtype=np.float64)
    frozen = np.ascontiguousarray(frozen, dtype=np.uint8)
    N = llr.shape[0]
    n = N.bit_length() - 1
    if N < 1 or (1 << n) != N:
        raise ValueError(f"block length must be a power of two, got {N}")
    if list_size < 1:
        raise ValueError("list_size must be >= 1")

    offs = [2 * N - 2 * (N >> d) for d in range(n + 1)]
    alpha = np.zeros((list_size, 2 * N))
    left = np.zeros((list_size, 2 * N), dtype=np.uint8)
    cur = np.zeros((list_size, 2 * N), dtype=np.uint8)
    u = np.zeros((list_size, N), dtype=np.uint8)
    pm = np.zeros(list_size)
    alpha[0, :N] = llr
    active = 1

    for i in range(N):
        if i == 0:
            d0 = 0
        else:
            tz = (i & -i).bit_length() - 1
            d0 = n - 1 - tz
            m = N >> (d0 + 1)
            src, dst = offs[d0], offs[d0 + 1]
            a = alpha[:active, src:src + m]
            b = alpha[:active, src + m:src + 2 * m]
            c = left[:active, dst:dst + m]
            alpha[:active, dst:dst + m] = np.where(c == 0, b + a, b - a)
            d0 += 1
        for d in range(d0, n):
            m = N >> (d + 1)
            src, dst = offs[d], offs[d + 1]
            alpha[:active, dst:dst + m] = _f(
                alpha[:active, src:src + m], alpha[:active, src + m:src + 2 * m]
            )
        lam = alpha[:active, 2 * N - 2]

        if frozen[i]:
            pm[:active] += np.where(lam < 0, np.abs(lam), 0.0)
            u[:active, i] = 0
        else:
            # candidate order: path-major, bit 0 before bit 1
            cand = np.empty(2 * active)
            cand[0::2] = pm[:active] + np.where(lam < 0, np.abs(lam), 0.0)
            cand[1::2] = pm[:active] + np.where(lam > 0, np.abs(lam), 0.0)
            order = np.argsort(cand, kind="stable")[: min(2 * active, list_size)]
            parents = order // 2
            bits = (order % 2).astype(np.uint8)
            k = len(order)
            alpha[:k] = alpha[parents]
            left[:k] = left[parents]
            cur[:k] = cur[parents]
            u[:k] = u[parents]
            pm[:k] = cand[order]
            u[:k, i] = bits
            active = k

        # partial-sum propagation
        d = n
        idx = i
        cur[:active, offs[n]] = u[:active, i]
        while d > 0:
            m = N >> d
            o = offs[d]
            if idx % 2 == 0:
                left[:active, o:o + m] = cur[:active, o:o + m]
                break
            p = offs[d - 1]
            cur[:active, p:p + m] = left[:active, o:o + m] ^ cur[:active, o:o + m]
            cur[:active, p + m:p + 2 * m] = cur[:active, o:o + m]
            d -= 1
            idx >>= 1

    best = int(np.argmin(pm[:active]))
    return u[best].copy()
