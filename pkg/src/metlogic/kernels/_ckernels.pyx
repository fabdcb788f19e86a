# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled matching kernels (at most 64 vertices per side).

Mirrors ``_pykernels`` function for function; results are identical.
"""

from libc.stdint cimport uint64_t

cdef int INF = 1 << 30


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _lowbit(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef inline int _popcount(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef struct HK:
    int n
    int n_right
    uint64_t rows[64]
    int match_l[64]
    int match_r[64]
    int dist[64]


cdef bint _dfs(HK* s, int u) nogil:
    cdef uint64_t x = s.rows[u]
    cdef int j, w
    while x:
        j = _lowbit(x)
        x &= x - 1
        w = s.match_r[j]
        if w == -1 or (s.dist[w] == s.dist[u] + 1 and _dfs(s, w)):
            s.match_l[u] = j
            s.match_r[j] = u
            return True
    s.dist[u] = INF
    return False


cdef int _hk(HK* s, uint64_t lefts) nogil:
    """Hopcroft-Karp over the left vertices in ``lefts`` (ascending order)."""
    cdef int queue[64]
    cdef int head, tail, u, j, w, size = 0
    cdef uint64_t x, l
    cdef bint found
    for u in range(s.n):
        s.match_l[u] = -1
    for j in range(s.n_right):
        s.match_r[j] = -1
    while True:
        tail = 0
        l = lefts
        while l:
            u = _lowbit(l)
            l &= l - 1
            if s.match_l[u] == -1:
                s.dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                s.dist[u] = INF
        found = False
        head = 0
        while head < tail:
            u = queue[head]
            head += 1
            x = s.rows[u]
            while x:
                j = _lowbit(x)
                x &= x - 1
                w = s.match_r[j]
                if w == -1:
                    found = True
                elif s.dist[w] == INF:
                    s.dist[w] = s.dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if not found:
            break
        l = lefts
        while l:
            u = _lowbit(l)
            l &= l - 1
            if s.match_l[u] == -1 and _dfs(s, u):
                size += 1
    return size


cdef int _masked_mu(HK* s, const uint64_t* rows, int n, uint64_t mask) nogil:
    cdef int i
    s.n = n
    s.n_right = n
    for i in range(n):
        s.rows[i] = rows[i] & mask if (mask >> i) & 1 else 0
    return _hk(s, mask)


def hk_matching(rows, int n_right):
    """Maximum matching; returns ``(size, match_left)`` with -1 for unmatched."""
    cdef HK s
    cdef int i, n = len(rows)
    if n > 64 or n_right > 64:
        raise ValueError("compiled kernel handles at most 64 vertices per side")
    s.n = n
    s.n_right = n_right
    for i in range(n):
        s.rows[i] = <uint64_t>int(rows[i])
    cdef uint64_t lefts = (<uint64_t>1 << n) - 1 if n < 64 else <uint64_t>0xFFFFFFFFFFFFFFFF
    cdef int size = _hk(&s, lefts)
    return size, [s.match_l[i] for i in range(n)]


def masked_mu(rows, mask):
    """Matching number of the graph induced on left = right = bits of ``mask``."""
    cdef HK s
    cdef uint64_t buf[64]
    cdef int i, n = len(rows)
    if n > 64:
        raise ValueError("compiled kernel handles at most 64 vertices per side")
    for i in range(n):
        buf[i] = <uint64_t>int(rows[i])
    return _masked_mu(&s, buf, n, <uint64_t>int(mask))


def max_deficiency(rows, int n_right):
    """Largest ``|S| - |N(S)|`` over all left subsets S (Gray-code sweep)."""
    cdef int n = len(rows)
    cdef uint64_t buf[64]
    cdef int cnt[64]
    cdef int i, j, bit, d, nsize = 0, best = 0
    cdef uint64_t it, gray, x, best_mask = 0, stop
    if n > 40 or n_right > 64:
        raise ValueError("compiled deficiency sweep handles at most 40 left vertices")
    for i in range(n):
        buf[i] = <uint64_t>int(rows[i])
    for j in range(64):
        cnt[j] = 0
    stop = (<uint64_t>1) << n
    with nogil:
        it = 1
        while it < stop:
            bit = _lowbit(it)
            gray = it ^ (it >> 1)
            x = buf[bit]
            if (gray >> bit) & 1:
                while x:
                    j = _lowbit(x)
                    x &= x - 1
                    cnt[j] += 1
                    if cnt[j] == 1:
                        nsize += 1
            else:
                while x:
                    j = _lowbit(x)
                    x &= x - 1
                    cnt[j] -= 1
                    if cnt[j] == 0:
                        nsize -= 1
            d = _popcount(gray) - nsize
            if d > best or (d == best and gray < best_mask):
                best = d
                best_mask = gray
            it += 1
    return best, int(best_mask)


def scan_certificates(rows_by_g, start, stop, long long theta_num, long long theta_den, int keep=10):
    """Scan subset masks in ``[start, stop)`` for a Schneider-Thom certificate."""
    cdef int ng = len(rows_by_g)
    cdef int n = len(rows_by_g[0]) if ng else 0
    cdef int g, i, k
    cdef HK s
    cdef uint64_t[:, :] data
    cdef uint64_t mask, lo = max(int(start), 1), hi = int(stop)
    cdef long long m, margin
    if n > 64:
        raise ValueError("compiled kernel handles at most 64 ground elements")
    import numpy as np
    arr = np.zeros((max(ng, 1), max(n, 1)), dtype=np.uint64)
    for g in range(ng):
        for i in range(n):
            arr[g, i] = int(rows_by_g[g][i])
    data = arr
    worst = []
    mask = lo
    while mask < hi:
        k = _popcount(mask)
        margin = 0
        for g in range(ng):
            m = <long long>_masked_mu(&s, &data[g, 0], n, mask) * theta_den - theta_num * k
            if g == 0 or m < margin:
                margin = m
        if margin >= 0:
            return int(mask), sorted(worst)
        if len(worst) < keep:
            worst.append((margin, int(mask)))
            worst.sort()
        elif margin < worst[keep - 1][0]:
            worst[keep - 1] = (margin, int(mask))
            worst.sort()
        mask += 1
    return -1, sorted(worst)


def scan_critical(rows_by_y, int n_thresholds, start, stop,
                  long long theta_num, long long theta_den, int k_max):
    """Per subset size k, the mask minimizing the joint critical threshold index."""
    cdef int ny = len(rows_by_y)
    cdef int n = len(rows_by_y[0][0]) if ny and n_thresholds else 0
    cdef int y, t, i, k, lo_t, hi_t, mid, joint, bound
    cdef long long need
    cdef HK s
    cdef uint64_t[:, :, :] data
    cdef uint64_t mask, lo = max(int(start), 1), hi = int(stop)
    if n > 64 or k_max > 64:
        raise ValueError("compiled kernel handles at most 64 ground elements")
    import numpy as np
    arr = np.zeros((max(ny, 1), max(n_thresholds, 1), max(n, 1)), dtype=np.uint64)
    for y in range(ny):
        for t in range(n_thresholds):
            for i in range(n):
                arr[y, t, i] = int(rows_by_y[y][t][i])
    data = arr
    cdef int[65] bt
    cdef uint64_t[65] bm
    for k in range(k_max + 1):
        bt[k] = n_thresholds
        bm[k] = 0
    mask = lo
    with nogil:
        while mask < hi:
            k = _popcount(mask)
            if k <= k_max:
                need = (theta_num * k + theta_den - 1) // theta_den
                bound = bt[k]
                joint = -1
                for y in range(ny):
                    hi_t = bound - 1
                    if hi_t < 0 or _masked_mu(&s, &data[y, hi_t, 0], n, mask) < need:
                        joint = -1
                        break
                    lo_t = 0
                    while lo_t < hi_t:
                        mid = (lo_t + hi_t) // 2
                        if _masked_mu(&s, &data[y, mid, 0], n, mask) >= need:
                            hi_t = mid
                        else:
                            lo_t = mid + 1
                    if lo_t > joint:
                        joint = lo_t
                if joint >= 0:
                    bt[k] = joint
                    bm[k] = mask
            mask += 1
    return [(bt[k], int(bm[k])) for k in range(k_max + 1)]
