"""Pure-Python matching kernels.

Bipartite graphs are given as adjacency rows: ``rows[i]`` is an int bitmask of
the right-hand vertices adjacent to left vertex ``i``.  The compiled module
``_ckernels`` exports the same functions with identical results; it is limited
to 64 vertices per side.
"""

import heapq

_INF = 1 << 30


def _bits(x):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _hk(rows, lefts, n_right):
    """Hopcroft-Karp on the left vertices ``lefts`` (visited in the given order)."""
    n = len(rows)
    match_l = [-1] * n
    match_r = [-1] * n_right
    dist = [_INF] * n

    def dfs(u):
        x = rows[u]
        while x:
            low = x & -x
            j = low.bit_length() - 1
            x ^= low
            w = match_r[j]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = j
                match_r[j] = u
                return True
        dist[u] = _INF
        return False

    size = 0
    while True:
        queue = []
        for u in lefts:
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            for j in _bits(rows[u]):
                w = match_r[j]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            break
        for u in lefts:
            if match_l[u] == -1 and dfs(u):
                size += 1
    return size, match_l


def hk_matching(rows, n_right):
    """Maximum matching; returns ``(size, match_left)`` with -1 for unmatched."""
    rows = [int(r) for r in rows]
    return _hk(rows, range(len(rows)), n_right)


def masked_mu(rows, mask):
    """Matching number of the graph induced on left = right = bits of ``mask``."""
    sub = [0] * len(rows)
    lefts = []
    for i in _bits(mask):
        sub[i] = rows[i] & mask
        lefts.append(i)
    return _hk(sub, lefts, len(rows))[0]


def max_deficiency(rows, n_right):
    """Largest ``|S| - |N(S)|`` over all left subsets S (Gray-code sweep).

    Ties go to the numerically smallest mask; the empty set gives 0.
    """
    n = len(rows)
    rows = [int(r) for r in rows]
    cnt = [0] * n_right
    nsize = 0
    best, best_mask = 0, 0
    for i in range(1, 1 << n):
        bit = (i & -i).bit_length() - 1
        gray = i ^ (i >> 1)
        if (gray >> bit) & 1:
            for j in _bits(rows[bit]):
                cnt[j] += 1
                if cnt[j] == 1:
                    nsize += 1
        else:
            for j in _bits(rows[bit]):
                cnt[j] -= 1
                if cnt[j] == 0:
                    nsize -= 1
        d = gray.bit_count() - nsize
        if d > best or (d == best and gray < best_mask):
            best, best_mask = d, gray
    return best, best_mask


def scan_certificates(rows_by_g, start, stop, theta_num, theta_den, keep=10):
    """Scan subset masks in ``[start, stop)`` for a Schneider-Thom certificate.

    The margin of a mask F is ``min_g (mu_g(F) * den - num * |F|)`` (a scaled
    copy of ``mu - theta |F|``).  Returns ``(first_valid_mask or -1, worst)``
    where ``worst`` lists the ``keep`` smallest ``(margin, mask)`` pairs seen.
    """
    rows_by_g = [[int(r) for r in rows] for rows in rows_by_g]
    worst = []
    for mask in range(max(start, 1), stop):
        k = mask.bit_count()
        margin = None
        for rows in rows_by_g:
            m = masked_mu(rows, mask) * theta_den - theta_num * k
            if margin is None or m < margin:
                margin = m
        if margin >= 0:
            return mask, sorted((-a, -b) for a, b in worst)
        item = (-margin, -mask)
        if len(worst) < keep:
            heapq.heappush(worst, item)
        elif item > worst[0]:
            heapq.heapreplace(worst, item)
    return -1, sorted((-a, -b) for a, b in worst)


def _critical_index(rows_t, mask, need, upper):
    """Smallest t < upper with masked_mu(rows_t[t], mask) >= need, else -1."""
    lo, hi = 0, upper - 1
    if hi < 0 or masked_mu(rows_t[hi], mask) < need:
        return -1
    while lo < hi:
        mid = (lo + hi) // 2
        if masked_mu(rows_t[mid], mask) >= need:
            hi = mid
        else:
            lo = mid + 1
    return lo


def scan_critical(rows_by_y, n_thresholds, start, stop, theta_num, theta_den, k_max):
    """Per subset size k, the mask minimizing the joint critical threshold index.

    ``rows_by_y[y][t]`` are adjacency rows for the closed threshold ``t``.  For
    a mask F of size k the index for y is the least t with
    ``mu_t(F) >= theta * k``; the joint index is the max over y.  Returns a
    list indexed by k of ``(index, mask)`` with ``(n_thresholds, 0)`` where no
    mask of that size was seen.  Ties keep the smallest mask.
    """
    rows_by_y = [[[int(r) for r in rows] for rows in per_t] for per_t in rows_by_y]
    best = [(n_thresholds, 0) for _ in range(k_max + 1)]
    for mask in range(max(start, 1), stop):
        k = mask.bit_count()
        if k > k_max:
            continue
        # mu >= theta k  <=>  mu * den >= num * k  <=>  mu >= ceil(num k / den)
        need = -((-theta_num * k) // theta_den)
        bound = best[k][0]
        joint = -1
        for per_t in rows_by_y:
            t = _critical_index(per_t, mask, need, bound)
            if t < 0:
                joint = -1
                break
            if t > joint:
                joint = t
        if joint >= 0:
            best[k] = (joint, mask)
    return best
