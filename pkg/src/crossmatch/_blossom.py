"""Dense O(N^3) primal-dual blossom solver for maximum-weight perfect matching.

The state layout follows the classic array formulation of Edmonds' weighted
blossom algorithm: vertices are 1..n, contracted blossoms reuse indices
n+1..2n, index 0 means "none". ``gu``/``gv`` hold, for every pair of top-level
nodes, the endpoints of the best original edge between them. Vertex duals are
unrestricted in sign, which is what makes the result a *perfect* matching
rather than a maximum-weight one.

All recursive steps of the textbook version are unrolled onto explicit
stacks so the whole solver compiles under numba in nopython mode.
"""

import numpy as np
from numba import njit

_INF = np.inf


@njit(cache=True, inline="always")
def _edist(lab, w, gu, gv, a, b):
    u = gu[a, b]
    v = gv[a, b]
    return lab[u] + lab[v] - 2.0 * w[u, v]


@njit(cache=True)
def _update_slack(lab, w, gu, gv, slack, u, x):
    if slack[x] == 0 or _edist(lab, w, gu, gv, u, x) < _edist(lab, w, gu, gv, slack[x], x):
        slack[x] = u


@njit(cache=True)
def _set_slack(n, lab, w, gu, gv, slack, st, S, x):
    slack[x] = 0
    for u in range(1, n + 1):
        if gu[u, x] != 0 and st[u] != x and S[st[u]] == 0:
            _update_slack(lab, w, gu, gv, slack, u, x)


@njit(cache=True)
def _q_push(n, flower, flen, q, qs, stk, x):
    # pre-order walk over the blossom tree, pushing original vertices
    top = 0
    stk[top] = x
    top += 1
    while top > 0:
        top -= 1
        y = stk[top]
        if y <= n:
            q[qs[1]] = y
            qs[1] += 1
        else:
            for i in range(flen[y] - 1, -1, -1):
                stk[top] = flower[y, i]
                top += 1


@njit(cache=True)
def _set_st(n, flower, flen, st, stk, x, b):
    top = 0
    stk[top] = x
    top += 1
    while top > 0:
        top -= 1
        y = stk[top]
        st[y] = b
        if y > n:
            for i in range(flen[y]):
                stk[top] = flower[y, i]
                top += 1


@njit(cache=True)
def _get_pr(flower, flen, b, xr):
    L = flen[b]
    pr = 0
    while flower[b, pr] != xr:
        pr += 1
    if pr % 2 == 1:
        i = 1
        j = L - 1
        while i < j:
            t = flower[b, i]
            flower[b, i] = flower[b, j]
            flower[b, j] = t
            i += 1
            j -= 1
        return L - pr
    return pr


@njit(cache=True)
def _set_match(n, gu, gv, match, flower, flen, flower_from, pstk, u, v):
    top = 0
    pstk[top, 0] = u
    pstk[top, 1] = v
    top += 1
    while top > 0:
        top -= 1
        a = pstk[top, 0]
        c = pstk[top, 1]
        match[a] = gv[a, c]
        if a <= n:
            continue
        xr = flower_from[a, gu[a, c]]
        pr = _get_pr(flower, flen, a, xr)
        for i in range(pr):
            pstk[top, 0] = flower[a, i]
            pstk[top, 1] = flower[a, i ^ 1]
            top += 1
        pstk[top, 0] = xr
        pstk[top, 1] = c
        top += 1
        L = flen[a]
        if pr > 0:
            tmp = flower[a, :L].copy()
            for i in range(L):
                flower[a, i] = tmp[(i + pr) % L]


@njit(cache=True)
def _augment(n, gu, gv, match, st, pa, flower, flen, flower_from, pstk, u, v):
    while True:
        xnv = st[match[u]]
        _set_match(n, gu, gv, match, flower, flen, flower_from, pstk, u, v)
        if xnv == 0:
            return
        _set_match(n, gu, gv, match, flower, flen, flower_from, pstk, xnv, st[pa[xnv]])
        u = st[pa[xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(match, st, pa, vis, qs, u, v):
    qs[3] += 1
    t = qs[3]
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        u, v = v, u
    return 0


@njit(cache=True)
def _add_blossom(n, lab, w, gu, gv, match, slack, st, pa, S,
                 flower, flen, flower_from, q, qs, stk, u, lca, v):
    b = n + 1
    while b <= qs[2] and st[b] != 0:
        b += 1
    if b > qs[2]:
        qs[2] += 1
    n_x = qs[2]
    lab[b] = 0.0
    S[b] = 0
    match[b] = match[lca]
    L = 0
    flower[b, L] = lca
    L += 1
    x = u
    while x != lca:
        flower[b, L] = x
        L += 1
        y = st[match[x]]
        flower[b, L] = y
        L += 1
        _q_push(n, flower, flen, q, qs, stk, y)
        x = st[pa[y]]
    i = 1
    j = L - 1
    while i < j:
        t = flower[b, i]
        flower[b, i] = flower[b, j]
        flower[b, j] = t
        i += 1
        j -= 1
    x = v
    while x != lca:
        flower[b, L] = x
        L += 1
        y = st[match[x]]
        flower[b, L] = y
        L += 1
        _q_push(n, flower, flen, q, qs, stk, y)
        x = st[pa[y]]
    flen[b] = L
    _set_st(n, flower, flen, st, stk, b, b)
    for x in range(1, n_x + 1):
        gu[b, x] = 0
        gv[b, x] = 0
        gu[x, b] = 0
        gv[x, b] = 0
    for x in range(1, n + 1):
        flower_from[b, x] = 0
    for i in range(L):
        xs = flower[b, i]
        for x in range(1, n_x + 1):
            if gu[xs, x] != 0 and (
                gu[b, x] == 0
                or _edist(lab, w, gu, gv, xs, x) < _edist(lab, w, gu, gv, b, x)
            ):
                gu[b, x] = gu[xs, x]
                gv[b, x] = gv[xs, x]
                gu[x, b] = gu[x, xs]
                gv[x, b] = gv[x, xs]
        for x in range(1, n + 1):
            if flower_from[xs, x] != 0:
                flower_from[b, x] = xs
    _set_slack(n, lab, w, gu, gv, slack, st, S, b)


@njit(cache=True)
def _expand_blossom(n, lab, w, gu, gv, slack, st, pa, S,
                    flower, flen, flower_from, q, qs, stk, b):
    L = flen[b]
    for i in range(L):
        _set_st(n, flower, flen, st, stk, flower[b, i], flower[b, i])
    xr = flower_from[b, gu[b, pa[b]]]
    pr = _get_pr(flower, flen, b, xr)
    for i in range(0, pr, 2):
        xs = flower[b, i]
        xns = flower[b, i + 1]
        pa[xs] = gu[xns, xs]
        S[xs] = 1
        S[xns] = 0
        slack[xs] = 0
        _set_slack(n, lab, w, gu, gv, slack, st, S, xns)
        _q_push(n, flower, flen, q, qs, stk, xns)
    S[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, L):
        xs = flower[b, i]
        S[xs] = -1
        _set_slack(n, lab, w, gu, gv, slack, st, S, xs)
    st[b] = 0


@njit(cache=True)
def _on_found_edge(n, lab, w, gu, gv, match, slack, st, pa, S, vis,
                   flower, flen, flower_from, q, qs, stk, pstk, a, c):
    eu = gu[a, c]
    ev = gv[a, c]
    u = st[eu]
    v = st[ev]
    if S[v] == -1:
        pa[v] = eu
        S[v] = 1
        nu = st[match[v]]
        slack[v] = 0
        slack[nu] = 0
        S[nu] = 0
        _q_push(n, flower, flen, q, qs, stk, nu)
    elif S[v] == 0:
        lca = _get_lca(match, st, pa, vis, qs, u, v)
        if lca == 0:
            _augment(n, gu, gv, match, st, pa, flower, flen, flower_from, pstk, u, v)
            _augment(n, gu, gv, match, st, pa, flower, flen, flower_from, pstk, v, u)
            return True
        _add_blossom(n, lab, w, gu, gv, match, slack, st, pa, S,
                     flower, flen, flower_from, q, qs, stk, u, lca, v)
    return False


@njit(cache=True)
def _stage(n, lab, w, gu, gv, match, slack, st, pa, S, vis,
           flower, flen, flower_from, q, qs, stk, pstk, eps):
    """Grow alternating trees until one augmentation succeeds."""
    n_x = qs[2]
    for x in range(1, n_x + 1):
        S[x] = -1
        slack[x] = 0
    qs[0] = 0
    qs[1] = 0
    for x in range(1, n_x + 1):
        if st[x] == x and match[x] == 0:
            pa[x] = 0
            S[x] = 0
            _q_push(n, flower, flen, q, qs, stk, x)
    if qs[1] == 0:
        return False
    while True:
        while qs[0] < qs[1]:
            u = q[qs[0]]
            qs[0] += 1
            su = st[u]
            if S[su] == 1:
                continue
            lu = lab[u]
            wu = w[u]
            for v in range(1, n + 1):
                sv = st[v]
                if v == u or sv == su:
                    continue
                dd = lu + lab[v] - 2.0 * wu[v]
                if dd <= eps:
                    if _on_found_edge(n, lab, w, gu, gv, match, slack, st, pa, S, vis,
                                      flower, flen, flower_from, q, qs, stk, pstk, u, v):
                        return True
                    su = st[u]
                    lu = lab[u]
                else:
                    # hand-inlined slack update; u's best edge into sv may not be (u, v)
                    if sv != v:
                        dd = _edist(lab, w, gu, gv, u, sv)
                    sx = slack[sv]
                    if sx == 0 or dd < _edist(lab, w, gu, gv, sx, sv):
                        slack[sv] = u
        n_x = qs[2]
        d = _INF
        for b in range(n + 1, n_x + 1):
            if st[b] == b and S[b] == 1:
                d = min(d, lab[b] / 2.0)
        for x in range(1, n_x + 1):
            if st[x] == x and slack[x] != 0:
                if S[x] == -1:
                    d = min(d, _edist(lab, w, gu, gv, slack[x], x))
                elif S[x] == 0:
                    d = min(d, _edist(lab, w, gu, gv, slack[x], x) / 2.0)
        if d == _INF:
            return False
        if d < 0.0:
            d = 0.0
        for u in range(1, n + 1):
            s = S[st[u]]
            if s == 0:
                lab[u] -= d
            elif s == 1:
                lab[u] += d
        for b in range(n + 1, n_x + 1):
            if st[b] == b:
                if S[b] == 0:
                    lab[b] += 2.0 * d
                elif S[b] == 1:
                    lab[b] -= 2.0 * d
        qs[0] = 0
        qs[1] = 0
        for x in range(1, n_x + 1):
            if (st[x] == x and slack[x] != 0 and st[slack[x]] != x
                    and _edist(lab, w, gu, gv, slack[x], x) <= eps):
                if _on_found_edge(n, lab, w, gu, gv, match, slack, st, pa, S, vis,
                                  flower, flen, flower_from, q, qs, stk, pstk, slack[x], x):
                    return True
        for b in range(n + 1, qs[2] + 1):
            if st[b] == b and S[b] == 1 and lab[b] <= eps:
                _expand_blossom(n, lab, w, gu, gv, slack, st, pa, S,
                                flower, flen, flower_from, q, qs, stk, b)


@njit(cache=True, nogil=True)
def max_weight_perfect_matching(weights, eps):
    """Return ``mate`` (0-based) maximizing total weight over perfect matchings.

    ``weights`` is a symmetric (n, n) float64 array with n even; the diagonal
    is ignored. Edges whose reduced cost is within ``eps`` of zero count as
    tight. Returns an int64 array with ``mate[i] == -1`` only if no perfect
    matching was found (cannot happen on a complete graph).
    """
    n = weights.shape[0]
    cap = 2 * n + 1
    w = np.zeros((n + 1, n + 1))
    w[1:, 1:] = weights
    gu = np.zeros((cap, cap), np.int32)
    gv = np.zeros((cap, cap), np.int32)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if u != v:
                gu[u, v] = u
                gv[u, v] = v
    lab = np.zeros(cap)
    # lab[u] + lab[v] >= 2 w[u, v] holds with each vertex at its best edge
    for u in range(1, n + 1):
        best = -_INF
        for v in range(1, n + 1):
            if u != v and w[u, v] > best:
                best = w[u, v]
        lab[u] = best
    match = np.zeros(cap, np.int64)
    slack = np.zeros(cap, np.int64)
    st = np.zeros(cap, np.int64)
    pa = np.zeros(cap, np.int64)
    S = np.zeros(cap, np.int64)
    vis = np.zeros(cap, np.int64)
    flower = np.zeros((cap, n + 1), np.int64)
    flen = np.zeros(cap, np.int64)
    flower_from = np.zeros((cap, n + 1), np.int64)
    for u in range(n + 1):
        st[u] = u
    for u in range(1, n + 1):
        flower_from[u, u] = u
    q = np.zeros(4 * cap, np.int64)
    # qs: queue head, queue tail, n_x (highest node index in use), lca stamp
    qs = np.zeros(4, np.int64)
    qs[2] = n
    stk = np.zeros(4 * cap, np.int64)
    pstk = np.zeros((4 * cap, 2), np.int64)
    while _stage(n, lab, w, gu, gv, match, slack, st, pa, S, vis,
                 flower, flen, flower_from, q, qs, stk, pstk, eps):
        pass
    mate = np.empty(n, np.int64)
    for u in range(1, n + 1):
        mate[u - 1] = match[u] - 1
    return mate
