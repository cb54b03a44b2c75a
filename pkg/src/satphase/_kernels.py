"""Hot numeric kernels: DPLL search, GF(2) elimination, brute-force scan.

Each kernel is a numpy-typed Python function compiled with numba's
``@njit`` at import time.  Setting the environment variable
``SATPHASE_NUMBA=0`` (or numba being unavailable) selects the uncompiled
pure-Python/NumPy path instead; results are identical either way, only
speed differs.  ``benchmarks/bench_kernels.py`` times the two paths
against each other.

Kernels are self-contained (helpers are nested) so the fallback never
calls into compiled code.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("SATPHASE_NUMBA", "1").strip().lower()
_WANT_JIT = _env not in ("0", "false", "no", "off")

if _WANT_JIT:
    try:
        from numba import njit as _njit

        def _jit(fn):
            return _njit(cache=True)(fn)

        JIT_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        JIT_ENABLED = False

        def _jit(fn):
            return fn
else:
    JIT_ENABLED = False

    def _jit(fn):
        return fn


def _dpll_search(lits, clause_start, n, budget, heuristic):
    """Complete DPLL: unit propagation, pure-literal elimination.

    heuristic 0: lowest-index unassigned variable still occurring, value
    false first (the reproducible baseline rule).  1: max occurrence
    count, false first.  2: max occurrences among minimum-size active
    clauses, product-weighted, trying the better-supported value first.
    Returns (status, assignment, branch_nodes, max_depth) with status
    0=UNSAT, 1=SAT, 2=node budget hit; budget < 0 means unlimited.
    """
    m = clause_start.size - 1
    L = lits.size

    def lit_index(l):
        # literal -> occurrence slot: 2*(v-1) + (neg ? 1 : 0)
        if l > 0:
            return 2 * (l - 1)
        return 2 * (-l - 1) + 1

    occ_cnt = np.zeros(2 * n + 1, np.int32)
    for p in range(L):
        occ_cnt[lit_index(lits[p])] += 1
    occ_start = np.zeros(2 * n + 1, np.int32)
    for i in range(2 * n):
        occ_start[i + 1] = occ_start[i] + occ_cnt[i]
    occ_cl = np.zeros(L, np.int32)
    fill = occ_start[: 2 * n].copy()
    for ci in range(m):
        for p in range(clause_start[ci], clause_start[ci + 1]):
            idx = lit_index(lits[p])
            occ_cl[fill[idx]] = ci
            fill[idx] += 1

    assign = np.full(n + 1, -1, np.int8)
    sat_cnt = np.zeros(m, np.int32)
    unass = np.zeros(m, np.int32)
    cnt = occ_cnt[: 2 * n].copy()
    trail = np.zeros(n + 1, np.int32)
    queue = np.zeros(2 * m + n + 2, np.int32)

    def propagate(trail_len, qlen):
        # make queue[0:qlen] true with unit propagation to fixpoint;
        # counter updates always complete so the trail stays undoable
        qhead = 0
        conflict = False
        while qhead < qlen and not conflict:
            lit = queue[qhead]
            qhead += 1
            v = lit if lit > 0 else -lit
            val = 1 if lit > 0 else 0
            if assign[v] != -1:
                if assign[v] != val:
                    conflict = True
                continue
            assign[v] = val
            trail[trail_len] = v
            trail_len += 1
            tidx = 2 * (v - 1) + (0 if val == 1 else 1)
            fidx = 2 * (v - 1) + (1 if val == 1 else 0)
            for p in range(occ_start[tidx], occ_start[tidx + 1]):
                ci = occ_cl[p]
                sat_cnt[ci] += 1
                if sat_cnt[ci] == 1:
                    for q in range(clause_start[ci], clause_start[ci + 1]):
                        cnt[lit_index(lits[q])] -= 1
            for p in range(occ_start[fidx], occ_start[fidx + 1]):
                ci = occ_cl[p]
                unass[ci] -= 1
                if sat_cnt[ci] == 0:
                    if unass[ci] == 0:
                        conflict = True
                    elif unass[ci] == 1:
                        for q in range(clause_start[ci], clause_start[ci + 1]):
                            l2 = lits[q]
                            v2 = l2 if l2 > 0 else -l2
                            if assign[v2] == -1:
                                queue[qlen] = l2
                                qlen += 1
                                break
        return conflict, trail_len

    def undo_to(trail_len, point):
        while trail_len > point:
            trail_len -= 1
            v = trail[trail_len]
            val = assign[v]
            tidx = 2 * (v - 1) + (0 if val == 1 else 1)
            fidx = 2 * (v - 1) + (1 if val == 1 else 0)
            for p in range(occ_start[tidx], occ_start[tidx + 1]):
                ci = occ_cl[p]
                sat_cnt[ci] -= 1
                if sat_cnt[ci] == 0:
                    for q in range(clause_start[ci], clause_start[ci + 1]):
                        cnt[lit_index(lits[q])] += 1
            for p in range(occ_start[fidx], occ_start[fidx + 1]):
                unass[occ_cl[p]] += 1
            assign[v] = -1
        return trail_len

    def pure_fixpoint(trail_len):
        # pure assignments only satisfy clauses: no conflicts, no units
        changed = True
        while changed:
            changed = False
            for v in range(1, n + 1):
                if assign[v] == -1:
                    pos = cnt[2 * (v - 1)]
                    neg = cnt[2 * (v - 1) + 1]
                    if pos + neg > 0 and (pos == 0 or neg == 0):
                        queue[0] = v if neg == 0 else -v
                        _, trail_len = propagate(trail_len, 1)
                        changed = True
        return trail_len

    moms = np.zeros(2 * n, np.int32)

    def pick_branch():
        # returns (variable, first value to try); 0 when none occurs
        if heuristic == 0:
            for v in range(1, n + 1):
                if assign[v] == -1 and cnt[2 * (v - 1)] + cnt[2 * (v - 1) + 1] > 0:
                    return v, 0
            return 0, 0
        if heuristic == 1:
            best = 0
            best_c = 0
            for v in range(1, n + 1):
                if assign[v] == -1:
                    c = cnt[2 * (v - 1)] + cnt[2 * (v - 1) + 1]
                    if c > best_c:
                        best = v
                        best_c = c
            return best, 0
        # heuristic 2: occurrences in minimum-size active clauses,
        # product-weighted across polarities
        min_sz = n + 1
        for ci in range(m):
            if sat_cnt[ci] == 0 and unass[ci] < min_sz:
                min_sz = unass[ci]
        if min_sz == n + 1:
            return 0, 0
        for i in range(2 * n):
            moms[i] = 0
        for ci in range(m):
            if sat_cnt[ci] == 0 and unass[ci] == min_sz:
                for q in range(clause_start[ci], clause_start[ci + 1]):
                    l = lits[q]
                    v = l if l > 0 else -l
                    if assign[v] == -1:
                        moms[2 * (v - 1) + (0 if l > 0 else 1)] += 1
        best = 0
        best_score = -1
        first = 0
        for v in range(1, n + 1):
            if assign[v] == -1:
                p = moms[2 * (v - 1)]
                q = moms[2 * (v - 1) + 1]
                if p + q == 0:
                    continue
                score = p * q * 1024 + p + q
                if score > best_score:
                    best = v
                    best_score = score
                    first = 1 if p >= q else 0  # satisfy more short clauses
        return best, first

    dec_save = np.zeros(n + 2, np.int32)
    dec_var = np.zeros(n + 2, np.int32)
    dec_first = np.zeros(n + 2, np.int8)
    dec_phase = np.zeros(n + 2, np.int8)
    stack = 0
    tree_size = 0
    max_depth = 0
    trail_len = 0

    conflict = False
    qlen = 0
    for ci in range(m):
        size = clause_start[ci + 1] - clause_start[ci]
        unass[ci] = size
        if size == 0:
            conflict = True
        elif size == 1:
            queue[qlen] = lits[clause_start[ci]]
            qlen += 1
    if not conflict and qlen > 0:
        conflict, trail_len = propagate(trail_len, qlen)
    if conflict:
        return 0, assign, 0, 0

    while True:
        trail_len = pure_fixpoint(trail_len)
        v, first = pick_branch()
        if v == 0:
            for i in range(1, n + 1):
                if assign[i] == -1:
                    assign[i] = 0
            return 1, assign, tree_size, max_depth
        if budget >= 0 and tree_size >= budget:
            return 2, assign, tree_size, max_depth
        tree_size += 1
        dec_save[stack] = trail_len
        dec_var[stack] = v
        dec_first[stack] = first
        dec_phase[stack] = 0
        stack += 1
        if stack > max_depth:
            max_depth = stack
        queue[0] = v if first == 1 else -v
        conflict, trail_len = propagate(trail_len, 1)
        while conflict:
            while stack > 0 and dec_phase[stack - 1] == 1:
                trail_len = undo_to(trail_len, dec_save[stack - 1])
                stack -= 1
            if stack == 0:
                return 0, assign, tree_size, max_depth
            trail_len = undo_to(trail_len, dec_save[stack - 1])
            dec_phase[stack - 1] = 1
            second = 1 - dec_first[stack - 1]
            queue[0] = dec_var[stack - 1] if second == 1 else -dec_var[stack - 1]
            conflict, trail_len = propagate(trail_len, 1)


def _gf2_solve(rows, rhs, n):
    """In-place Gaussian elimination on bit-packed rows (uint64 words).

    Returns (status, rank, ops, x): status 1 with x a solution (free
    variables zero), else 0 when some zero row keeps right-hand side 1.
    ops counts logical bit operations, n+1 per row update, regardless of
    the machine-word parallelism actually used.
    """
    m = rows.shape[0]
    W = rows.shape[1]
    one = np.uint64(1)
    pivot_col = np.full(m, -1, np.int64)
    rank = 0
    ops = 0
    for col in range(n):
        w = col >> 6
        b = np.uint64(col & 63)
        piv = -1
        for r in range(rank, m):
            if (rows[r, w] >> b) & one:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(W):
                tmp = rows[rank, j]
                rows[rank, j] = rows[piv, j]
                rows[piv, j] = tmp
            tmp2 = rhs[rank]
            rhs[rank] = rhs[piv]
            rhs[piv] = tmp2
        for r in range(rank + 1, m):
            if (rows[r, w] >> b) & one:
                for j in range(W):
                    rows[r, j] ^= rows[rank, j]
                rhs[r] ^= rhs[rank]
                ops += n + 1
        pivot_col[rank] = col
        rank += 1
        if rank == m:
            break
    x = np.zeros(n, np.int8)
    for r in range(rank, m):
        if rhs[r] == 1:
            return 0, rank, ops, x
    xw = np.zeros(W, np.uint64)
    for i in range(rank - 1, -1, -1):
        acc = np.uint64(0)
        for j in range(W):
            acc ^= rows[i, j] & xw[j]
        acc ^= acc >> np.uint64(32)
        acc ^= acc >> np.uint64(16)
        acc ^= acc >> np.uint64(8)
        acc ^= acc >> np.uint64(4)
        acc ^= acc >> np.uint64(2)
        acc ^= acc >> np.uint64(1)
        val = int(rhs[i]) ^ (int(acc) & 1)
        ops += n + 1
        if val == 1:
            col = pivot_col[i]
            x[col] = 1
            xw[col >> 6] |= one << np.uint64(col & 63)
    return 1, rank, ops, x


def _brute_first_sat(lits, clause_start, n):
    """Lowest assignment code satisfying all clauses, or -1.  Bit i of
    the code is the value of variable i+1."""
    m = clause_start.size - 1
    total = 1 << n
    for code in range(total):
        ok = True
        for ci in range(m):
            csat = False
            for p in range(clause_start[ci], clause_start[ci + 1]):
                l = lits[p]
                v = l if l > 0 else -l
                bit = (code >> (v - 1)) & 1
                if (l > 0 and bit == 1) or (l < 0 and bit == 0):
                    csat = True
                    break
            if not csat:
                ok = False
                break
        if ok:
            return code
    return -1


def _project_models(models, subset, k):
    """Bitmask over {0,1}^k of the patterns the model list realises on
    the given ascending variable subset (k <= 6)."""
    seen = np.uint64(0)
    one = np.uint64(1)
    for idx in range(models.size):
        a = models[idx]
        code = 0
        for j in range(k):
            code |= ((a >> (subset[j] - 1)) & 1) << j
        seen |= one << np.uint64(code)
    return seen


def _subset_density_scan(edge_masks, p, q):
    """Scan all nonempty subformulas (subsets of edges, vertex sets as
    single-word bitmasks): returns the maximizer of |G|/|vars(G)| and of
    p*|G| - q*|vars(G)|, lowest subset id winning ties.

    Output: (cnt, nvars, subset_id, best_delta_num, delta_subset_id).
    """
    m = edge_masks.size
    total = 1 << m

    def popcount64(x):
        c = 0
        while x:
            x &= x - np.uint64(1)
            c += 1
        return c

    var_mask = np.zeros(total, np.uint64)
    size = np.zeros(total, np.int8)
    best_cnt = 0
    best_var = 1
    best_sub = 0
    best_delta = np.int64(-(1 << 62))
    delta_sub = 0
    for s in range(1, total):
        low = s & (s - 1)
        t = s & (-s)
        j = 0
        while t > 1:
            t >>= 1
            j += 1
        vm = var_mask[low] | edge_masks[j]
        var_mask[s] = vm
        cnt = size[low] + 1
        size[s] = cnt
        nv = popcount64(vm)
        if cnt * best_var > best_cnt * nv:
            best_cnt = cnt
            best_var = nv
            best_sub = s
        delta = p * cnt - q * nv
        if delta > best_delta:
            best_delta = delta
            delta_sub = s
    return best_cnt, best_var, best_sub, best_delta, delta_sub


def _xy_sparse_scan(edge_masks, n, s_max, yp, yq):
    """First vertex set S (ascending bitmask order) with |S| <= s_max
    and more than (yp/yq)*|S| edges inside; 0 when none exists."""
    m = edge_masks.size
    total = 1 << n
    for S in range(1, total):
        sz = 0
        t = S
        while t:
            t &= t - 1
            sz += 1
        if sz > s_max:
            continue
        Su = np.uint64(S)
        cnt = 0
        for j in range(m):
            if edge_masks[j] & ~Su == np.uint64(0):
                cnt += 1
        if cnt * yq > yp * sz:
            return S
    return 0


def _subset_presence(models, subsets, k):
    """Per row of ``subsets`` (ascending k-tuples of variables, k <= 6),
    the bitmask of realised patterns over the model list."""
    num = subsets.shape[0]
    out = np.zeros(num, np.uint64)
    one = np.uint64(1)
    for s in range(num):
        seen = np.uint64(0)
        for idx in range(models.size):
            a = models[idx]
            code = 0
            for j in range(k):
                code |= ((a >> (subsets[s, j] - 1)) & 1) << j
            seen |= one << np.uint64(code)
        out[s] = seen
    return out


# compiled entry points (or the same functions, uncompiled)
dpll_search = _jit(_dpll_search)
gf2_solve = _jit(_gf2_solve)
brute_first_sat = _jit(_brute_first_sat)
project_models = _jit(_project_models)
subset_presence = _jit(_subset_presence)
subset_density_scan = _jit(_subset_density_scan)
xy_sparse_scan = _jit(_xy_sparse_scan)

# always-pure handles for the benchmark and path-equivalence tests
dpll_search_py = _dpll_search
gf2_solve_py = _gf2_solve
brute_first_sat_py = _brute_first_sat
project_models_py = _project_models
