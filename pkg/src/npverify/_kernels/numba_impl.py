"""Numba-compiled kernels; same contracts as ``numpy_impl``."""

import numpy as np
from numba import njit

NONE, D0, D1, BOTH = 0, 1, 2, 3


@njit(cache=True)
def _classify(u, bits, p_c, p_w, p_dc):
    n = u.shape[0]
    out = np.empty(n, dtype=np.uint8)
    c1 = p_c
    c2 = p_c + p_w
    c3 = p_c + p_w + p_dc
    for k in range(n):
        good = D0 if bits[k] == 0 else D1
        bad = D1 if bits[k] == 0 else D0
        x = u[k]
        if x < c1:
            out[k] = good
        elif x < c2:
            out[k] = bad
        elif x < c3:
            out[k] = BOTH
        else:
            out[k] = NONE
    return out


def classify_clicks(u, bits, p_c, p_w, p_dc):
    return _classify(np.asarray(u, dtype=np.float64), np.asarray(bits, dtype=np.uint8),
                     float(p_c), float(p_w), float(p_dc))


@njit(cache=True)
def _assign(outcomes, coins):
    n = outcomes.shape[0]
    values = np.empty(n, dtype=np.int8)
    for k in range(n):
        o = outcomes[k]
        if o == D0:
            values[k] = 0
        elif o == D1:
            values[k] = 1
        elif o == BOTH:
            values[k] = 1 if coins[k] >= 0.5 else 0
        else:
            values[k] = -1
    return values


def assign_values(outcomes, coins):
    return _assign(np.asarray(outcomes, dtype=np.uint8), np.asarray(coins, dtype=np.float64))


@njit(cache=True)
def _tally(values, clauses):
    sat = 0
    unsat = 0
    unmeasured = 0
    for j in range(clauses.shape[0]):
        ones = 0
        measured = True
        for t in range(4):
            v = values[clauses[j, t]]
            if v < 0:
                measured = False
                break
            ones += v
        if not measured:
            unmeasured += 1
        elif ones == 2:
            sat += 1
        else:
            unsat += 1
    return sat, unsat, unmeasured


def tally_clauses(values, clauses):
    s, u, m = _tally(np.asarray(values, dtype=np.int8), clauses)
    return int(s), int(u), int(m)


@njit(cache=True)
def _count_sat(bits, clauses):
    sat = 0
    for j in range(clauses.shape[0]):
        s = bits[clauses[j, 0]] + bits[clauses[j, 1]] + bits[clauses[j, 2]] + bits[clauses[j, 3]]
        if s == 2:
            sat += 1
    return sat


def count_satisfied(bits, clauses):
    return int(_count_sat(np.asarray(bits, dtype=np.int64), clauses))


def _incidence(clauses, n):
    flat = clauses.ravel()
    order = np.argsort(flat, kind="stable")
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=n), out=ptr[1:])
    return ptr, (order // 4).astype(np.int64)


@njit(cache=True)
def _gray_scan(ptr, idx, m, n):
    # Gray-code walk: one variable flips per step, only its clauses are rescored.
    cnt = np.zeros(m, dtype=np.int64)
    unsat = m
    best = m
    best_code = 0
    code = 0
    total = 1 << n
    for i in range(1, total):
        bit = 0
        while not (i >> bit) & 1:
            bit += 1
        code ^= 1 << bit
        up = (code >> bit) & 1
        for p in range(ptr[bit], ptr[bit + 1]):
            j = idx[p]
            before = cnt[j] == 2
            if up:
                cnt[j] += 1
            else:
                cnt[j] -= 1
            after = cnt[j] == 2
            if before and not after:
                unsat += 1
            elif after and not before:
                unsat -= 1
        if unsat < best or (unsat == best and code < best_code):
            best = unsat
            best_code = code
    return best, best_code


def exhaustive_min_unsat(clauses, n):
    ptr, idx = _incidence(clauses, n)
    best, code = _gray_scan(ptr, idx, clauses.shape[0], n)
    return int(best), int(code)


@njit(cache=True)
def _climb(bits, clauses, ptr, idx):
    n = bits.shape[0]
    m = clauses.shape[0]
    cnt = np.zeros(m, dtype=np.int64)
    for j in range(m):
        for t in range(4):
            cnt[j] += bits[clauses[j, t]]
    while True:
        best_gain = 0
        best_v = -1
        for v in range(n):
            step = 1 if bits[v] == 0 else -1
            g = 0
            for p in range(ptr[v], ptr[v + 1]):
                c = cnt[idx[p]]
                g += (1 if c + step == 2 else 0) - (1 if c == 2 else 0)
            if g > best_gain:
                best_gain = g
                best_v = v
        if best_v < 0:
            break
        step = 1 if bits[best_v] == 0 else -1
        bits[best_v] = 1 - bits[best_v]
        for p in range(ptr[best_v], ptr[best_v + 1]):
            cnt[idx[p]] += step
    sat = 0
    for j in range(m):
        if cnt[j] == 2:
            sat += 1
    return bits, sat


def hill_climb(bits, clauses):
    ptr, idx = _incidence(clauses, bits.shape[0])
    out, sat = _climb(np.array(bits, dtype=np.uint8), clauses, ptr, idx)
    return out, int(sat)


@njit(cache=True)
def _walk(bits, clauses, ptr, idx, u, noise):
    # Each flip reads three uniforms: clause pick, noise test, variable pick.
    m = clauses.shape[0]
    cnt = np.zeros(m, dtype=np.int64)
    pos = np.full(m, -1, dtype=np.int64)
    ulist = np.empty(m, dtype=np.int64)
    k = 0
    for j in range(m):
        for t in range(4):
            cnt[j] += bits[clauses[j, t]]
        if cnt[j] != 2:
            pos[j] = k
            ulist[k] = j
            k += 1
    best = bits.copy()
    best_sat = m - k
    for s in range(u.shape[0] // 3):
        if k == 0:
            break
        c = ulist[min(int(u[3 * s] * k), k - 1)]
        if u[3 * s + 1] < noise:
            v = clauses[c, min(int(u[3 * s + 2] * 4), 3)]
        else:
            v = -1
            best_gain = -(1 << 30)
            for t in range(4):
                x = clauses[c, t]
                step = 1 if bits[x] == 0 else -1
                g = 0
                for p in range(ptr[x], ptr[x + 1]):
                    cc = cnt[idx[p]]
                    g += (1 if cc + step == 2 else 0) - (1 if cc == 2 else 0)
                if g > best_gain:
                    best_gain = g
                    v = x
        step = 1 if bits[v] == 0 else -1
        bits[v] = 1 - bits[v]
        for p in range(ptr[v], ptr[v + 1]):
            j = idx[p]
            was = cnt[j] == 2
            cnt[j] += step
            now = cnt[j] == 2
            if was and not now:
                pos[j] = k
                ulist[k] = j
                k += 1
            elif now and not was:
                last = ulist[k - 1]
                ulist[pos[j]] = last
                pos[last] = pos[j]
                pos[j] = -1
                k -= 1
        if m - k > best_sat:
            best_sat = m - k
            best[:] = bits
    return bits, best, best_sat


def walk_chunk(bits, clauses, u, noise):
    """Noisy greedy single-bit flips on unsatisfied clauses, len(u) // 3 steps.

    Returns (current bits, best bits seen, best satisfied count).
    """
    ptr, idx = _incidence(clauses, bits.shape[0])
    cur, best, sat = _walk(np.array(bits, dtype=np.uint8), clauses, ptr, idx,
                           np.asarray(u, dtype=np.float64), float(noise))
    return cur, best, int(sat)
