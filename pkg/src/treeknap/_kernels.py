"""Compiled solving kernels (uniform/one-hot rule sets, plain arrays only).

The heavy-light kernel mirrors ``_engine.Engine`` as an explicit-stack state
machine: one stack frame per light-subtree entry (bounded by the light
depth), with per-frame workspaces and a single shared path buffer (active
heavy paths are vertex-disjoint, so their segments never overlap).  The
baseline kernel is a plain bottom-up loop with max-plus convolutions.

Counters are incremented at exactly the same points as the Python
implementations; differential tests assert bit-for-bit equality of both the
result arrays and the counters.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .profit_array import _NEG

# phase codes for the heavy-light state machine
_PH_VERTEX_INIT = 0
_PH_GEN_ADVANCE = 1
_PH_THREAD = 2
_PH_CHAIN_MERGE = 3
_PH_CHAIN_NEXT = 4
_PH_SPECIAL = 5
_PH_VERTEX_FINISH = 6

# resume actions after a child frame returns
_AF_THREAD_STEP = 0
_AF_SPECIAL = 1
_AF_PREFIX = 2

# counter slots
CNT_CHAINS = 0
CNT_SHIFT_ADDS = 1
CNT_MAXIMA = 2
CNT_CONVOLUTIONS = 3


@njit(cache=True, nogil=True)
def _merge_chain(out, z, sbuf, w_u, p_u, cap, gi, src_ptr, src_q, src_sigma, cnt):
    cnt[CNT_CHAINS] += 1
    have_shift = False
    for si in range(src_ptr[gi], src_ptr[gi + 1]):
        q = src_q[si]
        if src_sigma[si] == 1:
            cnt[CNT_SHIFT_ADDS] += 1
            if not have_shift:
                for c in range(cap + 1):
                    sbuf[c] = _NEG
                if w_u <= cap:
                    for c in range(w_u, cap + 1):
                        v = z[c - w_u]
                        if v >= 0:
                            sbuf[c] = v + p_u
                have_shift = True
            cnt[CNT_MAXIMA] += 1
            row = out[q]
            for c in range(cap + 1):
                if sbuf[c] > row[c]:
                    row[c] = sbuf[c]
        else:
            cnt[CNT_MAXIMA] += 1
            row = out[q]
            for c in range(cap + 1):
                if z[c] > row[c]:
                    row[c] = z[c]


@njit(cache=True, nogil=True)
def hlrecdp_kernel(
    n,
    cap,
    w,
    p,
    heavy,
    kptr,
    kflat,
    gen_kind,
    gen_a,
    gen_b,
    src_ptr,
    src_q,
    src_sigma,
    inert,
    n_states,
    depth_cap,
    x0,
    inv,
    cnt,
):
    G = gen_kind.shape[0]
    Q = n_states
    D = depth_cap
    tab = np.full((D, 2, Q, cap + 1), _NEG, dtype=np.int64)
    xin = np.empty((D, cap + 1), dtype=np.int64)
    zbuf = np.empty((D, cap + 1), dtype=np.int64)
    pbuf = np.empty((D, cap + 1), dtype=np.int64)
    sbuf = np.empty((D, cap + 1), dtype=np.int64)
    path_buf = np.empty(n, dtype=np.int64)

    f_head = np.empty(D, dtype=np.int64)
    f_poff = np.empty(D, dtype=np.int64)
    f_plen = np.empty(D, dtype=np.int64)
    f_pi = np.empty(D, dtype=np.int64)
    f_flip = np.empty(D, dtype=np.int64)
    f_gi = np.empty(D, dtype=np.int64)
    f_phase = np.empty(D, dtype=np.int64)
    f_j = np.empty(D, dtype=np.int64)
    f_ti = np.empty(D, dtype=np.int64)
    f_req = np.empty(D, dtype=np.int64)
    f_after = np.empty(D, dtype=np.int64)

    # push the root frame
    t = 0
    f_head[0] = 0
    f_poff[0] = 0
    for c in range(cap + 1):
        xin[0, c] = x0[c]
    u = 0
    ln = 0
    while True:
        path_buf[ln] = u
        ln += 1
        if heavy[u] == -1:
            break
        u = heavy[u]
    f_plen[0] = ln
    f_pi[0] = ln - 1
    f_flip[0] = 0
    f_phase[0] = _PH_VERTEX_INIT

    while True:
        phase = f_phase[t]
        u = path_buf[f_poff[t] + f_pi[t]]
        d = kptr[u + 1] - kptr[u]
        flip = f_flip[t]
        out = tab[t, flip]

        if phase == _PH_VERTEX_INIT:
            inv[u] += 1
            for q in range(Q):
                if inert[q] == 1:
                    for c in range(cap + 1):
                        out[q, c] = xin[t, c]
                else:
                    for c in range(cap + 1):
                        out[q, c] = _NEG
            f_gi[t] = -1
            f_phase[t] = _PH_GEN_ADVANCE

        elif phase == _PH_GEN_ADVANCE:
            gi = f_gi[t] + 1
            while gi < G and gen_kind[gi] == 1 and d == 0:
                gi += 1
            f_gi[t] = gi
            if gi == G:
                f_phase[t] = _PH_VERTEX_FINISH
            else:
                below = tab[t, 1 - flip]
                if gen_kind[gi] == 0:
                    a = gen_a[gi]
                    if d == 0:
                        for c in range(cap + 1):
                            zbuf[t, c] = xin[t, c]
                    else:
                        for c in range(cap + 1):
                            zbuf[t, c] = below[a, c]
                    f_j[t] = -1
                    f_ti[t] = 1
                    f_phase[t] = _PH_THREAD
                else:
                    a = gen_a[gi]
                    for c in range(cap + 1):
                        zbuf[t, c] = below[a, c]
                    f_j[t] = 0
                    f_ti[t] = 1
                    f_phase[t] = _PH_THREAD

        elif phase == _PH_THREAD:
            # thread light children ti..d-1 with the tail state
            gi = f_gi[t]
            tstate = gen_a[gi] if gen_kind[gi] == 0 else gen_b[gi]
            ti = f_ti[t]
            suspended = False
            while ti < d:
                v = kflat[kptr[u] + ti]
                if inert[tstate] == 1:
                    ti += 1
                    continue
                f_ti[t] = ti
                f_req[t] = tstate
                f_after[t] = _AF_THREAD_STEP
                t = _push(
                    t, v, zbuf, xin, heavy, path_buf,
                    f_head, f_poff, f_plen, f_pi, f_flip, f_phase, cap,
                )
                suspended = True
                break
            if not suspended:
                f_ti[t] = ti
                f_phase[t] = _PH_CHAIN_MERGE

        elif phase == _PH_CHAIN_MERGE:
            _merge_chain(
                out, zbuf[t], sbuf[t], w[u], p[u], cap,
                f_gi[t], src_ptr, src_q, src_sigma, cnt,
            )
            f_phase[t] = _PH_CHAIN_NEXT

        elif phase == _PH_CHAIN_NEXT:
            gi = f_gi[t]
            if gen_kind[gi] == 0:
                f_phase[t] = _PH_GEN_ADVANCE
            else:
                j = f_j[t]
                b = gen_b[gi]
                below = tab[t, 1 - flip]
                if j == 0:
                    for c in range(cap + 1):
                        pbuf[t, c] = below[b, c]
                    f_j[t] = 1
                    f_phase[t] = _PH_SPECIAL if 1 < d else _PH_GEN_ADVANCE
                elif j < d - 1:
                    # advance the all-default prefix past child j
                    v = kflat[kptr[u] + j]
                    if inert[b] == 1:
                        f_j[t] = j + 1
                        f_phase[t] = _PH_SPECIAL
                    else:
                        f_req[t] = b
                        f_after[t] = _AF_PREFIX
                        t = _push(
                            t, v, pbuf, xin, heavy, path_buf,
                            f_head, f_poff, f_plen, f_pi, f_flip, f_phase, cap,
                        )
                else:
                    f_phase[t] = _PH_GEN_ADVANCE

        elif phase == _PH_SPECIAL:
            gi = f_gi[t]
            a = gen_a[gi]
            j = f_j[t]
            v = kflat[kptr[u] + j]
            if inert[a] == 1:
                for c in range(cap + 1):
                    zbuf[t, c] = pbuf[t, c]
                f_ti[t] = j + 1
                f_phase[t] = _PH_THREAD
            else:
                f_req[t] = a
                f_after[t] = _AF_SPECIAL
                t = _push(
                    t, v, pbuf, xin, heavy, path_buf,
                    f_head, f_poff, f_plen, f_pi, f_flip, f_phase, cap,
                )

        else:  # _PH_VERTEX_FINISH
            if f_pi[t] > 0:
                f_pi[t] -= 1
                f_flip[t] = 1 - flip
                f_phase[t] = _PH_VERTEX_INIT
            elif t == 0:
                return tab[0, flip]
            else:
                # deliver the requested row to the suspended parent
                child_out = tab[t, flip]
                t -= 1
                req = f_req[t]
                after = f_after[t]
                if after == _AF_PREFIX:
                    for c in range(cap + 1):
                        pbuf[t, c] = child_out[req, c]
                    f_j[t] += 1
                    f_phase[t] = _PH_SPECIAL
                else:
                    for c in range(cap + 1):
                        zbuf[t, c] = child_out[req, c]
                    if after == _AF_THREAD_STEP:
                        f_ti[t] += 1
                    else:  # _AF_SPECIAL
                        f_ti[t] = f_j[t] + 1
                    f_phase[t] = _PH_THREAD


@njit(cache=True, nogil=True)
def _push(t, v, srcbuf, xin, heavy, path_buf, f_head, f_poff, f_plen, f_pi, f_flip, f_phase, cap):
    nt = t + 1
    for c in range(cap + 1):
        xin[nt, c] = srcbuf[t, c]
    f_head[nt] = v
    f_poff[nt] = f_poff[t] + f_plen[t]
    u = v
    ln = 0
    off = f_poff[nt]
    while True:
        path_buf[off + ln] = u
        ln += 1
        if heavy[u] == -1:
            break
        u = heavy[u]
    f_plen[nt] = ln
    f_pi[nt] = ln - 1
    f_flip[nt] = 0
    f_phase[nt] = _PH_VERTEX_INIT
    return nt


@njit(cache=True, nogil=True)
def _convolve_into(out, a, b, cap, cnt):
    # the plain dense O(C^2) max-plus convolution: a BOTTOM operand leaves a
    # huge negative sum that never wins the max (-2^62 + -2^62 = -2^63 is
    # still representable), so no sparsity branch is taken and the cost is
    # capacity-quadratic by construction
    cnt[CNT_CONVOLUTIONS] += 1
    for c in range(cap + 1):
        out[c] = _NEG
    for c2 in range(cap + 1):
        vb = b[c2]
        for c1 in range(cap + 1 - c2):
            s = a[c1] + vb
            if s > out[c1 + c2]:
                out[c1 + c2] = s
    for c in range(cap + 1):
        if out[c] < 0:
            out[c] = _NEG
    return out


@njit(cache=True, nogil=True)
def baseline_kernel(
    n,
    cap,
    w,
    p,
    cptr,
    cflat,
    gen_kind,
    gen_a,
    gen_b,
    src_ptr,
    src_q,
    src_sigma,
    inert,
    n_states,
    max_deg,
    inv,
    cnt,
):
    G = gen_kind.shape[0]
    Q = n_states
    table = np.full((n, Q, cap + 1), _NEG, dtype=np.int64)
    acc = np.empty(cap + 1, dtype=np.int64)
    tmp = np.empty(cap + 1, dtype=np.int64)
    sbuf = np.empty(cap + 1, dtype=np.int64)
    pref = np.empty((max_deg, cap + 1), dtype=np.int64)
    suff = np.empty((max_deg, cap + 1), dtype=np.int64)

    for u in range(n - 1, -1, -1):
        inv[u] += 1
        out = table[u]
        for q in range(Q):
            if inert[q] == 1:
                out[q, 0] = 0  # the all-zero continuation: weight 0, profit 0
        d = cptr[u + 1] - cptr[u]
        k0 = cptr[u]
        for gi in range(G):
            if gen_kind[gi] == 0:
                a = gen_a[gi]
                for c in range(cap + 1):
                    acc[c] = _NEG
                acc[0] = 0
                for i in range(d):
                    child = table[cflat[k0 + i], a]
                    if i == 0:
                        for c in range(cap + 1):
                            acc[c] = child[c]
                    else:
                        _convolve_into(tmp, acc, child, cap, cnt)
                        for c in range(cap + 1):
                            acc[c] = tmp[c]
                _merge_chain(out, acc, sbuf, w[u], p[u], cap, gi, src_ptr, src_q, src_sigma, cnt)
            else:
                if d == 0:
                    continue
                a = gen_a[gi]
                b = gen_b[gi]
                # pref[i] = fold of children 0..i with the default state
                for i in range(d - 1):
                    child = table[cflat[k0 + i], b]
                    if i == 0:
                        for c in range(cap + 1):
                            pref[0, c] = child[c]
                    else:
                        _convolve_into(pref[i], pref[i - 1], child, cap, cnt)
                # suff[i] = fold of children i..d-1 with the default state
                for i in range(d - 1, 0, -1):
                    child = table[cflat[k0 + i], b]
                    if i == d - 1:
                        for c in range(cap + 1):
                            suff[i, c] = child[c]
                    else:
                        _convolve_into(suff[i], child, suff[i + 1], cap, cnt)
                for j in range(d):
                    child = table[cflat[k0 + j], a]
                    if j == 0:
                        for c in range(cap + 1):
                            acc[c] = child[c]
                    else:
                        _convolve_into(acc, pref[j - 1], child, cap, cnt)
                    if j < d - 1:
                        _convolve_into(tmp, acc, suff[j + 1], cap, cnt)
                        for c in range(cap + 1):
                            acc[c] = tmp[c]
                    _merge_chain(out, acc, sbuf, w[u], p[u], cap, gi, src_ptr, src_q, src_sigma, cnt)
    return table
