"""Compiled search kernel (numba).

This is a performance fusion of the exact steps in :mod:`tabushop.driver`:
same SplitMix64 stream, same draw order (tenure, then one tie-break per
iteration), same neighborhood enumeration order, same update cadence.  The
equivalence is covered by tests that compare full trajectories against the
pure-Python path; any semantic change here must keep those green.

Operations are 0-based indices here (id - 1).  Machine sequences live in
one flat array ``seq`` with per-machine segments delimited by ``mstart``;
``posf[k]`` is operation k's flat position.
"""

from __future__ import annotations

import time

import numpy as np
from numba import njit

from .encoding import PairIndexSet, encode
from .gta import ThetaSchedule, theta_at
from .instances import Instance
from .learning import ObjectiveBounds
from .rng import SplitMix64
from .runlog import RunLogRecord
from .schedule import Solution, evaluate
from .tabu import TenureRange

U64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
U64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)

BIG = np.int64(2**62)  # infeasible makespan / not-seen sentinel

STATUS_OK = 0
STATUS_DEGENERATE = 1
STATUS_LB_VIOLATION = 2


@njit(cache=True, inline="always")
def _next_u64(rs):
    s = rs[0] + U64_GAMMA
    rs[0] = s
    z = s
    z = (z ^ (z >> S30)) * U64_MIX1
    z = (z ^ (z >> S27)) * U64_MIX2
    z = z ^ (z >> S31)
    return z


@njit(cache=True, inline="always")
def _shift(seq, posf, f, t):
    op = seq[f]
    if t < f:
        i = f
        while i > t:
            seq[i] = seq[i - 1]
            posf[seq[i]] = i
            i -= 1
    else:
        i = f
        while i < t:
            seq[i] = seq[i + 1]
            posf[seq[i]] = i
            i += 1
    seq[t] = op
    posf[op] = t


@njit(cache=True)
def _evaluate(dur, js, mach, mstart, indeg0, seg_start, seq, posf, indeg, qbuf, start):
    """Longest-path start times over job + machine arcs; -1 on a cycle.

    ``indeg0`` is the per-op in-degree from job arcs (constant) and
    ``seg_start[f]`` marks flat positions that begin machine segments, so
    setup is a single fused pass over the sequence.
    """
    n = dur.shape[0]
    tail = 0
    for f in range(n):
        k = seq[f]
        deg = indeg0[k]
        if seg_start[f] == 0:
            deg += 1
        indeg[k] = deg
        start[k] = 0
        if deg == 0:
            qbuf[tail] = k
            tail += 1
    head = 0
    ms = np.int64(0)
    while head < tail:
        k = qbuf[head]
        head += 1
        e = start[k] + dur[k]
        if e > ms:
            ms = e
        s1 = js[k]
        if s1 >= 0:
            if e > start[s1]:
                start[s1] = e
            indeg[s1] -= 1
            if indeg[s1] == 0:
                qbuf[tail] = s1
                tail += 1
        f = posf[k]
        m = mach[k]
        if f + 1 < mstart[m + 1]:
            s2 = seq[f + 1]
            if e > start[s2]:
                start[s2] = e
            indeg[s2] -= 1
            if indeg[s2] == 0:
                qbuf[tail] = s2
                tail += 1
    if head < n:
        return np.int64(-1)
    return ms


@njit(cache=True)
def _critical_path(dur, jp, mach, mstart, seq, posf, start, ms, path):
    """Backwards walk over tight arcs; job arc preferred, lowest-id terminal."""
    n = dur.shape[0]
    term = -1
    for k in range(n):
        if start[k] + dur[k] == ms:
            term = k
            break
    plen = 0
    cur = term
    path[plen] = cur
    plen += 1
    while start[cur] > 0:
        s = start[cur]
        nxt = -1
        j = jp[cur]
        if j >= 0 and start[j] + dur[j] == s:
            nxt = j
        else:
            f = posf[cur]
            m = mach[cur]
            if f > mstart[m]:
                mp = seq[f - 1]
                if start[mp] + dur[mp] == s:
                    nxt = mp
        path[plen] = nxt
        plen += 1
        cur = nxt
    for i in range(plen // 2):
        t = path[i]
        path[i] = path[plen - 1 - i]
        path[plen - 1 - i] = t
    return plen


@njit(cache=True)
def _gen_moves(mach, mstart, posf, path, plen, mv_op, mv_from, mv_to):
    """Front/back block moves in the fixed enumeration order."""
    nmv = 0
    i = 0
    while i < plen:
        j = i
        m = mach[path[i]]
        while j + 1 < plen and mach[path[j + 1]] == m and posf[path[j + 1]] == posf[path[j]] + 1:
            j += 1
        size = j - i + 1
        if size >= 2:
            bs = posf[path[i]]
            be = posf[path[j]]
            if size == 2:
                mv_op[nmv] = path[i + 1]
                mv_from[nmv] = be
                mv_to[nmv] = bs
                nmv += 1
            else:
                for t in range(i + 1, j + 1):
                    mv_op[nmv] = path[t]
                    mv_from[nmv] = posf[path[t]]
                    mv_to[nmv] = bs
                    nmv += 1
                for t in range(i, j):
                    mv_op[nmv] = path[t]
                    mv_from[nmv] = posf[path[t]]
                    mv_to[nmv] = be
                    nmv += 1
        i = j + 1
    return nmv


@njit(cache=True)
def _run_block(
    dur, jp, js, mach, mstart, pairmat, indeg0, seg_start,
    seq, posf, tabu_exp, bits, d1, d0, probs,
    best_seq, regs, rs,
    n_iters, tmin, tmax, theta, d_period, epsilon,
    guided, track_bounds, trivial_lb,
    indeg, qbuf, start, path,
    mv_op, mv_from, mv_to, mv_ms, mv_exp, changed_buf,
):
    it = regs[0]
    best_ms = regs[1]
    status = STATUS_OK
    width = np.uint64(tmax - tmin + 1)
    npairs = bits.shape[0]
    for _ in range(n_iters):
        tenure = tmin + np.int64(_next_u64(rs) % width)

        ms_cur = _evaluate(dur, js, mach, mstart, indeg0, seg_start, seq, posf, indeg, qbuf, start)
        if ms_cur < trivial_lb:
            status = STATUS_LB_VIOLATION
            break
        plen = _critical_path(dur, jp, mach, mstart, seq, posf, start, ms_cur, path)
        nmv = _gen_moves(mach, mstart, posf, path, plen, mv_op, mv_from, mv_to)
        if nmv == 0:
            status = STATUS_DEGENERATE
            break

        # The makespan of a tabu neighbor is never read by the selection
        # rule (the all-tabu fallback picks by expiration alone), so only
        # non-tabu neighbors are evaluated up front; tabu ones get their
        # feasibility check lazily iff the fallback fires.
        for c in range(nmv):
            o = mv_op[c]
            f = mv_from[c]
            t = mv_to[c]
            e = it
            if t < f:
                for q in range(t, f):
                    x = tabu_exp[pairmat[o, seq[q]]]
                    if x > e:
                        e = x
            else:
                for q in range(f + 1, t + 1):
                    x = tabu_exp[pairmat[o, seq[q]]]
                    if x > e:
                        e = x
            mv_exp[c] = e
            if e <= it:
                _shift(seq, posf, f, t)
                msn = _evaluate(dur, js, mach, mstart, indeg0, seg_start, seq, posf, indeg, qbuf, start)
                _shift(seq, posf, t, f)
                if msn < 0:
                    mv_ms[c] = BIG
                else:
                    if msn < trivial_lb:
                        status = STATUS_LB_VIOLATION
                    mv_ms[c] = msn
            else:
                mv_ms[c] = BIG  # tabu: not evaluated unless the fallback needs it
        if status != STATUS_OK:
            break

        bestv = BIG
        ties = np.int64(0)
        for c in range(nmv):
            if mv_ms[c] == BIG:
                continue
            if mv_exp[c] <= it:
                if mv_ms[c] < bestv:
                    bestv = mv_ms[c]
                    ties = 1
                elif mv_ms[c] == bestv:
                    ties += 1
        use_fallback = bestv == BIG
        beste = BIG
        if use_fallback:
            # evaluate the deferred tabu neighbors for feasibility only
            for c in range(nmv):
                if mv_exp[c] > it:
                    o = mv_op[c]
                    f = mv_from[c]
                    t = mv_to[c]
                    _shift(seq, posf, f, t)
                    msn = _evaluate(dur, js, mach, mstart, indeg0, seg_start, seq, posf, indeg, qbuf, start)
                    _shift(seq, posf, t, f)
                    if msn < 0:
                        mv_ms[c] = BIG
                    else:
                        if msn < trivial_lb:
                            status = STATUS_LB_VIOLATION
                        mv_ms[c] = msn
            if status != STATUS_OK:
                break
            for c in range(nmv):
                if mv_ms[c] == BIG:
                    continue
                if mv_exp[c] < beste:
                    beste = mv_exp[c]
                    ties = 1
                elif mv_exp[c] == beste:
                    ties += 1
            if ties == 0:
                status = STATUS_DEGENERATE
                break
        r = np.int64(_next_u64(rs) % np.uint64(ties))
        chosen = -1
        cnt = np.int64(0)
        for c in range(nmv):
            if mv_ms[c] == BIG:
                continue
            if use_fallback:
                hit = mv_exp[c] == beste
            else:
                hit = mv_exp[c] <= it and mv_ms[c] == bestv
            if hit:
                if cnt == r:
                    chosen = c
                    break
                cnt += 1

        o = mv_op[chosen]
        f = mv_from[chosen]
        t = mv_to[chosen]
        ms_new = mv_ms[chosen]
        nch = 0
        if t < f:
            for q in range(t, f):
                changed_buf[nch] = pairmat[o, seq[q]]
                nch += 1
        else:
            for q in range(f + 1, t + 1):
                changed_buf[nch] = pairmat[o, seq[q]]
                nch += 1
        _shift(seq, posf, f, t)
        for q in range(nch):
            bits[changed_buf[q]] ^= 1

        improved = ms_new < best_ms
        if track_bounds == 1 and (it % d_period == 0 or improved):
            for jj in range(npairs):
                if bits[jj] == 1:
                    if ms_new < d1[jj]:
                        d1[jj] = ms_new
                else:
                    if ms_new < d0[jj]:
                        d0[jj] = ms_new
            if guided == 1:
                if theta == 0.0:
                    for jj in range(npairs):
                        probs[jj] = 0.5
                else:
                    for jj in range(npairs):
                        if d1[jj] < BIG and d0[jj] < BIG:
                            zz = theta * np.float64(d1[jj] - d0[jj])
                            if zz > 709.0:
                                zz = 709.0
                            elif zz < -709.0:
                                zz = -709.0
                            probs[jj] = 1.0 / (1.0 + np.exp(zz))
                        else:
                            probs[jj] = 0.5

        for q in range(nch):
            jj = changed_buf[q]
            if guided == 1:
                p = probs[jj]
                nb = bits[jj]
                if (nb == 1 and p >= 0.5) or (nb == 0 and p <= 0.5):
                    hi = p if p >= 0.5 else 1.0 - p
                    lo = 1.0 - p if p >= 0.5 else p
                    den = lo if lo > epsilon else epsilon
                    tabu_exp[jj] = it + np.int64(np.floor(tenure * (hi / den) + 0.5))
                else:
                    tabu_exp[jj] = it + tenure
            else:
                tabu_exp[jj] = it + tenure

        if improved:
            best_ms = ms_new
            for q in range(seq.shape[0]):
                best_seq[q] = seq[q]
        it += 1

    regs[0] = it
    regs[1] = best_ms
    regs[2] = status


class EngineState:
    """Numpy mirrors of one run's search state, fed to the kernel."""

    def __init__(self, inst: Instance, idx: PairIndexSet, initial: Solution, rng: SplitMix64):
        n = inst.n_ops
        self.inst = inst
        self.idx = idx
        self.dur = np.array([op.duration for op in inst.operations], dtype=np.int32)
        jp = np.full(n, -1, dtype=np.int32)
        js = np.full(n, -1, dtype=np.int32)
        for op in inst.operations:
            if op.pos_in_job > 0:
                jp[op.id - 1] = op.id - 2
                js[op.id - 2] = op.id - 1
        self.jp, self.js = jp, js
        self.mach = np.array([op.machine for op in inst.operations], dtype=np.int32)
        counts = [len(inst.machine_ops(m)) for m in range(inst.n_machines)]
        self.mstart = np.zeros(inst.n_machines + 1, dtype=np.int32)
        self.mstart[1:] = np.cumsum(counts)
        self.pairmat = np.full((n, n), -1, dtype=np.int32)
        for k, (i, j) in enumerate(idx.pairs):
            self.pairmat[i - 1, j - 1] = k
            self.pairmat[j - 1, i - 1] = k

        self.seq = np.empty(n, dtype=np.int32)
        self.posf = np.empty(n, dtype=np.int32)
        for m, s in enumerate(initial.sequences):
            base = self.mstart[m]
            for i, oid in enumerate(s):
                self.seq[base + i] = oid - 1
                self.posf[oid - 1] = base + i

        npairs = len(idx)
        self.tabu_exp = np.zeros(npairs, dtype=np.int64)
        self.bits = encode(initial, idx)
        self.d1 = np.full(npairs, BIG, dtype=np.int64)
        self.d0 = np.full(npairs, BIG, dtype=np.int64)
        self.probs = np.full(npairs, 0.5, dtype=np.float64)

        times = evaluate(inst, initial)
        if times is None:
            raise ValueError("initial solution is infeasible")
        self.best_seq = self.seq.copy()
        self.regs = np.array([1, times.makespan, STATUS_OK], dtype=np.int64)
        self.rs = np.array([rng.state], dtype=np.uint64)

        self.indeg0 = (jp >= 0).astype(np.int32)
        self.seg_start = np.zeros(n, dtype=np.uint8)
        for m in range(inst.n_machines):
            if self.mstart[m] < self.mstart[m + 1]:
                self.seg_start[self.mstart[m]] = 1

        cap = 2 * n + 4
        self.indeg = np.empty(n, dtype=np.int32)
        self.qbuf = np.empty(n, dtype=np.int32)
        self.start = np.empty(n, dtype=np.int32)
        self.path = np.empty(n + 1, dtype=np.int32)
        self.mv_op = np.empty(cap, dtype=np.int32)
        self.mv_from = np.empty(cap, dtype=np.int32)
        self.mv_to = np.empty(cap, dtype=np.int32)
        self.mv_ms = np.empty(cap, dtype=np.int64)
        self.mv_exp = np.empty(cap, dtype=np.int64)
        self.changed_buf = np.empty(n + 1, dtype=np.int64)

    def run_block(self, n_iters: int, tenure: TenureRange, theta: float, d: int,
                  epsilon: float, guided: bool, track_bounds: bool) -> int:
        _run_block(
            self.dur, self.jp, self.js, self.mach, self.mstart, self.pairmat,
            self.indeg0, self.seg_start,
            self.seq, self.posf, self.tabu_exp, self.bits, self.d1, self.d0, self.probs,
            self.best_seq, self.regs, self.rs,
            np.int64(n_iters), np.int64(tenure.t_min), np.int64(tenure.t_max),
            np.float64(theta), np.int64(d), np.float64(epsilon),
            np.int64(1 if guided else 0), np.int64(1 if track_bounds else 0),
            np.int64(self.inst.trivial_lower_bound),
            self.indeg, self.qbuf, self.start, self.path,
            self.mv_op, self.mv_from, self.mv_to, self.mv_ms, self.mv_exp, self.changed_buf,
        )
        status = int(self.regs[2])
        if status == STATUS_LB_VIOLATION:
            raise AssertionError("makespan below trivial lower bound (engine)")
        return status

    @property
    def iter(self) -> int:
        return int(self.regs[0])

    @property
    def best_makespan(self) -> int:
        return int(self.regs[1])

    def best_solution(self) -> Solution:
        seqs = []
        for m in range(self.inst.n_machines):
            lo, hi = self.mstart[m], self.mstart[m + 1]
            seqs.append(tuple(int(x) + 1 for x in self.best_seq[lo:hi]))
        return Solution(tuple(seqs), self.best_makespan)

    def bounds(self) -> ObjectiveBounds:
        return ObjectiveBounds(self.d1.copy(), self.d0.copy())


def run_fast(
    inst, idx, initial, rng, *, algorithm, nepochs, niters, seed, tenure_range,
    guided, schedule: ThetaSchedule | None, d, epsilon, track_bounds, emit_bounds,
    time_limit,
):
    from .driver import RunResult, _active_theta

    t0 = time.monotonic()
    eng = EngineState(inst, idx, initial, rng)
    records: list[RunLogRecord] = []
    snapshots = [] if emit_bounds else None
    degenerate = False

    def emit_record(epoch: int, theta: float | None):
        records.append(
            RunLogRecord(
                algorithm=algorithm, instance=inst.name, seed=seed, epoch=epoch,
                iters=eng.iter - 1, best=eng.best_makespan, theta=theta,
                elapsed_ms=int((time.monotonic() - t0) * 1000),
            )
        )
        if emit_bounds:
            snapshots.append((epoch, eng.d1.copy(), eng.d0.copy()))

    if time_limit is None:
        for epoch in range(1, nepochs + 1):
            theta = _active_theta(epoch, schedule) if guided else None
            if not degenerate and niters > 0:
                status = eng.run_block(niters, tenure_range, theta or 0.0, d, epsilon, guided, track_bounds)
                if status == STATUS_DEGENERATE:
                    degenerate = True
            emit_record(epoch, theta)
    else:
        epoch = 0
        iters_at_record = 0
        theta = None
        # Guided runs advance theta with wall time, so they step in d-sized
        # chunks; plain runs only need the clock checked now and then.
        chunk = d if guided else max(d, 2000)
        while True:
            elapsed = time.monotonic() - t0
            if elapsed >= time_limit:
                break
            theta = None
            if guided:
                theta = 0.0 if eng.iter <= d else theta_at(schedule, elapsed)
            status = eng.run_block(chunk, tenure_range, theta or 0.0, d, epsilon, guided, track_bounds)
            if status == STATUS_DEGENERATE:
                degenerate = True
            if eng.iter - 1 - iters_at_record >= niters or degenerate:
                epoch += 1
                emit_record(epoch, theta)
                iters_at_record = eng.iter - 1
            if degenerate:
                break
        if not records or records[-1].iters != eng.iter - 1:
            epoch += 1
            if guided:
                theta = theta_at(schedule, min(time.monotonic() - t0, time_limit))
            emit_record(epoch, theta)

    rng.state = int(eng.rs[0])
    return RunResult(
        records=records,
        best_solution=eng.best_solution(),
        best_makespan=eng.best_makespan,
        bounds=eng.bounds() if track_bounds else None,
        bounds_snapshots=snapshots,
        degenerate=degenerate,
    )
