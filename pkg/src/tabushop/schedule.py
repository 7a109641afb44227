"""Schedule evaluation and the critical-block move neighborhood.

A solution fixes, for every machine, the order in which its operations are
processed.  Earliest start times then follow from a longest-path computation
over the DAG whose arcs are the job chains plus the machine orders; a cycle
in that graph means the ordering is infeasible.

Moves relocate an operation to the first or last position of its critical
block (the neighborhood of Blazewicz et al. built on the critical path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .instances import Instance
from .rng import SplitMix64

INFEASIBLE = math.inf


@dataclass(frozen=True)
class Solution:
    """Per-machine processing sequences (operation ids), plus a makespan cache."""

    sequences: tuple[tuple[int, ...], ...]
    cached_makespan: int | float | None = None

    def with_makespan(self, makespan: int | float) -> "Solution":
        return Solution(self.sequences, makespan)


@dataclass(frozen=True)
class ScheduleTimes:
    """Earliest start times (indexed by op id - 1) and the resulting makespan."""

    start: tuple[int, ...]
    makespan: int

    def start_of(self, op_id: int) -> int:
        return self.start[op_id - 1]


@dataclass(frozen=True)
class CriticalBlock:
    """A maximal run of consecutive same-machine operations on the critical path."""

    machine: int
    ops: tuple[int, ...]


@dataclass(frozen=True)
class Move:
    """Relocate ``op`` from ``from_pos`` to ``to_pos`` within one machine's sequence."""

    machine: int
    op: int
    from_pos: int
    to_pos: int


def evaluate(inst: Instance, sol: Solution) -> ScheduleTimes | None:
    """Earliest start times for ``sol``; ``None`` when the ordering is cyclic.

    Longest-path DP in topological order (Kahn).  Infeasible orderings are a
    legal outcome of the move neighborhood and are ranked above every finite
    makespan by the callers.
    """
    n = inst.n_ops
    ops = inst.operations
    job_succ = [0] * n  # op index -> succeeding op index + 1, 0 if none
    for op in ops:
        if op.pos_in_job > 0:
            job_succ[op.id - 2] = op.id  # previous op in job-major order is same job
    machine_succ = [0] * n
    indeg = [0] * n
    for op in ops:
        if op.pos_in_job > 0:
            indeg[op.id - 1] += 1
    for seq in sol.sequences:
        for a, b in zip(seq, seq[1:]):
            machine_succ[a - 1] = b
            indeg[b - 1] += 1

    start = [0] * n
    queue = [k for k in range(n) if indeg[k] == 0]
    head = 0
    makespan = 0
    while head < len(queue):
        k = queue[head]
        head += 1
        end = start[k] + ops[k].duration
        if end > makespan:
            makespan = end
        for succ in (job_succ[k], machine_succ[k]):
            if succ:
                s = succ - 1
                if end > start[s]:
                    start[s] = end
                indeg[s] -= 1
                if indeg[s] == 0:
                    queue.append(s)
    if head < n:
        return None
    assert makespan >= inst.trivial_lower_bound, "makespan below trivial lower bound"
    return ScheduleTimes(start=tuple(start), makespan=makespan)


def makespan_of(inst: Instance, sol: Solution) -> int | float:
    """Makespan of ``sol``; INFEASIBLE for cyclic orderings."""
    times = evaluate(inst, sol)
    return INFEASIBLE if times is None else times.makespan


def _critical_path(inst: Instance, times: ScheduleTimes, sol: Solution) -> list[int]:
    """One longest source-to-sink path, as op ids in schedule order.

    Tie-breaking is deterministic: the terminal operation is the lowest-id
    op finishing at the makespan, and each backward step prefers the
    job-predecessor arc over the machine-predecessor arc.
    """
    ops = inst.operations
    machine_pred = {}
    for seq in sol.sequences:
        for a, b in zip(seq, seq[1:]):
            machine_pred[b] = a
    terminal = min(
        op.id for op in ops if times.start_of(op.id) + op.duration == times.makespan
    )
    path = [terminal]
    cur = terminal
    while times.start_of(cur) > 0:
        s = times.start_of(cur)
        op = ops[cur - 1]
        nxt = None
        if op.pos_in_job > 0:
            jp = cur - 1  # job predecessor id (job-major layout)
            if times.start_of(jp) + ops[jp - 1].duration == s:
                nxt = jp
        if nxt is None:
            mp = machine_pred.get(cur)
            if mp is not None and times.start_of(mp) + ops[mp - 1].duration == s:
                nxt = mp
        if nxt is None:  # earliest starts guarantee a tight arc above 0
            raise AssertionError("no tight predecessor on a positive start time")
        path.append(nxt)
        cur = nxt
    path.reverse()
    return path


def critical_blocks(inst: Instance, times: ScheduleTimes, sol: Solution) -> list[CriticalBlock]:
    """Partition one critical path into maximal same-machine adjacent runs."""
    path = _critical_path(inst, times, sol)
    pos = {}
    for seq in sol.sequences:
        for i, oid in enumerate(seq):
            pos[oid] = i
    blocks: list[CriticalBlock] = []
    run = [path[0]]
    for prev, cur in zip(path, path[1:]):
        same_machine = inst.op(prev).machine == inst.op(cur).machine
        adjacent = same_machine and pos[cur] == pos[prev] + 1
        if adjacent:
            run.append(cur)
        else:
            blocks.append(CriticalBlock(machine=inst.op(run[0]).machine, ops=tuple(run)))
            run = [cur]
    blocks.append(CriticalBlock(machine=inst.op(run[0]).machine, ops=tuple(run)))
    return blocks


def n4_moves(inst: Instance, sol: Solution, blocks: list[CriticalBlock]) -> list[Move]:
    """Moves to the front/back of each critical block, duplicates emitted once.

    For a block of size two, moving the second op to the front and the first
    op to the back produce the same neighbor, so only the front move is kept.
    Enumeration order (front moves of a block, then its back moves) is fixed;
    the search relies on it for reproducible tie-breaking.
    """
    pos = {}
    for seq in sol.sequences:
        for i, oid in enumerate(seq):
            pos[oid] = i
    moves: list[Move] = []
    for blk in blocks:
        size = len(blk.ops)
        if size < 2:
            continue
        first, last = pos[blk.ops[0]], pos[blk.ops[-1]]
        if size == 2:
            moves.append(Move(machine=blk.machine, op=blk.ops[1], from_pos=last, to_pos=first))
            continue
        for oid in blk.ops[1:]:
            moves.append(Move(machine=blk.machine, op=oid, from_pos=pos[oid], to_pos=first))
        for oid in blk.ops[:-1]:
            moves.append(Move(machine=blk.machine, op=oid, from_pos=pos[oid], to_pos=last))
    return moves


def apply_move(sol: Solution, mv: Move) -> Solution:
    """A fresh solution with the move applied; the makespan cache is dropped."""
    seq = list(sol.sequences[mv.machine])
    if not (0 <= mv.from_pos < len(seq)) or not (0 <= mv.to_pos < len(seq)):
        raise IndexError(f"move positions out of range for machine {mv.machine}")
    if seq[mv.from_pos] != mv.op:
        raise ValueError(f"op {mv.op} is not at position {mv.from_pos} on machine {mv.machine}")
    op = seq.pop(mv.from_pos)
    seq.insert(mv.to_pos, op)
    sequences = list(sol.sequences)
    sequences[mv.machine] = tuple(seq)
    return Solution(tuple(sequences))


def random_solution(inst: Instance, rng: SplitMix64) -> Solution:
    """Feasible random solution by randomized list scheduling.

    Repeatedly picks a uniformly random job that still has an unscheduled
    operation and appends that operation to its machine's sequence.  Any
    sequence built this way is acyclic by construction.
    """
    next_pos = [0] * inst.n_jobs
    ops_per_job = [len(inst.job_ops(j)) for j in range(inst.n_jobs)]
    sequences: list[list[int]] = [[] for _ in range(inst.n_machines)]
    remaining = [j for j in range(inst.n_jobs) if ops_per_job[j] > 0]
    job_op_ids = [[op.id for op in inst.job_ops(j)] for j in range(inst.n_jobs)]
    while remaining:
        j = remaining[rng.below(len(remaining))]
        oid = job_op_ids[j][next_pos[j]]
        sequences[inst.op(oid).machine].append(oid)
        next_pos[j] += 1
        if next_pos[j] == ops_per_job[j]:
            remaining.remove(j)
    return Solution(tuple(tuple(s) for s in sequences))
