"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's own algorithms: longest
paths are computed by relax-until-fixpoint, optima by exhaustive
enumeration, and encodings by direct position comparison.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from tabushop import Instance, Solution, parse_standard
from tabushop.rng import SplitMix64

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "tabushop" / "data"


def random_instance(seed: int, n_jobs: int, n_machines: int, max_duration: int = 99) -> Instance:
    """Uniform random instance: shuffled machine order, durations in [1, max]."""
    rng = SplitMix64(seed)
    rows = []
    for _ in range(n_jobs):
        machines = list(range(n_machines))
        for i in range(n_machines - 1, 0, -1):
            k = rng.below(i + 1)
            machines[i], machines[k] = machines[k], machines[i]
        rows.append([(m, 1 + rng.below(max_duration)) for m in machines])
    text = f"{n_jobs} {n_machines}\n" + "\n".join(
        " ".join(f"{m} {p}" for m, p in row) for row in rows
    )
    return parse_standard(text, name=f"rnd{n_jobs}x{n_machines}_{seed}")


def bellman_makespan(inst: Instance, sol: Solution):
    """Relax-to-fixpoint longest path; None when the arc set has a cycle."""
    n = inst.n_ops
    arcs = []
    for op in inst.operations:
        if op.pos_in_job > 0:
            arcs.append((op.id - 1, op.id))  # predecessor id, successor id
    for seq in sol.sequences:
        for a, b in zip(seq, seq[1:]):
            arcs.append((a, b))
    start = {op.id: 0 for op in inst.operations}
    for sweep in range(n + 1):
        changed = False
        for a, b in arcs:
            cand = start[a] + inst.op(a).duration
            if cand > start[b]:
                start[b] = cand
                changed = True
        if not changed:
            return max(start[op.id] + op.duration for op in inst.operations)
    return None  # still relaxing after n sweeps: cycle


def all_machine_orderings(inst: Instance):
    """Every combination of per-machine permutations (feasible or not)."""
    per_machine = [inst.machine_ops(m) for m in range(inst.n_machines)]
    for combo in itertools.product(*(itertools.permutations(ops) for ops in per_machine)):
        yield Solution(tuple(tuple(seq) for seq in combo))


def exhaustive_optimum(inst: Instance) -> int:
    """Minimum makespan over all feasible machine orderings (tiny instances only)."""
    best = None
    for sol in all_machine_orderings(inst):
        ms = bellman_makespan(inst, sol)
        if ms is not None and (best is None or ms < best):
            best = ms
    assert best is not None
    return best


def random_feasible_solution(inst: Instance, seed: int) -> Solution:
    """Independent sampler: random topological dispatch (not the package's)."""
    rng = SplitMix64(seed)
    next_pos = [0] * inst.n_jobs
    counts = [len(inst.job_ops(j)) for j in range(inst.n_jobs)]
    seqs = [[] for _ in range(inst.n_machines)]
    live = [j for j in range(inst.n_jobs) if counts[j]]
    while live:
        j = live[rng.below(len(live))]
        op = inst.job_ops(j)[next_pos[j]]
        seqs[op.machine].append(op.id)
        next_pos[j] += 1
        if next_pos[j] == counts[j]:
            live.remove(j)
    return Solution(tuple(tuple(s) for s in seqs))


@pytest.fixture
def tiny_2x2() -> Instance:
    # job 0: m0/3 then m1/2; job 1: m1/4 then m0/1
    return parse_standard("2 2\n0 3 1 2\n1 4 0 1", name="tiny2x2")


@pytest.fixture
def one_by_one() -> Instance:
    return parse_standard("1 1\n0 5", name="one")
