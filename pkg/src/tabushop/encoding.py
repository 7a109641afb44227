"""Pair-variable view of solutions.

Every unordered pair of operations sharing a machine gets one binary
component; component value 1 means the lower-id operation is processed
first.  That orientation is a package-wide convention: the learning layer,
the tabu expirations and the reference labels all index the same pair list.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instances import Instance
from .schedule import Move, Solution


@dataclass(frozen=True)
class PairIndexSet:
    """Lexicographically sorted same-machine pairs (i, j), i < j, of op ids."""

    pairs: tuple[tuple[int, int], ...]
    index_of: dict[tuple[int, int], int]

    def __len__(self) -> int:
        return len(self.pairs)


def build_index_set(inst: Instance) -> PairIndexSet:
    pairs = []
    for m in range(inst.n_machines):
        ops = inst.machine_ops(m)  # ascending ids
        for a in range(len(ops)):
            for b in range(a + 1, len(ops)):
                pairs.append((ops[a], ops[b]))
    pairs.sort()
    return PairIndexSet(pairs=tuple(pairs), index_of={p: k for k, p in enumerate(pairs)})


def encode(sol: Solution, idx: PairIndexSet) -> np.ndarray:
    """Bit per pair: 1 iff the lower-id op precedes the higher-id op."""
    pos = {}
    for seq in sol.sequences:
        for i, oid in enumerate(seq):
            pos[oid] = i
    bits = np.empty(len(idx), dtype=np.uint8)
    for k, (i, j) in enumerate(idx.pairs):
        bits[k] = 1 if pos[i] < pos[j] else 0
    return bits


def changed_components(mv: Move, sol: Solution, idx: PairIndexSet) -> list[int]:
    """Pair indices flipped by a move: one per operation the mover jumps over."""
    seq = sol.sequences[mv.machine]
    if mv.to_pos < mv.from_pos:
        jumped = seq[mv.to_pos : mv.from_pos]
    else:
        jumped = seq[mv.from_pos + 1 : mv.to_pos + 1]
    out = []
    for k in jumped:
        pair = (mv.op, k) if mv.op < k else (k, mv.op)
        out.append(idx.index_of[pair])
    return out
