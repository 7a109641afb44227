"""Job shop instance model: parsing, validation and serialization.

Two on-disk instance formats are supported:

* ``standard`` -- the OR-Library layout: ``n_jobs n_machines`` followed by
  one row per job of ``(machine, duration)`` pairs, machines 0-based.
* ``taillard`` -- the native layout of Taillard's benchmark files: a header
  line whose first two integers are ``n_jobs n_machines``, then an
  ``n_jobs x n_machines`` duration matrix, then a machine matrix of the
  same shape with machines numbered from 1.  Non-numeric marker lines
  ("Times", "Machines") are tolerated and skipped.

Reference solutions are stored as ``n_machines`` lines, each a permutation
of 0-based job indices giving the processing order on that machine.

Operations carry 1-based global ids assigned in job-major order:
``id = job_index * n_machines + pos_in_job + 1``.  Every module in this
package relies on that id scheme, so it is fixed here once.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field


class ParseError(ValueError):
    """Malformed instance or solution file, with source position."""

    def __init__(self, message: str, line: int | None = None, token: int | None = None):
        self.line = line
        self.token = token
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", token {token}" if token is not None else "") + ")"
        super().__init__(message + where)


class InfeasibleReferenceError(ValueError):
    """A reference solution whose machine orders induce a cycle."""


@dataclass(frozen=True)
class Operation:
    """One processing step of one job on one machine."""

    id: int  # 1-based global index, job-major
    job: int
    pos_in_job: int
    machine: int
    duration: int


@dataclass(frozen=True)
class Instance:
    """An immutable job shop instance.

    ``operations`` is in job-major order; job precedence is the implied
    chain within each job (position k precedes position k+1).
    """

    n_jobs: int
    n_machines: int
    operations: tuple[Operation, ...]
    name: str = "unnamed"
    _machine_ops: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_jobs <= 0 or self.n_machines <= 0:
            raise ValueError("n_jobs and n_machines must be positive")
        by_machine: list[list[int]] = [[] for _ in range(self.n_machines)]
        prev = None
        for k, op in enumerate(self.operations):
            if op.id != k + 1:
                raise ValueError(f"operation ids must be 1..N in order, got {op.id} at index {k}")
            if not 0 <= op.machine < self.n_machines:
                raise ValueError(f"operation {op.id}: machine {op.machine} out of range")
            if not 0 <= op.job < self.n_jobs:
                raise ValueError(f"operation {op.id}: job {op.job} out of range")
            if op.duration < 0:
                raise ValueError(f"operation {op.id}: negative duration")
            # Job-major contiguity: the whole package derives job predecessors
            # from id - 1, so each job's chain must occupy consecutive ids.
            if op.pos_in_job == 0:
                if prev is not None and op.job <= prev.job:
                    raise ValueError(f"operation {op.id}: jobs must appear in ascending job-major order")
            else:
                if prev is None or prev.job != op.job or prev.pos_in_job != op.pos_in_job - 1:
                    raise ValueError(f"operation {op.id}: job chain is not contiguous")
            prev = op
            by_machine[op.machine].append(op.id)
        object.__setattr__(self, "_machine_ops", tuple(tuple(v) for v in by_machine))

    @property
    def n_ops(self) -> int:
        return len(self.operations)

    def machine_ops(self, machine: int) -> tuple[int, ...]:
        """All operation ids assigned to a machine, ascending by id."""
        return self._machine_ops[machine]

    def job_ops(self, job: int) -> tuple[Operation, ...]:
        return tuple(op for op in self.operations if op.job == job)

    def op(self, op_id: int) -> Operation:
        return self.operations[op_id - 1]

    @property
    def trivial_lower_bound(self) -> int:
        """max(total work per machine, total work per job): a valid makespan bound."""
        mload = [0] * self.n_machines
        jload = [0] * self.n_jobs
        for op in self.operations:
            mload[op.machine] += op.duration
            jload[op.job] += op.duration
        return max(max(mload), max(jload))


@dataclass(frozen=True)
class ReferenceSolution:
    """Machine processing orders taken from a published/recorded solution.

    ``sequences[m]`` lists operation ids in processing order on machine m.
    ``makespan`` is filled in by :func:`parse_reference` after the acyclicity
    check.
    """

    sequences: tuple[tuple[int, ...], ...]
    makespan: int


class _Tokens:
    """Whitespace token stream that remembers line/token positions."""

    def __init__(self, text: str):
        self._items: list[tuple[str, int, int]] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            for tokno, tok in enumerate(line.split(), start=1):
                self._items.append((tok, lineno, tokno))
        self._i = 0

    def __len__(self) -> int:
        return len(self._items) - self._i

    def next_int(self, what: str) -> int:
        if self._i >= len(self._items):
            last_line = self._items[-1][1] if self._items else 0
            raise ParseError(f"truncated stream: expected {what}", line=last_line)
        tok, line, tokno = self._items[self._i]
        self._i += 1
        try:
            return int(tok)
        except ValueError:
            raise ParseError(f"expected integer for {what}, got {tok!r}", line=line, token=tokno) from None

    @property
    def position(self) -> tuple[int, int]:
        if self._i >= len(self._items):
            return (self._items[-1][1] if self._items else 0, 0)
        _, line, tokno = self._items[self._i]
        return line, tokno


def _as_text(data) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    if isinstance(data, io.IOBase):
        raw = data.read()
        return raw.decode("utf-8") if isinstance(raw, bytes) else raw
    return data


def parse_standard(data, name: str = "unnamed") -> Instance:
    """Parse the OR-Library standard format (machines 0-based)."""
    toks = _Tokens(_as_text(data))
    n_jobs = toks.next_int("n_jobs")
    n_machines = toks.next_int("n_machines")
    if n_jobs <= 0 or n_machines <= 0:
        raise ParseError(f"invalid header: {n_jobs} jobs, {n_machines} machines", line=1)
    if len(toks) != 2 * n_jobs * n_machines:
        raise ParseError(
            f"truncated or oversized stream: expected {2 * n_jobs * n_machines} "
            f"values after the header, found {len(toks)}"
        )
    ops: list[Operation] = []
    for j in range(n_jobs):
        for k in range(n_machines):
            line, tokno = toks.position
            m = toks.next_int(f"machine of job {j} op {k}")
            if not 0 <= m < n_machines:
                raise ParseError(f"machine index {m} out of range [0, {n_machines})", line=line, token=tokno)
            line, tokno = toks.position
            p = toks.next_int(f"duration of job {j} op {k}")
            if p < 0:
                raise ParseError(f"negative duration {p}", line=line, token=tokno)
            ops.append(Operation(id=j * n_machines + k + 1, job=j, pos_in_job=k, machine=m, duration=p))
    return Instance(n_jobs=n_jobs, n_machines=n_machines, operations=tuple(ops), name=name)


def parse_taillard(data, name: str = "unnamed") -> Instance:
    """Parse Taillard's native layout (times matrix then machines matrix, 1-based)."""
    text = _as_text(data)
    # Drop marker lines such as "Times" / "Machines"; keep everything numeric.
    numeric_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if any(ch.isalpha() for ch in stripped):
            continue
        numeric_lines.append(line)
    if not numeric_lines:
        raise ParseError("no numeric content found")
    header = numeric_lines[0].split()
    if len(header) < 2:
        raise ParseError("header must contain n_jobs and n_machines", line=1)
    try:
        n_jobs, n_machines = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"non-integer header: {header[:2]}", line=1) from None
    if n_jobs <= 0 or n_machines <= 0:
        raise ParseError(f"invalid header: {n_jobs} jobs, {n_machines} machines", line=1)
    # Remaining header tokens (seeds, bounds in published files) are ignored.

    body = _Tokens("\n".join(numeric_lines[1:]))
    expected = n_jobs * n_machines
    if len(body) != 2 * expected:
        raise ParseError(
            f"matrix dimension mismatch: expected {2 * expected} values "
            f"({n_jobs}x{n_machines} durations + machines), found {len(body)}"
        )
    durations = [[body.next_int("duration") for _ in range(n_machines)] for _ in range(n_jobs)]
    machines = []
    for j in range(n_jobs):
        row = []
        for k in range(n_machines):
            line, tokno = body.position
            m = body.next_int("machine")
            if m < 1 or m > n_machines:
                raise ParseError(
                    f"machine index {m} out of 1-based range [1, {n_machines}]", line=line, token=tokno
                )
            row.append(m - 1)
        machines.append(row)
    ops = []
    for j in range(n_jobs):
        for k in range(n_machines):
            p = durations[j][k]
            if p < 0:
                raise ParseError(f"negative duration {p} for job {j} op {k}")
            ops.append(Operation(id=j * n_machines + k + 1, job=j, pos_in_job=k, machine=machines[j][k], duration=p))
    return Instance(n_jobs=n_jobs, n_machines=n_machines, operations=tuple(ops), name=name)


def to_standard_text(inst: Instance) -> str:
    """Serialize to the standard format; round-trips through parse_standard."""
    lines = [f"{inst.n_jobs} {inst.n_machines}"]
    for j in range(inst.n_jobs):
        row = []
        for op in inst.job_ops(j):
            row.append(f"{op.machine} {op.duration}")
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def to_taillard_text(inst: Instance) -> str:
    """Serialize to the Taillard native layout (requires n_machines ops per job)."""
    for j in range(inst.n_jobs):
        if len(inst.job_ops(j)) != inst.n_machines:
            raise ValueError("taillard layout requires exactly n_machines operations per job")
    lines = [f"{inst.n_jobs} {inst.n_machines}", "Times"]
    for j in range(inst.n_jobs):
        lines.append(" ".join(str(op.duration) for op in inst.job_ops(j)))
    lines.append("Machines")
    for j in range(inst.n_jobs):
        lines.append(" ".join(str(op.machine + 1) for op in inst.job_ops(j)))
    return "\n".join(lines) + "\n"


def parse_reference(data, inst: Instance) -> ReferenceSolution:
    """Parse a reference solution and verify it is feasible for ``inst``.

    Raises :class:`InfeasibleReferenceError` when the machine orders induce
    a cycle together with the job chains.
    """
    text = _as_text(data)
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if len(rows) != inst.n_machines:
        raise ParseError(f"expected {inst.n_machines} machine lines, found {len(rows)}")

    # Job index -> operation id per machine.  The reference file format can
    # only describe instances where no job visits a machine twice.
    op_on_machine: list[dict[int, int]] = [dict() for _ in range(inst.n_machines)]
    for op in inst.operations:
        if op.job in op_on_machine[op.machine]:
            raise ParseError(
                f"job {op.job} visits machine {op.machine} more than once; "
                "reference format cannot express this instance"
            )
        op_on_machine[op.machine][op.job] = op.id

    sequences: list[tuple[int, ...]] = []
    for m, row in enumerate(rows):
        try:
            jobs = [int(tok) for tok in row]
        except ValueError:
            raise ParseError(f"non-integer job index on machine {m}", line=m + 1) from None
        expected = sorted(op_on_machine[m])
        if sorted(jobs) != expected:
            raise ParseError(
                f"machine {m}: line is not a permutation of its jobs {expected}", line=m + 1
            )
        sequences.append(tuple(op_on_machine[m][j] for j in jobs))

    from .schedule import Solution, evaluate  # local import: schedule depends on this module

    times = evaluate(inst, Solution(tuple(sequences)))
    if times is None:
        raise InfeasibleReferenceError("reference solution induces a cycle (infeasible reference)")
    return ReferenceSolution(sequences=tuple(sequences), makespan=times.makespan)


def reference_to_text(sequences, inst: Instance) -> str:
    """Serialize machine sequences (operation ids) as job-index lines."""
    lines = []
    for m, seq in enumerate(sequences):
        lines.append(" ".join(str(inst.op(oid).job) for oid in seq))
    return "\n".join(lines) + "\n"


def load_instance(path, fmt: str = "std") -> Instance:
    """Load an instance file; ``fmt`` is ``std`` or ``taillard``."""
    from pathlib import Path

    p = Path(path)
    text = p.read_text()
    if fmt in ("std", "standard"):
        return parse_standard(text, name=p.stem)
    if fmt == "taillard":
        return parse_taillard(text, name=p.stem)
    raise ValueError(f"unknown format {fmt!r} (expected 'std' or 'taillard')")
