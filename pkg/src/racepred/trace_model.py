"""Trace model: events, the STD text format, and well-formedness checks.

One event per line, fields separated by ``|``::

    <tid>|<op>|<operand>[|<loc>]

with op in {acq, rel, r, w, fork, join}.  ``#`` starts a comment line and
blank lines are ignored.  Thread/lock/variable ids match
``[A-Za-z0-9_.:$-]+`` and live in disjoint namespaces; the optional loc
field is an opaque program-location string (everything after the third
bar, so it may itself contain bars).

Ids are interned to dense integers at parse time so the engines index
arrays instead of hash tables on the hot path.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

READ, WRITE, ACQUIRE, RELEASE, FORK, JOIN = range(6)

KIND_TOKEN = {READ: "r", WRITE: "w", ACQUIRE: "acq", RELEASE: "rel", FORK: "fork", JOIN: "join"}
TOKEN_KIND = {tok: kind for kind, tok in KIND_TOKEN.items()}
KIND_NAME = {READ: "Read", WRITE: "Write", ACQUIRE: "Acquire", RELEASE: "Release", FORK: "Fork", JOIN: "Join"}

_ID_RE = re.compile(r"[A-Za-z0-9_.:$-]+\Z")


class ParseError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass(slots=True)
class Event:
    """One trace record.  tid/op are dense interned indices; for fork/join
    the operand is the child thread's index."""

    idx: int
    tid: int
    kind: int
    op: int
    loc: str | None = None

    def loc_or_default(self) -> str:
        return self.loc if self.loc is not None else f"idx:{self.idx}"

    def is_access(self) -> bool:
        return self.kind <= WRITE


class Trace:
    """An immutable event sequence plus the interning tables built with it."""

    def __init__(self, events, thread_names, lock_names, var_names):
        self.events: list[Event] = events
        self.thread_names: list[str] = thread_names
        self.lock_names: list[str] = lock_names
        self.var_names: list[str] = var_names

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_threads(self) -> int:
        return len(self.thread_names)

    @property
    def n_locks(self) -> int:
        return len(self.lock_names)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def loc(self, idx: int) -> str:
        return self.events[idx].loc_or_default()

    def operand_name(self, e: Event) -> str:
        if e.kind <= WRITE:
            return self.var_names[e.op]
        if e.kind <= RELEASE:
            return self.lock_names[e.op]
        return self.thread_names[e.op]

    def event_line(self, e: Event) -> str:
        line = f"{self.thread_names[e.tid]}|{KIND_TOKEN[e.kind]}|{self.operand_name(e)}"
        if e.loc is not None:
            line += f"|{e.loc}"
        return line

    def serialize(self) -> str:
        """STD text; parsing this back reproduces the trace byte-for-byte."""
        return "".join(self.event_line(e) + "\n" for e in self.events)


class TraceBuilder:
    """Accumulates events, interning names as they appear."""

    def __init__(self) -> None:
        self.events: list[Event] = []
        self.thread_names: list[str] = []
        self.lock_names: list[str] = []
        self.var_names: list[str] = []
        self._threads: dict[str, int] = {}
        self._locks: dict[str, int] = {}
        self._vars: dict[str, int] = {}

    def intern_thread(self, name: str) -> int:
        i = self._threads.get(name)
        if i is None:
            i = len(self.thread_names)
            self._threads[name] = i
            self.thread_names.append(name)
        return i

    def intern_lock(self, name: str) -> int:
        i = self._locks.get(name)
        if i is None:
            i = len(self.lock_names)
            self._locks[name] = i
            self.lock_names.append(name)
        return i

    def intern_var(self, name: str) -> int:
        i = self._vars.get(name)
        if i is None:
            i = len(self.var_names)
            self._vars[name] = i
            self.var_names.append(name)
        return i

    def add(self, tid_name: str, kind: int, operand_name: str, loc: str | None = None) -> Event:
        t = self.intern_thread(tid_name)
        if kind <= WRITE:
            op = self.intern_var(operand_name)
        elif kind <= RELEASE:
            op = self.intern_lock(operand_name)
        else:
            op = self.intern_thread(operand_name)
        e = Event(len(self.events), t, kind, op, loc)
        self.events.append(e)
        return e

    def parse_line(self, line: str, line_no: int) -> Event | None:
        """Parse one input line; returns None for comments/blank lines."""
        line = line.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            return None
        parts = line.split("|", 3)
        if len(parts) < 3:
            raise ParseError(line_no, f"expected tid|op|operand[|loc], got {len(parts)} field(s)")
        tid_name, op_tok, operand = parts[0], parts[1], parts[2]
        loc = parts[3] if len(parts) == 4 else None
        kind = TOKEN_KIND.get(op_tok)
        if kind is None:
            raise ParseError(line_no, f"unknown op token {op_tok!r}")
        if not operand:
            raise ParseError(line_no, "empty operand")
        if not _ID_RE.match(tid_name):
            raise ParseError(line_no, f"bad thread id {tid_name!r}")
        if not _ID_RE.match(operand):
            raise ParseError(line_no, f"bad operand id {operand!r}")
        return self.add(tid_name, kind, operand, loc)

    def build(self) -> Trace:
        return Trace(self.events, self.thread_names, self.lock_names, self.var_names)


def parse_trace(lines: Iterable[str]) -> Trace:
    b = TraceBuilder()
    for line_no, line in enumerate(lines, 1):
        b.parse_line(line, line_no)
    return b.build()


def iter_parse(lines: Iterable[str], builder: TraceBuilder) -> Iterator[Event]:
    """Streaming parse: yields events one by one while growing builder's tables."""
    for line_no, line in enumerate(lines, 1):
        e = builder.parse_line(line, line_no)
        if e is not None:
            yield e


def load_trace(path: str) -> Trace:
    with open(path, "r", encoding="utf-8") as f:
        return parse_trace(f)


def conflicting(e1: Event, e2: Event) -> bool:
    """Same variable, at least one write, different threads."""
    return (
        e1.kind <= WRITE
        and e2.kind <= WRITE
        and e1.op == e2.op
        and e1.tid != e2.tid
        and (e1.kind == WRITE or e2.kind == WRITE)
    )


# Violation kinds.  The first five concern lock discipline, the last two
# fork/join plausibility.  ReentrantFlattened and DanglingCriticalSection
# are warnings: the engines flatten re-entrant sections on the fly and a
# section left open at end of trace is common in real logs.
DOUBLE_ACQUIRE = "DoubleAcquire"
UNMATCHED_RELEASE = "UnmatchedRelease"
BAD_NESTING = "BadNesting"
REENTRANT_FLATTENED = "ReentrantFlattened"
DANGLING_CRITICAL_SECTION = "DanglingCriticalSection"
FORK_OF_KNOWN_THREAD = "ForkOfKnownThread"
JOIN_OF_LIVE_THREAD = "JoinOfLiveThread"

_WARNING_KINDS = {REENTRANT_FLATTENED, DANGLING_CRITICAL_SECTION}


@dataclass(slots=True)
class Violation:
    idx: int
    kind: str
    message: str

    @property
    def is_warning(self) -> bool:
        return self.kind in _WARNING_KINDS

    def render(self) -> str:
        sev = "warning" if self.is_warning else "error"
        return f"VIOLATION|{sev}|{self.kind}|idx={self.idx}|{self.message}"


@dataclass
class ValidationReport:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def errors(self) -> list[Violation]:
        return [v for v in self.violations if not v.is_warning]

    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.is_warning]


def validate(trace: Trace) -> ValidationReport:
    """Check lock semantics, well-nestedness and fork/join plausibility.

    Re-entrant re-acquisition by the holding thread is flattened by the
    engines, so here it only warns.  Nesting is judged on the flattened
    view.  All issues land in the report; nothing raises.
    """
    violations: list[Violation] = []
    first_idx: dict[int, int] = {}
    last_idx: dict[int, int] = {}
    for e in trace.events:
        first_idx.setdefault(e.tid, e.idx)
        last_idx[e.tid] = e.idx

    holder: dict[int, int] = {}          # lock -> thread
    depth: dict[tuple[int, int], int] = {}
    stacks: dict[int, list[tuple[int, int]]] = {}   # thread -> [(lock, acq idx)]
    forked: set[int] = set()

    for e in trace.events:
        t, l, i = e.tid, e.op, e.idx
        if e.kind == ACQUIRE:
            d = depth.get((t, l), 0)
            if d > 0:
                depth[(t, l)] = d + 1
                violations.append(Violation(i, REENTRANT_FLATTENED,
                                            f"{trace.thread_names[t]} re-acquires held lock {trace.lock_names[l]}"))
            elif l in holder:
                violations.append(Violation(i, DOUBLE_ACQUIRE,
                                            f"lock {trace.lock_names[l]} already held by {trace.thread_names[holder[l]]}"))
            else:
                holder[l] = t
                depth[(t, l)] = 1
                stacks.setdefault(t, []).append((l, i))
        elif e.kind == RELEASE:
            d = depth.get((t, l), 0)
            if d == 0:
                violations.append(Violation(i, UNMATCHED_RELEASE,
                                            f"{trace.thread_names[t]} releases {trace.lock_names[l]} it does not hold"))
            elif d > 1:
                depth[(t, l)] = d - 1   # inner pair of a flattened section
            else:
                st = stacks.get(t, [])
                if st and st[-1][0] == l:
                    st.pop()
                else:
                    violations.append(Violation(i, BAD_NESTING,
                                                f"release of {trace.lock_names[l]} does not match innermost open section"))
                    for k in range(len(st) - 1, -1, -1):
                        if st[k][0] == l:
                            del st[k]
                            break
                depth[(t, l)] = 0
                holder.pop(l, None)
        elif e.kind == FORK:
            u = e.op
            if u in forked or first_idx.get(u, trace.n_events) < i:
                violations.append(Violation(i, FORK_OF_KNOWN_THREAD,
                                            f"fork of already-active thread {trace.thread_names[u]}"))
            forked.add(u)
        elif e.kind == JOIN:
            u = e.op
            if u == t or last_idx.get(u, -1) > i:
                violations.append(Violation(i, JOIN_OF_LIVE_THREAD,
                                            f"join of thread {trace.thread_names[u]} which still has events"))

    for t, st in stacks.items():
        for l, acq_i in st:
            violations.append(Violation(acq_i, DANGLING_CRITICAL_SECTION,
                                        f"{trace.thread_names[t]} never releases {trace.lock_names[l]}"))

    ok = all(v.is_warning for v in violations)
    return ValidationReport(ok, violations)
