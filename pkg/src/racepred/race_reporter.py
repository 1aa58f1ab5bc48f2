"""Race checking and reporting.

Pass 1 keeps, per variable, the join of the timestamps of all reads and
all writes seen so far.  A read is flagged when the write join is not
below its own timestamp; a write is additionally checked against the
read join.  Earlier same-thread accesses are always below the current
timestamp, so only cross-thread conflicts can flag.  A flag names only
the second event of a racing pair.

Pass 2 (optional) replays the trace through a fresh engine, retaining
every access to a flagged variable, and at each flagged event emits one
pair per earlier conflicting access with an incomparable timestamp.
Pairs are deduplicated by their unordered program-location pair, with a
count, minimum event-index separation, and one example pair of indices.
Only the first flagged pair is guaranteed to be a real race (an
unordered pair may also witness a predictable deadlock); it is marked
sound and the rest heuristic.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass
from typing import Callable, Iterable

from .trace_model import Event, Trace, READ, WRITE
from .vclock import join_into, leq


class MemoryBudgetExceeded(Warning):
    """Pass-2 retention hit the pair budget; the offending variable's
    pairs degrade to second-components-only."""


@dataclass
class AccessClocks:
    """Per-variable joins of access timestamps (reads and writes apart)."""

    reads: dict[int, list[int]]
    writes: dict[int, list[int]]

    def __init__(self) -> None:
        self.reads = {}
        self.writes = {}


@dataclass(slots=True)
class Flag:
    """Second component of a racing pair, found during pass 1."""

    idx: int
    var: int
    kind: int
    tid: int
    loc: str


@dataclass(slots=True)
class RacePair:
    loc_a: str               # lexicographically <= loc_b
    loc_b: str
    count: int
    min_distance: int
    example: tuple[int, int]
    sound: bool

    def render(self, detector: str) -> str:
        i1, i2 = self.example
        return (f"RACE|{detector}|{self.loc_a}|{self.loc_b}|count={self.count}"
                f"|mindist={self.min_distance}|ex={i1},{i2}|sound={1 if self.sound else 0}")


def check_access(clocks: AccessClocks, kind: int, x: int, c) -> bool:
    """Race-check one access with timestamp c, then fold c into the joins.
    Returns True when the access races with some earlier conflicting one."""
    if kind == READ:
        w = clocks.writes.get(x)
        flagged = w is not None and not leq(w, c)
        r = clocks.reads.get(x)
        if r is None:
            clocks.reads[x] = list(c)
        else:
            join_into(r, c)
    else:
        w = clocks.writes.get(x)
        r = clocks.reads.get(x)
        flagged = (w is not None and not leq(w, c)) or (r is not None and not leq(r, c))
        if w is None:
            clocks.writes[x] = list(c)
        else:
            join_into(w, c)
    return flagged


def run_detector(events: Iterable[Event], engine, clocks: AccessClocks | None = None,
                 dump=None) -> list[Flag]:
    """Feed events through an engine with inline race checking; returns flags
    in increasing index order.  dump, if given, is called with
    (event, C, engine) after each event (timestamp dumps)."""
    if clocks is None:
        clocks = AccessClocks()
    flags: list[Flag] = []
    for e in events:
        c = engine.process(e)
        if e.kind <= WRITE and check_access(clocks, e.kind, e.op, c):
            flags.append(Flag(e.idx, e.op, e.kind, e.tid, e.loc_or_default()))
        if dump is not None:
            dump(e, c, engine)
    return flags


def resolve_pairs(trace: Trace, flags: list[Flag], engine_factory: Callable[[], object],
                  pair_budget: int = 10_000_000) -> tuple[list[RacePair], list[str]]:
    """Second pass: replay and resolve every flag into full location pairs.

    Retains accesses only for flagged variables.  If total retention
    exceeds pair_budget, the variable that hit the cap degrades: its
    flags are reported with an unknown first component.  Deterministic
    and idempotent for a given trace and flag list.
    """
    notes: list[str] = []
    if not flags:
        return [], notes
    flagged_vars = {f.var for f in flags}
    flagged_at = {f.idx for f in flags}
    first_flag_idx = min(flagged_at)
    retained: dict[int, list[tuple[int, int, int, str, tuple]]] = {x: [] for x in flagged_vars}
    degraded: set[int] = set()
    budget_used = 0
    # (loc_a, loc_b) -> [count, min_distance, example, sound]
    agg: dict[tuple[str, str], list] = {}

    def add_pair(loc1: str, i1: int, loc2: str, i2: int, sound: bool) -> None:
        key = (loc1, loc2) if loc1 <= loc2 else (loc2, loc1)
        dist = i2 - i1
        rec = agg.get(key)
        if rec is None:
            agg[key] = [1, dist, (i1, i2), sound]
        else:
            rec[0] += 1
            if dist < rec[1]:
                rec[1] = dist
                rec[2] = (i1, i2)
            rec[3] = rec[3] or sound

    engine = engine_factory()
    for e in trace.events:
        c = engine.process(e)
        if e.kind > WRITE or e.op not in flagged_vars:
            continue
        x = e.op
        if e.idx in flagged_at:
            if x in degraded:
                add_pair("?", -1, e.loc_or_default(), e.idx, False)
            else:
                latest = None
                for i1, t1, k1, loc1, c1 in retained[x]:
                    if (t1 != e.tid and (k1 == WRITE or e.kind == WRITE)
                            and not leq(c1, c) and not leq(c, c1)):
                        add_pair(loc1, i1, e.loc_or_default(), e.idx, False)
                        latest = (i1, loc1)
                if latest is not None and e.idx == first_flag_idx:
                    # the soundness guarantee covers the closest such pair
                    i1, loc1 = latest
                    key = (loc1, e.loc_or_default())
                    key = key if key[0] <= key[1] else (key[1], key[0])
                    agg[key][3] = True
        if x not in degraded:
            retained[x].append((e.idx, e.tid, e.kind, e.loc_or_default(), c))
            budget_used += 1
            if budget_used > pair_budget:
                budget_used -= len(retained[x])
                retained[x] = []
                degraded.add(x)
                msg = (f"pair budget {pair_budget} exceeded at event {e.idx}; "
                       f"races on variable {trace.var_names[x]} degraded to second components")
                notes.append(msg)
                _warnings.warn(msg, MemoryBudgetExceeded)

    pairs = [RacePair(k[0], k[1], rec[0], rec[1], rec[2], rec[3])
             for k, rec in sorted(agg.items())]
    return pairs, notes


def render_flags(trace: Trace, flags: list[Flag], detector: str) -> list[str]:
    return [f"FLAG|{detector}|idx={f.idx}|var={trace.var_names[f.var]}|loc={f.loc}"
            for f in flags]


def summary_lines(detector: str, trace_counts: tuple[int, int, int, int],
                  flags: int, engine, pairs: int | None = None) -> list[str]:
    n, t, l, v = trace_counts
    lines = [
        f"detector={detector}",
        f"events={n}",
        f"threads={t}",
        f"locks={l}",
        f"vars={v}",
        f"flags={flags}",
    ]
    if pairs is not None:
        lines.append(f"pairs={pairs}")
    mql = engine.max_queue_load
    pct = (100.0 * mql / n) if n else 0.0
    lines.append(f"max_queue_load={mql}")
    lines.append(f"max_queue_load_pct={pct:.4f}")
    return lines
