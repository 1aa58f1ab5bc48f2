"""Streaming WCP vector-clock engine: one linear pass, one timestamp per event.

Per thread t the state holds a local counter n[t] and two clocks: pred[t]
joins the timestamps of every event strictly WCP-before t's latest event,
and hbt[t] joins those of every event HB-before it (component t mirrors
n[t]).  The timestamp of t's latest event is pred[t] with component t
set to n[t]; it is materialized on demand rather than mirrored.  n[t]
bumps just before the next event of t whenever t's previous event was a
release.

Per lock: the pred/hbt values of the last release, plus an append-only
log of critical sections (owner, acquire-time, release-HB-time) with one
read cursor per thread.  A release drains its cursor forward while the
logged acquire time is <= the live current time, folding the logged
release time into pred; entries the releasing thread wrote itself are
skipped.  This is the release-release ordering rule: once a foreign
acquire time is dominated, some event of that section is WCP-ordered
below us, so its release must be too.  Draining re-reads the current
time after every fold, so one drained section can unlock the next.

Per (lock, variable): the release-HB-times of sections over the lock
that read/wrote the variable.  An access must join the times of such
releases by *other* threads only: an access is ordered after an earlier
release only when that release's section holds a conflicting (hence
cross-thread) access, and folding a thread's own release times here
would smuggle HB-only knowledge into pred and over-order.  Since every
release of a lock dominates all earlier releases of that lock (its
acquire joined the lock's HB clock), the contributions form a chain, so
it suffices to keep the latest contribution and the latest one from any
other thread: whichever of the two is foreign to the accessor is exactly
the join of all foreign contributions.

Cross-thread orderings carry the releaser's full HB time, never just its
own components, so everything HB-below the ordering's source arrives too.
"""

from __future__ import annotations

from .trace_model import ACQUIRE, FORK, JOIN, READ, RELEASE, WRITE, Event
from .vclock import join_into, leq


class EngineError(Exception):
    """Internal consistency violation (malformed input or broken invariant)."""


class WcpEngine:
    detector = "wcp"

    def __init__(self, *, invariant_checks: bool = False, record: bool = False,
                 gc_history: bool = False):
        self.nthreads = 0
        self.nlocks = 0
        # per thread
        self.local: list[int] = []
        self.pred: list[list[int]] = []
        self.hbt: list[list[int]] = []
        self.pending: list[bool] = []
        self.started: list[bool] = []          # performed an event or was forked
        self.frames: list[list[list]] = []     # [lock, log index, rset, wset]
        self.held: list[dict[int, int]] = []   # lock -> re-entry depth
        # per lock
        self.lock_pred: list[tuple[int, ...] | None] = []
        self.lock_hb: list[tuple[int, ...] | None] = []
        self.holder: list[int] = []
        self.log: list[list[list]] = []        # [owner, acq time, rel time | None]
        self.log_base: list[int] = []          # entries trimmed off the front
        self.cursors: list[list[int]] = []     # absolute, lazily padded per thread
        self.open_entry: list[int] = []        # log index of the open section, or -1
        # per (lock, var): [thread1, time1, thread2, time2] -- the latest
        # contributing release and the latest one by a different thread
        self.read_rel_times: dict[tuple[int, int], list] = {}
        self.write_rel_times: dict[tuple[int, int], list] = {}

        self.events_processed = 0
        self.reentrant_flattened = 0
        self.warnings: list[str] = []
        self.queue_load = 0
        self.max_queue_load = 0
        self.total_entries = 0

        self.invariant_checks = invariant_checks
        self._last_times: list[tuple | None] = []
        self.record = record
        self.records: list[tuple] = []          # (tid, C, P, H) per event
        self.gc_history = gc_history
        self._retire_at: dict[int, int] | None = None

    # -- state growth -------------------------------------------------

    def _ensure_thread(self, t: int) -> None:
        while self.nthreads <= t:
            u = self.nthreads
            self.nthreads += 1
            self.local.append(1)
            self.pred.append([0] * (u + 1))
            row = [0] * (u + 1)
            row[u] = 1
            self.hbt.append(row)
            self.pending.append(False)
            self.started.append(False)
            self.frames.append([])
            self.held.append({})
            self._last_times.append(None)
            # a fresh thread's cursors logically start at 0: the full log
            # of every lock is still ahead of it
            self.queue_load += self.total_entries
            if self.queue_load > self.max_queue_load:
                self.max_queue_load = self.queue_load

    def _ensure_lock(self, l: int) -> None:
        while self.nlocks <= l:
            self.nlocks += 1
            self.lock_pred.append(None)
            self.lock_hb.append(None)
            self.holder.append(-1)
            self.log.append([])
            self.log_base.append(0)
            self.cursors.append([])
            self.open_entry.append(-1)

    def _tick(self, t: int) -> None:
        self.started[t] = True
        # local clock bump owed since t's last release
        if self.pending[t]:
            self.pending[t] = False
            n = self.local[t] + 1
            self.local[t] = n
            self.hbt[t][t] = n

    def _snap(self, t: int) -> tuple[int, ...]:
        c = self.pred[t][:]
        c[t] = self.local[t]
        return tuple(c)

    # -- operations (one per event kind) -------------------------------

    def acquire(self, t: int, l: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        self._ensure_lock(l)
        held = self.held[t]
        d = held.get(l, 0)
        if d:
            # re-entrant re-acquisition: flattened, not a logical acquire
            held[l] = d + 1
            self.reentrant_flattened += 1
            return self._snap(t)
        if self.holder[l] != -1:
            raise EngineError(f"acquire of lock {l} already held by thread {self.holder[l]}")
        self._tick(t)
        hl = self.lock_hb[l]
        if hl is not None:
            join_into(self.hbt[t], hl)
        pl = self.lock_pred[l]
        if pl is not None:
            join_into(self.pred[t], pl)
        snap = self._snap(t)
        log_l = self.log[l]
        entry_idx = self.log_base[l] + len(log_l)
        log_l.append([t, snap, None])
        self.total_entries += 1
        self.queue_load += self.nthreads - 1
        if self.queue_load > self.max_queue_load:
            self.max_queue_load = self.queue_load
        self.open_entry[l] = entry_idx
        self.holder[l] = t
        held[l] = 1
        self.frames[t].append([l, entry_idx, set(), set()])
        return snap

    def release(self, t: int, l: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        held = self.held[t]
        d = held.get(l, 0)
        if d == 0:
            raise EngineError(f"release of lock {l} not held by thread {t}")
        if d > 1:
            held[l] = d - 1
            return self._snap(t)
        frames = self.frames[t]
        if not frames or frames[-1][0] != l:
            raise EngineError(f"release of lock {l} does not match innermost open section")
        self._tick(t)

        # Drain this thread's cursor over the lock's section log.
        cur = self.cursors[l]
        if len(cur) <= t:
            cur.extend([0] * (t + 1 - len(cur)))
        log_l = self.log[l]
        base = self.log_base[l]
        end = base + len(log_l)
        i = cur[t]
        pred_t = self.pred[t]
        n_t = self.local[t]
        while i < end:
            entry = log_l[i - base]
            if entry[0] == t:
                i += 1
                continue
            acq = entry[1]
            # leq(acq, C_t) with C_t = pred_t except component t, which is n_t
            ok = True
            lp = len(pred_t)
            for j in range(len(acq)):
                aj = acq[j]
                if j == t:
                    if aj > n_t:
                        ok = False
                        break
                elif aj > (pred_t[j] if j < lp else 0):
                    ok = False
                    break
            if not ok:
                break
            rel_time = entry[2]
            if rel_time is None:
                raise EngineError("drained a critical section whose release is still pending")
            join_into(pred_t, rel_time)
            self.queue_load -= 1
            i += 1
        cur[t] = i

        _, entry_idx, rset, wset = frames.pop()
        h_snap = tuple(self.hbt[t])
        for x in rset:
            self._contribute(self.read_rel_times, l, x, t, h_snap)
        for x in wset:
            self._contribute(self.write_rel_times, l, x, t, h_snap)
        self.lock_hb[l] = h_snap
        self.lock_pred[l] = tuple(pred_t)
        log_l[entry_idx - base][2] = h_snap
        self.open_entry[l] = -1
        self.holder[l] = -1
        del held[l]
        if frames:
            # nested accesses belong to the enclosing section too
            outer = frames[-1]
            outer[2] |= rset
            outer[3] |= wset
        self.pending[t] = True
        if self.gc_history:
            self._maybe_trim(l)
        return self._snap(t)

    @staticmethod
    def _contribute(rel_times, l: int, x: int, t: int, h_snap) -> None:
        # the new release dominates every earlier release of this lock
        slot = rel_times.get((l, x))
        if slot is None:
            rel_times[(l, x)] = [t, h_snap, -1, None]
        elif slot[0] == t:
            slot[1] = h_snap
        else:
            slot[2] = slot[0]
            slot[3] = slot[1]
            slot[0] = t
            slot[1] = h_snap

    def read(self, t: int, x: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        self._tick(t)
        frames = self.frames[t]
        if frames:
            pred_t = self.pred[t]
            wrt = self.write_rel_times
            for fr in frames:
                slot = wrt.get((fr[0], x))
                if slot is not None:
                    if slot[0] != t:
                        join_into(pred_t, slot[1])
                    elif slot[3] is not None:
                        join_into(pred_t, slot[3])
            frames[-1][2].add(x)
        return self._snap(t)

    def write(self, t: int, x: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        self._tick(t)
        frames = self.frames[t]
        if frames:
            pred_t = self.pred[t]
            rrt = self.read_rel_times
            wrt = self.write_rel_times
            for fr in frames:
                key = (fr[0], x)
                for slot in (rrt.get(key), wrt.get(key)):
                    if slot is not None:
                        if slot[0] != t:
                            join_into(pred_t, slot[1])
                        elif slot[3] is not None:
                            join_into(pred_t, slot[3])
            frames[-1][3].add(x)
        return self._snap(t)

    def fork(self, t: int, u: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        if u == t or (u < self.nthreads and self.started[u]):
            raise EngineError(f"fork of already-active thread {u}")
        self._tick(t)
        self._ensure_thread(u)
        self.started[u] = True
        # child starts HB-after the fork and inherits its WCP knowledge
        join_into(self.hbt[u], self.hbt[t])
        row = list(self.pred[t])
        if len(row) <= u:
            row.extend([0] * (u + 1 - len(row)))
        self.pred[u] = row
        snap = self._snap(t)
        # handing the HB clock to the child ends the parent's local-clock
        # granule, exactly like a release: later same-granule parent events
        # must not look HB-below the child's sections to third parties
        self.pending[t] = True
        return snap

    def join(self, t: int, u: int) -> tuple[int, ...]:
        self._ensure_thread(t)
        if u == t:
            raise EngineError("thread cannot join itself")
        self._tick(t)
        if u >= self.nthreads or not self.started[u]:
            self.warnings.append(f"join of unknown thread {u} ignored")
            return self._snap(t)
        join_into(self.hbt[t], self.hbt[u])
        join_into(self.pred[t], self.pred[u])
        return self._snap(t)

    # -- driver ---------------------------------------------------------

    _DISPATCH = {READ: read, WRITE: write, ACQUIRE: acquire, RELEASE: release,
                 FORK: fork, JOIN: join}

    def process(self, e: Event) -> tuple[int, ...]:
        """Dispatch one event (fed in trace order); returns its timestamp."""
        snap = self._DISPATCH[e.kind](self, e.tid, e.op)
        self.events_processed += 1
        if self._retire_at is not None and self._retire_at.get(e.tid) == e.idx:
            self._retire_thread(e.tid)
        if self.record:
            t = e.tid
            self.records.append((t, snap, tuple(self.pred[t]), tuple(self.hbt[t])))
        if self.invariant_checks:
            self._check_invariants(e.tid)
        return snap

    def current_time(self, t: int) -> tuple[int, ...]:
        return self._snap(t)

    def _check_invariants(self, t: int) -> None:
        p, h = self.pred[t], self.hbt[t]
        c = self._snap(t)
        if not leq(p, c) or not leq(c, h):
            raise EngineError(
                f"P <= C <= H violated for thread {t} at event {self.events_processed - 1}")
        prev = self._last_times[t]
        now = (tuple(p), c, tuple(h))
        if prev is not None and not all(leq(a, b) for a, b in zip(prev, now)):
            raise EngineError(
                f"thread-order monotonicity violated for thread {t} at event {self.events_processed - 1}")
        self._last_times[t] = now

    # -- optional history trimming (two-pass mode) ----------------------

    def preregister(self, n_threads: int, last_event_idx: dict[int, int]) -> None:
        """Enable log trimming: needs every thread known up front plus each
        thread's final event index (available when the input is re-scannable)."""
        self._ensure_thread(n_threads - 1)
        self._retire_at = dict(last_event_idx)

    def _retire_thread(self, t: int) -> None:
        for l in range(self.nlocks):
            cur = self.cursors[l]
            if len(cur) <= t:
                cur.extend([0] * (t + 1 - len(cur)))
            base = self.log_base[l]
            log_l = self.log[l]
            for i in range(cur[t], base + len(log_l)):
                if log_l[i - base][0] != t:
                    self.queue_load -= 1
            cur[t] = base + len(log_l)
            self._maybe_trim(l)

    def _maybe_trim(self, l: int) -> None:
        if self._retire_at is None:
            return
        cur = self.cursors[l]
        if len(cur) < self.nthreads:
            cur.extend([0] * (self.nthreads - len(cur)))
        low = min(cur)
        oe = self.open_entry[l]
        if oe != -1 and oe < low:
            low = oe
        base = self.log_base[l]
        drop = low - base
        if drop > 32:
            del self.log[l][:drop]
            self.log_base[l] = low
