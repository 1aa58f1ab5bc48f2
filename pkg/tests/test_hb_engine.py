import pytest

from racepred import oracle
from racepred.hb_engine import HbEngine
from racepred.trace_model import parse_trace
from racepred.tracegen import GenParams, fixture, fixtures, gen_random
from racepred.vclock import leq
from racepred.wcp_engine import EngineError


def run(tr, **kw):
    eng = HbEngine(**kw)
    return eng, [eng.process(e) for e in tr.events]


def test_fig1b_hb_timestamps():
    tr = fixture("fig1b")
    _, stamps = run(tr)
    assert stamps == [(1,), (1,), (1,), (1,), (1, 1), (1, 1), (1, 1), (1, 2)]
    # the lock handoff orders the y accesses, so HB sees no race here
    assert leq(stamps[0], stamps[7])


def test_fig2b_hb_orders_y_accesses():
    tr = fixture("fig2b")
    _, stamps = run(tr)
    assert leq(stamps[0], stamps[5])


def test_no_locks_means_no_cross_thread_order():
    tr = parse_trace(["T1|w|x", "T2|r|x"])
    _, stamps = run(tr)
    assert not leq(stamps[0], stamps[1]) and not leq(stamps[1], stamps[0])


def test_reads_writes_never_join():
    tr = parse_trace(["T1|w|x", "T2|r|x", "T1|r|y", "T2|w|y"])
    _, stamps = run(tr)
    assert stamps == [(1,), (0, 1), (1,), (0, 1)]


def test_fork_join_edges():
    tr = parse_trace(["T1|w|x", "T1|fork|T2", "T2|w|y", "T1|join|T2", "T1|r|y"])
    _, stamps = run(tr)
    assert leq(stamps[0], stamps[2])    # fork edge
    assert leq(stamps[2], stamps[4])    # join edge


def test_flattening_and_errors_match_wcp_engine():
    eng, stamps = run(parse_trace(["T1|acq|l", "T1|acq|l", "T1|rel|l", "T1|rel|l"]))
    assert eng.reentrant_flattened == 1
    with pytest.raises(EngineError):
        run(parse_trace(["T1|acq|l", "T2|acq|l"]))
    with pytest.raises(EngineError):
        run(parse_trace(["T1|rel|l"]))
    with pytest.raises(EngineError):
        run(parse_trace(["T1|join|T1"]))


def test_differential_vs_oracle_small():
    for seed in range(60):
        tr = gen_random(GenParams(threads=2 + seed % 3, locks=1 + seed % 3, vars=2,
                                  events=20 + seed % 20, p_lock=0.5, seed=seed))
        _, stamps = run(tr, invariant_checks=True)
        hb = oracle.hb_closure(tr)
        for i in range(tr.n_events):
            for j in range(i + 1, tr.n_events):
                assert leq(stamps[i], stamps[j]) == hb.holds(i, j), (seed, i, j)


def test_differential_with_fork_join():
    lines = [
        "T1|w|x", "T1|fork|T2", "T2|acq|l", "T2|w|y", "T2|rel|l",
        "T1|acq|l", "T1|r|y", "T1|rel|l", "T1|join|T2", "T1|r|x",
    ]
    tr = parse_trace(lines)
    _, stamps = run(tr)
    hb = oracle.hb_closure(tr)
    for i in range(tr.n_events):
        for j in range(i + 1, tr.n_events):
            assert leq(stamps[i], stamps[j]) == hb.holds(i, j), (i, j)


def test_hb_timestamps_monotone_per_thread():
    for name, tr in fixtures().items():
        run(tr, invariant_checks=True)
