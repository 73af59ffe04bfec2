import random

import pytest

from vass import (
    Configuration,
    FixpointParams,
    USet,
    analyze,
    decide_coverability,
    decide_unboundedness,
    decompose_objectives,
    defect_stats,
    objective_contains,
    parse_vass,
    saturate_step,
    seed_uset,
    u_contains,
    unbounded_core,
    worstcase_bounds,
)
from vass.cycles import Chain
from vass.model import Violation, lift_run
from vass.oracle import oracle_unbounded

from helpers import gen_vass, truly_unbounded


# --- worst-case bound arithmetic ------------------------------------------

def test_bounds_tiny_values():
    assert worstcase_bounds(1).gap_window == 7
    assert worstcase_bounds(2).gap_window == 19
    assert worstcase_bounds(10).gap_window == 1123


def test_bounds_chain_recomputation():
    for n in (1, 2, 3, 7, 10):
        wc = worstcase_bounds(n)
        gap = (n * n + 2) * (n + 1) + 1
        step = 2 * n * n * (n * n + 2) * (n + 1) + 2 * n * (
            (n * n + 2) + (2 * n + 1) * n * gap)
        defect = 2 * n * n * step
        pool = n * n + n + 3 + n * defect
        assert wc.class_step == step
        assert wc.defect_bound == defect == wc.round_bound
        assert wc.run_length_bound == n * pool * pool + n * n + 4


def test_bounds_reject_empty_system():
    with pytest.raises(ValueError):
        worstcase_bounds(0)


# --- seed set ---------------------------------------------------------------

def test_seed_set_demo_membership(demo):
    u = seed_uset(analyze(demo))
    assert u_contains(u, Configuration(4, 97))
    assert u.contains(Configuration(4, 97))
    assert not u.contains(Configuration(4, 96))     # cut off by a guard family
    assert u.contains(Configuration(4, 52))         # trivial class
    assert not u.contains(Configuration(4, 54))     # bounded chain, not seeded
    assert not u.contains(Configuration(0, 10**6))  # not pumpable at all


def test_seed_set_empty_when_nothing_pumps():
    v = parse_vass("state a\nedge a a -1\n")
    u = seed_uset(analyze(v))
    assert not u.contains(Configuration(0, 5))
    assert u.members_at(0, 50) == []


def test_seed_set_member_enumeration(demo):
    # trivial residues from the floor up, plus the climbing tails of the
    # guarded classes above their last cut-off (99 for the class cut at 90)
    u = seed_uset(analyze(demo))
    trivial = [z for z in range(52, 101) if z % 9 not in (0, 3, 6)]
    assert u.members_at(4, 100) == sorted(trivial + [99])


# --- membership after staged construction ------------------------------------

def golden_first_round_uset(demo) -> USet:
    """The set used by the worked-delta example: the seed plus prefixes up
    to 63 and 69 of the two non-singleton bounded chains at state s4."""
    u = seed_uset(analyze(demo))
    return u.with_additions({(4, 54): 63, (4, 60): 69})


def test_membership_in_prescribed_first_round_set(demo):
    u = golden_first_round_uset(demo)
    assert u.contains(Configuration(4, 54))
    assert not u.contains(Configuration(4, 72))


def test_membership_in_computed_first_round_set(demo):
    ana = analyze(demo)
    out = saturate_step(demo, ana, seed_uset(ana), FixpointParams.adaptive(demo))
    assert out.uset.contains(Configuration(4, 54))
    assert not out.uset.contains(Configuration(4, 72))


# --- objective decomposition ---------------------------------------------------

def test_decomposition_component_shape_demo(demo):
    u = seed_uset(analyze(demo))
    objs = decompose_objectives(u, 4)
    first = objs[0]
    assert first.period == 9 and first.ell == 52
    assert first.forbidden_residues == frozenset({0, 3, 6})
    assert len(objs) <= demo.n_states + 1


def test_decomposition_matches_membership_pointwise(demo):
    ana = analyze(demo)
    for u in (seed_uset(ana), golden_first_round_uset(demo),
              unbounded_core(demo).uset):
        for q in sorted(ana.states):
            objs = decompose_objectives(u, q)
            for z in range(0, 131):
                c = Configuration(q, z)
                assert u.contains(c) == any(
                    objective_contains(o, c) for o in objs), (q, z)


def test_decomposition_matches_membership_random():
    rng = random.Random(606060)
    for _ in range(60):
        v = gen_vass(rng, max_states=5, max_weight=4, max_guard=25)
        core = unbounded_core(v)
        for q in sorted(core.analysis.states):
            objs = decompose_objectives(core.uset, q)
            assert len(objs) <= v.n_states + 1
            for z in range(0, 70):
                c = Configuration(q, z)
                assert core.uset.contains(c) == any(
                    objective_contains(o, c) for o in objs)


# --- saturation ---------------------------------------------------------------

def test_demo_first_round_additions_verified_by_oracle(demo):
    """Pin the computed first round and check every claim against the
    brute-force oracle; the verified additions at state s4 are a strict
    superset of the four values the historical walkthrough lists."""
    ana = analyze(demo)
    out = saturate_step(demo, ana, seed_uset(ana), FixpointParams.adaptive(demo))
    added = {demo.names[q]: vals for q, vals in out.added.items()}
    assert added["s4"] == [54, 57, 60, 63, 66, 69, 75, 78, 84, 87, 93, 96]
    assert set(added) == {"s1", "s2", "s4", "s5", "s6"}
    for name, vals in added.items():
        q = demo.index(name)
        for z in vals:
            assert truly_unbounded(demo, q, z) is True, (name, z)
    # the values the round leaves out of the s4 chains really are bounded
    for z in (72, 81):
        assert truly_unbounded(demo, 4, z) is False


def test_demo_saturation_is_monotone_and_prefix_closed(demo):
    ana = analyze(demo)
    u = seed_uset(ana)
    params = FixpointParams.adaptive(demo)
    for _ in range(3):
        out = saturate_step(demo, ana, u, params)
        assert set(u.per_chain_max) <= set(out.uset.per_chain_max)
        for key, m in u.per_chain_max.items():
            assert out.uset.per_chain_max[key] >= m
        for (q, lo), m in out.uset.per_chain_max.items():
            assert (m - lo) % ana.states[q].selection.period == 0
        u = out.uset


def test_demo_fixpoint_matches_oracle_everywhere(demo):
    core = unbounded_core(demo)
    assert core.status == "complete"
    for q in sorted(core.analysis.states):
        sa = core.analysis.states[q]
        for z in range(sa.floor, 131):
            if z in demo.guards[q]:
                continue
            want = truly_unbounded(demo, q, z)
            assert want is not None
            assert core.uset.contains(Configuration(q, z)) == want, (q, z)


def test_fixpoint_trace_matches_historical_walkthrough(demo):
    """The walkthrough bundled with the demo instance stages the first two
    rounds as {s4: 54,60,63,69} then {s1: 12}.  Exact forward reachability
    disagrees: (s4,93) and (s4,96) already reach the seed set in four valid
    steps (93 -> 97 -> 101 -> 98 -> 115, all off-guard, into a climbing
    class), so the first round provably contains more than the walkthrough
    says; the oracle cross-check in
    test_demo_first_round_additions_verified_by_oracle pins the truth.
    Kept as written for traceability, expected to fail."""
    core = unbounded_core(demo)
    rounds = [{demo.names[q]: vals for q, vals in r.items()}
              for r in core.rounds]
    assert rounds[0] == {"s4": [54, 60, 63, 69]}
    assert rounds[1:] == [{"s1": [12]}]


test_fixpoint_trace_matches_historical_walkthrough = pytest.mark.xfail(
    reason="pinned walkthrough values under-approximate exact reachability "
           "on the demo instance (see the oracle-verified trace test)",
    strict=True,
)(test_fixpoint_trace_matches_historical_walkthrough)


def test_saturation_window_creeps_up_over_rounds():
    # chain [5, 35] step 10 at state a; only 25 escapes directly (35 is cut
    # at b, 45 is a's own guard), but 5 and 15 pump up to 25 inside the
    # chain; with a one-element window the solver probes the top (fails) and
    # the lowest missing element each round, so the maximum creeps up one
    # element per round and stabilizes at 25
    v = parse_vass(
        "state a 45\nstate b 35\nstate c 5\n"
        "edge a a 10\nedge a b 0\nedge b c 0\nedge c c 1\n"
    )
    core = unbounded_core(v, FixpointParams(candidates_per_chain=1))
    assert core.status == "complete"
    assert [r for r in core.rounds] == [{0: [5]}, {0: [15]}, {0: [25]}]
    assert core.uset.per_chain_max[(0, 5)] == 25
    assert not core.uset.contains(Configuration(0, 35))
    for z, want in ((5, True), (15, True), (25, True), (35, False)):
        assert truly_unbounded(v, 0, z) is want
    # a roomier window finds the same fixpoint in one round
    wide = unbounded_core(v)
    assert wide.uset.per_chain_max == core.uset.per_chain_max


def test_saturation_candidate_window_respects_budget(demo):
    ana = analyze(demo)
    tight = FixpointParams(candidates_per_chain=1)
    out = saturate_step(demo, ana, seed_uset(ana), tight)
    # with a one-element window only chain tops (plus the lowest missing
    # element) are probed; the round still only adds sound members
    for q, vals in out.added.items():
        for z in vals:
            assert truly_unbounded(demo, q, z) is True


# --- defect diagnostics ---------------------------------------------------------

def test_defect_of_prescribed_first_round_set(demo):
    u = golden_first_round_uset(demo)
    stats = defect_stats(u)
    chain = Chain(4, 0, 54, 81)
    assert stats.per_chain[chain] == 4  # {72, 75, 78, 81}
    members = [z for z in range(72, 82)
               if not u.contains(Configuration(4, z))
               and z >= 52]
    assert members == [72, 75, 78, 81]


def test_defect_empty_for_inactive_or_full_chains(demo):
    u = seed_uset(analyze(demo))
    stats = defect_stats(u)
    # nothing of the seed sits below the s4 bounded chains' residue mates:
    # every non-trivial class has its whole bounded part missing but the
    # seed holds the tail above them, which activates the chains
    full = unbounded_core(demo).uset
    stats_full = defect_stats(full)
    chain = Chain(4, 0, 54, 81)
    assert stats_full.per_chain[chain] == 2  # {72, 81} stay out forever


def test_defect_bounds_on_random_suite():
    rng = random.Random(515151)
    for _ in range(60):
        v = gen_vass(rng, max_states=6, max_weight=4, max_guard=30)
        ana = analyze(v)
        u = seed_uset(ana)
        params = FixpointParams.adaptive(v)
        wc = worstcase_bounds(v.n_states)
        for _round in range(50):
            stats = defect_stats(u, ana)
            for ch, size in stats.per_chain.items():
                missing = _missing_in_chain(u, ana, ch)
                assert size <= v.n_states * missing
            for (_q, _r), size in stats.per_class.items():
                assert size <= wc.defect_bound
            out = saturate_step(v, ana, u, params)
            if not out.added:
                break
            u = out.uset


def _missing_in_chain(u, ana, ch) -> int:
    period = ana.states[ch.state].selection.period
    return sum(
        1 for z in range(ch.lo, ch.hi + 1, period)
        if not u.contains(Configuration(ch.state, z))
    )


# --- decisions -------------------------------------------------------------------

def test_demo_unbounded_from_start(demo):
    dec = decide_unboundedness(demo, 0)
    assert dec.answer is True and dec.status == "complete"


def test_unboundedness_trivial_instances():
    v = parse_vass("state a\nedge a a 1\n")
    assert decide_unboundedness(v, 0).answer is True
    v2 = parse_vass("state a\n")
    assert decide_unboundedness(v2, 0).answer is False


def test_unboundedness_rejects_multi_guard_input():
    v = parse_vass("state a 1 2\nedge a a 1\n")
    with pytest.raises(ValueError):
        decide_unboundedness(v, 0)


def test_unbounded_witness_revalidates(demo):
    dec = decide_unboundedness(demo, 0, want_witness=True)
    assert dec.witness is not None
    run = lift_run(demo, dec.witness, 0)
    assert not isinstance(run, Violation)
    assert unbounded_core(demo).uset.contains(run[-1])


def test_invalid_initial_configuration_is_bounded():
    v = parse_vass("state a 0\nedge a a 1\n")
    dec = decide_unboundedness(v, 0)
    assert dec.answer is False


def test_rigorous_mode_on_tiny_instances():
    v = parse_vass("state a 5\nstate b\nedge a b 2\nedge b a 1\n")
    params = FixpointParams.rigorous(v)
    core = unbounded_core(v, params)
    assert core.status == "complete"
    dec = decide_unboundedness(v, 0, params=params)
    assert dec.answer == (oracle_unbounded(v, 0).answer == "yes")


def test_demo_coverability(demo):
    assert decide_coverability(demo, 0, 13).answer is True


def test_coverability_unreachable_target():
    v = parse_vass("state a\nstate b\nedge a a 1\n")
    assert decide_coverability(v, 0, 1).answer is False


def test_coverability_empty_run_cases():
    v = parse_vass("state a\n")
    assert decide_coverability(v, 0, 0).answer is True
    # a guard on 0 makes even the empty run invalid
    v2 = parse_vass("state a 0\n")
    assert decide_coverability(v2, 0, 0).answer is False


def test_random_fixpoint_membership_matches_oracle():
    rng = random.Random(99881)
    for _ in range(50):
        v = gen_vass(rng, max_states=5, max_weight=4, max_guard=25)
        core = unbounded_core(v)
        if core.status != "complete":
            continue
        for q in sorted(core.analysis.states):
            sa = core.analysis.states[q]
            for z in range(sa.floor, 61):
                if z in v.guards[q]:
                    continue
                want = truly_unbounded(v, q, z)
                if want is None:
                    continue
                assert core.uset.contains(Configuration(q, z)) == want
