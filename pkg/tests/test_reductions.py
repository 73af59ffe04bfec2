import random

import pytest

from vass import (
    Cnf3,
    cnf_satisfied,
    cnf_to_vass,
    decide_unboundedness,
    first_primes,
    normalize_guards,
    parse_dimacs,
    parse_vass,
    random_cnf,
    reduce_cov_to_unbound,
    val_u,
    with_start_counter,
)
from vass.oracle import oracle_cover, oracle_unbounded

from helpers import gen_vass


# --- coverability-to-unboundedness reduction --------------------------------

def test_demo_reduction_structure(demo):
    out, s1 = reduce_cov_to_unbound(demo, 0, 13)
    # every demo state reaches s13, so nothing is pruned and one pump state
    # is appended
    assert out.n_states == 15
    assert out.names[s1] == "s0"
    pump = out.n_states - 1
    assert out.guards[pump] == frozenset()
    loops = [t for t in out.transitions if t.src == pump and t.dst == pump]
    assert [t.weight for t in loops] == [1]
    feeds = [t for t in out.transitions
             if t.dst == pump and t.src == out.index("s13")]
    assert [t.weight for t in feeds] == [0]


def test_reduction_prunes_states_missing_the_target():
    v = parse_vass("state a\nstate b\nstate c\n"
                   "edge a b 1\nedge a c 1\nedge c c 5\n")
    out, s1 = reduce_cov_to_unbound(v, 0, 1)
    assert set(out.names) == {"a", "b", "b'"}


def test_reduction_unreachable_target_is_canonical():
    v = parse_vass("state a\nstate b\nedge b b 1\n")
    out, s1 = reduce_cov_to_unbound(v, 0, 1)
    assert out.n_states == 1 and out.transitions == () and s1 == 0


def test_reduction_keeps_guard_free_pump_state():
    v = parse_vass("state a 0\nstate b 0\nedge a b 1\n")
    out, s1 = reduce_cov_to_unbound(v, 0, 1)
    pump = out.n_states - 1
    assert out.guards[pump] == frozenset()


def test_reduction_correctness_differential():
    rng = random.Random(808080)
    for _ in range(150):
        v = gen_vass(rng, max_states=5, max_weight=4, max_guard=20)
        t = rng.randrange(v.n_states)
        cover = oracle_cover(v, 0, t, counter_cap=250)
        reduced, s1 = reduce_cov_to_unbound(v, 0, t)
        unb = oracle_unbounded(reduced, s1, counter_cap=250)
        if cover.definite and unb.definite:
            assert cover.answer == unb.answer


# --- primes and assignments ----------------------------------------------------

def test_first_primes_small():
    assert first_primes(3) == [2, 3, 5]
    assert first_primes(5) == [2, 3, 5, 7, 11]


def test_first_primes_upper_limit():
    ps = first_primes(15)
    assert ps[-1] == 47
    product = 1
    for p in ps:
        product *= p
    assert product == 614889782588491410


def test_first_primes_range_checked():
    with pytest.raises(ValueError):
        first_primes(0)
    with pytest.raises(ValueError):
        first_primes(16)


def test_val_u_edge_cases():
    primes = (2, 3, 5)
    assert val_u(0, primes) == (True, True, True)
    assert val_u(1, primes) == (False, False, False)
    assert val_u(6, primes) == (True, True, False)


def test_divisibility_stable_under_clause_period():
    rng = random.Random(7)
    primes = first_primes(5)
    for _ in range(300):
        i, j, k = rng.sample(range(5), 3)
        step = primes[i] * primes[j] * primes[k]
        u = rng.randint(0, 10_000)
        m = rng.randint(0, 20)
        for idx in (i, j, k):
            assert (u % primes[idx] == 0) == ((u + m * step) % primes[idx] == 0)


# --- the formula generator --------------------------------------------------------

def one_clause_formula() -> Cnf3:
    return Cnf3(3, (((1, True), (2, True), (3, True)),))


def test_single_clause_instance_guards():
    v, meta = cnf_to_vass(one_clause_formula())
    assert meta.primes == (2, 3, 5) and meta.product == 30
    assert meta.clause_weights == (30,)
    assert meta.guard_windows == ((30, 60),)
    expected = set(range(30, 60)) - {31, 37, 41, 43, 47, 49, 53, 59}
    assert v.guards[1] == expected
    assert v.n_states == 2


def test_clause_with_repeated_variable_rejected():
    with pytest.raises(ValueError):
        Cnf3(3, (((1, True), (1, False), (2, True)),))


def test_single_clause_boundedness_by_start_value():
    v, meta = cnf_to_vass(one_clause_formula())
    # all-false start falsifies the clause: pumping never dies
    w, w0 = with_start_counter(v, 1)
    assert oracle_unbounded(w, w0, counter_cap=400).answer == "yes"
    # all-true start satisfies it: the loop runs into a guard
    w, w0 = with_start_counter(v, 0)
    assert oracle_unbounded(w, w0, counter_cap=400).answer == "no"


def test_generated_instances_encode_satisfaction():
    rng = random.Random(991199)
    for _ in range(12):
        f = random_cnf(3, rng.randint(1, 3), rng.randint(0, 10**6))
        v, meta = cnf_to_vass(f)
        for u in range(meta.product):
            w, w0 = with_start_counter(v, u)
            verdict = oracle_unbounded(w, w0, counter_cap=4 * meta.product)
            assert verdict.definite
            bounded = verdict.answer == "no"
            assert bounded == cnf_satisfied(f, val_u(u, meta.primes))


def test_generated_instance_through_the_fixpoint_solver():
    f = random_cnf(3, 2, 20240808)
    v, meta = cnf_to_vass(f)
    for u in (0, 7, 13, 29):
        w, w0 = with_start_counter(v, u)
        wn = normalize_guards(w)
        dec = decide_unboundedness(wn, wn.index(w.names[w0]))
        assert dec.answer is not None
        assert dec.answer != cnf_satisfied(f, val_u(u, meta.primes))


# --- DIMACS ------------------------------------------------------------------------

def test_parse_dimacs_roundtrip():
    text = "c example\np cnf 4 2\n1 -2 3 0\n-1 2 4 0\n"
    f = parse_dimacs(text)
    assert f.num_vars == 4
    assert f.clauses == (
        ((1, True), (2, False), (3, True)),
        ((1, False), (2, True), (4, True)),
    )


def test_parse_dimacs_rejects_wide_clauses():
    with pytest.raises(ValueError):
        parse_dimacs("p cnf 2 1\n1 -2 0\n")
