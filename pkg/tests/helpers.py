"""Shared test utilities: seeded random instances and brute-force baselines."""

from __future__ import annotations

import random

from vass import Path, Transition, Vass
from vass.oracle import oracle_unbounded
from vass.reductions import with_start_counter


def gen_vass(
    rng: random.Random,
    max_states: int = 6,
    max_weight: int = 5,
    max_guard: int = 49,
    guard_prob: float = 0.45,
    multi_guards: bool = False,
    edge_factor: float = 1.8,
) -> Vass:
    n = rng.randint(1, max_states)
    names = tuple(f"q{i}" for i in range(n))
    guards = []
    for _ in range(n):
        gs = set()
        if rng.random() < guard_prob:
            gs.add(rng.randint(0, max_guard))
            if multi_guards and rng.random() < 0.5:
                gs.add(rng.randint(0, max_guard))
        guards.append(frozenset(gs))
    m = rng.randint(1, max(1, int(edge_factor * n)) + 1)
    edges = tuple(
        Transition(rng.randrange(n), rng.randrange(n),
                   rng.randint(-max_weight, max_weight))
        for _ in range(m)
    )
    return Vass(names=names, guards=tuple(guards), transitions=edges,
                initial=0, target=rng.randrange(n))


def gen_guard_free(rng: random.Random, max_states: int = 6,
                   max_weight: int = 5) -> Vass:
    return gen_vass(rng, max_states=max_states, max_weight=max_weight,
                    guard_prob=0.0)


def random_path(rng: random.Random, v: Vass, max_len: int = 8) -> Path:
    start = rng.randrange(v.n_states)
    q = start
    taken = []
    for _ in range(rng.randint(0, max_len)):
        outs = v.out_edges(q)
        if not outs:
            break
        ti, t = rng.choice(outs)
        taken.append(ti)
        q = t.dst
    return Path(start, tuple(taken))


def truly_unbounded(v: Vass, q: int, z: int, counter_cap: int = 600):
    """Oracle answer for unboundedness of an arbitrary configuration,
    phrased through a weight-z entry edge.  Returns True/False/None."""
    w, w0 = with_start_counter(v, z, q)
    verdict = oracle_unbounded(w, w0, counter_cap=counter_cap)
    if not verdict.definite:
        return None
    return verdict.answer == "yes"


def simple_cycles_through(v: Vass, q: int) -> list[list[int]]:
    """All simple cycles through q, as transition-index lists (brute force,
    only sane for very small instances)."""
    cycles = []

    def walk(cur: int, visited: set[int], taken: list[int]):
        for ti, t in v.out_edges(cur):
            if t.dst == q and taken is not None and len(taken) >= 0:
                cycles.append(taken + [ti])
            if t.dst in visited or t.dst == q:
                continue
            walk(t.dst, visited | {t.dst}, taken + [ti])

    walk(q, {q}, [])
    return cycles


def enumerate_paths(v: Vass, src: int, max_len: int):
    """Yield every path from src of length at most max_len (as Paths)."""
    stack = [(src, ())]
    while stack:
        cur, taken = stack.pop()
        yield Path(src, taken)
        if len(taken) < max_len:
            for ti, t in v.out_edges(cur):
                stack.append((t.dst, taken + (ti,)))
