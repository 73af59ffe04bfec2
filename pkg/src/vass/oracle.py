"""Brute-force ground truth: explicit-state closure at desk scale.

The oracle exists to be obviously correct, not fast.  Verdicts are
three-valued so truncation is never confused with a real answer: "no" is
only reported when the reachable set closed completely under the caps, and
"unknown" whenever a cap cut the search before a positive witness appeared.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import cycles
from .model import Configuration, Vass
from .objectives import DiseqObjective, objective_contains

DEFAULT_NODE_CAP = 500_000


@dataclass(frozen=True)
class OracleVerdict:
    answer: str  # "yes" | "no" | "unknown"
    states_explored: int
    reason: str = ""

    @property
    def definite(self) -> bool:
        return self.answer in ("yes", "no")


def default_counter_cap(v: Vass) -> int:
    max_guard = max((g for gs in v.guards for g in gs), default=0)
    max_w = max((abs(t.weight) for t in v.transitions), default=0)
    return max_guard + v.n_states * v.n_states * max_w + 64


def enumerate_reach(
    v: Vass,
    init: Configuration,
    counter_cap: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> tuple[set[Configuration], bool]:
    """Breadth-first closure under valid steps, discarding counters above
    ``counter_cap``.  Returns the configurations found and whether anything
    was cut off (by either cap)."""
    if not v.is_valid(init) or init.counter > counter_cap:
        return set(), init.counter > counter_cap
    seen = {init}
    queue = deque([init])
    truncated = False
    while queue:
        q, z = queue.popleft()
        for _, t in v.out_edges(q):
            y = z + t.weight
            if y < 0 or y in v.guards[t.dst]:
                continue
            if y > counter_cap:
                truncated = True
                continue
            c = Configuration(t.dst, y)
            if c in seen:
                continue
            if len(seen) >= node_cap:
                return seen, True
            seen.add(c)
            queue.append(c)
    return seen, truncated


def oracle_cover(
    v: Vass,
    s: int,
    t: int,
    counter_cap: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> OracleVerdict:
    """Can ``(s, 0)`` reach state ``t`` by a valid run?"""
    cap = default_counter_cap(v) if counter_cap is None else counter_cap
    if node_cap <= 0:
        return OracleVerdict("unknown", 0, "node cap exhausted")
    init = Configuration(s, 0)
    if not v.is_valid(init):
        return OracleVerdict("no", 0, "initial configuration is invalid")
    seen = {init}
    if s == t:
        return OracleVerdict("yes", 1, "empty run")
    queue = deque([init])
    truncated = False
    while queue:
        q, z = queue.popleft()
        for _, tr in v.out_edges(q):
            y = z + tr.weight
            if y < 0 or y in v.guards[tr.dst]:
                continue
            if y > cap:
                truncated = True
                continue
            c = Configuration(tr.dst, y)
            if c in seen:
                continue
            if tr.dst == t:
                return OracleVerdict("yes", len(seen) + 1, "target reached")
            if len(seen) >= node_cap:
                return OracleVerdict("unknown", len(seen), "node cap exhausted")
            seen.add(c)
            queue.append(c)
    if truncated:
        return OracleVerdict("unknown", len(seen), "counter cap exceeded")
    return OracleVerdict("no", len(seen), "closure complete, target unreached")


def oracle_unbounded(
    v: Vass,
    s: int,
    counter_cap: int | None = None,
    node_cap: int = DEFAULT_NODE_CAP,
) -> OracleVerdict:
    """Is the set of configurations reachable from ``(s, 0)`` infinite?

    Fires "yes" as soon as the closure reaches a configuration from which
    the local positive cycle can be pumped forever (counter outside the
    cycle's blocked set); reports "no" only when the closure finished
    untruncated, which by itself certifies a finite reachable set.
    """
    cap = default_counter_cap(v) if counter_cap is None else counter_cap
    if node_cap <= 0:
        return OracleVerdict("unknown", 0, "node cap exhausted")
    init = Configuration(s, 0)
    if not v.is_valid(init):
        return OracleVerdict("no", 0, "initial configuration is invalid")
    analysis = cycles.analyze(v)

    def pumps(c: Configuration) -> bool:
        sa = analysis.states.get(c.state)
        return sa is not None and c.counter not in sa.blocked

    if pumps(init):
        return OracleVerdict("yes", 1, "initial configuration pumps")
    seen = {init}
    queue = deque([init])
    truncated = False
    while queue:
        q, z = queue.popleft()
        for _, tr in v.out_edges(q):
            y = z + tr.weight
            if y < 0 or y in v.guards[tr.dst]:
                continue
            if y > cap:
                truncated = True
                continue
            c = Configuration(tr.dst, y)
            if c in seen:
                continue
            if pumps(c):
                return OracleVerdict("yes", len(seen) + 1,
                                     f"pumpable at {v.names[c.state]}:{c.counter}")
            if len(seen) >= node_cap:
                return OracleVerdict("unknown", len(seen), "node cap exhausted")
            seen.add(c)
            queue.append(c)
    if truncated:
        return OracleVerdict("unknown", len(seen), "counter cap exceeded")
    return OracleVerdict("no", len(seen), "reachable set is finite")


def oracle_bounded_cover(
    v: Vass, init: Configuration, o: DiseqObjective, steps: int
) -> bool:
    """Exhaustive layered search for the bounded-coverability question; the
    unpruned counterpart of :func:`vass.objectives.decide_bounded_cover`."""
    if not v.is_valid(init):
        return False
    frontier = {init}
    seen = {init}
    if any(objective_contains(o, c) for c in frontier):
        return True
    for _ in range(steps):
        nxt = set()
        for q, z in frontier:
            for _, t in v.out_edges(q):
                y = z + t.weight
                if y < 0 or y in v.guards[t.dst]:
                    continue
                c = Configuration(t.dst, y)
                if c not in seen:
                    seen.add(c)
                    nxt.add(c)
        if any(objective_contains(o, c) for c in nxt):
            return True
        frontier = nxt
        if not frontier:
            break
    return False
