"""Positive-cycle analysis: pumping cycles, residue classes, and chains.

For every state lying on a positive-weight cycle we fix one reference cycle
``gamma_q``.  Its weight ``W_q`` becomes the period of the counter residues
at ``q``; iterating the cycle from a value either climbs forever or is cut
off by a guard somewhere along the loop.  The guard cut-offs partition each
residue class into finitely many bounded *chains* plus one unbounded tail,
which is the combinatorial backbone of the fixpoint solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import BlockedSet, Configuration, Path, Vass


@dataclass(frozen=True)
class CycleSelection:
    """The reference positive cycle chosen at one state."""

    state: int
    gamma: Path
    period: int  # weight of gamma, >= 1
    pmin: int    # least prefix weight of gamma, <= 0


@dataclass(frozen=True)
class Chain:
    """An arithmetic progression ``lo, lo+W, ..., hi`` within one residue
    class (``hi is None`` marks the unbounded tail)."""

    state: int
    residue: int
    lo: int
    hi: Optional[int]

    @property
    def bounded(self) -> bool:
        return self.hi is not None


@dataclass(frozen=True)
class StateAnalysis:
    selection: CycleSelection
    floor: int                           # least counter admitted at this state
    induced: tuple[int, ...]             # guard cut-off values, ascending
    splits: dict                         # residue -> sorted cut-offs in class
    blocked: BlockedSet                  # counters from which pumping dies


@dataclass(frozen=True)
class CycleAnalysis:
    vass: Vass
    states: dict[int, StateAnalysis]  # domain: states with a positive cycle

    def pumpable(self) -> list[int]:
        return sorted(self.states)


def _strongly_connected_components(v: Vass) -> list[list[int]]:
    """Tarjan's SCC, iterative to stay clear of recursion limits."""
    n = v.n_states
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 1
    for root in range(n):
        if visited[root]:
            continue
        work = [(root, 0)]
        while work:
            q, ei = work.pop()
            if ei == 0:
                visited[q] = True
                index[q] = low[q] = counter
                counter += 1
                stack.append(q)
                on_stack[q] = True
            edges = v.out_edges(q)
            advanced = False
            while ei < len(edges):
                _, t = edges[ei]
                ei += 1
                if not visited[t.dst]:
                    work.append((q, ei))
                    work.append((t.dst, 0))
                    advanced = True
                    break
                if on_stack[t.dst]:
                    low[q] = min(low[q], index[t.dst])
            if advanced:
                continue
            if low[q] == index[q]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == q:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[q])
    return sccs


def _prune_frontier(elems: list[tuple[int, int, tuple[int, ...]]]) -> list:
    """Keep the undominated (pmin, weight) pairs, deterministically.

    Order: pmin descending, then weight descending (equivalently smax),
    then shorter then lexicographically smaller witness -- a later element
    survives only if its weight strictly beats everything kept so far.
    """
    elems = sorted(elems, key=lambda e: (-e[0], -e[1], len(e[2]), e[2]))
    kept: list[tuple[int, int, tuple[int, ...]]] = []
    best_w = None
    for e in elems:
        if best_w is None or e[1] > best_w:
            kept.append(e)
            best_w = e[1]
    return kept


def select_cycles(v: Vass) -> dict[int, CycleSelection]:
    """Pick, per state, a positive cycle of at most ``|Q|`` transitions whose
    minimal prefix weight is maximal among all such cycles.

    Runs a leveled Pareto dynamic program inside each strongly connected
    component: level ``l`` keeps, for every state reachable from the source,
    the undominated (pmin, weight) summaries over paths of at most ``l``
    transitions.  The cycle reported for a state is the one achieving the
    best pmin at the earliest level, which favours a single loop over its
    own powers (the powers only appear at later levels and never improve
    pmin).  Guards play no role here: selection reads weights only.
    """
    selections: dict[int, CycleSelection] = {}
    for comp in _strongly_connected_components(v):
        comp_set = set(comp)
        edges_in = [
            (i, t) for i, t in enumerate(v.transitions)
            if t.src in comp_set and t.dst in comp_set
        ]
        if not edges_in:
            continue
        out_by_src: dict[int, list[tuple[int, int, int]]] = {q: [] for q in comp}
        for i, t in edges_in:
            out_by_src[t.src].append((i, t.dst, t.weight))
        levels = len(comp)
        for q in sorted(comp):
            # frontier[p]: undominated (pmin, weight, transition tuple) over
            # q->p paths of at most `level` transitions.
            frontier: dict[int, list[tuple[int, int, tuple[int, ...]]]] = {
                q: [(0, 0, ())]
            }
            best: Optional[tuple[int, int, tuple[int, ...]]] = None
            for _level in range(1, levels + 1):
                new: dict[int, list] = {p: list(es) for p, es in frontier.items()}
                for p, elems in frontier.items():
                    for i, dst, w in out_by_src[p]:
                        for pmin, wt, path in elems:
                            ext = (min(pmin, wt + w), wt + w, path + (i,))
                            new.setdefault(dst, []).append(ext)
                frontier = {p: _prune_frontier(es) for p, es in new.items()}
                for pmin, wt, path in frontier.get(q, ()):
                    if wt >= 1 and path and (best is None or pmin > best[0]):
                        best = (pmin, wt, path)
            if best is not None:
                pmin, wt, path = best
                selections[q] = CycleSelection(
                    state=q, gamma=Path(q, path), period=wt, pmin=pmin
                )
    return selections


def _cutoff_caps(v: Vass, sel: CycleSelection) -> set[int]:
    """Guard cut-off values at the cycle head: pumping from ``z`` rests on a
    guard iff ``z`` lies on a downward period-progression below some cap
    ``guard - offset`` taken over the guard occurrences along the cycle."""
    states = v.path_states(sel.gamma)
    weights = v.path_weights(sel.gamma)
    low = -sel.pmin
    caps = set()
    prefix = 0
    # One occurrence per cycle position; the closing return to the head
    # repeats position 0 one period up and adds nothing new.
    for i, q in enumerate(states[:-1]):
        if i > 0:
            prefix += weights[i - 1]
        for g in v.guards[q]:
            cap = g - prefix
            if cap >= low:
                caps.add(cap)
    return caps


def blocked_omega(v: Vass, sel: CycleSelection) -> BlockedSet:
    """Counter values from which iterating ``gamma`` forever is not valid.

    Closed form: everything below ``-pmin`` dies by negativity; above that,
    pumping from ``z`` rests on a guard iff ``z`` sits on one of the downward
    period-progressions hanging from a guard cut-off.  No enumeration: the
    raw set has on the order of ``guard / period`` members.
    """
    low = -sel.pmin
    caps = _cutoff_caps(v, sel)
    fams = tuple(sorted((cap, sel.period) for cap in caps))
    return BlockedSet(low_all=low, extras=frozenset(), families=fams)


def analyze(v: Vass) -> CycleAnalysis:
    """Full per-state cycle analysis for every state on a positive cycle."""
    states: dict[int, StateAnalysis] = {}
    for q, sel in select_cycles(v).items():
        floor = -sel.pmin
        caps = sorted(_cutoff_caps(v, sel))
        splits: dict[int, list[int]] = {}
        for cap in caps:
            splits.setdefault(cap % sel.period, []).append(cap)
        states[q] = StateAnalysis(
            selection=sel,
            floor=floor,
            induced=tuple(caps),
            splits=splits,
            blocked=BlockedSet(
                low_all=floor,
                families=tuple((cap, sel.period) for cap in caps),
            ),
        )
    return CycleAnalysis(vass=v, states=states)


def class_floor(sa: StateAnalysis, residue: int) -> int:
    """Least counter value of the residue class admitted at the state."""
    w = sa.selection.period
    delta = (residue - sa.floor) % w
    return sa.floor + delta


def chains_of(v: Vass, sel: CycleSelection, residue: int,
              sa: Optional[StateAnalysis] = None) -> list[Chain]:
    """Decompose one residue class into bounded chains plus the unbounded
    tail.

    Every guard cut-off in the class is its own singleton chain (pumping
    from it is immediately cut, whether or not the value may still be
    entered from below); the stretches between cut-offs are the remaining
    bounded chains; everything above the last cut-off climbs forever.
    """
    if not (0 <= residue < sel.period):
        raise ValueError("residue out of range")
    if sa is None:
        floor = -sel.pmin
        caps = sorted(c for c in _cutoff_caps(v, sel) if c % sel.period == residue)
    else:
        floor = sa.floor
        caps = sa.splits.get(residue, [])
    w = sel.period
    lo = floor + ((residue - floor) % w)
    chains: list[Chain] = []
    start = lo
    for cap in caps:
        if cap - w >= start:
            chains.append(Chain(sel.state, residue, start, cap - w))
        chains.append(Chain(sel.state, residue, cap, cap))
        start = cap + w
    chains.append(Chain(sel.state, residue, start, None))
    return chains


def conf_plus_contains(analysis: CycleAnalysis, c: Configuration) -> bool:
    """Is the configuration in the pumpable region (state on a positive
    cycle, counter high enough that one cycle lap cannot go negative)?"""
    sa = analysis.states.get(c.state)
    return sa is not None and c.counter >= sa.floor
