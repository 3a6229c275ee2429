"""Envy-free rents under per-room lower/upper rent bounds.

ef_rents_with_bounds repairs a starting EF split until every rent sits inside
its bounds, or proves that impossible. The repair is event-driven: rooms
below their lower bound rise together with everything they force up (forward
closure), rooms above their upper bound fall with everything they force down
(backward closure); between events the envy graph is frozen so EF is
preserved by construction.

Infeasibility is certified, not just reported: either a forward envy chain
from a floor room to a ceiling room (raising one end pushes the other out of
its bounds), or a dead end where every room is forced to move in the same
direction, which the fixed total rent forbids.

maximin_rents / leximin_rents / minspread_rents then optimize inside the
feasible region, starting from any in-bounds EF point. They share the same
motion engine; only the set selection, guards and merge tracking differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dynamics import EventEngine, TraceLog, Watch, conserving_plan
from .ef_base import initial_ef_allocation
from .envy import _closure
from .model import (
    ENVY_PATH_VIOLATION,
    Allocation,
    Assignment,
    InfeasibilityCertificate,
    Instance,
)


@dataclass(frozen=True)
class BoundsResult:
    """Feasible rents, or a certificate of why none exist."""

    rents: Optional[tuple]
    certificate: Optional[InfeasibilityCertificate]

    def __post_init__(self):
        assert (self.rents is None) != (self.certificate is None)

    @property
    def ok(self) -> bool:
        return self.certificate is None


def _effective(inst: Instance, lower, upper):
    lo = tuple(lower) if lower is not None else inst.lower_bounds
    hi = tuple(upper) if upper is not None else inst.upper_bounds
    assert all(l <= h for l, h in zip(lo, hi))
    return lo, hi


def _classes(rents, lower, upper):
    """Rooms strictly below/above their bounds, and exactly at them.
    A pinned room (l == r == u) lands in both at_lower and at_upper."""
    below = {j for j, r in enumerate(rents) if r < lower[j]}
    above = {j for j, r in enumerate(rents) if r > upper[j]}
    at_lower = {j for j, r in enumerate(rents) if r == lower[j]}
    at_upper = {j for j, r in enumerate(rents) if r == upper[j]}
    return below, above, at_lower, at_upper


def _start_state(inst, assignment, rents, lower, upper, inside_bounds):
    assert len(rents) == inst.n
    assert sum(rents, Fraction(0)) == inst.total_rent
    engine = EventEngine(inst, assignment)
    _, _, strong = engine.weak_strong_adjacency(rents)
    assert not strong, "starting rents are not envy-free"
    if inside_bounds:
        assert all(lower[j] <= rents[j] <= upper[j] for j in range(inst.n)), \
            "objective stage needs an in-bounds starting point"
    return engine


def _path_witness(n, succ, sources, sinks):
    """Shortest forward path from sources to sinks; lex-smallest on ties."""
    dist = [None] * n
    queue = sorted(sinks)
    for v in queue:
        dist[v] = 0
    pred_adj = [[] for _ in range(n)]
    for v in range(n):
        for w in succ[v]:
            pred_adj[w].append(v)
    while queue:
        nxt = []
        for v in queue:
            for w in pred_adj[v]:
                if dist[w] is None:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        queue = nxt
    live = [s for s in sources if dist[s] is not None]
    assert live, "witness requested but no source reaches a sink"
    src = min(live, key=lambda s: (dist[s], s))
    path = [src]
    cur = src
    while dist[cur] > 0:
        cur = min(w for w in succ[cur] if dist[w] == dist[cur] - 1)
        path.append(cur)
    return tuple(path)


def _rooms_text(rooms):
    return ", ".join(str(j + 1) for j in sorted(rooms))


def ef_rents_with_bounds(inst: Instance, assignment: Assignment, rents=None,
                         lower=None, upper=None,
                         trace: Optional[TraceLog] = None) -> BoundsResult:
    """Move an EF split into the given rent bounds, keeping it EF throughout.

    lower/upper default to the instance bounds; callers pass tightened
    versions (budget caps, frozen rooms). Starting rents must be EF for the
    assignment and sum to the total; they may violate the bounds arbitrarily.
    When rents is None the unconstrained EF baseline is computed first.
    """
    n = inst.n
    lower, upper = _effective(inst, lower, upper)
    if rents is None:
        rents = initial_ef_allocation(inst, assignment, trace=trace).rents
    rents = tuple(rents)
    engine = _start_state(inst, assignment, rents, lower, upper, False)
    watch = Watch(lower=lower, upper=upper, merge_rooms=None)

    def certificate(explanation, path=None, rooms=None):
        return InfeasibilityCertificate(
            kind=ENVY_PATH_VIOLATION, explanation=explanation,
            witness_path=path, witness_rooms=rooms, assignment=assignment,
            final_rents=rents, effective_lower=lower, effective_upper=upper)

    iterations = 0
    while True:
        below, above, at_lower, at_upper = _classes(rents, lower, upper)
        if not below and not above:
            return BoundsResult(rents=rents, certificate=None)
        iterations += 1
        assert iterations <= n * n, "bound repair does not settle"

        succ, pred, strong = engine.weak_strong_adjacency(rents)
        assert not strong
        fwd_low = _closure(n, succ, at_lower | below)
        bwd_high = _closure(n, pred, at_upper | above)

        if above & fwd_low:
            path = _path_witness(n, succ, at_lower | below, above)
            return BoundsResult(rents=None, certificate=certificate(
                f"room {path[-1] + 1} must come down to its upper bound, but "
                f"the envy chain {_rooms_text(path)} ties it to room "
                f"{path[0] + 1}, which cannot go lower", path=path))
        if below & bwd_high:
            path = _path_witness(n, succ, below, at_upper | above)
            return BoundsResult(rents=None, certificate=certificate(
                f"room {path[0] + 1} must rise to its lower bound, but the "
                f"envy chain {_rooms_text(path)} ties it to room "
                f"{path[-1] + 1}, which cannot go higher", path=path))

        if below:
            s_inc = _closure(n, succ, below)
        else:
            s_inc = frozenset(range(n)) - _closure(n, pred, at_upper | above)
        if above:
            s_dec = _closure(n, pred, above)
        else:
            s_dec = frozenset(range(n)) - _closure(n, succ, at_lower | below)
        if not s_dec:
            return BoundsResult(rents=None, certificate=certificate(
                "every room is forced upward together with the rooms below "
                "their lower bounds, so the fixed total rent cannot absorb "
                "the rise", rooms=tuple(range(n))))
        if not s_inc:
            return BoundsResult(rents=None, certificate=certificate(
                "every room is forced downward together with the rooms above "
                "their upper bounds, so the fixed total rent cannot absorb "
                "the drop", rooms=tuple(range(n))))

        plan = conserving_plan(n, s_inc, s_dec, unit="inc")
        event = engine.scan(rents, plan, lower, upper, watch.merge_rooms)
        assert event.time is not None, "bounded repair ray cannot be infinite"
        rents = tuple(r + c * event.time
                      for r, c in zip(rents, plan.rate_of_room))
        if trace is not None:
            trace.record("bounds", event.time, event.kinds,
                         {"inc": len(s_inc), "dec": len(s_dec),
                          "below": len(below), "above": len(above)},
                         rents=rents, assignment=assignment,
                         lower=lower, upper=upper)
            trace.bump("bounds_events")
            trace.peak("alg1_iterations", iterations)


def _occupant_utilities(engine: EventEngine, inst: Instance, rents):
    return [inst.valuations[engine.agent_of_room[x]][x] - rents[x]
            for x in range(inst.n)]


def maximin_rents(inst: Instance, assignment: Assignment, rents=None,
                  lower=None, upper=None,
                  trace: Optional[TraceLog] = None) -> tuple:
    """Raise the minimum occupant utility as far as the bounds allow.

    Starting rents must be EF and inside the bounds (None runs the bound
    repair first and requires it to succeed); the result stays both. The
    whole minimum-utility class pays less while everything it drags down
    pays less too, balanced by the rooms still free to pay more."""
    n = inst.n
    lower, upper = _effective(inst, lower, upper)
    if rents is None:
        repaired = ef_rents_with_bounds(inst, assignment, None, lower, upper,
                                        trace)
        assert repaired.ok, "no starting point: the rent bounds are infeasible"
        rents = repaired.rents
    rents = tuple(rents)
    engine = _start_state(inst, assignment, rents, lower, upper, True)

    events = 0
    while True:
        succ, pred, strong = engine.weak_strong_adjacency(rents)
        assert not strong
        _, _, at_lower, at_upper = _classes(rents, lower, upper)
        util = _occupant_utilities(engine, inst, rents)
        m = min(util)
        min_class = {x for x in range(n) if util[x] == m}
        pulled_down = _closure(n, pred, min_class)
        capped = _closure(n, pred, at_upper)
        if pulled_down | capped == frozenset(range(n)):
            break
        if _closure(n, succ, at_lower) & min_class:
            break
        s_inc = frozenset(range(n)) - (pulled_down | capped)
        plan = conserving_plan(n, s_inc, pulled_down, unit="dec")
        event = engine.scan(rents, plan, lower, upper,
                            frozenset(min_class))
        assert event.time is not None, "maximin motion always meets a merge"
        rents = tuple(r + c * event.time
                      for r, c in zip(rents, plan.rate_of_room))
        events += 1
        assert events <= 2 * n + 8, "maximin does not settle"
        if trace is not None:
            trace.record("maximin", event.time, event.kinds,
                         {"min_class": len(min_class), "inc": len(s_inc)},
                         rents=rents, assignment=assignment,
                         lower=lower, upper=upper)
            trace.bump("maximin_events")
    return rents


def leximin_rents(inst: Instance, assignment: Assignment, rents=None,
                  lower=None, upper=None,
                  trace: Optional[TraceLog] = None) -> tuple:
    """Maximin, then recursively improve the next-lowest utilities.

    Once a minimum-utility class is stuck only because it sits on a chain
    from rooms at their lower bounds, those rooms are frozen (their rent
    pinned) and the remaining rooms keep optimizing."""
    n = inst.n
    lower, upper = _effective(inst, lower, upper)
    if rents is None:
        repaired = ef_rents_with_bounds(inst, assignment, None, lower, upper,
                                        trace)
        assert repaired.ok, "no starting point: the rent bounds are infeasible"
        rents = repaired.rents
    eff_lo, eff_hi = list(lower), list(upper)
    rents = tuple(rents)
    engine = _start_state(inst, assignment, rents, lower, upper, True)

    frozen = set()
    steps = 0
    while True:
        steps += 1
        assert steps <= 2 * n * n + 10 * n + 10, "leximin does not settle"
        active = [x for x in range(n) if x not in frozen]
        if not active:
            break
        succ, pred, strong = engine.weak_strong_adjacency(rents)
        assert not strong
        _, _, at_lower, at_upper = _classes(rents, eff_lo, eff_hi)
        util = _occupant_utilities(engine, inst, rents)
        m = min(util[x] for x in active)
        min_class = {x for x in active if util[x] == m}
        pulled_down = _closure(n, pred, min_class)
        capped = _closure(n, pred, at_upper)
        if pulled_down | capped == frozenset(range(n)):
            break
        floored = _closure(n, succ, at_lower) & min_class
        if floored:
            frozen |= floored
            for x in floored:
                eff_lo[x] = eff_hi[x] = rents[x]
            if trace is not None:
                trace.record("leximin", Fraction(0),
                             (("freeze", tuple(sorted(floored))),),
                             {"frozen": len(frozen)}, rents=rents,
                             assignment=assignment, lower=tuple(eff_lo),
                             upper=tuple(eff_hi))
            continue
        s_inc = frozenset(range(n)) - (pulled_down | capped)
        plan = conserving_plan(n, s_inc, pulled_down, unit="dec")
        event = engine.scan(rents, plan, tuple(eff_lo), tuple(eff_hi),
                            frozenset(min_class))
        assert event.time is not None, "leximin motion always meets a merge"
        rents = tuple(r + c * event.time
                      for r, c in zip(rents, plan.rate_of_room))
        if trace is not None:
            trace.record("leximin", event.time, event.kinds,
                         {"min_class": len(min_class), "frozen": len(frozen)},
                         rents=rents, assignment=assignment,
                         lower=tuple(eff_lo), upper=tuple(eff_hi))
            trace.bump("leximin_events")
    return rents


def minspread_rents(inst: Instance, assignment: Assignment, rents=None,
                    lower=None, upper=None,
                    trace: Optional[TraceLog] = None) -> tuple:
    """Minimize the gap between the highest and lowest occupant utility.

    First lift the minimum to its maximin level; that level then becomes a
    rent ceiling for every room (no occupant may be pushed back below it),
    and the maximum-utility class pays more, dragging along everything it
    weakly envies, until the gap closes or a ceiling chain blocks it.
    Capping at the floor instead of pinning the minimum class keeps rooms
    that merely tied for the minimum free to improve, which the smallest
    gap sometimes requires."""
    n = inst.n
    lower, upper = _effective(inst, lower, upper)
    rents = tuple(maximin_rents(inst, assignment, rents, lower, upper, trace))
    engine = EventEngine(inst, assignment)

    util = _occupant_utilities(engine, inst, rents)
    m = min(util)
    eff_lo = tuple(lower)
    eff_hi = tuple(min(upper[x],
                       inst.valuations[engine.agent_of_room[x]][x] - m)
                   for x in range(n))

    events = 0
    while True:
        succ, pred, strong = engine.weak_strong_adjacency(rents)
        assert not strong
        _, _, at_lower, at_upper = _classes(rents, eff_lo, eff_hi)
        util = _occupant_utilities(engine, inst, rents)
        top = max(util)
        if top == m:
            break
        max_class = {x for x in range(n) if util[x] == top}
        pushed_up = _closure(n, succ, max_class)
        floored = _closure(n, succ, at_lower)
        if pushed_up | floored == frozenset(range(n)):
            break
        if _closure(n, pred, at_upper) & max_class:
            break
        s_dec = frozenset(range(n)) - (pushed_up | floored)
        plan = conserving_plan(n, pushed_up, s_dec, unit="inc")
        event = engine.scan(rents, plan, eff_lo, eff_hi,
                            frozenset(max_class))
        assert event.time is not None, "spread motion always meets a merge"
        rents = tuple(r + c * event.time
                      for r, c in zip(rents, plan.rate_of_room))
        events += 1
        assert events <= 2 * n * n + 10 * n + 10, "spread phase does not settle"
        if trace is not None:
            trace.record("minspread", event.time, event.kinds,
                         {"max_class": len(max_class), "dec": len(s_dec)},
                         rents=rents, assignment=assignment,
                         lower=eff_lo, upper=eff_hi)
            trace.bump("minspread_events")
    return rents
