"""Deterministic discrete-event network for running node protocols over a graph.

Messages travel only along graph edges and arrive after a delay drawn from
a :class:`DelayModel`; each node may hold one pending timer. Events fire
in ``(time, sequence)`` order, so equal-time events resolve in scheduling
order and reruns with the same seed give identical traces.
"""

from __future__ import annotations

import heapq
import itertools
import json
import os
import random
from dataclasses import dataclass, field
from typing import Any, Callable

from sfcluster.graph import Graph

DELIVER = "deliver"
TIMER = "timer"


class RunawayProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class DelayModel:
    """Link delay law: ``fixed``, ``uniform`` on ``[lo, hi]``, or ``per_link``.

    ``per_link`` maps ``(from, to)`` (looked up in that direction first,
    then reversed) to a delay; links not listed use ``default``.
    """

    kind: str = "uniform"
    fixed: float = 1.0
    lo: float = 0.5
    hi: float = 1.5
    per_link: dict = field(default_factory=dict)
    default: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("fixed", "uniform", "per_link"):
            raise ValueError(f"unknown delay kind {self.kind!r}")
        if self.kind == "fixed" and self.fixed <= 0:
            raise ValueError("delays must be positive")
        if self.kind == "uniform" and not 0 < self.lo <= self.hi:
            raise ValueError("uniform delays need 0 < lo <= hi")
        if self.kind == "per_link" and (self.default <= 0 or
                                        any(d <= 0 for d in self.per_link.values())):
            raise ValueError("delays must be positive")

    @classmethod
    def parse(cls, spec: str, seed: int = 0) -> DelayModel:
        """``fixed:D`` or ``uniform:LO:HI``."""
        parts = spec.split(":")
        try:
            if parts[0] == "fixed" and len(parts) == 2:
                return cls("fixed", fixed=float(parts[1]), seed=seed)
            if parts[0] == "uniform" and len(parts) == 3:
                return cls("uniform", lo=float(parts[1]), hi=float(parts[2]), seed=seed)
        except ValueError:
            pass
        raise ValueError(f"bad delay spec {spec!r}; expected fixed:D or uniform:LO:HI")

    @property
    def max_delay(self) -> float:
        if self.kind == "fixed":
            return self.fixed
        if self.kind == "uniform":
            return self.hi
        return max([self.default, *self.per_link.values()])

    def sampler(self) -> Callable[[int, int], float]:
        if self.kind == "fixed":
            d = self.fixed
            return lambda a, b: d
        if self.kind == "uniform":
            rng = random.Random(self.seed)
            lo, hi = self.lo, self.hi
            return lambda a, b: rng.uniform(lo, hi)
        table, default = self.per_link, self.default
        return lambda a, b: table.get((a, b), table.get((b, a), default))


@dataclass(order=True)
class SimEvent:
    fire_time: float
    sequence: int
    kind: str = field(compare=False)
    to: int = field(compare=False)
    sender: int | None = field(default=None, compare=False)
    payload: Any = field(default=None, compare=False)
    generation: int = field(default=0, compare=False)


class SimNetwork:
    """Event loop over a frozen graph.

    Handlers are plain callables: ``on_deliver(net, event)`` and
    ``on_timer(net, node)``. Inside a handler ``net.now`` is the event time
    and ``net.send`` / ``net.set_timer`` schedule further events.
    """

    def __init__(self, graph: Graph, delays: DelayModel, max_events: int = 10_000_000):
        self.graph = graph
        self.delays = delays
        self.max_events = max_events
        self.now = 0.0
        self._delay = delays.sampler()
        self._queue: list[SimEvent] = []
        self._seq = itertools.count()
        self._timer_gen: dict[int, int] = {}
        self.trace: list[dict] = []

    def send(self, src: int, dst: int, payload, now: float | None = None) -> SimEvent:
        if not self.graph.has_edge(src, dst):
            raise ValueError(f"nodes {src} and {dst} are not neighbors")
        t = self.now if now is None else now
        ev = SimEvent(t + self._delay(src, dst), next(self._seq), DELIVER, dst, src, payload)
        heapq.heappush(self._queue, ev)
        return ev

    def set_timer(self, node: int, duration: float, now: float | None = None) -> SimEvent:
        """Arm ``node``'s timer; a previously armed timer is superseded."""
        if duration <= 0:
            raise ValueError("timer duration must be positive")
        gen = self._timer_gen.get(node, 0) + 1
        self._timer_gen[node] = gen
        t = self.now if now is None else now
        ev = SimEvent(t + duration, next(self._seq), TIMER, node, generation=gen)
        heapq.heappush(self._queue, ev)
        return ev

    def cancel_timer(self, node: int) -> None:
        self._timer_gen[node] = self._timer_gen.get(node, 0) + 1

    def pending(self) -> int:
        return len(self._queue)

    def run(self, on_deliver: Callable[[SimNetwork, SimEvent], None],
            on_timer: Callable[[SimNetwork, int], None] | None = None,
            until: float | None = None) -> list[dict]:
        """Process events until the queue drains (or ``until``); returns the trace."""
        processed = 0
        while self._queue:
            if until is not None and self._queue[0].fire_time > until:
                break
            ev = heapq.heappop(self._queue)
            if ev.kind == TIMER and ev.generation != self._timer_gen.get(ev.to):
                continue
            assert ev.fire_time >= self.now, "event scheduled in the past"
            processed += 1
            if processed > self.max_events:
                raise RunawayProtocolError(f"more than {self.max_events} events processed")
            self.now = ev.fire_time
            self.trace.append(_record(ev))
            if ev.kind == DELIVER:
                on_deliver(self, ev)
            elif on_timer is not None:
                on_timer(self, ev.to)
        if until is not None:
            self.now = max(self.now, until)
        return self.trace


def _record(ev: SimEvent) -> dict:
    msg = ev.payload
    return {
        "t": ev.fire_time,
        "kind": ev.kind,
        "from": ev.sender,
        "to": ev.to,
        "msg_type": getattr(msg, "type_name", None),
        "hop_cnt": getattr(msg, "hop_cnt", None),
    }


def write_trace(trace: list[dict], path: str | os.PathLike) -> None:
    """Line-delimited JSON, one event per line."""
    with open(path, "w", newline="\n") as fh:
        for rec in trace:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_trace(path: str | os.PathLike) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]
