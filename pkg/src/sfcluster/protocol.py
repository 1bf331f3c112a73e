"""Asynchronous clustering protocol run node-by-node on :class:`SimNetwork`.

Cores flood *Type 1* (cluster initiation) messages; every node keeps the
shortest copy per core and re-floods improvements. When its timer fires a
service node commits to the nearest core it has heard of (ties to the
lowest core id) and source-routes a *Type 2* join request back along the
path the winning Type 1 took. Cores record joins in ``cluster_tab`` and
every other core they hear from in ``core_tab``.

Hop counts start at 1 on the core's neighbors. A message's ``path`` lists
the nodes strictly between the origin and the current receiver.
"""

from __future__ import annotations

import ipaddress
import json
import logging
import os
from dataclasses import dataclass, field, replace
from enum import IntEnum

from sfcluster.centralized import NoCoresError
from sfcluster.graph import DEFAULT_D_MAX, CorePartition, Graph
from sfcluster.simnet import DelayModel, SimEvent, SimNetwork

log = logging.getLogger(__name__)


class MsgType(IntEnum):
    TYPE1 = 1
    TYPE2 = 2


def net_addr(node_id: int) -> str:
    return str(ipaddress.IPv4Address(0x0A000000 + node_id))


@dataclass(frozen=True)
class ProtocolMessage:
    msg_type: MsgType
    origin: int
    origin_addr: str
    path: tuple[int, ...]
    hop_cnt: int
    core: int | None = None          # Type 2: the core being joined
    route: tuple[int, ...] = ()      # Type 2: remaining hops, ending at the core

    @property
    def type_name(self) -> str:
        return "Type1" if self.msg_type is MsgType.TYPE1 else "Type2"


def type1(core: int) -> ProtocolMessage:
    return ProtocolMessage(MsgType.TYPE1, core, net_addr(core), (), 1)


@dataclass(frozen=True)
class TempEntry:
    via: int
    hop_cnt: int
    path: tuple[int, ...]


@dataclass
class ServiceNodeState:
    node_id: int
    neighbor_list: list[tuple[int, str]]
    threshold: int
    temp_tab: dict[int, TempEntry] = field(default_factory=dict)
    committed: int | None = None
    isolated: bool = False

    @property
    def degree(self) -> int:
        return len(self.neighbor_list)


@dataclass(frozen=True)
class ClusterEntry:
    service: int
    addr: str
    hop_cnt: int
    path: tuple[int, ...]


@dataclass
class CoreNodeState:
    node_id: int
    neighbor_list: list[tuple[int, str]]
    cluster_tab: dict[int, ClusterEntry] = field(default_factory=dict)
    core_tab: set[int] = field(default_factory=set)
    relay_tab: dict[int, int] = field(default_factory=dict)  # origin core -> best hop relayed


Outgoing = list[tuple[int, ProtocolMessage]]


def _flood(node: int, neighbors, msg: ProtocolMessage, sender: int) -> Outgoing:
    fwd = replace(msg, hop_cnt=msg.hop_cnt + 1, path=msg.path + (node,))
    return [(nb, fwd) for nb, _ in neighbors if nb != sender]


def _type2(state: ServiceNodeState, core: int) -> Outgoing:
    entry = state.temp_tab[core]
    route = tuple(reversed(entry.path)) + (core,)
    msg = ProtocolMessage(MsgType.TYPE2, state.node_id, net_addr(state.node_id), entry.path,
                          entry.hop_cnt, core=core, route=route[1:])
    return [(route[0], msg)]


def on_type1(state: ServiceNodeState, msg: ProtocolMessage, sender: int,
             d_max: int = DEFAULT_D_MAX) -> Outgoing:
    """Service-node handling of a Type 1 copy; returns messages to send."""
    if state.committed is not None or msg.hop_cnt > d_max:
        return []
    entry = state.temp_tab.get(msg.origin)
    if entry is not None and msg.hop_cnt >= entry.hop_cnt:
        return []
    state.temp_tab[msg.origin] = TempEntry(sender, msg.hop_cnt, msg.path)
    out = _flood(state.node_id, state.neighbor_list, msg, sender)
    # A leaf hanging directly off a core cannot do better; it commits at once.
    if state.degree == 1 and msg.hop_cnt == 1:
        state.committed = msg.origin
        out += _type2(state, msg.origin)
    return out


def on_timer(state: ServiceNodeState) -> Outgoing:
    """Decision at timeout: commit to the nearest known core (lowest id on ties)."""
    if state.committed is not None:
        return []
    if not state.temp_tab:
        state.isolated = True
        return []
    core = min(state.temp_tab, key=lambda c: (state.temp_tab[c].hop_cnt, c))
    state.committed = core
    return _type2(state, core)


def on_type2(state: CoreNodeState, msg: ProtocolMessage) -> None:
    if msg.origin in state.cluster_tab:
        log.warning("core %d: duplicate join from %d overwritten", state.node_id, msg.origin)
    state.cluster_tab[msg.origin] = ClusterEntry(msg.origin, msg.origin_addr, msg.hop_cnt,
                                                 msg.path)


def on_core_type1(state: CoreNodeState, msg: ProtocolMessage, sender: int,
                  d_max: int = DEFAULT_D_MAX) -> Outgoing:
    """A core hearing another core: note it, and relay the flood like a service node."""
    if msg.origin == state.node_id or msg.hop_cnt > d_max:
        return []
    state.core_tab.add(msg.origin)
    best = state.relay_tab.get(msg.origin)
    if best is not None and msg.hop_cnt >= best:
        return []
    state.relay_tab[msg.origin] = msg.hop_cnt
    return _flood(state.node_id, state.neighbor_list, msg, sender)


@dataclass
class ProtocolResult:
    cores: dict[int, CoreNodeState]
    services: dict[int, ServiceNodeState]
    trace: list[dict]
    params: dict

    def core_of(self) -> dict[int, tuple[int, int]]:
        """``service -> (core, hops)`` for every committed service node."""
        return {s: (st.committed, st.temp_tab[st.committed].hop_cnt)
                for s, st in self.services.items() if st.committed is not None}

    @property
    def isolated(self) -> list[int]:
        return sorted(s for s, st in self.services.items() if st.committed is None)

    def cluster_sizes(self) -> list[int]:
        return [len(self.cores[c].cluster_tab) for c in sorted(self.cores)]

    def to_json(self) -> dict:
        return {
            "cores": [
                {
                    "id": c,
                    "cluster": [
                        {"id": e.service, "addr": e.addr, "hop_cnt": e.hop_cnt,
                         "path": list(e.path)}
                        for e in sorted(st.cluster_tab.values(), key=lambda e: e.service)
                    ],
                    "core_tab": sorted(st.core_tab),
                }
                for c, st in sorted(self.cores.items())
            ],
            "isolated": self.isolated,
            "params": self.params,
        }


def default_tau_end(delays: DelayModel, d_max: int = DEFAULT_D_MAX) -> float:
    """Timeout comfortably above the ``2 * d_max * max_delay`` sufficiency bound."""
    return 4.0 * d_max * delays.max_delay


def start_round(g: Graph, part: CorePartition, delays: DelayModel, tau_end: float,
                d_max: int = DEFAULT_D_MAX, max_events: int | None = None) -> ProtocolResult:
    """Run one clustering round to quiescence and return every node's final state."""
    if part.n_cores == 0:
        raise NoCoresError(part.threshold, int(g.degrees().max(initial=0)))
    if tau_end <= 0:
        raise ValueError("tau_end must be positive")
    nbrs = {i: [(j, net_addr(j)) for j in sorted(g.neighbors(i))] for i in g.nodes()}
    cores = {c: CoreNodeState(c, nbrs[c]) for c in part.core_ids}
    services = {s: ServiceNodeState(s, nbrs[s], part.threshold) for s in part.server_ids}
    if max_events is None:
        max_events = (part.n_cores + 1) * 2 * g.n_edges * (d_max + 1) \
            + g.n_nodes * (d_max + 2) + 16
    net = SimNetwork(g, delays, max_events=max_events)

    def dispatch(out: Outgoing, src: int) -> None:
        for dst, m in out:
            net.send(src, dst, m)

    def deliver(net: SimNetwork, ev: SimEvent) -> None:
        msg: ProtocolMessage = ev.payload
        node = ev.to
        if msg.msg_type is MsgType.TYPE2:
            if msg.route:
                net.send(node, msg.route[0], replace(msg, route=msg.route[1:]))
            elif node in cores and msg.core == node:
                on_type2(cores[node], msg)
            else:
                raise AssertionError(f"Type 2 for core {msg.core} ended at {node}")
        elif node in cores:
            dispatch(on_core_type1(cores[node], msg, ev.sender, d_max), node)
        else:
            dispatch(on_type1(services[node], msg, ev.sender, d_max), node)

    def timer(net: SimNetwork, node: int) -> None:
        if node in services:
            dispatch(on_timer(services[node]), node)

    for i in g.nodes():
        net.set_timer(i, tau_end)
    for c in part.core_ids:
        for nb, _ in nbrs[c]:
            net.send(c, nb, type1(c))
    trace = net.run(deliver, timer)
    params = {"n": g.n_nodes, "threshold": part.threshold, "d_max": d_max,
              "tau_end": tau_end, "delay": _delay_params(delays)}
    return ProtocolResult(cores, services, trace, params)


def _delay_params(delays: DelayModel) -> dict:
    if delays.kind == "fixed":
        return {"kind": "fixed", "d": delays.fixed}
    if delays.kind == "uniform":
        return {"kind": "uniform", "lo": delays.lo, "hi": delays.hi, "seed": delays.seed}
    return {"kind": "per_link", "default": delays.default, "links": len(delays.per_link)}


def write_state(result: ProtocolResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(result.to_json(), fh, indent=1)
        fh.write("\n")
