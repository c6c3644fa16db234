"""Baseline GPSR: beaconing, neighbor tables, greedy and perimeter forwarding.

The same node state and forwarding pipeline serve both protocols; the
trust-hardened variant only swaps the next-hop filter and the planar input
set, so with the filter disabled the two are hop-for-hop identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (BEACON, GREEDY, PERIMETER, Packet, Position, angle_of,
                   euclidean_distance, wire_position)
from .planarization import PlanarNeighborSet, next_edge_right_hand, planarize
from .trust import TrustParams, is_trusted, select_trusted_next_hop

HONEST = "honest"
SINKHOLE = "sinkhole"
SELECTIVE = "selective"
BOTH = "both"

# Drop reasons
NO_ROUTE = "no_route"
UNREACHABLE = "unreachable"
TTL_EXPIRED = "ttl_expired"
MALICIOUS_DROP = "malicious_drop"
CORRUPTED = "corrupted"


@dataclass(slots=True)
class NeighborEntry:
    id: int
    pos: Position
    last_heard: float
    trust: float


@dataclass(slots=True)
class NodeState:
    id: int
    true_pos: Position
    role: str = HONEST
    neighbors: dict = field(default_factory=dict)
    pending: list = field(default_factory=list)
    trust_memory: dict = field(default_factory=dict)
    sinkhole_target: int = -1      # flow destination a sinkhole impersonates
    beacon_seq: int = 0
    sent: int = 0
    forwarded: int = 0
    delivered: int = 0
    dropped: int = 0


@dataclass(slots=True)
class Action:
    kind: str                      # "deliver" | "send" | "drop"
    next_hop: int = -1
    packet: Packet | None = None
    reason: str = ""


def make_beacon(state: NodeState, now: float, advertise: Position | None = None) -> Packet:
    pos = wire_position(advertise if advertise is not None else state.true_pos)
    state.beacon_seq += 1
    return Packet(kind=BEACON, seq=state.beacon_seq, src=state.id, dst=-1,
                  dst_pos=pos, origin_time=now, payload_len=16,
                  payload_digest=0, prev_hop=state.id, piggyback_pos=pos)


def handle_beacon(state: NodeState, beacon: Packet, now: float,
                  trust_init: float = 0.5) -> None:
    if beacon.src == state.id:
        return
    refresh_neighbor(state, beacon.src, beacon.piggyback_pos, now, trust_init)


def refresh_neighbor(state: NodeState, sender: int, pos: Position, now: float,
                     trust_init: float) -> None:
    """Insert or refresh a table entry; positions piggybacked on data packets
    come through here exactly as beacons do."""
    entry = state.neighbors.get(sender)
    if entry is None:
        trust = state.trust_memory.get(sender)
        if trust is None:
            trust = trust_init
            state.trust_memory[sender] = trust
        state.neighbors[sender] = NeighborEntry(id=sender, pos=pos,
                                                last_heard=now, trust=trust)
    else:
        entry.pos = pos
        entry.last_heard = now


def evict_stale_neighbors(state: NodeState, now: float, timeout: float) -> list:
    """Drop entries not heard within the timeout; trust memory survives."""
    stale = [nid for nid, e in state.neighbors.items() if now - e.last_heard > timeout]
    for nid in stale:
        del state.neighbors[nid]
    return stale


def select_greedy_next_hop(state: NodeState, dst_pos: Position) -> int | None:
    """Closest neighbor to the destination among those strictly closer than
    self; None marks a local maximum. Ties go to the smaller node id."""
    self_d = euclidean_distance(state.true_pos, dst_pos)
    best_id = None
    best_d = self_d
    for entry in state.neighbors.values():
        d = euclidean_distance(entry.pos, dst_pos)
        if d < best_d or (d == best_d and best_id is not None and entry.id < best_id):
            best_d = d
            best_id = entry.id
    return best_id


def _bearing(origin: Position, target: Position) -> float:
    if origin.x == target.x and origin.y == target.y:
        return 0.0
    return angle_of(origin, target)


def planar_set(state: NodeState, method: str, trust: TrustParams | None,
               dst: int = -1) -> PlanarNeighborSet:
    """Planarize the current table; under the trust filter, distrusted nodes
    are excluded before the witness test (the destination never is)."""
    if trust is None:
        items = [(e.id, e.pos) for e in state.neighbors.values()]
    else:
        items = [(e.id, e.pos) for e in state.neighbors.values()
                 if e.id == dst or is_trusted(e.trust, trust.threshold)]
    return planarize(method, state.true_pos, items, owner=state.id)


def enter_perimeter_mode(pkt: Packet, state: NodeState,
                         planar: PlanarNeighborSet) -> int | None:
    """Mark the packet as face-routing from here; the first face edge is the
    right-hand pick referenced from the bearing toward the destination."""
    if not planar.kept:
        return None
    here = state.true_pos
    nh = next_edge_right_hand(here, _bearing(here, pkt.dst_pos), planar)
    pkt.mode = PERIMETER
    pkt.lp = here
    pkt.lf = here
    pkt.e0 = (state.id, nh)
    return nh


def _segment_intersection(p1: Position, p2: Position, q1: Position,
                          q2: Position) -> Position | None:
    """Closed-segment intersection point; parallel/collinear pairs yield None."""
    r_x, r_y = p2.x - p1.x, p2.y - p1.y
    s_x, s_y = q2.x - q1.x, q2.y - q1.y
    denom = r_x * s_y - r_y * s_x
    if abs(denom) < 1e-15:
        return None
    dx, dy = q1.x - p1.x, q1.y - p1.y
    t = (dx * s_y - dy * s_x) / denom
    u = (dx * r_y - dy * r_x) / denom
    eps = 1e-12
    if -eps <= t <= 1.0 + eps and -eps <= u <= 1.0 + eps:
        return Position(p1.x + t * r_x, p1.y + t * r_y)
    return None


def perimeter_forward(state: NodeState, pkt: Packet,
                      planar: PlanarNeighborSet) -> Action:
    """One face-routing step: revert to greedy on progress past the stuck
    point, otherwise walk the face, switching faces where the walk crosses
    the stuck-point-to-destination segment closer to the destination."""
    here = state.true_pos
    dst_pos = pkt.dst_pos
    if euclidean_distance(here, dst_pos) < euclidean_distance(pkt.lp, dst_pos):
        pkt.mode = GREEDY
        pkt.lp = pkt.lf = pkt.e0 = None
        return Action(kind="greedy")
    if not planar.kept:
        return Action(kind="drop", reason=NO_ROUTE)

    positions = dict(planar.kept)
    cand = next_edge_right_hand(here, _bearing(here, pkt.piggyback_pos), planar)
    lf_d = euclidean_distance(pkt.lf, dst_pos)
    changed = False
    for _ in range(len(planar.kept) + 2):
        inter = _segment_intersection(here, positions[cand], pkt.lp, dst_pos)
        if inter is None:
            break
        inter_d = euclidean_distance(inter, dst_pos)
        if inter_d >= lf_d - 1e-12:
            break
        pkt.lf = inter
        lf_d = inter_d
        changed = True
        cand = next_edge_right_hand(here, _bearing(here, positions[cand]), planar)
    if changed:
        pkt.e0 = (state.id, cand)
    elif pkt.e0 == (state.id, cand):
        return Action(kind="drop", reason=UNREACHABLE)
    return Action(kind="send", next_hop=cand)


def forward_data(state: NodeState, pkt: Packet, now: float, method: str,
                 trust: TrustParams | None = None,
                 advertise: Position | None = None) -> Action:
    """Full data pipeline: local delivery, direct hand-off to an adjacent
    destination, greedy selection, perimeter recovery. A returned send
    action carries the packet already updated for the hop."""
    if pkt.dst == state.id:
        state.delivered += 1
        return Action(kind="deliver", packet=pkt)
    if pkt.ttl <= 0:
        state.dropped += 1
        return Action(kind="drop", reason=TTL_EXPIRED)

    next_hop = None
    if pkt.mode == PERIMETER:
        planar = planar_set(state, method, trust, dst=pkt.dst)
        act = perimeter_forward(state, pkt, planar)
        if act.kind == "drop":
            state.dropped += 1
            return act
        if act.kind == "send":
            next_hop = act.next_hop
        # "greedy" falls through to re-run greedy selection below
    if next_hop is None and pkt.mode == GREEDY:
        if trust is None:
            next_hop = select_greedy_next_hop(state, pkt.dst_pos)
        else:
            next_hop = select_trusted_next_hop(state, pkt.dst_pos, trust)
        if next_hop is None:
            planar = planar_set(state, method, trust, dst=pkt.dst)
            next_hop = enter_perimeter_mode(pkt, state, planar)
            if next_hop is None:
                state.dropped += 1
                return Action(kind="drop", reason=NO_ROUTE)

    pkt.ttl -= 1
    pkt.hops += 1
    pkt.prev_hop = state.id
    pkt.piggyback_pos = wire_position(advertise if advertise is not None
                                      else state.true_pos)
    return Action(kind="send", next_hop=next_hop, packet=pkt)
