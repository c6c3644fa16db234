"""Effort-return trust bookkeeping for the hardened protocol variant.

A node that hands a data packet to a neighbor buffers a checksum of the
packet's immutable fields and listens promiscuously. Hearing the neighbor
re-transmit an unmodified copy inside the verification window earns a
reward; a modified copy, or silence past the window, costs a penalty.
Next-hop selection then ignores neighbors whose score has sunk to the
threshold or below.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DATA, Packet, euclidean_distance, immutable_digest


@dataclass(frozen=True, slots=True)
class TrustParams:
    init: float = 0.5
    reward: float = 0.05
    penalty: float = 0.10
    threshold: float = 0.3
    tui: float = 0.5               # seconds a forward stays buffered


@dataclass(slots=True)
class PendingVerification:
    pkt_seq: int
    digest: int
    expected_forwarder: int
    deadline: float


@dataclass(frozen=True, slots=True)
class Settlement:
    forwarder: int
    old: float
    new: float
    cause: str                     # "forward" | "tamper" | "expiry"


def update_trust(current: float, delta: float) -> float:
    # Scores live on a 1e-9 grid so repeated decimal steps land exactly on
    # the threshold instead of a float hair above it.
    return round(min(1.0, max(0.0, current + delta)), 9)


def is_trusted(trust: float, threshold: float) -> bool:
    """A neighbor is routable only while strictly above the threshold; a
    persistent dropper is deselected after ceil((init - threshold)/penalty)
    failed settlements."""
    return trust > threshold


def _apply(state, forwarder: int, delta: float, cause: str) -> Settlement:
    old = state.trust_memory.get(forwarder, 0.0)
    new = update_trust(old, delta)
    state.trust_memory[forwarder] = new
    entry = state.neighbors.get(forwarder)
    if entry is not None:
        entry.trust = new
    return Settlement(forwarder=forwarder, old=old, new=new, cause=cause)


def buffer_forwarded_packet(state, pkt: Packet, next_hop: int, now: float,
                            params: TrustParams) -> PendingVerification | None:
    """Remember a forwarded data packet until the neighbor is heard
    re-transmitting it or the window runs out. Hand-offs to the destination
    itself are terminal and never buffered."""
    if pkt.kind != DATA or next_hop == pkt.dst:
        return None
    entry = PendingVerification(
        pkt_seq=pkt.seq,
        digest=immutable_digest(pkt),
        expected_forwarder=next_hop,
        deadline=now + params.tui,
    )
    state.pending.append(entry)
    return entry


def verify_packet_integrity(buffered_digest: int, overheard: Packet) -> bool:
    """True iff the fields an honest forwarder never touches are unchanged;
    ttl, mode, face-routing state and piggybacked position are exempt."""
    return buffered_digest == immutable_digest(overheard)


def on_overhear(state, overheard: Packet, now: float,
                params: TrustParams) -> Settlement | None:
    """Settle the oldest matching buffered forward against an overheard
    frame. Late overhears change nothing: the expiry sweep owns entries
    past their deadline."""
    if overheard.kind != DATA:
        return None
    pending = state.pending
    for i, entry in enumerate(pending):
        if (entry.expected_forwarder == overheard.prev_hop
                and entry.pkt_seq == overheard.seq):
            if now > entry.deadline:
                return None
            del pending[i]
            if verify_packet_integrity(entry.digest, overheard):
                return _apply(state, entry.expected_forwarder,
                              params.reward, "forward")
            return _apply(state, entry.expected_forwarder,
                          -params.penalty, "tamper")
    return None


def expire_pending(state, now: float, params: TrustParams) -> list:
    """Charge every buffered forward whose window has passed as a failure."""
    settlements = []
    remaining = []
    for entry in state.pending:
        if entry.deadline < now:
            settlements.append(_apply(state, entry.expected_forwarder,
                                      -params.penalty, "expiry"))
        else:
            remaining.append(entry)
    if settlements:
        state.pending[:] = remaining
    return settlements


def select_trusted_next_hop(state, dst_pos, params: TrustParams) -> int | None:
    """Greedy choice restricted to neighbors above the trust threshold;
    perimeter recovery then runs on the same filtered set."""
    self_d = euclidean_distance(state.true_pos, dst_pos)
    best_id = None
    best_d = self_d
    for entry in state.neighbors.values():
        if not is_trusted(entry.trust, params.threshold):
            continue
        d = euclidean_distance(entry.pos, dst_pos)
        if d < best_d or (d == best_d and best_id is not None and entry.id < best_id):
            best_d = d
            best_id = entry.id
    return best_id
