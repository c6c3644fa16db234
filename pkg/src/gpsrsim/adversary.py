"""Malicious node behaviors: sinkhole luring and selective forwarding."""

from __future__ import annotations

import math
import random
from dataclasses import replace

from .core import Packet, Position, derive_seed

FORWARD = "forward"
DROP = "drop"


def sinkhole_beacon(true_pos: Position, dst_pos: Position, jitter: float,
                    rng: random.Random) -> Position:
    """Advertise a position on top of the destination (optionally smeared by
    up to `jitter` meters) so every greedy neighbor prefers this node."""
    if jitter <= 0.0:
        return dst_pos
    r = rng.uniform(0.0, jitter)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return Position(dst_pos.x + r * math.cos(theta), dst_pos.y + r * math.sin(theta))


def selective_forward_decision(pkt: Packet, drop_prob: float,
                               rng: random.Random) -> str:
    """Data packets are dropped with the configured probability; beacons are
    never suppressed, keeping the attacker attractive."""
    if pkt.kind != "data":
        return FORWARD
    return DROP if rng.random() < drop_prob else FORWARD


def tamper_packet(pkt: Packet, rng: random.Random) -> Packet:
    """Corrupt the payload while leaving routing fields intact, so honest
    nodes keep relaying the damaged packet."""
    return replace(pkt, payload_digest=rng.getrandbits(63))


def pick_malicious(n_nodes: int, n_malicious: int, excluded, seed: int) -> list:
    """Seeded sample of distinct malicious node ids, never touching the
    measured flows' endpoints."""
    rng = random.Random(derive_seed(seed, "malicious"))
    pool = [nid for nid in range(n_nodes) if nid not in excluded]
    return sorted(rng.sample(pool, n_malicious))


def assign_sinkhole_targets(malicious, flow_dsts, seed: int) -> dict:
    """Each sinkhole impersonates one measured flow destination. Targets are
    dealt round-robin over a seeded shuffle of the flows, so a coordinated
    attacker covers every flow before doubling up."""
    if not flow_dsts:
        return {nid: -1 for nid in malicious}
    rng = random.Random(derive_seed(seed, "sinkhole_target"))
    order = list(flow_dsts)
    rng.shuffle(order)
    return {nid: order[rank % len(order)]
            for rank, nid in enumerate(sorted(malicious))}
