"""Local planar-subgraph extraction and right-hand-rule edge selection.

Perimeter forwarding walks faces of a planar subgraph of the radio graph.
Each node prunes its own neighbor set with a local witness test (Gabriel by
default, RNG as the sparser alternative); the right-hand rule then picks the
next face edge counterclockwise from a reference bearing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Position, TWO_PI, angle_of


@dataclass(slots=True)
class PlanarNeighborSet:
    owner: int
    kept: list  # of (node_id, Position)


def gabriel_subgraph(self_pos: Position, neighbors, owner: int = -1) -> PlanarNeighborSet:
    """Keep (self, v) iff no witness lies strictly inside the disk with
    diameter self-v. Boundary witnesses do not eliminate an edge, so
    cocircular points cannot wipe each other out."""
    sx, sy = self_pos.x, self_pos.y
    items = [(vid, vpos, vpos.x, vpos.y) for vid, vpos in neighbors]
    # distance from self to each candidate, shared by every witness test
    d_self = [(vx - sx) ** 2 + (vy - sy) ** 2 for _, _, vx, vy in items]
    kept = []
    for i, (vid, vpos, vx, vy) in enumerate(items):
        d_uv = d_self[i]
        ok = True
        for j, (wid, _, wx, wy) in enumerate(items):
            if wid == vid:
                continue
            if d_self[j] + (vx - wx) ** 2 + (vy - wy) ** 2 < d_uv:
                ok = False
                break
        if ok:
            kept.append((vid, vpos))
    kept.sort(key=lambda item: item[0])
    return PlanarNeighborSet(owner=owner, kept=kept)


def rng_subgraph(self_pos: Position, neighbors, owner: int = -1) -> PlanarNeighborSet:
    """Keep (self, v) iff no witness is strictly closer to both endpoints
    than they are to each other. RNG edges are a subset of Gabriel edges."""
    sx, sy = self_pos.x, self_pos.y
    items = [(vid, vpos, vpos.x, vpos.y) for vid, vpos in neighbors]
    d_self = [(vx - sx) ** 2 + (vy - sy) ** 2 for _, _, vx, vy in items]
    kept = []
    for i, (vid, vpos, vx, vy) in enumerate(items):
        d_uv = d_self[i]
        ok = True
        for j, (wid, _, wx, wy) in enumerate(items):
            if wid == vid:
                continue
            if d_self[j] < d_uv and (vx - wx) ** 2 + (vy - wy) ** 2 < d_uv:
                ok = False
                break
        if ok:
            kept.append((vid, vpos))
    kept.sort(key=lambda item: item[0])
    return PlanarNeighborSet(owner=owner, kept=kept)


def planarize(method: str, self_pos: Position, neighbors, owner: int = -1) -> PlanarNeighborSet:
    if method == "rng":
        return rng_subgraph(self_pos, neighbors, owner)
    return gabriel_subgraph(self_pos, neighbors, owner)


def next_edge_right_hand(self_pos: Position, reference_direction: float,
                         planar: PlanarNeighborSet) -> int:
    """First neighbor strictly counterclockwise from the reference bearing.

    A neighbor exactly on the reference bearing wraps to the end of the
    sweep, so with a single neighbor the edge is walked back the way it
    came. Equal bearings tie-break on the smaller node id.
    """
    if not planar.kept:
        raise ValueError("right-hand rule on an empty planar set")
    best_id = None
    best_delta = math.inf
    for vid, vpos in planar.kept:
        delta = (angle_of(self_pos, vpos) - reference_direction) % TWO_PI
        if delta <= 1e-12:
            delta = TWO_PI
        if delta < best_delta - 1e-12 or (abs(delta - best_delta) <= 1e-12 and vid < best_id):
            best_delta = delta
            best_id = vid
    return best_id
