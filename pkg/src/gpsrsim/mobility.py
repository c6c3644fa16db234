"""Random waypoint trajectories, precomputed per node and sampled by time."""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass

from .core import Position, euclidean_distance


@dataclass(slots=True)
class WaypointLeg:
    start: Position
    end: Position
    speed: float
    depart: float
    arrive: float
    pause_until: float


def next_leg(area, pause_s, speed_range, rng: random.Random,
             start: Position, depart: float) -> WaypointLeg:
    """Sample the next straight-line leg: uniform destination in the area,
    uniform speed in [speed_min, speed_max], then a pause at the endpoint."""
    end = Position(rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1]))
    speed = rng.uniform(speed_range[0], speed_range[1])
    arrive = depart + euclidean_distance(start, end) / speed
    return WaypointLeg(start=start, end=end, speed=speed, depart=depart,
                       arrive=arrive, pause_until=arrive + pause_s)


class Trajectory:
    """A node's movement over one run as a list of time-tiled legs.

    Nodes begin resting: the first leg is a zero-length pause at the initial
    placement, which keeps a short run from being dominated by the waypoint
    model's initial-speed transient.
    """

    def __init__(self, legs, sim_time):
        self.legs = legs
        self.sim_time = sim_time
        self._ends = [leg.pause_until for leg in legs]

    def position_at(self, t: float) -> Position:
        if t < 0.0 or t > self.sim_time:
            raise ValueError(f"time {t} outside [0, {self.sim_time}]")
        idx = min(bisect_left(self._ends, t), len(self.legs) - 1)
        return _interpolate(self.legs[idx], t)

    def sampler(self) -> "TrajectorySampler":
        return TrajectorySampler(self.legs)


def _velocity(leg: WaypointLeg) -> tuple[float, float]:
    dur = leg.arrive - leg.depart
    if dur <= 0.0:
        return 0.0, 0.0
    return (leg.end.x - leg.start.x) / dur, (leg.end.y - leg.start.y) / dur


def _interpolate(leg: WaypointLeg, t: float) -> Position:
    if t >= leg.arrive:
        return leg.end
    if t <= leg.depart:
        return leg.start
    vx, vy = _velocity(leg)
    dt = t - leg.depart
    return Position(leg.start.x + vx * dt, leg.start.y + vy * dt)


class TrajectorySampler:
    """Cursor-based position lookup for non-decreasing query times.

    The engine's event loop only moves forward in time, so the active leg
    advances monotonically and each query is amortized O(1). Legs are
    compiled to flat float lists; `xy_at` avoids building Position objects
    in the per-event hot path.
    """

    __slots__ = ("idx", "_departs", "_arrives", "_ends", "_sx", "_sy",
                 "_ex", "_ey", "_vx", "_vy", "_last")

    def __init__(self, legs):
        self.idx = 0
        self._departs = [leg.depart for leg in legs]
        self._arrives = [leg.arrive for leg in legs]
        self._ends = [leg.pause_until for leg in legs]
        self._sx = [leg.start.x for leg in legs]
        self._sy = [leg.start.y for leg in legs]
        self._ex = [leg.end.x for leg in legs]
        self._ey = [leg.end.y for leg in legs]
        velocities = [_velocity(leg) for leg in legs]
        self._vx = [v[0] for v in velocities]
        self._vy = [v[1] for v in velocities]
        self._last = len(legs) - 1

    def xy_at(self, t: float) -> tuple[float, float]:
        idx = self.idx
        ends = self._ends
        while idx < self._last and ends[idx] < t:
            idx += 1
        self.idx = idx
        if t >= self._arrives[idx]:
            return self._ex[idx], self._ey[idx]
        depart = self._departs[idx]
        if t <= depart:
            return self._sx[idx], self._sy[idx]
        dt = t - depart
        return self._sx[idx] + self._vx[idx] * dt, self._sy[idx] + self._vy[idx] * dt

    def position_at(self, t: float) -> Position:
        return Position(*self.xy_at(t))


def build_trajectory(area, pause_s, speed_range, rng: random.Random,
                     sim_time: float, start: Position | None = None) -> Trajectory:
    if start is None:
        start = Position(rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1]))
    legs = [WaypointLeg(start=start, end=start, speed=speed_range[0],
                        depart=0.0, arrive=0.0, pause_until=pause_s)]
    while legs[-1].pause_until < sim_time:
        legs.append(next_leg(area, pause_s, speed_range, rng,
                             legs[-1].end, legs[-1].pause_until))
    return Trajectory(legs, sim_time)


def static_trajectory(pos: Position, sim_time: float) -> Trajectory:
    leg = WaypointLeg(start=pos, end=pos, speed=1.0, depart=0.0,
                      arrive=0.0, pause_until=sim_time)
    return Trajectory([leg], sim_time)
