"""Deterministic discrete-event loop over an idealized broadcast radio.

Every transmission is a broadcast frame: nodes inside the radio range at
send time all receive it after the per-hop latency. The intended next hop
processes it; everyone else sees it promiscuously, which feeds both the
piggybacked position refresh and the trust verifier.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

import numpy as np

from . import adversary
from .core import (BEACON, DATA, GREEDY, Packet, Position, SimConfig,
                   config_to_text, derive_seed, euclidean_distance,
                   wire_position)
from .gpsr import (BOTH, CORRUPTED, HONEST, MALICIOUS_DROP, SELECTIVE,
                   SINKHOLE, NodeState, evict_stale_neighbors, forward_data,
                   make_beacon, refresh_neighbor)
from .mobility import build_trajectory, static_trajectory
from .trust import (TrustParams, buffer_forwarded_packet, expire_pending,
                    on_overhear)

# Event ranks; ties at one timestamp resolve by (rank, subject, insertion order).
EV_BEACON = 0
EV_ARRIVAL = 1
EV_TRAFFIC = 2
EV_EXPIRY = 3
EV_MAINTENANCE = 4

MAINTENANCE_DT = 1.0
POSITION_CACHE_DT = 0.02       # max position staleness for radio decisions
EXPIRY_SLACK = 1e-9            # expiry fires just after the deadline

FLOW_SEQ_BLOCK = 1_000_000     # flows get disjoint sequence spaces

DELIVERED = "delivered"
DROPPED = "dropped"
IN_FLIGHT = "in_flight"


class EngineError(RuntimeError):
    """Internal inconsistency (conservation/accounting violated)."""


def placement_stream(seed: int, nid: int, area) -> tuple:
    """Per-node mobility stream and the initial placement drawn from it."""
    rng = random.Random(derive_seed(seed, "mobility", nid))
    return rng, Position(rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1]))


def initial_placements(cfg: SimConfig) -> list:
    return [placement_stream(cfg.seed, nid, cfg.area_m)[1]
            for nid in range(cfg.nodes)]


def deliver_in_range(tx_pos: Position, radio_range: float, nodes) -> set:
    """Ids of the given (id, position) nodes inside the closed radio disk
    around the transmitter. Callers pass the nodes other than the sender;
    every id returned receives the frame, intended next hop or not."""
    out = set()
    for nid, pos in nodes:
        if euclidean_distance(tx_pos, pos) <= radio_range:
            out.add(nid)
    return out


def cbr_schedule(warmup: float, sim_time: float, interval: float) -> list:
    """Send times for one constant-bit-rate flow."""
    times = []
    k = 0
    while True:
        t = warmup + k * interval
        if t >= sim_time:
            break
        times.append(t)
        k += 1
    return times


@dataclass(slots=True)
class PacketFate:
    status: str
    reason: str
    origin_time: float
    end_time: float
    hops: int
    src: int
    dst: int


@dataclass(slots=True)
class RunRecord:
    cfg: SimConfig
    sent: int = 0
    delivered: int = 0
    dropped: int = 0
    in_flight: int = 0
    control_packets: int = 0
    delay_sum: float = 0.0
    hops_sum: int = 0
    drops_by_reason: dict = field(default_factory=dict)
    packet_log: dict | None = None
    trace_lines: list | None = None
    malicious: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    trust_tables: dict | None = None


class Simulation:
    def __init__(self, cfg: SimConfig, trace: bool = False,
                 collect_packets: bool = True):
        self.cfg = cfg
        self.n = cfg.nodes
        self.now = 0.0
        self.range = cfg.radio_range_m
        self.range_sq = cfg.radio_range_m ** 2
        self.latency_const = cfg.tx_delay_s
        self.bandwidth = cfg.bandwidth_bps
        self.ttl0 = cfg.effective_ttl()
        self.sgpsr = cfg.protocol == "sgpsr"
        self.trust_params = TrustParams(
            init=cfg.trust_init, reward=cfg.trust_reward,
            penalty=cfg.trust_penalty, threshold=cfg.trust_threshold,
            tui=cfg.tui_s) if self.sgpsr else None

        self.trace = [] if trace else None
        self.heap = []
        self._counter = 0

        seed = cfg.seed
        self.flows = self._pick_flows(seed)
        endpoints = {nid for pair in self.flows for nid in pair}
        self.malicious = adversary.pick_malicious(self.n, cfg.malicious,
                                                  endpoints, seed)
        mal_set = set(self.malicious)
        flow_dsts = [dst for _, dst in self.flows]
        self.sink_targets = adversary.assign_sinkhole_targets(
            self.malicious, flow_dsts, seed)

        self.states = []
        self.samplers = []
        self.adv_rng = {}
        self.beacon_rng = []
        for nid in range(self.n):
            mob, start = placement_stream(seed, nid, cfg.area_m)
            if cfg.mobility == "static":
                traj = static_trajectory(start, cfg.sim_time_s)
            else:
                traj = build_trajectory(cfg.area_m, cfg.pause_s,
                                        (cfg.speed_min_mps, cfg.speed_max_mps),
                                        mob, cfg.sim_time_s, start=start)
            self.samplers.append(traj.sampler())
            role = HONEST
            if nid in mal_set:
                role = cfg.attack if cfg.attack in (SINKHOLE, SELECTIVE) else BOTH
            state = NodeState(id=nid, true_pos=start, role=role)
            if role in (SINKHOLE, BOTH):
                state.sinkhole_target = self.sink_targets.get(nid, -1)
            self.states.append(state)
            self.adv_rng[nid] = random.Random(derive_seed(seed, "adversary", nid))
            self.beacon_rng.append(random.Random(derive_seed(seed, "beacon", nid)))

        self.xs = np.zeros(self.n)
        self.ys = np.zeros(self.n)
        self._dx = np.zeros(self.n)
        self._dy = np.zeros(self.n)
        self._cache_t = -1.0
        self._static = cfg.mobility == "static"
        self._refresh_positions(0.0, force=True)

        # accounting
        self.sent = 0
        self.delivered = 0
        self.dropped = 0
        self.control_packets = 0
        self.delay_sum = 0.0
        self.hops_sum = 0
        self.last_data_tx = [-1e18] * self.n
        self.drops_by_reason = {}
        self.orig_digest = {}
        self.packet_log = {} if collect_packets else None
        self.origin_of = {}

        for nid in range(self.n):
            phase = self.beacon_rng[nid].uniform(0.0, cfg.beacon_interval_s)
            self._push(phase, EV_BEACON, nid, None)
        traffic_end = cfg.traffic_stop_s if cfg.traffic_stop_s > 0 else cfg.sim_time_s
        traffic_end = min(traffic_end, cfg.sim_time_s)
        for flow_idx, (src, dst) in enumerate(self.flows):
            for k, t in enumerate(cbr_schedule(cfg.warmup_s, traffic_end,
                                               cfg.cbr_interval_s)):
                self._push(t, EV_TRAFFIC, src,
                           (flow_idx * FLOW_SEQ_BLOCK + k, flow_idx, dst))
        t = MAINTENANCE_DT
        while t <= cfg.sim_time_s:
            self._push(t, EV_MAINTENANCE, -1, None)
            t += MAINTENANCE_DT

    # -- setup helpers -----------------------------------------------------

    def _pick_flows(self, seed: int) -> list:
        cfg = self.cfg
        rng = random.Random(derive_seed(seed, "flows"))
        if cfg.flows == 0:
            return []
        chosen = rng.sample(range(self.n), 2 * cfg.flows)
        return [(chosen[2 * i], chosen[2 * i + 1]) for i in range(cfg.flows)]

    # -- event plumbing ----------------------------------------------------

    def _push(self, time: float, rank: int, subject: int, payload) -> None:
        self._counter += 1
        heapq.heappush(self.heap, (time, rank, subject, self._counter, payload))

    def _refresh_positions(self, t: float, force: bool = False) -> None:
        if not force and (self._static or t - self._cache_t < POSITION_CACHE_DT):
            return
        xs, ys = self.xs, self.ys
        states = self.states
        for nid, sampler in enumerate(self.samplers):
            x, y = sampler.xy_at(t)
            if x != xs[nid] or y != ys[nid]:
                xs[nid] = x
                ys[nid] = y
                states[nid].true_pos = Position(x, y)
        self._cache_t = t

    def _log(self, t, node, event, seq="", mode="", next_hop="", reason=""):
        if self.trace is not None:
            self.trace.append(f"{t:.6f},{node},{event},{seq},{mode},{next_hop},{reason}")

    # -- radio -------------------------------------------------------------

    def _transmit(self, pkt: Packet, tx_id: int, intended: int | None,
                  now: float) -> None:
        dx, dy = self._dx, self._dy
        np.subtract(self.xs, self.xs[tx_id], out=dx)
        np.subtract(self.ys, self.ys[tx_id], out=dy)
        dx *= dx
        dy *= dy
        dx += dy
        recipients = np.flatnonzero(dx <= self.range_sq).tolist()
        recipients.remove(tx_id)
        latency = self.latency_const + pkt.payload_len * 8.0 / self.bandwidth
        self._push(now + latency, EV_ARRIVAL, tx_id,
                   (pkt, intended, recipients))

    # -- terminal accounting -------------------------------------------------

    def _finish(self, pkt: Packet, status: str, reason: str, end: float) -> None:
        if status == DELIVERED:
            self.delivered += 1
            self.delay_sum += end - self.origin_of[pkt.seq]
            self.hops_sum += pkt.hops
        else:
            self.dropped += 1
            self.drops_by_reason[reason] = self.drops_by_reason.get(reason, 0) + 1
        if self.packet_log is not None:
            self.packet_log[pkt.seq] = PacketFate(
                status=status, reason=reason,
                origin_time=self.origin_of[pkt.seq], end_time=end,
                hops=pkt.hops, src=pkt.src, dst=pkt.dst)

    # -- node behavior -------------------------------------------------------

    def _dispatch(self, state: NodeState, pkt: Packet, now: float) -> None:
        """Run the forwarding pipeline at one node and act on the outcome.

        A unicast to a neighbor that has drifted out of range fails fast
        (the handshake gets no answer before any data goes out); the stale
        entry is dropped from the table and the pipeline re-runs, exactly
        like link-layer failure feedback in the full stack.
        """
        cfg = self.cfg
        role = state.role
        advertise = None
        trust = None
        if role == HONEST:
            if self.sgpsr:
                trust = self.trust_params
        elif role in (SINKHOLE, BOTH):
            advertise = self._sinkhole_pos(state)

        while True:
            attempt = pkt.clone()
            action = forward_data(state, attempt, now, cfg.planarization,
                                  trust=trust, advertise=advertise)
            if action.kind == "deliver":
                if attempt.payload_digest == self.orig_digest.get(attempt.seq):
                    self._finish(attempt, DELIVERED, "", now)
                    self._log(now, state.id, "deliver", attempt.seq, attempt.mode)
                else:
                    self._finish(attempt, DROPPED, CORRUPTED, now)
                    self._log(now, state.id, "drop", attempt.seq, attempt.mode,
                              "", CORRUPTED)
                return
            if action.kind == "drop":
                self._finish(attempt, DROPPED, action.reason, now)
                self._log(now, state.id, "drop", attempt.seq, attempt.mode,
                          "", action.reason)
                return

            next_hop = action.next_hop
            sid = state.id
            in_range = ((self.xs[next_hop] - self.xs[sid]) ** 2 +
                        (self.ys[next_hop] - self.ys[sid]) ** 2) <= self.range_sq
            if not in_range:
                state.neighbors.pop(next_hop, None)
                self._log(now, sid, "link_fail", attempt.seq, attempt.mode,
                          next_hop)
                continue
            state.forwarded += 1
            self.last_data_tx[sid] = now
            self._log(now, sid, "send", attempt.seq, attempt.mode, next_hop)
            if trust is not None:
                entry = buffer_forwarded_packet(state, attempt, next_hop, now,
                                                trust)
                if entry is not None:
                    self._push(entry.deadline + EXPIRY_SLACK, EV_EXPIRY,
                               sid, None)
            self._transmit(attempt, sid, next_hop, now)
            return

    def _sinkhole_pos(self, state: NodeState) -> Position:
        target = state.sinkhole_target
        if target < 0:
            return state.true_pos
        dst_pos = Position(float(self.xs[target]), float(self.ys[target]))
        return adversary.sinkhole_beacon(state.true_pos, dst_pos,
                                         self.cfg.sinkhole_jitter_m,
                                         self.adv_rng[state.id])

    def _handle_data(self, state: NodeState, pkt: Packet, now: float) -> None:
        if state.role in (SELECTIVE, BOTH) and pkt.dst != state.id:
            decision = adversary.selective_forward_decision(
                pkt, self.cfg.drop_prob, self.adv_rng[state.id])
            if decision == adversary.DROP:
                if self.cfg.tamper:
                    pkt = adversary.tamper_packet(pkt, self.adv_rng[state.id])
                else:
                    state.dropped += 1
                    self._finish(pkt, DROPPED, MALICIOUS_DROP, now)
                    self._log(now, state.id, "drop", pkt.seq, pkt.mode, "",
                              MALICIOUS_DROP)
                    return
        self._dispatch(state, pkt, now)

    # -- event handlers ------------------------------------------------------

    def _on_beacon_due(self, nid: int, now: float) -> None:
        interval = self.cfg.beacon_interval_s
        jitter = 1.0 + self.beacon_rng[nid].uniform(-0.25, 0.25)
        since_data = now - self.last_data_tx[nid]
        if since_data < interval:
            # A recent data transmission already piggybacked this node's
            # position; the beacon is suppressed and the timer re-armed.
            next_t = max(self.last_data_tx[nid] + interval * jitter,
                         now + 0.05 * interval)
            self._push(next_t, EV_BEACON, nid, None)
            return
        state = self.states[nid]
        advertise = None
        if state.role in (SINKHOLE, BOTH):
            advertise = self._sinkhole_pos(state)
        beacon = make_beacon(state, now, advertise=advertise)
        self.control_packets += 1
        self._log(now, nid, "beacon", beacon.seq)
        self._transmit(beacon, nid, None, now)
        self._push(now + interval * jitter, EV_BEACON, nid, None)

    def _on_arrival(self, tx_id: int, payload, now: float) -> None:
        pkt, intended, recipients = payload
        init = self.cfg.trust_init
        states = self.states
        is_beacon = pkt.kind == BEACON
        sender = pkt.src if is_beacon else pkt.prev_hop
        pos = pkt.piggyback_pos
        sgpsr = self.sgpsr
        for rid in recipients:
            state = states[rid]
            # table refresh: beacons and piggybacked data positions alike
            entry = state.neighbors.get(sender)
            if entry is not None:
                entry.pos = pos
                entry.last_heard = now
            elif sender != rid:
                refresh_neighbor(state, sender, pos, now, init)
            if is_beacon:
                continue
            if sgpsr and state.pending and state.role == HONEST:
                settlement = on_overhear(state, pkt, now, self.trust_params)
                if settlement is not None:
                    self._log(now, rid, "trust", pkt.seq, "",
                              settlement.forwarder,
                              f"{settlement.cause}:{settlement.new:.9g}")
            if rid == intended:
                self._handle_data(state, pkt.clone(), now)

    def _on_traffic(self, src: int, payload, now: float) -> None:
        seq, flow_idx, dst = payload
        state = self.states[src]
        dst_pos = wire_position(Position(float(self.xs[dst]), float(self.ys[dst])))
        digest = derive_seed(self.cfg.seed, "payload", seq)
        pkt = Packet(kind=DATA, seq=seq, src=src, dst=dst, dst_pos=dst_pos,
                     origin_time=now, payload_len=self.cfg.packet_size_bytes,
                     payload_digest=digest, mode=GREEDY, prev_hop=src,
                     ttl=self.ttl0, piggyback_pos=wire_position(state.true_pos))
        self.sent += 1
        state.sent += 1
        self.orig_digest[seq] = digest
        self.origin_of[seq] = now
        self._log(now, src, "gen", seq, pkt.mode, dst)
        self._dispatch(state, pkt, now)

    def _on_expiry(self, nid: int, now: float) -> None:
        state = self.states[nid]
        if not state.pending:
            return
        for settlement in expire_pending(state, now, self.trust_params):
            self._log(now, nid, "trust", "", "", settlement.forwarder,
                      f"{settlement.cause}:{settlement.new:.9g}")

    def _on_maintenance(self, now: float) -> None:
        timeout = self.cfg.neighbor_timeout_s
        for state in self.states:
            evict_stale_neighbors(state, now, timeout)

    # -- main loop -----------------------------------------------------------

    def run(self) -> RunRecord:
        sim_time = self.cfg.sim_time_s
        heap = self.heap
        while heap and heap[0][0] <= sim_time:
            time, rank, subject, _, payload = heapq.heappop(heap)
            if time < self.now:
                raise EngineError("event processed out of order")
            self.now = time
            self._refresh_positions(time)
            if rank == EV_ARRIVAL:
                self._on_arrival(subject, payload, time)
            elif rank == EV_BEACON:
                self._on_beacon_due(subject, time)
            elif rank == EV_TRAFFIC:
                self._on_traffic(subject, payload, time)
            elif rank == EV_EXPIRY:
                self._on_expiry(subject, time)
            elif rank == EV_MAINTENANCE:
                self._on_maintenance(time)
        return self._finalize()

    def _finalize(self) -> RunRecord:
        in_flight = self.sent - self.delivered - self.dropped
        if in_flight < 0:
            raise EngineError("conservation violated: "
                              f"sent={self.sent} delivered={self.delivered} "
                              f"dropped={self.dropped}")
        if self.packet_log is not None:
            for seq, origin in self.origin_of.items():
                if seq not in self.packet_log:
                    flow_idx = seq // FLOW_SEQ_BLOCK
                    src, dst = self.flows[flow_idx]
                    self.packet_log[seq] = PacketFate(
                        status=IN_FLIGHT, reason="", origin_time=origin,
                        end_time=float("nan"), hops=0, src=src, dst=dst)
        trust_tables = None
        if self.sgpsr:
            trust_tables = {s.id: dict(sorted(s.trust_memory.items()))
                            for s in self.states}
            if self.trace is not None:
                for nid in sorted(trust_tables):
                    for other, value in trust_tables[nid].items():
                        self.trace.append(f"trust_final,{nid},{other},{value:.9g}")
        return RunRecord(
            cfg=self.cfg, sent=self.sent, delivered=self.delivered,
            dropped=self.dropped, in_flight=in_flight,
            control_packets=self.control_packets,
            delay_sum=self.delay_sum, hops_sum=self.hops_sum,
            drops_by_reason=dict(sorted(self.drops_by_reason.items())),
            packet_log=self.packet_log, trace_lines=self.trace,
            malicious=self.malicious, flows=self.flows,
            trust_tables=trust_tables)


def run_simulation(cfg: SimConfig, trace: bool = False,
                   collect_packets: bool = True) -> RunRecord:
    sim = Simulation(cfg, trace=trace, collect_packets=collect_packets)
    if trace:
        resolved = config_to_text(cfg).strip().replace("\n", ";").replace(" ", "")
        sim.trace.insert(0, f"# config {resolved}")
        sim.trace.insert(1, "# malicious "
                         + ",".join(str(m) for m in sim.malicious))
        sim.trace.insert(2, f"# protocol={cfg.protocol},nodes={cfg.nodes},"
                            f"area={cfg.area_m[0]:g}x{cfg.area_m[1]:g},"
                            f"seed={cfg.seed}")
    return sim.run()
