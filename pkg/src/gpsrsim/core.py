"""Shared domain types, planar geometry helpers and the run configuration."""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, fields, replace

TWO_PI = 2.0 * math.pi

GREEDY = "greedy"
PERIMETER = "perimeter"

BEACON = "beacon"
DATA = "data"


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True, slots=True)
class Position:
    x: float
    y: float


def euclidean_distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def distance_sq(ax: float, ay: float, bx: float, by: float) -> float:
    dx = ax - bx
    dy = ay - by
    return dx * dx + dy * dy


def angle_of(origin: Position, target: Position) -> float:
    """Counterclockwise bearing of the vector origin->target, in [0, 2*pi)."""
    if origin.x == target.x and origin.y == target.y:
        raise ValueError("bearing undefined for coincident points")
    a = math.atan2(target.y - origin.y, target.x - origin.x)
    if a < 0.0:
        a += TWO_PI
    return a % TWO_PI


def wire_position(p: Position) -> Position:
    """Quantize a position to the 32-bit float precision used on the air."""
    x, y = struct.unpack("<ff", struct.pack("<ff", p.x, p.y))
    return Position(x, y)


@dataclass(slots=True)
class Packet:
    kind: str                      # BEACON or DATA
    seq: int
    src: int
    dst: int
    dst_pos: Position
    origin_time: float
    payload_len: int
    payload_digest: int
    mode: str = GREEDY
    lp: Position | None = None     # where greedy failed
    lf: Position | None = None     # where the packet entered the current face
    e0: tuple[int, int] | None = None  # first edge walked on the current face
    prev_hop: int = -1
    ttl: int = 0
    hops: int = 0
    piggyback_pos: Position = Position(0.0, 0.0)

    def clone(self) -> "Packet":
        return replace(self)


def immutable_digest(pkt: Packet) -> int:
    """Checksum over the fields an honest forwarder must not touch."""
    raw = struct.pack(
        "<qqqffdqQ",
        pkt.seq,
        pkt.src,
        pkt.dst,
        pkt.dst_pos.x,
        pkt.dst_pos.y,
        pkt.origin_time,
        pkt.payload_len,
        pkt.payload_digest,
    )
    return int.from_bytes(hashlib.sha256(raw).digest()[:8], "little")


def derive_seed(*parts) -> int:
    """Stable sub-seed from a run seed plus arbitrary int/str labels."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "little")


PROTOCOLS = ("gpsr", "sgpsr")
ATTACKS = ("sinkhole", "selective", "both")
MOBILITY_MODELS = ("random_waypoint", "static")
PLANARIZATIONS = ("gabriel", "rng")


@dataclass(slots=True)
class SimConfig:
    nodes: int = 150
    area_m: tuple[float, float] = (300.0, 300.0)
    malicious: int = 0
    packet_size_bytes: int = 512
    traffic: str = "cbr"
    flows: int = 6
    cbr_interval_s: float = 0.25
    traffic_stop_s: float = 0.0    # 0 means "generate until sim_time"
    mobility: str = "random_waypoint"
    pause_s: float = 20.0
    speed_min_mps: float = 1.0
    speed_max_mps: float = 5.0
    radio_range_m: float = 100.0
    beacon_interval_s: float = 1.0
    neighbor_timeout_s: float = 3.0
    warmup_s: float = 5.0
    sim_time_s: float = 100.0
    seed: int = 1
    protocol: str = "gpsr"
    attack: str = "both"
    drop_prob: float = 1.0
    tamper: bool = False
    sinkhole_jitter_m: float = 0.0
    planarization: str = "gabriel"
    tui_s: float = 0.5
    trust_init: float = 0.5
    trust_reward: float = 0.05
    trust_penalty: float = 0.10
    trust_threshold: float = 0.3
    ttl_hops: int = 0              # 0 means "use 4 * nodes"
    tx_delay_s: float = 0.001
    bandwidth_bps: float = 250_000.0

    def effective_ttl(self) -> int:
        # Legitimate face walks on sparse connected graphs can exceed 2n
        # hops (faces are re-walked after a face change), so the bound
        # leaves headroom before declaring a loop.
        return self.ttl_hops if self.ttl_hops > 0 else 4 * self.nodes


def validate_config(cfg: SimConfig) -> SimConfig:
    """Check every config invariant, naming each violation individually."""
    problems = []
    if cfg.nodes <= 0:
        problems.append("nodes must be positive")
    if cfg.malicious < 0:
        problems.append("malicious must be non-negative")
    if cfg.malicious >= cfg.nodes:
        problems.append("malicious must be smaller than nodes")
    if cfg.area_m[0] <= 0 or cfg.area_m[1] <= 0:
        problems.append("area_m sides must be positive")
    if cfg.packet_size_bytes <= 0:
        problems.append("packet_size_bytes must be positive")
    if cfg.flows < 0:
        problems.append("flows must be non-negative")
    if 2 * cfg.flows > cfg.nodes - cfg.malicious:
        problems.append("not enough honest nodes for the requested flows")
    if cfg.cbr_interval_s <= 0:
        problems.append("cbr_interval_s must be positive")
    if cfg.traffic_stop_s < 0:
        problems.append("traffic_stop_s must be non-negative")
    if cfg.mobility not in MOBILITY_MODELS:
        problems.append(f"mobility must be one of {MOBILITY_MODELS}")
    if cfg.pause_s < 0:
        problems.append("pause_s must be non-negative")
    if cfg.speed_min_mps <= 0:
        problems.append("speed_min_mps must be positive")
    if cfg.speed_max_mps < cfg.speed_min_mps:
        problems.append("speed_max_mps must be >= speed_min_mps")
    if cfg.radio_range_m <= 0:
        problems.append("radio_range_m must be positive")
    if cfg.beacon_interval_s <= 0:
        problems.append("beacon_interval_s must be positive")
    if cfg.neighbor_timeout_s <= 0:
        problems.append("neighbor_timeout_s must be positive")
    if cfg.warmup_s < 0:
        problems.append("warmup_s must be non-negative")
    if cfg.sim_time_s <= 0:
        problems.append("sim_time_s must be positive")
    if cfg.protocol not in PROTOCOLS:
        problems.append(f"protocol must be one of {PROTOCOLS}")
    if cfg.attack not in ATTACKS:
        problems.append(f"attack must be one of {ATTACKS}")
    if not 0.0 <= cfg.drop_prob <= 1.0:
        problems.append("drop_prob must be within [0, 1]")
    if cfg.sinkhole_jitter_m < 0:
        problems.append("sinkhole_jitter_m must be non-negative")
    if cfg.planarization not in PLANARIZATIONS:
        problems.append(f"planarization must be one of {PLANARIZATIONS}")
    if cfg.tui_s <= 0:
        problems.append("tui_s must be positive")
    if not 0.0 <= cfg.trust_init <= 1.0:
        problems.append("trust_init must be within [0, 1]")
    if cfg.trust_reward <= 0:
        problems.append("trust_reward must be positive")
    if cfg.trust_penalty <= 0:
        problems.append("trust_penalty must be positive")
    if not 0.0 <= cfg.trust_threshold < 1.0:
        problems.append("trust_threshold must be within [0, 1)")
    if cfg.ttl_hops < 0:
        problems.append("ttl_hops must be non-negative")
    if cfg.tx_delay_s < 0:
        problems.append("tx_delay_s must be non-negative")
    if cfg.bandwidth_bps <= 0:
        problems.append("bandwidth_bps must be positive")
    if problems:
        raise ConfigError(problems)
    return cfg


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return "x".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_to_text(cfg: SimConfig) -> str:
    lines = [f"{f.name} = {_format_value(getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def parse_area(text: str) -> tuple[float, float]:
    parts = text.lower().split("x")
    if len(parts) == 1:
        side = float(parts[0])
        return (side, side)
    if len(parts) == 2:
        return (float(parts[0]), float(parts[1]))
    raise ConfigError([f"bad area value {text!r}; expected SIDE or WxH"])


def parse_config(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse the key-value config format; unknown keys are rejected."""
    cfg = replace(base) if base is not None else SimConfig()
    known = {f.name: f for f in fields(SimConfig)}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            setattr(cfg, key, _parse_value(key, value))
        except (ValueError, ConfigError):
            problems.append(f"line {lineno}: bad value for {key!r}: {value!r}")
    if problems:
        raise ConfigError(problems)
    return cfg


def _parse_value(key: str, value: str):
    current = getattr(SimConfig(), key)
    if key == "area_m":
        return parse_area(value)
    if isinstance(current, bool):
        lowered = value.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(value)
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    return value


def load_config(path, base: SimConfig | None = None) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)
