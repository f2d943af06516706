"""Labeled synthetic packet traces with configurable drift.

Scenarios are Poisson-arrival background flows with Gaussian packet
sizes (clamped to >= 60 bytes), optional attacks (``flood``, ``scan``,
``mitm-like``) whose rate is a multiplier on the mean background flow
rate, and drift events that switch a flow's rate/size parameters at a
point in time. Attack packets are labeled 1, everything else 0; output
is merged, time-sorted and fully determined by the scenario seed.

A scenario serializes to a flat JSON document (see ``ScenarioSpec``
field names); multi-day traffic is modeled structurally (attack-type
count, parameter shifts) on a compressed clock, not by wall time.
"""

from dataclasses import asdict, dataclass, field

import json
import numpy as np

from .exceptions import InvalidSpec
from .packets import PacketRecord, Protocol

BASE_EPOCH = 1_700_000_000.0

ATTACK_KINDS = ("flood", "scan", "mitm-like")


@dataclass
class FlowSpec:
    """One background flow: fixed endpoints, Poisson arrivals."""

    src_mac: str
    src_ip: str
    src_port: int
    dst_mac: str
    dst_ip: str
    dst_port: int
    protocol: str = "TCP"
    rate: float = 10.0          # packets per second
    size_mean: float = 400.0
    size_std: float = 80.0


@dataclass
class AttackSpec:
    """One attack window.

    ``rate_multiplier`` scales the scenario's mean background flow rate.
    For ``mitm-like`` the traffic flows both ways between ``src_ip`` and
    ``dst_ip`` while ``src_mac`` is the interceptor's hardware address.
    """

    kind: str
    start_s: float
    end_s: float
    rate_multiplier: float
    size_mean: float
    size_std: float
    src_mac: str = "aa:99:99:99:99:99"
    src_ip: str = "10.9.9.9"
    src_port: int = 44321
    dst_mac: str = "bb:00:00:00:00:01"
    dst_ip: str = "10.0.1.1"
    dst_port: int = 80


@dataclass
class DriftEventSpec:
    """Switch one flow's parameters at ``time_s`` (None keeps a value)."""

    time_s: float
    flow: int
    rate: float | None = None
    size_mean: float | None = None
    size_std: float | None = None


@dataclass
class ScenarioSpec:
    duration_s: float
    flows: list = field(default_factory=list)
    attacks: list = field(default_factory=list)
    drift_events: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.flows = [f if isinstance(f, FlowSpec) else FlowSpec(**f)
                      for f in self.flows]
        self.attacks = [a if isinstance(a, AttackSpec) else AttackSpec(**a)
                        for a in self.attacks]
        self.drift_events = [d if isinstance(d, DriftEventSpec)
                             else DriftEventSpec(**d) for d in self.drift_events]
        self.validate()

    def validate(self):
        if self.duration_s <= 0:
            raise InvalidSpec("duration_s must be > 0")
        if not self.flows:
            raise InvalidSpec("need at least one background flow")
        for f in self.flows:
            if f.rate <= 0:
                raise InvalidSpec("flow rates must be > 0")
            if f.protocol not in Protocol.__members__:
                raise InvalidSpec(f"unknown protocol {f.protocol!r}")
        for a in self.attacks:
            if a.kind not in ATTACK_KINDS:
                raise InvalidSpec(f"unknown attack kind {a.kind!r}")
            if not 0 <= a.start_s < a.end_s <= self.duration_s:
                raise InvalidSpec("attack window must lie within the scenario")
            if a.rate_multiplier <= 0:
                raise InvalidSpec("attack rate_multiplier must be > 0")
        for d in self.drift_events:
            if not 0 <= d.time_s <= self.duration_s:
                raise InvalidSpec("drift event outside the scenario")
            if not 0 <= d.flow < len(self.flows):
                raise InvalidSpec(f"drift event targets unknown flow {d.flow}")
            if d.rate is not None and d.rate <= 0:
                raise InvalidSpec("drifted rate must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioSpec":
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        return cls.from_dict(json.loads(text))


def _arrivals(rng, start: float, end: float, rate: float) -> list[float]:
    out = []
    t = start
    while True:
        t += rng.exponential(1.0 / rate)
        if t >= end:
            return out
        out.append(t)


def _size(rng, mean: float, std: float) -> int:
    return int(round(min(max(rng.normal(mean, std), 60.0), 65535.0)))


def generate(spec: ScenarioSpec):
    """Render a scenario into (time-sorted PacketRecords, 0/1 labels)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    base_rate = float(np.mean([f.rate for f in spec.flows]))
    times: list[float] = []
    rows: list[PacketRecord] = []
    labels: list[int] = []

    def emit(t, src_mac, src_ip, sport, dst_mac, dst_ip, dport, proto, size,
             label):
        times.append(t)
        rows.append(PacketRecord(
            timestamp=BASE_EPOCH + t, src_mac=src_mac, dst_mac=dst_mac,
            src_ip=src_ip, dst_ip=dst_ip, src_port=sport, dst_port=dport,
            protocol=Protocol[proto], size=size))
        labels.append(label)

    for fi, flow in enumerate(spec.flows):
        events = sorted((d for d in spec.drift_events if d.flow == fi),
                        key=lambda d: d.time_s)
        bounds = [0.0] + [d.time_s for d in events] + [spec.duration_s]
        rate, mean, std = flow.rate, flow.size_mean, flow.size_std
        for i in range(len(bounds) - 1):
            if i > 0:
                ev = events[i - 1]
                rate = ev.rate if ev.rate is not None else rate
                mean = ev.size_mean if ev.size_mean is not None else mean
                std = ev.size_std if ev.size_std is not None else std
            for t in _arrivals(rng, bounds[i], bounds[i + 1], rate):
                emit(t, flow.src_mac, flow.src_ip, flow.src_port,
                     flow.dst_mac, flow.dst_ip, flow.dst_port,
                     flow.protocol, _size(rng, mean, std), 0)

    for atk in spec.attacks:
        rate = atk.rate_multiplier * base_rate
        arrivals = _arrivals(rng, atk.start_s, atk.end_s, rate)
        if atk.kind == "flood":
            for t in arrivals:
                emit(t, atk.src_mac, atk.src_ip, atk.src_port,
                     atk.dst_mac, atk.dst_ip, atk.dst_port, "TCP",
                     _size(rng, atk.size_mean, atk.size_std), 1)
        elif atk.kind == "scan":
            for t in arrivals:
                port = int(rng.integers(1, 1025))
                emit(t, atk.src_mac, atk.src_ip, atk.src_port,
                     atk.dst_mac, atk.dst_ip, port, "TCP",
                     _size(rng, atk.size_mean, atk.size_std), 1)
        else:  # mitm-like relay between the two endpoints
            for i, t in enumerate(arrivals):
                size = _size(rng, atk.size_mean, atk.size_std)
                if i % 2 == 0:
                    emit(t, atk.src_mac, atk.src_ip, atk.src_port,
                         atk.dst_mac, atk.dst_ip, atk.dst_port, "TCP",
                         size, 1)
                else:
                    emit(t, atk.src_mac, atk.dst_ip, atk.dst_port,
                         atk.dst_mac, atk.src_ip, atk.src_port, "TCP",
                         size, 1)

    order = np.argsort(np.asarray(times), kind="stable")
    records = [rows[i] for i in order]
    return records, np.asarray(labels, dtype=np.int64)[order]


def preset(level: str, seed: int = 0) -> ScenarioSpec:
    """Built-in scenarios: light drift (level1) or heavy drift (level2)."""
    if level == "level1":
        flows = [
            FlowSpec("aa:00:00:00:00:01", "10.0.0.1", 5001,
                     "bb:00:00:00:00:01", "10.0.1.1", 80, "TCP", 25.0, 180.0, 36.0),
            FlowSpec("aa:00:00:00:00:02", "10.0.0.2", 5002,
                     "bb:00:00:00:00:01", "10.0.1.1", 443, "TCP", 30.0, 420.0, 84.0),
            FlowSpec("aa:00:00:00:00:03", "10.0.0.3", 5003,
                     "bb:00:00:00:00:01", "10.0.1.1", 53, "UDP", 35.0, 220.0, 44.0),
            FlowSpec("aa:00:00:00:00:04", "10.0.0.4", 5004,
                     "bb:00:00:00:00:01", "10.0.1.1", 80, "TCP", 20.0, 240.0, 48.0),
            FlowSpec("aa:00:00:00:00:05", "10.0.0.5", 5005,
                     "bb:00:00:00:00:01", "10.0.1.1", 8080, "TCP", 28.0, 640.0, 128.0),
            FlowSpec("aa:00:00:00:00:06", "10.0.0.6", 5006,
                     "bb:00:00:00:00:01", "10.0.1.1", 443, "TCP", 27.0, 880.0, 176.0),
        ]
        attacks = [AttackSpec("flood", 420.0, 510.0, 12.0, 1400.0, 60.0)]
        return ScenarioSpec(duration_s=600.0, flows=flows, attacks=attacks,
                            drift_events=[], seed=seed)
    if level == "level2":
        flows = [
            FlowSpec("aa:00:00:00:00:01", "10.0.0.1", 5001,
                     "bb:00:00:00:00:01", "10.0.1.1", 80, "TCP", 12.0, 180.0, 36.0),
            FlowSpec("aa:00:00:00:00:02", "10.0.0.2", 5002,
                     "bb:00:00:00:00:01", "10.0.1.1", 443, "TCP", 14.0, 360.0, 72.0),
            FlowSpec("aa:00:00:00:00:03", "10.0.0.3", 5003,
                     "bb:00:00:00:00:01", "10.0.1.1", 53, "UDP", 10.0, 520.0, 104.0),
            FlowSpec("aa:00:00:00:00:04", "10.0.0.4", 5004,
                     "bb:00:00:00:00:01", "10.0.1.1", 80, "TCP", 16.0, 240.0, 48.0),
            FlowSpec("aa:00:00:00:00:05", "10.0.0.5", 5005,
                     "bb:00:00:00:00:01", "10.0.1.1", 8080, "TCP", 12.0, 700.0, 140.0),
            FlowSpec("aa:00:00:00:00:06", "10.0.0.6", 5006,
                     "bb:00:00:00:00:01", "10.0.1.1", 443, "TCP", 9.0, 420.0, 84.0),
            FlowSpec("aa:00:00:00:00:07", "10.0.0.7", 5007,
                     "bb:00:00:00:00:01", "10.0.1.1", 22, "TCP", 11.0, 300.0, 60.0),
        ]
        attacks = [
            AttackSpec("flood", 180.0, 240.0, 10.0, 1350.0, 50.0,
                       src_mac="aa:99:00:00:00:01", src_ip="10.9.9.1"),
            AttackSpec("scan", 420.0, 480.0, 8.0, 60.0, 0.0,
                       src_mac="aa:99:00:00:00:02", src_ip="10.9.9.2",
                       src_port=51515),
            AttackSpec("mitm-like", 650.0, 730.0, 6.0, 700.0, 250.0,
                       src_mac="aa:99:00:00:00:03", src_ip="10.0.0.1",
                       src_port=5001, dst_ip="10.0.1.1", dst_port=80),
        ]
        drift_events = [
            DriftEventSpec(330.0, 0, rate=36.0, size_mean=520.0, size_std=100.0),
            DriftEventSpec(560.0, 3, rate=40.0, size_mean=900.0, size_std=90.0),
        ]
        return ScenarioSpec(duration_s=900.0, flows=flows, attacks=attacks,
                            drift_events=drift_events, seed=seed)
    raise InvalidSpec(f"unknown preset level {level!r}")
