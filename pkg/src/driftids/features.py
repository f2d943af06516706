"""Per-packet statistical features over damped temporal windows.

Every packet updates four aggregations keyed from its header fields and
emits a fixed 100-slot vector (20 statistics per decay rate, 5 decay
rates). Packet size is the tracked value throughout.

Per decay rate ``L`` the layout is:

====================  ===========================================
``MI_L_*``            weight/mean/std of sizes sent by one source
                      MAC+IP pair
``H_L_*``             weight/mean/std of sizes sent by one source IP
``HH_L_*``            source-IP to destination-IP channel: outbound
                      weight/mean/std plus two-way magnitude, radius,
                      covariance_0_1 and pcc_0_1
``HpHp_L_*``          the same seven statistics for the socket
                      (IP:port to IP:port) channel
====================  ===========================================

Decay rates are {5, 3, 1, 0.1, 0.01}; smaller rates correspond to
longer effective windows (0.01 is roughly a minute, 0.1 roughly ten
seconds). Accumulators whose decayed weight drops below 1e-6 are
deleted during periodic cleanup sweeps, bounding state size.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .packets import PacketRecord
from .streamstats import EVICTION_WEIGHT, IncStat1D, IncStat2D, combined_stats

LAMBDAS = (5.0, 3.0, 1.0, 0.1, 0.01)

FEATURE_COUNT = 100

_HOST_STATS = ("weight", "mean", "std")
_CHANNEL_STATS = ("weight", "mean", "std", "magnitude", "radius",
                  "covariance_0_1", "pcc_0_1")

_DESCRIPTIONS = {
    "MI": "sizes of packets sent by one source MAC+IP pair",
    "H": "sizes of packets sent by one source IP",
    "HH": "sizes of packets on the source-IP/destination-IP channel",
    "HpHp": "sizes of packets on the socket (IP:port pair) channel",
}
_STAT_NOTES = {
    "weight": "decayed packet count",
    "mean": "decayed mean",
    "std": "decayed standard deviation",
    "magnitude": "root of summed squared directional means",
    "radius": "root of summed squared directional variances",
    "covariance_0_1": "decayed covariance between the two directions",
    "pcc_0_1": "correlation coefficient between the two directions",
}


def _lambda_tag(lam: float) -> str:
    return str(int(lam)) if lam == int(lam) else str(lam)


def feature_names() -> list[str]:
    """The 100 schema names, in emission order."""
    names = []
    for lam in LAMBDAS:
        tag = _lambda_tag(lam)
        for agg, stats in (("MI", _HOST_STATS), ("H", _HOST_STATS),
                           ("HH", _CHANNEL_STATS), ("HpHp", _CHANNEL_STATS)):
            names.extend(f"{agg}_{tag}_{stat}" for stat in stats)
    return names


FEATURE_NAMES = tuple(feature_names())
assert len(FEATURE_NAMES) == FEATURE_COUNT


def schema_text() -> str:
    """Human-readable listing of every feature slot."""
    lines = ["idx  name                        description"]
    for i, name in enumerate(FEATURE_NAMES):
        agg, _, stat = name.split("_", 2)
        lines.append(f"{i:3d}  {name:<26}  {_DESCRIPTIONS[agg]}; {_STAT_NOTES[stat]}")
    return "\n".join(lines) + "\n"


def write_features_csv(path, X) -> None:
    """Dump a feature matrix as CSV with the schema names as header."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != FEATURE_COUNT:
        raise ValueError(f"expected (n, {FEATURE_COUNT}) matrix, got {X.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(FEATURE_NAMES) + "\n")
        for row in X:
            fh.write(",".join(repr(x) for x in row) + "\n")


class _Channel:
    __slots__ = ("fwd", "bwd", "cross")

    def __init__(self):
        self.fwd = [None] * len(LAMBDAS)
        self.bwd = [None] * len(LAMBDAS)
        self.cross = [None] * len(LAMBDAS)


class PacketFeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateful streaming transformer from packets to feature vectors.

    The extractor carries the decayed accumulators across calls, so
    packets must be fed in capture order by a single caller; separate
    streams need separate extractor instances. ``transform`` accepts any
    iterable of :class:`PacketRecord` and returns an (n, 100) matrix.
    """

    def __init__(self, cleanup_interval: int = 5000,
                 eviction_weight: float = EVICTION_WEIGHT):
        self.cleanup_interval = cleanup_interval
        self.eviction_weight = eviction_weight
        self.reset()

    def fit(self, X=None, y=None):
        return self

    def reset(self) -> None:
        """Drop all accumulated stream state."""
        self._mac_ip = {}
        self._host = {}
        self._channels = {}
        self._sockets = {}
        self._clock = 0.0
        self._since_cleanup = 0

    @property
    def clock(self) -> float:
        return self._clock

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)

    def transform(self, packets) -> np.ndarray:
        packets = list(packets) if not isinstance(packets, (list, tuple)) else packets
        out = np.empty((len(packets), FEATURE_COUNT))
        for i, pkt in enumerate(packets):
            out[i] = self.process(pkt)
        return out

    def process(self, pkt: PacketRecord) -> np.ndarray:
        """Update all aggregations with one packet and emit its vector."""
        t = pkt.timestamp
        v = float(pkt.size)
        if t > self._clock:
            self._clock = t
        row = np.empty(FEATURE_COUNT)
        self._host_features(self._mac_ip, (pkt.src_mac, pkt.src_ip), v, t, row, 0)
        self._host_features(self._host, pkt.src_ip, v, t, row, 3)
        self._channel_features(self._channels, pkt.src_ip, pkt.dst_ip,
                               v, t, row, 6)
        self._channel_features(self._sockets,
                               (pkt.src_ip, pkt.src_port),
                               (pkt.dst_ip, pkt.dst_port), v, t, row, 13)
        self._since_cleanup += 1
        if self._since_cleanup >= self.cleanup_interval:
            self.prune()
            self._since_cleanup = 0
        return row

    def _host_features(self, table, key, v, t, row, offset):
        entry = table.get(key)
        if entry is None:
            entry = table[key] = [None] * len(LAMBDAS)
        for i, lam in enumerate(LAMBDAS):
            s = entry[i]
            if s is None:
                s = entry[i] = IncStat1D(lam)
            s.update(v, t)
            o = i * 20 + offset
            row[o], row[o + 1], row[o + 2] = s.stats_now()

    def _channel_features(self, table, a_key, b_key, v, t, row, offset):
        if a_key <= b_key:
            key, outbound_fwd = (a_key, b_key), True
        else:
            key, outbound_fwd = (b_key, a_key), False
        ch = table.get(key)
        if ch is None:
            ch = table[key] = _Channel()
        out_list = ch.fwd if outbound_fwd else ch.bwd
        in_list = ch.bwd if outbound_fwd else ch.fwd
        for i, lam in enumerate(LAMBDAS):
            s_out = out_list[i]
            if s_out is None:
                s_out = out_list[i] = IncStat1D(lam)
            s_out.update(v, t)
            s_in = in_list[i]
            cross = ch.cross[i]
            if cross is None:
                cross = ch.cross[i] = IncStat2D(lam)
            cross.update(s_out.last_residual,
                         s_in.last_residual if s_in is not None else 0.0, t)
            out_stats = s_out.stats_now()
            in_stats = s_in.query(t) if s_in is not None else (0.0, 0.0, 0.0)
            mag, rad, cov, pcc = combined_stats(out_stats, in_stats,
                                                cross.covariance())
            o = i * 20 + offset
            row[o], row[o + 1], row[o + 2] = out_stats
            row[o + 3], row[o + 4], row[o + 5], row[o + 6] = mag, rad, cov, pcc

    # -- housekeeping ------------------------------------------------------

    def prune(self, now: float | None = None) -> int:
        """Evict accumulators whose decayed weight fell below the cutoff.

        Returns the number of accumulators removed. Entries whose
        accumulators are all gone are dropped entirely.
        """
        now = self._clock if now is None else now
        removed = 0
        for table in (self._mac_ip, self._host):
            dead = []
            for key, entry in table.items():
                alive = False
                for i, s in enumerate(entry):
                    if s is None:
                        continue
                    if s.decayed_weight(now) < self.eviction_weight:
                        entry[i] = None
                        removed += 1
                    else:
                        alive = True
                if not alive:
                    dead.append(key)
            for key in dead:
                del table[key]
        for table in (self._channels, self._sockets):
            dead = []
            for key, ch in table.items():
                alive = False
                for lst in (ch.fwd, ch.bwd, ch.cross):
                    for i, s in enumerate(lst):
                        if s is None:
                            continue
                        if s.decayed_weight(now) < self.eviction_weight:
                            lst[i] = None
                            removed += 1
                        else:
                            alive = True
                if not alive:
                    dead.append(key)
            for key in dead:
                del table[key]
        return removed

    @property
    def stream_count(self) -> int:
        """Number of live accumulators currently held."""
        count = 0
        for table in (self._mac_ip, self._host):
            for entry in table.values():
                count += sum(s is not None for s in entry)
        for table in (self._channels, self._sockets):
            for ch in table.values():
                for lst in (ch.fwd, ch.bwd, ch.cross):
                    count += sum(s is not None for s in lst)
        return count
