"""Packet capture and CSV ingestion.

Two on-disk formats are supported:

* classic pcap: 24-byte global header (magic, version, thiszone, sigfigs,
  snaplen, linktype) followed by 16-byte record headers (ts_sec, ts_frac,
  incl_len, orig_len). Little- or big-endian per magic; the nanosecond
  magic variant is accepted and converted to fractional seconds. Only
  link type 1 (Ethernet) is supported.
* CSV: header line ``timestamp,src_mac,dst_mac,src_ip,dst_ip,src_port,
  dst_port,protocol,size``, UTF-8, comma-separated, ``.`` decimal point.

Both parsers emit :class:`PacketRecord` values in input order.
"""

import csv
import io
import struct
from collections import namedtuple
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .exceptions import (
    BadMagic,
    MissingColumn,
    Truncated,
    UnparsableField,
    UnsupportedLinkType,
)


class Protocol(str, Enum):
    TCP = "TCP"
    UDP = "UDP"
    ICMP = "ICMP"
    OTHER = "OTHER"


_PORTLESS = (Protocol.ICMP, Protocol.OTHER)


@dataclass(slots=True)
class PacketRecord:
    """Normalized per-packet metadata.

    ``src_port``/``dst_port`` are 0 exactly when the transport carries no
    ports (protocol ICMP or OTHER). ``size`` is the original frame length
    in bytes.
    """

    timestamp: float
    src_mac: str
    dst_mac: str
    src_ip: str
    dst_ip: str
    src_port: int
    dst_port: int
    protocol: Protocol
    size: int

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be >= 0")
        if self.size < 1:
            raise ValueError("size must be >= 1")
        portless = self.protocol in _PORTLESS
        if portless and (self.src_port != 0 or self.dst_port != 0):
            raise ValueError(f"{self.protocol.value} packets must carry ports 0")
        if not portless and (self.src_port == 0 or self.dst_port == 0):
            raise ValueError(f"{self.protocol.value} packets must carry nonzero ports")


# ---------------------------------------------------------------------------
# pcap
# ---------------------------------------------------------------------------

# magic bytes -> (struct byte order, timestamp fraction divisor)
_MAGICS = {
    b"\xa1\xb2\xc3\xd4": (">", 1e6),
    b"\xd4\xc3\xb2\xa1": ("<", 1e6),
    b"\xa1\xb2\x3c\x4d": (">", 1e9),
    b"\x4d\x3c\xb2\xa1": ("<", 1e9),
}

_GLOBAL_HEADER_LEN = 24
_RECORD_HEADER_LEN = 16
_LINKTYPE_ETHERNET = 1

_ETHERTYPE_IPV4 = 0x0800
_ETHERTYPE_VLAN = 0x8100

_IPPROTO_ICMP = 1
_IPPROTO_TCP = 6
_IPPROTO_UDP = 17

_ZERO_MAC = "00:00:00:00:00:00"
_ZERO_IP = "0.0.0.0"


def _mac(b: bytes) -> str:
    return ":".join(f"{x:02x}" for x in b)


def _ip(b: bytes) -> str:
    return f"{b[0]}.{b[1]}.{b[2]}.{b[3]}"


def _decode_frame(frame: bytes):
    """Decode Ethernet/IPv4/transport headers, degrading to OTHER/0."""
    if len(frame) < 14:
        return _ZERO_MAC, _ZERO_MAC, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
    dst_mac = _mac(frame[0:6])
    src_mac = _mac(frame[6:12])
    ethertype = (frame[12] << 8) | frame[13]
    offset = 14
    if ethertype == _ETHERTYPE_VLAN:
        # unwrap a single 802.1Q tag; nested tags degrade to OTHER
        if len(frame) < 18:
            return src_mac, dst_mac, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
        ethertype = (frame[16] << 8) | frame[17]
        offset = 18
        if ethertype == _ETHERTYPE_VLAN:
            return src_mac, dst_mac, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
    if ethertype != _ETHERTYPE_IPV4 or len(frame) < offset + 20:
        return src_mac, dst_mac, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
    ip = frame[offset:]
    if ip[0] >> 4 != 4:
        return src_mac, dst_mac, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
    ihl = (ip[0] & 0x0F) * 4
    if ihl < 20 or len(ip) < ihl:
        return src_mac, dst_mac, _ZERO_IP, _ZERO_IP, 0, 0, Protocol.OTHER
    src_ip = _ip(ip[12:16])
    dst_ip = _ip(ip[16:20])
    proto = ip[9]
    frag_offset = ((ip[6] << 8) | ip[7]) & 0x1FFF
    if frag_offset > 0:
        # non-first fragment: transport header unavailable
        return src_mac, dst_mac, src_ip, dst_ip, 0, 0, Protocol.OTHER
    if proto == _IPPROTO_ICMP:
        return src_mac, dst_mac, src_ip, dst_ip, 0, 0, Protocol.ICMP
    if proto in (_IPPROTO_TCP, _IPPROTO_UDP) and len(ip) >= ihl + 4:
        sport = (ip[ihl] << 8) | ip[ihl + 1]
        dport = (ip[ihl + 2] << 8) | ip[ihl + 3]
        if sport != 0 and dport != 0:
            kind = Protocol.TCP if proto == _IPPROTO_TCP else Protocol.UDP
            return src_mac, dst_mac, src_ip, dst_ip, sport, dport, kind
    return src_mac, dst_mac, src_ip, dst_ip, 0, 0, Protocol.OTHER


def parse_pcap(data: bytes) -> Iterator[PacketRecord]:
    """Yield one PacketRecord per record of a classic pcap byte string.

    Raises BadMagic / UnsupportedLinkType on a bad global header and
    Truncated when a record header or body is shorter than declared
    (records before the cut are still yielded).
    """
    if len(data) < _GLOBAL_HEADER_LEN:
        raise BadMagic("input shorter than a pcap global header")
    try:
        order, divisor = _MAGICS[data[:4]]
    except KeyError:
        raise BadMagic(f"unrecognized magic {data[:4].hex()}") from None
    linktype = struct.unpack(order + "I", data[20:24])[0]
    if linktype != _LINKTYPE_ETHERNET:
        raise UnsupportedLinkType(f"link type {linktype} is not Ethernet")

    rec_hdr = struct.Struct(order + "IIII")
    pos = _GLOBAL_HEADER_LEN
    end = len(data)
    while pos < end:
        if end - pos < _RECORD_HEADER_LEN:
            raise Truncated(f"record header cut short at byte {pos}")
        ts_sec, ts_frac, incl_len, orig_len = rec_hdr.unpack_from(data, pos)
        pos += _RECORD_HEADER_LEN
        if end - pos < incl_len:
            raise Truncated(
                f"record body needs {incl_len} bytes, {end - pos} remain")
        frame = data[pos:pos + incl_len]
        pos += incl_len
        src_mac, dst_mac, src_ip, dst_ip, sport, dport, proto = _decode_frame(frame)
        yield PacketRecord(
            timestamp=ts_sec + ts_frac / divisor,
            src_mac=src_mac,
            dst_mac=dst_mac,
            src_ip=src_ip,
            dst_ip=dst_ip,
            src_port=sport,
            dst_port=dport,
            protocol=proto,
            size=orig_len if orig_len > 0 else max(len(frame), 1),
        )


def write_pcap(path, records: Iterable[PacketRecord]) -> None:
    """Write records as a classic little-endian microsecond pcap.

    Frames are synthesized from the record fields (Ethernet + IPv4 +
    transport headers, zero padding up to ``size``); checksums are left 0.
    Timestamps are quantized to microseconds.
    """
    buf = io.BytesIO()
    buf.write(struct.pack("<IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535,
                          _LINKTYPE_ETHERNET))
    for rec in records:
        frame = _build_frame(rec)
        ts_sec = int(rec.timestamp)
        ts_usec = round((rec.timestamp - ts_sec) * 1e6)
        if ts_usec == 1_000_000:
            ts_sec += 1
            ts_usec = 0
        buf.write(struct.pack("<IIII", ts_sec, ts_usec, len(frame), len(frame)))
        buf.write(frame)
    Path(path).write_bytes(buf.getvalue())


def _build_frame(rec: PacketRecord) -> bytes:
    dst = bytes.fromhex(rec.dst_mac.replace(":", ""))
    src = bytes.fromhex(rec.src_mac.replace(":", ""))
    if rec.protocol is Protocol.OTHER:
        header = dst + src + struct.pack(">H", 0x88B5)
    else:
        proto_num = {Protocol.TCP: _IPPROTO_TCP, Protocol.UDP: _IPPROTO_UDP,
                     Protocol.ICMP: _IPPROTO_ICMP}[rec.protocol]
        ip_total = rec.size - 14
        ip_hdr = struct.pack(
            ">BBHHHBBH4s4s", 0x45, 0, ip_total, 0, 0, 64, proto_num, 0,
            bytes(int(x) for x in rec.src_ip.split(".")),
            bytes(int(x) for x in rec.dst_ip.split(".")))
        if rec.protocol is Protocol.TCP:
            transport = struct.pack(">HHIIHHHH", rec.src_port, rec.dst_port,
                                    0, 0, 0x5010, 8192, 0, 0)
        elif rec.protocol is Protocol.UDP:
            transport = struct.pack(">HHHH", rec.src_port, rec.dst_port,
                                    rec.size - 34, 0)
        else:  # ICMP echo request, zeroed checksum/id/seq
            transport = struct.pack(">BBHHH", 8, 0, 0, 0, 0)
        header = dst + src + struct.pack(">H", _ETHERTYPE_IPV4) + ip_hdr + transport
    if rec.size < len(header):
        raise ValueError(
            f"size {rec.size} cannot hold a {rec.protocol.value} frame "
            f"({len(header)} header bytes)")
    return header + bytes(rec.size - len(header))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("timestamp", "src_mac", "dst_mac", "src_ip", "dst_ip",
               "src_port", "dst_port", "protocol", "size")

ParsedCsv = namedtuple("ParsedCsv", ["records", "non_monotonic"])


def parse_csv(text: str) -> ParsedCsv:
    """Parse packet-record CSV text.

    Returns the records in input order plus a count of rows whose
    timestamp is smaller than the preceding row's (flagged, not dropped).
    Row indices in errors count the header as row 0.
    """
    reader = csv.DictReader(io.StringIO(text))
    fields = reader.fieldnames or []
    for col in CSV_COLUMNS:
        if col not in fields:
            raise MissingColumn(f"missing column {col!r}")
    records = []
    non_monotonic = 0
    prev_ts = None
    for i, row in enumerate(reader, start=1):
        def grab(col, conv, row=row, i=i):
            raw = row.get(col)
            if raw is None:
                raise UnparsableField(i, col, "")
            try:
                return conv(raw)
            except (TypeError, ValueError):
                raise UnparsableField(i, col, raw) from None
        try:
            rec = PacketRecord(
                timestamp=grab("timestamp", float),
                src_mac=grab("src_mac", str),
                dst_mac=grab("dst_mac", str),
                src_ip=grab("src_ip", str),
                dst_ip=grab("dst_ip", str),
                src_port=grab("src_port", int),
                dst_port=grab("dst_port", int),
                protocol=grab("protocol", Protocol),
                size=grab("size", int),
            )
        except UnparsableField:
            raise
        except ValueError as exc:
            raise UnparsableField(i, "row", str(exc)) from None
        if prev_ts is not None and rec.timestamp < prev_ts:
            non_monotonic += 1
        prev_ts = rec.timestamp
        records.append(rec)
    return ParsedCsv(records, non_monotonic)


def format_csv(records: Iterable[PacketRecord]) -> str:
    """Render records as CSV text that round-trips bit-exactly."""
    out = [",".join(CSV_COLUMNS)]
    for r in records:
        out.append(",".join((
            repr(r.timestamp), r.src_mac, r.dst_mac, r.src_ip, r.dst_ip,
            str(r.src_port), str(r.dst_port), r.protocol.value, str(r.size))))
    return "\n".join(out) + "\n"


def write_csv(path, records: Iterable[PacketRecord]) -> None:
    Path(path).write_text(format_csv(records), encoding="utf-8")


def load_packets(path, fmt: str = "auto") -> list[PacketRecord]:
    """Load a packet file, sniffing pcap vs CSV when ``fmt`` is ``auto``."""
    path = Path(path)
    if fmt == "auto":
        with open(path, "rb") as fh:
            head = fh.read(4)
        fmt = "pcap" if head in _MAGICS else "csv"
    if fmt == "pcap":
        return list(parse_pcap(path.read_bytes()))
    if fmt == "csv":
        return parse_csv(path.read_text(encoding="utf-8")).records
    raise ValueError(f"unknown format {fmt!r}")
