"""Shared fixture builders for the test suite."""

import struct

import numpy as np

from driftids.packets import PacketRecord, Protocol


def random_packets(seed, n=1000, n_hosts=6, duration=50.0, base_time=1000.0):
    """A random, time-sorted packet sequence over a small host pool.

    Sizes within a sequence are all distinct, keeping per-stream variances
    far from the floating-point cancellation floor.
    """
    rng = np.random.default_rng(seed)
    hosts = [f"10.0.0.{i + 1}" for i in range(n_hosts)]
    macs = [f"aa:00:00:00:00:{i + 1:02x}" for i in range(n_hosts)]
    ports = (80, 443, 5001, 6001)
    sizes = rng.permutation(np.arange(60, 60 + n))
    out = []
    t = 0.0
    for i in range(n):
        t += float(rng.exponential(duration / n))
        a, b = rng.choice(n_hosts, size=2, replace=False)
        proto = Protocol.TCP if rng.random() < 0.8 else Protocol.UDP
        out.append(PacketRecord(
            timestamp=base_time + t,
            src_mac=macs[a], dst_mac=macs[b],
            src_ip=hosts[a], dst_ip=hosts[b],
            src_port=int(ports[rng.integers(len(ports))]),
            dst_port=int(ports[rng.integers(len(ports))]),
            protocol=proto, size=int(sizes[i])))
    return out


# --- hand-built pcap fixtures ------------------------------------------------

def pcap_global_header(magic=0xA1B2C3D4, linktype=1, order="<"):
    return struct.pack(order + "IHHiIII", magic, 2, 4, 0, 0, 65535, linktype)


def ethernet(src_mac, dst_mac, ethertype, payload):
    return (bytes.fromhex(dst_mac.replace(":", ""))
            + bytes.fromhex(src_mac.replace(":", ""))
            + struct.pack(">H", ethertype) + payload)


def ipv4(src_ip, dst_ip, proto, payload, total_length=None, frag_offset=0):
    if total_length is None:
        total_length = 20 + len(payload)
    header = struct.pack(
        ">BBHHHBBH4s4s", 0x45, 0, total_length, 0, frag_offset, 64, proto, 0,
        bytes(int(x) for x in src_ip.split(".")),
        bytes(int(x) for x in dst_ip.split(".")))
    return header + payload


def udp(sport, dport, payload=b""):
    return struct.pack(">HHHH", sport, dport, 8 + len(payload), 0) + payload


def tcp(sport, dport, payload=b""):
    return struct.pack(">HHIIHHHH", sport, dport, 0, 0, 0x5010, 8192, 0, 0) + payload


def pcap_record(frame, ts_sec, ts_frac, order="<", incl_len=None, orig_len=None):
    incl_len = len(frame) if incl_len is None else incl_len
    orig_len = len(frame) if orig_len is None else orig_len
    return struct.pack(order + "IIII", ts_sec, ts_frac, incl_len, orig_len) + frame


def sample_udp_frame(pad_to=60):
    """60-byte UDP/IPv4 frame: 10.0.0.1:53 -> 10.0.0.2:4444."""
    transport = udp(53, 4444)
    payload = ipv4("10.0.0.1", "10.0.0.2", 17, transport,
                   total_length=pad_to - 14)
    frame = ethernet("aa:aa:aa:aa:aa:01", "aa:aa:aa:aa:aa:02", 0x0800, payload)
    return frame + bytes(pad_to - len(frame))
