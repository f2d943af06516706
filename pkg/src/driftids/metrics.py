"""Confusion-matrix metrics and throughput measurement.

The positive class is "anomalous" (label 1). Zero denominators report 0.
"""

import time
from dataclasses import dataclass

import numpy as np

from ._validation import as_binary_vector
from .exceptions import LengthMismatch


@dataclass
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(preds, labels) -> Confusion:
    preds = as_binary_vector(preds, name="preds")
    labels = as_binary_vector(labels, name="labels")
    if len(preds) != len(labels):
        raise LengthMismatch(
            f"preds has length {len(preds)}, labels {len(labels)}")
    preds = np.asarray(preds, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    return Confusion(
        tp=int((preds & labels).sum()),
        fp=int((preds & ~labels).sum()),
        fn=int((~preds & labels).sum()),
        tn=int((~preds & ~labels).sum()),
    )


def prf1(c: Confusion):
    """(precision, recall, f1); any zero denominator yields 0."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    if precision + recall:
        f1 = 2.0 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return precision, recall, f1


def throughput(process, packets) -> float:
    """Packets per second of ``process`` applied to every packet.

    Single-threaded wall-clock rate; 0 for an empty workload.
    """
    packets = list(packets)
    if not packets:
        return 0.0
    start = time.perf_counter()
    for pkt in packets:
        process(pkt)
    elapsed = time.perf_counter() - start
    return len(packets) / max(elapsed, 1e-9)


def render_metrics_table(precision: float, recall: float, f1: float) -> str:
    """Aligned Precision | Recall | F1 text table."""
    header = "Precision |  Recall |      F1"
    row = f"{precision:9.4f} | {recall:7.4f} | {f1:7.4f}"
    return header + "\n" + row + "\n"
