"""Damped incremental statistics.

Each accumulator keeps exponentially decayed sums: contributions fade by
``2 ** (-lam * dt)`` per elapsed second, so recent traffic dominates and
per-stream state stays constant-size. Late (out-of-order) updates decay
by dt = 0 instead of a negative dt.
"""

from math import sqrt

EVICTION_WEIGHT = 1e-6


class IncStat1D:
    """Decayed weight / linear sum / squared sum of one value stream."""

    __slots__ = ("lam", "w", "ls", "ss", "last_t", "last_residual")

    def __init__(self, lam: float):
        self.lam = lam
        self.w = 0.0
        self.ls = 0.0
        self.ss = 0.0
        self.last_t = None
        self.last_residual = 0.0

    def update(self, value: float, t: float) -> None:
        last = self.last_t
        if last is None:
            self.last_t = t
        elif t > last:
            d = 2.0 ** (-self.lam * (t - last))
            self.w *= d
            self.ls *= d
            self.ss *= d
            self.last_t = t
        self.w += 1.0
        self.ls += value
        self.ss += value * value
        self.last_residual = value - self.ls / self.w

    def _mean_var(self):
        mean = self.ls / self.w
        var = self.ss / self.w - mean * mean
        # below 1e-9 of the mean square the difference is cancellation
        # noise at double precision, so report exactly 0 (this subsumes
        # clamping small negative values)
        if var < 1e-9 * (self.ss / self.w):
            var = 0.0
        return mean, var

    def stats_now(self):
        """(weight, mean, std) without extra decay (valid right after update)."""
        w = self.w
        if w < 1e-12:
            return 0.0, 0.0, 0.0
        mean, var = self._mean_var()
        return w, mean, sqrt(var)

    def query(self, t: float):
        """(weight, mean, std) decayed to time ``t``.

        Decay scales w/ls/ss uniformly, so the mean and std are those of
        the stored sums and only the weight shrinks; a decayed weight
        under 1e-12 reports (0, 0, 0).
        """
        w = self.w
        if self.last_t is not None and t > self.last_t:
            w *= 2.0 ** (-self.lam * (t - self.last_t))
        if w < 1e-12:
            return 0.0, 0.0, 0.0
        mean, var = self._mean_var()
        return w, mean, sqrt(var)

    def decayed_weight(self, t: float) -> float:
        if self.last_t is None or t <= self.last_t:
            return self.w
        return self.w * 2.0 ** (-self.lam * (t - self.last_t))


class IncStat2D:
    """Decayed residual-product sum linking two IncStat1D streams.

    ``update`` must run after the corresponding 1-D stream was updated
    with the same (value, t); it consumes that stream's fresh residual
    and the opposite stream's cached one.
    """

    __slots__ = ("lam", "sr", "w2", "last_t")

    def __init__(self, lam: float):
        self.lam = lam
        self.sr = 0.0
        self.w2 = 0.0
        self.last_t = None

    def update(self, own_residual: float, other_residual: float, t: float) -> None:
        last = self.last_t
        if last is None:
            self.last_t = t
        elif t > last:
            d = 2.0 ** (-self.lam * (t - last))
            self.sr *= d
            self.w2 *= d
            self.last_t = t
        self.sr += own_residual * other_residual
        self.w2 += 1.0

    def covariance(self) -> float:
        if self.w2 < 1e-12:
            return 0.0
        return self.sr / self.w2

    def decayed_weight(self, t: float) -> float:
        if self.last_t is None or t <= self.last_t:
            return self.w2
        return self.w2 * 2.0 ** (-self.lam * (t - self.last_t))


def combined_stats(out_stats, in_stats, cov: float):
    """(magnitude, radius, covariance, pcc) of a two-way stream pair.

    ``out_stats``/``in_stats`` are (weight, mean, std) triples; pcc is 0
    whenever either std is 0.
    """
    _, mean_a, std_a = out_stats
    _, mean_b, std_b = in_stats
    magnitude = sqrt(mean_a * mean_a + mean_b * mean_b)
    var_a = std_a * std_a
    var_b = std_b * std_b
    radius = sqrt(var_a * var_a + var_b * var_b)
    if std_a > 0.0 and std_b > 0.0:
        pcc = cov / (std_a * std_b)
    else:
        pcc = 0.0
    return magnitude, radius, cov, pcc
