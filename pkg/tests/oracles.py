"""Independent reference implementations used to cross-check the package.

Everything here recomputes results from explicit full histories (direct
damped sums, exhaustive split search, second-pass tallies) instead of the
package's incremental/vectorized paths.
"""

import numpy as np

LAMBDAS = np.asarray((5.0, 3.0, 1.0, 0.1, 0.01))


class OracleStream:
    """Full-history damped sums of one value stream, all decay rates at once."""

    def __init__(self):
        self.times = []
        self.values = []

    def add(self, value, t):
        self.times.append(t)
        self.values.append(value)

    def sums(self, at):
        T = np.asarray(self.times)
        V = np.asarray(self.values)
        decay = np.exp2(np.outer(-LAMBDAS, at - T))  # (n_lambda, n_events)
        w = decay.sum(axis=1)
        ls = decay @ V
        ss = decay @ (V * V)
        return w, ls, ss

    def stats(self, at):
        """(n_lambda, 3) rows of (weight, mean, std) at time ``at``."""
        if not self.times:
            return np.zeros((len(LAMBDAS), 3))
        w, ls, ss = self.sums(at)
        out = np.zeros((len(LAMBDAS), 3))
        for i in range(len(LAMBDAS)):
            if w[i] < 1e-12:
                continue
            mean = ls[i] / w[i]
            var = ss[i] / w[i] - mean * mean
            if var < 1e-9 * (ss[i] / w[i]):
                var = 0.0
            out[i] = (w[i], mean, np.sqrt(var))
        return out

    def last_residual(self):
        """Residual of the latest event at its own time, per decay rate."""
        at = self.times[-1]
        w, ls, _ = self.sums(at)
        return self.values[-1] - ls / w


class OracleChannel:
    """Two directional streams plus the damped residual-product history."""

    def __init__(self):
        self.a = OracleStream()
        self.b = OracleStream()
        self.res_a = np.zeros(len(LAMBDAS))
        self.res_b = np.zeros(len(LAMBDAS))
        self.ptimes = []
        self.pvalues = []  # (n_lambda,) product per pair-update event

    def add(self, side, value, t):
        own = self.a if side == "a" else self.b
        own.add(value, t)
        r_own = own.last_residual()
        r_other = self.res_b if side == "a" else self.res_a
        self.ptimes.append(t)
        self.pvalues.append(r_own * r_other)
        if side == "a":
            self.res_a = r_own
        else:
            self.res_b = r_own

    def covariance(self, at):
        T = np.asarray(self.ptimes)
        P = np.stack(self.pvalues)  # (n_events, n_lambda)
        decay = np.exp2(np.outer(-LAMBDAS, at - T))
        w2 = decay.sum(axis=1)
        sr = (decay * P.T).sum(axis=1)
        return np.where(w2 >= 1e-12, sr / np.where(w2 > 0, w2, 1.0), 0.0)


class OracleExtractor:
    """From-scratch evaluation of the 100-feature schema."""

    def __init__(self):
        self.mac_ip = {}
        self.host = {}
        self.channels = {}
        self.sockets = {}

    def process(self, pkt):
        t, v = pkt.timestamp, float(pkt.size)
        row = np.zeros(100)
        for table, key, offset in ((self.mac_ip, (pkt.src_mac, pkt.src_ip), 0),
                                   (self.host, pkt.src_ip, 3)):
            stream = table.setdefault(key, OracleStream())
            stream.add(v, t)
            stats = stream.stats(t)
            for i in range(len(LAMBDAS)):
                row[i * 20 + offset: i * 20 + offset + 3] = stats[i]
        for table, a_key, b_key, offset in (
                (self.channels, pkt.src_ip, pkt.dst_ip, 6),
                (self.sockets, (pkt.src_ip, pkt.src_port),
                 (pkt.dst_ip, pkt.dst_port), 13)):
            if a_key <= b_key:
                key, side = (a_key, b_key), "a"
            else:
                key, side = (b_key, a_key), "b"
            channel = table.setdefault(key, OracleChannel())
            channel.add(side, v, t)
            own = channel.a if side == "a" else channel.b
            other = channel.b if side == "a" else channel.a
            out_stats = own.stats(t)
            in_stats = other.stats(t)
            cov = channel.covariance(t)
            for i in range(len(LAMBDAS)):
                _, mean_a, std_a = out_stats[i]
                _, mean_b, std_b = in_stats[i]
                magnitude = np.hypot(mean_a, mean_b)
                radius = np.hypot(std_a * std_a, std_b * std_b)
                if std_a > 0 and std_b > 0:
                    pcc = cov[i] / (std_a * std_b)
                else:
                    pcc = 0.0
                o = i * 20 + offset
                row[o: o + 7] = (out_stats[i][0], mean_a, std_a,
                                 magnitude, radius, cov[i], pcc)
        return row

    def transform(self, packets):
        return np.stack([self.process(p) for p in packets])


def brute_force_damped_stats(history, lam, at):
    """(weight, mean, std) from an explicit [(t, v), ...] history."""
    if not history:
        return 0.0, 0.0, 0.0
    w = ls = ss = 0.0
    for t, v in history:
        d = 2.0 ** (-lam * (at - t))
        w += d
        ls += d * v
        ss += d * v * v
    if w < 1e-12:
        return 0.0, 0.0, 0.0
    mean = ls / w
    var = max(0.0, ss / w - mean * mean)
    return w, mean, var ** 0.5


def brute_force_best_split(X, y, min_leaf=1):
    """Exhaustive (weighted-gini, feature, threshold) search."""
    n = len(y)

    def gini(labels):
        if len(labels) == 0:
            return 0.0
        _, counts = np.unique(labels, return_counts=True)
        p = counts / len(labels)
        return 1.0 - (p ** 2).sum()

    best = None
    for f in range(X.shape[1]):
        uniq = np.unique(X[:, f])
        for a, b in zip(uniq[:-1], uniq[1:]):
            thr = (a + b) / 2.0
            mask = X[:, f] <= thr
            nl = int(mask.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            weighted = (nl * gini(y[mask]) + (n - nl) * gini(y[~mask])) / n
            if best is None or weighted < best[0] - 1e-12:
                best = (weighted, f, thr)
    return best


def tally_confusion(preds, labels):
    """Element-by-element second-pass confusion tally."""
    tp = fp = fn = tn = 0
    for p, l in zip(preds, labels):
        if p == 1 and l == 1:
            tp += 1
        elif p == 1 and l == 0:
            fp += 1
        elif p == 0 and l == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def duplicate_forward(w_enc, b_enc, w_dec, b_dec, x):
    """Per-element reimplementation of the two-layer sigmoid map."""
    import math

    hidden = []
    for j in range(len(b_enc)):
        z = b_enc[j] + sum(w_enc[j][k] * x[k] for k in range(len(x)))
        hidden.append(1.0 / (1.0 + math.exp(-z)))
    recon = []
    for j in range(len(b_dec)):
        z = b_dec[j] + sum(w_dec[j][k] * hidden[k] for k in range(len(hidden)))
        recon.append(1.0 / (1.0 + math.exp(-z)))
    rmse = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, recon)) / len(x))
    return np.asarray(recon), rmse
