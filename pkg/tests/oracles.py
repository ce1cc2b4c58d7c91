"""Slow, independent reference computations used as test oracles.

Everything here is plain Python (math, itertools, fractions) written directly
from the definitions, so it shares no code with the library.  Running the
module regenerates ``frozen_values.json``.
"""
from __future__ import annotations

import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

FROZEN = Path(__file__).with_name("frozen_values.json")
EDGE_FLOOR = 1e-6


# -- point to box -----------------------------------------------------------

def box_distance_lp(x, lower, upper) -> float:
    """L1 distance from x to the box, solved as a linear program."""
    from scipy.optimize import linprog

    z = len(x)
    # variables: p (z), t (z); minimise sum t with t >= |x - p|
    c = [0.0] * z + [1.0] * z
    A, b = [], []
    for e in range(z):
        row = [0.0] * (2 * z)
        row[e], row[z + e] = -1.0, -1.0  # x - p <= t
        A.append(row)
        b.append(-x[e])
        row = [0.0] * (2 * z)
        row[e], row[z + e] = 1.0, -1.0  # p - x <= t
        A.append(row)
        b.append(x[e])
    bounds = [(lower[e], upper[e]) for e in range(z)] + [(0, None)] * z
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    return float(res.fun)


def box_distance_enum(x, lower, upper, steps=8) -> Fraction:
    """Exact L1 distance by enumerating a grid of box points (exact rationals).

    The grid includes both corners and x's clamped coordinate, so the
    minimum is attained on it.
    """
    axes = []
    for xe, lo, hi in zip(x, lower, upper):
        xe, lo, hi = Fraction(xe), Fraction(lo), Fraction(hi)
        pts = {lo, hi, min(max(xe, lo), hi)}
        pts.update(lo + (hi - lo) * Fraction(i, steps) for i in range(steps + 1))
        axes.append(sorted(pts))
    best = None
    for p in itertools.product(*axes):
        d = sum(abs(Fraction(xe) - pe) for xe, pe in zip(x, p))
        best = d if best is None or d < best else best
    return best


# -- activation and resonance ------------------------------------------------

def _channels(dims):
    out, start = [], 0
    for d in dims:
        out.append(range(start, start + d))
        start += d
    return out


def activation(x, lower, upper, g_lo, g_hi, dims, gamma, alpha=1.0, normalized=True):
    total = 0.0
    for k, idx in enumerate(_channels(dims)):
        dist = 0.0
        for e in idx:
            d = max(0.0, lower[e] - x[e], x[e] - upper[e])
            if normalized:
                m = g_hi[e] - g_lo[e]
                if m == 0:
                    d = 0.0 if d == 0 else math.inf
                else:
                    d = d / m
            dist += d
        total += gamma[k] * math.exp(-alpha * dist)
    return total


def resonance(x, lower, upper, g_lo, g_hi, dims):
    values = []
    for idx in _channels(dims):
        acc = 0.0
        for e in idx:
            s = max(x[e], upper[e]) - min(x[e], lower[e])
            m = g_hi[e] - g_lo[e]
            if m == 0:
                ratio = 0.0 if s == 0 else 1.0
            else:
                ratio = min(max(s / m, 0.0), 1.0)
            acc += ratio
        values.append((len(idx) - acc) / len(idx))
    return values


# -- full network, written as a literal loop ---------------------------------

def run_network(stream, dims, rho=0.5, tau=0.85, alpha=1.0, lr=1.0, glr=1.0,
                grouping=True, normalized=True, gamma=None):
    """Reference online clustering loop.  Returns (winners, nodes, bound)."""
    c = len(dims)
    gamma = gamma or [1.0 / c] * c
    nodes = []  # list of [lower list, upper list]
    g_lo = g_hi = None
    winners = []
    for x in stream:
        x = [float(v) for v in x]
        if g_lo is None:
            g_lo, g_hi = list(x), list(x)
        elif any(a > b for a, b in zip(g_lo, x)) or any(a > b for a, b in zip(x, g_hi)):
            g_lo, g_hi = _mix(g_lo, g_hi, x, glr)
        if not nodes:
            nodes.append([list(x), list(x)])
            J = 0
        else:
            acts = [activation(x, lo, hi, g_lo, g_hi, dims, gamma, alpha, normalized)
                    for lo, hi in nodes]
            J = max(range(len(acts)), key=lambda j: (acts[j], -j))
            m = resonance(x, nodes[J][0], nodes[J][1], g_lo, g_hi, dims)
            if all(v >= rho for v in m):
                nodes[J] = list(_mix(nodes[J][0], nodes[J][1], x, lr))
            else:
                nodes.append([list(x), list(x)])
                J = len(nodes) - 1
        if grouping:
            J = group(nodes, J, g_lo, g_hi, dims, rho, tau)
        winners.append(J)
    return winners, nodes, (g_lo, g_hi)


def _mix(lo, hi, x, rate):
    if rate == 1.0:
        return [min(a, b) for a, b in zip(lo, x)], [max(a, b) for a, b in zip(hi, x)]
    new_lo = [(1 - rate) * a + rate * min(a, b) for a, b in zip(lo, x)]
    new_hi = [(1 - rate) * a + rate * max(a, b) for a, b in zip(hi, x)]
    return ([min(a, b) for a, b in zip(new_lo, new_hi)],
            [max(a, b) for a, b in zip(new_lo, new_hi)])


def _ratio(num, m):
    if m == 0:
        return 0.0 if num == 0 else math.inf
    return num / m


def pair_distance(a, b, g_lo, g_hi, dims):
    """Per-channel minimum of the 2z corner and cross-corner gaps over M."""
    out = []
    for idx in _channels(dims):
        cands = []
        for e in idx:
            m = g_hi[e] - g_lo[e]
            cands.append(_ratio(min(abs(a[0][e] - b[0][e]), abs(a[1][e] - b[0][e])), m))
            cands.append(_ratio(min(abs(a[1][e] - b[1][e]), abs(a[0][e] - b[1][e])), m))
        out.append(min(cands))
    return out


def volume(lo, hi, g_lo, g_hi, idx):
    v = 1.0
    for e in idx:
        edge = _ratio(hi[e] - lo[e], g_hi[e] - g_lo[e])
        if math.isinf(edge):
            edge = 1.0
        v *= max(edge, EDGE_FLOOR)
    return v


def iou(a, b, g_lo, g_hi, dims):
    m_lo = [min(p, q) for p, q in zip(a[0], b[0])]
    m_hi = [max(p, q) for p, q in zip(a[1], b[1])]
    out = []
    for idx in _channels(dims):
        vm = volume(m_lo, m_hi, g_lo, g_hi, idx)
        out.append((volume(a[0], a[1], g_lo, g_hi, idx) + volume(b[0], b[1], g_lo, g_hi, idx)) / vm)
    return out


def group(nodes, J, g_lo, g_hi, dims, rho, tau):
    best = None
    for j in range(len(nodes)):
        if j == J:
            continue
        dmax = max(pair_distance(nodes[J], nodes[j], g_lo, g_hi, dims))
        if not dmax < 1 - rho:
            continue
        if not all(v > tau for v in iou(nodes[J], nodes[j], g_lo, g_hi, dims)):
            continue
        m_lo = [min(p, q) for p, q in zip(nodes[J][0], nodes[j][0])]
        m_hi = [max(p, q) for p, q in zip(nodes[J][1], nodes[j][1])]
        if not all(h - l <= (gh - gl) * (1 - rho)
                   for l, h, gl, gh in zip(m_lo, m_hi, g_lo, g_hi)):
            continue
        if best is None or dmax < best[0]:
            best = (dmax, j, m_lo, m_hi)
    if best is None:
        return J
    _, j, m_lo, m_hi = best
    keep, drop = min(J, j), max(J, j)
    nodes[keep] = [m_lo, m_hi]
    del nodes[drop]
    return keep


# -- metrics -----------------------------------------------------------------

def dbi(points, labels) -> float:
    groups = {}
    for p, l in zip(points, labels):
        groups.setdefault(l, []).append([float(v) for v in p])
    cents, scat = [], []
    for members in groups.values():
        mu = [sum(col) / len(members) for col in zip(*members)]
        cents.append(mu)
        scat.append(sum(math.dist(p, mu) for p in members) / len(members))
    K = len(cents)
    total = 0.0
    for i in range(K):
        worst = 0.0
        for j in range(K):
            if i != j:
                d = math.dist(cents[i], cents[j])
                r = math.inf if d == 0 else (scat[i] + scat[j]) / d
                worst = max(worst, r)
        total += worst
    return total / K


def purity(pred, truth) -> float:
    total = 0
    for w in set(pred):
        counts = {}
        for p, t in zip(pred, truth):
            if p == w:
                counts[t] = counts.get(t, 0) + 1
        total += max(counts.values())
    return total / len(pred)


def nmi(pred, truth) -> float:
    n = len(pred)

    def H(lab):
        return -sum(c / n * math.log(c / n) for c in (lab.count(v) for v in set(lab)))

    mi = 0.0
    for w in set(pred):
        for c in set(truth):
            nwc = sum(1 for p, t in zip(pred, truth) if p == w and t == c)
            if nwc:
                mi += nwc / n * math.log(n * nwc / (pred.count(w) * truth.count(c)))
    hp, ht = H(list(pred)), H(list(truth))
    if hp + ht == 0:
        return 1.0
    return 2 * mi / (hp + ht)


def combined(dbis, cps, nmis, cap=1e6) -> float:
    def xi(v):
        mu = sum(v) / len(v)
        sd = math.sqrt(sum((a - mu) ** 2 for a in v) / len(v))
        return cap if sd == 0 else min(1 / sd, cap)

    mean = lambda v: sum(v) / len(v)  # noqa: E731
    return (xi(dbis) * mean(dbis) + xi(cps) * (1 - mean(cps))
            + xi(nmis) * (1 - mean(nmis)))


# -- k-means -----------------------------------------------------------------

def best_two_partition(points):
    """Exhaustive minimum-inertia split of 1-D points into two groups."""
    n = len(points)
    best = None
    for mask in range(1, 2 ** n - 1):
        a = [p for i, p in enumerate(points) if mask >> i & 1]
        b = [p for i, p in enumerate(points) if not mask >> i & 1]
        ca, cb = sum(a) / len(a), sum(b) / len(b)
        cost = sum((p - ca) ** 2 for p in a) + sum((p - cb) ** 2 for p in b)
        if best is None or cost < best[0]:
            best = (cost, sorted([ca, cb]))
    return best


# -- frozen values -----------------------------------------------------------

def compute_frozen() -> dict:
    out = {}
    out["distance_x21"] = float(box_distance_enum((2, 1), (0, 0), (1, 1)))
    out["distance_xm1m1"] = float(box_distance_enum((-1, -1), (0, 0), (1, 1)))
    out["global_update"] = [[0.0, -1.0], [2.0, 1.0]]  # elementwise min/max by hand
    out["activation_x21"] = activation((2, 1), (0, 0), (1, 1), (0, 0), (1, 1), [2], [1.0])
    out["activation_x21_scaled"] = activation(
        (2e5, 1e5), (0, 0), (1e5, 1e5), (0, 0), (1e5, 1e5), [2], [1.0])
    out["resonance_07_02"] = resonance((0.7, 0.2), (0.2, 0.2), (0.2, 0.2), (0, 0), (1, 1), [2])
    out["learn_half"] = list(map(list, _mix([0, 0], [1, 1], [2, 0.5], 0.5)))
    out["pair_distance_1d"] = pair_distance(
        [[0.0], [1.0]], [[3.0], [5.0]], [0.0], [10.0], [1])[0]
    out["iou_far_squares"] = iou(
        [[0, 0], [1, 1]], [[9, 9], [10, 10]], [0, 0], [10, 10], [2])[0]
    out["iou_overlap"] = iou(
        [[0, 0], [2, 1]], [[1, 0], [3, 1]], [0, 0], [10, 10], [2])[0]
    out["point_volume_2d"] = volume([0.5, 0.5], [0.5, 0.5], [0, 0], [1, 1], range(2))
    cost, cents = best_two_partition([0.0, 0.1, 10.0, 10.1])
    out["kmeans_two_partition"] = {"inertia": cost, "centroids": cents}
    out["dbi_two_pairs"] = dbi([[0], [2], [10], [12]], [0, 0, 1, 1])
    out["nmi_parity_vs_half"] = nmi([0, 1, 0, 1], [0, 0, 1, 1])
    out["purity_one_cluster"] = purity([0, 0, 0, 0], [0, 0, 1, 1])
    out["combined_example"] = combined([1.0, 1.2], [0.8, 0.9], [0.2, 0.3])
    out["two_far_points"] = run_network([[0, 0], [50, 50], [100, 100]], [2])[0]
    return out


if __name__ == "__main__":
    FROZEN.write_text(json.dumps(compute_frozen(), indent=1) + "\n")
    print(f"wrote {FROZEN}")
