"""Node grouping: merge the just-updated node with one neighbour per step.

A pair is grouped when it passes three gates, checked in order and each in
every channel before the next is evaluated:

* distance: the largest per-channel corner gap, normalized by the global
  diagonal, is below ``1 - rho``;
* IoU: ``(V_a + V_b) / V_merged`` exceeds ``tau`` in every channel;
* size: every edge of the merged box is at most ``M * (1 - rho)``.

Volumes are products of diagonal-normalized edges with each edge floored at
``EDGE_FLOOR`` so that fresh point nodes do not have zero volume.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ChannelSpec, Hyperbox, safe_ratio

EDGE_FLOOR = 1e-6


@dataclass
class GroupingDecision:
    """Outcome of comparing node ``J`` with one other node.

    Criteria that were not reached because an earlier gate failed are None.
    """

    other: int
    distance: bool
    iou: Optional[bool] = None
    size: Optional[bool] = None
    max_norm_distance: float = float("nan")
    iou_value: Optional[np.ndarray] = None

    @property
    def accepted(self) -> bool:
        return bool(self.distance and self.iou and self.size)


def _spec_for(box: Hyperbox, spec: Optional[ChannelSpec]) -> ChannelSpec:
    return spec if spec is not None else ChannelSpec.single(box.lower.size)


def _pair_gaps(a_lo, a_hi, b_lo, b_hi, diag, spec: ChannelSpec) -> np.ndarray:
    """Normalized corner gaps, reduced to one value per channel.

    ``b_lo``/``b_hi`` may carry a leading batch axis.
    """
    lower_gap = np.minimum(np.abs(a_lo - b_lo), np.abs(a_hi - b_lo))
    upper_gap = np.minimum(np.abs(a_hi - b_hi), np.abs(a_lo - b_hi))
    gaps = np.minimum(safe_ratio(lower_gap, diag), safe_ratio(upper_gap, diag))
    return spec.channel_min(gaps)


def pair_distance(a: Hyperbox, b: Hyperbox, diag, spec: ChannelSpec = None):
    """Per-channel normalized distance between two boxes, and its maximum."""
    spec = _spec_for(a, spec)
    per_channel = _pair_gaps(a.lower, a.upper, b.lower, b.upper, np.asarray(diag, float), spec)
    return per_channel, float(per_channel.max())


def distance_criterion(dmax: float, rho: float) -> bool:
    return bool(dmax < 1.0 - rho)


def merge_hypothesis(a: Hyperbox, b: Hyperbox) -> Hyperbox:
    return Hyperbox(np.minimum(a.lower, b.lower), np.maximum(a.upper, b.upper))


def normalized_edges(lower, upper, diag) -> np.ndarray:
    """Edges divided by the global diagonal, floored at EDGE_FLOOR."""
    edges = safe_ratio(np.asarray(upper, float) - np.asarray(lower, float), diag)
    # a positive edge along a zero-width global dimension counts as full width
    edges = np.where(np.isinf(edges), 1.0, edges)
    return np.maximum(edges, EDGE_FLOOR)


def volume(edges) -> float:
    """Product of (already normalized) edge lengths, each floored at EDGE_FLOOR."""
    return float(np.prod(np.maximum(np.asarray(edges, dtype=float), EDGE_FLOOR)))


def _log_volume(lower, upper, diag, spec: ChannelSpec) -> np.ndarray:
    return spec.channel_sum(np.log(normalized_edges(lower, upper, diag)))


def _iou(a_lo, a_hi, b_lo, b_hi, diag, spec: ChannelSpec) -> np.ndarray:
    m_lo = np.minimum(a_lo, b_lo)
    m_hi = np.maximum(a_hi, b_hi)
    log_m = _log_volume(m_lo, m_hi, diag, spec)
    return np.exp(_log_volume(a_lo, a_hi, diag, spec) - log_m) + np.exp(
        _log_volume(b_lo, b_hi, diag, spec) - log_m
    )


def iou_criterion(a: Hyperbox, b: Hyperbox, tau: float, diag, spec: ChannelSpec = None):
    """Return (passes, per-channel IoU).  Passing needs IoU > tau in all channels."""
    spec = _spec_for(a, spec)
    value = _iou(a.lower, a.upper, b.lower, b.upper, np.asarray(diag, float), spec)
    return bool(np.all(value > tau)), value


def _within_size(edges, diag, rho) -> np.ndarray:
    # compared as a ratio so that a common rescaling cannot flip the outcome
    return np.all(safe_ratio(edges, diag) <= 1.0 - rho, axis=-1)


def size_criterion(merged: Hyperbox, diag, rho: float) -> bool:
    """True iff every merged edge is at most ``M * (1 - rho)``."""
    return bool(_within_size(merged.edges(), np.asarray(diag, dtype=float), rho))


def try_group(state, J: int, trace: Optional[list] = None) -> Optional[int]:
    """Merge node ``J`` with its closest qualifying neighbour, if any.

    The merged node takes the smaller of the two indices and the other one is
    removed.  Returns the merged node's index or None.  When ``trace`` is a
    list, one GroupingDecision per compared node is appended to it.
    """
    h = state.n_nodes
    if h < 2:
        return None
    spec = state.spec
    rho, tau = state.params.rho, state.params.tau
    diag = state.diagonal
    lower, upper = state.lower, state.upper
    a_lo, a_hi = lower[J], upper[J]

    others = np.delete(np.arange(h), J)
    o_lo, o_hi = lower[others], upper[others]
    dmax = _pair_gaps(a_lo, a_hi, o_lo, o_hi, diag, spec).max(axis=1)
    passed_d = dmax < 1.0 - rho

    cand = np.flatnonzero(passed_d)
    iou = np.empty((0, spec.n_channels))
    passed_iou = np.zeros(0, dtype=bool)
    passed_size = np.zeros(0, dtype=bool)
    if cand.size:
        iou = _iou(a_lo, a_hi, o_lo[cand], o_hi[cand], diag, spec)
        passed_iou = np.all(iou > tau, axis=1)
        size_idx = cand[passed_iou]
        if size_idx.size:
            m_lo = np.minimum(a_lo, o_lo[size_idx])
            m_hi = np.maximum(a_hi, o_hi[size_idx])
            passed_size = _within_size(m_hi - m_lo, diag, rho)

    if trace is not None:
        _record(trace, others, dmax, passed_d, cand, iou, passed_iou, passed_size)

    if not passed_size.any():
        return None
    winners = cand[passed_iou][passed_size]
    best = winners[np.argmin(dmax[winners])]  # argmin keeps the lowest index on ties
    j = int(others[best])

    keep, drop = min(J, j), max(J, j)
    merged = merge_hypothesis(state.node(J), state.node(j))
    state.set_node(keep, merged)
    state.remove_node(drop)
    return keep


def _record(trace, others, dmax, passed_d, cand, iou, passed_iou, passed_size):
    iou_pos = {int(c): n for n, c in enumerate(cand)}
    size_pos = {int(c): n for n, c in enumerate(cand[passed_iou])}
    for pos, j in enumerate(others):
        dec = GroupingDecision(int(j), bool(passed_d[pos]), max_norm_distance=float(dmax[pos]))
        if pos in iou_pos:
            n = iou_pos[pos]
            dec.iou = bool(passed_iou[n])
            dec.iou_value = iou[n]
        if pos in size_pos:
            dec.size = bool(passed_size[size_pos[pos]])
        trace.append(dec)
