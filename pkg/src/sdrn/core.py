"""Stabilized developmental resonance network: data model and learning step.

Every category node is an axis-aligned hyperbox stored as a pair of corner
vectors.  Inputs may be split into several channels; all per-element work is
done on the flat concatenation and reduced per channel where needed.

Distances are normalized element-wise by the diagonal of a running global
bounding box, which makes the whole pipeline invariant to a positive
per-dimension rescaling of the input stream.  Without the normalization the
exponential choice function underflows once raw distances reach a few
hundred, and node selection degenerates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class InputError(ValueError):
    """Input does not match the network's channel layout or is not finite."""


@dataclass(frozen=True)
class ChannelSpec:
    """Dimensions of each input channel."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise InputError("at least one channel is required")
        if any(d < 1 for d in dims):
            raise InputError(f"channel dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def single(cls, dim: int) -> "ChannelSpec":
        return cls((dim,))

    @property
    def n_channels(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def starts(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.dims)[:-1]]).astype(np.intp)

    @property
    def sizes(self) -> np.ndarray:
        return np.asarray(self.dims, dtype=float)

    def slices(self) -> list[slice]:
        out, start = [], 0
        for d in self.dims:
            out.append(slice(start, start + d))
            start += d
        return out

    def split(self, x) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        return [x[..., s] for s in self.slices()]

    def join(self, channels: Sequence) -> np.ndarray:
        parts = [np.atleast_1d(np.asarray(c, dtype=float)) for c in channels]
        if len(parts) != self.n_channels or any(
            p.shape[-1] != d for p, d in zip(parts, self.dims)
        ):
            raise InputError(
                f"expected channels of sizes {self.dims}, got "
                f"{[p.shape[-1] for p in parts]}"
            )
        return np.concatenate(parts, axis=-1)

    def channel_sum(self, a: np.ndarray) -> np.ndarray:
        """Sum the last axis within each channel: (..., z) -> (..., c)."""
        if self.n_channels == 1:
            return a.sum(axis=-1, keepdims=True)
        return np.add.reduceat(a, self.starts, axis=-1)

    def channel_min(self, a: np.ndarray) -> np.ndarray:
        if self.n_channels == 1:
            return a.min(axis=-1, keepdims=True)
        return np.minimum.reduceat(a, self.starts, axis=-1)

    def channel_max(self, a: np.ndarray) -> np.ndarray:
        if self.n_channels == 1:
            return a.max(axis=-1, keepdims=True)
        return np.maximum.reduceat(a, self.starts, axis=-1)

    @classmethod
    def parse(cls, text: str) -> "ChannelSpec":
        """Parse a comma separated list such as ``"2,3"``."""
        try:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise InputError(f"bad channel list {text!r}") from exc


@dataclass
class Hyperparams:
    """Network hyperparameters.

    ``rho`` is the vigilance, ``tau`` the IoU threshold used by node grouping,
    ``alpha`` the slope of the choice function, ``gamma`` the per-channel
    contribution weights (uniform when omitted), ``lr`` the template learning
    rate and ``glr`` the learning rate of the global bounding box.  ``lr`` and
    ``glr`` accept either one shared value or one value per channel.
    """

    rho: float = 0.5
    tau: float = 0.85
    alpha: float = 1.0
    gamma: Optional[Sequence[float]] = None
    lr: float | Sequence[float] = 1.0
    glr: float | Sequence[float] = 1.0

    def validate(self, spec: ChannelSpec) -> None:
        if not 0.0 <= self.rho <= 1.0:
            raise InputError(f"rho must lie in [0, 1], got {self.rho}")
        if not 0.0 <= self.tau <= 2.0:
            raise InputError(f"tau must lie in [0, 2], got {self.tau}")
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise InputError(f"alpha must be positive, got {self.alpha}")
        gamma = self.gamma_vector(spec)
        if np.any(gamma < 0) or abs(gamma.sum() - 1.0) > 1e-9:
            raise InputError(f"gamma must be nonnegative and sum to 1, got {gamma}")
        for name in ("lr", "glr"):
            rate = self._per_channel(getattr(self, name), spec)
            if np.any(rate <= 0) or np.any(rate > 1):
                raise InputError(f"{name} must lie in (0, 1], got {getattr(self, name)}")

    def gamma_vector(self, spec: ChannelSpec) -> np.ndarray:
        if self.gamma is None:
            return np.full(spec.n_channels, 1.0 / spec.n_channels)
        gamma = np.asarray(self.gamma, dtype=float).ravel()
        if gamma.size != spec.n_channels:
            raise InputError(
                f"gamma needs {spec.n_channels} entries, got {gamma.size}"
            )
        return gamma

    @staticmethod
    def _per_channel(value, spec: ChannelSpec) -> np.ndarray:
        arr = np.asarray(value, dtype=float).ravel()
        if arr.size == 1:
            return np.full(spec.n_channels, arr[0])
        if arr.size != spec.n_channels:
            raise InputError(f"expected 1 or {spec.n_channels} rates, got {arr.size}")
        return arr

    def element_rate(self, name: str, spec: ChannelSpec) -> np.ndarray | float:
        """Learning rate expanded to one value per input element."""
        rate = self._per_channel(getattr(self, name), spec)
        if np.all(rate == rate[0]):
            return float(rate[0])
        return np.repeat(rate, spec.dims)


@dataclass
class Hyperbox:
    """A node weight: lower and upper corners over the flat input vector."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.array(self.lower, dtype=float)
        self.upper = np.array(self.upper, dtype=float)

    @classmethod
    def point(cls, x) -> "Hyperbox":
        return cls(x, x)

    def edges(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lower <= x) and np.all(x <= self.upper))

    def channel(self, spec: ChannelSpec, k: int) -> tuple[np.ndarray, np.ndarray]:
        s = spec.slices()[k]
        return self.lower[s], self.upper[s]

    def __eq__(self, other):
        if not isinstance(other, Hyperbox):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )


def elementwise_distance(x, lower, upper) -> np.ndarray:
    """Per-element gap between ``x`` and a box; zero inside the box."""
    x = np.asarray(x, dtype=float)
    return np.maximum(np.maximum(lower - x, x - upper), 0.0)


def distance_to_box(x, lower, upper) -> float:
    """L1 distance from a point to an axis-aligned box."""
    x = np.asarray(x, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if x.shape != lower.shape or x.shape != upper.shape:
        raise InputError(f"shape mismatch: {x.shape} vs {lower.shape}/{upper.shape}")
    return float(elementwise_distance(x, lower, upper).sum())


def safe_ratio(num: np.ndarray, diag: np.ndarray) -> np.ndarray:
    """``num / diag`` for nonnegative ``num``.

    Where the diagonal is zero, a zero numerator counts as a perfect match
    (0) and any positive numerator as an unbounded mismatch (inf).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / diag
    flat = diag == 0
    if np.any(flat):
        out = np.where(flat, np.where(num > 0, np.inf, 0.0), out)
    return out


def learn_template(box: Hyperbox, x, lr: float | np.ndarray = 1.0) -> Hyperbox:
    """Move a box toward its hull with ``x``; ``lr = 1`` gives the exact hull."""
    x = np.asarray(x, dtype=float)
    lower, upper = _interpolate(box.lower, box.upper, x, lr)
    return Hyperbox(lower, upper)


def _interpolate(lower, upper, x, rate):
    hull_lo = np.minimum(x, lower)
    hull_hi = np.maximum(x, upper)
    if np.isscalar(rate) and rate == 1.0:
        return hull_lo, hull_hi
    new_lo = (1.0 - rate) * lower + rate * hull_lo
    new_hi = (1.0 - rate) * upper + rate * hull_hi
    # rounding must not invert a box
    return np.minimum(new_lo, new_hi), np.maximum(new_lo, new_hi)


@dataclass
class GlobalBound:
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    @property
    def initialized(self) -> bool:
        return self.lower is not None

    @property
    def diagonal(self) -> np.ndarray:
        if self.lower is None:
            raise RuntimeError("global bound is not initialized")
        return self.upper - self.lower

    def box(self) -> Hyperbox:
        return Hyperbox(self.lower, self.upper)


class SDRN:
    """Online incremental clustering network with hyperbox category nodes.

    >>> net = SDRN(2)
    >>> [net.train_step(x) for x in ([0, 0], [10, 10], [1, 1], [9, 9])]
    [0, 1, 0, 1]

    Parameters
    ----------
    channels : int, ChannelSpec or sequence of ints
        Layout of the input vector.  An int means a single channel.
    params : Hyperparams, optional
    grouping : bool
        Run node grouping after every step.
    normalized : bool
        Use the scale-free activation (distances divided by the global
        diagonal).  ``False`` gives the raw exponential choice function.
    """

    def __init__(
        self,
        channels,
        params: Optional[Hyperparams] = None,
        grouping: bool = True,
        normalized: bool = True,
    ):
        if isinstance(channels, ChannelSpec):
            self.spec = channels
        elif np.isscalar(channels):
            self.spec = ChannelSpec.single(int(channels))
        else:
            self.spec = ChannelSpec(tuple(channels))
        self.params = params if params is not None else Hyperparams()
        self.params.validate(self.spec)
        self.grouping_enabled = grouping
        self.normalized = normalized
        self.global_bound = GlobalBound()
        self.step_count = 0
        self.merge_count = 0
        z = self.spec.total_dim
        self._lower = np.empty((16, z))
        self._upper = np.empty((16, z))
        self._h = 0
        self._gamma = self.params.gamma_vector(self.spec)
        self._lr = self.params.element_rate("lr", self.spec)
        self._glr = self.params.element_rate("glr", self.spec)

    # ------------------------------------------------------------------
    # node storage

    @property
    def n_nodes(self) -> int:
        return self._h

    def __len__(self):
        return self._h

    @property
    def lower(self) -> np.ndarray:
        """Lower corners of all nodes, shape (h, z).  A view; do not mutate."""
        return self._lower[: self._h]

    @property
    def upper(self) -> np.ndarray:
        return self._upper[: self._h]

    @property
    def nodes(self) -> list[Hyperbox]:
        return [Hyperbox(lo, hi) for lo, hi in zip(self.lower, self.upper)]

    def node(self, j: int) -> Hyperbox:
        self._check_index(j)
        return Hyperbox(self._lower[j], self._upper[j])

    def set_node(self, j: int, box: Hyperbox) -> None:
        self._check_index(j)
        self._lower[j] = box.lower
        self._upper[j] = box.upper

    def remove_node(self, j: int) -> None:
        self._check_index(j)
        h = self._h
        self._lower[j : h - 1] = self._lower[j + 1 : h]
        self._upper[j : h - 1] = self._upper[j + 1 : h]
        self._h -= 1

    def _append(self, lower, upper) -> int:
        if self._h == self._lower.shape[0]:
            cap = 2 * self._lower.shape[0]
            for name in ("_lower", "_upper"):
                grown = np.empty((cap, self.spec.total_dim))
                grown[: self._h] = getattr(self, name)[: self._h]
                setattr(self, name, grown)
        self._lower[self._h] = lower
        self._upper[self._h] = upper
        self._h += 1
        return self._h - 1

    def _check_index(self, j):
        if not 0 <= j < self._h:
            raise IndexError(f"node {j} does not exist (h={self._h})")

    # ------------------------------------------------------------------
    # input handling

    def as_input(self, x) -> np.ndarray:
        """Validate ``x`` (flat vector or list of channel vectors)."""
        if isinstance(x, (list, tuple)) and x and not np.isscalar(x[0]):
            x = self.spec.join(x)
        x = np.asarray(x, dtype=float)
        if x.shape != (self.spec.total_dim,):
            raise InputError(
                f"expected input of length {self.spec.total_dim}, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise InputError("input contains NaN or infinite values")
        return x

    @property
    def diagonal(self) -> np.ndarray:
        return self.global_bound.diagonal

    # ------------------------------------------------------------------
    # the learning step

    def update_global(self, x) -> GlobalBound:
        x = self.as_input(x)
        gb = self.global_bound
        if not gb.initialized:
            gb.lower, gb.upper = x.copy(), x.copy()
        elif np.any(gb.lower > x) or np.any(x > gb.upper):
            gb.lower, gb.upper = _interpolate(gb.lower, gb.upper, x, self._glr)
        return gb

    def activations(self, x) -> np.ndarray:
        """Activation of every node for input ``x``, shape (h,)."""
        x = self.as_input(x)
        return self._activations(x, self.lower, self.upper)

    def activate(self, x, j: int) -> float:
        self._check_index(j)
        x = self.as_input(x)
        return float(self._activations(x, self._lower[j : j + 1], self._upper[j : j + 1])[0])

    def _activations(self, x, lower, upper) -> np.ndarray:
        gap = np.maximum(np.maximum(lower - x, x - upper), 0.0)
        if self.normalized:
            gap = safe_ratio(gap, self.diagonal)
        dist = self.spec.channel_sum(gap)
        return np.exp(-self.params.alpha * dist) @ self._gamma

    def match(self, x, j: int) -> tuple[np.ndarray, bool]:
        """Per-channel resonance values of node ``j`` and whether it resonates."""
        self._check_index(j)
        x = self.as_input(x)
        span = np.maximum(x, self._upper[j]) - np.minimum(x, self._lower[j])
        ratio = np.clip(safe_ratio(span, self.diagonal), 0.0, 1.0)
        sizes = self.spec.sizes
        m = (sizes - self.spec.channel_sum(ratio)) / sizes
        return m, bool(np.all(m >= self.params.rho))

    def learn(self, j: int, x) -> None:
        self._check_index(j)
        x = self.as_input(x)
        self._lower[j], self._upper[j] = _interpolate(
            self._lower[j], self._upper[j], x, self._lr
        )

    def create_node(self, x) -> int:
        x = self.as_input(x)
        return self._append(x, x)

    def train_step(self, x) -> int:
        """Learn from one input; returns the index of the node now holding it."""
        x = self.as_input(x)
        self.update_global(x)
        if self._h == 0:
            winner = self.create_node(x)
        else:
            winner = int(np.argmax(self._activations(x, self.lower, self.upper)))
            _, ok = self.match(x, winner)
            if ok:
                self.learn(winner, x)
            else:
                winner = self.create_node(x)
        if self.grouping_enabled:
            from .grouping import try_group

            merged = try_group(self, winner)
            if merged is not None:
                winner = merged
                self.merge_count += 1
        self.step_count += 1
        return winner

    def assign(self, x) -> int:
        """Index of the most activated node; does not modify the network."""
        if self._h == 0:
            raise RuntimeError("cannot assign: the network has no nodes")
        x = self.as_input(x)
        return int(np.argmax(self._activations(x, self.lower, self.upper)))

    # ------------------------------------------------------------------
    # batch conveniences

    def fit(self, X) -> "SDRN":
        for x in np.asarray(X, dtype=float):
            self.train_step(x)
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self._h == 0:
            raise RuntimeError("cannot assign: the network has no nodes")
        return np.array([self.assign(x) for x in X], dtype=int)

    def copy(self) -> "SDRN":
        import copy

        return copy.deepcopy(self)

    def __repr__(self):
        return (
            f"SDRN(channels={self.spec.dims}, nodes={self._h}, "
            f"rho={self.params.rho}, grouping={self.grouping_enabled})"
        )
