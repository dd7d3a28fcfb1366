"""Seeded simulation of the averaging process and its two companions.

* averaging process: pick an edge uniformly, replace both endpoint values by
  their mean;
* slowed pair process: pick a node pair uniformly out of all n(n-1)/2 pairs
  and average only if the pair is an edge;
* splitting process on the cycle (PC2), which keeps every sequence
  non-increasing by splitting it in two when the wrap-around edge would
  break monotonicity.

Single trajectories go through :func:`run`; Monte Carlo estimators use
:class:`Ensemble`, which advances many trials in lockstep.  Row ``k`` of an
ensemble follows exactly the trajectory that :func:`run` produces with the
same stream, because draws do not depend on chunking.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .functionals import augmented_entropy, distance, entropy, is_probability
from .graphs import Graph
from .rng import RngStream
from .spectral import spectral_summary

CHUNK = 4096
MAX_SPLIT_SEQUENCES = 1_000_000
KERNELS = ("average", "slowed")


@dataclass
class StateVector:
    """Node values ``v(t)`` together with the conserved mean and step count."""

    values: np.ndarray
    mean: float
    step: int = 0

    @classmethod
    def from_values(cls, values, step: int = 0) -> "StateVector":
        v = np.array(values, dtype=np.float64, copy=True)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("state must be a finite 1-d vector")
        return cls(v, math.fsum(v) / v.size, step)

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.mean, self.step)

    @property
    def n(self) -> int:
        return self.values.size


# ---------------------------------------------------------------- initial states


def signed_split(g: Graph) -> np.ndarray:
    """Unit-L2, zero-sum vector with +1/-1 halves.

    Star and binary tree keep the center/root at 0 (and, for a star with an odd
    number of leaves, the first leaf too); other graphs split the node range in
    halves, leaving the last node at 0 when n is odd.
    """
    n = g.n
    v = np.zeros(n)
    if g.family in ("star", "btree") and n > 2:
        start = 1 if (n - 1) % 2 == 0 else 2
    else:
        start = 0
    free = n - start
    half = free // 2
    v[start : start + half] = 1.0
    v[start + half : start + 2 * half] = -1.0
    return v / math.sqrt(2 * half)


def init_state(g: Graph, spec: str) -> StateVector:
    """Initial state from an init spec.

    ``corner:i`` | ``vector:path`` | ``fiedler`` | ``fiedler-l1`` | ``signed-split``
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "corner":
        try:
            i = int(arg)
        except ValueError:
            raise ValueError(f"bad corner index {arg!r}") from None
        if not 0 <= i < g.n:
            raise ValueError(f"corner index {i} out of range for n={g.n}")
        v = np.zeros(g.n)
        v[i] = 1.0
    elif kind == "vector":
        v = _read_vector(Path(arg))
        if v.size != g.n:
            raise ValueError(f"vector file has {v.size} entries, graph has {g.n} nodes")
    elif kind == "fiedler":
        v = spectral_summary(g).fiedler.copy()
    elif kind == "fiedler-l1":
        u = spectral_summary(g).fiedler
        v = u / np.sum(np.abs(u))
    elif kind == "signed-split":
        v = signed_split(g)
    else:
        raise ValueError(f"unknown init spec {spec!r}")
    return StateVector.from_values(v)


def _read_vector(path: Path) -> np.ndarray:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read vector file {path}: {exc}") from exc
    vals = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        for tok in line.replace(",", " ").split():
            try:
                vals.append(float(tok))
            except ValueError:
                raise ValueError(f"non-numeric token {tok!r} in {path}") from None
    v = np.array(vals)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector file contains non-finite values")
    return v


# ---------------------------------------------------------------- kernels


@lru_cache(maxsize=None)
def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    return i.astype(np.int64), j.astype(np.int64)


def _endpoint_tables(g: Graph, kernel: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-draw endpoint tables; idle pairs map to ``(i, i)``."""
    if kernel == "average":
        return g.ei, g.ej, g.m
    if kernel == "slowed":
        pi, pj = _pairs(g.n)
        idle = g.edge_ids[pi, pj] < 0
        return pi, np.where(idle, pi, pj), len(pi)
    raise ValueError(f"unknown kernel {kernel!r}")


def _average(v: np.ndarray, i: int, j: int) -> None:
    m = (v[i] + v[j]) * 0.5
    v[i] = m
    v[j] = m


def step_average(s: StateVector, g: Graph, r: RngStream) -> tuple[StateVector, tuple[int, int]]:
    """One averaging step on a uniformly drawn edge; returns a new state."""
    k = r.integers(g.m)
    i, j = int(g.ei[k]), int(g.ej[k])
    out = StateVector(s.values.copy(), s.mean, s.step + 1)
    _average(out.values, i, j)
    return out, (i, j)


def step_slowed(s: StateVector, g: Graph, r: RngStream) -> tuple[StateVector, tuple[int, int], bool]:
    """One step of the slowed process: a uniform node pair, averaged only
    when it is an edge."""
    pi, pj = _pairs(g.n)
    k = r.integers(len(pi))
    i, j = int(pi[k]), int(pj[k])
    out = StateVector(s.values.copy(), s.mean, s.step + 1)
    acted = g.has_edge(i, j)
    if acted:
        _average(out.values, i, j)
    return out, (i, j), acted


Observer = Callable[[int, StateVector, tuple], None]


def run(
    s: StateVector,
    g: Graph,
    steps: int,
    r: RngStream,
    observer: Observer | None = None,
    kernel: str = "average",
) -> StateVector:
    """Apply ``steps`` steps of ``kernel`` and return the final state.

    ``observer(t, state, edge)`` is called after every step with the live
    state (copy it to keep it); an exception raised by the observer aborts the
    run and propagates.  For the slowed kernel ``edge`` is the drawn pair, or
    ``None`` when the pair is not an edge.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    I, J, m = _endpoint_tables(g, kernel)
    state = s.copy()
    v = state.values
    done = 0
    while done < steps:
        k = min(CHUNK, steps - done)
        idx = r.integers(m, k)
        ii = I[idx].tolist()
        jj = J[idx].tolist()
        for a, b in zip(ii, jj):
            if a != b:
                mid = (v[a] + v[b]) * 0.5
                v[a] = mid
                v[b] = mid
            state.step += 1
            if observer is not None:
                observer(state.step, state, (a, b) if a != b else None)
        done += k
    return state


def trajectory(s: StateVector, g: Graph, steps: int, r: RngStream, kernel: str = "average"):
    """Every state of a run as an array of shape ``(steps + 1, n)`` plus the
    ``(steps, 2)`` array of chosen endpoints (``i == j`` marks an idle step)."""
    I, J, m = _endpoint_tables(g, kernel)
    idx = r.integers(m, steps) if steps else np.zeros(0, dtype=np.int64)
    ii, jj = I[idx], J[idx]
    out = np.empty((steps + 1, g.n))
    v = s.values.copy()
    out[0] = v
    for t, (a, b) in enumerate(zip(ii.tolist(), jj.tolist()), start=1):
        mid = (v[a] + v[b]) * 0.5
        v[a] = mid
        v[b] = mid
        out[t] = v
    return out, np.stack([ii, jj], axis=1)


class Ensemble:
    """Independent trials advanced in lockstep.

    ``values`` has shape ``(trials, n)``; trial ``k`` draws from
    ``streams[k]`` only.
    """

    def __init__(self, g: Graph, v0, streams: list[RngStream], kernel: str = "average"):
        self.g = g
        self.streams = streams
        self.kernel = kernel
        self._I, self._J, self._m = _endpoint_tables(g, kernel)
        v0 = np.asarray(getattr(v0, "values", v0), dtype=np.float64)
        if v0.ndim == 1:
            v0 = np.broadcast_to(v0, (len(streams), g.n))
        if v0.shape != (len(streams), g.n):
            raise ValueError("initial states do not match trials x nodes")
        self.values = np.array(v0, dtype=np.float64, order="C", copy=True)
        self.means = self.values.mean(axis=1)
        self.step = 0

    @property
    def trials(self) -> int:
        return len(self.streams)

    def advance(self, steps: int, monitor: Callable[[int, "Ensemble"], None] | None = None) -> None:
        """Advance every trial by ``steps``; ``monitor(t, self)`` runs after
        each step when given."""
        n = self.g.n
        T = self.trials
        flat = self.values.reshape(-1)
        base = (np.arange(T, dtype=np.int64) * n)[:, None]
        done = 0
        while done < steps:
            k = min(CHUNK, steps - done)
            idx = np.stack([st.integers(self._m, k) for st in self.streams])
            FI = np.ascontiguousarray((base + self._I[idx]).T)
            FJ = np.ascontiguousarray((base + self._J[idx]).T)
            for s in range(k):
                fi, fj = FI[s], FJ[s]
                mid = (flat[fi] + flat[fj]) * 0.5
                flat[fi] = mid
                flat[fj] = mid
                if monitor is not None:
                    self.step += 1
                    monitor(self.step, self)
            done += k
        if monitor is None:
            self.step += steps

    def l1(self) -> np.ndarray:
        return np.abs(self.values - self.means[:, None]).sum(axis=1)

    def l2sq(self) -> np.ndarray:
        d = self.values - self.means[:, None]
        return np.einsum("ij,ij->i", d, d)

    def statistic(self, q: int) -> np.ndarray:
        """Per-trial ``||v - vbar||_q^q``."""
        if q == 1:
            return self.l1()
        if q == 2:
            return self.l2sq()
        raise ValueError("q must be 1 or 2")


# ---------------------------------------------------------------- trajectory dump


class TrajectoryRecorder:
    """Observer that records norms and entropies every ``stride`` steps.

    Entropy columns are NaN when the state is not a probability vector.
    """

    header = ("t", "norm_l1", "norm_l2sq", "entropy", "aug_entropy")

    def __init__(self, beta=None, stride: int = 1):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self.beta = None if beta is None else np.asarray(beta, dtype=np.float64)
        self.stride = stride
        self.rows: list[tuple] = []

    def record(self, t: int, state: StateVector) -> None:
        l1, _ = distance(state, 1)
        l2sq, _ = distance(state, 2)
        if is_probability(state):
            S = entropy(state)
            F = augmented_entropy(state, self.beta) if self.beta is not None else math.nan
        else:
            S = F = math.nan
        self.rows.append((t, l1, l2sq, S, F))

    def __call__(self, t: int, state: StateVector, edge) -> None:
        if t % self.stride == 0:
            self.record(t, state)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.header)
            for t, *vals in self.rows:
                w.writerow([t] + [repr(float(x)) for x in vals])


# ---------------------------------------------------------------- splitting process


@dataclass
class SplitSystem:
    """Live sequences of the splitting process on the cycle ``C_n``.

    Each row of ``sequences`` is non-increasing and non-negative.  All-zero
    rows are dropped; constant rows are fixed points and are pooled into one.
    """

    sequences: np.ndarray
    step: int = 0
    _mass0: float = field(default=0.0, repr=False)

    @classmethod
    def start(cls, v) -> "SplitSystem":
        v = np.array(v, dtype=np.float64).reshape(1, -1)
        _check_monotone(v)
        return cls(v, 0, math.fsum(v.ravel()))

    @property
    def n(self) -> int:
        return self.sequences.shape[1]

    @property
    def count(self) -> int:
        return self.sequences.shape[0]


class MonotonicityError(AssertionError):
    pass


def _check_monotone(seqs: np.ndarray) -> None:
    if np.any(seqs < 0) or np.any(np.diff(seqs, axis=1) > 0):
        raise MonotonicityError("split sequence is not non-increasing and non-negative")


def pc2_apply(seq: np.ndarray, e: int) -> list[np.ndarray]:
    """Apply cycle edge ``e`` (``e = n-1`` is the wrap-around edge between the
    last and first position) to one non-increasing sequence."""
    n = seq.size
    v = seq.copy()
    if e < n - 1:
        _average(v, e, e + 1)
        return [v]
    a = (seq[0] + seq[-1]) * 0.5
    if n == 2 or a >= seq[1]:
        out = np.empty(n)
        out[0] = a
        out[1] = a
        out[2:] = seq[1 : n - 1]
        return [out]
    k = int(np.nonzero(seq > a)[0].max())  # largest index above the average, k >= 1
    first = np.empty(n)
    first[: k + 2] = a
    first[k + 2 :] = seq[k + 1 : n - 1]
    second = np.zeros(n)
    second[:k] = seq[1 : k + 1] - a
    return [first, second]


def split_step(sys: SplitSystem, n: int, r: RngStream) -> SplitSystem:
    """One step of the splitting process: every live sequence independently
    draws a cycle edge and is updated (possibly splitting in two).

    The number of live sequences grows roughly geometrically (about 2x every
    n steps from a corner), so long runs are only practical for small t.
    """
    seqs = sys.sequences
    if seqs.shape[1] != n:
        raise ValueError("sequence length does not match n")
    N = seqs.shape[0]
    e = r.integers(n, N)
    out = seqs.copy()
    inner = e < n - 1
    if inner.any():
        rows = np.nonzero(inner)[0]
        cols = e[rows]
        mid = (out[rows, cols] + out[rows, cols + 1]) * 0.5
        out[rows, cols] = mid
        out[rows, cols + 1] = mid
    extra = []
    for row in np.nonzero(~inner)[0]:
        parts = pc2_apply(seqs[row], n - 1)
        out[row] = parts[0]
        extra.extend(parts[1:])
    if extra:
        out = np.vstack([out] + extra)
        if len(out) > MAX_SPLIT_SEQUENCES:
            raise RuntimeError(f"splitting process exceeded {MAX_SPLIT_SEQUENCES} live sequences")
    _check_monotone(out)
    out = _compact(out)
    return SplitSystem(out, sys.step + 1, sys._mass0)


def _compact(seqs: np.ndarray) -> np.ndarray:
    const = seqs[:, 0] == seqs[:, -1]
    nconst = int(const.sum())
    if nconst == 0 or (nconst == 1 and seqs[const][0, 0] > 0):
        return seqs
    pooled = seqs[const].sum(axis=0)
    keep = seqs[~const]
    if pooled[0] > 0:
        keep = np.vstack([keep, pooled[None, :]])
    return keep if len(keep) else np.zeros((1, seqs.shape[1]))


def split_aggregate(sys: SplitSystem) -> np.ndarray:
    """Componentwise sum of all live sequences."""
    return sys.sequences.sum(axis=0)


def split_distance(sys: SplitSystem) -> float:
    """Sum over sequences of each sequence's L1 distance to its own mean."""
    s = sys.sequences
    return float(np.abs(s - s.mean(axis=1, keepdims=True)).sum())
