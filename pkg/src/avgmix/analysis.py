"""Exact drift oracles, Monte Carlo estimators and closed-form bounds.

The Monte Carlo routines report the mixing statistic

    stat_q(t) = (E ||v(t) - vbar||_q^q) ** (1/q)

estimated over independent trials, each trial owning the stream
``RngStream(seed, k)``.  Reductions are done in trial order, so results do not
depend on how work is split between threads.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .functionals import (
    LOG2,
    augmented_entropy,
    check_probability,
    distance,
    entropy,
    xlogx,
)
from .graphs import Graph, make_graph
from .process import (
    Ensemble,
    SplitSystem,
    StateVector,
    _endpoint_tables,
    init_state,
    pc2_apply,
    split_aggregate,
    split_distance,
    split_step,
)
from .rng import RngStream
from .spectral import SpectralSummary, spectral_summary

__all__ = [
    "distance",
    "entropy",
    "augmented_entropy",
    "exact_drift",
    "one_step_expectation",
    "MixingEstimate",
    "estimate_mixing_time",
    "CoveringEstimate",
    "estimate_covering_time",
    "FlowSummary",
    "flow_summary",
    "q_functional",
    "q_expected_decrease",
    "BoundReport",
    "bound_report",
    "CornerSweep",
    "corner_sweep",
    "fannes_check",
    "propagators",
    "pc2_comparison",
    "slowed_comparison",
]

CURVE_HEADER = ("t", "mean", "stderr", "trials")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("AVGMIX_THREADS", "1")))
    except ValueError:
        return 1


def _seed_of(r) -> int:
    return r.seed if isinstance(r, RngStream) else int(r)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    mean = math.fsum(x) / x.size
    if x.size < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2) / (x.size - 1)
    return mean, math.sqrt(var / x.size)


# ---------------------------------------------------------------- exact oracles


def one_step_expectation(g: Graph, v) -> np.ndarray:
    """Average of the |E| equally likely next states (full enumeration)."""
    x = np.asarray(getattr(v, "values", v), dtype=np.float64)
    m = g.m
    out = np.tile(x, (m, 1))
    mid = (x[g.ei] + x[g.ej]) * 0.5
    rows = np.arange(m)
    out[rows, g.ei] = mid
    out[rows, g.ej] = mid
    return out.mean(axis=0)


def edge_changes(g: Graph, v, functional: str, beta=None) -> np.ndarray:
    """Change of ``functional`` for each possible edge choice."""
    x = np.asarray(getattr(v, "values", v), dtype=np.float64)
    a, b = x[g.ei], x[g.ej]
    mid = (a + b) * 0.5
    if functional == "L2sq":
        return -0.5 * (a - b) ** 2
    if functional not in ("S", "F"):
        raise ValueError(f"unsupported functional {functional!r}")
    check_probability(x)
    dS = xlogx(a) + xlogx(b) - 2.0 * xlogx(mid)
    if functional == "S":
        return dS
    if beta is None:
        beta = spectral_summary(g).beta
    beta = np.asarray(beta, dtype=np.float64)
    bi, bj = beta[g.ei], beta[g.ej]
    return dS + (bi + bj) * mid - bi * a - bj * b


def exact_drift(g: Graph, v, functional: str, beta=None) -> float:
    """Exact conditional one-step expected change of ``S``, ``F`` or ``L2sq``.

    Every edge is equally likely, so this is the plain average of
    :func:`edge_changes`.  ``F`` uses ``beta`` (default: the graph's
    entropy weights).
    """
    return math.fsum(edge_changes(g, v, functional, beta)) / g.m


# ---------------------------------------------------------------- mixing time


def geometric_grid(t_max: int, ratio: float = 1.1) -> list[int]:
    """0, 1, 2, ... growing by ``ratio`` (rounded, at least +1), ending at t_max."""
    grid = [0]
    while grid[-1] < t_max:
        nxt = max(grid[-1] + 1, int(round(grid[-1] * ratio)))
        grid.append(min(nxt, t_max))
    return grid


@dataclass
class MixingEstimate:
    epsilon: float
    p: int
    q: int
    t_hat: int | None
    trials: int
    curve: list[tuple[int, float, float]]
    seed: int
    converged: bool
    t_interp: float | None = None
    grid_gap: int | None = None
    t_max: int = 0
    graph: str = ""
    init: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["curve"] = [list(row) for row in self.curve]
        return d

    def write_curve(self, path) -> None:
        write_curve_csv(self.curve, self.trials, path)


def write_curve_csv(curve, trials: int, path) -> None:
    if not curve:
        raise ValueError("curve is empty")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for t, mean, se in curve:
            w.writerow([int(t), repr(float(mean)), repr(float(se)), int(trials)])


def _lp_norm(v: np.ndarray, p: int) -> float:
    return float(np.sum(np.abs(v) ** p) ** (1.0 / p))


def _resolve_init(g: Graph, init) -> tuple[np.ndarray, str]:
    if isinstance(init, str):
        return init_state(g, init).values, init
    if isinstance(init, StateVector):
        return init.values, "vector"
    return np.asarray(init, dtype=np.float64), "vector"


def default_t_max(g: Graph, eps: float, summary: SpectralSummary | None = None) -> int:
    """``20 gamma log(n / eps)``, comfortably above every upper bound."""
    s = summary or spectral_summary(g)
    return int(math.ceil(20.0 * s.gamma * math.log(g.n / eps)))


def _stat(values: np.ndarray, q: int) -> tuple[float, float]:
    mean, se = _mean_se(values)
    if q == 1:
        return mean, se
    root = math.sqrt(max(mean, 0.0))
    return root, (se / (2.0 * root) if root > 0 else 0.0)


class _Pool:
    """Contiguous trial blocks, optionally advanced on worker threads."""

    def __init__(self, g, v0, streams, kernel, workers):
        workers = max(1, min(workers, len(streams)))
        bounds = np.linspace(0, len(streams), workers + 1).astype(int)
        self.blocks = [
            Ensemble(g, v0, streams[a:b], kernel) for a, b in zip(bounds[:-1], bounds[1:]) if b > a
        ]
        self.executor = ThreadPoolExecutor(len(self.blocks)) if len(self.blocks) > 1 else None

    def advance(self, steps: int) -> None:
        if self.executor is None:
            for b in self.blocks:
                b.advance(steps)
        else:
            list(self.executor.map(lambda b: b.advance(steps), self.blocks))

    def statistic(self, q: int) -> np.ndarray:
        return np.concatenate([b.statistic(q) for b in self.blocks])

    def close(self) -> None:
        if self.executor is not None:
            self.executor.shutdown()


def estimate_mixing_time(
    g: Graph,
    init,
    eps: float,
    p: int = 1,
    q: int = 1,
    trials: int = 50,
    r=0,
    t_max: int | None = None,
    ratio: float = 1.1,
    stop_at_crossing: bool = True,
    workers: int | None = None,
    kernel: str = "average",
) -> MixingEstimate:
    """Monte Carlo estimate of the ε-mixing time from one initialization.

    The statistic is recorded on a geometric grid.  ``t_hat`` is the first
    integer step at which the linearly interpolated curve reaches ``eps``.
    Because every trajectory contracts pathwise, the curve is monotone and
    later grid points never need re-simulation.

    Parameters
    ----------
    init : str, StateVector or array
        Init spec (``corner:0``, ``fiedler``, ...) or an explicit vector; must
        have unit L^p norm.
    r : int or RngStream
        Master seed; trial ``k`` uses ``RngStream(seed, k)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    v0, label = _resolve_init(g, init)
    if abs(_lp_norm(v0, p) - 1.0) > 1e-9:
        raise ValueError(f"initial vector is not on the unit L^{p} sphere")
    seed = _seed_of(r)
    if t_max is None:
        t_max = default_t_max(g, eps)
    grid = geometric_grid(t_max, ratio)
    pool = _Pool(g, v0, [RngStream(seed, k) for k in range(trials)], kernel, workers or default_workers())
    curve = []
    t_hat = t_interp = gap = None
    now = 0
    try:
        for t in grid:
            pool.advance(t - now)
            now = t
            mean, se = _stat(pool.statistic(q), q)
            curve.append((t, mean, se))
            if mean <= eps and t_hat is None:
                if len(curve) == 1:
                    t_interp, t_hat, gap = 0.0, 0, 0
                else:
                    t0, m0, _ = curve[-2]
                    t_interp = t0 + (m0 - eps) / (m0 - mean) * (t - t0)
                    t_hat = min(t, int(math.ceil(t_interp - 1e-9)))
                    gap = t - t0
                if stop_at_crossing:
                    break
    finally:
        pool.close()
    return MixingEstimate(
        epsilon=eps,
        p=p,
        q=q,
        t_hat=t_hat,
        trials=trials,
        curve=curve,
        seed=seed,
        converged=t_hat is not None,
        t_interp=t_interp,
        grid_gap=gap,
        t_max=t_max,
        graph=g.name,
        init=label,
    )


# ---------------------------------------------------------------- covering time


@dataclass
class CoveringEstimate:
    alpha: float
    corner: int
    mean: float
    stderr: float
    trials: int
    times: np.ndarray = field(repr=False)


def estimate_covering_time(g: Graph, corner: int, alpha: float, trials: int, r=0, t_max: int | None = None) -> CoveringEstimate:
    """Mean first step at which at least ``alpha * n`` coordinates are nonzero,
    starting from the corner ``e_corner``.

    Nonzero means exactly ``!= 0``: from a non-negative start an averaged pair
    is never driven back to zero.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    if not 0 <= corner < g.n:
        raise ValueError("corner out of range")
    n = g.n
    target = math.ceil(alpha * n - 1e-9)
    seed = _seed_of(r)
    times = np.full(trials, -1, dtype=np.int64)
    if target <= 1:
        times[:] = 0
    else:
        if t_max is None:
            t_max = 100 * default_t_max(g, 0.5)
        ens = Ensemble(g, np.eye(n)[corner], [RngStream(seed, k) for k in range(trials)])
        flat = ens.values.reshape(-1)
        count = np.ones(trials, dtype=np.int64)
        base = (np.arange(trials, dtype=np.int64) * n)[:, None]
        I, J, m = _endpoint_tables(g, "average")
        t = 0
        while t < t_max and np.any(times < 0):
            k = min(4096, t_max - t)
            idx = np.stack([st.integers(m, k) for st in ens.streams])
            FI = np.ascontiguousarray((base + I[idx]).T)
            FJ = np.ascontiguousarray((base + J[idx]).T)
            for s in range(k):
                fi, fj = FI[s], FJ[s]
                a, b = flat[fi], flat[fj]
                nza, nzb = a != 0, b != 0
                mid = (a + b) * 0.5
                flat[fi] = mid
                flat[fj] = mid
                count += 2 * (nza | nzb) - nza - nzb
                hit = (count >= target) & (times < 0)
                if hit.any():
                    times[hit] = t + s + 1
            t += k
        if np.any(times < 0):
            raise RuntimeError(f"covering not reached within {t_max} steps")
    mean, se = _mean_se(times.astype(np.float64))
    return CoveringEstimate(alpha, corner, mean, se, trials, times)


# ---------------------------------------------------------------- flow on the path


@dataclass
class FlowSummary:
    flows: np.ndarray
    cumulative: np.ndarray
    final: StateVector

    @property
    def total(self) -> float:
        return float(self.cumulative[-1]) if self.cumulative.size else 0.0


def _is_path(g: Graph) -> bool:
    return g.m == g.n - 1 and bool(np.all(np.abs(g.ej - g.ei) == 1)) and set(
        map(tuple, np.sort(g.edges, axis=1).tolist())
    ) == {(i, i + 1) for i in range(g.n - 1)}


def flow_summary(g: Graph, steps: int, r, init: str = "corner:0") -> FlowSummary:
    """Left-to-right mass flow ``(v_I - v_{I+1}) / 2`` per step on a path.

    Only defined for the path graph started at its left end; the flow is
    never negative because the state stays non-increasing along the path.
    """
    if not _is_path(g):
        raise ValueError("flow summary needs the path graph")
    if init != "corner:0":
        raise ValueError("flow summary needs the corner:0 initialization")
    stream = r if isinstance(r, RngStream) else RngStream(int(r), 0)
    v = np.zeros(g.n)
    v[0] = 1.0
    lo = np.minimum(g.ei, g.ej)
    flows = np.empty(steps)
    done = 0
    while done < steps:
        k = min(65536, steps - done)
        idx = stream.integers(g.m, k)
        for s, e in enumerate(lo[idx].tolist()):
            left, right = v[e], v[e + 1]
            f = (left - right) * 0.5
            if f < 0:
                raise AssertionError(f"negative flow {f!r} at step {done + s + 1}")
            mid = (left + right) * 0.5
            v[e] = mid
            v[e + 1] = mid
            flows[done + s] = f
        done += k
    return FlowSummary(flows, np.cumsum(flows), StateVector(v, 1.0 / g.n, steps))


# ---------------------------------------------------------------- Q functional


def q_weights(n: int) -> np.ndarray:
    return (n - np.arange(n)).astype(np.float64)


def q_functional(sys_or_vec) -> float:
    """``Q(x) = sum_i (n + 1 - i) x_i`` of the aggregate (1-based ``i``)."""
    x = split_aggregate(sys_or_vec) if isinstance(sys_or_vec, SplitSystem) else np.asarray(sys_or_vec, dtype=np.float64)
    return float(q_weights(x.size) @ x)


def q_expected_decrease(sys: SplitSystem) -> float:
    """Exact one-step expected decrease of Q̃, enumerating all n edges for
    every sequence."""
    n = sys.n
    w = q_weights(n)
    total = 0.0
    for seq in sys.sequences:
        q0 = w @ seq
        acc = 0.0
        for e in range(n):
            acc += q0 - sum(w @ part for part in pc2_apply(seq, e))
        total += acc / n
    return total


# ---------------------------------------------------------------- bounds


@dataclass
class BoundReport:
    n: int
    edges: int
    epsilon: float
    gamma: float
    delta: float
    degree_ratio: float
    universal_lower: float
    l2_lower: float
    l2_upper: float
    l1_lower: float
    l1_upper: float
    l21_lower: float
    l21_upper: float
    l21_lower_deloc: float
    cov_lower: float
    universal_lower_asymptotic: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    def pairs(self) -> dict[str, tuple[float, float]]:
        return {
            "l2": (self.l2_lower, self.l2_upper),
            "l1": (self.l1_lower, self.l1_upper),
            "l21": (self.l21_lower, self.l21_upper),
            "l21_deloc": (self.l21_lower_deloc, self.l21_upper),
        }


def universal_lower(n: int, eps: float) -> float:
    """Leading term ``(1 - eps) n ln n / (2 ln 2)``; the -O(n) term is omitted."""
    return (1.0 - eps) * n * math.log(n) / (2.0 * LOG2)


def bound_report(g: Graph, eps: float, summary: SpectralSummary | None = None) -> BoundReport:
    """Closed-form mixing-time bounds evaluated from the graph's spectrum."""
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    s = summary or spectral_summary(g)
    n, gam = g.n, s.gamma
    inv = math.log(1.0 / eps)
    lower = (2.0 * gam - 1.0) * inv
    ratio = float(g.degrees.max() / g.degrees.min())
    return BoundReport(
        n=n,
        edges=g.m,
        epsilon=eps,
        gamma=gam,
        delta=s.delta,
        degree_ratio=ratio,
        universal_lower=universal_lower(n, eps),
        l2_lower=lower,
        l2_upper=4.0 * gam * inv,
        l1_lower=lower,
        l1_upper=4.0 * gam * (0.5 * math.log(n) + inv),
        l21_lower=lower,
        l21_upper=4.0 * gam * math.log(math.sqrt(n) / eps),
        l21_lower_deloc=(2.0 * gam - 1.0) * math.log(s.delta * math.sqrt(n) / eps),
        cov_lower=n / (2.0 * ratio) * math.log((1.0 - eps) * n),
    )


# ---------------------------------------------------------------- corners


def propagators(g: Graph, t: int, streams: list[RngStream]) -> np.ndarray:
    """Per-trial linear maps ``W`` with ``v(t) = W v(0)`` for the edge
    sequence drawn from each stream; shape ``(trials, n, n)``.

    Column ``c`` of ``W`` is the trajectory from the corner ``e_c``, so all
    corners share one edge stream per trial.
    """
    T, n = len(streams), g.n
    W = np.broadcast_to(np.eye(n), (T, n, n)).copy()
    if t == 0:
        return W
    idx = np.stack([st.integers(g.m, t) for st in streams])
    I, J = g.ei[idx], g.ej[idx]
    rows = np.arange(T)
    for s in range(t):
        i, j = I[:, s], J[:, s]
        mid = (W[rows, i, :] + W[rows, j, :]) * 0.5
        W[rows, i, :] = mid
        W[rows, j, :] = mid
    return W


@dataclass
class CornerSweep:
    t: int
    means: np.ndarray
    stderrs: np.ndarray
    worst: int
    trials: int
    l1: np.ndarray = field(repr=False)


def corner_sweep(g: Graph, t: int, trials: int, r=0, corners=None) -> CornerSweep:
    """Mean ``||v(t) - vbar||_1`` from every corner ``e_i`` (or the given
    subset), with all corners driven by the same edge stream in each trial."""
    if t < 0:
        raise ValueError("t must be non-negative")
    seed = _seed_of(r)
    W = propagators(g, t, [RngStream(seed, k) for k in range(trials)])
    l1 = np.abs(W - 1.0 / g.n).sum(axis=1)  # (trials, n): column sums per corner
    cols = np.arange(g.n) if corners is None else np.asarray(corners)
    l1 = l1[:, cols]
    stats = [_mean_se(l1[:, c]) for c in range(l1.shape[1])]
    means = np.array([m for m, _ in stats])
    ses = np.array([s for _, s in stats])
    return CornerSweep(t, means, ses, int(cols[int(np.argmax(means))]), trials, l1)


# ---------------------------------------------------------------- entropy inequality


def fannes_check(v, w) -> float:
    """Slack ``||v - w||_1 log n + 1/(e log 2) - |S(v) - S(w)|``."""
    x = check_probability(v)
    y = check_probability(w)
    if x.size != y.size or x.size < 2:
        raise ValueError("distributions must share a length n >= 2")
    lhs = abs(entropy(x) - entropy(y))
    rhs = math.fsum(np.abs(x - y)) * math.log(x.size) + 1.0 / (math.e * LOG2)
    return rhs - lhs


# ---------------------------------------------------------------- comparisons


@dataclass
class Comparison:
    """Mean statistic of a process ``a`` against a process ``b`` at the
    listed times; ``se_diff`` is the standard error of ``mean_b - mean_a``."""

    t: list[int]
    mean_a: np.ndarray
    se_a: np.ndarray
    mean_b: np.ndarray
    se_b: np.ndarray
    se_diff: np.ndarray
    trials: int

    def holds(self, k: float = 2.0) -> np.ndarray:
        return self.mean_a <= self.mean_b + k * self.se_diff


def pc2_comparison(n: int, ts, trials: int, r=0) -> Comparison:
    """Averaging process on ``C_n`` (a) against the splitting process (b),
    both from ``e_1``, with independent streams."""
    ts = sorted(int(t) for t in ts)
    seed = _seed_of(r)
    g = make_graph(f"cycle:{n}")
    e1 = np.zeros(n)
    e1[0] = 1.0
    ens = Ensemble(g, e1, [RngStream(seed, k) for k in range(trials)])
    a = np.empty((len(ts), trials))
    now = 0
    for row, t in enumerate(ts):
        ens.advance(t - now)
        now = t
        a[row] = ens.l1()
    b = np.empty((len(ts), trials))
    for k in range(trials):
        stream = RngStream(seed, trials + k)
        sys = SplitSystem.start(e1)
        now = 0
        for row, t in enumerate(ts):
            while now < t:
                sys = split_step(sys, n, stream)
                now += 1
            b[row, k] = split_distance(sys)
    sa = [_mean_se(x) for x in a]
    sb = [_mean_se(x) for x in b]
    se_a = np.array([s for _, s in sa])
    se_b = np.array([s for _, s in sb])
    return Comparison(
        ts,
        np.array([m for m, _ in sa]),
        se_a,
        np.array([m for m, _ in sb]),
        se_b,
        np.sqrt(se_a ** 2 + se_b ** 2),
        trials,
    )


def slowed_comparison(g: Graph, init, t_max: int, trials: int, r=0) -> Comparison:
    """Slowed pair process on ``K_n`` (a) against the same process on ``g``
    (b) for ``t = 0..t_max``, with shared pair streams per trial."""
    seed = _seed_of(r)
    v0, _ = _resolve_init(g, init)
    K = make_graph(f"complete:{g.n}")
    ka = Ensemble(K, v0, [RngStream(seed, k) for k in range(trials)], kernel="slowed")
    gb = Ensemble(g, v0, [RngStream(seed, k) for k in range(trials)], kernel="slowed")
    ts = list(range(t_max + 1))
    a = np.empty((len(ts), trials))
    b = np.empty((len(ts), trials))
    a[0] = ka.l1()
    b[0] = gb.l1()

    def into(out):
        def monitor(t, ens):
            out[t] = ens.l1()

        return monitor

    ka.advance(t_max, into(a))
    gb.advance(t_max, into(b))
    sa = [_mean_se(x) for x in a]
    sb = [_mean_se(x) for x in b]
    sd = [_mean_se(y - x)[1] for x, y in zip(a, b)]
    return Comparison(
        ts,
        np.array([m for m, _ in sa]),
        np.array([s for _, s in sa]),
        np.array([m for m, _ in sb]),
        np.array([s for _, s in sb]),
        np.array(sd),
        trials,
    )


def l2_decay_ratios(g: Graph, init, steps: int, trials: int, r=0) -> tuple[np.ndarray, np.ndarray]:
    """Per-step ratios of mean ``||v(t) - vbar||_2^2`` and their delta-method
    standard errors, for ``t = 0..steps-1``."""
    seed = _seed_of(r)
    v0, _ = _resolve_init(g, init)
    ens = Ensemble(g, v0, [RngStream(seed, k) for k in range(trials)])
    prev = ens.l2sq()
    ratios, ses = [], []
    for _ in range(steps):
        ens.advance(1)
        cur = ens.l2sq()
        # ratio of means; paired delta-method standard error
        m_prev, m_cur = prev.mean(), cur.mean()
        R = m_cur / m_prev
        resid = (cur - R * prev) / m_prev
        ratios.append(R)
        ses.append(resid.std(ddof=1) / math.sqrt(trials) if trials > 1 else 0.0)
        prev = cur
    return np.array(ratios), np.array(ses)


def to_json(obj) -> str:
    """Deterministic JSON (sorted keys, arrays as lists)."""

    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.integer,)):
            return int(o)
        if isinstance(o, (np.floating,)):
            return float(o)
        raise TypeError(f"not JSON serializable: {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"
