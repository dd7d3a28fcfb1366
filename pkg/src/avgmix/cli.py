"""Command-line front end.

Every report is deterministic: identical arguments and seed give
byte-identical JSON and CSV output.  ``runtime_seconds`` is the single
exception and is only written when ``--timing`` is passed.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .analysis import (
    bound_report,
    corner_sweep,
    default_t_max,
    estimate_covering_time,
    estimate_mixing_time,
    pc2_comparison,
    slowed_comparison,
    to_json,
    write_curve_csv,
)
from .graphs import GraphError, make_graph, parse_graph_spec
from .process import TrajectoryRecorder, init_state, run
from .rng import RngStream
from .spectral import spectral_summary


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class ExperimentConfig:
    experiment: str
    graph: list[str] = field(default_factory=list)
    init: str | None = None
    eps: float | None = None
    pq: list[int] | None = None
    trials: int | None = None
    t_max: int | None = None
    seed: int = 0
    stride: int | None = None
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _pq(text: str) -> list[int]:
    try:
        p, q = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--pq expects two integers like 1,1") from None
    if p not in (1, 2) or q not in (1, 2):
        raise argparse.ArgumentTypeError("p and q must be 1 or 2")
    return [p, q]


def _int_list(text: str) -> list[int]:
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _probability(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _graph_arg(text: str) -> str:
    try:
        return str(parse_graph_spec(text)) if not text.startswith("file:") else text
    except GraphError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="avgmix", description="Random averaging process on graphs: simulation, spectral bounds, Monte Carlo mixing times.")
    p.add_argument("--version", action="version", version=f"avgmix {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, graph=True, trials=50):
        if graph:
            sp.add_argument("--graph", type=_graph_arg, required=True, help="graph spec, e.g. complete:64, regular:256,4,1, file:edges.txt")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=_positive, default=trials)
        sp.add_argument("--json", dest="json_out", help="write the JSON report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="record wall time in the report (breaks byte-identity)")

    s = sub.add_parser("simulate", help="run one trajectory and dump norms/entropies")
    common(s, trials=1)
    s.add_argument("--init", default="corner:0")
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--stride", type=_positive, default=1)
    s.add_argument("--kernel", choices=("average", "slowed"), default="average")
    s.add_argument("--csv", dest="csv_out", help="trajectory CSV path")

    s = sub.add_parser("mix", help="estimate an eps-mixing time")
    common(s)
    s.add_argument("--init", default="corner:0")
    s.add_argument("--eps", type=_probability, required=True)
    s.add_argument("--pq", type=_pq, default=[1, 1])
    s.add_argument("--t-max", type=_positive)
    s.add_argument("--full-curve", action="store_true", help="keep recording past the crossing up to t-max")
    s.add_argument("--csv", dest="csv_out", help="curve CSV path")

    s = sub.add_parser("cover", help="estimate an alpha-covering time from a corner")
    common(s)
    s.add_argument("--corner", type=int, default=0)
    s.add_argument("--alpha", type=float, required=True)

    s = sub.add_parser("bounds", help="closed-form mixing-time bounds")
    s.add_argument("--graph", type=_graph_arg, required=True)
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--json", dest="json_out")
    s.add_argument("--timing", action="store_true")
    s.set_defaults(seed=0, trials=None)

    s = sub.add_parser("spectral", help="spectral summary of a graph")
    s.add_argument("--graph", type=_graph_arg, required=True)
    s.add_argument("--method", choices=("jacobi", "lapack"))
    s.add_argument("--json", dest="json_out")
    s.add_argument("--timing", action="store_true")
    s.set_defaults(seed=0, trials=None)

    s = sub.add_parser("corner-sweep", help="mean L1 distance from every corner at time t")
    common(s)
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--csv", dest="csv_out")

    s = sub.add_parser("cycle-split", help="averaging process vs splitting process on the cycle")
    common(s, graph=False, trials=2000)
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--times", type=_int_list, default=[5, 20, 50])
    s.add_argument("--csv", dest="csv_out")

    s = sub.add_parser("slowed-compare", help="slowed pair process: complete graph vs G")
    common(s, trials=5000)
    s.add_argument("--init", default="corner:0")
    s.add_argument("--t-max", type=_positive, default=200)
    s.add_argument("--csv", dest="csv_out")

    s = sub.add_parser("table", help="reproduce a mixing-time table")
    s.add_argument("which", type=int, choices=(1, 2, 3))
    s.add_argument("--sizes", type=_int_list, default=[16, 32, 64])
    s.add_argument("--eps", type=_probability)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=_positive, default=50)
    s.add_argument("--csv", dest="csv_out")
    s.add_argument("--json", dest="json_out")
    s.add_argument("--timing", action="store_true")
    return p


# ---------------------------------------------------------------- commands


def _spectral_block(g, summary=None):
    s = summary or spectral_summary(g)
    d = s.to_dict()
    d["graph"] = g.name
    return d


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _write(path, text) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_simulate(a, cfg):
    g = make_graph(a.graph)
    s0 = init_state(g, a.init)
    beta = spectral_summary(g).beta if np.all(s0.values >= 0) else None
    rec = TrajectoryRecorder(beta=beta, stride=a.stride)
    rec.record(0, s0)
    final = run(s0, g, a.steps, RngStream(a.seed, 0), observer=rec, kernel=a.kernel)
    if a.csv_out:
        rec.write_csv(a.csv_out)
    cfg.extra = {"steps": a.steps, "kernel": a.kernel}
    last = rec.rows[-1]
    return {
        "spectral": None,
        "bounds": None,
        "estimate": {"final_l1": last[1], "final_l2sq": last[2], "final_state": final.values, "mass": math.fsum(final.values)},
    }


def cmd_mix(a, cfg):
    g = make_graph(a.graph)
    summary = spectral_summary(g)
    p, q = a.pq
    t_max = a.t_max or default_t_max(g, a.eps, summary)
    cfg.t_max = t_max
    est = estimate_mixing_time(
        g, a.init, a.eps, p, q, a.trials, a.seed, t_max=t_max, stop_at_crossing=not a.full_curve
    )
    if a.csv_out:
        write_curve_csv(est.curve, est.trials, a.csv_out)
    bounds = bound_report(g, a.eps, summary).to_dict() if a.eps < 1 else None
    return {"spectral": _spectral_block(g, summary), "bounds": bounds, "estimate": est.to_dict()}


def cmd_cover(a, cfg):
    g = make_graph(a.graph)
    summary = spectral_summary(g)
    est = estimate_covering_time(g, a.corner, a.alpha, a.trials, a.seed)
    cfg.extra = {"corner": a.corner, "alpha": a.alpha}
    bounds = bound_report(g, 1.0 - a.alpha, summary).to_dict() if 0 < a.alpha < 1 else None
    return {
        "spectral": _spectral_block(g, summary),
        "bounds": bounds,
        "estimate": {"alpha": a.alpha, "corner": a.corner, "mean": est.mean, "stderr": est.stderr, "trials": est.trials},
    }


def cmd_bounds(a, cfg):
    g = make_graph(a.graph)
    summary = spectral_summary(g)
    return {"spectral": _spectral_block(g, summary), "bounds": bound_report(g, a.eps, summary).to_dict(), "estimate": None}


def cmd_spectral(a, cfg):
    g = make_graph(a.graph)
    s = spectral_summary(g, a.method)
    block = _spectral_block(g, s)
    block["lambda2_closed_form"] = s.lambda2_closed_form
    block["fiedler"] = s.fiedler
    block["beta"] = s.beta
    cfg.extra = {"method": a.method}
    return {"spectral": block, "bounds": None, "estimate": None}


def cmd_corner_sweep(a, cfg):
    g = make_graph(a.graph)
    res = corner_sweep(g, a.t, a.trials, a.seed)
    cfg.extra = {"t": a.t}
    if a.csv_out:
        _write(a.csv_out, _csv_text(("corner", "mean", "stderr", "trials"), [(i, m, s, res.trials) for i, (m, s) in enumerate(zip(res.means, res.stderrs))]))
    return {
        "spectral": _spectral_block(g),
        "bounds": None,
        "estimate": {"t": a.t, "worst_corner": res.worst, "means": res.means, "stderrs": res.stderrs},
    }


def _comparison_rows(c):
    return [
        (t, ma, sa, mb, sb, sd, c.trials)
        for t, ma, sa, mb, sb, sd in zip(c.t, c.mean_a, c.se_a, c.mean_b, c.se_b, c.se_diff)
    ]


def cmd_cycle_split(a, cfg):
    c = pc2_comparison(a.n, a.times, a.trials, a.seed)
    cfg.graph = [f"cycle:{a.n}"]
    cfg.init = "corner:0"
    cfg.extra = {"times": a.times}
    if a.csv_out:
        _write(a.csv_out, _csv_text(("t", "mean_avg", "se_avg", "mean_split", "se_split", "se_diff", "trials"), _comparison_rows(c)))
    return {
        "spectral": None,
        "bounds": None,
        "estimate": {
            "t": c.t,
            "mean_averaging": c.mean_a,
            "mean_split": c.mean_b,
            "se_diff": c.se_diff,
            "holds_2se": c.holds(),
        },
    }


def cmd_slowed_compare(a, cfg):
    g = make_graph(a.graph)
    c = slowed_comparison(g, a.init, a.t_max, a.trials, a.seed)
    cfg.t_max = a.t_max
    if a.csv_out:
        _write(a.csv_out, _csv_text(("t", "mean_complete", "se_complete", "mean_graph", "se_graph", "se_diff", "trials"), _comparison_rows(c)))
    holds = c.holds()
    return {
        "spectral": None,
        "bounds": None,
        "estimate": {"all_hold_2se": bool(holds.all()), "violations": [t for t, h in zip(c.t, holds) if not h]},
    }


# ---------------------------------------------------------------- tables

TABLE_EPS = {1: 0.5, 2: 0.1, 3: 0.5}


def _btree_size(n: int) -> int:
    k = max(2, int(math.floor(math.log2(n + 1))))
    return 2 ** k - 1


def table_rows(which: int, sizes, eps: float, trials: int, seed: int):
    """Rows ``(family, graph, n, t_hat, lower, upper, scale, ratio)``."""
    rows = []
    for n in sizes:
        if which == 1:
            # (label, spec, init, theoretical scale)
            d = max(2, n // 2)
            cases = [
                ("expander", f"regular:{n},4,0", "corner:0", n * math.log(n)),
                ("star", f"star:{n}", "corner:1", n * math.log(n)),
                ("dumbbell", f"dumbbell:{d}", "corner:0", float(2 * d) ** 3),
                ("cycle", f"cycle:{n}", "corner:0", float(n) ** 3),
            ]
            p, q = 1, 1
        else:
            cases = [
                ("complete", f"complete:{n}", None, None),
                ("btree", f"btree:{_btree_size(n)}", None, None),
                ("star", f"star:{n}", None, None),
                ("cycle", f"cycle:{n}", None, None),
            ]
            p, q = (2, 2) if which == 2 else (2, 1)
        for label, spec, init, scale in cases:
            g = make_graph(spec)
            summary = spectral_summary(g)
            b = bound_report(g, eps, summary) if eps < 1 else None
            if which == 2:
                init, lo, hi = "fiedler", b.l2_lower, b.l2_upper
                nn = g.n
                scale = {"complete": nn, "btree": nn ** 2, "star": nn, "cycle": nn ** 3}[label] * math.log(1 / eps)
            elif which == 3:
                init, lo, hi = "fiedler", b.l21_lower_deloc, b.l21_upper
                nn = g.n
                scale = {"complete": nn, "btree": nn ** 2, "star": nn, "cycle": nn ** 3}[label] * math.log(nn)
            else:
                lo, hi = (b.universal_lower, b.l1_upper) if b else (math.nan, math.nan)
            t_max = default_t_max(g, eps, summary)
            est = estimate_mixing_time(g, init, eps, p, q, trials, seed, t_max=t_max)
            t_hat = est.t_hat if est.t_hat is not None else math.nan
            rows.append((label, g.name, g.n, t_hat, lo, hi, scale, t_hat / scale))
    return rows


def cmd_table(a, cfg):
    eps = a.eps if a.eps is not None else TABLE_EPS[a.which]
    cfg.eps = eps
    cfg.extra = {"table": a.which, "sizes": a.sizes}
    rows = table_rows(a.which, a.sizes, eps, a.trials, a.seed)
    header = ("family", "graph", "n", "t_hat", "lower", "upper", "scale", "ratio")
    if a.csv_out:
        _write(a.csv_out, _csv_text(header, rows))
    return {"spectral": None, "bounds": None, "estimate": {"rows": [dict(zip(header, r)) for r in rows]}}


COMMANDS = {
    "simulate": cmd_simulate,
    "mix": cmd_mix,
    "cover": cmd_cover,
    "bounds": cmd_bounds,
    "spectral": cmd_spectral,
    "corner-sweep": cmd_corner_sweep,
    "cycle-split": cmd_cycle_split,
    "slowed-compare": cmd_slowed_compare,
    "table": cmd_table,
}


def _config(a) -> ExperimentConfig:
    graph = getattr(a, "graph", None)
    pq = getattr(a, "pq", None)
    outputs = {k: v for k in ("json_out", "csv_out") if (v := getattr(a, k, None))}
    return ExperimentConfig(
        experiment=a.command,
        graph=[graph] if graph else [],
        init=getattr(a, "init", None),
        eps=getattr(a, "eps", None),
        pq=pq,
        trials=getattr(a, "trials", None),
        t_max=getattr(a, "t_max", None),
        seed=a.seed,
        stride=getattr(a, "stride", None),
        outputs=outputs,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    cfg = _config(a)
    start = time.perf_counter()
    try:
        body = COMMANDS[a.command](a, cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"avgmix: error: {exc}", file=sys.stderr)
        return 2
    report = {"version": __version__, "config": asdict(cfg), **body}
    report["runtime_seconds"] = round(time.perf_counter() - start, 3) if a.timing else None
    text = to_json(report)
    try:
        if a.json_out:
            _write(a.json_out, text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"avgmix: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
