"""Command line interface.

Subcommands:
  gen    simulate a channel and write a trace file
  eval   compute metrics from a trace file into a report CSV
  sweep  simulate + evaluate across an SNR range into a long-format CSV
  fig2   emit the standard curve set (uniform 64-QAM and shaped 256-QAM
         over the rotated-Gaussian channel) as per-curve CSVs

Exit codes: 0 success, 2 configuration error, 3 data error. All metric
values come straight from recipes-module calls; the only CLI-side math
is the 20*log10 dB companion row for Q-factors.
"""

from __future__ import annotations

import argparse
import csv
import math
import multiprocessing
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ._backend import active_backend
from .channels import ChannelSpec, Trace, simulate
from .constellation import (
    Constellation,
    build_pam,
    build_square_qam,
    scale_snr,
    shape_maxwell_boltzmann,
)
from .errors import ConfigurationError, PrefecError, TraceFormatError
from .metrics import (
    DEFAULT_QUADRATURE_ORDER,
    LLR_CLAMP_DEFAULT,
    MetricFunction,
    compute_lvalues,
    estimate_sigma2,
    gaussian_q,
    pn_matched_q,
)
from .recipes import (
    HistogramSpec,
    MetricReport,
    air_b_hd,
    air_b_ps,
    air_pair,
    asi,
    ber,
    build_lvalue_histogram,
    hard_decide,
    preber_ps,
    q_hard,
    q_soft,
    ser,
)
from .trace_io import read_trace, write_report, write_trace

# Canonical metric row order. Tokens on the command line may use '-' or '_'.
HARD_METRICS = ("ser", "ber", "q_hard", "air_b_hd")
SOFT_UNIFORM_METRICS = ("air_s", "air_b")
LVALUE_METRICS = ("asi", "preber_ps", "air_b_ps", "q_soft")
ALL_METRICS = HARD_METRICS + SOFT_UNIFORM_METRICS + LVALUE_METRICS

# Curves emitted by fig2, one CSV per entry. Hard-decision curves do not
# depend on the decoding metric, so they appear once.
FIG2_CURVES = (
    "ser_qam64",
    "ber_qam64",
    "air_b_hd_qam64",
    "air_s_qam64_gaussian",
    "air_b_qam64_gaussian",
    "air_s_qam64_pn_matched",
    "air_b_qam64_pn_matched",
    "preber_ps_ps256_gaussian",
    "air_b_ps_ps256_gaussian",
    "preber_ps_ps256_pn_matched",
    "air_b_ps_ps256_pn_matched",
)


def _build_constellation(name: str, shaping_entropy: float | None) -> Constellation:
    token = name.strip().lower()
    try:
        if token.startswith("qam"):
            c = build_square_qam(int(token[3:]))
        elif token.startswith("pam"):
            c = build_pam(int(token[3:]))
        else:
            raise ValueError
    except ValueError:
        raise ConfigurationError(
            f"unknown constellation {name!r}; expected qam<M> or pam<M>"
        )
    if shaping_entropy is not None:
        c = shape_maxwell_boltzmann(c, shaping_entropy)
    return c


def _parse_snr_range(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigurationError(f"snr range must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigurationError(f"snr range must be numeric, got {text!r}")
    if not (step > 0 and math.isfinite(step)) or not (start <= stop + 1e-9):
        raise ConfigurationError(f"snr range needs start <= stop and step > 0, got {text!r}")
    points = []
    i = 0
    while True:
        v = start + i * step
        if v > stop + 1e-9:
            break
        points.append(v)
        i += 1
    return points


def _parse_metrics(text: str, uniform: bool) -> list[str]:
    tokens = [t.strip().lower().replace("-", "_") for t in text.split(",") if t.strip()]
    if not tokens:
        raise ConfigurationError("empty metric list")
    if tokens == ["all"]:
        if uniform:
            return list(ALL_METRICS)
        return [t for t in ALL_METRICS if t not in SOFT_UNIFORM_METRICS]
    unknown = [t for t in tokens if t not in ALL_METRICS]
    if unknown:
        raise ConfigurationError(
            f"unknown metrics {unknown}; choose from {', '.join(ALL_METRICS)} or all"
        )
    # keep canonical order, drop duplicates
    return [t for t in ALL_METRICS if t in tokens]


def _resolve_metric(
    trace: Trace,
    q_kind: str,
    sigma2_arg: str,
    sigma_theta2: float | None,
    quadrature_order: int,
) -> tuple[MetricFunction, dict]:
    """Build the decoding metric for a trace, resolving 'auto' parameters."""
    if q_kind == "gaussian":
        if sigma2_arg == "auto":
            sigma2 = estimate_sigma2(trace)
        else:
            sigma2 = _parse_sigma2(sigma2_arg)
        return gaussian_q(sigma2), {"q": "gaussian", "sigma2": f"{sigma2:.17g}"}
    if sigma_theta2 is None:
        if "sigma_theta2" in trace.meta:
            sigma_theta2 = float(trace.meta["sigma_theta2"])
        else:
            raise ConfigurationError(
                "pn-matched metric needs --sigma-theta2 (not present in trace meta)"
            )
    if sigma2_arg == "auto":
        if "sigma_z2" in trace.meta:
            sigma_z2 = float(trace.meta["sigma_z2"])
        else:
            raise ConfigurationError(
                "pn-matched metric needs --sigma2 <value>; the trace meta does not "
                "record the channel noise variance"
            )
    else:
        sigma_z2 = _parse_sigma2(sigma2_arg)
    metric = pn_matched_q(sigma_theta2, sigma_z2, quadrature_order)
    return metric, {
        "q": "pn-matched",
        "sigma2": f"{sigma_z2:.17g}",
        "sigma_theta2": f"{sigma_theta2:.17g}",
        "quadrature_order": str(quadrature_order),
    }


def _parse_sigma2(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigurationError(f"--sigma2 must be 'auto' or a number, got {text!r}")
    if not (value > 0 and math.isfinite(value)):
        raise ConfigurationError(f"--sigma2 must be positive, got {value}")
    return value


def _db_of(value: float) -> float:
    if value == math.inf:
        return math.inf
    if not (value > 0):
        return math.nan
    return 20.0 * math.log10(value)


def _compute_metric_rows(
    trace: Trace,
    names: list[str],
    metric: MetricFunction | None,
    hist_spec: HistogramSpec,
    clamp: float,
) -> list[tuple[str, float, str]]:
    """Evaluate the requested metrics. Returns (row_name, value, units) triples."""
    rows: list[tuple[str, float, str]] = []
    need_hard = any(t in names for t in HARD_METRICS)
    need_lv = any(t in names for t in LVALUE_METRICS)
    p_b = None
    if need_hard:
        decisions = hard_decide(trace)
        p_b = ber(trace, decisions)
        if "ser" in names:
            rows.append(("ser", ser(trace, decisions), "probability"))
        if "ber" in names:
            rows.append(("ber", p_b, "probability"))
        if "q_hard" in names:
            q = q_hard(p_b)
            rows.append(("q_hard", q, "linear"))
            rows.append(("q_hard_db", _db_of(q), "dB"))
        if "air_b_hd" in names:
            rows.append(("air_b_hd", air_b_hd(p_b, trace.constellation.m), "bit/symbol"))
    if "air_s" in names or "air_b" in names:
        v_s, v_b = air_pair(trace, metric)
        if "air_s" in names:
            rows.append(("air_s", v_s, "bit/symbol"))
        if "air_b" in names:
            rows.append(("air_b", v_b, "bit/symbol"))
    if need_lv:
        lv = compute_lvalues(trace, metric, clamp)
        asi_value = asi(build_lvalue_histogram(lv, hist_spec))
        if "asi" in names:
            rows.append(("asi", asi_value, "bit/symbol"))
        if "preber_ps" in names:
            rows.append(("preber_ps", preber_ps(lv), "probability"))
        if "air_b_ps" in names:
            rows.append(
                (
                    "air_b_ps",
                    air_b_ps(trace.constellation.entropy_bits, asi_value, trace.constellation.m),
                    "bit/symbol",
                )
            )
        if "q_soft" in names:
            if asi_value >= 1.0:
                print("warning: ASI saturated at 1, q_soft is unbounded", file=sys.stderr)
                q = math.inf
            else:
                q = q_soft(asi_value)
            rows.append(("q_soft", q, "linear"))
            rows.append(("q_soft_db", _db_of(q), "dB"))
    order = {name: i for i, name in enumerate(_ROW_ORDER)}
    rows.sort(key=lambda r: order[r[0]])
    return rows


_ROW_ORDER = (
    "ser",
    "ber",
    "q_hard",
    "q_hard_db",
    "air_b_hd",
    "air_s",
    "air_b",
    "asi",
    "preber_ps",
    "air_b_ps",
    "q_soft",
    "q_soft_db",
)


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    c = _build_constellation(args.constellation, args.shaping_entropy)
    if (args.snr_db is None) == (args.sigma_z2 is None):
        raise ConfigurationError("give exactly one of --snr-db and --sigma-z2")
    sigma_z2 = scale_snr(c, args.snr_db) if args.snr_db is not None else args.sigma_z2
    spec = ChannelSpec(
        kind=args.channel,
        sigma_z2=sigma_z2,
        sigma_theta2=args.sigma_theta2,
        seed=args.seed,
    )
    extra = {"constellation": args.constellation.strip().lower(), "h_s": f"{c.entropy_bits:.17g}"}
    if args.snr_db is not None:
        extra["snr_db"] = f"{args.snr_db:.17g}"
    if args.shaping_entropy is not None:
        extra["shaping_entropy"] = f"{args.shaping_entropy:.17g}"
    trace = simulate(c, spec, args.n, extra)
    write_trace(trace, args.out)
    print(f"wrote {args.out}: n={trace.N} H_s={c.entropy_bits:.12g} seed={args.seed}")
    return 0


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    trace = read_trace(args.trace)
    names = _parse_metrics(args.metrics, trace.constellation.is_uniform())
    hist_spec = HistogramSpec(bins=args.bins, delta=args.delta)
    metric = None
    metric_config: dict = {"q": "none"}
    if any(t in names for t in SOFT_UNIFORM_METRICS + LVALUE_METRICS):
        metric, metric_config = _resolve_metric(
            trace, args.q, args.sigma2, args.sigma_theta2, args.quadrature_order
        )
    rows = _compute_metric_rows(trace, names, metric, hist_spec, args.clamp)
    config = {
        "trace": str(args.trace),
        "n": str(trace.N),
        "channel": trace.meta.get("channel", ""),
        "constellation": trace.meta.get("constellation", f"M{trace.constellation.M}"),
        "bins": str(args.bins),
        "delta": f"{args.delta:.17g}",
        "clamp": f"{args.clamp:.17g}",
        "backend": active_backend(),
        **metric_config,
    }
    reports = [MetricReport(name, value, units, config) for name, value, units in rows]
    if args.out is not None:
        write_report(reports, args.out)
        print(f"wrote {args.out}: {len(reports)} metric rows")
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["metric", "value", "units"])
        for r in reports:
            writer.writerow([r.name, repr(r.value), r.units])
    return 0


# ---------------------------------------------------------------------------
# sweep


def _sweep_point(payload: dict) -> list[tuple[float, str, float]]:
    c = _build_constellation(payload["constellation"], payload["shaping_entropy"])
    snr_db = payload["snr_db"]
    sigma_z2 = scale_snr(c, snr_db)
    spec = ChannelSpec(
        kind=payload["channel"],
        sigma_z2=sigma_z2,
        sigma_theta2=payload["sigma_theta2"],
        seed=payload["seed"],
    )
    trace = simulate(c, spec, payload["n"])
    names = payload["names"]
    metric = None
    if any(t in names for t in SOFT_UNIFORM_METRICS + LVALUE_METRICS):
        if payload["q"] == "gaussian":
            sigma2 = (
                estimate_sigma2(trace)
                if payload["sigma2"] == "auto"
                else _parse_sigma2(payload["sigma2"])
            )
            metric = gaussian_q(sigma2)
        else:
            # channel parameters are known exactly here, take sigma_z2 as built
            sigma_z2_q = (
                sigma_z2 if payload["sigma2"] == "auto" else _parse_sigma2(payload["sigma2"])
            )
            metric = pn_matched_q(
                payload["sigma_theta2"], sigma_z2_q, payload["quadrature_order"]
            )
    hist_spec = HistogramSpec(bins=payload["bins"], delta=payload["delta"])
    rows = _compute_metric_rows(trace, names, metric, hist_spec, payload["clamp"])
    return [(snr_db, name, value) for name, value, _ in rows]


def cmd_sweep(args) -> int:
    snrs = _parse_snr_range(args.snr_range)
    c = _build_constellation(args.constellation, args.shaping_entropy)
    names = _parse_metrics(args.metrics, c.is_uniform())
    HistogramSpec(bins=args.bins, delta=args.delta)  # validate early
    if args.workers < 1:
        raise ConfigurationError("--workers must be >= 1")
    payloads = [
        {
            "constellation": args.constellation,
            "shaping_entropy": args.shaping_entropy,
            "channel": args.channel,
            "sigma_theta2": args.sigma_theta2,
            "snr_db": snr,
            "seed": args.seed + i,
            "n": args.n,
            "names": names,
            "q": args.q,
            "sigma2": args.sigma2,
            "quadrature_order": args.quadrature_order,
            "bins": args.bins,
            "delta": args.delta,
            "clamp": args.clamp,
        }
        for i, snr in enumerate(snrs)
    ]
    if args.workers == 1:
        chunks = [_sweep_point(p) for p in payloads]
    else:
        # spawn, not fork: the parent may already hold OpenMP thread state
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=args.workers, mp_context=ctx) as pool:
            chunks = list(pool.map(_sweep_point, payloads))
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(args.out, "w", encoding="ascii", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["snr_db", "metric", "value"])
        for snr, name, value in rows:
            writer.writerow([repr(snr), name, repr(value)])
    print(f"wrote {args.out}: {len(rows)} rows over {len(snrs)} SNR points")
    return 0


# ---------------------------------------------------------------------------
# fig2


def _fig2_point(payload: dict) -> tuple[float, dict]:
    snr_db = payload["snr_db"]
    st2 = payload["sigma_theta2"]
    order = payload["quadrature_order"]
    n = payload["n"]
    hist_spec = HistogramSpec(bins=payload["bins"], delta=payload["delta"])
    clamp = payload["clamp"]
    out: dict[str, float] = {}

    c64 = build_square_qam(64)
    sz64 = scale_snr(c64, snr_db)
    tr64 = simulate(c64, ChannelSpec("pn-awgn", sz64, st2, payload["seed64"]), n)
    decisions = hard_decide(tr64)
    p_b = ber(tr64, decisions)
    out["ser_qam64"] = ser(tr64, decisions)
    out["ber_qam64"] = p_b
    out["air_b_hd_qam64"] = air_b_hd(p_b, c64.m)
    # mismatched receiver: Euclidean metric with the self-estimated variance,
    # which absorbs the rotation residual
    g64 = gaussian_q(estimate_sigma2(tr64))
    out["air_s_qam64_gaussian"], out["air_b_qam64_gaussian"] = air_pair(tr64, g64)
    pn64 = pn_matched_q(st2, sz64, order)
    out["air_s_qam64_pn_matched"], out["air_b_qam64_pn_matched"] = air_pair(tr64, pn64)

    c256 = shape_maxwell_boltzmann(build_square_qam(256), payload["shaping_entropy"])
    h_s = c256.entropy_bits
    sz256 = scale_snr(c256, snr_db)
    tr256 = simulate(c256, ChannelSpec("pn-awgn", sz256, st2, payload["seed256"]), n)
    for tag, metric in (
        ("gaussian", gaussian_q(estimate_sigma2(tr256))),
        ("pn_matched", pn_matched_q(st2, sz256, order)),
    ):
        lv = compute_lvalues(tr256, metric, clamp)
        asi_value = asi(build_lvalue_histogram(lv, hist_spec))
        out[f"preber_ps_ps256_{tag}"] = preber_ps(lv)
        out[f"air_b_ps_ps256_{tag}"] = air_b_ps(h_s, asi_value, c256.m)
    return snr_db, out


def cmd_fig2(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    snrs = _parse_snr_range(args.snr_range)
    n = 100_000 if args.quick else args.n
    if args.workers < 1:
        raise ConfigurationError("--workers must be >= 1")
    payloads = [
        {
            "snr_db": snr,
            "n": n,
            "sigma_theta2": args.sigma_theta2,
            "shaping_entropy": args.shaping_entropy,
            "quadrature_order": args.quadrature_order,
            "bins": args.bins,
            "delta": args.delta,
            "clamp": args.clamp,
            "seed64": args.seed + i,
            "seed256": args.seed + 100_000 + i,
        }
        for i, snr in enumerate(snrs)
    ]
    if args.workers == 1:
        results = []
        for p in payloads:
            results.append(_fig2_point(p))
            print(f"fig2: snr_db={p['snr_db']:g} done", file=sys.stderr)
    else:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=args.workers, mp_context=ctx) as pool:
            results = list(pool.map(_fig2_point, payloads))
    curves: dict[str, list[tuple[float, float]]] = {name: [] for name in FIG2_CURVES}
    for snr, values in results:
        for name in FIG2_CURVES:
            curves[name].append((snr, values[name]))
    for name in FIG2_CURVES:
        with open(out_dir / f"{name}.csv", "w", encoding="ascii", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["snr_db", "value"])
            for snr, value in curves[name]:
                writer.writerow([repr(snr), repr(value)])
    print(f"wrote {len(FIG2_CURVES)} curve files ({len(snrs)} points each) to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefec",
        description="Pre-FEC performance metrics from symbol traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="simulate a channel and write a trace file")
    g.add_argument("--constellation", required=True, help="qam<M> or pam<M>")
    g.add_argument("--shaping-entropy", type=float, default=None, help="Maxwell-Boltzmann target entropy in bits")
    g.add_argument("--channel", choices=["awgn", "pn-awgn"], default="awgn")
    g.add_argument("--snr-db", type=float, default=None)
    g.add_argument("--sigma-z2", type=float, default=None, help="per-dimension noise variance, alternative to --snr-db")
    g.add_argument("--sigma-theta2", type=float, default=0.0, help="phase noise variance in rad^2 (pn-awgn)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("eval", help="compute metrics from a trace file")
    e.add_argument("--trace", required=True)
    e.add_argument("--metrics", default="all", help=f"comma list from: {', '.join(ALL_METRICS)}, or all")
    e.add_argument("--q", choices=["gaussian", "pn-matched"], default="gaussian")
    e.add_argument("--sigma2", default="auto", help="metric variance: auto or a number")
    e.add_argument("--sigma-theta2", type=float, default=None)
    e.add_argument("--quadrature-order", type=int, default=DEFAULT_QUADRATURE_ORDER)
    e.add_argument("--bins", type=int, default=32)
    e.add_argument("--delta", type=float, default=1.0)
    e.add_argument("--clamp", type=float, default=LLR_CLAMP_DEFAULT)
    e.add_argument("--out", default=None, help="report CSV path (stdout if omitted)")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("sweep", help="simulate and evaluate across an SNR range")
    s.add_argument("--constellation", required=True)
    s.add_argument("--shaping-entropy", type=float, default=None)
    s.add_argument("--channel", choices=["awgn", "pn-awgn"], default="awgn")
    s.add_argument("--snr-range", required=True, help="start:stop:step in dB, stop inclusive")
    s.add_argument("--sigma-theta2", type=float, default=0.0)
    s.add_argument("--metrics", default="all")
    s.add_argument("--q", choices=["gaussian", "pn-matched"], default="gaussian")
    s.add_argument("--sigma2", default="auto")
    s.add_argument("--quadrature-order", type=int, default=DEFAULT_QUADRATURE_ORDER)
    s.add_argument("--bins", type=int, default=32)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--clamp", type=float, default=LLR_CLAMP_DEFAULT)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1, help="parallel SNR-point processes")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("fig2", help="emit the standard curve set over SNR")
    f.add_argument("--out-dir", required=True)
    f.add_argument("--n", type=int, default=1_000_000)
    f.add_argument("--quick", action="store_true", help="shortcut for --n 100000")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--snr-range", default="5:30:1")
    f.add_argument("--sigma-theta2", type=float, default=0.01)
    f.add_argument("--shaping-entropy", type=float, default=6.3)
    f.add_argument("--quadrature-order", type=int, default=DEFAULT_QUADRATURE_ORDER)
    f.add_argument("--bins", type=int, default=32)
    f.add_argument("--delta", type=float, default=1.0)
    f.add_argument("--clamp", type=float, default=LLR_CLAMP_DEFAULT)
    f.add_argument("--workers", type=int, default=1)
    f.set_defaults(func=cmd_fig2)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (TraceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PrefecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
