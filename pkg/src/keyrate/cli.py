"""Command-line front-end: build tables, sweep conditions, verify the oracle.

Primary outputs (documents, CSV) are deterministic for fixed flags and
seed; floats are written with 12 significant digits. Exit codes: 0 on
success, 1 when a verification fails, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import ad, intrinsic, paper_dists, quantum
from .errors import KeyrateError
from .probdist import (
    TripartiteDistribution,
    channel_to_document,
    distribution_from_document,
    distribution_to_document,
    load_document,
    save_document,
)

FMT = "{:.12g}"


def _fmt(v) -> str:
    return FMT.format(float(v))


def _parse_unit(parser, name, value):
    if value is None:
        parser.error(f"--{name} is required for this family")
    if not 0.0 <= value <= 1.0:
        parser.error(f"--{name} must lie in [0, 1], got {value}")
    return value


def _load_dist(path) -> TripartiteDistribution:
    return distribution_from_document(load_document(path))


def _emit_distribution(dist: TripartiteDistribution, out) -> None:
    doc = distribution_to_document(dist)
    checksum = _fmt(dist.probabilities.sum())
    if out:
        save_document(doc, out)
        print(f"wrote {out} ({len(doc['probabilities'])} support triples, checksum {checksum})")
    else:
        import json

        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
        print(f"checksum {checksum}", file=sys.stderr)


def cmd_dist(args) -> int:
    family = args.family
    p = q = None
    if family in ("werner", "werner-bin", "activated"):
        p = _parse_unit(args.parser, "p", args.p)
    if family in ("symmetric", "symmetric-bin", "activated"):
        q = _parse_unit(args.parser, "q", args.q)
    _emit_distribution(paper_dists.build_family(family, p=p, q=q), args.out)
    return 0


def _infer_family(dist: TripartiteDistribution) -> str:
    if dist.z_alphabet == paper_dists.WERNER_EVE:
        return "werner"
    if dist.z_alphabet == paper_dists.SYMMETRIC_EVE:
        return "symmetric"
    raise KeyrateError("cannot infer the family of this distribution")


def cmd_binaryze(args) -> int:
    dist = _load_dist(args.dist)
    family = args.family or _infer_family(dist)
    if family == "werner":
        out = paper_dists.binaryze_werner(dist, discarded_symbol=args.discard)
    else:
        out = paper_dists.binaryze_symmetric(dist)
    _emit_distribution(out, args.out)
    return 0


def cmd_activate(args) -> int:
    p_dist = _load_dist(args.p_dist)
    q_dist = _load_dist(args.q_dist)
    _emit_distribution(paper_dists.activate(p_dist, q_dist, discarded_symbol=args.discard), args.out)
    return 0


def cmd_intrinsic(args) -> int:
    dist = _load_dist(args.dist)
    kwargs = {} if args.tol is None else {"tol": args.tol}
    result = intrinsic.minimize_intrinsic(dist, starts=args.starts, seed=args.seed, **kwargs)
    print(f"intrinsic_upper_bound {_fmt(result.value)}")
    print(f"starts {result.starts}")
    print(f"converged {str(result.converged).lower()}")
    if args.out:
        save_document(channel_to_document(result.best_channel), args.out)
        print(f"wrote best channel to {args.out}")
    return 0


def cmd_threshold(args) -> int:
    root = ad.threshold(args.family, fixed=args.q, lo=args.lo, hi=args.hi, tol=args.tol)
    print(_fmt(root))
    return 0


SWEEP_COLUMNS = ("family", "p", "q", "beta", "bob_ratio", "eve_rate", "condition_ratio", "distillable")


def _sweep_rows(family, grid, fixed_q):
    rows = []
    for theta in grid:
        if family == "werner":
            rep = ad.ad_report("werner", p=theta)
        elif family == "symmetric":
            rep = ad.ad_report("symmetric", q=theta)
        else:
            rep = ad.ad_report("activated", p=theta, q=fixed_q)
        row = {
            "family": family,
            "p": "" if rep.p is None else _fmt(rep.p),
            "q": "" if rep.q is None else _fmt(rep.q),
            "beta": _fmt(rep.beta),
            "bob_ratio": _fmt(rep.bob_ratio),
            "eve_rate": _fmt(rep.eve_rate),
            "condition_ratio": _fmt(rep.condition_ratio),
            "distillable": "1" if rep.distillable else "0",
        }
        if family == "werner":
            try:
                row["intrinsic_analytic"] = _fmt(intrinsic.analytic_werner_intrinsic(theta))
            except KeyrateError:
                row["intrinsic_analytic"] = "nan"
        rows.append(row)
    return rows


def _write_sweep_csv(path, family, rows, fixed_q):
    columns = SWEEP_COLUMNS + (("intrinsic_analytic",) if family == "werner" else ())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# keyrate sweep family={family}")
        if fixed_q is not None:
            fh.write(f" fixed q={_fmt(fixed_q)}")
        fh.write("\n# distillable: 1 when condition_ratio < 1\n")
        fh.write(f"# gnuplot: plot '{path}' using 2:7 with lines\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row[c] for c in columns) + "\n")


def _plot_sweep(png_path, family, rows):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    param_key = "q" if family == "symmetric" else "p"
    xs = [float(r[param_key]) for r in rows]
    ratio = [float(r["condition_ratio"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xs, ratio, label=r"$R_{\beta\epsilon}$", color="tab:blue")
    ax.axhline(1.0, color="0.5", linestyle="--", linewidth=1)
    ax.set_xlabel(param_key)
    ax.set_ylabel("Bob/Eve condition ratio")
    ax.set_title(f"{family} family: distillation condition")
    if family == "werner":
        twin = ax.twinx()
        intr = [float(r["intrinsic_analytic"]) for r in rows]
        twin.plot(xs, intr, label="intrinsic (closed form)", color="tab:orange")
        twin.set_ylabel("intrinsic information [bits]")
        twin.legend(loc="upper right")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def cmd_sweep(args) -> int:
    family = args.family
    if args.steps < 2:
        args.parser.error("--steps must be at least 2")
    if not args.start < args.stop:
        args.parser.error("--from must be strictly below --to")
    fixed_q = None
    if family == "activated":
        fixed_q = args.q if args.q is not None else 0.2
    grid = np.linspace(args.start, args.stop, args.steps)
    rows = _sweep_rows(family, grid, fixed_q)
    out = args.out or f"sweep_{family}.csv"
    _write_sweep_csv(out, family, rows, fixed_q)
    print(f"wrote {out} ({len(rows)} rows)")
    if args.plot:
        png = args.plot if isinstance(args.plot, str) else str(out).rsplit(".", 1)[0] + ".png"
        _plot_sweep(png, family, rows)
        print(f"wrote {png}")
    return 0


def cmd_simulate(args) -> int:
    dist = _load_dist(args.dist)
    outcome = ad.simulate_ad(
        dist, block_size=args.block_size, trials=args.trials, seed=args.seed
    )
    print(f"block_size {outcome.block_size}")
    print(f"raw_blocks {outcome.trials}")
    print(f"accepted {outcome.accepted}")
    print(f"bob_error_rate {_fmt(outcome.bob_error_rate)} se {_fmt(outcome.bob_error_se)}")
    print(f"eve_error_rate {_fmt(outcome.eve_error_rate)} se {_fmt(outcome.eve_error_se)}")
    print(
        f"eve_error_rate_given_correct {_fmt(outcome.eve_error_rate_given_correct)}"
        f" se {_fmt(outcome.eve_error_se_given_correct)}"
    )
    if args.out:
        save_document(
            {
                "block_size": outcome.block_size,
                "raw_blocks": outcome.trials,
                "accepted": outcome.accepted,
                "bob_errors": outcome.bob_errors,
                "eve_errors": outcome.eve_errors,
                "eve_errors_given_correct": outcome.eve_errors_given_correct,
                "bob_error_rate": float(_fmt(outcome.bob_error_rate)),
                "eve_error_rate": float(_fmt(outcome.eve_error_rate)),
                "eve_error_rate_given_correct": float(_fmt(outcome.eve_error_rate_given_correct)),
                "bob_error_se": float(_fmt(outcome.bob_error_se)),
                "eve_error_se": float(_fmt(outcome.eve_error_se)),
                "eve_error_se_given_correct": float(_fmt(outcome.eve_error_se_given_correct)),
            },
            args.out,
        )
        print(f"wrote {args.out}")
    return 0


def _parse_grid(text, default):
    if not text:
        return list(default)
    return [float(v) for v in text.split(",") if v.strip()]


def _verify_werner_ppt(grid, failures):
    for p in grid:
        _, is_ppt = quantum.ppt_check(quantum.werner_state(p), (3, 3))
        ok = is_ppt == (p <= 0.5)
        _report(f"werner PPT p={_fmt(p)}: ppt={is_ppt}", ok, failures)


def _verify_symmetric_ppt(grid, failures):
    for q in grid:
        _, is_ppt = quantum.ppt_check(quantum.symmetric_state(q), (9, 9))
        ok = is_ppt == (q <= 0.2)
        _report(f"symmetric PPT q={_fmt(q)}: ppt={is_ppt}", ok, failures)


def _verify_werner_one_distillable(failures):
    lo, hi = 0.5, 0.7
    while hi - lo > 1e-7:
        mid = 0.5 * (lo + hi)
        if quantum.werner_one_distillable(mid):
            hi = mid
        else:
            lo = mid
    root = 0.5 * (hi + lo)
    _report(f"werner 1-distillability threshold {_fmt(root)} (expect 0.6)", abs(root - 0.6) < 1e-6, failures)


def _verify_symmetric_one_distillable(grid, failures):
    for q in grid:
        verdict = quantum.symmetric_one_distillable(q)
        ok = verdict == (q > 0.2)
        _report(f"symmetric 1-distillable q={_fmt(q)}: {verdict}", ok, failures)


def _verify_activation(grid, failures):
    for p in grid:
        overlap, distillable = quantum.quantum_activation(p, 0.2)
        ok = distillable == (p > 0.5)
        _report(f"activation p={_fmt(p)}: F={_fmt(overlap)} distillable={distillable}", ok, failures)
    overlap, _ = quantum.quantum_activation(0.5, 0.2)
    _report(f"activation boundary F(0.5)={_fmt(overlap)} (expect 1/3)", abs(overlap - 1 / 3) < 1e-9, failures)


def _verify_derivation(failures):
    worst = 0.0
    for p in (0.5, 0.6, 0.75, 0.9, 1.0):
        err = np.abs(
            quantum.derive_distribution(quantum.werner_state(p)).probabilities
            - paper_dists.werner_distribution(p).probabilities
        ).max()
        worst = max(worst, err)
    for q in (0.1, 0.2, 0.3):
        err = np.abs(
            quantum.derive_distribution(quantum.symmetric_state(q)).probabilities
            - paper_dists.symmetric_distribution(q).probabilities
        ).max()
        worst = max(worst, err)
    _report(f"derive vs closed form: max entrywise error {worst:.3e}", worst < 1e-9, failures)


def _report(message, ok, failures):
    print(("PASS " if ok else "FAIL ") + message)
    if not ok:
        failures.append(message)


def cmd_verify_quantum(args) -> int:
    failures = []
    families = args.family.split(",") if args.family else ["werner", "symmetric", "activation", "derive"]
    p_grid = _parse_grid(args.grid, (0.3, 0.45, 0.5, 0.55, 0.6, 0.75, 0.9))
    q_grid = _parse_grid(args.grid, (0.1, 0.15, 0.2, 0.25, 0.3))
    if "werner" in families:
        _verify_werner_ppt(p_grid, failures)
        _verify_werner_one_distillable(failures)
    if "symmetric" in families:
        _verify_symmetric_ppt(q_grid, failures)
        _verify_symmetric_one_distillable(q_grid, failures)
    if "activation" in families:
        _verify_activation(p_grid, failures)
    if "derive" in families:
        _verify_derivation(failures)
    print(f"{'OK' if not failures else 'FAILED'}: {len(failures)} failing checks")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keyrate",
        description="Secrecy analysis of Werner/symmetric tripartite distributions.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed for all randomness")
    common.add_argument("--out", type=str, default=None, help="output path")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance")

    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", parents=[common], help="build a closed-form distribution")
    p_dist.add_argument("family", choices=paper_dists._FAMILIES)
    p_dist.add_argument("--p", type=float, default=None, help="Werner mixing weight in [0, 1]")
    p_dist.add_argument("--q", type=float, default=None, help="symmetric mixing weight in [0, 1]")
    p_dist.set_defaults(func=cmd_dist)

    p_bin = sub.add_parser("binaryze", parents=[common], help="binaryze a stored distribution")
    p_bin.add_argument("dist", help="distribution document")
    p_bin.add_argument("--family", choices=("werner", "symmetric"), default=None)
    p_bin.add_argument("--discard", default="2", help="honest symbol to discard (werner)")
    p_bin.set_defaults(func=cmd_binaryze)

    p_act = sub.add_parser("activate", parents=[common], help="combine two stored distributions")
    p_act.add_argument("p_dist", help="Werner-family document")
    p_act.add_argument("q_dist", help="symmetric-family document")
    p_act.add_argument("--discard", default="2", help="honest symbol to discard after filtering")
    p_act.set_defaults(func=cmd_activate)

    p_intr = sub.add_parser("intrinsic", parents=[common], help="upper-bound the intrinsic information")
    p_intr.add_argument("dist", help="distribution document")
    p_intr.add_argument("--starts", type=int, default=64, help="optimizer restarts")
    p_intr.set_defaults(func=cmd_intrinsic)

    p_thr = sub.add_parser("threshold", parents=[common], help="solve the distillation threshold")
    p_thr.add_argument("family", choices=ad.FAMILIES)
    p_thr.add_argument("--q", type=float, default=None, help="fixed q for the activated family")
    p_thr.add_argument("--lo", type=float, default=None)
    p_thr.add_argument("--hi", type=float, default=None)
    p_thr.set_defaults(func=cmd_threshold)

    p_sweep = sub.add_parser("sweep", parents=[common], help="tabulate the condition over a grid")
    p_sweep.add_argument("--family", choices=ad.FAMILIES, required=True)
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--q", type=float, default=None, help="fixed q for the activated family")
    p_sweep.add_argument(
        "--plot",
        nargs="?",
        const=True,
        default=True,
        help="render a figure next to the CSV (optional explicit path)",
    )
    p_sweep.add_argument("--no-plot", dest="plot", action="store_false", help="skip the figure")
    p_sweep.set_defaults(func=cmd_sweep)

    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo advantage distillation")
    p_sim.add_argument("dist", help="two-bit distribution document")
    p_sim.add_argument("--block-size", type=int, required=True)
    p_sim.add_argument("--trials", type=int, required=True, help="accepted blocks to collect")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify-quantum", parents=[common], help="run the quantum landmark suite")
    p_ver.add_argument("--family", type=str, default=None, help="comma list: werner,symmetric,activation,derive")
    p_ver.add_argument("--grid", type=str, default=None, help="comma list of parameter values")
    p_ver.set_defaults(func=cmd_verify_quantum)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser
    try:
        return args.func(args)
    except KeyrateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
