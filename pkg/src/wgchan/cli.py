"""Command-line harness: Weingarten tables, exact moments, minimizer tables,
channel simulation, exact-vs-MC-vs-theory comparison, and entropy sweeps.

Output is CSV (default, schema tagged `# wgchan-schema v1`, rows streamed as
they are produced) or JSON (one document with config, rows, schema_version).
Floats are printed with 17 significant digits so they round-trip exactly.
Exit codes: 0 success, 1 reference-table mismatch, 2 invalid input, 3
strict-mode statistical failure.

Seeding: a command with seed S runs trial t on the stream
``numpy.random.default_rng([S, t])`` (ensemble commands) or on the single
sequential stream ``default_rng(S)`` (batched moment estimates), so adding
trials extends a sweep without reshuffling earlier trials.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import freeprob, moments, montecarlo
from .moments import RegimeParams, as_fraction
from .montecarlo import ChannelSpec
from .weingarten import wg_exact

SCHEMA_VERSION = "wgchan-schema v1"

COMPARE_COLUMNS = ["p", "exact", "mc_mean", "mc_stderr", "theory", "z_exact", "z_theory"]


class CliError(Exception):
    """Invalid input; maps to exit code 2 with a diagnostic."""


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_value(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


class Writer:
    def __init__(self, columns: list[str], fmt: str, out, config: dict):
        self.columns = columns
        self.fmt = fmt
        self.out = out
        self.config = config
        self.rows: list[dict] = []
        if fmt == "csv":
            self.out.write(f"# {SCHEMA_VERSION}\n")
            self.out.write(",".join(columns) + "\n")
            self.out.flush()

    def row(self, values: dict) -> None:
        if self.fmt == "csv":
            self.out.write(",".join(_fmt(values.get(col)) for col in self.columns) + "\n")
            self.out.flush()
        else:
            self.rows.append({col: _json_value(values.get(col)) for col in self.columns})

    def close(self) -> None:
        if self.fmt == "json":
            doc = {
                "schema_version": SCHEMA_VERSION,
                "config": self.config,
                "rows": self.rows,
            }
            json.dump(doc, self.out, indent=2)
            self.out.write("\n")
            self.out.flush()


def _open_writer(args, columns: list[str], config: dict):
    out = sys.stdout if args.out is None else open(args.out, "w")
    return Writer(columns, args.format, out, config), out is not sys.stdout


def _parse_d(text: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError as exc:
        raise CliError(f"cannot parse d={text!r} as a rational number") from exc


def _spec_for_regime(n: int, c: Fraction, d: Fraction, t: Fraction | None, flavor: str) -> ChannelSpec:
    if d == 0:
        if c.denominator != 1:
            raise CliError("d=0 needs an integer ancilla dimension c")
        k = int(c)
    else:
        k = round(float(c) * float(n) ** float(d))
    if k < 1:
        raise CliError(f"regime gives ancilla dimension k={k} < 1")
    if t is None:
        m = n
    else:
        m = round(float(t) * n * k)
        if m < 1 or (n * k) % m != 0:
            raise CliError(f"t={t} gives input dimension m={m} not dividing nk={n * k}")
    return ChannelSpec(n=n, k=k, m=m, flavor=flavor)


# ---------------------------------------------------------------------------
# commands


def cmd_wg(args) -> int:
    if args.n < args.p:
        raise CliError(f"n < p ({args.n} < {args.p}): Weingarten table undefined")
    table = wg_exact(args.n, args.p)
    config = {"command": "wg", "n": args.n, "p": args.p}
    writer, close_file = _open_writer(args, ["cycle_type", "wg", "wg_float"], config)
    try:
        for ct in sorted(table.values, key=lambda c: (-c.num_cycles, c.parts)):
            val = table.values[ct]
            writer.row({"cycle_type": str(ct), "wg": val, "wg_float": float(val)})
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    return 0


def cmd_exact_moments(args) -> int:
    m = args.n if args.m is None else args.m
    config = {
        "command": "exact-moments",
        "n": args.n,
        "k": args.k,
        "m": m,
        "p_max": args.p_max,
        "pinched": args.pinched,
    }
    writer, close_file = _open_writer(args, ["p", "exact", "exact_float"], config)
    try:
        for p in range(1, args.p_max + 1):
            try:
                if args.pinched:
                    value = moments.exact_moment_pinched(p, args.n, args.k)
                else:
                    value = moments.exact_moment_conjugate(p, args.n, args.k, m)
            except ValueError as exc:
                raise CliError(str(exc)) from exc
            writer.row({"p": p, "exact": value, "exact_float": float(value)})
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    return 0


def _render_minimizers(report) -> str:
    names = []
    gamma, delta, gtilde = moments.make_gamma_delta(report.p)
    ident = moments.identity(2 * report.p)
    labels = {ident: "id", delta: "delta", gamma: "gamma", gtilde: "gamma_tilde"}
    for entry in report.minimizers:
        if isinstance(entry, tuple):
            names.append("(" + " ".join(_label_one(e, labels) for e in entry) + ")")
        else:
            names.append(_label_one(entry, labels))
    return " ".join(names)


def _label_one(entry, labels) -> str:
    try:
        return labels.get(entry, str(getattr(entry, "images", entry)))
    except TypeError:
        return str(entry)


def cmd_minimize(args) -> int:
    if args.p > 3:
        raise CliError(f"p={args.p} exceeds the pair-search cap 3")
    d_values = [_parse_d(text) for text in args.d]
    config = {"command": "minimize", "p": args.p, "d": [str(d) for d in d_values]}
    columns = ["problem", "d", "minimum", "n_minimizers", "minimizers"]
    writer, close_file = _open_writer(args, columns, config)
    mismatches = []
    try:
        for d in d_values:
            reports = [moments.minimize_S2(args.p, d), moments.minimize_S1(args.p, d)]
            if 0 < d < 1 or 1 < d < 2:
                reports.append(moments.minimize_S_pinched(args.p, d))
            reports.append(moments.minimize_S(args.p, d))
            for report in reports:
                writer.row(
                    {
                        "problem": report.problem,
                        "d": str(d),
                        "minimum": report.minimum,
                        "n_minimizers": len(report.minimizers),
                        "minimizers": _render_minimizers(report),
                    }
                )
            if args.check_tables:
                expected_s2 = moments.reference_S2(args.p, d)
                expected_s1 = moments.reference_S1(args.p, d)
                got_s2 = (reports[0].minimum, reports[0].minimizer_set())
                got_s1 = (reports[1].minimum, reports[1].minimizer_set())
                if got_s2 != expected_s2:
                    mismatches.append(f"S2 mismatch at p={args.p}, d={d}")
                if got_s1 != expected_s1:
                    mismatches.append(f"S1 mismatch at p={args.p}, d={d}")
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    if mismatches:
        for line in mismatches:
            print(line, file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args) -> int:
    spec = _spec_for_regime(args.n, as_fraction(args.c), _parse_d(args.d), _parse_t(args.t), args.flavor)
    config = {
        "command": "simulate",
        "flavor": spec.flavor,
        "n": spec.n,
        "k": spec.k,
        "m": spec.m,
        "trials": args.trials,
        "seed": args.seed,
    }
    columns = [
        "row",
        "trial",
        "lambda1",
        "entropy",
        "bulk_mean",
        "bulk_std",
        "bulk_m1",
        "bulk_m2",
        "bulk_m3",
        "bulk_m4",
    ]
    stat_cols = columns[2:]
    writer, close_file = _open_writer(args, columns, config)
    try:
        collected: dict[str, list[float]] = {}
        for t, stats in montecarlo.iter_trial_statistics(
            spec,
            args.trials,
            args.seed,
            scale=args.scale,
            drop_largest=args.drop_largest,
            threads=args.threads,
        ):
            stats = dict(stats)
            stats["bulk_mean"] = stats.get("bulk_m1")
            row = {"row": "trial", "trial": t}
            for col in stat_cols:
                row[col] = stats.get(col)
                if stats.get(col) is not None:
                    collected.setdefault(col, []).append(stats[col])
            writer.row(row)
        mean_row = {"row": "mean", "trial": None}
        se_row = {"row": "stderr", "trial": None}
        for col in stat_cols:
            vals = collected.get(col)
            if not vals:
                continue
            mean = sum(vals) / len(vals)
            mean_row[col] = mean
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                se_row[col] = math.sqrt(var / len(vals))
        writer.row(mean_row)
        writer.row(se_row)
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    return 0


def _parse_t(text):
    if text is None:
        return None
    return Fraction(text)


def cmd_compare(args) -> int:
    m = args.n if args.m is None else args.m
    spec = ChannelSpec(n=args.n, k=args.k, m=m, flavor=args.flavor)
    config = {
        "command": "compare",
        "flavor": spec.flavor,
        "n": spec.n,
        "k": spec.k,
        "m": spec.m,
        "p_max": args.p_max,
        "trials": args.trials,
        "seed": args.seed,
        "pinched": args.pinched,
    }
    if args.pinched and spec.flavor != "conjugate":
        raise CliError("pinched comparison is defined for the conjugate flavor")
    writer, close_file = _open_writer(args, COMPARE_COLUMNS, config)
    worst = 0.0
    try:
        ensemble = montecarlo.moment_ensemble(
            spec, args.p_max, args.trials, args.seed, pinched=args.pinched
        )
        c = Fraction(spec.k, spec.n)
        regime = RegimeParams(c=c, d=Fraction(1), b=Fraction(spec.m, spec.n))
        for p in range(1, args.p_max + 1):
            mc_mean = ensemble.mean(p, pinched=args.pinched) * args.rescale
            mc_stderr = ensemble.stderr(p, pinched=args.pinched) * args.rescale
            exact = None
            if spec.flavor == "conjugate":
                try:
                    if args.pinched:
                        exact = moments.exact_moment_pinched(p, spec.n, spec.k)
                    else:
                        exact = moments.exact_moment_conjugate(p, spec.n, spec.k, spec.m)
                except ValueError:
                    exact = None
            theory = _theory_moment(spec, regime, p, args.pinched)
            z_exact = _z(mc_mean, mc_stderr, float(exact)) if exact is not None else None
            z_theory = _z(mc_mean, mc_stderr, theory) if theory is not None else None
            writer.row(
                {
                    "p": p,
                    "exact": exact,
                    "mc_mean": mc_mean,
                    "mc_stderr": mc_stderr,
                    "theory": theory,
                    "z_exact": z_exact,
                    "z_theory": z_theory,
                }
            )
            gate = z_exact if z_exact is not None else z_theory
            if gate is not None:
                worst = max(worst, abs(gate))
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    if args.strict and worst > args.z_threshold:
        print(f"strict mode: worst |z| = {worst:.3g} > {args.z_threshold}", file=sys.stderr)
        return 3
    return 0


def _theory_moment(spec: ChannelSpec, regime: RegimeParams, p: int, pinched: bool) -> float | None:
    if pinched or spec.flavor == "independent":
        # spectrum ~ free Poisson of parameter c^2 at scale c^2 n^2 = k^2:
        # E tr(Z^p) ~ n^2 * moment / k^(2p)
        c2 = (spec.k / spec.n) ** 2
        mp = float(freeprob.mp_moment(c2, p))
        return mp * spec.n**2 / float(spec.k) ** (2 * p)
    pred = moments.asymptotic_moment_conjugate(p, regime)
    return pred.value(spec.n, spec.k)


def _z(mean: float, stderr: float, reference: float) -> float:
    # a statistic that is deterministic up to roundoff (like tr Z = 1) has a
    # vanishing stderr; grade it by absolute closeness instead
    if stderr < 1e-13 * max(1.0, abs(reference)):
        return 0.0 if abs(mean - reference) < 1e-10 * max(1.0, abs(reference)) else float("inf")
    return (mean - reference) / stderr


def cmd_entropy(args) -> int:
    d = _parse_d(args.d)
    c = as_fraction(args.c)
    t = _parse_t(args.t)
    n_list = [int(x) for x in args.n_list.split(",")]
    config = {
        "command": "entropy",
        "d": str(d),
        "c": str(c),
        "t": None if t is None else str(t),
        "n_list": n_list,
        "trials": args.trials,
        "seed": args.seed,
    }
    columns = [
        "n",
        "k",
        "m",
        "h_mean",
        "h_stderr",
        "prediction",
        "naive_bound",
        "defect_mean",
        "defect_stderr",
        "predicted_defect",
    ]
    writer, close_file = _open_writer(args, columns, config)
    try:
        regime = RegimeParams(c=c, d=d, t=t)
        for n in n_list:
            spec = _spec_for_regime(n, c, d, t, "conjugate")
            report = montecarlo.run_ensemble(
                spec, args.trials, args.seed, full_spectrum=True, threads=args.threads
            )
            if "entropy" not in report.per_trial:
                raise CliError("entropy requires the full-spectrum path")
            prediction = freeprob.entropy_prediction(regime, n, spec.k)
            h_mean = report.mean("entropy")
            h_se = report.stderr("entropy")
            cap = 2 * math.log(min(spec.k, n))
            writer.row(
                {
                    "n": n,
                    "k": spec.k,
                    "m": spec.m,
                    "h_mean": h_mean,
                    "h_stderr": h_se,
                    "prediction": prediction.leading,
                    "naive_bound": freeprob.naive_bound(spec.k) if spec.k >= 2 else None,
                    "defect_mean": cap - h_mean,
                    "defect_stderr": h_se,
                    "predicted_defect": prediction.defect if prediction.defect_known else None,
                }
            )
    finally:
        writer.close()
        if close_file:
            writer.out.close()
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wgchan",
        description="Weingarten calculus and random-quantum-channel output spectra",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p_wg = sub.add_parser("wg", help="exact Weingarten table for (n, p)")
    p_wg.add_argument("--n", type=int, required=True)
    p_wg.add_argument("--p", type=int, required=True)
    add_output(p_wg)
    p_wg.set_defaults(func=cmd_wg)

    p_em = sub.add_parser("exact-moments", help="exact E tr(Z^p) by permutation sums")
    p_em.add_argument("--n", type=int, required=True)
    p_em.add_argument("--k", type=int, required=True)
    p_em.add_argument("--m", type=int, default=None)
    p_em.add_argument("--p-max", type=int, default=2)
    p_em.add_argument("--pinched", action="store_true")
    add_output(p_em)
    p_em.set_defaults(func=cmd_exact_moments)

    p_min = sub.add_parser("minimize", help="exhaustive exponent minimizations")
    p_min.add_argument("--p", type=int, required=True)
    p_min.add_argument("--d", action="append", required=True, help="rational, e.g. 1 or 4/3 (repeatable)")
    p_min.add_argument("--check-tables", action="store_true")
    add_output(p_min)
    p_min.set_defaults(func=cmd_minimize)

    p_sim = sub.add_parser("simulate", help="sample product-channel outputs")
    p_sim.add_argument("--flavor", choices=["conjugate", "independent"], default="conjugate")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--c", default="1", help="ancilla ratio/coefficient (rational)")
    p_sim.add_argument("--d", default="1", help="ancilla growth exponent (rational)")
    p_sim.add_argument("--t", default=None, help="Bell fraction m = t n k (rational)")
    p_sim.add_argument("--trials", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--scale", type=float, default=None)
    p_sim.add_argument("--drop-largest", type=int, default=None)
    p_sim.add_argument("--threads", type=int, default=1)
    add_output(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="exact vs Monte Carlo vs theory moments")
    p_cmp.add_argument("--flavor", choices=["conjugate", "independent"], default="conjugate")
    p_cmp.add_argument("--n", type=int, required=True)
    p_cmp.add_argument("--k", type=int, required=True)
    p_cmp.add_argument("--m", type=int, default=None)
    p_cmp.add_argument("--p-max", type=int, default=2)
    p_cmp.add_argument("--trials", type=int, required=True)
    p_cmp.add_argument("--seed", type=int, required=True)
    p_cmp.add_argument("--pinched", action="store_true")
    p_cmp.add_argument("--strict", action="store_true")
    p_cmp.add_argument("--z-threshold", type=float, default=4.0)
    p_cmp.add_argument(
        "--rescale",
        type=float,
        default=1.0,
        help="multiply MC estimates (diagnostic knob; use to exercise --strict)",
    )
    add_output(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_ent = sub.add_parser("entropy", help="output entropy vs prediction vs naive bound")
    p_ent.add_argument("--d", required=True)
    p_ent.add_argument("--c", required=True)
    p_ent.add_argument("--t", default=None)
    p_ent.add_argument("--n-list", required=True, help="comma-separated output dimensions")
    p_ent.add_argument("--trials", type=int, required=True)
    p_ent.add_argument("--seed", type=int, required=True)
    p_ent.add_argument("--threads", type=int, default=1)
    add_output(p_ent)
    p_ent.set_defaults(func=cmd_entropy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
