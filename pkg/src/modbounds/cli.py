"""Command-line entry point.

Subcommands wire ingestion -> estimation -> bounds / sensitivity /
inference / bayes / simulate, writing machine-readable JSON or CSV.
Every output embeds the tool version, the resolved configuration, the
seed (for randomized subcommands), and a digest of the tabulated input,
so runs can be reproduced exactly.  Exit codes: 0 success, 1 usage
error, 2 data or model error.
"""

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__, plots
from .bayes import ModelSpec, PriorConfig, diagnostics, gibbs_run, prior_predictive
from .bounds_closed import (
    BoundInterval,
    Q0Known,
    Q0Optimized,
    attention_bounds,
    monotonicity_bounds,
    monotonicity_bounds_negative,
    pretest_trivial_bounds,
    randomization_bounds_delta,
    stability_bounds,
)
from .data_model import (
    ATTENTION,
    MONO,
    MONO_STABLE,
    RAND,
    AssumptionSet,
    ColumnSchema,
    Design,
    Monotonicity,
    ingest_csv,
    tabulate,
)
from .errors import ModboundsError
from .estimation import cell_probabilities, naive_estimates
from .inference import bootstrap_endpoints, im_ci_from_bootstrap
from .lp_core import DELTA, StrataLpSpec, strata_bounds
from .sensitivity import (
    default_gamma_grid,
    gamma_curve,
    gamma_feasibility_minimum,
    gamma_theta_region,
)
from .simgen import (
    COVARIATE_NAMES,
    Study2Condition,
    dgp_custom,
    run_study1,
    run_study2,
    study1_coefficients,
    study2_coefficients,
)
from .data_model import StrataDistribution

ASSUMPTION_CHOICES = {
    "rand": RAND,
    "mono": MONO,
    "mono+stable": MONO_STABLE,
    "attention": ATTENTION,
}


class UsageError(Exception):
    pass


def _meta(args, digest=None):
    config = {}
    for key, value in sorted(vars(args).items()):
        # execution knobs do not affect results and stay out of the
        # embedded configuration so reruns compare byte-for-byte
        if key in ("func", "threads"):
            continue
        config[key] = value if not isinstance(value, Design) else value.value
    return {
        "tool": "modbounds",
        "version": __version__,
        "config": config,
        "seed": getattr(args, "seed", None),
        "input_digest": digest,
    }


def _write_json(path, payload):
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=_jsonify)
        handle.write("\n")


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Design):
        return obj.value
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_csv(path, rows, fieldnames, meta):
    with open(path, "w", newline="") as handle:
        handle.write("# " + json.dumps(meta, sort_keys=True, default=_jsonify))
        handle.write("\n")
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in fieldnames})


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def _schema_from_args(args):
    labels = {}
    for pair in (args.label_map or "").split(","):
        if not pair:
            continue
        if "=" not in pair:
            raise UsageError(f"--label-map entry {pair!r} is not LABEL=VALUE")
        key, _, value = pair.partition("=")
        if value not in ("0", "1"):
            raise UsageError(f"--label-map value for {key!r} must be 0 or 1")
        labels[key] = int(value)
    x_cols = tuple(c for c in (args.x_cols or "").split(",") if c)
    return ColumnSchema(
        y=args.y_col, t=args.t_col, z=args.z_col, d=args.d_col,
        x=x_cols, labels=labels,
    )


def _load(args):
    if not args.input:
        raise UsageError("--input is required")
    records = ingest_csv(args.input, _schema_from_args(args))
    table = tabulate(records)
    return records, table


def _add_input_flags(parser):
    parser.add_argument("--input", help="CSV file with one row per unit")
    parser.add_argument("--y-col", default="y")
    parser.add_argument("--t-col", default="t")
    parser.add_argument("--z-col", default="z")
    parser.add_argument("--d-col", default="d")
    parser.add_argument(
        "--x-cols", default="", help="comma-separated covariate columns"
    )
    parser.add_argument(
        "--label-map",
        default="",
        help="comma-separated LABEL=0/1 recodings for y/t/z/d cells",
    )


def _add_output_flag(parser, default):
    parser.add_argument("-o", "--output", default=default)
    parser.add_argument(
        "--plot",
        action="store_true",
        help="also render a figure next to the output file",
    )


def _plot_path(output):
    stem, _, _ = output.rpartition(".")
    return (stem or output) + ".png"


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("MODBOUNDS_THREADS")
    return int(env) if env else 1


# -- subcommand implementations ----------------------------------------------


def _cmd_tabulate(args):
    _, table = _load(args)
    payload = {
        "design": table.design.value,
        "n": table.total,
        "counts": [
            {
                "t": t, "z": z, "d": d, "y": y,
                "count": int(table.n[t, z, d, y]),
            }
            for t in (0, 1)
            for z in (0, 1)
            for d in (0, 1)
            for y in (0, 1)
            if table.n[t, z, d, y] > 0
        ],
        "meta": _meta(args, table.digest()),
    }
    _write_json(args.output, payload)
    return 0


def _cmd_estimate(args):
    _, table = _load(args)
    probs = cell_probabilities(table)
    est = naive_estimates(probs)
    payload = {
        "design": table.design.value,
        "estimates": est.to_dict(),
        "cell_probabilities": {
            "p_tzd": np.where(np.isfinite(probs.p_tzd), probs.p_tzd, None).tolist(),
            "q_tz": np.where(np.isfinite(probs.q_tz), probs.q_tz, None).tolist(),
            "p_t": np.where(np.isfinite(probs.p_t), probs.p_t, None).tolist(),
            "q0": probs.q0,
        },
        "meta": _meta(args, table.digest()),
    }
    _write_json(args.output, payload)
    return 0


_Q0_ABSENT = object()


def _parse_q0(value):
    if value is None:
        return _Q0_ABSENT
    if value == "optimized":
        return None
    if value.startswith("known="):
        return float(value.split("=", 1)[1])
    raise UsageError("--q0 must be 'optimized' or 'known=VALUE'")


def _compute_bounds(table, assumptions_name, q0_arg, direction):
    """Closed-form interval for the requested assumption set."""
    probs = cell_probabilities(table)
    if table.design is Design.PRE_ONLY:
        lo, hi = pretest_trivial_bounds("delta")
        return probs, BoundInterval(
            lo, hi, RAND, "delta", Q0Optimized(),
            diagnostics={"note": "pre-test data alone are uninformative"},
        )
    q0_known = _parse_q0(q0_arg)
    if q0_known is _Q0_ABSENT:
        # default: the pre-arm pins Q0 when one exists, else profile it
        q0_known = probs.q0
    if assumptions_name == "rand":
        interval = randomization_bounds_delta(
            float(probs.p_t[1]), float(probs.p_t[0]), q0_known
        )
    elif assumptions_name == "mono":
        mode = Q0Known(q0_known) if q0_known is not None else Q0Optimized()
        fn = (
            monotonicity_bounds
            if direction != "negative"
            else monotonicity_bounds_negative
        )
        interval = fn(probs, mode)
    elif assumptions_name == "mono+stable":
        interval = stability_bounds(probs)
    elif assumptions_name == "attention":
        interval = attention_bounds(
            float(probs.p_t[1]),
            float(probs.p_t[0]),
            float(probs.q_tz[0, 1]),
            float(probs.q_tz[1, 1]),
        )
    else:
        raise UsageError(f"unknown assumption set {assumptions_name!r}")
    return probs, interval


def _cmd_bounds(args):
    records, table = _load(args)
    probs, interval = _compute_bounds(
        table, args.assumptions, args.q0, args.mono_direction
    )
    payload = interval.to_dict()
    payload["design"] = table.design.value
    payload["n"] = table.total
    ci = None
    if args.boot:
        if args.seed is None:
            raise UsageError("--seed is required with --boot")

        def procedure(boot_table):
            return _compute_bounds(
                boot_table, args.assumptions, args.q0, args.mono_direction
            )[1]

        boot = bootstrap_endpoints(
            records, procedure, args.boot, args.seed, stratify=args.stratify_boot
        )
        ci = im_ci_from_bootstrap(interval, boot, table.total, args.alpha)
        payload["ci"] = ci.to_dict()
        payload["ci"]["failed_replicates"] = boot.n_failed
    payload["meta"] = _meta(args, table.digest())
    _write_json(args.output, payload)
    if args.plot:
        plots.save_bounds_figure(
            _plot_path(args.output),
            [(args.assumptions, interval)],
            ci={args.assumptions: ci},
            title=f"Bounds under {args.assumptions}",
        )
    return 0


def _lp_assumptions(name, gamma=None, theta=None):
    base = ASSUMPTION_CHOICES[name]
    return dataclasses.replace(base, gamma=gamma, theta=theta)


def _cmd_sensitivity(args):
    records, table = _load(args)
    probs = cell_probabilities(table)
    base = ASSUMPTION_CHOICES[args.assumptions]
    if args.theta_grid:
        thetas = [float(v) for v in args.theta_grid.split(",")]
        gammas = _gamma_grid_from_args(args, probs)
        region = gamma_theta_region(probs, base, gammas, thetas)
        rows = region.rows()
    else:
        gammas = _gamma_grid_from_args(args, probs)
        curve = gamma_curve(probs, base, gammas)
        rows = curve.rows()
    for row in rows:
        row["ci_lower"] = None
        row["ci_upper"] = None
    if args.boot:
        if args.seed is None:
            raise UsageError("--seed is required with --boot")
        for row in rows:
            if row["lower"] is None:
                continue
            assumptions = dataclasses.replace(
                base, gamma=row["gamma"], theta=row["theta"]
            )

            def procedure(boot_table):
                boot_probs = cell_probabilities(boot_table)
                return strata_bounds(
                    StrataLpSpec(
                        design=boot_probs.design,
                        probs=boot_probs,
                        assumptions=assumptions,
                    )
                )

            boot = bootstrap_endpoints(
                records, procedure, args.boot, args.seed,
                stratify=args.stratify_boot,
            )
            point = BoundInterval(
                row["lower"], row["upper"], assumptions, "delta"
            )
            ci = im_ci_from_bootstrap(point, boot, table.total, args.alpha)
            row["ci_lower"] = ci.ci_lower
            row["ci_upper"] = ci.ci_upper
    meta = _meta(args, table.digest())
    meta["gamma_feasibility_minimum"] = gamma_feasibility_minimum(probs)
    fields = ["gamma", "theta", "lower", "upper", "ci_lower", "ci_upper",
              "informative"]
    _write_csv(args.output, rows, fields, meta)
    if args.plot:
        if args.theta_grid:
            plots.save_region_figure(_plot_path(args.output), region)
        else:
            plots.save_gamma_curve_figure(_plot_path(args.output), rows)
    return 0


def _gamma_grid_from_args(args, probs):
    gmin = gamma_feasibility_minimum(probs)
    if args.gamma_min not in (None, "auto"):
        gmin = float(args.gamma_min)
    if args.gamma_grid:
        return [float(v) for v in args.gamma_grid.split(",")]
    grid = default_gamma_grid(probs, n=args.gamma_points, gamma_max=args.gamma_max)
    return [g for g in grid if g >= gmin - 1e-12] or [gmin]


def _cmd_ci(args):
    records, table = _load(args)
    probs, interval = _compute_bounds(
        table, args.assumptions, args.q0, args.mono_direction
    )

    def procedure(boot_table):
        return _compute_bounds(
            boot_table, args.assumptions, args.q0, args.mono_direction
        )[1]

    boot = bootstrap_endpoints(
        records, procedure, args.boot, args.seed, stratify=args.stratify_boot
    )
    ci = im_ci_from_bootstrap(interval, boot, table.total, args.alpha)
    payload = interval.to_dict()
    payload["ci"] = ci.to_dict()
    payload["ci"]["failed_replicates"] = boot.n_failed
    payload["n"] = table.total
    payload["meta"] = _meta(args, table.digest())
    _write_json(args.output, payload)
    if args.plot:
        plots.save_bounds_figure(
            _plot_path(args.output),
            [(args.assumptions, interval)],
            ci={args.assumptions: ci},
            title=f"Bounds and {int((1-args.alpha)*100)}% CI",
        )
    return 0


def _cmd_bayes(args):
    records, table = _load(args)
    covariates = tuple(
        c for c in (args.x_cols or "").split(",") if c
    ) if args.use_covariates else ()
    spec = ModelSpec.from_assumptions(
        ASSUMPTION_CHOICES[args.assumptions],
        covariates=covariates,
        prior=PriorConfig(preset=args.prior),
        design=table.design,
    )
    draws = gibbs_run(
        records,
        spec,
        chains=args.chains,
        iters=args.iters,
        burnin=args.burnin,
        thin=args.thin,
        seed=args.seed,
    )
    rows = []
    for i in range(draws.n_draws):
        row = {
            "chain": int(draws.chain[i]),
            "iteration": int(draws.iteration[i]),
            "delta_population": draws.delta_population[i],
            "delta_insample": draws.delta_insample[i],
        }
        for name, values in draws.coefficients.items():
            row[name] = values[i]
        rows.append(row)
    meta = _meta(args, table.digest())
    fields = list(rows[0].keys())
    _write_csv(args.output, rows, fields, meta)
    summary = draws.summary()
    diag = diagnostics(draws) if args.chains >= 2 else {"rhat": {}, "ess": {}}
    summary["rhat"] = diag["rhat"]
    summary["ess"] = diag["ess"]
    summary["strata_set"] = list(draws.strata_set)
    summary["meta"] = meta
    _write_json(_summary_path(args.output), summary)
    if args.plot:
        plots.save_trace_figure(_plot_path(args.output), draws)
    return 0


def _summary_path(output):
    stem, _, _ = output.rpartition(".")
    return (stem or output) + ".summary.json"


def _cmd_prior_predictive(args):
    spec = ModelSpec.from_assumptions(
        ASSUMPTION_CHOICES[args.assumptions],
        prior=PriorConfig(preset=args.prior),
    )
    values = prior_predictive(spec, args.draws, args.seed)
    meta = _meta(args)
    rows = [{"delta": v} for v in values]
    _write_csv(args.output, rows, ["delta"], meta)
    lo, hi = np.percentile(values, [2.5, 97.5])
    q1, q3 = np.percentile(values, [25, 75])
    summary = {
        "mean": float(values.mean()),
        "sd": float(values.std(ddof=1)),
        "iqr": float(q3 - q1),
        "ci95": [float(lo), float(hi)],
        "prior": args.prior,
        "strata_set": list(spec.strata_set),
        "meta": meta,
    }
    _write_json(_summary_path(args.output), summary)
    if args.plot:
        plots.save_histogram_figure(
            _plot_path(args.output),
            values,
            f"Prior predictive interaction ({args.prior})",
        )
    return 0


def _cmd_simulate(args):
    meta = _meta(args)
    jobs = _threads(args)
    if args.study == "1":
        result = run_study1(
            reps=args.reps, n=args.n, seed=args.seed, jobs=jobs,
            mcmc=_mcmc_args(args),
        )
        fields = sorted({k for row in result.rows for k in row})
        _write_csv(args.output, result.rows, fields, meta)
        summary = dict(result.summary)
        summary["coefficients"] = study1_coefficients()
        summary["meta"] = meta
        _write_json(_summary_path(args.output), summary)
        if args.plot:
            plots.save_study_figure(
                _plot_path(args.output),
                result.rows,
                [
                    ("reduction_s_monotonicity", "monotonicity"),
                    ("reduction_s_stability", "stability"),
                    ("reduction_s_both", "both"),
                ],
                "Variance reduction by assumption set",
            )
    elif args.study == "2":
        result = run_study2(
            reps=args.reps, n=args.n, seed=args.seed, jobs=jobs,
            mcmc=_mcmc_args(args),
        )
        fields = sorted({k for row in result.rows for k in row})
        _write_csv(args.output, result.rows, fields, meta)
        summary = dict(result.summary)
        summary["coefficients"] = {
            c.name: study2_coefficients(c) for c in Study2Condition
        }
        summary["meta"] = meta
        _write_json(_summary_path(args.output), summary)
        if args.plot:
            plots.save_study_figure(
                _plot_path(args.output),
                result.rows,
                [("reduction_s", "with vs without covariates")],
                "Variance reduction from covariates",
            )
    else:
        if not args.strata_json:
            raise UsageError("--strata-json is required for --study custom")
        with open(args.strata_json) as handle:
            payload = json.load(handle)
        dist = StrataDistribution(
            rho=payload["rho"],
            mu=_int_keys(payload.get("mu")),
            psi=_int_keys(payload.get("psi")),
        )
        design = Design(args.design)
        stem, _, _ = args.output.rpartition(".")
        stem = stem or args.output
        truths = []
        for rep in range(args.reps):
            records, truth = dgp_custom(
                dist, args.n, args.seed + rep, design
            )
            rep_rows = [
                {"y": r.y, "t": r.t, "z": r.z, "d": r.d} for r in records
            ]
            _write_csv(
                f"{stem}_rep{rep:03d}.csv", rep_rows, ["y", "t", "z", "d"], meta
            )
            truths.append(truth)
        summary = {"truth": truths[0], "replicates": args.reps, "meta": meta}
        _write_json(_summary_path(args.output), summary)
    return 0


def _int_keys(obj, depth=0):
    """JSON round-trips integer dict keys as strings; restore them below
    the top level (top-level keys are stratum labels and stay strings)."""
    if obj is None:
        return None
    if isinstance(obj, dict):
        out = {}
        for key, value in obj.items():
            if depth > 0:
                try:
                    key = int(key)
                except (TypeError, ValueError):
                    pass
            out[key] = _int_keys(value, depth + 1)
        return out
    return obj


def _mcmc_args(args):
    return {
        "chains": args.chains,
        "iters": args.iters,
        "burnin": args.burnin,
        "thin": args.thin,
    }


def build_parser():
    parser = argparse.ArgumentParser(
        prog="modbounds",
        description=(
            "Sharp bounds, sensitivity curves, and Bayesian estimates for "
            "treatment-moderator interactions"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tabulate", help="cross-tabulate a CSV into cells")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_tabulate.json")
    p.set_defaults(func=_cmd_tabulate)

    p = sub.add_parser("estimate", help="plug-in estimates per arm")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_estimate.json")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("bounds", help="closed-form sharp bounds")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_bounds.json")
    p.add_argument(
        "--assumptions", choices=sorted(ASSUMPTION_CHOICES), default="rand"
    )
    p.add_argument("--q0", help="'optimized' or 'known=VALUE'")
    p.add_argument(
        "--mono-direction", choices=("positive", "negative"),
        default="positive",
    )
    p.add_argument("--boot", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--stratify-boot", action="store_true")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sensitivity", help="gamma curves and regions")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_sensitivity.csv")
    p.add_argument(
        "--assumptions", choices=sorted(ASSUMPTION_CHOICES), default="rand"
    )
    p.add_argument("--gamma-min", default="auto")
    p.add_argument("--gamma-max", type=float, default=0.5)
    p.add_argument("--gamma-points", type=int, default=50)
    p.add_argument("--gamma-grid", help="explicit comma-separated gammas")
    p.add_argument("--theta-grid", help="comma-separated thetas (placement)")
    p.add_argument("--boot", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--stratify-boot", action="store_true")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("ci", help="bootstrap Imbens-Manski interval")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_ci.json")
    p.add_argument(
        "--assumptions", choices=sorted(ASSUMPTION_CHOICES), default="rand"
    )
    p.add_argument("--q0", help="'optimized' or 'known=VALUE'")
    p.add_argument(
        "--mono-direction", choices=("positive", "negative"),
        default="positive",
    )
    p.add_argument("--boot", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--stratify-boot", action="store_true")
    p.set_defaults(func=_cmd_ci)

    p = sub.add_parser("bayes", help="Gibbs sampler posterior")
    _add_input_flags(p)
    _add_output_flag(p, "modbounds_bayes.csv")
    p.add_argument(
        "--assumptions", choices=sorted(ASSUMPTION_CHOICES), default="rand"
    )
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--burnin", type=int, default=200)
    p.add_argument("--thin", type=int, default=2)
    p.add_argument(
        "--prior", choices=("default", "uniform", "extreme"), default="default"
    )
    p.add_argument("--use-covariates", action="store_true")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_bayes)

    p = sub.add_parser(
        "prior-predictive", help="interaction draws implied by the prior"
    )
    _add_output_flag(p, "modbounds_prior_predictive.csv")
    p.add_argument(
        "--assumptions", choices=sorted(ASSUMPTION_CHOICES),
        default="mono+stable",
    )
    p.add_argument(
        "--prior", choices=("default", "uniform", "extreme"), default="default"
    )
    p.add_argument("--draws", type=int, default=100000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=_cmd_prior_predictive)

    p = sub.add_parser("simulate", help="simulation studies and custom DGPs")
    _add_output_flag(p, "modbounds_simulate.csv")
    p.add_argument("--study", choices=("1", "2", "custom"), required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--burnin", type=int, default=200)
    p.add_argument("--thin", type=int, default=2)
    p.add_argument("--strata-json", help="strata model file for --study custom")
    p.add_argument(
        "--design",
        choices=[d.value for d in Design],
        default=Design.RANDOMIZED_PLACEMENT.value,
    )
    p.add_argument("--threads", type=int)
    p.set_defaults(func=_cmd_simulate)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; we reserve 2 for data errors
        if exc.code in (None, 0):
            return 0
        return 1
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except ModboundsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
