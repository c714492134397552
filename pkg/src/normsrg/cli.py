"""Command-line entry point: ``normsrg {pair,srg,certify,calculus,bellman,panels}``.

Exit codes: 0 when the checked property holds, 1 when it is violated, 2 on
bad input or I/O failure.  Every run that writes files also writes
``config.json``; passing it back through ``--config`` reproduces the run.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import case_studies as cs
from .geometry import cos_left, cos_right, induced_norm, log_norm_closed_form
from .pairings import PairingSpec, norm, pair, peak_info
from .persist import CloudFormatError, dump_json, read_cloud, write_cloud, write_json
from .plotting import Disk, Panel, PlotStyle, VerticalLine, render_panels, render_svg, unit_circle
from .sampling import INCREMENT_KINDS, IncrementSampler
from .srg import (Increments, MatrixOperator, Property, add_operators,
                  certify, cloud_from_increments, compose_operators, contraction_factor,
                  count_contained, estimate_sigma, sample_increments, scale_operator,
                  sigma_from_increments, srg_invert, srg_scale)

log = logging.getLogger("normsrg")

SEED_ENV = "NORMSRG_SEED"
SPEC_CHOICES = tuple(s.value for s in PairingSpec)
SAMPLER_CHOICES = ("auto", "mixed", *INCREMENT_KINDS, "value-range")
EXACT_TOL = 1e-12


class CliError(Exception):
    """Bad user input; reported on stderr with exit code 2."""


# -- parsing helpers -------------------------------------------------------

def parse_vector(text: str, flag: str = "vector") -> np.ndarray:
    """Comma-separated decimals; errors name the element and character offset."""
    if not text.strip():
        raise CliError(f"{flag}: empty vector")
    values, offset = [], 0
    for k, item in enumerate(text.split(",")):
        try:
            v = float(item)
        except ValueError:
            raise CliError(f"{flag}: cannot parse element {k + 1} {item.strip()!r} "
                           f"at character {offset + 1}") from None
        if not math.isfinite(v):
            raise CliError(f"{flag}: element {k + 1} at character {offset + 1} is not finite")
        values.append(v)
        offset += len(item) + 1
    return np.array(values)


def parse_certificate(text: str) -> tuple[Property, float]:
    name, sep, value = text.partition(":")
    if not sep:
        raise CliError(f"certificate {text!r} must look like PROPERTY:PARAMETER")
    try:
        return Property.parse(name), float(value)
    except ValueError as exc:
        raise CliError(f"certificate {text!r}: {exc}") from None


def load_matrix(path: Path) -> np.ndarray:
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix == ".json":
            A = np.array(json.loads(text), dtype=np.float64)
        else:
            A = np.loadtxt(path, delimiter="," if "," in text else None, ndmin=2)
    except ValueError as exc:
        raise CliError(f"{path}: cannot read matrix: {exc}") from None
    if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.all(np.isfinite(A)):
        raise CliError(f"{path}: need a finite square matrix, got shape {A.shape}")
    return A


def resolve_operator(selector: str, args):
    """Builtin id, or a path to a square matrix (CSV, whitespace text, or JSON)."""
    if selector in cs.BUILTIN_OPERATORS:
        return cs.builtin_operator(selector, n_states=args.n_states, n_actions=args.n_actions,
                                   gamma=args.gamma, alpha=args.alpha,
                                   mdp_seed=args.mdp_seed, dim=args.dim)
    path = Path(selector)
    if path.is_file():
        return MatrixOperator(load_matrix(path), f"matrix:{path.name}")
    raise CliError(f"unknown operator {selector!r}; builtins: {', '.join(cs.BUILTIN_OPERATORS)} "
                   "or a matrix file")


def make_sampler(args, op_names):
    kind = args.sampler
    if kind == "auto":
        kind = "value-range" if any(n.startswith("bellman") for n in op_names) else "mixed"
    if kind == "value-range":
        if args.sampler_scale is not None:
            return cs.ValueRangeSampler(args.sampler_scale)
        mdp = cs.random_mdp(args.n_states, args.n_actions, args.gamma, args.mdp_seed)
        return cs.ValueRangeSampler.for_mdp(mdp)
    return IncrementSampler(kind, 1.0 if args.sampler_scale is None else args.sampler_scale)


def out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def run_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    return cfg


def region_overlays(certs) -> list:
    out = [unit_circle(), VerticalLine(0.0, dash="", color="#999999", shade_left=True)]
    for prop, p in certs:
        if prop is Property.Lipschitz:
            out.append(Disk(0.0, p, "6 3", "#d62728", f"lipschitz {p:g}"))
        elif prop is Property.Cocoercive:
            out.append(Disk(0.5 / p, 0.5 / p, "6 3", "#d62728", f"cocoercive {p:g}"))
        else:
            out.append(VerticalLine(p, "6 3", "#d62728"))
    return out


def cloud_stats(cloud) -> dict:
    fin = ~cloud.is_infinity
    re = cloud.re[fin]
    return {
        "n_points": len(cloud),
        "n_infinity": int(np.sum(cloud.is_infinity)),
        "min_re": float(re.min()) if len(re) else None,
        "max_re": float(re.max()) if len(re) else None,
        "max_gain": contraction_factor(cloud) if len(cloud) else None,
    }


# -- commands --------------------------------------------------------------

def _fmt(v) -> str:
    return "undefined" if v is None else repr(float(v))


def cmd_pair(args) -> int:
    x, y = parse_vector(args.x, "--x"), parse_vector(args.y, "--y")
    if len(x) != len(y):
        raise CliError(f"--x has {len(x)} entries but --y has {len(y)}")
    report = {"x": x.tolist(), "y": y.tolist(), "pairings": {}}
    for name, v in (("x", x), ("y", y)):
        report[f"peaks_{name}"] = list(peak_info(v).one_based()) if np.any(v) else []
    for spec in PairingSpec:
        row = {"norm_x": norm(x, spec), "norm_y": norm(y, spec),
               "pair_xy": pair(x, y, spec), "pair_yx": pair(y, x, spec)}
        if np.any(x) and np.any(y):
            cl, cr = cos_left(x, y, spec), cos_right(x, y, spec)
            row.update(cos_left=cl.cos_value, angle_left=cl.angle_rad,
                       cos_right=cr.cos_value, angle_right=cr.angle_rad)
        else:
            row.update(cos_left=None, angle_left=None, cos_right=None, angle_right=None)
        report["pairings"][spec.value] = row
    if args.spec:
        spec = PairingSpec.parse(args.spec)
        report["note"] = {"spec": spec.value, "pair_yx": pair(y, x, spec),
                          "neg_pair_negy_x": -pair(-y, x, spec)}
    if args.json:
        sys.stdout.write(dump_json(report))
        return 0
    print(f"x = {report['x']}    y = {report['y']}")
    print(f"peak index sets (1-based): I(x) = {report['peaks_x']}, I(y) = {report['peaks_y']}")
    cols = ("norm_x", "norm_y", "pair_xy", "pair_yx", "cos_left", "angle_left",
            "cos_right", "angle_right")
    print(f"{'pairing':<9}" + "".join(f"{c:>22}" for c in cols))
    for name, row in report["pairings"].items():
        print(f"{name:<9}" + "".join(f"{_fmt(row[c]):>22}" for c in cols))
    if args.spec:
        n = report["note"]
        print(f"{n['spec']}: [[y,x]] = {_fmt(n['pair_yx'])}, "
              f"-[[-y,x]] = {_fmt(n['neg_pair_negy_x'])}")
    return 0


def exact_checks(op, spec, certs) -> dict:
    """Closed-form bounds for a matrix; decide requested certificates where they apply."""
    A = op.matrix
    mu = log_norm_closed_form(A, spec)
    mu_low = 0.0 - log_norm_closed_form(-A, spec)
    lip = induced_norm(A, spec)
    verdicts = []
    for prop, p in certs:
        if prop is Property.Lipschitz:
            ok = lip <= p + EXACT_TOL
        elif prop is Property.OneSided:
            ok = mu <= p + EXACT_TOL
        elif prop is Property.StronglyMonotone:
            ok = mu_low >= p - EXACT_TOL
        else:
            verdicts.append({"property": prop.value, "parameter": p, "verdict": None})
            continue
        verdicts.append({"property": prop.value, "parameter": p,
                         "verdict": "exact_holds" if ok else "exact_violated"})
    return {"log_norm": mu, "neg_log_norm_neg": mu_low, "induced_norm": lip,
            "certificates": verdicts}


def cmd_srg(args) -> int:
    spec = PairingSpec.parse(args.spec)
    certs = [parse_certificate(c) for c in args.certify]
    op = resolve_operator(args.op, args)
    sampler = make_sampler(args, [args.op])
    d = out_dir(args)
    inc = sample_increments(op, sampler, args.n, args.seed)
    meta = {"sampler": sampler.id, "n_samples": args.n, "seed": args.seed, "operator": op.name}
    cloud = cloud_from_increments(inc, spec, args.side, meta)
    summary = {"operator": op.name, "spec": spec.value, "side": args.side, **cloud_stats(cloud),
               "certificates": [certify(cloud, p, v, args.tol).to_dict() for p, v in certs]}
    if isinstance(op, MatrixOperator) and args.side == "left":
        summary["exact"] = exact_checks(op, spec, certs)
    write_cloud(d / "cloud.csv", cloud)
    render_svg([cloud], region_overlays(certs), path=d / "srg.svg",
               title=f"{op.name}, {spec.value}, {args.side}")
    write_json(d / "summary.json", summary)
    write_json(d / "config.json", run_config(args))
    sys.stdout.write(dump_json(summary))
    return 0


def cmd_certify(args) -> int:
    cloud = read_cloud(args.cloud)
    report = certify(cloud, args.property, args.parameter, args.tol).to_dict()
    report["cloud"] = str(args.cloud)
    if args.report:
        if Path(args.report).resolve() == Path(args.cloud).resolve():
            raise CliError("--report must differ from --cloud")
        write_json(args.report, report)
    sys.stdout.write(dump_json(report))
    return 0 if report["verdict"] == "holds_on_samples" else 1


def _max_z_gap(c1, c2) -> float:
    if len(c1) != len(c2):
        return math.inf
    if np.any(c1.is_infinity != c2.is_infinity):
        return math.inf
    z1, z2 = c1.to_complex(mirror=False), c2.to_complex(mirror=False)
    if len(z1) == 0:
        return 0.0
    return float(np.max(np.abs(z1 - z2) / (1.0 + np.abs(z1))))


def cmd_calculus(args) -> int:
    spec = PairingSpec.parse(args.spec)
    if not spec.is_sip:
        raise CliError(f"{spec.value} is not a semi-inner product; the SRG calculus needs one")
    A = resolve_operator(args.op_a, args)
    sampler = make_sampler(args, [args.op_a] + ([args.op_b] if args.op_b else []))
    d = out_dir(args)
    meta = {"sampler": sampler.id, "n_samples": args.n, "seed": args.seed}
    report = {"operation": args.operation, "spec": spec.value, "op_a": A.name}
    inc_a = sample_increments(A, sampler, args.n, args.seed)
    S_a = cloud_from_increments(inc_a, spec, "left", {**meta, "operator": A.name})
    clouds = {"cloud_a": S_a}

    if args.operation in ("add", "compose"):
        if not args.op_b:
            raise CliError(f"{args.operation} needs --op-b")
        B = resolve_operator(args.op_b, args)
        if B.dim != A.dim:
            raise CliError(f"dimension mismatch: {A.name} is {A.dim}, {B.name} is {B.dim}")
        report["op_b"] = B.name
        if args.operation == "add":
            C = add_operators(A, B)
            inc_b = sample_increments(B, sampler, args.n, args.seed)
            inc_c = sample_increments(C, sampler, args.n, args.seed)
            S_1, S_2, sigma = S_a, cloud_from_increments(inc_b, spec, "left", meta), 0.0
        else:
            # A after B; the outer factor A sees the increments produced by B.
            C = compose_operators(A, B)
            X1, X2 = sampler.draw(A.dim, args.n, args.seed)
            Y1, Y2 = B.evaluate(X1), B.evaluate(X2)
            Z1, Z2 = A.evaluate(Y1), A.evaluate(Y2)
            ref_x = 1.0 + np.linalg.norm(X1, axis=1) + np.linalg.norm(X2, axis=1)
            ref_y = 1.0 + np.linalg.norm(Y1, axis=1) + np.linalg.norm(Y2, axis=1)
            inc_b = Increments(X1 - X2, Y1 - Y2, ref_x)
            inc_outer = Increments(Y1 - Y2, Z1 - Z2, ref_y)
            inc_c = Increments(X1 - X2, Z1 - Z2, ref_x)
            S_1 = cloud_from_increments(inc_outer, spec, "left", {**meta, "operator": A.name})
            S_2 = cloud_from_increments(inc_b, spec, "left", {**meta, "operator": B.name})
            sig_match = sigma_from_increments(inc_outer, spec)
            sig_indep = estimate_sigma(A, spec, IncrementSampler(), args.n, args.seed + 1)
            sigma = args.sigma_slack * max(sig_match, sig_indep)
            log.info("sigma estimate for %s: matched %.6g, independent %.6g, used %.6g",
                     A.name, sig_match, sig_indep, sigma)
            report.update(sigma_matched=sig_match, sigma_independent=sig_indep,
                          sigma_used=sigma, sigma_slack=args.sigma_slack)
            clouds["cloud_a"] = S_1
        S_c = cloud_from_increments(inc_c, spec, "left", {**meta, "operator": C.name})
        clouds.update(cloud_b=S_2, cloud_result=S_c)
        hits, n = count_contained(S_c, S_1, S_2, args.operation, sigma, args.tol)
        report.update(result=C.name, contained=hits, tested=n,
                      fraction=hits / n if n else 1.0, tol=args.tol)
        ok = hits == n
    else:
        if args.operation == "scale":
            C = scale_operator(A, args.scale)
            inc_c = sample_increments(C, sampler, args.n, args.seed)
            predicted = srg_scale(S_a, args.scale)
            result_name = C.name
            report["alpha"] = args.scale
        else:
            # The inverse's increments are the forward ones with roles swapped.
            right = cloud_from_increments(inc_a, spec, "right", {**meta, "operator": A.name})
            predicted = srg_invert(right)
            result_name = f"inv({A.name})"
            inc_c = Increments(inc_a.V, inc_a.U, inc_a.ref)
            clouds["cloud_a"] = right
        S_c = cloud_from_increments(inc_c, spec, "left", {**meta, "operator": result_name})
        gap = _max_z_gap(predicted, S_c)
        clouds.update(cloud_predicted=predicted, cloud_result=S_c)
        ok = gap <= EXACT_TOL
        report.update(result=result_name, max_relative_gap=gap, tol=EXACT_TOL,
                      n_points=len(S_c), n_predicted=len(predicted))
    report["verdict"] = "holds_on_samples" if ok else "violated"
    for name, c in clouds.items():
        write_cloud(d / f"{name}.csv", c)
    render_svg(list(clouds.values()), [unit_circle()], path=d / "calculus.svg",
               title=f"{args.operation}: {report['result']}")
    write_json(d / "report.json", report)
    write_json(d / "config.json", run_config(args))
    sys.stdout.write(dump_json(report))
    return 0 if ok else 1


def cmd_bellman(args) -> int:
    spec = PairingSpec.parse(args.spec)
    study = cs.bellman_study(args.n_states, args.n_actions, args.gamma, args.alpha,
                             args.seed, args.mdp_seed, args.n, spec)
    d = out_dir(args)
    g, bound = args.gamma, study.lipschitz_bound
    summary = study.summary()
    cert = certify(study.cloud_reg, Property.Lipschitz, bound, args.tol)
    summary.update(certificate_reg=cert.to_dict(),
                   contraction_certified=study.factor <= g + args.tol and cert.holds,
                   vi_rate_within_factor=study.vi.observed_rate <= study.factor + 1e-3
                   and study.vi_reg.observed_rate <= study.factor_reg + 1e-3)
    write_cloud(d / "cloud_bellman.csv", study.cloud)
    write_cloud(d / "cloud_bellman_reg.csv", study.cloud_reg)
    overlays = [Disk(0.0, g, "", "#444444", f"gamma {g:g}"),
                Disk(0.0, bound, "2 3", "#444444", f"gamma+alpha {bound:g}"),
                Disk(0.0, study.factor_reg, "6 3", "#d62728", "sampled factor")]
    render_svg([study.cloud, study.cloud_reg], overlays, path=d / "bellman.svg",
               title=f"policy evaluation, gamma={g:g}, alpha={args.alpha:g}")
    write_json(d / "summary.json", summary)
    write_json(d / "config.json", run_config(args))
    sys.stdout.write(dump_json(summary))
    return 0 if summary["contraction_certified"] else 1


def cmd_panels(args) -> int:
    sampler = make_sampler(args, [])
    clouds = cs.monotonicity_panels(args.n, args.seed, sampler)
    d = out_dir(args)
    summary, panels = {}, []
    for (name, spec), cloud in clouds.items():
        write_cloud(d / f"panel_{name}_{spec}.csv", cloud)
        summary[f"{name}/{spec}"] = cloud_stats(cloud)
        panels.append(Panel((cloud,), (VerticalLine(0.0, dash="", color="#999999",
                                                     shade_left=True),),
                            f"{name}, {spec}", PlotStyle(width=300, height=300)))
    render_panels(panels, len(cs.PANEL_SPECS), d / "panels.svg")
    write_json(d / "summary.json", summary)
    write_json(d / "config.json", run_config(args))
    sys.stdout.write(dump_json(summary))
    return 0


# -- argument parsing ------------------------------------------------------

def _common(p, n_default=5000, spec_default="l1", side=True):
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--n", type=int, default=n_default, help="number of sampled increments")
    p.add_argument("--spec", choices=SPEC_CHOICES, default=spec_default)
    if side:
        p.add_argument("--side", choices=("left", "right"), default="left")
    p.add_argument("--out-dir", default="normsrg-out")
    p.add_argument("--config", default=None, help="JSON run config whose values become defaults")
    p.add_argument("--sampler", choices=SAMPLER_CHOICES, default="auto")
    p.add_argument("--sampler-scale", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9)


def _operator_params(p):
    p.add_argument("--n-states", type=int, default=8)
    p.add_argument("--n-actions", type=int, default=3)
    p.add_argument("--gamma", type=float, default=0.7)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--mdp-seed", type=int, default=42)
    p.add_argument("--dim", type=int, default=3, help="dimension of the identity builtin")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normsrg", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pair", help="pairings, norms and angles of two vectors",
                       allow_abbrev=False)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--spec", choices=SPEC_CHOICES, default=None,
                   help="also report [[y,x]] and -[[-y,x]] for this pairing")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("srg", help="sample a directional SRG", allow_abbrev=False)
    _common(p)
    _operator_params(p)
    p.add_argument("--op", required=True, help="builtin id or matrix file")
    p.add_argument("--certify", action="append", default=[], metavar="PROPERTY:PARAM")
    p.set_defaults(func=cmd_srg)

    p = sub.add_parser("certify", help="test a stored cloud against a property region",
                       allow_abbrev=False)
    p.add_argument("--cloud", required=True)
    p.add_argument("--property", required=True,
                   choices=[q.value for q in Property] + ["monotone"])
    p.add_argument("--parameter", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--report", default=None, help="also write the JSON report here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("calculus", help="matched-seed SRG calculus checks", allow_abbrev=False)
    _common(p, side=False)
    _operator_params(p)
    p.add_argument("--operation", required=True, choices=("add", "compose", "scale", "invert"))
    p.add_argument("--op-a", required=True)
    p.add_argument("--op-b", default=None)
    p.add_argument("--scale", type=float, default=-1.0, help="alpha for the scale operation")
    p.add_argument("--sigma-slack", type=float, default=1.1)
    p.set_defaults(func=cmd_calculus)

    p = sub.add_parser("bellman", help="contraction certificates for policy evaluation",
                       allow_abbrev=False)
    _common(p, spec_default="linf-max", side=False)
    _operator_params(p)
    p.set_defaults(func=cmd_bellman)

    p = sub.add_parser("panels", help="monotonicity panels of the four test operators",
                       allow_abbrev=False)
    _common(p, side=False)
    p.set_defaults(func=cmd_panels)
    return parser


def _apply_config(parser, argv) -> "dict | None":
    """Load ``--config`` and install its values as subcommand defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return None
    try:
        cfg = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise CliError("config must be a JSON object")
    command = next((a for a in argv if not a.startswith("-")), None)
    if cfg.get("command") not in (None, command):
        raise CliError(f"config is for {cfg['command']!r}, not {command!r}")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = subparsers.choices.get(command)
    if sp is None:
        return cfg
    dests = {a.dest for a in sp._actions}
    unknown = sorted(set(cfg) - dests - {"command", "seed_source", "verbose"})
    if unknown:
        raise CliError(f"config has unknown keys: {', '.join(unknown)}")
    values = {k: v for k, v in cfg.items() if k in dests and k != "config"}
    for action in sp._actions:
        if action.dest in values:
            action.required = False
    sp.set_defaults(**values)
    return cfg


def _resolve_seed(args, argv, cfg) -> None:
    if not hasattr(args, "seed"):
        return
    if any(a == "--seed" or a.startswith("--seed=") for a in argv):
        args.seed_source = "flag"
    elif args.seed is not None:
        args.seed_source = "config"
    elif os.environ.get(SEED_ENV, "").strip():
        raw = os.environ[SEED_ENV]
        try:
            args.seed = int(raw)
        except ValueError:
            raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None
        args.seed_source = f"env:{SEED_ENV}"
    else:
        args.seed, args.seed_source = 0, "default"
    if getattr(args, "n", 1) < 1:
        raise CliError("--n must be at least 1")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        cfg = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _resolve_seed(args, argv, cfg)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (OSError, CloudFormatError, ValueError, KeyError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
