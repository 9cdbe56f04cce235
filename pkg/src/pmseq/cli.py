"""``pmseq`` command line: thin wrappers over the library.

Exit status: 0 on success, 1 when a checked property fails, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import analysis
from ._num import encode
from .density import DEFAULT_EPS, DEFAULT_HORIZON, LambdaError, as_lambda, classify_mask, set_from_json
from .distfn import StepDistFn, levy_distance
from .harness import PlantSpec, generate, replay, run_suite
from .harness.suite import SUITES
from .pmspace import PMSpace, verify_axioms
from .triangle import TriangleFn, verify_triangle_laws

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _emit(args, obj, table: str | None = None):
    if args.format == "table" and table is not None:
        sys.stdout.write(table if table.endswith("\n") else table + "\n")
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _seed(default: int) -> int:
    env = os.environ.get("PMSEQ_SEED")
    if env is None:
        return default
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"PMSEQ_SEED must be an integer, got {env!r}") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_check_space(args) -> int:
    space = PMSpace.from_json(_load(args.space))
    rep = verify_axioms(space)
    _emit(args, rep.to_json(), f"axioms: {'ok' if rep.ok else 'FAIL'}  {rep.detail}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_dl(args) -> int:
    f, g = (StepDistFn.from_json(_load(p)) for p in (args.f, args.g))
    d = levy_distance(f, g, args.tol)
    _emit(args, {"d_L": d.value, "tolerance": d.tolerance}, f"{d.value:.12g}")
    return EXIT_OK


def cmd_tau(args) -> int:
    tau = TriangleFn.named(args.tnorm)
    if args.laws:
        rep = verify_triangle_laws(tau, args.laws, seed=_seed(args.seed))
        _emit(args, rep.to_json(), f"{tau.name}: {'ok' if rep.ok else 'FAIL'} {rep.passed}")
        return EXIT_OK if rep.ok else EXIT_FAIL
    if len(args.functions) != 2:
        raise UsageError("tau needs two step-function files (or --laws N)")
    f, g = (StepDistFn.from_json(_load(p)) for p in args.functions)
    out = tau(f, g)
    _emit(args, out.to_json(), repr(out))
    return EXIT_OK


def _lambda(args):
    return as_lambda(args.lam)


def cmd_density(args) -> int:
    desc = set_from_json(_load(args.set))
    lam = _lambda(args)
    verdict = classify_mask(desc.mask(args.horizon), lam, args.horizon, args.eps)
    sk = desc.skeleton()
    exact = None if sk is None else encode(Fraction(len(sk[1]), sk[0]))
    obj = {"set": desc.to_json(), "lambda": lam.to_json(), "verdict": verdict.to_json(), "exact_density": exact}
    _emit(args, obj, f"{verdict.kind}  liminf={verdict.liminf:.6g} limsup={verdict.limsup:.6g}"
                     + (f"  exact={exact}" if exact is not None else ""))
    return EXIT_OK


def _sequence(args) -> analysis.SymbolicSequence:
    obj = _load(args.sequence)
    return analysis.SymbolicSequence.from_json(obj, base_dir=os.path.dirname(os.path.abspath(args.sequence)))


def cmd_analyze(args) -> int:
    seq = _sequence(args)
    lam, h, eps = _lambda(args), args.horizon, args.eps
    if args.what == "converge":
        if args.candidate is None:
            limit = analysis.find_limit(seq, lam, h, eps)
            _emit(args, {"limit": limit}, f"limit: {limit}")
            return EXIT_OK
        rep = analysis.check_convergence(seq, args.candidate, lam, h, eps)
        _emit(args, rep.to_json(), f"{rep.verdict} to {args.candidate}")
    elif args.what == "cauchy":
        rep = analysis.check_cauchy(seq, lam, h, eps)
        rows = [f"t={encode(s.t)}  N0={s.witness}" for s in rep.steps]
        _emit(args, rep.to_json(), "\n".join([f"cauchy: {rep.cauchy}"] + rows))
    elif args.what == "points":
        rep = analysis.point_sets(seq, lam, h, eps)
        js = rep.to_json()
        _emit(args, js, "\n".join(f"{k}: {', '.join(map(str, v))}" for k, v in sorted(js.items())))
    else:
        if args.candidate is None:
            raise UsageError("extract-G needs --candidate")
        rep = analysis.extract_full_density_subsequence(seq, args.candidate, lam, h, eps)
        rows = [f"n={n}  density={d:.6f}" for n, d in rep.checkpoints]
        _emit(args, rep.to_json(), "\n".join(rows + [f"converges along G: {rep.converges_along_G}"]))
    return EXIT_OK


def cmd_generate(args) -> int:
    obj = _load(args.spec)
    if "seed" in obj or os.environ.get("PMSEQ_SEED") is not None:
        obj["seed"] = _seed(int(obj.get("seed", 0)))
    seq = generate(PlantSpec.from_json(obj))
    _emit(args, seq.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.replay:
        w = _load(args.replay)
        again = replay(w)
        _emit(args, {"reproduced": again is not None, "witness": again},
              "failure reproduced" if again else "instance now passes")
        return EXIT_FAIL if again else EXIT_OK
    config = _load(args.config) if args.config else {}
    config.setdefault("suite", args.suite)
    config["seed"] = _seed(args.seed if args.seed is not None else int(config.get("seed", 42)))
    for key in ("instances", "horizon", "eps", "jobs"):
        if getattr(args, key) is not None:
            config[key] = getattr(args, key)
    if args.witness_dir:
        config["witness_dir"] = args.witness_dir
    elif args.out:
        config.setdefault("witness_dir", os.path.join(os.path.dirname(os.path.abspath(args.out)), "witnesses"))
    else:
        config.setdefault("witness_dir", "pmseq-witnesses")
    report = run_suite(config)
    text = report.dumps() if args.format == "json" else report.table()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.dumps())
    sys.stdout.write(text)
    return EXIT_OK if report.ok else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, analysis_opts: bool = False):
    p.add_argument("--format", choices=("json", "table"), default="json")
    if analysis_opts:
        p.add_argument("--lambda", dest="lam", default="identity",
                       help="lambda family: identity, ceil-sqrt or half")
        p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
        p.add_argument("--eps", type=float, default=DEFAULT_EPS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmseq", description="Strong lambda-statistical convergence in PM spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-space", help="verify the Menger axioms of a PM space")
    p.add_argument("space")
    _common(p)
    p.set_defaults(func=cmd_check_space)

    p = sub.add_parser("dl", help="modified Levy distance of two step functions")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--tol", type=float, default=1e-9)
    _common(p)
    p.set_defaults(func=cmd_dl)

    p = sub.add_parser("tau", help="apply a triangle function or check its laws")
    p.add_argument("functions", nargs="*")
    p.add_argument("--tnorm", default="min")
    p.add_argument("--laws", type=int, default=0, help="check the laws on this many random triples")
    p.add_argument("--seed", type=int, default=42)
    _common(p)
    p.set_defaults(func=cmd_tau)

    p = sub.add_parser("density", help="classify the lambda-density of a set description")
    p.add_argument("set")
    _common(p, analysis_opts=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("analyze", help="convergence, Cauchy, point-set and extraction analyses")
    p.add_argument("what", choices=("converge", "cauchy", "points", "extract-G"))
    p.add_argument("sequence")
    p.add_argument("--candidate")
    _common(p, analysis_opts=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("generate", help="build a sequence from a plant spec")
    p.add_argument("spec")
    _common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="run the property-verification suite")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--instances", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--witness-dir")
    p.add_argument("--replay", help="re-run the instance recorded in a witness file")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except analysis.PropertyViolation as exc:
        sys.stderr.write(f"property failure: {exc}\n")
        sys.stdout.write(json.dumps({"failure": str(exc), "witness": exc.witness}, sort_keys=True,
                                    indent=2, default=str) + "\n")
        return EXIT_FAIL
    except (UsageError, LambdaError, ValueError, KeyError, TypeError, analysis.HorizonError) as exc:
        sys.stderr.write(f"pmseq: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
