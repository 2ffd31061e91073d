"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 solver infeasibility. CSV output starts with ``#`` metadata lines and
writes floats with 17 significant digits; JSON output uses the shortest
exact representation. Files are written atomically.
"""
import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .densities import DomainError, ParameterError
from .numerics import QuadratureError
from .processes import FAMILIES
from .records import PARAM_NAMES, dumps, family_from_record, family_to_record
from .sampler import DEFAULT_SEED, RngHandle, simulate_paths, simulate_secant_bridge, \
    simulate_standardized
from .solver import InfeasibleError, SolveRequest, four_constraint_residuals, round_trip_residual, \
    solve
from .standardize import closed_form_domain, standardization_input, standardize
from . import verify as V

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2, 3
TOL_ENV_PREFIX = "QHARNESS_TOL_"

# command-line tolerance flags -> verify check names
TOL_FLAGS = {
    "norm": "normalization",
    "ck": "chapman",
    "pivot": "pivot",
    "moments": "moments",
    "cond": "cond_moments",
    "harness": "harness_empirical",
}


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# output

def _fmt(v):
    return "%.17g" % v


def _write_atomic(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qharness-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(meta, columns, rows):
    lines = [f"# qharness {__version__}"]
    for k, v in meta.items():
        lines.append(f"# {k}: {json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}")
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in r))
    return "\n".join(lines) + "\n"


def _json(obj):
    return dumps(dict(obj, version=__version__)) + "\n"


# ---------------------------------------------------------------------------
# family arguments

def _add_family_args(p):
    p.add_argument("--family", choices=sorted(FAMILIES), help="family tag")
    p.add_argument("--spec", help="family record as a JSON string or a path to a JSON file")
    names = sorted({n for ns in PARAM_NAMES.values() for n in ns})
    for n in names:
        p.add_argument(f"--{n}", type=float, dest=f"p_{n}", help=f"real value of {n}")
        if n != "beta":
            p.add_argument(f"--{n}-re", type=float, dest=f"p_{n}_re", help=f"real part of {n}")
            p.add_argument(f"--{n}-im", type=float, dest=f"p_{n}_im", help=f"imaginary part of {n}")


def _load_spec(text):
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"family record is not valid JSON: {exc}") from None


def _family(args):
    if args.spec:
        return family_from_record(_load_spec(args.spec))
    if not args.family:
        raise InputError("either --family or --spec is required")
    rec = {"family": args.family}
    for n in PARAM_NAMES[args.family]:
        plain = getattr(args, f"p_{n}", None)
        re = getattr(args, f"p_{n}_re", None)
        im = getattr(args, f"p_{n}_im", None)
        if plain is not None and re is not None:
            raise InputError(f"give either --{n} or --{n}-re, not both")
        if plain is not None:
            re = plain
        if re is None:
            if im is None:
                raise InputError(f"missing parameter {n} for {args.family}")
            re = 0.0
        rec[n] = {"re": re, "im": im or 0.0}
    return family_from_record(rec)


def _floats(values, what):
    out = []
    for v in values:
        for part in str(v).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                x = float(part)
            except ValueError:
                raise InputError(f"{what}: {part!r} is not a number") from None
            if not math.isfinite(x):
                raise InputError(f"{what}: values must be finite")
            out.append(x)
    if not out:
        raise InputError(f"{what}: at least one value is required")
    return out


# ---------------------------------------------------------------------------
# commands

def cmd_density(args):
    fam = _family(args)
    xs = _floats(args.x, "--x")
    lp = np.atleast_1d(fam.marginal_log_pdf(args.t, np.array(xs)))
    rows = [(x, float(v), math.exp(v)) for x, v in zip(xs, lp)]
    meta = {"command": "density", "family": family_to_record(fam), "t": _fmt(args.t)}
    _write_atomic(args.out, _csv(meta, ["x", "log_pdf", "pdf"], rows))
    return EXIT_OK


def _path_rows(batch):
    rows = []
    for i in range(len(batch)):
        for t, x in zip(batch.times, batch.states[i]):
            rows.append((str(i), float(t), float(x)))
    return rows


def cmd_simulate(args):
    fam = _family(args)
    times = _floats(args.times, "--times")
    if args.n_paths < 0:
        raise InputError("--n-paths must be non-negative")
    rng = RngHandle(args.seed)
    if args.standardized:
        proc, _ = standardize(fam)
        proc.check_times(times)
        batch = simulate_standardized(fam, times, args.n_paths, rng)
    else:
        fam.check_time(*times)
        batch = simulate_paths(fam, times, args.n_paths, rng)
    meta = {"command": "simulate", "family": family_to_record(fam), "seed": args.seed,
            "standardized": bool(args.standardized), "times": [_fmt(t) for t in times]}
    _write_atomic(args.out, _csv(meta, ["path_id", "t", "x"], _path_rows(batch)))
    return EXIT_OK


def cmd_bridge(args):
    times = _floats(args.times, "--times")
    if args.n_paths < 0:
        raise InputError("--n-paths must be non-negative")
    for t in times:
        if not args.S < t < args.U:
            raise InputError(f"bridge times must lie in (S, U) = ({args.S:g}, {args.U:g})")
    batch = simulate_secant_bridge(args.beta, args.S, args.U, args.yS, args.yU, times,
                                   args.n_paths, RngHandle(args.seed))
    meta = {"command": "bridge", "bridge": {"beta": args.beta, "S": args.S, "U": args.U,
                                            "yS": args.yS, "yU": args.yU},
            "seed": args.seed, "times": [_fmt(t) for t in times]}
    _write_atomic(args.out, _csv(meta, ["path_id", "t", "x"], _path_rows(batch)))
    return EXIT_OK


def cmd_solve(args):
    req = SolveRequest(args.track, args.eta, args.theta, args.sigma)
    try:
        res = solve(req)
    except InfeasibleError as exc:
        out = {"command": "solve", "request": vars_of(req), "feasible": False,
               "message": str(exc), "condition": exc.condition}
        _write_atomic(args.out, _json(out))
        print(f"infeasible: {exc} [condition: {exc.condition}]", file=sys.stderr)
        return EXIT_INFEASIBLE
    residuals = {"round_trip": round_trip_residual(res, req)}
    if req.track == "four":
        residuals["constraints"] = four_constraint_residuals(res.family, req.eta, req.theta, req.sigma)
    out = {"command": "solve", "request": vars_of(req), "feasible": True,
           "family": family_to_record(res.family), "case": res.case_label,
           "free_choice": res.free_choice, "residuals": residuals}
    _write_atomic(args.out, _json(out))
    return EXIT_OK


def vars_of(req):
    return {"track": req.track, "eta": req.eta, "theta": req.theta, "sigma": req.sigma}


def cmd_standardize(args):
    fam = _family(args)
    proc, params = standardize(fam)
    inp, _ = standardization_input(fam)
    norm = inp.M * (inp.delta - inp.epsilon * inp.psi)
    dom = proc.domain
    out = {
        "command": "standardize",
        "family": family_to_record(fam),
        "params": params.as_dict(),
        "maps": {
            "ell": {"slope": inp.delta / norm, "intercept": -inp.psi / norm},
            "m": {"slope": -inp.epsilon / norm, "intercept": 1.0 / norm},
            "centering": {"alpha": inp.alpha, "beta": inp.beta},
            "source_time": "r = ell(t) / m(t)",
            "tilde_view": proc.tilde,
        },
        "T_source": list(proc.source_domain.as_tuple()),
        "T_prime": list(dom.as_tuple()),
        "T_prime_closed_form": list(closed_form_domain(fam).as_tuple()),
    }
    _write_atomic(args.out, _json(out))
    return EXIT_OK


def _tolerances(args):
    tols = {}
    for flag, name in TOL_FLAGS.items():
        env = os.environ.get(TOL_ENV_PREFIX + flag.upper())
        if env is not None:
            try:
                tols[name] = float(env)
            except ValueError:
                raise InputError(f"{TOL_ENV_PREFIX}{flag.upper()} is not a number") from None
        v = getattr(args, f"tol_{flag}")
        if v is not None:
            tols[name] = v
    for name, v in tols.items():
        if not v > 0:
            raise InputError(f"tolerance for {name} must be positive")
    return tols


def cmd_verify(args):
    tols = _tolerances(args)
    if args.all:
        if args.family or args.spec:
            raise InputError("--all cannot be combined with a family")
        reports = V.default_suite(tols, args.seed, args.n_paths, not args.no_empirical)
    else:
        fam = _family(args)
        harness = None
        if not args.no_empirical and args.harness_times:
            ts = _floats(args.harness_times, "--harness-times")
            if len(ts) != 3:
                raise InputError("--harness-times needs exactly three times")
            harness = (*ts, args.n_paths)
        reports = V.family_suite(fam, tols, args.seed, harness=harness)
    out = {"command": "verify", "seed": args.seed,
           "reports": [r.as_dict() for r in reports],
           "all_pass": all(r.passed for r in reports)}
    _write_atomic(args.out, _json(out))
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check:<18} {r.family['family']:<11} "
              f"residual={r.max_residual:.3g} tol={r.tolerance:.3g}", file=sys.stderr)
    return EXIT_OK if out["all_pass"] else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="qharness", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qharness {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("density", help="marginal log-density on a grid of states")
    _add_family_args(d)
    d.add_argument("--t", type=float, required=True)
    d.add_argument("--x", nargs="+", required=True, help="states (space or comma separated)")
    d.add_argument("--out", default="-")
    d.set_defaults(func=cmd_density)

    s = sub.add_parser("simulate", help="simulate paths at given times")
    _add_family_args(s)
    s.add_argument("--times", nargs="+", required=True)
    s.add_argument("--n-paths", type=int, default=1)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--standardized", action="store_true", help="times are in T' and output is X")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bridge", help="simulate a hyperbolic secant bridge")
    b.add_argument("--beta", type=float, default=0.0)
    b.add_argument("--S", type=float, required=True)
    b.add_argument("--U", type=float, required=True)
    b.add_argument("--yS", type=float, required=True)
    b.add_argument("--yU", type=float, required=True)
    b.add_argument("--times", nargs="+", required=True)
    b.add_argument("--n-paths", type=int, default=1)
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--out", default="-")
    b.set_defaults(func=cmd_bridge)

    v = sub.add_parser("solve", help="construct a family with given harness parameters")
    v.add_argument("--track", choices=["four", "three", "two", "dirichlet"], required=True)
    v.add_argument("--eta", type=float, default=0.0)
    v.add_argument("--theta", type=float, default=0.0)
    v.add_argument("--sigma", type=float, default=0.0)
    v.add_argument("--out", default="-")
    v.set_defaults(func=cmd_solve)

    z = sub.add_parser("standardize", help="harness parameters and time maps of a family")
    _add_family_args(z)
    z.add_argument("--out", default="-")
    z.set_defaults(func=cmd_standardize)

    c = sub.add_parser("verify", help="run verification checks")
    _add_family_args(c)
    c.add_argument("--all", action="store_true", help="the default suite over all families")
    c.add_argument("--default-grid", action="store_true",
                   help="use the default time grids (the only grids currently offered)")
    c.add_argument("--no-empirical", action="store_true", help="skip Monte-Carlo checks")
    c.add_argument("--harness-times", nargs="+", help="(s, t, u) in T' for a family run")
    c.add_argument("--n-paths", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED)
    for flag, name in TOL_FLAGS.items():
        c.add_argument(f"--tol-{flag}", type=float, default=None, help=f"tolerance for {name}")
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
