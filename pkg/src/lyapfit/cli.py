"""Command line interface: gen, diag, fit-vf, fit-lyap, verify.

Every flag has a config-file equivalent: ``--config run.json`` supplies
defaults keyed by the flag's destination name (``--n-mc`` -> ``n_mc``);
flags given explicitly on the command line win.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import EmptyRegionError, NumericalFailure
from .geometry import (Ball, Box, DomainSpec, Sphere, candidate_points, default_candidates,
                       fill_distance, make_grid, outside, region_from_dict, voronoi_weights)
from .io import read_json, read_points, read_samples, write_json, write_samples, write_table
from .kernel import WendlandKernel
from .lyap import FIELD_THRESHOLD, LyapunovModel, PFunction, eval_lyap, fit_T, fit_V, orbital_derivative
from .testbed import NoiseModel, generate_data, get_system, oracle_T_flow, oracle_V_flow, sample_sites
from .vfield import SampleSet, VectorFieldModel, choose_lambda, fit_vector_field

log = logging.getLogger("lyapfit")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

K1_SUPPORT_FACTOR = 0.6
K2_SUPPORT_FACTOR = 2.0


class UsageError(Exception):
    pass


# -- argument parsing helpers -------------------------------------------------

def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def parse_box(text):
    """``lo1,hi1,lo2,hi2,...`` (one lo/hi pair per axis) or a list of the same."""
    vals = _floats(text)
    if len(vals) < 2 or len(vals) % 2:
        raise UsageError(f"box needs lo,hi pairs per axis, got {text!r}")
    return Box(vals[0::2], vals[1::2])


def parse_region(text):
    """``box:lo1,hi1,...`` or ``ball:c1,c2,...:radius``."""
    if isinstance(text, dict):
        return region_from_dict(text)
    kind, _, rest = str(text).partition(":")
    if kind == "box":
        return parse_box(rest)
    if kind == "ball":
        center, _, radius = rest.partition(":")
        return Ball(_floats(center), float(radius))
    raise UsageError(f"region must be box:... or ball:...:r, got {text!r}")


# -- commands -------------------------------------------------------------------

def cmd_gen(args):
    if args.m is None or args.m < 1:
        raise UsageError("--m must be a positive integer")
    system = get_system(args.system)
    box = parse_box(args.box) if args.box else system.box
    sites = sample_sites(box, args.m, seed=args.seed, design=args.design)
    data = generate_data(system, sites, NoiseModel(args.noise, args.sigma, args.seed))
    write_samples(args.out, data.x, data.y)
    log.info("wrote %d samples to %s", data.m, args.out)


def _load_samples(args):
    x, y = read_samples(args.data)
    return SampleSet(x, y, sigma=getattr(args, "sigma", None))


def _ambient_box(args, x):
    if args.box:
        return parse_box(args.box)
    if args.system:
        return get_system(args.system).box
    return Box(x.min(axis=0), x.max(axis=0))


def cmd_diag(args):
    z = _load_samples(args)
    X = _ambient_box(args, z.x)
    n_cand = args.n_candidates or default_candidates(X.dim)
    w = voronoi_weights(z.x, X, n_mc=args.n_mc, seed=args.seed)
    h_x = fill_distance(z.x, X, n_cand)
    cand = candidate_points(X, n_cand)
    report = {
        "config": vars_for_report(args),
        "m": z.m,
        "box": X.to_dict(),
        "weights": w,
        "weight_sum": float(w.sum()),
        "w_norm": float(np.linalg.norm(w)),
        "h_x": h_x,
        "fill_distance_candidates": len(cand),
        "fill_distance_candidate_spacing": float(np.max(np.subtract(X.hi, X.lo))
                                                 / (round(n_cand ** (1 / X.dim)) - 1)),
    }
    write_json(args.out, report)


def cmd_fit_vf(args):
    z = _load_samples(args)
    X = _ambient_box(args, z.x)
    z = z.with_geometry(X, n_mc=args.n_mc, seed=args.seed, n_candidates=args.n_candidates)
    support = args.support or K1_SUPPORT_FACTOR * X.diameter
    K1 = WendlandKernel(z.d, args.k1, 1.0 / support)
    if str(args.lam) == "auto":
        lam = choose_lambda(z.w_norm, z.h_x, args.r, args.delta)
        rule = "auto"
    else:
        lam = float(args.lam)
        rule = "fixed"
    model = fit_vector_field(z, K1, lam, solver=args.solver, provenance={
        "r": args.r, "delta": args.delta, "seed": args.seed, "lambda_rule": rule,
        "n_mc": args.n_mc, "box": X.to_dict(),
    })
    out = model.to_dict()
    out["diagnostics"] = {"weight_sum": float(z.w.sum()), "box_volume": X.volume}
    write_json(args.out, out)
    log.info("lambda=%.6g  |w|=%.4g  h_x=%.4g  residual=%.2e",
             lam, z.w_norm, z.h_x, model.provenance["residual"])


def _field_from_args(args):
    """Fitted model from --vf, or the exact field of --exact-field."""
    if args.vf and args.exact_field:
        raise UsageError("give only one of --vf and --exact-field")
    if args.vf:
        model = VectorFieldModel.from_dict(read_json(args.vf))
        box = model.provenance.get("box")
        return model, (region_from_dict(box) if box else None), {"vf": args.vf}
    if args.exact_field:
        system = get_system(args.exact_field)
        return system, system.box, {"exact_field": args.exact_field}
    raise UsageError("need --vf MODEL or --exact-field SYSTEM")


def cmd_fit_lyap(args):
    field_, X, source = _field_from_args(args)
    d = field_.d
    omega = parse_region(args.omega) if args.omega else X
    if omega is None:
        raise UsageError("need --omega (the field model records no ambient box)")
    xbar = _floats(args.xbar) if args.xbar is not None else None
    if args.mode == "V" and xbar is None:
        raise UsageError("V-mode needs --xbar")
    gamma = None
    if args.mode == "T":
        if args.gamma_radius is None:
            raise UsageError("T-mode needs a hypersurface: --gamma-radius (and --gamma-center)")
        center = _floats(args.gamma_center) if args.gamma_center else (xbar or [0.0] * d)
        gamma = Sphere(center, args.gamma_radius)
    if xbar is not None and len(xbar) != d:
        raise UsageError("--xbar has the wrong dimension")
    domain = DomainSpec(X or omega, omega, xbar, args.eps if xbar is not None else 0.0, gamma)

    if args.points:
        q = read_points(args.points)
        n_total = len(q)
        if domain.excluded is not None:
            q = q[outside(domain.excluded, q)]
    else:
        n_total = len(make_grid(omega, args.spacing))
        q = make_grid(omega, args.spacing, domain.excluded)
    n_excluded = n_total - len(q)

    qt = np.zeros((0, d))
    if gamma is not None:
        n_gamma = args.gamma_n or gamma.n_for_spacing(args.gamma_spacing or args.spacing)
        qt = gamma.points(n_gamma)
        # interior points that coincide with hypersurface points
        from scipy.spatial import cKDTree
        dist, _ = cKDTree(qt).query(q)
        q = q[dist > 1e-9]

    v = np.asarray(field_(q)).reshape(q.shape)
    keep = np.linalg.norm(v, axis=1) >= FIELD_THRESHOLD
    n_screened = int(np.sum(~keep))
    q = q[keep]
    if len(q) == 0:
        raise EmptyRegionError("all collocation points failed the field-magnitude gate; "
                               "increase eps or use denser data")

    support = args.support or K2_SUPPORT_FACTOR * omega.diameter
    K2 = WendlandKernel(d, args.k2, 1.0 / support)
    if hasattr(field_, "kernel") and args.k2 > field_.kernel.k:
        log.warning("k2=%d exceeds the field kernel's smoothness index k1=%d",
                    args.k2, field_.kernel.k)
    if args.mode == "V":
        model = fit_V(q, field_, K2, p=PFunction(xbar))
    else:
        model = fit_T(q, qt, field_, K2, cbar=args.cbar, xiT=args.xiT)
    resid = model.collocation_residuals()
    h_q = fill_distance(q, omega, exclude=domain.excluded)
    prov = dict(model.provenance)
    prov.update(source)
    prov.update({
        "omega": omega.to_dict(),
        "xbar": xbar,
        "eps": args.eps,
        "eps_applied": domain.eps > 0,
        "spacing": args.spacing,
        "h_q": h_q,
        "n_grid": n_total,
        "n_excluded_eps_ball": n_excluded,
        "n_screened": n_screened,
        "max_collocation_residual": float(np.max(np.abs(resid))),
    })
    if gamma is not None:
        prov["gamma"] = gamma.to_dict()
        prov["h_qtilde"] = fill_distance(qt, gamma)
    out = model.to_dict()
    out["provenance"] = prov
    write_json(args.out, out)
    log.info("%s-mode: M=%d N=%d  max collocation residual %.2e",
             model.mode, model.M, model.N, prov["max_collocation_residual"])


def _stats(od, target):
    res = np.abs(od - target)
    return {
        "negativity_fraction": float(np.mean(od < 0)),
        "sup_residual": float(np.max(res)),
        "mean_residual": float(np.mean(res)),
    }


def cmd_verify(args):
    data = read_json(args.lyap)
    model = LyapunovModel.from_dict(data)
    prov = data["provenance"]
    field_, _, _ = _field_from_args(args)
    omega = region_from_dict(prov["omega"])
    xbar = prov.get("xbar")
    if xbar is None and args.system:
        # T-mode fitted without an equilibrium estimate: D still has to
        # avoid the equilibrium, where T is unbounded
        xbar = list(get_system(args.system).xbar)
    eps = prov.get("eps", 0.0)
    exclude = Ball(xbar, eps) if xbar is not None and eps > 0 else None
    spacing = args.spacing or prov["h_q"] / 2.0
    grid = make_grid(omega, spacing, exclude)
    if model.mode == "V":
        target = -model.pfun(grid)
    else:
        target = np.full(len(grid), -model.cbar)

    values = eval_lyap(model, grid)
    od_fit = orbital_derivative(model, field_, grid)
    report = {
        "config": vars_for_report(args),
        "mode": model.mode,
        "grid": {"spacing": spacing, "count": len(grid)},
        "h_q": prov.get("h_q"),
        "max_collocation_residual": float(np.max(np.abs(model.collocation_residuals()))),
        "fitted_field": _stats(od_fit, target),
    }
    if isinstance(field_, VectorFieldModel):
        for key in ("w_norm", "h_x"):
            report[key] = field_.provenance.get(key)
        report["lambda"] = field_.lam
    columns = [values, od_fit]
    header = [f"x{i + 1}" for i in range(grid.shape[1])] + ["value", "orbital_fitted"]

    if model.mode == "T":
        gamma = region_from_dict(prov["gamma"])
        report["h_qtilde"] = prov.get("h_qtilde")
        dense = gamma.points(max(16 * model.N, 64) if gamma.dim > 1 else 2)
        xi = float(model.xiT or 0.0)
        report["gamma_sup_error_nodes"] = float(np.max(np.abs(eval_lyap(model, model.gamma_points) - xi)))
        report["gamma_sup_error"] = float(np.max(np.abs(eval_lyap(model, dense) - xi)))

    if args.system:
        system = get_system(args.system)
        od_true = orbital_derivative(model, system, grid)
        report["true_field"] = _stats(od_true, target)
        columns.append(od_true)
        header.append("orbital_true")
        if model.mode == "V":
            known = system.known_V(model.pfun.Q)
            ref = known(grid) if known is not None else oracle_V_flow(system, model.pfun, grid)
            gap = values - ref
            # V is unique only up to a constant
            report["oracle_sup_error"] = float(np.max(np.abs(gap - np.mean(gap))))
        else:
            ref = oracle_T_flow(system, gamma, model.cbar, xi, grid)
            report["oracle_sup_error"] = float(np.max(np.abs(values - ref)))
        columns.append(ref)
        header.append("oracle")

    if not all(np.isfinite(v) for v in _scalars(report)):
        raise NumericalFailure("non-finite quantity in verification report")
    write_json(args.out, report)
    if args.grid_csv:
        write_table(args.grid_csv, header, np.column_stack([grid] + columns))
    log.info("negativity fraction (fitted field) %.4f",
             report["fitted_field"]["negativity_fraction"])


def _scalars(obj):
    if isinstance(obj, dict):
        for key, v in obj.items():
            if key != "config":
                yield from _scalars(v)
    elif isinstance(obj, float):
        yield obj


def vars_for_report(args):
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "config", "verbose")}


# -- parser -----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="lyapfit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({BACKEND} core)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file of flag defaults")
        p.add_argument("-v", "--verbose", action="store_true")
        p.set_defaults(func=func)
        return p

    p = add("gen", cmd_gen, "generate noisy samples from a reference system")
    p.add_argument("--system", required=False, default="linear2d")
    p.add_argument("--m", type=int)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--noise", choices=["gaussian", "uniform"], default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--design", choices=["random", "sobol", "grid"], default="random")
    p.add_argument("--box", help="lo1,hi1,lo2,hi2,... (default: the system's box)")
    p.add_argument("--out", default="samples.csv")

    for name, func, help_ in (("diag", cmd_diag, "Voronoi weights and fill distance"),
                              ("fit-vf", cmd_fit_vf, "fit the vector field")):
        p = add(name, func, help_)
        p.add_argument("--data", required=False)
        p.add_argument("--box", help="ambient box lo1,hi1,...; default from --system or the data")
        p.add_argument("--system", help="take the ambient box from this reference system")
        p.add_argument("--n-mc", type=int, dest="n_mc")
        p.add_argument("--n-candidates", type=int, dest="n_candidates")
        p.add_argument("--seed", type=int, default=0)
        if name == "diag":
            p.add_argument("--out", default="diag.json")
        else:
            p.add_argument("--k1", type=int, default=2)
            p.add_argument("--support", type=float,
                           help=f"kernel support radius (default {K1_SUPPORT_FACTOR} x diam X)")
            p.add_argument("--lambda", dest="lam", default="auto")
            p.add_argument("--r", type=float, default=1.0)
            p.add_argument("--delta", type=float, default=0.05)
            p.add_argument("--solver", choices=["lu", "cholesky"], default="lu")
            p.add_argument("--out", default="vf.json")

    def field_flags(p):
        p.add_argument("--vf", help="fitted field model JSON")
        p.add_argument("--exact-field", dest="exact_field",
                       help="use the exact field of a reference system instead")

    p = add("fit-lyap", cmd_fit_lyap, "fit V or T by generalized interpolation")
    field_flags(p)
    p.add_argument("--mode", choices=["V", "T"], default="V")
    p.add_argument("--k2", type=int, default=2)
    p.add_argument("--support", type=float,
                   help=f"kernel support radius (default {K2_SUPPORT_FACTOR} x diam Omega)")
    p.add_argument("--omega", help="box:lo1,hi1,... or ball:c1,c2:r (default: ambient box)")
    p.add_argument("--xbar", help="equilibrium estimate c1,c2,...")
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--spacing", type=float, default=0.1)
    p.add_argument("--points", help="collocation points CSV (overrides the grid)")
    p.add_argument("--gamma-center", dest="gamma_center")
    p.add_argument("--gamma-radius", dest="gamma_radius", type=float)
    p.add_argument("--gamma-n", dest="gamma_n", type=int)
    p.add_argument("--gamma-spacing", dest="gamma_spacing", type=float)
    p.add_argument("--cbar", type=float, default=1.0)
    p.add_argument("--xiT", type=float, default=0.0)
    p.add_argument("--out", default="lyap.json")

    p = add("verify", cmd_verify, "evaluate orbital derivatives on a verification grid")
    field_flags(p)
    p.add_argument("--lyap", required=False)
    p.add_argument("--system", help="reference system for true-field and oracle checks")
    p.add_argument("--spacing", type=float, help="grid spacing (default h_q / 2)")
    p.add_argument("--out", default="report.json")
    p.add_argument("--grid-csv", dest="grid_csv")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


REQUIRED = {"diag": ["data"], "fit-vf": ["data"], "verify": ["lyap"]}


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse usage errors, --help, --version
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        for key in REQUIRED.get(args.command, []):
            if getattr(args, key) is None:
                raise UsageError(f"--{key} is required")
        args.func(args)
    except UsageError as exc:
        print(f"lyapfit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"lyapfit {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"lyapfit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
