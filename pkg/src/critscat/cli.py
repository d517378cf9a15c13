"""Command-line front end: ``critscat <subcommand> [options]``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import greens, model_resolvent as mr, potentials, scattering, sectors, specfun, verify
from .config import ConfigError, ExperimentConfig, load_config


def _num(x) -> str:
    """Shortest round-trip text of a float."""
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _dump_json(obj, fh) -> None:
    json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
    fh.write("\n")


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


@contextlib.contextmanager
def _mapper(jobs: int):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield pool.map
    else:
        yield map


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    for name in ("d", "l", "gamma", "sigma", "potential", "k_min", "k_max", "points_per_period"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
            if name == "sigma" and args.gamma is None:
                cfg.gamma = None
    return cfg


def _spec(cfg: ExperimentConfig):
    return potentials.load_potential(cfg.potential, cfg.d, cfg.l, cfg.resolved_gamma())


def _sigma(cfg: ExperimentConfig, args) -> float:
    if getattr(args, "sigma", None) is not None:
        return args.sigma
    sector = sectors.reduce(cfg.d, cfg.l, cfg.resolved_gamma())
    if not sector.oscillatory:
        raise ValueError("sector is not oscillatory")
    return sector.sigma


# -- subcommands ------------------------------------------------------------------


def cmd_sector(args, cfg, out):
    gamma = cfg.resolved_gamma()
    record = {"sector": sectors.reduce(cfg.d, cfg.l, gamma).to_dict()}
    try:
        record["classification"] = sectors.classify_threshold(cfg.d, gamma).to_dict()
    except ValueError as exc:
        record["classification"] = None
        record["classification_error"] = str(exc)
    _dump_json(record, out)


def cmd_specfun(args, cfg, out):
    sigma = args.sigma if args.sigma is not None else 1.0
    nu = complex(0.0, -sigma)
    funcs = {
        "j": lambda z: specfun.bessel_j(nu, z),
        "h1": lambda z: specfun.hankel1(nu, z),
        "k": lambda z: specfun.bessel_k_imag_order(sigma, z.real),
        "sigma-per": lambda z: specfun.sigma_per(sigma, z.real),
        "gamma": specfun.complex_gamma,
    }
    w = csv.writer(out)
    w.writerow(["input", "re", "im"])
    for text in args.values:
        z = complex(text.replace(" ", ""))
        v = complex(funcs[args.function](z))
        w.writerow([text, _num(v.real), _num(v.imag)])


def cmd_model_resolvent(args, cfg, out):
    sigma = _sigma(cfg, args)
    ks = np.geomspace(args.k_min_abs, args.k_max_abs, args.n)
    errs, slope = mr.expansion_scaling(sigma, ks, args.s, args.s_prime, arg_k=args.arg)
    w = csv.writer(out)
    w.writerow(["abs_k", "expansion_error"])
    for k, e in zip(ks, errs):
        w.writerow([_num(k), _num(e)])
    if args.ladder_json:
        with open(args.ladder_json, "w") as fh:
            _dump_json(_ladder_record(sigma, mr.LADDER_MAX) | {"expansion_slope": slope}, fh)


def _ladder_record(sigma: float, n: int) -> dict:
    kap = mr.dirichlet_ladder(sigma, n)
    return {
        "sigma": sigma,
        "kappa": kap,
        "energies": -kap**2,
        "ratios": kap[1:] / kap[:-1],
        "asymptotic_ratio": math.exp(-math.pi / sigma),
        "zeta_poles": mr.zeta_pole_ladder(sigma, n),
    }


def cmd_eigenvalues(args, cfg, out):
    _dump_json(_ladder_record(_sigma(cfg, args), args.n), out)


def _phase_curve(cfg, mapper):
    spec = _spec(cfg)
    sigma = spec.sector.sigma
    ks = scattering.default_k_grid(sigma, cfg.k_min, cfg.k_max, cfg.points_per_period)
    return spec, scattering.phase_shift_curve(spec, ks, mapper=mapper)


def cmd_phase_shift(args, cfg, out):
    with _mapper(args.jobs) as mapper:
        _, curve = _phase_curve(cfg, mapper)
    w = csv.writer(out)
    w.writerow(["ln_k", "sigma_sr"])
    for lk, s in zip(curve.ln_k, curve.sigma_sr):
        w.writerow([_num(lk), _num(s)])


def cmd_fit_asymptotics(args, cfg, out):
    with _mapper(args.jobs) as mapper:
        spec, curve = _phase_curve(cfg, mapper)
    sigma = spec.sector.sigma
    fit = scattering.fit_threshold_asymptotics(curve, sigma)
    record = fit.to_dict()
    slope, period = scattering.threshold_slope(curve)
    record.update({"slope": slope, "period": period})
    th = scattering.theoretical_constants(spec)
    record["theoretical"] = {"theta0": th.theta0, "C1": th.C1, "C2": th.C2,
                             "D": th.D, "error": th.error}
    _dump_json(record, out)


def cmd_greens(args, cfg, out):
    spec = _spec(cfg)
    probes = cfg.probe_tuples()
    sigma = spec.sector.sigma
    ks = greens.default_k_grid(sigma, args.k_min_abs, args.k_max_abs)
    with _mapper(args.jobs) as mapper:
        G = greens.green_trace(spec, ks, probes, mapper=mapper)
    w = csv.writer(out)
    head = ["ln_abs_k"]
    for r, rp in probes:
        head += [f"re_G_{r:g}_{rp:g}", f"im_G_{r:g}_{rp:g}"]
    w.writerow(head)
    for k, row in zip(ks, G):
        line = [_num(math.log(abs(k)))]
        for g in row:
            line += [_num(g.real), _num(g.imag)]
        w.writerow(line)
    if args.fit_json:
        fit = greens.extract_oscillation(spec, ks, probes, G=G)
        with open(args.fit_json, "w") as fh:
            _dump_json(fit.to_dict(), fh)


def cmd_wkb(args, cfg, out):
    lams = np.geomspace(args.lambda_max, args.lambda_min, args.n)
    gamma = cfg.resolved_gamma()
    w = csv.writer(out)
    w.writerow(["ln_lambda", "integral"])
    for lam in lams:
        w.writerow([_num(math.log(lam)), _num(scattering.wkb_phase_integral(gamma, lam, args.r0, args.mu))])


def cmd_verify(args, cfg, out):
    numbers = sorted({int(x) for x in args.only.split(",")}) if args.only else None
    with _mapper(args.jobs) as mapper:
        results = []
        for n in numbers or sorted(verify.CHECKS):
            res = verify.run_criterion(n, args.preset, mapper)
            results.append(res)
            print(f"{res.line()}  ({res.seconds:.1f} s)", file=out, flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=out)
    if args.json:
        with open(args.json, "w") as fh:
            _dump_json([{"number": r.number, "title": r.title, "passed": r.passed,
                         "seconds": r.seconds, "details": r.details} for r in results], fh)
    return 0 if passed == len(results) else 1


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI or JSON configuration file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    sector = argparse.ArgumentParser(add_help=False)
    sector.add_argument("--d", type=int)
    sector.add_argument("--l", type=int)
    sector.add_argument("--gamma", type=float)
    sector.add_argument("--sigma", type=float, help="oscillation rate; sets gamma for the sector")
    sector.add_argument("--potential", help="preset name or JSON potential file")
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--k-min", dest="k_min", type=float)
    grid.add_argument("--k-max", dest="k_max", type=float)
    grid.add_argument("--points-per-period", dest="points_per_period", type=int)

    p = argparse.ArgumentParser(prog="critscat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sector", parents=[common, sector], help="sector data and threshold classification (JSON)")
    s.set_defaults(func=cmd_sector)

    s = sub.add_parser("specfun", parents=[common], help="evaluate special functions (CSV)")
    s.add_argument("--function", choices=["j", "h1", "k", "sigma-per", "gamma"], default="h1")
    s.add_argument("--sigma", type=float)
    s.add_argument("values", nargs="+", help="arguments, complex allowed (e.g. 1+2j)")
    s.set_defaults(func=cmd_specfun)

    s = sub.add_parser("model-resolvent", parents=[common, sector],
                       help="expansion error of the model kernel (CSV) and ladders (JSON)")
    s.add_argument("--k-min", dest="k_min_abs", type=float, default=1e-4)
    s.add_argument("--k-max", dest="k_max_abs", type=float, default=1e-1)
    s.add_argument("--n", type=int, default=7)
    s.add_argument("--arg", type=float, default=math.pi / 4, help="arg k of the sampling ray")
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--s-prime", dest="s_prime", type=float, default=1.5)
    s.add_argument("--ladder-json", dest="ladder_json")
    s.set_defaults(func=cmd_model_resolvent)

    s = sub.add_parser("eigenvalues", parents=[common, sector], help="Dirichlet eigenvalue ladder (JSON)")
    s.add_argument("--n", type=int, default=8)
    s.set_defaults(func=cmd_eigenvalues)

    s = sub.add_parser("phase-shift", parents=[common, sector, grid], help="phase-shift curve (CSV)")
    s.set_defaults(func=cmd_phase_shift)

    s = sub.add_parser("fit-asymptotics", parents=[common, sector, grid],
                       help="threshold constants of the phase shift (JSON)")
    s.set_defaults(func=cmd_fit_asymptotics)

    s = sub.add_parser("greens", parents=[common, sector], help="Green's function traces (CSV)")
    s.add_argument("--k-min", dest="k_min_abs", type=float, default=2e-8)
    s.add_argument("--k-max", dest="k_max_abs", type=float, default=1e-4)
    s.add_argument("--fit-json", dest="fit_json")
    s.set_defaults(func=cmd_greens)

    s = sub.add_parser("wkb", parents=[common, sector], help="semiclassical phase integral (CSV)")
    s.add_argument("--mu", type=float, default=2.0)
    s.add_argument("--r0", type=float, default=1.0)
    s.add_argument("--lambda-min", dest="lambda_min", type=float, default=1e-12)
    s.add_argument("--lambda-max", dest="lambda_max", type=float, default=1e-4)
    s.add_argument("--n", type=int, default=40)
    s.set_defaults(func=cmd_wkb)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--preset", default="compact-bump")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.add_argument("--json", help="write measured details to this file")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("d", "l", "gamma", "sigma", "potential", "k_min", "k_max", "points_per_period"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        cfg = _config(args)
        with _output(args.out) as out:
            status = args.func(args, cfg, out)
    except ConfigError as exc:
        print(f"critscat: configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"critscat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
