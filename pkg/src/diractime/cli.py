"""Command-line driver: ``diractime <subcommand> [options]``.

Every run writes one report (JSON or CSV) and exits with
0 when all checks pass, 1 on a tolerance or precondition failure,
2 on bad usage and 3 when the output cannot be written.

Values are in natural units (hbar = c = 1). Geometry options that are left
unset default to sizes scaled by the mass, so ``--m0`` alone rescales a run.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import acceptance, fock
from . import dynamics as dyn
from .algebra import PhysicalConstants
from .errors import PreconditionError
from .lattice import Grid, commutator_ccr_residual, expectation_momentum, gaussian_packet, to_momentum
from .spinors import energy_eigenvalue, energy_spinor, gap_report, sample_family

OUTPUT_DIR_ENV = "DIRACTIME_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("spinors", "gaps", "ccr", "commutator", "zbw", "energy-evolve", "fock", "duality", "all")


class UsageError(Exception):
    pass


# --- serialization -----------------------------------------------------------

def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON: insertion-ordered keys, floats with 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, complex, np.complexfloating)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag}, indent)
    return json.dumps(str(obj))


def checks_csv(checks) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["criterion", "name", "value", "tolerance", "passed"])
    for c in checks:
        w.writerow([c.criterion, c.name, _fmt_float(c.value), _fmt_float(c.tolerance),
                    "true" if c.passed else "false"])
    return buf.getvalue()


def trajectory_csv(tr: dyn.Trajectory) -> str:
    cols = ["t", "T", "T_detrended", "x", "p", "H", "K", "norm"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i, t in enumerate(tr.times):
        w.writerow([_fmt_float(float(t))] + [_fmt_float(float(tr[c][i])) for c in cols[1:]])
    return buf.getvalue()


# --- configuration -----------------------------------------------------------

def _floats(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m0", "--mass", dest="m0", type=float, help="rest mass (default 1)")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    common.add_argument("--output", help="report path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    common.add_argument("--config", help="JSON file of option values; flags take precedence")

    parser = argparse.ArgumentParser(prog="diractime", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")

    p = sub.add_parser("spinors", parents=[common], help="spinor eigen/orthogonality/completeness sweep")
    p.add_argument("--family", choices=("energy", "time", "both"))
    p.add_argument("--sample", type=int, help="number of random arguments (default 1000)")

    sub.add_parser("gaps", parents=[common], help="energy and time spectral gaps")

    for name, help_ in (("ccr", "discrete [x, p] on a centered Gaussian"),
                        ("commutator", "[T, H_D] identity residual on a Gaussian")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--dim", type=int, choices=(1, 3))
        p.add_argument("--grid", type=int, help="points per axis")
        p.add_argument("--length", type=float, help="box length")
        p.add_argument("--sigma", type=float, help="packet width")
        p.add_argument("--localization-tol", dest="localization_tol", type=float)

    p = sub.add_parser("zbw", parents=[common], help="<T(t)> trajectory and Zitterbewegung frequency")
    p.add_argument("--grid", type=int)
    p.add_argument("--length", type=float)
    p.add_argument("--tmax", type=float, help="duration in units of tau0 (default 20)")
    p.add_argument("--samples", type=int)
    p.add_argument("--packet", type=_floats, help="sigma,x0,p0")
    p.add_argument("--polarization", choices=("u", "w", "mixed"))
    p.add_argument("--trajectory", help="also write the trajectory CSV here")

    for name, help_ in (("energy-evolve", "energy flow of an alpha-polarized packet"),
                        ("duality", "d<x>/dt = <c alpha> and d<p>/de = <alpha>/c")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--grid", type=int)
        p.add_argument("--length", type=float)
        p.add_argument("--packet", type=_floats, help="sigma,x0,p0")
        if name == "energy-evolve":
            p.add_argument("--de", type=float, help="energy interval in units of m0 c^2 (default 1)")

    p = sub.add_parser("fock", parents=[common], help="occupation-number checks")
    p.add_argument("--sector", choices=("energy", "time"))
    p.add_argument("--modes", type=int)
    p.add_argument("--check", choices=("anticomm", "spectrum", "displace"))

    sub.add_parser("all", parents=[common], help="every acceptance criterion")
    return parser


def _defaults(command, const):
    lam = const.hbar / (const.m0 * const.c)
    cl = const.c * const.tau0
    p0 = const.m0 * const.c
    base = {"m0": 1.0, "seed": 0, "format": "json", "output": None}
    extra = {
        "spinors": {"family": "both", "sample": 1000},
        "gaps": {},
        "commutator": {"dim": 1},
        "ccr": {"dim": 1, "grid": 64, "length": 20.0 * lam, "sigma": 1.0 * lam, "localization_tol": 1e-8},
        "zbw": {"grid": 512, "length": 400.0 * lam, "tmax": 20.0, "samples": 400,
                "packet": [25.0 * lam, 0.0, p0], "polarization": "mixed", "trajectory": None},
        "energy-evolve": {"grid": 512, "length": 320.0 * lam, "packet": [6.0 * lam, 20.0 * cl, p0], "de": 1.0},
        "duality": {"grid": 512, "length": 320.0 * lam, "packet": [6.0 * lam, 20.0 * cl, p0]},
        "fock": {"sector": "energy", "modes": 6, "check": "spectrum"},
        "all": {},
    }[command]
    return {**base, **extra}


def _commutator_defaults(dim, const):
    lam = const.hbar / (const.m0 * const.c)
    cl = const.c * const.tau0
    if dim == 1:
        return {"grid": 256, "length": 40.0 * lam, "sigma": 2.0 * lam, "localization_tol": 1e-8}
    return {"grid": 16, "length": 32.0 * cl, "sigma": 3.2 * cl, "localization_tol": 5e-2}


def resolve_config(args) -> dict:
    """Merge defaults < config file < explicit flags and validate."""
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")}
    from_file = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config} is not valid JSON: {exc}") from None
        if not isinstance(from_file, dict):
            raise UsageError("config file must hold a JSON object")
        from_file = {k.replace("-", "_"): v for k, v in from_file.items()}
    m0 = given.get("m0", from_file.get("m0", 1.0))
    try:
        const = PhysicalConstants(m0=float(m0))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--m0: {exc}") from None
    defaults = _defaults(args.command, const)
    if args.command == "commutator":
        dim = int(given.get("dim", from_file.get("dim", 1)))
        defaults = {**defaults, "dim": dim, **_commutator_defaults(dim, const)}
    unknown = set(from_file) - set(defaults)
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    cfg = {**defaults, **from_file, **given}
    cfg["m0"] = const.m0
    _validate(args.command, cfg)
    return dict(sorted(cfg.items()))


def _validate(command, cfg):
    def positive(key, integer=False):
        v = cfg[key]
        ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0
        if not ok or (integer and int(v) != v):
            raise UsageError(f"{key} must be a positive {'integer' if integer else 'number'}, got {v!r}")
        if integer:
            cfg[key] = int(v)

    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise UsageError("seed must be an integer in [0, 2^64)")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    for key in ("grid", "sample", "samples", "modes"):
        if key in cfg:
            positive(key, integer=True)
    for key in ("length", "sigma", "tmax", "localization_tol"):
        if key in cfg:
            positive(key)
    if "grid" in cfg and (cfg["grid"] < 4 or cfg["grid"] & (cfg["grid"] - 1)):
        raise UsageError("grid must be a power of two >= 4")
    if "packet" in cfg:
        pk = cfg["packet"]
        if not (isinstance(pk, list) and len(pk) == 3 and all(isinstance(v, (int, float)) and math.isfinite(v)
                                                              for v in pk) and pk[0] > 0):
            raise UsageError("packet must be sigma,x0,p0 with sigma > 0")
        cfg["packet"] = [float(v) for v in pk]
    if "de" in cfg and not (isinstance(cfg["de"], (int, float)) and math.isfinite(cfg["de"])):
        raise UsageError("de must be finite")
    if command == "zbw" and cfg["samples"] < 8:
        raise UsageError("zbw needs at least 8 samples")
    if command == "fock":
        limit = fock.MAX_MODES if cfg["check"] == "anticomm" else fock.MAX_DENSE_MODES
        if cfg["modes"] > limit:
            raise UsageError(f"--modes must be <= {limit} for --check {cfg['check']}")
    if command == "spinors" and cfg["family"] not in ("energy", "time", "both"):
        raise UsageError("family must be energy, time or both")


# --- experiments -------------------------------------------------------------

def _check(name, value, tol):
    return acceptance.Check(0, name, value, tol, float(value) < tol)


def run_spinors(cfg, const):
    fams = ("energy", "time") if cfg["family"] == "both" else (cfg["family"],)
    checks, data = [], {}
    for k, fam in enumerate(fams):
        res = sample_family(cfg["sample"], cfg["seed"] + k, fam, const)
        data[fam] = res
        checks += [_check(f"{fam}_{key}", val, 1e-12) for key, val in res.items()]
    return checks, data


def run_gaps(cfg, const):
    rep = gap_report(const)
    data = {"energy_gap": rep.energy_gap, "time_gap": rep.time_gap, "product_over_h": rep.product_over_h(const)}
    return [_check("product_over_h_minus_4", abs(data["product_over_h"] - 4.0), 1e-12)], data


def _centered_packet(cfg, const, min_resolution):
    g = Grid(cfg["grid"], cfg["length"], dim=cfg["dim"], hbar=const.hbar)
    spinor = (1, 0, 0, 0) if cfg.get("_scalar") else (1, 0.3j, 0.2, -0.5)
    return gaussian_packet(g, 0.0, 0.0, cfg["sigma"], spinor, min_resolution=min_resolution)


def run_ccr(cfg, const):
    f = _centered_packet({**cfg, "_scalar": True}, const, 1.0)
    res = commutator_ccr_residual(f, tol=cfg["localization_tol"])
    data = {"residual": [complex(r) for r in res]}
    return [_check(f"ccr_residual_axis{i}", abs(r), 1e-6) for i, r in enumerate(res)], data


def run_commutator(cfg, const):
    f = _centered_packet(cfg, const, 1.5)
    r = dyn.commutator_TH_residual(f, const, tol=cfg["localization_tol"])
    tol = 1e-6 if cfg["dim"] == 1 else 1e-3
    return [_check("TH_commutator_residual", r, tol)], {"residual": r}


def _packet_1d(cfg, const, spinor):
    sigma, x0, p0 = cfg["packet"]
    g = Grid(cfg["grid"], cfg["length"], hbar=const.hbar)
    return gaussian_packet(g, x0, p0, sigma, spinor)


def run_zbw(cfg, const):
    p0 = cfg["packet"][2]
    u = energy_spinor(p0, 1, "+", const)
    w = energy_spinor(-p0, 2, "-", const)
    u, w = u / np.linalg.norm(u), w / np.linalg.norm(w)
    pol = cfg["polarization"]
    f = _packet_1d(cfg, const, {"u": u, "w": w, "mixed": u + w}[pol])
    if pol != "mixed":
        f = dyn.project_energy(f, +1 if pol == "u" else -1, const)
    tr = dyn.heisenberg_T_trajectory(f, cfg["tmax"] * const.tau0, cfg["samples"], const)
    k_drift = float(np.ptp(tr["K"]))
    osc = float(np.max(np.abs(tr["T_detrended"])))
    data = {"residual_oscillation": osc, "K_drift": k_drift,
            "norm_drift": float(np.max(np.abs(tr["norm"] - 1.0)))}
    checks = [_check("K_drift", k_drift, 1e-8), _check("norm_drift", data["norm_drift"], 1e-11)]
    if pol == "mixed":
        omega = dyn.dominant_frequency(tr.times, tr["T"])
        target = 2.0 * energy_eigenvalue(p0, const) / const.hbar
        data.update({"detected_frequency": omega, "expected_frequency": target})
        checks.append(_check("frequency_rel_error", abs(omega / target - 1.0), 1e-2))
    else:
        checks.append(_check("residual_oscillation", osc, 1e-6))
    if cfg["trajectory"]:
        _write_text(_resolve_path(cfg["trajectory"]), trajectory_csv(tr))
    return checks, data


def run_energy_evolve(cfg, const):
    f = _packet_1d(cfg, const, np.array([1, 0, 0, 1]) / math.sqrt(2.0))
    fm = to_momentum(f)
    de = cfg["de"] * const.rest_energy
    g = dyn.evolve_energy(fm, de, const)
    alpha = dyn.expectation(fm, lambda h: dyn.apply_alpha(h, 0)).real
    rate, target = dyn.momentum_rate_check(fm, const)
    data = {"p_before": expectation_momentum(fm), "p_after": expectation_momentum(g),
            "alpha": alpha, "dp_de": rate, "alpha_over_c": target, "norm_after": g.norm()}
    return [_check("norm_deviation", abs(g.norm() - 1.0), 1e-12),
            _check("dp_de_minus_alpha_over_c", abs(rate - target) * const.c, 1e-2)], data


def run_duality(cfg, const):
    f = _packet_1d(cfg, const, np.array([1, 0, 0, 1]) / math.sqrt(2.0))
    rate, vel = dyn.velocity_check(f, const)
    prate, target = dyn.momentum_rate_check(f, const)
    data = {"dx_dt": rate, "c_alpha": vel, "dp_de": prate, "alpha_over_c": target}
    return [_check("dx_dt_minus_c_alpha", abs(rate - vel) / const.c, 1e-6),
            _check("dp_de_minus_alpha_over_c", abs(prate - target) * const.c, 1e-2)], data


def run_fock(cfg, const):
    tab = fock.ModeTable.default(cfg["sector"], cfg["modes"], const)
    if cfg["check"] == "anticomm":
        rep = fock.anticommutator_table(tab, cfg["seed"])
        data = {"modes": tab.describe(), **rep._asdict()}
        return [_check("anticommutator_deviation", rep.max_deviation, 1e-14)], data
    if cfg["check"] == "spectrum":
        data = fock.spectrum_document(tab, "H" if cfg["sector"] == "energy" else "T0")
        dev = np.abs(np.array(data["eigenvalues"]) - np.sort(fock.occupied_sums(tab))).max()
        return [_check("spectrum_vs_occupied_sums", dev, 1e-12)], data
    a = tab.dual_spacing
    worst = max(fock.displacement_identity_check(tab, [k * a], s0 * const.tau0)
                for k, s0 in ((1, 0.0), (2, 0.25), (-1, 0.5)))
    return [_check("displacement_residual", worst, 1e-10)], {"modes": tab.describe(), "residual": worst}


def run_all(cfg, const):
    checks = acceptance.run_all(cfg["seed"], const)
    summary = {}
    for n, title in acceptance.TITLES.items():
        own = [c for c in checks if c.criterion == n]
        if own:
            summary[str(n)] = {"title": title, "passed": all(c.passed for c in own)}
    return checks, {"criteria": summary}


RUNNERS = {"spinors": run_spinors, "gaps": run_gaps, "ccr": run_ccr, "commutator": run_commutator,
           "zbw": run_zbw, "energy-evolve": run_energy_evolve, "fock": run_fock,
           "duality": run_duality, "all": run_all}


# --- output ------------------------------------------------------------------

def _resolve_path(path):
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_report(command, cfg, checks, data) -> dict:
    failures = [{"name": c.name, "value": c.value, "tolerance": c.tolerance} for c in checks if not c.passed]
    doc = {"command": command, "seed": cfg["seed"], "config": cfg,
           "passed": not failures, "checks": [c.as_dict() for c in checks], "data": data}
    if failures:
        doc["failures"] = failures
    return doc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"diractime {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    const = PhysicalConstants(m0=cfg["m0"])
    try:
        checks, data = RUNNERS[args.command](cfg, const)
    except PreconditionError as exc:
        checks = [acceptance.Check(0, "precondition", exc.measured if exc.measured is not None else math.nan,
                                   0.0, False)]
        data = {"error": str(exc)}
    except OSError as exc:
        print(f"diractime {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"diractime {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = emit_report(args.command, cfg, checks, data)
    text = dumps(doc) + "\n" if cfg["format"] == "json" else checks_csv(checks)
    try:
        if cfg["output"]:
            _write_text(_resolve_path(cfg["output"]), text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"diractime {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if not doc["passed"]:
        if cfg["format"] == "csv" or cfg["output"]:
            print(dumps({"command": args.command, "failures": doc["failures"]}), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
