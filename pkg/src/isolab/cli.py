"""Command line front end.

Every run resolves its configuration (flags over config file over defaults),
writes its artifacts atomically into ``--out`` and finishes with a
``manifest.json`` that echoes the resolved configuration.  Passing that
manifest back through ``--config`` repeats the run.

Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "seed": 7,
    "theta": [0.31, 0.47, 0.29, -0.93],
    "sigma": 0.3,
    "x": None,
    "t6": 0.4,
    "t6_end": 0.5,
    "t0": 0.05,
    "t5": 1.2,
    "t5_end": 1.4,
    "theta5": [0.31, -0.29, -0.46],
    "samples": 11,
    "n_max": 16,
    "tol": 1e-10,
    "flow_tol": 1e-12,
    "batch": None,
    "count": 0,
    "jobs": None,
    "out": "isolab-out",
}

TOL_KEYS = ("tol", "flow_tol")


# -- configuration ------------------------------------------------------------------------


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def load_config_file(path):
    """A JSON object of settings, or a manifest written by an earlier run."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data.get("config", data)


def resolve(command, args):
    cfg = dict(DEFAULTS)
    if args.config:
        extra = load_config_file(args.config)
        unknown = set(extra) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update({k: v for k, v in extra.items() if k != "command"})
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if cfg["jobs"] is None:
        cfg["jobs"] = int(os.environ.get("ISOLAB_JOBS", "1") or 1)
    cfg["command"] = command
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    seed = cfg["seed"]
    if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    for key in TOL_KEYS:
        v = cfg[key]
        if not isinstance(v, (int, float)) or not 1e-14 <= v <= 1e-1:
            raise ConfigError(f"{key} must lie in [1e-14, 1e-1]")
    if len(cfg["theta"]) != 4:
        raise ConfigError("theta needs four values: theta0, theta1, thetat, thetainf")
    if len(cfg["theta5"]) != 3:
        raise ConfigError("theta5 needs three values: theta0, theta1, thetainf")
    if not isinstance(cfg["samples"], int) or cfg["samples"] < 1:
        raise ConfigError("samples must be a positive integer")
    if not isinstance(cfg["n_max"], int) or cfg["n_max"] < 1:
        raise ConfigError("n_max must be a positive integer")
    if not isinstance(cfg["jobs"], int) or cfg["jobs"] < 1:
        raise ConfigError("jobs must be a positive integer")


def rng_for(cfg, stream=0):
    """Counter-based generator keyed by the seed; ``stream`` separates uses."""
    return np.random.Generator(np.random.Philox(key=[cfg["seed"], stream]))


# -- artifacts -------------------------------------------------------------------------------


class Outputs:
    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = {}

    def write(self, name, text):
        path = self.dir / name
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=f".{name}.")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def write_json(self, name, obj):
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def manifest(self, cfg, status, summary=None):
        return self.write_json("manifest.json", {
            "config": cfg, "status": status, "version": __version__,
            "outputs": dict(sorted(self.files.items())), "summary": summary or {},
        })


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


# -- shared setup --------------------------------------------------------------------------


def _thetas6(cfg):
    from .painleve6 import make_thetas
    return make_thetas(*[complex(v) for v in cfg["theta"]])


def _seed_x(cfg):
    if cfg["x"] is not None:
        x = cfg["x"]
        return complex(*x) if isinstance(x, list) else complex(x)
    g = rng_for(cfg, 1)
    return complex(0.2 + 0.05 * g.normal(), 0.3 + 0.05 * g.normal())


def base_state(cfg, t):
    from .painleve6 import state_with_sigma
    return state_with_sigma(complex(t), _thetas6(cfg), complex(cfg["sigma"]), _seed_x(cfg))


def _map(cfg, fn, items):
    if cfg["jobs"] > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- commands ----------------------------------------------------------------------------


def cmd_monodromy(cfg, out):
    from .fuchsian import monodromy_point_p6
    from .painleve6 import assemble
    st = base_state(cfg, cfg["t6"])
    mp = monodromy_point_p6(assemble(st), tol=cfg["flow_tol"], thetas=st.thetas,
                            cyclic_tol=1e-7)
    doc = mp.to_json()
    doc["state"] = {"t": _c(st.t), "z": {k: _c(v) for k, v in st.z.items()},
                    "u": {k: _c(v) for k, v in st.u.items()}}
    out.write_json("monodromy.json", doc)
    for k, m in mp.matrices.items():
        print(f"M_{k:<3s} = {np.array2string(m, precision=6)}".replace("\n", "\n" + " " * 8))
    print(f"cyclic residual {mp.residuals['cyclic']:.3e}, trace residual {mp.residuals['trace']:.3e}")
    return {"cyclic": mp.residuals["cyclic"], "trace": mp.residuals["trace"]}


def cmd_flow6(cfg, out):
    from .painleve6 import first_integrals, schlesinger_flow, trajectory_csv
    st = base_state(cfg, cfg["t6"])
    grid = list(np.linspace(cfg["t6"], cfg["t6_end"], cfg["samples"]))
    states = schlesinger_flow(st, grid[-1], cfg["tol"], samples=grid)
    out.write("flow6.csv", trajectory_csv(states))
    drift = max(max(first_integrals(s).values()) for s in states)
    print(f"flow6: {len(states)} samples, first-integral drift {drift:.3e}")
    return {"first_integral_drift": drift}


def _state5(cfg):
    from .painleve5 import random_state5, theta5
    return random_state5(rng_for(cfg, 2), theta5(*cfg["theta5"]), complex(cfg["t5"]))


def cmd_flow5(cfg, out):
    import csv
    import io

    from .painleve5 import idm5_flow, sigma5
    st = _state5(cfg)
    grid = list(np.linspace(cfg["t5"], cfg["t5_end"], cfg["samples"]))
    states = idm5_flow(st, grid[-1], cfg["tol"], samples=grid)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["t5", "z5_re", "z5_im", "y5_re", "y5_im", "u5_re", "u5_im", "sigma5_re",
                "sigma5_im"])
    for s in states:
        sg = sigma5(s)
        w.writerow([repr(complex(s.t).real)] + [repr(x) for v in (s.z, s.y, s.u, sg)
                                                for x in _c(v)])
    out.write("flow5.csv", buf.getvalue())
    print(f"flow5: {len(states)} samples written")
    return {"samples": len(states)}


def cmd_stokes(cfg, out):
    from .painleve5 import IrregularSystem, m5_point
    st = _state5(cfg)
    mp, mt, sd = m5_point(IrregularSystem.from_state(st))
    doc = {"stokes": sd.to_json(), "P5": mp.to_json(), "P5-tilde": mt.to_json(),
           "state": {"t": _c(st.t), "z": _c(st.z), "y": _c(st.y), "u": _c(st.u)}}
    out.write_json("stokes.json", doc)
    print(f"s0 = {sd.s0:.10g}, s1 = {sd.s1:.10g}, cyclic residual {mp.residuals['cyclic']:.3e}")
    return {"cyclic": mp.residuals["cyclic"], "s0": _c(sd.s0), "s1": _c(sd.s1)}


def cmd_ladder(cfg, out):
    from .schlesinger import build_ladder
    base = base_state(cfg, cfg["t0"])
    lad = build_ladder(base, "first-limit", cfg["n_max"], cfg["t5"], cfg["flow_tol"])
    out.write("ladder.json", lad.dumps())
    worst = max(lv.diagnostics.get("first_integral_max", 0.0) for lv in lad.levels)
    print(f"ladder: {len(lad.levels)} levels, worst first-integral residual {worst:.3e}")
    return {"levels": len(lad.levels), "first_integral_max": worst}


def _limit_outputs(out, stem, reports, extraction, mapping):
    from .limits import convergence_csv, gnuplot_script
    out.write(f"{stem}_convergence.csv", convergence_csv(reports))
    out.write(f"{stem}_convergence.gp", gnuplot_script(reports, f"{stem}_convergence.csv",
                                                     f"{stem}: error against eps"))
    out.write_json(f"{stem}_extraction.json", extraction.to_json())
    out.write_json(f"{stem}_map.json", mapping.to_json())
    for r in reports:
        flag = "ok " if r.passed else "LOW"
        print(f"{flag} {r.quantity:<30s} slope {r.slope:6.3f}  last error {r.errors[-1]:.2e}")


def _limit1(cfg):
    from .fuchsian import monodromy_point_p6
    from .limits import convergence_reports, extract_p5_from_ladder, limit1_map
    from .painleve6 import assemble
    from .schlesinger import build_ladder
    base = base_state(cfg, cfg["t0"])
    m6 = monodromy_point_p6(assemble(base), tol=cfg["flow_tol"], thetas=base.thetas)
    mapping = limit1_map(m6, thetas=base.thetas)
    lad = build_ladder(base, "first-limit", cfg["n_max"], cfg["t5"], cfg["flow_tol"])
    ext = extract_p5_from_ladder(lad, "1a", scale=mapping.d0, n_max=cfg["n_max"])
    return base, mapping, lad, ext, convergence_reports(lad, ext, (max(1, cfg["n_max"] - 10),
                                                                   cfg["n_max"]))


def cmd_limit1(cfg, out):
    from .painleve5 import IrregularSystem, m5_point
    _, mapping, _, ext, reports = _limit1(cfg)
    _limit_outputs(out, "limit1", reports, ext, mapping)
    _, _, sd = m5_point(IrregularSystem.from_state(ext.limit_state))
    ds = max(abs(sd.s0 - mapping.stokes.s0), abs(sd.s1 - mapping.stokes.s1))
    print(f"Stokes data of the fitted P5 system vs prediction: {ds:.2e}")
    return {"min_slope": min(r.slope for r in reports), "stokes_mismatch": ds}


def _limit2(cfg):
    from .fuchsian import monodromy_point_p6
    from .limits import convergence_reports, extract_p5_from_ladder, limit2_map
    from .painleve6 import assemble, invert_positions
    from .schlesinger import build_ladder
    base = invert_positions(base_state(cfg, cfg["t0"]))
    m6 = monodromy_point_p6(assemble(base), tol=cfg["flow_tol"], thetas=base.thetas)
    mapping = limit2_map(m6, thetas=base.thetas)
    lad = build_ladder(base, "second-limit", cfg["n_max"], cfg["t5"], cfg["flow_tol"])
    ext = extract_p5_from_ladder(lad, "2", n_max=cfg["n_max"])
    return base, mapping, lad, ext, convergence_reports(lad, ext, (max(1, cfg["n_max"] - 10),
                                                                   cfg["n_max"]))


def cmd_limit2(cfg, out):
    _, mapping, _, ext, reports = _limit2(cfg)
    _limit_outputs(out, "limit2", reports, ext, mapping)
    print(f"K residual {mapping.residuals['K_system']:.2e}")
    return {"min_slope": min(r.slope for r in reports),
            "K_residual": mapping.residuals["K_system"]}


def cmd_equivalence(cfg, out):
    from .limits import equivalence_check
    _, _, lad1, ext1, _ = _limit1(cfg)
    _, _, lad2, ext2, _ = _limit2(cfg)
    rep = equivalence_check(ext1, ext2, lad1, lad2, strict=False)
    out.write_json("equivalence.json", rep)
    for k, v in rep.items():
        print(f"{k:<12s} {v}")
    if not rep["pass"]:
        from .errors import MismatchBeyondTolerance
        raise MismatchBeyondTolerance("the two limits disagree beyond 5e-3")
    return rep


def _solve_line(line):
    from .triangularizer import solve_jsonl
    return next(iter(solve_jsonl([line])), None)


def cmd_triangularize(cfg, out):
    from .linalg import mat_to_json
    from .triangularizer import random_pair
    if cfg["batch"]:
        try:
            lines = [ln for ln in Path(cfg["batch"]).read_text().splitlines() if ln.strip()]
        except OSError as exc:
            raise ConfigError(f"cannot read batch file: {exc}") from exc
    else:
        g = rng_for(cfg, 3)
        lines = []
        for _ in range(cfg["count"]):
            p = random_pair(g)
            lines.append(json.dumps({"M0": mat_to_json(p.M0), "M1": mat_to_json(p.M1)}))
    results = [r for r in _map(cfg, _solve_line, lines) if r is not None]
    out.write("solutions.jsonl", "".join(r + "\n" for r in results))
    worst, errors = 0.0, 0
    for r in results:
        rec = json.loads(r)
        if "error" in rec:
            errors += 1
        worst = max(worst, rec.get("residuals", {}).get("max", 0.0))
    print(f"{len(results)} pairs, max residual {worst:.3e}, {errors} errors")
    return {"pairs": len(results), "max_residual": worst, "errors": errors}


def cmd_selftest(cfg, out):
    from .fuchsian import monodromy_point_p6
    from .painleve6 import assemble
    from .special import gamma_c
    from .triangularizer import random_pair, solve, verify
    checks = {}
    checks["gamma"] = abs(gamma_c(4.5) - math.gamma(4.5)) / math.gamma(4.5)
    g = rng_for(cfg, 4)
    checks["triangularizer"] = max(verify(p, solve(p))["max"]
                                   for p in (random_pair(g) for _ in range(50)))
    st = base_state(cfg, cfg["t6"])
    checks["p6_cyclic"] = monodromy_point_p6(assemble(st), tol=1e-12,
                                             thetas=st.thetas).residuals["cyclic"]
    limits = {"gamma": 1e-12, "triangularizer": 1e-10, "p6_cyclic": 1e-7}
    ok = True
    for k, v in checks.items():
        good = v <= limits[k]
        ok &= good
        print(f"{'pass' if good else 'FAIL'} {k:<15s} {v:.3e} (limit {limits[k]:.0e})")
    out.write_json("selftest.json", checks)
    if not ok:
        raise NumericalError("self test failed")
    return checks


COMMANDS = {
    "monodromy": (cmd_monodromy, "monodromy data of a constrained P6 state"),
    "flow6": (cmd_flow6, "Schlesinger flow of a P6 state with first-integral drift"),
    "flow5": (cmd_flow5, "isomonodromic flow of a random P5 state"),
    "stokes": (cmd_stokes, "Stokes multipliers and monodromy of a random P5 state"),
    "ladder": (cmd_ladder, "first-limit ladder of Schlesinger steps"),
    "limit1": (cmd_limit1, "first limit: convergence tables and the monodromy map"),
    "limit2": (cmd_limit2, "second limit: convergence tables and the monodromy map"),
    "equivalence": (cmd_equivalence, "compare the two limits from one base"),
    "triangularize": (cmd_triangularize, "batch simultaneous triangularization"),
    "selftest": (cmd_selftest, "quick consistency checks"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="isolab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="JSON settings file or an earlier manifest")
        s.add_argument("--out", help="output directory")
        s.add_argument("--seed", type=int)
        s.add_argument("--jobs", type=int, help="worker processes (default $ISOLAB_JOBS or 1)")
        s.add_argument("--theta", type=_floats, help="theta0,theta1,thetat,thetainf")
        s.add_argument("--theta5", type=_floats, help="theta0,theta1,thetainf of a P5 state")
        s.add_argument("--sigma", type=float)
        s.add_argument("--t6", type=float)
        s.add_argument("--t6-end", dest="t6_end", type=float)
        s.add_argument("--t0", type=float, help="time of the ladder base state")
        s.add_argument("--t5", type=float)
        s.add_argument("--t5-end", dest="t5_end", type=float)
        s.add_argument("--samples", type=int)
        s.add_argument("--n-max", dest="n_max", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--flow-tol", dest="flow_tol", type=float)
        if name == "triangularize":
            s.add_argument("--batch", help="JSON-lines file of matrix pairs")
            s.add_argument("--count", type=int, help="random pairs when no batch is given")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = resolve(args.command, args)
        out = Outputs(cfg["out"])
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command][0]
    try:
        summary = fn(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        out.manifest(cfg, "config-error", {"error": str(exc)})
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        out.manifest(cfg, "numerical-failure", {"error": type(exc).__name__, "message": str(exc)})
        return EXIT_NUMERIC
    out.manifest(cfg, "ok", summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
