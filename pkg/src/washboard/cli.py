"""Command-line front end.

Subcommands:

* ``cell``       - inspect / validate / normalize unit-cell incidence data
* ``derive``     - symmetrizing transform plus its consistency checks
* ``slice``      - potential energies on a 1-D or 2-D grid
* ``stationary`` - fixed points, uniaxial critical point, ground state
* ``boundary``   - pinned-phase boundary in the (R, I) plane
* ``simulate``   - time evolution with voltage summaries, single or multi seed

With ``--out DIR`` each command writes its artifacts plus a ``manifest.json``
with SHA-256 digests; without it the result is printed as JSON to stdout.
Artifacts embed no timestamps, so identical inputs give identical bytes.
Each error class maps to its own exit code (see EXIT_CODES).
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import __version__
from .cells import (builtin_cell, dumps_cell, load_cell, parse_number,
                    validate_cell)
from .dynamics import SimulationConfig, mean_voltage, simulate
from .errors import (AsymmetricTarget, BadSliceSpec, CanonicalMismatch,
                     DimensionMismatch, EmptyTrajectory, InvalidConfig,
                     IOFailure, MissingVelocities, NoConvergence,
                     NotPositiveDefinite, NotPSD, NumericalBlowup, ParseError,
                     RootBranchLost, SingularIncidence, UnsupportedFrustration,
                     ValidationError, WashboardError)
from .fileio import (canonical_json, write_boundary_csv, write_json,
                     write_manifest, write_slice_csv, write_trajectory_csv)
from .potential import (build_potential, fd_check, periodicity_check,
                        reduced_embedding_check, slice_grid)
from .stationary import (critical_current_uniaxial, companion_report,
                         find_fixed_point, find_ground_state, pinned_boundary)
from .transform import derive_transform, verify_exactness

EXIT_CODES = {
    ParseError: 2,
    ValidationError: 3,
    InvalidConfig: 4,
    UnsupportedFrustration: 5,
    NoConvergence: 6,
    RootBranchLost: 7,
    NumericalBlowup: 8,
    SingularIncidence: 9,
    AsymmetricTarget: 10,
    NotPositiveDefinite: 11,
    CanonicalMismatch: 12,
    DimensionMismatch: 13,
    BadSliceSpec: 14,
    NotPSD: 15,
    EmptyTrajectory: 16,
    MissingVelocities: 17,
    IOFailure: 18,
    WashboardError: 19,
}


def _exit_code(exc: WashboardError) -> int:
    for klass in type(exc).__mro__:
        if klass in EXIT_CODES:
            return EXIT_CODES[klass]
    return EXIT_CODES[WashboardError]


class _Sink:
    """Collects a command's artifacts; files when --out is set."""

    def __init__(self, out_dir):
        self.dir = out_dir
        self.names = []
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def emit_json(self, name: str, obj) -> None:
        if self.dir:
            write_json(self.path(name), obj)
            self.names.append(name)

    def emit(self, name: str, writer, *payload) -> None:
        if self.dir:
            writer(self.path(name), *payload)
            self.names.append(name)


# ------------------------------------------------------------------
# run-spec config files (simulate)
# ------------------------------------------------------------------

_SPEC_ALIASES = {
    "f": "f", "cell_file": "cell_file", "cell-file": "cell_file",
    "scheme": "scheme", "backend": "backend",
    "ix": "i_x", "i_x": "i_x", "iy": "i_y", "i_y": "i_y",
    "omega": "omega", "omega_noise": "omega",
    "beta_c": "beta_c", "beta-c": "beta_c",
    "dt": "dt", "steps": "steps", "n_steps": "steps",
    "seed": "seed",
    "record_stride": "record_stride", "record-stride": "record_stride",
    "n_seeds": "n_seeds", "n-seeds": "n_seeds",
    "window": "window", "init": "init", "out": "out",
    "blowup_retries": "blowup_retries",
}
_SPEC_INTS = {"steps", "seed", "record_stride", "n_seeds", "blowup_retries"}
_SPEC_FLOATS = {"i_x", "i_y", "omega", "beta_c", "dt", "window"}


def parse_run_spec(text: str) -> dict:
    """Parse a ``key: value`` run-spec file into canonical simulate settings.

    Unknown or duplicate keys raise ValidationError naming the key; syntax
    problems raise ParseError with line (and column) information.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        if ":" not in stripped:
            raise ParseError("expected 'key: value'", line=lineno, column=1)
        key_raw, _, value = stripped.partition(":")
        key_raw = key_raw.strip()
        value = value.strip()
        if not key_raw:
            raise ParseError("empty key", line=lineno, column=1)
        if not value:
            raise ParseError(f"key {key_raw!r} has no value", line=lineno,
                             column=len(key_raw) + 2)
        key = _SPEC_ALIASES.get(key_raw.lower())
        if key is None:
            raise ValidationError(f"unknown key {key_raw!r}", key=key_raw)
        if key in out:
            raise ValidationError(f"duplicate key {key_raw!r}", key=key_raw)
        if key in _SPEC_INTS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ValidationError(
                    f"key {key_raw!r} needs an integer, got {value!r}",
                    key=key_raw) from None
        elif key in _SPEC_FLOATS:
            try:
                out[key] = parse_number(value)
            except ParseError:
                raise ValidationError(
                    f"key {key_raw!r} needs a number, got {value!r}",
                    key=key_raw) from None
        else:
            out[key] = value
    return out


# ------------------------------------------------------------------
# shared construction helpers
# ------------------------------------------------------------------

def _get_cell(f, cell_file):
    if cell_file:
        return load_cell(cell_file)
    return builtin_cell(f or "1/2")


def _get_potential(f, cell_file, i_x, i_y, omega):
    cell = _get_cell(f, cell_file)
    return cell, build_potential(cell, derive_transform(cell),
                                 i_x=i_x or 0.0, i_y=i_y or 0.0,
                                 omega_noise=omega or 0.0)


def _parse_init(text, potential):
    if text is None:
        return None
    if text.strip().lower() == "ground":
        return find_ground_state(potential).x
    vals = [parse_number(tok) for tok in text.split(",")]
    return np.array(vals, dtype=float)


def _fixed_point_record(potential, fp) -> dict:
    rec = {"x": fp.x, "classification": fp.classification,
           "eigenvalues": fp.eigenvalues, "residual": fp.residual,
           "iterations": fp.iterations,
           "energy": float(potential.energy(fp.x))}
    i_x, i_y = potential.currents
    if potential.n_vars == 3 and i_x:
        rec["companions"] = companion_report(fp.x, i_x, i_y)
    return rec


# ------------------------------------------------------------------
# handlers (each returns: result-for-stdout, manifest-parameters)
# ------------------------------------------------------------------

def _cmd_cell(args, sink: _Sink):
    cell = _get_cell(args.f, args.cell_file)
    report = validate_cell(cell)
    result = {"name": cell.name, "frustration": f"{cell.f_num}/{cell.f_den}",
              "n_vars": cell.n_vars, "n_phases": cell.n_phases,
              "ok": report.ok,
              "checks": [{"check": nm, "passed": ok, "detail": detail}
                         for nm, ok, detail in report.checks]}
    sink.emit_json("cell_report.json", result)
    if args.save:
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(dumps_cell(cell))
    params = {"f": args.f or "1/2", "cell_file": args.cell_file or "",
              "save": args.save or ""}
    return result, params


def _cmd_derive(args, sink: _Sink):
    cell, potential = _get_potential(args.f, args.cell_file,
                                     args.i_x, args.i_y, 0.0)
    tr = potential.transform
    rep = verify_exactness(cell, tr)
    checks = fd_check(potential)
    result = {
        "cell": cell.name,
        "D": tr.D, "D_inv": tr.D_inv, "target": tr.target,
        "exactness": {"coefficient_mismatch": rep.coefficient_mismatch,
                      "x_asymmetry_max": rep.x_asymmetry_max,
                      "y_asymmetry_max": rep.y_asymmetry_max,
                      "n_points": rep.n_points},
        "period": potential.period,
        "tilt": potential.tilt,
        "noise_cov_unit_omega": potential.with_params(omega_noise=1.0).noise_cov,
        "checks": {"fd_grad_rel_max": checks["grad_rel_max"],
                   "fd_hess_abs_max": checks["hess_abs_max"],
                   "periodicity_residual": periodicity_check(potential),
                   "reduced_embedding_max":
                       reduced_embedding_check(args.i_x or 0.3)
                       if cell.name == "half" else None},
    }
    sink.emit_json("transform.json", result)
    params = {"f": args.f or "1/2", "cell_file": args.cell_file or "",
              "Ix": args.i_x or 0.0, "Iy": args.i_y or 0.0}
    return result, params


def _cmd_slice(args, sink: _Sink):
    cell, potential = _get_potential(args.f, args.cell_file,
                                     args.i_x, args.i_y, 0.0)
    axes = [a.strip() for a in args.axes.split(",") if a.strip()]
    if not args.range:
        raise BadSliceSpec("need --range lo:hi for each axis")
    ranges = []
    for spec in args.range:
        lo, sep, hi = spec.partition(":")
        if not sep:
            raise BadSliceSpec(f"range {spec!r} is not of the form lo:hi")
        ranges.append((parse_number(lo), parse_number(hi)))
    try:
        res = [int(r) for r in str(args.resolution).split(",")]
    except ValueError:
        raise BadSliceSpec(f"bad --resolution {args.resolution!r}") from None
    if len(res) == 1:
        res = res * len(axes)
    fixed = {}
    for item in args.fix or ():
        name, sep, val = item.partition("=")
        if not sep:
            raise BadSliceSpec(f"--fix {item!r} is not of the form axis=value")
        fixed[name.strip()] = parse_number(val)
    grid = slice_grid(potential, axes, ranges, res, fixed=fixed)
    sink.emit("slice.csv", write_slice_csv, grid)
    meta = {"axes": list(grid.axes), "fixed": grid.fixed,
            "shape": list(grid.values.shape),
            "min_energy": float(grid.values.min()),
            "max_energy": float(grid.values.max())}
    sink.emit_json("slice.json", meta)
    params = {"f": args.f or "1/2", "cell_file": args.cell_file or "",
              "Ix": args.i_x or 0.0, "Iy": args.i_y or 0.0,
              "axes": args.axes, "range": list(args.range),
              "resolution": str(args.resolution),
              "fix": list(args.fix or ())}
    return meta, params


def _cmd_stationary(args, sink: _Sink):
    cell, potential = _get_potential(args.f, args.cell_file,
                                     args.i_x, args.i_y, 0.0)
    result: dict = {}
    if args.critical:
        crit = critical_current_uniaxial()
        result["critical"] = {
            "i_c": crit.i_c, "x": crit.x, "z": crit.z,
            "i_c_numeric": crit.i_c_numeric, "x_numeric": crit.x_numeric,
            "z_numeric": crit.z_numeric, "max_deviation": crit.max_deviation}
        sink.emit_json("critical.json", result["critical"])
    if args.global_min:
        gs = find_ground_state(potential, resolution=args.grid)
        result["ground_state"] = _fixed_point_record(potential, gs)
        sink.emit_json("ground_state.json", result["ground_state"])
    if not (args.critical or args.global_min):
        x0 = _parse_init(args.init, potential)
        if x0 is None:
            x0 = np.zeros(potential.n_vars)
        fp = find_fixed_point(potential, x0)
        result["fixed_point"] = _fixed_point_record(potential, fp)
        sink.emit_json("fixed_point.json", result["fixed_point"])
    params = {"f": args.f or "1/2", "cell_file": args.cell_file or "",
              "Ix": args.i_x or 0.0, "Iy": args.i_y or 0.0,
              "critical": bool(args.critical),
              "global_min": bool(args.global_min),
              "init": args.init or "", "grid": args.grid}
    return result, params


def _cmd_boundary(args, sink: _Sink):
    r_values = np.linspace(0.0, 1.0, args.r_grid)
    curve = pinned_boundary(r_values, cross_validate=not args.no_cross_validate)
    sink.emit("boundary.csv", write_boundary_csv, curve)
    summary = {"n_points": int(curve.r.size),
               "i_at_r0": float(curve.i_disc[0]),
               "i_at_r1": float(curve.i_disc[-1]),
               "monotone_increasing": curve.monotone_increasing,
               "max_residual": curve.max_residual,
               "cross_validated": not args.no_cross_validate}
    sink.emit_json("boundary.json", summary)
    params = {"r_grid": args.r_grid,
              "cross_validate": not args.no_cross_validate}
    return summary, params


def _merge_run_spec(args) -> dict:
    settings = {}
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                settings = parse_run_spec(fh.read())
        except OSError as exc:
            raise IOFailure(f"cannot read config {args.config}: {exc}") from exc
    overrides = {"f": args.f, "cell_file": args.cell_file, "scheme": args.scheme,
                 "i_x": args.i_x, "i_y": args.i_y, "omega": args.omega,
                 "beta_c": args.beta_c, "dt": args.dt, "steps": args.steps,
                 "seed": args.seed, "record_stride": args.record_stride,
                 "n_seeds": args.n_seeds, "window": args.window,
                 "init": args.init, "backend": args.backend,
                 "blowup_retries": args.blowup_retries}
    for key, val in overrides.items():
        if val is not None:
            settings[key] = val
    return settings


def _cmd_simulate(args, sink: _Sink):
    s = _merge_run_spec(args)
    if args.out is None and "out" in s:
        sink.__init__(s["out"])
    if s.get("steps") is None:
        raise InvalidConfig("steps is required (flag --steps or config key)")
    scheme = s.get("scheme", "overdamped")
    config = SimulationConfig(
        scheme=scheme,
        n_steps=int(s["steps"]),
        dt=float(s.get("dt", 1e-3)),
        beta_c=float(s.get("beta_c", 0.0)),
        omega_noise=float(s.get("omega", 0.0)),
        currents=(float(s.get("i_x", 0.0)), float(s.get("i_y", 0.0))),
        seed=s.get("seed"),
        record_stride=int(s.get("record_stride", 1)),
        blowup_retries=int(s.get("blowup_retries", 3)))
    cell, potential = _get_potential(s.get("f"), s.get("cell_file"),
                                     0.0, 0.0, 0.0)
    x0 = _parse_init(s.get("init"),
                     potential.with_params(i_x=config.currents[0],
                                           i_y=config.currents[1]))
    window = float(s.get("window", 0.5))
    n_seeds = s.get("n_seeds")
    backend = s.get("backend")

    if n_seeds:
        base = np.random.SeedSequence(s.get("seed"))
        seeds = [int(v) for v in base.generate_state(int(n_seeds), dtype=np.uint64)]
    else:
        seeds = [s.get("seed")]

    runs = []
    voltages = []
    for k, seed in enumerate(seeds):
        cfg = dataclasses.replace(config, seed=seed)
        traj = simulate(potential, cfg, x0=x0, backend=backend)
        v = mean_voltage(traj, window=window)
        voltages.append(v)
        name = f"trajectory_{k:02d}.csv" if n_seeds else "trajectory.csv"
        sink.emit(name, write_trajectory_csv, traj)
        runs.append({"seed": traj.seed_used, "file": name,
                     "mean_voltage": v, "retries_used": traj.retries_used,
                     "dt": traj.config.dt, "n_steps": traj.config.n_steps,
                     "record_stride": traj.config.record_stride})

    summary = {"scheme": scheme, "cell": cell.name,
               "currents": list(config.currents),
               "omega": config.omega_noise, "beta_c": config.beta_c,
               "window": window, "backend": backend or "default",
               "runs": runs,
               "ensemble_mean_voltage": np.mean(voltages, axis=0)}
    sink.emit_json("summary.json", summary)
    params = {key: (val if not isinstance(val, (list, tuple)) else list(val))
              for key, val in sorted(s.items())}
    return summary, params


# ------------------------------------------------------------------
# argument parsing
# ------------------------------------------------------------------

def _add_cell_args(sp, currents: bool = True):
    sp.add_argument("--f", help="built-in frustration: 1/2, 1/3, single_junction")
    sp.add_argument("--cell-file", help="load the cell from a file instead")
    if currents:
        sp.add_argument("--Ix", dest="i_x", type=float,
                        help="longitudinal bias current (units of I_c)")
        sp.add_argument("--Iy", dest="i_y", type=float,
                        help="transverse bias current (units of I_c)")


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="washboard",
        description="Washboard-potential toolkit for frustrated junction arrays")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("cell", help="validate and normalize a unit cell")
    _add_cell_args(sp, currents=False)
    sp.add_argument("--save", help="write the normalized cell file here")
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_cell)

    sp = sub.add_parser("derive", help="symmetrizing transform and checks")
    _add_cell_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_derive)

    sp = sub.add_parser("slice", help="potential energies on a grid")
    _add_cell_args(sp)
    sp.add_argument("--axes", required=True, help="e.g. x,z")
    sp.add_argument("--range", action="append",
                    help="lo:hi per axis (pi/sqrt expressions allowed)")
    sp.add_argument("--resolution", default="101", help="points per axis")
    sp.add_argument("--fix", action="append", help="axis=value, repeatable")
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_slice)

    sp = sub.add_parser("stationary", help="fixed points and critical values")
    _add_cell_args(sp)
    sp.add_argument("--init", help="start point 'v1,v2,...' or 'ground'")
    sp.add_argument("--critical", action="store_true",
                    help="uniaxial critical current (closed form vs numeric)")
    sp.add_argument("--global-min", action="store_true",
                    help="grid-scan ground state")
    sp.add_argument("--grid", type=int, default=41,
                    help="scan resolution per axis for --global-min")
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_stationary)

    sp = sub.add_parser("boundary", help="pinned-phase boundary I(R)")
    sp.add_argument("--r-grid", type=int, default=101,
                    help="number of R samples in [0, 1]")
    sp.add_argument("--no-cross-validate", action="store_true",
                    help="skip the minimum-continuation cross-check")
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_boundary)

    sp = sub.add_parser("simulate", help="integrate trajectories")
    _add_cell_args(sp)
    sp.add_argument("--scheme", choices=("overdamped", "underdamped", "hamiltonian"))
    sp.add_argument("--omega", type=float, help="noise strength sqrt(2kT/E_J)")
    sp.add_argument("--beta-c", dest="beta_c", type=float,
                    help="Stewart-McCumber parameter (inertia)")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--record-stride", dest="record_stride", type=int)
    sp.add_argument("--n-seeds", dest="n_seeds", type=int,
                    help="run this many seeds derived from --seed")
    sp.add_argument("--window", type=float,
                    help="trailing fraction for the voltage average")
    sp.add_argument("--init", help="start point 'v1,v2,...' or 'ground'")
    sp.add_argument("--backend", help="kernel backend: cython or numpy")
    sp.add_argument("--blowup-retries", dest="blowup_retries", type=int)
    sp.add_argument("--config", help="run-spec file with key: value lines")
    sp.add_argument("--out")
    sp.set_defaults(handler=_cmd_simulate)
    return top


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    sink = _Sink(getattr(args, "out", None))
    try:
        result, params = args.handler(args, sink)
    except KeyboardInterrupt:
        if sink.dir:
            sink.emit_json("error.json", {"error": "Interrupted"})
            write_manifest(sink.dir, args.command, {}, sink.names,
                           status="incomplete")
        print("interrupted", file=sys.stderr)
        return 130
    except WashboardError as exc:
        if sink.dir:
            sink.emit_json("error.json",
                           {"error": type(exc).__name__, "message": str(exc)})
            write_manifest(sink.dir, args.command, {}, sink.names,
                           status="incomplete")
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    if sink.dir:
        write_manifest(sink.dir, args.command, params, sink.names)
        print(f"wrote {len(sink.names) + 1} artifacts to {sink.dir}")
    else:
        sys.stdout.write(canonical_json(result))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
