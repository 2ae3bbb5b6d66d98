"""Command-line front end.

Usage: ``auxskin <group> <action> [--config FILE] [--out DIR] [options]``.

Every run writes delimited-text results into the output directory (``--out``,
else ``$AUXSKIN_OUTPUT_DIR``, else ``[output] directory`` in the config, else
``./auxskin_out``) and echoes the small ones on stdout.  Failures print a single
``auxskin.<module>: <ErrorType>: <message>`` line on stderr.

Exit codes: 0 success, 1 address plan not exactly reachable, 2 validation,
3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import addressing, auc, display, fitting, masks, spring_array, traces
from .catalog import get_dielectric
from .config import check_voltage, parse_config
from .errors import AuxskinError, ValidationError
from .types import HysteresisTrace

OUTPUT_ENV = "AUXSKIN_OUTPUT_DIR"
DEFAULT_OUTPUT = "auxskin_out"
EXIT_NOT_EXACT = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


class UsageError(ValidationError):
    module = "auxskin.cli"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- context


class Run:
    """Config plus command-line overrides for one invocation."""

    def __init__(self, args):
        self.args = args
        self.cfg = parse_config(args.config)
        out = args.out or os.environ.get(OUTPUT_ENV) or self.cfg.output_dir or DEFAULT_OUTPUT
        self.out = Path(out)
        self.written: list[Path] = []

    @property
    def geometry(self):
        return self.cfg.geometry

    def dielectric(self):
        name = getattr(self.args, "dielectric", None)
        if name is None:
            return self.cfg.dielectric
        return get_dielectric(name, self.cfg.catalog)

    def params(self):
        p = self.cfg.params
        changes = {}
        for attr, key, scale in (("voltage", "voltage", 1.0), ("e_gpa", "E", 1e9),
                                 ("mu", "mu", 1.0), ("n_layers", "n_layers", 1)):
            value = getattr(self.args, attr, None)
            if value is not None:
                changes[key] = value * scale
        if "voltage" in changes:
            check_voltage(changes["voltage"], self.cfg.circuit)
        return p.replace(**changes) if changes else p

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        self.written.append(path)
        return path

    def plot(self, fn, name, *a, **kw):
        if getattr(self.args, "plot", False):
            from . import plotting

            self.out.mkdir(parents=True, exist_ok=True)
            self.written.append(getattr(plotting, fn)(*a, path=self.out / name, **kw))

    def mask(self, shape, default=None, pattern_shape=True):
        """Lock mask from ``--pattern FILE`` or ``--preset NAME``.

        With ``pattern_shape`` false a pattern file sets its own grid size.
        """
        pattern = getattr(self.args, "pattern", None)
        preset = getattr(self.args, "preset", None)
        if pattern and preset:
            raise UsageError("give either --pattern or --preset, not both")
        if pattern:
            return masks.load_grid(pattern, shape if pattern_shape else None)
        if preset:
            presets = addressing.figure_presets(shape)
            if preset not in presets:
                raise UsageError(f"unknown preset '{preset}'; choose from {', '.join(presets)}")
            return presets[preset]
        if default is None:
            raise UsageError("a lock pattern is required (--pattern or --preset)")
        return default


# ---------------------------------------------------------------- commands


def cmd_auc_curve(run: Run) -> int:
    a = run.args
    diel, params = run.dielectric(), run.params()
    v_down = a.unloading_voltage
    if v_down is not None:
        check_voltage(v_down, run.cfg.circuit)
    trace = auc.hysteresis_loop(a.strain_max, a.points, run.geometry, diel, params, v_down)
    if a.noise:
        rng = np.random.default_rng(run.cfg.seed if a.seed is None else a.seed)
        trace = HysteresisTrace(trace.strain, trace.force + rng.normal(0.0, a.noise, len(trace)),
                                trace.voltage, trace.branch, trace.metadata)
    path = run.write(a.name, traces.dumps_trace(trace, include_metadata=a.metadata))
    run.plot("plot_trace", Path(a.name).with_suffix(".svg").name, trace,
             title=f"{diel.name}, {params.voltage:g} V")
    print(path)
    return 0


def cmd_auc_equilibrium(run: Run) -> int:
    a = run.args
    diel, params = run.dielectric(), run.params()
    rows = []
    for f in a.force:
        res = auc.solve_equilibrium(f, run.geometry, diel, params, a.theta_prev)
        rows.append((f, params.voltage, res.theta, res.strain, res.residual_torque,
                     res.locked, res.iterations))
    text = _csv(("force_N", "voltage_V", "theta_rad", "strain", "residual_Nm", "locked",
                 "iterations"), rows)
    run.write("equilibrium.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_auc_hold(run: Run) -> int:
    a = run.args
    diel, params = run.dielectric(), run.params()
    f = auc.max_hold_force(run.geometry, diel, params, a.theta)
    tau = auc.stack_friction_torque(run.geometry, diel, params, a.theta)
    k_u, k_l = auc.stiffness_pair(run.geometry, diel, params, a.window)
    text = _csv(("dielectric", "voltage_V", "theta_rad", "friction_torque_Nm",
                 "max_hold_force_N", "k_unlocked_N_per_m", "k_locked_N_per_m",
                 "stiffness_ratio"),
                [(diel.name, params.voltage, a.theta, float(tau), f, k_u, k_l, k_l / k_u)])
    run.write("hold.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_fit_run(run: Run) -> int:
    a = run.args
    paths = a.trace or run.cfg.fit.traces
    if not paths:
        raise UsageError("no traces given (--trace FILE or [fit] traces)")
    loaded = [traces.load_trace(p) for p in paths]
    fc = run.cfg.fit
    strain_max = a.strain_max if a.strain_max is not None else fc.strain_max
    report = fitting.fit_traces(loaded, run.geometry, run.dielectric(), run.params(),
                                fc.e_bracket, fc.mu_bracket, strain_max)
    run.write("fit_summary.csv", report.summary_text())
    run.write("fit_log.txt", report.log_text())
    sys.stdout.write(report.summary_text())
    return 0


def _array_config(run: Run):
    a = run.args
    cfg = run.cfg.array_config()
    if a.rows is not None or a.cols is not None:
        cfg = spring_array.ArrayConfig(a.rows or cfg.rows, a.cols or cfg.cols, cfg.k_unlocked,
                                       cfg.k_locked, cfg.column_pitch, cfg.cell_length)
    return cfg


def cmd_array_axial(run: Run) -> int:
    a = run.args
    cfg = _array_config(run)
    if a.lock_rows is not None:
        mask = run.mask(cfg.shape, spring_array.rows_locked_mask(cfg, a.lock_rows))
    else:
        mask = run.mask(cfg.shape, np.zeros(cfg.shape, dtype=bool))
    k = spring_array.axial_stiffness(cfg, mask)
    cell = spring_array.ScaledAucCell(cfg.k_unlocked, cfg.k_locked, run.geometry) \
        if a.nonlinear else None
    curve = spring_array.axial_force_curve(cfg, mask, np.linspace(0.0, a.strain_max, a.points),
                                           cell)
    run.write("array_axial.csv", _csv(("strain", "displacement_m", "force_N"),
                                      zip(curve.strain, curve.displacement, curve.force)))
    text = _csv(("rows", "cols", "n_locked", "k_unlocked_N_per_m", "axial_stiffness_N_per_m",
                 "relative_stiffness"),
                [(cfg.rows, cfg.cols, int(mask.sum()), cfg.k_unlocked, k, k / cfg.k_unlocked)])
    run.write("array_axial_summary.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_array_bend(run: Run) -> int:
    a = run.args
    cfg = _array_config(run)
    if a.sweep:
        text = spring_array.sweep_csv(spring_array.bending_angle_sweep(cfg, a.strain))
    else:
        if a.lock_cols is not None and (a.pattern or a.preset):
            raise UsageError("give either --lock-cols or a lock pattern, not both")
        if a.lock_cols is not None:
            mask = spring_array.columns_locked_mask(cfg, a.lock_cols)
        else:
            mask = run.mask(cfg.shape)
        res = spring_array.bend_equilibrium(cfg, mask, a.strain)
        count = a.lock_cols if a.lock_cols is not None else int(mask.all(axis=0).sum())
        text = spring_array.sweep_csv([(count, res.total_angle, res.energy)])
    run.write("array_bend.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_address_plan(run: Run) -> int:
    a = run.args
    shape = (a.rows or run.cfg.display.rows, a.cols or run.cfg.display.cols)
    target = run.mask(shape, pattern_shape=a.rows is not None or a.cols is not None)
    plan = addressing.plan_locking(target)
    run.write("address_plan.csv", plan.to_text())
    run.write("address_achieved.txt", masks.dumps_grid(plan.achieved))
    sys.stdout.write(plan.to_text())
    if not plan.exact:
        extra = ";".join(f"({r},{c})" for r, c in sorted(plan.unreachable_extra))
        sys.stderr.write(f"auxskin.addressing: NotExact: pattern is not a row x column product; "
                         f"unreachable cells would also lock: {extra}\n")
        return EXIT_NOT_EXACT
    return 0


def cmd_power_estimate(run: Run) -> int:
    a = run.args
    circuit = run.cfg.circuit
    if a.dielectric is not None:
        diel = run.dielectric()
        if diel.leakage_resistance is not None:
            circuit = addressing.CircuitModel.for_dielectric(
                diel, **{k: getattr(circuit, k) for k in
                         ("C_cell", "R_cell", "R1", "R2", "v_min", "v_max", "logic_current_max")})
    voltage = a.voltage if a.voltage is not None else run.cfg.params.voltage
    if a.cells is not None:
        n = a.cells
    else:
        shape = (run.cfg.display.rows, run.cfg.display.cols)
        n = int(run.mask(shape, np.ones(shape, dtype=bool)).sum())
    est = addressing.electrical_estimate(circuit, voltage, n)
    text = _csv(("voltage_V", "n_cells_locked", "leak_power_per_cell_W",
                 "logic_current_per_cell_A", "total_power_W", "charge_time_constant_s"),
                [(est.voltage, est.n_cells_locked, est.leak_power_per_cell,
                  est.logic_current_per_cell, est.total_power, est.charge_time_constant)])
    run.write("power.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_cost_estimate(run: Run) -> int:
    a = run.args
    shape = (a.rows or run.cfg.display.rows, a.cols or run.cfg.display.cols)
    overhead = a.overhead_usd if a.overhead_usd is not None else run.cfg.per_cell_overhead
    est = addressing.cost_estimate(shape, run.dielectric(), run.geometry, overhead)
    text = _csv(("n_cells", "dielectric_per_cell_usd", "per_cell_usd", "total_usd"),
                [(est.n_cells, est.dielectric_per_cell, est.per_cell, est.total)])
    run.write("cost.csv", text)
    sys.stdout.write(text)
    return 0


def _display_config(run: Run):
    a = run.args
    cfg = run.cfg.display
    changes = {}
    if a.strain_unlocked is not None:
        changes["strain_limit_unlocked"] = a.strain_unlocked
    if a.strain_locked is not None:
        changes["strain_limit_locked"] = a.strain_locked
    if changes:
        kw = dict(rows=cfg.rows, cols=cfg.cols, base_length=cfg.base_length,
                  strain_limit_unlocked=cfg.strain_limit_unlocked,
                  samples_per_cell=cfg.samples_per_cell)
        if "strain_limit_locked" not in changes and "strain_limit_unlocked" not in changes:
            kw["strain_limit_locked"] = cfg.strain_limit_locked
        kw.update(changes)
        cfg = display.DisplayConfig(**kw)
    return cfg


def cmd_display_heightmap(run: Run) -> int:
    cfg = _display_config(run)
    mask = run.mask((cfg.rows, cfg.cols), np.zeros((cfg.rows, cfg.cols), dtype=bool))
    hm = display.heightmap(cfg, mask)
    path = run.write("heightmap.csv", hm.to_text())
    run.plot("plot_heightmap", "heightmap.svg", hm, title="inflated height")
    print(path)
    return 0


def cmd_display_profile(run: Run) -> int:
    a = run.args
    cfg = _display_config(run)
    x = np.linspace(0.0, cfg.base_length, a.points)
    shape = (cfg.rows, cfg.cols)
    mask = run.mask(shape, np.zeros(shape, dtype=bool))
    section = display.center_section(cfg, mask)
    z = section.height(x)
    kappa = display.fit_circle_curvature(x, z)
    locked = display.center_curvature(cfg, np.ones(shape, dtype=bool), a.points)
    ratio = kappa / locked if locked > 0 else math.inf
    lines = [f"# {k}={v}" for k, v in sorted(
        {f"provenance.{k}": v for k, v in cfg.provenance.items()}.items())]
    lines.append(f"# strain_limit_locked={cfg.strain_limit_locked:.9g}")
    lines.append(f"# strain_limit_unlocked={cfg.strain_limit_unlocked:.9g}")
    text = "\n".join(lines) + "\n" + _csv(("x_m", "z_m"), zip(x, z))
    path = run.write("profile.csv", text)
    summary = _csv(("apex_height_m", "fit_curvature_per_m", "curvature_vs_fully_locked"),
                   [(float(np.max(z)), kappa, ratio)])
    run.write("profile_summary.csv", summary)
    run.plot("plot_profile", "profile.svg", x, z, title="centre cross-section")
    print(path)
    sys.stdout.write(summary)
    return 0


# ---------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--config", metavar="FILE", help="INI run configuration (unit-suffixed keys)")
    p.add_argument("--out", metavar="DIR",
                   help=f"output directory (overrides ${OUTPUT_ENV} and the config)")


def _model_flags(p, voltage=True):
    if voltage:
        p.add_argument("--voltage", type=float, metavar="V",
                       help="electroadhesion voltage [V]; 0 or within the supply range")
    p.add_argument("--dielectric", metavar="NAME", help="dielectric name from the catalog [-]")
    p.add_argument("--e-gpa", type=float, metavar="GPA", help="hinge Young's modulus [GPa]")
    p.add_argument("--mu", type=float, help="effective friction coefficient [-]")
    p.add_argument("--n-layers", type=int, metavar="N", help="stacked layers per cell [-]")


def _pattern_flags(p):
    p.add_argument("--pattern", metavar="FILE", help="0/1 lock grid, one row per line [-]")
    p.add_argument("--preset", metavar="NAME",
                   help="built-in lock pattern: full, none, top-right-36, right-40, right-60, top-40")


def _plot_flag(p):
    p.add_argument("--plot", action="store_true", help="also write an SVG figure")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="auxskin", description="Electroadhesive auxetic skin toolkit.")
    groups = root.add_subparsers(dest="group", metavar="GROUP", required=True, parser_class=_Parser)

    def group(name, help_):
        g = groups.add_parser(name, help=help_)
        return g.add_subparsers(dest="action", metavar="ACTION", required=True, parser_class=_Parser)

    # auc
    g = group("auc", "single unit cell model")
    p = g.add_parser("curve", help="force-strain hysteresis loop")
    _common(p)
    _model_flags(p)
    p.add_argument("--unloading-voltage", type=float, metavar="V",
                   help="voltage while releasing [V]; default same as --voltage")
    p.add_argument("--strain-max", type=float, default=0.2, metavar="EPS",
                   help="largest engineering strain [-] (default 0.2)")
    p.add_argument("--points", type=int, default=201, metavar="N",
                   help="samples per branch [-] (default 201)")
    p.add_argument("--noise", type=float, default=0.0, metavar="N",
                   help="Gaussian force noise std dev added to the trace [N] (default 0)")
    p.add_argument("--seed", type=int, metavar="INT",
                   help="noise RNG seed [-] (default: [output] seed)")
    p.add_argument("--metadata", action="store_true", help="write '# key=value' metadata lines")
    p.add_argument("--name", default="auc_curve.csv", metavar="FILE",
                   help="output file name [-] (default auc_curve.csv)")
    _plot_flag(p)
    p.set_defaults(func=cmd_auc_curve)

    p = g.add_parser("equilibrium", help="equilibrium node angle under a pull force")
    _common(p)
    _model_flags(p)
    p.add_argument("--force", type=float, nargs="+", required=True, metavar="N",
                   help="applied pull force(s) [N]")
    p.add_argument("--theta-prev", type=float, default=0.0, metavar="RAD",
                   help="starting node angle [rad] (default 0)")
    p.set_defaults(func=cmd_auc_equilibrium)

    p = g.add_parser("hold", help="largest force held by friction, and stiffness ratio")
    _common(p)
    _model_flags(p)
    p.add_argument("--theta", type=float, default=0.0, metavar="RAD",
                   help="parked node angle [rad] (default 0)")
    p.add_argument("--window", type=float, default=0.01, metavar="EPS",
                   help="strain window for the stiffness slope [-] (default 0.01)")
    p.set_defaults(func=cmd_auc_hold)

    # fit
    g = group("fit", "parameter identification from traces")
    p = g.add_parser("run", help="fit E on unlocked traces, then mu on energised traces")
    _common(p)
    _model_flags(p, voltage=False)
    p.add_argument("--trace", action="append", metavar="FILE",
                   help="trace file with columns strain,force_N,voltage_V,branch (repeatable)")
    p.add_argument("--strain-max", type=float, metavar="EPS",
                   help="ignore samples above this strain in the E fit [-]")
    p.set_defaults(func=cmd_fit_run)

    # array
    g = group("array", "spring-network array of cells")
    for name, help_, func in (("axial", "axial stiffness and force-strain curve", cmd_array_axial),
                              ("bend", "end-bar rotation from asymmetric locking", cmd_array_bend)):
        p = g.add_parser(name, help=help_)
        _common(p)
        _pattern_flags(p)
        p.add_argument("--rows", type=int, metavar="N", help="cells in series per column [-]")
        p.add_argument("--cols", type=int, metavar="N", help="columns in parallel [-]")
        if name == "axial":
            p.add_argument("--lock-rows", type=int, metavar="N", help="lock the bottom N rows [-]")
            p.add_argument("--strain-max", type=float, default=0.05, metavar="EPS",
                           help="largest array strain [-] (default 0.05)")
            p.add_argument("--points", type=int, default=51, metavar="N",
                           help="curve samples [-] (default 51)")
            p.add_argument("--nonlinear", action="store_true",
                           help="use the kinematic cell force law instead of linear springs")
        else:
            p.add_argument("--lock-cols", type=int, metavar="N",
                           help="lock the leftmost N columns [-]")
            p.add_argument("--strain", type=float, required=True, metavar="EPS",
                           help="imposed mean array strain [-]")
            p.add_argument("--sweep", action="store_true",
                           help="sweep the locked column count from 0 to all")
        p.set_defaults(func=func)

    # address
    g = group("address", "row-column electrode addressing")
    p = g.add_parser("plan", help="rows and columns to energise for a lock pattern")
    _common(p)
    _pattern_flags(p)
    p.add_argument("--rows", type=int, metavar="N", help="grid rows for presets [-]")
    p.add_argument("--cols", type=int, metavar="N", help="grid columns for presets [-]")
    p.set_defaults(func=cmd_address_plan)

    # power
    g = group("power", "drive electronics")
    p = g.add_parser("estimate", help="holding power and charge time constant")
    _common(p)
    _pattern_flags(p)
    p.add_argument("--voltage", type=float, metavar="V", help="supply voltage [V]")
    p.add_argument("--cells", type=int, metavar="N", help="number of locked cells [-]")
    p.add_argument("--dielectric", metavar="NAME", help="dielectric for the leakage resistance [-]")
    p.set_defaults(func=cmd_power_estimate)

    # cost
    g = group("cost", "bill of materials")
    p = g.add_parser("estimate", help="dielectric and per-cell cost of an array")
    _common(p)
    p.add_argument("--rows", type=int, metavar="N", help="cell rows [-]")
    p.add_argument("--cols", type=int, metavar="N", help="cell columns [-]")
    p.add_argument("--dielectric", metavar="NAME", help="dielectric name from the catalog [-]")
    p.add_argument("--overhead-usd", type=float, metavar="USD",
                   help="board and electronics cost per cell [USD]")
    p.set_defaults(func=cmd_cost_estimate)

    # display
    g = group("display", "inflatable shape display")
    for name, help_, func in (("heightmap", "inflated height over the skin", cmd_display_heightmap),
                              ("profile", "centre cross-section and its curvature",
                               cmd_display_profile)):
        p = g.add_parser(name, help=help_)
        _common(p)
        _pattern_flags(p)
        p.add_argument("--strain-unlocked", type=float, metavar="EPS",
                       help="strain limit of an unlocked cell [-]")
        p.add_argument("--strain-locked", type=float, metavar="EPS",
                       help="strain limit of a locked cell [-] (default: calibrated)")
        if name == "profile":
            p.add_argument("--points", type=int, default=201, metavar="N",
                           help="profile samples [-] (default 201)")
        _plot_flag(p)
        p.set_defaults(func=func)
    return root


def _origin(exc: BaseException) -> str:
    """Module of the innermost package frame that raised ``exc``."""
    name = getattr(exc, "module", "auxskin")
    if name != "auxskin":
        return name
    tb = exc.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("auxskin.") and mod != "auxskin.errors":
            name = mod
        tb = tb.tb_next
    return name


def _error_line(exc: BaseException) -> str:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    return f"{_origin(exc)}: {type(exc).__name__}: {msg}\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(Run(args))
    except AuxskinError as exc:
        sys.stderr.write(_error_line(exc))
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"auxskin.io: {type(exc).__name__}: {' '.join(str(exc).split())}\n")
        return EXIT_IO
    except ValueError as exc:
        sys.stderr.write(_error_line(exc))
        return EXIT_VALIDATION
    except ArithmeticError as exc:
        sys.stderr.write(_error_line(exc))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
