"""Run configuration: INI sections whose keys carry their units.

An empty file gives the tested unit cell, the shipped dielectric catalog, the
4x5 spring array at the measured 7.6x ratio, the 5x5 display and the drive
circuit defaults.  Every block is validated before any computation runs.

Example::

    [geometry]
    a_mm = 17
    [dielectric]
    name = pvdf-hfp
    [params]
    e_gpa = 2.1
    voltage_v = 600
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import addressing, spring_array
from .catalog import get_dielectric, load_catalog, reference_geometry
from .display import DEFAULT_BASE_LENGTH, DEFAULT_STRAIN_UNLOCKED, DisplayConfig
from .errors import ParseError, ValidationError
from .fitting import E_BRACKET, MU_BRACKET
from .types import AucGeometry, DielectricSpec, ModelParams

DEFAULT_VOLTAGE = 600.0

# key -> (field, power of ten to SI)
_GEOMETRY_KEYS = {
    "a_mm": ("a", -3), "c_mm": ("c", -3), "delta_mm": ("delta", -3), "t_um": ("t", -6),
    "overlap_area_mm2": ("overlap_area", -6), "a_ov_mm": ("a_ov", -3),
    "reference_length_mm": ("reference_length", -3),
}
_CIRCUIT_KEYS = {
    "c_cell_nf": ("C_cell", -9), "r_cell_ohm": ("R_cell", 0), "r1_mohm": ("R1", 6),
    "r2_kohm": ("R2", 3), "v_min_v": ("v_min", 0), "v_max_v": ("v_max", 0),
    "leakage_gohm": ("leakage_resistance", 9), "logic_current_ua": ("logic_current_max", -6),
}
_SECTIONS = {
    "geometry": set(_GEOMETRY_KEYS),
    "dielectric": {"name", "catalog", "epsilon_r", "thickness_um", "cost_usd_per_cm2", "leakage_gohm"},
    "params": {"e_gpa", "mu", "n_layers", "voltage_v"},
    "array": {"rows", "cols", "column_pitch_mm", "cell_length_mm", "k_unlocked_n_per_m",
              "stiffness_ratio", "strain_window"},
    "display": {"rows", "cols", "base_length_mm", "strain_limit_unlocked",
                "strain_limit_locked", "samples_per_cell"},
    "circuit": {"c_cell_nf", "r_cell_ohm", "r1_mohm", "r2_kohm", "v_min_v", "v_max_v",
                "leakage_gohm", "logic_current_ua"},
    "cost": {"per_cell_overhead_usd"},
    "fit": {"traces", "e_min_gpa", "e_max_gpa", "mu_min", "mu_max", "strain_max"},
    "output": {"directory", "seed"},
}


@dataclass
class ArraySettings:
    rows: int = 4
    cols: int = 5
    column_pitch: float | None = None  # m; None: cell length
    cell_length: float | None = None  # m; None: geometry reference length
    k_unlocked: float | None = None  # N/m; None: from the cell model
    stiffness_ratio: float | None = spring_array.MEASURED_STIFFNESS_RATIO  # None: from the cell model
    strain_window: float = 0.01


@dataclass
class FitSettings:
    traces: list = field(default_factory=list)
    e_bracket: tuple = E_BRACKET
    mu_bracket: tuple = MU_BRACKET
    strain_max: float | None = None


@dataclass
class RunConfig:
    geometry: AucGeometry
    dielectric: DielectricSpec
    params: ModelParams
    array: ArraySettings
    display: DisplayConfig
    circuit: addressing.CircuitModel
    per_cell_overhead: float
    fit: FitSettings
    output_dir: str | None = None
    seed: int = 0
    catalog: dict = field(default_factory=dict)
    source: str | None = None

    def array_config(self) -> spring_array.ArrayConfig:
        s = self.array
        cell_length = s.cell_length or self.geometry.reference_length
        pitch = s.column_pitch or cell_length
        k_u, k_l = spring_array.cell_stiffness_pair(self.geometry, self.dielectric, self.params,
                                                    s.strain_window, ratio=s.stiffness_ratio)
        if s.k_unlocked is not None:
            k_u, k_l = s.k_unlocked, s.k_unlocked * k_l / k_u
        return spring_array.ArrayConfig(s.rows, s.cols, k_u, k_l, pitch, cell_length)


def _float(section, key, where):
    return _si(0)(section, key, where)


def _si(exp: int):
    """Converter reading a decimal string and scaling it by ``10**exp`` before rounding."""
    def conv(section, key, where):
        try:
            value = float(Decimal(section[key].strip()).scaleb(exp))
        except InvalidOperation:
            raise ParseError(f"[{section.name}] {key} must be a number, got '{section[key]}'",
                             path=where) from None
        if not math.isfinite(value):
            raise ValidationError(f"[{section.name}] {key} must be finite")
        return value
    return conv


def _int(section, key, where):
    try:
        return int(section[key])
    except ValueError:
        raise ParseError(f"[{section.name}] {key} must be an integer, got '{section[key]}'",
                         path=where) from None


def parse_config_text(text: str, source: str | None = None, base_dir: Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ParseError(" ".join(str(exc).split()), path=source) from None
    for name in parser.sections():
        if name not in _SECTIONS:
            raise ValidationError(f"unknown config section [{name}]; expected one of "
                                  f"{', '.join(sorted(_SECTIONS))}")
        unknown = set(parser[name]) - _SECTIONS[name]
        if unknown:
            raise ValidationError(f"[{name}] unknown key(s) {', '.join(sorted(unknown))}; "
                                  f"allowed: {', '.join(sorted(_SECTIONS[name]))}")
    sec = {name: (parser[name] if parser.has_section(name) else {}) for name in _SECTIONS}
    base_dir = Path(base_dir) if base_dir is not None else Path(".")

    def get(name, key, conv, default):
        if key not in sec[name]:
            return default
        return conv(sec[name], key, source)

    # geometry
    geom_kw = asdict(reference_geometry())
    for key, (field_name, exp) in _GEOMETRY_KEYS.items():
        geom_kw[field_name] = get("geometry", key, _si(exp), geom_kw[field_name])
    g = sec["geometry"]
    if ("a_mm" in g or "c_mm" in g) and "reference_length_mm" not in g:
        geom_kw["reference_length"] = 2 * geom_kw["a"] + geom_kw["c"]
    geometry = AucGeometry(**geom_kw)

    # dielectric
    d = sec["dielectric"]
    catalog_path = d.get("catalog") if d else None
    if catalog_path:
        catalog_path = base_dir / catalog_path
        if not catalog_path.exists():
            raise ValidationError(f"dielectric catalog '{catalog_path}' does not exist")
    catalog = load_catalog(catalog_path)
    if d and "epsilon_r" in d:
        if "thickness_um" not in d:
            raise ValidationError("[dielectric] inline dielectric needs thickness_um")
        dielectric = DielectricSpec(
            name=d.get("name", "custom"),
            epsilon_r=get("dielectric", "epsilon_r", _float, None),
            d=get("dielectric", "thickness_um", _si(-6), None),
            cost_per_area=get("dielectric", "cost_usd_per_cm2", _float, 0.0),
            leakage_resistance=get("dielectric", "leakage_gohm", _si(9), None),
        )
    else:
        dielectric = get_dielectric(d.get("name", "pvdf-hfp") if d else "pvdf-hfp", catalog)

    # circuit: dataclass defaults unless given
    circuit_kw = {}
    for key, (field_name, exp) in _CIRCUIT_KEYS.items():
        if key in sec["circuit"]:
            circuit_kw[field_name] = get("circuit", key, _si(exp), None)
    circuit = addressing.CircuitModel.for_dielectric(dielectric, **circuit_kw)

    # params
    defaults = ModelParams()
    params = ModelParams(
        E=get("params", "e_gpa", _si(9), defaults.E),
        mu=get("params", "mu", _float, defaults.mu),
        n_layers=get("params", "n_layers", _int, defaults.n_layers),
        voltage=get("params", "voltage_v", _float, DEFAULT_VOLTAGE),
    )
    check_voltage(params.voltage, circuit)

    # array
    ratio_raw = sec["array"].get("stiffness_ratio") if sec["array"] else None
    if ratio_raw is None:
        ratio = spring_array.MEASURED_STIFFNESS_RATIO
    elif ratio_raw.strip().lower() == "model":
        ratio = None
    else:
        ratio = get("array", "stiffness_ratio", _float, None)
        if ratio < 1:
            raise ValidationError("[array] stiffness_ratio must be >= 1 or 'model'")
    array = ArraySettings(
        rows=get("array", "rows", _int, 4),
        cols=get("array", "cols", _int, 5),
        column_pitch=get("array", "column_pitch_mm", _si(-3), None),
        cell_length=get("array", "cell_length_mm", _si(-3), None),
        k_unlocked=get("array", "k_unlocked_n_per_m", _float, None),
        stiffness_ratio=ratio,
        strain_window=get("array", "strain_window", _float, 0.01),
    )
    if array.rows < 1 or array.cols < 1:
        raise ValidationError("[array] rows and cols must be >= 1")
    if array.k_unlocked is not None and not array.k_unlocked > 0:
        raise ValidationError("[array] k_unlocked_n_per_m must be positive")

    # display
    display = DisplayConfig(
        rows=get("display", "rows", _int, 5),
        cols=get("display", "cols", _int, 5),
        base_length=get("display", "base_length_mm", _si(-3), DEFAULT_BASE_LENGTH),
        strain_limit_unlocked=get("display", "strain_limit_unlocked", _float,
                                  DEFAULT_STRAIN_UNLOCKED),
        strain_limit_locked=get("display", "strain_limit_locked", _float, None),
        samples_per_cell=get("display", "samples_per_cell", _int, 5),
    )

    # cost: default overhead brings a PVDF-HFP cell to the quoted per-cell price
    overhead = get("cost", "per_cell_overhead_usd", _float, None)
    if overhead is None:
        overhead = addressing.calibrate_overhead(get_dielectric("pvdf-hfp", load_catalog()), geometry)
    if overhead < 0:
        raise ValidationError("[cost] per_cell_overhead_usd must be >= 0")

    # fit
    traces = []
    if sec["fit"] and "traces" in sec["fit"]:
        for item in sec["fit"]["traces"].split(","):
            item = item.strip()
            if not item:
                continue
            path = base_dir / item
            if not path.exists():
                raise ValidationError(f"[fit] trace file '{path}' does not exist")
            traces.append(str(path))
    fit = FitSettings(
        traces=traces,
        e_bracket=(get("fit", "e_min_gpa", _si(9), E_BRACKET[0]),
                   get("fit", "e_max_gpa", _si(9), E_BRACKET[1])),
        mu_bracket=(get("fit", "mu_min", _float, MU_BRACKET[0]),
                    get("fit", "mu_max", _float, MU_BRACKET[1])),
        strain_max=get("fit", "strain_max", _float, None),
    )
    if not 0 < fit.e_bracket[0] < fit.e_bracket[1]:
        raise ValidationError("[fit] need 0 < e_min_gpa < e_max_gpa")
    if not 0 <= fit.mu_bracket[0] < fit.mu_bracket[1]:
        raise ValidationError("[fit] need 0 <= mu_min < mu_max")

    out = sec["output"]
    output_dir = out.get("directory") if out else None
    if output_dir is not None:
        output_dir = str(base_dir / output_dir)
    seed = get("output", "seed", _int, 0)

    return RunConfig(geometry, dielectric, params, array, display, circuit, overhead, fit,
                     output_dir, seed, catalog, source)


def check_voltage(voltage: float, circuit: addressing.CircuitModel) -> float:
    """Applied voltage is either off (0 V) or inside the converter range."""
    if voltage != 0 and not circuit.v_min <= voltage <= circuit.v_max:
        raise ValidationError(f"voltage {voltage:g} V outside supply range "
                              f"{circuit.v_min:g}-{circuit.v_max:g} V (or 0 V for off)")
    return voltage


def parse_config(path=None) -> RunConfig:
    if path is None:
        return parse_config_text("", source=None)
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file '{path}' does not exist")
    return parse_config_text(path.read_text(), source=str(path), base_dir=path.parent)
