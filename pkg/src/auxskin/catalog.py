"""Built-in dielectric catalog and the reference unit cell."""

from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path

from .errors import ParseError, ValidationError
from .types import AucGeometry, DielectricSpec

DEFAULT_LEAKAGE_RESISTANCE = 7.2e9  # ohm per AUC: 600 V squared over 50 uW

CATALOG_FILE = "dielectrics.ini"


def _spec_from_section(name: str, section) -> DielectricSpec:
    try:
        eps_r = float(section["epsilon_r"])
        d = float(section["thickness_um"]) * 1e-6
        cost = float(section.get("cost_usd_per_cm2", "0"))
        leak = section.get("leakage_gohm")
        leak = float(leak) * 1e9 if leak not in (None, "") else None
    except KeyError as exc:
        raise ParseError(f"dielectric '{name}' is missing key {exc}") from None
    except ValueError as exc:
        raise ParseError(f"dielectric '{name}': {exc}") from None
    return DielectricSpec(name=name, epsilon_r=eps_r, d=d, cost_per_area=cost,
                          leakage_resistance=leak)


def read_catalog(text: str) -> dict[str, DielectricSpec]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from None
    return {name: _spec_from_section(name, parser[name]) for name in parser.sections()}


def load_catalog(path: str | Path | None = None) -> dict[str, DielectricSpec]:
    """Read the shipped catalog, or a user override file with the same layout."""
    if path is None:
        text = resources.files("auxskin.data").joinpath(CATALOG_FILE).read_text()
    else:
        text = Path(path).read_text()
    return read_catalog(text)


def get_dielectric(name: str, catalog: dict[str, DielectricSpec] | None = None) -> DielectricSpec:
    catalog = load_catalog() if catalog is None else catalog
    key = name.strip().lower()
    if key not in catalog:
        raise ValidationError(
            f"unknown dielectric '{name}'; catalog has: {', '.join(sorted(catalog))}")
    return catalog[key]


def reference_geometry() -> AucGeometry:
    """Square AUC as tested: 17 mm squares, 3 mm x 0.71 mm hinges, 50 um polyimide."""
    return AucGeometry(
        a=17e-3,
        c=3e-3,
        delta=0.71e-3,
        t=50e-6,
        overlap_area=180.34e-6,
        a_ov=13.43e-3,
        reference_length=2 * 17e-3 + 3e-3,
    )
