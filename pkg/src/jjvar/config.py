"""Pipeline configuration: flat `section.key = value` text files.

Grammar (one entry per line):

    # comment
    paths.structures = fixtures/structures
    transport.barrier_sites = 12
    stats.m = fixed=40

Values parse as int, float, true/false or bare string.  Unknown keys are
rejected.  CLI flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

__all__ = ["ConfigError", "PipelineConfig", "parse_config_text"]


class ConfigError(ValueError):
    """Bad configuration file or value."""


@dataclass(frozen=True)
class PipelineConfig:
    # paths.*
    structures: str | None = None
    counts: str | None = None
    out: str = "out"
    # top level
    seed: int = 0
    threads: int = 1
    # stats.*
    m_strategy: str = "scan"
    alpha: float = 17.69
    beta: float = 15.36
    trials: int = 40
    # cutoff.* (pair overrides, A)
    cutoff_al_al: float | None = None
    cutoff_al_o: float | None = None
    cutoff_al_h: float | None = None
    cutoff_o_o: float | None = None
    cutoff_o_h: float | None = None
    # surface.*
    surface_depth: float = 2.0
    surface_bin: float = 4.0
    # transport.*
    lead_onsite: float = 0.0
    lead_hopping: float = 3.0
    barrier_sites: int = 12
    eta: float = 1e-6
    bounds_lo: float = 0.0
    bounds_hi: float = 30.0
    grid_points: int = 2001
    grid_halfwidth: float = 5.0
    target_jj: float = 1.61e-5
    target_jjh: float = 1.74e-5
    # junction.*
    gap_mev: float = 0.20
    area: float = 2000.0 * 2000.0
    patch_area: float = 9.61 * 8.32
    md_area: float = 34.17 * 34.17

    def cutoff_overrides(self) -> dict[tuple[str, str], float]:
        pairs = {
            "cutoff_al_al": ("Al", "Al"),
            "cutoff_al_o": ("Al", "O"),
            "cutoff_al_h": ("Al", "H"),
            "cutoff_o_o": ("O", "O"),
            "cutoff_o_h": ("O", "H"),
        }
        return {
            pair: getattr(self, name)
            for name, pair in pairs.items()
            if getattr(self, name) is not None
        }

    def validate(self) -> None:
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.grid_points < 2:
            raise ConfigError(f"grid must have >= 2 points, got {self.grid_points}")
        if not self.grid_halfwidth > 0:
            raise ConfigError("grid halfwidth must be positive")
        if self.barrier_sites < 1:
            raise ConfigError("barrier needs at least one site")
        if not self.bounds_lo < self.bounds_hi:
            raise ConfigError(f"bad calibration bounds [{self.bounds_lo}, {self.bounds_hi}]")
        for name in ("target_jj", "target_jjh", "gap_mev", "area", "patch_area", "md_area", "eta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("structures", "counts"):
            value = getattr(self, name)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{name} path does not exist: {value}")
        if not (self.m_strategy == "scan" or self.m_strategy.startswith(("fixed=", "scan="))):
            raise ConfigError(f"stats.m must be 'scan', 'scan=LO:HI' or 'fixed=M', got {self.m_strategy!r}")


_KEY_MAP = {
    "paths.structures": "structures",
    "paths.counts": "counts",
    "paths.out": "out",
    "seed": "seed",
    "threads": "threads",
    "stats.m": "m_strategy",
    "stats.alpha": "alpha",
    "stats.beta": "beta",
    "stats.trials": "trials",
    "cutoff.al_al": "cutoff_al_al",
    "cutoff.al_o": "cutoff_al_o",
    "cutoff.al_h": "cutoff_al_h",
    "cutoff.o_o": "cutoff_o_o",
    "cutoff.o_h": "cutoff_o_h",
    "surface.depth": "surface_depth",
    "surface.bin": "surface_bin",
    "transport.lead_onsite": "lead_onsite",
    "transport.lead_hopping": "lead_hopping",
    "transport.barrier_sites": "barrier_sites",
    "transport.eta": "eta",
    "transport.bounds_lo": "bounds_lo",
    "transport.bounds_hi": "bounds_hi",
    "transport.grid_points": "grid_points",
    "transport.grid_halfwidth": "grid_halfwidth",
    "transport.target_jj": "target_jj",
    "transport.target_jjh": "target_jjh",
    "junction.gap_mev": "gap_mev",
    "junction.area": "area",
    "junction.patch_area": "patch_area",
    "junction.md_area": "md_area",
}

_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _parse_value(field_name: str, raw: str):
    raw = raw.strip().strip('"').strip("'")
    ftype = _FIELD_TYPES[field_name]
    if "str" in ftype:
        return raw
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if "int" in ftype and "float" not in ftype:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{field_name}: expected integer, got {raw!r}") from None
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{field_name}: expected number, got {raw!r}") from None


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    config = base if base is not None else PipelineConfig()
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip().lower()
        if key not in _KEY_MAP:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        # partition splits at the first '=', so values like fixed=40 survive.
        field_name = _KEY_MAP[key]
        updates[field_name] = _parse_value(field_name, raw)
    return replace(config, **updates)


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), base=base)
