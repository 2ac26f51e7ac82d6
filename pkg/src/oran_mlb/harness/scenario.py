"""Line-oriented scenario files.

Each non-blank line is ``section.key = value``; ``#`` starts a comment.
Cells and UEs are indexed sections whose index is the cell or UE id::

    scenario.duration_ms = 80000
    cell.1.du_id = 1
    cell.1.center_frequency_hz = 3450000000
    ue.1.role = mobile
    ue.1.initial_du = 1
    ue.1.traffic = 0:20000000
    xapp.home_du = 1

Traffic is a comma-separated list of ``start_ms:bps`` phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Tuple

from ..domain import CellConfig
from ..ransim import Role, SimConfig, TrafficProfile, UeContext
from ..xapp import XappConfig


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class UeSpec:
    ue_id: int
    role: Role
    initial_du: int
    spectral_efficiency: float
    traffic: TrafficProfile

    def context(self) -> UeContext:
        return UeContext(self.ue_id, self.role, self.initial_du, self.traffic,
                         self.spectral_efficiency)


@dataclass(frozen=True)
class ScenarioSpec:
    sim: SimConfig
    cells: Tuple[CellConfig, ...]
    ues: Tuple[UeSpec, ...]
    xapp: XappConfig
    duration_ms: int
    name: str = "scenario"


def _int(v):
    return int(v.replace("_", ""))


def _bool(v):
    low = v.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _ids(v):
    return frozenset(_int(x) for x in v.split(",") if x.strip())


def parse_traffic(value: str) -> TrafficProfile:
    phases = []
    for part in value.split(","):
        start, sep, rate = part.strip().partition(":")
        if not sep:
            raise ValueError(f"traffic phase {part.strip()!r} is not start_ms:bps")
        phases.append((_int(start), _int(rate)))
    return TrafficProfile(tuple(phases))


_SIM_KEYS = {
    "slot_duration_ms": float, "granularity_ms": _int, "ho_interruption_ms": _int,
    "seed": _int, "preserve_buffer_on_ho": _bool,
}
_XAPP_KEYS = {
    "home_du": _int, "prb_high_percent": float, "prb_low_percent": float,
    "buf_high_bits": _int, "buf_low_bits": _int, "ttt_ms": _int, "window_ms": _int,
    "granularity_ms": _int, "require_both_metrics": _bool, "mobile_ues": _ids,
}
_SCENARIO_KEYS = {"name": str, "duration_ms": _int}
_CELL_KEYS = {
    "du_id": _int, "center_frequency_hz": _int, "bandwidth_hz": _int,
    "scs_hz": _int, "total_prbs": _int,
}
_UE_KEYS = {
    "role": Role, "initial_du": _int, "spectral_efficiency": float, "traffic": parse_traffic,
}
_REQUIRED_CELL = ("du_id", "center_frequency_hz")
_REQUIRED_UE = ("role", "initial_du", "traffic")


@dataclass
class _Section:
    line: int
    values: Dict[str, object] = field(default_factory=dict)


def parse_scenario(text: str) -> ScenarioSpec:
    flat: Dict[str, Dict[str, object]] = {"scenario": {}, "sim": {}, "xapp": {}}
    flat_lines: Dict[str, int] = {}
    cells: Dict[int, _Section] = {}
    ues: Dict[int, _Section] = {}
    seen: Dict[str, int] = {}
    lineno = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ScenarioError(f"expected 'section.key = value', got {raw.strip()!r}", lineno)
        if key in seen:
            raise ScenarioError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno)
        seen[key] = lineno
        parts = key.split(".")
        try:
            if parts[0] in ("cell", "ue") and len(parts) == 3:
                table, schema = (cells, _CELL_KEYS) if parts[0] == "cell" else (ues, _UE_KEYS)
                if parts[2] not in schema:
                    raise ScenarioError(f"unknown key {key!r}", lineno)
                index = _int(parts[1])
                section = table.setdefault(index, _Section(lineno))
                section.values[parts[2]] = schema[parts[2]](value)
            elif len(parts) == 2 and parts[0] in flat:
                schema = {"scenario": _SCENARIO_KEYS, "sim": _SIM_KEYS, "xapp": _XAPP_KEYS}[parts[0]]
                if parts[1] not in schema:
                    raise ScenarioError(f"unknown key {key!r}", lineno)
                flat[parts[0]][parts[1]] = schema[parts[1]](value)
                flat_lines[key] = lineno
            else:
                raise ScenarioError(f"unknown key {key!r}", lineno)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(f"bad value for {key}: {exc}", lineno) from None

    end = lineno

    def build(what, fn, line):
        try:
            return fn()
        except ScenarioError:
            raise
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"invalid {what}: {exc}", line) from None

    if "duration_ms" not in flat["scenario"]:
        raise ScenarioError("missing required key 'scenario.duration_ms'", end)
    if "home_du" not in flat["xapp"]:
        raise ScenarioError("missing required key 'xapp.home_du'", end)
    if not cells:
        raise ScenarioError("scenario defines no cells", end)

    sim = build("sim settings", lambda: SimConfig(**flat["sim"]), flat_lines.get("sim.seed", end))

    cell_list, du_lines = [], {}
    for cell_id, section in sorted(cells.items()):
        for req in _REQUIRED_CELL:
            if req not in section.values:
                raise ScenarioError(f"cell {cell_id} is missing required key 'cell.{cell_id}.{req}'", section.line)
        du = section.values["du_id"]
        if du in du_lines:
            raise ScenarioError(f"duplicate DU id {du} (also on line {du_lines[du]})", section.line)
        du_lines[du] = section.line
        cell_list.append(build(f"cell {cell_id}", lambda: CellConfig(cell_id, **section.values), section.line))

    ue_list = []
    for ue_id, section in sorted(ues.items()):
        for req in _REQUIRED_UE:
            if req not in section.values:
                raise ScenarioError(f"UE {ue_id} is missing required key 'ue.{ue_id}.{req}'", section.line)
        v = section.values
        if v["initial_du"] not in du_lines:
            raise ScenarioError(f"UE {ue_id} initial_du {v['initial_du']} does not exist", section.line)
        se = v.get("spectral_efficiency", 4.0)
        if se <= 0:
            raise ScenarioError(f"UE {ue_id} spectral_efficiency must be positive", section.line)
        ue_list.append(UeSpec(ue_id, v["role"], v["initial_du"], se, v["traffic"]))

    xapp_values = dict(flat["xapp"])
    xapp_values.setdefault("granularity_ms", sim.granularity_ms)
    xapp_values.setdefault("mobile_ues", frozenset(u.ue_id for u in ue_list if u.role is Role.MOBILE))
    line = flat_lines["xapp.home_du"]
    if xapp_values["home_du"] not in du_lines:
        raise ScenarioError(f"home_du {xapp_values['home_du']} does not exist", line)
    unknown = set(xapp_values["mobile_ues"]) - {u.ue_id for u in ue_list}
    if unknown:
        raise ScenarioError(f"mobile_ues lists unknown UEs {sorted(unknown)}", flat_lines.get("xapp.mobile_ues", line))
    du_cells = {c.du_id: c.cell_id for c in cell_list}
    xapp = build("xapp settings", lambda: XappConfig(du_cells=du_cells, **xapp_values), line)

    duration = flat["scenario"]["duration_ms"]
    if duration <= 0 or (duration * 1000) % sim.slot_us:
        raise ScenarioError("duration_ms must be a positive whole number of slots",
                            flat_lines["scenario.duration_ms"])
    return ScenarioSpec(sim, tuple(cell_list), tuple(ue_list), xapp, duration,
                        flat["scenario"].get("name", "scenario"))


BUNDLED = ("demo", "pingpong", "idle")


def bundled_scenario_text(name: str) -> str:
    return resources.files(__package__).joinpath("scenarios", f"{name}.scn").read_text()


def load_scenario(path_or_name: str | Path) -> ScenarioSpec:
    """Parse a scenario file, or one of the bundled scenarios by name."""
    path = Path(path_or_name)
    if not path.exists() and str(path_or_name) in BUNDLED:
        return parse_scenario(bundled_scenario_text(str(path_or_name)))
    return parse_scenario(path.read_text())
