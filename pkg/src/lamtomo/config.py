"""Flat key-value experiment configs with repeatable [shape] blocks.

The format is deliberately dumb: sections in brackets, `key = value`
lines, `#` comments, no nesting, no expressions. Pairs and lists are
space-separated numbers. [shape] sections may repeat; each describes one
phantom component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ScanGeometry, build_geometry
from .phantom import Disk, Phantom, Rect

__all__ = ["ConfigError", "Config", "parse_config", "load_config",
           "build_phantom", "build_scan_geometry"]


class ConfigError(ValueError):
    """Malformed or incomplete experiment configuration."""


@dataclass
class Section:
    name: str
    line: int
    entries: dict[str, tuple[str, int]] = field(default_factory=dict)

    def has(self, key: str) -> bool:
        return key in self.entries

    def raw(self, key: str, default=None):
        if key in self.entries:
            return self.entries[key][0]
        return default

    def _fetch(self, key: str, default, required: bool):
        if key in self.entries:
            return self.entries[key]
        if required:
            raise ConfigError(
                f"section [{self.name}] (line {self.line}): missing key '{key}'"
            )
        return (default, self.line)

    def get_str(self, key: str, default: str | None = None, required=False) -> str:
        val, _ = self._fetch(key, default, required)
        return val

    def get_float(self, key: str, default=None, required=False) -> float:
        val, line = self._fetch(key, default, required)
        if val is None or isinstance(val, (int, float)):
            return val
        try:
            return float(val)
        except ValueError:
            raise ConfigError(
                f"line {line}: [{self.name}] {key} = {val!r} is not a number"
            ) from None

    def get_int(self, key: str, default=None, required=False) -> int:
        val, line = self._fetch(key, default, required)
        if val is None or isinstance(val, int):
            return val
        try:
            return int(val)
        except ValueError:
            raise ConfigError(
                f"line {line}: [{self.name}] {key} = {val!r} is not an integer"
            ) from None

    def get_floats(self, key: str, count=None, default=None, required=False):
        val, line = self._fetch(key, default, required)
        if val is None:
            return None
        if not isinstance(val, str):
            return val
        try:
            out = [float(tok) for tok in val.split()]
        except ValueError:
            raise ConfigError(
                f"line {line}: [{self.name}] {key} = {val!r} is not a number list"
            ) from None
        if count is not None and len(out) != count:
            raise ConfigError(
                f"line {line}: [{self.name}] {key} needs {count} numbers, got {len(out)}"
            )
        return out

    def get_ints(self, key: str, default=None, required=False):
        vals = self.get_floats(key, default=default, required=required)
        if vals is None:
            return None
        return [int(round(v)) for v in vals]

    def get_complex(self, key: str, default=None, required=False) -> complex:
        """Complex value written as 're im' or a single real number."""
        val, line = self._fetch(key, default, required)
        if val is None or isinstance(val, complex):
            return val
        toks = str(val).split()
        try:
            if len(toks) == 1:
                return complex(float(toks[0]), 0.0)
            if len(toks) == 2:
                return complex(float(toks[0]), float(toks[1]))
        except ValueError:
            pass
        raise ConfigError(
            f"line {line}: [{self.name}] {key} = {val!r} is not 're' or 're im'"
        )


@dataclass
class Config:
    sections: list[Section]
    source: str = "<string>"

    def first(self, name: str) -> Section | None:
        for sec in self.sections:
            if sec.name == name:
                return sec
        return None

    def require(self, name: str) -> Section:
        sec = self.first(name)
        if sec is None:
            raise ConfigError(f"{self.source}: missing required section [{name}]")
        return sec

    def all(self, name: str) -> list[Section]:
        return [sec for sec in self.sections if sec.name == name]

    def header_lines(self) -> list[str]:
        """Canonical resolved-config lines for output-file headers."""
        out = [f"config source: {self.source}"]
        for sec in self.sections:
            out.append(f"[{sec.name}]")
            for key, (val, _) in sec.entries.items():
                out.append(f"{key} = {val}")
        return out


def parse_config(text: str, source: str = "<string>") -> Config:
    sections: list[Section] = []
    current: Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}, line {lineno}: malformed section header {raw!r}")
            current = Section(name=line[1:-1].strip(), line=lineno)
            sections.append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"{source}, line {lineno}: key-value pair before any section")
        key, val = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}, line {lineno}: empty key")
        if key in current.entries:
            raise ConfigError(
                f"{source}, line {lineno}: duplicate key '{key}' in section [{current.name}]"
            )
        current.entries[key] = (val, lineno)
    return Config(sections=sections, source=source)


def load_config(path) -> Config:
    with open(path) as f:
        return parse_config(f.read(), source=str(path))


def build_phantom(cfg: Config) -> Phantom:
    shapes = []
    for sec in cfg.all("shape"):
        kind = sec.get_str("type", required=True).lower()
        density = sec.get_float("density", 1.0)
        center = sec.get_floats("center", count=2, required=True)
        if kind == "disk":
            shapes.append(Disk(center=tuple(center),
                               radius=sec.get_float("radius", required=True),
                               density=density))
        elif kind == "rect":
            hw = sec.get_floats("half_widths", count=2, required=True)
            shapes.append(Rect(center=tuple(center), half_widths=tuple(hw),
                               density=density))
        else:
            raise ConfigError(
                f"section [shape] (line {sec.line}): unknown type {kind!r}"
            )
    if not shapes:
        raise ConfigError(f"{cfg.source}: no [shape] sections found")
    return Phantom(shapes)


def build_scan_geometry(cfg: Config, n0_override: int | None = None) -> ScanGeometry:
    sec = cfg.require("geometry")
    n0 = n0_override if n0_override is not None else sec.get_int("n0", required=True)
    L = sec.get_float("L", required=True)
    q_alpha = sec.get_float("q_alpha", float(np.sqrt(2.0)))
    return build_geometry(n0, L, q_alpha)
