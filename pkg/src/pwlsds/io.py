"""System files, builtin names and measure literals."""

from __future__ import annotations

import json
import os
import re
from fractions import Fraction
from pathlib import Path

from . import constructions
from .measures import ETA, AtomicMeasure, Measure, PwcDensity
from .pwl import PwlMap
from .rational import ValidationError, fmt_rat, parse_number, parse_rat
from .sds import SdsSystem


def _rat_list(raw, where: str) -> list[Fraction]:
    if not isinstance(raw, list):
        raise ValidationError(f"{where}: expected a list of rational strings")
    return [parse_rat(v, field=f"{where}[{i}]") for i, v in enumerate(raw)]


def parse_system(text: str) -> SdsSystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("maps"), list) or not doc["maps"]:
        raise ValidationError("top level must be an object with a nonempty 'maps' list")
    maps, probs = [], []
    for i, entry in enumerate(doc["maps"]):
        where = f"maps[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError(f"{where}: expected an object")
        unknown = set(entry) - {"breakpoints", "values", "prob"}
        if unknown:
            raise ValidationError(f"{where}: unknown field(s) {sorted(unknown)}")
        for key in ("breakpoints", "values", "prob"):
            if key not in entry:
                raise ValidationError(f"{where}.{key}: missing")
        bp = _rat_list(entry["breakpoints"], f"{where}.breakpoints")
        vals = _rat_list(entry["values"], f"{where}.values")
        try:
            maps.append(PwlMap(tuple(bp), tuple(vals)))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
        probs.append(parse_rat(entry["prob"], field=f"{where}.prob"))
    return SdsSystem(tuple(maps), tuple(probs))


def serialize_system(sys: SdsSystem) -> str:
    """Canonical form: two-space indent, fields in schema order, trailing newline."""
    doc = {"maps": [{"breakpoints": [fmt_rat(b) for b in g.breakpoints], "values": [fmt_rat(v) for v in g.values], "prob": fmt_rat(p)} for g, p in sys.items()]}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _parse_params(query: str) -> dict[str, str]:
    out = {}
    for part in filter(None, re.split(r"[&,]", query)):
        if "=" not in part:
            raise ValidationError(f"parameter {part!r}: expected KEY=VALUE")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_system(source: str) -> SdsSystem:
    """``builtin:NAME[?p=P]`` or a path to a system JSON file."""
    if source.startswith("builtin:"):
        name, _, query = source[len("builtin:") :].partition("?")
        params = _parse_params(query)
        unknown = set(params) - {"p"}
        if unknown:
            raise ValidationError(f"builtin {name}: unknown parameter(s) {sorted(unknown)}")
        p = parse_number(params["p"], field="p") if "p" in params else None
        if p is not None and name != "prop42":
            raise ValidationError(f"builtin {name} takes no parameter p")
        return constructions.builtin_system(name, p)
    path = Path(source)
    if not path.is_file():
        raise ValidationError(f"system file {source!r} not found")
    return parse_system(path.read_text(encoding="utf-8"))


_ATOM_RE = re.compile(r"^\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


def parse_measure(spec: str) -> Measure:
    s = spec.strip()
    if s == "lebesgue":
        return PwcDensity.lebesgue()
    if s == "eta":
        return ETA
    if s.startswith("uniform:"):
        parts = s[len("uniform:") :].split(",")
        if len(parts) != 2:
            raise ValidationError(f"measure {spec!r}: expected uniform:LO,HI")
        return PwcDensity.uniform(parse_number(parts[0], field="uniform.lo"), parse_number(parts[1], field="uniform.hi"))
    if s.startswith("atoms:"):
        atoms = []
        for i, chunk in enumerate(filter(None, s[len("atoms:") :].split(";"))):
            m = _ATOM_RE.match(chunk.strip())
            if not m:
                raise ValidationError(f"measure atoms[{i}]: expected (point,weight), got {chunk!r}")
            atoms.append((parse_number(m.group(1), field=f"atoms[{i}].point"), parse_number(m.group(2), field=f"atoms[{i}].weight")))
        if not atoms:
            raise ValidationError("atoms: need at least one atom")
        return AtomicMeasure(tuple(atoms))
    for kind in ("nu1", "nu2"):
        if s.startswith(kind + ":") or s == kind:
            params = _parse_params(s[len(kind) + 1 :])
            unknown = set(params) - {"p", "depth"}
            if unknown:
                raise ValidationError(f"measure {kind}: unknown parameter(s) {sorted(unknown)}")
            p = parse_number(params.get("p", "3/5"), field="p")
            try:
                depth = int(params.get("depth", "8"))
            except ValueError as exc:
                raise ValidationError(f"measure {kind}: depth must be an integer") from exc
            build = constructions.build_nu1 if kind == "nu1" else constructions.build_nu2
            return build(p, depth)
    if os.path.isfile(s):
        try:
            doc = json.loads(Path(s).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{s}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ValidationError(f"{s}: expected an object with breakpoints and densities")
        bp = _rat_list(doc.get("breakpoints"), "breakpoints")
        dens = _rat_list(doc.get("densities"), "densities")
        return PwcDensity(tuple(bp), tuple(dens))
    raise ValidationError(f"unknown measure {spec!r}")
