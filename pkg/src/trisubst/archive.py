"""Campaign configuration files and JSON archives of results and families.

Archives are written one result per line with sorted keys and no
insignificant whitespace, so emitting a parsed archive reproduces it byte for
byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .cyclotomic import ConfigurationError, InflationFactor, check_order, normalize_triple
from .geometry import special_set
from .search import Placement, Result, SearchConfig

SCHEMA = 1


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class CampaignConfig:
    n: int
    lam: tuple[int, ...]
    prototiles: tuple[tuple[int, int, int], ...] = ()
    workers: int = 1
    kill_threshold: Optional[int] = None
    starter_side: int = 0
    max_results: Optional[int] = None
    max_nodes: Optional[int] = None
    orientation: bool = True

    def __post_init__(self):
        check_order(self.n)
        d = (self.n - 1) // 2
        if len(self.lam) != d:
            raise ConfigurationError(f"lambda needs {d} coefficients over a_1..a_{d}, got {len(self.lam)}")
        if any(c < 0 for c in self.lam) or not any(self.lam):
            raise ConfigurationError("lambda coefficients must be non-negative and not all zero")
        protos = self.prototiles or tuple(special_set(self.n))
        protos = tuple(normalize_triple(self.n, t) for t in protos)
        if len(set(protos)) != len(protos):
            raise ConfigurationError("duplicate prototiles")
        object.__setattr__(self, "prototiles", protos)
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        if self.starter_side not in (0, 1, 2):
            raise ConfigurationError("starter side must be 0, 1 or 2")

    @property
    def factor(self) -> InflationFactor:
        return InflationFactor(self.n, self.lam)

    def search_config(self) -> SearchConfig:
        return SearchConfig(self.n, self.prototiles, self.factor, orientation=self.orientation,
                            starter_side=self.starter_side, max_nodes=self.max_nodes, max_results=self.max_results)

    def echo(self) -> dict:
        return {
            "n": self.n,
            "lambda": list(self.lam),
            "prototiles": [list(t) for t in self.prototiles],
            "orientation": self.orientation,
            "starter_side": self.starter_side,
        }

    @classmethod
    def from_echo(cls, data: dict) -> CampaignConfig:
        try:
            return cls(int(data["n"]), tuple(data["lambda"]), tuple(tuple(t) for t in data["prototiles"]),
                       orientation=bool(data.get("orientation", True)),
                       starter_side=int(data.get("starter_side", 0)))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"bad configuration block: {exc}") from exc

    def with_overrides(self, **kw) -> CampaignConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_INT_KEYS = {"n", "workers", "kill_threshold", "starter_side", "max_results", "max_nodes"}


def parse_config_text(text: str) -> CampaignConfig:
    """``key = value`` lines; ``#`` starts a comment.

    ``lambda`` lists integer coefficients over a_1..a_d (``1 0 1`` is
    a_1 + a_3); ``prototiles`` lists angle triples separated by commas or
    semicolons.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lower().replace("-", "_")
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key == "lambda":
                values["lam"] = tuple(int(x) for x in val.replace(",", " ").split())
            elif key == "prototiles":
                triples = [t.split() for t in val.replace(";", ",").split(",") if t.strip()]
                values["prototiles"] = tuple(tuple(int(x) for x in t) for t in triples)
                if any(len(t) != 3 for t in values["prototiles"]):
                    raise ConfigurationError(f"line {lineno}: prototiles are angle triples")
            elif key in ("orientation", "orientation_enforcement"):
                if val.lower() not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                    raise ConfigurationError(f"line {lineno}: expected a boolean")
                values["orientation"] = val.lower() in ("true", "yes", "1", "on")
            else:
                raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"line {lineno}: {exc}") from exc
    if "n" not in values or "lam" not in values:
        raise ConfigurationError("configuration needs n and lambda")
    return CampaignConfig(**values)


def load_config(path: str | Path) -> CampaignConfig:
    return parse_config_text(Path(path).read_text())


# --- results ---------------------------------------------------------------


def result_to_json(r: Result) -> dict:
    return {
        "t0": r.t0,
        "starter": r.starter,
        "tiles": [[t.proto, t.rot, int(t.flip), list(t.shift)] for t in r.tiles],
        "orientation": [list(p) for p in r.orientation],
    }


def result_from_json(d: dict) -> Result:
    try:
        tiles = tuple(Placement(int(p), int(r), bool(f), tuple(int(c) for c in s)) for p, r, f, s in d["tiles"])
        return Result(int(d["t0"]), int(d["starter"]), tiles, tuple(tuple(p) for p in d.get("orientation", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad result record: {exc}") from exc


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class ResultArchive:
    config: CampaignConfig
    results: dict[int, list[Result]]
    truncated: bool = False
    per_starter: dict = field(default_factory=dict)

    def emit(self) -> str:
        head = {"schema": SCHEMA, "kind": "results", "config": self.config.echo(), "truncated": self.truncated}
        lines = ["{", f'"header":{_dump(head)},', '"results":[']
        rows = [_dump(result_to_json(r)) for t0 in sorted(self.results) for r in self.results[t0]]
        lines.append(",\n".join(rows))
        lines.append("]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> ResultArchive:
        try:
            data = json.loads(text)
            head = data["header"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise SchemaError(f"not a result archive: {exc}") from exc
        if head.get("schema") != SCHEMA or head.get("kind") != "results":
            raise SchemaError(f"unsupported archive schema {head.get('schema')!r} / kind {head.get('kind')!r}")
        config = CampaignConfig.from_echo(head["config"])
        results: dict[int, list[Result]] = {t0: [] for t0 in range(len(config.prototiles))}
        for d in data["results"]:
            r = result_from_json(d)
            if r.t0 not in results:
                raise SchemaError(f"result for unknown prototile {r.t0}")
            results[r.t0].append(r)
        return cls(config, results, bool(head.get("truncated", False)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.emit())

    @classmethod
    def load(cls, path: str | Path) -> ResultArchive:
        return cls.parse(Path(path).read_text())


# --- families --------------------------------------------------------------


def _bits(mask: int, nvars: int) -> list[int]:
    return [(mask >> i) & 1 for i in range(nvars)]


def _mask(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def _bmap_json(bmap) -> dict:
    return {str(c): [[k, s] for k, s in seq] for c, seq in bmap}


def _bmap_from_json(d) -> tuple:
    return tuple(sorted((int(c), tuple((int(k), int(s)) for k, s in seq)) for c, seq in d.items()))


def families_to_json(config: CampaignConfig, assembly, polarity: Optional[dict] = None) -> dict:
    nvars = 3 * len(config.prototiles)
    classes = []
    for oc in assembly.classes:
        classes.append({
            "orientation": _bits(oc.orientation, nvars),
            "complete": oc.complete,
            "polarity": None if polarity is None else polarity.get(oc.orientation),
            "families": [
                {
                    "breakdowns": _bmap_json(f.breakdowns),
                    "sizes": list(f.sizes),
                    "members": [[result_to_json(r) for r in m] for m in f.members],
                }
                for f in oc.families
            ],
            "groups": [
                {"proto": g.proto, "breakdowns": _bmap_json(g.breakdowns), "partial": g.partial,
                 "size": len(g.members)}
                for g in oc.groups
            ],
            "arcs": {str(k): v for k, v in sorted(oc.arcs.items())},
        })
    return {
        "schema": SCHEMA,
        "kind": "families",
        "config": config.echo(),
        "summary": {
            "classes": len(assembly.complete_classes()),
            "combinations": len(assembly.families),
            "partial_groups": sum(g.partial for oc in assembly.classes for g in oc.groups),
        },
        "classes": classes,
    }


def emit_families(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def load_families(path: str | Path) -> tuple[CampaignConfig, list]:
    """Configuration and the list of families as (orientation mask, breakdowns, members)."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not a families file: {exc}") from exc
    if data.get("schema") != SCHEMA or data.get("kind") != "families":
        raise SchemaError("unsupported families file")
    config = CampaignConfig.from_echo(data["config"])
    fams = []
    for oc in data["classes"]:
        mask = _mask(oc["orientation"])
        for f in oc["families"]:
            members = tuple(tuple(result_from_json(r) for r in m) for m in f["members"])
            fams.append((mask, _bmap_from_json(f["breakdowns"]), members))
    return config, fams
