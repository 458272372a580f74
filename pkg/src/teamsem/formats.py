"""JSON file formats for structures, teams, assignments, and dependencies.

Structure:   {"domain": ["a","b"], "constants": {"one": "a"},
              "relations": {"E": {"arity": 2, "tuples": [["a","b"]]}}}
Team:        {"vars": ["x","y"], "rows": [["a","b"]]}
Assignment:  {"x": "a", "y": "b"}
Dependency:  {"name": "antisym", "arity": 2, "kind": "fo",
              "sentence": "forall x,y. ((R(x,y) & R(y,x)) -> x=y)"}
  builtin:     {..., "kind": "builtin", "builtin": "dep", "split": [1, 1]}
  extensional: {..., "kind": "extensional", "default": "false",
                "table": [{"domain": ["a"], "tuples": [["a"]], "holds": true}]}
"""

from __future__ import annotations

import json
from typing import Any

from .dependencies import Dependency
from .errors import ValidationError
from .structures import Structure, Team


def _expect(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def structure_from_dict(data: dict) -> Structure:
    _expect(isinstance(data, dict), "structure file must hold a JSON object")
    _expect("domain" in data, "structure needs a 'domain' list")
    relations = {}
    for name, rel in (data.get("relations") or {}).items():
        _expect(isinstance(rel, dict) and "arity" in rel and "tuples" in rel,
                f"relation {name!r} needs 'arity' and 'tuples'")
        relations[name] = (rel["arity"], [tuple(t) for t in rel["tuples"]])
    return Structure(data["domain"], data.get("constants") or {}, relations)


def structure_to_dict(structure: Structure) -> dict:
    return {
        "domain": list(structure.domain),
        "constants": dict(sorted(structure.constants.items())),
        "relations": {
            name: {"arity": rel.arity,
                   "tuples": [list(t) for t in sorted(rel.tuples)]}
            for name, rel in sorted(structure.relations.items())
        },
    }


def team_from_dict(data: dict) -> Team:
    _expect(isinstance(data, dict), "team file must hold a JSON object")
    _expect("vars" in data, "team needs a 'vars' list")
    return Team(data["vars"], [tuple(r) for r in data.get("rows") or []])


def team_to_dict(team: Team) -> dict:
    return {"vars": list(team.vars), "rows": [list(r) for r in sorted(team.rows)]}


def assignment_from_dict(data: dict) -> dict[str, str]:
    _expect(isinstance(data, dict), "assignment file must hold a JSON object")
    _expect(all(isinstance(v, str) for v in data.values()),
            "assignment values must be element tokens")
    return dict(data)


def dependency_from_dict(data: dict) -> Dependency:
    _expect(isinstance(data, dict), "dependency file must hold a JSON object")
    for field in ("name", "arity", "kind"):
        _expect(field in data, f"dependency needs a {field!r} field")
    kind = data["kind"]
    name, arity = data["name"], int(data["arity"])
    if kind == "fo":
        _expect("sentence" in data, "fo dependencies need a 'sentence'")
        from .syntax import parse_fo_sentence
        return Dependency(name, arity, "fo",
                          sentence=parse_fo_sentence(data["sentence"]),
                          rel_name=data.get("rel_name", "R"))
    if kind == "builtin":
        _expect("builtin" in data, "builtin dependencies need a 'builtin' field")
        split = data.get("split")
        return Dependency(name, arity, "builtin", builtin=data["builtin"],
                          split=tuple(split) if split else None)
    if kind == "extensional":
        table = []
        for entry in data.get("table") or []:
            _expect(all(k in entry for k in ("domain", "tuples", "holds")),
                    "table entries need 'domain', 'tuples', 'holds'")
            table.append((entry["domain"], [tuple(t) for t in entry["tuples"]],
                          bool(entry["holds"])))
        return Dependency(name, arity, "extensional", table=table,
                          default=data.get("default", "strict"))
    raise ValidationError(f"unknown dependency kind {kind!r}")


def load_json(path: str) -> Any:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True)
