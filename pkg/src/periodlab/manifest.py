"""Manifest ingestion and emission (schema "periodlab/1").

A manifest is one JSON document naming simplices (component expressions),
chains, forms, abstract complexes, and triangulations (complex + evaluator
descriptions + marks).  Validation failures carry JSON-pointer-style paths.
Evaluator descriptions close over every wrapper type the package produces,
so emitted triangulations re-ingest without loss.
"""

from __future__ import annotations

import json

import numpy as np

from . import expr as ex
from .chains import AffineSimplex, Chain, Composed, Cone, ExprMap, PrismMap, SingularSimplex
from .forms import Form
from .glue import GluedMap, Triangulation
from .homology import SimplicialComplex

__all__ = [
    "Manifest",
    "ManifestError",
    "load_manifest",
    "evaluator_to_dict",
    "evaluator_from_dict",
    "triangulation_to_manifest",
    "canonical_json",
]

SCHEMA = "periodlab/1"


class ManifestError(ValueError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


def _expect(cond, message, path):
    if not cond:
        raise ManifestError(message, path)


def _get(obj, key, types, path, default=_expect):
    if key not in obj:
        if default is not _expect:
            return default
        raise ManifestError(f"missing key {key!r}", path)
    val = obj[key]
    _expect(isinstance(val, types), f"key {key!r} has wrong type", f"{path}/{key}")
    return val


# ---------------------------------------------------------------------------
# Evaluator descriptions.
# ---------------------------------------------------------------------------


def evaluator_to_dict(ev: SingularSimplex) -> dict:
    if isinstance(ev, ExprMap):
        return {
            "kind": "expr",
            "dim": ev.dim,
            "components": [ex.to_string(c) for c in ev.components],
        }
    if isinstance(ev, AffineSimplex):
        return {"kind": "affine", "vertices": [list(map(float, v)) for v in ev.vertices]}
    if isinstance(ev, Cone):
        return {"kind": "cone", "of": evaluator_to_dict(ev.inner)}
    if isinstance(ev, PrismMap):
        return {
            "kind": "prism",
            "profile": ex.to_string(ev.profile),
            "of": evaluator_to_dict(ev.inner),
        }
    if isinstance(ev, Composed):
        return {
            "kind": "composed",
            "of": evaluator_to_dict(ev.outer),
            "inner": evaluator_to_dict(ev.inner),
        }
    if isinstance(ev, GluedMap):
        return {
            "kind": "glued",
            "sigma": evaluator_to_dict(ev.h1_sigma),
            "tau": evaluator_to_dict(ev.h2_tau),
            "v_slots": list(ev.v_slots),
            "roles": [[k, i] for k, i in ev.roles],
        }
    raise ManifestError(f"evaluator type {type(ev).__name__} is not serialisable")


def evaluator_from_dict(desc: dict, path: str = "/evaluator") -> SingularSimplex:
    kind = _get(desc, "kind", str, path)
    try:
        if kind == "expr":
            return ExprMap(_get(desc, "components", list, path), _get(desc, "dim", int, path))
        if kind == "affine":
            return AffineSimplex(np.array(_get(desc, "vertices", list, path), dtype=float))
        if kind == "cone":
            return Cone(evaluator_from_dict(_get(desc, "of", dict, path), f"{path}/of"))
        if kind == "prism":
            return PrismMap(
                evaluator_from_dict(_get(desc, "of", dict, path), f"{path}/of"),
                _get(desc, "profile", str, path),
            )
        if kind == "composed":
            return Composed(
                evaluator_from_dict(_get(desc, "of", dict, path), f"{path}/of"),
                evaluator_from_dict(_get(desc, "inner", dict, path), f"{path}/inner"),
            )
        if kind == "glued":
            return GluedMap(
                evaluator_from_dict(_get(desc, "sigma", dict, path), f"{path}/sigma"),
                evaluator_from_dict(_get(desc, "tau", dict, path), f"{path}/tau"),
                _get(desc, "v_slots", list, path),
                [tuple(r) for r in _get(desc, "roles", list, path)],
            )
    except (ex.ExprError, ValueError) as err:
        raise ManifestError(str(err), path) from err
    raise ManifestError(f"unknown evaluator kind {kind!r}", path)


# ---------------------------------------------------------------------------
# Manifest.
# ---------------------------------------------------------------------------


class Manifest:
    def __init__(self, data: dict, path: str = ""):
        _expect(isinstance(data, dict), "manifest must be a JSON object", path)
        schema = _get(data, "schema", str, path, SCHEMA)
        _expect(schema == SCHEMA, f"unsupported schema {schema!r}", f"{path}/schema")
        self.ambient = _get(data, "ambient_dim", int, path, 0)
        self.simplices: dict[str, SingularSimplex] = {}
        self.chains: dict[str, Chain] = {}
        self.forms: dict[str, Form] = {}
        self.complexes: dict[str, SimplicialComplex] = {}
        self.triangulations: dict[str, Triangulation] = {}

        for i, entry in enumerate(_get(data, "simplices", list, path, [])):
            p = f"{path}/simplices/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            dim = _get(entry, "dim", int, p)
            comps = _get(entry, "components", list, p)
            _expect(
                self.ambient == 0 or len(comps) == self.ambient,
                f"expected {self.ambient} components, found {len(comps)}",
                f"{p}/components",
            )
            try:
                self.simplices[name] = ExprMap(comps, dim)
            except ex.ExprSyntaxError as err:
                raise ManifestError(str(err), f"{p}/components") from err

        for i, entry in enumerate(_get(data, "derived_simplices", list, path, [])):
            p = f"{path}/derived_simplices/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            self.simplices[name] = evaluator_from_dict(_get(entry, "map", dict, p), f"{p}/map")

        for i, entry in enumerate(_get(data, "chains", list, path, [])):
            p = f"{path}/chains/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            terms = []
            degree = entry.get("degree")
            for j, term in enumerate(_get(entry, "terms", list, p)):
                tp = f"{p}/terms/{j}"
                ref = _get(term, "simplex", str, tp)
                _expect(ref in self.simplices, f"unresolved simplex {ref!r}", f"{tp}/simplex")
                coeff = _get(term, "coeff", int, tp, 1)
                sigma = self.simplices[ref]
                if degree is None:
                    degree = sigma.dim
                _expect(sigma.dim == degree, "mixed dimensions in chain", f"{tp}/simplex")
                terms.append((sigma, coeff))
            _expect(degree is not None, "empty chain needs an explicit degree", p)
            self.chains[name] = Chain(degree, terms)

        for i, entry in enumerate(_get(data, "forms", list, path, [])):
            p = f"{path}/forms/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            degree = _get(entry, "degree", int, p)
            terms = []
            for j, term in enumerate(_get(entry, "terms", list, p)):
                tp = f"{p}/terms/{j}"
                idx = tuple(_get(term, "indices", list, tp))
                terms.append((idx, _get(term, "coeff", str, tp)))
            try:
                self.forms[name] = Form(degree, self.ambient, terms)
            except (ex.ExprError, ValueError) as err:
                raise ManifestError(str(err), p) from err

        for i, entry in enumerate(_get(data, "complexes", list, path, [])):
            p = f"{path}/complexes/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            simplices = _get(entry, "simplices", list, p)
            _expect(bool(simplices), "complex needs at least one simplex", f"{p}/simplices")
            self.complexes[name] = SimplicialComplex([tuple(s) for s in simplices])

        for i, entry in enumerate(_get(data, "triangulations", list, path, [])):
            p = f"{path}/triangulations/{i}"
            name = self._fresh(_get(entry, "name", str, p), p)
            cref = _get(entry, "complex", str, p)
            _expect(cref in self.complexes, f"unresolved complex {cref!r}", f"{p}/complex")
            K = self.complexes[cref]
            evaluators = {}
            for j, ee in enumerate(_get(entry, "evaluators", list, p)):
                ep = f"{p}/evaluators/{j}"
                simplex = tuple(sorted(_get(ee, "simplex", list, ep)))
                _expect(simplex in K, f"simplex {simplex} not in complex", f"{ep}/simplex")
                if "map" in ee:
                    evaluators[simplex] = evaluator_from_dict(ee["map"], f"{ep}/map")
                else:
                    ref = _get(ee, "named", str, ep)
                    _expect(ref in self.simplices, f"unresolved simplex {ref!r}", f"{ep}/named")
                    evaluators[simplex] = self.simplices[ref]
            marks = {
                mname: [tuple(s) for s in members]
                for mname, members in _get(entry, "marks", dict, p, {}).items()
            }
            try:
                self.triangulations[name] = Triangulation(K, evaluators, marks)
            except ValueError as err:
                raise ManifestError(str(err), p) from err

    def _fresh(self, name: str, path: str) -> str:
        taken = (
            set(self.simplices) | set(self.chains) | set(self.forms)
            | set(self.complexes) | set(self.triangulations)
        )
        _expect(name not in taken, f"duplicate name {name!r}", f"{path}/name")
        return name

    def resolve(self, section: str, name: str):
        table = getattr(self, section)
        if name not in table:
            raise ManifestError(f"unresolved reference {name!r}", f"/{section}")
        return table[name]


def load_manifest(path_or_data) -> Manifest:
    if isinstance(path_or_data, dict):
        return Manifest(path_or_data)
    try:
        with open(path_or_data) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ManifestError(f"invalid JSON: {err}") from err
    return Manifest(data)


def triangulation_to_manifest(name: str, T: Triangulation) -> dict:
    K = T.complex
    return {
        "schema": SCHEMA,
        "ambient_dim": T.ambient,
        "complexes": [
            {
                "name": f"{name}_complex",
                "simplices": [list(s) for s in K.simplices[K.dim]],
            }
        ],
        "triangulations": [
            {
                "name": name,
                "complex": f"{name}_complex",
                "evaluators": [
                    {"simplex": list(s), "map": evaluator_to_dict(ev)}
                    for s, ev in sorted(T.evaluators.items())
                ],
                "marks": {
                    mname: sorted(list(s) for s in members)
                    for mname, members in sorted(T.marks.items())
                },
            }
        ],
    }


# ---------------------------------------------------------------------------
# Canonical JSON: sorted keys, floats at 17 significant digits, '\n' ending.
# ---------------------------------------------------------------------------


def _canon(obj, out: list):
    if isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if k:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _canon(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _canon(item, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            raise ValueError("non-finite float in report")
        out.append(f"{obj:.17g}")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical_json(obj) -> str:
    out: list = []
    _canon(obj, out)
    out.append("\n")
    return "".join(out)
