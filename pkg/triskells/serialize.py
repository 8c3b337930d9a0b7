"""
JSON and DOT codecs.

Documents are written with sorted keys so identical objects give identical
bytes. Triskells are stored in canonical form (sorted edges with
multiplicities), matrices row-major with exact rationals as "p/q" strings.
"""

import json
import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Union

from .errors import FormatError, InvalidWeight, TriskellError
from .mll import AtomAssignment, Proof, parse_proof
from .qcs import OrthoSpec, QcsSpace, parse_bot
from .relmat import WeightedMatrix
from .triskell import Carrier, Edge, Triskell, canonical, validate
from .weights import RATIONAL, ZERO, MonoidKind, NumericValue, Weight, WeightMonoid, make_weight, measure_map, parse_monoid

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def dumps(doc: Any, pretty: bool = True) -> str:
    return json.dumps(doc, indent=2 if pretty else None, sort_keys=True, ensure_ascii=False)


def atomic_write_json(data: Any, filepath: PathLike, pretty: bool = True) -> None:
    """Write JSON through a temporary file and a rename, so readers never see a partial file."""
    atomic_write_text(dumps(data, pretty) + "\n", filepath)


def atomic_write_text(text: str, filepath: PathLike) -> None:
    filepath = Path(filepath)
    dir_path = filepath.parent if str(filepath.parent) else Path(".")
    fd, temp_path = tempfile.mkstemp(dir=dir_path, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(temp_path, filepath)
    except Exception:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def read_json(path: PathLike) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def read_proof(path: PathLike) -> Proof:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror}", str(path)) from None
    return parse_proof(text)


def _field(doc: Any, key: str, location: str) -> Any:
    if not isinstance(doc, dict):
        raise FormatError("expected an object", location)
    if key not in doc:
        raise FormatError(f"missing field {key!r}", location)
    return doc[key]


# Weights

def _payload_to_json(monoid: WeightMonoid, value: Any) -> Dict[str, Any]:
    kind = monoid.kind
    if kind is MonoidKind.UNIT:
        return {}
    if kind is MonoidKind.SIGNED_PAIR:
        sign, inner = value
        return {"sign": sign, **_payload_to_json(monoid.base, inner)}
    if kind is MonoidKind.RATIONAL:
        return {"num": value.numerator, "den": value.denominator}
    if kind is MonoidKind.COMPLEX:
        return {"re": value.real, "im": value.imag}
    return {"v": value}


def _payload_from_json(monoid: WeightMonoid, doc: Dict[str, Any], location: str) -> Any:
    kind = monoid.kind
    if kind is MonoidKind.UNIT:
        return 1
    if kind is MonoidKind.SIGNED_PAIR:
        return (_field(doc, "sign", location), _payload_from_json(monoid.base, doc, location))
    if kind is MonoidKind.RATIONAL:
        if "v" in doc:
            return Fraction(str(doc["v"]))
        return Fraction(_field(doc, "num", location), doc.get("den", 1))
    if kind is MonoidKind.COMPLEX:
        return complex(_field(doc, "re", location), doc.get("im", 0.0))
    return _field(doc, "v", location)


def weight_to_json(w: Weight) -> Dict[str, Any]:
    if w.is_zero:
        return {"zero": True}
    return {"monoid": w.monoid.tag, **_payload_to_json(w.monoid, w.value)}


def weight_from_json(doc: Any, location: str = "weight") -> Weight:
    if isinstance(doc, dict) and doc.get("zero") is True:
        return ZERO
    try:
        monoid = parse_monoid(_field(doc, "monoid", location))
        return make_weight(monoid, _payload_from_json(monoid, doc, location))
    except (InvalidWeight, TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(str(exc), location) from None


# Triskells

def triskell_to_json(t: Triskell) -> Dict[str, Any]:
    form = canonical(t)
    return {
        "source": list(t.source),
        "target": list(t.target),
        "monoid": t.monoid.tag,
        "edges": [{"s": s, "t": tg, "w": weight_to_json(w), "mult": n} for s, tg, w, n in form.entries],
    }


def triskell_from_json(doc: Any, location: str = "triskell") -> Triskell:
    try:
        monoid = parse_monoid(_field(doc, "monoid", location))
        source = Carrier(tuple(_field(doc, "source", location)))
        target = Carrier(tuple(_field(doc, "target", location)))
    except TriskellError as exc:
        raise FormatError(str(exc), location) from None
    edges: List[Edge] = []
    for i, e in enumerate(_field(doc, "edges", location)):
        where = f"{location}.edges[{i}]"
        raw = _field(e, "w", where)
        w = weight_from_json(raw, f"{where}.w") if isinstance(raw, dict) else _raw_weight(monoid, raw, f"{where}.w")
        mult = e.get("mult", 1)
        if not isinstance(mult, int) or mult < 1:
            raise FormatError(f"multiplicity must be a positive integer, got {mult!r}", where)
        edges += [Edge(str(_field(e, "s", where)), str(_field(e, "t", where)), w)] * mult
    try:
        return validate(Triskell(source, target, monoid, tuple(edges)))
    except TriskellError as exc:
        raise FormatError(str(exc), location) from None


def _raw_weight(monoid: WeightMonoid, raw: Any, location: str) -> Weight:
    """Bare numbers (or "p/q" strings) are read in the triskell's monoid."""
    try:
        value = Fraction(raw) if isinstance(raw, str) else raw
        return make_weight(monoid, value)
    except (InvalidWeight, ValueError) as exc:
        raise FormatError(str(exc), location) from None


def to_dot(t: Triskell, name: str = "triskell") -> str:
    """One labelled arrow per edge; source and target carriers as ranked clusters."""
    q = json.dumps
    lines = [f"digraph {q(name)} {{", "  rankdir=LR;"]
    for side, carrier in (("source", t.source), ("target", t.target)):
        lines.append(f"  subgraph {q('cluster_' + side)} {{")
        lines.append(f"    label={q(side)}; rank=same;")
        for x in carrier:
            lines.append(f"    {q(side[0] + ':' + x)} [label={q(x)}];")
        lines.append("  }")
    for s, tg, w, n in canonical(t).entries:
        for _ in range(n):
            lines.append(f"  {q('s:' + s)} -> {q('t:' + tg)} [label={q(str(w))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# Matrices

def number_to_json(value: NumericValue) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _entry_from_json(raw: Any, location: str) -> NumericValue:
    try:
        if isinstance(raw, dict):
            return complex(_field(raw, "re", location), raw.get("im", 0.0))
        if isinstance(raw, str):
            return Fraction(raw)
        if isinstance(raw, bool):
            raise ValueError(f"{raw!r} is not a number")
        if isinstance(raw, int):
            return Fraction(raw)
        if isinstance(raw, float):
            return raw
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(str(exc), location) from None
    raise FormatError(f"{raw!r} is not a matrix entry", location)


def matrix_to_json(m: WeightedMatrix) -> Dict[str, Any]:
    return {
        "rows": list(m.rows),
        "cols": list(m.cols),
        "entries": [[number_to_json(v) for v in row] for row in m.entries.tolist()],
    }


def matrix_from_json(doc: Any, location: str = "matrix") -> WeightedMatrix:
    rows = [str(r) for r in _field(doc, "rows", location)]
    cols = [str(c) for c in _field(doc, "cols", location)]
    table = _field(doc, "entries", location)
    if len(table) != len(rows) or any(len(row) != len(cols) for row in table):
        raise FormatError(f"entries must form a {len(rows)}x{len(cols)} table", location)
    parsed = [[_entry_from_json(v, f"{location}.entries[{i}][{j}]") for j, v in enumerate(row)]
              for i, row in enumerate(table)]
    try:
        return WeightedMatrix.from_rows(rows, cols, parsed)
    except TriskellError as exc:
        raise FormatError(str(exc), location) from None


# Coherence spaces and atom assignments

def space_to_json(space: QcsSpace) -> Dict[str, Any]:
    return {
        "web": list(space.web),
        "spec": {"m": space.spec.m.name, "bot": space.spec.bot.label, "monoid": space.monoid.tag},
        "generators": [triskell_to_json(g) for g in space.generators],
        "dual_generators": [triskell_to_json(d) for d in space.dual_generators],
        "bounded": space.bounded,
    }


def space_from_json(doc: Any, location: str = "space") -> QcsSpace:
    web = Carrier(tuple(_field(doc, "web", location)))
    spec_doc = _field(doc, "spec", location)
    generators = [triskell_from_json(g, f"{location}.generators[{i}]")
                  for i, g in enumerate(doc.get("generators", []))]
    duals = [triskell_from_json(d, f"{location}.dual_generators[{i}]")
             for i, d in enumerate(doc.get("dual_generators", []))]
    try:
        if "monoid" in spec_doc:
            monoid = parse_monoid(spec_doc["monoid"])
        else:
            monoid = (generators + duals)[0].monoid if generators + duals else RATIONAL
        m = measure_map(_field(spec_doc, "m", f"{location}.spec"), monoid)
        bot = parse_bot(_field(spec_doc, "bot", f"{location}.spec"))
        spec = OrthoSpec(m, bot, f"{m.name}/{bot.label}")
        return QcsSpace(web, spec, tuple(generators), tuple(duals), bool(doc.get("bounded", False)))
    except TriskellError as exc:
        raise FormatError(str(exc), location) from None


def assignment_to_json(asg: AtomAssignment) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"atoms": dict(asg.atoms), "monoid": asg.monoid.tag}
    if asg.axiom_weight is not None:
        doc["axiom_weight"] = weight_to_json(asg.axiom_weight)
    if asg.occurrence_weights:
        doc["occurrence_weights"] = {str(k): weight_to_json(w) for k, w in sorted(asg.occurrence_weights.items())}
    return doc


def assignment_from_json(doc: Any, location: str = "atoms") -> AtomAssignment:
    """``monoid`` defaults to the axiom weight's monoid, then to rational."""
    atoms = _field(doc, "atoms", location)
    if not isinstance(atoms, dict) or not all(isinstance(v, int) for v in atoms.values()):
        raise FormatError("atoms must map names to integer sizes", f"{location}.atoms")
    axiom_weight = None
    if "axiom_weight" in doc:
        axiom_weight = weight_from_json(doc["axiom_weight"], f"{location}.axiom_weight")
    try:
        if "monoid" in doc:
            monoid = parse_monoid(doc["monoid"])
        elif axiom_weight is not None and not axiom_weight.is_zero:
            monoid = axiom_weight.monoid
        else:
            monoid = RATIONAL
        occurrences = {int(k): weight_from_json(v, f"{location}.occurrence_weights.{k}")
                       for k, v in doc.get("occurrence_weights", {}).items()}
        return AtomAssignment(atoms, monoid, axiom_weight, occurrences)
    except (TriskellError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(str(exc), location) from None


def load_object(doc: Any, location: str = "document") -> Union[Triskell, WeightedMatrix, QcsSpace, AtomAssignment]:
    """Decode any supported document by its distinguishing field."""
    if not isinstance(doc, dict):
        raise FormatError("expected a JSON object", location)
    if "edges" in doc:
        return triskell_from_json(doc, location)
    if "entries" in doc:
        return matrix_from_json(doc, location)
    if "web" in doc:
        return space_from_json(doc, location)
    if "atoms" in doc:
        return assignment_from_json(doc, location)
    raise FormatError("not a triskell, matrix, space or atom assignment", location)


def to_json(obj: Any) -> Dict[str, Any]:
    if isinstance(obj, Triskell):
        return triskell_to_json(obj)
    if isinstance(obj, WeightedMatrix):
        return matrix_to_json(obj)
    if isinstance(obj, QcsSpace):
        return space_to_json(obj)
    if isinstance(obj, AtomAssignment):
        return assignment_to_json(obj)
    if isinstance(obj, Weight):
        return weight_to_json(obj)
    raise TypeError(f"no JSON codec for {type(obj).__name__}")
