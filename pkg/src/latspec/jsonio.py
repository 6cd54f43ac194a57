"""JSON wire formats shared by the CLI and tests.

Numbers travel as lowest-terms rational strings ("3/2") or decimal strings
with explicit precision; vectors and matrices are plain nested arrays.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .dynamics import CyclicSystem, IntervalUnion, TorusRotationSystem
from .ehrhart import EhrhartPolynomial, Simplex
from .errors import SchemaError
from .lattice import Character, IntMatrix, Irrational, UnimodularMap
from .spectra import PointSet
from .walks import GeneratingMeasure


def parse_fraction(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad rational literal {s!r}: {exc}") from exc
    raise SchemaError(f"expected a rational string, got {type(s).__name__}")


def format_fraction(f: Fraction) -> str:
    f = Fraction(f)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_vector(obj) -> tuple[int, ...]:
    if not isinstance(obj, list) or not all(isinstance(c, int) for c in obj):
        raise SchemaError(f"expected an integer vector, got {obj!r}")
    return tuple(obj)


def parse_matrix(obj, unimodular: bool = False):
    if isinstance(obj, dict):
        entries = obj.get("entries")
    else:
        entries = obj
    if not isinstance(entries, list):
        raise SchemaError("matrix needs an 'entries' array")
    rows = tuple(parse_vector(row) for row in entries)
    cls = UnimodularMap if unimodular else IntMatrix
    return cls(rows)


def matrix_json(m: IntMatrix) -> dict:
    return {"r": m.r, "entries": [list(row) for row in m.entries]}


def parse_character(obj) -> Character:
    coords = obj.get("coords") if isinstance(obj, dict) else None
    if not isinstance(coords, list):
        raise SchemaError("character needs a 'coords' array")
    out = []
    for c in coords:
        if isinstance(c, dict) and "rat" in c:
            out.append(parse_fraction(c["rat"]))
        elif isinstance(c, dict) and "irr" in c:
            spec = c["irr"]
            tag = spec.get("tag")
            if not isinstance(tag, str):
                raise SchemaError("irrational coordinate needs a 'tag'")
            coeff = 1
            base = tag
            if "*" in tag:
                lhs, base = tag.split("*", 1)
                coeff = int(lhs)
            if base.startswith("sqrt") and base[4:].isdigit():
                out.append(Irrational(base=base, coeff=coeff))
            else:
                digits = spec.get("digits")
                if not isinstance(digits, str):
                    raise SchemaError(f"opaque tag {tag!r} needs explicit 'digits'")
                out.append(Irrational(base=base, coeff=coeff, provided=digits))
        else:
            raise SchemaError(f"character coordinate must be {{'rat': ...}} or {{'irr': ...}}, got {c!r}")
    return Character(tuple(out))


def character_json(xi: Character, precision: int = 64) -> dict:
    coords = []
    for c in xi.coords:
        if isinstance(c, Fraction):
            coords.append({"rat": format_fraction(c)})
        else:
            coords.append({"irr": {"tag": c.tag, "digits": c.digits(precision)}})
    return {"coords": coords}


def parse_simplex(obj) -> Simplex:
    verts = obj.get("vertices") if isinstance(obj, dict) else None
    if not isinstance(verts, list):
        raise SchemaError("simplex needs a 'vertices' array")
    return Simplex(tuple(parse_vector(v) for v in verts))


def simplex_json(s: Simplex) -> dict:
    return {"vertices": [list(v) for v in s.vertices]}


def polynomial_json(p: EhrhartPolynomial) -> dict:
    return {"coeffs": [format_fraction(c) for c in p.coeffs]}


def parse_pointset(obj) -> PointSet:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("point set needs a 'kind' field")
    kind = obj["kind"]
    if kind == "explicit":
        window = obj.get("window")
        if not isinstance(window, list) or len(window) != 2:
            raise SchemaError("explicit point set needs 'window': [lo, hi]")
        return PointSet.explicit(
            [parse_vector(p) for p in obj.get("points", [])],
            (parse_vector(window[0]), parse_vector(window[1])),
        )
    if kind == "periodic":
        return PointSet.periodic(
            int(obj["m"]), [parse_vector(p) for p in obj.get("residues", [])]
        )
    if kind == "sublattice":
        return PointSet.sublattice(int(obj["n"]), int(obj.get("r", 2)))
    raise SchemaError(f"unknown point-set kind {kind!r}")


def pointset_json(E: PointSet) -> dict:
    if E.kind == "explicit":
        return {
            "kind": "explicit",
            "points": [list(p) for p in sorted(E.points)],
            "window": [list(E.window[0]), list(E.window[1])],
        }
    if E.kind == "periodic":
        return {"kind": "periodic", "m": E.modulus, "residues": [list(p) for p in sorted(E.residues)]}
    return {"kind": "sublattice", "n": E.scale, "r": E.rank}


def parse_system(obj):
    if not isinstance(obj, dict):
        raise SchemaError("system must be an object")
    if "cyclic" in obj:
        spec = obj["cyclic"]
        return CyclicSystem(
            modulus=int(spec["m"]),
            dim=int(spec["d"]),
            action=tuple(parse_vector(row) for row in spec["A"]),
        )
    if "torus" in obj:
        spec = obj["torus"]
        coords = parse_character({"coords": spec["alpha"]}).coords
        return TorusRotationSystem(alpha=coords, independent=bool(spec.get("independent", True)))
    raise SchemaError("system must have a 'cyclic' or 'torus' arm")


def parse_measurable_set(obj, system):
    if isinstance(obj, dict) and "residues" in obj:
        if not isinstance(system, CyclicSystem):
            raise SchemaError("residue sets belong to cyclic systems")
        return frozenset(parse_vector(p) for p in obj["residues"])
    if isinstance(obj, dict) and "intervals" in obj:
        if not isinstance(system, TorusRotationSystem):
            raise SchemaError("interval sets belong to rotation systems")
        return IntervalUnion(
            tuple((parse_fraction(a), parse_fraction(b)) for a, b in obj["intervals"])
        )
    raise SchemaError("set must have 'residues' or 'intervals'")


def measurable_set_json(B) -> dict:
    if isinstance(B, IntervalUnion):
        return {"intervals": [[format_fraction(a), format_fraction(b)] for a, b in B.intervals]}
    return {"residues": [list(p) for p in sorted(B)]}


def parse_measure(obj) -> GeneratingMeasure:
    if not isinstance(obj, dict):
        raise SchemaError("measure must be an object")
    if "default" in obj:
        from .walks import default_measure

        return default_measure(int(obj["default"]))
    support = [parse_matrix(m, unimodular=True) for m in obj["support"]]
    weights = [parse_fraction(w) for w in obj["weights"]]
    return GeneratingMeasure(support=tuple(support), weights=tuple(weights))


def measure_json(p: GeneratingMeasure) -> dict:
    return {
        "support": [matrix_json(g) for g in p.support],
        "weights": [format_fraction(w) for w in p.weights],
    }


def stable_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(obj) -> str:
    return hashlib.sha256(stable_dumps(obj).encode("utf-8")).hexdigest()
