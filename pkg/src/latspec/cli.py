"""Batch command line: parse JSON inputs, dispatch to the library, and
emit CSV/JSON artifacts plus a run manifest.

Every randomized command requires an explicit --seed.  Exit codes: 0 on
success, 2 when a search legitimately finds nothing within its budget,
1 on errors (one machine-parsable line on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import jsonschema

from . import __version__
from .dynamics import (
    CyclicSystem,
    GammaBudget,
    bochner_check,
    c_set_experiment,
    cesaro_correlation_experiment,
    correlation,
    ergodic_components,
    gamma_search,
    set_measure,
    spectral_measure,
)
from .ehrhart import Simplex, count_lattice_points, ehrhart_polynomial
from .errors import LatSpecError
from .haystack import greedy_extend, is_haystack
from .jsonio import (
    character_json,
    config_hash,
    format_fraction,
    matrix_json,
    measurable_set_json,
    measure_json,
    parse_character,
    parse_fraction,
    parse_matrix,
    parse_measurable_set,
    parse_measure,
    parse_pointset,
    parse_simplex,
    parse_system,
    parse_vector,
    pointset_json,
    polynomial_json,
    simplex_json,
    stable_dumps,
)
from .lattice import Hyperplane
from .spectra import (
    NotFound,
    PointSet,
    SearchBudget,
    ehrhart_spectrum,
    volume_spectrum,
    witness_search,
)
from .walks import (
    default_measure,
    proximality_check,
    upper_pv_density,
    weyl_equidistribution,
)


def _load_json(path: str, schema: str | None = None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise LatSpecError(f"missing input file {path}") from None
    except json.JSONDecodeError as exc:
        raise _schema_error(f"{path} is not valid JSON: {exc}")
    if schema is not None:
        _validate(obj, schema, path)
    return obj


def _schema_error(msg):
    from .errors import SchemaError

    return SchemaError(msg)


def _validate(obj, schema_name: str, label: str):
    schema = json.loads(
        resources.files("latspec.schemas").joinpath(f"{schema_name}.json").read_text()
    )
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise _schema_error(f"{label} fails the {schema_name} schema: {exc.message}")


def _parse_vec_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise _schema_error(f"expected a comma-separated integer vector, got {text!r}")


def _parse_box_arg(text: str):
    try:
        lo_s, hi_s = text.split(":")
        return (_parse_vec_arg(lo_s), _parse_vec_arg(hi_s))
    except ValueError:
        raise _schema_error(f"expected a box 'lo1,lo2:hi1,hi2', got {text!r}")


@dataclass
class RunResult:
    code: int
    files: dict[str, str]
    summary: str
    counters: dict


def _csv(header: list[str], rows, seed, cfg_hash) -> str:
    lines = [f"# seed={seed} config={cfg_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def _result_json(payload: dict, seed, cfg_hash) -> str:
    body = dict(payload)
    body["seed"] = seed
    body["config_sha256"] = cfg_hash
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Command handlers: each takes (args, config-dict) and returns a RunResult.
# The config dict embeds the parsed inputs so a manifest alone can rerun it.
# ---------------------------------------------------------------------------


def _cmd_ehrhart(cfg) -> RunResult:
    s = parse_simplex(cfg["simplex"])
    poly = ehrhart_polynomial(s, budget=cfg["budget"])
    payload = {"polynomial": polynomial_json(poly), "simplex": simplex_json(s)}
    summary = f"polynomial coefficients: {[format_fraction(c) for c in poly.coeffs]}"
    if cfg.get("t") is not None:
        cnt = count_lattice_points(s, cfg["t"], budget=cfg["budget"])
        payload["t"] = cfg["t"]
        payload["count"] = cnt
        summary += f"; count at t={cfg['t']}: {cnt}"
    return RunResult(0, {"result.json": payload}, summary, {"counts": s.rank + 1})


def _cmd_spectrum(cfg) -> RunResult:
    E = parse_pointset(cfg["pointset"])
    box = (tuple(cfg["box"][0]), tuple(cfg["box"][1]))
    if cfg["volume_only"]:
        vols = sorted(volume_spectrum(E, box, max_simplices=cfg["max_simplices"]))
        payload = {"volume_spectrum": vols}
        rows = [[v] for v in vols]
        files = {"result.json": payload, "spectrum.csv": (["r_factorial_volume"], rows)}
        return RunResult(0, files, f"{len(vols)} volume values", {"entries": len(vols)})
    entries = sorted(
        ehrhart_spectrum(E, box, max_simplices=cfg["max_simplices"]),
        key=lambda p: p.coeffs,
    )
    payload = {"ehrhart_spectrum": [polynomial_json(p) for p in entries]}
    rows = [[";".join(format_fraction(c) for c in p.coeffs)] for p in entries]
    files = {"result.json": payload, "spectrum.csv": (["coefficients"], rows)}
    return RunResult(0, files, f"{len(entries)} spectrum entries", {"entries": len(entries)})


def _cmd_witness(cfg) -> RunResult:
    E = parse_pointset(cfg["pointset"])
    basis = [tuple(v) for v in cfg["basis"]]
    budget = SearchBudget(
        word_length=cfg["L"],
        max_n=cfg["N"],
        v0_box=(tuple(cfg["v0_box"][0]), tuple(cfg["v0_box"][1])),
    )
    res = witness_search(E, basis, budget)
    if isinstance(res, NotFound):
        payload = {
            "found": False,
            "gammas": res.gammas,
            "n_values": res.n_count,
            "v0_box_size": res.v0_box_size,
            "triples": res.triples,
        }
        return RunResult(2, {"result.json": payload}, "no witness within budget", payload)
    payload = {
        "found": True,
        "n": res.n,
        "gamma": matrix_json(res.gamma),
        "word": list(res.word) if res.word is not None else None,
        "v0": list(res.v0),
        "images": [list(p) for p in res.images],
    }
    summary = f"witness at n={res.n}, v0={res.v0}, word={res.word}"
    return RunResult(0, {"result.json": payload}, summary, {"n": res.n})


def _cmd_haystack(cfg) -> RunResult:
    E = parse_pointset(cfg["pointset"])
    box = (tuple(cfg["box"][0]), tuple(cfg["box"][1]))
    pts = E.candidates(box)
    exclude_axes = cfg["exclude_axes"]
    if exclude_axes:
        pts = [p for p in pts if all(c != 0 for c in p)]
    pts.sort(key=lambda p: (max(abs(c) for c in p), p))
    trace: list = []
    res = greedy_extend(pts, cfg["target"], trace=trace)
    rows = [[i] + list(p) + [int(ok)] for i, (p, ok) in enumerate(trace)]
    header = ["index"] + [f"x{i}" for i in range(E.rank)] + ["accepted"]
    from .haystack import Insufficient

    if isinstance(res, Insufficient):
        payload = {
            "reached": len(res.achieved.members),
            "target": cfg["target"],
            "rejected": res.rejected,
            "members": [list(p) for p in res.achieved.members],
        }
        files = {"result.json": payload, "trace.csv": (header, rows)}
        return RunResult(2, files, f"only reached size {payload['reached']}", payload)
    ok, bad = is_haystack(res.members)
    assert ok and bad is None
    payload = {"reached": len(res.members), "members": [list(p) for p in res.members]}
    files = {"result.json": payload, "trace.csv": (header, rows)}
    return RunResult(0, files, f"haystack of size {len(res.members)}", {"size": len(res.members)})


def _membership_from_config(cfg, rank: int):
    m = cfg["membership"]
    if "hyperplane" in m:
        return Hyperplane(tuple(m["hyperplane"])).contains
    E = parse_pointset(m["pointset"])
    if E.rank != rank:
        raise _schema_error("membership point set has the wrong rank")
    return E.contains


def _cmd_rw_density(cfg) -> RunResult:
    p = parse_measure(cfg["measure"])
    member = _membership_from_config(cfg, p.rank)
    rep = upper_pv_density(
        p,
        tuple(cfg["v"]),
        member,
        cfg["N"],
        cfg["M"],
        cfg["seed"],
        workers=cfg["workers"],
    )
    rows = [
        [n + 1, format_fraction(rep.cesaro[n]), repr(rep.stderr(n + 1))]
        for n in range(rep.horizon)
    ]
    payload = {
        "final": format_fraction(rep.final),
        "horizon": rep.horizon,
        "trials": rep.trials,
    }
    files = {"result.json": payload, "cesaro.csv": (["N", "cesaro_value", "stderr"], rows)}
    return RunResult(0, files, f"final Cesàro value {float(rep.final):.6f}", payload)


def _cmd_rw_weyl(cfg) -> RunResult:
    p = parse_measure(cfg["measure"])
    xi = parse_character(cfg["xi"])
    rep = weyl_equidistribution(
        p,
        xi,
        tuple(cfg["v"]),
        cfg["N"],
        cfg["M"],
        cfg["seed"],
        precision=cfg["precision"],
        workers=cfg["workers"],
    )
    rows = [[n + 1, repr(rep.magnitudes[n]), repr(rep.error_bound)] for n in range(rep.horizon)]
    payload = {
        "final_magnitude": rep.final,
        "error_bound": rep.error_bound,
        "horizon": rep.horizon,
        "trials": rep.trials,
    }
    files = {"result.json": payload, "weyl.csv": (["N", "magnitude", "error_bound"], rows)}
    return RunResult(0, files, f"final magnitude {rep.final:.6f}", payload)


def _cmd_proximal(cfg) -> RunResult:
    m = parse_matrix(cfg["matrix"])
    res = proximality_check(m, tol=cfg["tol"], precision=cfg["precision"])
    payload = {
        "verdict": res.verdict,
        "charpoly": list(res.charpoly),
        "top_modulus": res.top_modulus,
        "gap": res.gap,
    }
    return RunResult(0, {"result.json": payload}, f"verdict: {res.verdict}", payload)


def _cmd_dyn_corr(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    val = correlation(system, B, tuple(cfg["v"]), precision=cfg["precision"])
    payload = {"correlation": format_fraction(val), "measure": format_fraction(set_measure(system, B))}
    return RunResult(0, {"result.json": payload}, f"correlation {format_fraction(val)}", payload)


def _cmd_dyn_spectral(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    sm = spectral_measure(system, B, K=cfg.get("K"))
    rows = []
    atoms_payload = []
    for a in sm.atoms:
        mass_s = format_fraction(a.mass) if isinstance(a.mass, Fraction) else repr(a.mass)
        xi_j = character_json(a.xi)
        rows.append([json.dumps(xi_j["coords"]).replace(",", ";"), mass_s])
        atoms_payload.append({"xi": xi_j, "mass": mass_s})
    payload = {
        "kind": sm.kind,
        "atoms": atoms_payload,
        "tail": format_fraction(sm.tail),
        "total": format_fraction(sm.total),
        "truncation": sm.truncation,
    }
    files = {"result.json": payload, "atoms.csv": (["xi", "mass"], rows)}
    return RunResult(0, files, f"{len(sm.atoms)} atoms, tail {float(sm.tail):.3g}", {"atoms": len(sm.atoms)})


def _cmd_dyn_cesaro(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    p = parse_measure(cfg["measure"])
    rep = cesaro_correlation_experiment(
        system,
        B,
        tuple(cfg["v"]),
        p,
        cfg["N"],
        cfg["M"],
        cfg["seed"],
        precision=cfg["precision"],
        workers=cfg["workers"],
    )
    rows = []
    for n in range(rep.horizon):
        val = rep.values[n]
        rows.append([n + 1, format_fraction(val) if isinstance(val, Fraction) else repr(val)])
    payload = {
        "final": repr(float(rep.final)),
        "target": format_fraction(rep.target),
        "bound": format_fraction(rep.bound),
        "final_deviation": repr(float(rep.final_deviation)),
    }
    files = {"result.json": payload, "cesaro.csv": (["N", "value"], rows)}
    return RunResult(0, files, f"deviation {float(rep.final_deviation):.6f} vs bound {float(rep.bound):.6f}", payload)


def _cmd_dyn_cset(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    p = parse_measure(cfg["measure"])
    rep = c_set_experiment(
        system,
        B,
        tuple(cfg["v"]),
        p,
        parse_fraction(cfg["c"]),
        cfg["N"],
        cfg["M"],
        cfg["seed"],
        precision=cfg["precision"],
        workers=cfg["workers"],
    )
    rows = [[n + 1, int(rep.indicators[n])] for n in range(rep.horizon)]
    payload = {
        "lower_density": format_fraction(rep.density),
        "delta": format_fraction(rep.delta),
        "c": format_fraction(rep.c),
        "c_prime": format_fraction(rep.c_prime),
        "bound": format_fraction(rep.bound),
    }
    files = {"result.json": payload, "cset.csv": (["N", "in_C"], rows)}
    return RunResult(0, files, f"lower density {format_fraction(rep.density)}", payload)


def _cmd_dyn_gamma(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    basis = [tuple(v) for v in cfg["basis"]]
    rep = gamma_search(
        system,
        B,
        basis,
        GammaBudget(word_length=cfg["L"], shear_range=cfg["M_star"], seed=cfg.get("seed")),
    )

    def hit_payload(hit):
        if hit is None:
            return None
        return {
            "gamma": matrix_json(hit.gamma),
            "value": format_fraction(hit.value),
            "images": [list(p) for p in hit.images],
            "word": list(hit.word) if hit.word is not None else None,
            "exponents": list(hit.exponents) if hit.exponents is not None else None,
        }

    payload = {
        "direct": hit_payload(rep.direct),
        "guided": hit_payload(rep.guided),
        "direct_examined": rep.direct_examined,
        "guided_examined": rep.guided_examined,
        "guided_nonintegral": rep.guided_nonintegral,
    }
    if not rep.found:
        return RunResult(2, {"result.json": payload}, "no positive configuration found", payload)
    return RunResult(
        0,
        {"result.json": payload},
        f"value {format_fraction(rep.best.value)} via {'direct' if rep.direct else 'guided'} strategy",
        {"direct_examined": rep.direct_examined},
    )


def _cmd_components(cfg) -> RunResult:
    system = parse_system(cfg["system"])
    B = parse_measurable_set(cfg["B"], system)
    rep = ergodic_components(system, B, cfg["n"])
    rows = [
        [i, len(c.points), format_fraction(c.measure), format_fraction(c.conditional)]
        for i, c in enumerate(rep.components)
    ]
    payload = {
        "components": len(rep.components),
        "best_index": rep.best_index,
        "best_conditional": format_fraction(rep.components[rep.best_index].conditional),
        "exceeds_one_third": rep.exceeds_one_third,
    }
    files = {"result.json": payload, "components.csv": (["index", "size", "measure", "conditional"], rows)}
    return RunResult(0, files, f"{len(rep.components)} components", payload)


_HANDLERS = {
    "ehrhart": _cmd_ehrhart,
    "spectrum": _cmd_spectrum,
    "witness": _cmd_witness,
    "haystack": _cmd_haystack,
    "rw-density": _cmd_rw_density,
    "rw-weyl": _cmd_rw_weyl,
    "proximal": _cmd_proximal,
    "dyn-corr": _cmd_dyn_corr,
    "dyn-spectral": _cmd_dyn_spectral,
    "dyn-cesaro": _cmd_dyn_cesaro,
    "dyn-cset": _cmd_dyn_cset,
    "dyn-gamma": _cmd_dyn_gamma,
    "components": _cmd_components,
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latspec", description=__doc__)
    ap.add_argument("--version", action="version", version=f"latspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seeded=False, workers=False):
        p.add_argument("--out", help="output directory (files + manifest)")
        p.add_argument("--format", choices=["table", "csv", "json"], default="table")
        if seeded:
            p.add_argument("--seed", type=int, required=True)
        if workers:
            p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("ehrhart", help="counting polynomial of a simplex")
    p.add_argument("--simplex", required=True)
    p.add_argument("--t", type=int)
    p.add_argument("--budget", type=int, default=10**8)
    common(p)

    p = sub.add_parser("spectrum", help="volume / polynomial spectrum of a point set")
    p.add_argument("--pointset", required=True)
    p.add_argument("--box", required=True, help="vertex budget box lo1,lo2:hi1,hi2")
    p.add_argument("--volume-only", action="store_true")
    p.add_argument("--max-simplices", type=int, default=2_000_000)
    common(p)

    p = sub.add_parser("witness", help="search for a scaled unimodular placement")
    p.add_argument("--pointset", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--v0-box", required=True)
    common(p)

    p = sub.add_parser("haystack", help="greedy general-position subset")
    p.add_argument("--pointset", required=True)
    p.add_argument("--box", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--exclude-axes", action="store_true")
    common(p)

    p = sub.add_parser("rw-density", help="Cesàro hit density along a walk")
    p.add_argument("--measure", help="measure JSON file (default: elementary, rank --r)")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--v", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--hyperplane", help="normal vector a,b for membership")
    p.add_argument("--pointset", help="membership point-set JSON file")
    common(p, seeded=True, workers=True)

    p = sub.add_parser("rw-weyl", help="Cesàro character-sum magnitudes")
    p.add_argument("--measure")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--xi", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--precision", type=int, default=64)
    common(p, seeded=True, workers=True)

    p = sub.add_parser("proximal", help="dominant-eigenvalue gap verdict")
    p.add_argument("--matrix", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--precision", type=int, default=50)
    common(p)

    for name, extra in [
        ("dyn-corr", ()),
        ("dyn-spectral", ("K",)),
        ("dyn-cesaro", ("walk",)),
        ("dyn-cset", ("walk", "c")),
        ("dyn-gamma", ("gamma",)),
        ("components", ("n",)),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--system", required=True)
        p.add_argument("--B", required=True)
        if name == "dyn-corr":
            p.add_argument("--v", required=True)
            p.add_argument("--precision", type=int, default=64)
            common(p)
        elif name == "dyn-spectral":
            p.add_argument("--K", type=int)
            common(p)
        elif name in ("dyn-cesaro", "dyn-cset"):
            p.add_argument("--v", required=True)
            p.add_argument("--measure")
            p.add_argument("--r", type=int, default=2)
            p.add_argument("--N", type=int, required=True)
            p.add_argument("--M", type=int, required=True)
            p.add_argument("--precision", type=int, default=64)
            if name == "dyn-cset":
                p.add_argument("--c", required=True)
            common(p, seeded=True, workers=True)
        elif name == "dyn-gamma":
            p.add_argument("--basis", required=True)
            p.add_argument("--L", type=int, required=True)
            p.add_argument("--M-star", type=int, required=True)
            p.add_argument("--seed", type=int)
            common(p)
        elif name == "components":
            p.add_argument("--n", type=int, required=True)
            common(p)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)

    return ap


def _measure_config(args):
    if getattr(args, "measure", None):
        return _load_json(args.measure, "measure")
    return {"default": args.r}


def _config_from_args(args) -> dict:
    """Build the canonical, self-contained config for the command."""
    c = args.command
    if c == "ehrhart":
        return {
            "command": c,
            "simplex": _load_json(args.simplex, "simplex"),
            "t": args.t,
            "budget": args.budget,
        }
    if c == "spectrum":
        return {
            "command": c,
            "pointset": _load_json(args.pointset, "pointset"),
            "box": [list(b) for b in _parse_box_arg(args.box)],
            "volume_only": bool(args.volume_only),
            "max_simplices": args.max_simplices,
        }
    if c == "witness":
        return {
            "command": c,
            "pointset": _load_json(args.pointset, "pointset"),
            "basis": _load_json(args.basis, "basis")["vectors"],
            "L": args.L,
            "N": args.N,
            "v0_box": [list(b) for b in _parse_box_arg(args.v0_box)],
        }
    if c == "haystack":
        return {
            "command": c,
            "pointset": _load_json(args.pointset, "pointset"),
            "box": [list(b) for b in _parse_box_arg(args.box)],
            "target": args.target,
            "exclude_axes": bool(args.exclude_axes),
        }
    if c == "rw-density":
        if bool(args.hyperplane) == bool(args.pointset):
            raise _schema_error("give exactly one of --hyperplane or --pointset")
        membership = (
            {"hyperplane": list(_parse_vec_arg(args.hyperplane))}
            if args.hyperplane
            else {"pointset": _load_json(args.pointset, "pointset")}
        )
        return {
            "command": c,
            "measure": _measure_config(args),
            "v": list(_parse_vec_arg(args.v)),
            "N": args.N,
            "M": args.M,
            "seed": args.seed,
            "membership": membership,
            "workers": args.workers,
        }
    if c == "rw-weyl":
        return {
            "command": c,
            "measure": _measure_config(args),
            "xi": _load_json(args.xi, "character"),
            "v": list(_parse_vec_arg(args.v)),
            "N": args.N,
            "M": args.M,
            "seed": args.seed,
            "precision": args.precision,
            "workers": args.workers,
        }
    if c == "proximal":
        return {
            "command": c,
            "matrix": _load_json(args.matrix, "matrix"),
            "tol": args.tol,
            "precision": args.precision,
        }
    if c == "dyn-corr":
        return {
            "command": c,
            "system": _load_json(args.system, "system"),
            "B": _load_json(args.B, "set"),
            "v": list(_parse_vec_arg(args.v)),
            "precision": args.precision,
        }
    if c == "dyn-spectral":
        return {
            "command": c,
            "system": _load_json(args.system, "system"),
            "B": _load_json(args.B, "set"),
            "K": args.K,
        }
    if c in ("dyn-cesaro", "dyn-cset"):
        cfg = {
            "command": c,
            "system": _load_json(args.system, "system"),
            "B": _load_json(args.B, "set"),
            "measure": _measure_config(args),
            "v": list(_parse_vec_arg(args.v)),
            "N": args.N,
            "M": args.M,
            "seed": args.seed,
            "precision": args.precision,
            "workers": args.workers,
        }
        if c == "dyn-cset":
            cfg["c"] = args.c
        return cfg
    if c == "dyn-gamma":
        return {
            "command": c,
            "system": _load_json(args.system, "system"),
            "B": _load_json(args.B, "set"),
            "basis": _load_json(args.basis, "basis")["vectors"],
            "L": args.L,
            "M_star": args.M_star,
            "seed": args.seed,
        }
    if c == "components":
        return {
            "command": c,
            "system": _load_json(args.system, "system"),
            "B": _load_json(args.B, "set"),
            "n": args.n,
        }
    raise _schema_error(f"unknown command {c!r}")


def _validate_budgets(cfg: dict) -> None:
    for key in ("N", "M", "L", "budget", "max_simplices", "target", "n"):
        if key in cfg and cfg[key] is not None and cfg[key] < 0:
            raise _schema_error(f"budget {key} must be positive, got {cfg[key]}")


def run_config(cfg: dict, outdir: str | None, fmt: str = "table") -> int:
    """Execute an embedded config; write artifacts + manifest when outdir
    is given.  Returns the process exit code."""
    _validate_budgets(cfg)
    handler = _HANDLERS[cfg["command"]]
    # The hash covers everything that determines the outputs (but not the
    # worker count, which by construction never affects results).
    hashed = {k: v for k, v in cfg.items() if k != "workers"}
    cfg_hash = config_hash(hashed)
    seed = cfg.get("seed")
    started = time.monotonic()
    result = handler(cfg)
    elapsed = time.monotonic() - started

    rendered: dict[str, str] = {}
    for name, content in result.files.items():
        if name.endswith(".json"):
            rendered[name] = _result_json(content, seed, cfg_hash)
        else:
            header, rows = content
            rendered[name] = _csv(header, rows, seed, cfg_hash)

    print(result.summary)
    if fmt == "json":
        for name in rendered:
            if name.endswith(".json"):
                sys.stdout.write(rendered[name])
    elif fmt == "csv":
        for name in rendered:
            if name.endswith(".csv"):
                sys.stdout.write(rendered[name])

    if outdir:
        os.makedirs(outdir, exist_ok=True)
        for name, text in rendered.items():
            with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
                fh.write(text)
        manifest = {
            "tool": "latspec",
            "version": __version__,
            "command": cfg["command"],
            "config": cfg,
            "config_sha256": cfg_hash,
            "seed": seed,
            "wall_time_s": round(elapsed, 6),
            "counters": {k: v for k, v in result.counters.items() if isinstance(v, (int, str, bool))},
            "outputs": sorted(rendered),
            "exit_code": result.code,
        }
        with open(os.path.join(outdir, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return result.code


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            with open(args.manifest, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
            return run_config(manifest["config"], args.out)
        cfg = _config_from_args(args)
        return run_config(cfg, args.out, fmt=args.format)
    except LatSpecError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
