"""Batch front-end: load a potential or field, run suites, emit artifacts.

Usage: hexweb <command> --config <file> [--out <dir>] [--seed <n>] [--strict]

Commands: check, gamma, leaves, closure, discriminant, normalforms, classify.
Exit codes: 0 all suites pass, 1 suite failure (report still written),
2 usage or schema error, 3 strict-validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from .chern import (SingularPointError, corollary_residual, curvature,
                    gamma_cubic, gamma_depressed, gamma_from_definition)
from .cubic import (PolyCoeffField, discriminant_of_coeffs,
                    factorization_residual, normalize_roots, regular_cutoff)
from .frobenius import Potential, theorem2_residual
from .jets import PolyExpr
from .singular import (classify_singularity, f_ode_residual,
                       normal_form_field, solve_F, trace_discriminant)
from .webgeo import (LeafIntegrationError, integrate_leaf, symmetry_residual,
                     thomsen_closure)

COMMANDS = ("check", "gamma", "leaves", "closure", "discriminant",
            "normalforms", "classify")

DEFAULT_TOLERANCES = {
    "associativity": 1e-8,
    "corollary": 1e-8,
    "gamma_agreement": 1e-7,
    "curvature": 1e-7,
    "factorization": 1e-10,
    "theorem2": 1e-8,
    "closure_gap": 1e-6,
    "symmetry": 1e-7,
    "f_ode": 1e-8,
    "discriminant": 1e-8,
}

BRANCH_COLORS = {1: "#1f77b4", 2: "#d62728", 3: "#2ca02c"}


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Input parsing


def _parse_coef(raw):
    if isinstance(raw, str):
        return raw  # exact rational "p/q"; PolyExpr coerces it
    if isinstance(raw, (int, float)):
        return raw
    if isinstance(raw, list) and len(raw) == 2:
        return complex(raw[0], raw[1])
    raise SchemaError(f"bad coefficient {raw!r}: expected [re, im] or 'p/q'")


def _parse_monomials(items, nvars):
    d = {}
    for it in items:
        if not isinstance(it, dict) or "exps" not in it or "coef" not in it:
            raise SchemaError(f"monomial entry {it!r} needs 'exps' and 'coef'")
        exps = tuple(int(e) for e in it["exps"])
        if len(exps) != nvars or any(e < 0 for e in exps):
            raise SchemaError(
                f"exponent tuple {exps} must be {nvars} nonnegative integers")
        if exps in d:
            raise SchemaError(f"duplicate exponent tuple {exps}")
        d[exps] = _parse_coef(it["coef"])
    return PolyExpr.from_dict(d)


def load_spec(spec):
    """Validated Potential or PolyCoeffField from a parsed JSON object."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaError("input spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "potential":
        case = spec.get("case")
        if case not in ("A", "B"):
            raise SchemaError("potential spec needs 'case': 'A' or 'B'")
        f = _parse_monomials(spec.get("monomials", []), 2)
        return Potential(case=case, f=f)
    if kind == "field":
        coeffs = []
        for name in ("a", "b", "c", "r"):
            if name not in spec:
                raise SchemaError(f"field spec missing coefficient '{name}'")
            coeffs.append(_parse_monomials(spec[name], 2))
        return PolyCoeffField(*coeffs)
    raise SchemaError(f"unknown kind {kind!r}")


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise SchemaError(f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"config is not valid JSON: {e}")
    if not isinstance(cfg, dict) or "input" not in cfg:
        raise SchemaError("config must be an object with an 'input' spec")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(cfg.get("tolerances", {}))
    if any(v <= 0 for v in tol.values()):
        raise SchemaError("tolerances must be positive")
    cfg["tolerances"] = tol
    win = cfg.get("window", [[-1.0, 1.0], [0.5, 1.5]])
    if not (win[0][0] < win[0][1] and win[1][0] < win[1][1]):
        raise SchemaError("window must be nondegenerate")
    cfg["window"] = win
    return cfg


def config_hash(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Serialization helpers


def _c2l(z):
    z = complex(z)
    return [z.real, z.imag]


def _json_default(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2,
                  default=_json_default)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _svg_header(window, size=640):
    (x0, x1), (y0, y1) = window
    w = x1 - x0
    h = y1 - y0
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
            f'height="{size}" viewBox="{x0} {-y1} {w} {h}">\n'
            f'<rect x="{x0}" y="{-y1}" width="{w}" height="{h}" '
            'fill="white"/>\n')


def _svg_polyline(points, color, width):
    body = " ".join(f"{p[0]:.6g},{-p[1]:.6g}" for p in points)
    return (f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{width}" points="{body}"/>\n')


def write_svg(path, window, layers):
    """layers: list of (points-array, color, width)."""
    (x0, x1), _ = window
    width_unit = (x1 - x0) / 640.0
    parts = [_svg_header(window)]
    for pts, color, w in layers:
        if len(pts) >= 2:
            parts.append(_svg_polyline(pts, color, w * width_unit))
    parts.append("</svg>\n")
    Path(path).write_text("".join(parts))


# ---------------------------------------------------------------------------
# Suites


def _field_of(obj):
    return obj.characteristic_field() if isinstance(obj, Potential) else obj


def _random_regular_points(field, window, rng, count, dmin_factor=1e-3):
    (x0, x1), (y0, y1) = window
    pts = []
    tries = 0
    while len(pts) < count and tries < 100 * count:
        tries += 1
        x = rng.uniform(x0, x1)
        y = rng.uniform(y0, y1)
        co = field.coeffs(x, y)
        D = discriminant_of_coeffs(*co)
        if abs(D) > dmin_factor * regular_cutoff(co) / 1e-12:
            pts.append((x, y))
    return pts


def run_check(obj, cfg, rng, report):
    tol = cfg["tolerances"]
    field = _field_of(obj)
    pts = _random_regular_points(field, cfg["window"], rng,
                                 int(cfg.get("samples", 25)))
    inv = {}
    if isinstance(obj, Potential):
        res = max(abs(obj.associativity_residual(x, y)) for x, y in pts)
        inv["associativity"] = (res, res <= tol["associativity"])
        res = max(corollary_residual(obj, p) for p in pts)
        inv["corollary"] = (res, res <= tol["corollary"])
        t0 = float(cfg.get("t0", 0.0))
        res = max(theorem2_residual(obj, (t0, x, y),
                                    rng=int(rng.integers(1 << 31)))
                  for x, y in pts)
        inv["theorem2"] = (res, res <= tol["theorem2"])
    agree = 0.0
    curv = 0.0
    fact = 0.0
    for p in pts:
        g1 = np.array(gamma_cubic(field, p).values())
        g2 = np.array(gamma_from_definition(field, p).values())
        scale = 1.0 + float(np.max(np.abs(g1)))
        agree = max(agree, float(np.max(np.abs(g1 - g2))) / scale)
        if isinstance(obj, Potential):
            curv = max(curv, abs(curvature(field, p, route="cubic").K))
        fact = max(fact, factorization_residual(
            field, normalize_roots(field, p)))
    inv["gamma_agreement"] = (agree, agree <= tol["gamma_agreement"])
    if isinstance(obj, Potential):
        inv["curvature"] = (curv, curv <= tol["curvature"])
    inv["factorization"] = (fact, fact <= tol["factorization"])
    report["invariants"] = {
        k: {"max_residual": v[0], "pass": v[1]} for k, v in inv.items()}
    return all(v[1] for v in inv.values())


def run_gamma(obj, cfg, rng, report, outdir):
    field = _field_of(obj)
    (x0, x1), (y0, y1) = cfg["window"]
    n = int(cfg.get("grid", 12))
    rows = []
    for x in np.linspace(x0, x1, n):
        for y in np.linspace(y0, y1, n):
            co = field.coeffs(x, y)
            D = discriminant_of_coeffs(*co)
            if abs(D) <= regular_cutoff(co):
                row = [x, y, D.real, D.imag] + [np.nan] * 6
            else:
                g = gamma_cubic(field, (x, y))
                K = curvature(field, (x, y), route="cubic").K
                gx, gy = g.values()
                row = [x, y, D.real, D.imag, gx.real, gx.imag,
                       gy.real, gy.imag, K.real, K.imag]
            rows.append(row)
    path = outdir / "gamma.csv"
    write_csv(path, ["x", "y", "re_D", "im_D", "re_gamma_dx", "im_gamma_dx",
                     "re_gamma_dy", "im_gamma_dy", "re_K", "im_K"], rows)
    report["artifacts"] = [path.name]
    report["grid"] = n
    return True


def run_leaves(obj, cfg, rng, report, outdir):
    field = _field_of(obj)
    window = cfg["window"]
    (x0, x1), (y0, y1) = window
    n = int(cfg.get("grid", 4))
    length = float(cfg.get("leaf_length", 0.5 * max(x1 - x0, y1 - y0)))
    layers = []
    count = 0
    for x in np.linspace(x0, x1, n + 2)[1:-1]:
        for y in np.linspace(y0, y1, n + 2)[1:-1]:
            for branch in (1, 2, 3):
                try:
                    fwd = integrate_leaf(field, (x, y), branch, length,
                                         domain=window)
                    bwd = integrate_leaf(field, (x, y), branch, -length,
                                         domain=window)
                except (LeafIntegrationError, SingularPointError,
                        ValueError):
                    continue
                pts = np.vstack([bwd.points[::-1], fwd.points[1:]])
                layers.append((pts, BRANCH_COLORS[branch], 1.5))
                count += 1
    trace = trace_discriminant(field, window, n=max(16, 4 * n))
    for curve in trace.curves:
        layers.append((curve, "#000000", 3.0))
    path = outdir / "leaves.svg"
    write_svg(path, window, layers)
    report["artifacts"] = [path.name]
    report["leaf_count"] = count
    return count > 0


def run_closure(obj, cfg, rng, report, outdir):
    field = _field_of(obj)
    base = tuple(cfg.get("base", [0.0, 1.0]))
    eps = float(cfg.get("eps", 0.05))
    tol = cfg["tolerances"]
    rep = thomsen_closure(field, base, eps, tol=1e-10)
    ok = rep.gap <= tol["closure_gap"]
    report["closure"] = {
        "base": list(rep.base),
        "eps": rep.eps,
        "gap": rep.gap,
        "vertices": [list(map(float, v)) for v in rep.vertices],
        "pass": ok,
    }
    write_json(outdir / "closure.json", report)
    report["artifacts"] = ["closure.json"]
    return ok


def run_discriminant(obj, cfg, rng, report, outdir):
    field = _field_of(obj)
    window = cfg["window"]
    n = int(cfg.get("grid", 32))
    tol = cfg["tolerances"]["discriminant"]
    trace = trace_discriminant(field, window, n=max(8, n))
    rows = []
    worst = 0.0
    for ci, curve in enumerate(trace.curves):
        for p in curve:
            co = field.coeffs(p[0], p[1])
            D = discriminant_of_coeffs(*co)
            scale = regular_cutoff(co) / 1e-12
            worst = max(worst, abs(D) / scale)
            rows.append([ci, p[0], p[1], D.real, D.imag])
    write_csv(outdir / "discriminant.csv",
              ["curve", "x", "y", "re_D", "im_D"], rows)
    layers = [(c, "#000000", 2.0) for c in trace.curves]
    write_svg(outdir / "discriminant.svg", window, layers)
    report["trace"] = {"curves": len(trace.curves),
                       "points": int(sum(len(c) for c in trace.curves)),
                       "max_scaled_D": worst, "empty": trace.empty}
    report["artifacts"] = ["discriminant.csv", "discriminant.svg"]
    return trace.empty or worst <= tol


def run_normalforms(obj, cfg, rng, report, outdir):
    tol = cfg["tolerances"]
    entries = []
    ok_all = True
    for fid, m0 in ((1, 0), (2, 0), (3, 0), (4, 0), (5, 0),
                    (6, 0), (6, 1), (6, 2)):
        nf = normal_form_field(fid, m0)
        worst_k = 0.0
        got = 0
        tries = 0
        while got < 20 and tries < 400:
            tries += 1
            if fid == 6:
                fs_tmax = 0.4 / (m0 + 1)
                x = rng.uniform(0.02, fs_tmax)
                y = rng.uniform(0.5, 1.0)
            elif fid == 5:
                x = rng.uniform(-0.35, 0.35)
                y = rng.uniform(0.3, 1.2)
            else:
                x = rng.uniform(-1.0, 1.0)
                y = rng.uniform(0.2, 1.2)
            try:
                co = nf.field.coeffs(x, y)
                D = discriminant_of_coeffs(*co)
                if abs(D) <= 1e-3 * regular_cutoff(co) / 1e-12:
                    continue  # too close to the discriminant for a sharp test
                worst_k = max(worst_k, abs(
                    curvature(nf.field, (x, y), route="cubic").K))
            except (SingularPointError, ValueError):
                continue
            got += 1
        if fid == 6:
            samples = [(0.05, 0.8), (0.08, 0.6), (0.06, 1.0)]
        elif fid == 5:
            samples = [(0.1, 0.8), (-0.2, 0.6), (0.25, 1.0)]
        else:
            samples = [(0.3, 0.5), (-0.4, 0.8), (0.6, 0.4)]
        sym = symmetry_residual(nf.field, nf.weights, samples, a=0.05)
        entry = {"id": fid, "m0": m0, "weights": list(nf.weights),
                 "max_curvature": worst_k, "symmetry_residual": sym,
                 "pass": worst_k <= tol["curvature"]
                         and sym <= tol["symmetry"]}
        if fid == 2:
            g = gamma_depressed(nf.field, (0.3, 0.4))
            gnorm = g.norm()
            entry["gamma_norm"] = gnorm
            entry["pass"] = entry["pass"] and gnorm <= 1e-12
        entries.append(entry)
        ok_all = ok_all and entry["pass"]
    fres = {}
    for m0 in (0, 1, 2):
        fs = solve_F(m0, t_max=1.0)
        ts = np.linspace(0.01, 0.9 * fs.t_max, 20)
        fres[str(m0)] = {"residual": f_ode_residual(fs, ts),
                         "t_max": fs.t_max,
                         "bracket_hit": not fs.bracket_ok}
        ok_all = ok_all and fres[str(m0)]["residual"] <= tol["f_ode"]
    report["catalog"] = entries
    report["f_ode"] = fres
    write_json(outdir / "normalforms.json", report)
    report["artifacts"] = ["normalforms.json"]
    return ok_all


def run_classify(obj, cfg, rng, report, outdir):
    field = _field_of(obj)
    point = tuple(cfg.get("point", [0.0, 0.0]))
    cls = classify_singularity(field, point=point)
    report["classification"] = {
        "point": list(point),
        "weights": list(cls.weights) if cls.weights else None,
        "matched_id": cls.matched_id,
        "residual": cls.residual,
        "status": cls.status,
    }
    write_json(outdir / "classify.json", report)
    report["artifacts"] = ["classify.json"]
    return cls.status != "unclassified"


RUNNERS = {
    "check": lambda o, c, r, rep, out: run_check(o, c, r, rep),
    "gamma": run_gamma,
    "leaves": run_leaves,
    "closure": run_closure,
    "discriminant": run_discriminant,
    "normalforms": run_normalforms,
    "classify": run_classify,
}


# ---------------------------------------------------------------------------
# Entry point


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hexweb",
        description="verification suites for cubic-ODE 3-webs")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--strict", action="store_true")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    try:
        cfg = load_config(args.config)
        obj = load_spec(cfg["input"])
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.strict and isinstance(obj, Potential):
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(20):
            x, y = rng.uniform(-1, 1, 2)
            worst = max(worst, abs(obj.associativity_residual(x, y)))
        if worst > cfg["tolerances"]["associativity"]:
            print(f"strict validation failed: associativity residual "
                  f"{worst:.3e}", file=sys.stderr)
            return 3

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    report = {
        "command": args.command,
        "seed": args.seed,
        "config_hash": config_hash(cfg),
        "tolerances": cfg["tolerances"],
    }
    try:
        ok = RUNNERS[args.command](obj, cfg, rng, report, outdir)
    except (SingularPointError, LeafIntegrationError, ValueError) as e:
        report["error"] = str(e)
        ok = False
    report["pass"] = bool(ok)
    write_json(outdir / f"{args.command}_report.json", report)
    print(f"{args.command}: {'PASS' if ok else 'FAIL'} "
          f"(report: {outdir / (args.command + '_report.json')})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
