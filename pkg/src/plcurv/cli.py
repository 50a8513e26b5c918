"""Command-line interface: ``plcurv <command> ...``.

Complex inputs are PLC files, ``-`` for stdin, or ``gen:NAME[:key=value;...]``
for a built-in shape. Reports go to stdout (or ``--output``) as JSON or CSV.
Exit status is 0 on success, 1 when a check fails and 2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .complex import (ComplexError, EmbeddedComplex, euler_characteristic, format_plc,
                      parse_plc, subdivide_barycentric, validate, volume_by_dim)
from .curvature import (CurvatureMap, census_sweep, index, morse_counts, total_curvature,
                        vertex_measure, vertex_measure_exact, wk)
from .geom import RngStream, estimate_cnk, kinematic_constant, random_directions
from .homology import betti
from .kinematic import (KinematicConfig, factorization_configs, linear_kinematic,
                        run_factorization, segment_pair, translation_coincidence_measure,
                        verify_kinematic)
from .shapes import SHAPES, generate
from .slicing import GeometryDegeneracy
from .stats import Estimate, VerificationReport

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
CHECKS = ("gauss-bonnet", "chern-lashof", "morse-sum", "subdivision", "linear", "kinematic",
          "factorization", "translation-measure")


class InputError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    inputs: list
    seed: int
    params: dict = field(default_factory=dict)
    results: list = field(default_factory=list)
    rejections: int = 0
    wall_ms: float = 0.0

    def add(self, name, est: Estimate | float, exact=None, passed=None):
        if not isinstance(est, Estimate):
            est = Estimate.exact(float(est))
        self.results.append({"name": name, "value": _num(est.value),
                             "std_error": _num(est.std_error), "samples": int(est.samples),
                             "exact": _num(exact), "pass": passed})
        self.rejections += int(est.rejections)

    def add_verification(self, rep: VerificationReport):
        self.results.extend(rep.results())
        self.rejections += rep.rejections

    @property
    def passed(self) -> bool:
        return all(r["pass"] is not False for r in self.results)

    def as_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "seed": self.seed,
                "params": self.params, "results": self.results,
                "rejections": self.rejections, "wall_ms": round(self.wall_ms, 3)}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["command", "name", "value", "std_error", "samples", "exact", "pass"])
        for r in self.results:
            w.writerow([self.command, r["name"], r["value"], r["std_error"], r["samples"],
                        "" if r["exact"] is None else r["exact"],
                        "" if r["pass"] is None else str(r["pass"]).lower()])
        return buf.getvalue()


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


# ----------------------------------------------------------------------------
# inputs

def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if "," in text:
        return [float(t) for t in text.split(",")]
    return text


def _parse_params(items) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def _generate(name: str, params: dict) -> EmbeddedComplex:
    if name not in SHAPES:
        raise InputError(f"unknown shape {name!r}; choose from {', '.join(SHAPES)}")
    try:
        return generate(name, **params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from exc


def load_input(spec: str) -> EmbeddedComplex:
    if spec.startswith("gen:"):
        name, _, rest = spec[4:].partition(":")
        return _generate(name, _parse_params([p for p in rest.split(";") if p]))
    if spec == "-":
        return parse_plc(sys.stdin.read())
    try:
        with open(spec, encoding="utf-8") as fh:
            return parse_plc(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {spec}: {exc.strerror}") from exc


def _directions(args) -> int:
    return args.directions if args.directions is not None else args.samples


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PLCURV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"PLCURV_THREADS must be an integer, got {env!r}") from None
    return 1


def _exact_flag(args):
    return {"auto": None, "yes": True, "no": False}[args.exact]


# ----------------------------------------------------------------------------
# commands

def cmd_validate(args, rep: RunReport):
    try:
        X = load_input(args.input)
        problems = validate(X)
    except ComplexError as exc:
        problems = [str(exc)]
    rep.params["problems"] = problems
    rep.add("valid", float(not problems), exact=1.0, passed=not problems)


def cmd_info(args, rep: RunReport):
    X = load_input(args.input)
    b = betti(X)
    rep.params["betti"] = list(b.betti)
    rep.params["f_vector"] = list(X.f_vector)
    rep.add("dim", X.dim, exact=X.dim)
    rep.add("ambient_dim", X.ambient_dim, exact=X.ambient_dim)
    chi = euler_characteristic(X)
    rep.add("euler", chi, exact=chi)
    for k, bk in enumerate(b.betti):
        rep.add(f"betti.{k}", bk, exact=bk)
    for k, fk in enumerate(X.f_vector):
        rep.add(f"faces.{k}", fk, exact=fk)
    if X.dim >= 0:
        vol = volume_by_dim(X, X.dim)
        rep.add(f"volume.{X.dim}", vol, exact=vol)


def cmd_curvature(args, rep: RunReport):
    X = load_input(args.input)
    cmap = CurvatureMap.parse(args.map)
    verts = args.vertex if args.vertex else list(X.used_vertices)
    for v in verts:
        if v not in X.used_vertices:
            raise InputError(f"vertex {v} is not a vertex of the complex")
    stream = RngStream(args.seed)
    rep.params.update(map=cmap.value, vertices=verts)
    if args.direction is not None:
        a = np.array(args.direction, dtype=float)
        if a.size != X.ambient_dim or np.linalg.norm(a) == 0:
            raise InputError("direction must be a nonzero vector in the ambient space")
        a = a / np.linalg.norm(a)
        rep.params["direction"] = a.tolist()
        try:
            vals = [index(X, v, a, cmap, method=args.method) for v in verts]
        except GeometryDegeneracy as exc:
            raise InputError(f"direction is not generic: {exc}") from exc
        for v, val in zip(verts, vals):
            rep.add(f"index.{v}", val, exact=val)
        rep.add("census", sum(vals), exact=sum(vals))
        return
    exact = _exact_flag(args)
    if exact is None:
        exact = X.ambient_dim <= 2
    if exact and X.ambient_dim > 2:
        raise InputError("exact vertex measures need ambient dimension <= 2")
    n_dirs = _directions(args)
    rep.params.update(directions=None if exact else n_dirs, exact=exact)
    for v in verts:
        if exact:
            m = vertex_measure_exact(X, v, cmap)
            rep.add(f"rho.{v}", m, exact=m)
        else:
            rep.add(f"rho.{v}", vertex_measure(X, v, cmap, n_dirs, stream.substream(v)))
    if not args.vertex:
        tot = total_curvature(X, cmap, n_dirs, stream.substream(len(X.vertices)), exact)
        rep.add("total", tot, exact=tot.value if exact else None)


def cmd_wk(args, rep: RunReport):
    X = load_input(args.input)
    cmap = CurvatureMap.parse(args.map)
    exact = _exact_flag(args)
    n_dirs = _directions(args)
    ks = [args.k] if args.k is not None else list(range(X.ambient_dim + 1))
    rep.params.update(map=cmap.value, directions=n_dirs, exact=args.exact)
    stream = RngStream(args.seed)
    for k in ks:
        if not 0 <= k <= X.ambient_dim:
            raise InputError(f"k must lie in 0..{X.ambient_dim}")
        est = wk(X, k, cmap, n_dirs, stream.substream(k), exact)
        rep.add(f"W.{k}", est, exact=est.value if est.is_exact else None)


def cmd_estimate(args, rep: RunReport):
    n, k = args.n, args.k
    if not 0 < k < n:
        raise InputError("need 0 < K < N")
    r = estimate_cnk(n, k, args.samples, RngStream(args.seed))
    rep.inputs = [f"cnk:{n},{k}"]
    rep.params.update(n=n, k=k, samples=args.samples)
    exact = kinematic_constant(n, k)
    v = VerificationReport(f"c({n},{k})", r.estimate, Estimate.exact(exact),
                           rel_tol=args.tolerance, sigmas=4.0)
    rep.add(v.name, r.estimate, exact=exact, passed=v.passed)


def _check_census(args, rep: RunReport, X, kind: str):
    cmap = CurvatureMap.EULER if kind == "gauss-bonnet" else CurvatureMap.ABSOLUTE
    n_dirs = _directions(args)
    _, vals, rej = census_sweep(X, cmap, n_dirs, RngStream(args.seed))
    rep.params.update(map=cmap.value, directions=n_dirs)
    rep.rejections += rej
    lo, hi = int(vals.min()), int(vals.max())
    if kind == "gauss-bonnet":
        chi = euler_characteristic(X)
        ok = lo == hi == chi
        rep.add("census.min", Estimate(lo, 0.0, n_dirs), exact=chi, passed=ok)
        rep.add("census.max", Estimate(hi, 0.0, n_dirs), exact=chi, passed=ok)
    else:
        bound = betti(X).total
        ok = lo >= bound
        rep.add("census.min", Estimate(lo, 0.0, n_dirs), exact=bound, passed=ok)
        rep.add("census.max", Estimate(hi, 0.0, n_dirs))
        rep.add("attained", int(np.sum(vals == bound)), passed=None)


def _check_morse(args, rep: RunReport, X):
    n_dirs = _directions(args)
    stream = RngStream(args.seed)
    b = betti(X).betti
    chi = euler_characteristic(X)
    mins = [math.inf] * len(b)
    alt_ok, rej, done = True, 0, 0
    dirs = random_directions(X.ambient_dim, stream, n_dirs)
    for a in dirs:
        try:
            c = morse_counts(X, a)
        except GeometryDegeneracy:
            rej += 1
            continue
        done += 1
        mins = [min(m, ck) for m, ck in zip(mins, c)]
        alt_ok &= sum((-1) ** k * ck for k, ck in enumerate(c)) == chi
    rep.rejections += rej
    rep.params.update(directions=n_dirs)
    for k, (m, bk) in enumerate(zip(mins, b)):
        rep.add(f"morse.{k}.min", Estimate(m, 0.0, done), exact=bk, passed=m >= bk)
    rep.add("alternating", Estimate(chi if alt_ok else math.nan, 0.0, done), exact=chi,
            passed=alt_ok)


def _check_subdivision(args, rep: RunReport, X):
    cmap = CurvatureMap.parse(args.map)
    exact = _exact_flag(args)
    n_dirs = _directions(args)
    Y = subdivide_barycentric(X)
    rep.params.update(map=cmap.value, directions=n_dirs)
    s1, s2 = RngStream(args.seed, 0), RngStream(args.seed, 1)
    for k in range(X.ambient_dim + 1):
        a = wk(X, k, cmap, n_dirs, s1.substream(k), exact)
        b = wk(Y, k, cmap, n_dirs, s2.substream(k), exact)
        v = VerificationReport(f"W.{k}", b, a, abs_tol=1e-9, sigmas=3.0)
        rep.add_verification(v)


def _check_linear(args, rep: RunReport, X):
    cmap = CurvatureMap.parse(args.map)
    k = args.k if args.k is not None else 1
    if not 0 <= k <= X.ambient_dim:
        raise InputError(f"k must lie in 0..{X.ambient_dim}")
    inner = args.directions if args.directions is not None else 256
    rep.params.update(map=cmap.value, k=k, samples=args.samples, inner_directions=inner)
    lhs = linear_kinematic(X, k, args.samples, RngStream(args.seed, 0), cmap, inner)
    rhs = wk(X, k, cmap, 10_000, RngStream(args.seed, 1), None)
    rep.add_verification(VerificationReport(f"linear.W.{k}", lhs, rhs,
                                            rel_tol=args.tolerance))


def _check_kinematic(args, rep: RunReport, X1, X2):
    if X1.ambient_dim != X2.ambient_dim:
        raise InputError("inputs live in different ambient dimensions")
    cfg = KinematicConfig(motions=args.motions if args.motions is not None else args.samples,
                          directions=args.directions if args.directions is not None else 256,
                          seed=args.seed, map=args.map, threads=_threads(args),
                          rel_tol=args.tolerance)
    rep.params.update(map=cfg.map.value, motions=cfg.motions, inner_directions=cfg.directions)
    v = verify_kinematic(X1, X2, cfg)
    rep.params.update(v.details)
    rep.add_verification(v)


def _check_factorization(args, rep: RunReport):
    names = list(factorization_configs()) if args.config == "all" else [args.config]
    n_dirs = _directions(args)
    rep.inputs = names
    rep.params.update(mode=args.mode, rotations=args.rotations, directions=n_dirs)
    for i, name in enumerate(names):
        try:
            v = run_factorization(name, args.rotations, n_dirs, RngStream(args.seed, i),
                                  args.mode)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        rep.add_verification(v)


def _check_translation(args, rep: RunReport):
    if args.case == "segment-triangle":
        F1 = np.array([[0.0, 0.0, 0.0], [0.6, 0.0, 0.8]])
        F2 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    else:
        F1, F2 = segment_pair(args.angle)
    rep.inputs = [args.case]
    rep.params.update(angle=args.angle if args.case == "segments" else None,
                      samples=args.samples, tolerance=args.tolerance)
    try:
        v = translation_coincidence_measure(F1, F2, args.samples, RngStream(args.seed),
                                            rel_tol=args.tolerance)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rep.add_verification(v)


def cmd_check(args, rep: RunReport):
    kind = args.check
    need = {"kinematic": 2, "factorization": 0, "translation-measure": 0}.get(kind, 1)
    if len(args.inputs) != need:
        raise InputError(f"check {kind} takes {need} input(s), got {len(args.inputs)}")
    Xs = [load_input(s) for s in args.inputs]
    if kind in ("gauss-bonnet", "chern-lashof"):
        _check_census(args, rep, Xs[0], kind)
    elif kind == "morse-sum":
        _check_morse(args, rep, Xs[0])
    elif kind == "subdivision":
        _check_subdivision(args, rep, Xs[0])
    elif kind == "linear":
        _check_linear(args, rep, Xs[0])
    elif kind == "kinematic":
        _check_kinematic(args, rep, *Xs)
    elif kind == "factorization":
        _check_factorization(args, rep)
    else:
        _check_translation(args, rep)


# ----------------------------------------------------------------------------
# parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--directions", type=int, default=None,
                   help="direction samples per measure (default: --samples)")
    p.add_argument("--tolerance", type=float, default=0.05, help="relative tolerance")
    p.add_argument("--map", default="sigma", help="sigma | tau | b0")
    p.add_argument("--exact", choices=("auto", "yes", "no"), default="auto",
                   help="exact vertex measures in the plane")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("-o", "--output", default="-")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="plcurv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check complex invariants")
    p.add_argument("input")
    p = sub.add_parser("info", parents=[common], help="Euler characteristic, Betti numbers")
    p.add_argument("input")
    p = sub.add_parser("gen", parents=[common], help="write a built-in shape as PLC")
    p.add_argument("shape", choices=SHAPES)
    p.add_argument("params", nargs="*", help="key=value shape parameters")
    p = sub.add_parser("curvature", parents=[common], help="vertex curvature measures")
    p.add_argument("input")
    p.add_argument("--vertex", type=int, action="append")
    p.add_argument("--direction", type=lambda s: [float(t) for t in s.split(",")])
    p.add_argument("--method", choices=("slice", "lower"), default="slice")
    p = sub.add_parser("wk", parents=[common], help="intrinsic invariants W_k")
    p.add_argument("input")
    p.add_argument("--k", type=int)
    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo constants")
    p.add_argument("what", choices=("cnk",))
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p = sub.add_parser("check", parents=[common], help="verification experiments")
    p.add_argument("check", choices=CHECKS)
    p.add_argument("inputs", nargs="*")
    p.add_argument("--k", type=int)
    p.add_argument("--motions", type=int)
    p.add_argument("--rotations", type=int, default=400)
    p.add_argument("--mode", choices=("normal", "literal"), default="normal")
    p.add_argument("--config", default="all")
    p.add_argument("--case", choices=("segments", "segment-triangle"), default="segments")
    p.add_argument("--angle", type=float, default=math.pi / 2)
    return parser


COMMANDS = {"validate": cmd_validate, "info": cmd_info, "curvature": cmd_curvature,
            "wk": cmd_wk, "estimate": cmd_estimate, "check": cmd_check}


def _write(text: str, dest: str):
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.samples < 1:
            raise InputError("--samples must be positive")
        if args.command == "gen":
            X = _generate(args.shape, _parse_params(args.params))
            _write(format_plc(X), args.output)
            return EXIT_OK
        inputs = [getattr(args, "input", None)] if hasattr(args, "input") else []
        inputs += list(getattr(args, "inputs", []) or [])
        rep = RunReport(args.command if args.command != "check" else f"check {args.check}",
                        inputs, args.seed)
        start = time.perf_counter()
        COMMANDS[args.command](args, rep)
        rep.wall_ms = (time.perf_counter() - start) * 1e3
    except (InputError, ComplexError) as exc:
        print(f"plcurv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"plcurv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write(rep.to_json() if args.format == "json" else rep.to_csv(), args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
