"""Command-line interface.

Every command reads an optional JSON config (``--config``); flags mirror the
config keys and override them.  Exit codes: 0 success, 2 invalid input,
3 numerical failure, 4 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .cauchy_lift import DEFAULT_TOLERANCES, EigenLift, SheetAtlas, analyze_pair
from .elliptic import QuadraticProblem, lambda_n, u_n_reference
from .errors import InvariantViolation, NumericalError, PSError, ValidationError
from .monodromy import default_lambda_grid, selfcheck
from .pants import circle_data, moduli, pants_of
from .rational_map import (
    RationalMap,
    assemble_full_map,
    critical_structure,
    ps3_instance,
    quadratic_map,
    reconstruct_from_a,
)
from .spectral import (
    EigenPair,
    SpectralProblem,
    compare_spectra,
    eigenfunction_eval,
    solve,
    zero_report,
)

log = logging.getLogger("psthree")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INVARIANT = 0, 2, 3, 4
COMMANDS = ("spectrum", "analyze", "reconstruct", "pants-moduli", "validate-quadratic",
            "monodromy-selfcheck")


@dataclass
class RunConfig:
    """Resolved settings of one invocation."""

    command: str
    map: object = None
    N: int = 64
    out: str = "."
    lam_range: tuple | None = None
    tolerances: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.N) < 4:
            raise ValidationError("N must be at least 4")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ValidationError(f"tolerance {k!r} must be positive")

    def tol(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))


# ----------------------------------------------------------------------------
# inputs
# ----------------------------------------------------------------------------

def load_map(source) -> RationalMap:
    """Map from inline JSON, a JSON file, or an already parsed dict.

    Accepted forms: {"num": [...], "den": [...]}, {"quadratic": C},
    {"ps3": {"a": a, "segment": [f1, f2]}}, {"branch_values": [a1, a2, a3, a4]},
    or a document with such an object under "map".
    """
    if source is None:
        raise ValidationError("no map given (use --map or a config key 'map')")
    if isinstance(source, str):
        text = source.strip()
        if not text.startswith("{"):
            try:
                text = Path(text).read_text(encoding="utf-8")
            except OSError as exc:
                raise ValidationError(f"cannot read map file: {exc}") from exc
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"map is not valid JSON: {exc}") from exc
    if not isinstance(source, dict):
        raise ValidationError("map must be a JSON object")
    if "map" in source and isinstance(source["map"], dict):
        return load_map(source["map"])
    if "num" in source and "den" in source:
        return RationalMap.from_dict(source)
    if "quadratic" in source:
        return quadratic_map(float(source["quadratic"]))
    if "ps3" in source:
        p = source["ps3"]
        seg = tuple(p.get("segment", (0.75, 0.97)))
        return ps3_instance(float(p["a"]), seg)
    if "branch_values" in source:
        return assemble_full_map(*(jsonio.parse_float(v) for v in source["branch_values"]))
    raise ValidationError("unrecognized map description")


def _solve_with_check(R: RationalMap, N: int, tol: float):
    sp = solve(SpectralProblem(R, N))
    ref = solve(SpectralProblem(R, 2 * N))
    drift = compare_spectra(sp, ref)
    return sp, ref, drift, bool(drift > tol)


def _pair_converged(p: EigenPair, ref, tol: float) -> bool:
    lr = ref.eigenvalues
    return bool(abs(p.lam - 1) > 1e-4 and lr.size and np.min(np.abs(lr - p.lam)) < tol)


def _symmetry_tags(R: RationalMap, sp, ref, tol: float) -> list:
    """Symmetry type of converged pairs of a cubic map; 'unclassified' otherwise."""
    tags = ["unclassified"] * len(sp)
    if R.degree != 3:
        return tags
    atlas = SheetAtlas(R)
    for i, p in enumerate(sp.pairs):
        if not _pair_converged(p, ref, tol):
            continue
        try:
            tags[i] = EigenLift(p, atlas).symmetry
        except PSError as exc:
            log.info("pair %d left unclassified: %s", p.index, exc)
    return tags


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig) -> int:
    R = load_map(cfg.map)
    tol = cfg.tol("convergence", 1e-6)
    sp, ref, drift, warn = _solve_with_check(R, cfg.N, tol)
    if warn:
        log.warning("eigenvalues move by %.3g between N=%d and N=%d", drift, cfg.N, 2 * cfg.N)
    tags = _symmetry_tags(R, sp, ref, tol)
    pairs = [{
        "index": p.index, "lambda": p.lam, "residual": p.residual,
        "converged": _pair_converged(p, ref, tol), "symmetry": tag,
        "zeros": zero_report(p).total, "coefficients": p.coefficients,
    } for p, tag in zip(sp.pairs, tags)]
    out = Path(cfg.out)
    jsonio.write_json(out / "spectrum.json", {
        "command": "spectrum", "map": R.to_dict(), "N": sp.N, "order": sp.order,
        "convergence": {"reference_N": 2 * cfg.N, "max_change": drift, "tolerance": tol,
                        "warning": warn},
        "artifacts": list(sp.artifacts), "pairs": pairs,
    })
    x = np.cos(np.linspace(np.pi, 0, 201))
    cols = [eigenfunction_eval(p, x) for p in sp.pairs]
    jsonio.write_csv(out / "eigenfunctions.csv", ["x"] + [f"u{p.index}" for p in sp.pairs],
                     (list(map(float, row)) for row in np.column_stack([x] + cols)))
    print(f"{len(sp)} eigenpairs written to {out / 'spectrum.json'}")
    return EXIT_OK


def _load_spectrum(cfg: RunConfig):
    path = cfg.extra.get("spectrum")
    if path:
        try:
            doc = jsonio.read_json(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read spectrum file: {exc}") from exc
        R = load_map(cfg.map) if cfg.map is not None else RationalMap.from_dict(doc["map"])
        pairs = [(EigenPair(lam=jsonio.parse_float(d["lambda"]),
                            coefficients=np.array([jsonio.parse_float(v) for v in d["coefficients"]]),
                            residual=jsonio.parse_float(d["residual"]), index=int(d["index"]),
                            symmetry=d.get("symmetry", "unclassified")),
                  bool(d.get("converged", True))) for d in doc["pairs"]]
        return R, pairs
    R = load_map(cfg.map)
    sp, ref, _, _ = _solve_with_check(R, cfg.N, cfg.tol("convergence", 1e-6))
    return R, [(p, _pair_converged(p, ref, cfg.tol("convergence", 1e-6))) for p in sp.pairs]


def _analysis_dict(an) -> dict:
    w = an.winding
    return {
        "index": an.index, "lambda": an.lam, "symmetry": an.symmetry, "J0": an.J0,
        "const_star": an.const_star, "kappa_spread": an.kappa_spread,
        "j_spread": an.j_spread, "boundary_residuals": an.boundary_residuals,
        "bvp_residuals": an.bvp_residuals, "map_boundary_residuals": an.map_boundary_residuals,
        "mirror_residual": an.mirror_residual,
        "m": w.m if w else None, "d_g": w.d_g if w else None, "d_b": w.d_b if w else None,
        "fashion": w.fashion if w else None,
        "predicted_zeros": an.predicted_zeros, "observed_zeros": an.observed_zeros,
        "reconstruction_error": an.reconstruction_error,
        "descriptor": an.descriptor.to_dict() if an.descriptor else None,
        "checks": an.checks, "failed_checks": an.failed, "notes": an.notes,
    }


def cmd_analyze(cfg: RunConfig) -> int:
    R, pairs = _load_spectrum(cfg)
    which = cfg.extra.get("pairs", "converged")
    selected = [p for p, conv in pairs if which == "all" or conv]
    tol = {k: cfg.tol(k, v) for k, v in DEFAULT_TOLERANCES.items()}
    atlas = SheetAtlas(R)
    reports = []
    for p in selected:
        an = analyze_pair(p, atlas, tol)
        reports.append(_analysis_dict(an))
        status = "ok" if an.passed else "FAILED " + ",".join(an.failed)
        print(f"pair {p.index} lambda={p.lam:.12g} {an.symmetry}: {status}")
    failed = [r["index"] for r in reports if r["failed_checks"]]
    jsonio.write_json(Path(cfg.out) / "analysis.json", {
        "command": "analyze", "map": R.to_dict(), "tolerances": tol, "pairs": reports,
        "failed_pairs": failed,
    })
    if failed:
        log.error("invariant checks failed for pairs %s", failed)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    bv = cfg.extra.get("branch_values")
    if bv:
        pts = [jsonio.parse_float(v) for v in bv]
        R = assemble_full_map(*pts)
        P = pants_of(R)
        err = max(abs(u - v) / max(1.0, abs(v)) if math.isfinite(v) else (0.0 if math.isinf(u) else math.inf)
                  for u, v in zip((P.a1, P.a2, P.a3, P.a4), pts))
        payload = {"command": "reconstruct", "branch_values": pts, "map": R.to_dict(),
                   "verification": {"pants": P.to_dict(), "max_rel_error": err,
                                    "passed": err <= cfg.tol("reconstruction", 1e-8)}}
    else:
        a = cfg.extra.get("a")
        if a is None:
            raise ValidationError("reconstruct needs --a or --branch-values")
        c, b, Rn = reconstruct_from_a(float(a))
        seg = tuple(cfg.extra.get("segment") or (0.75, 0.97))
        inst = ps3_instance(float(a), seg)
        cs = critical_structure(Rn)
        target = (0.0, 1.0, float(a), math.inf)
        err = max((abs(u - v) / max(1.0, abs(v)) if math.isfinite(v) else (0.0 if math.isinf(u) else math.inf))
                  for u, v in zip(cs.a, target))
        payload = {"command": "reconstruct", "a": float(a), "c": c, "b": b,
                   "normalized": Rn.to_dict(), "segment": list(seg), "map": inst.to_dict(),
                   "verification": {"critical_values": list(cs.a), "max_rel_error": err,
                                    "passed": err <= cfg.tol("reconstruction", 1e-9)}}
    jsonio.write_json(out / "map.json", payload)
    ok = payload["verification"]["passed"]
    print(f"map written to {out / 'map.json'}; verification {'passed' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_pants_moduli(cfg: RunConfig) -> int:
    R = load_map(cfg.map)
    P = pants_of(R)
    M = moduli(P)
    lams = cfg.extra.get("lam") or [1.5]
    circles = [circle_data(float(v)) for v in lams]
    jsonio.write_json(Path(cfg.out) / "pants.json", {
        "command": "pants-moduli", "pants": P.to_dict(), "moduli": list(M.values),
        "circles": [c.to_dict() for c in circles]})
    print("moduli " + " ".join(f"{v:.17g}" for v in M.values))
    for c in circles:
        print(f"lambda={c.lam:.17g} certificate={c.certificate:.17g} "
              f"{'disjoint' if c.disjoint else 'NOT disjoint'}")
    return EXIT_OK


def cmd_validate_quadratic(cfg: RunConfig) -> int:
    C = float(cfg.extra.get("C") or 3.0)
    n_max = int(cfg.extra.get("n_max") or 4)
    prob = QuadraticProblem(C)
    sp = solve(SpectralProblem(prob.map, cfg.N))
    tol = cfg.tol("eigenvalue", 1e-6)
    rows, worst = [], 0.0
    for n in range(1, n_max + 1):
        exact = lambda_n(prob, n)
        got = sp[n - 1].lam
        rel = abs(got - exact) / exact
        worst = max(worst, rel)
        rows.append([n, exact, got, rel])
    jsonio.write_csv(Path(cfg.out) / "validate_quadratic.csv",
                     ["n", "lambda_closed_form", "lambda_solver", "rel_error"], rows)
    sys.stdout.write("n,lambda_closed_form,lambda_solver,rel_error\n")
    for r in rows:
        sys.stdout.write(f"{r[0]},{r[1]:.17g},{r[2]:.17g},{r[3]:.3e}\n")
    x = np.cos(np.linspace(np.pi, 0, 401))
    for n in range(1, n_max + 1):
        ref = u_n_reference(prob, n, x)
        u = eigenfunction_eval(sp[n - 1], x)
        u = u * (u @ ref) / (u @ u)
        if np.max(np.abs(u - ref)) > cfg.tol("eigenfunction", 1e-4):
            log.error("eigenfunction %d deviates from the closed form", n)
            return EXIT_INVARIANT
    return EXIT_OK if worst <= tol else EXIT_INVARIANT


def cmd_selfcheck(cfg: RunConfig) -> int:
    if cfg.lam_range:
        lo, hi, n = cfg.lam_range
        lams = np.linspace(float(lo), float(hi), int(n))
    else:
        lams = default_lambda_grid()
    extra = [float(v) for v in cfg.extra.get("lam") or []]
    lams = np.concatenate([lams, extra])
    rep = selfcheck(lams, seed=int(cfg.extra.get("seed") or 0),
                    inject_error=bool(cfg.extra.get("inject_error")))
    for lam, why in rep.skipped:
        print(f"lambda={lam:.17g} skipped: {why}")
    worst = rep.worst()
    for name, r in worst.items():
        print(f"{name}: worst residual {r:.3e}")
    jsonio.write_json(Path(cfg.out) / "selfcheck.json", {
        "command": "monodromy-selfcheck", "lambdas": lams, "worst": worst,
        "skipped": [{"lambda": l, "reason": w} for l, w in rep.skipped],
        "failures": [{"lambda": f.lam, "check": f.name, "residual": f.residual, "tol": f.tol}
                     for f in rep.failures],
        "passed": rep.passed})
    if not rep.passed:
        log.error("%d identity check(s) failed", len(rep.failures))
        return EXIT_INVARIANT
    return EXIT_OK


HANDLERS = {
    "spectrum": cmd_spectrum, "analyze": cmd_analyze, "reconstruct": cmd_reconstruct,
    "pants-moduli": cmd_pants_moduli, "validate-quadratic": cmd_validate_quadratic,
    "monodromy-selfcheck": cmd_selfcheck,
}


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psthree", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_map=True):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--N", type=int, help="truncation (default 64)")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="override a tolerance (repeatable)")
        if with_map:
            p.add_argument("--map", help="map as inline JSON or path to a JSON file")
        return p

    common(sub.add_parser("spectrum", help="solve the discretized equation"))
    p = common(sub.add_parser("analyze", help="lift eigenpairs and check the invariants"))
    p.add_argument("--spectrum", help="spectrum.json from a previous run")
    p.add_argument("--pairs", choices=("converged", "all"))
    p = common(sub.add_parser("reconstruct", help="build a map from its branch values"), False)
    p.add_argument("--a", type=float)
    p.add_argument("--branch-values", type=float, nargs=4, metavar="A")
    p.add_argument("--segment", type=float, nargs=2, metavar="F")
    p = common(sub.add_parser("pants-moduli", help="pants, moduli and circle data"))
    p.add_argument("--lam", type=float, action="append")
    p = common(sub.add_parser("validate-quadratic", help="compare with the closed form"), False)
    p.add_argument("--C", type=float)
    p.add_argument("--n-max", type=int)
    p = common(sub.add_parser("monodromy-selfcheck", help="identity battery over a lambda grid"), False)
    p.add_argument("--lam-range", type=float, nargs=3, metavar=("LO", "HI", "COUNT"))
    p.add_argument("--lam", type=float, action="append", help="extra lambda value")
    p.add_argument("--seed", type=int)
    p.add_argument("--inject-error", action="store_true", default=None,
                   help="test mode: corrupt one matrix entry")
    return ap


_CORE = ("map", "N", "out", "lam_range")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        try:
            base = jsonio.read_json(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from exc
        if not isinstance(base, dict):
            raise ValidationError("config must be a JSON object")
    merged = {k.replace("-", "_"): v for k, v in base.items()}
    for k, v in vars(args).items():
        if k in ("config", "verbose", "command", "tol") or v is None:
            continue
        merged[k] = v
    tolerances = dict(merged.pop("tolerances", {}) or {})
    for item in getattr(args, "tol", None) or []:
        name, _, val = item.partition("=")
        try:
            tolerances[name] = float(val)
        except ValueError as exc:
            raise ValidationError(f"bad tolerance {item!r}") from exc
    merged.pop("command", None)
    core = {k: merged.pop(k) for k in _CORE if k in merged}
    if "lam_range" in core and core["lam_range"] is not None:
        core["lam_range"] = tuple(core["lam_range"])
    return RunConfig(command=args.command, tolerances=tolerances, extra=merged, **core)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INPUT
    except NumericalError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL
    except InvariantViolation as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INVARIANT
    except PSError as exc:  # pragma: no cover - every subclass is handled above
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, TypeError) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
