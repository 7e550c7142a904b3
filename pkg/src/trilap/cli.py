"""Command-line front end.

Exit codes: 0 success, 1 a check or invariant failed (the first failing
check is named on stderr), 2 usage, I/O or schema error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import completeness as cmp
from . import deficiency as dfc
from . import io as tio
from .cochains import h_inner, inner, norm, random_cochain, random_triple
from .complex import ComplexError, Triangulation
from .generators import (DescriptorError, OffspringNotRepresentable,
                         OffspringSpec, from_descriptor)
from .operators import (OPERATOR_IDS, DimensionTooLarge, assemble, d0, d1,
                        delta0, delta1, derivation_identity_checks,
                        gauss_bonnet, laplacian1, laplacian2, spectrum,
                        wedge_disc)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCES = {
    "cochain_identity": 1e-14,
    "adjoint": 1e-10,
    "square": 1e-12,
    "matrix_vs_formula": 1e-12,
    "energy": 1e-10,
    "derivation": 1e-10,
    "wedge": 1e-12,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    descriptor: dict | None = None
    input_path: str | None = None
    output: str | None = None
    seed: int = 42
    tolerances: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_TOLERANCES))
    max_vertices: int = 200_000

    def __post_init__(self):
        if self.descriptor is not None and self.input_path is not None:
            raise UsageError("give either --input or generator flags, not both")

    def load(self) -> Triangulation:
        if self.input_path is not None:
            return tio.load_complex(self.input_path)
        if self.descriptor is None:
            raise UsageError("no input: pass --input or --family")
        return from_descriptor(self.descriptor)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def ok(self) -> bool:
        return bool(self.value <= self.tol)


def _rel(a: complex, b: complex, scale: float) -> float:
    return abs(a - b) / (1.0 + scale)


def identity_suite(cx: Triangulation, seed: int = 42, trials: int = 10,
                   tolerances: dict[str, float] | None = None
                   ) -> list[CheckResult]:
    """Run the operator identities on ``cx`` with seeded random cochains."""
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    out = []
    D0, De0, D1, De1 = (assemble(cx, op) for op in ("d0", "delta0", "d1", "delta1"))
    out.append(CheckResult("d1*d0 = 0", _maxabs(D1.matrix @ D0.matrix),
                           tol["cochain_identity"]))
    out.append(CheckResult("delta0*delta1 = 0", _maxabs(De0.matrix @ De1.matrix),
                           tol["cochain_identity"]))
    out.append(CheckResult("delta0 = weighted adjoint of d0",
                           _maxabs(De0.matrix - D0.weighted_adjoint()),
                           tol["matrix_vs_formula"]))
    out.append(CheckResult("delta1 = weighted adjoint of d1",
                           _maxabs(De1.matrix - D1.weighted_adjoint()),
                           tol["matrix_vs_formula"]))
    T, L = assemble(cx, "T"), assemble(cx, "L")
    out.append(CheckResult("T^2 = L", _maxabs(T.matrix @ T.matrix - L.matrix),
                           tol["square"]))

    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ("adj0", "adj1", "mat", "e1", "e2", "wedge",
                              "tsym", "deriv")}
    mats = {op: assemble(cx, op) for op in ("d0", "delta0", "d1", "delta1",
                                             "L1", "L2")}
    calls = {"d0": d0, "delta0": delta0, "d1": d1, "delta1": delta1,
             "L1": laplacian1, "L2": laplacian2}
    complete = cx.is_triangle_complete()
    for _ in range(trials):
        s = [int(v) for v in rng.integers(0, 2**31, size=4)]
        f, phi, psi = (random_cochain(cx, k, seed=s[k]) for k in range(3))
        g = random_cochain(cx, 1, seed=s[3])
        lhs, rhs = inner(d0(f), phi), inner(f, delta0(phi))
        worst["adj0"] = max(worst["adj0"], _rel(lhs, rhs, norm(d0(f)) * norm(phi)
                                                + norm(f) * norm(delta0(phi))))
        lhs, rhs = inner(d1(phi), psi), inner(phi, delta1(psi))
        worst["adj1"] = max(worst["adj1"], _rel(lhs, rhs, norm(d1(phi)) * norm(psi)
                                                + norm(phi) * norm(delta1(psi))))
        for op, x in (("d0", f), ("delta0", phi), ("d1", phi), ("delta1", psi),
                      ("L1", phi), ("L2", psi)):
            ref = calls[op](x).values
            diff = np.abs(mats[op].matrix @ x.values - ref).max(initial=0.0)
            worst["mat"] = max(worst["mat"],
                               diff / (1.0 + np.abs(ref).max(initial=0.0)))
        e1 = inner(laplacian1(phi), phi).real
        r1 = norm(delta0(phi)) ** 2 + norm(d1(phi)) ** 2
        worst["e1"] = max(worst["e1"], abs(e1 - r1) / max(1.0, abs(r1)))
        e2 = inner(laplacian2(psi), psi).real
        r2 = norm(delta1(psi)) ** 2
        worst["e2"] = max(worst["e2"], abs(e2 - r2) / max(1.0, abs(r2)))
        w = wedge_disc(phi, g) + wedge_disc(g, phi)
        worst["wedge"] = max(worst["wedge"], np.abs(w.values).max(initial=0.0))
        F, G = random_triple(cx, s[0]), random_triple(cx, s[1])
        a, b = h_inner(gauss_bonnet(F), G), h_inner(F, gauss_bonnet(G))
        worst["tsym"] = max(worst["tsym"], abs(a - b) / (1.0 + abs(a)))
        if complete:
            rep = derivation_identity_checks(f, phi, psi)
            worst["deriv"] = max(worst["deriv"], rep.worst(interior=True))
    out += [
        CheckResult("<d0 f, phi> = <f, delta0 phi>", worst["adj0"], tol["adjoint"]),
        CheckResult("<d1 phi, psi> = <phi, delta1 psi>", worst["adj1"], tol["adjoint"]),
        CheckResult("<TF, G> = <F, TG>", worst["tsym"], tol["adjoint"]),
        CheckResult("matrix = formula", worst["mat"], tol["matrix_vs_formula"]),
        CheckResult("<L1 phi, phi> = |delta0 phi|^2 + |d1 phi|^2", worst["e1"],
                    tol["energy"]),
        CheckResult("<L2 psi, psi> = |delta1 psi|^2", worst["e2"], tol["energy"]),
        CheckResult("wedge antisymmetry", worst["wedge"], tol["wedge"]),
    ]
    if complete:
        out.append(CheckResult("product rules on interior simplices",
                               worst["deriv"], tol["derivation"]))
    return out


def _maxabs(m) -> float:
    data = m.tocoo().data if sp.issparse(m) else np.asarray(m)
    return float(np.abs(data).max(initial=0.0))


def validation_suite(cx: Triangulation) -> list[CheckResult]:
    """Structural invariants of a loaded complex (0 means satisfied)."""
    res = []
    bad = 0
    for k, (i, j) in enumerate(cx.edges):
        x, y = cx.vertices[i], cx.vertices[j]
        if cx.edge_sign(y, x) != (k, -1) or cx.r_of(y, x) != cx.r[k]:
            bad += 1
    res.append(CheckResult("reverse edges present with equal weight", bad, 0))
    bad = 0
    for k in range(cx.n_faces):
        x, y, z = cx.face_vertices(k)
        for p, q in ((x, y), (y, z), (z, x)):
            try:
                cx.edge_sign(p, q)
            except ComplexError:
                bad += 1
    res.append(CheckResult("face edges present", bad, 0))
    res.append(CheckResult("connected",
                           int((cx.distances_from(cx.vertices[0]) < 0).sum()), 0))
    res.append(CheckResult("triangle complete", int(not cx.is_triangle_complete()), 0))
    return res


def _report(results: list[CheckResult], stream) -> int:
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status}  {r.name}: {tio.fmt(r.value)} (tol {r.tol:g})", file=stream)
    failed = [r for r in results if not r.ok]
    if failed:
        print(f"first failing check: {failed[0].name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {text!r}")


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="complex JSON file")
    p.add_argument("--family", help="triangle, regular, tree, layered or bipartite")
    p.add_argument("--descriptor", help="generator descriptor as JSON text")
    p.add_argument("--radius", type=int)
    p.add_argument("--off", help="offspring: poly:A, geom:Q, const:K, "
                                 "explicit:a,b,..., dexp:B,R")
    p.add_argument("--depth", type=int)
    p.add_argument("--sizes", type=_int_list,
                   help="layer sizes (layered) or even-sphere sizes (bipartite)")
    p.add_argument("--size-base", type=int,
                   help="bipartite: #S_2n = base**n")
    p.add_argument("--odd-edges", type=int, default=1)


def _descriptor(args) -> dict | None:
    if args.descriptor:
        try:
            return json.loads(args.descriptor)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad --descriptor: {exc}")
    fam = args.family
    if fam is None:
        return None
    desc: dict = {"family": fam}
    if fam == "regular":
        desc["radius"] = _need(args.radius, "--radius")
    elif fam == "tree":
        desc["off"] = OffspringSpec.parse(_need(args.off, "--off")).to_json()
        desc["depth"] = _need(args.depth, "--depth")
    elif fam == "layered":
        desc["sizes"] = _need(args.sizes, "--sizes")
        if args.depth is not None:
            desc["depth"] = args.depth
    elif fam == "bipartite":
        if args.size_base is not None:
            desc["sizes"] = {"kind": "pow", "base": args.size_base}
        else:
            desc["sizes"] = _need(args.sizes, "--sizes")
        desc["depth"] = _need(args.depth, "--depth")
        desc["odd_edges"] = args.odd_edges
    elif fam != "triangle":
        raise UsageError(f"unknown family {fam!r}")
    return desc


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this family")
    return value


def _config(args) -> RunConfig:
    return RunConfig(args.command, _descriptor(args), args.input,
                     getattr(args, "output", None), getattr(args, "seed", 42))


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    cfg = _config(args)
    _emit(tio.dumps_complex(cfg.load()), cfg.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    cx = _config(args).load()
    print(f"{cx!r}")
    return _report(validation_suite(cx), sys.stdout)


def cmd_identities(args) -> int:
    cfg = _config(args)
    cx = cfg.load()
    return _report(identity_suite(cx, seed=cfg.seed, trials=args.trials),
                   sys.stdout)


def cmd_spectrum(args) -> int:
    cfg = _config(args)
    cx = cfg.load()
    opm = assemble(cx, args.op)
    if opm.source != opm.target:
        raise UsageError(f"{args.op} is not an endomorphism")
    vals = spectrum(opm, k=args.k)
    _emit(tio.spectrum_csv(vals), cfg.output)
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = _config(args)
    cx = cfg.load()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ops = OPERATOR_IDS if args.op == "all" else [args.op]
    for op in ops:
        name = op.replace("+", "plus").replace("-", "minus")
        tio.write_matrix_market(assemble(cx, op), outdir / f"{name}.mtx")
    return EXIT_OK


def cmd_check(args) -> int:
    if args.input is None and args.family == "tree" and args.depth is None:
        off = OffspringSpec.parse(_need(args.off, "--off"))
        _emit(json.dumps(cmp.offspring_verdict(off).to_json(), indent=1) + "\n",
              args.output)
        return EXIT_OK
    cfg = _config(args)
    cx = cfg.load()
    desc = cx.meta.get("descriptor") or {}
    if desc.get("family") == "tree" and "off" in desc:
        off = OffspringSpec.from_json(desc["off"])
        verdict = cmp.offspring_verdict(off)
        try:
            seq = cmp.cutoff_sequence(cx, cx.origin, [1],
                                      "offspring-series", off)
            cmp.with_constants(verdict, seq)
        except cmp.SupportNotFinite as exc:
            verdict.notes.append(f"constants not measured: {exc}")
    else:
        verdict = cmp.xi_verdict(cx)
        o = cx.origin if cx.origin is not None else cx.vertices[0]
        n = int(cx.distances_from(o).max()) // 2
        if n >= 1:
            seq = cmp.cutoff_sequence(cx, o, range(1, n + 1))
            cmp.with_constants(verdict, seq)
    _emit(json.dumps(verdict.to_json(), indent=1) + "\n", cfg.output)
    return EXIT_OK


def cmd_deficiency(args) -> int:
    if args.operator == "L1":
        off = OffspringSpec.parse(_need(args.off, "--off"))
        rep = dfc.l1_candidate(off, _need(args.depth, "--depth"),
                               max_vertices=args.max_vertices)
    else:
        depth = _need(args.depth, "--depth")
        if args.size_base is not None:
            base = args.size_base
            sizes = [base ** n for n in range(depth // 2 + 1)]
        else:
            sizes = _need(args.sizes, "--sizes")
        rep = dfc.l2_candidate(sizes, depth, args.odd_edges)
    _emit(json.dumps(rep.to_json(), indent=1) + "\n", args.output)
    if args.csv:
        Path(args.csv).write_text(tio.coefficients_csv(rep.csv_rows()))
    if rep.verdict != dfc.CONFIRMED:
        print(f"first failing check: {_first_deficiency_failure(rep)}",
              file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _first_deficiency_failure(rep) -> str:
    if max(rep.recurrence_residuals) > dfc.RECURRENCE_TOL:
        return "recurrence residual"
    if rep.residual is None:
        return "no materialized truncation"
    if rep.residual > dfc.RESIDUAL_TOL:
        return f"interior residual {tio.fmt(rep.residual)} > {dfc.RESIDUAL_TOL:g}"
    if rep.norm <= 0:
        return "candidate is zero"
    return "tail mass does not fall below the threshold"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trilap",
        description="Weighted triangulations, discrete Laplacians and "
                    "self-adjointness probes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a generated complex as JSON")
    _add_source(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check structural invariants")
    _add_source(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("identities", help="run the operator identity suite")
    _add_source(p)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--trials", type=int, default=10)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("spectrum", help="eigenvalues of an operator as CSV")
    _add_source(p)
    p.add_argument("--op", required=True, choices=OPERATOR_IDS)
    p.add_argument("-k", type=int, default=None,
                   help="number of smallest eigenvalues (large operators)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("export", help="write operator matrices (Matrix Market)")
    _add_source(p)
    p.add_argument("--op", default="all", choices=("all",) + OPERATOR_IDS)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("check", help="completeness verdict as JSON")
    _add_source(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("deficiency", help="deficiency candidate report")
    p.add_argument("--operator", required=True, choices=("L1", "L2"))
    p.add_argument("--off")
    p.add_argument("--depth", type=int)
    p.add_argument("--sizes", type=_int_list)
    p.add_argument("--size-base", type=int)
    p.add_argument("--odd-edges", type=int, default=1)
    p.add_argument("--max-vertices", type=int, default=200_000)
    p.add_argument("--csv", help="also write |C_n| per layer to this CSV")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_deficiency)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, DescriptorError, OffspringNotRepresentable,
            tio.SchemaError, OSError, DimensionTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComplexError as exc:
        # a document that parses but describes an invalid complex
        print(f"invalid complex: {exc}", file=sys.stderr)
        print(f"first failing check: {type(exc).__name__}", file=sys.stderr)
        return EXIT_FAIL
    except (cmp.SupportNotFinite, dfc.SummabilityFails,
            dfc.NoInteriorSimplices) as exc:
        print(f"first failing check: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
