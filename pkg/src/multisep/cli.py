"""Command-line interface.

Exit codes: 0 on success, 1 on input errors (missing files, parse errors,
bad arguments), 2 when an analysis reports an exclusion flag or an internal
invariant fails. Diagnostics go to stderr as a single line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__, io
from .errors import BranchViolation, InvariantFailure, MultisepError
from .fixtures import FIXTURE_NAMES, FixtureSpec, make_fixture
from .numerics import DEFAULT_TOL, Tolerance
from .proofcheck import certify_gsd, orthogonality_certificate
from .purification import Ensemble, hjw_steering, purify
from .schmidt import gsd_detect, schmidt_decompose
from .separability import (
    SEESAW_ITERS,
    SEESAW_RESTARTS,
    classify_cut,
    multiseparability_report,
    ppt_report,
    realignment_value,
    triangle_classify,
)
from .states import DensityMatrix, PureState, all_bipartitions, party_index, party_letter, partial_entropy, partial_trace

EXIT_OK, EXIT_INPUT, EXIT_FINDING = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class _Finding(Exception):
    """Raised to end a command with exit code 2 after its output is written."""


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _header(args) -> dict:
    return {"tool": "multisep", "version": __version__, "tol": args.tol, "seed": args.seed}


def _print_header(args, title: str) -> None:
    print(f"# multisep {title}  tol={args.tol:g}  seed={args.seed}")


def _emit(args, body: dict) -> None:
    if getattr(args, "json", None):
        rec = {"header": _header(args), **body}
        Path(args.json).write_text(io.dumps(rec, indent=1) + "\n", encoding="utf-8")


def _load_state(path: str) -> PureState | DensityMatrix:
    obj = io.load(path)
    if not isinstance(obj, (PureState, DensityMatrix)):
        raise MultisepError(f"{path}: expected a pure or density state")
    return obj


def _load_pure(path: str) -> PureState:
    obj = _load_state(path)
    if not isinstance(obj, PureState):
        raise MultisepError(f"{path}: this command needs a pure state")
    return obj


def _as_density(s: PureState | DensityMatrix) -> DensityMatrix:
    return s.density() if isinstance(s, PureState) else s


def _dims_arg(values: Sequence[str] | None) -> tuple[int, ...] | None:
    if not values:
        return None
    try:
        return tuple(int(t) for v in values for t in v.split(",") if t)
    except ValueError as exc:
        raise MultisepError(f"invalid --dims {' '.join(values)!r}") from exc


# ------------------------------------------------------------- commands


def cmd_fixture(args) -> None:
    spec = FixtureSpec(args.name, n=args.n, dims=_dims_arg(args.dims), k=args.k, seed=args.seed)
    state = make_fixture(spec)
    io.save(state, args.out)
    print(f"wrote {args.name} dims={list(state.dims)} to {args.out}")


def cmd_schmidt(args) -> None:
    psi = _load_pure(args.file)
    sf = schmidt_decompose(psi, args.cut, args.tol)
    _print_header(args, "schmidt")
    print(f"cut {sf.cut.label()}  rank {sf.rank}")
    print("coefficients " + " ".join(_fmt(c) for c in sf.coeffs))
    print(f"entropy {_fmt(partial_entropy(psi, sf.cut, args.tol))} bits")
    _emit(args, {"schmidt": {"cut": sf.cut.label(), "coeffs": list(sf.coeffs)}})


def cmd_gsd(args) -> None:
    psi = _load_pure(args.file)
    g = gsd_detect(psi, args.tol, retries=args.retries, seed=args.seed)
    _print_header(args, "gsd")
    print(f"decomposable={str(g.decomposable).lower()}")
    if g.decomposable:
        print("coefficients " + " ".join(f"{c:.4f}" for c in g.coeffs))
        print(f"residual {g.residual:.3e}")
    else:
        print(f"failed check: {g.evidence.get('check')}")
    _emit(args, {"gsd": g.to_record()})


def cmd_ppt(args) -> None:
    state = _load_state(args.file)
    names = [party_letter(p) for p in range(state.n)]
    if args.drop:
        drop = [party_index(t, state.n) for t in args.drop.replace(",", "")]
        rho = partial_trace(state, drop)
        names = [nm for p, nm in enumerate(names) if p not in drop]
    else:
        rho = _as_density(state)
    rep = ppt_report(rho, args.tol, names)
    _print_header(args, "ppt")
    for e in rep.entries:
        print(f"{e.label:<8} {e.verdict:<4} min eig {_fmt(e.min_eigenvalue)}")
    _emit(args, {"ppt": rep.to_record()})


def _seesaw(args) -> dict:
    return {"seed": args.seed, "restarts": args.restarts, "iters": args.iters}


def cmd_classify(args) -> None:
    rho = _as_density(_load_state(args.file))
    if rho.n < 2:
        raise MultisepError("classification needs at least two parties")
    _print_header(args, "classify")
    out = {}
    for cut in all_bipartitions(rho.n):
        c = classify_cut(rho, cut, tol=args.tol, **_seesaw(args))
        print(f"{cut.label():<8} {c.verdict.value:<22} via {c.criterion} ({_fmt(c.value)})")
        out[cut.label()] = c.to_record()
    _emit(args, {"classify": out})


def _triangle_lines(rep) -> None:
    for label, c in rep.sides.items():
        print(f"{label}  {c.verdict.value:<22} via {c.criterion}  pt min eig {_fmt(rep.ppt[label])}")
    print(f"gsd decomposable={str(rep.gsd.decomposable).lower()}")
    print("exclusion flags: " + (", ".join(rep.exclusion_flags) or "none"))


def cmd_triangle(args) -> None:
    psi = _load_pure(args.file)
    rep = triangle_classify(psi, args.tol, **_seesaw(args))
    _print_header(args, "triangle")
    _triangle_lines(rep)
    _emit(args, {"triangle": rep.to_record()})
    if rep.exclusion_flags:
        raise _Finding("exclusion flags raised: " + ", ".join(rep.exclusion_flags))


def cmd_purify(args) -> None:
    rho = _as_density(_load_state(args.file))
    psi = purify(rho, args.tol)
    io.save(psi, args.out)
    print(f"wrote purification dims={list(psi.dims)} to {args.out}")


def cmd_steer(args) -> None:
    psi = _load_pure(args.psi)
    e = io.load(args.ensemble)
    if not isinstance(e, Ensemble):
        raise MultisepError(f"{args.ensemble}: expected an ensemble")
    purifier = args.purifier if args.purifier is not None else psi.n - 1
    iso = hjw_steering(psi, e, purifier=purifier, tol=args.tol)
    io.save(iso, args.out)
    dev = float(np.abs(iso.conj().T @ iso - np.eye(iso.shape[1])).max())
    print(f"wrote isometry {iso.shape[0]}x{iso.shape[1]} to {args.out} (max |M^H M - I| = {dev:.2e})")


def _certificate(psi: PureState, e: Ensemble | None, args) -> dict:
    if psi.n == 3:
        rep = orthogonality_certificate(psi, e, args.tol, args.seed)
        rec = rep.to_record()
        steps = [rep]
    else:
        cert = certify_gsd(psi, e, args.tol, args.seed)
        rec = cert.to_record()
        steps = list(cert.steps)
    for k, s in enumerate(steps, 1):
        if len(steps) > 1:
            print(f"step {k}")
        for name, mat in (("AB", s.branches_ab), ("AC", s.branches_ac)):
            for i, row in enumerate(mat):
                for j, lab in enumerate(row):
                    if lab is not None:
                        print(f"  {name} pair ({i},{j}) {lab.kind.value:<13} minor {_fmt(lab.minor_value)}")
        if s.reason:
            print(f"  {s.reason}" + (f": {s.detail}" if s.detail else ""))
        print(f"  pt min eig AB {_fmt(s.ppt_ab_min)}  AC {_fmt(s.ppt_ac_min)}")
    print(f"certified={str(rec['certified']).lower()}")
    return rec


def cmd_proofcheck(args) -> None:
    psi = _load_pure(args.psi)
    if psi.n < 3:
        raise MultisepError("proofcheck needs at least three parties")
    e = None
    if args.ensemble:
        e = io.load(args.ensemble)
        if not isinstance(e, Ensemble):
            raise MultisepError(f"{args.ensemble}: expected an ensemble")
    _print_header(args, "proofcheck")
    _emit(args, {"proofcheck": _certificate(psi, e, args)})


def cmd_report(args) -> None:
    state = _load_state(args.file)
    _print_header(args, "report")
    body: dict = {"input": {"kind": "pure" if isinstance(state, PureState) else "density", "dims": list(state.dims)}}
    flags: list[str] = []
    rho = _as_density(state)
    if state.n >= 2:
        body["ppt"] = ppt_report(rho, args.tol).to_record()
    if isinstance(state, PureState):
        if state.n >= 2:
            body["schmidt"] = {
                cut.label(): list(schmidt_decompose(state, cut, args.tol).coeffs) for cut in all_bipartitions(state.n)
            }
        g = gsd_detect(state, args.tol, seed=args.seed)
        body["gsd"] = g.to_record()
        print(f"gsd decomposable={str(g.decomposable).lower()}")
        if state.n >= 3:
            body["marginals"] = [m.to_record() for m in multiseparability_report(state, args.tol, **_seesaw(args))]
            body["proofcheck"] = _certificate(state, None, args)
        if state.n == 3:
            tri = triangle_classify(state, args.tol, **_seesaw(args))
            _triangle_lines(tri)
            body["triangle"] = tri.to_record()
            flags.extend(tri.exclusion_flags)
    elif state.n >= 2:
        body["realignment"] = realignment_value(rho) if state.n == 2 else None
        cls = {cut.label(): classify_cut(rho, cut, tol=args.tol, **_seesaw(args)) for cut in all_bipartitions(state.n)}
        for label, c in cls.items():
            print(f"{label:<8} {c.verdict.value:<22} via {c.criterion}")
        body["classify"] = {k: c.to_record() for k, c in cls.items()}
    body["exclusion_flags"] = flags
    _emit(args, body)
    print(f"wrote report to {args.json}")
    if flags:
        raise _Finding("exclusion flags raised: " + ", ".join(flags))


# --------------------------------------------------------------- parser


def _tol(text: str) -> float:
    try:
        return Tolerance(eps=float(text)).eps
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=_tol, default=DEFAULT_TOL.eps, help="numerical tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps (default 0)")
    seesaw = _Parser(add_help=False)
    seesaw.add_argument("--restarts", type=int, default=SEESAW_RESTARTS)
    seesaw.add_argument("--iters", type=int, default=SEESAW_ITERS)
    report = _Parser(add_help=False)
    report.add_argument("--json", metavar="OUT", help="also write a machine-readable report")

    p = _Parser(prog="multisep", description="Schmidt decompositions and separability checks for multipartite states.")
    p.add_argument("--version", action="version", version=f"multisep {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fixture", parents=[common], help="write a named state to a file")
    s.add_argument("name", choices=FIXTURE_NAMES)
    s.add_argument("--n", type=int)
    s.add_argument("--dims", nargs="+", help="party dimensions, e.g. 3 3 3 or 3,3,3")
    s.add_argument("--k", type=int, help="number of Schmidt terms (random_gsd)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fixture)

    s = sub.add_parser("schmidt", parents=[common, report], help="bipartite Schmidt decomposition")
    s.add_argument("file")
    s.add_argument("--cut", required=True, help="bipartition such as A|BC")
    s.set_defaults(func=cmd_schmidt)

    s = sub.add_parser("gsd", parents=[common, report], help="n-party Schmidt decomposition")
    s.add_argument("file")
    s.add_argument("--retries", type=int, default=3)
    s.set_defaults(func=cmd_gsd)

    s = sub.add_parser("ppt", parents=[common, report], help="partial-transpose spectrum on every bipartition")
    s.add_argument("file")
    s.add_argument("--drop", help="parties to trace out first, e.g. C or AB")
    s.set_defaults(func=cmd_ppt)

    s = sub.add_parser("classify", parents=[common, seesaw, report], help="separability verdict for every bipartition")
    s.add_argument("file")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("triangle", parents=[common, seesaw, report], help="classify the three two-party marginals")
    s.add_argument("file")
    s.set_defaults(func=cmd_triangle)

    s = sub.add_parser("purify", parents=[common], help="write the canonical purification")
    s.add_argument("file")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_purify)

    s = sub.add_parser("steer", parents=[common], help="isometry steering a purification onto an ensemble")
    s.add_argument("psi")
    s.add_argument("ensemble")
    s.add_argument("--purifier", help="purifying party (default: last)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_steer)

    s = sub.add_parser("proofcheck", parents=[common, report], help="pairwise partial-transpose certificate")
    s.add_argument("psi")
    s.add_argument("--ensemble", help="product ensemble for the marginal of all parties but A")
    s.set_defaults(func=cmd_proofcheck)

    s = sub.add_parser("report", parents=[common, seesaw], help="run every applicable analysis")
    s.add_argument("file")
    s.add_argument("--json", metavar="OUT", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except _Finding as exc:
        print(f"multisep: finding: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except (InvariantFailure, BranchViolation) as exc:
        print(f"multisep: invariant violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FINDING
    except FileNotFoundError as exc:
        print(f"multisep: error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (MultisepError, OSError) as exc:
        print(f"multisep: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI on ``argv`` and return the exit code instead of exiting."""
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
