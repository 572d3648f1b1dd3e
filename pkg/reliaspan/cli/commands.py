"""
ReliaSpan - Command-Line Interface

Exit codes: 0 success, 2 invalid input, 3 verifier defect.
"""
import argparse
import sys
from typing import List, Optional, Union

import numpy as np

from reliaspan.analysis.loss import loss_report
from reliaspan.analysis.resilience1d import bad_mask, check_monotone_path, damaged_pairs_1d, monotone_path
from reliaspan.analysis.shadow import classify_rounds, compute_shadow, to_frame
from reliaspan.attacks.generators import Attack, AttackKind, generate
from reliaspan.construction.gradation import build_gradation, gradation_from_levels
from reliaspan.construction.spanner1d import Spanner1D, build_1d, derive_params, edge_count
from reliaspan.core.exceptions import InvalidInputError, SerializationError, UndefinedLossError, VerifierDefectError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import CONSTRUCTION, derive_seed, fresh_seed, rng
from reliaspan.geometry.lso import (
    OrderingFamily,
    build_orderings,
    identity_family,
    lso_constant_bound,
    verify_lso_property,
)
from reliaspan.geometry.spannerhd import (
    SpannerHD,
    bad_sequence,
    build_hd,
    damaged_pairs_hd,
    edge_count_hd,
    path_hd,
)
from reliaspan.harness.engine import loss_curve, run_trials
from reliaspan.schemas import (
    AttackDocument,
    ExperimentSpec,
    FamilyDocument,
    LossReportSchema,
    NormalizationDocument,
    PathResponse,
    Spanner1DDocument,
    SpannerHDDocument,
    dump_document,
    load_document,
    load_spanner_document,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEFECT = 3

AnySpanner = Union[Spanner1D, SpannerHD]


def _emit(text: str, path: Optional[str] = None):
    if path is None:
        print(text)


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    seed = fresh_seed()
    app_logger.info(f"No --seed given, using {seed}")
    print(f"seed: {seed}")
    return seed


# ==================== Documents ====================

def spanner_document(s: AnySpanner) -> Union[Spanner1DDocument, SpannerHDDocument]:
    if isinstance(s, Spanner1D):
        p = s.params
        return Spanner1DDocument(
            n=p.n,
            seed=s.gradation.seed,
            rho=p.rho,
            delta=p.delta,
            c_const=p.c_const,
            eps_step=p.eps_step,
            M=p.M,
            level_of=s.gradation.level_of.tolist(),
        )
    return SpannerHDDocument(
        points=s.points.tolist(),
        eps=s.params.eps,
        rho=s.params.rho,
        delta=s.params.delta,
        c_const=s.params.copy_params.c_const,
        seed=s.seed,
        family=FamilyDocument(varsigma=s.family.varsigma, d=s.family.d, w=s.family.w, identity=s.family.identity),
        normalization=NormalizationDocument(**s.normalization.to_dict()),
        N=s.params.N,
        M=s.params.M,
    )


def load_spanner(path: str) -> AnySpanner:
    """Rebuild a spanner from its document"""
    doc = load_spanner_document(path)
    if isinstance(doc, SpannerHDDocument):
        family = OrderingFamily(
            varsigma=doc.family.varsigma, d=doc.family.d, w=doc.family.w, identity=doc.family.identity
        )
        s = build_hd(doc.points, doc.eps, doc.rho, doc.delta, doc.c_const, doc.seed, family=family)
        if s.params.N != doc.N or s.params.M != doc.M:
            raise SerializationError(path, "stored N/M do not match the rebuilt parameters")
        return s
    params = derive_params(doc.n, doc.rho, doc.delta, doc.c_const)
    if params.M != doc.M:
        raise SerializationError(path, f"stored M={doc.M} but parameters give M={params.M}")
    return build_1d(gradation_from_levels(doc.n, doc.seed, doc.level_of), params)


def load_attack(path: Optional[str], n: int) -> Attack:
    if path is None:
        return generate("custom", n, vertices=[])
    doc = load_document(AttackDocument, path)
    if doc.n != n:
        raise InvalidInputError(f"attack is over n={doc.n}, spanner over n={n}")
    return Attack(
        kind=AttackKind(doc.kind),
        n=doc.n,
        seed=doc.seed,
        vertices=tuple(sorted(set(doc.vertices))),
        oblivious=doc.kind != AttackKind.REMARK_MIDDLE.value,
    )


def read_points(path: str) -> np.ndarray:
    """Plain text, one point per line, whitespace-separated coordinates"""
    try:
        return np.loadtxt(path, dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise SerializationError(path, str(e)) from e


# ==================== Commands ====================

def cmd_build(args: argparse.Namespace) -> int:
    seed = _seed(args)
    if args.points_file or args.eps is not None:
        if args.eps is None:
            raise InvalidInputError("point sets need --eps")
        if args.points_file:
            points = read_points(args.points_file)
        else:
            if args.n is None:
                raise InvalidInputError("give --n or --points-file")
            points = rng(derive_seed("points", seed, args.n, args.dim)).random((args.n, args.dim))
        family = identity_family() if args.family == "identity" else None
        if family is not None and points.shape[1] != 1:
            raise InvalidInputError("the identity family is one-dimensional")
        s: AnySpanner = build_hd(points, args.eps, args.rho, args.delta, args.c_const, seed, family=family)
        count = edge_count_hd(s)
        summary = f"n={s.n} d={s.family.d} M={s.params.M} N={s.params.N} edges={count.total} bound={count.bound:.6g}"
    else:
        if args.n is None:
            raise InvalidInputError("give --n or --points-file")
        params = derive_params(args.n, args.rho, args.delta, args.c_const)
        s = build_1d(build_gradation(args.n, derive_seed(CONSTRUCTION, seed)), params)
        count1 = edge_count(s)
        summary = f"n={s.n} M={s.M} eps_step={params.eps_step:.6g} edges={count1.total}"

    text = dump_document(spanner_document(s), args.out)
    _emit(text, args.out)
    if args.out:
        print(summary)
    return EXIT_OK


def cmd_attack(args: argparse.Namespace) -> int:
    spanner = load_spanner(args.spanner) if args.spanner else None
    n = spanner.n if spanner is not None else args.n
    if n is None:
        raise InvalidInputError("give --n or --spanner")
    if args.kind == AttackKind.REMARK_MIDDLE.value and not isinstance(spanner, Spanner1D):
        raise InvalidInputError("remark-middle attack needs --spanner with a 1-D spanner")
    vertices = [int(v) for v in args.vertices.split(",") if v] if args.vertices is not None else None
    seed = args.seed
    if seed is None and args.kind not in (AttackKind.CUSTOM.value, AttackKind.REMARK_MIDDLE.value):
        seed = _seed(args)
    attack = generate(
        args.kind, n, size=args.size, fraction=args.fraction, seed=seed,
        spanner=spanner if isinstance(spanner, Spanner1D) else None, blocks=args.blocks, vertices=vertices,
    )
    if not attack.oblivious:
        app_logger.warning("non-oblivious attack: reliability guarantees do not apply")
    doc = AttackDocument(kind=attack.kind.value, n=attack.n, seed=attack.seed, vertices=list(attack.vertices))
    _emit(dump_document(doc, args.out), args.out)

    if args.shadow_csv:
        profile = compute_shadow(attack.vertices, args.alpha, n)
        rounds = classify_rounds(attack.vertices, args.alpha, n)
        to_frame(profile, rounds).to_csv(args.shadow_csv, index=False)
        app_logger.info(f"Wrote shadow table to {args.shadow_csv}")
    return EXIT_OK


def _pair_defects(pairs, good_mask: np.ndarray) -> int:
    good = good_mask[pairs.survivors - 1]
    return int(np.triu(pairs.matrix & np.outer(good, good), 1).sum())


def cmd_loss(args: argparse.Namespace) -> int:
    s = load_spanner(args.spanner)
    attack = load_attack(args.attack, s.n)
    if attack.size == 0:
        raise UndefinedLossError("loss undefined for empty attack")
    if not attack.oblivious:
        app_logger.warning("non-oblivious attack: reliability guarantees do not apply")
        print("warning: non-oblivious attack", file=sys.stderr)
    blocked = attack.mask()
    if isinstance(s, Spanner1D):
        pairs = damaged_pairs_1d(s, blocked)
        bad = bad_mask(s, blocked)
        variant = s.params.variant
    else:
        pairs = damaged_pairs_hd(s, blocked)
        bad = bad_sequence(s, blocked)[-1]
        variant = s.params.variant
    report = loss_report(pairs, attack.size, variant, int(bad.sum()) - attack.size)
    doc = LossReportSchema(**report.to_dict(), oblivious=attack.oblivious)
    _emit(dump_document(doc, args.out), args.out)

    defects = _pair_defects(pairs, ~bad)
    if defects:
        app_logger.warning(f"{defects} damaged pair(s) between good points")
        return EXIT_DEFECT
    return EXIT_OK


def cmd_path(args: argparse.Namespace) -> int:
    s = load_spanner(args.spanner)
    attack = load_attack(args.attack, s.n)
    blocked = attack.mask()
    if isinstance(s, Spanner1D):
        path = monotone_path(s, blocked, args.u, args.v)
        distance = float(abs(args.v - args.u))
        defects: List[str] = check_monotone_path(s, blocked, path) if path else []
        length = None if path is None else float(path[-1] - path[0])
        response = PathResponse(
            u=args.u, v=args.v, path=path, length=length, distance=distance,
            stretch=None if length is None else length / distance, defects=defects,
        )
    else:
        result = path_hd(s, blocked, args.u, args.v)
        distance = s.distance(args.u, args.v)
        if result is None:
            response = PathResponse(u=args.u, v=args.v, distance=distance)
        else:
            defects = list(result.defects)
            if result.stretch > (1 + s.params.eps) * (1 + 1e-9):
                defects.append(f"stretch {result.stretch:.6g} exceeds 1+eps")
            response = PathResponse(
                u=args.u, v=args.v, path=list(result.vertices), length=result.length,
                distance=distance, stretch=result.stretch, defects=defects,
            )
    print(dump_document(response))
    return EXIT_DEFECT if response.defects else EXIT_OK


def cmd_lso_check(args: argparse.Namespace) -> int:
    family = build_orderings(args.varsigma, args.dim)
    gen = rng(derive_seed("lso-check", args.seed, args.dim))
    top = 1 << family.w
    failures = 0
    for _ in range(args.pairs):
        p = gen.integers(0, top, size=args.dim)
        q = gen.integers(0, top, size=args.dim)
        if np.array_equal(p, q):
            continue
        if verify_lso_property(family, p, q) is None:
            failures += 1
    print(
        f"orderings={family.count} c_lso={family.c_lso:.6g} bound={lso_constant_bound(args.dim):.6g} "
        f"pairs={args.pairs} failures={failures}"
    )
    return EXIT_DEFECT if failures else EXIT_OK


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise InvalidInputError(f"expected comma-separated numbers, got {text!r}") from e


def cmd_experiment(args: argparse.Namespace) -> int:
    spec = load_document(ExperimentSpec, args.spec)
    if args.c_values:
        curve = loss_curve(spec, _float_list(args.c_values), args.out)
        if not args.out:
            print(curve.to_csv(index=False), end="")
        return EXIT_DEFECT if curve["defect_count"].sum() else EXIT_OK
    summary = run_trials(spec)
    print(dump_document(summary.to_schema()))
    return EXIT_DEFECT if summary.defect_count else EXIT_OK


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reliaspan", description="Reliable spanners under oblivious attacks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="Build a 1-D or d-dimensional spanner")
    p.add_argument("--n", type=int, help="Number of vertices (1-D) or random points")
    p.add_argument("--points-file", type=str, help="Points, one per line")
    p.add_argument("--rho", type=float, required=True, help="Reliability target")
    p.add_argument("--delta", type=float, help="Failure probability (probabilistic variant)")
    p.add_argument("--eps", type=float, help="Stretch slack (d-dimensional)")
    p.add_argument("--dim", type=int, default=2, help="Dimension of random points")
    p.add_argument("--family", choices=["quadtree", "identity"], default="quadtree", help="Ordering family")
    p.add_argument("--c-const", type=float, help="Constant c of the construction")
    p.add_argument("--seed", type=int, help="Construction seed")
    p.add_argument("--out", type=str, help="Output JSON path")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("attack", help="Generate an attack")
    p.add_argument("--kind", choices=[k.value for k in AttackKind], required=True)
    p.add_argument("--n", type=int, help="Number of vertices")
    p.add_argument("--size", type=int, help="Attack size")
    p.add_argument("--fraction", type=float, help="Attacked fraction")
    p.add_argument("--blocks", type=int, default=2, help="Runs of a multiblock attack")
    p.add_argument("--vertices", type=str, help="Comma-separated vertices of a custom attack")
    p.add_argument("--spanner", type=str, help="Spanner JSON (required for remark-middle)")
    p.add_argument("--seed", type=int, help="Attack seed")
    p.add_argument("--out", type=str, help="Output JSON path")
    p.add_argument("--shadow-csv", type=str, help="Write the per-vertex shadow table here")
    p.add_argument("--alpha", type=float, default=0.5, help="Shadow threshold for --shadow-csv")
    p.set_defaults(handler=cmd_attack)

    p = sub.add_parser("loss", help="Loss report of a spanner under an attack")
    p.add_argument("--spanner", type=str, required=True)
    p.add_argument("--attack", type=str, required=True)
    p.add_argument("--out", type=str)
    p.set_defaults(handler=cmd_loss)

    p = sub.add_parser("path", help="Path between two surviving vertices")
    p.add_argument("--spanner", type=str, required=True)
    p.add_argument("--attack", type=str)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.set_defaults(handler=cmd_path)

    p = sub.add_parser("lso-check", help="Check the locality-sensitive property on random pairs")
    p.add_argument("--varsigma", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_lso_check)

    p = sub.add_parser("experiment", help="Run a Monte Carlo experiment")
    p.add_argument("--spec", type=str, required=True, help="ExperimentSpec JSON")
    p.add_argument("--c-values", type=str, help="Comma-separated constants c; runs the experiment once per c")
    p.add_argument("--out", type=str, help="CSV path for the c curve")
    p.set_defaults(handler=cmd_experiment)
    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the command and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID
    try:
        return args.handler(args)
    except VerifierDefectError as e:
        app_logger.error(f"Verifier defect: {e}")
        print(f"defect: {e}", file=sys.stderr)
        return EXIT_DEFECT
    except InvalidInputError as e:
        app_logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
