"""Command-line interface.

Exit codes follow a fixed protocol so CI suites can assert theorems
directly: 0 when the requested computation or check passes, 2 when a
check finds a violation (the witness is printed), 1 on I/O or format
errors, 3 when a size cap refuses the work before it starts.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from itertools import combinations

from . import bitset
from .clustering import (
    Dendrogram,
    Linkage,
    block_tangle_correspondence,
    connectivity_from_dendrogram,
    dendrogram_from_connectivity,
    dendrogram_to_ultrametric,
    linkage_eval,
    minimax_ultrametric,
    single_linkage,
    ultrametric_to_dendrogram,
    validate_dendrogram,
)
from .connectivity import (
    AverageLinkageConnectivity,
    CompleteLinkageConnectivity,
    SingleLinkageConnectivity,
    TabulatedConnectivity,
    VertexConnectivity,
    check_axioms,
    find_violation,
    tabulate,
)
from .decomposition import (
    PreDecomposition,
    exactness_transform,
    to_dot,
    validate_pre_decomposition,
    verify_duality,
    width,
)
from .errors import CapExceededError, InputFormatError, NotMaxSubmodularError
from .metric import (
    DistanceMatrix,
    PointCloud,
    Ultrametric,
    distance_matrix_from_points,
    parse_matrix_csv,
    ultrametric_check,
    validate_metric,
)
from .tangles import TangleDescriptor, enumerate_tangles, verify_tangle

PASS, ERROR, VIOLATION, CAP = 0, 1, 2, 3

FUNCTION_NAMES = ("mind", "kappa-dist", "phi-dist", "nu", "tabulated")
METRIC_FORMATS = ("points", "matrix")
ALL_FORMATS = ("points", "matrix", "dendogram", "dendrogram", "tabulated", "graph")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_matrix(args) -> DistanceMatrix:
    fmt = args.format
    text = _read(args.input)
    if fmt == "points":
        return distance_matrix_from_points(PointCloud.from_csv(text))
    if fmt == "matrix":
        return DistanceMatrix.from_csv(text)
    raise InputFormatError(f"subcommand needs a metric input, not format {fmt!r}")


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON in {path}: {exc}") from None


def _load_function(args):
    """Resolve --format plus --function into a connectivity function."""
    fmt = args.format
    name = getattr(args, "function", None) or "mind"
    if fmt == "tabulated" or name == "tabulated":
        if fmt != "tabulated":
            raise InputFormatError("--function tabulated needs --format tabulated")
        return TabulatedConnectivity.from_json_dict(_load_json(args.input))
    if fmt == "graph" or name == "nu":
        if fmt != "graph":
            raise InputFormatError("--function nu needs --format graph")
        data = _load_json(args.input)
        try:
            edges = [tuple(e) for e in data["edges"]]
        except (KeyError, TypeError):
            raise InputFormatError("graph JSON needs an 'edges' list") from None
        weights = data.get("weights", {})
        return VertexConnectivity(edges, weights)
    matrix = _load_matrix(args)
    if name == "mind":
        return SingleLinkageConnectivity(matrix)
    if name == "kappa-dist":
        return CompleteLinkageConnectivity(matrix)
    if name == "phi-dist":
        return AverageLinkageConnectivity(matrix)
    raise InputFormatError(f"unknown function {name!r}")


def _check_max_n(args, n: int) -> None:
    if args.max_n is not None and n > args.max_n:
        raise CapExceededError("--max-n", n, args.max_n)


def _fmt_set(mask: int, labels) -> str:
    return "{" + ",".join(bitset.labels_of(mask, labels)) + "}"


def _resolve_radius(args) -> float:
    # the radius is the exact axis and wins when both are given
    if args.radius is not None:
        return args.radius
    if args.order is not None:
        if args.order <= 0:
            raise InputFormatError("--order must be positive")
        return -math.log(args.order)
    raise InputFormatError("provide --radius or --order")


# -- subcommand handlers -----------------------------------------------


def cmd_cluster(args) -> int:
    m = _load_matrix(args)
    _check_max_n(args, m.n)
    d = single_linkage(m, tie_eps=args.tie_eps)
    if args.out_format == "newick":
        _write(args.output, d.to_newick() + "\n")
    else:
        _write(args.output, _json_text(d.to_json_dict()))
    return PASS


def cmd_ultrametric(args) -> int:
    m = _load_matrix(args)
    _check_max_n(args, m.n)
    _write(args.output, minimax_ultrametric(m).to_csv())
    return PASS


def cmd_tangles(args) -> int:
    f = _load_function(args)
    _check_max_n(args, f.n)
    catalog = enumerate_tangles(f)
    _write(args.output, _json_text(catalog.to_json_dict()))
    return PASS


def cmd_branch_width(args) -> int:
    f = _load_function(args)
    _check_max_n(args, f.n)
    from .decomposition import branch_width_exact, width_radius

    bw, witness = branch_width_exact(f)
    print(f"branch width = {bw!r} (radius {width_radius(witness, f)!r})")
    _write(args.output, to_dot(witness, f))
    return PASS


def cmd_exactify(args) -> int:
    pd = PreDecomposition.from_json_dict(_load_json(args.input))
    _check_max_n(args, pd.n)
    metric_args = argparse.Namespace(input=args.metric, format=args.metric_format,
                                     function=args.function)
    f = _load_function(metric_args)
    if f.n != pd.n or f.labels != pd.labels:
        raise InputFormatError("function universe does not match the pre-decomposition")
    out = exactness_transform(pd, f)
    if args.out_format == "json":
        _write(args.output, _json_text(out.to_json_dict()))
    else:
        _write(args.output, to_dot(out, f))
    return PASS


def cmd_convert(args) -> int:
    if args.format in ("dendogram", "dendrogram"):
        d = Dendrogram.from_json_dict(_load_json(args.input))
        _check_max_n(args, d.n)
        _write(args.output, dendrogram_to_ultrametric(d).to_csv())
        return PASS
    if args.format == "matrix":
        u = Ultrametric.from_csv(_read(args.input))
        _check_max_n(args, u.n)
        _write(args.output, _json_text(ultrametric_to_dendrogram(u).to_json_dict()))
        return PASS
    raise InputFormatError("convert accepts --format dendogram or matrix")


def cmd_kappa(args) -> int:
    if args.format in ("dendogram", "dendrogram"):
        d = Dendrogram.from_json_dict(_load_json(args.input))
        _check_max_n(args, d.n)
        f = tabulate(connectivity_from_dendrogram(d))
        _write(args.output, _json_text(f.to_json_dict()))
        return PASS
    if args.format == "tabulated":
        f = TabulatedConnectivity.from_json_dict(_load_json(args.input))
        _check_max_n(args, f.n)
        d = dendrogram_from_connectivity(f)
        _write(args.output, _json_text(d.to_json_dict()))
        return PASS
    raise InputFormatError("kappa accepts --format dendogram or tabulated")


# -- check suite --------------------------------------------------------


def _random_grid_metric(rng: random.Random, n: int) -> DistanceMatrix:
    points: set[tuple[int, int]] = set()
    while len(points) < n:
        points.add((rng.randint(0, 12), rng.randint(0, 12)))
    ordered = sorted(points)
    cloud = PointCloud(tuple(f"p{i}" for i in range(n)),
                       tuple((float(x), float(y)) for x, y in ordered))
    return distance_matrix_from_points(cloud)


def _random_inputs(args):
    rng = random.Random(args.seed)
    sizes = [4, 5, 6, 7]
    for i in range(args.random):
        yield _random_grid_metric(rng, sizes[i % len(sizes)])


def check_metric(args) -> int:
    if args.format == "points":
        distance_matrix_from_points(PointCloud.from_csv(_read(args.input)))
        print("valid metric")
        return PASS
    labels, rows = parse_matrix_csv(_read(args.input))
    report = validate_metric(labels, rows)
    if report.ok:
        print("valid metric")
        return PASS
    print(report.describe(labels))
    return VIOLATION


def check_ultrametric(args) -> int:
    m = _load_matrix(args)
    witness = ultrametric_check(m)
    if witness is None:
        print("valid ultrametric")
        return PASS
    x, mid, z = witness
    print(f"strong triangle violated at ({m.labels[x]},{m.labels[mid]},{m.labels[z]}): "
          f"max({m.rows[x][mid]!r}, {m.rows[mid][z]!r}) < {m.rows[x][z]!r}")
    return VIOLATION


def check_axioms_cmd(args) -> int:
    f = _load_function(args)
    _check_max_n(args, f.n)
    report = check_axioms(f)
    if report.ok:
        print("normalized and symmetric")
        return PASS
    for v in report.violations:
        print(f"{v.axiom} violated at {_fmt_set(v.mask, f.labels)}: {v.values}")
    return VIOLATION


def _check_property(args, prop: str) -> int:
    if args.input is None and args.random:
        for i, m in enumerate(_random_inputs(args)):
            f = SingleLinkageConnectivity(m)
            witness = find_violation(prop, f)
            if witness is not None:
                x, y = witness
                print(f"instance {i}: violation at X={_fmt_set(x, f.labels)} "
                      f"Y={_fmt_set(y, f.labels)}")
                return VIOLATION
        print(f"{prop} holds on {args.random} random instances (seed {args.seed})")
        return PASS
    f = _load_function(args)
    _check_max_n(args, f.n)
    witness = find_violation(prop, f)
    if witness is None:
        print(f"{prop}: no violation")
        return PASS
    x, y = witness
    vx, vy = f.value(x), f.value(y)
    vi, vu = f.value(x & y), f.value(x | y)
    print(f"{prop} violated: X={_fmt_set(x, f.labels)} Y={_fmt_set(y, f.labels)} "
          f"f(X)={vx!r} f(Y)={vy!r} f(X&Y)={vi!r} f(X|Y)={vu!r}")
    return VIOLATION


def check_tangle(args) -> int:
    f = _load_function(args)
    _check_max_n(args, f.n)
    if not args.core:
        raise InputFormatError("check tangle needs --core with comma-separated labels")
    core = bitset.mask_from_labels(args.core.split(","), f.labels)
    radius = _resolve_radius(args)
    report = verify_tangle(f, TangleDescriptor(f.n, radius, core))
    if report.ok:
        print(f"tangle of order {math.exp(-radius)!r} (radius {radius!r}), "
              f"family size {report.family_size}")
        return PASS
    print(f"not a tangle; violated axioms: {', '.join(report.violated_axioms())}")
    if report.t1_witness is not None:
        print(f"  T.1 witness: {_fmt_set(report.t1_witness, f.labels)}")
    if report.t2_witness is not None:
        parts = ", ".join(_fmt_set(m, f.labels) for m in report.t2_witness)
        print(f"  T.2 witness: {parts}")
    if report.t3_witness is not None:
        print(f"  T.3 witness: {_fmt_set(report.t3_witness, f.labels)}")
    return VIOLATION


def check_duality(args) -> int:
    if args.input is None and args.random:
        for i, m in enumerate(_random_inputs(args)):
            report = verify_duality(SingleLinkageConnectivity(m))
            if not report.equal:
                print(f"instance {i}: {report.describe()}")
                return VIOLATION
        print(f"duality holds on {args.random} random instances (seed {args.seed})")
        return PASS
    f = _load_function(args)
    _check_max_n(args, f.n)
    report = verify_duality(f)
    print(report.describe())
    return PASS if report.equal else VIOLATION


def _equivalence_once(m: DistanceMatrix) -> str | None:
    f = SingleLinkageConnectivity(m)
    try:
        d = dendrogram_from_connectivity(f)
    except NotMaxSubmodularError as exc:
        return str(exc)
    u = dendrogram_to_ultrametric(d)
    g = SingleLinkageConnectivity(u)
    for mask in bitset.subsets(f.n):
        a, b = f.value(mask), g.value(mask)
        if a != b and (a == 0 or abs(a - b) > 1e-12 * abs(a)):
            return (f"mind over the recovered ultrametric differs at mask {mask:#x}: "
                    f"{a!r} vs {b!r}")
    if dendrogram_from_connectivity(connectivity_from_dendrogram(d)) != d:
        return "dendrogram round-trip through its connectivity function failed"
    return None


def check_equivalence(args) -> int:
    if args.input is None and args.random:
        for i, m in enumerate(_random_inputs(args)):
            failure = _equivalence_once(m)
            if failure:
                print(f"instance {i}: {failure}")
                return VIOLATION
        print(f"equivalence holds on {args.random} random instances (seed {args.seed})")
        return PASS
    m = _load_matrix(args)
    _check_max_n(args, m.n)
    failure = _equivalence_once(m)
    if failure:
        print(failure)
        return VIOLATION
    print("equivalence verified: ultrametric recovered, function reproduced, round-trip exact")
    return PASS


def _partitions(n: int):
    # restricted growth strings
    def rec(i, blocks):
        if i == n:
            yield [bitset.mask_of(b) for b in blocks]
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def check_remark(args) -> int:
    m = _load_matrix(args)
    _check_max_n(args, m.n)
    if m.n > 8:
        raise CapExceededError("check remark (all-partitions sweep)", m.n, 8)
    f_single = SingleLinkageConnectivity(m)
    f_complete = CompleteLinkageConnectivity(m)
    f_average = AverageLinkageConnectivity(m)
    full = bitset.full_mask(m.n)
    cl_mismatch = None
    for part in _partitions(m.n):
        if len(part) < 2:
            continue
        pair_min_sl = min(linkage_eval(Linkage.SINGLE, m, a, b)
                          for a, b in combinations(part, 2))
        for block in part:
            # single linkage: the nearest other block realizes the complement gap
            direct = f_single.cost(block)
            via_blocks = min(linkage_eval(Linkage.SINGLE, m, block, other)
                             for other in part if other != block)
            if direct != via_blocks:
                print(f"single-linkage identity fails for block "
                      f"{_fmt_set(block, m.labels)}: {direct!r} != {via_blocks!r}")
                return VIOLATION
            # average linkage: complement gap is the size-weighted block mean
            others = [o for o in part if o != block]
            weighted = sum(bitset.size(o) * linkage_eval(Linkage.AVERAGE, m, block, o)
                           for o in others)
            total = sum(bitset.size(o) for o in others)
            agg = weighted / total
            direct_avg = linkage_eval(Linkage.AVERAGE, m, block, block ^ full)
            if not math.isclose(agg, direct_avg, rel_tol=1e-12, abs_tol=0.0):
                print(f"average-linkage aggregation fails for block "
                      f"{_fmt_set(block, m.labels)}: {direct_avg!r} != {agg!r}")
                return VIOLATION
        if min(f_single.cost(b) for b in part) != pair_min_sl:
            print("single-linkage partition minimum identity fails")
            return VIOLATION
        if cl_mismatch is None:
            pair_min_cl = min(linkage_eval(Linkage.COMPLETE, m, a, b)
                              for a, b in combinations(part, 2))
            if pair_min_cl != min(f_complete.cost(b) for b in part):
                cl_mismatch = part
    print("single-linkage partition identity holds on all partitions")
    print("average-linkage aggregation identity holds on all partitions")
    if cl_mismatch is not None:
        blocks = " ".join(_fmt_set(b, m.labels) for b in cl_mismatch)
        print(f"complete-linkage mismatch partition found: {blocks}")
    else:
        print("no complete-linkage mismatch partition on this instance")
    for prop in ("submodular", "max-submodular"):
        witness = find_violation(prop, f_average)
        if witness is not None:
            x, y = witness
            print(f"averaged similarity violates {prop} at "
                  f"X={_fmt_set(x, m.labels)} Y={_fmt_set(y, m.labels)}")
        else:
            print(f"averaged similarity: no {prop} violation on this instance")
    return PASS


CHECKS = {
    "metric": check_metric,
    "ultrametric": check_ultrametric,
    "axioms": check_axioms_cmd,
    "submodular": lambda args: _check_property(args, "submodular"),
    "max-submodular": lambda args: _check_property(args, "max-submodular"),
    "tangle": check_tangle,
    "duality": check_duality,
    "equivalence": check_equivalence,
    "remark": check_remark,
}


def cmd_check(args) -> int:
    return CHECKS[args.what](args)


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tanglekit",
        description="Tangles, branch decompositions and single-linkage clustering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, formats=METRIC_FORMATS, output=True):
        p.add_argument("--input", help="input file")
        p.add_argument("--format", choices=formats, default=formats[0],
                       help="input format (default %(default)s)")
        if output:
            p.add_argument("--output", help="output file (default stdout)")
        p.add_argument("--max-n", type=int, default=None,
                       help="refuse inputs with more than this many points")

    p = sub.add_parser("cluster", help="single-linkage dendrogram")
    add_common(p)
    p.add_argument("--out-format", choices=("json", "newick"), default="json")
    p.add_argument("--tie-eps", type=float, default=0.0,
                   help="group merge distances within this tolerance (default exact)")
    p.set_defaults(handler=cmd_cluster)

    p = sub.add_parser("ultrametric", help="minimax (bottleneck) ultrametric CSV")
    add_common(p)
    p.set_defaults(handler=cmd_ultrametric)

    p = sub.add_parser("tangles", help="tangle catalog JSON")
    add_common(p, formats=("points", "matrix", "tabulated", "graph"))
    p.add_argument("--function", choices=FUNCTION_NAMES, default="mind")
    p.set_defaults(handler=cmd_tangles)

    p = sub.add_parser("branch-width", help="exact branch width with witness DOT")
    add_common(p, formats=("points", "matrix", "tabulated", "graph"))
    p.add_argument("--function", choices=FUNCTION_NAMES, default="mind")
    p.set_defaults(handler=cmd_branch_width)

    p = sub.add_parser("exactify",
                       help="pre-decomposition JSON to decomposition DOT/JSON")
    p.add_argument("--input", required=True, help="pre-decomposition JSON")
    p.add_argument("--metric", required=True, help="metric or tabulated function file")
    p.add_argument("--metric-format", choices=("points", "matrix", "tabulated"),
                   default="points")
    p.add_argument("--function", choices=FUNCTION_NAMES, default="mind")
    p.add_argument("--output", help="output file (default stdout)")
    p.add_argument("--out-format", choices=("dot", "json"), default="dot")
    p.add_argument("--max-n", type=int, default=None)
    p.set_defaults(handler=cmd_exactify)

    p = sub.add_parser("convert", help="dendrogram JSON <-> ultrametric CSV")
    add_common(p, formats=("dendogram", "dendrogram", "matrix"))
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("kappa",
                       help="dendrogram JSON <-> tabulated connectivity JSON")
    add_common(p, formats=("dendogram", "dendrogram", "tabulated"))
    p.set_defaults(handler=cmd_kappa)

    p = sub.add_parser("check", help="verify a property; exit 2 on violation")
    p.add_argument("what", choices=sorted(CHECKS))
    p.add_argument("--input", help="input file (some checks accept --random instead)")
    p.add_argument("--format", choices=ALL_FORMATS, default="points")
    p.add_argument("--function", choices=FUNCTION_NAMES, default="mind")
    p.add_argument("--core", help="comma-separated core labels (check tangle)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--order", type=float, help="order threshold k on the value axis")
    group.add_argument("--radius", type=float,
                       help="threshold on the distance axis (exact; wins over --order)")
    p.add_argument("--tie-eps", type=float, default=0.0)
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--random", type=int, default=0,
                   help="run on this many seeded random metrics instead of --input")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.set_defaults(handler=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CapExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return CAP
    except NotMaxSubmodularError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return VIOLATION
    except (InputFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
