"""``dyckfold`` command line: sampling, counting, the bijection, benchmarks, limit law."""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from fractions import Fraction
from typing import Callable, TextIO

import numpy as np

from . import enumeration as en
from .bijection import fold, unfold
from .bitstream import BernoulliGen, CountedBitSource, ddg_leaf_mass, fdr_leaf_mass
from .core_paths import DecoratedPrefix, Path, PathError, PointedLuka, num_decorations, parse_decoration
from .sampler import run_cost_experiment, sample_mdyck, sample_mluka

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GOLDEN_PREFIX = "UUUDUUUUUUUUDUUUUUUUDU"
GOLDEN_DECORATION = (1, 3, 2)
GOLDEN_IMAGE = ("UUUDUUUUUUUDDUUDUUUDUD", 9)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit; route through main's exit codes
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x: float, digits: int) -> str:
    return f"{x:.{digits}g}"


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _m_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=_positive, required=True)


def cmd_count(a, out: TextIO) -> int:
    m, n = a.m, a.n
    parts = [f"L_n={en.luka_count(m, n)}", f"P_n(m)={en.prefix_weighted_count(m, n)}"]
    if n % (m + 1) == 0:
        parts.append(f"FC={en.fuss_catalan(m, n // (m + 1))}")
    print(" ".join(parts), file=out)
    return EXIT_OK


def cmd_fold(a, out: TextIO) -> int:
    w = DecoratedPrefix(Path.parse(a.path, a.m), parse_decoration(a.decoration))
    v = fold(w)
    print(f"{v.path} {v.point}", file=out)
    return EXIT_OK


def cmd_unfold(a, out: TextIO) -> int:
    w = unfold(PointedLuka(Path.parse(a.path, a.m), a.point))
    print(f"{w.path} {','.join(map(str, w.decoration))}", file=out)
    return EXIT_OK


def cmd_sample(a, out: TextIO) -> int:
    src = CountedBitSource(a.seed)
    gen = BernoulliGen(a.m, a.grouping)
    draw = sample_mdyck if a.dyck else sample_mluka
    for _ in range(a.count):
        rep = draw(a.m, a.n, src, gen)
        if a.stats:
            n_steps = a.n + 1 if a.dyck else a.n
            rec = {
                "path": str(rep.path),
                "bits": rep.bits_consumed,
                "bits_per_step": round(rep.bits_consumed / n_steps, a.digits),
                "accesses": rep.memory_accesses,
                "unfolds": [{"i": i, "point": pt} for i, pt in rep.unfold_events],
            }
            print(json.dumps(rec), file=out)
        else:
            print(rep.path, file=out)
    return EXIT_OK


def cmd_bench(a, out: TextIO) -> int:
    src = CountedBitSource(a.seed)
    gen = BernoulliGen(a.m, a.grouping)
    print("n\tmean_R/n\tmean_M/n\tvar_M/n^2", file=out)
    for n in a.ns:
        t = run_cost_experiment(a.m, n, a.samples, src, gen)
        cells = [str(n), _fmt(t.bits_stats.mean, a.digits), _fmt(t.access_stats.mean, a.digits)]
        cells.append(_fmt(t.access_stats.variance, a.digits))
        print("\t".join(cells), file=out)
    return EXIT_OK


def cmd_limitlaw(a, out: TextIO) -> int:
    from .limit_law import ks_distance, simulate_X, solve_F

    table = solve_F(a.xmax, a.dx)
    if a.simulate:
        xs = np.sort(simulate_X(a.seed, size=a.simulate))
        grid = np.arange(0.0, a.xmax + 1e-12, a.step)
        ecdf = np.searchsorted(xs, grid, side="right") / xs.size
        print("x\tecdf\tF", file=out)
        for x, e, f in zip(grid, ecdf, table.cdf(grid)):
            print(f"{_fmt(x, a.digits)}\t{_fmt(e, a.digits)}\t{_fmt(f, a.digits)}", file=out)
        print(f"# ks={_fmt(ks_distance(xs, table), a.digits)} samples={a.simulate}", file=out)
        return EXIT_OK
    text = table.to_tsv(a.step, a.digits)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def _check_counts(m: int, n: int) -> bool:
    bf = en.brute_force_counts(m, n)
    return bf["mluka"] == en.luka_count(m, n) and bf["weighted_prefix"] == en.prefix_weighted_count(m, n)


def _check_roundtrip(m: int, n: int) -> bool:
    for p in en.enumerate_all(m, n, "mdyck_prefix"):
        k = num_decorations(p)
        if k == 0:
            continue
        h_bar, r = (p.height - n % (m + 1)) // (m + 1), n % (m + 1)
        for dec in itertools.product(*([range(1, m + 1)] * h_bar + [range(1, r + 1)])):
            w = DecoratedPrefix(p, dec)
            if unfold(fold(w)) != w:
                return False
    for v in en.enumerate_all(m, n, "mluka"):
        for pt in range(1, n + 1):
            pv = PointedLuka(v, pt)
            if fold(unfold(pv)) != pv:
                return False
    return True


def _check_golden() -> bool:
    v = fold(DecoratedPrefix(Path.parse(GOLDEN_PREFIX, 3), GOLDEN_DECORATION))
    return (str(v.path), v.point) == GOLDEN_IMAGE


def _check_generators(m: int, depth: int = 48) -> bool:
    # every leaf mass is within the unresolved mass below its exact target
    gen = BernoulliGen(m)
    mass, left, bits = ddg_leaf_mass(gen, depth)
    for (c, _), q in mass.items():
        target = gen.class_probability(c)
        if not target - left <= q <= target:
            return False
    if bits > gen.group_entropy() + 2:
        return False
    for k in range(1, m + 2):
        fmass, fleft = fdr_leaf_mass(k, depth)
        if any(not Fraction(1, k) - fleft <= fmass.get(o, 0) <= Fraction(1, k) for o in range(1, k + 1)):
            return False
    return True


def cmd_verify(a, out: TextIO) -> int:
    ms = [a.m] if a.m else [1, 2, 3]
    checks: list[tuple[str, Callable[[], bool]]] = [("golden fold", _check_golden)]
    for m in ms:
        checks.append((f"generators m={m}", lambda m=m: _check_generators(m)))
        for n in range(1, a.max_n + 1):
            checks.append((f"counts m={m} n={n}", lambda m=m, n=n: _check_counts(m, n)))
        for n in range(1, min(a.max_n, a.max_roundtrip_n) + 1):
            checks.append((f"roundtrip m={m} n={n}", lambda m=m, n=n: _check_roundtrip(m, n)))
    failed = 0
    for name, fn in checks:
        ok = fn()
        failed += not ok
        if a.verbose or not ok:
            print(f"{'PASS' if ok else 'FAIL'} {name}", file=out)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=out)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--digits", type=_positive, default=12, help="significant digits for numeric output")
    p = _Parser(prog="dyckfold", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    s = add("count", "L_n, P_n(m) and the Fuss-Catalan number")
    _m_arg(s)
    s.add_argument("--n", type=_positive, required=True)
    s.set_defaults(fn=cmd_count)

    s = add("fold", "decorated m-Dyck prefix -> pointed m-Lukasiewicz path")
    _m_arg(s)
    s.add_argument("--path", required=True)
    s.add_argument("--decoration", required=True, help="comma separated a_0,...,a_h")
    s.set_defaults(fn=cmd_fold)

    s = add("unfold", "pointed m-Lukasiewicz path -> decorated m-Dyck prefix")
    _m_arg(s)
    s.add_argument("--path", required=True)
    s.add_argument("--point", type=_positive, required=True)
    s.set_defaults(fn=cmd_unfold)

    s = add("sample", "uniform random paths")
    _m_arg(s)
    s.add_argument("--n", type=_positive, required=True)
    s.add_argument("--count", type=_positive, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grouping", type=_positive, default=1)
    s.add_argument("--dyck", action="store_true", help="m-Dyck path instead of m-Lukasiewicz path")
    s.add_argument("--stats", action="store_true", help="one JSON record per sample")
    s.set_defaults(fn=cmd_sample)

    s = add("bench", "mean bit and memory costs per step")
    _m_arg(s)
    s.add_argument("--ns", type=lambda t: [int(v) for v in t.split(",")], default=[1001, 10001, 100001])
    s.add_argument("--samples", type=_positive, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--grouping", type=_positive, default=1)
    s.set_defaults(fn=cmd_bench)

    s = add("limitlaw", "distribution table of the limit variable X")
    s.add_argument("--xmax", type=float, default=8.0)
    s.add_argument("--dx", type=float, default=1e-4)
    s.add_argument("--step", type=float, default=0.01, help="spacing of emitted rows")
    s.add_argument("--out")
    s.add_argument("--simulate", type=_positive, metavar="N")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_limitlaw)

    s = add("verify", "exhaustive oracle and roundtrip checks")
    s.add_argument("--m", type=_positive)
    s.add_argument("--max-n", type=_positive, default=14)
    s.add_argument("--max-roundtrip-n", type=_positive, default=12)
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(fn=cmd_verify)
    return p


def main(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=err)
        print(e, file=err)
        return EXIT_USAGE
    try:
        return args.fn(args, out)
    except (PathError, ValueError) as e:
        print(f"dyckfold {args.command}: {e}", file=err)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
