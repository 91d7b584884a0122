"""Command-line interface: ``iwasawa-k1 <command> ...``.

Exit codes: 0 pass, 1 condition failure, 2 invalid input,
3 precondition or precision failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus, files
from .algebra import AlgebraContext, beta
from .errors import InvalidInput, M3aViolation, PreconditionError, ToolkitError
from .group import FiniteQuotient, check_H3
from .kone import theta
from .logmap import LogContext, integral_log_L, integral_log_LB, script_L
from .verify import check_A, check_M, diagram_harness, level_stability

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_PRECONDITION = 0, 1, 2, 3


def load_group(path):
    from .group import load_group as _load
    try:
        return _load(path)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InvalidInput(f"{path} is not a text file") from None


def _context(args):
    group = load_group(args.group)
    return AlgebraContext(FiniteQuotient(group, args.prec_z))


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def _read(path):
    try:
        with open(path, encoding="ascii") as fh:
            return files.DataFile.from_text(fh.read())
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InvalidInput(f"{path} is not an ASCII data file") from None


def _input(args, ctx, kinds):
    df = _read(args.input)
    if df.kind not in kinds:
        raise InvalidInput(f"expected a {' or '.join(kinds)} file, got {df.kind}")
    coeff = args.coeff or df.coefficient_ring
    if coeff != df.coefficient_ring:
        raise InvalidInput(f"--coeff {coeff} does not match the file ({df.coefficient_ring})")
    lc = LogContext(ctx, args.prec_p)
    if coeff == "B":
        D = df.t_weight
        ring = lc.laurent_ring(D=D, M=D * (lc.K + 3))
    else:
        ring = lc.ring()
    return df, lc, ring


def cmd_validate(args):
    group = load_group(args.group)
    check_H3(group)
    quotient = FiniteQuotient(group, args.prec_z)
    lat = quotient.lattice
    classes = AlgebraContext(quotient).classes().size
    print(f"group: {group.label or args.group}")
    print(f"p = {group.p}, |H| = {group.nh}, e = {group.e}, level n = {args.prec_z}")
    print(f"|G_n| = {quotient.order}")
    print(f"subgroups containing Z: {len(lat)}")
    print(f"cyclic modulo Z: {len(lat.cyclic)}")
    print(f"conjugacy classes of G_n: {classes}")
    return EXIT_OK


def cmd_theta(args):
    ctx = _context(args)
    df, _, ring = _input(args, ctx, ("unit",))
    x = files.load_unit(df, ctx, ring)
    _emit(files.dump_tuple(theta(x), args.prec_p).to_text(), args.output)
    return EXIT_OK


def cmd_beta(args):
    ctx = _context(args)
    df, _, ring = _input(args, ctx, ("class",))
    f = files.load_class(df, ctx, ring)
    if f.subgroup is not ctx.lattice.g:
        raise InvalidInput("beta takes a class element of G")
    if f.value.laurent:
        from .skewseries import beta_B
        out = beta_B(f)
    else:
        out = beta(f)
    _emit(files.dump_tuple(out, args.prec_p).to_text(), args.output)
    return EXIT_OK


def cmd_L(args):
    ctx = _context(args)
    df, _, ring = _input(args, ctx, ("unit",))
    x = files.load_unit(df, ctx, ring)
    out = integral_log_LB(x) if x.value.laurent else integral_log_L(x)
    _emit(files.dump_class(out, args.prec_p).to_text(), args.output)
    return EXIT_OK


def cmd_scriptL(args):
    ctx = _context(args)
    df, _, ring = _input(args, ctx, ("unit-tuple",))
    t = files.load_tuple(df, ctx, ring)
    _emit(files.dump_tuple(script_L(t), args.prec_p).to_text(), args.output)
    return EXIT_OK


def cmd_check(args):
    ctx = _context(args)
    want = "additive-tuple" if args.psi else "unit-tuple"
    df, _, ring = _input(args, ctx, (want,))
    t = files.load_tuple(df, ctx, ring)
    rep = check_A(t) if args.psi else check_M(t)
    rep.precision = args.prec_p
    _report(rep.to_json(), args.report)
    for e in rep.failures():
        print(f"FAIL {e['condition']} {' '.join(e['subgroups'])}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_sample(args):
    import numpy as np

    from .kone import random_unit
    from .verify import random_class_element
    ctx = _context(args)
    lc = LogContext(ctx, args.prec_p)
    ring = lc.ring()
    rng = np.random.default_rng(args.seed)
    if args.kind == "unit":
        x = random_unit(ctx, ring, rng, digits=args.prec_p)
        df = files.dump_unit(x, args.prec_p, exact=True)
        if args.coeff == "B":
            from .skewseries import B_WEIGHTS
            D = B_WEIGHTS[0]
            lring = lc.laurent_ring(D=D, M=D * (lc.K + 3))
            from .algebra import GroupRingElement
            df = files.dump_unit(GroupRingElement(ctx, lring.lift_level(x.value)), args.prec_p,
                                 exact=True)
    else:
        if args.coeff == "B":
            raise InvalidInput("sample writes B-coefficient files for units only")
        df = files.dump_class(random_class_element(ctx, ring, rng, digits=args.prec_p),
                              args.prec_p, exact=True)
    _emit(df.to_text(), args.output)
    return EXIT_OK


def cmd_selftest(args):
    names = args.groups or list(corpus.NAMES)
    out = {"seed": args.seed, "size": args.size, "groups": {}}
    ok = True
    for name in names:
        group = corpus.load(name)
        runs = {}
        for n in range(args.prec_z, args.prec_z + args.size):
            ctx = AlgebraContext(FiniteQuotient(group, n))
            rep = diagram_harness(ctx, samples=args.samples, seed=args.seed, k=args.prec_p,
                                  mutate=args.mutate, b_samples=args.b_samples)
            runs[f"level {n}"] = rep.to_json()
            ok &= rep.passed
            if n > args.prec_z:
                st = level_stability(group, n - 1, args.prec_p, args.samples, args.seed)
                runs[f"stability {n} -> {n - 1}"] = st.to_json()
                ok &= st.passed
        out["groups"][name] = runs
        verdicts = ", ".join(f"{k}: {v['verdict']}" for k, v in runs.items())
        print(f"{name}: {verdicts}")
    out["verdict"] = "pass" if ok else "fail"
    _report(out, args.report)
    return EXIT_OK if ok else EXIT_FAIL


def _report(obj, path):
    if path:
        _emit(json.dumps(obj, sort_keys=True, indent=1) + "\n", path)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="iwasawa-k1",
        description="K_1 of one-dimensional Iwasawa algebras at finite level and precision.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_input=True):
        p.add_argument("group", help="group definition file")
        if with_input:
            p.add_argument("input", help="input data file")
            p.add_argument("-o", "--output", help="output file (default: stdout)")
            p.add_argument("--coeff", choices=("Lambda", "B"),
                           help="coefficient ring (default: as stated in the input file)")
        p.add_argument("--prec-p", type=int, default=5, metavar="K",
                       help="p-adic precision k (default 5)")
        p.add_argument("--prec-z", type=int, default=1, metavar="N",
                       help="level n: work in G / Z^(p^n) (default 1)")

    common(sub.add_parser("validate", help="check a group file and print lattice statistics"),
           with_input=False)
    for name, text in (("theta", "unit -> unit-tuple of norms"),
                       ("beta", "class element -> additive tuple"),
                       ("L", "unit -> class element (integral logarithm)"),
                       ("scriptL", "unit-tuple -> additive tuple")):
        common(sub.add_parser(name, help=text))
    p = sub.add_parser("check", help="test a tuple against the congruence conditions")
    common(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--psi", action="store_true", help="additive conditions (A1)-(A3)")
    mode.add_argument("--phi", action="store_true", help="multiplicative conditions (M1)-(M4)")
    p.add_argument("--report", help="JSON report path")

    p = sub.add_parser("sample", help="write a seeded random unit or class element")
    common(p, with_input=False)
    p.add_argument("--kind", choices=("unit", "class"), default="unit")
    p.add_argument("--coeff", choices=("Lambda", "B"), default="Lambda")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="output file (default: stdout)")

    p = sub.add_parser("selftest", help="run the identity battery on the bundled groups")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=1,
                   help="number of consecutive levels; >= 2 adds level-stability checks")
    p.add_argument("--samples", type=int, default=3, help="random samples per check")
    p.add_argument("--b-samples", type=int, default=0, help="random B-units per group")
    p.add_argument("--prec-p", type=int, default=5, metavar="K")
    p.add_argument("--prec-z", type=int, default=1, metavar="N")
    p.add_argument("--groups", nargs="*", choices=corpus.NAMES)
    p.add_argument("--mutate", choices=("skip-phi",),
                   help="replace L by an incorrect map; the run must fail")
    p.add_argument("--report", help="JSON report path")
    return parser


COMMANDS = {"validate": cmd_validate, "sample": cmd_sample, "theta": cmd_theta, "beta": cmd_beta, "L": cmd_L,
            "scriptL": cmd_scriptL, "check": cmd_check, "selftest": cmd_selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "prec_p", 1) < 1 or getattr(args, "prec_z", 0) < 0:
        print("error: --prec-p must be >= 1 and --prec-z >= 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except M3aViolation as exc:
        print(f"error: {exc} (subgroup {exc.subgroup})", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
