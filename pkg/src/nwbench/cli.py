"""Command-line entry point: ``nwbench <subcommand> ...``.

JSON on stdout by default, CSV with ``--csv``. Exit codes: 0 ok, 1 validation
failure, 2 cap violation, 64 usage error.
"""
import argparse
import json
import sys

import numpy as np

from . import circuits, designs, harness, hardfn, nofproto, nwgen, restrictlab
from .boolcore import TruthTable, as_bits, make_rng
from .errors import NWBenchError, SpecError

EXIT_OK, EXIT_USAGE = 0, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


# ---------------------------------------------------------------- file helpers

def load_target(path):
    """A circuit JSON file, otherwise a sparse polynomial file."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return circuits.CircuitSpec.from_json(json.loads(text))
    return circuits.read_poly(path)


def load_function(path):
    """Circuit JSON, or a truth-table file of 2^n characters."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return circuits.CircuitSpec.from_json(json.loads(text))
    return nwgen.read_table(path)


def hard_from_args(parts):
    """``--hard rw:m,k,r`` or the two-token form ``--hard table FILE``."""
    if len(parts) == 2 and parts[0] == "table":
        return nwgen.HardFunctionHandle.parse(f"table:{parts[1]}")
    if len(parts) != 1:
        raise UsageError(f"bad --hard value {' '.join(parts)!r}")
    return nwgen.HardFunctionHandle.parse(parts[0])


def build_generator(args):
    design = designs.read_design(args.design)
    return nwgen.NWGenerator(design, hard_from_args(args.hard), getattr(args, "len", None))


def emit(report, as_csv, out=None):
    out = out or sys.stdout
    payload = report.to_json() if hasattr(report, "to_json") else report
    if as_csv:
        out.write(harness.to_csv(payload))
    else:
        out.write(json.dumps(payload, indent=1, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------------------------------------------------- subcommands

def cmd_params(args):
    p = designs.nw_params(args.profile, args.s, args.eps, tau=args.tau, c_d=args.c_d, desk_cap=args.desk_cap)
    return p.to_json()


def cmd_design(args):
    if args.action:
        if args.action[0] != "verify" or len(args.action) != 2:
            raise UsageError("expected 'design verify FILE' or 'design --s S --r R --l L --out FILE'")
        report = designs.verify_design(designs.read_design(args.action[1]))
        out = {"schema": 1, "file": args.action[1], **report.to_json()}
        return out, (0 if report.ok else 1)
    if args.s is None or args.r is None or args.l is None:
        raise UsageError("design needs --s, --r and --l")
    design = designs.build_design_for(args.s, args.r, args.l, make_rng(args.seed))
    if args.out:
        designs.write_design(args.out, design)
    return {"schema": 1, "m": design.universe_m, "r": design.set_size_r, "l": design.overlap_l,
            "s": design.s, "out": args.out}


def cmd_gen(args):
    gen = build_generator(args)
    z = nwgen.parse_seed(args.seed, gen.seed_len)
    bits = nwgen.generate(gen, z)
    return {"schema": 1, "seed": args.seed, "m": gen.seed_len, "bits": "".join(map(str, bits))}


def cmd_count(args):
    gen = build_generator(args)
    return harness.count_report(load_target(args.target), gen)


def cmd_fool(args):
    gen = build_generator(args)
    return harness.measure_bias(load_target(args.target), gen, args.mode, args.samples, args.seed)


def cmd_corr(args):
    F = load_function(args.circuit)
    H = hard_from_args(args.hard)
    return harness.measure_correlation(F, H)


def _family_from_config(cfg):
    if "family" in cfg:
        return [circuits.CircuitSpec.from_json(c) for c in cfg["family"]]
    if "random" in cfg:
        r = cfg["random"]
        rng = make_rng(r.get("seed", 0))
        desc = circuits.ClassDescriptor(top=circuits.SYM, s=r["terms"], k=r["width"])
        fam = []
        for _ in range(r.get("count", 1)):
            c = circuits.sample_circuit(desc, r["n"], rng)
            fam.append(circuits.dnf(r["n"], [ch.lits for ch in c.children]))
        return fam
    raise SpecError("switch config needs 'family' or 'random'")


def cmd_switch(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    if args.mode == "trim":
        return restrictlab.trim_check(cfg["blocks"], cfg["q"], cfg["k"], cfg.get("trials", 1000),
                                      cfg.get("seed", 0), cfg.get("n"))
    sc = restrictlab.SwitchExperimentConfig(_family_from_config(cfg), cfg["p"], cfg["t"], cfg.get("ell"),
                                            cfg.get("trials", 1000), cfg.get("seed", 0))
    if args.mode == "single":
        return restrictlab.single_switch_experiment(sc)
    return restrictlab.multi_switch_experiment(sc)


def cmd_nof(args):
    if args.action:
        if args.action != ["corr"] or not args.gip or not args.against:
            raise UsageError("expected 'nof corr --gip m,k --against FILE'")
        m, k = (int(v) for v in args.gip.split(","))
        return nofproto.gip_correlation_scan(m, k + 1, [load_function(args.against)])
    if not (args.circuit and args.partition and args.input):
        raise UsageError("nof needs --circuit, --partition and --input")
    C = circuits.read_circuit(args.circuit)
    P = nofproto.read_partition(args.partition)
    x = nwgen.parse_seed(args.input, C.n)
    if C.top.kind == circuits.ANY:
        return nofproto.run_any_protocol(C, P, as_bits(x, C.n))
    return nofproto.run_hg_protocol(C, P, as_bits(x, C.n))


def cmd_pipeline(args):
    F = circuits.read_circuit(args.circuit)
    rw = hardfn.RWParams.parse(args.rw)
    return harness.pipeline_experiment(F, rw, args.p, args.q, args.trials, args.seed, k=args.k, ell=args.ell)


# ---------------------------------------------------------------- parser

def _add_gen_args(p, target=False):
    p.add_argument("--design", required=True)
    p.add_argument("--hard", required=True, nargs="+", metavar="SPEC",
                   help="rw:m,k,r | gip:m,k | parity:r | const:b,r | table FILE")
    p.add_argument("--len", type=int, default=None, help="truncate the output to this many bits")
    if target:
        p.add_argument("--target", required=True, help="circuit JSON or sparse polynomial file")


def build_parser():
    parser = _Parser(prog="nwbench", description="Nisan-Wigderson derandomization workbench")
    parser.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="NW generator parameters for a profile")
    p.add_argument("--profile", required=True, choices=designs.PROFILES)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--c-d", dest="c_d", type=float)
    p.add_argument("--desk-cap", type=int)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("design", help="build or verify an (m, r, l, s) design")
    p.add_argument("action", nargs="*", help="'verify FILE' to check an existing design")
    p.add_argument("--s", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("gen", help="generator output for one seed")
    _add_gen_args(p)
    p.add_argument("--seed", required=True, help="hex seed, bit i = variable i")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("count", help="deterministic approximate count of a target")
    _add_gen_args(p, target=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("fool", help="bias of a target under the generator")
    _add_gen_args(p, target=True)
    p.add_argument("--mode", choices=("exact", "monte_carlo"), default="exact")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fool)

    p = sub.add_parser("corr", help="exact agreement of a circuit with a hard function")
    p.add_argument("--circuit", required=True)
    p.add_argument("--hard", required=True, nargs="+", metavar="SPEC")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("switch", help="switching-lemma experiments")
    p.add_argument("--mode", choices=("single", "multi", "trim"), required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_switch)

    p = sub.add_parser("nof", help="NOF protocol transcript, or 'nof corr' GIP scan")
    p.add_argument("action", nargs="*")
    p.add_argument("--circuit")
    p.add_argument("--partition")
    p.add_argument("--input", help="hex input, bit i = variable i")
    p.add_argument("--gip", help="m,k for GIP_{m,k+1}")
    p.add_argument("--against")
    p.set_defaults(func=cmd_nof)

    p = sub.add_parser("pipeline", help="fair-restriction pipeline experiment")
    p.add_argument("--circuit", required=True)
    p.add_argument("--rw", required=True, help="m,k,r")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"nwbench: error: {exc}\n")
        return EXIT_USAGE
    except NWBenchError as exc:
        sys.stderr.write(f"nwbench: {type(exc).__name__}: {exc}\n")
        return exc.exit_code
    except (OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"nwbench: {type(exc).__name__}: {exc}\n")
        return 1
    code = EXIT_OK
    if isinstance(result, tuple):
        result, code = result
    emit(result, args.csv)
    return code


if __name__ == "__main__":
    sys.exit(main())
