"""Command-line interface: decode, bler, latency, gen-patterns, gen-code, verify."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import ChannelConfig, observe, transmit
from .harness import (AlgorithmSpec, ConfigError, ExperimentConfig,
                      emit, make_decoder, parse_config, run_bler, run_latency)
from .linear_code import CodeError, build_code, save_parity_file
from .orbgrand import (PatternSetError, gamma_from_descriptor,
                       generate_pattern_set, save_pattern_set)
from .oracle import ml_decode_bruteforce


def _add_alg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alg", default="sgrand",
                   choices=["sgrand", "psgrand", "orbgrand", "hybrid"])
    p.add_argument("--backing", default="heap", choices=["heap", "array"])
    p.add_argument("--n", type=int, default=32, help="parallel batch size")
    p.add_argument("--kmax", type=int, default=None, help="max rounds")
    p.add_argument("--patterns", default=None, help="pattern set file")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--no-early-term", action="store_true")
    p.add_argument("--no-recursion", action="store_true")
    p.add_argument("--query-limit", type=int, default=None)


def _alg_spec_from_args(args) -> AlgorithmSpec:
    return AlgorithmSpec(
        name=args.alg, alg=args.alg, backing=args.backing, n=args.n,
        k_max=args.kmax, patterns=args.patterns,
        prune=not args.no_prune, early_term=not args.no_early_term,
        recursive=not args.no_recursion, query_limit=args.query_limit)


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as f:
            cfg = parse_config(f.read())
        if args.out:
            cfg.out = args.out
        return cfg
    return ExperimentConfig(
        code_spec=args.spec,
        ebno_db=[float(x) for x in args.ebno.split(",")],
        algorithms=[_alg_spec_from_args(args)],
        max_trials=args.max_trials,
        min_errors=args.min_errors,
        seed=args.seed,
        random_messages=args.random_messages,
        workers=args.workers,
        out=args.out,
        trial_log=getattr(args, "trial_log", None),
    )


def cmd_decode(args) -> int:
    code = build_code(args.spec)
    spec = _alg_spec_from_args(args)
    cfg = ChannelConfig(args.ebno, code.k / code.n)
    rng = np.random.default_rng(args.seed)
    if args.random_messages:
        u = rng.integers(0, 2, code.k).astype(np.uint8)
        w = code.encode(u)
    else:
        w = np.zeros(code.n, dtype=np.uint8)
    y = transmit(w, cfg, rng)
    profile = observe(y, cfg)

    if args.trace and spec.alg in ("psgrand", "hybrid"):
        from .hybrid import hybrid_decode
        from .psgrand import BatchSchedule, psgrand_decode
        sched = BatchSchedule(n=spec.n, k_max=spec.k_max)
        kw = dict(prune=spec.prune, early_term=spec.early_term,
                  recursive=spec.recursive, query_limit=spec.query_limit,
                  want_trace=True)
        if spec.alg == "psgrand":
            res = psgrand_decode(profile, code, sched, **kw)
        else:
            res = hybrid_decode(profile, code, spec.resolved_patterns(),
                                sched, **kw)
        with open(args.trace, "w") as f:
            f.write("round,tau,zeta_min,queries\n")
            for k, tau, zmin, q in res.trace or []:
                f.write(f"{k},{tau},{zmin},{q}\n")
    else:
        res = make_decoder(spec, code)(profile)

    ok = res.codeword is not None and np.array_equal(res.codeword, w)
    print(f"termination={res.termination} queries={res.queries} "
          f"rounds={res.rounds} zeta={res.zeta_star} correct={ok}")
    if res.codeword is not None:
        print("codeword=" + "".join(map(str, res.codeword)))
    return 0


def cmd_bler(args) -> int:
    cfg = _experiment_config(args)
    rows = run_bler(cfg)
    text = emit(rows, args.format, cfg.out)
    if not cfg.out:
        sys.stdout.write(text)
    return 0


def cmd_latency(args) -> int:
    cfg = _experiment_config(args)
    rows = run_latency(cfg, measured=args.measured)
    text = emit(rows, args.format, cfg.out)
    if not cfg.out:
        sys.stdout.write(text)
    return 0


def cmd_gen_code(args) -> int:
    code = build_code(args.spec)
    save_parity_file(code, args.out)
    print(f"wrote {args.out}: {code.describe()} d_min={code.d_min}")
    return 0


def cmd_gen_patterns(args) -> int:
    gamma = gamma_from_descriptor(args.gamma, args.n)
    if gamma is None:
        raise PatternSetError(f"unknown gamma descriptor {args.gamma!r}")
    ps = generate_pattern_set(args.n, args.T, gamma)
    save_pattern_set(ps, args.out)
    print(f"wrote {args.out}: {ps.describe()}")
    return 0


def cmd_verify(args) -> int:
    """Spot-check decoders against the brute-force ML reference."""
    code = build_code(args.spec)
    spec = _alg_spec_from_args(args)
    decoder = make_decoder(spec, code)
    cfg = ChannelConfig(args.ebno, code.k / code.n)
    mismatches = 0
    for trial in range(args.trials):
        rng = np.random.default_rng(args.seed ^ trial)
        w = np.zeros(code.n, dtype=np.uint8)
        y = transmit(w, cfg, rng)
        profile = observe(y, cfg)
        res = decoder(profile)
        _, zeta_ml = ml_decode_bruteforce(profile, code)
        if res.zeta_star is None or abs(res.zeta_star - zeta_ml) > 1e-9:
            mismatches += 1
    print(f"verify {spec.name} on {args.spec}: {args.trials - mismatches}/"
          f"{args.trials} ML matches")
    return 0 if mismatches == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grandkit",
                                 description=__doc__.strip())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode one simulated transmission")
    p.add_argument("--spec", default="bch:127,113")
    p.add_argument("--ebno", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-messages", action="store_true")
    p.add_argument("--trace", default=None, help="per-round trace CSV path")
    _add_alg_flags(p)
    p.set_defaults(func=cmd_decode)

    for name, func in (("bler", cmd_bler), ("latency", cmd_latency)):
        p = sub.add_parser(name, help=f"run {name} experiment")
        p.add_argument("--config", default=None, help="config file path")
        p.add_argument("--spec", default="bch:127,113")
        p.add_argument("--ebno", default="5.0", help="comma-separated dB list")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-trials", type=int, default=10_000_000)
        p.add_argument("--min-errors", type=int, default=200)
        p.add_argument("--random-messages", action="store_true")
        p.add_argument("--workers", type=int, default=None,
                       help=f"worker processes (or env GRANDKIT_WORKERS)")
        p.add_argument("--out", default=None, help="results file")
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        if name == "bler":
            p.add_argument("--trial-log", default=None,
                           help="per-trial CSV log for recount audits")
        if name == "latency":
            p.add_argument("--measured", type=int, default=2000)
        _add_alg_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("gen-code", help="write a parity-check matrix file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("gen-patterns", help="write a pattern set file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--gamma", default="linear")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_patterns)

    p = sub.add_parser("verify", help="cross-check a decoder against the oracle")
    p.add_argument("--spec", default="hamming:7,4")
    p.add_argument("--ebno", type=float, default=4.0)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _add_alg_flags(p)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CodeError, PatternSetError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
