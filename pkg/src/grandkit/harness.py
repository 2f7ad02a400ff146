"""Monte Carlo experiment driver: BLER curves, query counts, timing.

Trials are paired: every algorithm decodes the same noise realizations,
so query-count and BLER ratios are directly comparable.  Per-trial
generators derive from seed XOR trial index, which makes results
byte-identical for a given config regardless of worker count (only the
wall-clock columns vary run to run).
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
import os
import time
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence, Union

import numpy as np

from .channel import ChannelConfig, observe, transmit
from .hybrid import hybrid_decode
from .linear_code import LinearCode, build_code
from .orbgrand import AbstractPatternSet, load_pattern_set, orb_decode
from .psgrand import BatchSchedule, psgrand_decode
from .sgrand import DecodeResult, sgrand_decode

FORMAT_VERSION = "1"
WORKERS_ENV = "GRANDKIT_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass
class AlgorithmSpec:
    """One decoder configuration for the harness."""

    name: str
    alg: str                      # sgrand | psgrand | orbgrand | hybrid
    backing: str = "heap"
    n: int = 32
    k_max: Optional[int] = None
    patterns: Union[str, AbstractPatternSet, None] = None
    prune: bool = True
    early_term: bool = True
    recursive: bool = True
    query_limit: Optional[int] = None

    def resolved_patterns(self) -> Optional[AbstractPatternSet]:
        if isinstance(self.patterns, str):
            self.patterns = load_pattern_set(self.patterns)
        return self.patterns

    def describe_patterns(self) -> str:
        ps = self.patterns
        if ps is None:
            return "-"
        if isinstance(ps, str):
            return ps
        return ps.describe()


@dataclass
class ExperimentConfig:
    code_spec: str
    ebno_db: Sequence[float]
    algorithms: Sequence[AlgorithmSpec]
    max_trials: int = 10_000_000
    min_errors: int = 200
    seed: int = 0
    random_messages: bool = False
    chunk: int = 512
    workers: Optional[int] = None     # None -> env var -> 1
    out: Optional[str] = None
    trial_log: Optional[str] = None   # per-trial CSV for recount audits

    def __post_init__(self):
        if self.max_trials < 1:
            raise ConfigError("max_trials must be >= 1")
        if self.min_errors < 1:
            raise ConfigError("min_errors must be >= 1")
        if not self.ebno_db:
            raise ConfigError("at least one Eb/N0 point required")
        if not self.algorithms:
            raise ConfigError("at least one algorithm required")
        if self.chunk < 1:
            raise ConfigError("chunk must be >= 1")

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return max(1, self.workers)
        env = os.environ.get(WORKERS_ENV)
        if env:
            return max(1, int(env))
        return 1


@dataclass
class MetricsRow:
    algorithm: str
    ebno_db: float
    trials: int
    block_errors: int
    bler: float
    avg_queries: float
    avg_rounds: float
    avg_fraction_parity_checked: float
    wall_ns_per_decode: float
    seed: int
    code: str
    patterns: str

    FIELDS = ("algorithm", "ebno_db", "trials", "block_errors", "bler",
              "avg_queries", "avg_rounds", "avg_fraction_parity_checked",
              "wall_ns_per_decode", "seed", "code", "patterns")


def make_decoder(spec: AlgorithmSpec, code: LinearCode):
    """Bind an AlgorithmSpec to a callable profile -> DecodeResult."""
    if spec.alg == "sgrand":
        limit = spec.query_limit or (1 << min(code.n, 62))

        def run(profile):
            return sgrand_decode(profile, code, limit, backing=spec.backing)
    elif spec.alg == "psgrand":
        sched = BatchSchedule(n=spec.n, k_max=spec.k_max)

        def run(profile):
            return psgrand_decode(profile, code, sched, prune=spec.prune,
                                  early_term=spec.early_term,
                                  recursive=spec.recursive,
                                  query_limit=spec.query_limit)
    elif spec.alg == "orbgrand":
        ps = spec.resolved_patterns()
        if ps is None:
            raise ConfigError(f"algorithm {spec.name!r} needs a pattern set")

        def run(profile):
            result, _ = orb_decode(profile, code, ps,
                                   query_limit=spec.query_limit)
            return result
    elif spec.alg == "hybrid":
        ps = spec.resolved_patterns()
        if ps is None:
            raise ConfigError(f"algorithm {spec.name!r} needs a pattern set")
        sched = BatchSchedule(n=spec.n, k_max=spec.k_max)

        def run(profile):
            return hybrid_decode(profile, code, ps, sched, prune=spec.prune,
                                 early_term=spec.early_term,
                                 recursive=spec.recursive,
                                 query_limit=spec.query_limit)
    else:
        raise ConfigError(f"unknown algorithm kind {spec.alg!r}")
    return run


@dataclass
class _Agg:
    trials: int = 0
    errors: int = 0
    queries: int = 0
    rounds: int = 0
    rows_checked: int = 0
    parity_ops: int = 0
    zeta_adds: int = 0
    wall_ns: int = 0

    def add(self, other: "_Agg") -> None:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))


# worker context, inherited by forked pool workers
_CTX: dict = {}


def _run_chunk(args):
    ebno, start, count = args
    code: LinearCode = _CTX["code"]
    decoders = _CTX["decoders"]
    seed: int = _CTX["seed"]
    random_messages: bool = _CTX["random_messages"]
    log_trials: bool = _CTX.get("log_trials", False)
    cfg = ChannelConfig(ebno, code.k / code.n)
    aggs = [_Agg() for _ in decoders]
    records = [] if log_trials else None
    for trial in range(start, start + count):
        rng = np.random.default_rng(seed ^ trial)
        if random_messages:
            u = rng.integers(0, 2, code.k).astype(np.uint8)
            w = code.encode(u)
        else:
            w = np.zeros(code.n, dtype=np.uint8)
        y = transmit(w, cfg, rng)
        profile = observe(y, cfg)
        for ai, (agg, (spec, run)) in enumerate(zip(aggs, decoders)):
            t0 = time.perf_counter_ns()
            res: DecodeResult = run(profile)
            agg.wall_ns += time.perf_counter_ns() - t0
            agg.trials += 1
            err = res.codeword is None or not np.array_equal(res.codeword, w)
            if err:
                agg.errors += 1
            agg.queries += res.queries
            agg.rounds += res.rounds
            agg.rows_checked += res.counters.rows_checked
            agg.parity_ops += res.counters.parity_bit_ops
            agg.zeta_adds += res.counters.zeta_adds
            if records is not None:
                records.append((trial, spec.name, int(err), res.queries,
                                res.termination))
    return aggs, records


def run_bler(config: ExperimentConfig) -> list[MetricsRow]:
    """Paired-trial BLER and query statistics per (algorithm, Eb/N0).

    Stops at each Eb/N0 once every algorithm has at least min_errors
    block errors (checked at chunk boundaries) or max_trials is reached.
    """
    code = build_code(config.code_spec)
    decoders = [(spec, make_decoder(spec, code)) for spec in config.algorithms]
    _CTX.update(code=code, decoders=decoders, seed=config.seed,
                random_messages=config.random_messages,
                log_trials=config.trial_log is not None)
    workers = config.resolved_workers()
    rows: list[MetricsRow] = []
    log_file = open(config.trial_log, "w") if config.trial_log else None
    if log_file:
        log_file.write("ebno_db,trial,algorithm,block_error,queries,termination\n")
    pool = None
    if workers > 1:
        pool = multiprocessing.get_context("fork").Pool(workers)
    try:
        for ebno in config.ebno_db:
            aggs = [_Agg() for _ in decoders]

            def chunk_args():
                start = 0
                while start < config.max_trials:
                    count = min(config.chunk, config.max_trials - start)
                    yield (ebno, start, count)
                    start += count

            stream = (pool.imap(_run_chunk, chunk_args())
                      if pool else map(_run_chunk, chunk_args()))
            for chunk_aggs, records in stream:
                for agg, part in zip(aggs, chunk_aggs):
                    agg.add(part)
                if log_file and records:
                    for trial, name, err, queries, term in records:
                        log_file.write(
                            f"{ebno},{trial},{name},{err},{queries},{term}\n")
                if min(a.errors for a in aggs) >= config.min_errors:
                    break
            for (spec, _), agg in zip(decoders, aggs):
                nk = code.n - code.k
                rows.append(MetricsRow(
                    algorithm=spec.name,
                    ebno_db=ebno,
                    trials=agg.trials,
                    block_errors=agg.errors,
                    bler=agg.errors / agg.trials,
                    avg_queries=agg.queries / agg.trials,
                    avg_rounds=agg.rounds / agg.trials,
                    avg_fraction_parity_checked=(
                        agg.rows_checked / (agg.queries * nk) if agg.queries else 0.0),
                    wall_ns_per_decode=agg.wall_ns / agg.trials,
                    seed=config.seed,
                    code=code.describe(),
                    patterns=spec.describe_patterns(),
                ))
    finally:
        if log_file:
            log_file.close()
        if pool:
            pool.terminate()
            pool.join()
    return rows


def run_latency(config: ExperimentConfig, warmup: int = 32,
                measured: Optional[int] = None) -> list[MetricsRow]:
    """Single-process wall-time per decode over shared noise realizations.

    Warm-up decodes are excluded; every algorithm times the same trials.
    """
    code = build_code(config.code_spec)
    decoders = [(spec, make_decoder(spec, code)) for spec in config.algorithms]
    measured = measured if measured is not None else min(config.max_trials, 2000)
    rows: list[MetricsRow] = []
    for ebno in config.ebno_db:
        cfg = ChannelConfig(ebno, code.k / code.n)
        profiles = []
        words = []
        for trial in range(warmup + measured):
            rng = np.random.default_rng(config.seed ^ trial)
            if config.random_messages:
                u = rng.integers(0, 2, code.k).astype(np.uint8)
                w = code.encode(u)
            else:
                w = np.zeros(code.n, dtype=np.uint8)
            y = transmit(w, cfg, rng)
            profiles.append(observe(y, cfg))
            words.append(w)
        for spec, run in decoders:
            agg = _Agg()
            for i, profile in enumerate(profiles):
                if i < warmup:
                    run(profile)
                    continue
                t0 = time.perf_counter_ns()
                res = run(profile)
                agg.wall_ns += time.perf_counter_ns() - t0
                agg.trials += 1
                if res.codeword is None or not np.array_equal(res.codeword, words[i]):
                    agg.errors += 1
                agg.queries += res.queries
                agg.rounds += res.rounds
                agg.rows_checked += res.counters.rows_checked
            nk = code.n - code.k
            rows.append(MetricsRow(
                algorithm=spec.name,
                ebno_db=ebno,
                trials=agg.trials,
                block_errors=agg.errors,
                bler=agg.errors / agg.trials,
                avg_queries=agg.queries / agg.trials,
                avg_rounds=agg.rounds / agg.trials,
                avg_fraction_parity_checked=(
                    agg.rows_checked / (agg.queries * nk) if agg.queries else 0.0),
                wall_ns_per_decode=agg.wall_ns / agg.trials,
                seed=config.seed,
                code=code.describe(),
                patterns=spec.describe_patterns(),
            ))
    return rows


# -- emission ---------------------------------------------------------------

def emit(rows: Sequence[MetricsRow], fmt: str, path: Optional[str] = None) -> str:
    """Serialize metric rows as CSV or JSON; returns the text, writes path."""
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(("format_version",) + MetricsRow.FIELDS)
        for r in rows:
            w.writerow((FORMAT_VERSION,) + tuple(getattr(r, f) for f in MetricsRow.FIELDS))
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps(
            {"format_version": FORMAT_VERSION,
             "rows": [asdict(r) for r in rows]},
            indent=2, sort_keys=True) + "\n"
    else:
        raise ValueError(f"unknown emit format {fmt!r}")
    if path:
        with open(path, "w") as f:
            f.write(text)
    return text


def parse_rows(text: str) -> list[MetricsRow]:
    """Round-trip parser for emitted CSV or JSON."""
    text = text.strip()
    if text.startswith("{"):
        data = json.loads(text)
        return [MetricsRow(**row) for row in data["rows"]]
    rows = []
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header[1:]) != MetricsRow.FIELDS:
        raise ValueError("unexpected CSV header")
    types = (str, float, int, int, float, float, float, float, float, int, str, str)
    for rec in reader:
        vals = [t(v) for t, v in zip(types, rec[1:])]
        rows.append(MetricsRow(*vals))
    return rows


# -- config file: "key = value" lines, repeated "algorithm = ..." entries ---

def parse_config(text: str) -> ExperimentConfig:
    """Plain-text config. Keys: code, ebno, seed, max_trials, min_errors,
    chunk, workers, random_messages, out; each "algorithm" line names a
    decoder followed by option=value tokens."""
    kv: dict[str, str] = {}
    algs: list[AlgorithmSpec] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "algorithm":
            algs.append(_parse_algorithm(value, lineno))
        else:
            kv[key] = value
    if "code" not in kv:
        raise ConfigError("config missing 'code'")
    if "ebno" not in kv:
        raise ConfigError("config missing 'ebno'")
    try:
        return ExperimentConfig(
            code_spec=kv["code"],
            ebno_db=[float(x) for x in kv["ebno"].split(",")],
            algorithms=algs,
            max_trials=int(kv.get("max_trials", 10_000_000)),
            min_errors=int(kv.get("min_errors", 200)),
            seed=int(kv.get("seed", 0)),
            random_messages=kv.get("random_messages", "false").lower() == "true",
            chunk=int(kv.get("chunk", 512)),
            workers=int(kv["workers"]) if "workers" in kv else None,
            out=kv.get("out"),
            trial_log=kv.get("trial_log"),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from e


_BOOL = {"true": True, "false": False, "on": True, "off": False}


def _parse_algorithm(value: str, lineno: int) -> AlgorithmSpec:
    tokens = value.split()
    if not tokens:
        raise ConfigError(f"line {lineno}: empty algorithm")
    alg = tokens[0]
    opts: dict = {"name": alg, "alg": alg}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigError(f"line {lineno}: bad algorithm option {tok!r}")
        k, _, v = tok.partition("=")
        if k in ("n", "k_max", "query_limit"):
            opts[k] = int(v)
        elif k in ("prune", "early_term", "recursive"):
            try:
                opts[k] = _BOOL[v.lower()]
            except KeyError:
                raise ConfigError(f"line {lineno}: bad boolean {v!r}") from None
        elif k in ("name", "backing", "patterns"):
            opts[k] = v
        else:
            raise ConfigError(f"line {lineno}: unknown algorithm option {k!r}")
    try:
        return AlgorithmSpec(**opts)
    except TypeError as e:
        raise ConfigError(f"line {lineno}: {e}") from e
