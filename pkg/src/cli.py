"""Command-line harness: run, bench, gen and verify."""
import argparse
import json
import logging
import sys
import traceback
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

from .config import ALGORITHMS, BRUTE_FORCE_MAX_N, LOG_LEVEL, MASTER_SEED
from .corpus import default_corpus, verify_corpus
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    InstanceParseError,
    ParameterError,
    ValidationError,
)
from .instances import FAMILIES, GenSpec, generate_instance, load_instance, write_instance
from .report import ResultRow, format_failure, format_summary, render_csv
from .solvers import SolverConfig
from .storage import Storage
from .trials import resolve_opt, run_trials

# Setup basic logging with timestamps
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format='[%(asctime)s] %(levelname)-8s %(name)s: %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSTANCE = 2
EXIT_CAPACITY = 3
EXIT_VERIFY = 4


@dataclass
class ExperimentConfig:
    algorithms: List[str]
    p_values: List[float]
    epsilon_values: List[float]
    trials: int
    master_seed: int
    output_path: Optional[str]
    r: Optional[int] = None
    allow_large_p: bool = False

    def validate(self):
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if "sdtga" in self.algorithms:
            for p in self.p_values:
                for eps in self.epsilon_values:
                    # p=None defers to 1/(1+k), checked once the instance is known
                    if p is not None and not eps < p:
                        raise ConfigError(f"epsilon must be < p (got epsilon={eps}, p={p})")


def _prob(text: str) -> float:
    """Accept decimals or fractions such as 1/3."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _fmt(x: Optional[float]) -> str:
    return "default" if x is None else f"{x:.6g}"


def _solver_config(args, p, eps) -> SolverConfig:
    return SolverConfig(
        p=p,
        epsilon=eps,
        r=args.r,
        seed=args.seed,
        r_source="override" if args.r is not None else "constraint",
        allow_large_p=args.allow_large_p,
    )


def _sweep(args, experiment: ExperimentConfig, append: bool) -> int:
    experiment.validate()
    spec = load_instance(args.instance)
    f, system = spec.build()
    store = Storage(args.db) if not args.no_opt else None
    try:
        if "brute_force" in experiment.algorithms and spec.n > BRUTE_FORCE_MAX_N:
            raise CapacityError(f"brute force refuses n={spec.n} > {BRUTE_FORCE_MAX_N}")
        if not args.no_opt:
            resolve_opt(spec, store)
        rows: List[ResultRow] = []
        summary: List[str] = []
        for algorithm in experiment.algorithms:
            for p in experiment.p_values:
                for eps in experiment.epsilon_values:
                    cfg = _solver_config(args, p, eps)
                    if algorithm == "sdtga":
                        cfg.resolve(system).validate(system.k)
                    logger.info(f"{algorithm} on {spec.name}: p={p} epsilon={eps} trials={experiment.trials}")
                    result = run_trials(algorithm, spec, cfg, experiment.trials)
                    rows.extend(result.rows)
                    subject, body = format_summary(f"{algorithm} p={_fmt(p)} epsilon={_fmt(eps)}", result.metrics)
                    if experiment.output_path:
                        # stdout carries the CSV itself otherwise
                        print(subject)
                        for line in body:
                            print(f"  {line}")
                    summary.extend(f"{subject} {line}" for line in body)
    finally:
        if store is not None:
            store.close()

    text = render_csv(rows, summary)
    if experiment.output_path:
        path = Path(experiment.output_path)
        if append and path.exists():
            # append rows and summary without repeating the header
            with path.open("a", encoding="utf-8") as fh:
                fh.write(text.split("\n", 1)[1])
        else:
            path.write_text(text, encoding="utf-8")
        logger.info(f"wrote {len(rows)} rows to {path}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    experiment = ExperimentConfig(
        algorithms=[args.algorithm],
        p_values=[args.p],
        epsilon_values=[args.epsilon],
        trials=args.trials,
        master_seed=args.seed,
        output_path=args.output,
        r=args.r,
        allow_large_p=args.allow_large_p,
    )
    return _sweep(args, experiment, append=True)


def cmd_bench(args) -> int:
    experiment = ExperimentConfig(
        algorithms=args.algorithms,
        p_values=args.p,
        epsilon_values=args.epsilon,
        trials=args.trials,
        master_seed=args.seed,
        output_path=args.output,
        r=args.r,
        allow_large_p=args.allow_large_p,
    )
    return _sweep(args, experiment, append=False)


def cmd_gen(args) -> int:
    gen = GenSpec(
        family=args.family,
        n=args.n,
        k=args.k,
        r=args.r,
        density=args.density,
        universe=args.universe,
        clients=args.clients,
        seed=args.seed,
    )
    spec = generate_instance(gen)
    if args.output:
        write_instance(spec, args.output)
        logger.info(f"wrote {spec.name} to {args.output}")
    else:
        print(json.dumps(spec.to_dict(), indent=2))
    return EXIT_OK


def cmd_verify(args, corpus=None) -> int:
    entries = default_corpus() if corpus is None else corpus
    failures = verify_corpus(entries, exhaustive=args.exhaustive, trials=args.trials, seed=args.seed)
    for failure in failures:
        logger.error(f"verification failed: {failure.check} on {failure.subject}")
        print(format_failure(failure.check, failure.subject, failure.witness))
    if failures:
        return EXIT_VERIFY
    print(f"[VERIFY OK] {len(entries)} corpus entries")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m src.cli", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p, sweep: bool):
        p.add_argument("--instance", required=True, help="instance JSON file")
        if sweep:
            p.add_argument("--epsilon", type=_prob, nargs="+", default=[0.1])
        else:
            p.add_argument("--epsilon", type=_prob, default=0.1)
        p.add_argument("--r", type=int, default=None, help="override the constraint's rank bound")
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--seed", type=int, default=MASTER_SEED, help="master seed")
        p.add_argument("--output", default=None, help="CSV path (stdout if omitted)")
        p.add_argument("--allow-large-p", action="store_true", help="admit p > 1/(1+k)")
        p.add_argument("--db", default=None, help="OPT cache path")
        p.add_argument("--no-opt", action="store_true", help="skip brute-force OPT")

    run = sub.add_parser("run", help="one algorithm on one instance")
    solver_flags(run, sweep=False)
    run.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    run.add_argument("--p", type=_prob, default=None, help="sampling probability (default 1/(1+k))")
    run.set_defaults(handler=cmd_run)

    bench = sub.add_parser("bench", help="sweep algorithms x p x epsilon x trials")
    solver_flags(bench, sweep=True)
    bench.add_argument("--algorithms", nargs="+", default=["sdtga", "sample_greedy", "greedy"])
    bench.add_argument("--p", type=_prob, nargs="+", default=[None], help="sampling probabilities (default 1/(1+k))")
    bench.set_defaults(handler=cmd_bench)

    gen = sub.add_parser("gen", help="generate a synthetic instance")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, default=1)
    gen.add_argument("--r", type=int, default=None)
    gen.add_argument("--density", type=float, default=None)
    gen.add_argument("--universe", type=int, default=None)
    gen.add_argument("--clients", type=int, default=None)
    gen.add_argument("--seed", type=int, default=MASTER_SEED)
    gen.add_argument("--output", default=None)
    gen.set_defaults(handler=cmd_gen)

    verify = sub.add_parser("verify", help="check the definition verifiers over the built-in corpus")
    verify.add_argument("--exhaustive", action="store_true")
    verify.add_argument("--trials", type=int, default=1000)
    verify.add_argument("--seed", type=int, default=MASTER_SEED)
    verify.set_defaults(handler=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors, which is the instance-error code here
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        return args.handler(args)
    except (ConfigError, ParameterError) as e:
        logger.error(f"config error: {e}")
        print(f"[CONFIG ERROR] {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidationError, InstanceParseError, DomainError, FileNotFoundError) as e:
        logger.error(f"instance error: {e}")
        print(f"[INSTANCE ERROR] {e}", file=sys.stderr)
        return EXIT_INSTANCE
    except CapacityError as e:
        logger.error(f"capacity refusal: {e}")
        print(f"[CAPACITY] {e}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    # Use `python -m src.cli <verb>` from project root.
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        print("\n[INTERRUPTED] stopped by user")
    except Exception as e:
        logger.critical(f"Unhandled exception in main: {e}", exc_info=True)
        print(f"\n[CRITICAL ERROR]: {e}")
        print(traceback.format_exc())
        raise
