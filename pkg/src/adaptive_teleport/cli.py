"""Command-line front end.

Every command writes one report: JSON ``{schema_version, command, params,
results, timing_ms}``, CSV rows of ``results``, or aligned text.  Options
come from built-in defaults, then an optional ``key = value`` config file,
then the command line.  ``ADAPTIVE_TELEPORT_SEED`` overrides the default
seed.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from .analytics import ChainSpec, exact_chain_success, p_adaptive_double, p_identical_chain_closed
from .core import (
    QubitState,
    geometric_monotone_resource,
    geometric_peak_resource,
    uniform_resource,
)
from .errors import TeleportError, VerificationFailed
from .fock_oracle import verify_effective_step
from .montecarlo import SimReport, simulate_chain
from .optimizer import (
    CrossoverRow,
    OptimizationResult,
    Table1Row,
    crossover_M,
    maximize_over_q,
    optimal_identical,
    table1,
)
from .strategies import (
    AdaptiveDouble,
    Composite,
    FixedSequence,
    Identical,
    LastStepAdaptive,
    NotGateDouble,
)

SCHEMA_VERSION = 1
SEED_ENV = "ADAPTIVE_TELEPORT_SEED"
COMMANDS = ("table1", "optimize", "simulate", "compare", "crossover", "oracle-check")
STRATEGIES = ("identical-uniform", "identical-peak", "adaptive-double",
              "not-gate-double", "last-step-adaptive")
FORMATS = ("json", "csv", "text")
ORACLE_Q = 1.29663


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: tuple = (2,)
    m_steps: int = 2
    q: Optional[float] = None
    samples: int = 100_000
    seed: int = 0
    output_format: str = "json"
    output_path: Optional[str] = None
    strategy: str = "adaptive-double"
    input: str = "0.6,0.8"
    inputs: int = 20
    max_m: int = 10
    objective: str = "adaptive-double"
    lo: float = 1.0
    hi: float = 4.0
    tol: float = 1e-6
    workers: int = 1

    @property
    def single_n(self) -> int:
        if len(self.n) != 1:
            raise ConfigError(f"command {self.command!r} takes a single --n, got {self.n}")
        return self.n[0]


@dataclass(frozen=True)
class CompareRow:
    strategy: str
    q: Optional[float]
    probability: Optional[float]


@dataclass(frozen=True)
class OracleCheckRow:
    n: int
    resource: str
    inputs: int
    passed: bool
    distribution_error: float
    modulus_error: float
    phase_error: float


RECORD_TYPES = {
    "table1": Table1Row,
    "optimize": OptimizationResult,
    "simulate": SimReport,
    "compare": CompareRow,
    "crossover": CrossoverRow,
    "oracle-check": OracleCheckRow,
}

# key -> converter for config-file values and flags
_CONVERTERS = {
    "n": lambda s: tuple(int(x) for x in str(s).split(",") if x.strip()),
    "m_steps": int,
    "q": float,
    "samples": int,
    "seed": int,
    "output_format": str,
    "output_path": str,
    "strategy": str,
    "input": str,
    "inputs": int,
    "max_m": int,
    "objective": str,
    "lo": float,
    "hi": float,
    "tol": float,
    "workers": int,
    "command": str,
}
_ALIASES = {"m": "m_steps", "format": "output_format", "output": "output_path",
            "max-m": "max_m"}


def _canonical_key(key: str) -> str:
    key = key.strip()
    key = _ALIASES.get(key, key).replace("-", "_")
    return _ALIASES.get(key, key)


def load_config_file(path: str) -> dict:
    """Read flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _canonical_key(key)
        if key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="adaptive-teleport",
        description="Adaptive multiple teleportation in the KLM scheme.",
        argument_default=argparse.SUPPRESS,
    )
    p.add_argument("command", nargs="?", choices=COMMANDS, default=None)
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--n", help="even resource size(s), comma separated")
    p.add_argument("--m", dest="m_steps", help="number of teleportations")
    p.add_argument("--q", help="geometric ratio")
    p.add_argument("--samples")
    p.add_argument("--seed")
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--input", help="input qubit 'amp_h,amp_v' (complex allowed, e.g. 0.6,0.8j)")
    p.add_argument("--inputs", help="random inputs per resource for oracle-check")
    p.add_argument("--max-m", dest="max_m")
    p.add_argument("--objective", choices=("adaptive-double", "identical-chain"))
    p.add_argument("--lo")
    p.add_argument("--hi")
    p.add_argument("--tol")
    p.add_argument("--workers")
    p.add_argument("--format", dest="output_format", choices=FORMATS)
    p.add_argument("--output", dest="output_path")
    return p


def resolve_config(argv) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    merged = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        merged["seed"] = env_seed
    config_path = args.pop("config", None)
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({k: v for k, v in args.items() if v is not None})
    if "command" not in merged:
        raise ConfigError("no command given (positional argument or 'command' in config file)")
    values = {}
    for key, raw in merged.items():
        try:
            values[key] = _CONVERTERS[key](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    cfg = RunConfig(**values)
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.output_format not in FORMATS:
        raise ConfigError(f"unknown format {cfg.output_format!r}")
    if cfg.strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {cfg.strategy!r}")
    if not cfg.n or any(n < 2 or n % 2 for n in cfg.n):
        raise ConfigError(f"--n must be even integers >= 2, got {cfg.n}")
    if cfg.m_steps < 1:
        raise ConfigError("--m must be >= 1")
    return cfg


def _parse_qubit(text: str) -> QubitState:
    try:
        h, v = (complex(s.strip()) for s in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--input must be 'amp_h,amp_v', got {text!r}") from exc
    return QubitState.from_unnormalized(h, v)


def make_strategy(cfg: RunConfig):
    n, M = cfg.single_n, cfg.m_steps
    name = cfg.strategy
    if name == "identical-uniform":
        return Identical(uniform_resource(n))
    if name in ("adaptive-double", "not-gate-double"):
        if M != 2:
            raise ConfigError(f"{name} covers exactly two teleportations (--m 2)")
        q = cfg.q if cfg.q is not None else table1([n])[0].q_opt
        return AdaptiveDouble(n, q) if name == "adaptive-double" else NotGateDouble(n, q)
    q = cfg.q if cfg.q is not None else optimal_identical(n, M).q_opt
    if name == "identical-peak":
        return Identical(geometric_peak_resource(n, q))
    return LastStepAdaptive(geometric_peak_resource(n, q), M)


def _cmd_table1(cfg):
    return table1(cfg.n, tol=cfg.tol)


def _cmd_optimize(cfg):
    n = cfg.single_n
    if cfg.objective == "adaptive-double":
        def objective(q):
            return p_adaptive_double(n, q)
    else:
        if n != 2:
            return [optimal_identical(n, cfg.m_steps, cfg.lo, cfg.hi, cfg.tol)]

        def objective(q):
            return p_identical_chain_closed(cfg.m_steps, q)
    return [maximize_over_q(objective, cfg.lo, cfg.hi, cfg.tol)]


def _cmd_simulate(cfg):
    strategy = make_strategy(cfg)
    qubit = _parse_qubit(cfg.input)
    return [simulate_chain(strategy, qubit, cfg.m_steps, cfg.samples, cfg.seed,
                           workers=cfg.workers)]


def compare_strategies(n: int, M: int) -> list:
    """Exact faithful probabilities of the four strategy families at ``(n, M)``."""
    rows = [CompareRow("identical-maximal", 1.0,
                       exact_chain_success(ChainSpec(M, Identical(uniform_resource(n)))))]
    best = optimal_identical(n, M)
    rows.append(CompareRow("identical-optimal-q", best.q_opt, best.p_opt))
    if M >= 2:
        q1 = table1([n])[0].q_opt
        parts = [AdaptiveDouble(n, q1)]
        if M > 2:
            parts.append(FixedSequence((uniform_resource(n),) * (M - 2)))
        p = exact_chain_success(ChainSpec(M, Composite(tuple(parts))))
        rows.append(CompareRow("adaptive-double", q1, p))
    else:
        rows.append(CompareRow("adaptive-double", None, None))
    last = LastStepAdaptive(geometric_peak_resource(n, best.q_opt), M)
    rows.append(CompareRow("last-step-adaptive", best.q_opt, exact_chain_success(ChainSpec(M, last))))
    return rows


def _cmd_compare(cfg):
    return compare_strategies(cfg.single_n, cfg.m_steps)


def _cmd_crossover(cfg):
    return crossover_M(cfg.max_m, tol=cfg.tol)


def oracle_sweep(n_values, inputs: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for n in n_values:
        resources = {
            "uniform": uniform_resource(n),
            f"peak({ORACLE_Q})": geometric_peak_resource(n, ORACLE_Q),
            "monotone(2)": geometric_monotone_resource(n, 2.0),
            "monotone(0.5)": geometric_monotone_resource(n, 0.5),
        }
        for label, res in resources.items():
            reports = [verify_effective_step(QubitState.random(rng), res, strict=False)
                       for _ in range(inputs)]
            rows.append(OracleCheckRow(
                n, label, inputs, all(r.passed for r in reports),
                max(r.distribution_error for r in reports),
                max(r.modulus_error for r in reports),
                max(r.phase_error for r in reports)))
    return rows


def _cmd_oracle_check(cfg):
    return oracle_sweep(cfg.n, cfg.inputs, cfg.seed)


HANDLERS = {
    "table1": _cmd_table1,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "crossover": _cmd_crossover,
    "oracle-check": _cmd_oracle_check,
}


def _record_dict(rec) -> dict:
    d = asdict(rec)
    return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


def _params(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("output_path")
    d.pop("output_format")
    d["n"] = list(cfg.n)
    return d


def make_report(cfg: RunConfig, records: list, timing_ms: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": cfg.command,
        "params": _params(cfg),
        "results": [_record_dict(r) for r in records],
        "timing_ms": timing_ms,
    }


def parse_report(text: str) -> list:
    """Rebuild the typed records from a JSON report."""
    report = json.loads(text)
    cls = RECORD_TYPES[report["command"]]
    names = {f.name for f in fields(cls)}
    out = []
    for row in report["results"]:
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in row.items() if k in names}
        out.append(cls(**kwargs))
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9g}"
    if isinstance(value, (tuple, list)):
        return " ".join(_fmt(v) for v in value)
    return str(value)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows = report["results"]
    cols = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()
    cells = [cols] + [[_fmt(row[c]) for c in cols] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cols))]
    lines = [f"# {report['command']}  ({report['timing_ms']:.1f} ms)"]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    t0 = time.perf_counter()
    records = HANDLERS[cfg.command](cfg)
    timing_ms = (time.perf_counter() - t0) * 1e3
    report = make_report(cfg, records, timing_ms)
    text = render(report, cfg.output_format)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        stream.write(text)
    if cfg.command == "oracle-check" and not all(r.passed for r in records):
        return 1
    return 0


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return run(cfg)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailed as exc:
        print(f"verification failed: {exc} (pattern {exc.pattern})", file=sys.stderr)
        return 1
    except TeleportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
