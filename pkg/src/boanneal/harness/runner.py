"""Repetition management: seeded runs, JSON-lines persistence, resume.

Output files are append-only JSON lines.  The first line is a header
carrying the full config and its digest; every further line is one
repetition record.  Re-running against an existing file skips the
(digest, index) pairs already present, so interrupted experiments can be
resumed and finished ones extended by raising ``repetitions``.
"""

import concurrent.futures
import json
import os
import time
import warnings
from dataclasses import dataclass

from ..optimizer import BOConfig, OptimizationTrace, Phase, SPSAConfig, \
    run_bo, run_random, run_spsa
from .config import ConfigError, ExperimentConfig, OptimizerKind, \
    config_digest, from_dict, validate
from .objectives import build_objective

ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class RunRecord:
    """One repetition of one experiment."""

    digest: str
    index: int
    seed: int
    trace: OptimizationTrace | None
    duration_s: float
    version: int = ARTIFACT_VERSION
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": "record",
            "digest": self.digest,
            "index": self.index,
            "seed": self.seed,
            "trace": None if self.trace is None else self.trace.to_dict(),
            "duration_s": self.duration_s,
            "version": self.version,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            digest=d["digest"],
            index=int(d["index"]),
            seed=int(d["seed"]),
            trace=(None if d.get("trace") is None
                   else OptimizationTrace.from_dict(d["trace"])),
            duration_s=float(d["duration_s"]),
            version=int(d["version"]),
            error=d.get("error"),
        )


def _evaluate_fixed(objective, seed) -> OptimizationTrace:
    """Single evaluation of the un-optimized protocol (optimizer none)."""
    theta = objective.initial_probe
    if theta is None:
        theta = tuple(lo for lo, _ in objective.bounds)
    value, sigma = objective(theta)
    trace = OptimizationTrace()
    trace.record(theta, value, sigma, Phase.LINEAR_PROBE)
    return trace


def run_repetition(config: ExperimentConfig, index: int) -> RunRecord:
    """Execute one seeded repetition; failures become error records."""
    digest = config_digest(config)
    seed = config.base_seed + index
    start = time.perf_counter()
    try:
        objective = build_objective(config, seed)
        opt = config.optimizer
        if opt.kind is OptimizerKind.BO:
            trace = run_bo(objective, BOConfig(
                n_random_init=opt.n_random_init,
                n_acquisition_iters=opt.n_acquisition_iters,
                kappa_start=opt.kappa_start,
                kappa_end=opt.kappa_end,
                kappa_decay_start=opt.kappa_decay_start,
                seed=seed,
            ))
        elif opt.kind is OptimizerKind.SPSA:
            trace = run_spsa(objective, SPSAConfig(seed=seed), opt.n_evals)
        elif opt.kind is OptimizerKind.RANDOM:
            trace = run_random(objective, opt.n_evals, seed=seed)
        else:
            trace = _evaluate_fixed(objective, seed)
        error = None
    except Exception as exc:  # noqa: BLE001 - recorded, not fatal
        trace, error = None, f"{type(exc).__name__}: {exc}"
    duration = time.perf_counter() - start
    return RunRecord(digest=digest, index=index, seed=seed, trace=trace,
                     duration_s=duration, error=error)


def _run_repetition_from_dict(config_dict: dict, index: int) -> RunRecord:
    # module-level entry point so process pools can pickle the call
    return run_repetition(from_dict(config_dict), index)


def read_records(path):
    """Parse an output stream into (header dict or None, records list).

    A truncated final line (interrupted writer) is skipped with a warning;
    malformed content anywhere else is an error.
    """
    header, records = None, []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError:
            if lineno == len(lines):
                warnings.warn(f"{path}: dropping truncated final line")
                continue
            raise ValueError(f"{path}:{lineno}: malformed record line")
        kind = doc.get("kind")
        if kind == "header":
            if header is not None:
                raise ValueError(f"{path}:{lineno}: duplicate header")
            header = doc
        elif kind == "record":
            records.append(RunRecord.from_dict(doc))
        else:
            raise ValueError(f"{path}:{lineno}: unknown line kind {kind!r}")
    return header, records


def _header_line(config: ExperimentConfig, digest: str) -> str:
    return json.dumps({
        "kind": "header",
        "version": ARTIFACT_VERSION,
        "digest": digest,
        "config": config.to_dict(),
    }, sort_keys=True)


def run_experiment(config: ExperimentConfig, out_path=None,
                   jobs: int | None = 1) -> list:
    """Run every missing repetition of ``config``, streaming records out.

    Returns all records (pre-existing and new) ordered by repetition
    index.  ``jobs=None`` uses the available CPU count.
    """
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    digest = config_digest(config)

    existing = {}
    writer = None
    if out_path is not None:
        out_path = os.fspath(out_path)
        if os.path.exists(out_path) and os.path.getsize(out_path) > 0:
            header, found = read_records(out_path)
            if header is not None and header.get("digest") != digest:
                raise ConfigError([
                    f"output file {out_path} belongs to digest "
                    f"{header.get('digest')!r}, not {digest!r}"
                ])
            existing = {r.index: r for r in found if r.digest == digest}
            writer = open(out_path, "a", encoding="utf-8")
        else:
            writer = open(out_path, "w", encoding="utf-8")
            writer.write(_header_line(config, digest) + "\n")
            writer.flush()

    todo = [i for i in range(config.repetitions) if i not in existing]
    if jobs is None:
        jobs = os.cpu_count() or 1
    results = dict(existing)
    try:
        if jobs <= 1 or len(todo) <= 1:
            for index in todo:
                record = run_repetition(config, index)
                results[index] = record
                if writer is not None:
                    writer.write(json.dumps(record.to_dict()) + "\n")
                    writer.flush()
        else:
            config_dict = config.to_dict()
            with concurrent.futures.ProcessPoolExecutor(jobs) as pool:
                futures = {
                    pool.submit(_run_repetition_from_dict, config_dict, i): i
                    for i in todo
                }
                # records stream in completion order; index keeps identity
                for fut in concurrent.futures.as_completed(futures):
                    record = fut.result()
                    results[record.index] = record
                    if writer is not None:
                        writer.write(json.dumps(record.to_dict()) + "\n")
                        writer.flush()
    finally:
        if writer is not None:
            writer.close()
    return [results[i] for i in sorted(results)]
