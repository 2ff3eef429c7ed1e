"""Command-line interface.

Subcommands mirror the harness operations: ``optimize`` runs a configured
experiment, ``simulate`` evaluates one fixed protocol, ``gap-landscape``
tabulates spectral gaps, ``graphs`` generates/filters/scores unit-disk
graph sets, ``evaluate-samples`` scores measured bitstrings against a
graph, ``aggregate`` summarizes a record stream, and ``emit`` writes CSV
plot data.  Exit codes: 0 success, 1 validation/usage error, 2 runtime
failure.  ``BOANNEAL_OUTPUT_DIR`` sets the default output directory.
"""

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import pspin, schedule
from .harness import (
    ConfigError,
    aggregate,
    config_digest,
    emit_plot_data,
    load_config,
    read_records,
    run_experiment,
    validate,
)
from .harness.objectives import build_objective, pspin_system, schedule_specs
from .rydberg import (
    SampleFormatError,
    approximation_ratio,
    brute_force_mis,
    excitation_probabilities,
    filter_unique_mis_noniso,
    fom_top_quantile,
    generate_lattice_udgs,
    hardness_parameter,
    ingest_samples,
    load_graph,
    mis_energy,
    p_mis,
)
from .rydberg.io import graph_from_dict, graph_to_dict

ENV_OUTPUT_DIR = "BOANNEAL_OUTPUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse normally exits 2 on bad usage; remap onto the validation code
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _default_out(filename: str) -> str:
    base = os.environ.get(ENV_OUTPUT_DIR, ".")
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, filename)


def _print_json(doc, out=None):
    text = json.dumps(doc, sort_keys=True)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_overridden_config(args):
    if not args.config:
        raise _UsageError("--config is required for this subcommand")
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, base_seed=args.seed)
    if getattr(args, "reps", None) is not None:
        config = dataclasses.replace(config, repetitions=args.reps)
    return config


# ----------------------------------------------------------------- commands


def cmd_optimize(args):
    config = _load_overridden_config(args)
    digest = config_digest(config)
    out = args.out or _default_out(f"records-{digest[:12]}.jsonl")
    records = run_experiment(config, out_path=out, jobs=args.jobs)
    failed = [r.index for r in records if r.error is not None]
    agg = aggregate(records, "best")
    _print_json({
        "digest": digest,
        "out": out,
        "records": len(records),
        "failed_indices": failed,
        "best_median": agg.median,
        "best_lower_quartile": agg.lower_quartile,
        "best_upper_quartile": agg.upper_quartile,
    })
    return 0


def cmd_simulate(args):
    config = _load_overridden_config(args)
    errors = validate(config)
    if errors:
        raise ConfigError(errors)
    seed = args.seed if args.seed is not None else config.base_seed
    objective = build_objective(config, seed)
    if args.theta is not None:
        theta = tuple(float(x) for x in args.theta.split(","))
    elif objective.initial_probe is not None:
        theta = objective.initial_probe
    else:
        theta = tuple(lo for lo, _ in objective.bounds)
    value, sigma = objective(theta)
    _print_json({"theta": list(theta), "value": value, "sigma_obs": sigma,
                 "objective": objective.name}, args.out)
    return 0


def _gap_source(config, grid, lam_grid):
    system = pspin_system(config)
    s_values = np.linspace(0.0, 1.0, grid)
    if system.mode is pspin.Mode.RA:
        return (system, s_values, np.linspace(0.0, 1.0, lam_grid))
    return (system, s_values)


def cmd_gap_landscape(args):
    config = _load_overridden_config(args)
    out = args.out or _default_out("gap-landscape.csv")
    source = _gap_source(config, args.grid, args.lam_grid)
    emit_plot_data(source, "gap-landscape", out)
    rows = args.grid if len(source) == 2 else args.grid * args.lam_grid
    _print_json({"out": out, "rows": rows})
    return 0


def _write_graph_lines(graphs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_dict(g), sort_keys=True) + "\n")


def _read_graph_lines(path):
    graphs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                graphs.append(graph_from_dict(json.loads(line)))
    return graphs


def cmd_graphs_generate(args):
    occupancy = [int(x) for x in args.occupancy.split(",")]
    graphs = generate_lattice_udgs(args.rows, args.cols, occupancy=occupancy,
                                   seed=args.seed)
    out = args.out or _default_out("graphs.jsonl")
    _write_graph_lines(graphs, out)
    _print_json({"out": out, "graphs": len(graphs)})
    return 0


def cmd_graphs_filter(args):
    graphs = _read_graph_lines(args.infile)
    kept = filter_unique_mis_noniso(graphs)
    kept = [dataclasses.replace(g, known_mis_size=brute_force_mis(g).mis_size)
            for g in kept]
    out = args.out or _default_out("graphs-filtered.jsonl")
    _write_graph_lines(kept, out)
    _print_json({"out": out, "graphs": len(graphs), "kept": len(kept)})
    return 0


def cmd_graphs_hp(args):
    import csv

    graphs = _read_graph_lines(args.infile)
    out = args.out or _default_out("graphs-hp.csv")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("index", "n_vertices", "n_edges", "mis_size",
                         "n_mis", "hardness"))
        for k, g in enumerate(graphs):
            res = brute_force_mis(g)
            writer.writerow((k, g.n_vertices, len(g.edges), res.mis_size,
                             res.n_mis, hardness_parameter(g)))
    _print_json({"out": out, "graphs": len(graphs)})
    return 0


def cmd_evaluate_samples(args):
    graph = load_graph(args.graph)
    samples = ingest_samples(args.samples, graph)
    ratio, valid = approximation_ratio(samples, graph, alpha=args.alpha)
    energies = [mis_energy(b, graph, args.alpha) for b, _ in samples.entries]
    weights = [c for _, c in samples.entries]
    mean_energy = float(np.average(energies, weights=weights))
    _print_json({
        "total_shots": samples.total_shots,
        "p_mis": p_mis(samples, graph),
        "approximation_ratio": ratio,
        "best_is_independent": valid,
        "mean_energy": mean_energy,
        "h_half": fom_top_quantile(samples, graph, x=0.5, alpha=args.alpha),
    }, args.out)
    return 0


def cmd_aggregate(args):
    _, records = read_records(args.infile)
    agg = aggregate(records, args.metric)
    _print_json({"metric": args.metric, "median": agg.median,
                 "lower_quartile": agg.lower_quartile,
                 "upper_quartile": agg.upper_quartile, "n": agg.n}, args.out)
    return 0


def _records_with_config(path):
    header, records = read_records(path)
    if header is None:
        raise ValueError(f"{path} has no header line")
    from .harness import from_dict

    return from_dict(header["config"]), records


def _shot_energies(samples, graph, alpha):
    out = []
    for bits, count in samples.entries:
        out.extend([mis_energy(bits, graph, alpha)] * count)
    return out


def cmd_emit(args):
    kind = args.kind
    out = args.out or _default_out(f"{kind}.csv")
    if kind == "scaling":
        if not args.infile:
            raise _UsageError("scaling needs one --in per record file")
        source = []
        for path in args.infile:
            config, records = _records_with_config(path)
            source.append((config.system.n_spins, records))
        emit_plot_data(source, kind, out)
    elif kind == "best-vs-evaluations":
        _, records = read_records(_single_in(args))
        emit_plot_data(records, kind, out)
    elif kind == "gap-landscape":
        config = _load_overridden_config(args)
        emit_plot_data(_gap_source(config, args.grid, args.lam_grid),
                       kind, out)
    elif kind == "control-path":
        config, records = _records_with_config(_single_in(args))
        best = max((r for r in records if r.trace is not None),
                   key=lambda r: r.trace.best_value)
        specs = schedule_specs(config)
        times = np.linspace(0.0, config.system.t_f, args.grid)
        theta = np.asarray(best.trace.best_theta)
        curves, k = {}, 0
        names = ("s", "lambda") if len(specs) == 2 else ("u",)
        for name, spec in zip(names, specs):
            part = theta[k:k + spec.n_params]
            curves[name] = [schedule.evaluate(spec, part, t) for t in times]
            k += spec.n_params
        emit_plot_data((times, curves), kind, out)
    elif kind == "instantaneous":
        config = _load_overridden_config(args)
        system = pspin_system(config)
        specs = schedule_specs(config)
        theta = (tuple(float(x) for x in args.theta.split(","))
                 if args.theta else None)
        parts, k = [], 0
        for spec in specs:
            width = spec.n_params
            if theta is None:
                part = schedule.linear_equivalent_params(spec) \
                    if spec.family is not schedule.Family.LINEAR else ()
            else:
                part = theta[k:k + width]
            parts.append(np.asarray(part, dtype=float))
            k += width
        controls = tuple(schedule.as_callable(spec, part)
                         for spec, part in zip(specs, parts))
        times = np.linspace(0.0, config.system.t_f, args.grid)
        _, states = pspin.evolve_trace(system, controls, config.system.t_f,
                                       times)
        fidelities = [pspin.fidelity(st, system) for st in states]
        gaps = []
        for t in times:
            if system.mode is pspin.Mode.RA:
                gaps.append(pspin.spectral_gap(
                    system, controls[0](t), controls[1](t)))
            else:
                gaps.append(pspin.spectral_gap(system, controls[0](t)))
        emit_plot_data((times, fidelities, gaps), kind, out)
    elif kind == "mis-histogram":
        graph = load_graph(args.graph)
        samples = ingest_samples(args.samples, graph)
        energies = _shot_energies(samples, graph, args.alpha)
        mis_size = graph.known_mis_size or brute_force_mis(graph).mis_size
        emit_plot_data((energies, mis_size, args.bin_width), kind, out)
    elif kind == "excitations":
        graph = load_graph(args.graph)
        samples = ingest_samples(args.samples, graph)
        emit_plot_data(excitation_probabilities(samples, graph), kind, out)
    else:
        raise _UsageError(f"unknown emit kind {kind!r}")
    _print_json({"kind": kind, "out": out})
    return 0


def _single_in(args):
    if not args.infile or len(args.infile) != 1:
        raise _UsageError("this kind needs exactly one --in file")
    return args.infile[0]


# ------------------------------------------------------------------- parser


def _add_common(sub, config=True, seed=True, reps=False, jobs=False):
    if config:
        sub.add_argument("--config", help="experiment config JSON")
    sub.add_argument("--out", help="output path (default under "
                                   f"${ENV_OUTPUT_DIR} or .)")
    if seed:
        sub.add_argument("--seed", type=int, help="override base seed")
    if reps:
        sub.add_argument("--reps", type=int, help="override repetitions")
    if jobs:
        sub.add_argument("--jobs", type=int, default=1,
                         help="parallel repetition workers (default 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="boanneal",
                     description="schedule optimization experiment harness")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("optimize", help="run a configured experiment")
    _add_common(p, reps=True, jobs=True)
    p.set_defaults(func=cmd_optimize)

    p = subs.add_parser("simulate", help="evaluate one fixed protocol")
    _add_common(p)
    p.add_argument("--theta", help="comma-separated parameter values "
                                   "(default: linear-equivalent)")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("gap-landscape", help="tabulate spectral gaps")
    _add_common(p, seed=False)
    p.add_argument("--grid", type=int, default=101, help="s grid points")
    p.add_argument("--lam-grid", type=int, default=41,
                   help="lambda grid points (reverse annealing)")
    p.set_defaults(func=cmd_gap_landscape)

    p = subs.add_parser("graphs", help="unit-disk graph utilities")
    gsubs = p.add_subparsers(dest="graphs_command", required=True)

    g = gsubs.add_parser("generate", help="enumerate lattice subgraphs")
    g.add_argument("--rows", type=int, default=4)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--occupancy", default="9,10",
                   help="comma-separated vertex counts")
    _add_common(g, config=False)
    g.set_defaults(func=cmd_graphs_generate)

    g = gsubs.add_parser("filter",
                         help="keep unique-MIS, non-isomorphic graphs")
    g.add_argument("--in", dest="infile", required=True)
    _add_common(g, config=False, seed=False)
    g.set_defaults(func=cmd_graphs_filter)

    g = gsubs.add_parser("hp", help="hardness parameters of a graph set")
    g.add_argument("--in", dest="infile", required=True)
    _add_common(g, config=False, seed=False)
    g.set_defaults(func=cmd_graphs_hp)

    p = subs.add_parser("evaluate-samples",
                        help="score measured bitstrings against a graph")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--samples", required=True, help="bitstring sample file")
    p.add_argument("--alpha", type=float, default=1.2,
                   help="independence penalty weight")
    _add_common(p, config=False, seed=False)
    p.set_defaults(func=cmd_evaluate_samples)

    p = subs.add_parser("aggregate", help="summarize a record stream")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--metric", default="best",
                   choices=("best", "final", "first"))
    _add_common(p, config=False, seed=False)
    p.set_defaults(func=cmd_aggregate)

    p = subs.add_parser("emit", help="write CSV plot data")
    p.add_argument("--kind", required=True,
                   choices=("scaling", "best-vs-evaluations", "gap-landscape",
                            "control-path", "instantaneous", "mis-histogram",
                            "excitations"))
    p.add_argument("--in", dest="infile", action="append",
                   help="record stream (repeatable for scaling)")
    p.add_argument("--graph", help="graph JSON file (histogram/excitations)")
    p.add_argument("--samples", help="sample file (histogram/excitations)")
    p.add_argument("--alpha", type=float, default=1.2)
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--lam-grid", type=int, default=41)
    p.add_argument("--theta", help="parameters for instantaneous traces")
    _add_common(p)
    p.set_defaults(func=cmd_emit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args) or 0
    except (_UsageError, ConfigError, SampleFormatError) as exc:
        errors = getattr(exc, "errors", None)
        if errors:
            print("invalid input:", file=sys.stderr)
            for message in errors:
                print(f"  - {message}", file=sys.stderr)
        else:
            print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
