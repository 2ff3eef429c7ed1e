"""Experiment configuration: parsing, validation, canonical digests.

A configuration is a plain JSON document (see schemas/experiment-config
.schema.json).  Parsing is strict -- unknown keys and malformed values are
reported all at once rather than one at a time -- and every config has a
canonical digest used to key its output stream.
"""

import dataclasses
import enum
import hashlib
import json
from dataclasses import dataclass, field

CONFIG_VERSION = 1

#: fields left out of the digest so that extending a run keeps its identity
_DIGEST_EXCLUDED = ("repetitions",)


class Problem(str, enum.Enum):
    PSPIN_QA = "pspin_qa"
    PSPIN_QA_INDEPENDENT = "pspin_qa_independent"
    PSPIN_RA = "pspin_ra"
    PSPIN_AME = "pspin_ame"
    RYDBERG_MIS = "rydberg_mis"


class OptimizerKind(str, enum.Enum):
    BO = "bo"
    SPSA = "spsa"
    RANDOM = "random"
    NONE = "none"


class FomKind(str, enum.Enum):
    FIDELITY = "fidelity"
    ENERGY = "energy"
    QUANTILE_ENERGY = "quantile_energy"
    H_HALF = "h_half"
    P_MIS = "p_mis"


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violation found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class SystemDef:
    n_spins: int = 15
    p: int = 3
    gamma: float = 5.0
    c: float = 0.8
    t_f: float = 3.0


@dataclass(frozen=True)
class ScheduleDef:
    family: str = "linear"
    n_params: int = 0
    zeta: float = 2.0
    transform: str = "identity"


@dataclass(frozen=True)
class OptimizerDef:
    kind: OptimizerKind = OptimizerKind.BO
    n_random_init: int = 9
    n_acquisition_iters: int = 50
    n_evals: int = 60           # random search / SPSA budget
    kappa_start: float = 2.0
    kappa_end: float = 0.01
    kappa_decay_start: int = 25


@dataclass(frozen=True)
class FomDef:
    kind: FomKind = FomKind.FIDELITY
    x: float = 0.5              # quantile fraction, used by quantile_energy


@dataclass(frozen=True)
class BathDef:
    eta: float = 0.0
    temperature_mk: float | None = None
    omega_c: float | None = None
    n_levels: int = 30
    lamb_shift: bool = True


@dataclass(frozen=True)
class RydbergDef:
    graph_path: str = ""
    omega_max: float = 9.0
    tau_omega: float | None = None
    delta_i: float = -30.0
    delta_f: float = 60.0
    optimize_pulse: bool = False


@dataclass(frozen=True)
class IntegratorDef:
    rtol: float | None = None
    atol: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: Problem
    system: SystemDef = SystemDef()
    schedules: tuple = ()
    optimizer: OptimizerDef = OptimizerDef()
    fom: FomDef = FomDef()
    n_shots: int | None = None
    repetitions: int = 80
    base_seed: int = 0
    bath: BathDef | None = None
    rydberg: RydbergDef | None = None
    integrator: IntegratorDef = IntegratorDef()

    def to_dict(self) -> dict:
        d = {
            "version": CONFIG_VERSION,
            "problem": self.problem.value,
            "system": dataclasses.asdict(self.system),
            "schedules": [dataclasses.asdict(s) for s in self.schedules],
            "optimizer": {**dataclasses.asdict(self.optimizer),
                          "kind": self.optimizer.kind.value},
            "fom": {**dataclasses.asdict(self.fom),
                    "kind": self.fom.kind.value},
            "n_shots": self.n_shots,
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "integrator": dataclasses.asdict(self.integrator),
        }
        if self.bath is not None:
            d["bath"] = dataclasses.asdict(self.bath)
        if self.rydberg is not None:
            d["rydberg"] = dataclasses.asdict(self.rydberg)
        return d


_TOP_KEYS = {
    "version", "problem", "system", "schedules", "optimizer", "fom",
    "n_shots", "repetitions", "base_seed", "bath", "rydberg", "integrator",
}


def _build_section(cls, raw, label, errors):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        errors.append(f"{label} must be an object")
        return cls()
    known = {f.name for f in dataclasses.fields(cls)}
    clean = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(f"unknown key {label}.{key}")
        else:
            clean[key] = value
    try:
        return cls(**clean)
    except (TypeError, ValueError) as exc:
        errors.append(f"bad {label} section: {exc}")
        return cls()


def _parse_enum(enum_cls, raw, label, errors, default):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        errors.append(f"{label} must be one of: {allowed} (got {raw!r})")
        return default


def from_dict(raw: dict) -> ExperimentConfig:
    """Parse a JSON document into a validated ExperimentConfig.

    Raises ConfigError carrying *every* problem found, not just the first.
    """
    errors = []
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])
    for key in raw:
        if key not in _TOP_KEYS:
            errors.append(f"unknown key {key}")
    if raw.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        errors.append(
            f"unsupported config version {raw.get('version')!r} "
            f"(this build reads version {CONFIG_VERSION})"
        )

    problem = _parse_enum(Problem, raw.get("problem"), "problem", errors,
                          Problem.PSPIN_QA)
    system = _build_section(SystemDef, raw.get("system"), "system", errors)
    integrator = _build_section(IntegratorDef, raw.get("integrator"),
                                "integrator", errors)

    schedules = []
    raw_schedules = raw.get("schedules", [])
    if not isinstance(raw_schedules, list):
        errors.append("schedules must be a list")
        raw_schedules = []
    for k, sd in enumerate(raw_schedules):
        schedules.append(_build_section(ScheduleDef, sd,
                                        f"schedules[{k}]", errors))

    opt_raw = dict(raw.get("optimizer") or {})
    opt_kind = _parse_enum(OptimizerKind, opt_raw.pop("kind", "bo"),
                           "optimizer.kind", errors, OptimizerKind.BO)
    optimizer = _build_section(OptimizerDef, opt_raw, "optimizer", errors)
    optimizer = dataclasses.replace(optimizer, kind=opt_kind)

    fom_raw = dict(raw.get("fom") or {})
    fom_kind = _parse_enum(FomKind, fom_raw.pop("kind", "fidelity"),
                           "fom.kind", errors, FomKind.FIDELITY)
    fom = _build_section(FomDef, fom_raw, "fom", errors)
    fom = dataclasses.replace(fom, kind=fom_kind)

    bath = None
    if raw.get("bath") is not None:
        bath = _build_section(BathDef, raw["bath"], "bath", errors)
    rydberg = None
    if raw.get("rydberg") is not None:
        rydberg = _build_section(RydbergDef, raw["rydberg"], "rydberg", errors)

    config = ExperimentConfig(
        problem=problem,
        system=system,
        schedules=tuple(schedules),
        optimizer=optimizer,
        fom=fom,
        n_shots=raw.get("n_shots"),
        repetitions=raw.get("repetitions", 80),
        base_seed=raw.get("base_seed", 0),
        bath=bath,
        rydberg=rydberg,
        integrator=integrator,
    )
    errors.extend(validate(config))
    if errors:
        raise ConfigError(errors)
    return config


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return from_dict(raw)


#: how many control schedules each problem takes (AME infers QA/RA from it)
_SCHEDULE_COUNTS = {
    Problem.PSPIN_QA: (1,),
    Problem.PSPIN_QA_INDEPENDENT: (2,),
    Problem.PSPIN_RA: (2,),
    Problem.PSPIN_AME: (1, 2),
    Problem.RYDBERG_MIS: (0, 1),
}

_SCHEDULE_FAMILIES = {
    "linear", "real", "cubic", "low_pass", "fourier", "bang_bang",
}

#: figures of merit that only make sense on sampled bitstrings
_SHOT_FOMS = (FomKind.QUANTILE_ENERGY, FomKind.H_HALF)


def validate(config: ExperimentConfig) -> list:
    """Return a list describing every invariant violation (empty if none)."""
    errors = []
    sysd, fom = config.system, config.fom
    is_rydberg = config.problem is Problem.RYDBERG_MIS

    if config.repetitions < 1:
        errors.append(f"repetitions must be >= 1, got {config.repetitions}")
    if not isinstance(config.base_seed, int):
        errors.append("base_seed must be an integer")
    if config.n_shots is not None and config.n_shots < 1:
        errors.append(f"n_shots must be >= 1 or null, got {config.n_shots}")

    if sysd.n_spins < 1:
        errors.append(f"system.n_spins must be >= 1, got {sysd.n_spins}")
    if sysd.p < 2:
        errors.append(f"system.p must be >= 2, got {sysd.p}")
    if sysd.gamma <= 0:
        errors.append(f"system.gamma must be positive, got {sysd.gamma}")
    if sysd.t_f <= 0:
        errors.append(f"system.t_f must be positive, got {sysd.t_f}")
    if config.problem in (Problem.PSPIN_RA, Problem.PSPIN_AME):
        if not 0.0 < sysd.c < 1.0:
            errors.append(f"system.c must lie in (0, 1), got {sysd.c}")

    allowed = _SCHEDULE_COUNTS[config.problem]
    if len(config.schedules) not in allowed:
        errors.append(
            f"{config.problem.value} takes {' or '.join(map(str, allowed))} "
            f"schedule(s), got {len(config.schedules)}"
        )
    for k, sd in enumerate(config.schedules):
        if sd.family not in _SCHEDULE_FAMILIES:
            errors.append(f"schedules[{k}].family {sd.family!r} is unknown")
            continue
        if sd.family == "linear" and sd.n_params != 0:
            errors.append(f"schedules[{k}]: linear takes no parameters")
        if sd.family == "bang_bang" and sd.n_params != 1:
            errors.append(f"schedules[{k}]: bang_bang takes one parameter")
        if sd.family not in ("linear", "bang_bang") and sd.n_params < 1:
            errors.append(f"schedules[{k}].n_params must be >= 1")
        if sd.zeta <= 0:
            errors.append(f"schedules[{k}].zeta must be positive")
        if sd.transform not in ("identity", "one_minus"):
            errors.append(f"schedules[{k}].transform {sd.transform!r} unknown")
    if config.problem is Problem.PSPIN_QA_INDEPENDENT:
        families = {sd.family for sd in config.schedules}
        if "bang_bang" in families and families != {"bang_bang"}:
            errors.append("bang_bang cannot be mixed with other families")

    opt = config.optimizer
    if opt.n_random_init < 0:
        errors.append("optimizer.n_random_init must be >= 0")
    if opt.n_acquisition_iters < 0:
        errors.append("optimizer.n_acquisition_iters must be >= 0")
    if opt.n_evals < 1:
        errors.append("optimizer.n_evals must be >= 1")
    if opt.kind is not OptimizerKind.NONE and not _has_free_parameters(config):
        errors.append(
            f"optimizer {opt.kind.value} needs at least one free parameter; "
            "use optimizer.kind = none for fixed protocols"
        )

    if not 0.0 < fom.x <= 1.0:
        errors.append(f"fom.x must lie in (0, 1], got {fom.x}")
    if is_rydberg:
        if fom.kind is FomKind.FIDELITY:
            errors.append("fidelity is not defined for rydberg_mis; "
                          "use p_mis, energy, h_half or quantile_energy")
    else:
        if fom.kind is FomKind.P_MIS:
            errors.append("p_mis requires a graph problem (rydberg_mis)")
    if fom.kind in _SHOT_FOMS and config.n_shots is None:
        errors.append(f"{fom.kind.value} needs n_shots (it ranks samples)")

    if config.bath is not None:
        if config.bath.eta < 0:
            errors.append(f"bath.eta must be >= 0, got {config.bath.eta}")
        if (config.bath.temperature_mk is not None
                and config.bath.temperature_mk <= 0):
            errors.append("bath.temperature_mk must be positive")
        if config.bath.omega_c is not None and config.bath.omega_c <= 0:
            errors.append("bath.omega_c must be positive")
        if config.bath.n_levels < 2:
            errors.append("bath.n_levels must be >= 2")
    if config.problem is Problem.PSPIN_AME and config.bath is None:
        errors.append("pspin_ame needs a bath section (eta may be 0)")
    if config.bath is not None and config.problem is not Problem.PSPIN_AME:
        errors.append("only pspin_ame accepts a bath section")

    if is_rydberg:
        if config.rydberg is None:
            errors.append("rydberg_mis needs a rydberg section")
        else:
            ryd = config.rydberg
            if not ryd.graph_path:
                errors.append("rydberg.graph_path is required")
            if ryd.omega_max < 0:
                errors.append("rydberg.omega_max must be >= 0")
            if not ryd.delta_i < 0 < ryd.delta_f:
                errors.append("rydberg detuning must sweep negative to "
                              f"positive, got {ryd.delta_i} -> {ryd.delta_f}")
            if ryd.optimize_pulse and config.schedules:
                errors.append("optimize_pulse replaces the schedule list; "
                              "drop the schedules section")
    elif config.rydberg is not None:
        errors.append("only rydberg_mis accepts a rydberg section")

    for name in ("rtol", "atol"):
        value = getattr(config.integrator, name)
        if value is not None and not 0 < value < 1:
            errors.append(f"integrator.{name} must lie in (0, 1)")
    return errors


def _has_free_parameters(config: ExperimentConfig) -> bool:
    if (config.problem is Problem.RYDBERG_MIS and config.rydberg is not None
            and config.rydberg.optimize_pulse):
        return True
    return sum(sd.n_params for sd in config.schedules) > 0


def canonical_json(config: ExperimentConfig) -> str:
    """Deterministic serialization used for hashing."""
    d = config.to_dict()
    for key in _DIGEST_EXCLUDED:
        d.pop(key, None)
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def config_digest(config: ExperimentConfig) -> str:
    """Hex digest identifying the experiment (repetition count excluded,
    so extending a run appends to the same stream)."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()
