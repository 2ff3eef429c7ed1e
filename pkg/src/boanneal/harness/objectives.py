"""Wiring from an ExperimentConfig to a maximizable Objective.

Each repetition gets its own Objective closure: deterministic for a given
parameter vector (sampled figures of merit derive their shot seed from the
repetition seed and a hash of theta, as the optimizer contract requires),
with repetitions decorrelated through their seeds.
"""

import hashlib
import math

import numpy as np

from .. import pspin, schedule
from ..openquantum import (
    DEFAULT_BETA,
    DEFAULT_OMEGA_C,
    OhmicBath,
    beta_from_temperature_mk,
    evolve_ame,
    fidelity_mixed,
)
from ..optimizer import Objective
from ..rydberg import (
    RydbergParams,
    evolve_rydberg,
    fom_top_quantile,
    load_graph,
    mis_energy,
    p_mis,
    p_mis_exact,
    sample,
)
from ..schedule import Family, ParameterVector, ScheduleSpec, Transform
from .config import ExperimentConfig, FomKind, Problem, RydbergDef

#: minimum observation noise reported for sampled figures of merit
SIGMA_FLOOR = 1e-6

#: search box for direct pulse-parameter optimization on Rydberg arrays:
#: (delta_i, delta_f, omega_max, tau_omega / t_f)
PULSE_BOUNDS = ((-60.0, -5.0), (5.0, 125.0), (1.0, 15.8), (0.02, 0.45))


def _shot_seed(rep_seed: int, theta) -> int:
    payload = np.ascontiguousarray(np.asarray(theta, dtype=float)).tobytes()
    h = hashlib.blake2b(payload, digest_size=8).digest()
    return (int.from_bytes(h, "big") + 0x9E3779B9 * (rep_seed + 1)) % 2**63


def schedule_specs(config: ExperimentConfig) -> list:
    """One ScheduleSpec per configured control, sharing the protocol t_f."""
    specs = []
    pulse_index = 0
    for sd in config.schedules:
        family = Family(sd.family)
        kwargs = dict(
            family=family,
            n_params=sd.n_params,
            t_final=config.system.t_f,
            zeta=sd.zeta,
            transform=Transform(sd.transform),
        )
        if family is Family.BANG_BANG:
            kwargs["pulse_half"] = pulse_index
            pulse_index += 1
        specs.append(ScheduleSpec(**kwargs))
    return specs


def split_theta(specs, theta):
    """Slice a concatenated parameter vector into per-control pieces."""
    theta = np.asarray(theta, dtype=float)
    out, k = [], 0
    for spec in specs:
        out.append(theta[k:k + spec.n_params])
        k += spec.n_params
    if k != theta.size:
        raise ValueError(f"expected {k} parameters, got {theta.size}")
    return out


def concatenated_bounds(specs) -> tuple:
    bnds = []
    for spec in specs:
        bnds.extend(schedule.bounds(spec))
    return tuple(bnds)


def baseline_theta(specs):
    """Parameters reproducing the un-optimized (linear ramp) protocol,
    or None when a family has no such point (bang-bang pulses)."""
    parts = []
    for spec in specs:
        if spec.family is Family.BANG_BANG:
            return None
        if spec.family is not Family.LINEAR:
            parts.extend(schedule.linear_equivalent_params(spec))
    return tuple(parts)


def pspin_system(config: ExperimentConfig) -> pspin.PSpinSystem:
    sysd = config.system
    if config.problem is Problem.PSPIN_QA:
        mode = pspin.Mode.QA_DEPENDENT
    elif config.problem is Problem.PSPIN_QA_INDEPENDENT:
        families = {sd.family for sd in config.schedules}
        mode = (pspin.Mode.BANG_BANG if families == {"bang_bang"}
                else pspin.Mode.QA_INDEPENDENT)
    elif config.problem is Problem.PSPIN_RA:
        mode = pspin.Mode.RA
    elif config.problem is Problem.PSPIN_AME:
        mode = (pspin.Mode.QA_DEPENDENT if len(config.schedules) == 1
                else pspin.Mode.RA)
    else:
        raise ValueError(f"{config.problem.value} is not a p-spin problem")
    return pspin.PSpinSystem(sysd.n_spins, sysd.p, sysd.gamma, sysd.c, mode)


def build_bath(config: ExperimentConfig) -> OhmicBath:
    bd = config.bath
    beta = (beta_from_temperature_mk(bd.temperature_mk)
            if bd.temperature_mk is not None else DEFAULT_BETA)
    omega_c = bd.omega_c if bd.omega_c is not None else DEFAULT_OMEGA_C
    return OhmicBath(eta=bd.eta, beta=beta, omega_c=omega_c)


def _pspin_fom(config, system, probabilities, target_diag, rep_seed, theta):
    """Score a final-state population vector; returns (value, sigma)."""
    kind, n_shots = config.fom.kind, config.n_shots
    probabilities = np.clip(probabilities.real, 0.0, None)
    probabilities = probabilities / probabilities.sum()
    if kind is FomKind.FIDELITY:
        mags = pspin._terms(system).magnetizations
        (idx,) = np.nonzero(mags == system.n_spins)
        p_target = float(probabilities[idx[0]])
        if n_shots is None:
            return p_target, 0.0
        rng = np.random.default_rng(_shot_seed(rep_seed, theta))
        hits = rng.binomial(n_shots, p_target)
        p_hat = hits / n_shots
        sigma = math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n_shots)
        return p_hat, max(sigma, SIGMA_FLOOR)
    if n_shots is None:
        if kind is FomKind.ENERGY:
            return float(-(probabilities @ target_diag)), 0.0
        raise ValueError(f"{kind.value} needs n_shots")
    rng = np.random.default_rng(_shot_seed(rep_seed, theta))
    counts = rng.multinomial(n_shots, probabilities)
    energies = np.repeat(target_diag, counts)
    if kind is FomKind.ENERGY:
        sigma = float(energies.std(ddof=1)) / math.sqrt(n_shots)
        return float(-energies.mean()), max(sigma, SIGMA_FLOOR)
    x = 0.5 if kind is FomKind.H_HALF else config.fom.x
    k = math.ceil(x * n_shots)
    lowest = np.sort(energies)[:k]
    sigma = float(lowest.std(ddof=1) if k > 1 else 0.0) / math.sqrt(k)
    return float(-lowest.mean()), max(sigma, SIGMA_FLOOR)


def _build_pspin_objective(config: ExperimentConfig, rep_seed: int) -> Objective:
    system = pspin_system(config)
    specs = schedule_specs(config)
    target_diag = np.diag(pspin.target_hamiltonian(system)).real
    bang_bang = system.mode is pspin.Mode.BANG_BANG
    open_system = config.problem is Problem.PSPIN_AME
    bath = build_bath(config) if open_system else None
    rtol, atol = config.integrator.rtol, config.integrator.atol

    def fn(theta):
        if bang_bang:
            controls = tuple(float(x) for x in theta)
        else:
            parts = split_theta(specs, theta)
            controls = tuple(schedule.as_callable(spec, part)
                             for spec, part in zip(specs, parts))
        if open_system:
            rho = evolve_ame(
                system, controls, config.system.t_f, bath,
                n_levels=config.bath.n_levels,
                include_lamb_shift=config.bath.lamb_shift,
                rtol=rtol if rtol is not None else 1e-7,
                atol=atol if atol is not None else 1e-10,
            )
            if config.fom.kind is FomKind.FIDELITY and config.n_shots is None:
                return fidelity_mixed(rho, system), 0.0
            probs = rho.populations
        else:
            state = pspin.evolve(
                system, controls, config.system.t_f,
                rtol=rtol if rtol is not None else 1e-11,
                atol=atol if atol is not None else 1e-13,
            )
            probs = state.probabilities()
        return _pspin_fom(config, system, probs, target_diag, rep_seed, theta)

    return Objective(
        fn=fn,
        bounds=concatenated_bounds(specs),
        initial_probe=baseline_theta(specs),
        name=f"{config.problem.value}/{config.fom.kind.value}",
    )


def _all_state_energies(graph, alpha=1.2) -> np.ndarray:
    n = graph.n_vertices
    out = np.empty(2 ** n)
    for idx in range(2 ** n):
        bits = format(idx, f"0{n}b")
        out[idx] = mis_energy(bits, graph, alpha)
    return out


def rydberg_params_from_theta(config: ExperimentConfig, spec, bnds, theta):
    ryd: RydbergDef = config.rydberg
    t_f = config.system.t_f
    if ryd.optimize_pulse:
        # theta[3] is the ramp time in absolute units; the bounds were
        # already scaled from fractions of t_f when the objective was built
        d_i, d_f, om, tau = (float(x) for x in theta)
        return RydbergParams(t_f=t_f, omega_max=om, tau_omega=tau,
                             delta_i=d_i, delta_f=d_f)
    if spec is not None:
        pv = ParameterVector(tuple(float(x) for x in theta), bnds)
        return RydbergParams(
            t_f=t_f, omega_max=ryd.omega_max, tau_omega=ryd.tau_omega,
            delta_i=ryd.delta_i, delta_f=ryd.delta_f,
            delta_interior=pv, low_pass=spec.family is Family.LOW_PASS,
        )
    return RydbergParams(t_f=t_f, omega_max=ryd.omega_max,
                         tau_omega=ryd.tau_omega, delta_i=ryd.delta_i,
                         delta_f=ryd.delta_f)


def _build_rydberg_objective(config: ExperimentConfig, rep_seed: int) -> Objective:
    ryd = config.rydberg
    graph = load_graph(ryd.graph_path)
    t_f = config.system.t_f
    rtol = config.integrator.rtol if config.integrator.rtol is not None else 1e-10
    atol = config.integrator.atol if config.integrator.atol is not None else 1e-12
    kind, n_shots = config.fom.kind, config.n_shots

    if ryd.optimize_pulse:
        spec, bnds = None, tuple(
            (lo * t_f, hi * t_f) if k == 3 else (lo, hi)
            for k, (lo, hi) in enumerate(PULSE_BOUNDS)
        )
        tau = ryd.tau_omega if ryd.tau_omega is not None else 0.1 * t_f
        probe = (ryd.delta_i, ryd.delta_f, ryd.omega_max, tau)
        probe = tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(probe, bnds))
    elif config.schedules:
        [spec] = schedule_specs(config)
        bnds = tuple(schedule.bounds(spec))
        probe = tuple(schedule.linear_equivalent_params(spec))
    else:
        spec, bnds, probe = None, (), ()

    energies = _all_state_energies(graph) if (
        kind is FomKind.ENERGY and n_shots is None) else None

    def fn(theta):
        params = rydberg_params_from_theta(config, spec, bnds, theta)
        psi = evolve_rydberg(graph, params, rtol=rtol, atol=atol)
        if n_shots is None:
            if kind is FomKind.P_MIS:
                return p_mis_exact(psi, graph), 0.0
            if kind is FomKind.ENERGY:
                return float(-(np.abs(psi) ** 2 @ energies)), 0.0
            raise ValueError(f"{kind.value} needs n_shots")
        shots = sample(psi, n_shots, seed=_shot_seed(rep_seed, theta))
        if kind is FomKind.P_MIS:
            p_hat = p_mis(shots, graph)
            sigma = math.sqrt(max(p_hat * (1 - p_hat), 0.0) / n_shots)
            return p_hat, max(sigma, SIGMA_FLOOR)
        per_shot = np.repeat(
            [mis_energy(b, graph) for b, _ in shots.entries],
            [c for _, c in shots.entries]).astype(float)
        if kind is FomKind.ENERGY:
            sigma = float(per_shot.std(ddof=1)) / math.sqrt(n_shots)
            return float(-per_shot.mean()), max(sigma, SIGMA_FLOOR)
        x = 0.5 if kind is FomKind.H_HALF else config.fom.x
        value = fom_top_quantile(shots, graph, x=x)
        k = math.ceil(x * n_shots)
        lowest = np.sort(per_shot)[:k]
        sigma = float(lowest.std(ddof=1) if k > 1 else 0.0) / math.sqrt(k)
        return value, max(sigma, SIGMA_FLOOR)

    return Objective(
        fn=fn, bounds=bnds, initial_probe=probe,
        name=f"rydberg/{kind.value}",
    )


def build_objective(config: ExperimentConfig, rep_seed: int) -> Objective:
    """Objective for one repetition, deterministic given (config, rep_seed)."""
    if config.problem is Problem.RYDBERG_MIS:
        return _build_rydberg_objective(config, rep_seed)
    return _build_pspin_objective(config, rep_seed)
