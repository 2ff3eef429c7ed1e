"""Tests for unit-disk graphs, MIS counting, blockade dynamics and scoring."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from boanneal.rydberg import (
    DEFAULT_C6,
    DEFAULT_LATTICE_A,
    MISResult,
    RydbergParams,
    SampleFormatError,
    SampleSet,
    UnitDiskGraph,
    approximation_ratio,
    are_isomorphic,
    blockade_radius,
    branch_and_bound_mis,
    brute_force_mis,
    delta_schedule,
    evolve_rydberg,
    excitation_probabilities,
    filter_unique_mis_noniso,
    fom_top_quantile,
    generate_lattice_udgs,
    hardness_parameter,
    ingest_samples,
    load_graph,
    mis_energy,
    omega_schedule,
    p_mis,
    p_mis_exact,
    rydberg_hamiltonian,
    sample,
    save_graph,
)
from boanneal.rydberg.scoring import is_independent
from boanneal.schedule import Family, ParameterVector, ScheduleSpec, bounds


def udg(points, r_d=1.5):
    return UnitDiskGraph(tuple((float(x), float(y)) for x, y in points), r_d)


def triangle():
    return udg([(0, 0), (1, 0), (0.5, 0.9)])


def path3():
    return udg([(0, 0), (1, 0), (2, 0)])


def random_udg(rng, n):
    pts = rng.uniform(0.0, math.sqrt(n), size=(n, 2))
    return udg([tuple(p) for p in pts], r_d=1.0)


@pytest.fixture(scope="module")
def eleven():
    graphs = generate_lattice_udgs(4, 3, occupancy=[9, 10])
    return filter_unique_mis_noniso(graphs)


# ---------------------------------------------------------------------------
# graph construction


def test_edges_follow_distance_threshold():
    a = DEFAULT_LATTICE_A
    g = udg([(0, 0), (a, 0), (a, a), (3 * a, 0)], r_d=1.6 * a)
    edges = set(g.edges)
    assert (0, 1) in edges          # distance a
    assert (0, 2) in edges          # distance sqrt(2) a < 1.6 a
    assert (1, 3) not in edges      # distance 2a
    assert (0, 3) not in edges      # distance 3a
    assert g.distance(0, 2) == pytest.approx(math.sqrt(2) * a)


def test_full_2x2_block_is_complete():
    [g] = generate_lattice_udgs(2, 2, occupancy=4)
    assert g.n_vertices == 4
    assert len(g.edges) == 6


def test_lattice_positions_on_grid():
    [g] = generate_lattice_udgs(3, 2, occupancy=6)
    a = DEFAULT_LATTICE_A
    for x, y in g.positions:
        assert abs(x / a - round(x / a)) < 1e-12
        assert abs(y / a - round(y / a)) < 1e-12


def test_exhaustive_generation_counts():
    assert len(generate_lattice_udgs(2, 2, occupancy=2)) == 6
    assert len(generate_lattice_udgs(2, 2, occupancy=[1, 2])) == 10
    # binomial(9, 7) subsets of the 3x3 board
    assert len(generate_lattice_udgs(3, 3, occupancy=7)) == 36


def test_seeded_generation_is_deterministic():
    g1 = generate_lattice_udgs(4, 4, occupancy=[8, 9], seed=7)
    g2 = generate_lattice_udgs(4, 4, occupancy=[8, 9], seed=7)
    g3 = generate_lattice_udgs(4, 4, occupancy=[8, 9], seed=8)
    assert len(g1) == 2   # one sample per requested size
    assert g1 == g2
    assert g1 != g3


# ---------------------------------------------------------------------------
# MIS enumeration and hardness


def test_counts_on_small_graphs():
    res = brute_force_mis(triangle())
    assert isinstance(res, MISResult)
    assert res.mis_size == 1
    assert res.counts == (1, 3)
    assert res.n_mis == 3

    res = brute_force_mis(path3())
    assert res.mis_size == 2
    assert res.counts == (1, 3, 1)
    assert res.maximum_sets == (frozenset({0, 2}),)

    res = brute_force_mis(udg([(0, 0)]))
    assert res.mis_size == 1
    assert res.counts == (1, 1)


def test_counts_on_pentagon():
    # 5-cycle: five independent pairs, five singletons
    r = 1.0
    pts = [(math.cos(2 * math.pi * k / 5), math.sin(2 * math.pi * k / 5))
           for k in range(5)]
    g = udg(pts, r_d=1.3 * r)
    assert len(g.edges) == 5
    res = brute_force_mis(g)
    assert res.mis_size == 2
    assert res.counts == (1, 5, 5)


def test_edgeless_counts_are_binomials():
    n = 18
    g = udg([(3.0 * k, 0.0) for k in range(n)], r_d=1.0)
    res = brute_force_mis(g)
    assert res.mis_size == n
    assert res.counts == tuple(math.comb(n, k) for k in range(n + 1))


def test_hardness_parameter_oracles():
    assert hardness_parameter(triangle()) == pytest.approx(1.0 / 3.0)
    assert hardness_parameter(path3()) == pytest.approx(1.5)
    assert hardness_parameter(udg([(0, 0)])) == pytest.approx(1.0)


def test_two_mis_algorithms_agree():
    rng = np.random.default_rng(20240911)
    for _ in range(40):
        g = random_udg(rng, int(rng.integers(2, 15)))
        res = brute_force_mis(g)
        size, n_mis, n_below = branch_and_bound_mis(g)
        assert size == res.mis_size
        assert n_mis == res.counts[-1]
        assert n_below == res.counts[-2]


def test_enumeration_guard():
    g = udg([(3.0 * k, 0.0) for k in range(31)], r_d=1.0)
    with pytest.raises(ValueError):
        brute_force_mis(g)


# ---------------------------------------------------------------------------
# isomorphism and filtering


def test_relabeled_translated_copy_is_isomorphic():
    g = udg([(0, 0), (1, 0), (0, 1), (2, 1)])
    perm = [2, 0, 3, 1]
    moved = udg([(g.positions[k][0] + 7.0, g.positions[k][1] - 3.0)
                 for k in perm], r_d=g.r_d)
    assert are_isomorphic(g, moved)


def test_different_degree_sequences_rejected():
    assert not are_isomorphic(triangle(), path3())


def test_same_signature_different_structure():
    # hexagon vs two triangles: both 2-regular on 6 vertices
    hexagon = udg([(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3))
                   for k in range(6)], r_d=1.2)
    two_triangles = udg([(0, 0), (1, 0), (0.5, 0.9),
                         (10, 0), (11, 0), (10.5, 0.9)], r_d=1.2)
    assert len(hexagon.edges) == 6 and len(two_triangles.edges) == 6
    assert not are_isomorphic(hexagon, two_triangles)


def test_isomorphism_guard():
    big = udg([(3.0 * k, 0.0) for k in range(17)], r_d=1.0)
    with pytest.raises(ValueError):
        are_isomorphic(big, big)


def test_filter_keeps_unique_mis_and_dedups(eleven):
    # triangle has three maximum sets -> dropped; path has one -> kept,
    # and a congruent copy of the path collapses onto it
    shifted = udg([(0, 5), (1, 5), (2, 5)])
    kept = filter_unique_mis_noniso([triangle(), path3(), shifted])
    assert len(kept) == 1
    assert brute_force_mis(kept[0]).n_mis == 1

    for g in eleven:
        res = brute_force_mis(g)
        assert res.counts[-1] == 1
        assert res.mis_size == 4
    for i in range(len(eleven)):
        for j in range(i + 1, len(eleven)):
            assert not are_isomorphic(eleven[i], eleven[j])


def test_blockade_radius_value_and_window():
    rb = blockade_radius(DEFAULT_C6, 15.8)
    assert rb == pytest.approx(8.37, abs=0.01)
    a = DEFAULT_LATTICE_A
    assert math.sqrt(2) * a < rb < 2 * a
    with pytest.raises(ValueError):
        blockade_radius(DEFAULT_C6, 0.0)


# ---------------------------------------------------------------------------
# pulse parameters and schedules


def test_params_validation():
    with pytest.raises(ValueError):
        RydbergParams(t_f=0.0)
    with pytest.raises(ValueError):
        RydbergParams(tau_omega=0.4)        # >= t_f / 2
    with pytest.raises(ValueError):
        RydbergParams(delta_i=1.0)
    with pytest.raises(ValueError):
        RydbergParams(delta_f=-1.0)
    with pytest.raises(ValueError):
        RydbergParams(omega_max=-2.0)
    with pytest.raises(ValueError):
        RydbergParams(c6=0.0)
    # default ramp time is a tenth of the protocol
    assert RydbergParams(t_f=2.0).tau_omega == pytest.approx(0.2)


def test_omega_trapezoid():
    p = RydbergParams(t_f=1.0, omega_max=6.0, tau_omega=0.2)
    om = omega_schedule(p)
    assert om(0.0) == pytest.approx(0.0)
    assert om(0.1) == pytest.approx(3.0)
    assert om(0.2) == pytest.approx(6.0)
    assert om(0.5) == pytest.approx(6.0)
    assert om(0.9) == pytest.approx(3.0)
    assert om(1.0) == pytest.approx(0.0)
    assert om(-0.5) == 0.0 and om(1.5) == 0.0


def test_delta_linear_sweep():
    p = RydbergParams(t_f=2.0, delta_i=-30.0, delta_f=60.0)
    de = delta_schedule(p)
    assert de(0.0) == pytest.approx(-30.0)
    assert de(2.0) == pytest.approx(60.0)
    assert de(1.0) == pytest.approx(15.0)


def test_delta_interior_reduces_to_linear_at_ramp_params():
    spec = ScheduleSpec(Family.REAL, n_params=2, t_final=2.0)
    pv = ParameterVector((1.0 / 3.0, 2.0 / 3.0), tuple(bounds(spec)))
    p = RydbergParams(t_f=2.0, delta_interior=pv)
    de = delta_schedule(p)
    lin = delta_schedule(RydbergParams(t_f=2.0))
    for t in np.linspace(0.0, 2.0, 17):
        assert de(t) == pytest.approx(lin(t), abs=1e-9)


def test_delta_low_pass_changes_shape():
    spec = ScheduleSpec(Family.LOW_PASS, n_params=2, t_final=2.0)
    bnds = tuple(bounds(spec))
    pv = ParameterVector((0.9, 0.15), bnds)
    smooth = delta_schedule(RydbergParams(t_f=2.0, delta_interior=pv,
                                          low_pass=True))
    kinked = delta_schedule(RydbergParams(
        t_f=2.0,
        delta_interior=ParameterVector((0.9, 0.15), bnds)))
    diffs = [abs(smooth(t) - kinked(t)) for t in np.linspace(0.1, 1.9, 21)]
    assert max(diffs) > 1.0


# ---------------------------------------------------------------------------
# Hamiltonian structure


def test_single_atom_hamiltonian():
    g = udg([(0, 0)])
    h = rydberg_hamiltonian(g, omega=4.0, delta=7.0).toarray()
    assert np.allclose(h, [[0.0, 2.0], [2.0, -7.0]])


def test_blockade_pair_diagonal():
    a = DEFAULT_LATTICE_A
    g = udg([(0, 0), (a, 0)], r_d=1.6 * a)
    v = DEFAULT_C6 / a**6
    h = rydberg_hamiltonian(g, omega=0.0, delta=60.0).toarray()
    assert np.allclose(np.diag(h), [0.0, -60.0, -60.0, -120.0 + v])
    assert v == pytest.approx(244.54, abs=0.01)


def test_distant_pair_interaction_negligible():
    g = udg([(0, 0), (100.0, 0)], r_d=1.0)
    h = rydberg_hamiltonian(g, omega=0.0, delta=0.0).toarray()
    assert 0 < h[3, 3] < 1e-5


def test_hamiltonian_guard():
    big = udg([(3.0 * k, 0.0) for k in range(17)], r_d=1.0)
    with pytest.raises(ValueError):
        rydberg_hamiltonian(big, omega=1.0, delta=0.0)


# ---------------------------------------------------------------------------
# dynamics


def test_single_atom_sweep_excites():
    g = udg([(0, 0)])
    psi = evolve_rydberg(g, RydbergParams())
    assert abs(np.vdot(psi, psi) - 1.0) < 1e-9
    # default sweep is only partially adiabatic for a lone atom
    assert 0.70 < abs(psi[1]) ** 2 < 0.75


def test_against_midpoint_exponential_stepping():
    a = DEFAULT_LATTICE_A
    g = udg([(0, 0), (a, 0), (2 * a, 0)], r_d=1.6 * a)   # 3-site path
    p = RydbergParams(t_f=0.7, omega_max=9.0)
    psi = evolve_rydberg(g, p)

    om, de = omega_schedule(p), delta_schedule(p)
    phi = np.zeros(8, complex)
    phi[0] = 1.0
    n_steps = 8000
    dt = p.t_f / n_steps
    for k in range(n_steps):
        t_mid = (k + 0.5) * dt
        h = rydberg_hamiltonian(g, om(t_mid), de(t_mid)).toarray()
        phi = expm(-1j * dt * h) @ phi
    assert np.max(np.abs(psi - phi)) < 1e-6


def test_zero_drive_stays_in_vacuum():
    g = udg([(0, 0), (1, 0)])
    psi = evolve_rydberg(g, RydbergParams(omega_max=0.0))
    assert abs(psi[0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_norm_conserved_on_lattice_graph(eleven):
    psi = evolve_rydberg(eleven[0], RydbergParams())
    assert abs(np.vdot(psi, psi).real - 1.0) < 1e-9


def test_cost_ground_state_is_the_mis(eleven):
    # with the drive off and a final detuning below the weakest blockade,
    # the diagonal is minimized exactly on the unique maximum set
    g = eleven[0]
    res = brute_force_mis(g)
    min_edge_v = min(DEFAULT_C6 / g.distance(i, j) ** 6 for i, j in g.edges)
    h = rydberg_hamiltonian(g, omega=0.0, delta=0.9 * min_edge_v)
    diag = h.diagonal().real
    idx = 0
    for v in res.maximum_sets[0]:
        idx |= 1 << (g.n_vertices - 1 - v)
    assert int(np.argmin(diag)) == idx


def test_linear_baseline_band_and_longer_protocol(eleven):
    g = eleven[0]
    quick = p_mis_exact(evolve_rydberg(g, RydbergParams(), rtol=1e-8,
                                       atol=1e-10), g)
    slow = p_mis_exact(evolve_rydberg(g, RydbergParams(t_f=4.0), rtol=1e-8,
                                      atol=1e-10), g)
    assert 0.10 < quick < 0.20
    assert slow > 0.7


# ---------------------------------------------------------------------------
# sampling


def test_sampling_counts_and_determinism():
    state = np.array([math.sqrt(0.3), math.sqrt(0.7)])
    s1 = sample(state, 2000, seed=3)
    s2 = sample(state, 2000, seed=3)
    s3 = sample(state, 2000, seed=4)
    assert s1 == s2 and s1 != s3
    assert sum(c for _, c in s1.entries) == 2000
    p1 = dict(s1.entries).get("1", 0) / 2000
    assert abs(p1 - 0.7) < 4 * math.sqrt(0.7 * 0.3 / 2000)


def test_sampling_guards():
    with pytest.raises(ValueError):
        sample(np.array([0.5, 0.5]), 10, seed=0)        # not normalized
    with pytest.raises(ValueError):
        sample(np.full(3, 1 / math.sqrt(3)), 10, seed=0)  # not 2**n long


# ---------------------------------------------------------------------------
# scoring


def far_apart(n):
    return udg([(4.0 * k, 0.0) for k in range(n)], r_d=1.0)


def test_mis_energy_examples():
    pair = udg([(0, 0), (1, 0)])
    assert mis_energy("00", pair) == 0.0
    assert mis_energy("10", pair) == -1.0
    assert mis_energy("11", pair) == pytest.approx(-0.8)
    assert mis_energy("111", far_apart(3)) == -3.0
    assert is_independent("10", pair)
    assert not is_independent("11", pair)


def test_p_mis_from_counts():
    g = path3()
    s = SampleSet.from_counts({"101": 6, "010": 2, "111": 2})
    assert p_mis(s, g) == pytest.approx(0.6)


def test_p_mis_exact_uniform_state():
    g = path3()
    psi = np.full(8, 1 / math.sqrt(8))
    # only |101> is an independent pair on the path
    assert p_mis_exact(psi, g) == pytest.approx(1.0 / 8.0)


def test_top_quantile_objective():
    g = far_apart(4)
    s = SampleSet.from_counts({"1111": 2, "1100": 1, "0000": 1})
    # shot energies (-4, -4, -2, 0); best half -> mean -4, sign flipped
    assert fom_top_quantile(s, g, x=0.5) == pytest.approx(4.0)
    assert fom_top_quantile(s, g, x=1.0) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        fom_top_quantile(s, g, x=0.0)


def test_approximation_ratio_and_validity():
    g = far_apart(4)
    s = SampleSet.from_counts({"1111": 1, "0000": 9})
    r, valid = approximation_ratio(s, g)
    assert r == pytest.approx(1.0) and valid

    pair = udg([(0, 0), (1, 0)])
    r, valid = approximation_ratio(SampleSet.from_counts({"11": 5}), pair)
    assert r == pytest.approx(0.8) and not valid


def test_excitation_probabilities():
    pair = udg([(0, 0), (1, 0)])
    s = SampleSet.from_counts({"10": 3, "11": 1})
    assert np.allclose(excitation_probabilities(s, pair), [1.0, 0.25])


def test_sample_set_validation():
    with pytest.raises(ValueError):
        SampleSet.from_counts({"10x": 1})
    with pytest.raises(ValueError):
        SampleSet.from_counts({"10": 1, "100": 1})
    with pytest.raises(ValueError):
        SampleSet.from_counts({"10": 0})


# ---------------------------------------------------------------------------
# file formats


def test_graph_round_trip(tmp_path, eleven):
    g = eleven[3]
    path = tmp_path / "g.json"
    save_graph(g, path)
    back = load_graph(path)
    assert back.positions == g.positions
    assert back.r_d == g.r_d
    assert back.edges == g.edges
    assert back.known_mis_size == g.known_mis_size


def test_graph_load_rejects_corrupted_edges(tmp_path):
    import json

    from boanneal.rydberg.io import graph_to_dict

    d = graph_to_dict(path3())
    d["edges"] = [[0, 1]]    # drop (1, 2): stored edges disagree
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    with pytest.raises(ValueError):
        load_graph(path)


def test_ingest_samples_merges_and_skips_comments(tmp_path):
    path = tmp_path / "shots.txt"
    path.write_text(
        "# hardware shots\n"
        "\n"
        "101 3\n"
        "010\n"
        "101 2\n"
    )
    s = ingest_samples(path, path3())
    assert dict(s.entries) == {"101": 5, "010": 1}
    assert s.total_shots == 6


def test_ingest_samples_collects_all_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text(
        "101 2\n"
        "10x 1\n"
        "1011 1\n"
        "101 0\n"
        "101 2 3\n"
    )
    with pytest.raises(SampleFormatError) as err:
        ingest_samples(path, path3())
    assert len(err.value.errors) == 4
    assert any("line 2" in e for e in err.value.errors)
    assert any("line 5" in e for e in err.value.errors)


def test_ingest_samples_empty_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing\n")
    with pytest.raises(SampleFormatError):
        ingest_samples(path, path3())
