import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgh.corpus import CorpusSpec, generate_corpus
from kgh.errors import (
    ContractViolation,
    InstabilityError,
    InvalidParameter,
    NoContractionError,
    NonConvergenceError,
)
from kgh.grid import Field, GridSpec, h1_norm, l2_norm
from kgh.hartree import HartreeKernel
from kgh.modulation import exponent_table, partition_weights
from kgh.propagators import PairState, kg_matrix
from kgh.solver import (
    FirstOrderState,
    Trajectory,
    contraction_window,
    diagnostics,
    duhamel_map,
    evolve,
    first_order_parts,
    free_trajectory,
    from_first_order,
    gwp_experiment,
    picard_solve,
    split_data,
    sumspace_witness_norm,
    to_first_order,
)

GRID_1D = GridSpec.with_box_density(1, 64, 4)
KERNEL_1D = HartreeKernel(0.5, 1)


def data(spec, seed, amplitude=1.0, alpha=2.0, kmax=None):
    return generate_corpus(CorpusSpec(seed, 2, alpha=alpha, kmax=kmax, amplitude=amplitude), spec)


# -- first-order form -----------------------------------------------------------------


def test_first_order_of_zero_and_static_data():
    spec = GridSpec(2, 16, 2 * math.pi)
    z = Field.zeros(spec)
    assert not np.any(to_first_order(z, z).v.values)
    f, _ = data(spec, 0)
    v = to_first_order(f, z).v
    assert v.real
    assert np.abs(v.phys.imag).max() <= 1e-12 * np.abs(v.phys).max()


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_first_order_round_trip(seed):
    spec = GridSpec(2, 16, 4 * math.pi)
    f, g = data(spec, seed)
    back = from_first_order(to_first_order(f, g))
    assert l2_norm(back.position - f) <= 1e-12 * l2_norm(f)
    assert l2_norm(back.velocity - g) <= 1e-12 * l2_norm(g)


# -- diagnostics ----------------------------------------------------------------------


def test_diagnostics_of_zero_state():
    spec = GridSpec(3, 8, 2 * math.pi)
    z = Field.zeros(spec)
    d = diagnostics(PairState(z, z), HartreeKernel(2.5, 3))
    assert d.E == 0 and d.H == 0 and d.P == (0.0, 0.0, 0.0)


def test_diagnostics_of_constant():
    spec = GridSpec(1, 32, 2 * math.pi)
    c = 1.3
    d = diagnostics(PairState(Field(spec, np.full(32, c), real=True), Field.zeros(spec)), KERNEL_1D)
    assert d.E == pytest.approx(math.pi * c * c, rel=1e-13)
    assert d.P == (0.0,)


def test_momentum_of_travelling_wave():
    # u = cos(x - t), u_t = sin(x - t): P = int u_t u_x = -int sin^2 = -pi on [0, 2pi)
    spec = GridSpec(1, 32, 2 * math.pi)
    u = Field.from_function(spec, np.cos)
    ut = Field.from_function(spec, np.sin)
    assert diagnostics(PairState(u, ut), KERNEL_1D).P[0] == pytest.approx(-math.pi, rel=1e-13)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_hamiltonian_equals_energy_for_real_pairs(seed):
    spec = GridSpec(2, 16, 4 * math.pi)
    f, g = data(spec, seed)
    k = HartreeKernel(1.5, 2)
    assert diagnostics(to_first_order(f, g), k).H == pytest.approx(diagnostics(PairState(f, g), k).E, rel=1e-12)


# -- Duhamel map ----------------------------------------------------------------------


def test_duhamel_of_zero_candidate_is_free_flow():
    f, g = data(GRID_1D, 1)
    times = np.linspace(0, 1, 21)
    zero = free_trajectory(Field.zeros(GRID_1D), Field.zeros(GRID_1D), times, KERNEL_1D)
    out = duhamel_map(zero, f, g, KERNEL_1D, T=1.0)
    for i, t in enumerate(times):
        exact = kg_matrix(PairState(f, g), t)
        assert l2_norm(out.positions()[i] - exact.position) <= 1e-12 * l2_norm(f)
    both_zero = duhamel_map(zero, Field.zeros(GRID_1D), Field.zeros(GRID_1D), KERNEL_1D)
    assert not np.any(both_zero.coeffs)


def test_duhamel_trapezoid_converges_at_second_order():
    f, g = data(GRID_1D, 2, amplitude=1.0)
    ref = evolve(f, g, KERNEL_1D, 1.0, 1 / 640, sample_stride=1)
    finals = []
    for M in (10, 20, 40, 80):
        stride = 640 // M
        cand = Trajectory(ref.spec, ref.times[::stride], ref.coeffs[::stride])
        finals.append(duhamel_map(cand, f, g, KERNEL_1D, T=1.0).final().v)
    diffs = [l2_norm(a - b) for a, b in zip(finals, finals[1:])]
    orders = [math.log2(a / b) for a, b in zip(diffs, diffs[1:])]
    assert min(orders) >= 1.8


def test_duhamel_rejects_nonuniform_candidate():
    f, g = data(GRID_1D, 3)
    traj = free_trajectory(f, g, [0.0, 0.1, 0.3], KERNEL_1D)
    with pytest.raises(InvalidParameter):
        duhamel_map(traj, f, g, KERNEL_1D)


# -- Picard ---------------------------------------------------------------------------


def test_picard_zero_data():
    z = Field.zeros(GRID_1D)
    res = picard_solve(z, z, KERNEL_1D, 1.0)
    assert res.iterations == 1 and res.residual == 0
    assert not np.any(res.trajectory.coeffs)


def test_picard_small_plane_wave():
    spec = GRID_1D
    eps = 1e-3
    f = Field.from_function(spec, lambda x: eps * np.cos(2 * x))
    g = Field.zeros(spec)
    T = contraction_window(f, g)
    res = picard_solve(f, g, KERNEL_1D, T, tol=1e-12)
    assert res.residual <= 1e-12
    assert max(res.ratios) <= 0.6


def test_picard_result_is_a_fixed_point():
    f, g = data(GRID_1D, 4, amplitude=0.3)
    tol = 1e-10
    res = picard_solve(f, g, KERNEL_1D, contraction_window(f, g), tol=tol)
    again = duhamel_map(res.trajectory, f, g, KERNEL_1D)
    gap = max(l2_norm(a - b) for a, b in zip(again.positions(), res.trajectory.positions()))
    assert gap <= 2 * tol


def test_picard_agrees_with_time_marcher():
    f, g = data(GRID_1D, 5, amplitude=0.3)
    T = 1.0
    res = picard_solve(f, g, KERNEL_1D, T, samples=513)
    ev = evolve(f, g, KERNEL_1D, T, T / 512)
    a, b = res.trajectory.final().v, ev.final().v
    assert l2_norm(a - b) <= 1e-6 * l2_norm(b)


def test_picard_failures():
    f, g = data(GRID_1D, 6, amplitude=30.0)
    with pytest.raises(NoContractionError) as exc:
        picard_solve(f, g, KERNEL_1D, 1.0, max_iter=200)
    assert all(r > 1 for r in exc.value.ratios[-3:])
    small_f, small_g = data(GRID_1D, 6, amplitude=0.3)
    with pytest.raises(NonConvergenceError):
        picard_solve(small_f, small_g, KERNEL_1D, 1.0, tol=1e-300, max_iter=2)
    with pytest.raises(InvalidParameter):
        picard_solve(small_f, small_g, KERNEL_1D, 1.5)
    cplx = Field.plane_wave(GRID_1D, 1, 1e-3)
    with pytest.raises(ContractViolation):
        picard_solve(cplx, Field.zeros(GRID_1D), KERNEL_1D, 0.5)


def test_contraction_window():
    z = Field.zeros(GRID_1D)
    assert contraction_window(z, z) == 1.0
    f, g = data(GRID_1D, 7, amplitude=2.0)
    R = h1_norm(f) + l2_norm(g)
    assert contraction_window(f, g) == pytest.approx(1 / (8 * R * R))


# -- time marcher ---------------------------------------------------------------------


def test_evolve_zero_data():
    z = Field.zeros(GRID_1D)
    traj = evolve(z, z, KERNEL_1D, 0.5, 0.05)
    assert not np.any(traj.coeffs)
    for vals in traj.diagnostics.values():
        assert not np.any(vals)


def test_evolve_linear_limit_is_third_order_in_amplitude():
    f, g = data(GRID_1D, 8, amplitude=1.0)
    errs = []
    epss = (0.2, 0.1, 0.05, 0.025)
    for eps in epss:
        traj = evolve(f * eps, g * eps, KERNEL_1D, 1.0, 0.01, sample_stride=100)
        free = kg_matrix(PairState(f * eps, g * eps), 1.0)
        errs.append(l2_norm(traj.positions()[-1] - free.position))
    slope = np.polyfit(np.log(epss), np.log(errs), 1)[0]
    assert slope >= 2.7


def test_evolve_sampling_and_callback():
    f, g = data(GRID_1D, 9)
    seen = []
    traj = evolve(f, g, KERNEL_1D, 1.0, 0.05, sample_stride=4, callback=lambda t, v: seen.append(t))
    assert np.allclose(traj.times, [0, 0.2, 0.4, 0.6, 0.8, 1.0])
    assert np.allclose(seen, traj.times[1:])
    assert len(traj.diagnostics["E"]) == len(traj)


@pytest.mark.parametrize("T,dt,stride", [(1.0, 0.0, 1), (1.0, 0.3, 1), (1.0, 0.1, 0)])
def test_evolve_rejects_bad_steps(T, dt, stride):
    f, g = data(GRID_1D, 10)
    with pytest.raises(InvalidParameter):
        evolve(f, g, KERNEL_1D, T, dt, sample_stride=stride)


def test_evolve_reports_instability():
    spec = GridSpec.with_box_density(1, 32, 2)
    f, g = data(spec, 1, amplitude=30.0, alpha=2.2)
    with pytest.raises(InstabilityError) as exc:
        evolve(f, g, KERNEL_1D, 50.0, 0.5)
    assert exc.value.last_stable_time >= 0


def test_evolve_conserves_energy_and_momentum_in_3d():
    spec = GridSpec.with_box_density(3, 16, 1)
    f, g = data(spec, 11, amplitude=0.5, alpha=1.5, kmax=2.0)
    traj = evolve(f, g, HartreeKernel(2.5, 3), 1.0, 0.005, sample_stride=20)
    E = traj.diagnostics["E"]
    # Energy drifts only through the fourth-order time error.
    assert np.ptp(E) <= 2e-8 * E[0]
    for name in ("Px", "Py", "Pz"):
        assert np.ptp(traj.diagnostics[name]) <= 1e-8 * E[0]
    assert np.allclose(traj.diagnostics["H"], E, rtol=1e-12)


def test_trajectory_validates_shapes():
    spec = GridSpec(1, 16, 1.0)
    with pytest.raises(InvalidParameter):
        Trajectory(spec, np.zeros(2), np.zeros((3, 16), complex))
    with pytest.raises(InvalidParameter):
        Trajectory(spec, np.zeros(2), np.zeros((2, 16), complex), {"E": np.zeros(3)})


# -- high-low experiment --------------------------------------------------------------


SMALL_3D = GridSpec.with_box_density(3, 16, 2)


def test_gwp_band_limited_data_is_conserved():
    f, g = data(SMALL_3D, 12, amplitude=0.5, kmax=1.5)
    rep = gwp_experiment(f, g, "5/2", "11/5", (2.0, 4.0), 1.0, 0.01, sample_stride=10)
    for row in rep.rows:
        assert row.split_radius_f == math.inf and row.split_radius_g == math.inf
        assert abs(row.maxI_ratio - 1) <= 1e-8
        assert row.T_certified == 1.0
    assert rep.table.theta == exponent_table("5/2", "11/5").theta


def test_gwp_zero_data():
    z = Field.zeros(SMALL_3D)
    rep = gwp_experiment(z, z, "5/2", "11/5", (2.0, 4.0), 0.2, 0.05, sample_stride=1)
    assert rep.rows == []


@pytest.mark.parametrize("gamma,p", [("3/2", "11/5"), ("5/2", "5/2")])
def test_gwp_preconditions(gamma, p):
    f, g = data(SMALL_3D, 13)
    with pytest.raises(ContractViolation):
        gwp_experiment(f, g, gamma, p, (2.0,), 0.2, 0.05)


def test_gwp_requires_real_data():
    f = Field.plane_wave(SMALL_3D, 1, 0.1)
    with pytest.raises(ContractViolation):
        gwp_experiment(f, Field.zeros(SMALL_3D), "5/2", "11/5", (2.0,), 0.2, 0.05)


# -- witness norm ---------------------------------------------------------------------


def test_witness_without_high_part_is_h1_norm():
    spec = GridSpec.with_box_density(2, 32, 2)
    f, g = data(spec, 14, amplitude=0.5)
    traj = evolve(f, g, HartreeKernel(1.5, 2), 0.5, 0.05, sample_stride=2)
    w = sumspace_witness_norm(traj, Field.zeros(spec, "frequency", real=False), table=exponent_table("5/2", "11/5"))
    expected = [h1_norm(s.v) for s in traj.states]
    assert np.allclose(w, expected, rtol=1e-12)
    zero = evolve(Field.zeros(spec), Field.zeros(spec), HartreeKernel(1.5, 2), 0.2, 0.05)
    assert not np.any(sumspace_witness_norm(zero, Field.zeros(spec), table=exponent_table("5/2", "11/5")))


def test_witness_dominates_l2_norm():
    spec = GridSpec.with_box_density(2, 32, 2)
    f, g = data(spec, 15, amplitude=0.5, alpha=1.2)
    traj = evolve(f, g, HartreeKernel(1.5, 2), 0.5, 0.05, sample_stride=2)
    table = exponent_table("5/2", "11/5")
    split = split_data(f, g, 4.0, table)
    assert np.any(first_order_parts(*split)[1])
    w = sumspace_witness_norm(traj, split)
    # Lower bound: sum_k sigma_k^2 >= c^2 pointwise, and Hoelder on the box volume for p_gamma > 2.
    pw = partition_weights(spec)
    c = math.sqrt(np.min(np.sum(pw.dense ** 2, axis=0))) ** spec.d
    lower = min(1.0, c * spec.volume ** (1 / float(table.p_gamma) - 0.5))
    for wi, s in zip(w, traj.states):
        assert wi >= lower * l2_norm(s.v) * (1 - 1e-12)


@pytest.mark.slow
def test_gwp_benchmark_window_grows_at_predicted_rate(gwp_benchmark):
    rep = gwp_benchmark
    T = [r.T_certified for r in rep.rows]
    assert all(a <= b for a, b in zip(T, T[1:]))
    assert T[-1] > T[0], f"certified windows do not grow: {T}"
    assert abs(rep.window_slope - float(rep.table.window_exp)) <= 0.3
