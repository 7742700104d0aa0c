"""Time evolution of ``u_tt - Delta u + u + (V * u^2) u = 0`` for real ``u``.

The equation is used in first-order form ``v = u + i B^-1 u_t`` with
``B = (1 - Delta)^{1/2}``::

    i v_t = B v + B^-1 N(Re v),      N(u) = (V * u^2) u

Two integrators are provided: Picard iteration of the Duhamel map on a
fixed sample grid (local theory) and an interaction-picture RK4 marcher
(long runs).  Both share the nonlinearity and the dealiasing mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.fft as sfft

from .errors import ContractViolation, InstabilityError, InvalidParameter, NoContractionError, NonConvergenceError
from .grid import Field, GridSpec, NormSpec, bessel_power, check_same_grid, h1_norm, l2_norm, sobolev_norm_coeffs
from .hartree import HartreeKernel, energy_from_density, hartree_energy
from .modulation import (
    ExponentTable,
    ModulationParams,
    SplitResult,
    exponent_table,
    high_low_split,
    modulation_norm,
    partition_weights,
    split_schedule,
)
from .propagators import PairState, spacetime_norm


# -- first-order form ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FirstOrderState:
    v: Field
    t: float = 0.0

    @property
    def spec(self):
        return self.v.spec


def to_first_order(f: Field, g: Field, t=0.0) -> FirstOrderState:
    """``v = f + i B^-1 g``."""
    check_same_grid(f, g)
    v = f.frequency() + bessel_power(g.frequency(), -1) * 1j
    return FirstOrderState(v.replace(v.values, real=f.real and g.real and not np.any(g.values)), t)


def from_first_order(state: FirstOrderState) -> PairState:
    """``(Re v, B Im v)``."""
    v = state.v
    return PairState(v.real_part(), bessel_power(v.imag_part(), 1))


# -- nonlinearity --------------------------------------------------------------------


def dealias_mask(spec: GridSpec, fraction=2.0 / 3.0) -> np.ndarray | None:
    """Boolean mask keeping lattice indices ``|k_i| < fraction * n / 2`` on every axis."""
    if fraction is None or fraction >= 1:
        return None
    keep_1d = np.abs(spec.lattice_1d) < fraction * spec.n / 2
    mask = np.ones(spec.shape, dtype=bool)
    for axis in range(spec.d):
        shape = [1] * spec.d
        shape[axis] = spec.n
        mask = mask & keep_1d.reshape(shape)
    return mask


class _Rhs:
    """Evaluates ``N_hat(Re v)`` from coefficients of ``v`` with cached symbols."""

    def __init__(self, spec: GridSpec, kernel: HartreeKernel, mask):
        self.spec = spec
        self.vhat = kernel.symbol(spec)
        self.mask = mask
        self.scale = spec.cell_volume

    def u_phys(self, vhat):
        return sfft.ifftn(vhat).real / self.scale

    def nonlinear_hat(self, u):
        rho_hat = sfft.fftn(u * u)
        w = sfft.ifftn(rho_hat * self.vhat).real
        out = sfft.fftn(w * u) * self.scale
        if self.mask is not None:
            out *= self.mask
        return out


# -- diagnostics -------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagnostics:
    E: float
    P: tuple
    H: float


def _momentum(u_hat, ut_hat, spec):
    out = []
    for axis_xi in spec.xi:
        du = 1j * axis_xi * u_hat
        out.append(float(np.sum((np.conj(ut_hat) * du).real) / spec.volume))
    return tuple(out)


def hamiltonian(v: Field, kernel: HartreeKernel) -> float:
    """``(1/2)||B v||^2 + (1/4) int (V * (Re v)^2)(Re v)^2``."""
    coeffs = v.coeffs
    u = v.phys.real
    return 0.5 * sobolev_norm_coeffs(coeffs, v.spec, 1.0) ** 2 + energy_from_density(u * u, v.spec, kernel.symbol(v.spec))


def diagnostics(state, kernel: HartreeKernel) -> Diagnostics:
    """Energy, momentum and Hamiltonian of a pair or first-order state.

    Momentum uses ``Re(conj(u_t) grad u)`` so it is also defined for complex pairs.
    """
    if isinstance(state, FirstOrderState):
        pair = from_first_order(state)
        H = hamiltonian(state.v, kernel)
    else:
        pair = state
        H = hamiltonian(to_first_order(pair.position.real_part(), pair.velocity.real_part()).v, kernel)
    u, ut = pair.position, pair.velocity
    spec = pair.spec
    E = 0.5 * (h1_norm(u) ** 2 + l2_norm(ut) ** 2) + hartree_energy(u, kernel)
    return Diagnostics(E, _momentum(u.coeffs, ut.coeffs, spec), H)


# -- trajectories -----------------------------------------------------------------------


@dataclass(eq=False)
class Trajectory:
    """Uniformly sampled first-order states with per-sample diagnostics."""

    spec: GridSpec
    times: np.ndarray
    coeffs: np.ndarray
    diagnostics: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.coeffs.shape != (len(self.times),) + self.spec.shape:
            raise InvalidParameter("trajectory coefficients do not match times and grid")
        for name, vals in self.diagnostics.items():
            if len(vals) != len(self.times):
                raise InvalidParameter(f"diagnostic {name!r} has the wrong length")

    def __len__(self):
        return len(self.times)

    def state(self, i) -> FirstOrderState:
        return FirstOrderState(Field(self.spec, self.coeffs[i], "frequency"), float(self.times[i]))

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    def positions(self):
        """Physical ``u = Re v`` at every sample."""
        return [
            Field(self.spec, _pair_coeffs(c, self.spec)[0], "frequency", True).physical() for c in self.coeffs
        ]

    def final(self) -> FirstOrderState:
        return self.state(len(self) - 1)


def _pair_coeffs(v_hat, spec):
    """Coefficients of ``(Re v, B Im v)`` from those of ``v``."""
    conj = np.conj(_reflect(v_hat, spec))
    u = 0.5 * (v_hat + conj)
    w = -0.5j * (v_hat - conj)
    return u, spec.bracket * w


def _reflect(a, spec):
    out = a
    for axis in range(spec.d):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def _sample_diagnostics(traj_coeffs, spec, kernel, vhat_kernel):
    E, H, P = [], [], []
    for vh in traj_coeffs:
        u_hat, ut_hat = _pair_coeffs(vh, spec)
        u = sfft.ifftn(u_hat).real / spec.cell_volume
        pot = energy_from_density(u * u, spec, vhat_kernel)
        h1 = sobolev_norm_coeffs(u_hat, spec, 1.0) ** 2
        l2 = sobolev_norm_coeffs(ut_hat, spec, 0.0) ** 2
        E.append(0.5 * (h1 + l2) + pot)
        H.append(0.5 * sobolev_norm_coeffs(vh, spec, 1.0) ** 2 + pot)
        P.append(_momentum(u_hat, ut_hat, spec))
    P = np.array(P).reshape(len(E), spec.d)
    out = {"E": np.array(E), "H": np.array(H)}
    for i, name in enumerate("xyz"[: spec.d]):
        out["P" + name] = P[:, i]
    return out


# -- Duhamel map and Picard iteration --------------------------------------------------------


def _check_uniform(times):
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise InvalidParameter("need at least two time samples")
    steps = np.diff(times)
    if abs(times[0]) > 1e-14 or np.ptp(steps) > 1e-9 * steps[0] or steps[0] <= 0:
        raise InvalidParameter("candidate must be sampled uniformly on [0, T]")
    return times


def _duhamel_arrays(u_samples, f_hat, g_hat, rhs: _Rhs, times):
    """Return ``(u_hat, ut_hat)`` of ``Phi(u)`` at every sample.

    ``sin((t - tau)b)`` is split into ``t`` and ``tau`` factors, so the
    trapezoid sums become cumulative sums over the samples.
    """
    spec = rhs.spec
    b = spec.bracket
    dt = times[1] - times[0]
    M = len(times)
    u_out = np.empty((M,) + spec.shape, dtype=complex)
    ut_out = np.empty_like(u_out)
    C = np.zeros(spec.shape, dtype=complex)
    S = np.zeros(spec.shape, dtype=complex)
    prev_c = prev_s = None
    for j, t in enumerate(times):
        Nj = rhs.nonlinear_hat(u_samples[j])
        cj = np.cos(t * b) * Nj
        sj = np.sin(t * b) * Nj
        if j > 0:
            C += 0.5 * dt * (prev_c + cj)
            S += 0.5 * dt * (prev_s + sj)
        prev_c, prev_s = cj, sj
        ct, st = np.cos(t * b), np.sin(t * b)
        u_out[j] = ct * f_hat + st / b * g_hat - (st * C - ct * S) / b
        ut_out[j] = -b * st * f_hat + ct * g_hat - (ct * C + st * S)
    return u_out, ut_out


def _trajectory_from_pairs(spec, times, u_hat, ut_hat, kernel):
    v = u_hat + 1j * ut_hat / spec.bracket
    diag = _sample_diagnostics(v, spec, kernel, kernel.symbol(spec))
    return Trajectory(spec, times, v, diag)


def duhamel_map(candidate: Trajectory, f: Field, g: Field, kernel: HartreeKernel, T=None, dealias=0.5) -> Trajectory:
    """``Phi(u)(t) = K'(t) f + K(t) g - int_0^t K(t - tau) N(u(tau)) dtau`` at the candidate's samples."""
    spec = check_same_grid(f, g)
    times = _check_uniform(candidate.times)
    if T is not None and abs(times[-1] - T) > 1e-9 * max(T, 1):
        raise InvalidParameter(f"candidate ends at {times[-1]}, expected T = {T}")
    rhs = _Rhs(spec, kernel, dealias_mask(spec, dealias) if dealias else None)
    u = [rhs.u_phys(_pair_coeffs(vh, spec)[0]) for vh in candidate.coeffs]
    u_hat, ut_hat = _duhamel_arrays(u, f.coeffs, g.coeffs, rhs, times)
    return _trajectory_from_pairs(spec, times, u_hat, ut_hat, kernel)


def free_trajectory(f: Field, g: Field, times, kernel: HartreeKernel) -> Trajectory:
    spec = f.spec
    b = spec.bracket
    f_hat, g_hat = f.coeffs, g.coeffs
    u = np.array([np.cos(t * b) * f_hat + np.sin(t * b) / b * g_hat for t in times])
    ut = np.array([-b * np.sin(t * b) * f_hat + np.cos(t * b) * g_hat for t in times])
    return _trajectory_from_pairs(spec, np.asarray(times, float), u, ut, kernel)


def contraction_window(f: Field, g: Field) -> float:
    """``min(1, 1 / (8 (||f||_{H^1} + ||g||_{L^2})^2))``."""
    R = h1_norm(f) + l2_norm(g)
    return 1.0 if R == 0 else min(1.0, 1.0 / (8.0 * R * R))


@dataclass
class PicardResult:
    trajectory: Trajectory
    ratios: list
    residuals: list

    @property
    def iterations(self):
        return len(self.residuals)

    @property
    def residual(self):
        return self.residuals[-1] if self.residuals else 0.0


def _sup_l2(a, b, spec):
    return max(math.sqrt(np.sum(np.abs(x - y) ** 2) / spec.volume) for x, y in zip(a, b))


def picard_solve(
    f: Field,
    g: Field,
    kernel: HartreeKernel,
    T,
    tol=1e-10,
    max_iter=50,
    samples=257,
    dealias=0.5,
) -> PicardResult:
    """Iterate the Duhamel map from the free evolution until successive iterates agree.

    Distances are sup-in-time ``L^2`` norms of the position.  Contraction ratios
    are recorded; three consecutive ratios above 1 abort with
    :class:`NoContractionError`.  Real data only.
    """
    spec = check_same_grid(f, g)
    if not (f.real and g.real):
        raise ContractViolation("Picard iteration is implemented for real data only")
    if not 0 < T <= 1:
        raise InvalidParameter(f"T must lie in (0, 1], got {T}")
    times = np.linspace(0.0, float(T), samples)
    rhs = _Rhs(spec, kernel, dealias_mask(spec, dealias) if dealias else None)
    f_hat, g_hat = f.coeffs, g.coeffs
    if rhs.mask is not None:
        f_hat, g_hat = f_hat * rhs.mask, g_hat * rhs.mask
    zero = [np.zeros(spec.shape)] * samples
    u_hat, ut_hat = _duhamel_arrays(zero, f_hat, g_hat, rhs, times)
    ratios, residuals = [], []
    above = 0
    for it in range(max_iter):
        u_phys = [rhs.u_phys(x) for x in u_hat]
        new_u, new_ut = _duhamel_arrays(u_phys, f_hat, g_hat, rhs, times)
        res = _sup_l2(new_u, u_hat, spec)
        if residuals and residuals[-1] > 0:
            ratios.append(res / residuals[-1])
            above = above + 1 if ratios[-1] > 1 else 0
        residuals.append(res)
        u_hat, ut_hat = new_u, new_ut
        if res <= tol:
            return PicardResult(_trajectory_from_pairs(spec, times, u_hat, ut_hat, kernel), ratios, residuals)
        if above >= 3:
            raise NoContractionError(ratios)
    raise NonConvergenceError(residuals[-1], max_iter)


# -- interaction-picture RK4 -------------------------------------------------------------------


def evolve(
    f: Field,
    g: Field,
    kernel: HartreeKernel,
    T,
    dt,
    sample_stride=1,
    dealias=0.5,
    v0: Field | None = None,
    callback=None,
) -> Trajectory:
    """March ``i v_t = B v + B^-1 N(Re v)`` with Lawson RK4 in the interaction picture.

    The linear part is applied exactly; RK4 acts on the rotated
    nonlinearity.  With ``dealias`` set, the data and the nonlinearity are
    projected onto ``|k_i| < dealias * n / 2``.  ``v0`` may replace
    ``(f, g)`` by a complex first-order state.

    The default mask ``|k_i| < n/4`` makes every quartic grid sum alias-free,
    so the discrete energy and momentum are both exact invariants.
    """
    if not dt > 0:
        raise InvalidParameter(f"dt must be positive, got {dt}")
    if v0 is None:
        spec = check_same_grid(f, g)
        v_hat = to_first_order(f, g).v.coeffs.copy()
    else:
        spec = v0.spec
        v_hat = v0.coeffs.copy()
    steps = int(round(T / dt))
    if steps < 1 or abs(steps * dt - T) > 1e-9 * max(T, 1):
        raise InvalidParameter(f"T = {T} is not an integer multiple of dt = {dt}")
    stride = int(sample_stride)
    if stride < 1:
        raise InvalidParameter("sample_stride must be >= 1")
    rhs = _Rhs(spec, kernel, dealias_mask(spec, dealias))
    if rhs.mask is not None:
        v_hat *= rhs.mask
    b = spec.bracket
    inv_b = 1.0 / b
    E1 = np.exp(-1j * dt * b)
    E2 = np.exp(-0.5j * dt * b)
    h = dt

    def F(vh):
        return -1j * inv_b * rhs.nonlinear_hat(rhs.u_phys(vh))

    times = [0.0]
    out = [v_hat.copy()]
    for step in range(1, steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = F(v_hat)
            a = E2 * v_hat
            k2 = F(a + 0.5 * h * E2 * k1)
            k3 = F(a + 0.5 * h * k2)
            k4 = F(E1 * v_hat + h * E2 * k3)
            v_new = E1 * v_hat + (h / 6.0) * (E1 * k1 + 2.0 * E2 * (k2 + k3) + k4)
        if not np.all(np.isfinite(v_new)):
            raise InstabilityError((step - 1) * dt)
        v_hat = v_new
        if step % stride == 0 or step == steps:
            times.append(step * dt)
            out.append(v_hat.copy())
            if callback is not None:
                callback(step * dt, v_hat)
    coeffs = np.array(out)
    diag = _sample_diagnostics(coeffs, spec, kernel, kernel.symbol(spec))
    return Trajectory(spec, np.array(times), coeffs, diag)


def free_half_wave(v0_hat, spec, times):
    b = spec.bracket
    return np.array([np.exp(-1j * t * b) * v0_hat for t in times])


# -- high-low experiment ----------------------------------------------------------------------


def split_data(f: Field, g: Field, N, table: ExponentTable, weights=None):
    """Split ``f`` against ``M^{p_gamma, p_gamma'}_1`` (low part in ``H^1``) and
    ``g`` against ``M^{p_gamma, p_gamma'}_0`` (low part in ``L^2``)."""
    fs = high_low_split(f, N, table, s=1.0, low_norm=NormSpec.sobolev(1), weights=weights)
    gs = high_low_split(g, N, table, s=0.0, low_norm=NormSpec.sobolev(0), weights=weights)
    return fs, gs


def first_order_parts(fs: SplitResult, gs: SplitResult):
    """``F_N = f_N + i B^-1 g_N`` and ``F^N = f^N + i B^-1 g^N`` as coefficient arrays."""
    spec = fs.low.spec
    inv_b = 1.0 / spec.bracket
    low = fs.low.coeffs + 1j * inv_b * gs.low.coeffs
    high = fs.high.coeffs + 1j * inv_b * gs.high.coeffs
    return low, high


def interaction_energy(traj: Trajectory, high_hat, kernel: HartreeKernel):
    """``I(t) = H(v(t) - exp(-itB) F^N)`` and ``||v(t) - exp(-itB) F^N||_{H^1}`` per sample."""
    spec = traj.spec
    vh = kernel.symbol(spec)
    free = free_half_wave(high_hat, spec, traj.times)
    I, h1 = [], []
    for v, w in zip(traj.coeffs, free):
        vt = v - w
        u = sfft.ifftn(vt).real / spec.cell_volume
        n1 = sobolev_norm_coeffs(vt, spec, 1.0)
        I.append(0.5 * n1 * n1 + energy_from_density(u * u, spec, vh))
        h1.append(n1)
    return np.array(I), np.array(h1)


def certified_window(times, I, I0):
    """End of the initial run of samples with ``I(t) <= 2 I(0)``."""
    bad = np.nonzero(I > 2 * I0 * (1 + 1e-12))[0]
    if bad.size == 0:
        return float(times[-1])
    first = bad[0]
    return float(times[first - 1]) if first > 0 else 0.0


def growth_slope(traj: Trajectory, t_min=1.0):
    """Slope of ``log ||v(t) - exp(-itB) v(0)||_{H^1}`` against ``log(1 + t)`` for ``t >= t_min``."""
    spec = traj.spec
    free = free_half_wave(traj.coeffs[0], spec, traj.times)
    dev = np.array([sobolev_norm_coeffs(v - w, spec, 1.0) for v, w in zip(traj.coeffs, free)])
    sel = (traj.times >= t_min) & (dev > 0)
    if sel.sum() < 2:
        return float("nan"), dev
    return float(np.polyfit(np.log1p(traj.times[sel]), np.log(dev[sel]), 1)[0]), dev


@dataclass
class GwpRow:
    N: float
    theta: object
    I0: float
    maxI_ratio: float
    T_certified: float
    growth_slope: float
    split_radius_f: float = math.nan
    split_radius_g: float = math.nan


@dataclass
class GwpReport:
    table: ExponentTable
    rows: list
    growth_slope: float
    times: np.ndarray
    I_traces: dict

    def fit(self, column):
        """Least-squares slope of ``log column`` against ``log N`` over rows with positive values."""
        N = np.array([r.N for r in self.rows], dtype=float)
        y = np.array([getattr(r, column) for r in self.rows], dtype=float)
        sel = y > 0
        if sel.sum() < 2:
            return float("nan")
        return float(np.polyfit(np.log(N[sel]), np.log(y[sel]), 1)[0])

    @property
    def energy_slope(self):
        return self.fit("I0")

    @property
    def window_slope(self):
        return self.fit("T_certified")


def gwp_experiment(
    f: Field,
    g: Field,
    gamma,
    p,
    N_schedule,
    T_max,
    dt,
    sample_stride=10,
    zero_mode=0.0,
    trajectory: Trajectory | None = None,
    weights=None,
) -> GwpReport:
    """High-low frequency experiment: split, evolve once, and track ``I(t)`` per ``N``."""
    table = exponent_table(gamma, p)
    if not table.in_gwp_range:
        raise ContractViolation(
            f"need 2 < gamma < 3 and 2 < p < {table.gwp_bound}, got gamma = {table.gamma}, p = {table.p}"
        )
    if not (f.real and g.real):
        raise ContractViolation("the high-low experiment needs real data")
    spec = check_same_grid(f, g)
    kernel = HartreeKernel(float(table.gamma), spec.d, zero_mode)
    if trajectory is None:
        trajectory = evolve(f, g, kernel, T_max, dt, sample_stride)
    slope, _ = growth_slope(trajectory)
    weights = weights or partition_weights(spec)
    zero = not (np.any(f.values) or np.any(g.values))
    rows, traces = [], {}
    if zero:
        return GwpReport(table, rows, slope, trajectory.times, traces)
    f_splits = split_schedule(f, N_schedule, table, 1.0, NormSpec.sobolev(1), weights)
    g_splits = split_schedule(g, N_schedule, table, 0.0, NormSpec.sobolev(0), weights)
    for N, fs, gs in zip(N_schedule, f_splits, g_splits):
        low, high = first_order_parts(fs, gs)
        I, _ = interaction_energy(trajectory, high, kernel)
        I0 = hamiltonian(Field(spec, low, "frequency"), kernel)
        traces[N] = I
        ratio = float(I.max() / I0) if I0 > 0 else math.inf
        rows.append(
            GwpRow(float(N), table.theta, I0, ratio, certified_window(trajectory.times, I, I0), slope, fs.R, gs.R)
        )
    return GwpReport(table, rows, slope, trajectory.times, traces)


def sumspace_witness_norm(traj: Trajectory, split, params: ModulationParams | None = None, table=None, weights=None):
    """``||v(t) - exp(-itB) F^N||_{H^1} + ||exp(-itB) F^N||_{M}`` per sample.

    ``split`` is ``F^N`` as a field, or a pair of :class:`SplitResult` for
    ``(f, g)``.  ``params`` defaults to ``M^{p_gamma, p_gamma'}_1`` of ``table``.
    """
    spec = traj.spec
    if isinstance(split, Field):
        high = split.coeffs
    else:
        high = first_order_parts(*split)[1]
        table = table or split[0].table
    if params is None:
        if table is None:
            raise InvalidParameter("need modulation parameters or an exponent table")
        params = ModulationParams(float(table.p_gamma), float(table.p_gamma_conj), 1.0)
    free = free_half_wave(high, spec, traj.times)
    pw = weights or partition_weights(spec)
    out = []
    for v, w in zip(traj.coeffs, free):
        val = sobolev_norm_coeffs(v - w, spec, 1.0)
        if np.any(w):
            val += modulation_norm(Field(spec, w, "frequency"), params, pw)
        out.append(val)
    return np.array(out)


def strichartz_ratio(traj: Trajectory, kernel: HartreeKernel, q, r):
    """``||u||_{L^q_T L^r} / (||f||_{H^1} + ||g||_{L^2} + ||N(u)||_{L^1_T L^2})``."""
    spec = traj.spec
    u0, ut0 = _pair_coeffs(traj.coeffs[0], spec)
    data = sobolev_norm_coeffs(u0, spec, 1.0) + sobolev_norm_coeffs(ut0, spec, 0.0)
    rhs = _Rhs(spec, kernel, None)
    forcing = []
    for vh in traj.coeffs:
        u = rhs.u_phys(_pair_coeffs(vh, spec)[0])
        forcing.append(sobolev_norm_coeffs(rhs.nonlinear_hat(u), spec, 0.0))
    forcing = float(np.trapezoid(forcing, traj.times))
    return spacetime_norm(traj, q, r) / (data + forcing)
