"""Klein-Gordon Fourier multipliers and linear-flow probes.

``K(t)`` has symbol ``sin(t<xi>)/<xi>``, ``K'(t)`` has ``cos(t<xi>)`` and the
half-wave group ``exp(-itB)`` has ``exp(-it<xi>)``.  All are applied exactly,
so the linear flow carries no time-stepping error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .errors import ContractViolation, ExponentError, GridMismatchError, InvalidParameter
from .grid import Field, apply_multiplier, h1_norm, l2_norm, lp_norm
from .modulation import ModulationParams, PartitionWeights, as_fraction, modulation_norm, partition_weights

Kind = Literal["sine", "cosine", "half_wave"]


def propagator_symbol(spec, t, kind: Kind):
    b = spec.bracket
    if kind == "sine":
        return np.sin(t * b) / b
    if kind == "cosine":
        return np.cos(t * b)
    if kind == "half_wave":
        return np.exp(-1j * t * b)
    raise InvalidParameter(f"unknown propagator kind {kind!r}")


def kg_propagator(field: Field, t, kind: Kind) -> Field:
    """Apply ``K(t)`` (sine), ``K'(t)`` (cosine) or ``exp(-itB)`` (half_wave)."""
    sym = propagator_symbol(field.spec, float(t), kind)
    return apply_multiplier(field, sym, real_symbol=kind != "half_wave")


@dataclass(frozen=True, eq=False)
class PairState:
    """Position ``u`` and velocity ``u_t`` on a common grid."""

    position: Field
    velocity: Field

    def __post_init__(self):
        if self.position.spec != self.velocity.spec:
            raise GridMismatchError("position and velocity live on different grids")
        if self.position.real != self.velocity.real:
            raise ContractViolation("position and velocity disagree on real-valuedness")

    @property
    def spec(self):
        return self.position.spec

    def energy_norm(self) -> float:
        """``(||u||_{H^1}^2 + ||u_t||_{L^2}^2)^{1/2}``."""
        return math.hypot(h1_norm(self.position), l2_norm(self.velocity))


def kg_matrix(state: PairState, t) -> PairState:
    """Free Klein-Gordon flow of a pair: ``(K'f + Kg, (Delta - 1)Kf + K'g)``."""
    spec = state.spec
    b = spec.bracket
    c = np.cos(t * b)
    s = np.sin(t * b)
    f = state.position.coeffs
    g = state.velocity.coeffs
    u = c * f + (s / b) * g
    ut = -b * s * f + c * g
    real = state.position.real
    return PairState(
        Field(spec, u, "frequency", real).physical(),
        Field(spec, ut, "frequency", real).physical(),
    )


# -- exponent arithmetic ---------------------------------------------------------------


def _frac(x):
    if isinstance(x, float) and math.isinf(x):
        return math.inf
    return as_fraction(x)


def gap_q(r, d) -> Fraction | float:
    """Time exponent ``q`` solving ``1/q + d/r = d/2 - 1``; ``math.inf`` when ``1/q = 0``."""
    r = _frac(r)
    if r != math.inf and r < 2:
        raise InvalidParameter(f"r must be >= 2, got {r}")
    inv_r = 0 if r == math.inf else 1 / r
    inv_q = d * (Fraction(1, 2) - inv_r) - 1
    if inv_q < 0 or inv_q > Fraction(1, 2):
        raise ExponentError(f"no admissible q for r = {r}, d = {d}: 1/q = {inv_q} not in [0, 1/2]")
    return math.inf if inv_q == 0 else 1 / Fraction(inv_q)


@dataclass(frozen=True)
class AdmissiblePair:
    """Wave-admissible ``(q, r)``: ``1/q + (d-1)/(2r) <= (d-1)/4``."""

    q: Fraction | float
    r: Fraction
    d: int = 3

    def __post_init__(self):
        q, r = _frac(self.q), _frac(self.r)
        if not (q == math.inf or q >= 2):
            raise ExponentError(f"q must lie in [2, inf], got {q}")
        if r == math.inf or r < 2:
            raise ExponentError(f"r must lie in [2, inf), got {r}")
        inv_q = 0 if q == math.inf else 1 / q
        if inv_q + Fraction(self.d - 1, 2) / r > Fraction(self.d - 1, 4):
            raise ExponentError(f"(q, r) = ({q}, {r}) is not admissible in d = {self.d}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)


# -- space-time norms ---------------------------------------------------------------


def _uniform_dt(times):
    times = np.asarray(times, dtype=float)
    if times.size > 1:
        steps = np.diff(times)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(abs(steps[0]), 1e-300):
            raise InvalidParameter("space-time norms need uniformly spaced, increasing sample times")
    return times


def spacetime_norm(trajectory, q, r, times: Sequence[float] | None = None) -> float:
    """``||u||_{L^q_t L^r_x}`` by the composite trapezoid rule in time.

    ``trajectory`` is either an object with ``times`` and ``positions()``
    (as returned by the solver) or a sequence of fields with ``times`` given.
    """
    if times is None:
        times = trajectory.times
        fields = trajectory.positions()
    else:
        fields = list(trajectory)
    if len(fields) == 0:
        raise InvalidParameter("empty trajectory")
    if len(fields) != len(times):
        raise InvalidParameter("trajectory and time samples differ in length")
    times = _uniform_dt(times)
    q = float(q)
    r = float(r)
    if q < 1 or r < 1:
        raise InvalidParameter("space-time exponents must be >= 1")
    vals = np.array([lp_norm(f.phys, f.spec, r) for f in fields])
    if math.isinf(q):
        return float(vals.max())
    if len(vals) == 1:
        return 0.0
    return float(np.trapezoid(vals ** q, times) ** (1.0 / q))


# -- probes -------------------------------------------------------------------------------


@dataclass
class ProbeReport:
    mode: str
    value: float
    predicted: float | None = None
    times: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    trace: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))


def localization_defect(f: Field) -> float:
    """Fraction of ``|f|^2`` outside the periodic ball of radius ``L/4`` around the peak."""
    vals = np.abs(f.phys) ** 2
    total = vals.sum()
    if total == 0:
        return 0.0
    spec = f.spec
    peak = np.unravel_index(np.argmax(vals), spec.shape)
    dist2 = 0.0
    for axis, x in enumerate(spec.x):
        dx = np.abs(x - spec.x_1d[peak[axis]])
        dx = np.minimum(dx, spec.L - dx)
        dist2 = dist2 + dx ** 2
    outside = vals[np.broadcast_to(dist2 >= (spec.L / 4) ** 2, spec.shape)].sum()
    return float(outside / total)


def uniform_bound_trace(f: Field, params: ModulationParams, times, weights: PartitionWeights | None = None):
    """``(||K(t)f||_{M_{s+1}} + ||K'(t)f||_{M_s}) / ||f||_{M_s}`` at each time."""
    pw = weights or partition_weights(f.spec)
    lifted = ModulationParams(params.p, params.q, params.s + 1)
    base = modulation_norm(f, params, pw)
    if base == 0:
        raise ContractViolation("uniform bound ratio is undefined for the zero field")
    f = f.frequency()
    out = []
    for t in times:
        num = modulation_norm(kg_propagator(f, t, "sine"), lifted, pw)
        num += modulation_norm(kg_propagator(f, t, "cosine"), params, pw)
        out.append(num / base)
    return np.array(out)


def propagator_bound_probe(
    f: Field,
    params: ModulationParams,
    T,
    mode: Literal["uniform", "decay"] = "uniform",
    theta=1.0,
    samples=17,
    weights: PartitionWeights | None = None,
) -> ProbeReport:
    """Empirical check of propagator boundedness or dispersive decay.

    ``uniform`` returns the largest ratio over an even time grid on ``[0, T]``.
    ``decay`` fits the slope of ``log ||G(t) f||_{M^{p,q}_s}`` against
    ``log(1 + t)`` on log-spaced times in ``[1, min(T, L/4)]`` and reports it
    next to the predicted ``-d theta (1/2 - 1/p)``.
    """
    if mode == "uniform":
        times = np.linspace(0.0, float(T), samples)
        trace = uniform_bound_trace(f, params, times, weights)
        return ProbeReport("uniform", float(trace.max()), None, times, trace)
    if mode != "decay":
        raise InvalidParameter(f"unknown probe mode {mode!r}")
    if params.p < 2:
        raise ContractViolation(f"decay probe needs p >= 2, got {params.p}")
    defect = localization_defect(f)
    if defect > 1e-6:
        raise ContractViolation(
            f"decay probe needs a localized field; {defect:.2e} of the mass lies outside L/4"
        )
    t_max = min(float(T), 0.25 * f.spec.L)
    if t_max <= 1:
        raise InvalidParameter("decay window [1, T_max] is empty")
    pw = weights or partition_weights(f.spec)
    times = np.geomspace(1.0, t_max, samples)
    f = f.frequency()
    trace = np.array([modulation_norm(kg_propagator(f, t, "half_wave"), params, pw) for t in times])
    slope = float(np.polyfit(np.log1p(times), np.log(trace), 1)[0])
    predicted = -f.spec.d * float(theta) * (0.5 - 1.0 / params.p)
    return ProbeReport("decay", slope, predicted, times, trace)
