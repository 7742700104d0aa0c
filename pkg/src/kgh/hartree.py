"""Riesz-potential convolution ``V * |u|^2`` with ``V(x) = |x|^-gamma`` on the torus.

The periodised kernel is defined spectrally, ``V_hat(xi) = c |xi|^(gamma - d)``
for ``xi != 0``, where ``c`` is the whole-space constant under the transform
``f_hat(xi) = int f(x) exp(-i xi.x) dx``::

    c(d, gamma) = pi^(d/2) 2^(d - gamma) Gamma((d - gamma)/2) / Gamma(gamma/2)

The mean of the periodised kernel diverges, so ``V_hat(0)`` is a free
parameter (``zero_mode``, default 0: constant densities feel no force).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy.special import gamma as Gamma

from .errors import ContractViolation, ExponentError, InvalidParameter
from .grid import Field, GridSpec, check_same_grid, lp_norm
from .modulation import as_fraction


def riesz_constant(d, gamma):
    return math.pi ** (d / 2) * 2 ** (d - gamma) * Gamma((d - gamma) / 2) / Gamma(gamma / 2)


@dataclass(frozen=True)
class HartreeKernel:
    gamma: float
    d: int = 3
    zero_mode: float = 0.0
    normalization: float | None = None

    def __post_init__(self):
        g = float(self.gamma)
        if not 0 < g < 3:
            raise InvalidParameter(f"gamma must lie in (0, 3), got {g}")
        if not g < self.d:
            # |x|^-gamma is not locally integrable and its transform changes sign
            raise InvalidParameter(f"gamma = {g} needs gamma < d = {self.d}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "zero_mode", float(self.zero_mode))
        if self.normalization is None:
            object.__setattr__(self, "normalization", riesz_constant(self.d, g))

    def symbol(self, spec: GridSpec) -> np.ndarray:
        if spec.d != self.d:
            raise InvalidParameter(f"kernel is {self.d}-dimensional, grid is {spec.d}-dimensional")
        return _symbol(spec, self.gamma, self.zero_mode, self.normalization)


@lru_cache(maxsize=32)
def _symbol(spec, gamma, zero_mode, c):
    k2 = spec.xi_norm2.copy()
    k2.flat[0] = 1.0
    out = c * k2 ** ((gamma - spec.d) / 2)
    out.flat[0] = zero_mode
    out.setflags(write=False)
    return out


# -- array kernels (shared with the time stepper) --------------------------------


def potential_array(density, spec, vhat):
    """Real physical potential ``V * rho`` for a real density array."""
    rho_hat = sfft.fftn(density)
    return sfft.ifftn(rho_hat * vhat).real


def energy_from_density(density, spec, vhat):
    rho_hat = sfft.fftn(density) * spec.cell_volume
    return 0.25 * float(np.sum(vhat * (rho_hat.real ** 2 + rho_hat.imag ** 2))) / spec.volume


# -- operations -----------------------------------------------------------------------


def hartree_potential(u: Field, kernel: HartreeKernel) -> Field:
    """``V * |u|^2`` in physical space (always real: the symbol is real and even)."""
    vals = u.phys
    density = vals.real ** 2 + vals.imag ** 2
    return Field(u.spec, potential_array(density, u.spec, kernel.symbol(u.spec)), "physical", True)


def hartree_nonlinearity(u: Field, kernel: HartreeKernel) -> Field:
    """Pointwise ``(V * |u|^2) u``."""
    W = hartree_potential(u, kernel).values.real
    return Field(u.spec, W * u.phys, "physical", u.real)


def nonlinearity_difference(u1: Field, u2: Field, kernel: HartreeKernel) -> Field:
    """``(V*|u1|^2)(u1 - u2) + (V*(|u1|^2 - |u2|^2)) u2``, the split used in contraction bounds."""
    spec = check_same_grid(u1, u2)
    a, b = u1.phys, u2.phys
    vhat = kernel.symbol(spec)
    W1 = potential_array(np.abs(a) ** 2, spec, vhat)
    Wd = potential_array(np.abs(a) ** 2 - np.abs(b) ** 2, spec, vhat)
    return Field(spec, W1 * (a - b) + Wd * b, "physical", u1.real and u2.real)


def hartree_energy(u: Field, kernel: HartreeKernel) -> float:
    """``(1/4) int int |u(x)|^2 |u(y)|^2 V(x-y)`` in Plancherel form ``(1/4) L^-d sum V_hat |rho_hat|^2``."""
    vals = u.phys
    return energy_from_density(vals.real ** 2 + vals.imag ** 2, u.spec, kernel.symbol(u.spec))


@dataclass(frozen=True)
class HlsExponents:
    p1: Fraction
    q1: Fraction
    r1: Fraction


def hls_exponents(gamma) -> HlsExponents:
    """Canonical Hölder/HLS exponents for the quartic energy bound in three dimensions.

    Fixes ``q1 = 3``, ``p1 = 3/2`` and solves ``1/r1 + gamma/3 - 1 = 1/q1``.
    """
    g = as_fraction(gamma)
    if not 2 < g < 3:
        raise ExponentError(f"gamma must lie in (2, 3), got {g}")
    q1 = Fraction(3)
    p1 = Fraction(3, 2)
    inv_r1 = 1 / q1 + 1 - g / 3
    r1 = 1 / inv_r1
    ok = (
        1 / p1 + 1 / q1 == 1
        and 1 / r1 + g / 3 - 1 == 1 / q1
        and r1 < q1
        and 1 < r1 <= 3
        and 1 < p1 <= 3
    )
    if not ok:
        raise ExponentError(f"no valid HLS exponent choice for gamma = {g}")
    return HlsExponents(p1, q1, r1)


def hls_target_exponent(p, gamma, d):
    """``q`` with ``1/q = 1/p + gamma/d - 1``; raises unless ``1 < p < q < inf``."""
    p = as_fraction(p)
    g = as_fraction(gamma)
    inv_q = 1 / p + g / d - 1
    if not (p > 1 and 0 < inv_q < 1 / p):
        raise ExponentError(f"1/q = {inv_q} is incompatible with p = {p} (need 1 < p < q < inf)")
    return 1 / inv_q


def hls_ratio(f: Field, p, gamma, zero_mode=0.0) -> float:
    """``|| |x|^-gamma * |f| ||_{L^q} / ||f||_{L^p}`` with ``q`` from the HLS relation."""
    q = hls_target_exponent(p, gamma, f.spec.d)
    vals = np.abs(f.phys)
    denom = lp_norm(vals, f.spec, float(p))
    if denom == 0:
        raise ContractViolation("HLS ratio is undefined for the zero field")
    kernel = HartreeKernel(float(as_fraction(gamma)), f.spec.d, zero_mode)
    conv = potential_array(vals, f.spec, kernel.symbol(f.spec))
    return lp_norm(conv, f.spec, float(q)) / denom
