"""Periodic grids, spectral fields, Fourier multipliers and Lebesgue/Sobolev norms.

Conventions
-----------
The box is ``[0, L)^d`` sampled at ``x_j = j L / n``.  Frequencies are
``xi_k = 2 pi k / L`` with ``k in {-n/2, ..., n/2 - 1}^d`` and the forward
transform is scaled so that discrete coefficients approximate the continuum
Fourier integral::

    f_hat(xi_k) = (L/n)^d * sum_j f(x_j) exp(-i xi_k . x_j)

Arrays are kept in FFT (not shifted) order internally.  Plancherel then reads
``(L/n)^d sum_j |f(x_j)|^2 = L^-d sum_k |f_hat(xi_k)|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Literal, Union

import numpy as np
import scipy.fft as sfft

from .errors import ContractViolation, GridMismatchError, InvalidParameter, SingularSymbolError

Representation = Literal["physical", "frequency"]


@dataclass(frozen=True)
class GridSpec:
    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidParameter(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n % 2:
            raise InvalidParameter(f"points per axis must be even and >= 8, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParameter(f"period must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @classmethod
    def with_box_density(cls, d, n, m):
        """Grid with ``L = 2 pi m`` so each unit frequency box holds ``m^d`` modes."""
        return cls(d, n, 2 * math.pi * m)

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def h(self):
        return self.L / self.n

    @property
    def cell_volume(self):
        return self.h ** self.d

    @property
    def volume(self):
        return self.L ** self.d

    @property
    def m(self):
        """Lattice points per unit frequency along each axis (``L / 2 pi``)."""
        return self.L / (2 * math.pi)

    @cached_property
    def lattice_1d(self):
        """Integer lattice index ``k`` of each FFT-ordered position along one axis."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    @cached_property
    def xi_1d(self):
        return 2 * math.pi * self.lattice_1d / self.L

    @cached_property
    def x_1d(self):
        return np.arange(self.n) * self.h

    @cached_property
    def xi(self):
        """Open mesh of frequency components, one broadcastable array per axis."""
        return tuple(
            self.xi_1d.reshape([-1 if a == i else 1 for a in range(self.d)])
            for i in range(self.d)
        )

    @cached_property
    def x(self):
        return tuple(
            self.x_1d.reshape([-1 if a == i else 1 for a in range(self.d)])
            for i in range(self.d)
        )

    @cached_property
    def xi_norm2(self):
        out = np.zeros(self.shape)
        for comp in self.xi:
            out = out + comp ** 2
        return out

    @cached_property
    def bracket(self):
        """Japanese bracket ``<xi> = (1 + |xi|^2)^{1/2}`` on the lattice."""
        return np.sqrt(1.0 + self.xi_norm2)

    @cached_property
    def nyquist_mask(self):
        """True on modes with some component at the unpaired index ``-n/2``."""
        mask = np.zeros(self.shape, dtype=bool)
        for i in range(self.d):
            sl = [slice(None)] * self.d
            sl[i] = self.n // 2
            mask[tuple(sl)] = True
        return mask

    def mesh(self):
        return np.meshgrid(*([self.x_1d] * self.d), indexing="ij")


def _forward(values, spec):
    return sfft.fftn(values) * spec.cell_volume


def _inverse(coeffs, spec):
    return sfft.ifftn(coeffs) / spec.cell_volume


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a :class:`GridSpec`, in physical or frequency form.

    ``real`` flags a field known to be real-valued in physical space; it is
    carried through linear operations with real symbols.
    """

    spec: GridSpec
    values: np.ndarray
    representation: Representation = "physical"
    real: bool = False

    def __post_init__(self):
        if self.representation not in ("physical", "frequency"):
            raise InvalidParameter(f"unknown representation {self.representation!r}")
        arr = np.array(self.values, dtype=np.complex128, copy=True)
        if arr.shape != self.spec.shape:
            raise InvalidParameter(
                f"values have shape {arr.shape}, grid expects {self.spec.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, spec, representation="physical", real=True):
        return cls(spec, np.zeros(spec.shape, dtype=np.complex128), representation, real)

    @classmethod
    def from_function(cls, spec, func, real=None):
        vals = np.asarray(func(*spec.x), dtype=np.complex128)
        vals = np.broadcast_to(vals, spec.shape)
        if real is None:
            real = bool(np.all(vals.imag == 0))
        return cls(spec, vals, "physical", real)

    @classmethod
    def plane_wave(cls, spec, k, amplitude=1.0):
        """``amplitude * exp(i xi . x)`` for the lattice frequency ``xi`` nearest ``k``."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        if k.size == 1 and spec.d > 1:
            k = np.concatenate([k, np.zeros(spec.d - 1)])

        def wave(*x):
            phase = sum(ki * xi for ki, xi in zip(k, x))
            return amplitude * np.exp(1j * phase)

        return cls.from_function(spec, wave, real=False)

    # representation changes -------------------------------------------------
    def physical(self):
        return self if self.representation == "physical" else transform(self, "inverse")

    def frequency(self):
        return self if self.representation == "frequency" else transform(self, "forward")

    @property
    def phys(self):
        """Physical-space values as an array (transforms if needed)."""
        return self.physical().values

    @property
    def coeffs(self):
        return self.frequency().values

    def replace(self, values, representation=None, real=None):
        return Field(
            self.spec,
            values,
            self.representation if representation is None else representation,
            self.real if real is None else real,
        )

    # arithmetic ---------------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        if other.spec != self.spec:
            raise GridMismatchError(f"grids differ: {self.spec} vs {other.spec}")
        return other.physical().values if self.representation == "physical" else other.coeffs

    def __add__(self, other):
        vals = self._check(other)
        if vals is NotImplemented:
            return NotImplemented
        return self.replace(self.values + vals, real=self.real and other.real)

    def __sub__(self, other):
        vals = self._check(other)
        if vals is NotImplemented:
            return NotImplemented
        return self.replace(self.values - vals, real=self.real and other.real)

    def __neg__(self):
        return self.replace(-self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            raise TypeError("use pointwise products on .phys arrays; Field*Field is ambiguous")
        real = self.real and np.isrealobj(scalar)
        return self.replace(self.values * scalar, real=real)

    __rmul__ = __mul__

    def real_part(self):
        return Field(self.spec, self.phys.real, "physical", True)

    def imag_part(self):
        return Field(self.spec, self.phys.imag, "physical", True)

    def __repr__(self):
        return (
            f"Field(d={self.spec.d}, n={self.spec.n}, L={self.spec.L:.6g}, "
            f"{self.representation}, real={self.real})"
        )


def transform(field: Field, direction: Literal["forward", "inverse"]) -> Field:
    """Move a field between physical samples and continuum-scaled coefficients."""
    if direction == "forward":
        if field.representation != "physical":
            raise ContractViolation("forward transform needs a field in physical representation")
        return Field(field.spec, _forward(field.values, field.spec), "frequency", field.real)
    if direction == "inverse":
        if field.representation != "frequency":
            raise ContractViolation("inverse transform needs a field in frequency representation")
        vals = _inverse(field.values, field.spec)
        if field.real:
            vals = vals.real
        return Field(field.spec, vals, "physical", field.real)
    raise InvalidParameter(f"direction must be 'forward' or 'inverse', got {direction!r}")


@dataclass(frozen=True)
class NormSpec:
    """``lebesgue(p)`` or ``sobolev(s)``; Sobolev uses the weight ``<xi>^s``."""

    kind: Literal["lebesgue", "sobolev"]
    p: float = 2.0
    s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lebesgue", "sobolev"):
            raise InvalidParameter(f"unknown norm kind {self.kind!r}")
        if self.kind == "lebesgue" and not self.p >= 1:
            raise InvalidParameter(f"Lebesgue exponent must be >= 1, got {self.p}")

    @classmethod
    def lebesgue(cls, p):
        return cls("lebesgue", p=float(p))

    @classmethod
    def sobolev(cls, s):
        return cls("sobolev", s=float(s))


def lp_norm(values, spec, p):
    """Riemann-sum ``L^p`` norm of physical samples (``p = inf`` gives the sup)."""
    if not p >= 1:
        raise InvalidParameter(f"Lebesgue exponent must be >= 1, got {p}")
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 2:
        return float(math.sqrt(spec.cell_volume * np.vdot(a, a).real))
    return float((spec.cell_volume * np.sum(a ** p)) ** (1.0 / p))


def sobolev_norm_coeffs(coeffs, spec, s):
    weight = spec.bracket ** (2 * s) if s else 1.0
    return float(math.sqrt(np.sum(weight * (coeffs.real ** 2 + coeffs.imag ** 2)) / spec.volume))


def norm(field: Field, spec: NormSpec) -> float:
    if spec.kind == "lebesgue":
        return lp_norm(field.phys, field.spec, spec.p)
    return sobolev_norm_coeffs(field.coeffs, field.spec, spec.s)


def h1_norm(field):
    return sobolev_norm_coeffs(field.coeffs, field.spec, 1.0)


def l2_norm(field):
    return sobolev_norm_coeffs(field.coeffs, field.spec, 0.0)


Symbol = Union[Callable, np.ndarray, float, complex]


def evaluate_symbol(spec: GridSpec, symbol: Symbol) -> np.ndarray:
    """Evaluate ``symbol`` on the frequency lattice, rejecting non-finite values."""
    if callable(symbol):
        vals = symbol(spec.xi)
    else:
        vals = symbol
    vals = np.broadcast_to(np.asarray(vals), spec.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise SingularSymbolError([spec.xi_1d[i] for i in idx])
    return vals


def apply_multiplier(field: Field, symbol: Symbol, real_symbol=None) -> Field:
    """Multiply the frequency coefficients pointwise by ``symbol(xi)``.

    The result keeps the input's representation.  ``real_symbol`` declares
    that the symbol is real and even so realness of the field is preserved;
    by default this is inferred from the sampled values.
    """
    vals = evaluate_symbol(field.spec, symbol)
    if real_symbol is None:
        real_symbol = np.isrealobj(vals) or not np.any(np.asarray(vals).imag)
        if real_symbol:
            real_symbol = _is_even(np.asarray(vals).real, field.spec)
    out = Field(field.spec, field.coeffs * vals, "frequency", field.real and bool(real_symbol))
    return out.physical() if field.representation == "physical" else out


def _is_even(vals, spec):
    flipped = vals
    for axis in range(spec.d):
        flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
    return bool(np.allclose(vals, flipped, rtol=0, atol=1e-14 * (np.abs(vals).max() + 1e-300)))


def bessel_power(field: Field, sigma: float) -> Field:
    """Apply ``(1 - Laplacian)^{sigma/2}``, the symbol ``<xi>^sigma``."""
    if sigma == 0:
        return field
    return apply_multiplier(field, field.spec.bracket ** sigma, real_symbol=True)


def check_same_grid(*fields):
    first = fields[0].spec
    for f in fields[1:]:
        if f.spec != first:
            raise GridMismatchError(f"grids differ: {first} vs {f.spec}")
    return first
