"""Deterministic random fields with power-law spectral envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .grid import Field, GridSpec

GENERATOR = "numpy.PCG64/kgh-corpus-v1"


@dataclass(frozen=True)
class CorpusSpec:
    """Fields with ``|f_hat(xi)| = <xi>^-alpha`` and independent uniform phases.

    Phases are drawn on the lattice cube ``|j|_inf <= kmax L / 2pi`` and then
    restricted to the ball ``|xi| <= kmax``, so a given seed describes the same
    trigonometric polynomial on every grid fine enough to hold it.  Fields
    are rescaled to root-mean-square ``amplitude``.  ``alpha > d/2`` keeps the
    continuum limit in ``M^{p,p'}`` for ``p >= 2``.
    """

    seed: int
    count: int
    alpha: float = 2.2
    kmax: float | None = None
    amplitude: float = 1.0
    real: bool = True

    def __post_init__(self):
        if self.count < 0:
            raise InvalidParameter("count must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")


def default_kmax(grid: GridSpec) -> float:
    """Largest radius inside the solver's alias-free band ``|k_i| < n/4``."""
    return (grid.n // 4 - 1) * 2 * math.pi / grid.L


def _field(rng, grid: GridSpec, spec: CorpusSpec, kmax):
    J = int(math.floor(kmax * grid.L / (2 * math.pi) + 1e-9))
    if J >= grid.n // 2:
        raise InvalidParameter(f"kmax = {kmax} needs lattice index {J}, grid holds < {grid.n // 2}")
    side = 2 * J + 1
    phases = rng.uniform(0.0, 2 * math.pi, size=(side,) * grid.d)
    j = np.arange(-J, J + 1)
    xi = [(2 * math.pi / grid.L) * j.reshape([-1 if a == b else 1 for b in range(grid.d)]) for a in range(grid.d)]
    r2 = sum(x * x for x in xi)
    cube = (1.0 + r2) ** (-spec.alpha / 2) * np.exp(1j * phases)
    cube[r2 > kmax * kmax * (1 + 1e-12)] = 0
    coeffs = np.zeros(grid.shape, dtype=complex)
    idx = np.ix_(*[j % grid.n] * grid.d)
    coeffs[idx] = cube
    vals = np.fft.ifftn(coeffs)
    if spec.real:
        vals = vals.real
    rms = math.sqrt(float(np.mean(np.abs(vals) ** 2)))
    if rms > 0:
        vals = vals * (spec.amplitude / rms)
    return Field(grid, vals, "physical", spec.real)


def generate_corpus(spec: CorpusSpec, grid: GridSpec) -> list[Field]:
    kmax = default_kmax(grid) if spec.kmax is None else float(spec.kmax)
    children = np.random.SeedSequence(spec.seed).spawn(spec.count)
    return [_field(np.random.Generator(np.random.PCG64(c)), grid, spec, kmax) for c in children]
