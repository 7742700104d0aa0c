"""Corpus sweeps behind every frozen bracket and constant.

Each ``*_ratios`` function recomputes the quantity on its pinned corpus.  The
values in :data:`FROZEN` were produced by :func:`sweep_all` under both window
profiles, taking the union, and rounded outward; tests and ``kgh verify``
compare fresh sweeps against them.  ``refine=2`` doubles ``n`` with the same
corpus (same trigonometric polynomials), which is how stability under grid
refinement is measured.
"""

from __future__ import annotations

import math

import numpy as np

from .corpus import CorpusSpec, generate_corpus
from .grid import GridSpec, NormSpec, bessel_power, norm
from .hartree import HartreeKernel, hls_ratio
from .modulation import (
    BumpWindow,
    ModulationParams,
    PROFILES,
    conjugate,
    gaussian_window,
    modulation_norm,
    partition_weights,
    stft_norm,
)
from .propagators import uniform_bound_trace
from .solver import evolve, strichartz_ratio

SOBOLEV_PS = (2.0, 4.0, 6.0)
EMBED_PS = (4.0, 4.5, 6.0)
STRICHARTZ_PAIRS = ((math.inf, 2.0), (4.0, 4.0), (math.inf, 6.0))


def _grid(d, n, m, refine):
    return GridSpec.with_box_density(d, n * refine, m)


def _weights(grid, profile):
    return partition_weights(grid, BumpWindow(PROFILES[profile]))


def sobolev_embedding_ratios(refine=1, count=200):
    """``||f||_{L^p} / ||f||_{H^1}`` for ``p`` in :data:`SOBOLEV_PS`; shape ``(count, 3)``."""
    grid = _grid(3, 16, 1, refine)
    fields = generate_corpus(CorpusSpec(11, count, alpha=1.5, kmax=3.0), grid)
    return np.array([[norm(f, NormSpec.lebesgue(p)) / norm(f, NormSpec.sobolev(1)) for p in SOBOLEV_PS] for f in fields])


def stft_ratios(profile="smooth_step", refine=1, count=50):
    """``stft_norm / modulation_norm`` for ``(p, q, s) = (4, 4/3, 1)``."""
    grid = _grid(1, 256, 8, refine)
    params = ModulationParams(4.0, 4.0 / 3.0, 1.0)
    pw = _weights(grid, profile)
    g = gaussian_window(grid, 1.0)
    fields = generate_corpus(CorpusSpec(12, count, alpha=1.5, kmax=6.0), grid)
    return np.array([stft_norm(f, params, g) / modulation_norm(f, params, pw) for f in fields])


def m22_ratios(profile="smooth_step", refine=1, count=100):
    """``||f||_{M^{2,2}_0} / ||f||_{L^2}``."""
    grid = _grid(2, 64, 4, refine)
    pw = _weights(grid, profile)
    params = ModulationParams(2.0, 2.0, 0.0)
    fields = generate_corpus(CorpusSpec(13, count, alpha=1.5, kmax=3.0), grid)
    return np.array([modulation_norm(f, params, pw) / norm(f, NormSpec.lebesgue(2)) for f in fields])


def isomorphism_ratios(profile="smooth_step", refine=1, count=50):
    """``||B f||_{M^{4,4/3}_0} / ||f||_{M^{4,4/3}_1}``."""
    grid = _grid(1, 256, 8, refine)
    pw = _weights(grid, profile)
    lo = ModulationParams(4.0, 4.0 / 3.0, 0.0)
    hi = ModulationParams(4.0, 4.0 / 3.0, 1.0)
    fields = generate_corpus(CorpusSpec(14, count, alpha=1.5, kmax=6.0), grid)
    return np.array([modulation_norm(bessel_power(f, 1), lo, pw) / modulation_norm(f, hi, pw) for f in fields])


def embedding_ratios(profile="smooth_step", refine=1, count=50):
    """``||f||_{L^p} / ||f||_{M^{p,p'}_0}`` for ``p`` in :data:`EMBED_PS`; shape ``(count, 3)``."""
    grid = _grid(2, 64, 4, refine)
    pw = _weights(grid, profile)
    fields = generate_corpus(CorpusSpec(15, count, alpha=1.5, kmax=3.0), grid)
    out = []
    for f in fields:
        row = []
        for p in EMBED_PS:
            params = ModulationParams(p, float(conjugate(p)), 0.0)
            row.append(norm(f, NormSpec.lebesgue(p)) / modulation_norm(f, params, pw))
        out.append(row)
    return np.array(out)


def hls_ratios(refine=1, count=200):
    """HLS ratios for ``d = 3``, ``gamma = 5/2``, ``p = 2`` (so ``q = 3``)."""
    grid = _grid(3, 16, 1, refine)
    fields = generate_corpus(CorpusSpec(16, count, alpha=1.5, kmax=3.0), grid)
    return np.array([hls_ratio(f, "2", "5/2") for f in fields])


def strichartz_ratios(refine=1, count=50, amplitude=0.05):
    """Strichartz ratios of small-data runs for :data:`STRICHARTZ_PAIRS`; shape ``(count, 3)``."""
    grid = _grid(3, 16, 1, refine)
    kernel = HartreeKernel(2.5, 3)
    spec = CorpusSpec(17, 2 * count, alpha=1.5, kmax=3.0, amplitude=amplitude)
    fields = generate_corpus(spec, grid)
    out = []
    for f, g in zip(fields[::2], fields[1::2]):
        traj = evolve(f, g, kernel, 1.0, 0.02, sample_stride=1)
        out.append([strichartz_ratio(traj, kernel, q, r) for q, r in STRICHARTZ_PAIRS])
    return np.array(out)


def uniform_bound_ratios(profile="smooth_step", refine=1, count=50, T=4.0):
    """``sup_t (||K(t)f||_{M^{4,4/3}_1} + ||K'(t)f||_{M^{4,4/3}_0}) / ||f||_{M^{4,4/3}_0}``."""
    grid = _grid(1, 256, 8, refine)
    pw = _weights(grid, profile)
    params = ModulationParams(4.0, 4.0 / 3.0, 0.0)
    times = np.linspace(0.0, T, 17)
    fields = generate_corpus(CorpusSpec(18, count, alpha=1.5, kmax=6.0), grid)
    return np.array([uniform_bound_trace(f, params, times, pw).max() for f in fields])


# Decay probe packets on the long 1D box ``L = 256 pi``.
DECAY = {
    "n": 2048,
    "m": 128,
    "params": (4.0, 4.0 / 3.0, 0.0),
    "dispersive": {"width": 1.0, "carrier": 0.0},
    "bounded": {"width": 6.0, "carrier": 4.0},
}

# High-low benchmark: smooth strong data keep the fitted growth slope in its asymptotic regime.
GWP_BENCHMARK = {
    "d": 3,
    "n": 32,
    "m": 2,
    "dt": 2e-3,
    "T_max": 4.0,
    "sample_stride": 25,
    "seed": 7,
    "alpha": 8.0,
    "amplitude": 1.0,
    "N_schedule": (2.0, 4.0, 8.0, 16.0),
}

# High-low split scaling corpus.
SPLIT_CORPUS = {"d": 3, "n": 32, "m": 2, "seed": 21, "count": 100, "alpha": 2.2, "amplitude": 0.02, "N": (2, 4, 8, 16, 32)}

FROZEN = {
    "sobolev_embedding_max": {2.0: 0.5140, 4.0: 0.1745, 6.0: 0.1339},
    "hls_max": 7.684,
    "strichartz_max": {(math.inf, 2.0): 0.3264, (4.0, 4.0): 0.09089, (math.inf, 6.0): 0.08377},
    "stft_bracket": (0.3573, 0.4918),
    "m22_bracket": (0.6352, 0.6743),
    "isomorphism_bracket": (0.7630, 0.8054),
    "embedding_max": {4.0: 0.8078, 4.5: 0.7556, 6.0: 0.6684},
    "uniform_bound_max": 1.716,
}

# Allowed relative growth of a frozen maximum when n doubles.
REFINEMENT_TOL = 0.05


def sweep_all():
    """Recompute every frozen quantity (both window profiles where relevant)."""
    out = {}
    s = sobolev_embedding_ratios().max(axis=0)
    out["sobolev_embedding_max"] = dict(zip(SOBOLEV_PS, s))
    out["hls_max"] = float(hls_ratios().max())
    out["strichartz_max"] = dict(zip(STRICHARTZ_PAIRS, strichartz_ratios().max(axis=0)))
    for name, fn in [
        ("stft_bracket", stft_ratios),
        ("m22_bracket", m22_ratios),
        ("isomorphism_bracket", isomorphism_ratios),
    ]:
        vals = np.concatenate([fn(profile) for profile in PROFILES])
        out[name] = (float(vals.min()), float(vals.max()))
    emb = np.vstack([embedding_ratios(profile) for profile in PROFILES]).max(axis=0)
    out["embedding_max"] = dict(zip(EMBED_PS, emb))
    out["uniform_bound_max"] = float(max(uniform_bound_ratios(profile).max() for profile in PROFILES))
    return out
