"""Frequency-uniform decomposition, modulation norms and interpolation exponents.

Boxes are indexed by integer vectors ``k``; the window ``rho`` equals one on
the cube ``|xi - k|_inf <= 1/2`` and vanishes outside ``|xi - k|_inf < 1``.
Because the d-dimensional window is a product of one-dimensional profiles,
``sum_l rho_l`` factorises and so does every ``sigma_k``; all weights are
therefore stored per axis.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import ContractViolation, ExponentError, InvalidParameter, ResolutionExhausted
from .grid import Field, GridSpec, NormSpec, lp_norm, norm, sobolev_norm_coeffs

# -- window profiles ----------------------------------------------------------


def _glue(x, kind):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    if kind == "exp":
        out[pos] = np.exp(-1.0 / x[pos])
    else:
        out[pos] = np.exp(-1.0 / x[pos] ** 2)
    return out


def _transition(r, kind):
    s = np.clip(2.0 * (1.0 - np.abs(np.asarray(r, dtype=float))), 0.0, 1.0)
    a = _glue(s, kind)
    b = _glue(1.0 - s, kind)
    return a / (a + b)


def smooth_step_profile(r):
    """C-infinity plateau profile glued from ``exp(-1/x)`` on ``1/2 <= |r| <= 1``."""
    return _transition(r, "exp")


def gaussian_glue_profile(r):
    """Alternative plateau profile glued from ``exp(-1/x^2)``."""
    return _transition(r, "gauss")


@dataclass(frozen=True)
class BumpWindow:
    profile: Callable = smooth_step_profile

    def __call__(self, r):
        return self.profile(r)

    def validate(self, samples=2001):
        r = np.linspace(-1.25, 1.25, samples)
        v = np.asarray(self.profile(r), dtype=float)
        a = np.abs(r)
        if np.any(v < 0) or np.any(v > 1):
            raise InvalidParameter("window profile leaves [0, 1]")
        if not np.all(v[a <= 0.5] == 1.0):
            raise InvalidParameter("window profile must equal 1 on |r| <= 1/2")
        if not np.all(v[a >= 1.0] == 0.0):
            raise InvalidParameter("window profile must vanish on |r| >= 1")
        right = v[(r >= 0.5) & (r <= 1.0)]
        if np.any(np.diff(right) > 0):
            raise InvalidParameter("window profile must be monotone on [1/2, 1]")
        return self


PROFILES = {"smooth_step": smooth_step_profile, "gaussian_glue": gaussian_glue_profile}


def window_from_env() -> BumpWindow:
    """Window selected by ``KGH_WINDOW_PROFILE`` (``smooth_step`` by default)."""
    name = os.environ.get("KGH_WINDOW_PROFILE", "smooth_step")
    if name not in PROFILES:
        raise InvalidParameter(f"unknown window profile {name!r}; choose from {sorted(PROFILES)}")
    return BumpWindow(PROFILES[name])


DEFAULT_WINDOW = window_from_env()


# -- partition of unity ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PartitionWeights:
    """Separable storage of ``sigma_k`` on one grid.

    ``ks[i]`` lists the box indices with nonzero weight along axis ``i`` (the
    same for every axis), ``starts`` the lattice-order position of each box's
    first nonzero mode and ``blocks`` the weights of that box on the ``width``
    consecutive modes beginning there (zero padded).
    """

    spec: GridSpec
    window: BumpWindow
    ks: np.ndarray
    starts: np.ndarray
    blocks: np.ndarray
    dense: np.ndarray  # (len(ks), n) weights in FFT order

    @property
    def width(self):
        return self.blocks.shape[1]

    def boxes(self):
        """All box indices with nonzero weight, shape ``(B, d)``."""
        grids = np.meshgrid(*([self.ks] * self.spec.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def _axis_pos(self, k):
        pos = np.searchsorted(self.ks, k)
        if pos >= len(self.ks) or self.ks[pos] != k:
            return None
        return int(pos)

    def weights(self, k) -> np.ndarray:
        """``sigma_k`` on the whole lattice (FFT order); zero for empty boxes."""
        k = np.atleast_1d(k)
        if k.size != self.spec.d:
            raise InvalidParameter(f"box index needs {self.spec.d} components")
        out = np.ones(self.spec.shape)
        for axis, ki in enumerate(k):
            pos = self._axis_pos(int(ki))
            if pos is None:
                return np.zeros(self.spec.shape)
            shape = [1] * self.spec.d
            shape[axis] = -1
            out = out * self.dense[pos].reshape(shape)
        return out

    def partition_sum(self) -> np.ndarray:
        """``sum_k sigma_k`` accumulated box by box over each box's support."""
        n, d, w = self.spec.n, self.spec.d, self.width
        acc = np.zeros((n + w,) * d)
        for combo in product(range(len(self.ks)), repeat=d):
            block = np.ones((w,) * d)
            sl = []
            for axis, pos in enumerate(combo):
                shape = [1] * d
                shape[axis] = -1
                block = block * self.blocks[pos].reshape(shape)
                sl.append(slice(self.starts[pos], self.starts[pos] + w))
            acc[tuple(sl)] += block
        acc = acc[(slice(0, n),) * d]
        return np.fft.ifftshift(acc)


@lru_cache(maxsize=32)
def _partition_cached(spec, window):
    n = spec.n
    xi_sorted = (np.arange(n) - n // 2) / spec.m  # lattice order, in unit-box coordinates
    kmin = math.floor(xi_sorted[0]) - 1
    kmax = math.ceil(xi_sorted[-1]) + 1
    cand = np.arange(kmin, kmax + 1)
    rho = np.asarray(window(xi_sorted[None, :] - cand[:, None]), dtype=float)
    total = rho.sum(axis=0)
    sigma = rho / total
    keep = np.any(sigma > 0, axis=1)
    ks = cand[keep]
    sigma = sigma[keep]
    nz = sigma > 0
    starts = nz.argmax(axis=1)
    ends = n - nz[:, ::-1].argmax(axis=1)
    width = int((ends - starts).max())
    blocks = np.zeros((len(ks), width))
    for i, (a, b) in enumerate(zip(starts, ends)):
        blocks[i, : b - a] = sigma[i, a:b]
    dense = np.fft.ifftshift(sigma, axes=1)
    for arr in (ks, starts, blocks, dense):
        arr.setflags(write=False)
    return PartitionWeights(spec, window, ks, starts, blocks, dense)


def partition_weights(spec: GridSpec, window: BumpWindow = DEFAULT_WINDOW) -> PartitionWeights:
    """Smooth partition of unity ``sigma_k = rho_k / sum_l rho_l`` on the lattice of ``spec``."""
    return _partition_cached(spec, window)


# -- box projections --------------------------------------------------------------


def box_project(field: Field, k, weights: PartitionWeights | None = None) -> Field:
    """Frequency-uniform projection: coefficients multiplied by ``sigma_k``."""
    pw = weights or partition_weights(field.spec)
    sig = pw.weights(k)
    out = Field(field.spec, field.coeffs * sig, "frequency", field.real and _symmetric_box(k))
    return out.physical() if field.representation == "physical" else out


def reconstruct(field: Field, weights: PartitionWeights | None = None, chunk=4096) -> Field:
    """``sum_k box_k f`` accumulated box by box (frequency representation)."""
    pw = weights or partition_weights(field.spec)
    spec = field.spec
    n, d, w = spec.n, spec.d, pw.width
    pos = np.stack(
        [g.ravel() for g in np.meshgrid(*([np.arange(len(pw.ks))] * d), indexing="ij")], axis=1
    )
    coeffs = field.coeffs
    acc = np.zeros((n + w,) * d, dtype=np.complex128)
    for start in range(0, len(pos), chunk):
        blocks, idx = _gather_blocks(coeffs, pw, pos[start : start + chunk])
        full = tuple(np.broadcast_to(ia, blocks.shape) for ia in idx)
        np.add.at(acc, full, blocks)
    out = np.fft.ifftshift(acc[(slice(0, n),) * d])
    return Field(spec, out, "frequency", field.real)


def _symmetric_box(k):
    return bool(np.all(np.atleast_1d(k) == 0))


def _gather_blocks(coeffs, pw: PartitionWeights, box_pos: np.ndarray):
    """Weighted coefficient blocks for boxes given by per-axis positions ``(B, d)``.

    Returns ``(blocks, lattice_index_tuple)``; blocks have shape ``(B, w, ..., w)``
    and the index arrays give the lattice-order index of every block entry.
    """
    spec = pw.spec
    n, d, w = spec.n, spec.d, pw.width
    shifted = np.fft.fftshift(coeffs)
    padded = np.zeros((n + w,) * d, dtype=np.complex128)
    padded[(slice(0, n),) * d] = shifted
    B = box_pos.shape[0]
    idx = []
    wts = np.ones((B,) + (w,) * d)
    for axis in range(d):
        shape = [B] + [1] * d
        shape[axis + 1] = w
        ia = (pw.starts[box_pos[:, axis]][:, None] + np.arange(w)[None, :]).reshape(shape)
        idx.append(ia)
        wts = wts * pw.blocks[box_pos[:, axis]].reshape(shape)
    blocks = padded[tuple(idx)] * wts
    return blocks, idx


@lru_cache(maxsize=16)
def _demod_matrix(n, w):
    l = np.arange(n)[:, None]
    j = np.arange(w)[None, :]
    return np.exp(2j * np.pi * l * j / n)


def _block_lp(blocks, spec: GridSpec, p, w):
    """``L^p`` norms of the physical functions whose (demodulated) coefficient
    blocks are given; the modulation factor has unit modulus so it is dropped."""
    B = blocks.shape[0]
    if B == 0:
        return np.zeros(0)
    flat = blocks.reshape(B, -1)
    if p == 2:
        # Parseval holds exactly because each block fits inside the grid.
        return np.sqrt(np.sum(flat.real ** 2 + flat.imag ** 2, axis=1) / spec.volume)
    E = _demod_matrix(spec.n, w)
    out = np.empty(B)
    per = max(1, int(4_000_000 // spec.n ** spec.d))
    scale = 1.0 / spec.volume
    for start in range(0, B, per):
        arr = blocks[start : start + per]
        for _ in range(spec.d):
            arr = np.tensordot(arr, E, axes=([1], [1]))
        mag = np.abs(arr.reshape(arr.shape[0], -1)) * scale
        if math.isinf(p):
            out[start : start + per] = mag.max(axis=1)
        else:
            out[start : start + per] = (spec.cell_volume * np.sum(mag ** p, axis=1)) ** (1.0 / p)
    return out


def box_lp_norms(field: Field, p, weights: PartitionWeights | None = None):
    """``||box_k f||_{L^p}`` for every box with nonzero weight.

    Returns ``(boxes, norms)`` with ``boxes`` of shape ``(B, d)``.
    """
    pw = weights or partition_weights(field.spec)
    d = field.spec.d
    pos = np.stack(
        [g.ravel() for g in np.meshgrid(*([np.arange(len(pw.ks))] * d), indexing="ij")], axis=1
    )
    boxes = pw.ks[pos]
    blocks, _ = _gather_blocks(field.coeffs, pw, pos)
    flat = np.abs(blocks.reshape(len(pos), -1)).max(axis=1)
    live = flat > 0
    norms = np.zeros(len(pos))
    norms[live] = _block_lp(blocks[live], field.spec, p, pw.width)
    return boxes, norms


@dataclass(frozen=True)
class ModulationParams:
    p: float
    q: float
    s: float = 0.0

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if not v >= 1:
                raise InvalidParameter(f"{name} must be >= 1, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "s", float(self.s))


def _combine(boxes, norms, params: ModulationParams):
    weight = (1.0 + np.sqrt(np.sum(boxes.astype(float) ** 2, axis=1))) ** params.s
    vals = norms * weight
    if math.isinf(params.q):
        return float(vals.max()) if vals.size else 0.0
    return float(np.sum(vals ** params.q) ** (1.0 / params.q))


def modulation_norm(field: Field, params: ModulationParams, weights: PartitionWeights | None = None) -> float:
    """``|| (1+|k|)^s ||box_k f||_{L^p} ||_{l^q_k}``."""
    boxes, norms = box_lp_norms(field, params.p, weights)
    return _combine(boxes, norms, params)


# -- STFT ---------------------------------------------------------------------------


def gaussian_window(spec: GridSpec, width=1.0) -> Field:
    """Unit-``L^2`` periodised Gaussian ``exp(-pi |x|^2 / width^2)`` centred at the origin."""
    r2 = 0.0
    for x in spec.x:
        dist = np.minimum(x, spec.L - x)
        r2 = r2 + dist ** 2
    g = np.broadcast_to(np.exp(-math.pi * r2 / width ** 2), spec.shape)
    g = g / lp_norm(g, spec, 2)
    return Field(spec, g, "physical", True)


def stft_magnitudes(field: Field, window: Field, batch=None):
    """Yield ``(shift_indices, |V_g f|)`` batches over window translations.

    ``V_g f(x_a, y_b) = h^d sum_j f(x_j) conj(g(x_j - x_a)) exp(-2 pi i y_b . x_j)``
    with ``y_b = b / L``; the returned magnitude array has shape ``(batch, *grid)``
    with the frequency axes in FFT order.
    """
    spec = field.spec
    f = field.phys
    g = window.phys
    total = spec.n ** spec.d
    batch = batch or max(1, int(2_000_000 // total))
    shifts = np.array(np.unravel_index(np.arange(total), spec.shape)).T
    j = [np.arange(spec.n).reshape([1] + [-1 if a == i else 1 for a in range(spec.d)]) for i in range(spec.d)]
    for start in range(0, total, batch):
        a = shifts[start : start + batch]
        idx = tuple((j[i] - a[:, i].reshape([-1] + [1] * spec.d)) % spec.n for i in range(spec.d))
        prod_ = f[None] * np.conj(g[idx])
        V = sfft.fftn(prod_, axes=tuple(range(1, spec.d + 1))) * spec.cell_volume
        yield a, np.abs(V)


def stft_norm(field: Field, params: ModulationParams, window: Field) -> float:
    """Mixed ``L^p_x L^q_y`` norm of the STFT with weight ``(1 + |y|^2)^{s/2}``."""
    if window.spec != field.spec:
        raise InvalidParameter("window must live on the field's grid")
    gnorm = lp_norm(window.phys, window.spec, 2)
    if gnorm == 0:
        raise InvalidParameter("STFT window must be nonzero")
    if abs(gnorm - 1.0) > 1e-10:
        window = window * (1.0 / gnorm)
    spec = field.spec
    p, q, s = params.p, params.q, params.s
    if math.isinf(p):
        acc = np.zeros(spec.shape)
        for _, mag in stft_magnitudes(field, window):
            acc = np.maximum(acc, mag.max(axis=0))
        lp_x = acc
    else:
        acc = np.zeros(spec.shape)
        for _, mag in stft_magnitudes(field, window):
            acc += np.sum(mag ** p, axis=0)
        lp_x = (spec.cell_volume * acc) ** (1.0 / p)
    y2 = spec.xi_norm2 / (2 * math.pi) ** 2
    vals = lp_x * (1.0 + y2) ** (s / 2)
    if math.isinf(q):
        return float(vals.max())
    return float((np.sum(vals ** q) / spec.volume) ** (1.0 / q))


# -- exponent arithmetic ------------------------------------------------------------


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 9)
    return Fraction(str(x).strip())


def conjugate(p: Fraction):
    """Hölder conjugate ``p'`` with ``1/p + 1/p' = 1`` (``p = 1`` maps to ``inf``)."""
    if p == 1:
        return math.inf
    return p / (p - 1)


def _ratio(num, den):
    return None if den == 0 else num / den


@dataclass(frozen=True)
class ExponentTable:
    gamma: Fraction
    p: Fraction
    p_gamma: Fraction
    p_gamma_conj: Fraction
    gwp_bound: Fraction
    theta: Fraction
    split_exp: Fraction | None
    energy_exp: Fraction | None
    growth_exp: Fraction | None
    window_exp: Fraction | None

    ORDER = (
        "gamma", "p", "p_gamma", "p_gamma_conj", "gwp_bound", "theta",
        "split_exp", "energy_exp", "growth_exp", "window_exp",
    )

    def items(self):
        return [(name, getattr(self, name)) for name in self.ORDER]

    @property
    def in_gwp_range(self):
        return 2 < self.gamma < 3 and 2 < self.p < self.gwp_bound


def exponent_table(gamma, p) -> ExponentTable:
    """Exact exponents for Hartree power ``gamma`` and data exponent ``p``."""
    g = as_fraction(gamma)
    p = as_fraction(p)
    if not 0 < g < 3:
        raise ExponentError(f"gamma must lie in (0, 3), got {g}")
    p_gamma = Fraction(18) / (9 - 2 * g)
    if not 2 <= p <= p_gamma:
        raise ExponentError(f"p = {p} outside [2, p_gamma = {p_gamma}]: theta would leave [0, 1]")
    half = Fraction(1, 2)
    theta = (half - 1 / p) / (half - 1 / p_gamma)
    split = _ratio(theta, 1 - theta)
    return ExponentTable(
        gamma=g,
        p=p,
        p_gamma=p_gamma,
        p_gamma_conj=conjugate(p_gamma),
        gwp_bound=Fraction(54) / (27 - 2 * g),
        theta=theta,
        split_exp=split,
        energy_exp=None if split is None else 4 * split,
        growth_exp=_ratio(2 * theta, 1 - 3 * theta),
        window_exp=None if split is None else 1 - 2 * split,
    )


# -- sharp radial cutoffs -----------------------------------------------------------

_RADIUS_TOL = 1e-9


class CutoffNormCache:
    """Modulation norms of ``f_{|xi| >= R}`` for many radii ``R``.

    Box norms of the untruncated field are computed once; a cutoff only
    changes boxes whose support straddles the sphere ``|xi| = R``.
    """

    def __init__(self, field: Field, params: ModulationParams, weights: PartitionWeights | None = None):
        pw = weights or partition_weights(field.spec)
        spec = field.spec
        self.spec, self.params, self.pw = spec, params, pw
        d, n = spec.d, spec.n
        pos = np.stack(
            [g.ravel() for g in np.meshgrid(*([np.arange(len(pw.ks))] * d), indexing="ij")], axis=1
        )
        blocks, idx = _gather_blocks(field.coeffs, pw, pos)
        live = np.abs(blocks.reshape(len(pos), -1)).max(axis=1) > 0
        self.boxes = pw.ks[pos[live]]
        self.blocks = blocks[live]
        r2 = 0.0
        for ia in idx:
            r2 = r2 + ((ia[live] - n // 2) * (2 * math.pi / spec.L)) ** 2
        self.radii = np.broadcast_to(np.sqrt(r2), self.blocks.shape)
        nz = np.abs(self.blocks) > 0
        big = np.where(nz, self.radii, np.inf).reshape(len(self.boxes), -1)
        small = np.where(nz, self.radii, -np.inf).reshape(len(self.boxes), -1)
        self.rmin = big.min(axis=1)
        self.rmax = small.max(axis=1)
        self.full = _block_lp(self.blocks, spec, params.p, pw.width)
        self._memo = {}

    def high_norm(self, R) -> float:
        R = float(R)
        if R in self._memo:
            return self._memo[R]
        Rt = R - _RADIUS_TOL
        norms = self.full.copy()
        norms[self.rmax < Rt] = 0.0
        straddle = np.flatnonzero((self.rmin < Rt) & (self.rmax >= Rt))
        if straddle.size:
            cut = np.where(self.radii[straddle] >= Rt, self.blocks[straddle], 0)
            norms[straddle] = _block_lp(cut, self.spec, self.params.p, self.pw.width)
        val = _combine(self.boxes, norms, self.params)
        self._memo[R] = val
        return val


def _occupied_radii(field: Field, rel_tol=1e-14):
    c = np.abs(field.coeffs)
    if c.max() == 0:
        return np.zeros(0)
    occ = c > rel_tol * c.max()
    return np.unique(np.round(np.sqrt(field.spec.xi_norm2[occ]), 12))


def radial_cutoff(field: Field, R) -> tuple[Field, Field]:
    """Sharp split ``f = f_{|xi| < R} + f_{|xi| >= R}`` (exact in frequency space)."""
    mask = np.sqrt(field.spec.xi_norm2) < R - _RADIUS_TOL if math.isfinite(R) else np.ones(field.spec.shape, bool)
    c = field.coeffs
    low = np.where(mask, c, 0)
    high = c - low
    lo = Field(field.spec, low, "frequency", field.real)
    hi = Field(field.spec, high, "frequency", field.real)
    if field.representation == "physical":
        lo, hi = lo.physical(), hi.physical()
    return lo, hi


def _x_norm(field, X: NormSpec):
    if X.kind == "sobolev":
        return sobolev_norm_coeffs(field.coeffs, field.spec, X.s)
    return norm(field, X)


def approx_k_functional(f: Field, t, X: NormSpec, Y: ModulationParams, weights=None, return_radius=False):
    """Upper bound for ``K(t, f) = inf ||f_low||_X + t ||f_high||_Y`` over sharp radial cutoffs."""
    if not t > 0:
        raise InvalidParameter(f"t must be positive, got {t}")
    radii = list(_occupied_radii(f))
    if not radii:
        return (0.0, 0.0) if return_radius else 0.0
    f = f.frequency()
    cache = CutoffNormCache(f, Y, weights)
    best, best_R = math.inf, None
    for R in radii + [math.inf]:
        lo, _ = radial_cutoff(f, R)
        val = _x_norm(lo, X) + (t * cache.high_norm(R) if math.isfinite(R) else 0.0)
        if val < best:
            best, best_R = val, R
    return (best, best_R) if return_radius else best


@dataclass(frozen=True, eq=False)
class SplitResult:
    low: Field
    high: Field
    N: float
    R: float
    low_norm: float
    high_norm: float
    table: ExponentTable | None = None


def split_schedule(f: Field, Ns, table: ExponentTable, s=1.0, low_norm: NormSpec = NormSpec.sobolev(1), weights=None):
    """:func:`high_low_split` for every ``N`` in ``Ns`` sharing one norm cache."""
    params = ModulationParams(float(table.p_gamma), float(table.p_gamma_conj), s)
    cache = CutoffNormCache(f.frequency(), params, weights)
    return [high_low_split(f, N, table, s, low_norm, weights, cache=cache) for N in Ns]


def high_low_split(
    f: Field,
    N,
    table: ExponentTable,
    s=1.0,
    low_norm: NormSpec = NormSpec.sobolev(1),
    weights: PartitionWeights | None = None,
    max_radius=None,
    cache: CutoffNormCache | None = None,
) -> SplitResult:
    """Split ``f`` at the smallest radius whose remainder has
    ``||f_high||_{M^{p_gamma, p_gamma'}_s} <= 1/N``.

    Radii are searched by bisection over the occupied lattice shells up to
    ``max_radius`` (default: the inscribed ball ``|k| < n/2``).  Modes at or
    beyond that radius count as unresolved and always stay in the high part.
    Pass a :class:`CutoffNormCache` of ``f`` to reuse box norms across many ``N``.
    """
    if not N > 0:
        raise InvalidParameter(f"N must be positive, got {N}")
    spec = f.spec
    params = ModulationParams(float(table.p_gamma), float(table.p_gamma_conj), s)
    target = 1.0 / N
    R_res = (spec.n // 2) * 2 * math.pi / spec.L if max_radius is None else float(max_radius)
    occ = _occupied_radii(f)
    if occ.size == 0:
        zero = Field.zeros(spec, f.representation, f.real)
        return SplitResult(zero, zero, N, 0.0, 0.0, 0.0, table)
    cands = [float(r) for r in occ if r < R_res - _RADIUS_TOL]
    cands.append(math.inf if occ.max() < R_res - _RADIUS_TOL else R_res)
    if cache is None:
        cache = CutoffNormCache(f.frequency(), params, weights)
    elif cache.params != params:
        raise InvalidParameter("cache was built for different modulation parameters")

    def high(R):
        return 0.0 if math.isinf(R) else cache.high_norm(R)

    if high(cands[-1]) > target:
        raise ResolutionExhausted(target, high(cands[-1]), cands[-1])
    lo, hi = 0, len(cands) - 1
    if high(cands[0]) <= target:
        hi = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if high(cands[mid]) <= target:
            hi = mid
        else:
            lo = mid
    R = cands[hi]
    low, high_part = radial_cutoff(f, R)
    return SplitResult(low, high_part, N, R, _x_norm(low, low_norm), high(R), table)
