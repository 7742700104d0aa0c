"""Fresh sweeps against the frozen constants, plus stability when ``n`` doubles."""

import numpy as np
import pytest

from kgh.calibration import EMBED_PS, FROZEN, REFINEMENT_TOL, SOBOLEV_PS, STRICHARTZ_PAIRS
from kgh.modulation import PROFILES

MAXIMA = [
    ("sobolev_embedding_ratios", "sobolev_embedding_max", SOBOLEV_PS, False),
    ("hls_ratios", "hls_max", None, False),
    ("strichartz_ratios", "strichartz_max", STRICHARTZ_PAIRS, False),
    ("embedding_ratios", "embedding_max", EMBED_PS, True),
    ("uniform_bound_ratios", "uniform_bound_max", None, True),
]
BRACKETS = [
    ("stft_ratios", "stft_bracket"),
    ("m22_ratios", "m22_bracket"),
    ("isomorphism_ratios", "isomorphism_bracket"),
]
SLOW_REFINE = {"strichartz_ratios", "embedding_ratios"}


def _maxima(values, keys):
    if keys is None:
        return {None: float(np.max(values))}
    return dict(zip(keys, np.max(values, axis=0)))


def _frozen(name, keys):
    return {None: FROZEN[name]} if keys is None else FROZEN[name]


def _profiles(per_profile):
    return PROFILES if per_profile else (None,)


def _run(sweep, fn, profile, refine=1):
    kwargs = {"refine": refine}
    if profile is not None:
        kwargs["profile"] = profile
    return sweep(fn, **kwargs)


@pytest.mark.parametrize("fn,name,keys,per_profile", MAXIMA)
def test_frozen_maxima_hold(sweep, fn, name, keys, per_profile):
    per = [_maxima(_run(sweep, fn, profile), keys) for profile in _profiles(per_profile)]
    for k, bound in _frozen(name, keys).items():
        got = max(m[k] for m in per)
        assert 0 < got <= bound, k
        # Frozen values are rounded outward over the profile union, not padded.
        assert got >= bound * 0.999, k


@pytest.mark.parametrize("fn,name", BRACKETS)
def test_frozen_brackets_hold(sweep, fn, name):
    lo, hi = FROZEN[name]
    assert 0 < lo <= hi
    vals = np.concatenate([_run(sweep, fn, p) for p in PROFILES])
    assert lo <= vals.min() and vals.max() <= hi
    assert vals.min() <= lo * 1.001 and vals.max() >= hi * 0.999


def _refine_params(items):
    return [pytest.param(*it, marks=pytest.mark.slow) if it[0] in SLOW_REFINE else it for it in items]


@pytest.mark.parametrize("fn,name,keys,per_profile", _refine_params(MAXIMA))
def test_maxima_stable_under_refinement(sweep, fn, name, keys, per_profile):
    profile = next(iter(PROFILES)) if per_profile else None
    coarse = _maxima(_run(sweep, fn, profile), keys)
    fine = _maxima(_run(sweep, fn, profile, refine=2), keys)
    for k in coarse:
        assert fine[k] <= coarse[k] * (1 + REFINEMENT_TOL), k


@pytest.mark.parametrize("fn,name", BRACKETS)
def test_brackets_stable_under_refinement(sweep, fn, name):
    for p in PROFILES:
        coarse = _run(sweep, fn, p)
        fine = _run(sweep, fn, p, refine=2)
        width = coarse.max() - coarse.min()
        assert fine.max() - fine.min() <= width * (1 + REFINEMENT_TOL)
        assert fine.min() >= coarse.min() * (1 - REFINEMENT_TOL)
        assert fine.max() <= coarse.max() * (1 + REFINEMENT_TOL)
