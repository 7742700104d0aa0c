import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kgh.errors import ContractViolation, GridMismatchError, InvalidParameter, SingularSymbolError
from kgh.grid import Field, GridSpec, NormSpec, apply_multiplier, bessel_power, norm, transform
from kgh.snapshot import decode, encode, read_snapshot, write_snapshot


def random_field(spec, seed, real=False):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(spec.shape)
    if not real:
        vals = vals + 1j * rng.standard_normal(spec.shape)
    return Field(spec, vals, "physical", real)


grids = st.sampled_from([GridSpec(1, 32, 2 * math.pi), GridSpec(2, 16, 4 * math.pi), GridSpec(3, 8, 2 * math.pi)])


# -- GridSpec -----------------------------------------------------------------


@pytest.mark.parametrize("args", [(4, 16, 1.0), (1, 7, 1.0), (1, 6, 1.0), (2, 16, 0.0), (2, 16, -1.0)])
def test_gridspec_rejects_bad_parameters(args):
    with pytest.raises(InvalidParameter):
        GridSpec(*args)


def test_lattice_spacing_from_box_density():
    spec = GridSpec.with_box_density(1, 64, 4)
    assert spec.L == pytest.approx(8 * math.pi)
    xi = spec.xi_1d
    assert np.diff(np.sort(xi))[0] == pytest.approx(0.25)
    assert xi.min() == pytest.approx(-32 * 0.25)


# -- transform ----------------------------------------------------------------


def test_zero_field_transforms_to_zero():
    spec = GridSpec(2, 16, 2 * math.pi)
    assert not np.any(transform(Field.zeros(spec), "forward").values)


def test_constant_has_single_coefficient():
    spec = GridSpec(1, 32, 2 * math.pi)
    c = 1.7 - 0.3j
    coeffs = transform(Field(spec, np.full(32, c)), "forward").values
    assert coeffs[0] == pytest.approx(2 * math.pi * c, rel=1e-14)
    assert np.abs(coeffs[1:]).max() < 1e-13


def test_forward_matches_direct_sum():
    spec = GridSpec(1, 16, 3.0)
    f = random_field(spec, 0)
    x, xi = spec.x_1d, spec.xi_1d
    direct = (spec.L / spec.n) * np.exp(-1j * np.outer(xi, x)) @ f.values
    assert np.allclose(f.coeffs, direct, rtol=0, atol=1e-13)


@given(grids, st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_round_trip(spec, seed):
    f = random_field(spec, seed)
    back = transform(transform(f, "forward"), "inverse")
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_transform_requires_opposite_representation():
    spec = GridSpec(1, 16, 1.0)
    f = random_field(spec, 1)
    with pytest.raises(ContractViolation):
        transform(f, "inverse")
    with pytest.raises(ContractViolation):
        transform(f.frequency(), "forward")


def test_real_flag_survives_round_trip():
    spec = GridSpec(2, 16, 2 * math.pi)
    f = random_field(spec, 2, real=True)
    back = f.frequency().physical()
    assert back.real
    assert np.abs(back.values.imag).max() <= 1e-12 * np.abs(back.values).max()


# -- norms --------------------------------------------------------------------


def test_zero_field_norms():
    spec = GridSpec(3, 8, 2 * math.pi)
    z = Field.zeros(spec)
    for ns in (NormSpec.lebesgue(1), NormSpec.lebesgue(math.inf), NormSpec.sobolev(-1), NormSpec.sobolev(2)):
        assert norm(z, ns) == 0.0


def test_constant_l2_norm():
    spec = GridSpec(1, 32, 2 * math.pi)
    assert norm(Field(spec, np.full(32, -3.0)), NormSpec.lebesgue(2)) == pytest.approx(3 * math.sqrt(2 * math.pi), rel=1e-14)


def test_plane_wave_h1_norm():
    spec = GridSpec(1, 32, 2 * math.pi)
    f = Field.plane_wave(spec, 3)
    assert norm(f, NormSpec.sobolev(1)) == pytest.approx(math.sqrt(10) * math.sqrt(2 * math.pi), rel=1e-13)


def test_sup_norm_and_bad_exponent():
    spec = GridSpec(1, 16, 1.0)
    f = random_field(spec, 3)
    assert norm(f, NormSpec.lebesgue(math.inf)) == pytest.approx(np.abs(f.values).max())
    with pytest.raises(InvalidParameter):
        NormSpec.lebesgue(0.5)


@given(grids, st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_parseval(spec, seed):
    f = random_field(spec, seed)
    assert norm(f, NormSpec.sobolev(0)) == pytest.approx(norm(f, NormSpec.lebesgue(2)), rel=1e-12)


@given(grids, st.integers(0, 2**32 - 1), st.floats(1, 8))
@settings(max_examples=30, deadline=None)
def test_lebesgue_norms_are_monotone_in_p_on_unit_volume(spec, seed, p):
    # Box of volume 1 makes the normalized L^p norms increase with p.
    unit = GridSpec(spec.d, spec.n, 1.0)
    f = random_field(unit, seed)
    assert norm(f, NormSpec.lebesgue(p)) <= norm(f, NormSpec.lebesgue(p + 1)) * (1 + 1e-12)


# -- multipliers --------------------------------------------------------------


def test_multiplier_identity_and_zero():
    spec = GridSpec(2, 16, 2 * math.pi)
    f = random_field(spec, 4)
    assert np.allclose(apply_multiplier(f, 1.0).values, f.values, atol=1e-13)
    assert not np.any(np.abs(apply_multiplier(f, 0.0).values) > 0)


def test_bracket_multiplier_on_plane_wave():
    spec = GridSpec(1, 32, 2 * math.pi)
    f = Field.plane_wave(spec, 2)
    out = apply_multiplier(f, lambda xi: np.sqrt(1 + xi[0] ** 2))
    assert np.allclose(out.values, math.sqrt(5) * f.values, rtol=0, atol=1e-13)


def test_singular_symbol_names_frequency():
    spec = GridSpec(1, 16, 2 * math.pi)
    f = random_field(spec, 5)
    with np.errstate(divide="ignore"), pytest.raises(SingularSymbolError) as exc:
        apply_multiplier(f, lambda xi: 1.0 / xi[0])
    assert "0" in str(exc.value)


@given(grids, st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_multiplier_composition(spec, seed, a, b):
    f = random_field(spec, seed)
    m1 = lambda xi: np.exp(1j * a * xi[0]) * (1 + xi[0] ** 2)
    m2 = lambda xi: np.cos(b * sum(x * x for x in xi))
    two = apply_multiplier(apply_multiplier(f, m1), m2)
    one = apply_multiplier(f, lambda xi: m1(xi) * m2(xi))
    assert np.abs(two.values - one.values).max() <= 1e-12 * max(1.0, np.abs(one.values).max())


def test_bessel_power_identities():
    spec = GridSpec(3, 8, 2 * math.pi)
    f = random_field(spec, 6)
    assert bessel_power(f, 0) is f
    c = Field(spec, np.full(spec.shape, 2.5))
    assert np.allclose(bessel_power(c, 1.7).values, c.values, rtol=1e-14)


@given(grids, st.integers(0, 2**32 - 1), st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_bessel_power_inverse_pair(spec, seed, sigma):
    f = random_field(spec, seed)
    back = bessel_power(bessel_power(f, sigma), -sigma)
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_grid_mismatch_in_arithmetic():
    a = Field.zeros(GridSpec(1, 16, 1.0))
    b = Field.zeros(GridSpec(1, 16, 2.0))
    with pytest.raises(GridMismatchError):
        a + b


# -- snapshots ----------------------------------------------------------------


@pytest.mark.parametrize("rep", ["physical", "frequency"])
def test_snapshot_round_trip(tmp_path, rep):
    spec = GridSpec(2, 16, 4 * math.pi)
    f = random_field(spec, 7)
    f = f if rep == "physical" else f.frequency()
    path = tmp_path / "a.mkgh"
    write_snapshot(path, f, t=1.25, gamma=2.5)
    snap = read_snapshot(path)
    assert snap.t == 1.25 and snap.gamma == 2.5
    assert snap.field.spec == spec and snap.field.representation == rep
    assert np.array_equal(snap.field.values, f.values)


def test_snapshot_layout():
    spec = GridSpec(1, 8, 1.0)
    f = Field(spec, np.arange(8) + 0.5j)
    data = encode(f, t=0.0)
    assert data[:4] == b"MKGH"
    assert len(data) == 4 + 3 * 4 + 3 * 8 + 1 + 16 * 8
    assert math.isnan(np.frombuffer(data[16:40], "<f8")[1])
    assert np.frombuffer(data[-16:], "<f8").tolist() == [7.0, 0.5]
    assert decode(data).gamma is None


@pytest.mark.parametrize("mutate", [lambda b: b"XXXX" + b[4:], lambda b: b[:-1], lambda b: b[:10]])
def test_snapshot_rejects_corruption(mutate):
    data = encode(Field.zeros(GridSpec(1, 8, 1.0)))
    with pytest.raises(InvalidParameter):
        decode(mutate(data))
