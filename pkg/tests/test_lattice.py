import math
import random

import mpmath
import pytest
from hypothesis import given, strategies as st

from polygas.lattice import (ModelParams, SiteSet, SpinFlipConfig, boundary, field_energy, hamiltonian,
                             interior_energy, minus_interior, phi, spins_from_config, total_energy)
from polygas.zeta import zeta, zeta_mp, zeta_with_error

import oracles


def cfg(*half):
    return SpinFlipConfig.from_half(half)


# -- parameters ------------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(alpha=1.0), dict(alpha=2.5), dict(m_param=1.0), dict(dist_exponent=2.0),
                                dict(beta=-1.0), dict(volume=[]), dict(field={7: 1.0})])
def test_model_params_rejects_invalid(kw):
    with pytest.raises(ValueError):
        ModelParams(**kw)


def test_model_params_interval_and_field():
    p = ModelParams.interval(-2, 2, field={0: 0.3, 1: 0.0})
    assert tuple(p.volume) == (-2, -1, 0, 1, 2)
    assert p.field_map == {0: 0.3}


def test_site_set_sorted_unique():
    assert tuple(SiteSet([3, 1, 3, 2])) == (1, 2, 3)


def test_spin_flip_config_rejects_odd():
    with pytest.raises(ValueError):
        cfg(0.5)


# -- boundary / interior ------------------------------------------------------------------

def test_boundary_examples():
    assert len(boundary({x: 1 for x in range(5)})) == 0
    assert boundary({0: -1, 1: 1, 2: 1}).half() == [-0.5, 0.5]
    sigma = {0: -1, 1: -1, 2: 1, 3: -1, 4: 1}
    assert boundary(sigma).half() == [-0.5, 1.5, 2.5, 3.5]


def test_minus_interior_examples():
    assert tuple(minus_interior(SpinFlipConfig(()))) == ()
    assert tuple(minus_interior(cfg(-0.5, 0.5))) == (0,)
    assert tuple(minus_interior(cfg(-0.5, 1.5, 2.5, 3.5))) == (0, 1, 3)


def test_boundary_and_interior_inverse_exhaustive():
    vol = list(range(12))
    for mask in range(1 << len(vol)):
        sigma = {x: (-1 if mask >> i & 1 else 1) for i, x in enumerate(vol)}
        c = boundary(sigma)
        assert len(c) % 2 == 0
        assert spins_from_config(c, vol) == sigma
        assert boundary(spins_from_config(c, vol)) == c


@given(st.sets(st.integers(-30, 30), max_size=10))
def test_interior_roundtrip(sites):
    c = SpinFlipConfig.from_interior(sites)
    assert set(c.interior) == sites
    assert c.half() == oracles.flips_of(sites)


# -- energies -----------------------------------------------------------------------------

def test_hamiltonian_examples():
    assert interior_energy((0,), 2.0) == pytest.approx(2 * math.pi ** 2 / 3, abs=1e-13)
    assert interior_energy((), 1.5) == 0
    assert interior_energy((0, 1), 2.0) == pytest.approx(8 * math.pi ** 2 / 6 - 4, abs=1e-13)
    p = ModelParams(alpha=2.0)
    assert hamiltonian(cfg(-0.5, 0.5), p) == pytest.approx(6.57973626739, abs=1e-10)
    assert hamiltonian(SpinFlipConfig(()), p) == 0


def test_hamiltonian_matches_direct_sum():
    rng = random.Random(5)
    for _ in range(100):
        alpha = rng.choice([1.5, 1.8, 2.0])
        sites = sorted(rng.sample(range(-8, 9), rng.randint(1, 5)))
        direct, tail = oracles.energy_direct(sites, alpha, radius=2000)
        h = interior_energy(tuple(sites), alpha)
        assert direct - 1e-9 <= h <= direct + tail + 1e-9


def test_hamiltonian_matches_mpmath():
    for alpha in (1.2, 1.5, 2.0):
        for sites in [(0,), (0, 1), (0, 2, 5), (-3, -1, 0, 4)]:
            ref = float(oracles.energy_mp(sites, alpha))
            assert interior_energy(sites, alpha) == pytest.approx(ref, rel=1e-13)
            assert float(interior_energy(sites, alpha, dps=40)) == pytest.approx(ref, rel=1e-15)


def test_energy_floor_exhaustive():
    vol = list(range(11))
    for mask in range(1, 1 << len(vol)):
        sites = tuple(x for i, x in enumerate(vol) if mask >> i & 1)
        assert interior_energy(sites, 2.0) >= 2.0
        assert interior_energy(sites, 1.1) >= 2.0


@given(st.sets(st.integers(-20, 20), min_size=1, max_size=8), st.integers(-50, 50))
def test_translation_invariance(sites, k):
    a = interior_energy(tuple(sorted(sites)), 1.7)
    b = interior_energy(tuple(sorted(x + k for x in sites)), 1.7)
    assert abs(a - b) <= 1e-12 * max(1.0, a)


def test_phi_examples():
    assert phi([0], [1], 2.0) == 4.0
    assert phi([0], [2], 2.0) == 1.0
    assert phi([0, 1], [3], 1.5) == pytest.approx(4 * 3 ** -1.5 + 4 * 2 ** -1.5, rel=1e-14)
    with pytest.raises(ValueError):
        phi([0, 1], [1], 2.0)
    with pytest.raises(ValueError):
        phi([], [1], 2.0)


@given(st.sets(st.integers(-20, 0), min_size=1, max_size=5), st.sets(st.integers(1, 20), min_size=1, max_size=5))
def test_phi_symmetric(a, b):
    assert phi(sorted(a), sorted(b), 1.6) == phi(sorted(b), sorted(a), 1.6)


@given(st.sets(st.integers(-10, 0), min_size=1, max_size=5), st.sets(st.integers(2, 12), min_size=1, max_size=5))
def test_energy_of_union_subtracts_phi(a, b):
    whole = interior_energy(tuple(sorted(a | b)), 2.0)
    split = interior_energy(tuple(sorted(a)), 2.0) + interior_energy(tuple(sorted(b)), 2.0) - phi(sorted(a), sorted(b), 2.0)
    assert whole == pytest.approx(split, rel=1e-12)


def test_field_energy_examples():
    p = ModelParams.interval(0, 5, field={0: 0.3, 1: -0.1})
    assert field_energy(SiteSet([0]), ModelParams.interval(0, 5)) == 0
    assert field_energy(SiteSet([0, 1]), p) == pytest.approx(0.4)
    assert field_energy(SiteSet([5]), ModelParams.interval(0, 5, field={0: 1.0})) == 0
    assert total_energy(SiteSet([0, 1]), p) == pytest.approx(interior_energy((0, 1), 2.0) + 0.4)


# -- zeta -------------------------------------------------------------------------------------

def test_zeta_examples():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-13)
    assert zeta(4.0) == pytest.approx(math.pi ** 4 / 90, abs=1e-13)
    assert zeta(1.5) == pytest.approx(2.6123753486854883, abs=1e-13)
    with pytest.raises(ValueError):
        zeta(1.0)


@given(st.floats(1.01, 6.0))
def test_zeta_matches_mpmath(alpha):
    assert abs(zeta(alpha) - float(mpmath.zeta(alpha))) <= 1e-13
    _, err = zeta_with_error(alpha)
    assert err <= 1e-13


def test_zeta_high_precision():
    with mpmath.workdps(60):
        assert abs(zeta_mp(1.5, 60) - mpmath.zeta(mpmath.mpf(1.5))) < mpmath.mpf(10) ** -55
