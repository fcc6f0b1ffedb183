import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatmono.errors import ConfigError, DomainViolation
from scatmono.normal_form import (
    DET_BOUND,
    MoserField,
    NormalizingMap,
    domain_check,
    factor_flat,
    moser_det,
    moser_field_eval,
    moser_matrix,
    normalize,
)
from scatmono.phase_space import ComplexPair
from scatmono.polynomial import FlatPolynomial, Poly

CUBIC = FlatPolynomial({(2, 1): 1.0})
z1p, z2p = Poly({(1, 0): 1}), Poly({(0, 1): 1})


def _polydisk(rng, radius, n):
    r = radius * np.sqrt(rng.random((n, 2)))
    return r * np.exp(2j * np.pi * rng.random((n, 2)))


def test_factor_zero():
    f = factor_flat(FlatPolynomial.zero())
    assert f.is_zero


def test_factor_cubic_examples(rng):
    f = factor_flat(CUBIC)
    assert f.G1 == Poly({(1, 1): 2 / 3}) and f.G2 == Poly({(2, 0): 1 / 3})
    assert f.F1 == Poly({(0, 1): 1.0}) and f.E1 == Poly({(1, 0): 1.0})
    # residual oracle on a random grid, independent of the polynomial algebra
    z = rng.normal(size=(200, 2)) + 1j * rng.normal(size=(200, 2))
    a, b = z[:, 0], z[:, 1]
    np.testing.assert_allclose(f.G1(a, b) * a + f.G2(a, b) * b, a**2 * b, atol=1e-12)
    np.testing.assert_allclose(f.F1(a, b) * a + f.E1(a, b) * b, 2 * a * b, atol=1e-12)
    np.testing.assert_allclose(f.F2(a, b) * a + f.E2(a, b) * b, a**2, atol=1e-12)


def test_factor_rejects_low_degree():
    with pytest.raises(ConfigError):
        factor_flat(Poly({(1, 1): 1.0}))


@settings(max_examples=30, deadline=None)
@given(
    st.dictionaries(
        st.tuples(st.integers(0, 4), st.integers(0, 4)).filter(lambda k: sum(k) >= 3),
        st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
        max_size=4,
    )
)
def test_factor_identities(terms):
    R = FlatPolynomial(terms)
    f = factor_flat(R)
    for res in (
        R - (f.G1 * z1p + f.G2 * z2p),
        R.diff(1) - (f.F1 * z1p + f.E1 * z2p),
        R.diff(2) - (f.F2 * z1p + f.E2 * z2p),
    ):
        assert all(abs(c) < 1e-12 for _, c in res)
    for p in (f.G1, f.G2, f.F1, f.E1, f.F2, f.E2):
        assert p(0, 0) == 0


def test_moser_matrix_examples():
    f = factor_flat(CUBIC)
    M = moser_matrix(0.7, ComplexPair(0, 0), f)
    np.testing.assert_array_equal(M, [[0, 1], [1, 0]])
    assert np.linalg.det(M) == pytest.approx(-1)
    f0 = factor_flat(FlatPolynomial.zero())
    np.testing.assert_array_equal(moser_matrix(1.0, ComplexPair(0.3, 1j), f0), [[0, 1], [1, 0]])
    M = moser_matrix(1.0, ComplexPair(0.1, 0.1), f)
    # F1 = z2, F2 = z1 (weight 1 for z1^2), E1 = z1, E2 = 0
    np.testing.assert_allclose(M, [[0.1, 1.1], [1.1, 0]])
    assert abs(np.linalg.det(M)) >= DET_BOUND


def test_domain_check_examples():
    assert domain_check(factor_flat(FlatPolynomial.zero()), 5.0)
    assert domain_check(factor_flat(CUBIC), 0.05)
    assert not domain_check(factor_flat(CUBIC), 1.0)
    with pytest.raises(ValueError):
        domain_check(factor_flat(CUBIC), 0.0)


def test_moser_field_examples(rng):
    mf0 = MoserField(factor_flat(FlatPolynomial.zero()))
    assert moser_field_eval(mf0, 0.5, ComplexPair(0.2, -0.1j)) == (0, 0)
    mf = MoserField(factor_flat(CUBIC))
    assert moser_field_eval(mf, 0.3, ComplexPair(0, 0)) == (0, 0)
    # dH_t . X_t = -R with H_t = z1 z2 + t z1^2 z2 differentiated by hand
    for t, z1, z2 in [(1.0, 0.1, 0.1), (0.4, 0.03 - 0.02j, -0.04j)]:
        A, B = moser_field_eval(mf, t, ComplexPair(z1, z2))
        d1 = z2 + t * 2 * z1 * z2
        d2 = z1 + t * z1**2
        R = z1**2 * z2
        assert abs(d1 * A + d2 * B + R) <= 1e-10 * max(abs(R), 1e-300)


def test_moser_linear_system_residual(rng):
    f = factor_flat(FlatPolynomial({(2, 2): 0.05, (3, 1): 0.02j}))
    mf = MoserField(f)
    z = _polydisk(rng, 0.3, 500)
    t = 0.37
    AB = mf(t, z)
    M = np.array(
        [[moser_matrix(t, ComplexPair(*zz), f) @ ab for zz, ab in zip(z, AB)]]
    )[0]
    G = np.stack([f.G1(z[:, 0], z[:, 1]), f.G2(z[:, 0], z[:, 1])], axis=-1)
    assert np.max(np.abs(M + G)) <= 1e-12 * max(1.0, np.max(np.abs(G)))


def test_near_singular_matrix_is_a_domain_violation():
    mf = MoserField(factor_flat(FlatPolynomial({(2, 1): 1.0})))
    # det = t^2 F1 E2 - (1 + t F2)(1 + t E1) = -(1 + z1)^2 at t = 1, E2 = 0
    with pytest.raises(DomainViolation):
        mf(1.0, np.array([[-1.0 + 0j, 0.5]]))


def test_normalize_identity():
    nm = normalize(FlatPolynomial.zero(), 1.0)
    assert nm.is_identity
    w = np.array([[0.3 + 0.1j, -0.2j]])
    np.testing.assert_array_equal(nm.forward(w), w)


def test_normalize_rejects_uncertified_radius():
    with pytest.raises(DomainViolation):
        normalize(CUBIC, 1.0)


def test_fixed_point_and_inverse(quartic, rng, cfg):
    _, nm = quartic
    origin = np.zeros((1, 2), dtype=complex)
    assert np.all(nm.forward(origin) == 0) and np.all(nm.inverse(origin) == 0)
    z = _polydisk(rng, 0.25, 300)
    back = nm.inverse(nm.forward(z))
    assert np.max(np.abs(back - z)) <= 10 * cfg.rel_tol


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_intermediate_time_identity(quartic, rng, cfg, t):
    sys, nm = quartic
    z = _polydisk(rng, 0.3, 400)
    w = nm.forward(z, t)
    Ht = w[:, 0] * w[:, 1] + t * sys.perturbation(w[:, 0], w[:, 1])
    assert np.max(np.abs(Ht - z[:, 0] * z[:, 1])) <= 100 * cfg.rel_tol


def test_displacement_is_higher_order(quartic):
    _, nm = quartic
    ang = 2 * np.pi * np.arange(16) / 16
    dirs = np.stack(np.meshgrid(np.exp(1j * ang), np.exp(1j * ang), indexing="ij"), -1).reshape(-1, 2)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    disp = [np.max(np.linalg.norm(nm.forward(r * dirs) - r * dirs, axis=1)) for r in (0.2, 0.1, 0.05)]
    assert disp[0] / disp[1] >= 4 and disp[1] / disp[2] >= 4


def test_leaving_certified_region_reports_point(cfg):
    R = FlatPolynomial({(2, 2): 0.05})
    nm = normalize(R, 0.3, cfg)
    far = np.array([[0.0, 0.0], [2.0 + 0j, 2.0 + 0j]])
    with pytest.raises(DomainViolation) as info:
        nm.forward(far)
    assert info.value.index == 1 and info.value.point is not None


def test_custom_map_at_other_tolerance(quartic):
    sys, nm = quartic
    loose = NormalizingMap(nm.field, nm.domain_radius, type(nm.cfg)(rel_tol=1e-6, abs_tol=1e-9))
    z = np.array([[0.2, 0.15j]])
    assert np.max(np.abs(loose.forward(z) - nm.forward(z))) < 1e-5
