import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatmono.dynamics import PerturbedSystem, complex_flow
from scatmono.errors import ConfigError, PoleError, UnwrapAmbiguity
from scatmono.normal_form import normalize
from scatmono.phase_space import ComplexPair, EnergyMomentum
from scatmono.polynomial import FlatPolynomial
from scatmono.scattering import (
    ConnectionForm,
    CrossSectionPair,
    connection_eval,
    eta_section,
    monodromy_scan,
    mu,
    oscillator_deflection,
    scattering_phase,
    scattering_phase_standard,
    scattering_phase_standard_numeric,
    scattering_phases,
    section_transversality,
    singular_fiber_probe,
    transit_time_standard,
    unwrap_phases,
    winding_number,
    xi_section,
)


def random_c(rng, lo, hi, n):
    return rng.uniform(lo, hi, n) * np.exp(1j * rng.uniform(-math.pi, math.pi, n))


def test_section_examples():
    eps = 0.4
    w = eta_section(eps**2, 0.0, eps)
    assert abs(w.z1 - eps) < 1e-16 and abs(w.z2 - eps) < 1e-16
    s = 0.7
    w = xi_section(0, s, eps)
    assert w.z1 == 0 and abs(w.z2 - cmath.exp(-1j * s) * eps) < 1e-16
    assert xi_section(1, 0, 1) == ComplexPair(1, 1)
    pair = CrossSectionPair(0.3)
    for c in (0.01 + 0.02j, -0.2):
        assert abs(pair.stable(c, 1.3).product() - c) < 1e-16
        assert abs(pair.unstable(c, -0.4).product() - c) < 1e-16
    with pytest.raises(ValueError):
        CrossSectionPair(0.0)


def test_transit_time_examples():
    eps = 0.5
    assert transit_time_standard(eps**2, eps) == 0
    assert transit_time_standard(1j * eps**2, eps).imag == pytest.approx(-math.pi / 2)
    c = 0.1
    tau = transit_time_standard(c, eps)
    got = complex_flow(tau, xi_section(c, 0, eps))
    want = eta_section(c, 0, eps)
    assert abs(got.z1 - want.z1) < 1e-12 and abs(got.z2 - want.z2) < 1e-12
    with pytest.raises(ValueError):
        transit_time_standard(0, eps)


def test_transit_consistency_bulk(rng):
    for c in random_c(rng, 0.01, 1.0, 1000):
        got = complex_flow(transit_time_standard(c, 0.5), xi_section(c, 0, 0.5))
        want = eta_section(c, 0, 0.5)
        assert abs(got.z1 - want.z1) < 1e-12 and abs(got.z2 - want.z2) < 1e-12


@settings(max_examples=200)
@given(
    st.floats(0.01, 1.0),
    st.floats(-math.pi, math.pi),
    st.floats(0.05, 2.0),
    st.floats(0.05, 2.0),
)
def test_imaginary_transit_time_is_intrinsic(r, a, e1, e2):
    c = r * cmath.exp(1j * a)
    assert transit_time_standard(c, e1).imag == transit_time_standard(c, e2).imag


def test_mu_examples():
    assert mu(1) == 0
    assert mu(1j) == pytest.approx(-math.pi / 2)
    assert mu(-1) == -math.pi
    assert mu(complex(-1, -0.0)) == -math.pi
    with pytest.raises(ValueError):
        mu(0)


def test_connection_examples():
    assert connection_eval(ComplexPair(1, 1), (1j, 0)) == -1
    assert connection_eval(ComplexPair(0.3, 2), (0, 5)) == 0
    for phi in np.linspace(0, 2 * math.pi, 7):
        w = ComplexPair(cmath.exp(1j * phi), 0.4)
        # X_q2 tangent in the chart
        assert connection_eval(w, (-1j * w.z1, 1j * w.z2)) == pytest.approx(1)
    with pytest.raises(PoleError):
        connection_eval(ComplexPair(1e-13, 1), (1, 0))


def test_connection_real_form_and_normalization(rng):
    theta = ConnectionForm()
    for _ in range(1000):
        z1 = rng.uniform(1e-3, 2) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
        z2 = complex(*rng.normal(size=2))
        w = ComplexPair(z1, z2)
        assert theta(w, (-1j * z1, 1j * z2)) == pytest.approx(1, abs=1e-12)
    for _ in range(50):
        x, y, dx, dy = rng.normal(size=4)
        # z1 = x - iy, dz1 = dx - i dy
        assert ConnectionForm.real(x, y, dx, dy) == pytest.approx(
            connection_eval(ComplexPair(complex(x, -y), 0), (complex(dx, -dy), 0)), abs=1e-12
        )


def test_connection_rotation_invariant(rng):
    for _ in range(50):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = rng.uniform(-3, 3)
        r = cmath.exp(1j * s)
        a = connection_eval(ComplexPair(*z), v)
        b = connection_eval(ComplexPair(r * z[0], z[1] / r), (r * v[0], v[1] / r))
        assert a == pytest.approx(b, abs=1e-12)


def test_connection_closed(rng):
    # theta = -d arg z1 locally, so d theta = 0: compare line integrals around a small square
    for _ in range(10):
        z1 = rng.uniform(0.5, 1.5) * cmath.exp(1j * rng.uniform(-3, 3))
        h = 1e-3
        corners = [z1, z1 + h, z1 + h + 1j * h, z1 + 1j * h, z1]
        total = 0.0
        for a, b in zip(corners, corners[1:]):
            mid = 0.5 * (a + b)
            total += connection_eval(ComplexPair(mid, 1), (b - a, 0))
        assert abs(total) < 1e-9


def test_standard_phase_examples(cfg):
    assert scattering_phase_standard(0.3) == 0
    assert scattering_phase_standard(0.2j) == pytest.approx(-math.pi / 2)
    c = 0.1 * cmath.exp(2j)
    assert scattering_phase_standard_numeric(c, 20.0, cfg) == pytest.approx(-2.0, abs=1e-9)


def test_standard_phase_truncation_independent(rng, cfg):
    for c in random_c(rng, 0.05, 0.5, 5):
        a = scattering_phase_standard_numeric(c, 20.0, cfg)
        b = scattering_phase_standard_numeric(c, 40.0, cfg)
        assert abs(a - b) < 1e-9


def test_scattering_phase_reduces_to_standard(standard, cfg, rng):
    sys, nm = standard
    for c in random_c(rng, 0.02, 0.4, 8):
        rec = scattering_phase(sys, nm, EnergyMomentum.from_complex(c), 0.5, cfg)
        assert rec.phase == pytest.approx(mu(c), abs=1e-9)
        assert rec.transit_tau == pytest.approx(transit_time_standard(c, 0.5), abs=1e-8)
    rec = scattering_phase(sys, nm, 0.25, 0.5, cfg)
    assert rec.transit_tau == 0


def test_scattering_record_on_sections(quartic, cfg):
    sys, nm = quartic
    c = 0.05 + 0.05j
    rec = scattering_phase(sys, nm, c, 0.5, cfg)
    assert abs(rec.phase + math.pi / 4) <= 1e-3
    for p in (rec.entry_point, rec.exit_point):
        assert abs(sys.H(p.z1, p.z2) - c) < 1e-9
    z_in = nm.inverse(rec.entry_point.as_array())
    z_out = nm.inverse(rec.exit_point.as_array())
    assert abs(abs(z_in[1]) - 0.5) < 1e-9
    assert abs(abs(z_out[0]) - 0.5) < 1e-8
    assert rec.transit_tau.real > 0


def test_scattering_phase_large_c_flows_backwards(standard, cfg):
    sys, nm = standard
    c = 0.5 * cmath.exp(0.4j)
    rec = scattering_phase(sys, nm, c, 0.5, cfg)
    assert rec.transit_tau == pytest.approx(transit_time_standard(c, 0.5), abs=1e-8)


def test_batch_matches_single(quartic, cfg):
    sys, nm = quartic
    cs = [0.05, 0.04j, -0.03 + 0.01j]
    batch = scattering_phases(sys, nm, cs, 0.5, cfg)
    for c, rec in zip(cs, batch):
        assert rec.phase == pytest.approx(scattering_phase(sys, nm, c, 0.5, cfg).phase, abs=1e-9)


def test_unwrap_and_winding():
    raw = np.angle(np.exp(-1j * np.linspace(0, 2 * math.pi, 33)))
    unwrapped, jump = unwrap_phases(raw)
    assert jump == pytest.approx(2 * math.pi / 32)
    assert winding_number(unwrapped) == -1
    with pytest.raises(UnwrapAmbiguity):
        winding_number([0.0, 3.5])
    with pytest.raises(UnwrapAmbiguity):
        unwrap_phases([0.0, math.pi])


@pytest.mark.parametrize("r", [0.05, 0.1, 0.25])
@pytest.mark.parametrize("n", [64, 256])
@pytest.mark.parametrize("eps", [0.3, 0.5])
def test_standard_degree(standard, cfg, r, n, eps):
    sys, nm = standard
    assert monodromy_scan(sys, nm, r, n, eps, cfg).winding == -1


def test_clockwise_reverses_degree(standard, cfg):
    sys, nm = standard
    assert monodromy_scan(sys, nm, 0.25, 256, 0.5, cfg, clockwise=True).winding == 1


def test_scan_preconditions(standard, cfg):
    sys, nm = standard
    with pytest.raises(UnwrapAmbiguity):
        monodromy_scan(sys, nm, 0.25, 8, 0.5, cfg)
    with pytest.raises(ConfigError):
        monodromy_scan(sys, nm, 1e-4, 64, 0.5, cfg)
    with pytest.raises(ConfigError):
        monodromy_scan(sys, nm, 3.0, 64, 0.5, cfg)


def test_undersampling_is_the_cause_of_small_n_failure(standard, cfg):
    # the same loop succeeds once sampled densely
    sys, nm = standard
    assert monodromy_scan(sys, nm, 0.25, 256, 0.5, cfg).winding == -1


@pytest.mark.parametrize(
    "h, l, want",
    [(0.0, 1.0, 0.0), (1.0, 1.0, math.pi / 4), (1.0, 0.0, math.pi / 2), (0.0, -1.0, math.pi)],
)
def test_oscillator_examples(h, l, want, cfg):
    assert oscillator_deflection(h, l, 20.0, cfg) == pytest.approx(want, abs=1e-3)


def test_oscillator_errors(cfg):
    with pytest.raises(ValueError):
        oscillator_deflection(0, 0, 20.0, cfg)
    from scatmono.errors import NumericalError

    with pytest.raises(NumericalError, match="stabilized"):
        oscillator_deflection(1.0, 1.0, 2.0, cfg)


def test_singular_fiber_examples(standard, quartic, cfg):
    sys0, nm0 = standard
    d = singular_fiber_probe(sys0, nm0, 0.0, 0.5, 10.0, cfg)
    assert d == pytest.approx(0.5 * math.exp(-10), abs=1e-9)
    d = singular_fiber_probe(sys0, nm0, 0.0, 0.5, 10.0, cfg, branch="unstable")
    assert d == pytest.approx(0.5 * math.exp(-10), abs=1e-9)
    sys, nm = quartic
    assert singular_fiber_probe(sys, nm, 0.0, 0.2, 8.0, cfg) <= 1e-3
    assert singular_fiber_probe(sys0, nm0, 1.1, 0.5, 12.0, cfg) <= math.exp(-6) * 0.5


def test_section_transversality(rng):
    for c in random_c(rng, 0.01, 1.0, 100):
        assert abs(section_transversality(c, 0.5)) == pytest.approx(1.0)
