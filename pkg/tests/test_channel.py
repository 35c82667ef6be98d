import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from thzirs.channel import (CeeNorm, Direction, GainModel, RadioParams, build_channel_set,
                            cascaded_channel, cascaded_gain_trig, cee_cascaded_variance,
                            channel_vector, channel_vector_with_distances, csi_variance,
                            element_gain_cosq, hop_scale, link_element_gain, pathloss_cascaded,
                            pathloss_link, sample_csi_error)
from thzirs.geometry import IrsPanel, Point3, Topology, element_grid, link_angles, distance

RADIO = RadioParams()
angle = st.floats(0, math.pi)
azimuth = st.floats(0, 2 * math.pi, exclude_max=True)


def unit_radio(**kw):
    # lambda = 1 m, A = 1 m^2
    return RadioParams(carrier_frequency=3e8, element_side=1.0, **kw)


def test_defaults_follow_table_values():
    assert RADIO.wavelength == pytest.approx(1e-3, rel=1e-15)
    assert RADIO.element_side == pytest.approx(0.4 * RADIO.wavelength)
    assert RADIO.absorption == 0.0033
    assert RadioParams.at_frequency(142e9).element_side == pytest.approx(0.4 * 3e8 / 142e9)


def test_radio_validation():
    with pytest.raises(ValueError):
        RadioParams(carrier_frequency=0)
    with pytest.raises(ValueError):
        RadioParams(absorption=-1)
    with pytest.raises(ValueError):
        RadioParams(tx_gain=0)
    with pytest.raises(ValueError):
        RadioParams(element_efficiency=1.5)


def test_cosq_examples():
    r = RadioParams(directivity_exponent=2, element_efficiency=1)
    assert element_gain_cosq(0.0, r) == pytest.approx(6.0)
    assert element_gain_cosq(3 * math.pi / 4, r) == 0.0
    assert element_gain_cosq(math.pi / 3, r) == pytest.approx(1.5)
    assert element_gain_cosq(math.pi / 2, r) == 0.0


def test_trig_examples():
    g0 = RADIO.aperture_gain ** 2
    assert cascaded_gain_trig(0, 0, 0, RADIO) == pytest.approx(g0)
    assert cascaded_gain_trig(math.pi / 2, 0.3, 0.2, RADIO) == pytest.approx(0.0, abs=1e-30 * g0)
    expected = (2 * math.pi * RADIO.element_area / RADIO.wavelength ** 2) ** 2
    assert cascaded_gain_trig(math.pi / 3, math.pi / 2, 1.234, RADIO) == pytest.approx(expected)


@given(angle, azimuth, angle)
def test_trig_gain_bounded_by_broadside(psi_i, phi_r, psi_r):
    g0 = RADIO.aperture_gain ** 2
    assert 0 <= cascaded_gain_trig(psi_i, phi_r, psi_r, RADIO) <= g0 * (1 + 1e-12)


@given(azimuth)
def test_trig_gain_equality_cases(phi):
    g0 = RADIO.aperture_gain ** 2
    assert cascaded_gain_trig(0.0, phi, 0.0, RADIO) == pytest.approx(g0)
    assert cascaded_gain_trig(0.0, math.pi / 2, 1.0, RADIO) == pytest.approx(g0)


@given(angle, azimuth, angle)
def test_hop_gains_factor_the_cascaded_gain(psi_i, phi_r, psi_r):
    gi = link_element_gain(psi_i, 0.0, Direction.TX_TO_IRS, RADIO)
    gr = link_element_gain(psi_r, phi_r, Direction.IRS_TO_RX, RADIO)
    assert gi * gr == pytest.approx(cascaded_gain_trig(psi_i, phi_r, psi_r, RADIO), rel=1e-12,
                                    abs=1e-300)


def test_pathloss_link_examples():
    r = unit_radio(absorption=0.0)
    assert pathloss_link(1.0, 1.0, 1.0, r) == pytest.approx(1 / (16 * math.pi ** 2))
    assert pathloss_link(2.0, 1.0, 1.0, r) == pytest.approx(pathloss_link(1.0, 1.0, 1.0, r) / 4)
    ra = RadioParams(absorption=0.0033)
    r0 = RadioParams(absorption=0.0)
    ratio = pathloss_link(10.0, 1.0, 1.0, ra) / pathloss_link(10.0, 1.0, 1.0, r0)
    assert ratio == pytest.approx(math.exp(-0.033))
    with pytest.raises(ValueError):
        pathloss_link(0.0, 1.0, 1.0, r)


def test_pathloss_cascaded_examples():
    r = unit_radio(absorption=0.0)
    assert pathloss_cascaded(1, 1, 1, 1, r) == pytest.approx(1 / (4 * math.pi) ** 4)
    assert pathloss_cascaded(2, 1, 1, 1, r) == pytest.approx(pathloss_cascaded(1, 1, 1, 1, r) / 4)
    with pytest.raises(ValueError):
        pathloss_cascaded(1, -1, 1, 1, r)


def test_cascaded_pathloss_with_broadside_trig_gains():
    r = RadioParams(tx_gain=2.0, rx_gain=3.0)
    d1, d2 = 3.0, 7.0
    gi = link_element_gain(0.0, 0.0, Direction.TX_TO_IRS, r)
    gr = link_element_gain(0.0, 0.0, Direction.IRS_TO_RX, r)
    lam, A, k = r.wavelength, r.element_area, r.absorption
    expected = (lam ** 4 * (4 * math.pi * A / lam ** 2) ** 2 / ((4 * math.pi) ** 4 * (d1 * d2) ** 2)
                * 2.0 * 3.0 * math.exp(-k * (d1 + d2)))
    assert pathloss_cascaded(d1, d2, gi, gr, r) == pytest.approx(expected, rel=1e-12)
    # composing the two normalized hops gives the same number
    h1 = pathloss_link(d1, gi * hop_scale(r), r.tx_gain, r)
    h2 = pathloss_link(d2, gr * hop_scale(r), r.rx_gain, r)
    assert h1 * h2 == pytest.approx(expected, rel=1e-12)


@settings(max_examples=30)
@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(1.001, 3))
def test_pathloss_decreasing_in_distance(d1, d2, f):
    a = pathloss_cascaded(d1, d2, 1.0, 1.0, RADIO)
    assert a > 0
    assert pathloss_cascaded(d1 * f, d2, 1.0, 1.0, RADIO) < a
    assert pathloss_cascaded(d1, d2 * f, 1.0, 1.0, RADIO) < a
    assert pathloss_link(d1 * f, 1.0, 1.0, RADIO) < pathloss_link(d1, 1.0, 1.0, RADIO)


def test_single_element_channel_magnitude():
    panel = IrsPanel(Point3(0, 0, 0), 1, 1, RADIO.element_side)
    tx = Point3(1.0, 2.0, 3.0)
    h = channel_vector(tx, panel, Direction.TX_TO_IRS, RADIO)
    psi = link_angles(tx, panel.center).elevation
    xi = pathloss_link(distance(tx, panel.center),
                       link_element_gain(psi, 0.0, Direction.TX_TO_IRS, RADIO) * hop_scale(RADIO),
                       RADIO.tx_gain, RADIO)
    assert h.shape == (1,)
    assert abs(h[0]) == pytest.approx(math.sqrt(xi), rel=1e-12)


def test_phase_vanishes_at_one_wavelength():
    lam = RADIO.wavelength
    panel = IrsPanel(Point3(0, 0, 0), 1, 1, RADIO.element_side)
    h = channel_vector(Point3(0, 0, lam), panel, Direction.TX_TO_IRS, RADIO)
    assert abs(np.angle(h[0])) < 1e-9


def test_channel_entries_match_elementwise_recomputation(rng):
    panel = IrsPanel(Point3(5, 5, 2), 2, 2, RADIO.element_side)
    for direction in Direction:
        node = Point3(*rng.uniform(0, 20, 2), 1.0)
        v = channel_vector(node, panel, direction, RADIO)
        gain = RADIO.tx_gain if direction is Direction.TX_TO_IRS else RADIO.rx_gain
        for m, e in enumerate(element_grid(panel)):
            ep = Point3.from_array(e)
            d = distance(node, ep)
            ang = link_angles(node, ep)
            g = link_element_gain(ang.elevation, ang.azimuth, direction, RADIO) * hop_scale(RADIO)
            xi = pathloss_link(d, g, gain, RADIO)
            expected = math.sqrt(xi) * np.exp(-2j * math.pi * d / RADIO.wavelength)
            assert v[m] == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("model", list(GainModel))
def test_cascade_of_hops_equals_cascaded_pathloss(model, rng):
    r = RadioParams(gain_model=model)
    panel = IrsPanel(Point3(10, 10, 3), 3, 3, r.element_side)
    tx, rx = Point3(2, 3, 1), Point3(15, 4, 1)
    h, d1 = channel_vector_with_distances(tx, panel, Direction.TX_TO_IRS, r)
    g, d2 = channel_vector_with_distances(rx, panel, Direction.IRS_TO_RX, r)
    for m, e in enumerate(element_grid(panel)):
        ep = Point3.from_array(e)
        a1, a2 = link_angles(tx, ep), link_angles(rx, ep)
        if model is GainModel.TRIGONOMETRIC:
            gi = link_element_gain(a1.elevation, a1.azimuth, Direction.TX_TO_IRS, r)
            gr = link_element_gain(a2.elevation, a2.azimuth, Direction.IRS_TO_RX, r)
            assert gi * gr == pytest.approx(
                cascaded_gain_trig(a1.elevation, a2.azimuth, a2.elevation, r))
        else:
            gi, gr = element_gain_cosq(a1.elevation, r), element_gain_cosq(a2.elevation, r)
        xi = pathloss_cascaded(d1[m], d2[m], gi, gr, r)
        assert abs(h[m] * g[m]) ** 2 == pytest.approx(xi, rel=1e-10)


def test_far_field_uses_center_distance():
    panel = IrsPanel(Point3(0, 0, 0), 4, 4, RADIO.element_side)
    v, d = channel_vector_with_distances(Point3(3, 4, 12), panel, Direction.TX_TO_IRS, RADIO,
                                         far_field=True)
    assert_allclose(d, 13.0)
    assert np.ptp(np.abs(v)) == 0.0


def test_csi_error_zero_variance():
    e = sample_csi_error(0.0, 8, np.random.default_rng(0))
    assert np.all(e == 0)
    with pytest.raises(ValueError):
        sample_csi_error(-1.0, 3, np.random.default_rng(0))


def test_csi_error_statistics():
    var = 2.5
    n = 100_000
    e = sample_csi_error(var, n, np.random.default_rng(1))
    assert np.mean(np.abs(e) ** 2) == pytest.approx(var, rel=0.03)
    assert abs(e.mean()) < 3 * math.sqrt(var) / math.sqrt(n)
    # circular symmetry: real and imaginary parts carry equal power
    assert np.var(e.real) == pytest.approx(np.var(e.imag), rel=0.03)


def test_csi_variance_is_relative_energy():
    h = np.array([1.0, 2.0j, -2.0])
    assert csi_variance(h, 0.1) == pytest.approx(0.01 * 3.0)
    assert csi_variance(h, 0.0) == 0.0


def _rand_c(rng, m):
    return rng.normal(size=m) + 1j * rng.normal(size=m)


def test_cascaded_channel_identity(rng):
    m = 8
    h, he, g, ge = (_rand_c(rng, m) for _ in range(4))
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, m))
    est, err = cascaded_channel(h, he, theta, g, ge)
    full = np.sum((h + he) * theta * (g + ge))
    assert est + err == pytest.approx(full, abs=1e-12)
    est, err = cascaded_channel(h, np.zeros(m), theta, g, np.zeros(m))
    assert err == 0
    est, err = cascaded_channel([2.0], [0.0], [1.0], [3.0], [0.0])
    assert est == 6.0
    with pytest.raises(ValueError):
        cascaded_channel(h, he, theta[:3], g, ge)


def test_cee_variance_reductions(rng):
    h, g = _rand_c(rng, 4), _rand_c(rng, 4)
    assert cee_cascaded_variance(h, g, 0.0, 0.0) == 0.0
    assert cee_cascaded_variance(h, g, 0.3, 0.0) == pytest.approx(0.3 * abs(np.sum(g * g)))
    assert cee_cascaded_variance(h, g, 0.0, 0.2) == pytest.approx(0.2 * abs(np.sum(h * h)))
    with pytest.raises(ValueError):
        cee_cascaded_variance(h, g, -1.0, 0.0)


def test_cee_variance_monte_carlo_matches_hermitian_form():
    # Documents which contraction matches the sampled error energy: the Hermitian one.
    rng = np.random.default_rng(7)
    m, n = 4, 100_000
    h, g = _rand_c(rng, m), _rand_c(rng, m)
    vh, vg = 0.3, 0.5
    theta = np.exp(1j * rng.uniform(0, 2 * np.pi, m))
    he = sample_csi_error(vh, (n, m), rng)
    ge = sample_csi_error(vg, (n, m), rng)
    err = (he * theta * g).sum(1) + (h * theta * ge).sum(1) + (he * theta * ge).sum(1)
    sample = np.mean(np.abs(err) ** 2)
    herm = cee_cascaded_variance(h, g, vh, vg, CeeNorm.HERMITIAN)
    trans = cee_cascaded_variance(h, g, vh, vg, CeeNorm.TRANSPOSE)
    assert sample == pytest.approx(herm, rel=0.03)
    assert trans <= herm
    assert abs(trans / sample - 1) > 0.03


def test_cee_variance_scales_with_amplitude(rng):
    h, g = _rand_c(rng, 6), _rand_c(rng, 6)
    for norm in CeeNorm:
        full = cee_cascaded_variance(h, g, 0.2, 0.1, norm, 1.0)
        half = cee_cascaded_variance(h, g, 0.2, 0.1, norm, 0.5)
        assert half == pytest.approx(0.25 * full)


def test_build_channel_set_shapes_and_perfect_csi(rng):
    panels = [IrsPanel(Point3(5, 5, 2), 2, 3, RADIO.element_side),
              IrsPanel(Point3(1, 9, 4), 1, 2, RADIO.element_side)]
    topo = Topology([Point3(0, 0, 1), Point3(3, 1, 1)], [Point3(9, 9, 1)], panels)
    cs = build_channel_set(topo, RADIO, 0.0, rng)
    assert cs.tx_irs[0].shape == (2, 6) and cs.irs_rx[1].shape == (1, 2)
    assert cs.var_h.shape == (2, 2) and cs.var_g.shape == (2, 1)
    assert all(np.all(e == 0) for e in cs.tx_irs_err + cs.irs_rx_err)
    assert_allclose(cs.actual_tx_irs(0), cs.tx_irs[0])
    cs = build_channel_set(topo, RADIO, 0.1, np.random.default_rng(3))
    assert np.all(cs.var_h > 0)
    assert_allclose(cs.actual_irs_rx(0), cs.irs_rx[0] + cs.irs_rx_err[0])
