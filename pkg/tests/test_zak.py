import math

import numpy as np
import pytest

from shiftapprox.errors import TruncationError
from shiftapprox.generator import Generator, gaussian_generator
from shiftapprox.numerics import make_uniform_grid
from shiftapprox.zak import phi_field, phi_freq, phi_time, verify_phi_properties

from helpers import sinc_gen, spline


def test_box_kernel_has_unit_amplitude():
    gen = spline(0, 1.0)
    assert phi_time(gen, 1.0, 0.5, 0.0) == pytest.approx(1.0, rel=1e-14)
    for x in (0.2, 1.1, 2.9, -0.4):
        assert phi_time(gen, 1.0, x, 0.0) == pytest.approx(1.0, rel=1e-14), x


def test_hat_kernel_partition_of_unity_at_zero_frequency():
    gen = spline(1, 1.0)
    x = np.linspace(-3.0, 3.0, 41)
    vals = phi_time(gen, 1.0, x, np.zeros_like(x))
    assert np.max(np.abs(vals - 1.0)) < 1e-13


def test_hat_kernel_single_term_at_origin():
    # at x = 0 only the shift j = 1 contributes, so Phi(0, y) = exp(i pi y / sigma)
    gen = spline(1, 1.0)
    y = np.linspace(-0.99, 0.99, 21)
    vals = phi_time(gen, 1.0, np.zeros_like(y), y)
    ref = np.exp(1j * math.pi * y)
    assert np.max(np.abs(vals - ref)) < 1e-13


def test_bandlimited_kernel_is_a_plane_wave():
    gen = sinc_gen(1.0)
    rng = np.random.default_rng(5)
    x = rng.uniform(-4.0, 4.0, 24)
    y = rng.uniform(-0.999, 0.999, 24)
    vals = phi_freq(gen, 1.0, x, y)
    assert np.max(np.abs(vals - np.exp(1j * x * y))) < 1e-14
    assert np.max(np.abs(np.abs(vals) - 1.0)) < 1e-14


def test_representation_refusals():
    # spectral sum of the box decays like 1/u: not absolutely summable
    with pytest.raises(TruncationError):
        phi_freq(spline(0, 1.0), 1.0, 0.3, 0.2)
    # time sum of the bandlimited kernel decays like 1/x: same refusal
    with pytest.raises(TruncationError):
        phi_time(sinc_gen(1.0), 1.0, 0.3, 0.2)


def test_gaussian_kernel_routes_agree_with_brute_force():
    sigma = 1.0
    gen = gaussian_generator(1.0)
    h = math.pi / sigma
    xs = np.array([0.0, 0.37, 1.9])
    ys = np.array([-0.8, 0.11, 0.93])
    brute_t = np.zeros(3, dtype=np.complex128)
    brute_f = np.zeros(3, dtype=np.complex128)
    for j in range(-40, 41):
        brute_t += gen.time_domain(xs - j * h) * np.exp(1j * j * math.pi * ys / sigma)
    brute_t /= 2.0 * sigma
    for nu in range(-40, 41):
        u = ys + 2.0 * sigma * nu
        brute_f += gen.spectrum(u) * np.exp(1j * u * xs)
    t_vals = phi_time(gen, sigma, xs, ys)
    f_vals = phi_freq(gen, sigma, xs, ys)
    assert np.max(np.abs(t_vals - brute_t)) < 1e-12
    assert np.max(np.abs(f_vals - brute_f)) < 1e-12
    assert np.max(np.abs(t_vals - f_vals)) < 1e-10


def test_phi_field_auto_picks_an_available_representation():
    xg = make_uniform_grid(0.0, math.pi, 9)
    yg = make_uniform_grid(-0.9, 0.9, 9)
    assert phi_field(sinc_gen(1.0), 1.0, xg, yg).representation == "freq_sum"
    assert phi_field(spline(0, 1.0), 1.0, xg, yg).representation == "time_sum"
    field = phi_field(spline(2, 1.0), 1.0, xg, yg, representation="freq_sum")
    assert field.values.shape == (9, 9)
    with pytest.raises(ValueError):
        phi_field(spline(2, 1.0), 1.0, xg, yg, representation="mystery")


def _statuses(report):
    return {c.name: c.status for c in report.checks}


def test_property_suite_bandlimited():
    rep = verify_phi_properties(sinc_gen(1.0), 1.0)
    st = _statuses(rep)
    assert rep.ok
    assert st["phi3_representations"] == "skipped"
    for c in rep.checks:
        if c.status == "ok":
            assert c.residual <= 1e-8, c.name


@pytest.mark.parametrize("m", [0, 1, 2])
def test_property_suite_splines(m):
    rep = verify_phi_properties(spline(m, 1.0), 1.0, resolution=129)
    assert rep.ok, _statuses(rep)
    st = _statuses(rep)
    if m == 0:
        assert st["phi3_representations"] == "skipped"
    else:
        assert st["phi3_representations"] == "ok"


def test_property_suite_gaussian():
    rep = verify_phi_properties(gaussian_generator(1.0), 1.0, resolution=65)
    assert rep.ok, _statuses(rep)
    assert _statuses(rep)["phi3_representations"] == "ok"


@pytest.mark.parametrize("resolution", [8, 7, 128])
def test_property_suite_rejects_bad_resolution(resolution):
    with pytest.raises(ValueError):
        verify_phi_properties(spline(1, 1.0), 1.0, resolution=resolution)


def test_property_suite_catches_inconsistent_generators():
    """A deliberately mismatched time/spectrum pair must fail the audit."""
    w_time, w_spec = 1.0, 2.0

    def spectrum(y):
        y = np.asarray(y, dtype=float)
        return (w_spec / math.sqrt(2.0 * math.pi)) * np.exp(-0.5 * (w_spec * y) ** 2) + 0.0j

    def time_domain(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x / w_time) ** 2) + 0.0j

    liar = Generator(
        label="mismatched", spectrum=spectrum, decay_exponent=40.0,
        decay_constant=2.0, time_domain=time_domain,
        time_tail_radius=lambda eps: w_time * math.sqrt(2.0 * math.log(1.0 / max(eps, 1e-300))),
    )
    rep = verify_phi_properties(liar, 1.0, resolution=65)
    assert not rep.ok
    assert _statuses(rep)["phi3_representations"] == "fail"
