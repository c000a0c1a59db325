import io
import math

import numpy as np
import pytest

from shiftapprox.errors import InvalidGridError
from shiftapprox.numerics import (
    Grid,
    SampledFunction,
    SampledSpectrum,
    fourier_transform_sampled,
    integrate,
    integrate_values,
    l2_norm_sq,
    make_uniform_grid,
    quadrature_weights,
    read_samples_csv,
    write_samples_csv,
)


def test_grid_nodes_hit_endpoints_exactly():
    g = make_uniform_grid(-1.5, 2.5, 1001)
    x = g.nodes()
    assert x[0] == -1.5 and x[-1] == 2.5
    assert g.count == 1001
    assert g.step == pytest.approx(4.0 / 1000.0, rel=0, abs=0)
    assert g.span() == 4.0


@pytest.mark.parametrize("bad", [
    dict(start=0.0, stop=0.0, count=5),
    dict(start=1.0, stop=0.0, count=5),
    dict(start=0.0, stop=1.0, count=1),
    dict(start=float("nan"), stop=1.0, count=5),
    dict(start=0.0, stop=float("inf"), count=5),
])
def test_grid_rejects_degenerate_input(bad):
    with pytest.raises(InvalidGridError):
        make_uniform_grid(**bad)


def test_grid_rejects_fractional_count():
    with pytest.raises(InvalidGridError):
        Grid(0.0, 1.0, 4.5)


def test_simpson_weights_integrate_cubics_exactly():
    g = make_uniform_grid(-2.0, 3.0, 11)
    x = g.nodes()
    w = quadrature_weights(g)
    assert w.sum() == pytest.approx(g.span(), rel=1e-15)
    for k in range(4):
        exact = (3.0 ** (k + 1) - (-2.0) ** (k + 1)) / (k + 1)
        assert (w * x ** k).sum() == pytest.approx(exact, rel=1e-14), k


def test_even_count_weights_fall_back_to_trailing_trapezoid():
    g = make_uniform_grid(0.0, 1.0, 10)
    w = quadrature_weights(g)
    assert w.sum() == pytest.approx(1.0, rel=1e-15)
    # quadratics are exact on the Simpson block, O(step^3) on the last panel
    x = g.nodes()
    err = abs((w * x ** 2).sum() - 1.0 / 3.0)
    assert err < g.step ** 3


def test_two_node_grid_is_a_single_trapezoid():
    g = make_uniform_grid(0.0, 2.0, 2)
    assert np.allclose(quadrature_weights(g), [1.0, 1.0])


def test_integrate_matches_closed_forms():
    g = make_uniform_grid(0.0, math.pi, 20001)
    x = g.nodes()
    s = SampledFunction(grid=g, values=np.sin(x) + 0.0j)
    assert complex(integrate(s)).real == pytest.approx(2.0, rel=1e-12)
    assert l2_norm_sq(s) == pytest.approx(math.pi / 2.0, rel=1e-12)
    mixed = np.exp(1j * x)
    val = integrate_values(mixed, g)
    assert val.real == pytest.approx(0.0, abs=1e-12)
    assert val.imag == pytest.approx(2.0, rel=1e-12)


def test_sampled_values_must_match_grid_and_be_finite():
    g = make_uniform_grid(0.0, 1.0, 5)
    with pytest.raises(InvalidGridError):
        SampledFunction(grid=g, values=np.zeros(4))
    bad = np.zeros(5, dtype=np.complex128)
    bad[2] = np.nan
    with pytest.raises(InvalidGridError):
        SampledSpectrum(grid=g, values=bad)


def _gauss_samples(width: float = 1.0, radius: float = 12.0, count: int = 8193):
    g = make_uniform_grid(-radius, radius, count)
    x = g.nodes()
    return SampledFunction(grid=g, values=np.exp(-0.5 * (x / width) ** 2) + 0.0j)


def test_fourier_transform_matches_analytic_gaussian():
    f = _gauss_samples()
    freq = make_uniform_grid(-8.0, 8.0, 1601)
    spec = fourier_transform_sampled(f, freq)
    y = freq.nodes()
    ref = np.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi)
    assert np.max(np.abs(spec.values - ref)) < 1e-12


def test_fourier_transform_plancherel_and_linearity():
    f = _gauss_samples()
    x = f.grid.nodes()
    g2 = SampledFunction(grid=f.grid,
                         values=np.exp(-0.5 * (x - 1.0) ** 2) * np.exp(2j * x))
    freq = make_uniform_grid(-10.0, 10.0, 4097)
    fa = fourier_transform_sampled(f, freq)
    fb = fourier_transform_sampled(g2, freq)
    combo = SampledFunction(grid=f.grid, values=f.values + (0.5 - 2j) * g2.values)
    fc = fourier_transform_sampled(combo, freq)
    assert np.max(np.abs(fc.values - fa.values - (0.5 - 2j) * fb.values)) < 1e-14
    # norm(f)^2 = 2 pi norm(fhat)^2 under the 1/2pi-forward convention
    assert 2.0 * math.pi * l2_norm_sq(fa) == pytest.approx(
        l2_norm_sq(f), rel=1e-9)


def test_fourier_transform_is_deterministic():
    f = _gauss_samples(count=2049)
    freq = make_uniform_grid(-5.0, 5.0, 513)
    a = fourier_transform_sampled(f, freq).values
    b = fourier_transform_sampled(f, freq).values
    assert np.array_equal(a, b)


def test_csv_round_trip_is_exact():
    g = make_uniform_grid(-1.0, 1.0, 257)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(257) + 1j * rng.standard_normal(257)
    for cls in (SampledFunction, SampledSpectrum):
        buf = io.StringIO()
        write_samples_csv(buf, cls(grid=g, values=vals))
        back = read_samples_csv(io.StringIO(buf.getvalue()))
        assert isinstance(back, cls)
        assert np.array_equal(back.values, vals)
        assert back.grid.count == 257


def test_csv_header_selects_domain():
    buf = io.StringIO()
    write_samples_csv(buf, SampledSpectrum(
        grid=make_uniform_grid(0.0, 1.0, 3), values=np.ones(3)))
    assert buf.getvalue().splitlines()[0] == "y,re,im"


@pytest.mark.parametrize("text", [
    "a,b\n0,1\n1,2\n",
    "x,re,im\n0,1\n",
    "x,re,im\n0,1,0\nnope,2,0\n",
    "x,re,im\n0,1,0\n0.5,1,0\n0.7,1,0\n",
])
def test_csv_rejects_malformed_input(text):
    with pytest.raises(InvalidGridError):
        read_samples_csv(io.StringIO(text))
