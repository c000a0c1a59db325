"""Shared builders and reference oracles for the test suite.

The oracles here stay off the library's spectral pipeline on purpose:
expansion norms and inner products come from time-domain quadrature, so
agreement with the Plancherel-side numbers is evidence, not a tautology.

Quadrature routes per generator family:

* degree-0 splines: midpoint rule on a knot-offset grid.  The integrand
  is piecewise constant with jumps exactly between nodes, so the
  midpoint sum is the exact integral.
* degree >= 1 splines: Simpson on a knot-aligned grid.  Piecewise
  polynomial integrands of degree <= 3 integrate exactly; higher
  degrees leave O(step^4) residue far below the tolerances used here.
* bandlimited: windowed integrals I(T) over [-T, T] with T a multiple
  of the shift step, extrapolated over T, 2T, 4T, 8T with the weights
  (-1, 14, -56, 64)/21 that cancel the c1/T + c2/T^2 + c3/T^3 tail of
  the slowly decaying integrand (the windows share a phase mod pi, so
  the oscillatory tail terms cancel alongside the monotone ones).
"""

from __future__ import annotations

import io
import math
from contextlib import redirect_stdout
from typing import Optional, Tuple

import numpy as np

from shiftapprox import (
    Generator,
    ShiftExpansion,
    SplineParams,
    bandlimited_generator,
    bspline_generator,
    gaussian_generator,
    synthesize,
)
from shiftapprox.cli import main as cli_main
from shiftapprox.numerics import (
    Grid,
    SampledFunction,
    SampledSpectrum,
    make_uniform_grid,
    quadrature_weights,
)


def spline(m: int, sigma: float = 1.0) -> Generator:
    return bspline_generator(SplineParams(sigma=sigma, degree=m))


def sinc_gen(sigma: float = 1.0) -> Generator:
    return bandlimited_generator(sigma)


def random_expansion(rng: np.random.Generator, sigma: float, j_max: int,
                     rho: Optional[float] = None) -> ShiftExpansion:
    n = 2 * j_max + 1
    coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return ShiftExpansion(sigma=sigma, rho=sigma if rho is None else rho,
                          coeffs=coeffs)


def _spline_quadrature_grid(gen: Generator, sigma: float, j_max: int,
                            degree: int) -> Grid:
    """Integration grid covering every retained shift's support."""
    h = np.pi / sigma
    lo = -(j_max + degree + 1) * h
    hi = j_max * h
    q = 256
    if degree == 0:
        # cell midpoints: piecewise-constant integrands are summed exactly
        step = h / q
        count = int(round((hi - lo) / step))
        return make_uniform_grid(lo + 0.5 * step, hi - 0.5 * step, count)
    count = int(round((hi - lo) * q / h)) + 1
    return make_uniform_grid(lo, hi, count)


def _degree_of(gen: Generator) -> int:
    # the audited decay exponent of the spline family is m + 1
    return int(round(gen.decay_exponent)) - 1


def expansion_time_products(gen: Generator, sigma: float,
                            exp_a: ShiftExpansion,
                            exp_b: Optional[ShiftExpansion] = None) -> complex:
    """<s_a, s_b> by time-domain quadrature (s_b defaults to s_a)."""
    if exp_b is None:
        exp_b = exp_a
    j_max = max(exp_a.j_max, exp_b.j_max)
    if gen.support is not None:
        degree = _degree_of(gen)
        grid = _spline_quadrature_grid(gen, sigma, j_max, degree)
        sa_v = synthesize(exp_a, gen, grid).values
        sb_v = synthesize(exp_b, gen, grid).values
        prod = sa_v * np.conj(sb_v)
        if degree == 0:
            return complex(prod.sum() * grid.step)
        return complex((quadrature_weights(grid) * prod).sum())
    return _bandlimited_products(gen, sigma, exp_a, exp_b, j_max)


def _bandlimited_products(gen: Generator, sigma: float, exp_a: ShiftExpansion,
                          exp_b: ShiftExpansion, j_max: int) -> complex:
    h = np.pi / sigma
    base = 4 * max(32, j_max) * h  # smallest window well past the shifts
    per_h = 128
    count_b = int(round(2 * base * per_h / h)) + 1
    full = make_uniform_grid(-8 * base, 8 * base, 8 * (count_b - 1) + 1)
    sa_v = synthesize(exp_a, gen, full).values
    sb_v = sa_v if exp_b is exp_a else synthesize(exp_b, gen, full).values
    prod = sa_v * np.conj(sb_v)
    mid = (full.count - 1) // 2

    def window(k: int) -> complex:
        half = (count_b - 1) // 2 * k
        sub = make_uniform_grid(-base * k, base * k, 2 * half + 1)
        return complex(
            (quadrature_weights(sub) * prod[mid - half:mid + half + 1]).sum())

    i1, i2, i4, i8 = window(1), window(2), window(4), window(8)
    return (-i1 + 14.0 * i2 - 56.0 * i4 + 64.0 * i8) / 21.0


def knot_aligned_gaussian(sigma: float, windows: int = 4
                          ) -> Tuple[SampledFunction, SampledSpectrum]:
    """Unit-width Gaussian sampled for oracle use, plus its exact spectrum.

    The time grid steps by an even divisor of pi/sigma from a multiple of
    pi/sigma, so every spline knot of every shift lands on a Simpson panel
    boundary.
    """
    h = np.pi / sigma
    radius = math.ceil(10.0 / h) * h
    q = 1
    while h / q > 8e-4:
        q *= 2
    count = int(round(2 * radius * q / h)) + 1
    tg = make_uniform_grid(-radius, radius, count)
    x = tg.nodes()
    f = SampledFunction(grid=tg, values=np.exp(-0.5 * x * x) + 0.0j)
    fs = analytic_gaussian_spectrum(sigma, windows)
    return f, fs


def analytic_gaussian_spectrum(sigma: float, windows: int = 4,
                               per_window: int = 4096) -> SampledSpectrum:
    edge = (2 * windows + 1) * sigma
    fg = make_uniform_grid(-edge, edge, per_window * (2 * windows + 1) + 1)
    y = fg.nodes()
    vals = np.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi) + 0.0j
    return SampledSpectrum(grid=fg, values=vals)


def band_member_spectrum(gen: Generator, sigma: float, beta: np.ndarray,
                         windows: int = 20,
                         per_window: int = 4096) -> SampledSpectrum:
    """Exact spectrum of sum_j beta_j B(. - j pi/sigma) on an aligned grid."""
    edge = (2 * windows + 1) * sigma
    fg = make_uniform_grid(-edge, edge, per_window * (2 * windows + 1) + 1)
    y = fg.nodes()
    j_max = (beta.size - 1) // 2
    js = np.arange(-j_max, j_max + 1)
    zeta = np.zeros(y.size, dtype=np.complex128)
    for j, b in zip(js, beta):
        zeta += b * np.exp(-1j * j * np.pi * y / sigma)
    return SampledSpectrum(grid=fg, values=zeta * gen.spectrum(y))


def bump_spectrum_signal(rng: np.random.Generator, sigma: float,
                         windows: int = 4) -> SampledSpectrum:
    """Random smooth spectrum: three complex Gaussian bumps inside the cover."""
    edge = (2 * windows + 1) * sigma
    fg = make_uniform_grid(-edge, edge, 2048 * (2 * windows + 1) + 1)
    y = fg.nodes()
    vals = np.zeros(y.size, dtype=np.complex128)
    for _ in range(3):
        center = rng.uniform(-2.5 * sigma, 2.5 * sigma)
        width = rng.uniform(0.2 * sigma, 0.8 * sigma)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        vals += amp * np.exp(-0.5 * ((y - center) / width) ** 2)
    return SampledSpectrum(grid=fg, values=vals)


def spectrum_norm_sq(fs: SampledSpectrum) -> float:
    """2 pi * int |fhat|^2, the time-domain norm by Parseval."""
    w = quadrature_weights(fs.grid)
    return float(2.0 * np.pi * (w * np.abs(fs.values) ** 2).sum())


def time_norm_sq(f: SampledFunction) -> float:
    w = quadrature_weights(f.grid)
    return float((w * np.abs(f.values) ** 2).sum().real)


def run_cli(argv) -> Tuple[int, str]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = cli_main(list(argv))
    return rc, buf.getvalue()


GAUSS_WIDTH_ONE = gaussian_generator(1.0)
