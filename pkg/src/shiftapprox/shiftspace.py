"""Transform, synthesis, Plancherel identities, projection, and best error.

For a generator B with shifts B(. - j pi/sigma), a member
``s = sum_j beta_j B(. - j pi/sigma)`` is encoded by the 2*sigma-periodic
function ``zeta(y) = sum_j beta_j e^{-i j pi y / sigma}``; the map f |-> zeta
extends to all of L2 through the folded spectral sum

    zeta(y) = (1/D(y)) * sum_k conj(spectrum(y + 2 k sigma)) * fhat(y + 2 k sigma)

and every norm, inner product, projection, and best-approximation error of
the shift space is an explicit weighted integral of zeta over one period.

Numerical architecture: all period integrals share one uniform grid on
[-sigma, sigma]; the spectrum of f lives on the aligned extension of that
grid over 2K+1 periods so that folding is pure array slicing and the two
integrals of the error formula (total energy and captured energy) use the
same nodes.  Node-wise Cauchy-Schwarz then makes the Bessel inequality and
the monotonicity of the error in rho structural facts of the discretization
rather than accidents of quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (GridMismatchError, InvalidGridError,
                     MissingTimeDomainError, ResolutionError, ShiftSpaceError)
from .generator import Generator
from .numerics import (Grid, SampledFunction, SampledSpectrum, TWO_PI,
                       fourier_transform_sampled, quadrature_weights)
from .spectral import EPSILON_D, PeriodizedSpectrum, periodize

_RHO_RTOL = 1e-12


@dataclass(frozen=True)
class ShiftExpansion:
    """Finite coefficient vector beta_j, j = -j_max .. j_max.

    ``vanishing_defect`` is the L2 size of the trigonometric sum on the
    excluded band rho < |y| <= sigma; finite expansions of a proper
    subspace (rho < sigma) can satisfy the vanishing condition only
    approximately, so the residual is attached instead of asserted.
    """

    sigma: float
    rho: float
    coeffs: np.ndarray
    vanishing_defect: float = 0.0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.rho <= self.sigma * (1.0 + _RHO_RTOL):
            raise ValueError(f"rho must be in (0, sigma], got {self.rho}")
        if self.coeffs.ndim != 1 or self.coeffs.size % 2 == 0:
            raise ValueError("coeffs must be a 1-d array of odd length "
                             "(symmetric index range)")

    @property
    def j_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    def indices(self) -> np.ndarray:
        return np.arange(-self.j_max, self.j_max + 1)


@dataclass(frozen=True)
class ZetaFunction:
    sigma: float
    rho: float
    grid: Grid
    values: np.ndarray
    zero_set_enforced: bool = False

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.count,):
            raise ValueError("values length does not match grid")
        if self.zero_set_enforced:
            outside = np.abs(self.grid.nodes()) > self.rho * (1.0 + _RHO_RTOL)
            if np.any(self.values[outside] != 0):
                raise ValueError("zero_set_enforced but values are nonzero "
                                 "beyond |y| = rho")


@dataclass(frozen=True)
class ProjectionResult:
    zeta: ZetaFunction
    coeffs: ShiftExpansion
    projection_norm_sq: float
    error_sq: float
    guard_mass: float


def _same_grid(a: Grid, b: Grid) -> bool:
    tol = 1e-9 * max(a.span(), b.span(), 1.0)
    return (a.count == b.count and abs(a.start - b.start) <= tol
            and abs(a.stop - b.stop) <= tol)


def _rho_mask(grid: Grid, rho: float) -> np.ndarray:
    return np.abs(grid.nodes()) <= rho * (1.0 + _RHO_RTOL)


def _band_weights(grid: Grid, rho: float) -> np.ndarray:
    """Simpson weights for the sub-band |y| <= rho, zero outside.

    Rebuilt on the contiguous sub-grid rather than masked from the full
    interval, so the cut at +-rho carries no O(step) boundary error.  At
    rho = sigma this reduces to the plain full-interval weights.
    """
    w = np.zeros(grid.count)
    idx = np.nonzero(_rho_mask(grid, rho))[0]
    if idx.size < 2:
        return w
    lo, hi = int(idx[0]), int(idx[-1])
    nodes = grid.nodes()
    sub = Grid(start=float(nodes[lo]), stop=float(nodes[hi]), count=hi - lo + 1)
    w[lo:hi + 1] = quadrature_weights(sub)
    return w


def _complement_weights(grid: Grid, rho: float) -> np.ndarray:
    """Weights for the two closed pieces rho <= |y| <= sigma of the period."""
    idx = np.nonzero(_rho_mask(grid, rho))[0]
    if idx.size == 0:
        return quadrature_weights(grid)
    w = np.zeros(grid.count)
    lo, hi = int(idx[0]), int(idx[-1])
    nodes = grid.nodes()
    if lo >= 1:
        sub = Grid(start=float(nodes[0]), stop=float(nodes[lo]), count=lo + 1)
        w[:lo + 1] += quadrature_weights(sub)
    if hi <= grid.count - 2:
        sub = Grid(start=float(nodes[hi]), stop=float(nodes[-1]),
                   count=grid.count - hi)
        w[hi:] += quadrature_weights(sub)
    return w


def _seam_extrapolate(values: np.ndarray) -> np.ndarray:
    """Replace the two period-boundary samples by interior quadratic
    extrapolation.

    The boundary nodes describe the split point of the period; spectra
    supported up to exactly the lattice edge take jump-midpoint values
    there (a measure-zero artifact), and squaring such samples breaks the
    midpoint cancellation that keeps every other panel accurate.  The
    continuity limit from the interior is the canonical representative;
    for smooth data the replacement changes the values by O(step^3).
    """
    if values.size < 5:
        return values
    out = values.copy()
    out[0] = 3.0 * values[1] - 3.0 * values[2] + values[3]
    out[-1] = 3.0 * values[-2] - 3.0 * values[-3] + values[-4]
    return out


def _regularized_density(dv: PeriodizedSpectrum) -> np.ndarray:
    out = _seam_extrapolate(dv.values)
    if out.size >= 5:
        out[0] = max(out[0], 0.0)
        out[-1] = max(out[-1], 0.0)
    return out


def zeta_of_coeffs(exp: ShiftExpansion, grid: Grid) -> ZetaFunction:
    """Exact finite sum ``sum_j beta_j e^{-i j pi y / sigma}`` at the nodes."""
    y = grid.nodes()
    js = exp.indices().astype(float)
    phases = np.exp((-1j * np.pi / exp.sigma) * y[:, np.newaxis] * js)
    values = (phases * exp.coeffs).sum(axis=1)
    return ZetaFunction(sigma=exp.sigma, rho=exp.rho, grid=grid, values=values,
                        zero_set_enforced=False)


def coeffs_from_zeta(zeta: ZetaFunction, j_range: int) -> ShiftExpansion:
    """Fourier coefficients ``beta_j = (1/2 sigma) integral_{-rho}^{rho}
    zeta(y) e^{i j pi y / sigma} dy`` for |j| <= j_range.

    Composite Simpson over one full period annihilates e^{i l pi y/sigma}
    exactly for 0 < |l| < (count-1)/2, so round trips with trigonometric
    polynomials are exact at the default resolution.
    """
    grid = zeta.grid
    nodes_per_period = 2.0 * zeta.sigma / (max(j_range, 1) * grid.step)
    if nodes_per_period < 8.0:
        raise ResolutionError(
            f"grid step {grid.step:.3g} cannot resolve shift index "
            f"{j_range} (needs >= 8 nodes per oscillation period, "
            f"has {nodes_per_period:.2f})")
    w = _band_weights(grid, zeta.rho)
    weighted = w * zeta.values
    y = grid.nodes()
    js = np.arange(-j_range, j_range + 1).astype(float)
    phases = np.exp((1j * np.pi / zeta.sigma) * np.outer(js, y))
    coeffs = (phases * weighted).sum(axis=1) / (2.0 * zeta.sigma)
    defect = _vanishing_defect(zeta.sigma, zeta.rho, coeffs, grid)
    return ShiftExpansion(sigma=zeta.sigma, rho=zeta.rho, coeffs=coeffs,
                          vanishing_defect=defect)


def _vanishing_defect(sigma: float, rho: float, coeffs: np.ndarray,
                      grid: Grid) -> float:
    if rho >= sigma * (1.0 - 1e-12):
        return 0.0
    tmp = ShiftExpansion(sigma=sigma, rho=sigma, coeffs=coeffs)
    trig = zeta_of_coeffs(tmp, grid).values
    w = _complement_weights(grid, rho)
    return float(np.sqrt(max((w * np.abs(trig) ** 2).sum(), 0.0)))


def synthesize(exp: ShiftExpansion, gen: Generator, x_grid: Grid) -> SampledFunction:
    """``s(x) = sum_j beta_j B(x - j pi / sigma)`` sampled on x_grid."""
    if gen.time_domain is None:
        raise MissingTimeDomainError(
            f"generator {gen.label!r} has no time-domain evaluator")
    x = x_grid.nodes()
    h = np.pi / exp.sigma
    js = exp.indices().astype(float)
    values = np.zeros(x.size, dtype=np.complex128)
    chunk = max(1, int(4_000_000 // max(x.size, 1)))
    for lo in range(0, js.size, chunk):
        jc = js[lo:lo + chunk]
        values += (gen.time_domain(x[:, np.newaxis] - jc * h)
                   * exp.coeffs[lo:lo + chunk]).sum(axis=1)
    return SampledFunction(grid=x_grid, values=values)


@dataclass(frozen=True)
class _FoldResult:
    """Shared per-node arrays of the folded pipeline on the base grid.

    bracket, energy, and density_reg carry seam-extrapolated values at the
    two period-boundary nodes; density holds the raw periodization.
    """

    grid: Grid
    bracket: np.ndarray       # sum_k conj(B^)(y+2ks) fhat(y+2ks)
    energy: np.ndarray        # sum_k |fhat(y+2ks)|^2
    density: PeriodizedSpectrum
    density_reg: np.ndarray   # endpoint-regularized D
    windows: int              # K: one-sided window count of the f cover


def _fold(f_spec: SampledSpectrum, gen: Generator, sigma: float, grid: Grid,
          tol: float) -> _FoldResult:
    span_tol = 1e-9 * max(1.0, sigma)
    if abs(grid.start + sigma) > span_tol or abs(grid.stop - sigma) > span_tol:
        raise InvalidGridError(
            f"base grid [{grid.start}, {grid.stop}] must span [-sigma, sigma]")
    n = grid.count
    step = grid.step
    cover = max(abs(f_spec.grid.start), abs(f_spec.grid.stop))
    windows = max(0, int(np.ceil((cover - sigma) / (2.0 * sigma) - 1e-12)))
    m = (n - 1) * (2 * windows + 1) + 1
    edge = (2.0 * windows + 1.0) * sigma
    y_full = np.linspace(-edge, edge, m)

    fg = f_spec.grid
    offset = (fg.start - y_full[0]) / step
    aligned = (abs(fg.step - step) <= 1e-9 * step
               and abs(offset - round(offset)) <= 1e-6)
    fvals = np.zeros(m, dtype=np.complex128)
    if aligned:
        i0 = int(round(offset))
        src_lo = max(0, -i0)
        src_hi = min(fg.count, m - i0)
        if src_hi > src_lo:
            fvals[i0 + src_lo:i0 + src_hi] = f_spec.values[src_lo:src_hi]
    else:
        nodes = fg.nodes()
        fvals = (np.interp(y_full, nodes, f_spec.values.real, left=0.0, right=0.0)
                 + 1j * np.interp(y_full, nodes, f_spec.values.imag,
                                  left=0.0, right=0.0))

    spec_full = np.conj(gen.spectrum(y_full))
    bracket = np.zeros(n, dtype=np.complex128)
    energy = np.zeros(n)
    for k in range(2 * windows + 1):
        sl = slice(k * (n - 1), k * (n - 1) + n)
        bracket += spec_full[sl] * fvals[sl]
        energy += np.abs(fvals[sl]) ** 2
    bracket = _seam_extrapolate(bracket)
    energy = np.maximum(_seam_extrapolate(energy), 0.0)
    density = periodize(gen, sigma, grid, tol=tol, min_terms=windows)
    return _FoldResult(grid=grid, bracket=bracket, energy=energy,
                       density=density, density_reg=_regularized_density(density),
                       windows=windows)


def zeta_transform(f_spec: SampledSpectrum, gen: Generator, sigma: float,
                   grid: Grid, tol: float = 1e-8) -> ZetaFunction:
    """The folded-spectrum transform of f on one period.

    Nodes where D is at or below the division guard contribute zero; their
    discarded bracket mass is visible through ``project``.
    """
    fold = _fold(f_spec, gen, sigma, grid, tol)
    live = fold.density_reg > EPSILON_D
    values = np.where(live, fold.bracket / np.where(live, fold.density_reg, 1.0), 0.0)
    return ZetaFunction(sigma=float(sigma), rho=float(sigma), grid=grid,
                        values=values, zero_set_enforced=False)


def plancherel_norm_sq(zeta: ZetaFunction, dv: PeriodizedSpectrum) -> float:
    """``2 pi * integral_{-rho}^{rho} |zeta|^2 D`` on the shared grid."""
    if not _same_grid(zeta.grid, dv.grid):
        raise GridMismatchError("zeta and D live on different grids")
    w = _band_weights(zeta.grid, zeta.rho)
    total = (w * np.abs(zeta.values) ** 2 * _regularized_density(dv)).sum()
    return float(max(TWO_PI * total, 0.0))


def plancherel_inner(zeta_s: ZetaFunction, zeta_t: ZetaFunction,
                     dv: PeriodizedSpectrum) -> complex:
    """``2 pi * integral zeta_S conj(zeta_T) D`` over the common band."""
    if not (_same_grid(zeta_s.grid, zeta_t.grid)
            and _same_grid(zeta_s.grid, dv.grid)):
        raise GridMismatchError("inner product operands on different grids")
    rho = min(zeta_s.rho, zeta_t.rho)
    w = _band_weights(zeta_s.grid, rho)
    total = (w * zeta_s.values * np.conj(zeta_t.values)
             * _regularized_density(dv)).sum()
    return complex(TWO_PI * total)


def _spectrum_of(f: SampledFunction, sigma: float, grid: Grid,
                 mass_tol: float = 1e-12) -> SampledSpectrum:
    """Spectrum of time samples on aligned extensions of the base grid.

    The frequency extent doubles until the outermost period windows hold a
    negligible share of the captured energy, so the folded sums see all of
    the spectrum that matters.
    """
    n = grid.count
    windows = 1
    while True:
        m = (n - 1) * (2 * windows + 1) + 1
        edge = (2.0 * windows + 1.0) * sigma
        freq = Grid(start=-edge, stop=edge, count=m)
        spec = fourier_transform_sampled(f, freq)
        power = np.abs(spec.values) ** 2
        outer = power[:n - 1].sum() + power[m - n + 1:].sum()
        total = power.sum()
        if outer <= mass_tol * max(total, 1e-300) or windows >= 16:
            return spec
        windows *= 2


def project(f: Union[SampledFunction, SampledSpectrum], gen: Generator,
            sigma: float, rho: float, tol: float = 1e-8,
            grid: Optional[Grid] = None, j_range: int = 64) -> ProjectionResult:
    """Orthogonal projection of f onto the rho-band shift space.

    Returns the band-limited transform (zero enforced outside |y| <= rho),
    recovered shift coefficients, the captured energy, the exact-formula
    squared error, and the bracket mass discarded by the division guard.
    """
    if not 0 < rho <= sigma * (1.0 + _RHO_RTOL):
        raise InvalidGridError(f"rho must be in (0, sigma], got {rho}")
    if grid is None:
        grid = Grid(start=-sigma, stop=sigma, count=4097)
    if isinstance(f, SampledFunction):
        f_spec = _spectrum_of(f, sigma, grid)
    else:
        f_spec = f
    fold = _fold(f_spec, gen, sigma, grid, tol)

    w = quadrature_weights(grid)
    wb = _band_weights(grid, rho)
    band = _rho_mask(grid, rho)
    live = fold.density_reg > EPSILON_D
    active = band & live
    captured_density = np.where(
        active, np.abs(fold.bracket) ** 2 / np.where(active, fold.density_reg, 1.0),
        0.0)
    projection_norm_sq = float(max(TWO_PI * (wb * captured_density).sum(), 0.0))
    total_energy = float(TWO_PI * (w * fold.energy).sum())
    error_sq = max(total_energy - projection_norm_sq, 0.0)
    guarded = band & ~live
    guard_mass = float((np.abs(fold.bracket[guarded]) ** 2).sum())

    if projection_norm_sq > total_energy * (1.0 + 1e-9) + tol:
        raise ShiftSpaceError(
            f"captured energy {projection_norm_sq} exceeds input energy "
            f"{total_energy}: quadrature inconsistency")

    zeta_vals = np.where(active,
                         fold.bracket / np.where(active, fold.density_reg, 1.0),
                         0.0)
    zeta = ZetaFunction(sigma=float(sigma), rho=float(rho), grid=grid,
                        values=zeta_vals, zero_set_enforced=True)
    coeffs = coeffs_from_zeta(zeta, j_range)
    return ProjectionResult(zeta=zeta, coeffs=coeffs,
                            projection_norm_sq=projection_norm_sq,
                            error_sq=error_sq, guard_mass=guard_mass)


def best_approx_error_sq(f_spec: SampledSpectrum, gen: Generator, sigma: float,
                         rho: float, tol: float = 1e-8,
                         grid: Optional[Grid] = None) -> float:
    """Exact-formula squared distance of f from the rho-band shift space.

    Computed as ``2 pi (integral |fhat|^2 - integral_{-rho}^{rho}
    |bracket|^2 / D)`` with both integrals on the same nodes; clamped at
    zero.  Use ``project`` when the discarded guard mass is of interest.
    """
    if not 0 < rho <= sigma * (1.0 + _RHO_RTOL):
        raise InvalidGridError(f"rho must be in (0, sigma], got {rho}")
    if grid is None:
        grid = Grid(start=-sigma, stop=sigma, count=4097)
    fold = _fold(f_spec, gen, sigma, grid, tol)
    w = quadrature_weights(grid)
    wb = _band_weights(grid, rho)
    active = _rho_mask(grid, rho) & (fold.density_reg > EPSILON_D)
    captured = np.where(
        active, np.abs(fold.bracket) ** 2 / np.where(active, fold.density_reg, 1.0),
        0.0)
    total = (w * fold.energy).sum()
    return float(max(TWO_PI * (total - (wb * captured).sum()), 0.0))
