"""Self-consistent density estimation on a regular 2-D grid.

Pipeline: empirical characteristic function (ECF) on a centred frequency
grid, low-pass mask of acceptable frequencies, closed-form optimal kernel
in Fourier space, inverse FFT back to a spatial density.

Frequency-domain arrays are stored *centred*: index ``i`` holds frequency
``(i - m // 2) * dt`` so the zero frequency sits at ``(m // 2, m // 2)``.
Spatial arrays hold ``f(x_a, y_b)`` at index ``[a, b]`` with
``x_a = lo + a * dx``. The first axis is always the x margin.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from .errors import AsymmetrySignal, ConfigError, GridOverflow, NonConvergence

DEFAULT_M = 256
DEFAULT_PAD = 1.0
DEFAULT_DENSITY_FLOOR = 1e-12
IMAG_TOL = 1e-8

_CHUNK = 4096
_CROP = 32


@dataclass(frozen=True)
class GridSpec:
    """Square grid ``[lo, hi)`` with `m` nodes per axis, periodic in both axes."""

    m: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.m < 32 or self.m & (self.m - 1):
            raise ConfigError(f"grid size must be a power of two >= 32, got {self.m}")
        if not self.lo < self.hi:
            raise ConfigError(f"empty grid extent [{self.lo}, {self.hi}]")

    @property
    def dx(self):
        return (self.hi - self.lo) / self.m

    @property
    def dt(self):
        return 2.0 * np.pi / (self.m * self.dx)

    @property
    def nodes(self):
        return self.lo + self.dx * np.arange(self.m)

    @property
    def freqs(self):
        """Centred frequency axis ``t_k`` for ``k = -m/2 ... m/2 - 1``."""
        return self.dt * np.arange(-(self.m // 2), self.m // 2)

    @property
    def origin(self):
        return (self.m // 2, self.m // 2)


@dataclass(frozen=True)
class EcfGrid:
    values: np.ndarray
    n: int
    grid: GridSpec


@dataclass(frozen=True)
class FilterMask:
    mask: np.ndarray
    threshold: float
    grid: GridSpec

    @property
    def volume(self):
        """Frequency-space volume of the retained set."""
        return float(self.mask.sum()) * self.grid.dt ** 2


@dataclass(frozen=True)
class TransformKernel:
    values: np.ndarray


@dataclass(frozen=True)
class DensityGrid:
    """Estimated probit-space density sampled on `grid`.

    Attributes
    ----------
    values : ndarray, shape (m, m)
        Density at the grid nodes, clipped at `floor` and renormalised.
    grid : GridSpec
    floor : float
        Absolute clip level applied before renormalisation.
    clipped_mass : float
        Riemann mass added by the clip, before any renormalisation.
    mass : float
        Riemann mass of `values` (1 when renormalised).
    """

    values: np.ndarray
    grid: GridSpec
    floor: float
    clipped_mass: float = 0.0
    mass: float = 1.0

    def normalized(self):
        """Copy rescaled to unit Riemann mass."""
        if self.mass == 1.0:
            return self
        return DensityGrid(values=self.values / self.mass, grid=self.grid,
                           floor=self.floor / self.mass,
                           clipped_mass=self.clipped_mass, mass=1.0)

    def __call__(self, x, y):
        """Periodic bilinear interpolation at arbitrary points."""
        g = self.grid
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        sx = _snap((x - g.lo) / g.dx)
        sy = _snap((y - g.lo) / g.dx)
        ix = np.floor(sx)
        iy = np.floor(sy)
        fx = sx - ix
        fy = sy - iy
        ix = ix.astype(np.intp) % g.m
        iy = iy.astype(np.intp) % g.m
        jx = (ix + 1) % g.m
        jy = (iy + 1) % g.m
        v = self.values
        return ((1 - fx) * (1 - fy) * v[ix, iy] + fx * (1 - fy) * v[jx, iy]
                + (1 - fx) * fy * v[ix, jy] + fx * fy * v[jx, jy])


def _snap(s):
    # grid nodes must read back exactly despite round-off in (x - lo) / dx
    r = np.rint(s)
    return np.where(np.abs(s - r) < 1e-9, r, s)


def build_grid(probit, m=DEFAULT_M, pad=DEFAULT_PAD):
    """Symmetric grid ``[-L, L]`` on both axes with ``L = max|z| + pad``."""
    if pad < 0:
        raise ConfigError(f"pad must be >= 0, got {pad}")
    probit = np.asarray(probit, dtype=float)
    half = float(np.max(np.abs(probit))) + pad
    if half <= 0:
        raise ConfigError("degenerate sample: all coordinates are zero and pad is 0")
    return GridSpec(m=int(m), lo=-half, hi=half)


def _check_extent(probit, grid):
    slack = 1e-9 * (grid.hi - grid.lo)
    if probit.min() < grid.lo - slack or probit.max() > grid.hi + slack:
        raise GridOverflow(
            f"points span [{probit.min():.6g}, {probit.max():.6g}] outside "
            f"grid [{grid.lo:.6g}, {grid.hi:.6g}]")


def _ecf_direct(probit, grid):
    t = grid.freqs
    n = probit.shape[0]
    out = np.zeros((grid.m, grid.m), dtype=complex)
    for start in range(0, n, _CHUNK):
        block = probit[start:start + _CHUNK]
        ex = np.exp(1j * np.outer(block[:, 0], t))
        ey = np.exp(1j * np.outer(block[:, 1], t))
        out += ex.T @ ey
    return out / n


def linear_bin(probit, grid):
    """Linear (cloud-in-cell) binning onto the periodic node grid.

    Returns an ``(m, m)`` array of weights summing to one.
    """
    m = grid.m
    s = (probit - grid.lo) / grid.dx
    i0 = np.floor(s)
    frac = s - i0
    i0 = i0.astype(np.intp) % m
    i1 = (i0 + 1) % m
    w0 = 1.0 - frac
    n = probit.shape[0]
    weights = np.zeros(m * m)
    for ia, wa in ((i0[:, 0], w0[:, 0]), (i1[:, 0], frac[:, 0])):
        for ib, wb in ((i0[:, 1], w0[:, 1]), (i1[:, 1], frac[:, 1])):
            weights += np.bincount(ia * m + ib, weights=wa * wb, minlength=m * m)
    return weights.reshape(m, m) / n


@lru_cache(maxsize=8)
def _checkerboard(m):
    # multiplying by (-1)^(a+b) shifts the transform by m/2 on both axes
    sign = 1.0 - 2.0 * (np.arange(m) % 2)
    board = np.outer(sign, sign)
    board.setflags(write=False)
    return board


def _ecf_binned(probit, grid):
    m = grid.m
    weights = linear_bin(probit, grid) * _checkerboard(m)
    # sum_a w_a exp(+2 pi i k a / m) = m^2 * ifft2, already centred
    spectrum = sfft.ifft2(weights, overwrite_x=True)
    t = grid.freqs
    # linear binning multiplies the transform by sinc^2(t dx / 2) per axis
    window = np.sinc(t * grid.dx / (2.0 * np.pi)) ** 2
    axis_factor = np.exp(1j * t * grid.lo) * (m / window)
    spectrum *= axis_factor[:, None]
    spectrum *= axis_factor[None, :]
    return spectrum


def compute_ecf(probit, grid, mode="binned"):
    """Empirical characteristic function ``(1/n) sum_j exp(i t . z_j)`` on the grid.

    Parameters
    ----------
    probit : ndarray, shape (n, 2)
    grid : GridSpec
    mode : {'binned', 'direct'}
        ``'direct'`` sums complex exponentials exactly (O(n m^2));
        ``'binned'`` bins linearly, FFTs and divides out the binning window.

    Returns
    -------
    EcfGrid
    """
    probit = np.asarray(probit, dtype=float)
    _check_extent(probit, grid)
    if mode == "direct":
        values = _ecf_direct(probit, grid)
    elif mode == "binned":
        values = _ecf_binned(probit, grid)
    else:
        raise ConfigError(f"unknown ECF mode {mode!r}")
    return EcfGrid(values=values, n=probit.shape[0], grid=grid)


def filter_threshold(n):
    """Lower bound on ``|C(t)|^2`` for an acceptable frequency."""
    return 4.0 * (n - 1) / n ** 2


def _origin_component(above, origin):
    labels, _ = ndimage.label(above)
    return labels == labels[origin]


def acceptable_frequency_mask(ecf):
    """Connected set of above-threshold frequencies containing the origin.

    Connectivity is 4-neighbour. The Nyquist row and column (``k = -m/2``)
    have no conjugate partner on the grid and are never retained.
    """
    threshold = filter_threshold(ecf.n)
    m = ecf.grid.m
    above = (ecf.values.real ** 2 + ecf.values.imag ** 2) >= threshold
    above[0, :] = False
    above[:, 0] = False
    origin = ecf.grid.origin
    above[origin] = True
    # label a central crop first; fall back to the full grid if the
    # component reaches the crop edge
    half = min(_CROP, m // 2)
    lo, hi = m // 2 - half + 1, m // 2 + half
    crop = _origin_component(above[lo:hi, lo:hi], (half - 1, half - 1))
    if crop[0].any() or crop[-1].any() or crop[:, 0].any() or crop[:, -1].any():
        mask = _origin_component(above, origin)
    else:
        mask = np.zeros_like(above)
        mask[lo:hi, lo:hi] = crop
    return FilterMask(mask=mask, threshold=threshold, grid=ecf.grid)


def optimal_transform_kernel(ecf, mask):
    """Closed-form MISE-optimal kernel in Fourier space, zero off the mask."""
    n = ecf.n
    kappa = np.zeros(ecf.values.shape)
    c = ecf.values[mask.mask]
    mod2 = c.real ** 2 + c.imag ** 2
    with np.errstate(divide="ignore"):
        radicand = 1.0 - 4.0 * (n - 1) / (n * n * mod2)
    radicand = np.clip(radicand, 0.0, 1.0)
    kappa[mask.mask] = n / (2.0 * (n - 1)) * (1.0 + np.sqrt(radicand))
    return TransformKernel(values=kappa)


def sce_transform(ecf, kernel):
    """Fourier transform of the density estimate, ``kappa * C``."""
    return kernel.values * ecf.values


def _inverse_transform(phi_hat, grid):
    """``(1/(2 pi)^2) sum_t phi(t) exp(-i t.x) dt^2`` at every grid node."""
    m = grid.m
    t = grid.freqs
    phase = np.exp(-1j * t * grid.lo) / (m * grid.dx)
    weighted = phi_hat * phase[:, None]
    weighted *= phase[None, :]
    raw = sfft.fft2(weighted, overwrite_x=True)
    raw *= _checkerboard(m)
    return raw


def invert_to_density(phi_hat, grid, floor=DEFAULT_DENSITY_FLOOR, renormalize=True,
                      ringing_floor=False):
    """Inverse continuous Fourier transform of `phi_hat` onto the spatial grid.

    Parameters
    ----------
    phi_hat : ndarray, shape (m, m), complex
        Centred Fourier transform of the density.
    grid : GridSpec
    floor : float
        Clip level as a fraction of the peak density.
    renormalize : bool
        Rescale to unit Riemann mass after clipping.
    ringing_floor : bool
        Raise the clip level to the depth of the most negative value of the
        raw inverse, i.e. the amplitude of the band-limiting ripple.

    Returns
    -------
    DensityGrid

    Raises
    ------
    AsymmetrySignal
        If the imaginary part exceeds ``1e-8`` of the real sup-norm.
    """
    raw = _inverse_transform(phi_hat, grid)
    scale = np.max(np.abs(raw.real))
    residue = np.max(np.abs(raw.imag))
    if scale == 0 or residue > IMAG_TOL * scale:
        raise AsymmetrySignal(f"imaginary residue {residue:.3g} vs peak {scale:.3g}")
    density = raw.real
    level = floor * density.max()
    if ringing_floor:
        level = max(level, -density.min())
    cell = grid.dx ** 2
    clipped_mass = float(np.sum(np.maximum(level - density, 0.0)) * cell)
    density = np.maximum(density, level)
    mass = density.sum() * cell
    if renormalize:
        density = density / mass
        level = level / mass
        mass = 1.0
    return DensityGrid(values=density, grid=grid, floor=level,
                       clipped_mass=clipped_mass, mass=float(mass))


def fit_density(probit, m=DEFAULT_M, pad=DEFAULT_PAD, ecf_mode="binned",
                floor=DEFAULT_DENSITY_FLOOR, renormalize=True, ringing_floor=False,
                grid=None):
    """Run the whole self-consistent estimate for a probit sample.

    Returns
    -------
    density : DensityGrid
    mask : FilterMask
    """
    probit = np.asarray(probit, dtype=float)
    if grid is None:
        grid = build_grid(probit, m, pad)
    ecf = compute_ecf(probit, grid, ecf_mode)
    mask = acceptable_frequency_mask(ecf)
    kernel = optimal_transform_kernel(ecf, mask)
    density = invert_to_density(sce_transform(ecf, kernel), grid, floor,
                                renormalize=renormalize, ringing_floor=ringing_floor)
    return density, mask


def fixed_point_phi(ecf, mask=None, tol=1e-13, max_iter=1_000_000):
    """Solve the self-consistency relation by direct iteration.

    Iterates ``phi <- n C / (n - 1 + |phi|^-2)`` from ``phi = C`` on the
    retained frequencies until the largest update is below `tol`. Used to
    cross-check the closed-form kernel, not in the production path.

    Raises
    ------
    NonConvergence
        With the number of frequencies still moving after `max_iter` sweeps.
    """
    if mask is None:
        mask = acceptable_frequency_mask(ecf)
    n = ecf.n
    c = ecf.values[mask.mask]
    phi = c.copy()
    active = np.arange(c.size)
    for _ in range(max_iter):
        p = phi[active]
        mod2 = (p * p.conj()).real
        new = n * c[active] * mod2 / ((n - 1) * mod2 + 1.0)
        step = np.abs(new - p)
        phi[active] = new
        active = active[step >= tol]
        if active.size == 0:
            break
    else:
        raise NonConvergence(
            f"{active.size} frequencies unconverged after {max_iter} iterations",
            n_unconverged=active.size)
    out = np.zeros_like(ecf.values)
    out[mask.mask] = phi
    return out
