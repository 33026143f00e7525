"""Plug-in mutual information from the self-consistent copula density."""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from . import sce
from .errors import ConfigError, DomainError, NonFinite
from .pseudo_obs import MIN_N, as_sample, probit_sample

DEFAULT_COPULA_FLOOR = 1e-10
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass(frozen=True)
class EstimatorConfig:
    """Discretisation settings. None of these are statistical tuning knobs.

    Attributes
    ----------
    m : int
        Grid points per axis (power of two, >= 32).
    pad : float
        Margin added around the probit sample, in probit units.
    ecf_mode : {'binned', 'direct'}
    floor : float
        Lower clamp for the copula density before taking logs.
    density_floor : float
        Minimum clip level for the spatial density, relative to its peak.
    clip_mode : {'ringing', 'renormalize'}
        ``'ringing'`` clips the density at the depth of its most negative
        ripple and leaves the mass as is. ``'renormalize'`` clips at
        `density_floor` only and rescales to unit mass; every point then
        loses the mass added in the far field, which biases the estimate
        downwards.
    min_n : int
    """

    m: int = sce.DEFAULT_M
    pad: float = sce.DEFAULT_PAD
    ecf_mode: str = "binned"
    floor: float = DEFAULT_COPULA_FLOOR
    density_floor: float = sce.DEFAULT_DENSITY_FLOOR
    clip_mode: str = "ringing"
    min_n: int = MIN_N

    def __post_init__(self):
        m = self.m
        if m < 32 or m & (m - 1):
            raise ConfigError(f"grid size must be a power of two >= 32, got {m}")
        if not self.pad >= 0:
            raise ConfigError(f"pad must be >= 0, got {self.pad}")
        if self.ecf_mode not in ("binned", "direct"):
            raise ConfigError(f"ecf_mode must be 'binned' or 'direct', got {self.ecf_mode!r}")
        if not 0 < self.floor < 1:
            raise ConfigError(f"floor must lie in (0, 1), got {self.floor}")
        if not 0 < self.density_floor < 1:
            raise ConfigError(f"density_floor must lie in (0, 1), got {self.density_floor}")
        if self.clip_mode not in ("ringing", "renormalize"):
            raise ConfigError(f"clip_mode must be 'ringing' or 'renormalize', got {self.clip_mode!r}")
        if self.min_n < 2:
            raise ConfigError(f"min_n must be >= 2, got {self.min_n}")


@dataclass(frozen=True)
class MiEstimate:
    value: float
    n: int
    grid: sce.GridSpec
    floor_hits: int
    config: EstimatorConfig = field(default_factory=EstimatorConfig)

    @property
    def bits(self):
        return self.value / np.log(2.0)


def _log_normal_pdf(z):
    return -0.5 * z * z - _LOG_SQRT_2PI


def log_copula_density_probit(density, z, floor=DEFAULT_COPULA_FLOOR):
    """Log copula density at probit-space points ``z`` of shape (k, 2).

    Returns
    -------
    logc : ndarray
    hits : ndarray of bool
        Where the floor was applied.
    """
    z = np.asarray(z, dtype=float)
    f = density(z[:, 0], z[:, 1])
    with np.errstate(divide="ignore"):
        logc = np.log(f) - _log_normal_pdf(z[:, 0]) - _log_normal_pdf(z[:, 1])
    log_floor = np.log(floor)
    hits = ~(logc > log_floor)
    logc = np.where(hits, log_floor, logc)
    return logc, hits


def copula_density_at(density, u, v, floor=DEFAULT_COPULA_FLOOR):
    """Copula density ``f(Phi^-1(u), Phi^-1(v)) / (phi(Phi^-1 u) phi(Phi^-1 v))``.

    `density` is read by bilinear interpolation; the result is clamped
    below at `floor`.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if not (np.all((u > 0) & (u < 1)) and np.all((v > 0) & (v < 1))):
        raise DomainError("u and v must lie strictly inside (0, 1)")
    shape = np.broadcast(u, v).shape
    z = np.column_stack([ndtri(np.broadcast_to(u, shape).ravel()),
                         ndtri(np.broadcast_to(v, shape).ravel())])
    logc, _ = log_copula_density_probit(density, z, floor)
    out = np.exp(logc).reshape(shape)
    return out if shape else float(out)


def fit_copula_density(probit, config=None, grid=None):
    """Fit the probit-space density the way the MI estimator uses it."""
    config = config or EstimatorConfig()
    ringing = config.clip_mode == "ringing"
    density, _ = sce.fit_density(probit, m=config.m, pad=config.pad,
                                 ecf_mode=config.ecf_mode, floor=config.density_floor,
                                 renormalize=not ringing, ringing_floor=ringing, grid=grid)
    return density


def mi_from_probit(probit, config=None, grid=None):
    """Estimate MI from an already probit-transformed rank sample.

    This is the inner loop shared by :func:`estimate_mi` and the
    permutation test.
    """
    config = config or EstimatorConfig()
    probit = np.asarray(probit, dtype=float)
    density = fit_copula_density(probit, config, grid)
    logc, hits = log_copula_density_probit(density, probit, config.floor)
    value = float(np.mean(logc))
    if not np.isfinite(value):
        raise NonFinite(f"MI estimate is not finite ({value})")
    return MiEstimate(value=value, n=probit.shape[0], grid=density.grid,
                      floor_hits=int(hits.sum()), config=config)


def estimate_mi(x, y=None, config=None, **overrides):
    """Tuning-free plug-in estimate of mutual information in nats.

    Parameters
    ----------
    x : array_like
        Either an ``(n, 2)`` array of pairs, or the first variable.
    y : array_like, optional
        Second variable when `x` is one-dimensional.
    config : EstimatorConfig, optional
    **overrides
        Field overrides applied on top of `config`, e.g. ``m=512``.

    Returns
    -------
    MiEstimate

    Examples
    --------
    >>> rng = np.random.default_rng(0)
    >>> x = rng.standard_normal(500)
    >>> est = estimate_mi(x, x + rng.standard_normal(500))
    >>> round(est.value, 1)
    0.4
    """
    config = config or EstimatorConfig()
    if overrides:
        config = EstimatorConfig(**{**config.__dict__, **overrides})
    sample = as_sample(x, y, min_n=config.min_n)
    return mi_from_probit(probit_sample(sample, min_n=config.min_n), config)
