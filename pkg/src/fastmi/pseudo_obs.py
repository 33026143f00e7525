"""Rank-based pseudo-observations and their probit images.

All downstream computation sees the data only through the ranks produced
here, which makes the estimator blind to the marginal distributions.
"""

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata

from .errors import DomainError, InsufficientData, InvalidInput

MIN_N = 8


def as_sample(data, y=None, min_n=MIN_N):
    """Validate bivariate data and return it as a float ``(n, 2)`` array.

    Parameters
    ----------
    data : array_like
        Either an ``(n, 2)`` array of pairs, or the x column when `y` is given.
    y : array_like, optional
        The y column.
    min_n : int
        Smallest accepted sample size.
    """
    if y is not None:
        x = np.asarray(data, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != y.shape:
            raise InvalidInput(f"x and y lengths differ ({x.size} vs {y.size})")
        sample = np.column_stack([x, y])
    else:
        sample = np.asarray(data, dtype=float)
        if sample.ndim != 2 or sample.shape[1] != 2:
            raise InvalidInput(f"expected an (n, 2) array, got shape {sample.shape}")
    if not np.all(np.isfinite(sample)):
        bad = int(np.flatnonzero(~np.isfinite(sample).all(axis=1))[0])
        raise InvalidInput(f"non-finite coordinate in row {bad}")
    if sample.shape[0] < min_n:
        raise InsufficientData(f"need at least {min_n} observations, got {sample.shape[0]}")
    return sample


def _ranks(column, ties, rng):
    if ties == "midrank":
        return rankdata(column, method="average")
    if ties == "jitter":
        # random tie-break: order by value, then by a uniform key
        order = np.lexsort((rng.random(column.size), column))
        ranks = np.empty(column.size)
        ranks[order] = np.arange(1, column.size + 1)
        return ranks
    raise ValueError(f"unknown tie mode {ties!r}")


def empirical_cdf_transform(sample, ties="midrank", seed=None, min_n=MIN_N):
    """Map each margin to ``rank / (n + 1)``.

    Parameters
    ----------
    sample : array_like, shape (n, 2)
        Raw observation pairs.
    ties : {'midrank', 'jitter'}
        Midranks are deterministic. ``'jitter'`` breaks ties at random
        using `seed`.
    seed : int or numpy.random.Generator, optional
        Only used with ``ties='jitter'``.
    min_n : int
        Smallest accepted sample size.

    Returns
    -------
    ndarray, shape (n, 2)
        Pseudo-observations strictly inside the unit square, rows in input order.
    """
    sample = as_sample(sample, min_n=min_n)
    n = sample.shape[0]
    rng = np.random.default_rng(seed) if ties == "jitter" else None
    u = _ranks(sample[:, 0], ties, rng)
    v = _ranks(sample[:, 1], ties, rng)
    return np.column_stack([u, v]) / (n + 1)


def probit_transform(pseudo):
    """Apply the standard normal quantile function elementwise.

    Raises
    ------
    DomainError
        If any coordinate is not strictly inside ``(0, 1)``.
    """
    pseudo = np.asarray(pseudo, dtype=float)
    if not np.all((pseudo > 0) & (pseudo < 1)):
        raise DomainError("pseudo-observations must lie strictly inside (0, 1)")
    return ndtri(pseudo)


def probit_sample(sample, ties="midrank", seed=None, min_n=MIN_N):
    """Shorthand for ``probit_transform(empirical_cdf_transform(sample))``."""
    return probit_transform(empirical_cdf_transform(sample, ties=ties, seed=seed, min_n=min_n))
