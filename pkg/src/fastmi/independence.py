"""Permutation test of independence with the plug-in MI as statistic."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sce
from .errors import ConfigError
from .estimator import EstimatorConfig, mi_from_probit
from .pseudo_obs import as_sample, probit_sample

MIN_PERMUTATIONS = 99


@dataclass(frozen=True)
class TestResult:
    """Outcome of :func:`permutation_test`.

    ``reject`` follows the quantile rule: the observed statistic exceeds
    the ``1 - alpha`` empirical quantile of the permutation draws. The
    p-value uses the add-one convention, so it is never below ``1/(r+1)``.
    """

    __test__ = False

    statistic: float
    r: int
    p_value: float
    alpha: float
    reject: bool
    seed: int
    null_draws: Optional[np.ndarray] = None


def permutation_streams(seed, r):
    """One independent generator per permutation, indexed by position."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(r)]


def add_one_p_value(statistic, null_draws):
    null_draws = np.asarray(null_draws)
    return (1.0 + np.count_nonzero(null_draws >= statistic)) / (null_draws.size + 1.0)


def quantile_reject(statistic, null_draws, alpha):
    return bool(statistic > np.quantile(null_draws, 1.0 - alpha))


def permutation_test(x, y=None, r=999, alpha=0.05, seed=None, config=None, keep_null=True):
    """Test ``H0: MI = 0`` by re-pairing the y margin at random.

    Parameters
    ----------
    x, y : array_like
        Either an ``(n, 2)`` array in `x`, or two columns.
    r : int
        Number of permutations (at least 99).
    alpha : float
        Significance level in (0, 1).
    seed : int, optional
        Root seed. Permutation ``i`` draws from the ``i``-th spawned child
        stream, so results do not depend on evaluation order. When omitted
        fresh entropy is drawn and reported back in the result.
    config : EstimatorConfig, optional
    keep_null : bool
        Store the permutation statistics in the result.

    Returns
    -------
    TestResult
    """
    if int(r) != r or r < MIN_PERMUTATIONS:
        raise ConfigError(f"need at least {MIN_PERMUTATIONS} permutations, got {r}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    config = config or EstimatorConfig()
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2 ** 63))
    sample = as_sample(x, y, min_n=config.min_n)
    # ranks of each margin are unchanged by re-pairing, so the probit
    # scores and the grid extent are computed once
    probit = probit_sample(sample, min_n=config.min_n)
    grid = sce.build_grid(probit, config.m, config.pad)
    statistic = mi_from_probit(probit, config, grid).value
    null = np.empty(int(r))
    permuted = probit.copy()
    for i, rng in enumerate(permutation_streams(seed, int(r))):
        permuted[:, 1] = probit[rng.permutation(probit.shape[0]), 1]
        null[i] = mi_from_probit(permuted, config, grid).value
    return TestResult(statistic=statistic, r=int(r), p_value=add_one_p_value(statistic, null),
                      alpha=alpha, reject=quantile_reject(statistic, null, alpha), seed=seed,
                      null_draws=null if keep_null else None)
