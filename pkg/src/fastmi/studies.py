"""Seeded simulation studies: MSE, power and run-time scaling.

Each replicate draws from its own stream, derived from the root seed and
the cell coordinates ``(family, tau, n, rep)``. Records therefore do not
depend on evaluation order or on the number of worker threads, and a
single record can be regenerated in isolation.
"""

import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from .copulas import CopulaSpec, sample_copula, true_mi
from .errors import ConfigError
from .estimator import EstimatorConfig, estimate_mi
from .independence import MIN_PERMUTATIONS, permutation_test

STUDY_FAMILIES = ("gaussian", "clayton", "gumbel")
MAX_STUDY_TAU = 0.9
MIN_BENCH_REPS = 5
ESTIMATOR_NAME = "fastMI"

DEFAULT_MSE_TAUS = tuple(round(0.1 * k, 2) for k in range(10))
DEFAULT_MSE_NS = (100, 250, 500)
DEFAULT_POWER_TAUS = tuple(round(0.05 * k, 2) for k in range(11))
DEFAULT_POWER_NS = (100, 250, 500)
DEFAULT_BENCH_NS = (250, 500, 1000, 2500, 5000)
DEFAULT_REPS = 200
FULL_SCALE_REPS = 1000
DEFAULT_HARNESS_PERMS = 199

_FAMILY_CODE = {"independence": 0, "gaussian": 1, "clayton": 2, "gumbel": 3}


@dataclass
class StudyReport:
    """Per-replicate records plus per-cell aggregates.

    ``records`` and ``aggregates`` are lists of flat dicts so they can be
    written straight to CSV. ``timing_fields`` names the columns that are
    wall-clock measurements and hence not reproducible.
    """

    study: str
    records: list
    aggregates: list
    metadata: dict = field(default_factory=dict)
    timing_fields: tuple = ("elapsed_s",)

    def to_dict(self):
        return {
            "study": self.study,
            "metadata": self.metadata,
            "aggregates": self.aggregates,
            "records": self.records,
        }


def cell_seed(seed, family, tau, n, rep):
    """Seed sequence for one replicate, keyed by its cell coordinates."""
    key = (_FAMILY_CODE[family], int(round(tau * 10_000)), int(n), int(rep))
    return np.random.SeedSequence(seed, spawn_key=key)


def machine_descriptor():
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "cpu_count": os.cpu_count(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _validate_cells(families, taus, ns, reps, max_tau=MAX_STUDY_TAU):
    families = tuple(families)
    if not families:
        raise ConfigError("family list is empty")
    bad = [f for f in families if f not in STUDY_FAMILIES]
    if bad:
        raise ConfigError(f"unknown families {bad}; choose from {', '.join(STUDY_FAMILIES)}")
    taus = tuple(float(t) for t in taus)
    if not taus or any(not 0.0 <= t <= max_tau for t in taus):
        raise ConfigError(f"tau grid must be non-empty and within [0, {max_tau}], got {taus}")
    ns = tuple(int(n) for n in ns)
    if not ns or any(n < 8 for n in ns):
        raise ConfigError(f"n grid must be non-empty with every n >= 8, got {ns}")
    if int(reps) < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    return families, taus, ns, int(reps)


def _check_threads(threads):
    if int(threads) < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    return int(threads)


def _run(tasks, fn, threads):
    # Executor.map preserves input order, so reports match the serial run.
    if threads == 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _base_metadata(seed, config, reps, threads):
    return {
        "seed": seed,
        "reps": reps,
        "threads": threads,
        "estimator_config": asdict(config),
        "versions": {"fastmi": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }


def _mean_sd(values):
    values = np.asarray(values, dtype=float)
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), sd


def simulate_mse(families=STUDY_FAMILIES, taus=DEFAULT_MSE_TAUS, ns=DEFAULT_MSE_NS,
                 reps=DEFAULT_REPS, seed=0, config=None, threads=1):
    """Mean squared error of the estimator against the true-MI oracle.

    Returns
    -------
    StudyReport
        One aggregate row per ``(family, tau, n)`` with ``true_mi``,
        ``mean``, ``sd``, ``bias`` and ``mse``.
    """
    families, taus, ns, reps = _validate_cells(families, taus, ns, reps)
    threads = _check_threads(threads)
    config = config or EstimatorConfig()
    truth = {(f, t): true_mi(CopulaSpec(f, t)) for f in families for t in taus}
    tasks = [(f, t, n, r) for f in families for t in taus for n in ns for r in range(reps)]

    def one(task):
        f, t, n, r = task
        data = sample_copula(CopulaSpec(f, t), n, seed=cell_seed(seed, f, t, n, r))
        start = time.perf_counter()
        value = estimate_mi(data, config=config).value
        elapsed = time.perf_counter() - start
        return {"estimator": ESTIMATOR_NAME, "family": f, "tau": t, "n": n, "rep": r,
                "estimate": value, "elapsed_s": elapsed}

    records = _run(tasks, one, threads)
    aggregates = []
    for f in families:
        for t in taus:
            for n in ns:
                est = np.array([rec["estimate"] for rec in records
                                if rec["family"] == f and rec["tau"] == t and rec["n"] == n])
                mean, sd = _mean_sd(est)
                aggregates.append({
                    "estimator": ESTIMATOR_NAME, "family": f, "tau": t, "n": n, "reps": reps,
                    "true_mi": truth[f, t], "mean": mean, "sd": sd,
                    "bias": mean - truth[f, t],
                    "mse": float(np.mean((est - truth[f, t]) ** 2)),
                })
    return StudyReport("simulate-mse", records, aggregates,
                       _base_metadata(seed, config, reps, threads))


def simulate_power(families=STUDY_FAMILIES, taus=DEFAULT_POWER_TAUS, ns=DEFAULT_POWER_NS,
                   reps=DEFAULT_REPS, perms=DEFAULT_HARNESS_PERMS, alpha=0.05, seed=0,
                   config=None, threads=1):
    """Empirical rejection rate of the permutation test per cell.

    The ``tau = 0`` rows estimate the type I error.
    """
    families, taus, ns, reps = _validate_cells(families, taus, ns, reps)
    threads = _check_threads(threads)
    if int(perms) < MIN_PERMUTATIONS:
        raise ConfigError(f"need at least {MIN_PERMUTATIONS} permutations, got {perms}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    config = config or EstimatorConfig()
    tasks = [(f, t, n, r) for f in families for t in taus for n in ns for r in range(reps)]

    def one(task):
        f, t, n, r = task
        data_ss, perm_ss = cell_seed(seed, f, t, n, r).spawn(2)
        data = sample_copula(CopulaSpec(f, t), n, seed=data_ss)
        perm_seed = int(perm_ss.generate_state(1, dtype=np.uint64)[0])
        start = time.perf_counter()
        res = permutation_test(data, r=perms, alpha=alpha, seed=perm_seed, config=config,
                               keep_null=False)
        elapsed = time.perf_counter() - start
        return {"estimator": ESTIMATOR_NAME, "family": f, "tau": t, "n": n, "rep": r,
                "statistic": res.statistic, "p_value": res.p_value, "reject": res.reject,
                "elapsed_s": elapsed}

    records = _run(tasks, one, threads)
    aggregates = []
    for f in families:
        for t in taus:
            for n in ns:
                rej = [rec["reject"] for rec in records
                       if rec["family"] == f and rec["tau"] == t and rec["n"] == n]
                power = float(np.mean(rej))
                aggregates.append({
                    "estimator": ESTIMATOR_NAME, "family": f, "tau": t, "n": n, "reps": reps,
                    "power": power, "se": float(np.sqrt(power * (1 - power) / reps)),
                })
    meta = _base_metadata(seed, config, reps, threads)
    meta.update(alpha=alpha, perms=int(perms))
    return StudyReport("simulate-power", records, aggregates, meta)


def bench_time(ns=DEFAULT_BENCH_NS, reps=10, family="gaussian", tau=0.5, seed=0, config=None):
    """Wall-clock time of :func:`estimate_mi` per sample size.

    Runs single-threaded and times the estimator only. Sampling happens
    before the clock starts. One untimed warm-up call primes the FFT plan
    caches.

    Returns
    -------
    StudyReport
        Aggregates carry ``mean_s`` and ``sd_s``; the metadata holds the
        machine descriptor and ``ratio_5000_1000`` when both sizes ran.
    """
    _, (tau,), ns, reps = _validate_cells((family,), (tau,), ns, reps)
    if reps < MIN_BENCH_REPS:
        raise ConfigError(f"timing needs at least {MIN_BENCH_REPS} reps, got {reps}")
    config = config or EstimatorConfig()
    spec = CopulaSpec(family, tau)
    estimate_mi(sample_copula(spec, ns[0], seed=seed), config=config)
    records = []
    for n in ns:
        for r in range(reps):
            data = sample_copula(spec, n, seed=cell_seed(seed, family, tau, n, r))
            start = time.perf_counter()
            estimate_mi(data, config=config)
            elapsed = time.perf_counter() - start
            records.append({"estimator": ESTIMATOR_NAME, "family": family, "tau": tau,
                            "n": n, "rep": r, "elapsed_s": elapsed})
    aggregates = []
    means = {}
    for n in ns:
        mean, sd = _mean_sd([rec["elapsed_s"] for rec in records if rec["n"] == n])
        means[n] = mean
        aggregates.append({"estimator": ESTIMATOR_NAME, "n": n, "reps": reps,
                           "mean_s": mean, "sd_s": sd})
    meta = _base_metadata(seed, config, reps, 1)
    meta["machine"] = machine_descriptor()
    if 1000 in means and 5000 in means:
        meta["ratio_5000_1000"] = means[5000] / means[1000]
    return StudyReport("bench-time", records, aggregates, meta,
                       timing_fields=("elapsed_s", "mean_s", "sd_s"))
