"""Monte-Carlo subset estimators for normalized correlation functions.

Two complementary estimators operate on random emitter subsets whose mutual
interactions are solved exactly while couplings to unsampled emitters are
dropped:

* the m-wise method averages the full correlation ratio over random
  m-subsets, keeping all single-emitter terms; it systematically
  underestimates and converges to (m-1)/m for independent emitters;
* the pairwise method (m = 2) excludes the same-emitter intensity-squared
  terms from the denominator, systematically overestimates and converges
  to 1 for independent emitters.

Constant offset corrections (+1/m - 1/N and -1/N respectively) remove the
independent-emitter discrepancy while preserving each method's bounding
character.

Determinism contract: every sample's RNG stream is derived from (seed,
sample_index) alone, so per-sample values are reproducible bit for bit
regardless of thread count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import PhotocorrError, SampleFailureError, ValidationError
from .geometry import EmitterArray, ScenarioConfig
from .greens import coeff_matrix_pair, coupling_matrices
from .quantum import build_liouvillian, evolve, inverted_state, steady_state
from .correlations import (
    ReducedCorrelators,
    _a2_parts,
    a2_values_batch,
    emission_rate,
    reduced_correlators,
)

_T4_MAX = 8


@dataclass(frozen=True)
class SamplingConfig:
    """Estimator settings: method, subset size, sample count and seeding."""

    method: str = "m-wise"
    m: int = 6
    samples: int = 1000
    seed: int = 0
    apply_offset: bool = False
    exhaustive: bool = False

    def __post_init__(self):
        if self.method not in ("pairwise", "m-wise"):
            raise ValidationError(f"method must be 'pairwise' or 'm-wise', got {self.method!r}")
        if self.method == "pairwise" and self.m != 2:
            object.__setattr__(self, "m", 2)
        if self.m < 2:
            raise ValidationError(f"sample size m must be >= 2, got {self.m}")
        if self.samples < 1 and not self.exhaustive:
            raise ValidationError("sample count must be positive")

    def check_against(self, n_emitters: int):
        if self.exhaustive:
            if self.m > n_emitters:
                raise ValidationError(f"m = {self.m} exceeds array size N = {n_emitters}")
        elif self.m >= n_emitters:
            raise ValidationError(
                f"random subset size m = {self.m} must satisfy m < N = {n_emitters}"
            )


@dataclass(frozen=True)
class SamplingEstimate:
    """Monte-Carlo estimate with per-sample records and offset bookkeeping."""

    mean: float
    std_error: float
    per_sample_values: np.ndarray
    method: str
    m: int
    samples: int
    seed: int
    offset_applied: float = 0.0


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one sample, a pure function of (seed, index)."""
    entropy = int(seed) & (2**64 - 1)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(index,)))


def draw_sample(n: int, m: int, rng: np.random.Generator) -> tuple:
    """Uniform m-subset of range(n) without replacement, sorted."""
    if not 2 <= m < n:
        raise ValidationError(f"need 2 <= m < N, got m = {m}, N = {n}")
    idx = rng.choice(n, size=m, replace=False)
    return tuple(sorted(int(i) for i in idx))


def _subset_table(n: int, cfg: SamplingConfig) -> np.ndarray:
    """(S, m) index table, random per-sample streams or exhaustive enumeration."""
    if cfg.exhaustive:
        subs = list(combinations(range(n), cfg.m))
        return np.array(subs, dtype=int)
    table = np.empty((cfg.samples, cfg.m), dtype=int)
    for i in range(cfg.samples):
        table[i] = draw_sample(n, cfg.m, sample_rng(cfg.seed, i))
    return table


def dump_samples_csv(path, table: np.ndarray, values: np.ndarray) -> None:
    """Stream per-sample records (sample_index, indices, value) to a CSV."""
    with open(path, "w") as fh:
        fh.write("sample_index,indices,value\n")
        for i, (subset, value) in enumerate(zip(table, values)):
            idx_txt = ";".join(str(int(j)) for j in subset)
            fh.write(f"{i},{idx_txt},{float(value):.17g}\n")


def _finalize(values: np.ndarray, cfg: SamplingConfig, n: int) -> SamplingEstimate:
    values = np.asarray(values, dtype=float)
    s = values.size
    std_err = float(values.std(ddof=1) / np.sqrt(s)) if s > 1 else 0.0
    est = SamplingEstimate(
        mean=float(values.mean()),
        std_error=std_err,
        per_sample_values=values,
        method=cfg.method,
        m=cfg.m,
        samples=s,
        seed=cfg.seed,
        offset_applied=0.0,
    )
    if cfg.apply_offset:
        est = apply_offset(est, n)
    return est


def offset_value(method: str, m: int, n: int) -> float:
    """Independent-emitter discrepancy removed by the offset correction."""
    if method == "pairwise":
        return -1.0 / n
    return 1.0 / m - 1.0 / n


def apply_offset(est: SamplingEstimate, n: int) -> SamplingEstimate:
    """Shift the mean by the method's constant offset; guards idempotence."""
    if est.offset_applied != 0.0:
        raise ValidationError("offset already applied to this estimate")
    off = offset_value(est.method, est.m, n)
    return replace(
        est,
        mean=float(est.per_sample_values.mean()) + off,
        offset_applied=off,
    )


# -- per-sample machinery -----------------------------------------------------


class _ScenarioRealization:
    """One concrete array of a scenario, with full coupling/coefficient data.

    Subset restriction is pure index slicing: both gamma/delta and the
    far-field coefficient entries are pairwise quantities.
    """

    def __init__(self, scenario: ScenarioConfig, array: EmitterArray):
        self.scenario = scenario
        self.array = array
        self.n = array.count
        self.couplings = coupling_matrices(array)
        a, b = coeff_matrix_pair(
            array, scenario.flavor, scenario.detector, couplings=self.couplings
        )
        self.coeff_a = np.asarray(a.entries)
        self.coeff_b = np.asarray(b.entries)
        self.shared_state = (
            scenario.protocol == "inverted-free-decay" and scenario.time == 0.0
        )

    def restricted_state(self, subset) -> "ReducedCorrelators":
        """Exact state of the subset register under the scenario's protocol."""
        idx = np.asarray(subset, dtype=int)
        m = idx.size
        scen = self.scenario
        if self.shared_state:
            return reduced_correlators(inverted_state(m))
        sub_array = self.array.subset(idx)
        sub_coup = self.couplings.restrict(idx)
        if scen.protocol == "inverted-free-decay":
            lio = build_liouvillian(sub_coup, None, sub_array)
            rho = evolve(inverted_state(m), lio, [float(scen.time)])[-1]
        elif scen.protocol == "driven-steady-state":
            lio = build_liouvillian(sub_coup, scen.drive, sub_array)
            rho = steady_state(lio)
        else:  # driven-transient
            lio = build_liouvillian(sub_coup, scen.drive, sub_array)
            rho = evolve(inverted_state(m), lio, [float(scen.time)])[-1]
        return reduced_correlators(rho)

    def coeff_slices(self, table: np.ndarray):
        """(S, m, m) coefficient batches for an (S, m) index table."""
        rows = table[:, :, None]
        cols = table[:, None, :]
        return self.coeff_a[rows, cols], self.coeff_b[rows, cols]


def _sample_values(
    real: _ScenarioRealization,
    table: np.ndarray,
    cross_only: bool,
    threads: int = 1,
) -> np.ndarray:
    """Per-sample correlation values, reduced in sample-index order."""
    n_samples, m = table.shape
    a_batch, b_batch = real.coeff_slices(table)

    if real.shared_state and m <= _T4_MAX:
        corr = real.restricted_state(table[0])
        try:
            return a2_values_batch(corr, a_batch, b_batch, cross_only=cross_only)
        except PhotocorrError as exc:
            raise SampleFailureError(f"sample evaluation failed: {exc}") from exc

    shared_corr = real.restricted_state(table[0]) if real.shared_state else None

    def one(i: int) -> float:
        try:
            corr = shared_corr if shared_corr is not None else real.restricted_state(table[i])
            num, den = _a2_parts(corr, a_batch[i], b_batch[i], cross_only=cross_only)
            if abs(den) < 1e-14:
                raise SampleFailureError(
                    f"zero intensity denominator for subset {tuple(table[i])}",
                    sample_index=i,
                    subset=table[i],
                )
            return float(np.real(num / den))
        except SampleFailureError:
            raise
        except PhotocorrError as exc:
            raise SampleFailureError(
                f"sample {i} with subset {tuple(table[i])} failed: {exc}",
                sample_index=i,
                subset=table[i],
            ) from exc

    if threads <= 1:
        return np.array([one(i) for i in range(n_samples)])
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.array(list(pool.map(one, range(n_samples))))


# -- estimators ---------------------------------------------------------------


def mwise_estimate(
    scenario: ScenarioConfig,
    cfg: SamplingConfig,
    d_over_lambda: Optional[float] = None,
    threads: int = 1,
    samples_csv=None,
) -> SamplingEstimate:
    """m-wise estimate: full correlation ratio on random m-subsets.

    Each sample restricts the array to m emitters, keeps all their mutual
    interactions, prepares the scenario's state exactly on the restricted
    register and evaluates the complete ratio including single-emitter
    terms. ``d_over_lambda`` rebuilds the parametric geometry at that
    separation (defaults to the configured spacing).
    """
    if cfg.method != "m-wise":
        raise ValidationError("mwise_estimate requires an m-wise config")
    array = scenario.geometry.build(d_over_lambda)
    cfg.check_against(array.count)
    real = _ScenarioRealization(scenario, array)
    table = _subset_table(array.count, cfg)
    values = _sample_values(real, table, cross_only=False, threads=threads)
    if samples_csv is not None:
        dump_samples_csv(samples_csv, table, values)
    return _finalize(values, cfg, array.count)


def pairwise_estimate(
    scenario: ScenarioConfig,
    cfg: SamplingConfig,
    d_over_lambda: Optional[float] = None,
    threads: int = 1,
    samples_csv=None,
) -> SamplingEstimate:
    """Pairwise estimate: cross terms only, on random emitter pairs.

    The two-emitter problem is solved exactly (mutual gamma, delta and both
    drive phases); the numerator's same-emitter four-operator terms vanish
    identically for two-level emitters and the denominator drops the
    same-emitter intensity-squared products.
    """
    if cfg.method != "pairwise":
        raise ValidationError("pairwise_estimate requires a pairwise config")
    array = scenario.geometry.build(d_over_lambda)
    cfg.check_against(array.count)
    real = _ScenarioRealization(scenario, array)
    table = _subset_table(array.count, cfg)
    values = _sample_values(real, table, cross_only=True, threads=threads)
    if samples_csv is not None:
        dump_samples_csv(samples_csv, table, values)
    return _finalize(values, cfg, array.count)


def estimate(
    scenario, cfg, d_over_lambda=None, threads: int = 1, samples_csv=None
) -> SamplingEstimate:
    if cfg.method == "pairwise":
        return pairwise_estimate(scenario, cfg, d_over_lambda, threads, samples_csv)
    return mwise_estimate(scenario, cfg, d_over_lambda, threads, samples_csv)


# -- derived analyses ---------------------------------------------------------


def mean_percentage_error(exact, approx) -> float:
    """(100/n) sum |exact - approx| / exact over a shared grid."""
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    if exact.shape != approx.shape:
        raise ValidationError("curves must share the same grid")
    if np.any(exact == 0.0):
        raise ValidationError("exact curve contains zeros; percentage error undefined")
    return float(100.0 * np.mean(np.abs(exact - approx) / np.abs(exact)))


def optimal_method(n: int, m: int) -> str:
    """Which estimator is expected to be more accurate: crossover at N = 2m."""
    if m < 2:
        raise ValidationError("m must be >= 2")
    if n < 2 * m:
        return "m-wise"
    if n > 2 * m:
        return "pairwise"
    return "tie"


@dataclass(frozen=True)
class DistributionSummary:
    values: np.ndarray
    mean: float
    std: float
    counts: np.ndarray
    bin_edges: np.ndarray


def sample_distribution(
    scenario: ScenarioConfig,
    cfg: SamplingConfig,
    d_over_lambda: Optional[float] = None,
    bins: int = 40,
    threads: int = 1,
    samples_csv=None,
) -> DistributionSummary:
    """Histogram and spread of the per-sample values (offset not applied)."""
    raw_cfg = replace(cfg, apply_offset=False)
    est = estimate(scenario, raw_cfg, d_over_lambda, threads, samples_csv)
    vals = est.per_sample_values
    std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    counts, edges = np.histogram(vals, bins=bins)
    return DistributionSummary(
        values=vals, mean=float(vals.mean()), std=std, counts=counts, bin_edges=edges
    )


def mwise_emission_trace(
    scenario: ScenarioConfig,
    cfg: SamplingConfig,
    t_grid,
    d_over_lambda: Optional[float] = None,
    normalization: str = "per-sample",
    threads: int = 1,
):
    """Sampled emission-rate trace R(t) for the undriven inverted protocol.

    normalization "per-sample" averages R_s(t)/R_s(0) over subsets (each
    trace starts at 1); "ensemble" divides the subset-averaged rate by its
    own t = 0 value instead. Returns (mean_trace, std_error_trace).
    """
    if normalization not in ("per-sample", "ensemble"):
        raise ValidationError("normalization must be 'per-sample' or 'ensemble'")
    array = scenario.geometry.build(d_over_lambda)
    cfg.check_against(array.count)
    t_grid = np.asarray(t_grid, dtype=float)
    couplings = coupling_matrices(array)
    table = _subset_table(array.count, cfg)

    def one(i: int) -> np.ndarray:
        idx = table[i]
        sub_array = array.subset(idx)
        sub_coup = couplings.restrict(idx)
        lio = build_liouvillian(sub_coup, None, sub_array)
        m = idx.size
        rho0 = inverted_state(m)
        if t_grid[0] == 0.0:
            states = [rho0] + evolve(rho0, lio, t_grid[1:]) if t_grid.size > 1 else [rho0]
        else:
            states = evolve(rho0, lio, t_grid)
        return np.array([emission_rate(st, sub_coup.gamma) for st in states])

    if threads <= 1:
        traces = np.array([one(i) for i in range(table.shape[0])])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = np.array(list(pool.map(one, range(table.shape[0]))))

    if normalization == "per-sample":
        normed = traces / traces[:, :1]
    else:
        normed = traces / traces[:, :1].mean()
    mean = normed.mean(axis=0)
    if traces.shape[0] > 1:
        std_err = normed.std(axis=0, ddof=1) / np.sqrt(traces.shape[0])
    else:
        std_err = np.zeros_like(mean)
    return mean, std_err
