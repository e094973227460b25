"""Expected measurement depth of many parallel repeat-until-success rotations.

One RUS stage runs ``parallel`` teleportations at once; each succeeds with
probability 1/2 per round and the stage ends when all have succeeded, so its
depth ``X`` has CDF ``(1 - 2^-k)^parallel``.  A circuit copy runs ``stages``
such stages back to back (``Y = X_1 + ... + X_stages``) and the algorithm
waits for the slowest of ``copies`` circuit copies (``Z = max Y_i``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_TRUNCATION = 200
TAIL_TOL = 1e-12
RNG_ALGORITHM = "numpy.Philox4x64-10/SeedSequence"


def depth_cdf_parallel(parallel: int, k) -> float:
    """P(all ``parallel`` rotations succeed within ``k`` rounds)."""
    if parallel < 1:
        raise ValueError("parallel must be at least 1")
    k = np.asarray(k, dtype=float)
    out = np.where(k <= 0, 0.0, (-np.expm1(-k * math.log(2))) ** parallel)
    return float(out) if out.ndim == 0 else out


@dataclass
class DepthDistribution:
    """pmf over depths ``0..len(pmf)-1`` with the probability mass cut off beyond."""

    pmf: np.ndarray
    tail: float

    def survival(self) -> np.ndarray:
        """``P(depth > k)`` for each ``k`` in the support."""
        rev = np.cumsum(self.pmf[::-1])[::-1]
        return np.append(rev[1:], 0.0) + self.tail

    def mean(self) -> float:
        return float(np.dot(np.arange(self.pmf.size), self.pmf))


def stage_distribution(parallel: int, truncation: int = DEFAULT_TRUNCATION) -> DepthDistribution:
    k = np.arange(truncation + 1)
    cdf = depth_cdf_parallel(parallel, k)
    pmf = np.diff(cdf, prepend=0.0)
    # 1 - F(K) computed without cancellation
    tail = -math.expm1(parallel * math.log1p(-(2.0 ** -truncation)))
    return DepthDistribution(pmf, tail)


def sum_distribution(stage: DepthDistribution, stages: int) -> DepthDistribution:
    pmf = np.array([1.0])
    for _ in range(stages):
        pmf = np.convolve(pmf, stage.pmf)
    # lost mass is at most stages * stage tail (union bound)
    return DepthDistribution(pmf, stages * stage.tail)


def exact_expected_max(parallel: int, stages: int, copies: int,
                       truncation: int = DEFAULT_TRUNCATION) -> float:
    """``E[max of copies]`` of the ``stages``-fold sum, by convolution.

    The per-stage support is doubled until the neglected tail mass is
    below 1e-12.
    """
    if min(parallel, stages, copies) < 1:
        raise ValueError("parallel, stages and copies must be at least 1")
    while True:
        dist = sum_distribution(stage_distribution(parallel, truncation), stages)
        if copies * dist.tail < TAIL_TOL and dist.survival()[-1] * copies < TAIL_TOL:
            break
        truncation *= 2
    surv = np.clip(dist.survival(), 0.0, 1.0)
    # 1 - F_Z = 1 - (1 - S_Y)^copies, kept accurate for tiny S_Y
    with np.errstate(divide="ignore"):
        z_surv = np.where(surv >= 1.0, 1.0, -np.expm1(copies * np.log1p(-surv)))
    return float(z_surv.sum())


@dataclass
class MCResult:
    estimate: float
    stderr: float
    samples: int
    seed: int
    parallel: int
    stages: int
    copies: int
    rng: str = RNG_ALGORITHM

    def to_dict(self, exact: float | None = None) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exact": exact,
            "samples": self.samples,
            "seed": self.seed,
            "rng": self.rng,
            "parameters": {"parallel": self.parallel, "stages": self.stages,
                           "copies": self.copies},
        }

    def to_json(self, exact: float | None = None) -> str:
        return json.dumps(self.to_dict(exact))


def _sample_chunk(rng: np.random.Generator, size: int, parallel: int, stages: int,
                  copies: int) -> np.ndarray:
    # literal coin tossing: every rotation's round of first success
    rounds = rng.geometric(0.5, size=(size, copies, stages, parallel))
    return rounds.max(axis=3).sum(axis=2).max(axis=1)


def mc_expected_max(parallel: int, stages: int, copies: int, samples: int, seed: int,
                    chunk: int = 2000) -> MCResult:
    """Monte Carlo estimate of ``E[Z]`` with its standard error.

    Chunks draw from independent Philox streams spawned from ``seed``, so
    the result depends only on ``(seed, samples, chunk)``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    nchunks = -(-samples // chunk)
    streams = np.random.SeedSequence(seed).spawn(nchunks)
    values = []
    for i, ss in enumerate(streams):
        size = min(chunk, samples - i * chunk)
        values.append(_sample_chunk(np.random.Generator(np.random.Philox(ss)), size,
                                    parallel, stages, copies))
    z = np.concatenate(values).astype(float)
    stderr = float(z.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return MCResult(float(z.mean()), stderr, samples, seed, parallel, stages, copies)
