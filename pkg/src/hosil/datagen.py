"""Seeded synthetic cluster models 1-10 and the univariate samplers they use.

All randomness flows through ``numpy.random.Generator(PCG64)`` seeded from a
``SeedSequence``; a given ``(model, seed, scale)`` always yields the same
dataset. Noncentral variates are assembled from normal, gamma and Poisson
draws rather than numpy's built-in noncentral generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Sampler",
    "DgpSpec",
    "LabeledDataset",
    "generate",
    "make_rng",
    "MODEL_INFO",
    "cluster_sizes",
]


class SamplerError(ValueError):
    pass


def make_rng(*key: int) -> np.random.Generator:
    """PCG64 generator seeded from the integer tuple ``key``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


def _positive(name, *vals):
    for v in vals:
        if not (math.isfinite(v) and v > 0):
            raise SamplerError(f"{name}: parameters must be finite and > 0, got {vals}")


def _chisq(rng, df, size):
    return 2.0 * rng.standard_gamma(df / 2.0, size)


def _nc_chisq(rng, df, ncp, size):
    if ncp == 0:
        return _chisq(rng, df, size)
    if df > 1:
        z = rng.standard_normal(size) + math.sqrt(ncp)
        return _chisq(rng, df - 1, size) + z * z
    # Poisson mixture of central chi-squares
    j = rng.poisson(ncp / 2.0, size)
    return 2.0 * rng.standard_gamma(df / 2.0 + j)


@dataclass(frozen=True)
class Sampler:
    """A univariate distribution with fixed parameters.

    ``kind`` is one of ``normal(mean, sd)``, ``skewnormal(loc, scale, shape,
    tau)``, ``uniform(a, b)``, ``nct(df, ncp)``, ``ncchisq(df, ncp)``,
    ``ncf(df1, df2, ncp)``, ``gamma(shape, rate)``, ``weibull(shape, scale)``,
    ``exponential(rate)``, ``ncbeta(a, b, ncp)``.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        p = self.params
        k = self.kind
        if k == "normal":
            _positive(k, p[1])
        elif k == "skewnormal":
            _positive(k, p[1])
        elif k == "uniform":
            if not p[0] < p[1]:
                raise SamplerError("uniform: need a < b")
        elif k == "nct":
            _positive(k, p[0])
        elif k == "ncchisq":
            _positive(k, p[0])
            if p[1] < 0:
                raise SamplerError("ncchisq: ncp must be >= 0")
        elif k == "ncf":
            _positive(k, p[0], p[1])
            if p[2] < 0:
                raise SamplerError("ncf: ncp must be >= 0")
        elif k in ("gamma", "weibull", "ncbeta"):
            _positive(k, *p[:2])
            if k == "ncbeta" and p[2] < 0:
                raise SamplerError("ncbeta: ncp must be >= 0")
        elif k == "exponential":
            _positive(k, p[0])
        else:
            raise SamplerError(f"unknown sampler {k!r}")

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        p, k = self.params, self.kind
        if k == "normal":
            return p[0] + p[1] * rng.standard_normal(count)
        if k == "uniform":
            return p[0] + (p[1] - p[0]) * rng.random(count)
        if k == "nct":
            df, ncp = p
            return (rng.standard_normal(count) + ncp) / np.sqrt(_chisq(rng, df, count) / df)
        if k == "ncchisq":
            return _nc_chisq(rng, p[0], p[1], count)
        if k == "ncf":
            df1, df2, ncp = p
            return (_nc_chisq(rng, df1, ncp, count) / df1) / (_chisq(rng, df2, count) / df2)
        if k == "gamma":
            return rng.standard_gamma(p[0], count) / p[1]
        if k == "weibull":
            return p[1] * rng.weibull(p[0], count)
        if k == "exponential":
            return rng.standard_exponential(count) / p[0]
        if k == "ncbeta":
            a, b, ncp = p
            x = _nc_chisq(rng, 2 * a, ncp, count)
            y = _chisq(rng, 2 * b, count)
            return x / (x + y)
        # extended skew-normal: X = loc + scale * U1 given U0 > -tau,
        # where (U0, U1) is standard bivariate normal with correlation delta
        loc, scale, shape, tau = p
        delta = shape / math.sqrt(1 + shape * shape)
        lo = ndtr(-tau)
        u0 = ndtri(lo + (1 - lo) * rng.random(count))
        u1 = delta * u0 + math.sqrt(1 - delta * delta) * rng.standard_normal(count)
        return loc + scale * u1


def _indep(*samplers: Sampler) -> Callable:
    def draw(rng, m):
        return np.column_stack([s.sample(m, rng) for s in samplers])

    return draw


def _same(sampler: Sampler, p: int) -> Callable:
    return _indep(*([sampler] * p))


def _gauss(mean: Sequence[float], spread: Sequence[float]) -> Callable:
    """Independent Gaussian coordinates; ``spread`` is the per-coordinate standard deviation."""
    mean = np.asarray(mean, dtype=float)
    sd = np.broadcast_to(np.asarray(spread, dtype=float), mean.shape)

    def draw(rng, m):
        return mean + sd * rng.standard_normal((m, mean.size))

    return draw


def _circle(p: int) -> Callable:
    def draw(rng, m):
        theta = 2 * np.pi * rng.random(m)
        out = np.zeros((m, p))
        out[:, 0] = np.cos(theta)
        out[:, 1] = np.sin(theta)
        return out

    return draw


N, U, T, CHI, F = "normal", "uniform", "nct", "ncchisq", "ncf"


def _model_clusters(model: int, rng: np.random.Generator):
    """(size, draw) per cluster at full scale.

    The dispersion listed for each Gaussian cluster (``0.1`` in ``0.1 I``, the
    diagonal entries otherwise) is used as a per-coordinate standard deviation.
    """
    S = Sampler
    if model == 1:
        return [(100, _gauss((0, 5), 1.0)), (100, _same(S(U, (-10, 1)), 2))]
    if model == 2:
        return [
            (50, _gauss((0, 5), 0.1)),
            (100, _gauss((0.5, 5.5), 0.2)),
            (50, _indep(S(T, (25, 5)), S(T, (25, 10)))),
        ]
    if model == 3:
        return [(50, _gauss((-2, 5), 0.1)), (50, _gauss((2, 5), 0.1)), (100, _gauss((0, 5), 0.5))]
    if model == 4:
        return [
            (50, _gauss((0, 5), 0.5)),
            (50, _gauss((1.5, 5), (0.1, 0.7))),
            (50, _gauss((1.5, 7), 0.1)),
        ]
    if model == 5:
        return [
            (50, _indep(S(T, (7, 10)), S(T, (7, 30)))),
            (50, _same(S(U, (10, 15)), 2)),
            (50, _gauss((2, 2), 1.0)),
            (50, _gauss((20, 80), (0.1, 2))),
        ]
    if model == 6:
        return [
            (50, _indep(S(CHI, (7, 50)), S(CHI, (10, 80)))),
            (50, _indep(S(F, (2, 6, 4)), S(F, (5, 5, 4)))),
            (50, _indep(S(T, (40, 100)), S(T, (35, 150)))),
            (50, _gauss((100, 0), 0.9)),
            (50, _indep(S("skewnormal", (20, 0.9, 2, 4)), S("skewnormal", (200, 0.8, 3, 6)))),
        ]
    if model == 7:
        return [
            (50, _same(S(U, (-6, -2)), 2)),
            (50, _same(S("exponential", (10,)), 2)),
            (50, _same(S("ncbeta", (2, 3, 120)), 2)),
            (50, _same(S("weibull", (10, 4)), 2)),
            (50, _same(S("gamma", (15, 2)), 2)),
            (50, _indep(S("skewnormal", (5, 0.6, 4, 5)), S("skewnormal", (0, 0.6, 4, 5)))),
        ]
    if model == 8:
        tall, small = (0.1, 0.7), 0.1
        out = [(25, _gauss((0, 2), 0.5)), (25, _gauss((0, -2), 0.5))]
        out += [(25, _gauss((x, -2), tall)) for x in (-4, -3, -2, 2, 3, 4)]
        out += [(25, _gauss((x, 2), small)) for x in (-4, -3, -2, 2, 3, 4)]
        return out
    if model == 9:
        s3, s4 = (0.6, 0.8, 0.6), (0.4, 0.3, 0.4)
        return [
            (33, _circle(3)),
            (25, _gauss((-7, -0.2, -0.2), 0.1)),
            (25, _gauss((0.2, -4, -4), 0.1)),
            (25, _gauss((0.5, 3, 3), 0.1)),
            (25, _gauss((7, -1, -1), 0.1)),
            (25, _gauss((-5.5, 2.5, 2.5), s3)),
            (25, _gauss((4.5, -3, -3), s3)),
            (25, _gauss((-4, -2.5, -2.5), s4)),
            (25, _gauss((5, 1.5, 1.5), s4)),
        ]
    if model == 10:
        centres = (-21, -18, -15, -9, -6, 6, 9, 15, 18, 21)
        sizes = rng.permutation([20, 40, 60, 70] + [50] * 6)
        spreads = rng.choice([0.05, 0.1, 0.15, 0.175, 0.2], size=10, replace=True)
        return [
            (int(m), _gauss(np.full(100, c, dtype=float), v))
            for m, c, v in zip(sizes, centres, spreads)
        ]
    raise SamplerError(f"unknown model {model}; expected 1..10")


MODEL_INFO = {
    1: {"k": 2, "p": 2, "n": 200},
    2: {"k": 3, "p": 2, "n": 200},
    3: {"k": 3, "p": 2, "n": 200},
    4: {"k": 3, "p": 2, "n": 150},
    5: {"k": 4, "p": 2, "n": 200},
    6: {"k": 5, "p": 2, "n": 250},
    7: {"k": 6, "p": 2, "n": 300},
    8: {"k": 14, "p": 2, "n": 350},
    9: {"k": 9, "p": 3, "n": 233},
    10: {"k": 10, "p": 100, "n": 490},
}


@dataclass(frozen=True)
class DgpSpec:
    model: int
    seed: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.model not in MODEL_INFO:
            raise SamplerError(f"unknown model {self.model}; expected 1..10")
        if not self.scale > 0:
            raise SamplerError("scale must be > 0")


@dataclass
class LabeledDataset:
    data: np.ndarray
    truth: np.ndarray
    model: int
    sizes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def k(self) -> int:
        return len(self.sizes)


def cluster_sizes(full: Sequence[int], scale: float) -> list[int]:
    """Per-cluster sizes multiplied by ``scale``, rounded, at least 2."""
    if scale == 1.0:
        return [int(m) for m in full]
    return [max(2, int(math.floor(m * scale + 0.5))) for m in full]


def generate(spec: DgpSpec) -> LabeledDataset:
    """Draw one dataset; truth labels number the clusters in model order."""
    rng = make_rng(spec.seed)
    clusters = _model_clusters(spec.model, rng)
    sizes = cluster_sizes([m for m, _ in clusters], spec.scale)
    blocks, truth = [], []
    for r, ((_, draw), m) in enumerate(zip(clusters, sizes), start=1):
        blocks.append(draw(rng, m))
        truth.append(np.full(m, r, dtype=np.int64))
    meta = {"model": spec.model, "seed": spec.seed, "scale": spec.scale, "sizes": sizes}
    return LabeledDataset(np.vstack(blocks), np.concatenate(truth), spec.model, sizes, meta)
