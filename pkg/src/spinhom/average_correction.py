"""Sparse exact correction of the discrete average of a spin field.

Given a field whose average is eta-close to a target z with |z| < 1, pick
P = floor(eta * n / c) + 1 disjoint pairs of non-aligned spins (inner
product <= 1 - b), and overwrite those 2P spins with unit vectors summing to
exactly what the average needs.  The compatibility condition
sqrt(4 - 2b) < 2 - c guarantees the residual fits in the ball of radius 2P.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    InvalidParams,
    NotEnoughDiscord,
    TargetOnSphere,
    WNormTooLarge,
)
from .lattice import SpinField
from .sphere_geom import decompose_into_unit_sum, random_units

log = logging.getLogger(__name__)

EXACT_TOL = 1e-12
SPHERE_TOL = 1e-12
B_CAP = 0.49
GREEDY_WINDOW = 64


@dataclass(frozen=True)
class CorrectionParams:
    b: float
    c: float

    def __post_init__(self):
        if not 0.0 < self.b < 0.5:
            raise InvalidParams(f"b must lie in (0, 1/2), got {self.b}")
        if self.c <= 0.0:
            raise InvalidParams(f"c must be positive, got {self.c}")
        if not math.sqrt(4.0 - 2.0 * self.b) < 2.0 - self.c:
            raise InvalidParams(f"need sqrt(4 - 2b) < 2 - c; got b = {self.b}, c = {self.c}")

    @staticmethod
    def c_limit(b: float) -> float:
        """Supremum of admissible c for a given b."""
        return 2.0 - math.sqrt(4.0 - 2.0 * b)

    @classmethod
    def auto(cls, avg_norm: float, target_norm: float) -> "CorrectionParams":
        b = min((1.0 - avg_norm) / 2.0, (1.0 - target_norm) / 2.0, B_CAP)
        if b <= 0.0:
            raise NotEnoughDiscord("field average has modulus 1: every spin is aligned")
        return cls(b, cls.c_limit(b) / 2.0)


@dataclass
class CorrectionReport:
    eta: float
    b: float | None
    c: float | None
    P: int
    pairs: list[tuple[int, int]] = field(default_factory=list)
    replacements: np.ndarray | None = None
    w: np.ndarray | None = None
    target: np.ndarray | None = None
    retried: bool = False

    @property
    def modified_nodes(self) -> list[int]:
        return [i for pair in self.pairs for i in pair]

    def to_json(self, field_: SpinField | None = None) -> dict:
        def label(i):
            if field_ is None:
                return int(i)
            return field_.domain.indices()[i].tolist()

        reps = [] if self.replacements is None else self.replacements.tolist()
        return {
            "eta": self.eta,
            "b": self.b,
            "c": self.c,
            "P": self.P,
            "retried": self.retried,
            "target": None if self.target is None else self.target.tolist(),
            "w": None if self.w is None else self.w.tolist(),
            "pairs": [[label(i), label(l)] for i, l in self.pairs],
            "modified_nodes": [label(i) for i in self.modified_nodes],
            "replacements": [
                {"node": label(i), "value": v} for i, v in zip(self.modified_nodes, reps)
            ],
        }


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, SpinField) else np.asarray(f, dtype=float)


def select_discordant_pairs(f, b: float, count: int) -> list[tuple[int, int]]:
    """Greedy disjoint pairs (i, l), i < l in node order, with (u_i, u_l) <= 1 - b.

    Raises NotEnoughDiscord when fewer than ``count`` pairs are found.
    """
    U = _values(f)
    n = U.shape[0]
    threshold = 1.0 - b
    free = np.ones(n, dtype=bool)
    pairs: list[tuple[int, int]] = []
    for i in range(n):
        if len(pairs) >= count:
            break
        if not free[i]:
            continue
        # look at a short window first; the first hit is the same either way
        for stop in (min(n, i + 1 + GREEDY_WINDOW), n):
            ok = (U[i + 1 : stop] @ U[i] <= threshold) & free[i + 1 : stop]
            hit = np.flatnonzero(ok)
            if hit.size:
                l = i + 1 + int(hit[0])
                free[i] = free[l] = False
                pairs.append((i, l))
                break
    if len(pairs) < count:
        raise NotEnoughDiscord(f"found {len(pairs)} discordant pairs, need {count}")
    return pairs


def correct_values(U: np.ndarray, z, params: CorrectionParams | None = None):
    """Array-level correction; returns (new_values, report).  The input is not modified."""
    U = np.asarray(U, dtype=float)
    z = np.asarray(z, dtype=float).reshape(-1)
    n = U.shape[0]
    total = U.sum(axis=0)
    eta = float(np.linalg.norm(total - n * z)) / n
    if eta <= EXACT_TOL:
        return U.copy(), CorrectionReport(eta, None, None, 0, target=z)
    if float(np.linalg.norm(z)) >= 1.0 - SPHERE_TOL:
        raise TargetOnSphere(
            f"|z| = {np.linalg.norm(z)!r}: every node would have to change"
        )

    avg_norm = float(np.linalg.norm(total)) / n
    auto = params is None
    if auto:
        params = CorrectionParams.auto(avg_norm, float(np.linalg.norm(z)))
    elif avg_norm > 1.0 - 2.0 * params.b + EXACT_TOL:
        raise InvalidParams(f"|average| = {avg_norm} exceeds 1 - 2b = {1 - 2 * params.b}")
    b = params.b
    # auto mode gets one retry with c just under its admissible limit, halving P
    cs = [params.c]
    if auto:
        cs.append(CorrectionParams.c_limit(b) * (1.0 - 1e-6))

    last: Exception | None = None
    for attempt, c in enumerate(cs):
        P = math.floor(eta * n / c) + 1
        if 2 * P > n:
            last = NotEnoughDiscord(f"2P = {2 * P} exceeds the {n} available nodes")
            continue
        try:
            pairs = select_discordant_pairs(U, b, P)
        except NotEnoughDiscord as exc:
            last = exc
            continue
        break
    else:
        raise last

    ii = np.array([p[0] for p in pairs])
    ll = np.array([p[1] for p in pairs])
    w = total - n * z - U[ii].sum(axis=0) - U[ll].sum(axis=0)
    wn = float(np.linalg.norm(w))
    if not wn < 2 * P:
        raise WNormTooLarge(f"|w| = {wn} >= 2P = {2 * P}")
    reps = decompose_into_unit_sum(-w, 2 * P)
    out = U.copy()
    nodes = np.ravel(np.column_stack([ii, ll]))
    out[nodes] = reps
    report = CorrectionReport(eta, b, c, P, pairs, reps, w, z, retried=attempt > 0)
    return out, report


def correct_average(f: SpinField, z, params: CorrectionParams | None = None):
    """Return (corrected field, report) with discrete average exactly z."""
    U, report = correct_values(f.values, z, params)
    return f.with_values(U), report


def iid_uniform(N: int) -> Callable[[int, np.random.Generator], np.ndarray]:
    def gen(n, rng):
        return random_units(n, N, rng)

    return gen


def iid_two_point(z) -> Callable[[int, np.random.Generator], np.ndarray]:
    """i.i.d. spins z +- sqrt(1 - |z|^2) e_perp with equal probability (mean exactly z)."""
    from .sphere_geom import canonical_orthogonal

    z = np.asarray(z, dtype=float)
    h = math.sqrt(max(0.0, 1.0 - float(z @ z)))
    e = canonical_orthogonal(z)
    plus, minus = z + h * e, z - h * e

    def gen(n, rng):
        pick = rng.random(n) < 0.5
        return np.where(pick[:, None], plus, minus)

    return gen


def sparsity_curve(generator, z, sizes, seed: int = 0, replicates: int = 1,
                   strict: bool = True) -> list[tuple[int, float]]:
    """Fraction of nodes the correction touches, as a function of lattice size.

    Each size is averaged over ``replicates`` independent fields.  With
    ``strict=False`` fields outside the correction's regime (too few
    discordant pairs, typical at small sizes) are skipped and logged; a size
    with no successful replicate is dropped.
    """
    out = []
    for size in sizes:
        size = int(size)
        fracs = []
        for r in range(replicates):
            rng = np.random.default_rng([seed, size, r])
            U = generator(size, rng)
            try:
                V, _ = correct_values(U, z)
            except NotEnoughDiscord:
                if strict:
                    raise
                continue
            fracs.append(int(np.any(V != U, axis=1).sum()) / size)
        if len(fracs) < replicates:
            log.info("size %d: %d of %d fields outside the correction regime",
                     size, replicates - len(fracs), replicates)
        if fracs:
            out.append((size, float(np.mean(fracs))))
    return out


def loglog_slope(curve) -> float:
    """Least-squares slope of log(fraction) against log(size)."""
    x = np.log([s for s, _ in curve])
    y = np.log([f for _, f in curve])
    return float(np.polyfit(x, y, 1)[0])
