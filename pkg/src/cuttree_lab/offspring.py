"""Critical offspring distributions and their scaling sequences.

Three families are supported:

* ``geometric``      nu(k) = 2^-(k+1), k >= 0   (mean 1, variance 2)
* ``power_tail``     nu(k) = k^-(alpha+1) / zeta(alpha) for k >= 1 and
                     nu(0) = 1 - zeta(alpha+1)/zeta(alpha), alpha in (1, 2)
                     (mean 1, infinite variance)
* ``custom``         a user-supplied finite pmf, validated for criticality

All pmf and tail values come from closed forms (Hurwitz zeta for the power
tail), not from truncated sums, so downstream exact checks can rely on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .errors import DomainError, InputError

_CRITICALITY_TOL = 1e-9
# Cached inverse-CDF table sizes.  Values beyond the table are drawn by exact
# tail continuation, so these only affect speed, not correctness.
_GEOMETRIC_CACHE = 64
_POWER_TAIL_CACHE = 1 << 20


class OffspringModel:
    """A critical offspring law with exact pmf, tail, and a fast sampler.

    Instances are plain data (picklable) so experiments can ship them to
    worker processes.  Use the ``make_*`` factories rather than calling the
    constructor directly.
    """

    def __init__(self, label, kind, probs_table, *, alpha=None, mean=1.0,
                 variance=None, support_cap=None):
        self.label = label
        self.kind = kind  # "geometric" | "power_tail" | "custom"
        self.alpha = alpha
        self.mean = float(mean)
        self.variance = variance
        self.support_cap = support_cap  # None = unbounded support
        self._probs = np.asarray(probs_table, dtype=float)
        # CDF from the closed-form tail where available, to avoid cumsum drift.
        ks = np.arange(len(self._probs))
        self._cdf = 1.0 - self._tail_array(ks)

    # -- exact pmf / tails ------------------------------------------------

    def pmf(self, k):
        """P(Z = k); accepts scalars or integer arrays."""
        k = np.asarray(k)
        if self.kind == "geometric":
            out = np.where(k >= 0, np.exp2(-(k.astype(float) + 1.0)), 0.0)
        elif self.kind == "power_tail":
            a = self.alpha
            nu0 = 1.0 - zeta(a + 1.0, 1.0) / zeta(a, 1.0)
            kf = k.astype(float)
            with np.errstate(divide="ignore", invalid="ignore"):
                body = np.where(k >= 1, kf ** -(a + 1.0) / zeta(a, 1.0), 0.0)
            out = np.where(k == 0, nu0, body)
        else:
            out = np.where((k >= 0) & (k < len(self._probs)),
                           self._probs[np.clip(k, 0, len(self._probs) - 1)], 0.0)
        return out if out.ndim else float(out)

    def _tail_array(self, r):
        """P(Z > r) for an integer array r >= -1, via closed forms."""
        r = np.asarray(r, dtype=float)
        if self.kind == "geometric":
            out = np.exp2(-(r + 1.0))
        elif self.kind == "power_tail":
            a = self.alpha
            # P(Z > r) = zeta(alpha+1, r+1) / zeta(alpha) for r >= 0
            out = zeta(a + 1.0, np.maximum(r, 0.0) + 1.0) / zeta(a, 1.0)
        else:
            csum = np.concatenate([[0.0], np.cumsum(self._probs)])
            idx = np.clip(r.astype(int) + 1, 0, len(self._probs)).astype(int)
            out = 1.0 - csum[idx]
        return np.where(r < 0, 1.0, np.maximum(out, 0.0))

    def tail(self, r):
        """P(Z > r) exactly."""
        out = self._tail_array(np.asarray(r))
        return out if out.ndim else float(out)

    def size_biased_pmf(self, r):
        """The size-biased law nu_hat(r) = r * nu(r), defined for r >= 1."""
        r_arr = np.asarray(r)
        if np.any(r_arr < 1):
            raise DomainError("size-biased pmf is supported on r >= 1")
        out = r_arr * np.asarray(self.pmf(r_arr))
        return out if out.ndim else float(out)

    def size_biased_tail(self, r):
        """P(Z_hat > r) = sum_{s > r} s * nu(s), exactly."""
        r = int(r)
        if self.kind == "geometric":
            # sum_{s>r} s 2^-(s+1) = (r+2) 2^-(r+1)
            return (r + 2) * 2.0 ** -(r + 1)
        if self.kind == "power_tail":
            return float(zeta(self.alpha, r + 1.0) / zeta(self.alpha, 1.0))
        ks = np.arange(len(self._probs))
        return float(np.sum(ks[ks > r] * self._probs[ks > r]))

    # -- structural properties --------------------------------------------

    @property
    def period(self) -> int:
        """gcd of the positive support; 1 means aperiodic."""
        if self.kind in ("geometric", "power_tail"):
            return 1
        g = 0
        for k, p in enumerate(self._probs):
            if k >= 1 and p > 0:
                g = math.gcd(g, k)
        return g if g else 1

    def hypothesis_h_sup(self, r_max: int = 10 ** 5) -> float:
        """sup over 1 <= r <= r_max of r * nu_hat(r) / P(Z_hat > r).

        A finite value over a long range is the numeric proxy for the
        regularity condition used by the heavy-tail limit theorems.
        """
        sup = 0.0
        for r in range(1, r_max + 1):
            if self.support_cap is not None and r > self.support_cap:
                break
            num = r * float(self.size_biased_pmf(r))
            den = self.size_biased_tail(r)
            if den <= 0.0:
                break
            sup = max(sup, num / den)
        return sup

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from nu by inverse CDF with exact tail continuation."""
        scalar = size is None
        u = rng.random(1 if scalar else size)
        z = np.searchsorted(self._cdf, u, side="right").astype(np.int64)
        over = np.nonzero(z >= len(self._cdf))[0]
        for idx in over:
            z[idx] = self._sample_tail(u.flat[idx])
        return int(z[0]) if scalar else z

    def sample_batch_capped(self, rng: np.random.Generator, shape, cap: int):
        """Draw a batch; any value exceeding ``cap`` is reported as cap + 1.

        Exact for rejection sampling that only accepts values <= cap: the
        sentinel collapses the (irrelevant) upper tail without bias.
        """
        return self.capped_from_uniform(rng.random(shape), cap)

    def capped_from_uniform(self, u, cap: int):
        """Map uniforms to capped offspring values (see sample_batch_capped)."""
        # Values above cap collapse to the sentinel, so only the head of the
        # CDF table matters; searching it keeps the lookup cache-resident.
        k = min(cap + 1, len(self._cdf))
        z = np.searchsorted(self._cdf[:k], u, side="right").astype(np.int64)
        if k <= cap:
            # Table shorter than the cap: finish the (rare) over-table draws
            # by exact tail continuation.
            for idx in zip(*np.nonzero(z == k)):
                z[idx] = self._sample_tail(u[idx])
        np.minimum(z, cap + 1, out=z)
        return z

    def _sample_tail(self, u: float) -> int:
        k = len(self._cdf)  # first value past the cache
        acc = self._cdf[-1]
        while True:
            acc += float(self.pmf(k))
            if acc > u or acc >= 1.0:
                return k
            k += 1

    def __repr__(self):
        return f"OffspringModel({self.label!r})"


def make_geometric_critical() -> OffspringModel:
    """Geometric(1/2) offspring on {0, 1, ...}: critical, variance 2."""
    ks = np.arange(_GEOMETRIC_CACHE)
    return OffspringModel("geometric", "geometric", np.exp2(-(ks + 1.0)),
                          mean=1.0, variance=2.0)


def make_power_tail_critical(alpha: float) -> OffspringModel:
    """Critical power-tail offspring with exponent alpha in (1, 2)."""
    if not (1.0 < alpha < 2.0):
        raise DomainError(f"alpha must lie in (1, 2), got {alpha}")
    za = zeta(alpha, 1.0)
    ks = np.arange(1, _POWER_TAIL_CACHE)
    probs = np.empty(_POWER_TAIL_CACHE)
    probs[0] = 1.0 - zeta(alpha + 1.0, 1.0) / za
    probs[1:] = ks ** -(alpha + 1.0) / za
    return OffspringModel(f"power_tail(alpha={alpha})", "power_tail", probs,
                          alpha=float(alpha), mean=1.0, variance=math.inf)


def make_custom_critical(pmf: dict, label: str = "custom") -> OffspringModel:
    """Validate and wrap a user-supplied finite pmf.

    Requires: probabilities in [0, 1] summing to 1, mean offspring exactly 1
    (within 1e-9), and nu(0) > 0.  Lattice laws (period >= 2) are accepted;
    callers that need aperiodicity should check ``model.period``.
    """
    if not pmf:
        raise InputError("empty pmf")
    ks = sorted(int(k) for k in pmf)
    if ks[0] < 0:
        raise InputError("offspring counts must be non-negative")
    cap = ks[-1]
    probs = np.zeros(cap + 1)
    for k in ks:
        p = float(pmf[k])
        if not (0.0 <= p <= 1.0):
            raise InputError(f"pmf value out of range at k={k}: {p}")
        probs[int(k)] = p
    total = probs.sum()
    if abs(total - 1.0) > _CRITICALITY_TOL:
        raise InputError(f"pmf sums to {total}, expected 1")
    mean = float(np.arange(cap + 1) @ probs)
    if abs(mean - 1.0) > _CRITICALITY_TOL:
        raise InputError(f"offspring mean is {mean}, expected 1 (criticality)")
    if probs[0] <= 0.0:
        raise InputError("nu(0) must be positive")
    var = float((np.arange(cap + 1) ** 2) @ probs - mean ** 2)
    return OffspringModel(label, "custom", probs, mean=mean, variance=var,
                          support_cap=cap)


def moments(model: OffspringModel):
    """Return (mean, variance); variance is inf for the power-tail family."""
    return model.mean, model.variance


@dataclass
class ScalingSequence:
    """The normalising sequence a_n attached to an offspring model.

    finite-variance models:  a_n = sigma * sqrt(n)
    power-tail models:       a_n = min{ r >= 1 : P(Z - 1 > r) <= 1/n },
                             found by monotone bisection on the exact tail.
    """
    kind: str  # "finite_variance" | "tail_inversion"
    sigma: float | None
    model: OffspringModel

    def evaluate(self, n: int) -> float:
        if n < 1:
            raise DomainError("n must be >= 1")
        if self.kind == "finite_variance":
            return self.sigma * math.sqrt(n)
        target = 1.0 / n
        if self.model.tail(2) <= target:
            return 1.0
        lo, hi = 1, 2
        while self.model.tail(hi + 1) > target:
            lo, hi = hi, hi * 2
        # invariant: tail(lo+1) > target >= tail(hi+1)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.model.tail(mid + 1) > target:
                lo = mid
            else:
                hi = mid
        return float(hi)

    def __call__(self, n: int) -> float:
        return self.evaluate(n)


def scaling_sequence(model: OffspringModel) -> ScalingSequence:
    """Build the scaling sequence appropriate for the model."""
    if model.variance is not None and math.isfinite(model.variance):
        return ScalingSequence("finite_variance", math.sqrt(model.variance), model)
    return ScalingSequence("tail_inversion", None, model)


def model_from_config(config: dict) -> OffspringModel:
    """Instantiate a model from a config mapping.

    Accepted forms: {"model": "geometric"},
    {"model": "power_tail", "alpha": a} with a in (1, 2), and
    {"model": "custom", "pmf": {k: p, ...}}.
    """
    if "model" not in config:
        raise InputError("config missing 'model'")
    name = config["model"]
    if name == "geometric":
        return make_geometric_critical()
    if name == "power_tail":
        if "alpha" not in config:
            raise InputError("power_tail config requires 'alpha'")
        return make_power_tail_critical(float(config["alpha"]))
    if name == "custom":
        if "pmf" not in config:
            raise InputError("custom config requires 'pmf'")
        pmf = {int(k): float(v) for k, v in config["pmf"].items()}
        return make_custom_critical(pmf)
    raise InputError(f"unknown model {name!r}")
