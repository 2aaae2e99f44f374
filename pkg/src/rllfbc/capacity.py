"""Feedback-capacity optimization for the (d,inf)-RLL input-constrained BEC.

The central object is the rate function over the simplex
Delta_d = {delta in [0,1]^{d+1} : sum delta_i <= 1}:

    R(delta) = (1-e) * sum_i e^i h(delta_i)
               -------------------------------------------
               sum_i e^i  +  d (1-e) * sum_i e^i delta_i

with h the binary entropy in bits and e the erasure probability.  The
feedback capacity is max R over Delta_d.  The maximizer is either in the
interior (where all coordinates coincide and a 1-D problem suffices) or on
the face sum delta_i = 1; the full solver covers both via Dinkelbach's
parametric method, whose inner problem separates per coordinate with a
closed-form logistic solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .constraint import ConstraintSpec, noiseless_capacity

_SIMPLEX_SLACK = 1e-12
_FACE_TOL = 1e-6


@dataclass(frozen=True)
class SplitVector:
    """A point of Delta_d: per-attempt mass assignments delta_0..delta_d."""

    delta: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.delta:
            raise ValueError("delta must have at least one entry")
        for x in self.delta:
            if not (0.0 <= x <= 1.0):
                raise ValueError(f"delta entries must lie in [0,1], got {x!r}")
        if sum(self.delta) > 1.0 + _SIMPLEX_SLACK:
            raise ValueError(f"sum(delta) = {sum(self.delta)} exceeds 1")

    @property
    def d(self) -> int:
        return len(self.delta) - 1

    @property
    def total(self) -> float:
        return sum(self.delta)


@dataclass(frozen=True)
class CapacityResult:
    value: float
    argmax: SplitVector
    regime: str  # "Interior" | "SimplexFace"
    method: str  # "FullSimplex" | "Simplified1D" | "Grid"


def binary_entropy(p: float) -> float:
    """h(p) = -p log2 p - (1-p) log2(1-p), continuously extended to {0,1}."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0,1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def gaussian_q(x: float) -> float:
    """Standard Gaussian upper-tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inverse(p: float) -> float:
    """Inverse of the Gaussian tail: the x with Q(x) = p, for p in (0,1).

    Bisection on the monotone tail; |x| stays below 40 for representable p.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0,1), got {p!r}")
    if p == 0.5:
        return 0.0  # Q(0) is exactly 1/2; bisection noise would flip floors
    lo, hi = -40.0, 40.0  # Q(lo) ~ 1, Q(hi) ~ 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gaussian_q(mid) > p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def _delta_tuple(delta: "SplitVector | Sequence[float]") -> tuple[float, ...]:
    if isinstance(delta, SplitVector):
        return delta.delta
    return tuple(float(x) for x in delta)


def rate_R(delta: "SplitVector | Sequence[float]", eps: float, d: int) -> float:
    """Evaluate the rate function R(delta) at erasure probability eps."""
    vec = _delta_tuple(delta)
    if len(vec) != d + 1:
        raise ValueError(f"delta must have length d+1 = {d + 1}, got {len(vec)}")
    if sum(vec) > 1.0 + _SIMPLEX_SLACK or any(not 0.0 <= x <= 1.0 for x in vec):
        raise ValueError("delta is not a member of the simplex")
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0,1], got {eps!r}")
    ebar = 1.0 - eps
    pows = [eps**i for i in range(d + 1)]
    num = ebar * sum(p * binary_entropy(x) for p, x in zip(pows, vec))
    den = sum(pows) + d * ebar * sum(p * x for p, x in zip(pows, vec))
    return num / den


def _v_derivative_sign(delta: float, kappa: float, d: int) -> float:
    """Numerator of V'(delta) for V = h(delta)/(d*delta + kappa).

    Strictly decreasing in delta, so a sign search brackets the maximizer.
    """
    x = min(max(delta, 1e-15), 1.0 - 1e-15)
    return (kappa + d) * math.log2(1.0 - x) - kappa * math.log2(x)


def _maximize_v(eps: float, d: int, hi: float) -> tuple[float, float]:
    """Maximize V(delta) = h(delta)/(d*delta + kappa) over [0, hi]."""
    if eps >= 1.0:
        raise ValueError("eps = 1 has no finite kappa; capacity is 0 by definition")
    kappa = 1.0 / (1.0 - eps)
    if _v_derivative_sign(hi, kappa, d) >= 0.0:
        best = hi
    else:
        lo_b, hi_b = 1e-15, hi
        for _ in range(200):
            mid = 0.5 * (lo_b + hi_b)
            if _v_derivative_sign(mid, kappa, d) > 0.0:
                lo_b = mid
            else:
                hi_b = mid
        best = 0.5 * (lo_b + hi_b)
    return best, binary_entropy(best) / (d * best + kappa)


def solve_simplified(eps: float, d: int) -> CapacityResult:
    """One-dimensional solver for the interior regime.

    Maximizes h(delta)/(d*delta + 1/(1-eps)) over delta in [0, 1/(d+1)] and
    reports the equal-coordinate split vector attaining it.
    """
    if not (0.0 <= eps < 1.0):
        raise ValueError("solve_simplified requires eps in [0,1)")
    if d < 0:
        raise ValueError("d must be >= 0")
    best, _value = _maximize_v(eps, d, 1.0 / (d + 1))
    argmax = SplitVector(tuple([best] * (d + 1)))
    value = rate_R(argmax, eps, d)
    regime = "Interior" if argmax.total < 1.0 - _FACE_TOL else "SimplexFace"
    return CapacityResult(value=value, argmax=argmax, regime=regime, method="Simplified1D")


def noncausal_capacity(eps: float, d: int) -> float:
    """Capacity with non-causal erasure knowledge: max of V over [0, 1/2]."""
    if not (0.0 <= eps < 1.0):
        raise ValueError("noncausal_capacity requires eps in [0,1)")
    _best, value = _maximize_v(eps, d, 0.5)
    return value


def d2_equality_threshold() -> float:
    """Largest eps at which the d=2 feedback and non-causal capacities agree."""
    return 1.0 - 1.0 / (2.0 * math.log2(1.5))


def _sigma2(t: float) -> float:
    """1 / (1 + 2^t), computed without overflow for large |t|."""
    if t >= 0:
        e = 2.0 ** (-t) if t < 1074 else 0.0
        return e / (1.0 + e)
    e = 2.0**t if t > -1074 else 0.0
    return 1.0 / (1.0 + e)


def _inner_maximizer(lam: float, eps: float, d: int) -> list[float]:
    """Argmax of sum_i w_i [h(x_i) - lam*d*x_i] over Delta_d, w_i = (1-e)e^i.

    Unconstrained coordinates solve to the logistic value 1/(1+2^{lam*d});
    if their sum leaves the simplex, a multiplier mu > 0 is bisected onto
    the face sum x = 1.  Coordinates of zero weight are pinned to 0 (the
    lexicographically smallest choice among ties).
    """
    w = [(1.0 - eps) * eps**i for i in range(d + 1)]
    base = _sigma2(lam * d)
    x = [base if wi > 0.0 else 0.0 for wi in w]
    if sum(x) <= 1.0:
        return x

    def coords(mu: float) -> list[float]:
        return [_sigma2(lam * d + mu / wi) if wi > 0.0 else 0.0 for wi in w]

    mu_lo, mu_hi = 0.0, 1.0
    while sum(coords(mu_hi)) > 1.0:
        mu_hi *= 2.0
    for _ in range(100):
        mu = 0.5 * (mu_lo + mu_hi)
        if sum(coords(mu)) > 1.0:
            mu_lo = mu
        else:
            mu_hi = mu
    return coords(mu_hi)


def _dinkelbach(eps: float, d: int, lam0: float) -> tuple[float, list[float]]:
    lam = lam0
    x = _inner_maximizer(lam, eps, d)
    for _ in range(200):
        x = _inner_maximizer(lam, eps, d)
        ebar = 1.0 - eps
        pows = [eps**i for i in range(d + 1)]
        num = ebar * sum(p * binary_entropy(v) for p, v in zip(pows, x))
        den = sum(pows) + d * ebar * sum(p * v for p, v in zip(pows, x))
        if abs(num - lam * den) <= 1e-12:
            break
        lam = num / den
    return lam, x

def solve_feedback_capacity(eps: float, d: int) -> CapacityResult:
    """Global maximum of R over Delta_d, to absolute tolerance 1e-7.

    Runs the Dinkelbach full-simplex solver from a 1e-2 grid of parameter
    starts together with the simplified 1-D solver, and returns the larger.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0,1], got {eps!r}")
    if eps == 1.0:
        zero = SplitVector(tuple([0.0] * (d + 1)))
        return CapacityResult(value=0.0, argmax=zero, regime="Interior", method="FullSimplex")

    best_lam, best_x = -1.0, None
    seen: set[float] = set()
    for k in range(100):
        lam, x = _dinkelbach(eps, d, 0.01 * k)
        if lam > best_lam:
            best_lam, best_x = lam, x
        key = round(lam, 11)
        if key in seen:
            # Dinkelbach is globally convergent here; once two starts agree
            # the remaining grid cannot find anything new.
            break
        seen.add(key)
    assert best_x is not None
    argmax = SplitVector(tuple(min(max(v, 0.0), 1.0) for v in best_x))
    full = CapacityResult(
        value=rate_R(argmax, eps, d),
        argmax=argmax,
        regime="Interior" if argmax.total < 1.0 - _FACE_TOL else "SimplexFace",
        method="FullSimplex",
    )
    simple = solve_simplified(eps, d)
    return simple if simple.value > full.value else full


def grid_search_capacity(eps: float, d: int, step: float = 0.01) -> CapacityResult:
    """Brute-force oracle: best equal-coordinate and face points on a grid.

    Exhaustive over the full simplex for d <= 2, diagonal-only above; a slow
    cross-check for the analytic solvers, not a production path.
    """
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps out of range")
    best_val, best_vec = -1.0, tuple([0.0] * (d + 1))

    def consider(vec: tuple[float, ...]) -> None:
        nonlocal best_val, best_vec
        if sum(vec) > 1.0:
            return
        v = rate_R(vec, eps, d)
        if v > best_val:
            best_val, best_vec = v, vec

    n = int(round(1.0 / step))
    if d <= 2 and eps < 1.0:
        axis = [i * step for i in range(n + 1)]
        if d == 0:
            for a in axis:
                consider((a,))
        elif d == 1:
            for a in axis:
                for b in axis:
                    consider((a, b))
        else:
            for a in axis:
                for b in axis:
                    for c in axis:
                        consider((a, b, c))
    else:
        for i in range(n + 1):
            t = i * step / (d + 1)
            consider(tuple([t] * (d + 1)))
    argmax = SplitVector(best_vec)
    regime = "Interior" if argmax.total < 1.0 - _FACE_TOL else "SimplexFace"
    return CapacityResult(value=best_val, argmax=argmax, regime=regime, method="Grid")


def linear_lower_bound(eps: float, spec: ConstraintSpec) -> float:
    """First-order lower bound: noiseless capacity scaled by (1 - eps)."""
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0,1], got {eps!r}")
    return noiseless_capacity(spec) * (1.0 - eps)
