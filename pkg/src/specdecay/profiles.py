"""Exact calculus of monotone right-continuous profiles.

Two profile families are used throughout the package:

* :class:`MonotoneProfile` -- nondecreasing, right-continuous on [0, inf).
  Canonical representation for finite operators is a step function with
  strictly positive jumps; power laws ``C * x**alpha`` and tabulated
  staircase samples cover the closed-form and grid-computed cases.
* :class:`DecayProfile` -- nonincreasing on (0, inf), either an exact
  nonnegative combination of decaying exponentials or a tabulated curve
  with a dominating exponential tail.

All transforms on step profiles are exact (no quadrature).  Infinity is a
first-class value of the extended-real results: right inverses and the
derived spatial-repartition functions return ``math.inf`` rather than a
large float.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

__all__ = [
    "MonotoneProfile",
    "DecayProfile",
    "ExponentialTail",
    "step_profile",
    "power_profile",
    "tabulated_profile",
    "sum_exp_decay",
    "tabulated_decay",
    "evaluate",
    "right_inverse_increasing",
    "right_inverse_decreasing",
    "g_transform",
    "h_of",
    "m_transform",
    "n_of",
    "laplace_stieltjes",
    "check_growth_condition",
    "check_doubling",
    "quadrature",
]

# Membership of an eigenvalue in ]0, lambda] is decided with this slack so
# profiles stay stable under eigensolver jitter.  Evaluation of step
# profiles uses the same comparison.
TIE_REL = 1e-12
TIE_ABS = 1e-14

#: absolute bisection tolerance for decreasing right inverses is
#: ``BISECT_ABS * (1 + scale of t)``
BISECT_ABS = 1e-12


def _tie_leq(position, x):
    """Right-continuous membership test ``position <= x`` with tie slack."""
    return position <= x * (1.0 + TIE_REL) + TIE_ABS


# ---------------------------------------------------------------------------
# monotone profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneProfile:
    """Nondecreasing right-continuous function on [0, inf).

    ``kind`` selects the representation:

    * ``"step"`` -- ``positions`` (strictly increasing, > 0) and strictly
      positive ``increments``; the value at x is ``value_at_zero`` plus the
      sum of increments at positions <= x.
    * ``"power"`` -- ``coefficient * x**exponent`` (plus ``value_at_zero``).
    * ``"tabulated"`` -- staircase through samples ``(positions, values)``,
      right-continuous, piecewise constant from the left sample.

    ``value_at_zero`` is the mass at 0: zero for the half-open spectral
    flavor, the kernel density for the closed flavor.
    """

    kind: str
    value_at_zero: float = 0.0
    positions: np.ndarray | None = None
    increments: np.ndarray | None = None
    values: np.ndarray | None = None
    coefficient: float = 0.0
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("step", "power", "tabulated"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.value_at_zero < 0:
            raise ValueError("value_at_zero must be nonnegative")
        if self.kind == "step":
            pos = np.asarray(self.positions, dtype=float)
            inc = np.asarray(self.increments, dtype=float)
            if pos.shape != inc.shape or pos.ndim != 1:
                raise ValueError("positions and increments must be 1-d arrays of equal length")
            if np.any(pos < 0):
                raise ValueError("step positions must be nonnegative")
            if np.any(np.diff(pos) <= 0):
                raise ValueError("step positions must be strictly increasing")
            if np.any(inc <= 0):
                raise ValueError("step increments must be strictly positive")
            object.__setattr__(self, "positions", pos)
            object.__setattr__(self, "increments", inc)
        elif self.kind == "power":
            if self.coefficient <= 0 or self.exponent <= 0:
                raise ValueError("power profile requires C > 0 and alpha > 0")
        else:
            pos = np.asarray(self.positions, dtype=float)
            val = np.asarray(self.values, dtype=float)
            if pos.shape != val.shape or pos.ndim != 1:
                raise ValueError("positions and values must be 1-d arrays of equal length")
            if np.any(np.diff(pos) <= 0):
                raise ValueError("sample positions must be strictly increasing")
            if np.any(np.diff(val) < 0):
                raise ValueError("tabulated values must be nondecreasing")
            if val.size and val[0] < self.value_at_zero:
                raise ValueError("tabulated values must dominate value_at_zero")
            object.__setattr__(self, "positions", pos)
            object.__setattr__(self, "values", val)

    # -- convenience ---------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    def total_mass(self):
        """Supremum of the profile (inf for power profiles)."""
        if self.kind == "step":
            return self.value_at_zero + float(self.increments.sum())
        if self.kind == "tabulated":
            return float(self.values[-1]) if self.values.size else self.value_at_zero
        return math.inf

    def as_step(self):
        """Convert a tabulated staircase to an equivalent step profile."""
        if self.kind == "step":
            return self
        if self.kind != "tabulated":
            raise ValueError("only tabulated profiles convert to step form")
        jumps = np.diff(np.concatenate([[self.value_at_zero], self.values]))
        keep = jumps > 0
        return MonotoneProfile(
            kind="step",
            value_at_zero=self.value_at_zero,
            positions=self.positions[keep],
            increments=jumps[keep],
        )

    # -- serialization ---------------------------------------------------

    def to_json(self):
        if self.kind == "step":
            data = [[float(p), float(i)] for p, i in zip(self.positions, self.increments)]
        elif self.kind == "power":
            data = [float(self.coefficient), float(self.exponent)]
        else:
            data = [[float(p), float(v)] for p, v in zip(self.positions, self.values)]
        return {"kind": self.kind, "value_at_zero": float(self.value_at_zero), "data": data}

    @staticmethod
    def from_json(obj):
        kind = obj["kind"]
        v0 = float(obj.get("value_at_zero", 0.0))
        data = obj["data"]
        if kind == "step":
            arr = np.asarray(data, dtype=float).reshape(-1, 2)
            return MonotoneProfile(kind="step", value_at_zero=v0,
                                   positions=arr[:, 0], increments=arr[:, 1])
        if kind == "power":
            return MonotoneProfile(kind="power", value_at_zero=v0,
                                   coefficient=float(data[0]), exponent=float(data[1]))
        if kind == "tabulated":
            arr = np.asarray(data, dtype=float).reshape(-1, 2)
            return MonotoneProfile(kind="tabulated", value_at_zero=v0,
                                   positions=arr[:, 0], values=arr[:, 1])
        raise ValueError(f"unknown profile kind {kind!r}")

    def to_csv(self):
        """CSV table with header ``lambda,value`` (cumulative values)."""
        lines = ["lambda,value"]
        if self.kind == "power":
            lines.append(f"# power C={self.coefficient!r} alpha={self.exponent!r}")
            return "\n".join(lines) + "\n"
        lines.append(f"0,{self.value_at_zero!r}")
        if self.kind == "step":
            acc = self.value_at_zero
            for p, i in zip(self.positions, self.increments):
                acc += i
                lines.append(f"{float(p)!r},{float(acc)!r}")
        else:
            for p, v in zip(self.positions, self.values):
                lines.append(f"{float(p)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


def step_profile(jumps, value_at_zero=0.0):
    """Step profile from an iterable of (position, increment) pairs."""
    jumps = sorted((float(p), float(i)) for p, i in jumps)
    pos = np.array([p for p, _ in jumps], dtype=float)
    inc = np.array([i for _, i in jumps], dtype=float)
    return MonotoneProfile(kind="step", value_at_zero=value_at_zero,
                           positions=pos, increments=inc)


def power_profile(coefficient, exponent, value_at_zero=0.0):
    return MonotoneProfile(kind="power", value_at_zero=value_at_zero,
                           coefficient=float(coefficient), exponent=float(exponent))


def tabulated_profile(positions, values, value_at_zero=0.0):
    return MonotoneProfile(kind="tabulated", value_at_zero=value_at_zero,
                           positions=np.asarray(positions, dtype=float),
                           values=np.asarray(values, dtype=float))


def evaluate(p, x):
    """Right-continuous evaluation; for step profiles the jump at x counts.

    Works for both profile families.  Raises on negative x.
    """
    if isinstance(p, DecayProfile):
        return _evaluate_decay(p, x)
    x = float(x)
    if x < 0:
        raise ValueError("profiles are defined on [0, inf)")
    if p.kind == "step":
        sel = _tie_leq(p.positions, x)
        return p.value_at_zero + float(p.increments[sel].sum())
    if p.kind == "power":
        return p.value_at_zero + p.coefficient * x**p.exponent
    idx = int(np.searchsorted(p.positions, x * (1.0 + TIE_REL) + TIE_ABS, side="right"))
    if idx == 0:
        return p.value_at_zero
    return float(p.values[idx - 1])


def right_inverse_increasing(p: MonotoneProfile, y) -> float:
    """Right-continuous inverse sup{x : p(x) <= y}, completed to 0 below p(0).

    Returns ``math.inf`` when the profile is bounded by y.
    """
    y = float(y)
    if y < 0:
        return 0.0
    if y < p.value_at_zero:
        return 0.0
    if p.kind == "power":
        return ((y - p.value_at_zero) / p.coefficient) ** (1.0 / p.exponent)
    if p.kind == "step":
        cum = p.value_at_zero + np.cumsum(p.increments)
        above = np.nonzero(cum > y)[0]
        if above.size == 0:
            return math.inf
        return float(p.positions[above[0]])
    above = np.nonzero(p.values > y)[0]
    if above.size == 0:
        return math.inf
    return float(p.positions[above[0]])


def g_transform(F: MonotoneProfile, breakpoint_floor: float = 0.0) -> MonotoneProfile:
    """The transform G(x) = integral over ]0, x] of dF(u)/u.

    Exact for step profiles (jump dF_i/x_i at each breakpoint) and for
    power profiles (C*alpha/(alpha-1) * x**(alpha-1), alpha > 1).
    Tabulated staircases are converted to their step form first.

    Breakpoints at or below ``breakpoint_floor`` are rejected rather than
    integrated, since the transform diverges as breakpoints accumulate
    at zero.
    """
    if F.value_at_zero != 0.0:
        raise ValueError("g_transform requires the half-open flavor F(0) = 0")
    if F.kind == "power":
        if F.exponent <= 1.0:
            raise ValueError("g_transform of a power profile requires alpha > 1")
        c1 = F.coefficient * F.exponent / (F.exponent - 1.0)
        return power_profile(c1, F.exponent - 1.0)
    step = F.as_step()
    if step.positions.size and step.positions[0] <= breakpoint_floor:
        raise ValueError(
            f"breakpoint {step.positions[0]} at or below floor {breakpoint_floor}; "
            "the transform diverges at zero"
        )
    return MonotoneProfile(
        kind="step",
        positions=step.positions,
        increments=step.increments / step.positions,
    )


def h_of(G: MonotoneProfile, y) -> float:
    """Spatial repartition function H(y) = y * Ginv(y); inf propagates."""
    y = float(y)
    if y < 0:
        raise ValueError("h_of requires y >= 0")
    if y == 0.0:
        return 0.0
    return y * right_inverse_increasing(G, y)


def laplace_stieltjes(F: MonotoneProfile, t) -> float:
    """Laplace transform of the Stieltjes measure dF at t > 0.

    Step: sum of dF_i * exp(-x_i t), plus the atom F(0) at zero.
    Power: C * Gamma(alpha + 1) / t**alpha.
    """
    t = float(t)
    if t <= 0:
        raise ValueError("laplace_stieltjes requires t > 0")
    if F.kind == "power":
        return F.value_at_zero + F.coefficient * math.gamma(F.exponent + 1.0) / t**F.exponent
    step = F.as_step()
    return F.value_at_zero + float(np.exp(-step.positions * t) @ step.increments)


def check_growth_condition(G: MonotoneProfile, C, samples):
    """Test G(u*y) <= exp(C*u) * G(y) on sample pairs (u, y).

    Returns ``(ok, worst_pair, worst_margin)`` where ``worst_margin`` is
    the largest value of ``G(u*y) - exp(C*u)*G(y)`` over the samples
    (positive means violated at ``worst_pair``).  When exp(C*u) exceeds
    the float range the bound is treated as symbolically infinite and the
    pair cannot witness a violation.
    """
    C = float(C)
    worst_pair = None
    worst_margin = -math.inf
    for u, y in samples:
        if u <= 0 or y <= 0:
            raise ValueError("growth-condition samples must be positive")
        if C * u > 709.0:
            margin = -math.inf
        else:
            margin = evaluate(G, u * y) - math.exp(C * u) * evaluate(G, y)
        if margin > worst_margin:
            worst_margin = margin
            worst_pair = (u, y)
    return worst_margin <= 0.0, worst_pair, worst_margin


def check_doubling(F: MonotoneProfile, eps, lam_max, grid=64):
    """Test the growing condition F(2x) >= 2(1+eps) F(x) on (0, lam_max].

    The grid is uniform on (0, lam_max]; comparison allows one part in
    1e12 of slack so exact boundary cases pass.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    if eps <= 0 or lam_max <= 0:
        raise ValueError("eps and lam_max must be positive")
    xs = lam_max * np.arange(1, grid + 1) / grid
    factor = 2.0 * (1.0 + eps)
    for x in xs:
        if evaluate(F, 2.0 * x) < factor * evaluate(F, x) * (1.0 - 1e-12):
            return False
    return True


# ---------------------------------------------------------------------------
# decay profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialTail:
    """Dominating tail v(t) = coefficient * exp(-rate * (t - start))."""

    rate: float
    coefficient: float
    start: float

    def __post_init__(self):
        if self.rate <= 0:
            raise ValueError("tail rate must be positive")
        if self.coefficient < 0:
            raise ValueError("tail coefficient must be nonnegative")

    def value(self, t):
        return self.coefficient * math.exp(-self.rate * (t - self.start))

    def integral_from(self, t):
        return self.value(t) / self.rate


@dataclass(frozen=True)
class DecayProfile:
    """Nonincreasing function on (0, inf).

    ``kind`` is ``"sum_exp"`` (coefficients >= 0, rates > 0, evaluated and
    integrated exactly) or ``"tabulated"`` (nonincreasing samples joined
    linearly, with an optional :class:`ExponentialTail` that dominates the
    true function beyond the last sample).
    """

    kind: str
    coefficients: np.ndarray | None = None
    rates: np.ndarray | None = None
    times: np.ndarray | None = None
    values: np.ndarray | None = None
    tail: ExponentialTail | None = None

    def __post_init__(self):
        if self.kind == "sum_exp":
            c = np.asarray([] if self.coefficients is None else self.coefficients, dtype=float)
            r = np.asarray([] if self.rates is None else self.rates, dtype=float)
            if c.shape != r.shape:
                raise ValueError("coefficients and rates must have equal length")
            if np.any(c < 0):
                raise ValueError("sum-of-exponentials coefficients must be >= 0")
            if np.any(r <= 0):
                raise ValueError("sum-of-exponentials rates must be > 0")
            object.__setattr__(self, "coefficients", c)
            object.__setattr__(self, "rates", r)
        elif self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if t.shape != v.shape or t.ndim != 1 or t.size < 2:
                raise ValueError("tabulated decay needs matching 1-d times/values, >= 2 samples")
            if np.any(np.diff(t) <= 0):
                raise ValueError("times must be strictly increasing")
            if np.any(np.diff(v) > 1e-15 * max(1.0, float(v[0]))):
                raise ValueError("tabulated decay values must be nonincreasing")
            if np.any(v < 0):
                raise ValueError("decay values must be nonnegative")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "values", v)
        else:
            raise ValueError(f"unknown decay kind {self.kind!r}")

    def __call__(self, t):
        return _evaluate_decay(self, t)

    def value_at_zero_plus(self):
        if self.kind == "sum_exp":
            return float(self.coefficients.sum())
        return float(self.values[0])

    def to_json(self):
        if self.kind == "sum_exp":
            return {"kind": "sum_exp",
                    "data": [[float(c), float(r)] for c, r in zip(self.coefficients, self.rates)]}
        obj = {"kind": "tabulated",
               "data": [[float(t), float(v)] for t, v in zip(self.times, self.values)]}
        if self.tail is not None:
            obj["tail"] = {"rate": self.tail.rate, "coefficient": self.tail.coefficient,
                           "start": self.tail.start}
        return obj

    @staticmethod
    def from_json(obj):
        if obj["kind"] == "sum_exp":
            arr = np.asarray(obj["data"], dtype=float).reshape(-1, 2)
            return sum_exp_decay(arr[:, 0], arr[:, 1])
        arr = np.asarray(obj["data"], dtype=float).reshape(-1, 2)
        tail = None
        if "tail" in obj:
            t = obj["tail"]
            tail = ExponentialTail(t["rate"], t["coefficient"], t["start"])
        return tabulated_decay(arr[:, 0], arr[:, 1], tail)

    def to_csv(self):
        lines = ["t,value"]
        if self.kind == "sum_exp":
            lines[0] = "# sum_exp " + json.dumps(self.to_json()["data"])
            return lines[0] + "\n"
        for t, v in zip(self.times, self.values):
            lines.append(f"{float(t)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


def sum_exp_decay(coefficients, rates):
    """Exact decay profile sum_j c_j exp(-t r_j); empty sums are allowed."""
    return DecayProfile(kind="sum_exp",
                        coefficients=np.asarray(coefficients, dtype=float),
                        rates=np.asarray(rates, dtype=float))


def tabulated_decay(times, values, tail=None):
    return DecayProfile(kind="tabulated", times=np.asarray(times, dtype=float),
                        values=np.asarray(values, dtype=float), tail=tail)


def _evaluate_decay(p: DecayProfile, t) -> float:
    t = float(t)
    if t < 0:
        raise ValueError("decay profiles are defined on (0, inf)")
    if p.kind == "sum_exp":
        if p.coefficients.size == 0:
            return 0.0
        return float(np.exp(-p.rates * t) @ p.coefficients)
    if t <= p.times[0]:
        return float(p.values[0])
    if t >= p.times[-1]:
        last = float(p.values[-1])
        if p.tail is None:
            return last
        return min(last, p.tail.value(t))
    return float(np.interp(t, p.times, p.values))


def right_inverse_decreasing(p: DecayProfile, y) -> float:
    """inf{t : p(t) <= y} for nonincreasing p with limit 0; 0 if p(0+) <= y.

    Tabulated segments are solved exactly; sum-of-exponentials by bisection
    to absolute tolerance ``BISECT_ABS * (1 + scale of t)``.
    """
    y = float(y)
    if y <= 0:
        raise ValueError("right_inverse_decreasing requires y > 0")
    if p.value_at_zero_plus() <= y:
        return 0.0
    if p.kind == "tabulated":
        idx = int(np.searchsorted(-p.values, -y, side="left"))
        if idx < p.values.size:
            if idx == 0:
                return float(p.times[0])
            t0, t1 = p.times[idx - 1], p.times[idx]
            v0, v1 = p.values[idx - 1], p.values[idx]
            if v1 == v0:
                return float(t0)
            return float(t0 + (v0 - y) * (t1 - t0) / (v0 - v1))
        if p.tail is None or p.tail.coefficient <= 0:
            return math.inf
        if p.tail.value(p.times[-1]) <= y:
            return float(p.times[-1])
        return float(p.tail.start + math.log(p.tail.coefficient / y) / p.tail.rate)
    # sum_exp: expand an upper bracket, then bisect
    hi = 1.0 / float(p.rates.min())
    while _evaluate_decay(p, hi) > y:
        hi *= 2.0
        if hi > 1e300:
            return math.inf
    lo = 0.0
    tol = BISECT_ABS * (1.0 + hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _evaluate_decay(p, mid) <= y:
            hi = mid
        else:
            lo = mid
    return hi


def m_transform(L: DecayProfile) -> DecayProfile:
    """Integrated decay M(t) = integral of L over [t, inf).

    Exact for sums of exponentials.  For tabulated L the linear
    interpolant is integrated segment-exactly (so the stated quadrature
    tolerance is met trivially) and the tail uses the dominating bound
    ``integral >= L(T)/rate`` with the tail descriptor's rate; the result
    dominates the true M whenever L is convex, as heat decays are.
    """
    if L.kind == "sum_exp":
        return sum_exp_decay(L.coefficients / L.rates, L.rates)
    if L.tail is None:
        raise ValueError("tabulated decay needs a tail descriptor for m_transform")
    seg = 0.5 * (L.values[1:] + L.values[:-1]) * np.diff(L.times)
    tail_mass = L.tail.integral_from(L.times[-1])
    m_values = np.concatenate([np.cumsum(seg[::-1])[::-1] + tail_mass, [tail_mass]])
    m_tail = ExponentialTail(L.tail.rate, tail_mass, L.times[-1])
    return tabulated_decay(L.times, m_values, m_tail)


def n_of(M: DecayProfile, y) -> float:
    """Heat repartition function N(y) = y / Minv(y).

    Returns inf when Minv(y) = 0 (y at or above M(0+)); integral callers
    must exclude such points and record the excluded mass.
    """
    y = float(y)
    if y <= 0:
        raise ValueError("n_of requires y > 0")
    minv = right_inverse_decreasing(M, y)
    if minv == 0.0:
        return math.inf
    if math.isinf(minv):
        return 0.0
    return y / minv


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def quadrature(func, a, b, rel_tol=1e-9):
    """Adaptive quadrature used by the module for continuous profiles.

    Thin wrapper over scipy's QUADPACK; ``b`` may be ``math.inf``.
    """
    val, _err = quad(func, a, b, epsabs=0.0, epsrel=rel_tol, limit=200)
    return val
