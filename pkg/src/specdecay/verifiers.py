"""Certification engine for the spectral-profile inequalities.

Every verifier evaluates both sides of one inequality for a concrete
(operator, state) instance and emits an :class:`InequalityReport` with
margin, witness digests and the measure of any excluded (infinite)
integrand points.  Pass thresholds are additive, ``margin >= -abs_tol``
with ``abs_tol = tol_scale * max(1, |rhs|)``, so exact-equality cases
(group equalities) pass deterministically.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .operators import (
    DensityState,
    SpectralOperator,
    decay_profiles,
    dirichlet_counting_kernel_free,
    dirichlet_profile,
    energy,
    evaluate_heat_decay,
    heat_decay,
    project_off_kernel_rho,
    project_off_kernel_state,
    rho_energy,
    rho_expectation,
    sandwich_norm,
)
from .profiles import (
    evaluate,
    g_transform,
    h_of,
    laplace_stieltjes,
    m_transform,
    n_of,
    right_inverse_increasing,
)

__all__ = [
    "InequalityReport",
    "DEFAULT_ABS_TOL_SCALE",
    "verify_h_sobolev",
    "verify_n_sobolev",
    "verify_rho_sobolev",
    "verify_rho_moser_integral",
    "verify_rho_moser_partition",
    "verify_faber_krahn_mixed",
    "verify_pure_moser_nash",
    "verify_lp_sobolev",
    "polynomial_consequences",
    "compare_heat_spectral",
    "verify_sobolev_to_fk",
    "verify_integral_dominates_discrete",
    "random_instance",
    "verify_all",
    "run_sweep",
    "reports_to_jsonl",
    "reports_from_jsonl",
    "summarize_reports",
]

DEFAULT_ABS_TOL_SCALE = 1e-9


@dataclass
class InequalityReport:
    """Outcome of checking ``lhs <= rhs`` for one inequality instance."""

    id: str
    lhs: float
    rhs: float
    witness: dict = field(default_factory=dict)
    exclusions: float = 0.0
    tol_scale: float = DEFAULT_ABS_TOL_SCALE
    seed: int | None = None

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def rel_margin(self):
        return self.margin / max(1.0, abs(self.rhs))

    @property
    def abs_tol(self):
        return self.tol_scale * max(1.0, abs(self.rhs))

    @property
    def passed(self):
        return self.margin >= -self.abs_tol

    def to_dict(self):
        return {
            "id": self.id,
            "lhs": _json_real(self.lhs),
            "rhs": _json_real(self.rhs),
            "margin": _json_real(self.margin),
            "pass": bool(self.passed),
            "witness": self.witness,
            "exclusions": _json_real(self.exclusions),
            "seed": self.seed,
        }


def _json_real(x):
    """Infinities serialize symbolically; JSON has no Infinity literal."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _parse_real(x):
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return float(x)


def reports_to_jsonl(reports):
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)


def reports_from_jsonl(text):
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        out.append({
            "id": obj["id"],
            "lhs": _parse_real(obj["lhs"]),
            "rhs": _parse_real(obj["rhs"]),
            "margin": _parse_real(obj["margin"]),
            "pass": bool(obj["pass"]),
            "witness": obj.get("witness", {}),
            "exclusions": _parse_real(obj.get("exclusions", 0.0)),
            "seed": obj.get("seed"),
        })
    return out


def summarize_reports(records):
    """Deterministic per-id summary: count, failures, worst margin."""
    byid = {}
    for rec in records:
        entry = byid.setdefault(rec["id"], {"count": 0, "failures": 0, "min_margin": math.inf})
        entry["count"] += 1
        entry["failures"] += 0 if rec["pass"] else 1
        entry["min_margin"] = min(entry["min_margin"], rec["margin"])
    lines = ["id,count,failures,min_margin"]
    for key in sorted(byid):
        e = byid[key]
        lines.append(f"{key},{e['count']},{e['failures']},{_json_real(e['min_margin'])}")
    return "\n".join(lines) + "\n"


def _witness(op, flavor=None, state=None, rho=None, **params):
    w = {"operator": op.digest()}
    if flavor is not None:
        w["flavor"] = flavor
    if state is not None:
        arr = np.ascontiguousarray(np.asarray(state, dtype=float))
        w["state"] = hashlib.sha256(arr.tobytes()).hexdigest()[:12]
    if rho is not None:
        w["state"] = rho.digest()
    for key, val in params.items():
        w[key] = val
    return w


def _finite_weighted_sum(values, weights):
    """Sum of value*weight over finite values; returns (sum, excluded mass)."""
    total = 0.0
    excluded = 0.0
    for v, w in zip(values, weights):
        if math.isinf(v):
            excluded += w
        else:
            total += v * w
    return total, excluded


# ---------------------------------------------------------------------------
# pure-state Sobolev inequalities
# ---------------------------------------------------------------------------


def verify_h_sobolev(op: SpectralOperator, f, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Spectral-decay Sobolev check: the H-integral of |f|^2/(4 E) is <= 1.

    f is projected off ker A first (residual reported); H comes from the
    ultracontractive profile through the G transform.
    """
    f_proj, residual = project_off_kernel_state(op, f)
    e = energy(op, f_proj)
    if e <= 0:
        raise ValueError("state has no energy after kernel projection")
    g = g_transform(decay_profiles(op, "ultra", "half_open"))
    fx = op.space.reshape_state(f_proj)
    sq = np.einsum("xi,xi->x", fx, fx)
    vals = [h_of(g, q / (4.0 * e)) for q in sq]
    lhs, excluded = _finite_weighted_sum(vals, op.space.weights)
    return InequalityReport(
        id="eq3-H-sobolev", lhs=lhs, rhs=1.0, exclusions=excluded, tol_scale=tol_scale,
        witness=_witness(op, flavor="half_open", state=f_proj, kernel_residual=residual))


def verify_n_sobolev(op: SpectralOperator, f, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Heat-decay Sobolev check: the N-integral of |f|^2/(4 E) is <= ln 2.

    The tabulated M dominates the true integrated heat decay (chord
    quadrature), so N is conservative; infinite integrand points are
    excluded and their measure recorded.
    """
    f_proj, residual = project_off_kernel_state(op, f)
    e = energy(op, f_proj)
    if e <= 0:
        raise ValueError("state has no energy after kernel projection")
    m = m_transform(heat_decay(op, "ultra", exclude_kernel=True))
    fx = op.space.reshape_state(f_proj)
    sq = np.einsum("xi,xi->x", fx, fx)
    vals = [n_of(m, q / (4.0 * e)) if q > 0 else 0.0 for q in sq]
    lhs, excluded = _finite_weighted_sum(vals, op.space.weights)
    return InequalityReport(
        id="eq4-N-sobolev", lhs=lhs, rhs=math.log(2.0), exclusions=excluded,
        tol_scale=tol_scale,
        witness=_witness(op, flavor="half_open", state=f_proj, kernel_residual=residual))


# ---------------------------------------------------------------------------
# mixed-state Sobolev / Moser
# ---------------------------------------------------------------------------


def verify_rho_sobolev(op: SpectralOperator, rho: DensityState,
                       tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Mixed-state Sobolev check: Ginv-integral of the density <= 4 E(rho)."""
    rho.validate_psd()
    rho_proj, residual = project_off_kernel_rho(op, rho)
    if rho_proj.trace() <= 0:
        raise ValueError("state is entirely supported on ker A")
    g = g_transform(decay_profiles(op, "density", "half_open"))
    s = sandwich_norm(op, rho_proj)
    dens = rho_proj.density()
    vals = [right_inverse_increasing(g, d / (4.0 * s)) * d if d > 0 else 0.0 for d in dens]
    lhs, excluded = _finite_weighted_sum(vals, op.space.weights)
    rhs = 4.0 * rho_energy(op, rho_proj)
    return InequalityReport(
        id="eq9-rho-sobolev", lhs=lhs, rhs=rhs, exclusions=excluded, tol_scale=tol_scale,
        witness=_witness(op, flavor="half_open", rho=rho_proj, kernel_residual=residual,
                         sandwich_norm=s))


def _rho_for_flavor(op, rho, flavor):
    if flavor == "half_open":
        rho_proj, residual = project_off_kernel_rho(op, rho)
        if rho_proj.trace() <= 0:
            raise ValueError("state is entirely supported on ker A")
        return rho_proj, residual
    if flavor != "closed":
        raise ValueError(f"unknown interval flavor {flavor!r}")
    return rho, 0.0


def verify_rho_moser_integral(op: SpectralOperator, rho: DensityState, flavor="half_open",
                              tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Pointwise Moser check: integral of Fxinv(Drho/4||rho||) d nu_rho <= 4 E.

    ``half_open`` requires (and enforces by projection) rho = 0 on ker A;
    ``closed`` accepts any nonzero PSD rho, with the kernel-density cutoff
    completing the pointwise inverse.
    """
    rho.validate_psd()
    rho_use, residual = _rho_for_flavor(op, rho, flavor)
    norm22 = rho_use.norm_22()
    if norm22 <= 0:
        raise ValueError("state is zero")
    dens = rho_use.density()
    vals = []
    for x in range(op.space.npoints):
        if dens[x] <= 0:
            vals.append(0.0)
            continue
        fx = decay_profiles(op, "pointwise", flavor, point=op.space.points[x])
        vals.append(right_inverse_increasing(fx, dens[x] / (4.0 * norm22)) * dens[x])
    lhs, excluded = _finite_weighted_sum(vals, op.space.weights)
    rhs = 4.0 * rho_energy(op, rho_use)
    return InequalityReport(
        id="eq16-rho-moser-integral", lhs=lhs, rhs=rhs, exclusions=excluded,
        tol_scale=tol_scale,
        witness=_witness(op, flavor=flavor, rho=rho_use, kernel_residual=residual))


def _check_partition(op, partition):
    seen = set()
    for part in partition:
        idx = op.space.indices(part)
        if len(idx) == 0:
            raise ValueError("partition parts must be nonempty")
        overlap = seen.intersection(idx.tolist())
        if overlap:
            raise ValueError(f"partition parts overlap at indices {sorted(overlap)}")
        seen.update(idx.tolist())
    if len(seen) != op.space.npoints:
        raise ValueError("partition does not cover the space")


def verify_rho_moser_partition(op: SpectralOperator, rho: DensityState, partition,
                               flavor="half_open", tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Partitioned Moser check: sum_i FOmega_i^inv(nu_i/4||rho||) nu_i <= 4 E."""
    rho.validate_psd()
    _check_partition(op, partition)
    rho_use, residual = _rho_for_flavor(op, rho, flavor)
    norm22 = rho_use.norm_22()
    if norm22 <= 0:
        raise ValueError("state is zero")
    dens = rho_use.density()
    lhs = 0.0
    excluded = 0.0
    for part in partition:
        idx = op.space.indices(part)
        nu = float(dens[idx] @ op.space.weights[idx])
        if nu <= 0:
            continue
        f_om = decay_profiles(op, "region", flavor, region=part)
        inv = right_inverse_increasing(f_om, nu / (4.0 * norm22))
        if math.isinf(inv):
            excluded += nu
        else:
            lhs += inv * nu
    rhs = 4.0 * rho_energy(op, rho_use)
    return InequalityReport(
        id="eq17-rho-moser-partition", lhs=lhs, rhs=rhs, exclusions=excluded,
        tol_scale=tol_scale,
        witness=_witness(op, flavor=flavor, rho=rho_use, kernel_residual=residual,
                         parts=len(list(partition))))


# ---------------------------------------------------------------------------
# Faber-Krahn family
# ---------------------------------------------------------------------------


def _support_residual(op, rho, omega_idx):
    dens = rho.density()
    mask = np.ones(op.space.npoints, dtype=bool)
    mask[omega_idx] = False
    outside = float(dens[mask] @ op.space.weights[mask])
    total = rho.trace()
    return outside / total if total > 0 else 0.0


def verify_faber_krahn_mixed(op: SpectralOperator, rho: DensityState, omega,
                             flavor="closed", eps=0.5, support_tol=1e-9,
                             tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Faber-Krahn checks for a state confined to omega.

    Emits reports for the two sides of the trace bound
    (tau/4||rho|| <= F_Omega(4<A>) <= mu(Omega) F(4<A>)), the Dirichlet
    counting bound F^dim_Omega(lam) <= 4 mu(Omega) F(4 lam) swept over the
    Dirichlet spectrum, and its balanced variant
    (1-eps)^2 F^dim(lam) <= mu(Omega) F(lam/eps^2).

    The trace bound follows the requested flavor (with kernel projection
    for ``half_open``); the counting sweeps always use the closed-flavor
    profile, the unconditionally sound form.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    rho.validate_psd()
    omega_idx = op.space.indices(omega)
    rho_use, residual = _rho_for_flavor(op, rho, flavor)
    support_res = _support_residual(op, rho_use, omega_idx)
    if support_res > support_tol:
        raise ValueError(f"state leaks outside omega: residual {support_res:.3e}")
    mu_om = op.space.measure(omega)
    tau = rho_use.trace()
    norm22 = rho_use.norm_22()
    expect = rho_expectation(op, rho_use)
    f_om = decay_profiles(op, "region", flavor, region=omega)
    f_dens = decay_profiles(op, "density", flavor)
    mid = evaluate(f_om, 4.0 * expect)
    base = _witness(op, flavor=flavor, rho=rho_use,
                    omega=sorted(int(i) for i in omega_idx),
                    kernel_residual=residual, support_residual=support_res)
    reports = [
        InequalityReport(id="eq18-fk-domain", lhs=tau / (4.0 * norm22), rhs=mid,
                         witness=dict(base), tol_scale=tol_scale),
        InequalityReport(id="eq18-fk-volume", lhs=mid,
                         rhs=mu_om * evaluate(f_dens, 4.0 * expect),
                         witness=dict(base), tol_scale=tol_scale),
    ]
    # Dirichlet sweeps against the closed profile: sound for arbitrary
    # test spaces, which may overlap ker A
    f_closed = decay_profiles(op, "density", "closed")
    dprof = dirichlet_profile(op, omega)
    sweep = np.concatenate([[0.0], dprof.positions])
    worst19 = worst48 = None
    for lam in sweep:
        count = evaluate(dprof, lam)
        r19 = InequalityReport(
            id="eq19-fk-counting", lhs=count,
            rhs=4.0 * mu_om * evaluate(f_closed, 4.0 * lam),
            witness={**base, "lambda": float(lam), "flavor": "closed"},
            tol_scale=tol_scale)
        r48 = InequalityReport(
            id="eq48-fk-balanced", lhs=(1.0 - eps) ** 2 * count,
            rhs=mu_om * evaluate(f_closed, lam / eps**2),
            witness={**base, "lambda": float(lam), "eps": eps, "flavor": "closed"},
            tol_scale=tol_scale)
        if worst19 is None or r19.margin < worst19.margin:
            worst19 = r19
        if worst48 is None or r48.margin < worst48.margin:
            worst48 = r48
    reports.extend([worst19, worst48])
    return reports


# ---------------------------------------------------------------------------
# pure Moser / Nash / Faber-Krahn
# ---------------------------------------------------------------------------


def _pure_state_for_flavor(op, f, flavor):
    if flavor == "half_open":
        return project_off_kernel_state(op, f)
    if flavor != "closed":
        raise ValueError(f"unknown interval flavor {flavor!r}")
    return op.space.reshape_state(f).ravel(), 0.0


def verify_pure_moser_nash(op: SpectralOperator, f, which, flavor="half_open",
                           omega=None, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Pure-state Moser/Nash/Faber-Krahn family from the ultra profile.

    ``which`` is one of ``moser_l2``, ``moser_l1``, ``nash``,
    ``faber_krahn_pure`` (the last needs the supporting domain ``omega``).
    ``half_open`` projects f off ker A; ``closed`` takes f as is.
    """
    f_use, residual = _pure_state_for_flavor(op, f, flavor)
    fx = op.space.reshape_state(f_use)
    sq = np.einsum("xi,xi->x", fx, fx)
    w = op.space.weights
    norm2_sq = float(sq @ w)
    if norm2_sq <= 0:
        raise ValueError("state is zero (after kernel projection, if any)")
    norm1 = float(np.sqrt(sq) @ w)
    prof = decay_profiles(op, "ultra", flavor)
    e = energy(op, f_use)
    base = _witness(op, flavor=flavor, state=f_use, kernel_residual=residual,
                    which=which)
    if which == "moser_l2":
        vals = [right_inverse_increasing(prof, q / (4.0 * norm2_sq)) * q if q > 0 else 0.0
                for q in sq]
        lhs, excl = _finite_weighted_sum(vals, w)
        return InequalityReport(id="eq31-moser-l2", lhs=lhs, rhs=4.0 * e,
                                exclusions=excl, witness=base, tol_scale=tol_scale)
    if which == "moser_l1":
        vals = [right_inverse_increasing(prof, math.sqrt(q) / (2.0 * norm1)) * q
                if q > 0 else 0.0 for q in sq]
        lhs, excl = _finite_weighted_sum(vals, w)
        return InequalityReport(id="eq32-moser-l1", lhs=lhs, rhs=4.0 * e,
                                exclusions=excl, witness=base, tol_scale=tol_scale)
    if which == "nash":
        inv = right_inverse_increasing(prof, norm2_sq / (4.0 * norm1**2))
        lhs = norm2_sq * inv if math.isfinite(inv) else math.inf
        return InequalityReport(id="eq33-nash", lhs=lhs, rhs=8.0 * e,
                                witness=base, tol_scale=tol_scale)
    if which == "faber_krahn_pure":
        if omega is None:
            raise ValueError("faber_krahn_pure requires the supporting domain omega")
        omega_idx = op.space.indices(omega)
        mask = np.ones(op.space.npoints, dtype=bool)
        mask[omega_idx] = False
        if float(sq[mask] @ w[mask]) > 1e-9 * norm2_sq:
            raise ValueError("state leaks outside omega")
        mu_om = op.space.measure(omega)
        rhs = 4.0 * mu_om * evaluate(prof, 8.0 * e / norm2_sq)
        return InequalityReport(id="eq34-fk-pure", lhs=1.0, rhs=rhs,
                                witness={**base, "omega": sorted(int(i) for i in omega_idx)},
                                tol_scale=tol_scale)
    raise ValueError(f"unknown pure inequality {which!r}")


# ---------------------------------------------------------------------------
# polynomial-profile route
# ---------------------------------------------------------------------------


def _check_domination(profile, coeff, alpha):
    """(coeff, alpha) dominates a step profile iff it does at the
    breakpoints (power laws are increasing, steps right-continuous)."""
    step = profile.as_step()
    if profile.value_at_zero > 0:
        raise ValueError("polynomial domination needs the half-open profile")
    acc = 0.0
    for pos, inc in zip(step.positions, step.increments):
        acc += inc
        if acc > coeff * pos**alpha * (1.0 + 1e-12):
            raise ValueError(
                f"(C, alpha) does not dominate the profile: F({pos}) = {acc} "
                f"> {coeff * pos ** alpha}")


def verify_lp_sobolev(op: SpectralOperator, f, coeff, alpha,
                      tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Polynomial-decay Sobolev check ||f||_p <= 2 C1^(1/(2 alpha)) ||A^(1/2) f||_2.

    Requires (and checks) that F_ultra <= coeff * lam**alpha on its
    support; p = 2 alpha/(alpha - 1), C1 = coeff * alpha/(alpha - 1).
    """
    if alpha <= 1.0:
        raise ValueError("the p-norm Sobolev inequality requires alpha > 1")
    _check_domination(decay_profiles(op, "ultra", "half_open"), coeff, alpha)
    f_proj, residual = project_off_kernel_state(op, f)
    e = energy(op, f_proj)
    if e <= 0:
        raise ValueError("state has no energy after kernel projection")
    p = 2.0 * alpha / (alpha - 1.0)
    c1 = coeff * alpha / (alpha - 1.0)
    fx = op.space.reshape_state(f_proj)
    norms = np.sqrt(np.einsum("xi,xi->x", fx, fx))
    lhs = float((norms**p @ op.space.weights) ** (1.0 / p))
    rhs = 2.0 * c1 ** (1.0 / (2.0 * alpha)) * math.sqrt(e)
    return InequalityReport(
        id="eq1-lp-sobolev", lhs=lhs, rhs=rhs, tol_scale=tol_scale,
        witness=_witness(op, state=f_proj, kernel_residual=residual,
                         C=coeff, alpha=alpha, p=p))


def polynomial_consequences(coeff, alpha, op: SpectralOperator, states,
                            omega=None, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Polynomial consequences of the mixed Sobolev inequality.

    For the span V of the given states (orthonormalized off ker A):
    the collective density bound, the dimension-per-measure bound with
    C3 = 4^alpha alpha/(alpha-1) coeff, and the Dirichlet repartition
    bound over omega (defaults to the whole space).  Domination of the
    density profile by coeff*lam**alpha is checked first.
    """
    if alpha <= 1.0:
        raise ValueError("polynomial consequences require alpha > 1")
    _check_domination(decay_profiles(op, "density", "half_open"), coeff, alpha)
    w = op.space.weight_vector()
    basis = []
    for f in states:
        v, _ = project_off_kernel_state(op, f)
        for b in basis:
            v = v - b * float((w * b) @ v)
        norm = math.sqrt(float((w * v) @ v))
        if norm > 1e-10:
            basis.append(v / norm)
    if not basis:
        raise ValueError("states span nothing outside ker A")
    vmat = np.stack(basis, axis=1)
    nstates = vmat.shape[1]
    compressed = vmat.T @ (w[:, None] * (op.matrix @ vmat))
    lam = float(np.linalg.eigvalsh(0.5 * (compressed + compressed.T))[-1])
    energies = [energy(op, vmat[:, j]) for j in range(nstates)]
    c1 = coeff * alpha / (alpha - 1.0)
    c2 = 4.0 ** (alpha / (alpha - 1.0)) * c1 ** (1.0 / (alpha - 1.0))
    c3 = 4.0**alpha * alpha / (alpha - 1.0) * coeff
    n, h = op.space.npoints, op.space.fiber_dim
    psi = vmat.reshape(n, h, nstates)
    dens = np.einsum("xim,xim->x", psi, psi)
    lhs11 = float((dens ** (alpha / (alpha - 1.0))) @ op.space.weights)
    base = _witness(op, C=coeff, alpha=alpha, dim=nstates, lam=lam)
    reports = [
        InequalityReport(id="eq11-collective-density", lhs=lhs11,
                         rhs=c2 * lam ** (1.0 / (alpha - 1.0)) * float(sum(energies)),
                         witness=dict(base), tol_scale=tol_scale),
        InequalityReport(id="eq11-collective-uniform", lhs=lhs11,
                         rhs=c2 * nstates * lam ** (alpha / (alpha - 1.0)),
                         witness=dict(base), tol_scale=tol_scale),
    ]
    om = list(omega) if omega is not None else list(op.space.points)
    mu_om = op.space.measure(om)
    reports.append(InequalityReport(
        id="eq12-dim-bound", lhs=nstates / mu_om, rhs=c3 * lam**alpha,
        witness=dict(base), tol_scale=tol_scale))
    # repartition bound over the kernel-free Dirichlet spectrum of omega
    eigs = dirichlet_counting_kernel_free(op, om)
    worst = None
    for k, lam_k in enumerate(eigs, start=1):
        if lam_k <= 0:
            continue
        rep = InequalityReport(
            id="eq13-dirichlet-repartition", lhs=float(k),
            rhs=mu_om * c3 * float(lam_k)**alpha,
            witness={**base, "lambda": float(lam_k)}, tol_scale=tol_scale)
        if worst is None or rep.margin < worst.margin:
            worst = rep
    if worst is not None:
        reports.append(worst)
    return reports


# ---------------------------------------------------------------------------
# heat versus spectral comparison
# ---------------------------------------------------------------------------


def _lower_bound_m(op, t_checks, refine=2048):
    """Guaranteed lower bounds for M(t) = int_t^inf L at the check points.

    Midpoint sums underestimate the convex heat decay; the cut tail keeps
    the bound one-sided.  All L evaluations are exact and vectorized.
    """
    lam_min = op.lambda_min_positive()
    t_end = 40.0 / lam_min
    out = []
    for t in t_checks:
        if t >= t_end:
            out.append(0.0)
            continue
        grid = np.linspace(t, t_end, refine + 1)
        mids = 0.5 * (grid[1:] + grid[:-1])
        vals = evaluate_heat_decay(op, mids, "ultra")
        out.append(float(vals @ np.diff(grid)))
    return np.asarray(out)


def compare_heat_spectral(op: SpectralOperator, ngrid=50,
                          tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Heat-versus-spectral comparisons on a log t-grid.

    Checks L(t) <= Laplace(dF)(t) with L exact, and M(t) <= Laplace(dG)(t)
    with M bounded from below so exact-equality cases pass at the additive
    tolerance.  For invariant operators the reverse group inequalities
    Laplace(dF) <= h L and G(y) <= h e M(1/y) are added, with M in exact
    closed form (there L(t) = Laplace(dF)(t) termwise).
    """
    f = decay_profiles(op, "ultra", "half_open")
    if f.positions.size == 0:
        raise ValueError("operator has no positive spectrum")
    g = g_transform(f)
    lam_min, lam_max = op.lambda_min_positive(), op.norm
    ts = np.geomspace(0.01 / lam_max, 5.0 / lam_min, ngrid)
    l_vals = evaluate_heat_decay(op, ts, "ultra")
    worst49 = None
    for t, lv in zip(ts, l_vals):
        rep = InequalityReport(
            id="eq49-heat-vs-laplace", lhs=float(lv), rhs=laplace_stieltjes(f, float(t)),
            witness=_witness(op, t=float(t)), tol_scale=tol_scale)
        if worst49 is None or rep.margin < worst49.margin:
            worst49 = rep

    def m_closed(t):
        return float(sum(c * math.exp(-r * t) / r
                         for c, r in zip(f.increments, f.positions)))

    m_vals = (np.array([m_closed(float(t)) for t in ts]) if op.invariant
              else _lower_bound_m(op, ts))
    worst50 = None
    for t, mv in zip(ts, m_vals):
        rep = InequalityReport(
            id="eq50-m-vs-laplace", lhs=float(mv), rhs=laplace_stieltjes(g, float(t)),
            witness=_witness(op, t=float(t)), tol_scale=tol_scale)
        if worst50 is None or rep.margin < worst50.margin:
            worst50 = rep
    reports = [worst49, worst50]
    if op.invariant:
        h = op.space.fiber_dim
        worst_rev = None
        for t, lv in zip(ts, l_vals):
            rep = InequalityReport(
                id="eq49-group-reverse", lhs=laplace_stieltjes(f, float(t)),
                rhs=h * float(lv), witness=_witness(op, t=float(t)), tol_scale=tol_scale)
            if worst_rev is None or rep.margin < worst_rev.margin:
                worst_rev = rep
        reports.append(worst_rev)
        worst_gm = None
        for y in np.geomspace(lam_min / 4.0, 4.0 * lam_max, ngrid):
            rep = InequalityReport(
                id="prop32-g-vs-m", lhs=evaluate(g, float(y)),
                rhs=h * math.e * m_closed(1.0 / float(y)),
                witness=_witness(op, y=float(y)), tol_scale=tol_scale)
            if worst_gm is None or rep.margin < worst_gm.margin:
                worst_gm = rep
        reports.append(worst_gm)
    return reports


# ---------------------------------------------------------------------------
# Sobolev-to-Faber-Krahn route
# ---------------------------------------------------------------------------


def verify_sobolev_to_fk(op: SpectralOperator, rho: DensityState, omega,
                         support_tol=1e-9, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Checks along the Sobolev-to-Faber-Krahn route.

    The trace bound tau(rho) <= 8 mu(Omega) s G(8 <A>), the counting bound
    over the kernel-free Dirichlet spectrum F^dim(lam) <= 8 mu(Omega) lam
    G(8 lam), and the pointwise comparison F(lam) <= lam G(lam) at the
    profile breakpoints.
    """
    rho.validate_psd()
    omega_idx = op.space.indices(omega)
    rho_use, residual = _rho_for_flavor(op, rho, "half_open")
    support_res = _support_residual(op, rho_use, omega_idx)
    if support_res > support_tol:
        raise ValueError(f"state leaks outside omega: residual {support_res:.3e}")
    f_dens = decay_profiles(op, "density", "half_open")
    g = g_transform(f_dens)
    mu_om = op.space.measure(omega)
    s = sandwich_norm(op, rho_use)
    expect = rho_expectation(op, rho_use)
    base = _witness(op, flavor="half_open", rho=rho_use,
                    omega=sorted(int(i) for i in omega_idx),
                    kernel_residual=residual, support_residual=support_res)
    reports = [InequalityReport(
        id="eq52-sobolev-fk", lhs=rho_use.trace(),
        rhs=8.0 * mu_om * s * evaluate(g, 8.0 * expect),
        witness=dict(base), tol_scale=tol_scale)]
    eigs = dirichlet_counting_kernel_free(op, omega)
    zero_tol = op.kernel_threshold * max(op.norm, 1.0)
    worst53 = None
    count = 0
    for lam in eigs:
        count += 1
        if lam <= zero_tol:
            continue
        rep = InequalityReport(
            id="eq53-fk-counting-g", lhs=float(count),
            rhs=8.0 * mu_om * float(lam) * evaluate(g, 8.0 * float(lam)),
            witness={**base, "lambda": float(lam)}, tol_scale=tol_scale)
        if worst53 is None or rep.margin < worst53.margin:
            worst53 = rep
    if worst53 is not None:
        reports.append(worst53)
    worst34 = None
    for pos in f_dens.positions:
        rep = InequalityReport(
            id="prop34-f-vs-lamg", lhs=evaluate(f_dens, float(pos)),
            rhs=float(pos) * evaluate(g, float(pos)),
            witness={**base, "lambda": float(pos)}, tol_scale=tol_scale)
        if worst34 is None or rep.margin < worst34.margin:
            worst34 = rep
    if worst34 is not None:
        reports.append(worst34)
    return reports


def verify_integral_dominates_discrete(op: SpectralOperator, rho: DensityState,
                                       partition, flavor="half_open",
                                       tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Per-part check that the integral Moser form dominates the discrete
    one: FOmega^inv(nu/8||rho||) nu <= 2 * (integral over the part).
    Returns the worst part's report."""
    rho.validate_psd()
    _check_partition(op, partition)
    rho_use, residual = _rho_for_flavor(op, rho, flavor)
    norm22 = rho_use.norm_22()
    if norm22 <= 0:
        raise ValueError("state is zero")
    dens = rho_use.density()
    worst = None
    for pi, part in enumerate(partition):
        idx = op.space.indices(part)
        nu = float(dens[idx] @ op.space.weights[idx])
        if nu <= 0:
            continue
        f_om = decay_profiles(op, "region", flavor, region=part)
        inv = right_inverse_increasing(f_om, nu / (8.0 * norm22))
        lhs = inv * nu if math.isfinite(inv) else math.inf
        rhs_sum = 0.0
        for x in idx:
            if dens[x] <= 0:
                continue
            fx = decay_profiles(op, "pointwise", flavor, point=op.space.points[x])
            invx = right_inverse_increasing(fx, dens[x] / (4.0 * norm22))
            if math.isfinite(invx):
                rhs_sum += invx * dens[x] * op.space.weights[x]
        rep = InequalityReport(
            id="eq55-integral-dominates", lhs=lhs, rhs=2.0 * rhs_sum,
            witness=_witness(op, flavor=flavor, rho=rho_use, part=pi,
                             kernel_residual=residual),
            tol_scale=tol_scale)
        if worst is None or rep.margin < worst.margin:
            worst = rep
    if worst is None:
        raise ValueError("state has no mass on any part")
    return worst


# ---------------------------------------------------------------------------
# seeded random instances and sweeps
# ---------------------------------------------------------------------------


def random_instance(seed, n_range=(4, 40), p_range=(0.15, 0.9)):
    """Deterministic random (operator, states) bundle for soundness sweeps."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    p = float(rng.uniform(*p_range))
    op = ops.erdos_renyi_laplacian(n, p, rng)
    f = rng.standard_normal(n)
    k = int(rng.integers(1, n + 1))
    b = rng.standard_normal((n, k))
    rho = DensityState(op.space, b @ b.T / k)
    perm = rng.permutation(n)
    nparts = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(nparts - 1, n - 1), replace=False))
    bounds = np.concatenate([[0], cuts, [n]])
    partition = [perm[a:b].tolist() for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    om_size = int(rng.integers(1, n + 1))
    omega = np.sort(rng.choice(n, size=om_size, replace=False)).tolist()
    return {
        "seed": None, "op": op, "f": f, "rho": rho, "partition": partition,
        "omega": omega,
        "rho_om": _omega_supported_state(op, omega, rng),
        "rho_om_kfree": _omega_supported_kernel_free_state(op, omega, rng),
    }


def _omega_supported_state(op, omega, rng):
    idx = op.space.dof_indices(omega)
    b = rng.standard_normal((len(idx), min(3, len(idx))))
    mat = np.zeros((op.space.dim, op.space.dim))
    mat[np.ix_(idx, idx)] = b @ b.T
    return DensityState(op.space, mat)


def _omega_supported_kernel_free_state(op, omega, rng):
    """PSD state supported in omega, range orthogonal to ker A; None if the
    constrained subspace is trivial."""
    idx = op.space.dof_indices(omega)
    w = op.space.weight_vector()
    kernel = op.vectors[:, op.kernel_flags]
    constraints = (kernel.T * w[None, :])[:, idx]
    if constraints.size:
        svals = np.linalg.svd(constraints, compute_uv=False)
        _, _, vt = np.linalg.svd(constraints)
        rank = int(np.sum(svals > 1e-10 * max(1.0, float(svals.max()) if svals.size else 0.0)))
        null = vt[rank:].T
    else:
        null = np.eye(len(idx))
    if null.shape[1] == 0:
        return None
    coeff = rng.standard_normal((null.shape[1], min(3, null.shape[1])))
    local = null @ coeff
    mat = np.zeros((op.space.dim, op.space.dim))
    mat[np.ix_(idx, idx)] = local @ local.T
    return DensityState(op.space, mat)


def verify_all(instance, tol_scale=DEFAULT_ABS_TOL_SCALE):
    """Run the full verifier battery on one instance; returns the reports."""
    op = instance["op"]
    f = instance["f"]
    rho = instance["rho"]
    reports = []
    reports.append(verify_h_sobolev(op, f, tol_scale))
    reports.append(verify_n_sobolev(op, f, tol_scale))
    reports.append(verify_rho_sobolev(op, rho, tol_scale))
    for flavor in ("half_open", "closed"):
        reports.append(verify_rho_moser_integral(op, rho, flavor, tol_scale))
        reports.append(verify_rho_moser_partition(op, rho, instance["partition"],
                                                  flavor, tol_scale))
        reports.append(verify_integral_dominates_discrete(
            op, rho, instance["partition"], flavor, tol_scale))
        reports.append(verify_pure_moser_nash(op, f, "moser_l2", flavor, None, tol_scale))
        reports.append(verify_pure_moser_nash(op, f, "moser_l1", flavor, None, tol_scale))
        reports.append(verify_pure_moser_nash(op, f, "nash", flavor, None, tol_scale))
    omega = instance["omega"]
    f_om = np.zeros(op.space.npoints)
    f_om[op.space.indices(omega)] = 1.0 + np.arange(len(omega))
    reports.append(verify_pure_moser_nash(op, f_om, "faber_krahn_pure", "closed",
                                          omega, tol_scale))
    reports.extend(verify_faber_krahn_mixed(op, instance["rho_om"], omega,
                                            "closed", 0.5, 1e-9, tol_scale))
    kfree = instance["rho_om_kfree"]
    if kfree is not None and kfree.trace() > 1e-10:
        reports.extend(verify_faber_krahn_mixed(op, kfree, omega,
                                                "half_open", 0.5, 1e-9, tol_scale))
        reports.extend(verify_sobolev_to_fk(op, kfree, omega, 1e-9, tol_scale))
    reports.extend(compare_heat_spectral(op, 25, tol_scale))
    return reports


def run_sweep(trials, seed=0, threads=1, tol_scale=DEFAULT_ABS_TOL_SCALE,
              verify=verify_all):
    """Seeded soundness sweep; deterministic across thread counts.

    Instances come from ``SeedSequence(seed).spawn(trials)`` and reports
    are emitted in instance order regardless of scheduling.
    """
    children = np.random.SeedSequence(seed).spawn(trials)

    def one(i):
        return verify(random_instance(children[i]), tol_scale)

    if threads <= 1:
        batches = [one(i) for i in range(trials)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            batches = list(pool.map(one, range(trials)))
    reports = []
    for i, batch in enumerate(batches):
        for rep in batch:
            rep.seed = i
            rep.witness["sweep_seed"] = seed
        reports.extend(batch)
    return reports
