"""Amplifier design: certified decay rates and safe amplifier intervals.

A Lyapunov argument certifies the energy envelope E(t) <= M*E(0)*exp(-sigma*t)
whenever the perturbation weight delta clears three caps: the material cap
1/(L*eta) and one cap per feedback channel.  The channel caps are

    delta_cap_v(xi1, eps) = 2*xi1*alpha1 / (rho*alpha1 + (1+eps)*xi1^2)
    delta_cap_p(xi2, eps) = 2*xi2*eps*alpha1*beta
                            / (eps*mu*alpha1*beta + (eps*alpha + gamma^2*beta)*xi2^2)

divided by L, with eps a free Young-inequality parameter.  The best certified
rate sigma_max = 1/(4*eta*L) is reached at delta = 1/(2*eta*L), which is
admissible exactly when each cap is >= 1/(2*eta); solving cap = 1/(2*eta) for
the amplifier gives the safe interval per channel.

All quadratic roots here use the cancellation-stable form (larger root from
the standard formula, smaller from the root product).  The naive smaller root
loses ~3 digits at realistic constants, which is visible against the 1e-9
endpoint identity checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .materials import DerivedConstants, MaterialParams


@dataclass(frozen=True)
class FeedbackDesign:
    """Safe amplifier intervals and the certificate they carry.

    (c1_lo, c1_hi)  safe interval for the velocity amplifier xi1
    (c2_lo, c2_hi)  safe interval for the charge amplifier xi2
    xi1_star, xi2_star  channel-optimal amplifiers (cap maximizers)
    sigma, bigM, delta  certificate: E <= bigM*E0*exp(-sigma*t) at weight delta
    """

    epsilon: float
    c1_lo: float
    c1_hi: float
    c2_lo: float
    c2_hi: float
    xi1_star: float
    xi2_star: float
    sigma: float
    bigM: float
    delta: float

    def __post_init__(self):
        # Interval/certificate sanity; provable for every admissible epsilon.
        assert self.c1_lo < self.xi1_star < self.c1_hi
        assert self.c2_lo < self.xi2_star < self.c2_hi
        assert self.bigM >= 1.0 and self.sigma > 0.0

    def contains(self, xi1: float, xi2: float) -> bool:
        return (self.c1_lo < xi1 < self.c1_hi) and (self.c2_lo < xi2 < self.c2_hi)


@dataclass(frozen=True)
class DeltaBudget:
    """Channel cap values at given amplifiers and the resulting delta ceiling."""

    f1_val: float
    f2_val: float
    delta_max: float


@dataclass(frozen=True)
class VerifyReport:
    """Per-channel verdicts for a proposed amplifier pair."""

    xi1_in_interval: bool
    xi2_in_interval: bool
    f1_val: float
    f2_val: float
    threshold: float
    ok: bool


def _stable_roots(A: float, B: float, C: float) -> tuple[float, float]:
    """Roots of A*x^2 - B*x + C with A, B, C > 0 and positive discriminant,
    returned (lo, hi) without subtractive cancellation."""
    disc = B * B - 4.0 * A * C
    if disc <= 0.0:
        raise DomainError("quadratic has no separated positive roots")
    q = B + math.sqrt(disc)
    return 2.0 * C / q, q / (2.0 * A)


def delta_cap_v(params: MaterialParams, consts: DerivedConstants,
                xi1: float, eps: float) -> float:
    """Velocity-channel cap on delta*L.  Requires xi1 > 0, eps > 0."""
    if not xi1 > 0.0:
        raise DomainError(f"xi1 must be positive, got {xi1!r}")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    a1 = consts.alpha1
    return 2.0 * xi1 * a1 / (params.rho * a1 + (1.0 + eps) * xi1**2)


def delta_cap_p(params: MaterialParams, consts: DerivedConstants,
                xi2: float, eps: float) -> float:
    """Charge-channel cap on delta*L.  Requires xi2 > 0, eps > 0."""
    if not xi2 > 0.0:
        raise DomainError(f"xi2 must be positive, got {xi2!r}")
    if not eps > 0.0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    a1, beta, gamma = consts.alpha1, params.beta, params.gamma
    num = 2.0 * xi2 * eps * a1 * beta
    den = eps * params.mu * a1 * beta + (eps * params.alpha + gamma**2 * beta) * xi2**2
    return num / den


def eps_ceiling(params: MaterialParams, consts: DerivedConstants, xi1: float) -> float:
    """Largest Young parameter for which the velocity channel at gain xi1 can
    still clear the optimal threshold 1/(2*eta).  Requires xi1 > 0; the value
    is <= 0 when xi1 lies outside the channel's workable range."""
    if not xi1 > 0.0:
        raise DomainError(f"xi1 must be positive, got {xi1!r}")
    a1, eta = consts.alpha1, consts.eta
    return (4.0 * a1 * xi1 * eta - params.rho * a1 - xi1**2) / xi1**2


def eps_ceiling_zeros(params: MaterialParams, consts: DerivedConstants) -> tuple[float, float]:
    """The two positive gains where eps_ceiling crosses zero."""
    return _stable_roots(1.0, 4.0 * consts.alpha1 * consts.eta,
                         params.rho * consts.alpha1)


def eps_floor(params: MaterialParams, consts: DerivedConstants, xi2: float) -> float:
    """Smallest Young parameter for which the charge channel at gain xi2 can
    clear 1/(2*eta).  Defined only between the poles of the underlying
    rational function; gains outside are rejected."""
    lo, hi = eps_floor_domain(params, consts)
    if not (lo < xi2 < hi):
        raise DomainError(
            f"xi2={xi2!r} outside the admissible gain range ({lo!r}, {hi!r})"
        )
    a1, beta = consts.alpha1, params.beta
    num = beta * params.gamma**2 * xi2**2
    den = 4.0 * a1 * beta * xi2 * consts.eta - params.mu * a1 * beta - params.alpha * xi2**2
    return num / den


def eps_floor_domain(params: MaterialParams, consts: DerivedConstants) -> tuple[float, float]:
    """Pole pair of eps_floor: the gains where its denominator vanishes."""
    a1, beta = consts.alpha1, params.beta
    return _stable_roots(params.alpha, 4.0 * a1 * beta * consts.eta,
                         params.mu * a1 * beta)


def epsilon_bounds(params: MaterialParams, consts: DerivedConstants) -> tuple[float, float]:
    """Open interval of Young parameters for which both safe intervals exist.

    Always brackets [1/3, 3]: the lower bound is at most beta*gamma^2/(3*alpha)
    and the upper at least 3, both consequences of the eta definition.
    """
    a1, eta = consts.alpha1, consts.eta
    lo = params.beta * params.gamma**2 * params.mu / (4.0 * a1 * params.beta * eta**2
                                                      - params.alpha * params.mu)
    hi = (4.0 * a1 * eta**2 - params.rho) / params.rho
    return lo, hi


def amplifier_intervals(params: MaterialParams, consts: DerivedConstants,
                        eps: float = 1.0) -> FeedbackDesign:
    """Safe amplifier intervals achieving sigma_max, for an admissible eps.

    Endpoints solve delta_cap = 1/(2*eta) per channel:

        (1+eps)*x^2 - 4*eta*alpha1*x + rho*alpha1 = 0              (velocity)
        (eps*alpha + gamma^2*beta)*x^2 - 4*eta*eps*alpha1*beta*x
                                       + eps*mu*alpha1*beta = 0    (charge)

    The cap maximizers xi_star = rho/(2*eta), mu/(2*eta) always lie strictly
    inside their intervals.
    """
    lo, hi = epsilon_bounds(params, consts)
    if not (lo < eps < hi):
        raise DomainError(
            f"eps={eps!r} outside the admissible open interval ({lo!r}, {hi!r})"
        )
    a1, eta = consts.alpha1, consts.eta
    beta = params.beta

    c1_lo, c1_hi = _stable_roots(1.0 + eps, 4.0 * eta * a1, params.rho * a1)
    c2_lo, c2_hi = _stable_roots(
        eps * params.alpha + params.gamma**2 * beta,
        4.0 * eta * eps * a1 * beta,
        eps * params.mu * a1 * beta,
    )

    delta = 1.0 / (2.0 * eta * params.L)
    sigma, bigM = lyapunov_rate(params, consts, delta)
    return FeedbackDesign(
        epsilon=eps,
        c1_lo=c1_lo, c1_hi=c1_hi,
        c2_lo=c2_lo, c2_hi=c2_hi,
        xi1_star=params.rho / (2.0 * eta),
        xi2_star=params.mu / (2.0 * eta),
        sigma=sigma, bigM=bigM, delta=delta,
    )


def lyapunov_rate(params: MaterialParams, consts: DerivedConstants,
                  delta: float) -> tuple[float, float]:
    """Certified (sigma, M) for a perturbation weight delta in (0, 1/(eta*L)).

    sigma(delta) = delta*(1 - delta*L*eta) is concave with maximum sigma_max
    at delta = 1/(2*eta*L), where M = 3.
    """
    cap = 1.0 / (consts.eta * params.L)
    if not (0.0 < delta < cap):
        raise DomainError(f"delta={delta!r} outside the open interval (0, {cap!r})")
    r = delta * params.L * consts.eta
    return delta * (1.0 - r), (1.0 + r) / (1.0 - r)


def delta_budget(params: MaterialParams, consts: DerivedConstants,
                 xi1: float, xi2: float, eps: float = 1.0) -> DeltaBudget:
    """Delta ceiling at a specific amplifier pair: the material cap and both
    channel caps, scaled by 1/L."""
    f1 = delta_cap_v(params, consts, xi1, eps)
    f2 = delta_cap_p(params, consts, xi2, eps)
    return DeltaBudget(
        f1_val=f1,
        f2_val=f2,
        delta_max=min(1.0 / consts.eta, f1, f2) / params.L,
    )


def verify_design(params: MaterialParams, consts: DerivedConstants,
                  xi1: float, xi2: float, eps: float = 1.0) -> VerifyReport:
    """Check a proposed amplifier pair against the safe intervals.

    The interval verdict and the direct cap inequality f > 1/(2*eta) are the
    same quadratic read two ways; they agree except within roundoff of the
    endpoints.  The report carries the interval verdict.
    """
    design = amplifier_intervals(params, consts, eps)
    thr = 1.0 / (2.0 * consts.eta)
    f1 = delta_cap_v(params, consts, xi1, eps) if xi1 > 0.0 else 0.0
    f2 = delta_cap_p(params, consts, xi2, eps) if xi2 > 0.0 else 0.0
    in1 = design.c1_lo < xi1 < design.c1_hi
    in2 = design.c2_lo < xi2 < design.c2_hi
    return VerifyReport(
        xi1_in_interval=in1,
        xi2_in_interval=in2,
        f1_val=f1,
        f2_val=f2,
        threshold=thr,
        ok=in1 and in2,
    )
