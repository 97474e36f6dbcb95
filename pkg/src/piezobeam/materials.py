"""Material parameters and derived constants for the coupled beam system.

The model couples longitudinal displacement v and electric charge p on a
beam clamped at x=0 and actuated at x=L:

    rho*v_tt = alpha*v_xx - gamma*beta*p_xx
    mu*p_tt  = -gamma*beta*v_xx + beta*p_xx

Well-posedness needs alpha1 = alpha - gamma^2*beta > 0.  Everything the
amplifier design depends on (the impedance constant eta, the two wave
slownesses, the maximal certified decay rate) is a closed form of the six
material constants and is computed here once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

CONFIG_KEYS = ("L", "rho", "mu", "alpha", "gamma", "beta")


@dataclass(frozen=True)
class MaterialParams:
    """Beam length and the five material constants.

    L      beam length [m]
    rho    mass density
    mu     magnetic permeability
    alpha  elastic stiffness
    gamma  piezoelectric coupling
    beta   impermittivity
    """

    L: float
    rho: float
    mu: float
    alpha: float
    gamma: float
    beta: float

    def __post_init__(self):
        for name in ("L", "rho", "mu", "alpha", "beta"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise DomainError(f"{name} must be positive and finite, got {val!r}")
        if not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be finite, got {self.gamma!r}")
        if not self.alpha1 > 0.0:
            raise DomainError(
                "need alpha - gamma^2*beta > 0 for hyperbolicity, got "
                f"{self.alpha1!r}"
            )

    @property
    def alpha1(self) -> float:
        return self.alpha - self.gamma**2 * self.beta


# Realistic piezoelectric ceramic constants used throughout the reference runs.
TABLE1 = MaterialParams(L=1.0, rho=6000.0, mu=1e-6, alpha=1e9, gamma=1e-3, beta=1e12)


@dataclass(frozen=True)
class DerivedConstants:
    """Closed-form constants derived from MaterialParams.

    alpha1      reduced stiffness alpha - gamma^2*beta
    eta         impedance combination controlling the certified rate
    zeta_minus  smaller characteristic slowness
    zeta_plus   larger characteristic slowness
    sigma_max   maximal certified decay rate 1/(4*eta*L)
    T_obs_min   observability time threshold 2L/max(zeta-,zeta+)
    """

    alpha1: float
    eta: float
    zeta_minus: float
    zeta_plus: float
    sigma_max: float
    T_obs_min: float


def derive_constants(params: MaterialParams) -> DerivedConstants:
    """Evaluate the derived constants.

    The slowness pair (zeta-, zeta+) solves z^4 - s*z^2 + q = 0 with
    s = alpha*mu/(alpha1*beta) + rho/alpha1 and q = rho*mu/(beta*alpha1).
    The smaller root is evaluated from the root product, not from the
    cancelling branch of the quadratic formula: at realistic constants the
    discriminant correction is ~1e-14 relative and the naive branch loses
    three digits.
    """
    L, rho, mu = params.L, params.rho, params.mu
    alpha, gamma, beta = params.alpha, params.gamma, params.beta
    a1 = params.alpha1

    cross = math.sqrt(mu * gamma**2 / a1)
    eta = cross + max(math.sqrt(rho / a1), math.sqrt(mu / beta))

    s = alpha * mu / (a1 * beta) + rho / a1
    q = rho * mu / (beta * a1)
    disc = s * s - 4.0 * q
    if disc < 0.0:  # roundoff at a degenerate double root
        disc = 0.0
    big = s + math.sqrt(disc)
    zeta_plus = math.sqrt(0.5 * big)
    zeta_minus = math.sqrt(2.0 * q / big)

    return DerivedConstants(
        alpha1=a1,
        eta=eta,
        zeta_minus=zeta_minus,
        zeta_plus=zeta_plus,
        sigma_max=1.0 / (4.0 * eta * L),
        T_obs_min=2.0 * L / max(zeta_minus, zeta_plus),
    )


def parse_config(text: str) -> MaterialParams:
    """Parse a `key = value` material config.

    Blank lines and `#` comments are ignored.  Exactly the six keys
    L, rho, mu, alpha, gamma, beta must appear, each once.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise DomainError(f"config line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val.strip())
        except ValueError:
            raise DomainError(f"config line {lineno}: bad number {val.strip()!r}") from None
    missing = [k for k in CONFIG_KEYS if k not in values]
    if missing:
        raise DomainError(f"config missing keys: {', '.join(missing)}")
    return MaterialParams(**values)


def format_config(params: MaterialParams) -> str:
    """Emit a config that parse_config round-trips bit-exactly."""
    lines = ["# piezobeam material parameters"]
    for key in CONFIG_KEYS:
        lines.append(f"{key} = {getattr(params, key)!r}")
    return "\n".join(lines) + "\n"
