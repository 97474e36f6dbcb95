"""Time integration of the semi-discrete system and decay-rate extraction.

Two propagators:

* `integrate` -- implicit midpoint on the second-order form.  The step solve
  is written as one SPD system per step (Jacobi-equilibrated Cholesky), which
  preserves the discrete energy at zero amplifiers to roundoff transport and
  keeps the trace monotone at positive amplifiers.  Midpoint is the right
  tool up to moderate stiffness, but it under-damps branches it cannot
  resolve: damping of a mode at frequency w is suppressed by ~4/(w*dt)^2 once
  w*dt >> 1.  A warning is emitted when dt leaves the fastest mode
  unresolved.
* `modal_trace` -- exact propagation of the semi-discrete flow through the
  eigendecomposition of the generator.  dt-free; the sample times only decide
  where the trace is evaluated.  This is the reference for stiff amplifier
  pairs (realistic constants put the fastest mode near 1e13 rad/s, far beyond
  any feasible midpoint step).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError
from .orfd import OrfdSystem, StateVector, discrete_energy

# Ratio of E_h(0) used as the positivity floor when fitting log-energy.
ENERGY_FLOOR_ULPS = 1e3 * np.finfo(float).eps


@dataclass(frozen=True)
class EnergyTrace:
    """Sampled energy and boundary rates along one run."""

    times: np.ndarray
    energies: np.ndarray
    boundary_v_dot: np.ndarray
    boundary_p_dot: np.ndarray


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential rate of a trace over a fit window.

    sigma_fit is the negated slope of log E(t); window is the time span
    actually used (it shrinks when the trace reaches the positivity floor,
    in which case truncated is set).
    """

    sigma_fit: float
    r_squared: float
    window: tuple[float, float]
    truncated: bool = False


@dataclass(frozen=True)
class EnvelopeReport:
    """Outcome of checking E(t) <= bigM * E(0) * exp(-sigma t)."""

    ok: bool
    min_margin: float
    t_at_min: float


@dataclass(frozen=True)
class IntegrationResult:
    trace: EnergyTrace
    final_state: StateVector
    states: np.ndarray | None = None  # (samples, 4(N+1)) when requested


class _MidpointStepper:
    """One midpoint step in second-order form.

    With KM = C1 (x) M, KA = C2 (x) A_h, KB = C3 (x) B and u = y':

        S u+ = R u - dt * KA y,   y+ = y + (dt/2) (u + u+)
        S = KM + (dt^2/4) KA + (dt/2) KB,   R = KM - (dt^2/4) KA - (dt/2) KB.

    S is SPD for nonnegative amplifiers; solved via Cholesky after symmetric
    Jacobi scaling.  Algebraically identical to midpoint on the first-order
    generator, but roughly 10x better on energy conservation and trace
    monotonicity at stiff amplifiers than the LU form.
    """

    def __init__(self, sys: OrfdSystem, dt: float):
        KM = np.kron(sys.C1, sys.M_mat)
        self.KA = np.kron(sys.C2, sys.Ah_mat)
        KB = np.kron(sys.C3, sys.B_mat)
        S = KM + 0.25 * dt * dt * self.KA + 0.5 * dt * KB
        self.R = KM - 0.25 * dt * dt * self.KA - 0.5 * dt * KB
        self.dt = dt
        self.d = 1.0 / np.sqrt(np.diag(S))
        try:
            self.cho = sla.cho_factor((S * self.d).T * self.d, lower=False)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"midpoint step matrix is not SPD: {exc}") from exc

    def step(self, y: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rhs = self.R @ u - self.dt * (self.KA @ y)
        u_new = self.d * sla.cho_solve(self.cho, self.d * rhs)
        return y + 0.5 * self.dt * (u + u_new), u_new


def generator_radius_estimate(sys: OrfdSystem, iters: int = 40) -> float:
    """Spectral-radius estimate of the generator: ||A^k x||^(1/k) for one
    random x (Gelfand).

    The per-step norm growth oscillates over orders of magnitude on this
    rotation-like generator, so the geometric mean over the whole orbit is
    used, with the product accumulated in log space to dodge overflow.
    """
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(sys.A_op.shape[0])
    x /= np.linalg.norm(x)
    acc = 0.0
    for _ in range(iters):
        x = sys.A_op @ x
        nrm = np.linalg.norm(x)
        if nrm == 0.0:
            return 0.0
        acc += math.log(nrm)
        x /= nrm
    return math.exp(acc / iters)


def integrate(sys: OrfdSystem, state0: StateVector | np.ndarray, T: float,
              dt: float, keep_states: bool = False) -> IntegrationResult:
    """Implicit midpoint run over [0, T], sampling every step.

    Emits a warning when dt leaves the fastest generator mode unresolved
    (dt * radius > 0.2); the scheme stays stable but the unresolved branch
    keeps its energy.  Aborts on non-finite state.
    """
    if not (math.isfinite(T) and T > 0.0):
        raise DomainError(f"T must be positive, got {T!r}")
    if not (math.isfinite(dt) and dt > 0.0):
        raise DomainError(f"dt must be positive, got {dt!r}")
    n_steps = int(round(T / dt))
    if n_steps < 1:
        raise DomainError(f"T={T!r} is shorter than one step dt={dt!r}")

    radius = generator_radius_estimate(sys)
    if dt * radius > 0.2:
        warnings.warn(
            f"dt={dt:g} does not resolve the fastest mode (|mu| ~ {radius:.3e}); "
            "damping of unresolved branches is understated",
            RuntimeWarning, stacklevel=2)

    flat = state0.flat if isinstance(state0, StateVector) else np.asarray(state0, float)
    n = sys.N + 1
    if flat.shape != (4 * n,):
        raise DomainError(f"state has shape {flat.shape}, expected ({4 * n},)")
    y, u = flat[: 2 * n].copy(), flat[2 * n:].copy()

    stepper = _MidpointStepper(sys, dt)
    times = dt * np.arange(n_steps + 1)
    energies = np.empty(n_steps + 1)
    bv = np.empty(n_steps + 1)
    bp = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 4 * n)) if keep_states else None

    for k in range(n_steps + 1):
        state = np.concatenate([y, u])
        energies[k] = discrete_energy(sys, state)
        bv[k], bp[k] = u[n - 1], u[2 * n - 1]
        if states is not None:
            states[k] = state
        if not np.isfinite(energies[k]):
            raise RuntimeError(f"non-finite state at step {k} (t={times[k]:g}); aborting")
        if k < n_steps:
            y, u = stepper.step(y, u)

    trace = EnergyTrace(times=times, energies=energies,
                        boundary_v_dot=bv, boundary_p_dot=bp)
    return IntegrationResult(trace=trace,
                             final_state=StateVector.from_flat(np.concatenate([y, u])),
                             states=states)


def modal_trace(sys: OrfdSystem, state0: StateVector | np.ndarray, T: float,
                samples: int = 2001, keep_states: bool = False) -> IntegrationResult:
    """Exact semi-discrete flow sampled at `samples` points of [0, T].

    One dense eigendecomposition; any stiffness is fine.  Sampled energies
    carry eigenbasis roundoff of order 1e-7 * E(0) for strongly nonnormal
    amplifier pairs, so tiny upward wiggles between samples are expected.
    """
    if not (math.isfinite(T) and T > 0.0):
        raise DomainError(f"T must be positive, got {T!r}")
    if samples < 2:
        raise DomainError(f"need at least 2 samples, got {samples!r}")
    flat = state0.flat if isinstance(state0, StateVector) else np.asarray(state0, float)
    n = sys.N + 1
    if flat.shape != (4 * n,):
        raise DomainError(f"state has shape {flat.shape}, expected ({4 * n},)")

    lam, V = np.linalg.eig(sys.A_op)
    coeff = np.linalg.solve(V, flat.astype(complex))
    if not (np.all(np.isfinite(lam.view(float))) and np.all(np.isfinite(coeff.view(float)))):
        raise RuntimeError("eigendecomposition of the generator produced non-finite data")

    times = np.linspace(0.0, T, samples)
    # states[:, k] = V @ (coeff * exp(lam * t_k)), evaluated in one gemm
    phases = np.exp(np.outer(lam, times)) * coeff[:, None]
    states = np.real(V @ phases).T  # (samples, 4n)

    energies = np.empty(samples)
    for k in range(samples):
        energies[k] = discrete_energy(sys, states[k])
    trace = EnergyTrace(times=times, energies=energies,
                        boundary_v_dot=states[:, 3 * n - 1],
                        boundary_p_dot=states[:, 4 * n - 1])
    return IntegrationResult(trace=trace,
                             final_state=StateVector.from_flat(states[-1]),
                             states=states if keep_states else None)


def fit_decay(trace: EnergyTrace, window: tuple[float, float] = (0.1, 0.9)) -> DecayFit:
    """Least-squares slope of log E over the central window of the trace.

    Samples at or below the positivity floor 1e3*eps*E(0) end the usable
    trace; the fit then runs on the shortened window and is flagged.
    Requires at least 10 usable samples.
    """
    w_lo, w_hi = window
    if not (0.0 <= w_lo < w_hi <= 1.0):
        raise DomainError(f"window must satisfy 0 <= lo < hi <= 1, got {window!r}")
    t, E = np.asarray(trace.times), np.asarray(trace.energies)
    if E[0] <= 0.0:
        raise DomainError("trace starts at zero energy; nothing to fit")
    floor = ENERGY_FLOOR_ULPS * E[0]

    dead = np.nonzero(E <= floor)[0]
    truncated = dead.size > 0
    last = dead[0] if truncated else E.size
    t, E = t[:last], E[:last]

    T = trace.times[-1]
    mask = (t >= w_lo * T) & (t <= w_hi * T)
    if np.count_nonzero(mask) < 10:
        raise DomainError(
            f"only {np.count_nonzero(mask)} usable samples in the fit window; need >= 10"
        )
    ts, logE = t[mask], np.log(E[mask])
    slope, intercept = np.polyfit(ts, logE, 1)
    pred = slope * ts + intercept
    ss_res = float(np.sum((logE - pred) ** 2))
    ss_tot = float(np.sum((logE - logE.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(sigma_fit=-float(slope), r_squared=r2,
                    window=(float(ts[0]), float(ts[-1])), truncated=truncated)


def envelope_check(trace: EnergyTrace, sigma: float, bigM: float) -> EnvelopeReport:
    """Check E(t) <= bigM * E(0) * exp(-sigma t) at every sample.

    Margin is relative: 1 - E/envelope, minimized over the trace.
    """
    t, E = np.asarray(trace.times), np.asarray(trace.energies)
    env = bigM * E[0] * np.exp(-sigma * t)
    margin = 1.0 - E / env
    k = int(np.argmin(margin))
    return EnvelopeReport(ok=bool(margin[k] >= 0.0),
                          min_margin=float(margin[k]), t_at_min=float(t[k]))
