"""Wave-speed theory for weakly asymmetric stacked clines.

With a small directional advantage eps, the standing front starts to
travel at speed c(eps) = c1 eps + o(eps). The first-order coefficient has
three equivalent forms computed here:

  * `c1_exact`: the height-space quadrature

        c1 = [int_0^1 (r/4S)(1 - e^{-y(u)}) du]
             / [int_0^1 sqrt(P(u)) e^{-y(u)} du],       y(u) = (4S/r)(u - u^2),

    with P the squared-slope law of the standing front.

  * `c1_series`: the small-S/r expansion
    (1/sqrt(S)) (1 + (4/15)(S/r) + (2/45)(S/r)^2); `c1_star` keeps the
    first-order term only.

  * `c_eps_from_profile`: the x-space ratio of weighted integrals along a
    constructed profile, which the height-space form derives from by the
    change of variable u = u0(x).

Limit cases with closed forms: a single cline travels at s/sqrt(S) with
an explicit tanh profile; fully linked clines (r = 0) behave as one locus
with doubled coefficients, giving 2s/sqrt(2S). Both bracket c1: for any
finite recombination 1/sqrt(S) < c1 < sqrt(2)/sqrt(S).

`solve_traveling_bvp` computes the genuinely nonlinear traveling wave by
Newton continuation on the discretized profile equation, with the phase
condition int (u - u0) u0' dx = 0 closing the system for the speed; it
is the independent check that c(eps)/eps -> c1 as eps -> 0.

`compare_speeds` runs the full (p, q, D) system and reports measured
front speeds against the predictions; rescaled-frame speeds convert to
the original frame by the factor sigma/sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
import scipy.sparse as sps
from scipy.sparse.linalg import spsolve

from .errors import (
    NewtonDivergenceError,
    ProfileTooShortError,
    QuadratureError,
)
from .genetics import FitnessParams
from .standing import (
    WaveProfile,
    bistable_f,
    bistable_f_prime,
    first_integral_P,
    logistic_g,
    profile_from_quadrature,
)

# Fraction of an integral the exponential tail corrections may carry
# before the profile is deemed too short to trust.
TAIL_WEIGHT_LIMIT = 1e-8


def c1_exact(S: float, r: float, quad_tol: float = 1e-10) -> float:
    """First-order speed coefficient by adaptive quadrature in height space.

    Raises:
        QuadratureError: the integrator's error estimate exceeds the
            requested relative tolerance.
    """
    if S <= 0 or r <= 0:
        raise ValueError(f"need S > 0 and r > 0, got S={S}, r={r}")
    k = 4.0 * S / r

    def numerator(u):
        return -(r / (4.0 * S)) * math.expm1(-k * (u - u * u))

    def denominator(u):
        w = u - u * u
        return math.sqrt(max(first_integral_P(u, S, r), 0.0)) * math.exp(-k * w)

    num, err_n = quad(numerator, 0.0, 1.0, epsabs=0.0, epsrel=quad_tol, limit=200)
    den, err_d = quad(denominator, 0.0, 1.0, epsabs=0.0, epsrel=quad_tol, limit=200)
    if err_n > 10.0 * quad_tol * abs(num) or err_d > 10.0 * quad_tol * abs(den):
        raise QuadratureError(
            f"speed quadrature did not converge to {quad_tol}: "
            f"errors {err_n / abs(num):.2e}, {err_d / abs(den):.2e}"
        )
    return num / den


def c1_series(S: float, r: float, order: int = 2) -> float:
    """Small-S/r expansion of the speed coefficient, truncated at ``order``."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    ratio = S / r
    total = 1.0
    if order >= 1:
        total += (4.0 / 15.0) * ratio
    if order >= 2:
        total += (2.0 / 45.0) * ratio * ratio
    return total / math.sqrt(S)


def c1_star(S: float, r: float) -> float:
    """First-order truncation (1/sqrt(S)) (1 + (4/15) S/r)."""
    return c1_series(S, r, order=1)


def c_eps_from_profile(u0: WaveProfile, S: float, r: float) -> float:
    """Speed coefficient from weighted integrals along a standing profile.

    Composite trapezoid over the profile grid, plus matched-exponential
    corrections for the truncated tails.

    Raises:
        ProfileTooShortError: tail corrections exceed ``TAIL_WEIGHT_LIMIT``
            of either integral.
    """
    x, u, du = u0.x, u0.u, u0.du
    dx = u0.dx
    weight = np.exp((4.0 * S / r) * (u * u - u))
    num_integrand = -(logistic_g(u) + (2.0 / r) * du * du) * du * weight
    den_integrand = du * du * weight
    num = float(np.trapezoid(num_integrand, dx=dx))
    den = float(np.trapezoid(den_integrand, dx=dx))

    # Tails: u ~ C e^{-sqrt(S)x} on the right (mirrored on the left), the
    # weight tends to 1, and the integrands decay like their leading
    # quadratic terms; each remaining piece integrates to height^2 / 2
    # (numerator) and sqrt(S) height^2 / 2 (denominator) per side.
    sqrt_S = math.sqrt(S)
    h_r = u[-1]
    h_l = 1.0 - u[0]
    num_tail = 0.5 * (h_r * h_r + h_l * h_l)
    den_tail = sqrt_S * 0.5 * (h_r * h_r + h_l * h_l)
    if num_tail > TAIL_WEIGHT_LIMIT * abs(num) or den_tail > TAIL_WEIGHT_LIMIT * abs(den):
        raise ProfileTooShortError(
            f"tail weight {max(num_tail / abs(num), den_tail / abs(den)):.2e} "
            f"exceeds {TAIL_WEIGHT_LIMIT}; extend the profile domain"
        )
    return (num + num_tail) / (den + den_tail)


def single_cline_speed(s: float, S: float):
    """Speed s/sqrt(S) of one cline alone, plus its exact tanh profile.

    Returns:
        (speed, profile) where profile(x, t=0.0) evaluates the traveling
        front 1/2 - 1/2 tanh(sqrt(S)(x - speed t)/2).

    Raises:
        ValueError: outside the bistable window 0 < s < S.
    """
    if not (0.0 < s < S):
        raise ValueError(f"bistability needs 0 < s < S, got s={s}, S={S}")
    speed = s / math.sqrt(S)

    def profile(x, t=0.0):
        return 0.5 - 0.5 * np.tanh(0.5 * math.sqrt(S) * (np.asarray(x) - speed * t))

    return speed, profile


def zero_recombination_speed(s: float, S: float) -> float:
    """Speed 2s/sqrt(2S) of fully linked clines (one locus, doubled effects)."""
    if not (0.0 < s < S):
        raise ValueError(f"bistability needs 0 < s < S, got s={s}, S={S}")
    return 2.0 * s / math.sqrt(2.0 * S)


# ---------------------------------------------------------------------------
# Traveling-wave boundary value solver
# ---------------------------------------------------------------------------


def _traveling_residual(u, c, eps, S, r, dx, u_left, u_right):
    """Interior residual of u'' + c u' + S f + eps g + (2/r)(S(2u-1)+eps) u'^2."""
    full = np.concatenate(([u_left], u, [u_right]))
    upp = (full[2:] - 2.0 * full[1:-1] + full[:-2]) / (dx * dx)
    up = (full[2:] - full[:-2]) / (2.0 * dx)
    return (upp + c * up + S * bistable_f(u) + eps * logistic_g(u)
            + (2.0 / r) * (S * (2.0 * u - 1.0) + eps) * up * up)


def solve_traveling_bvp(
    S: float,
    r: float,
    eps: float,
    u0: WaveProfile | None = None,
    grid_dx: float = 0.05,
    x_max: float | None = None,
    newton_tol: float = 1e-12,
    max_iter: int = 40,
    continuation_steps: int = 4,
) -> tuple[float, WaveProfile]:
    """Traveling profile and speed by Newton continuation from the standing wave.

    The discretized profile equation on a pinned grid (u = 1 on the far
    left, 0 on the far right) is augmented with the phase condition
    int (u - u0) u0' dx = 0, which makes the speed c an unknown of the
    square system. eps is ramped geometrically from 0 so each Newton
    solve starts near its solution.

    Returns:
        (c, profile) with the residual below ``newton_tol``.

    Raises:
        NewtonDivergenceError: a continuation stage failed to converge.
        ValueError: eps too large for the perturbative branch (> 0.1 S).
    """
    if eps < 0.0 or eps > 0.1 * S:
        raise ValueError(f"eps must lie in [0, 0.1 S] = [0, {0.1 * S}], got {eps}")
    if u0 is None:
        u0 = profile_from_quadrature(S, r, x_max=x_max, dx=grid_dx)
    x, base, base_slope = u0.x, u0.u, u0.du
    dx = u0.dx
    n = x.size
    u_left, u_right = 1.0, 0.0

    u = base[1:-1].copy()
    c = 0.0
    phase_weight = base_slope[1:-1] * dx

    if eps == 0.0:
        stages = [0.0]
    else:
        stages = [eps * (0.5 ** k) for k in range(continuation_steps - 1, -1, -1)]

    for eps_k in stages:
        for _ in range(max_iter):
            res = _traveling_residual(u, c, eps_k, S, r, dx, u_left, u_right)
            phase = float(np.dot(u - base[1:-1], phase_weight))
            norm = max(float(np.max(np.abs(res))), abs(phase))
            if norm < newton_tol:
                break
            full = np.concatenate(([u_left], u, [u_right]))
            up = (full[2:] - full[:-2]) / (2.0 * dx)
            coef = S * (2.0 * u - 1.0) + eps_k
            diag = (-2.0 / (dx * dx) + S * bistable_f_prime(u)
                    + eps_k * (1.0 - 2.0 * u) + (4.0 * S / r) * up * up)
            off_common = c / (2.0 * dx) + (2.0 / r) * coef * up / dx
            upper = 1.0 / (dx * dx) + off_common
            lower = 1.0 / (dx * dx) - off_common
            m = n - 2
            J = sps.lil_matrix((m + 1, m + 1))
            J.setdiag(diag)
            J.setdiag(upper[:-1], 1)
            J.setdiag(lower[1:], -1)
            J[:m, m] = up[:, np.newaxis]
            J[m, :m] = phase_weight
            rhs = -np.concatenate((res, [phase]))
            delta = spsolve(J.tocsc(), rhs)
            u += delta[:m]
            c += float(delta[m])
        else:
            raise NewtonDivergenceError(
                f"Newton stalled at eps={eps_k} with residual {norm:.3e}", norm
            )

    values = np.concatenate(([u_left], u, [u_right]))
    slopes = np.gradient(values, dx)
    profile = WaveProfile(x=x, u=values, du=slopes, S=S, r=r, method="bvp",
                          condition_ok=bool(S < 4.0 * r))
    return c, profile


# ---------------------------------------------------------------------------
# Theory versus full-system simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeedReport:
    """Measured front speed of the full system next to the predictions.

    Predicted coefficients are per unit eps in the rescaled frame;
    ``measured_speed`` is in the frame named by ``frame``. The original
    frame relates to the rescaled one by the factor sigma/sqrt(2).
    """

    S: float
    r: float
    s: float
    sigma2: float
    c1_exact: float
    c1_series: float
    c1_star: float
    measured_speed: float
    frame: str
    relative_gap: float

    @property
    def frame_factor(self) -> float:
        return math.sqrt(self.sigma2 / 2.0)

    @property
    def measured_rescaled(self) -> float:
        if self.frame == "rescaled":
            return self.measured_speed
        return self.measured_speed / self.frame_factor

    @property
    def predicted_original(self) -> float:
        return self.s * self.c1_star * self.frame_factor

    def csv_row(self):
        return [self.S, self.r, self.s, self.sigma2, self.c1_exact, self.c1_series,
                self.c1_star, self.measured_speed, self.frame, self.relative_gap]

    CSV_HEADER = ["S", "r", "s", "sigma2", "c1_exact", "c1_series2", "c1_star",
                  "measured_speed", "frame", "relative_gap"]


def measure_full_system_speed(
    S: float, r: float, s: float, sigma2: float,
    t_end: float = 600.0, dt: float = 0.2, dx: float = 0.2,
    transient_fraction: float = 0.3,
) -> SpeedReport:
    """Run the (p, q, D) system with stacked fronts and fit the front speed.

    Original-frame simulation; the report carries the measured speed in
    the original frame and the gap against s * c1_star converted to it.
    """
    from . import pde

    scale = math.sqrt(sigma2 / 2.0)
    travel = 2.0 * s * c1_star(S, r) * scale * t_end
    half_width = (40.0 / math.sqrt(S)) * scale + max(travel, 0.0)
    grid = pde.Grid1D.symmetric(half_width, dx)
    init = pde.stacked_pqd_init(grid, S, sigma2)
    fp = FitnessParams(sA=s, sB=s, SA=S, SB=S, r=r, sigma2=sigma2)
    record_every = max(1, int(round(2.0 / dt)))
    cfg = pde.SimConfig(dt=dt, t_end=t_end, record_every=record_every)
    traj = pde.simulate_pqd(init, fp, grid, cfg)
    fit = pde.instantaneous_speed(traj, "p", window=(transient_fraction * t_end, t_end))

    exact = c1_exact(S, r)
    star = c1_star(S, r)
    predicted = s * star * scale
    gap = abs(fit.fitted_speed - predicted) / predicted
    return SpeedReport(
        S=S, r=r, s=s, sigma2=sigma2,
        c1_exact=exact, c1_series=c1_series(S, r, 2), c1_star=star,
        measured_speed=fit.fitted_speed, frame="original", relative_gap=gap,
    )


def compare_speeds(sweep, t_end: float = 600.0, dt: float = 0.2,
                   dx: float = 0.2) -> list[SpeedReport]:
    """Theory-versus-simulation table over a sweep of (S, r, s, sigma2)."""
    return [
        measure_full_system_speed(S, r, s, sigma2, t_end=t_end, dt=dt, dx=dx)
        for (S, r, s, sigma2) in sweep
    ]
