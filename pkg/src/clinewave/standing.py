"""Standing front of the symmetric reduced equation, by two independent routes.

The stationary profile solves

    u'' + S f(u) + (2 S / r) (2u - 1) (u')^2 = 0,      f(u) = u (2u - 1) (1 - u),

decreasing from 1 at -inf to 0 at +inf, normalized to u(0) = 1/2. The
equation admits a closed-form slope law: the squared slope at height u is

    P(u) = (r^2 / 8S) * (exp(y) - 1 - y),      y = (4S / r) (u - u^2),

which vanishes quadratically at u in {0, 1} and is positive in between.
Route one (`profile_from_quadrature`) integrates u' = -sqrt(P(u)) out of
the midpoint in both directions. Route two (`profile_from_shooting`)
follows the phase-plane orbit leaving the saddle (1, 0) along its
unstable manifold y = sqrt(S) (x - 1) until it meets u = 1/2, recenters,
and mirrors. The two must coincide; their agreement is the uniqueness
check used throughout the test suite.

Tails decay like exp(-sqrt(S) |x|); where the integrated height falls
below ``TAIL_CUTOFF`` the profile is extended by the matched exponential
tail, which is also the exact solution of the linearized equation there.

Constructed profiles are immutable value objects and all constructors
are pure functions, safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ClinewaveError, NoHeteroclinicError

# Height at which the slope-law integration hands over to the exponential tails.
TAIL_CUTOFF = 1e-10

# Handover height for the phase-plane shot. Transverse errors near the
# receiving saddle grow like exp(+sqrt(S) x), so the shot must not chase
# the tail too deep; the matched exponential is accurate to O(height^2).
SHOOT_TAIL_CUTOFF = 1e-6

# Offset along the unstable manifold used to start the phase-plane shot.
SHOOTING_DELTA = 1e-8

# Integrator tolerances; the two construction routes are expected to agree
# to ~1e-7 or better, so the ODE error must sit well below that.
_RTOL = 1e-13
_ATOL = 1e-16


def default_half_width(S: float) -> float:
    """Domain half-width that pushes tail values below ~5e-9.

    Scales like 1/sqrt(S); equals 60 at S = 0.1.
    """
    return 60.0 * np.sqrt(0.1 / S)


def bistable_f(u):
    """Balanced bistable reaction term u (2u - 1) (1 - u)."""
    return u * (2.0 * u - 1.0) * (1.0 - u)


def bistable_f_prime(u):
    """Derivative of the balanced bistable term: -6u^2 + 6u - 1."""
    return -6.0 * u * u + 6.0 * u - 1.0


def logistic_g(u):
    """Unbalancing term u (1 - u)."""
    return u * (1.0 - u)


def _expm1_minus(y):
    """exp(y) - 1 - y without cancellation for small y."""
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.expm1(arr) - arr
    small = np.abs(arr) < 0.3
    if np.any(small):
        ys = arr[small]
        # Taylor tail y^2/2 + ... + y^14/14!; remainder below 1e-19 for |y| < 0.3.
        acc = np.zeros_like(ys)
        for k in range(14, 2, -1):
            acc = (acc + 1.0 / math.factorial(k)) * ys
        acc = (acc + 0.5) * ys * ys
        out[small] = acc
    return out if np.ndim(y) else float(out[0])


def first_integral_P(u, S: float, r: float):
    """Squared slope of the standing front at height ``u``.

    Evaluates (r^2/8S) exp((4S/r)(u - u^2)) - (r/2)(u - u^2) - r^2/(8S)
    in the cancellation-free form (r^2/8S) (exp(y) - 1 - y); positive on
    (0, 1) and exactly zero at the endpoints.
    """
    y = (4.0 * S / r) * (np.asarray(u, dtype=float) - np.asarray(u, dtype=float) ** 2)
    return (r * r / (8.0 * S)) * _expm1_minus(y)


def _slope(u, S: float, r: float):
    """Signed slope -sqrt(P(u)) with a defensive clamp at machine noise."""
    P = np.maximum(first_integral_P(u, S, r), 0.0)
    return -np.sqrt(P)


@dataclass(frozen=True)
class WaveProfile:
    """Monotone front profile on a uniform grid, normalized to u(0) = 1/2.

    Attributes:
        x: grid abscissae, uniform, symmetric about 0.
        u: profile heights, strictly decreasing in (0, 1).
        du: slopes at the nodes (negative on the interior).
        S, r: reaction and recombination parameters the profile solves for.
        method: construction route, one of {"shooting", "quadrature", "bvp"}.
        condition_ok: whether the barrier condition S < 4r held; outside it
            construction is attempted anyway and this flag records the regime.
    """

    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    S: float
    r: float
    method: str
    condition_ok: bool = True

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @cached_property
    def weight(self) -> np.ndarray:
        """Adjoint weight exp((4S/r)(u^2 - u)) along the profile."""
        return np.exp((4.0 * self.S / self.r) * (self.u * self.u - self.u))

    def interp(self, x_new: np.ndarray) -> np.ndarray:
        """Cubic-spline evaluation with exponential extension beyond the grid."""
        spline = CubicSpline(self.x, self.u)
        x_new = np.asarray(x_new, dtype=float)
        out = spline(np.clip(x_new, self.x[0], self.x[-1]))
        rate = np.sqrt(self.S)
        right = x_new > self.x[-1]
        if np.any(right):
            out[right] = self.u[-1] * np.exp(-rate * (x_new[right] - self.x[-1]))
        left = x_new < self.x[0]
        if np.any(left):
            out[left] = 1.0 - (1.0 - self.u[0]) * np.exp(rate * (x_new[left] - self.x[0]))
        return out

    def to_csv(self, path) -> None:
        from .reporting import write_csv

        write_csv(path, ["x", "u", "du"], np.column_stack([self.x, self.u, self.du]))


def _symmetric_grid(x_max: float, dx: float) -> np.ndarray:
    half = int(round(x_max / dx))
    return np.arange(-half, half + 1) * dx


def profile_from_quadrature(
    S: float, r: float, x_max: float | None = None, dx: float = 0.02
) -> WaveProfile:
    """Build the standing front from its slope law u' = -sqrt(P(u)).

    Integrates out of u(0) = 1/2 forward and backward independently, so
    the symmetry u(-x) = 1 - u(x) is a genuine accuracy check rather
    than a construction artifact. Beyond the height ``TAIL_CUTOFF`` the
    matched tails C exp(-+sqrt(S) x) take over.
    """
    if S <= 0 or r <= 0:
        raise ValueError(f"need S > 0 and r > 0, got S={S}, r={r}")
    if x_max is None:
        x_max = default_half_width(S)
    x = _symmetric_grid(x_max, dx)
    n = x.size
    u = np.empty(n)
    center = n // 2
    u[center] = 0.5

    def rhs(_x, y):
        return [_slope(y[0], S, r)]

    def tail_event(_x, y):
        return y[0] - TAIL_CUTOFF

    tail_event.terminal = True

    def head_event(_x, y):
        return (1.0 - TAIL_CUTOFF) - y[0]

    head_event.terminal = True

    # Right half: u decays toward 0.
    sol_r = solve_ivp(
        rhs, (0.0, x_max), [0.5], events=tail_event, method="DOP853",
        dense_output=True, rtol=_RTOL, atol=_ATOL, max_step=0.25 / np.sqrt(S),
    )
    x_stop_r = sol_r.t[-1]
    right = x[center:]
    inside = right <= x_stop_r
    u[center:][inside] = sol_r.sol(right[inside])[0]
    if not np.all(inside):
        u_edge = float(sol_r.sol(x_stop_r)[0])
        u[center:][~inside] = u_edge * np.exp(-np.sqrt(S) * (right[~inside] - x_stop_r))

    # Left half: u grows toward 1, integrated independently.
    sol_l = solve_ivp(
        rhs, (0.0, -x_max), [0.5], events=head_event, method="DOP853",
        dense_output=True, rtol=_RTOL, atol=_ATOL, max_step=0.25 / np.sqrt(S),
    )
    x_stop_l = sol_l.t[-1]
    left = x[:center]
    inside = left >= x_stop_l
    u[:center][inside] = sol_l.sol(left[inside])[0]
    if not np.all(inside):
        u_edge = float(sol_l.sol(x_stop_l)[0])
        u[:center][~inside] = 1.0 - (1.0 - u_edge) * np.exp(
            np.sqrt(S) * (left[~inside] - x_stop_l)
        )

    du = _slope(u, S, r)
    return WaveProfile(x=x, u=u, du=du, S=S, r=r, method="quadrature",
                       condition_ok=bool(S < 4.0 * r))


def profile_from_shooting(
    S: float, r: float, x_max: float | None = None, dx: float = 0.02,
    tol: float = 1e-6,
) -> WaveProfile:
    """Build the standing front by shooting along the saddle's unstable manifold.

    The phase-plane system (u, y) with u' = y, y' = -S f(u) - (2S/r)(2u-1) y^2
    is started a distance ``SHOOTING_DELTA`` from (1, 0) on the manifold
    y = sqrt(S)(u - 1) and followed until u crosses 1/2; the crossing is
    recentred to x = 0 and the left half filled in by the symmetry
    u(-x) = 1 - u(x). In the regime S >= 4r the orbit is attempted all the
    same and the profile is flagged via ``condition_ok``.

    Raises:
        NoHeteroclinicError: the orbit dived below the escape guard
            10 sqrt(S) before reaching u = 1/2.
    """
    if S <= 0 or r <= 0:
        raise ValueError(f"need S > 0 and r > 0, got S={S}, r={r}")
    if x_max is None:
        x_max = default_half_width(S)
    sqrt_S = np.sqrt(S)
    y_guard = -10.0 * sqrt_S

    def rhs(_x, state):
        u, y = state
        return [y, -S * bistable_f(u) - (2.0 * S / r) * (2.0 * u - 1.0) * y * y]

    def crossing(_x, state):
        return state[0] - 0.5

    def escape(_x, state):
        return state[1] - y_guard

    escape.terminal = True

    def tail_event(_x, state):
        return state[0] - SHOOT_TAIL_CUTOFF

    tail_event.terminal = True

    # Leave room for the climb out of the saddle (~ log(1/delta)/sqrt(S))
    # plus the requested half-width.
    span = x_max + (np.log(1.0 / SHOOTING_DELTA) + 5.0) / sqrt_S
    sol = solve_ivp(
        rhs, (0.0, span), [1.0 - SHOOTING_DELTA, -sqrt_S * SHOOTING_DELTA],
        events=[crossing, escape, tail_event], method="DOP853",
        dense_output=True, rtol=_RTOL, atol=_ATOL, max_step=0.25 / sqrt_S,
    )
    if sol.t_events[1].size > 0 or sol.t_events[0].size == 0:
        state = tuple(sol.y[:, -1]) if sol.y.size else (np.nan, np.nan)
        raise NoHeteroclinicError(
            f"orbit escaped before reaching u = 1/2 for S={S}, r={r}", state
        )
    x_cross = float(sol.t_events[0][0])

    x = _symmetric_grid(x_max, dx)
    n = x.size
    center = n // 2
    u = np.empty(n)
    du = np.empty(n)

    x_end = sol.t[-1]
    right = x[center:] + x_cross
    inside = right <= x_end
    vals = sol.sol(right[inside])
    u[center:][inside] = vals[0]
    du[center:][inside] = vals[1]
    if not np.all(inside):
        u_edge = float(sol.sol(x_end)[0])
        decay = np.exp(-sqrt_S * (right[~inside] - x_end))
        u[center:][~inside] = u_edge * decay
        du[center:][~inside] = -sqrt_S * u_edge * decay

    # Left half by the front's point symmetry; slopes are even in x.
    u[:center] = 1.0 - u[center + 1:][::-1]
    du[:center] = du[center + 1:][::-1]
    u[center] = 0.5

    profile = WaveProfile(x=x, u=u, du=du, S=S, r=r, method="shooting",
                          condition_ok=bool(S < 4.0 * r))
    gap = float(np.max(np.abs(u - _reference_heights(x, S, r))))
    if gap > tol:
        raise ClinewaveError(
            f"shooting profile deviates from the slope-law profile by {gap:.3e} > tol={tol:.3e}"
        )
    return profile


def _reference_heights(x: np.ndarray, S: float, r: float) -> np.ndarray:
    """Quadrature-route heights on an arbitrary grid (cross-method yardstick)."""
    ref = profile_from_quadrature(S, r, x_max=float(np.max(np.abs(x))), dx=float(x[1] - x[0]))
    return ref.u


def ode_residual(profile: WaveProfile) -> np.ndarray:
    """Pointwise defect of the standing equation along a constructed profile.

    u'' is formed by differentiating the stored slopes with a seven-point
    sixth-order stencil, so the check does not reuse the equation that
    produced the slopes. Returned on interior nodes (three dropped per side).
    """
    u, du = profile.u, profile.du
    S, r = profile.S, profile.r
    dx = profile.dx
    d2u = (
        du[6:] - 9.0 * du[5:-1] + 45.0 * du[4:-2]
        - 45.0 * du[2:-4] + 9.0 * du[1:-5] - du[:-6]
    ) / (60.0 * dx)
    ui = u[3:-3]
    dui = du[3:-3]
    return d2u + S * bistable_f(ui) + (2.0 * S / r) * (2.0 * ui - 1.0) * dui * dui


def symmetry_defect(profile: WaveProfile) -> float:
    """max |u(-x) + u(x) - 1| over the grid."""
    return float(np.max(np.abs(profile.u + profile.u[::-1] - 1.0)))


def slope_law_defect(profile: WaveProfile) -> float:
    """max |u'(x)^2 - P(u(x))|, the first-integral conservation error."""
    P = first_integral_P(profile.u, profile.S, profile.r)
    return float(np.max(np.abs(profile.du**2 - P)))


def decay_rate(profile: WaveProfile, side: str = "right") -> float:
    """Exponential tail rate fitted over the outer quarter of the domain.

    Least-squares slope of log u (right tail) or log(1 - u) (left tail);
    the standing front decays at rate -sqrt(S) on the right and the
    mirrored rate +sqrt(S) on the left.

    Raises:
        ClinewaveError: tail not resolved (height above 1e-3 at the edge).
    """
    if side == "right":
        mask = profile.x >= profile.x[-1] / 2.0
        vals = profile.u[mask]
    elif side == "left":
        mask = profile.x <= profile.x[0] / 2.0
        vals = 1.0 - profile.u[mask]
    else:
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    edge = vals[-1] if side == "right" else vals[0]
    if edge > 1e-3:
        raise ClinewaveError(
            f"tail not resolved: edge height {edge:.3e} > 1e-3; extend the domain"
        )
    slope = np.polyfit(profile.x[mask], np.log(vals), 1)[0]
    return float(slope)
