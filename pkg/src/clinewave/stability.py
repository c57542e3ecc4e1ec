"""Spectral stability checks for the standing front.

Linearizing the standing-wave equation around the profile u0 gives

    L h = h'' + (4S/r) u0' (2u0 - 1) h' + S (f'(u0) + (4/r) u0'^2) h,

whose first-order coefficient is the derivative of (4S/r)(u0^2 - u0).
Conjugating by the positive weight exp((2S/r)(u0^2 - u0)) removes the
first-order term and leaves the Schroedinger form

    M k = k'' + c(x) k,      c(x) = (2S^2/r)(2u0 - 1) f(u0) + S f'(u0),

so L and M share their spectrum. c tends to -S in both tails: discrete
surrogates of the essential spectrum cluster below about -S, while the
translation mode u0' spans the kernel of L and the weighted slope

    psi = u0' exp((4S/r)(u0^2 - u0))

spans the kernel of the adjoint. The Fredholm solvability ratio
< psi, g(u0) + (2/r) u0'^2 > / < psi, -u0' > reproduces the first-order
wave speed coefficient, which ties this module to the speed module.

Both operators are assembled on the interior nodes of the profile grid
with second-order central stencils and pinned (zero) boundary rows.
Spectra are computed on the exactly symmetrized tridiagonal form, so all
reported eigenvalues are real by construction; eigenvectors map back
through the discrete weight. Assembled operators are immutable;
independent parameter cases can run concurrently.

`relaxation_shift` closes the loop dynamically: a perturbed front is
evolved until it settles on a translate of the standing wave, and the
measured shift is compared with the two candidate first-order
predictions (the raw weighted projection and its normalized variant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sps
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError
from .pde import Grid1D, SimConfig, front_position_values, simulate_reduced
from .speed import c1_exact
from .standing import WaveProfile, bistable_f, bistable_f_prime, logistic_g

# Discrete eigenvalues live above the essential-spectrum cluster near -S;
# kernel checks ignore anything below this fraction of -S.
ESSENTIAL_CUTOFF_FRACTION = 0.5


@dataclass(frozen=True)
class DiscretizedOperator:
    """Tridiagonal finite-difference operator on the interior of a profile grid.

    Attributes:
        x: interior node abscissae.
        lower, diag, upper: the three stencil bands (lower/upper have
            length n-1 aligned with rows 1..n-1 and 0..n-2 respectively).
        tag: one of {"L", "M", "L_adjoint"}.
        dx: grid spacing.
        boundary: boundary treatment record ("pinned" rows outside the
            interior block).
        weight: diagonal similarity mapping M-frame vectors to L-frame
            ones (exp((2S/r)(u0^2 - u0)) up to normalization); None for M.
    """

    x: np.ndarray
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    tag: str
    dx: float
    boundary: str = "pinned"
    weight: np.ndarray | None = None

    @cached_property
    def matrix(self) -> sps.csr_matrix:
        return sps.diags(
            [self.lower, self.diag, self.upper], offsets=[-1, 0, 1]
        ).tocsr()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        out = self.diag * vec
        out[:-1] += self.upper * vec[1:]
        out[1:] += self.lower * vec[:-1]
        return out

    def apply_transpose(self, vec: np.ndarray) -> np.ndarray:
        out = self.diag * vec
        out[:-1] += self.lower * vec[1:]
        out[1:] += self.upper * vec[:-1]
        return out

    def transpose(self) -> "DiscretizedOperator":
        tag = {"L": "L_adjoint", "L_adjoint": "L"}.get(self.tag, self.tag)
        return DiscretizedOperator(
            x=self.x, lower=self.upper.copy(), diag=self.diag.copy(),
            upper=self.lower.copy(), tag=tag, dx=self.dx,
            boundary=self.boundary, weight=self.weight,
        )


def _interior(profile: WaveProfile):
    return profile.x[1:-1], profile.u[1:-1], profile.du[1:-1], profile.dx


def assemble_L(u0: WaveProfile, S: float, r: float) -> DiscretizedOperator:
    """Discretize the linearization L around the standing profile.

    Second-order central stencils on interior nodes; the profile slope
    data supplies the first-order coefficient. Pinned zero boundary rows
    stand in for decay at infinity.

    Raises:
        ValueError: grid too coarse to resolve the front (dx > 0.1/sqrt(S)).
    """
    _check_resolution(u0, S)
    x, u, du, dx = _interior(u0)
    b = (4.0 * S / r) * du * (2.0 * u - 1.0)
    a = S * (bistable_f_prime(u) + (4.0 / r) * du * du)
    diag = -2.0 / dx**2 + a
    upper = 1.0 / dx**2 + b[:-1] / (2.0 * dx)
    lower = 1.0 / dx**2 - b[1:] / (2.0 * dx)
    weight = np.exp((2.0 * S / r) * (u * u - u))
    return DiscretizedOperator(x=x, lower=lower, diag=diag, upper=upper,
                               tag="L", dx=dx, weight=weight)


def assemble_M(u0: WaveProfile, S: float, r: float) -> DiscretizedOperator:
    """Discretize the weight-conjugated symmetric form M = d^2/dx^2 + c(x)."""
    _check_resolution(u0, S)
    x, u, _du, dx = _interior(u0)
    c = (2.0 * S * S / r) * (2.0 * u - 1.0) * bistable_f(u) + S * bistable_f_prime(u)
    diag = -2.0 / dx**2 + c
    off = np.full(x.size - 1, 1.0 / dx**2)
    return DiscretizedOperator(x=x, lower=off, diag=diag, upper=off.copy(),
                               tag="M", dx=dx)


def _check_resolution(u0: WaveProfile, S: float) -> None:
    if u0.dx > 0.1 / math.sqrt(S):
        raise ValueError(
            f"grid too coarse: dx={u0.dx} exceeds 0.1/sqrt(S)={0.1 / math.sqrt(S):.4g}"
        )


def similarity_defect(op_L: DiscretizedOperator, op_M: DiscretizedOperator) -> float:
    """Defect of L - W^-1 M W acting on a smooth probe (O(dx^2)).

    The individual stencil bands of the two assemblies differ at O(1);
    the discrepancies cancel on smooth vectors, which is what similarity
    of the discretized operators means.
    """
    w = op_L.weight
    span = float(op_L.x[-1] - op_L.x[0])
    probe = np.exp(-((4.0 * op_L.x / span) ** 2))
    lhs = op_L.apply(probe)
    rhs = op_M.apply(w * probe) / w
    return float(np.max(np.abs(lhs - rhs)))


def _symmetrize(op: DiscretizedOperator):
    """Exact diagonal similarity to a symmetric tridiagonal matrix.

    Returns (d, e, scale) with d the diagonal, e the symmetric
    off-diagonal sqrt(upper_i * lower_i), and scale the positive diagonal
    D with D^-1 A D symmetric; eigenvectors of A are D times those of
    the symmetric form. Requires upper_i * lower_i > 0, true whenever
    |b| dx < 2.
    """
    if np.any(op.upper <= 0.0) or np.any(op.lower <= 0.0):
        raise ValueError("operator not symmetrizable: nonpositive off-diagonal band")
    e = np.sqrt(op.upper * op.lower)
    log_scale = np.concatenate(([0.0], np.cumsum(0.5 * (np.log(op.lower) - np.log(op.upper)))))
    log_scale -= log_scale.max()
    return op.diag.copy(), e, np.exp(log_scale)


def spectrum(op: DiscretizedOperator, k: int = 6):
    """The k largest eigenvalues (descending) and their eigenvectors.

    All three operator tags reduce to a symmetric tridiagonal
    eigenproblem: M is symmetric as assembled, L and its transpose are
    diagonally similar to symmetric form, so the computed spectrum is
    exactly real. Eigenvectors come back in the operator's own frame,
    normalized to unit Euclidean norm.
    """
    d, e, scale = _symmetrize(op)
    n = d.size
    k = min(k, n)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(n - k, n - 1))
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    out = vecs * scale[:, np.newaxis]
    out /= np.linalg.norm(out, axis=0, keepdims=True)
    return vals, out


def kernel_mode_residual(op_L: DiscretizedOperator, u0: WaveProfile) -> float:
    """sup |L u0'| / sup |u0'|: the translation mode should be annihilated."""
    du = u0.du[1:-1]
    return float(np.max(np.abs(op_L.apply(du))) / np.max(np.abs(du)))


def adjoint_kernel_vector(u0: WaveProfile) -> np.ndarray:
    """Discretized adjoint null vector u0' exp((4S/r)(u0^2 - u0)) (interior)."""
    return (u0.du * u0.weight)[1:-1]


def adjoint_kernel_residual(u0: WaveProfile, S: float, r: float,
                            weighted: bool = True) -> float:
    """||L^T psi||_2 / ||psi||_2 for the weighted slope psi.

    On a uniform grid the quadrature weights of the discrete L^2 pairing
    cancel in the ratio, so the plain transpose is the adjoint. Passing
    ``weighted=False`` drops the exponential factor from psi; that vector
    is not in the adjoint kernel and the residual then refuses to vanish
    under refinement (negative control).
    """
    op = assemble_L(u0, S, r)
    psi = adjoint_kernel_vector(u0) if weighted else u0.du[1:-1].copy()
    return float(np.linalg.norm(op.apply_transpose(psi)) / np.linalg.norm(psi))


def solvability_ratio(u0: WaveProfile, S: float, r: float) -> float:
    """< psi, g(u0) + (2/r) u0'^2 > / < psi, -u0' > on the profile grid.

    Trapezoid quadrature; equals the first-order speed coefficient when
    psi spans the adjoint kernel (the solvability condition for the
    traveling branch).
    """
    psi = u0.du * u0.weight
    forcing = logistic_g(u0.u) + (2.0 / r) * u0.du**2
    num = float(np.trapezoid(psi * forcing, dx=u0.dx))
    den = float(np.trapezoid(psi * (-u0.du), dx=u0.dx))
    return num / den


def second_kernel_solution(u0: WaveProfile) -> np.ndarray:
    """The unbounded second null solution v0 = u0' int_0^x (u0')^-2 e^{-(4S/r)(u0^2-u0)}.

    Built from the profile's exact slope data; the integrand grows like
    e^{2 sqrt(S) z} in the right tail, which is precisely the growth this
    function is used to verify (v0 ~ e^{+sqrt(S) x}).
    """
    integrand = 1.0 / (u0.du**2 * u0.weight)
    center = u0.x.size // 2
    cumulative = np.concatenate(([0.0], np.cumsum(
        0.5 * (integrand[1:] + integrand[:-1]) * u0.dx)))
    cumulative -= cumulative[center]
    return u0.du * cumulative


def second_kernel_growth_rate(u0: WaveProfile) -> float:
    """Tail growth rate of |v0| fitted over the outer right quarter."""
    v0 = second_kernel_solution(u0)
    mask = u0.x >= u0.x[-1] / 2.0
    return float(np.polyfit(u0.x[mask], np.log(np.abs(v0[mask])), 1)[0])


# ---------------------------------------------------------------------------
# Dynamic relaxation of a perturbed front
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelaxationResult:
    """Outcome of relaxing a perturbed standing front.

    measured_shift is the front displacement of the settled state
    relative to the unperturbed control run; divide by the perturbation
    amplitude for the first-order rate. Both first-order predictions are
    reported: ``projection`` is the raw weighted integral
    int h u0' e^{(4S/r)(u0^2-u0)} dx and ``projection_normalized`` divides
    it by int u0'^2 e^{...} dx. Predicted displacements carry the minus
    sign from shifting a decreasing front.
    """

    measured_shift: float
    shift_per_eps: float
    projection: float
    projection_normalized: float
    predicted_shift: float
    predicted_shift_unnormalized: float
    final_distance: float
    t_settled: float


def perturbation_projection(u0: WaveProfile, h: np.ndarray) -> tuple[float, float]:
    """Weighted projection of a perturbation on the adjoint kernel.

    Returns (raw, normalized): the integral int h u0' e^{(4S/r)(u0^2-u0)} dx
    and the same divided by int u0'^2 e^{...} dx.
    """
    psi = u0.du * u0.weight
    raw = float(np.trapezoid(np.asarray(h, float) * psi, dx=u0.dx))
    norm = float(np.trapezoid(u0.du**2 * u0.weight, dx=u0.dx))
    return raw, raw / norm


def relaxation_shift(
    u0: WaveProfile,
    h: np.ndarray,
    eps_amp: float,
    cfg: SimConfig | None = None,
    settle_tol: float = 1e-6,
    t_max: float = 400.0,
) -> RelaxationResult:
    """Relax u0 + eps_amp * h under the symmetric dynamics and measure the shift.

    The perturbed state is evolved with the reduced equation (eps = 0)
    next to an unperturbed control run; the control supplies the discrete
    standing state, removing the O(dx^2) gap between the continuum
    profile and the attractor of the discrete dynamics. The shift is the
    minimizer of the L2 distance to the translated control, seeded by the
    front positions; settling means the remaining sup distance fell
    below ``settle_tol``.

    Raises:
        ConvergenceError: distance still above tolerance at t_max.
        ValueError: amplitude too large for the linear regime (> 0.05).
    """
    if abs(eps_amp) > 0.05:
        raise ValueError(f"|eps_amp| must be <= 0.05 for the linear regime, got {eps_amp}")
    h = np.asarray(h, dtype=float)
    if h.shape != u0.x.shape:
        raise ValueError("perturbation must be sampled on the profile grid")
    grid = Grid1D(float(u0.x[0]), float(u0.x[-1]), u0.x.size)
    if cfg is None:
        cfg = SimConfig(dt=0.25, t_end=t_max, record_every=80)

    control = simulate_reduced(u0.u, u0.S, 0.0, u0.r, grid, cfg)
    perturbed = simulate_reduced(u0.u + eps_amp * h, u0.S, 0.0, u0.r, grid, cfg)

    settled = control.fields["u_reduced"][-1]
    spline = CubicSpline(grid.x, settled)
    x_lo, x_hi = grid.x[0], grid.x[-1]
    rate = math.sqrt(u0.S)

    def shifted_control(delta: float) -> np.ndarray:
        xs = grid.x - delta
        vals = spline(np.clip(xs, x_lo, x_hi))
        right = xs > x_hi
        if np.any(right):
            vals[right] = settled[-1] * np.exp(-rate * (xs[right] - x_hi))
        left = xs < x_lo
        if np.any(left):
            vals[left] = 1.0 - (1.0 - settled[0]) * np.exp(rate * (xs[left] - x_lo))
        return vals

    front_control = front_position_values(settled, grid.x)

    def best_shift(state: np.ndarray) -> float:
        guess = front_position_values(state, grid.x) - front_control
        span = max(4.0 * abs(eps_amp), 8.0 * grid.dx)
        res = minimize_scalar(
            lambda d: float(np.sum((state - shifted_control(d)) ** 2)),
            bounds=(guess - span, guess + span), method="bounded",
            options={"xatol": 1e-12},
        )
        return float(res.x)

    t_settled = math.nan
    shift = math.nan
    dist = math.inf
    for i in range(1, perturbed.times.size):
        state = perturbed.fields["u_reduced"][i]
        shift = best_shift(state)
        dist = float(np.max(np.abs(state - shifted_control(shift))))
        if dist < settle_tol:
            t_settled = float(perturbed.times[i])
            break
    if not (dist < settle_tol):
        raise ConvergenceError(
            f"perturbation did not settle below {settle_tol} by t={cfg.t_end} "
            f"(last distance {dist:.3e})"
        )

    raw, normalized = perturbation_projection(u0, h)
    return RelaxationResult(
        measured_shift=shift,
        shift_per_eps=shift / eps_amp,
        projection=raw,
        projection_normalized=normalized,
        predicted_shift=-eps_amp * normalized,
        predicted_shift_unnormalized=-eps_amp * raw,
        final_distance=dist,
        t_settled=t_settled,
    )
