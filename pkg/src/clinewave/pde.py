"""1-D reaction-diffusion integrators for the cline system and front tracking.

Three solvers share one Strang-split core (half reaction, full diffusion,
half reaction):

  * `simulate_pqd` integrates allele frequencies and linkage disequilibrium

        p_t = (s2/2) p_xx + (SA (2p-1) + sA) p (1-p) + (SB (2q-1) + sB) D
        q_t = (s2/2) q_xx + (SB (2q-1) + sB) q (1-q) + (SA (2p-1) + sA) D
        D_t = (s2/2) D_xx + s2 p_x q_x
              - [r + (2p-1)(SA (2p-1) + sA) + (2q-1)(SB (2q-1) + sB)] D

    with s2 the dispersal variance. The p_x q_x source is evaluated by
    central differences at every Runge-Kutta stage of the reaction
    substep; freezing it per substep costs an order of accuracy.

  * `simulate_gametes` integrates the four gamete frequencies with
    reaction R(y) = exact one-generation map minus identity, applied
    pointwise; the pointwise sum of the fields is conserved.

  * `simulate_reduced` integrates the scalar equation for stacked clines
    in the rescaled frame (unit diffusion),

        u_t = u_xx + S f(u) + eps g(u) + (2/r)(S (2u-1) + eps) u_x^2,

    recomputing u_x at every Runge-Kutta stage so the split is strictly
    symmetric. Pass r = inf to drop the gradient coupling (plain bistable
    control). Speeds measured here convert to the original frame by the
    factor sigma/sqrt(2).

Diffusion uses Crank-Nicolson by default (explicit stepping is available
behind a CFL guard) with no-flux or pinned boundaries. Runs are
deterministic given their config; independent runs share no state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

from . import genetics
from .errors import (
    CFLViolationError,
    FieldInvariantError,
    FrontTrackingError,
    InsufficientSamplesError,
)
from .genetics import FitnessParams
from .standing import bistable_f, logistic_g

RANGE_TOL = 1e-6          # abort threshold for field-range violations
BOUNDARY_INIT_TOL = 1e-6  # required closeness of initial data to limit states

# Tags tracked by a 1/2 level crossing (monotone fronts) and by argmax |value|.
_LEVEL_TAGS = {"p": "dec", "q": "dec", "u": "dec", "z": "inc", "u_reduced": "dec"}
_ABSMAX_TAGS = {"D", "v", "w"}


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid with n nodes spanning [x_min, x_max]."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (self.x_min < self.x_max):
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes, got n={self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @staticmethod
    def symmetric(half_width: float, dx: float) -> "Grid1D":
        half = int(round(half_width / dx))
        return Grid1D(-half * dx, half * dx, 2 * half + 1)


@dataclass(frozen=True)
class SimConfig:
    """Time stepping and output controls for one simulation run.

    boundary "no-flux" reflects at both ends; "pinned" holds the initial
    boundary values (Dirichlet). scheme "strang-cn" pairs Strang splitting
    with Crank-Nicolson diffusion; "strang-explicit" uses forward-Euler
    diffusion and enforces dt <= dx^2 / (2 nu).
    """

    dt: float
    t_end: float
    record_every: int = 1
    boundary: str = "no-flux"
    scheme: str = "strang-cn"

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.boundary not in ("no-flux", "pinned"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.scheme not in ("strang-cn", "strang-explicit"):
            raise ValueError(f"unknown scheme {self.scheme!r}")


@dataclass(frozen=True)
class Field1D:
    """A spatial profile tagged with the quantity it represents."""

    values: np.ndarray
    tag: str

    def __post_init__(self):
        if self.tag in ("p", "q", "u", "v", "w", "z", "u_reduced"):
            lo, hi = float(np.min(self.values)), float(np.max(self.values))
            if lo < -RANGE_TOL or hi > 1.0 + RANGE_TOL:
                raise ValueError(f"{self.tag} field outside [0,1]: [{lo}, {hi}]")
        elif self.tag == "D":
            if float(np.max(np.abs(self.values))) > 0.25 + RANGE_TOL:
                raise ValueError("D field outside [-1/4, 1/4]")


@dataclass
class Trajectory:
    """Recorded history of a simulation run.

    fields maps tag -> array of shape (n_times, n_nodes); front_positions
    maps tag -> per-time tracked position (level crossing for monotone
    fronts, argmax |value| for hump-shaped quantities). config_summary
    records the resolved run parameters for the manifest.
    """

    times: np.ndarray
    grid: Grid1D
    fields: dict[str, np.ndarray]
    front_positions: dict[str, np.ndarray] = field(default_factory=dict)
    config_summary: dict = field(default_factory=dict)

    def snapshot(self, index: int) -> dict[str, Field1D]:
        return {tag: Field1D(arr[index], tag) for tag, arr in self.fields.items()}

    def to_csv(self, path) -> None:
        """One row per (t, x) with every field as a column."""
        from .reporting import write_csv

        tags = sorted(self.fields)
        header = ["t", "x"] + tags
        nt = self.times.size
        nx = self.grid.n
        t_col = np.repeat(self.times, nx)
        x_col = np.tile(self.grid.x, nt)
        cols = [t_col, x_col] + [self.fields[tag].reshape(-1) for tag in tags]
        write_csv(path, header, np.column_stack(cols))

    def manifest(self) -> dict:
        from .reporting import run_id

        payload = {
            "grid": {"x_min": self.grid.x_min, "x_max": self.grid.x_max, "n": self.grid.n},
            "fields": sorted(self.fields),
            "times": {"start": float(self.times[0]), "end": float(self.times[-1]),
                      "count": int(self.times.size)},
            **self.config_summary,
        }
        payload["run_id"] = run_id(payload)
        return payload


def recommended_half_width(S_like: float, travel: float = 0.0) -> float:
    """Domain half-width keeping boundaries within ~1e-6 of the limit states.

    Allows 40/sqrt(S) of clearance around the front plus any anticipated
    front travel.
    """
    return 40.0 / math.sqrt(S_like) + abs(travel)


def logistic_front(x: np.ndarray, S: float, center: float = 0.0,
                   width_scale: float = 1.0) -> np.ndarray:
    """Decreasing tanh front with the natural width of a single cline."""
    k = math.sqrt(S) / (2.0 * width_scale)
    return 0.5 - 0.5 * np.tanh(k * (x - center))


# ---------------------------------------------------------------------------
# Diffusion substeps
# ---------------------------------------------------------------------------


class _Diffusion:
    """One-step diffusion operators on a fixed grid, boundary-aware.

    Crank-Nicolson solves (I - a T) u+ = (I + a T) u with a = nu dt / (2 dx^2)
    and T the second-difference stencil; no-flux doubles the inner neighbor
    in the boundary rows, pinned freezes the edge values.
    """

    def __init__(self, grid: Grid1D, nu: float, dt: float, boundary: str):
        self.nu = nu
        self.dt = dt
        self.boundary = boundary
        self.n = grid.n
        self.dx = grid.dx
        a = nu * dt / (2.0 * self.dx**2)
        self.a = a
        n = grid.n
        lower = np.full(n, a)
        upper = np.full(n, a)
        diag = np.full(n, 1.0 + 2.0 * a)
        if boundary == "no-flux":
            upper[1] = 2.0 * a   # ghost mirror at the left edge
            lower[-2] = 2.0 * a  # ghost mirror at the right edge
        else:  # pinned: identity rows at the edges
            diag[0] = diag[-1] = 1.0
            upper[1] = 0.0
            lower[-2] = 0.0
        self._ab = np.zeros((3, n))
        self._ab[0, 1:] = -upper[1:]
        self._ab[1] = diag
        self._ab[2, :-1] = -lower[:-1]

    def _apply_explicit_half(self, u: np.ndarray) -> np.ndarray:
        """(I + a T) u with the configured boundary treatment."""
        out = u.copy()
        out[1:-1] += self.a * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        if self.boundary == "no-flux":
            out[0] += self.a * (2.0 * u[1] - 2.0 * u[0])
            out[-1] += self.a * (2.0 * u[-2] - 2.0 * u[-1])
        return out

    def step_cn(self, u: np.ndarray) -> np.ndarray:
        rhs = self._apply_explicit_half(u)
        return solve_banded((1, 1), self._ab, rhs)

    def step_explicit(self, u: np.ndarray) -> np.ndarray:
        b = 2.0 * self.a  # nu dt / dx^2
        out = u.copy()
        out[1:-1] += b * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        if self.boundary == "no-flux":
            out[0] += b * (2.0 * u[1] - 2.0 * u[0])
            out[-1] += b * (2.0 * u[-2] - 2.0 * u[-1])
        return out

    def step(self, u: np.ndarray, scheme: str) -> np.ndarray:
        return self.step_cn(u) if scheme == "strang-cn" else self.step_explicit(u)


def _check_cfl(cfg: SimConfig, grid: Grid1D, nu: float) -> None:
    if cfg.scheme == "strang-explicit":
        limit = grid.dx**2 / (2.0 * nu)
        if cfg.dt > limit:
            raise CFLViolationError(
                f"explicit diffusion needs dt <= dx^2/(2 nu) = {limit:.6g}, got dt={cfg.dt}"
            )


def _check_boundary_init(fields: dict[str, np.ndarray]) -> None:
    """Front-shaped initial data must sit on a limit state at both edges.

    Spatially uniform fields pass: the no-flux boundary is exact for them
    and the guard exists to catch fronts truncated by a narrow domain.
    """
    for tag, arr in fields.items():
        if float(np.max(arr) - np.min(arr)) <= BOUNDARY_INIT_TOL:
            continue
        for edge in (arr[0], arr[-1]):
            if min(abs(edge), abs(edge - 1.0)) > BOUNDARY_INIT_TOL:
                raise FieldInvariantError(
                    f"initial {tag} boundary value {edge} is not within "
                    f"{BOUNDARY_INIT_TOL} of a limit state", 0.0, {tag: arr},
                )


def _rk4(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _gradient(u: np.ndarray, dx: float) -> np.ndarray:
    """Central differences, one-sided at the edges."""
    return np.gradient(u, dx)


def _front_of(tag: str, values: np.ndarray, x: np.ndarray) -> float:
    if tag in _ABSMAX_TAGS:
        return float(x[int(np.argmax(np.abs(values)))])
    sense = _LEVEL_TAGS.get(tag, "dec")
    f = values if sense == "dec" else 1.0 - values
    try:
        return front_position_values(f, x, 0.5)
    except FrontTrackingError:
        return math.nan


class _Recorder:
    def __init__(self, grid: Grid1D, tags: list[str], n_records: int):
        self.grid = grid
        self.tags = tags
        self.times = np.empty(n_records)
        self.store = {tag: np.empty((n_records, grid.n)) for tag in tags}
        self.fronts = {tag: np.empty(n_records) for tag in tags}
        self.k = 0

    def record(self, t: float, fields: dict[str, np.ndarray]) -> None:
        self.times[self.k] = t
        for tag in self.tags:
            self.store[tag][self.k] = fields[tag]
            self.fronts[tag][self.k] = _front_of(tag, fields[tag], self.grid.x)
        self.k += 1

    def finish(self, config_summary: dict) -> Trajectory:
        times = self.times[: self.k]
        return Trajectory(
            times=times,
            grid=self.grid,
            fields={tag: arr[: self.k] for tag, arr in self.store.items()},
            front_positions={tag: arr[: self.k] for tag, arr in self.fronts.items()},
            config_summary=config_summary,
        )


def _range_guard(t: float, fields: dict[str, np.ndarray]) -> None:
    for tag, arr in fields.items():
        if tag == "D":
            if np.max(np.abs(arr)) > 0.25 + RANGE_TOL:
                raise FieldInvariantError(
                    f"|D| exceeded 1/4 + {RANGE_TOL} at t={t}", t, dict(fields)
                )
        else:
            if np.min(arr) < -RANGE_TOL or np.max(arr) > 1.0 + RANGE_TOL:
                raise FieldInvariantError(
                    f"{tag} left [0,1] by more than {RANGE_TOL} at t={t}", t, dict(fields)
                )


def _run_strang(fields, tags, grid, cfg, nu, make_reaction, config_summary):
    """Shared Strang loop: half reaction, diffusion, half reaction.

    make_reaction(fields) -> rhs closure over the frozen quantities for
    one substep; it is rebuilt at each substep entry.
    """
    _check_cfl(cfg, grid, nu)
    n_steps = int(round(cfg.t_end / cfg.dt))
    n_records = n_steps // cfg.record_every + 1
    rec = _Recorder(grid, tags, n_records)
    rec.record(0.0, fields)
    diff = _Diffusion(grid, nu, cfg.dt, cfg.boundary)

    state = np.array([fields[tag] for tag in tags])
    half = 0.5 * cfg.dt
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            rhs = make_reaction(dict(zip(tags, state)))
            state = _rk4(rhs, state, half)
            if not np.isfinite(state).all():
                raise FieldInvariantError(
                    f"state became non-finite at t={step * cfg.dt} "
                    "(reaction overshoot; reduce dt or smooth the initial data)",
                    step * cfg.dt, dict(zip(tags, state)),
                )
            state = np.array([diff.step(comp, cfg.scheme) for comp in state])
            rhs = make_reaction(dict(zip(tags, state)))
            state = _rk4(rhs, state, half)
            if step % cfg.record_every == 0:
                t = step * cfg.dt
                current = dict(zip(tags, state))
                _range_guard(t, current)
                rec.record(t, current)
    return rec.finish(config_summary)


# ---------------------------------------------------------------------------
# The three simulators
# ---------------------------------------------------------------------------


def simulate_pqd(init, fp: FitnessParams, grid: Grid1D, cfg: SimConfig) -> Trajectory:
    """Integrate the (p, q, D) system.

    Args:
        init: tuple of three arrays (p, q, D) on the grid, fronts near
            (1, 1, 0) on the left and (0, 0, 0) on the right.
    """
    p0, q0, D0 = (np.asarray(a, dtype=float).copy() for a in init)
    fields = {"p": p0, "q": q0, "D": D0}
    _check_boundary_init(fields)
    _range_guard(0.0, fields)
    dx = grid.dx

    def make_reaction(_current):
        def rhs(state):
            p, q, D = state
            grad_term = fp.sigma2 * _gradient(p, dx) * _gradient(q, dx)
            selA = fp.SA * (2.0 * p - 1.0) + fp.sA
            selB = fp.SB * (2.0 * q - 1.0) + fp.sB
            dp = selA * p * (1.0 - p) + selB * D
            dq = selB * q * (1.0 - q) + selA * D
            dD = grad_term - (fp.r + (2.0 * p - 1.0) * selA + (2.0 * q - 1.0) * selB) * D
            return np.array([dp, dq, dD])

        return rhs

    summary = {"model": "pqd", "params": _fp_dict(fp), "config": _cfg_dict(cfg)}
    return _run_strang(fields, ["p", "q", "D"], grid, cfg, fp.sigma2 / 2.0,
                       make_reaction, summary)


def simulate_gametes(init, fp: FitnessParams, grid: Grid1D, cfg: SimConfig) -> Trajectory:
    """Integrate the four-gamete reaction-diffusion system.

    The reaction is the per-generation net change of the exact recursion,
    R(y) = step(y) - y, whose components sum to zero pointwise.
    """
    arrays = [np.asarray(a, dtype=float).copy() for a in init]
    fields = dict(zip(["u", "v", "w", "z"], arrays))
    _check_boundary_init(fields)
    _range_guard(0.0, fields)

    def make_reaction(_current):
        def rhs(state):
            u, v, w, z = state
            nu_, nv_, nw_, nz_ = genetics._step_arrays(u, v, w, z, fp)
            return np.array([nu_ - u, nv_ - v, nw_ - w, nz_ - z])

        return rhs

    summary = {"model": "gametes", "params": _fp_dict(fp), "config": _cfg_dict(cfg)}
    return _run_strang(fields, ["u", "v", "w", "z"], grid, cfg, fp.sigma2 / 2.0,
                       make_reaction, summary)


def simulate_reduced(init, S: float, eps: float, r: float,
                     grid: Grid1D, cfg: SimConfig) -> Trajectory:
    """Integrate the reduced scalar equation for stacked clines.

    Works in the rescaled frame (unit diffusion); convert measured speeds
    to the original frame by multiplying with sigma/sqrt(2). The gradient
    coupling scales with 2/r; pass r = inf for the uncoupled bistable
    control. u_x is recomputed at every Runge-Kutta stage.
    """
    u0 = np.asarray(init, dtype=float).copy()
    fields = {"u_reduced": u0}
    _check_boundary_init(fields)
    _range_guard(0.0, fields)
    dx = grid.dx
    two_over_r = 0.0 if math.isinf(r) else 2.0 / r

    def make_reaction(_current):
        def rhs(state):
            u = state[0]
            ux = _gradient(u, dx)
            du = (S * bistable_f(u) + eps * logistic_g(u)
                  + two_over_r * (S * (2.0 * u - 1.0) + eps) * ux * ux)
            return du[np.newaxis, :]

        return rhs

    summary = {"model": "reduced",
               "params": {"S": S, "eps": eps, "r": r},
               "config": _cfg_dict(cfg)}
    return _run_strang(fields, ["u_reduced"], grid, cfg, 1.0, make_reaction, summary)


def _fp_dict(fp: FitnessParams) -> dict:
    return {"sA": fp.sA, "sB": fp.sB, "SA": fp.SA, "SB": fp.SB,
            "r": fp.r, "sigma2": fp.sigma2}


def _cfg_dict(cfg: SimConfig) -> dict:
    return {"dt": cfg.dt, "t_end": cfg.t_end, "record_every": cfg.record_every,
            "boundary": cfg.boundary, "scheme": cfg.scheme}


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def qle_disequilibrium(p: np.ndarray, q: np.ndarray, grid: Grid1D,
                       sigma2: float, r: float, mode: str = "local") -> Field1D:
    """Quasi-equilibrium linkage disequilibrium generated by the gradients.

    "local" returns (sigma2 / r) p_x q_x. "kernel" convolves p_x q_x with
    the exponential kernel 0.5 sqrt(2r/sigma2) exp(-sqrt(2r/sigma2) |x|)
    (normalized to unit mass on the grid) before scaling, which is the
    steady balance of diffusion, decay at rate r, and the gradient source.
    """
    dx = grid.dx
    source = _gradient(np.asarray(p, float), dx) * _gradient(np.asarray(q, float), dx)
    if mode == "local":
        vals = (sigma2 / r) * source
    elif mode == "kernel":
        decay = math.sqrt(2.0 * r / sigma2)
        half = min(int(math.ceil(20.0 / (decay * dx))), (source.size - 1) // 2)
        offsets = np.arange(-half, half + 1) * dx
        kernel = 0.5 * decay * np.exp(-decay * np.abs(offsets)) * dx
        kernel /= kernel.sum()
        vals = (sigma2 / r) * np.convolve(source, kernel, mode="same")
    else:
        raise ValueError(f"mode must be 'local' or 'kernel', got {mode!r}")
    return Field1D(vals, "D")


def front_position_values(values: np.ndarray, x: np.ndarray, level: float = 0.5) -> float:
    """Abscissa where a decreasing profile crosses ``level``.

    Linear interpolation between the bracketing nodes. A profile sitting
    exactly at a node value equal to ``level`` crosses at that node. For
    a sharp step the convention lands midway between the two nodes.

    Raises:
        FrontTrackingError: no crossing, or more than one.
    """
    f = np.asarray(values, dtype=float) - level
    signs = np.sign(f)
    # Treat exact zeros as crossings at the node itself.
    zero_nodes = np.where(signs == 0.0)[0]
    changes = np.where(signs[:-1] * signs[1:] < 0.0)[0]
    crossings = len(changes) + len(zero_nodes)
    if crossings == 0:
        raise FrontTrackingError("profile does not cross the level", 0)
    if crossings > 1:
        raise FrontTrackingError(
            f"profile crosses the level {crossings} times", crossings
        )
    if len(zero_nodes) == 1:
        return float(x[zero_nodes[0]])
    i = changes[0]
    frac = f[i] / (f[i] - f[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def front_position(f: Field1D, grid: Grid1D, level: float = 0.5) -> float:
    """Level crossing of a decreasing front field."""
    return front_position_values(f.values, grid.x, level)


@dataclass(frozen=True)
class SpeedFit:
    """Front speed measurement over a time window."""

    times: np.ndarray       # midpoints of the central differences
    speeds: np.ndarray      # instantaneous central-difference speeds
    fitted_speed: float     # least-squares slope over the window (headline)
    window: tuple[float, float]


def instantaneous_speed(traj: Trajectory, tag: str,
                        window: tuple[float, float] | None = None) -> SpeedFit:
    """Front speed of a tracked field: central differences plus a linear fit.

    Raises:
        InsufficientSamplesError: fewer than 3 recorded positions in window.
    """
    if tag not in traj.front_positions:
        raise KeyError(f"no tracked front for tag {tag!r}")
    t = traj.times
    pos = traj.front_positions[tag]
    if window is None:
        window = (float(t[0]), float(t[-1]))
    mask = (t >= window[0]) & (t <= window[1]) & np.isfinite(pos)
    if int(mask.sum()) < 3:
        raise InsufficientSamplesError(
            f"need >= 3 front samples in window {window}, got {int(mask.sum())}"
        )
    tw, pw = t[mask], pos[mask]
    speeds = (pw[2:] - pw[:-2]) / (tw[2:] - tw[:-2])
    fitted = float(np.polyfit(tw, pw, 1)[0])
    return SpeedFit(times=tw[1:-1], speeds=speeds, fitted_speed=fitted,
                    window=(float(tw[0]), float(tw[-1])))


def stacked_pqd_init(grid: Grid1D, S_like: float, sigma2: float = 2.0,
                     offset_p: float = 0.0, offset_q: float = 0.0,
                     qle_D: bool = False, r: float | None = None):
    """Front-like initial data for the full system, optionally QLE-seeded D.

    Front widths follow the standing-cline scale in the original frame,
    sqrt(sigma2/2)/sqrt(S). With offsets the two clines start apart.
    """
    scale = math.sqrt(sigma2 / 2.0)
    x = grid.x
    p = logistic_front(x / scale, S_like, center=offset_p / scale)
    q = logistic_front(x / scale, S_like, center=offset_q / scale)
    if qle_D:
        if r is None:
            raise ValueError("qle_D initial data needs r")
        D = qle_disequilibrium(p, q, grid, sigma2, r, mode="local").values
    else:
        D = np.zeros_like(x)
    return p, q, D
