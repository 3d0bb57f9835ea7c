"""Time evolution under H3, conservation drift and closed-orbit detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import core
from .core import PhaseState, SystemParams
from .errors import NoClosureError, SingularityApproachError, SingularStateError, StepFailureError

__all__ = [
    "Trajectory",
    "ObservableDrift",
    "DriftReport",
    "equations_of_motion",
    "integrate",
    "standard_observables",
    "drift_report",
    "closure_time",
    "closure_distance",
]

Observable = Callable[[SystemParams, PhaseState], float]

DEFAULT_FLOOR = 1e-8


def _require_dynamics_params(params: SystemParams) -> None:
    negative = [i + 1 for i, k in enumerate(params.strengths) if k < 0]
    if negative:
        raise ValueError(
            f"negative strengths (k_{negative}) allow collision orbits; rejected for integration"
        )


def _require_regular(params: SystemParams, state: PhaseState) -> None:
    if state.dof != params.dof:
        raise ValueError("state and params have different degrees of freedom")
    for i, (k, x) in enumerate(zip(params.strengths, state.positions)):
        if k != 0.0 and x == 0.0:
            raise SingularStateError(f"x_{i + 1} = 0 with k_{i + 1} = {k}")


def _vector_field(params: SystemParams):
    n = params.dof
    w2 = np.array([(params.omega0 * m) ** 2 for m in params.ratios])
    k = np.array(params.strengths)

    def rhs(t, y):
        x, p = y[:n], y[n:]
        return np.concatenate((p, -w2 * x + k / x**3 if k.any() else -w2 * x))

    return rhs


def equations_of_motion(params: SystemParams, state: PhaseState) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """(ẋ, ṗ) with ẋ_i = p_i and ṗ_i = −n_i²ω₀²x_i + k_i/x_i³."""
    _require_dynamics_params(params)
    _require_regular(params, state)
    xdot = state.momenta
    pdot = []
    for n, k, x in zip(params.ratios, params.strengths, state.positions):
        w = n * params.omega0
        f = -w * w * x
        if k != 0.0:
            f += k / x**3
        pdot.append(f)
    return tuple(xdot), tuple(pdot)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution; ``dense`` (when present) interpolates between samples."""

    times: np.ndarray
    positions: np.ndarray  # (samples, dof)
    momenta: np.ndarray  # (samples, dof)
    params: SystemParams
    dense: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if len(self.times) == 0:
            raise ValueError("empty trajectory")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must start at 0 and increase strictly")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> PhaseState:
        return PhaseState(tuple(self.positions[k]), tuple(self.momenta[k]))

    def states(self) -> list[PhaseState]:
        return [self.state(k) for k in range(len(self))]

    @property
    def initial_state(self) -> PhaseState:
        return self.state(0)

    @property
    def final_state(self) -> PhaseState:
        return self.state(len(self) - 1)

    def vector(self, k: int) -> np.ndarray:
        return np.concatenate((self.positions[k], self.momenta[k]))

    def state_at(self, t: float) -> PhaseState:
        """Interpolated state at an arbitrary time inside the horizon."""
        if self.dense is None:
            raise ValueError("trajectory was built without dense output")
        return PhaseState.from_vector(self.dense(t))


def integrate(
    params: SystemParams,
    state0: PhaseState,
    t_end: float,
    tolerance: float = 1e-12,
    stride: float | None = None,
    floor: float = DEFAULT_FLOOR,
) -> Trajectory:
    """Integrate Hamilton's equations for H3 from ``state0`` to ``t_end``.

    Uses the 8th-order Dormand-Prince pair with ``rtol = tolerance`` and
    ``atol = tolerance * 1e-2``.  With ``stride`` the output is sampled on a
    uniform grid (``t_end`` always included); otherwise at the accepted steps.
    Coordinates with a positive strength must stay above ``floor`` in magnitude.
    """
    _require_dynamics_params(params)
    _require_regular(params, state0)
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    n = params.dof
    y0 = np.array(state0.as_vector(), dtype=float)

    events = []
    for i, k in enumerate(params.strengths):
        if k > 0:
            # signed distance on the starting side: a step that jumps across
            # x_i = 0 still changes sign, unlike abs(x_i) - floor
            side = math.copysign(1.0, y0[i])

            def approach(t, y, i=i, side=side):
                return side * y[i] - floor

            approach.terminal = True
            events.append(approach)

    t_eval = None
    if stride is not None:
        if not stride > 0:
            raise ValueError("stride must be positive")
        t_eval = np.arange(0.0, t_end, stride)
        if t_end - t_eval[-1] > 1e-12 * t_end:
            t_eval = np.append(t_eval, t_end)
        else:
            t_eval[-1] = t_end

    sol = solve_ivp(
        _vector_field(params),
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=tolerance,
        atol=tolerance * 1e-2,
        t_eval=t_eval,
        dense_output=True,
        events=events or None,
    )
    if sol.status == 1:
        hit = next(idx for idx, ev in enumerate(sol.t_events) if len(ev))
        coord = [i for i, k in enumerate(params.strengths) if k > 0][hit]
        raise SingularityApproachError(
            f"|x_{coord + 1}| fell below {floor} at t = {sol.t_events[hit][0]:.6g}"
        )
    if sol.status != 0:
        raise StepFailureError(sol.message)

    ys = sol.y.T
    return Trajectory(
        times=np.asarray(sol.t, dtype=float),
        positions=ys[:, :n].copy(),
        momenta=ys[:, n:].copy(),
        params=params,
        dense=sol.sol,
    )


# ---------------------------------------------------------------------------
# Drift


@dataclass(frozen=True)
class ObservableDrift:
    initial: float
    max_abs: float
    max_rel: float  # max_abs / max(1, |initial|)


class DriftReport(dict):
    """Mapping ``name -> ObservableDrift``."""

    def worst_relative(self) -> float:
        return max((d.max_rel for d in self.values()), default=0.0)

    def as_dict(self) -> dict[str, dict[str, float]]:
        return {
            name: {"initial": d.initial, "max_abs": d.max_abs, "max_rel": d.max_rel}
            for name, d in self.items()
        }


def standard_observables(params: SystemParams, linear_extras: bool | None = None) -> dict[str, Observable]:
    """E_i, Re/Im M_ij for i < j, and Re/Im K_ij when every strength is zero.

    Names follow the CSV column contract (``E1``, ``reM12``, ``imK12``...).
    """
    if linear_extras is None:
        linear_extras = not any(params.strengths)
    n = params.dof
    obs: dict[str, Observable] = {}
    for i in range(n):
        obs[f"E{i + 1}"] = lambda p, s, i=i: core.energy_i(p, s, i)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        obs[f"reM{i + 1}{j + 1}"] = lambda p, s, i=i, j=j: core.deformed_constant(p, s, i, j).re
        obs[f"imM{i + 1}{j + 1}"] = lambda p, s, i=i, j=j: core.deformed_constant(p, s, i, j).im
    if linear_extras:
        for i, j in pairs:
            obs[f"reK{i + 1}{j + 1}"] = lambda p, s, i=i, j=j: core.linear_constant(p, s, i, j).re
            obs[f"imK{i + 1}{j + 1}"] = lambda p, s, i=i, j=j: core.linear_constant(p, s, i, j).im
    return obs


def drift_report(
    params: SystemParams,
    trajectory: Trajectory,
    observables: Mapping[str, Observable] | None = None,
) -> DriftReport:
    """Maximum deviation of each observable from its value at t = 0."""
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    if observables is None:
        observables = standard_observables(params)
    states = trajectory.states()
    report = DriftReport()
    for name, fn in observables.items():
        values = np.array([fn(params, s) for s in states], dtype=float)
        initial = float(values[0])
        max_abs = float(np.max(np.abs(values - initial)))
        report[name] = ObservableDrift(initial, max_abs, max_abs / max(1.0, abs(initial)))
    return report


# ---------------------------------------------------------------------------
# Closure


def closure_distance(trajectory: Trajectory, t: float) -> float:
    """Euclidean distance in (x, p) between the state at ``t`` and the initial state."""
    return float(np.linalg.norm(trajectory.dense(t) - trajectory.vector(0)))


def closure_time(
    params: SystemParams,
    state0: PhaseState,
    tolerance: float = 1e-6,
    horizon: float | None = None,
    integrator_tolerance: float = 1e-12,
) -> float:
    """Smallest ``t > 0`` at which the orbit returns to ``state0`` within ``tolerance``.

    The distance to the start is sampled at stride ``π/(50 ω₀ max n_i)``; every
    sampled local minimum is refined by bracketing the zero of
    ``d/dt |y(t) − y0|² = 2 (y − y0)·ẏ``.  The default horizon covers the
    linear common period ``2π/ω₀`` with a small margin.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    w0 = params.omega0
    if horizon is None:
        horizon = 2.0 * math.pi / w0 * 1.05
    traj = integrate(params, state0, horizon, integrator_tolerance)
    rhs = _vector_field(params)
    y0 = traj.vector(0)

    stride = math.pi / (50.0 * w0 * max(params.ratios))
    grid = np.arange(0.0, horizon, stride)
    dist = np.array([np.linalg.norm(traj.dense(t) - y0) for t in grid])

    def slope(t):
        y = traj.dense(t)
        return float(np.dot(y - y0, rhs(t, y)))

    for m in range(1, len(grid) - 1):
        if not (dist[m] <= dist[m - 1] and dist[m] <= dist[m + 1]):
            continue
        lo, hi = grid[m - 1], grid[m + 1]
        s_lo, s_hi = slope(lo), slope(hi)
        if s_lo < 0 < s_hi:
            t_star = brentq(slope, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        else:
            t_star = grid[m]
        if closure_distance(traj, t_star) < tolerance:
            return float(t_star)
    raise NoClosureError(f"no return within {tolerance} before t = {horizon:.6g}")
