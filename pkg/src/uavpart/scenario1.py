"""Service maximization under per-UAV hover budgets.

The hover budget of each UAV splits into control overhead plus serving time.
A fairness system turns the budgets into per-UAV load shares and a common
per-user resource; a concave dual ascent then shapes the regions so every
UAV's region mass hits its share while total delivered data is maximal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import compute_radio_field
from .errors import ConvergenceError, InfeasibleError
from .partition import Partition, assign_by_min_cost

DEFAULT_MASS_TOL = 1e-3
DEFAULT_MAX_ITER = 100_000
FAIRNESS_TOL_SCALE = 1e-9
FAIRNESS_MAX_ITER = 10_000
FAIRNESS_DAMPING = 0.5
MIN_STEP = 1e-18


@dataclass(frozen=True)
class ControlTimeModel:
    """Quadratic control overhead: g(n) = alpha * n^2 seconds for n users."""

    alpha: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError("alpha must be finite and non-negative")

    def time(self, n_users):
        return self.alpha * n_users**2

    def time_of_mass(self, mass, n_users):
        """Control seconds when a mass fraction of n_users is in the region."""
        return self.alpha * (n_users * mass) ** 2

    def rate_of_mass(self, mass, n_users):
        """Derivative of time_of_mass with respect to the mass fraction."""
        return 2.0 * self.alpha * n_users**2 * mass


def per_uav_controls(control, n_uavs):
    """Normalize a single ControlTimeModel or a sequence to one per UAV."""
    if isinstance(control, ControlTimeModel):
        return [control] * n_uavs
    models = list(control)
    if len(models) != n_uavs:
        raise ValueError(f"need one control model per UAV, got {len(models)}")
    return models


@dataclass(frozen=True)
class FairnessSolution:
    """Serving times and load shares that give every user the same resource.

    serve_times is the post-control serving time per UAV, target_masses the
    load shares (sum 1), and resource_per_user the common bandwidth-time
    product per user in Hz * s.
    """

    serve_times: np.ndarray
    target_masses: np.ndarray
    resource_per_user: float
    n_users: int


def solve_fairness_system(uavs, control, n_users, damping=FAIRNESS_DAMPING,
                          tol_scale=FAIRNESS_TOL_SCALE, max_iter=FAIRNESS_MAX_ITER):
    """Solve T_i = tau_i - g_i(N w_i), w_i = B_i T_i / sum_k B_k T_k.

    Damped fixed-point iteration starting from T_i = tau_i, converged when
    the largest serving-time update falls below tol_scale * max(tau).  Raises
    InfeasibleError when a budget cannot cover its control overhead (negative
    serving time) or the iteration does not settle.
    """
    if len(uavs) == 0:
        raise ValueError("need at least one UAV")
    if n_users < 1:
        raise ValueError("need at least one user")
    bw = np.array([u.bandwidth for u in uavs], dtype=float)
    tau = np.array([u.max_hover for u in uavs], dtype=float)
    if np.any(tau <= 0):
        raise ValueError("every hover budget must be positive")
    models = per_uav_controls(control, len(uavs))
    tol = tol_scale * tau.max()
    serve = tau.copy()
    for _ in range(max_iter):
        pool = float(bw @ serve)
        if pool <= 0:
            raise InfeasibleError("serving-time pool collapsed to zero")
        shares = bw * serve / pool
        target = tau - np.array(
            [m.time_of_mass(w, n_users) for m, w in zip(models, shares)]
        )
        updated = (1.0 - damping) * serve + damping * target
        if np.any(updated < 0):
            raise InfeasibleError("hover budget below control overhead")
        shift = np.abs(updated - serve).max()
        serve = updated
        if shift <= tol:
            break
    else:
        raise InfeasibleError("fairness split did not settle")
    pool = float(bw @ serve)
    shares = bw * serve / pool
    return FairnessSolution(serve, shares, pool / n_users, n_users)


@dataclass(frozen=True)
class DualPotentials:
    """Region potentials with the ascent trace.

    f_trace holds the accepted objective per iteration (strictly increasing),
    grad_trace the mass-mismatch norm, step_trace the accepted step size
    (zero on the initial row).
    """

    psi: np.ndarray
    f_trace: np.ndarray
    grad_trace: np.ndarray
    step_trace: np.ndarray


def build_cost_field(grid, radio, fairness, sinr_threshold=None):
    """Per-UAV transport cost: minus the per-user data volume, +inf below the
    SINR floor (floor inclusive)."""
    th = radio.sinr_threshold if sinr_threshold is None else sinr_threshold
    return np.where(
        radio.sinr >= th, -fairness.resource_per_user * radio.spectral_eff, np.inf
    )


def dual_value(grid, costs, psi, shares):
    """Concave dual objective psi . shares + integral of the shifted cell min."""
    best = (costs - psi[:, None]).min(axis=0)
    covered = np.isfinite(best)
    return float(psi @ shares + best[covered] @ grid.cell_mass[covered])


def dual_gradient(grid, costs, psi, shares):
    """Ascent direction: target shares minus the current region masses."""
    shifted = costs - psi[:, None]
    best = shifted.min(axis=0)
    covered = np.isfinite(best)
    winner = np.argmin(shifted, axis=0)
    masses = np.bincount(
        winner[covered], weights=grid.cell_mass[covered], minlength=len(psi)
    )
    return shares - masses


@dataclass(frozen=True)
class Scenario1Result:
    partition: Partition
    fairness: FairnessSolution
    potentials: DualPotentials
    service: np.ndarray
    radio: object


def solve_scenario1(grid, uavs, params, control, n_users, mass_tol=DEFAULT_MASS_TOL,
                    max_iter=DEFAULT_MAX_ITER, radio=None):
    """Partition the area so each UAV's region mass matches its fair share.

    Gradient ascent on the concave dual with a doubling/halving step search:
    starting from step 1, the step doubles while the objective keeps
    improving, otherwise it halves until it improves, so every accepted
    iterate increases the dual.  Stops when the mass-mismatch norm is at most
    mass_tol.  The returned service array is (n_uavs, n_cells) bits per user
    when served by each UAV.

    Raises InfeasibleError when more than mass_tol of the user mass has no
    link above the SINR floor, and ConvergenceError (with the trace attached)
    when the iteration budget runs out or no improving step exists.
    """
    if radio is None:
        radio = compute_radio_field(grid, uavs, params)
    fairness = solve_fairness_system(uavs, control, n_users)
    costs = build_cost_field(grid, radio, fairness)
    covered = np.isfinite(costs).any(axis=0)
    uncovered_mass = float(grid.cell_mass[~covered].sum())
    if uncovered_mass > mass_tol:
        raise InfeasibleError(
            f"{uncovered_mass:.3e} of the user mass has no link above the SINR floor"
        )
    shares = fairness.target_masses
    psi = np.zeros(len(uavs))
    value = dual_value(grid, costs, psi, shares)
    grad = dual_gradient(grid, costs, psi, shares)
    f_trace = [value]
    grad_trace = [float(np.linalg.norm(grad))]
    step_trace = [0.0]

    iters = 0
    while grad_trace[-1] > mass_tol:
        iters += 1
        if iters > max_iter:
            raise ConvergenceError(
                f"mass mismatch {grad_trace[-1]:.3e} after {max_iter} iterations",
                trace=(np.array(f_trace), np.array(grad_trace), np.array(step_trace)),
            )
        step = 1.0
        cand = dual_value(grid, costs, psi + step * grad, shares)
        if cand > value:
            while True:
                trial = dual_value(grid, costs, psi + 2.0 * step * grad, shares)
                if trial > cand:
                    step *= 2.0
                    cand = trial
                else:
                    break
        else:
            while cand <= value:
                step *= 0.5
                if step < MIN_STEP:
                    raise ConvergenceError(
                        "no improving step along the ascent direction",
                        trace=(np.array(f_trace), np.array(grad_trace), np.array(step_trace)),
                    )
                cand = dual_value(grid, costs, psi + step * grad, shares)
        psi = psi + step * grad
        value = cand
        grad = dual_gradient(grid, costs, psi, shares)
        f_trace.append(value)
        grad_trace.append(float(np.linalg.norm(grad)))
        step_trace.append(step)

    part = assign_by_min_cost(grid, costs - psi[:, None], feasible=covered)
    potentials = DualPotentials(
        psi=psi,
        f_trace=np.array(f_trace),
        grad_trace=np.array(grad_trace),
        step_trace=np.array(step_trace),
    )
    service = fairness.resource_per_user * radio.spectral_eff
    return Scenario1Result(part, fairness, potentials, service, radio)


def service_field_for_partition(grid, radio, uavs, control, n_users, part):
    """Per-user service when each UAV splits its own budget over its own
    region, with no cross-region fairness coupling.

    Serving time is tau_i minus the control overhead for the region's users,
    floored at zero; each of the region's N * a_i users gets an equal share
    B_i T_i / (N a_i) of the bandwidth-time product.  Used to evaluate
    baseline partitions; for a partition whose masses equal the fairness
    shares this reduces to the solver's own service field.
    """
    models = per_uav_controls(control, len(uavs))
    bw = np.array([u.bandwidth for u in uavs], dtype=float)
    tau = np.array([u.max_hover for u in uavs], dtype=float)
    a = part.masses
    serve = np.maximum(
        tau - np.array([m.time_of_mass(ai, n_users) for m, ai in zip(models, a)]), 0.0
    )
    scale = np.divide(
        bw * serve, n_users * a, out=np.zeros(len(uavs)), where=a > 0
    )
    return scale[:, None] * radio.spectral_eff
