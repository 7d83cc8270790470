"""Cell-to-UAV assignment maps and their user-mass measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError

INFEASIBLE = -1


@dataclass(frozen=True)
class Partition:
    """Assignment of every grid cell to a UAV index, or INFEASIBLE.

    masses holds the user mass of each UAV's region; the masses plus the
    unassigned mass sum to 1.
    """

    assignment: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.assignment, dtype=np.int64)
        m = np.ascontiguousarray(self.masses, dtype=float)
        if a.ndim != 1 or m.ndim != 1:
            raise ValueError("assignment and masses must be 1-D")
        if a.min(initial=INFEASIBLE) < INFEASIBLE or a.max(initial=0) >= len(m):
            raise ValueError("assignment indices out of range")
        if np.any(m < 0):
            raise ValueError("region masses must be non-negative")
        a.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "masses", m)

    @property
    def n_uavs(self):
        return len(self.masses)

    def region(self, i):
        """Boolean mask of UAV i's cells."""
        return self.assignment == i

    def unassigned_mass(self, grid):
        """User mass with no serving UAV."""
        return float(grid.cell_mass[self.assignment == INFEASIBLE].sum())


def region_masses(grid, assignment, n_uavs):
    """User mass per UAV for a given assignment array."""
    served = assignment >= 0
    return np.bincount(
        assignment[served], weights=grid.cell_mass[served], minlength=n_uavs
    )


def assign_by_min_cost(grid, costs, feasible=None):
    """Assign each cell to its cheapest UAV, lowest index winning ties.

    costs is (n_uavs, n_cells) and may hold +inf for unusable links.  Cells
    outside `feasible` get INFEASIBLE; by default a cell is feasible when it
    has at least one finite cost.  A cell marked feasible but with no finite
    cost raises InfeasibleError.
    """
    costs = np.asarray(costs, dtype=float)
    if costs.ndim != 2 or costs.shape[1] != grid.n_cells:
        raise ValueError("costs must be (n_uavs, n_cells)")
    if np.any(np.isnan(costs)):
        raise ValueError("costs must not contain NaN")
    has_choice = np.isfinite(costs).any(axis=0)
    if feasible is None:
        feasible = has_choice
    else:
        feasible = np.asarray(feasible, dtype=bool)
        stuck = int(np.count_nonzero(feasible & ~has_choice))
        if stuck:
            raise InfeasibleError(f"{stuck} feasible cells have no finite cost")
    assignment = np.where(feasible, np.argmin(costs, axis=0), INFEASIBLE)
    return Partition(assignment, region_masses(grid, assignment, costs.shape[0]))


def weighted_voronoi(grid, radio, weights=None):
    """Best-signal partition: each cell goes to argmax of SINR / weight.

    Unweighted (weights None or all ones) this is the max-SINR diagram used
    as a baseline and as a starting partition.  Cells below the SINR floor
    for every UAV are left unassigned.
    """
    if weights is None:
        w = np.ones(radio.n_uavs)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (radio.n_uavs,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite, one per UAV")
    score = radio.sinr / w[:, None]
    costs = np.where(radio.feasible_by_uav, -score, np.inf)
    return assign_by_min_cost(grid, costs, feasible=radio.feasible)


def partition_to_csv(grid, part, path):
    """Write the assignment as cell_x_m,cell_y_m,uav_index rows."""
    rows = np.column_stack([grid.cell_x, grid.cell_y, part.assignment])
    np.savetxt(
        path,
        rows,
        fmt=["%.9g", "%.9g", "%d"],
        delimiter=",",
        header="cell_x_m,cell_y_m,uav_index",
        comments="",
    )
