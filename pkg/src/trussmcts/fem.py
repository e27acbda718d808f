"""Direct stiffness analysis of pin-jointed trusses.

Areas are passed in mm² and results are reported in engineering units
(mm, MPa, kN, kg). The global stiffness is linear in the group areas, so
each group's unit-area stiffness is assembled once per problem and the
stiffness for a design is a weighted sum of those blocks.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .problem import KN, MM, MM2, MPA, TrussProblem, check_areas

FEAS_TOL = 1e-9
AXES = "xyz"


class UnstableStructureError(RuntimeError):
    """The stiffness matrix is singular: the truss is a mechanism."""

    def __init__(self, message: str, node: int, axis: str):
        super().__init__(message)
        self.node = node
        self.axis = axis


@dataclass(frozen=True)
class AnalysisResult:
    displacements: np.ndarray  # (n_cases, c, 3) mm
    stresses: np.ndarray  # (n_cases, n_members) MPa, tension positive
    reactions: np.ndarray  # (n_cases, c, 3) kN, zero at unsupported dofs
    weight: float  # kg
    feasible: bool
    violation: float  # max constraint ratio - 1

    @property
    def max_displacement(self) -> float:
        """Largest displacement component magnitude over all cases, mm."""
        return float(np.abs(self.displacements).max())


class Evaluation(NamedTuple):
    feasible: bool
    weight: float
    violation: float


def _ratio(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.where(values >= 0.0, values / hi, values / lo)


def _weight(density: float, areas_mm2: Sequence[float], lengths: np.ndarray) -> float:
    # one formula everywhere so equal designs give bit-identical weights
    x = np.asarray(areas_mm2, dtype=float) * MM2
    return float(density * (x @ lengths))


class Analyzer:
    """Precomputed assembly data for one problem."""

    def __init__(self, problem: TrussProblem):
        self.problem = problem
        c = problem.c
        ndof = 3 * c
        self.ndof = ndof
        supported = np.array([s for n in problem.nodes for s in n.support], dtype=bool)
        self.free = np.flatnonzero(~supported)
        self.fixed = np.flatnonzero(supported)
        g = problem.g
        E = problem.elastic_modulus

        k_groups = np.zeros((g, ndof, ndof))
        stress_rows = np.zeros((len(problem.members), ndof))
        for row, m in enumerate(problem.members):
            p1 = np.array(problem.node(m.start).coords)
            p2 = np.array(problem.node(m.end).coords)
            e = (p2 - p1) / m.length
            block = np.outer(e, e) * (E / m.length)
            d1 = slice(3 * (m.start - 1), 3 * m.start)
            d2 = slice(3 * (m.end - 1), 3 * m.end)
            k = k_groups[m.group - 1]
            k[d1, d1] += block
            k[d2, d2] += block
            k[d1, d2] -= block
            k[d2, d1] -= block
            stress_rows[row, d1] = -e * (E / m.length)
            stress_rows[row, d2] = e * (E / m.length)
        self.k_groups = k_groups
        self.k_free = np.ascontiguousarray(k_groups[:, self.free][:, :, self.free])
        self.stress_free = stress_rows[:, self.free]

        loads = np.zeros((ndof, len(problem.load_cases)))
        for n, case in enumerate(problem.load_cases):
            for node_id, vec in case.forces:
                loads[3 * (node_id - 1) : 3 * node_id, n] += vec
        self.loads = loads
        self.loads_free = np.ascontiguousarray(loads[self.free])

        self.group_lengths = np.array(problem.group_lengths())
        self.stress_limits = problem.stress_limits
        self.disp_limits = problem.displacement_limits
        self._check_stability()

    def _check_stability(self) -> None:
        if self.free.size == 0:
            return
        k = self.k_free.sum(axis=0)
        vals, vecs = np.linalg.eigh(k)
        if vals[0] <= 1e-10 * vals[-1]:
            dof = int(self.free[np.argmax(np.abs(vecs[:, 0]))])
            node, axis = dof // 3 + 1, AXES[dof % 3]
            raise UnstableStructureError(
                f"unstable structure: stiffness is singular, mechanism involves node {node} "
                f"in {axis}", node, axis)

    def stiffness(self, areas_mm2: Sequence[float]) -> np.ndarray:
        """Global stiffness over the free dofs, N/m."""
        x = np.asarray(areas_mm2, dtype=float) * MM2
        return np.tensordot(x, self.k_free, axes=1)

    def weight(self, areas_mm2: Sequence[float]) -> float:
        return _weight(self.problem.density, areas_mm2, self.group_lengths)

    def _free_solution(self, areas_mm2: Sequence[float]) -> np.ndarray:
        return np.linalg.solve(self.stiffness(areas_mm2), self.loads_free)

    def evaluate(self, areas_mm2: Sequence[float]) -> Evaluation:
        """Feasibility and weight only; the hot path used by the search."""
        u = self._free_solution(areas_mm2)
        sigma = self.stress_free @ u
        worst = max(
            float(_ratio(sigma, *self.stress_limits).max()),
            float(_ratio(u, *self.disp_limits).max()),
        )
        return Evaluation(worst <= 1.0 + FEAS_TOL, self.weight(areas_mm2), worst - 1.0)

    def solve(self, areas_mm2: Sequence[float]) -> AnalysisResult:
        n_cases = self.loads.shape[1]
        u_free = self._free_solution(areas_mm2)
        u = np.zeros((self.ndof, n_cases))
        u[self.free] = u_free
        sigma = self.stress_free @ u_free
        x = np.asarray(areas_mm2, dtype=float) * MM2
        k_full = np.tensordot(x, self.k_groups, axes=1)
        reactions = np.zeros_like(u)
        reactions[self.fixed] = k_full[self.fixed] @ u - self.loads[self.fixed]
        worst = max(
            float(_ratio(sigma, *self.stress_limits).max()),
            float(_ratio(u_free, *self.disp_limits).max()) if u_free.size else -1.0,
        )
        c = self.problem.c
        return AnalysisResult(
            displacements=(u.T / MM).reshape(n_cases, c, 3),
            stresses=sigma.T / MPA,
            reactions=(reactions.T / KN).reshape(n_cases, c, 3),
            weight=self.weight(areas_mm2),
            feasible=worst <= 1.0 + FEAS_TOL,
            violation=worst - 1.0,
        )


@functools.lru_cache(maxsize=64)
def analyzer(problem: TrussProblem) -> Analyzer:
    return Analyzer(problem)


def assemble_stiffness(problem: TrussProblem, areas: Sequence[float]) -> np.ndarray:
    return analyzer(problem).stiffness(check_areas(problem, areas))


def solve(problem: TrussProblem, areas: Sequence[float]) -> AnalysisResult:
    return analyzer(problem).solve(check_areas(problem, areas))


def total_weight(problem: TrussProblem, areas: Sequence[float]) -> float:
    """Structural weight in kg for areas in mm² (not snapped to the catalog)."""
    lengths = np.array(problem.group_lengths())
    if len(areas) != len(lengths):
        raise ValueError(f"expected {len(lengths)} areas, got {len(areas)}")
    return _weight(problem.density, areas, lengths)


def alpha_weight(problem: TrussProblem) -> float:
    """Weight with every group at the smallest catalog area."""
    return total_weight(problem, [problem.catalog[0]] * problem.g)


def max_weight(problem: TrussProblem) -> float:
    """Weight with every group at the largest catalog area."""
    return total_weight(problem, [problem.catalog[-1]] * problem.g)


def dump_analysis(problem: TrussProblem, areas: Sequence[float], path: str | Path) -> AnalysisResult:
    """Write a per-member and per-node CSV report of one analysis."""
    areas = check_areas(problem, areas)
    result = analyzer(problem).solve(areas)
    n_cases = result.stresses.shape[0]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "id", "group", "length_m", "area_mm2"]
                   + [f"case{n + 1}_{q}" for n in range(n_cases) for q in ("x", "y", "z")])
        for row, m in enumerate(problem.members):
            w.writerow(["member", m.id, m.group, f"{m.length:.6f}", areas[m.group - 1]]
                       + [v for n in range(n_cases) for v in (f"{result.stresses[n, row]:.6f}", "", "")])
        for k, node in enumerate(problem.nodes):
            w.writerow(["node", node.id, "", "", ""]
                       + [f"{result.displacements[n, k, q]:.6f}" for n in range(n_cases) for q in range(3)])
    return result
