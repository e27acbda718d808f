"""Truss sizing problem definition, loading and validation.

Problem files are JSON and use engineering units (node coordinates in m,
areas in mm², forces in kN, E in GPa, stresses in MPa, displacements in mm,
density in kg/m³). Everything is converted to SI on load.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

MM2 = 1e-6  # mm² -> m²
KN = 1e3
GPA = 1e9
MPA = 1e6
MM = 1e-3


class ProblemError(ValueError):
    """Raised for malformed or inconsistent problem definitions."""


@dataclass(frozen=True)
class Node3D:
    id: int
    coords: tuple[float, float, float]
    support: tuple[bool, bool, bool] = (False, False, False)


@dataclass(frozen=True)
class Member:
    id: int
    group: int
    start: int
    end: int
    length: float  # m


@dataclass(frozen=True)
class LoadCase:
    # node id -> (Fx, Fy, Fz) in N
    forces: tuple[tuple[int, tuple[float, float, float]], ...]

    def as_dict(self) -> dict[int, tuple[float, float, float]]:
        return dict(self.forces)


@dataclass(frozen=True)
class Catalog:
    """Ascending list of permitted cross-sectional areas in mm²."""

    areas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.areas) < 2:
            raise ProblemError("catalog needs at least two areas")
        if any(a <= 0 for a in self.areas):
            raise ProblemError("catalog areas must be positive")
        for k in range(1, len(self.areas)):
            if not self.areas[k] > self.areas[k - 1]:
                raise ProblemError(
                    f"catalog is not strictly ascending at position {k + 1} "
                    f"({self.areas[k - 1]} -> {self.areas[k]})"
                )

    @property
    def b(self) -> int:
        return len(self.areas)

    def __len__(self) -> int:
        return len(self.areas)

    def __getitem__(self, h: int) -> float:
        return self.areas[h]

    def index_of(self, area: float, tol: float = 0.005) -> int:
        """0-based index of ``area`` in the catalog (matched to ``tol`` mm²)."""
        k = bisect_left(self.areas, area - tol)
        if k < len(self.areas) and abs(self.areas[k] - area) <= tol:
            return k
        raise ProblemError(f"area {area} mm² is not in the catalog")


def arithmetic_catalog(start: float, step: float, count: int) -> Catalog:
    """Catalog ``start, start + step, ...`` with ``count`` entries, rounded to 0.01 mm²."""
    if start <= 0 or step <= 0:
        raise ProblemError("start and step must be positive")
    if count < 2:
        raise ProblemError("count must be at least 2")
    return Catalog(tuple(round(start + k * step, 2) for k in range(count)))


def member_length(a: Node3D, b: Node3D) -> float:
    length = math.dist(a.coords, b.coords)
    if length == 0.0:
        raise ProblemError(f"zero-length member between nodes {a.id} and {b.id}")
    return length


@dataclass(frozen=True)
class TrussProblem:
    """A discrete sizing problem in SI units.

    ``stress_limits`` are (min, max) in Pa and ``displacement_limits`` are
    (min, max) in m. Catalog areas stay in mm².
    """

    nodes: tuple[Node3D, ...]
    members: tuple[Member, ...]
    load_cases: tuple[LoadCase, ...]
    density: float  # kg/m³
    elastic_modulus: float  # Pa
    stress_limits: tuple[float, float]
    displacement_limits: tuple[float, float]
    catalog: Catalog
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        validate(self)

    @property
    def c(self) -> int:
        return len(self.nodes)

    @property
    def g(self) -> int:
        return max(m.group for m in self.members)

    @property
    def b(self) -> int:
        return self.catalog.b

    def group_members(self, group: int) -> list[Member]:
        return [m for m in self.members if m.group == group]

    def group_sizes(self) -> list[int]:
        return [len(self.group_members(i)) for i in range(1, self.g + 1)]

    def group_lengths(self) -> list[float]:
        """Total member length per group, m."""
        sums = [0.0] * self.g
        for m in self.members:
            sums[m.group - 1] += m.length
        return sums

    def node(self, node_id: int) -> Node3D:
        return self.nodes[node_id - 1]

    def with_displacement_limit(self, limit_mm: float) -> TrussProblem:
        """Copy with symmetric displacement bounds of ``limit_mm``."""
        from dataclasses import replace

        return replace(self, displacement_limits=(-limit_mm * MM, limit_mm * MM))


def validate(problem: TrussProblem) -> None:
    nodes = problem.nodes
    if not nodes:
        raise ProblemError("no nodes defined")
    for k, node in enumerate(nodes, start=1):
        if node.id != k:
            raise ProblemError(f"node ids must be contiguous from 1; got {node.id} at position {k}")
    if not problem.members:
        raise ProblemError("no members defined")
    c = len(nodes)
    for m in problem.members:
        for end in (m.start, m.end):
            if not 1 <= end <= c:
                raise ProblemError(f"member {m.id} references missing node {end}")
        if m.start == m.end:
            raise ProblemError(f"member {m.id} connects node {m.start} to itself")
        expected = member_length(nodes[m.start - 1], nodes[m.end - 1])
        if not math.isclose(m.length, expected, rel_tol=1e-12):
            raise ProblemError(f"member {m.id} length {m.length} disagrees with geometry")
        if m.group < 1:
            raise ProblemError(f"member {m.id} has invalid group {m.group}")
    present = {m.group for m in problem.members}
    for i in range(1, max(present) + 1):
        if i not in present:
            raise ProblemError(f"group {i} is empty")
    if not problem.load_cases:
        raise ProblemError("at least one load case is required")
    for n, case in enumerate(problem.load_cases, start=1):
        if not any(any(f != 0.0 for f in vec) for _, vec in case.forces):
            raise ProblemError(f"load case {n} has no nonzero force")
        for node_id, _ in case.forces:
            if not 1 <= node_id <= c:
                raise ProblemError(f"load case {n} references missing node {node_id}")
    smin, smax = problem.stress_limits
    dmin, dmax = problem.displacement_limits
    if not smin < 0 < smax:
        raise ProblemError("stress limits must satisfy min < 0 < max")
    if not dmin < 0 < dmax:
        raise ProblemError("displacement limits must satisfy min < 0 < max")
    if problem.density <= 0 or problem.elastic_modulus <= 0:
        raise ProblemError("density and elastic modulus must be positive")


# ---------------------------------------------------------------------------
# JSON problem files
# ---------------------------------------------------------------------------


def _parse_catalog(raw: Any) -> Catalog:
    if isinstance(raw, dict):
        try:
            return arithmetic_catalog(float(raw["start"]), float(raw["step"]), int(raw["count"]))
        except KeyError as exc:
            raise ProblemError(f"catalog spec is missing key {exc}") from None
    if isinstance(raw, list):
        return Catalog(tuple(float(a) for a in raw))
    raise ProblemError("catalog must be a list of areas or {start, step, count}")


def _expand_ids(entry: Any) -> list[int]:
    """Member ids from a list of ints and "a-b" range strings."""
    if isinstance(entry, (int, str)):
        entry = [entry]
    ids: list[int] = []
    for item in entry:
        if isinstance(item, str) and "-" in item:
            lo, hi = item.split("-")
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(item))
    return ids


def problem_from_dict(data: dict[str, Any], name: str = "") -> TrussProblem:
    for key in ("nodes", "members", "load_cases", "material", "limits", "catalog"):
        if key not in data:
            raise ProblemError(f"problem file is missing top-level key {key!r}")
    planar = bool(data.get("planar", False))

    nodes = []
    for k, raw in enumerate(data["nodes"], start=1):
        coords = tuple(float(v) for v in raw["coords"])
        if len(coords) == 2:
            coords = (*coords, 0.0)
        if len(coords) != 3:
            raise ProblemError(f"node {raw.get('id', k)} needs 2 or 3 coordinates")
        support = [bool(s) for s in raw.get("support", [False, False, False])]
        support += [False] * (3 - len(support))
        if planar:
            support[2] = True
        nodes.append(Node3D(int(raw.get("id", k)), coords, tuple(support)))  # type: ignore[arg-type]
    nodes.sort(key=lambda n: n.id)
    by_id = {n.id: n for n in nodes}

    raw_members = data["members"]
    endpoints: dict[int, tuple[int, int]] = {}
    member_group: dict[int, int] = {}
    for k, raw in enumerate(raw_members, start=1):
        if isinstance(raw, dict):
            mid = int(raw.get("id", k))
            a, b = (int(v) for v in raw["nodes"])
            if "group" in raw:
                member_group[mid] = int(raw["group"])
        else:
            mid = k
            a, b = (int(v) for v in raw)
        for end in (a, b):
            if end not in by_id:
                raise ProblemError(f"member {mid} references missing node {end}")
        endpoints[mid] = (a, b)

    groups = data.get("groups")
    if groups is not None:
        member_group = {}
        for i, entry in enumerate(groups, start=1):
            ids = _expand_ids(entry)
            if not ids:
                raise ProblemError(f"group {i} is empty")
            for mid in ids:
                if mid not in endpoints:
                    raise ProblemError(f"group {i} references missing member {mid}")
                if mid in member_group:
                    raise ProblemError(f"member {mid} is assigned to more than one group")
                member_group[mid] = i
    elif not member_group:
        # no grouping: one group per member
        member_group = {mid: k for k, mid in enumerate(sorted(endpoints), start=1)}
    missing = sorted(set(endpoints) - set(member_group))
    if missing:
        raise ProblemError(f"members without a group: {missing}")

    members = []
    for mid in sorted(endpoints):
        a, b = endpoints[mid]
        if a == b:
            raise ProblemError(f"member {mid} connects node {a} to itself")
        members.append(Member(mid, member_group[mid], a, b, member_length(by_id[a], by_id[b])))

    load_cases = []
    for n, raw in enumerate(data["load_cases"], start=1):
        forces = raw.get("forces", raw) if isinstance(raw, dict) else None
        if not isinstance(forces, dict):
            raise ProblemError(f"load case {n} must map node ids to force vectors")
        vecs = []
        for node_id, vec in sorted(forces.items(), key=lambda kv: int(kv[0])):
            vec = [float(v) * KN for v in vec]
            vec += [0.0] * (3 - len(vec))
            if int(node_id) not in by_id:
                raise ProblemError(f"load case {n} references missing node {node_id}")
            vecs.append((int(node_id), tuple(vec)))
        load_cases.append(LoadCase(tuple(vecs)))  # type: ignore[arg-type]

    material = data["material"]
    limits = data["limits"]
    stress = _limit_pair(limits["stress"])
    disp = _limit_pair(limits["displacement"])
    return TrussProblem(
        nodes=tuple(nodes),
        members=tuple(members),
        load_cases=tuple(load_cases),
        density=float(material["density"]),
        elastic_modulus=float(material["E"]) * GPA,
        stress_limits=(stress[0] * MPA, stress[1] * MPA),
        displacement_limits=(disp[0] * MM, disp[1] * MM),
        catalog=_parse_catalog(data["catalog"]),
        name=name or str(data.get("name", "")),
    )


def _limit_pair(raw: Any) -> tuple[float, float]:
    if isinstance(raw, (int, float)):
        return (-float(raw), float(raw))
    lo, hi = raw
    return (float(lo), float(hi))


def load_problem(path: str | Path) -> TrussProblem:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ProblemError(f"{path}: top level must be an object")
    return problem_from_dict(data, name=data.get("name", path.stem))


def problem_to_dict(problem: TrussProblem) -> dict[str, Any]:
    groups: list[list[int]] = [[] for _ in range(problem.g)]
    for m in problem.members:
        groups[m.group - 1].append(m.id)
    return {
        "name": problem.name,
        "nodes": [
            {"id": n.id, "coords": list(n.coords), "support": list(n.support)}
            for n in problem.nodes
        ],
        "members": [{"id": m.id, "nodes": [m.start, m.end]} for m in problem.members],
        "groups": groups,
        "load_cases": [
            {"forces": {str(k): [f / KN for f in vec] for k, vec in case.forces}}
            for case in problem.load_cases
        ],
        "material": {"density": problem.density, "E": problem.elastic_modulus / GPA},
        "limits": {
            "stress": [s / MPA for s in problem.stress_limits],
            "displacement": [d / MM for d in problem.displacement_limits],
        },
        "catalog": list(problem.catalog.areas),
    }


def save_problem(problem: TrussProblem, path: str | Path) -> None:
    Path(path).write_text(json.dumps(problem_to_dict(problem), indent=2) + "\n")


def check_areas(problem: TrussProblem, areas: Sequence[float]) -> tuple[float, ...]:
    """Validate an area assignment (mm²) and snap it onto exact catalog values."""
    if len(areas) != problem.g:
        raise ProblemError(f"expected {problem.g} areas, got {len(areas)}")
    return tuple(problem.catalog[problem.catalog.index_of(a)] for a in areas)


def areas_from_indices(problem: TrussProblem, indices: Iterable[int]) -> tuple[float, ...]:
    return tuple(problem.catalog[h] for h in indices)
