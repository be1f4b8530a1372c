"""Triangular meshes of the unit square with DG edge topology.

The solver needs, beyond vertices and triangles, a full description of every
edge: which element(s) it belongs to, a consistently oriented unit normal,
its length, and a boundary tag.  The convention used throughout is that the
normal of an interior edge shared by triangles ``i < j`` points from ``i``
to ``j``, and boundary normals point out of the domain.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# geometric tolerance for boundary classification of imported meshes
_BOUNDARY_TOL = 1e-12


def _cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


class EdgeTag(Enum):
    INTERIOR = "interior"
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class EdgeInfo:
    """One mesh edge: endpoints, incident triangles, normal, length, tag."""

    endpoints: tuple[int, int]
    incident: tuple[int, ...]  # 1 or 2 triangle indices, ascending
    normal: np.ndarray  # unit 2-vector
    length: float
    tag: EdgeTag

    @property
    def is_boundary(self) -> bool:
        return len(self.incident) == 1


@dataclass(frozen=True)
class TriMesh:
    """Conforming triangulation with precomputed edge topology.

    Immutable after construction; safe to share between threads.
    """

    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3) vertex indices, counterclockwise
    edges: list[EdgeInfo]
    n_subdivisions: int
    h: float = field(init=False)

    def __post_init__(self):
        diam = 0.0
        for tri in self.triangles:
            p = self.vertices[tri]
            for a in range(3):
                d = np.linalg.norm(p[a] - p[(a + 1) % 3])
                diam = max(diam, d)
        object.__setattr__(self, "h", diam)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def triangle_area(self, t: int) -> float:
        p = self.vertices[self.triangles[t]]
        return 0.5 * abs(_cross2(p[1] - p[0], p[2] - p[0]))

    def triangle_centroid(self, t: int) -> np.ndarray:
        return self.vertices[self.triangles[t]].mean(axis=0)


def _classify_boundary_edge(p0: np.ndarray, p1: np.ndarray) -> EdgeTag:
    mid = 0.5 * (p0 + p1)
    if mid[0] < _BOUNDARY_TOL or mid[1] < _BOUNDARY_TOL:
        return EdgeTag.DIRICHLET
    return EdgeTag.NEUMANN


def _build_edges(vertices: np.ndarray, triangles: np.ndarray) -> list[EdgeInfo]:
    incidence: dict[tuple[int, int], list[int]] = {}
    for t, tri in enumerate(triangles):
        for a in range(3):
            key = tuple(sorted((int(tri[a]), int(tri[(a + 1) % 3]))))
            incidence.setdefault(key, []).append(t)

    edges = []
    for (v0, v1), tris in sorted(incidence.items()):
        p0, p1 = vertices[v0], vertices[v1]
        tangent = p1 - p0
        length = float(np.linalg.norm(tangent))
        normal = np.array([tangent[1], -tangent[0]]) / length
        tris = sorted(tris)
        if len(tris) == 2:
            # orient from the lower-index to the higher-index triangle
            c_i = vertices[triangles[tris[0]]].mean(axis=0)
            c_j = vertices[triangles[tris[1]]].mean(axis=0)
            if np.dot(normal, c_j - c_i) < 0:
                normal = -normal
            tag = EdgeTag.INTERIOR
        elif len(tris) == 1:
            centroid = vertices[triangles[tris[0]]].mean(axis=0)
            mid = 0.5 * (p0 + p1)
            if np.dot(normal, mid - centroid) < 0:
                normal = -normal
            tag = _classify_boundary_edge(p0, p1)
        else:
            raise ValueError(f"edge {(v0, v1)} shared by {len(tris)} triangles")
        edges.append(EdgeInfo((v0, v1), tuple(tris), normal, length, tag))
    return edges


def build_structured_mesh(n: int) -> TriMesh:
    """Uniform n-by-n triangulation of the unit square.

    Each grid cell is split along its lower-left to upper-right diagonal,
    giving 2n^2 congruent right triangles with h = sqrt(2)/n.
    """
    if n < 1:
        raise ValueError(f"subdivision count must be >= 1, got {n}")

    xs = np.linspace(0.0, 1.0, n + 1)
    xv, yv = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xv.ravel(), yv.ravel()])

    def vid(ix, iy):
        return iy * (n + 1) + ix

    triangles = []
    for iy in range(n):
        for ix in range(n):
            a = vid(ix, iy)
            b = vid(ix + 1, iy)
            c = vid(ix + 1, iy + 1)
            d = vid(ix, iy + 1)
            triangles.append((a, b, c))  # lower-right triangle
            triangles.append((a, c, d))  # upper-left triangle
    triangles = np.array(triangles, dtype=np.int64)

    edges = _build_edges(vertices, triangles)
    return TriMesh(vertices, triangles, edges, n)


def element_geometry(mesh: TriMesh, t: int):
    """Area, edge lengths and outward unit normals of triangle ``t``.

    Edge ``a`` runs from local vertex ``a`` to ``a+1`` (mod 3).
    """
    if not 0 <= t < mesh.n_triangles:
        raise IndexError(f"triangle index {t} out of range")
    p = mesh.vertices[mesh.triangles[t]]
    area = 0.5 * _cross2(p[1] - p[0], p[2] - p[0])
    lengths = np.empty(3)
    normals = np.empty((3, 2))
    for a in range(3):
        tangent = p[(a + 1) % 3] - p[a]
        lengths[a] = np.linalg.norm(tangent)
        # CCW orientation puts the outward normal to the right of the tangent
        normals[a] = np.array([tangent[1], -tangent[0]]) / lengths[a]
    return area, lengths, normals


def read_mesh(text: str) -> TriMesh:
    """Parse the ASCII mesh format: ``nv nt`` header, vertex lines, triangle lines.

    Boundary edges are reclassified geometrically (Dirichlet on x=0 or y=0).
    """
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("mesh file too short")
    nv, nt = int(tokens[0]), int(tokens[1])
    need = 2 + 2 * nv + 3 * nt
    if len(tokens) < need:
        raise ValueError(f"mesh file truncated: expected {need} tokens, got {len(tokens)}")
    vals = np.array(tokens[2 : 2 + 2 * nv], dtype=float)
    vertices = vals.reshape(nv, 2)
    tris = np.array(tokens[2 + 2 * nv : need], dtype=np.int64).reshape(nt, 3)
    if tris.min() < 0 or tris.max() >= nv:
        raise ValueError("triangle vertex index out of range")
    # enforce CCW orientation
    for i, tri in enumerate(tris):
        p = vertices[tri]
        if _cross2(p[1] - p[0], p[2] - p[0]) < 0:
            tris[i] = tri[[0, 2, 1]]
    edges = _build_edges(vertices, tris)
    return TriMesh(vertices, tris, edges, 0)
