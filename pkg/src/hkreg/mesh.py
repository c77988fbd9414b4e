"""
Triangular meshes of the unit square.

Structured meshes with selectable diagonal patterns, boundary tagging for the
model problems, uniform red (1 -> 4) refinement with parent/vertex maps, and a
small ASCII import format.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    pass


class BoundaryTag(enum.IntEnum):
    UNTAGGED = -1
    DIRICHLET = 0
    NEUMANN = 1


PATTERNS = ("right", "left", "alternating")


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation with tagged boundary edges.

    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counterclockwise
    boundary_edges : (ne, 2) int array of vertex pairs
    boundary_tags : (ne,) int array of :class:`BoundaryTag` values
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray

    def __post_init__(self):
        for name in ("vertices", "triangles", "boundary_edges", "boundary_tags"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be an (nt, 3) array")
        if np.any(self.elem_area <= 0.0):
            bad = int(np.argmin(self.elem_area))
            raise MeshError(f"triangle {bad} is degenerate or clockwise")

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_elements(self) -> int:
        return self.triangles.shape[0]

    @cached_property
    def elem_area(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        area = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        area.setflags(write=False)
        return area

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """(nt, 3, 2) gradients of the three P1 hat functions on each triangle."""
        p = self.vertices[self.triangles]
        x, y = p[..., 0], p[..., 1]
        two_a = 2.0 * self.elem_area
        g = np.empty((self.n_elements, 3, 2))
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            g[:, a, 0] = (y[:, b] - y[:, c]) / two_a
            g[:, a, 1] = (x[:, c] - x[:, b]) / two_a
        g.setflags(write=False)
        return g

    @cached_property
    def barycenters(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @property
    def is_tagged(self) -> bool:
        return bool(np.all(self.boundary_tags != BoundaryTag.UNTAGGED))

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        """Boolean vertex mask of Dirichlet-constrained vertices."""
        if not self.is_tagged:
            raise MeshError("mesh has untagged boundary edges")
        mask = np.zeros(self.n_vertices, dtype=bool)
        d = self.boundary_edges[self.boundary_tags == BoundaryTag.DIRICHLET]
        mask[d.ravel()] = True
        mask.setflags(write=False)
        return mask

    def with_tags(self, tags) -> "Mesh":
        tags = np.asarray(tags, dtype=np.int64)
        if tags.shape != (self.boundary_edges.shape[0],):
            raise MeshError("one tag per boundary edge required")
        return Mesh(self.vertices, self.triangles, self.boundary_edges, tags.copy())


def _edges(triangles: np.ndarray):
    """Unique undirected edges and the per-triangle edge ids.

    Local edge k of a triangle joins local vertices k and (k + 1) % 3.
    """
    nt = triangles.shape[0]
    local = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=-1)
    sorted_pairs = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse, counts = np.unique(
        sorted_pairs, axis=0, return_inverse=True, return_counts=True
    )
    return edges, inverse.reshape(nt, 3), counts


def _find_boundary_edges(triangles: np.ndarray) -> np.ndarray:
    edges, elem_edges, counts = _edges(triangles)
    if np.any(counts > 2):
        raise MeshError("non-manifold edge shared by more than two triangles")
    # keep the orientation the owning triangle gives the edge
    local = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=-1).reshape(-1, 2)
    flat = elem_edges.ravel()
    on_boundary = counts[flat] == 1
    order = np.argsort(flat[on_boundary], kind="stable")
    return local[on_boundary][order]


def from_arrays(vertices, triangles, boundary_edges=None, boundary_tags=None) -> Mesh:
    vertices = np.array(vertices, dtype=float)
    triangles = np.array(triangles, dtype=np.int64)
    if boundary_edges is None:
        boundary_edges = _find_boundary_edges(triangles)
    boundary_edges = np.array(boundary_edges, dtype=np.int64).reshape(-1, 2)
    if boundary_tags is None:
        boundary_tags = np.full(boundary_edges.shape[0], BoundaryTag.UNTAGGED, dtype=np.int64)
    return Mesh(vertices, triangles, boundary_edges, np.array(boundary_tags, dtype=np.int64))


def build_structured_mesh(nx: int, ny: int, pattern: str = "alternating") -> Mesh:
    """Split an nx-by-ny grid of the unit square into 2*nx*ny triangles.

    ``pattern`` picks the cell diagonal: ``"right"`` joins (0,0)-(1,1),
    ``"left"`` joins (1,0)-(0,1), ``"alternating"`` flips it in a
    checkerboard fashion (union-jack-like when viewed over 2x2 cells).
    """
    if int(nx) < 1 or int(ny) < 1:
        raise MeshError(f"cell counts must be positive, got ({nx}, {ny})")
    if pattern not in PATTERNS:
        raise MeshError(f"unknown diagonal pattern {pattern!r}")
    nx, ny = int(nx), int(ny)

    xs = np.arange(nx + 1) / nx
    ys = np.arange(ny + 1) / ny
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    j, i = np.divmod(np.arange(nx * ny), nx)
    v00 = j * (nx + 1) + i
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1

    if pattern == "right":
        flip = np.zeros(nx * ny, dtype=bool)
    elif pattern == "left":
        flip = np.ones(nx * ny, dtype=bool)
    else:
        flip = (i + j) % 2 == 1

    right = np.stack([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])], axis=1)
    left = np.stack([np.column_stack([v00, v10, v01]), np.column_stack([v10, v11, v01])], axis=1)
    tris = np.where(flip[:, None, None], left, right).reshape(-1, 3)
    return from_arrays(vertices, tris)


def tag_boundary(mesh: Mesh, problem) -> Mesh:
    """Tag every boundary edge from ``problem.is_dirichlet(x, y)``.

    The predicate is evaluated at edge midpoints; anything not Dirichlet is
    Neumann.
    """
    e = mesh.boundary_edges
    mid = 0.5 * (mesh.vertices[e[:, 0]] + mesh.vertices[e[:, 1]])
    dirichlet = np.array([bool(problem.is_dirichlet(x, y)) for x, y in mid], dtype=bool)
    tags = np.where(dirichlet, BoundaryTag.DIRICHLET, BoundaryTag.NEUMANN)
    tagged = mesh.with_tags(tags)
    if not tagged.is_tagged:
        raise MeshError("boundary edge left untagged")
    return tagged


@dataclass(frozen=True, eq=False)
class RefinedMesh:
    """A mesh refined once by edge-midpoint subdivision.

    Fine vertex ``a < coarse.n_vertices`` is coarse vertex ``a``; the rest are
    edge midpoints with endpoints ``midpoint_parents[a]``. Fine triangles
    ``4k .. 4k+3`` are the children of coarse triangle ``k``.
    """

    coarse: Mesh
    fine: Mesh
    parent_of: np.ndarray
    coarse_vertex_in_fine: np.ndarray
    midpoint_parents: np.ndarray

    @cached_property
    def midpoints(self) -> np.ndarray:
        return np.flatnonzero(self.midpoint_parents[:, 0] >= 0)

    def prolongate(self, u: np.ndarray) -> np.ndarray:
        """Embed a coarse P1 field into the fine P1 space (exact inclusion)."""
        u = np.asarray(u, dtype=float)
        out = np.empty(self.fine.n_vertices)
        out[self.coarse_vertex_in_fine] = u
        m = self.midpoints
        ab = self.midpoint_parents[m]
        out[m] = 0.5 * (u[ab[:, 0]] + u[ab[:, 1]])
        return out

    def prolongate_transpose(self, v: np.ndarray) -> np.ndarray:
        """Apply the transpose of :meth:`prolongate` to a fine nodal vector."""
        v = np.asarray(v, dtype=float)
        n = self.coarse.n_vertices
        out = v[self.coarse_vertex_in_fine].copy()
        m = self.midpoints
        ab = self.midpoint_parents[m]
        half = 0.5 * v[m]
        out += np.bincount(ab[:, 0], weights=half, minlength=n)
        out += np.bincount(ab[:, 1], weights=half, minlength=n)
        return out

    def restrict(self, v: np.ndarray) -> np.ndarray:
        """Nodal restriction: read a fine field at the coarse vertices."""
        return np.asarray(v, dtype=float)[self.coarse_vertex_in_fine].copy()

    def restrict_transpose(self, u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.fine.n_vertices)
        out[self.coarse_vertex_in_fine] = u
        return out

    def children_sum(self, fine_values: np.ndarray) -> np.ndarray:
        """Sum a per-fine-element quantity over the children of each coarse element."""
        return np.asarray(fine_values).reshape(-1, 4).sum(axis=1)


def refine_uniform(mesh: Mesh) -> RefinedMesh:
    nv, nt = mesh.n_vertices, mesh.n_elements
    edges, elem_edges, _ = _edges(mesh.triangles)
    mid_ids = nv + np.arange(edges.shape[0])

    vertices = np.vstack([mesh.vertices, 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])])

    v0, v1, v2 = mesh.triangles.T
    m01 = mid_ids[elem_edges[:, 0]]
    m12 = mid_ids[elem_edges[:, 1]]
    m20 = mid_ids[elem_edges[:, 2]]
    children = np.stack(
        [
            np.column_stack([v0, m01, m20]),
            np.column_stack([m01, v1, m12]),
            np.column_stack([m20, m12, v2]),
            np.column_stack([m01, m12, m20]),
        ],
        axis=1,
    ).reshape(-1, 3)
    parent_of = np.repeat(np.arange(nt), 4)

    # split boundary edges, inheriting tags
    lookup = {(int(a), int(b)): int(k) for k, (a, b) in enumerate(edges)}
    be = mesh.boundary_edges
    bmid = np.array(
        [mid_ids[lookup[(min(a, b), max(a, b))]] for a, b in be.tolist()], dtype=np.int64
    ).reshape(-1)
    fine_be = np.stack([np.column_stack([be[:, 0], bmid]), np.column_stack([bmid, be[:, 1]])], axis=1).reshape(-1, 2)
    fine_tags = np.repeat(mesh.boundary_tags, 2)

    fine = Mesh(vertices, children, fine_be, fine_tags)
    midpoint_parents = np.vstack([np.full((nv, 2), -1, dtype=np.int64), edges.astype(np.int64)])
    return RefinedMesh(
        coarse=mesh,
        fine=fine,
        parent_of=parent_of,
        coarse_vertex_in_fine=np.arange(nv),
        midpoint_parents=midpoint_parents,
    )


def refine_times(mesh: Mesh, levels: int) -> list[RefinedMesh]:
    out = []
    for _ in range(levels):
        rm = refine_uniform(mesh)
        out.append(rm)
        mesh = rm.fine
    return out


_TAG_CODES = {"D": BoundaryTag.DIRICHLET, "N": BoundaryTag.NEUMANN}


def read_mesh(path) -> Mesh:
    """Read the ASCII mesh format.

    Line 1 holds ``nv nt ne``, followed by ``nv`` lines ``x y``, ``nt`` lines
    ``v0 v1 v2`` and ``ne`` lines ``v0 v1 tag`` with ``tag`` one of D, N.
    """
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        nv, nt, ne = (int(t) for t in lines[0])
        vs = np.array([[float(t) for t in ln] for ln in lines[1 : 1 + nv]])
        ts = np.array([[int(t) for t in ln] for ln in lines[1 + nv : 1 + nv + nt]], dtype=np.int64)
        rows = lines[1 + nv + nt : 1 + nv + nt + ne]
        es = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64).reshape(-1, 2)
        tags = np.array([_TAG_CODES[r[2]] for r in rows], dtype=np.int64)
    except (ValueError, IndexError, KeyError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc
    if vs.shape != (nv, 2) or ts.shape != (nt, 3) or len(rows) != ne:
        raise MeshError(f"mesh file {path} does not match its header counts")
    # orient counterclockwise
    p = vs[ts]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    ts[cross < 0] = ts[cross < 0][:, [0, 2, 1]]
    mesh = from_arrays(vs, ts)
    found = {tuple(sorted(e)) for e in mesh.boundary_edges.tolist()}
    given = {tuple(sorted(e)): t for e, t in zip(es.tolist(), tags.tolist())}
    if found != set(given):
        raise MeshError(f"mesh file {path}: tagged edges do not match the mesh boundary")
    order = [given[tuple(sorted(e))] for e in mesh.boundary_edges.tolist()]
    return mesh.with_tags(order)


def write_mesh(mesh: Mesh, path) -> None:
    codes = {int(v): k for k, v in _TAG_CODES.items()}
    out = [f"{mesh.n_vertices} {mesh.n_elements} {mesh.boundary_edges.shape[0]}"]
    out += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    out += [" ".join(str(v) for v in t) for t in mesh.triangles]
    out += [f"{a} {b} {codes[int(t)]}" for (a, b), t in zip(mesh.boundary_edges, mesh.boundary_tags)]
    Path(path).write_text("\n".join(out) + "\n")
