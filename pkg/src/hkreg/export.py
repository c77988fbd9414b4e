"""
Output formats: history CSV, legacy VTK, PGM raster and the design (eta) file.

Floats are written with 17 significant digits and LF line endings so files
are byte-reproducible and round-trip exactly.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .fem import coefficients
from .mesh import Mesh

HISTORY_HEADER = "step,volume_fraction,F_h,Theta_h,F_hat"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path, lines) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def history_lines(history) -> list:
    if len(history) == 0:
        raise ValueError("history is empty")
    rows = [HISTORY_HEADER]
    for r in history:
        rows.append(",".join([str(r.step), fmt(r.volume_fraction), fmt(r.F_h), fmt(r.Theta_h), fmt(r.F_hat)]))
    return rows


def export_history(history, path) -> Path:
    return _write(path, history_lines(history))


def read_history(path) -> np.ndarray:
    """Structured array with the history columns."""
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


def vtk_lines(mesh: Mesh, eta, u=None, title: str = "hkreg design") -> list:
    eta = coefficients(eta)
    if eta.shape != (mesh.n_elements,):
        raise ValueError("one eta value per triangle required")
    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    out.append(f"POINTS {mesh.n_vertices} double")
    out += [f"{fmt(x)} {fmt(y)} 0" for x, y in mesh.vertices]
    nt = mesh.n_elements
    out.append(f"CELLS {nt} {4 * nt}")
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    out.append(f"CELL_TYPES {nt}")
    out += ["5"] * nt
    out += [f"CELL_DATA {nt}", "SCALARS eta double 1", "LOOKUP_TABLE default"]
    out += [fmt(v) for v in eta]
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != (mesh.n_vertices,):
            raise ValueError("one u value per vertex required")
        out += [f"POINT_DATA {mesh.n_vertices}", "SCALARS u double 1", "LOOKUP_TABLE default"]
        out += [fmt(v) for v in u]
    return out


def export_field(mesh: Mesh, eta, u=None, path="design.vtk") -> Path:
    """Legacy ASCII VTK with triangle cells, cell scalar ``eta`` and point scalar ``u``."""
    return _write(path, vtk_lines(mesh, eta, u))


def read_vtk_points(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    k = next(i for i, ln in enumerate(lines) if ln.startswith("POINTS"))
    n = int(lines[k].split()[1])
    return np.array([[float(t) for t in ln.split()[:2]] for ln in lines[k + 1 : k + 1 + n]])


def rasterize(mesh: Mesh, values, resolution: int = 256) -> np.ndarray:
    """Sample a per-triangle field at pixel centers of the unit square.

    Row 0 is the top of the image (y = 1). Pixels not covered by any triangle
    stay NaN.
    """
    values = np.asarray(values, dtype=float)
    img = np.full((resolution, resolution), np.nan)
    centers = (np.arange(resolution) + 0.5) / resolution
    p = mesh.vertices[mesh.triangles]
    lo = np.floor(p.min(axis=1) * resolution - 0.5).astype(int)
    hi = np.ceil(p.max(axis=1) * resolution - 0.5).astype(int)
    for t in range(mesh.n_elements):
        i0, j0 = max(lo[t, 0], 0), max(lo[t, 1], 0)
        i1, j1 = min(hi[t, 0], resolution - 1), min(hi[t, 1], resolution - 1)
        if i1 < i0 or j1 < j0:
            continue
        X, Y = np.meshgrid(centers[i0 : i1 + 1], centers[j0 : j1 + 1])
        (x0, y0), (x1, y1), (x2, y2) = p[t]
        det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        l1 = ((X - x0) * (y2 - y0) - (x2 - x0) * (Y - y0)) / det
        l2 = ((x1 - x0) * (Y - y0) - (X - x0) * (y1 - y0)) / det
        inside = (l1 >= -1e-12) & (l2 >= -1e-12) & (l1 + l2 <= 1 + 1e-12)
        jj, ii = np.nonzero(inside)
        img[resolution - 1 - (j0 + jj), i0 + ii] = values[t]
    return img


def export_pgm(mesh: Mesh, eta, path, resolution: int = 256) -> Path:
    """Plain (P2) grayscale image of the design: solid black, filler white."""
    eta = coefficients(eta)
    img = rasterize(mesh, (eta == 1.0).astype(float), resolution)
    gray = np.where(np.isnan(img), 255, np.where(img > 0.5, 0, 255)).astype(int)
    lines = ["P2", f"{resolution} {resolution}", "255"]
    lines += [" ".join(str(v) for v in row) for row in gray]
    return _write(path, lines)


def export_eta(eta, path, epsilon: float) -> Path:
    eta = coefficients(eta)
    return _write(path, [f"# eta n={eta.size} epsilon={fmt(epsilon)}"] + [fmt(v) for v in eta])


def read_eta(path) -> np.ndarray:
    rows = [ln.strip() for ln in Path(path).read_text().splitlines()]
    return np.array([float(r) for r in rows if r and not r.startswith("#")])
