"""Uniformly red-refined triangulations of triangles and convex polygons."""

from dataclasses import dataclass

import logging

import numpy as np

from .exc import DegenerateGeometryError


log = logging.getLogger(__name__)

# Local edge k of an element joins the two vertices other than vertex k
LOCAL_EDGES = ((1, 2), (2, 0), (0, 1))

# Twice the signed area below this fraction of the squared diameter
# is treated as collinear
COLLINEAR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TriMesh:
    """A conforming triangulation.

    Attributes
    ----------
    vertices : ndarray of shape (n, 2)
    elements : ndarray of shape (m, 3)
        Positively oriented vertex triples.
    edges : ndarray of shape (e, 2)
        Unique edges, lower vertex index first.
    boundary : ndarray of shape (e,)
        True for edges owned by a single element.
    element_edges : ndarray of shape (m, 3)
        Edge index of the local edge opposite each local vertex.
    h : float
        Longest edge, rounded up by one ulp.
    """

    vertices: np.ndarray
    elements: np.ndarray
    edges: np.ndarray
    boundary: np.ndarray
    element_edges: np.ndarray
    h: float

    def __str__(self):
        return (
            f"TriMesh with {len(self.vertices)} vertices, "
            f"{len(self.elements)} elements, h = {self.h!r}"
        )

    def signed_areas(self):
        return _signed_areas(self.vertices, self.elements)

    def areas(self):
        return np.abs(self.signed_areas())

    def boundary_vertices(self):
        flags = np.zeros(len(self.vertices), dtype=bool)
        flags[self.edges[self.boundary].ravel()] = True
        return flags

    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges) + len(self.elements)


def _signed_areas(vertices, elements):
    a = vertices[elements[:, 0]]
    b = vertices[elements[:, 1]]
    c = vertices[elements[:, 2]]
    ab = b - a
    ac = c - a
    return 0.5 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])


def _edge_table(elements):
    local = np.stack(
        [elements[:, list(pair)] for pair in LOCAL_EDGES], axis=1
    )
    flat = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse, counts = np.unique(
        flat, axis=0, return_inverse=True, return_counts=True
    )
    element_edges = inverse.reshape(-1, 3)
    return edges, element_edges, counts == 1


def _check_vertices(vertices):
    vertices = np.array(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
        raise DegenerateGeometryError(
            f"Expected at least 3 planar vertices, got shape {vertices.shape}"
        )
    if not np.all(np.isfinite(vertices)):
        raise DegenerateGeometryError("Vertices must be finite")
    return vertices


def _orient(vertices, elements):
    areas = _signed_areas(vertices, elements)
    spans = vertices[elements].max(axis=1) - vertices[elements].min(axis=1)
    scale = np.einsum("ij,ij->i", spans, spans)
    if np.any(np.abs(2.0 * areas) <= COLLINEAR_TOL * scale):
        raise DegenerateGeometryError(
            "Collinear or repeated vertices in triangle(s) "
            f"{np.flatnonzero(np.abs(2.0 * areas) <= COLLINEAR_TOL * scale)}"
        )
    flipped = areas < 0
    elements = elements.copy()
    elements[flipped] = elements[flipped][:, [0, 2, 1]]
    return elements


def _red_refine(vertices, elements):
    edges, element_edges, _ = _edge_table(elements)
    midpoints = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
    mid = element_edges + len(vertices)

    a, b, c = elements[:, 0], elements[:, 1], elements[:, 2]
    # ab is opposite c, bc opposite a, ca opposite b
    m_bc, m_ca, m_ab = mid[:, 0], mid[:, 1], mid[:, 2]
    children = np.stack(
        [
            np.column_stack((a, m_ab, m_ca)),
            np.column_stack((m_ab, b, m_bc)),
            np.column_stack((m_ca, m_bc, c)),
            np.column_stack((m_ab, m_bc, m_ca)),
        ],
        axis=1,
    ).reshape(-1, 3)
    return np.vstack((vertices, midpoints)), children


def _longest_edge(vertices, edges):
    d = vertices[edges[:, 1]] - vertices[edges[:, 0]]
    longest = float(np.max(np.hypot(d[:, 0], d[:, 1])))
    return float(np.nextafter(longest, np.inf))


def mesh_size(mesh):
    """Longest edge of ``mesh``, rounded up so it is a true upper bound."""
    return _longest_edge(mesh.vertices, mesh.edges)


def _build(vertices, elements):
    edges, element_edges, boundary = _edge_table(elements)
    mesh = TriMesh(
        vertices=vertices,
        elements=elements,
        edges=edges,
        boundary=boundary,
        element_edges=element_edges,
        h=_longest_edge(vertices, edges),
    )
    for array in (vertices, elements, edges, boundary, element_edges):
        array.setflags(write=False)
    return mesh


def refine_polygon(vertices, levels):
    """Fan-split a convex polygon from its first vertex and red-refine.

    Parameters
    ----------
    vertices : sequence of (x, y)
        Polygon corners in either orientation.
    levels : int
        Number of uniform red refinements; element count is
        ``(len(vertices) - 2) * 4**levels``.
    """
    if levels < 0:
        raise DegenerateGeometryError(f"levels must be >= 0, got {levels}")
    vertices = _check_vertices(vertices)
    n = len(vertices)
    elements = np.array(
        [(0, k, k + 1) for k in range(1, n - 1)], dtype=np.int64
    )
    elements = _orient(vertices, elements)

    for _ in range(levels):
        vertices, elements = _red_refine(vertices, elements)

    mesh = _build(vertices, elements)
    log.debug("Built %s", mesh)
    return mesh


def refine_triangle(vertices, levels):
    """Red-refine a single triangle ``levels`` times."""
    vertices = _check_vertices(vertices)
    if len(vertices) != 3:
        raise DegenerateGeometryError(
            f"A triangle needs 3 vertices, got {len(vertices)}"
        )
    return refine_polygon(vertices, levels)


def dump_mesh(mesh, path):
    """Write a plain-text listing: ``v x y`` then ``t a b c`` records."""
    with open(path, "w") as f:
        f.write(f"# h {mesh.h!r}\n")
        for x, y in mesh.vertices:
            f.write(f"v {float(x)!r} {float(y)!r}\n")
        for a, b, c in mesh.elements:
            f.write(f"t {a} {b} {c}\n")
