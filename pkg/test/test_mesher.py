from math import sqrt

import numpy as np
import pytest

from fundamental_ratio.exc import DegenerateGeometryError
from fundamental_ratio.mesher import dump_mesh
from fundamental_ratio.mesher import mesh_size
from fundamental_ratio.mesher import refine_polygon
from fundamental_ratio.mesher import refine_triangle


def sorted_angles(triangles):
    """Interior angles of each ``(m, 3, 2)`` triangle, ascending."""
    angles = []
    for k in range(3):
        u = triangles[:, (k + 1) % 3] - triangles[:, k]
        v = triangles[:, (k + 2) % 3] - triangles[:, k]
        cos = np.einsum("ij,ij->i", u, v) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1)
        )
        angles.append(np.arccos(np.clip(cos, -1.0, 1.0)))
    return np.sort(np.column_stack(angles), axis=1)


class RefineTriangleTest:
    @pytest.mark.parametrize("levels", [0, 1, 2, 4])
    def test_counts(self, equilateral, levels):
        mesh = refine_triangle(equilateral, levels)
        n = 2**levels
        assert len(mesh.elements) == 4**levels
        assert len(mesh.vertices) == (n + 1) * (n + 2) // 2
        assert int(mesh.boundary.sum()) == 3 * n
        assert mesh.euler_characteristic() == 1

    @pytest.mark.parametrize("levels", [0, 3, 5])
    def test_mesh_size(self, equilateral, levels):
        mesh = refine_triangle(equilateral, levels)
        assert mesh.h >= 2.0**-levels
        assert mesh.h == pytest.approx(2.0**-levels, rel=1e-14)
        assert mesh_size(mesh) == mesh.h

    def test_areas(self, equilateral):
        mesh = refine_triangle(equilateral, 3)
        assert np.all(mesh.signed_areas() > 0)
        assert mesh.areas().sum() == pytest.approx(sqrt(3.0) / 4.0)
        assert np.allclose(mesh.areas(), sqrt(3.0) / 4.0 / 64)

    def test_children_keep_parent_angles(self):
        parent = ((0.0, 0.0), (1.0, 0.0), (0.6, 0.5))
        mesh = refine_triangle(parent, 3)
        expected = sorted_angles(np.array([parent]))[0]
        assert np.allclose(
            sorted_angles(mesh.vertices[mesh.elements]), expected, atol=1e-10
        )

    def test_clockwise_input_is_reoriented(self):
        mesh = refine_triangle(((0.0, 0.0), (0.6, 0.5), (1.0, 0.0)), 2)
        assert np.all(mesh.signed_areas() > 0)
        assert mesh.areas().sum() == pytest.approx(0.25)

    def test_element_edges_are_opposite(self, equilateral):
        mesh = refine_triangle(equilateral, 2)
        for element, edges in zip(mesh.elements, mesh.element_edges):
            for k in range(3):
                edge = set(mesh.edges[edges[k]])
                assert element[k] not in edge
                assert edge <= set(element)

    def test_boundary_vertices_on_sides(self):
        mesh = refine_triangle(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)), 3)
        x, y = mesh.vertices[mesh.boundary_vertices()].T
        on_side = np.isclose(x, 0) | np.isclose(y, 0) | np.isclose(x + y, 1)
        assert np.all(on_side)
        assert int(mesh.boundary_vertices().sum()) == 3 * 8

    def test_read_only(self, equilateral):
        mesh = refine_triangle(equilateral, 1)
        with pytest.raises(ValueError):
            mesh.vertices[0, 0] = 1.0

    def test_input_not_frozen(self):
        vertices = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5]])
        refine_triangle(vertices, 1)
        vertices[0, 0] = 0.1

    @pytest.mark.parametrize(
        "vertices",
        [
            ((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)),
            ((0.0, 0.0), (1.0, 0.0), (1.0, 0.0)),
            ((0.0, 0.0), (1.0, 0.0), (0.5, float("nan"))),
            ((0.0, 0.0), (1.0, 0.0)),
        ],
    )
    def test_degenerate(self, vertices):
        with pytest.raises(DegenerateGeometryError):
            refine_triangle(vertices, 1)

    def test_quadrilateral_rejected(self, unit_square):
        with pytest.raises(DegenerateGeometryError):
            refine_triangle(unit_square, 1)

    def test_negative_levels(self, equilateral):
        with pytest.raises(DegenerateGeometryError):
            refine_triangle(equilateral, -1)


class RefinePolygonTest:
    @pytest.mark.parametrize("levels", [0, 2, 4])
    def test_square(self, unit_square, levels):
        mesh = refine_polygon(unit_square, levels)
        n = 2**levels
        assert len(mesh.elements) == 2 * 4**levels
        assert len(mesh.vertices) == (n + 1) ** 2
        assert mesh.areas().sum() == pytest.approx(1.0)
        assert mesh.h == pytest.approx(sqrt(2.0) / n, rel=1e-14)
        assert mesh.euler_characteristic() == 1

    def test_shared_diagonal_is_interior(self, unit_square):
        mesh = refine_polygon(unit_square, 0)
        assert int(mesh.boundary.sum()) == 4
        assert len(mesh.edges) == 5


class DumpMeshTest:
    def test_listing(self, equilateral, tmp_path):
        mesh = refine_triangle(equilateral, 1)
        path = tmp_path / "mesh.txt"
        dump_mesh(mesh, path)
        lines = path.read_text().splitlines()
        assert lines[0] == f"# h {mesh.h!r}"
        assert sum(line.startswith("v ") for line in lines) == 6
        assert sum(line.startswith("t ") for line in lines) == 4
        x, y = map(float, lines[1].split()[1:])
        assert (x, y) == tuple(mesh.vertices[0])
