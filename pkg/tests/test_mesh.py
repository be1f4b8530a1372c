import numpy as np
import pytest

from viscodg.mesh import EdgeTag, build_structured_mesh, element_geometry, read_mesh


def test_rejects_zero_subdivisions():
    with pytest.raises(ValueError):
        build_structured_mesh(0)


def test_unit_mesh_counts():
    m = build_structured_mesh(1)
    assert m.n_triangles == 2
    assert m.n_vertices == 4
    assert len(m.edges) == 5
    boundary = [e for e in m.edges if e.is_boundary]
    assert len(boundary) == 4


def test_n2_counts_and_area():
    m = build_structured_mesh(2)
    assert m.n_triangles == 8
    assert m.n_vertices == 9
    assert len(m.edges) == 16
    area = sum(m.triangle_area(t) for t in range(m.n_triangles))
    assert abs(area - 1.0) < 1e-13


def test_boundary_classification_n4():
    m = build_structured_mesh(4)
    dirichlet = [e for e in m.edges if e.tag == EdgeTag.DIRICHLET]
    neumann = [e for e in m.edges if e.tag == EdgeTag.NEUMANN]
    assert len(dirichlet) == 8
    assert len(neumann) == 8
    for e in dirichlet + neumann:
        assert abs(e.length - 0.25) < 1e-14


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 16])
def test_mesh_invariants(n):
    m = build_structured_mesh(n)
    # area sum
    area = sum(m.triangle_area(t) for t in range(m.n_triangles))
    assert abs(area - 1.0) < 1e-13
    # Euler-style edge count: #edges = (3 #tri + #boundary) / 2
    boundary = sum(1 for e in m.edges if e.is_boundary)
    assert len(m.edges) == (3 * m.n_triangles + boundary) / 2
    # h is the hypotenuse of one cell
    assert abs(m.h - np.sqrt(2.0) / n) < 1e-14
    for e in m.edges:
        assert abs(np.linalg.norm(e.normal) - 1.0) < 1e-14
        p0, p1 = m.vertices[e.endpoints[0]], m.vertices[e.endpoints[1]]
        assert abs(e.length - np.linalg.norm(p1 - p0)) < 1e-14
        if e.tag == EdgeTag.INTERIOR:
            assert len(e.incident) == 2
            i, j = e.incident
            assert i < j
            d = m.triangle_centroid(j) - m.triangle_centroid(i)
            assert np.dot(e.normal, d) > 0
        else:
            assert len(e.incident) == 1


def test_element_geometry_examples():
    m1 = build_structured_mesh(1)
    for t in range(2):
        area, lengths, normals = element_geometry(m1, t)
        assert abs(area - 0.5) < 1e-14
        for a in range(3):
            tangent = (
                m1.vertices[m1.triangles[t][(a + 1) % 3]] - m1.vertices[m1.triangles[t][a]]
            )
            assert abs(np.dot(normals[a], tangent)) < 1e-14

    m2 = build_structured_mesh(2)
    for t in range(m2.n_triangles):
        area, _, _ = element_geometry(m2, t)
        assert abs(area - 0.125) < 1e-14

    # hypotenuse normal of the lower-right triangle of the unit cell
    _, _, normals = element_geometry(m1, 0)
    hyp = normals[2]  # edge from vertex 2 back to vertex 0 is the diagonal
    assert np.allclose(np.abs(hyp), 1.0 / np.sqrt(2.0))


def test_element_geometry_range_check():
    m = build_structured_mesh(1)
    with pytest.raises(IndexError):
        element_geometry(m, 2)


def test_ascii_roundtrip():
    m = build_structured_mesh(2)
    lines = [f"{m.n_vertices} {m.n_triangles}"]
    lines += [f"{x} {y}" for x, y in m.vertices]
    lines += [f"{a} {b} {c}" for a, b, c in m.triangles]
    m2 = read_mesh("\n".join(lines))
    assert m2.n_triangles == m.n_triangles
    assert len(m2.edges) == len(m.edges)
    for e, e2 in zip(m.edges, m2.edges):
        assert e.tag == e2.tag
        assert np.allclose(e.normal, e2.normal)


def test_ascii_rejects_truncated():
    with pytest.raises(ValueError):
        read_mesh("4 2\n0 0\n1 0")
