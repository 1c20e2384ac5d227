"""Bundle meshes: construction, validation, holonomy, serialization."""

import math

import numpy as np
import pytest

from katoform.errors import MeshError
from katoform.mesh import (BundleMesh, cycle_mesh, gauge_transform,
                           grid_mesh_2d, haar_unitary, interval_mesh,
                           random_bundle_mesh)
from katoform.operators import quad_form


def two_vertex(w=1.0, mu=(1.0, 1.0), U=None):
    if U is None:
        U = np.eye(1, dtype=complex)
    return BundleMesh(fiber_dim=U.shape[0], mu=list(mu),
                      dirichlet=[False, False], edge_u=[0], edge_v=[1],
                      edge_w=[w], transports=np.array([U]))


# ---------------------------------------------------------------------------
# constructors

def test_interval_mesh_shape():
    mesh = interval_mesh(0.0, 1.0, 0.25)
    assert mesh.n_vertices == 5
    assert np.allclose(mesh.mu, 0.25)
    assert np.allclose(mesh.edge_w, 4.0)
    assert mesh.dirichlet[0] and mesh.dirichlet[-1]
    assert not mesh.dirichlet[2]
    assert np.allclose(mesh.positions[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])


def test_interval_mesh_custom_dirichlet():
    mesh = interval_mesh(-1.0, 1.0, 0.5, dirichlet_at=(-1.0, 0.0, 1.0))
    killed = np.flatnonzero(mesh.dirichlet)
    assert list(killed) == [0, 2, 4]
    with pytest.raises(MeshError):
        interval_mesh(-1.0, 1.0, 0.5, dirichlet_at=(0.3,))


def test_cycle_mesh_holonomy():
    theta = 1.1
    mesh = cycle_mesh(5, theta=theta)
    hol = mesh.holonomy([0, 1, 2, 3, 4])
    assert complex(hol[0, 0]) == pytest.approx(np.exp(-1j * theta), abs=1e-12)


def test_grid_mesh_plaquette_holonomy():
    a, b_field = 0.5, 1.3
    mesh = grid_mesh_2d(1.0, a, b_field=b_field)
    side = mesh.metadata["side"]

    def vid(i, j):
        return j * side + i

    cycle = [vid(1, 1), vid(2, 1), vid(2, 2), vid(1, 2)]
    hol = mesh.holonomy(cycle)
    assert complex(hol[0, 0]) == pytest.approx(
        np.exp(-1j * b_field * a * a), abs=1e-12)


def test_grid_zero_field_trivial_transport():
    mesh = grid_mesh_2d(1.0, 0.5, b_field=0.0)
    assert np.allclose(mesh.transports, np.eye(1), atol=1e-15)


def test_random_bundle_mesh_properties():
    mesh = random_bundle_mesh(15, fiber_dim=2, seed=3, dirichlet_count=2)
    assert mesh.n_vertices == 15
    assert int(np.sum(mesh.dirichlet)) == 2
    # unitary transports
    for U in mesh.transports:
        assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    # deterministic in the seed
    again = random_bundle_mesh(15, fiber_dim=2, seed=3, dirichlet_count=2)
    assert np.allclose(mesh.transports, again.transports)
    assert np.allclose(mesh.mu, again.mu)
    other = random_bundle_mesh(15, fiber_dim=2, seed=4, dirichlet_count=2)
    assert not np.allclose(mesh.mu, other.mu)


def test_haar_unitary():
    rng = np.random.default_rng(0)
    U = haar_unitary(3, rng)
    assert np.allclose(U.conj().T @ U, np.eye(3), atol=1e-12)


# ---------------------------------------------------------------------------
# validation

def test_rejects_nonpositive_weights():
    with pytest.raises(MeshError):
        two_vertex(w=0.0)
    with pytest.raises(MeshError):
        two_vertex(mu=(1.0, -1.0))


def test_rejects_non_unitary_transport():
    with pytest.raises(MeshError):
        two_vertex(U=np.array([[2.0 + 0j]]))


def test_rejects_self_loop_and_duplicates():
    with pytest.raises(MeshError):
        BundleMesh(fiber_dim=1, mu=[1.0, 1.0], dirichlet=[False, False],
                   edge_u=[0], edge_v=[0], edge_w=[1.0],
                   transports=np.eye(1, dtype=complex)[None])
    with pytest.raises(MeshError):
        BundleMesh(fiber_dim=1, mu=[1.0, 1.0], dirichlet=[False, False],
                   edge_u=[0, 1], edge_v=[1, 0], edge_w=[1.0, 1.0],
                   transports=np.repeat(np.eye(1, dtype=complex)[None], 2, 0))


def test_rejects_disconnected():
    with pytest.raises(MeshError):
        BundleMesh(fiber_dim=1, mu=[1.0] * 4, dirichlet=[False] * 4,
                   edge_u=[0, 2], edge_v=[1, 3], edge_w=[1.0, 1.0],
                   transports=np.repeat(np.eye(1, dtype=complex)[None], 2, 0))


def test_rejects_all_dirichlet():
    with pytest.raises(MeshError):
        BundleMesh(fiber_dim=1, mu=[1.0, 1.0], dirichlet=[True, True],
                   edge_u=[0], edge_v=[1], edge_w=[1.0],
                   transports=np.eye(1, dtype=complex)[None])


# ---------------------------------------------------------------------------
# transport bookkeeping

def test_transport_into_directions():
    U = haar_unitary(2, np.random.default_rng(5))
    mesh = BundleMesh(fiber_dim=2, mu=[1.0, 1.0], dirichlet=[False, False],
                      edge_u=[0], edge_v=[1], edge_w=[1.0],
                      transports=np.array([U]))
    into_u = mesh.transport_into(0, target=0)
    into_v = mesh.transport_into(0, target=1)
    assert np.allclose(into_u, U)
    assert np.allclose(into_v, U.conj().T)


def test_holonomy_requires_existing_edges():
    mesh = interval_mesh(0.0, 1.0, 0.25)
    with pytest.raises(MeshError):
        mesh.holonomy([0, 2])


# ---------------------------------------------------------------------------
# serialization and gauge moves

def test_json_round_trip_preserves_forms():
    mesh = random_bundle_mesh(8, fiber_dim=2, seed=9, dirichlet_count=1)
    clone = BundleMesh.from_json_dict(mesh.to_json_dict())
    rng = np.random.default_rng(1)
    f = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
    a = quad_form(mesh, f)
    b = quad_form(clone, f)
    assert a.kinetic == pytest.approx(b.kinetic, rel=1e-13)


def test_json_rejects_malformed():
    with pytest.raises(MeshError):
        BundleMesh.from_json_dict({"fiber_dim": 1, "vertices": []})


def test_gauge_transform_preserves_kinetic_form():
    mesh = random_bundle_mesh(8, fiber_dim=2, seed=11)
    rng = np.random.default_rng(2)
    gauges = np.array([haar_unitary(2, rng) for _ in range(8)])
    gauged = gauge_transform(mesh, gauges)
    f = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
    gf = np.einsum("vij,vj->vi", gauges, f)
    a = quad_form(mesh, f)
    b = quad_form(gauged, gf)
    assert a.kinetic == pytest.approx(b.kinetic, rel=1e-12)


def test_gauge_transform_changes_nothing_observable():
    theta = 0.9
    mesh = cycle_mesh(4, theta=theta)
    rng = np.random.default_rng(3)
    gauges = np.exp(1j * rng.uniform(0, 2 * math.pi, size=4))[:, None, None]
    gauged = gauge_transform(mesh, gauges)
    hol_a = mesh.holonomy([0, 1, 2, 3])[0, 0]
    hol_b = gauged.holonomy([0, 1, 2, 3])[0, 0]
    # holonomy conjugates by the base-point gauge; for U(1) it is invariant
    assert complex(hol_b) == pytest.approx(complex(hol_a), abs=1e-12)
