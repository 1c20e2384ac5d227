"""Catalog of bundled spaces, potentials, meshes, and run configurations.

Everything here is constructed deterministically from fixed parameters, so
two processes asking for the same id get identical objects.  The ids are
stable strings; list_bundled() is the discovery surface used by the command
line tool.
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .errors import ConfigError
from .geometry import EUCLIDEAN, HYPERBOLIC, ModelSpace
from .mesh import (BundleMesh, cycle_mesh, grid_mesh_2d, interval_mesh,
                   random_bundle_mesh)
from .potentials import Potential, bump, constant, coulomb, inverse_square

_SPACES = {
    "euclidean_m1": lambda: ModelSpace(EUCLIDEAN, 1),
    "euclidean_m2": lambda: ModelSpace(EUCLIDEAN, 2),
    "euclidean_m3": lambda: ModelSpace(EUCLIDEAN, 3),
    "hyperbolic_m2": lambda: ModelSpace(HYPERBOLIC, 2),
    "hyperbolic_m3": lambda: ModelSpace(HYPERBOLIC, 3),
}

_POTENTIALS = {
    "coulomb_r3": lambda: coulomb(ModelSpace(EUCLIDEAN, 3), strength=1.0),
    "inverse_square_r3": lambda: inverse_square(ModelSpace(EUCLIDEAN, 3),
                                                strength=1.0),
    "constant_1_r3": lambda: constant(ModelSpace(EUCLIDEAN, 3), value=1.0),
    "bump_r3": lambda: bump(ModelSpace(EUCLIDEAN, 3), amplitude=1.0, radius=1.0),
}


def _named(mesh: BundleMesh, name: str) -> BundleMesh:
    mesh.name = name
    return mesh


def _coulomb_interval() -> BundleMesh:
    return _named(interval_mesh(-8.0, 8.0, 1.0 / 64.0,
                                dirichlet_at=(-8.0, 0.0, 8.0)),
                  "coulomb_interval_1d")


def _flux_cycle() -> BundleMesh:
    return _named(cycle_mesh(3, theta=math.pi / 3.0), "flux_cycle_3")


def _random_bundle() -> BundleMesh:
    return _named(random_bundle_mesh(20, fiber_dim=2, seed=2024,
                                     extra_edge_prob=0.25, dirichlet_count=2),
                  "random_bundle_20")


def _peierls_grid() -> BundleMesh:
    return _named(grid_mesh_2d(1.0, 0.25, b_field=1.0), "peierls_grid")


_MESHES = {
    "flux_cycle_3": _flux_cycle,
    "random_bundle_20": _random_bundle,
    "coulomb_interval_1d": _coulomb_interval,
    "peierls_grid": _peierls_grid,
}


def get_space(name: str) -> ModelSpace:
    try:
        return _SPACES[name]()
    except KeyError:
        raise ConfigError(f"unknown bundled space {name!r}; "
                          f"known: {sorted(_SPACES)}") from None


def get_potential(name: str) -> Potential:
    try:
        return _POTENTIALS[name]()
    except KeyError:
        raise ConfigError(f"unknown bundled potential {name!r}; "
                          f"known: {sorted(_POTENTIALS)}") from None


def get_mesh(name: str) -> BundleMesh:
    try:
        return _MESHES[name]()
    except KeyError:
        raise ConfigError(f"unknown bundled mesh {name!r}; "
                          f"known: {sorted(_MESHES)}") from None


def coulomb_interval_system():
    """The 1d regularized Coulomb system: mesh plus vertex potential values.

    The interval is [-8, 8] at spacing 1/64 with Dirichlet conditions at
    both endpoints and at the origin, which removes the vertex where
    -1/|x| is singular.  The returned values array carries 0.0 at killed
    vertices; those entries never enter any form because Dirichlet blocks
    are dropped.
    """
    mesh = _coulomb_interval()
    x = mesh.positions[:, 0]
    values = np.zeros(len(x))
    live = ~mesh.dirichlet
    values[live] = -1.0 / np.abs(x[live])
    return mesh, values


def config_dir():
    return resources.files("katoform") / "configs"


def list_configs() -> list[str]:
    names = []
    for entry in config_dir().iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[:-len(".json")])
    return sorted(names)


def list_bundled() -> dict:
    """Stable catalog of everything shipped with the package."""
    return {
        "spaces": sorted(_SPACES),
        "potentials": sorted(_POTENTIALS),
        "meshes": sorted(_MESHES),
        "configs": list_configs(),
    }
