"""Operators and quadratic forms on bundle meshes.

Everything acts on sections restricted to non-Dirichlet vertices, stacked
as one complex vector with fiber blocks in vertex order.  Two matrix
pictures are used:

* the generator L with (L f)_u = (1 / 2 mu_u) sum_v w_uv (f_u - U_vu f_v),
  which is symmetric in the mu-weighted inner product, and
* its symmetrization A = M^{-1/2} K M^{-1/2} (K the stiffness matrix,
  M = diag(mu)), a genuinely Hermitian matrix with the same spectrum.

Quadratic forms are reported against the mu-weighted inner product, which
is where the kinetic form (1/2) sum_e w ||f_u - U f_v||^2, the potential
form sum_u mu_u <V_u f_u, f_u>, and the Kato and domination inequalities
all live.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, KernelHandlingError, MeshError
from .mesh import BundleMesh

_DENSE_EIG_LIMIT = 1200
_DENSE_EXPM_LIMIT = 400
_HERMITIAN_TOL = 1e-10


# ---------------------------------------------------------------------------
# assembly

def _interior_index(mesh: BundleMesh):
    idx = np.flatnonzero(mesh.interior)
    slot = -np.ones(mesh.n_vertices, dtype=int)
    slot[idx] = np.arange(idx.size)
    return idx, slot


def _stiffness(mesh: BundleMesh, scalar: bool) -> sp.csr_matrix:
    """Hermitian PSD matrix K with f^* K f = kinetic form, interior DOFs."""
    n = 1 if scalar else mesh.fiber_dim
    idx, slot = _interior_index(mesh)
    dim = idx.size * n
    rows, cols, vals = [], [], []

    def add_block(su, sv, mat):
        base_u, base_v = su * n, sv * n
        for i in range(n):
            for j in range(n):
                z = mat[i, j]
                if z != 0.0:
                    rows.append(base_u + i)
                    cols.append(base_v + j)
                    vals.append(z)

    eye = np.eye(n, dtype=complex)
    for e in range(mesh.n_edges):
        u, v = int(mesh.edge_u[e]), int(mesh.edge_v[e])
        half_w = 0.5 * float(mesh.edge_w[e])
        su, sv = slot[u], slot[v]
        U = eye if scalar else mesh.transports[e]
        if su >= 0:
            add_block(su, su, half_w * eye)
        if sv >= 0:
            add_block(sv, sv, half_w * eye)
        if su >= 0 and sv >= 0:
            add_block(su, sv, -half_w * U)
            add_block(sv, su, -half_w * U.conj().T)
    K = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=complex)
    K.sum_duplicates()
    return K


def _mu_dofs(mesh: BundleMesh, scalar: bool) -> np.ndarray:
    n = 1 if scalar else mesh.fiber_dim
    idx, _ = _interior_index(mesh)
    return np.repeat(mesh.mu[idx], n)


def bochner_laplacian(mesh: BundleMesh, symmetrized: bool = False) -> sp.csr_matrix:
    """Matrix of the bundle vertex operator on interior degrees of freedom.

    Default is the generator L itself (mu-symmetric); with
    ``symmetrized=True`` the unitarily equivalent Hermitian form
    M^{-1/2} K M^{-1/2} is returned instead.  Spectra agree.
    """
    K = _stiffness(mesh, scalar=False)
    mu = _mu_dofs(mesh, scalar=False)
    if symmetrized:
        root = 1.0 / np.sqrt(mu)
        return sp.csr_matrix(sp.diags(root) @ K @ sp.diags(root))
    return sp.csr_matrix(sp.diags(1.0 / mu) @ K)


def scalar_laplacian(mesh: BundleMesh, symmetrized: bool = False) -> sp.csr_matrix:
    """Same operator with the fibers and transports forgotten (functions)."""
    K = _stiffness(mesh, scalar=True)
    mu = _mu_dofs(mesh, scalar=True)
    if symmetrized:
        root = 1.0 / np.sqrt(mu)
        return sp.csr_matrix(sp.diags(root) @ K @ sp.diags(root))
    return sp.csr_matrix(sp.diags(1.0 / mu) @ K)


def diagonal_potential(mesh: BundleMesh, values) -> np.ndarray:
    """Lift scalar vertex values to the (N, n, n) Hermitian field v_u * I."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise MeshError("need one scalar per vertex")
    n = mesh.fiber_dim
    out = np.zeros((mesh.n_vertices, n, n), dtype=complex)
    out[:, np.arange(n), np.arange(n)] = values[:, None]
    return out


def _as_matrix_field(mesh: BundleMesh, V) -> np.ndarray:
    V = np.asarray(V)
    if V.ndim == 1:
        return diagonal_potential(mesh, V.real)
    n = mesh.fiber_dim
    if V.shape != (mesh.n_vertices, n, n):
        raise MeshError(f"potential field must have shape ({mesh.n_vertices}, {n}, {n})")
    V = V.astype(complex)
    herm_defect = np.max(np.abs(V - V.conj().transpose(0, 2, 1)))
    if herm_defect > _HERMITIAN_TOL:
        raise MeshError(f"potential field is not Hermitian (defect {herm_defect:.2e})")
    return V


def _potential_blockdiag(mesh: BundleMesh, V) -> sp.csr_matrix:
    V = _as_matrix_field(mesh, V)
    idx, _ = _interior_index(mesh)
    blocks = [V[i] for i in idx]
    return sp.csr_matrix(sp.block_diag(blocks, format="csr", dtype=complex))


def _restrict(mesh: BundleMesh, f, scalar: bool = False) -> np.ndarray:
    """Stack a full-mesh section (N, n) into the interior DOF vector."""
    n = 1 if scalar else mesh.fiber_dim
    f = np.asarray(f)
    if f.shape == (mesh.n_vertices,) and n == 1:
        f = f[:, None]
    if f.shape != (mesh.n_vertices, n):
        raise MeshError(f"section must have shape ({mesh.n_vertices}, {n})")
    idx, _ = _interior_index(mesh)
    return f[idx].reshape(-1).astype(complex)


def _unstack(mesh: BundleMesh, vec, scalar: bool = False) -> np.ndarray:
    """Interior DOF vector back to a full (N, n) array, zeros on Dirichlet."""
    n = 1 if scalar else mesh.fiber_dim
    idx, _ = _interior_index(mesh)
    out = np.zeros((mesh.n_vertices, n), dtype=complex)
    out[idx] = np.asarray(vec).reshape(idx.size, n)
    return out


# ---------------------------------------------------------------------------
# quadratic forms

@dataclass
class FormValue:
    kinetic: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


def quad_form(mesh: BundleMesh, f, V=None) -> FormValue:
    """Evaluate the energy form at a section (Dirichlet values forced to 0).

    kinetic = (1/2) sum_e w_e ||f_u - U_e f_v||^2,
    potential = sum_u mu_u <V_u f_u, f_u>.
    """
    n = mesh.fiber_dim
    f = np.asarray(f, dtype=complex)
    if f.shape == (mesh.n_vertices,) and n == 1:
        f = f[:, None]
    if f.shape != (mesh.n_vertices, n):
        raise MeshError(f"section must have shape ({mesh.n_vertices}, {n})")
    f = f.copy()
    f[mesh.dirichlet] = 0.0
    kinetic = 0.0
    for e in range(mesh.n_edges):
        u, v = mesh.edge_u[e], mesh.edge_v[e]
        diff = f[u] - mesh.transports[e] @ f[v]
        kinetic += 0.5 * mesh.edge_w[e] * float(np.real(np.vdot(diff, diff)))
    potential = 0.0
    if V is not None:
        V = _as_matrix_field(mesh, V)
        for u in range(mesh.n_vertices):
            if mesh.dirichlet[u]:
                continue
            potential += mesh.mu[u] * float(np.real(np.vdot(f[u], V[u] @ f[u])))
    return FormValue(kinetic=kinetic, potential=potential)


def fiber_split(V) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise decomposition V = V1 - V2 with both parts PSD.

    Works fiberwise through the eigendecomposition of each Hermitian V_u;
    zero eigenvalues sit in V1 (and contribute nothing either way).
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim != 3 or V.shape[1] != V.shape[2]:
        raise MeshError("expected an (N, n, n) field")
    herm_defect = np.max(np.abs(V - V.conj().transpose(0, 2, 1))) if V.size else 0.0
    if herm_defect > _HERMITIAN_TOL:
        raise MeshError(f"field is not Hermitian (defect {herm_defect:.2e})")
    lam, Q = np.linalg.eigh(V)
    plus = np.einsum("uij,uj,ukj->uik", Q, np.maximum(lam, 0.0), Q.conj())
    minus = np.einsum("uij,uj,ukj->uik", Q, np.maximum(-lam, 0.0), Q.conj())
    return plus, minus


def kato_inequality_gap(mesh: BundleMesh, f) -> float:
    """Kinetic energy of the section minus that of its pointwise norm.

    The discrete Kato inequality says this is nonnegative: taking |f|
    vertexwise can only lower the energy, by the reverse triangle
    inequality on every edge.
    """
    n = mesh.fiber_dim
    f = np.asarray(f, dtype=complex)
    if f.shape == (mesh.n_vertices,) and n == 1:
        f = f[:, None]
    if f.shape != (mesh.n_vertices, n):
        raise MeshError(f"section must have shape ({mesh.n_vertices}, {n})")
    f = f.copy()
    f[mesh.dirichlet] = 0.0
    norms = np.linalg.norm(f, axis=1)
    bundle = quad_form(mesh, f).kinetic
    scalar = 0.0
    for e in range(mesh.n_edges):
        u, v = mesh.edge_u[e], mesh.edge_v[e]
        d = norms[u] - norms[v]
        scalar += 0.5 * mesh.edge_w[e] * d * d
    return bundle - scalar


# ---------------------------------------------------------------------------
# semigroups

def _semigroup_apply(A, t: float, g: np.ndarray) -> np.ndarray:
    """e^{-tA} g for Hermitian sparse A, by Pade below the dense cutoff."""
    dim = A.shape[0]
    if dim <= _DENSE_EXPM_LIMIT:
        return scipy.linalg.expm(-t * A.toarray()) @ g
    out = spla.expm_multiply(-t * A.tocsc(), g)
    if not np.all(np.isfinite(out)):
        raise ConvergenceError("semigroup action overflowed", residual=math.inf)
    return out


def semigroup_evolve(mesh: BundleMesh, f, t: float, V=None,
                     scalar: bool = False) -> np.ndarray:
    """Apply e^{-t H(V)} to a section, returned on the full vertex set.

    The evolution runs in the symmetrized picture and is mapped back, so
    the result is the mu-space semigroup applied to f.
    """
    if t < 0:
        raise MeshError("time must be nonnegative")
    K = _stiffness(mesh, scalar=scalar)
    mu = _mu_dofs(mesh, scalar=scalar)
    root = np.sqrt(mu)
    A = sp.diags(1.0 / root) @ K @ sp.diags(1.0 / root)
    if V is not None:
        if scalar:
            raise MeshError("potentials attach to the bundle picture")
        A = A + _potential_blockdiag(mesh, V)
    g = _restrict(mesh, f, scalar=scalar) * root
    out = _semigroup_apply(sp.csr_matrix(A), t, g) / root
    return _unstack(mesh, out, scalar=scalar)


def semigroup_domination_gap(mesh: BundleMesh, f, t: float) -> float:
    """min_u [ (e^{-t H_scalar} |f|)_u - |(e^{-t H_bundle} f)_u| ].

    Nonnegative by semigroup domination: the scalar flow of the pointwise
    norm dominates the norm of the bundle flow.
    """
    evolved = semigroup_evolve(mesh, f, t)
    norms_after = np.linalg.norm(evolved, axis=1)
    f = np.asarray(f, dtype=complex)
    if f.shape == (mesh.n_vertices,) and mesh.fiber_dim == 1:
        f = f[:, None]
    f = f.copy()
    f[mesh.dirichlet] = 0.0
    start_norms = np.linalg.norm(f, axis=1)
    scalar_after = semigroup_evolve(mesh, start_norms, t, scalar=True).real[:, 0]
    interior = mesh.interior
    return float(np.min(scalar_after[interior] - norms_after[interior]))


# ---------------------------------------------------------------------------
# spectra and form bounds

@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    method: str

    @property
    def lowest(self) -> float:
        return float(self.eigenvalues[0])


def _hamiltonian(mesh: BundleMesh, V=None) -> sp.csr_matrix:
    K = _stiffness(mesh, scalar=False)
    mu = _mu_dofs(mesh, scalar=False)
    root = 1.0 / np.sqrt(mu)
    A = sp.diags(root) @ K @ sp.diags(root)
    if V is not None:
        A = A + _potential_blockdiag(mesh, V)
    return sp.csr_matrix(A)


def form_sum_spectrum(mesh: BundleMesh, V=None, k: int | None = None) -> SpectrumResult:
    """Eigenvalues of H(V) = H(0) + V (ascending), with solver residuals.

    Dense Hermitian solve up to 1200 degrees of freedom, Lanczos for the
    k lowest beyond that.  Residuals are ||H x - lambda x||_2 for the
    returned pairs; a residual above 1e-8 * scale raises ConvergenceError.
    """
    A = _hamiltonian(mesh, V)
    dim = A.shape[0]
    scale = max(1.0, float(abs(A).max()))
    if k is None or dim <= _DENSE_EIG_LIMIT or k >= dim - 1:
        dense = A.toarray()
        lam, Q = np.linalg.eigh(dense)
        if k is not None:
            lam, Q = lam[:k], Q[:, :k]
        res = np.linalg.norm(dense @ Q - Q * lam[None, :], axis=0)
        method = "dense"
    else:
        v0 = np.full(dim, 1.0 / math.sqrt(dim))
        try:
            lam, Q = spla.eigsh(A, k=k, which="SA", v0=v0, maxiter=max(2000, 40 * dim))
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError("Lanczos did not converge",
                                   residual=math.inf) from exc
        order = np.argsort(lam)
        lam, Q = lam[order], Q[:, order]
        res = np.linalg.norm(A @ Q - Q * lam[None, :], axis=0)
        method = "lanczos"
    worst = float(res.max()) if res.size else 0.0
    if worst > 1e-8 * scale:
        raise ConvergenceError(f"eigenpair residual {worst:.2e} too large",
                               residual=worst)
    return SpectrumResult(eigenvalues=lam.real, residuals=res, method=method)


def klmn_optimal_c1(mesh: BundleMesh, V2, c2: float) -> float:
    """Smallest C1 with potential form <= C1 * kinetic + C2 * mass.

    Solves the generalized problem max spec(V2 - C2, A) on the range of
    the kinetic matrix A; zero modes of A are handled by Schur reduction
    and must see a nonpositive potential block, otherwise no finite C1
    exists and KernelHandlingError is raised.
    """
    V2 = _as_matrix_field(mesh, V2)
    lam_min_field = np.linalg.eigvalsh(V2).min() if V2.size else 0.0
    if lam_min_field < -1e-10:
        raise MeshError("V2 must be positive semidefinite")
    A = _hamiltonian(mesh, None).toarray()
    B = (_potential_blockdiag(mesh, V2) - c2 * sp.identity(A.shape[0])).toarray()
    lam, Q = np.linalg.eigh(A)
    lam_max = float(lam[-1]) if lam.size else 0.0
    cut = max(1e-12 * max(lam_max, 1.0), 1e-14)
    ker = lam <= cut
    Q0, Qp = Q[:, ker], Q[:, ~ker]
    lam_p = lam[~ker]
    if Q0.shape[1] == 0:
        W = (Qp.conj().T @ B @ Qp) / np.sqrt(lam_p)[None, :] / np.sqrt(lam_p)[:, None]
        top = float(np.linalg.eigvalsh(W)[-1]) if W.size else 0.0
        return max(0.0, top)
    K00 = Q0.conj().T @ B @ Q0
    K0p = Q0.conj().T @ B @ Qp
    ker_eigs = np.linalg.eigvalsh(K00)
    scale = max(1.0, float(np.abs(B).max()))
    if ker_eigs.size and ker_eigs[-1] > 1e-10 * scale:
        raise KernelHandlingError(
            "potential is positive along a kinetic zero mode; no finite C1")
    # Schur complement onto the range: B_pp + B_p0 (-B_00)^+ B_0p
    neg = -K00
    lam0, Q00 = np.linalg.eigh(neg)
    inv = np.where(lam0 > 1e-12 * scale, 1.0 / np.maximum(lam0, 1e-300), 0.0)
    # zero modes of the kernel block must not couple to the range
    null_mask = lam0 <= 1e-12 * scale
    if np.any(null_mask):
        coupling = np.abs(Q00[:, null_mask].conj().T @ K0p)
        if coupling.size and coupling.max() > 1e-8 * scale:
            raise KernelHandlingError(
                "kinetic zero mode couples through the potential; no finite C1")
    pinv = Q00 @ np.diag(inv) @ Q00.conj().T
    S = Qp.conj().T @ B @ Qp + K0p.conj().T @ pinv @ K0p
    W = S / np.sqrt(lam_p)[None, :] / np.sqrt(lam_p)[:, None]
    top = float(np.linalg.eigvalsh(W)[-1]) if W.size else 0.0
    return max(0.0, top)


# ---------------------------------------------------------------------------
# form limits

@dataclass
class FormLimitResult:
    times: np.ndarray
    quotients: np.ndarray
    form_value: float
    monotone: bool
    defect: float

    @property
    def converged(self) -> bool:
        return math.isfinite(self.defect)


def form_limit_check(mesh: BundleMesh, f, t_grid, V=None,
                     tol: float = 1e-8) -> FormLimitResult:
    """Difference quotients <f, (I - e^{-tH}) f>_mu / t against the form value.

    As t decreases to 0 the quotient increases to q(f) = <H f, f>_mu for
    any self-adjoint H, which is checked on the supplied grid.  The defect
    is |Q(t_min) - q(f)|.
    """
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    if t_grid.size == 0 or t_grid[0] <= 0:
        raise MeshError("t_grid must be positive")
    A = _hamiltonian(mesh, V)
    mu = _mu_dofs(mesh, scalar=False)
    root = np.sqrt(mu)
    g = _restrict(mesh, f) * root
    q_exact = float(np.real(np.vdot(g, A @ g)))
    quotients = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        evolved = _semigroup_apply(A, float(t), g)
        quotients[i] = float(np.real(np.vdot(g, g - evolved))) / float(t)
    # smaller t gives a larger quotient, up to solver noise
    steps = quotients[:-1] - quotients[1:]
    floor = -1e-12 * max(1.0, abs(q_exact))
    monotone = bool(np.all(steps >= floor))
    defect = abs(quotients[0] - q_exact)
    result = FormLimitResult(times=t_grid, quotients=quotients,
                             form_value=q_exact, monotone=monotone,
                             defect=defect)
    return result
