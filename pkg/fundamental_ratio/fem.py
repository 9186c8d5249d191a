"""Dirichlet Laplacian discretizations and their smallest eigenpairs.

Two elements are provided on the same mesh:

* Crouzeix--Raviart (nonconforming, one degree of freedom per edge
  midpoint), whose eigenvalues feed the explicit lower bound;
* P1 (conforming hat functions), whose eigenvectors are admissible trial
  functions for the upper bound.

All element integrals are exact: gradients are element-wise constant and
the local mass matrices are the closed forms of each basis.
"""

from dataclasses import dataclass
from enum import Enum

import logging

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackError
from scipy.sparse.linalg import ArpackNoConvergence
from scipy.sparse.linalg import LinearOperator
from scipy.sparse.linalg import eigsh
from scipy.sparse.linalg import splu

from .exc import ArgumentError
from .exc import SolverError
from .exc import TooCoarseError


log = logging.getLogger(__name__)

# Relative residual accepted for every returned eigenpair
DEFAULT_TOL = 1e-10

# Block inverse-iteration sweeps allowed after the Lanczos run
MAX_POLISH = 25


class ElementKind(Enum):
    CR = "CR"
    P1 = "P1"


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Stiffness and mass matrices after Dirichlet elimination.

    ``dof_map[entity]`` is the matrix index of a mesh entity (an edge for
    CR, a vertex for P1) or -1 when it lies on the boundary.
    """

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    dof_map: np.ndarray
    kind: ElementKind
    mesh: object

    @property
    def n_dofs(self):
        return self.stiffness.shape[0]


@dataclass(frozen=True, eq=False)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


def _local_matrices(mesh, kind):
    x = mesh.vertices[mesh.elements]
    # e[:, i] is the edge opposite local vertex i
    e = x[:, [2, 0, 1]] - x[:, [1, 2, 0]]
    area = mesh.signed_areas()
    dots = np.einsum("mik,mjk->mij", e, e)
    stiffness = dots / (4.0 * area)[:, None, None]

    if kind is ElementKind.CR:
        stiffness = 4.0 * stiffness
        mass = (area / 3.0)[:, None, None] * np.eye(3)
    else:
        mass = (area / 12.0)[:, None, None] * (np.ones((3, 3)) + np.eye(3))
    return stiffness, mass


def _dof_map(mesh, kind):
    if kind is ElementKind.CR:
        interior = ~mesh.boundary
    else:
        interior = ~mesh.boundary_vertices()
    dof_map = np.full(len(interior), -1, dtype=np.int64)
    dof_map[interior] = np.arange(int(interior.sum()))
    return dof_map


def assemble(mesh, kind):
    """Assemble the generalized eigenproblem ``K x = lambda M x``."""
    kind = ElementKind(kind)
    dof_map = _dof_map(mesh, kind)
    n = int((dof_map >= 0).sum())
    if n == 0:
        raise TooCoarseError(
            f"Mesh too coarse: no interior {kind.value} degree of freedom"
        )

    if kind is ElementKind.CR:
        entities = mesh.element_edges
    else:
        entities = mesh.elements
    local_dofs = dof_map[entities]

    local_k, local_m = _local_matrices(mesh, kind)
    rows = np.repeat(local_dofs, 3, axis=1).ravel()
    cols = np.tile(local_dofs, (1, 3)).ravel()
    keep = (rows >= 0) & (cols >= 0)
    rows, cols = rows[keep], cols[keep]

    stiffness = sparse.csr_matrix(
        (local_k.reshape(-1)[keep], (rows, cols)), shape=(n, n)
    )
    mass = sparse.csr_matrix(
        (local_m.reshape(-1)[keep], (rows, cols)), shape=(n, n)
    )
    mass.eliminate_zeros()

    log.debug("Assembled %s system with %d dofs", kind.value, n)
    return DiscreteSystem(
        stiffness=stiffness,
        mass=mass,
        dof_map=dof_map,
        kind=kind,
        mesh=mesh,
    )


def _residuals(stiffness, mass, values, vectors):
    kx = stiffness @ vectors
    r = kx - (mass @ vectors) * values
    return np.linalg.norm(r, axis=0) / np.linalg.norm(kx, axis=0)


def _rayleigh_ritz(stiffness, mass, basis):
    a = basis.T @ (stiffness @ basis)
    b = basis.T @ (mass @ basis)
    a = 0.5 * (a + a.T)
    b = 0.5 * (b + b.T)
    values, coefficients = scipy.linalg.eigh(a, b)
    return values, basis @ coefficients


def _fix_signs(vectors):
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def smallest_eigenpairs(system, k, tol=DEFAULT_TOL):
    """Return the ``k`` smallest eigenpairs in nondecreasing order.

    Shift-invert Lanczos at shift 0 (the stiffness is positive definite
    once boundary dofs are eliminated) on a block two wider than ``k``, then
    block inverse iteration with Rayleigh--Ritz until every residual is
    below ``tol``.
    """
    n = system.n_dofs
    if k < 1 or k >= n:
        raise ArgumentError(f"Need 1 <= k < {n} eigenpairs, got k = {k}")
    if not tol > 0:
        raise ArgumentError(f"tol must be positive, got {tol!r}")

    stiffness = system.stiffness.tocsc()
    mass = system.mass.tocsc()
    lu = splu(stiffness)
    op_inv = LinearOperator(
        shape=stiffness.shape, matvec=lu.solve, dtype=stiffness.dtype
    )

    block = min(k + 2, n - 1)
    try:
        _, basis = eigsh(
            stiffness,
            k=block,
            M=mass,
            sigma=0.0,
            which="LM",
            OPinv=op_inv,
            v0=np.ones(n),
            tol=0.0,
        )
    except (ArpackNoConvergence, ArpackError) as err:
        raise SolverError(
            f"Lanczos did not converge on {system.kind.value} system "
            f"with {n} dofs: {err}"
        ) from err

    values, vectors = _rayleigh_ritz(stiffness, mass, basis)
    residuals = _residuals(stiffness, mass, values[:k], vectors[:, :k])
    sweeps = 0
    while np.max(residuals) > tol:
        if sweeps == MAX_POLISH:
            raise SolverError(
                f"Residual {np.max(residuals):.3e} above tol {tol:.1e} "
                f"after {sweeps} inverse iterations "
                f"({system.kind.value}, {n} dofs)"
            )
        basis = lu.solve(np.asarray(mass @ vectors))
        values, vectors = _rayleigh_ritz(stiffness, mass, basis)
        residuals = _residuals(stiffness, mass, values[:k], vectors[:, :k])
        sweeps += 1

    vectors = _fix_signs(vectors[:, :k])
    log.debug(
        "%s eigenvalues %s, residuals %s, %d polishing sweeps",
        system.kind.value,
        values[:k],
        residuals,
        sweeps,
    )
    return [
        EigenPair(
            value=float(values[i]),
            vector=vectors[:, i],
            residual=float(residuals[i]),
        )
        for i in range(k)
    ]
