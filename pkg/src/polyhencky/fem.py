"""P1 finite elements on the unit square / cube and a feasible-step energy minimizer.

Per-element deformation gradients are constant, so the discrete energy
sum(vol_e * W(F_e)) is the exact integral of W over the piecewise-affine
deformation.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .energies import EnergyModel
from .errors import DomainError, ParameterError
from .sampling import chunk_rng
from .tensor import DET_GUARD, determinant, frobenius_norm


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray  # (N, n) reference coordinates
    elements: np.ndarray  # (E, n+1) node indices
    boundary: np.ndarray  # sorted indices of Dirichlet nodes

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def reference_edges(self) -> np.ndarray:
        X = self.nodes[self.elements]
        return np.swapaxes(X[:, 1:] - X[:, :1], 1, 2)  # columns X_i - X_0

    @property
    def volumes(self) -> np.ndarray:
        return determinant(self.reference_edges()) / math.factorial(self.dim)

    @property
    def shape_gradients(self) -> np.ndarray:
        """(E, n+1, n): reference gradients of the barycentric shape functions."""
        G = np.linalg.inv(self.reference_edges())  # rows are grad N_1..N_n
        g0 = -G.sum(axis=1, keepdims=True)
        return np.concatenate([g0, G], axis=1)

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(len(self.nodes), dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)


def boundary_nodes(nodes: np.ndarray, faces: Optional[Sequence[tuple[int, int]]] = None) -> np.ndarray:
    """Nodes on the listed faces (axis, side in {0, 1}); all faces by default."""
    n = nodes.shape[1]
    if faces is None:
        faces = [(ax, side) for ax in range(n) for side in (0, 1)]
    mask = np.zeros(len(nodes), dtype=bool)
    for ax, side in faces:
        if not (0 <= ax < n and side in (0, 1)):
            raise ParameterError(f"bad face ({ax}, {side})")
        mask |= np.isclose(nodes[:, ax], float(side))
    if not mask.any():
        raise ParameterError("Dirichlet boundary is empty")
    return np.flatnonzero(mask)


def build_mesh(n: int, k: int, faces: Optional[Sequence[tuple[int, int]]] = None) -> Mesh:
    """Uniform simplicial mesh of [0, 1]^n: 2 k^2 triangles or 6 k^3 (Kuhn) tetrahedra."""
    if k < 1:
        raise ParameterError("resolution must be >= 1")
    if n not in (2, 3):
        raise ParameterError("mesh dimension must be 2 or 3")
    ticks = np.linspace(0.0, 1.0, k + 1)
    grid = np.array(list(itertools.product(ticks, repeat=n)))
    # itertools.product varies the last axis fastest
    strides = np.array([(k + 1) ** (n - 1 - d) for d in range(n)])
    elements = []
    perms = list(itertools.permutations(range(n)))
    for cell in itertools.product(range(k), repeat=n):
        for perm in perms:
            v = np.array(cell)
            simplex = [int(v @ strides)]
            for ax in perm:
                v = v.copy()
                v[ax] += 1
                simplex.append(int(v @ strides))
            elements.append(simplex)
    elements = np.array(elements)
    X = grid[elements]
    vol = determinant(np.swapaxes(X[:, 1:] - X[:, :1], 1, 2))
    flip = vol < 0
    elements[flip, 1], elements[flip, 2] = elements[flip, 2].copy(), elements[flip, 1].copy()
    return Mesh(grid, elements, boundary_nodes(grid, faces))


def element_gradients(mesh: Mesh, x: np.ndarray) -> np.ndarray:
    """(E, n, n) deformation gradients of the nodal positions x (N, n)."""
    return np.einsum("eai,eaj->eij", x[mesh.elements], mesh.shape_gradients)


def total_energy(mesh: Mesh, x: np.ndarray, model: EnergyModel) -> float:
    """sum vol_e W(F_e); +inf if any element is inverted or degenerate."""
    F = element_gradients(mesh, x)
    if np.any(determinant(F) <= DET_GUARD):
        return math.inf
    W = model.value(F)
    if not np.all(np.isfinite(W)):
        return math.inf
    return float(np.sum(mesh.volumes * W))


def total_gradient(mesh: Mesh, x: np.ndarray, model: EnergyModel) -> np.ndarray:
    """Nodal gradient of total_energy, zero at Dirichlet nodes."""
    F = element_gradients(mesh, x)
    if np.any(determinant(F) <= DET_GUARD):
        raise DomainError("inverted element")
    P = model.gradient(F) * mesh.volumes[:, None, None]
    contrib = np.einsum("eij,eaj->eai", P, mesh.shape_gradients)
    g = np.zeros_like(x)
    np.add.at(g, mesh.elements, contrib)
    g[mesh.boundary] = 0.0
    return g


def min_element_det(mesh: Mesh, x: np.ndarray) -> float:
    return float(determinant(element_gradients(mesh, x)).min())


def affine_field(mesh: Mesh, F0) -> np.ndarray:
    return mesh.nodes @ np.asarray(F0, dtype=float).T


def perturbed_initial_field(
    mesh: Mesh, F0, seed: int, amplitude: float = 0.2
) -> np.ndarray:
    """Affine field plus random interior displacements of size amplitude * (element size),
    halved until every element is orientation preserving."""
    x = affine_field(mesh, F0)
    rng = chunk_rng(seed, 0)
    free = mesh.free
    size = float(mesh.volumes.min()) ** (1.0 / mesh.dim)
    noise = rng.uniform(-1.0, 1.0, (len(free), mesh.dim)) * amplitude * size
    for _ in range(60):
        y = x.copy()
        y[free] += noise
        if min_element_det(mesh, y) > DET_GUARD:
            return y
        noise *= 0.5
    return x


ENERGY_SLACK = 1e-14


@dataclass
class MinimizeOptions:
    gtol: float = 1e-10
    max_iter: int = 5000
    method: str = "lbfgs"  # or "gd"
    memory: int = 10
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60


@dataclass
class MinimizeResult:
    energy: float
    iterations: int
    grad_norm: float
    min_det: float
    converged: bool
    positions: np.ndarray = field(repr=False)
    history: list = field(default_factory=list, repr=False)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "min_det": self.min_det,
            "converged": self.converged,
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def minimize(
    mesh: Mesh,
    model: EnergyModel,
    F0,
    initial: Optional[np.ndarray] = None,
    options: MinimizeOptions = MinimizeOptions(),
) -> MinimizeResult:
    """Minimize the discrete energy with boundary values x = F0 X on the Dirichlet nodes.

    Descent (L-BFGS direction, or steepest descent) with Armijo backtracking;
    trial steps that invert an element have infinite energy and are rejected.
    ``grad_norm`` is the max-norm of the nodal gradient scaled by the number of
    nodes, so the tolerance is comparable across resolutions.
    """
    F0 = np.asarray(F0, dtype=float)
    if F0.shape != (mesh.dim, mesh.dim):
        raise ParameterError(f"boundary matrix must be {mesh.dim}x{mesh.dim}")
    if determinant(F0) <= 0:
        raise DomainError("boundary data not in GL+(n): det F0 <= 0")
    x = affine_field(mesh, F0) if initial is None else np.array(initial, dtype=float)
    x[mesh.boundary] = affine_field(mesh, F0)[mesh.boundary]
    free = mesh.free
    f = total_energy(mesh, x, model)
    if not math.isfinite(f):
        raise DomainError("initial field is infeasible (inverted element or infinite energy)")
    scale = len(mesh.nodes)

    def grad(y):
        return total_gradient(mesh, y, model)[free].ravel()

    g = grad(x) if len(free) else np.zeros(0)
    history = [f]
    s_list: list = []
    y_list: list = []
    it = 0
    message = "max iterations reached"
    gnorm = float(np.abs(g).max() * scale) if g.size else 0.0
    while it < options.max_iter:
        if gnorm <= options.gtol:
            message = "gradient tolerance reached"
            break
        if options.method == "lbfgs" and s_list:
            d = -_two_loop(g, s_list, y_list)
            if d @ g >= 0:
                d = -g
                s_list.clear()
                y_list.clear()
        else:
            d = -g
        slope = float(d @ g)
        alpha = 1.0 if (options.method == "lbfgs" and s_list) else 1.0 / max(1.0, np.abs(d).max() * scale)
        accepted = False
        for _ in range(options.max_backtracks):
            trial = x.copy()
            trial[free] += (alpha * d).reshape(-1, mesh.dim)
            ft = total_energy(mesh, trial, model)
            if not math.isfinite(ft):
                alpha *= options.backtrack
                continue
            if ft <= f + options.armijo * alpha * slope:
                accepted = True
                break
            # energy differences below roundoff: accept within slack if the slope has dropped
            if ft <= f + ENERGY_SLACK * abs(f):
                gt = grad(trial)
                if abs(float(d @ gt)) <= 0.5 * abs(slope):
                    accepted = True
                    break
            alpha *= options.backtrack
        if not accepted:
            message = "line search failed"
            break
        gt = grad(trial)
        s, yv = (trial - x)[free].ravel(), gt - g
        if s @ yv > 1e-300:
            s_list.append(s)
            y_list.append(yv)
            if len(s_list) > options.memory:
                s_list.pop(0)
                y_list.pop(0)
        x, f, g = trial, ft, gt
        gnorm = float(np.abs(g).max() * scale)
        history.append(f)
        it += 1
    else:
        message = "max iterations reached"
    return MinimizeResult(
        energy=f,
        iterations=it,
        grad_norm=gnorm,
        min_det=min_element_det(mesh, x),
        converged=gnorm <= options.gtol,
        positions=x,
        history=history,
        message=message,
    )


def _two_loop(g, s_list, y_list):
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        alphas.append((rho, a))
        q -= a * y
    s, y = s_list[-1], y_list[-1]
    q *= (s @ y) / (y @ y)
    for (s, y), (rho, a) in zip(zip(s_list, y_list), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def mesh_to_csv(mesh: Mesh, x: Optional[np.ndarray] = None) -> str:
    """Rows: node id, reference coordinates, (deformed coordinates)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = mesh.dim
    header = ["node"] + [f"X{i}" for i in range(n)]
    if x is not None:
        header += [f"x{i}" for i in range(n)]
    w.writerow(header)
    for i, X in enumerate(mesh.nodes):
        row = [i] + [f"{v:.17g}" for v in X]
        if x is not None:
            row += [f"{v:.17g}" for v in x[i]]
        w.writerow(row)
    return buf.getvalue()


def elements_to_csv(mesh: Mesh) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["element"] + [f"v{i}" for i in range(mesh.dim + 1)])
    for i, e in enumerate(mesh.elements):
        w.writerow([i] + list(map(int, e)))
    return buf.getvalue()
