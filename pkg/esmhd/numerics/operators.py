from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

MAX_DEGREE = 6


@dataclass(frozen=True)
class SbpOperators:
    """
    Gauss-Lobatto quadrature and the summation-by-parts matrix
    family for polynomial degree ``k`` on the reference interval [-1, 1].

    Attributes
    ----------
    k
        Polynomial degree of the cell solution. There are ``k + 2`` nodes.
    nodes
        Gauss-Lobatto nodes X, strictly increasing, X[0] = -1, X[-1] = 1.
    weights
        Positive quadrature weights, summing to 2.
    D
        Lagrange differentiation matrix, D[i, l] = l_l'(X_i).
    M
        Diagonal mass matrix diag(weights).
    S
        Stiffness matrix M @ D.
    B
        Boundary matrix diag(-1, 0, ..., 0, 1).
    V
        Legendre Vandermonde, V[i, l] = P_l(X_i) for l = 0..k.
    dV
        Legendre derivative Vandermonde, dV[i, l] = P_l'(X_i) for l = 0..k.
    """

    k: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray
    M: np.ndarray
    S: np.ndarray
    B: np.ndarray
    V: np.ndarray
    dV: np.ndarray

    @property
    def n(self) -> int:
        """Number of Gauss-Lobatto nodes per direction."""
        return self.k + 2

    @property
    def tau(self) -> np.ndarray:
        """Diagonal of the boundary matrix."""
        return np.diag(self.B).copy()


# -----------------------------------------------------------------------------
# Public Functions
# -----------------------------------------------------------------------------


def build_operators(k: int) -> SbpOperators:
    """
    Build the SBP operator family for polynomial degree ``k``.

    Parameters
    ----------
    k
        Polynomial degree, 0 <= k <= 6.

    Returns
    -------
    SbpOperators
        Immutable operator bundle shared by every kernel of a run.
    """
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= MAX_DEGREE:
        raise ValueError(
            f"Polynomial degree `k` must be an integer in [0, {MAX_DEGREE}], got {k}."
        )
    k = int(k)

    nodes = _gauss_lobatto_nodes(k + 1)
    weights = _gauss_lobatto_weights(nodes)
    D = _differentiation_matrix(nodes)

    M = np.diag(weights)
    S = M @ D

    B = np.zeros((k + 2, k + 2))
    B[0, 0] = -1.0
    B[-1, -1] = 1.0

    V = legendre.legvander(nodes, k)
    dV = np.column_stack([legendre_derivative(l, nodes) for l in range(k + 1)])

    for array in (nodes, weights, D, M, S, B, V, dV):
        array.setflags(write=False)

    return SbpOperators(
        k=k, nodes=nodes, weights=weights, D=D, M=M, S=S, B=B, V=V, dV=dV
    )


def legendre_eval(l: int, x: float | np.ndarray) -> float | np.ndarray:
    """
    Evaluate the Legendre polynomial P_l at ``x``.

    Parameters
    ----------
    l
        Polynomial order, l >= 0.
    x
        Evaluation point(s) in [-1, 1].
    """
    if l < 0:
        raise ValueError(f"Legendre order must be non-negative, got {l}.")

    coefficients = np.zeros(l + 1)
    coefficients[l] = 1.0
    return legendre.legval(x, coefficients)


def legendre_derivative(l: int, x: float | np.ndarray) -> float | np.ndarray:
    """
    Evaluate P_l' at ``x``.
    """
    coefficients = np.zeros(l + 1)
    coefficients[l] = 1.0
    return legendre.legval(x, legendre.legder(coefficients))


# -----------------------------------------------------------------------------
# Private Functions
# -----------------------------------------------------------------------------


def _gauss_lobatto_nodes(N: int) -> np.ndarray:
    """
    The N + 1 Gauss-Lobatto nodes: the endpoints plus the roots of P_N',
    found by Newton iteration from Chebyshev-Gauss-Lobatto guesses.
    """
    nodes = -np.cos(np.pi * np.arange(N + 1) / N)

    if N > 1:
        first = np.zeros(N + 1)
        first[N] = 1.0
        first = legendre.legder(first)
        second = legendre.legder(first)

        interior = nodes[1:-1].copy()
        for __ in range(100):
            step = legendre.legval(interior, first) / legendre.legval(interior, second)
            interior -= step
            if np.max(np.abs(step)) < 1e-15:
                break
        nodes[1:-1] = interior

    nodes[0], nodes[-1] = -1.0, 1.0
    nodes = np.sort(nodes)

    # symmetrise away the last bits of round-off
    return 0.5 * (nodes - nodes[::-1])


def _gauss_lobatto_weights(nodes: np.ndarray) -> np.ndarray:
    N = nodes.size - 1
    p_N = legendre_eval(N, nodes)
    return 2.0 / (N * (N + 1) * p_N**2)


def _differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """
    Lagrange differentiation matrix from barycentric weights. The
    diagonal is the negative off-diagonal row sum so D annihilates constants.
    """
    n = nodes.size
    differences = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(differences, 1.0)

    barycentric = 1.0 / np.prod(differences, axis=1)

    D = (barycentric[None, :] / barycentric[:, None]) / differences
    np.fill_diagonal(D, 0.0)
    D[np.diag_indices(n)] = -np.sum(D, axis=1)

    return D
