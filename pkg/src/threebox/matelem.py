"""One-dimensional box integrals and per-irrep blocks of ``H(lam) = H0 + lam W``.

``W = (x-y)^2 + (y-z)^2 + (z-x)^2 = 2(x^2+y^2+z^2) - 2(xy+yz+zx)``, so every
matrix element reduces to the single-mode integrals

    p1(m, n) = <phi_m | q | phi_n>,   p2(m, n) = <phi_m | q^2 | phi_n>

over ``-1 < q < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .boxbasis import ModeTriple, mode_energy
from .d3d import Salc

PI2 = math.pi**2


class BasisError(ValueError):
    """A SALC set handed to block assembly is not orthonormal or not homogeneous."""


def p2_diag(n: int) -> float:
    return 1.0 / 3.0 - 2.0 / (n * n * PI2)


def p1_offdiag(m: int, n: int) -> float:
    if m == n:
        raise ValueError("p1_offdiag needs m != n")
    if (m + n) % 2 == 0:
        return 0.0
    return -16.0 * m * n / (PI2 * (m * m - n * n) ** 2)


def p1(m: int, n: int) -> float:
    return 0.0 if m == n else p1_offdiag(m, n)


def p2(m: int, n: int) -> float:
    if m == n:
        return p2_diag(n)
    if (m + n) % 2 == 1:
        return 0.0
    return 32.0 * m * n / (PI2 * (m * m - n * n) ** 2)


@dataclass(frozen=True)
class OneBodyIntegralTable:
    """Dense ``p1``/``p2`` tables, indexed directly by mode number (row/column 0 unused)."""

    nmax: int
    p1: np.ndarray = field(repr=False)
    p2: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, nmax: int) -> "OneBodyIntegralTable":
        n = np.arange(1, nmax + 1, dtype=float)
        m_, n_ = np.meshgrid(n, n, indexing="ij")
        diff = (m_ * m_ - n_ * n_) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            base = 16.0 * m_ * n_ / (PI2 * diff)
        odd = (m_ + n_) % 2 == 1
        t1 = np.where(odd, -base, 0.0)
        t2 = np.where(~odd & (m_ != n_), 2.0 * base, 0.0)
        t2[np.diag_indices(nmax)] = 1.0 / 3.0 - 2.0 / (n * n * PI2)
        P1 = np.zeros((nmax + 1, nmax + 1))
        P2 = np.zeros((nmax + 1, nmax + 1))
        P1[1:, 1:] = t1
        P2[1:, 1:] = t2
        P1.setflags(write=False)
        P2.setflags(write=False)
        return cls(nmax=nmax, p1=P1, p2=P2)


def coupling_element(a: ModeTriple, b: ModeTriple, table: OneBodyIntegralTable | None = None) -> float:
    """``<a|W|b>`` for two product states."""
    if table is None:
        P1, P2 = p1, p2
    else:
        P1 = lambda m, n: table.p1[m, n]  # noqa: E731
        P2 = lambda m, n: table.p2[m, n]  # noqa: E731
    a1, a2, a3 = a
    b1, b2, b3 = b
    one = 0.0
    if a2 == b2 and a3 == b3:
        one += P2(a1, b1)
    if a1 == b1 and a3 == b3:
        one += P2(a2, b2)
    if a1 == b1 and a2 == b2:
        one += P2(a3, b3)
    two = 0.0
    if a3 == b3:
        two += P1(a1, b1) * P1(a2, b2)
    if a1 == b1:
        two += P1(a2, b2) * P1(a3, b3)
    if a2 == b2:
        two += P1(a3, b3) * P1(a1, b1)
    return 2.0 * one - 2.0 * two


def coupling_elements(A: np.ndarray, B: np.ndarray, table: OneBodyIntegralTable) -> np.ndarray:
    """Vectorized :func:`coupling_element` over rows of integer arrays ``A``, ``B`` of shape (k, 3)."""
    P1, P2 = table.p1, table.p2
    eq = A == B
    a1, a2, a3 = A.T
    b1, b2, b3 = B.T
    one = (
        np.where(eq[:, 1] & eq[:, 2], P2[a1, b1], 0.0)
        + np.where(eq[:, 0] & eq[:, 2], P2[a2, b2], 0.0)
        + np.where(eq[:, 0] & eq[:, 1], P2[a3, b3], 0.0)
    )
    two = (
        np.where(eq[:, 2], P1[a1, b1] * P1[a2, b2], 0.0)
        + np.where(eq[:, 0], P1[a2, b2] * P1[a3, b3], 0.0)
        + np.where(eq[:, 1], P1[a3, b3] * P1[a1, b1], 0.0)
    )
    return 2.0 * one - 2.0 * two


def product_coupling_matrix(triples: np.ndarray, table: OneBodyIntegralTable) -> sp.csr_matrix:
    """Sparse ``W`` over a list of product states (rows of ``triples``).

    ``<a|W|b>`` vanishes unless ``a`` and ``b`` share a mode in at least one
    position, so candidate pairs are gathered by grouping on each position in
    turn; a pair is kept only under the first position it shares.
    """
    triples = np.asarray(triples, dtype=np.int64)
    rows, cols, vals = [], [], []
    for k in range(3):
        order = np.argsort(triples[:, k], kind="stable")
        keys = triples[order, k]
        bounds = np.flatnonzero(np.diff(keys)) + 1
        for grp in np.split(order, bounds):
            ii, jj = np.meshgrid(grp, grp, indexing="ij")
            ii, jj = ii.ravel(), jj.ravel()
            A, B = triples[ii], triples[jj]
            keep = np.ones(len(ii), dtype=bool)
            for earlier in range(k):
                keep &= A[:, earlier] != B[:, earlier]
            ii, jj = ii[keep], jj[keep]
            v = coupling_elements(triples[ii], triples[jj], table)
            nz = v != 0.0
            rows.append(ii[nz])
            cols.append(jj[nz])
            vals.append(v[nz])
    n = len(triples)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


@dataclass
class HamiltonianBlock:
    """``H0`` (diagonal) and ``W`` for one irrep row; ``H(lam) = diag(h0) + lam W``."""

    irrep: str
    row: int
    basis: list[Salc]
    h0: np.ndarray
    w: np.ndarray

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def energy_sums(self) -> np.ndarray:
        return np.array([s.energy_sum for s in self.basis], dtype=np.int64)

    def matrix(self, lam: float) -> np.ndarray:
        h = lam * self.w
        h[np.diag_indices_from(h)] += self.h0
        return h


def coefficient_matrix(salcs: list[Salc]) -> tuple[np.ndarray, sp.csr_matrix]:
    """Product states touched by ``salcs`` and the sparse (states x salcs) coefficient matrix."""
    index: dict[ModeTriple, int] = {}
    rows, cols, vals = [], [], []
    for j, s in enumerate(salcs):
        for t, c in s.coefficients.items():
            rows.append(index.setdefault(t, len(index)))
            cols.append(j)
            vals.append(c)
    triples = np.array([t.as_tuple() for t in index], dtype=np.int64).reshape(-1, 3)
    C = sp.csr_matrix((vals, (rows, cols)), shape=(len(index), len(salcs)))
    return triples, C


def assemble_block(irrep: str, row: int, salcs: list[Salc], table: OneBodyIntegralTable,
                   orthonormal_tol: float = 1e-10) -> HamiltonianBlock:
    """Matrix representation of ``H0`` and ``W`` in the given SALC basis."""
    for s in salcs:
        if s.irrep != irrep or s.row != row:
            raise BasisError(f"{s.label()} does not belong to {irrep}[{row}]")
    if not salcs:
        return HamiltonianBlock(irrep, row, [], np.zeros(0), np.zeros((0, 0)))
    triples, C = coefficient_matrix(salcs)
    if triples.max() > table.nmax:
        raise BasisError(f"integral table covers modes <= {table.nmax}, basis needs {triples.max()}")
    gram = (C.T @ C).toarray()
    if np.abs(gram - np.eye(len(salcs))).max() > orthonormal_tol:
        raise BasisError(f"{irrep}[{row}] basis is not orthonormal")

    h0 = np.array([mode_energy(next(iter(s.coefficients))) for s in salcs])
    wp = product_coupling_matrix(triples, table)
    w = (C.T @ (wp @ C)).toarray()
    return HamiltonianBlock(irrep=irrep, row=row, basis=list(salcs), h0=h0, w=w)
