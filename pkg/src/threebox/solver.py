"""Dense symmetric eigensolution of the per-irrep blocks."""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .boxbasis import enumerate_states, max_mode
from .d3d import CHARACTER_TABLE, IRREPS, build_salcs
from .matelem import HamiltonianBlock, OneBodyIntegralTable, assemble_block

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


@functools.lru_cache(maxsize=8)
def _salcs_by_row(cutoff: int):
    groups: dict[tuple[str, int], list] = {(s, r): [] for s in IRREPS for r in range(CHARACTER_TABLE[s].dimension)}
    for m in enumerate_states(cutoff):
        for s in build_salcs(m):
            groups[(s.irrep, s.row)].append(s)
    return groups


@functools.lru_cache(maxsize=16)
def _block(cutoff: int, irrep: str, row: int) -> HamiltonianBlock:
    table = OneBodyIntegralTable.build(max_mode(cutoff))
    salcs = _salcs_by_row(cutoff)[(irrep, row)]
    log.debug("assembling %s[%d] at cutoff %d: %d functions", irrep, row, cutoff, len(salcs))
    return assemble_block(irrep, row, salcs, table)


def build_block(cutoff: int, irrep: str, row: int = 0) -> HamiltonianBlock:
    """Block of one irrep row using every SALC with energy sum ``<= cutoff``.

    Blocks are cached per cutoff; treat the returned arrays as read-only.
    """
    if cutoff < 3:
        raise ValueError("cutoff must be >= 3")
    if irrep not in CHARACTER_TABLE:
        raise ValueError(f"unknown irrep {irrep!r}")
    return _block(int(cutoff), irrep, int(row))


def fix_phases(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip columns so the first component with magnitude above ``tol`` is positive."""
    if vecs.size == 0:
        return vecs
    first = np.argmax(np.abs(vecs) > tol, axis=0)
    signs = np.sign(vecs[first, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigensolve_block(block: HamiltonianBlock, lam: float, check: bool = True):
    """Ascending eigenvalues and orthonormal eigenvectors of ``H0 + lam W``.

    Negative ``lam`` is accepted (finite differences around zero need it).
    """
    if block.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    h = block.matrix(lam)
    try:
        vals, vecs = scipy.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigh failed for {block.irrep}[{block.row}] at lam={lam}") from exc
    vecs = fix_phases(vecs)
    if check:
        scale = np.abs(block.h0).max() + abs(lam) * np.linalg.norm(block.w, 2)
        resid = np.linalg.norm(h @ vecs - vecs * vals, axis=0).max()
        if resid > 1e-9 * scale:
            raise ConvergenceError(f"residual {resid:.3e} too large for {block.irrep}[{block.row}] at lam={lam}")
    return vals, vecs


def eigenvalues(block: HamiltonianBlock, lam: float) -> np.ndarray:
    if block.size == 0:
        return np.zeros(0)
    return scipy.linalg.eigh(block.matrix(lam), eigvals_only=True)


@dataclass
class SpectrumSlice:
    """Per-irrep ascending eigenvalues at one coupling; E irreps listed once per level."""

    lam: float
    cutoff: int
    levels: dict[str, np.ndarray]

    def merged(self) -> np.ndarray:
        """All eigenvalues with each E level counted twice, sorted."""
        parts = [np.repeat(self.levels[s], CHARACTER_TABLE[s].dimension) for s in self.levels]
        return np.sort(np.concatenate(parts)) if parts else np.zeros(0)


def spectrum_at(lam: float, cutoff: int, irreps=IRREPS) -> SpectrumSlice:
    if lam < 0:
        raise ValueError("lam must be >= 0")
    levels = {}
    for s in irreps:
        vals, _ = eigensolve_block(build_block(cutoff, s, 0), lam)
        levels[s] = vals
    return SpectrumSlice(lam=float(lam), cutoff=int(cutoff), levels=levels)
