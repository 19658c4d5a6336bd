"""Coupling sweeps, avoided-crossing detection and large-coupling limits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .d3d import IRREPS
from .oracle import scaled_limit
from .solver import build_block, eigensolve_block

log = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
# horizontal reference lines 2 sqrt(3) (n1 + n2 + 1) for the scaled plots
SCALED_REFERENCE = tuple(2.0 * SQRT3 * j for j in (1, 2, 3, 4))
OVERLAP_THRESHOLD = 0.9


def _check_range(lmin: float, lmax: float, points: int) -> None:
    if points < 1:
        raise ValueError("points must be >= 1")
    if lmax < lmin or (points > 1 and lmax == lmin):
        raise ValueError("need lmax > lmin for more than one point")


def geometric_grid(lmin: float, lmax: float, points: int) -> np.ndarray:
    if lmin <= 0:
        raise ValueError("geometric spacing needs lmin > 0")
    _check_range(lmin, lmax, points)
    if points == 1:
        return np.array([float(lmin)])
    return np.geomspace(lmin, lmax, points)


def linear_grid(lmin: float, lmax: float, points: int) -> np.ndarray:
    _check_range(lmin, lmax, points)
    if points == 1:
        return np.array([float(lmin)])
    return np.linspace(lmin, lmax, points)


def default_grid() -> np.ndarray:
    return geometric_grid(1e-3, 1e3, 60)


@dataclass
class SpectrumCurve:
    """Sorted eigenvalues of each irrep (row 0) along a coupling grid.

    ``energies[irrep]`` has shape ``(len(lams), n_levels)``; ``flagged`` lists
    ``(irrep, step)`` where the eigenvectors at grid points ``step`` and
    ``step + 1`` do not match up one-to-one.
    """

    lams: np.ndarray
    cutoff: int
    energies: dict[str, np.ndarray]
    flagged: list[tuple[str, int]] = field(default_factory=list)

    @property
    def irreps(self) -> tuple[str, ...]:
        return tuple(self.energies)

    def level(self, irrep: str, k: int) -> np.ndarray:
        """Curve of the ``k``-th level (1-based) of an irrep."""
        return self.energies[irrep][:, k - 1]


def sweep(lams, cutoff: int, irreps=IRREPS, n_levels: int | None = None) -> SpectrumCurve:
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if (lams < 0).any() or (np.diff(lams) <= 0).any():
        raise ValueError("grid must be ascending and non-negative")
    energies = {}
    flagged = []
    for s in irreps:
        block = build_block(cutoff, s, 0)
        k = block.size if n_levels is None else min(n_levels, block.size)
        out = np.empty((lams.size, k))
        prev = None
        for i, lam in enumerate(lams):
            vals, vecs = eigensolve_block(block, lam)
            out[i] = vals[:k]
            if prev is not None and k:
                overlap = np.abs(prev.T @ vecs[:, :k])
                if overlap.max(axis=0).min() < OVERLAP_THRESHOLD:
                    flagged.append((s, i - 1))
            prev = vecs
        energies[s] = out
    if flagged:
        log.info("%d sweep steps failed the overlap test", len(flagged))
    return SpectrumCurve(lams=lams, cutoff=int(cutoff), energies=energies, flagged=flagged)


def scaled_curves(curve: SpectrumCurve) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """``lam^-1/2 E`` on the part of the grid with ``lam > 0``."""
    pos = curve.lams > 0
    root = np.sqrt(curve.lams[pos])[:, None]
    return curve.lams[pos], {s: e[pos] / root for s, e in curve.energies.items()}


@dataclass
class AvoidedCrossing:
    irrep: str
    lower: int  # 1-based level index; the partner is lower + 1
    lam_c: float
    min_gap: float
    cutoff: int

    def as_dict(self) -> dict:
        return {"irrep": self.irrep, "lower": self.lower, "upper": self.lower + 1,
                "lam_c": self.lam_c, "min_gap": self.min_gap, "cutoff": self.cutoff}


def _gap(block, k: int, lam: float) -> float:
    vals = scipy.linalg.eigh(block.matrix(lam), eigvals_only=True, subset_by_index=[k, k + 1])
    return float(vals[1] - vals[0])


def detect_avoided_crossings(curve: SpectrumCurve, irrep: str, rel_tol: float = 1e-4,
                             levels: int | None = None) -> list[AvoidedCrossing]:
    """Strict interior local minima of adjacent-level gaps, refined by golden-section search."""
    e = curve.energies[irrep]
    if curve.lams.size < 3 or e.shape[1] < 2:
        return []
    block = build_block(curve.cutoff, irrep, 0)
    top = e.shape[1] - 1 if levels is None else min(levels, e.shape[1]) - 1
    found = []
    for k in range(top):
        gap = e[:, k + 1] - e[:, k]
        for i in range(1, len(gap) - 1):
            if not (gap[i] < gap[i - 1] and gap[i] < gap[i + 1]):
                continue
            a, m, b = curve.lams[i - 1], curve.lams[i], curve.lams[i + 1]
            res = minimize_scalar(lambda x: _gap(block, k, x), bracket=(a, m, b),
                                  method="golden", tol=rel_tol)
            lam_c, g = float(res.x), float(res.fun)
            if not a <= lam_c <= b:
                lam_c, g = float(m), float(gap[i])
            found.append(AvoidedCrossing(irrep, k + 1, lam_c, g, curve.cutoff))
    return found


@dataclass(frozen=True)
class AsymptoticTarget:
    n1: int
    n2: int
    levels: tuple[str, ...]

    @property
    def limit(self) -> float:
        return scaled_limit(self.n1, self.n2)


# small-coupling levels expected to share each large-coupling limit
ASYMPTOTIC_TARGETS = (
    AsymptoticTarget(0, 0, ("1A1g", "1A2u")),
    AsymptoticTarget(1, 0, ("1Eu", "1Eg")),
    AsymptoticTarget(3, 0, ("1A2g", "1A1u")),
)


def asymptote_report(curve: SpectrumCurve) -> list[dict]:
    """Scaled values of the paired levels at the largest coupling on the grid."""
    lams, scaled = scaled_curves(curve)
    out = []
    for target in ASYMPTOTIC_TARGETS:
        vals = {}
        for name in target.levels:
            k, s = int(name[0]), name[1:]
            vals[name] = float(scaled[s][-1, k - 1])
        a, b = target.levels
        out.append({
            "levels": list(target.levels),
            "limit": target.limit,
            "lam": float(lams[-1]),
            "scaled": vals,
            "pair_gap": abs(vals[a] - vals[b]),
            "above_limit": all(v > target.limit for v in vals.values()),
        })
    return out


def _levels_at(cutoff: int, lam: float):
    a_vals, a_vecs = eigensolve_block(build_block(cutoff, "A1g", 0), lam)
    e_vals, _ = eigensolve_block(build_block(cutoff, "Eg", 0), lam)
    return a_vals, a_vecs, e_vals


def track_level_association(cutoff: int, lams, lam_c: float) -> dict:
    """How the second Eg level pairs with the third and fourth A1g levels around ``lam_c``.

    Besides the energy distances, the weight of the ``(3,1,1)`` A1g function
    in levels 3 and 4 records which A1g state carries the character that
    2Eg shares at small coupling.
    """
    block = build_block(cutoff, "A1g", 0)
    ref = next(i for i, s in enumerate(block.basis) if s.key == (3, 1, 1))
    rows = []
    for lam in np.asarray(lams, dtype=float):
        a, vecs, e = _levels_at(cutoff, lam)
        rows.append({
            "lam": float(lam),
            "E3A1g": float(a[2]),
            "E4A1g": float(a[3]),
            "E2Eg": float(e[1]),
            "d3": float(abs(e[1] - a[2])),
            "d4": float(abs(e[1] - a[3])),
            "w311_3": float(vecs[ref, 2] ** 2),
            "w311_4": float(vecs[ref, 3] ** 2),
        })
    before = [r for r in rows if r["lam"] < lam_c]
    after = [r for r in rows if r["lam"] > lam_c]
    close_before = all(r["d3"] < r["d4"] for r in before)
    close_after = all(r["d4"] < r["d3"] for r in after)
    if not (close_before or close_after):
        raise RuntimeError("2Eg is associated with neither 3A1g nor 4A1g on either side of lam_c")
    return {
        "cutoff": int(cutoff),
        "lam_c": float(lam_c),
        "near_3A1g_before": close_before,
        "near_4A1g_after": close_after,
        "points": rows,
    }
