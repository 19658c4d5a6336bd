"""First-order degenerate perturbation theory in the coupling ``lam``.

Within one irrep row, the states sharing an exact energy sum form a
degenerate group; the first-order slopes are the eigenvalues of ``W``
restricted to that group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boxbasis import ENERGY_UNIT
from .d3d import IRREPS
from .matelem import HamiltonianBlock, OneBodyIntegralTable, assemble_block
from .solver import _salcs_by_row, build_block, eigensolve_block

PI2 = math.pi**2
PI4 = math.pi**4
_S = math.sqrt(466441.0)

# level -> (energy sum of the unperturbed state, first-order coefficient)
CLOSED_FORM_SLOPES: dict[str, tuple[int, float]] = {
    "1A1g": (3, 2.0 * (PI2 - 6.0) / PI2),
    "1A2u": (6, (162.0 * PI4 - 729.0 * PI2 - 4096.0) / (81.0 * PI4)),
    "1Eu": (6, (162.0 * PI4 - 729.0 * PI2 + 2048.0) / (81.0 * PI4)),
    "2A1g": (9, 2.0 * (81.0 * PI4 - 243.0 * PI2 - 2048.0) / (81.0 * PI4)),
    "1Eg": (9, 2.0 * (81.0 * PI4 - 243.0 * PI2 + 1024.0) / (81.0 * PI4)),
    "3A1g": (11, 2.0 * (9.0 * PI2 - 38.0) / (9.0 * PI2)),
    "2Eg": (11, 2.0 * (9.0 * PI2 - 38.0) / (9.0 * PI2)),
    "2A2u": (12, (2.0 * PI2 - 3.0) / PI2),
    "3A2u": (14, (101250.0 * PI4 - 275625.0 * PI2 - 2772992.0) / (50625.0 * PI4)),
    "2Eu": (14, (101250.0 * PI4 - 275625.0 * PI2 - 2048.0 * _S) / (50625.0 * PI4)),
    "3Eu": (14, (101250.0 * PI4 - 275625.0 * PI2 + 2048.0 * _S) / (50625.0 * PI4)),
    "1A1u": (14, (101250.0 * PI4 - 275625.0 * PI2 + 2772992.0) / (50625.0 * PI4)),
}


@dataclass
class FirstOrderLevel:
    irrep: str
    index: int  # 1-based position within the irrep, ordered by (E0, slope)
    energy_sum: int
    slope: float
    group_size: int  # dimension of the degenerate subspace within the irrep row
    vector: np.ndarray = field(repr=False)  # zeroth-order state in the block basis

    @property
    def label(self) -> str:
        return f"{self.index}{self.irrep}"

    @property
    def e0(self) -> float:
        return ENERGY_UNIT * self.energy_sum


def degenerate_groups(block: HamiltonianBlock) -> dict[int, np.ndarray]:
    """Block indices grouped by exact energy sum."""
    sums = block.energy_sums
    return {int(e): np.flatnonzero(sums == e) for e in np.unique(sums)}


def block_levels(block: HamiltonianBlock) -> list[FirstOrderLevel]:
    levels = []
    for e, idx in degenerate_groups(block).items():
        sub = block.w[np.ix_(idx, idx)]
        vals, vecs = np.linalg.eigh(sub)
        for k in range(len(idx)):
            v = np.zeros(block.size)
            v[idx] = vecs[:, k]
            levels.append(FirstOrderLevel(block.irrep, 0, e, float(vals[k]), len(idx), v))
    levels.sort(key=lambda lv: (lv.energy_sum, lv.slope))
    for i, lv in enumerate(levels, start=1):
        lv.index = i
    return levels


def first_order_table(cutoff: int, table: OneBodyIntegralTable | None = None,
                      irreps=IRREPS) -> list[FirstOrderLevel]:
    """First-order levels of every irrep (row 0) up to the cutoff, sorted by (E0, slope).

    Passing ``table`` rebuilds the blocks from those integrals instead of the
    cached closed-form blocks.
    """
    out = []
    for s in irreps:
        if table is None:
            block = build_block(cutoff, s, 0)
        else:
            block = assemble_block(s, 0, _salcs_by_row(cutoff)[(s, 0)], table)
        out.extend(block_levels(block))
    out.sort(key=lambda lv: (lv.energy_sum, lv.slope, IRREPS.index(lv.irrep)))
    return out


@dataclass
class ComparisonRow:
    level: str
    e0: float
    computed: float
    closed_form: float

    @property
    def rel_error(self) -> float:
        return abs(self.computed - self.closed_form) / abs(self.closed_form)

    def passed(self, rtol: float = 1e-10) -> bool:
        return self.rel_error <= rtol


def compare_to_closed_forms(cutoff: int = 14, table: OneBodyIntegralTable | None = None) -> list[ComparisonRow]:
    """Rows for every tabulated level reachable at ``cutoff``, in table order."""
    computed = {lv.label: lv for lv in first_order_table(cutoff, table)}
    rows = []
    for label, (esum, slope) in CLOSED_FORM_SLOPES.items():
        if esum > cutoff:
            continue
        lv = computed.get(label)
        if lv is None or lv.energy_sum != esum:
            raise LookupError(f"level {label} not found at energy sum {esum}")
        rows.append(ComparisonRow(label, lv.e0, lv.slope, slope))
    return rows


def find_level(cutoff: int, label: str) -> FirstOrderLevel:
    for lv in first_order_table(cutoff):
        if lv.label == label:
            return lv
    raise LookupError(label)


def rr_slope_check(level: FirstOrderLevel | str, h: float = 1e-3, cutoff: int = 27) -> float:
    """Central-difference ``dE/dlam`` at ``lam = 0`` from the variational solver.

    The eigenvector followed at ``+h`` and ``-h`` is the one with largest
    overlap with the zeroth-order state, so levels that split linearly are
    not swapped by the sorted order on the negative side.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError("h must lie in [1e-6, 1e-2]")
    if isinstance(level, str):
        level = find_level(cutoff, level)
    block = build_block(cutoff, level.irrep, 0)
    if block.size != level.vector.size:
        raise ValueError("level was computed at a different cutoff")
    picked = []
    for lam in (h, -h):
        vals, vecs = eigensolve_block(block, lam)
        picked.append(vals[np.argmax(np.abs(level.vector @ vecs))])
    return (picked[0] - picked[1]) / (2.0 * h)
