"""Independent reference calculations.

Nothing here touches the symmetry-adapted machinery: the full product-basis
Hamiltonian is built from Kronecker products of one-mode matrices whose
entries come from adaptive quadrature.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .boxbasis import ENERGY_UNIT, PARITY_CLASS_IRREPS, enumerate_states, max_mode, parity_signature
from .d3d import CHARACTER_TABLE
from .matelem import OneBodyIntegralTable

MAX_FULL_STATES = 1500
QUAD_TOL = 1e-13


class QuadratureError(RuntimeError):
    pass


def box_mode(n: int, q):
    return math.sin(n * math.pi * (q + 1.0) / 2.0)


def quadrature_integral(kind: str, m: int, n: int) -> float:
    """``int_{-1}^{1} phi_m(q) q^p phi_n(q) dq`` with ``p = 1`` (``kind="q"``) or ``p = 2`` (``"q2"``)."""
    power = {"q": 1, "q2": 2, "q^2": 2}.get(kind)
    if power is None:
        raise ValueError(f"kind must be 'q' or 'q2', got {kind!r}")
    if not (1 <= m <= 200 and 1 <= n <= 200):
        raise ValueError("mode indices must lie in [1, 200]")
    # one panel per half-wavelength of the faster mode
    nodes = np.linspace(-1.0, 1.0, max(m, n) + 1)
    total, err = 0.0, 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        val, e = quad(lambda q: box_mode(m, q) * q**power * box_mode(n, q), a, b,
                      epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
        err += e
    if err > QUAD_TOL:
        raise QuadratureError(f"quadrature of {kind}({m},{n}) did not converge: error {err:.2e}")
    return total


def quadrature_table(nmax: int) -> OneBodyIntegralTable:
    p1 = np.zeros((nmax + 1, nmax + 1))
    p2 = np.zeros((nmax + 1, nmax + 1))
    for m in range(1, nmax + 1):
        for n in range(m, nmax + 1):
            p1[m, n] = p1[n, m] = quadrature_integral("q", m, n)
            p2[m, n] = p2[n, m] = quadrature_integral("q2", m, n)
    return OneBodyIntegralTable(nmax=nmax, p1=p1, p2=p2)


@dataclass
class FullBasisSpectrum:
    cutoff: int
    lam: float
    eigenvalues: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


def full_hamiltonian(lam: float, cutoff: int, table: OneBodyIntegralTable | None = None):
    """Product-basis ``H`` over all states with ``n1^2+n2^2+n3^2 <= cutoff``.

    Returns ``(H, energy_sums)``.
    """
    nmax = max_mode(cutoff)
    n = np.arange(1, nmax + 1)
    a, b, c = np.meshgrid(n, n, n, indexing="ij")
    sums = (a * a + b * b + c * c).ravel()
    keep = np.flatnonzero(sums <= cutoff)
    if len(keep) > MAX_FULL_STATES:
        raise ValueError(f"{len(keep)} product states exceed the dense oracle limit {MAX_FULL_STATES}")
    if table is None:
        table = quadrature_table(nmax)
    elif table.nmax < nmax:
        raise ValueError(f"integral table covers modes up to {table.nmax}, cutoff needs {nmax}")

    q1 = table.p1[1:nmax + 1, 1:nmax + 1]
    q2 = table.p2[1:nmax + 1, 1:nmax + 1]
    one = np.eye(nmax)

    def k3(x, y, z):
        return np.kron(np.kron(x, y), z)

    w = 2.0 * (k3(q2, one, one) + k3(one, q2, one) + k3(one, one, q2)) \
        - 2.0 * (k3(q1, q1, one) + k3(one, q1, q1) + k3(q1, one, q1))
    h = lam * w[np.ix_(keep, keep)] + np.diag(ENERGY_UNIT * sums[keep].astype(float))
    return h, sums[keep]


def full_spectrum(lam: float, cutoff: int, table: OneBodyIntegralTable | None = None) -> FullBasisSpectrum:
    h, _ = full_hamiltonian(lam, cutoff, table)
    return FullBasisSpectrum(cutoff=cutoff, lam=float(lam), eigenvalues=np.linalg.eigvalsh(h))


def separable_harmonic_reference(lam: float, n1: int, n2: int) -> float:
    """Relative-motion energy of the separable harmonic-trap problem.

    Each transverse Jacobi mode sees ``(1 + 3 lam) q^2`` and contributes
    ``sqrt(1 + 3 lam) (2 n + 1)``.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    return 2.0 * math.sqrt(1.0 + 3.0 * lam) * (n1 + n2 + 1)


def scaled_limit(n1: int, n2: int) -> float:
    """Large-coupling limit of ``lam^-1/2 E``: ``2 sqrt(3) (n1 + n2 + 1)``."""
    return 2.0 * math.sqrt(3.0) * (n1 + n2 + 1)


def jacobi_matrix() -> np.ndarray:
    """Rows map ``(x, y, z)`` to the relative coordinates ``q1``, ``q2`` and the centre-of-mass ``q3``."""
    r2, r6, r3 = math.sqrt(2.0), math.sqrt(6.0), math.sqrt(3.0)
    return np.array([
        [1 / r2, -1 / r2, 0.0],
        [1 / r6, 1 / r6, -2 / r6],
        [1 / r3, 1 / r3, 1 / r3],
    ])


def degeneracy_census(cutoff: int) -> dict[int, tuple[int, int]]:
    """Per energy sum: (multiplicity in the full lam=0 spectrum, summed irrep dimensions).

    The second count comes from the parity-pattern table, not from characters.
    """
    result = full_spectrum(0.0, cutoff, table=OneBodyIntegralTable.build(max_mode(cutoff)))
    full = Counter(int(round(e / ENERGY_UNIT)) for e in result.eigenvalues)
    predicted = Counter()
    for m in enumerate_states(cutoff):
        pattern = parity_signature(m.triples[0]).pattern
        predicted[m.energy_sum] += sum(CHARACTER_TABLE[s].dimension for s in PARITY_CLASS_IRREPS[pattern])
    return {e: (full[e], predicted[e]) for e in sorted(set(full) | set(predicted))}
