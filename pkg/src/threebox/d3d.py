"""The D3d group acting on three box coordinates, and symmetry-adapted bases.

The twelve elements are the coordinate permutations, with and without a
global sign flip. The element ``GroupElement(perm, sign)`` maps
``(r0, r1, r2)`` to ``sign * (r[perm[0]], r[perm[1]], r[perm[2]])``.
Functions transform as ``(O_g f)(r) = f(g^-1 r)``; on a product state this
permutes the quantum numbers and multiplies by ``(-1)^(n+1)`` for each mode
when the sign is flipped, because ``phi_n(-q) = (-1)^(n+1) phi_n(q)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .boxbasis import ModeTriple, Multiplet

CLASSES = ("E", "C3", "C2", "i", "S6", "sd")
CLASS_SIZES = (1, 2, 3, 1, 2, 3)
IRREPS = ("A1g", "A2g", "Eg", "A1u", "A2u", "Eu")
ORDER = 12


class SymmetryError(RuntimeError):
    """Two independent symmetry constructions disagree."""


@dataclass(frozen=True)
class Irrep:
    label: str
    dimension: int
    characters: tuple[int, ...]

    @property
    def gerade(self) -> bool:
        return self.label.endswith("g")

    def character(self, cls: str) -> int:
        return self.characters[CLASSES.index(cls)]


CHARACTER_TABLE: dict[str, Irrep] = {
    "A1g": Irrep("A1g", 1, (1, 1, 1, 1, 1, 1)),
    "A2g": Irrep("A2g", 1, (1, 1, -1, 1, 1, -1)),
    "Eg": Irrep("Eg", 2, (2, -1, 0, 2, -1, 0)),
    "A1u": Irrep("A1u", 1, (1, 1, 1, -1, -1, -1)),
    "A2u": Irrep("A2u", 1, (1, 1, -1, -1, -1, 1)),
    "Eu": Irrep("Eu", 2, (2, -1, 0, -2, 1, 0)),
}


@dataclass(frozen=True)
class GroupElement:
    perm: tuple[int, int, int]
    sign: int = 1

    def __post_init__(self):
        if sorted(self.perm) != [0, 1, 2] or self.sign not in (1, -1):
            raise ValueError(f"not a signed permutation: {self.perm}, {self.sign}")

    def apply(self, r):
        return tuple(self.sign * r[p] for p in self.perm)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        # (g @ h)(r) == g(h(r))
        perm = tuple(other.perm[self.perm[i]] for i in range(3))
        return GroupElement(perm, self.sign * other.sign)

    def inverse(self) -> "GroupElement":
        inv = [0, 0, 0]
        for i, p in enumerate(self.perm):
            inv[p] = i
        return GroupElement(tuple(inv), self.sign)

    def matrix(self) -> np.ndarray:
        m = np.zeros((3, 3))
        for i, p in enumerate(self.perm):
            m[i, p] = self.sign
        return m


IDENTITY = GroupElement((0, 1, 2), 1)
INVERSION = GroupElement((0, 1, 2), -1)
ELEMENTS: tuple[GroupElement, ...] = tuple(
    GroupElement(p, s) for s in (1, -1) for p in itertools.permutations(range(3))
)


def _fixed_points(perm) -> int:
    return sum(1 for i, p in enumerate(perm) if i == p)


def class_of(g: GroupElement) -> str:
    """Conjugacy class label.

    A bare transposition has determinant -1 (a mirror plane containing the
    three-fold axis), so it belongs to ``sd``; the sign-flipped transposition
    is a proper two-fold rotation, ``C2``.
    """
    fixed = _fixed_points(g.perm)
    if g.sign == 1:
        return {3: "E", 0: "C3", 1: "sd"}[fixed]
    return {3: "i", 0: "S6", 1: "C2"}[fixed]


def character(label: str, g: GroupElement) -> int:
    return CHARACTER_TABLE[label].character(class_of(g))


def transform_triple(g: GroupElement, t: ModeTriple) -> tuple[float, ModeTriple]:
    """``O_g`` on one product state: returns ``(factor, image)``."""
    image = ModeTriple(*(t[g.perm[j]] for j in range(3)))
    factor = 1.0
    if g.sign == -1:
        factor = float((-1) ** sum(n + 1 for n in t))
    return factor, image


def project_function(g: GroupElement, coefficients) -> dict[ModeTriple, float]:
    """Apply ``O_g`` to a function given as ``{ModeTriple: coefficient}``.

    Accepts a :class:`Salc` or a plain mapping.
    """
    if isinstance(coefficients, Salc):
        coefficients = coefficients.coefficients
    out: dict[ModeTriple, float] = {}
    for t, c in coefficients.items():
        f, image = transform_triple(g, t)
        out[image] = out.get(image, 0.0) + f * c
    return out


def _position_matrix(g: GroupElement) -> np.ndarray:
    # action of the bare permutation on |a at position p>
    m = np.zeros((3, 3))
    inv = g.inverse().perm
    for p in range(3):
        m[inv[p], p] = 1.0
    return m


_E_TEMPLATE = np.array(
    [[2.0 / math.sqrt(6.0), 0.0], [-1.0 / math.sqrt(6.0), 1.0 / math.sqrt(2.0)], [-1.0 / math.sqrt(6.0), -1.0 / math.sqrt(2.0)]]
)


def irrep_matrix(label: str, g: GroupElement) -> np.ndarray:
    """Real orthogonal representation matrix of ``g`` in irrep ``label``.

    Two-dimensional irreps use the partner pair ``(2,-1,-1)/sqrt6, (0,1,-1)/sqrt2``
    over the position of the distinguished mode.
    """
    irrep = CHARACTER_TABLE[label]
    if irrep.dimension == 1:
        return np.array([[float(character(label, g))]])
    parity = 1.0 if irrep.gerade else float(g.sign)
    return parity * (_E_TEMPLATE.T @ _position_matrix(g) @ _E_TEMPLATE)


def permutation_representation(m: Multiplet, g: GroupElement) -> np.ndarray:
    """Matrix of ``O_g`` on the product states of a multiplet."""
    index = {t: i for i, t in enumerate(m.triples)}
    r = np.zeros((len(m), len(m)))
    for j, t in enumerate(m.triples):
        f, image = transform_triple(g, t)
        r[index[image], j] = f
    return r


def decompose_multiplet(m: Multiplet) -> list[str]:
    """Irrep content of a multiplet by character reduction, with repetition."""
    traces = {cls: 0.0 for cls in CLASSES}
    for g in ELEMENTS:
        traces[class_of(g)] = np.trace(permutation_representation(m, g))
    out: list[str] = []
    for label in IRREPS:
        irrep = CHARACTER_TABLE[label]
        count = sum(
            size * irrep.character(cls) * traces[cls] for cls, size in zip(CLASSES, CLASS_SIZES)
        ) / ORDER
        k = int(round(count))
        if abs(count - k) > 1e-9:
            raise SymmetryError(f"non-integer multiplicity {count} of {label} in {m.key}")
        out.extend([label] * k)
    if sum(CHARACTER_TABLE[s].dimension for s in out) != m.orbit_size:
        raise SymmetryError(f"decomposition of {m.key} does not cover the orbit")
    return out


def projector(m: Multiplet, label: str, row: int = 0, col: int = 0) -> np.ndarray:
    """Matrix of ``(d/12) sum_g D_row,col(g) O_g`` on the multiplet's product states."""
    d = CHARACTER_TABLE[label].dimension
    p = np.zeros((len(m), len(m)))
    for g in ELEMENTS:
        p += irrep_matrix(label, g)[row, col] * permutation_representation(m, g)
    return p * d / ORDER


@dataclass(frozen=True)
class Salc:
    """Normalized combination of product states transforming as one irrep row."""

    irrep: str
    row: int
    coefficients: dict[ModeTriple, float] = field(hash=False, compare=False)
    energy_sum: int = 0
    key: tuple[int, int, int] = (0, 0, 0)
    copy: int = 0

    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.coefficients.values()))

    def dot(self, other: "Salc") -> float:
        return sum(c * other.coefficients.get(t, 0.0) for t, c in self.coefficients.items())

    def label(self) -> str:
        k = ",".join(map(str, self.key))
        return f"{self.irrep}[{self.row}]({k})#{self.copy}"


def _symmetric_label(gerade: bool) -> str:
    return "A1g" if gerade else "A2u"


def _antisymmetric_label(gerade: bool) -> str:
    return "A2g" if gerade else "A1u"


def template_vectors(m: Multiplet) -> list[tuple[str, int, np.ndarray]]:
    """Symmetry-adapted combinations written out as explicit coefficient patterns.

    Returns ``(irrep, row, vector)`` over ``m.triples``. For six-member orbits
    the two E pairs are the cyclic and anticyclic arrangements; they span the
    E-type subspace together but are not individually row-adapted.
    """
    gerade = sum(1 for n in m.key if n % 2 == 0) % 2 == 0
    e_label = "Eg" if gerade else "Eu"
    index = {t.as_tuple(): i for i, t in enumerate(m.triples)}
    size = len(m)

    def vec(pairs):
        v = np.zeros(size)
        for t, c in pairs:
            v[index[t]] += c
        return v / np.linalg.norm(v)

    if size == 1:
        return [(_symmetric_label(gerade), 0, np.ones(1))]

    out = [(_symmetric_label(gerade), 0, np.full(size, 1.0 / math.sqrt(size)))]
    if size == 3:
        a, b, c = m.key
        lone, pair = (a, c) if a != b else (c, a)
        at = [tuple(lone if i == p else pair for i in range(3)) for p in range(3)]
        out.append((e_label, 0, vec([(at[0], 2.0), (at[1], -1.0), (at[2], -1.0)])))
        out.append((e_label, 1, vec([(at[1], 1.0), (at[2], -1.0)])))
        return out

    k, mm, n = m.key
    cyc = [(k, mm, n), (n, k, mm), (mm, n, k)]
    anti = [(mm, k, n), (n, mm, k), (k, n, mm)]
    out.append((_antisymmetric_label(gerade), 0, vec([(t, 1.0) for t in cyc] + [(t, -1.0) for t in anti])))
    for orbit in (cyc, anti):
        out.append((e_label, 0, vec([(orbit[0], 2.0), (orbit[1], -1.0), (orbit[2], -1.0)])))
        out.append((e_label, 1, vec([(orbit[1], 1.0), (orbit[2], -1.0)])))
    return out


def _orthonormal_columns(candidates, tol=1e-8) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for v in candidates:
        w = np.array(v, dtype=float)
        for _ in range(2):
            for b in basis:
                w = w - (b @ w) * b
        nrm = np.linalg.norm(w)
        if nrm > tol:
            basis.append(w / nrm)
    return basis


def _span_projector(vectors, size) -> np.ndarray:
    if not vectors:
        return np.zeros((size, size))
    q = np.array(_orthonormal_columns(vectors)).T
    return q @ q.T


def _fix_sign(v: np.ndarray) -> np.ndarray:
    for c in v:
        if abs(c) > 1e-12:
            return v if c > 0 else -v
    return v


def _orbit_shape(m: Multiplet) -> tuple:
    a, b, c = m.key
    gerade = sum(1 for n in m.key if n % 2 == 0) % 2 == 0
    return (a == b, b == c, gerade)


_ADAPTED_CACHE: dict[tuple, list[tuple[str, int, int, np.ndarray]]] = {}


def build_salcs(m: Multiplet) -> list[Salc]:
    """Orthonormal symmetry-adapted basis of one multiplet.

    The explicit coefficient patterns and the projection-operator construction
    are both computed; a :class:`SymmetryError` is raised if the subspaces
    they span differ for any irrep. Partner rows of E irreps are generated
    with the transfer operator so every copy shares the same matrices.

    Coefficient vectors depend only on which quantum numbers coincide and on
    the g/u parity, so they are computed once per orbit shape.
    """
    shape = _orbit_shape(m)
    vectors = _ADAPTED_CACHE.get(shape)
    if vectors is None:
        vectors = _adapted_vectors(m)
        _ADAPTED_CACHE[shape] = vectors
    return [_make_salc(m, label, row, copy, v) for label, row, copy, v in vectors]


def _adapted_vectors(m: Multiplet, tol: float = 1e-12) -> list[tuple[str, int, int, np.ndarray]]:
    content = decompose_multiplet(m)
    templates = template_vectors(m)
    size = len(m)
    out: list[tuple[str, int, int, np.ndarray]] = []

    for label in IRREPS:
        copies = content.count(label)
        tmpl = [(row, v) for lab, row, v in templates if lab == label]
        if len(tmpl) != copies * CHARACTER_TABLE[label].dimension:
            raise SymmetryError(f"pattern count for {label} in {m.key} disagrees with characters")
        if copies == 0:
            continue

        # full isotypic subspace by both routes
        iso = sum(projector(m, label, r, r) for r in range(CHARACTER_TABLE[label].dimension))
        if np.abs(_span_projector([v for _, v in tmpl], size) - iso).max() > 1e-10:
            raise SymmetryError(f"pattern and projection subspaces differ for {label} in {m.key}")

        if CHARACTER_TABLE[label].dimension == 1:
            p = projector(m, label)
            for copy, (_, v) in enumerate(tmpl):
                if np.abs(p @ v - v).max() > tol:
                    raise SymmetryError(f"{label} pattern in {m.key} is not invariant")
                out.append((label, 0, copy, v))
            continue

        p00 = projector(m, label, 0, 0)
        p01 = projector(m, label, 0, 1)
        p10 = projector(m, label, 1, 0)
        candidates = [p00 @ v for row, v in tmpl if row == 0] + [p01 @ v for row, v in tmpl if row == 1]
        rows0 = [_fix_sign(v) for v in _orthonormal_columns(candidates)]
        if len(rows0) != copies:
            raise SymmetryError(f"row space of {label} in {m.key} has wrong dimension")
        for copy, r0 in enumerate(rows0):
            r1 = p10 @ r0
            if abs(np.linalg.norm(r1) - 1.0) > 1e-10:
                raise SymmetryError(f"partner of {label} in {m.key} not normalized")
            out.append((label, 0, copy, r0))
            out.append((label, 1, copy, r1))
    return out


def _make_salc(m: Multiplet, label: str, row: int, copy: int, v: np.ndarray) -> Salc:
    coeffs = {t: float(c) for t, c in zip(m.triples, v) if abs(c) > 1e-15}
    return Salc(irrep=label, row=row, coefficients=coeffs, energy_sum=m.energy_sum, key=m.key, copy=copy)


def salc_basis(multiplets, label: str, row: int = 0) -> list[Salc]:
    """All SALCs of one irrep row across ``multiplets``, in multiplet order."""
    out = []
    for m in multiplets:
        out.extend(s for s in build_salcs(m) if s.irrep == label and s.row == row)
    return out
