import itertools
import math

import numpy as np
import pytest

from threebox.boxbasis import PARITY_CLASS_IRREPS, ModeTriple, Multiplet, enumerate_states, parity_signature
from threebox.d3d import (
    CHARACTER_TABLE, CLASS_SIZES, CLASSES, ELEMENTS, IDENTITY, INVERSION, IRREPS, GroupElement,
    SymmetryError, build_salcs, character, class_of, decompose_multiplet, irrep_matrix,
    permutation_representation, project_function, template_vectors,
)

R2, R3, R6 = math.sqrt(2), math.sqrt(3), math.sqrt(6)


def coeffs(salc):
    return {t.as_tuple(): c for t, c in salc.coefficients.items()}


def test_group_closure_and_identity():
    assert len(set(ELEMENTS)) == 12
    for g, h in itertools.product(ELEMENTS, repeat=2):
        assert g @ h in ELEMENTS
        r = (0.3, -1.7, 2.9)
        assert (g @ h).apply(r) == g.apply(h.apply(r))
    for g in ELEMENTS:
        assert g @ IDENTITY == g == IDENTITY @ g
        assert g @ g.inverse() == IDENTITY


def test_associativity():
    for g, h, k in itertools.product(ELEMENTS, repeat=3):
        assert (g @ h) @ k == g @ (h @ k)


def test_parent_group_closure():
    # the 48 signed permutations with independent signs form Oh; D3d sits inside it
    oh = [np.diag(s) @ p for s in itertools.product((1, -1), repeat=3)
          for p in (np.eye(3)[list(q)] for q in itertools.permutations(range(3)))]
    keys = {m.tobytes() for m in oh}
    assert len(keys) == 48
    for a, b in itertools.product(oh, repeat=2):
        assert (a @ b).tobytes() in keys
    assert all(g.matrix().tobytes() in keys for g in ELEMENTS)


def test_class_examples():
    assert class_of(IDENTITY) == "E"
    assert class_of(INVERSION) == "i"
    # a bare swap is a mirror (det -1); with the sign flip it is a proper C2
    swap = GroupElement((1, 0, 2), 1)
    assert swap.apply((1.0, 2.0, 3.0)) == (2.0, 1.0, 3.0)
    assert class_of(swap) == "sd"
    assert class_of(GroupElement((1, 0, 2), -1)) == "C2"
    assert class_of(GroupElement((1, 2, 0), 1)) == "C3"
    assert class_of(GroupElement((1, 2, 0), -1)) == "S6"


def test_class_sizes_and_determinants():
    counts = {c: 0 for c in CLASSES}
    for g in ELEMENTS:
        counts[class_of(g)] += 1
        proper = class_of(g) in ("E", "C3", "C2")
        assert round(np.linalg.det(g.matrix())) == (1 if proper else -1)
    assert tuple(counts[c] for c in CLASSES) == CLASS_SIZES


def test_classes_are_conjugacy_classes():
    for g in ELEMENTS:
        conj = {h @ g @ h.inverse() for h in ELEMENTS}
        assert {class_of(x) for x in conj} == {class_of(g)}
        assert len(conj) == CLASS_SIZES[CLASSES.index(class_of(g))]


def test_character_orthogonality():
    for a, b in itertools.product(IRREPS, repeat=2):
        total = sum(character(a, g) * character(b, g) for g in ELEMENTS)
        assert total == (12 if a == b else 0)


def test_table_basis_functions():
    # x+y+z spans A2u; (2z-x-y, x-y) spans Eu
    for g in ELEMENTS:
        m = g.matrix()
        s = np.ones(3)
        # O_g f(r) = f(g^-1 r) for a linear f(r) = c.r is c -> c @ inv(m)
        assert np.allclose(s @ np.linalg.inv(m), character("A2u", g) * s)
        e = np.array([[-1, -1, 2], [1, -1, 0]], dtype=float)
        img = e @ np.linalg.inv(m)
        d = np.linalg.lstsq(e.T, img.T, rcond=None)[0]
        assert np.trace(d) == pytest.approx(character("Eu", g), abs=1e-12)


@pytest.mark.parametrize("label", IRREPS)
def test_irrep_matrices_are_a_representation(label):
    for g, h in itertools.product(ELEMENTS, repeat=2):
        assert np.allclose(irrep_matrix(label, g @ h), irrep_matrix(label, g) @ irrep_matrix(label, h), atol=1e-14)
    for g in ELEMENTS:
        d = irrep_matrix(label, g)
        assert np.allclose(d @ d.T, np.eye(len(d)), atol=1e-14)
        assert np.trace(d) == pytest.approx(character(label, g), abs=1e-14)


def test_action_is_homomorphism():
    m = Multiplet.from_triple((4, 3, 1))
    for g, h in itertools.product(ELEMENTS, repeat=2):
        assert np.array_equal(permutation_representation(m, g @ h),
                              permutation_representation(m, g) @ permutation_representation(m, h))


@pytest.mark.parametrize("key, expected", [
    ((1, 1, 1), ["A1g"]),
    ((2, 1, 1), ["A2u", "Eu"]),
    ((3, 2, 1), ["A1u", "A2u", "Eu", "Eu"]),
])
def test_decompose_examples(key, expected):
    assert sorted(decompose_multiplet(Multiplet.from_triple(key))) == sorted(expected)


def test_decomposition_matches_parity_table():
    for m in enumerate_states(300):
        got = sorted(decompose_multiplet(m))
        want = sorted(PARITY_CLASS_IRREPS[parity_signature(m.triples[0]).pattern])
        assert got == want, m.key
        assert sum(CHARACTER_TABLE[s].dimension for s in got) == m.orbit_size


def test_project_function_examples():
    s = build_salcs(Multiplet.from_triple((2, 1, 1)))[0]
    assert project_function(IDENTITY, s) == s.coefficients
    assert project_function(INVERSION, {ModeTriple(1, 1, 1): 1.0}) == {ModeTriple(1, 1, 1): 1.0}
    assert project_function(INVERSION, {ModeTriple(2, 1, 1): 1.0}) == {ModeTriple(2, 1, 1): -1.0}
    swap = GroupElement((1, 0, 2), 1)
    assert project_function(swap, {ModeTriple(3, 2, 1): 1.0}) == {ModeTriple(2, 3, 1): 1.0}


def test_salc_examples():
    (only,) = build_salcs(Multiplet.from_triple((1, 1, 1)))
    assert (only.irrep, only.row) == ("A1g", 0)
    assert coeffs(only) == {(1, 1, 1): 1.0}

    salcs = {(s.irrep, s.row): coeffs(s) for s in build_salcs(Multiplet.from_triple((2, 1, 1)))}
    a2u = salcs[("A2u", 0)]
    assert a2u == pytest.approx({(2, 1, 1): 1 / R3, (1, 2, 1): 1 / R3, (1, 1, 2): 1 / R3}, abs=1e-15)
    assert salcs[("Eu", 0)] == pytest.approx({(2, 1, 1): 2 / R6, (1, 2, 1): -1 / R6, (1, 1, 2): -1 / R6}, abs=1e-15)
    assert salcs[("Eu", 1)] == pytest.approx({(1, 2, 1): 1 / R2, (1, 1, 2): -1 / R2}, abs=1e-15)


def test_six_member_patterns():
    m = Multiplet.from_triple((3, 2, 1))
    tmpl = template_vectors(m)
    labels = sorted(lab for lab, _, _ in tmpl)
    assert labels == ["A1u", "A2u", "Eu", "Eu", "Eu", "Eu"]
    sym = [v for lab, _, v in tmpl if lab == "A2u"][0]
    assert np.allclose(sym, 1 / R6)
    anti = {m.triples[i].as_tuple(): c for i, c in enumerate([v for lab, _, v in tmpl if lab == "A1u"][0])}
    for t in [(3, 2, 1), (1, 3, 2), (2, 1, 3)]:
        assert anti[t] == pytest.approx(1 / R6)
    for t in [(2, 3, 1), (1, 2, 3), (3, 1, 2)]:
        assert anti[t] == pytest.approx(-1 / R6)


def _check_salcs(m):
    salcs = build_salcs(m)
    assert len(salcs) == m.orbit_size
    v = np.array([[s.coefficients.get(t, 0.0) for t in m.triples] for s in salcs])
    # orthonormal and complete on the orbit
    assert np.abs(v @ v.T - np.eye(len(salcs))).max() < 1e-14
    assert np.abs(v.T @ v - np.eye(len(salcs))).max() < 1e-14
    for s in salcs:
        assert s.norm() == pytest.approx(1.0, abs=1e-14)
    for g in ELEMENTS:
        rep = permutation_representation(m, g)
        for s in salcs:
            x = np.array([s.coefficients.get(t, 0.0) for t in m.triples])
            if CHARACTER_TABLE[s.irrep].dimension == 1:
                assert np.abs(rep @ x - character(s.irrep, g) * x).max() < 1e-14
        for label in ("Eg", "Eu"):
            for copy in {s.copy for s in salcs if s.irrep == label}:
                pair = [s for s in salcs if s.irrep == label and s.copy == copy]
                pair.sort(key=lambda s: s.row)
                basis = np.array([[s.coefficients.get(t, 0.0) for t in m.triples] for s in pair])
                induced = basis @ rep @ basis.T
                assert np.abs(induced @ induced.T - np.eye(2)).max() < 1e-12
                assert np.trace(induced) == pytest.approx(character(label, g), abs=1e-12)
                # every copy carries exactly the same partner matrices
                assert np.abs(induced - irrep_matrix(label, g)).max() < 1e-12


@pytest.mark.parametrize("key", [(1, 1, 1), (2, 2, 2), (2, 1, 1), (3, 1, 1), (2, 2, 1), (3, 3, 2),
                                 (3, 2, 1), (5, 3, 1), (4, 2, 1), (6, 4, 2), (4, 3, 2)])
def test_salc_invariants(key):
    _check_salcs(Multiplet.from_triple(key))


def test_salcs_across_multiplets_are_orthonormal(salcs27):
    g = np.array([[a.dot(b) for b in salcs27] for a in salcs27])
    assert np.abs(g - np.eye(len(salcs27))).max() < 1e-14


def test_mismatched_construction_is_detected(monkeypatch):
    import threebox.d3d as d3d

    def broken(label, g):
        # C2 and sd swapped: the symmetric u pattern then projects as A1u
        if label in ("A1u", "A2u") and class_of(g) in ("C2", "sd"):
            return np.array([[-float(character(label, g))]])
        return original(label, g)

    original = d3d.irrep_matrix
    monkeypatch.setattr(d3d, "irrep_matrix", broken)
    monkeypatch.setattr(d3d, "_ADAPTED_CACHE", {})
    with pytest.raises(SymmetryError):
        d3d.build_salcs(Multiplet.from_triple((2, 1, 1)))
