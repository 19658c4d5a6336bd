import math

import numpy as np
import pytest

from threebox.boxbasis import ENERGY_UNIT, enumerate_states
from threebox.d3d import IRREPS, build_salcs
from threebox.matelem import OneBodyIntegralTable, assemble_block
from threebox.solver import build_block, eigensolve_block, fix_phases, spectrum_at

PI2 = math.pi**2
LADDER = (14, 27, 50, 75)


def test_lambda_zero_is_the_integer_grid():
    sl = spectrum_at(0.0, 27)
    for s, vals in sl.levels.items():
        sums = np.sort(build_block(27, s).energy_sums)
        assert np.allclose(vals, ENERGY_UNIT * sums, rtol=1e-10, atol=0)
    assert sl.levels["A1g"][0] == pytest.approx(3 * PI2 / 4, rel=1e-14)


def test_one_function_block_is_exact():
    block = assemble_block("A1g", 0, build_salcs(enumerate_states(3)[0]), OneBodyIntegralTable.build(1))
    vals, vecs = eigensolve_block(block, 1.0)
    assert vals[0] == pytest.approx(3 * PI2 / 4 + 2 * (PI2 - 6) / PI2, rel=1e-15)
    assert vecs[0, 0] == 1.0


def test_eu_partner_degeneracy():
    m = enumerate_states(6)[1]
    salcs = build_salcs(m)
    table = OneBodyIntegralTable.build(2)
    rows = [assemble_block("Eu", r, [s for s in salcs if s.irrep == "Eu" and s.row == r], table) for r in (0, 1)]
    e0, e1 = (eigensolve_block(b, 0.0)[0] for b in rows)
    assert e0 == pytest.approx([3 * PI2 / 2]) and e1 == pytest.approx([3 * PI2 / 2])


def test_spectrum_examples():
    sl = spectrum_at(0.0, 14)
    assert min(v.min() for v in sl.levels.values() if v.size) == sl.levels["A1g"][0]
    assert sl.levels["A1u"][0] == pytest.approx(7 * PI2 / 2, rel=1e-14)
    assert sl.levels["A2g"].size == 0
    ground = spectrum_at(1.0, 75).levels["A1g"][0]
    assert 3 * PI2 / 4 < ground < 3 * PI2 / 4 + 2 * (PI2 - 6) / PI2


def test_merged_doubles_e_levels():
    sl = spectrum_at(2.0, 27)
    merged = sl.merged()
    n = sum(len(v) * (2 if s.startswith("E") else 1) for s, v in sl.levels.items())
    assert len(merged) == n
    for s in ("Eg", "Eu"):
        for e in sl.levels[s]:
            assert np.sum(np.isclose(merged, e, rtol=1e-9)) >= 2


@pytest.mark.parametrize("label", IRREPS)
def test_residual_and_orthonormality(label):
    block = build_block(75, label)
    for lam in (0.0, 1.0, 100.0):
        vals, vecs = eigensolve_block(block, lam)
        assert (np.diff(vals) >= 0).all()
        assert np.abs(vecs.T @ vecs - np.eye(block.size)).max() < 1e-10
        scale = np.abs(block.h0).max() + lam * np.linalg.norm(block.w, 2)
        resid = np.linalg.norm(block.matrix(lam) @ vecs - vecs * vals, axis=0)
        assert resid.max() <= 1e-9 * scale


def test_phase_convention():
    vecs = fix_phases(np.array([[0.0, -0.6], [-1.0, 0.8]]))
    assert np.array_equal(vecs, np.array([[0.0, 0.6], [1.0, -0.8]]))
    _, v = eigensolve_block(build_block(27, "Eg"), 3.0)
    first = v[np.argmax(np.abs(v) > 1e-12, axis=0), np.arange(v.shape[1])]
    assert (first > 0).all()


@pytest.mark.parametrize("label", IRREPS)
def test_variational_ladder(label):
    for lam in (0.5, 20.0):
        prev = None
        for cutoff in LADDER:
            vals = eigensolve_block(build_block(cutoff, label), lam)[0]
            if prev is not None:
                k = len(prev)
                assert (vals[:k] <= prev + 1e-9 * np.abs(prev)).all()
            prev = vals


def test_monotone_in_lambda():
    lams = np.geomspace(1e-3, 1e3, 25)
    for label in IRREPS:
        block = build_block(50, label)
        e = np.array([eigensolve_block(block, lam)[0] for lam in lams])
        assert (np.diff(e, axis=0) >= -1e-9).all()


def test_bad_inputs():
    with pytest.raises(ValueError):
        spectrum_at(-1.0, 14)
    with pytest.raises(ValueError):
        build_block(2, "A1g")
    with pytest.raises(ValueError):
        build_block(14, "T2g")
