import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scissorkin.constraint_dof import (
    assemble_constraints, dof, loop_basis, loop_closure_residual, numeric_dof_oracle, nullity,
)
from scissorkin.errors import DisconnectedGraphError, OracleError
from scissorkin.kinematics import solve_rates
from scissorkin.mech_model import _static, open_chain, positions_array, rigid_triangle, two_dyads

DEG = math.pi / 180


def loop_link_balance(model, loop):
    """Each joint moves link b relative to link a; around a cycle every link is entered and left once."""
    bal = {}
    for jid, s in loop.signed():
        a, b = model.joint(jid).links
        bal[b] = bal.get(b, 0) + s
        bal[a] = bal.get(a, 0) - s
    return bal


def test_reference_unit_has_eight_loops(unit):
    assert len(loop_basis(unit)) == 8


def test_loops_are_closed_cycles(unit, fourbar):
    for model in (unit, fourbar):
        for loop in loop_basis(model).loops:
            assert all(v == 0 for v in loop_link_balance(model, loop).values())


def test_loop_count_is_cyclomatic_number(unit):
    # independent cycles of a connected graph: edges - vertices + 1
    assert len(loop_basis(unit)) == len(unit.joints) - len(unit.links) + 1


def test_open_chain_has_no_loops():
    assert len(loop_basis(open_chain())) == 0
    assert dof(open_chain(), 1.0) == 2
    assert numeric_dof_oracle(open_chain(), 1.0) == 2


def test_four_bar_single_loop_of_four_joints(fourbar):
    basis = loop_basis(fourbar)
    assert len(basis) == 1
    assert sorted(basis.loops[0].joints) == ["J1", "J2", "J3", "J4"]


def test_four_bar_constraint_matrix(fourbar):
    cm = assemble_constraints(fourbar, 50 * DEG)
    assert cm.shape == (6, 4)
    assert np.linalg.matrix_rank(cm.matrix) == 3
    assert dof(fourbar, 50 * DEG) == 1
    assert numeric_dof_oracle(fourbar, 50 * DEG) == 1


def test_reference_unit_matrix_at_midstroke(unit):
    cm = assemble_constraints(unit, 46.27 * DEG)
    assert cm.shape == (48, 21)
    assert nullity(cm.matrix)[0] == 1
    assert not cm.degenerate
    assert cm.smallest_nonzero_singular_value() > 1e-3


@pytest.mark.parametrize("theta_deg", np.linspace(12.54, 80, 9))
def test_reference_unit_is_single_dof(unit, theta_deg):
    assert dof(unit, theta_deg * DEG) == 1
    assert numeric_dof_oracle(unit, theta_deg * DEG) == 1


def test_reference_unit_is_overconstrained(unit):
    # planar mobility count 3(n - 1) - 2j undercounts: the scissor lattice carries redundant rods
    n, j = len(unit.links), len(unit.joints)
    assert 3 * (n - 1) - 2 * j == -3
    assert dof(unit, 1.0) == 1


def test_rigid_triangle_has_no_mobility():
    assert dof(rigid_triangle(), 1.0) == 0
    assert numeric_dof_oracle(rigid_triangle(), 1.0) == 0


def test_flat_triangle_is_flagged_degenerate():
    m = _static({"A": (0, 0, 0), "B": (2, 0, 0), "C": (1, 0, 1e-8)},
                [("AB", "A", "B"), ("BC", "B", "C"), ("CA", "C", "A")],
                [("J1", "A", "AB", "CA"), ("J2", "B", "AB", "BC"), ("J3", "C", "BC", "CA")],
                ground="A", base="AB", drive="J2")
    assert assemble_constraints(m, 1.0).degenerate


def test_disconnected_graph_names_components():
    with pytest.raises(DisconnectedGraphError) as err:
        loop_basis(two_dyads())
    comps = err.value.components
    assert sorted(map(tuple, comps)) == [("ab", "bc"), ("de", "ef")]
    assert "ab" in str(err.value) and "de" in str(err.value)


def test_oracle_rejects_underflowing_step(unit):
    with pytest.raises(OracleError):
        numeric_dof_oracle(unit, 1.0, h=1e-300)


def test_closure_residual_vanishes_at_zero_motion(unit):
    basis = loop_basis(unit)
    pos = positions_array(unit, 1.0)
    assert np.max(np.abs(loop_closure_residual(unit, basis, pos, np.zeros(len(unit.joints))))) == 0.0


def test_rates_satisfy_constraints(unit, fourbar):
    for model in (unit, fourbar):
        for th in (0.4, 0.9, 1.3):
            w = solve_rates(model, th, 0.7)
            cm = assemble_constraints(model, th)
            resid = cm.matrix @ np.array([w[j] for j in cm.joint_ids])
            assert np.max(np.abs(resid)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.randoms(use_true_random=False), st.floats(12.54, 80))
def test_dof_independent_of_ordering(unit, rnd, theta_deg):
    joints = list(unit.joint_ids)
    links = [l.id for l in unit.links]
    rnd.shuffle(joints)
    rnd.shuffle(links)
    shuffled = unit.reordered(joints, links)
    assert dof(shuffled, theta_deg * DEG) == 1
    assert len(loop_basis(shuffled)) == 8


@pytest.mark.parametrize("k", [1e-3, 0.5, 40.0])
def test_dof_independent_of_scale(unit, k):
    assert dof(unit.scaled(k), 0.8) == 1
    assert numeric_dof_oracle(unit.scaled(k), 0.8) == 1


def test_dof_independent_of_base_choice(unit):
    from dataclasses import replace
    moved = replace(unit, base_link="L1", ground="C")
    assert len(loop_basis(moved)) == 8
    assert dof(moved, 0.9) == 1
