import numpy as np
import pytest

from locpilot.pilots import (AssignmentError, PilotAssignment, build_pilot_matrix, group_sizes,
                             require_valid, validate)


def test_json_is_one_based_roundtrip():
    a = PilotAssignment(2, ((0, 3), (1, 2)))
    assert a.to_dict() == {"tau": 2, "groups": [[1, 4], [2, 3]]}
    assert PilotAssignment.from_json(a.to_json()) == a


def test_user_to_pilot_and_array():
    a = PilotAssignment(3, ((2,), (0, 4), (1, 3)))
    assert a.user_to_pilot == {2: 0, 0: 1, 4: 1, 1: 2, 3: 2}
    np.testing.assert_array_equal(a.pilot_array(5), [1, 2, 0, 2, 1])
    assert PilotAssignment.from_user_to_pilot([1, 2, 0, 2, 1], 3).canonical() == a.canonical()


@pytest.mark.parametrize("groups,needle", [
    (((0, 1), (1, 2)), "pilot groups 1 and 2"),
    (((0,), (1,)), "user 3 is not assigned"),
    (((0, 5), (1, 2)), "does not exist"),
    (((0, 0), (1, 2)), "twice"),
])
def test_validate_reports_each_violation(groups, needle):
    problems = validate(PilotAssignment(2, groups), 3)
    assert any(needle in p for p in problems)
    with pytest.raises(AssignmentError):
        require_valid(PilotAssignment(2, groups), 3)


def test_tau_larger_than_n_is_invalid():
    assert any("exceeds" in p for p in validate(PilotAssignment(3, ((0,), (1,), ())), 2))


@pytest.mark.parametrize("bad", [{"groups": [[1]]}, {"tau": 1}, {"tau": 1, "groups": [[0]]},
                                 {"tau": 1, "groups": [["a"]]}])
def test_from_dict_rejects(bad):
    with pytest.raises(AssignmentError):
        PilotAssignment.from_dict(bad)


def test_correlation_matrix_is_same_pilot_indicator():
    a = PilotAssignment(2, ((0, 2), (1, 3)))
    r = build_pilot_matrix(a, 4).correlation
    expected = np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1]], float)
    np.testing.assert_array_equal(r, expected)


def test_orthogonal_basis_keeps_correlation(rng):
    a = PilotAssignment(3, ((0, 4), (1,), (2, 3)))
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    r0 = build_pilot_matrix(a, 5).correlation
    np.testing.assert_allclose(build_pilot_matrix(a, 5, basis=q).correlation, r0, atol=1e-14)
    with pytest.raises(ValueError):
        build_pilot_matrix(a, 5, basis=2 * q)


def test_orthogonal_assignment_gives_identity():
    np.testing.assert_array_equal(build_pilot_matrix(PilotAssignment.orthogonal(4), 4).correlation,
                                  np.eye(4))


@pytest.mark.parametrize("n,tau,sizes", [(20, 10, [2] * 10), (7, 3, [3, 2, 2]), (5, 5, [1] * 5)])
def test_group_sizes(n, tau, sizes):
    assert group_sizes(n, tau) == sizes


def test_t_matrix_rows_pad_short_columns():
    a = PilotAssignment(2, ((0, 2, 4), (1, 3)))
    assert a.t_matrix_rows() == [["1", "2"], ["3", "4"], ["5", ""]]


def test_partition_key_ignores_labels():
    assert PilotAssignment(2, ((0, 1), (2,))).partition_key() == PilotAssignment(2, ((2,), (1, 0))).partition_key()
