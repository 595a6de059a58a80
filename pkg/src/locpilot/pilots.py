"""Pilot assignments as partitions of the users, and the pilot matrix they induce.

User indices are 0-based in memory and 1-based in the JSON form
``{"tau": int, "groups": [[user, ...], ...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class AssignmentError(ValueError):
    """Raised when an assignment is not a disjoint cover of the users."""


@dataclass(frozen=True)
class PilotAssignment:
    tau: int
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(u) for u in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if int(self.tau) != self.tau or self.tau < 1:
            raise AssignmentError(f"tau must be a positive integer, got {self.tau!r}")
        object.__setattr__(self, "tau", int(self.tau))
        if len(groups) != self.tau:
            raise AssignmentError(f"expected {self.tau} groups, got {len(groups)}")
        if any(u < 0 for g in groups for u in g):
            raise AssignmentError("user indices must be non-negative")

    @property
    def n_users(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def user_to_pilot(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p, g in enumerate(self.groups):
            for u in g:
                if u in out:
                    raise AssignmentError(f"user {u + 1} is assigned to more than one pilot")
                out[u] = p
        return out

    def pilot_array(self, n_users: int | None = None) -> np.ndarray:
        """Pilot index per user as an int array (requires a valid cover)."""
        n = self.n_users if n_users is None else n_users
        require_valid(self, n)
        arr = np.empty(n, dtype=np.intp)
        for p, g in enumerate(self.groups):
            arr[list(g)] = p
        return arr

    @classmethod
    def from_user_to_pilot(cls, pilots: Sequence[int], tau: int) -> "PilotAssignment":
        groups: list[list[int]] = [[] for _ in range(tau)]
        for u, p in enumerate(pilots):
            if not 0 <= p < tau:
                raise AssignmentError(f"user {u + 1} has pilot {p + 1} outside 1..{tau}")
            groups[int(p)].append(u)
        return cls(tau, tuple(tuple(g) for g in groups))

    @classmethod
    def orthogonal(cls, n_users: int) -> "PilotAssignment":
        return cls(n_users, tuple((u,) for u in range(n_users)))

    def canonical(self) -> "PilotAssignment":
        """Same partition with members sorted inside each group."""
        return PilotAssignment(self.tau, tuple(tuple(sorted(g)) for g in self.groups))

    def partition_key(self) -> frozenset:
        """Label-free identity of the partition (pilot indices ignored)."""
        return frozenset(frozenset(g) for g in self.groups if g)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "groups": [[u + 1 for u in g] for g in self.groups]}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PilotAssignment":
        if not isinstance(data, dict):
            raise AssignmentError("assignment must be a JSON object")
        for key in ("tau", "groups"):
            if key not in data:
                raise AssignmentError(f"assignment: missing field '{key}'")
        try:
            groups = tuple(tuple(int(u) - 1 for u in g) for g in data["groups"])
        except (TypeError, ValueError):
            raise AssignmentError("assignment: 'groups' must be a list of integer lists") from None
        if any(u < 0 for g in groups for u in g):
            raise AssignmentError("assignment: user indices are 1-based")
        return cls(int(data["tau"]), groups)

    @classmethod
    def from_json(cls, text: str) -> "PilotAssignment":
        return cls.from_dict(json.loads(text))

    def t_matrix_rows(self) -> list[list[str]]:
        """Rows of the T matrix: column p lists the (1-based) users of pilot p.

        Shorter columns are padded with empty cells.
        """
        height = max((len(g) for g in self.groups), default=0)
        rows = []
        for k in range(height):
            rows.append([str(g[k] + 1) if k < len(g) else "" for g in self.groups])
        return rows


def validate(assignment: PilotAssignment, n_users: int) -> list[str]:
    """List every coverage or disjointness problem; empty means valid."""
    violations = []
    seen: dict[int, int] = {}
    for p, g in enumerate(assignment.groups):
        for u in g:
            if u >= n_users:
                violations.append(f"user {u + 1} in pilot group {p + 1} does not exist (N={n_users})")
            elif u in seen:
                if seen[u] == p:
                    violations.append(f"user {u + 1} appears twice in pilot group {p + 1}")
                else:
                    violations.append(
                        f"user {u + 1} is assigned to pilot groups {seen[u] + 1} and {p + 1}")
            else:
                seen[u] = p
    for u in range(n_users):
        if u not in seen:
            violations.append(f"user {u + 1} is not assigned to any pilot group")
    if assignment.tau > n_users:
        violations.append(f"tau={assignment.tau} exceeds the number of users N={n_users}")
    return violations


def require_valid(assignment: PilotAssignment, n_users: int) -> None:
    problems = validate(assignment, n_users)
    if problems:
        raise AssignmentError("; ".join(problems))


@dataclass(frozen=True)
class PilotMatrix:
    phi: np.ndarray

    @property
    def tau(self) -> int:
        return self.phi.shape[0]

    @property
    def correlation(self) -> np.ndarray:
        """``R = Phi^T Phi`` (N x N)."""
        return self.phi.T @ self.phi


def build_pilot_matrix(assignment: PilotAssignment, n_users: int,
                       basis: np.ndarray | None = None) -> PilotMatrix:
    """Column n of ``phi`` is the pilot sequence of user n.

    Sequences are the canonical basis of R^tau unless ``basis`` (a real
    orthogonal tau x tau matrix whose columns are the sequences) is given;
    any such basis leaves the correlation matrix unchanged.
    """
    require_valid(assignment, n_users)
    tau = assignment.tau
    pilots = assignment.pilot_array(n_users)
    phi = np.zeros((tau, n_users))
    phi[pilots, np.arange(n_users)] = 1.0
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        if basis.shape != (tau, tau):
            raise ValueError(f"basis must be {tau}x{tau}")
        if not np.allclose(basis.T @ basis, np.eye(tau), atol=1e-12):
            raise ValueError("basis must be orthogonal")
        phi = basis @ phi
    return PilotMatrix(phi)


def group_sizes(n_users: int, tau: int) -> list[int]:
    """Balanced sizes: the first ``n_users % tau`` groups get one extra user."""
    base, extra = divmod(n_users, tau)
    return [base + 1 if p < extra else base for p in range(tau)]

