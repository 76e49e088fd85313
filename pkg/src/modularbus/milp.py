"""Solver-agnostic mixed-integer linear model: typed variables, rows, objective.

Variable names are structured (``family[index,...]``) and form the decode
contract: downstream code recovers a design purely from names and values, so
any backend that returns a value per variable works. Models are built
single-writer and can be frozen, after which mutation raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"
_KINDS = (BINARY, INTEGER, CONTINUOUS)
_SENSES = ("<=", "=", ">=")

INF = math.inf


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    kind: str
    lo: float
    hi: float


@dataclass(frozen=True)
class LinearConstraint:
    id: int
    name: str
    terms: tuple[tuple[int, float], ...]  # (variable id, coefficient), canonical
    sense: str
    rhs: float


def _canonical_terms(terms) -> tuple[tuple[int, float], ...]:
    """Merge duplicate variable ids, drop exact-zero coefficients, sort by id."""
    acc: dict[int, float] = {}
    for vid, coef in terms:
        coef = float(coef)
        if not math.isfinite(coef):
            raise ModelError(f"non-finite coefficient {coef} on variable {vid}")
        acc[vid] = acc.get(vid, 0.0) + coef
    return tuple(sorted((vid, c) for vid, c in acc.items() if c != 0.0))


class MilpModel:
    """A minimization MILP with named variables and canonicalized rows."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective_terms: tuple[tuple[int, float], ...] = ()
        self.objective_constant: float = 0.0
        self.metadata: dict = {}
        # solver hint, lower class branches first; not part of any export
        self.branch_priority: dict[int, int] = {}
        self._by_name: dict[str, int] = {}
        self._frozen = False

    # -- construction --------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise ModelError("model is frozen")

    def add_variable(
        self, name: str, kind: str = CONTINUOUS, lo: float = 0.0, hi: float = INF, priority: int = 0
    ) -> int:
        self._check_mutable()
        if kind not in _KINDS:
            raise ModelError(f"unknown variable kind {kind!r}")
        if name in self._by_name:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind == BINARY:
            lo, hi = 0.0, 1.0
        if lo > hi:
            raise ModelError(f"inverted bounds [{lo}, {hi}] on {name!r}")
        vid = len(self.variables)
        self.variables.append(Variable(id=vid, name=name, kind=kind, lo=float(lo), hi=float(hi)))
        if priority:
            self.branch_priority[vid] = priority
        self._by_name[name] = vid
        return vid

    def add_constraint(self, name: str, terms, sense: str, rhs: float) -> int:
        self._check_mutable()
        if sense not in _SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        canon = _canonical_terms(terms)
        for vid, _ in canon:
            if not (0 <= vid < len(self.variables)):
                raise ModelError(f"constraint {name!r} references unknown variable id {vid}")
        cid = len(self.constraints)
        self.constraints.append(LinearConstraint(id=cid, name=name, terms=canon, sense=sense, rhs=float(rhs)))
        return cid

    def set_objective(self, terms, constant: float = 0.0):
        self._check_mutable()
        canon = _canonical_terms(terms)
        for vid, _ in canon:
            if not (0 <= vid < len(self.variables)):
                raise ModelError(f"objective references unknown variable id {vid}")
        self.objective_terms = canon
        self.objective_constant = float(constant)

    def freeze(self):
        self._frozen = True
        return self

    # -- lookups ---------------------------------------------------------

    def var_id(self, name: str) -> int:
        return self._by_name[name]

    def var(self, name: str) -> Variable:
        return self.variables[self._by_name[name]]

    def has_var(self, name: str) -> bool:
        return name in self._by_name

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    # -- numeric views -----------------------------------------------------

    def objective_vector(self) -> tuple[np.ndarray, float]:
        c = np.zeros(len(self.variables))
        for vid, coef in self.objective_terms:
            c[vid] = coef
        return c, self.objective_constant

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([v.lo for v in self.variables])
        hi = np.array([v.hi for v in self.variables])
        return lo, hi

    def integrality_mask(self) -> np.ndarray:
        return np.array([v.kind in (BINARY, INTEGER) for v in self.variables])

    def rows_sparse(self, extra_rows=()):
        """All rows (plus any extra (terms, sense, rhs) triples) as a CSR matrix.

        Returns (A, senses, rhs) where senses is an array of '<=', '=', '>='.
        """
        from scipy.sparse import csr_matrix

        data, indices, indptr = [], [], [0]
        senses, rhs = [], []
        for con in self.constraints:
            for vid, coef in con.terms:
                indices.append(vid)
                data.append(coef)
            indptr.append(len(indices))
            senses.append(con.sense)
            rhs.append(con.rhs)
        for terms, sense, r in extra_rows:
            for vid, coef in _canonical_terms(terms):
                indices.append(vid)
                data.append(coef)
            indptr.append(len(indices))
            senses.append(sense)
            rhs.append(r)
        a = csr_matrix(
            (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(len(senses), len(self.variables)),
        )
        return a, np.array(senses), np.array(rhs)


def parse_var_name(name: str) -> tuple[str, tuple]:
    """Split ``family[i,j,...]`` into (family, index tuple); ints where numeric."""
    if "[" not in name:
        return name, ()
    family, _, rest = name.partition("[")
    body = rest.rstrip("]")
    idx = tuple(int(tok) if tok.lstrip("-").isdigit() else tok for tok in body.split(","))
    return family, idx


def format_var_name(family: str, idx) -> str:
    return f"{family}[{','.join(str(i) for i in idx)}]"
