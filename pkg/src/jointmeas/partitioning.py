"""Two-outcome coarse-grainings of finite-outcome observables.

A subset X of outcomes turns an observable A into the simple observable
with effects A(X) and A(not X).  Joint measurability survives this
coarse-graining, and the compatibility matrix below checks the converse
direction pair by pair; it can fail globally even when every pair of
partitionings is compatible, which is the paradox the audit detects.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import three_orthogonal_criterion
from .feasibility import (
    REASON_TRIPLE,
    FeasibilityOptions,
    FeasibilityProblem,
    FeasibilityReport,
    Verdict,
    decide,
)
from .observables import Observable, ProductObservable, label_key, marginal, subset_key
from .operators import HermitianOperator, opnorm, zero

ENUMERATION_GUARD = 20  # 2^|outcomes| subsets; refuse beyond this


def _subset_sum(parent, labels) -> HermitianOperator:
    total = zero(parent.dim)
    for x in parent.outcomes:
        if x in labels:
            total = total + parent.effects[x]
    return total


@dataclass(frozen=True, eq=False)
class Partitioning:
    parent: Observable
    subset: frozenset

    def __post_init__(self):
        object.__setattr__(self, "subset", frozenset(self.subset))
        unknown = [x for x in self.subset if x not in self.parent.outcomes]
        if unknown:
            keys = ", ".join(sorted(label_key(x) for x in unknown))
            raise ValueError(f"labels not in the parent observable: {keys}")

    @property
    def type(self) -> int:
        return len(self.subset)

    @property
    def key(self) -> str:
        return subset_key(self.subset)

    @property
    def is_trivial(self) -> bool:
        return self.type in (0, len(self.parent.outcomes))

    @property
    def observable(self) -> Observable:
        one = _subset_sum(self.parent, self.subset)
        rest = frozenset(self.parent.outcomes) - self.subset
        return Observable(("0", "1"), {"1": one, "0": _subset_sum(self.parent, rest)})

    def __iter__(self):
        # unpacks as (subset, observable)
        yield self.subset
        yield self.observable


def partition(a: Observable, x) -> Observable:
    """The two-outcome observable with effects A(X) and A(not X)."""
    return Partitioning(a, frozenset(x)).observable


def enumerate_partitionings(a: Observable) -> list:
    """All 2^|outcomes| partitionings, ordered by type then subset key."""
    n = len(a.outcomes)
    if n > ENUMERATION_GUARD:
        raise ValueError(f"{n} outcomes exceed the enumeration guard of {ENUMERATION_GUARD}")
    parts = []
    for mask in range(1 << n):
        subset = frozenset(x for i, x in enumerate(a.outcomes) if mask >> i & 1)
        parts.append(Partitioning(a, subset))
    parts.sort(key=lambda p: (p.type, p.key))
    return parts


def forward_partition_joint(g: ProductObservable, x, y) -> ProductObservable:
    """Coarse-grain a two-parent joint observable cellwise.

    The (i, j) effect sums G over {in X} x {in Y} and its complements, so the
    result is automatically a joint observable of the two partitionings.
    """
    if len(g.parents) != 2:
        raise ValueError("expected a joint observable of two parents")
    ax, ay = g.parents
    x, y = frozenset(x), frozenset(y)
    for labels, axis in ((x, ax), (y, ay)):
        unknown = [lab for lab in labels if lab not in axis]
        if unknown:
            keys = ", ".join(sorted(label_key(lab) for lab in unknown))
            raise ValueError(f"labels not on the joint observable axis: {keys}")
    cells = {}
    for i in ("0", "1"):
        for j in ("0", "1"):
            total = zero(g.dim)
            for xx in ax:
                if (xx in x) != (i == "1"):
                    continue
                for yy in ay:
                    if (yy in y) == (j == "1"):
                        total = total + g.effects[(xx, yy)]
            cells[(i, j)] = total
    return ProductObservable((("0", "1"), ("0", "1")), cells)


def _nontrivial_half(parts: list) -> list:
    """Nontrivial partitionings with |X| <= |outcomes|/2, complements deduped.

    A^X and its complement partitioning carry the same pair of effects, so
    only one representative per unordered pair is kept.
    """
    n = len(parts[0].parent.outcomes) if parts else 0
    kept = []
    for p in parts:
        if p.is_trivial or 2 * p.type > n:
            continue
        if 2 * p.type == n:
            comp = frozenset(p.parent.outcomes) - p.subset
            if subset_key(comp) < p.key:
                continue
        kept.append(p)
    return kept


@dataclass(frozen=True, eq=False)
class PartitionMatrix:
    rows: list
    cols: list
    cells: dict  # (row key, col key) -> FeasibilityReport

    @property
    def all_feasible(self) -> bool:
        return all(r.verdict is Verdict.FEASIBLE for r in self.cells.values())

    @property
    def undetermined_count(self) -> int:
        return sum(1 for r in self.cells.values() if r.verdict is Verdict.UNDETERMINED)

    def to_json(self) -> dict:
        return {
            "rows": [p.key for p in self.rows],
            "cols": [p.key for p in self.cols],
            "cells": {
                f"{xk};{yk}": report.to_json() for (xk, yk), report in sorted(self.cells.items())
            },
            "all_feasible": self.all_feasible,
            "undetermined": self.undetermined_count,
        }


def partition_compatibility_matrix(
    a: Observable, b: Observable, opts: FeasibilityOptions | None = None
) -> PartitionMatrix:
    """Decide joint measurability for every nontrivial partitioning pair.

    Trivial partitionings are omitted: their observables are scalar, hence
    compatible with everything.
    """
    opts = opts or FeasibilityOptions()
    rows = _nontrivial_half(enumerate_partitionings(a))
    cols = _nontrivial_half(enumerate_partitionings(b))
    cells = {}
    for pa in rows:
        oa = pa.observable
        for pb in cols:
            problem = FeasibilityProblem((oa, pb.observable), opts)
            cells[(pa.key, pb.key)] = decide(problem)
    return PartitionMatrix(rows, cols, cells)


@dataclass(frozen=True, eq=False)
class ParadoxReport:
    matrix: PartitionMatrix
    global_report: FeasibilityReport
    global_route: str  # "triple-criterion" | "numeric"
    paradox: bool
    notes: str

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.to_json(),
            "global": self.global_report.to_json(),
            "global_route": self.global_route,
            "paradox": self.paradox,
            "notes": self.notes,
        }


def _marginals_match(m1, m2, tol: float = 1e-8) -> bool:
    if set(m1.outcomes) != set(m2.outcomes):
        return False
    return all(opnorm(m1.effects[x].matrix - m2.effects[x].matrix) <= tol for x in m1.outcomes)


def partition_paradox_audit(
    g: ProductObservable,
    f: ProductObservable,
    triple_context=None,
    opts: FeasibilityOptions | None = None,
) -> ParadoxReport:
    """Check whether pairwise-compatible partitionings mask a global failure.

    The matrix decides all nontrivial partitioning pairs of G and F.  The
    global verdict on (G, F) comes from the orthogonal-triple criterion when
    ``triple_context`` supplies the three Bloch vectors: a joint observable of
    G and F would marginalize to all three parents, so a violated triple
    criterion rules it out.  Without that context only the numeric engine
    runs, and it cannot certify infeasibility: the report then says the
    global verdict is inconclusive rather than declaring a paradox.
    """
    opts = opts or FeasibilityOptions()
    if len(g.parents) != 2 or len(f.parents) != 2:
        raise ValueError("expected two joint observables of qubit pairs")
    shared = [
        (i, j)
        for i in (0, 1)
        for j in (0, 1)
        if _marginals_match(marginal(g, i), marginal(f, j))
    ]
    if not shared:
        raise ValueError("the joints share no common parent (no marginals match)")

    matrix = partition_compatibility_matrix(g, f, opts)

    route = "numeric"
    global_report = None
    if triple_context is not None:
        va, vb, vc = (np.asarray(v, dtype=float) for v in triple_context)
        expect = [(g, 0, va), (g, 1, vb), (f, 0, vb), (f, 1, vc)]
        from .bloch import BlochEffect, SimpleQubitObservable

        for obs, axis, vec in expect:
            want = SimpleQubitObservable(BlochEffect(1.0, vec)).as_observable()
            if not _marginals_match(marginal(obs, axis), want):
                raise ValueError(
                    f"triple_context vector does not match a joint marginal (axis {axis})"
                )
        result = three_orthogonal_criterion(va, vb, vc)
        if not result.jm:
            route = "triple-criterion"
            global_report = FeasibilityReport(
                Verdict.INFEASIBLE, None, REASON_TRIPLE, result.margin, 0.0, 0
            )
    if global_report is None:
        global_report = decide(FeasibilityProblem((g, f), opts))

    paradox = matrix.all_feasible and global_report.verdict is Verdict.INFEASIBLE
    if route == "triple-criterion":
        notes = (
            "global verdict from the orthogonal-triple criterion: a joint of G and F "
            "would have all three context observables as marginals"
        )
    elif global_report.verdict is Verdict.UNDETERMINED:
        notes = (
            "global verdict inconclusive: the numeric search cannot certify "
            "infeasibility; supply triple_context for the analytic route"
        )
    else:
        notes = "global verdict from the numeric engine"
    return ParadoxReport(matrix, global_report, route, paradox, notes)
