"""Lower-bound sets in the Loewner order: membership, greatest-element
refutation, and maximality probing.

lb(A, B) is the set of effects below both A and B.  Greatestness of a
candidate is refuted by exhibiting a member that fails to sit below it;
the search can never prove greatestness, so "no counterexample found" is
reported as exactly that.  Maximality is probed by pushing the trace up
inside lb(A, B) above the candidate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import BlochEffect, bloch_matrix
from .observables import ProductObservable, label_key, marginal
from .operators import (
    HermitianOperator,
    eigvalsh_checked,
    identity,
    is_effect,
    loewner_leq,
    opnorm,
)


@dataclass(frozen=True)
class OrderSearchOptions:
    trials: int = 200
    seed: int = 0
    eps: float = 1e-6              # strict-violation / trace-gain threshold
    membership_tol: float = 1e-9   # lb membership slack for search candidates
    # alternating-projection sweeps toward lb; candidates still face an exact
    # membership recheck, so extra sweeps buy accuracy, never false positives
    projection_cycles: int = 4
    bisect_tol: float = 1e-8       # absolute tolerance on the trace target
    feasibility_tol: float = 1e-9  # constraint residual for probe iterates
    max_iter: int = 1500           # projection iterations per trace target


@dataclass(frozen=True, eq=False)
class LowerBoundQuery:
    """Membership query for lb(A, B); construction checks that all three
    operators are effects of equal dimension."""

    a: HermitianOperator
    b: HermitianOperator
    c: HermitianOperator
    tol: float | None = None

    def __post_init__(self):
        dims = {self.a.dim, self.b.dim, self.c.dim}
        if len(dims) != 1:
            raise ValueError(f"operators have mixed dimensions {sorted(dims)}")
        for name, op in (("A", self.a), ("B", self.b), ("C", self.c)):
            if not is_effect(op, self.tol):
                raise ValueError(f"{name} is not an effect")


def in_lb(query: LowerBoundQuery) -> bool:
    """True iff C <= A and C <= B in the Loewner order."""
    return loewner_leq(query.c, query.a, query.tol) and loewner_leq(
        query.c, query.b, query.tol
    )


@dataclass(frozen=True, eq=False)
class Refutation:
    """A member of lb(A, B) that is not below the candidate, witnessed by a
    unit vector with a strictly positive quadratic form on D - C."""

    witness: HermitianOperator
    vector: np.ndarray
    violation: float


@dataclass(frozen=True, eq=False)
class MaximalityReport:
    verdict: str  # "NOT_MAXIMAL" | "MAXIMAL_WITHIN"
    witness: HermitianOperator | None
    trace_gain: float
    eps: float

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "trace_gain": self.trace_gain, "eps": self.eps}


def _clip_psd(batch: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(batch)
    w = np.clip(w, 0.0, None)
    return (v * w[:, None, :]) @ v.conj().transpose(0, 2, 1)


def _project_into_lb(batch: np.ndarray, a: np.ndarray, b: np.ndarray, cycles: int) -> np.ndarray:
    for _ in range(cycles):
        batch = _clip_psd(batch)
        batch = a - _clip_psd(a - batch)
        batch = b - _clip_psd(b - batch)
    return batch


def _random_effect_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r, axis1=1, axis2=2).copy()
    phases = phases / np.abs(phases)
    q = q * phases.conj()[:, None, :]
    w = rng.uniform(0.0, 1.0, (count, dim))
    return (q * w[:, None, :]) @ q.conj().transpose(0, 2, 1)


def _directed_qubit_candidates(a: HermitianOperator, b: HermitianOperator) -> np.ndarray:
    """Candidate effects along the summed Bloch axis of A and B; the family
    that breaks greatestness of boundary joints lives here."""
    axis = BlochEffect.from_operator(a).a + BlochEffect.from_operator(b).a
    mats = []
    for t in (0.1, 0.2, 0.3, 0.4):
        for k in (1, 2, 3):
            gamma = t + k * (0.5 - t) / 4.0
            mats.append(bloch_matrix(gamma, t * axis))
    return np.array(mats)


def _check_in_lb_pre(c, a, b, eps: float, who: str):
    ok = (
        loewner_leq(c, a, eps)
        and loewner_leq(c, b, eps)
        and is_effect(c, eps)
    )
    if not ok:
        raise ValueError(f"{who}: candidate is not in lb(A, B)")


def refute_greatest(
    c: HermitianOperator,
    a: HermitianOperator,
    b: HermitianOperator,
    opts: OrderSearchOptions | None = None,
) -> Refutation | None:
    """Search lb(A, B) for a member D with D not below C.

    Directed qubit candidates (effects along the summed Bloch axis) are tried
    first, then ``opts.trials`` random effects projected into lb(A, B) by
    alternating projections.  Candidates are only accepted after an exact
    membership re-check, so an imperfect projection can not produce a false
    counterexample.  Returns None when the search exhausts; that outcome is
    inconclusive by design.
    """
    opts = opts or OrderSearchOptions()
    _check_in_lb_pre(c, a, b, opts.eps, "refute_greatest")
    dim = c.dim
    rng = np.random.default_rng([opts.seed, 7])

    pools = []
    if dim == 2:
        pools.append(_directed_qubit_candidates(a, b))
    if opts.trials > 0:
        pools.append(_random_effect_batch(dim, opts.trials, rng))
    if not pools:
        return None
    batch = np.concatenate(pools, axis=0)
    batch = _project_into_lb(batch, a.matrix, b.matrix, opts.projection_cycles)

    mtol = opts.membership_tol
    ok_psd = np.linalg.eigvalsh(batch)[:, 0] >= -mtol
    ok_a = np.linalg.eigvalsh(a.matrix - batch)[:, 0] >= -mtol
    ok_b = np.linalg.eigvalsh(b.matrix - batch)[:, 0] >= -mtol
    w, v = np.linalg.eigh(batch - c.matrix)
    violating = ok_psd & ok_a & ok_b & (w[:, -1] > opts.eps)
    if not violating.any():
        return None
    first = int(np.argmax(violating))
    psi = v[first][:, -1]
    return Refutation(
        HermitianOperator(batch[first]),
        psi / np.linalg.norm(psi),
        float(w[first, -1]),
    )


def _probe_feasible(cm, am, bm, tau, start, opts: OrderSearchOptions):
    """Alternating projections for: C <= D <= A, D <= B, tr D = tau."""
    dim = cm.shape[0]
    eye = np.eye(dim)
    d = start.copy()
    prev = np.inf
    for it in range(opts.max_iter):
        d = cm + _clip_psd((d - cm)[None, :, :])[0]
        d = am - _clip_psd((am - d)[None, :, :])[0]
        d = bm - _clip_psd((bm - d)[None, :, :])[0]
        d = d + ((tau - float(np.trace(d).real)) / dim) * eye
        if it % 25 == 24:
            viol = max(
                -float(np.linalg.eigvalsh(d - cm)[0]),
                -float(np.linalg.eigvalsh(am - d)[0]),
                -float(np.linalg.eigvalsh(bm - d)[0]),
                0.0,
            )
            if viol <= opts.feasibility_tol:
                return d
            if viol > prev * (1.0 - 1e-3) and viol > 10.0 * opts.feasibility_tol:
                return None  # stalled well away from feasibility
            prev = viol
    return None


def maximality_probe(
    c: HermitianOperator,
    a: HermitianOperator,
    b: HermitianOperator,
    opts: OrderSearchOptions | None = None,
) -> MaximalityReport:
    """Push the trace up inside {D in lb(A, B) : D >= C} by bisection.

    For D >= C, D differs from C exactly when tr(D - C) > 0, so maximality
    fails iff some feasible D gains trace.  Each trace target is tested with
    alternating projections; a target whose projections stall is treated as
    infeasible, which can only make the probe conservative (it may miss a
    gain, never invent one).
    """
    opts = opts or OrderSearchOptions()
    _check_in_lb_pre(c, a, b, opts.eps, "maximality_probe")
    cm, am, bm = c.matrix, a.matrix, b.matrix
    lo = c.trace()
    hi = min(a.trace(), b.trace())
    best = None
    while hi - lo > opts.bisect_tol:
        mid = 0.5 * (lo + hi)
        found = _probe_feasible(cm, am, bm, mid, best if best is not None else cm, opts)
        if found is not None:
            lo, best = mid, found
        else:
            hi = mid
    gain = max(lo - c.trace(), 0.0)
    if best is not None and gain > opts.eps:
        return MaximalityReport("NOT_MAXIMAL", HermitianOperator(best), gain, opts.eps)
    return MaximalityReport("MAXIMAL_WITHIN", None, gain, opts.eps)


@dataclass(frozen=True, eq=False)
class CellAudit:
    in_lb: bool
    refutation: Refutation | None
    maximality: MaximalityReport | None

    @property
    def greatest_refuted(self) -> bool:
        return self.refutation is not None

    def to_json(self) -> dict:
        return {
            "in_lb": self.in_lb,
            "greatest_refuted": self.greatest_refuted,
            "violation": None if self.refutation is None else self.refutation.violation,
            "maximality": None if self.maximality is None else self.maximality.to_json(),
        }


@dataclass(frozen=True, eq=False)
class OrderAudit:
    cells: dict
    all_greatest: bool  # meaning: no refutation found in any cell
    all_maximal: bool
    uniqueness_refuted: bool
    alternative_joint: ProductObservable | None

    def to_json(self) -> dict:
        return {
            "cells": {
                f"{label_key(x)},{label_key(y)}": cell.to_json()
                for (x, y), cell in sorted(self.cells.items(), key=lambda kv: str(kv[0]))
            },
            "all_greatest": self.all_greatest,
            "all_maximal": self.all_maximal,
            "uniqueness_refuted": self.uniqueness_refuted,
        }


def _designated(obs):
    outs = list(obs.outcomes)
    if "1" in outs:
        return "1"
    return outs[-1]


def joint_observable_order_audit(
    g: ProductObservable,
    a_obs,
    b_obs,
    opts: OrderSearchOptions | None = None,
    marginal_tol: float = 1e-8,
) -> OrderAudit:
    """Order-theoretic audit of a joint observable, cell by cell.

    Every cell effect is confirmed to lie in the lower-bound set of its
    marginal effects, then attacked with the greatest-element refutation
    search and the maximality probe.  ``all_greatest`` records only that no
    refutation was found; it is conclusive just for families where the
    greatest element is known analytically (commuting pairs with a sharp
    member).  For two-outcome parents a refuted maximality at the designated
    cell is converted into an explicit second joint observable, refuting
    uniqueness.
    """
    opts = opts or OrderSearchOptions()
    if len(g.parents) != 2:
        raise ValueError("audit expects a joint observable of two parents")
    for axis, parent in enumerate((a_obs, b_obs)):
        if set(g.parents[axis]) != set(parent.outcomes):
            raise ValueError(f"axis {axis} labels do not match the parent observable")
        got = marginal(g, axis)
        for x in parent.outcomes:
            dev = opnorm(got.effects[x].matrix - parent.effects[x].matrix)
            if dev > marginal_tol:
                raise ValueError(
                    f"marginal mismatch on axis {axis} outcome {label_key(x)}: {dev:.3e}"
                )

    cells = {}
    for x in a_obs.outcomes:
        for y in b_obs.outcomes:
            c = g.effects[(x, y)]
            fa, fb = a_obs.effects[x], b_obs.effects[y]
            member = loewner_leq(c, fa, opts.eps) and loewner_leq(c, fb, opts.eps)
            if member:
                refutation = refute_greatest(c, fa, fb, opts)
                probe = maximality_probe(c, fa, fb, opts)
            else:
                refutation, probe = None, None
            cells[(x, y)] = CellAudit(member, refutation, probe)

    all_greatest = all(not cell.greatest_refuted for cell in cells.values())
    all_maximal = all(
        cell.maximality is not None and cell.maximality.verdict == "MAXIMAL_WITHIN"
        for cell in cells.values()
    )

    uniqueness_refuted = False
    alternative = None
    if len(a_obs.outcomes) == 2 and len(b_obs.outcomes) == 2:
        da, db = _designated(a_obs), _designated(b_obs)
        probe = cells[(da, db)].maximality
        if probe is not None and probe.verdict == "NOT_MAXIMAL":
            d = probe.witness
            ca = next(x for x in a_obs.outcomes if x != da)
            cb = next(y for y in b_obs.outcomes if y != db)
            alternative = ProductObservable(
                (tuple(a_obs.outcomes), tuple(b_obs.outcomes)),
                {
                    (da, db): d,
                    (da, cb): a_obs.effects[da] - d,
                    (ca, db): b_obs.effects[db] - d,
                    (ca, cb): identity(g.dim) + d - a_obs.effects[da] - b_obs.effects[db],
                },
            )
            uniqueness_refuted = True
    return OrderAudit(cells, all_greatest, all_maximal, uniqueness_refuted, alternative)
