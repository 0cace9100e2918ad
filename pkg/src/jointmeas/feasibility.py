"""Joint-measurability decisions: analytic routes plus a numerical search.

``decide`` dispatches in a fixed order:

1. commuting families in which every pair contains a sharp (or scalar)
   member get the exact product joint;
2. qubit pairs and orthogonal triples matching an analytic criterion get its
   verdict, with a witness constructed for the feasible side;
3. everything else goes to an alternating-projection search over the joint
   effects.

The numerical path never claims infeasibility: it either produces a witness
or reports UNDETERMINED with the best residual it reached.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import bloch as _bloch
from .bloch import (
    BlochEffect,
    CriterionResult,
    are_orthogonal,
    are_parallel,
    bloch_matrix,
    boundary_joint,
    busch_criterion,
    liu_criterion,
    molnar_criterion,
    three_orthogonal_criterion,
)
from .observables import (
    Observable,
    ProductObservable,
    commute,
    is_sharp,
    is_trivial,
    label_key,
    marginal,
    observable_to_json,
    validate,
)
from .operators import HermitianOperator, eigvalsh_checked, identity, loewner_leq, opnorm, zero

REASON_BUSCH = "eq3"
REASON_MOLNAR = "eq4"
REASON_LIU = "eq5"
REASON_TRIPLE = "eq6"
REASON_COMMUTING_SHARP = "commuting-sharp"

_ALPHA_TOL = 1e-9  # tolerance when matching criterion hypotheses on alpha


class Verdict(str, enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class FeasibilityOptions:
    tol: float = 1e-7
    max_iter: int = 20000
    restarts: int = 8
    seed: int = 0


@dataclass(frozen=True, eq=False)
class FeasibilityProblem:
    parents: tuple
    options: FeasibilityOptions = field(default_factory=FeasibilityOptions)

    def __post_init__(self):
        parents = tuple(self.parents)
        object.__setattr__(self, "parents", parents)
        if len(parents) < 2:
            raise ValueError("need at least two observables")
        dims = {p.dim for p in parents}
        if len(dims) != 1:
            raise ValueError(f"observables have mixed dimensions {sorted(dims)}")


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    verdict: Verdict
    witness: ProductObservable | None = None
    reason: str | None = None
    margin: float | None = None
    residual: float = 0.0
    iterations: int = 0

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "reason": self.reason,
            "margin": self.margin,
            "witness": observable_to_json(self.witness) if self.witness is not None else None,
        }


def witness_residual(g: ProductObservable, parents) -> float:
    """Max marginal deviation plus worst negative-eigenvalue magnitude."""
    marg = 0.0
    for axis, parent in enumerate(parents):
        got = marginal(g, axis)
        for x in parent.outcomes:
            marg = max(marg, opnorm(got.effects[x].matrix - parent.effects[x].matrix))
    neg = 0.0
    for z in g.outcomes:
        neg = max(neg, max(0.0, -float(eigvalsh_checked(g.effects[z])[0])))
    return marg + neg


# ---------------------------------------------------------------------------
# route 1: commuting families
# ---------------------------------------------------------------------------

def _sharp_or_scalar_flags(parents, tol: float) -> list:
    return [is_sharp(p, tol) or is_trivial(p, tol) for p in parents]


def _is_commuting_compatible_family(parents, tol: float = 1e-9) -> bool:
    """All pairs commute and each pair contains a sharp or scalar member."""
    flags = _sharp_or_scalar_flags(parents, tol)
    n = len(parents)
    for i in range(n):
        for j in range(i + 1, n):
            if not (flags[i] or flags[j]):
                return False
    for i in range(n):
        for j in range(i + 1, n):
            if not commute(parents[i], parents[j], tol):
                return False
    return True


def product_joint_many(parents, tol: float = 1e-9) -> ProductObservable:
    """Symmetrized ordered product G(x_1..x_n) = A_1(x_1) ... A_n(x_n) for a
    pairwise commuting family."""
    dim = parents[0].dim
    effects = {}
    for combo in itertools.product(*(p.outcomes for p in parents)):
        m = np.eye(dim, dtype=complex)
        for p, x in zip(parents, combo):
            m = m @ p.effects[x].matrix
        sym = 0.5 * (m + m.conj().T)
        resid = opnorm(m - sym)
        if resid > tol:
            raise ValueError(
                f"ordered product at {tuple(label_key(x) for x in combo)} has "
                f"Hermiticity residual {resid:.3e} > {tol:.1e}"
            )
        effects[combo] = HermitianOperator(sym)
    return ProductObservable(tuple(tuple(p.outcomes) for p in parents), effects)


# ---------------------------------------------------------------------------
# route 2: analytic qubit criteria
# ---------------------------------------------------------------------------

def _qubit_binary_params(obs) -> dict | None:
    """Bloch parameters per outcome for a two-outcome qubit observable."""
    if obs.dim != 2 or len(obs.outcomes) != 2:
        return None
    params = {}
    for x in obs.outcomes:
        be = BlochEffect.from_operator(obs.effects[x])
        params[x] = (be.alpha, be.a)
    return params


def _designation_order(obs) -> list:
    """Deterministic preference order for the designated outcome."""
    outs = list(obs.outcomes)
    if "1" in outs:
        return ["1"] + [x for x in outs if x != "1"]
    return list(reversed(outs))


@dataclass(frozen=True)
class _CriterionMatch:
    reason: str
    result: CriterionResult
    designations: tuple  # ((label, alpha, a), ...) per parent, criterion order


def _match_pair_criterion(a_obs, b_obs) -> _CriterionMatch | None:
    pa = _qubit_binary_params(a_obs)
    pb = _qubit_binary_params(b_obs)
    if pa is None or pb is None:
        return None

    def unbiased(params) -> bool:
        return all(abs(al - 1.0) <= _ALPHA_TOL for al, _ in params.values())

    def rank_one_label(obs, params):
        for x in _designation_order(obs):
            al, v = params[x]
            if abs(al - float(np.linalg.norm(v))) <= _ALPHA_TOL:
                return x
        return None

    if unbiased(pa) and unbiased(pb):
        da = _designation_order(a_obs)[0]
        db = _designation_order(b_obs)[0]
        av, bv = pa[da][1], pb[db][1]
        result = busch_criterion(av, bv)
        return _CriterionMatch(
            REASON_BUSCH, result, ((da, 1.0, av), (db, 1.0, bv))
        )

    ra, rb = rank_one_label(a_obs, pa), rank_one_label(b_obs, pb)
    if ra is not None and rb is not None:
        av, bv = pa[ra][1], pb[rb][1]
        if not are_parallel(av, bv):
            result = molnar_criterion(av, bv)
            return _CriterionMatch(
                REASON_MOLNAR, result, ((ra, pa[ra][0], av), (rb, pb[rb][0], bv))
            )

    for sharp_side, other_side, flip in (((a_obs, pa), (b_obs, pb), False),
                                         ((b_obs, pb), (a_obs, pa), True)):
        s_obs, s_par = sharp_side
        o_obs, o_par = other_side
        if not unbiased(s_par):
            continue
        ds = _designation_order(s_obs)[0]
        do = _designation_order(o_obs)[0]
        avec = s_par[ds][1]
        beta, bvec = o_par[do]
        if not are_orthogonal(avec, bvec):
            continue
        result = liu_criterion(avec, beta, bvec)
        desig = ((ds, 1.0, avec), (do, beta, bvec))
        if flip:
            desig = (desig[1], desig[0])
        return _CriterionMatch(REASON_LIU, result, desig)
    return None


def _match_triple_criterion(parents) -> _CriterionMatch | None:
    params = [_qubit_binary_params(p) for p in parents]
    if any(p is None for p in params):
        return None
    desigs = []
    for obs, par in zip(parents, params):
        if not all(abs(al - 1.0) <= _ALPHA_TOL for al, _ in par.values()):
            return None
        d = _designation_order(obs)[0]
        desigs.append((d, 1.0, par[d][1]))
    vecs = [d[2] for d in desigs]
    for i in range(3):
        for j in range(i + 1, 3):
            if not are_orthogonal(vecs[i], vecs[j]):
                return None
    result = three_orthogonal_criterion(*vecs)
    return _CriterionMatch(REASON_TRIPLE, result, tuple(desigs))


# ---------------------------------------------------------------------------
# witnesses for analytically feasible cases
# ---------------------------------------------------------------------------

def trivial_joint_if_sum_leq_identity(a_obs, b_obs, tol: float = 1e-9) -> ProductObservable | None:
    """If A(1) + B(1) <= identity, the joint with an empty (1,1) cell:
    G(1,1) = 0, G(1,0) = A(1), G(0,1) = B(1), G(0,0) = 1 - A(1) - B(1).
    Returns None when the sum condition fails."""
    for obs in (a_obs, b_obs):
        if len(obs.outcomes) != 2 or "1" not in obs.outcomes:
            raise ValueError("expected two-outcome observables with an outcome labeled '1'")
    return _trivial_joint_designated(a_obs, b_obs, "1", "1", tol)


def _trivial_joint_designated(a_obs, b_obs, da, db, tol: float) -> ProductObservable | None:
    dim = a_obs.dim
    a1, b1 = a_obs.effects[da], b_obs.effects[db]
    rest = identity(dim) - a1 - b1
    if not loewner_leq(a1 + b1, identity(dim), tol):
        return None
    ca = next(x for x in a_obs.outcomes if x != da)
    cb = next(x for x in b_obs.outcomes if x != db)
    effects = {
        (da, db): zero(dim),
        (da, cb): a1,
        (ca, db): b1,
        (ca, cb): rest,
    }
    return ProductObservable((tuple(a_obs.outcomes), tuple(b_obs.outcomes)), effects)


def _trivial_joint_sweep(a_obs, b_obs, tol: float = 1e-9) -> ProductObservable | None:
    """Try the empty-cell construction over all designations of the two parents."""
    if len(a_obs.outcomes) != 2 or len(b_obs.outcomes) != 2:
        return None
    for da in a_obs.outcomes:
        for db in b_obs.outcomes:
            g = _trivial_joint_designated(a_obs, b_obs, da, db, tol)
            if g is not None:
                return g
    return None


def _relabel_boundary_joint(g: ProductObservable, a_obs, b_obs, da, db) -> ProductObservable:
    """Map the '0'/'1' cells of a boundary joint onto the parents' own labels,
    with ('1','1') landing on the designated pair (da, db)."""
    ca = next(x for x in a_obs.outcomes if x != da)
    cb = next(x for x in b_obs.outcomes if x != db)
    to_a = {"1": da, "0": ca}
    to_b = {"1": db, "0": cb}
    effects = {(to_a[i], to_b[j]): e for (i, j), e in g.effects.items()}
    return ProductObservable((tuple(a_obs.outcomes), tuple(b_obs.outcomes)), effects)


# ---------------------------------------------------------------------------
# numerical search for qubit pairs: four free parameters
# ---------------------------------------------------------------------------

def _designated_pair_params(obs):
    params = _qubit_binary_params(obs)
    if params is None:
        raise ValueError("expected a two-outcome qubit observable")
    d = _designation_order(obs)[0]
    alpha, avec = params[d]
    return d, alpha, avec


def _as_observable(obs):
    from .bloch import SimpleQubitObservable

    if isinstance(obs, SimpleQubitObservable):
        return obs.as_observable()
    return obs


def decide_pair_qubit_numeric(a_obs, b_obs, opts: FeasibilityOptions | None = None) -> FeasibilityReport:
    """Search for a joint observable of two two-outcome qubit observables.

    The joint is pinned down by one cell in Bloch form, G(1,1) = (gamma, g);
    the marginal equations fix the other three cells, so feasibility reduces
    to minimizing the worst effect-validity violation f = max(||v|| - alpha)
    over the four implied cells.  The four corner joints (one cell forced to
    zero) are evaluated exactly first: when a parent effect is rank one the
    feasible set collapses to such a corner and no interior search can reach
    it.  Otherwise f is convex and a multistart simplex search is run for
    robustness; f* <= tol yields a FEASIBLE witness, and anything else is
    reported UNDETERMINED with the best residual found.
    """
    opts = opts or FeasibilityOptions()
    a_obs = _as_observable(a_obs)
    b_obs = _as_observable(b_obs)
    if a_obs.dim != 2 or b_obs.dim != 2:
        raise ValueError("the pair search is specific to qubit observables")
    da, alpha, avec = _designated_pair_params(a_obs)
    db, beta, bvec = _designated_pair_params(b_obs)

    absum = avec + bvec

    def violation(x):
        gamma, g = x[0], x[1:]
        return max(
            float(np.linalg.norm(g)) - gamma,
            float(np.linalg.norm(avec - g)) - (alpha - gamma),
            float(np.linalg.norm(bvec - g)) - (beta - gamma),
            float(np.linalg.norm(absum - g)) - (2.0 - alpha - beta + gamma),
        )

    # corner joints: G(1,1), G(1,0), G(0,1) or G(0,0) equal to zero
    corners = (
        np.concatenate(([0.0], np.zeros(3))),
        np.concatenate(([alpha], avec)),
        np.concatenate(([beta], bvec)),
        np.concatenate(([alpha + beta - 2.0], absum)),
    )
    best_x, best_f = None, np.inf
    for x in corners:
        f = violation(x)
        if f < best_f:
            best_x, best_f = x, f

    iterations = 0
    if best_f > opts.tol:
        # start at the symmetrized-product guess, then perturb
        g0 = 0.5 * (alpha * bvec + beta * avec)
        x0 = np.concatenate(([0.5 * (alpha * beta + float(np.dot(avec, bvec)))], g0))
        rng = np.random.default_rng([opts.seed, 101])
        starts = [x0]
        for _ in range(max(opts.restarts - 1, 0)):
            starts.append(x0 + 0.3 * rng.standard_normal(4))

        for start in starts:
            res = minimize(
                violation,
                start,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-13, "maxfev": 4000},
            )
            iterations += int(res.nit)
            if res.fun < best_f:
                best_x, best_f = res.x, float(res.fun)
            if best_f < 0.0:
                break  # strictly valid joint found

    fstar = float(best_f)
    if fstar <= opts.tol:
        gamma, g = float(best_x[0]), np.asarray(best_x[1:], dtype=float)
        ca = next(x for x in a_obs.outcomes if x != da)
        cb = next(x for x in b_obs.outcomes if x != db)
        effects = {
            (da, db): HermitianOperator(bloch_matrix(gamma, g)),
            (da, cb): HermitianOperator(bloch_matrix(alpha - gamma, avec - g)),
            (ca, db): HermitianOperator(bloch_matrix(beta - gamma, bvec - g)),
            (ca, cb): HermitianOperator(bloch_matrix(2.0 - alpha - beta + gamma, -absum + g)),
        }
        witness = ProductObservable((tuple(a_obs.outcomes), tuple(b_obs.outcomes)), effects)
        resid = witness_residual(witness, (a_obs, b_obs))
        return FeasibilityReport(Verdict.FEASIBLE, witness, None, None, resid, iterations)
    return FeasibilityReport(
        Verdict.UNDETERMINED, None, None, None, max(fstar, 0.0), iterations
    )


# ---------------------------------------------------------------------------
# generic alternating-projection engine
# ---------------------------------------------------------------------------

def _marginal_constraints(parents):
    """Constraint matrix M (one row per parent effect), its pseudo-inverse,
    and the stacked targets C so that a joint family G satisfies M G = C."""
    labels = list(itertools.product(*(p.outcomes for p in parents)))
    index = {z: k for k, z in enumerate(labels)}
    dim = parents[0].dim
    rows = []
    targets = []
    for axis, parent in enumerate(parents):
        for x in parent.outcomes:
            row = np.zeros(len(labels))
            for z, k in index.items():
                if z[axis] == x:
                    row[k] = 1.0
            rows.append(row)
            targets.append(parent.effects[x].matrix)
    m = np.array(rows)
    c = np.array(targets)
    return labels, m, np.linalg.pinv(m), c


def _alternating_projection_search(parents, opts: FeasibilityOptions) -> FeasibilityReport:
    """Alternate between the affine marginal subspace and the PSD cone.

    The affine projection is exact (precomputed least-squares operator), so
    the residual is measured right after it: the marginal part is then at
    float level and the combined residual is dominated by the worst negative
    eigenvalue.  Convergence within tol returns the affine-projected iterate
    as witness; stalls and exhausted iteration budgets end UNDETERMINED.
    """
    labels, m, m_pinv, c = _marginal_constraints(parents)
    dim = parents[0].dim
    k = len(labels)
    eye = np.eye(dim, dtype=complex)

    best_resid = np.inf
    iterations = 0
    for restart in range(max(opts.restarts, 1)):
        rng = np.random.default_rng([opts.seed, restart])
        g = np.tile(eye / k, (k, 1, 1))
        if restart > 0:
            noise = rng.standard_normal((k, dim, dim)) + 1j * rng.standard_normal((k, dim, dim))
            noise = 0.5 * (noise + noise.conj().transpose(0, 2, 1))
            scale = np.linalg.norm(noise, axis=(1, 2), keepdims=True)
            g = g + (0.5 / k) * noise / np.maximum(scale, 1e-12)

        window_resid = np.inf
        for it in range(opts.max_iter):
            iterations += 1
            # affine step: restore the marginals exactly
            gap = np.tensordot(m, g, axes=(1, 0)) - c
            g = g - np.tensordot(m_pinv, gap, axes=(1, 0))
            evals = np.linalg.eigvalsh(g)
            neg = float(max(0.0, -evals[:, 0].min()))
            marg = float(np.abs(np.tensordot(m, g, axes=(1, 0)) - c).max())
            resid = neg + marg
            best_resid = min(best_resid, resid)
            if resid <= opts.tol:
                effects = {z: HermitianOperator(g[i], atol=1e-6) for i, z in enumerate(labels)}
                witness = ProductObservable(tuple(tuple(p.outcomes) for p in parents), effects)
                return FeasibilityReport(
                    Verdict.FEASIBLE, witness, None, None, resid, iterations
                )
            # stall detection: no meaningful progress over the last window
            if it % 500 == 499:
                if resid > 10.0 * opts.tol and resid > window_resid * (1.0 - 1e-6):
                    break
                window_resid = resid
            # cone step: clip negative eigenvalues
            w, v = np.linalg.eigh(g)
            w = np.clip(w, 0.0, None)
            g = (v * w[:, None, :]) @ v.conj().transpose(0, 2, 1)
    return FeasibilityReport(Verdict.UNDETERMINED, None, None, None, best_resid, iterations)


# ---------------------------------------------------------------------------
# the dispatcher
# ---------------------------------------------------------------------------

def _pair_feasible_witness(a_obs, b_obs, match: _CriterionMatch, opts: FeasibilityOptions):
    """Best available witness for an analytically feasible qubit pair."""
    (da, alpha, avec), (db, beta, bvec) = match.designations
    if match.reason == REASON_BUSCH and abs(match.result.value - 2.0) <= 1e-9:
        g = boundary_joint(avec, bvec)
        return _relabel_boundary_joint(g, a_obs, b_obs, da, db), 0
    g = _trivial_joint_sweep(a_obs, b_obs)
    if g is not None:
        return g, 0
    report = decide_pair_qubit_numeric(a_obs, b_obs, opts)
    if report.verdict is Verdict.FEASIBLE:
        return report.witness, report.iterations
    return None, report.iterations


def decide(problem: FeasibilityProblem) -> FeasibilityReport:
    """Decide joint measurability of the problem's parent observables."""
    parents = problem.parents
    opts = problem.options

    if _is_commuting_compatible_family(parents):
        witness = product_joint_many(parents)
        resid = witness_residual(witness, parents)
        return FeasibilityReport(
            Verdict.FEASIBLE, witness, REASON_COMMUTING_SHARP, None, resid, 0
        )

    match = None
    if len(parents) == 2:
        match = _match_pair_criterion(*parents)
    elif len(parents) == 3:
        match = _match_triple_criterion(parents)

    if match is not None:
        if not match.result.jm:
            return FeasibilityReport(
                Verdict.INFEASIBLE, None, match.reason, match.result.margin, 0.0, 0
            )
        if len(parents) == 2:
            witness, iters = _pair_feasible_witness(parents[0], parents[1], match, opts)
            resid = witness_residual(witness, parents) if witness is not None else np.inf
            return FeasibilityReport(
                Verdict.FEASIBLE, witness, match.reason, match.result.margin, resid, iters
            )
        numeric = _alternating_projection_search(parents, opts)
        return FeasibilityReport(
            Verdict.FEASIBLE,
            numeric.witness,
            match.reason,
            match.result.margin,
            numeric.residual,
            numeric.iterations,
        )

    if len(parents) == 2:
        pa = _qubit_binary_params(parents[0])
        pb = _qubit_binary_params(parents[1])
        if pa is not None and pb is not None:
            # no criterion hypothesis matched; an exact zero-overlap joint may
            # still exist, and the pair solver beats the generic engine here
            g = _trivial_joint_sweep(parents[0], parents[1])
            if g is not None:
                resid = witness_residual(g, parents)
                return FeasibilityReport(Verdict.FEASIBLE, g, None, None, resid, 0)
            return decide_pair_qubit_numeric(parents[0], parents[1], opts)

    return _alternating_projection_search(parents, opts)


@dataclass(frozen=True, eq=False)
class PairwiseGlobalReport:
    pairwise: dict
    global_report: FeasibilityReport

    @property
    def all_pairs_feasible(self) -> bool:
        return all(r.verdict is Verdict.FEASIBLE for r in self.pairwise.values())

    def to_json(self) -> dict:
        return {
            "pairs": {f"{i},{j}": r.to_json() for (i, j), r in sorted(self.pairwise.items())},
            "global": self.global_report.to_json(),
        }


def pairwise_vs_global(parents, opts: FeasibilityOptions | None = None) -> PairwiseGlobalReport:
    """Decide every pair and the full family.

    When at least two parents are sharp and every pair is feasible, joint
    measurability of the whole family follows analytically, so a global
    UNDETERMINED is upgraded to FEASIBLE in that case (with a product
    witness whenever the family commutes well enough to build one).
    """
    opts = opts or FeasibilityOptions()
    parents = tuple(parents)
    if len(parents) < 3:
        raise ValueError("need at least three observables to compare pairwise vs global")
    pairwise = {}
    for i in range(len(parents)):
        for j in range(i + 1, len(parents)):
            pairwise[(i, j)] = decide(FeasibilityProblem((parents[i], parents[j]), opts))
    global_report = decide(FeasibilityProblem(parents, opts))

    sharp_count = sum(1 for p in parents if is_sharp(p))
    all_pairs = all(r.verdict is Verdict.FEASIBLE for r in pairwise.values())
    if (
        global_report.verdict is not Verdict.FEASIBLE
        and all_pairs
        and sharp_count >= len(parents) - 1
    ):
        witness = None
        resid = global_report.residual
        try:
            candidate = product_joint_many(parents)
        except ValueError:
            candidate = None
        if candidate is not None:
            cand_resid = witness_residual(candidate, parents)
            if cand_resid <= opts.tol:
                witness, resid = candidate, cand_resid
        global_report = FeasibilityReport(
            Verdict.FEASIBLE,
            witness,
            REASON_COMMUTING_SHARP,
            None,
            resid,
            global_report.iterations,
        )
    return PairwiseGlobalReport(pairwise, global_report)
