"""Finite-dimensional Hermitian operators, positivity tests, and the Loewner order.

Everything downstream works with dense complex matrices.  Operators are
symmetrized on construction so later eigensolver calls can assume exact
Hermiticity; the recorded asymmetry keeps track of how much symmetrization
threw away.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 64

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class EigensolverError(RuntimeError):
    """Raised when the Hermitian eigensolver fails to converge."""


def opnorm(x) -> float:
    """Spectral norm (largest singular value) of a matrix or operator."""
    m = x.matrix if isinstance(x, HermitianOperator) else np.asarray(x)
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A dense Hermitian matrix, symmetrized and validated at construction.

    The input is replaced by (M + M*)/2; the spectral norm of the discarded
    skew part is stored as ``asymmetry``.  Inputs with asymmetry above
    ``atol`` are rejected rather than silently repaired.
    """

    matrix: np.ndarray
    atol: float = 1e-8
    asymmetry: float = field(init=False, default=0.0)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        if m.shape[0] < 1 or m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} outside [1, {MAX_DIM}]")
        if not np.all(np.isfinite(m.view(float))):
            raise ValueError("operator entries must be finite")
        skew = 0.5 * (m - m.conj().T)
        asym = float(np.linalg.norm(skew, 2))
        if asym > self.atol:
            raise ValueError(f"matrix asymmetry {asym:.3e} exceeds {self.atol:.3e}")
        herm = 0.5 * (m + m.conj().T)
        herm.flags.writeable = False
        object.__setattr__(self, "matrix", herm)
        object.__setattr__(self, "asymmetry", asym)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def norm(self) -> float:
        return opnorm(self.matrix)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.matrix - other.matrix)

    def __neg__(self) -> "HermitianOperator":
        return HermitianOperator(-self.matrix)

    def __rmul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(float(scalar) * self.matrix)

    __mul__ = __rmul__

    def __matmul__(self, other: "HermitianOperator") -> np.ndarray:
        # plain matrix product; in general not Hermitian, so return the array
        return self.matrix @ other.matrix


def identity(dim: int) -> HermitianOperator:
    return HermitianOperator(np.eye(dim, dtype=complex))


def zero(dim: int) -> HermitianOperator:
    return HermitianOperator(np.zeros((dim, dim), dtype=complex))


def eigvalsh_checked(h: HermitianOperator) -> np.ndarray:
    """Ascending eigenvalues, wrapping solver failures in EigensolverError."""
    try:
        return np.linalg.eigvalsh(h.matrix)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy rarely fails here
        raise EigensolverError(
            f"eigensolver failed on dim-{h.dim} operator "
            f"(norm {h.norm():.3e}, asymmetry {h.asymmetry:.3e}): {exc}"
        ) from exc


def min_eigenvalue(h: HermitianOperator) -> float:
    return float(eigvalsh_checked(h)[0])


def default_psd_tol(h: HermitianOperator) -> float:
    """Positivity tolerance relative to the operator's scale."""
    return 1e-9 * max(1.0, h.norm())


def is_psd(h: HermitianOperator, tol: float | None = None) -> bool:
    """True iff the smallest eigenvalue is >= -tol."""
    if tol is None:
        tol = default_psd_tol(h)
    return min_eigenvalue(h) >= -tol


def loewner_leq(a: HermitianOperator, b: HermitianOperator, tol: float | None = None) -> bool:
    """Loewner order test: a <= b iff b - a is positive semidefinite."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return is_psd(b - a, tol)


def is_effect(e: HermitianOperator, tol: float | None = None) -> bool:
    """True iff 0 <= e <= identity within tol."""
    if tol is None:
        tol = default_psd_tol(e)
    evals = eigvalsh_checked(e)
    return evals[0] >= -tol and evals[-1] <= 1.0 + tol


@dataclass(frozen=True, eq=False)
class State:
    """A density operator: positive semidefinite with unit trace."""

    operator: HermitianOperator
    psd_tol: float | None = None
    trace_tol: float = 1e-12

    def __post_init__(self):
        if not is_psd(self.operator, self.psd_tol):
            raise ValueError(
                f"state is not positive semidefinite (min eig {min_eigenvalue(self.operator):.3e})"
            )
        tr = self.operator.trace()
        if abs(tr - 1.0) > self.trace_tol:
            raise ValueError(f"state trace {tr!r} is not 1 within {self.trace_tol:.1e}")

    @property
    def dim(self) -> int:
        return self.operator.dim


def outcome_probability(e: HermitianOperator, rho: State, tol: float | None = None) -> float:
    """Born probability tr(rho e) for an effect e in the state rho."""
    if e.dim != rho.dim:
        raise ValueError(f"dimension mismatch: effect {e.dim} vs state {rho.dim}")
    if not is_effect(e, tol):
        raise ValueError("operator is not an effect (fails 0 <= E <= 1)")
    return float(np.trace(rho.operator.matrix @ e.matrix).real)


def operator_to_json(h: HermitianOperator) -> dict:
    return {
        "dim": h.dim,
        "re": h.matrix.real.tolist(),
        "im": h.matrix.imag.tolist(),
    }


def operator_from_json(data: dict) -> HermitianOperator:
    """Rebuild an operator from its JSON dict, re-running the Hermiticity check."""
    dim = int(data["dim"])
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError(f"re/im shapes {re.shape}/{im.shape} do not match dim {dim}")
    return HermitianOperator(re + 1j * im)
