"""Shared fixtures: closed-form 2x2 eigenvalue oracle, acceptance recorder."""
from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


def eig2x2(m) -> tuple[float, float]:
    """Eigenvalues of a 2x2 Hermitian matrix from the characteristic
    polynomial; independent of any LAPACK code path."""
    tr = float(m[0, 0].real + m[1, 1].real)
    det = float((m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real)
    disc = max(tr * tr / 4.0 - det, 0.0)
    root = math.sqrt(disc)
    return tr / 2.0 - root, tr / 2.0 + root


@pytest.fixture
def eig2x2_oracle():
    return eig2x2


_ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def criterion():
    """Context manager that records one acceptance-criterion outcome."""

    @contextmanager
    def _criterion(num: int, title: str):
        try:
            yield
        except BaseException:
            _ACCEPTANCE[num] = (title, False)
            raise
        _ACCEPTANCE[num] = (title, True)

    return _criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, passed = _ACCEPTANCE[num]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num} ({title}): {word}")


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (z + z.conj().T)
