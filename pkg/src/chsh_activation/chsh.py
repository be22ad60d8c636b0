"""CHSH Bell operators, their expectation values, and analytic breaking criteria."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import PAULIS, AffineRep, KrausChannel, affine_rep, is_unital
from .linalg import (
    ATOL,
    ContractViolation,
    DensityMatrix,
    DimensionError,
    is_hermitian,
    matrices_close,
)

TSIRELSON = 2 * np.sqrt(2)


class NumericalIntegrityError(ArithmeticError):
    """A quantity that must be real came out with a significant imaginary part."""


@dataclass(frozen=True, eq=False)
class DichotomicObservable:
    """Hermitian operator with spectrum in ``{-1, +1}``."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"observable must be square, got {m.shape}")
        if not is_hermitian(m, ATOL):
            raise ContractViolation("observable is not Hermitian")
        if not matrices_close(m @ m, np.eye(m.shape[0]), 1e-8):
            raise ContractViolation("observable does not square to the identity")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_bloch(cls, direction) -> "DichotomicObservable":
        """Qubit observable ``n . sigma`` for a unit vector ``n``."""
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(sum(c * s for c, s in zip(n, PAULIS)))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "DichotomicObservable":
        from .linalg import random_unitary

        u = random_unitary(dim, rng)
        signs = rng.choice([-1.0, 1.0], size=dim)
        return cls((u * signs) @ u.conj().T)


def _mat(obs) -> np.ndarray:
    return obs.matrix if isinstance(obs, DichotomicObservable) else np.asarray(obs)


@dataclass(frozen=True, eq=False)
class BellOperator:
    """``M1 ⊗ (N1 + N2) + M2 ⊗ (N1 - N2)`` on ``d_A ⊗ d_B``."""

    dims: tuple[int, int]
    matrix: np.ndarray = field(repr=False)
    observables: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if not is_hermitian(m, ATOL):
            raise ContractViolation("Bell operator is not Hermitian")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def norm(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))


def bell_matrix(m1, m2, n1, n2) -> np.ndarray:
    m1, m2, n1, n2 = (_mat(o) for o in (m1, m2, n1, n2))
    return np.kron(m1, n1 + n2) + np.kron(m2, n1 - n2)


def bell_operator(m1, m2, n1, n2) -> BellOperator:
    obs = tuple(o if isinstance(o, DichotomicObservable) else DichotomicObservable(o) for o in (m1, m2, n1, n2))
    if obs[0].dim != obs[1].dim or obs[2].dim != obs[3].dim:
        raise DimensionError("each party's observables must share a dimension")
    return BellOperator((obs[0].dim, obs[2].dim), bell_matrix(*obs), obs)


def chsh_value(bell: BellOperator | np.ndarray, rho: DensityMatrix | np.ndarray) -> float:
    """``Tr(B rho)``; raises if the imaginary residue exceeds ``1e-6``."""
    b = bell.matrix if isinstance(bell, BellOperator) else np.asarray(bell)
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if b.shape != r.shape:
        raise DimensionError(f"Bell operator {b.shape} and state {r.shape} do not match")
    val = np.einsum("ij,ji->", b, r)
    if abs(val.imag) > 1e-6:
        raise NumericalIntegrityError(f"CHSH value has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """``T_ij = Tr(rho sigma_i ⊗ sigma_j)``."""

    entries: np.ndarray

    def gram(self) -> np.ndarray:
        return self.entries.T @ self.entries


def _two_qubit(rho) -> np.ndarray:
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if r.shape != (4, 4) or (isinstance(rho, DensityMatrix) and rho.dims != (2, 2)):
        raise DimensionError("a two-qubit state is required")
    return r


def correlation_matrix(rho) -> CorrelationMatrix:
    r = _two_qubit(rho)
    t = np.array([[np.trace(r @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS])
    return CorrelationMatrix(t)


def horodecki_value(rho) -> float:
    """Maximal CHSH value of a two-qubit state over projective qubit observables."""
    w = np.linalg.eigvalsh(correlation_matrix(rho).gram())
    return float(2 * np.sqrt(max(w[-1] + w[-2], 0.0)))


def horodecki_settings(rho):
    """Observables attaining :func:`horodecki_value` (Horodecki construction)."""
    t = correlation_matrix(rho).entries
    # T = U S V^T; optimal Bob directions span the top-2 right singular vectors
    u, s, vt = np.linalg.svd(t)
    c1, c2 = vt[0], vt[1]
    theta = np.arctan2(s[1], s[0])
    b1 = np.cos(theta) * c1 + np.sin(theta) * c2
    b2 = np.cos(theta) * c1 - np.sin(theta) * c2
    a1 = t @ (b1 + b2)
    a2 = t @ (b1 - b2)
    a1 = a1 if np.linalg.norm(a1) > 1e-12 else u[:, 0]
    a2 = a2 if np.linalg.norm(a2) > 1e-12 else u[:, 1]
    mk = DichotomicObservable.from_bloch
    return mk(a1), mk(a2), mk(b1), mk(b2)


def _as_affine(x) -> AffineRep:
    return affine_rep(x) if isinstance(x, KrausChannel) else x


def unital_is_chsh_breaking(ar: AffineRep | KrausChannel, atol: float = ATOL) -> bool:
    """``s1^2 + s2^2 <= 1`` for the two largest singular values of Lambda."""
    ar = _as_affine(ar)
    if not ar.is_unital(atol):
        raise ContractViolation("criterion only holds for unital channels (t = 0)")
    s = ar.singular_values()
    # 1/sqrt(2)^2 * 2 rounds to 1 + 2e-16; allow that
    return bool(s[0] ** 2 + s[1] ** 2 <= 1 + 1e-12)


def max_chsh_unital(ch: KrausChannel) -> float:
    """Largest CHSH value reachable through a unital qubit channel."""
    if not is_unital(ch):
        raise ContractViolation("max_chsh_unital requires a unital channel")
    s = affine_rep(ch).singular_values()
    return float(2 * np.sqrt(s[0] ** 2 + s[1] ** 2))


def amplitude_damping_threshold() -> float:
    return 0.5


def loss_threshold() -> float:
    return (np.sqrt(5) - 1) / 2


def erasure_threshold() -> float:
    return 0.5


def depolarizing_threshold() -> float:
    return 1 / np.sqrt(2)


THRESHOLDS = {
    "depolarizing": depolarizing_threshold,
    "amplitude_damping": amplitude_damping_threshold,
    "loss": loss_threshold,
    "erasure": erasure_threshold,
}


def erasure_chsh_expression(p: float, lam: float) -> float:
    """Best CHSH value through an erasure channel for input ``sqrt(l)|00> + sqrt(1-l)|11>``.

    The erased branch contributes ``2 (1 - p) <N1>`` with ``<N1> = 2 l - 1``.
    """
    if not (0 <= p <= 1 and 0.5 <= lam <= 1):
        raise ValueError("need p in [0, 1] and lam in [1/2, 1]")
    return float(2 * p * np.sqrt(1 + 4 * lam * (1 - lam)) + 2 * (1 - p) * (2 * lam - 1))


def erasure_max_chsh(p: float, step: float = 1e-4) -> tuple[float, float]:
    """Maximize :func:`erasure_chsh_expression` over ``lam``: dense grid, then refine."""
    grid = np.arange(0.5, 1.0 + step / 2, step)
    grid[-1] = min(grid[-1], 1.0)
    vals = np.array([erasure_chsh_expression(p, x) for x in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best_x, best_v = float(grid[i]), float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda x: -erasure_chsh_expression(p, x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        if -res.fun > best_v:
            best_x, best_v = float(res.x), float(-res.fun)
    return best_v, best_x
