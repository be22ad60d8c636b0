"""Dense linear algebra on small multipartite Hilbert spaces.

Subsystems are always ordered as declared in ``dims``; an operator on
``dims = (d0, d1, ...)`` uses the Kronecker ordering ``d0 ⊗ d1 ⊗ ...``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-10
EIG_ATOL = 1e-8


class DimensionError(ValueError):
    """Raised when subsystem dimensions do not line up."""


class ContractViolation(ValueError):
    """Raised when an input breaks a documented precondition."""


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {m.shape}")
    return m


def is_hermitian(m, atol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=atol)


def matrices_close(a, b, atol: float = ATOL) -> bool:
    """Entrywise comparison with an absolute tolerance."""
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and bool(np.max(np.abs(a - b), initial=0.0) <= atol)


@dataclass(frozen=True)
class DensityMatrix:
    """A normalized positive semidefinite operator on ``prod(dims)``.

    The invariants are validated on construction. Pass ``check=False`` only
    for states produced by trusted internal code paths.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    atol: float = field(default=ATOL, repr=False, compare=False)
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        m = _as_matrix(self.matrix)
        total = int(np.prod(dims))
        if m.shape != (total, total):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)
        if self.check:
            self.validate(self.atol)

    def validate(self, atol: float = ATOL) -> None:
        m = self.matrix
        if not is_hermitian(m, atol):
            raise ContractViolation("density matrix is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1) > atol:
            raise ContractViolation(f"density matrix has trace {tr}")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if lo < -atol:
            raise ContractViolation(f"density matrix has negative eigenvalue {lo}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        v = psi.amplitudes
        return cls(psi.dims, np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        d = int(np.prod(dims))
        return cls(tuple(dims), np.eye(d) / d)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.dims == other.dims and matrices_close(self.matrix, other.matrix, self.atol)

    __hash__ = None


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)
    atol: float = field(default=ATOL, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if v.size != int(np.prod(dims)):
            raise DimensionError(f"{v.size} amplitudes do not match dims {dims}")
        n = np.vdot(v, v).real
        if abs(n - 1) > self.atol:
            raise ContractViolation(f"state has squared norm {n}")
        v.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", v)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dims == other.dims and matrices_close(self.amplitudes, other.amplitudes, self.atol)

    __hash__ = None


def tensor_product(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def tensor_states(*states: DensityMatrix) -> DensityMatrix:
    dims = tuple(d for s in states for d in s.dims)
    return DensityMatrix(dims, tensor_product(*(s.matrix for s in states)), check=False)


def _check_indices(indices, n: int) -> list[int]:
    idx = [int(i) for i in indices]
    if not idx or len(set(idx)) != len(idx) or any(i < 0 or i >= n for i in idx):
        raise DimensionError(f"invalid subsystem indices {list(indices)} for {n} subsystems")
    return idx


def partial_trace_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not in ``keep``; kept order follows ``keep``."""
    dims = list(dims)
    n = len(dims)
    keep = _check_indices(keep, n)
    t = np.asarray(m).reshape(dims + dims)
    # traced pairs share an einsum label
    labels_row = list(range(n))
    labels_col = [n + i if i in keep else i for i in range(n)]
    out_labels = keep + [n + i for i in keep]
    res = np.einsum(t, labels_row + labels_col, out_labels)
    dk = int(np.prod([dims[i] for i in keep]))
    return res.reshape(dk, dk)


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = _check_indices(keep, len(rho.dims))
    m = partial_trace_matrix(rho.matrix, rho.dims, keep)
    return DensityMatrix(tuple(rho.dims[i] for i in keep), m, check=False)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder subsystems so that new subsystem ``k`` is old subsystem ``perm[k]``.

    Works for square operators and for state vectors.
    """
    dims = list(dims)
    n = len(dims)
    perm = list(perm)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"{perm} is not a permutation of {n} subsystems")
    m = np.asarray(m)
    d = int(np.prod(dims))
    if m.ndim == 1:
        return m.reshape(dims).transpose(perm).reshape(d)
    t = m.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    return t.reshape(d, d)


def swap_operator(d: int) -> np.ndarray:
    """The unitary exchanging two subsystems of dimension ``d``."""
    f = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1
    return f


def hermitian_eig(m, atol: float = ATOL, check_residual: bool = False):
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Returns ``(w, v)`` with orthonormal eigenvectors in the columns of ``v``.
    Equal eigenvalues keep LAPACK's (deterministic) column order reversed
    along with the spectrum.
    """
    m = _as_matrix(m)
    if not is_hermitian(m, atol):
        raise ContractViolation("hermitian_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w, v = w[::-1], v[:, ::-1]
    if check_residual:
        err = np.max(np.abs((v * w) @ v.conj().T - m))
        if err > EIG_ATOL:
            raise ContractViolation(f"eigendecomposition residual {err:.2e}")
    return w, v


def top_eigenvector(m) -> tuple[float, np.ndarray]:
    w, v = hermitian_eig(m, atol=1e-8)
    return float(w[0]), v[:, 0]


def random_pure_state(dims: Sequence[int], seed=None) -> PureState:
    """Haar-random pure state; ``seed`` may be an int or a ``numpy`` Generator."""
    rng = np.random.default_rng(seed)
    dims = tuple(int(d) for d in dims)
    d = int(np.prod(dims))
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(dims, v / np.linalg.norm(v))


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(dims: Sequence[int], seed=None, rank: int | None = None) -> DensityMatrix:
    """Random mixed state from the induced (Ginibre) measure."""
    rng = np.random.default_rng(seed)
    d = int(np.prod(dims))
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return DensityMatrix(tuple(dims), rho / np.trace(rho).real)


def random_hermitian(d: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def partial_transpose_matrix(m: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    dims = list(dims)
    n = len(dims)
    axes = list(range(2 * n))
    axes[target], axes[n + target] = axes[n + target], axes[target]
    d = int(np.prod(dims))
    return np.asarray(m).reshape(dims + dims).transpose(axes).reshape(d, d)
