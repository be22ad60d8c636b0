"""Qubit channel families, their action on subsystems, and the Bloch picture.

Erasure channels output a qutrit ordered as ``(|0>, |1>, |e>)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Sequence

import numpy as np

from .linalg import (
    ATOL,
    ContractViolation,
    DensityMatrix,
    DimensionError,
    hermitian_eig,
    is_hermitian,
    matrices_close,
    partial_transpose_matrix,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

CP_FLOOR = -1e-8

FAMILIES = ("depolarizing", "amplitude_damping", "loss", "erasure")
_ALIASES = {
    "dep": "depolarizing",
    "depolarizing": "depolarizing",
    "ad": "amplitude_damping",
    "amp": "amplitude_damping",
    "amplitude_damping": "amplitude_damping",
    "loss": "loss",
    "l": "loss",
    "er": "erasure",
    "erasure": "erasure",
}
_SHORT = {"depolarizing": "dep", "amplitude_damping": "ad", "loss": "loss", "erasure": "er"}


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelParam:
    """A channel family together with its transmission parameter ``p``."""

    family: str
    p: float

    def __post_init__(self):
        fam = _ALIASES.get(self.family)
        if fam is None:
            raise ParameterError(f"unknown channel family {self.family!r}")
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p={p} outside [0, 1]")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, text: str) -> "ChannelParam":
        """Parse ``family:p``, e.g. ``ad:0.5`` or ``dep:0.70710678``."""
        m = re.fullmatch(r"\s*([A-Za-z_]+)\s*:\s*([0-9eE.+-]+)\s*", text)
        if m is None:
            raise ParameterError(f"cannot parse channel spec {text!r}; expected family:p")
        try:
            p = Decimal(m.group(2))
        except InvalidOperation:
            raise ParameterError(f"invalid number in channel spec {text!r}") from None
        return cls(m.group(1).lower(), float(p))

    def spec(self) -> str:
        return f"{_SHORT[self.family]}:{self.p!r}"

    def make(self) -> "KrausChannel":
        return make_channel(self)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CPTP map given by Kraus operators of shape ``(out_dim, in_dim)``."""

    in_dim: int
    out_dim: int
    kraus_ops: tuple[np.ndarray, ...]
    label: str = ""
    param: ChannelParam | None = field(default=None, compare=False)

    def __post_init__(self):
        ops = []
        for k in self.kraus_ops:
            k = np.array(k, dtype=complex)
            if k.shape != (self.out_dim, self.in_dim):
                raise DimensionError(
                    f"Kraus operator shape {k.shape} != ({self.out_dim}, {self.in_dim})"
                )
            k.setflags(write=False)
            ops.append(k)
        object.__setattr__(self, "kraus_ops", tuple(ops))

    @property
    def adjoint_ops(self) -> tuple[np.ndarray, ...]:
        return tuple(k.conj().T for k in self.kraus_ops)

    def is_trace_preserving(self, atol: float = ATOL) -> bool:
        s = sum(k.conj().T @ k for k in self.kraus_ops)
        return matrices_close(s, np.eye(self.in_dim), atol)

    def choi(self) -> np.ndarray:
        """Unnormalized Choi matrix ``sum_ij |i><j| ⊗ E(|i><j|)``."""
        d = self.in_dim
        c = np.zeros((d * self.out_dim, d * self.out_dim), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d))
                e[i, j] = 1
                c += np.kron(e, self(e))
        return c

    def is_completely_positive(self, floor: float = CP_FLOOR) -> bool:
        return hermitian_eig(self.choi(), atol=1e-8)[0][-1] >= floor

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    def adjoint(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs)
        return sum(k.conj().T @ obs @ k for k in self.kraus_ops)

    def __eq__(self, other):
        # Kraus decompositions are not unique; compare the maps instead
        if not isinstance(other, KrausChannel):
            return NotImplemented
        return (
            self.in_dim == other.in_dim
            and self.out_dim == other.out_dim
            and matrices_close(self.choi(), other.choi(), 1e-9)
        )

    __hash__ = None


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d),), label="id")


def _check_p(p) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p={p} outside [0, 1]")
    return p


def make_depolarizing(p: float) -> KrausChannel:
    """``X -> p X + (1 - p) tr(X) I/2``."""
    p = _check_p(p)
    ops = [np.sqrt((1 + 3 * p) / 4) * I2] + [np.sqrt((1 - p) / 4) * s for s in PAULIS]
    return KrausChannel(2, 2, tuple(ops), f"dep:{p!r}", ChannelParam("depolarizing", p))


def make_amplitude_damping(p: float) -> KrausChannel:
    """Amplitude damping that keeps the excitation with probability ``p``."""
    p = _check_p(p)
    e1 = np.array([[1, 0], [0, np.sqrt(p)]])
    e2 = np.array([[0, np.sqrt(1 - p)], [0, 0]])
    return KrausChannel(2, 2, (e1, e2), f"ad:{p!r}", ChannelParam("amplitude_damping", p))


def make_loss(p: float) -> KrausChannel:
    """Transmit with probability ``p``, otherwise replace the input by ``|0>``."""
    p = _check_p(p)
    q = np.sqrt(1 - p)
    ops = (np.sqrt(p) * I2, q * np.array([[1, 0], [0, 0]]), q * np.array([[0, 1], [0, 0]]))
    return KrausChannel(2, 2, ops, f"loss:{p!r}", ChannelParam("loss", p))


def make_erasure(p: float) -> KrausChannel:
    """Transmit with probability ``p``, otherwise output the flag ``|e>``."""
    p = _check_p(p)
    q = np.sqrt(1 - p)
    e1 = np.sqrt(p) * np.array([[1, 0], [0, 1], [0, 0]])
    e2 = q * np.array([[0, 0], [0, 0], [1, 0]])
    e3 = q * np.array([[0, 0], [0, 0], [0, 1]])
    return KrausChannel(2, 3, (e1, e2, e3), f"er:{p!r}", ChannelParam("erasure", p))


_MAKERS = {
    "depolarizing": make_depolarizing,
    "amplitude_damping": make_amplitude_damping,
    "loss": make_loss,
    "erasure": make_erasure,
}


def make_channel(param: ChannelParam | str) -> KrausChannel:
    if isinstance(param, str):
        param = ChannelParam.parse(param)
    return _MAKERS[param.family](param.p)


def apply_local(
    mat: np.ndarray, dims: Sequence[int], target: int, ops: Sequence[np.ndarray]
) -> tuple[np.ndarray, tuple[int, ...]]:
    """``sum_k K_k X K_k^dag`` with every ``K_k`` acting on subsystem ``target``.

    Returns the new matrix and the new dims (``target`` resized to the
    operators' row count).
    """
    dims = list(dims)
    n = len(dims)
    if not 0 <= target < n:
        raise DimensionError(f"target {target} out of range for {n} subsystems")
    ops = [np.asarray(k) for k in ops]
    if ops[0].shape[1] != dims[target]:
        raise DimensionError(
            f"operator input dim {ops[0].shape[1]} != subsystem dim {dims[target]}"
        )
    k = np.stack(ops)
    t = np.asarray(mat).reshape(dims + dims)
    # sublist einsum: Kraus index 2n, new row/col labels 2n+1, 2n+2
    row_in, col_in = list(range(n)), list(range(n, 2 * n))
    out_labels = row_in + col_in
    out_labels[target], out_labels[n + target] = 2 * n + 1, 2 * n + 2
    out = np.einsum(k, [2 * n, 2 * n + 1, target], t, row_in + col_in,
                    k.conj(), [2 * n, 2 * n + 2, n + target], out_labels)
    new_dims = list(dims)
    new_dims[target] = ops[0].shape[0]
    d = int(np.prod(new_dims))
    return out.reshape(d, d), tuple(new_dims)


def apply(ch: KrausChannel, rho: DensityMatrix, target: int) -> DensityMatrix:
    """Apply ``ch`` to subsystem ``target`` of ``rho``."""
    if not 0 <= target < len(rho.dims):
        raise DimensionError(f"target {target} out of range")
    if rho.dims[target] != ch.in_dim:
        raise DimensionError(f"subsystem {target} has dim {rho.dims[target]}, channel expects {ch.in_dim}")
    m, dims = apply_local(rho.matrix, rho.dims, target, ch.kraus_ops)
    return DensityMatrix(dims, m, check=False)


def adjoint_apply(ch: KrausChannel, obs: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """Heisenberg-picture action ``sum_k E_k^dag O E_k`` on subsystem ``target``.

    ``dims`` are the output-side dims of ``obs``; the result lives on the
    input side.
    """
    dims = tuple(dims)
    if not is_hermitian(obs, 1e-8):
        raise ContractViolation("adjoint_apply expects a Hermitian observable")
    if dims[target] != ch.out_dim:
        raise DimensionError(f"subsystem {target} has dim {dims[target]}, channel outputs {ch.out_dim}")
    m, _ = apply_local(obs, dims, target, ch.adjoint_ops)
    return m


@dataclass(frozen=True, eq=False)
class AffineRep:
    """Bloch-picture form ``v -> t + L v`` of a qubit channel."""

    t: np.ndarray
    lam: np.ndarray

    def __call__(self, v) -> np.ndarray:
        return self.t + self.lam @ np.asarray(v, dtype=float)

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.lam, compute_uv=False)

    def is_unital(self, atol: float = ATOL) -> bool:
        return bool(np.linalg.norm(self.t) <= atol)


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho)
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def bloch_state(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return (I2 + v[0] * SX + v[1] * SY + v[2] * SZ) / 2


def affine_rep(ch: KrausChannel) -> AffineRep:
    """Pauli-basis tomography of a qubit-to-qubit channel."""
    if ch.in_dim != 2 or ch.out_dim != 2:
        raise DimensionError("affine_rep needs a qubit-to-qubit channel")
    t = bloch_vector(ch(I2 / 2))
    # E(sigma_j)/2 carries column j of Lambda
    lam = np.column_stack([bloch_vector(ch(s / 2)) for s in PAULIS])
    return AffineRep(t, lam)


def is_unital(ch: KrausChannel, atol: float = ATOL) -> bool:
    if ch.in_dim != ch.out_dim:
        raise DimensionError("unitality needs a square channel")
    d = ch.in_dim
    return matrices_close(ch(np.eye(d) / d), np.eye(d) / d, atol)


def is_entanglement_breaking_qubit(ch: KrausChannel, floor: float = CP_FLOOR) -> bool:
    """PPT test on the Choi matrix, exact for 2x2."""
    if ch.in_dim != 2 or ch.out_dim != 2:
        raise DimensionError("PPT criterion is only decisive for qubit channels")
    c = ch.choi() / 2
    pt = partial_transpose_matrix(c, (2, 2), 1)
    return bool(hermitian_eig(pt, atol=1e-8)[0][-1] >= floor)
