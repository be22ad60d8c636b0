"""See-saw maximization of the CHSH value through a pair of channels.

Three blocks of variables are updated in turn, each in closed form:

* Alice's observables, from the sign of the eigenvalues of
  ``F_x = Tr_B[(I ⊗ (N1 ± N2)) sigma]``;
* Bob's observables, the same with roles swapped;
* the input state, as the top eigenvector of the Bell operator pulled back
  through the adjoint channels.

When the input is constrained to a product of two-qubit factors (the
bidirectional scenario), the state step alternates conditional updates:
each factor becomes the top eigenvector of the pulled-back Bell operator
contracted with the other factor. Every step is then monotone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .channels import PAULIS, KrausChannel, apply_local, identity_channel
from .chsh import DichotomicObservable, bell_matrix
from .linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    hermitian_eig,
    permute_subsystems,
    random_pure_state,
    random_unitary,
    swap_operator,
    tensor_product,
)

log = logging.getLogger(__name__)

LOCAL_BOUND = 2.0


@dataclass(frozen=True)
class SeesawConfig:
    epsilon: float = 0.1
    perturb_probability: float = 0.5
    stall_threshold: int = 10
    value_equality_tol: float = 1e-7
    max_iterations: int = 2000
    restarts: int = 20
    seed: int = 0
    # stop a restart after this many stalls in a row fail to improve its best value
    patience: int = 20
    # at a stall with nothing above the local bound: "reinit" draws a fresh
    # random state and observables, "kick" perturbs like any other stall
    trap_policy: str = "reinit"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.perturb_probability <= 1:
            raise ValueError("perturb_probability must lie in (0, 1]")
        for name in ("stall_threshold", "max_iterations", "restarts", "patience"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.value_equality_tol <= 0:
            raise ValueError("value_equality_tol must be positive")
        if self.trap_policy not in ("reinit", "kick"):
            raise ValueError("trap_policy must be 'reinit' or 'kick'")

    def with_overrides(self, **kw) -> "SeesawConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


@dataclass(frozen=True)
class Scenario:
    """How input subsystems are routed through channels to the two parties.

    ``in_dims`` are the prepared subsystems. ``channels`` maps input slot to
    the channel acting on it; untouched slots pass through. Output slots keep
    the input order; ``alice`` and ``bob`` list the output slots of each party
    and together define the cut permutation. ``factors`` (optional) groups
    contiguous input slots into independently prepared states.
    """

    in_dims: tuple[int, ...]
    channels: tuple[tuple[int, KrausChannel], ...]
    alice: tuple[int, ...]
    bob: tuple[int, ...]
    factors: tuple[tuple[int, ...], ...] | None = None
    symmetric: bool = False

    def __post_init__(self):
        n = len(self.in_dims)
        if sorted(self.alice + self.bob) != list(range(n)):
            raise DimensionError("alice and bob slots must partition the subsystems")
        for slot, ch in self.channels:
            if self.in_dims[slot] != ch.in_dim:
                raise DimensionError(f"channel on slot {slot} expects dim {ch.in_dim}")
        if self.factors is not None:
            flat = [s for f in self.factors for s in f]
            if flat != list(range(n)):
                raise DimensionError("factors must be contiguous and cover every slot in order")
        if self.symmetric and (self.factors is None or len(self.factors) != 2):
            raise DimensionError("symmetric mode needs exactly two factors")

    @property
    def out_dims(self) -> tuple[int, ...]:
        d = list(self.in_dims)
        for slot, ch in self.channels:
            d[slot] = ch.out_dim
        return tuple(d)

    @property
    def perm(self) -> list[int]:
        return list(self.alice + self.bob)

    @property
    def cut_dims(self) -> tuple[int, int]:
        od = self.out_dims
        return int(np.prod([od[i] for i in self.alice])), int(np.prod([od[i] for i in self.bob]))

    @property
    def factor_dims(self) -> list[int]:
        return [int(np.prod([self.in_dims[s] for s in f])) for f in self.factors]

    def output(self, rho: np.ndarray) -> np.ndarray:
        """Channel output in cut order ``(Alice's slots) ⊗ (Bob's slots)``."""
        d = int(np.prod(self.out_dims))
        return (self._superop @ np.asarray(rho).reshape(-1)).reshape(d, d)

    def pull_back(self, bell: np.ndarray) -> np.ndarray:
        """Adjoint channels applied to a cut-ordered operator; result on the input space."""
        # Tr(B S[rho]) = Tr(W rho) with vec(W^T) = S^T vec(B^T)
        d = int(np.prod(self.in_dims))
        w = (self._superop.T @ np.asarray(bell).T.reshape(-1)).reshape(d, d).T
        return (w + w.conj().T) / 2

    def output_direct(self, rho: np.ndarray) -> np.ndarray:
        """Same as :meth:`output`, applying each Kraus set in turn."""
        m, dims = rho, self.in_dims
        for slot, ch in self.channels:
            m, dims = apply_local(m, dims, slot, ch.kraus_ops)
        return permute_subsystems(m, dims, self.perm)

    def pull_back_direct(self, bell: np.ndarray) -> np.ndarray:
        od = self.out_dims
        cut_order = [od[i] for i in self.perm]
        inv = list(np.argsort(self.perm))
        m, dims = permute_subsystems(bell, cut_order, inv), od
        for slot, ch in self.channels:
            m, dims = apply_local(m, dims, slot, ch.adjoint_ops)
        return (m + m.conj().T) / 2

    @cached_property
    def _superop(self) -> np.ndarray:
        d = int(np.prod(self.in_dims))
        cols = []
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1
                cols.append(self.output_direct(e).reshape(-1))
        return np.column_stack(cols)


def single_channel_scenario(ch: KrausChannel) -> Scenario:
    """Alice keeps slot 0 and sends slot 1 through ``ch``."""
    return Scenario((2, ch.in_dim), ((1, ch),), alice=(0,), bob=(1,))


def unidirectional_scenario(ch1: KrausChannel, ch2: KrausChannel) -> Scenario:
    """Input ``(A, Ã, A', Ã')``; ``Ã -> B`` via ``ch1`` and ``Ã' -> B'`` via ``ch2``."""
    return Scenario((2, 2, 2, 2), ((1, ch1), (3, ch2)), alice=(0, 2), bob=(1, 3))


def bidirectional_scenario(ch1: KrausChannel, ch2: KrausChannel, symmetric: bool = False) -> Scenario:
    """Input ``rho1^(A, A') ⊗ rho2^(B, B')``; ``A' -> B`` via ``ch1``, ``B -> A'`` via ``ch2``.

    Output slots read ``(A, B, A', B')``.
    """
    return Scenario(
        (2, 2, 2, 2), ((1, ch1), (2, ch2)), alice=(0, 2), bob=(1, 3), factors=((0, 1), (2, 3)),
        symmetric=symmetric,
    )


def observable_from_operator(f: np.ndarray, traceless: bool = False) -> DichotomicObservable:
    """The dichotomic ``M`` maximizing ``Tr(M F)``: eigenvalues of ``F`` replaced by their signs.

    With ``traceless=True`` (qubits only) the maximum is taken over ``n . sigma``
    instead, which excludes the trivial observables ``+-I``.
    """
    if traceless:
        f = np.asarray(f)
        if f.shape != (2, 2):
            raise DimensionError("traceless update is defined for qubit observables")
        n = np.array([np.trace(f @ s).real for s in PAULIS])
        norm = np.linalg.norm(n)
        n = n / norm if norm > 1e-14 else np.array([0.0, 0.0, 1.0])
        return DichotomicObservable(sum(c * s for c, s in zip(n, PAULIS)))
    w, v = hermitian_eig(f, atol=1e-8)
    s = np.where(w >= 0, 1.0, -1.0)
    m = (v * s) @ v.conj().T
    return DichotomicObservable((m + m.conj().T) / 2)


def _alice_operators(sigma: np.ndarray, dims, n1, n2):
    da, db = dims
    t = sigma.reshape(da, db, da, db)
    n1, n2 = np.asarray(n1), np.asarray(n2)
    f1 = np.einsum("bd,idjb->ij", n1 + n2, t)
    f2 = np.einsum("bd,idjb->ij", n1 - n2, t)
    return (f1 + f1.conj().T) / 2, (f2 + f2.conj().T) / 2


def _bob_operators(sigma: np.ndarray, dims, m1, m2):
    da, db = dims
    t = sigma.reshape(da, db, da, db)
    m1, m2 = np.asarray(m1), np.asarray(m2)
    g1 = np.einsum("ik,kbic->bc", m1, t) + np.einsum("ik,kbic->bc", m2, t)
    g2 = np.einsum("ik,kbic->bc", m1, t) - np.einsum("ik,kbic->bc", m2, t)
    return (g1 + g1.conj().T) / 2, (g2 + g2.conj().T) / 2


def _sigma(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x)


def _obs(x) -> np.ndarray:
    return x.matrix if isinstance(x, DichotomicObservable) else np.asarray(x)


def update_observables_A(sigma, n1, n2, cut: Sequence[int], traceless: bool = False):
    """Optimal ``(M1, M2)`` for fixed state and Bob observables.

    ``cut = (d_A, d_B)`` are the dimensions of the two parties; ``sigma`` is
    in cut order.
    """
    f1, f2 = _alice_operators(_sigma(sigma), cut, _obs(n1), _obs(n2))
    return observable_from_operator(f1, traceless), observable_from_operator(f2, traceless)


def update_observables_B(sigma, m1, m2, cut: Sequence[int], traceless: bool = False):
    """Optimal ``(N1, N2)`` for fixed state and Alice observables.

    Writing ``B = (M1 + M2) ⊗ N1 + (M1 - M2) ⊗ N2``, each ``N_y`` is the sign
    of the corresponding partial trace.
    """
    g1, g2 = _bob_operators(_sigma(sigma), cut, _obs(m1), _obs(m2))
    return observable_from_operator(g1, traceless), observable_from_operator(g2, traceless)


def update_state_unidirectional(bell, ch1: KrausChannel, ch2: KrausChannel) -> PureState:
    """Best input for a fixed Bell operator on ``AA':BB'`` (unidirectional layout)."""
    b = bell.matrix if hasattr(bell, "matrix") else np.asarray(bell)
    sc = unidirectional_scenario(ch1, ch2)
    _, v = hermitian_eig(sc.pull_back(b), atol=1e-8)
    return PureState(sc.in_dims, v[:, 0])


def _effective_first(w: np.ndarray, d1: int, d2: int, rho2: np.ndarray) -> np.ndarray:
    t = w.reshape(d1, d2, d1, d2)
    x = np.einsum("iajb,ba->ij", t, rho2)
    return (x + x.conj().T) / 2


def _effective_second(w: np.ndarray, d1: int, d2: int, rho1: np.ndarray) -> np.ndarray:
    t = w.reshape(d1, d2, d1, d2)
    x = np.einsum("iajb,ji->ab", t, rho1)
    return (x + x.conj().T) / 2


def update_state_bidirectional(bell, ch1: KrausChannel, ch2: KrausChannel, fixed, fixed_factor: int = 1):
    """Optimal two-qubit factor given the other one.

    ``fixed_factor`` names the factor held constant (0 for ``rho^(AA')``,
    1 for ``rho^(BB')``); ``fixed`` is that factor's density matrix. Returns the
    updated factor as a :class:`PureState`.
    """
    b = bell.matrix if hasattr(bell, "matrix") else np.asarray(bell)
    sc = bidirectional_scenario(ch1, ch2)
    w = sc.pull_back(b)
    fixed = _sigma(fixed)
    if fixed_factor == 1:
        x = _effective_first(w, 4, 4, fixed)
    elif fixed_factor == 0:
        x = _effective_second(w, 4, 4, fixed)
    else:
        raise ValueError("fixed_factor must be 0 or 1")
    _, v = hermitian_eig(x, atol=1e-8)
    return PureState((2, 2), v[:, 0])


def perturb(rho, rho_star, epsilon: float) -> DensityMatrix:
    """Convex mixture ``(1 - eps) rho + eps rho_star``."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    r, rs = _sigma(rho), _sigma(rho_star)
    if r.shape != rs.shape:
        raise DimensionError("rho and rho_star must have the same shape")
    dims = rho.dims if isinstance(rho, DensityMatrix) else (r.shape[0],)
    return DensityMatrix(dims, (1 - epsilon) * r + epsilon * rs)


def random_kick_state(dims: Sequence[int], rng: np.random.Generator) -> DensityMatrix:
    """``U |lam><lam| U^dag`` with ``|lam> = sqrt(l)|01> + sqrt(1-l)|10>``, ``U`` Haar on the whole space.

    For more than two qubits ``|lam>`` is padded with ``|0...0>``.
    """
    dims = tuple(dims)
    d = int(np.prod(dims))
    lam = rng.uniform(0, 1)
    v = np.zeros(4, dtype=complex)
    v[1], v[2] = np.sqrt(lam), np.sqrt(1 - lam)
    if d > 4:
        pad = np.zeros(d // 4)
        pad[0] = 1
        v = np.kron(v, pad)
    u = random_unitary(d, rng)
    v = u @ v
    return DensityMatrix(dims, np.outer(v, v.conj()))


@dataclass
class SeesawResult:
    best_value: float
    best_state: np.ndarray
    best_observables: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    value_trace: list[tuple[int, float]] = field(repr=False)
    perturbations: list[int] = field(default_factory=list, repr=False)
    restart_index: int = 0
    converged: bool = True
    best_factors: tuple[np.ndarray, ...] | None = field(default=None, repr=False)
    iterations: int = 0
    restart_values: list[float] = field(default_factory=list)

    @property
    def observables(self) -> tuple[DichotomicObservable, ...]:
        return tuple(DichotomicObservable(m) for m in self.best_observables)

    def monotonicity_violations(self, tol: float = 1e-9) -> list[int]:
        """Trace positions where the value dropped without a perturbation in between."""
        kicked = set(self.perturbations)
        bad = []
        for k in range(1, len(self.value_trace)):
            (i0, v0), (i1, v1) = self.value_trace[k - 1], self.value_trace[k]
            # a perturbation is logged as the last entry of its iteration
            is_kick = i1 in kicked and (k + 1 == len(self.value_trace) or self.value_trace[k + 1][0] != i1)
            if v1 < v0 - tol and not is_kick:
                bad.append(k)
        return bad


# eigenvalues this close count as degenerate; loss from a random completion is
# at most a few times this, far below the monotonicity tolerance
_DEGENERACY_TOL = 1e-12


def _top_vector(m: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Top eigenvector; with ``rng``, a random unit vector of a degenerate top eigenspace."""
    w, v = np.linalg.eigh(m)
    if rng is None:
        return v[:, -1]
    tol = _DEGENERACY_TOL * max(1.0, abs(w[-1]))
    k = int(np.sum(w >= w[-1] - tol))
    if k == 1:
        return v[:, -1]
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    x = v[:, -k:] @ c
    return x / np.linalg.norm(x)


def _sign_matrix(f: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Sign of ``f``; with ``rng``, a random completion on its (numerical) kernel.

    Any completion on the kernel is optimal. Fixing it to +1 makes the
    all-identity strategy (value exactly 2) absorbing.
    """
    w, v = np.linalg.eigh(f)
    s = np.where(w >= 0, 1.0, -1.0)
    if rng is not None:
        tol = _DEGENERACY_TOL * max(1.0, float(np.max(np.abs(w))))
        ker = np.abs(w) <= tol
        nk = int(ker.sum())
        if nk:
            u = random_unitary(nk, rng)
            vk = v[:, ker] @ u
            sk = rng.choice([-1.0, 1.0], size=nk)
            m = (v[:, ~ker] * s[~ker]) @ v[:, ~ker].conj().T + (vk * sk) @ vk.conj().T
            return (m + m.conj().T) / 2
    m = (v * s) @ v.conj().T
    return (m + m.conj().T) / 2


class _Run:
    """Mutable state of a single see-saw restart; hot path skips validation."""

    def __init__(self, sc: Scenario, cfg: SeesawConfig, rng: np.random.Generator,
                 init_state=None, init_observables=None):
        self.sc, self.cfg, self.rng = sc, cfg, rng
        self.cut = sc.cut_dims
        self.factors = None
        self.rho = None
        if init_state is not None:
            if sc.factors:
                self.factors = [_sigma(f).astype(complex) for f in init_state]
            else:
                self.rho = _sigma(init_state).astype(complex)
        else:
            self.randomize_state()
        if init_observables is not None:
            self.obs = [_obs(o).astype(complex) for o in init_observables]
        else:
            self.randomize_observables()
        self._refresh_sigma()
        self._refresh_bell()

    def randomize_state(self):
        sc, rng = self.sc, self.rng
        if sc.factors:
            self.factors = [
                random_pure_state([sc.in_dims[s] for s in f], rng).density_matrix().matrix for f in sc.factors
            ]
            if sc.symmetric:
                f = swap_operator(2)
                self.factors[1] = f @ self.factors[0] @ f
        else:
            self.rho = random_pure_state(sc.in_dims, rng).density_matrix().matrix

    def randomize_observables(self):
        da, db = self.cut
        self.obs = [DichotomicObservable.random(d, self.rng).matrix for d in (da, da, db, db)]

    def reinitialize(self):
        self.randomize_state()
        self.randomize_observables()
        self._refresh_sigma()
        self._refresh_bell()

    @property
    def state(self) -> np.ndarray:
        if self.factors is not None:
            return np.kron(self.factors[0], self.factors[1]) if len(self.factors) == 2 else \
                tensor_product(*self.factors)
        return self.rho

    def _refresh_sigma(self):
        self.sigma = self.sc.output(self.state)

    def _refresh_bell(self):
        self.bell = bell_matrix(*self.obs)

    def value(self) -> float:
        return float(np.einsum("ij,ji->", self.bell, self.sigma).real)

    def step_alice(self):
        f1, f2 = _alice_operators(self.sigma, self.cut, self.obs[2], self.obs[3])
        self.obs[0], self.obs[1] = _sign_matrix(f1, self.rng), _sign_matrix(f2, self.rng)
        self._refresh_bell()

    def step_bob(self):
        g1, g2 = _bob_operators(self.sigma, self.cut, self.obs[0], self.obs[1])
        self.obs[2], self.obs[3] = _sign_matrix(g1, self.rng), _sign_matrix(g2, self.rng)
        self._refresh_bell()

    def step_state(self):
        w = self.sc.pull_back(self.bell)
        if self.factors is None:
            v = _top_vector(w, self.rng)
            self.rho = np.outer(v, v.conj())
        elif self.sc.symmetric:
            self._step_symmetric(w)
        else:
            d1, d2 = self.sc.factor_dims
            v = _top_vector(_effective_first(w, d1, d2, self.factors[1]), self.rng)
            self.factors[0] = np.outer(v, v.conj())
            v = _top_vector(_effective_second(w, d1, d2, self.factors[0]), self.rng)
            self.factors[1] = np.outer(v, v.conj())
        self._refresh_sigma()

    def _step_symmetric(self, w: np.ndarray):
        # rho2 = F rho1 F: ascend f(psi) = <psi ⊗ F psi| W |psi ⊗ F psi> by a
        # backtracking step toward the top eigenvector of its symmetrized linearization
        f = swap_operator(2)
        d1, d2 = self.sc.factor_dims

        def objective(r1):
            return float(np.einsum("ij,ji->", _effective_first(w, d1, d2, f @ r1 @ f), r1).real)

        r1 = self.factors[0]
        cur = objective(r1)
        x = (_effective_first(w, d1, d2, f @ r1 @ f) + f @ _effective_second(w, d1, d2, r1) @ f) / 2
        target = _top_vector(x)
        old = _top_vector(r1)
        overlap = np.vdot(old, target)
        if abs(overlap) > 0:
            target = target * np.conj(overlap) / abs(overlap)
        t = 1.0
        while t > 1e-6:
            cand = (1 - t) * old + t * target
            cand /= np.linalg.norm(cand)
            r = np.outer(cand, cand.conj())
            if objective(r) >= cur - 1e-13:
                self.factors[0] = r
                self.factors[1] = f @ r @ f
                return
            t /= 2

    def kick(self):
        eps = self.cfg.epsilon
        if self.factors is None:
            star = random_kick_state(self.sc.in_dims, self.rng).matrix
            self.rho = (1 - eps) * self.rho + eps * star
        else:
            for k, slots in enumerate(self.sc.factors):
                if self.sc.symmetric and k == 1:
                    f = swap_operator(2)
                    self.factors[1] = f @ self.factors[0] @ f
                    break
                star = random_kick_state([self.sc.in_dims[s] for s in slots], self.rng).matrix
                self.factors[k] = (1 - eps) * self.factors[k] + eps * star
        self._refresh_sigma()

    def restore(self, snap):
        st, obs, fac = snap
        self.obs = [o.copy() for o in obs]
        if fac is not None:
            self.factors = [f.copy() for f in fac]
        else:
            self.rho = st.copy()
        self._refresh_sigma()
        self._refresh_bell()

    def snapshot(self):
        st = self.state.copy()
        fac = tuple(f.copy() for f in self.factors) if self.factors is not None else None
        return st, tuple(o.copy() for o in self.obs), fac


def _run_once(sc: Scenario, cfg: SeesawConfig, seed: int, restart_index: int = 0,
              init_state=None, init_observables=None) -> SeesawResult:
    rng = np.random.default_rng(seed)
    run = _Run(sc, cfg, rng, init_state, init_observables)
    steps = (run.step_alice, run.step_state, run.step_bob, run.step_state)
    trace: list[tuple[int, float]] = []
    kicks: list[int] = []
    val = run.value()
    trace.append((0, val))
    best_val, best = val, run.snapshot()
    last_round = val
    stall = 0
    stale = 0
    best_at_kick = -np.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        for step in steps:
            step()
            val = run.value()
            trace.append((it, val))
            if val > best_val:
                best_val, best = val, run.snapshot()
        if abs(val - last_round) <= cfg.value_equality_tol:
            stall += 1
        else:
            stall = 0
        last_round = val
        if stall < cfg.stall_threshold:
            continue
        stall = 0
        if best_val > best_at_kick + cfg.value_equality_tol:
            stale = 0
            best_at_kick = best_val
        else:
            stale += 1
        if stale >= cfg.patience:
            converged = True
            break
        if best_val <= LOCAL_BOUND + cfg.value_equality_tol and cfg.trap_policy == "reinit":
            run.reinitialize()
        elif rng.random() < cfg.perturb_probability:
            if val < best_val - cfg.value_equality_tol:
                run.restore(best)
            run.kick()
        else:
            continue
        kicks.append(it)
        val = run.value()
        trace.append((it, val))
        last_round = val
    state, obs, fac = best
    return SeesawResult(
        best_value=float(best_val),
        best_state=state,
        best_observables=obs,
        value_trace=trace,
        perturbations=kicks,
        restart_index=restart_index,
        converged=converged,
        best_factors=fac,
        iterations=it,
    )


def _worker(args):
    sc, cfg, seed, r = args
    return _run_once(sc, cfg, seed, r)


def run_scenario(sc: Scenario, config: SeesawConfig | None = None, n_jobs: int = 1,
                 init_state=None, init_observables=None) -> SeesawResult:
    """All restarts of the see-saw on one scenario; the best restart wins.

    Restart ``r`` uses seed ``config.seed + r`` so results do not depend on
    ``n_jobs``.
    """
    cfg = config or SeesawConfig()
    if init_state is not None or init_observables is not None:
        return _run_once(sc, cfg, cfg.seed, 0, init_state, init_observables)
    jobs = [(sc, cfg, cfg.seed + r, r) for r in range(cfg.restarts)]
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(n_jobs) as ex:
            results = list(ex.map(_worker, jobs))
    else:
        results = [_worker(j) for j in jobs]
    vals = [r.best_value for r in results]
    best = results[int(np.argmax(vals))]
    best.restart_values = vals
    log.debug("restart values %s", vals)
    return best


def run_seesaw(protocol: str, ch1: KrausChannel, ch2: KrausChannel | None = None,
               config: SeesawConfig | None = None, n_jobs: int = 1, symmetric: bool = False) -> SeesawResult:
    """Maximize the CHSH value over states and observables for ``protocol``.

    ``protocol`` is ``"single_channel"``, ``"unidirectional"`` or
    ``"bidirectional"``. In single-channel mode ``ch2`` is ignored.
    """
    if protocol == "single_channel":
        sc = single_channel_scenario(ch1)
    elif protocol == "unidirectional":
        sc = unidirectional_scenario(ch1, ch2 if ch2 is not None else identity_channel())
    elif protocol == "bidirectional":
        sc = bidirectional_scenario(ch1, ch2 if ch2 is not None else identity_channel(), symmetric)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    return run_scenario(sc, config, n_jobs)


def optimize_observables(rho, dims: Sequence[int], seed=0, iterations: int = 500, tol: float = 1e-13,
                         starts: int = 4, traceless: bool = False):
    """Alternating observable updates with the state held fixed.

    Returns ``(value, (M1, M2, N1, N2))``, the best of ``starts`` random
    initializations. ``traceless=True`` restricts qubit parties to
    ``n . sigma`` observables, the setting of :func:`~.chsh.horodecki_value`.
    """
    r = _sigma(rho)
    rng = np.random.default_rng(seed)
    da, db = dims

    def init(d):
        if traceless:
            return DichotomicObservable.from_bloch(rng.standard_normal(3)).matrix
        return DichotomicObservable.random(d, rng).matrix

    best = (-np.inf, None)
    for _ in range(starts):
        obs = [init(d) for d in (da, da, db, db)]
        prev = -np.inf
        for _ in range(iterations):
            m1, m2 = update_observables_A(r, obs[2], obs[3], dims, traceless)
            obs[0], obs[1] = m1.matrix, m2.matrix
            n1, n2 = update_observables_B(r, obs[0], obs[1], dims, traceless)
            obs[2], obs[3] = n1.matrix, n2.matrix
            val = float(np.einsum("ij,ji->", bell_matrix(*obs), r).real)
            if val - prev <= tol:
                break
            prev = val
        if val > best[0]:
            best = (val, tuple(obs))
    return best
