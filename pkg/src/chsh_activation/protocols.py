"""Activation scenarios built on the see-saw optimizer.

Subsystem layout (all protocols): the output state lives on
``(A, B, A', B')`` and is measured across the ``AA' : BB'`` cut.

* unidirectional: Alice prepares ``(A, Ã, A', Ã')`` and sends
  ``Ã -> B`` through channel 1 and ``Ã' -> B'`` through channel 2;
* bidirectional: Alice prepares ``rho1`` on ``(A, A')`` and sends ``A' -> B``
  through channel 1; Bob prepares ``rho2`` on ``(B, B')`` and sends
  ``B -> A'`` through channel 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import ChannelParam, KrausChannel, apply, make_channel
from .chsh import THRESHOLDS, bell_matrix, chsh_value, horodecki_value
from .linalg import (
    ContractViolation,
    DensityMatrix,
    DimensionError,
    matrices_close,
    permute_subsystems,
    swap_operator,
    tensor_product,
    tensor_states,
)
from .seesaw import (
    LOCAL_BOUND,
    Scenario,
    SeesawConfig,
    SeesawResult,
    bidirectional_scenario,
    run_scenario,
    single_channel_scenario,
    unidirectional_scenario,
)

log = logging.getLogger(__name__)

DECISION_TOL = 1e-4
KINDS = ("single_channel", "unidirectional", "bidirectional")


@dataclass(frozen=True)
class ProtocolDescriptor:
    kind: str
    channel1: ChannelParam
    channel2: ChannelParam | None = None
    # bidirectional only: restrict inputs to rho2 = F rho1 F
    symmetric: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.kind == "single_channel":
            if self.channel2 is not None:
                raise ValueError("single_channel takes one channel")
        elif self.channel2 is None:
            raise ValueError(f"{self.kind} needs two channels")
        if self.symmetric and (self.kind != "bidirectional" or self.channel1 != self.channel2):
            raise ValueError("symmetric inputs need a bidirectional protocol with identical channels")
        perm = self.subsystem_layout
        if sorted(perm) != list(range(len(perm))):
            raise ValueError("subsystem layout is not a permutation")

    @property
    def subsystem_layout(self) -> tuple[int, ...]:
        """Output subsystems reordered into ``(Alice's, Bob's)`` cut order."""
        return (0, 1) if self.kind == "single_channel" else (0, 2, 1, 3)

    def channels(self) -> tuple[KrausChannel, KrausChannel | None]:
        ch2 = make_channel(self.channel2) if self.channel2 is not None else None
        return make_channel(self.channel1), ch2

    def scenario(self) -> Scenario:
        ch1, ch2 = self.channels()
        if self.kind == "single_channel":
            return single_channel_scenario(ch1)
        if self.kind == "unidirectional":
            return unidirectional_scenario(ch1, ch2)
        return bidirectional_scenario(ch1, ch2, self.symmetric)

    def with_params(self, p1: float, p2: float | None = None) -> "ProtocolDescriptor":
        c2 = None if self.channel2 is None else ChannelParam(self.channel2.family, p2)
        return ProtocolDescriptor(self.kind, ChannelParam(self.channel1.family, p1), c2, self.symmetric)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "channel1": self.channel1.spec(),
            "channel2": None if self.channel2 is None else self.channel2.spec(),
            "symmetric": self.symmetric,
            "subsystem_layout": list(self.subsystem_layout),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProtocolDescriptor":
        c2 = d.get("channel2")
        return cls(d["kind"], ChannelParam.parse(d["channel1"]),
                   None if c2 is None else ChannelParam.parse(c2), bool(d.get("symmetric", False)))


@dataclass
class ActivationResult:
    descriptor: ProtocolDescriptor
    best_value: float
    breaking_status_1: bool
    breaking_status_2: bool
    activated: bool
    converged: bool = True
    strategy: str = "restarts"
    seesaw: SeesawResult | None = field(default=None, repr=False)

    def __post_init__(self):
        expect = (self.best_value > LOCAL_BOUND + DECISION_TOL) and self.breaking_status_1 and self.breaking_status_2
        if self.activated != expect:
            raise ContractViolation("activated flag disagrees with value and breaking statuses")

    def to_dict(self) -> dict:
        return {
            "descriptor": self.descriptor.to_dict(),
            "best_value": self.best_value,
            "breaking_status_1": self.breaking_status_1,
            "breaking_status_2": self.breaking_status_2,
            "activated": self.activated,
            "converged": self.converged,
            "strategy": self.strategy,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActivationResult":
        return cls(
            descriptor=ProtocolDescriptor.from_dict(d["descriptor"]),
            best_value=float(d["best_value"]),
            breaking_status_1=bool(d["breaking_status_1"]),
            breaking_status_2=bool(d["breaking_status_2"]),
            activated=bool(d["activated"]),
            converged=bool(d.get("converged", True)),
            strategy=d.get("strategy", "restarts"),
        )


def unidirectional_output(rho: DensityMatrix, ch1: KrausChannel, ch2: KrausChannel) -> DensityMatrix:
    """``id ⊗ E1 ⊗ id ⊗ E2`` on ``(A, Ã, A', Ã')``; result on ``(A, B, A', B')``."""
    if len(rho.dims) != 4:
        raise DimensionError("unidirectional input must have four subsystems")
    return apply(ch2, apply(ch1, rho, 1), 3)


def bidirectional_factors(rho1: DensityMatrix, rho2: DensityMatrix, ch1: KrausChannel, ch2: KrausChannel):
    """``(sigma1^(A,B), sigma2^(A',B'))``: ``ch1`` on the second qubit of ``rho1``, ``ch2`` on the first of ``rho2``."""
    if rho1.dims != (2, 2) or rho2.dims != (2, 2):
        raise DimensionError("bidirectional inputs are two-qubit states")
    return apply(ch1, rho1, 1), apply(ch2, rho2, 0)


def bidirectional_output(rho1: DensityMatrix, rho2: DensityMatrix, ch1: KrausChannel, ch2: KrausChannel) -> DensityMatrix:
    """The product ``sigma1 ⊗ sigma2`` on ``(A, B, A', B')``."""
    return tensor_states(*bidirectional_factors(rho1, rho2, ch1, ch2))


def to_cut_order(sigma: DensityMatrix, desc: ProtocolDescriptor) -> DensityMatrix:
    perm = list(desc.subsystem_layout)
    m = permute_subsystems(sigma.matrix, sigma.dims, perm)
    return DensityMatrix(tuple(sigma.dims[i] for i in perm), m, check=False)


def verify_breaking(ch: ChannelParam | str) -> bool:
    """Analytic CHSH-breaking verdict: ``p`` at or below the family threshold."""
    if isinstance(ch, str):
        ch = ChannelParam.parse(ch)
    # exact-threshold inputs such as 1/sqrt(2) may be typed with 8+ digits
    return bool(ch.p <= THRESHOLDS[ch.family]() + 1e-8)


def numerical_max_chsh(ch: ChannelParam | str | KrausChannel, config: SeesawConfig | None = None) -> float:
    """Single-channel see-saw maximum of the CHSH value."""
    if not isinstance(ch, KrausChannel):
        ch = make_channel(ch)
    cfg = config or SeesawConfig(restarts=5, patience=10)
    return run_scenario(single_channel_scenario(ch), cfg).best_value


def breaking_report(ch: ChannelParam | str, config: SeesawConfig | None = None) -> dict:
    """Analytic verdict, threshold, and the numerical cross-check."""
    if isinstance(ch, str):
        ch = ChannelParam.parse(ch)
    verdict = verify_breaking(ch)
    value = numerical_max_chsh(ch, config)
    return {
        "channel": ch.spec(),
        "family": ch.family,
        "p": ch.p,
        "breaking": verdict,
        "threshold": THRESHOLDS[ch.family](),
        "numerical_max_chsh": value,
        "consistent": verdict == (value <= LOCAL_BOUND + DECISION_TOL),
    }


def _statuses(desc: ProtocolDescriptor) -> tuple[bool, bool]:
    b1 = verify_breaking(desc.channel1)
    b2 = verify_breaking(desc.channel2) if desc.channel2 is not None else True
    return b1, b2


def _result(desc, sres: SeesawResult, strategy: str) -> ActivationResult:
    b1, b2 = _statuses(desc)
    v = sres.best_value
    return ActivationResult(desc, v, b1, b2, (v > LOCAL_BOUND + DECISION_TOL) and b1 and b2,
                            sres.converged, strategy, sres)


def continuation_path(desc: ProtocolDescriptor, steps: int = 12) -> list[ProtocolDescriptor]:
    """Straight line in parameter space from both channels at their thresholds to ``desc``."""
    p1 = desc.channel1.p
    p2 = desc.channel2.p
    s1 = THRESHOLDS[desc.channel1.family]()
    s2 = THRESHOLDS[desc.channel2.family]()
    if abs(s1 - p1) < 1e-12 and abs(s2 - p2) < 1e-12:
        return []
    ts = np.linspace(0.0, 1.0, steps + 1)
    return [desc.with_params(s1 + t * (p1 - s1), s2 + t * (p2 - s2)) for t in ts]


def activation_search(desc: ProtocolDescriptor, config: SeesawConfig | None = None, n_jobs: int = 1,
                      continuation: bool = True) -> ActivationResult:
    """Best CHSH value for a protocol, with the activation verdict.

    Plain see-saw restarts come first. If they find nothing above the local
    bound and both channels are CHSH-breaking, the search walks from the
    point where both channels sit at their breaking thresholds (where any
    activation is strongest) to the requested parameters, warm-starting each
    leg from the previous optimum.
    """
    cfg = config or SeesawConfig()
    sres = run_scenario(desc.scenario(), cfg, n_jobs)
    res = _result(desc, sres, "restarts")
    if (res.activated or not continuation or desc.kind == "single_channel" or desc.symmetric
            or not (res.breaking_status_1 and res.breaking_status_2)):
        return res
    path = continuation_path(desc)
    if not path:
        return res
    log.info("no violation from restarts; continuing from thresholds for %s", desc)
    start_cfg = cfg.with_overrides(patience=max(cfg.patience, 40))
    prev = run_scenario(path[0].scenario(), start_cfg, n_jobs)
    leg_cfg = cfg.with_overrides(patience=max(cfg.patience, 20), seed=cfg.seed + 1)
    for d in path[1:]:
        if prev.best_value <= LOCAL_BOUND + cfg.value_equality_tol:
            break
        init = prev.best_factors if prev.best_factors is not None else prev.best_state
        prev = run_scenario(d.scenario(), leg_cfg, init_state=init, init_observables=prev.best_observables)
    if prev.best_value > sres.best_value:
        return _result(desc, prev, "continuation")
    return res


def superactivation_state(sigma1: DensityMatrix, sigma2: DensityMatrix, check_local: bool = True) -> DensityMatrix:
    """``(|0><0|_a ⊗ |1><1|_b ⊗ sigma1 + |1><1|_a ⊗ |0><0|_b ⊗ sigma2) / 2`` on ``(a, b, A, B)``."""
    for s in (sigma1, sigma2):
        if s.dims != (2, 2):
            raise DimensionError("superactivation_state takes two-qubit states")
        if check_local and horodecki_value(s) > LOCAL_BOUND + 1e-6:
            raise ContractViolation("input state violates CHSH on its own")
    p0 = np.diag([1.0, 0.0])
    p1 = np.diag([0.0, 1.0])
    m = 0.5 * (tensor_product(p0, p1, sigma1.matrix) + tensor_product(p1, p0, sigma2.matrix))
    return DensityMatrix((2, 2, 2, 2), m)


def is_swap_symmetric(state: DensityMatrix, atol: float = 1e-10) -> bool:
    """Invariance of a ``(a, b, A, B)`` state under exchanging ``aA <-> bB``."""
    swapped = permute_subsystems(state.matrix, state.dims, [1, 0, 3, 2])
    return matrices_close(swapped, state.matrix, atol)


def superactivation_value(v: float) -> float:
    """CHSH value of the ancilla-conditioned scheme on two copies: ``(2 v + 4) / 4``."""
    if not LOCAL_BOUND - 1e-9 <= v <= 2 * np.sqrt(2) + 1e-9:
        raise ValueError("v must lie in [2, 2 sqrt 2]")
    return (2 * v + 4) / 4


def _conditioned(obs: np.ndarray, diag_branch: int) -> np.ndarray:
    """Ancilla-controlled observable on ``(x1, x2, X1, X2)``.

    Outcomes 00 and 11 get the identity; branch ``diag_branch`` (01 or 10,
    as an index 1 or 2) gets ``obs``, the other mixed branch gets ``F obs F``.
    """
    f = swap_operator(2)
    eye = np.eye(4)
    blocks = {0: eye, 3: eye, diag_branch: obs, 3 - diag_branch: f @ obs @ f}
    out = np.zeros((16, 16), dtype=complex)
    for k, blk in blocks.items():
        proj = np.zeros((4, 4))
        proj[k, k] = 1
        out += np.kron(proj, blk)
    return out


def superactivation_verify(sigma1: DensityMatrix, sigma2: DensityMatrix, m_settings: Sequence, n_settings: Sequence,
                           return_state: bool = False):
    """CHSH value of two copies of the ancilla-flagged state under the conditional scheme.

    Alice reads ``a1 a2`` and applies the identity on 00/11, ``M_x`` on 01 and
    ``F M_x F`` on 10; Bob, whose ancillas read the complement, applies
    ``N_y`` on 10 and ``F N_y F`` on 01. ``M_x`` act on ``(A1, A2)`` and
    ``N_y`` on ``(B1, B2)``, the optimal settings for ``sigma1 ⊗ sigma2``.
    """
    tilde = superactivation_state(sigma1, sigma2, check_local=False)
    # two copies on (a1, b1, A1, B1, a2, b2, A2, B2) -> (a1, a2, A1, A2 | b1, b2, B1, B2)
    two = np.kron(tilde.matrix, tilde.matrix)
    perm = [0, 4, 2, 6, 1, 5, 3, 7]
    two = permute_subsystems(two, [2] * 8, perm)
    m1, m2 = (np.asarray(getattr(m, "matrix", m)) for m in m_settings)
    n1, n2 = (np.asarray(getattr(n, "matrix", n)) for n in n_settings)
    # |01> is index 1 on Alice's ancillas; Bob then reads |10>, index 2
    bell = bell_matrix(_conditioned(m1, 1), _conditioned(m2, 1), _conditioned(n1, 2), _conditioned(n2, 2))
    val = chsh_value(bell, two)
    if return_state:
        return val, DensityMatrix((2,) * 8, two, check=False)
    return val


def pair_value(sigma1: DensityMatrix, sigma2: DensityMatrix, m_settings, n_settings) -> float:
    """CHSH value of ``sigma1^(A1 B1) ⊗ sigma2^(A2 B2)`` across ``A1 A2 : B1 B2``."""
    joint = permute_subsystems(np.kron(sigma1.matrix, sigma2.matrix), [2, 2, 2, 2], [0, 2, 1, 3])
    obs = [np.asarray(getattr(o, "matrix", o)) for o in (*m_settings, *n_settings)]
    return chsh_value(bell_matrix(*obs), joint)


def _grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    if not 0 <= lo <= hi <= 1:
        raise ValueError("ranges must satisfy 0 <= lo <= hi <= 1")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(n)]


@dataclass(frozen=True)
class SweepPoint:
    p1: float
    p2: float
    chsh: float
    activated: bool


def _sweep_point(args) -> SweepPoint:
    desc, cfg = args
    res = activation_search(desc, cfg)
    return SweepPoint(desc.channel1.p, desc.channel2.p, res.best_value, res.activated)


def robustness_sweep(kind: str, family1: str, family2: str, p1_range: tuple[float, float],
                     p2_range: tuple[float, float], step: float = 0.01, config: SeesawConfig | None = None,
                     n_jobs: int = 1) -> list[SweepPoint]:
    """Activation search on a ``(p1, p2)`` grid; rows ordered ``p1`` outer, ``p2`` inner.

    Every grid point runs with the same seed, so each point's result does not
    depend on the grid it belongs to.
    """
    cfg = config or SeesawConfig()
    jobs = []
    for p1 in _grid(*p1_range, step):
        for p2 in _grid(*p2_range, step):
            desc = ProtocolDescriptor(kind, ChannelParam(family1, p1), ChannelParam(family2, p2))
            jobs.append((desc, cfg))
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(n_jobs) as ex:
            return list(ex.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]
