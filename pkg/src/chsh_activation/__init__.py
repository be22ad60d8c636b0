"""Qubit channels, CHSH-breaking criteria, and see-saw activation of CHSH nonlocality."""

__version__ = "0.1.0"

from .channels import (
    ChannelParam,
    KrausChannel,
    affine_rep,
    apply,
    identity_channel,
    is_entanglement_breaking_qubit,
    is_unital,
    make_amplitude_damping,
    make_channel,
    make_depolarizing,
    make_erasure,
    make_loss,
)
from .chsh import (
    THRESHOLDS,
    TSIRELSON,
    DichotomicObservable,
    bell_operator,
    chsh_value,
    erasure_max_chsh,
    horodecki_value,
    max_chsh_unital,
    unital_is_chsh_breaking,
)
from .linalg import DensityMatrix, PureState, partial_trace, tensor_states
from .protocols import (
    ActivationResult,
    ProtocolDescriptor,
    activation_search,
    bidirectional_output,
    robustness_sweep,
    superactivation_state,
    superactivation_value,
    superactivation_verify,
    unidirectional_output,
    verify_breaking,
)
from .seesaw import SeesawConfig, SeesawResult, run_seesaw
