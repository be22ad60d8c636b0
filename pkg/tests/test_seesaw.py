import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chsh_activation.channels import SX, SZ, identity_channel, make_amplitude_damping, make_depolarizing, make_erasure
from chsh_activation.chsh import TSIRELSON, DichotomicObservable, bell_matrix, chsh_value, horodecki_value
from chsh_activation.linalg import (
    DensityMatrix,
    permute_subsystems,
    random_density_matrix,
    random_hermitian,
    swap_operator,
)
from chsh_activation.seesaw import (
    SeesawConfig,
    bidirectional_scenario,
    observable_from_operator,
    optimize_observables,
    perturb,
    random_kick_state,
    run_scenario,
    run_seesaw,
    single_channel_scenario,
    unidirectional_scenario,
    update_observables_A,
    update_observables_B,
    update_state_bidirectional,
    update_state_unidirectional,
)
from oracles import apply_to_second, phi_plus

seeds = st.integers(0, 2**31 - 1)
FAST = SeesawConfig(restarts=2, patience=4, max_iterations=400)
ID = np.eye(2)


def tsirelson_bob():
    n1 = DichotomicObservable.from_bloch([1, 0, 1]).matrix
    n2 = DichotomicObservable.from_bloch([-1, 0, 1]).matrix
    return n1, n2


def lifted_tsirelson_bell():
    """Tsirelson settings on A:B, identity on A' and B'; cut order (A, A', B, B')."""
    n1, n2 = tsirelson_bob()
    return bell_matrix(np.kron(SZ, ID), np.kron(SX, ID), np.kron(n1, ID), np.kron(n2, ID))


def test_config_validation():
    for bad in ({"epsilon": 0}, {"epsilon": 1}, {"perturb_probability": 0}, {"stall_threshold": 0},
                {"restarts": 0}, {"max_iterations": 0}, {"value_equality_tol": 0}, {"trap_policy": "x"}):
        with pytest.raises(ValueError):
            SeesawConfig(**bad)
    assert SeesawConfig().with_overrides(restarts=3, seed=None).restarts == 3


def test_observable_from_operator_examples():
    assert np.allclose(observable_from_operator(SZ).matrix, SZ)
    assert np.allclose(observable_from_operator(np.diag([2.0, -3.0])).matrix, np.diag([1, -1]))


@given(seeds)
def test_observable_from_operator_attains_nuclear_norm(seed):
    f = random_hermitian(5, seed)
    m = observable_from_operator(f).matrix
    assert np.trace(m @ f).real == pytest.approx(np.abs(np.linalg.eigvalsh(f)).sum(), abs=1e-8)


def test_update_b_reaches_tsirelson():
    n1, n2 = update_observables_B(phi_plus(), SZ, SX, (2, 2))
    assert chsh_value(bell_matrix(SZ, SX, n1, n2), phi_plus()) == pytest.approx(TSIRELSON, abs=1e-8)


def test_update_a_reaches_tsirelson():
    n1, n2 = tsirelson_bob()
    m1, m2 = update_observables_A(phi_plus(), n1, n2, (2, 2))
    assert chsh_value(bell_matrix(m1, m2, n1, n2), phi_plus()) == pytest.approx(TSIRELSON, abs=1e-8)


@given(seeds)
def test_updates_on_product_state_stay_local(seed):
    rng = np.random.default_rng(seed)
    rho = np.kron(random_density_matrix((2,), rng).matrix, random_density_matrix((2,), rng).matrix)
    m1, m2 = (DichotomicObservable.random(2, rng) for _ in range(2))
    n1, n2 = update_observables_B(rho, m1, m2, (2, 2))
    assert chsh_value(bell_matrix(m1, m2, n1, n2), rho) <= 2 + 1e-8
    n1, n2 = (DichotomicObservable.random(2, rng) for _ in range(2))
    m1, m2 = update_observables_A(rho, n1, n2, (2, 2))
    assert chsh_value(bell_matrix(m1, m2, n1, n2), rho) <= 2 + 1e-8


@given(seeds)
def test_observable_updates_are_monotone_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix((2, 3), rng).matrix
    m1, m2 = (DichotomicObservable.random(2, rng) for _ in range(2))
    n1, n2 = (DichotomicObservable.random(3, rng) for _ in range(2))
    v0 = chsh_value(bell_matrix(m1, m2, n1, n2), rho)
    n1, n2 = update_observables_B(rho, m1, m2, (2, 3))
    v1 = chsh_value(bell_matrix(m1, m2, n1, n2), rho)
    n1, n2 = update_observables_B(rho, m1, m2, (2, 3))
    v2 = chsh_value(bell_matrix(m1, m2, n1, n2), rho)
    m1, m2 = update_observables_A(rho, n1, n2, (2, 3))
    v3 = chsh_value(bell_matrix(m1, m2, n1, n2), rho)
    m1, m2 = update_observables_A(rho, n1, n2, (2, 3))
    v4 = chsh_value(bell_matrix(m1, m2, n1, n2), rho)
    assert v1 >= v0 - 1e-9 and v3 >= v2 - 1e-9
    assert abs(v2 - v1) < 1e-10 and abs(v4 - v3) < 1e-10


def test_state_update_identity_channels():
    psi = update_state_unidirectional(lifted_tsirelson_bell(), identity_channel(), identity_channel())
    sc = unidirectional_scenario(identity_channel(), identity_channel())
    sigma = sc.output(psi.density_matrix().matrix)
    assert chsh_value(lifted_tsirelson_bell(), sigma) == pytest.approx(TSIRELSON, abs=1e-8)


@pytest.mark.parametrize("p", [0.3, 0.8])
def test_state_update_depolarizing_scales(p):
    ch = make_depolarizing(p)
    bell = lifted_tsirelson_bell()
    psi = update_state_unidirectional(bell, ch, ch)
    sc = unidirectional_scenario(ch, ch)
    value = chsh_value(bell, sc.output(psi.density_matrix().matrix))
    assert value == pytest.approx(TSIRELSON * p, abs=1e-8)
    assert value == pytest.approx(np.linalg.eigvalsh(sc.pull_back(bell))[-1], abs=1e-8)


def test_bidirectional_update_identity_channels():
    # with identity channels, factor 0 on (A, A') feeds Alice's A and Bob's B
    bell = lifted_tsirelson_bell()
    fixed = DensityMatrix((2, 2), phi_plus())
    psi = update_state_bidirectional(bell, identity_channel(), identity_channel(), fixed, fixed_factor=1)
    sc = bidirectional_scenario(identity_channel(), identity_channel())
    value = chsh_value(bell, sc.output(np.kron(psi.density_matrix().matrix, fixed.matrix)))
    assert value >= 2 - 1e-9
    again = update_state_bidirectional(bell, identity_channel(), identity_channel(), fixed, fixed_factor=1)
    value2 = chsh_value(bell, sc.output(np.kron(again.density_matrix().matrix, fixed.matrix)))
    assert abs(value2 - value) < 1e-10


def test_superoperator_matches_direct_application():
    for sc in (unidirectional_scenario(make_erasure(0.4), make_amplitude_damping(0.3)),
               bidirectional_scenario(make_amplitude_damping(0.3), make_erasure(0.6))):
        rho = random_density_matrix(sc.in_dims, 1).matrix
        assert np.allclose(sc.output(rho), sc.output_direct(rho), atol=1e-12)
        da, db = sc.cut_dims
        b = random_hermitian(da * db, 2)
        assert np.allclose(sc.pull_back(b), sc.pull_back_direct(b), atol=1e-12)


def test_perturb_examples():
    rho = DensityMatrix.maximally_mixed((2, 2))
    star = random_kick_state((2, 2), np.random.default_rng(0))
    assert perturb(rho, star, 0.0) == rho
    assert perturb(rho, star, 1.0) == star
    w = np.sort(np.linalg.eigvalsh(perturb(rho, star, 0.3).matrix))
    assert np.allclose(w, [0.175, 0.175, 0.175, 0.475])


def test_kick_state_is_entangled_pure():
    star = random_kick_state((2, 2), np.random.default_rng(3))
    assert np.isclose(np.trace(star.matrix @ star.matrix).real, 1)
    assert random_kick_state((2, 2, 2, 2), np.random.default_rng(3)).dims == (2, 2, 2, 2)


def _recompute(sc, res):
    if res.best_factors is not None:
        state = np.kron(*res.best_factors)
    else:
        state = res.best_state
    return chsh_value(bell_matrix(*res.best_observables), sc.output(state))


def test_identity_channels_reach_tsirelson():
    res = run_seesaw("unidirectional", identity_channel(), identity_channel(), FAST)
    assert res.best_value == pytest.approx(TSIRELSON, abs=1e-6)


def test_single_channel_depolarizing():
    res = run_seesaw("single_channel", make_depolarizing(0.8), config=FAST)
    rho = apply_to_second(phi_plus(), lambda r: 0.8 * r + 0.2 * np.trace(r) * ID / 2)
    assert res.best_value == pytest.approx(horodecki_value(rho), abs=1e-4)


@pytest.mark.parametrize("sc", [
    single_channel_scenario(make_amplitude_damping(0.6)),
    unidirectional_scenario(make_erasure(0.5), make_depolarizing(0.7)),
    bidirectional_scenario(make_amplitude_damping(0.5), make_amplitude_damping(0.5)),
    bidirectional_scenario(make_amplitude_damping(0.5), make_amplitude_damping(0.5), symmetric=True),
], ids=["single", "uni", "bi", "bi-sym"])
def test_run_invariants(sc):
    cfg = FAST.with_overrides(restarts=1, max_iterations=150)
    res = run_scenario(sc, cfg)
    assert res.best_value == pytest.approx(_recompute(sc, res), abs=1e-8)
    assert res.monotonicity_violations() == []
    assert max(v for _, v in res.value_trace) <= TSIRELSON + 1e-8
    again = run_scenario(sc, cfg)
    assert again.value_trace == res.value_trace


def test_symmetric_mode_keeps_swap_relation():
    sc = bidirectional_scenario(make_amplitude_damping(0.5), make_amplitude_damping(0.5), symmetric=True)
    res = run_scenario(sc, FAST.with_overrides(restarts=1, max_iterations=100))
    f = swap_operator(2)
    r1, r2 = res.best_factors
    assert np.allclose(f @ r1 @ f, r2, atol=1e-12)


def test_restarts_use_derived_seeds():
    sc = single_channel_scenario(make_amplitude_damping(0.6))
    cfg = FAST.with_overrides(restarts=3)
    res = run_scenario(sc, cfg)
    assert len(res.restart_values) == 3
    assert res.best_value == max(res.restart_values)
    single = run_scenario(sc, cfg.with_overrides(restarts=1, seed=cfg.seed + res.restart_index))
    assert single.best_value == res.best_value


def test_warm_start_does_not_lose_value():
    sc = bidirectional_scenario(make_amplitude_damping(0.5), make_amplitude_damping(0.5))
    res = run_scenario(sc, FAST.with_overrides(restarts=1))
    warm = run_scenario(sc, FAST, init_state=res.best_factors, init_observables=res.best_observables)
    assert warm.best_value >= res.best_value - 1e-9


@pytest.mark.parametrize("seed", range(5))
def test_fixed_state_optimization_matches_horodecki(seed):
    rho = random_density_matrix((2, 2), seed)
    value, obs = optimize_observables(rho, (2, 2), seed=seed, traceless=True)
    assert value == pytest.approx(horodecki_value(rho), abs=1e-4)
    assert value == pytest.approx(chsh_value(bell_matrix(*obs), rho), abs=1e-10)


def test_unrestricted_observables_reach_local_bound():
    # +-I are dichotomic, so any state reaches 2 once they are allowed
    rho = random_density_matrix((2, 2), 0)
    assert horodecki_value(rho) < 2
    value, _ = optimize_observables(rho, (2, 2), seed=0)
    assert value == pytest.approx(2.0, abs=1e-9)


def test_traceless_update():
    f = 0.3 * ID + 2 * SX
    assert np.allclose(observable_from_operator(f, traceless=True).matrix, SX)
    assert np.allclose(observable_from_operator(ID, traceless=True).matrix, SZ)


def test_cut_permutation_in_unidirectional_output():
    # Phi+ on (A, Ã) and |00> on (A', Ã'): output in cut order (A, A', B, B')
    rho = np.kron(phi_plus(), np.diag([1.0, 0, 0, 0]))
    sc = unidirectional_scenario(identity_channel(), identity_channel())
    expected = permute_subsystems(rho, [2, 2, 2, 2], [0, 2, 1, 3])
    assert np.allclose(sc.output(rho), expected)
