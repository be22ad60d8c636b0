import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chsh_activation.channels import (
    SX,
    SZ,
    KrausChannel,
    apply,
    make_amplitude_damping,
    make_depolarizing,
)
from chsh_activation.chsh import (
    THRESHOLDS,
    TSIRELSON,
    DichotomicObservable,
    NumericalIntegrityError,
    bell_operator,
    chsh_value,
    correlation_matrix,
    erasure_chsh_expression,
    erasure_max_chsh,
    horodecki_settings,
    horodecki_value,
    max_chsh_unital,
    unital_is_chsh_breaking,
)
from chsh_activation.linalg import ContractViolation, DensityMatrix, DimensionError, random_density_matrix
from oracles import apply_to_second, chsh_bruteforce, erasure_max_closed_form, phi_plus

seeds = st.integers(0, 2**31 - 1)


def tsirelson_settings():
    m1, m2 = SZ, SX
    n1 = DichotomicObservable.from_bloch([1, 0, 1])
    n2 = DichotomicObservable.from_bloch([-1, 0, 1])
    return m1, m2, n1, n2


def test_observable_validation():
    with pytest.raises(ContractViolation):
        DichotomicObservable(np.diag([1.0, 0.5]))
    with pytest.raises(ContractViolation):
        DichotomicObservable(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        DichotomicObservable(np.ones(3))


def test_tsirelson_value_on_phi_plus():
    b = bell_operator(*tsirelson_settings())
    assert chsh_value(b, phi_plus()) == pytest.approx(TSIRELSON, abs=1e-12)
    assert b.norm() == pytest.approx(TSIRELSON, abs=1e-12)


def test_dimension_mismatch():
    b = bell_operator(*tsirelson_settings())
    with pytest.raises(DimensionError):
        chsh_value(b, np.eye(8) / 8)


def test_imaginary_residue_raises():
    b = bell_operator(*tsirelson_settings())
    bad = phi_plus() + 1e-3j * b.matrix
    with pytest.raises(NumericalIntegrityError):
        chsh_value(b, bad)


@given(seeds)
def test_random_observables_respect_tsirelson(seed):
    rng = np.random.default_rng(seed)
    obs = [DichotomicObservable.random(2, rng) for _ in range(4)]
    rho = random_density_matrix((2, 2), rng)
    assert abs(chsh_value(bell_operator(*obs), rho)) <= TSIRELSON + 1e-8


@given(seeds)
def test_product_states_are_local(seed):
    rng = np.random.default_rng(seed)
    obs = [DichotomicObservable.random(2, rng) for _ in range(4)]
    a, b = random_density_matrix((2,), rng), random_density_matrix((2,), rng)
    assert abs(chsh_value(bell_operator(*obs), np.kron(a.matrix, b.matrix))) <= 2 + 1e-10


def test_correlation_matrix_phi_plus():
    assert np.allclose(correlation_matrix(phi_plus()).entries, np.diag([1, -1, 1]))


@pytest.mark.parametrize("seed", range(5))
def test_horodecki_matches_bruteforce(seed):
    rho = random_density_matrix((2, 2), seed, rank=1)
    assert horodecki_value(rho) == pytest.approx(chsh_bruteforce(rho.matrix, seed=seed), abs=1e-6)


@given(seeds)
def test_horodecki_settings_attain_value(seed):
    rho = random_density_matrix((2, 2), seed, rank=2)
    b = bell_operator(*horodecki_settings(rho))
    assert chsh_value(b, rho) == pytest.approx(horodecki_value(rho), abs=1e-8)


@given(st.floats(0, 1))
def test_werner_state_value(p):
    # (id ⊗ dep_p)(Phi+) has T = p diag(1, -1, 1)
    rho = apply_to_second(phi_plus(), lambda r: p * r + (1 - p) * np.trace(r) * np.eye(2) / 2)
    assert horodecki_value(rho) == pytest.approx(2 * np.sqrt(2) * p, abs=1e-12)


def test_depolarizing_threshold_exact():
    s = 1 / np.sqrt(2)
    assert unital_is_chsh_breaking(make_depolarizing(s))
    assert not unital_is_chsh_breaking(make_depolarizing(s + 1e-9))
    assert unital_is_chsh_breaking(make_depolarizing(s - 1e-9))
    assert THRESHOLDS["depolarizing"]() == s


def test_unital_criterion_rejects_non_unital():
    with pytest.raises(ContractViolation):
        unital_is_chsh_breaking(make_amplitude_damping(0.5))
    with pytest.raises(ContractViolation):
        max_chsh_unital(make_amplitude_damping(0.5))


@given(st.floats(0, 1))
def test_max_chsh_unital_matches_phi_plus_input(p):
    ch = make_depolarizing(p)
    rho = apply(ch, DensityMatrix((2, 2), phi_plus()), 1)
    assert max_chsh_unital(ch) == pytest.approx(horodecki_value(rho), abs=1e-10)


def test_unital_criterion_with_unequal_singular_values():
    # dephasing-like Pauli channel: Lambda = diag(a, b, c) up to signs
    w = np.array([0.7, 0.2, 0.05, 0.05])
    ops = [np.sqrt(w[0]) * np.eye(2), np.sqrt(w[1]) * SZ, np.sqrt(w[2]) * SX, np.sqrt(w[3]) * SX @ SZ]
    ch = KrausChannel(2, 2, tuple(ops))
    lam = sorted([abs(w[0] + w[1] - w[2] - w[3]), abs(w[0] - w[1] + w[2] - w[3]), abs(w[0] - w[1] - w[2] + w[3])])
    expected = lam[1] ** 2 + lam[2] ** 2 <= 1
    assert unital_is_chsh_breaking(ch) == expected
    assert max_chsh_unital(ch) == pytest.approx(2 * np.sqrt(lam[1] ** 2 + lam[2] ** 2))


def test_family_thresholds():
    assert THRESHOLDS["amplitude_damping"]() == 0.5
    assert THRESHOLDS["erasure"]() == 0.5
    assert THRESHOLDS["loss"]() == (np.sqrt(5) - 1) / 2


def test_erasure_expression_edges():
    assert erasure_chsh_expression(0.7, 1.0) == pytest.approx(2.0)
    assert erasure_chsh_expression(1.0, 0.5) == pytest.approx(2 * np.sqrt(2))
    with pytest.raises(ValueError):
        erasure_chsh_expression(0.5, 0.2)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.52, 0.6, 0.75, 0.9, 1.0])
def test_erasure_max_matches_closed_form(p):
    val, lam = erasure_max_chsh(p)
    assert val == pytest.approx(erasure_max_closed_form(p), abs=1e-10)
    assert 0.5 <= lam <= 1


def test_erasure_frozen_value():
    # 2 sqrt(2 (0.36 + 0.16)) at p = 0.6
    assert erasure_max_chsh(0.6)[0] == pytest.approx(2.0396078054371, abs=1e-10)
