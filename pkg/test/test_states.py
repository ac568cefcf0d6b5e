"""
Test State Library

Tests the reference states and recipes:
1. Closed-form predictions against the measures
2. Phase invariance of the three-qubit family
3. Recipe parsing, formatting and renormalization
4. Seeded random states
"""

import logging
import math
import re
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import BadInput, BadNormalization, BadSize, RecipeSyntax
from measures import (
    coa_two_qubit,
    concurrence_pure,
    cren_two_qubit,
    crenoa_two_qubit,
    negativity,
    wootters_concurrence,
)
from qstate import Bipartition, DensityMatrix, PureState, partial_trace
from states import (
    RecipeKind,
    StateRecipe,
    example2_predictions,
    example2_state,
    example3_predictions,
    example3_state,
    example4_predictions,
    example4_state,
    ghz_state,
    gsd3_predictions,
    gsd_three_qubit,
    haar_random_pure,
    haar_recipe,
    haar_split,
    parse_recipe,
    product_state,
    random_mixed,
    w_state,
    wclass4_predictions,
    wclass_four_qubit,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
KEY = re.compile(r"(\w+)\(([\d,|]+)\)")


def measured(state: PureState, key: str) -> float:
    """Evaluate a prediction key such as 'C(0|1,2)', 'Ca(0,3)' or 'Nc(1,2)'"""
    name, args = KEY.fullmatch(key).groups()
    if "|" in args:
        cut = Bipartition.parse(args)
        return concurrence_pure(state, cut) if name == "C" else negativity(state, cut)
    rho = partial_trace(state, [int(a) for a in args.split(",")])
    fn = {"C": wootters_concurrence, "Ca": coa_two_qubit, "Nc": cren_two_qubit, "Na": crenoa_two_qubit}[name]
    return fn(rho)


def unit_coefficients(rng, k):
    lam = np.abs(rng.standard_normal(k))
    return lam / np.linalg.norm(lam)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, phi=st.floats(min_value=0, max_value=2 * math.pi))
def test_gsd3_predictions(seed, phi):
    lam = unit_coefficients(np.random.default_rng(seed), 5)
    state = gsd_three_qubit(*lam, phi=phi)
    for key, expected in gsd3_predictions(*lam).items():
        assert abs(measured(state, key) - expected) < 1e-9, key


def test_gsd3_phase_invariance():
    lam = unit_coefficients(np.random.default_rng(3), 5)
    base, rotated = gsd_three_qubit(*lam), gsd_three_qubit(*lam, phi=1.3)
    for key in gsd3_predictions(*lam):
        assert measured(base, key) == pytest.approx(measured(rotated, key), abs=1e-10)


def test_gsd3_rejects_bad_coefficients():
    with pytest.raises(BadNormalization):
        gsd_three_qubit(1, 1, 0, 0, 0)
    with pytest.raises(BadNormalization):
        gsd_three_qubit(-0.6, 0.8, 0, 0, 0)


@pytest.mark.parametrize(
    "state, predictions",
    [
        (example2_state(), example2_predictions()),
        (example3_state(), example3_predictions()),
        (example4_state(), example4_predictions()),
    ],
)
def test_example_predictions(state, predictions):
    for key, expected in predictions.items():
        assert measured(state, key) == pytest.approx(expected, abs=1e-9), key


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_wclass4_predictions(seed):
    lam = unit_coefficients(np.random.default_rng(seed), 4)
    state = wclass_four_qubit(*lam)
    for key, expected in wclass4_predictions(*lam).items():
        assert abs(measured(state, key) - expected) < 1e-9, key


def test_standard_states():
    assert ghz_state(4).amplitude("1111") == pytest.approx(1 / math.sqrt(2))
    assert w_state(3).amplitude("010") == pytest.approx(1 / math.sqrt(3))
    assert product_state(2).amplitude("00") == 1
    with pytest.raises(BadSize):
        ghz_state(1)
    with pytest.raises(BadSize):
        product_state(11)


def test_haar_random_is_seeded():
    a, b = haar_random_pure(4, 7), haar_random_pure(4, 7)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert not np.allclose(a.amplitudes, haar_random_pure(4, 8).amplitudes)
    assert abs(np.linalg.norm(a.amplitudes) - 1) < 1e-12


def test_haar_single_qubit_purity_mean():
    """E Tr(rho_A^2) = (d_A + d_B) / (d_A d_B + 1) = 10/17 for one qubit of four"""
    purities = [partial_trace(haar_random_pure(4, s), [0]).purity() for s in range(500)]
    assert np.mean(purities) == pytest.approx(10 / 17, abs=0.02)


def test_haar_split_is_a_product_across_the_split():
    state = haar_split(6, 2, 5)
    assert state.n_qubits == 6
    assert concurrence_pure(state, Bipartition.parse("0,1|2,3,4,5")) == pytest.approx(0, abs=1e-7)
    assert concurrence_pure(state, Bipartition.parse("0|1,2,3,4,5")) > 1e-3
    recipe = parse_recipe("haar_split:6,2,5")
    assert str(recipe) == "haar_split:6,2,5" == str(haar_recipe(6, 5, split=2))
    assert np.array_equal(recipe.build().amplitudes, state.amplitudes)
    for bad in (0, 6):
        with pytest.raises(BadSize):
            haar_split(6, bad, 5)


def test_random_mixed():
    rho = random_mixed(2, 3, 5)
    assert isinstance(rho, DensityMatrix)
    assert np.count_nonzero(rho.eigenvalues() > 1e-12) == 3
    assert np.allclose(rho.matrix, random_mixed(2, 3, 5).matrix)
    assert random_mixed(3, 1, 0).purity() == pytest.approx(1)
    with pytest.raises(BadSize):
        random_mixed(2, 0, 0)
    with pytest.raises(BadSize):
        random_mixed(2, 5, 0)


def test_parse_recipe_round_trip():
    for text in ["example2", "gsd3:0.6,0.8,0,0,0", "gsd3:0.6,0.8,0,0,0,1.5", "haar:4,17", "mixed:2,3,1", "ghz:5"]:
        recipe = parse_recipe(text)
        assert str(recipe) == text
        assert parse_recipe(str(recipe)) == recipe
    assert parse_recipe(" W:3 ").kind is RecipeKind.W


def test_recipe_builds():
    assert parse_recipe("example2").build().n_qubits == 4
    assert parse_recipe("wclass4:0.75,0.5,0.3535533905932738,0.25").build().n_qubits == 4
    assert isinstance(parse_recipe("mixed:2,2,0").build(), DensityMatrix)
    assert StateRecipe("ghz", (3,)).build().n_qubits == 3
    assert np.array_equal(parse_recipe("haar:3,9").build().amplitudes, haar_random_pure(3, 9).amplitudes)
    assert str(haar_recipe(3, 9)) == "haar:3,9"
    with pytest.raises(BadInput):
        haar_recipe(3, -1)


def test_recipe_renormalizes_small_deviations(caplog):
    with caplog.at_level(logging.WARNING):
        state = parse_recipe("gsd3:0.6,0.8,0.001,0,0").build()
    assert "Renormalizing" in caplog.text
    assert abs(np.linalg.norm(state.amplitudes) - 1) < 1e-12
    with pytest.raises(BadNormalization):
        parse_recipe("gsd3:1,1,0,0,0").build()


@pytest.mark.parametrize("text", ["nope", "gsd3:1,2", "haar:4,x", "ghz:2.5", "haar:4,-1", "gsd3:nan,0,0,0,1", "bell:1"])
def test_bad_recipes(text):
    with pytest.raises(RecipeSyntax):
        parse_recipe(text)


def test_recipe_keeps_large_seeds_exact():
    seed = 2**53 + 1
    recipe = parse_recipe(f"haar:3,{seed}")
    assert recipe.parameters == (3, seed)
    assert str(recipe) == f"haar:3,{seed}"
    assert np.array_equal(recipe.build().amplitudes, haar_random_pure(3, seed).amplitudes)
    assert not np.array_equal(recipe.build().amplitudes, haar_random_pure(3, 2**53).amplitudes)
    assert str(haar_recipe(4, 2**64 - 1)) == f"haar:4,{2**64 - 1}"
