"""
State Library

Constructors for the reference states (generalized Schmidt three-qubit family,
the fixed four- and six-qubit examples, the four-qubit W class, Bell, GHZ, W,
product), their closed-form measure predictions, Haar-random and split Haar
sampling, and the `kind:reals` recipe strings used by the command line.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import BadInput, BadNormalization, BadSize, RecipeSyntax
from linalg_core import MAX_QUBITS
from qstate import DensityMatrix, PureState, State

logger = logging.getLogger(__name__)

# --- Settings ---
PARAM_NORM_TOL = 1e-10      # constructors: sum of squared coefficients must be 1 within this
RECIPE_RENORM_TOL = 1e-2    # recipes: deviations up to this are renormalized with a warning


def _check_coefficients(name: str, coeffs: Sequence[float]) -> np.ndarray:
    lam = np.asarray(coeffs, dtype=float)
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise BadNormalization(f"{name} coefficients must be finite and non-negative, got {list(coeffs)}")
    norm_sq = float(np.sum(lam ** 2))
    if abs(norm_sq - 1.0) > PARAM_NORM_TOL:
        raise BadNormalization(f"{name} coefficients have sum of squares {norm_sq:.12g}, expected 1")
    return lam


def _check_n(n_qubits: int, low: int = 1) -> int:
    if int(n_qubits) != n_qubits or not low <= n_qubits <= MAX_QUBITS:
        raise BadSize(f"n_qubits must be an integer in [{low}, {MAX_QUBITS}], got {n_qubits}")
    return int(n_qubits)


# --- Reference states ---

def gsd_three_qubit(l0: float, l1: float, l2: float, l3: float, l4: float, phi: float = 0.0) -> PureState:
    """
    l0|000> + l1 e^{i phi}|100> + l2|101> + l3|110> + l4|111>

    Args:
        l0..l4: Non-negative coefficients with unit sum of squares
        phi: Relative phase on |100>
    """
    lam = _check_coefficients("gsd3", [l0, l1, l2, l3, l4])
    return PureState.from_kets({
        "000": lam[0],
        "100": lam[1] * np.exp(1j * phi),
        "101": lam[2],
        "110": lam[3],
        "111": lam[4],
    }, normalize=False)


def gsd3_predictions(l0: float, l1: float, l2: float, l3: float, l4: float) -> Dict[str, float]:
    """
    Closed-form measures of gsd_three_qubit, independent of phi.

    Keys: "C(0|1,2)", and "C(i,j)" / "Ca(i,j)" for the pairs (0,1), (0,2).
    """
    return {
        "C(0|1,2)": 2 * l0 * math.sqrt(l2 ** 2 + l3 ** 2 + l4 ** 2),
        "C(0,1)": 2 * l0 * l3,
        "C(0,2)": 2 * l0 * l2,
        "Ca(0,1)": 2 * l0 * math.sqrt(l3 ** 2 + l4 ** 2),
        "Ca(0,2)": 2 * l0 * math.sqrt(l2 ** 2 + l4 ** 2),
    }


def example2_state() -> PureState:
    """(|0000> + |0010> + |1011>) / sqrt(3)"""
    return PureState.from_kets({"0000": 1, "0010": 1, "1011": 1})


def example2_predictions() -> Dict[str, float]:
    return {
        "C(0,1|2,3)": 2 * math.sqrt(2) / 3,
        "C(0|1,2,3)": 2 * math.sqrt(2) / 3,
        "C(1|0,2,3)": 0.0,
        "C(0,1)": 0.0, "C(0,2)": 0.0, "C(0,3)": 2 / 3,
        "Ca(0,1)": 0.0, "Ca(0,2)": 2 / 3, "Ca(0,3)": 2 * math.sqrt(2) / 3,
        "C(1,2)": 0.0, "C(1,3)": 0.0,
        "Ca(1,2)": 0.0, "Ca(1,3)": 0.0,
    }


def example3_state() -> PureState:
    """(|000000> + |101000>) / sqrt(2), a Bell pair on qubits 0 and 2"""
    return PureState.from_kets({"000000": 1, "101000": 1})


def example3_predictions() -> Dict[str, float]:
    return {"C(0,2)": 1.0, "Ca(0,2)": 1.0, "C(0,1)": 0.0, "Ca(0,1)": 0.0,
            "C(2,3)": 0.0, "Ca(2,3)": 0.0, "C(0,1,2|3,4,5)": 0.0}


def example4_state() -> PureState:
    """(|000000> + |001100>) / sqrt(2), a Bell pair on qubits 2 and 3"""
    return PureState.from_kets({"000000": 1, "001100": 1})


def example4_predictions() -> Dict[str, float]:
    return {"C(2,3)": 1.0, "Ca(2,3)": 1.0, "C(0,1)": 0.0, "Ca(0,1)": 0.0,
            "C(0,2)": 0.0, "Ca(0,2)": 0.0, "C(0,1,2|3,4,5)": 1.0}


def wclass_four_qubit(l1: float, l2: float, l3: float, l4: float) -> PureState:
    """l1|1000> + l2|0100> + l3|0010> + l4|0001>"""
    lam = _check_coefficients("wclass4", [l1, l2, l3, l4])
    return PureState.from_kets({"1000": lam[0], "0100": lam[1], "0010": lam[2], "0001": lam[3]},
                               normalize=False)


def wclass4_predictions(l1: float, l2: float, l3: float, l4: float) -> Dict[str, float]:
    """
    Closed-form negativities of wclass_four_qubit.

    Pair values "Nc(i,j)" equal "Na(i,j)" = 2 l_i l_j.
    """
    lam = (l1, l2, l3, l4)
    out = {
        "N(0,1|2,3)": 2 * math.sqrt((l1 ** 2 + l2 ** 2) * (l3 ** 2 + l4 ** 2)),
        "N(0|1,2,3)": 2 * l1 * math.sqrt(max(0.0, 1 - l1 ** 2)),
    }
    for i in range(4):
        for j in range(i + 1, 4):
            out[f"Nc({i},{j})"] = 2 * lam[i] * lam[j]
            out[f"Na({i},{j})"] = 2 * lam[i] * lam[j]
    return out


def bell_state() -> PureState:
    """(|00> + |11>) / sqrt(2)"""
    return PureState.from_kets({"00": 1, "11": 1})


def ghz_state(n_qubits: int) -> PureState:
    n = _check_n(n_qubits, low=2)
    return PureState.from_kets({"0" * n: 1, "1" * n: 1})


def w_state(n_qubits: int) -> PureState:
    n = _check_n(n_qubits, low=2)
    return PureState.from_kets({"0" * i + "1" + "0" * (n - i - 1): 1 for i in range(n)})


def product_state(n_qubits: int) -> PureState:
    """|0...0>"""
    n = _check_n(n_qubits)
    return PureState.from_kets({"0" * n: 1})


# --- Random states ---

def _complex_gaussian(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def haar_random_pure(n_qubits: int, seed: int) -> PureState:
    """Haar-random pure state: normalized vector of i.i.d. standard complex Gaussians"""
    n = _check_n(n_qubits)
    rng = np.random.default_rng(seed)
    z = _complex_gaussian(rng, 2 ** n)
    return PureState.from_amplitudes(z / np.linalg.norm(z), renormalize_tol=1e-9)


def haar_split(n_qubits: int, k: int, seed: int) -> PureState:
    """Haar-random state on qubits 0..k-1 tensored with an independent one on k..n-1"""
    n = _check_n(n_qubits, low=2)
    if int(k) != k or not 1 <= k < n:
        raise BadSize(f"split point must be an integer in [1, {n - 1}], got {k}")
    rng = np.random.default_rng(seed)
    left = _complex_gaussian(rng, 2 ** int(k))
    right = _complex_gaussian(rng, 2 ** (n - int(k)))
    amps = np.kron(left / np.linalg.norm(left), right / np.linalg.norm(right))
    return PureState.from_amplitudes(amps, renormalize_tol=1e-9)


def random_mixed(n_qubits: int, rank: int, seed: int) -> DensityMatrix:
    """
    Reduced state of a Haar-random pure state on the n qubits plus a
    rank-dimensional ancilla (ceil(log2 rank) qubits when rank is a power of two).
    """
    n = _check_n(n_qubits)
    if int(rank) != rank or not 1 <= rank <= 2 ** n:
        raise BadSize(f"rank must be an integer in [1, {2 ** n}], got {rank}")
    rng = np.random.default_rng(seed)
    z = _complex_gaussian(rng, 2 ** n * int(rank)).reshape(2 ** n, int(rank))
    z /= np.linalg.norm(z)
    return DensityMatrix(tuple(range(n)), z @ z.conj().T)


# --- Recipes ---

class RecipeKind(str, Enum):
    GSD3 = "gsd3"
    EXAMPLE2 = "example2"
    EXAMPLE3 = "example3"
    EXAMPLE4 = "example4"
    WCLASS4 = "wclass4"
    HAAR = "haar"
    HAAR_SPLIT = "haar_split"
    MIXED = "mixed"
    BELL = "bell"
    GHZ = "ghz"
    W = "w"
    PRODUCT = "product"


# allowed parameter counts
_ARITY: Dict[RecipeKind, Tuple[int, ...]] = {
    RecipeKind.GSD3: (5, 6),
    RecipeKind.EXAMPLE2: (0,),
    RecipeKind.EXAMPLE3: (0,),
    RecipeKind.EXAMPLE4: (0,),
    RecipeKind.WCLASS4: (4,),
    RecipeKind.HAAR: (2,),
    RecipeKind.HAAR_SPLIT: (3,),
    RecipeKind.MIXED: (3,),
    RecipeKind.BELL: (0,),
    RecipeKind.GHZ: (1,),
    RecipeKind.W: (1,),
    RecipeKind.PRODUCT: (1,),
}

_INTEGER_KINDS = {RecipeKind.HAAR, RecipeKind.HAAR_SPLIT, RecipeKind.MIXED, RecipeKind.GHZ, RecipeKind.W, RecipeKind.PRODUCT}


def _as_count(kind: RecipeKind, value: Union[int, float]) -> int:
    """Integer parameter (qubit count, rank, seed) kept exact at any size"""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        count = int(value)
    elif float(value).is_integer():
        count = int(float(value))
    else:
        raise RecipeSyntax(f"Recipe '{kind.value}' needs non-negative integer parameters, got {value!r}")
    if count < 0:
        raise RecipeSyntax(f"Recipe '{kind.value}' needs non-negative integer parameters, got {count}")
    return count


def _format_param(value: Union[int, float]) -> str:
    if isinstance(value, int):
        return str(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _renormalized(kind: RecipeKind, lam: Sequence[float]) -> Tuple[float, ...]:
    norm_sq = sum(l * l for l in lam)
    deviation = abs(norm_sq - 1.0)
    if deviation > RECIPE_RENORM_TOL:
        raise BadNormalization(f"{kind.value} coefficients have sum of squares {norm_sq:.6g}; too far from 1 to renormalize")
    if deviation > PARAM_NORM_TOL:
        logger.warning(f"Renormalizing {kind.value} coefficients (sum of squares {norm_sq:.12g})")
        scale = 1.0 / math.sqrt(norm_sq)
        return tuple(l * scale for l in lam)
    return tuple(lam)


@dataclass(frozen=True)
class StateRecipe:
    """
    A named state family plus its real parameters

    Attributes:
        kind: Family name
        parameters: Coefficients, phase, qubit count, rank or seed as the family needs
    """
    kind: RecipeKind
    parameters: Tuple[Union[int, float], ...] = ()

    def __post_init__(self):
        kind = RecipeKind(self.kind)
        if kind in _INTEGER_KINDS:
            params = tuple(_as_count(kind, p) for p in self.parameters)
        else:
            params = tuple(float(p) for p in self.parameters)
        if len(params) not in _ARITY[kind]:
            raise RecipeSyntax(f"Recipe '{kind.value}' takes {' or '.join(map(str, _ARITY[kind]))} parameters, got {len(params)}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "parameters", params)

    def build(self) -> State:
        p = self.parameters
        kind = self.kind
        if kind is RecipeKind.GSD3:
            lam = _renormalized(kind, p[:5])
            return gsd_three_qubit(*lam, phi=p[5] if len(p) == 6 else 0.0)
        if kind is RecipeKind.WCLASS4:
            return wclass_four_qubit(*_renormalized(kind, p))
        if kind is RecipeKind.EXAMPLE2:
            return example2_state()
        if kind is RecipeKind.EXAMPLE3:
            return example3_state()
        if kind is RecipeKind.EXAMPLE4:
            return example4_state()
        if kind is RecipeKind.BELL:
            return bell_state()
        if kind is RecipeKind.GHZ:
            return ghz_state(int(p[0]))
        if kind is RecipeKind.W:
            return w_state(int(p[0]))
        if kind is RecipeKind.PRODUCT:
            return product_state(int(p[0]))
        if kind is RecipeKind.HAAR_SPLIT:
            return haar_split(p[0], p[1], p[2])
        if kind is RecipeKind.HAAR:
            return haar_random_pure(int(p[0]), int(p[1]))
        return random_mixed(int(p[0]), int(p[1]), int(p[2]))

    def __str__(self) -> str:
        if not self.parameters:
            return self.kind.value
        return f"{self.kind.value}:{','.join(_format_param(v) for v in self.parameters)}"


def parse_recipe(text: str) -> StateRecipe:
    """
    Parse 'kind' or 'kind:r1,r2,...'

    Examples: 'example2', 'gsd3:0.447,0.447,0.447,0.447,0.447,0.0', 'haar:4,17'
    """
    text = text.strip()
    kind_text, sep, rest = text.partition(":")
    try:
        kind = RecipeKind(kind_text.strip().lower())
    except ValueError:
        known = ", ".join(k.value for k in RecipeKind)
        raise RecipeSyntax(f"Unknown recipe kind '{kind_text}' (known: {known})") from None
    params: List[Union[int, float]] = []
    if sep:
        for tok in rest.split(","):
            params.append(_parse_number(tok, text))
    return StateRecipe(kind, tuple(params))


def _parse_number(tok: str, text: str) -> Union[int, float]:
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        value = float(tok)
    except ValueError:
        raise RecipeSyntax(f"Bad number '{tok}' in recipe '{text}'") from None
    if not math.isfinite(value):
        raise RecipeSyntax(f"Non-finite number '{tok}' in recipe '{text}'")
    return value


def haar_recipe(n_qubits: int, seed: int, split: Optional[int] = None) -> StateRecipe:
    """haar:N,SEED, or haar_split:N,K,SEED when a split point K is given"""
    if seed < 0:
        raise BadInput(f"seed must be non-negative, got {seed}")
    if split is not None:
        return StateRecipe(RecipeKind.HAAR_SPLIT, (n_qubits, split, seed))
    return StateRecipe(RecipeKind.HAAR, (n_qubits, seed))
