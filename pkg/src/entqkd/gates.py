"""Gate constructors: Paulis, Bloch rotations, BB84 basis kets, the Cartan
two-qubit interaction and the recursive parity entangler ``U*_N``.

Gate *specifications* (``IdentityGate``, ``CartanGate``, ``UStarGate``,
``ExplicitGate``) are small immutable descriptions with a textual form::

    identity:2
    cartan:0.0981747704,1.1780972451,0.0981747704
    cartan:0.1,0.2,0.3:0.5,0.0        # with local pre-layer (beta, gamma)
    ustar:3:even:++

Angles may be given as decimals or as multiples of pi (``3pi/8``, ``pi/32``).
"""

from __future__ import annotations

import enum
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import is_unitary, tensor

TWO_PI = 2.0 * math.pi

I1 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_LETTERS = {"I": I1, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"


# ---------------------------------------------------------------------------
# single-qubit pieces
# ---------------------------------------------------------------------------

def basis_state(a: int, alpha: str) -> np.ndarray:
    """Eigenket ``|a; alpha>`` of sigma_z (alpha='z') or sigma_x (alpha='x')."""
    if a not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {a!r}")
    if alpha == "z":
        return I1[:, a].copy()
    if alpha == "x":
        return HADAMARD[:, a].copy()
    raise ValueError(f"basis must be 'z' or 'x', got {alpha!r}")


def product_state(bits, bases) -> np.ndarray:
    """``|a_1;alpha_1> ... |a_N;alpha_N>`` for equal-length bit and basis strings."""
    bits = [int(b) for b in bits]
    if len(bits) != len(bases):
        raise ValueError("bit string and basis string differ in length")
    return tensor(*(basis_state(a, al) for a, al in zip(bits, bases)))


def rotation(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle sigma_axis / 2)`` for axis 'y' or 'z'."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)
    raise ValueError(f"rotation axis must be 'y' or 'z', got {axis!r}")


def eve_premeasure_gate(beta: float, gamma: float) -> np.ndarray:
    """Rotation ``R_y(beta) R_z(gamma)`` applied before a z measurement.

    A trailing z rotation and the global phase cannot change z statistics,
    so two angles describe every single-qubit measurement basis.
    """
    return rotation("y", beta) @ rotation("z", gamma)


# named measurement bases as (beta, gamma)
NAMED_BASES = {
    "z": (0.0, 0.0),
    "x": (math.pi / 2, 0.0),
    "y": (math.pi / 2, math.pi / 2),
}


# ---------------------------------------------------------------------------
# two-qubit Cartan interaction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CartanParams:
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        vals = (self.c1, self.c2, self.c3)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"Cartan parameters must be finite, got {vals}")
        for name, v in zip(("c1", "c2", "c3"), vals):
            object.__setattr__(self, name, float(v) % TWO_PI)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)


C_STAR = CartanParams(math.pi / 32, 3 * math.pi / 8, math.pi / 32)


def cartan_gate(p: CartanParams | tuple[float, float, float]) -> np.ndarray:
    """``exp[(i/2)(c1 XX + c2 YY + c3 ZZ)]``.

    The three Pauli products commute and square to the identity, so the
    exponential is a product of ``cos(c/2) I + i sin(c/2) PP`` factors.
    """
    c = p.as_tuple() if isinstance(p, CartanParams) else tuple(float(v) for v in p)
    u = np.eye(4, dtype=complex)
    for cj, pauli in zip(c, (SIGMA_X, SIGMA_Y, SIGMA_Z)):
        pp = np.kron(pauli, pauli)
        u = u @ (math.cos(cj / 2) * np.eye(4) + 1j * math.sin(cj / 2) * pp)
    return u


# ---------------------------------------------------------------------------
# recursive entangler U*_N
# ---------------------------------------------------------------------------

def _check_signs(n: int, signs) -> str:
    if signs is None:
        signs = "+" * (n - 1)
    signs = "".join(signs)
    if len(signs) != n - 1 or any(ch not in "+-" for ch in signs):
        raise ValueError(f"U*_{n} needs {n - 1} signs from '+-', got {signs!r}")
    return signs


def u_star(n: int, parity: Parity = Parity.EVEN, signs=None) -> np.ndarray:
    """Build ``U*_n`` by ``U_{k+1} = [I (x) U_k +/- i Y (x) (P_k U_k)] / sqrt 2``.

    ``P_k`` is sigma_y on the leftmost of the ``k`` qubits.  ``signs`` holds
    one '+' or '-' per recursion step (length ``n - 1``, default all '+').
    """
    if n < 1:
        raise ValueError("U*_N needs N >= 1")
    parity = Parity(parity)
    signs = _check_signs(n, signs)
    u = I1.copy() if parity is Parity.EVEN else SIGMA_Y.copy()
    for k, sign in enumerate(signs, start=1):
        p_k = tensor(SIGMA_Y, np.eye(1 << (k - 1)))
        s = 1.0 if sign == "+" else -1.0
        u = (np.kron(I1, u) + s * 1j * np.kron(SIGMA_Y, p_k @ u)) / math.sqrt(2)
    return u


def word_operator(word: str) -> np.ndarray:
    """Tensor product named by a Pauli word such as ``"IYY"``."""
    return tensor(*(_LETTERS[ch] for ch in word))


def u_star_parity_expansion(n: int, parity: Parity = Parity.EVEN) -> list[str]:
    """All length-``n`` words over {I, Y} whose number of Y's has ``parity``."""
    if n < 1:
        raise ValueError("N >= 1 required")
    want = 0 if Parity(parity) is Parity.EVEN else 1
    return ["".join(w) for w in itertools.product("IY", repeat=n) if w.count("Y") % 2 == want]


def word_coefficients(u: np.ndarray) -> dict[str, complex]:
    """Hilbert-Schmidt coefficients of ``u`` over every {I, Y} word.

    Words over {I, Y} are orthogonal under ``tr(A^dag B) / 2^n``, so this
    projects ``u`` onto the span of those words.
    """
    n = u.shape[0].bit_length() - 1
    dim = 1 << n
    return {
        "".join(w): complex(np.trace(word_operator("".join(w)).conj().T @ u) / dim)
        for w in itertools.product("IY", repeat=n)
    }


# ---------------------------------------------------------------------------
# gate specifications
# ---------------------------------------------------------------------------

def format_angle(x: float) -> str:
    return f"{x:.10f}"


_PI_RE = re.compile(r"^([+-]?\d*\.?\d*)\*?pi(?:/(\d*\.?\d+))?$")


def parse_angle(text: str) -> float:
    """Parse a radian value: ``0.39``, ``pi``, ``-pi/2``, ``3pi/8``, ``3*pi/8``."""
    t = text.strip().lower().replace(" ", "")
    m = _PI_RE.match(t)
    if m:
        coef, den = m.groups()
        if coef in ("", "+"):
            k = 1.0
        elif coef == "-":
            k = -1.0
        else:
            k = float(coef)
        return k * math.pi / (float(den) if den else 1.0)
    try:
        value = float(t)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"angle must be finite, got {text!r}")
    return value


@dataclass(frozen=True)
class IdentityGate:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("identity gate needs n >= 1")

    @property
    def num_qubits(self) -> int:
        return self.n

    def to_text(self) -> str:
        return f"identity:{self.n}"


@dataclass(frozen=True)
class CartanGate:
    params: CartanParams
    local: tuple[float, float] | None = None

    num_qubits = 2

    def to_text(self) -> str:
        text = "cartan:" + ",".join(format_angle(v) for v in self.params.as_tuple())
        if self.local is not None:
            text += ":" + ",".join(format_angle(v) for v in self.local)
        return text


@dataclass(frozen=True)
class UStarGate:
    n: int
    parity: Parity = Parity.EVEN
    signs: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity(self.parity))
        object.__setattr__(self, "signs", _check_signs(self.n, self.signs))

    @property
    def num_qubits(self) -> int:
        return self.n

    def to_text(self) -> str:
        return f"ustar:{self.n}:{self.parity.value}:{self.signs}"


@dataclass(frozen=True)
class ExplicitGate:
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if not is_unitary(m, atol=1e-10):
            raise ValueError("explicit gate matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def to_text(self) -> str:
        raise ValueError("explicit gates have no textual form")


GateSpec = Union[IdentityGate, CartanGate, UStarGate, ExplicitGate]


def resolve(spec: GateSpec | np.ndarray) -> np.ndarray:
    """Concrete unitary for a gate specification."""
    if isinstance(spec, np.ndarray):
        spec = ExplicitGate(spec)
    if isinstance(spec, IdentityGate):
        return np.eye(1 << spec.n, dtype=complex)
    if isinstance(spec, CartanGate):
        u = cartan_gate(spec.params)
        if spec.local is not None:
            k = eve_premeasure_gate(*spec.local)
            u = u @ np.kron(k, k)
        return u
    if isinstance(spec, UStarGate):
        return u_star(spec.n, spec.parity, spec.signs)
    if isinstance(spec, ExplicitGate):
        return spec.matrix.copy()
    raise TypeError(f"not a gate specification: {spec!r}")


def parse_gate(text: str) -> GateSpec:
    """Inverse of ``to_text``; ``cartan:c*`` names the optimal two-qubit gate."""
    parts = text.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "identity" and len(parts) == 2:
            return IdentityGate(int(parts[1]))
        if kind == "cartan" and len(parts) in (2, 3):
            if parts[1].strip().lower() == "c*":
                c = list(C_STAR.as_tuple())
            else:
                c = [parse_angle(v) for v in parts[1].split(",")]
            if len(c) != 3:
                raise ValueError("cartan needs three parameters")
            local = None
            if len(parts) == 3:
                local = tuple(parse_angle(v) for v in parts[2].split(","))
                if len(local) != 2:
                    raise ValueError("local layer needs two angles")
            return CartanGate(CartanParams(*c), local)
        if kind == "ustar" and 2 <= len(parts) <= 4:
            n = int(parts[1])
            parity = Parity(parts[2].lower()) if len(parts) > 2 else Parity.EVEN
            signs = parts[3] if len(parts) > 3 else None
            return UStarGate(n, parity, signs)
    except ValueError as exc:
        raise ValueError(f"bad gate spec {text!r}: {exc}") from None
    raise ValueError(f"bad gate spec {text!r}")


def gate_num_qubits(spec: GateSpec | np.ndarray) -> int:
    if isinstance(spec, np.ndarray):
        return spec.shape[0].bit_length() - 1
    return spec.num_qubits
