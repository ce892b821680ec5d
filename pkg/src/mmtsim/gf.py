"""GF(2^u) finite field arithmetic for coding coefficients and payload symbols.

Elements are integers in [0, 2^u) whose bits are polynomial coefficients over
GF(2); arithmetic is modulo an irreducible reduction polynomial of degree u.
Addition is XOR (characteristic 2, so subtraction coincides with addition).

Multiplication strategy:
  * u <= 8  : log/antilog tables over a primitive element, plus a full q x q
              product table used for vectorised numpy payload operations.
  * u 9..16 : carry-less multiply followed by modular reduction (no tables).

The reduction polynomial is checked for irreducibility at construction by
trial division against every polynomial of degree 1..u/2.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .errors import FieldMismatchError, InvalidParameterError

# Default reduction polynomials, keyed by bit width u.  Encoded as bit
# patterns with the leading term included, e.g. x^8+x^4+x^3+x+1 -> 0x11B.
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11B,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def _poly_mod(dividend: int, divisor: int) -> int:
    """Remainder of carry-less polynomial division over GF(2)."""
    dlen = divisor.bit_length()
    while dividend.bit_length() >= dlen:
        dividend ^= divisor << (dividend.bit_length() - dlen)
    return dividend


def is_irreducible(poly: int, u: int) -> bool:
    """Trial division by every polynomial of degree 1..u//2."""
    if poly.bit_length() != u + 1:
        return False
    for d in range(1, u // 2 + 1):
        for candidate in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, candidate) == 0:
                return False
    return True


def _prime_factors(m: int) -> list[int]:
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out.append(m)
    return out


class Field:
    """The field spec: bit width u, size q = 2^u, and reduction polynomial.

    All operations take and return plain ints; :class:`FieldElement` wraps
    them with per-operand spec checking for callers that want it.
    """

    def __init__(self, u: int = 8, reduction_poly: int | None = None):
        if not 1 <= u <= 16:
            raise InvalidParameterError(f"bit width u must be in [1, 16], got {u}")
        if reduction_poly is None:
            reduction_poly = DEFAULT_POLYS[u]
        if not is_irreducible(reduction_poly, u):
            raise InvalidParameterError(
                f"reduction polynomial {reduction_poly:#x} is not an irreducible "
                f"polynomial of degree {u}"
            )
        self.u = u
        self.q = 1 << u
        self.reduction_poly = reduction_poly
        self.dtype = np.uint8 if u <= 8 else np.uint16

        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        self._mul_table: np.ndarray | None = None
        if u <= 8:
            self._build_tables()

    # -- identity ----------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Field)
            and self.u == other.u
            and self.reduction_poly == other.reduction_poly
        )

    def __hash__(self) -> int:
        return hash((self.u, self.reduction_poly))

    def __repr__(self) -> str:
        return f"Field(u={self.u}, reduction_poly={self.reduction_poly:#x})"

    def to_config(self) -> dict:
        """Serialised form used inside run-config metadata."""
        return {"u": self.u, "reduction_poly": f"{self.reduction_poly:#x}"}

    @classmethod
    def from_config(cls, cfg: dict) -> "Field":
        return cls(int(cfg["u"]), int(str(cfg["reduction_poly"]), 16))

    # -- table construction (u <= 8) ----------------------------------------

    def _mul_slow(self, a: int, b: int) -> int:
        """Carry-less multiply then reduce.  Works for any u."""
        prod = 0
        while b:
            if b & 1:
                prod ^= a
            a <<= 1
            b >>= 1
        return _poly_mod(prod, self.reduction_poly)

    def _find_generator(self) -> int:
        """Smallest primitive element of the multiplicative group."""
        m = self.q - 1
        if m == 1:
            return 1
        factors = _prime_factors(m)
        for g in range(2, self.q):
            if all(self._pow_slow(g, m // p) != 1 for p in factors):
                return g
        raise RuntimeError("no generator found")  # pragma: no cover

    def _pow_slow(self, a: int, e: int) -> int:
        out = 1
        base = a
        while e:
            if e & 1:
                out = self._mul_slow(out, base)
            base = self._mul_slow(base, base)
            e >>= 1
        return out

    def _build_tables(self) -> None:
        g = self._find_generator()
        exp = [0] * (2 * self.q)
        log = [0] * self.q
        x = 1
        for i in range(self.q - 1):
            exp[i] = x
            log[x] = i
            x = self._mul_slow(x, g)
        for i in range(self.q - 1, 2 * self.q):
            exp[i] = exp[i - (self.q - 1)]
        self._exp = exp
        self._log = log
        table = np.zeros((self.q, self.q), dtype=self.dtype)
        for a in range(1, self.q):
            for b in range(1, self.q):
                table[a, b] = exp[log[a] + log[b]]
        self._mul_table = table

    # -- scalar operations ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        """Field addition: bitwise XOR."""
        return a ^ b

    sub = add  # characteristic 2

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_slow(a, b)

    def inv(self, a: int) -> int:
        """Multiplicative inverse; raises ZeroDivisionError for 0."""
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        if self._exp is not None:
            return self._exp[(self.q - 1) - self._log[a]]
        return self._pow_slow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # -- sampling ------------------------------------------------------------

    def sample(self, rng: random.Random, nonzero: bool = False) -> int:
        """Uniform draw from [0, q), or [1, q) when ``nonzero`` is set."""
        if nonzero:
            return rng.randrange(1, self.q)
        return rng.randrange(self.q)

    # -- vector operations (numpy payload rows) ------------------------------

    def mul_vec(self, c: int, v: np.ndarray) -> np.ndarray:
        """Scalar times vector, elementwise in the field."""
        if c == 0:
            return np.zeros_like(v)
        if c == 1:
            return v.copy()
        if self._mul_table is not None:
            return self._mul_table[c][v]
        return np.array([self.mul(c, int(x)) for x in v], dtype=self.dtype)

    def addmul_vec(self, acc: np.ndarray, c: int, v: np.ndarray) -> None:
        """acc ^= c * v, in place."""
        if c == 0:
            return
        if c == 1:
            np.bitwise_xor(acc, v, out=acc)
        elif self._mul_table is not None:
            np.bitwise_xor(acc, self._mul_table[c][v], out=acc)
        else:
            for i in range(len(acc)):
                acc[i] ^= self.mul(c, int(v[i]))

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, value)

    def elements(self) -> range:
        return range(self.q)


@dataclass(frozen=True)
class FieldElement:
    """One element bound to its field spec; operators check spec equality."""

    field: Field
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise InvalidParameterError(
                f"value {self.value} outside [0, {self.field.q})"
            )

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatchError(
                f"operands from different fields: {self.field} vs {other.field}"
            )

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.value, other.value))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __repr__(self) -> str:
        return f"FieldElement(GF(2^{self.field.u}), {self.value:#x})"
