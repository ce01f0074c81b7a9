from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from typing import Iterator, List, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ._exceptions import ParameterMismatchError


def is_prime(n: int) -> bool:
    """Trial-division primality test for the small moduli used here."""
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p must be a prime, got {p}")


@dataclass(frozen=True)
class PrimeFieldElement:
    """An element of the prime field F_p."""

    value: int
    p: int

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if not 0 <= self.value < self.p:
            raise ValueError(f"value must lie in [0, {self.p}), got {self.value}")

    def _coerce(self, other: PrimeFieldElement) -> int:
        if other.p != self.p:
            raise ParameterMismatchError(f"F_{self.p} and F_{other.p} elements mixed")
        return other.value

    def __add__(self, other: PrimeFieldElement) -> PrimeFieldElement:
        return PrimeFieldElement((self.value + self._coerce(other)) % self.p, self.p)

    def __sub__(self, other: PrimeFieldElement) -> PrimeFieldElement:
        return PrimeFieldElement((self.value - self._coerce(other)) % self.p, self.p)

    def __mul__(self, other: PrimeFieldElement) -> PrimeFieldElement:
        return PrimeFieldElement((self.value * self._coerce(other)) % self.p, self.p)

    def __neg__(self) -> PrimeFieldElement:
        return PrimeFieldElement(-self.value % self.p, self.p)

    def inverse(self) -> PrimeFieldElement:
        if self.value == 0:
            raise ZeroDivisionError("0 has no inverse in a field")
        return PrimeFieldElement(pow(self.value, self.p - 2, self.p), self.p)


@lru_cache(maxsize=None)
def truncated_convolution(s: int) -> NDArray[np.int64]:
    """Tensor T with T[a, b, k] = 1 iff a + b = k < s.

    Contracting two coefficient vectors against T multiplies them in
    F_p[t]/<t^s> (before reduction mod p).
    """
    tensor = np.zeros((s, s, s), dtype=np.int64)
    for a, b in product(range(s), repeat=2):
        if a + b < s:
            tensor[a, b, a + b] = 1
    tensor.setflags(write=False)
    return tensor


def poly_mul_array(
    a: NDArray[np.int64], b: NDArray[np.int64], p: int
) -> NDArray[np.int64]:
    """Vectorised product in R = F_p[t]/<t^s> over the last axis.

    Leading axes broadcast against each other.

    Examples
    --------
    >>> import numpy as np
    >>> from cosetexpanders._algebra import poly_mul_array
    >>> poly_mul_array(np.array([1, 1, 0]), np.array([1, 1, 1]), 3)
    array([1, 2, 2])
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    conv = truncated_convolution(a.shape[-1])
    a, b = np.broadcast_arrays(a, b)
    return np.einsum("...i,...j,ijk->...k", a, b, conv) % p


@dataclass(frozen=True)
class TruncatedPoly:
    """An element of R = F_p[t]/<t^s>.

    Parameters
    ----------
    coeffs : Tuple[int, ...]
        Coefficients, constant term first, exactly `s` of them and all
        reduced mod `p`.
    p : int
        Characteristic of the base field, a prime.
    s : int
        Truncation order.

    Examples
    --------
    >>> from cosetexpanders import TruncatedPoly
    >>> a = TruncatedPoly.from_coeffs([1, 1], p=3, s=3)
    >>> b = TruncatedPoly.from_coeffs([1, 1, 1], p=3, s=3)
    >>> print(a * b)
    1+2*t+2*t^2
    >>> print(TruncatedPoly.from_string("1+1*t", p=2, s=2) * a.cast(2, 2))
    1
    """

    coeffs: Tuple[int, ...]
    p: int
    s: int

    def __post_init__(self) -> None:
        _check_prime(self.p)
        if self.s < 1:
            raise ValueError(f"s must be at least 1, got {self.s}")
        if len(self.coeffs) != self.s:
            raise ValueError(f"expected {self.s} coefficients, got {len(self.coeffs)}")
        if any(not 0 <= c < self.p for c in self.coeffs):
            raise ValueError(f"coefficients must be reduced mod {self.p}")

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[int], p: int, s: int) -> TruncatedPoly:
        """Reduce arbitrary integer coefficients into R, discarding t^k for k >= s."""
        padded = [int(c) % p for c in list(coeffs)[:s]]
        padded += [0] * (s - len(padded))
        return cls(tuple(padded), p, s)

    @classmethod
    def zero(cls, p: int, s: int) -> TruncatedPoly:
        return cls.from_coeffs([], p, s)

    @classmethod
    def one(cls, p: int, s: int) -> TruncatedPoly:
        return cls.from_coeffs([1], p, s)

    @classmethod
    def variable(cls, p: int, s: int) -> TruncatedPoly:
        """The class of t (which is zero when s = 1)."""
        return cls.from_coeffs([0, 1], p, s)

    @classmethod
    def from_string(cls, text: str, p: int, s: int) -> TruncatedPoly:
        """Parse the "c0+c1*t+c2*t^2" form produced by `str`."""
        coeffs = [0] * max(s, 1)
        text = text.strip()
        if text == "0":
            return cls.zero(p, s)
        for term in text.split("+"):
            if "*t" not in term:
                coeff, power = term, 0
            else:
                coeff, monomial = term.split("*")
                power = int(monomial[2:]) if "^" in monomial else 1
            if power < s:
                coeffs[power] = (coeffs[power] + int(coeff)) % p
        return cls.from_coeffs(coeffs, p, s)

    @classmethod
    def all_elements(cls, p: int, s: int) -> Iterator[TruncatedPoly]:
        for coeffs in product(range(p), repeat=s):
            yield cls(tuple(coeffs), p, s)

    def cast(self, p: int, s: int) -> TruncatedPoly:
        """Reinterpret the coefficients over another (p, s)."""
        return TruncatedPoly.from_coeffs(self.coeffs, p, s)

    @property
    def degree(self) -> int:
        """Degree of the canonical representative, -1 for zero."""
        nonzero = [k for k, c in enumerate(self.coeffs) if c]
        return nonzero[-1] if nonzero else -1

    @property
    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def as_array(self) -> NDArray[np.int64]:
        return np.array(self.coeffs, dtype=np.int64)

    def coefficients(self) -> List[PrimeFieldElement]:
        return [PrimeFieldElement(c, self.p) for c in self.coeffs]

    def _check(self, other: TruncatedPoly) -> None:
        if (self.p, self.s) != (other.p, other.s):
            raise ParameterMismatchError(
                f"R(p={self.p}, s={self.s}) and R(p={other.p}, s={other.s}) mixed"
            )

    def __add__(self, other: TruncatedPoly) -> TruncatedPoly:
        return ring_add(self, other)

    def __sub__(self, other: TruncatedPoly) -> TruncatedPoly:
        return ring_add(self, -other)

    def __neg__(self) -> TruncatedPoly:
        return TruncatedPoly(tuple(-c % self.p for c in self.coeffs), self.p, self.s)

    def __mul__(self, other: TruncatedPoly) -> TruncatedPoly:
        return ring_mul(self, other)

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(f"{c}")
            elif k == 1:
                terms.append(f"{c}*t")
            else:
                terms.append(f"{c}*t^{k}")
        return "+".join(terms) if terms else "0"


def ring_add(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """Coefficient-wise sum in R."""
    a._check(b)
    coeffs = tuple((x + y) % a.p for x, y in zip(a.coeffs, b.coeffs))
    return TruncatedPoly(coeffs, a.p, a.s)


def ring_mul(a: TruncatedPoly, b: TruncatedPoly) -> TruncatedPoly:
    """Product in R: the polynomial product with every t^k, k >= s, dropped."""
    a._check(b)
    coeffs = [0] * a.s
    for i, x in enumerate(a.coeffs):
        if x == 0:
            continue
        for j in range(a.s - i):
            coeffs[i + j] += x * b.coeffs[j]
    return TruncatedPoly(tuple(c % a.p for c in coeffs), a.p, a.s)


# ---------------------------------------------------------------------------
# Plain polynomials over F_p (no truncation), coefficient lists constant first.


def _trim(poly: List[int]) -> List[int]:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def poly_mod(num: Sequence[int], den: Sequence[int], p: int) -> List[int]:
    """Remainder of `num` divided by the nonzero polynomial `den` over F_p."""
    rem = _trim([c % p for c in num])
    den = _trim([c % p for c in den])
    if not den:
        raise ZeroDivisionError("division by the zero polynomial")
    lead_inv = pow(den[-1], p - 2, p)
    while len(rem) >= len(den):
        factor = rem[-1] * lead_inv % p
        shift = len(rem) - len(den)
        for k, c in enumerate(den):
            rem[shift + k] = (rem[shift + k] - factor * c) % p
        _trim(rem)
    return rem


def poly_mul_full(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _monics(p: int, deg: int) -> Iterator[Tuple[int, ...]]:
    """Monic polynomials of a degree, constant term first.

    Candidates come out in ascending order of their coefficient tuple
    compared from the leading end, i.e. of sum(c_k * p**k).
    """
    for low in product(range(p), repeat=deg):
        yield tuple(reversed(low)) + (1,)


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic of degree 1 .. deg-1."""
    deg = len(_trim(list(poly))) - 1
    for k in range(1, deg):
        for divisor in _monics(p, k):
            if not poly_mod(poly, divisor, p):
                return False
    return deg >= 1


def find_irreducible(p: int, deg: int) -> Tuple[int, ...]:
    """Smallest monic irreducible polynomial of a given degree over F_p.

    Parameters
    ----------
    p : int
        Prime characteristic.
    deg : int
        Degree, at least 1.

    Returns
    -------
    Tuple[int, ...]
        Coefficients constant term first, the leading 1 included.

    Examples
    --------
    >>> from cosetexpanders import find_irreducible
    >>> find_irreducible(2, 3)
    (1, 1, 0, 1)
    >>> find_irreducible(3, 3)
    (1, 2, 0, 1)
    """
    _check_prime(p)
    if deg < 1:
        raise ValueError(f"deg must be at least 1, got {deg}")
    for candidate in _monics(p, deg):
        if is_irreducible(candidate, p):
            return candidate
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def format_modulus(modulus: Sequence[int]) -> str:
    """Render a polynomial in y, leading term first: (1, 1, 0, 1) -> y^3+y+1."""
    terms = []
    for k in range(len(modulus) - 1, -1, -1):
        c = modulus[k]
        if c == 0:
            continue
        mono = "" if k == 0 else ("y" if k == 1 else f"y^{k}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) if terms else "0"


@dataclass(frozen=True)
class ExtFieldElement:
    """An element of F_q = F_p[y]/<mu(y)>, coefficients constant term first."""

    coeffs: Tuple[int, ...]
    modulus: Tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        if len(self.coeffs) != len(self.modulus) - 1:
            raise ValueError("an element needs deg(mu) coefficients")
        if any(not 0 <= c < self.p for c in self.coeffs):
            raise ValueError(f"coefficients must be reduced mod {self.p}")

    @classmethod
    def from_coeffs(
        cls, coeffs: Sequence[int], modulus: Sequence[int], p: int
    ) -> ExtFieldElement:
        rem = poly_mod(coeffs, modulus, p)
        deg = len(modulus) - 1
        return cls(tuple(rem + [0] * (deg - len(rem))), tuple(modulus), p)

    def _check(self, other: ExtFieldElement) -> None:
        if (self.modulus, self.p) != (other.modulus, other.p):
            raise ParameterMismatchError("elements of different extension fields")

    def __add__(self, other: ExtFieldElement) -> ExtFieldElement:
        return ext_add(self, other)

    def __mul__(self, other: ExtFieldElement) -> ExtFieldElement:
        return ext_mul(self, other)

    def __neg__(self) -> ExtFieldElement:
        coeffs = tuple(-c % self.p for c in self.coeffs)
        return ExtFieldElement(coeffs, self.modulus, self.p)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def inverse(self) -> ExtFieldElement:
        return ext_inverse(self)

    def __str__(self) -> str:
        return format_modulus(self.coeffs)


def ext_add(a: ExtFieldElement, b: ExtFieldElement) -> ExtFieldElement:
    a._check(b)
    coeffs = tuple((x + y) % a.p for x, y in zip(a.coeffs, b.coeffs))
    return ExtFieldElement(coeffs, a.modulus, a.p)


def ext_mul(a: ExtFieldElement, b: ExtFieldElement) -> ExtFieldElement:
    """Product in F_q, reduced modulo mu(y).

    Examples
    --------
    >>> from cosetexpanders import ExtFieldElement, find_irreducible, ext_mul
    >>> mu = find_irreducible(2, 3)
    >>> y = ExtFieldElement((0, 1, 0), mu, 2)
    >>> y2 = ExtFieldElement((0, 0, 1), mu, 2)
    >>> print(ext_mul(y, y2))
    y+1
    """
    a._check(b)
    return ExtFieldElement.from_coeffs(
        poly_mul_full(a.coeffs, b.coeffs, a.p), a.modulus, a.p
    )


def ext_inverse(a: ExtFieldElement) -> ExtFieldElement:
    """Multiplicative inverse, a^(q-2)."""
    if a.is_zero:
        raise ZeroDivisionError("0 has no inverse in a field")
    q = a.p ** len(a.coeffs)
    result = ExtFieldElement.from_coeffs([1], a.modulus, a.p)
    base, exponent = a, q - 2
    while exponent:
        if exponent & 1:
            result = ext_mul(result, base)
        base = ext_mul(base, base)
        exponent >>= 1
    return result


class ExtensionField:
    """F_{p^degree} with integer-encoded elements and lookup tables.

    Element ``a0 + a1*y + ... `` is encoded as ``a0 + a1*p + a2*p^2 + ...``.
    The modulus is `find_irreducible(p, degree)` unless given.

    Examples
    --------
    >>> from cosetexpanders import ExtensionField
    >>> F8 = ExtensionField(2, 3)
    >>> F8.q, F8.modulus
    (8, (1, 1, 0, 1))
    >>> int(F8.mul[2, 4])  # y * y^2 = y + 1
    3
    """

    def __init__(self, p: int, degree: int, modulus: Sequence[int] = ()) -> None:
        _check_prime(p)
        self.p = p
        self.degree = degree
        self.modulus = tuple(modulus) if modulus else find_irreducible(p, degree)
        if len(self.modulus) != degree + 1 or not is_irreducible(self.modulus, p):
            raise ValueError(f"{self.modulus} is not an irreducible of degree {degree}")
        self.q = p**degree

    def element(self, code: int) -> ExtFieldElement:
        digits = [(code // self.p**k) % self.p for k in range(self.degree)]
        return ExtFieldElement(tuple(digits), self.modulus, self.p)

    def encode(self, element: ExtFieldElement) -> int:
        return sum(c * self.p**k for k, c in enumerate(element.coeffs))

    @cached_property
    def digits(self) -> NDArray[np.int64]:
        """Row `code` holds the coefficients of element `code`."""
        codes = np.arange(self.q)
        return (codes[:, None] // self.p ** np.arange(self.degree)) % self.p

    @cached_property
    def add(self) -> NDArray[np.int64]:
        summed = (self.digits[:, None, :] + self.digits[None, :, :]) % self.p
        return summed @ (self.p ** np.arange(self.degree))

    @cached_property
    def neg(self) -> NDArray[np.int64]:
        return ((-self.digits) % self.p) @ (self.p ** np.arange(self.degree))

    @cached_property
    def mul(self) -> NDArray[np.int64]:
        table = np.zeros((self.q, self.q), dtype=np.int64)
        elements = [self.element(code) for code in range(self.q)]
        for i, a in enumerate(elements):
            for j in range(i, self.q):
                table[i, j] = table[j, i] = self.encode(ext_mul(a, elements[j]))
        return table
