"""Exact arithmetic in Q(a_2), a_2 = 2cos(pi/n), for odd prime n.

Elements are coefficient vectors over the power basis 1, a_2, ..., a_2^(d-1)
with d = (n-1)/2, always kept reduced modulo the minimal polynomial q_n.
Diagonal lengths a_k of the regular n-gon, triangle areas, the length
substitution matrix and the tile substitution matrix are built on top.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

Matrix = tuple[tuple[Fraction, ...], ...]


class ConfigurationError(ValueError):
    """Raised for an unsupported order of symmetry or malformed input."""


class InadmissibleError(ValueError):
    """The substitution matrix has non-integer or negative entries."""

    def __init__(self, message, entries=()):
        super().__init__(message)
        self.entries = list(entries)


def is_odd_prime(n: int) -> bool:
    if n < 3 or n % 2 == 0:
        return False
    return all(n % p for p in range(3, math.isqrt(n) + 1, 2))


def check_order(n: int) -> None:
    if not isinstance(n, int) or not is_odd_prime(n) or n < 5:
        raise ConfigurationError(f"order of symmetry must be an odd prime >= 5, got {n!r}")


# --- integer polynomial helpers (coefficient lists, lowest degree first) ---

def _poly_sub(a, b):
    m = max(len(a), len(b))
    a = list(a) + [0] * (m - len(a))
    b = list(b) + [0] * (m - len(b))
    return [x - y for x, y in zip(a, b)]


def _poly_shift(a):
    return [0] + list(a)


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


@lru_cache(maxsize=None)
def chebyshev_lengths(n: int) -> tuple[tuple[int, ...], ...]:
    """Unreduced integer polynomials in x = a_2 for a_{-1}, a_0, ..., a_n.

    Index 0 of the returned tuple is a_{-1} = -1; index k+1 is a_k.
    """
    polys = [(-1,), (0,), (1,)]
    for _ in range(2, n + 1):
        nxt = _poly_sub(_poly_shift(polys[-1]), polys[-2])
        polys.append(tuple(_trim(nxt)) or (0,))
    return tuple(polys)


@dataclass(frozen=True)
class MinimalPolynomial:
    n: int
    coeffs: tuple[int, ...]  # lowest degree first, monic

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def companion(self) -> tuple[tuple[int, ...], ...]:
        """Matrix A with v(a_2 * b) = A v(b) in the power basis."""
        d = self.degree
        rows = [[0] * d for _ in range(d)]
        for j in range(d - 1):
            rows[j + 1][j] = 1
        for i in range(d):
            rows[i][d - 1] = -self.coeffs[i]
        return tuple(tuple(r) for r in rows)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("x" if k == 1 else f"x^{k}")
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


@lru_cache(maxsize=None)
def minimal_polynomial(n: int) -> MinimalPolynomial:
    """q_n from the equality of the two longest diagonals, a_{(n+1)/2} = a_{(n-1)/2}."""
    check_order(n)
    polys = chebyshev_lengths(n)
    hi = polys[(n + 1) // 2 + 1]
    lo = polys[(n - 1) // 2 + 1]
    q = _trim(_poly_sub(hi, lo))
    if len(q) - 1 != (n - 1) // 2 or q[-1] != 1:
        raise AssertionError(f"unexpected relation polynomial {q} for n={n}")
    _assert_irreducible(q)
    return MinimalPolynomial(n, tuple(q))


def _assert_irreducible(q):
    import sympy

    x = sympy.Symbol("x")
    if not sympy.Poly(list(reversed(q)), x).is_irreducible:
        raise AssertionError(f"relation polynomial {q} is reducible")


def reduce_poly(coeffs: Sequence, q: Sequence[int]) -> list:
    """Reduce a coefficient list modulo the monic polynomial q."""
    d = len(q) - 1
    out = list(coeffs)
    for k in range(len(out) - 1, d - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            for i in range(d):
                out[k - d + i] -= c * q[i]
    out = out[:d]
    return out + [0] * (d - len(out))


def mulmod(a: Sequence, b: Sequence, q: Sequence[int]) -> list:
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return reduce_poly(prod, q)


@lru_cache(maxsize=None)
def _root_float(n: int) -> float:
    return 2.0 * math.cos(math.pi / n)


def _interval_sign(n: int, coeffs: Sequence[Fraction]) -> int:
    prec = 64
    while True:
        with mpmath.workprec(prec):
            iv = mpmath.iv
            x = 2 * iv.cos(iv.pi / n)
            acc = iv.mpf(0)
            for c in reversed(coeffs):
                c = Fraction(c)
                acc = acc * x + iv.mpf(c.numerator) / iv.mpf(c.denominator)
            if acc.a > 0:
                return 1
            if acc.b < 0:
                return -1
        prec *= 2


def exact_sign(n: int, coeffs: Sequence) -> int:
    """Sign of sum(coeffs[i] * a_2^i), reduced coefficients, decided exactly."""
    if not any(coeffs):
        return 0
    return _interval_sign(n, coeffs)


class FieldElement:
    """An element of Q(a_2), immutable, reduced modulo q_n."""

    __slots__ = ("n", "coeffs", "_hash")

    def __init__(self, n: int, coeffs: Iterable):
        q = minimal_polynomial(n).coeffs
        self.n = n
        self.coeffs = tuple(Fraction(c) for c in reduce_poly(list(coeffs), q))
        self._hash = None

    @classmethod
    def from_int(cls, n: int, value) -> FieldElement:
        return cls(n, [value])

    @classmethod
    def generator(cls, n: int) -> FieldElement:
        return cls(n, [0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def _coerce(self, other) -> FieldElement:
        if isinstance(other, FieldElement):
            if other.n != self.n:
                raise ValueError("elements from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.n, [other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.n, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.n, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.n, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.n, [a * other for a in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        q = minimal_polynomial(self.n).coeffs
        return FieldElement(self.n, mulmod(self.coeffs, other.coeffs, q))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = FieldElement.from_int(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElement.from_int(self.n, other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.coeffs))
        return self._hash

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def int_coeffs(self) -> tuple[int, ...]:
        if not self.is_integral():
            raise ValueError(f"{self} has non-integer coefficients")
        return tuple(int(c) for c in self.coeffs)

    def sign(self) -> int:
        return exact_sign(self.n, self.coeffs)

    def __float__(self):
        x = _root_float(self.n)
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc

    def evaluate(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"FieldElement({self.n}, {[str(c) for c in self.coeffs]})"


def field_mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def field_sign(x: FieldElement) -> int:
    return x.sign()


@lru_cache(maxsize=None)
def length_vector(n: int, k: int) -> FieldElement:
    """a_k as a reduced element: a_0 = 0, a_1 = 1, a_{k+1} = a_2 a_k - a_{k-1}."""
    check_order(n)
    if not 0 <= k <= n:
        raise IndexError(f"length index {k} outside 0..{n}")
    return FieldElement(n, chebyshev_lengths(n)[k + 1])


def length_class(n: int, k: int) -> int:
    """Index in 1..(n-1)/2 of the diagonal with the same length as a_k."""
    k %= 2 * n
    if k > n:
        k = 2 * n - k
    return min(k, n - k)


# --- exact rational linear algebra ---

def mat_mul(a, b):
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0])))
        for i in range(len(a))
    )


def mat_inverse(a) -> Matrix:
    """Gauss-Jordan inverse over Q; raises ZeroDivisionError when singular."""
    m = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(a)]
    for col in range(m):
        piv = next((r for r in range(col, m) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[m:]) for row in aug)


def mat_integral(a) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(x) for x in row) for row in a)


def columns_to_matrix(cols) -> Matrix:
    return tuple(tuple(Fraction(col[i]) for col in cols) for i in range(len(cols[0])))


def multiplication_matrix(b: FieldElement) -> Matrix:
    """p_b(A): the matrix with v(b * c) = p_b(A) v(c), evaluated by Horner in A."""
    mp = minimal_polynomial(b.n)
    d = mp.degree
    comp = tuple(tuple(Fraction(x) for x in row) for row in mp.companion)
    ident = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    acc = tuple(tuple(Fraction(0) for _ in range(d)) for _ in range(d))
    for c in reversed(b.coeffs):
        acc = mat_mul(acc, comp)
        acc = tuple(tuple(acc[i][j] + c * ident[i][j] for j in range(d)) for i in range(d))
    return acc


# --- inflation factors ---

@dataclass(frozen=True)
class InflationFactor:
    """lambda = sum(coeffs_by_length[i-1] * a_i) for i = 1..(n-1)/2."""

    n: int
    coeffs_by_length: tuple[int, ...]

    def __post_init__(self):
        check_order(self.n)
        d = (self.n - 1) // 2
        if len(self.coeffs_by_length) != d:
            raise ConfigurationError(f"inflation factor needs {d} coefficients, got {len(self.coeffs_by_length)}")
        if any(c < 0 for c in self.coeffs_by_length) or not any(self.coeffs_by_length):
            raise ConfigurationError("inflation coefficients must be non-negative and not all zero")

    @classmethod
    def parse(cls, n: int, text: str) -> InflationFactor:
        return cls(n, tuple(int(tok) for tok in text.replace(",", " ").split()))

    @property
    def value(self) -> FieldElement:
        out = FieldElement.from_int(self.n, 0)
        for i, c in enumerate(self.coeffs_by_length, start=1):
            if c:
                out = out + length_vector(self.n, i) * c
        return out

    def __float__(self):
        return float(self.value)

    def is_trivial(self) -> bool:
        return self.value == 1

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs_by_length, start=1):
            if c:
                name = "1" if i == 1 else f"a{i}"
                parts.append(name if c == 1 else f"{c}*{name}")
        return " + ".join(parts)


def length_matrix(n: int, lam: InflationFactor) -> tuple[tuple[int, ...], ...]:
    """X = L^-1 p_lam(A) L; column i expresses lam * a_i over a_1..a_d."""
    d = minimal_polynomial(n).degree
    lengths = columns_to_matrix([length_vector(n, i).coeffs for i in range(1, d + 1)])
    try:
        inv = mat_inverse(lengths)
    except ZeroDivisionError:  # pragma: no cover - impossible for prime n
        raise AssertionError("length basis matrix is singular")
    x = mat_mul(mat_mul(inv, multiplication_matrix(lam.value)), lengths)
    if any(v.denominator != 1 for row in x for v in row):
        raise AssertionError(f"non-integral length matrix {x}")
    return mat_integral(x)


def length_basis_matrix(n: int) -> Matrix:
    d = minimal_polynomial(n).degree
    return columns_to_matrix([length_vector(n, i).coeffs for i in range(1, d + 1)])


# --- triangles and areas ---

def normalize_triple(n: int, triple) -> tuple[int, int, int]:
    t = tuple(sorted(int(k) for k in triple))
    if len(t) != 3 or t[0] < 1 or sum(t) != n:
        raise ConfigurationError(f"invalid angle triple {triple!r} for n={n}")
    return t


@lru_cache(maxsize=None)
def _narrow_area(n: int, k: int) -> FieldElement:
    # T(1, k, n-k-1) glued to T(1, k-1, n-k) gives T(1,1,n-2) scaled by a_k
    if k == 0:
        return FieldElement.from_int(n, 0)
    ak = length_vector(n, k)
    return ak * ak - _narrow_area(n, k - 1)


@lru_cache(maxsize=None)
def area_vector(n: int, triple) -> FieldElement:
    """area(T) / area(T(1,1,n-2)) for the triangle with the given angles."""
    check_order(n)
    k1, k2, k3 = normalize_triple(n, triple)
    if k1 == 1:
        return _narrow_area(n, k2)
    # non-narrow T(k, l, m): a_k^2 * T(1, l, .) - a_l^2 * T(1, k-1, .)
    k, l = k1, k2
    ak, al = length_vector(n, k), length_vector(n, l)
    return ak * ak * _narrow_area(n, l) - al * al * _narrow_area(n, k - 1)


def area_table(n: int) -> dict[tuple[int, int, int], FieldElement]:
    out = {}
    for k1 in range(1, n):
        for k2 in range(k1, n):
            k3 = n - k1 - k2
            if k3 >= k2:
                out[(k1, k2, k3)] = area_vector(n, (k1, k2, k3))
    return out


def raw_substitution_matrix(n: int, prototiles, lam: InflationFactor) -> Matrix:
    """B^-1 p_lam(A)^2 B over Q, without admissibility screening."""
    d = minimal_polynomial(n).degree
    protos = [normalize_triple(n, t) for t in prototiles]
    if len(protos) != d:
        raise ConfigurationError(f"need {d} prototiles for the areas to form a basis, got {len(protos)}")
    basis = columns_to_matrix([area_vector(n, t).coeffs for t in protos])
    try:
        inv = mat_inverse(basis)
    except ZeroDivisionError:
        raise ConfigurationError("areas not a basis") from None
    p = multiplication_matrix(lam.value)
    return mat_mul(mat_mul(inv, mat_mul(p, p)), basis)


def substitution_matrix(n: int, prototiles, lam: InflationFactor) -> tuple[tuple[int, ...], ...]:
    """Integer tile-count matrix M; entry (i, j) counts prototile i in sigma(prototile j)."""
    raw = raw_substitution_matrix(n, prototiles, lam)
    bad = [
        (i, j, raw[i][j])
        for i in range(len(raw))
        for j in range(len(raw))
        if raw[i][j].denominator != 1 or raw[i][j] < 0
    ]
    if bad:
        desc = ", ".join(f"M[{i}][{j}]={v}" for i, j, v in bad)
        raise InadmissibleError(f"substitution matrix not admissible: {desc}", bad)
    return mat_integral(raw)


def matrix_power(m, k: int):
    size = len(m)
    out = tuple(tuple(int(i == j) for j in range(size)) for i in range(size))
    for _ in range(k):
        out = tuple(tuple(sum(out[i][t] * m[t][j] for t in range(size)) for j in range(size)) for i in range(size))
    return out


# --- PV / unit classification ---

def conjugate_roots(n: int) -> list[float]:
    """Numeric roots 2cos((2j-1)pi/n) of q_n, the first one being a_2."""
    d = (n - 1) // 2
    return [2.0 * math.cos((2 * j - 1) * math.pi / n) for j in range(1, d + 1)]


@dataclass(frozen=True)
class FactorClass:
    value: float
    conjugates: tuple[float, ...]
    norm: int
    pv: bool
    unit: bool

    def describe(self) -> str:
        return f"{'PV' if self.pv else 'not PV'}, {'unit' if self.unit else 'not a unit'}"


def classify_factor(lam: InflationFactor, margin: float = 1e-6) -> FactorClass:
    """PV status from numeric conjugates; unit status from the exact norm det p_lam(A)."""
    n = lam.n
    val = lam.value
    roots = conjugate_roots(n)
    images = [float(val.evaluate(mpmath.mpf(r))) for r in roots]
    others = images[1:]
    if any(abs(abs(c) - 1.0) <= margin for c in others):
        raise ArithmeticError("a conjugate lies too close to the unit circle to classify")
    pv = images[0] > 1.0 and all(abs(c) < 1.0 for c in others)
    norm = _det(multiplication_matrix(val))
    if norm.denominator != 1:  # pragma: no cover - algebraic integers have integral norm
        raise AssertionError("non-integral norm")
    return FactorClass(images[0], tuple(others), int(norm), pv, abs(norm) == 1)


def _det(a) -> Fraction:
    m = [list(map(Fraction, row)) for row in a]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, size):
            f = m[r][col] / m[col][col]
            m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det
