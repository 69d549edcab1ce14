"""Grassmann algebras over an arbitrary coefficient ring.

An element of the Grassmann algebra on ``n`` generators is stored as a sparse
map from monomial bitmasks to coefficients.  Generator ``i`` (0-based)
corresponds to bit ``1 << i`` and a monomial is always written with its
generators in increasing order, so the sign of a product is the parity of the
number of inversions of the concatenated index lists.

Coefficients may be ints, ``Fraction``, floats, complex numbers or numpy
arrays.  Array coefficients let one algebraic computation run over a whole
batch of quadrature nodes at once; every operation here is coefficientwise
linear, so this only requires the coefficients to support ``+``, ``-`` and
``*``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import DimensionError, DomainError, ParityError

MAX_GENERATORS = 32
DEFAULT_ATOL = 1e-12


def _popcount(x: int) -> int:
    return x.bit_count()


def inversions(a: int, b: int) -> int:
    """Number of pairs (i in a, j in b) with i > j."""
    count = 0
    while b:
        low = b & -b
        count += _popcount(a & ~((low << 1) - 1))
        b ^= low
    return count


def reorder_sign(a: int, b: int) -> int:
    """Sign of ``eta^a eta^b`` relative to the sorted monomial ``eta^(a|b)``.

    The masks are assumed disjoint.
    """
    return -1 if inversions(a, b) & 1 else 1


def _is_zero(c) -> bool:
    if isinstance(c, np.ndarray):
        return not c.any()
    return c == 0


def _is_close_to_zero(c, atol: float) -> bool:
    if isinstance(c, np.ndarray):
        return bool(np.all(np.abs(c) <= atol))
    if isinstance(c, (float, complex)):
        return abs(c) <= atol
    return c == 0


@dataclass(frozen=True)
class MultiIndex:
    """A subset of ``{0, ..., n-1}`` stored as a bitmask."""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_GENERATORS:
            raise DimensionError(f"generator count {self.n} outside [0, {MAX_GENERATORS}]")
        if self.bits < 0 or self.bits >> self.n:
            raise DomainError(f"index set {self.bits:#b} not contained in range({self.n})")

    @classmethod
    def from_indices(cls, indices: Iterable[int], n: int) -> "MultiIndex":
        bits = 0
        for i in indices:
            if not 0 <= i < n:
                raise DomainError(f"generator index {i} outside range({n})")
            bits |= 1 << i
        return cls(bits, n)

    @classmethod
    def full(cls, n: int) -> "MultiIndex":
        return cls((1 << n) - 1, n)

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.bits >> i & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __len__(self) -> int:
        return _popcount(self.bits)

    @property
    def parity(self) -> int:
        return len(self) & 1

    def complement(self) -> "MultiIndex":
        return MultiIndex(((1 << self.n) - 1) & ~self.bits, self.n)

    def issubset(self, other: "MultiIndex") -> bool:
        return self.bits & other.bits == self.bits


def _mask(S, n: int) -> int:
    if S is None:
        return (1 << n) - 1
    if isinstance(S, MultiIndex):
        if S.n != n:
            raise DimensionError(f"index set over {S.n} generators used in Lambda_{n}")
        return S.bits
    if isinstance(S, int):
        if S < 0 or S >> n:
            raise DomainError(f"mask {S:#b} not contained in range({n})")
        return S
    return MultiIndex.from_indices(S, n).bits


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1
    MIXED = 2


class Grassmann:
    """Element of the Grassmann algebra on ``n`` anticommuting generators.

    Instances are treated as immutable values.  Zero coefficients are never
    stored, so the zero element has an empty term map.
    """

    __slots__ = ("n", "_terms")
    __array_ufunc__ = None  # keep numpy from broadcasting over us

    def __init__(self, n: int, terms: Mapping[int, object] | None = None):
        if not 0 <= n <= MAX_GENERATORS:
            raise DimensionError(f"generator count {n} outside [0, {MAX_GENERATORS}]")
        self.n = n
        clean = {}
        if terms:
            limit = 1 << n
            for bits, c in terms.items():
                if isinstance(bits, MultiIndex):
                    bits = bits.bits
                if not 0 <= bits < limit:
                    raise DomainError(f"monomial {bits:#b} not in Lambda_{n}")
                if not _is_zero(c):
                    clean[bits] = c
        self._terms = clean

    # construction ----------------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "Grassmann":
        return cls(n)

    @classmethod
    def scalar(cls, n: int, c) -> "Grassmann":
        return cls(n, {0: c})

    @classmethod
    def generator(cls, n: int, i: int) -> "Grassmann":
        if not 0 <= i < n:
            raise DomainError(f"generator index {i} outside range({n})")
        return cls(n, {1 << i: 1})

    @classmethod
    def monomial(cls, n: int, indices, coeff=1) -> "Grassmann":
        """``coeff * eta_{i1} ... eta_{ik}`` for indices in the given order."""
        if isinstance(indices, (MultiIndex, int)):
            return cls(n, {_mask(indices, n): coeff})
        out = cls.scalar(n, coeff)
        for i in indices:
            out = out * cls.generator(n, i)
        return out

    @classmethod
    def generators(cls, n: int) -> tuple["Grassmann", ...]:
        return tuple(cls.generator(n, i) for i in range(n))

    # inspection ------------------------------------------------------------

    @property
    def terms(self) -> dict[int, object]:
        return dict(self._terms)

    def monomials(self) -> Iterator[tuple[MultiIndex, object]]:
        for bits in sorted(self._terms):
            yield MultiIndex(bits, self.n), self._terms[bits]

    def coefficient(self, index) -> object:
        return self._terms.get(_mask(index, self.n), 0)

    @property
    def constant(self):
        return self._terms.get(0, 0)

    def top(self):
        """Coefficient of ``eta_0 eta_1 ... eta_{n-1}``."""
        return self._terms.get((1 << self.n) - 1, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def parity(self) -> Parity:
        """Parity of the element; the zero element counts as even."""
        parities = {_popcount(b) & 1 for b in self._terms}
        if len(parities) > 1:
            return Parity.MIXED
        return Parity.ODD if parities == {1} else Parity.EVEN

    def is_even(self) -> bool:
        return all(not _popcount(b) & 1 for b in self._terms)

    def is_odd(self) -> bool:
        return all(_popcount(b) & 1 for b in self._terms)

    def part(self, parity: int) -> "Grassmann":
        return Grassmann(self.n, {b: c for b, c in self._terms.items() if _popcount(b) & 1 == parity})

    def homogeneous_parts(self) -> tuple["Grassmann", "Grassmann"]:
        return self.part(0), self.part(1)

    def degree_part(self, k: int) -> "Grassmann":
        return Grassmann(self.n, {b: c for b, c in self._terms.items() if _popcount(b) == k})

    # arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> "Grassmann":
        if isinstance(other, Grassmann):
            if other.n != self.n:
                raise DimensionError(f"cannot combine Lambda_{self.n} with Lambda_{other.n}")
            return other
        return Grassmann.scalar(self.n, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for b, c in other._terms.items():
            terms[b] = terms[b] + c if b in terms else c
        return Grassmann(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return Grassmann(self.n, {b: -c for b, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Grassmann):
            return Grassmann(self.n, {b: c * other for b, c in self._terms.items()})
        return multiply(self, other)

    def __rmul__(self, other):
        # only reached for non-Grassmann left operands
        return Grassmann(self.n, {b: other * c for b, c in self._terms.items()})

    def __truediv__(self, other):
        if isinstance(other, Grassmann):
            raise TypeError("division by Grassmann elements is not supported")
        return Grassmann(self.n, {b: c / other for b, c in self._terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Grassmann.scalar(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def map_coefficients(self, f) -> "Grassmann":
        return Grassmann(self.n, {b: f(c) for b, c in self._terms.items()})

    # comparison ------------------------------------------------------------

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except DimensionError:
            return False
        if self._terms.keys() != other._terms.keys():
            return False
        for b, c in self._terms.items():
            d = other._terms[b]
            if isinstance(c, np.ndarray) or isinstance(d, np.ndarray):
                if not np.array_equal(c, d):
                    return False
            elif c != d:
                return False
        return True

    __hash__ = None

    def isclose(self, other, atol: float = DEFAULT_ATOL) -> bool:
        other = self._coerce(other)
        diff = self - other
        return all(_is_close_to_zero(c, atol) for c in diff._terms.values())

    # relabelling -----------------------------------------------------------

    def embed(self, n: int, offset: int = 0) -> "Grassmann":
        """Image under ``eta_i -> eta_{i + offset}`` in ``Lambda_n``."""
        if offset < 0 or self.n + offset > n:
            raise DimensionError(f"Lambda_{self.n} shifted by {offset} does not fit in Lambda_{n}")
        return Grassmann(n, {b << offset: c for b, c in self._terms.items()})

    def restrict(self, n: int) -> "Grassmann":
        """View the element in ``Lambda_n`` for ``n`` below the current count.

        Every monomial must already avoid the discarded generators.
        """
        mask = (1 << n) - 1
        if any(b & ~mask for b in self._terms):
            raise DomainError(f"element involves generators beyond the first {n}")
        return Grassmann(n, self._terms)

    def __repr__(self):
        if not self._terms:
            return f"Grassmann({self.n}, 0)"
        parts = []
        for bits in sorted(self._terms, key=lambda b: (_popcount(b), b)):
            c = self._terms[bits]
            name = "".join(f"e{i}" for i in range(self.n) if bits >> i & 1)
            parts.append(f"{c!r}*{name}" if name else repr(c))
        return f"Grassmann({self.n}, {' + '.join(parts)})"


class Layout:
    """Named consecutive blocks of generators inside one Grassmann algebra.

    ``Layout(form=4, eta=4)`` gives a 8-generator algebra whose first four
    generators play the role of coordinate one-forms and whose last four are
    the fermionic integration variables.  Mixing several kinds of odd
    quantity in a single algebra makes the graded tensor-product sign rule
    automatic.
    """

    def __init__(self, **blocks: int):
        self.blocks = dict(blocks)
        self._offsets = {}
        n = 0
        for name, size in self.blocks.items():
            if size < 0:
                raise DimensionError(f"block {name!r} has negative size")
            self._offsets[name] = n
            n += size
        if n > MAX_GENERATORS:
            raise DimensionError(f"layout needs {n} generators, cap is {MAX_GENERATORS}")
        self.n = n

    def offset(self, name: str) -> int:
        return self._offsets[name]

    def gen(self, name: str, i: int) -> Grassmann:
        if not 0 <= i < self.blocks[name]:
            raise DomainError(f"index {i} outside block {name!r} of size {self.blocks[name]}")
        return Grassmann.generator(self.n, self._offsets[name] + i)

    def mask(self, name: str) -> int:
        return ((1 << self.blocks[name]) - 1) << self._offsets[name]

    def index(self, name: str) -> MultiIndex:
        return MultiIndex(self.mask(name), self.n)


# operations -----------------------------------------------------------------


def multiply(a: Grassmann, b: Grassmann) -> Grassmann:
    if a.n != b.n:
        raise DimensionError(f"cannot multiply Lambda_{a.n} by Lambda_{b.n}")
    out: dict[int, object] = {}
    for ba, ca in a._terms.items():
        for bb, cb in b._terms.items():
            if ba & bb:
                continue
            key = ba | bb
            c = ca * cb
            if inversions(ba, bb) & 1:
                c = -c
            out[key] = out[key] + c if key in out else c
    return Grassmann(a.n, out)


def add(a: Grassmann, b: Grassmann) -> Grassmann:
    if a.n != b.n:
        raise DimensionError(f"cannot add Lambda_{a.n} to Lambda_{b.n}")
    return a + b


def scale(c, a: Grassmann) -> Grassmann:
    return c * a


def super_bracket(a: Grassmann, b: Grassmann) -> Grassmann:
    """Graded commutator ``ab - (-1)^(deg a deg b) ba``, extended linearly."""
    if a.n != b.n:
        raise DimensionError(f"cannot bracket Lambda_{a.n} with Lambda_{b.n}")
    out = Grassmann.zero(a.n)
    for p, ap in enumerate(a.homogeneous_parts()):
        for q, bq in enumerate(b.homogeneous_parts()):
            if ap.is_zero() or bq.is_zero():
                continue
            ba = bq * ap
            out = out + (ap * bq) - (-ba if p * q else ba)
    return out


def exp_even(a: Grassmann) -> Grassmann:
    """Exponential of an even element with vanishing constant term.

    Even monomials commute with each other and square to zero, so
    ``exp(sum_m c_m m) = prod_m (1 + c_m m)``.  This is the same finite sum
    as the truncated power series but needs no factorials.
    """
    if not a.is_even():
        raise ParityError(f"exp_even needs an even element, got parity {a.parity().name}")
    if 0 in a._terms:
        raise DomainError("exp_even needs a vanishing constant term; split off the scalar part")
    acc: dict[int, object] = {0: 1}
    for m, cm in a._terms.items():
        step = dict(acc)
        for t, ct in acc.items():
            if t & m:
                continue
            key = t | m
            c = ct * cm
            if inversions(t, m) & 1:
                c = -c
            step[key] = step[key] + c if key in step else c
        acc = step
    return Grassmann(a.n, acc)


def berezin(a: Grassmann, S=None):
    """Berezin integral of ``a`` over the generators in ``S``.

    Each monomial containing ``S`` is written as ``sign * eta^(J - S) eta^S``
    and replaced by ``sign * eta^(J - S)``; the remaining monomials are
    killed.  With ``S=None`` the integral runs over all generators and the
    top coefficient is returned as a plain scalar.
    """
    if S is None:
        return a.top()
    s = _mask(S, a.n)
    out: dict[int, object] = {}
    for bits, c in a._terms.items():
        if bits & s != s:
            continue
        rest = bits & ~s
        if inversions(rest, s) & 1:
            c = -c
        out[rest] = out[rest] + c if rest in out else c
    return Grassmann(a.n, out)


def kill_generators(a: Grassmann, killed) -> Grassmann:
    """Algebra homomorphism sending the generators in ``killed`` to zero."""
    k = _mask(killed, a.n)
    return Grassmann(a.n, {b: c for b, c in a._terms.items() if not b & k})


def epsilon_sign(I, n: int) -> int:
    """The sign with ``eta^I eta^I' = epsilon * eta_0 ... eta_{n-1}``."""
    bits = _mask(I, n)
    return reorder_sign(bits, ((1 << n) - 1) & ~bits)
