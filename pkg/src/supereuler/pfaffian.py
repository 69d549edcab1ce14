"""Pfaffians of skew matrices with even entries, and fermionic Gaussians.

Entries of a :class:`SkewMatrix` are either plain scalars or even elements of
a common "coefficient" Grassmann algebra.  All Berezin computations take
place in one enlarged algebra laid out as ``[coefficient generators | eta]``,
so that coefficients always stand to the left of the integration variables.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, LoadError, ParityError
from .superalg import (
    DEFAULT_ATOL,
    Grassmann,
    Layout,
    MultiIndex,
    _is_close_to_zero,
    berezin,
    epsilon_sign,
    exp_even,
    kill_generators,
)

EXPANSION_MAX_N = 12


class SkewMatrix:
    """Skew-symmetric ``n x n`` matrix (``n`` even) with even entries.

    ``coeff_n`` is ``None`` for scalar matrices, otherwise the generator
    count of the Grassmann algebra the entries live in.
    """

    def __init__(self, entries, atol: float = DEFAULT_ATOL):
        rows = [list(r) for r in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DomainError("skew matrix must be square")
        if n % 2:
            raise DomainError(f"skew matrix dimension must be even, got {n}")
        algebra_sizes = {x.n for r in rows for x in r if isinstance(x, Grassmann)}
        if len(algebra_sizes) > 1:
            raise DomainError(f"entries mix Grassmann algebras of sizes {sorted(algebra_sizes)}")
        self.coeff_n = algebra_sizes.pop() if algebra_sizes else None
        if self.coeff_n is not None:
            rows = [[x if isinstance(x, Grassmann) else Grassmann.scalar(self.coeff_n, x) for x in r] for r in rows]
            for i, r in enumerate(rows):
                for j, x in enumerate(r):
                    if not x.is_even():
                        raise ParityError(f"entry ({i}, {j}) is not even")
        for i in range(n):
            if not _entry_close_to_zero(rows[i][i], atol):
                raise DomainError(f"diagonal entry ({i}, {i}) is nonzero", (i, i))
            for j in range(i + 1, n):
                if not _entry_close_to_zero(rows[i][j] + rows[j][i], atol):
                    raise DomainError(f"entries ({i}, {j}) and ({j}, {i}) are not skew", (i, j))
        self.n = n
        self.entries = tuple(tuple(r) for r in rows)

    @classmethod
    def from_upper(cls, n: int, upper) -> "SkewMatrix":
        """Build from a mapping ``(i, j) -> value`` for ``i < j``; missing pairs are zero."""
        sample = next((v for v in upper.values() if isinstance(v, Grassmann)), None)
        zero = Grassmann.zero(sample.n) if sample is not None else 0
        rows = [[zero] * n for _ in range(n)]
        for (i, j), v in upper.items():
            if not i < j:
                raise DomainError(f"upper-triangle key ({i}, {j}) needs i < j")
            rows[i][j] = v
            rows[j][i] = -v
        return cls(rows)

    @property
    def is_scalar(self) -> bool:
        return self.coeff_n is None

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def submatrix(self, indices: Sequence[int]) -> "SkewMatrix":
        idx = list(indices)
        return SkewMatrix([[self.entries[i][j] for j in idx] for i in idx])

    def scaled(self, c) -> "SkewMatrix":
        return SkewMatrix([[c * x for x in r] for r in self.entries])

    def lifted(self, coeff_n: int) -> "SkewMatrix":
        """The same matrix with entries viewed in ``Lambda_coeff_n``."""
        if self.coeff_n == coeff_n:
            return self
        if self.coeff_n is not None:
            raise DomainError(f"entries already live in Lambda_{self.coeff_n}")
        return SkewMatrix([[Grassmann.scalar(coeff_n, x) for x in r] for r in self.entries])

    def to_array(self) -> np.ndarray:
        if not self.is_scalar:
            raise DomainError("only scalar skew matrices convert to arrays")
        return np.array(self.entries, dtype=float)

    def __repr__(self):
        return f"SkewMatrix(n={self.n}, coeff_n={self.coeff_n})"


def _entry_close_to_zero(x, atol) -> bool:
    if isinstance(x, Grassmann):
        return x.isclose(0, atol)
    return _is_close_to_zero(x, atol)


class OddVector:
    """Vector of odd elements of a common coefficient algebra."""

    def __init__(self, components: Sequence[Grassmann]):
        comps = tuple(components)
        sizes = {c.n for c in comps}
        if len(sizes) != 1:
            raise DomainError("odd vector components must share one Grassmann algebra")
        for i, c in enumerate(comps):
            if not c.is_odd():
                raise ParityError(f"component {i} is not odd")
        self.coeff_n = sizes.pop()
        self.components = comps

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def scaled(self, c) -> "OddVector":
        return OddVector([c * x for x in self.components])


# Pfaffians ------------------------------------------------------------------


def _layout(omega: SkewMatrix, coeff_n: int | None = None) -> Layout:
    return Layout(coeff=coeff_n if coeff_n is not None else (omega.coeff_n or 0), eta=omega.n)


def quadratic_form(omega: SkewMatrix, layout: Layout) -> Grassmann:
    """``1/2 eta^t omega eta`` written as ``sum_{i<j} omega_ij eta_i eta_j``."""
    n_all = layout.n
    off = layout.offset("coeff")
    q = Grassmann.zero(n_all)
    for i in range(omega.n):
        for j in range(i + 1, omega.n):
            w = omega.entries[i][j]
            w = w.embed(n_all, off) if isinstance(w, Grassmann) else Grassmann.scalar(n_all, w)
            if w.is_zero():
                continue
            q = q + w * (layout.gen("eta", i) * layout.gen("eta", j))
    return q


def _unwrap(x: Grassmann, omega: SkewMatrix):
    return x.constant if omega.is_scalar else x


def pfaffian_berezin(omega: SkewMatrix):
    """Pfaffian as the Berezin integral of ``exp(1/2 eta^t omega eta)``."""
    layout = _layout(omega)
    g = exp_even(quadratic_form(omega, layout))
    pf = berezin(g, layout.index("eta")).restrict(layout.blocks["coeff"])
    return _unwrap(pf, omega)


def pfaffian_expansion(omega: SkewMatrix):
    """Pfaffian by recursive expansion along the first row.

    Exponential in ``n``; meant as an independent check, limited to
    ``n <= 12``.
    """
    if omega.n % 2:
        raise DomainError(f"Pfaffian needs even dimension, got {omega.n}")
    if omega.n > EXPANSION_MAX_N:
        raise DomainError(f"expansion limited to n <= {EXPANSION_MAX_N}, got {omega.n}")
    a = omega.entries

    def pf(idx: tuple[int, ...]):
        if not idx:
            return 1
        first, rest = idx[0], idx[1:]
        total = 0
        for k, j in enumerate(rest):
            w = a[first][j]
            if _entry_close_to_zero(w, 0):
                continue
            term = w * pf(rest[:k] + rest[k + 1:])
            total = total - term if k % 2 else total + term
        return total

    out = pf(tuple(range(omega.n)))
    if not omega.is_scalar and not isinstance(out, Grassmann):
        out = Grassmann.scalar(omega.coeff_n, out)
    return out


def gaussian_coefficient(omega: SkewMatrix, I) -> object:
    """Coefficient of ``eta^I`` in ``exp(1/2 eta^t omega eta)``.

    Computed the way the Gaussian expansion is proved: kill every ``eta_k``
    with ``k`` outside ``I`` and integrate over the surviving ones.
    """
    layout = _layout(omega)
    off = layout.offset("eta")
    sub = MultiIndex.from_indices(I, omega.n)
    inside = sub.bits << off
    outside = layout.mask("eta") & ~inside
    g = kill_generators(exp_even(quadratic_form(omega, layout)), outside)
    coeff = berezin(g, inside).restrict(layout.blocks["coeff"])
    return _unwrap(coeff, omega)


def gaussian_expand(omega: SkewMatrix, method: str = "auto") -> dict[MultiIndex, object]:
    """Map every even subset ``I`` to ``Pf(omega_I)``; ``Pf`` of the empty minor is 1.

    ``method`` picks how each minor is evaluated: ``"expansion"``,
    ``"berezin"`` or ``"homomorphism"``.  ``"auto"`` uses the row expansion
    for scalar matrices and the Berezin integral otherwise.
    """
    if method == "auto":
        method = "expansion" if omega.is_scalar and omega.n <= EXPANSION_MAX_N else "berezin"
    if method not in ("expansion", "berezin", "homomorphism"):
        raise DomainError(f"unknown Pfaffian method {method!r}")
    one = 1 if omega.is_scalar else Grassmann.scalar(omega.coeff_n, 1)
    out: dict[MultiIndex, object] = {}
    for k in range(0, omega.n + 1, 2):
        for idx in combinations(range(omega.n), k):
            key = MultiIndex.from_indices(idx, omega.n)
            if not idx:
                out[key] = one
            elif method == "homomorphism":
                out[key] = gaussian_coefficient(omega, idx)
            else:
                sub = omega.submatrix(idx)
                out[key] = pfaffian_expansion(sub) if method == "expansion" else pfaffian_berezin(sub)
    return out


# sourced Gaussians ------------------------------------------------------------


def _check_source(omega: SkewMatrix, J: OddVector) -> SkewMatrix:
    if len(J) != omega.n:
        raise DomainError(f"source has {len(J)} components, matrix is {omega.n} x {omega.n}")
    return omega.lifted(J.coeff_n)


def berezin_gaussian_source(omega: SkewMatrix, J: OddVector) -> Grassmann:
    """Closed form of ``int D eta exp(1/2 eta^t omega eta + J^t eta)``.

    Sum over even ``I`` of ``eps(I, I') (-1)^(|I'|/2) Pf(omega_I) J^I'``.
    """
    omega = _check_source(omega, J)
    n = omega.n
    total = Grassmann.zero(J.coeff_n)
    for I, pf in gaussian_expand(omega).items():
        comp = I.complement()
        Jc = Grassmann.scalar(J.coeff_n, 1)
        for i in comp:
            Jc = Jc * J[i]
        sign = epsilon_sign(I, n) * (-1 if len(comp) // 2 % 2 else 1)
        total = total + sign * (pf * Jc)
    return total


def berezin_gaussian_source_direct(omega: SkewMatrix, J: OddVector) -> Grassmann:
    """Same integral evaluated literally: exponentiate and integrate out eta."""
    omega = _check_source(omega, J)
    layout = _layout(omega, J.coeff_n)
    off = layout.offset("coeff")
    x = quadratic_form(omega, layout)
    for i, ji in enumerate(J.components):
        if not ji.is_zero():
            x = x + ji.embed(layout.n, off) * layout.gen("eta", i)
    g = exp_even(x)
    return berezin(g, layout.index("eta")).restrict(J.coeff_n)


# file input -------------------------------------------------------------------


def _parse_entry(v, i, j):
    if isinstance(v, bool):
        raise LoadError(f"entry ({i}, {j}) is not a number")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError as exc:
            raise LoadError(f"entry ({i}, {j}) = {v!r} is not a number") from exc
    raise LoadError(f"entry ({i}, {j}) is not a number")


def skew_matrix_from_json(obj) -> SkewMatrix:
    """Validate ``{"n": int, "entries": [[...], ...]}`` and build the matrix.

    Integers and rational strings such as ``"1/3"`` load as exact fractions,
    floats stay floats.
    """
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise LoadError('expected an object with keys "n" and "entries"')
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 0 or n % 2:
        raise LoadError(f'"n" must be a non-negative even integer, got {n!r}')
    rows = obj["entries"]
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise LoadError(f'"entries" must be a {n} x {n} array')
    parsed = [[_parse_entry(v, i, j) for j, v in enumerate(r)] for i, r in enumerate(rows)]
    try:
        return SkewMatrix(parsed)
    except DomainError as exc:
        raise LoadError(f"matrix is not skew-symmetric: {exc.args[0]}", *exc.args[1:]) from exc


def load_skew_matrix(path) -> SkewMatrix:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    return skew_matrix_from_json(obj)
