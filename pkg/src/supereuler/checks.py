"""Randomised identity suites behind ``supereuler check``.

Each suite draws its instances from its own generator seeded from the run
seed, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .pfaffian import (
    OddVector,
    SkewMatrix,
    berezin_gaussian_source,
    berezin_gaussian_source_direct,
    gaussian_expand,
    pfaffian_berezin,
    pfaffian_expansion,
    quadratic_form,
)
from .superalg import Grassmann, Layout, MultiIndex, epsilon_sign, exp_even, super_bracket

PF_DET_RTOL = 1e-10
PF_CONGRUENCE_RTOL = 1e-9
PF_METHODS_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    dims: list
    instances: int = 0
    max_deviation: float = 0.0
    failures: int = 0
    failing_instance: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, deviation: float, ok: bool, instance=None):
        self.instances += 1
        self.max_deviation = max(self.max_deviation, float(deviation))
        if not ok:
            self.failures += 1
            if self.failing_instance is None and instance is not None:
                self.failing_instance = instance()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dims": list(self.dims),
            "instances": self.instances,
            "max_deviation": self.max_deviation,
            "failures": self.failures,
            "passed": self.passed,
            "failing_instance": self.failing_instance,
        }


# random instances --------------------------------------------------------------


def random_rational(rng: random.Random, span: int = 5) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def random_rational_skew(rng: random.Random, n: int) -> SkewMatrix:
    return SkewMatrix.from_upper(n, {(i, j): random_rational(rng) for i in range(n) for j in range(i + 1, n)})


def random_float_skew(rng: np.random.Generator, n: int) -> SkewMatrix:
    a = rng.uniform(-1, 1, (n, n))
    return SkewMatrix((a - a.T).tolist())


def random_symbolic_source(rng: random.Random, n: int) -> OddVector:
    """``J_i = xi_i + (sparse rational combination of the other xi)``."""
    layout = Layout(xi=n)
    comps = []
    for i in range(n):
        x = layout.gen("xi", i)
        for k in range(n):
            if k != i and rng.random() < 0.3:
                x = x + random_rational(rng, 3) * layout.gen("xi", k)
        comps.append(x)
    return OddVector(comps)


def random_homogeneous(rng: random.Random, n: int, parity: int, max_terms: int = 6) -> Grassmann:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        degrees = [k for k in range(parity, n + 1, 2)]
        if not degrees:
            break
        idx = rng.sample(range(n), rng.choice(degrees))
        terms[MultiIndex.from_indices(idx, n).bits] = rng.randint(-9, 9)
    return Grassmann(n, terms)


def skew_to_json(omega: SkewMatrix) -> dict:
    return {"n": omega.n, "entries": [[str(x) for x in row] for row in omega.entries]}


def grassmann_to_json(x: Grassmann) -> dict:
    return {"n": x.n, "terms": {str(b): str(c) for b, c in sorted(x.terms.items())}}


def _exact_deviation(x: Grassmann, y: Grassmann) -> float:
    diff = x - y
    return float(max((abs(c) for c in diff.terms.values()), default=0))


# suites ----------------------------------------------------------------------------


def suite_gaussian_expansion(rng: random.Random, dims, instances: int) -> SuiteResult:
    """Coefficients of exp(1/2 eta^t omega eta) are the principal Pfaffian minors."""
    res = SuiteResult("gaussian_expansion", list(dims))
    for n in dims:
        for _ in range(instances):
            omega = random_rational_skew(rng, n)
            layout = Layout(coeff=0, eta=n)
            g = exp_even(quadratic_form(omega, layout))
            expected = gaussian_expand(omega)
            dev = 0.0
            ok = set(g.terms) <= {I.bits for I in expected}
            for I, pf in expected.items():
                d = abs(g.coefficient(I.bits) - pf)
                dev = max(dev, float(d))
                ok = ok and d == 0
            res.record(dev, ok, lambda: {"omega": skew_to_json(omega)})
    return res


def suite_gaussian_source(rng: random.Random, dims, instances: int) -> SuiteResult:
    """Closed-form sourced Gaussian integral against direct Berezin integration."""
    res = SuiteResult("gaussian_source", list(dims))
    for n in dims:
        for _ in range(instances):
            omega = random_rational_skew(rng, n)
            J = random_symbolic_source(rng, n)
            lhs = berezin_gaussian_source_direct(omega, J)
            rhs = berezin_gaussian_source(omega, J)
            dev = _exact_deviation(lhs, rhs)
            res.record(dev, lhs == rhs, lambda: {
                "omega": skew_to_json(omega), "J": [grassmann_to_json(c) for c in J.components]})
    return res


def suite_pfaffian_det(rng: np.random.Generator, dims, instances: int) -> SuiteResult:
    res = SuiteResult("pfaffian_det", list(dims))
    for k in range(instances):
        n = dims[k % len(dims)]
        omega = random_float_skew(rng, n)
        pf = pfaffian_berezin(omega)
        det = float(np.linalg.det(omega.to_array()))
        dev = abs(pf * pf - det) / abs(det)
        res.record(dev, dev <= PF_DET_RTOL, lambda: {"omega": skew_to_json(omega)})
    return res


def suite_pfaffian_congruence(rng: np.random.Generator, dims, instances: int) -> SuiteResult:
    """Pf(B omega B^t) = det(B) Pf(omega)."""
    res = SuiteResult("pfaffian_congruence", list(dims))
    for k in range(instances):
        n = dims[k % len(dims)]
        omega = random_float_skew(rng, n)
        B = rng.uniform(-1, 1, (n, n))
        W = B @ omega.to_array() @ B.T
        lhs = pfaffian_berezin(SkewMatrix(((W - W.T) / 2).tolist()))
        rhs = float(np.linalg.det(B)) * pfaffian_berezin(omega)
        dev = abs(lhs - rhs) / abs(rhs)
        res.record(dev, dev <= PF_CONGRUENCE_RTOL, lambda: {"omega": skew_to_json(omega), "B": B.tolist()})
    return res


def suite_pfaffian_methods(rng: np.random.Generator, dims, instances: int) -> SuiteResult:
    """Berezin Pfaffian against first-row expansion."""
    res = SuiteResult("pfaffian_methods", list(dims))
    for k in range(instances):
        n = dims[k % len(dims)]
        omega = random_float_skew(rng, n)
        a, b = pfaffian_berezin(omega), pfaffian_expansion(omega)
        dev = abs(a - b) / max(1.0, abs(b))
        res.record(dev, math.isclose(a, b, rel_tol=PF_METHODS_TOL, abs_tol=PF_METHODS_TOL),
                   lambda: {"omega": skew_to_json(omega)})
    return res


def suite_sign_bookkeeping(rng: random.Random, bracket_dims, bracket_pairs: int, epsilon_max_n: int) -> SuiteResult:
    """Super-commutativity on random homogeneous pairs plus exhaustive epsilon signs."""
    res = SuiteResult("sign_bookkeeping", list(bracket_dims))
    for k in range(bracket_pairs):
        n = bracket_dims[k % len(bracket_dims)]
        a = random_homogeneous(rng, n, rng.randint(0, 1))
        b = random_homogeneous(rng, n, rng.randint(0, 1))
        br = super_bracket(a, b)
        dev = float(max((abs(c) for c in br.terms.values()), default=0))
        res.record(dev, br.is_zero(), lambda: {"a": grassmann_to_json(a), "b": grassmann_to_json(b)})
    for n in range(epsilon_max_n + 1):
        top = Grassmann(n, {(1 << n) - 1: 1})
        for k in range(n + 1):
            for idx in combinations(range(n), k):
                I = MultiIndex.from_indices(idx, n)
                lhs = Grassmann(n, {I.bits: 1}) * Grassmann(n, {I.complement().bits: 1})
                ok = lhs == epsilon_sign(I, n) * top
                res.record(0.0 if ok else 2.0, ok, lambda: {"n": n, "I": list(idx)})
    return res


def run_checks(seed: int, max_n: int) -> dict:
    """Run the six suites; dimensions are the even values up to ``max_n`` with per-suite caps."""
    dims = [n for n in range(2, max_n + 1, 2)] or [2]
    def capped(cap):
        return [n for n in dims if n <= cap] or [2]
    suites = [
        suite_gaussian_expansion(random.Random(seed * 7 + 1), capped(8), 10),
        suite_gaussian_source(random.Random(seed * 7 + 2), capped(6), 5),
        suite_pfaffian_det(np.random.default_rng(seed * 7 + 3), capped(8), 40),
        suite_pfaffian_congruence(np.random.default_rng(seed * 7 + 4), capped(8), 40),
        suite_pfaffian_methods(np.random.default_rng(seed * 7 + 5), dims, 20),
        suite_sign_bookkeeping(random.Random(seed * 7 + 6), capped(8), 200, max_n),
    ]
    results = [s.to_dict() for s in suites]
    return {"seed": seed, "max_n": max_n, "suites": results, "passed": all(s["passed"] for s in results)}
