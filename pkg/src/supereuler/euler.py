"""Euler characteristics from the Mathai-Quillen Gaussian form.

At each point the integrand is the top-degree part of

    pi^{-m} exp(-|s|^2) int D eta exp(1/2 eta^t Omega eta + J^t eta),

where ``Omega`` is the curvature two-form in an orthonormal frame and
``J_a = (nabla s)^a_b e^b``.  Both are built as elements of a Grassmann
algebra whose generators are the coframe one-forms ``e^1 .. e^n``, with
coefficients stored as numpy arrays over a chunk of quadrature nodes, so one
symbolic Berezin computation serves every node of the chunk.

Normalisation modes
-------------------
``eqU1``
    The Gaussian above taken literally.
``eqU``
    The closed-form sum ``sum_I eps(I, I') Pf(Omega_I / 2) J^I'``.
``calibrated``
    ``int D eta exp(1/2 eta^t (lam Omega) eta + i J^t eta)``.  The phase on
    the source cancels the ``(-1)^{|I'|/2}`` produced by integrating out
    ``eta``; ``lam`` is fixed once so that the round unit sphere has
    ``chi = 2`` and is then reused for every manifold and section.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry as geo
from .errors import ConfigError, DegenerateZeroError, DomainError, NumericError
from .pfaffian import OddVector, SkewMatrix, berezin_gaussian_source_direct, gaussian_expand
from .superalg import Grassmann, epsilon_sign

MODES = ("eqU", "eqU1", "calibrated")
MIN_NODES = 8
DEFAULT_CHUNK = 8192
CALIBRATION_NODES = (64, 64)


class ResolutionWarning(UserWarning):
    """Numerical resolution is marginal for the requested computation."""


@dataclass(frozen=True)
class MQContext:
    manifold: geo.ChartManifold
    section: geo.SectionField
    mode: str = "calibrated"
    nodes: tuple = (64, 64)
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        nodes = self.nodes
        if isinstance(nodes, int):
            nodes = (nodes,) * self.manifold.dim
        nodes = tuple(int(k) for k in nodes)
        if len(nodes) != self.manifold.dim:
            raise ConfigError(f"need {self.manifold.dim} node counts, got {len(nodes)}")
        if min(nodes) < MIN_NODES:
            raise ConfigError(f"at least {MIN_NODES} quadrature nodes per axis are required")
        if self.mode not in MODES:
            raise ConfigError(f"unknown normalization mode {self.mode!r}; choose from {MODES}")
        object.__setattr__(self, "nodes", nodes)


# quadrature -----------------------------------------------------------------


def axis_rule(lo: float, hi: float, k: int, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid rule on periodic axes, Gauss-Legendre otherwise."""
    if periodic:
        x = lo + (hi - lo) * np.arange(k) / k
        return x, np.full(k, (hi - lo) / k)
    t, w = np.polynomial.legendre.leggauss(k)
    return 0.5 * (hi - lo) * t + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def quadrature_grid(M: geo.ChartManifold, nodes: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = M.domain_lower, M.domain_upper
    rules = [axis_rule(lo[k], hi[k], nodes[k], M.periodic[k]) for k in range(M.dim)]
    mesh = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wmesh = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = functools.reduce(np.multiply, [w.ravel() for w in wmesh])
    return points, weights


# integrand -------------------------------------------------------------------


def _form_elements(Fc: np.ndarray, nabla: np.ndarray, n: int):
    """Curvature two-forms ``Omega_ab`` and source one-forms ``J_a`` over the coframe algebra."""
    upper = {}
    for a in range(n):
        for b in range(a + 1, n):
            terms = {}
            for c in range(n):
                for d in range(c + 1, n):
                    terms[(1 << c) | (1 << d)] = np.ascontiguousarray(Fc[:, a, b, c, d])
            upper[(a, b)] = Grassmann(n, terms)
    J = [Grassmann(n, {1 << b: np.ascontiguousarray(nabla[:, a, b]) for b in range(n)}) for a in range(n)]
    return upper, J


def _berezin_density(upper, J, n: int, mode: str, coupling: float) -> np.ndarray | float:
    if mode == "eqU":
        omega = SkewMatrix.from_upper(n, {k: 0.5 * v for k, v in upper.items()})
        total = Grassmann.zero(n)
        for I, pf in gaussian_expand(omega, method="berezin").items():
            Jc = Grassmann.scalar(n, 1)
            for i in I.complement():
                Jc = Jc * J[i]
            total = total + epsilon_sign(I, n) * (pf * Jc)
        return total.top()
    if mode == "eqU1":
        omega, source = SkewMatrix.from_upper(n, upper), OddVector(J)
    else:
        omega = SkewMatrix.from_upper(n, {k: coupling * v for k, v in upper.items()})
        source = OddVector([1j * x for x in J])
    return berezin_gaussian_source_direct(omega, source).top()


def _density_chunk(M: geo.ChartManifold, s: geo.SectionField, u: np.ndarray, t: float, mode: str, coupling: float):
    n = M.dim
    frame = geo.orthonormal_frame(M, u)
    Fc = geo.frame_curvature(M, u)
    s_frame = t * geo.section_frame_components(M, s, u)
    nabla = t * geo.covariant_derivative_section(M, s, u)
    upper, J = _form_elements(Fc, nabla, n)
    top = _berezin_density(upper, J, n, mode, coupling)
    top = np.broadcast_to(np.asarray(top), u.shape[:1])
    if np.iscomplexobj(top):
        scale = np.maximum(1.0, np.abs(top))
        if np.any(np.abs(top.imag) > 1e-9 * scale):
            raise NumericError("imaginary part survived the Berezin integral")
        top = top.real
    weight = np.exp(-np.sum(s_frame * s_frame, axis=-1)) * math.pi ** (-M.m)
    return weight * top * frame.volume_factor


@functools.lru_cache(maxsize=None)
def calibration_constant() -> float:
    """Curvature coupling making ``chi(sphere2(1)) = 2``; computed once per process.

    With a vanishing section the two-dimensional integrand is linear in the
    coupling, so one evaluation at coupling 1 fixes it.
    """
    M = geo.builtin_manifold("sphere2", radius=1.0)
    s = geo.builtin_section("zero", M)
    raw = _integrate(M, s, CALIBRATION_NODES, 1.0, "calibrated", 1.0, DEFAULT_CHUNK)
    return 2.0 / raw


def normalization_constant(mode: str) -> float:
    if mode == "calibrated":
        return calibration_constant()
    return {"eqU": 0.5, "eqU1": 1.0}[mode]


def mq_integrand(ctx: MQContext, u, t: float = 1.0) -> np.ndarray | float:
    """Chart density of the pulled-back Gaussian form at ``u`` (shape ``(n,)`` or ``(N, n)``)."""
    u = np.asarray(u, float)
    single = u.ndim == 1
    pts = u.reshape(1, -1) if single else u
    out = _density_chunk(ctx.manifold, ctx.section, pts, t, ctx.mode, normalization_constant(ctx.mode))
    return float(out[0]) if single else out


def _integrate(M, s, nodes, t, mode, coupling, chunk) -> float:
    points, weights = quadrature_grid(M, nodes)
    partial = []
    for start in range(0, len(points), chunk):
        u = points[start:start + chunk]
        dens = _density_chunk(M, s, u, t, mode, coupling)
        bad = ~np.isfinite(dens)
        if bad.any():
            node = u[np.argmax(bad)]
            raise NumericError(f"non-finite integrand at node {node.tolist()}")
        partial.append(float(np.sum(dens * weights[start:start + chunk])))
    return math.fsum(partial)


@dataclass
class EulerResult:
    manifold: str
    params: dict
    section: str
    mode: str
    t: float
    chi: float
    convergence_estimate: float
    normalization_constant: float
    node_counts: list

    def to_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "params": dict(self.params),
            "section": self.section,
            "mode": self.mode,
            "t": self.t,
            "chi": self.chi,
            "convergence_estimate": self.convergence_estimate,
            "normalization_constant": self.normalization_constant,
            "node_counts": list(self.node_counts),
        }


def euler_integral(ctx: MQContext, t: float = 1.0) -> EulerResult:
    """Integrate the density; the convergence estimate compares against half resolution."""
    if t < 0:
        raise DomainError("section scale t must be non-negative")
    lam = normalization_constant(ctx.mode)
    M, s = ctx.manifold, ctx.section
    chi = _integrate(M, s, ctx.nodes, t, ctx.mode, lam, ctx.chunk_size)
    coarse_nodes = tuple(max(2, k // 2) for k in ctx.nodes)
    coarse = _integrate(M, s, coarse_nodes, t, ctx.mode, lam, ctx.chunk_size)
    return EulerResult(
        manifold=M.name,
        params=dict(M.params),
        section=s.name,
        mode=ctx.mode,
        t=float(t),
        chi=chi,
        convergence_estimate=abs(chi - coarse),
        normalization_constant=lam,
        node_counts=list(ctx.nodes),
    )


# Poincare-Hopf ----------------------------------------------------------------


@dataclass
class HopfZero:
    point: tuple
    index: int
    abs_det: float


@dataclass
class HopfReport:
    zeros: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(z.index for z in self.zeros)

    def to_dict(self) -> dict:
        return {
            "zeros": [{"point": list(z.point), "index": z.index, "abs_det": z.abs_det} for z in self.zeros],
            "total": self.total,
        }


def _seed_grid(M: geo.ChartManifold, per_axis: int) -> np.ndarray:
    axes = []
    for k in range(M.dim):
        lo, hi = M.domain_lower[k], M.domain_upper[k]
        if M.periodic[k]:
            axes.append(lo + (hi - lo) * np.arange(per_axis) / per_axis)
        else:
            axes.append(lo + (hi - lo) * (np.arange(per_axis) + 0.5) / per_axis)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _dedupe(M: geo.ChartManifold, points: np.ndarray, radius: float) -> list[int]:
    if M.embedding_fn is not None:
        coords = M.embedding_fn(points)
        dist = lambda i, j: float(np.linalg.norm(coords[i] - coords[j]))
    else:
        period = np.asarray(M.upper, float) - np.asarray(M.lower, float)
        per = np.asarray(M.periodic)

        def dist(i, j):
            d = np.abs(points[i] - points[j])
            d = np.where(per, np.minimum(d, period - d), d)
            return float(np.linalg.norm(d))

    kept: list[int] = []
    for i in range(len(points)):
        if all(dist(i, j) > radius for j in kept):
            kept.append(i)
    return kept


def hopf_indices(
    ctx: MQContext,
    seeds_per_axis: int | None = None,
    tol: float = 1e-10,
    max_steps: int = 50,
    dedupe_radius: float = 1e-6,
    det_tol: float = 1e-8,
    step_tol: float = 1e-10,
) -> HopfReport:
    """Locate the zeros of the section by Newton iteration and sum their indices.

    Newton runs on the frame components of the section over the closed
    chart box, so zeros sitting on an excised degeneracy (a sphere pole) are
    still found; their index is then read off at the nearest interior point.
    """
    M, s = ctx.manifold, ctx.section
    if seeds_per_axis is None:
        seeds_per_axis = 32 if M.dim <= 2 else 8
    F = lambda x: geo.section_frame_components(M, s, x, strict=False)
    u = _seed_grid(M, seeds_per_axis)
    seed_values = F(u)
    # a small residual alone is not enough: near a degenerate zero it is reached
    # far from the root, so the Newton step has to be small as well
    last_step = np.full(len(u), np.inf)
    for _ in range(max_steps):
        res = np.max(np.abs(F(u)), axis=-1)
        active = ~((res <= tol) & (last_step <= step_tol))
        if not active.any():
            break
        ua = u[active]
        Fa = F(ua)
        jac = np.swapaxes(geo.central_difference(F, ua, geo.FIRST_STEP), -1, -2)
        step = -np.einsum("...ij,...j->...i", np.linalg.pinv(jac), Fa)
        last_step[active] = np.max(np.abs(step), axis=-1)
        u[active] = M.wrap(ua + step)
    res = np.max(np.abs(F(u)), axis=-1)
    found = u[np.isfinite(res) & (res <= tol)]

    report = HopfReport()
    if len(found) == 0:
        changes = [np.ptp(np.sign(seed_values[..., a])) > 0 for a in range(M.dim)]
        if all(changes):
            warnings.warn("Newton failed from every seed although the section changes sign; "
                          "refine the seed grid", ResolutionWarning, stacklevel=2)
        return report
    for i in _dedupe(M, found, dedupe_radius):
        q = M.interior(found[i])
        det = float(np.linalg.det(geo.covariant_derivative_section(M, s, q)))
        if abs(det) < det_tol:
            raise DegenerateZeroError(f"degenerate zero at {q.tolist()} (|det| = {abs(det):.3g})", q.tolist())
        report.zeros.append(HopfZero(point=tuple(float(x) for x in q), index=1 if det > 0 else -1, abs_det=abs(det)))
    report.zeros.sort(key=lambda z: z.point)
    return report


# t-family ------------------------------------------------------------------


@dataclass
class ScanReport:
    results: list
    max_deviation: float
    tolerance: float
    warnings: list

    def to_dict(self) -> dict:
        return {
            "results": [{"t": r.t, "chi": r.chi, "convergence_estimate": r.convergence_estimate} for r in self.results],
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "warnings": list(self.warnings),
        }


def thom_family_scan(ctx: MQContext, t_list: Sequence[float], tol: float = 1e-4) -> ScanReport:
    """Evaluate the integral along the family ``s_t = t s``; it should not move."""
    if any(t < 0 for t in t_list):
        raise DomainError("t values must be non-negative")
    results = [euler_integral(ctx, t) for t in t_list]
    chis = [r.chi for r in results]
    dev = max(chis) - min(chis) if chis else 0.0
    notes = []
    for r in results:
        if r.convergence_estimate > 10 * tol:
            msg = f"t={r.t}: convergence estimate {r.convergence_estimate:.3g} exceeds 10x tolerance"
            notes.append(msg)
            warnings.warn(msg, ResolutionWarning, stacklevel=2)
    return ScanReport(results=results, max_deviation=dev, tolerance=tol, warnings=notes)


# compression onto the unit disk ---------------------------------------------------


def disk_compress(x) -> np.ndarray:
    """``x / sqrt(1 + |x|^2)`` along the last axis; intermediates in extended precision."""
    x = np.asarray(x, float)
    xl = x.astype(np.longdouble)
    return (xl / np.sqrt(1 + np.sum(xl * xl, axis=-1, keepdims=True))).astype(float)


def disk_decompress(y) -> np.ndarray:
    """Inverse of :func:`disk_compress` on the open unit ball."""
    y = np.asarray(y, float)
    yl = y.astype(np.longdouble)
    r = np.sqrt(np.sum(yl * yl, axis=-1, keepdims=True))
    if np.any(r >= 1):
        raise DomainError("disk_decompress needs |y| < 1")
    return (yl / np.sqrt((1 - r) * (1 + r))).astype(float)
