"""Riemannian data on manifolds presented by a single coordinate chart.

Every function here is vectorised: a point ``u`` has shape ``(..., n)`` and
results carry the same leading batch axes.

Index conventions
-----------------
* ``metric[..., i, j] = g_ij`` and ``dg[..., k, i, j] = d_k g_ij``.
* ``christoffel[..., m, r, s] = Gamma^m_{rs}``.
* ``riemann[..., r, s, m, n] = R^r_{smn}
  = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}``.
* The vielbein ``e[..., a, m]`` holds the orthonormal coframe
  ``e^a = e^a_m du^m``; ``e_inv[..., m, a]`` is the dual frame.
* Section Jacobians are ``jac[..., m, k] = d_k s^m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, GeometryError

FIRST_STEP = 1e-5
SECOND_STEP = 1e-4
POLE_TRIM = 1e-6


@dataclass(frozen=True)
class ChartManifold:
    """A ``dim``-dimensional Riemannian manifold covered by one box chart.

    ``lower``/``upper`` bound the closed parameter box.  Non-periodic axes are
    integrated over ``[lower + trim, upper - trim]`` to excise coordinate
    degeneracies (sphere poles); periodic axes are integrated over
    ``[lower, upper)``.
    """

    name: str
    dim: int
    lower: tuple
    upper: tuple
    periodic: tuple
    metric_fn: Callable[[np.ndarray], np.ndarray]
    metric_derivatives_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    riemann_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    embedding_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    trim: tuple = ()
    params: dict = field(default_factory=dict)
    curvature_mode: str = "analytic"
    orientation: int = 1
    diagonal: bool = False

    def __post_init__(self):
        n = self.dim
        if len(self.lower) != n or len(self.upper) != n or len(self.periodic) != n:
            raise ConfigError("chart bounds and periodicity flags must match the dimension")
        if not self.trim:
            object.__setattr__(self, "trim", (0.0,) * n)
        if self.curvature_mode not in ("analytic", "finite-difference"):
            raise ConfigError(f"unknown curvature mode {self.curvature_mode!r}")
        if self.orientation not in (1, -1):
            raise ConfigError("orientation must be +1 or -1")
        self._check_periodic_metric()

    def _check_periodic_metric(self):
        rng = np.random.default_rng(0)
        lo, hi = self.domain_lower, self.domain_upper
        for k in range(self.dim):
            if not self.periodic[k]:
                continue
            u = lo + (hi - lo) * rng.random((4, self.dim))
            a, b = u.copy(), u.copy()
            a[:, k] = self.lower[k]
            b[:, k] = self.upper[k]
            if not np.allclose(self.metric_fn(a), self.metric_fn(b), rtol=0, atol=1e-10):
                raise ConfigError(f"metric does not match across periodic axis {k}")

    @property
    def m(self) -> int:
        return self.dim // 2

    @property
    def domain_lower(self) -> np.ndarray:
        return np.asarray(self.lower, float) + np.where(self.periodic, 0.0, self.trim)

    @property
    def domain_upper(self) -> np.ndarray:
        return np.asarray(self.upper, float) - np.where(self.periodic, 0.0, self.trim)

    def with_curvature_mode(self, mode: str) -> "ChartManifold":
        return replace(self, curvature_mode=mode)

    def flipped(self) -> "ChartManifold":
        """Same chart with the frame orientation reversed."""
        return replace(self, orientation=-self.orientation)

    def wrap(self, u: np.ndarray) -> np.ndarray:
        """Reduce periodic coordinates into ``[lower, upper)``, clamp the rest to the box."""
        u = np.array(u, dtype=float)
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        per = np.asarray(self.periodic)
        wrapped = lo + np.mod(u - lo, hi - lo)
        return np.where(per, wrapped, np.clip(u, lo, hi))

    def interior(self, u: np.ndarray) -> np.ndarray:
        """Nearest point of the trimmed integration domain."""
        return np.clip(self.wrap(u), self.domain_lower, np.where(self.periodic, self.upper, self.domain_upper))


@dataclass(frozen=True)
class FrameData:
    e: np.ndarray
    e_inv: np.ndarray

    @property
    def volume_factor(self) -> np.ndarray:
        """``det e``: the frame volume form is ``det(e) du^1 ... du^n``."""
        return np.linalg.det(self.e)


@dataclass(frozen=True)
class CurvatureAtPoint:
    """``omega[..., a, b, m, n]``: frame indices ``(a, b)``, chart indices ``(m, n)``."""

    omega: np.ndarray


@dataclass(frozen=True)
class SectionField:
    """Vector field in chart components; the Jacobian falls back to central differences."""

    name: str
    field_fn: Callable[[np.ndarray], np.ndarray]
    jacobian_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def values(self, u):
        return self.field_fn(np.asarray(u, float))

    def jacobian(self, u):
        u = np.asarray(u, float)
        if self.jacobian_fn is not None:
            return self.jacobian_fn(u)
        return np.swapaxes(central_difference(self.field_fn, u, FIRST_STEP), -1, -2)


def central_difference(f, u: np.ndarray, step: float) -> np.ndarray:
    """Stack of ``d_k f`` along a new axis placed right after the batch axes."""
    u = np.asarray(u, float)
    n = u.shape[-1]
    out = []
    for k in range(n):
        h = step * np.maximum(1.0, np.abs(u[..., k]))
        up, dn = u.copy(), u.copy()
        up[..., k] += h
        dn[..., k] -= h
        diff = f(up) - f(dn)
        out.append(diff / (2 * h).reshape(h.shape + (1,) * (diff.ndim - h.ndim)))
    return np.stack(out, axis=u.ndim - 1)


# metric-derived quantities ---------------------------------------------------


def metric(M: ChartManifold, u) -> np.ndarray:
    return M.metric_fn(np.asarray(u, float))


def metric_derivatives(M: ChartManifold, u) -> np.ndarray:
    u = np.asarray(u, float)
    if M.metric_derivatives_fn is not None:
        return M.metric_derivatives_fn(u)
    return central_difference(M.metric_fn, u, FIRST_STEP)


def _vielbein(M: ChartManifold, g: np.ndarray, strict: bool) -> np.ndarray:
    if M.diagonal:
        d = np.diagonal(g, axis1=-2, axis2=-1)
        if strict and np.any(d <= 0):
            raise GeometryError("metric is not positive definite")
        e = np.zeros_like(g)
        idx = np.arange(M.dim)
        e[..., idx, idx] = np.sqrt(np.maximum(d, 0.0))
    else:
        # Cholesky g = L L^t is Gram-Schmidt on d/du^1, d/du^2, ... in order
        try:
            e = np.swapaxes(np.linalg.cholesky(g), -1, -2)
        except np.linalg.LinAlgError as exc:
            raise GeometryError("metric is not positive definite") from exc
    if M.orientation < 0:
        e = e.copy()
        e[..., -1, :] *= -1
    return e


def orthonormal_frame(M: ChartManifold, u) -> FrameData:
    g = metric(M, u)
    e = _vielbein(M, g, strict=True)
    return FrameData(e=e, e_inv=np.linalg.inv(e))


def _inverse_metric(g):
    with np.errstate(all="ignore"):
        try:
            ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise GeometryError("metric is singular") from exc
    if not np.all(np.isfinite(ginv)):
        raise GeometryError("metric is singular")
    return ginv


def christoffel(M: ChartManifold, u) -> np.ndarray:
    g = metric(M, u)
    dg = metric_derivatives(M, u)
    ginv = _inverse_metric(g)
    # lowered[n, r, s] = d_r g_ns + d_s g_nr - d_n g_rs
    lowered = np.einsum("...rns->...nrs", dg) + np.einsum("...snr->...nrs", dg) - dg
    return 0.5 * np.einsum("...mn,...nrs->...mrs", ginv, lowered)


def riemann_from_christoffel(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """``dgamma[..., k, a, b, c] = d_k Gamma^a_bc``."""
    return (
        np.einsum("...mrns->...rsmn", dgamma)
        - np.einsum("...nrms->...rsmn", dgamma)
        + np.einsum("...rml,...lns->...rsmn", gamma, gamma)
        - np.einsum("...rnl,...lms->...rsmn", gamma, gamma)
    )


def riemann(M: ChartManifold, u, mode: str | None = None) -> np.ndarray:
    u = np.asarray(u, float)
    mode = mode or M.curvature_mode
    if mode == "analytic" and M.riemann_fn is not None:
        return M.riemann_fn(u)
    gamma = christoffel(M, u)
    dgamma = central_difference(lambda x: christoffel(M, x), u, SECOND_STEP)
    return riemann_from_christoffel(gamma, dgamma)


def _to_frame(frame: FrameData, R: np.ndarray) -> np.ndarray:
    # pairwise contractions: multi-operand einsum is very slow on large batches
    omega = np.einsum("...ar,...rsmn->...asmn", frame.e, R)
    omega = np.einsum("...asmn,...sb->...abmn", omega, frame.e_inv)
    # exact for analytic curvature; drops the finite-difference error otherwise
    return 0.5 * (omega - np.swapaxes(omega, -3, -4))


def curvature_form(M: ChartManifold, u, mode: str | None = None) -> CurvatureAtPoint:
    """Curvature two-form in the orthonormal frame, chart form indices."""
    frame = orthonormal_frame(M, u)
    return CurvatureAtPoint(omega=_to_frame(frame, riemann(M, u, mode)))


def frame_curvature(M: ChartManifold, u, mode: str | None = None) -> np.ndarray:
    """``Omega_ab`` with the form indices also in the frame: ``[..., a, b, c, d]``,
    so that ``Omega_ab = 1/2 sum_cd Omega_abcd e^c e^d``.
    """
    frame = orthonormal_frame(M, u)
    omega = _to_frame(frame, riemann(M, u, mode))
    omega = np.einsum("...abmn,...mc->...abcn", omega, frame.e_inv)
    return np.einsum("...abcn,...nd->...abcd", omega, frame.e_inv)


def section_frame_components(M: ChartManifold, s: SectionField, u, strict: bool = True) -> np.ndarray:
    u = np.asarray(u, float)
    e = _vielbein(M, metric(M, u), strict=strict)
    return np.einsum("...am,...m->...a", e, s.values(u))


def covariant_derivative_section(M: ChartManifold, s: SectionField, u) -> np.ndarray:
    """``(nabla s)^a_b`` in frame indices: ``e^a_m (d_k s^m + Gamma^m_{kl} s^l) E^k_b``."""
    u = np.asarray(u, float)
    frame = orthonormal_frame(M, u)
    gamma = christoffel(M, u)
    chart = s.jacobian(u) + np.einsum("...mkl,...l->...mk", gamma, s.values(u))
    return frame.e @ chart @ frame.e_inv


# built-in manifolds -------------------------------------------------------------


def _constant_curvature_riemann(metric_fn, K_fn):
    def riemann_fn(u):
        g = metric_fn(u)
        n = g.shape[-1]
        delta = np.eye(n)
        K = K_fn(u)[..., None, None, None, None]
        return K * (np.einsum("rm,...sn->...rsmn", delta, g) - np.einsum("rn,...sm->...rsmn", delta, g))

    return riemann_fn


def _sphere(dim: int, r: float, name: str) -> ChartManifold:
    """Round sphere in hyperspherical coordinates ``(chi_1, ..., chi_{n-1}, phi)``
    with ``g = r^2 diag(1, s_1^2, s_1^2 s_2^2, ...)`` and ``s_k = sin chi_k``.
    """
    n = dim

    def metric_fn(u):
        s2 = np.sin(u[..., : n - 1]) ** 2
        diag = np.ones(u.shape[:-1] + (n,))
        diag[..., 1:] = np.cumprod(s2, axis=-1)
        g = np.zeros(u.shape[:-1] + (n, n))
        idx = np.arange(n)
        g[..., idx, idx] = r * r * diag
        return g

    def dmetric_fn(u):
        s2 = np.sin(u[..., : n - 1]) ** 2
        ds2 = np.sin(2 * u[..., : n - 1])
        out = np.zeros(u.shape[:-1] + (n, n, n))
        for i in range(1, n):
            for k in range(i):
                factor = ds2[..., k].copy()
                for j in range(i):
                    if j != k:
                        factor = factor * s2[..., j]
                out[..., k, i, i] = r * r * factor
        return out

    def embedding_fn(u):
        s = np.sin(u[..., : n - 1])
        c = np.cos(u[..., : n - 1])
        x = np.empty(u.shape[:-1] + (n + 1,))
        prod = np.ones(u.shape[:-1])
        for k in range(n - 1):
            x[..., k] = prod * c[..., k]
            prod = prod * s[..., k]
        x[..., n - 1] = prod * np.cos(u[..., n - 1])
        x[..., n] = prod * np.sin(u[..., n - 1])
        return r * x

    K = 1.0 / (r * r)
    return ChartManifold(
        name=name,
        dim=n,
        lower=(0.0,) * (n - 1) + (0.0,),
        upper=(math.pi,) * (n - 1) + (2 * math.pi,),
        periodic=(False,) * (n - 1) + (True,),
        metric_fn=metric_fn,
        metric_derivatives_fn=dmetric_fn,
        riemann_fn=_constant_curvature_riemann(metric_fn, lambda u: np.full(u.shape[:-1], K)),
        embedding_fn=embedding_fn,
        trim=(POLE_TRIM,) * (n - 1) + (0.0,),
        params={"radius": r},
        diagonal=True,
    )


def _torus2(R: float, r: float) -> ChartManifold:
    """Embedded torus, coordinates ``(v, u)``: ``v`` around the tube, ``u`` around the axis."""

    def metric_fn(x):
        v = x[..., 0]
        g = np.zeros(x.shape[:-1] + (2, 2))
        g[..., 0, 0] = r * r
        g[..., 1, 1] = (R + r * np.cos(v)) ** 2
        return g

    def dmetric_fn(x):
        v = x[..., 0]
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = -2 * r * np.sin(v) * (R + r * np.cos(v))
        return out

    def embedding_fn(x):
        v, u = x[..., 0], x[..., 1]
        rho = R + r * np.cos(v)
        return np.stack([rho * np.cos(u), rho * np.sin(u), r * np.sin(v)], axis=-1)

    def K_fn(x):
        v = x[..., 0]
        return np.cos(v) / (r * (R + r * np.cos(v)))

    return ChartManifold(
        name="torus2",
        dim=2,
        lower=(0.0, 0.0),
        upper=(2 * math.pi, 2 * math.pi),
        periodic=(True, True),
        metric_fn=metric_fn,
        metric_derivatives_fn=dmetric_fn,
        riemann_fn=_constant_curvature_riemann(metric_fn, K_fn),
        embedding_fn=embedding_fn,
        params={"major_radius": R, "minor_radius": r},
        diagonal=True,
    )


def _flat_torus2() -> ChartManifold:
    def metric_fn(u):
        return np.broadcast_to(np.eye(2), u.shape[:-1] + (2, 2)).copy()

    def embedding_fn(u):
        a = 2 * math.pi * u
        return np.concatenate([np.cos(a), np.sin(a)], axis=-1) / (2 * math.pi)

    return ChartManifold(
        name="flat_torus2",
        dim=2,
        lower=(0.0, 0.0),
        upper=(1.0, 1.0),
        periodic=(True, True),
        metric_fn=metric_fn,
        metric_derivatives_fn=lambda u: np.zeros(u.shape[:-1] + (2, 2, 2)),
        riemann_fn=lambda u: np.zeros(u.shape[:-1] + (2, 2, 2, 2)),
        embedding_fn=embedding_fn,
        params={},
        diagonal=True,
    )


def builtin_manifold(name: str, **params) -> ChartManifold:
    """``sphere2(radius)``, ``sphere4(radius)``, ``torus2(major_radius, minor_radius)`` or ``flat_torus2``."""
    def positive(key, default):
        value = float(params.pop(key, default))
        if not value > 0 or not math.isfinite(value):
            raise ConfigError(f"{name}: {key} must be positive, got {value}")
        return value

    if name in ("sphere2", "sphere4"):
        r = positive("radius", 1.0)
        M = _sphere(int(name[-1]), r, name)
    elif name == "torus2":
        R = positive("major_radius", 2.0)
        r = positive("minor_radius", 0.5)
        if R <= r:
            raise ConfigError(f"torus2 needs major_radius > minor_radius, got R={R}, r={r}")
        M = _torus2(R, r)
    elif name == "flat_torus2":
        M = _flat_torus2()
    else:
        raise ConfigError(f"unknown manifold {name!r}")
    if params:
        raise ConfigError(f"{name}: unexpected parameters {sorted(params)}")
    return M


BUILTIN_MANIFOLDS = ("sphere2", "torus2", "flat_torus2", "sphere4")


# built-in sections ---------------------------------------------------------------


def _zero_section(n):
    return SectionField(
        "zero",
        lambda u: np.zeros(u.shape[:-1] + (n,)),
        lambda u: np.zeros(u.shape[:-1] + (n, n)),
    )


def _height_gradient(n):
    # s = sin(chi_1) d/dchi_1, the gradient of minus the height function
    def field_fn(u):
        out = np.zeros(u.shape[:-1] + (n,))
        out[..., 0] = np.sin(u[..., 0])
        return out

    def jac_fn(u):
        out = np.zeros(u.shape[:-1] + (n, n))
        out[..., 0, 0] = np.cos(u[..., 0])
        return out

    return SectionField("height-gradient", field_fn, jac_fn)


def _rotation():
    return SectionField(
        "rotation",
        lambda u: np.broadcast_to(np.array([0.0, 1.0]), u.shape[:-1] + (2,)).copy(),
        lambda u: np.zeros(u.shape[:-1] + (2, 2)),
    )


def _sines(freq):
    def field_fn(u):
        return np.stack([np.sin(freq * u[..., 0]), np.sin(freq * u[..., 1])], axis=-1)

    def jac_fn(u):
        out = np.zeros(u.shape[:-1] + (2, 2))
        out[..., 0, 0] = freq * np.cos(freq * u[..., 0])
        out[..., 1, 1] = freq * np.cos(freq * u[..., 1])
        return out

    return SectionField("sines", field_fn, jac_fn)


SECTIONS = {
    "zero": ("sphere2", "torus2", "flat_torus2", "sphere4"),
    "height-gradient": ("sphere2", "sphere4"),
    "rotation": ("sphere2",),
    "sines": ("torus2", "flat_torus2"),
}


def builtin_section(name: str, M: ChartManifold) -> SectionField:
    if name not in SECTIONS:
        raise ConfigError(f"unknown section {name!r}")
    if M.name not in SECTIONS[name]:
        raise ConfigError(f"section {name!r} is not defined on {M.name}")
    if name == "zero":
        return _zero_section(M.dim)
    if name == "height-gradient":
        return _height_gradient(M.dim)
    if name == "rotation":
        return _rotation()
    return _sines(2 * math.pi if M.name == "flat_torus2" else 1.0)
