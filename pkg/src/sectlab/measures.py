"""Density oracles and measure-of-body / measure-of-section estimation.

A measure mu(B) = integral of a pointwise-evaluable density g over B is
estimated in polar form: the one-dimensional radial integral is done by
adaptive Gauss-Legendre refinement to relative 1e-9 (so the outer sphere
Monte Carlo always dominates the error), and the spherical average by
Monte Carlo with a reported standard error.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .bodies import StarBody, section
from .constants import log_ball_volume
from .estimates import Estimate, mean_estimate
from .grassmann import Frame, sample_haar
from .sampler import as_generator, sphere_directions, uniform_in_body

__all__ = [
    "DensityOracle",
    "LebesgueDensity",
    "GaussianDensity",
    "RadialExpDensity",
    "IndicatorDensity",
    "SectionDensity",
    "measure_of_body",
    "measure_of_section",
    "section_measure_values",
    "max_section_measure",
    "kp_body",
    "KpBody",
    "density_from_spec",
    "density_from_json",
    "QuadratureError",
    "DivergentRayError",
]

_REL_TOL = 1e-9
_MAX_PANELS = 64
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


class QuadratureError(RuntimeError):
    """Radial quadrature failed to converge; carries the offending direction."""

    def __init__(self, message: str, direction: np.ndarray | None = None):
        super().__init__(message)
        self.direction = direction


class DivergentRayError(RuntimeError):
    """A ray integral of the density does not converge."""


class DensityOracle:
    """Pointwise-evaluable nonnegative density with structural flags.

    ``radially_nonincreasing`` marks kinds whose supremum over any body
    containing the origin is attained at 0, which makes ``sup_on`` exact.
    For other kinds ``sup_on`` probes uniform samples and applies a 1.05
    safety factor (an underestimate would invalidate upper-bound checks,
    so the probed path is flagged via ``sup_is_exact = False``).
    """

    dim: int
    even: bool
    log_concave: bool
    radially_nonincreasing: bool = False

    def __init__(self, dim: int, even: bool, log_concave: bool):
        self.dim = int(dim)
        self.even = bool(even)
        self.log_concave = bool(log_concave)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def value_at_origin(self) -> float:
        return float(self(np.zeros(self.dim)))

    @property
    def sup_is_exact(self) -> bool:
        return self.radially_nonincreasing

    def sup_on(self, body: StarBody) -> float:
        if self.radially_nonincreasing:
            return self.value_at_origin
        pts = uniform_in_body(body, np.random.Generator(np.random.Philox(key=97531)),
                              size=4096)
        return 1.05 * float(np.max(self(pts)))

    def ray_cutoff(self, dirs: np.ndarray) -> np.ndarray | None:
        """Per-direction radius beyond which the density vanishes, or None."""
        return None


class LebesgueDensity(DensityOracle):
    """g == 1; the measure is volume."""

    radially_nonincreasing = True

    def __init__(self, dim: int):
        super().__init__(dim, even=True, log_concave=True)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.ones(x.shape[:-1])


class GaussianDensity(DensityOracle):
    """g(x) = exp(-x^T P x / 2); isotropic with P = I/sigma^2 by default."""

    radially_nonincreasing = True

    def __init__(self, dim: int, sigma: float = 1.0, precision: np.ndarray | None = None):
        super().__init__(dim, even=True, log_concave=True)
        if precision is not None:
            p = np.asarray(precision, dtype=float)
            if p.shape != (dim, dim):
                raise ValueError(f"precision shape {p.shape} does not match dim {dim}")
            self.precision = p
        else:
            if sigma <= 0:
                raise ValueError(f"sigma must be positive, got {sigma}")
            self.precision = np.eye(dim) / sigma ** 2
        self.sigma = sigma

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        quad = np.einsum("...i,ij,...j->...", x, self.precision, x)
        return np.exp(-0.5 * quad)


class RadialExpDensity(DensityOracle):
    """g(x) = exp(-rate * ||x||_2); even and log-concave."""

    radially_nonincreasing = True

    def __init__(self, dim: int, rate: float = 1.0):
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        super().__init__(dim, even=True, log_concave=True)
        self.rate = float(rate)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-self.rate * np.linalg.norm(x, axis=-1))


class IndicatorDensity(DensityOracle):
    """g = 1_D for a star body D (log-concave when D is convex).

    The jump makes generic quadrature unreliable, so ray integration is
    cut off exactly at D's radial function instead.
    """

    radially_nonincreasing = True

    def __init__(self, body: StarBody):
        super().__init__(body.dim, even=body.symmetric, log_concave=True)
        self.body = body

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.body.contains(np.asarray(x, dtype=float)).astype(float)

    def ray_cutoff(self, dirs: np.ndarray) -> np.ndarray:
        return self.body.radial(dirs)


class SectionDensity(DensityOracle):
    """The ambient density read in a subspace's coordinates: g(embed(u))."""

    def __init__(self, density: DensityOracle, frame: Frame):
        super().__init__(frame.s, even=density.even, log_concave=density.log_concave)
        self.radially_nonincreasing = density.radially_nonincreasing
        self.ambient = density
        self.frame = frame

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.ambient(self.frame.embed(np.asarray(u, dtype=float)))

    def ray_cutoff(self, dirs: np.ndarray) -> np.ndarray | None:
        cut = self.ambient.ray_cutoff(self.frame.embed(np.asarray(dirs, dtype=float)))
        return cut


def _radial_integrals(density: DensityOracle, dirs: np.ndarray, upper: np.ndarray,
                      power: float, lower: np.ndarray | None = None) -> np.ndarray:
    """integral_lower^upper r^(power-1) g(r * theta) dr per direction, vectorized.

    Panels of 15-point Gauss-Legendre; the panel count doubles until
    consecutive refinements agree to relative 1e-9.  The integrand must be
    smooth on the interval (integer powers from polar volume weights, or
    any power when lower > 0); :func:`_graded_radial_integrals` handles the
    weakly singular weights of the moment bodies at r = 0.
    """
    dirs = np.asarray(dirs, dtype=float)
    upper = np.asarray(upper, dtype=float)
    lower = np.zeros_like(upper) if lower is None else np.asarray(lower, dtype=float)
    width = upper - lower
    prev = None
    panels = 1
    while panels <= _MAX_PANELS:
        edges = np.arange(panels) / panels
        t = edges[:, None] + (0.5 + 0.5 * _GL_NODES[None, :]) / panels   # (P, 15)
        r = lower[:, None, None] + width[:, None, None] * t[None, :, :]  # (D, P, 15)
        pts = r[..., None] * dirs[:, None, None, :]
        vals = density(pts)
        if power != 1.0:
            vals = vals * r ** (power - 1.0)
        integral = width * np.einsum("dpk,k->d", vals, _GL_WEIGHTS) / (2.0 * panels)
        if prev is not None:
            err = np.abs(integral - prev)
            tol = _REL_TOL * np.maximum(np.abs(integral), 1e-300)
            if np.all(err <= tol):
                return integral
        prev = integral
        panels *= 2
    worst = int(np.argmax(np.abs(integral - prev)))
    raise QuadratureError(
        f"radial quadrature did not converge at {_MAX_PANELS} panels", dirs[worst])


_GRADED_LEVELS = 40


def _graded_radial_integrals(density: DensityOracle, dirs: np.ndarray, upper: np.ndarray,
                             power: float) -> np.ndarray:
    """integral_0^upper power * r^(power-1) g(r theta) dr with graded panels.

    The weight is weakly singular at r = 0 for non-integer power, so the
    panels are dyadically graded toward the origin; the microscopic
    leftover [0, upper*2^-40] is added in closed form as g(0) * eps^power
    (g is continuous at 0, making the relative error of that term O(eps)).
    Subpanel counts double until consecutive refinements agree to 1e-9.
    """
    dirs = np.asarray(dirs, dtype=float)
    upper = np.asarray(upper, dtype=float)
    eps = upper * 2.0 ** -_GRADED_LEVELS
    leftover = density.value_at_origin * eps ** power
    scale = 2.0 ** -np.arange(_GRADED_LEVELS, -1, -1.0)   # ascending dyadic edges
    lefts = upper[:, None] * scale[None, :-1]             # (D, J)
    widths = lefts                                        # each panel is [a, 2a]
    prev = None
    sub = 1
    while sub <= 8:
        offs = (np.arange(sub)[:, None] + 0.5 + 0.5 * _GL_NODES[None, :]) / sub  # (sub, 15)
        r = lefts[:, :, None, None] + widths[:, :, None, None] * offs[None, None, :, :]
        vals = density(r[..., None] * dirs[:, None, None, None, :])
        vals = vals * power * r ** (power - 1.0)
        integral = leftover + (np.einsum("djsk,k->dj", vals, _GL_WEIGHTS)
                               * widths / (2.0 * sub)).sum(axis=1)
        if prev is not None:
            err = np.abs(integral - prev)
            if np.all(err <= _REL_TOL * np.maximum(np.abs(integral), 1e-300)):
                return integral
        prev = integral
        sub *= 2
    worst = int(np.argmax(np.abs(integral - prev)))
    raise QuadratureError("graded radial quadrature did not converge", dirs[worst])


def measure_of_body(density: DensityOracle, body: StarBody, sphere_samples: int,
                    rng) -> Estimate:
    """mu(K) = n omega_n E_theta[ integral_0^rho r^(n-1) g(r theta) dr ]."""
    if sphere_samples < 100:
        raise ValueError(f"need at least 100 sphere samples, got {sphere_samples}")
    if body.dim != density.dim:
        raise ValueError(f"density dimension {density.dim} != body dimension {body.dim}")
    gen = as_generator(rng)
    theta = sphere_directions(gen, sphere_samples, body.dim)
    inner = _radial_integrals(density, theta, body.radial(theta), float(body.dim))
    factor = body.dim * math.exp(log_ball_volume(body.dim).log_value)
    return mean_estimate(inner, factor=factor)


def section_measure_values(density: DensityOracle, body: StarBody, frame: Frame,
                           sphere_samples: int, rng) -> np.ndarray:
    """Per-direction polar values whose mean estimates mu(K cap F).

    Exposed separately so that checks needing unbiased powers of the
    section measure can combine independent groups of these values.
    """
    gen = as_generator(rng)
    s = frame.s
    theta = sphere_directions(gen, sphere_samples, s)
    ambient_dirs = frame.embed(theta)
    rho = body.radial(ambient_dirs)
    inner = _radial_integrals(SectionDensity(density, frame), theta, rho, float(s))
    return s * math.exp(log_ball_volume(s).log_value) * inner


def measure_of_section(density: DensityOracle, body: StarBody, frame: Frame,
                       sphere_samples: int, rng) -> Estimate:
    """Same polar scheme run inside the subspace F, against s-dim Lebesgue."""
    if sphere_samples < 100:
        raise ValueError(f"need at least 100 sphere samples, got {sphere_samples}")
    return mean_estimate(section_measure_values(density, body, frame,
                                                sphere_samples, rng))


def max_section_measure(density: DensityOracle, body: StarBody, k: int, frames: int,
                        sphere_samples: int, rng) -> tuple[Estimate, Frame]:
    """Max of mu(K cap F) over Haar frame draws: a lower bound for the true max."""
    if frames < 1:
        raise ValueError(f"need at least one frame, got {frames}")
    from .sampler import StreamHandle
    if not isinstance(rng, StreamHandle):
        raise TypeError("max_section_measure needs a StreamHandle for per-frame substreams")
    s = body.dim - k
    best: Estimate | None = None
    best_frame: Frame | None = None
    for j in range(frames):
        sub = rng.split(j)
        frame = sample_haar(body.dim, s, sub)
        est = measure_of_section(density, body, frame, sphere_samples, sub.split(1))
        if best is None or est.value > best.value:
            best, best_frame = est, frame
    return best, best_frame


class KpBody(StarBody):
    """Star body with rho(theta)^p = (1/g(0)) integral_0^inf p r^(p-1) g(r theta) dr.

    Radial values are computed on demand by quadrature; infinite rays are
    truncated once the running increment drops below 1e-12 of the total.
    """

    def __init__(self, density: DensityOracle, p: float):
        if p <= 0:
            raise ValueError(f"moment order p must be positive, got {p}")
        g0 = density.value_at_origin
        if not g0 > 0:
            raise ValueError(f"density must be positive at the origin, got {g0}")
        super().__init__(density.dim, symmetric=density.even, exact_volume=None)
        self.density = density
        self.p = float(p)
        self._g0 = g0

    def radial(self, dirs: np.ndarray) -> np.ndarray:
        dirs = self._require_unit(np.atleast_2d(dirs))
        cut = self.density.ray_cutoff(dirs)
        if cut is not None:
            integral = _graded_radial_integrals(self.density, dirs,
                                                np.asarray(cut, float), self.p)
        else:
            integral = self._tail_integrals(dirs)
        return (integral / self._g0) ** (1.0 / self.p)

    def _tail_integrals(self, dirs: np.ndarray) -> np.ndarray:
        # graded panels absorb the r=0 weight singularity on [0, 1]; the
        # outward chunks [R, 2R] are smooth and integrated directly, doubling
        # the truncation radius until the increment is negligible
        total = _graded_radial_integrals(self.density, dirs, np.ones(len(dirs)), self.p)
        lo = 1.0
        for _ in range(64):
            chunk = self.p * _radial_integrals(self.density, dirs,
                                               np.full(len(dirs), 2.0 * lo), self.p,
                                               lower=np.full(len(dirs), lo))
            total = total + chunk
            if np.all(chunk <= 1e-12 * np.maximum(total, 1e-300)):
                return total
            lo *= 2.0
        raise DivergentRayError(
            "ray integral still growing after truncation radius 2^64; divergent density tail")

    def bounding_radius(self) -> float:
        gen = np.random.Generator(np.random.Philox(key=86420))
        net = sphere_directions(gen, 1024, self.dim)
        return 2.0 * float(self.radial(net).max())


def kp_body(density: DensityOracle, p: float) -> KpBody:
    return KpBody(density, p)


def density_from_spec(spec: dict, dim: int) -> DensityOracle:
    """Build a density from its JSON description, bound to a dimension.

    Kinds: lebesgue {}, gaussian {sigma}, radial_exp {rate}.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("density spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "lebesgue":
        return LebesgueDensity(dim)
    if kind == "gaussian":
        return GaussianDensity(dim, float(spec.get("sigma", 1.0)))
    if kind == "radial_exp":
        return RadialExpDensity(dim, float(spec.get("rate", 1.0)))
    raise ValueError(f"unknown density kind {kind!r}")


def density_from_json(text_or_path: str, dim: int) -> DensityOracle:
    text = text_or_path.strip()
    if not text.startswith("{"):
        with open(text_or_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return density_from_spec(json.loads(text), dim)
