"""Scalar functionals of bodies and measures.

Implements the simplex-moment (Sylvester) functionals, the isotropic
constant and isotropic position, the dual affine quermassintegral and its
companions (mean-section functional, negative moment), and the volume
radius.  Subspace averages are Monte Carlo over Haar frames; means of
n-th powers of section volumes are heavy-tailed and therefore accumulated
in log domain.

Frame-valued arguments accept either a count (frames are drawn from
per-index substreams) or an explicit sequence of frames, which is how
paired comparisons share common random frames.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .bodies import StarBody, linear_image, section, translate, volume
from .constants import log_ball_volume
from .estimates import (CheckReport, Estimate, equality_report, exact_log_estimate,
                        log_mean_estimate, log_power_product, mean_estimate)
from .grassmann import Frame, sample_haar
from .measures import DensityOracle, measure_of_body
from .sampler import (StreamHandle, as_generator, covariance, sample_restricted,
                      simplex_volume, sphere_directions, uniform_in_body)

__all__ = [
    "draw_frames",
    "simplex_moment",
    "sylvester",
    "blaschke_check",
    "isotropic_constant",
    "IsotropicPosition",
    "isotropize",
    "dual_affine_quermass",
    "w_tilde",
    "i_minus_k",
    "volume_radius",
    "log_volume_estimate",
    "section_volume",
]

_N_BATCHES = 20
_AUX = 1 << 40      # substream offset reserved for auxiliary draws


def draw_frames(n: int, s: int, count: int, rng: StreamHandle) -> list[Frame]:
    """Haar frames from per-index substreams: frame j depends only on (rng, j)."""
    return [sample_haar(n, s, rng.split(j)) for j in range(count)]


def _resolve_frames(frames, n: int, s: int, rng: StreamHandle) -> list[Frame]:
    if isinstance(frames, (int, np.integer)):
        return draw_frames(n, s, int(frames), rng)
    frames = list(frames)
    for f in frames:
        if f.n != n or f.s != s:
            raise ValueError(f"frame {f!r} does not match n={n}, s={s}")
    return frames


def log_volume_estimate(body: StarBody, samples: int, rng: StreamHandle) -> Estimate:
    """log |K|: exact when the body knows its volume, else polar Monte Carlo."""
    if body.exact_volume is not None:
        return exact_log_estimate(math.log(body.exact_volume))
    return volume(body, samples, rng).to_log()


def section_volume_values(body: StarBody, frame: Frame, sphere_samples: int,
                          rng) -> np.ndarray:
    """Per-direction polar values omega_s rho^s whose mean estimates |K cap F|.

    Callers that need an unbiased estimate of |K cap F|^m feed these values
    to :func:`~sectlab.estimates.log_power_product` instead of powering the
    mean.
    """
    gen = as_generator(rng)
    s = frame.s
    theta = sphere_directions(gen, sphere_samples, s)
    rho = body.radial(frame.embed(theta))
    return math.exp(log_ball_volume(s).log_value) * rho ** s


def section_volume(body: StarBody, frame: Frame, sphere_samples: int, rng) -> Estimate:
    """|K cap F| by polar Monte Carlo inside F."""
    return mean_estimate(section_volume_values(body, frame, sphere_samples, rng))


def simplex_moment(body: StarBody, m: int, p: float, trials: int, rng: StreamHandle,
                   density: DensityOracle | None = None) -> Estimate:
    """E |conv(0, x_1, ..., x_m)|^p with i.i.d. vertices from the body.

    Vertices are uniform in the body, or drawn from ``density`` restricted
    to it.  This is the raw moment; see :func:`sylvester` for the
    normalized functional.
    """
    if m != body.dim:
        raise ValueError(f"vertex count {m} must equal the body dimension {body.dim}")
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    if density is None:
        pts = uniform_in_body(body, rng, size=trials * m)
    else:
        pts = sample_restricted(density, body, rng, size=trials * m).points
    vols = simplex_volume(pts.reshape(trials, m, m))
    return mean_estimate(vols ** p)


def sylvester(body: StarBody, m: int, p: float, trials: int, rng: StreamHandle,
              density: DensityOracle | None = None,
              volume_samples: int = 20_000) -> Estimate:
    """Normalized p-th simplex-volume moment S_p.

    For the uniform-on-body case the volume normalization makes S_p
    invariant under invertible linear maps: S_p = (E|conv|^p)^(1/p) / |D|.
    For a probability measure (density restricted to the body) it is
    (E|conv|^p)^(1/p) with no volume factor.
    """
    moment = simplex_moment(body, m, p, trials, rng, density=density)
    s_p = moment.powered(1.0 / p)
    if density is None:
        s_p = s_p.divided_by(log_volume_estimate(body, volume_samples, rng.split(_AUX)))
    return s_p.to_linear()


def _batched_cov_dets(points: np.ndarray) -> np.ndarray:
    """det of per-batch sample covariances; batch means give an honest SE."""
    n = len(points)
    batch = n // _N_BATCHES
    dets = np.empty(_N_BATCHES)
    for i in range(_N_BATCHES):
        cov, _ = covariance(points[i * batch:(i + 1) * batch])
        dets[i] = np.linalg.det(cov)
    return dets


def blaschke_check(body: StarBody, trials: int, rng: StreamHandle,
                   density: DensityOracle | None = None, seed: int = 0) -> CheckReport:
    """m! S_2^2 against det Cov for a centered probability source.

    The two sides come from independent substreams.  Centering is
    validated first: the empirical mean must sit within 3 standard errors
    of the origin in every coordinate.
    """
    m = body.dim
    if density is None:
        pts = uniform_in_body(body, rng.split(1), size=trials)
    else:
        pts = sample_restricted(density, body, rng.split(1), size=trials).points
    se = pts.std(axis=0, ddof=1) / math.sqrt(trials)
    mean = pts.mean(axis=0)
    if np.any(np.abs(mean) > 3.0 * se + 1e-12):
        raise ValueError(f"source is not centered: empirical mean {mean} exceeds 3 SE {se}")

    moment2 = simplex_moment(body, m, 2.0, trials, rng.split(2), density=density)
    lhs = moment2.scaled(float(math.factorial(m)))
    rhs = mean_estimate(_batched_cov_dets(pts))
    return equality_report("blaschke_determinant", m, 0, lhs, rhs, seed=seed,
                           inputs={"trials": trials})


def isotropic_constant(body: StarBody, samples: int, rng: StreamHandle,
                       density: DensityOracle | None = None) -> Estimate:
    """L = (sup f / integral f)^(1/n) * det(Cov)^(1/2n).

    For the uniform density on a body this is det(Cov)^(1/2n) / |K|^(1/n);
    the covariance is computed about the empirical mean, so a non-centered
    source is recentered by construction.
    """
    n = body.dim
    if density is None:
        pts = uniform_in_body(body, rng.split(1), size=samples)
        log_mass = log_volume_estimate(body, samples, rng.split(2))
        log_sup = 0.0
    else:
        pts = sample_restricted(density, body, rng.split(1), size=samples).points
        log_mass = measure_of_body(density, body, max(samples // 10, 2000),
                                   rng.split(2)).to_log()
        log_sup = math.log(density.sup_on(body))
    det_est = mean_estimate(_batched_cov_dets(pts))
    l_est = det_est.powered(1.0 / (2 * n)).times(
        exact_log_estimate(log_sup / n)).divided_by(log_mass.powered(1.0 / n))
    return l_est.to_linear()


class IsotropicPosition(NamedTuple):
    body: StarBody
    transform: np.ndarray     # applied after recentering
    shift: np.ndarray         # subtracted from points of the input body
    constant: Estimate        # the isotropic constant of the input body


def isotropize(body: StarBody, samples: int, rng: StreamHandle,
               condition_limit: float = 1e8) -> IsotropicPosition:
    """Whiten a convex body: map x -> T (x - shift) so the image has volume 1
    and covariance proportional to the identity.

    T = Cov^(-1/2) (symmetric eigendecomposition) up to the volume-one
    rescaling.  A covariance condition number above ``condition_limit``
    is rejected as degenerate.
    """
    n = body.dim
    pts = uniform_in_body(body, rng.split(1), size=samples)
    shift = pts.mean(axis=0)
    centered = translate(body, -shift) if float(np.linalg.norm(shift)) > 1e-12 else body

    pts_c = uniform_in_body(centered, rng.split(2), size=samples)
    cov, _ = covariance(pts_c)
    eigval, eigvec = np.linalg.eigh(cov)
    if eigval.min() <= 0 or eigval.max() / eigval.min() > condition_limit:
        raise ValueError("degenerate body: covariance condition number "
                         f"{eigval.max() / max(eigval.min(), 0.0):.3e}")
    white = eigvec @ np.diag(eigval ** -0.5) @ eigvec.T

    whitened = linear_image(centered, white)
    log_vol = log_volume_estimate(whitened, samples, rng.split(3))
    scale = math.exp(-log_vol.value / n)
    transform = scale * white
    iso = linear_image(centered, transform)

    det_est = mean_estimate(_batched_cov_dets(pts_c))
    log_mass = log_volume_estimate(centered, samples, rng.split(4))
    constant = det_est.powered(1.0 / (2 * n)).divided_by(log_mass.powered(1.0 / n))
    return IsotropicPosition(iso, transform, shift, constant.to_linear())


def _frame_section_values(body: StarBody, frames: Sequence[Frame], sphere_samples: int,
                          rng: StreamHandle) -> list[np.ndarray]:
    """Per-frame per-direction section-volume values.

    Frame j may have been drawn from rng.split(j), so its sphere directions
    come from a child substream; the two stay independent while paired
    comparisons that share (frames, rng) also share all directions.
    """
    return [section_volume_values(body, frame, sphere_samples, rng.split(j).split(1))
            for j, frame in enumerate(frames)]


def dual_affine_quermass(body: StarBody, k: int, frames, sphere_samples: int,
                         rng: StreamHandle) -> Estimate:
    """The normalized section-power mean (E_F |K1 cap F|^n)^(1/(kn)).

    K1 is the volume-one rescaling of the body.  Each frame's n-th power
    is estimated without bias by a product of independent group means, the
    frame average is a log-sum-exp (the powers are heavy-tailed), and the
    1/(kn) root is applied on the log scale.  Invariant under
    volume-preserving linear maps, maximized by the ball.
    """
    n = body.dim
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got n={n}, k={k}")
    frame_list = _resolve_frames(frames, n, n - k, rng)
    log_vol = log_volume_estimate(body, max(sphere_samples, 2000), rng.split(_AUX))
    values = _frame_section_values(body, frame_list, sphere_samples, rng)
    logs = np.array([log_power_product(v, n) for v in values]) - (n - k) * log_vol.value
    mean_log = log_mean_estimate(logs)
    se = math.hypot(mean_log.std_error, (n - k) * log_vol.std_error) / (k * n)
    return Estimate(mean_log.value / (k * n), se, len(frame_list),
                    log_domain=True).to_linear()


def w_tilde(body: StarBody, k: int, frames, sphere_samples: int,
            rng: StreamHandle) -> Estimate:
    """Mean section volume functional (E_F |K1 cap F|)^(1/k) for volume-one K1."""
    n = body.dim
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got n={n}, k={k}")
    frame_list = _resolve_frames(frames, n, n - k, rng)
    log_vol = log_volume_estimate(body, max(sphere_samples, 2000), rng.split(_AUX))
    values = _frame_section_values(body, frame_list, sphere_samples, rng)
    logs = np.array([math.log(v.mean()) for v in values]) - (n - k) / n * log_vol.value
    mean_log = log_mean_estimate(logs)
    se = math.hypot(mean_log.std_error, (n - k) * log_vol.std_error / n) / k
    return Estimate(mean_log.value / k, se, len(frame_list), log_domain=True).to_linear()


def i_minus_k(body: StarBody, k: int, samples: int, rng: StreamHandle) -> Estimate:
    """Negative moment I_{-k} = (integral_K1 ||x||^(-k) dx)^(-1/k), volume-one K1.

    Polar integration gives integral_K ||x||^(-k) dx
    = n omega_n / (n - k) * E_theta[rho(theta)^(n-k)], which is finite for
    k < n.
    """
    n = body.dim
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got n={n}, k={k}")
    gen = rng.split(0).generator()
    from .sampler import sphere_directions
    theta = sphere_directions(gen, samples, n)
    rho = body.radial(theta)
    moment = mean_estimate(rho ** (n - k)).to_log()
    log_vol = log_volume_estimate(body, samples, rng.split(_AUX))
    log_factor = math.log(n) + log_ball_volume(n).log_value - math.log(n - k)
    # rescaling K -> K1 multiplies the integral by |K|^((k-n)/n) ... |K|^(-1) net of
    # the change of variables: integral_K1 = |K|^(-(n-k)/n - k/n ... ) handled on logs:
    log_integral = log_factor + moment.value - (n - k) / n * log_vol.value
    se = math.hypot(moment.std_error, (n - k) / n * log_vol.std_error)
    return Estimate(-log_integral / k, se / k, samples, log_domain=True).to_linear()


def volume_radius(body: StarBody, samples: int, rng) -> Estimate:
    """(E_theta rho^n)^(1/n) = (|K| / omega_n)^(1/n)."""
    from .sampler import as_generator, sphere_directions
    gen = as_generator(rng)
    theta = sphere_directions(gen, samples, body.dim)
    rho = body.radial(theta)
    return mean_estimate(rho ** body.dim).powered(1.0 / body.dim).to_linear()
