"""The check registry: every computable identity/inequality becomes a named check.

Each check estimates both sides of one relation with explicit Monte Carlo
error control, entirely in log domain where n-th powers appear, and emits
a :class:`~sectlab.estimates.CheckReport`.  Grassmannian maxima are always
maxima over *sampled* frames; for right-hand-side maxima this makes the
inequality checks conservative (the sampled max under-estimates the true
one), which is recorded in the report note.

Checks are pure functions of (inputs, seed): substreams are derived per
frame and per purpose, so rerunning any check with the same seed gives a
bit-identical report regardless of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import StarBody, linear_image, section
from .constants import gamma_nk, log_bp_constant
from .estimates import (CheckReport, Estimate, equality_report, exact_log_estimate,
                        inequality_report, log_mean_estimate, log_power_product)
from .functionals import (draw_frames, dual_affine_quermass, log_volume_estimate,
                          section_volume, section_volume_values, _resolve_frames)
from .measures import (DensityOracle, SectionDensity, measure_of_body,
                       measure_of_section, section_measure_values)
from .sampler import StreamHandle, sample_restricted, simplex_volume, uniform_in_body

__all__ = [
    "check_bp_identity",
    "check_slicing_chain",
    "check_dpp",
    "check_logconcave_identity",
    "check_grinberg",
    "check_busemann_petty_volume",
    "check_alpha_beta_construction",
    "check_stability",
    "negative_control",
    "SuiteConfig",
    "SuiteResult",
    "run_suite",
    "CHECKS",
]

_AUX = 1 << 40
_SAMPLED_MAX_NOTE = "max is sampled (lower bound of the true Grassmannian max)"


def _simplex_log_moment(sec_body: StarBody, k: int, points: int, rng: StreamHandle,
                        sec_density: DensityOracle | None = None) -> float:
    """log E|conv(0, x_1..x_s)|^k for draws inside one section."""
    s = sec_body.dim
    if sec_density is None:
        pts = uniform_in_body(sec_body, rng, size=points * s)
    else:
        pts = sample_restricted(sec_density, sec_body, rng, size=points * s).points
    vols = simplex_volume(pts.reshape(points, s, s))
    moment = float(np.mean(vols ** k))
    if moment <= 0:
        raise ValueError("simplex moment vanished; degenerate section draws")
    return math.log(moment)


def check_bp_identity(body: StarBody, k: int, frames, points_per_frame: int,
                      rng: StreamHandle, sphere_samples: int = 2000,
                      seed: int = 0) -> CheckReport:
    """|K|^(n-k) against p(n, n-k) E_F[ |K cap F|^(n-k) E|conv|^k ].

    Both sides are exact identities of the body; the right side is Monte
    Carlo over frames, with uniform vertex draws inside each section.
    """
    n = body.dim
    s = n - k
    frame_list = _resolve_frames(frames, n, s, rng)
    logs = np.empty(len(frame_list))
    for j, frame in enumerate(frame_list):
        sub = rng.split(j)
        vals = section_volume_values(body, frame, sphere_samples, sub.split(1))
        m_log = _simplex_log_moment(section(body, frame), k, points_per_frame, sub.split(2))
        logs[j] = log_power_product(vals, s) + m_log
    mean_log = log_mean_estimate(logs)
    rhs = Estimate(log_bp_constant(n, s).log_value + mean_log.value,
                   mean_log.std_error, len(frame_list), log_domain=True)
    lhs = log_volume_estimate(body, max(sphere_samples, 20_000), rng.split(_AUX)).powered(s)
    return equality_report("bp_identity", n, k, lhs, rhs, seed=seed,
                           inputs={"frames": len(frame_list),
                                   "points_per_frame": points_per_frame,
                                   "sphere_samples": sphere_samples})


def _max_section_log(density: DensityOracle, body: StarBody, frames, k: int,
                     sphere_samples: int, rng: StreamHandle) -> tuple[Estimate, int]:
    """Largest sampled section measure, in log domain, plus its frame index."""
    n = body.dim
    frame_list = _resolve_frames(frames, n, n - k, rng)
    best_val, best_se, best_j = -math.inf, 0.0, -1
    for j, frame in enumerate(frame_list):
        est = measure_of_section(density, body, frame, sphere_samples,
                                 rng.split(j).split(1))
        if est.value > best_val:
            best_val, best_se, best_j = est.value, est.std_error, j
    est = Estimate(best_val, best_se, sphere_samples)
    return est.to_log(), best_j


def _chain_report(name: str, density: DensityOracle, body: StarBody, k: int, frames,
                  sphere_samples: int, rng: StreamHandle, seed: int) -> CheckReport:
    """mu(K)^(n-k) <= gamma^(-n) p(n, n-k) (max_F mu(K cap F))^(n-k) |K|^(k(n-k)/n)."""
    n = body.dim
    mu_total = measure_of_body(density, body, sphere_samples, rng.split(_AUX + 1))
    max_log, argmax = _max_section_log(density, body, frames, k, sphere_samples, rng)
    log_vol = log_volume_estimate(body, max(sphere_samples, 20_000), rng.split(_AUX))
    consts = exact_log_estimate(-n * gamma_nk(n, k).log_value
                                + log_bp_constant(n, n - k).log_value)
    rhs = consts.times(max_log.powered(n - k)).times(log_vol.powered(k * (n - k) / n))
    lhs = mu_total.powered(n - k)
    n_frames = frames if isinstance(frames, int) else len(frames)
    return inequality_report(name, n, k, lhs, rhs, seed=seed, note=_SAMPLED_MAX_NOTE,
                             inputs={"frames": n_frames, "sphere_samples": sphere_samples,
                                     "argmax_frame": argmax,
                                     "max_section_log": max_log.value})


def check_slicing_chain(density: DensityOracle, body: StarBody, k: int, frames,
                        sphere_samples: int, rng: StreamHandle, seed: int = 0) -> CheckReport:
    """Explicit-constant slicing bound for an arbitrary bounded density.

    The sampled max under-estimates the true max, so the check is
    conservative (stricter than the proved inequality).
    """
    return _chain_report("slicing_chain", density, body, k, frames,
                         sphere_samples, rng, seed)


def check_stability(density: DensityOracle, body: StarBody, k: int, frames,
                    sphere_samples: int, rng: StreamHandle, seed: int = 0) -> CheckReport:
    """Stability form: epsilon := max sampled section measure bounds the total.

    Same computable chain as the slicing check, with epsilon read off the
    sampled sections.
    """
    return _chain_report("stability_chain", density, body, k, frames,
                         sphere_samples, rng, seed)


def check_dpp(density: DensityOracle, body: StarBody, k: int, frames,
              sphere_samples: int, rng: StreamHandle, seed: int = 0) -> CheckReport:
    """E_F[mu(K cap F)^n] <= gamma^(-n) (sup_K g)^k mu(K)^(n-k).

    Equality holds exactly for the uniform density on a Euclidean ball,
    so that fixture sits at the tolerance boundary by design.
    """
    n = body.dim
    frame_list = _resolve_frames(frames, n, n - k, rng)
    logs = np.empty(len(frame_list))
    for j, frame in enumerate(frame_list):
        vals = section_measure_values(density, body, frame, sphere_samples,
                                      rng.split(j).split(1))
        logs[j] = log_power_product(vals, n)
    lhs = log_mean_estimate(logs)
    mu_total = measure_of_body(density, body, sphere_samples, rng.split(_AUX + 1))
    sup = density.sup_on(body)
    rhs = exact_log_estimate(-n * gamma_nk(n, k).log_value + k * math.log(sup)).times(
        mu_total.powered(n - k))
    return inequality_report("dpp_bound", n, k, lhs, rhs, seed=seed,
                             inputs={"frames": len(frame_list),
                                     "sphere_samples": sphere_samples,
                                     "sup_on_body": sup,
                                     "sup_is_exact": density.sup_is_exact})


def check_logconcave_identity(density: DensityOracle, body: StarBody, k: int, frames,
                              points_per_frame: int, rng: StreamHandle,
                              sphere_samples: int = 2000, seed: int = 0) -> CheckReport:
    """mu(K)^(n-k) = p(n, n-k) E_F[ mu(K cap F)^(n-k) E|conv|^k ] for even
    log-concave densities on symmetric bodies, with vertices drawn from the
    normalized restricted measure on each section."""
    if not (density.even and density.log_concave):
        raise ValueError("identity requires an even log-concave density")
    if not body.symmetric:
        raise ValueError("identity requires a symmetric body")
    n = body.dim
    s = n - k
    frame_list = _resolve_frames(frames, n, s, rng)
    logs = np.empty(len(frame_list))
    for j, frame in enumerate(frame_list):
        sub = rng.split(j)
        vals = section_measure_values(density, body, frame, sphere_samples, sub.split(1))
        m_log = _simplex_log_moment(section(body, frame), k, points_per_frame,
                                    sub.split(2), SectionDensity(density, frame))
        logs[j] = log_power_product(vals, s) + m_log
    mean_log = log_mean_estimate(logs)
    rhs = Estimate(log_bp_constant(n, s).log_value + mean_log.value,
                   mean_log.std_error, len(frame_list), log_domain=True)
    lhs = measure_of_body(density, body, max(sphere_samples, 20_000),
                          rng.split(_AUX + 1)).powered(s)
    return equality_report("logconcave_identity", n, k, lhs, rhs, seed=seed,
                           inputs={"frames": len(frame_list),
                                   "points_per_frame": points_per_frame,
                                   "sphere_samples": sphere_samples})


def _haar_rotation(n: int, gen: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(gen.standard_normal((n, n)))
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _random_sl_matrix(n: int, rng: StreamHandle) -> np.ndarray:
    """Seeded volume-preserving transform of moderate eccentricity.

    Rotation * diagonal * rotation with singular values log-uniform in
    [1/2, 2] and product one; wilder transforms make the section-power
    integrand too heavy-tailed to average at desk-scale frame budgets.
    """
    gen = rng.generator()
    d = np.exp(gen.uniform(-math.log(2.0), math.log(2.0), n))
    d /= d.prod() ** (1.0 / n)
    return _haar_rotation(n, gen) @ np.diag(d) @ _haar_rotation(n, gen)


def check_grinberg(body: StarBody, k: int, transforms: int, frames,
                   sphere_samples: int, rng: StreamHandle,
                   seed: int = 0) -> list[CheckReport]:
    """Two-part check of the section-power functional.

    Part A (invariance): the functional agrees on the body and on seeded
    volume-preserving images, estimated over common random frames.
    Part B (maximality): the functional never exceeds the ball value
    gamma_{n,k}^(-1/k).
    """
    n = body.dim
    frame_list = _resolve_frames(frames, n, n - k, rng)
    phi = dual_affine_quermass(body, k, frame_list, sphere_samples, rng)

    pair_reports = []
    values = [phi.value]
    for t in range(transforms):
        mat = _random_sl_matrix(n, rng.split(_AUX + 2 + t))
        phi_t = dual_affine_quermass(linear_image(body, mat), k, frame_list,
                                     sphere_samples, rng)
        values.append(phi_t.value)
        pair_reports.append(
            equality_report("grinberg_invariance", n, k, phi, phi_t, seed=seed,
                            inputs={"transform_index": t, "frames": len(frame_list)}))
    if pair_reports:
        failed = [r for r in pair_reports if not r.passed]
        worst = failed[0] if failed else max(pair_reports, key=lambda r: r.margin)
    else:
        worst = equality_report("grinberg_invariance", n, k, phi, phi, seed=seed,
                                inputs={"transform_index": None})
    worst.inputs["all_values"] = values

    ball_value = exact_log_estimate(-gamma_nk(n, k).log_value / k)
    part_b = inequality_report("grinberg_maximality", n, k, phi, ball_value, seed=seed,
                               inputs={"frames": len(frame_list),
                                       "ball_value": math.exp(ball_value.value)})
    return [worst, part_b]


def check_busemann_petty_volume(body_k: StarBody, body_d: StarBody, k: int, frames,
                                sphere_samples: int, rng: StreamHandle,
                                seed: int = 0) -> CheckReport:
    """Section dominance implies the volume comparison with the functional ratio.

    Dominance |K cap F| <= |D cap F| is verified empirically on every
    common frame first (within 3 combined SEs); a violation is reported as
    "hypothesis fails" rather than raised.
    """
    if body_k.dim != body_d.dim:
        raise ValueError("bodies must share an ambient dimension")
    n = body_k.dim
    frame_list = _resolve_frames(frames, n, n - k, rng)
    violations = 0
    for j, frame in enumerate(frame_list):
        sub = rng.split(j).split(1)        # same directions for both bodies
        vk = section_volume(body_k, frame, sphere_samples, sub)
        vd = section_volume(body_d, frame, sphere_samples, sub)
        if vk.value > vd.value + 3.0 * math.hypot(vk.std_error, vd.std_error) + 1e-12:
            violations += 1
    phi_k = dual_affine_quermass(body_k, k, frame_list, sphere_samples, rng)
    phi_d = dual_affine_quermass(body_d, k, frame_list, sphere_samples, rng)
    lhs = log_volume_estimate(body_k, 20_000, rng.split(_AUX)).powered((n - k) / n)
    rhs = phi_d.divided_by(phi_k).powered(k).times(
        log_volume_estimate(body_d, 20_000, rng.split(_AUX + 1)).powered((n - k) / n))
    report = inequality_report("busemann_petty_volume", n, k, lhs, rhs, seed=seed,
                               inputs={"frames": len(frame_list),
                                       "phi_ratio": phi_d.value / phi_k.value,
                                       "dominance_violations": violations})
    if violations:
        report.passed = False
        report.note = (f"hypothesis fails: section dominance violated on "
                       f"{violations}/{len(frame_list)} sampled frames")
    return report


def check_alpha_beta_construction(body: StarBody, k: int, frames, sphere_samples: int,
                                  rng: StreamHandle, seed: int = 0) -> CheckReport:
    """Ball construction from the largest sampled section.

    Chooses r so that the ball rB has central sections of exactly the
    max sampled section volume, asserts the per-frame dominance (exact by
    construction), and reports the implied comparison constant for the
    volume-dominance problem.
    """
    if not body.symmetric:
        raise ValueError("construction requires a symmetric body")
    n = body.dim
    s = n - k
    from .constants import log_ball_volume
    frame_list = _resolve_frames(frames, n, s, rng)
    vols = np.empty(len(frame_list))
    for j, frame in enumerate(frame_list):
        vols[j] = section_volume(body, frame, sphere_samples, rng.split(j).split(1)).value
    max_vol = float(vols.max())
    log_ws = log_ball_volume(s).log_value
    r = math.exp((math.log(max_vol) - log_ws) / s)
    lhs = Estimate(max_vol, 0.0, len(frame_list)).to_log()
    rhs = exact_log_estimate(log_ws + s * math.log(r))
    log_vol = log_volume_estimate(body, 20_000, rng.split(_AUX))
    implied = math.exp(s / n * log_vol.value - gamma_nk(n, k).log_value
                       - math.log(max_vol))
    return inequality_report("alpha_beta_construction", n, k, lhs, rhs, seed=seed,
                             note=_SAMPLED_MAX_NOTE,
                             inputs={"frames": len(frame_list), "r": r,
                                     "max_section": max_vol,
                                     "implied_beta_power_k": implied})


def negative_control(body: StarBody, k: int, frames, sphere_samples: int,
                     rng: StreamHandle, seed: int = 0) -> CheckReport:
    """Intentionally reversed maximality inequality; must fail.

    Harness self-test: claims the ball value is at most 90% of the body's
    functional, a violation far beyond Monte Carlo noise, so a suite
    containing this fixture must report status "fail".
    """
    n = body.dim
    frame_list = _resolve_frames(frames, n, n - k, rng)
    phi = dual_affine_quermass(body, k, frame_list, sphere_samples, rng)
    ball_value = exact_log_estimate(-gamma_nk(n, k).log_value / k)
    report = inequality_report("negative_control", n, k, ball_value,
                               phi.scaled(0.9), seed=seed,
                               inputs={"frames": len(frame_list)})
    report.note = "self-test fixture: the reversed inequality is expected to fail"
    return report


# ---------------------------------------------------------------------------
# suite driver

CHECKS = {
    "bp_identity": check_bp_identity,
    "slicing_chain": check_slicing_chain,
    "stability_chain": check_stability,
    "dpp_bound": check_dpp,
    "logconcave_identity": check_logconcave_identity,
    "grinberg": check_grinberg,
    "busemann_petty_volume": check_busemann_petty_volume,
    "alpha_beta_construction": check_alpha_beta_construction,
    "negative_control": negative_control,
}


@dataclass
class SuiteConfig:
    """Budgets and composition of a verification run."""

    seed: int = 0
    frames: int = 500
    sphere_samples: int = 2000
    points_per_frame: int = 500
    grid: list | None = None           # None = default grid; [] = empty suite
    include_negative_control: bool = False

    def as_dict(self) -> dict:
        return {"seed": self.seed, "frames": self.frames,
                "sphere_samples": self.sphere_samples,
                "points_per_frame": self.points_per_frame,
                "grid": "default" if self.grid is None else len(self.grid),
                "include_negative_control": self.include_negative_control}


@dataclass
class SuiteResult:
    reports: list
    status: str                         # "pass" | "fail" | "error"
    errors: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1}.get(self.status, 2)

    def as_dict(self) -> dict:
        return {"status": self.status,
                "n_checks": len(self.reports),
                "n_failed": sum(not r.passed for r in self.reports),
                "errors": self.errors,
                "reports": [r.as_dict() for r in self.reports]}


def _default_grid(cfg: SuiteConfig) -> list:
    """The desk-scale default grid: n <= 5, k <= 2, 4 bodies, 3 measures.

    Inequality checks run at light budgets (their margins dwarf the noise);
    equality checks get the frame counts needed to keep realized gaps well
    inside the 2% tolerance, which keeps the whole grid under five minutes.
    """
    from .bodies import LpBall, cube
    from .measures import GaussianDensity, LebesgueDensity, RadialExpDensity

    bodies = {
        "ball3": LpBall(3, 2.0),
        "cube3": cube(3),
        "l1ball3": LpBall(3, 1.0),
        "l1ball4": LpBall(4, 1.0),
    }
    densities = {
        "lebesgue": LebesgueDensity,
        "gaussian": GaussianDensity,
        "radial_exp": RadialExpDensity,
    }
    light = {"frames": min(cfg.frames, 160), "sphere_samples": min(cfg.sphere_samples, 600)}
    eq_frames = {"ball3": 200, "cube3": 1500, "l1ball3": 1500, "l1ball4": 2500}
    grid: list = []
    for bname, body in bodies.items():
        grid.append(("bp_identity", {"body": body, "k": 1, "frames": eq_frames[bname],
                                     "points_per_frame": 300, "sphere_samples": 600},
                     bname))
        for k in (1, 2):
            for dname, dcls in densities.items():
                density = dcls(body.dim)
                grid.append(("slicing_chain", {"density": density, "body": body,
                                               "k": k, **light}, f"{bname}/{dname}"))
                grid.append(("dpp_bound", {"density": density, "body": body,
                                           "k": k, **light}, f"{bname}/{dname}"))
            grid.append(("stability_chain", {"density": GaussianDensity(body.dim),
                                             "body": body, "k": k, **light},
                         f"{bname}/gaussian"))
        grid.append(("grinberg", {"body": body, "k": 1, "transforms": 2,
                                  "frames": 800, "sphere_samples": 1000}, bname))
        grid.append(("alpha_beta_construction", {"body": body, "k": 1, **light}, bname))
    for bname in ("ball3", "cube3"):
        grid.append(("logconcave_identity",
                     {"density": GaussianDensity(3), "body": bodies[bname], "k": 1,
                      "frames": 400 if bname == "ball3" else 1500,
                      "points_per_frame": 300, "sphere_samples": 500},
                     f"{bname}/gaussian"))
    grid.append(("busemann_petty_volume",
                 {"body_k": bodies["cube3"],
                  "body_d": LpBall(3, 2.0, math.sqrt(3.0)), "k": 1, **light},
                 "cube3-in-ball"))
    grid.append(("busemann_petty_volume",
                 {"body_k": bodies["ball3"],
                  "body_d": LpBall(3, 2.0, 2.0), "k": 1, **light},
                 "ball3-in-2ball"))
    return grid


def run_suite(config: SuiteConfig) -> SuiteResult:
    """Run a configured grid of checks; deterministic given the seed."""
    grid = _default_grid(config) if config.grid is None else list(config.grid)
    if config.include_negative_control:
        from .bodies import cube
        grid.append(("negative_control",
                     {"body": cube(3), "k": 1, "frames": 100, "sphere_samples": 400},
                     "self-test"))
    handle = StreamHandle(config.seed)
    reports: list[CheckReport] = []
    errors: list[str] = []
    for index, (name, params, label) in enumerate(grid):
        fn = CHECKS[name]
        rng = handle.split(index)
        try:
            out = fn(rng=rng, seed=config.seed, **params)
        except Exception as exc:           # a check error is distinct from a failure
            errors.append(f"{name}[{label}]: {type(exc).__name__}: {exc}")
            continue
        outs = out if isinstance(out, list) else [out]
        for rep in outs:
            rep.inputs.setdefault("fixture", label)
            reports.append(rep)
    if errors:
        status = "error"
    elif all(r.passed for r in reports):
        status = "pass"
    else:
        status = "fail"
    return SuiteResult(reports, status, errors)
