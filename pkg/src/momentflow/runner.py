"""Experiment execution: flows, analyses, CSV and report emission.

``run_experiment`` drives one experiment to completion: it integrates the
configured flow, runs the enabled analyses, writes ``trajectory.csv`` (and
``ray.csv`` when the ray analysis is on) plus a plain-text ``report.txt``
with fixed section order, and returns the check list that decides the exit
status. Everything is deterministic given the experiment and its seed; the
seed only feeds the randomized verification samples of the normal-form
analysis.
"""

import os
from dataclasses import dataclass

import numpy as np

from .degeneration import (compare_with_oracle, hermitian_generator,
                           limit_direction, torus_oracle)
from .errors import DiagnosticError
from .flow import (FlowOptions, check_rates, cointegrate_group, fit_lojasiewicz,
                   integrate_kempf_ness, integrate_projective, reparametrize)
from .normal_form import (ModelPoint, build_model, model_symplectic_form,
                          verify_closedness, verify_moment_identity)
from .representation import projective_moment_map
from .symmetric_space import SymmetricSpacePoint, extract_asymptotic_ray

SECTIONS = ("CONFIG", "FLOW", "RATES", "RAY", "DEGENERATION", "NORMAL_FORM",
            "VERDICT")


@dataclass
class Check:
    name: str
    value: float
    lo: float
    hi: float

    @property
    def passed(self):
        return self.lo <= self.value <= self.hi and np.isfinite(self.value)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"  {self.name} = {_num(self.value)}  "
                f"in [{_num(self.lo)}, {_num(self.hi)}]  {status}")


def _num(x):
    x = float(x)
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _scale_bounds(lo, hi, scale):
    """Uniform tolerance relaxation of a check interval."""
    if scale == 1.0:
        return lo, hi
    if np.isfinite(lo) and np.isfinite(hi):
        mid = 0.5 * (lo + hi)
        return mid - scale * (mid - lo), mid + scale * (hi - mid)
    if np.isfinite(hi):
        return lo, hi * scale
    return lo / scale, hi


def _subsample_geometric(clocks, start=0.5, growth=1.05):
    idx, target = [], start
    for i, s in enumerate(clocks):
        if s >= target:
            idx.append(i)
            target = max(target * growth, s * growth)
    if idx and idx[-1] != len(clocks) - 1:
        idx.append(len(clocks) - 1)
    return np.array(idx, dtype=int)


class ExperimentRun:
    """Mutable run state: sections of the report and the check list."""

    def __init__(self, exp, tol_scale=1.0, seed=0):
        self.exp = exp
        self.tol_scale = tol_scale
        self.seed = seed
        self.sections = {name: [] for name in SECTIONS}
        self.checks = []
        self.extra_bounds = {name: (lo, hi) for name, lo, hi in exp.checks}

    def say(self, section, text):
        self.sections[section].append(text)

    def check(self, name, value, lo=-float("inf"), hi=float("inf")):
        if name in self.extra_bounds:
            blo, bhi = self.extra_bounds.pop(name)
            lo, hi = max(lo, blo), min(hi, bhi)
        lo, hi = _scale_bounds(lo, hi, self.tol_scale)
        self.checks.append(Check(name=name, value=float(value), lo=lo, hi=hi))


def run_experiment(exp, out_dir, *, seed=0, tol_scale=1.0, quiet=False):
    """Execute one experiment; returns (exit_status, report_path).

    Exit status 0 means every enabled check passed its documented tolerance
    (scaled by ``tol_scale``); 1 means a numerical check failed.
    """
    os.makedirs(out_dir, exist_ok=True)
    run = ExperimentRun(exp, tol_scale=tol_scale, seed=seed)
    p = exp.presentation

    run.say("CONFIG", f"  name = {exp.name}")
    run.say("CONFIG", f"  group_kind = {p.kind}")
    run.say("CONFIG", f"  dim_V = {p.dim_v}")
    run.say("CONFIG", f"  dim_g = {p.dim_g}")
    run.say("CONFIG", f"  mode = {exp.mode}")
    run.say("CONFIG", f"  t_max = {_num(exp.flow_opts.t_max)}")
    run.say("CONFIG", f"  eps_grad = {_num(exp.flow_opts.eps_grad)}")
    run.say("CONFIG", f"  initial_step = {_num(exp.flow_opts.initial_step)}")
    run.say("CONFIG", f"  analyses = {', '.join(exp.analyses) if exp.analyses else 'none'}")
    run.say("CONFIG", f"  seed = {seed}")
    run.say("CONFIG", f"  tol_scale = {_num(tol_scale)}")

    need_ray = "ray" in exp.analyses
    traj = _primary_flow(exp, cointegrate=need_ray)
    traj.to_csv(os.path.join(out_dir, "trajectory.csv"))
    run.say("FLOW", f"  clock = {traj.clock}")
    run.say("FLOW", f"  samples = {len(traj)}")
    run.say("FLOW", f"  terminated = {traj.terminated_reason}")
    run.say("FLOW", f"  final_time = {_num(traj.t[-1])}")
    run.say("FLOW", f"  final_f = {_num(traj.f[-1])}")
    run.say("FLOW", f"  final_grad = {_num(traj.grad_norm[-1])}")
    fdiff = np.diff(traj.f)
    run.say("FLOW", f"  max_f_increase = {_num(max(0.0, fdiff.max()) if len(fdiff) else 0.0)}")

    if "rates" in exp.analyses:
        _run_rates(run, exp, traj)
    else:
        run.say("RATES", "  disabled")

    oracle = None
    if "oracle" in exp.analyses and exp.weights is not None:
        oracle = torus_oracle(exp.weights, support=exp.oracle_support)

    if "degeneration" in exp.analyses:
        _run_degeneration(run, exp, traj, oracle, out_dir)
    else:
        run.say("DEGENERATION", "  disabled")

    if need_ray:
        _run_ray(run, exp, traj, oracle, out_dir)
    else:
        run.say("RAY", "  disabled")

    if "normal_form" in exp.analyses:
        _run_normal_form(run, exp)
    else:
        run.say("NORMAL_FORM", "  disabled")

    for check in run.checks:
        run.say("VERDICT", check.line())
    ok = all(c.passed for c in run.checks)
    run.say("VERDICT", f"  overall = {'OK' if ok else 'FAIL'}")

    report_path = os.path.join(out_dir, "report.txt")
    with open(report_path, "w") as fh:
        for section in SECTIONS:
            fh.write(f"[{section}]\n")
            for line in run.sections[section]:
                fh.write(line + "\n")
            fh.write("\n")
    if not quiet:
        with open(report_path) as fh:
            print(fh.read(), end="")
    return (0 if ok else 1), report_path


def _primary_flow(exp, cointegrate):
    p, v0, opts = exp.presentation, exp.v0, exp.flow_opts
    if exp.mode == "projective":
        return integrate_projective(p, v0, opts, cointegrate=cointegrate)
    if exp.mode == "cointegrate" or cointegrate:
        return cointegrate_group(p, v0, opts)
    return integrate_kempf_ness(p, v0, opts)


def _affine_leg(exp):
    """Affine trajectory for the rate analyses (reused if primary is affine)."""
    opts = exp.flow_opts
    if exp.mode != "projective":
        return reparametrize(integrate_kempf_ness(exp.presentation, exp.v0, opts))
    affine_opts = FlowOptions(t_max=1e4, eps_grad=opts.eps_grad,
                              initial_step=opts.initial_step)
    return reparametrize(integrate_kempf_ness(exp.presentation, exp.v0, affine_opts))


def _run_rates(run, exp, traj):
    p = exp.presentation
    affine = _affine_leg(exp)
    try:
        fit = fit_lojasiewicz(affine)
    except DiagnosticError as err:
        run.say("RATES", f"  fit_error = {err}")
        run.check("rates.fit_ok", 0.0, 1.0, 1.0)
        return
    run.say("RATES", f"  decay_exponent = {_num(fit.decay_exponent)}")
    run.say("RATES", f"  alpha_hat = {_num(fit.alpha_hat)}")
    run.say("RATES", f"  fit_quality = {_num(fit.fit_quality)}")
    run.say("RATES", f"  semilog_quality = {_num(fit.semilog_quality)}")
    run.check("rates.fit_quality", fit.fit_quality, 0.98, 1.0)
    run.check("rates.decay_exponent", fit.decay_exponent)
    run.check("rates.alpha_hat", fit.alpha_hat, 0.5, 1.0)

    rates = check_rates(affine, fit.alpha_hat)
    if rates.applicable:
        run.say("RATES", f"  f_plateau_ratio = {_num(rates.f_plateau_ratio)}")
        run.say("RATES", f"  dist_plateau_ratio = {_num(rates.dist_plateau_ratio)}")
        run.check("rates.f_plateau_ratio", rates.f_plateau_ratio, 1.0, 1.5)
        run.check("rates.dist_plateau_ratio", rates.dist_plateau_ratio, 1.0, 1.5)
        # the collapse-rate plateau |v| * sqrt(t) at the stated exponent
        half = check_rates(affine, 0.75)
        if half.limit_is_origin:
            run.say("RATES", f"  v_plateau_ratio = {_num(half.dist_plateau_ratio)}")
            run.check("rates.v_plateau_ratio", half.dist_plateau_ratio, 1.0, 1.5)
    # pointwise |grad f|^4 >= c f^3 on the final decade
    win = affine.t >= affine.t[-1] / 10.0
    with np.errstate(divide="ignore"):
        ratio = affine.grad_norm[win] ** 4 / affine.f[win] ** 3
    run.say("RATES", f"  grad4_over_f3_min = {_num(ratio.min())}")
    run.check("rates.grad4_over_f3_min", ratio.min(), 1e-2, float("inf"))
    # the logarithmic clock: s against log t over the final decade
    st = affine.s[win]
    lt = np.log(affine.t[win])
    slope, intercept = np.polyfit(lt, st, 1)
    resid = st - (slope * lt + intercept)
    r2 = 1.0 - float(np.sum(resid**2)) / float(np.sum((st - st.mean()) ** 2))
    run.say("RATES", f"  s_logt_r2 = {_num(r2)}")
    run.say("RATES", f"  s_logt_slope = {_num(slope)}")
    run.check("rates.s_logt_r2", r2, 0.99, 1.0)


def _projective_leg(exp, traj):
    if traj.kind == "projective":
        return traj
    return integrate_projective(exp.presentation, exp.v0,
                                FlowOptions(t_max=200.0,
                                            eps_grad=exp.flow_opts.eps_grad))


def _run_degeneration(run, exp, traj, oracle, out_dir):
    p = exp.presentation
    proj = _projective_leg(exp, traj)
    report = limit_direction(p, proj)
    run.say("DEGENERATION", f"  limit_direction = {_vec(report.limit_direction)}")
    run.say("DEGENERATION", f"  spectrum = {_vec(report.spectrum)}")
    if report.rational_approx is not None:
        ints, den = report.rational_approx
        run.say("DEGENERATION", f"  rational = {list(ints)} / {den}")
    else:
        run.say("DEGENERATION", "  rational = none (certification failed honestly)")
    mu_norm = p.norm_lowered(projective_moment_map(p, report.limit_point))
    run.say("DEGENERATION", f"  limit_mu_norm = {_num(mu_norm)}")
    run.check("degeneration.limit_nonzero",
              float(mu_norm >= 10.0 * proj.eps_grad), 1.0, 1.0)

    if oracle is None:
        run.say("DEGENERATION", "  oracle = not run")
    elif oracle.semistable:
        run.say("DEGENERATION", "  oracle = semi-stable (origin in hull)")
    else:
        beta = oracle.beta
        run.say("DEGENERATION", f"  oracle_beta = {_vec(beta)}")
        run.say("DEGENERATION", f"  oracle_face = {list(oracle.support_face)}")
        if exp.oracle_embedding is not None:
            coords = exp.oracle_embedding @ beta
        else:
            coords = beta
        if p.kind == "torus" and exp.oracle_embedding is None:
            report.verdict = compare_with_oracle(report, beta)
            report.oracle_direction = beta / np.linalg.norm(beta)
            cosang = float(report.limit_direction @ beta) / (
                np.linalg.norm(report.limit_direction) * np.linalg.norm(beta))
            angle = float(np.arccos(np.clip(cosang, -1.0, 1.0)))
            run.say("DEGENERATION", f"  verdict = {report.verdict}")
            run.say("DEGENERATION", f"  oracle_angle = {_num(angle)}")
            run.check("degeneration.oracle_angle", angle, 0.0, 1e-3)
            # collapse onto the minimizing face: mass off the face must vanish
            off = [abs(report.limit_point[j]) for j in range(p.dim_v)
                   if j not in oracle.support_face]
            off_mass = max(off) if off else 0.0
            run.say("DEGENERATION", f"  off_face_mass = {_num(off_mass)}")
            run.check("degeneration.off_face_mass", off_mass, 0.0, 1e-4)
        else:
            # nonabelian validation goes through conjugacy invariants
            gen = hermitian_generator(p, p.lower(coords))
            spec_oracle = np.linalg.eigvalsh(gen)
            err = float(np.max(np.abs(report.spectrum - spec_oracle)))
            report.verdict = "match" if err <= 1e-2 else "mismatch"
            run.say("DEGENERATION", f"  spectrum_vs_oracle = {_num(err)}")
            run.check("degeneration.spectrum_vs_oracle", err, 0.0, 1e-2)

    with open(os.path.join(out_dir, "degeneration.csv"), "w") as fh:
        fh.write("kind,index,value\n")
        for i, lam in enumerate(report.spectrum):
            fh.write(f"spectrum,{i},{_num(lam)}\n")
        for i, c in enumerate(report.limit_direction):
            fh.write(f"direction,{i},{_num(c)}\n")
        fh.write(f"verdict,0,{report.verdict}\n")


def _run_ray(run, exp, traj, oracle, out_dir):
    p = exp.presentation
    if traj.g is None:
        run.say("RAY", "  error = ray analysis needs a cointegrated flow")
        run.check("ray.available", 0.0, 1.0, 1.0)
        return
    idx = _subsample_geometric(traj.t)
    pts = [SymmetricSpacePoint.from_group(traj.g[i]) for i in idx]
    base = SymmetricSpacePoint.from_matrix(np.eye(p.dim_v))
    ray, diag = extract_asymptotic_ray(pts, base, traj.t[idx])
    run.say("RAY", f"  tail_samples = {len(diag.distances)}")
    run.say("RAY", f"  final_distance = {_num(diag.distances[-1])}")
    run.say("RAY", f"  final_angle = {_num(diag.angles[-1])}")
    run.say("RAY", f"  residuals = {_vec(diag.residuals)}")
    run.say("RAY", f"  spectrum = {_vec(diag.spectrum)}")
    if ray.rational_approx is not None:
        ints, den = ray.rational_approx
        run.say("RAY", f"  rational = {list(ints)} / {den}")
    else:
        run.say("RAY", "  rational = none (certification failed honestly)")
    run.check("ray.final_angle", diag.angles[-1], 0.0, 1e-3)
    # Cauchy decrease is asserted on the final stretch (the transit toward
    # the limit set may legitimately swing the chord first), with a slack at
    # the arccos round-off floor, far below the 1e-3 criterion.
    angles_tail = diag.angles[-8:]
    monotone = float(np.all(np.diff(angles_tail) <= 1e-6)) if len(angles_tail) > 1 else 1.0
    run.check("ray.angles_monotone", monotone, 1.0, 1.0)
    resid_dec = float(np.all(np.diff(diag.residuals) <= 1e-6)) if len(diag.residuals) > 1 else 1.0
    run.check("ray.residuals_decreasing", resid_dec, 1.0, 1.0)
    run.check("ray.residual_last", diag.residuals[-1], 0.0, 1e-2)

    if oracle is not None and not oracle.semistable:
        beta = oracle.beta
        if exp.oracle_embedding is not None:
            coords = exp.oracle_embedding @ beta
        else:
            coords = beta
        gen = hermitian_generator(p, p.lower(coords))
        spec_oracle = np.linalg.eigvalsh(gen)
        err = float(np.max(np.abs(diag.spectrum - spec_oracle)))
        run.say("RAY", f"  spectrum_vs_oracle = {_num(err)}")
        run.check("ray.spectrum_vs_oracle", err, 0.0, 1e-2)

    ray_path = os.path.join(out_dir, "ray.csv")
    with open(ray_path, "w") as fh:
        fh.write("kind,index,value\n")
        for i, lam in enumerate(diag.spectrum):
            fh.write(f"eigenvalue,{i},{_num(lam)}\n")
        for i, ang in enumerate(diag.angles):
            fh.write(f"angle,{i},{_num(ang)}\n")
        for i, r in enumerate(diag.residuals):
            fh.write(f"residual,{i},{_num(r)}\n")
        for i, d in enumerate(diag.distances):
            fh.write(f"distance,{i},{_num(d)}\n")


def _run_normal_form(run, exp):
    p = exp.presentation
    rng = np.random.default_rng(run.seed)
    model = build_model(p, exp.v0)
    run.say("NORMAL_FORM", f"  dim_g0 = {model.dim_g0}")
    run.say("NORMAL_FORM", f"  dim_m = {model.dim_m}")
    run.say("NORMAL_FORM", f"  dim_N_real = {model.dim_n}")
    run.check("normal_form.dim_split",
              float(2 * model.dim_m + model.dim_n == 2 * p.dim_v), 1.0, 1.0)

    def rand_point():
        return ModelPoint(xi_m=0.3 * rng.standard_normal(model.dim_m),
                          rho=0.5 * rng.standard_normal(model.dim_m),
                          v=0.5 * rng.standard_normal(model.dim_n))

    def rand_tangent():
        return (rng.standard_normal(model.dim_m),
                rng.standard_normal(model.dim_m),
                rng.standard_normal(model.dim_n))

    n_samples = 100
    samples = [(rand_point(), rng.standard_normal(p.dim_g))
               for _ in range(n_samples)]
    resid_mu = verify_moment_identity(model, samples)
    run.say("NORMAL_FORM", f"  moment_identity = {_num(resid_mu)}")
    run.check("normal_form.moment_identity", resid_mu, 0.0, 1e-5)

    triples = [(rand_point(), rand_tangent(), rand_tangent(), rand_tangent())
               for _ in range(n_samples)]
    resid_d = verify_closedness(model, triples)
    run.say("NORMAL_FORM", f"  closedness = {_num(resid_d)}")
    run.check("normal_form.closedness", resid_d, 0.0, 1e-4)

    nonabelian = model.dim_m > 1 and model.dim_g0 > 0
    if nonabelian:
        def corrupted(m, at, x1, x2):
            return model_symplectic_form(m, at, x1, x2, include_bracket=False)

        resid_neg = verify_closedness(model, triples, form=corrupted)
        run.say("NORMAL_FORM", f"  negative_control = {_num(resid_neg)}")
        run.check("normal_form.negative_control", resid_neg, 1e-2, float("inf"))
    else:
        run.say("NORMAL_FORM", "  negative_control = skipped (abelian model)")


def _vec(x):
    return "[" + ", ".join(_num(v) for v in np.asarray(x, dtype=float)) + "]"
