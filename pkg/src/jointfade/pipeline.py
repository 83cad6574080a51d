"""End-to-end orchestration: traces in, report and plot data out."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import alignment, baseline, logistic, poisson, synth, threshold, transforms, ugpd, validation
from .config import PipelineConfig
from .core import GpdParams, PowerSeries, gpd_survival
from .decluster import decluster_arrays
from .errors import InsufficientData, StageError
from .io import dumps_report, read_traces_csv, write_csv

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
STAGES = ("data", "decluster", "threshold", "ugpd", "align", "frechet",
          "logistic", "ppp", "validate", "baseline", "compare")
MIN_PAIRS = 30


@dataclass
class PipelineResult:
    report: dict
    plots: dict = field(default_factory=dict)
    state: dict = field(default_factory=dict)

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps_report(self.report))
        for name, (header, rows) in sorted(self.plots.items()):
            write_csv(out / f"{name}.csv", header, rows)
        return out / "report.json"


def load_series(cfg: PipelineConfig):
    """Traces from ``cfg.input`` or from the synthetic generator; third item is truth or None."""
    if cfg.input:
        sx, sy = read_traces_csv(cfg.input)
        return sx, sy, None
    gx = GpdParams(cfg.synth_xi_x, cfg.synth_sigma_x, cfg.synth_u_x)
    gy = GpdParams(cfg.synth_xi_y, cfg.synth_sigma_y, cfg.synth_u_y)
    return synth.gen_tail_power_traces(gx, gy, cfg.synth_alpha, cfg.synth_n_total,
                                       cfg.synth_tail_fraction, seed=cfg.seed,
                                       window=cfg.synth_window,
                                       bulk_offset=cfg.synth_bulk_offset,
                                       bulk_sd=cfg.synth_bulk_sd)


def frechet_of_depth(depth, p: GpdParams, cap: float = transforms.FRECHET_CAP):
    """Fréchet value of a depth ``d >= 0``; ``d = 0`` is allowed (gives ``-1/log(1 - zeta)``)."""
    s = np.asarray(gpd_survival(depth, p), dtype=float)
    with np.errstate(divide="ignore"):
        out = -1.0 / np.log1p(-p.zeta * s)
    return np.clip(out, 0.0, cap)


def joint_tail_survival(a, b, cdf):
    """``P(A >= a, B >= b)`` on the Fréchet scale from a joint CDF ``cdf(a, b)``."""
    tiny = 1e-300
    a = np.maximum(a, tiny)
    b = np.maximum(b, tiny)
    return 1.0 - np.exp(-1.0 / a) - np.exp(-1.0 / b) + cdf(a, b)


class _Run:
    def __init__(self, cfg: PipelineConfig, series=None):
        self.cfg = cfg
        self.series = series
        self.report: dict = {"schema_version": SCHEMA_VERSION, "config": cfg.as_dict()}
        self.plots: dict = {}
        self.s: dict = {}

    # stages -------------------------------------------------------------

    def data(self):
        if self.series is not None:
            sx, sy = self.series
            truth = None
            source = "memory"
        else:
            sx, sy, truth = load_series(self.cfg)
            source = self.cfg.input or "synthetic"
        if len(sx) != len(sy) or not np.array_equal(sx.t, sy.t):
            raise ValueError("the two receivers must share time steps")
        self.s.update(sx=sx, sy=sy, truth=truth)
        rep = {"source": source, "n": len(sx)}
        if truth is not None:
            rep["truth"] = {
                "alpha": truth.alpha, "window": truth.window, "n_tail_windows": int(truth.tail_windows.size),
                "x": {"xi": truth.gpd_x.xi, "sigma_tilde": truth.gpd_x.sigma_tilde, "u": truth.gpd_x.u},
                "y": {"xi": truth.gpd_y.xi, "sigma_tilde": truth.gpd_y.sigma_tilde, "u": truth.gpd_y.u},
            }
        self.report["data"] = rep

    def decluster(self):
        cfg = self.cfg
        out = {}
        for m, ser in (("x", self.s["sx"]), ("y", self.s["sy"])):
            if cfg.thresholds_grid:
                u_base = float(max(cfg.thresholds_grid))
            else:
                u_base = float(np.quantile(ser.power, cfg.decluster_q))
            override = getattr(cfg, f"thresholds_u_{m}")
            if override is not None:
                u_base = max(u_base, float(override))
            clusters = {mg: decluster_arrays(ser, u_base, mg) for mg in cfg.mg_set}
            self.s[f"clusters_{m}"] = clusters
            out[m] = {"u_base": u_base, "n_clusters": {str(mg): len(c) for mg, c in clusters.items()}}
        self.report["decluster"] = out

    def threshold(self):
        cfg = self.cfg
        out = {}
        for m in ("x", "y"):
            clusters = self.s[f"clusters_{m}"]
            primary = clusters[cfg.decluster_mg].minimum
            override = getattr(cfg, f"thresholds_u_{m}")
            if override is not None:
                self.s[f"u_{m}"] = float(override)
                out[m] = {"u_opt": float(override), "found": True, "source": "config"}
                continue
            if primary.size < cfg.thresholds_floor:
                raise InsufficientData(f"receiver {m}: only {primary.size} cluster minima", primary.size)
            grid = (np.asarray(cfg.thresholds_grid, dtype=float) if cfg.thresholds_grid else
                    threshold.default_grid(primary, cfg.thresholds_n, cfg.thresholds_q_lo,
                                           cfg.thresholds_q_hi))
            sel = threshold.select_threshold({mg: c.minimum for mg, c in clusters.items()}, grid,
                                             cfg.r2_min, cfg.thresholds_floor)
            self._threshold_plots(m, sel)
            rec = {"found": sel.found, "u_opt": sel.u_opt, "grid_size": int(sel.grid.size),
                   "grid_step": float(abs(sel.grid[0] - sel.grid[1])) if sel.grid.size > 1 else math.nan,
                   "grid_top": float(sel.grid[0]), "grid_bottom": float(sel.grid[-1]),
                   "source": "selected"}
            if sel.found:
                i = sel.index
                rec["u_grid"] = float(sel.grid[i])
                rec["snapped"] = sel.snapped
                rec["r2_at_u_opt"] = {str(mg): {"xi": float(r[i, 1]), "sigma_star": float(r[i, 2]),
                                                "mrl": float(r[i, 3])} for mg, r in sel.r2.items()}
            out[m] = rec
            self.report["threshold"] = out
            if not sel.found:
                raise RuntimeError(f"receiver {m}: {sel.message}")
            self.s[f"u_{m}"] = sel.u_opt
        self.report["threshold"] = out

    def _threshold_plots(self, m, sel):
        mg0 = self.cfg.decluster_mg
        self.plots[f"mrl_{m}"] = (("u", "mean_excess", "count"), sel.mrl[mg0].tolist())
        rows = []
        for mg, pts in sorted(sel.stability.items()):
            rows += [(mg, p.u, p.xi_hat, p.sigma_star, p.n_exc, p.se_xi, p.se_sigma_star, int(p.ok))
                     for p in pts]
        self.plots[f"stability_{m}"] = (("mg", "u", "xi_hat", "sigma_star", "n_exc", "se_xi",
                                         "se_sigma_star", "ok"), rows)
        r2 = sel.r2[mg0]
        self.plots[f"threshold_r2_{m}"] = (("u", "r2_xi", "r2_sigma_star", "r2_mrl"), r2.tolist())

    def _fit_record(self, fit, excess, u):
        p = fit.params(u)
        pp = ugpd.pp_points(excess, p)
        qq = ugpd.qq_points(excess, p)
        pp_max, pp_rms = ugpd.diagonal_deviation(pp)
        rec = {"xi": fit.xi, "sigma_tilde": fit.sigma_tilde, "se_xi": fit.se_xi, "se_sigma": fit.se_sigma,
               "loglik": fit.loglik, "n": fit.n, "method": fit.method, "pp_max_dev": pp_max,
               "pp_rms_dev": pp_rms, "pp_ok": pp_max <= ugpd.PP_MAX_DEVIATION}
        return rec, pp, qq

    def ugpd(self):
        out = {}
        for m in ("x", "y"):
            u = self.s[f"u_{m}"]
            minima = self.s[f"clusters_{m}"][self.cfg.decluster_mg].minimum
            excess = u - minima[minima < u]
            if excess.size < ugpd.MIN_EXCESSES:
                out[m] = {"u": u, "n": int(excess.size)}
                self.report["ugpd"] = out
                raise InsufficientData(f"receiver {m}: {excess.size} cluster minima below u={u:g};"
                                       " too few to fit or to form joint exceedances", excess.size)
            fit = ugpd.fit_gpd_mle(excess)
            rec, pp, qq = self._fit_record(fit, excess, u)
            raw = self.s[f"s{m}"].power
            rec["zeta_raw"] = transforms.estimate_zeta(raw, u)
            rec["u"] = u
            out[m] = rec
            self.plots[f"ppqq_{m}"] = (("p_empirical", "p_model", "q_model", "q_empirical"),
                                       np.column_stack([pp, qq]).tolist())
            self.s[f"zeta_{m}"] = rec["zeta_raw"]
        self.report["ugpd"] = out

    def align(self):
        cfg = self.cfg
        sx, sy = self.s["sx"], self.s["sy"]
        jt = alignment.align_joint_exceedances(
            self.s["clusters_x"][cfg.decluster_mg], self.s["clusters_y"][cfg.decluster_mg],
            self.s["u_x"], self.s["u_y"], cfg.align_M)
        rho_total = alignment.pearson_correlation(sx.power, sy.power)
        div = alignment.spatial_diversity_feasible(rho_total)
        rep = {"n_pairs": len(jt), "M": cfg.align_M, "rho_total": rho_total,
               "diversity": div.decision.value, "diversity_rationale": div.rationale}
        self.report["align"] = rep
        if len(jt) < MIN_PAIRS:
            raise InsufficientData(f"{len(jt)} joint exceedances; need at least {MIN_PAIRS}", len(jt))
        rho_tail = alignment.pearson_correlation(jt.x, jt.y)
        rep["rho_tail"] = rho_tail
        rep["tail_dependence_needed"] = alignment.tail_dependence_needed(rho_tail)
        refit = {}
        for m, vals, u in (("x", jt.x, jt.u_x), ("y", jt.y, jt.u_y)):
            excess = u - vals
            fit = ugpd.fit_gpd_mle(excess)
            refit[m], _, _ = self._fit_record(fit, excess, u)
            self.s[f"refit_{m}"] = fit
        rep["refit"] = refit
        self.s["jt"] = jt

    def frechet(self):
        cfg = self.cfg
        jt = self.s["jt"]
        rep = {"zeta_mode": cfg.zeta_mode}
        for m, vals, u in (("x", jt.x, jt.u_x), ("y", jt.y, jt.u_y)):
            fit = self.s[f"refit_{m}"]
            zeta = 1.0 if cfg.zeta_mode == "joint" else self.s[f"zeta_{m}"]
            p = GpdParams(fit.xi, fit.sigma_tilde, u, zeta)
            ft, n_clamped = transforms.frechet_transform_counted(vals, p, cfg.frechet_cap)
            ks = transforms.frechet_margin_ks(ft, None if cfg.zeta_mode == "joint" else zeta)
            rep[m] = {"zeta": zeta, "ks": ks, "clamped": n_clamped}
            self.s[f"ft_{m}"] = ft
            self.s[f"params_{m}"] = p
            srt = np.sort(ft)
            emp = np.arange(1, srt.size + 1) / srt.size
            self.plots[f"frechet_cdf_{m}"] = (("x_tilde", "empirical", "model"),
                                              np.column_stack([srt, emp, np.exp(-1.0 / srt)]).tolist())
        self.report["frechet"] = rep

    def logistic(self):
        cfg = self.cfg
        fx, fy = self.s["ft_x"], self.s["ft_y"]
        model = logistic.fit_alpha_mle(fx, fy, cfg.likelihood)
        other = "mixed_partial" if cfg.likelihood == "full" else "full"
        alt = logistic.fit_alpha_mle(fx, fy, other)
        rho_g = logistic.log_frechet_correlation(fx, fy)
        rep = {"alpha": model.alpha, "likelihood": model.likelihood, "loglik": model.loglik,
               "boundary": model.boundary, "converged": model.converged,
               f"alpha_{other}": alt.alpha, "rho_log_frechet": rho_g}
        try:
            rep["alpha_from_rho"] = logistic.alpha_from_rho(rho_g).alpha
        except Exception as err:  # negative or complete association
            rep["alpha_from_rho"] = None
            rep["alpha_from_rho_error"] = str(err)
        self.report["logistic"] = rep
        self.s["model"] = model

    def ppp(self):
        cfg = self.cfg
        fx, fy = self.s["ft_x"], self.s["ft_y"]
        n = fx.size
        om, r = transforms.pickands_transform(fx, fy, n)
        rep = {"n": n}
        if n >= validation.MIN_POINTS_R0:
            sel = validation.select_r0(om, r, cfg.r0_critical)
            rep["r0_found"] = sel.found
            self.plots["r0_profile"] = (("candidate", "corr", "retained"), sel.profile.tolist())
        else:
            sel = None
            rep["r0_found"] = False
            rep["r0_note"] = f"fewer than {validation.MIN_POINTS_R0} points; all points retained"
        r0 = sel.r0 if sel is not None and sel.found else -math.inf
        rep["r0"] = r0
        rep["corr_at_r0"] = sel.corr if sel is not None else math.nan
        h_raw = poisson.estimate_angular_measure(om, r, r0)
        h_sym = poisson.symmetrize(h_raw)
        rep.update(n_retained=int(np.count_nonzero(r > r0)), mean_raw=h_raw.mean,
                   mean_symmetrized=h_sym.mean, n_atoms=int(h_sym.omega.size))
        self.plots["r_omega"] = (("r", "omega"), np.column_stack([r, om]).tolist())
        self.plots["angular_measure"] = (("omega", "mass"),
                                         np.column_stack([h_raw.omega, h_raw.mass]).tolist())
        self.report["ppp"] = rep
        self.s.update(om=om, r=r, r0=r0, h_raw=h_raw, h_sym=h_sym)

    def validate(self):
        cfg = self.cfg
        r, r0 = self.s["r"], self.s["r0"]
        rep = {}
        if math.isfinite(r0):
            uni = validation.radial_uniformity(r, r0)
            rep["uniformity"] = {"deviation": uni.deviation, "tolerance": uni.tolerance,
                                 "passed": uni.passed, "k": uni.k}
            v = np.sort(r[r > r0] / r0)
            self.plots["uniformity"] = (("r_over_r0", "empirical"),
                                        np.column_stack([v, np.arange(1, v.size + 1) / v.size]).tolist())
        hl = validation.h_l_density(r, self.s["model"], r.size, r0, cfg.grids_h_n)
        rep["h_l"] = {"mean": hl.mean, "mu": hl.mu, "cv_over_r": hl.cv}
        self.plots["h_l"] = (("omega", "density"), np.column_stack([hl.grid, hl.density]).tolist())
        checks = {}
        for name, mean in (("h_pp_raw", self.s["h_raw"].mean), ("h_pp_symmetrized", self.s["h_sym"].mean),
                           ("h_l", hl.mean)):
            c = validation.mean_constraint_check(mean, cfg.mean_tol)
            checks[name] = {"mean": c.mean, "passed": c.passed, "margin": c.margin}
        rep["mean_checks"] = checks
        self.report["validate"] = rep

    def baseline(self):
        rep = {"margin_scale": "dBm"}
        for m in ("x", "y"):
            rk = baseline.fit_margin_candidates(self.s[f"s{m}"].power)
            rep[f"margins_{m}"] = {
                "best_aic": rk.best_aic, "best_bic": rk.best_bic, "tie": rk.tie,
                "candidates": [{"name": c.name, "params": c.params, "loglik": c.loglik,
                                "aic": c.aic, "bic": c.bic} for c in rk.candidates]}
        bg = baseline.fit_bivariate_gaussian(self.s["sx"].power, self.s["sy"].power)
        rep["gaussian"] = {"mu_x": bg.mu_x, "mu_y": bg.mu_y, "sd_x": bg.sd_x, "sd_y": bg.sd_y,
                           "rho": bg.rho, "degenerate": bg.degenerate}
        self.report["baseline"] = rep
        self.s["bg"] = bg

    def compare(self):
        cfg = self.cfg
        jt = self.s["jt"]
        px, py = self.s["params_x"], self.s["params_y"]
        gx = np.linspace(float(jt.x.min()), jt.u_x, cfg.grids_cdf_n)
        gy = np.linspace(float(jt.y.min()), jt.u_y, cfg.grids_cdf_n)
        emp = synth.brute_force_joint_cdf(jt.x, jt.y, gx, gy)
        ax = frechet_of_depth(jt.u_x - gx, px, cfg.frechet_cap)[:, None]
        by = frechet_of_depth(jt.u_y - gy, py, cfg.frechet_cap)[None, :]
        a0 = frechet_of_depth(0.0, px, cfg.frechet_cap)
        b0 = frechet_of_depth(0.0, py, cfg.frechet_cap)
        alpha = self.s["model"].alpha
        h = self.s["h_sym"]
        surfaces = {}
        for name, cdf in (("logistic", lambda a, b: logistic.g_logistic(a, b, alpha)),
                          ("ppp", lambda a, b: poisson.g_poisson(a, b, h))):
            norm = joint_tail_survival(a0, b0, cdf)
            surfaces[name] = joint_tail_survival(ax, by, cdf) / norm
        bg = self.s["bg"]
        base = baseline.extrapolated_joint_cdf(bg, jt.u_x, jt.u_y)
        gauss = baseline.extrapolated_joint_cdf(bg, gx[:, None], gy[None, :])
        surfaces["gaussian"] = gauss / base if base > 0 else np.full_like(gauss, math.nan)
        rmse = {k: validation.rmse_joint_cdf(v, emp) for k, v in surfaces.items()}
        ratio = {k: rmse["gaussian"] / rmse[k] if rmse[k] > 0 else math.inf
                 for k in ("logistic", "ppp")}
        self.report["compare"] = {
            "grid_n": cfg.grids_cdf_n, "grid_x": [gx[0], gx[-1]], "grid_y": [gy[0], gy[-1]],
            "gaussian_tail_mass": base, "rmse": rmse,
            "gaussian_over": ratio,
            "gaussian_over_best_bgpd": max(ratio.values()),
            "gaussian_over_worst_bgpd": min(ratio.values()),
        }
        xx, yy = np.meshgrid(gx, gy, indexing="ij")
        self.plots["cdf_surfaces"] = (
            ("x_dbm", "y_dbm", "empirical", "logistic", "ppp", "gaussian"),
            np.column_stack([xx.ravel(), yy.ravel(), emp.ravel(), surfaces["logistic"].ravel(),
                             surfaces["ppp"].ravel(), surfaces["gaussian"].ravel()]).tolist())


def run_pipeline(cfg: PipelineConfig, stop_after: str | None = None,
                 series: tuple[PowerSeries, PowerSeries] | None = None) -> PipelineResult:
    """Run the stages in order, up to and including ``stop_after``.

    A failing stage raises :class:`StageError` carrying the stage name and
    the partial report built so far.
    """
    if stop_after is not None and stop_after not in STAGES:
        raise ValueError(f"unknown stage '{stop_after}'")
    run = _Run(cfg, series)
    for stage in STAGES:
        try:
            getattr(run, stage)()
        except StageError:
            raise
        except Exception as err:
            logger.info("stage %s failed: %s", stage, err)
            run.report["failed_stage"] = stage
            raise StageError(stage, err, run.report) from err
        if stage == stop_after:
            break
    return PipelineResult(run.report, run.plots, run.s)


__all__ = ["PipelineResult", "run_pipeline", "load_series", "STAGES", "SCHEMA_VERSION",
           "frechet_of_depth", "joint_tail_survival"]
