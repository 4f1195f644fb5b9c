"""Command-line interface.

Subcommands
-----------
base-geometry    tabulate intrinsic/normal curvature data of a preset
curvature-table  sectional and scalar curvature samples on the bundle
scan-pq          search (p, q) for a certified scalar-curvature bound
complex-check    almost-complex structure diagnostics
verify           closed-form versus finite-difference battery

Every command writes one CSV file (deterministic bytes: fixed float
format, no timestamps, content-hash header) and, unless --no-figures is
given, renders small matplotlib summaries next to it.  Exit status: 0
on success (including an empty scan result), 1 when a verification
battery or certificate fails, 2 for usage, configuration, or input
errors.

Configuration files are INI: a [global] section plus one section per
subcommand, with keys matching the long option names; command-line
flags win over file values.  The [verify] key ``perturb`` accepts
"name-prefix:factor" entries (comma separated) that deliberately skew
the closed-form side of matching battery rows — a negative control
that must drive the exit status to 1.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .bundle_curvature import (_euclid_complete, _g_orthonormal_base,
                               abc_coeffs, curvature_on_lifts, flatness_check,
                               scalar_curvature, sectional)
from .complex_structure import (hermitian_constant_K, hermitian_shape_residual,
                                jtilde_chart_matrix, jtilde_coeff_residuals,
                                kahler_check, lck_check, nijenhuis_p0q0,
                                dphi, fundamental_form)
from .errors import CertificateError, NormalBundleError, NotFound
from .fd_oracle import (ComparisonReport, adjudicate, coordinate_components,
                        fd4, fd_christoffel, fd_convergence_order,
                        fd_exterior_derivative, fd_riemann, lift_components,
                        riemann_first_bianchi, total_coordinates,
                        total_metric_components)
from .manifold_input import builtin_presets, get_preset
from .pq_metric import (NormalPoint, PQParams, TotalTangent,
                        coordinate_connection)
from .sampling import sample_normal_points
from .scalar_estimates import phi_eval, scalar_bound_pipeline
from .submanifold_geometry import base_geometry

FLOAT_FMT = "%.17g"

# fixed evaluation grid of the verification battery
VERIFY_PQ_GRID = ((0.0, 0.0), (1.0, 1.0), (-1.0, 2.0), (2.0, 0.0))
VERIFY_CONN_PRESETS = ("plane_r2_in_r4", "helix_r1_in_r3", "sphere_s2_in_r3",
                       "lagrangian_graph_r2_in_r4")
CURVED_PRESET = "lagrangian_graph_r2_in_r4"


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------
@dataclass
class RunConfig:
    command: str = ""
    out: str = "."
    seed: int = 0
    tol: float = None
    jobs: int = 1
    figures: bool = True
    preset: str = None
    p: float = 1.0
    q: float = 1.0
    count: int = None
    bound: float = 0.0
    cmax: float = None
    variant: str = "corrected"
    perturb: dict = field(default_factory=dict)


_COMMAND_COUNTS = {"base-geometry": 16, "curvature-table": 12, "scan-pq": 32,
                   "complex-check": 8, "verify": 4}

_FLOAT_KEYS = ("tol", "p", "q", "bound", "cmax")
_INT_KEYS = ("seed", "jobs", "count")
_BOOL_KEYS = ("figures",)


def _parse_perturb(text):
    out = {}
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            name, factor = chunk.rsplit(":", 1)
            out[name.strip()] = float(factor)
        except ValueError:
            raise ValueError(f"bad perturb entry {chunk!r}; "
                             "expected name-prefix:factor") from None
    return out


def _apply_section(cfg, section):
    for key in section:
        attr = key.replace("-", "_")
        if attr == "no_figures":
            cfg.figures = not section.getboolean(key)
        elif attr == "perturb":
            cfg.perturb = _parse_perturb(section[key])
        elif attr in _BOOL_KEYS:
            setattr(cfg, attr, section.getboolean(key))
        elif attr in _FLOAT_KEYS:
            setattr(cfg, attr, float(section[key]))
        elif attr in _INT_KEYS:
            setattr(cfg, attr, int(section[key]))
        elif hasattr(cfg, attr) and attr != "command":
            setattr(cfg, attr, section[key])
        else:
            raise ValueError(f"unknown config key {key!r}")


def resolve_config(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.count = _COMMAND_COUNTS[args.command]
    if getattr(args, "config", None):
        parser = configparser.ConfigParser()
        read = parser.read(args.config)
        if not read:
            raise ValueError(f"cannot read config file {args.config!r}")
        if parser.has_section("global"):
            _apply_section(cfg, parser["global"])
        if parser.has_section(args.command):
            _apply_section(cfg, parser[args.command])
    for name in ("out", "seed", "tol", "jobs", "preset", "p", "q", "count",
                 "bound", "cmax", "variant"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "no_figures", None):
        cfg.figures = False
    if getattr(args, "perturb", None) is not None:
        cfg.perturb = _parse_perturb(args.perturb)
    if cfg.jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {cfg.jobs}")
    return cfg


# fields that steer where/how results are written, not what is computed
_NON_SEMANTIC_FIELDS = frozenset({"out", "figures", "jobs"})


def config_digest(cfg: RunConfig) -> str:
    parts = []
    for f in sorted(fields(cfg), key=lambda f: f.name):
        if f.name in _NON_SEMANTIC_FIELDS:
            continue
        value = getattr(cfg, f.name)
        if isinstance(value, dict):
            value = ",".join(f"{k}:{v!r}" for k, v in sorted(value.items()))
        parts.append(f"{f.name}={value!r}")
    return hashlib.sha256("\n".join(parts).encode()).hexdigest()


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------
def _fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_csv(cfg: RunConfig, header, rows, comments=()):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, f"{cfg.command}.csv")
    with open(path, "w", newline="") as fh:
        fh.write(f"# normalbundle {cfg.command}\n")
        fh.write(f"# config_sha256={config_digest(cfg)}\n")
        fh.write(f"# seed={cfg.seed}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _figure_path(cfg, name):
    return os.path.join(cfg.out, f"{cfg.command}_{name}.png")


def _save_figure(fig, path):
    fig.savefig(path, dpi=110)
    import matplotlib.pyplot as plt
    plt.close(fig)


def _new_figure(*args, **kwargs):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt.subplots(*args, **kwargs)


def _sample(cfg, sub, count=None, t_scale=0.75):
    return sample_normal_points(sub, count or cfg.count, t_scale=t_scale,
                                skip=20 + 17 * cfg.seed)


# --------------------------------------------------------------------------
# base-geometry
# --------------------------------------------------------------------------
def cmd_base_geometry(cfg: RunConfig) -> int:
    sub = get_preset(cfg.preset)
    U, _, descriptor = _sample(cfg, sub)
    d = sub.dim
    header = (["index"] + [f"u{i+1}" for i in range(d)]
              + ["base_scalar", "normal_conn_max", "normal_curv_max",
                 "adjoint_max", "metric_cond"])
    rows = []
    scal, ncmax = [], []
    for k, u in enumerate(U):
        geom = base_geometry(sub, u)
        nc = float(np.max(np.abs(geom.normal_curv)))
        rows.append([k, *u, geom.scalar,
                     float(np.max(np.abs(geom.A))), nc,
                     float(np.max(np.abs(geom.hat_tensor))),
                     float(np.linalg.cond(geom.g))])
        scal.append(geom.scalar)
        ncmax.append(nc)
    path = write_csv(cfg, header, rows, [f"preset={cfg.preset}",
                                         f"samples={descriptor}"])
    if cfg.figures:
        fig, axes = _new_figure(1, 2, figsize=(9, 4))
        if d == 1:
            order = np.argsort(U[:, 0])
            axes[0].plot(U[order, 0], np.array(scal)[order], "o-")
            axes[1].plot(U[order, 0], np.array(ncmax)[order], "o-")
            axes[0].set_xlabel("u1")
            axes[1].set_xlabel("u1")
        else:
            sc = axes[0].scatter(U[:, 0], U[:, 1], c=scal, cmap="viridis")
            fig.colorbar(sc, ax=axes[0])
            sc2 = axes[1].scatter(U[:, 0], U[:, 1], c=ncmax, cmap="magma")
            fig.colorbar(sc2, ax=axes[1])
            for ax in axes:
                ax.set_xlabel("u1")
                ax.set_ylabel("u2")
        axes[0].set_title("base scalar curvature")
        axes[1].set_title("max |normal curvature|")
        fig.suptitle(cfg.preset)
        fig.tight_layout()
        _save_figure(fig, _figure_path(cfg, "summary"))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


# --------------------------------------------------------------------------
# curvature-table
# --------------------------------------------------------------------------
def cmd_curvature_table(cfg: RunConfig) -> int:
    sub = get_preset(cfg.preset)
    pq = PQParams(cfg.p, cfg.q)
    U, T, descriptor = _sample(cfg, sub)
    T = T.copy()
    T[0] = 0.0               # row 0 sits on the zero section for reference
    d, dp = sub.dim, sub.codim
    header = ["index", "theta_norm"]
    if d >= 2:
        header.append("sec_horizontal")
    header.append("sec_mixed")
    if dp >= 2:
        header.append("sec_vertical")
    header.append("scalar")
    rows = []
    series = {name: [] for name in header[2:]}
    tnorms = []
    for k in range(len(U)):
        point = NormalPoint(sub, U[k], T[k])
        geom = point.geometry
        t = point.t
        Xs = _g_orthonormal_base(geom)
        fiber = _euclid_complete(t, dp) if np.linalg.norm(t) > 1e-14 \
            else [np.eye(dp)[a] for a in range(dp)]
        row = [k, float(np.linalg.norm(t))]
        tnorms.append(row[1])
        if d >= 2:
            v = sectional(pq, point, "HH", Xs[0], Xs[1],
                          variant=cfg.variant).value
            row.append(v)
            series["sec_horizontal"].append(v)
        v = sectional(pq, point, "HV", Xs[0], fiber[-1],
                      variant=cfg.variant).value
        row.append(v)
        series["sec_mixed"].append(v)
        if dp >= 2:
            v = sectional(pq, point, "VV", fiber[0], fiber[1],
                          variant=cfg.variant).value
            row.append(v)
            series["sec_vertical"].append(v)
        v = scalar_curvature(pq, point)
        row.append(v)
        series["scalar"].append(v)
        rows.append(row)
    path = write_csv(cfg, header, rows,
                     [f"preset={cfg.preset}", f"p={_fmt(cfg.p)}",
                      f"q={_fmt(cfg.q)}", f"variant={cfg.variant}",
                      f"samples={descriptor}"])
    if cfg.figures:
        fig, ax = _new_figure(figsize=(7, 4.5))
        for name, vals in series.items():
            ax.plot(tnorms, vals, "o", label=name, alpha=0.75)
        ax.set_xlabel("|theta|")
        ax.set_ylabel("curvature")
        ax.legend()
        ax.set_title(f"{cfg.preset}  p={cfg.p:g} q={cfg.q:g}")
        fig.tight_layout()
        _save_figure(fig, _figure_path(cfg, "sectional"))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


# --------------------------------------------------------------------------
# scan-pq
# --------------------------------------------------------------------------
def cmd_scan_pq(cfg: RunConfig) -> int:
    sub = get_preset(cfg.preset)
    header = ["p", "q", "C_measured", "C_used", "D", "c1", "c2",
              "alpha0", "alpha1", "alpha2", "alpha3",
              "grid_min", "refined_min", "refined_argmin",
              "tail_sign", "tail_degree", "min_scalar_observed",
              "n_points_checked"]
    comments = [f"preset={cfg.preset}", f"bound={_fmt(cfg.bound)}"]
    try:
        result = scalar_bound_pipeline(sub, cfg.bound, count=cfg.count,
                                       C=cfg.cmax)
    except NotFound as exc:
        write_csv(cfg, header, [], comments + [f"result=none ({exc})"])
        print("no parameter pair certified; wrote empty table")
        return 0
    spec = result.phi
    cert = result.certificate
    a0, a1, a2, a3 = spec.alpha()
    row = [spec.p, spec.q, result.C_measured, result.C_used, result.D,
           spec.c1, spec.c2, a0, a1, a2, a3, cert.grid_min, cert.refined_min,
           cert.refined_argmin, cert.tail_sign, cert.tail_degree,
           result.min_scalar_observed, result.n_points_checked]
    path = write_csv(cfg, header, [row], comments)
    if cfg.figures:
        ts = np.concatenate([[0.0], np.logspace(-6, 6, 400)])
        fig, ax = _new_figure(figsize=(7, 4.5))
        ax.plot(ts, phi_eval(spec, ts), label="profile")
        ax.plot([cert.refined_argmin], [cert.refined_min], "rv",
                label="refined min")
        ax.axhline(0.0, color="k", lw=0.8)
        ax.set_xscale("symlog", linthresh=1e-6)
        ax.set_xlabel("|theta|^2")
        ax.set_ylabel("lower-bound profile")
        ax.set_title(f"{cfg.preset}: p={spec.p:g} q={spec.q:g} "
                     f"(bound {cfg.bound:g})")
        ax.legend()
        fig.tight_layout()
        _save_figure(fig, _figure_path(cfg, "profile"))
    print(f"wrote {path}: p={spec.p:g} q={spec.q:g} "
          f"(min scalar {result.min_scalar_observed:.6g} > {cfg.bound:g})")
    return 0


# --------------------------------------------------------------------------
# complex-check
# --------------------------------------------------------------------------
def cmd_complex_check(cfg: RunConfig) -> int:
    sub = get_preset(cfg.preset)
    pq = PQParams(cfg.p, cfg.q)
    U, T, descriptor = _sample(cfg, sub)
    m = sub.dim + sub.codim
    rows = []

    def add(name, value, tol=None, note=""):
        ok = True if tol is None else value <= tol
        rows.append([name, value, "" if tol is None else tol, ok, note])
        return ok

    coeff_res = max(jtilde_coeff_residuals(pq, T[k]) for k in range(len(T)))
    j2 = inv = 0.0
    for k in range(len(U)):
        x = total_coordinates(U[k], T[k])
        G = total_metric_components(pq, sub, x)
        Jt = jtilde_chart_matrix(pq, sub, x)
        j2 = max(j2, float(np.max(np.abs(Jt @ Jt + np.eye(m)))))
        inv = max(inv, float(np.max(np.abs(Jt.T @ G @ Jt - G))))
    lck = lck_check(pq, sub, samples=(U, T))
    nmax = 0.0
    sasaki = PQParams(0.0, 0.0)
    for k in range(len(U)):
        point = NormalPoint(sub, U[k], T[k])
        lifts = [lift_components(point.geometry, T[k], np.eye(m)[i])
                 for i in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                nmax = max(nmax, nijenhuis_p0q0(point, lifts[i],
                                                lifts[j]).max_abs())
    kr = kahler_check(pq, sub, samples=U)
    shape = hermitian_shape_residual(sub, samples=(U, T))

    ok = True
    ok &= add("jtilde_coefficient_residual", coeff_res, 1e-12)
    ok &= add("jtilde_squared_residual", j2, 1e-11)
    ok &= add("metric_invariance_residual", inv, 1e-11)
    ok &= add("conformal_identity_residual", lck.max_abs_residual,
              lck.tolerance)
    add("nijenhuis_magnitude_sasaki", nmax, None,
        "closed form at p=q=0; zero only for flat normal bundles")
    add("max_normal_curvature", kr.max_normal_curvature, None,
        f"kahler={1 if kr.kahler else 0} (needs p=q=0 and flatness)")
    add("hermitian_structure_constant", hermitian_constant_K(pq), None,
        f"p={pq.p:g} q={pq.q:g}")
    add("hermitian_shape_phi0", shape.phi0, None, "least-squares fit")
    add("hermitian_shape_residual", shape.max_residual, None,
        "informational")
    path = write_csv(cfg, ["name", "value", "tolerance", "passed", "note"],
                     rows, [f"preset={cfg.preset}", f"p={_fmt(cfg.p)}",
                            f"q={_fmt(cfg.q)}", f"samples={descriptor}"])
    if cfg.figures:
        names = [r[0] for r in rows]
        vals = [max(abs(r[1]), 1e-18) for r in rows]
        fig, ax = _new_figure(figsize=(8, 4.5))
        ax.barh(range(len(names)), vals, log=True, color="steelblue")
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=8)
        ax.invert_yaxis()
        ax.set_xlabel("magnitude")
        ax.set_title(f"{cfg.preset}  p={cfg.p:g} q={cfg.q:g}")
        fig.tight_layout()
        _save_figure(fig, _figure_path(cfg, "residuals"))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0 if ok else 1


# --------------------------------------------------------------------------
# verify battery
# --------------------------------------------------------------------------
def _perturb_factor(cfg, name):
    for prefix, factor in sorted(cfg.perturb.items()):
        if name.startswith(prefix):
            return factor
    return 1.0


def _oracle_tol(cfg, default):
    return cfg.tol if cfg.tol is not None else default


def _closed_connection_coords(pq, point):
    H, V = coordinate_connection(pq, point)
    geom, t = point.geometry, point.t
    m = H.shape[0]
    out = np.empty((m, m, m))
    for b in range(m):
        for c in range(m):
            out[:, b, c] = coordinate_components(
                geom, t, TotalTangent(H[b, c], V[b, c]))
    return out


def _closed_riemann_coords(pq, point, variant):
    geom, t = point.geometry, point.t
    m = geom.dim + geom.codim
    lifts = [lift_components(geom, t, np.eye(m)[i]) for i in range(m)]
    out = np.empty((m, m, m, m))
    for c in range(m):
        for dslot in range(m):
            for b in range(m):
                val = curvature_on_lifts(pq, point, lifts[c], lifts[dslot],
                                         lifts[b], variant)
                out[:, b, c, dslot] = coordinate_components(geom, t, val)
    return out


class _VerifyContext:
    """Shared samples and memoized oracle tensors for the battery."""

    def __init__(self, cfg):
        self.cfg = cfg
        self._subs = {}
        self._samples = {}
        self._riemann = {}

    def sub(self, preset):
        if preset not in self._subs:
            self._subs[preset] = get_preset(preset)
        return self._subs[preset]

    def samples(self, preset, count=None):
        key = (preset, count or self.cfg.count)
        if key not in self._samples:
            U, T, _ = _sample(self.cfg, self.sub(preset), count=key[1])
            self._samples[key] = (U, T)
        return self._samples[key]

    def oracle_riemann(self, preset, p, q, k, count=None):
        key = (preset, p, q, k, count or self.cfg.count)
        if key not in self._riemann:
            U, T = self.samples(preset, count)
            x = total_coordinates(U[k], T[k])
            self._riemann[key] = fd_riemann(PQParams(p, q), self.sub(preset),
                                            x)
        return self._riemann[key]


def _connection_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-5)
    rows = []
    for preset in VERIFY_CONN_PRESETS:
        sub = ctx.sub(preset)
        U, T = ctx.samples(preset)
        for (p, q) in VERIFY_PQ_GRID:
            pq = PQParams(p, q)
            name = f"connection/{preset}/p={p:g},q={q:g}"
            factor = _perturb_factor(cfg, name)
            worst, witness = 0.0, ""
            for k in range(len(U)):
                point = NormalPoint(sub, U[k], T[k])
                closed = factor * _closed_connection_coords(pq, point)
                ref = fd_christoffel(pq, sub,
                                     total_coordinates(U[k], T[k]))
                dev = float(np.max(np.abs(closed - ref)))
                if dev > worst:
                    worst, witness = dev, f"sample[{k}]"
            rows.append(ComparisonReport(name, worst, tol, worst <= tol,
                                         len(U), witness))
    return rows


def _curvature_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-4)
    rows = []
    n_samp = min(cfg.count, 2)
    for preset, (p, q) in (("sphere_s2_in_r3", (1.0, 1.0)),
                           (CURVED_PRESET, (1.0, 1.0))):
        sub = ctx.sub(preset)
        U, T = ctx.samples(preset)
        pq = PQParams(p, q)
        name = f"curvature/{preset}/p={p:g},q={q:g}"
        factor = _perturb_factor(cfg, name)
        worst, witness = 0.0, ""
        for k in range(n_samp):
            point = NormalPoint(sub, U[k], T[k])
            closed = factor * _closed_riemann_coords(pq, point, "corrected")
            ref = ctx.oracle_riemann(preset, p, q, k)
            dev = float(np.max(np.abs(closed - ref)))
            if dev > worst:
                worst, witness = dev, f"sample[{k}]"
        rows.append(ComparisonReport(name, worst, tol, worst <= tol, n_samp,
                                     witness))
    return rows


def _case_adjudication_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-4)
    sub = ctx.sub(CURVED_PRESET)
    U, T = ctx.samples(CURVED_PRESET)
    p, q = 2.0, 3.0
    pq = PQParams(p, q)
    n_samp = min(cfg.count, 3)
    rows = []
    for quantity, case in (("curvature-hhh-derivative-term", "HHH"),
                           ("curvature-hhv-prefactor", "HHV"),
                           ("curvature-vvh-products", "VVH")):
        factor = _perturb_factor(cfg, quantity)

        def closed_fn(variant, k, _case=case, _f=factor):
            point = NormalPoint(sub, U[k], T[k])
            spec = "corrected" if variant == "corrected" \
                else {_case: "uncorrected"}
            return _f * _closed_riemann_coords(pq, point, spec)

        def oracle_fn(k):
            return ctx.oracle_riemann(CURVED_PRESET, p, q, k)

        res = adjudicate(quantity, list(range(n_samp)), closed_fn, oracle_fn,
                         tol)
        rows.extend(res.reports())
    return rows


def _sectional_adjudication_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-4)
    sub = ctx.sub(CURVED_PRESET)
    U, T = ctx.samples(CURVED_PRESET)
    p, q = -1.0, 2.0
    pq = PQParams(p, q)
    n_samp = min(cfg.count, 3)
    eta = np.array([0.7, 0.3])
    eta = eta / np.linalg.norm(eta)
    factor = _perturb_factor(cfg, "sectional-hv-denominator")

    def closed_fn(variant, k):
        point = NormalPoint(sub, U[k], T[k])
        return factor * np.array([sectional(pq, point, "HV",
                                            np.eye(sub.dim)[0], eta,
                                            variant=variant).value])

    def oracle_fn(k):
        point = NormalPoint(sub, U[k], T[k])
        geom, t = point.geometry, point.t
        x = total_coordinates(U[k], T[k])
        G = total_metric_components(pq, sub, x)
        R = ctx.oracle_riemann(CURVED_PRESET, p, q, k)
        X = np.eye(sub.dim)[0]
        Ac = coordinate_components(geom, t, TotalTangent(
            X, np.zeros(sub.codim)))
        Bc = coordinate_components(geom, t, TotalTangent(
            np.zeros(sub.dim), eta))
        RA = np.einsum("abcd,b,c,d->a", R, Bc, Ac, Bc)
        num = RA @ G @ Ac
        den = (Ac @ G @ Ac) * (Bc @ G @ Bc) - (Ac @ G @ Bc) ** 2
        return np.array([num / den])

    res = adjudicate("sectional-hv-denominator", list(range(n_samp)),
                     closed_fn, oracle_fn, tol)
    return res.reports()


def _complex_adjudication_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-4)
    sub = ctx.sub(CURVED_PRESET)
    U, T = ctx.samples(CURVED_PRESET)
    p, q = 2.0, 3.0
    pq = PQParams(p, q)
    m = sub.dim + sub.codim
    n_samp = min(cfg.count, 3)
    rows = []

    phi_factor = _perturb_factor(cfg, "fundamental-form-mixed-sign")

    def phi_closed(variant, k):
        point = NormalPoint(sub, U[k], T[k])
        lifts = [lift_components(point.geometry, T[k], np.eye(m)[i])
                 for i in range(m)]
        return phi_factor * np.array(
            [fundamental_form(pq, point, lifts[i], lifts[j], variant)
             for i in range(m) for j in range(i + 1, m)])

    def phi_oracle(k):
        x = total_coordinates(U[k], T[k])
        Phi = total_metric_components(pq, sub, x) @ jtilde_chart_matrix(
            pq, sub, x)
        return np.array([Phi[i, j]
                         for i in range(m) for j in range(i + 1, m)])

    rows.extend(adjudicate("fundamental-form-mixed-sign",
                           list(range(n_samp)), phi_closed, phi_oracle,
                           tol).reports())

    dphi_factor = _perturb_factor(cfg, "dphi-prefactor")

    def dphi_closed(variant, k):
        point = NormalPoint(sub, U[k], T[k])
        lifts = [lift_components(point.geometry, T[k], np.eye(m)[i])
                 for i in range(m)]
        return dphi_factor * np.array(
            [dphi(pq, point, lifts[i], lifts[j], lifts[l], variant)
             for i in range(m) for j in range(i + 1, m)
             for l in range(j + 1, m)])

    def dphi_oracle(k):
        x = total_coordinates(U[k], T[k])

        def phi_chart(y):
            return total_metric_components(pq, sub, y) \
                @ jtilde_chart_matrix(pq, sub, y)

        dW = fd_exterior_derivative(phi_chart, x)
        return np.array([dW[i, j, l]
                         for i in range(m) for j in range(i + 1, m)
                         for l in range(j + 1, m)])

    rows.extend(adjudicate("dphi-prefactor", list(range(n_samp)),
                           dphi_closed, dphi_oracle, tol).reports())
    return rows


def _structure_rows(ctx):
    cfg = ctx.cfg
    rows = []
    for preset, (p, q) in (("lagrangian_rk_in_r2k", (1.0, 1.0)),
                           (CURVED_PRESET, (2.0, 3.0))):
        sub = ctx.sub(preset)
        U, T = ctx.samples(preset)
        pq = PQParams(p, q)
        m = sub.dim + sub.codim
        for kind in ("jtilde-squared", "jtilde-metric-invariance"):
            name = f"{kind}/{preset}/p={p:g},q={q:g}"
            factor = _perturb_factor(cfg, name)
            worst, witness = 0.0, ""
            for k in range(len(U)):
                x = total_coordinates(U[k], T[k])
                Jt = factor * jtilde_chart_matrix(pq, sub, x)
                if kind == "jtilde-squared":
                    dev = float(np.max(np.abs(Jt @ Jt + np.eye(m))))
                else:
                    G = total_metric_components(pq, sub, x)
                    dev = float(np.max(np.abs(Jt.T @ G @ Jt - G)))
                if dev > worst:
                    worst, witness = dev, f"sample[{k}]"
            rows.append(ComparisonReport(name, worst, 1e-11, worst <= 1e-11,
                                         len(U), witness))
        name = f"jtilde-coefficient-relations/p={p:g},q={q:g}"
        res = max(jtilde_coeff_residuals(pq, T[k]) for k in range(len(T)))
        rows.append(ComparisonReport(name, res, 1e-12, res <= 1e-12, len(T)))
    # conformal identity, with the perturbation hook on the 1-form scale
    pq = PQParams(1.0, 1.0)
    name = f"conformal-identity/{CURVED_PRESET}/p=1,q=1"
    factor = _perturb_factor(cfg, name)
    rep = lck_check(pq, ctx.sub(CURVED_PRESET),
                    samples=ctx.samples(CURVED_PRESET), alpha_scale=factor)
    rows.append(ComparisonReport(name, rep.max_abs_residual, rep.tolerance,
                                 rep.passed, rep.n_samples,
                                 note="" if factor == 1.0
                                 else f"alpha_scale={factor:g}"))
    # Nijenhuis closed form against FD brackets of the structure matrix
    sub = ctx.sub(CURVED_PRESET)
    U, T = ctx.samples(CURVED_PRESET)
    sasaki = PQParams(0.0, 0.0)
    m = sub.dim + sub.codim
    name = "nijenhuis-closed-vs-fd/" + CURVED_PRESET
    factor = _perturb_factor(cfg, name)
    worst, witness = 0.0, ""
    for k in range(min(len(U), 2)):
        x = total_coordinates(U[k], T[k])
        point = NormalPoint(sub, U[k], T[k])
        geom = point.geometry
        Jcols = jtilde_chart_matrix(sasaki, sub, x)
        dJ = [fd4(lambda y: jtilde_chart_matrix(sasaki, sub, y), x, kk, 1e-3)
              for kk in range(m)]
        for a in range(m):
            for b in range(a + 1, m):
                Ua, Ub = Jcols[:, a], Jcols[:, b]
                br = sum(Ua[e] * dJ[e][:, b] - Ub[e] * dJ[e][:, a]
                         for e in range(m))
                fd_val = br - Jcols @ dJ[a][:, b] + Jcols @ dJ[b][:, a]
                closed = factor * coordinate_components(
                    geom, T[k], nijenhuis_p0q0(
                        point, lift_components(geom, T[k], np.eye(m)[a]),
                        lift_components(geom, T[k], np.eye(m)[b])))
                dev = float(np.max(np.abs(closed - fd_val)))
                if dev > worst:
                    worst, witness = dev, f"sample[{k}]/({a},{b})"
    rows.append(ComparisonReport(name, worst, 1e-9, worst <= 1e-9,
                                 min(len(U), 2), witness))
    return rows


def _scalar_rows(ctx):
    cfg = ctx.cfg
    tol = _oracle_tol(cfg, 1e-4)
    rows = []
    n_samp = min(cfg.count, 2)
    for preset, (p, q) in ((CURVED_PRESET, (1.0, 1.0)),
                           ("sphere_s2_in_r3", (2.0, 0.0))):
        sub = ctx.sub(preset)
        U, T = ctx.samples(preset)
        pq = PQParams(p, q)
        m = sub.dim + sub.codim
        name = f"scalar/{preset}/p={p:g},q={q:g}"
        factor = _perturb_factor(cfg, name)
        worst, witness = 0.0, ""
        for k in range(n_samp):
            point = NormalPoint(sub, U[k], T[k])
            x = total_coordinates(U[k], T[k])
            G = total_metric_components(pq, sub, x)
            R = ctx.oracle_riemann(preset, p, q, k)
            ric = np.einsum("adab->bd", R)
            S_fd = float(np.einsum("bd,bd->", np.linalg.inv(G), ric))
            dev = abs(factor * scalar_curvature(pq, point) - S_fd)
            if dev > worst:
                worst, witness = dev, f"sample[{k}]"
        rows.append(ComparisonReport(name, worst, tol, worst <= tol, n_samp,
                                     witness))
    # closed-only consistency: scalar equals twice the sectional sum
    from .bundle_curvature import orthonormal_total_basis
    for preset in VERIFY_CONN_PRESETS:
        sub = ctx.sub(preset)
        U, T = ctx.samples(preset)
        pq = PQParams(1.0, 1.0)
        name = f"scalar-sectional-sum/{preset}/p=1,q=1"
        factor = _perturb_factor(cfg, name)
        worst = 0.0
        for k in range(len(U)):
            point = NormalPoint(sub, U[k], T[k])
            basis = orthonormal_total_basis(pq, point)
            total = 0.0
            for i in range(len(basis)):
                for j in range(len(basis)):
                    if i == j:
                        continue
                    val = curvature_on_lifts(pq, point, basis[i], basis[j],
                                             basis[j])
                    total += (val.horizontal @ point.geometry.g
                              @ basis[i].horizontal
                              + _vertical_inner(pq, point, val, basis[i]))
            dev = abs(factor * scalar_curvature(pq, point) - total)
            worst = max(worst, dev)
        rows.append(ComparisonReport(name, worst, 1e-8, worst <= 1e-8,
                                     len(U)))
    return rows


def _vertical_inner(pq, point, A, B):
    from .pq_metric import omega
    t = point.t
    wp = omega(t) ** pq.p
    return wp * (A.vertical @ B.vertical
                 + pq.q * (A.vertical @ t) * (B.vertical @ t))


def _flatness_rows(ctx):
    cfg = ctx.cfg
    rows = []
    plane = ctx.sub("plane_r2_in_r4")
    U, T = ctx.samples("plane_r2_in_r4")
    sasaki = PQParams(0.0, 0.0)
    name = "flatness-closed/plane_r2_in_r4/p=0,q=0"
    factor = _perturb_factor(cfg, name)
    rep = flatness_check(sasaki, plane, samples=(U, T), tol=1e-9)
    dev = factor * rep.max_abs if factor != 1.0 else rep.max_abs
    rows.append(ComparisonReport(name, dev, 1e-9, dev <= 1e-9,
                                 rep.n_samples))
    name = "flatness-oracle/plane_r2_in_r4/p=0,q=0"
    worst = 0.0
    for k in range(min(len(U), 2)):
        R = ctx.oracle_riemann("plane_r2_in_r4", 0.0, 0.0, k)
        worst = max(worst, float(np.max(np.abs(R))))
    rows.append(ComparisonReport(name, worst, 1e-6, worst <= 1e-6,
                                 min(len(U), 2)))
    curve = ctx.sub("curve_in_r2")
    Uc, Tc = ctx.samples("curve_in_r2")
    for (p, q) in ((0.0, 0.0), (7.0, 2.0)):
        name = f"flatness-closed/curve_in_r2/p={p:g},q={q:g}"
        rep = flatness_check(PQParams(p, q), curve, samples=(Uc, Tc),
                             tol=1e-9)
        rows.append(ComparisonReport(name, rep.max_abs, 1e-9,
                                     rep.max_abs <= 1e-9, rep.n_samples))
    return rows


def _oracle_quality_rows(ctx):
    cfg = ctx.cfg
    sub = ctx.sub(CURVED_PRESET)
    U, T = ctx.samples(CURVED_PRESET)
    pq = PQParams(1.0, 1.0)
    rows = []
    R = ctx.oracle_riemann(CURVED_PRESET, 1.0, 1.0, 0)
    bianchi = riemann_first_bianchi(R)
    rows.append(ComparisonReport("oracle-first-bianchi/" + CURVED_PRESET,
                                 bianchi, 1e-4, bianchi <= 1e-4, 1))
    x = total_coordinates(U[0], T[0])

    def gamma_at(step):
        return fd_christoffel(pq, sub, x, step=step)

    order = fd_convergence_order(gamma_at, 1e-2)
    dev = max(0.0, 1.9 - order)
    rows.append(ComparisonReport("oracle-convergence-order", dev, 0.0,
                                 dev <= 0.0, 1,
                                 note=f"order={order:.2f}"))
    return rows


_BATTERY = (
    _connection_rows,
    _curvature_rows,
    _case_adjudication_rows,
    _sectional_adjudication_rows,
    _complex_adjudication_rows,
    _structure_rows,
    _scalar_rows,
    _flatness_rows,
    _oracle_quality_rows,
)


def cmd_verify(cfg: RunConfig) -> int:
    ctx = _VerifyContext(cfg)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            chunks = list(pool.map(lambda fn: fn(ctx), _BATTERY))
    else:
        chunks = [fn(ctx) for fn in _BATTERY]
    reports = [rep for chunk in chunks for rep in chunk]
    comments = []
    if cfg.perturb:
        comments.append("perturb=" + ",".join(
            f"{k}:{v:g}" for k, v in sorted(cfg.perturb.items())))
    path = write_csv(cfg, list(ComparisonReport.CSV_HEADER),
                     [rep.csv_row() for rep in reports], comments)
    failures = []
    for rep in reports:
        if rep.note == "rejected":
            continue
        if rep.note.startswith("inconclusive") or not rep.passed:
            failures.append(rep)
    if cfg.figures:
        fig, ax = _new_figure(figsize=(8, 0.22 * len(reports) + 1.5))
        vals = [max(r.max_abs_deviation, 1e-18) for r in reports]
        colors = ["firebrick" if (not r.passed and r.note != "rejected")
                  else ("darkorange" if r.note == "rejected"
                        else "seagreen") for r in reports]
        ax.barh(range(len(reports)), vals, color=colors, log=True)
        ax.set_yticks(range(len(reports)))
        ax.set_yticklabels([f"{r.quantity}"
                            + (f" [{r.variant}]" if r.variant else "")
                            for r in reports], fontsize=6)
        ax.invert_yaxis()
        ax.set_xlabel("max deviation")
        ax.set_title("verification battery")
        fig.tight_layout()
        _save_figure(fig, _figure_path(cfg, "deviations"))
    n_ok = sum(1 for r in reports if r.passed)
    print(f"wrote {path}: {len(reports)} rows, {n_ok} passed, "
          f"{len(failures)} gating failures")
    for rep in failures:
        print(f"  FAIL {rep.quantity} [{rep.variant}] "
              f"dev={rep.max_abs_deviation:.3e} tol={rep.tolerance:.1e} "
              f"{rep.note}")
    return 1 if failures else 0


# --------------------------------------------------------------------------
# argument parsing and dispatch
# --------------------------------------------------------------------------
def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--out", help="output directory (default: .)")
    common.add_argument("--seed", type=int, help="sample-sequence offset")
    common.add_argument("--tol", type=float,
                        help="override oracle comparison tolerance")
    common.add_argument("--jobs", type=int,
                        help="worker threads for the battery")
    common.add_argument("--no-figures", action="store_const", const=True,
                        help="skip matplotlib output")

    parser = argparse.ArgumentParser(
        prog="normalbundle",
        description="curvature of normal bundles under two-parameter "
                    "fiber metrics")
    subs = parser.add_subparsers(dest="command", required=True)

    def preset_arg(sp):
        sp.add_argument("--preset", choices=sorted(builtin_presets()),
                        help="builtin geometry")
        sp.add_argument("--count", type=int, help="number of sample points")

    sp = subs.add_parser("base-geometry", parents=[common],
                         help="tabulate base curvature data")
    preset_arg(sp)

    sp = subs.add_parser("curvature-table", parents=[common],
                         help="sectional/scalar curvature samples")
    preset_arg(sp)
    sp.add_argument("--p", type=float, help="first metric parameter")
    sp.add_argument("--q", type=float, help="second metric parameter (>= 0)")
    sp.add_argument("--variant", choices=("corrected", "uncorrected"),
                    help="closed-form variant for suspect displays")

    sp = subs.add_parser("scan-pq", parents=[common],
                         help="search (p, q) for scalar curvature > bound")
    preset_arg(sp)
    sp.add_argument("--bound", type=float, help="target lower bound D")
    sp.add_argument("--cmax", type=float,
                    help="use this curvature magnitude instead of measuring")

    sp = subs.add_parser("complex-check", parents=[common],
                         help="almost-complex structure diagnostics")
    preset_arg(sp)
    sp.add_argument("--p", type=float, help="first metric parameter")
    sp.add_argument("--q", type=float, help="second metric parameter (>= 0)")

    sp = subs.add_parser("verify", parents=[common],
                         help="closed-form vs finite-difference battery")
    sp.add_argument("--count", type=int, help="samples per battery row")
    sp.add_argument("--perturb",
                    help="name-prefix:factor list for negative controls")
    return parser


_COMMANDS = {
    "base-geometry": cmd_base_geometry,
    "curvature-table": cmd_curvature_table,
    "scan-pq": cmd_scan_pq,
    "complex-check": cmd_complex_check,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.command != "verify" and not cfg.preset:
        print("error: --preset is required (flag or config file)",
              file=sys.stderr)
        return 2
    try:
        return _COMMANDS[cfg.command](cfg)
    except CertificateError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except NormalBundleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
