"""Config-driven command line for reconstructions and predictions.

Exit codes: 0 success, 1 validation failure, 2 check failure (--check
mode), 3 I/O error. Outputs are CSV (17 significant digits, '# columns:'
first line) and 16-bit PGM; every file carries the resolved config in
header comments. Outputs are deterministic: same config, same bytes.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import metrics, transition
from .config import Config, ConfigError, build_phantom, build_scan_geometry, load_config
from .geometry import genericity, sample_sinogram
from .kernel import interpolation_kernel, kernel_certificate
from .phantom import edge_site
from .recon import ReconGrid, edge_profile, lambda_recon_grid, lambda_recon_points, write_pgm16

EXIT_VALIDATION = 1
EXIT_CHECK_FAILED = 2
EXIT_IO = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(config_path) -> Config:
    try:
        return load_config(config_path)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read config: {exc}")
    except ConfigError as exc:
        _fail(EXIT_VALIDATION, str(exc))


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot create output directory: {exc}")
    return out


def _write_csv(path, columns, rows, header_lines):
    try:
        with open(path, "w") as f:
            f.write(f"# columns: {columns}\n")
            for line in header_lines:
                f.write(f"# {line}\n")
            for row in rows:
                f.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row))
                f.write("\n")
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {path}: {exc}")


@click.group()
def main():
    """Discrete Lambda-tomography simulation and edge-response prediction."""


@main.command("kernel-check")
@click.option("--check", is_flag=True, help="Exit 2 if any axiom fails.")
@click.option("--dump-csv", "dump_csv", type=click.Path(), default=None,
              help="Write the kernel pieces (knots and coefficients) to CSV.")
def kernel_check(check, dump_csv):
    """Certify the interpolation kernel axioms and print the report."""
    k = interpolation_kernel()
    cert = kernel_certificate(k)
    for line in cert.lines():
        click.echo(line)
    if dump_csv:
        rows = [tuple(float(v) for v in row) for row in k.pieces.rows()]
        _write_csv(dump_csv, "left_knot, right_knot, c0, c1, c2, c3, c4", rows,
                   ["raw kernel pieces, ascending powers, global coordinate",
                    f"center = {k.center:.17g}"])
        click.echo(f"wrote {dump_csv}")
    if check and not cert.passed:
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
@click.option("--binary/--no-binary", default=True, help="Also write raw binary block.")
@click.option("--csv/--no-csv", default=False, help="Also write CSV rows (large!).")
def sinogram(config_path, out_path, binary, csv):
    """Sample the phantom's line integrals on the scan lattice."""
    cfg = _load(config_path)
    try:
        ph = build_phantom(cfg)
        geom = build_scan_geometry(cfg)
        rec = cfg.first("recon")
        aperture = rec.get_str("aperture", "none") if rec else "none"
        sino = sample_sinogram(ph, geom, aperture)
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    out = _outdir(out_path)
    try:
        if binary:
            sino.to_binary(out / "sinogram.bin")
            click.echo(f"wrote {out / 'sinogram.bin'}")
        if csv:
            sino.to_csv(out / "sinogram.csv")
            click.echo(f"wrote {out / 'sinogram.csv'}")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
@click.option("--n0", type=int, default=None, help="Override [geometry] n0.")
@click.option("--resolution", type=int, default=None, help="Override [recon] resolution.")
@click.option("--aperture", type=click.Choice(["none", "box"]), default=None)
def recon(config_path, out_path, n0, resolution, aperture):
    """Reconstruct on the square grid; write CSV and 16-bit PGM."""
    cfg = _load(config_path)
    try:
        ph = build_phantom(cfg)
        geom = build_scan_geometry(cfg, n0_override=n0)
        rec = cfg.first("recon")
        res = resolution or (rec.get_int("resolution", 1001) if rec else 1001)
        ap = aperture or (rec.get_str("aperture", "none") if rec else "none")
        k = interpolation_kernel()
        sino = sample_sinogram(ph, geom, ap)
        grid = lambda_recon_grid(sino, k, ReconGrid.square(geom.L, res))
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    out = _outdir(out_path)
    header = cfg.header_lines() + [f"n0 = {geom.n0}", f"resolution = {res}",
                                   f"aperture = {ap}"]
    try:
        grid.to_csv(out / "recon.csv", header_lines=header)
        write_pgm16(grid, out / "recon.pgm")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"wrote {out / 'recon.csv'} and {out / 'recon.pgm'}")


@main.command("edge-response")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
def edge_response(config_path, out_path):
    """Measured vs predicted rescaled profile across a boundary point."""
    cfg = _load(config_path)
    try:
        ph = build_phantom(cfg)
        geom = build_scan_geometry(cfg)
        sec = cfg.require("edge")
        comp = sec.get_int("component", 0)
        theta0 = sec.get_float("theta0", required=True)
        h_min = sec.get_float("h_min", -4.0)
        h_max = sec.get_float("h_max", 4.0)
        n_samples = sec.get_int("n_samples", 81)
        rec = cfg.first("recon")
        ap = rec.get_str("aperture", "none") if rec else "none"
        site = edge_site(ph, comp, theta0)
        k = interpolation_kernel()
        sino = sample_sinogram(ph, geom, ap)
        prof = edge_profile(sino, k, site, (h_min, h_max), n_samples)
        rep = genericity(site.x0, site.theta0, geom.kappa)
        stats = metrics.profile_compare(prof)
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    out = _outdir(out_path)
    header = cfg.header_lines() + [
        f"x0 = {site.x0[0]:.17g} {site.x0[1]:.17g}",
        f"jump = {site.jump:.17g}",
        f"a = {rep.a:.17g}",
        f"best_rational = {rep.best_rational[0]}/{rep.best_rational[1]}",
        f"near_non_generic = {rep.near_non_generic}",
        f"rms_rel = {stats.rms_rel:.17g}",
    ]
    try:
        prof.to_csv(out / "edge_response.csv", header_lines=header)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(f"a = {rep.a:.6f} (best rational "
               f"{rep.best_rational[0]}/{rep.best_rational[1]}, "
               f"error {rep.approx_error:.3g}); rms_rel = {stats.rms_rel:.4f}")
    click.echo(f"wrote {out / 'edge_response.csv'}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
def artifact(config_path, out_path):
    """Flat-edge artifact sweep: profiles along an edge extension."""
    cfg = _load(config_path)
    try:
        ph = build_phantom(cfg)
        sec = cfg.require("artifact")
        n0_list = sec.get_ints("n0_list", required=True)
        edge_name = sec.get_str("edge", "right")
        d0, d1, count = sec.get_floats("distances", count=3, default="0.5 1.5 61")
        rect = next(s for s in ph.components if hasattr(s, "half_widths"))
        k = interpolation_kernel()
        geom0 = build_scan_geometry(cfg, n0_override=n0_list[0])
    except (ConfigError, ValueError, StopIteration) as exc:
        _fail(EXIT_VALIDATION, f"artifact sweep needs a rect component: {exc}")
    out = _outdir(out_path)
    distances = np.linspace(d0, d1, int(count))
    cx, cy = rect.center
    wx, wy = rect.half_widths
    if edge_name == "right":
        line_pts = np.column_stack([np.full_like(distances, cx + wx), cy + wy + distances])
        edge = transition.LineEdge(H=cx + wx, b0=cy + wy + float(distances[0]),
                                   b1=cy - wy, b2=cy + wy)
    else:
        _fail(EXIT_VALIDATION, f"unsupported artifact edge {edge_name!r} (use 'right')")
    rows_model = []
    for n0 in n0_list:
        try:
            geom = build_scan_geometry(cfg, n0_override=n0)
            sino = sample_sinogram(ph, geom, "box")
            vals = geom.delta_p * lambda_recon_points(sino, k, line_pts)
        except (ConfigError, ValueError) as exc:
            _fail(EXIT_VALIDATION, str(exc))
        rows = list(zip(map(float, distances), map(float, vals)))
        _write_csv(out / f"artifact_profile_n{n0}.csv", "distance, eps_times_recon",
                   rows, cfg.header_lines() + [f"n0 = {n0}", "aperture = box",
                                               f"edge = {edge_name}"])
        model = transition.line_artifact_model(k, geom, edge, 0.0, geom.delta_p)
        rows_model.append((n0, float(np.max(np.abs(vals))), model))
        click.echo(f"n0={n0}: max |eps*recon| on extension = {np.max(np.abs(vals)):.4f}, "
                   f"edge model amplitude = {model:.4f}")
    _write_csv(out / "artifact_model.csv", "n0, max_abs_eps_recon, model_amplitude",
               rows_model, cfg.header_lines())
    click.echo(f"wrote {out / 'artifact_model.csv'}")


@main.command("ripple-scaling")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
@click.option("--full-grid", is_flag=True,
              help="Reconstruct the full square grid instead of the ROI sublattice.")
def ripple_scaling(config_path, out_path, full_grid):
    """Ripple standard deviation in a fixed ROI across an n0 sweep."""
    cfg = _load(config_path)
    try:
        ph = build_phantom(cfg)
        sec = cfg.require("ripple")
        n0_list = sec.get_ints("n0_list", required=True)
        default_roi = " ".join(f"{v:g}" for v in metrics.DEFAULT_RIPPLE_ROI)
        roi = tuple(sec.get_floats("roi", count=4, default=default_roi))
        res = sec.get_int("resolution", 501)
        ap = sec.get_str("aperture", "none")
        k = interpolation_kernel()
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    out = _outdir(out_path)
    sigmas = []
    for n0 in n0_list:
        try:
            geom = build_scan_geometry(cfg, n0_override=n0)
            sino = sample_sinogram(ph, geom, ap)
            if full_grid:
                grid = lambda_recon_grid(sino, k, ReconGrid.square(geom.L, res))
            else:
                grid = lambda_recon_grid(
                    sino, k, ReconGrid.sublattice(geom.L, res, roi)
                )
            stats = metrics.roi_std(grid, roi)
        except (ConfigError, ValueError) as exc:
            _fail(EXIT_VALIDATION, str(exc))
        sigmas.append(stats.std)
        click.echo(f"n0={n0}: sigma = {stats.std:.6f} over {stats.pixel_count} px")
    rows = metrics.scaling_report(sigmas, n0_list)
    _write_csv(out / "ripple_scaling.csv",
               "n0, sigma, ratio, expected_sqrt, deviation_pct",
               [(r.n0, r.sigma, r.ratio, r.expected, r.deviation_pct) for r in rows],
               cfg.header_lines() + [f"roi = {roi}", f"resolution = {res}",
                                     f"aperture = {ap}"])
    with open(out / "ripple_scaling.txt", "w") as f:
        f.write("n0      sigma       ratio     expected   deviation%\n")
        for r in rows:
            f.write(f"{r.n0:<7d} {r.sigma:<11.6f} {r.ratio:<9.4f} "
                    f"{r.expected:<10.4f} {r.deviation_pct:+.2f}\n")
    click.echo(f"wrote {out / 'ripple_scaling.csv'}")


@main.command("dtb-calc")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", default=".", type=click.Path())
def dtb_calc(config_path, out_path):
    """Tabulate the transition behavior mu and its kernel convolution."""
    cfg = _load(config_path)
    try:
        sec = cfg.require("dtb")
        params = transition.SingularityParams(
            n=sec.get_int("n", required=True),
            beta=sec.get_float("beta", required=True),
            s=sec.get_float("s", required=True),
            b_plus=sec.get_complex("b_plus", required=True),
            b_minus=sec.get_complex("b_minus", required=True),
            a_plus=sec.get_complex("a_plus", required=True),
            a_minus=sec.get_complex("a_minus", required=True),
            det_hess=sec.get_float("det_hess", 1.0),
            op_kind=sec.get_str("op_kind", "local"),
        )
        h_min = sec.get_float("h_min", -4.0)
        h_max = sec.get_float("h_max", 4.0)
        n_samples = sec.get_int("n_samples", 81)
        ap = sec.get_str("aperture", "none")
        k = interpolation_kernel()
        spec = transition.ctb_spec(params)
        hs = np.linspace(h_min, h_max, n_samples)
        mu_vals = np.asarray(transition.ctb_mu(spec, np.where(hs == 0, 1e-300, hs)))
        dtb_vals = np.asarray(transition.dtb(spec, k, hs, aperture=ap))
    except (ConfigError, ValueError) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    out = _outdir(out_path)
    rows = [
        (float(h), float(m.real), float(m.imag), float(d.real), float(d.imag))
        for h, m, d in zip(hs, mu_vals, dtb_vals)
    ]
    _write_csv(out / "dtb_table.csv", "h, mu_re, mu_im, dtb_re, dtb_im", rows,
               cfg.header_lines() + [f"kappa1 = {params.kappa1:.17g}",
                                     f"kappa2 = {params.kappa2:.17g}",
                                     f"aperture = {ap}"])
    click.echo(f"kappa1 = {params.kappa1:g}, kappa2 = {params.kappa2:g}")
    click.echo(f"wrote {out / 'dtb_table.csv'}")


if __name__ == "__main__":
    main()
