"""Command-line interface.

Exit codes: 0 success, 2 invalid input or usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
import warnings

import numpy as np

from .core import ContrastMatrix, LagSet, TestResult, load_dataset, write_dataset
from .detrend import detrend
from .errors import NumericalError, ValidationError
from .isotest import guan_test_grid, guan_test_unif, maity_test
from .numstats import RandomStream
from .simulate import CovarianceModel, grid_locations, simulate_grf, uniform_locations
from .subsample import RegionGrid
from .variogram import (
    DEFAULT_BANDWIDTH,
    DEFAULT_TRUNCATION,
    DirectionalBinSpec,
    KernelSpec,
    default_distance_bins,
    directional_semivariogram,
    write_directional_table,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

# flags whose values may start with "-" and would otherwise be read as options
_SIGNED_VALUE_FLAGS = {
    "--lags",
    "--contrasts",
    "--xlims",
    "--ylims",
    "--grid-spacing",
    "--anisotropy",
    "--angles",
    "--bins",
}

TEST_TITLES = {
    "guan-grid": "Test of isotropy for gridded sampling locations using the sample semivariogram",
    "guan-unif": "Test of isotropy for uniformly distributed sampling locations using a kernel-smoothed semivariogram",
    "maity": "Test of isotropy for general sampling designs with a grid-based block bootstrap",
}


def parse_matrix(text: str, name: str) -> np.ndarray:
    """Parse ``"a,b;c,d"`` into a 2-D float array."""
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.strip().strip(";").split(";")]
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {text!r}; expected rows like '1,0;0,1'") from None
    if len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{name}: rows have different lengths")
    return np.array(rows)


def parse_pair(text: str, name: str, cast=float) -> tuple:
    parts = text.split(",")
    try:
        values = tuple(cast(p) for p in parts)
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {text!r}; expected two comma-separated values") from None
    if len(values) != 2:
        raise ValidationError(f"{name}: expected two comma-separated values, got {text!r}")
    return values


def parse_list(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {text!r}; expected comma-separated numbers") from None


def _kernel_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bandwidth", type=float, default=DEFAULT_BANDWIDTH, help="kernel bandwidth in lag units (default 0.7)")
    p.add_argument("--kernel", default="gaussian", choices=["gaussian", "norm", "epanechnikov", "uniform"], help="smoothing kernel (default gaussian)")
    p.add_argument("--truncation", type=float, default=DEFAULT_TRUNCATION, help="gaussian kernel support in bandwidths (default 1.5)")


def _region_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xlims", required=True, help="lower,upper x limits of the sampling region")
    p.add_argument("--ylims", required=True, help="lower,upper y limits of the sampling region")
    p.add_argument("--grid-spacing", required=True, help="width,height of the cells laid over the region")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isotropy", description="Nonparametric tests of isotropy for spatial data.")
    sub = parser.add_subparsers(dest="command", required=True)

    test = sub.add_parser("test", help="run an isotropy test")
    tsub = test.add_subparsers(dest="test", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="CSV file with header x,y,value")
    common.add_argument("--lags", required=True, help="lag vectors, e.g. '1,0;0,1;1,1;-1,1'")
    common.add_argument("--contrasts", required=True, help="contrast matrix rows, e.g. '1,-1,0,0;0,0,1,-1'")
    common.add_argument("--format", choices=["json", "text"], default="json", help="report format (default json)")
    common.add_argument("--drop-nonfinite", action="store_true", help="drop rows whose value is not finite")

    g = tsub.add_parser("guan-grid", parents=[common], help="subsampling test for gridded locations")
    g.add_argument("--delta", type=float, default=1.0, help="lattice spacing that lags are expressed in (default 1)")
    g.add_argument("--window-dims", default="2,2", help="moving window size in lattice nodes (default 2,2)")
    g.add_argument("--finite-adjust", action="store_true", help="also report the finite-sample adjusted p-value")

    u = tsub.add_parser("guan-unif", parents=[common], help="subsampling test for uniformly distributed locations")
    _region_args(u)
    u.add_argument("--window-dims", default="2,2", help="moving window size in grid cells (default 2,2)")
    _kernel_args(u)
    u.add_argument("--subblock-bandwidth", type=float, default=None, help="bandwidth on subblocks (default: --bandwidth)")

    m = tsub.add_parser("maity", parents=[common], help="block-bootstrap test for general designs")
    _region_args(m)
    m.add_argument("--block-dims", required=True, help="bootstrap block size in grid cells")
    m.add_argument("--nboot", type=int, default=100, help="number of bootstrap samples (default 100)")
    m.add_argument("--seed", type=int, required=True, help="random seed")
    m.add_argument("--bootstrap-pairs", choices=["within", "all"], default="within", help="pairs used in replicate estimates (default within)")
    _kernel_args(m)

    v = sub.add_parser("variogram", help="directional sample semivariograms as CSV")
    v.add_argument("--input", required=True, help="CSV file with header x,y,value")
    v.add_argument("--angles", default="0,45,90,135", help="directions in degrees from the x axis (default 0,45,90,135)")
    v.add_argument("--tolerance", type=float, default=22.5, help="angular tolerance in degrees (default 22.5)")
    v.add_argument("--bins", default=None, help="distance bin edges, comma separated")
    v.add_argument("--nbins", type=int, default=13, help="equal-width bins up to half the domain diagonal (default 13)")
    v.add_argument("--drop-nonfinite", action="store_true")

    s = sub.add_parser("simulate", help="simulate a Gaussian random field as CSV")
    s.add_argument("--design", required=True, help="grid:NXxNY:DELTA or uniform:N")
    s.add_argument("--xlims", default="0,1", help="x limits for uniform designs (default 0,1)")
    s.add_argument("--ylims", default="0,1", help="y limits for uniform designs (default 0,1)")
    s.add_argument("--model", default="exp", choices=["exp", "exponential", "gauss", "gaussian"], help="covariance family")
    s.add_argument("--sill", type=float, default=1.0)
    s.add_argument("--range", type=float, default=1.0)
    s.add_argument("--nugget", type=float, default=0.0)
    s.add_argument("--anisotropy", default="0,1", help="angle in degrees and ratio >= 1 (default 0,1)")
    s.add_argument("--seed", type=int, required=True, help="random seed")

    d = sub.add_parser("detrend", help="residuals from a polynomial trend surface as CSV")
    d.add_argument("--input", required=True, help="CSV file with header x,y,value")
    d.add_argument("--degree", type=int, default=2, choices=[1, 2, 3], help="polynomial degree (default 2)")
    d.add_argument("--drop-nonfinite", action="store_true")
    return parser


def _join_signed_values(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _SIGNED_VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _region(args) -> RegionGrid:
    return RegionGrid(
        parse_pair(args.xlims, "--xlims"),
        parse_pair(args.ylims, "--ylims"),
        parse_pair(args.grid_spacing, "--grid-spacing"),
    )


def _kernel(args, bandwidth=None) -> KernelSpec:
    return KernelSpec(args.kernel, args.bandwidth if bandwidth is None else bandwidth, args.truncation)


def run_test(args) -> TestResult:
    data = load_dataset(args.input, drop_nonfinite=args.drop_nonfinite)
    lags = LagSet(parse_matrix(args.lags, "--lags"))
    A = ContrastMatrix(parse_matrix(args.contrasts, "--contrasts"))
    if args.test == "guan-grid":
        return guan_test_grid(
            data,
            lags,
            A,
            delta=args.delta,
            window_dims=parse_pair(args.window_dims, "--window-dims", int),
            finite_adjust=args.finite_adjust,
        )
    if args.test == "guan-unif":
        return guan_test_unif(
            data,
            lags,
            A,
            _region(args),
            kernel=_kernel(args),
            window_dims=parse_pair(args.window_dims, "--window-dims", int),
            subblock_kernel=_kernel(args, args.subblock_bandwidth),
        )
    return maity_test(
        data,
        lags,
        A,
        _region(args),
        kernel=_kernel(args),
        block_dims=parse_pair(args.block_dims, "--block-dims", int),
        n_boot=args.nboot,
        seed=args.seed,
        pairs=args.bootstrap_pairs,
    )


def format_text(result: TestResult, source: str) -> str:
    lines = [f"\t{TEST_TITLES[result.test_name]}", "", f"data:  {source}"]
    lines.append(f"Chi-sq = {result.statistic:.5g}, df = {result.df}, p-value = {result.p_value:.4g}")
    extra = []
    if result.p_value_finite is not None:
        extra.append(f"p-value (finite adj.) = {result.p_value_finite:.4g}")
    if result.n_subblocks is not None:
        extra.append(f"number of subblocks: {result.n_subblocks}")
    if result.n_boot is not None:
        extra.append(f"bootstrap samples: {result.n_boot}, seed: {result.seed}")
    if extra:
        lines.append(", ".join(extra))
    labels = result.estimates.lagset.labels()
    values = [f"{g:.8f}" for g in result.estimates.gammas]
    width = max(max(map(len, labels)), max(map(len, values))) + 1
    lines += ["", "sample estimates: (lag value)"]
    lines.append("".join(lab.rjust(width) for lab in labels))
    lines.append("".join(val.rjust(width) for val in values))
    lines += ["", "estimated asymp. variance-covariance matrix:"]
    k = result.sigma.matrix.shape[0]
    cells = [[f"{v:.6g}" for v in row] for row in result.sigma.matrix]
    cw = max(len(c) for row in cells for c in row) + 1
    lines.append(" " * 5 + "".join(f"[,{j + 1}]".rjust(cw) for j in range(k)))
    for i, row in enumerate(cells):
        lines.append(f"[{i + 1},]".ljust(5) + "".join(c.rjust(cw) for c in row))
    return "\n".join(lines) + "\n"


def cmd_test(args, out) -> None:
    result = run_test(args)
    if args.format == "json":
        out.write(json.dumps(result.to_dict(), indent=2) + "\n")
    else:
        out.write(format_text(result, args.input))


def cmd_variogram(args, out) -> None:
    data = load_dataset(args.input, drop_nonfinite=args.drop_nonfinite)
    edges = parse_list(args.bins, "--bins") if args.bins else default_distance_bins(data, args.nbins)
    spec = DirectionalBinSpec(parse_list(args.angles, "--angles"), args.tolerance, edges)
    write_directional_table(directional_semivariogram(data, spec), out)


def _simulation_locations(args, rng: RandomStream) -> np.ndarray:
    kind, _, rest = args.design.partition(":")
    try:
        if kind == "grid":
            dims, _, delta = rest.partition(":")
            nx, ny = (int(v) for v in dims.lower().split("x"))
            return grid_locations(nx, ny, float(delta) if delta else 1.0)
        if kind == "uniform":
            return uniform_locations(int(rest), parse_pair(args.xlims, "--xlims"), parse_pair(args.ylims, "--ylims"), rng)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"--design: cannot parse {args.design!r}") from None
    raise ValidationError(f"--design must be grid:NXxNY:DELTA or uniform:N, got {args.design!r}")


def cmd_simulate(args, out) -> None:
    angle, ratio = parse_pair(args.anisotropy, "--anisotropy")
    model = CovarianceModel(args.model, args.sill, args.range, args.nugget, angle, ratio)
    rng = RandomStream(args.seed)
    locs = _simulation_locations(args, rng.child(0))
    write_dataset(simulate_grf(locs, model, rng.child(1)), out)


def cmd_detrend(args, out) -> None:
    data = load_dataset(args.input, drop_nonfinite=args.drop_nonfinite)
    write_dataset(detrend(data, args.degree), out)


COMMANDS = {"test": cmd_test, "variogram": cmd_variogram, "simulate": cmd_simulate, "detrend": cmd_detrend}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_signed_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = io.StringIO()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            COMMANDS[args.command](args, buf)
            code = EXIT_OK
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = EXIT_INVALID
        except NumericalError as exc:
            print(f"numerical failure: {exc}", file=sys.stderr)
            code = EXIT_NUMERICAL
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if code == EXIT_OK:
        sys.stdout.write(buf.getvalue())
    return code
