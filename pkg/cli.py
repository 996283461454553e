"""
Command-line front end.

    python cli.py spectra --shape disk --R 1 --lg 1 --grid fig-example --kind hodge
    python cli.py convergence --shape disk --R 1 --lg-list 0.1 0.05 --svg disk.svg
    python cli.py betti --shape spherical_shell --r-outer 1 --r-inner 0.5 --lg 0.1
    python cli.py decompose --shape torus --R-major 1 --r-minor 0.45 --lg 0.15 --field graph-harmonic
    python cli.py exact --shape ball --R 1 --bc tangential --m 10

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure, 4 I/O.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from eigensolver import group_multiplicities
from mesh_io import MeshFormatError, write_cochain
from settings import configure_logging
from shapes_sdf import SdfFormatError
import spectra_service
from spectra_service import RunConfig
from utils.csv_output import write_csv
from utils.svg_plot import plot_convergence

logger = logging.getLogger("gridhodge.cli")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_IO = 4


# ======================== ARGUMENTS ========================

def _add_common(p: argparse.ArgumentParser) -> None:
    shape = p.add_argument_group("shape")
    shape.add_argument("--shape", default="disk")
    shape.add_argument("--R", type=float)
    shape.add_argument("--a", type=float, help="side length of a square or cube")
    shape.add_argument("--sides", type=float, nargs="+")
    shape.add_argument("--R-major", dest="R_major", type=float)
    shape.add_argument("--r-minor", dest="r_minor", type=float)
    shape.add_argument("--r-outer", dest="r_outer", type=float)
    shape.add_argument("--r-inner", dest="r_inner", type=float)
    shape.add_argument("--center", type=float, nargs="+")
    shape.add_argument("--sdf-file", dest="sdf_file", help="stored SDF grid, replaces the analytic shape")

    grid = p.add_argument_group("grid and system")
    grid.add_argument("--lg", type=float, default=0.1)
    grid.add_argument("--grid", default="auto", choices=["auto", "fig-example"])
    grid.add_argument("--padding", type=int, default=1)
    grid.add_argument("--k", type=int, default=0)
    grid.add_argument("--bc", default="normal")
    grid.add_argument("--kind", default="hodge")
    grid.add_argument("--m", type=int)
    grid.add_argument("--eps", type=float)
    grid.add_argument("--seed", type=int, default=0)

    p.add_argument("--out", help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridhodge", description="DEC Laplacian spectra on Cartesian grids")
    parser.add_argument("--log-level", dest="log_level")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("spectra", help="smallest eigenvalues of one Laplacian"))

    conv = sub.add_parser("convergence", help="one solve per grid length")
    _add_common(conv)
    conv.add_argument("--lg-list", dest="lg_list", type=float, nargs="+", required=True)
    conv.add_argument("--svg", help="plot path")

    betti = sub.add_parser("betti", help="Betti numbers of a gridded shape, mesh or graph")
    _add_common(betti)
    betti.add_argument("--mesh", help="OFF mesh")
    betti.add_argument("--graph", help="edge list; Betti numbers of its clique complex")

    dec = sub.add_parser("decompose", help="Hodge decomposition of a 1-form")
    _add_common(dec)
    dec.add_argument("--field", default="random")
    dec.add_argument("--field-file", dest="field_file")
    dec.add_argument("--components-dir", dest="components_dir", help="write per-edge components here")

    _add_common(sub.add_parser("exact", help="closed-form spectrum of the shape"))
    return parser


_NON_CONFIG = {"out", "svg", "components_dir", "log_level"}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG and v is not None}
    return RunConfig(**values)


# ======================== COMMANDS ========================

def _provenance(config: RunConfig) -> dict:
    return config.model_dump(mode="json")


def cmd_spectra(config: RunConfig, out) -> None:
    run = spectra_service.run_spectra(config)
    rows = [(i, v, g) for i, (v, g) in enumerate(zip(run.eigenvalues, run.groups))]
    notes = {"kernel_dim": run.kernel_dim, "kernel_indeterminate": run.indeterminate, "size": run.size}
    write_csv(out, ["index", "eigenvalue", "multiplicity_group"], rows, _provenance(config), notes)
    print(f"kernel_dim: {run.kernel_dim}", file=sys.stderr)


def cmd_convergence(config: RunConfig, out, svg: Optional[str] = None) -> None:
    runs, exact = spectra_service.run_convergence(config)
    rows = []
    for run in runs:
        for i, value in enumerate(run.eigenvalues):
            reference = exact[i] if exact is not None and i < len(exact) else None
            rows.append((run.l_g, i, value, reference))
    write_csv(out, ["lg", "index", "eigenvalue", "exact"], rows, _provenance(config))
    if svg:
        title = f"{config.kind} L_{config.k},{config.bc[0]} on {config.shape}"
        plot_convergence(svg, [(run.l_g, run.eigenvalues) for run in runs], exact, title)
        logger.info("wrote %s", svg)


def cmd_betti(config: RunConfig, out) -> None:
    run = spectra_service.run_betti(config)
    rows = [(k, b, flag) for k, (b, flag) in enumerate(zip(run.betti, run.indeterminate))]
    write_csv(out, ["k", "betti", "indeterminate"], rows, _provenance(config), {"source": run.source})


def cmd_decompose(config: RunConfig, out, components_dir: Optional[str] = None) -> None:
    run = spectra_service.run_decompose(config)
    rows = list(run.report.items())
    write_csv(out, ["quantity", "value"], rows, _provenance(config))
    if components_dir:
        target = Path(components_dir)
        target.mkdir(parents=True, exist_ok=True)
        header = json.dumps(_provenance(config), sort_keys=True)
        write_cochain(target / "input.txt", run.form.values, header)
        for name in ("exact", "coexact", "harmonic"):
            write_cochain(target / f"{name}.txt", getattr(run.parts, name), header)


def cmd_exact(config: RunConfig, out) -> None:
    values = spectra_service.run_exact(config)
    groups = group_multiplicities(values)
    rows = [(i, v, g) for i, (v, g) in enumerate(zip(values, groups))]
    write_csv(out, ["index", "eigenvalue", "multiplicity_group"], rows, _provenance(config))


# ======================== ENTRY POINT ========================

def _error_line(code: int, exc: BaseException) -> str:
    payload = {"code": code, "type": type(exc).__name__, "message": str(exc)}
    return "error: " + json.dumps(payload)


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (OSError, SdfFormatError, MeshFormatError)):
        return EXIT_IO
    if isinstance(exc, (ValidationError, ValueError)):
        return EXIT_CONFIG
    if isinstance(exc, RuntimeError):
        return EXIT_NUMERICS
    raise exc


def _run(args: argparse.Namespace, out) -> None:
    config = config_from_args(args)
    if config.command == "spectra":
        cmd_spectra(config, out)
    elif config.command == "convergence":
        cmd_convergence(config, out, args.svg)
    elif config.command == "betti":
        cmd_betti(config, out)
    elif config.command == "decompose":
        cmd_decompose(config, out, args.components_dir)
    else:
        cmd_exact(config, out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.out:
            with open(args.out, "w") as out:
                _run(args, out)
        else:
            _run(args, sys.stdout)
    except Exception as e:
        code = exit_code_for(e)
        logger.debug("command failed", exc_info=True)
        print(_error_line(code, e), file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    from dotenv import load_dotenv

    load_dotenv()
    sys.exit(main())
