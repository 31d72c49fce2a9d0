"""Command-line front end: configure runs, emit JSON/CSV artifacts and figures.

Artifacts are byte-identical across reruns of the same configuration; the
optional timestamp field is the only exception and can be disabled with
--no-timestamp.  Usage errors exit 2, numerical failures exit 1 with a
structured error record on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

from .chain import ChainGeometry, OPEN, PERIODIC
from .config_space import enumerate_space
from .droplet import (DropletParams, dispersion, one_magnon_dispersion,
                      solve_droplet)
from .errors import ComplexLeak, DegenerateFit, NonConvergence, SectorTooLarge
from .kink import KinkParams, solve_kink
from .oracle import DEFAULT_SECTOR_CAP, build_periodic_blocks, spectrum_json
from .verification import (bandwidth_scaling, check_kink_ground_energy,
                           compare_droplet_band, fourier_stability,
                           residual_sweep)

OUTPUT_DIR_ENV = "XXZ_DROPLETS_OUTDIR"

# flag name -> caster, used both for CLI defaults and config-file parsing
_FLOAT_LIST = lambda s: [float(v) for v in str(s).split(",") if v != ""]
_INT_LIST = lambda s: [int(v) for v in str(s).split(",") if v != ""]

COMMON_KEYS = {
    "sites": int, "down": int, "epsilon": float, "wmax": int,
    "tol": float, "max-iter": int, "K": float, "A": float, "B": float,
    "sector-cap": int, "seed": int, "output": str, "format": str,
    "k-indices": _INT_LIST, "epsilon-grid": _FLOAT_LIST, "sites-grid": _INT_LIST,
    "topology": str, "no-timestamp": bool, "no-plot": bool,
}


def _load_config(path: str) -> dict:
    """Flat key = value document mirroring the flag names."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in COMMON_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            caster = COMMON_KEYS[key]
            if caster is bool:
                values[key] = val.lower() in ("1", "true", "yes")
            else:
                values[key] = caster(val)
    return values


def _merged(args, key, default=None):
    """Flag value if given, else config-file value, else default."""
    attr = key.replace("-", "_")
    val = getattr(args, attr, None)
    if val is not None and val is not False:
        return val
    if args._config and key in args._config:
        return args._config[key]
    return default


def _add_common(parser, *keys):
    for key in keys:
        caster = COMMON_KEYS[key]
        flag = f"--{key}"
        if caster is bool:
            parser.add_argument(flag, action="store_true", default=False)
        elif caster in (_INT_LIST, _FLOAT_LIST):
            parser.add_argument(flag, type=caster, default=None)
        else:
            parser.add_argument(flag, type=caster, default=None)
    parser.add_argument("--config", type=str, default=None,
                        help="flat key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xxz-droplets",
        description="Droplet/kink band expansions for the Ising-like XXZ chain "
                    "with an exact-diagonalization oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kink", help="solve the open-chain ground state and check it "
                                    "against the oracle")
    _add_common(p, "sites", "down", "epsilon", "A", "B", "wmax", "tol", "max-iter",
                "K", "sector-cap", "output", "no-timestamp", "no-plot")

    p = sub.add_parser("droplet", help="solve the droplet band and emit the dispersion")
    _add_common(p, "sites", "down", "epsilon", "wmax", "tol", "max-iter", "K",
                "sector-cap", "output", "format", "no-timestamp", "no-plot")

    p = sub.add_parser("oracle", help="dump the periodic momentum-block spectra")
    _add_common(p, "sites", "down", "epsilon", "sector-cap", "output", "no-timestamp")

    p = sub.add_parser("verify", help="full droplet band comparison report")
    _add_common(p, "sites", "down", "epsilon", "wmax", "tol", "max-iter", "K",
                "sector-cap", "k-indices", "seed", "output", "format",
                "no-timestamp", "no-plot")

    p = sub.add_parser("scaling", help="band-width scaling exponent across a coupling grid")
    _add_common(p, "sites", "down", "epsilon-grid", "sector-cap", "output",
                "no-timestamp", "no-plot")

    p = sub.add_parser("stability", help="dispersion coefficients across chain lengths")
    _add_common(p, "down", "epsilon", "wmax", "tol", "max-iter", "K", "sites-grid",
                "output", "no-timestamp", "no-plot")

    p = sub.add_parser("enumerate", help="dump the truncated configuration space")
    _add_common(p, "sites", "down", "wmax", "topology", "output", "no-timestamp")
    return parser


def _require(args, *keys):
    out = []
    for key in keys:
        val = _merged(args, key)
        if val is None:
            raise ValueError(f"missing required option --{key}")
        out.append(val)
    return out


def _output_path(args, default_name):
    out = _merged(args, "output")
    if out:
        return out
    outdir = os.environ.get(OUTPUT_DIR_ENV, ".")
    return os.path.join(outdir, default_name)


def _write_json(payload: dict, path, args):
    if not _merged(args, "no-timestamp", False):
        payload = {**payload,
                   "generated_at": datetime.now(timezone.utc).isoformat()}
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return path


def _write_csv(rows, header, path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _figure_path(path):
    stem, _ = os.path.splitext(path)
    return stem + ".png"


def _cmd_kink(args):
    sites, down, epsilon = _require(args, "sites", "down", "epsilon")
    params = KinkParams(
        n_sites=sites, m=down, epsilon=epsilon,
        boundary_a=_merged(args, "A", 1.0), boundary_b=_merged(args, "B", 1.0),
        w_max=_merged(args, "wmax", 8), tol=_merged(args, "tol", 1e-13),
        max_iter=_merged(args, "max-iter", 200), K=_merged(args, "K", 10.0),
    )
    cap = _merged(args, "sector-cap", DEFAULT_SECTOR_CAP)
    result = solve_kink(params)
    check = check_kink_ground_energy(params, cap)
    payload = result.to_json_dict()
    payload["oracle_check"] = check.to_json_dict()
    path = _write_json(payload, _output_path(args, "kink.json"), args)
    print(f"kink: N={sites} m={down} eps={epsilon}  energy = {result.energy:.15g} "
          f"({result.iterations} iterations, residual {result.residual:.3e})")
    print(f"oracle: {check.energy_oracle:.15g}  |diff| = {check.abs_diff:.3e}")
    print(f"artifact: {path}")
    if not _merged(args, "no-plot", False):
        from .plots import plot_kink_decay
        fig = _figure_path(path)
        plot_kink_decay(result, fig)
        print(f"figure: {fig}")
    return 0


def _cmd_droplet(args):
    sites, down, epsilon = _require(args, "sites", "down", "epsilon")
    fmt = _merged(args, "format", "json")
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    if down == 1:
        disp = one_magnon_dispersion(sites, epsilon,
                                     _merged(args, "sector-cap", DEFAULT_SECTOR_CAP))
        result = None
    else:
        params = DropletParams(
            n_sites=sites, m=down, epsilon=epsilon,
            w_max=_merged(args, "wmax", 7), tol=_merged(args, "tol", 1e-13),
            max_iter=_merged(args, "max-iter", 300), K=_merged(args, "K", 10.0),
        )
        result = solve_droplet(params)
        disp = dispersion(result)
    if fmt == "csv":
        path = _write_csv(
            [[int(j), float(k), float(e)]
             for j, k, e in zip(disp.k_indices, disp.k_values, disp.energies)],
            ["k_index", "k", "E"], _output_path(args, "droplet.csv"))
    else:
        if result is not None:
            payload = result.to_json_dict()
        else:
            payload = {"params": {"N": sites, "m": down, "epsilon": epsilon},
                       "baseline": 4.0,
                       "e_n": [float(v) for v in disp.fourier],
                       "iterations": 0, "residual": 0.0, "coefficients": [],
                       "note": "one-magnon band taken from the diagonal momentum blocks"}
        path = _write_json(payload, _output_path(args, "droplet.json"), args)
    label = (f"{result.iterations} iterations, residual {result.residual:.3e}"
             if result is not None else "one-magnon band, no iteration")
    print(f"droplet: N={sites} m={down} eps={epsilon}  bandwidth = "
          f"{disp.bandwidth:.6e} ({label})")
    print(f"artifact: {path}")
    if not _merged(args, "no-plot", False):
        from .plots import plot_dispersion
        fig = _figure_path(path)
        plot_dispersion(disp, fig, title=f"Droplet band (N={sites}, m={down}, eps={epsilon})")
        print(f"figure: {fig}")
    return 0


def _cmd_oracle(args):
    sites, down, epsilon = _require(args, "sites", "down", "epsilon")
    cap = _merged(args, "sector-cap", DEFAULT_SECTOR_CAP)
    blocks = build_periodic_blocks(sites, down, epsilon, cap)
    path = _write_json(spectrum_json(sites, down, epsilon, blocks),
                       _output_path(args, "oracle.json"), args)
    dims = [b.dim for b in blocks]
    minima = [float(b.eigenvalues[0]) for b in blocks]
    print(f"oracle: N={sites} m={down} eps={epsilon}  "
          f"block dims = {dims} (sum {sum(dims)})")
    print(f"band minima: [{', '.join(f'{v:.9f}' for v in minima)}]")
    print(f"artifact: {path}")
    return 0


def _cmd_verify(args):
    sites, down, epsilon = _require(args, "sites", "down", "epsilon")
    cap = _merged(args, "sector-cap", DEFAULT_SECTOR_CAP)
    params = DropletParams(
        n_sites=sites, m=down, epsilon=epsilon,
        w_max=_merged(args, "wmax", 7), tol=_merged(args, "tol", 1e-13),
        max_iter=_merged(args, "max-iter", 300), K=_merged(args, "K", 10.0),
    )
    report = compare_droplet_band(params, cap)
    sweep = residual_sweep(params, _merged(args, "k-indices"), cap)
    payload = report.to_json_dict()
    payload["residual_sweep"] = sweep.to_json_dict()
    payload["seed"] = _merged(args, "seed", 0)
    path = _write_json(payload, _output_path(args, "verify.json"), args)
    print(report.text_table())
    print(f"max eigenvector residual: {sweep.max_residual:.3e}")
    print(f"artifact: {path}")
    if _merged(args, "format") == "csv":
        csv_path = os.path.splitext(path)[0] + ".csv"
        _write_csv(
            [[r.k_index, r.k, r.energy_expansion, r.oracle_min, r.abs_diff, r.rank]
             for r in report.rows],
            ["k_index", "k", "E", "E_oracle", "abs_diff", "rank"], csv_path)
        print(f"table: {csv_path}")
    if not _merged(args, "no-plot", False):
        from .plots import plot_band_comparison
        fig = _figure_path(path)
        plot_band_comparison(report, fig)
        print(f"figure: {fig}")
    failed = report.failed_rows()
    if failed:
        print(f"FAIL: {len(failed)} momentum rows outside tolerance", file=sys.stderr)
        return 1
    return 0


def _cmd_scaling(args):
    sites, down, grid = _require(args, "sites", "down", "epsilon-grid")
    cap = _merged(args, "sector-cap", DEFAULT_SECTOR_CAP)
    fit = bandwidth_scaling(sites, down, grid, cap)
    payload = {"N": sites, "m": down, **fit.to_json_dict()}
    path = _write_json(payload, _output_path(args, "scaling.json"), args)
    print(f"scaling: N={sites} m={down}  fitted slope = {fit.slope:.4f} "
          f"(reference {down})")
    for eps, bw in zip(fit.epsilons, fit.bandwidths):
        print(f"  eps={eps:g}: bandwidth = {bw:.6e}")
    print(f"artifact: {path}")
    if not _merged(args, "no-plot", False):
        from .plots import plot_scaling
        fig = _figure_path(path)
        plot_scaling(fit, down, fig)
        print(f"figure: {fig}")
    return 0


def _cmd_stability(args):
    down, epsilon, grid = _require(args, "down", "epsilon", "sites-grid")
    stab = fourier_stability(
        down, epsilon, _merged(args, "wmax", 7), grid,
        tol=_merged(args, "tol", 1e-13), max_iter=_merged(args, "max-iter", 300),
        K=_merged(args, "K", 10.0))
    path = _write_json(stab.to_json_dict(), _output_path(args, "stability.json"), args)
    print(f"stability: m={down} eps={epsilon}  N grid = {stab.n_grid}")
    for h in stab.harmonics:
        diffs = ", ".join(f"{d:.3e}" for d in stab.diffs[h])
        print(f"  e_{h}: values {stab.values[h]}  diffs [{diffs}]")
    print(f"artifact: {path}")
    if not _merged(args, "no-plot", False):
        from .plots import plot_stability
        fig = _figure_path(path)
        plot_stability(stab, fig)
        print(f"figure: {fig}")
    return 0


def _cmd_enumerate(args):
    sites, down = _require(args, "sites", "down")
    topology = _merged(args, "topology", PERIODIC)
    if topology not in (OPEN, PERIODIC):
        raise ValueError(f"unknown topology {topology!r}")
    space = enumerate_space(ChainGeometry(sites, topology), down,
                            _merged(args, "wmax", 7))
    path = _write_json(space.to_json_dict(), _output_path(args, "enumerate.json"), args)
    print(f"enumerate: N={sites} m={down} {topology}  entries = {len(space)}  "
          f"per depth = {space.depth_counts()}")
    print(f"artifact: {path}")
    return 0


_COMMANDS = {
    "kink": _cmd_kink,
    "droplet": _cmd_droplet,
    "oracle": _cmd_oracle,
    "verify": _cmd_verify,
    "scaling": _cmd_scaling,
    "stability": _cmd_stability,
    "enumerate": _cmd_enumerate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args._config = _load_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        parser.error(str(exc))  # exits 2
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        parser.error(str(exc))  # exits 2
    except (NonConvergence, SectorTooLarge, ComplexLeak, DegenerateFit) as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "command": args.command}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
