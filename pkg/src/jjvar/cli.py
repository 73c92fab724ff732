"""Command-line pipeline: fit-stats, analyze, transmission, ej, pipeline.

Exit codes: 0 success, 2 input error, 3 numerical/convergence error.
All emitted files are deterministic for a given (config, seed); floats are
written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import josephson, motifs, stats, structure, transport
from .config import ConfigError, PipelineConfig, load_config

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (
    ConfigError,
    structure.ParseError,
    structure.ConfigurationError,
    stats.DegenerateDataError,
    FileNotFoundError,
    ValueError,
)
_NUMERICAL_ERRORS = (
    stats.FitConvergenceError,
    transport.CalibrationError,
    transport.NumericalError,
)


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return None if math.isnan(value) else value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_ready(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _ordered_map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _parse_m_strategy(strategy: str) -> dict:
    if strategy == "scan":
        return {}
    if strategy.startswith("fixed="):
        return {"trials": int(strategy.partition("=")[2])}
    if strategy.startswith("scan="):
        lo, _, hi = strategy.partition("=")[2].partition(":")
        return {"scan_range": (int(lo), int(hi))}
    raise ConfigError(f"bad m strategy {strategy!r}; use 'scan', 'scan=LO:HI' or 'fixed=M'")


def _structure_files(directory: str | Path) -> list[Path]:
    files = sorted(
        p for p in Path(directory).iterdir() if p.suffix.lower() in (".xyz", ".extxyz")
    )
    if not files:
        raise FileNotFoundError(f"no .xyz structures in {directory}")
    return files


def _counts_from_structures(directory: str | Path, cfg: PipelineConfig) -> stats.CountSample:
    """Per-structure hydrogen census inside the oxide region."""
    counts = []
    for path in _structure_files(directory):
        s = structure.read_structure(path)
        counts.append(structure.oxide_region(s).n_h)
    return stats.CountSample(counts=tuple(counts), area=cfg.md_area)


# ---------------------------------------------------------------------------
# subcommands


def cmd_fit_stats(cfg: PipelineConfig, out: Path) -> list[Path]:
    if cfg.counts is not None:
        sample = stats.read_counts(cfg.counts, area=cfg.md_area)
    elif cfg.structures is not None:
        sample = _counts_from_structures(cfg.structures, cfg)
    else:
        raise FileNotFoundError("fit-stats needs a counts file or a structure directory")

    result = stats.fit(sample, **_parse_m_strategy(cfg.m_strategy))
    report = result.report()
    report.update(
        {
            "converged": result.converged,
            "iterations": result.iterations,
            "n_samples": len(sample.counts),
            "m_strategy": cfg.m_strategy,
            "reference_area_a2": sample.area,
        }
    )
    report_path = out / "fit_report.json"
    _write_json(report_path, report)

    observed = np.bincount(np.array(sample.counts), minlength=result.dist.trials + 1)
    pmf = result.dist.pmf_vector()
    hist_path = out / "h_histogram.csv"
    _write_csv(
        hist_path,
        ["n", "observed", "fitted_pmf"],
        [[int(n), int(observed[n]), float(pmf[n])] for n in range(result.dist.trials + 1)],
    )
    if not result.converged:
        raise stats.FitConvergenceError(
            f"beta-binomial fit did not converge in {result.iterations} iterations "
            f"(report written to {report_path})"
        )
    return [report_path, hist_path]


def cmd_analyze(cfg: PipelineConfig, out: Path) -> list[Path]:
    if cfg.structures is None:
        raise FileNotFoundError("analyze needs a structure directory")
    files = _structure_files(cfg.structures)
    overrides = cfg.cutoff_overrides()

    def process(path: Path):
        s = structure.read_structure(path)
        graph = structure.neighbor_graph(s, overrides or None)
        region = structure.oxide_region(s, graph)
        x, h_pct = structure.stoichiometry(region)
        records = motifs.classify_structure(
            s, graph, surface_depth=cfg.surface_depth, surface_bin=cfg.surface_bin
        )
        return region, x, h_pct, records

    def attempt(path: Path):
        try:
            return path, process(path), None
        except (structure.ParseError, ValueError) as exc:
            return path, None, str(exc)

    results = []
    failures = []
    for path, outcome, error in _ordered_map(attempt, files, cfg.threads):
        if error is None:
            results.append((path.stem, outcome))
        else:
            failures.append((path.name, error))
            print(f"warning: skipping {path.name}: {error}", file=sys.stderr)
    if not results:
        raise FileNotFoundError(f"all {len(files)} structure files failed to parse")

    stoich_rows = []
    per_sample_records = []
    motif_rows = []
    for name, (region, x, h_pct, records) in results:
        stoich_rows.append([name, region.n_al, region.n_o, region.n_h, float(x), float(h_pct)])
        per_sample_records.append(records)
        for rec in records:
            motif_rows.append([name, rec.h_index, rec.label, int(rec.surface)])

    stoich_path = out / "stoichiometry.csv"
    _write_csv(stoich_path, ["sample", "n_al", "n_o", "n_h", "x", "h_atpct"], stoich_rows)

    xs = np.array([row[4] for row in stoich_rows])
    hs = np.array([row[5] for row in stoich_rows])
    summary_path = out / "ensemble_summary.json"
    _write_json(
        summary_path,
        {
            "samples": len(results),
            "failures": [{"file": f, "error": e} for f, e in failures],
            "x": {"mean": xs.mean(), "std": xs.std()},
            "h_atpct": {"mean": hs.mean(), "std": hs.std()},
        },
    )

    motif_csv_path = out / "motifs.csv"
    _write_csv(motif_csv_path, ["sample", "h_index", "class", "surface"], motif_rows)

    stats_table = motifs.motif_statistics(per_sample_records)
    motif_json_path = out / "motif_table.json"
    _write_json(
        motif_json_path,
        {
            "classes": stats_table.table(),
            "samples": stats_table.samples,
            "samples_with_h": stats_table.samples_with_h,
        },
    )
    return [stoich_path, summary_path, motif_csv_path, motif_json_path]


def cmd_transmission(cfg: PipelineConfig, out: Path) -> list[Path]:
    base = transport.default_model(
        barrier_sites=cfg.barrier_sites,
        lead_onsite=cfg.lead_onsite,
        lead_hopping=cfg.lead_hopping,
        eta=cfg.eta,
    )
    bounds = (cfg.bounds_lo, cfg.bounds_hi)
    cal_jj = transport.calibrate_barrier(cfg.target_jj, bounds=bounds, base=base)
    cal_jjh = transport.calibrate_barrier(cfg.target_jjh, bounds=bounds, base=base)
    delta_v = cal_jjh.height - cal_jj.height
    model_jj = cal_jj.model
    model_jjh = transport.apply_defect(model_jj, delta_v)

    e_f = model_jj.fermi_energy
    grid = np.linspace(e_f - cfg.grid_halfwidth, e_f + cfg.grid_halfwidth, cfg.grid_points)

    def curve_for(model):
        chunks = np.array_split(grid, max(cfg.threads, 1))
        parts = _ordered_map(lambda c: transport.transmission(model, c), [c for c in chunks if c.size], cfg.threads)
        return transport.TransmissionCurve(
            energies=np.concatenate([p.energies for p in parts]),
            values=np.concatenate([p.values for p in parts]),
            channels=np.concatenate([p.channels for p in parts]),
        )

    curve_jj = curve_for(model_jj)
    curve_jjh = curve_for(model_jjh)
    shift = transport.fit_transmission_shift(
        curve_jj, curve_jjh, window=(e_f - 2.0, e_f + 2.0), shift_bounds=(-1.0, 1.0)
    )

    paths = []
    for tag, curve in (("jj", curve_jj), ("jj_h", curve_jjh)):
        path = out / f"transmission_{tag}.csv"
        _write_csv(
            path,
            ["energy_ev", "transmission"],
            [[float(e), float(t)] for e, t in zip(curve.energies, curve.values)],
        )
        paths.append(path)

    sidecar = out / "calibration.json"
    _write_json(
        sidecar,
        {
            "jj": {
                "barrier_height_ev": cal_jj.height,
                "transmission": cal_jj.transmission,
                "target": cfg.target_jj,
            },
            "jj_h": {
                "barrier_height_ev": cal_jjh.height,
                "transmission": cal_jjh.transmission,
                "target": cfg.target_jjh,
                "delta_v_ev": delta_v,
            },
            "curve_shift_ev": shift,
            "barrier_sites": cfg.barrier_sites,
        },
    )
    paths.append(sidecar)
    return paths


def cmd_ej(
    cfg: PipelineConfig,
    out: Path,
    fit_report: Path | None = None,
    calibration: Path | None = None,
) -> list[Path]:
    if fit_report is not None:
        if not fit_report.exists():
            raise FileNotFoundError(f"fit report not found: {fit_report}")
        payload = json.loads(fit_report.read_text())
        dist = stats.BetaBinomial(payload["alpha"], payload["beta"], int(payload["M"]))
    else:
        dist = stats.BetaBinomial(cfg.alpha, cfg.beta, cfg.trials)

    t_jj, t_jjh = cfg.target_jj, cfg.target_jjh
    if calibration is not None:
        if not calibration.exists():
            raise FileNotFoundError(f"calibration sidecar not found: {calibration}")
        payload = json.loads(calibration.read_text())
        t_jj = payload["jj"]["transmission"]
        t_jjh = payload["jj_h"]["transmission"]

    params = josephson.JunctionParams(
        gap_mev=cfg.gap_mev, area=cfg.area, patch_area=cfg.patch_area, md_area=cfg.md_area
    )
    e_jj = josephson.ej_single(t_jj, params.gap_mev, params.area, params.patch_area)
    e_jjh = josephson.ej_single(t_jjh, params.gap_mev, params.area, params.patch_area)
    distribution = josephson.ej_distribution(dist, params, e_jj, e_jjh)

    report_path = out / "ej_report.json"
    _write_json(
        report_path,
        {
            "e_jj_ghz": e_jj,
            "e_jjh_ghz": e_jjh,
            "slope": distribution.transform.slope,
            "offset": distribution.transform.offset,
            "mean_ghz": distribution.mean(),
            "std_ghz": distribution.std(),
            "counts": {"alpha": dist.alpha, "beta": dist.beta, "M": dist.trials},
        },
    )
    pmf_path = out / "ej_pmf.csv"
    _write_csv(
        pmf_path,
        ["ej_ghz", "probability"],
        [[float(e), float(p)] for e, p in zip(distribution.support(), distribution.probabilities())],
    )
    return [report_path, pmf_path]


def cmd_pipeline(cfg: PipelineConfig, out: Path) -> tuple[int, Path]:
    stages = [
        ("fit_stats", lambda: cmd_fit_stats(cfg, out)),
        ("analyze", lambda: cmd_analyze(cfg, out)),
        ("transmission", lambda: cmd_transmission(cfg, out)),
        (
            "ej",
            lambda: cmd_ej(
                cfg, out, fit_report=out / "fit_report.json", calibration=out / "calibration.json"
            ),
        ),
    ]
    manifest = []
    failed_code = EXIT_OK
    for name, runner in stages:
        if failed_code != EXIT_OK:
            manifest.append({"name": name, "status": "skipped", "artifacts": []})
            continue
        try:
            artifacts = runner()
            manifest.append(
                {
                    "name": name,
                    "status": "completed",
                    "artifacts": [p.name for p in artifacts],
                }
            )
        except _NUMERICAL_ERRORS as exc:
            manifest.append({"name": name, "status": "failed", "artifacts": [], "error": str(exc)})
            failed_code = EXIT_NUMERICAL
        except _INPUT_ERRORS as exc:
            manifest.append({"name": name, "status": "failed", "artifacts": [], "error": str(exc)})
            failed_code = EXIT_INPUT
    manifest_path = out / "manifest.json"
    _write_json(manifest_path, {"seed": cfg.seed, "stages": manifest})
    return failed_code, manifest_path


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjvar",
        description="Hydrogen-contamination variability analysis for Al/AlOx/Al junctions",
    )
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="base RNG seed recorded in the manifest")
    parser.add_argument(
        "--threads",
        type=int,
        help="worker threads for ensemble/grid maps (env JJVAR_THREADS overrides the default)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-stats", help="fit the hydrogen-count distribution")
    p.add_argument("--counts", help="count file (one integer per line, or CSV with n_h)")
    p.add_argument("--structures", help="structure directory to census instead")
    p.add_argument("--m", dest="m_strategy", help="'scan', 'scan=LO:HI' or 'fixed=M'")

    p = sub.add_parser("analyze", help="stoichiometry and motif analysis of structures")
    p.add_argument("--structures", help="directory of extended-XYZ files")

    p = sub.add_parser("transmission", help="calibrated transmission curves")
    p.add_argument("--grid", type=int, help="number of energy grid points")

    p = sub.add_parser("ej", help="Josephson-energy distribution")
    p.add_argument("--fit-report", help="fit_report.json from fit-stats")
    p.add_argument("--calibration", help="calibration.json from transmission")

    sub.add_parser("pipeline", help="run all stages in dependency order")
    return parser


def _apply_cli_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    updates = {}
    if args.out is not None:
        updates["out"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    threads = args.threads
    if threads is None and os.environ.get("JJVAR_THREADS"):
        threads = int(os.environ["JJVAR_THREADS"])
    if threads is not None:
        updates["threads"] = threads
    for name in ("counts", "structures", "m_strategy"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "grid", None) is not None:
        updates["grid_points"] = args.grid
    return dataclasses.replace(cfg, **updates)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = PipelineConfig()
        if args.config:
            cfg = load_config(args.config, base=cfg)
        cfg = _apply_cli_overrides(cfg, args)
        cfg.validate()
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)

        if args.command == "fit-stats":
            cmd_fit_stats(cfg, out)
        elif args.command == "analyze":
            cmd_analyze(cfg, out)
        elif args.command == "transmission":
            cmd_transmission(cfg, out)
        elif args.command == "ej":
            cmd_ej(
                cfg,
                out,
                fit_report=Path(args.fit_report) if args.fit_report else None,
                calibration=Path(args.calibration) if args.calibration else None,
            )
        elif args.command == "pipeline":
            code, manifest_path = cmd_pipeline(cfg, out)
            print(f"manifest: {manifest_path}")
            return code
        return EXIT_OK
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
