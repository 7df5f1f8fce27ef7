"""Command-line surface.

Subcommands: fit, influence, surface, simulate, validate-constants.  Every
run writes its numeric artifacts plus a manifest.json recording the resolved
configuration, seeds, input digest and timestamps, so identical inputs can be
shown to reproduce identical numeric files.

Exit codes: 0 success, 1 validation failure (validate-constants), 2 usage
error, 3 data error, 4 numeric degeneracy.  Errors go to stderr as one-line
JSON records.

numpy and the numeric modules are imported lazily so the --threads cap can be
applied to the BLAS thread pools before numpy starts; all numeric kernels
here are deterministic regardless, and --threads 1 output is byte-identical
to any other setting.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import PhdError

_THREAD_ENV_VARS = (
    "OPENBLAS_NUM_THREADS",
    "OMP_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def _apply_thread_cap(argv: list[str]) -> None:
    """Cap BLAS pools before numpy is imported.  Best effort: if numpy is
    already loaded (library use), the cap is a no-op and determinism rests on
    the kernels themselves."""
    threads = None
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            threads = argv[i + 1]
        elif arg.startswith("--threads="):
            threads = arg.split("=", 1)[1]
    if threads is None or "numpy" in sys.modules:
        return
    if threads.isdigit() and int(threads) >= 1:
        for var in _THREAD_ENV_VARS:
            os.environ[var] = threads


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


class _Manifest:
    """Collects run metadata and writes manifest.json next to the outputs."""

    def __init__(self, command: str, config: dict, input_path=None, seed=None):
        self.data = {
            "command": command,
            "config": config,
            "config_sha256": hashlib.sha256(
                json.dumps(config, sort_keys=True).encode()
            ).hexdigest(),
            "seed": seed,
            "version": __version__,
            "input": None,
            "outputs": [],
            "started_at": _utcnow(),
        }
        if input_path is not None:
            self.data["input"] = {
                "path": str(input_path),
                "sha256": _sha256_file(input_path),
            }

    def add_output(self, path) -> None:
        self.data["outputs"].append(Path(path).name)

    def write(self, outdir: Path) -> None:
        self.data["finished_at"] = _utcnow()
        with open(outdir / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2)
            fh.write("\n")


def _outdir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _ingest_config(args):
    from .ingest import IngestConfig

    predictors = None
    if args.predictors:
        predictors = tuple(name.strip() for name in args.predictors.split(","))
    return IngestConfig(
        response_column=args.response,
        log_response=args.log_response,
        drop_rows_with_missing_response=not args.keep_missing_response,
        predictor_columns=predictors,
        delimiter=args.delimiter,
    )


def _load_dataset(args):
    from .ingest import ingest_csv

    cfg = _ingest_config(args)
    dataset = ingest_csv(args.input, cfg)
    config = {
        "input": str(args.input),
        "response": args.response,
        "log_response": args.log_response,
        "drop_rows_with_missing_response": not args.keep_missing_response,
        "predictors_requested": args.predictors or "all numeric except response",
        "predictors_resolved": list(dataset.names or ()),
        "delimiter": args.delimiter,
        "n": dataset.n,
        "p": dataset.p,
    }
    return dataset, config


def cmd_fit(args) -> int:
    from .phd import fit_phd

    dataset, config = _load_dataset(args)
    config.update({"variant": args.variant, "k": args.k})
    fit = fit_phd(dataset, args.variant, args.k)

    out = _outdir(args)
    manifest = _Manifest("fit", config, input_path=args.input)

    eig_path = out / "eigenvalues.csv"
    with open(eig_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,eigenvalue,abs_eigenvalue,abs_ratio_to_next\n")
        vals = fit.eig.values
        for i, lam in enumerate(vals):
            if i + 1 < len(vals) and abs(vals[i + 1]) > 0:
                ratio = f"{abs(lam) / abs(vals[i + 1]):.17g}"
            else:
                ratio = ""
            fh.write(f"{i + 1},{lam:.17g},{abs(lam):.17g},{ratio}\n")
    manifest.add_output(eig_path)

    basis_path = out / "basis.csv"
    names = dataset.names or tuple(f"x{i + 1}" for i in range(dataset.p))
    with open(basis_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("predictor," + ",".join(f"direction{i + 1}" for i in range(args.k)) + "\n")
        for r, name in enumerate(names):
            cells = [f"{fit.gamma_hat.columns[r, c]:.17g}" for c in range(args.k)]
            fh.write(name + "," + ",".join(cells) + "\n")
    manifest.add_output(basis_path)
    manifest.write(out)

    print(f"fit: variant={args.variant} n={dataset.n} p={dataset.p} k={args.k}")
    shown = ", ".join(f"{v:.6g}" for v in fit.eig.values[: min(5, dataset.p)])
    print(f"leading eigenvalues: {shown}")
    return 0


def cmd_influence(args) -> int:
    from .diagnostics import (
        influence_report,
        write_correlations_csv,
        write_records_csv,
        write_report_json,
    )

    dataset, config = _load_dataset(args)
    config.update({"k": args.k})
    report = influence_report(dataset, args.k)

    out = _outdir(args)
    manifest = _Manifest("influence", config, input_path=args.input)
    records_path = out / "records.csv"
    write_records_csv(records_path, report)
    manifest.add_output(records_path)
    corr_path = out / "correlations.csv"
    write_correlations_csv(corr_path, report)
    manifest.add_output(corr_path)
    json_path = out / "report.json"
    write_report_json(json_path, report)
    manifest.add_output(json_path)
    manifest.write(out)

    print(f"influence: n={report.n} p={report.p} k={report.k}")
    for v in ("y", "r"):
        row = report.correlations.values[v]
        print(
            f"  {v}-based spearman(SRIS, .) avg-direction: "
            f"eris={row['eris'][-1]:.3f} hris={row['hris'][-1]:.3f} md={row['md'][-1]:.3f}"
        )
    return 0


def cmd_surface(args) -> int:
    import numpy as np

    from .population import cosine_model, influence_surface, write_surface_csv

    model = cosine_model(p=args.p)
    norms = np.linspace(0.0, args.norm_max, args.grid)
    costhetas = np.linspace(-1.0, 1.0, args.grid)
    grid_y = influence_surface(model, "y", norms, costhetas)
    grid_r = influence_surface(model, "r", norms, costhetas)

    out = _outdir(args)
    config = {"norm_max": args.norm_max, "grid": args.grid, "p": args.p}
    manifest = _Manifest("surface", config)
    surf_path = out / "surface.csv"
    write_surface_csv(surf_path, norms, costhetas, grid_y, grid_r)
    manifest.add_output(surf_path)
    manifest.write(out)

    print(f"surface: {args.grid}x{args.grid} grid written to {surf_path}")
    return 0


def cmd_simulate(args) -> int:
    import numpy as np

    from .ingest import write_dataset_csv
    from .simulate import SimSpec, simulate

    beta = None
    if args.beta:
        beta = np.array([float(v) for v in args.beta.split(",")])
    spec = SimSpec(
        model=args.model,
        n=args.n,
        p=args.p,
        seed=args.seed,
        sigma=args.sigma,
        beta=beta,
        link=args.link,
    )
    dataset = simulate(spec)

    out = _outdir(args)
    config = {
        "model": args.model,
        "n": args.n,
        "p": args.p,
        "sigma": args.sigma,
        "beta": None if beta is None else [float(v) for v in beta],
        "link": args.link,
    }
    manifest = _Manifest("simulate", config, seed=args.seed)
    data_path = out / "dataset.csv"
    write_dataset_csv(data_path, dataset)
    manifest.add_output(data_path)
    manifest.write(out)

    print(f"simulate: wrote n={dataset.n} p={dataset.p} rows to {data_path}")
    return 0


def cmd_validate_constants(args) -> int:
    from .population import cosine_model_constants
    from .simulate import SimSpec, mc_constants

    spec = SimSpec(model="cosine_index", n=1, p=2, seed=args.seed, sigma=args.sigma)
    est = mc_constants(spec, args.n)
    mu_y, cov_zy, lam1 = cosine_model_constants()
    wrong_lam1 = -cov_zy  # the factor-two-off eigenvalue the validator must reject

    checks = [
        ("mu_y", est.mu_y, est.se_mu_y, mu_y, None),
        ("cov_zy", est.cov_zy, est.se_cov_zy, cov_zy, None),
        ("lambda1", est.lambda1, est.se_lambda1, lam1, wrong_lam1),
    ]
    out = _outdir(args)
    config = {"n": args.n, "sigma": args.sigma}
    manifest = _Manifest("validate-constants", config, seed=args.seed)

    all_pass = True
    results = []
    for name, value, se, target, excluded in checks:
        z = (value - target) / se
        ok = abs(z) <= 3.0
        lines = [f"{'PASS' if ok else 'FAIL'} {name}: estimate {value:.7f} "
                 f"target {target:.7f} z {z:+.2f} (3 s.e. band)"]
        result = {
            "name": name,
            "estimate": value,
            "se": se,
            "target": target,
            "z": z,
            "pass": ok,
        }
        if excluded is not None:
            z_ex = (value - excluded) / se
            ok_ex = abs(z_ex) > 3.0
            lines.append(
                f"{'PASS' if ok_ex else 'FAIL'} {name}: excludes {excluded:.7f} "
                f"z {z_ex:+.2f}"
            )
            result["excluded_value"] = excluded
            result["excluded_z"] = z_ex
            result["excludes"] = ok_ex
            ok = ok and ok_ex
        all_pass = all_pass and ok
        results.append(result)
        for line in lines:
            print(line)

    report_path = out / "constants.json"
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(
            {"n_mc": args.n, "sigma": args.sigma, "seed": args.seed,
             "results": results, "all_pass": all_pass},
            fh, indent=2,
        )
        fh.write("\n")
    manifest.add_output(report_path)
    manifest.write(out)
    return 0 if all_pass else 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output-dir", default=".", help="directory for output files")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap internal thread pools; output is byte-identical for any value",
    )


def _add_ingest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="input CSV path")
    parser.add_argument("--response", required=True, help="response column name or index")
    parser.add_argument(
        "--log-response", action="store_true", help="use the natural log of the response"
    )
    parser.add_argument(
        "--keep-missing-response",
        action="store_true",
        help="error on missing responses instead of dropping those rows",
    )
    parser.add_argument(
        "--predictors",
        default=None,
        help="comma-separated predictor columns (default: all numeric except response)",
    )
    parser.add_argument("--delimiter", default=",", help="field delimiter")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phdinfluence",
        description="Principal Hessian directions with influence diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one PHD variant, write the eigensystem")
    _add_ingest_flags(p_fit)
    p_fit.add_argument("--variant", choices=("y", "r"), required=True)
    p_fit.add_argument("--k", type=int, required=True, help="reduction rank")
    _add_common(p_fit)
    p_fit.set_defaults(handler=cmd_fit)

    p_inf = sub.add_parser(
        "influence", help="SRIS/ERIS/HRIS and Mahalanobis diagnostics for both variants"
    )
    _add_ingest_flags(p_inf)
    p_inf.add_argument("--k", type=int, required=True, help="reduction rank")
    _add_common(p_inf)
    p_inf.set_defaults(handler=cmd_influence)

    p_surf = sub.add_parser(
        "surface", help="influence surface of the cosine single-index example"
    )
    p_surf.add_argument("--norm-max", type=float, default=3.0)
    p_surf.add_argument("--grid", type=int, default=61, help="points per axis")
    p_surf.add_argument("--p", type=int, default=3, help="predictor dimension")
    _add_common(p_surf)
    p_surf.set_defaults(handler=cmd_surface)

    p_sim = sub.add_parser("simulate", help="draw a seeded dataset and write it as CSV")
    p_sim.add_argument(
        "--model",
        choices=("cosine_index", "quadratic_first", "linear_index", "custom_index"),
        default="cosine_index",
    )
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--sigma", type=float, default=1.0)
    p_sim.add_argument("--beta", default=None, help="comma-separated index vector")
    p_sim.add_argument("--link", default=None, help="link name for custom_index")
    _add_common(p_sim)
    p_sim.set_defaults(handler=cmd_simulate)

    p_val = sub.add_parser(
        "validate-constants",
        help="Monte Carlo check of the cosine-model constants",
    )
    p_val.add_argument("--n", type=int, default=10_000_000)
    p_val.add_argument("--seed", type=int, default=7)
    p_val.add_argument("--sigma", type=float, default=0.5)
    _add_common(p_val)
    p_val.set_defaults(handler=cmd_validate_constants)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _apply_thread_cap(argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PhdError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())
