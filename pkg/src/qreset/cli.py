"""Command-line driver: ``qreset {simulate,infer-phi,verify,swap-demo}``.

Exit codes: 0 success, 1 assertion failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from .dynamics import IntegrationError
from .efvector import LinearDependenceError, MinimizationError
from .experiment import (
    PROTOCOLS,
    SWAP_COLUMNS,
    TRAJECTORY_COLUMNS,
    VERIFY_COLUMNS,
    ConfigError,
    ExperimentConfig,
    infer_phi,
    simulate,
    swap_demo,
    verify,
)
from .qmath import LN2

log = logging.getLogger("qreset")

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(cfg: ExperimentConfig) -> int:
    start = time.perf_counter()
    result = simulate(cfg)
    out = Path(cfg.out)
    for i in range(len(result.initial_bloch)):
        _write_csv(out / "trajectories" / f"sample_{i:04d}.csv", TRAJECTORY_COLUMNS, result.rows(i))
    _write_json(out / "summary.json", {
        "command": "simulate",
        "config": cfg.to_dict(),
        "epsilon": result.epsilon,
        "samples": result.endpoints,
        "timing_seconds": time.perf_counter() - start,
    })
    log.info("simulated %d samples, epsilon = %.3g", len(result.initial_bloch), result.epsilon)
    return EXIT_OK


def cmd_infer_phi(cfg: ExperimentConfig) -> int:
    start = time.perf_counter()
    result = infer_phi(cfg)
    data = result.as_dict()
    _write_json(Path(cfg.out) / "phi.json", data)
    _write_json(Path(cfg.out) / "summary.json", {
        "command": "infer-phi",
        "config": cfg.to_dict(),
        **data,
        "timing_seconds": time.perf_counter() - start,
    })
    print(json.dumps(data, sort_keys=True))
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig) -> int:
    start = time.perf_counter()
    result = verify(cfg)
    out = Path(cfg.out)
    _write_csv(out / "verify.csv", VERIFY_COLUMNS, ([r[c] for c in VERIFY_COLUMNS] for r in result.records))
    summary = result.summary()
    _write_json(out / "summary.json", {
        "command": "verify",
        "config": cfg.to_dict(),
        **summary,
        "timing_seconds": time.perf_counter() - start,
    })
    coherence_ok = summary["max_coherence"] <= LN2
    status = "PASS" if result.passed and coherence_ok else "FAIL"
    print(f"{status}: max |residual| = {result.max_abs_residual:.3e} (tolerance {cfg.tolerance:g}), "
          f"epsilon = {result.epsilon:.3e}, alpha0 = {summary['alpha0_bloch']}")
    return EXIT_OK if status == "PASS" else EXIT_ASSERTION


def cmd_swap_demo(cfg: ExperimentConfig) -> int:
    start = time.perf_counter()
    rows = swap_demo(cfg)
    _write_csv(Path(cfg.out) / "swap_demo.csv", SWAP_COLUMNS, rows)
    _write_json(Path(cfg.out) / "summary.json", {
        "command": "swap-demo",
        "config": cfg.to_dict(),
        "rows": len(rows),
        "timing_seconds": time.perf_counter() - start,
    })
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "infer-phi": cmd_infer_phi,
    "verify": cmd_verify,
    "swap-demo": cmd_swap_demo,
}


def _bloch_arg(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected ax,ay,az, got {text!r}") from exc
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three components, got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qreset", description="Thermodynamics of reliable qubit reset.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--sampling", choices=["ball", "sphere"])
    parser.add_argument("--protocol", choices=PROTOCOLS)
    parser.add_argument("--out", type=str)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--alpha0-from-phi", action="store_true", default=None)
    parser.add_argument("--initial", type=_bloch_arg, help="fixed initial Bloch vector ax,ay,az")
    parser.add_argument("--target", type=_bloch_arg, help="target Bloch vector (default 0,0,1)")
    parser.add_argument("--Eb", type=float, help="bath-qubit energy for the swap protocol (k_BT)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


OVERRIDES = ("seed", "samples", "sampling", "protocol", "out", "tolerance", "alpha0_from_phi", "initial",
             "target", "Eb")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        data = ExperimentConfig.from_json(args.config).to_dict()
    for name in OVERRIDES:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MinimizationError as exc:
        print(f"numerical failure: {exc}; best so far {exc.best} (EP = {exc.value})", file=sys.stderr)
        return EXIT_NUMERICAL
    except (IntegrationError, LinearDependenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
