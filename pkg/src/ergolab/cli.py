"""Command-line experiment runner.

    ergolab <subcommand> --config path.json [--seed N] [--out DIR] [--threads T]

Subcommands: simulate, entropy, ulam, srb-scan, decay, report.  A config is
a JSON object ``{"map": {...}, "seed": int, "output_dir": str, "params": {...}}``;
``params`` depends on the subcommand (see ``PARAM_SCHEMAS``).  Every output
file embeds the fully resolved config.  Exit codes: 0 success, 2 config
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from ergolab.circle_map import lebesgue_points, map_from_spec, orbit
from ergolab.entropy import Partition, branch_partition, make_partition, pesin_report
from ergolab.equilibrium import pressure_from_ulam, stationarity_residual, stationary_measure, ulam_matrix
from ergolab.errors import BadParams, DomainError, NumericalFailure
from ergolab.measures import EmpiricalMeasure, GridMeasure, to_grid
from ergolab.srb_like import deviation_decay, srb_like_candidates

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

_POS = {"type": "integer", "minimum": 1}
_NUM = {"type": "number"}
_X0 = {
    "oneOf": [
        {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        {"type": "string", "pattern": r"^\d+/\d+$"},
        {"type": "null"},
    ]
}

MAP_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["linear", "smooth_perturbed", "nonhoelder"]},
        "degree": {"type": "integer", "minimum": 2},
        "c": _NUM,
    },
    "required": ["family", "degree"],
    "additionalProperties": False,
}


def _params(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


PARAM_SCHEMAS = {
    "simulate": _params({"x0": _X0, "n": _POS, "burn_in": {"type": "integer", "minimum": 0},
                         "grid_k": {"type": "integer", "minimum": 2}, "orbit_dump": {"type": "integer", "minimum": 0}}),
    "entropy": _params({
        "measure": {"enum": ["orbit", "dirac", "lebesgue_grid"]},
        "x0": _X0, "n": _POS, "burn_in": {"type": "integer", "minimum": 0},
        "q_max": {"oneOf": [{"type": "integer", "minimum": 1}, {"type": "null"}]},
        "grid_k": {"type": "integer", "minimum": 2},
        "partition": {"oneOf": [
            _params({"kind": {"const": "branch"}}, ["kind"]),
            _params({"kind": {"const": "uniform"}, "k": {"type": "integer", "minimum": 2},
                     "offset": {"type": "number", "minimum": 0}}, ["kind", "k"]),
        ]},
    }),
    "ulam": _params({"k": {"type": "integer", "minimum": 16}, "samples_per_cell": {"type": "integer", "minimum": 64}}),
    "srb-scan": _params({"sample_count": {"type": "integer", "minimum": 100}, "n": {"type": "integer", "minimum": 16},
                         "grid_k": {"type": "integer", "minimum": 2}, "epsilon_cluster": {"type": "number", "exclusiveMinimum": 0},
                         "checkpoint_count": {"type": "integer", "minimum": 1}}),
    "decay": _params({"r": {"type": "number", "exclusiveMinimum": 0}, "epsilon": {"type": "number", "exclusiveMinimum": 0},
                      "n_list": {"type": "array", "items": _POS, "minItems": 1},
                      "sample_count": _POS, "grid_k": {"type": "integer", "minimum": 2},
                      "reference": {"enum": ["lebesgue", "ulam"]}, "ulam_k": {"type": "integer", "minimum": 16}},
                     ["r", "epsilon", "n_list"]),
    "report": _params({"inputs": {"type": "array", "items": {"type": "string"}, "minItems": 1}}, ["inputs"]),
}

DEFAULTS = {
    "simulate": {"x0": None, "n": 1_000_000, "burn_in": 0, "grid_k": 256, "orbit_dump": 1000},
    "entropy": {"measure": "orbit", "x0": None, "n": 1_000_000, "burn_in": 0, "q_max": None,
                "grid_k": 1024, "partition": {"kind": "branch"}},
    "ulam": {"k": 1024, "samples_per_cell": 256},
    "srb-scan": {"sample_count": 200, "n": 100_000, "grid_k": 1024, "epsilon_cluster": 0.05, "checkpoint_count": 4},
    "decay": {"sample_count": 500, "grid_k": 1024, "reference": "lebesgue", "ulam_k": 1024},
    "report": {},
}


def config_schema(command: str) -> dict:
    props = {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "output_dir": {"type": "string"},
        "params": PARAM_SCHEMAS[command],
    }
    required = ["params"]
    if command != "report":
        props["map"] = MAP_SCHEMA
        required.append("map")
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


class ConfigError(Exception):
    pass


def resolve_config(command: str, raw: dict, seed: int | None = None, out: str | None = None) -> dict:
    """Validate ``raw`` and fill defaults; CLI overrides win over file values."""
    cfg = copy.deepcopy(raw)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["output_dir"] = out
    try:
        jsonschema.validate(cfg, config_schema(command))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    cfg.setdefault("seed", 0)
    cfg.setdefault("output_dir", "out")
    cfg["params"] = {**DEFAULTS[command], **cfg["params"]}
    if "map" in cfg:
        cfg["map"] = {"c": 0.0, **cfg["map"]}
    return cfg


# -- output helpers -------------------------------------------------------------

def _dump_json(path: Path, payload: dict, cfg: dict) -> None:
    body = {"config": cfg, **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _dump_csv(path: Path, header: list[str], rows, cfg: dict) -> None:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(cfg, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    path.write_text(buf.getvalue())


def read_csv(path) -> tuple[dict, list[dict]]:
    """Parse an ergolab CSV into ``(config, rows)``."""
    lines = Path(path).read_text().splitlines()
    cfg = json.loads(lines[0][len("# config: "):]) if lines and lines[0].startswith("# config: ") else {}
    body = [ln for ln in lines if not ln.startswith("#")]
    return cfg, list(csv.DictReader(body))


def _start(x0, seed: int):
    if x0 is None:
        return lebesgue_points(1, seed)[0]
    if isinstance(x0, str):
        try:
            frac = Fraction(x0)
        except ZeroDivisionError as exc:
            raise BadParams(f"bad fraction {x0!r}") from exc
        if not 0 <= frac < 1:
            raise BadParams("x0 must lie in [0, 1)")
        return frac
    return float(x0)


def _start_record(x0) -> dict:
    if isinstance(x0, Fraction):
        return {"x0": str(x0)}
    if hasattr(x0, "tail_seed"):
        return {"x0": x0.head, "tail_seed": x0.tail_seed}
    return {"x0": x0}


# -- subcommands ----------------------------------------------------------------

def run_simulate(cfg: dict, out: Path, threads: int = 1) -> None:
    p = cfg["params"]
    fmap = map_from_spec(cfg["map"])
    x0 = _start(p["x0"], cfg["seed"])
    xs = orbit(fmap, x0, p["n"], p["burn_in"])
    grid = to_grid(EmpiricalMeasure.uniform(xs), p["grid_k"])
    _dump_csv(out / "histogram.csv", ["cell_index", "mass"], enumerate(grid.mass.tolist()), cfg)
    dump = xs[: p["orbit_dump"]].tolist()
    _dump_csv(out / "orbit.csv", ["j", "x"], ((i + p["burn_in"], v) for i, v in enumerate(dump)), cfg)
    _dump_json(out / "simulate.json", {"provenance": {**_start_record(x0), "n": p["n"], "burn_in": p["burn_in"],
                                                      "seed": cfg["seed"]}}, cfg)


def _entropy_measure(cfg: dict):
    p = cfg["params"]
    fmap = map_from_spec(cfg["map"])
    if p["measure"] == "lebesgue_grid":
        return fmap, GridMeasure.lebesgue(p["grid_k"]), {"measure": "lebesgue_grid", "grid_k": p["grid_k"]}
    x0 = _start(p["x0"], cfg["seed"])
    if p["measure"] == "dirac":
        return fmap, EmpiricalMeasure.dirac(float(x0)), {"measure": "dirac", **_start_record(x0)}
    xs = orbit(fmap, x0, p["n"], p["burn_in"])
    prov = {"measure": "orbit", **_start_record(x0), "n": p["n"], "burn_in": p["burn_in"], "seed": cfg["seed"]}
    return fmap, EmpiricalMeasure.uniform(xs), prov


def _partition(fmap, spec: dict) -> Partition:
    if spec["kind"] == "branch":
        return branch_partition(fmap)
    return make_partition(spec["k"], spec.get("offset", 0.0))


def run_entropy(cfg: dict, out: Path, threads: int = 1) -> None:
    fmap, measure, prov = _entropy_measure(cfg)
    p = cfg["params"]
    report = pesin_report(fmap, measure, _partition(fmap, p["partition"]), p["q_max"], prov)
    _dump_json(out / "pesin.json", {"pesin": report.to_dict()}, cfg)


def run_ulam(cfg: dict, out: Path, threads: int = 1) -> None:
    p = cfg["params"]
    fmap = map_from_spec(cfg["map"])
    mat = ulam_matrix(fmap, p["k"], p["samples_per_cell"], seed=cfg["seed"])
    pi = stationary_measure(mat)
    est = pressure_from_ulam(fmap, mat)
    coo = mat.entries.tocoo()
    order = np.lexsort((coo.col, coo.row))
    rows = zip(coo.row[order].tolist(), coo.col[order].tolist(), coo.data[order].tolist())
    _dump_csv(out / "ulam_matrix.csv", ["i", "j", "p_ij"], rows, cfg)
    _dump_csv(out / "stationary.csv", ["cell_index", "mass"], enumerate(pi.mass.tolist()), cfg)
    _dump_json(out / "pressure.json", {"pressure": est.to_dict(), "samples_per_cell": mat.samples_per_cell,
                                       "stationarity_residual": stationarity_residual(mat, pi.mass)}, cfg)


def run_srb_scan(cfg: dict, out: Path, threads: int = 1) -> None:
    p = cfg["params"]
    fmap = map_from_spec(cfg["map"])
    rep = srb_like_candidates(fmap, p["sample_count"], p["n"], p["grid_k"], p["epsilon_cluster"],
                              seed=cfg["seed"], checkpoint_count=p["checkpoint_count"], threads=threads)
    _dump_json(out / "srb_report.json", {"report": rep.to_dict()}, cfg)


def run_decay(cfg: dict, out: Path, threads: int = 1) -> None:
    p = cfg["params"]
    if not p["epsilon"] < p["r"] / 2.0:
        raise ConfigError("decay requires 0 < epsilon < r/2")
    fmap = map_from_spec(cfg["map"])
    if p["reference"] == "ulam":
        ref = stationary_measure(ulam_matrix(fmap, p["ulam_k"], seed=cfg["seed"]))
    else:
        ref = GridMeasure.lebesgue(p["grid_k"])
    curve = deviation_decay(fmap, ref, p["r"], p["epsilon"], p["n_list"], p["sample_count"], cfg["seed"],
                            p["grid_k"], threads=threads)
    _dump_csv(out / "decay.csv", ["n", "fraction", "analytic_bound"],
              ((c.n, c.fraction, c.analytic_bound) for c in curve), cfg)
    _dump_json(out / "decay.json", {"curve": [c.__dict__ for c in curve]}, cfg)


def run_report(cfg: dict, out: Path, threads: int = 1) -> None:
    """Merge earlier outputs into ``summary.json`` plus plot-ready CSVs."""
    sections: dict[str, list] = {}
    pesin_rows, decay_rows, density_rows = [], [], []
    for src in cfg["params"]["inputs"]:
        src_dir = Path(src)
        if not src_dir.is_dir():
            raise ConfigError(f"report input {src!r} is not a directory")
        for path in sorted(src_dir.glob("*.json")):
            doc = json.loads(path.read_text())
            sections.setdefault(path.stem, []).append({"source": str(path), **doc})
            if "pesin" in doc:
                pesin_rows.append((str(path), doc["pesin"]["lyapunov"], doc["pesin"]["entropy_est"], doc["pesin"]["residual"]))
            for i, cand in enumerate(doc.get("report", {}).get("candidates", [])):
                pes = cand["pesin"]
                pesin_rows.append((f"{path}#{i}", pes["lyapunov"], pes["entropy_est"], pes["residual"]))
        for path in sorted(src_dir.glob("decay.csv")):
            for row in read_csv(path)[1]:
                decay_rows.append((str(path), int(row["n"]), float(row["fraction"]), float(row["analytic_bound"])))
        for name in ("histogram.csv", "stationary.csv"):
            for path in sorted(src_dir.glob(name)):
                rows = read_csv(path)[1]
                k = len(rows)
                for row in rows:
                    density_rows.append((str(path), (int(row["cell_index"]) + 0.5) / k, float(row["mass"]) * k))
    _dump_json(out / "summary.json", {"sections": sections}, cfg)
    _dump_csv(out / "summary_pesin.csv", ["source", "lyapunov", "entropy_est", "residual"], pesin_rows, cfg)
    _dump_csv(out / "summary_decay.csv", ["source", "n", "fraction", "analytic_bound"], decay_rows, cfg)
    _dump_csv(out / "summary_density.csv", ["source", "x", "density"], density_rows, cfg)


COMMANDS = {
    "simulate": run_simulate,
    "entropy": run_entropy,
    "ulam": run_ulam,
    "srb-scan": run_srb_scan,
    "decay": run_decay,
    "report": run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return int(exc.code or 0)
    try:
        raw = json.loads(Path(args.config).read_text())
        cfg = resolve_config(args.command, raw, args.seed, args.out)
        out = Path(cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out, max(1, args.threads))
    except (OSError, json.JSONDecodeError, ConfigError, BadParams, DomainError) as exc:
        print(f"ergolab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"ergolab: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
