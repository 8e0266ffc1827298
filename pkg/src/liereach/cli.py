"""Command-line entry point: ``liereach <command> [options]``.

Settings are resolved in three layers: built-in defaults, then a
``--config`` file (JSON object, or ``key = value`` lines), then flags given
on the command line.  Every command writes its resolved settings to a
``manifest.json`` next to its outputs.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import experiments as ex
from .closure import close_algebra, controllability
from .models import HamiltonianSpec, exact_ground_energy
from .optimizer import OptimizerSettings
from .partitions import Partition, generators_from_partition

COMMON_DEFAULTS = {
    "seed": 0, "jobs": 1, "out_dir": "results", "model_json": None,
    "J": 0.1, "delta": -2.0, "h": 0.0, "variant": "constant", "offset": 1.0,
}
COMMAND_DEFAULTS = {
    "scaling2q": {},
    "rank-dist": {"m_min": 1, "m_max": None, "n_samples": 1000},
    "rank-evol": {"m_min": 1, "m_max": None, "n_samples": 1000,
                  "export_iterations": ex.EXPORT_ITERATIONS},
    "proxy": {"m_min": 1, "m_max": None, "n_samples": 1000, "k": 3, "traces": None,
              "strict": False},
    "vqe-sweep": {"m_min": 1, "m_max": None, "partitions_per_m": 5, "layers": "1-8",
                  "restarts": 10, "lap_restarts": 20, "max_iterations": 1000,
                  "gtol": 1e-9, "ftol": 1e-12, "fd_step": 1e-6},
    "eig": {},
    "close": {"partition": None, "max_iterations": None, "include_basis": False},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_config_file(path: str) -> dict:
    """JSON object, or ``key = value`` / ``key: value`` lines (``#`` comments)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
        return data
    except json.JSONDecodeError:
        pass
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split(sep, 1))
        try:
            out[key.replace("-", "_")] = json.loads(val)
        except json.JSONDecodeError:
            out[key.replace("-", "_")] = val.strip("'\"")
    return out


def parse_int_list(spec) -> list[int]:
    """``"1-8"``, ``"1,2,4"`` or a list."""
    if isinstance(spec, (list, tuple)):
        return [int(v) for v in spec]
    out = []
    for part in str(spec).split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--seed", type=int, default=S, help="root seed (default 0)")
    common.add_argument("--jobs", type=int, default=S, help="worker processes (default 1)")
    common.add_argument("--out-dir", dest="out_dir", default=S, help="output directory")
    common.add_argument("--model-json", dest="model_json", default=S,
                        help="Hamiltonian JSON {n_qubits, terms:[{string, coeff, label}]}")
    common.add_argument("--config", default=None, help="JSON or key=value settings file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one setting (repeatable)")

    p = _Parser(prog="liereach", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("scaling2q", parents=[common], help="exhaustive two-qubit subset scan")
    for name, helptext in (("rank-dist", "rank distribution over sampled partitions"),
                           ("rank-evol", "per-pass rank traces of sampled partitions"),
                           ("proxy", "fit and backtest the early-pass rank proxy")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--n-samples", dest="n_samples", type=int, default=S)
        sp.add_argument("--m-min", dest="m_min", type=int, default=S)
        sp.add_argument("--m-max", dest="m_max", type=int, default=S)
        if name == "proxy":
            sp.add_argument("--k", type=int, default=S)
            sp.add_argument("--traces", default=S, help="traces.jsonl from rank-evol")
            sp.add_argument("--strict", action="store_true", default=S)
    sp = sub.add_parser("vqe-sweep", parents=[common], help="LAP baseline and VHA layer sweep")
    sp.add_argument("--partitions-per-m", dest="partitions_per_m", type=int, default=S)
    sp.add_argument("--layers", default=S, help='layer counts, e.g. "1-8"')
    sp.add_argument("--restarts", type=int, default=S)
    sp.add_argument("--lap-restarts", dest="lap_restarts", type=int, default=S)
    sp.add_argument("--m-min", dest="m_min", type=int, default=S)
    sp.add_argument("--m-max", dest="m_max", type=int, default=S)
    sub.add_parser("eig", parents=[common], help="exact ground energy and calibration scan")
    sp = sub.add_parser("close", parents=[common], help="close one Hamiltonian or partition")
    sp.add_argument("--partition", default=S, help="partition JSON {n_items, blocks}")
    sp.add_argument("--max-iterations", dest="max_iterations", type=int, default=S)
    sp.add_argument("--include-basis", dest="include_basis", action="store_true", default=S)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[args.command])
    if args.config:
        cfg.update(parse_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        try:
            cfg[key.strip().replace("-", "_")] = json.loads(val)
        except json.JSONDecodeError:
            cfg[key.strip().replace("-", "_")] = val
    for key, val in vars(args).items():
        if key not in ("command", "config", "set"):
            cfg[key] = val
    return cfg


def _m_values(cfg: dict, n_terms: int) -> list[int]:
    hi = cfg.get("m_max") or n_terms
    return list(range(int(cfg.get("m_min") or 1), int(hi) + 1))


def _out(cfg: dict, command: str) -> Path:
    return Path(cfg["out_dir"]) / command


def cmd_scaling2q(cfg: dict) -> dict:
    t0 = time.perf_counter()
    rows, summary = ex.scaling2q(int(cfg["jobs"]))
    out = _out(cfg, "scaling2q")
    ex.write_csv(out / "subsets.csv", rows)
    ex.write_csv(out / "summary.csv", summary)
    full = [r["m"] for r in rows if r["fully_controllable"]]
    result = {"n_subsets": len(rows), "min_m_fully_controllable": min(full),
              "all_full_from_m": min(m for m in range(1, 17)
                                     if all(r["fully_controllable"] for r in rows if r["m"] >= m)),
              "seconds": time.perf_counter() - t0}
    ex.write_json(out / "manifest.json", ex.manifest("scaling2q", cfg, result=result))
    return result


def _samples(cfg: dict, spec: HamiltonianSpec):
    return ex.sample_closures(spec, _m_values(cfg, len(spec)), int(cfg["n_samples"]),
                              int(cfg["seed"]), int(cfg["jobs"]))


def _write_traces(path: Path, samples) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_dict(), separators=(",", ":")) + "\n")


def cmd_rank_dist(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    samples, max_rank = _samples(cfg, spec)
    hist, pmax = ex.rank_distribution(samples, max_rank)
    out = _out(cfg, "rank-dist")
    ex.write_csv(out / "distribution.csv", hist, ["m", "l_r", "count", "probability"])
    ex.write_csv(out / "p_max.csv", pmax)
    result = {"max_rank": max_rank, "p_max": {r["m"]: r["p_max"] for r in pmax}}
    ex.write_json(out / "manifest.json", ex.manifest("rank-dist", cfg, model=spec.to_dict(), result=result))
    return result


def cmd_rank_evol(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    samples, max_rank = _samples(cfg, spec)
    rows, means = ex.rank_evolution(samples, int(cfg["export_iterations"]))
    out = _out(cfg, "rank-evol")
    ex.write_csv(out / "evolution.csv", rows)
    ex.write_csv(out / "means.csv", means)
    _write_traces(out / "traces.jsonl", samples)
    result = {"max_rank": max_rank, "inflection_iteration": ex.inflection_iterations(means)}
    ex.write_json(out / "manifest.json", ex.manifest("rank-evol", cfg, model=spec.to_dict(), result=result))
    return result


def cmd_proxy(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    if cfg.get("traces"):
        path = Path(cfg["traces"])
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise OSError(f"cannot read traces {path}: {exc.strerror or exc}") from exc
        samples = [ex.ClosureSample.from_dict(json.loads(ln), spec.n_qubits) for ln in lines if ln.strip()]
    else:
        samples, _ = _samples(cfg, spec)
    ms = _m_values(cfg, len(spec))
    res = ex.proxy_experiment(samples, int(cfg["k"]), (ms[0], len(spec)), bool(cfg["strict"]))
    out = _out(cfg, "proxy")
    ex.write_json(out / "model.json", res["model"].to_dict())
    ex.write_csv(out / "calibration.csv", res["calibration"],
                 ["m", "rank", "predicted", "empirical", "count"])
    ex.write_csv(out / "curves.csv", res["curves"])
    result = {"calibration_error": res["calibration_error"], "degenerate_m": res["degenerate_m"],
              "fallback": "step function" if res["degenerate_m"] else None,
              "n_train": res["n_train"], "n_test": res["n_test"]}
    ex.write_json(out / "manifest.json", ex.manifest("proxy", cfg, model=spec.to_dict(), result=result))
    return result


def cmd_vqe_sweep(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    settings = OptimizerSettings(max_iterations=int(cfg["max_iterations"]), gtol=float(cfg["gtol"]),
                                 ftol=float(cfg["ftol"]), fd_step=float(cfg["fd_step"]))
    res = ex.vqe_sweep(spec, _m_values(cfg, len(spec)), int(cfg["partitions_per_m"]),
                       parse_int_list(cfg["layers"]), settings, int(cfg["seed"]),
                       int(cfg["restarts"]), int(cfg["lap_restarts"]), int(cfg["jobs"]))
    out = _out(cfg, "vqe-sweep")
    ex.write_csv(out / "runs.csv", res["rows"],
                 ["m", "partition_json", "p", "restart", "energy", "error_vs_lap", "evaluations", "seed"])
    ex.write_csv(out / "summary.csv", res["summary"])
    lap = res["lap"]
    baseline = {"lap": lap.to_dict(), "generator_order": "closure insertion order",
                "generators": res["lap_generators"], "exact_ground_energy": res["exact_ground_energy"]}
    ex.write_json(out / "lap_baseline.json", baseline)
    result = {"lap_energy": lap.best_energy, "exact_ground_energy": res["exact_ground_energy"],
              "min_error_vs_lap": min(r["error_vs_lap"] for r in res["rows"]),
              "calibration": ex.calibration_report(spec)}
    ex.write_json(out / "manifest.json", ex.manifest("vqe-sweep", cfg, model=spec.to_dict(), result=result))
    return result


def cmd_eig(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    result = {"exact_ground_energy": exact_ground_energy(spec), "calibration": ex.calibration_report(spec)}
    ex.write_json(_out(cfg, "eig") / "manifest.json", ex.manifest("eig", cfg, model=spec.to_dict(), result=result))
    return result


def cmd_close(cfg: dict) -> dict:
    spec = ex.resolve_model(cfg)
    if cfg.get("partition"):
        text = Path(cfg["partition"]).read_text(encoding="utf-8")
        part = Partition.from_json(text)
    else:
        part = Partition.singletons(len(spec))
    gens = [g for g in generators_from_partition(spec, part) if not g.is_zero()]
    mi = cfg.get("max_iterations")
    trace = close_algebra(gens, int(mi) if mi is not None else None)
    result = trace.to_dict(include_basis=bool(cfg["include_basis"]))
    if not trace.truncated:
        rep = controllability(trace)
        result.update(traceless_rank=rep.traceless_rank, fully_controllable=rep.fully_controllable)
    ex.write_json(_out(cfg, "close") / "trace.json", result)
    ex.write_json(_out(cfg, "close") / "manifest.json",
                  ex.manifest("close", cfg, model=spec.to_dict(), partition=part.to_dict()))
    return {k: v for k, v in result.items() if k != "basis"}


COMMANDS = {"scaling2q": cmd_scaling2q, "rank-dist": cmd_rank_dist, "rank-evol": cmd_rank_evol,
            "proxy": cmd_proxy, "vqe-sweep": cmd_vqe_sweep, "eig": cmd_eig, "close": cmd_close}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        result = COMMANDS[args.command](cfg)
    except Exception as exc:  # every failure leaves one JSON line on stderr
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    print(json.dumps(result, default=ex._json_default))
    return 0


if __name__ == "__main__":
    sys.exit(main())
