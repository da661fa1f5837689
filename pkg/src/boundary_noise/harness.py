"""Command line experiment runner: YAML configs in, CSV rows and a JSON summary out.

Subcommands::

    boundary-noise run elliptic-rate --domain ball2 --noise white
    boundary-noise run --config experiments/          # every *.yaml in the directory
    boundary-noise list-experiments
    boundary-noise kernel-selftest

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
configuration error.  The default output directory is taken from the
``BOUNDARY_NOISE_OUT_DIR`` environment variable (``results`` otherwise).
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
import yaml

from . import estimators
from .errors import BoundaryNoiseError, ConfigurationError
from .kernels import kernel_selftest

__all__ = [
    "CSV_COLUMNS",
    "OUT_DIR_ENV",
    "Experiment",
    "EXPERIMENTS",
    "ExperimentConfig",
    "load_config",
    "run",
    "list_experiments",
    "main",
]

CSV_COLUMNS = ("experiment", "domain", "dist", "t", "value", "stderr", "bound_rhs", "ratio", "N", "seed")
OUT_DIR_ENV = "BOUNDARY_NOISE_OUT_DIR"


@dataclass(frozen=True)
class Experiment:
    """One registry row: what runs, on which domain, with which noise, and the estimate it checks."""

    name: str
    domain: str
    noise: str
    label: str
    anchor: str
    proposition: str | None = None


EXPERIMENTS = (
    Experiment("elliptic-rate", "ball2", "white", "white noise", "white-noise elliptic blow-up, d > 1 integral bound", "elliptic-white"),
    Experiment("elliptic-rate", "interval", "white", "white noise", "white-noise elliptic blow-up, d = 1 squared-log bound", "elliptic-white"),
    Experiment("elliptic-rate", "ball2", "signed-measures", "signed-measure series", "signed-measure elliptic blow-up dist^(2-2d)", "elliptic-signed"),
    Experiment("elliptic-rate", "halfspace1", "homogeneous", "spatially homogeneous", "homogeneous half-space elliptic blow-up", "elliptic-homogeneous"),
    Experiment("elliptic-rate", "ball2", "poisson", "Poisson random measure", "Levy elliptic two-term bound", "elliptic-levy"),
    Experiment("parabolic-rate", "interval", "white", "white-noise H=1/2", "Ito isometry, parabolic white-noise blow-up", "parabolic-white"),
    Experiment("parabolic-rate", "halfspace1", "signed-measures", "signed-measure series H=1/2", "signed-measure parabolic blow-up dist^(-2d)", "parabolic-signed"),
    Experiment("parabolic-rate", "halfspace1", "homogeneous", "spatially homogeneous H=1/2", "homogeneous half-space parabolic blow-up", "parabolic-homogeneous"),
    Experiment("parabolic-rate", "halfspace1", "poisson", "Poisson random measure", "Levy parabolic two-term bound, d > 1", "parabolic-levy"),
    Experiment("young-bound", "interval", "fbm", "fBM H>0.5", "Young integral pathwise sup-norm bound", "fractional-sup"),
    Experiment("elliptic-ito", "ball2", "white", "white noise", "elliptic Ito consistency against the disk closed form"),
    Experiment("parabolic-ito", "interval", "white", "white-noise H=1/2", "parabolic Ito isometry against the exact variance"),
)

# noise parameters accepted per family
NOISE_KEYS = {
    "white": {"K", "nodes"},
    "signed-measures": set(),
    "homogeneous": {"cutoff", "atoms", "spectral"},
    "poisson": {"nodes", "rate"},
    "fbm": {"H", "alpha", "T", "steps"},
}
TOP_KEYS = {"experiment", "domain", "noise", "kernel", "probes", "t", "steps", "mc", "output"}
KERNEL_KEYS = {"lam"}
MC_KEYS = {"N", "seed", "workers"}
OUTPUT_KEYS = {"csv", "json"}
# Monte Carlo consistency runs take their own probe sets
EXPERIMENT_PROBES = {"elliptic-ito": (0.5, 0.1, 0.01), "parabolic-ito": (0.5, 0.25, 0.1)}


@dataclass
class ExperimentConfig:
    """A validated experiment description."""

    experiment: str
    domain: str
    noise: dict
    kernel: dict = field(default_factory=dict)
    probes: tuple = estimators.DEFAULT_PROBES
    t: float | None = None
    steps: int | None = None
    mc: dict = field(default_factory=lambda: {"N": 2000, "seed": 0, "workers": 1})
    output: dict = field(default_factory=dict)

    @property
    def family(self):
        return self.noise["family"]

    @property
    def entry(self):
        for e in EXPERIMENTS:
            if (e.name, e.domain, e.noise) == (self.experiment, self.domain, self.family):
                return e
        raise ConfigurationError(f"no registered experiment {(self.experiment, self.domain, self.family)}")

    @property
    def stem(self):
        return f"{self.experiment}-{self.domain}-{self.family}"


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where}: expected a mapping, got {type(d).__name__}")
    bad = sorted(set(d) - allowed)
    if bad:
        raise ConfigurationError(f"{where}: unknown key(s) {bad}; allowed: {sorted(allowed)}")


def validate(raw):
    """Check a raw config mapping and return an :class:`ExperimentConfig`."""
    _reject_unknown(raw, TOP_KEYS, "config")
    for key in ("experiment", "domain", "noise"):
        if key not in raw:
            raise ConfigurationError(f"{key}: required field missing")
    noise = raw["noise"]
    noise = {"family": noise} if isinstance(noise, str) else dict(noise)
    if "family" not in noise:
        raise ConfigurationError("noise.family: required field missing")
    fam = noise["family"]
    if fam not in NOISE_KEYS:
        raise ConfigurationError(f"noise.family: unknown family {fam!r}; known: {sorted(NOISE_KEYS)}")
    _reject_unknown(noise, NOISE_KEYS[fam] | {"family"}, "noise")
    combos = [(e.name, e.domain, e.noise) for e in EXPERIMENTS]
    if (raw["experiment"], raw["domain"], fam) not in combos:
        rows = ", ".join("/".join(c) for c in combos)
        raise ConfigurationError(
            f"experiment/domain/noise: ({raw['experiment']}, {raw['domain']}, {fam}) is not registered; supported: {rows}"
        )
    if "spectral" in noise:
        path = Path(noise["spectral"])
        if not path.is_file():
            raise ConfigurationError(f"noise.spectral: spectral file not found: {path}")
    kernel = raw.get("kernel", {}) or {}
    _reject_unknown(kernel, KERNEL_KEYS, "kernel")
    mc = {"N": 2000, "seed": 0, "workers": 1}
    user_mc = raw.get("mc", {}) or {}
    _reject_unknown(user_mc, MC_KEYS, "mc")
    mc.update(user_mc)
    if int(mc["N"]) < 100:
        raise ConfigurationError("mc.N: at least 100 samples are required")
    if int(mc["workers"]) < 1:
        raise ConfigurationError("mc.workers: must be at least 1")
    output = raw.get("output", {}) or {}
    _reject_unknown(output, OUTPUT_KEYS, "output")
    default = EXPERIMENT_PROBES.get(raw["experiment"], estimators.DEFAULT_PROBES)
    probes = tuple(float(p) for p in raw.get("probes", default))
    need = 1 if raw["experiment"] in EXPERIMENT_PROBES else 4
    if len(probes) < need or any(p <= 0 for p in probes) or len(set(probes)) != len(probes):
        raise ConfigurationError(f"probes: need at least {need} distinct positive distances")
    t = raw.get("t")
    if t is not None and float(t) <= 0:
        raise ConfigurationError("t: must be positive")
    return ExperimentConfig(
        experiment=raw["experiment"],
        domain=raw["domain"],
        noise=noise,
        kernel=dict(kernel),
        probes=probes,
        t=None if t is None else float(t),
        steps=raw.get("steps"),
        mc={k: int(v) for k, v in mc.items()},
        output=dict(output),
    )


def load_config(path):
    """Read and validate one YAML config file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config: file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config: {path} is not valid YAML: {exc}") from None
    return validate(raw or {})


# ---------------------------------------------------------------------------
# execution


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _proposition_opts(cfg):
    opts = {k: v for k, v in cfg.noise.items() if k not in ("family", "spectral")}
    if "lam" in cfg.kernel:
        opts["lam"] = float(cfg.kernel["lam"])
    if cfg.t is not None:
        opts["t"] = cfg.t
    if cfg.family == "fbm":
        opts.update(cfg.mc)
    if cfg.family == "homogeneous" and "spectral" in cfg.noise:
        opts["spectral"] = cfg.noise["spectral"]
    return opts


def _run_rate(cfg):
    entry = cfg.entry
    branches = dict(estimators.run_proposition(entry.proposition, cfg.probes, **_proposition_opts(cfg)))
    rep = branches[cfg.domain]
    is_mc = rep.stderr is not None
    t = rep.t
    rows = []
    for i, d in enumerate(rep.distances):
        rows.append(
            (cfg.experiment, cfg.domain, d, t, rep.values[i], rep.stderr[i] if is_mc else 0.0,
             rep.bound_rhs[i], rep.ratios[i], cfg.mc["N"] if is_mc else 0, cfg.mc["seed"])
        )
    return rows, rep.passed, rep.summary()


def _run_ito(cfg):
    noise = {k: v for k, v in cfg.noise.items() if k != "family"}
    common = dict(N=cfg.mc["N"], seed=cfg.mc["seed"], workers=cfg.mc["workers"])
    if cfg.experiment == "elliptic-ito":
        chk = estimators.elliptic_ito_check(tuple(1.0 - p for p in cfg.probes), **noise, **common)
        t = None
    else:
        steps = {"steps": int(cfg.steps)} if cfg.steps else {}
        t = cfg.t if cfg.t is not None else 0.1
        chk = estimators.parabolic_ito_check(cfg.probes, t=t, **steps, **common)
    est = chk.estimate
    rows = [
        (cfg.experiment, cfg.domain, chk.dist[i], t, est.second_moment[i], est.stderr[i],
         chk.exact[i], est.second_moment[i] / chk.exact[i], est.N, cfg.mc["seed"])
        for i in range(len(chk.exact))
    ]
    summary = {"z_scores": [float(z) for z in chk.z], "n_sigma": chk.n_sigma, "exact": chk.exact.tolist()}
    return rows, chk.passed, summary


def execute(cfg):
    """Run one validated config; returns ``(csv rows, passed, summary dict)``."""
    if cfg.experiment in ("elliptic-ito", "parabolic-ito"):
        return _run_ito(cfg)
    return _run_rate(cfg)


def _csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def _environment(cfg):
    return {
        "seed": cfg.mc["seed"],
        "N": cfg.mc["N"],
        "workers": cfg.mc["workers"],
        "noise": cfg.noise,
        "kernel": cfg.kernel,
        "probes": list(cfg.probes),
        "t": cfg.t,
        "steps": cfg.steps,
        "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
    }


def run(cfg, out_dir):
    """Execute ``cfg`` and write ``<stem>.csv`` and ``<stem>.json`` under ``out_dir``.

    Returns ``(passed, csv path, json path)``.  The CSV depends only on the
    config and seed; the wall-clock timestamp lives in the JSON file only.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, passed, summary = execute(cfg)
    csv_path = out_dir / cfg.output.get("csv", f"{cfg.stem}.csv")
    json_path = out_dir / cfg.output.get("json", f"{cfg.stem}.json")
    csv_path.write_text(_csv_text(rows))
    entry = cfg.entry
    doc = {
        "experiment": cfg.experiment,
        "domain": cfg.domain,
        "noise": entry.label,
        "anchor": entry.anchor,
        "proposition": entry.proposition,
        "passed": bool(passed),
        "report": _jsonable(summary),
        "environment": _jsonable(_environment(cfg)),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return passed, csv_path, json_path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else str(float(obj))
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def list_experiments(stream=None):
    """Print the experiment registry; returns the rows."""
    stream = sys.stdout if stream is None else stream
    rows = [(e.name, e.domain, e.label, e.anchor) for e in EXPERIMENTS]
    for r in rows:
        print("\t".join(r), file=stream)
    return rows


def _check_registry():
    estimators.coverage_lock()
    covered = {e.proposition for e in EXPERIMENTS if e.proposition}
    missing = [p.key for p in estimators.PROPOSITIONS if p.key not in covered]
    if missing:
        raise RuntimeError(f"propositions without an experiment: {missing}")


def _selftest():
    ok = True
    for r in kernel_selftest():
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.3g} (tol {r.tol:g})")
        ok &= r.passed
    return 0 if ok else 1


def _configs_from_args(args):
    if args.config:
        path = Path(args.config)
        if path.is_dir():
            files = sorted(path.glob("*.yaml"))
            if not files:
                raise ConfigurationError(f"config: no *.yaml files in {path}")
            cfgs = [load_config(f) for f in files]
        else:
            cfgs = [load_config(path)]
    else:
        if not args.experiment:
            raise ConfigurationError("experiment: give an experiment name or --config")
        rows = [e for e in EXPERIMENTS if e.name == args.experiment]
        if not rows:
            raise ConfigurationError(f"experiment: unknown experiment {args.experiment!r}")
        rows = [e for e in rows if args.domain in (None, e.domain) and args.noise in (None, e.noise)]
        if len(rows) != 1:
            opts = ", ".join(f"--domain {e.domain} --noise {e.noise}" for e in EXPERIMENTS if e.name == args.experiment)
            raise ConfigurationError(f"domain/noise: choose one of: {opts}")
        e = rows[0]
        cfgs = [validate({"experiment": e.name, "domain": e.domain, "noise": e.noise})]
    for c in cfgs:
        if args.seed is not None:
            c.mc["seed"] = args.seed
        if args.workers is not None:
            c.mc["workers"] = args.workers
    return cfgs


def build_parser():
    p = argparse.ArgumentParser(prog="boundary-noise", description="Boundary-noise blow-up experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment (or kernel-selftest)")
    r.add_argument("experiment", nargs="?", help="experiment name, or kernel-selftest")
    r.add_argument("--config", help="YAML config file or a directory of them")
    r.add_argument("--domain")
    r.add_argument("--noise")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out-dir", default=None)
    sub.add_parser("list-experiments", help="print the experiment registry")
    sub.add_parser("kernel-selftest", help="check heat kernel invariants")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    _check_registry()
    if args.command == "list-experiments":
        list_experiments()
        return 0
    if args.command == "kernel-selftest" or (args.command == "run" and args.experiment == "kernel-selftest"):
        return _selftest()
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV, "results")
    try:
        cfgs = _configs_from_args(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status = 0
    for cfg in cfgs:
        try:
            passed, csv_path, _ = run(cfg, out_dir)
        except ConfigurationError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        except BoundaryNoiseError as exc:
            print(f"FAIL {cfg.stem}: {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"{'PASS' if passed else 'FAIL'} {cfg.stem} -> {csv_path}")
        if not passed:
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
