"""``stad`` command line: run, curve, oracle and export subcommands.

Settings come from an optional INI config file (``--config``) and flags;
flags win. Recognised config sections and keys::

    [stad]
    input = data.csv            input_kind = points | distances
    header = true               labels = false           delimiter = ,
    metric = euclidean          mst_mode = classical | filter-aware
    correlate_against = reduced | full
    seed = 20190801             threads = 4
    out_dir = runs              formats = json, graphml
    attrs = col:day, stat:row-mean
    color_attr = day            size_attr = row-mean

    [anneal]
    budget = 250                initial_temperature = 0.01
    cooling_ratio = 0.9         steps_per_temperature = 10
    step_fraction = 0.1

    [filter]
    dims = col:week, stat:row-mean
    r = 52, 5                   strategy = equal-width
    cyclic = true, false

A filter or attribute source is ``col:NAME`` (a column of the input table,
by header name or 0-based position), ``file:PATH:COLUMN`` (a column of
another CSV with a header row) or ``stat:row-mean`` / ``stat:eccentricity``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .data_io import METRICS, DataError, DistanceMatrix, PointCloud, compute_distances, load_distance_matrix, load_points
from .filters import STRATEGIES, FilterSpec, discretize
from .graph_core import set_threads
from .layout_export import FORMATS, NodeStyle, export_graph, layout, read_json, render_svg, render_trace_svg
from .objective import correlation_trace
from .optimizer import BRUTE_FORCE_CAP, DEFAULT_SEED, AnnealSchedule, DomainTooLargeError, brute_force_optimum
from .pipeline import CORRELATION_TARGETS, MST_MODES, build_network, prepare, to_network
from .samples import bundled

log = logging.getLogger("stad")

EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: str = ""
    input_kind: str = "points"
    header: bool = False
    labels: bool = False
    delimiter: str = ","
    metric: str = "euclidean"
    filter_dims: list[str] = field(default_factory=list)
    filter_r: list[int] = field(default_factory=lambda: [2])
    filter_strategy: list[str] = field(default_factory=lambda: ["equal-width"])
    cyclic: list[bool] = field(default_factory=lambda: [False])
    mst_mode: str = "classical"
    correlate_against: str = "reduced"
    anneal: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    attrs: list[str] = field(default_factory=list)
    color_attr: Optional[str] = None
    size_attr: Optional[str] = None
    formats: list[str] = field(default_factory=lambda: ["json"])
    out_dir: str = "runs"
    threads: Optional[int] = None
    verbose: int = 0

    # fields that cannot change the produced network
    _NON_CANONICAL = ("formats", "out_dir", "threads", "verbose")

    def validate(self) -> None:
        if not self.input:
            raise ConfigError("no input given (use --input or [stad] input)")
        if self.input_kind not in ("points", "distances"):
            raise ConfigError(f"input kind must be points or distances, got {self.input_kind!r}")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}; choose from {', '.join(METRICS)}")
        if self.mst_mode not in MST_MODES:
            raise ConfigError(f"unknown MST mode {self.mst_mode!r}")
        if self.mst_mode == "filter-aware" and not self.filter_dims:
            raise ConfigError("filter-aware MST mode requires at least one --filter-dim")
        if self.correlate_against not in CORRELATION_TARGETS:
            raise ConfigError(f"--correlate-against must be reduced or full, got {self.correlate_against!r}")
        if len(self.filter_dims) > 2:
            raise ConfigError("at most two filter dimensions are supported")
        for s in self.filter_strategy:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown filter strategy {s!r}")
        for fmt in self.formats:
            if fmt not in FORMATS:
                raise ConfigError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
        try:
            self.schedule()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"annealing schedule: {exc}") from None

    def schedule(self) -> AnnealSchedule:
        return AnnealSchedule(seed=self.seed, **self.anneal)

    def canonical(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if k not in self._NON_CANONICAL}
        doc["anneal"] = self.schedule().as_dict()
        doc["input_sha256"] = _input_digest(self.input)
        return doc

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _input_digest(source: str) -> Optional[str]:
    path = Path(source)
    if path.is_file():
        return hashlib.sha256(path.read_bytes()).hexdigest()
    return None


# ---------------------------------------------------------------- config


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _list(text: str) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


_ANNEAL_KEYS = {
    "budget": int,
    "initial_temperature": float,
    "cooling_ratio": float,
    "steps_per_temperature": int,
    "step_fraction": float,
}


def read_config(path: str) -> dict:
    parser = configparser.ConfigParser()
    if not parser.read(path, encoding="utf-8"):
        raise ConfigError(f"cannot read config file {path}")
    out: dict = {}
    try:
        if parser.has_section("stad"):
            sec = parser["stad"]
            for key in ("input", "input_kind", "delimiter", "metric", "mst_mode", "correlate_against", "out_dir",
                        "color_attr", "size_attr"):
                if key in sec:
                    out[key] = sec[key]
            for key in ("header", "labels"):
                if key in sec:
                    out[key] = _bool(sec[key])
            for key in ("seed", "threads"):
                if key in sec:
                    out[key] = int(sec[key])
            if "formats" in sec:
                out["formats"] = _list(sec["formats"])
            if "attrs" in sec:
                out["attrs"] = _list(sec["attrs"])
        if parser.has_section("anneal"):
            sec = parser["anneal"]
            unknown = set(sec) - set(_ANNEAL_KEYS)
            if unknown:
                raise ConfigError(f"unknown [anneal] keys: {', '.join(sorted(unknown))}")
            out["anneal"] = {k: _ANNEAL_KEYS[k](sec[k]) for k in sec}
        if parser.has_section("filter"):
            sec = parser["filter"]
            if "dims" in sec:
                out["filter_dims"] = _list(sec["dims"])
            if "r" in sec:
                out["filter_r"] = [int(x) for x in _list(sec["r"])]
            if "strategy" in sec:
                out["filter_strategy"] = _list(sec["strategy"])
            if "cyclic" in sec:
                out["cyclic"] = [_bool(x) for x in _list(sec["cyclic"])]
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config) if getattr(args, "config", None) else {}
    flag_map = {
        "input": args.input,
        "input_kind": args.input_kind,
        "header": args.header,
        "labels": args.labels,
        "delimiter": args.delimiter,
        "metric": args.metric,
        "filter_dims": args.filter_dim,
        "filter_r": args.filter_r,
        "filter_strategy": args.filter_strategy,
        "mst_mode": args.mst_mode,
        "correlate_against": args.correlate_against,
        "seed": args.seed,
        "attrs": args.attr,
        "color_attr": args.color_attr,
        "size_attr": args.size_attr,
        "formats": args.format,
        "out_dir": args.out_dir,
        "threads": args.threads,
    }
    for key, value in flag_map.items():
        if value is not None:
            values[key] = value
    if args.cyclic is not None:
        dims = len(values.get("filter_dims", [])) or 1
        flags = [False] * dims
        for k in args.cyclic:
            if k < 0:
                flags = [True] * dims
            elif k < dims:
                flags[k] = True
            else:
                raise ConfigError(f"--cyclic {k}: no such filter dimension")
        values["cyclic"] = flags
    anneal = dict(values.get("anneal", {}))
    for key in _ANNEAL_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            anneal[key] = flag
    values["anneal"] = anneal
    values["verbose"] = args.verbose
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- data


@dataclass
class Loaded:
    distances: DistanceMatrix
    cloud: Optional[PointCloud]
    labels: list[str]


def load_input(cfg: RunConfig) -> Loaded:
    if cfg.input.startswith("sample:"):
        try:
            cloud = bundled(cfg.input.split(":", 1)[1])
        except FileNotFoundError:
            raise DataError(f"no bundled sample named {cfg.input!r}") from None
        return Loaded(compute_distances(cloud, cfg.metric), cloud, [str(k) for k in range(cloud.n)])
    if not Path(cfg.input).is_file():
        raise DataError(f"input file not found: {cfg.input}")
    if cfg.input_kind == "distances":
        d = load_distance_matrix(cfg.input, cfg.delimiter)
        return Loaded(d, None, [str(k) for k in range(d.n)])
    cloud = load_points(cfg.input, cfg.delimiter, cfg.header, cfg.labels)
    labels = cloud.labels or [str(k) for k in range(cloud.n)]
    return Loaded(compute_distances(cloud, cfg.metric), cloud, labels)


def resolve_source(spec: str, data: Loaded, cfg: RunConfig) -> tuple[str, np.ndarray]:
    """Turn a ``col:`` / ``file:`` / ``stat:`` reference into (name, values)."""
    kind, _, rest = spec.partition(":")
    if kind == "stat":
        if rest == "row-mean":
            if data.cloud is None:
                raise ConfigError("stat:row-mean needs a point table, not a distance matrix")
            return rest, data.cloud.points.mean(axis=1)
        if rest == "eccentricity":
            return rest, data.distances.square().mean(axis=1)
        raise ConfigError(f"unknown statistic {rest!r}; use row-mean or eccentricity")
    if kind == "col":
        if data.cloud is None:
            raise ConfigError(f"{spec}: columns need a point table, not a distance matrix")
        if rest.isdigit():
            k = int(rest)
            if k >= data.cloud.m:
                raise DataError(f"{spec}: input has {data.cloud.m} numeric columns")
            name = data.cloud.columns[k] if data.cloud.columns else f"col{k}"
            return name, data.cloud.points[:, k]
        return rest, data.cloud.column(rest)
    if kind == "file":
        path, _, column = rest.rpartition(":")
        if not path:
            raise ConfigError(f"{spec}: expected file:PATH:COLUMN")
        return column, _external_column(Path(path), column, cfg.delimiter, data.distances.n)
    raise ConfigError(f"unknown source {spec!r}; expected col:, file: or stat:")


def _external_column(path: Path, column: str, delimiter: str, n: int) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"filter file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    head = [h.strip() for h in rows[0]]
    if column in head:
        k = head.index(column)
    elif column.isdigit() and int(column) < len(head):
        k = int(column)
    else:
        raise DataError(f"{path}: no column {column!r}")
    values = []
    for r, row in enumerate(rows[1:], start=2):
        try:
            values.append(float(row[k]))
        except (ValueError, IndexError):
            raise DataError(f"{path}: bad value at row {r}, column {k + 1}") from None
    if len(values) != n:
        raise DataError(f"{path}: {len(values)} values for {n} points")
    return np.array(values)


def build_filter(cfg: RunConfig, data: Loaded):
    if not cfg.filter_dims:
        return None, {}
    named = [resolve_source(s, data, cfg) for s in cfg.filter_dims]
    try:
        spec = FilterSpec(
            [v for _, v in named],
            intervals=cfg.filter_r,
            strategy=cfg.filter_strategy,
            cyclic=cfg.cyclic,
        )
    except DataError:
        raise
    except ValueError as exc:
        raise ConfigError(f"filter: {exc}") from None
    fa = discretize(spec)
    attrs = {}
    for k, (name, values) in enumerate(named):
        attrs[f"filter{k}:{name}"] = values.tolist()
        attrs[f"filter{k}_index"] = [fa.cells[c][k] for c in fa.cell_of.tolist()]
    return fa, attrs


# ---------------------------------------------------------------- commands


def _run_dir(cfg: RunConfig, digest: str) -> Path:
    out = Path(cfg.out_dir) / digest
    out.mkdir(parents=True, exist_ok=True)
    return out


def _start_log(out: Path, cfg: RunConfig, digest: str, command: str) -> logging.Handler:
    handler = logging.FileHandler(out / f"{command}.log", mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
    logging.getLogger("stad").addHandler(handler)
    logging.getLogger("stad").setLevel(logging.DEBUG)
    log.info("stad %s %s, config %s", __version__, command, digest)
    log.info("resolved config: %s", json.dumps(cfg.canonical(), sort_keys=True))
    log.info("annealing schedule: %s", json.dumps(cfg.schedule().as_dict(), sort_keys=True))
    return handler


def _meta(cfg: RunConfig, digest: str) -> dict:
    return {
        "config_hash": digest,
        "seed": cfg.seed,
        "schedule": cfg.schedule().as_dict(),
        "filter": {
            "dims": cfg.filter_dims,
            "r": cfg.filter_r,
            "strategy": cfg.filter_strategy,
            "cyclic": cfg.cyclic,
        } if cfg.filter_dims else None,
        "mst_mode": cfg.mst_mode,
        "correlate_against": cfg.correlate_against,
        "metric": cfg.metric,
        "version": __version__,
    }


def _attributes(cfg: RunConfig, data: Loaded, filter_attrs: dict) -> dict:
    attrs = dict(filter_attrs)
    for spec in cfg.attrs:
        name, values = resolve_source(spec, data, cfg)
        attrs[name] = values.tolist()
    return attrs


def _trace_csv(trace, digest: str) -> str:
    return f"# config_hash={digest}\n" + trace.to_csv()


def cmd_run(cfg: RunConfig) -> Path:
    digest = cfg.digest()
    out = _run_dir(cfg, digest)
    handler = _start_log(out, cfg, digest, "run")
    try:
        set_threads(cfg.threads)
        data = load_input(cfg)
        fa, filter_attrs = build_filter(cfg, data)
        t0 = time.perf_counter()
        result = build_network(
            data.distances, fa, cfg.schedule(), cfg.mst_mode, cfg.correlate_against
        )
        log.info(
            "optimum: %d edges added, r=%.6f after %d evaluations (%.2fs); T0=%.6g",
            result.optimization.best_i, result.correlation, result.optimization.evaluations,
            time.perf_counter() - t0, result.optimization.initial_temperature,
        )
        net = to_network(result, data.distances, _meta(cfg, digest), data.labels,
                         _attributes(cfg, data, filter_attrs))
        (out / "trace.csv").write_text(_trace_csv(result.optimization.trace, digest), encoding="utf-8")
        for fmt in cfg.formats:
            if fmt == "svg":
                lay = layout(net, seed=cfg.seed)
                data_svg = render_svg(net, lay, NodeStyle(cfg.size_attr, cfg.color_attr))
                (out / "network.svg").write_bytes(data_svg)
            else:
                (out / f"network.{fmt}").write_bytes(export_graph(net, fmt))
        log.info("wrote %s", ", ".join(sorted(p.name for p in out.iterdir())))
        return out
    finally:
        logging.getLogger("stad").removeHandler(handler)
        handler.close()


def cmd_curve(cfg: RunConfig, stride: int = 1) -> Path:
    digest = cfg.digest()
    out = _run_dir(cfg, digest)
    handler = _start_log(out, cfg, digest, "curve")
    try:
        set_threads(cfg.threads)
        data = load_input(cfg)
        fa, _ = build_filter(cfg, data)
        ctx, _ = prepare(data.distances, fa, cfg.mst_mode, cfg.correlate_against)
        trace = correlation_trace(ctx, stride)
        log.info("curve: %d points, maximum r=%.6f at i=%d", len(trace), trace.best_r, trace.best_i)
        (out / "curve.csv").write_text(_trace_csv(trace, digest), encoding="utf-8")
        (out / "curve.svg").write_bytes(render_trace_svg(trace, note=f"config_hash={digest}"))
        return out
    finally:
        logging.getLogger("stad").removeHandler(handler)
        handler.close()


def cmd_oracle(cfg: RunConfig, cap: int = BRUTE_FORCE_CAP) -> Path:
    digest = cfg.digest()
    out = _run_dir(cfg, digest)
    handler = _start_log(out, cfg, digest, "oracle")
    try:
        set_threads(cfg.threads)
        data = load_input(cfg)
        fa, _ = build_filter(cfg, data)
        ctx, _ = prepare(data.distances, fa, cfg.mst_mode, cfg.correlate_against)
        result = brute_force_optimum(ctx, cap)
        report = {
            "config_hash": digest,
            "best_i": result.best_i,
            "best_r": result.best_r,
            "evaluations": result.evaluations,
            "domain_size": ctx.domain_size,
        }
        (out / "oracle.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        print(json.dumps(report, sort_keys=True))
        return out
    finally:
        logging.getLogger("stad").removeHandler(handler)
        handler.close()


def cmd_export(network: str, formats: list[str], out_dir: Optional[str], seed: int,
               color_attr=None, size_attr=None) -> list[Path]:
    net = read_json(network)
    out = Path(out_dir) if out_dir else Path(network).parent
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(network).stem
    written = []
    for fmt in formats:
        dest = out / f"{stem}.{fmt}"
        if fmt == "svg":
            dest.write_bytes(render_svg(net, layout(net, seed=seed), NodeStyle(size_attr, color_attr)))
        else:
            dest.write_bytes(export_graph(net, fmt))
        written.append(dest)
    return written


# ---------------------------------------------------------------- argparse


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file; flags override it")
    p.add_argument("--input", help="CSV/TSV file, or sample:NAME for a bundled dataset")
    p.add_argument("--input-kind", choices=("points", "distances"))
    p.add_argument("--header", action="store_true", default=None, help="first row holds column names")
    p.add_argument("--labels", action="store_true", default=None, help="first column holds row labels")
    p.add_argument("--delimiter")
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--filter-dim", action="append", metavar="SOURCE",
                   help="filter dimension: col:NAME, file:PATH:COLUMN, stat:row-mean or stat:eccentricity")
    p.add_argument("--filter-r", action="append", type=int, metavar="R", help="intervals per filter dimension")
    p.add_argument("--filter-strategy", action="append", choices=STRATEGIES)
    p.add_argument("--cyclic", action="append", nargs="?", type=int, const=-1, metavar="DIM",
                   help="treat filter dimension DIM (default: all) as cyclic")
    p.add_argument("--mst-mode", choices=MST_MODES)
    p.add_argument("--correlate-against", choices=CORRELATION_TARGETS)
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=int, help="annealing evaluation budget")
    p.add_argument("--initial-temperature", dest="initial_temperature", type=float)
    p.add_argument("--cooling-ratio", dest="cooling_ratio", type=float)
    p.add_argument("--steps-per-temperature", dest="steps_per_temperature", type=int)
    p.add_argument("--step-fraction", dest="step_fraction", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir", help="parent of the per-config run directory (default: runs)")
    p.add_argument("--format", action="append", choices=FORMATS)
    p.add_argument("--attr", action="append", metavar="SOURCE", help="extra node attribute to export")
    p.add_argument("--color-attr")
    p.add_argument("--size-attr")
    p.add_argument("-v", "--verbose", action="count", default=0)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stad", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"stad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="build and export an optimized network"))
    curve = sub.add_parser("curve", help="correlation against number of added edges")
    _common(curve)
    curve.add_argument("--stride", type=int, default=1)
    oracle = sub.add_parser("oracle", help="exhaustive optimum for cross-checking annealing")
    _common(oracle)
    oracle.add_argument("--cap", type=int, default=BRUTE_FORCE_CAP)
    exp = sub.add_parser("export", help="re-export a JSON network")
    exp.add_argument("network")
    exp.add_argument("--format", action="append", choices=[f for f in FORMATS if f != "json"], required=True)
    exp.add_argument("--out-dir")
    exp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    exp.add_argument("--color-attr")
    exp.add_argument("--size-attr")
    exp.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    console = logging.StreamHandler()
    console.setLevel(logging.WARNING - 10 * min(args.verbose, 2))
    console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logging.getLogger("stad").addHandler(console)
    logging.getLogger("stad").propagate = False
    try:
        if args.command == "export":
            for path in cmd_export(args.network, args.format, args.out_dir, args.seed,
                                   args.color_attr, args.size_attr):
                print(path)
            return 0
        cfg = resolve_config(args)
        if args.command == "run":
            print(cmd_run(cfg))
        elif args.command == "curve":
            if args.stride < 1:
                raise ConfigError("--stride must be >= 1")
            print(cmd_curve(cfg, args.stride))
        else:
            print(cmd_oracle(cfg, args.cap))
        return 0
    except (ConfigError, DomainTooLargeError) as exc:
        print(f"stad: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError, KeyError) as exc:
        print(f"stad: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"stad: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        logging.getLogger("stad").removeHandler(console)


if __name__ == "__main__":
    sys.exit(main())
