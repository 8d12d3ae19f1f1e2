"""Command-line front end.

Exit codes: 0 success, 1 computation error, 2 usage/parse/config error,
3 calibration diagnostic failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import re
import sys
import tempfile

import numpy as np

from . import __version__
from .calibration import calibration_diagnostic, theorem1_harness
from .empirics import (
    OptimizerConfig,
    default_mixture,
    fit,
    fit_elementary,
    load_dataset,
    murphy_curve,
)
from .errors import ElicitError, ParseError
from .functionals import FunctionalSpec
from .mixtures import MixtureMeasure
from .models import ModelFamily
from .pareto import eta_scan, pareto_filter
from .svg import Figure
from .synthetic import (
    GENERATORS,
    GeneratorSpec,
    generate,
    oracle_b_eta_quadratic,
    oracle_frontier_cubic,
    oracle_frontier_logistic,
)

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE, EXIT_UNCALIBRATED = 0, 1, 2, 3

log = logging.getLogger("elicit")

MODELS = {
    "constant": lambda dim: ModelFamily.constant(),
    "linear": lambda dim: ModelFamily.linear(dim),
    "linear-noint": lambda dim: ModelFamily.linear(dim, intercept=False),
}

# config keys in echo order; output paths are deliberately not echoed
CONFIG_KEYS = (
    "command",
    "data",
    "functional",
    "model",
    "dim",
    "bounds",
    "beta",
    "mixture",
    "eta",
    "eta_grid",
    "optimizer",
    "tolerance",
    "bins",
    "equal_width",
    "z_threshold",
    "candidates",
    "example",
    "n",
    "seed",
    "noise_sd",
)


class UsageError(Exception):
    pass


def _range_spec(text):
    """Values of a ``lo:hi:step`` range, endpoints included."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected lo:hi:step") from None
    if step <= 0 or hi < lo:
        raise UsageError(f"bad range {text!r}; need hi >= lo and step > 0")
    k = int(math.floor((hi - lo) / step + 1e-9))
    return [round(lo + i * step, 12) for i in range(k + 1)]


def _floats(text, what):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {what} {text!r}; expected comma-separated numbers") from None


def _candidate_grid(text):
    axes = []
    for part in text.split(","):
        name, sep, rng = part.partition("=")
        if not sep:
            raise UsageError(f"bad candidate grid {text!r}; expected b0=lo:hi:step,b1=lo:hi:step")
        axes.append(_range_spec(rng))
    return [list(p) for p in itertools.product(*axes)]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


class Output:
    """CSV/JSON text with a '#' metadata header, written atomically."""

    def __init__(self, config):
        self.config = config

    def header(self):
        echo = json.dumps(self.config, sort_keys=True, separators=(",", ":"))
        return f"# elicit {__version__}\n# config: {echo}\n"

    def csv_text(self, columns, rows):
        buf = io.StringIO()
        buf.write(self.header())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def json_text(self, obj):
        return json.dumps({"config": self.config, "result": obj}, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def write_atomic(path, text):
    """Write to a temporary file beside ``path`` and rename it into place."""
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".elicit-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_config(path):
    """A JSON object, or the echoed config line of an earlier output file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    m = re.search(r"^# config: (.*)$", text, flags=re.M)
    try:
        if m:
            return json.loads(m.group(1))
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if isinstance(obj, dict) and "config" in obj and "result" in obj:
        obj = obj["config"]
    if not isinstance(obj, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return obj


def build_parser():
    p = argparse.ArgumentParser(prog="elicit", description="Consistent losses, Murphy curves and calibration checks.")
    p.add_argument("--version", action="version", version=f"elicit {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    p.commands = {}

    def common(sp, data=True):
        sp.add_argument("--config", help="JSON config file or an earlier output file")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--svg", help="also render a plot to this SVG file")
        sp.add_argument("-v", "--verbose", action="store_true")
        p.commands[sp.prog.split()[-1]] = sp
        if data:
            sp.add_argument("--data", help="dataset CSV with columns x1..xd,y")
            sp.add_argument("--functional", help="mean | moment2 | quantile:ALPHA | expectile:TAU")
            sp.add_argument("--model", choices=sorted(MODELS))
            sp.add_argument("--bounds", help='JSON list of [lo, hi] pairs, null for unbounded, e.g. "[[null,null],[0,null]]"')

    sp = sub.add_parser("murphy", help="empirical Murphy curve of one parameter")
    common(sp)
    sp.add_argument("--beta", help="comma-separated parameter vector")
    sp.add_argument("--eta-grid", help="evaluate on lo:hi:step instead of the knot set")

    sp = sub.add_parser("fit", help="minimise a mixture risk, or the elementary risk at --eta")
    common(sp)
    sp.add_argument("--eta", type=float, help="fit the elementary score at this level")
    sp.add_argument("--mixture", help="mixture measure as JSON {\"atoms\": ..., \"segments\": ...}")
    sp.add_argument("--starts", type=int)

    sp = sub.add_parser("scan", help="per-level elementary fits over an eta grid")
    common(sp)
    sp.add_argument("--eta-grid", help="lo:hi:step")
    sp.add_argument("--starts", type=int)

    sp = sub.add_parser("pareto", help="Pareto filter a set of candidate parameters")
    common(sp)
    sp.add_argument("--candidates", help="grid b0=lo:hi:step,b1=lo:hi:step or a CSV file of parameters")
    sp.add_argument("--tol", type=float, help="dominance tolerance (default: half-split standard error)")

    sp = sub.add_parser("calibrate", help="binned calibration diagnostic; exit 3 on failure")
    common(sp)
    sp.add_argument("--beta", help="parameter to check (default: fit, or scan consensus with --eta-grid)")
    sp.add_argument("--eta-grid", help="run the level scan and check its consensus parameter")
    sp.add_argument("--bins", type=int)
    sp.add_argument("--equal-width", action="store_true", default=None)
    sp.add_argument("--z-threshold", type=float)
    sp.add_argument("--csv", help="also write bin_center,standardized_mean to this path")

    sp = sub.add_parser("simulate", help="write a synthetic dataset")
    common(sp, data=False)
    sp.add_argument("--example", choices=GENERATORS)
    sp.add_argument("--n", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--noise-sd", type=float)

    sp = sub.add_parser("oracle", help="analytic per-level parameters of a synthetic example")
    common(sp, data=False)
    sp.add_argument("--example", choices=GENERATORS)
    sp.add_argument("--eta-grid", help="lo:hi:step")
    return p


def _protect_negative_values(argv):
    # let "--eta-grid -1:1:0.5" and "--beta -2,3" through argparse
    out = []
    takes_value = {"--eta-grid", "--beta", "--eta", "--tol", "--candidates", "--noise-sd", "--seed", "--z-threshold"}
    it = iter(argv)
    for a in it:
        if a in takes_value:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-"):
                out.append(f"{a}={nxt}")
            else:
                out.append(a)
                if nxt is not None:
                    out.append(nxt)
        else:
            out.append(a)
    return out


def resolve_config(args):
    """Merge file config and flags; flags win. Returns the echoable dict."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    cfg["command"] = args.command
    flags = {
        "data": "data",
        "functional": "functional",
        "model": "model",
        "eta": "eta",
        "eta_grid": "eta_grid",
        "tol": "tolerance",
        "bins": "bins",
        "equal_width": "equal_width",
        "z_threshold": "z_threshold",
        "candidates": "candidates",
        "example": "example",
        "n": "n",
        "seed": "seed",
        "noise_sd": "noise_sd",
    }
    for attr, key in flags.items():
        v = getattr(args, attr, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "beta", None) is not None:
        cfg["beta"] = _floats(args.beta, "--beta")
    if getattr(args, "bounds", None) is not None:
        try:
            cfg["bounds"] = json.loads(args.bounds)
        except json.JSONDecodeError:
            raise UsageError(f"--bounds is not valid JSON: {args.bounds!r}") from None
    if getattr(args, "mixture", None) is not None:
        try:
            cfg["mixture"] = json.loads(args.mixture)
        except json.JSONDecodeError:
            raise UsageError(f"--mixture is not valid JSON: {args.mixture!r}") from None
    opt = OptimizerConfig.from_json(cfg.get("optimizer"))
    if getattr(args, "starts", None) is not None:
        opt = OptimizerConfig.from_json({**opt.to_json(), "starts": args.starts})
    cfg["optimizer"] = opt.to_json()
    unknown = set(cfg) - set(CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return {k: cfg[k] for k in CONFIG_KEYS if k in cfg and cfg[k] is not None}


def _need(cfg, *keys):
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


class Run:
    """Typed view of a resolved config."""

    def __init__(self, cfg):
        self.cfg = cfg
        try:
            self.spec = FunctionalSpec.parse(cfg.get("functional", "mean"))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        self.opt = OptimizerConfig.from_json(cfg.get("optimizer"))
        self._data = None

    @property
    def data(self):
        if self._data is None:
            _need(self.cfg, "data")
            try:
                self._data = load_dataset(self.cfg["data"])
            except OSError as exc:
                raise UsageError(f"cannot read data: {exc}") from None
        return self._data

    @property
    def family(self):
        _need(self.cfg, "model")
        if self.cfg["model"] not in MODELS:
            raise UsageError(f"unknown model {self.cfg['model']!r}; expected one of {sorted(MODELS)}")
        dim = self.cfg.get("dim") or (self.data.d if self.cfg["model"] != "constant" else 1)
        fam = MODELS[self.cfg["model"]](dim)
        if "bounds" in self.cfg:
            try:
                fam = ModelFamily.from_json({**fam.to_json(), "bounds": self.cfg["bounds"]})
            except (ValueError, TypeError) as exc:
                raise UsageError(f"bad bounds: {exc}") from None
        return fam

    @property
    def beta(self):
        _need(self.cfg, "beta")
        return np.array(self.cfg["beta"], dtype=float)

    @property
    def eta_grid(self):
        _need(self.cfg, "eta_grid")
        return _range_spec(self.cfg["eta_grid"])


def cmd_murphy(run, args):
    fam, data = run.family, run.data
    z = fam.predict(run.beta, data.x)
    curve = murphy_curve(run.spec, z, data.y)
    if "eta_grid" in run.cfg:
        pts = np.array(run.eta_grid)
        left, right = curve.evaluate(pts)
    else:
        pts, left, right = curve.knots, curve.value_at, curve.value_right
    text = Output(run.cfg).csv_text(["eta", "value", "value_right"], zip(pts, left, right))
    fig = Figure("Murphy curve", "eta", "mean elementary score").line(pts, left, label=f"beta={list(run.beta)}")
    return text, fig, EXIT_OK


def cmd_fit(run, args):
    fam, data = run.family, run.data
    if "eta" in run.cfg:
        res = fit_elementary(run.spec, run.cfg["eta"], fam, data, run.opt)
    else:
        H = MixtureMeasure.from_json(run.cfg["mixture"]) if "mixture" in run.cfg else default_mixture(data)
        res = fit(run.spec, H, fam, data, run.opt)
    return Output(run.cfg).json_text(res.to_json()), None, EXIT_OK


def _scan_rows(fam, results):
    cols = ["eta", *fam.param_names, "objective", "elementary_objective", "converged", "interval_lo", "interval_hi", "window"]
    rows = []
    for eta, r in results:
        iv = r.minimizer_interval or (None, None)
        elem = r.info.get("elementary_objective", r.objective if r.info.get("eta_window", 0) == 0 else None)
        rows.append([eta, *r.beta, r.objective, elem, r.converged, iv[0], iv[1], r.info.get("eta_window")])
    return cols, rows


def cmd_scan(run, args):
    fam = run.family
    results = eta_scan(run.spec, fam, run.data, run.eta_grid, run.opt)
    cols, rows = _scan_rows(fam, results)
    failed = [r.info["error"] for _, r in results if "error" in r.info]
    for msg in failed:
        log.warning("scan level failed: %s", msg)
    fig = Figure("Per-level fits", "eta", "parameter")
    etas = [e for e, _ in results]
    for k, name in enumerate(fam.param_names):
        fig.line(etas, [r.representative[k] for _, r in results], label=name)
    code = EXIT_COMPUTE if len(failed) == len(results) else EXIT_OK
    return Output(run.cfg).csv_text(cols, rows), fig, code


def _read_candidates(text, n_params):
    if os.path.exists(text):
        with open(text, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(l for l in fh if not l.lstrip().startswith("#")) if r]
        body = rows[1:] if rows and not _is_number(rows[0][0]) else rows
        try:
            cands = [[float(v) for v in r[:n_params]] for r in body]
        except ValueError as exc:
            raise ParseError(f"{text}: {exc}") from None
    else:
        cands = _candidate_grid(text)
    if not cands or any(len(c) != n_params for c in cands):
        raise UsageError(f"candidates must have {n_params} coordinates each")
    return cands


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def cmd_pareto(run, args):
    fam, data = run.family, run.data
    _need(run.cfg, "candidates")
    cands = _read_candidates(run.cfg["candidates"], fam.n_params)
    curves = [murphy_curve(run.spec, fam.predict(np.array(b), data.x), data.y, refinement=0) for b in cands]
    result = pareto_filter(list(zip(cands, curves)), run.cfg.get("tolerance"))
    cols = [*fam.param_names, "status", "dominator"]
    rows = [[*beta, status, dom] for beta, status, dom in result.rows()]
    text = Output(run.cfg).csv_text(cols, rows)
    text = text.replace("# config:", f"# tolerance: {result.tolerance!r}\n# config:", 1)
    fig = None
    if fam.n_params >= 2:
        fig = Figure("Pareto filter", fam.param_names[0], fam.param_names[1])
        dom = [e.beta for e in result.entries if not e.optimal]
        opt = [e.beta for e in result.entries if e.optimal]
        if dom:
            fig.points([b[0] for b in dom], [b[1] for b in dom], color="#bbbbbb", label="dominated")
        fig.points([b[0] for b in opt], [b[1] for b in opt], color="#1f4e9c", label="Pareto optimal")
    return text, fig, EXIT_OK


def cmd_calibrate(run, args):
    fam, data = run.family, run.data
    bins = int(run.cfg.get("bins", 10))
    z = float(run.cfg.get("z_threshold", 3.0))
    extra = {}
    if "beta" in run.cfg:
        beta = run.beta
        source = "given"
    elif "eta_grid" in run.cfg:
        h = theorem1_harness(run.spec, fam, data, run.eta_grid, run.opt, bins=bins, z_threshold=z)
        beta = h.consensus
        source = f"scan-{h.consensus_method}"
        extra = {"spread": h.spread, "applicable": h.applicable}
    else:
        beta = fit(run.spec, default_mixture(data), fam, data, run.opt).beta
        source = "fit"
    report = calibration_diagnostic(
        run.spec, fam.predict(beta, data.x), data.y, bins=bins, z_threshold=z, equal_width=bool(run.cfg.get("equal_width"))
    )
    out = {"beta": [float(b) for b in beta], "beta_source": source, **report.to_json(), **extra}
    if getattr(args, "csv", None):
        write_atomic(args.csv, Output(run.cfg).header() + report.to_csv())
    fig = Figure("Standardised calibration violations", "bin centre", "standardised mean")
    fig.bars([b.center for b in report.bins], [b.standardized for b in report.bins])
    fig.hline(report.z_threshold, label=f"threshold {report.z_threshold:g}")
    return Output(run.cfg).json_text(out), fig, EXIT_OK if report.passed else EXIT_UNCALIBRATED


def cmd_simulate(run, args):
    _need(run.cfg, "example", "n")
    try:
        gspec = GeneratorSpec(run.cfg["example"], int(run.cfg["n"]), int(run.cfg.get("seed", 0)), run.cfg.get("noise_sd"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = generate(gspec)
    text = Output(run.cfg).csv_text(["x1", "y"], zip(data.x[:, 0], data.y))
    fig = Figure(f"{gspec.kind} sample", "x1", "y").points(data.x[:2000, 0], data.y[:2000])
    return text, fig, EXIT_OK


def cmd_oracle(run, args):
    _need(run.cfg, "example")
    kind = run.cfg["example"]
    rows = []
    for eta in run.eta_grid:
        if kind == "quadratic":
            rows.extend([eta, b] for b in oracle_b_eta_quadratic(eta))
        else:
            oracle = oracle_frontier_logistic if kind == "logistic" else oracle_frontier_cubic
            try:
                rows.append([eta, *oracle(eta)])
            except ElicitError as exc:
                log.warning("eta=%g skipped: %s", eta, exc)
    cols = ["eta", "beta1"] if kind == "quadratic" else ["eta", "beta0", "beta1"]
    fig = Figure(f"{kind} frontier", "eta", "parameter")
    for k, name in enumerate(cols[1:], start=1):
        fig.points([r[0] for r in rows], [r[k] for r in rows], label=name)
    return Output(run.cfg).csv_text(cols, rows), fig, EXIT_OK


COMMANDS = {
    "murphy": cmd_murphy,
    "fit": cmd_fit,
    "scan": cmd_scan,
    "pareto": cmd_pareto,
    "calibrate": cmd_calibrate,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
}


def main(argv=None):
    parser = build_parser()
    argv = _protect_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        text, fig, code = COMMANDS[args.command](Run(cfg), args)
    except (UsageError, ParseError) as exc:
        print(f"elicit {args.command}: {exc}", file=sys.stderr)
        parser.commands[args.command].print_usage(sys.stderr)
        return EXIT_USAGE
    except (ElicitError, ValueError, ArithmeticError) as exc:
        print(f"elicit {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    write_atomic(args.out, text)
    if args.svg and fig is not None:
        write_atomic(args.svg, fig.render())
    return code


if __name__ == "__main__":
    sys.exit(main())
