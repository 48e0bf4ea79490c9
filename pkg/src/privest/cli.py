"""Command-line front end.

Usage::

    privest <command> [--config FILE] [--seed N] [--out PATH] [--format csv|json] [--threads N]
    privest experiment <name> --config FILE ...

The config file is INI text (``[section]`` headers, ``key = value`` lines,
``#`` or ``;`` comments).  Sections and keys are fixed; anything unknown is
rejected.  Run ``privest --help`` for the full key list with defaults.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import experiments as ex
from .distributions import SampleData, UniformShift, draw_sample, model_from_record
from .errors import ParseError, PrivestError, ValidationError
from .functionals import functional_from_record, gamma_n, gc_radius
from .mechanisms import (
    ExponentialMechanism,
    PlugIn,
    SmoothLaplace,
    ZeroNoise,
    exp_mech_sample,
)
from .mestimation import (
    SignMedian,
    SmoothnessSpec,
    UniformPrior,
    estimate_sample_size,
    exp_mech_sample_size_terms,
    ges_bound_from_smoothness,
    prior_from_record,
    psi_from_record,
    sign_median_uniform_smoothness,
)
from .seeding import derive_rng
from .sensitivity import (
    PrivacyParams,
    privacy_error_term,
    smooth_sensitivity,
    smooth_sensitivity_bound,
)

COMMANDS = ("estimate", "sensitivity", "bounds", "audit", "experiment")
EXPERIMENTS = ("convergence", "contamination", "range", "smooth_coverage", "exp_coverage", "audit_calibration", "rate")
MECHANISMS = ("smooth-laplace", "exponential", "plug-in")

# section -> key -> default (None: optional, no default)
KEYS = {
    "run": {"command": None, "experiment": None, "seed": "0", "output_path": "-", "output_format": "csv", "threads": "1"},
    "distribution": {"kind": None, "gamma": None, "points": None, "weights": None, "x": None,
                     "lower": None, "upper": None, "contaminations": None},
    "functional": {"name": None, "p": None, "trim": None, "g": None, "range_lower": None, "range_upper": None},
    "psi": {"kind": None, "scale": None, "c": None},
    "prior": {"kind": None, "lo": None, "hi": None},
    "privacy": {"alpha": None, "delta": "0", "mechanism": "smooth-laplace", "beta": None, "z_stub": "false"},
    "experiment": {"n": None, "n_list": None, "trials": "1000", "eta": "0.1", "eps": None, "grid_size": "1024",
                   "R": None, "gamma_grid": None, "bins": "20", "reruns": "50", "ratio_limit": "2.0",
                   "noise_stub": "false", "smoothness": None},
    "data": {"values": None, "n": None, "lower": None, "upper": None, "replace_index": "0", "replace_value": None},
}
DEFAULTED_SECTIONS = ("run", "privacy", "experiment")


@dataclass
class RunConfig:
    command: str
    experiment: Optional[str]
    sections: dict  # section -> {key: raw string}, defaults filled
    defaulted: tuple  # "section.key" entries filled from defaults
    root_seed: int
    output_path: str
    output_format: str
    threads: int
    present: frozenset = field(default_factory=frozenset)  # sections given in the file

    def echo(self) -> dict:
        return {
            "command": self.command,
            "experiment": self.experiment,
            "sections": {s: dict(sorted(v.items())) for s, v in sorted(self.sections.items())},
            "defaults_used": list(self.defaulted),
            "root_seed": self.root_seed,
            "output_format": self.output_format,
        }

    def get(self, section: str, key: str):
        return self.sections.get(section, {}).get(key)

    def require(self, section: str, key: str) -> str:
        value = self.get(section, key)
        if value is None:
            raise ValidationError(f"{section}.{key}", f"required for {self.command}")
        return value

    def num(self, section, key, cast=float, required=False):
        raw = self.require(section, key) if required else self.get(section, key)
        if raw is None:
            return None
        try:
            return cast(raw)
        except ValueError:
            raise ValidationError(f"{section}.{key}", f"cannot parse {raw!r}") from None

    def flag(self, section, key) -> bool:
        raw = (self.get(section, key) or "false").lower()
        if raw not in ("true", "false", "1", "0", "yes", "no"):
            raise ValidationError(f"{section}.{key}", f"expected true or false, got {raw!r}")
        return raw in ("true", "1", "yes")

    def int_list(self, section, key):
        raw = self.require(section, key)
        try:
            return [int(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"{section}.{key}", f"expected comma-separated integers, got {raw!r}") from None

    def float_list(self, section, key):
        raw = self.get(section, key)
        if raw is None:
            return None
        try:
            return [float(v) for v in raw.split(",") if v.strip()]
        except ValueError:
            raise ValidationError(f"{section}.{key}", f"expected comma-separated numbers, got {raw!r}") from None


def _read_ini(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("expected a [section] header", exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ParseError(exc.message.split(": ", 1)[-1], exc.lineno) from None
    except configparser.ParsingError as exc:
        line, content = exc.errors[0]
        raise ParseError(f"cannot parse {content!r}", line) from None
    return parser


def parse_config(
    text: str,
    command: Optional[str] = None,
    experiment: Optional[str] = None,
    seed: Optional[int] = None,
    output_path: Optional[str] = None,
    output_format: Optional[str] = None,
    threads: Optional[int] = None,
) -> RunConfig:
    """Parse and validate config text; command-line values override the file."""
    parser = _read_ini(text)
    sections, defaulted = {}, []
    for name in parser.sections():
        if name not in KEYS:
            raise ValidationError(name, "unknown section")
        for key in parser[name]:
            if key not in KEYS[name]:
                raise ValidationError(f"{name}.{key}", "unknown key")
        sections[name] = dict(parser[name])
    present = frozenset(sections)
    overrides = {"seed": seed, "output_path": output_path, "output_format": output_format, "threads": threads}
    run = sections.setdefault("run", {})
    for key, value in overrides.items():
        if value is not None:
            run[key] = str(value)
    for name in DEFAULTED_SECTIONS:
        sec = sections.setdefault(name, {})
        for key, default in KEYS[name].items():
            if default is not None and key not in sec:
                sec[key] = default
                defaulted.append(f"{name}.{key}")

    command = command or run.get("command")
    experiment = experiment or run.get("experiment")
    if command not in COMMANDS:
        raise ValidationError("command", f"expected one of {', '.join(COMMANDS)}, got {command!r}")
    if command == "experiment" and experiment not in EXPERIMENTS:
        raise ValidationError("experiment", f"expected one of {', '.join(EXPERIMENTS)}, got {experiment!r}")

    fmt = run["output_format"]
    if fmt not in ("csv", "json"):
        raise ValidationError("run.output_format", f"expected csv or json, got {fmt!r}")
    try:
        root_seed = int(run["seed"])
    except ValueError:
        raise ValidationError("run.seed", f"expected an integer, got {run['seed']!r}") from None
    if not 0 <= root_seed < 2**64:
        raise ValidationError("run.seed", "seed must be an unsigned 64-bit integer")
    try:
        nthreads = int(run["threads"])
    except ValueError:
        raise ValidationError("run.threads", f"expected an integer, got {run['threads']!r}") from None
    if nthreads < 1:
        raise ValidationError("run.threads", "need at least one thread")

    cfg = RunConfig(command, experiment if command == "experiment" else None, sections, tuple(defaulted),
                    root_seed, run["output_path"], fmt, nthreads, present)
    _validate_privacy(cfg)
    return cfg


def _validate_privacy(cfg: RunConfig) -> None:
    mech = cfg.get("privacy", "mechanism")
    if mech not in MECHANISMS:
        raise ValidationError("privacy.mechanism", f"expected one of {', '.join(MECHANISMS)}, got {mech!r}")
    alpha = cfg.num("privacy", "alpha")
    delta = cfg.num("privacy", "delta")
    if alpha is not None:
        PrivacyParams(alpha, delta)
    uses_smooth = cfg.command in ("estimate", "audit") or (cfg.command == "experiment" and cfg.experiment in (
        "convergence", "contamination", "smooth_coverage", "audit_calibration"))
    if mech == "smooth-laplace" and uses_smooth and delta == 0.0:
        raise ValidationError("privacy.delta", "beta(alpha, delta) is undefined at delta = 0; smooth-laplace needs delta > 0")
    if mech == "exponential" and delta != 0.0:
        raise ValidationError("privacy.delta", "the exponential mechanism is pure alpha-DP; set delta = 0")


# builders

def _distribution(cfg: RunConfig):
    if "distribution" not in cfg.present:
        raise ValidationError("distribution", f"section required for {cfg.command}")
    return model_from_record(cfg.sections["distribution"])


def _functional(cfg: RunConfig):
    if "functional" not in cfg.present:
        raise ValidationError("functional", f"section required for {cfg.command}")
    return functional_from_record(cfg.sections["functional"])


def _psi(cfg: RunConfig):
    if "psi" not in cfg.present:
        return SignMedian()
    return psi_from_record(cfg.sections["psi"])


def _prior(cfg: RunConfig, fallback=None):
    if "prior" not in cfg.present:
        if fallback is None:
            raise ValidationError("prior", f"section required for {cfg.command}")
        return fallback
    return prior_from_record(cfg.sections["prior"])


def _params(cfg: RunConfig) -> PrivacyParams:
    return PrivacyParams(cfg.num("privacy", "alpha", required=True), cfg.num("privacy", "delta"))


def _mechanism(cfg: RunConfig, prior_fallback=None):
    kind = cfg.get("privacy", "mechanism")
    if kind == "plug-in":
        return PlugIn(_functional(cfg))
    if kind == "smooth-laplace":
        return SmoothLaplace(_functional(cfg), _params(cfg))
    grid = cfg.num("experiment", "grid_size", int)
    return ExponentialMechanism(_psi(cfg), _prior(cfg, prior_fallback), _params(cfg), grid, refine=True)


def _data(cfg: RunConfig) -> SampleData:
    if "data" not in cfg.present:
        raise ValidationError("data", f"section required for {cfg.command}")
    lower, upper = cfg.num("data", "lower"), cfg.num("data", "upper")
    values = cfg.float_list("data", "values")
    if values is not None:
        if lower is None or upper is None:
            if "distribution" not in cfg.present:
                raise ValidationError("data.lower", "give lower and upper, or a distribution to take the domain from")
            lower, upper = _distribution(cfg).domain
        return SampleData.from_values(values, (lower, upper), {"source": "config"})
    n = cfg.num("data", "n", int)
    if n is None:
        raise ValidationError("data.values", "give values or n (to draw from the distribution)")
    return draw_sample(_distribution(cfg), n, derive_rng(cfg.root_seed, "data"))


def _smoothness(cfg: RunConfig, psi, F) -> SmoothnessSpec:
    raw = cfg.float_list("experiment", "smoothness")
    if raw is not None:
        if len(raw) != 4:
            raise ValidationError("experiment.smoothness", "expected r1,r2,lambda1,lambda2")
        return SmoothnessSpec(*raw)
    if isinstance(psi, SignMedian) and isinstance(F, UniformShift):
        return sign_median_uniform_smoothness()
    raise ValidationError("experiment.smoothness", "required unless psi is sign_median on a uniform shift")


# commands

@dataclass
class Result:
    records: list
    privacy: dict
    verdict: Optional[str] = None
    report: Optional[ex.ExperimentReport] = None
    summary: str = ""


def _privacy_echo(cfg: RunConfig) -> dict:
    return {"alpha": cfg.num("privacy", "alpha"), "delta": cfg.num("privacy", "delta"),
            "mechanism": cfg.get("privacy", "mechanism")}


def cmd_estimate(cfg: RunConfig) -> Result:
    sample = _data(cfg)
    kind = cfg.get("privacy", "mechanism")
    params = _params(cfg)
    noise = ZeroNoise() if cfg.flag("privacy", "z_stub") else derive_rng(cfg.root_seed, "estimate")
    if kind == "smooth-laplace":
        est = SmoothLaplace(_functional(cfg), params).release(sample, noise)
    elif kind == "exponential":
        grid = cfg.num("experiment", "grid_size", int)
        est = exp_mech_sample(_psi(cfg), sample, params, _prior(cfg), noise, grid, refine=True)
    else:
        T = _functional(cfg)
        v = T.evaluate(sample)
        rec = {**_privacy_echo(cfg), "value": v, "nonprivate_value": v, "noise_scale": None, "seed": cfg.root_seed}
        return Result([rec], _privacy_echo(cfg), summary=f"estimate: plug-in value {v!r} (not private)")
    rec = est.to_record()
    rec["seed"] = cfg.root_seed
    rec["z"] = est.z
    rec["grid_size"] = est.grid_size
    return Result([rec], _privacy_echo(cfg), summary=f"estimate: {est.mechanism} value {est.value!r} n={sample.n}")


def cmd_sensitivity(cfg: RunConfig) -> Result:
    sample = _data(cfg)
    T = _functional(cfg)
    beta = cfg.num("privacy", "beta")
    if beta is None:
        beta = _params(cfg).beta
    res = smooth_sensitivity(T, sample, beta)
    rec = {**_privacy_echo(cfg), "n": sample.n, "local": res.local, "smooth": res.smooth, "beta": res.beta,
           "method": res.method, "k_star": res.k_star, "capped": res.capped}
    return Result([rec], _privacy_echo(cfg), summary=f"sensitivity: local={res.local!r} smooth={res.smooth!r}")


def cmd_bounds(cfg: RunConfig) -> Result:
    n = cfg.num("experiment", "n", int, required=True)
    eta = cfg.num("experiment", "eta")
    alpha = cfg.num("privacy", "alpha", required=True)
    delta = cfg.num("privacy", "delta")
    records = []

    def add(name, value, note=""):
        records.append({**_privacy_echo(cfg), "quantity": name, "value": value, "note": note})

    add("gc_radius", gc_radius(n, eta))
    if alpha < math.log(2.0) / 2.0:
        add("contamination_radius", ex.contamination_radius(n, alpha))
    if "functional" in cfg.present and "distribution" in cfg.present:
        T, F = _functional(cfg), _distribution(cfg)
        R = T.range_length(F.domain)
        prof = gamma_n(T, F, n, eta)
        add("gamma_n", prof.gamma_n, prof.method)
        add("range_length", R)
        if delta > 0:
            params = PrivacyParams(alpha, delta)
            add("beta", params.beta)
            add("smooth_sensitivity_bound", smooth_sensitivity_bound(R, prof.gamma_n, n, params.beta, eta))
            if eta < 0.25:
                add("privacy_error_term", privacy_error_term(R, prof.gamma_n, n, params, eta))
        add("range_error_threshold", ex.range_error_threshold(R, n, alpha))
    eps = cfg.num("experiment", "eps")
    if eps is not None and "distribution" in cfg.present:
        psi, F = _psi(cfg), _distribution(cfg)
        ctx = ges_bound_from_smoothness(psi, F, _smoothness(cfg, psi, F))
        n_eps2 = estimate_sample_size(psi, F, ctx.eps2, eta, cfg.num("experiment", "trials", int), cfg.root_seed)
        prior = _prior(cfg)
        terms = exp_mech_sample_size_terms(ctx, prior, eps, eta, alpha, n_eps2.n)
        add("ges_bound", ctx.ges_bound, "K / |Psi'(F, T(F))|")
        add("exp_mech_baseline", terms["baseline"])
        add("exp_mech_n_eps2_eta", terms["n_eps2_eta"], "monte carlo")
        add("exp_mech_prior_term", terms["prior_term"], f"case {terms['case']}")
        add("exp_mech_sample_size", math.ceil(max(terms["baseline"], terms["n_eps2_eta"], terms["prior_term"])))
    return Result(records, _privacy_echo(cfg), summary=f"bounds: {len(records)} quantities at n={n}")


def cmd_audit(cfg: RunConfig) -> Result:
    D = _data(cfg)
    idx = cfg.num("data", "replace_index", int)
    value = cfg.num("data", "replace_value")
    D_prime = D.replace(idx, D.domain[1] if value is None else value)
    mech = _mechanism(cfg)
    params = _params(cfg)
    rep = ex.dp_audit(mech, D, D_prime, cfg.num("experiment", "bins", int), cfg.num("experiment", "trials", int),
                      params, cfg.root_seed)
    return _from_report(rep)


def cmd_experiment(cfg: RunConfig) -> Result:
    name = cfg.experiment
    seed = cfg.root_seed
    trials = cfg.num("experiment", "trials", int)
    threads = cfg.threads
    if name == "convergence":
        rep = ex.convergence_curve(_mechanism(cfg), _distribution(cfg), cfg.int_list("experiment", "n_list"),
                                   trials, seed, cfg.num("experiment", "ratio_limit"), threads)
    elif name == "contamination":
        F = _distribution(cfg)
        rep = ex.contamination_lower_bound_check(_functional(cfg), F, _mechanism(cfg, UniformPrior(*F.domain)),
                                        cfg.num("experiment", "n", int, required=True),
                                        cfg.num("privacy", "alpha", required=True), trials, seed)
    elif name == "range":
        R = cfg.num("experiment", "R", required=True)
        grid = cfg.float_list("experiment", "gamma_grid")
        if grid is None:
            grid = list(np.linspace(-R, R, 11))
        mech = _mechanism(cfg, UniformPrior(-R, R))
        rep = ex.range_lower_bound_check(R, mech, cfg.num("experiment", "n", int, required=True),
                                  cfg.num("privacy", "alpha", required=True), grid, trials, seed, threads)
    elif name == "smooth_coverage":
        rep = ex.smooth_laplace_coverage(_functional(cfg), _distribution(cfg), cfg.int_list("experiment", "n_list"), _params(cfg),
                               cfg.num("experiment", "eta"), trials, seed,
                               noise_stub=cfg.flag("experiment", "noise_stub"), threads=threads)
    elif name == "exp_coverage":
        psi, F = _psi(cfg), _distribution(cfg)
        ctx = ges_bound_from_smoothness(psi, F, _smoothness(cfg, psi, F))
        rep = ex.exp_mech_coverage(psi, F, _prior(cfg), cfg.num("experiment", "eps", required=True),
                               cfg.num("experiment", "eta"), cfg.num("privacy", "alpha", required=True), ctx, trials,
                               seed, n=cfg.num("experiment", "n", int),
                               grid_size=cfg.num("experiment", "grid_size", int))
    elif name == "audit_calibration":
        D = _data(cfg)
        idx = cfg.num("data", "replace_index", int)
        value = cfg.num("data", "replace_value")
        D_prime = D.replace(idx, D.domain[1] if value is None else value)
        rep = ex.audit_false_positive_rate(_mechanism(cfg), D, D_prime, cfg.num("experiment", "bins", int), trials,
                                           _params(cfg), seed, cfg.num("experiment", "reruns", int))
    else:  # rate
        rep = ex.nonprivate_rate(_psi(cfg), _distribution(cfg), cfg.int_list("experiment", "n_list"), trials, seed)
    return _from_report(rep)


def _from_report(rep: ex.ExperimentReport) -> Result:
    return Result([], rep.privacy, rep.verdict, rep, rep.summary())


DISPATCH = {"estimate": cmd_estimate, "sensitivity": cmd_sensitivity, "bounds": cmd_bounds,
            "audit": cmd_audit, "experiment": cmd_experiment}


# output

def _records_csv(records: list) -> str:
    keys = []
    for rec in records:
        keys.extend(k for k in rec if k not in keys)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(keys)
    for rec in records:
        writer.writerow([ex._fmt(rec.get(k)) for k in keys])
    return buf.getvalue()


def render(cfg: RunConfig, result: Result) -> str:
    if result.report is not None:
        rep = result.report
        rep.config_echo = {"config": cfg.echo(), "call": rep.config_echo}
        return rep.to_csv() if cfg.output_format == "csv" else rep.to_json()
    if cfg.output_format == "csv":
        return _records_csv(result.records)
    doc = {"schema": ex.SCHEMA, **result.privacy, "command": cfg.command, "root_seed": cfg.root_seed,
           "config_echo": cfg.echo(), "records": result.records}
    return json.dumps(ex._jsonable(doc), indent=2) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".privest-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a parsed config; returns (exit status, summary line)."""
    result = DISPATCH[cfg.command](cfg)
    text = render(cfg, result)
    if cfg.output_path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        write_atomic(cfg.output_path, text)
    status = 2 if result.verdict == "fail" else 0
    return status, result.summary


def _key_listing() -> str:
    lines = ["config keys (section.key = default):"]
    for section, keys in KEYS.items():
        for key, default in keys.items():
            lines.append(f"  {section}.{key} = {default if default is not None else '(unset)'}")
    lines.append("experiments: " + ", ".join(EXPERIMENTS))
    lines.append("mechanisms: " + ", ".join(MECHANISMS))
    lines.append("exit status: 0 success, 2 experiment or audit verdict fail, 1 error")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privest",
        description="Private robust estimators: releases, sensitivities, bounds, audits and experiments.",
        epilog=_key_listing(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS, help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("experiment", nargs="?", help="experiment name (command 'experiment' only)")
    parser.add_argument("--config", help="INI config file (default: empty config)")
    parser.add_argument("--seed", type=int, help="root seed, unsigned 64-bit (overrides run.seed; default 0)")
    parser.add_argument("--out", help="output path, '-' for stdout (overrides run.output_path; default -)")
    parser.add_argument("--format", choices=("csv", "json"), help="report format (overrides run.output_format; default csv)")
    parser.add_argument("--threads", type=int, help="worker threads for experiments (overrides run.threads; default 1)")
    return parser


def _error_record(exc: BaseException) -> str:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("field", "line"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = getattr(exc, attr)
    return json.dumps(rec)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, args.command, args.experiment, args.seed, args.out, args.format, args.threads)
        status, summary = run(cfg)
    except (PrivestError, OSError, ValueError) as exc:
        print(_error_record(exc), file=sys.stderr)
        return 1
    print(summary, file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
