"""Command-line entry point: solve, gen, experiment, recurrence, bounds.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for usage, input or domain errors, 3 when an enumeration guard trips.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Sequence, TextIO

from . import bounds, core, exact, mc, models
from .errors import CapacityError, DomainError, InputError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Resolved settings of one invocation; `to_text`/`from_text` round-trip."""

    command: str
    action: str | None = None
    input: str | None = None
    out: str | None = None
    n: int | None = None
    degrees: str | None = None
    p: str | None = None
    c: float | None = None
    targets: int | None = None
    player1_prob: float | None = None
    stages: int | None = None
    seed: int | None = None
    trials: int | None = None
    jobs: int = 1
    k: int | None = None
    l: int | None = None
    j: int | None = None
    digits: int = 12
    oracle: bool = False
    brute_force: bool = False
    json: bool = False

    def to_text(self) -> str:
        return "".join(
            f"{f.name} = {json.dumps(getattr(self, f.name))}\n"
            for f in fields(self)
            if getattr(self, f.name) is not None
        )

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in known:
                raise InputError(f"config line {lineno}: unknown setting {line!r}")
            try:
                values[key] = json.loads(value)
            except json.JSONDecodeError:
                raise InputError(f"config line {lineno}: bad value {value.strip()!r}") from None
        if "command" not in values:
            raise InputError("config has no command")
        return cls(**values)

    def echo(self) -> str:
        return "".join(
            f"# config: {k} = {v}\n" for k, v in asdict(self).items() if v is not None
        )


# ------------------------------------------------------------------ output


class Reporter:
    def __init__(self, stream: TextIO):
        self.stream = stream
        self.failed = False
        self.color = stream.isatty() and "NO_COLOR" not in os.environ

    def line(self, text: str = "") -> None:
        self.stream.write(text + "\n")

    def verdict(self, label: str, ok: bool) -> None:
        word = "PASS" if ok else "FAIL"
        if self.color:
            word = f"\033[{32 if ok else 31}m{word}\033[0m"
        self.line(f"{word} {label}")
        self.failed |= not ok

    def certificate(self, cert: bounds.BoundCertificate, cfg: RunConfig) -> None:
        if cfg.json:
            doc = cert.to_dict()
            doc["config"] = {k: v for k, v in asdict(cfg).items() if v is not None}
            self.line(json.dumps(doc, indent=2, sort_keys=True))
            self.failed |= not cert.passed
            return
        self.line(f"certificate = {cert.name}")
        for k, v in cert.params.items():
            self.line(f"param.{k} = {v}")
        for k, v in cert.quantities.items():
            self.line(f"{k} = {v:.12g}")
        for k, ok in cert.verdicts.items():
            self.verdict(k, ok)


def _set(vertices) -> str:
    return "{" + ", ".join(map(str, sorted(vertices))) + "}"


def _open_out(path: str | None):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _probability(text: str):
    """num/den stays exact; anything else is a float for log-space use."""
    if "." in text or "e" in text.lower():
        try:
            return float(text)
        except ValueError:
            raise InputError(f"bad probability {text!r}") from None
    return exact.parse_rational(text)


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        raise InputError(f"{cfg.command} {cfg.action or ''}: missing {flags}".replace("  ", " "))


def _model_spec(cfg: RunConfig):
    if cfg.action == "const-deg":
        _require(cfg, "degrees")
        return models.DegreeSpec.parse(cfg.degrees, cfg.n)
    if cfg.action == "gnp":
        _require(cfg, "n")
        if (cfg.p is None) == (cfg.c is None):
            raise InputError("gnp needs exactly one of --p and --c")
        extra = {}
        if cfg.player1_prob is not None:
            extra["player1_prob"] = cfg.player1_prob
        if cfg.targets is not None:
            extra["target_count"] = cfg.targets
        if cfg.c is not None:
            return models.GnpSpec.with_log_density(cfg.n, cfg.c, **extra)
        return models.GnpSpec(cfg.n, _probability(cfg.p), **extra)
    if cfg.action == "worst-case":
        _require(cfg, "stages")
        return mc.WorstCaseSpec(cfg.stages)
    raise InputError(f"unknown model {cfg.action!r}")


# ---------------------------------------------------------------- commands


def cmd_solve(cfg: RunConfig, rep: Reporter) -> None:
    if cfg.input in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(cfg.input, encoding="utf-8") as fh:
            text = fh.read()
    mdp = core.parse_mdp(text)
    res = core.classical_buchi(mdp)
    rep.line(f"winning = {_set(res.winning)}")
    rep.line(f"iterations = {res.iterations}")
    rep.line(f"work = {res.work}")
    for i, removed in enumerate(res.removals, start=1):
        rep.line(f"removed[{i}] = {_set(removed)}")
    if cfg.oracle:
        truth = core.oracle_almost_sure(mdp)
        if truth == res.winning:
            rep.line("oracle agrees")
        else:
            rep.line(f"oracle disagrees: oracle = {_set(truth)}")
            rep.failed = True


def cmd_gen(cfg: RunConfig, rep: Reporter) -> None:
    _require(cfg, "seed")
    spec = _model_spec(cfg)
    if isinstance(spec, mc.WorstCaseSpec):
        mdp = core.gen_worst_case(spec.stages)
    else:
        mdp = mc.sample_mdp(spec, cfg.seed, 0, cfg.player1_prob)
    out, close = _open_out(cfg.out)
    # stdout already carries the config echo
    comments = [line[2:] for line in cfg.echo().splitlines()] if close else []
    try:
        out.write(core.format_mdp(mdp, comments))
    finally:
        if close:
            out.close()
    if close:
        rep.line(f"wrote {mdp.n} vertices, {mdp.edge_count} edges to {cfg.out}")


def cmd_experiment(cfg: RunConfig, rep: Reporter) -> None:
    _require(cfg, "seed", "trials")
    spec = _model_spec(cfg)
    summary, records = mc.run_experiment(spec, cfg.trials, cfg.seed, cfg.jobs, cfg.player1_prob)
    if cfg.out:
        out, close = _open_out(cfg.out)
        try:
            mc.write_csv(records, out, cfg.seed, spec, [l[2:] for l in cfg.echo().splitlines()])
        finally:
            if close:
                out.close()
    rep.line(f"model = {spec.model_name} {spec}")
    rep.line(summary.report())


def cmd_recurrence(cfg: RunConfig, rep: Reporter) -> None:
    if cfg.action == "rnp":
        _require(cfg, "n", "p")
        p = exact.parse_rational(cfg.p)
        value = exact.r_np_exact(cfg.n, p)
        rep.line(f"R({cfg.n}, {p}) = {exact.format_rational(value, cfg.digits)}")
        if cfg.brute_force:
            brute = exact.brute_force_r_np(cfg.n, p)
            rep.line(f"brute force = {exact.format_rational(brute, cfg.digits)}")
            rep.verdict("recurrence equals brute force", brute == value)
    elif cfg.action == "alpha":
        _require(cfg, "degrees")
        spec = models.DegreeSpec.parse(cfg.degrees, cfg.n)
        counted = exact.alpha_enumerated(spec)
        total = Fraction(0)
        agree = True
        for k in range(spec.n + 1):
            formula = exact.alpha_k_exact(spec, k) if k >= spec.t else Fraction(0)
            total += formula
            agree &= formula == counted.get(k, Fraction(0))
            if formula:
                rep.line(f"alpha[{k}] = {exact.format_rational(formula, cfg.digits)}")
        rep.verdict("sum of alpha_k equals 1", total == 1)
        rep.verdict("formula alpha_k equals enumerated mass for every k", agree)
    else:
        raise InputError(f"unknown recurrence {cfg.action!r}")


def cmd_bounds(cfg: RunConfig, rep: Reporter) -> None:
    action = cfg.action
    if action == "stirling":
        _require(cfg, "l", "j")
        cert = bounds.stirling_check(cfg.l, cfg.j)
    elif action == "gnp":
        _require(cfg, "n")
        if (cfg.p is None) == (cfg.c is None):
            raise InputError("bounds gnp needs exactly one of --p and --c")
        p = _probability(cfg.p) if cfg.p is not None else cfg.c * math.log(cfg.n) / cfg.n
        cert = bounds.gnp_certificate(cfg.n, p)
    elif action in ("small-k", "large-k", "very-large-k"):
        _require(cfg, "degrees")
        spec = models.DegreeSpec.parse(cfg.degrees, cfg.n)
        if action == "very-large-k":
            _require(cfg, "l")
            cert = bounds.very_large_k_certificate(spec, cfg.l)
        else:
            _require(cfg, "k")
            fn = bounds.small_k_certificate if action == "small-k" else bounds.large_k_certificate
            cert = fn(spec, cfg.k)
    else:
        raise InputError(f"unknown bound {action!r}")
    rep.certificate(cert, cfg)


COMMANDS = {
    "solve": cmd_solve,
    "gen": cmd_gen,
    "experiment": cmd_experiment,
    "recurrence": cmd_recurrence,
    "bounds": cmd_bounds,
}


# ------------------------------------------------------------------ parser


def _model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int)
    p.add_argument("--degrees", help="d:a:t,d:a:t,... for const-deg")
    p.add_argument("--p", help="edge probability, num/den or decimal")
    p.add_argument("--c", type=float, help="gnp density: p = c·ln(n)/n")
    p.add_argument("--targets", type=int, help="Büchi set size (gnp)")
    p.add_argument("--player1-prob", type=float)
    p.add_argument("--stages", type=int, help="worst-case gadget stages")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="load settings from a key = value file")
    common.add_argument("--save-config", default=argparse.SUPPRESS, help="write the resolved settings and continue")
    parser = argparse.ArgumentParser(
        prog="buchiavg", description=__doc__.splitlines()[0], parents=[common]
    )
    sub = parser.add_subparsers(dest="command")

    def add(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    p = add("solve", help="run the classical algorithm on an MDP file")
    p.add_argument("input", nargs="?", help="MDP file, or - for stdin")
    p.add_argument("--oracle", action="store_true", default=None)

    p = add("gen", help="sample an MDP")
    p.add_argument("action", choices=["const-deg", "gnp", "worst-case"], metavar="model")
    _model_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = add("experiment", help="Monte Carlo trials to CSV")
    p.add_argument("--model", dest="action", choices=["const-deg", "gnp", "worst-case"])
    _model_flags(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")

    p = add("recurrence", help="exact recurrences")
    p.add_argument("action", choices=["rnp", "alpha"])
    p.add_argument("--n", type=int)
    p.add_argument("--p")
    p.add_argument("--degrees")
    p.add_argument("--brute-force", action="store_true", default=None)
    p.add_argument("--digits", type=int)

    p = add("bounds", help="evaluate a bound certificate")
    p.add_argument("action", choices=["small-k", "large-k", "very-large-k", "gnp", "stirling"])
    p.add_argument("--n", type=int)
    p.add_argument("--degrees")
    p.add_argument("--p")
    p.add_argument("--c", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--json", action="store_true", default=None)
    return parser


def resolve(argv: Sequence[str] | None = None) -> RunConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    given = {k: v for k, v in vars(args).items() if v is not None}
    base: dict = {}
    if given.get("config"):
        with open(given["config"], encoding="utf-8") as fh:
            base = asdict(RunConfig.from_text(fh.read()))
    known = {f.name for f in fields(RunConfig)}
    merged = {**base, **{k: v for k, v in given.items() if k in known}}
    if not merged.get("command"):
        parser.error("a subcommand is required")
    if base and given.get("command") not in (None, base["command"]):
        parser.error(f"--config holds command {base['command']!r}, not {given['command']!r}")
    cfg = RunConfig(**merged)
    if given.get("save_config"):
        with open(given["save_config"], "w", encoding="utf-8") as fh:
            fh.write(cfg.to_text())
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = resolve(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_USAGE if exc.code else EXIT_OK
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep = Reporter(sys.stdout)
    if not cfg.json:
        rep.stream.write(cfg.echo())
    try:
        COMMANDS[cfg.command](cfg, rep)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InputError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_FAIL if rep.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
