"""Command-line front end.

    ccfair simulate --rs extremepa --n 100 --m 10000 --runs 10000 --seed 42 --out out/
    ccfair exact    --rs ur --n 2 --m 1 --out out/ [--dump]
    ccfair tiescan  --n 2 --m 10 100 1000 --runs 100000 --seed 1 --out out/
    ccfair sweep    --preset fig3|thm4|oracle [...] --out out/

Exit codes: 0 success, 1 invalid input, 2 capacity exceeded, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import io
from .chain import DEFAULT_STATE_CAP, analyze, enumerate_reachable
from .engine import DEFAULT_MAX_ROUNDS, SimConfig, run_batch, tie_probability_experiment
from .errors import CapacityError, InvalidArgumentError
from .model import ModelParams
from .oracle import compare
from .recommenders import RecommenderKind

log = logging.getLogger("ccfair")

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("simulate", "exact", "tiescan", "sweep")
PRESETS = ("fig3", "thm4", "oracle")
THM4_GRID = (2, 5, 10, 100)
ORACLE_GRID = ((1, 2), (2, 2), (3, 2), (2, 3))  # (m, n)


@dataclass
class ExperimentSpec:
    command: str
    n: int | None = None
    m: list[int] | int | None = None
    rs: str | None = None
    runs: int | None = None
    seed: int = 0
    max_rounds: int = DEFAULT_MAX_ROUNDS
    out: str = "."
    format: str = "csv"
    preset: str | None = None
    strict_fairness: bool = False
    threads: int | None = None
    dump: bool = False
    lumped: bool = False
    cap: int = DEFAULT_STATE_CAP
    grid: list[int] | None = None
    record_time: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidArgumentError(f"unknown spec fields: {', '.join(unknown)}")
        spec = cls(**d)
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise InvalidArgumentError(f"format must be csv or json, got {self.format!r}")
        if self.rs is not None:
            RecommenderKind.from_tag(self.rs)
        if self.runs is not None and self.runs < 1:
            raise InvalidArgumentError("--runs must be >= 1")
        if self.max_rounds < 1:
            raise InvalidArgumentError("--max-rounds must be >= 1")
        if self.threads is not None and self.threads < 1:
            raise InvalidArgumentError("--threads must be >= 1")
        if self.command in ("simulate", "exact"):
            if self.rs is None or self.n is None or self.m is None:
                raise InvalidArgumentError(f"{self.command} needs --rs, --n and --m")
            if isinstance(self.m, list):
                if len(self.m) != 1:
                    raise InvalidArgumentError(f"{self.command} takes a single --m")
                self.m = self.m[0]
            _quiet_params(self.n, self.m)
        if self.command == "simulate" and self.runs is None:
            raise InvalidArgumentError("simulate needs --runs")
        if self.command == "tiescan":
            if self.n is None or not self.m:
                raise InvalidArgumentError("tiescan needs --n and at least one --m")
            if not isinstance(self.m, list):
                self.m = [self.m]
        if self.command == "sweep" and self.preset not in PRESETS:
            raise InvalidArgumentError(
                f"unknown preset {self.preset!r}; available presets: {', '.join(PRESETS)}"
            )

    def echo(self) -> dict:
        """Resolved spec embedded in outputs; output location and thread count
        are left out because they do not affect results."""
        d = dataclasses.asdict(self)
        for k in ("out", "threads", "record_time"):
            d.pop(k)
        return d


def _report_payload(report) -> dict:
    return dataclasses.asdict(report)


def _fairness_rows(report):
    for i, (f, h, c) in enumerate(
        zip(report.cc_fair_freq, report.ci_halfwidths["cc_fair_freq"], report.mean_final_counts), start=1
    ):
        yield [i, f, h, c]


FAIRNESS_HEADER = ["i", "cc_fair_freq", "ci_halfwidth", "mean_final_count"]


def cmd_simulate(spec: ExperimentSpec) -> list[Path]:
    cfg = SimConfig(ModelParams(spec.n, spec.m), spec.rs, spec.runs, spec.seed, spec.max_rounds)
    t0 = time.perf_counter()
    report = run_batch(cfg, threads=spec.threads)
    wall = time.perf_counter() - t0
    out = Path(spec.out)
    payload = {"command": "simulate", "spec": spec.echo(), "report": _report_payload(report)}
    payload["headline_fully_fair"] = (
        report.strict_fully_fair_freq if spec.strict_fairness else report.fully_fair_freq
    )
    if spec.record_time:
        payload["wall_time_s"] = wall
    files = [
        io.write_json(out / "summary.json", payload),
        io.write_table(out / "fairness", FAIRNESS_HEADER, _fairness_rows(report), spec.format),
    ]
    log.info(
        "simulate %s n=%d m=%d: mean_time=%.4f frac_absorbed=%.4f (%.1fs)",
        spec.rs, spec.n, spec.m, report.mean_time, report.frac_absorbed, wall,
    )
    if report.frac_absorbed < 1:
        log.warning("%d runs hit max_rounds=%d", report.runs - report.n_absorbed, spec.max_rounds)
    return files


def cmd_exact(spec: ExperimentSpec) -> list[Path]:
    params = ModelParams(spec.n, spec.m)
    space = enumerate_reachable(params, spec.rs, cap=spec.cap, lumped=spec.lumped)
    an = analyze(space)
    out = Path(spec.out)
    absorption = [
        {"state": int(a), "best": space.states[a].best, "counts": space.states[a].counts, "prob": p}
        for a, p in zip(an.absorbing_indices, an.absorption_dist)
    ]
    if len(absorption) > 1000:
        absorption = sorted(absorption, key=lambda r: -r["prob"])[:50]
    payload = {
        "command": "exact",
        "spec": spec.echo(),
        "n_states": an.n_states,
        "n_absorbing": an.n_absorbing,
        "mu_empty": an.mu_empty,
        "absorption": absorption,
        "exact_fairness": an.exact_fairness,
        "exact_fully_fair": an.exact_fully_fair,
        "exact_strict_fully_fair": an.exact_strict_fully_fair,
        "exact_mean_counts": an.exact_mean_counts,
    }
    files = [io.write_json(out / "exact.json", payload)]
    if spec.dump:
        files.append(
            io.write_csv(
                out / "transitions.csv",
                ["from", "to", "prob"],
                ([i, j, p] for i, row in enumerate(space.rows) for j, p in row),
            )
        )
        files.append(
            io.write_csv(
                out / "states.csv",
                ["state", "best", "counts", "absorbing"],
                (
                    [i, " ".join(map(str, s.best)), " ".join(map(str, s.counts)), bool(an.absorbing[i])]
                    for i, s in enumerate(space.states)
                ),
            )
        )
    log.info("exact %s n=%d m=%d: %d states, mu_empty=%.6f", spec.rs, spec.n, spec.m, an.n_states, an.mu_empty)
    return files


def cmd_tiescan(spec: ExperimentSpec) -> list[Path]:
    runs = spec.runs or 100_000
    rows = tie_probability_experiment(spec.n, spec.m, runs, spec.seed)
    out = Path(spec.out)
    return [
        io.write_table(
            out / "tiescan",
            ["m", "tie_freq", "ci_halfwidth"],
            ([r["m"], r["tie_freq"], r["ci_halfwidth"]] for r in rows),
            spec.format,
        ),
        io.write_json(out / "tiescan_summary.json", {"command": "tiescan", "spec": spec.echo(), "rows": rows}),
    ]


def cmd_sweep(spec: ExperimentSpec) -> list[Path]:
    out = Path(spec.out)
    entries = []
    extra = {}
    if spec.preset == "fig3":
        n, m, runs = spec.n or 100, _single_m(spec, 10_000), spec.runs or 10_000
        for rs in ("extremepa", "pa", "ur"):
            cfg = SimConfig(ModelParams(n, m), rs, runs, spec.seed, spec.max_rounds)
            rep = run_batch(cfg, threads=spec.threads)
            path = io.write_table(out / f"fig3_{rs}", FAIRNESS_HEADER, _fairness_rows(rep), spec.format)
            entries.append({"path": path.name, "config": cfg.as_dict(), "frac_absorbed": rep.frac_absorbed})
    elif spec.preset == "thm4":
        m, runs = _single_m(spec, 10_000), spec.runs or 5_000
        rows = []
        for n in spec.grid or THM4_GRID:
            cfg = SimConfig(ModelParams(n, m), "extremepa", runs, spec.seed, spec.max_rounds)
            rep = run_batch(cfg, threads=spec.threads)
            target = 2 - 1 / n
            rows.append([n, rep.mean_time, rep.ci_halfwidths["mean_time"], target, rep.mean_time - target])
            entries.append({"path": "thm4", "config": cfg.as_dict()})
        path = io.write_table(out / "thm4", ["n", "mean_time", "ci_halfwidth", "target", "deviation"], rows, spec.format)
        for e in entries:
            e["path"] = path.name
    elif spec.preset == "oracle":
        runs = spec.runs or 100_000
        rows = []
        worst = 0.0
        for m, n in ORACLE_GRID:
            for rs in ("ur", "pa", "extremepa"):
                params = _quiet_params(n, m)
                an = analyze(enumerate_reachable(params, rs, cap=spec.cap))
                cfg = SimConfig(params, rs, runs, spec.seed, spec.max_rounds)
                rep = run_batch(cfg, threads=spec.threads)
                for c in compare(rep, an):
                    rows.append([m, n, rs, c.quantity, c.exact, c.estimate, c.sigma, c.z])
                    worst = max(worst, abs(c.z))
                entries.append({"path": "oracle", "config": cfg.as_dict()})
        path = io.write_table(
            out / "oracle", ["m", "n", "rs", "quantity", "exact", "estimate", "sigma", "z"], rows, spec.format
        )
        for e in entries:
            e["path"] = path.name
        extra = {"max_abs_z": worst, "all_within_3sigma": worst <= 3.0}
    manifest = io.write_json(
        out / "manifest.json",
        {"command": "sweep", "preset": spec.preset, "spec": spec.echo(), "files": entries, **extra},
    )
    files = sorted({out / e["path"] for e in entries})
    return files + [manifest]


def _single_m(spec, default):
    if spec.m is None:
        return default
    if isinstance(spec.m, list):
        if len(spec.m) != 1:
            raise InvalidArgumentError("this preset takes a single --m")
        return spec.m[0]
    return spec.m


def _quiet_params(n, m):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return ModelParams(n, m)


HANDLERS = {"simulate": cmd_simulate, "exact": cmd_exact, "tiescan": cmd_tiescan, "sweep": cmd_sweep}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ccfair", description=__doc__.splitlines()[0] if __doc__ else None)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, runs=True):
        sp.add_argument("--n", type=int)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if runs:
            sp.add_argument("--runs", type=int)

    def sim_flags(sp):
        sp.add_argument("--rs", choices=[k.value for k in RecommenderKind])
        sp.add_argument("--max-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--strict-fairness", action="store_true")
        sp.add_argument("--record-time", action="store_true", help="embed wall time (breaks byte-identity)")

    s = sub.add_parser("simulate", help="Monte Carlo batch until absorption")
    common(s)
    sim_flags(s)
    s.add_argument("--m", type=int)

    e = sub.add_parser("exact", help="exact absorbing-chain analysis")
    common(e, runs=False)
    e.add_argument("--rs", choices=[k.value for k in RecommenderKind])
    e.add_argument("--m", type=int)
    e.add_argument("--dump", action="store_true", help="write transitions.csv and states.csv")
    e.add_argument("--lumped", action="store_true", help="treat users as exchangeable")
    e.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)

    t = sub.add_parser("tiescan", help="tie frequency at the maximum after round 1")
    common(t)
    t.add_argument("--m", type=int, nargs="+")

    w = sub.add_parser("sweep", help="preset experiment grids")
    common(w)
    sim_flags(w)
    w.add_argument("--m", type=int)
    w.add_argument("--preset")
    w.add_argument("--grid", type=_int_list, help="comma-separated n values for thm4")
    w.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    d = {k: v for k, v in vars(args).items() if k != "verbose" and v is not None}
    try:
        spec = ExperimentSpec.from_dict(d)
        files = HANDLERS[spec.command](spec)
    except InvalidArgumentError as err:
        print(f"ccfair: error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except CapacityError as err:
        print(f"ccfair: capacity exceeded: {err}", file=sys.stderr)
        return EXIT_CAPACITY
    except OSError as err:
        print(f"ccfair: I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
