"""Command-line front end.

    defectors run --case all --preset desk --seed 7 --out results/
    defectors validate-payoffs
    defectors inspect-chromosome 000000000000000000

Settings are layered: built-in defaults < ``--preset`` < ``--config`` file
(flat ``key = value`` lines, keys named like the long flags) < flags.
``DF_SEED`` supplies the seed when neither a flag nor the config file does.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import experiment as ex
from .evolution import EvolutionConfig, SelectionScope
from .game import DilemmaKind, classify_dilemma, payoff_matrix_from
from .strategy import (DEFAULT_THRESHOLDS, classify, cooperation_fraction, decode_hex)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

CSV_HEADER = ("generation,frac_cooperator,frac_defector,frac_top_defector,frac_neutral,"
              "fitness_mean,fitness_max,fitness_min")

PRESETS = {
    "desk": {"grid": "20x20", "generations": "300", "rounds": "50", "runs": "5"},
}

_RUN_KEYS = ("case", "grid", "generations", "rounds", "runs", "seed", "crossover",
             "mutation", "scaling", "selection", "coop-share", "out", "preset")


class UsageError(Exception):
    pass


def _grid(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise UsageError(f"--grid expects WxH, got {text!r}") from None


def _number(kind, name, text):
    try:
        return kind(text)
    except (TypeError, ValueError):
        raise UsageError(f"--{name} expects a {kind.__name__}, got {text!r}") from None


def read_config_file(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _RUN_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defectors",
        description="Spatial iterated prisoner's dilemma with GA-evolved memory-3 strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one or more payoff cases and write CSV/JSON")
    run.add_argument("--case", help="I, IIA, IIB or all (default all)")
    run.add_argument("--grid", help="grid size WxH (default 50x50)")
    run.add_argument("--generations", help="generations of evolution (default 1000)")
    run.add_argument("--rounds", help="rounds per neighbour pairing (default 200)")
    run.add_argument("--runs", help="seeds per case, averaged (default 5)")
    run.add_argument("--seed", help="base seed; run i uses seed+i (default $DF_SEED or 0)")
    run.add_argument("--crossover", help="crossover probability (default 0.98)")
    run.add_argument("--mutation", help="per-bit mutation probability (default 0.01)")
    run.add_argument("--scaling", help="linear scaling multiple (default 2.0)")
    run.add_argument("--selection", help="global or local (default global)")
    run.add_argument("--coop-share", dest="coop_share",
                     help="initial cooperator share (default 0.80)")
    run.add_argument("--out", help="output directory (default results)")
    run.add_argument("--preset", choices=sorted(PRESETS), help="desk: 20x20, 300 gens, 50 rounds, 5 runs")
    run.add_argument("--config", help="key = value file; flags override it")
    run.add_argument("--quiet", action="store_true", help="no progress lines on stderr")

    val = sub.add_parser("validate-payoffs", help="print payoffs and dilemma class per case")
    val.add_argument("--case", default="all")
    val.add_argument("--reward", default="10", help="reward R = goods price (default 10)")

    ins = sub.add_parser("inspect-chromosome", help="describe a hex-encoded chromosome")
    ins.add_argument("hex")
    return parser


def _cases(text):
    if text is None or text.strip().lower() == "all":
        return list(ex.ALL_CASES)
    out = []
    for part in text.split(","):
        try:
            out.append(ex.CaseSpec.parse(part))
        except ex.ConfigError as exc:
            raise UsageError(str(exc)) from None
    return out


def resolve_run(args, environ=None) -> tuple[list, ex.RunConfig, Path]:
    """Merge defaults, preset, config file, env and flags into a run plan."""
    environ = os.environ if environ is None else environ
    settings = {}
    try:
        file_settings = read_config_file(args.config) if args.config else {}
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    flags = {k: getattr(args, k.replace("-", "_")) for k in _RUN_KEYS
             if getattr(args, k.replace("-", "_"), None) is not None}
    preset = flags.get("preset") or file_settings.get("preset")
    if preset:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}")
        settings.update(PRESETS[preset])
    settings.update(file_settings)
    if "seed" not in settings and environ.get("DF_SEED"):
        settings["seed"] = environ["DF_SEED"]
    settings.update(flags)

    cases = _cases(settings.get("case"))
    width, height = _grid(settings.get("grid", "50x50"))
    try:
        evo = EvolutionConfig(
            rounds_per_pair=_number(int, "rounds", settings.get("rounds", 200)),
            crossover_probability=_number(float, "crossover", settings.get("crossover", 0.98)),
            mutation_probability=_number(float, "mutation", settings.get("mutation", 0.01)),
            scaling_multiple=_number(float, "scaling", settings.get("scaling", 2.0)),
            selection_scope=SelectionScope(settings.get("selection", "global").lower()),
        )
        cfg = ex.RunConfig(
            grid_width=width, grid_height=height,
            generations=_number(int, "generations", settings.get("generations", 1000)),
            runs=_number(int, "runs", settings.get("runs", 5)),
            base_seed=_number(int, "seed", settings.get("seed", 0)),
            evolution=evo,
            initial_cooperator_share=_number(float, "coop-share", settings.get("coop-share", 0.80)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return cases, cfg, Path(settings.get("out", "results"))


def format_csv(series: ex.TimeSeries) -> str:
    lines = [CSV_HEADER]
    for i in range(len(series)):
        row = [str(int(series.generation[i]))]
        row += ["%.6f" % getattr(series, name)[i] for name in ex.TimeSeries.fields]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _r6(x):
    return round(float(x), 6)


def case_summary(case, cfg: ex.RunConfig, runs, averaged) -> dict:
    matrix = payoff_matrix_from(ex.build_case(case))
    dilemma = classify_dilemma(matrix)
    s = ex.summarize(case, averaged)
    return {
        "case": case.label,
        "payoffs": {"T": matrix.T, "R": matrix.R, "P": matrix.P, "S": matrix.S},
        "dilemma": dilemma.kind.value,
        "iterated_condition_holds": dilemma.iterated_condition_holds,
        "config": {
            "grid": f"{cfg.grid_width}x{cfg.grid_height}",
            "generations": cfg.generations,
            "rounds_per_pair": cfg.evolution.rounds_per_pair,
            "crossover_probability": cfg.evolution.crossover_probability,
            "mutation_probability": cfg.evolution.mutation_probability,
            "scaling_multiple": cfg.evolution.scaling_multiple,
            "selection_scope": cfg.evolution.selection_scope.value,
            "initial_cooperator_share": cfg.initial_cooperator_share,
            "seeds": ex.run_seeds(cfg),
        },
        "peak_defector": _r6(s.peak_defector),
        "peak_defector_generation": s.peak_defector_generation,
        "peak_top_defector": _r6(s.peak_top_defector),
        "peak_top_defector_generation": s.peak_top_defector_generation,
        "final_window_defector": _r6(s.final_window_defector),
        "run_peak_defector": [_r6(ex.peak(r, "defector")[0]) for r in runs],
        "run_peak_top_defector": [_r6(ex.peak(r, "top_defector")[0]) for r in runs],
    }


def _write(path: Path, text: str, written: list):
    written.append(path)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def cmd_run(cases, cfg: ex.RunConfig, out: Path, *, quiet=False) -> int:
    written: list[Path] = []
    summaries = {}
    try:
        out.mkdir(parents=True, exist_ok=True)
        for case in cases:
            runs = []
            for i, seed in enumerate(ex.run_seeds(cfg)):
                if not quiet:
                    print(f"{case.label}: run {i} (seed {seed})", file=sys.stderr, flush=True)
                series = ex.run_simulation(case, cfg, seed)
                runs.append(series)
                _write(out / f"{case.label}_run{i}.csv", format_csv(series), written)
            averaged = ex.average_runs(runs)
            _write(out / f"{case.label}_avg.csv", format_csv(averaged), written)
            summary = case_summary(case, cfg, runs, averaged)
            summaries[case.label] = summary
            _write(out / f"{case.label}_summary.json",
                   json.dumps(summary, indent=2) + "\n", written)
        combined = {
            "cases": summaries,
            "peak_defector_order": sorted(
                summaries, key=lambda k: -summaries[k]["peak_defector"]),
            "peak_top_defector_order": sorted(
                summaries, key=lambda k: -summaries[k]["peak_top_defector"]),
        }
        _write(out / "summary.json", json.dumps(combined, indent=2) + "\n", written)
    except OSError as exc:
        for path in written:
            try:
                path.unlink()
            except OSError:
                pass
        print(f"defectors: I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def validate_payoffs_report(cases) -> str:
    lines = []
    for case in cases:
        m = payoff_matrix_from(ex.build_case(case))
        d = classify_dilemma(m)
        kind = {DilemmaKind.STRONG: "Strong dilemma", DilemmaKind.WEAK: "Weak dilemma",
                DilemmaKind.NONE: "No dilemma"}[d.kind]
        if d.iterated_condition_holds:
            it = "2R>T+S holds"
        elif 2 * m.R == m.T + m.S:
            it = "2R>T+S fails (equality)"
        else:
            it = "2R>T+S fails"
        lines.append(f"{case.label}: T={m.T} R={m.R} P={m.P} S={m.S}; {kind}; {it}")
    return "\n".join(lines)


def _mv(bit) -> str:
    return "D" if int(bit) else "C"


def inspect_report(hex_text: str) -> str:
    c = decode_hex(hex_text)
    f = cooperation_fraction(c)
    cls = classify(c, DEFAULT_THRESHOLDS)
    lines = [
        f"class={cls.value}, fraction={f:.3f}",
        f"opening move: {_mv(c[64])}",
        f"second move after opponent C: {_mv(c[65])}, after opponent D: {_mv(c[66])}",
        "third move after opponent " + ", ".join(
            f"{h}: {_mv(c[67 + i])}" for i, h in enumerate(("CC", "CD", "DC", "DD"))),
        "table replies by last round (own,opp), averaged over older rounds:",
    ]
    for code, name in enumerate(("CC", "CD", "DC", "DD")):
        replies = [int(c[i]) for i in range(64) if i & 3 == code]
        lines.append(f"  last {name}: {16 - sum(replies)}/16 C")
    mirrors = all(int(c[i]) == i & 1 for i in range(64))
    lines.append(f"table mirrors opponent's last move: {'yes' if mirrors else 'no'}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cases, cfg, out = resolve_run(args)
            return cmd_run(cases, cfg, out, quiet=args.quiet)
        if args.command == "validate-payoffs":
            reward = _number(float, "reward", args.reward)
            if reward.is_integer():
                reward = int(reward)
            cases = [ex.CaseSpec(c.id, reward) for c in _cases(args.case)]
            print(validate_payoffs_report(cases))
            return EXIT_OK
        if args.command == "inspect-chromosome":
            try:
                print(inspect_report(args.hex))
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            return EXIT_OK
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"defectors: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"defectors: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
