"""Command-line front end.

Settings come from, in increasing priority: built-in defaults, an INI file
given with ``--config``, environment variables ``RETALIATION_<SECTION>_<KEY>``
(e.g. ``RETALIATION_GAME_R=1001``), and command-line flags.

Exit status is 0 on success and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional

from . import __version__
from ._num import as_fraction, format_number
from .decay import parse_decay
from .econ import EconParams, attack_profitability, net_attack_cost
from .game import GameParams, StrategyProfile, mover, paper_spe_profile, truncation_horizon
from .ingest import (
    DOUBLE_SPEND,
    classify_events,
    group_retaliation_episodes,
    parse_reorg_log,
    plot_rows,
    summarize,
    summary_csv,
)
from .sim import SimConfig, run_attack_batch, run_attack_episode, run_retaliation_episode, sweep, sweep_csv
from .solver import backward_induction, last_profitable_mover, one_deviation_check, reputation_safety

ENV_PREFIX = "RETALIATION_"

DEFAULTS = {
    "econ": {
        "pb": "100000",
        "ch": "0.001",
        "n": "",
        "beta": "2",
        "e": "6",
        "v": "50000",
        "kappa": "constant(0.05)",
        "delta": "0.05",
    },
    "game": {"v": "10000", "c": "4000", "r": "2000", "decay": "linear(0.1)"},
    "sim": {
        "mode": "stylized",
        "block_model": "deterministic",
        "seed": "",
        "runs": "1",
        "ticks_per_honest_block": "100",
        "chain": "SIM",
        "start_time": "1600000000",
        "block_seconds": "600",
        "fork_height": "100000",
    },
    "ingest": {
        "depth_threshold": "10",
        "require_conflict": "true",
        "window_hours": "48",
        "format": "csv",
        "x": "height",
    },
}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    sections: dict = field(default_factory=lambda: {s: dict(v) for s, v in DEFAULTS.items()})

    def get(self, section: str, key: str) -> str:
        return self.sections[section][key]

    def set(self, section: str, key: str, value) -> None:
        if section not in self.sections or key not in self.sections[section]:
            raise ConfigError(f"unknown config key [{section}] {key}")
        self.sections[section][key] = str(value)

    @classmethod
    def load(cls, path: Optional[str] = None, environ=None) -> "Config":
        cfg = cls()
        if path:
            parser = configparser.ConfigParser(interpolation=None)
            parser.optionxform = str
            try:
                with open(path, encoding="utf-8") as fh:
                    parser.read_file(fh)
            except (OSError, configparser.Error) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
            for section in parser.sections():
                if section not in cfg.sections:
                    raise ConfigError(f"unknown config section [{section}]")
                for key, value in parser.items(section):
                    cfg.set(section, key, value.strip())
        environ = os.environ if environ is None else environ
        for name, value in environ.items():
            if not name.startswith(ENV_PREFIX):
                continue
            rest = name[len(ENV_PREFIX):].lower()
            section, _, key = rest.partition("_")
            if section in cfg.sections:
                cfg.set(section, key, value)
        return cfg

    def econ_params(self) -> EconParams:
        s = self.sections["econ"]
        return EconParams(
            block_reward_pb=as_fraction(s["pb"]),
            hash_cost_ch=as_fraction(s["ch"]),
            beta=as_fraction(s["beta"]),
            escrow_e=_int(s["e"], "e"),
            tx_value_v=as_fraction(s["v"]),
            kappa=s["kappa"],
            delta=as_fraction(s["delta"]),
            honest_hashpower_n=as_fraction(s["n"]) if s["n"] else None,
        )

    def game_params(self) -> GameParams:
        s = self.sections["game"]
        return GameParams(as_fraction(s["v"]), as_fraction(s["c"]), as_fraction(s["r"]), parse_decay(s["decay"]))

    def sim_config(self, with_game: bool = False) -> SimConfig:
        s = self.sections["sim"]
        return SimConfig(
            econ=self.econ_params(),
            game=self.game_params() if with_game else None,
            block_model=s["block_model"],
            seed=_int(s["seed"], "seed") if s["seed"] else None,
            mode=s["mode"],
            ticks_per_honest_block=_int(s["ticks_per_honest_block"], "ticks_per_honest_block"),
            chain_id=s["chain"],
            start_time=_int(s["start_time"], "start_time"),
            block_seconds=_int(s["block_seconds"], "block_seconds"),
            fork_height=_int(s["fork_height"], "fork_height"),
        )


def _int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {text!r}") from None


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


# --- output helpers ---------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _money(x) -> str:
    return format_number(x)


# --- argument plumbing ---------------------------------------------------------------

ECON_FLAGS = {
    "pb": "block reward per block, USD",
    "ch": "hash rental cost, USD per hash",
    "n": "honest hashpower (default: free-entry pb/ch)",
    "beta": "rented hashpower as a multiple of honest hashpower",
    "e": "escrow period in blocks",
    "v": "transaction value, USD",
    "kappa": "market impact: constant(x), linear(slope) or table(b:k,...)",
    "delta": "price decrease after an attack, in [0, 1]",
}
GAME_FLAGS = {
    "v": "value of the contested transaction, USD",
    "c": "net cost of one attack, USD",
    "r": "defender's reputation cost of quitting, USD",
    "decay": "value decay: linear(g), geometric(d) or table(1,...)",
}
SIM_FLAGS = {
    "mode": "stylized or race",
    "block_model": "deterministic or exponential",
    "seed": "random seed (required for exponential blocks)",
    "runs": "number of episodes",
    "ticks_per_honest_block": "time resolution of deterministic races",
    "chain": "chain id written into emitted reorg events",
}
INGEST_FLAGS = {
    "depth_threshold": "minimum depth of a double-spend reorg",
    "window_hours": "maximum gap between moves of one episode",
    "format": "input log format: csv or json",
}


def _add_section_flags(p, section: str, flags: dict, prefix: str = "") -> None:
    for key, help_text in flags.items():
        opt = "--" + prefix + key.replace("_", "-")
        p.add_argument(opt, dest=f"{section}__{key}", metavar=key.upper(), help=help_text)


def _common(p) -> None:
    p.add_argument("--config", help="INI config file with [econ] [game] [sim] [ingest] sections")
    p.add_argument("--out", help="write output to this file instead of stdout")


def _log_input(p) -> None:
    p.add_argument("log", nargs="?", help="reorg log file ('-' for stdin)")
    p.add_argument("--sample", help="use a bundled sample log by name instead of a file")
    _add_section_flags(p, "ingest", INGEST_FLAGS)
    p.add_argument(
        "--no-require-conflict",
        dest="ingest__require_conflict",
        action="store_const",
        const="false",
        help="classify deep reorgs as double-spends even without a conflicting spend",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retaliation",
        description="Double-spend attack economics and the attacker/defender retaliation game.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("econ", help="net cost and profitability of a single attack")
    _common(p)
    _add_section_flags(p, "econ", ECON_FLAGS)
    p.set_defaults(func=cmd_econ)

    game = sub.add_parser("game", help="solve, verify and sweep retaliation games")
    gsub = game.add_subparsers(dest="game_command", metavar="ACTION")
    gsub.required = True
    p = gsub.add_parser("solve", help="backward-induction equilibrium of one game")
    _common(p)
    _add_section_flags(p, "game", GAME_FLAGS)
    p.set_defaults(func=cmd_game_solve)
    p = gsub.add_parser("verify", help="one-deviation check of a strategy profile")
    _common(p)
    _add_section_flags(p, "game", GAME_FLAGS)
    p.add_argument("--profile", help="JSON array of fight probabilities (default: the no-attack profile)")
    p.set_defaults(func=cmd_game_verify)
    p = gsub.add_parser("sweep", help="solve a grid of games and write CSV")
    _common(p)
    p.add_argument("--v", dest="grid_v", help="comma-separated values of v")
    p.add_argument("--c", dest="grid_c", help="comma-separated attack costs c")
    p.add_argument("--c-ratio", dest="grid_c_ratio", help="comma-separated c/v ratios (instead of --c)")
    p.add_argument("--r", dest="grid_r", help="comma-separated reputation costs r")
    p.add_argument("--decay", dest="grid_decay", action="append", help="decay function; repeat for several")
    p.add_argument("--simulate", action="store_true", help="add stylized simulation payoffs per row")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_game_sweep)

    sim = sub.add_parser("sim", help="simulate attacks and retaliation episodes")
    ssub = sim.add_subparsers(dest="sim_command", metavar="ACTION")
    ssub.required = True
    p = ssub.add_parser("attack", help="simulate single double-spend attacks")
    _common(p)
    _add_section_flags(p, "econ", ECON_FLAGS)
    _add_section_flags(p, "sim", SIM_FLAGS)
    p.add_argument("--events-out", help="write emitted reorg events to this CSV")
    p.set_defaults(func=cmd_sim_attack)
    p = ssub.add_parser("retaliation", help="play the retaliation game on a simulated chain")
    _common(p)
    _add_section_flags(p, "econ", ECON_FLAGS, prefix="econ-")
    _add_section_flags(p, "game", GAME_FLAGS)
    _add_section_flags(p, "sim", SIM_FLAGS)
    p.add_argument("--sigma-a", help="attacker's profile as a JSON array (default: equilibrium)")
    p.add_argument("--sigma-d", help="defender's profile as a JSON array (default: equilibrium)")
    p.add_argument("--events-out", help="write emitted reorg events to this CSV")
    p.set_defaults(func=cmd_sim_retaliation)

    reorg = sub.add_parser("reorg", help="classify and summarize reorg logs")
    rsub = reorg.add_subparsers(dest="reorg_command", metavar="ACTION")
    rsub.required = True
    p = rsub.add_parser("classify", help="label each reorg and group retaliation episodes")
    _common(p)
    _log_input(p)
    p.set_defaults(func=cmd_reorg_classify)
    p = rsub.add_parser("summarize", help="per-chain double-spend counts and USD totals")
    _common(p)
    _log_input(p)
    p.add_argument("--split-gap-hours", type=float, help="start a new row after a quiet period this long")
    p.set_defaults(func=cmd_reorg_summarize)

    p = sub.add_parser("plot", help="depth scatter data (CSV) and optional SVG")
    _common(p)
    _log_input(p)
    p.add_argument("--x", dest="ingest__x", choices=["height", "timestamp"], help="x axis")
    p.add_argument("--svg", help="also render the scatter to this SVG file")
    p.set_defaults(func=cmd_plot)
    return parser


def _config_from(args) -> Config:
    cfg = Config.load(args.config)
    for name, value in vars(args).items():
        if "__" in name and value is not None:
            section, key = name.split("__", 1)
            cfg.set(section, key, value)
    return cfg


# --- commands ----------------------------------------------------------------------


def cmd_econ(args, cfg: Config) -> int:
    params = cfg.econ_params()
    cost = net_attack_cost(params)
    prof = attack_profitability(params)
    out = {
        "n": _money(params.n),
        "kappa_at_beta": _money(params.kappa_at_beta),
        "rental_cost": _money(cost.rental_cost),
        "mining_revenue": _money(cost.mining_revenue),
        "net_cost": _money(cost.net_cost),
        "duration_honest_block_times": _money(cost.duration_honest_block_times),
        "profit": _money(prof.profit),
        "profitable": prof.profitable,
        "safe_pb_threshold": "unbounded" if prof.threshold_unbounded else _money(prof.safe_pb_threshold),
    }
    _emit(args, _dump_json(out))
    return 0


def _outcome_json(o) -> dict:
    return {"quitter": o.quitter, "t": o.time_t, "payoff_A": _money(o.payoff_A), "payoff_D": _money(o.payoff_D)}


def _deviations_json(report) -> list:
    return [
        {
            "t": d.t,
            "player": d.player,
            "current_p": str(d.current_p),
            "improving_p": d.improving_p,
            "gain": _money(d.gain),
        }
        for d in report.deviations
    ]


def cmd_game_solve(args, cfg: Config) -> int:
    g = cfg.game_params()
    be = g.break_even()
    eq = backward_induction(g)
    safety = reputation_safety(g)
    literal = paper_spe_profile(g)
    literal_report = one_deviation_check(g, literal)
    out = {
        "v": _money(g.v),
        "c": _money(g.c),
        "r": _money(g.r),
        "decay": str(g.decay),
        "T_A": _money(be.t_attacker),
        "T_D": _money(be.t_defender),
        "horizon": truncation_horizon(g),
        "last_profitable_mover": last_profitable_mover(g),
        "reputation_safety": {
            "linear_condition": "n/a" if safety.linear_condition is None else safety.linear_condition,
            "general_condition": safety.general_condition,
            "general_threshold": _money(safety.general_threshold),
            "clamped": safety.clamped,
            "d_last_mover": safety.d_last_mover,
        },
        "equilibrium": {
            "profile": eq.profile.to_json(),
            "attack_occurs": eq.attack_occurs,
            "root_outcome": _outcome_json(eq.root_outcome),
            "node_values": [
                {"t": t, "mover": mover(t), "mover_value": _money(a), "other_value": _money(b)}
                for t, (a, b) in enumerate(eq.node_values)
            ],
        },
        "no_attack_profile": {
            "profile": literal.to_json(),
            "is_spe": literal_report.is_spe,
            "deviations": _deviations_json(literal_report),
        },
    }
    _emit(args, _dump_json(out))
    return 0


def cmd_game_verify(args, cfg: Config) -> int:
    g = cfg.game_params()
    if args.profile:
        try:
            items = json.loads(args.profile)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--profile is not JSON: {exc}") from None
        if not isinstance(items, list):
            raise ConfigError("--profile must be a JSON array")
        sigma = StrategyProfile.from_json(items)
    else:
        sigma = paper_spe_profile(g)
    report = one_deviation_check(g, sigma)
    out = {"profile": sigma.to_json(), "is_spe": report.is_spe, "deviations": _deviations_json(report)}
    _emit(args, _dump_json(out))
    return 0


def _split(text: Optional[str], default: str) -> list:
    return [as_fraction(x) for x in (text or default).split(",") if x.strip()]


def cmd_game_sweep(args, cfg: Config) -> int:
    base = cfg.sections["game"]
    vs = _split(args.grid_v, base["v"])
    rs = _split(args.grid_r, base["r"])
    decays = [parse_decay(d) for d in (args.grid_decay or [base["decay"]])]
    points = []
    for v in vs:
        cs = [v * q for q in _split(args.grid_c_ratio, "")] if args.grid_c_ratio else _split(args.grid_c, base["c"])
        for c in cs:
            if not 0 < c < v:
                continue
            for r in rs:
                for fn in decays:
                    points.append(GameParams(v, c, r, fn))
    rows = sweep(points, simulate=args.simulate, jobs=max(1, args.jobs))
    _emit(args, sweep_csv(rows))
    return 0


def _write_events(path: Optional[str], events) -> None:
    if path:
        from .ingest import write_reorg_log

        Path(path).write_text(write_reorg_log(events), encoding="utf-8")


def cmd_sim_attack(args, cfg: Config) -> int:
    sc = cfg.sim_config()
    runs = _int(cfg.get("sim", "runs"), "runs")
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if runs == 1:
        res = run_attack_episode(sc)
        out = res.to_dict()
        events = res.events
    else:
        summary, results = run_attack_batch(sc, runs)
        out = summary.to_dict()
        out["stylized_duration"] = _money(Fraction(sc.econ.escrow_e) / sc.econ.beta)
        events = [e for r in results for e in r.events]
    out["mode"] = sc.mode
    out["block_model"] = sc.block_model
    _write_events(args.events_out, events)
    _emit(args, _dump_json(out))
    return 0


def cmd_sim_retaliation(args, cfg: Config) -> int:
    sc = cfg.sim_config(with_game=True)
    eq = None
    profiles = []
    for text in (args.sigma_a, args.sigma_d):
        if text:
            try:
                profiles.append(StrategyProfile.from_json(json.loads(text)))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"profile is not JSON: {exc}") from None
        else:
            eq = eq or backward_induction(sc.game)
            profiles.append(eq.profile)
    runs = _int(cfg.get("sim", "runs"), "runs")
    results = [run_retaliation_episode(sc, profiles[0], profiles[1], i) for i in range(runs)]
    events = [e for r in results for e in r.events]
    out = {
        "mode": sc.mode,
        "runs": [r.to_dict() for r in results],
        "sigma_a": profiles[0].to_json(),
        "sigma_d": profiles[1].to_json(),
    }
    _write_events(args.events_out, events)
    _emit(args, _dump_json(out))
    return 0


def _load_log(args, cfg: Config):
    fmt = cfg.get("ingest", "format")
    if args.sample:
        name = args.sample if "." in args.sample else args.sample + "." + fmt
        try:
            data = resources.files("retaliation.data").joinpath(name).read_bytes()
        except (FileNotFoundError, OSError):
            raise ConfigError(f"no bundled sample named {args.sample!r}; see `ls` of retaliation/data") from None
    elif args.log in (None, "-"):
        data = sys.stdin.buffer.read()
    else:
        try:
            data = Path(args.log).read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.log}: {exc}") from None
    return parse_reorg_log(data, fmt)


def _labels(events, cfg: Config):
    return classify_events(
        events,
        depth_threshold=_int(cfg.get("ingest", "depth_threshold"), "depth_threshold"),
        require_conflict=_bool(cfg.get("ingest", "require_conflict")),
    )


def _window(cfg: Config) -> float:
    return float(as_fraction(cfg.get("ingest", "window_hours"))) * 3600


def cmd_reorg_classify(args, cfg: Config) -> int:
    import csv
    import io

    events = _load_log(args, cfg)
    labels = _labels(events, cfg)
    episodes = group_retaliation_episodes(events, _window(cfg), labels)
    where = {}
    for i, ep in enumerate(episodes, start=1):
        for e in ep.events:
            where[id(e)] = (i, ep)
    buf = io.StringIO()
    cols = ["chain", "timestamp", "height", "depth", "blocks_added", "conflicting_spend", "value_usd",
            "beneficiary", "class", "episode", "episode_kind", "episode_length", "alternation_verified"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for e, lab in zip(events, labels):
        row = e.to_row()
        row["class"] = lab
        if id(e) in where:
            i, ep = where[id(e)]
            row.update(episode=i, episode_kind=ep.classification, episode_length=ep.length,
                       alternation_verified="true" if ep.alternation_verified else "false")
        else:
            row.update(episode="", episode_kind="", episode_length="", alternation_verified="")
        w.writerow(row)
    _emit(args, buf.getvalue())
    return 0


def cmd_reorg_summarize(args, cfg: Config) -> int:
    events = _load_log(args, cfg)
    gap = args.split_gap_hours * 3600 if args.split_gap_hours is not None else None
    _emit(args, summary_csv(summarize(events, _labels(events, cfg), split_gap_seconds=gap)))
    return 0


def cmd_plot(args, cfg: Config) -> int:
    events = _load_log(args, cfg)
    labels = _labels(events, cfg)
    x = cfg.get("ingest", "x")
    pts = plot_rows(events, labels, x=x)
    lines = [f"{x},depth,series"] + [f"{a},{b},{s}" for a, b, s in pts]
    _emit(args, "\n".join(lines) + "\n")
    if args.svg:
        render_svg(pts, args.svg, x_label=x)
    return 0


def render_svg(points, path: str, x_label: str = "height") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "retaliation"
    fig, ax = plt.subplots(figsize=(7, 4))
    for series, color in (("Random", "tab:blue"), (DOUBLE_SPEND, "tab:red")):
        xs = [p[0] for p in points if p[2] == series]
        ys = [p[1] for p in points if p[2] == series]
        if xs:
            ax.scatter(xs, ys, s=12, c=color, label=series)
    ax.set_xlabel(x_label)
    ax.set_ylabel("reorg depth (blocks removed)")
    if points:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from(args)
        return args.func(args, cfg)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
