"""Monte Carlo experiment driver, sweep orchestration, and CSV emission.

Config files are flat JSON objects whose keys match the field names of
``ScenarioConfig`` and ``SweepSpec`` exactly. Command-line flags override
config values, which override built-in defaults. Everything downstream of
(config, seed) is deterministic: rerunning a sweep reproduces the output
file byte for byte.

Exit codes: 0 success, 2 configuration error, 3 numerical domain error,
4 I/O error.
"""

import argparse
import json
import sys
from dataclasses import dataclass, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .chain import Algorithm, run_iic_chain, run_rmf
from .channel import (ScenarioConfig, Scenario, build_scenario,
                      realize_channel, sample_users)
from .errors import ConfigError, NumericalDomainError


class PanelProfile(Enum):
    """Panel geometry presets: side length and antennas per panel."""

    SMALL = "small"
    LARGE = "large"

    @property
    def panel_side_m(self) -> float:
        return _PROFILE_GEOMETRY[self][0]

    @property
    def antennas_per_panel(self) -> int:
        return _PROFILE_GEOMETRY[self][1]


_PROFILE_GEOMETRY = {
    PanelProfile.SMALL: (0.2, 16),
    PanelProfile.LARGE: (1.0, 400),
}


class SweepAxis(Enum):
    NP_PER_PANEL = "np"
    TOTAL_N = "n"


#: Default per-panel output counts swept for each profile. Twenty users
#: cap the useful width, so the large profile stops at 20.
DEFAULT_NP_VALUES = {
    PanelProfile.SMALL: (1, 2, 4, 8, 12, 16),
    PanelProfile.LARGE: (1, 2, 4, 8, 12, 16, 20),
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: axis, grid values, algorithms, and run budget.

    ``values`` left as None selects the per-profile defaults: the
    ``DEFAULT_NP_VALUES`` grid on the per-panel axis, and the same grid
    multiplied by the panel count on the total-outputs axis.
    """

    axis: SweepAxis = SweepAxis.NP_PER_PANEL
    values: tuple | None = None
    algorithms: tuple = (Algorithm.IIC, Algorithm.RMF)
    panel_profiles: tuple = (PanelProfile.SMALL, PanelProfile.LARGE)
    trials: int = 100
    seed: int = 42
    rho: float = 1.0
    passes: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.rho <= 0.0:
            raise ConfigError("rho must be positive")
        if self.passes < 1:
            raise ConfigError("passes must be at least 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        if not self.panel_profiles:
            raise ConfigError("at least one panel profile is required")
        if self.values is not None:
            if not self.values:
                raise ConfigError("values must not be empty")
            if any(int(v) != v or v < 1 for v in self.values):
                raise ConfigError("values must be positive integers")


@dataclass(frozen=True)
class SweepRow:
    """One aggregated line of sweep output."""

    profile: str
    algorithm: str
    np: int
    n_total: int
    rho: float
    trials: int
    mean_sum_rate_bits: float
    std_sum_rate_bits: float
    mean_channel_capacity_bits: float
    chain_scalars: int
    seed: int


CSV_FIELDS = tuple(f.name for f in fields(SweepRow))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent, reproducible stream for one trial."""
    return np.random.default_rng([seed, trial_index])


def run_trial(scenario: Scenario, cfg: ScenarioConfig, algorithm: Algorithm,
              np_outputs: int, trial_index: int, passes: int = 1):
    """One channel realization pushed through one algorithm.

    Draws user positions from the stream (cfg.seed, trial_index),
    realizes the channel, runs the decentralized algorithm, and returns
    the capacity and traffic reports. Fully deterministic given
    (config, seed, trial_index).
    """
    rng = trial_rng(cfg.seed, trial_index)
    users = sample_users(scenario, cfg, rng)
    chan = realize_channel(scenario, users, cfg.wavelength_m)
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.IIC:
        result = run_iic_chain(chan.blocks, cfg.snr_rho, np_outputs, passes)
    else:
        result = run_rmf(chan.blocks, np_outputs, cfg.snr_rho)
    return result.report, result.traffic


def _resolve_values(spec: SweepSpec, profile: PanelProfile,
                    p_count: int, mp: int):
    """Per-profile (np, n_total) pairs for the sweep axis, validated."""
    if spec.values is not None:
        values = tuple(int(v) for v in spec.values)
    elif spec.axis is SweepAxis.NP_PER_PANEL:
        values = DEFAULT_NP_VALUES[profile]
    else:
        values = tuple(v * p_count for v in DEFAULT_NP_VALUES[profile])

    pairs = []
    for v in values:
        if spec.axis is SweepAxis.NP_PER_PANEL:
            np_outputs, n_total = v, v * p_count
        else:
            if v % p_count != 0:
                raise ConfigError(
                    f"total output count {v} is not divisible by the "
                    f"{profile.value}-profile panel count {p_count}")
            np_outputs, n_total = v // p_count, v
        if np_outputs < 1:
            raise ConfigError(f"axis value {v} yields zero outputs per panel")
        if np_outputs > mp:
            raise ConfigError(
                f"axis value {v} needs {np_outputs} outputs per panel but the "
                f"{profile.value} profile has only {mp} antennas per panel")
        pairs.append((np_outputs, n_total))
    return pairs


def run_sweep(spec: SweepSpec, cfg: ScenarioConfig | None = None):
    """Monte Carlo sweep over profiles, algorithms, and axis values.

    Each trial reuses one channel realization for every algorithm and
    axis value, exactly the realization ``run_trial`` would generate for
    the same (seed, trial index). Trials use independent generator
    streams and could run in parallel; this driver keeps a fixed
    sequential order so the aggregates (and the CSV written from them)
    are reproducible byte for byte. Rows are ordered by profile, then
    algorithm, then axis value.

    Returns a list of SweepRow.
    """
    spec.validate()
    if cfg is None:
        cfg = ScenarioConfig()
    rows = []
    for profile in spec.panel_profiles:
        pcfg = replace(cfg, panel_side_m=profile.panel_side_m,
                       seed=spec.seed, snr_rho=spec.rho)
        scenario = build_scenario(pcfg, profile.antennas_per_panel)
        pairs = _resolve_values(spec, profile, scenario.p_count,
                                scenario.antennas_per_panel)

        cells = {(algo, pair): {"rates": [], "caps": [], "chain": 0}
                 for algo in spec.algorithms for pair in pairs}
        for t in range(spec.trials):
            rng = trial_rng(spec.seed, t)
            users = sample_users(scenario, pcfg, rng)
            chan = realize_channel(scenario, users, pcfg.wavelength_m)
            for algo in spec.algorithms:
                for pair in pairs:
                    np_outputs, _ = pair
                    if algo is Algorithm.IIC:
                        result = run_iic_chain(chan.blocks, spec.rho,
                                               np_outputs, spec.passes)
                    else:
                        result = run_rmf(chan.blocks, np_outputs, spec.rho)
                    cell = cells[(algo, pair)]
                    cell["rates"].append(result.report.sum_rate_bits)
                    cell["caps"].append(result.report.channel_capacity_bits)
                    cell["chain"] = result.traffic.chain_complex_scalars

        for algo in spec.algorithms:
            for pair in pairs:
                np_outputs, n_total = pair
                cell = cells[(algo, pair)]
                rates = np.asarray(cell["rates"])
                std = float(np.std(rates, ddof=1)) if spec.trials > 1 else 0.0
                rows.append(SweepRow(
                    profile=profile.value,
                    algorithm=algo.value,
                    np=np_outputs,
                    n_total=n_total,
                    rho=spec.rho,
                    trials=spec.trials,
                    mean_sum_rate_bits=float(np.mean(rates)),
                    std_sum_rate_bits=std,
                    mean_channel_capacity_bits=float(np.mean(cell["caps"])),
                    chain_scalars=cell["chain"],
                    seed=spec.seed,
                ))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit_csv(rows, path) -> None:
    """Write sweep rows as UTF-8 CSV, one line per row plus a header.

    Floats carry 12 significant digits; rerunning the same spec and seed
    reproduces the file byte for byte.
    """
    lines = [",".join(CSV_FIELDS)]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, name)) for name in CSV_FIELDS))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# config-file ingestion
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {f.name for f in fields(ScenarioConfig)}
_SWEEP_KEYS = {f.name for f in fields(SweepSpec)}


def load_config_file(path) -> dict:
    """Read a flat JSON config; unknown keys are rejected early."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must contain a JSON object")
    unknown = set(data) - _SCENARIO_KEYS - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _coerce_int(value, key: str) -> int:
    if isinstance(value, bool) or int(value) != value:
        raise ConfigError(f"config key {key} must be an integer")
    return int(value)


def scenario_config_from_mapping(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from the scenario keys of a config mapping."""
    kwargs = {}
    for f in fields(ScenarioConfig):
        if f.name not in data:
            continue
        value = data[f.name]
        if f.name in ("users_k", "seed"):
            kwargs[f.name] = _coerce_int(value, f.name)
        else:
            try:
                kwargs[f.name] = float(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {f.name} must be a number") from exc
    cfg = ScenarioConfig(**kwargs)
    cfg.validate()
    return cfg


def _parse_axis(value) -> SweepAxis:
    try:
        return SweepAxis(str(value).lower())
    except ValueError as exc:
        raise ConfigError(f"axis must be 'np' or 'n', got {value!r}") from exc


def _parse_list(value, enum_cls, what: str):
    if isinstance(value, str):
        items = [v.strip() for v in value.split(",") if v.strip()]
    else:
        items = list(value)
    out = []
    for item in items:
        try:
            member = enum_cls(str(item).lower())
        except ValueError as exc:
            names = ", ".join(m.value for m in enum_cls)
            raise ConfigError(f"unknown {what} {item!r} (choose from {names})") from exc
        if member not in out:
            out.append(member)
    if not out:
        raise ConfigError(f"at least one {what} is required")
    return tuple(out)


def sweep_spec_from_mapping(data: dict) -> SweepSpec:
    """Build a SweepSpec from the sweep keys of a config mapping."""
    kwargs = {}
    if "axis" in data:
        kwargs["axis"] = _parse_axis(data["axis"])
    if "values" in data:
        values = data["values"]
        if not isinstance(values, (list, tuple)):
            raise ConfigError("values must be a list of positive integers")
        kwargs["values"] = tuple(_coerce_int(v, "values") for v in values)
    if "algorithms" in data:
        kwargs["algorithms"] = _parse_list(data["algorithms"], Algorithm,
                                           "algorithm")
    if "panel_profiles" in data:
        kwargs["panel_profiles"] = _parse_list(data["panel_profiles"],
                                               PanelProfile, "panel profile")
    for key in ("trials", "seed", "passes"):
        if key in data:
            kwargs[key] = _coerce_int(data[key], key)
    if "rho" in data:
        try:
            kwargs["rho"] = float(data["rho"])
        except (TypeError, ValueError) as exc:
            raise ConfigError("config key rho must be a number") from exc
    spec = SweepSpec(**kwargs)
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# command line interface
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lisim",
        description="Uplink sum-rate simulator for panelized antenna surfaces")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep to CSV")
    sweep.add_argument("--config", help="JSON config file")
    sweep.add_argument("--axis", choices=[a.value for a in SweepAxis],
                       help="sweep per-panel outputs (np) or total outputs (n)")
    sweep.add_argument("--algos", help="comma list from: iic,rmf")
    sweep.add_argument("--profiles", help="comma list from: small,large")
    sweep.add_argument("--values", help="comma list of axis values")
    sweep.add_argument("--trials", type=int, help="trials per row")
    sweep.add_argument("--seed", type=int, help="base seed")
    sweep.add_argument("--rho", type=float, help="linear SNR")
    sweep.add_argument("--passes", type=int, help="chain passes (iic)")
    sweep.add_argument("--out", required=True, help="output CSV path")
    sweep.set_defaults(func=_cmd_sweep)

    trial = sub.add_parser("trial", help="run one trial and print a report")
    trial.add_argument("--config", help="JSON config file")
    trial.add_argument("--algo", required=True,
                       choices=[a.value for a in Algorithm])
    trial.add_argument("--np", required=True, type=int, dest="np_outputs",
                       help="outputs per panel")
    trial.add_argument("--profile", choices=[p.value for p in PanelProfile],
                       help="panel profile (default: first configured, else small)")
    trial.add_argument("--seed", type=int, help="base seed")
    trial.add_argument("--rho", type=float, help="linear SNR")
    trial.add_argument("--trial-index", type=int, default=0)
    trial.add_argument("--passes", type=int, default=1)
    trial.set_defaults(func=_cmd_trial)
    return parser


def _load_optional_config(path) -> dict:
    return load_config_file(path) if path else {}


def _cmd_sweep(args) -> int:
    data = _load_optional_config(args.config)
    cfg = scenario_config_from_mapping(data)
    if args.axis is not None:
        data["axis"] = args.axis
    if args.algos is not None:
        data["algorithms"] = args.algos
    if args.profiles is not None:
        data["panel_profiles"] = args.profiles
    if args.values is not None:
        try:
            data["values"] = [int(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError("--values must be a comma list of integers") from exc
    for key in ("trials", "seed", "rho", "passes"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if "rho" not in data and "snr_rho" in data:
        data["rho"] = data["snr_rho"]
    spec = sweep_spec_from_mapping(data)
    rows = run_sweep(spec, cfg)
    emit_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_trial(args) -> int:
    data = _load_optional_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.rho is not None:
        data["snr_rho"] = args.rho
        data.pop("rho", None)
    if "rho" in data and "snr_rho" not in data:
        data["snr_rho"] = data.pop("rho")

    if args.profile is not None:
        profile = PanelProfile(args.profile)
    elif data.get("panel_profiles"):
        profile = _parse_list(data["panel_profiles"], PanelProfile,
                              "panel profile")[0]
    else:
        profile = PanelProfile.SMALL
    data.pop("panel_profiles", None)
    data["panel_side_m"] = profile.panel_side_m
    scenario_data = {k: v for k, v in data.items() if k in _SCENARIO_KEYS}
    cfg = scenario_config_from_mapping(scenario_data)

    scenario = build_scenario(cfg, profile.antennas_per_panel)
    if args.np_outputs < 1 or args.np_outputs > scenario.antennas_per_panel:
        raise ConfigError(
            f"--np must be between 1 and {scenario.antennas_per_panel} "
            f"for the {profile.value} profile")
    if args.passes < 1:
        raise ConfigError("--passes must be at least 1")
    algorithm = Algorithm(args.algo)
    report, traffic = run_trial(scenario, cfg, algorithm, args.np_outputs,
                                args.trial_index, args.passes)
    items = [
        ("profile", profile.value),
        ("algorithm", algorithm.value),
        ("np", args.np_outputs),
        ("n_total", args.np_outputs * scenario.p_count),
        ("rho", _fmt(cfg.snr_rho)),
        ("seed", cfg.seed),
        ("trial_index", args.trial_index),
        ("passes", args.passes),
        ("sum_rate_bits", _fmt(report.sum_rate_bits)),
        ("channel_capacity_bits", _fmt(report.channel_capacity_bits)),
        ("chain_complex_scalars", traffic.chain_complex_scalars),
        ("backplane_scalars_per_use", traffic.backplane_scalars_per_use),
        ("cpu_scalars_per_use", traffic.cpu_scalars_per_use),
        ("centralized_csi_scalars", traffic.centralized_csi_scalars),
    ]
    for key, value in items:
        print(f"{key}={value}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalDomainError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
