"""Command-line front end: ``mrfmqc budget | run | sweep``.

Machine-readable output is comma-separated with 17 significant digits;
``--table`` adds an aligned, rounded table for reading.

Exit codes: 0 success, 2 config error, 3 usage/validation error,
4 simulation invariant breach.
"""

import argparse
import io
import math
import sys
from dataclasses import replace

import numpy as np

from . import dynamics, planner, readout
from .config import ConfigError, MachineConfig, load_config
from .dynamics import ChainState, INVERSE_CN, STANDARD_CN
from .fields import TipPosition, all_up, neighbor_dipole_field, rest_of_chain_dipole_field, tip_field_z
from .spinmodel import Spin, _as_spin, thermal_chain_distribution

EXIT_CONFIG, EXIT_USAGE, EXIT_INVARIANT = 2, 3, 4
NORM_TOLERANCE = 1e-8


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_rows(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def write_table(out, header, rows):
    def cell(v):
        return f"{v:.6g}" if isinstance(v, (float, np.floating)) else fmt(v)

    cells = [list(header)] + [[cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    out.write("# rounded for display\n")
    for r in cells:
        out.write("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n")


def _parse_tip(text, geometry):
    if text in (None, "parked"):
        return TipPosition.parked() if text == "parked" else None
    try:
        return TipPosition.at(int(text)).validate(geometry)
    except ValueError:
        raise UsageError(f"bad tip position {text!r}") from None


def _parse_electrons(text, n):
    if text is None:
        return all_up(n)
    if len(text) != n:
        raise UsageError(f"electron config needs {n} characters")
    return tuple(_as_spin(c) for c in text)


def _parse_sites(text):
    try:
        return [int(s) for s in text.split(",")] if text else []
    except ValueError:
        raise UsageError(f"bad site list {text!r}") from None


def cmd_budget(config, site=None, tip=None, electrons=None, n_sites=None, table=False, out=sys.stdout):
    """Print every budget term and the three pulse frequencies."""
    if n_sites is not None:
        config = config.with_values(n_sites=n_sites)
    g, p = config.geometry, config.params
    site = g.n_sites // 2 if site is None else site
    g.check_site(site)
    tip = TipPosition.at(site) if tip is None else tip
    tip.validate(g)
    electrons = all_up(g.n_sites) if electrons is None else electrons
    b = planner.frequency_budget(g, p, tip, electrons, site)
    rows = [("budget", name, value, "Hz") for name, value in b.as_dict().items()]
    rows += [
        ("budget", "electron_pulse_frequency", planner.electron_pulse_frequency(b), "Hz"),
        ("budget", "nuclear_pi_pulse_frequency", planner.nuclear_pi_pulse_frequency(b), "Hz"),
        ("budget", "cn_target_pulse_frequency", planner.cn_target_pulse_frequency(b), "Hz"),
        ("budget", "tip_field_z", tip_field_z(g, tip, site), "T"),
        ("budget", "neighbor_dipole_field", neighbor_dipole_field(g, p, electrons, site), "T"),
        ("budget", "rest_of_chain_dipole_field", rest_of_chain_dipole_field(g, p, electrons, site), "T"),
    ]
    header = ("experiment", "quantity", "value", "unit")
    write_rows(out, header, rows)
    if table:
        write_table(out, header, rows)
    return rows


def _check_norm(state):
    if abs(state.norm - 1.0) > NORM_TOLERANCE:
        raise InvariantError(f"norm drifted to {state.norm!r}")
    return state


def _dump_state(out, state):
    out.write("# state\n")
    rows = [(state.label(i), a.real, a.imag) for i, a in enumerate(state.amplitudes) if a != 0]
    write_rows(out, ("basis", "real", "imag"), rows)


def _dump_probabilities(out, experiment, state):
    out.write("# probabilities\n")
    rows = [(experiment, k, v) for k, v in dynamics.basis_probabilities(state).items()]
    write_rows(out, ("experiment", "basis", "probability"), rows)


def _truth_table_rows(out, experiment, table, ideal):
    out.write("# truth_table\n")
    labels = ["gg", "ge", "eg", "ee"]
    rows = [(experiment, labels[i], labels[j], table[i, j]) for i in range(4) for j in range(4)]
    write_rows(out, ("experiment", "input", "output", "probability"), rows)
    out.write("# fidelity\n")
    write_rows(out, ("experiment", "worst_row_fidelity"), [(experiment, dynamics.gate_fidelity(table, ideal))])


def cmd_run(config, protocol, sites, seed=None, shots=10000, dump_schedule=False, rabi=None, out=sys.stdout):
    """Plan, simulate and report one protocol."""
    g, p, model = config.geometry, config.params, config.detection
    seed = config.seed if seed is None else seed
    if g.n_sites > dynamics.MAX_SITES:
        raise UsageError(f"simulation supports at most {dynamics.MAX_SITES} sites")
    arity = {"init": 0, "x90": 1, "pi": 1, "inverse-cn": 2, "standard-cn": 2, "bell": 2}
    if protocol not in arity:
        raise UsageError(f"unknown protocol {protocol!r}")
    if len(sites) != arity[protocol]:
        raise UsageError(f"{protocol} needs {arity[protocol]} site(s)")
    experiment = protocol
    ground = ChainState.ground(g.n_sites)

    if protocol == "init":
        dist = thermal_chain_distribution(g, p)
        nuclei = dist.sample(np.random.default_rng(seed))
        start = ChainState.basis(all_up(g.n_sites), nuclei)
        state, records = readout.initialize_chain(start, g, p, model, seed=seed)
        _check_norm(state)
        out.write("# measurements\n")
        write_rows(out, ("experiment", "site", "detected", "amplitude", "probability"),
                   [(experiment,) + r.to_row() for r in records])
        out.write("# summary\n")
        write_rows(out, ("experiment", "thermal_sample", "correction_pulses"),
                   [(experiment, "".join("e" if s is Spin.DOWN else "g" for s in nuclei),
                     sum(not r.detected for r in records))])
        _dump_probabilities(out, experiment, state)
        _dump_state(out, state)
        return 0

    if protocol in ("x90", "pi"):
        angle = math.pi / 2 if protocol == "x90" else math.pi
        schedule = planner.plan_one_qubit_rotation(g, p, sites[0], angle, rabi=rabi)
    elif protocol == "inverse-cn":
        schedule = planner.plan_inverse_cn(g, p, sites[0], sites[1], rabi=rabi)
    elif protocol == "standard-cn":
        schedule = planner.plan_standard_cn(g, p, sites[0], sites[1], rabi=rabi)
    else:
        schedule = (planner.plan_one_qubit_rotation(g, p, sites[0], math.pi / 2)
                    + planner.plan_inverse_cn(g, p, sites[0], sites[1], rabi=rabi))

    if dump_schedule:
        out.write("# schedule\n")
        out.write(planner.serialize_schedule(schedule))

    if protocol in ("inverse-cn", "standard-cn"):
        table = dynamics.truth_table(g, p, schedule, sites)
        if np.any(np.abs(table.sum(axis=1) - 1.0) > NORM_TOLERANCE):
            raise InvariantError("truth-table rows are not normalized")
        _truth_table_rows(out, experiment, table, INVERSE_CN if protocol == "inverse-cn" else STANDARD_CN)

    state = _check_norm(dynamics.run_schedule(ground, g, p, schedule))
    if protocol == "bell":
        counts = readout.sample_patterns(state, g, p, model, shots, seed=seed, sites=sites)
        out.write("# outcomes\n")
        write_rows(out, ("experiment", "pattern", "count", "fraction"),
                   [(experiment, k, counts[k], counts[k] / shots) for k in sorted(counts)])
    _dump_probabilities(out, experiment, state)
    _dump_state(out, state)
    return 0


def _grid(start, stop, steps):
    if steps < 2:
        raise UsageError("steps must be at least 2")
    if not (math.isfinite(start) and math.isfinite(stop)) or start == stop:
        raise UsageError("range must be finite with nonzero width")
    return np.linspace(start, stop, steps)


def cmd_sweep(config, parameter, start, stop, steps, sites=(0, 1), rabi=None, out=sys.stdout):
    """Flip probability (or tip shifts) over a one-dimensional grid."""
    g, p = config.geometry, config.params
    grid = _grid(start, stop, steps)
    rows = []
    if parameter == "tip_height":
        site = sites[0] if sites else 0
        for i, d in enumerate(grid):
            try:
                gi = config.with_values(tip_center_height_d=float(d)).geometry
            except ConfigError as exc:
                raise UsageError(str(exc)) from None
            tip = TipPosition.at(site)
            b = planner.frequency_budget(gi, p, tip, all_up(gi.n_sites), site)
            rows.append(("tip_height", i, d, tip_field_z(gi, tip, site), b.delta_f_e, b.delta_f_n))
        write_rows(out, ("experiment", "index", "tip_center_height_d", "tip_field_z", "delta_f_e",
                         "delta_f_n"), rows)
        return rows

    if parameter not in ("carrier_detuning", "rabi"):
        raise UsageError(f"unknown sweep parameter {parameter!r}")
    control, target = sites
    schedule = planner.plan_inverse_cn(g, p, control, target, rabi=rabi)
    base = schedule.pulses[1]
    n = g.n_sites
    flipped = list(all_up(n))
    flipped[control] = Spin.DOWN
    on = ChainState.basis(tuple(flipped), all_up(n))
    off = ChainState.basis(all_up(n), all_up(n))

    def flip(state, pulse):
        after = dynamics.apply_pulse(state, g, p, pulse)
        return float(dynamics.nuclear_marginals(after, [target])[1])

    for i, x in enumerate(grid):
        if parameter == "carrier_detuning":
            pulse = replace(base, carrier_frequency=base.carrier_frequency + x)
        else:
            if not x > 0:
                raise UsageError("rabi grid must be positive")
            pulse = planner.with_rabi(base, float(x))
        rows.append((parameter, i, x, flip(on, pulse), flip(off, pulse)))
    write_rows(out, ("experiment", "index", parameter, "flip_probability_resonant_branch",
                     "flip_probability_detuned_branch"), rows)
    return rows


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--dump-schedule", action="store_true")
    common.add_argument("--shots", type=int, default=10000)
    common.add_argument("--table", action="store_true", help="also print a rounded aligned table")

    parser = _Parser(prog="mrfmqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("budget", parents=[common], help="frequency budget at one site")
    b.add_argument("--site", type=int)
    b.add_argument("--tip", help="site index or 'parked' (default: the budget site)")
    b.add_argument("--electrons", help="electron z-config, one u/d per site")
    b.add_argument("--n-sites", type=int, help="override chain length (budget only)")

    r = sub.add_parser("run", parents=[common], help="simulate a protocol")
    r.add_argument("protocol", choices=["init", "x90", "pi", "inverse-cn", "standard-cn", "bell"])
    r.add_argument("--sites", default="", help="comma-separated site indices")
    r.add_argument("--rabi", type=float, help="override the nuclear Rabi frequency (Hz)")

    s = sub.add_parser("sweep", parents=[common], help="one-parameter sweep")
    s.add_argument("parameter", choices=["carrier_detuning", "rabi", "tip_height"])
    s.add_argument("--range", nargs=2, type=float, required=True, metavar=("START", "STOP"))
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--sites", default="0,1", help="control,target (tip_height: first entry)")
    s.add_argument("--rabi", type=float)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    buffer = io.StringIO()
    try:
        config = load_config(args.config) if args.config else MachineConfig()
        if args.seed is not None:
            config = config.with_values(seed=args.seed)
        if args.command == "budget":
            g = config.geometry if args.n_sites is None else config.with_values(n_sites=args.n_sites).geometry
            cmd_budget(config, site=args.site, tip=_parse_tip(args.tip, g),
                       electrons=_parse_electrons(args.electrons, g.n_sites) if args.electrons else None,
                       n_sites=args.n_sites, table=args.table, out=buffer)
        elif args.command == "run":
            if args.shots < 1:
                raise UsageError("--shots must be positive")
            cmd_run(config, args.protocol, _parse_sites(args.sites), shots=args.shots,
                    dump_schedule=args.dump_schedule, rabi=args.rabi, out=buffer)
        else:
            sites = _parse_sites(args.sites)
            if args.parameter != "tip_height" and len(sites) != 2:
                raise UsageError("sweep needs control,target sites")
            cmd_sweep(config, args.parameter, args.range[0], args.range[1], args.steps, sites=sites,
                      rabi=args.rabi, out=buffer)
    except ConfigError as exc:
        print(f"mrfmqc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"mrfmqc: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, ValueError, IndexError) as exc:
        print(f"mrfmqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = buffer.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
