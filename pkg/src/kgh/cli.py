"""Command-line entry point: ``kgh {simulate,norms,split,verify,exponents,gwp}``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error,
3 numerical instability.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import FROZEN, STRICHARTZ_PAIRS, DECAY, strichartz_ratios, uniform_bound_ratios
from .config import ExperimentConfig, parse_int, parse_rational, parse_real
from .corpus import GENERATOR, CorpusSpec, generate_corpus
from .errors import ConfigError, InstabilityError, KGHError, ResolutionExhausted
from .grid import Field, GridSpec, NormSpec, l2_norm, norm
from .hartree import HartreeKernel
from .modulation import (
    ModulationParams,
    exponent_table,
    gaussian_window,
    high_low_split,
    modulation_norm,
    partition_weights,
    reconstruct,
    stft_norm,
)
from .propagators import PairState, kg_matrix, propagator_bound_probe
from .snapshot import atomic_write_bytes, read_snapshot, write_snapshot
from .solver import (
    evolve,
    first_order_parts,
    gwp_experiment,
    interaction_energy,
    split_data,
    sumspace_witness_norm,
)

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3


class UsageError(KGHError):
    pass


# -- shared helpers ---------------------------------------------------------------------


def header_lines(meta: dict) -> list[str]:
    lines = [f"# tool = kgh {__version__}", f"# generator = {GENERATOR}"]
    lines += [f"# {k} = {v}" for k, v in meta.items()]
    return lines


def config_meta(cfg: ExperimentConfig) -> dict:
    meta = {"config_sha256": cfg.digest(), "seed": cfg["data.seed"]}
    for line in cfg.canonical().splitlines():
        key, val = line.split(" = ", 1)
        meta[key] = val
    return meta


def write_csv(path, meta: dict, columns, rows):
    buf = io.StringIO()
    for line in header_lines(meta):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    atomic_write_bytes(path, buf.getvalue().encode())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def grid_from_config(cfg: ExperimentConfig) -> GridSpec:
    return GridSpec(cfg["d"], cfg["n"], cfg["L"])


def initial_data(cfg: ExperimentConfig, grid: GridSpec):
    kind = cfg["data.kind"]
    if kind == "zero":
        z = Field.zeros(grid)
        return z, z
    if kind == "gaussian":
        w = cfg["data.width"]
        amp = cfg["data.amplitude"]

        def bump(*x):
            r2 = sum((xi - grid.L / 2) ** 2 for xi in x)
            return amp * np.exp(-r2 / (2 * w * w))

        return Field.from_function(grid, bump, real=True), Field.zeros(grid)
    spec = CorpusSpec(cfg["data.seed"], 2, cfg["data.envelope"], cfg["data.kmax"], cfg["data.amplitude"])
    f, g = generate_corpus(spec, grid)
    return f, g


def parse_grid(text: str) -> GridSpec:
    vals = {}
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"bad --grid item {item!r}; expected key=value")
        k, v = (x.strip() for x in item.split("=", 1))
        vals[k] = v
    unknown = set(vals) - {"d", "n", "L", "m"}
    if unknown:
        raise UsageError(f"unknown --grid key {sorted(unknown)[0]!r}")
    try:
        d = parse_int(vals.get("d", "1"))
        n = parse_int(vals.get("n", "64"))
        if "m" in vals:
            return GridSpec.with_box_density(d, n, parse_int(vals["m"]))
        return GridSpec(d, n, parse_real(vals.get("L", "4pi")))
    except ValueError as exc:
        raise UsageError(f"bad --grid: {exc}") from None


# -- subcommands -------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    grid = grid_from_config(cfg)
    f, g = initial_data(cfg, grid)
    kernel = HartreeKernel(float(cfg["gamma"]), grid.d, cfg["zero_mode"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        traj = evolve(f, g, kernel, cfg["T"], cfg["dt"], cfg["sample_stride"], dealias=cfg["dealias"])
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    if cfg["N"] is not None:
        table = exponent_table(cfg["gamma"], cfg["p"])
        fs, gs = split_data(f, g, cfg["N"], table)
        high = first_order_parts(fs, gs)[1]
        I, vt = interaction_energy(traj, high, kernel)
        witness = sumspace_witness_norm(traj, (fs, gs))
    else:
        I = traj.diagnostics["H"]
        _, vt = interaction_energy(traj, np.zeros(grid.shape, complex), kernel)
        witness = vt
    D = traj.diagnostics
    zeros = np.zeros(len(traj))
    rows = zip(traj.times, D["E"], D.get("Px", zeros), D.get("Py", zeros), D.get("Pz", zeros), D["H"], I, vt, witness)
    cols = ["t", "E", "Px", "Py", "Pz", "H", "I", "vtilde_H1", "witness"]
    write_csv(out / "diag.csv", config_meta(cfg), cols, [[float(x) for x in r] for r in rows])
    every = cfg["snapshot_every"]
    if every > 0:
        for i, u in enumerate(traj.positions()):
            if i % every == 0:
                write_snapshot(out / f"snap_{i:05d}.mkgh", u, traj.times[i], float(cfg["gamma"]))
    E = D["E"]
    drift = abs(E[-1] - E[0]) / E[0] if E[0] else 0.0
    print(f"samples={len(traj)} T={traj.times[-1]:.6g} energy_drift={drift:.3e}")
    return EXIT_OK


def cmd_norms(args) -> int:
    for path in args.snapshots:
        field = read_snapshot(path).field
        if args.kind == "lebesgue":
            val = norm(field, NormSpec.lebesgue(args.p))
        elif args.kind == "sobolev":
            val = norm(field, NormSpec.sobolev(args.s))
        else:
            params = ModulationParams(args.p, args.q, args.s)
            if args.kind == "modulation":
                val = modulation_norm(field, params)
            else:
                val = stft_norm(field, params, gaussian_window(field.spec, args.window_width))
        print(repr(float(val)))
    return EXIT_OK


def cmd_split(args) -> int:
    snap = read_snapshot(args.snapshot)
    table = exponent_table(args.gamma, args.p)
    try:
        res = high_low_split(snap.field, args.N, table, s=args.s)
    except ResolutionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    stem = Path(args.snapshot).with_suffix("")
    low_path = args.low_out or f"{stem}_low.mkgh"
    high_path = args.high_out or f"{stem}_high.mkgh"
    write_snapshot(low_path, res.low, snap.t, snap.gamma)
    write_snapshot(high_path, res.high, snap.t, snap.gamma)
    print(f"R={res.R!r} low_H1={res.low_norm!r} high_M={res.high_norm!r}")
    return EXIT_OK


CHECKS = ("isometry", "grouplaw", "partition", "reconstruction", "strichartz", "uniformbound", "decay")


def _random_states(grid, seed, count):
    fields = generate_corpus(CorpusSpec(seed, 2 * count, alpha=1.5, kmax=(grid.n // 2 - 1) * 2 * math.pi / grid.L), grid)
    return [PairState(f, g) for f, g in zip(fields[::2], fields[1::2])]


def run_check(name, grid, seed, count):
    """Return ``(passed, rows)``; rows are ``(check, index, value, bound)``."""
    rng = np.random.default_rng(seed)
    rows = []
    if name == "partition":
        dev = float(np.abs(partition_weights(grid).partition_sum() - 1).max())
        rows.append((name, 0, dev, 1e-12))
    elif name == "reconstruction":
        pw = partition_weights(grid)
        for i, st in enumerate(_random_states(grid, seed, (count + 1) // 2)):
            for f in (st.position, st.velocity):
                rows.append((name, len(rows), l2_norm(reconstruct(f, pw) - f) / l2_norm(f), 1e-10))
    elif name == "isometry":
        for i, st in enumerate(_random_states(grid, seed, count)):
            t = rng.uniform(-20, 20)
            e0 = st.energy_norm()
            rows.append((name, i, abs(kg_matrix(st, t).energy_norm() - e0) / e0, 1e-10))
    elif name == "grouplaw":
        for i, st in enumerate(_random_states(grid, seed, count)):
            t1, t2 = rng.uniform(-10, 10, size=2)
            a = kg_matrix(kg_matrix(st, t1), t2)
            b = kg_matrix(st, t1 + t2)
            back = kg_matrix(kg_matrix(st, t1), -t1)
            scale = st.energy_norm()
            dev = math.hypot(l2_norm(a.position - b.position), l2_norm(a.velocity - b.velocity)) / scale
            rev = math.hypot(l2_norm(back.position - st.position), l2_norm(back.velocity - st.velocity)) / scale
            rows.append((name, i, max(dev, rev), 1e-10))
    elif name == "strichartz":
        vals = strichartz_ratios(count=count)
        for j, pair in enumerate(STRICHARTZ_PAIRS):
            rows.append((f"{name}{pair}", j, float(vals[:, j].max()), FROZEN["strichartz_max"][pair]))
    elif name == "uniformbound":
        rows.append((name, 0, float(uniform_bound_ratios(count=count).max()), FROZEN["uniform_bound_max"]))
    elif name == "decay":
        spec = GridSpec.with_box_density(1, DECAY["n"], DECAY["m"])
        params = ModulationParams(*DECAY["params"])
        for i, (key, theta, target, tol) in enumerate(
            [("bounded", 0.0, 0.0, 0.15), ("dispersive", 1.0, -0.25, 0.2)]
        ):
            pk = DECAY[key]
            f = Field.from_function(
                spec,
                lambda x: np.exp(-((x - spec.L / 2) ** 2) / (2 * pk["width"] ** 2) + 1j * pk["carrier"] * (x - spec.L / 2)),
            )
            rep = propagator_bound_probe(f, params, spec.L, "decay", theta)
            rows.append((f"decay_theta{int(theta)}", i, abs(rep.value - target), tol))
    else:
        raise UsageError(f"unknown check {name!r}")
    return all(v <= b for _, _, v, b in rows), rows


def cmd_verify(args) -> int:
    grid = parse_grid(args.grid)
    names = []
    for item in args.check or ["partition"]:
        for name in item.split(","):
            if name not in CHECKS:
                raise UsageError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
            names.append(name)
    all_rows, ok = [], True
    for name in names:
        passed, rows = run_check(name, grid, args.seed, args.count)
        worst = max(rows, key=lambda r: r[2] / r[3])
        print(f"{'PASS' if passed else 'FAIL'} {name}: max={worst[2]:.3e} bound={worst[3]:.3e}")
        ok &= passed
        all_rows += rows
    if args.csv:
        meta = {"seed": args.seed, "grid": args.grid, "checks": ",".join(names)}
        write_csv(args.csv, meta, ["check", "index", "value", "bound"], all_rows)
    return EXIT_OK if ok else EXIT_CHECK


def _frac_text(x):
    if x is None:
        return "undefined"
    if isinstance(x, float):
        return "inf"
    if x.denominator == 1:
        return f"{x.numerator} ({float(x):.12g})"
    return f"{x} ({float(x):.12g})"


def cmd_exponents(args) -> int:
    table = exponent_table(args.gamma, args.p)
    for name, val in table.items():
        print(f"{name} = {_frac_text(val)}")
    return EXIT_OK


def cmd_gwp(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    overrides = {}
    if args.p is not None:
        overrides["p"] = args.p
    if args.N_schedule is not None:
        overrides["N_schedule"] = args.N_schedule
    cfg = cfg.with_overrides(**overrides) if overrides else cfg
    grid = grid_from_config(cfg)
    f, g = initial_data(cfg, grid)
    try:
        rep = gwp_experiment(
            f, g, cfg["gamma"], cfg["p"], cfg["N_schedule"], cfg["T_max"], cfg["dt"], cfg["sample_stride"], cfg["zero_mode"]
        )
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[r.N, str(r.theta), r.I0, r.maxI_ratio, r.T_certified, r.growth_slope] for r in rep.rows]
    write_csv(out / "gwp_report.csv", config_meta(cfg), ["N", "theta", "I0", "maxI_ratio", "T_certified", "growth_slope"], rows)
    print(f"energy_slope={rep.energy_slope:.4g} window_slope={rep.window_slope:.4g} growth_slope={rep.growth_slope:.4g}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------


def _fraction_arg(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _real_arg(text):
    try:
        return parse_real(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"kgh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve data from a config and write diag.csv")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("norms", help="print norms of snapshot files, one per line")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--kind", choices=["modulation", "stft", "lebesgue", "sobolev"], default="modulation")
    p.add_argument("--p", type=_real_arg, default=2.0)
    p.add_argument("--q", type=_real_arg, default=2.0)
    p.add_argument("--s", type=_real_arg, default=0.0)
    p.add_argument("--window-width", type=_real_arg, default=1.0)
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("split", help="high-low frequency split of a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--N", type=_real_arg, required=True)
    p.add_argument("--gamma", type=_fraction_arg, default=parse_rational("5/2"))
    p.add_argument("--p", type=_fraction_arg, default=parse_rational("11/5"))
    p.add_argument("--s", type=_real_arg, default=1.0)
    p.add_argument("--low-out")
    p.add_argument("--high-out")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("verify", help="run invariant checks and print PASS/FAIL lines")
    p.add_argument("--check", action="append", help=f"one or more of {', '.join(CHECKS)} (comma list or repeated)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", default="d=1,n=64,L=4pi")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("exponents", help="print the exact exponent table")
    p.add_argument("--gamma", type=_fraction_arg, required=True)
    p.add_argument("--p", type=_fraction_arg, required=True)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("gwp", help="high-low frequency experiment; writes gwp_report.csv")
    p.add_argument("--config", required=True)
    p.add_argument("--p")
    p.add_argument("--N-schedule", dest="N_schedule")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_gwp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except KGHError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
