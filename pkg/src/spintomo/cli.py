"""Command-line front end.

Subcommands cover the whole pipeline: ``simulate`` produces record
files, ``reconstruct`` turns them into estimates, ``compare`` runs the
continuous-vs-discrete convergence study, ``scaling`` the multi-spin
error-growth study, ``plan-field`` the apparatus field table and
``verify-group`` the finite-group checks.  Every run writes a manifest
next to its outputs; identical inputs reproduce outputs bit-exactly.

Exit codes: 0 success, 2 flag/validation error, 3 malformed data file,
4 verification failure.
"""

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from . import groupverify as gv
from . import io as tio
from . import reconstruct as rc
from . import simulate as sim
from . import spincore as sc
from .io import RecordFormatError

EXIT_OK = 0
EXIT_FLAG = 2
EXIT_DATA = 3
EXIT_VERIFY = 4


def _parse_state(spec_text, two_s, expected_dim=None):
    """Parse a --state flag: coherent:ALPHA, thermal:EPSILON or file:PATH."""
    expected_dim = expected_dim if expected_dim is not None else two_s + 1
    kind, _, arg = spec_text.partition(":")
    if kind == "coherent":
        alpha = complex(arg) if arg else 1.0
        rho = sc.DensityMatrix.from_pure(sc.coherent_state(two_s, alpha))
    elif kind == "thermal":
        rho = sc.thermal_state(two_s, float(arg) if arg else 1.0)
    elif kind == "file":
        rho = tio.load_density_matrix(arg)
    else:
        raise ValueError(
            f"--state must be coherent:A, thermal:E or file:PATH, got {spec_text!r}")
    if rho.dim != expected_dim:
        raise ValueError(f"--state has dim {rho.dim}, expected {expected_dim}")
    return rho


def _write_manifest(args, outputs, extra=None):
    manifest = {
        "schema_version": tio.SCHEMA_VERSION,
        "tool_version": __version__,
        "command": args.command,
        "config": {k: v for k, v in vars(args).items()
                   if k not in ("func", "command")},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    path = outputs[0] + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, default=str)
    return path


def cmd_simulate(args):
    if args.mode == "indistinguishable":
        if args.spin != 1:
            raise ValueError("indistinguishable mode is for spin-1/2 "
                             "constituents (--spin 1)")
        rho = _parse_state(args.state, args.spin,
                           expected_dim=2 ** args.copies)
        records = sim.run_coupled_experiment(rho, args.samples, args.seed,
                                             args.copies)
    elif args.mode == "distinguishable":
        rho = _parse_state(args.state, args.spin)
        records = sim.run_product_experiment([rho] * args.copies,
                                             args.samples, args.seed)
    else:
        rho = _parse_state(args.state, args.spin)
        config = sim.ExperimentConfig(
            true_state=rho, num_samples=args.samples, num_blocks=args.blocks,
            seed=args.seed, scheme=args.scheme, mode=args.mode)
        records = sim.run_experiment(config)
    if args.format == "csv":
        tio.write_records_csv(records, args.out)
    else:
        tio.write_records_json(records, args.out)
    _write_manifest(args, [args.out])
    print(f"wrote {args.samples} records to {args.out}")
    return EXIT_OK


def _theory_diagonal(truth_text, two_s):
    rho = _parse_state(truth_text, two_s)
    return np.diag(rho.matrix).real


def cmd_reconstruct(args):
    records = tio.read_records(args.records)
    if isinstance(records, sim.SingleRecords):
        if args.scheme == "continuous":
            estimate = rc.mc_reconstruct_single(records, args.blocks)
        elif args.scheme == "pauli_half":
            estimate = rc.discrete_reconstruct_half(records, args.blocks)
        elif args.scheme == "tetrahedral_one":
            estimate = rc.discrete_reconstruct_one(records, args.blocks)
        else:
            raise ValueError(f"scheme {args.scheme!r} not valid for single-spin records")
        two_s = records.two_s
    elif isinstance(records, sim.MultiRecords):
        estimate = rc.multiparticle_reconstruct(records, args.blocks)
        two_s = None
    else:
        estimate = rc.indistinguishable_reconstruct(records, args.blocks)
        two_s = None
    tio.write_estimate(estimate, args.out)
    outputs = [args.out]
    if args.diag:
        theory = None
        if args.truth and two_s is not None:
            theory = _theory_diagonal(args.truth, two_s)
        tio.write_diagonal_csv(estimate, args.diag, theory)
        outputs.append(args.diag)
    _write_manifest(args, outputs)
    trace = np.trace(estimate.matrix).real
    print(f"estimate written to {args.out} (trace {trace:.4f}, "
          f"{estimate.num_samples} samples, {estimate.num_blocks} blocks)")
    return EXIT_OK


def _checkpoints(total, num_blocks):
    pts = []
    n = 200
    while n < total:
        if n % num_blocks == 0:
            pts.append(n)
        n *= 2
    pts.append(total)
    return pts


def cmd_compare(args):
    if args.spin not in (1, 2):
        raise ValueError("--spin must be 1 (s=1/2) or 2 (s=1) for the discrete schemes")
    rho = _parse_state(args.state, args.spin)
    scheme = "pauli_half" if args.spin == 1 else "tetrahedral_one"
    ops = sc.spin_operators(args.spin)
    theory = float(np.trace(rho.matrix @ ops.sz).real)

    cont = sim.run_experiment(sim.ExperimentConfig(
        rho, args.samples, args.blocks, seed=args.seed, scheme="continuous"))
    disc = sim.run_experiment(sim.ExperimentConfig(
        rho, args.samples, args.blocks, seed=args.seed + 1, scheme=scheme))
    cont_scalars = rc.sz_contributions_single(cont)
    disc_scalars = rc.sz_contributions_discrete(disc, scheme)

    rows = []
    for n in _checkpoints(args.samples, args.blocks):
        if n % args.blocks:
            continue
        sc_stat = rc.block_statistics(cont_scalars[:n], args.blocks)
        sd_stat = rc.block_statistics(disc_scalars[:n], args.blocks)
        rows.append([n, float(sc_stat.mean), float(sc_stat.std_error),
                     float(sd_stat.mean), float(sd_stat.std_error), theory])
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["num_samples", "sz_continuous", "sigma_continuous",
                         "sz_discrete", "sigma_discrete", "theory"])
        writer.writerows(rows)
    _write_manifest(args, [args.out])
    if rows:
        last = rows[-1]
        combined = math.hypot(last[2], last[4])
        print(f"final <s_z>: continuous {last[1]:.4f}+-{last[2]:.4f}, "
              f"discrete {last[3]:.4f}+-{last[4]:.4f}, theory {theory:.4f}, "
              f"discrepancy {abs(last[1] - last[3]) / combined:.2f} combined sigma")
    return EXIT_OK


def scaling_study(max_spins, samples, alpha, blocks, seed):
    """Error growth of the <S_z> estimate with the particle count, for a
    product of identical coherent qubit states."""
    qubit = sc.DensityMatrix.from_pure(sc.coherent_state(1, alpha))
    ops = sc.spin_operators(1)
    sz_single = float(np.trace(qubit.matrix @ ops.sz).real)
    rows = []
    for n_spins in range(1, max_spins + 1):
        records = sim.run_product_experiment([qubit] * n_spins, samples,
                                             seed + n_spins)
        scalars = rc.total_sz_contributions(records)
        stat = rc.block_statistics(scalars, blocks)
        rows.append([n_spins, float(stat.mean), float(stat.std_error),
                     n_spins * sz_single])
    x = np.array([r[0] for r in rows], dtype=float)
    y = np.log([r[2] for r in rows])
    design = np.vstack([x, np.ones_like(x)]).T
    coeffs, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coeffs
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return rows, float(coeffs[0]), r_squared


def cmd_scaling(args):
    if args.max_spins > args.cap:
        raise ValueError(f"--max-spins {args.max_spins} exceeds the cap {args.cap}")
    rows, slope, r_squared = scaling_study(args.max_spins, args.samples,
                                           args.alpha, args.blocks, args.seed)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["num_spins", "sz_estimate", "sigma", "theory"])
        writer.writerows(rows)
    _write_manifest(args, [args.out],
                    extra={"semilog_slope": slope, "r_squared": r_squared})
    print(f"semilog slope of sigma vs particle count: {slope:.4f} "
          f"(R^2 = {r_squared:.3f})")
    return EXIT_OK


def cmd_plan_field(args):
    if args.particle == "electron":
        params = sim.ApparatusParams.electron()
    elif args.particle == "nucleon":
        params = sim.ApparatusParams.nucleon()
    else:
        params = sim.ApparatusParams.from_beam(args.gamma, args.speed, args.length)
    thetas = np.linspace(0.0, math.pi, args.steps)
    fields = [sim.plan_field(t, params) for t in thetas]
    print(f"transit time: {params.transit_time:.3e} s")
    print(f"{'theta (rad)':>12}  {'B1 (Gauss)':>12}")
    for t, b in zip(thetas, fields):
        print(f"{t:12.4f}  {b:12.4f}")
    b_max = max(abs(b) for b in fields)
    if b_max > 1e4:
        print(f"warning: |B1| up to {b_max:.1f} Gauss exceeds 1e4 Gauss",
              file=sys.stderr)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta", "B1_gauss"])
            writer.writerows(zip(thetas.tolist(), fields))
        _write_manifest(args, [args.out],
                        extra={"transit_time_s": params.transit_time})
    return EXIT_OK


def cmd_verify_group(args):
    report = gv.verification_report(args.group, trials=args.trials,
                                    seed=args.seed)
    text = json.dumps(report, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _write_manifest(args, [args.out])
    print(text)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spintomo",
        description="Spin-state tomography: simulation, reconstruction and "
                    "verification tools.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads for sample generation "
                             "(0 = machine default; results do not depend on "
                             "it; the SPINTOMO_THREADS env var overrides)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a measurement record file")
    p.add_argument("--spin", type=int, required=True, metavar="TWO_S",
                   help="doubled spin quantum number (2s)")
    p.add_argument("--state", default="coherent:1",
                   help="coherent:ALPHA, thermal:EPSILON or file:PATH")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--scheme", choices=sim.SCHEMES, default="continuous")
    p.add_argument("--mode", choices=sim.MODES, default="single")
    p.add_argument("--copies", type=int, default=2,
                   help="particle count for the multi-particle modes")
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="estimate a density matrix from records")
    p.add_argument("--records", required=True)
    p.add_argument("--scheme", choices=sim.SCHEMES, default="continuous")
    p.add_argument("--blocks", type=int, default=10)
    p.add_argument("--truth",
                   help="true state (same syntax as --state) for the "
                        "theory column of --diag")
    p.add_argument("--out", required=True)
    p.add_argument("--diag", help="write a diagonal-profile CSV here")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare",
                       help="continuous vs discrete convergence of <s_z>")
    p.add_argument("--spin", type=int, default=1, metavar="TWO_S")
    p.add_argument("--state", default="coherent:2")
    p.add_argument("--samples", type=int, default=40000)
    p.add_argument("--blocks", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scaling", help="error growth with the particle count")
    p.add_argument("--max-spins", type=int, default=6)
    p.add_argument("--cap", type=int, default=8)
    p.add_argument("--samples", type=int, default=10 ** 6)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--blocks", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("plan-field", help="field plan for the rotation magnet")
    p.add_argument("--particle", choices=("electron", "nucleon", "custom"),
                   default="electron")
    p.add_argument("--gamma", type=float, help="rad/s/Gauss (custom)")
    p.add_argument("--speed", type=float, help="beam speed, cm/s (custom)")
    p.add_argument("--length", type=float, default=1.0,
                   help="magnet length, cm (custom)")
    p.add_argument("--steps", type=int, default=13)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan_field)

    p = sub.add_parser("verify-group", help="finite-group identity checks")
    p.add_argument("--group", choices=sorted(gv.GROUPS), required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_group)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    env_threads = os.environ.get("SPINTOMO_THREADS")
    if env_threads is not None:
        try:
            args.threads = int(env_threads)
        except ValueError:
            print(f"error: SPINTOMO_THREADS={env_threads!r} is not an integer",
                  file=sys.stderr)
            return EXIT_FLAG
    if args.command == "plan-field" and args.particle == "custom":
        if args.gamma is None or args.speed is None:
            parser.error("--particle custom requires --gamma and --speed")
    try:
        return args.func(args)
    except RecordFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAG


if __name__ == "__main__":
    sys.exit(main())
