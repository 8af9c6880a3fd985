"""Command-line interface: exact values, oracle reports, simulations, figures.

Seeds default to 0 and are never read from the environment; every file
output gets a JSON manifest sidecar recording the argument vector, so
any result can be reproduced byte for byte by re-running it.
Exit codes: 0 success, 2 argument error, 3 resource guard tripped.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import __version__, analytic, kernels
from .dynamics import BlockageSemantics, KernelParams
from .lattice import RingGeometry, train_count_list
from .montecarlo import (
    DensityMode,
    InitialState,
    SimulationSpec,
    density_profile,
    run_current,
    sweep,
    threshold_scan,
)
from .oracle import (
    MAX_DENSE_SITES,
    ReducibleChainError,
    StateSpaceTooLargeError,
    build_chain,
    check_global_balance,
    exact_current,
    product_form_discrepancy,
    stationary_distribution,
    verify_weight_stationarity,
)
from .output import (
    DENSITY_HEADER,
    ORACLE_HEADER,
    SWEEP_HEADER,
    THRESHOLD_HEADER,
    fnum,
    open_output,
    write_csv,
    write_manifest,
    write_pgm,
)

_SEMANTICS = {
    "bernoulli": BlockageSemantics.BERNOULLI_ATTEMPT,
    "renormalized": BlockageSemantics.RENORMALIZED_WEIGHT,
}
_INITS = {
    "random": InitialState.RANDOM_HALF_FILLED,
    "alternating": InitialState.HALF_FILLED_ALTERNATING,
    "queue": InitialState.QUEUE,
}


def parse_grid(text: str) -> list[float]:
    """Comma-separated values and start:stop:step ranges, endpoints inclusive.

    Ranges include every start + k*step up to stop within half a step,
    so 0:1:0.05 has 21 points and 0.05:1:0.05 has 20.
    """
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise argparse.ArgumentTypeError("empty grid element")
        if ":" in part:
            pieces = part.split(":")
            if len(pieces) != 3:
                raise argparse.ArgumentTypeError(
                    f"range must be start:stop:step, got {part!r}"
                )
            try:
                start, stop, step = (float(x) for x in pieces)
            except ValueError as exc:
                raise argparse.ArgumentTypeError(str(exc)) from None
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            k = 0
            while True:
                v = round(start + k * step, 10)
                if v > stop + step / 2:
                    break
                values.append(min(v, stop) if v > stop else v)
                k += 1
        else:
            try:
                values.append(float(part))
            except ValueError as exc:
                raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def _add_sim_arguments(parser: argparse.ArgumentParser, measure: int = 100,
                       replicas: int = 100) -> None:
    parser.add_argument("--L", type=int, default=500,
                        help="half ring size; the lattice has 2L sites")
    parser.add_argument("--semantics", choices=sorted(_SEMANTICS),
                        default="bernoulli",
                        help="slow-bond penalty semantics")
    parser.add_argument("--burnin", type=int, default=None,
                        help="burn-in steps (default: 2 (L/p) ln L, rounded up)")
    parser.add_argument("--measure", type=int, default=measure,
                        help="measurement steps after burn-in")
    parser.add_argument("--replicas", type=int, default=replicas)
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0; not read from env)")
    parser.add_argument("--init", choices=sorted(_INITS), default="random",
                        help="initial half-filled configuration")
    parser.add_argument("-o", "--output", default=None,
                        help="CSV output file (default: stdout)")


def _template(args: argparse.Namespace, p: float, eps: float = 0.0) -> SimulationSpec:
    return SimulationSpec(
        geometry=RingGeometry(args.L),
        params=KernelParams(p=p, epsilon=eps, semantics=_SEMANTICS[args.semantics]),
        burn_in=args.burnin,
        measure_steps=args.measure,
        replicas=args.replicas,
        master_seed=args.seed,
        initial_state=_INITS[args.init],
    )


# --- exact ------------------------------------------------------------------

def _omega_from_args(args: argparse.Namespace) -> float:
    if args.omega is not None:
        return args.omega
    if not 0.0 < args.p < 1.0:
        raise ValueError("p must lie in (0, 1) to define a finite hop weight")
    return args.p / (1.0 - args.p)


def _cmd_exact_current(args, argv):
    print(format(analytic.current_closed_form(_omega_from_args(args)), ".10g"))
    return 0


def _cmd_exact_blockage_current(args, argv):
    print(format(analytic.blockage_current_closed_form(args.eps), ".10g"))
    return 0


def _cmd_exact_finite_current(args, argv):
    print(format(analytic.current_finite_L(args.L, args.omega), ".10g"))
    return 0


def _cmd_exact_nl(args, argv):
    for l, count in enumerate(train_count_list(args.L), start=1):
        print(f"{l},{count}")
    return 0


def _cmd_exact_saddle(args, argv):
    if (args.omega is None) == (args.eps is None):
        raise ValueError("give exactly one of --omega or --eps")
    if args.omega is not None:
        result = analytic.maximize_saddle(args.omega)
    else:
        result = analytic.maximize_blockage_saddle(args.eps)
    print("argmax,value")
    print(f"{format(result.argmax, '.10g')},{format(result.value, '.10g')}")
    return 0


# --- oracle -----------------------------------------------------------------

def _cmd_oracle(args, argv):
    if args.sites % 2 or args.sites < 4:
        raise ValueError("--sites must be an even number of at least 4")
    if args.sites > MAX_DENSE_SITES:
        raise StateSpaceTooLargeError(
            f"state space too large: {args.sites} sites exceed the dense-solve "
            f"guard of {MAX_DENSE_SITES}"
        )
    geometry = RingGeometry(args.sites // 2)
    if args.rule184:
        params = KernelParams(p=1.0, epsilon=args.eps,
                              semantics=_SEMANTICS[args.semantics])
    else:
        if args.omega is None:
            raise ValueError("give --omega or --rule184")
        params = KernelParams.from_omega(args.omega, args.eps,
                                         _SEMANTICS[args.semantics])
    chain = build_chain(geometry, args.particles, params)
    dist = stationary_distribution(chain)
    report = exact_current(chain, dist)

    rows = []
    for i in range(chain.n_states):
        cfg = chain.state(i)
        rows.append([
            str(i),
            cfg.bitstring(),
            str(cfg.engine_count()),
            fnum(float(dist.probabilities[i])),
            fnum(cfg.is_ph_symmetric()),
            fnum(cfg.is_in_omega_inf()),
        ])
    with open_output(args.output) as handle:
        write_csv(handle, ORACLE_HEADER, rows)

    summary = [
        f"states {chain.n_states}",
        f"closed_classes {' '.join(str(len(c)) for c in dist.closed_classes)}",
        f"residual {dist.residual:.3e}",
        f"engine_fraction {format(report.engine_fraction, '.10g')}",
        f"first_half_fraction {format(report.first_half_fraction, '.10g')}",
        f"second_half_free_fraction {format(report.second_half_free_fraction, '.10g')}",
    ]
    if not args.rule184:
        try:
            omega_exact = Fraction(str(args.omega))
            eps_exact = Fraction(str(args.eps))
        except ValueError:
            omega_exact, eps_exact = args.omega, args.eps
        violation = check_global_balance(geometry, args.particles,
                                         omega_exact, eps_exact)
        summary.append(f"balance_violation {violation}")
        if args.eps == 0.0:
            gap = verify_weight_stationarity(geometry, args.particles, args.omega)
            summary.append(f"max_weight_gap {gap:.3e}")
    else:
        recurrent = max(dist.closed_classes, key=len) if dist.closed_classes else ()
        summary.append(f"recurrent_size {len(recurrent)}")
        if 0.0 < args.eps < 1.0:
            summary.append(
                f"product_form_gap {product_form_discrepancy(chain, dist):.3e}"
            )
    print("\n".join(summary), file=sys.stderr)

    if args.output:
        write_manifest(args.output, "oracle", argv, {
            "sites": args.sites, "particles": args.particles,
            "omega": args.omega, "rule184": args.rule184, "eps": args.eps,
            "semantics": args.semantics,
        }, 0, [args.output])
    return 0


# --- simulation commands ----------------------------------------------------

def _estimate_row(est) -> list[str]:
    spec = est.spec
    return [
        fnum(spec.params.p),
        fnum(spec.params.epsilon),
        str(spec.geometry.half_size),
        str(spec.effective_burn_in),
        str(spec.measure_steps),
        str(spec.replicas),
        str(spec.master_seed),
        fnum(est.mean),
        fnum(est.std_error),
    ]


def _cmd_simulate(args, argv):
    spec = _template(args, args.p, args.eps)
    est = run_current(spec)
    with open_output(args.output) as handle:
        write_csv(handle, SWEEP_HEADER, [_estimate_row(est)])
    if args.output:
        write_manifest(args.output, "simulate", argv, {
            "L": args.L, "p": args.p, "eps": args.eps,
            "burnin": args.burnin, "measure_steps": args.measure,
            "replicas": args.replicas, "semantics": args.semantics,
            "init": args.init,
        }, args.seed, [args.output])
    return 0


def _cmd_sweep(args, argv):
    template = _template(args, p=1.0)
    estimates = sweep(args.p, args.eps, template, workers=args.workers)
    with open_output(args.output) as handle:
        write_csv(handle, SWEEP_HEADER, [_estimate_row(e) for e in estimates])
    if args.output:
        write_manifest(args.output, "sweep", argv, {
            "L": args.L, "p_grid": args.p, "eps_grid": args.eps,
            "burnin": args.burnin, "measure_steps": args.measure,
            "replicas": args.replicas, "semantics": args.semantics,
            "init": args.init, "workers": args.workers,
        }, args.seed, [args.output])
    return 0


def _cmd_density(args, argv):
    mode = DensityMode.SNAPSHOT if args.mode == "snapshot" \
        else DensityMode.TIME_REPLICA_AVERAGE
    rows = []
    profiles = []
    for eps in args.eps:
        spec = _template(args, args.p, eps)
        profile = density_profile(spec, bin_width=args.bin, mode=mode)
        profiles.append((eps, profile))
        for b, value in enumerate(profile.values):
            rows.append([
                fnum(args.p), fnum(eps), str(args.L), args.mode,
                str(b), str(b * args.bin + 1), str((b + 1) * args.bin),
                fnum(value),
            ])
    with open_output(args.output) as handle:
        write_csv(handle, DENSITY_HEADER, rows)
    if args.heatmap:
        write_pgm(args.heatmap, [profile.values for _, profile in profiles])
    outputs = [o for o in (args.output, args.heatmap) if o]
    if outputs:
        write_manifest(outputs[0], "density", argv, {
            "L": args.L, "p": args.p, "eps_grid": args.eps, "mode": args.mode,
            "bin": args.bin, "burnin": args.burnin,
            "measure_steps": args.measure, "replicas": args.replicas,
            "semantics": args.semantics, "init": args.init,
        }, args.seed, outputs)
    return 0


def _cmd_threshold(args, argv):
    rows = []
    for p in args.p:
        template = _template(args, p)
        result = threshold_scan(p, args.tolerance, template,
                                coarse_step=args.coarse,
                                resolution=args.resolution)
        rows.append([
            fnum(result.p),
            fnum(result.eps_star),
            fnum(result.tolerance),
            fnum(result.noise_floor),
        ])
    with open_output(args.output) as handle:
        write_csv(handle, THRESHOLD_HEADER, rows)
    if args.output:
        write_manifest(args.output, "threshold", argv, {
            "L": args.L, "p_grid": args.p, "tolerance": args.tolerance,
            "coarse": args.coarse, "resolution": args.resolution,
            "burnin": args.burnin, "measure_steps": args.measure,
            "replicas": args.replicas, "semantics": args.semantics,
            "init": args.init,
        }, args.seed, [args.output])
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partasep",
        description="Ring exclusion process with one slow bond: exact values, "
                    "oracle checks, and simulations.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({kernels.BACKEND} kernel)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="closed-form and finite-L values")
    esub = p_exact.add_subparsers(dest="subcommand", required=True)

    e_current = esub.add_parser("current", help="infinite-ring current, no slow bond")
    group = e_current.add_mutually_exclusive_group(required=True)
    group.add_argument("--omega", type=float)
    group.add_argument("--p", type=float)
    e_current.set_defaults(func=_cmd_exact_current)

    e_block = esub.add_parser("blockage-current",
                              help="infinite-ring current of the p=1 rule")
    e_block.add_argument("--eps", type=float, required=True)
    e_block.set_defaults(func=_cmd_exact_blockage_current)

    e_finite = esub.add_parser("finite-current", help="exact current on 2L sites")
    e_finite.add_argument("--L", type=int, required=True)
    e_finite.add_argument("--omega", type=float, required=True)
    e_finite.set_defaults(func=_cmd_exact_finite_current)

    e_nl = esub.add_parser("nl", help="train-count table n(l) at half filling")
    e_nl.add_argument("--L", type=int, required=True)
    e_nl.set_defaults(func=_cmd_exact_nl)

    e_saddle = esub.add_parser("saddle", help="variational maximiser and value")
    e_saddle.add_argument("--omega", type=float)
    e_saddle.add_argument("--eps", type=float)
    e_saddle.set_defaults(func=_cmd_exact_saddle)

    p_oracle = sub.add_parser("oracle", help="exact small-ring stationary report")
    p_oracle.add_argument("--sites", type=int, required=True)
    p_oracle.add_argument("--particles", type=int, required=True)
    p_oracle.add_argument("--omega", type=float, default=None)
    p_oracle.add_argument("--rule184", action="store_true",
                          help="use the p=1 rule instead of a finite omega")
    p_oracle.add_argument("--eps", type=float, default=0.0)
    p_oracle.add_argument("--semantics", choices=sorted(_SEMANTICS),
                          default="bernoulli")
    p_oracle.add_argument("-o", "--output", default=None)
    p_oracle.set_defaults(func=_cmd_oracle)

    p_sim = sub.add_parser("simulate", help="single current estimate")
    p_sim.add_argument("--p", type=float, required=True)
    p_sim.add_argument("--eps", type=float, default=0.0)
    _add_sim_arguments(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="current over a (p, eps) grid")
    p_sweep.add_argument("--p", type=parse_grid, required=True,
                         help="grid, e.g. 0.05:1:0.05 or 0.001,0.5,1")
    p_sweep.add_argument("--eps", type=parse_grid, required=True)
    p_sweep.add_argument("--workers", type=int, default=1)
    _add_sim_arguments(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_density = sub.add_parser("density", help="coarse-grained density profiles")
    p_density.add_argument("--p", type=float, required=True)
    p_density.add_argument("--eps", type=parse_grid, required=True)
    p_density.add_argument("--mode", choices=["snapshot", "average"],
                           default="average")
    p_density.add_argument("--bin", type=int, default=10)
    p_density.add_argument("--heatmap", default=None,
                           help="also write a PGM image, one row per eps")
    _add_sim_arguments(p_density)
    p_density.set_defaults(func=_cmd_density)

    p_thr = sub.add_parser("threshold",
                           help="smallest eps with a resolvable current drop")
    p_thr.add_argument("--p", type=parse_grid, required=True)
    p_thr.add_argument("--tolerance", type=float, default=0.01)
    p_thr.add_argument("--coarse", type=float, default=0.05)
    p_thr.add_argument("--resolution", type=float, default=0.005)
    _add_sim_arguments(p_thr, measure=2000, replicas=16)
    p_thr.set_defaults(func=_cmd_threshold)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except StateSpaceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ReducibleChainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
