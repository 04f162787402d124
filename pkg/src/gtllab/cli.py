"""
Command line entry point, installed as ``gtl-lab``.

Exit codes: 0 when every asserted check passes, 1 on an asserted failure (failed check, violated
drift bound, integration failure), 2 on usage or configuration errors.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field, replace
import json
import logging
import math
import numpy as np
import os
from pathlib import Path
import sys
from typing import Dict, List, Optional, Sequence, Tuple
from .bilinear import TauTriple, gtl_tau_residual
from .checks import run_checks
from .core import state_from_dict
from .dynamics import FlowId, IntegratorConfig, integrate, printed_vs_oracle, write_csv, write_stats
from .errata import build_ledger, render, write_ledger
from .errors import ConfigError, DomainError, GtlLabError, KindMismatchError
from .lax import LaxRep, build_lax, spectrum
from .plots import drift_figure
from .poisson import (casimir_c2, casimir_residual, coordinate_observable, hamiltonian, involution_matrix,
                      jacobi_residual, resolve_kappa, resolve_sign)
from .presets.checks import CHECK_SUITES
from .states import GtlState, N3State, RepParams
from .utils import fmt_float, to_jsonable

logger = logging.getLogger(__name__)

SEED_ENV = "GTL_LAB_SEED"

# representation used by "spectrum" when --rep is not given
DEFAULT_REP = {
    "toda": LaxRep.TL_2x2,
    "gtl": LaxRep.GTL_BANDED,
    "n3": LaxRep.N3_SYM,
    "n3q": LaxRep.N3_Q,
    "pq": LaxRep.N3_PQ,
    "cdw": LaxRep.CDW,
}


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of a run. Read from a JSON file with from_json; command line flags override the
    file, and GTL_LAB_SEED overrides both for the seed.

    Parameters:
    -----------
      - flow: FlowId value of the simulated flow
      - states: paths of initial-state JSON documents (more than one needs sweep)
      - preset: integrator preset name from INTEGRATOR_PRESETS
      - integrator: overrides applied on top of the preset (method, dt, atol, rtol, t_end, max_steps)
      - monitors: names of the monitored series to report; None reports all of them
      - out: output directory
      - checks: suites of the "check" command
      - seed: seed of the randomized property checks
      - as_printed: integrate the printed form of the flow where one exists
      - plot: also write the drift figure
      - sweep: run several states concurrently
      - max_drift: hard bound on every reported drift; exceeding it fails the run
    """
    flow: Optional[str] = None
    states: Tuple[str, ...] = ()
    preset: str = "default"
    integrator: Dict[str, object] = field(default_factory=dict)
    monitors: Optional[Tuple[str, ...]] = None
    out: str = "."
    checks: Tuple[str, ...] = tuple(CHECK_SUITES)
    seed: int = 0
    as_printed: bool = False
    plot: bool = False
    sweep: bool = False
    max_drift: Optional[float] = None

    def __post_init__(self):
        if self.flow is not None:
            try:
                FlowId(self.flow)
            except ValueError:
                raise ConfigError(f"Unknown flow '{self.flow}'. Choose from {[f.value for f in FlowId]}") from None
        if len(self.states) > 1 and not self.sweep:
            raise ConfigError("several states need --sweep")
        if self.max_drift is not None and self.max_drift < 0:
            raise ConfigError(f"max_drift must be >= 0, got {self.max_drift}")

    @classmethod
    def from_json(cls, path: "str | Path") -> "RunConfig":
        with open(path) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: a run config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown run config fields {unknown}. Known fields: {sorted(known)}")
        for name in ("states", "monitors", "checks"):
            if doc.get(name) is not None:
                doc[name] = tuple(doc[name])
        return cls(**doc)

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig.from_preset(self.preset, **self.integrator)


########################################################################################################
# helpers
########################################################################################################
def load_state(path: "str | Path"):
    with open(path) as fh:
        doc = json.load(fh)
    return state_from_dict(doc)


def resolve_seed(seed: int) -> int:
    value = os.environ.get(SEED_ENV)
    if value is None or value == "":
        return seed
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got '{value}'") from None


def _print_json(doc):
    print(json.dumps(to_jsonable(doc), indent=2))


def _write_json(doc, path: Path):
    with open(path, "w") as fh:
        json.dump(to_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")


########################################################################################################
# simulate
########################################################################################################
def simulate_one(state_path: str, cfg: RunConfig) -> Tuple[str, Dict[str, float]]:
    """
    Integrate one initial state and write <stem>.csv and <stem>.stats.json (plus the drift figure
    and the printed-vs-oracle table when asked). Returns the stem and the reported drifts.
    """
    state = load_state(state_path)
    out = Path(cfg.out)
    stem = Path(state_path).stem

    traj = integrate(state, cfg.flow, cfg.integrator_config(), as_printed=cfg.as_printed)
    write_csv(traj, out/f"{stem}.csv")
    write_stats(traj, out/f"{stem}.stats.json")

    drifts = traj.drifts()
    if cfg.monitors is not None:
        missing = [m for m in cfg.monitors if m not in drifts]
        if missing:
            logger.warning(f"{missing} are not monitored for flow {cfg.flow}, ignoring them")
        drifts = {k: v for k, v in drifts.items() if k in cfg.monitors}

    if cfg.plot:
        drift_figure(traj, out/f"{stem}.drift.png", names=list(drifts))

    if cfg.as_printed and isinstance(state, GtlState):
        rows = printed_vs_oracle(state)
        with open(out/f"{stem}.printed_vs_oracle.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (v if isinstance(v, str) else fmt_float(v)) for k, v in row.items()})
        print(f"printed vs oracle rhs at t=0 ({stem}):")
        for row in rows:
            print(f"  {row['coordinate']:>8}  printed {row['printed']: .6e}  oracle {row['oracle']: .6e}  "
                  f"difference {row['difference']: .3e}")
    elif cfg.as_printed:
        logger.info(f"no printed-vs-oracle table for a {state.kind} state")

    return stem, drifts


def cmd_simulate(cfg: RunConfig) -> int:
    if cfg.flow is None:
        raise ConfigError("simulate needs --flow")
    if not cfg.states:
        raise ConfigError("simulate needs --state")
    Path(cfg.out).mkdir(parents=True, exist_ok=True)

    if len(cfg.states) == 1:
        results = [simulate_one(cfg.states[0], cfg)]
    else:
        with ThreadPoolExecutor(max_workers=min(len(cfg.states), os.cpu_count() or 1)) as pool:
            results = list(pool.map(lambda p: simulate_one(p, cfg), cfg.states))

    violations = []
    for stem, drifts in results:
        print(f"[simulate] {stem}: flow {cfg.flow}")
        for name, value in drifts.items():
            flag = ""
            if cfg.max_drift is not None and value > cfg.max_drift:
                flag = "  (above max drift)"
                violations.append(f"{stem}:{name}")
            print(f"  max drift {name:>4} = {value:.3e}{flag}")

    if violations:
        print(f"[simulate] FAIL: drift above {cfg.max_drift:.1e} for {violations}")
        return 1
    return 0


########################################################################################################
# check, errata, poisson-check
########################################################################################################
def cmd_check(cfg: RunConfig) -> int:
    report = run_checks(cfg.checks, seed=cfg.seed)
    report.render()
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    path = report.write_json(Path(cfg.out)/"check_report.json")
    print(f"[check] {'OK' if report.passed else 'FAIL'} (report: {path})")
    return 0 if report.passed else 1


def cmd_errata(out: Optional[str]) -> int:
    entries = build_ledger()
    render(entries)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        write_ledger(entries, out)
    return 0


def poisson_report(seed: int, samples: int = 50) -> dict:
    """
    kappa for both bracket tables, sigma, and the Poisson identities on seeded random states.
    """
    rng = np.random.default_rng(seed)
    n3_states = [N3State(*rng.normal(size=6)) for _ in range(samples)]
    gtl_states = [GtlState(2, rng.normal(size=5), rng.normal(size=4), rng.normal(size=4), *rng.normal(size=2))
                  for _ in range(samples)]

    s = n3_states[0]
    H = [hamiltonian(i) for i in (1, 2, 3)]
    observables = H + [coordinate_observable(x) for x in s.coordinates()]
    return {
        "seed": seed,
        "samples": samples,
        "kappa": {"n3": resolve_kappa(n3_states), "gtl": resolve_kappa(gtl_states)},
        "sigma": resolve_sign(s),
        "involution_max": max(float(np.max(involution_matrix(x))) for x in n3_states),
        "jacobi_residual": jacobi_residual(coordinate_observable("a1"), coordinate_observable("a2"), H[1], s),
        "casimir_residuals": {"C1": casimir_residual(H[0], s, observables),
                              "C2": casimir_residual(casimir_c2(1.0), s, observables)},
    }


def cmd_poisson_check(seed: int, samples: int, out: Optional[str]) -> int:
    report = poisson_report(seed, samples)
    _print_json(report)
    if out:
        _write_json(report, Path(out))
    return 0


########################################################################################################
# spectrum, tau-check
########################################################################################################
def cmd_spectrum(state_path: str, rep: Optional[str], d1: float, d2: float, lam: float) -> int:
    state = load_state(state_path)
    if rep is None:
        if state.kind not in DEFAULT_REP:
            raise KindMismatchError(f"no Lax representation for state kind '{state.kind}'")
        rep = DEFAULT_REP[state.kind]
    pair = build_lax(state, rep, RepParams(d1=d1, d2=d2, lam=lam))
    doc = spectrum(pair.L).to_dict()
    doc["rep"] = pair.rep.value
    _print_json(doc)
    return 0


def tau_check_rows(doc: dict) -> Tuple[List[dict], float]:
    """
    Per-coefficient residuals of a tau description: a TauTriple document plus optional
    "coupling" ("corrected" or "printed") and "level" ("tau" or "cdw").
    """
    if not isinstance(doc, dict):
        raise ConfigError("a tau-check description must be a JSON object")
    try:
        tt = TauTriple.from_dict(doc)
    except (KeyError, TypeError) as err:
        raise ConfigError(f"malformed tau-check description: {err}") from err
    coupling = doc.get("coupling", "corrected")
    level = doc.get("level", "tau")
    if coupling not in ("corrected", "printed") or level not in ("tau", "cdw"):
        raise ConfigError(f"coupling must be 'corrected' or 'printed' and level 'tau' or 'cdw', "
                          f"got {coupling!r} and {level!r}")

    residuals = gtl_tau_residual(tt, coupling, level)
    n = max(r.K for r in residuals) + 1
    rows = []
    for k in range(n):
        row = {"order": k}
        for i, r in enumerate(residuals, start=1):
            row[f"r{i}"] = float(r.coeffs[k]) if k <= r.K else float("nan")
        rows.append(row)
    worst = max(r.max_abs() for r in residuals)
    return rows, worst


def cmd_tau_check(input_path: str, out: Optional[str]) -> int:
    with open(input_path) as fh:
        doc = json.load(fh)
    rows, worst = tau_check_rows(doc)

    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([row["order"]] + ["" if math.isnan(v) else fmt_float(v) for k, v in row.items() if k != "order"])
    finally:
        if out:
            fh.close()
    print(f"[tau-check] max residual coefficient {worst:.3e}", file=sys.stderr)
    return 0


########################################################################################################
# argument parsing
########################################################################################################
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtl-lab", description="Verification-first numerics for the "
                                     "generalized Toda lattice.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a flow and write trajectory CSV + stats JSON")
    sim.add_argument("--config", type=Path, help="JSON run config; flags given here override it")
    sim.add_argument("--flow", choices=[f.value for f in FlowId])
    sim.add_argument("--state", nargs="+", help="initial state JSON file(s); several need --sweep")
    sim.add_argument("--preset", help="integrator preset (default, tight, reference, fast)")
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--dt", type=float)
    method = sim.add_mutually_exclusive_group()
    method.add_argument("--rk45", action="store_const", const="rk45_adaptive", dest="method",
                        help="adaptive Dormand-Prince 5(4)")
    method.add_argument("--rk4", action="store_const", const="rk4_fixed", dest="method",
                        help="fixed-step classic Runge-Kutta")
    sim.add_argument("--atol", type=float)
    sim.add_argument("--rtol", type=float)
    sim.add_argument("--monitor", action="append", help="report only this series (repeatable)")
    sim.add_argument("--out", help="output directory (default: current directory)")
    sim.add_argument("--as-printed", action="store_true", default=None,
                     help="integrate the printed form and report printed-vs-oracle rhs for gtl states")
    sim.add_argument("--plot", action="store_true", default=None, help="also write <stem>.drift.png")
    sim.add_argument("--sweep", action="store_true", default=None, help="run several states concurrently")
    sim.add_argument("--max-drift", type=float, help="fail (exit 1) when a reported drift exceeds this")

    chk = sub.add_parser("check", help="run the verification suites and write check_report.json")
    chk.add_argument("--config", type=Path)
    chk.add_argument("--check", help=f"comma-separated suites out of {','.join(CHECK_SUITES)}")
    chk.add_argument("--seed", type=int)
    chk.add_argument("--out", help="output directory (default: current directory)")

    spec = sub.add_parser("spectrum", help="print the sorted eigenvalues of a state's Lax matrix as JSON")
    spec.add_argument("--state", required=True)
    spec.add_argument("--rep", choices=[r.value for r in LaxRep])
    spec.add_argument("--d1", type=float, default=1.0)
    spec.add_argument("--d2", type=float, default=1.0)
    spec.add_argument("--lam", type=float, default=0.0)

    tau = sub.add_parser("tau-check", help="per-coefficient residuals of a tau triple as CSV")
    tau.add_argument("--input", required=True, help="JSON tau description")
    tau.add_argument("--out", help="CSV path (default: stdout)")

    err = sub.add_parser("errata", help="print the errata ledger")
    err.add_argument("--out", help="also write the ledger as JSON")

    poi = sub.add_parser("poisson-check", help="JSON report of kappa, sigma and the Poisson identities")
    poi.add_argument("--seed", type=int, default=0)
    poi.add_argument("--samples", type=int, default=50)
    poi.add_argument("--out")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()

    overrides = {}
    for name in ("flow", "preset", "out", "as_printed", "plot", "sweep", "max_drift", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "state", None):
        overrides["states"] = tuple(args.state)
    if getattr(args, "monitor", None):
        overrides["monitors"] = tuple(args.monitor)
    if getattr(args, "check", None) is not None:
        overrides["checks"] = tuple(n.strip() for n in args.check.split(",") if n.strip())

    integrator = dict(cfg.integrator)
    for flag, key in (("t_end", "t_end"), ("dt", "dt"), ("method", "method"), ("atol", "atol"), ("rtol", "rtol")):
        value = getattr(args, flag, None)
        if value is not None:
            integrator[key] = value
    overrides["integrator"] = integrator

    cfg = replace(cfg, **overrides)
    return replace(cfg, seed=resolve_seed(cfg.seed))


def setup_logging(verbosity: int):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)

    try:
        match args.command:
            case "simulate":
                return cmd_simulate(config_from_args(args))
            case "check":
                cfg = config_from_args(args)
                if not cfg.checks:
                    raise ConfigError("the check list is empty")
                return cmd_check(cfg)
            case "spectrum":
                return cmd_spectrum(args.state, args.rep, args.d1, args.d2, args.lam)
            case "tau-check":
                return cmd_tau_check(args.input, args.out)
            case "errata":
                return cmd_errata(args.out)
            case "poisson-check":
                if args.samples < 1:
                    raise ConfigError(f"--samples must be >= 1, got {args.samples}")
                return cmd_poisson_check(resolve_seed(args.seed), args.samples, args.out)
    except (ConfigError, KindMismatchError, DomainError) as err:
        print(f"[error] {err}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"[error] malformed JSON: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"[error] {err}", file=sys.stderr)
        return 2
    except GtlLabError as err:
        print(f"[fail] {err}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
