"""
Verification suites behind the "check" command. Each suite returns CheckResult rows; asserted
rows pass or fail against CHECK_TOLERANCES, measured rows only record a value.
"""
from dataclasses import asdict, dataclass, field
import json
import logging
import numpy as np
from pathlib import Path
import pandas as pd
import sys
from typing import Callable, Dict, List, Optional, Sequence, TextIO
from .bilinear import (SeriesFn, epsilon_slope, gtl_tau_residual, nlse_residual, plane_wave, series_solve,
                       sinh_form_residual, tau_seed_from_n3, toda_bilinear_residual)
from .dynamics import (C2_U_FLOOR, FlowId, IntegratorConfig, cdw_rhs_via_n3, integrate, reduction_check, rhs,
                       rhs_from_lax)
from .errata import (CLASSIC_UNIT_FIXTURE, CLASSIC_ZERO_FIXTURE, ErrataEntry, GTL_FIXTURE, N3_FIXTURE,
                     N3_ISOSPECTRAL_FIXTURE, N3_KAPPA_FIXTURE, TODA_FIXTURE, build_ledger)
from .errors import ConfigError, LaxClosureError
from .lax import LaxRep, build_lax, discrete_lax_residual, r_matrix_residual, spectrum
from .model import cdw_from_n3, n3_from_n3q
from .poisson import (PRINTED_KAPPA, casimir_c2, casimir_residual, coordinate_observable, ham_flow_residual,
                      hamiltonian, involution_matrix, jacobi_residual, resolve_kappa, resolve_sign)
from .presets.checks import CHECK_SAMPLES, CHECK_SUITES, CHECK_TOLERANCES
from .states import GtlState, N3QState, N3State, RepParams
from .utils import drift, to_jsonable

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    status: str
    value: float
    tolerance: Optional[float] = None
    detail: str = ""


def _below(name: str, value: float, tol_key: str, detail: str = "") -> CheckResult:
    tol = CHECK_TOLERANCES[tol_key]
    return CheckResult(name, "pass" if value <= tol else "fail", float(value), tol, detail)


def _above(name: str, value: float, tol_key: str, detail: str = "") -> CheckResult:
    tol = CHECK_TOLERANCES[tol_key]
    return CheckResult(name, "pass" if value >= tol else "fail", float(value), tol, detail)


def _measured(name: str, value: float, detail: str = "") -> CheckResult:
    return CheckResult(name, "measured", float(value), None, detail)


@dataclass
class CheckReport:
    results: List[CheckResult] = field(default_factory=list)
    errata: List[ErrataEntry] = field(default_factory=list)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return not any(r.status == "fail" for r in self.results)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "passed": self.passed, "results": [asdict(r) for r in self.results],
                "errata": [asdict(e) for e in self.errata]}

    def write_json(self, path: "str | Path") -> Path:
        path = Path(path)
        with open(path, "w") as fh:
            json.dump(to_jsonable(self.to_dict()), fh, indent=2)
            fh.write("\n")
        return path

    def frame(self) -> pd.DataFrame:
        df = pd.DataFrame([asdict(r) for r in self.results],
                          columns=["name", "status", "value", "tolerance", "detail"])
        return df.astype({"value": float, "tolerance": float})

    def render(self, stream: Optional[TextIO] = None):
        out = stream or sys.stdout
        print(f"Checks (seed {self.seed}): {'PASS' if self.passed else 'FAIL'}", file=out)
        print(self.frame().to_string(index=False, na_rep="-", float_format=lambda x: f"{x:.3e}"), file=out)


########################################################################################################
# random states
########################################################################################################
def random_n3(rng: np.random.Generator, low: float = -2.0, high: float = 2.0, min_u: float = 0.1) -> N3State:
    """
    Fields drawn uniformly from [low, high]; u is redrawn until |u| >= min_u.
    """
    x = rng.uniform(low, high, size=6)
    while abs(x[5]) < min_u:
        x[5] = rng.uniform(low, high)
    return N3State(*x)


def random_gtl(rng: np.random.Generator, N: int = 2, classic: bool = False) -> GtlState:
    u, v = (0.0, 0.0) if classic else rng.normal(size=2)
    return GtlState(N, rng.normal(size=2*N + 1), rng.normal(size=2*N), rng.normal(size=2*N), u, v)


########################################################################################################
# suites
########################################################################################################
def suite_lax(rng: np.random.Generator) -> List[CheckResult]:
    n = CHECK_SAMPLES["oracle_states"]
    n3_gap = max(np.max(np.abs(rhs(s, FlowId.N3) - rhs_from_lax(s, LaxRep.N3_SYM)))
                 for s in (random_n3(rng) for _ in range(n)))

    cdw_gap = 0.0
    for _ in range(n):
        c = cdw_from_n3(random_n3(rng))
        cdw_gap = max(cdw_gap, float(np.max(np.abs(rhs(c, FlowId.CDW) - cdw_rhs_via_n3(c)))))

    s = TODA_FIXTURE
    qp = rhs(s, FlowId.TL_QP)
    discrete = max(discrete_lax_residual(s, lam, qp[:s.N], qp[s.N:]) for lam in (0.0, 1.0))

    # D^{-1} L D with D = diag(1, sqrt(d1), sqrt(d1 d2)) is the symmetric matrix with scaled couplings
    d1, d2 = 2.0, 0.5
    q_state = N3QState((0.2, -0.1, 0.3), (0.4, -0.2, 0.1), 0.8, 0.6)
    base = n3_from_n3q(q_state)
    scaled = N3State(*base.p, base.a1*np.sqrt(d1), base.a2*np.sqrt(d2), base.u*np.sqrt(d1*d2))
    iso = float(np.max(np.abs(spectrum(build_lax(q_state, LaxRep.N3_Q, RepParams(d1=d1, d2=d2)).L).real -
                              spectrum(build_lax(scaled, LaxRep.N3_SYM).L).real)))

    cdw = cdw_from_n3(N3_FIXTURE)
    try:
        rhs_from_lax(cdw, LaxRep.CDW)
        closure = 0.0
    except LaxClosureError as err:
        closure = abs(err.value)

    return [_below("lax.n3_oracle", n3_gap, "oracle_equivalence", f"{n} random states"),
            _below("lax.cdw_via_n3", cdw_gap, "oracle_equivalence", f"{n} random states, c/d/w from three-site"),
            _below("lax.discrete_2x2", discrete, "discrete_lax", "lambda in {0, 1}"),
            _below("lax.n3q_isospectral", iso, "involution", "d1=2, d2=0.5"),
            _measured("lax.cdw_printed_closure", closure, "largest entry outside the pattern, both orders fail")]


def suite_reduction(rng: np.random.Generator) -> List[CheckResult]:
    n = CHECK_SAMPLES["reduction_states"]
    worst = max(reduction_check(random_gtl(rng, N=2, classic=True)) for _ in range(n))
    return [_below("reduction.classic_limit", worst, "reduction", f"{n} random states, N = 2")]




def suite_poisson(rng: np.random.Generator) -> List[CheckResult]:
    n = CHECK_SAMPLES["kappa_states"]
    n3_states = [random_n3(rng) for _ in range(n)]
    gtl_states = [random_gtl(rng) for _ in range(n)]

    kappa_n3 = resolve_kappa(n3_states)
    kappa_gtl = resolve_kappa(gtl_states)
    flow_n3 = max(ham_flow_residual(s, kappa_n3) for s in n3_states)
    flow_gtl = max(ham_flow_residual(s, kappa_gtl) for s in gtl_states)
    gap = ham_flow_residual(N3_KAPPA_FIXTURE, PRINTED_KAPPA)

    m = CHECK_SAMPLES["involution_states"]
    inv = max(float(np.max(involution_matrix(random_n3(rng)))) for _ in range(m))

    s = N3_FIXTURE
    H = [hamiltonian(i) for i in (1, 2, 3)]
    observables = H + [coordinate_observable(x) for x in s.coordinates()]
    casimir = max(casimir_residual(casimir_c2(1.0), s, observables), casimir_residual(H[0], s, observables))
    jac = jacobi_residual(coordinate_observable("a1"), coordinate_observable("a2"), H[1], s)

    return [_below("poisson.ham_flow_n3", flow_n3, "ham_flow", f"kappa = {kappa_n3:.15g}"),
            _below("poisson.ham_flow_gtl", flow_gtl, "ham_flow", f"kappa = {kappa_gtl:.15g}"),
            _above("poisson.printed_kappa_gap", gap, "printed_kappa_gap", "kappa = 2 on the three-site bracket"),
            _below("poisson.sign", 0.0 if resolve_sign(s) == 1 else 1.0, "involution", "dx/dt = {H, x}"),
            _below("poisson.involution", inv, "involution", f"max |{{H_i, H_j}}|, {m} states"),
            _below("poisson.casimir", casimir, "casimir", "C1 and C2 against H1..H3 and coordinates"),
            _below("poisson.jacobi", jac, "jacobi", "a1, a2, H2")]


def suite_rmatrix(rng: np.random.Generator) -> List[CheckResult]:
    rows = []
    for label, state in (("gtl", GTL_FIXTURE), ("n3", N3_FIXTURE), ("classic_zero", CLASSIC_ZERO_FIXTURE),
                         ("classic_unit", CLASSIC_UNIT_FIXTURE)):
        rows.append(_measured(f"rmatrix.{label}_rt", r_matrix_residual(state, form="rt"), "[r, L1] - [r^T, L2]"))
        rows.append(_measured(f"rmatrix.{label}_sum", r_matrix_residual(state, form="sum"), "[r, L1 + L2]"))
    return rows


def suite_flow(rng: np.random.Generator) -> List[CheckResult]:
    cfg = IntegratorConfig.from_preset("default", t_end=10.0)
    traj = integrate(N3_ISOSPECTRAL_FIXTURE, FlowId.N3, cfg)
    eig = max(drift(traj.series[f"lam{i}"]) for i in (1, 2, 3))
    ham = max(drift(traj.series[f"H{i}"]) for i in (1, 2, 3))
    cas = max(drift(traj.series[name]) for name in ("C1", "C2", "C3"))
    c2 = np.asarray(traj.series["C2"])
    cutoff = traj.times[int(np.argmin(np.isfinite(c2)))] if not np.all(np.isfinite(c2)) else traj.times[-1]

    half = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("tight", t_end=2.5), monitors=[])
    full = integrate(cdw_from_n3(N3_FIXTURE), FlowId.CDW, IntegratorConfig.from_preset("tight", t_end=5.0),
                     monitors=[])
    rescale = float(np.max(np.abs(full.final.to_vector() - cdw_from_n3(half.final).to_vector())))

    detail = f"p = 0, a = (1, 1), u = 0.5, atol = rtol = {cfg.atol:g}, t_end = {cfg.t_end:g}"
    return [_below("flow.eigenvalue_drift", eig, "eigenvalue_drift", detail),
            _below("flow.hamiltonian_drift", ham, "hamiltonian_drift", "H1..H3"),
            _below("flow.casimir_drift", cas, "casimir_drift", f"C1..C3, C2 while |u| > {C2_U_FLOOR:g}"),
            _measured("flow.c2_cutoff_time", cutoff, f"first sample with |u| <= {C2_U_FLOOR:g}"),
            _below("flow.cdw_rescaling", rescale, "hamiltonian_drift", "c/d/w at t vs three-site at t/2"),
            _measured("flow.steps", traj.stats["steps"], f"{traj.stats['rejections']} rejections")]


def suite_convergence(rng: np.random.Generator) -> List[CheckResult]:
    ref = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("reference", t_end=1.0), monitors=[]).final
    errors = []
    for dt in (1e-2, 5e-3):
        final = integrate(N3_FIXTURE, FlowId.N3, IntegratorConfig.from_preset("fast", dt=dt, t_end=1.0),
                          monitors=[]).final
        errors.append(float(np.max(np.abs(final.to_vector() - ref.to_vector()))))
    ratio = errors[0]/errors[1]
    detail = f"dt 1e-2 -> 5e-3, errors {errors[0]:.3e} and {errors[1]:.3e}"
    return [_above("convergence.rk4_ratio_low", ratio, "rk4_ratio_low", detail),
            _below("convergence.rk4_ratio_high", ratio, "rk4_ratio_high", detail)]


def suite_tau(rng: np.random.Generator) -> List[CheckResult]:
    gauss = SeriesFn([0.0, 0.0, 0.5] + [0.0]*9).exp()
    printed = toda_bilinear_residual((gauss, gauss, gauss), "printed").max_abs()

    identity = 0.0
    for _ in range(CHECK_SAMPLES["sinh_series"]):
        f = [SeriesFn(np.concatenate(([1.0 + rng.random()], 0.3*rng.normal(size=10)))) for _ in range(3)]
        gap = sinh_form_residual(f, 1) - toda_bilinear_residual(f, "standard")*2.0
        identity = max(identity, gap.max_abs())

    seed = tau_seed_from_n3(N3_FIXTURE, order=12)
    seed_res = max(r.max_abs() for r in gtl_tau_residual(seed))

    K_eps = 3
    exact = series_solve(seed, K_eps)
    corrections = max(float(np.max(np.abs(s.coeffs))) for order in exact.terms[1:] for s in order)

    tau2_1 = SeriesFn(0.1*rng.normal(size=13))
    family = series_solve(seed, K_eps, prescribed={1: (tau2_1, SeriesFn(np.zeros(13)), SeriesFn(np.zeros(13)))})
    slope = epsilon_slope(family)
    needed = K_eps + CHECK_TOLERANCES["epsilon_slope_margin"]

    return [_below("tau.printed_bilinear_gauss", printed, "bilinear", "tau = exp(t^2/2)"),
            _below("tau.sinh_identity", identity, "sinh_identity", "sinh form = 2 x standard form"),
            _below("tau.seed_residual", seed_res, "series_corrections", "three-site seed, order 12"),
            _below("tau.exact_seed_corrections", corrections, "series_corrections", f"K_eps = {K_eps}"),
            CheckResult("tau.epsilon_slope", "pass" if slope >= needed else "fail", slope, needed,
                        f"K_eps = {K_eps}, eps in 1e-1..1e-3")]


def suite_nls(rng: np.random.Generator) -> List[CheckResult]:
    axis = np.arange(-0.1, 0.1 + 1e-12, 0.01)
    res = nlse_residual(*plane_wave(0.0, -2.0, axis, axis)).max_abs()

    def stencil_error(h):
        axis = np.arange(0.0, 0.2 + 1e-12, h)
        return nlse_residual(*plane_wave(2.0, 2.0, axis, axis)).max_abs()

    ratio = stencil_error(0.02)/stencil_error(0.01)
    return [_below("nls.plane_wave", res, "nls_plane_wave", "k = 0, omega = -2, h = 0.01"),
            _above("nls.stencil_ratio", ratio, "nls_stencil_ratio", "k = 2, h = 0.02 vs 0.01")]


SUITES: Dict[str, Callable[[np.random.Generator], List[CheckResult]]] = {
    "lax": suite_lax,
    "reduction": suite_reduction,
    "poisson": suite_poisson,
    "rmatrix": suite_rmatrix,
    "flow": suite_flow,
    "convergence": suite_convergence,
    "tau": suite_tau,
    "nls": suite_nls,
}
assert list(SUITES) == CHECK_SUITES


def run_checks(names: Optional[Sequence[str]] = None, seed: int = 0, errata: bool = True) -> CheckReport:
    """
    Run the named suites (all of CHECK_SUITES when names is None) with one seeded generator.
    """
    names = list(CHECK_SUITES) if names is None else [n.strip() for n in names if n.strip()]
    if not names:
        raise ConfigError("the check list is empty")
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}. Choose from {CHECK_SUITES}")

    rng = np.random.default_rng(seed)
    report = CheckReport(seed=seed)
    for name in names:
        logger.info(f"running check suite '{name}'")
        report.results.extend(SUITES[name](rng))
    if errata:
        report.errata = build_ledger()
    return report
