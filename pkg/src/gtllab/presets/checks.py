# tolerances of the asserted checks in the verification suite
CHECK_TOLERANCES = {
    "oracle_equivalence": 1e-12,
    "reduction": 1e-13,
    "eigenvalue_drift": 1e-6,
    "hamiltonian_drift": 1e-7,
    "casimir_drift": 1e-6,
    "ham_flow": 1e-12,
    "printed_kappa_gap": 0.1,
    "involution": 1e-9,
    "jacobi": 1e-8,
    "casimir": 1e-8,
    "discrete_lax": 1e-12,
    "bilinear": 1e-12,
    "sinh_identity": 1e-12,
    "series_corrections": 1e-10,
    "epsilon_slope_margin": 0.8,
    "nls_plane_wave": 1e-6,
    "nls_stencil_ratio": 8.0,
    "rk4_ratio_low": 14.0,
    "rk4_ratio_high": 18.0,
}

# sizes of the randomized property checks
CHECK_SAMPLES = {
    "oracle_states": 100,
    "reduction_states": 100,
    "kappa_states": 100,
    "involution_states": 20,
    "sinh_series": 20,
    "casimir_observables": 20,
}

# every suite the "check" command knows, in run order
CHECK_SUITES = ["lax", "reduction", "poisson", "rmatrix", "flow", "convergence", "tau", "nls"]
