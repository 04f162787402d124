# default settings for quick runs: adaptive Dormand-Prince at moderate tolerance
DEFAULT_INTEGRATOR = {
    "method": "rk45_adaptive",
    "atol": 1e-10,
    "rtol": 1e-10,
    "dt": 1e-2,
    "t_end": 10.0,
    "max_steps": 200_000,
}

# tight adaptive run used as the reference solution in convergence studies
REFERENCE_INTEGRATOR = {
    "method": "rk45_adaptive",
    "atol": 1e-13,
    "rtol": 1e-13,
    "dt": 1e-3,
    "t_end": 1.0,
    "max_steps": 2_000_000,
}

TIGHT_INTEGRATOR = {
    "method": "rk45_adaptive",
    "atol": 1e-12,
    "rtol": 1e-12,
    "dt": 1e-3,
    "t_end": 10.0,
    "max_steps": 1_000_000,
}

# fixed-step classic Runge-Kutta
FAST_INTEGRATOR = {
    "method": "rk4_fixed",
    "atol": 1e-8,
    "rtol": 1e-8,
    "dt": 1e-2,
    "t_end": 10.0,
    "max_steps": 1_000_000,
}

# Group them for easy lookup
INTEGRATOR_PRESETS = {
    "default": DEFAULT_INTEGRATOR,
    "reference": REFERENCE_INTEGRATOR,
    "tight": TIGHT_INTEGRATOR,
    "fast": FAST_INTEGRATOR,
}
