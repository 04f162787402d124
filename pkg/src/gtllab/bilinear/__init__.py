from .series import SeriesFn, EpsilonSeries
from .hirota import hirota_Dt, toda_bilinear_residual, sinh_form_residual
from .tau import (TauTriple, EpsilonFamily, dw_from_tau, c_from_tau, c_differences, cdw_system_residual,
                  gtl_tau_residual, residual_norm, n3_taylor, tau_seed_from_n3, series_solve, epsilon_slope)
from .nls import (GridFn2, hirota_grid, nls_bilinear_residual, nlse_residual, phi_from_tau, plane_wave,
                  schur_h)
