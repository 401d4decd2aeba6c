//! Univariate least squares, single-instrument 2SLS with endogeneity tests,
//! and the factor-by-measure regression grids.

mod dist;
mod grid;
mod iv;
mod ols;

pub use dist::{chi2_sf, f_sf, t_two_sided};
pub use grid::{
    factor_keys, instrument_screen, iv_grid_csv, ols_grid_csv, panel_tokens, run_factor_matrix, run_iv_suite,
    CellStatus, GridCell, GridOptions, InstrumentScreen, RegressionGrid, ScreenRow,
};
pub use iv::{endogeneity_tests, two_sls, two_sls_with, Endogeneity, IvFit};
pub use ols::{ols, ols_with, OlsFit, StarLevels, Stars};
