//! Sharp norm bounds, extremal weights and spectral verification for
//! Gaussian-window STFT and Cauchy-wavelet localization operators.

pub mod bounds;
pub mod constraints;
pub mod error;
pub mod extremals;
pub mod gabor;
pub mod io;
pub mod quad;
pub mod rearrange;
pub mod varprob;
pub mod wavelet;
pub mod weights;

pub use bounds::{bound, gabor_bound, lambda_root, wavelet_bound, BoundReport, Regime};
pub use constraints::{ConstraintSet, Kernel, Transform};
pub use error::{Error, Result};
pub use rearrange::{
    decreasing_rearrangement, distribution_function, schwarz_symmetrize, DistributionFunction,
    StepFunction, Weight,
};
pub use weights::{Grid, Measure, ProfileKind, RadialProfile, WeightField};
pub use varprob::{solve_closed_form, solve_kkt_oracle, Candidate, Maximizer, VariationalSolution};
pub use gabor::{OperatorSpectrum, Signal};
pub use wavelet::{DiscKind, DiscProfile, HardySignal, HyperbolicDisc};
