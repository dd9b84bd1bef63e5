//! Simulation and estimation toolkit for learning multimode random bosonic
//! displacement processes from continuous-variable Bell measurements.
//!
//! The crate covers the full desk-scale experiment chain:
//!
//! * [`process`] — displacement process families (three-peak, Gaussian,
//!   fixed), their characteristic functions, densities, and exact samplers;
//! * [`measurement`] — Bell-measurement record simulation under squeezing,
//!   loss, affine drift, and pilot-mode injection;
//! * [`estimator`] — the unbiased characteristic-function estimator, the
//!   pilot-based drift estimator, and slice evaluation in dual space;
//! * [`reconstruction`] — (ε,δ)-close reconstruction checking and Monte Carlo
//!   determination of reconstruction sample complexity;
//! * [`hypothesis`] — the dealer/challenger process-discrimination game and
//!   its sample-complexity search;
//! * [`bounds`] — closed-form complexity algebra (Hoeffding upper bound,
//!   entanglement-free lower bounds, classical success ceiling, acquisition
//!   time), computed in log space;
//! * [`trace`] — time-domain layer: temporal mode functions, quadrature
//!   extraction from homodyne traces, delay and crosstalk calibration;
//! * [`io`] — record/trace file formats and run manifests.
//!
//! All randomness flows from a master seed through the documented split
//! function in [`seeding`]; results are reproducible regardless of thread
//! count.

pub mod bounds;
pub mod complex_vec;
pub mod error;
pub mod estimator;
pub mod hypothesis;
pub mod io;
pub mod measurement;
pub mod process;
pub mod reconstruction;
pub mod seeding;
pub mod trace;

pub use complex_vec::ComplexVec;
pub use error::{Error, Result};
pub use measurement::{BellRecord, DriftModel, PilotTag, RecordBatch, SqueezingSpec};
pub use process::{FixedSpec, GaussianSpec, ProcessSpec, ThreePeakSpec};
pub use reconstruction::{ComplexityEstimate, ReconSpec};
