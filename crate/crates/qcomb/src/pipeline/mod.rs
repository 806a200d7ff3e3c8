//! Measurement pipeline: synthesizing homodyne scans from a model state,
//! extracting extremum statistics back out, assembling band covariances,
//! resampling uncertainties, and extracting uncorrelated modes.

pub mod bundle;
pub mod modes;
pub mod monte_carlo;
pub mod synth;
pub mod trace;

pub use bundle::{BundleStats, TraceBundle};
pub use modes::{extract_modes, ExtractOptions, ExtractedMode, ModeSet};
pub use monte_carlo::{resample, McEnsemble, McOptions, ModeCandidate};
pub use synth::{synthesize, Jitter, SynthOptions};
pub use trace::{extract_extrema, ExtremaOptions, Trace, TraceStats};
