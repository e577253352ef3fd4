//! Numerical toolkit for the density theory of Gaussian-window Gabor
//! systems: the short-time Fourier transform, Beurling-type cube counts of
//! phase-space point sets, Riesz/frame bounds of finite Gabor sections, and
//! the verification harnesses tying them together.

pub mod error;
pub mod frames;
pub mod io;
pub mod pointset;
pub mod report;
pub mod signal;
pub mod stft;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
pub use frames::{BoundsReport, GaborAtomRef, GaborSection, GramMatrix, MinimalityReport};
pub use pointset::{Cube, DensityReport, Lattice2D, PointFamily, PointSet};
pub use report::{NamedValue, Verdict, VerificationReport};
pub use signal::{Preset, SampledSignal, TimeGrid, WeightExponent};
pub use stft::{PhaseGrid, PhasePoint, StftField};
