//! Diagonal state space model (SSM) kernels.
//!
//! The crate builds the HiPPO-LegS matrices and their diagonal spectrum,
//! the family of diagonal initializations, bilinear and zero-order-hold
//! discretization, Vandermonde kernel evaluation, FFT and recurrent
//! convolution, and a set of dense/closed-form oracles used to check all
//! of the above against each other.
//!
//! Diagonal systems are stored in half-spectrum form: only eigenvalues with
//! nonnegative imaginary part are kept and the conjugate halves are implied,
//! so every kernel is `2 * Re(sum)` over the stored entries (see
//! [`Pairing`]).

pub mod bench;
pub mod conv;
pub mod discretize;
pub mod eigen;
pub mod error;
pub mod expm;
pub mod fft;
pub mod hippo;
pub mod init;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod memtrack;
pub mod oracle;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use init::{DiagonalSpec, InitKind, Pairing, RealPartMode, RealPartParam};
pub use discretize::{DenseDiscrete, DiscreteParams, Rule};
pub use hippo::{DenseSpec, LowRankFactor, Spectrum};
pub use kernel::{BasisTable, Kernel, KernelMeta};
pub use linalg::Matrix;
