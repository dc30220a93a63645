//! Exact workbench for the braided category of weight modules over the
//! unrolled restricted quantum group of sl2 at q = e^{πi/p}, its Heisenberg
//! dressing, the simple-current extension, and the attached q-series.

pub mod scalars;
pub mod linalg;
pub mod qmodules;
pub mod ribbon;
pub mod deligne;
pub mod fusion;
pub mod gring;
pub mod modular;
pub mod qseries;
pub mod report;
pub mod cli;

pub use scalars::{CycScalar, FloatScalar, RootExp, Scalar, Q};
pub use num_complex::Complex64;
