//! Exact verification engine for tame norm relation bookkeeping.

pub mod cert;
pub mod classfield;
pub mod error;
pub mod exactnum;
pub mod ffield;
pub mod hecke;
pub mod lattice;
pub mod lfactor;
pub mod mackey;
pub mod norm_relation;
pub mod qcomb;
pub mod zl;

pub use cert::{Certificate, Check, Status};
pub use error::{Result, TrcError};
pub use exactnum::{ExactScalar, Poly, Rational};
pub use qcomb::{CoefficientTable, QCombContext};
