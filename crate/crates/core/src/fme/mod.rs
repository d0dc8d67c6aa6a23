//! Symbolic Fourier-Motzkin elimination over rate-inequality systems whose
//! constants are linear combinations of joint-entropy atoms.
//!
//! Rational coefficients throughout; no floating point in this module.

mod expr;
mod system;
mod text;

pub use expr::{apply_independence, expand_entropy, expand_mi, shannon_nonneg, IndepFact,
    InfoExpr, VarSet};
pub use system::{IneqSystem, RateIneq};
pub use text::{parse_system, render_system};
