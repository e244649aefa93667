//! Finite-level computations with Iwasawa algebras of `Z_p^d`.
//!
//! Everything is realized in `R_{m,N} = (Z/p^N)[Gamma/Gamma^{(m)}]` and
//! in cyclotomic rings `(Z/p^N)[zeta_{p^m}]`.

pub mod characters;
pub mod cli;
pub mod error;
pub mod expr;
pub mod group_ring;
pub mod ideals;
pub mod linalg;
pub mod padic;
pub mod parse;
pub mod poly;
pub mod report;
pub mod sampling;
pub mod session;
pub mod towers;

pub use characters::{delta_set, enumerate_characters, eval_char, verify_cover, Character, DeltaSet, ZpFlat};
pub use error::{Error, Result};
pub use expr::Expr;
pub use group_ring::{GammaVector, GroupRing, GroupRingElement, TightSet};
pub use ideals::{IdealMembership, IdealSpec};
pub use linalg::{FiniteModulePresentation, Matrix, ModuleInvariants};
pub use padic::{CyclotomicInt, Residue, Valuation, Zpn};
pub use poly::Poly;
pub use session::SessionConfig;
pub use towers::{IdealFamily, InertiaDatum, LambdaPresentation, TowerReport};
