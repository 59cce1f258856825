//! Universal Quasi-Sierpinski truss.
//!
//! A bifurcating plane truss carrying a point load at its apex can spread
//! that load uniformly over its supports if the supports settle along a
//! Takagi-class curve. This crate generates the truss geometry, evaluates
//! the closed-form forces, settlements, support stiffnesses and nodal
//! displacements, and ships an independent direct-stiffness solver used to
//! check them.
//!
//! Modules:
//!
//! * [`fractal`]: triangle wave, Takagi-class sums, dyadic expansions, `J`
//!   and the Cantor pseudo-inverse.
//! * [`structure`]: configuration, identifiers and topology.
//! * [`closed_form`]: member forces, reactions, `δ`, `k`, `ε`, `μ` and the
//!   fractal profile functions.
//! * [`fem`]: the direct-stiffness oracle and result comparison.
//!
//! Units are kN, mm, kN/mm² and kN/mm throughout. Displacements are stored
//! per unit height of the structure.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod closed_form;
pub mod error;
pub mod fem;
pub mod fractal;
pub mod linalg;
pub mod structure;

pub use error::{ConfigIssue, Error, Result, ValidationError};

pub(crate) mod num {
    /// `2^k` for possibly negative `k`, exact.
    #[inline]
    pub fn pow2(k: i32) -> f64 {
        libm::ldexp(1.0, k)
    }

    /// `4^k`, exact.
    #[inline]
    pub fn pow4(k: usize) -> f64 {
        libm::ldexp(1.0, 2 * k as i32)
    }

    /// `base^exp` by repeated squaring.
    pub fn powi(base: f64, exp: u32) -> f64 {
        let mut acc = 1.0;
        let mut b = base;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc *= b;
            }
            b *= b;
            e >>= 1;
        }
        acc
    }
}
