//! Fractal-function kernel.
//!
//! The triangle wave `ψ(x) = |2x − 2⌊x + 1/2⌋|`, the Takagi-class sum
//!
//! ```text
//! G(x; P) = Σ_m ψ(2^m x) / (4^m ρ_{m+2})
//! ```
//!
//! the digit function `J(x; P) = Σ_k γ_k(x) / (2^{k+1} ρ_{k+2})` built on the
//! binary digits `γ_k` of `x`, and the Cantor pseudo-inverse over the bases
//! `(2r, 2)`.
//!
//! Every point the truss analysis needs is dyadic, so the primary entry
//! points take a [`DyadicPoint`] and decide exactly which terms vanish. The
//! `*_real` variants accept any real `x` and truncate the series; they exist
//! for plotting.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result, ValidationError};
use crate::num::{pow2, pow4, powi};

/// Series depth used when sampling non-dyadic points.
pub const DEFAULT_TRUNCATION_DEPTH: usize = 40;

/// Largest denominator exponent a [`DyadicPoint`] may carry. Numerators stay
/// below `2^52`, so conversion to `f64` is exact.
pub const MAX_LOG2_DENOMINATOR: u32 = 52;

/// Triangle wave: twice the distance from `x` to the nearest integer.
pub fn psi(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("psi needs a finite x >= 0, got {x}")));
    }
    Ok(psi_unchecked(x))
}

#[inline]
fn psi_unchecked(x: f64) -> f64 {
    libm::fabs(2.0 * x - 2.0 * libm::floor(x + 0.5))
}

/// A dyadic rational `numerator / 2^log2_denominator` in `[0, 1]`, kept in
/// lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPoint {
    numerator: u64,
    log2_denominator: u32,
}

impl DyadicPoint {
    pub const ZERO: Self = Self {
        numerator: 0,
        log2_denominator: 0,
    };
    pub const ONE: Self = Self {
        numerator: 1,
        log2_denominator: 0,
    };

    pub fn new(numerator: u64, log2_denominator: u32) -> Result<Self> {
        if log2_denominator > MAX_LOG2_DENOMINATOR {
            return Err(Error::OutOfRange {
                what: "dyadic denominator",
                detail: format!("2^{log2_denominator} exceeds 2^{MAX_LOG2_DENOMINATOR}"),
            });
        }
        if numerator > (1u64 << log2_denominator) {
            return Err(Error::Domain(format!(
                "{numerator}/2^{log2_denominator} is greater than 1"
            )));
        }
        let (mut num, mut p) = (numerator, log2_denominator);
        if num == 0 {
            p = 0;
        }
        while p > 0 && num % 2 == 0 {
            num /= 2;
            p -= 1;
        }
        Ok(Self {
            numerator: num,
            log2_denominator: p,
        })
    }

    /// Exact conversion of a double in `[0, 1]` with at most
    /// [`MAX_LOG2_DENOMINATOR`] fractional bits.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !(0.0..=1.0).contains(&x) {
            return None;
        }
        let scaled = libm::ldexp(x, MAX_LOG2_DENOMINATOR as i32);
        if scaled != libm::floor(scaled) {
            return None;
        }
        Self::new(scaled as u64, MAX_LOG2_DENOMINATOR).ok()
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn log2_denominator(self) -> u32 {
        self.log2_denominator
    }

    pub fn value(self) -> f64 {
        libm::ldexp(self.numerator as f64, -(self.log2_denominator as i32))
    }

    /// Numerator over the common denominator `2^log2`.
    fn scaled_to(self, log2: u32) -> u64 {
        self.numerator << (log2 - self.log2_denominator)
    }

    fn combine(self, other: Self, subtract: bool) -> Option<Self> {
        let p = self.log2_denominator.max(other.log2_denominator);
        let a = self.scaled_to(p);
        let b = other.scaled_to(p);
        let num = if subtract { a.checked_sub(b)? } else { a.checked_add(b)? };
        Self::new(num, p).ok()
    }

    /// `self + other`, or `None` outside `[0, 1]`.
    pub fn checked_add(self, other: Self) -> Option<Self> {
        self.combine(other, false)
    }

    /// `self − other`, or `None` outside `[0, 1]`.
    pub fn checked_sub(self, other: Self) -> Option<Self> {
        self.combine(other, true)
    }

    /// `ψ(2^m · self)`, evaluated in integer arithmetic. Zero once `2^m x` is
    /// an integer.
    pub fn psi_scaled(self, m: u32) -> f64 {
        if m >= self.log2_denominator {
            return 0.0;
        }
        let q = self.log2_denominator - m;
        let modulus = 1u64 << q;
        let r = self.numerator & (modulus - 1);
        let d = r.min(modulus - r);
        libm::ldexp(d as f64, -(q as i32 - 1))
    }

    /// Binary digit `γ_k` of the terminating expansion (weight `2^-(k+1)`).
    /// For `x = 1` the only expansion is `0.111…`.
    pub fn digit(self, k: u32) -> u8 {
        if self == Self::ONE {
            return 1;
        }
        if k >= self.log2_denominator {
            return 0;
        }
        ((self.numerator >> (self.log2_denominator - 1 - k)) & 1) as u8
    }
}

/// Which member family a ratio sequence describes. Horizontal sequences
/// start at `ρ^H_2`, inclined ones at `ρ^I_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioKind {
    Horizontal,
    Inclined,
}

impl RatioKind {
    pub fn first_index(self) -> usize {
        match self {
            RatioKind::Horizontal => 2,
            RatioKind::Inclined => 1,
        }
    }

    fn symbol(self) -> char {
        match self {
            RatioKind::Horizontal => 'H',
            RatioKind::Inclined => 'I',
        }
    }

    fn field(self) -> &'static str {
        match self {
            RatioKind::Horizontal => "ratios_horizontal",
            RatioKind::Inclined => "ratios_inclined",
        }
    }
}

/// Fictitious ratios appended after the physical ones.
#[derive(Debug, Clone, PartialEq)]
pub enum Extension {
    None,
    ExplicitList(Vec<f64>),
    /// Tail element `j` (0-based, right after the finite part) equals
    /// `ratio^(first_exponent + j)`.
    GeometricTail {
        ratio: f64,
        first_exponent: u32,
    },
}

impl Extension {
    pub fn geometric(ratio: f64) -> Self {
        Extension::GeometricTail {
            ratio,
            first_exponent: 1,
        }
    }
}

/// An ordered ratio set `P_N` with an optional infinite extension `P_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioSequence {
    kind: RatioKind,
    finite: Vec<f64>,
    extension: Extension,
}

impl RatioSequence {
    pub fn new(kind: RatioKind, finite: Vec<f64>, extension: Extension) -> Result<Self> {
        let mut errors = ValidationError::default();
        let field = kind.field();
        if finite.is_empty() {
            errors.push(field, "at least one ratio is required");
        }
        for (k, &rho) in finite.iter().enumerate() {
            if !(rho.is_finite() && rho > 0.0) {
                errors.push(
                    format!("{field}[{k}]"),
                    format!("ratio must be finite and > 0, got {rho}"),
                );
            }
        }
        if let Some(&first) = finite.first() {
            if first != 1.0 {
                errors.push(
                    format!("{field}[0]"),
                    format!(
                        "leading ratio rho^{}_{} must equal 1, got {first}",
                        kind.symbol(),
                        kind.first_index()
                    ),
                );
            }
        }
        match &extension {
            Extension::None => {}
            Extension::ExplicitList(values) => {
                for (j, &rho) in values.iter().enumerate() {
                    if !(rho.is_finite() && rho > 0.0) {
                        errors.push(
                            format!("extension.values[{j}]"),
                            format!("ratio must be finite and > 0, got {rho}"),
                        );
                    }
                }
            }
            Extension::GeometricTail { ratio, .. } => {
                if !(ratio.is_finite() && 4.0 * ratio > 1.0) {
                    errors.push(
                        "extension.ratio",
                        format!("geometric tail needs 4r > 1 for a summable series, got r = {ratio}"),
                    );
                }
            }
        }
        errors.into_result()?;
        Ok(Self {
            kind,
            finite,
            extension,
        })
    }

    pub fn horizontal(finite: Vec<f64>) -> Result<Self> {
        Self::new(RatioKind::Horizontal, finite, Extension::None)
    }

    pub fn inclined(finite: Vec<f64>) -> Result<Self> {
        Self::new(RatioKind::Inclined, finite, Extension::None)
    }

    /// The pure geometric sequence `{r^k}_{k≥0}`.
    pub fn geometric(kind: RatioKind, ratio: f64) -> Result<Self> {
        Self::new(kind, vec![1.0], Extension::geometric(ratio))
    }

    /// Same finite part, new extension.
    pub fn with_extension(&self, extension: Extension) -> Result<Self> {
        Self::new(self.kind, self.finite.clone(), extension)
    }

    pub fn kind(&self) -> RatioKind {
        self.kind
    }

    pub fn finite(&self) -> &[f64] {
        &self.finite
    }

    pub fn extension(&self) -> &Extension {
        &self.extension
    }

    /// Number of elements defined, `None` when the sequence is infinite.
    pub fn defined_len(&self) -> Option<usize> {
        match &self.extension {
            Extension::None => Some(self.finite.len()),
            Extension::ExplicitList(values) => Some(self.finite.len() + values.len()),
            Extension::GeometricTail { .. } => None,
        }
    }

    /// Element by 0-based position: `ρ^H_{k+2}` or `ρ^I_{k+1}`.
    pub fn element(&self, k: usize) -> Result<f64> {
        if let Some(&rho) = self.finite.get(k) {
            return Ok(rho);
        }
        let j = k - self.finite.len();
        let missing = Error::MissingRatio {
            kind: self.kind.symbol(),
            index: k + self.kind.first_index(),
        };
        match &self.extension {
            Extension::None => Err(missing),
            Extension::ExplicitList(values) => values.get(j).copied().ok_or(missing),
            Extension::GeometricTail { ratio, first_exponent } => Ok(powi(*ratio, first_exponent + j as u32)),
        }
    }

    /// Ratio by its subscript, e.g. `ratio(3)` is `ρ^H_3` for a horizontal
    /// sequence.
    pub fn ratio(&self, index: usize) -> Result<f64> {
        let first = self.kind.first_index();
        if index < first {
            return Err(Error::OutOfRange {
                what: "ratio index",
                detail: format!("sequence starts at {first}, got {index}"),
            });
        }
        self.element(index - first)
    }

    /// `Σ_{m ≥ depth} 1/(4^m ρ_{m+2})`: the largest error of a Takagi sum
    /// truncated to `depth` terms.
    pub fn truncation_bound(&self, depth: usize) -> f64 {
        let len = self.finite.len();
        let mut bound = 0.0;
        for m in depth..len {
            bound += 1.0 / (pow4(m) * self.finite[m]);
        }
        match &self.extension {
            Extension::None => {}
            Extension::ExplicitList(values) => {
                for (j, rho) in values.iter().enumerate() {
                    let m = len + j;
                    if m >= depth {
                        bound += 1.0 / (pow4(m) * rho);
                    }
                }
            }
            Extension::GeometricTail { ratio, first_exponent } => {
                let j0 = depth.saturating_sub(len);
                let m0 = len + j0;
                let head = 1.0 / (pow4(m0) * powi(*ratio, first_exponent + j0 as u32));
                bound += head / (1.0 - 1.0 / (4.0 * ratio));
            }
        }
        bound
    }

    fn require(&self, kind: RatioKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "expected a {kind:?} ratio sequence, got {:?}",
                self.kind
            )))
        }
    }
}

/// How many Takagi terms to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terms {
    /// Terms `m = 0..len(P_N)`.
    AllFinite,
    /// Terms `m = 0..M`.
    UpTo(usize),
}

impl Terms {
    fn count(self, ratios: &RatioSequence) -> Result<usize> {
        match self {
            Terms::AllFinite => Ok(ratios.finite.len()),
            Terms::UpTo(depth) => match ratios.defined_len() {
                Some(len) if depth > len => Err(Error::MissingRatio {
                    kind: ratios.kind.symbol(),
                    index: len + ratios.kind.first_index(),
                }),
                _ => Ok(depth),
            },
        }
    }
}

/// `G(x; P)` at a dyadic point. Terms with `2^m x` integral are skipped
/// without touching their ratio, so grid values never depend on the
/// extension.
pub fn takagi_class_dyadic(x: DyadicPoint, ratios: &RatioSequence, terms: Terms) -> Result<f64> {
    ratios.require(RatioKind::Horizontal)?;
    let count = terms.count(ratios)?.min(x.log2_denominator as usize);
    let mut sum = 0.0;
    for m in 0..count {
        let wave = x.psi_scaled(m as u32);
        if wave != 0.0 {
            sum += wave / (pow4(m) * ratios.element(m)?);
        }
    }
    Ok(sum)
}

/// `G(x; P)` at any `x` in `[0, 1]`, truncated per `terms`.
pub fn takagi_class(x: f64, ratios: &RatioSequence, terms: Terms) -> Result<f64> {
    ratios.require(RatioKind::Horizontal)?;
    check_unit(x)?;
    let count = terms.count(ratios)?;
    let mut sum = 0.0;
    for m in 0..count {
        let wave = psi_unchecked(libm::ldexp(x, m as i32));
        if wave != 0.0 {
            sum += wave / (pow4(m) * ratios.element(m)?);
        }
    }
    Ok(sum)
}

/// Binary digits `γ_0..γ_{count-1}` with `x = Σ γ_k / 2^{k+1}`.
pub fn dyadic_coefficients(x: DyadicPoint, count: usize) -> Result<Vec<u8>> {
    if count == 0 {
        return Err(Error::Domain("digit count must be positive".into()));
    }
    Ok((0..count).map(|k| x.digit(k as u32)).collect())
}

/// `J(x; P) = Σ_k γ_k(x) / (2^{k+1} ρ_{k+2})` at a dyadic point.
///
/// For `x < 1` the sum is finite. At `x = 1` every digit is one; the series
/// is summed in closed form for a geometric tail (needs `2r > 1`) and is
/// undefined otherwise.
pub fn j_function(x: DyadicPoint, ratios: &RatioSequence) -> Result<f64> {
    ratios.require(RatioKind::Horizontal)?;
    if x == DyadicPoint::ONE {
        return j_at_one(ratios);
    }
    let mut sum = 0.0;
    for k in 0..x.log2_denominator {
        if x.digit(k) == 1 {
            sum += pow2(-(k as i32 + 1)) / ratios.element(k as usize)?;
        }
    }
    Ok(sum)
}

fn j_at_one(ratios: &RatioSequence) -> Result<f64> {
    let len = ratios.finite.len();
    let mut sum = 0.0;
    for (k, rho) in ratios.finite.iter().enumerate() {
        sum += pow2(-(k as i32 + 1)) / rho;
    }
    match &ratios.extension {
        Extension::GeometricTail { ratio, first_exponent } => {
            if 2.0 * ratio <= 1.0 {
                return Err(Error::Domain(format!(
                    "J(1) diverges for a geometric tail with r = {ratio} (needs 2r > 1)"
                )));
            }
            let head = pow2(-(len as i32 + 1)) / powi(*ratio, *first_exponent);
            Ok(sum + head / (1.0 - 1.0 / (2.0 * ratio)))
        }
        _ => Err(Error::MissingRatio {
            kind: ratios.kind.symbol(),
            index: ratios.defined_len().unwrap_or(len) + ratios.kind.first_index(),
        }),
    }
}

/// `J` at any `x` in `[0, 1]` using the first `depth` binary digits.
pub fn j_function_real(x: f64, ratios: &RatioSequence, depth: usize) -> Result<f64> {
    ratios.require(RatioKind::Horizontal)?;
    check_unit(x)?;
    let mut rest = x;
    let mut sum = 0.0;
    for k in 0..depth {
        let digit = if x == 1.0 {
            true
        } else {
            rest *= 2.0;
            if rest >= 1.0 {
                rest -= 1.0;
                true
            } else {
                false
            }
        };
        if digit {
            sum += pow2(-(k as i32 + 1)) / ratios.element(k)?;
        }
    }
    Ok(sum)
}

fn cantor_scale(r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.25) {
        return Err(Error::Domain(format!("Cantor pseudo-inverse needs r > 1/4, got {r}")));
    }
    if 2.0 * r - 1.0 == 0.0 {
        return Err(Error::Domain("Cantor pseudo-inverse is degenerate at r = 1/2".into()));
    }
    Ok((2.0 * r - 1.0) / r)
}

/// Cantor pseudo-inverse over the bases `(2r, 2)`: maps the binary digits of
/// `x` onto base-`2r` digits, `Σ γ_k (2r − 1)/(2r)^{k+1}`, which equals
/// `((2r − 1)/r) · J(x; {r^k})`. For `r = 1` this is the identity; for
/// `r = 3/2` it is the classic ternary staircase inverse.
pub fn cantor_pseudo_inverse(x: DyadicPoint, r: f64) -> Result<f64> {
    let scale = cantor_scale(r)?;
    let ratios = RatioSequence::geometric(RatioKind::Horizontal, r)?;
    Ok(scale * j_function(x, &ratios)?)
}

/// [`cantor_pseudo_inverse`] at any real `x`, truncated to `depth` digits.
pub fn cantor_pseudo_inverse_real(x: f64, r: f64, depth: usize) -> Result<f64> {
    let scale = cantor_scale(r)?;
    let ratios = RatioSequence::geometric(RatioKind::Horizontal, r)?;
    Ok(scale * j_function_real(x, &ratios, depth)?)
}

fn check_unit(x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must lie in [0, 1], got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dy(num: u64, p: u32) -> DyadicPoint {
        DyadicPoint::new(num, p).unwrap()
    }

    fn ones() -> RatioSequence {
        RatioSequence::geometric(RatioKind::Horizontal, 1.0).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_eq!(psi(0.5).unwrap(), 1.0);
        assert_eq!(psi(0.25).unwrap(), 0.5);
        assert_eq!(psi(3.0).unwrap(), 0.0);
        assert_eq!(psi(7.5).unwrap(), 1.0);
        assert!(psi(f64::NAN).is_err());
        assert!(psi(f64::INFINITY).is_err());
        assert!(psi(-0.5).is_err());
    }

    #[test]
    fn dyadic_point_reduces() {
        let p = dy(12, 5);
        assert_eq!((p.numerator(), p.log2_denominator()), (3, 3));
        assert_eq!(dy(0, 9), DyadicPoint::ZERO);
        assert_eq!(dy(16, 4), DyadicPoint::ONE);
        assert!(DyadicPoint::new(5, 2).is_err());
        assert!(DyadicPoint::new(1, 60).is_err());
        assert_eq!(DyadicPoint::from_f64(0.625), Some(dy(5, 3)));
        assert_eq!(DyadicPoint::from_f64(0.1), None);
    }

    #[test]
    fn dyadic_arithmetic() {
        let a = dy(3, 3);
        let b = dy(1, 4);
        assert_eq!(a.checked_add(b), Some(dy(7, 4)));
        assert_eq!(a.checked_sub(b), Some(dy(5, 4)));
        assert_eq!(b.checked_sub(a), None);
        assert_eq!(DyadicPoint::ONE.checked_add(b), None);
    }

    #[test]
    fn exact_psi_matches_float_psi() {
        for p in 0..10u32 {
            for num in 0..=(1u64 << p) {
                let x = dy(num, p);
                for m in 0..12 {
                    let float = psi(libm::ldexp(x.value(), m as i32)).unwrap();
                    assert_eq!(x.psi_scaled(m), float, "x={num}/2^{p}, m={m}");
                }
            }
        }
    }

    #[test]
    fn takagi_examples() {
        let half_powers = RatioSequence::geometric(RatioKind::Horizontal, 0.5).unwrap();
        let g = takagi_class_dyadic(dy(1, 1), &half_powers, Terms::UpTo(40)).unwrap();
        assert_eq!(g, 1.0);
        let g = takagi_class_dyadic(dy(1, 2), &ones(), Terms::UpTo(40)).unwrap();
        assert_eq!(g, 0.75);
        for x in [DyadicPoint::ZERO, DyadicPoint::ONE] {
            assert_eq!(takagi_class_dyadic(x, &half_powers, Terms::UpTo(40)).unwrap(), 0.0);
            assert_eq!(takagi_class(x.value(), &half_powers, Terms::UpTo(40)).unwrap(), 0.0);
        }
    }

    #[test]
    fn takagi_term_limits() {
        let finite = RatioSequence::horizontal(vec![1.0, 0.75, 0.5, 0.5]).unwrap();
        // grid of N = 5: terms m >= 4 vanish, so UpTo beyond the finite
        // part is only an error when it is requested
        assert!(takagi_class_dyadic(dy(3, 4), &finite, Terms::UpTo(10)).is_err());
        let err = takagi_class(0.3, &finite, Terms::UpTo(5)).unwrap_err();
        assert_eq!(err, Error::MissingRatio { kind: 'H', index: 6 });
        // off-grid point with AllFinite truncates at the physical levels
        let g = takagi_class_dyadic(dy(1, 5), &finite, Terms::AllFinite).unwrap();
        let expected: f64 = (0..4)
            .map(|m| dy(1, 5).psi_scaled(m) / (pow4(m as usize) * finite.element(m as usize).unwrap()))
            .sum();
        assert_eq!(g, expected);
        let incl = RatioSequence::inclined(vec![1.0]).unwrap();
        assert!(takagi_class(0.5, &incl, Terms::AllFinite).is_err());
        assert!(takagi_class(1.5, &finite, Terms::AllFinite).is_err());
    }

    #[test]
    fn ratio_sequence_validation() {
        let err = RatioSequence::horizontal(vec![0.5, -1.0]).unwrap_err();
        match err {
            Error::Validation(v) => {
                assert_eq!(v.issues.len(), 2);
                assert_eq!(v.issues[0].field, "ratios_horizontal[1]");
                assert_eq!(v.issues[1].field, "ratios_horizontal[0]");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(RatioSequence::geometric(RatioKind::Horizontal, 0.25).is_err());
        assert!(RatioSequence::geometric(RatioKind::Horizontal, 0.2501).is_ok());
        assert!(RatioSequence::new(RatioKind::Horizontal, vec![1.0], Extension::ExplicitList(vec![0.0])).is_err());
    }

    #[test]
    fn ratio_indexing() {
        let p = RatioSequence::new(
            RatioKind::Horizontal,
            vec![1.0, 0.75, 0.5, 0.5],
            Extension::GeometricTail {
                ratio: 0.3,
                first_exponent: 3,
            },
        )
        .unwrap();
        assert_eq!(p.ratio(2).unwrap(), 1.0);
        assert_eq!(p.ratio(5).unwrap(), 0.5);
        assert_eq!(p.ratio(6).unwrap(), 0.3 * 0.3 * 0.3);
        assert_eq!(p.ratio(7).unwrap(), powi(0.3, 4));
        assert!(p.ratio(1).is_err());
        let incl = RatioSequence::inclined(vec![1.0, 0.5]).unwrap();
        assert_eq!(incl.ratio(2).unwrap(), 0.5);
        assert_eq!(incl.ratio(3), Err(Error::MissingRatio { kind: 'I', index: 3 }));
    }

    #[test]
    fn truncation_bound_geometric_closed_form() {
        let p = RatioSequence::new(
            RatioKind::Horizontal,
            vec![1.0, 0.75],
            Extension::GeometricTail {
                ratio: 0.75,
                first_exponent: 1,
            },
        )
        .unwrap();
        for depth in [0usize, 1, 2, 5, 40] {
            let brute: f64 = (depth..depth + 400)
                .map(|m| 1.0 / (pow4(m) * p.element(m).unwrap()))
                .sum();
            let bound = p.truncation_bound(depth);
            assert!((bound - brute).abs() <= 1e-15 * brute.max(1e-300), "depth {depth}");
        }
        let finite = RatioSequence::horizontal(vec![1.0, 0.5]).unwrap();
        assert_eq!(finite.truncation_bound(2), 0.0);
        assert_eq!(finite.truncation_bound(1), 1.0 / (4.0 * 0.5));
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(dyadic_coefficients(dy(5, 3), 5).unwrap(), vec![1, 0, 1, 0, 0]);
        assert_eq!(dyadic_coefficients(dy(1, 1), 3).unwrap(), vec![1, 0, 0]);
        assert_eq!(dyadic_coefficients(DyadicPoint::ZERO, 4).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(dyadic_coefficients(DyadicPoint::ONE, 3).unwrap(), vec![1, 1, 1]);
        assert!(dyadic_coefficients(dy(1, 1), 0).is_err());
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_function(dy(5, 3), &ones()).unwrap(), 0.625);
        let three_halves = RatioSequence::geometric(RatioKind::Horizontal, 1.5).unwrap();
        let j = j_function(dy(3, 2), &three_halves).unwrap();
        assert!((j - 2.0 / 3.0).abs() < 1e-15);
        let finite = RatioSequence::horizontal(vec![1.0, 7.0]).unwrap();
        assert_eq!(j_function(dy(1, 1), &finite).unwrap(), 0.5);
        // 5/8 = 0.101b needs rho_4
        assert_eq!(
            j_function(dy(5, 3), &finite),
            Err(Error::MissingRatio { kind: 'H', index: 4 })
        );
        // J(1) = Σ 1/(2^{k+1} (3/2)^k) = 3/4
        assert!((j_function(DyadicPoint::ONE, &three_halves).unwrap() - 0.75).abs() < 1e-15);
        assert!(j_function(DyadicPoint::ONE, &finite).is_err());
        let slow = RatioSequence::geometric(RatioKind::Horizontal, 0.4).unwrap();
        assert!(j_function(DyadicPoint::ONE, &slow).is_err());
    }

    #[test]
    fn j_real_agrees_on_dyadics() {
        let p = RatioSequence::geometric(RatioKind::Horizontal, 1.5).unwrap();
        for num in 0..=64u64 {
            let x = dy(num, 6);
            let exact = j_function(x, &p).unwrap();
            let real = j_function_real(x.value(), &p, DEFAULT_TRUNCATION_DEPTH).unwrap();
            let tol = if x == DyadicPoint::ONE { 1e-15 } else { 0.0 };
            assert!((exact - real).abs() <= tol, "x = {num}/64");
        }
    }

    #[test]
    fn cantor_examples() {
        assert_eq!(cantor_pseudo_inverse(dy(5, 4), 1.0).unwrap(), 0.3125);
        // 3/4 = 0.11b -> 0.22 in base 3 = 8/9
        let c = cantor_pseudo_inverse(dy(3, 2), 1.5).unwrap();
        assert!((c - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(cantor_pseudo_inverse(DyadicPoint::ZERO, 2.0).unwrap(), 0.0);
        assert!((cantor_pseudo_inverse(DyadicPoint::ONE, 1.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(cantor_pseudo_inverse(dy(1, 1), 0.25).is_err());
        assert!(cantor_pseudo_inverse(dy(1, 1), 0.5).is_err());
        assert!(cantor_pseudo_inverse_real(0.3, 0.1, 40).is_err());
    }
}
