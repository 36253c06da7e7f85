//! Bicomplex ring arithmetic.
//!
//! A bicomplex number `Z = z1 + j z2` (with `z1, z2` in `C(i)`) is stored by
//! its idempotent coefficients `Z = b1 e + b2 e†`, where `e = (1 + k)/2` and
//! `e† = (1 - k)/2`. In this representation the ring operations act
//! coefficientwise, which is what every kernel and projection formula in the
//! crate relies on.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex numbers over `C(i)`.
pub type Complex = Complex64;

/// Relative cutoff below which an idempotent coefficient is treated as zero.
pub const ZERO_DIVISOR_TOL: f64 = 1e-12;

const I: Complex = Complex::new(0.0, 1.0);

/// The three conjugations of the bicomplex algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conjugation {
    /// `Z* = conj(b1) e + conj(b2) e†`
    Star,
    /// `Z† = b2 e + b1 e†`
    Dagger,
    /// `conj(Z) = conj(b2) e + conj(b1) e†`
    Bar,
}

impl Conjugation {
    pub const ALL: [Conjugation; 3] = [Conjugation::Star, Conjugation::Dagger, Conjugation::Bar];

    /// The conjugation obtained by composing `self` with `other`.
    pub fn compose(self, other: Conjugation) -> Option<Conjugation> {
        use Conjugation::*;
        match (self, other) {
            (Star, Dagger) | (Dagger, Star) => Some(Bar),
            (Star, Bar) | (Bar, Star) => Some(Dagger),
            (Dagger, Bar) | (Bar, Dagger) => Some(Star),
            _ => None,
        }
    }
}

/// A bicomplex number in idempotent form `b1 e + b2 e†`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BiComplex {
    pub b1: Complex,
    pub b2: Complex,
}

impl BiComplex {
    pub const ZERO: BiComplex = BiComplex::new(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    pub const ONE: BiComplex = BiComplex::new(Complex::new(1.0, 0.0), Complex::new(1.0, 0.0));

    pub const fn new(b1: Complex, b2: Complex) -> Self {
        BiComplex { b1, b2 }
    }

    /// Real multiple of the identity.
    pub fn real(x: f64) -> Self {
        BiComplex::new(Complex::new(x, 0.0), Complex::new(x, 0.0))
    }

    /// An element of `C(i)` embedded in the algebra.
    pub fn from_complex(z: Complex) -> Self {
        BiComplex::new(z, z)
    }

    pub fn e() -> Self {
        BiComplex::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0))
    }

    pub fn e_dagger() -> Self {
        BiComplex::new(Complex::new(0.0, 0.0), Complex::new(1.0, 0.0))
    }

    pub fn i() -> Self {
        BiComplex::new(I, I)
    }

    pub fn j() -> Self {
        BiComplex::new(-I, I)
    }

    pub fn k() -> Self {
        BiComplex::new(Complex::new(1.0, 0.0), Complex::new(-1.0, 0.0))
    }

    /// Builds `z1 + j z2` from its cartesian `C(i)` components.
    pub fn from_cartesian(z1: Complex, z2: Complex) -> Self {
        BiComplex::new(z1 - I * z2, z1 + I * z2)
    }

    /// Returns `(z1, z2)` with `Z = z1 + j z2`.
    pub fn to_cartesian(self) -> (Complex, Complex) {
        let z1 = (self.b1 + self.b2) * 0.5;
        let z2 = I * (self.b1 - self.b2) * 0.5;
        (z1, z2)
    }

    /// Builds `x1 + i y1 + j x2 + k y2`.
    pub fn from_real_components(c: [f64; 4]) -> Self {
        BiComplex::from_cartesian(Complex::new(c[0], c[1]), Complex::new(c[2], c[3]))
    }

    /// Returns `[x1, y1, x2, y2]`.
    pub fn to_real_components(self) -> [f64; 4] {
        let (z1, z2) = self.to_cartesian();
        [z1.re, z1.im, z2.re, z2.im]
    }

    /// Idempotent coefficients with respect to `C(j)`, each returned as the pair
    /// `(p, q)` meaning `p + j q`. Computed through `theta` from the `C(i)` view.
    pub fn idempotent_j(self) -> (Complex, Complex) {
        let t = self.theta();
        (t.b1, t.b2)
    }

    /// Inverse of [`BiComplex::idempotent_j`].
    pub fn from_idempotent_j(a1: Complex, a2: Complex) -> Self {
        BiComplex::new(a1, a2).theta()
    }

    pub fn conj(self, kind: Conjugation) -> Self {
        match kind {
            Conjugation::Star => BiComplex::new(self.b1.conj(), self.b2.conj()),
            Conjugation::Dagger => BiComplex::new(self.b2, self.b1),
            Conjugation::Bar => BiComplex::new(self.b2.conj(), self.b1.conj()),
        }
    }

    pub fn star(self) -> Self {
        self.conj(Conjugation::Star)
    }

    pub fn dagger(self) -> Self {
        self.conj(Conjugation::Dagger)
    }

    pub fn bar(self) -> Self {
        self.conj(Conjugation::Bar)
    }

    /// The hyperbolic-valued modulus `|b1| e + |b2| e†`.
    pub fn modulus_k(self) -> Hyperbolic {
        Hyperbolic::new(self.b1.norm(), self.b2.norm())
    }

    /// Largest idempotent coefficient magnitude.
    pub fn sup_norm(self) -> f64 {
        self.b1.norm().max(self.b2.norm())
    }

    /// Whether `self` lies in `S0` (a zero divisor or zero), up to
    /// [`ZERO_DIVISOR_TOL`] relative to the larger coefficient.
    pub fn is_zero_divisor(self) -> bool {
        let cutoff = ZERO_DIVISOR_TOL * (1.0 + self.sup_norm());
        self.b1.norm() < cutoff || self.b2.norm() < cutoff
    }

    pub fn inverse(self) -> Result<Self> {
        if self.is_zero_divisor() {
            return Err(Error::ZeroDivisor);
        }
        Ok(BiComplex::new(self.b1.inv(), self.b2.inv()))
    }

    pub fn checked_div(self, rhs: BiComplex) -> Result<Self> {
        Ok(self * rhs.inverse()?)
    }

    /// The involutive automorphism exchanging `i` and `j` and fixing `1`, `k`.
    pub fn theta(self) -> Self {
        let [x1, y1, x2, y2] = self.to_real_components();
        BiComplex::from_real_components([x1, x2, y1, y2])
    }

    pub fn scale(self, s: f64) -> Self {
        BiComplex::new(self.b1 * s, self.b2 * s)
    }

    pub fn powi(self, n: i32) -> Self {
        BiComplex::new(self.b1.powi(n), self.b2.powi(n))
    }

    pub fn exp(self) -> Self {
        BiComplex::new(self.b1.exp(), self.b2.exp())
    }

    pub fn is_finite(self) -> bool {
        self.b1.is_finite() && self.b2.is_finite()
    }

    /// Coefficientwise distance `max(|b1 - c1|, |b2 - c2|)`.
    pub fn dist(self, other: BiComplex) -> f64 {
        (self - other).sup_norm()
    }
}

impl Add for BiComplex {
    type Output = BiComplex;
    fn add(self, rhs: BiComplex) -> BiComplex {
        BiComplex::new(self.b1 + rhs.b1, self.b2 + rhs.b2)
    }
}

impl Sub for BiComplex {
    type Output = BiComplex;
    fn sub(self, rhs: BiComplex) -> BiComplex {
        BiComplex::new(self.b1 - rhs.b1, self.b2 - rhs.b2)
    }
}

impl Mul for BiComplex {
    type Output = BiComplex;
    fn mul(self, rhs: BiComplex) -> BiComplex {
        BiComplex::new(self.b1 * rhs.b1, self.b2 * rhs.b2)
    }
}

impl Mul<f64> for BiComplex {
    type Output = BiComplex;
    fn mul(self, rhs: f64) -> BiComplex {
        self.scale(rhs)
    }
}

impl Mul<Complex> for BiComplex {
    type Output = BiComplex;
    fn mul(self, rhs: Complex) -> BiComplex {
        BiComplex::new(self.b1 * rhs, self.b2 * rhs)
    }
}

impl Neg for BiComplex {
    type Output = BiComplex;
    fn neg(self) -> BiComplex {
        BiComplex::new(-self.b1, -self.b2)
    }
}

impl AddAssign for BiComplex {
    fn add_assign(&mut self, rhs: BiComplex) {
        self.b1 += rhs.b1;
        self.b2 += rhs.b2;
    }
}

impl SubAssign for BiComplex {
    fn sub_assign(&mut self, rhs: BiComplex) {
        self.b1 -= rhs.b1;
        self.b2 -= rhs.b2;
    }
}

impl MulAssign for BiComplex {
    fn mul_assign(&mut self, rhs: BiComplex) {
        self.b1 *= rhs.b1;
        self.b2 *= rhs.b2;
    }
}

impl std::iter::Sum for BiComplex {
    fn sum<It: Iterator<Item = BiComplex>>(iter: It) -> BiComplex {
        iter.fold(BiComplex::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for BiComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})e + ({})e†", self.b1, self.b2)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BiComplexRepr {
    Idempotent { b1: [f64; 2], b2: [f64; 2] },
    Cartesian { z1: [f64; 2], z2: [f64; 2] },
}

impl Serialize for BiComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BiComplexRepr::Idempotent {
            b1: [self.b1.re, self.b1.im],
            b2: [self.b2.re, self.b2.im],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BiComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let z = match BiComplexRepr::deserialize(d)? {
            BiComplexRepr::Idempotent { b1, b2 } => {
                BiComplex::new(Complex::new(b1[0], b1[1]), Complex::new(b2[0], b2[1]))
            }
            BiComplexRepr::Cartesian { z1, z2 } => {
                BiComplex::from_cartesian(Complex::new(z1[0], z1[1]), Complex::new(z2[0], z2[1]))
            }
        };
        if !z.is_finite() {
            return Err(serde::de::Error::custom(
                "bicomplex components must be finite",
            ));
        }
        Ok(z)
    }
}

/// A hyperbolic number `a e + b e†` with real coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Hyperbolic {
    pub a: f64,
    pub b: f64,
}

/// Outcome of comparing two hyperbolic numbers in the partial order of `D+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypOrder {
    /// `Y - X` lies in `D+`.
    Leq,
    /// `X - Y` lies in `D+` and `X != Y`.
    Greater,
    Incomparable,
}

impl Hyperbolic {
    pub const ZERO: Hyperbolic = Hyperbolic { a: 0.0, b: 0.0 };

    pub const fn new(a: f64, b: f64) -> Self {
        Hyperbolic { a, b }
    }

    pub fn in_d_plus(self) -> bool {
        self.a >= 0.0 && self.b >= 0.0
    }

    /// Whether `self` is a zero divisor of the algebra (one coefficient vanishes).
    pub fn is_zero_divisor(self) -> bool {
        self.to_bicomplex().is_zero_divisor()
    }

    pub fn to_bicomplex(self) -> BiComplex {
        BiComplex::new(Complex::new(self.a, 0.0), Complex::new(self.b, 0.0))
    }

    /// Coefficientwise square root; `None` outside `D+`.
    pub fn sqrt(self) -> Option<Self> {
        self.in_d_plus()
            .then(|| Hyperbolic::new(self.a.sqrt(), self.b.sqrt()))
    }

    pub fn max_coeff(self) -> f64 {
        self.a.max(self.b)
    }
}

impl Add for Hyperbolic {
    type Output = Hyperbolic;
    fn add(self, rhs: Hyperbolic) -> Hyperbolic {
        Hyperbolic::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl Sub for Hyperbolic {
    type Output = Hyperbolic;
    fn sub(self, rhs: Hyperbolic) -> Hyperbolic {
        Hyperbolic::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Mul for Hyperbolic {
    type Output = Hyperbolic;
    fn mul(self, rhs: Hyperbolic) -> Hyperbolic {
        Hyperbolic::new(self.a * rhs.a, self.b * rhs.b)
    }
}

impl fmt::Display for Hyperbolic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}e + {}e†", self.a, self.b)
    }
}

/// Decides `X ⪯ Y` in the partial order induced by `D+`.
pub fn hyp_leq(x: Hyperbolic, y: Hyperbolic) -> HypOrder {
    hyp_leq_tol(x, y, 0.0)
}

/// [`hyp_leq`] with an absolute slack `tol` on each coefficient.
pub fn hyp_leq_tol(x: Hyperbolic, y: Hyperbolic, tol: f64) -> HypOrder {
    let d = y - x;
    if d.a >= -tol && d.b >= -tol {
        HypOrder::Leq
    } else if d.a <= tol && d.b <= tol {
        HypOrder::Greater
    } else {
        HypOrder::Incomparable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn close(a: BiComplex, b: BiComplex, tol: f64) -> bool {
        a.dist(b) <= tol * (1.0 + a.sup_norm().max(b.sup_norm()))
    }

    #[test]
    fn cartesian_examples() {
        let one = BiComplex::from_cartesian(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(one, BiComplex::ONE);
        let j = BiComplex::from_cartesian(c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(j.b1, c(0.0, -1.0));
        assert_eq!(j.b2, c(0.0, 1.0));
        // 1 + j·i = 1 + k = 2e and 1 + j·(−i) = 1 − k = 2e†.
        let two_e = BiComplex::from_cartesian(c(1.0, 0.0), c(0.0, 1.0));
        assert_eq!(two_e.b1, c(2.0, 0.0));
        assert_eq!(two_e.b2, c(0.0, 0.0));
        assert_eq!(two_e, BiComplex::ONE + BiComplex::k());
        let two_ed = BiComplex::from_cartesian(c(1.0, 0.0), c(0.0, -1.0));
        assert_eq!(two_ed, BiComplex::e_dagger().scale(2.0));
    }

    #[test]
    fn unit_products() {
        let (e, ed) = (BiComplex::e(), BiComplex::e_dagger());
        assert_eq!(e * ed, BiComplex::ZERO);
        assert_eq!(e * e, e);
        assert_eq!(ed * ed, ed);
        let j = BiComplex::j();
        assert_eq!(j * j, BiComplex::real(-1.0));
        assert_eq!(BiComplex::i() * BiComplex::i(), BiComplex::real(-1.0));
        assert_eq!(BiComplex::i() * j, BiComplex::k());
        assert_eq!(BiComplex::k(), e - ed);
        assert_eq!(BiComplex::k() * BiComplex::k(), BiComplex::ONE);
    }

    #[test]
    fn inverse_examples() {
        let z = BiComplex::new(c(2.0, 0.0), c(4.0, 0.0));
        assert_eq!(
            z.inverse().unwrap(),
            BiComplex::new(c(0.5, 0.0), c(0.25, 0.0))
        );
        assert!(matches!(BiComplex::e().inverse(), Err(Error::ZeroDivisor)));
        assert_eq!(BiComplex::ONE.inverse().unwrap(), BiComplex::ONE);
        assert!(BiComplex::ZERO.inverse().is_err());
    }

    #[test]
    fn conjugation_examples() {
        let z = BiComplex::new(c(0.0, 1.0), c(2.0, 0.0));
        assert_eq!(z.star(), BiComplex::new(c(0.0, -1.0), c(2.0, 0.0)));
        assert_eq!(z.dagger(), BiComplex::new(c(2.0, 0.0), c(0.0, 1.0)));
    }

    #[test]
    fn modulus_examples() {
        let z = BiComplex::new(c(3.0, 0.0), c(4.0, 0.0));
        assert_eq!(z.modulus_k(), Hyperbolic::new(3.0, 4.0));
        assert_eq!(BiComplex::ZERO.modulus_k(), Hyperbolic::ZERO);
    }

    #[test]
    fn order_examples() {
        let x = Hyperbolic::new(1.0, 1.0);
        assert_eq!(hyp_leq(x, Hyperbolic::new(2.0, 3.0)), HypOrder::Leq);
        assert_eq!(
            hyp_leq(Hyperbolic::ZERO, Hyperbolic::new(1.0, -1.0)),
            HypOrder::Incomparable
        );
        assert_eq!(hyp_leq(x, x), HypOrder::Leq);
        assert_eq!(hyp_leq(Hyperbolic::new(2.0, 3.0), x), HypOrder::Greater);
    }

    #[test]
    fn theta_examples() {
        assert!(close(BiComplex::i().theta(), BiComplex::j(), 1e-16));
        assert!(close(BiComplex::k().theta(), BiComplex::k(), 1e-16));
        assert!(close(BiComplex::j().theta(), BiComplex::i(), 1e-16));
        assert!(close(BiComplex::ONE.theta(), BiComplex::ONE, 1e-16));
    }

    #[test]
    fn json_forms() {
        let z = BiComplex::new(c(1.0, 2.0), c(-3.0, 0.5));
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"b1":[1.0,2.0],"b2":[-3.0,0.5]}"#);
        let back: BiComplex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        let j: BiComplex = serde_json::from_str(r#"{"z1":[0,0],"z2":[1,0]}"#).unwrap();
        assert_eq!(j, BiComplex::j());
        assert!(serde_json::from_str::<BiComplex>(r#"{"b1":[1,2]}"#).is_err());
    }

    fn arb_bc() -> impl Strategy<Value = BiComplex> {
        prop::array::uniform4(-3.0f64..3.0)
            .prop_map(|v| BiComplex::new(c(v[0], v[1]), c(v[2], v[3])))
    }

    proptest! {
        #[test]
        fn cartesian_round_trip(z in arb_bc()) {
            let (z1, z2) = z.to_cartesian();
            prop_assert!(close(BiComplex::from_cartesian(z1, z2), z, 1e-15));
        }

        #[test]
        fn theta_is_idempotent_conjugation_of_first_slot(z in arb_bc()) {
            let t = z.theta();
            prop_assert!(close(t, BiComplex::new(z.b1.conj(), z.b2), 1e-15));
            prop_assert!(close(t.theta(), z, 1e-15));
        }

        #[test]
        fn j_view_round_trip(z in arb_bc()) {
            let (a1, a2) = z.idempotent_j();
            prop_assert!(close(BiComplex::from_idempotent_j(a1, a2), z, 1e-15));
        }

        #[test]
        fn inverse_is_two_sided(z in arb_bc()) {
            prop_assume!(!z.is_zero_divisor());
            let w = z.inverse().unwrap();
            prop_assert!(close(z * w, BiComplex::ONE, 1e-12));
        }

        #[test]
        fn modulus_squared_is_z_times_star(z in arb_bc()) {
            let m = z.modulus_k().to_bicomplex();
            prop_assert!(close(m * m, z * z.star(), 1e-14));
            prop_assert_eq!(z.modulus_k().is_zero_divisor(), z.is_zero_divisor());
        }
    }
}
