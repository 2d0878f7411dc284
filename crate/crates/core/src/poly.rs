//! Exact bivariate polynomials in `(k, m)` with rational coefficients.
//!
//! Divisibility arguments are meaningless under rounding, so every symbolic
//! path stays in `BigRational`; floating point enters only at evaluation.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::ser::{Error as _, SerializeSeq, SerializeStruct};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("leading coefficient in k is not an invertible rational")]
    LeadingCoeffNotInvertible,
}

/// Polynomial in `k` and `m`; the map sends exponents `(i, j)` of `k^i m^j`
/// to nonzero rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BivarPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl BivarPoly {
    pub fn zero() -> Self {
        BivarPoly::default()
    }

    pub fn one() -> Self {
        BivarPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = BivarPoly::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn from_int(n: i64) -> Self {
        BivarPoly::constant(rational(n, 1))
    }

    pub fn var_k() -> Self {
        BivarPoly::monomial(1, 0, BigRational::one())
    }

    pub fn var_m() -> Self {
        BivarPoly::monomial(0, 1, BigRational::one())
    }

    pub fn monomial(i: u32, j: u32, coeff: BigRational) -> Self {
        let mut p = BivarPoly::zero();
        p.add_term(i, j, coeff);
        p
    }

    /// `a·k + b·m + c` from machine integers, the common test shape.
    pub fn linear(a: i64, b: i64, c: i64) -> Self {
        let mut p = BivarPoly::zero();
        p.add_term(1, 0, rational(a, 1));
        p.add_term(0, 1, rational(b, 1));
        p.add_term(0, 0, rational(c, 1));
        p
    }

    fn add_term(&mut self, i: u32, j: u32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    /// Degree in `k` alone.
    pub fn degree_k(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    /// The coefficient of `k^i` as a polynomial in `m`.
    pub fn coeff_of_k_power(&self, i: u32) -> BivarPoly {
        let mut p = BivarPoly::zero();
        for (&(ki, j), c) in &self.terms {
            if ki == i {
                p.add_term(0, j, c.clone());
            }
        }
        p
    }

    pub fn scale(&self, c: &BigRational) -> BivarPoly {
        let mut p = BivarPoly::zero();
        for (&(i, j), coeff) in &self.terms {
            p.add_term(i, j, coeff * c);
        }
        p
    }

    pub fn pow(&self, e: u32) -> BivarPoly {
        let mut acc = BivarPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval_f64(&self, k: f64, m: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c.to_f64().unwrap_or(f64::NAN) * k.powi(i as i32) * m.powi(j as i32))
            .sum()
    }

    pub fn eval_rational(&self, k: &BigRational, m: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(i, j), c) in &self.terms {
            let mut term = c.clone();
            for _ in 0..i {
                term *= k;
            }
            for _ in 0..j {
                term *= m;
            }
            acc += term;
        }
        acc
    }

    /// Max absolute value of the coefficients, as f64.
    pub fn coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().map(f64::abs).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl Add for &BivarPoly {
    type Output = BivarPoly;
    fn add(self, rhs: &BivarPoly) -> BivarPoly {
        let mut p = self.clone();
        for (&(i, j), c) in &rhs.terms {
            p.add_term(i, j, c.clone());
        }
        p
    }
}

impl Sub for &BivarPoly {
    type Output = BivarPoly;
    fn sub(self, rhs: &BivarPoly) -> BivarPoly {
        let mut p = self.clone();
        for (&(i, j), c) in &rhs.terms {
            p.add_term(i, j, -c.clone());
        }
        p
    }
}

impl Neg for &BivarPoly {
    type Output = BivarPoly;
    fn neg(self) -> BivarPoly {
        BivarPoly::zero().sub(self)
    }
}

impl Mul for &BivarPoly {
    type Output = BivarPoly;
    fn mul(self, rhs: &BivarPoly) -> BivarPoly {
        let mut p = BivarPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                p.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        p
    }
}

/// `1 + k² + m²`, the factor every second-order Taylor coefficient of a
/// bundle circle carries.
pub fn fundamental_factor() -> BivarPoly {
    let mut f = BivarPoly::one();
    f.add_term(2, 0, BigRational::one());
    f.add_term(0, 2, BigRational::one());
    f
}

/// Exact division with remainder in `k` over the coefficient ring `Q[m]`.
///
/// Requires the divisor's leading coefficient in `k` to be a nonzero
/// rational constant (true for `f = k² + (1 + m²)`, which is monic in `k`).
/// Returns `(q, r)` with `p = q·d + r` and `deg_k r < deg_k d`.
pub fn poly_divrem(p: &BivarPoly, d: &BivarPoly) -> Result<(BivarPoly, BivarPoly), PolyError> {
    if d.is_zero() {
        return Err(PolyError::ZeroDivisor);
    }
    let dk = d.degree_k().expect("nonzero divisor has a k-degree");
    let lead = d.coeff_of_k_power(dk);
    if lead.degree() != Some(0) {
        return Err(PolyError::LeadingCoeffNotInvertible);
    }
    let lead = lead.coeff(0, 0);
    let mut q = BivarPoly::zero();
    let mut r = p.clone();
    while let Some(rk) = r.degree_k() {
        if rk < dk {
            break;
        }
        // t = (leading k-slice of r) / lead · k^(rk − dk)
        let slice = r.coeff_of_k_power(rk);
        let mut t = BivarPoly::zero();
        for (&(_, j), c) in slice.terms.iter() {
            t.add_term(rk - dk, j, c / &lead);
        }
        q = &q + &t;
        r = &r - &(&t * d);
    }
    Ok((q, r))
}

// JSON shape: {"terms":[{"i":int,"j":int,"num":int,"den":int},...]}
impl Serialize for BivarPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Term<'a>(u32, u32, &'a BigRational);
        impl Serialize for Term<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let num = self.2.numer().to_i64().ok_or_else(|| {
                    S::Error::custom("coefficient numerator exceeds i64 range")
                })?;
                let den = self.2.denom().to_i64().ok_or_else(|| {
                    S::Error::custom("coefficient denominator exceeds i64 range")
                })?;
                let mut s = serializer.serialize_struct("Term", 4)?;
                s.serialize_field("i", &self.0)?;
                s.serialize_field("j", &self.1)?;
                s.serialize_field("num", &num)?;
                s.serialize_field("den", &den)?;
                s.end()
            }
        }
        struct Terms<'a>(&'a BTreeMap<(u32, u32), BigRational>);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for (&(i, j), c) in self.0 {
                    seq.serialize_element(&Term(i, j, c))?;
                }
                seq.end()
            }
        }
        let mut s = serializer.serialize_struct("BivarPoly", 1)?;
        s.serialize_field("terms", &Terms(&self.terms))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for BivarPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            i: u32,
            j: u32,
            num: i64,
            den: i64,
        }
        #[derive(Deserialize)]
        struct Raw {
            terms: Vec<Term>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut p = BivarPoly::zero();
        for t in raw.terms {
            if t.den == 0 {
                return Err(D::Error::custom("zero denominator in polynomial term"));
            }
            p.add_term(t.i, t.j, rational(t.num, t.den));
        }
        Ok(p)
    }
}

impl fmt::Display for BivarPoly {
    /// Canonical print in the CLI expression grammar: highest total degree
    /// first, ties broken by `k`-degree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(i, j)| (std::cmp::Reverse(i + j), std::cmp::Reverse(i)));
        for (idx, &&(i, j)) in keys.iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || (i == 0 && j == 0) {
                if abs.denom().is_one() {
                    factors.push(format!("{}", abs.numer()));
                } else {
                    factors.push(format!("{}/{}", abs.numer(), abs.denom()));
                }
            }
            if i > 0 {
                factors.push(if i == 1 { "k".into() } else { format!("k^{i}") });
            }
            if j > 0 {
                factors.push(if j == 1 { "m".into() } else { format!("m^{j}") });
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
