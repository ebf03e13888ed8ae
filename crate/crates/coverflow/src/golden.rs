//! Exact arithmetic in Q(φ), φ² = φ + 1, and 2×2 matrices over it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact element a + bφ of the golden field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GoldenScalar {
    pub a: BigRational,
    pub b: BigRational,
}

impl GoldenScalar {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        GoldenScalar { a, b }
    }

    pub fn from_int(n: i64) -> Self {
        GoldenScalar::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn from_rationals(a: BigRational, b: BigRational) -> Self {
        GoldenScalar { a, b }
    }

    pub fn zero() -> Self {
        GoldenScalar::from_int(0)
    }

    pub fn one() -> Self {
        GoldenScalar::from_int(1)
    }

    /// φ itself.
    pub fn phi() -> Self {
        GoldenScalar::new(BigRational::zero(), BigRational::one())
    }

    /// φ² = φ + 1.
    pub fn phi_squared() -> Self {
        GoldenScalar::new(BigRational::one(), BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Galois conjugate: φ ↦ 1 − φ (the other root of x² = x + 1).
    pub fn conjugate(&self) -> Self {
        GoldenScalar::new(&self.a + &self.b, -self.b.clone())
    }

    /// Field norm a² + ab − b² = (a+bφ)(a + b(1−φ)); zero iff self is zero.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + &self.a * &self.b - &self.b * &self.b
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Invalid("division by zero in Q(φ)".into()));
        }
        let n = self.norm();
        let conj = self.conjugate();
        Ok(GoldenScalar::new(conj.a / &n, conj.b / n))
    }

    /// Exact sign of a + bφ, using 2(a+bφ) = (2a+b) + b√5.
    pub fn sign(&self) -> Ordering {
        let x = &self.a + &self.a + &self.b; // 2a + b
        let y = &self.b; // coefficient of √5
        match (x.cmp(&BigRational::zero()), y.cmp(&BigRational::zero())) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            (sx, _) => {
                // mixed signs: compare x² with 5y²; x + y√5 has the sign of
                // x when x² > 5y², otherwise the sign of y
                let x2 = &x * &x;
                let y5 = BigRational::from_integer(5.into()) * y * y;
                match x2.cmp(&y5) {
                    Ordering::Greater => sx,
                    Ordering::Less => sx.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.sign() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * phi
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    // split into quotient and remainder to keep precision for large values
    let q = numer / denom;
    let rem = numer - &q * denom;
    let q_f: f64 = q.to_string().parse().unwrap_or(f64::NAN);
    let rem_f: f64 = rem.to_string().parse().unwrap_or(f64::NAN);
    let den_f: f64 = denom.to_string().parse().unwrap_or(f64::NAN);
    q_f + rem_f / den_f
}

impl Add for GoldenScalar {
    type Output = GoldenScalar;
    fn add(self, rhs: GoldenScalar) -> GoldenScalar {
        GoldenScalar::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl<'a> Add<&'a GoldenScalar> for &'a GoldenScalar {
    type Output = GoldenScalar;
    fn add(self, rhs: &GoldenScalar) -> GoldenScalar {
        GoldenScalar::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for GoldenScalar {
    type Output = GoldenScalar;
    fn sub(self, rhs: GoldenScalar) -> GoldenScalar {
        GoldenScalar::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl<'a> Sub<&'a GoldenScalar> for &'a GoldenScalar {
    type Output = GoldenScalar;
    fn sub(self, rhs: &GoldenScalar) -> GoldenScalar {
        GoldenScalar::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Neg for GoldenScalar {
    type Output = GoldenScalar;
    fn neg(self) -> GoldenScalar {
        GoldenScalar::new(-self.a, -self.b)
    }
}

impl Mul for GoldenScalar {
    type Output = GoldenScalar;
    fn mul(self, rhs: GoldenScalar) -> GoldenScalar {
        &self * &rhs
    }
}

impl<'a> Mul<&'a GoldenScalar> for &'a GoldenScalar {
    type Output = GoldenScalar;
    fn mul(self, rhs: &GoldenScalar) -> GoldenScalar {
        // (a + bφ)(c + dφ) = ac + bd + (ad + bc + bd)φ  using φ² = φ + 1
        let ac = &self.a * &rhs.a;
        let bd = &self.b * &rhs.b;
        let ad_bc = &self.a * &rhs.b + &self.b * &rhs.a;
        GoldenScalar::new(ac + &bd, ad_bc + bd)
    }
}

impl Div for GoldenScalar {
    type Output = GoldenScalar;
    fn div(self, rhs: GoldenScalar) -> GoldenScalar {
        &self * &rhs.inverse().expect("division by zero in Q(φ)")
    }
}

impl PartialOrd for GoldenScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GoldenScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign()
    }
}

impl fmt::Display for GoldenScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            return write!(f, "{}*phi", self.b);
        }
        if self.b.is_negative() {
            write!(f, "{}-{}*phi", self.a, -self.b.clone())
        } else {
            write!(f, "{}+{}*phi", self.a, self.b)
        }
    }
}

impl fmt::Debug for GoldenScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses expressions like "3", "-1/2", "phi", "2*phi", "1+2*phi", "1-phi",
/// "-1/2+3/4*phi".
pub fn parse_golden(s: &str) -> Result<GoldenScalar> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty golden-field expression".into()));
    }
    // split into signed terms
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    for (i, c) in s.chars().enumerate() {
        if (c == '+' || c == '-') && i != 0 {
            terms.push(std::mem::take(&mut cur));
            if c == '-' {
                cur.push('-');
            }
        } else {
            cur.push(c);
        }
    }
    terms.push(cur);
    let mut out = GoldenScalar::zero();
    for term in terms {
        if term.is_empty() || term == "-" {
            return Err(Error::Parse(format!("malformed expression {s:?}")));
        }
        let (coeff_str, is_phi) = if let Some(rest) = term.strip_suffix("phi") {
            let rest = rest.strip_suffix('*').unwrap_or(rest);
            (rest.to_string(), true)
        } else {
            (term.clone(), false)
        };
        let coeff = if coeff_str.is_empty() {
            BigRational::one()
        } else if coeff_str == "-" {
            -BigRational::one()
        } else {
            parse_rational(&coeff_str)?
        };
        if is_phi {
            out.b += coeff;
        } else {
            out.a += coeff;
        }
    }
    Ok(out)
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let parse_int = |t: &str| {
        t.parse::<num_bigint::BigInt>()
            .map_err(|_| Error::Parse(format!("bad number {t:?}")))
    };
    if let Some((n, d)) = s.split_once('/') {
        let denom = parse_int(d)?;
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRational::new(parse_int(n)?, denom))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}

/// A 2×2 matrix over Q(φ) with determinant ±1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat2 {
    pub entries: [GoldenScalar; 4], // row-major [a, b, c, d]
}

impl Mat2 {
    pub fn new(entries: [GoldenScalar; 4]) -> Result<Self> {
        let m = Mat2 { entries };
        let det = m.det();
        if det != GoldenScalar::one() && det != GoldenScalar::from_int(-1) {
            return Err(Error::Invalid(format!("determinant {det} is not ±1")));
        }
        Ok(m)
    }

    pub fn det(&self) -> GoldenScalar {
        let [a, b, c, d] = &self.entries;
        &(a * d) - &(b * c)
    }

    pub fn identity() -> Self {
        Mat2 {
            entries: [
                GoldenScalar::one(),
                GoldenScalar::zero(),
                GoldenScalar::zero(),
                GoldenScalar::one(),
            ],
        }
    }

    /// Derivative of ψ: [[1, 0], [2φ, 1]].
    pub fn d_psi() -> Self {
        Mat2 {
            entries: [
                GoldenScalar::one(),
                GoldenScalar::zero(),
                GoldenScalar::phi() + GoldenScalar::phi(),
                GoldenScalar::one(),
            ],
        }
    }

    /// Derivative of ρ: [[0, 1], [1, 0]].
    pub fn d_rho() -> Self {
        Mat2 {
            entries: [
                GoldenScalar::zero(),
                GoldenScalar::one(),
                GoldenScalar::one(),
                GoldenScalar::zero(),
            ],
        }
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &rhs.entries;
        Mat2 {
            entries: [
                &(a * e) + &(b * g),
                &(a * f) + &(b * h),
                &(c * e) + &(d * g),
                &(c * f) + &(d * h),
            ],
        }
    }

    pub fn inverse(&self) -> Mat2 {
        let [a, b, c, d] = &self.entries;
        let det = self.det();
        let det_inv = det.inverse().expect("det is ±1");
        Mat2 {
            entries: [
                d * &det_inv,
                -(b * &det_inv),
                -(c * &det_inv),
                a * &det_inv,
            ],
        }
    }

    pub fn trace(&self) -> GoldenScalar {
        &self.entries[0] + &self.entries[3]
    }
}
