//! Exact coefficients: rationals and truncated polynomial Artin rings.
//!
//! Everything downstream works over `R = Q[t]/(t^N)` with maximal ideal
//! `m = (t)`; `N = 1` recovers the ground field `Q`. Elements are stored as
//! the `N` coefficients of `1, t, ..., t^{N-1}`, always as reduced rationals,
//! so equality is literal equality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

use crate::error::CoreError;

/// Reduced arbitrary-precision rational, the ground field of the library.
pub type Rational = BigRational;

/// Parse `"p/q"` or `"p"` into a reduced rational.
pub fn rational_from_str(s: &str) -> Result<Rational, CoreError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = num
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad rational numerator `{s}`")))?;
    let q: BigInt = den
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad rational denominator `{s}`")))?;
    if q.is_zero() {
        return Err(CoreError::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(BigRational::new(p, q))
}

/// Render a rational as `"p/q"`, or `"p"` when the denominator is 1.
pub fn rational_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_i64(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat(n: i64) -> Rational {
    BigRational::from(BigInt::from(n))
}

/// The Artin ring `Q[t]/(t^N)`; `N` is the nilpotency order of `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArtinRing {
    order: usize,
}

impl ArtinRing {
    pub fn new(order: usize) -> Result<Self, CoreError> {
        if order == 0 {
            return Err(CoreError::Invalid("Artin ring needs N >= 1".into()));
        }
        Ok(ArtinRing { order })
    }

    /// Nilpotency order `N` (so `t^N = 0`).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn zero(&self) -> RElement {
        RElement {
            ring: *self,
            coeffs: vec![BigRational::zero(); self.order],
        }
    }

    pub fn one(&self) -> RElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, c: Rational) -> RElement {
        let mut coeffs = vec![BigRational::zero(); self.order];
        coeffs[0] = c;
        RElement {
            ring: *self,
            coeffs,
        }
    }

    /// The generator `t`, or zero when `N = 1`.
    pub fn t(&self) -> RElement {
        let mut coeffs = vec![BigRational::zero(); self.order];
        if self.order > 1 {
            coeffs[1] = BigRational::one();
        }
        RElement {
            ring: *self,
            coeffs,
        }
    }

    /// `c * t^k`, truncated away when `k >= N`.
    pub fn monomial(&self, k: usize, c: Rational) -> RElement {
        let mut coeffs = vec![BigRational::zero(); self.order];
        if k < self.order {
            coeffs[k] = c;
        }
        RElement {
            ring: *self,
            coeffs,
        }
    }

    pub fn from_coeffs(&self, cs: Vec<Rational>) -> Result<RElement, CoreError> {
        if cs.len() != self.order {
            return Err(CoreError::Invalid(format!(
                "RElement needs {} coefficients, got {}",
                self.order,
                cs.len()
            )));
        }
        Ok(RElement {
            ring: *self,
            coeffs: cs,
        })
    }
}

/// Element of `Q[t]/(t^N)`: `coeffs[i]` is the coefficient of `t^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RElement {
    ring: ArtinRing,
    coeffs: Vec<Rational>,
}

impl RElement {
    pub fn ring(&self) -> ArtinRing {
        self.ring
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Lies in the maximal ideal `m = (t)`.
    pub fn in_maximal_ideal(&self) -> bool {
        self.coeffs[0].is_zero()
    }

    /// t-adic valuation: smallest `k` with nonzero `t^k` coefficient (`N` for zero).
    pub fn valuation(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.ring.order)
    }

    fn check_ring(&self, other: &RElement) -> Result<(), CoreError> {
        if self.ring != other.ring {
            return Err(CoreError::RingMismatch {
                left: self.ring.order,
                right: other.ring.order,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &RElement) -> Result<RElement, CoreError> {
        self.check_ring(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(RElement {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn sub(&self, other: &RElement) -> Result<RElement, CoreError> {
        self.check_ring(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(RElement {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn neg(&self) -> RElement {
        RElement {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn mul(&self, other: &RElement) -> Result<RElement, CoreError> {
        self.check_ring(other)?;
        let n = self.ring.order;
        let mut coeffs = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Ok(RElement {
            ring: self.ring,
            coeffs,
        })
    }

    pub fn scale(&self, c: &Rational) -> RElement {
        RElement {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Inverse by truncated geometric series; needs a nonzero constant term.
    pub fn invert(&self) -> Result<RElement, CoreError> {
        if self.coeffs[0].is_zero() {
            return Err(CoreError::NotAUnit);
        }
        let c0 = self.coeffs[0].clone();
        // self = c0 (1 - u) with u in m; inverse is c0^{-1} (1 + u + u^2 + ...).
        let mut u = self.scale(&(BigRational::one() / &c0)).neg();
        u.coeffs[0] = BigRational::zero(); // u = 1 - self/c0, constant term 0
        let mut acc = self.ring.one();
        let mut pow = self.ring.one();
        for _ in 1..self.ring.order {
            pow = pow.mul(&u)?;
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow)?;
        }
        Ok(acc.scale(&(BigRational::one() / c0)))
    }

    /// Ring homomorphism `Q[t]/(t^N) -> Q[t]/(t^M)`, `M <= N` (truncation).
    pub fn base_reduce(&self, target_order: usize) -> Result<RElement, CoreError> {
        if target_order == 0 || target_order > self.ring.order {
            return Err(CoreError::Invalid(format!(
                "base_reduce target order {} out of range 1..={}",
                target_order, self.ring.order
            )));
        }
        Ok(RElement {
            ring: ArtinRing {
                order: target_order,
            },
            coeffs: self.coeffs[..target_order].to_vec(),
        })
    }

    /// Constant-term projection `R -> Q` (reduction mod `m`).
    pub fn constant_term(&self) -> Rational {
        self.coeffs[0].clone()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_to_string).collect()
    }

    pub fn from_strings(ring: ArtinRing, parts: &[String]) -> Result<RElement, CoreError> {
        if parts.len() > ring.order() {
            return Err(CoreError::Invalid(format!(
                "RElement literal has {} coefficients but N = {}",
                parts.len(),
                ring.order()
            )));
        }
        let mut coeffs = vec![BigRational::zero(); ring.order()];
        for (i, p) in parts.iter().enumerate() {
            coeffs[i] = rational_from_str(p)?;
        }
        Ok(RElement { ring, coeffs })
    }

    /// Largest absolute value among numerators/denominators, for report size hints.
    pub fn magnitude(&self) -> BigInt {
        let mut m = BigInt::zero();
        for c in &self.coeffs {
            let a = c.numer().abs();
            let b = c.denom().abs();
            if a > m {
                m = a;
            }
            if b > m {
                m = b;
            }
        }
        m
    }
}

impl fmt::Display for RElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", rational_to_string(c))?,
                1 => write!(f, "{}*t", rational_to_string(c))?,
                _ => write!(f, "{}*t^{}", rational_to_string(c), i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::Rng;

    fn r(n: usize) -> ArtinRing {
        ArtinRing::new(n).unwrap()
    }

    #[test]
    fn truncated_products() {
        let ring = r(2);
        let one_plus_t = ring.one().add(&ring.t()).unwrap();
        let one_minus_t = ring.one().sub(&ring.t()).unwrap();
        assert!(one_plus_t.mul(&one_minus_t).unwrap().is_one());
        assert!(ring.t().mul(&ring.t()).unwrap().is_zero());

        let ring3 = r(3);
        let a = ring3.one().add(&ring3.t()).unwrap();
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coeff(0), rat(1));
        assert_eq!(sq.coeff(1), rat(2));
        assert_eq!(sq.coeff(2), rat(1));
    }

    #[test]
    fn geometric_inverse() {
        let ring = r(2);
        let a = ring.one().add(&ring.t()).unwrap();
        assert_eq!(a.invert().unwrap(), ring.one().sub(&ring.t()).unwrap());

        let ring3 = r(3);
        let a = ring3.one().add(&ring3.t()).unwrap();
        let inv = a.invert().unwrap();
        assert_eq!(inv.coeff(0), rat(1));
        assert_eq!(inv.coeff(1), rat(-1));
        assert_eq!(inv.coeff(2), rat(1));

        let two = r(2).from_rational(rat(2));
        assert_eq!(two.invert().unwrap().coeff(0), rat_i64(1, 2));

        assert!(matches!(r(2).t().invert(), Err(CoreError::NotAUnit)));
    }

    #[test]
    fn base_reduce_cases() {
        let ring = r(3);
        let a = ring.from_coeffs(vec![rat(2), rat(5), rat(7)]).unwrap();
        assert_eq!(a.base_reduce(1).unwrap().coeffs(), &[rat(2)]);
        assert_eq!(a.base_reduce(2).unwrap().coeffs(), &[rat(2), rat(5)]);
        let b = r(2).from_coeffs(vec![rat(1), rat(4)]).unwrap();
        assert_eq!(b.base_reduce(2).unwrap(), b);
        assert!(a.base_reduce(4).is_err());
        assert!(a.base_reduce(0).is_err());
    }

    #[test]
    fn ring_axioms_randomized() {
        let mut rng = Rng::new(0xC0FFEE);
        for n in 1..=5 {
            let ring = r(n);
            for _ in 0..40 {
                let a = rng.relement(ring, 3);
                let b = rng.relement(ring, 3);
                let c = rng.relement(ring, 3);
                let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
                let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
                assert_eq!(ab_c, a_bc);
                assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
                let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
                let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
                // base_reduce is a ring homomorphism
                for m in 1..=n {
                    let red = a.mul(&b).unwrap().base_reduce(m).unwrap();
                    let red2 = a
                        .base_reduce(m)
                        .unwrap()
                        .mul(&b.base_reduce(m).unwrap())
                        .unwrap();
                    assert_eq!(red, red2);
                }
            }
        }
    }

    #[test]
    fn invert_is_exact_inverse() {
        let mut rng = Rng::new(0xBEEF);
        for n in 1..=5 {
            let ring = r(n);
            for _ in 0..30 {
                let mut a = rng.relement(ring, 3);
                if a.coeff(0).is_zero() {
                    a = a.add(&ring.one()).unwrap();
                }
                assert!(a.mul(&a.invert().unwrap()).unwrap().is_one());
            }
        }
    }

    #[test]
    fn maximal_ideal_nilpotent() {
        let mut rng = Rng::new(0x51DE);
        for n in 1..=5 {
            let ring = r(n);
            for _ in 0..10 {
                let mut prod = ring.one();
                for _ in 0..n {
                    let mut x = rng.relement(ring, 2);
                    x = x.sub(&ring.from_rational(x.constant_term())).unwrap();
                    assert!(x.in_maximal_ideal());
                    prod = prod.mul(&x).unwrap();
                }
                assert!(prod.is_zero(), "m^N must vanish");
            }
        }
    }

    #[test]
    fn string_roundtrip() {
        let ring = r(3);
        let a = ring
            .from_coeffs(vec![rat_i64(-3, 7), rat(0), rat_i64(5, 2)])
            .unwrap();
        let s = a.to_strings();
        assert_eq!(s, vec!["-3/7", "0", "5/2"]);
        assert_eq!(RElement::from_strings(ring, &s).unwrap(), a);
    }
}
