//! Arithmetic in the prime field `F_q`.

use serde::{Deserialize, Serialize};

use crate::decomp::is_prime;
use crate::error::{Error, Result};

/// An element of `F_q` for a prime `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement {
    value: u32,
    modulus: u32,
}

impl FieldElement {
    pub fn new(value: u64, modulus: u32) -> Result<Self> {
        if !is_prime(modulus) {
            return Err(Error::InvalidScheme(format!("field order {modulus} is not prime")));
        }
        Ok(FieldElement {
            value: (value % modulus as u64) as u32,
            modulus,
        })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    fn with(self, value: u64) -> Self {
        FieldElement {
            value: (value % self.modulus as u64) as u32,
            modulus: self.modulus,
        }
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = self.with(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        (self.value != 0).then(|| self.pow(self.modulus as u64 - 2))
    }
}

impl std::ops::Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.value as u64 + rhs.value as u64)
    }
}

impl std::ops::Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.value as u64 + self.modulus as u64 - rhs.value as u64)
    }
}

impl std::ops::Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.with(self.value as u64 * rhs.value as u64)
    }
}

/// Evaluates `Σ coeffs[j] x^j` at `x` over `F_q`.
pub fn eval_poly(coeffs: &[u32], x: u32, q: u32) -> u32 {
    let q = q as u64;
    coeffs
        .iter()
        .rev()
        .fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % q) as u32
}

/// Coefficient of `x^{d}` (with `d = points.len() − 1`) of the unique
/// polynomial of degree `≤ d` through `(points[i], values[i])`.
///
/// This is `Σ_i y_i / Π_{j≠i} (x_i − x_j)`.
pub fn leading_coefficient(points: &[u32], values: &[u32], q: u32) -> Result<u32> {
    let zero = FieldElement::new(0, q)?;
    let mut acc = zero;
    for (i, (&xi, &yi)) in points.iter().zip(values).enumerate() {
        let mut denom = zero.with(1);
        for (j, &xj) in points.iter().enumerate() {
            if i != j {
                denom = denom * (zero.with(xi as u64) - zero.with(xj as u64));
            }
        }
        let inv = denom
            .inv()
            .ok_or_else(|| Error::InvalidScheme("repeated evaluation point".into()))?;
        acc = acc + zero.with(yi as u64) * inv;
    }
    Ok(acc.value())
}
