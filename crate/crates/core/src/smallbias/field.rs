use crate::error::{Error, Result};
use crate::smallbias::polys::{LEAST_IRREDUCIBLE, LEAST_PRIMITIVE};

/// GF(2^n) for 1 ≤ n ≤ 127, elements as polynomial-basis integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryField {
    degree: u32,
    low: u128,
    mask: u128,
}

impl BinaryField {
    /// Field defined by `x^degree + low`; irreducibility is the caller's promise.
    pub fn new(degree: u32, low: u128) -> Result<Self> {
        if !(1..=127).contains(&degree) {
            return Err(Error::InvalidParams(format!(
                "field degree {degree} outside 1..=127"
            )));
        }
        let mask = (1u128 << degree) - 1;
        if low & !mask != 0 {
            return Err(Error::InvalidParams(
                "reduction polynomial exceeds field degree".into(),
            ));
        }
        Ok(BinaryField { degree, low, mask })
    }

    /// The field under the least irreducible polynomial of this degree.
    pub fn least_irreducible(degree: u32) -> Result<Self> {
        let low = *LEAST_IRREDUCIBLE
            .get((degree as usize).wrapping_sub(1))
            .ok_or_else(|| {
                Error::InvalidParams(format!("no baked polynomial of degree {degree}"))
            })?;
        BinaryField::new(degree, low)
    }

    /// The field under the least primitive polynomial, so `x` is a generator.
    pub fn least_primitive(degree: u32) -> Result<Self> {
        let low = *LEAST_PRIMITIVE
            .get((degree as usize).wrapping_sub(1))
            .ok_or_else(|| {
                Error::InvalidParams(format!("no baked primitive polynomial of degree {degree}"))
            })?;
        BinaryField::new(degree, low)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Low part of the modulus (`modulus - x^degree`).
    pub fn modulus_low(&self) -> u128 {
        self.low
    }

    pub fn order(&self) -> u128 {
        self.mask
    }

    #[inline]
    pub fn contains(&self, a: u128) -> bool {
        a & !self.mask == 0
    }

    #[inline]
    pub fn mul_x(&self, a: u128) -> u128 {
        let carry = (a >> (self.degree - 1)) & 1;
        let shifted = (a << 1) & self.mask;
        if carry == 1 {
            shifted ^ self.low
        } else {
            shifted
        }
    }

    /// Shift-and-add carryless multiplication with reduction on the fly.
    #[inline]
    pub fn mul(&self, a: u128, b: u128) -> u128 {
        debug_assert!(self.contains(a) && self.contains(b));
        let (mut a, mut b, mut r) = (a, b, 0u128);
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a = self.mul_x(a);
        }
        r
    }

    pub fn pow(&self, a: u128, mut e: u128) -> u128 {
        let (mut base, mut acc) = (a, 1u128);
        while e != 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Product in GF(2^degree) under the baked least irreducible polynomial.
pub fn field_mul(degree: u32, a: u128, b: u128) -> Result<u128> {
    let f = BinaryField::least_irreducible(degree)?;
    if !f.contains(a) || !f.contains(b) {
        return Err(Error::InvalidParams(format!(
            "operand wider than {degree} bits"
        )));
    }
    Ok(f.mul(a, b))
}
