//! Arithmetic in GF(2^m) for m in 1..=8, the substrate of the hash-based
//! key verification.
//!
//! One irreducible modulus is fixed per degree so that tag values are
//! reproducible across implementations:
//!
//! | m | modulus               |
//! |---|-----------------------|
//! | 1 | x + 1                 |
//! | 2 | x² + x + 1            |
//! | 3 | x³ + x + 1            |
//! | 4 | x⁴ + x + 1            |
//! | 5 | x⁵ + x² + 1           |
//! | 6 | x⁶ + x + 1            |
//! | 7 | x⁷ + x + 1            |
//! | 8 | x⁸ + x⁴ + x³ + x + 1  |

use crate::error::KrlabError;

/// Fixed irreducible moduli, indexed by degree (index 0 unused). Bit i is
/// the coefficient of x^i.
const MODULI: [u16; 9] = [
    0,
    0b11,
    0b111,
    0b1011,
    0b10011,
    0b100101,
    0b1000011,
    0b10000011,
    0b100011011,
];

pub const MAX_DEGREE: u8 = 8;

/// An element of GF(2^m), stored as an m-bit polynomial value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct FieldElement {
    value: u16,
    degree: u8,
}

impl FieldElement {
    pub fn new(value: u16, degree: u8) -> Result<Self, KrlabError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(KrlabError::FieldDegree(degree));
        }
        if value >> degree != 0 {
            return Err(KrlabError::FieldValue { value, degree });
        }
        Ok(FieldElement { value, degree })
    }

    pub fn zero(degree: u8) -> Result<Self, KrlabError> {
        Self::new(0, degree)
    }

    pub fn one(degree: u8) -> Result<Self, KrlabError> {
        Self::new(1, degree)
    }

    pub fn value(&self) -> u16 {
        self.value
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn check_same(&self, other: &FieldElement) -> Result<(), KrlabError> {
        if self.degree != other.degree {
            return Err(KrlabError::FieldDegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    /// Addition is coefficient-wise XOR.
    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, KrlabError> {
        self.check_same(other)?;
        Ok(FieldElement {
            value: self.value ^ other.value,
            degree: self.degree,
        })
    }

    /// Carryless product reduced by the fixed modulus of this degree.
    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, KrlabError> {
        self.check_same(other)?;
        let mut acc: u32 = 0;
        let a = self.value as u32;
        for bit in 0..16 {
            if (other.value >> bit) & 1 == 1 {
                acc ^= a << bit;
            }
        }
        Ok(FieldElement {
            value: reduce(acc, self.degree),
            degree: self.degree,
        })
    }

    pub fn pow(&self, mut exp: u64) -> FieldElement {
        let mut base = *self;
        let mut acc = FieldElement {
            value: 1,
            degree: self.degree,
        };
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).expect("same degree");
            }
            base = base.mul(&base).expect("same degree");
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^(2^m − 2); zero has none.
    pub fn inverse(&self) -> Result<FieldElement, KrlabError> {
        if self.is_zero() {
            return Err(KrlabError::FieldZeroInverse);
        }
        Ok(self.pow((1u64 << self.degree) - 2))
    }

    /// All 2^m elements of the field, in value order.
    pub fn all(degree: u8) -> Result<Vec<FieldElement>, KrlabError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(KrlabError::FieldDegree(degree));
        }
        Ok((0..(1u16 << degree))
            .map(|value| FieldElement { value, degree })
            .collect())
    }
}

fn reduce(mut acc: u32, degree: u8) -> u16 {
    let modulus = MODULI[degree as usize] as u32;
    let mut bit = 31 - acc.leading_zeros().min(31);
    while acc >> degree != 0 {
        if (acc >> bit) & 1 == 1 {
            acc ^= modulus << (bit - degree as u32);
        }
        bit -= 1;
    }
    acc as u16
}
