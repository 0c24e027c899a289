//! Key-equality verification via a polynomial difference-universal hash
//! with one-time-padded tags.
//!
//! An n = m·ℓ bit key splits into ℓ blocks c_1..c_ℓ of GF(2^m), and the
//! tag at point x is Σ_{j=1..ℓ} c_j x^j. The sum starts at j = 1 (no
//! constant term), which makes the family ε-difference universal with
//! ε = ℓ/2^m: for fixed distinct keys and any offset δ, a uniformly random
//! point collides with δ with probability at most ℓ/2^m.

use serde::Serialize;

use crate::error::KrlabError;
use crate::field::FieldElement;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HashParams {
    /// Field degree; tags are m bits.
    pub m: u8,
    /// Number of message blocks.
    pub ell: usize,
}

impl HashParams {
    pub fn new(m: u8, ell: usize) -> Result<Self, KrlabError> {
        if m == 0 || m > crate::field::MAX_DEGREE {
            return Err(KrlabError::HashParams(format!(
                "field degree {m} out of range 1..=8"
            )));
        }
        if ell == 0 {
            return Err(KrlabError::HashParams("need at least one block".into()));
        }
        Ok(HashParams { m, ell })
    }

    /// Key length in bits.
    pub fn n(&self) -> usize {
        self.m as usize * self.ell
    }

    /// The differential bound ℓ/2^m.
    pub fn epsilon(&self) -> (usize, usize) {
        (self.ell, 1usize << self.m)
    }
}

/// Split a key into ℓ field elements, zero-padding on the right when the
/// key is shorter than m·ℓ bits. Bits are consumed most significant first
/// within each block.
fn blocks(params: &HashParams, key: &[bool]) -> Result<Vec<FieldElement>, KrlabError> {
    if key.len() > params.n() {
        return Err(KrlabError::HashParams(format!(
            "key of {} bits exceeds m*ell = {}",
            key.len(),
            params.n()
        )));
    }
    let m = params.m as usize;
    let mut out = Vec::with_capacity(params.ell);
    for j in 0..params.ell {
        let mut value: u16 = 0;
        for b in 0..m {
            let idx = j * m + b;
            let bit = key.get(idx).copied().unwrap_or(false);
            value = (value << 1) | bit as u16;
        }
        out.push(FieldElement::new(value, params.m)?);
    }
    Ok(out)
}

/// σ = Σ_{j=1..ℓ} c_j x^j.
pub fn poly_hash(
    params: &HashParams,
    point: FieldElement,
    key: &[bool],
) -> Result<FieldElement, KrlabError> {
    if point.degree() != params.m {
        return Err(KrlabError::HashParams(format!(
            "hash point lives in GF(2^{}), params say GF(2^{})",
            point.degree(),
            params.m
        )));
    }
    let cs = blocks(params, key)?;
    let mut acc = FieldElement::zero(params.m)?;
    let mut xj = FieldElement::one(params.m)?;
    for c in cs {
        xj = xj.mul(&point)?;
        acc = acc.add(&c.mul(&xj)?)?;
    }
    Ok(acc)
}

/// Encrypt the tag with a pre-shared one-time pad: σ ⊕ pad.
pub fn make_verification_message(
    params: &HashParams,
    key: &[bool],
    point: FieldElement,
    pad: FieldElement,
) -> Result<FieldElement, KrlabError> {
    if pad.degree() != params.m {
        return Err(KrlabError::HashParams(
            "pad length must equal the tag length".into(),
        ));
    }
    let tag = poly_hash(params, point, key)?;
    tag.add(&pad)
}

/// The receiving side: decrypt and compare against the local key's hash.
/// Accepts iff the decrypted tag matches; equal keys always accept, and
/// unequal keys accept with probability at most ℓ/2^m over the point.
pub fn verify_keys(
    params: &HashParams,
    key_a: &[bool],
    key_b: &[bool],
    point: FieldElement,
    pad: FieldElement,
) -> Result<bool, KrlabError> {
    let ciphertext = make_verification_message(params, key_a, point, pad)?;
    let sigma = ciphertext.add(&pad)?;
    Ok(sigma == poly_hash(params, point, key_b)?)
}

/// Exhaustively computed maximal differential probability as a fraction
/// (hits, points): max over nonzero key differences d and offsets δ of
/// #{x : h_x(d) = δ} / 2^m. By linearity of the hash in the key this
/// equals the maximum over distinct key pairs.
pub fn max_differential(params: &HashParams) -> Result<(usize, usize), KrlabError> {
    let n = params.n();
    assert!(n <= 16, "exhaustive differential check is desk-scale only");
    let points = FieldElement::all(params.m)?;
    let mut worst = 0usize;
    for d in 1..(1u32 << n) {
        let bits: Vec<bool> = (0..n).map(|i| (d >> (n - 1 - i)) & 1 == 1).collect();
        let mut counts = vec![0usize; 1 << params.m];
        for &x in &points {
            let h = poly_hash(params, x, &bits)?;
            counts[h.value() as usize] += 1;
        }
        worst = worst.max(*counts.iter().max().unwrap());
    }
    Ok((worst, points.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(value: u32, n: usize) -> Vec<bool> {
        (0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect()
    }

    #[test]
    fn all_zero_key_hashes_to_zero() {
        let params = HashParams::new(3, 2).unwrap();
        for x in FieldElement::all(3).unwrap() {
            assert!(poly_hash(&params, x, &bits_of(0, 6)).unwrap().is_zero());
        }
    }

    #[test]
    fn single_block_is_cx() {
        let params = HashParams::new(3, 1).unwrap();
        for x in FieldElement::all(3).unwrap() {
            for c in 0..8u16 {
                let tag = poly_hash(&params, x, &bits_of(c as u32, 3)).unwrap();
                let expect = FieldElement::new(c, 3).unwrap().mul(&x).unwrap();
                assert_eq!(tag, expect);
            }
        }
    }

    #[test]
    fn hash_linear_in_key() {
        let params = HashParams::new(4, 2).unwrap();
        for x in FieldElement::all(4).unwrap() {
            for a in [0x13u32, 0x2f, 0xff, 0x01] {
                for b in [0x8cu32, 0x55] {
                    let ha = poly_hash(&params, x, &bits_of(a, 8)).unwrap();
                    let hb = poly_hash(&params, x, &bits_of(b, 8)).unwrap();
                    let hab = poly_hash(&params, x, &bits_of(a ^ b, 8)).unwrap();
                    assert_eq!(ha.add(&hb).unwrap(), hab);
                }
            }
        }
    }

    #[test]
    fn differential_bound_m3_l2() {
        let params = HashParams::new(3, 2).unwrap();
        let (hits, points) = max_differential(&params).unwrap();
        assert_eq!(points, 8);
        assert!(
            hits <= 2,
            "max differential probability {hits}/8 exceeds 2/8"
        );
    }

    #[test]
    fn completeness_exact() {
        let params = HashParams::new(3, 2).unwrap();
        for key in 0..64u32 {
            let bits = bits_of(key, 6);
            for x in FieldElement::all(3).unwrap() {
                for pad in FieldElement::all(3).unwrap() {
                    assert!(verify_keys(&params, &bits, &bits, x, pad).unwrap());
                }
            }
        }
    }

    #[test]
    fn rejection_rate_for_fixed_unequal_pair() {
        let params = HashParams::new(3, 2).unwrap();
        let a = bits_of(0b101100, 6);
        let b = bits_of(0b011001, 6);
        let pad = FieldElement::zero(3).unwrap();
        let rejections = FieldElement::all(3)
            .unwrap()
            .into_iter()
            .filter(|&x| !verify_keys(&params, &a, &b, x, pad).unwrap())
            .count();
        assert!(rejections >= 8 - 2, "rejected only {rejections}/8");
    }

    #[test]
    fn pad_encryption_involution_and_uniformity() {
        let params = HashParams::new(3, 2).unwrap();
        let key = bits_of(0b110010, 6);
        let x = FieldElement::new(0b101, 3).unwrap();
        let tag = poly_hash(&params, x, &key).unwrap();
        // pad = 0 leaves the tag in the clear.
        let zero = FieldElement::zero(3).unwrap();
        assert_eq!(
            make_verification_message(&params, &key, x, zero).unwrap(),
            tag
        );
        // Decrypting twice with the same pad is the identity, and over all
        // pads the ciphertext hits every field value exactly once.
        let mut seen = std::collections::HashSet::new();
        for pad in FieldElement::all(3).unwrap() {
            let c = make_verification_message(&params, &key, x, pad).unwrap();
            assert_eq!(c.add(&pad).unwrap(), tag);
            seen.insert(c.value());
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn tampered_ciphertext_shifts_predictably() {
        let params = HashParams::new(3, 2).unwrap();
        let key = bits_of(0b110010, 6);
        let x = FieldElement::new(0b011, 3).unwrap();
        let pad = FieldElement::new(0b111, 3).unwrap();
        let c = make_verification_message(&params, &key, x, pad).unwrap();
        let delta = FieldElement::new(0b100, 3).unwrap();
        let tampered = c.add(&delta).unwrap();
        // Decryption shifts by exactly delta.
        let sigma = tampered.add(&pad).unwrap();
        assert_eq!(
            sigma,
            poly_hash(&params, x, &key).unwrap().add(&delta).unwrap()
        );
    }

    #[test]
    fn short_keys_zero_padded() {
        let params = HashParams::new(4, 2).unwrap();
        let x = FieldElement::new(0b0110, 4).unwrap();
        let a = poly_hash(&params, x, &bits_of(0b1011, 4)).unwrap();
        let b = poly_hash(&params, x, &bits_of(0b10110000, 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let params = HashParams::new(3, 2).unwrap();
        let x = FieldElement::new(1, 3).unwrap();
        assert!(poly_hash(&params, x, &[false; 7]).is_err());
        let wrong_point = FieldElement::new(1, 4).unwrap();
        assert!(poly_hash(&params, wrong_point, &[false; 6]).is_err());
    }
}
