//! Bit-packed linear algebra over GF(2).
//!
//! Vectors are rows of 64-bit words; matrices are lists of equal-length
//! rows. Everything here is exact: ranks and span intersections decide the
//! mutual-information questions of the analyzer, so there is no tolerance
//! anywhere, only equality.

use std::fmt;

use crate::error::KrlabError;

/// A fixed-length vector over GF(2). The length is set at creation and
/// never changes; XOR is the only mutation and it preserves length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            words: vec![0u64; len.div_ceil(64)],
            len,
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Parse a vector from a string of '0'/'1' characters, e.g. "110".
    pub fn from_str01(s: &str) -> Self {
        let bits: Vec<bool> = s.chars().map(|c| c == '1').collect();
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(
            index < self.len,
            "bit index {index} out of range {}",
            self.len
        );
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn set(&mut self, index: usize, value: bool) {
        assert!(
            index < self.len,
            "bit index {index} out of range {}",
            self.len
        );
        let (w, b) = (index / 64, index % 64);
        if value {
            self.words[w] |= 1u64 << b;
        } else {
            self.words[w] &= !(1u64 << b);
        }
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit, if any.
    pub fn leading_index(&self) -> Option<usize> {
        for (w, &word) in self.words.iter().enumerate() {
            if word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Parity of the AND with an assignment vector, i.e. the value of this
    /// linear form on that assignment.
    pub fn dot(&self, assignment: &BitVector) -> bool {
        assert_eq!(self.len, assignment.len, "length mismatch in dot");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&assignment.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// A matrix over GF(2), stored as rows of equal length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    cols: usize,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        BitMatrix {
            rows: Vec::new(),
            cols,
        }
    }

    pub fn from_rows(rows: Vec<BitVector>, cols: usize) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length mismatch");
        }
        BitMatrix { rows, cols }
    }

    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        BitMatrix {
            rows: rows.iter().map(|r| BitVector::from_str01(r)).collect(),
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
            cols: n,
        }
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    /// Both matrices stacked, rows of `self` first.
    pub fn stacked(&self, other: &BitMatrix) -> Result<BitMatrix, KrlabError> {
        if self.cols != other.cols {
            return Err(KrlabError::DimensionMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix {
            rows,
            cols: self.cols,
        })
    }

    /// Dimension of the row space. Gaussian elimination with pivots taken
    /// at the lowest free column index first, so repeated calls produce the
    /// same echelon basis and the same witnesses.
    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols);
        for r in &self.rows {
            basis.insert(r.clone());
        }
        basis.dim()
    }
}

/// dim(rowspace(a) ∩ rowspace(b)), which for jointly linear functions of
/// independent uniform bits equals the mutual information in bits between
/// the two tuples: rank(A) + rank(B) − rank(A stacked on B).
pub fn intersection_dim(a: &BitMatrix, b: &BitMatrix) -> Result<usize, KrlabError> {
    let joint = a.stacked(b)?;
    Ok(a.rank() + b.rank() - joint.rank())
}

/// A basis for the intersection of the two row spaces. Empty when the
/// spaces meet only in zero.
pub fn intersection_basis(a: &BitMatrix, b: &BitMatrix) -> Result<Vec<BitVector>, KrlabError> {
    if a.col_count() != b.col_count() {
        return Err(KrlabError::DimensionMismatch {
            left: a.col_count(),
            right: b.col_count(),
        });
    }
    // Track each stacked row's combination restricted to the rows of `a`.
    // A zero reduction whose combination touches `a` yields an element
    // x·A = y·B of the intersection.
    let cols = a.col_count();
    let na = a.row_count();
    let mut echelon: Vec<(BitVector, BitVector)> = Vec::new(); // (vector, combo over a-rows)
    let mut found = EchelonBasis::new(cols);
    let mut out = Vec::new();
    for (i, row) in a.rows().iter().chain(b.rows().iter()).enumerate() {
        let mut v = row.clone();
        let mut combo = BitVector::zeros(na);
        if i < na {
            combo.set(i, true);
        }
        loop {
            match v.leading_index() {
                None => {
                    // Reduced to zero: combo picks out rows of `a` summing
                    // to an element that is also a combination of b-rows.
                    let mut elem = BitVector::zeros(cols);
                    for j in combo.ones() {
                        elem.xor_assign(&a.rows()[j]);
                    }
                    if !elem.is_zero() && found.insert(elem.clone()) {
                        out.push(elem);
                    }
                    break;
                }
                Some(lead) => {
                    if let Some((bv, bc)) = echelon
                        .iter()
                        .find(|(bv, _)| bv.leading_index() == Some(lead))
                    {
                        let (bv, bc) = (bv.clone(), bc.clone());
                        v.xor_assign(&bv);
                        combo.xor_assign(&bc);
                    } else {
                        echelon.push((v, combo));
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Incremental echelon basis with deterministic pivot order (lowest set
/// bit of each inserted vector).
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<BitVector>,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        EchelonBasis {
            cols,
            rows: Vec::new(),
        }
    }

    /// Reduce `v` against the basis; insert the residue if nonzero.
    /// Returns true if the basis grew.
    pub fn insert(&mut self, mut v: BitVector) -> bool {
        assert_eq!(v.len(), self.cols);
        loop {
            let Some(lead) = v.leading_index() else {
                return false;
            };
            match self.rows.iter().find(|b| b.leading_index() == Some(lead)) {
                Some(b) => {
                    let b = b.clone();
                    v.xor_assign(&b);
                }
                None => {
                    self.rows.push(v);
                    self.rows.sort_by_key(|r| r.leading_index());
                    return true;
                }
            }
        }
    }

    /// True iff `v` lies in the span of the inserted vectors.
    pub fn contains(&self, v: &BitVector) -> bool {
        let mut v = v.clone();
        loop {
            let Some(lead) = v.leading_index() else {
                return true;
            };
            match self.rows.iter().find(|b| b.leading_index() == Some(lead)) {
                Some(b) => {
                    let b = b.clone();
                    v.xor_assign(&b);
                }
                None => return false,
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis_rows(&self) -> &[BitVector] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn rank_zero_matrix() {
        let m = BitMatrix::from_strs(&["000", "000", "000"]);
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn rank_identity() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
    }

    #[test]
    fn rank_dependent_rows() {
        // Span of {110, 011, 101} has 4 elements, so dimension 2;
        // frozen against the enumeration oracle below.
        let m = BitMatrix::from_strs(&["110", "011", "101"]);
        assert_eq!(span_size(&m), 4);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_empty_matrix() {
        assert_eq!(BitMatrix::new(5).rank(), 0);
        assert_eq!(BitMatrix::new(0).rank(), 0);
    }

    #[test]
    fn intersection_identical_spaces() {
        let a = BitMatrix::from_strs(&["10"]);
        assert_eq!(intersection_dim(&a, &a).unwrap(), 1);
    }

    #[test]
    fn intersection_disjoint_coordinates() {
        let a = BitMatrix::from_strs(&["10"]);
        let b = BitMatrix::from_strs(&["01"]);
        assert_eq!(intersection_dim(&a, &b).unwrap(), 0);
    }

    #[test]
    fn intersection_oblique_line() {
        // X = r1 and Y = r1 ^ r2 are independent uniform bits, and the
        // span intersection agrees: {10} ∩ {11} = {00}.
        let a = BitMatrix::from_strs(&["10"]);
        let b = BitMatrix::from_strs(&["11"]);
        assert_eq!(intersection_dim(&a, &b).unwrap(), 0);
    }

    #[test]
    fn intersection_dimension_mismatch() {
        let a = BitMatrix::from_strs(&["10"]);
        let b = BitMatrix::from_strs(&["100"]);
        assert!(intersection_dim(&a, &b).is_err());
    }

    #[test]
    fn intersection_basis_witness() {
        let a = BitMatrix::from_strs(&["110", "001"]);
        let b = BitMatrix::from_strs(&["111"]);
        let w = intersection_basis(&a, &b).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(format!("{:?}", w[0]), "111");
    }

    /// Enumerate the full row span; exponential, test-only oracle.
    fn span_size(m: &BitMatrix) -> usize {
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let n = m.row_count();
        for mask in 0..(1u32 << n) {
            let mut v = BitVector::zeros(m.col_count());
            for (i, row) in m.rows().iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    v.xor_assign(row);
                }
            }
            seen.insert((0..v.len()).map(|i| v.get(i) as u8).collect());
        }
        seen.len()
    }

    fn span_elements(m: &BitMatrix) -> HashSet<Vec<u8>> {
        let mut seen = HashSet::new();
        let n = m.row_count();
        for mask in 0..(1u32 << n) {
            let mut v = BitVector::zeros(m.col_count());
            for (i, row) in m.rows().iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    v.xor_assign(row);
                }
            }
            seen.insert((0..v.len()).map(|i| v.get(i) as u8).collect());
        }
        seen
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
        (1..=max_cols, 0..=max_rows).prop_flat_map(|(cols, rows)| arb_matrix_with(rows, cols))
    }

    fn arb_matrix_with(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), cols), rows).prop_map(
            move |rws| {
                BitMatrix::from_rows(rws.iter().map(|r| BitVector::from_bits(r)).collect(), cols)
            },
        )
    }

    /// Two matrices over the same column space.
    fn arb_matrix_pair(
        max_rows: usize,
        max_cols: usize,
    ) -> impl Strategy<Value = (BitMatrix, BitMatrix)> {
        (1..=max_cols, 0..=max_rows, 0..=max_rows)
            .prop_flat_map(|(cols, ra, rb)| (arb_matrix_with(ra, cols), arb_matrix_with(rb, cols)))
    }

    proptest! {
        #[test]
        fn xor_self_is_zero(bits in proptest::collection::vec(any::<bool>(), 0..150)) {
            let v = BitVector::from_bits(&bits);
            let mut w = v.clone();
            w.xor_assign(&v);
            prop_assert!(w.is_zero());
            prop_assert_eq!(w.len(), v.len());
        }

        /// rank is invariant under row XOR updates.
        #[test]
        fn rank_invariant_under_row_xor(m in arb_matrix(6, 10), ops in proptest::collection::vec((0usize..6, 0usize..6), 0..12)) {
            let r0 = m.rank();
            let mut rows = m.rows().to_vec();
            for (i, j) in ops {
                if i != j && i < rows.len() && j < rows.len() {
                    let src = rows[j].clone();
                    rows[i].xor_assign(&src);
                }
            }
            let m2 = BitMatrix::from_rows(rows, m.col_count());
            prop_assert_eq!(m2.rank(), r0);
        }

        /// rank by elimination equals log2 of the enumerated span size.
        #[test]
        fn rank_matches_enumeration(m in arb_matrix(6, 8)) {
            let sz = span_size(&m);
            prop_assert_eq!(1usize << m.rank(), sz);
        }

        /// intersection via the rank formula equals exhaustive enumeration
        /// of both row spaces, up to 12 columns.
        #[test]
        fn intersection_matches_enumeration((a, b) in arb_matrix_pair(5, 12)) {
            let lhs = intersection_dim(&a, &b).unwrap();
            let inter = span_elements(&a).intersection(&span_elements(&b)).count();
            prop_assert_eq!(1usize << lhs, inter);
        }

        /// The witness basis spans exactly the intersection.
        #[test]
        fn intersection_basis_consistent((a, b) in arb_matrix_pair(4, 9)) {
            let dim = intersection_dim(&a, &b).unwrap();
            let w = intersection_basis(&a, &b).unwrap();
            let wm = BitMatrix::from_rows(w, a.col_count());
            prop_assert_eq!(wm.rank(), dim);
            prop_assert_eq!(wm.row_count(), dim);
            for row in wm.rows() {
                prop_assert!(span_elements(&a).contains(&(0..row.len()).map(|i| row.get(i) as u8).collect::<Vec<_>>()));
                prop_assert!(span_elements(&b).contains(&(0..row.len()).map(|i| row.get(i) as u8).collect::<Vec<_>>()));
            }
        }
    }
}
