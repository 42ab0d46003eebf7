use crate::error::{Error, Result};
use crate::gf2::{BitVector, Gf2Matrix};
use crate::smallbias::field::BinaryField;
use crate::smallbias::params::ceil_log2;

/// Binary image of a Vandermonde matrix over GF(2^m).
///
/// Row `j` is `(1, x_j, x_j², …, x_j^{k−1})` with each power written as `m`
/// bits, so column `e·m + i` holds bit `i` of `x_j^e`. The points are
/// `x_0 = 0` and `x_j = g^{j−1}` for the generator `g = x` of the least
/// primitive polynomial. Any `k` rows come from distinct points, hence are
/// independent over GF(2^m) and a fortiori over GF(2): the row space is a
/// code whose dual has distance greater than `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualDistanceMatrix {
    r: usize,
    k: usize,
    field: BinaryField,
}

impl DualDistanceMatrix {
    pub fn rows(&self) -> usize {
        self.r
    }

    pub fn cols(&self) -> usize {
        self.k * self.field.degree() as usize
    }

    /// Every set of this many rows is linearly independent.
    pub fn guaranteed_dual_distance(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> BinaryField {
        self.field
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Evaluation point of row `j`.
    pub fn point(&self, j: usize) -> u128 {
        assert!(j < self.r);
        if j == 0 {
            0
        } else {
            self.field.pow(self.field.mul_x(1), (j - 1) as u128)
        }
    }

    pub fn row(&self, j: usize) -> BitVector {
        let m = self.field.degree() as usize;
        let x = self.point(j);
        let mut out = BitVector::zeros(self.cols());
        let mut p = 1u128;
        for e in 0..self.k {
            for i in 0..m {
                if (p >> i) & 1 == 1 {
                    out.set(e * m + i, true);
                }
            }
            p = self.field.mul(p, x);
        }
        out
    }

    /// Materialized `r × h` matrix. Meant for small instances and as an oracle.
    pub fn to_matrix(&self) -> Gf2Matrix {
        let rows: Vec<BitVector> = (0..self.r).map(|j| self.row(j)).collect();
        Gf2Matrix::from_rows(&rows).expect("rows share a length")
    }
}

/// Builds the `r × k⌈log₂ r⌉` code matrix described on [`DualDistanceMatrix`].
pub fn build_dual_distance_matrix(r: usize, k: usize) -> Result<DualDistanceMatrix> {
    if r < 2 || k == 0 || k > r {
        return Err(Error::InvalidParams(format!(
            "need r ≥ 2 and 1 ≤ k ≤ r, got r = {r}, k = {k}"
        )));
    }
    let m = ceil_log2(r as u128);
    let field = BinaryField::least_primitive(m)?;
    Ok(DualDistanceMatrix { r, k, field })
}
