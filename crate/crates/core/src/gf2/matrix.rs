use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Dense GF(2) matrix with each row packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        Gf2Matrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Row-major fill: bit `r * cols + c` of `bits` becomes entry `(r, c)`.
    pub fn from_row_major(rows: usize, cols: usize, bits: &BitVector) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: bits.len(),
            });
        }
        let mut m = Gf2Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut c = 0;
            while c < cols {
                let width = (cols - c).min(64);
                let w = bits.word_at(r * cols + c, width);
                m.data[r * m.stride + c / 64] = w;
                c += width;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[BitVector]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Gf2Matrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            m.data[i * m.stride..(i + 1) * m.stride].copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Convenience for tests and examples: rows of 0/1 integers.
    pub fn from_bits(rows: &[&[u8]]) -> Result<Self> {
        let vs: Vec<BitVector> = rows
            .iter()
            .map(|r| r.iter().map(|&b| b != 0).collect())
            .collect();
        Gf2Matrix::from_rows(&vs)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        if bit {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.row_words(r).to_vec(), self.cols)
    }

    pub fn column(&self, c: usize) -> BitVector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    m.set(r, k, true);
                }
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(rows.len(), self.cols);
        for (k, &r) in rows.iter().enumerate() {
            m.data[k * m.stride..(k + 1) * m.stride].copy_from_slice(self.row_words(r));
        }
        m
    }

    /// Row rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut work = self.data.clone();
        eliminate(&mut work, self.rows, self.stride, self.cols, None).len()
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for (a, b) in self.row_words(r).iter().zip(v.words()) {
                acc ^= a & b;
            }
            if acc.count_ones() & 1 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }
}

impl std::fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        if self.rows * self.cols <= 4096 {
            for r in 0..self.rows {
                writeln!(f, "  {}", self.row(r))?;
            }
        }
        Ok(())
    }
}

/// In-place reduced row echelon form over packed rows.
///
/// `rhs` (one bit per row) is carried along when given. Returns the pivot
/// column of each pivot row; pivot rows end up in positions `0..rank`.
pub(crate) fn eliminate(
    data: &mut [u64],
    rows: usize,
    stride: usize,
    cols: usize,
    mut rhs: Option<&mut [bool]>,
) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        if next == rows {
            break;
        }
        let (w, bit) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (next..rows).find(|&r| data[r * stride + w] & bit != 0) else {
            continue;
        };
        if p != next {
            for k in 0..stride {
                data.swap(p * stride + k, next * stride + k);
            }
            if let Some(rhs) = rhs.as_deref_mut() {
                rhs.swap(p, next);
            }
        }
        for r in 0..rows {
            if r != next && data[r * stride + w] & bit != 0 {
                for k in w..stride {
                    let x = data[next * stride + k];
                    data[r * stride + k] ^= x;
                }
                if let Some(rhs) = rhs.as_deref_mut() {
                    rhs[r] ^= rhs[next];
                }
            }
        }
        pivots.push(c);
        next += 1;
    }
    pivots
}
