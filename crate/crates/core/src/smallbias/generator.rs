use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::smallbias::code::{build_dual_distance_matrix, DualDistanceMatrix};
use crate::smallbias::field::BinaryField;
use crate::smallbias::params::GeneratorParams;

/// A generator seed: `t` bits, read MSB-first as `x ∘ y` with `x, y` in
/// GF(2^{t/2}).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    bits: BitVector,
}

impl Seed {
    pub fn new(bits: BitVector) -> Result<Self> {
        if !bits.len().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "seed length {} is odd",
                bits.len()
            )));
        }
        Ok(Seed { bits })
    }

    /// The `index`-th seed of length `t` in lexicographic order.
    pub fn from_index(t: usize, index: u128) -> Self {
        assert!(
            t.is_multiple_of(2) && (t >= 128 || index >> t == 0),
            "index does not fit in {t} bits"
        );
        Seed {
            bits: BitVector::from_uint(index, t),
        }
    }

    pub fn random<R: Rng + ?Sized>(t: usize, rng: &mut R) -> Self {
        assert!(t.is_multiple_of(2));
        let mut bits = BitVector::zeros(0);
        let mut left = t;
        while left > 0 {
            let w = left.min(64);
            bits.push_bits(rng.gen::<u64>(), w);
            left -= w;
        }
        Seed { bits }
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `(x, y)` as polynomial-basis field elements.
    pub fn halves(&self) -> (u128, u128) {
        let half = self.bits.len() / 2;
        let x = self
            .bits
            .slice(0..half)
            .to_uint()
            .expect("seed half fits in 127 bits");
        let y = self
            .bits
            .slice(half..self.bits.len())
            .to_uint()
            .expect("seed half fits in 127 bits");
        (x, y)
    }
}

// Below this many output-bit × order products the generator just keeps every
// power x_j^e in a table; above it the word-parallel path wins.
const DIRECT_LIMIT: usize = 8192;

#[derive(Clone, Debug)]
enum Engine {
    Direct {
        powers: Vec<u32>,
    },
    Words {
        /// `v_e(W) = c_e^{64W}` for each stream word `W`, row-major `[W][e]`.
        states: Vec<u32>,
        /// Bit `i` of `q[(e·m + u)·m + b]` is bit `u` of `x^b · c_e^i`.
        q: Vec<u64>,
        stream_words: usize,
    },
}

/// The powering-construction generator `g(x, y) = A · (⟨x^i, y⟩)_{i<h}`.
///
/// `A` is the [`DualDistanceMatrix`]. Output bit `j` equals
/// `⊕_e ⟨x_j^e, β_e⟩` where `β_e` gathers inner products `e·m .. e·m + m`.
/// Since `x_j = g^{j−1}`, consecutive outputs follow the linear recurrences
/// `c_e^ℓ` with `c_e = g^e`; the expensive, seed-independent part of that
/// recurrence is precomputed here, so expanding a seed costs `h` field
/// multiplications plus a few table lookups per 64 output bits.
#[derive(Clone, Debug)]
pub struct SmallBiasGenerator {
    params: GeneratorParams,
    code: DualDistanceMatrix,
    seed_field: BinaryField,
    engine: Engine,
}

impl SmallBiasGenerator {
    pub fn new(params: GeneratorParams) -> Result<Self> {
        let code = build_dual_distance_matrix(params.r, params.k)?;
        SmallBiasGenerator::with_code(params, code)
    }

    pub fn with_code(params: GeneratorParams, code: DualDistanceMatrix) -> Result<Self> {
        if code.rows() != params.r || code.cols() != params.h {
            return Err(Error::DimensionMismatch {
                expected: params.r * params.h,
                got: code.rows() * code.cols(),
            });
        }
        let seed_field = BinaryField::least_irreducible((params.t / 2) as u32)?;
        let ef = code.field();
        let (r, k, m) = (params.r, params.k, ef.degree() as usize);
        let g = ef.mul_x(1);
        let c: Vec<u128> = (0..k).map(|e| ef.pow(g, e as u128)).collect();

        let engine = if r.saturating_mul(k) <= DIRECT_LIMIT {
            let mut powers = vec![0u32; r * k];
            for j in 0..r {
                let x = code.point(j);
                let mut p = 1u128;
                for e in 0..k {
                    powers[j * k + e] = p as u32;
                    p = ef.mul(p, x);
                }
            }
            Engine::Direct { powers }
        } else {
            let mut q = vec![0u64; k * m * m];
            for (e, &ce) in c.iter().enumerate() {
                let mut z = 1u128;
                for i in 0..64 {
                    let mut mb = z;
                    for b in 0..m {
                        let mut bits = mb;
                        while bits != 0 {
                            let u = bits.trailing_zeros() as usize;
                            q[(e * m + u) * m + b] |= 1 << i;
                            bits &= bits - 1;
                        }
                        mb = ef.mul_x(mb);
                    }
                    z = ef.mul(z, ce);
                }
            }
            let stream_words = (r - 1).div_ceil(64);
            let steps: Vec<u128> = c.iter().map(|&ce| ef.pow(ce, 64)).collect();
            let mut states = vec![0u32; stream_words * k];
            let mut v = vec![1u128; k];
            for w in 0..stream_words {
                for e in 0..k {
                    states[w * k + e] = v[e] as u32;
                    v[e] = ef.mul(v[e], steps[e]);
                }
            }
            Engine::Words {
                states,
                q,
                stream_words,
            }
        };
        Ok(SmallBiasGenerator {
            params,
            code,
            seed_field,
            engine,
        })
    }

    pub fn params(&self) -> &GeneratorParams {
        &self.params
    }

    pub fn code(&self) -> &DualDistanceMatrix {
        &self.code
    }

    /// The `h` inner products `b_i = ⟨x^i, y⟩`.
    pub fn inner_products(&self, seed: &Seed) -> Result<BitVector> {
        if seed.len() != self.params.t {
            return Err(Error::DimensionMismatch {
                expected: self.params.t,
                got: seed.len(),
            });
        }
        let (x, y) = seed.halves();
        let mut b = BitVector::zeros(self.params.h);
        let mut p = 1u128;
        for i in 0..self.params.h {
            if (p & y).count_ones() & 1 == 1 {
                b.set(i, true);
            }
            p = self.seed_field.mul(p, x);
        }
        Ok(b)
    }

    /// Starts a lazy expansion of `seed`.
    pub fn expander(&self, seed: &Seed) -> Result<Expander<'_>> {
        let b = self.inner_products(seed)?;
        let (r, k, m) = (self.params.r, self.params.k, self.params.m as usize);
        let beta: Vec<u32> = (0..k).map(|e| b.word_at(e * m, m) as u32).collect();
        match &self.engine {
            Engine::Direct { powers } => {
                let mut out = BitVector::zeros(r);
                for j in 0..r {
                    let mut acc = 0u32;
                    for e in 0..k {
                        acc ^= powers[j * k + e] & beta[e];
                    }
                    if acc.count_ones() & 1 == 1 {
                        out.set(j, true);
                    }
                }
                Ok(Expander {
                    gen: self,
                    tables: Vec::new(),
                    out,
                    next_word: 0,
                    carry: 0,
                })
            }
            Engine::Words { q, .. } => {
                let nbytes = m.div_ceil(8);
                let mut tables = vec![0u64; k * nbytes * 256];
                let mut col = vec![0u64; m];
                for e in 0..k {
                    col.iter_mut().for_each(|c| *c = 0);
                    let mut bits = beta[e];
                    while bits != 0 {
                        let u = bits.trailing_zeros() as usize;
                        let base = (e * m + u) * m;
                        for (bi, cv) in col.iter_mut().enumerate() {
                            *cv ^= q[base + bi];
                        }
                        bits &= bits - 1;
                    }
                    for z in 0..nbytes {
                        let t = &mut tables[(e * nbytes + z) * 256..(e * nbytes + z + 1) * 256];
                        for val in 1usize..256 {
                            let low = val.trailing_zeros() as usize;
                            let bit = 8 * z + low;
                            let add = if bit < m { col[bit] } else { 0 };
                            t[val] = t[val & (val - 1)] ^ add;
                        }
                    }
                }
                let carry = b.get(0) as u64;
                Ok(Expander {
                    gen: self,
                    tables,
                    out: BitVector::zeros(0),
                    next_word: 0,
                    carry,
                })
            }
        }
    }

    /// First `len` output bits for `seed`.
    pub fn expand(&self, seed: &Seed, len: usize) -> Result<BitVector> {
        let mut ex = self.expander(seed)?;
        ex.bits(0, len)
    }
}

/// Output of one seed, produced on demand in 64-bit words.
pub struct Expander<'g> {
    gen: &'g SmallBiasGenerator,
    tables: Vec<u64>,
    out: BitVector,
    next_word: usize,
    // High bit of the previous stream word (or b_0 before the first one);
    // output bit j is stream bit j − 1.
    carry: u64,
}

impl Expander<'_> {
    pub fn len(&self) -> usize {
        self.gen.params.r
    }

    pub fn is_empty(&self) -> bool {
        self.gen.params.r == 0
    }

    /// Makes sure the first `len` output bits (capped at `r`) exist.
    pub fn ensure(&mut self, len: usize) {
        let r = self.gen.params.r;
        let target = len.min(r);
        let Engine::Words {
            states,
            stream_words,
            ..
        } = &self.gen.engine
        else {
            return;
        };
        let (k, m) = (self.gen.params.k, self.gen.params.m as usize);
        let nbytes = m.div_ceil(8);
        while self.out.len() < target {
            let w = self.next_word;
            let stream = if w < *stream_words {
                let mut acc = 0u64;
                let row = &states[w * k..(w + 1) * k];
                for (e, &v) in row.iter().enumerate() {
                    let base = e * nbytes * 256;
                    let mut v = v as usize;
                    for z in 0..nbytes {
                        acc ^= self.tables[base + z * 256 + (v & 0xff)];
                        v >>= 8;
                    }
                }
                acc
            } else {
                0
            };
            let word = (stream << 1) | self.carry;
            self.carry = stream >> 63;
            let width = (r - self.out.len()).min(64);
            self.out.push_bits(word, width);
            self.next_word += 1;
        }
    }

    /// Output bits `start .. start + len`.
    pub fn bits(&mut self, start: usize, len: usize) -> Result<BitVector> {
        let end = start
            .checked_add(len)
            .filter(|&e| e <= self.gen.params.r)
            .ok_or(Error::DimensionMismatch {
                expected: self.gen.params.r,
                got: start.saturating_add(len),
            })?;
        self.ensure(end);
        Ok(self.out.slice(start..end))
    }

    /// Reads up to 64 output bits starting at `start`, bit `start` in bit 0.
    pub fn word(&mut self, start: usize, width: usize) -> u64 {
        self.ensure(start + width);
        self.out.word_at(start, width)
    }
}

/// `A · b` for the given seed: the full `r`-bit output.
pub fn expand_seed(
    params: &GeneratorParams,
    code: &DualDistanceMatrix,
    seed: &Seed,
) -> Result<BitVector> {
    let gen = SmallBiasGenerator::with_code(*params, code.clone())?;
    gen.expand(seed, params.r)
}
