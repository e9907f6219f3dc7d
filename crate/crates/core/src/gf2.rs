//! Dense bit vectors and bit matrices over GF(2).
//!
//! Bit 0 is the leftmost bit when printed. Vectors are packed into `u64`
//! words; bits past `len` in the last word are always kept clear so that
//! derived equality, hashing and ordering only see the logical contents.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use thiserror::Error;

/// Largest vector length `column_span` will enumerate.
pub const SPAN_LENGTH_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("span enumeration over length-{len} vectors exceeds the limit of {limit}")]
    SpanTooLarge { len: usize, limit: usize },
    #[error("invalid bit character {0:?}; expected '0' or '1'")]
    InvalidBitChar(char),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.clear_tail();
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector of length `len` with exactly the given positions set.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut v = BitVector::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    /// Low `len` bits of `value`, bit 0 of the vector being the least
    /// significant bit of `value`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits, got {len}");
        let mut v = BitVector::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_tail();
        }
        v
    }

    /// Inverse of [`BitVector::from_u64`]. Panics when `len > 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(
            self.len <= 64,
            "to_u64 supports at most 64 bits, got {}",
            self.len
        );
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Positions of set bits in increasing order.
    pub fn iter_ones(&self) -> IterOnes<'_> {
        IterOnes {
            words: &self.words,
            word_index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len, "and of vectors with different lengths");
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    /// Bitwise complement.
    pub fn not(&self) -> BitVector {
        let mut out = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Number of bits set in `self` but not in `other`.
    pub fn count_and_not(&self, other: &BitVector) -> usize {
        assert_eq!(
            self.len, other.len,
            "and-not of vectors with different lengths"
        );
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// True when every bit set in `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        self.count_and_not(other) == 0
    }

    /// Copies out the bits in `range` as a new vector.
    pub fn slice(&self, range: Range<usize>) -> BitVector {
        assert!(
            range.start <= range.end && range.end <= self.len,
            "slice {range:?} out of range for length {}",
            self.len
        );
        let mut out = BitVector::zeros(range.end - range.start);
        for i in self.iter_ones().skip_while(|&i| i < range.start) {
            if i >= range.end {
                break;
            }
            out.set(i - range.start, true);
        }
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Gf2Error;

    /// Parses `"1000111"`-style strings, bit 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Gf2Error::InvalidBitChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitVector::from_bits(&bits))
    }
}

pub struct IterOnes<'a> {
    words: &'a [u64],
    word_index: usize,
    current: u64,
}

impl Iterator for IterOnes<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.word_index * 64 + bit);
            }
            self.word_index += 1;
            self.current = *self.words.get(self.word_index)?;
        }
    }
}

/// Row-major dense matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        let cols = rows.first().map_or(0, BitVector::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Gf2Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(BitMatrix { cols, rows })
    }

    /// Builds a `rows x columns.len()` matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[BitVector]) -> Result<Self, Gf2Error> {
        let mut m = BitMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Gf2Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for i in col.iter_ones() {
                m.set(i, j, true);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].get(col)
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.rows[row].set(col, value);
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn column(&self, j: usize) -> BitVector {
        assert!(
            j < self.cols,
            "column {j} out of range for {} columns",
            self.cols
        );
        BitVector::from_bits(&self.rows.iter().map(|r| r.get(j)).collect::<Vec<_>>())
    }

    pub fn columns(&self) -> Vec<BitVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// `result[i] = XOR_j (m[i][j] AND v[j])`.
    pub fn mat_vec_mul(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if v.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(BitVector::from_bits(
            &self.rows.iter().map(|r| r.dot(v)).collect::<Vec<_>>(),
        ))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// All XOR combinations of `columns`, each of length `len`.
///
/// Reduces the columns to a basis first, so the work is `2^rank` rather than
/// `2^columns.len()`.
pub fn column_span(len: usize, columns: &[BitVector]) -> Result<BTreeSet<BitVector>, Gf2Error> {
    if len > SPAN_LENGTH_LIMIT {
        return Err(Gf2Error::SpanTooLarge {
            len,
            limit: SPAN_LENGTH_LIMIT,
        });
    }
    let mut basis: Vec<u64> = Vec::new();
    for col in columns {
        if col.len() != len {
            return Err(Gf2Error::DimensionMismatch {
                expected: len,
                found: col.len(),
            });
        }
        let mut x = col.to_u64();
        for &b in &basis {
            // Each basis vector has a distinct leading bit.
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
        }
    }

    let mut span = BTreeSet::new();
    let mut acc = 0u64;
    span.insert(BitVector::from_u64(len, acc));
    // Gray-code walk: step i toggles basis vector trailing_zeros(i).
    for step in 1u64..(1u64 << basis.len()) {
        acc ^= basis[step.trailing_zeros() as usize];
        span.insert(BitVector::from_u64(len, acc));
    }
    Ok(span)
}

/// Finds a smallest subset of `columns` (at most `max_subset` of them) whose
/// XOR equals `target`. Among subsets of equal size the lexicographically
/// smallest index set wins. A zero target is met by the empty subset.
pub fn solve_column_combination(
    columns: &[BitVector],
    target: &BitVector,
    max_subset: usize,
) -> Result<Option<Vec<usize>>, Gf2Error> {
    if let Some(bad) = columns.iter().find(|c| c.len() != target.len()) {
        return Err(Gf2Error::DimensionMismatch {
            expected: target.len(),
            found: bad.len(),
        });
    }
    if target.is_zero() {
        return Ok(Some(Vec::new()));
    }
    for size in 1..=max_subset.min(columns.len()) {
        for subset in Combinations::new(columns.len(), size) {
            let mut acc = BitVector::zeros(target.len());
            for &i in &subset {
                acc.xor_assign(&columns[i]);
            }
            if &acc == target {
                return Ok(Some(subset));
            }
        }
    }
    Ok(None)
}

/// `size`-element subsets of `0..n` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    indices: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, size: usize) -> Self {
        Combinations {
            n,
            indices: (0..size).collect(),
            done: size > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.indices.clone();
        let size = self.indices.len();
        // Rightmost index that can still advance.
        match (0..size)
            .rev()
            .find(|&i| self.indices[i] < self.n - size + i)
        {
            Some(i) => {
                self.indices[i] += 1;
                for j in i + 1..size {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}
