//! Matrix permanents: a factorial-time oracle for testing and a Ryser
//! inclusion-exclusion kernel with Gray-code row-sum updates for production.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::patterns::{InputPattern, OutputPattern};

/// Largest n accepted by the permutation-sum oracle (9! = 362880 terms).
pub const NAIVE_LIMIT: usize = 9;

/// Largest n accepted by the Ryser kernel.
pub const RYSER_LIMIT: usize = 32;

/// Gray-code walks longer than 2^20 are split across workers.
const PARALLEL_THRESHOLD: usize = 20;

/// Permanent by direct sum over all n! permutations. Test oracle only.
pub fn perm_naive(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > NAIVE_LIMIT {
        return Err(Error::DimensionLimit {
            what: "perm_naive",
            n,
            limit: NAIVE_LIMIT,
        });
    }
    fn expand(m: &ComplexMatrix, row: usize, used: u32, acc: Complex64, total: &mut Complex64) {
        let n = m.rows();
        if row == n {
            *total += acc;
            return;
        }
        for j in 0..n {
            if used & (1 << j) == 0 {
                expand(m, row + 1, used | (1 << j), acc * m.get(row, j), total);
            }
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    expand(m, 0, 0, Complex64::new(1.0, 0.0), &mut total);
    Ok(total)
}

/// Permanent by Ryser's formula over a contiguous block of the Gray-code
/// subset walk. `lo`/`hi` index subsets as Gray codes of 1..2^n.
fn ryser_block(m: &ComplexMatrix, lo: u64, hi: u64) -> Complex64 {
    let n = m.rows();
    // Row sums for the starting subset gray(lo - 1).
    let start = (lo - 1) ^ ((lo - 1) >> 1);
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        if start & (1 << j) != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += m.get(i, j);
            }
        }
    }
    let mut subset = start;
    let mut total = Complex64::new(0.0, 0.0);
    for k in lo..hi {
        let bit = k.trailing_zeros() as usize;
        let mask = 1u64 << bit;
        subset ^= mask;
        if subset & mask != 0 {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs += m.get(i, bit);
            }
        } else {
            for (i, rs) in row_sums.iter_mut().enumerate() {
                *rs -= m.get(i, bit);
            }
        }
        let product: Complex64 = row_sums.iter().product();
        // Sign (-1)^(n - |subset|).
        if (n as u32 - subset.count_ones()) % 2 == 0 {
            total += product;
        } else {
            total -= product;
        }
    }
    total
}

/// Ryser's inclusion-exclusion permanent, O(2^n * n).
pub fn perm_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > RYSER_LIMIT {
        return Err(Error::DimensionLimit {
            what: "perm_ryser",
            n,
            limit: RYSER_LIMIT,
        });
    }
    if n > PARALLEL_THRESHOLD {
        let parts = rayon::current_num_threads() * 8;
        return Ok(perm_ryser_partitioned(m, parts));
    }
    Ok(ryser_block(m, 1, 1u64 << n))
}

/// Ryser with the subset walk split into `parts` blocks, reduced in block
/// order. Exposed so tests can pin result stability across partitionings.
pub fn perm_ryser_partitioned(m: &ComplexMatrix, parts: usize) -> Complex64 {
    let n = m.rows();
    let end = 1u64 << n;
    let parts = parts.clamp(1, (end - 1) as usize) as u64;
    let step = (end - 1) / parts + 1;
    let bounds: Vec<(u64, u64)> = (0..parts)
        .map(|p| (1 + p * step, end.min(1 + (p + 1) * step)))
        .filter(|(lo, hi)| lo < hi)
        .collect();
    bounds
        .par_iter()
        .map(|&(lo, hi)| ryser_block(m, lo, hi))
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b)
}

/// Extract the submatrix whose rows follow `row_pattern` and whose columns
/// repeat according to `col_pattern` multiplicities. Ports are 1-based.
pub fn submatrix(
    u: &ComplexMatrix,
    row_pattern: &InputPattern,
    col_pattern: &OutputPattern,
) -> Result<ComplexMatrix> {
    if row_pattern.max_port() > u.rows() {
        return Err(Error::IndexOutOfRange {
            what: "matrix row",
            index: row_pattern.max_port(),
            size: u.rows(),
        });
    }
    if col_pattern.max_port() > u.cols() {
        return Err(Error::IndexOutOfRange {
            what: "matrix column",
            index: col_pattern.max_port(),
            size: u.cols(),
        });
    }
    if row_pattern.is_empty() || col_pattern.is_empty() {
        return Err(Error::InvalidPattern("empty pattern".into()));
    }
    Ok(ComplexMatrix::from_fn(
        row_pattern.len(),
        col_pattern.len(),
        |i, j| u.get(row_pattern.ports()[i] - 1, col_pattern.ports()[j] - 1),
    ))
}
