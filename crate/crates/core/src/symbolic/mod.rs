//! Exact emptiness certificates: determinantal ideals of an exact pencil,
//! Gröbner bases over `Q(i)`, and the projective zero-dimensionality test.

pub mod gaussian;
pub mod groebner;
pub mod poly;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::numeric::{Engine, VarietyVerdict, VerdictStatus};
use crate::pencil::ExactMatrixPencil;
use gaussian::GaussianRational;
use groebner::{buchberger, projective_empty};
use poly::MultivariatePoly;

/// Sizes above this are rejected before any expansion.
const MAX_DIMENSION: usize = 64;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn mask(idx: &[usize]) -> u64 {
    idx.iter().fold(0, |m, &i| m | (1 << i))
}

struct Expander {
    entries: Vec<Vec<MultivariatePoly>>,
    memo: HashMap<(u64, u64), MultivariatePoly>,
}

impl Expander {
    fn new(p: &ExactMatrixPencil) -> Self {
        let entries = (0..p.block_rows())
            .map(|i| {
                (0..p.cols())
                    .map(|j| MultivariatePoly::linear_form(&p.entry_coefficients(i, j)))
                    .collect()
            })
            .collect();
        Self {
            entries,
            memo: HashMap::new(),
        }
    }

    /// Laplace expansion along the first selected row, memoized on the
    /// (row set, column set) pair.
    fn det(&mut self, rows: &[usize], cols: &[usize]) -> MultivariatePoly {
        if rows.len() == 1 {
            return self.entries[rows[0]][cols[0]].clone();
        }
        let key = (mask(rows), mask(cols));
        if let Some(d) = self.memo.get(&key) {
            return d.clone();
        }
        let nvars = self.entries[0][0].nvars();
        let mut acc = MultivariatePoly::zero(nvars);
        let mut sub_cols = Vec::with_capacity(cols.len() - 1);
        for (j, &c) in cols.iter().enumerate() {
            let a = self.entries[rows[0]][c].clone();
            if a.is_zero() {
                continue;
            }
            sub_cols.clear();
            sub_cols.extend(cols.iter().copied().filter(|&x| x != c));
            let sub = self.det(&rows[1..], &sub_cols);
            let term = a.mul(&sub);
            acc = if j % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        self.memo.insert(key, acc.clone());
        acc
    }
}

/// All `order x order` minors of `M(r)`, zeros included, ordered by row
/// subset then column subset (both lexicographic).
pub fn minors(p: &ExactMatrixPencil, order: usize) -> Result<Vec<MultivariatePoly>> {
    let max = p.level_bound();
    if order == 0 || order > max {
        return Err(Error::OrderTooLarge { order, max });
    }
    if p.block_rows() > MAX_DIMENSION || p.cols() > MAX_DIMENSION {
        return Err(Error::EngineOverflow(format!(
            "pencil blocks larger than {MAX_DIMENSION} in one dimension"
        )));
    }
    let row_sets = subsets(p.block_rows(), order);
    let col_sets = subsets(p.cols(), order);
    let mut ex = Expander::new(p);
    let mut out = Vec::with_capacity(row_sets.len() * col_sets.len());
    for rs in &row_sets {
        for cs in &col_sets {
            let d = ex.det(rs, cs);
            debug_assert!(
                d.is_homogeneous() && (d.is_zero() || d.total_degree() as usize == order)
            );
            out.push(d);
        }
    }
    Ok(out)
}

/// Decides whether `V^k` is empty over the complex numbers.
///
/// Returns `EmptyCertified` when the minor ideal has only the origin as its
/// zero set. Otherwise the variety is nonempty; the verdict is
/// `Inconclusive` with `certified_nonempty` set and no witness point.
/// Nonemptiness forced by the dimension count skips the Gröbner basis.
pub fn check_emptiness_exact(p: &ExactMatrixPencil, k: usize) -> Result<VarietyVerdict> {
    if k >= p.level_bound() {
        return Err(Error::LevelOutOfRange {
            level: k,
            bound: p.level_bound(),
        });
    }
    let polys = minors(p, k + 1)?;
    let nonempty = VarietyVerdict {
        level: k,
        status: VerdictStatus::Inconclusive,
        witness: None,
        achieved_sigma: None,
        engine: Engine::Symbolic,
        certified_nonempty: true,
    };
    if polys.iter().all(MultivariatePoly::is_zero) {
        return Ok(nonempty);
    }
    // The ideal of (k+1)-minors has height at most (rows-k)(cols-k), so when
    // that is below the number of variables the affine cone has positive
    // dimension and contains a nonzero point.
    if (p.block_rows() - k) * (p.cols() - k) < p.num_params() {
        return Ok(nonempty);
    }
    let basis = buchberger(&polys)?;
    if projective_empty(&basis)? {
        Ok(VarietyVerdict {
            status: VerdictStatus::EmptyCertified,
            certified_nonempty: false,
            ..nonempty
        })
    } else {
        Ok(nonempty)
    }
}

/// Parses a decimal or rational literal into an exact value, rejecting
/// anything that does not round-trip as a finite number.
pub fn exact_from_str(s: &str) -> Result<GaussianRational> {
    s.parse().map_err(|_| Error::InexactInput)
}
