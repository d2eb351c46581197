//! Buchberger's algorithm with the normal selection strategy and the
//! coprime / chain criteria, producing reduced Gröbner bases.

use std::collections::BTreeSet;

use super::gaussian::GaussianRational;
use super::poly::{Monomial, MultivariatePoly};
use crate::error::{Error, Result};

pub const MAX_BASIS_ELEMENTS: usize = 10_000;
pub const MAX_TOTAL_DEGREE: u32 = 30;

/// Reduced Gröbner basis in degrevlex order; generators are monic and
/// sorted by increasing leading monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    nvars: usize,
    generators: Vec<MultivariatePoly>,
}

impl GroebnerBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> &[MultivariatePoly] {
        &self.generators
    }

    pub fn reduce(&self, f: &MultivariatePoly) -> MultivariatePoly {
        normal_form(f, &self.generators)
    }

    pub fn contains(&self, f: &MultivariatePoly) -> bool {
        self.reduce(f).is_zero()
    }

    /// Buchberger's criterion: every S-polynomial reduces to zero.
    pub fn satisfies_buchberger_criterion(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| {
            (i + 1..g.len()).all(|j| normal_form(&s_polynomial(&g[i], &g[j]), g).is_zero())
        })
    }

    /// No leading monomial divides any term of another generator.
    pub fn is_reduced(&self) -> bool {
        let g = &self.generators;
        g.iter().enumerate().all(|(i, gi)| {
            let lm = gi.leading_monomial().expect("nonzero generator");
            g.iter()
                .enumerate()
                .all(|(j, gj)| i == j || gj.terms().all(|(m, _)| !lm.divides(m)))
        })
    }
}

pub fn s_polynomial(f: &MultivariatePoly, g: &MultivariatePoly) -> MultivariatePoly {
    let (fm, fc) = f.leading_term().expect("nonzero polynomial");
    let (gm, gc) = g.leading_term().expect("nonzero polynomial");
    let l = fm.lcm(gm);
    let mut s = MultivariatePoly::zero(f.nvars());
    s.add_scaled(f, &fc.inv(), &fm.quotient_of(&l));
    s.add_scaled(g, &-gc.inv(), &gm.quotient_of(&l));
    s
}

/// Full reduction of `f` modulo `basis` (every term, not only the head).
pub fn normal_form(f: &MultivariatePoly, basis: &[MultivariatePoly]) -> MultivariatePoly {
    let mut p = f.clone();
    let mut rest = MultivariatePoly::zero(f.nvars());
    while let Some((lm, lc)) = p.pop_leading() {
        let divisor = basis
            .iter()
            .find(|g| g.leading_monomial().is_some_and(|gm| gm.divides(&lm)));
        match divisor {
            Some(g) => {
                let (gm, gc) = g.leading_term().expect("nonzero divisor");
                let factor = -(&lc / gc);
                let shift = gm.quotient_of(&lm);
                // The leading terms cancel; add the tail only.
                for (m, c) in g.terms().rev().skip(1) {
                    p.add_term(shift.mul(m), &(&factor * c));
                }
            }
            None => rest.add_term(lm, &lc),
        }
    }
    rest
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Pair {
    lcm: Monomial,
    i: usize,
    j: usize,
}

fn check_limits(basis: &[MultivariatePoly], p: &MultivariatePoly) -> Result<()> {
    if basis.len() >= MAX_BASIS_ELEMENTS {
        return Err(Error::EngineOverflow(format!(
            "more than {MAX_BASIS_ELEMENTS} basis elements"
        )));
    }
    if p.total_degree() > MAX_TOTAL_DEGREE {
        return Err(Error::EngineOverflow(format!(
            "generator degree {} exceeds {MAX_TOTAL_DEGREE}",
            p.total_degree()
        )));
    }
    Ok(())
}

pub fn buchberger(polys: &[MultivariatePoly]) -> Result<GroebnerBasis> {
    let nvars = polys
        .first()
        .map(MultivariatePoly::nvars)
        .ok_or(Error::EmptyInput)?;
    if polys.iter().any(|p| p.nvars() != nvars) {
        return Err(Error::InvalidParameter(
            "generators have different variable counts".into(),
        ));
    }
    let mut basis: Vec<MultivariatePoly> = Vec::new();
    for p in polys.iter().filter(|p| !p.is_zero()) {
        let m = p.monic();
        if !basis.contains(&m) {
            check_limits(&basis, &m)?;
            basis.push(m);
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptyInput);
    }

    let lead = |g: &MultivariatePoly| g.leading_monomial().expect("nonzero").clone();
    let mut queue: BTreeSet<Pair> = BTreeSet::new();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            queue.insert(Pair {
                lcm: lead(&basis[i]).lcm(&lead(&basis[j])),
                i,
                j,
            });
            pending.insert((i, j));
        }
    }

    while let Some(pair) = queue.pop_first() {
        pending.remove(&(pair.i, pair.j));
        let (li, lj) = (lead(&basis[pair.i]), lead(&basis[pair.j]));
        if li.is_coprime(&lj) {
            continue;
        }
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let chain = (0..basis.len()).any(|k| {
            k != pair.i
                && k != pair.j
                && lead(&basis[k]).divides(&pair.lcm)
                && !pending.contains(&key(pair.i, k))
                && !pending.contains(&key(pair.j, k))
        });
        if chain {
            continue;
        }
        let h = normal_form(&s_polynomial(&basis[pair.i], &basis[pair.j]), &basis);
        if h.is_zero() {
            continue;
        }
        let h = h.monic();
        check_limits(&basis, &h)?;
        let new = basis.len();
        let lh = lead(&h);
        basis.push(h);
        for (i, g) in basis.iter().enumerate().take(new) {
            queue.insert(Pair {
                lcm: lead(g).lcm(&lh),
                i,
                j: new,
            });
            pending.insert((i, new));
        }
    }

    Ok(GroebnerBasis {
        nvars,
        generators: reduce_basis(basis),
    })
}

/// Minimal basis followed by inter-reduction.
fn reduce_basis(mut basis: Vec<MultivariatePoly>) -> Vec<MultivariatePoly> {
    basis.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    let mut minimal: Vec<MultivariatePoly> = Vec::new();
    for g in basis {
        let lm = g.leading_monomial().expect("nonzero").clone();
        if !minimal
            .iter()
            .any(|h| h.leading_monomial().expect("nonzero").divides(&lm))
        {
            minimal.push(g);
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<MultivariatePoly> = minimal
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, g)| g.clone())
            .collect();
        // Leading terms of a minimal basis are not divisible by the others,
        // so the head survives reduction.
        let (lm, lc) = minimal[i].leading_term().expect("nonzero");
        let mut tail = minimal[i].clone();
        tail.pop_leading();
        let mut g = normal_form(&tail, &others);
        g.add_term(lm.clone(), lc);
        reduced.push(g.monic());
    }
    reduced.sort_by(|a, b| a.leading_monomial().cmp(&b.leading_monomial()));
    reduced
}

/// Whether the homogeneous ideal has only the origin as its affine zero set,
/// i.e. the projective zero locus is empty.
pub fn projective_empty(basis: &GroebnerBasis) -> Result<bool> {
    if basis.generators.iter().any(|g| !g.is_homogeneous()) {
        return Err(Error::NotHomogeneous);
    }
    let mut covered = vec![false; basis.nvars];
    for g in &basis.generators {
        if let Some(i) = g.leading_monomial().and_then(Monomial::pure_power_variable) {
            covered[i] = true;
        }
    }
    Ok(covered.into_iter().all(|c| c))
}

/// Convenience constructor used by the tests and the minors expansion.
pub fn poly_from_terms(nvars: usize, terms: &[(&[u16], i64)]) -> MultivariatePoly {
    let mut p = MultivariatePoly::zero(nvars);
    for (e, c) in terms {
        p.add_term(
            Monomial::from_exponents(e.to_vec()),
            &GaussianRational::from(*c),
        );
    }
    p
}
