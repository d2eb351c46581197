//! Sparse multivariate polynomials over `Q(i)` in graded reverse
//! lexicographic order with `r1 > r2 > ... > rm`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::gaussian::GaussianRational;

/// Exponent vector ordered by degrevlex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u16]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars].into_boxed_slice())
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e.into_boxed_slice())
    }

    pub fn from_exponents(e: Vec<u16>) -> Self {
        Self(e.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u16] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(
            other
                .0
                .iter()
                .zip(self.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .all(|(a, b)| *a == 0 || *b == 0)
    }

    /// `Some(i)` when this is `r_i^d` with `d >= 1`.
    pub fn pure_power_variable(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            // Equal degree: the larger monomial has the smaller exponent in
            // the last variable where they differ.
            for (a, b) in self.0.iter().zip(other.0.iter()).rev() {
                if a != b {
                    return b.cmp(a);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultivariatePoly {
    nvars: usize,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultivariatePoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        Self::monomial(Monomial::one(nvars), c)
    }

    pub fn monomial(m: Monomial, c: GaussianRational) -> Self {
        let mut p = Self::zero(m.exponents().len());
        p.add_term(m, &c);
        p
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        Self::monomial(Monomial::variable(nvars, i), GaussianRational::one())
    }

    /// `sum_i coeffs[i] * r_i`.
    pub fn linear_form(coeffs: &[GaussianRational]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::variable(n, i), c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&GaussianRational> {
        self.terms.get(m)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.last_key_value()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.last_key_value().map(|(m, _)| m)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c * m * other`.
    pub fn add_scaled(&mut self, other: &MultivariatePoly, c: &GaussianRational, m: &Monomial) {
        for (om, oc) in &other.terms {
            self.add_term(m.mul(om), &(c * oc));
        }
    }

    pub fn add(&self, other: &MultivariatePoly) -> MultivariatePoly {
        let mut out = self.clone();
        out.add_scaled(other, &GaussianRational::one(), &Monomial::one(self.nvars));
        out
    }

    pub fn sub(&self, other: &MultivariatePoly) -> MultivariatePoly {
        let mut out = self.clone();
        out.add_scaled(other, &-GaussianRational::one(), &Monomial::one(self.nvars));
        out
    }

    pub fn mul(&self, other: &MultivariatePoly) -> MultivariatePoly {
        let mut out = MultivariatePoly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_scaled(other, c, m);
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> MultivariatePoly {
        let mut out = MultivariatePoly::zero(self.nvars);
        out.add_scaled(self, c, &Monomial::one(self.nvars));
        out
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> MultivariatePoly {
        match self.leading_term() {
            Some((_, lc)) if !lc.is_one() => self.scale(&lc.inv()),
            _ => self.clone(),
        }
    }

    pub(crate) fn pop_leading(&mut self) -> Option<(Monomial, GaussianRational)> {
        self.terms.pop_last()
    }

    pub fn evaluate(&self, point: &[GaussianRational]) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t = &t * x;
                }
            }
            acc += &t;
        }
        acc
    }
}

impl fmt::Display for MultivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("r{}", i + 1)
                    } else {
                        format!("r{}^{e}", i + 1)
                    }
                })
                .collect();
            match (vars.is_empty(), c.is_one()) {
                (true, _) => write!(f, "({c})")?,
                (false, true) => f.write_str(&vars.join("*"))?,
                (false, false) => write!(f, "({c})*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}
