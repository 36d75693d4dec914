//! Formal sums of fermion monomials.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Result;
use crate::fock::{Basis, Factor, FermionMonomial, Kind, Scalar};
use crate::lattice::{Lattice, Site};
use crate::sparse::SparseOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSum<T = i64> {
    pub terms: Vec<FermionMonomial<T>>,
}

impl<T: Scalar> Default for OperatorSum<T> {
    fn default() -> Self {
        OperatorSum { terms: Vec::new() }
    }
}

impl<T: Scalar> FromIterator<FermionMonomial<T>> for OperatorSum<T> {
    fn from_iter<I: IntoIterator<Item = FermionMonomial<T>>>(iter: I) -> Self {
        OperatorSum { terms: iter.into_iter().collect() }
    }
}

impl<T: Scalar> OperatorSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, m: FermionMonomial<T>) {
        self.terms.push(m);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.terms.iter().chain(&other.terms).cloned().collect()
    }

    pub fn scaled(&self, c: T) -> Self {
        self.terms.iter().map(|m| m.clone().scaled(c)).collect()
    }

    pub fn adjoint(&self) -> Self {
        self.terms.iter().map(FermionMonomial::adjoint).collect()
    }

    /// Relabels every factor site.
    pub fn map_sites(&self, mut f: impl FnMut(Site) -> Site) -> Self {
        self.terms
            .iter()
            .map(|m| {
                let factors = m.factors.iter().map(|x| Factor { site: f(x.site), kind: x.kind }).collect();
                FermionMonomial::new(m.coefficient, factors)
            })
            .collect()
    }

    /// Particle-hole transformation: swaps creation and annihilation factor-wise.
    pub fn particle_hole(&self) -> Self {
        self.terms
            .iter()
            .map(|m| {
                let factors = m.factors.iter().map(|x| Factor { site: x.site, kind: x.kind.flipped() }).collect();
                FermionMonomial::new(m.coefficient, factors)
            })
            .collect()
    }

    pub fn to_sparse(&self, basis: &Basis) -> Result<SparseOperator<T>> {
        let mut triplets = Vec::new();
        for m in &self.terms {
            let resolved = m.resolve(basis.lattice())?;
            for (col, &s) in basis.states().iter().enumerate() {
                if let Some((c, out)) = resolved.apply(s) {
                    let row = basis.index_of(out).ok_or(crate::Error::LeavesSector)?;
                    triplets.push((row, col, c));
                }
            }
        }
        Ok(SparseOperator::from_triplets(basis.shape(), basis.len(), triplets))
    }

    /// Normal-ordered form: creators before annihilators, each group in
    /// ascending site rank, identical words merged, zero terms dropped, terms
    /// sorted by factor signature.
    ///
    /// Used for termwise reporting only; matrices remain the reference.
    pub fn normal_ordered(&self, lattice: &Lattice) -> Result<Self> {
        let mut merged: BTreeMap<Vec<(Kind, usize)>, T> = BTreeMap::new();
        let mut work: Vec<(T, Vec<(Kind, usize)>)> = Vec::new();
        for m in &self.terms {
            let word = m
                .factors
                .iter()
                .map(|f| Ok((f.kind, lattice.rank(f.site)?)))
                .collect::<Result<Vec<_>>>()?;
            work.push((m.coefficient, word));
        }
        while let Some((c, mut word)) = work.pop() {
            if c.is_zero() {
                continue;
            }
            match order_step(&mut word) {
                Step::Done => *merged.entry(word).or_insert_with(T::zero) += c,
                Step::Zero => {}
                Step::Swapped => work.push((-c, word)),
                Step::Contracted(rest) => {
                    // a_i a*_i = 1 - a*_i a_i
                    work.push((c, rest));
                    work.push((-c, word));
                }
            }
        }
        Ok(merged
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(word, c)| {
                let factors = word
                    .into_iter()
                    .map(|(kind, r)| Factor { site: lattice.site(r), kind })
                    .collect();
                FermionMonomial::new(c, factors)
            })
            .collect())
    }

    /// Termwise equality after normal ordering.
    pub fn canonical_eq(&self, other: &Self, lattice: &Lattice) -> Result<bool> {
        Ok(self.normal_ordered(lattice)? == other.normal_ordered(lattice)?)
    }
}

enum Step {
    Done,
    Zero,
    Swapped,
    /// The word was swapped in place; the payload is the contracted word.
    Contracted(Vec<(Kind, usize)>),
}

/// Performs one reordering move on the first out-of-order adjacent pair.
fn order_step(word: &mut Vec<(Kind, usize)>) -> Step {
    for i in 0..word.len().saturating_sub(1) {
        let (x, y) = (word[i], word[i + 1]);
        if x == y {
            return Step::Zero;
        }
        if x <= y {
            continue;
        }
        if x.1 != y.1 {
            word.swap(i, i + 1);
            return Step::Swapped;
        }
        // Same site, annihilator before creator.
        let mut rest = word.clone();
        rest.drain(i..i + 2);
        word.swap(i, i + 1);
        return Step::Contracted(rest);
    }
    Step::Done
}
