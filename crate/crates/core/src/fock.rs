//! Fock basis, fermion monomials and their exact action under the CARs.

use alloc::vec::Vec;
use core::fmt::{self, Debug};

use num_traits::{NumAssign, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Site};
use crate::sparse::{BasisShape, SparseOperator};

/// Coefficient field for monomials and sparse operators.
///
/// `i64` is the exact mode used for identity checks; `f64` is used for spectra.
pub trait Scalar: NumAssign + Signed + Copy + Debug + ToPrimitive + 'static {
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T: NumAssign + Signed + Copy + Debug + ToPrimitive + 'static> Scalar for T {}

/// Occupation bitstring: bit `r` is the occupation of the site with rank `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisState(pub u64);

impl BasisState {
    pub fn occupied(self, rank: usize) -> bool {
        (self.0 >> rank) & 1 == 1
    }

    pub fn particle_number(self) -> u32 {
        self.0.count_ones()
    }

    /// Number of occupied sites with rank strictly below `rank`.
    pub fn occupied_below(self, rank: usize) -> u32 {
        (self.0 & ((1u64 << rank) - 1)).count_ones()
    }

    /// Bitstring in rank order, e.g. `"101"`.
    pub fn bitstring(self, sites: usize) -> alloc::string::String {
        (0..sites).map(|r| if self.occupied(r) { '1' } else { '0' }).collect()
    }
}

/// Largest lattice for which a basis is materialised.
pub const MAX_BASIS_SITES: usize = 30;

/// Ordered list of basis states over a lattice, optionally restricted to a
/// particle-number sector.
#[derive(Clone, Debug)]
pub struct Basis {
    lattice: Lattice,
    sector: Option<usize>,
    states: Vec<BasisState>,
}

/// Full space in ascending occupation-integer order, or the `sector` states
/// in ascending order.
pub fn enumerate_basis(lattice: &Lattice, sector: Option<usize>) -> Result<Basis> {
    let n = lattice.len();
    if n > MAX_BASIS_SITES {
        return Err(Error::TooLarge { sites: n, limit: MAX_BASIS_SITES });
    }
    let states = match sector {
        None => (0..1u64 << n).map(BasisState).collect(),
        Some(k) if k > n => return Err(Error::SectorOutOfRange { sector: k, sites: n }),
        Some(0) => alloc::vec![BasisState(0)],
        Some(k) => {
            // Gosper's hack walks k-subsets in increasing integer order.
            let mut out = Vec::new();
            let mut x: u64 = (1u64 << k) - 1;
            let limit: u128 = 1u128 << n;
            while (x as u128) < limit {
                out.push(BasisState(x));
                let c = x & x.wrapping_neg();
                let r = x.wrapping_add(c);
                if r == 0 {
                    break;
                }
                x = (((r ^ x) >> 2) / c) | r;
            }
            out
        }
    };
    Ok(Basis { lattice: *lattice, sector, states })
}

impl Basis {
    pub fn full(lattice: &Lattice) -> Basis {
        enumerate_basis(lattice, None).expect("full basis has no sector to validate")
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn shape(&self) -> BasisShape {
        BasisShape { sites: self.lattice.len(), sector: self.sector }
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        match self.sector {
            None => ((state.0 as usize) < self.states.len()).then_some(state.0 as usize),
            Some(_) => self.states.binary_search(&state).ok(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Create,
    Annihilate,
}

impl Kind {
    pub fn flipped(self) -> Kind {
        match self {
            Kind::Create => Kind::Annihilate,
            Kind::Annihilate => Kind::Create,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factor {
    pub site: Site,
    pub kind: Kind,
}

impl Factor {
    pub fn create(site: Site) -> Factor {
        Factor { site, kind: Kind::Create }
    }

    pub fn annihilate(site: Site) -> Factor {
        Factor { site, kind: Kind::Annihilate }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Create => write!(f, "a*_{}", self.site),
            Kind::Annihilate => write!(f, "a_{}", self.site),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_len(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Ordered product of creation/annihilation factors times a coefficient.
///
/// Factor order is significant and is never normalised here; the product acts
/// right-to-left on kets. A zero coefficient is the zero monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FermionMonomial<T = i64> {
    pub coefficient: T,
    pub factors: Vec<Factor>,
}

impl<T: Scalar> FermionMonomial<T> {
    pub fn new(coefficient: T, factors: Vec<Factor>) -> Self {
        FermionMonomial { coefficient, factors }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), Vec::new())
    }

    pub fn create(site: Site) -> Self {
        Self::new(T::one(), alloc::vec![Factor::create(site)])
    }

    pub fn annihilate(site: Site) -> Self {
        Self::new(T::one(), alloc::vec![Factor::annihilate(site)])
    }

    /// `n_i = a*_i a_i`.
    pub fn number(site: Site) -> Self {
        Self::new(T::one(), alloc::vec![Factor::create(site), Factor::annihilate(site)])
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    pub fn scaled(mut self, c: T) -> Self {
        self.coefficient *= c;
        self
    }

    /// `self * other`, factors of `self` to the left.
    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Self::new(self.coefficient * other.coefficient, factors)
    }

    /// Hermitian adjoint for real coefficients: reverse and flip every factor.
    pub fn adjoint(&self) -> Self {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|f| Factor { site: f.site, kind: f.kind.flipped() })
            .collect();
        Self::new(self.coefficient, factors)
    }

    pub fn parity(&self) -> Parity {
        Parity::of_len(self.factors.len())
    }

    /// Net change of particle number (creates minus annihilates).
    pub fn particle_change(&self) -> i64 {
        self.factors
            .iter()
            .map(|f| if f.kind == Kind::Create { 1 } else { -1 })
            .sum()
    }

    pub fn resolve(&self, lattice: &Lattice) -> Result<ResolvedMonomial<T>> {
        let ops = self
            .factors
            .iter()
            .map(|f| Ok((lattice.rank(f.site)?, f.kind)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedMonomial { coefficient: self.coefficient, ops })
    }

    pub fn to_sparse(&self, basis: &Basis) -> Result<SparseOperator<T>> {
        monomial_to_sparse(self, basis)
    }

    /// Whether the monomial is the zero operator on `lattice`.
    ///
    /// Factors on other sites only contribute signs, so the product vanishes
    /// iff some site sees two equal kinds in a row (`a a` or `a* a*`).
    pub fn vanishes(&self, lattice: &Lattice) -> Result<bool> {
        if self.coefficient.is_zero() {
            return Ok(true);
        }
        let mut last: Vec<Option<Kind>> = alloc::vec![None; lattice.len()];
        for f in &self.factors {
            let r = lattice.rank(f.site)?;
            if last[r] == Some(f.kind) {
                return Ok(true);
            }
            last[r] = Some(f.kind);
        }
        Ok(false)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for FermionMonomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for factor in &self.factors {
            write!(f, " {factor}")?;
        }
        Ok(())
    }
}

/// A monomial with factor sites replaced by their ranks on a given lattice.
#[derive(Clone, Debug)]
pub struct ResolvedMonomial<T> {
    pub coefficient: T,
    pub ops: Vec<(usize, Kind)>,
}

impl<T: Scalar> ResolvedMonomial<T> {
    pub fn apply(&self, state: BasisState) -> Option<(T, BasisState)> {
        if self.coefficient.is_zero() {
            return None;
        }
        let mut bits = state;
        let mut negative = false;
        for &(rank, kind) in self.ops.iter().rev() {
            let occ = bits.occupied(rank);
            match kind {
                Kind::Create if occ => return None,
                Kind::Annihilate if !occ => return None,
                _ => {}
            }
            if bits.occupied_below(rank) % 2 == 1 {
                negative = !negative;
            }
            bits = BasisState(bits.0 ^ (1u64 << rank));
        }
        let c = if negative { -self.coefficient } else { self.coefficient };
        Some((c, bits))
    }
}

/// Applies `m` to the basis ket `s`; `None` is the zero vector.
pub fn apply_monomial<T: Scalar>(
    lattice: &Lattice,
    m: &FermionMonomial<T>,
    s: BasisState,
) -> Result<Option<(T, BasisState)>> {
    Ok(m.resolve(lattice)?.apply(s))
}

/// Matrix of `m` on `basis`: column `c` holds the image of basis state `c`.
pub fn monomial_to_sparse<T: Scalar>(m: &FermionMonomial<T>, basis: &Basis) -> Result<SparseOperator<T>> {
    let resolved = m.resolve(basis.lattice())?;
    let mut triplets = Vec::new();
    for (col, &s) in basis.states().iter().enumerate() {
        if let Some((c, out)) = resolved.apply(s) {
            let row = basis.index_of(out).ok_or(Error::LeavesSector)?;
            triplets.push((row, col, c));
        }
    }
    Ok(SparseOperator::from_triplets(basis.shape(), basis.len(), triplets))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(x: i64) -> Site {
        Site::Line(x)
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn basis_sizes() {
        let l3 = Lattice::chain(0, 2).unwrap();
        assert_eq!(enumerate_basis(&l3, None).unwrap().len(), 8);
        assert_eq!(enumerate_basis(&l3, Some(1)).unwrap().len(), 3);
        let ring = Lattice::ring(2).unwrap();
        let sector = enumerate_basis(&ring, Some(3)).unwrap();
        assert_eq!(sector.len() as u64, binomial(6, 3));
        assert!(sector.states().windows(2).all(|w| w[0] < w[1]));
        assert!(sector.states().iter().all(|s| s.particle_number() == 3));
        assert!(matches!(enumerate_basis(&l3, Some(4)), Err(Error::SectorOutOfRange { .. })));
    }

    #[test]
    fn sector_enumeration_matches_filter() {
        let l = Lattice::chain(0, 7).unwrap();
        for k in 0..=8 {
            let direct: Vec<_> = (0..256u64).filter(|s| s.count_ones() == k).map(BasisState).collect();
            assert_eq!(enumerate_basis(&l, Some(k as usize)).unwrap().states(), &direct[..]);
        }
    }

    #[test]
    fn annihilation_signs() {
        let l = Lattice::chain(0, 2).unwrap();
        // |1,0,0> has rank 0 occupied.
        let a0 = FermionMonomial::<i64>::annihilate(line(0));
        assert_eq!(apply_monomial(&l, &a0, BasisState(0b001)).unwrap(), Some((1, BasisState(0))));
        let a1 = FermionMonomial::<i64>::annihilate(line(1));
        assert_eq!(apply_monomial(&l, &a1, BasisState(0b011)).unwrap(), Some((-1, BasisState(0b001))));
        let a2a2 = a1.mul(&a1);
        for s in 0..8 {
            assert_eq!(apply_monomial(&l, &a2a2, BasisState(s)).unwrap(), None);
        }
    }

    #[test]
    fn out_of_lattice_factor_is_an_error() {
        let l = Lattice::chain(0, 2).unwrap();
        let m = FermionMonomial::<i64>::create(line(5));
        assert_eq!(apply_monomial(&l, &m, BasisState(0)), Err(Error::SiteOutsideLattice(line(5))));
    }

    #[test]
    fn number_and_identity_matrices() {
        let l1 = Lattice::chain(0, 0).unwrap();
        let b = Basis::full(&l1);
        let n = monomial_to_sparse(&FermionMonomial::<i64>::number(line(0)), &b).unwrap();
        assert_eq!(n.get(0, 0), 0);
        assert_eq!(n.get(1, 1), 1);
        let l2 = Lattice::chain(0, 1).unwrap();
        let b2 = Basis::full(&l2);
        let id = monomial_to_sparse(&FermionMonomial::<i64>::identity(), &b2).unwrap();
        assert_eq!(id, SparseOperator::identity(b2.shape(), 4));
    }

    #[test]
    fn hopping_has_single_entry() {
        // a*_0 a_1 maps |0,1> (bits 0b10) to |1,0> (bits 0b01). Annihilating
        // rank 1 passes no occupied site below it; creating rank 0 passes none
        // either, so the sign is +1.
        let l2 = Lattice::chain(0, 1).unwrap();
        let b2 = Basis::full(&l2);
        let hop = FermionMonomial::<i64>::new(1, alloc::vec![Factor::create(line(0)), Factor::annihilate(line(1))]);
        let m = monomial_to_sparse(&hop, &b2).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0b01, 0b10), 1);
        // a*_1 a_0 on |1,0>: annihilating rank 0 gives +, creating rank 1 with
        // rank 0 now empty gives +.
        assert_eq!(monomial_to_sparse(&hop.adjoint(), &b2).unwrap().get(0b10, 0b01), 1);
    }

    #[test]
    fn leaving_the_sector_is_reported() {
        let l = Lattice::chain(0, 2).unwrap();
        let b = enumerate_basis(&l, Some(1)).unwrap();
        let a = FermionMonomial::<i64>::annihilate(line(0));
        assert_eq!(monomial_to_sparse(&a, &b), Err(Error::LeavesSector));
    }
}
