//! Classical ground states: occupation patterns free of forbidden windows.
//!
//! A window is an even centre with its neighbours (a triple in one dimension,
//! a five-site cross in two). It is forbidden when every neighbour differs
//! from the centre, i.e. `0,1,0` or `1,0,1` on a triple.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::charges::{ConservedSequence, Sign, Support};
use crate::dynamics::diagonalize;
use crate::error::{Error, Result};
use crate::fock::{Basis, BasisState, Factor, FermionMonomial};
use crate::lattice::{Lattice, Site};
use crate::model::{local_charge_at, Model, Variant};

/// Largest lattice enumerated exhaustively.
pub const MAX_EXHAUSTIVE_SITES: usize = 24;

/// A `{0,1}` occupation pattern on a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    lattice: Lattice,
    state: BasisState,
}

impl Configuration {
    pub fn from_state(lattice: &Lattice, state: BasisState) -> Result<Self> {
        if lattice.len() < 64 && state.0 >> lattice.len() != 0 {
            return Err(Error::InvalidLattice(alloc::format!(
                "occupation {:#x} has bits beyond {} sites",
                state.0,
                lattice.len()
            )));
        }
        Ok(Configuration { lattice: *lattice, state })
    }

    /// Values in site order.
    pub fn from_bits(lattice: &Lattice, bits: &[bool]) -> Result<Self> {
        if bits.len() != lattice.len() {
            return Err(Error::InvalidLattice(alloc::format!(
                "{} values for {} sites",
                bits.len(),
                lattice.len()
            )));
        }
        let word = bits.iter().enumerate().fold(0u64, |w, (r, &b)| w | (u64::from(b) << r));
        Ok(Configuration { lattice: *lattice, state: BasisState(word) })
    }

    /// Parses a `0`/`1` string in site order.
    pub fn parse(lattice: &Lattice, s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidLattice(alloc::format!("bad occupation character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(lattice, &bits)
    }

    pub fn zeros(lattice: &Lattice) -> Self {
        Configuration { lattice: *lattice, state: BasisState(0) }
    }

    pub fn ones(lattice: &Lattice) -> Self {
        Configuration { lattice: *lattice, state: BasisState(full_mask(lattice.len())) }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn state(&self) -> BasisState {
        self.state
    }

    pub fn value(&self, site: Site) -> Option<bool> {
        self.lattice.rank(site).ok().map(|r| self.state.occupied(r))
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.lattice.len()).map(|r| self.state.occupied(r)).collect()
    }

    /// Particle-hole image.
    pub fn flipped(&self) -> Self {
        Configuration { lattice: self.lattice, state: BasisState(!self.state.0 & full_mask(self.lattice.len())) }
    }

    pub fn bitstring(&self) -> String {
        self.state.bitstring(self.lattice.len())
    }

    /// The sign sequence under `0 -> -1`, `1 -> +1` on the matching support.
    pub fn to_sequence(&self) -> Result<ConservedSequence> {
        let support = match (self.lattice.interval(), self.lattice.rectangle_bounds()) {
            (Some((lo, hi)), _) if self.lattice.is_periodic() => Support::Ring { lo, hi },
            (Some((lo, hi)), _) => Support::Interval { lo, hi },
            (None, Some(((x0, x1), (y0, y1)))) => Support::Rectangle { x0, x1, y0, y1 },
            _ => return Err(Error::Unsupported("configuration without a sequence support")),
        };
        ConservedSequence::new(support, self.bits().into_iter().map(Sign::from_plus).collect())
    }

    /// Inverse of [`Configuration::to_sequence`].
    pub fn from_sequence(lattice: &Lattice, f: &ConservedSequence) -> Result<Self> {
        if f.support().sites() != lattice.sites().collect::<Vec<_>>() {
            return Err(Error::IncompatibleSupport(alloc::format!(
                "sequence on {} does not cover {}",
                f.support(),
                lattice.describe()
            )));
        }
        let bits: Vec<bool> = f.values().iter().map(|s| s.is_plus()).collect();
        Self::from_bits(lattice, &bits)
    }

    /// `O(g) = prod a*_x` over occupied sites in ascending order.
    pub fn creation_monomial(&self) -> FermionMonomial {
        let factors = (0..self.lattice.len())
            .filter(|&r| self.state.occupied(r))
            .map(|r| Factor::create(self.lattice.site(r)))
            .collect();
        FermionMonomial::new(1, factors)
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 { u64::MAX } else { (1u64 << n) - 1 }
}

/// Ranks of every window: centre first, then its neighbours.
pub fn windows(lattice: &Lattice) -> Result<Vec<(Site, Vec<usize>)>> {
    lattice
        .centers()
        .into_iter()
        .map(|c| {
            let offsets: &[(i64, i64)] = match c {
                Site::Line(_) => &[(0, 0), (-1, 0), (1, 0)],
                Site::Grid(..) => &[(0, 0), (-1, 0), (0, -1), (1, 0), (0, 1)],
            };
            let ranks = offsets.iter().map(|&(dx, dy)| lattice.rank(c.offset(dx, dy))).collect::<Result<Vec<_>>>()?;
            Ok((c, ranks))
        })
        .collect()
}

fn window_forbidden(state: BasisState, ranks: &[usize]) -> bool {
    let c = state.occupied(ranks[0]);
    ranks[1..].iter().all(|&r| state.occupied(r) != c)
}

/// Centres of the forbidden windows of `g`.
pub fn forbidden_centers(g: &Configuration) -> Result<Vec<Site>> {
    Ok(windows(&g.lattice)?
        .into_iter()
        .filter(|(_, w)| window_forbidden(g.state, w))
        .map(|(c, _)| c)
        .collect())
}

pub fn is_ground_config(g: &Configuration) -> bool {
    forbidden_centers(g).is_ok_and(|v| v.is_empty())
}

/// All ground configurations in lexicographic order of their bitstrings.
pub fn enumerate_ground_configs(lattice: &Lattice) -> Result<Vec<Configuration>> {
    let n = lattice.len();
    if n > MAX_EXHAUSTIVE_SITES {
        return Err(Error::TooLarge { sites: n, limit: MAX_EXHAUSTIVE_SITES });
    }
    let mut checks: Vec<Vec<Vec<usize>>> = alloc::vec![Vec::new(); n];
    for (_, w) in windows(lattice)? {
        let last = *w.iter().max().unwrap_or(&0);
        checks[last].push(w);
    }
    let mut out = Vec::new();
    fn go(pos: usize, state: u64, n: usize, checks: &[Vec<Vec<usize>>], lattice: &Lattice, out: &mut Vec<Configuration>) {
        if pos == n {
            out.push(Configuration { lattice: *lattice, state: BasisState(state) });
            return;
        }
        for bit in [0u64, 1] {
            let s = state | (bit << pos);
            if checks[pos].iter().all(|w| !window_forbidden(BasisState(s), w)) {
                go(pos + 1, s, n, checks, lattice, out);
            }
        }
    }
    go(0, 0, n, &checks, lattice, &mut out);
    Ok(out)
}

/// Unit vector of `g` on `basis`, cross-checked against `O(g)` applied to the vacuum.
pub fn config_to_vector(g: &Configuration, basis: &Basis) -> Result<Vec<i64>> {
    if basis.lattice() != &g.lattice {
        return Err(Error::BasisMismatch);
    }
    let idx = basis.index_of(g.state).ok_or(Error::LeavesSector)?;
    let resolved = g.creation_monomial().resolve(&g.lattice)?;
    match resolved.apply(BasisState(0)) {
        Some((1, s)) if s == g.state => {}
        other => {
            return Err(Error::Numeric(alloc::format!("O(g) on the vacuum gave {other:?} for {}", g.bitstring())));
        }
    }
    let mut v = alloc::vec![0; basis.len()];
    v[idx] = 1;
    Ok(v)
}

/// Nonzero action of one local charge (or its adjoint) on a product state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flip {
    pub center: Site,
    pub adjoint: bool,
    pub coefficient: i64,
    pub output: Configuration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SusyGroundReport {
    pub config: Configuration,
    pub is_ground: bool,
    pub q_annihilates: bool,
    pub q_adjoint_annihilates: bool,
    pub h_annihilates: bool,
    /// Every local charge and its adjoint kill the state.
    pub local_annihilate: bool,
    pub flips: Vec<Flip>,
    /// Nonzero local actions land on pairwise distinct states, so the sums
    /// cannot cancel.
    pub distinct_outputs: bool,
}

impl SusyGroundReport {
    /// The kernel conditions agree with the forbidden-window test.
    pub fn consistent(&self) -> bool {
        let killed = self.q_annihilates && self.q_adjoint_annihilates;
        killed == self.is_ground
            && self.local_annihilate == self.is_ground
            && self.h_annihilates == killed
            && self.distinct_outputs
    }
}

pub fn verify_susy_ground(model: &Model, g: &Configuration) -> Result<SusyGroundReport> {
    let lattice = model.lattice();
    if lattice != &g.lattice {
        return Err(Error::BasisMismatch);
    }
    let col = model.basis.index_of(g.state).ok_or(Error::LeavesSector)?;
    let empty = |op: &crate::sparse::SparseOperator<i64>| op.column(col).is_empty();
    let mut flips = Vec::new();
    for center in lattice.centers() {
        let q = local_charge_at(lattice, center)?;
        for (adjoint, m) in [(false, q.clone()), (true, q.adjoint())] {
            if let Some((c, s)) = m.resolve(lattice)?.apply(g.state) {
                flips.push(Flip { center, adjoint, coefficient: c, output: Configuration { lattice: *lattice, state: s } });
            }
        }
    }
    let mut distinct_outputs = true;
    for adjoint in [false, true] {
        let outs: Vec<BasisState> = flips.iter().filter(|f| f.adjoint == adjoint).map(|f| f.output.state).collect();
        let set: BTreeSet<u64> = outs.iter().map(|s| s.0).collect();
        distinct_outputs &= set.len() == outs.len();
    }
    Ok(SusyGroundReport {
        config: g.clone(),
        is_ground: is_ground_config(g),
        q_annihilates: empty(&model.q),
        q_adjoint_annihilates: empty(&model.q_adj),
        h_annihilates: empty(&model.h),
        local_annihilate: flips.is_empty(),
        flips,
        distinct_outputs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelCensus {
    pub classical_count: usize,
    pub dim_ker_h: usize,
    pub dim_ker_h_classical: usize,
    /// Smallest nonzero diagonal entry of `H_classical`.
    pub min_nonzero_classical: Option<i64>,
    pub min_eigenvalue: f64,
}

/// Diagonal of the classical part of `H`: `H_classical` in one dimension,
/// the diagonal of `{Q, Q*}` in two (where it is the sum of the squared norms
/// of the local actions).
pub fn classical_diagonal(model: &Model) -> Result<Vec<i64>> {
    match model.spec.variant() {
        Variant::Nicolai1d => Ok(model.h_classical()?.diagonal()),
        Variant::Nicolai2d => Ok(model.h.diagonal()),
    }
}

pub fn kernel_census(model: &Model) -> Result<KernelCensus> {
    let classical_count = enumerate_ground_configs(model.lattice())?.len();
    let diag = classical_diagonal(model)?;
    let dim_ker_h_classical = diag.iter().filter(|&&d| d == 0).count();
    let min_nonzero_classical = diag.iter().copied().filter(|&d| d != 0).min();
    let s = diagonalize(&model.h)?;
    Ok(KernelCensus {
        classical_count,
        dim_ker_h: s.multiplicity_near(0.0),
        dim_ker_h_classical,
        min_nonzero_classical,
        min_eigenvalue: s.min_eigenvalue(),
    })
}

/// Sizes of the three characterizations of classical ground states and
/// whether they coincide, over every product state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub forbidden_free: usize,
    pub zero_diagonal: usize,
    pub annihilated: usize,
    pub coincide: bool,
}

pub fn ground_set_equivalence(model: &Model) -> Result<EquivalenceReport> {
    let lattice = model.lattice();
    let diag = classical_diagonal(model)?;
    let mut counts = [0usize; 3];
    let mut coincide = true;
    for (i, &s) in model.basis.states().iter().enumerate() {
        let g = Configuration { lattice: *lattice, state: s };
        let a = is_ground_config(&g);
        let b = diag[i] == 0;
        let c = model.q.column(i).is_empty() && model.q_adj.column(i).is_empty();
        counts[0] += usize::from(a);
        counts[1] += usize::from(b);
        counts[2] += usize::from(c);
        coincide &= a == b && b == c;
    }
    Ok(EquivalenceReport { forbidden_free: counts[0], zero_diagonal: counts[1], annihilated: counts[2], coincide })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::transfer::count_ground_configs;

    #[test]
    fn simple_patterns() {
        let ring = Lattice::ring(2).unwrap();
        assert!(is_ground_config(&Configuration::zeros(&ring)));
        assert!(is_ground_config(&Configuration::ones(&ring)));
        // sites -3..2; "0,1,0" around centre 0 (ranks 2,3,4)
        assert!(!is_ground_config(&Configuration::parse(&ring, "000100").unwrap()));
        assert!(is_ground_config(&Configuration::parse(&ring, "000110").unwrap()));
    }

    #[test]
    fn counts_match_transfer() {
        for m in 2..=6 {
            let ring = Lattice::ring(m).unwrap();
            assert_eq!(
                enumerate_ground_configs(&ring).unwrap().len() as u128,
                count_ground_configs(&ring).unwrap()
            );
        }
        let chain = Lattice::chain(0, 8).unwrap();
        assert_eq!(enumerate_ground_configs(&chain).unwrap().len() as u128, count_ground_configs(&chain).unwrap());
    }

    #[test]
    fn lexicographic_order() {
        let ring = Lattice::ring(2).unwrap();
        let v = enumerate_ground_configs(&ring).unwrap();
        let strings: Vec<String> = v.iter().map(|g| g.bitstring()).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
    }

    #[test]
    fn flip_of_101() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        // "1,0,1" on sites -1, 0, 1 (ranks 2, 3, 4)
        let g = Configuration::parse(model.lattice(), "001010").unwrap();
        let r = verify_susy_ground(&model, &g).unwrap();
        assert!(!r.is_ground && r.consistent());
        let f = r.flips.iter().find(|f| f.center == Site::Line(0) && !f.adjoint).unwrap();
        assert_eq!(f.output.bitstring(), "000100");
    }

    #[test]
    fn vacuum_vector() {
        let ring = Lattice::ring(2).unwrap();
        let basis = crate::fock::enumerate_basis(&ring, None).unwrap();
        let v = config_to_vector(&Configuration::ones(&ring), &basis).unwrap();
        assert_eq!(v[63], 1);
    }
}
