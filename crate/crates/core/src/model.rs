//! The Nicolai supercharge, its Hamiltonian and the model's symmetry maps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fock::{Basis, Factor, FermionMonomial};
use crate::lattice::{Boundary, Lattice, Site};
use crate::operator::OperatorSum;
use crate::sparse::{anticommutator, SparseOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Nicolai1d,
    Nicolai2d,
}

/// A validated lattice plus model variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    lattice: Lattice,
    variant: Variant,
}

impl ModelSpec {
    pub fn new(lattice: Lattice, variant: Variant) -> Result<Self> {
        match (variant, lattice.dimension()) {
            (Variant::Nicolai1d, 1) => {
                let (lo, hi) = lattice.interval().expect("one-dimensional");
                if lattice.boundary() == Boundary::Open && (lo % 2 != 0 || hi % 2 != 0 || hi - lo < 2) {
                    return Err(Error::InvalidSpec(format!(
                        "open chain needs even endpoints and at least one triple, got [{lo}, {hi}]"
                    )));
                }
                if lattice.is_periodic() && lattice.len() < 6 {
                    return Err(Error::InvalidSpec(format!("ring needs at least 6 sites, got {}", lattice.len())));
                }
            }
            (Variant::Nicolai2d, 2) => {
                if lattice.centers().is_empty() {
                    return Err(Error::InvalidSpec(format!("{} holds no five-site cross", lattice.describe())));
                }
            }
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "{variant:?} does not match a {}-dimensional lattice",
                    lattice.dimension()
                )))
            }
        }
        Ok(ModelSpec { lattice, variant })
    }

    pub fn ring(m: i64) -> Result<Self> {
        Self::new(Lattice::ring(m)?, Variant::Nicolai1d)
    }

    pub fn chain(lo: i64, hi: i64) -> Result<Self> {
        Self::new(Lattice::chain(lo, hi)?, Variant::Nicolai1d)
    }

    pub fn torus(lx: i64, ly: i64) -> Result<Self> {
        Self::new(Lattice::torus(lx, ly)?, Variant::Nicolai2d)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    fn require_1d(&self) -> Result<()> {
        match self.variant {
            Variant::Nicolai1d => Ok(()),
            Variant::Nicolai2d => Err(Error::Unsupported("explicit Hamiltonian terms exist only in one dimension")),
        }
    }
}

fn site_on(lattice: &Lattice, s: Site) -> Result<Site> {
    lattice.canonical(s).ok_or(Error::SiteOutsideLattice(s))
}

fn word(lattice: &Lattice, coefficient: i64, factors: &[(i64, bool)]) -> Result<FermionMonomial> {
    let factors = factors
        .iter()
        .map(|&(x, create)| {
            let site = site_on(lattice, Site::Line(x))?;
            Ok(if create { Factor::create(site) } else { Factor::annihilate(site) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FermionMonomial::new(coefficient, factors))
}

/// `a_{2i+1} a*_{2i} a_{2i-1}`, sites folded onto the lattice.
pub fn local_charge_1d(lattice: &Lattice, i: i64) -> Result<FermionMonomial> {
    let c = 2 * i;
    if lattice.dimension() != 1 || !lattice.centers().contains(&site_on(lattice, Site::Line(c))?) {
        return Err(Error::SiteOutsideLattice(Site::Line(c)));
    }
    word(lattice, 1, &[(c + 1, false), (c, true), (c - 1, false)])
}

/// `a_(2i-1,2j) a_(2i,2j-1) a*_(2i,2j) a_(2i+1,2j) a_(2i,2j+1)`.
pub fn local_charge_2d(lattice: &Lattice, i: i64, j: i64) -> Result<FermionMonomial> {
    let center = Site::Grid(2 * i, 2 * j);
    if lattice.dimension() != 2 || !lattice.centers().contains(&site_on(lattice, center)?) {
        return Err(Error::SiteOutsideLattice(center));
    }
    let arm = |dx, dy| site_on(lattice, center.offset(dx, dy));
    Ok(FermionMonomial::new(
        1,
        vec![
            Factor::annihilate(arm(-1, 0)?),
            Factor::annihilate(arm(0, -1)?),
            Factor::create(arm(0, 0)?),
            Factor::annihilate(arm(1, 0)?),
            Factor::annihilate(arm(0, 1)?),
        ],
    ))
}

/// Local supercharge term centred at `center` (one or two dimensions).
pub fn local_charge_at(lattice: &Lattice, center: Site) -> Result<FermionMonomial> {
    match center {
        Site::Line(c) if c.rem_euclid(2) == 0 => local_charge_1d(lattice, c.div_euclid(2)),
        Site::Grid(x, y) if x.rem_euclid(2) == 0 && y.rem_euclid(2) == 0 => {
            local_charge_2d(lattice, x.div_euclid(2), y.div_euclid(2))
        }
        _ => Err(Error::SiteOutsideLattice(center)),
    }
}

/// Sum of the local charges over every centre whose support fits.
///
/// Open lattices keep only fully contained triples (crosses); periodic ones
/// use every even (even-even) centre.
pub fn build_supercharge(spec: &ModelSpec) -> Result<OperatorSum> {
    spec.lattice
        .centers()
        .into_iter()
        .map(|c| local_charge_at(&spec.lattice, c))
        .collect()
}

/// `{Q, Q*}` for a real supercharge matrix.
pub fn build_hamiltonian_susy(q: &SparseOperator<i64>) -> Result<SparseOperator<i64>> {
    anticommutator(q, &q.adjoint())
}

/// `m_c = n_c - n_{c-1} n_c - n_c n_{c+1} + n_{c-1} n_{c+1}` for the triple centred at `c`.
pub fn classical_term(lattice: &Lattice, c: i64) -> Result<OperatorSum> {
    Ok(OperatorSum {
        terms: vec![
            word(lattice, 1, &[(c, true), (c, false)])?,
            word(lattice, -1, &[(c - 1, true), (c - 1, false), (c, true), (c, false)])?,
            word(lattice, -1, &[(c, true), (c, false), (c + 1, true), (c + 1, false)])?,
            word(lattice, 1, &[(c - 1, true), (c - 1, false), (c + 1, true), (c + 1, false)])?,
        ],
    })
}

fn centers_1d(spec: &ModelSpec) -> Result<Vec<i64>> {
    spec.require_1d()?;
    Ok(spec
        .lattice
        .centers()
        .into_iter()
        .map(|s| match s {
            Site::Line(x) => x,
            Site::Grid(..) => unreachable!("one-dimensional lattice"),
        })
        .collect())
}

/// Whether the triple two sites to the right of `c` is also present.
fn has_right_neighbour(spec: &ModelSpec, c: i64) -> bool {
    spec.lattice
        .canonical(Site::Line(c + 2))
        .is_some_and(|s| spec.lattice.centers().contains(&s))
}

fn hop_terms(lattice: &Lattice, c: i64) -> Result<[FermionMonomial; 2]> {
    Ok([
        word(lattice, 1, &[(c, true), (c - 1, false), (c + 2, false), (c + 3, true)])?,
        word(lattice, 1, &[(c - 1, true), (c, false), (c + 3, false), (c + 2, true)])?,
    ])
}

/// Sum of `m_c` over all centres.
pub fn build_h_classical(spec: &ModelSpec) -> Result<OperatorSum> {
    let mut out = OperatorSum::new();
    for c in centers_1d(spec)? {
        out.terms.extend(classical_term(&spec.lattice, c)?.terms);
    }
    Ok(out)
}

/// Hopping terms for every pair of neighbouring centres `(c, c+2)`.
pub fn build_h_hop(spec: &ModelSpec) -> Result<OperatorSum> {
    let mut out = OperatorSum::new();
    for c in centers_1d(spec)? {
        if has_right_neighbour(spec, c) {
            out.terms.extend(hop_terms(&spec.lattice, c)?);
        }
    }
    Ok(out)
}

/// Expanded five-term form of the Hamiltonian, per centre, in its literal
/// factor order. Hopping terms are kept only where the neighbouring triple
/// exists, which makes the realised matrix equal `{Q, Q*}` on open chains too.
pub fn build_hamiltonian_explicit(spec: &ModelSpec) -> Result<OperatorSum> {
    let lattice = &spec.lattice;
    let mut out = OperatorSum::new();
    for c in centers_1d(spec)? {
        if has_right_neighbour(spec, c) {
            out.terms.extend(hop_terms(lattice, c)?);
        }
        out.push(word(lattice, 1, &[(c, true), (c, false), (c + 1, false), (c + 1, true)])?);
        out.push(word(lattice, 1, &[(c - 1, true), (c - 1, false), (c, false), (c, true)])?);
        out.push(word(lattice, -1, &[(c - 1, true), (c - 1, false), (c + 1, false), (c + 1, true)])?);
    }
    Ok(out)
}

/// `N = sum_i n_i` as a formal sum.
pub fn number_operator_sum(lattice: &Lattice) -> OperatorSum {
    lattice.sites().map(FermionMonomial::number).collect()
}

/// `N` realised on `basis` (diagonal with the popcounts).
pub fn number_operator(basis: &Basis) -> SparseOperator<i64> {
    let diag: Vec<i64> = basis.states().iter().map(|s| s.particle_number() as i64).collect();
    SparseOperator::from_diagonal(basis.shape(), &diag)
}

/// Fermion parity `(-1)^N` on `basis`.
pub fn fermion_parity(basis: &Basis) -> SparseOperator<i64> {
    let diag: Vec<i64> = basis
        .states()
        .iter()
        .map(|s| if s.particle_number() % 2 == 0 { 1 } else { -1 })
        .collect();
    SparseOperator::from_diagonal(basis.shape(), &diag)
}

/// Shift by two sites (along `x` in two dimensions); periodic lattices only.
pub fn translate2(a: &OperatorSum, lattice: &Lattice) -> Result<OperatorSum> {
    if !lattice.is_periodic() {
        return Err(Error::Unsupported("translation needs a periodic lattice"));
    }
    let mut missing = None;
    let out = a.map_sites(|s| {
        lattice.canonical(s.offset(2, 0)).unwrap_or_else(|| {
            missing = Some(s);
            s
        })
    });
    match missing {
        Some(s) => Err(Error::SiteOutsideLattice(s)),
        None => Ok(out),
    }
}

/// Swaps `a_i` and `a*_i` on every factor.
pub fn particle_hole(a: &OperatorSum) -> OperatorSum {
    a.particle_hole()
}

/// A model realised on its full Fock space: `Q`, `Q*` and `H = {Q, Q*}`.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ModelSpec,
    pub basis: Basis,
    pub supercharge: OperatorSum,
    pub q: SparseOperator<i64>,
    pub q_adj: SparseOperator<i64>,
    pub h: SparseOperator<i64>,
}

impl Model {
    pub fn build(spec: &ModelSpec) -> Result<Model> {
        let basis = crate::fock::enumerate_basis(spec.lattice(), None)?;
        let supercharge = build_supercharge(spec)?;
        let q = supercharge.to_sparse(&basis)?;
        let q_adj = q.adjoint();
        let h = q.mul(&q_adj)?.add(&q_adj.mul(&q)?)?;
        Ok(Model { spec: *spec, basis, supercharge, q, q_adj, h })
    }

    pub fn lattice(&self) -> &Lattice {
        self.spec.lattice()
    }

    /// Realises a formal sum on this model's basis.
    pub fn realize(&self, a: &OperatorSum) -> Result<SparseOperator<i64>> {
        a.to_sparse(&self.basis)
    }

    pub fn h_classical(&self) -> Result<SparseOperator<i64>> {
        self.realize(&build_h_classical(&self.spec)?)
    }

    pub fn h_hop(&self) -> Result<SparseOperator<i64>> {
        self.realize(&build_h_hop(&self.spec)?)
    }
}
