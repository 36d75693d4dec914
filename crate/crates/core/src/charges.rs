//! Sign sequences, the fermionic charges built from them, and their checks.
//!
//! A [`ConservedSequence`] is a `{-1, +1}`-valued map on a finite support: an
//! interval, a whole ring, or a rectangle. Its operator [`sequence_to_operator`]
//! is the ordered product of `a_x` (value `-1`) and `a*_x` (value `+1`) over the
//! support. Sequences that avoid the forbidden patterns and have constant edge
//! pairs give operators commuting with the Hamiltonian.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Neg;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{enumerate_basis, Factor, FermionMonomial, Parity};
use crate::lattice::{Lattice, Site};
use crate::model::{local_charge_at, Model};
use crate::sparse::{graded_commutator, SparseOperator};

/// Largest rectangle enumerated exhaustively.
pub const MAX_RECTANGLE_SITES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn from_plus(plus: bool) -> Sign {
        if plus { Sign::Plus } else { Sign::Minus }
    }

    fn factor(self, site: Site) -> Factor {
        match self {
            Sign::Minus => Factor::annihilate(site),
            Sign::Plus => Factor::create(site),
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_plus() { "+" } else { "-" })
    }
}

/// Support of a sequence. Labels are unfolded; a lattice folds them on use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Support {
    /// Sites `lo..=hi` of a line, with edges.
    Interval { lo: i64, hi: i64 },
    /// Every site of the periodic chain `lo..=hi`; no edges.
    Ring { lo: i64, hi: i64 },
    /// Sites `x0..=x1` by `y0..=y1`, row-major.
    Rectangle { x0: i64, x1: i64, y0: i64, y1: i64 },
}

impl Support {
    pub fn len(&self) -> usize {
        match *self {
            Support::Interval { lo, hi } | Support::Ring { lo, hi } => (hi - lo + 1).max(0) as usize,
            Support::Rectangle { x0, x1, y0, y1 } => ((x1 - x0 + 1) * (y1 - y0 + 1)).max(0) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sites in ascending site order.
    pub fn sites(&self) -> Vec<Site> {
        match *self {
            Support::Interval { lo, hi } | Support::Ring { lo, hi } => (lo..=hi).map(Site::Line).collect(),
            Support::Rectangle { x0, x1, y0, y1 } => (x0..=x1)
                .flat_map(|x| (y0..=y1).map(move |y| Site::Grid(x, y)))
                .collect(),
        }
    }

    fn position(&self, site: Site) -> Option<usize> {
        match (*self, site) {
            (Support::Interval { lo, hi }, Site::Line(x)) if (lo..=hi).contains(&x) => Some((x - lo) as usize),
            (Support::Ring { lo, hi }, Site::Line(x)) => Some((x - lo).rem_euclid(hi - lo + 1) as usize),
            (Support::Rectangle { x0, x1, y0, y1 }, Site::Grid(x, y))
                if (x0..=x1).contains(&x) && (y0..=y1).contains(&y) =>
            {
                Some(((x - x0) * (y1 - y0 + 1) + (y - y0)) as usize)
            }
            _ => None,
        }
    }

    /// Forbidden-pattern windows: position of the centre followed by the
    /// positions of its neighbours. Only windows inside the support count;
    /// on a ring every even site is a centre.
    fn windows(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        match *self {
            Support::Interval { lo, hi } => {
                for c in lo + 1..hi {
                    if c.rem_euclid(2) == 0 {
                        out.push(alloc::vec![(c - lo) as usize, (c - 1 - lo) as usize, (c + 1 - lo) as usize]);
                    }
                }
            }
            Support::Ring { lo, hi } => {
                for c in lo..=hi {
                    if c.rem_euclid(2) == 0 {
                        let p = |x: i64| self.position(Site::Line(x)).unwrap_or(0);
                        out.push(alloc::vec![p(c), p(c - 1), p(c + 1)]);
                    }
                }
            }
            Support::Rectangle { x0, x1, y0, y1 } => {
                for x in x0 + 1..x1 {
                    for y in y0 + 1..y1 {
                        if x.rem_euclid(2) == 0 && y.rem_euclid(2) == 0 {
                            let c = Site::Grid(x, y);
                            let p = |s: Site| self.position(s).unwrap_or(0);
                            out.push(alloc::vec![
                                p(c),
                                p(c.offset(-1, 0)),
                                p(c.offset(0, -1)),
                                p(c.offset(1, 0)),
                                p(c.offset(0, 1)),
                            ]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Pairs of positions that must carry equal values for the edges to be
    /// neutral. Rings have none.
    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        match *self {
            Support::Interval { lo, hi } if hi > lo => {
                let n = (hi - lo) as usize;
                alloc::vec![(0, 1), (n - 1, n)]
            }
            Support::Interval { .. } | Support::Ring { .. } => Vec::new(),
            Support::Rectangle { x0, x1, y0, y1 } => {
                let p = |x: i64, y: i64| self.position(Site::Grid(x, y)).unwrap_or(0);
                let mut pairs = Vec::new();
                if x1 > x0 {
                    for y in y0..=y1 {
                        pairs.push((p(x0, y), p(x0 + 1, y)));
                        pairs.push((p(x1 - 1, y), p(x1, y)));
                    }
                }
                if y1 > y0 {
                    for x in x0..=x1 {
                        pairs.push((p(x, y0), p(x, y0 + 1)));
                        pairs.push((p(x, y1 - 1), p(x, y1)));
                    }
                }
                pairs
            }
        }
    }

    /// Even endpoints (corners) with at least one centre in between.
    fn has_even_edges(&self) -> bool {
        let even = |v: i64| v.rem_euclid(2) == 0;
        match *self {
            Support::Interval { lo, hi } => even(lo) && even(hi) && lo < hi,
            Support::Ring { .. } => true,
            Support::Rectangle { x0, x1, y0, y1 } => {
                even(x0) && even(x1) && even(y0) && even(y1) && x0 < x1 && y0 < y1
            }
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Support::Interval { lo, hi } => write!(f, "[{lo},{hi}]"),
            Support::Ring { lo, hi } => write!(f, "ring[{lo},{hi}]"),
            Support::Rectangle { x0, x1, y0, y1 } => write!(f, "[{x0},{x1}]x[{y0},{y1}]"),
        }
    }
}

/// A `{-1, +1}`-valued map on a support; values follow [`Support::sites`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConservedSequence {
    support: Support,
    values: Vec<Sign>,
}

impl ConservedSequence {
    pub fn new(support: Support, values: Vec<Sign>) -> Result<Self> {
        if support.is_empty() || values.len() != support.len() {
            return Err(Error::IncompatibleSupport(format!(
                "{} values for support {support} of {} sites",
                values.len(),
                support.len()
            )));
        }
        Ok(ConservedSequence { support, values })
    }

    /// Interval sequence from `±1` integers starting at `lo`.
    pub fn from_values(lo: i64, values: &[i64]) -> Result<Self> {
        let signs = values
            .iter()
            .map(|&v| Sign::from_value(v).ok_or_else(|| Error::IncompatibleSupport(format!("value {v} is not +-1"))))
            .collect::<Result<Vec<_>>>()?;
        let hi = lo + signs.len() as i64 - 1;
        Self::new(Support::Interval { lo, hi }, signs)
    }

    /// The constant sequences `r+` and `r-`.
    pub fn constant(support: Support, sign: Sign) -> Self {
        ConservedSequence { support, values: alloc::vec![sign; support.len()] }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn values(&self) -> &[Sign] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Site, Sign)> + '_ {
        self.support.sites().into_iter().zip(self.values.iter().copied())
    }

    pub fn value_at(&self, site: Site) -> Option<Sign> {
        self.support.position(site).map(|p| self.values[p])
    }

    pub fn negated(&self) -> Self {
        ConservedSequence { support: self.support, values: self.values.iter().map(|&s| -s).collect() }
    }

    pub fn is_permitted(&self) -> bool {
        is_permitted(self)
    }

    /// Edge pairs constant and endpoints even.
    pub fn has_edge_conditions(&self) -> bool {
        self.support.has_even_edges()
            && self.support.edge_pairs().iter().all(|&(a, b)| self.values[a] == self.values[b])
    }

    /// Permitted with neutral edges: the sequences whose operators are conserved.
    pub fn is_local_conservation(&self) -> bool {
        self.is_permitted() && self.has_edge_conditions()
    }

    pub fn parity(&self) -> Parity {
        Parity::of_len(self.len())
    }

    pub fn to_operator(&self) -> FermionMonomial {
        sequence_to_operator(self)
    }

    /// `+-` string in site order, e.g. `--+++`.
    pub fn signs_string(&self) -> alloc::string::String {
        self.values.iter().map(|s| if s.is_plus() { '+' } else { '-' }).collect()
    }
}

impl fmt::Display for ConservedSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.support, self.signs_string())
    }
}

fn window_forbidden(values: &[Sign], window: &[usize]) -> bool {
    let center = values[window[0]];
    window[1..].iter().all(|&p| values[p] == -center)
}

/// No forbidden window: an even centre whose neighbours all carry the
/// opposite sign.
pub fn is_permitted(f: &ConservedSequence) -> bool {
    f.support.windows().iter().all(|w| !window_forbidden(&f.values, w))
}

/// `prod_x zeta_x(f(x))` over the support in site order, `zeta(-1) = a`,
/// `zeta(+1) = a*`.
pub fn sequence_to_operator(f: &ConservedSequence) -> FermionMonomial {
    let factors = f.entries().map(|(site, sign)| sign.factor(site)).collect();
    FermionMonomial::new(1, factors)
}

/// Depth-first lexicographic enumeration (`-` before `+`), pruning each
/// window and edge pair as soon as its last position is assigned.
fn enumerate_support(support: Support, edges: bool) -> Vec<ConservedSequence> {
    let n = support.len();
    let mut checks: Vec<Vec<Vec<usize>>> = alloc::vec![Vec::new(); n];
    for w in support.windows() {
        let last = *w.iter().max().unwrap_or(&0);
        checks[last].push(w);
    }
    let mut pair_checks: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
    if edges {
        for (a, b) in support.edge_pairs() {
            pair_checks[a.max(b)].push(a.min(b));
        }
    }
    let mut out = Vec::new();
    let mut values = alloc::vec![Sign::Minus; n];
    fn go(
        pos: usize,
        values: &mut Vec<Sign>,
        checks: &[Vec<Vec<usize>>],
        pair_checks: &[Vec<usize>],
        support: Support,
        out: &mut Vec<ConservedSequence>,
    ) {
        if pos == values.len() {
            out.push(ConservedSequence { support, values: values.clone() });
            return;
        }
        for s in [Sign::Minus, Sign::Plus] {
            values[pos] = s;
            let ok = checks[pos].iter().all(|w| !window_forbidden(values, w))
                && pair_checks[pos].iter().all(|&q| values[q] == s);
            if ok {
                go(pos + 1, values, checks, pair_checks, support, out);
            }
        }
    }
    go(0, &mut values, &checks, &pair_checks, support, &mut out);
    out
}

/// All local sequences of conservation on `[2k, 2l]`, lexicographic.
pub fn enumerate_hat_xi(k: i64, l: i64) -> Result<Vec<ConservedSequence>> {
    if k >= l {
        return Err(Error::InvalidInterval { k, l });
    }
    Ok(enumerate_support(Support::Interval { lo: 2 * k, hi: 2 * l }, true))
}

/// All permitted sequences on `[lo, hi]`, no edge conditions.
pub fn enumerate_permitted_interval(lo: i64, hi: i64) -> Result<Vec<ConservedSequence>> {
    if hi < lo {
        return Err(Error::InvalidInterval { k: lo, l: hi });
    }
    Ok(enumerate_support(Support::Interval { lo, hi }, false))
}

/// All permitted sequences on a whole periodic chain, wrapped windows included.
pub fn enumerate_ring_sequences(lattice: &Lattice) -> Result<Vec<ConservedSequence>> {
    match lattice.interval() {
        Some((lo, hi)) if lattice.is_periodic() => Ok(enumerate_support(Support::Ring { lo, hi }, false)),
        _ => Err(Error::IncompatibleSupport(format!("{} is not a ring", lattice.describe()))),
    }
}

/// All rectangle sequences with constant edge pairs and no forbidden cross.
pub fn enumerate_hat_rectangle(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Vec<ConservedSequence>> {
    let support = Support::Rectangle { x0, x1, y0, y1 };
    if !support.has_even_edges() {
        return Err(Error::IncompatibleSupport(format!("rectangle {support} needs even corners")));
    }
    if support.len() > MAX_RECTANGLE_SITES {
        return Err(Error::TooLarge { sites: support.len(), limit: MAX_RECTANGLE_SITES });
    }
    Ok(enumerate_support(support, true))
}

/// `sigma(k, l) = (2(l-k)+1)(l-k)`.
pub fn sign_sigma(k: i64, l: i64) -> i64 {
    let d = l - k;
    (2 * d + 1) * d
}

/// Smallest lattice carrying the support, open unless the support is a ring.
pub fn support_lattice(support: Support) -> Result<Lattice> {
    match support {
        Support::Interval { lo, hi } => Lattice::chain(lo, hi),
        Support::Ring { lo, hi } => Lattice::line(lo, hi, crate::lattice::Boundary::Periodic),
        Support::Rectangle { x0, x1, y0, y1 } => Lattice::rectangle(x0, x1, y0, y1),
    }
}

/// `matrix(Q(f))^T == (-1)^sigma * matrix(Q(-f))` on the support's own lattice.
pub fn adjoint_identity_check(f: &ConservedSequence) -> Result<bool> {
    let (lo, hi) = match f.support {
        Support::Interval { lo, hi } if f.has_edge_conditions() => (lo, hi),
        _ => return Err(Error::IncompatibleSupport(format!("{} is not an interval sequence of conservation", f.support))),
    };
    let basis = enumerate_basis(&support_lattice(f.support)?, None)?;
    let q = f.to_operator().to_sparse(&basis)?;
    let sign = if sign_sigma(lo / 2, hi / 2) % 2 == 0 { 1 } else { -1 };
    let neg = f.negated().to_operator().to_sparse(&basis)?.scale(sign);
    Ok(q.adjoint() == neg)
}

/// The sites of `f` folded onto `lattice`, validating that the support embeds
/// without touching itself.
pub fn embed(lattice: &Lattice, f: &ConservedSequence) -> Result<Vec<Site>> {
    let incompatible = |why: &str| Error::IncompatibleSupport(format!("{} on {}: {why}", f.support, lattice.describe()));
    match (f.support, lattice.dimension()) {
        (Support::Ring { lo, hi }, 1) => {
            if !lattice.is_periodic() || lattice.interval() != Some((lo, hi)) {
                return Err(incompatible("full-ring support must match the ring"));
            }
        }
        (Support::Interval { .. }, 1) => {
            if lattice.is_periodic() && f.len() >= lattice.len() {
                return Err(incompatible("arc must be shorter than the ring"));
            }
        }
        (Support::Rectangle { x0, x1, y0, y1 }, 2) => {
            if let Some(((lx0, lx1), (ly0, ly1))) = lattice.rectangle_bounds() {
                if lattice.is_periodic() && (x1 - x0 + 1 >= lx1 - lx0 + 1 || y1 - y0 + 1 >= ly1 - ly0 + 1) {
                    return Err(incompatible("rectangle must be smaller than the torus"));
                }
            }
        }
        _ => return Err(incompatible("dimension mismatch")),
    }
    let mut sites = Vec::with_capacity(f.len());
    for s in f.support.sites() {
        let c = lattice.canonical(s).ok_or(Error::SiteOutsideLattice(s))?;
        if !lattice.is_periodic() && c != s {
            return Err(Error::SiteOutsideLattice(s));
        }
        sites.push(c);
    }
    let distinct: BTreeSet<Site> = sites.iter().copied().collect();
    if distinct.len() != sites.len() {
        return Err(incompatible("support overlaps itself"));
    }
    Ok(sites)
}

/// The anticommutation exception: supports share a site and `f = -g` on every shared site.
pub fn overlap_exception(lattice: &Lattice, f: &ConservedSequence, g: &ConservedSequence) -> Result<bool> {
    let fs = embed(lattice, f)?;
    let gs = embed(lattice, g)?;
    let mut shared = 0;
    for (site, &fv) in fs.iter().zip(&f.values) {
        if let Some(p) = gs.iter().position(|s| s == site) {
            if g.values[p] != -fv {
                return Ok(false);
            }
            shared += 1;
        }
    }
    Ok(shared > 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anticommutation {
    Zero,
    Nonzero,
}

/// Graded commutator of `Q(f)` and `Q(g)` on the full Fock space of `lattice`
/// (the anticommutator for odd sequences).
pub fn anticommute_check(lattice: &Lattice, f: &ConservedSequence, g: &ConservedSequence) -> Result<Anticommutation> {
    embed(lattice, f)?;
    embed(lattice, g)?;
    let basis = enumerate_basis(lattice, None)?;
    let a = f.to_operator().to_sparse(&basis)?;
    let b = g.to_operator().to_sparse(&basis)?;
    let c = graded_commutator(&a, &b, (f.parity(), g.parity()))?;
    Ok(if c.is_zero() { Anticommutation::Zero } else { Anticommutation::Nonzero })
}

/// Outcome of checking one sequence against a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservationReport {
    /// Largest entry of `[H, Q(f)]`.
    pub commutator: i64,
    /// Largest entry of `[H, Q(f)*]`.
    pub commutator_adjoint: i64,
    /// Largest entry of the graded commutator of `Q` with `Q(f)`.
    pub graded_q: i64,
    /// Largest entry of the graded commutator of `Q*` with `Q(f)`.
    pub graded_q_adjoint: i64,
    /// Largest entry of `Q(f)^2`.
    pub square: i64,
    /// `Q(f) q(T) = q(T) Q(f) = 0`, and the same for `q(T)*`, for every local
    /// charge `q(T)` whose sites meet the support.
    pub local_products_vanish: bool,
}

impl ConservationReport {
    pub fn is_conserved(&self) -> bool {
        self.commutator == 0 && self.commutator_adjoint == 0
    }
}

fn max_abs_i64(a: &SparseOperator<i64>) -> i64 {
    a.entries().map(|(_, _, v)| v.abs()).max().unwrap_or(0)
}

/// Realizes `Q(f)` on the model and measures everything in [`ConservationReport`].
pub fn conservation_check(model: &Model, f: &ConservedSequence) -> Result<ConservationReport> {
    let lattice = model.lattice();
    let sites: BTreeSet<Site> = embed(lattice, f)?.into_iter().collect();
    let op = f.to_operator();
    let a = op.to_sparse(&model.basis)?;
    let a_adj = a.adjoint();
    let h = &model.h;
    let commutator = max_abs_i64(&h.mul(&a)?.sub(&a.mul(h)?)?);
    let commutator_adjoint = max_abs_i64(&h.mul(&a_adj)?.sub(&a_adj.mul(h)?)?);
    let parities = (Parity::Odd, f.parity());
    let graded_q = max_abs_i64(&graded_commutator(&model.q, &a, parities)?);
    let graded_q_adjoint = max_abs_i64(&graded_commutator(&model.q_adj, &a, parities)?);
    let square = max_abs_i64(&a.mul(&a)?);
    let mut local_products_vanish = true;
    for center in lattice.centers() {
        let q = local_charge_at(lattice, center)?;
        let touches = q.factors.iter().any(|fa| lattice.canonical(fa.site).is_some_and(|s| sites.contains(&s)));
        if !touches {
            continue;
        }
        let qa = q.adjoint();
        for local in [&q, &qa] {
            if !(op.mul(local).vanishes(lattice)? && local.mul(&op).vanishes(lattice)?) {
                local_products_vanish = false;
            }
        }
    }
    Ok(ConservationReport { commutator, commutator_adjoint, graded_q, graded_q_adjoint, square, local_products_vanish })
}

/// Every interval sequence of conservation that embeds in a one-dimensional
/// lattice: all `[2k, 2l]` inside an open chain, or every arc shorter than a ring.
pub fn embeddable_hat_sequences(lattice: &Lattice) -> Result<Vec<ConservedSequence>> {
    let (lo, hi) = lattice
        .interval()
        .ok_or(Error::Unsupported("interval sequences live on one-dimensional lattices"))?;
    let mut out = Vec::new();
    let first = lo + lo.rem_euclid(2);
    for start in (first..=hi).step_by(2) {
        let k = start / 2;
        let max_len = if lattice.is_periodic() { lattice.len() as i64 - 1 } else { hi - start + 1 };
        let mut d = 1;
        while 2 * d < max_len {
            out.extend(enumerate_hat_xi(k, k + d)?);
            d += 1;
        }
    }
    Ok(out)
}

/// Interval sequences on `[2k, 2l]` that are permitted but break at least
/// one edge pair.
pub fn edge_violating_sequences(k: i64, l: i64) -> Result<Vec<ConservedSequence>> {
    if k >= l {
        return Err(Error::InvalidInterval { k, l });
    }
    Ok(enumerate_permitted_interval(2 * k, 2 * l)?
        .into_iter()
        .filter(|f| !f.has_edge_conditions())
        .collect())
}

/// Even-aligned rectangles that embed in a two-dimensional lattice.
pub fn even_rectangles(lattice: &Lattice) -> Result<Vec<Support>> {
    let ((x0, x1), (y0, y1)) = lattice
        .rectangle_bounds()
        .ok_or(Error::Unsupported("rectangles live on two-dimensional lattices"))?;
    let spans = |a: i64, b: i64| -> Vec<(i64, i64)> {
        let first = a + a.rem_euclid(2);
        let mut v = Vec::new();
        for s in (first..=b).step_by(2) {
            let mut e = s + 2;
            loop {
                let fits = if lattice.is_periodic() { e - s + 1 < b - a + 1 } else { e <= b };
                if !fits {
                    break;
                }
                v.push((s, e));
                e += 2;
            }
        }
        v
    };
    let mut out = Vec::new();
    for &(xa, xb) in &spans(x0, x1) {
        for &(ya, yb) in &spans(y0, y1) {
            out.push(Support::Rectangle { x0: xa, x1: xb, y0: ya, y1: yb });
        }
    }
    Ok(out)
}

/// Generators of a charge algebra with their pairwise graded commutators.
#[derive(Clone, Debug)]
pub struct ChargeAlgebraReport {
    pub generators: Vec<(ConservedSequence, FermionMonomial)>,
    /// `(i, j, vanishes, exception)` for `i < j`; `exception` marks pairs
    /// sharing sites with opposite signs on every shared site.
    pub pairwise: Vec<(usize, usize, bool, bool)>,
    /// Largest entry of `[H, Q(f)]` over all generators.
    pub commutant_check: i64,
}

impl ChargeAlgebraReport {
    /// Pairs that fail to anticommute without the overlap exception.
    pub fn violations(&self) -> usize {
        self.pairwise.iter().filter(|&&(_, _, zero, exc)| !zero && !exc).count()
    }
}

pub fn charge_algebra_report(model: &Model, sequences: &[ConservedSequence]) -> Result<ChargeAlgebraReport> {
    let lattice = model.lattice();
    let mut mats = Vec::with_capacity(sequences.len());
    let mut commutant_check = 0;
    for f in sequences {
        embed(lattice, f)?;
        let a = f.to_operator().to_sparse(&model.basis)?;
        commutant_check = commutant_check.max(max_abs_i64(&model.h.mul(&a)?.sub(&a.mul(&model.h)?)?));
        mats.push(a);
    }
    let mut pairwise = Vec::new();
    for i in 0..sequences.len() {
        for j in i + 1..sequences.len() {
            let c = graded_commutator(&mats[i], &mats[j], (sequences[i].parity(), sequences[j].parity()))?;
            let exc = overlap_exception(lattice, &sequences[i], &sequences[j])?;
            pairwise.push((i, j, c.is_zero(), exc));
        }
    }
    let generators = sequences.iter().map(|f| (f.clone(), f.to_operator())).collect();
    Ok(ChargeAlgebraReport { generators, pairwise, commutant_check })
}

/// Linear-span statistics of words in the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    pub generators: usize,
    /// Rank of the generators themselves.
    pub generator_rank: usize,
    pub max_degree: usize,
    /// Words of length `1..=max_degree`.
    pub products: usize,
    /// Words whose product is the zero matrix.
    pub vanishing: usize,
    /// Nonzero products that are distinct up to sign.
    pub distinct: usize,
    /// Rank of the distinct products.
    pub rank: usize,
}

impl IndependenceReport {
    /// Linear relations among distinct nonzero products.
    pub fn dependencies(&self) -> usize {
        self.distinct - self.rank
    }
}

type Entries = Vec<(u32, u32, i64)>;

fn sign_normalized(a: &SparseOperator<i64>) -> Entries {
    let mut e: Entries = a.entries().map(|(r, c, v)| (r as u32, c as u32, v)).collect();
    if e.first().is_some_and(|&(_, _, v)| v < 0) {
        for x in &mut e {
            x.2 = -x.2;
        }
    }
    e
}

fn dot(a: &Entries, b: &Entries) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0i64);
    while i < a.len() && j < b.len() {
        match (a[i].0, a[i].1).cmp(&(b[j].0, b[j].1)) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                s += a[i].2 * b[j].2;
                i += 1;
                j += 1;
            }
        }
    }
    s as f64
}

/// Numerical rank of vectorized matrices from their Gram matrix.
fn rank(vectors: &[Entries]) -> usize {
    let n = vectors.len();
    if n == 0 {
        return 0;
    }
    let g = DMatrix::from_fn(n, n, |i, j| dot(&vectors[i], &vectors[j]));
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = top * 1e-9 * n as f64;
    eig.eigenvalues.iter().filter(|&&v| v > tol).count()
}

/// Rank of the span of all words of length `<= max_degree` in `generators`.
pub fn independence_probe(generators: &[SparseOperator<i64>], max_degree: usize) -> Result<IndependenceReport> {
    let mut words: Vec<SparseOperator<i64>> = generators.to_vec();
    let mut frontier = words.clone();
    let mut products = generators.len();
    for _ in 1..max_degree {
        let mut next = Vec::with_capacity(frontier.len() * generators.len());
        for w in &frontier {
            for g in generators {
                next.push(w.mul(g)?);
            }
        }
        products += next.len();
        words.extend(next.iter().cloned());
        frontier = next;
    }
    let vanishing = words.iter().filter(|w| w.is_zero()).count();
    let distinct: BTreeSet<Entries> = words.iter().filter(|w| !w.is_zero()).map(sign_normalized).collect();
    let distinct: Vec<Entries> = distinct.into_iter().collect();
    let gens: Vec<Entries> = generators.iter().map(sign_normalized).collect();
    Ok(IndependenceReport {
        generators: generators.len(),
        generator_rank: rank(&gens),
        max_degree,
        products,
        vanishing,
        distinct: distinct.len(),
        rank: rank(&distinct),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;
    use crate::transfer::count_hat_xi;

    fn seq(lo: i64, v: &[i64]) -> ConservedSequence {
        ConservedSequence::from_values(lo, v).unwrap()
    }

    #[test]
    fn forbidden_triple_on_odd_start() {
        assert!(!seq(1, &[-1, 1, -1]).is_permitted());
        assert!(seq(0, &[-1, 1, -1]).is_permitted());
        assert!(seq(0, &[-1, -1, 1, 1, 1]).is_permitted());
        assert!(ConservedSequence::constant(Support::Interval { lo: -4, hi: 7 }, Sign::Plus).is_permitted());
    }

    #[test]
    fn hat_counts_match_transfer() {
        for l in 1..=7 {
            assert_eq!(enumerate_hat_xi(0, l).unwrap().len() as u128, count_hat_xi(0, l).unwrap());
        }
        assert!(enumerate_hat_xi(2, 2).is_err());
    }

    #[test]
    fn hat_01_is_constants() {
        let v = enumerate_hat_xi(0, 1).unwrap();
        assert_eq!(v[0].signs_string(), "---");
        assert_eq!(v[1].signs_string(), "+++");
    }

    #[test]
    fn operator_order() {
        let op = sequence_to_operator(&seq(0, &[-1, -1, -1, 1, 1]));
        let expect: Vec<Factor> = alloc::vec![
            Factor::annihilate(Site::Line(0)),
            Factor::annihilate(Site::Line(1)),
            Factor::annihilate(Site::Line(2)),
            Factor::create(Site::Line(3)),
            Factor::create(Site::Line(4)),
        ];
        assert_eq!(op.factors, expect);
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sign_sigma(0, 1), 3);
        assert_eq!(sign_sigma(0, 2), 10);
        assert_eq!(sign_sigma(3, 6), 21);
    }

    #[test]
    fn vanishing_rule_matches_matrix() {
        let lattice = Lattice::chain(0, 3).unwrap();
        let basis = enumerate_basis(&lattice, None).unwrap();
        let words = [
            seq(0, &[-1, 1, 1]).to_operator().mul(&seq(1, &[1, -1, 1]).to_operator()),
            seq(0, &[-1, 1, 1]).to_operator().mul(&seq(1, &[-1, -1, 1]).to_operator()),
            seq(0, &[-1, 1]).to_operator().mul(&seq(0, &[1, -1]).to_operator()),
        ];
        for w in &words {
            assert_eq!(w.vanishes(&lattice).unwrap(), w.to_sparse(&basis).unwrap().is_zero(), "{w:?}");
        }
    }

    #[test]
    fn ring_embedding_rules() {
        let ring = Lattice::ring(2).unwrap();
        assert!(embed(&ring, &seq(2, &[1, 1, 1, 1, 1])).is_ok());
        assert!(embed(&ring, &seq(0, &[1; 6])).is_err());
        let chain = Lattice::chain(0, 4).unwrap();
        assert!(embed(&chain, &seq(2, &[1, 1, 1, 1])).is_err());
    }

    #[test]
    fn embeddable_counts() {
        let ring = Lattice::ring(2).unwrap();
        // three even starts, arcs of 3 and 5 sites
        assert_eq!(embeddable_hat_sequences(&ring).unwrap().len(), 3 * (2 + 6));
        let chain = Lattice::chain(0, 6).unwrap();
        assert_eq!(embeddable_hat_sequences(&chain).unwrap().len(), 2 + 6 + 18 + 2 + 6 + 2);
    }

    #[test]
    fn ring_sequences_conserved_on_small_ring() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let seqs = enumerate_ring_sequences(model.lattice()).unwrap();
        assert_eq!(seqs.len(), 26);
        for f in &seqs {
            let r = conservation_check(&model, f).unwrap();
            assert!(r.is_conserved() && r.local_products_vanish && r.graded_q == 0, "{f}");
        }
    }

    #[test]
    fn adjoint_identity_small() {
        for f in enumerate_hat_xi(0, 2).unwrap() {
            assert!(adjoint_identity_check(&f).unwrap());
        }
    }

    #[test]
    fn rectangle_enumeration() {
        let v = enumerate_hat_rectangle(0, 2, 0, 2).unwrap();
        assert!(v.iter().all(|f| f.has_edge_conditions() && f.is_permitted()));
        assert_eq!(v.first().unwrap().signs_string(), "---------");
        assert_eq!(v.last().unwrap().signs_string(), "+++++++++");
        assert!(enumerate_hat_rectangle(0, 6, 0, 4).is_err());
    }

    #[test]
    fn single_generator_rank_one() {
        let lattice = Lattice::chain(0, 2).unwrap();
        let basis = enumerate_basis(&lattice, None).unwrap();
        let g = seq(0, &[1, 1, 1]).to_operator().to_sparse(&basis).unwrap();
        let r = independence_probe(&[g], 1).unwrap();
        assert_eq!((r.generator_rank, r.rank), (1, 1));
    }
}
