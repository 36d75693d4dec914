use nicolai_core::fock::Parity;
use nicolai_core::{
    anticommutator, commutator, graded_commutator, Basis, Factor, FermionMonomial, Lattice, Site, SparseOperator,
};

fn ops(basis: &Basis) -> (Vec<SparseOperator<i64>>, Vec<SparseOperator<i64>>) {
    let sites: Vec<Site> = basis.lattice().sites().collect();
    let a = sites.iter().map(|&s| FermionMonomial::<i64>::annihilate(s).to_sparse(basis).unwrap()).collect();
    let c = sites.iter().map(|&s| FermionMonomial::<i64>::create(s).to_sparse(basis).unwrap()).collect();
    (a, c)
}

fn car_suite(lattice: &Lattice) {
    let basis = Basis::full(lattice);
    let id = SparseOperator::identity(basis.shape(), basis.len());
    let zero = SparseOperator::zeros(basis.shape(), basis.len());
    let (a, c) = ops(&basis);
    for i in 0..a.len() {
        for j in 0..a.len() {
            let want = if i == j { &id } else { &zero };
            assert_eq!(anticommutator(&c[i], &a[j]).unwrap(), *want, "{{a*_{i}, a_{j}}} on {}", lattice.describe());
            assert!(anticommutator(&a[i], &a[j]).unwrap().is_zero());
            assert!(anticommutator(&c[i], &c[j]).unwrap().is_zero());
        }
    }
}

#[test]
fn car_on_chains_rings_and_grids() {
    for n in 1..=8 {
        car_suite(&Lattice::chain(0, n - 1).unwrap());
    }
    car_suite(&Lattice::ring(2).unwrap());
    car_suite(&Lattice::ring(3).unwrap());
    car_suite(&Lattice::rectangle(0, 1, 0, 3).unwrap());
}

#[test]
fn number_operators_commute() {
    let lattice = Lattice::chain(0, 3).unwrap();
    let basis = Basis::full(&lattice);
    let n0 = FermionMonomial::<i64>::number(Site::Line(0)).to_sparse(&basis).unwrap();
    let n1 = FermionMonomial::<i64>::number(Site::Line(1)).to_sparse(&basis).unwrap();
    assert!(commutator(&n0, &n1).unwrap().is_zero());
}

fn all_monomials(sites: &[Site], len: usize) -> Vec<FermionMonomial> {
    let mut out = vec![FermionMonomial::identity()];
    for _ in 0..len {
        let mut next = Vec::new();
        for m in &out {
            for &s in sites {
                for f in [Factor::create(s), Factor::annihilate(s)] {
                    let mut factors = m.factors.clone();
                    factors.push(f);
                    next.push(FermionMonomial::new(1, factors));
                }
            }
        }
        out = next;
    }
    out
}

#[test]
fn adjoint_is_transpose() {
    let lattice = Lattice::chain(0, 3).unwrap();
    let basis = Basis::full(&lattice);
    let sites: Vec<Site> = lattice.sites().collect();
    for len in 1..=3 {
        for m in all_monomials(&sites, len) {
            let fwd = m.to_sparse(&basis).unwrap();
            assert_eq!(m.adjoint().to_sparse(&basis).unwrap(), fwd.transpose(), "{m:?}");
        }
    }
}

#[test]
fn balanced_monomials_keep_particle_number() {
    let lattice = Lattice::chain(0, 3).unwrap();
    let basis = Basis::full(&lattice);
    let sites: Vec<Site> = lattice.sites().collect();
    for m in all_monomials(&sites, 4) {
        if m.particle_change() != 0 {
            continue;
        }
        let op = m.to_sparse(&basis).unwrap();
        for (r, c, _) in op.entries() {
            let (r, c) = (basis.states()[r], basis.states()[c]);
            assert_eq!(r.particle_number(), c.particle_number(), "{m:?}");
        }
    }
}

#[test]
fn disjoint_odd_monomials_anticommute() {
    let lattice = Lattice::chain(0, 5).unwrap();
    let basis = Basis::full(&lattice);
    let left: Vec<Site> = (0..3).map(Site::Line).collect();
    let right: Vec<Site> = (3..6).map(Site::Line).collect();
    let odd = |ms: Vec<FermionMonomial>| -> Vec<FermionMonomial> {
        ms.into_iter().filter(|m| m.parity() == Parity::Odd).collect()
    };
    let lhs = odd([all_monomials(&left, 1), all_monomials(&left, 3)].concat());
    let rhs = odd([all_monomials(&right, 1), all_monomials(&right, 3)].concat());
    let mut nonzero_pairs = 0;
    for a in lhs.iter().step_by(3) {
        for b in rhs.iter().step_by(3) {
            let (x, y) = (a.to_sparse(&basis).unwrap(), b.to_sparse(&basis).unwrap());
            if x.is_zero() || y.is_zero() {
                continue;
            }
            nonzero_pairs += 1;
            assert!(graded_commutator(&x, &y, (Parity::Odd, Parity::Odd)).unwrap().is_zero(), "{a:?} {b:?}");
        }
    }
    assert!(nonzero_pairs > 100);
}

#[test]
fn even_and_odd_disjoint_commute() {
    let lattice = Lattice::chain(0, 3).unwrap();
    let basis = Basis::full(&lattice);
    let pair = FermionMonomial::new(1, vec![Factor::create(Site::Line(0)), Factor::annihilate(Site::Line(1))]);
    let single = FermionMonomial::<i64>::annihilate(Site::Line(3));
    let (x, y) = (pair.to_sparse(&basis).unwrap(), single.to_sparse(&basis).unwrap());
    assert!(graded_commutator(&x, &y, (Parity::Even, Parity::Odd)).unwrap().is_zero());
}
