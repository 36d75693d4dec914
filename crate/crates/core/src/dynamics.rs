//! Spectra, long-time averages and the Mazur gap.
//!
//! Everything here is dense linear algebra on small systems. Diagonalization
//! runs block by block over particle-number sectors whenever the operator
//! conserves particle number; degenerate eigenvalues are merged into global
//! energy clusters, and the cluster projectors define the dephasing map.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::charges::ConservedSequence;
use crate::error::{Error, Result};
use crate::fock::{BasisState, Scalar};
use crate::groundstates::{enumerate_ground_configs, Configuration};
use crate::model::Model;
use crate::sparse::{commutator, SparseOperator};

/// Relative tolerance for merging eigenvalues into one energy cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Largest dimension accepted by the dense routines.
pub const MAX_DENSE_DIM: usize = 4096;

/// Eigen-decomposition of one particle-number block.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    /// Particle number of the block, when the operator conserves it.
    pub sector: Option<usize>,
    /// Basis indices spanned by the block.
    pub indices: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in block coordinates.
    pub vectors: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub dim: usize,
    pub sectors: Vec<SectorSpectrum>,
    /// Energy of each cluster, ascending.
    pub cluster_energies: Vec<f64>,
    /// Cluster index of each eigenpair, in sector-major order.
    pub labels: Vec<usize>,
    /// Absolute merging tolerance actually used.
    pub tolerance: f64,
    /// Largest intra-cluster spread.
    pub max_spread: f64,
    /// Smallest gap between consecutive clusters (infinite with one cluster).
    pub min_gap: f64,
    /// Largest residual `||Hv - lambda v||` over all eigenpairs.
    pub max_residual: f64,
}

impl Spectrum {
    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sectors.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_energies.len()
    }

    /// Multiplicity of each cluster.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = alloc::vec![0; self.cluster_energies.len()];
        for &l in &self.labels {
            m[l] += 1;
        }
        m
    }

    /// Number of eigenvalues within the tolerance of `energy`.
    pub fn multiplicity_near(&self, energy: f64) -> usize {
        self.eigenvalues().iter().filter(|&&e| (e - energy).abs() <= self.tolerance).count()
    }

    /// Intra-cluster spread is at least three orders of magnitude below the
    /// smallest inter-cluster gap.
    pub fn gap_ratio_ok(&self) -> bool {
        self.max_spread * 1e3 < self.min_gap
    }

    /// Full orthogonal eigenvector matrix, columns in sector-major order.
    pub fn eigenvector_matrix(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.dim, self.dim);
        let mut col = 0;
        for s in &self.sectors {
            for j in 0..s.eigenvalues.len() {
                for (k, &i) in s.indices.iter().enumerate() {
                    v[(i, col)] = s.vectors[(k, j)];
                }
                col += 1;
            }
        }
        v
    }

    /// Eigenvalues in sector-major order, matching [`Spectrum::eigenvector_matrix`].
    pub fn ordered_eigenvalues(&self) -> Vec<f64> {
        self.sectors.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect()
    }

    /// Projector onto cluster `c`.
    pub fn projector(&self, c: usize) -> DMatrix<f64> {
        let v = self.eigenvector_matrix();
        let cols: Vec<usize> = (0..self.dim).filter(|&j| self.labels[j] == c).collect();
        let vc = v.select_columns(&cols);
        &vc * vc.transpose()
    }

    /// `(sector, eigenvalue, multiplicity)` rows, sorted by sector then energy.
    pub fn sector_table(&self) -> Vec<(Option<usize>, f64, usize)> {
        let mut rows = Vec::new();
        for s in &self.sectors {
            let mut vals = s.eigenvalues.clone();
            vals.sort_by(f64::total_cmp);
            let mut i = 0;
            while i < vals.len() {
                let mut j = i + 1;
                while j < vals.len() && vals[j] - vals[i] <= self.tolerance {
                    j += 1;
                }
                let mean = vals[i..j].iter().sum::<f64>() / (j - i) as f64;
                rows.push((s.sector, mean, j - i));
                i = j;
            }
        }
        rows
    }
}

fn blocks<T: Scalar>(h: &SparseOperator<T>) -> Vec<(Option<usize>, Vec<usize>)> {
    let shape = h.shape();
    if shape.sector.is_some() {
        return alloc::vec![(shape.sector, (0..h.dim()).collect())];
    }
    let n = |i: usize| BasisState(i as u64).particle_number() as usize;
    if h.entries().any(|(r, c, _)| n(r) != n(c)) {
        return alloc::vec![(None, (0..h.dim()).collect())];
    }
    (0..=shape.sites)
        .map(|k| (Some(k), (0..h.dim()).filter(|&i| n(i) == k).collect::<Vec<_>>()))
        .filter(|(_, idx)| !idx.is_empty())
        .collect()
}

fn sorted_pairs(eig: SymmetricEigen<f64, nalgebra::Dyn>, shift: f64) -> (Vec<f64>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    (order.iter().map(|&j| eig.eigenvalues[j] - shift).collect(), eig.eigenvectors.select_columns(&order))
}

fn max_residual(block: &DMatrix<f64>, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    let r = block * vectors - vectors * DMatrix::from_diagonal(&DVector::from_column_slice(values));
    let n = vectors.ncols();
    // a non-orthonormal basis would corrupt the projectors even with small residuals
    let ortho = (vectors.transpose() * vectors - DMatrix::<f64>::identity(n, n)).amax() * block.amax().max(1.0);
    (0..r.ncols()).map(|j| r.column(j).norm()).fold(ortho, f64::max)
}

/// Cyclic Jacobi rotations: slow but unconditionally convergent.
fn jacobi_eigen(block: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = block.nrows();
    let mut a = block.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.amax().max(1.0);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum();
        if libm::sqrt(off) <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    (order.iter().map(|&i| a[(i, i)]).collect(), v.select_columns(&order))
}

/// Sorted eigenpairs and the worst residual. nalgebra's implicit QR
/// occasionally returns wrong vectors on highly degenerate integer blocks, so
/// bad results are retried on shifted copies and finally by Jacobi.
fn symmetric_eigen(block: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, f64) {
    let n = block.nrows();
    let tol = 1e-10 * block.amax().max(1.0);
    let mut best: Option<(Vec<f64>, DMatrix<f64>, f64)> = None;
    for shift in [0.0, 0.618_033_988_749_895, -1.414_213_562_373_095] {
        let shifted = block + DMatrix::<f64>::identity(n, n) * shift;
        let (values, vectors) = sorted_pairs(SymmetricEigen::new(shifted), shift);
        let r = max_residual(block, &values, &vectors);
        if r <= tol {
            return (values, vectors, r);
        }
        if best.as_ref().map_or(true, |b| r < b.2) {
            best = Some((values, vectors, r));
        }
    }
    let (values, vectors) = jacobi_eigen(block);
    let r = max_residual(block, &values, &vectors);
    match best {
        Some(b) if b.2 < r => b,
        _ => (values, vectors, r),
    }
}

/// Dense symmetric eigendecomposition, block by block.
pub fn diagonalize<T: Scalar>(h: &SparseOperator<T>) -> Result<Spectrum> {
    if h.dim() > MAX_DENSE_DIM {
        return Err(Error::TooLarge { sites: h.shape().sites, limit: MAX_DENSE_DIM });
    }
    let hf = h.to_f64();
    let asym = hf.sub(&hf.transpose())?.max_abs();
    if asym > 1e-12 * hf.max_abs().max(1.0) {
        return Err(Error::NotSymmetric);
    }
    let mut sectors = Vec::new();
    let mut max_residual = 0.0f64;
    let mut norm = 0.0f64;
    for (sector, indices) in blocks(h) {
        let block = h.block(&indices);
        let (eigenvalues, vectors, residual) = symmetric_eigen(&block);
        max_residual = max_residual.max(residual);
        norm = eigenvalues.iter().fold(norm, |m, &e| m.max(e.abs()));
        sectors.push(SectorSpectrum { sector, indices, eigenvalues, vectors });
    }
    if max_residual > 1e-8 * norm.max(1.0) {
        return Err(Error::Numeric(format!("eigenpair residual {max_residual:e} exceeds tolerance")));
    }
    let tolerance = CLUSTER_TOLERANCE * norm.max(1.0);
    let all: Vec<(f64, usize)> = {
        let mut v: Vec<(f64, usize)> = sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().copied())
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let mut labels = alloc::vec![0; all.len()];
    let mut cluster_energies = Vec::new();
    let mut max_spread = 0.0f64;
    let mut min_gap = f64::INFINITY;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].0 - all[end - 1].0 <= tolerance {
            end += 1;
        }
        let c = cluster_energies.len();
        let members = &all[start..end];
        cluster_energies.push(members.iter().map(|m| m.0).sum::<f64>() / members.len() as f64);
        max_spread = max_spread.max(members[members.len() - 1].0 - members[0].0);
        if end < all.len() {
            min_gap = min_gap.min(all[end].0 - all[end - 1].0);
        }
        for &(_, i) in members {
            labels[i] = c;
        }
        start = end;
    }
    Ok(Spectrum {
        dim: h.dim(),
        sectors,
        cluster_energies,
        labels,
        tolerance,
        max_spread,
        min_gap,
        max_residual,
    })
}

/// `sum_E P_E A P_E`: the infinite-time average of the Heisenberg evolution.
pub fn dephase(a: &DMatrix<f64>, s: &Spectrum) -> Result<DMatrix<f64>> {
    if a.nrows() != s.dim || a.ncols() != s.dim {
        return Err(Error::BasisMismatch);
    }
    let v = s.eigenvector_matrix();
    let mut t = v.transpose() * a * &v;
    for i in 0..s.dim {
        for j in 0..s.dim {
            if s.labels[i] != s.labels[j] {
                t[(i, j)] = 0.0;
            }
        }
    }
    Ok(&v * t * v.transpose())
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateKind {
    Trace,
    Gibbs(f64),
    Pure,
}

/// A density matrix together with how it was built.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub kind: StateKind,
    pub density: DMatrix<f64>,
}

impl ThermalState {
    /// `1 / dim`.
    pub fn trace(dim: usize) -> Self {
        ThermalState { kind: StateKind::Trace, density: DMatrix::identity(dim, dim) / dim as f64 }
    }

    /// `exp(-beta H) / Z`, built in the eigenbasis.
    pub fn gibbs(s: &Spectrum, beta: f64) -> Self {
        let v = s.eigenvector_matrix();
        let d = DMatrix::from_diagonal(&DVector::from_vec(gibbs_weights(s, beta)));
        ThermalState { kind: StateKind::Gibbs(beta), density: &v * d * v.transpose() }
    }

    /// `|psi><psi|` for a normalized copy of `psi`.
    pub fn pure(psi: &DVector<f64>) -> Self {
        let p = psi / psi.norm();
        ThermalState { kind: StateKind::Pure, density: &p * p.transpose() }
    }

    /// Largest entry of `[rho, H]` measured between different energy clusters.
    pub fn invariance_defect(&self, s: &Spectrum) -> f64 {
        let v = s.eigenvector_matrix();
        let t = v.transpose() * &self.density * &v;
        let mut worst = 0.0f64;
        for i in 0..s.dim {
            for j in 0..s.dim {
                if s.labels[i] != s.labels[j] {
                    worst = worst.max(t[(i, j)].abs());
                }
            }
        }
        worst
    }

    pub fn expectation(&self, a: &DMatrix<f64>) -> f64 {
        (&self.density * a).trace()
    }
}

/// `Tr(rho A* D(A)) - |Tr(rho A)|^2` for real `A`.
pub fn mazur_gap(a: &DMatrix<f64>, state: &ThermalState, s: &Spectrum) -> Result<f64> {
    if state.invariance_defect(s) > 1e-10 {
        return Err(Error::NotInvariant);
    }
    let d = dephase(a, s)?;
    let mean = state.expectation(a);
    Ok(state.expectation(&(a.transpose() * d)) - mean * mean)
}

/// `Q(f) + Q(f)*` as a dense matrix on the model's basis.
pub fn hermitian_charge(model: &Model, f: &ConservedSequence) -> Result<DMatrix<f64>> {
    let q = f.to_operator().to_sparse(&model.basis)?.to_dense();
    Ok(&q + q.transpose())
}

/// Gram-matrix rank of a set of dense matrices, viewed as vectors.
pub fn span_rank(mats: &[DMatrix<f64>]) -> usize {
    let n = mats.len();
    if n == 0 {
        return 0;
    }
    let g = DMatrix::from_fn(n, n, |i, j| mats[i].dot(&mats[j]));
    let eig = SymmetricEigen::new(g);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    eig.eigenvalues.iter().filter(|&&v| v > top * 1e-10 * n as f64).count()
}

#[derive(Clone, Debug)]
pub struct GapEntry {
    pub label: String,
    pub trace_gap: f64,
    /// `Tr(A^2) / dim`, the trace-state prediction for a traceless invariant `A`.
    pub second_moment: f64,
    pub gibbs_gaps: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct ErgodicityReport {
    pub betas: Vec<f64>,
    pub entries: Vec<GapEntry>,
    /// Dimension of the span of the identity and the invariant generators.
    pub invariant_rank: usize,
    /// Gap of `|g><g'| + |g'><g|` in the pure classical ground state `g`.
    pub ground_witness: Option<f64>,
}

impl ErgodicityReport {
    /// Smallest gap over all generators and states.
    pub fn min_gap(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| core::iter::once(e.trace_gap).chain(e.gibbs_gaps.iter().map(|g| g.1)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn non_ergodic(&self) -> bool {
        self.invariant_rank >= 2 && self.min_gap() > 1e-10
    }
}

/// Mazur gaps of a symmetric `A` for states diagonal in the eigenbasis, with
/// eigenbasis weights `weights[k][i]` (sector-major order).
///
/// In the eigenbasis `D(A)` keeps the entries inside one cluster, so
/// `Tr(rho A D(A)) = sum_i w_i sum_{j ~ i} A_ij^2`.
pub fn diagonal_state_gaps(a: &DMatrix<f64>, s: &Spectrum, weights: &[Vec<f64>]) -> Result<Vec<f64>> {
    if a.nrows() != s.dim || a.ncols() != s.dim {
        return Err(Error::BasisMismatch);
    }
    // generators are monomials plus adjoints, so a sparse pass is far cheaper
    // than a dense V^T A V
    let nonzeros: Vec<(usize, usize, f64)> = (0..s.dim)
        .flat_map(|j| (0..s.dim).map(move |i| (i, j)))
        .filter_map(|(i, j)| {
            let x = a[(i, j)];
            (x != 0.0).then_some((i, j, x))
        })
        .collect();
    let v = s.eigenvector_matrix();
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); s.cluster_count()];
    for (i, &c) in s.labels.iter().enumerate() {
        members[c].push(i);
    }
    let mut diag = alloc::vec![0.0f64; s.dim];
    let mut inner = alloc::vec![0.0f64; s.dim];
    for cols in members.iter().filter(|c| !c.is_empty()) {
        let vc = v.select_columns(cols);
        let mut avc = DMatrix::zeros(s.dim, cols.len());
        for &(i, j, x) in &nonzeros {
            for k in 0..cols.len() {
                avc[(i, k)] += x * vc[(j, k)];
            }
        }
        let t = vc.transpose() * avc;
        for (k, &i) in cols.iter().enumerate() {
            diag[i] = t[(k, k)];
            inner[i] = t.column(k).norm_squared();
        }
    }
    Ok(weights
        .iter()
        .map(|w| {
            let mean: f64 = (0..s.dim).map(|i| w[i] * diag[i]).sum();
            (0..s.dim).map(|i| w[i] * inner[i]).sum::<f64>() - mean * mean
        })
        .collect())
}

/// Eigenbasis weights of the Gibbs state, sector-major order.
pub fn gibbs_weights(s: &Spectrum, beta: f64) -> Vec<f64> {
    let e = s.ordered_eigenvalues();
    let e0 = e.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|&x| libm::exp(-beta * (x - e0))).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub fn ergodicity_report(model: &Model, generators: &[ConservedSequence], betas: &[f64]) -> Result<ErgodicityReport> {
    let s = diagonalize(&model.h)?;
    let dim = s.dim;
    let mut weights = alloc::vec![alloc::vec![1.0 / dim as f64; dim]];
    weights.extend(betas.iter().map(|&b| gibbs_weights(&s, b)));
    let mut entries = Vec::new();
    let mut invariant = alloc::vec![DMatrix::<f64>::identity(dim, dim)];
    for f in generators {
        let a = hermitian_charge(model, f)?;
        let gaps = diagonal_state_gaps(&a, &s, &weights)?;
        let q = f.to_operator().to_sparse(&model.basis)?;
        if commutator(&model.h, &q.add(&q.adjoint())?)?.is_zero() {
            invariant.push(a.clone());
        }
        entries.push(GapEntry {
            label: format!("{f}"),
            trace_gap: gaps[0],
            second_moment: a.norm_squared() / dim as f64,
            gibbs_gaps: betas.iter().copied().zip(gaps[1..].iter().copied()).collect(),
        });
    }
    let invariant_rank = span_rank(&invariant);
    let grounds = enumerate_ground_configs(model.lattice())?;
    let ground_witness = match grounds.as_slice() {
        [g, g2, ..] => Some(ground_witness(model, g, g2, &s)?),
        _ => None,
    };
    Ok(ErgodicityReport { betas: betas.to_vec(), entries, invariant_rank, ground_witness })
}

/// Mazur gap of `|g><g'| + |g'><g|` in the pure state `|g>`.
pub fn ground_witness(model: &Model, g: &Configuration, g2: &Configuration, s: &Spectrum) -> Result<f64> {
    let idx = |c: &Configuration| model.basis.index_of(c.state()).ok_or(Error::BasisMismatch);
    let (i, j) = (idx(g)?, idx(g2)?);
    let mut psi = DVector::zeros(s.dim);
    psi[i] = 1.0;
    let state = ThermalState::pure(&psi);
    let mut a = DMatrix::zeros(s.dim, s.dim);
    a[(i, j)] = 1.0;
    a[(j, i)] = 1.0;
    mazur_gap(&a, &state, s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoResonanceReport {
    pub configs: usize,
    /// Largest entry of `H_hop |g>` over all ground configurations.
    pub max_residual: i64,
    pub failures: usize,
}

/// `H_hop |g> = 0` for every classical ground configuration.
pub fn no_resonance_check(model: &Model) -> Result<NoResonanceReport> {
    let hop = model.h_hop()?;
    let grounds = enumerate_ground_configs(model.lattice())?;
    let mut max_residual = 0;
    let mut failures = 0;
    for g in &grounds {
        let col = model.basis.index_of(g.state()).ok_or(Error::BasisMismatch)?;
        let worst = hop.column(col).iter().map(|&(_, v)| v.abs()).max().unwrap_or(0);
        if worst != 0 {
            failures += 1;
        }
        max_residual = max_residual.max(worst);
    }
    Ok(NoResonanceReport { configs: grounds.len(), max_residual, failures })
}

/// `e^{iHt} A e^{-iHt}` through the eigenbasis.
pub fn evolve(a: &DMatrix<f64>, s: &Spectrum, t: f64) -> Result<DMatrix<Complex<f64>>> {
    if a.nrows() != s.dim {
        return Err(Error::BasisMismatch);
    }
    let v = s.eigenvector_matrix();
    let e = s.ordered_eigenvalues();
    let phase = |x: f64| Complex::new(libm::cos(x), libm::sin(x));
    let u_diag = DVector::from_iterator(e.len(), e.iter().map(|&x| phase(-x * t)));
    let vc = v.map(|x| Complex::new(x, 0.0));
    let u = &vc * DMatrix::from_diagonal(&u_diag) * vc.transpose();
    let defect = (&u * u.adjoint() - DMatrix::identity(s.dim, s.dim)).iter().fold(0.0f64, |m, z| m.max(libm::hypot(z.re, z.im)));
    if defect > 1e-8 {
        return Err(Error::Numeric(format!("propagator unitarity defect {defect:e}")));
    }
    let ac = a.map(|x| Complex::new(x, 0.0));
    Ok(u.adjoint() * ac * u)
}

/// Smallest Ritz value after `steps` Lanczos iterations with full
/// reorthogonalization, started from `start`.
pub fn lanczos_min_eigenvalue(h: &SparseOperator<f64>, start: &[f64], steps: usize) -> Result<f64> {
    let n = h.dim();
    if start.len() != n {
        return Err(Error::BasisMismatch);
    }
    let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let n0 = norm(start);
    if n0 == 0.0 {
        return Err(Error::Numeric(String::from("zero start vector")));
    }
    let mut basis: Vec<Vec<f64>> = alloc::vec![start.iter().map(|x| x / n0).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for k in 0..steps.min(n) {
        let mut w = h.apply(&basis[k]);
        let a: f64 = w.iter().zip(&basis[k]).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nb = norm(&w);
        if nb < 1e-12 || k + 1 == steps.min(n) {
            break;
        }
        beta.push(nb);
        basis.push(w.into_iter().map(|x| x / nb).collect());
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    Ok(SymmetricEigen::new(t).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use crate::lattice::Lattice;
    use crate::model::ModelSpec;

    #[test]
    fn zero_operator_single_cluster() {
        let basis = enumerate_basis(&Lattice::chain(0, 1).unwrap(), None).unwrap();
        let z = SparseOperator::<i64>::zeros(basis.shape(), basis.len());
        let s = diagonalize(&z).unwrap();
        assert_eq!(s.cluster_count(), 1);
        assert!((s.projector(0) - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn ring2_spectrum_basics() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let s = diagonalize(&model.h).unwrap();
        assert!(s.min_eigenvalue().abs() < 1e-10);
        assert!(s.multiplicity_near(0.0) >= 26);
        assert!(s.gap_ratio_ok());
        let total: usize = s.multiplicities().iter().sum();
        assert_eq!(total, 64);
    }

    #[test]
    fn identity_has_zero_gap() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let s = diagonalize(&model.h).unwrap();
        let id = DMatrix::identity(64, 64);
        let gap = mazur_gap(&id, &ThermalState::trace(64), &s).unwrap();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn non_invariant_state_rejected() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let s = diagonalize(&model.h).unwrap();
        let mut psi = DVector::zeros(64);
        psi[1] = 1.0;
        psi[2] = 1.0;
        let st = ThermalState::pure(&psi);
        let a = DMatrix::identity(64, 64);
        assert_eq!(mazur_gap(&a, &st, &s), Err(Error::NotInvariant));
    }

    #[test]
    fn fast_gaps_match_dense() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let s = diagonalize(&model.h).unwrap();
        let f = crate::charges::enumerate_hat_xi(0, 2).unwrap()[2].clone();
        let a = hermitian_charge(&model, &f).unwrap();
        let fast = diagonal_state_gaps(&a, &s, &[alloc::vec![1.0 / 64.0; 64], gibbs_weights(&s, 1.0)]).unwrap();
        let dense_trace = mazur_gap(&a, &ThermalState::trace(64), &s).unwrap();
        let dense_gibbs = mazur_gap(&a, &ThermalState::gibbs(&s, 1.0), &s).unwrap();
        assert!((fast[0] - dense_trace).abs() < 1e-12 && (fast[1] - dense_gibbs).abs() < 1e-12);
        assert!((dense_trace - a.norm_squared() / 64.0).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let model = Model::build(&ModelSpec::ring(2).unwrap()).unwrap();
        let start: Vec<f64> = (0..64).map(|i| 1.0 + (i % 7) as f64).collect();
        let l = lanczos_min_eigenvalue(&model.h.to_f64(), &start, 64).unwrap();
        assert!(l.abs() < 1e-8);
    }
}
