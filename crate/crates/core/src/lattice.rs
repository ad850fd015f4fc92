//! Reducing-subspace lattices of shift powers.
//!
//! Reducing subspaces of `A` are the ranges of the orthogonal projections in
//! its *-commutant. When that algebra is abelian it is spanned by its minimal
//! projections `P_1, …, P_d`, recovered here as the spectral projections of a
//! random self-adjoint element, and the lattice is the `2^d` sums of subsets.
//! A non-abelian *-commutant contains a full matrix block and therefore a
//! continuum of projections; only its block sizes are reported.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::commutant::{star_commutant_basis, CommutantBasis};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{power_matrix, residue_projection, shift_matrix, TruncatedOperator};
use crate::scalar::{c, CMatrix, Real};
use crate::spaces::{make_weights, SpaceKind, WeightSequence, Window};

const MAX_ATTEMPTS: usize = 5;
const MAX_MINIMAL: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Discrete,
    Continuum,
}

#[derive(Clone, Debug)]
pub struct LatticeMember<T: Real> {
    /// Bit `j` set iff minimal projection `j` is included.
    pub bitmask: u64,
    pub projection: CMatrix<T>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeDiagnostics {
    pub star_commutant_dim: usize,
    pub gap_ratio: f64,
    pub smallest_kept_singular_value: Option<f64>,
    pub largest_dropped_singular_value: f64,
    pub max_pairwise_commutator: f64,
    /// Worst of `‖P²−P‖`, `‖P−P*‖`, `‖P_iP_j‖` and `‖ΣP − I‖` over the
    /// minimal projections.
    pub projection_residual: f64,
    /// Worst commutator residual of a member against `A` and `A*`.
    pub member_residual: f64,
    pub attempts: usize,
}

#[derive(Clone, Debug)]
pub struct ReducingLattice<T: Real> {
    pub kind: LatticeKind,
    pub window: Window,
    pub minimal_projections: Vec<CMatrix<T>>,
    pub members: Vec<LatticeMember<T>>,
    pub algebra_dims: Vec<usize>,
    pub diagnostics: LatticeDiagnostics,
}

impl<T: Real> ReducingLattice<T> {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, bitmask: u64) -> Option<&LatticeMember<T>> {
        self.members.iter().find(|m| m.bitmask == bitmask)
    }
}

/// Bundles the weights, shift and shift power of one experiment. The window
/// is trimmed at the top to a multiple of `n` so that all residue classes are
/// truncated to the same range.
#[derive(Clone, Debug)]
pub struct ShiftPowerSetup<T: Real> {
    pub n: usize,
    pub requested_window: Window,
    pub weights: WeightSequence<T>,
    pub shift: TruncatedOperator<T>,
    pub power: TruncatedOperator<T>,
}

impl<T: Real> ShiftPowerSetup<T> {
    pub fn new(kind: &SpaceKind<T>, window: Window, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        let aligned = window.aligned_to(n)?;
        let weights = match kind {
            // explicit values are given for the requested window
            SpaceKind::Custom { .. } => make_weights(kind, window)?.restrict(aligned)?,
            _ => make_weights(kind, aligned)?,
        };
        let mut setup = Self::from_weights(weights, n)?;
        setup.requested_window = window;
        Ok(setup)
    }

    /// Uses the weights as given, without aligning the window.
    pub fn from_weights(weights: WeightSequence<T>, n: usize) -> Result<Self> {
        let shift = shift_matrix(&weights)?;
        let power = power_matrix(&shift, n)?;
        Ok(ShiftPowerSetup { n, requested_window: weights.window(), weights, shift, power })
    }

    pub fn window(&self) -> Window {
        self.weights.window()
    }
}

/// Residuals of the four reducing-projection identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducingReport {
    pub idempotence: f64,
    pub self_adjointness: f64,
    pub commutator: f64,
    pub adjoint_commutator: f64,
    pub tol: f64,
    pub passed: bool,
}

impl ReducingReport {
    pub fn worst(&self) -> f64 {
        self.idempotence.max(self.self_adjointness).max(self.commutator).max(self.adjoint_commutator)
    }
}

/// Reports `‖P²−P‖_F`, `‖P−P*‖_F`, `‖PA−AP‖_F`, `‖PA*−A*P‖_F`.
pub fn verify_reducing<T: Real>(p: &CMatrix<T>, a: &TruncatedOperator<T>, tol: T) -> Result<ReducingReport> {
    let adj = a.adjoint()?;
    let m = a.matrix();
    let idempotence = linalg::frobenius(&(p * p - p)).as_f64();
    let self_adjointness = linalg::frobenius(&(p - p.adjoint())).as_f64();
    let commutator = linalg::frobenius(&(p * m - m * p)).as_f64();
    let adjoint_commutator = linalg::frobenius(&(p * &adj - &adj * p)).as_f64();
    let tol = tol.as_f64();
    let worst = idempotence.max(self_adjointness).max(commutator).max(adjoint_commutator);
    Ok(ReducingReport { idempotence, self_adjointness, commutator, adjoint_commutator, tol, passed: worst <= tol })
}

enum Clustering {
    Clusters(Vec<Vec<usize>>),
    Ambiguous,
}

/// Groups sorted eigenvalues: gaps at most `tol` join, gaps of at least
/// `10·tol` split, anything in between is ambiguous. Gaps are relative to the
/// largest eigenvalue modulus.
fn cluster<T: Real>(values: &[T], tol: T) -> Clustering {
    let scale = values.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    if scale == T::zero() {
        return Clustering::Clusters(vec![(0..values.len()).collect()]);
    }
    let mut groups = vec![vec![0]];
    for j in 1..values.len() {
        let gap = (values[j] - values[j - 1]) / scale;
        if gap <= tol {
            groups.last_mut().unwrap().push(j);
        } else if gap >= tol * T::lit(10.0) {
            groups.push(vec![j]);
        } else {
            return Clustering::Ambiguous;
        }
    }
    Clustering::Clusters(groups)
}

/// Spectral projections of a random self-adjoint element of `span(basis)`,
/// retried until exactly `expected` well-separated clusters appear.
fn spectral_projections<T: Real>(
    basis: &[CMatrix<T>],
    expected: usize,
    tol: T,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<CMatrix<T>>, usize)> {
    let d = basis[0].nrows();
    for attempt in 1..=MAX_ATTEMPTS {
        let mut h = CMatrix::<T>::zeros(d, d);
        for x in basis {
            let coeff = T::lit(rng.random_range(-1.0..1.0));
            h += (x + x.adjoint()) * c(coeff * T::lit(0.5));
        }
        let (values, vectors) = linalg::hermitian_eigen(&h)?;
        let groups = match cluster(&values, tol) {
            Clustering::Clusters(g) if g.len() == expected => g,
            _ => continue,
        };
        let mut projections: Vec<CMatrix<T>> = groups
            .iter()
            .map(|g| {
                let cols = vectors.select_columns(g.iter());
                &cols * cols.adjoint()
            })
            .collect();
        // stable order: by the first basis index carried by the projection
        projections.sort_by_key(|p| (0..d).find(|&i| p[(i, i)].re > T::lit(0.5)).unwrap_or(d));
        return Ok((projections, attempt));
    }
    Err(Error::AmbiguousClustering(MAX_ATTEMPTS))
}

fn discrete<T: Real>(
    a: &TruncatedOperator<T>,
    basis: &CommutantBasis<T>,
    tol: T,
    rng: &mut ChaCha8Rng,
    mut diagnostics: LatticeDiagnostics,
) -> Result<ReducingLattice<T>> {
    let k = basis.dim();
    if k > MAX_MINIMAL {
        return Err(Error::Structure(format!("{k} minimal projections is too many to enumerate")));
    }
    let (minimal, attempts) = spectral_projections(&basis.elements, k, tol, rng)?;
    diagnostics.attempts = attempts;

    let d = a.dim();
    let mut worst = T::zero();
    let mut total = CMatrix::<T>::zeros(d, d);
    for (i, p) in minimal.iter().enumerate() {
        worst = worst.max(linalg::frobenius(&(p * p - p)));
        worst = worst.max(linalg::frobenius(&(p - p.adjoint())));
        for q in &minimal[i + 1..] {
            worst = worst.max(linalg::frobenius(&(p * q)));
        }
        total += p;
    }
    worst = worst.max(linalg::frobenius(&(total - CMatrix::<T>::identity(d, d))));
    diagnostics.projection_residual = worst.as_f64();

    let members: Vec<LatticeMember<T>> = (0..1u64 << k)
        .map(|mask| {
            let mut p = CMatrix::<T>::zeros(d, d);
            for (j, q) in minimal.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    p += q;
                }
            }
            LatticeMember { bitmask: mask, projection: p }
        })
        .collect();
    let mut member_residual = 0.0f64;
    for m in &members {
        member_residual = member_residual.max(verify_reducing(&m.projection, a, tol)?.worst());
    }
    diagnostics.member_residual = member_residual;

    Ok(ReducingLattice {
        kind: LatticeKind::Discrete,
        window: a.window(),
        minimal_projections: minimal,
        members,
        algebra_dims: vec![1; k],
        diagnostics,
    })
}

/// Block sizes `k_j` of a non-abelian *-algebra `⊕ M_{k_j}` given by a basis:
/// the center yields the central projections `Q_j`, and `dim Q_j·algebra = k_j²`.
fn block_dims<T: Real>(basis: &[CMatrix<T>], tol: T, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let k = basis.len();
    let d = basis[0].nrows();
    // Σ_i c_i [X_i, X_j] = 0 for every j
    let mut map = CMatrix::<T>::zeros(k * d * d, k);
    for (i, xi) in basis.iter().enumerate() {
        for (j, xj) in basis.iter().enumerate() {
            let comm = linalg::commutator(xi, xj);
            map.view_mut((j * d * d, i), (d * d, 1)).copy_from(&linalg::vectorize(&comm));
        }
    }
    let rs = linalg::right_singular(&map)?;
    let top = rs.values.first().copied().unwrap_or_else(T::zero);
    let center: Vec<CMatrix<T>> = rs
        .values
        .iter()
        .zip(&rs.vectors)
        .filter(|(s, _)| **s <= tol * top)
        .map(|(_, v)| {
            let mut z = CMatrix::<T>::zeros(d, d);
            for (coeff, x) in v.iter().zip(basis) {
                z += x * *coeff;
            }
            z
        })
        .collect();
    if center.is_empty() {
        return Err(Error::Structure("*-commutant has a trivial center".into()));
    }
    let (central, _) = spectral_projections(&center, center.len(), tol, rng)?;
    let mut dims = Vec::with_capacity(central.len());
    for q in &central {
        let mut block = CMatrix::<T>::zeros(d * d, k);
        for (i, x) in basis.iter().enumerate() {
            block.set_column(i, &linalg::vectorize(&(q * x)));
        }
        let s = linalg::singular_values(&block)?;
        let smax = s.first().copied().unwrap_or_else(T::zero);
        let rank = s.iter().filter(|&&v| v > tol * smax).count();
        dims.push((rank as f64).sqrt().round() as usize);
    }
    Ok(dims)
}

/// Lattice of reducing subspaces of `a` (orthonormal basis).
pub fn reducing_lattice<T: Real>(a: &TruncatedOperator<T>, tol: T, seed: u64) -> Result<ReducingLattice<T>> {
    a.require_orthonormal()?;
    let basis = star_commutant_basis(a, tol)?;
    reducing_lattice_from(a, &basis, tol, seed)
}

/// As [`reducing_lattice`], reusing an already computed *-commutant basis of `a`.
pub fn reducing_lattice_from<T: Real>(
    a: &TruncatedOperator<T>,
    basis: &CommutantBasis<T>,
    tol: T,
    seed: u64,
) -> Result<ReducingLattice<T>> {
    a.require_orthonormal()?;
    if !basis.star {
        return Err(Error::InvalidParameter("lattice needs a *-commutant basis".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_comm = basis.max_pairwise_commutator();
    let diagnostics = LatticeDiagnostics {
        star_commutant_dim: basis.dim(),
        gap_ratio: basis.gap_ratio.as_f64(),
        smallest_kept_singular_value: basis.smallest_kept.map(|v| v.as_f64()),
        largest_dropped_singular_value: basis.singular_values.first().map_or(0.0, |v| v.as_f64()),
        max_pairwise_commutator: max_comm.as_f64(),
        ..Default::default()
    };
    if max_comm <= tol {
        discrete(a, basis, tol, &mut rng, diagnostics)
    } else {
        let algebra_dims = block_dims(&basis.elements, tol, &mut rng)?;
        Ok(ReducingLattice {
            kind: LatticeKind::Continuum,
            window: a.window(),
            minimal_projections: Vec::new(),
            members: Vec::new(),
            algebra_dims,
            diagnostics: LatticeDiagnostics { attempts: 0, ..diagnostics },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueMatch {
    pub projection: usize,
    pub residue: usize,
    pub distance: f64,
}

/// Greedily pairs each minimal projection with the nearest unused residue
/// class projection (Frobenius distance).
pub fn match_minimal_to_residues<T: Real>(lattice: &ReducingLattice<T>, n: usize) -> Result<Vec<ResidueMatch>> {
    if lattice.kind != LatticeKind::Discrete {
        return Err(Error::Structure("lattice is not discrete".into()));
    }
    if lattice.minimal_projections.len() != n {
        return Err(Error::Structure(format!(
            "{} minimal projections for {n} residue classes",
            lattice.minimal_projections.len()
        )));
    }
    let residues: Vec<CMatrix<T>> = (0..n).map(|k| residue_projection(lattice.window, n, k)).collect();
    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for (i, p) in lattice.minimal_projections.iter().enumerate() {
        let (best, dist) = residues
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, r)| (k, linalg::frobenius(&(p - r)).as_f64()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or_else(|| Error::Structure(format!("projection {i} left unmatched")))?;
        used[best] = true;
        out.push(ResidueMatch { projection: i, residue: best, distance: dist });
    }
    Ok(out)
}

/// Frobenius mass of `P` outside the residue-class diagonal blocks.
pub fn off_diagonal_block_mass<T: Real>(p: &CMatrix<T>, window: Window, n: usize) -> T {
    let mut diag = CMatrix::<T>::zeros(p.nrows(), p.ncols());
    for k in 0..n {
        let r = residue_projection::<T>(window, n, k);
        diag += &r * p * &r;
    }
    linalg::frobenius(&(p - diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(kind: SpaceKind<f64>, half: i64, n: usize) -> ShiftPowerSetup<f64> {
        ShiftPowerSetup::new(&kind, Window::symmetric(half), n).unwrap()
    }

    #[test]
    fn bergman_square_has_four_members() {
        let s = setup(SpaceKind::BergmanAnnulus { r: 0.5 }, 16, 2);
        let l = reducing_lattice(&s.power, 1e-8, 7).unwrap();
        assert_eq!(l.kind, LatticeKind::Discrete);
        assert_eq!(l.minimal_projections.len(), 2);
        assert_eq!(l.member_count(), 4);
        assert!(l.diagnostics.projection_residual < 1e-8);
        assert!(l.diagnostics.member_residual < 1e-8);
        let matches = match_minimal_to_residues(&l, 2).unwrap();
        assert!(matches.iter().all(|m| m.distance < 1e-6));
    }

    #[test]
    fn shift_itself_is_irreducible() {
        let s = setup(SpaceKind::BergmanAnnulus { r: 0.5 }, 6, 1);
        let l = reducing_lattice(&s.power, 1e-8, 1).unwrap();
        assert_eq!(l.kind, LatticeKind::Discrete);
        assert_eq!(l.member_count(), 2);
        let m = match_minimal_to_residues(&l, 1).unwrap();
        assert!(m[0].distance < 1e-6);
    }

    #[test]
    fn flat_square_is_continuum() {
        let s = setup(SpaceKind::Flat, 16, 2);
        assert_eq!(s.window(), Window::new(-16, 15).unwrap());
        let l = reducing_lattice(&s.power, 1e-8, 3).unwrap();
        assert_eq!(l.kind, LatticeKind::Continuum);
        assert_eq!(l.algebra_dims, vec![2]);
        assert_eq!(l.diagnostics.star_commutant_dim, 4);
        assert!(match_minimal_to_residues(&l, 2).is_err());
    }

    #[test]
    fn verify_reducing_examples() {
        let s = setup(SpaceKind::BergmanAnnulus { r: 0.5 }, 8, 2);
        let zero = CMatrix::<f64>::zeros(16, 16);
        let rep = verify_reducing(&zero, &s.power, 1e-12).unwrap();
        assert_eq!(rep.worst(), 0.0);
        assert!(rep.passed);

        let p0 = residue_projection::<f64>(s.window(), 2, 0);
        assert!(verify_reducing(&p0, &s.power, 1e-12).unwrap().passed);

        let mut e0 = CMatrix::<f64>::zeros(16, 16);
        let i0 = s.window().offset(0);
        e0[(i0, i0)] = c(1.0);
        let rep = verify_reducing(&e0, &s.power, 1e-8).unwrap();
        assert!(!rep.passed);
        let lambda = s.power.entry(2, 0).re;
        assert!(rep.commutator >= 0.5 * lambda, "{rep:?}");
    }

    #[test]
    fn clustering_rules() {
        match cluster(&[0.0, 1e-12, 0.5, 1.0], 1e-8) {
            Clustering::Clusters(g) => assert_eq!(g, vec![vec![0, 1], vec![2], vec![3]]),
            Clustering::Ambiguous => panic!(),
        }
        assert!(matches!(cluster(&[0.0, 5e-8, 1.0], 1e-8), Clustering::Ambiguous));
    }

    #[test]
    fn lattice_is_closed_under_meet_and_join() {
        let s = setup(SpaceKind::HardyAnnulus { r: 0.5 }, 9, 3);
        let l = reducing_lattice(&s.power, 1e-8, 11).unwrap();
        assert_eq!(l.member_count(), 8);
        for a in &l.members {
            for b in &l.members {
                let meet = &a.projection * &b.projection;
                let join = &a.projection + &b.projection - &meet;
                let m = l.member(a.bitmask & b.bitmask).unwrap();
                let j = l.member(a.bitmask | b.bitmask).unwrap();
                assert!(linalg::frobenius(&(meet - &m.projection)) < 1e-8);
                assert!(linalg::frobenius(&(join - &j.projection)) < 1e-8);
                // order: a ≤ b as bitmasks iff P_a P_b = P_a
                let below = a.bitmask & b.bitmask == a.bitmask;
                let prod = linalg::frobenius(&(&a.projection * &b.projection - &a.projection)) < 1e-8;
                assert_eq!(below, prod);
            }
        }
    }

    #[test]
    fn same_seed_same_lattice() {
        let s = setup(SpaceKind::BergmanAnnulus { r: 0.3 }, 9, 3);
        let a = reducing_lattice(&s.power, 1e-8, 5).unwrap();
        let b = reducing_lattice(&s.power, 1e-8, 5).unwrap();
        for (p, q) in a.minimal_projections.iter().zip(&b.minimal_projections) {
            assert_eq!(p, q);
        }
    }
}
