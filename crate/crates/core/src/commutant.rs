//! Commutants `{X : XA = AX}` and *-commutants `{X : XA = AX, XA* = A*X}` of
//! truncated operators, and the symbol / twist description of commutant
//! elements of a shift power.
//!
//! The null space of `X ↦ XA − AX` is found by singular value decomposition.
//! The map never mixes the blocks `X_IJ` between two connected components
//! `I`, `J` of the sparsity graph of `A` (for a shift power these are the
//! residue chains), so each block pair is solved on its own. Singular values
//! of the full map are exactly the union of the block singular values, so the
//! rank decision is the same as for one big decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{multiplier_matrix, power_matrix, residue_projection, shift_matrix, BasisMode, TruncatedOperator};
use crate::scalar::{c, cis, roots_of_unity, CMatrix, Complex, Real};
use crate::spaces::{residue_decompose, LaurentSeries, WeightSequence};

/// Frobenius-orthonormal basis of a commutant, with the singular values that
/// decided its dimension.
#[derive(Clone, Debug)]
pub struct CommutantBasis<T: Real> {
    pub elements: Vec<CMatrix<T>>,
    /// Singular values classified as zero, descending.
    pub singular_values: Vec<T>,
    /// Smallest singular value classified as nonzero (`None` if all vanish).
    pub smallest_kept: Option<T>,
    pub largest: T,
    pub rank_tolerance: T,
    /// `smallest_kept / max(largest dropped, ε·largest)`.
    pub gap_ratio: T,
    /// Set when the gap ratio is below 10.
    pub ill_conditioned: bool,
    /// Whether the adjoint relation was imposed too.
    pub star: bool,
}

impl<T: Real> CommutantBasis<T> {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Worst relative commutator residual `‖XA − AX‖_F / (‖A‖_F ‖X‖_F)` over
    /// the basis, including the adjoint relation for *-commutants.
    pub fn max_residual(&self, a: &CMatrix<T>) -> T {
        let a_norm = linalg::frobenius(a).max(T::min_value().unwrap_or_else(T::default_epsilon));
        let adj = a.adjoint();
        self.elements
            .iter()
            .map(|x| {
                let xn = linalg::frobenius(x);
                let mut r = linalg::frobenius(&(x * a - a * x));
                if self.star {
                    r = r.max(linalg::frobenius(&(x * &adj - &adj * x)));
                }
                r / (a_norm * xn)
            })
            .fold(T::zero(), |acc, v| acc.max(v))
    }

    /// Largest pairwise commutator `‖[X_i, X_j]‖_F` over the basis.
    pub fn max_pairwise_commutator(&self) -> T {
        let mut worst = T::zero();
        for (i, x) in self.elements.iter().enumerate() {
            for y in &self.elements[i + 1..] {
                worst = worst.max(linalg::frobenius(&linalg::commutator(x, y)));
            }
        }
        worst
    }

    pub fn is_abelian(&self, tol: T) -> bool {
        self.max_pairwise_commutator() <= tol
    }

    /// Largest distance from the span of adjoints `X_i*` and products
    /// `X_i X_j` back to the span. Zero for an algebra closed under both.
    pub fn closure_residual(&self) -> T {
        let mut worst = T::zero();
        for x in &self.elements {
            worst = worst.max(linalg::span_residual(&x.adjoint(), &self.elements));
            for y in &self.elements {
                worst = worst.max(linalg::span_residual(&(x * y), &self.elements));
            }
        }
        worst
    }
}

/// Connected components of the undirected sparsity graph of `a`.
pub fn components<T: Real>(a: &CMatrix<T>) -> Vec<Vec<usize>> {
    let d = a.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..d {
        for j in 0..d {
            let z = a[(i, j)];
            if i != j && (z.re != T::zero() || z.im != T::zero()) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for i in 0..d {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

fn submatrix<T: Real>(a: &CMatrix<T>, rows: &[usize], cols: &[usize]) -> CMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

/// `vec(X B − C X)` as a matrix acting on `vec(X)`, `X` of shape `p × q`.
fn sylvester_map<T: Real>(b: &CMatrix<T>, cm: &CMatrix<T>) -> CMatrix<T> {
    let (p, q) = (cm.nrows(), b.nrows());
    let eye_p = CMatrix::<T>::identity(p, p);
    let eye_q = CMatrix::<T>::identity(q, q);
    b.transpose().kronecker(&eye_p) - eye_q.kronecker(cm)
}

fn solve<T: Real>(a: &CMatrix<T>, tol: T, star: bool) -> Result<CommutantBasis<T>> {
    if !a.is_square() {
        return Err(Error::InvalidParameter("commutant of a non-square matrix".into()));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("rank tolerance must be positive".into()));
    }
    let d = a.nrows();
    let comps = components(a);
    let blocks: Vec<CMatrix<T>> = comps.iter().map(|idx| submatrix(a, idx, idx)).collect();

    struct Solved<T: Real> {
        rows: usize,
        cols: usize,
        values: Vec<T>,
        vectors: Vec<nalgebra::DVector<Complex<T>>>,
    }
    let mut solved = Vec::with_capacity(comps.len() * comps.len());
    for (bi, ai) in blocks.iter().enumerate() {
        for (bj, aj) in blocks.iter().enumerate() {
            let mut map = sylvester_map(aj, ai);
            if star {
                let adjoint_map = sylvester_map(&aj.adjoint(), &ai.adjoint());
                let rows = map.nrows();
                map = map.resize_vertically(rows * 2, c(T::zero()));
                map.rows_mut(rows, rows).copy_from(&adjoint_map);
            }
            let rs = linalg::right_singular(&map)?;
            solved.push((bi, bj, Solved { rows: ai.nrows(), cols: aj.nrows(), values: rs.values, vectors: rs.vectors }));
        }
    }

    let largest = solved
        .iter()
        .flat_map(|(_, _, s)| s.values.iter().copied())
        .fold(T::zero(), |acc, v| acc.max(v));
    let threshold = tol * largest;

    let mut elements = Vec::new();
    let mut dropped = Vec::new();
    let mut smallest_kept: Option<T> = None;
    for (bi, bj, s) in &solved {
        for (value, vector) in s.values.iter().zip(&s.vectors) {
            if *value <= threshold {
                dropped.push(*value);
                let block = linalg::unvectorize(vector, s.rows, s.cols);
                let mut x = CMatrix::zeros(d, d);
                for (i, &gi) in comps[*bi].iter().enumerate() {
                    for (j, &gj) in comps[*bj].iter().enumerate() {
                        x[(gi, gj)] = block[(i, j)];
                    }
                }
                elements.push(x);
            } else {
                smallest_kept = Some(smallest_kept.map_or(*value, |k: T| k.min(*value)));
            }
        }
    }
    dropped.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let floor = T::default_epsilon() * largest;
    let largest_dropped = dropped.first().copied().unwrap_or_else(T::zero).max(floor);
    let gap_ratio = match smallest_kept {
        Some(k) if largest_dropped > T::zero() => k / largest_dropped,
        _ => T::max_value().unwrap_or_else(T::one),
    };
    Ok(CommutantBasis {
        elements,
        singular_values: dropped,
        smallest_kept,
        largest,
        rank_tolerance: tol,
        gap_ratio,
        ill_conditioned: gap_ratio < T::lit(10.0),
        star,
    })
}

/// Basis of `{X : XA = AX}`; singular values below `tol · σ_max` count as zero.
pub fn commutant_basis<T: Real>(a: &TruncatedOperator<T>, tol: T) -> Result<CommutantBasis<T>> {
    solve(a.matrix(), tol, false)
}

/// Basis of `{X : XA = AX, XA* = A*X}`, the algebra whose projections are the
/// reducing projections of `A`.
pub fn star_commutant_basis<T: Real>(a: &TruncatedOperator<T>, tol: T) -> Result<CommutantBasis<T>> {
    a.require_orthonormal()?;
    solve(a.matrix(), tol, true)
}

/// Relative commutator residual of `x` against `a`.
pub fn commutator_residual<T: Real>(x: &CMatrix<T>, a: &CMatrix<T>) -> T {
    let scale = linalg::frobenius(a) * linalg::frobenius(x);
    let r = linalg::frobenius(&(x * a - a * x));
    if scale > T::zero() {
        r / scale
    } else {
        r
    }
}

/// Reads the symbols `F_i` of an element `x` (orthonormal coordinates) of the
/// commutant of the truncated `M_{z^n}`, so that `X f = Σ F_i f_i`.
///
/// The coefficient of `z^p` in `F_i` sits at `x[m+p, m] = c_p β(m+p)/β(m)` for
/// every `m ≡ i (mod n)` whose image stays in the window. It is fitted by
/// least squares over all those columns, so that entry noise is not amplified
/// by small weight ratios. Degrees run over what the lowest such column can
/// hold. Symbols come back in monomial coordinates.
pub fn extract_symbols<T: Real>(
    x: &CMatrix<T>,
    n: usize,
    w: &WeightSequence<T>,
    tol: T,
) -> Result<Vec<LaurentSeries<T>>> {
    let a = power_matrix(&shift_matrix(w)?, n)?;
    if x.nrows() != a.dim() || x.ncols() != a.dim() {
        return Err(Error::InvalidParameter("matrix does not match the weight window".into()));
    }
    let residual = commutator_residual(x, a.matrix());
    if residual > tol {
        return Err(Error::NotInCommutant(residual.as_f64()));
    }
    let window = w.window();
    let betas = w.betas();
    let mut symbols = Vec::with_capacity(n);
    for i in 0..n as i64 {
        let m0 = window.lo + (i - window.lo).rem_euclid(n as i64);
        if !window.contains(m0) {
            symbols.push(LaurentSeries::zero());
            continue;
        }
        let columns: Vec<i64> = (m0..=window.hi).step_by(n).collect();
        let series = LaurentSeries::from_pairs((window.lo - m0..=window.hi - m0).filter_map(|p| {
            let mut num = c(T::zero());
            let mut den = T::zero();
            for &m in &columns {
                if !window.contains(m + p) {
                    continue;
                }
                let (row, col) = (window.offset(m + p), window.offset(m));
                let g = betas[row] / betas[col];
                num += x[(row, col)] * g;
                den += g * g;
            }
            let z = num / den;
            (den > T::zero() && (z.re != T::zero() || z.im != T::zero())).then_some((p, z))
        }));
        symbols.push(series);
    }
    Ok(symbols)
}

/// `Σ_i M_{F_i} P_i` in orthonormal coordinates.
pub fn rebuild_from_symbols<T: Real>(symbols: &[LaurentSeries<T>], w: &WeightSequence<T>) -> Result<CMatrix<T>> {
    let n = symbols.len();
    let d = w.len();
    let mut out = CMatrix::zeros(d, d);
    for (i, f) in symbols.iter().enumerate() {
        let m = multiplier_matrix(f, w, BasisMode::Orthonormal)?;
        out += m.matrix() * residue_projection::<T>(w.window(), n, i);
    }
    Ok(out)
}

/// Coefficients `a_k(z)` of `Tf(z) = Σ_k a_k(z) f(z ω_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistCoefficients<T: Real> {
    pub a: Vec<LaurentSeries<T>>,
    pub omega: Vec<Complex<T>>,
}

impl<T: Real> TwistCoefficients<T> {
    pub fn order(&self) -> usize {
        self.a.len()
    }
}

/// Inverts `F_k = Σ_i a_i ω_i^k`: `a_i = (1/n) Σ_k F_k ω_i^{-k}`.
pub fn symbols_to_twist<T: Real>(symbols: &[LaurentSeries<T>]) -> TwistCoefficients<T> {
    let n = symbols.len();
    let omega = roots_of_unity::<T>(n);
    let inv_n = c(T::one() / T::from_usize(n.max(1)).unwrap());
    let a = (0..n)
        .map(|i| {
            symbols.iter().enumerate().fold(LaurentSeries::zero(), |acc, (k, f)| {
                acc.add(&f.scale(root_power::<T>(n, i * k, true) * inv_n))
            })
        })
        .collect();
    TwistCoefficients { a, omega }
}

/// Forward relation `F_k = Σ_i a_i ω_i^k`.
pub fn twist_to_symbols<T: Real>(twist: &TwistCoefficients<T>) -> Vec<LaurentSeries<T>> {
    let n = twist.order();
    (0..n)
        .map(|k| {
            twist
                .a
                .iter()
                .enumerate()
                .fold(LaurentSeries::zero(), |acc, (i, a)| acc.add(&a.scale(root_power(n, i * k, false))))
        })
        .collect()
}

/// `exp(±2πi·e/n)` with the exponent reduced mod `n` first.
fn root_power<T: Real>(n: usize, e: usize, inverse: bool) -> Complex<T> {
    let e = e % n.max(1);
    let theta = T::two_pi() * T::from_usize(e).unwrap() / T::from_usize(n.max(1)).unwrap();
    cis(if inverse { -theta } else { theta })
}

/// Evaluates `Σ_k a_k(z) f(z ω_k)`.
pub fn twist_apply<T: Real>(twist: &TwistCoefficients<T>, f: &LaurentSeries<T>, z: Complex<T>) -> Complex<T> {
    twist
        .a
        .iter()
        .zip(&twist.omega)
        .fold(c(T::zero()), |acc, (a, w)| acc + a.eval(z) * f.eval(z * w))
}

/// `Σ_i F_i(z) f_i(z)`, the symbol-side evaluation of `Tf(z)`.
pub fn symbols_apply<T: Real>(symbols: &[LaurentSeries<T>], f: &LaurentSeries<T>, z: Complex<T>) -> Complex<T> {
    residue_decompose(f, symbols.len())
        .iter()
        .zip(symbols)
        .fold(c(T::zero()), |acc, (part, sym)| acc + sym.eval(z) * part.eval(z))
}
