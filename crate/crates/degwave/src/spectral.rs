//! Frequency-domain evidence: spectrum of the generator, spectral abscissa
//! and the energy-norm resolvent along the imaginary axis.
//!
//! The resolvent norm is taken in the discrete energy inner product: with
//! W = L L^T (Cholesky) the similarity B = L^T A L^{-T} turns the weighted
//! operator norm into the ordinary 2-norm, and
//! ||(i lambda - A)^{-1}||_W = 1 / sigma_min(i lambda - B).

use crate::error::{Error, Result};
use crate::operator::GeneratorMatrix;
use ndarray::linalg::general_mat_mul;
use ndarray::prelude::*;
use ndarray_linalg::cholesky::{Cholesky, UPLO};
use ndarray_linalg::eig::Eig;
use ndarray_linalg::triangular::{Diag, SolveTriangular};
use num_complex::Complex64;
use rayon::prelude::*;

/// Dense eigensolves are capped at this state dimension.
pub const DIMENSION_CAP: usize = 4000;

/// All eigenvalues of the generator.
pub fn spectrum(g: &GeneratorMatrix) -> Result<Vec<Complex64>> {
    if g.dim() > DIMENSION_CAP {
        return Err(Error::Capacity(format!(
            "state dimension {} exceeds the dense eigensolver cap {DIMENSION_CAP}",
            g.dim()
        )));
    }
    let (eigs, _) = g
        .matrix()
        .eig()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e}")))?;
    Ok(eigs.to_vec())
}

/// Max real part over the spectrum.
pub fn spectral_abscissa(eigs: &[Complex64]) -> f64 {
    eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// The least-damped eigenpair: eigenvalue of maximal real part and a real
/// state built from its eigenvector. Evolving this state isolates the
/// asymptotic decay rate of the semidiscrete system.
pub fn slowest_mode_state(g: &GeneratorMatrix) -> Result<(Complex64, crate::operator::StateVector)> {
    if g.dim() > DIMENSION_CAP {
        return Err(Error::Capacity(format!(
            "state dimension {} exceeds the dense eigensolver cap {DIMENSION_CAP}",
            g.dim()
        )));
    }
    let (eigs, vecs) = g
        .matrix()
        .eig()
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e}")))?;
    let best = eigs
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.re.partial_cmp(&b.re).unwrap())
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
    let v = vecs.column(best);
    let re_norm: f64 = v.iter().map(|z| z.re * z.re).sum();
    let im_norm: f64 = v.iter().map(|z| z.im * z.im).sum();
    let real: Array1<f64> = if re_norm >= im_norm {
        v.iter().map(|z| z.re).collect()
    } else {
        v.iter().map(|z| z.im).collect()
    };
    let scale = real.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let flat = real.mapv(|x| x / scale);
    Ok((eigs[best], crate::operator::StateVector::from_flat(&flat)))
}

/// Resolvent scan along the imaginary axis.
#[derive(Debug, Clone)]
pub struct ResolventScan {
    pub lambdas: Vec<f64>,
    pub norms: Vec<f64>,
    pub sup_norm: f64,
    /// Smallest kappa with norms <= kappa (1 + 1/lambda^2) over the grid
    /// (lambda = 0 excluded).
    pub bound_kappa: f64,
}

impl ResolventScan {
    /// CSV with header `lambda,resolvent_norm`.
    pub fn dump_csv(&self, mut out: impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "lambda,resolvent_norm")?;
        for (l, n) in self.lambdas.iter().zip(self.norms.iter()) {
            writeln!(out, "{l:.17e},{n:.17e}")?;
        }
        Ok(())
    }
}

/// Writes the spectrum as CSV `re,im`.
pub fn dump_spectrum_csv(eigs: &[Complex64], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "re,im")?;
    for z in eigs {
        writeln!(out, "{:.17e},{:.17e}", z.re, z.im)?;
    }
    Ok(())
}

/// Precomputed energy-norm similarity of a generator, reusable across
/// lambda evaluations.
///
/// Construction reduces B = L^T A L^{-T} to upper Hessenberg form
/// H = Q^T B Q once (orthogonal Q). Singular values are invariant under
/// the similarity, so each lambda only needs sigma_min(i lambda - H),
/// which a Givens QR of the shifted Hessenberg matrix delivers in O(n^2).
pub struct ResolventContext {
    /// Upper Hessenberg form of B = L^T A L^{-T} with W = L L^T.
    h: Array2<f64>,
}

impl ResolventContext {
    pub fn new(g: &GeneratorMatrix) -> Result<Self> {
        Ok(Self { h: reduce_to_hessenberg(similarity_transform(g)?) })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// ||(i lambda I - A)^{-1}|| in the energy norm; +infinity when the
    /// shift is (numerically) singular.
    pub fn norm_at(&self, lambda: f64) -> f64 {
        let factor = match ShiftedFactor::new(&self.h, lambda) {
            Some(f) => f,
            None => return f64::INFINITY,
        };
        match inverse_power_norm(&factor, lambda) {
            Some(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    }
}

/// B = L^T A L^{-T}: the generator conjugated into the energy inner
/// product, so the weighted resolvent norm becomes an ordinary 2-norm.
fn similarity_transform(g: &GeneratorMatrix) -> Result<Array2<f64>> {
    let w = g.energy_weight();
    let l = w
        .cholesky(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("energy weight is not SPD: {e}")))?;
    // A L^{-T} = (L^{-1} A^T)^T, via a lower-triangular solve.
    let at = g.matrix().t().to_owned();
    let z = l
        .solve_triangular(UPLO::Lower, Diag::NonUnit, &at)
        .map_err(|e| Error::Numerical(format!("triangular solve failed: {e}")))?;
    // B = L^T (A L^{-T}) = (Z L)^T.
    Ok(z.dot(&l).t().to_owned())
}

/// Orthogonal reduction to upper Hessenberg form by Householder
/// reflections, applied as rank-one updates.
fn reduce_to_hessenberg(mut a: Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let mut v: Array1<f64> = a.slice(s![k + 1.., k]).to_owned();
        let norm = v.dot(&v).sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = v.dot(&v);
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        let m = n - k - 1;
        let vcol = v.view().into_shape_with_order((m, 1)).expect("column view");
        // Left update: A[k+1.., k..] -= beta v (v^T A[k+1.., k..]).
        let w = vcol.t().dot(&a.slice(s![k + 1.., k..]));
        general_mat_mul(-beta, &vcol, &w.view(), 1.0, &mut a.slice_mut(s![k + 1.., k..]));
        // Right update: A[.., k+1..] -= beta (A[.., k+1..] v) v^T.
        let u = a.slice(s![.., k + 1..]).dot(&vcol);
        general_mat_mul(-beta, &u.view(), &vcol.t(), 1.0, &mut a.slice_mut(s![.., k + 1..]));
        // The reflected column is (alpha, 0, ..., 0) exactly.
        a[[k + 1, k]] = alpha;
        for j in k + 2..n {
            a[[j, k]] = 0.0;
        }
    }
    a
}

/// QR factorization of the shifted Hessenberg matrix i*lambda - H via
/// Givens rotations: Q M = R with R upper triangular, Q a product of
/// n-1 rotations. Solving with M and M^H then costs O(n^2) each.
struct ShiftedFactor {
    r: Array2<Complex64>,
    /// Rotation k acts on rows (k, k+1) as [[c, s], [-conj(s), c]].
    rots: Vec<(f64, Complex64)>,
}

impl ShiftedFactor {
    fn new(h: &Array2<f64>, lambda: f64) -> Option<Self> {
        let n = h.nrows();
        let mut r = Array2::<Complex64>::zeros((n, n));
        for ((i, j), &v) in h.indexed_iter() {
            if i <= j + 1 {
                r[[i, j]] = Complex64::new(-v, 0.0);
            }
        }
        for i in 0..n {
            r[[i, i]] += Complex64::new(0.0, lambda);
        }
        let mut rots = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n - 1 {
            let (c, s) = givens(r[[k, k]], r[[k + 1, k]]);
            for j in k..n {
                let a = r[[k, j]];
                let b = r[[k + 1, j]];
                r[[k, j]] = c * a + s * b;
                r[[k + 1, j]] = -s.conj() * a + c * b;
            }
            r[[k + 1, k]] = Complex64::new(0.0, 0.0);
            rots.push((c, s));
        }
        if (0..n).any(|k| r[[k, k]].norm() == 0.0) {
            return None; // exactly singular shift
        }
        Some(Self { r, rots })
    }

    /// Solves (i lambda - H) y = v, i.e. y = R^{-1} Q v.
    fn solve(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        let n = self.r.nrows();
        let mut y = v.clone();
        for (k, &(c, s)) in self.rots.iter().enumerate() {
            let a = y[k];
            let b = y[k + 1];
            y[k] = c * a + s * b;
            y[k + 1] = -s.conj() * a + c * b;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.r[[i, j]] * y[j];
            }
            y[i] = acc / self.r[[i, i]];
        }
        y
    }

    /// Solves (i lambda - H)^H z = b, i.e. z = Q^H R^{-H} b.
    fn solve_h(&self, b: &Array1<Complex64>) -> Array1<Complex64> {
        let n = self.r.nrows();
        let mut z = Array1::<Complex64>::zeros(n);
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.r[[j, i]].conj() * z[j];
            }
            z[i] = acc / self.r[[i, i]].conj();
        }
        for (k, &(c, s)) in self.rots.iter().enumerate().rev() {
            let a = z[k];
            let b = z[k + 1];
            z[k] = c * a - s * b;
            z[k + 1] = s.conj() * a + c * b;
        }
        z
    }
}

/// Complex Givens rotation with real c eliminating g: c*f + s*g = r,
/// -conj(s)*f + c*g = 0.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fa = f.norm();
    let ga = g.norm();
    if ga == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if fa == 0.0 {
        return (0.0, g.conj() / ga);
    }
    let r = fa.hypot(ga);
    (fa / r, (f / fa) * g.conj() / r)
}

/// Largest singular value of M^{-1} (= 1/sigma_min(M)) by power iteration on
/// M^{-H} M^{-1}, which is Hermitian positive definite.
fn inverse_power_norm(factor: &ShiftedFactor, seed_from: f64) -> Option<f64> {
    let n = factor.r.nrows();
    // deterministic start vector derived from the shift
    let mut state = seed_from.to_bits() ^ 0x9e37_79b9_7f4a_7c15;
    let mut v = Array1::<Complex64>::zeros(n);
    for x in v.iter_mut() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let re = ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let im = ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
        *x = Complex64::new(re, im);
    }
    normalize(&mut v)?;

    let mut mu_prev = 0.0f64;
    for it in 0..500 {
        let y = factor.solve(&v);
        let w = factor.solve_h(&y);
        // Rayleigh quotient of the Hermitian operator M^{-H}M^{-1}.
        let mu: f64 = v.iter().zip(w.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        v = w;
        normalize(&mut v)?;
        if it > 2 && (mu - mu_prev).abs() <= 1e-12 * mu.abs().max(1e-300) {
            return Some(mu.max(0.0).sqrt());
        }
        mu_prev = mu;
    }
    Some(mu_prev.max(0.0).sqrt())
}

fn normalize(v: &mut Array1<Complex64>) -> Option<()> {
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.mapv_inplace(|z| z / norm);
    Some(())
}

/// One-off resolvent norm at a single lambda.
pub fn resolvent_norm(g: &GeneratorMatrix, lambda: f64) -> Result<f64> {
    Ok(ResolventContext::new(g)?.norm_at(lambda))
}

/// Evaluates the resolvent norm over a sorted grid, in parallel, with
/// deterministic grid-order results.
pub fn scan(g: &GeneratorMatrix, grid: &[f64]) -> Result<ResolventScan> {
    if grid.is_empty() {
        return Err(Error::Configuration("resolvent scan grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Configuration("resolvent scan grid must be strictly increasing".into()));
    }
    let ctx = ResolventContext::new(g)?;
    let norms: Vec<f64> = grid.par_iter().map(|&l| ctx.norm_at(l)).collect();
    let sup_norm = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound_kappa = grid
        .iter()
        .zip(norms.iter())
        .filter(|(l, _)| **l != 0.0)
        .map(|(l, n)| n * l * l / (1.0 + l * l))
        .fold(0.0f64, f64::max);
    Ok(ResolventScan { lambdas: grid.to_vec(), norms, sup_norm, bound_kappa })
}

/// Log-spaced grid from lo to hi inclusive (both > 0).
pub fn logspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(Error::Configuration(format!(
            "logspace needs 0 < lo < hi and >= 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> = (0..points)
        .map(|i| (llo + (lhi - llo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    grid[0] = lo;
    *grid.last_mut().unwrap() = hi;
    Ok(grid)
}

/// Distance from i*lambda to the nearest computed eigenvalue.
pub fn distance_to_spectrum(eigs: &[Complex64], lambda: f64) -> f64 {
    eigs.iter()
        .map(|z| (z - Complex64::new(0.0, lambda)).norm())
        .fold(f64::INFINITY, f64::min)
}
