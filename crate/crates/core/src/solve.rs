//! Sparse SPD solves for the network matrices.
//!
//! All systems here are symmetric M-matrices plus nonnegative diagonal
//! killing terms, so an LDLT factorization with fill-reducing ordering is
//! the workhorse.  A Jacobi-preconditioned conjugate gradient backs it up:
//! it is used when factorization fails and to polish solutions whose
//! refined residual is still above tolerance.

use crate::error::{Error, Result};
use sprs::{CsMat, FillInReduction, PermutationCheck, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

/// Tolerances for the iterative fallback and the acceptance of a direct
/// solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative residual target, `||Ax - b|| <= rel_tol * ||b||`.
    pub rel_tol: f64,
    /// Iteration cap for the conjugate gradient fallback.
    pub max_iter: usize,
    /// Skip the factorization and always use conjugate gradients.
    pub force_cg: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rel_tol: 1e-12, max_iter: 50_000, force_cg: false }
    }
}

/// A factorized (or CG-backed) symmetric positive definite system.
pub struct SpdSolver {
    mat: CsMat<f64>,
    factor: Option<LdlNumeric<f64, usize>>,
    opts: SolveOptions,
}

impl SpdSolver {
    pub fn new(mat: CsMat<f64>) -> Result<Self> {
        Self::with_options(mat, SolveOptions::default())
    }

    pub fn with_options(mat: CsMat<f64>, opts: SolveOptions) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::numerical(format!(
                "system matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let factor = if opts.force_cg {
            None
        } else {
            // The assembly produces exactly symmetric matrices, so skip the
            // structural check; a failed factorization falls back to CG.
            Ldl::new()
                .check_symmetry(SymmetryCheck::DontCheckSymmetry)
                .check_perm(PermutationCheck::DontCheckPerm)
                .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
                .numeric(mat.view())
                .ok()
        };
        Ok(SpdSolver { mat, factor, opts })
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.mat
    }

    /// Solve `A x = b` to the configured relative residual.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.mat.rows() {
            return Err(Error::numerical(format!(
                "rhs length {} does not match system size {}",
                rhs.len(),
                self.mat.rows()
            )));
        }
        let b_norm = norm(rhs);
        if b_norm == 0.0 {
            return Ok(vec![0.0; rhs.len()]);
        }
        let mut x = match &self.factor {
            Some(f) => {
                let mut x = f.solve(rhs);
                // One step of iterative refinement recovers the digits the
                // factorization loses on badly graded ladders.
                let r = self.residual(&x, rhs);
                let dx = f.solve(&r);
                for (xi, di) in x.iter_mut().zip(&dx) {
                    *xi += di;
                }
                x
            }
            None => vec![0.0; rhs.len()],
        };
        if norm(&self.residual(&x, rhs)) > self.opts.rel_tol * b_norm {
            x = self.solve_cg(rhs, x)?;
        }
        Ok(x)
    }

    /// Relative residual of a candidate solution.
    pub fn relative_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let b_norm = norm(rhs);
        if b_norm == 0.0 {
            return norm(&self.residual(x, rhs));
        }
        norm(&self.residual(x, rhs)) / b_norm
    }

    fn residual(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; rhs.len()];
        sprs::prod::mul_acc_mat_vec_csr(self.mat.view(), x, &mut ax);
        ax.iter().zip(rhs).map(|(a, b)| b - a).collect()
    }

    fn solve_cg(&self, rhs: &[f64], x0: Vec<f64>) -> Result<Vec<f64>> {
        let n = rhs.len();
        let inv_diag: Vec<f64> = (0..n)
            .map(|i| {
                let d = self.mat.get(i, i).copied().unwrap_or(0.0);
                if d > 0.0 {
                    1.0 / d
                } else {
                    1.0
                }
            })
            .collect();
        let mut x = x0;
        let mut r = self.residual(&x, rhs);
        let b_norm = norm(rhs);
        let target = self.opts.rel_tol * b_norm;
        if norm(&r) <= target {
            return Ok(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..self.opts.max_iter {
            let mut ap = vec![0.0; n];
            sprs::prod::mul_acc_mat_vec_csr(self.mat.view(), &p[..], &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::numerical(
                    "conjugate gradient hit a non-positive curvature direction; \
                     the system is not positive definite"
                        .to_string(),
                ));
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if norm(&r) <= target {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::numerical(format!(
            "conjugate gradient did not reach a relative residual of {} in {} iterations",
            self.opts.rel_tol, self.opts.max_iter
        )))
    }
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Multiply a CSR matrix by a dense vector.
pub fn mat_vec(mat: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; mat.rows()];
    sprs::prod::mul_acc_mat_vec_csr(mat.view(), x, &mut y);
    y
}

/// Symmetric graph-Laplacian style accumulator used by the assembly.
pub struct SymTriplets {
    tri: TriMat<f64>,
}

impl SymTriplets {
    pub fn new(n: usize) -> Self {
        SymTriplets { tri: TriMat::new((n, n)) }
    }

    /// Add a conductance edge: +c on both diagonals, -c off-diagonal.
    pub fn add_edge(&mut self, i: usize, j: usize, c: f64) {
        debug_assert!(i != j && c >= 0.0 && c.is_finite());
        if c == 0.0 {
            return;
        }
        self.tri.add_triplet(i, i, c);
        self.tri.add_triplet(j, j, c);
        self.tri.add_triplet(i, j, -c);
        self.tri.add_triplet(j, i, -c);
    }

    /// Add a grounded conductance: +c on the diagonal only.
    pub fn add_ground(&mut self, i: usize, c: f64) {
        debug_assert!(c >= 0.0 && c.is_finite());
        if c == 0.0 {
            return;
        }
        self.tri.add_triplet(i, i, c);
    }

    pub fn into_csr(self) -> CsMat<f64> {
        self.tri.to_csr()
    }
}
