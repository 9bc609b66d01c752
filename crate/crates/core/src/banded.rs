//! Symmetric block-tridiagonal matrices with 6x6 blocks and their Cholesky
//! factorization.
//!
//! The factor of a block-tridiagonal SPD matrix is block lower-bidiagonal, so
//! factorization, solves and log-determinants are all linear in the number of
//! blocks.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix6, Vector6};

use crate::error::{Error, Result};

pub type Block = Matrix6<f64>;

/// Symmetric matrix stored as its diagonal blocks and first upper block
/// diagonal. Block `(i + 1, i)` is the transpose of `upper[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTridiagonal {
    diag: Vec<Block>,
    upper: Vec<Block>,
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<Block>, upper: Vec<Block>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("block-tridiagonal matrix needs at least one block"));
        }
        if upper.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "{} diagonal blocks need {} off-diagonal blocks, got {}",
                diag.len(),
                diag.len() - 1,
                upper.len()
            )));
        }
        for (i, d) in diag.iter().enumerate() {
            if d != &d.transpose() {
                return Err(Error::invalid(format!("diagonal block {i} is not symmetric")));
            }
        }
        Ok(BlockTridiagonal { diag, upper })
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        6 * self.diag.len()
    }

    pub fn diag(&self) -> &[Block] {
        &self.diag
    }

    pub fn upper(&self) -> &[Block] {
        &self.upper
    }

    /// Block `(i, j)`; zero outside the three central block diagonals.
    pub fn block(&self, i: usize, j: usize) -> Block {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.upper[j].transpose()
        } else {
            Block::zeros()
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_blocks();
        let mut m = DMatrix::zeros(6 * n, 6 * n);
        for i in 0..n {
            m.fixed_view_mut::<6, 6>(6 * i, 6 * i).copy_from(&self.diag[i]);
            if i + 1 < n {
                m.fixed_view_mut::<6, 6>(6 * i, 6 * i + 6).copy_from(&self.upper[i]);
                m.fixed_view_mut::<6, 6>(6 * i + 6, 6 * i).copy_from(&self.upper[i].transpose());
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n_blocks();
        assert_eq!(x.len(), 6 * n, "dimension mismatch");
        let mut y = DVector::zeros(6 * n);
        for i in 0..n {
            let mut yi = self.diag[i] * seg(x, i);
            if i + 1 < n {
                yi += self.upper[i] * seg(x, i + 1);
            }
            if i > 0 {
                yi += self.upper[i - 1].transpose() * seg(x, i - 1);
            }
            y.fixed_rows_mut::<6>(6 * i).copy_from(&yi);
        }
        y
    }

    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.mul_vec(x))
    }

    pub fn cholesky(&self) -> Result<BlockCholesky> {
        let n = self.n_blocks();
        let mut diag: Vec<Block> = Vec::with_capacity(n);
        let mut sub: Vec<Block> = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut schur = self.diag[i];
            if i > 0 {
                // L[i][i-1] = A[i][i-1] L[i-1]^-T
                let lt = diag[i - 1]
                    .solve_lower_triangular(&self.upper[i - 1])
                    .ok_or_else(|| Error::NotPositiveDefinite(format!("singular factor block {}", i - 1)))?
                    .transpose();
                schur -= lt * lt.transpose();
                sub.push(lt);
            }
            let schur = (schur + schur.transpose()) * 0.5;
            let chol = Cholesky::new(schur)
                .ok_or_else(|| Error::NotPositiveDefinite(format!("pivot block {i}")))?;
            diag.push(chol.l());
        }
        Ok(BlockCholesky { diag, sub })
    }
}

fn seg(x: &DVector<f64>, i: usize) -> Vector6<f64> {
    x.fixed_rows::<6>(6 * i).into_owned()
}

/// `A = L L^T` with `L` block lower-bidiagonal.
#[derive(Clone, Debug)]
pub struct BlockCholesky {
    diag: Vec<Block>,
    sub: Vec<Block>,
}

impl BlockCholesky {
    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    /// `L^-1 b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n_blocks();
        let mut y = DVector::zeros(6 * n);
        let mut prev = Vector6::zeros();
        for i in 0..n {
            let mut rhs = seg(b, i);
            if i > 0 {
                rhs -= self.sub[i - 1] * prev;
            }
            let yi = self.diag[i]
                .solve_lower_triangular(&rhs)
                .expect("factor blocks have positive diagonals");
            y.fixed_rows_mut::<6>(6 * i).copy_from(&yi);
            prev = yi;
        }
        y
    }

    /// `L^-T y`.
    pub fn solve_upper(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.n_blocks();
        let mut x = DVector::zeros(6 * n);
        let mut next = Vector6::zeros();
        for i in (0..n).rev() {
            let mut rhs = seg(y, i);
            if i + 1 < n {
                rhs -= self.sub[i].transpose() * next;
            }
            let xi = self.diag[i]
                .tr_solve_lower_triangular(&rhs)
                .expect("factor blocks have positive diagonals");
            x.fixed_rows_mut::<6>(6 * i).copy_from(&xi);
            next = xi;
        }
        x
    }

    /// `A^-1 b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self
            .diag
            .iter()
            .flat_map(|l| (0..6).map(move |k| l[(k, k)].ln()))
            .sum::<f64>()
    }

    /// Dense `A^-1`.
    pub fn inverse(&self) -> DMatrix<f64> {
        let dim = 6 * self.n_blocks();
        let mut inv = DMatrix::zeros(dim, dim);
        let mut e = DVector::zeros(dim);
        for j in 0..dim {
            e[j] = 1.0;
            let col = self.solve(&e);
            inv.set_column(j, &col);
            e[j] = 0.0;
        }
        // Exact symmetry.
        let t = inv.transpose();
        (inv + t) * 0.5
    }

    pub fn to_dense_factor(&self) -> DMatrix<f64> {
        let n = self.n_blocks();
        let mut l = DMatrix::zeros(6 * n, 6 * n);
        for i in 0..n {
            l.fixed_view_mut::<6, 6>(6 * i, 6 * i).copy_from(&self.diag[i]);
            if i > 0 {
                l.fixed_view_mut::<6, 6>(6 * i, 6 * i - 6).copy_from(&self.sub[i - 1]);
            }
        }
        l
    }
}
