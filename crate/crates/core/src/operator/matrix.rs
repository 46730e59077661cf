use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use nalgebra_sparse::CsrMatrix;

use super::space::ProductSpace;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64, ZERO};

/// Sparse complex operator on a [`ProductSpace`].
///
/// Storage is CSR with column indices sorted within each row and no stored
/// zeros, so two equal computations always produce identical structures.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    space: Arc<ProductSpace>,
    entries: CsrMatrix<C64>,
    hermitian_hint: Option<bool>,
}

impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.entries == other.entries
    }
}

fn same_space(a: &Arc<ProductSpace>, b: &Arc<ProductSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl OperatorMatrix {
    pub fn zeros(space: &Arc<ProductSpace>) -> Self {
        let n = space.total_dim();
        OperatorMatrix {
            space: space.clone(),
            entries: CsrMatrix::zeros(n, n),
            hermitian_hint: Some(true),
        }
    }

    pub fn identity(space: &Arc<ProductSpace>) -> Self {
        let n = space.total_dim();
        OperatorMatrix {
            space: space.clone(),
            entries: CsrMatrix::identity(n),
            hermitian_hint: Some(true),
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed in
    /// input order and exact zeros are dropped.
    pub fn from_triplets(
        space: &Arc<ProductSpace>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let n = space.total_dim();
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = t.iter().find(|(r, c, _)| *r >= n || *c >= n) {
            return Err(Error::ShapeMismatch {
                rows: r + 1,
                cols: c + 1,
                dim: n,
            });
        }
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Ok(Self::from_sorted_unique(space, merged))
    }

    fn from_sorted_unique(space: &Arc<ProductSpace>, triplets: Vec<(usize, usize, C64)>) -> Self {
        let n = space.total_dim();
        let mut offsets = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if v == ZERO {
                continue;
            }
            offsets[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..n {
            offsets[r + 1] += offsets[r];
        }
        let entries = CsrMatrix::try_from_csr_data(n, n, offsets, cols, vals)
            .expect("sorted unique triplets form valid CSR");
        OperatorMatrix {
            space: space.clone(),
            entries,
            hermitian_hint: None,
        }
    }

    pub fn from_dense(space: &Arc<ProductSpace>, m: &CMat) -> Result<Self> {
        let n = space.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::ShapeMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                dim: n,
            });
        }
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = m[(r, c)];
                if v != ZERO {
                    t.push((r, c, v));
                }
            }
        }
        Ok(Self::from_sorted_unique(space, t))
    }

    pub fn space(&self) -> &Arc<ProductSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn entries(&self) -> &CsrMatrix<C64> {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.nnz()
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    /// Marks the operator Hermitian after checking the residual bound.
    pub fn with_hermitian_hint(mut self, what: &'static str) -> Result<Self> {
        let residual = self.hermiticity_residual();
        if residual > 1e-12 {
            return Err(Error::NotHermitian { what, residual });
        }
        self.hermitian_hint = Some(true);
        Ok(self)
    }

    pub fn to_dense(&self) -> CMat {
        let n = self.dim();
        let mut m = CMat::zeros(n, n);
        for (r, c, v) in self.entries.triplet_iter() {
            m[(r, c)] = *v;
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries
            .get_entry(r, c)
            .map(|e| e.into_value())
            .unwrap_or(ZERO)
    }

    /// Stored entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        self.entries
            .triplet_iter()
            .map(|(r, c, v)| (r, c, *v))
            .collect()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    fn wrap(&self, m: CsrMatrix<C64>, hint: Option<bool>) -> Self {
        let t: Vec<_> = m.triplet_iter().map(|(r, c, v)| (r, c, *v)).collect();
        let mut out = Self::from_sorted_unique(&self.space, t);
        out.hermitian_hint = hint;
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let hint = both_hermitian(self, other);
        Ok(self.wrap(&self.entries + &other.entries, hint))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let hint = both_hermitian(self, other);
        Ok(self.wrap(&self.entries - &other.entries, hint))
    }

    pub fn scale(&self, s: C64) -> Self {
        let hint = match self.hermitian_hint {
            Some(true) if s.im == 0.0 => Some(true),
            _ => None,
        };
        self.wrap(&self.entries * s, hint)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(linalg::re(s))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.wrap(&self.entries * &other.entries, None))
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.entries.transpose();
        t.values_mut().iter_mut().for_each(|v| *v = v.conj());
        OperatorMatrix {
            space: self.space.clone(),
            entries: t,
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_add(&other.try_mul(self)?)
    }

    pub fn norm_max(&self) -> f64 {
        self.entries
            .values()
            .iter()
            .fold(0.0, |acc, v| acc.max(v.norm()))
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries
            .values()
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max|M - M^dagger|` relative to `max(1, max|M|)`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.entries - &self.adjoint().entries;
        let r = d.values().iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        r / self.norm_max().max(1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Largest entry of `self - other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.norm_max())
    }

    /// Largest entry of `self - other` restricted to rows and columns in `idx`.
    pub fn max_diff_on(&self, other: &Self, idx: &[usize]) -> Result<f64> {
        let d = self.try_sub(other)?;
        let mut keep = vec![false; self.dim()];
        idx.iter().for_each(|&i| keep[i] = true);
        Ok(d.entries
            .triplet_iter()
            .filter(|(r, c, _)| keep[*r] && keep[*c])
            .fold(0.0, |acc, (_, _, v)| acc.max(v.norm())))
    }

    /// Dense restriction to the rows/columns listed in `idx`.
    pub fn restrict_dense(&self, idx: &[usize]) -> CMat {
        let full = self.to_dense();
        CMat::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])])
    }

    /// Adds `s * 1`.
    pub fn shift(&self, s: f64) -> Self {
        let id = Self::identity(&self.space);
        self.try_add(&id.scale_re(s)).expect("same space")
    }
}

fn both_hermitian(a: &OperatorMatrix, b: &OperatorMatrix) -> Option<bool> {
    match (a.hermitian_hint, b.hermitian_hint) {
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

// Builder-style operators. These panic on mismatched spaces; library code
// uses the fallible methods.

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::try_add(self, rhs).expect("operators on different spaces")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::try_sub(self, rhs).expect("operators on different spaces")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix::try_mul(self, rhs).expect("operators on different spaces")
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale_re(rhs)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_re(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: Self) -> OperatorMatrix {
                $tr::$f(&self, &rhs)
            }
        }
        impl $tr<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                $tr::$f(&self, rhs)
            }
        }
        impl $tr<OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $f(self, rhs: OperatorMatrix) -> OperatorMatrix {
                $tr::$f(self, &rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Mul<f64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale_re(rhs)
    }
}

impl Mul<C64> for OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Neg for OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale_re(-1.0)
    }
}

impl AddAssign<&OperatorMatrix> for OperatorMatrix {
    fn add_assign(&mut self, rhs: &OperatorMatrix) {
        *self = &*self + rhs;
    }
}

impl AddAssign for OperatorMatrix {
    fn add_assign(&mut self, rhs: OperatorMatrix) {
        *self = &*self + &rhs;
    }
}

impl SubAssign<&OperatorMatrix> for OperatorMatrix {
    fn sub_assign(&mut self, rhs: &OperatorMatrix) {
        *self = &*self - rhs;
    }
}

impl SubAssign for OperatorMatrix {
    fn sub_assign(&mut self, rhs: OperatorMatrix) {
        *self = &*self - &rhs;
    }
}
