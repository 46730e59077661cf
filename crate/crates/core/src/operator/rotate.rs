use nalgebra::DVector;

use super::matrix::OperatorMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, CMat, C64};

/// Dense `e^S` for anti-Hermitian `S`, via the spectral decomposition of the
/// Hermitian matrix `iS`.
pub fn unitary_from_generator(s: &CMat) -> Result<CMat> {
    let residual = max_abs(&(s + s.adjoint())) / max_abs(s).max(1.0);
    if residual > 1e-10 {
        return Err(Error::NotAntiHermitian { residual });
    }
    let k = s * C64::new(0.0, 1.0);
    let (vals, w) = eigh(&k);
    let phases = DVector::from_iterator(vals.len(), vals.iter().map(|&l| C64::new(0.0, -l).exp()));
    Ok(&w * CMat::from_diagonal(&phases) * w.adjoint())
}

/// `e^S H e^{-S}` evaluated densely.
pub fn matrix_exponential_rotate(s: &OperatorMatrix, h: &OperatorMatrix) -> Result<OperatorMatrix> {
    if s.space() != h.space() {
        return Err(Error::SpaceMismatch);
    }
    let u = unitary_from_generator(&s.to_dense())?;
    let out = &u * h.to_dense() * u.adjoint();
    OperatorMatrix::from_dense(h.space(), &out)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::linalg::{eigvalsh, max_abs_diff, re};
    use crate::operator::{build_ladder, build_number, FactorSpec, ProductSpace};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let m = CMat::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&m + m.adjoint()) * re(0.5)
    }

    #[test]
    fn zero_generator_is_identity() {
        let sp = Arc::new(ProductSpace::new(vec![FactorSpec::qudit("q", 3)]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = OperatorMatrix::from_dense(&sp, &random_hermitian(&mut rng, 3)).unwrap();
        let out = matrix_exponential_rotate(&OperatorMatrix::zeros(&sp), &h).unwrap();
        assert!(out.max_diff(&h).unwrap() < 1e-15);
    }

    #[test]
    fn preserves_spectrum() {
        let sp = Arc::new(ProductSpace::new(vec![FactorSpec::qudit("q", 8)]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 8);
            let s = random_hermitian(&mut rng, 8) * C64::new(0.0, 1.0);
            let hm = OperatorMatrix::from_dense(&sp, &h).unwrap();
            let sm = OperatorMatrix::from_dense(&sp, &s).unwrap();
            let out = matrix_exponential_rotate(&sm, &hm).unwrap();
            assert!(max_abs_diff(&eigvalsh(&h), &eigvalsh(&out.to_dense())) < 1e-10);
        }
    }

    #[test]
    fn rejects_hermitian_generator() {
        let sp = Arc::new(ProductSpace::new(vec![FactorSpec::qudit("q", 2)]).unwrap());
        let s = OperatorMatrix::identity(&sp);
        assert!(matches!(
            matrix_exponential_rotate(&s, &s),
            Err(Error::NotAntiHermitian { .. })
        ));
    }

    #[test]
    fn displacement_diagonalizes_linear_boson() {
        let (wr, g) = (1.0, 0.05);
        let sp = Arc::new(ProductSpace::new(vec![FactorSpec::boson("a", 30)]).unwrap());
        let a = build_ladder(&sp, "a").unwrap();
        let ad = a.adjoint();
        let h = &build_number(&sp, "a").unwrap() * wr + &(&a + &ad) * g;
        let s = &(&ad - &a) * (g / wr);
        let out = matrix_exponential_rotate(&s, &h).unwrap().to_dense();
        // Displacement leaks at the truncation edge; stay well inside it.
        for r in 0..10 {
            for c in 0..10 {
                if r != c {
                    assert!(out[(r, c)].norm() < 1e-10, "({r},{c}) {}", out[(r, c)]);
                }
            }
            let want = wr * r as f64 - g * g / wr;
            assert!((out[(r, r)].re - want).abs() < 1e-10);
        }
    }
}
