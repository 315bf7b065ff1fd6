//! Dense matrix exponential by scaling and squaring around a degree-13
//! Padé approximant.

use crate::linalg::{Matrix, Scalar};
use crate::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm bound under which the [13/13] approximant reaches double precision.
const THETA13: f64 = 5.371920351148152;

pub fn dense_matrix_exp<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::NonFinite(0));
    }
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = m.scaled(T::from_real(0.5f64.powi(squarings)));

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = |k: usize| T::from_real(PADE13[k]);
    let ident = Matrix::<T>::identity(n);

    let u_inner = a6
        .scaled(b(13))
        .add(&a4.scaled(b(11)))
        .add(&a2.scaled(b(9)));
    let u_tail = a6
        .scaled(b(7))
        .add(&a4.scaled(b(5)))
        .add(&a2.scaled(b(3)))
        .add(&ident.scaled(b(1)));
    let u = a.matmul(&a6.matmul(&u_inner).add(&u_tail));

    let v_inner = a6
        .scaled(b(12))
        .add(&a4.scaled(b(10)))
        .add(&a2.scaled(b(8)));
    let v_tail = a6
        .scaled(b(6))
        .add(&a4.scaled(b(4)))
        .add(&a2.scaled(b(2)))
        .add(&ident.scaled(b(0)));
    let v = a6.matmul(&v_inner).add(&v_tail);

    let mut r = v.sub(&u).lu()?.solve_matrix(&v.add(&u))?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}
