use super::{LinalgError, Matrix};

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

// Largest 1-norm for which the degree-13 diagonal Padé approximant is
// accurate to unit roundoff (Higham 2005).
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &Matrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^{tA}` by scaling and squaring around a degree-13 Padé approximant.
pub fn mat_exp(a: &Matrix, t: f64) -> Result<Matrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let ta = a.scale(t);
    let norm = one_norm(&ta);
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = ta.scale(0.5f64.powi(squarings));

    let b = &PADE13;
    let id = Matrix::identity(n);
    let a2 = scaled.mul(&scaled);
    let a4 = a2.mul(&a2);
    let a6 = a4.mul(&a2);

    let u_inner = a6.scale(b[13]).add(&a4.scale(b[11])).add(&a2.scale(b[9]));
    let u_tail = a6
        .scale(b[7])
        .add(&a4.scale(b[5]))
        .add(&a2.scale(b[3]))
        .add(&id.scale(b[1]));
    let u = scaled.mul(&a6.mul(&u_inner).add(&u_tail));

    let v_inner = a6.scale(b[12]).add(&a4.scale(b[10])).add(&a2.scale(b[8]));
    let v_tail = a6
        .scale(b[6])
        .add(&a4.scale(b[4]))
        .add(&a2.scale(b[2]))
        .add(&id.scale(b[0]));
    let v = a6.mul(&v_inner).add(&v_tail);

    let mut r = v.sub(&u).solve(&v.add(&u))?;
    for _ in 0..squarings {
        r = r.mul(&r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Plain truncated Taylor series with its own scaling and squaring.
    fn taylor_oracle(a: &Matrix, t: f64, terms: usize) -> Matrix {
        let n = a.rows();
        let ta = a.scale(t);
        let norm = ta.inf_norm();
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as i32
        } else {
            0
        };
        let x = ta.scale(0.5f64.powi(s));
        let mut sum = Matrix::identity(n);
        let mut term = Matrix::identity(n);
        for k in 1..terms {
            term = term.mul(&x).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        for _ in 0..s {
            sum = sum.mul(&sum);
        }
        sum
    }

    fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).inf_norm() / b.inf_norm().max(1e-300)
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let e = mat_exp(&Matrix::zeros(3, 3), 1.0).unwrap();
        assert_eq!(e, Matrix::identity(3));
    }

    #[test]
    fn nilpotent_series_terminates() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let d = 0.01;
        let e = mat_exp(&a, d).unwrap();
        let want = Matrix::from_rows(&[vec![1.0, d], vec![0.0, 1.0]]);
        assert!(e.sub(&want).inf_norm() < 1e-15);
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(
            mat_exp(&Matrix::zeros(2, 3), 1.0),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn matches_taylor_oracle_small_step() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = Matrix::from_vec(4, 4, (0..16).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let e = mat_exp(&a, 0.01).unwrap();
            let o = taylor_oracle(&a, 0.01, 60);
            assert!(e.sub(&o).inf_norm() < 1e-10);
        }
    }

    #[test]
    fn accurate_up_to_norm_ten() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(12);
        for _ in 0..20 {
            let a = Matrix::from_vec(3, 3, (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let a = a.scale(10.0 / a.inf_norm());
            let e = mat_exp(&a, 1.0).unwrap();
            let o = taylor_oracle(&a, 1.0, 60);
            assert!(rel_err(&e, &o) < 1e-12, "rel err {}", rel_err(&e, &o));
        }
    }

    #[test]
    fn semigroup_property() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        for _ in 0..20 {
            let a = Matrix::from_vec(3, 3, (0..9).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let (s, t) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let lhs = mat_exp(&a, s).unwrap().mul(&mat_exp(&a, t).unwrap());
            let rhs = mat_exp(&a, s + t).unwrap();
            assert!(lhs.sub(&rhs).inf_norm() < 1e-9);
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.5]]);
        let e = mat_exp(&a, 0.0).unwrap();
        assert!(e.sub(&Matrix::identity(2)).inf_norm() <= 1e-14);
    }
}
