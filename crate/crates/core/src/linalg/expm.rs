//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13, selected on the 1-norm (Higham 2005).

use ndarray::Array2;

use super::{identity, inverse, one_norm, Matrix, C64};
use crate::error::Result;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn scaled(a: &Matrix, f: f64) -> Matrix {
    a.mapv(|z| z * f)
}

fn add_scaled(acc: &mut Matrix, m: &Matrix, f: f64) {
    acc.zip_mut_with(m, |x, &y| *x += y * f);
}

fn add_identity(acc: &mut Matrix, f: f64) {
    for i in 0..acc.nrows() {
        acc[[i, i]] += f;
    }
}

/// `(U, V)` for a low-degree approximant given the even powers `A^2, A^4, ...`.
fn low_degree(a: &Matrix, powers: &[Matrix], b: &[f64]) -> (Matrix, Matrix) {
    let n = a.nrows();
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    add_identity(&mut u_inner, b[1]);
    add_identity(&mut v, b[0]);
    for (k, p) in powers.iter().enumerate() {
        add_scaled(&mut u_inner, p, b[2 * k + 3]);
        add_scaled(&mut v, p, b[2 * k + 2]);
    }
    (a.dot(&u_inner), v)
}

fn degree_13(a: &Matrix) -> (Matrix, Matrix) {
    let b = &B13;
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let mut w1 = scaled(&a6, b[13]);
    add_scaled(&mut w1, &a4, b[11]);
    add_scaled(&mut w1, &a2, b[9]);
    let mut w2 = scaled(&a6, b[7]);
    add_scaled(&mut w2, &a4, b[5]);
    add_scaled(&mut w2, &a2, b[3]);
    add_identity(&mut w2, b[1]);
    let mut inner_u = a6.dot(&w1);
    inner_u += &w2;
    let u = a.dot(&inner_u);

    let mut z1 = scaled(&a6, b[12]);
    add_scaled(&mut z1, &a4, b[10]);
    add_scaled(&mut z1, &a2, b[8]);
    let mut v = a6.dot(&z1);
    add_scaled(&mut v, &a6, b[6]);
    add_scaled(&mut v, &a4, b[4]);
    add_scaled(&mut v, &a2, b[2]);
    add_identity(&mut v, b[0]);
    (u, v)
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if norm == 0.0 {
        return Ok(identity(n));
    }

    let (u, v, squarings) = if norm <= THETA_9 {
        let a2 = a.dot(a);
        if norm <= THETA_3 {
            let (u, v) = low_degree(a, &[a2], &B3);
            (u, v, 0)
        } else {
            let a4 = a2.dot(&a2);
            if norm <= THETA_5 {
                let (u, v) = low_degree(a, &[a2, a4], &B5);
                (u, v, 0)
            } else {
                let a6 = a4.dot(&a2);
                if norm <= THETA_7 {
                    let (u, v) = low_degree(a, &[a2, a4, a6], &B7);
                    (u, v, 0)
                } else {
                    let a8 = a6.dot(&a2);
                    let (u, v) = low_degree(a, &[a2, a4, a6, a8], &B9);
                    (u, v, 0)
                }
            }
        }
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as u32;
        let a_s = scaled(a, 0.5f64.powi(s as i32));
        let (u, v) = degree_13(&a_s);
        (u, v, s)
    };

    // r = (V - U)^{-1} (V + U)
    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = inverse(&denom)?.dot(&numer);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}
