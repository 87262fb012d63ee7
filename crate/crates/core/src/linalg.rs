//! Dense complex matrix exponential.
//!
//! Scaling and squaring with diagonal Padé approximants of degree 3, 5, 7, 9 or 13,
//! selected from the 1-norm (Higham, SIAM J. Matrix Anal. Appl. 26 (2005) 1179).
//! The θ_m thresholds bound the backward error by the unit roundoff.

use ndarray::{Array2, Zip};

use crate::hilbert::C64;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_230e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

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

/// Maximum absolute column sum.
pub fn one_norm(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `acc += coeff * m`
fn axpy(acc: &mut Array2<C64>, coeff: f64, m: &Array2<C64>) {
    Zip::from(acc).and(m).for_each(|a, &b| *a += b * coeff);
}

fn add_identity(m: &mut Array2<C64>, coeff: f64) {
    for i in 0..m.nrows() {
        m[[i, i]] += coeff;
    }
}

/// exp(A) for a square complex matrix.
///
/// # Panics
/// Panics if `a` is not square or contains non-finite entries.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    assert!(a.iter().all(|z| z.is_finite()), "expm needs finite entries");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    let norm = one_norm(a);
    let a2 = a.dot(a);
    let (u, v) = if norm <= THETA_3 {
        pade_low(a, &a2, &B3)
    } else if norm <= THETA_5 {
        pade_low(a, &a2, &B5)
    } else if norm <= THETA_7 {
        pade_low(a, &a2, &B7)
    } else if norm <= THETA_9 {
        pade_low(a, &a2, &B9)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scale = 2f64.powi(-s);
        let scaled = a.mapv(|z| z * scale);
        let scaled2 = a2.mapv(|z| z * scale * scale);
        let (u, v) = pade13(&scaled, &scaled2);
        let mut r = solve_pade(&u, &v);
        for _ in 0..s {
            r = r.dot(&r);
        }
        return r;
    };
    solve_pade(&u, &v)
}

/// Odd part `u` and even part `v` of the degree-m numerator, m in {3, 5, 7, 9}.
fn pade_low(a: &Array2<C64>, a2: &Array2<C64>, b: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let mut power = Array2::<C64>::eye(n);
    let mut odd = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for k in (0..b.len()).step_by(2) {
        if k > 0 {
            power = power.dot(a2);
        }
        axpy(&mut v, b[k], &power);
        axpy(&mut odd, b[k + 1], &power);
    }
    (a.dot(&odd), v)
}

fn pade13(a: &Array2<C64>, a2: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a4 = a2.dot(a2);
    let a6 = a4.dot(a2);
    let b = &B13;

    let mut inner = Array2::<C64>::zeros((n, n));
    axpy(&mut inner, b[13], &a6);
    axpy(&mut inner, b[11], &a4);
    axpy(&mut inner, b[9], a2);
    let mut odd = a6.dot(&inner);
    axpy(&mut odd, b[7], &a6);
    axpy(&mut odd, b[5], &a4);
    axpy(&mut odd, b[3], a2);
    add_identity(&mut odd, b[1]);
    let u = a.dot(&odd);

    let mut inner = Array2::<C64>::zeros((n, n));
    axpy(&mut inner, b[12], &a6);
    axpy(&mut inner, b[10], &a4);
    axpy(&mut inner, b[8], a2);
    let mut v = a6.dot(&inner);
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], a2);
    add_identity(&mut v, b[0]);
    (u, v)
}

/// r = (v - u)⁻¹ (v + u)
fn solve_pade(u: &Array2<C64>, v: &Array2<C64>) -> Array2<C64> {
    let q = v - u;
    let p = v + u;
    lu_solve(q, p).expect("Padé denominator is nonsingular for the selected degree")
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting; `None` if singular.
pub fn lu_solve(a: Array2<C64>, b: Array2<C64>) -> Option<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.nrows());
    let m = b.ncols();
    let mut a = a.as_standard_layout().into_owned();
    let mut b = b.as_standard_layout().into_owned();
    let aa = a.as_slice_mut().expect("standard layout");
    let bb = b.as_slice_mut().expect("standard layout");

    for k in 0..n {
        let (pivot, best) = (k..n)
            .map(|i| (i, aa[i * n + k].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if pivot != k {
            for j in 0..n {
                aa.swap(k * n + j, pivot * n + j);
            }
            for j in 0..m {
                bb.swap(k * m + j, pivot * m + j);
            }
        }
        let diag = aa[k * n + k];
        let (top, rest) = aa.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..];
        let (btop, brest) = bb.split_at_mut((k + 1) * m);
        let pivot_rhs = &btop[k * m..];
        for (row, rhs) in rest.chunks_exact_mut(n).zip(brest.chunks_exact_mut(m)) {
            let factor = row[k] / diag;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            row[k] = C64::new(0.0, 0.0);
            for (x, &p) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                *x -= factor * p;
            }
            for (x, &p) in rhs.iter_mut().zip(pivot_rhs) {
                *x -= factor * p;
            }
        }
    }

    for k in (0..n).rev() {
        let inv = C64::new(1.0, 0.0) / aa[k * n + k];
        let (above, from_k) = bb.split_at_mut(k * m);
        let row_k = &mut from_k[..m];
        for x in row_k.iter_mut() {
            *x *= inv;
        }
        for (i, rhs) in above.chunks_exact_mut(m).enumerate() {
            let factor = aa[i * n + k];
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for (x, &p) in rhs.iter_mut().zip(row_k.iter()) {
                *x -= factor * p;
            }
        }
    }
    Some(b)
}
