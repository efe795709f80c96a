//! Test-only oracles and random instance generators.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)
}

/// `e^A` by scaling and squaring a degree-18 Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(s);
    let mut term = DMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn solve_vec(k: DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let rhs = DVector::from_column_slice(m.as_slice());
    let x = k.lu().solve(&rhs).expect("singular Kronecker system");
    DMatrix::from_column_slice(n, n, x.as_slice())
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = (b.nrows(), b.ncols());
    DMatrix::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}

/// Solves `AᵀP + PA + μAᵀPA = −M` through the `n² × n²` vectorized system.
pub fn kron_tsale(a: &DMatrix<f64>, m: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let i = DMatrix::<f64>::identity(n, n);
    let at = a.transpose();
    let k = kron(&i, &at) + kron(&at, &i) + kron(&at, &at) * mu;
    solve_vec(k, &(-m))
}

/// Solves `P − BᵀPB = M`.
pub fn kron_stein(b: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let bt = b.transpose();
    let k = DMatrix::<f64>::identity(n * n, n * n) - kron(&bt, &bt);
    solve_vec(k, m)
}

/// `P(t+1) = A_R⁻ᵀ (P(t) − M) A_R⁻¹` by LU, `steps` times.
pub fn ddle_steps(a: &DMatrix<f64>, m: &DMatrix<f64>, p0: &DMatrix<f64>, steps: usize) -> Vec<DMatrix<f64>> {
    let n = a.nrows();
    let ar = a + DMatrix::<f64>::identity(n, n);
    let lut = ar.transpose().lu();
    let mut out = vec![p0.clone()];
    for k in 0..steps {
        let d = &out[k] - m;
        // A_R⁻ᵀ D, then (A_R⁻ᵀ (A_R⁻ᵀ D)ᵀ)ᵀ = A_R⁻ᵀ D A_R⁻¹.
        let y = lut.solve(&d).unwrap();
        let x = lut.solve(&y.transpose()).unwrap().transpose();
        out.push((&x + x.transpose()) * 0.5);
    }
    out
}

/// Closed-form continuous Gramian flow for constant Hurwitz `A`:
/// `P(t) = e^{−Aᵀt}(P0 − X)e^{−At} + X` with `AᵀX + XA = −M`.
pub fn cdle_closed_form(a: &DMatrix<f64>, m: &DMatrix<f64>, p0: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let x = kron_tsale(a, m, 0.0);
    let e = expm(&(-a * t));
    e.transpose() * (p0 - &x) * e + x
}

/// Eigenvalue `(−1 + r e^{iθ})/μ` (or a left half-plane point for `μ = 0`)
/// with `r` drawn from `radii`.
pub fn draw_eigen(rng: &mut impl Rng, mu: f64, radii: (f64, f64), real: bool) -> (f64, f64) {
    if mu > 0.0 {
        let r = rng.gen_range(radii.0..radii.1);
        let th = if real {
            if rng.gen_bool(0.5) { 0.0 } else { std::f64::consts::PI }
        } else {
            rng.gen_range(0.1..std::f64::consts::PI - 0.1)
        };
        ((-1.0 + r * th.cos()) / mu, (r * th.sin()).abs() / mu)
    } else {
        let re = -rng.gen_range(0.3..2.0);
        (re, if real { 0.0 } else { rng.gen_range(0.1..2.0) })
    }
}

/// Real `n × n` matrix `V D V⁻¹` where `D` holds the drawn spectrum as
/// 1×1 and 2×2 rotation-scaling blocks and `V = I + 0.2R`.
/// `draw(rng, real)` returns `(re, im)`.
pub fn random_with_spectrum<R: Rng>(
    rng: &mut R,
    n: usize,
    mut draw: impl FnMut(&mut R, bool) -> (f64, f64),
) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut i = 0;
    while i < n {
        let pair = i + 1 < n && rng.gen_bool(0.5);
        let (re, im) = draw(rng, !pair);
        if pair {
            d[(i, i)] = re;
            d[(i + 1, i + 1)] = re;
            d[(i, i + 1)] = im;
            d[(i + 1, i)] = -im;
            i += 2;
        } else {
            d[(i, i)] = re;
            i += 1;
        }
    }
    loop {
        let v = DMatrix::<f64>::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.2 * rng.gen_range(-1.0..1.0));
        if let Some(vi) = v.clone().try_inverse() {
            if v.norm() * vi.norm() < 20.0 {
                return &v * d * vi;
            }
        }
    }
}

/// Random matrix whose eigenvalues lie inside the Hilger disk of `mu`, at
/// relative radius within `radii` of its centre.
pub fn stable_in_disk<R: Rng>(rng: &mut R, n: usize, mu: f64, radii: (f64, f64)) -> DMatrix<f64> {
    random_with_spectrum(rng, n, |r, real| draw_eigen(r, mu, radii, real))
}

/// `BBᵀ + 0.1 I`.
pub fn random_spd(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &b * b.transpose() + DMatrix::<f64>::identity(n, n) * 0.1
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() > 0.1 {
            return v;
        }
    }
}
