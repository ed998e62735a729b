//! Seeded random streams and the matrix/vector draws used across the crate.
//!
//! Every draw comes from a ChaCha stream keyed by `(master_seed, sample_index)` with the
//! ChaCha stream id set to `stream_id`, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

pub type StreamRng = ChaCha12Rng;

/// Stream ids reserved by the crate.
pub mod streams {
    pub const MATRIX_A: u64 = 1;
    pub const NOISE_B: u64 = 2;
    pub const SPHERE: u64 = 3;
    pub const AUXILIARY: u64 = 4;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for `(master_seed, sample_index, stream_id)`.
pub fn stream(master_seed: u64, sample_index: u64, stream_id: u64) -> StreamRng {
    let mut state = master_seed ^ sample_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = StreamRng::from_seed(key);
    rng.set_stream(stream_id);
    rng
}

/// Complex Gaussian with E|z|² = `variance` (independent real and imaginary parts).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// n×n matrix of iid complex Gaussians with E|x_ij|² = `variance`.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> ComplexMatrix {
    let data = (0..n * n).map(|_| complex_normal(rng, variance)).collect();
    ComplexMatrix::from_col_major(n, n, data).expect("sizes agree")
}

/// Complex Ginibre matrix with E|x_ij|² = 1/n.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    gaussian_matrix(rng, n, 1.0 / n as f64)
}

/// Entries `(±1 ± i)/√(2n)` with independent signs, so E|x_ij|² = 1/n.
pub fn bernoulli_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let s = (0.5 / n as f64).sqrt();
    let data = (0..n * n)
        .map(|_| {
            let re = if rng.gen::<bool>() { s } else { -s };
            let im = if rng.gen::<bool>() { s } else { -s };
            C64::new(re, im)
        })
        .collect();
    ComplexMatrix::from_col_major(n, n, data).expect("sizes agree")
}

/// Uniform point on the unit sphere of ℂⁿ.
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..n).map(|_| complex_normal(rng, 1.0)).collect();
        if crate::linalg::normalize(&mut v) > 1e-300 {
            return v;
        }
    }
}

/// Uniform point in the disk of radius `r` around `c`.
pub fn uniform_disk<R: Rng + ?Sized>(rng: &mut R, c: C64, r: f64) -> C64 {
    let rho = r * rng.gen::<f64>().sqrt();
    let th = std::f64::consts::TAU * rng.gen::<f64>();
    c + C64::from_polar(rho, th)
}
