//! Seeded random families. Each family draws from its own ChaCha stream so
//! adding members to one family never perturbs another.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qha_core::fock::{FockSpec, OperatorMatrix, PhasePoint};
use qha_core::phase::{Grid, GridSymbol};
use qha_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream identifiers, one per family.
pub mod stream {
    pub const CCR: u64 = 1;
    pub const PARITY: u64 = 2;
    pub const EVEN_ODD: u64 = 3;
    pub const ROUNDTRIP: u64 = 10;
    pub const TWISTED: u64 = 11;
    pub const CONJUGATION: u64 = 12;
    pub const IDEAL: u64 = 13;
    pub const AUDIT: u64 = 14;
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Uniform point of the disc of radius `r`.
pub fn disc_point(rng: &mut impl Rng, r: f64) -> C64 {
    let rho = r * rng.gen::<f64>().sqrt();
    C64::from_polar(rho, 2.0 * PI * rng.gen::<f64>())
}

pub fn disc_points(rng: &mut impl Rng, count: usize, r: f64) -> Vec<PhasePoint> {
    (0..count).map(|_| PhasePoint::single(disc_point(rng, r))).collect()
}

/// Dense random operator with uniform complex entries.
pub fn dense_operator(rng: &mut impl Rng, spec: &FockSpec) -> OperatorMatrix {
    let d = spec.dim();
    let e = DMatrix::from_fn(d, d, |_, _| complex(rng));
    OperatorMatrix::new(spec.clone(), e).expect("square by construction")
}

/// `Σ_{j<rank} u_j v_j*` with `u_j, v_j` supported on the first `support` modes,
/// rank drawn uniformly from `1..=max_rank`.
pub fn interior_operator(rng: &mut impl Rng, spec: &FockSpec, support: usize, max_rank: usize) -> OperatorMatrix {
    let d = spec.dim();
    let rank = rng.gen_range(1..=max_rank.max(1));
    let mut e = DMatrix::<C64>::zeros(d, d);
    for _ in 0..rank {
        let u: Vec<C64> = (0..support).map(|_| complex(rng)).collect();
        let v: Vec<C64> = (0..support).map(|_| complex(rng)).collect();
        for i in 0..support {
            for j in 0..support {
                e[(i, j)] += u[i] * v[j].conj();
            }
        }
    }
    OperatorMatrix::new(spec.clone(), e).expect("square by construction")
}

pub fn interior_family(
    seed: u64,
    stream_id: u64,
    spec: &FockSpec,
    count: usize,
    support: usize,
    max_rank: usize,
) -> Vec<OperatorMatrix> {
    let mut r = rng(seed, stream_id);
    (0..count).map(|_| interior_operator(&mut r, spec, support, max_rank)).collect()
}

/// `Σ_j c_j e^{−|z − a_j|²/width}` with `|a_j| ≤ max_center`.
pub fn smooth_symbol(rng: &mut impl Rng, grid: Grid, bumps: usize, max_center: f64, width: f64) -> GridSymbol {
    let terms: Vec<(C64, C64)> = (0..bumps).map(|_| (complex(rng), disc_point(rng, max_center))).collect();
    let label = format!("gaussian-sum({bumps}, width {width})");
    GridSymbol::sample(grid, move |z| terms.iter().map(|(c, a)| c * (-(z - a).norm_sqr() / width).exp()).sum(), label)
}

/// Zero the first row (`row = true`) or column of an operator.
pub fn clear_vacuum_line(a: &mut OperatorMatrix, row: bool) {
    let d = a.dim();
    for j in 0..d {
        if row {
            a.entries[(0, j)] = C64::new(0.0, 0.0);
        } else {
            a.entries[(j, 0)] = C64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let spec = FockSpec::single(8).unwrap();
        let a = interior_family(7, 1, &spec, 3, 4, 2);
        let b = interior_family(7, 1, &spec, 3, 4, 2);
        let c = interior_family(7, 2, &spec, 3, 4, 2);
        assert!(a.iter().zip(&b).all(|(x, y)| x.entries == y.entries));
        assert!(a[0].entries != c[0].entries);
        assert!(a.iter().all(|x| x.entries.view((4, 0), (4, 8)).iter().all(|v| v.norm() == 0.0)));
    }

    #[test]
    fn disc_points_stay_in_the_disc() {
        let mut r = rng(1, 1);
        assert!(disc_points(&mut r, 100, 1.5).iter().all(|p| p.norm() <= 1.5));
    }
}
