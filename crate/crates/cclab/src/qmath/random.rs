//! Seeded random states and isometries (uniform/Haar-style measures).

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::linalg::CMat;
use super::state::{DensityMatrix, PureState};
use super::system::{Register, RegisterSystem};
use crate::error::{Error, Result};
use crate::seeds::Rng;

fn gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Uniform-measure unit vector on the system.
pub fn random_pure(system: RegisterSystem, rng: &mut Rng) -> PureState {
    let d = system.dim();
    let mut v = DVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    v /= Complex64::new(n, 0.0);
    PureState::new(system, v).expect("normalized by construction")
}

/// Rank-`rank` mixed state: partial trace of a uniform pure state on
/// system ⊗ (rank-dimensional ancilla).
pub fn random_mixed(system: RegisterSystem, rank: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    if rank == 0 || rank > system.dim() {
        return Err(Error::Domain(format!(
            "rank {rank} out of range for dim {}",
            system.dim()
        )));
    }
    let anc = RegisterSystem::with_cap(vec![Register::new("__anc", rank)], usize::MAX)?;
    let big = system.concat(&anc)?;
    let pure = random_pure(big, rng);
    let keep = system.names();
    pure.marginal(&keep)
}

/// Haar-style random unitary via Ginibre + QR.
pub fn random_unitary(dim: usize, rng: &mut Rng) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is exactly Haar
    for j in 0..dim {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / Complex64::new(d.norm(), 0.0);
            for i in 0..dim {
                q[(i, j)] *= phase.conj();
            }
        }
    }
    q
}

/// Random isometry: `cols` columns of a Haar unitary on `rows` dimensions.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut Rng) -> Result<CMat> {
    if cols > rows {
        return Err(Error::Domain(format!("isometry {rows}x{cols} impossible")));
    }
    Ok(random_unitary(rows, rng).columns(0, cols).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::is_isometry;
    use crate::qmath::measures::vn_entropy;
    use crate::seeds;

    #[test]
    fn deterministic_given_seed() {
        let sys = RegisterSystem::of(&[("A", 3)]).unwrap();
        let a = random_pure(sys.clone(), &mut seeds::stream(3, 5));
        let b = random_pure(sys, &mut seeds::stream(3, 5));
        assert!((a.amps() - b.amps()).norm() < 1e-15);
    }

    #[test]
    fn rank_one_mixed_is_pure() {
        let sys = RegisterSystem::of(&[("A", 2)]).unwrap();
        let rho = random_mixed(sys, 1, &mut seeds::rng(11)).unwrap();
        assert!(vn_entropy(&rho, &["A"]).unwrap() < 1e-8);
    }

    #[test]
    fn rank_overflow_rejected() {
        let sys = RegisterSystem::of(&[("A", 2)]).unwrap();
        assert!(random_mixed(sys, 3, &mut seeds::rng(0)).is_err());
    }

    #[test]
    fn unitaries_are_unitary() {
        for seed in 0..5 {
            let u = random_unitary(4, &mut seeds::rng(seed));
            assert!(is_isometry(&u, 1e-10));
        }
        let v = random_isometry(4, 2, &mut seeds::rng(9)).unwrap();
        assert!(is_isometry(&v, 1e-10));
    }

    #[test]
    fn mean_overlap_matches_uniform_measure() {
        // 10⁴ draws on dim 2: mean ⟨0|ρ|0⟩ → 1/2 ± 0.02
        let sys = RegisterSystem::of(&[("A", 2)]).unwrap();
        let mut acc = 0.0;
        let n = 10_000;
        for i in 0..n {
            let psi = random_pure(sys.clone(), &mut seeds::stream(42, i));
            acc += psi.amps()[0].norm_sqr();
        }
        let mean = acc / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }
}
