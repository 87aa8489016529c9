//! Decoupling: for a tripartite pure |ψ⟩_ABC with I(A;C) ≤ ε and any
//! purifications ψ₁ of ψ_A (over B₁) and ψ₂ of ψ_C (over B₂), there is an
//! isometry U: B → B₁B₂ with |⟨ψ₁ψ₂|(1⊗U)|ψ⟩| ≥ 1 − ε, hence
//! h(UψU†, ψ₁⊗ψ₂) ≤ √ε. The isometry is constructed explicitly through the
//! transfer-matrix polar form and the achieved overlap is measured.

use num_complex::Complex64;

use crate::error::Result;
use crate::lemma_verify::worst;
use crate::qmath::measures::pure_entropy;
use crate::qmath::random::random_pure;
use crate::qmath::state::{tensor, PureState};
use crate::qmath::system::RegisterSystem;
use crate::qmath::uhlmann::uhlmann_isometry;
use crate::seeds;

/// Near-product family: ψ = √(1−η)·(product across A|B|C) + √η·(orthogonal),
/// with η shrunk until I(A;C) ≤ 0.5. A and C are qubits, B two qubits.
fn near_product_state(rng: &mut seeds::Rng) -> Result<(PureState, f64)> {
    use rand::Rng as _;
    let sys = RegisterSystem::of(&[("A", 2), ("B", 4), ("C", 2)])?;
    let a = random_pure(RegisterSystem::of(&[("A", 2)])?, rng);
    let b = random_pure(RegisterSystem::of(&[("B", 4)])?, rng);
    let c = random_pure(RegisterSystem::of(&[("C", 2)])?, rng);
    let base = a.tensor(&b)?.tensor(&c)?.permuted(&["A", "B", "C"])?;
    let noise = random_pure(sys.clone(), rng);
    // Gram–Schmidt: orthogonal correlated direction
    let ip = base.amps().dotc(noise.amps());
    let mut orth = noise.amps() - base.amps() * ip;
    let n = orth.norm();
    orth /= Complex64::new(n, 0.0);
    let mut eta = 0.15 * rng.random::<f64>();
    loop {
        let amps = base.amps() * Complex64::new((1.0 - eta).sqrt(), 0.0)
            + &orth * Complex64::new(eta.sqrt(), 0.0);
        let psi = PureState::new(sys.clone(), amps)?;
        let eps = pure_entropy(&psi, &["A"])? + pure_entropy(&psi, &["C"])?
            - pure_entropy(&psi, &["A", "C"])?;
        if eps <= 0.5 {
            return Ok((psi, eps.max(0.0)));
        }
        eta *= 0.5;
    }
}

/// Slack of one instance: positive = violation of either the overlap bound
/// or the Hellinger bound.
fn instance_slack(psi: &PureState, eps: f64) -> Result<f64> {
    let rho_a = psi.marginal(&["A"])?;
    let rho_c = psi.marginal(&["C"])?;
    let rho_ac = psi.marginal(&["A", "C"])?;
    let psi1 = rho_a.purify("B1")?;
    let psi2 = rho_c.purify("B2")?;
    let pur_rho = psi1.tensor(&psi2)?;
    let product = tensor(&rho_a, &rho_c)?;
    let (_u, overlap) = uhlmann_isometry(&product, &rho_ac, &pur_rho, psi)?;
    let h = (1.0 - overlap).max(0.0).sqrt();
    let overlap_slack = (1.0 - eps) - overlap; // must be ≤ 0
    let hellinger_slack = h - eps.sqrt(); // must be ≤ 0
    Ok(overlap_slack.max(hellinger_slack))
}

/// Max slack over `trials` near-product instances.
pub fn verify_decoupling(trials: usize, seed: u64) -> Result<(f64, u64)> {
    let mut results = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = seeds::stream(seed, t as u64);
        let (psi, eps) = near_product_state(&mut rng)?;
        results.push((t as u64, instance_slack(&psi, eps)?));
    }
    Ok(worst(results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_product_decouples_perfectly() {
        let mut rng = seeds::rng(5);
        let a = random_pure(RegisterSystem::of(&[("A", 2)]).unwrap(), &mut rng);
        let b = random_pure(RegisterSystem::of(&[("B", 4)]).unwrap(), &mut rng);
        let c = random_pure(RegisterSystem::of(&[("C", 2)]).unwrap(), &mut rng);
        let psi = a
            .tensor(&b)
            .unwrap()
            .tensor(&c)
            .unwrap()
            .permuted(&["A", "B", "C"])
            .unwrap();
        let eps = pure_entropy(&psi, &["A"]).unwrap() + pure_entropy(&psi, &["C"]).unwrap()
            - pure_entropy(&psi, &["A", "C"]).unwrap();
        assert!(eps.abs() < 1e-9);
        let rho_a = psi.marginal(&["A"]).unwrap();
        let rho_c = psi.marginal(&["C"]).unwrap();
        let (_u, overlap) = uhlmann_isometry(
            &tensor(&rho_a, &rho_c).unwrap(),
            &psi.marginal(&["A", "C"]).unwrap(),
            &rho_a.purify("B1").unwrap().tensor(&rho_c.purify("B2").unwrap()).unwrap(),
            &psi,
        )
        .unwrap();
        assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
    }

    #[test]
    fn family_respects_information_precondition() {
        for t in 0..50u64 {
            let mut rng = seeds::stream(6, t);
            let (_, eps) = near_product_state(&mut rng).unwrap();
            assert!((0.0..=0.5).contains(&eps));
        }
    }

    #[test]
    fn perturbed_instances_satisfy_the_bound() {
        let (v, _) = verify_decoupling(60, 12).unwrap();
        assert!(v <= 1e-8, "violation {v}");
    }
}
