//! Shearer-type bound for quantum mutual information: for Ψ_UV with
//! Ψ_U = Ψ_{U₁} ⊗ … ⊗ Ψ_{U_m} and a random subset S with per-index inclusion
//! probability ≤ 1/k independent of the state, I(U_S; V | S) ≤ I(U;V)/k.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lemma_verify::worst;
use crate::qmath::measures::pure_entropy;
use crate::qmath::random::random_pure;
use crate::qmath::state::PureState;
use crate::qmath::system::RegisterSystem;
use crate::seeds;

/// Ψ = ⊗_i ψ_{U_i V_i} from m independent two-qubit factors.
fn factor_state(m: usize, rng: &mut seeds::Rng) -> Result<PureState> {
    let mut full: Option<PureState> = None;
    for i in 1..=m {
        let sys = RegisterSystem::of(&[
            (&format!("u{i}"), 2),
            (&format!("v{i}"), 2),
        ])?;
        let f = random_pure(sys, rng);
        full = Some(match full {
            None => f,
            Some(acc) => acc.tensor(&f)?,
        });
    }
    full.ok_or_else(|| Error::Domain("m must be ≥ 1".into()))
}

/// E_S I(U_S; V) − I(U;V)/k on one state, S sampled with independent
/// inclusion probability exactly 1/k, expectation taken exactly over all 2^m
/// subsets.
fn violation(psi: &PureState, m: usize, k: usize) -> Result<f64> {
    let u_names: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
    let v_names: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    let u_refs: Vec<&str> = u_names.iter().map(String::as_str).collect();
    let v_refs: Vec<&str> = v_names.iter().map(String::as_str).collect();
    // globally pure: I(U;V) = 2·S(U)
    let s_v = pure_entropy(psi, &v_refs)?;
    let total = 2.0 * s_v;
    let p = 1.0 / k as f64;
    let mut expectation = 0.0;
    for mask in 0..(1usize << m) {
        let size = (mask as u32).count_ones() as usize;
        let weight = p.powi(size as i32) * (1.0 - p).powi((m - size) as i32);
        if size == 0 {
            continue; // I(∅;V) = 0
        }
        let us: Vec<&str> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| u_refs[i]).collect();
        let mut usv: Vec<&str> = us.clone();
        usv.extend(&v_refs);
        let info = pure_entropy(psi, &us)? + s_v - pure_entropy(psi, &usv)?;
        expectation += weight * info;
    }
    Ok(expectation - total / k as f64)
}

/// Max over `trials` random m-factor instances of the Shearer slack
/// (positive = violation). Each trial uses an independent seed stream.
pub fn verify_shearer(trials: usize, m: usize, k: usize, seed: u64) -> Result<(f64, u64)> {
    if m == 0 || m > 4 {
        return Err(Error::Domain("m must be in 1..=4".into()));
    }
    if !(2..=4).contains(&k) {
        return Err(Error::Domain("k must be in 2..=4".into()));
    }
    let mut results = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = seeds::stream(seed, t as u64);
        let psi = factor_state(m, &mut rng)?;
        results.push((t as u64, violation(&psi, m, k)?));
    }
    Ok(worst(results))
}

/// The equality instance: m = 2 Bell pairs, k = 2. Returns
/// (E_S I(U_S;V), I(U;V)) — exactly (2, 4).
pub fn bell_equality_case() -> Result<(f64, f64)> {
    let mut full: Option<PureState> = None;
    for i in 1..=2 {
        let sys = RegisterSystem::of(&[
            (&format!("u{i}"), 2),
            (&format!("v{i}"), 2),
        ])?;
        let r = 1.0 / 2f64.sqrt();
        let amps = vec![
            Complex64::new(r, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(r, 0.0),
        ];
        let bell = PureState::from_amplitudes(sys, amps)?;
        full = Some(match full {
            None => bell,
            Some(acc) => acc.tensor(&bell)?,
        });
    }
    let psi = full.expect("two factors");
    let slack = violation(&psi, 2, 2)?;
    let total = 2.0 * pure_entropy(&psi, &["v1", "v2"])?;
    Ok((slack + total / 2.0, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_factors_give_zero_both_sides() {
        // ψ_{U_iV_i} = ψ_{U_i} ⊗ ψ_{V_i}: no correlations at all
        let mut rng = seeds::rng(3);
        let mut full: Option<PureState> = None;
        for i in 1..=3 {
            let u = random_pure(RegisterSystem::of(&[(&format!("u{i}"), 2)]).unwrap(), &mut rng);
            let v = random_pure(RegisterSystem::of(&[(&format!("v{i}"), 2)]).unwrap(), &mut rng);
            let f = u.tensor(&v).unwrap();
            full = Some(match full {
                None => f,
                Some(acc) => acc.tensor(&f).unwrap(),
            });
        }
        let psi = full.unwrap();
        let slack = violation(&psi, 3, 2).unwrap();
        let total = 2.0 * pure_entropy(&psi, &["v1", "v2", "v3"]).unwrap();
        assert!(total.abs() < 1e-9);
        assert!(slack.abs() < 1e-9);
    }

    #[test]
    fn all_bell_attains_equality() {
        let (lhs, total) = bell_equality_case().unwrap();
        assert!((total - 4.0).abs() < 1e-9, "I(U;V) = {total}");
        assert!((lhs - 2.0).abs() < 1e-9, "E_S I(U_S;V) = {lhs}");
    }

    #[test]
    fn random_instances_never_violate() {
        for (m, k) in [(2, 2), (3, 3), (4, 4), (4, 2)] {
            let (v, _) = verify_shearer(50, m, k, 11).unwrap();
            assert!(v <= 1e-8, "violation {v} at m={m} k={k}");
        }
    }
}
