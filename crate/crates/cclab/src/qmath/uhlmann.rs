//! Uhlmann's theorem, constructively: the isometry on one purification's
//! reference registers that aligns it with another purification, achieving
//! overlap F(ρ,σ).

use num_complex::Complex64;

use super::linalg::CMat;
use super::state::{DensityMatrix, PureState};
use super::system::Register;
use crate::error::{Error, Result};

/// An isometry acting on named registers of a pure state, replacing them
/// with (possibly differently named/dimensioned) output registers.
#[derive(Clone, Debug)]
pub struct UhlmannIsometry {
    pub matrix: CMat,
    pub in_names: Vec<String>,
    pub out_regs: Vec<Register>,
}

impl UhlmannIsometry {
    pub fn apply_to(&self, state: &PureState) -> Result<PureState> {
        let names: Vec<&str> = self.in_names.iter().map(String::as_str).collect();
        state.apply(&self.matrix, &names, self.out_regs.clone())
    }
}

/// Transfer matrix W between two purifications sharing the `shared` registers:
/// W[qσ, qρ] = Σ_p ψσ[p, qσ] · conj(ψρ[p, qρ]). Its trace norm is F(ρ, σ) and
/// Tr(U W) is the overlap ⟨ψρ|(1 ⊗ U)|ψσ⟩ for an isometry U: Qσ → Qρ.
fn transfer_matrix(
    pur_rho: &PureState,
    pur_sigma: &PureState,
    shared: &[&str],
) -> Result<(CMat, Vec<String>, Vec<Register>)> {
    let qr_names: Vec<String> = pur_rho
        .system()
        .names()
        .into_iter()
        .filter(|n| !shared.contains(n))
        .map(str::to_string)
        .collect();
    let qs_names: Vec<String> = pur_sigma
        .system()
        .names()
        .into_iter()
        .filter(|n| !shared.contains(n))
        .map(str::to_string)
        .collect();
    let mut rho_order: Vec<&str> = shared.to_vec();
    rho_order.extend(qr_names.iter().map(String::as_str));
    let mut sigma_order: Vec<&str> = shared.to_vec();
    sigma_order.extend(qs_names.iter().map(String::as_str));
    let pr = pur_rho.permuted(&rho_order)?;
    let ps = pur_sigma.permuted(&sigma_order)?;
    let dp: usize = shared
        .iter()
        .map(|n| {
            let pos = pr.system().position(n).unwrap();
            pr.system().registers()[pos].dim
        })
        .product();
    let dqr = pr.system().dim() / dp;
    let dqs = ps.system().dim() / dp;
    if dqr < dqs {
        return Err(Error::Domain(format!(
            "target purifying dimension {dqr} smaller than source {dqs}"
        )));
    }
    let mut w = CMat::from_element(dqs, dqr, Complex64::new(0.0, 0.0));
    for p in 0..dp {
        for qs in 0..dqs {
            let zs = ps.amps()[p * dqs + qs];
            if zs.norm_sqr() == 0.0 {
                continue;
            }
            for qr in 0..dqr {
                w[(qs, qr)] += zs * pr.amps()[p * dqr + qr].conj();
            }
        }
    }
    let out_regs: Vec<Register> = qr_names
        .iter()
        .map(|n| {
            let pos = pr.system().position(n).unwrap();
            pr.system().registers()[pos].clone()
        })
        .collect();
    Ok((w, qs_names, out_regs))
}

/// Optimal isometry for a given transfer matrix: U = V·U† from the SVD
/// W = UΣV† (so that Tr(U_iso·W) = ΣᵢσᵢW ≥ 0, the trace norm).
fn optimal_isometry(w: &CMat) -> CMat {
    let svd = w.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    v_t.adjoint() * u.adjoint()
}

/// Uhlmann isometry aligning `pur_sigma` with `pur_rho`.
///
/// Both arguments must purify `sigma` resp. `rho` over the same primary
/// system; the returned map acts on `pur_sigma`'s purifying registers and
/// outputs `pur_rho`'s purifying registers. The achieved overlap
/// |⟨ψρ|(1⊗U)|ψσ⟩| equals F(ρ,σ) up to numerics.
pub fn uhlmann_isometry(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    pur_rho: &PureState,
    pur_sigma: &PureState,
) -> Result<(UhlmannIsometry, f64)> {
    let primary: Vec<&str> = rho.system().names();
    for n in &primary {
        if !sigma.system().contains(n) {
            return Err(Error::SystemMismatch(format!("σ lacks register {n}")));
        }
    }
    // purification checks
    let mr = pur_rho.marginal(&primary)?.permuted(&primary)?;
    let ms = pur_sigma.marginal(&primary)?.permuted(&primary)?;
    let rr = rho.permuted(&primary)?;
    let ss = sigma.permuted(&primary)?;
    if (mr.mat() - rr.mat()).norm() > 1e-8 {
        return Err(Error::Invariant("pur_rho does not purify rho".into()));
    }
    if (ms.mat() - ss.mat()).norm() > 1e-8 {
        return Err(Error::Invariant("pur_sigma does not purify sigma".into()));
    }
    let (w, in_names, out_regs) = transfer_matrix(pur_rho, pur_sigma, &primary)?;
    let matrix = optimal_isometry(&w);
    let map = UhlmannIsometry { matrix, in_names, out_regs };
    let moved = map.apply_to(pur_sigma)?;
    let overlap = pur_rho.inner(&moved)?.norm();
    Ok((map, overlap))
}

/// Controlled variant: an independent Uhlmann block per basis value of the
/// classical `control` register, assembled into one isometry on
/// (control, Qσ) → (control, Qρ'). Used where the aligning map must not read
/// anything but the controlling input (cut-and-paste style arguments).
///
/// `pur_rho` plays the role of the per-value target family: it is conditioned
/// on control=x just like `pur_sigma`. Blocks for zero-probability control
/// values are filled with a fixed reference isometry.
pub fn controlled_uhlmann(
    pur_rho: &PureState,
    pur_sigma: &PureState,
    control: &str,
    shared_rest: &[&str],
) -> Result<UhlmannIsometry> {
    let cpos = pur_sigma.system().position(control)?;
    let cdim = pur_sigma.system().registers()[cpos].dim;
    let rpos = pur_rho.system().position(control)?;
    if pur_rho.system().registers()[rpos].dim != cdim {
        return Err(Error::SystemMismatch("control dims differ".into()));
    }
    let mut blocks: Vec<CMat> = Vec::with_capacity(cdim);
    let mut in_names: Option<Vec<String>> = None;
    let mut out_regs: Option<Vec<Register>> = None;
    let mut dqr = 0usize;
    let mut dqs = 0usize;
    for x in 0..cdim {
        let (pr_prob, pr_x) = pur_rho.condition(control, x)?;
        let (ps_prob, ps_x) = pur_sigma.condition(control, x)?;
        match (pr_x, ps_x) {
            (Some(pr_x), Some(ps_x)) if pr_prob > 1e-12 && ps_prob > 1e-12 => {
                let (w, ins, outs) = transfer_matrix(&pr_x, &ps_x, shared_rest)?;
                dqs = w.nrows();
                dqr = w.ncols();
                blocks.push(optimal_isometry(&w));
                in_names.get_or_insert(ins);
                out_regs.get_or_insert(outs);
            }
            _ => blocks.push(CMat::zeros(0, 0)), // placeholder, fixed below
        }
    }
    if dqr == 0 {
        return Err(Error::Invariant("no control value has support".into()));
    }
    let reference = super::linalg::complete_columns(&CMat::zeros(dqr, 0), dqs)?;
    for b in blocks.iter_mut() {
        if b.nrows() == 0 {
            *b = reference.clone();
        }
    }
    // full matrix on (control ⊗ Qσ) → (control ⊗ Qρ), block diagonal in x
    let mut matrix = CMat::from_element(cdim * dqr, cdim * dqs, Complex64::new(0.0, 0.0));
    for (x, b) in blocks.iter().enumerate() {
        for i in 0..dqr {
            for j in 0..dqs {
                matrix[(x * dqr + i, x * dqs + j)] = b[(i, j)];
            }
        }
    }
    let mut names = vec![control.to_string()];
    names.extend(in_names.expect("at least one block"));
    let mut regs = vec![Register::new(control, cdim)];
    regs.extend(out_regs.expect("at least one block"));
    Ok(UhlmannIsometry {
        matrix,
        in_names: names,
        out_regs: regs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::is_isometry;
    use crate::qmath::measures::fidelity;
    use crate::qmath::prob::{ProbTable, Variable};
    use crate::qmath::random::{random_mixed, random_pure};
    use crate::qmath::system::RegisterSystem;
    use crate::seeds;

    #[test]
    fn identical_purifications_give_unit_overlap() {
        let sys = RegisterSystem::of(&[("X", 2)]).unwrap();
        let rho = DensityMatrix::maximally_mixed(sys);
        let pur = rho.purify("R").unwrap();
        let (map, overlap) = uhlmann_isometry(&rho, &rho, &pur, &pur).unwrap();
        assert!((overlap - 1.0).abs() < 1e-10);
        assert!(is_isometry(&map.matrix, 1e-10));
    }

    #[test]
    fn orthogonal_states_give_zero_overlap() {
        let sys = RegisterSystem::of(&[("X", 2)]).unwrap();
        let rho = DensityMatrix::basis_proj(sys.clone(), 0).unwrap();
        let sigma = DensityMatrix::basis_proj(sys, 1).unwrap();
        let pr = rho.purify("R").unwrap();
        let ps = sigma.purify("R").unwrap();
        let (_, overlap) = uhlmann_isometry(&rho, &sigma, &pr, &ps).unwrap();
        assert!(overlap < 1e-10);
    }

    #[test]
    fn commuting_diagonals_closed_form() {
        // ρ = I/2, σ = diag(3/4, 1/4): F = √(3/8) + √(1/8)
        let rho = DensityMatrix::maximally_mixed(RegisterSystem::of(&[("X", 2)]).unwrap());
        let p = ProbTable::new(
            vec![Variable::new("X", 2)],
            vec![(vec![0], 0.75), (vec![1], 0.25)],
        )
        .unwrap();
        let sigma = p.to_density().unwrap();
        let pr = crate::qmath::prob::canonical_purification(
            &ProbTable::new(vec![Variable::new("X", 2)], vec![(vec![0], 0.5), (vec![1], 0.5)])
                .unwrap(),
        )
        .unwrap();
        let ps = crate::qmath::prob::canonical_purification(&p).unwrap();
        let (map, overlap) = uhlmann_isometry(&rho, &sigma, &pr, &ps).unwrap();
        let want = (3.0f64 / 8.0).sqrt() + (1.0f64 / 8.0).sqrt();
        assert!((overlap - want).abs() < 1e-8, "overlap {overlap}");
        assert!(is_isometry(&map.matrix, 1e-10));
    }

    #[test]
    fn achieves_fidelity_on_random_states() {
        for seed in 0..20u64 {
            let sys = RegisterSystem::of(&[("X", 3)]).unwrap();
            let rho = random_mixed(sys.clone(), 3, &mut seeds::stream(100, seed)).unwrap();
            let sigma = random_mixed(sys, 2, &mut seeds::stream(200, seed)).unwrap();
            let pr = rho.purify("R").unwrap();
            let ps = sigma.purify("R").unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            let (map, overlap) = uhlmann_isometry(&rho, &sigma, &pr, &ps).unwrap();
            assert!((overlap - f).abs() < 1e-8, "overlap {overlap} vs F {f}");
            assert!(is_isometry(&map.matrix, 1e-9));
        }
    }

    #[test]
    fn controlled_blocks_achieve_per_value_fidelity() {
        // states classical on X: pure |φ_x⟩ vs |χ_x⟩ on Q, purified trivially.
        let mut rng = seeds::rng(77);
        let x_sys = RegisterSystem::of(&[("X", 2)]).unwrap();
        let q = RegisterSystem::of(&[("Q", 2)]).unwrap();
        let qp = RegisterSystem::of(&[("QT", 4)]).unwrap();
        // ψσ = Σ_x √(1/2) |x⟩ |χ_x⟩_Q ; ψρ = Σ_x √(1/2) |x⟩ |φ_x⟩_{QT}
        let chi0 = random_pure(q.clone(), &mut rng);
        let chi1 = random_pure(q.clone(), &mut rng);
        let phi0 = random_pure(qp.clone(), &mut rng);
        let phi1 = random_pure(qp.clone(), &mut rng);
        let half = Complex64::new(0.5f64.sqrt(), 0.0);
        let mut amps_s = Vec::new();
        for x in 0..2 {
            let chi = if x == 0 { &chi0 } else { &chi1 };
            for i in 0..2 {
                amps_s.push(half * chi.amps()[i]);
            }
        }
        let mut amps_r = Vec::new();
        for x in 0..2 {
            let phi = if x == 0 { &phi0 } else { &phi1 };
            for i in 0..4 {
                amps_r.push(half * phi.amps()[i]);
            }
        }
        let ps = PureState::from_amplitudes(x_sys.concat(&q).unwrap(), amps_s).unwrap();
        let pr = PureState::from_amplitudes(x_sys.concat(&qp).unwrap(), amps_r).unwrap();
        let map = controlled_uhlmann(&pr, &ps, "X", &[]).unwrap();
        assert!(is_isometry(&map.matrix, 1e-10));
        let moved = map.apply_to(&ps).unwrap();
        // per-block pure-to-pure fidelity is 1, so the total overlap is 1
        let overlap = pr.inner(&moved).unwrap().norm();
        assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
    }
}
