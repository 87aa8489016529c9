//! Distances, entropies and information quantities (all in bits, log base 2).

use num_complex::Complex64;

use super::linalg::{self, CMat};
use super::state::DensityMatrix;
use super::CLIP;
use crate::error::{Error, Result};

/// Support-leakage tolerance for declaring a relative entropy infinite.
pub const SUPPORT_TOL: f64 = 1e-9;

fn check_same_system(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.system() != b.system() {
        return Err(Error::SystemMismatch(format!(
            "{:?} vs {:?}",
            a.system().names(),
            b.system().names()
        )));
    }
    Ok(())
}

/// F(ρ,σ) = ‖√ρ√σ‖₁, clamped into [0,1].
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_system(a, b)?;
    let f = linalg::trace_norm(&(linalg::sqrt_psd(a.mat()) * linalg::sqrt_psd(b.mat())));
    Ok(f.clamp(0.0, 1.0))
}

/// h(ρ,σ) = √(1 − F).
pub fn hellinger(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok((1.0 - fidelity(a, b)?).max(0.0).sqrt())
}

/// Unnormalized ℓ₁ distance ‖ρ−σ‖₁ ∈ [0,2].
/// Note: this is *twice* the more common ½‖·‖₁ convention.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_same_system(a, b)?;
    let (vals, _) = linalg::eigh(&(a.mat() - b.mat()));
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// S(part)_ρ = −Σ λ log₂ λ over the marginal's clipped spectrum.
pub fn vn_entropy(rho: &DensityMatrix, part: &[&str]) -> Result<f64> {
    let m = rho.partial_trace(part)?;
    Ok(linalg::spectrum_entropy(m.mat()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeEntropy::Finite(v) => Some(v),
            RelativeEntropy::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, RelativeEntropy::Infinite)
    }
}

/// D(ρ‖σ) = Tr ρ log₂ ρ − Tr ρ log₂ σ; INFINITE when the support of ρ leaks
/// outside the support of σ by more than `SUPPORT_TOL` in trace weight.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    check_same_system(rho, sigma)?;
    let (svals, svecs) = linalg::eigh(sigma.mat());
    let d = svals.len();
    // weights w_i = ⟨v_i|ρ|v_i⟩ in σ's eigenbasis
    let rho_in_basis: CMat = svecs.adjoint() * rho.mat() * &svecs;
    let mut leakage = 0.0;
    let mut cross = 0.0; // Tr ρ log₂ σ restricted to σ's support
    for i in 0..d {
        let w = rho_in_basis[(i, i)].re;
        let lam = linalg::clip(svals[i]).max(0.0);
        if lam == 0.0 {
            leakage += w;
        } else {
            cross += w * lam.log2();
        }
    }
    if leakage > SUPPORT_TOL {
        return Ok(RelativeEntropy::Infinite);
    }
    let s_rho = linalg::spectrum_entropy(rho.mat()); // = −Tr ρ log₂ ρ
    Ok(RelativeEntropy::Finite(-s_rho - cross))
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen: Vec<&str> = Vec::new();
    for g in groups {
        for n in *g {
            if seen.contains(n) {
                return Err(Error::Domain(format!("register {n} in two groups")));
            }
            seen.push(n);
        }
    }
    Ok(())
}

/// I(A;B) = S(A) + S(B) − S(AB).
pub fn mutual_information(rho: &DensityMatrix, a: &[&str], b: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b])?;
    let ab: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
    Ok(vn_entropy(rho, a)? + vn_entropy(rho, b)? - vn_entropy(rho, &ab)?)
}

/// I(A;B|C) = S(AC) + S(BC) − S(ABC) − S(C).
pub fn conditional_mutual_information(
    rho: &DensityMatrix,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    fn join<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
        x.iter().chain(y).copied().collect()
    }
    let ac = join(a, c);
    let bc = join(b, c);
    let abc = join(&ac, b);
    Ok(vn_entropy(rho, &ac)? + vn_entropy(rho, &bc)? - vn_entropy(rho, &abc)? - vn_entropy(rho, c)?)
}

/// Entropy of a pure state over the cheaper half: S(part) = S(complement).
pub fn pure_entropy(psi: &super::state::PureState, part: &[&str]) -> Result<f64> {
    let positions = psi.system().positions_sorted(part)?;
    let dim_part: usize = positions
        .iter()
        .map(|&p| psi.system().registers()[p].dim)
        .product();
    let names = if dim_part * dim_part <= psi.system().dim() {
        part.to_vec()
    } else {
        let comp = psi.system().complement(&positions);
        comp.iter()
            .map(|&p| psi.system().registers()[p].name.as_str())
            .collect()
    };
    Ok(linalg::spectrum_entropy(psi.marginal(&names)?.mat()))
}

/// Overlap |⟨φ|ψ⟩| of pure states (register order free).
pub fn pure_overlap(
    a: &super::state::PureState,
    b: &super::state::PureState,
) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |x: f64| if x > CLIP { -x * x.log2() } else { 0.0 };
    term(p) + term(q)
}

#[allow(unused)]
fn _silence(_: Complex64) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::state::{tensor, PureState};
    use crate::qmath::system::RegisterSystem;
    use nalgebra::DVector;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit(name: &str) -> RegisterSystem {
        RegisterSystem::of(&[(name, 2)]).unwrap()
    }

    fn diag(name: &str, probs: &[f64]) -> DensityMatrix {
        let sys = RegisterSystem::of(&[(name, probs.len())]).unwrap();
        let m = CMat::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| c(p, 0.0)),
        ));
        DensityMatrix::new(sys, m).unwrap()
    }

    fn bell() -> PureState {
        let sys = RegisterSystem::of(&[("A", 2), ("B", 2)]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        PureState::from_amplitudes(sys, vec![c(r, 0.), c(0., 0.), c(0., 0.), c(r, 0.)]).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis_proj(qubit("Q"), 0).unwrap();
        let one = DensityMatrix::basis_proj(qubit("Q"), 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(qubit("Q"));
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-10);
        assert!(fidelity(&zero, &one).unwrap() < 1e-10);
        // pure-vs-mixed closed form √⟨0|I/2|0⟩ = 1/√2
        assert!((fidelity(&zero, &mixed).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-10);
        let f = fidelity(&mixed, &zero).unwrap();
        assert!((f - fidelity(&zero, &mixed).unwrap()).abs() < 1e-12, "symmetry");
    }

    #[test]
    fn hellinger_examples() {
        let zero = DensityMatrix::basis_proj(qubit("Q"), 0).unwrap();
        let one = DensityMatrix::basis_proj(qubit("Q"), 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(qubit("Q"));
        assert!(hellinger(&zero, &zero).unwrap() < 1e-10);
        assert!((hellinger(&zero, &one).unwrap() - 1.0).abs() < 1e-10);
        let want = (1.0 - 1.0 / 2f64.sqrt()).sqrt();
        assert!((hellinger(&zero, &mixed).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis_proj(qubit("Q"), 0).unwrap();
        let one = DensityMatrix::basis_proj(qubit("Q"), 1).unwrap();
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-10);
        // |0⟩ vs |+⟩: eigenvalues of the difference are ±1/√2 → ‖·‖₁ = √2
        let r = 1.0 / 2f64.sqrt();
        let plus = PureState::from_amplitudes(qubit("Q"), vec![c(r, 0.), c(r, 0.)])
            .unwrap()
            .to_density();
        assert!((trace_distance(&zero, &plus).unwrap() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        let mixed = DensityMatrix::maximally_mixed(qubit("Q"));
        assert!((vn_entropy(&mixed, &["Q"]).unwrap() - 1.0).abs() < 1e-12);
        let d = diag("Q", &[0.75, 0.25]);
        assert!((vn_entropy(&d, &["Q"]).unwrap() - 0.8112781244591328).abs() < 1e-12);
        // pure state, full system → 0
        let b = bell().to_density();
        assert!(vn_entropy(&b, &["A", "B"]).unwrap().abs() < 1e-10);
        assert!((vn_entropy(&b, &["A"]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_examples() {
        let zero = DensityMatrix::basis_proj(qubit("Q"), 0).unwrap();
        let one = DensityMatrix::basis_proj(qubit("Q"), 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(qubit("Q"));
        assert_eq!(
            relative_entropy(&zero, &zero).unwrap().finite().map(|v| v.abs() < 1e-10),
            Some(true)
        );
        let d = relative_entropy(&zero, &mixed).unwrap().finite().unwrap();
        assert!((d - 1.0).abs() < 1e-10);
        assert!(relative_entropy(&zero, &one).unwrap().is_infinite());
    }

    #[test]
    fn mutual_information_examples() {
        let a = DensityMatrix::maximally_mixed(qubit("A"));
        let b = DensityMatrix::basis_proj(qubit("B"), 0).unwrap();
        let prod = tensor(&a, &b).unwrap();
        assert!(mutual_information(&prod, &["A"], &["B"]).unwrap().abs() < 1e-10);
        let bell = bell().to_density();
        assert!((mutual_information(&bell, &["A"], &["B"]).unwrap() - 2.0).abs() < 1e-10);
        // classical copied uniform bit: Σ ½|xx⟩⟨xx|
        let sys = RegisterSystem::of(&[("X", 2), ("R", 2)]).unwrap();
        let m = CMat::from_diagonal(&DVector::from_vec(vec![
            c(0.5, 0.),
            c(0., 0.),
            c(0., 0.),
            c(0.5, 0.),
        ]));
        let copied = DensityMatrix::new(sys, m).unwrap();
        assert!((mutual_information(&copied, &["X"], &["R"]).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cmi_examples() {
        // A, B, C fully product → 0
        let a = DensityMatrix::maximally_mixed(qubit("A"));
        let b = DensityMatrix::maximally_mixed(qubit("B"));
        let cc = DensityMatrix::maximally_mixed(qubit("C"));
        let abc = tensor(&tensor(&a, &b).unwrap(), &cc).unwrap();
        assert!(
            conditional_mutual_information(&abc, &["A"], &["B"], &["C"])
                .unwrap()
                .abs()
                < 1e-10
        );
        // classical B = A⊕C, A and C uniform: I(A;B|C) = 1
        let sys = RegisterSystem::of(&[("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let mut m = CMat::from_element(8, 8, c(0., 0.));
        for a_val in 0..2usize {
            for c_val in 0..2usize {
                let b_val = a_val ^ c_val;
                let idx = a_val * 4 + b_val * 2 + c_val;
                m[(idx, idx)] = c(0.25, 0.);
            }
        }
        let rho = DensityMatrix::new(sys, m).unwrap();
        let v = conditional_mutual_information(&rho, &["A"], &["B"], &["C"]).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mi_equals_relative_entropy_to_product() {
        let bell = bell().to_density();
        let pa = bell.partial_trace(&["A"]).unwrap();
        let pb = bell.partial_trace(&["B"]).unwrap();
        let prod = tensor(&pa, &pb).unwrap();
        let d = relative_entropy(&bell, &prod).unwrap().finite().unwrap();
        let mi = mutual_information(&bell, &["A"], &["B"]).unwrap();
        assert!((d - mi).abs() < 1e-8);
    }
}
