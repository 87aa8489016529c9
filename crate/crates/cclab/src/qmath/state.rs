//! Pure states and density matrices over labeled register systems.

use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::json;

use super::linalg::{self, CMat};
use super::system::{Register, RegisterSystem};
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PureState {
    system: RegisterSystem,
    amps: DVector<Complex64>,
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    system: RegisterSystem,
    mat: CMat,
}

impl PureState {
    pub fn new(system: RegisterSystem, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != system.dim() {
            return Err(Error::SystemMismatch(format!(
                "amplitude length {} vs system dim {}",
                amps.len(),
                system.dim()
            )));
        }
        let n = amps.norm();
        if (n - 1.0).abs() > TOL {
            return Err(Error::Invariant(format!("state norm {n} != 1")));
        }
        Ok(PureState { system, amps })
    }

    /// Computational basis state |index⟩.
    pub fn basis(system: RegisterSystem, index: usize) -> Result<Self> {
        let mut amps = DVector::from_element(system.dim(), Complex64::new(0.0, 0.0));
        if index >= system.dim() {
            return Err(Error::Domain(format!("basis index {index} out of range")));
        }
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { system, amps })
    }

    pub fn from_amplitudes(system: RegisterSystem, raw: Vec<Complex64>) -> Result<Self> {
        Self::new(system, DVector::from_vec(raw))
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            system: self.system.clone(),
            mat: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let system = self.system.concat(&other.system)?;
        Ok(PureState {
            system,
            amps: self.amps.kronecker(&other.amps),
        })
    }

    /// Marginal density matrix on `keep` (system order preserved).
    pub fn marginal(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let kept = self.system.positions_sorted(keep)?;
        let traced = self.system.complement(&kept);
        let koff = self.system.offsets_of(&kept);
        let toff = self.system.offsets_of(&traced);
        let sub = self.system.subsystem(keep)?;
        let d = sub.dim();
        let mut mat = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
        for (a, &ka) in koff.iter().enumerate() {
            for (b, &kb) in koff.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &toff {
                    acc += self.amps[ka + t] * self.amps[kb + t].conj();
                }
                mat[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix { system: sub, mat })
    }

    /// ⟨self|other⟩; `other` may list the same registers in another order.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        let other = other.permuted(&self.system.names())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Reorder registers to `order` (must be a permutation of the names).
    pub fn permuted(&self, order: &[&str]) -> Result<PureState> {
        if order.len() != self.system.len() {
            return Err(Error::SystemMismatch("permutation arity".into()));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|n| self.system.position(n))
            .collect::<Result<_>>()?;
        let regs: Vec<Register> = positions
            .iter()
            .map(|&p| self.system.registers()[p].clone())
            .collect();
        let new_sys = RegisterSystem::with_cap(regs, usize::MAX)?;
        let mut amps = DVector::from_element(self.system.dim(), Complex64::new(0.0, 0.0));
        let strides = self.system.strides();
        for new_idx in 0..new_sys.dim() {
            let digits = new_sys.decode(new_idx);
            let old_idx: usize = digits
                .iter()
                .zip(&positions)
                .map(|(d, &p)| d * strides[p])
                .sum();
            amps[new_idx] = self.amps[old_idx];
        }
        Ok(PureState { system: new_sys, amps })
    }

    pub fn renamed(&self, map: &dyn Fn(&str) -> String) -> Result<PureState> {
        Ok(PureState {
            system: self.system.renamed(map)?,
            amps: self.amps.clone(),
        })
    }

    /// Apply an isometry `op` (out_dim × in_dim) to the registers `targets`
    /// (in the listed order); they are replaced by `outputs`. The resulting
    /// register order is [untouched registers…, outputs…].
    pub fn apply(&self, op: &CMat, targets: &[&str], outputs: Vec<Register>) -> Result<PureState> {
        let tpos: Vec<usize> = targets
            .iter()
            .map(|n| self.system.position(n))
            .collect::<Result<_>>()?;
        {
            let mut seen = tpos.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != tpos.len() {
                return Err(Error::Domain("target register listed twice".into()));
            }
        }
        let in_dim: usize = tpos.iter().map(|&p| self.system.registers()[p].dim).product();
        let out_dim: usize = outputs.iter().map(|r| r.dim).product();
        if op.ncols() != in_dim || op.nrows() != out_dim {
            return Err(Error::SystemMismatch(format!(
                "operator is {}x{}, expected {}x{}",
                op.nrows(),
                op.ncols(),
                out_dim,
                in_dim
            )));
        }
        let ctx: Vec<usize> = self.system.complement(&tpos);
        let coff = self.system.offsets_of(&ctx);
        let toff = self.system.offsets_of(&tpos);
        let mut regs: Vec<Register> = ctx
            .iter()
            .map(|&p| self.system.registers()[p].clone())
            .collect();
        for r in &outputs {
            if regs.iter().any(|q| q.name == r.name) {
                return Err(Error::NameCollision(r.name.clone()));
            }
            regs.push(r.clone());
        }
        let new_sys = RegisterSystem::with_cap(regs, usize::MAX)?;
        let mut amps = DVector::from_element(new_sys.dim(), Complex64::new(0.0, 0.0));
        for (c, &cin) in coff.iter().enumerate() {
            let base_out = c * out_dim;
            for o in 0..out_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &tin) in toff.iter().enumerate() {
                    let w = op[(o, t)];
                    if w.norm_sqr() != 0.0 {
                        acc += w * self.amps[cin + tin];
                    }
                }
                amps[base_out + o] = acc;
            }
        }
        Ok(PureState { system: new_sys, amps })
    }

    /// Project register `name` onto basis `value`: returns the outcome
    /// probability and the normalized conditional state without that register.
    pub fn condition(&self, name: &str, value: usize) -> Result<(f64, Option<PureState>)> {
        let p = self.system.position(name)?;
        let reg = &self.system.registers()[p];
        if value >= reg.dim {
            return Err(Error::Domain(format!("value {value} out of range for {name}")));
        }
        let rest = self.system.complement(&[p]);
        let roff = self.system.offsets_of(&rest);
        let voff = self.system.strides()[p] * value;
        let mut amps = DVector::from_element(roff.len(), Complex64::new(0.0, 0.0));
        for (i, &r) in roff.iter().enumerate() {
            amps[i] = self.amps[r + voff];
        }
        let prob = amps.norm_squared();
        if prob <= 1e-15 {
            return Ok((prob, None));
        }
        let regs: Vec<Register> = rest
            .iter()
            .map(|&q| self.system.registers()[q].clone())
            .collect();
        let sys = RegisterSystem::with_cap(regs, usize::MAX)?;
        let amps = amps / Complex64::new(prob.sqrt(), 0.0);
        Ok((prob, Some(PureState { system: sys, amps })))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "system": self.system.registers().iter()
                .map(|r| json!({"name": r.name, "dim": r.dim})).collect::<Vec<_>>(),
            "amplitudes": self.amps.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(),
        })
    }
}

impl DensityMatrix {
    pub fn new(system: RegisterSystem, mat: CMat) -> Result<Self> {
        if mat.nrows() != system.dim() || mat.ncols() != system.dim() {
            return Err(Error::SystemMismatch("matrix side vs system dim".into()));
        }
        let herm_err = (&mat - mat.adjoint()).norm() / 2.0;
        if herm_err > TOL {
            return Err(Error::Invariant(format!("not Hermitian (dev {herm_err:.2e})")));
        }
        let tr = linalg::trace(&mat);
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(Error::Invariant(format!("trace {tr} != 1")));
        }
        let (vals, _) = linalg::eigh(&mat);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -TOL {
            return Err(Error::Invariant(format!("negative eigenvalue {min:.2e}")));
        }
        Ok(DensityMatrix { system, mat })
    }

    /// Skip invariant checks (for internal compositions of checked states).
    pub fn new_unchecked(system: RegisterSystem, mat: CMat) -> Self {
        DensityMatrix { system, mat }
    }

    pub fn maximally_mixed(system: RegisterSystem) -> Self {
        let d = system.dim();
        let mat = CMat::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        DensityMatrix { system, mat }
    }

    pub fn basis_proj(system: RegisterSystem, index: usize) -> Result<Self> {
        Ok(PureState::basis(system, index)?.to_density())
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        let kept = self.system.positions_sorted(keep)?;
        let traced = self.system.complement(&kept);
        let koff = self.system.offsets_of(&kept);
        let toff = self.system.offsets_of(&traced);
        let sub = self.system.subsystem(keep)?;
        let d = sub.dim();
        let mut mat = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
        for (a, &ka) in koff.iter().enumerate() {
            for (b, &kb) in koff.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &toff {
                    acc += self.mat[(ka + t, kb + t)];
                }
                mat[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix { system: sub, mat })
    }

    pub fn renamed(&self, map: &dyn Fn(&str) -> String) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            system: self.system.renamed(map)?,
            mat: self.mat.clone(),
        })
    }

    pub fn permuted(&self, order: &[&str]) -> Result<DensityMatrix> {
        if order.len() != self.system.len() {
            return Err(Error::SystemMismatch("permutation arity".into()));
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|n| self.system.position(n))
            .collect::<Result<_>>()?;
        let regs: Vec<Register> = positions
            .iter()
            .map(|&p| self.system.registers()[p].clone())
            .collect();
        let new_sys = RegisterSystem::with_cap(regs, usize::MAX)?;
        let strides = self.system.strides();
        let remap: Vec<usize> = (0..new_sys.dim())
            .map(|i| {
                new_sys
                    .decode(i)
                    .iter()
                    .zip(&positions)
                    .map(|(d, &p)| d * strides[p])
                    .sum()
            })
            .collect();
        let d = new_sys.dim();
        let mut mat = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
        for i in 0..d {
            for j in 0..d {
                mat[(i, j)] = self.mat[(remap[i], remap[j])];
            }
        }
        Ok(DensityMatrix { system: new_sys, mat })
    }

    /// Eigen-purification: |ψ⟩ = Σᵢ √λᵢ |vᵢ⟩|i⟩ on (system…, ref_name).
    pub fn purify(&self, ref_name: &str) -> Result<PureState> {
        if self.system.contains(ref_name) {
            return Err(Error::NameCollision(ref_name.to_string()));
        }
        let d = self.system.dim();
        let sys = self
            .system
            .concat(&RegisterSystem::with_cap(vec![Register::new(ref_name, d)], usize::MAX)?)?;
        let (vals, vecs) = linalg::eigh(&self.mat);
        let mut amps = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
        for i in 0..d {
            let l = linalg::clip(vals[i]).max(0.0).sqrt();
            if l == 0.0 {
                continue;
            }
            for p in 0..d {
                amps[p * d + i] = vecs[(p, i)] * Complex64::new(l, 0.0);
            }
        }
        // renormalize tiny clipping drift
        let n = amps.norm();
        amps /= Complex64::new(n, 0.0);
        Ok(PureState { system: sys, amps })
    }

    /// Apply an isometry to `targets` (replaced by `outputs`) by purifying,
    /// acting on the purification, and tracing the reference back out.
    pub fn apply_isometry(
        &self,
        op: &CMat,
        targets: &[&str],
        outputs: Vec<Register>,
    ) -> Result<DensityMatrix> {
        let pure = self.purify("__ref")?;
        let after = pure.apply(op, targets, outputs)?;
        let keep: Vec<&str> = after
            .system()
            .names()
            .into_iter()
            .filter(|n| *n != "__ref")
            .collect();
        after.marginal(&keep)
    }

    /// Project classical register `name` to `value` and drop it.
    pub fn condition(&self, name: &str, value: usize) -> Result<(f64, Option<DensityMatrix>)> {
        let p = self.system.position(name)?;
        let reg = &self.system.registers()[p];
        if value >= reg.dim {
            return Err(Error::Domain(format!("value {value} out of range for {name}")));
        }
        let rest = self.system.complement(&[p]);
        let roff = self.system.offsets_of(&rest);
        let voff = self.system.strides()[p] * value;
        let d = roff.len();
        let mut mat = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
        for (i, &a) in roff.iter().enumerate() {
            for (j, &b) in roff.iter().enumerate() {
                mat[(i, j)] = self.mat[(a + voff, b + voff)];
            }
        }
        let prob = linalg::trace(&mat).re;
        if prob <= 1e-15 {
            return Ok((prob.max(0.0), None));
        }
        let regs: Vec<Register> = rest
            .iter()
            .map(|&q| self.system.registers()[q].clone())
            .collect();
        let sys = RegisterSystem::with_cap(regs, usize::MAX)?;
        mat /= Complex64::new(prob, 0.0);
        Ok((prob, Some(DensityMatrix { system: sys, mat })))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.system.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.mat[(i, j)];
                entries.push(json!([z.re, z.im]));
            }
        }
        json!({
            "system": self.system.registers().iter()
                .map(|r| json!({"name": r.name, "dim": r.dim})).collect::<Vec<_>>(),
            "entries": entries,
        })
    }
}

/// Kronecker product of density matrices on disjoint registers.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let system = a.system().concat(b.system())?;
    Ok(DensityMatrix {
        system,
        mat: linalg::kron(a.mat(), b.mat()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> PureState {
        let sys = RegisterSystem::of(&[("A", 2), ("B", 2)]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        PureState::from_amplitudes(sys, vec![c(r, 0.), c(0., 0.), c(0., 0.), c(r, 0.)]).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let m = bell().marginal(&["A"]).unwrap();
        assert!((m.mat()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((m.mat()[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(m.mat()[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn tensor_then_trace_roundtrip() {
        let a = DensityMatrix::maximally_mixed(RegisterSystem::of(&[("A", 2)]).unwrap());
        let sys_b = RegisterSystem::of(&[("B", 2)]).unwrap();
        let b = DensityMatrix::basis_proj(sys_b, 0).unwrap();
        let ab = tensor(&a, &b).unwrap();
        let back = ab.partial_trace(&["A"]).unwrap();
        assert!((back.mat() - a.mat()).norm() < 1e-12);
    }

    #[test]
    fn kron_of_basis_projectors() {
        // |0⟩⟨0| ⊗ |1⟩⟨1| = diag(0,1,0,0)
        let a = DensityMatrix::basis_proj(RegisterSystem::of(&[("A", 2)]).unwrap(), 0).unwrap();
        let b = DensityMatrix::basis_proj(RegisterSystem::of(&[("B", 2)]).unwrap(), 1).unwrap();
        let ab = tensor(&a, &b).unwrap();
        for i in 0..4 {
            let want = if i == 1 { 1.0 } else { 0.0 };
            assert!((ab.mat()[(i, i)].re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_rejects_name_collision() {
        let a = DensityMatrix::maximally_mixed(RegisterSystem::of(&[("A", 2)]).unwrap());
        assert!(tensor(&a, &a).is_err());
    }

    #[test]
    fn apply_hadamard() {
        let sys = RegisterSystem::of(&[("Q", 2)]).unwrap();
        let zero = PureState::basis(sys, 0).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let h = CMat::from_row_slice(2, 2, &[c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)]);
        let plus = zero.apply(&h, &["Q"], vec![Register::new("Q", 2)]).unwrap();
        assert!((plus.amps()[0].re - r).abs() < 1e-12);
        assert!((plus.amps()[1].re - r).abs() < 1e-12);
    }

    #[test]
    fn permute_two_qubits() {
        let sys = RegisterSystem::of(&[("A", 2), ("B", 2)]).unwrap();
        // |01⟩ on (A,B) → |10⟩ on (B,A)
        let s = PureState::basis(sys, 1).unwrap();
        let p = s.permuted(&["B", "A"]).unwrap();
        assert!((p.amps()[2].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_recovers_marginal() {
        let sys = RegisterSystem::of(&[("X", 2)]).unwrap();
        let mat = CMat::from_diagonal(&DVector::from_vec(vec![c(0.75, 0.), c(0.25, 0.)]));
        let rho = DensityMatrix::new(sys, mat).unwrap();
        let psi = rho.purify("R").unwrap();
        let back = psi.marginal(&["X"]).unwrap();
        assert!((back.mat() - rho.mat()).norm() < 1e-10);
    }

    #[test]
    fn condition_on_classical_register() {
        let s = bell();
        let (p0, rest) = s.condition("A", 0).unwrap();
        assert!((p0 - 0.5).abs() < 1e-12);
        let rest = rest.unwrap();
        assert!((rest.amps()[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_invariants_enforced() {
        let sys = RegisterSystem::of(&[("A", 2)]).unwrap();
        let bad = CMat::from_diagonal(&DVector::from_vec(vec![c(0.9, 0.), c(0.2, 0.)]));
        assert!(DensityMatrix::new(sys.clone(), bad).is_err());
        let neg = CMat::from_diagonal(&DVector::from_vec(vec![c(1.1, 0.), c(-0.1, 0.)]));
        assert!(DensityMatrix::new(sys, neg).is_err());
    }
}
