//! Exact finite joint distributions, stored sparsely with deterministic
//! (lexicographic) atom order, plus their Shannon quantities and the diagonal
//! embedding into density matrices.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::json;

use super::linalg::CMat;
use super::state::{DensityMatrix, PureState};
use super::system::{Register, RegisterSystem};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Variable { name: name.into(), card }
    }
}

#[derive(Clone, Debug)]
pub struct ProbTable {
    vars: Vec<Variable>,
    atoms: BTreeMap<Vec<usize>, f64>,
}

impl ProbTable {
    pub fn new(vars: Vec<Variable>, weights: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        for (a, w) in weights {
            if a.len() != vars.len() {
                return Err(Error::Domain("assignment arity mismatch".into()));
            }
            for (v, &x) in vars.iter().zip(&a) {
                if x >= v.card {
                    return Err(Error::Domain(format!("value {x} out of range for {}", v.name)));
                }
            }
            if w < 0.0 {
                return Err(Error::Invariant(format!("negative weight {w}")));
            }
            if w > 0.0 {
                *atoms.entry(a).or_insert(0.0) += w;
            }
        }
        let total: f64 = atoms.values().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Invariant(format!("weights sum to {total}")));
        }
        Ok(ProbTable { vars, atoms })
    }

    /// Build from a density function over all joint assignments.
    pub fn from_fn(vars: Vec<Variable>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let total: usize = vars.iter().map(|v| v.card).product();
        let mut weights = Vec::new();
        for mut idx in 0..total {
            let mut a = vec![0usize; vars.len()];
            for i in (0..vars.len()).rev() {
                a[i] = idx % vars[i].card;
                idx /= vars[i].card;
            }
            let w = f(&a);
            if w != 0.0 {
                weights.push((a, w));
            }
        }
        Self::new(vars, weights)
    }

    pub fn uniform(vars: Vec<Variable>) -> Result<Self> {
        let total: usize = vars.iter().map(|v| v.card).product();
        let w = 1.0 / total as f64;
        Self::from_fn(vars, |_| w)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.atoms.iter().map(|(a, &w)| (a, w))
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.atoms.get(assignment).copied().unwrap_or(0.0)
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.vars
                    .iter()
                    .position(|v| v.name == *n)
                    .ok_or_else(|| Error::UnknownRegister(n.to_string()))
            })
            .collect()
    }

    /// Marginal over `names` (kept in table order).
    pub fn marginal(&self, names: &[&str]) -> Result<ProbTable> {
        let mut ps = self.positions(names)?;
        ps.sort_unstable();
        ps.dedup();
        let vars: Vec<Variable> = ps.iter().map(|&p| self.vars[p].clone()).collect();
        let mut atoms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (a, w) in &self.atoms {
            let key: Vec<usize> = ps.iter().map(|&p| a[p]).collect();
            *atoms.entry(key).or_insert(0.0) += *w;
        }
        Ok(ProbTable { vars, atoms })
    }

    /// Condition on `name = value`; returns (probability, conditional table
    /// without that variable). Errors if the event has zero probability.
    pub fn condition(&self, name: &str, value: usize) -> Result<(f64, ProbTable)> {
        let p = self.positions(&[name])?[0];
        let mut atoms: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (a, w) in &self.atoms {
            if a[p] == value {
                let mut key = a.clone();
                key.remove(p);
                *atoms.entry(key).or_insert(0.0) += *w;
                total += *w;
            }
        }
        if total <= 0.0 {
            return Err(Error::Domain(format!("event {name}={value} has probability 0")));
        }
        for w in atoms.values_mut() {
            *w /= total;
        }
        let mut vars = self.vars.clone();
        vars.remove(p);
        Ok((total, ProbTable { vars, atoms }))
    }

    /// Shannon entropy H(names) in bits.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let m = self.marginal(names)?;
        Ok(m
            .atoms
            .values()
            .map(|&w| if w > 0.0 { -w * w.log2() } else { 0.0 })
            .sum())
    }

    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        let ab: Vec<&str> = a.iter().chain(b).copied().collect();
        Ok(self.entropy(a)? + self.entropy(b)? - self.entropy(&ab)?)
    }

    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64> {
        let ac: Vec<&str> = a.iter().chain(c).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?)
    }

    /// Diagonal embedding: registers = variables, diagonal = weights.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let sys = RegisterSystem::new(
            self.vars.iter().map(|v| Register::new(&v.name, v.card)).collect(),
        )?;
        let d = sys.dim();
        let mut m = CMat::from_element(d, d, Complex64::new(0.0, 0.0));
        for (a, w) in &self.atoms {
            let i = sys.encode(a);
            m[(i, i)] = Complex64::new(*w, 0.0);
        }
        DensityMatrix::new(sys, m)
    }

    /// Dense weights in lexicographic assignment order.
    pub fn dense_weights(&self) -> Vec<f64> {
        let total: usize = self.vars.iter().map(|v| v.card).product();
        let mut out = vec![0.0; total];
        let strides = {
            let mut s = vec![1usize; self.vars.len()];
            for i in (0..self.vars.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * self.vars[i + 1].card;
            }
            s
        };
        for (a, w) in &self.atoms {
            let idx: usize = a.iter().zip(&strides).map(|(x, s)| x * s).sum();
            out[idx] = *w;
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "variables": self.vars.iter().map(|v| json!({
                "name": v.name,
                "support": (0..v.card).collect::<Vec<usize>>(),
            })).collect::<Vec<_>>(),
            "weights": self.dense_weights(),
        })
    }

    /// Largest absolute weight difference against another table on the same
    /// variables (atom-by-atom, in lexicographic order).
    pub fn max_abs_diff(&self, other: &ProbTable) -> Result<f64> {
        if self.vars != other.vars {
            return Err(Error::SystemMismatch("table variables differ".into()));
        }
        let mut worst = 0.0f64;
        for (a, w) in &self.atoms {
            worst = worst.max((w - other.prob(a)).abs());
        }
        for (a, w) in &other.atoms {
            worst = worst.max((w - self.prob(a)).abs());
        }
        Ok(worst)
    }
}

/// Query-style entry point mirroring the classical information measures.
pub enum Query<'a> {
    Entropy(&'a [&'a str]),
    Mi(&'a [&'a str], &'a [&'a str]),
    Cmi(&'a [&'a str], &'a [&'a str], &'a [&'a str]),
}

pub fn classical_measures(p: &ProbTable, query: Query<'_>) -> Result<f64> {
    match query {
        Query::Entropy(a) => p.entropy(a),
        Query::Mi(a, b) => p.mutual_information(a, b),
        Query::Cmi(a, b, c) => p.conditional_mutual_information(a, b, c),
    }
}

/// Canonical purification Σ_i √p(i) |i⟩|i⟩: a coherent copy of the table into
/// mirror registers named `R_<var>`.
pub fn canonical_purification(p: &ProbTable) -> Result<PureState> {
    let regs: Vec<Register> = p
        .vars
        .iter()
        .map(|v| Register::new(&v.name, v.card))
        .chain(p.vars.iter().map(|v| Register::new(format!("R_{}", v.name), v.card)))
        .collect();
    let sys = RegisterSystem::with_cap(regs, usize::MAX)?;
    let primary = RegisterSystem::new(
        p.vars.iter().map(|v| Register::new(&v.name, v.card)).collect(),
    )?;
    let d = primary.dim();
    let mut amps = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    for (a, w) in &p.atoms {
        let i = primary.encode(a);
        amps[i * d + i] = Complex64::new(w.sqrt(), 0.0);
    }
    PureState::new(sys, amps)
}
