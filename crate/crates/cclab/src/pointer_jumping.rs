//! Symmetric k-ary pointer jumping.
//!
//! Players hold functions x, y : [k]^{<n} → [k] on the internal nodes of the
//! complete k-ary tree of depth n and f, g : [k]^n → {0,1} on its leaves.
//! The target leaf ẑ follows the pointer sums x(w)+y(w) mod k from the root;
//! the task output is f(ẑ)+g(ẑ) mod 2. Strings are base-k digit vectors,
//! root (most significant) character first; node functions are flat arrays
//! under a level-order ranking of [k]^{<n}.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde_json::json;

use crate::error::{Error, Result};
use crate::protocol::{ExactCoins, ProtocolSpec, Speaker, Step, Transcript};
use crate::qmath::prob::{ProbTable, Variable};
use crate::seeds;

/// Upper bound on tree storage (internal nodes + leaves).
pub const NODE_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PJParams {
    pub k: usize,
    pub n: usize,
}

impl PJParams {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain("alphabet size k must be ≥ 2".into()));
        }
        if n < 1 {
            return Err(Error::Domain("depth n must be ≥ 1".into()));
        }
        let p = PJParams { k, n };
        let internal = p
            .checked_internal_count()
            .ok_or(Error::Size { estimate: usize::MAX, cap: NODE_CAP })?;
        let leaves = k
            .checked_pow(n as u32)
            .ok_or(Error::Size { estimate: usize::MAX, cap: NODE_CAP })?;
        let total = internal
            .checked_add(leaves)
            .ok_or(Error::Size { estimate: usize::MAX, cap: NODE_CAP })?;
        if total > NODE_CAP {
            return Err(Error::Size { estimate: total, cap: NODE_CAP });
        }
        Ok(p)
    }

    fn checked_internal_count(&self) -> Option<usize> {
        // 1 + k + … + k^{n−1}
        let mut acc = 0usize;
        let mut pow = 1usize;
        for _ in 0..self.n {
            acc = acc.checked_add(pow)?;
            pow = pow.checked_mul(self.k)?;
        }
        Some(acc)
    }

    pub fn internal_count(&self) -> usize {
        self.checked_internal_count().expect("checked at construction")
    }

    pub fn leaf_count(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    /// Level-order offset of depth `l`: number of strings shorter than l.
    fn level_offset(&self, l: usize) -> usize {
        let mut acc = 0usize;
        let mut pow = 1usize;
        for _ in 0..l {
            acc += pow;
            pow *= self.k;
        }
        acc
    }

    fn string_value(&self, z: &[usize]) -> usize {
        z.iter().fold(0usize, |acc, &c| acc * self.k + c)
    }

    pub fn internal_rank(&self, z: &[usize]) -> usize {
        debug_assert!(z.len() < self.n);
        self.level_offset(z.len()) + self.string_value(z)
    }

    pub fn leaf_rank(&self, z: &[usize]) -> usize {
        debug_assert!(z.len() == self.n);
        self.string_value(z)
    }

    /// All strings of length `l` in lexicographic order.
    pub fn strings_of_len(&self, l: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.k.pow(l as u32));
        let mut cur = vec![0usize; l];
        loop {
            out.push(cur.clone());
            let mut i = l;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.k {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

fn string_key(z: &[usize]) -> String {
    z.iter().map(|c| c.to_string()).collect()
}

/// x or y: one character per internal node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeFunction {
    pub params: PJParams,
    values: Vec<usize>,
}

impl NodeFunction {
    pub fn new(params: PJParams, values: Vec<usize>) -> Result<Self> {
        if values.len() != params.internal_count() {
            return Err(Error::Domain("node function domain incomplete".into()));
        }
        if values.iter().any(|&v| v >= params.k) {
            return Err(Error::Domain("node value out of alphabet".into()));
        }
        Ok(NodeFunction { params, values })
    }

    pub fn constant(params: PJParams, v: usize) -> Result<Self> {
        Self::new(params, vec![v; params.internal_count()])
    }

    pub fn get(&self, z: &[usize]) -> usize {
        self.values[self.params.internal_rank(z)]
    }

    pub fn set(&mut self, z: &[usize], v: usize) {
        let r = self.params.internal_rank(z);
        self.values[r] = v;
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Level-order values restricted to depths ≤ `depth`.
    pub fn prefix_values(&self, depth: usize) -> &[usize] {
        let end = self.params.level_offset((depth + 1).min(self.params.n));
        &self.values[..end]
    }
}

/// f or g: one bit per leaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafFunction {
    pub params: PJParams,
    values: Vec<u8>,
}

impl LeafFunction {
    pub fn new(params: PJParams, values: Vec<u8>) -> Result<Self> {
        if values.len() != params.leaf_count() {
            return Err(Error::Domain("leaf function domain incomplete".into()));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::Domain("leaf value not a bit".into()));
        }
        Ok(LeafFunction { params, values })
    }

    pub fn get(&self, z: &[usize]) -> u8 {
        self.values[self.params.leaf_rank(z)]
    }

    pub fn set(&mut self, z: &[usize], v: u8) {
        let r = self.params.leaf_rank(z);
        self.values[r] = v;
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PJInstance {
    pub params: PJParams,
    pub x: NodeFunction,
    pub y: NodeFunction,
    pub f: LeafFunction,
    pub g: LeafFunction,
    pub j: usize,
}

impl PJInstance {
    /// Support condition of the fooling distribution: x = y strictly above
    /// the hidden layer.
    pub fn validate(&self) -> Result<()> {
        if self.j >= self.params.n {
            return Err(Error::Domain("hidden layer j out of range".into()));
        }
        for l in 0..self.j {
            for z in self.params.strings_of_len(l) {
                if self.x.get(&z) != self.y.get(&z) {
                    return Err(Error::Invariant(format!(
                        "x({key}) != y({key}) above the hidden layer",
                        key = string_key(&z)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut x = serde_json::Map::new();
        let mut y = serde_json::Map::new();
        for l in 0..self.params.n {
            for z in self.params.strings_of_len(l) {
                x.insert(string_key(&z), json!(self.x.get(&z)));
                y.insert(string_key(&z), json!(self.y.get(&z)));
            }
        }
        let mut f = serde_json::Map::new();
        let mut g = serde_json::Map::new();
        for z in self.params.strings_of_len(self.params.n) {
            f.insert(string_key(&z), json!(self.f.get(&z)));
            g.insert(string_key(&z), json!(self.g.get(&z)));
        }
        json!({
            "k": self.params.k,
            "n": self.params.n,
            "j": self.j,
            "x": x,
            "y": y,
            "f": f,
            "g": g,
        })
    }
}

/// Membership in the consistent set: |z| > j and the character just below the
/// hidden layer matches the pointer sum at z's depth-j prefix.
pub fn is_consistent(z: &[usize], x: &NodeFunction, y: &NodeFunction, j: usize) -> Result<bool> {
    if z.len() <= j {
        return Err(Error::Domain(format!(
            "consistency is defined only for |z| > j (got |z|={}, j={j})",
            z.len()
        )));
    }
    let prefix = &z[..j];
    let want = (x.get(prefix) + y.get(prefix)) % x.params.k;
    Ok(z[j] == want)
}

/// The chosen child per depth-j node; implicit membership for all extensions.
#[derive(Clone, Debug)]
pub struct ConsistentSet {
    pub params: PJParams,
    pub j: usize,
    chosen: BTreeMap<Vec<usize>, usize>,
}

impl ConsistentSet {
    pub fn contains(&self, z: &[usize]) -> Result<bool> {
        if z.len() <= self.j {
            return Err(Error::Domain("membership defined only for |z| > j".into()));
        }
        Ok(self.chosen[&z[..self.j].to_vec()] == z[self.j])
    }

    pub fn chosen_child(&self, w: &[usize]) -> usize {
        self.chosen[&w.to_vec()]
    }

    /// |S| = k^j · (k^{n−j} − 1)/(k − 1).
    pub fn size(&self) -> usize {
        let k = self.params.k;
        let n = self.params.n;
        let mut per_node = 0usize; // 1 + k + … + k^{n−j−1}
        let mut pow = 1usize;
        for _ in 0..(n - self.j) {
            per_node += pow;
            pow *= k;
        }
        k.pow(self.j as u32) * per_node
    }
}

pub fn consistent_children(x: &NodeFunction, y: &NodeFunction, j: usize) -> ConsistentSet {
    let params = x.params;
    let mut chosen = BTreeMap::new();
    for w in params.strings_of_len(j) {
        let c = (x.get(&w) + y.get(&w)) % params.k;
        chosen.insert(w, c);
    }
    ConsistentSet { params, j, chosen }
}

/// ẑ: the unique root-to-leaf path following the pointer sums.
pub fn target_string(x: &NodeFunction, y: &NodeFunction) -> Vec<usize> {
    let params = x.params;
    let mut z = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        let c = (x.get(&z) + y.get(&z)) % params.k;
        z.push(c);
    }
    z
}

/// f(ẑ) + g(ẑ) mod 2.
pub fn evaluate_task(inst: &PJInstance) -> u8 {
    let z = target_string(&inst.x, &inst.y);
    (inst.f.get(&z) + inst.g.get(&z)) % 2
}

fn random_node_function(params: PJParams, rng: &mut seeds::Rng) -> NodeFunction {
    let values = (0..params.internal_count())
        .map(|_| rng.random_range(0..params.k))
        .collect();
    NodeFunction::new(params, values).expect("complete by construction")
}

fn random_leaf_function(params: PJParams, rng: &mut seeds::Rng) -> LeafFunction {
    let values = (0..params.leaf_count()).map(|_| rng.random_range(0..2u8)).collect();
    LeafFunction::new(params, values).expect("complete by construction")
}

/// One draw from the fooling distribution p.
pub fn sample_fooling(params: PJParams, seed: u64) -> PJInstance {
    sample_fooling_rng(params, &mut seeds::rng(seed))
}

pub fn sample_fooling_rng(params: PJParams, rng: &mut seeds::Rng) -> PJInstance {
    let j = rng.random_range(0..params.n);
    let x = random_node_function(params, rng);
    let mut y = random_node_function(params, rng);
    for l in 0..j {
        for z in params.strings_of_len(l) {
            y.set(&z, x.get(&z));
        }
    }
    let f = random_leaf_function(params, rng);
    let g = random_leaf_function(params, rng);
    PJInstance { params, x, y, f, g, j }
}

/// One draw from μ_b = p | ℰ_b, by direct construction (no rejection):
/// conditioning on ℰ_b only constrains values strictly inside the consistent
/// subtrees, so everything at depth ≤ j is sampled exactly as under p.
pub fn sample_hard(params: PJParams, b: u8, seed: u64) -> PJInstance {
    sample_hard_rng(params, b, &mut seeds::rng(seed))
}

pub fn sample_hard_rng(params: PJParams, b: u8, rng: &mut seeds::Rng) -> PJInstance {
    let j = rng.random_range(0..params.n);
    let x = random_node_function(params, rng);
    let mut y = random_node_function(params, rng);
    for l in 0..j {
        for z in params.strings_of_len(l) {
            y.set(&z, x.get(&z));
        }
    }
    // depth-j values of y stay free; they define the consistent set
    let set = consistent_children(&x, &y, j);
    for l in (j + 1)..params.n {
        for z in params.strings_of_len(l) {
            if set.contains(&z).expect("|z| > j") {
                y.set(&z, x.get(&z));
            }
        }
    }
    let f = random_leaf_function(params, rng);
    let mut g = random_leaf_function(params, rng);
    for z in params.strings_of_len(params.n) {
        if set.contains(&z).expect("leaves are below j") {
            g.set(&z, (f.get(&z) + b) % 2);
        }
    }
    PJInstance { params, x, y, f, g, j }
}

/// Does ℰ_b hold: x = y on consistent internal nodes, f⊕g = b on consistent
/// leaves?
pub fn event_holds(inst: &PJInstance, b: u8) -> bool {
    let set = consistent_children(&inst.x, &inst.y, inst.j);
    for l in (inst.j + 1)..inst.params.n {
        for z in inst.params.strings_of_len(l) {
            if set.contains(&z).unwrap() && inst.x.get(&z) != inst.y.get(&z) {
                return false;
            }
        }
    }
    for z in inst.params.strings_of_len(inst.params.n) {
        if set.contains(&z).unwrap() && (inst.f.get(&z) + inst.g.get(&z)) % 2 != b {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dist {
    P,
    Mu0,
    Mu1,
}

impl Dist {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(Dist::P),
            "mu0" => Ok(Dist::Mu0),
            "mu1" => Ok(Dist::Mu1),
            other => Err(Error::Config(format!("unknown distribution {other}"))),
        }
    }
}

/// All instances with their exact probabilities under `which`.
pub fn enumerate_instances(params: PJParams, which: Dist) -> Result<Vec<(PJInstance, f64)>> {
    let atoms = enumerate_p(params)?;
    match which {
        Dist::P => Ok(atoms),
        Dist::Mu0 | Dist::Mu1 => {
            let b = if which == Dist::Mu0 { 0 } else { 1 };
            let kept: Vec<(PJInstance, f64)> = atoms
                .into_iter()
                .filter(|(inst, _)| event_holds(inst, b))
                .collect();
            let total: f64 = kept.iter().map(|(_, w)| w).sum();
            Ok(kept.into_iter().map(|(i, w)| (i, w / total)).collect())
        }
    }
}

fn enumerate_p(params: PJParams) -> Result<Vec<(PJInstance, f64)>> {
    let ic = params.internal_count();
    let lc = params.leaf_count();
    let x_space = params.k.checked_pow(ic as u32).ok_or(Error::Size {
        estimate: usize::MAX,
        cap: crate::protocol::DEFAULT_ENUM_CAP,
    })?;
    let f_space = 1usize << lc;
    let estimate = params
        .n
        .saturating_mul(x_space)
        .saturating_mul(x_space)
        .saturating_mul(f_space)
        .saturating_mul(f_space);
    if estimate > crate::protocol::DEFAULT_ENUM_CAP {
        return Err(Error::Size { estimate, cap: crate::protocol::DEFAULT_ENUM_CAP });
    }
    let mut out = Vec::new();
    let digits = |mut v: usize, len: usize, base: usize| -> Vec<usize> {
        let mut d = vec![0usize; len];
        for i in (0..len).rev() {
            d[i] = v % base;
            v /= base;
        }
        d
    };
    for j in 0..params.n {
        let shared = params.level_offset(j); // nodes with depth < j
        let free = ic - shared;
        let y_space = params.k.pow(free as u32);
        let w_xy = 1.0 / (params.n as f64 * x_space as f64 * y_space as f64);
        for xv in 0..x_space {
            let x = NodeFunction::new(params, digits(xv, ic, params.k))?;
            for yfree in 0..y_space {
                let mut yvals = x.values()[..shared].to_vec();
                yvals.extend(digits(yfree, free, params.k));
                let y = NodeFunction::new(params, yvals)?;
                for fv in 0..f_space {
                    let f = LeafFunction::new(
                        params,
                        (0..lc).map(|i| ((fv >> (lc - 1 - i)) & 1) as u8).collect(),
                    )?;
                    for gv in 0..f_space {
                        let g = LeafFunction::new(
                            params,
                            (0..lc).map(|i| ((gv >> (lc - 1 - i)) & 1) as u8).collect(),
                        )?;
                        let inst = PJInstance {
                            params,
                            x: x.clone(),
                            y: y.clone(),
                            f: f.clone(),
                            g,
                            j,
                        };
                        out.push((inst, w_xy / (f_space as f64 * f_space as f64)));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn instance_vars(params: PJParams) -> Vec<Variable> {
    let ic = params.internal_count() as u32;
    let lc = params.leaf_count() as u32;
    vec![
        Variable::new("j", params.n),
        Variable::new("x", params.k.pow(ic)),
        Variable::new("y", params.k.pow(ic)),
        Variable::new("f", 1usize << lc),
        Variable::new("g", 1usize << lc),
    ]
}

fn instance_key(inst: &PJInstance) -> Vec<usize> {
    let k = inst.params.k;
    let enc_nodes = |v: &[usize]| v.iter().fold(0usize, |acc, &c| acc * k + c);
    let enc_leaves = |v: &[u8]| v.iter().fold(0usize, |acc, &c| (acc << 1) | c as usize);
    vec![
        inst.j,
        enc_nodes(inst.x.values()),
        enc_nodes(inst.y.values()),
        enc_leaves(inst.f.values()),
        enc_leaves(inst.g.values()),
    ]
}

/// Exact distribution as a five-variable table (j, x, y, f, g), with node and
/// leaf functions packed into single base-k / base-2 values in level order.
pub fn enumerate_distribution(params: PJParams, which: Dist) -> Result<ProbTable> {
    let atoms = enumerate_instances(params, which)?;
    let weights = atoms
        .into_iter()
        .map(|(inst, w)| (instance_key(&inst), w))
        .collect();
    ProbTable::new(instance_vars(params), weights)
}

/// The §3-style observation: conditioned on (j, x_{≤j}, y_{≤j}), the marginal
/// of (x, f) is the same under p, μ₀ and μ₁ — and symmetrically for (y, g).
pub fn check_marginal_equality(params: PJParams) -> Result<bool> {
    let p = enumerate_instances(params, Dist::P)?;
    let mu0 = enumerate_instances(params, Dist::Mu0)?;
    let mu1 = enumerate_instances(params, Dist::Mu1)?;
    Ok(marginals_match(params, &p, &mu0)? && marginals_match(params, &p, &mu1)?)
}

type CondKey = (usize, Vec<usize>, Vec<usize>); // (j, x_{≤j}, y_{≤j})
type CondMarginals = BTreeMap<CondKey, (f64, BTreeMap<Vec<usize>, f64>, BTreeMap<Vec<usize>, f64>)>;

fn conditional_marginals(atoms: &[(PJInstance, f64)]) -> CondMarginals {
    let mut out: CondMarginals = BTreeMap::new();
    for (inst, w) in atoms {
        let key: CondKey = (
            inst.j,
            inst.x.prefix_values(inst.j).to_vec(),
            inst.y.prefix_values(inst.j).to_vec(),
        );
        let entry = out.entry(key).or_insert_with(|| (0.0, BTreeMap::new(), BTreeMap::new()));
        entry.0 += w;
        let xf: Vec<usize> = inst
            .x
            .values()
            .iter()
            .copied()
            .chain(inst.f.values().iter().map(|&b| b as usize))
            .collect();
        let yg: Vec<usize> = inst
            .y
            .values()
            .iter()
            .copied()
            .chain(inst.g.values().iter().map(|&b| b as usize))
            .collect();
        *entry.1.entry(xf).or_insert(0.0) += w;
        *entry.2.entry(yg).or_insert(0.0) += w;
    }
    out
}

pub(crate) fn marginals_match(
    _params: PJParams,
    p: &[(PJInstance, f64)],
    mu: &[(PJInstance, f64)],
) -> Result<bool> {
    let cp = conditional_marginals(p);
    let cm = conditional_marginals(mu);
    for (key, (wp, xfp, ygp)) in &cp {
        let Some((wm, xfm, ygm)) = cm.get(key) else {
            // zero probability under μ: nothing to compare
            continue;
        };
        for (maps_p, maps_m) in [(xfp, xfm), (ygp, ygm)] {
            let keys: std::collections::BTreeSet<&Vec<usize>> =
                maps_p.keys().chain(maps_m.keys()).collect();
            for a in keys {
                let vp = maps_p.get(a).copied().unwrap_or(0.0) / wp;
                let vm = maps_m.get(a).copied().unwrap_or(0.0) / wm;
                if (vp - vm).abs() > 1e-12 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

pub type PJInputs = (NodeFunction, LeafFunction);

fn char_width(k: usize) -> usize {
    (usize::BITS - (k - 1).leading_zeros()) as usize
}

fn encode_char(c: usize, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (c >> i) & 1 == 1).collect()
}

fn decode_char(bits: &[bool], k: usize) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize) % k
}

fn prefix_from_transcript(t: &Transcript, k: usize, pairs: usize) -> Vec<usize> {
    let mut prefix = Vec::with_capacity(pairs);
    for r in 0..pairs {
        let a = decode_char(&t.events[2 * r].bits, k);
        let b = decode_char(&t.events[2 * r + 1].bits, k);
        prefix.push((a + b) % k);
    }
    prefix
}

/// Zero-error baseline: both parties reveal their pointer at the known target
/// prefix, level by level; Alice finally sends f(ẑ) and Bob outputs
/// f(ẑ)⊕g(ẑ). Exactly 2n⌈log₂k⌉ + 1 bits, always.
pub fn follow_path_protocol(params: PJParams) -> ProtocolSpec<PJInputs, PJInputs> {
    let w = char_width(params.k);
    let n = params.n;
    let k = params.k;
    let mut schedule = Vec::with_capacity(2 * n + 1);
    for _ in 0..n {
        schedule.push(Speaker::Alice);
        schedule.push(Speaker::Bob);
    }
    schedule.push(Speaker::Alice);
    ProtocolSpec {
        schedule,
        alice: Box::new(move |(x, f): &PJInputs, _c, t: &Transcript| {
            let e = t.events.len();
            if e == 2 * n {
                let z = prefix_from_transcript(t, k, n);
                Ok(Step::Send(vec![f.get(&z) == 1]))
            } else {
                let prefix = prefix_from_transcript(t, k, e / 2);
                Ok(Step::Send(encode_char(x.get(&prefix), w)))
            }
        }),
        bob: Box::new(move |(y, g): &PJInputs, _c, t: &Transcript| {
            let e = t.events.len();
            if e == 2 * n + 1 {
                let z = prefix_from_transcript(t, k, n);
                let f_hat = t.events[2 * n].bits[0] as u8;
                Ok(Step::Output(((f_hat + g.get(&z)) % 2) as u64))
            } else {
                let prefix = prefix_from_transcript(t, k, (e - 1) / 2);
                Ok(Step::Send(encode_char(y.get(&prefix), w)))
            }
        }),
        output_party: Speaker::Bob,
        exact_coins: Some(ExactCoins::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run;

    fn params(k: usize, n: usize) -> PJParams {
        PJParams::new(k, n).unwrap()
    }

    #[test]
    fn fooling_sample_respects_support() {
        for seed in 0..200 {
            let inst = sample_fooling(params(3, 3), seed);
            inst.validate().unwrap();
        }
    }

    #[test]
    fn fooling_n1_forces_j0() {
        for seed in 0..20 {
            assert_eq!(sample_fooling(params(2, 1), seed).j, 0);
        }
    }

    #[test]
    fn fooling_agreement_rates() {
        // Pr[x(z)=y(z)] = 1 above the layer, ≈ 1/2 at or below it (k=2)
        let p = params(2, 3);
        let mut below = [0usize; 2]; // (agreements, total)
        for seed in 0..10_000u64 {
            let inst = sample_fooling(p, seed);
            for l in 0..p.n {
                for z in p.strings_of_len(l) {
                    if l < inst.j {
                        assert_eq!(inst.x.get(&z), inst.y.get(&z));
                    } else {
                        below[0] += (inst.x.get(&z) == inst.y.get(&z)) as usize;
                        below[1] += 1;
                    }
                }
            }
        }
        let rate = below[0] as f64 / below[1] as f64;
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn consistency_predicate_j0() {
        // k=2, j=0, x(ε)=1, y(ε)=0: consistent ⇔ first character is 1
        let p = params(2, 2);
        let mut x = NodeFunction::constant(p, 0).unwrap();
        x.set(&[], 1);
        let y = NodeFunction::constant(p, 0).unwrap();
        for l in 1..=p.n {
            for z in p.strings_of_len(l) {
                assert_eq!(is_consistent(&z, &x, &y, 0).unwrap(), z[0] == 1);
            }
        }
        assert!(is_consistent(&[], &x, &y, 0).is_err());
    }

    #[test]
    fn consistent_set_size_formula() {
        // k=2, n=3, j=1 → 2 nodes × 3 descendants = 6
        let p = params(2, 3);
        for seed in 0..20 {
            let inst = sample_fooling(p, seed);
            let set = consistent_children(&inst.x, &inst.y, 1);
            assert_eq!(set.size(), 6);
            // brute count over all strings of length 2..3
            let mut count = 0;
            for l in 2..=3 {
                for z in p.strings_of_len(l) {
                    if set.contains(&z).unwrap() {
                        assert!(is_consistent(&z, &inst.x, &inst.y, 1).unwrap());
                        count += 1;
                    }
                }
            }
            assert_eq!(count, 6);
        }
    }

    #[test]
    fn consistent_set_size_matches_closed_form() {
        for (k, n) in [(2, 4), (3, 3), (4, 2)] {
            let p = params(k, n);
            for j in 0..n {
                let inst = sample_fooling(p, 17);
                let set = consistent_children(&inst.x, &inst.y, j);
                let want = k.pow(j as u32) * (k.pow((n - j) as u32) - 1) / (k - 1);
                assert_eq!(set.size(), want);
            }
        }
    }

    #[test]
    fn target_string_examples() {
        // k=2, n=2, x(ε)=1, y(ε)=0, x(1)=1, y(1)=1 → ẑ = "10"
        let p = params(2, 2);
        let mut x = NodeFunction::constant(p, 0).unwrap();
        let mut y = NodeFunction::constant(p, 0).unwrap();
        x.set(&[], 1);
        x.set(&[1], 1);
        y.set(&[1], 1);
        assert_eq!(target_string(&x, &y), vec![1, 0]);
        // all zeros → 0ⁿ
        let z = NodeFunction::constant(p, 0).unwrap();
        assert_eq!(target_string(&z, &z), vec![0, 0]);
        // y = −x mod k → sums vanish
        let p3 = params(3, 2);
        for seed in 0..10 {
            let inst = sample_fooling(p3, seed);
            let neg = NodeFunction::new(
                p3,
                inst.x.values().iter().map(|&v| (p3.k - v) % p3.k).collect(),
            )
            .unwrap();
            assert_eq!(target_string(&inst.x, &neg), vec![0, 0]);
        }
    }

    #[test]
    fn target_is_always_consistent() {
        for seed in 0..100 {
            let inst = sample_fooling(params(3, 3), seed);
            let z = target_string(&inst.x, &inst.y);
            assert!(is_consistent(&z, &inst.x, &inst.y, inst.j).unwrap());
        }
    }

    #[test]
    fn hard_samples_force_the_output() {
        for b in [0u8, 1u8] {
            for seed in 0..500 {
                let inst = sample_hard(params(2, 3), b, seed);
                inst.validate().unwrap();
                assert!(event_holds(&inst, b));
                assert_eq!(evaluate_task(&inst), b);
            }
        }
    }

    #[test]
    fn task_under_p_is_a_fair_coin() {
        let mut ones = 0usize;
        let trials = 10_000;
        for seed in 0..trials {
            ones += evaluate_task(&sample_fooling(params(2, 3), seed as u64)) as usize;
        }
        let mean = ones as f64 / trials as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn enumerated_p_marginal_on_j_uniform() {
        let t = enumerate_distribution(params(2, 2), Dist::P).unwrap();
        let mj = t.marginal(&["j"]).unwrap();
        assert!((mj.prob(&[0]) - 0.5).abs() < 1e-12);
        assert!((mj.prob(&[1]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mu_support_and_balance() {
        let p = params(2, 2);
        let mu0 = enumerate_instances(p, Dist::Mu0).unwrap();
        for (inst, _) in &mu0 {
            assert!(event_holds(inst, 0));
        }
        // Pr[ℰ₀|ℰ] = 1/2: both events have identical p-mass
        let all = enumerate_instances(p, Dist::P).unwrap();
        let w0: f64 = all.iter().filter(|(i, _)| event_holds(i, 0)).map(|(_, w)| w).sum();
        let w1: f64 = all.iter().filter(|(i, _)| event_holds(i, 1)).map(|(_, w)| w).sum();
        assert!((w0 - w1).abs() < 1e-12);
        // overlap of ℰ₀ and ℰ₁ is empty (every depth-j node has consistent leaves)
        let both: f64 = all
            .iter()
            .filter(|(i, _)| event_holds(i, 0) && event_holds(i, 1))
            .map(|(_, w)| w)
            .sum();
        assert_eq!(both, 0.0);
    }

    #[test]
    fn hard_sampler_matches_exact_conditioning() {
        // k=2, n=2: empirical frequencies of sample_hard converge to μ_b
        let p = params(2, 2);
        for b in [0u8, 1u8] {
            let which = if b == 0 { Dist::Mu0 } else { Dist::Mu1 };
            let exact = enumerate_distribution(p, which).unwrap();
            let trials = 200_000usize;
            let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for seed in 0..trials {
                let inst = sample_hard(p, b, seed as u64);
                *counts.entry(instance_key(&inst)).or_insert(0) += 1;
            }
            // compare on the exact support with a generous Monte-Carlo margin
            let mut worst: f64 = 0.0;
            for (a, w) in exact.atoms() {
                let emp = counts.get(a).copied().unwrap_or(0) as f64 / trials as f64;
                worst = worst.max((emp - w).abs());
            }
            // all sampled keys must lie in the exact support
            for k in counts.keys() {
                assert!(exact.prob(k) > 0.0, "sampled atom outside μ_{b} support");
            }
            assert!(worst < 5e-3, "worst deviation {worst}");
        }
    }

    #[test]
    fn marginal_equality_holds_at_tiny_sizes() {
        assert!(check_marginal_equality(params(2, 1)).unwrap());
        assert!(check_marginal_equality(params(2, 2)).unwrap());
    }

    #[test]
    fn corrupted_mu_fails_marginal_equality() {
        // Corrupt μ₀ with an extra constraint on the *value* of f at the
        // target leaf. This biases the conditional (x,f) marginal, which the
        // checker must catch. (Merely dropping a g=f constraint would not:
        // per-(x,f) compatibility counts stay constant, so the marginal
        // equality survives such a weakening.)
        let p = params(2, 2);
        let all = enumerate_instances(p, Dist::P).unwrap();
        let mu0 = enumerate_instances(p, Dist::Mu0).unwrap();
        let kept: Vec<(PJInstance, f64)> = mu0
            .iter()
            .filter(|(i, _)| i.f.get(&target_string(&i.x, &i.y)) == 0)
            .cloned()
            .collect();
        let total: f64 = kept.iter().map(|(_, w)| w).sum();
        let corrupted: Vec<(PJInstance, f64)> =
            kept.into_iter().map(|(i, w)| (i, w / total)).collect();
        assert!(!marginals_match(p, &all, &corrupted).unwrap());
    }

    #[test]
    fn follow_path_is_zero_error_with_fixed_cost() {
        for (k, n) in [(2, 3), (3, 2)] {
            let p = params(k, n);
            let proto = follow_path_protocol(p);
            let want_bits = 2 * n * char_width(k) + 1;
            for seed in 0..300u64 {
                let inst = sample_fooling(p, seed);
                let out = run(
                    &proto,
                    &(inst.x.clone(), inst.f.clone()),
                    &(inst.y.clone(), inst.g.clone()),
                    seed,
                )
                .unwrap();
                assert_eq!(out.output as u8, evaluate_task(&inst));
                assert_eq!(out.cost.bits_a_to_b + out.cost.bits_b_to_a, want_bits);
            }
        }
    }

    #[test]
    fn follow_path_bit_counts() {
        // k=2, n=4 → 9 bits; k=3, n=2 → 9 bits
        assert_eq!(2 * 4 * char_width(2) + 1, 9);
        assert_eq!(2 * 2 * char_width(3) + 1, 9);
        // and k=2, n=3 → 7 bits, measured on a run
        let p = params(2, 3);
        let proto = follow_path_protocol(p);
        let inst = sample_fooling(p, 5);
        let out = run(
            &proto,
            &(inst.x.clone(), inst.f.clone()),
            &(inst.y.clone(), inst.g.clone()),
            1,
        )
        .unwrap();
        assert_eq!(out.cost.bits_a_to_b + out.cost.bits_b_to_a, 7);
    }

    #[test]
    fn instance_json_shape() {
        let inst = sample_fooling(params(2, 2), 1);
        let v = inst.to_json();
        assert_eq!(v["k"], 2);
        assert!(v["x"].get("").is_some());
        assert!(v["f"].get("00").is_some());
    }
}
