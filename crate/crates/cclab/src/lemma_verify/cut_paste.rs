//! Distributional cut-and-paste: run a toy protocol on a product input ρ and
//! a correlated input σ with the same marginals; in each round measure how
//! far the live state is from forgetting the opposite input (ε_i), build the
//! controlled Uhlmann isometry V^i that realigns it, and verify the recursion
//!   γ₁ = δ₁ = ε₁,   γ_i, δ_i ≤ ε_i + ε_{i−1} + 2·Σ_{j ≤ i−2} ε_j.
//!
//! Round-i quantities (odd rounds: Alice just acted, so her side is aligned):
//!   ε_i = h(ρⁱ_{R_X Y R_Y B C}, ρ_{R_X} ⊗ ρⁱ_{Y R_Y B C})      (odd)
//!   ε_i = h(ρⁱ_{R_Y X R_X A C}, ρ_{R_Y} ⊗ ρⁱ_{X R_X A C})      (even)
//! V^i maps (X, A) → (X, X̃_i, R̃X_i, Ã_i) for odd i, the Y/B mirror for even
//! i; V⁰ renames B and creates a fresh copy of the canonical purification of
//! ρ_Y. γ_i (δ_i) is the Hellinger distance of V^i V^{i−1} ρⁱ (σⁱ) from the
//! fully detached product with the input purification.

use crate::error::{Error, Result};
use crate::lemma_verify::toy::ToyQuantumProtocol;
use crate::qmath::measures::{fidelity, pure_overlap};
use crate::qmath::prob::{canonical_purification, ProbTable, Variable};
use crate::qmath::state::{tensor, PureState};
use crate::qmath::uhlmann::{controlled_uhlmann, UhlmannIsometry};

const TOL: f64 = 1e-8;
const MARGINAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CutPasteTrace {
    /// eps[0] = 0 by definition; eps[i] for round i.
    pub eps: Vec<f64>,
    /// gamma[i], delta[i] for rounds i ≥ 1 (index 0 is 0).
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    /// Worst disagreement between the direct and the per-value mixture
    /// computation of ε_i.
    pub route_disagreement: f64,
    /// Worst |h(V^i ρ^i, target) − ε_i|: the isometries must attain the
    /// Hellinger distance they were built for.
    pub isometry_slack: f64,
}

impl CutPasteTrace {
    pub fn recursion_holds(&self, tol: f64) -> bool {
        let r = self.eps.len() - 1;
        if r < 1 {
            return false;
        }
        if (self.gamma[1] - self.eps[1]).abs() > tol || (self.delta[1] - self.eps[1]).abs() > tol {
            return false;
        }
        for i in 2..=r {
            let mut bound = self.eps[i] + self.eps[i - 1];
            for j in 1..=(i - 2) {
                bound += 2.0 * self.eps[j];
            }
            if self.gamma[i] > bound + tol || self.delta[i] > bound + tol {
                return false;
            }
        }
        true
    }
}

fn hell(overlap: f64) -> f64 {
    (1.0 - overlap.clamp(0.0, 1.0)).max(0.0).sqrt()
}

/// Round-i ε on the ρ run, computed two ways: directly as a mixed-state
/// Hellinger distance, and through the classical mixture over the opposite
/// reference register. Returns (ε, disagreement).
fn round_eps(state: &PureState, odd: bool) -> Result<(f64, f64)> {
    let (refreg, rest): (&str, [&str; 4]) = if odd {
        ("R_X", ["Y", "R_Y", "B", "C"])
    } else {
        ("R_Y", ["X", "R_X", "A", "C"])
    };
    let mut all = vec![refreg];
    all.extend(rest);
    let joint = state.marginal(&all)?.permuted(&all)?;
    let bar = state.marginal(&rest)?.permuted(&rest)?;
    let product = tensor(&state.marginal(&[refreg])?, &bar)?;
    let f_direct = fidelity(&joint, &product)?;
    let direct = hell(f_direct);
    // mixture route: F = Σ_x p(x) · F(ρ^{(x)}, ρ̄)
    let dim_ref = {
        let pos = joint.system().position(refreg)?;
        joint.system().registers()[pos].dim
    };
    let mut f_mix = 0.0;
    for x in 0..dim_ref {
        let (px, cond) = joint.condition(refreg, x)?;
        if let Some(cond) = cond {
            if px > 1e-14 {
                f_mix += px * fidelity(&cond, &bar)?;
            }
        }
    }
    // compare the routes on fidelity: the √(1−F) map is ill-conditioned at
    // F ≈ 1, so a Hellinger comparison would amplify float noise
    Ok((direct, (f_direct - f_mix).abs()))
}

/// The realigning map of one round, plus how to name its tilde outputs.
enum VMap {
    /// V⁰: rename B → B̃₀ and create |ρ_Y⟩ on (Ỹ₀, R̃Y₀).
    Base { tilde_y: PureState },
    Iso(UhlmannIsometry),
}

impl VMap {
    fn apply(&self, state: &PureState) -> Result<PureState> {
        match self {
            VMap::Base { tilde_y } => state
                .renamed(&|n| if n == "B" { "Bt0".into() } else { n.into() })?
                .tensor(tilde_y),
            VMap::Iso(v) => v.apply_to(state),
        }
    }
}

/// Rename one run-state's registers onto the round-i tilde layout: the
/// Alice-side tildes carry index `ai`, the Bob-side tildes index `bi`.
fn tilded(state: &PureState, ai: usize, bi: usize) -> Result<PureState> {
    state.renamed(&|n| match n {
        "X" => format!("Xt{ai}"),
        "R_X" => format!("RXt{ai}"),
        "A" => format!("At{ai}"),
        "Y" => format!("Yt{bi}"),
        "R_Y" => format!("RYt{bi}"),
        "B" => format!("Bt{bi}"),
        other => other.into(),
    })
}

/// Runs the protocol on ρ (product) and σ (same marginals), builds the per
/// round isometries from the ρ run and evaluates ε_i, γ_i, δ_i.
pub fn verify_cut_and_paste(
    protocol: &ToyQuantumProtocol,
    rho: &ProbTable,
    sigma: &ProbTable,
) -> Result<(CutPasteTrace, bool)> {
    if protocol.rounds() < 2 {
        return Err(Error::Domain("protocol must have at least 2 rounds".into()));
    }
    let rho_x = rho.marginal(&["X"])?;
    let rho_y = rho.marginal(&["Y"])?;
    // ρ must be product
    let product = ProbTable::from_fn(
        vec![
            Variable::new("X", protocol.x_dim),
            Variable::new("Y", protocol.y_dim),
        ],
        |a| rho_x.prob(&a[..1]) * rho_y.prob(&a[1..]),
    )?;
    if rho.max_abs_diff(&product)? > MARGINAL_TOL {
        return Err(Error::Domain("rho is not a product distribution".into()));
    }
    // σ must have matching marginals
    if sigma.marginal(&["X"])?.max_abs_diff(&rho_x)? > MARGINAL_TOL
        || sigma.marginal(&["Y"])?.max_abs_diff(&rho_y)? > MARGINAL_TOL
    {
        return Err(Error::Domain("sigma marginals do not match rho".into()));
    }

    let rho_states = protocol.run_on(rho)?;
    let sigma_states = protocol.run_on(sigma)?;
    let rounds = protocol.rounds();

    let canon_rho = canonical_purification(rho)?;
    let canon_sigma = canonical_purification(sigma)?;
    let canon_rho_x = canonical_purification(&rho_x)?;
    let canon_rho_y = canonical_purification(&rho_y)?;

    let mut eps = vec![0.0f64];
    let mut gamma = vec![0.0f64];
    let mut delta = vec![0.0f64];
    let mut route_disagreement = 0.0f64;
    let mut isometry_slack = 0.0f64;
    let mut v_prev = VMap::Base {
        tilde_y: canon_rho_y.renamed(&|n| match n {
            "Y" => "Yt0".into(),
            "R_Y" => "RYt0".into(),
            other => other.into(),
        })?,
    };

    for i in 1..=rounds {
        let odd = i % 2 == 1;
        let state = &rho_states[i - 1];
        let (e, gap) = round_eps(state, odd)?;
        eps.push(e);
        route_disagreement = route_disagreement.max(gap);

        // target purification of the detached side, with round-i tildes
        let (v_target, control, shared): (PureState, &str, [&str; 5]) = if odd {
            let t = canon_rho_x.tensor(&state.renamed(&|n| match n {
                "X" => format!("Xt{i}"),
                "R_X" => format!("RXt{i}"),
                "A" => format!("At{i}"),
                other => other.into(),
            })?)?;
            (t, "X", ["R_X", "Y", "R_Y", "B", "C"])
        } else {
            let t = canon_rho_y.tensor(&state.renamed(&|n| match n {
                "Y" => format!("Yt{i}"),
                "R_Y" => format!("RYt{i}"),
                "B" => format!("Bt{i}"),
                other => other.into(),
            })?)?;
            (t, "Y", ["R_Y", "X", "R_X", "A", "C"])
        };
        let v = controlled_uhlmann(&v_target, state, control, &shared)?;
        let achieved = hell(pure_overlap(&v.apply_to(state)?, &v_target)?);
        isometry_slack = isometry_slack.max((achieved - e).abs());
        let v = VMap::Iso(v);

        // γ_i and δ_i with the pair (V^i, V^{i−1})
        let (ai, bi) = if odd { (i, i - 1) } else { (i - 1, i) };
        let tilde_target = tilded(state, ai, bi)?;
        let moved_rho = v.apply(&v_prev.apply(state)?)?;
        let g_target = canon_rho.tensor(&tilde_target)?;
        gamma.push(hell(pure_overlap(&moved_rho, &g_target)?));

        let sstate = &sigma_states[i - 1];
        let moved_sigma = v.apply(&v_prev.apply(sstate)?)?;
        let d_target = canon_sigma.tensor(&tilde_target)?;
        delta.push(hell(pure_overlap(&moved_sigma, &d_target)?));

        v_prev = v;
    }

    let trace = CutPasteTrace { eps, gamma, delta, route_disagreement, isometry_slack };
    let in_range = trace
        .eps
        .iter()
        .chain(&trace.gamma)
        .chain(&trace.delta)
        .all(|v| (-TOL..=1.0 + TOL).contains(v));
    let pass = in_range
        && trace.route_disagreement <= TOL
        && trace.isometry_slack <= TOL
        && trace.recursion_holds(TOL);
    Ok((trace, pass))
}

/// Uniform independent input bits.
pub fn uniform_product_inputs() -> Result<ProbTable> {
    ProbTable::uniform(vec![Variable::new("X", 2), Variable::new("Y", 2)])
}

/// Correlated input with uniform marginals: X = Y, uniform.
pub fn equal_bits_inputs() -> Result<ProbTable> {
    ProbTable::new(
        vec![Variable::new("X", 2), Variable::new("Y", 2)],
        vec![(vec![0, 0], 0.5), (vec![1, 1], 0.5)],
    )
}

/// How far a trace falls outside the recursion and its side conditions, as a
/// single number (non-positive means everything held exactly/within bounds).
pub fn trace_violation(trace: &CutPasteTrace) -> f64 {
    let mut v = trace
        .route_disagreement
        .max(trace.isometry_slack)
        .max((trace.gamma[1] - trace.eps[1]).abs())
        .max((trace.delta[1] - trace.eps[1]).abs());
    for i in 2..trace.eps.len() {
        let mut bound = trace.eps[i] + trace.eps[i - 1];
        for j in 1..=(i - 2) {
            bound += 2.0 * trace.eps[j];
        }
        v = v.max(trace.gamma[i] - bound).max(trace.delta[i] - bound);
    }
    v
}

/// Run random 3-round qubit protocols on (uniform product, equal bits) and
/// report the worst recursion violation and the stream index producing it.
pub fn verify_cut_and_paste_random(trials: usize, seed: u64) -> Result<(f64, u64)> {
    let rho = uniform_product_inputs()?;
    let sigma = equal_bits_inputs()?;
    let mut worst = (f64::NEG_INFINITY, 0u64);
    for t in 0..trials as u64 {
        let mut rng = crate::seeds::stream(seed, t);
        let p = crate::lemma_verify::toy::random_protocol(3, 2, 2, 2, 2, 2, &mut rng)?;
        let (trace, _) = verify_cut_and_paste(&p, &rho, &sigma)?;
        let v = trace_violation(&trace);
        if v > worst.0 {
            worst = (v, t);
        }
    }
    Ok(worst)
}
