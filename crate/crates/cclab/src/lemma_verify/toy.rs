//! Toy quantum protocols in the Yao model: classical inputs X, Y with
//! canonical-purification references R_X, R_Y, local registers A (Alice) and
//! B (Bob), message register C passed back and forth. Every step is a
//! control-isometry on the owner's input register, so inputs stay classical.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmath::linalg::{is_isometry, CMat};
use crate::qmath::measures::pure_entropy;
use crate::qmath::prob::{canonical_purification, ProbTable};
use crate::qmath::random::random_isometry;
use crate::qmath::state::PureState;
use crate::qmath::system::{Register, RegisterSystem};
use crate::seeds;

const ISO_TOL: f64 = 1e-10;

/// One round: per control value, an isometry (party ⊗ message)_in →
/// (party ⊗ message)_out. Odd rounds control on X and act on (A, C); even
/// rounds control on Y and act on (B, C).
#[derive(Clone, Debug)]
pub struct ToyStep {
    pub blocks: Vec<CMat>,
    pub party_in: usize,
    pub msg_in: usize,
    pub party_out: usize,
    pub msg_out: usize,
}

impl ToyStep {
    pub fn new(
        blocks: Vec<CMat>,
        party_in: usize,
        msg_in: usize,
        party_out: usize,
        msg_out: usize,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("step needs at least one control block".into()));
        }
        for (v, b) in blocks.iter().enumerate() {
            if b.ncols() != party_in * msg_in || b.nrows() != party_out * msg_out {
                return Err(Error::SystemMismatch(format!(
                    "block {v} is {}x{}, expected {}x{}",
                    b.nrows(),
                    b.ncols(),
                    party_out * msg_out,
                    party_in * msg_in
                )));
            }
            if !is_isometry(b, ISO_TOL) {
                return Err(Error::Invariant(format!("block {v} is not an isometry")));
            }
        }
        Ok(ToyStep { blocks, party_in, msg_in, party_out, msg_out })
    }

    /// Full control-isometry, block diagonal over the control register.
    fn full_op(&self) -> CMat {
        let ctrl = self.blocks.len();
        let din = self.party_in * self.msg_in;
        let dout = self.party_out * self.msg_out;
        let mut op = CMat::from_element(ctrl * dout, ctrl * din, Complex64::new(0.0, 0.0));
        for (v, b) in self.blocks.iter().enumerate() {
            for i in 0..dout {
                for j in 0..din {
                    op[(v * dout + i, v * din + j)] = b[(i, j)];
                }
            }
        }
        op
    }
}

#[derive(Clone, Debug)]
pub struct ToyQuantumProtocol {
    pub x_dim: usize,
    pub y_dim: usize,
    /// Initial dims of A₀, B₀, C₀ (C₀ = 1 is the trivial register).
    pub a_dim: usize,
    pub b_dim: usize,
    pub c_dim: usize,
    pub steps: Vec<ToyStep>,
}

impl ToyQuantumProtocol {
    pub fn new(
        x_dim: usize,
        y_dim: usize,
        a_dim: usize,
        b_dim: usize,
        c_dim: usize,
        steps: Vec<ToyStep>,
    ) -> Result<Self> {
        let mut a = a_dim;
        let mut b = b_dim;
        let mut c = c_dim;
        for (i, s) in steps.iter().enumerate() {
            let round = i + 1;
            let odd = round % 2 == 1;
            let (ctrl, party) = if odd { (x_dim, &mut a) } else { (y_dim, &mut b) };
            if s.blocks.len() != ctrl {
                return Err(Error::SystemMismatch(format!(
                    "round {round} has {} control blocks, input dim is {ctrl}",
                    s.blocks.len()
                )));
            }
            if s.party_in != *party || s.msg_in != c {
                return Err(Error::SystemMismatch(format!(
                    "round {round} expects ({}, {}), running dims are ({party}, {c})",
                    s.party_in, s.msg_in,
                    party = *party,
                )));
            }
            *party = s.party_out;
            c = s.msg_out;
        }
        Ok(ToyQuantumProtocol { x_dim, y_dim, a_dim, b_dim, c_dim, steps })
    }

    pub fn rounds(&self) -> usize {
        self.steps.len()
    }

    /// Global pure state before any round: canonical purification of the
    /// input distribution tensored with fixed |0⟩ local registers.
    pub fn initial_state(&self, input: &ProbTable) -> Result<PureState> {
        let vars = input.vars();
        if vars.len() != 2
            || vars[0].name != "X"
            || vars[1].name != "Y"
            || vars[0].card != self.x_dim
            || vars[1].card != self.y_dim
        {
            return Err(Error::Domain(
                "input table must have variables X, Y matching the protocol dims".into(),
            ));
        }
        let inp = canonical_purification(input)?;
        let locals = PureState::basis(
            RegisterSystem::of(&[("A", self.a_dim), ("B", self.b_dim), ("C", self.c_dim)])?,
            0,
        )?;
        inp.tensor(&locals)
    }

    /// Runs the protocol, returning the global pure state after each round.
    pub fn run_on(&self, input: &ProbTable) -> Result<Vec<PureState>> {
        let mut state = self.initial_state(input)?;
        let mut out = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let round = i + 1;
            let (ctrl, ctrl_dim, party) = if round % 2 == 1 {
                ("X", self.x_dim, "A")
            } else {
                ("Y", self.y_dim, "B")
            };
            state = state.apply(
                &step.full_op(),
                &[ctrl, party, "C"],
                vec![
                    Register::new(ctrl, ctrl_dim),
                    Register::new(party, step.party_out),
                    Register::new("C", step.msg_out),
                ],
            )?;
            let norm = state.amps().norm();
            if (norm - 1.0).abs() > ISO_TOL {
                return Err(Error::Invariant(format!(
                    "round {round} broke normalization: |ψ| = {norm}"
                )));
            }
            out.push(state.clone());
        }
        Ok(out)
    }

    /// Parallel composition on disjoint registers: inputs, locals and
    /// messages are the pairwise products, each control block the matching
    /// product isometry. Both protocols must have the same round count.
    pub fn tensor(&self, other: &ToyQuantumProtocol) -> Result<ToyQuantumProtocol> {
        if self.rounds() != other.rounds() {
            return Err(Error::Domain("round counts differ".into()));
        }
        let mut steps = Vec::with_capacity(self.rounds());
        for (i, (s1, s2)) in self.steps.iter().zip(&other.steps).enumerate() {
            let ctrl2 = s2.blocks.len();
            let mut blocks = Vec::with_capacity(s1.blocks.len() * ctrl2);
            for b1 in &s1.blocks {
                for b2 in &s2.blocks {
                    blocks.push(pair_product(b1, b2, s1, s2));
                }
            }
            steps.push(ToyStep::new(
                blocks,
                s1.party_in * s2.party_in,
                s1.msg_in * s2.msg_in,
                s1.party_out * s2.party_out,
                s1.msg_out * s2.msg_out,
            )?);
            let _ = i;
        }
        ToyQuantumProtocol::new(
            self.x_dim * other.x_dim,
            self.y_dim * other.y_dim,
            self.a_dim * other.a_dim,
            self.b_dim * other.b_dim,
            self.c_dim * other.c_dim,
            steps,
        )
    }
}

/// Product of two (party ⊗ message) isometries reindexed onto the combined
/// layout (party₁party₂ ⊗ msg₁msg₂) — a plain Kronecker product would
/// interleave the registers the wrong way.
fn pair_product(b1: &CMat, b2: &CMat, s1: &ToyStep, s2: &ToyStep) -> CMat {
    let (p1i, m1i, p1o, m1o) = (s1.party_in, s1.msg_in, s1.party_out, s1.msg_out);
    let (p2i, m2i, p2o, m2o) = (s2.party_in, s2.msg_in, s2.party_out, s2.msg_out);
    let din = p1i * p2i * m1i * m2i;
    let dout = p1o * p2o * m1o * m2o;
    let mut out = CMat::from_element(dout, din, Complex64::new(0.0, 0.0));
    for a1 in 0..p1o {
        for a2 in 0..p2o {
            for c1 in 0..m1o {
                for c2 in 0..m2o {
                    let r = ((a1 * p2o + a2) * m1o + c1) * m2o + c2;
                    for a1p in 0..p1i {
                        for a2p in 0..p2i {
                            for c1p in 0..m1i {
                                for c2p in 0..m2i {
                                    let q = ((a1p * p2i + a2p) * m1i + c1p) * m2i + c2p;
                                    out[(r, q)] = b1[(a1 * m1o + c1, a1p * m1i + c1p)]
                                        * b2[(a2 * m2o + c2, a2p * m2i + c2p)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// CMI of a globally pure state through marginal entropies.
pub(crate) fn pure_cmi(psi: &PureState, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    fn join<'a>(x: &[&'a str], y: &[&'a str]) -> Vec<&'a str> {
        let mut v: Vec<&'a str> = x.to_vec();
        v.extend_from_slice(y);
        v
    }
    let ac = join(a, c);
    let bc = join(b, c);
    let abc = join(&ac, b);
    Ok(pure_entropy(psi, &ac)? + pure_entropy(psi, &bc)?
        - pure_entropy(psi, &abc)?
        - pure_entropy(psi, c)?)
}

/// qic = Σ_{odd i} I(C_i; R_X R_Y | B_i) + Σ_{even i} I(C_i; R_X R_Y | A_i),
/// each term on the round-i global pure state; qcc = Σ_i log₂ dim(C_i).
pub fn qic_of(protocol: &ToyQuantumProtocol, input: &ProbTable) -> Result<(f64, usize)> {
    let states = protocol.run_on(input)?;
    let mut qic = 0.0;
    let mut qcc = 0usize;
    for (i, state) in states.iter().enumerate() {
        let round = i + 1;
        let spectator = if round % 2 == 1 { "B" } else { "A" };
        qic += pure_cmi(state, &["C"], &["R_X", "R_Y"], &[spectator])?;
        let cd = protocol.steps[i].msg_out;
        if !cd.is_power_of_two() {
            return Err(Error::Domain(format!("message dim {cd} is not a power of two")));
        }
        qcc += cd.trailing_zeros() as usize;
    }
    Ok((qic, qcc))
}

/// Random toy protocol: Haar-style random control-isometries per round,
/// constant local dims, message dim `c_dim` from round 1 on.
pub fn random_protocol(
    rounds: usize,
    x_dim: usize,
    y_dim: usize,
    a_dim: usize,
    b_dim: usize,
    c_dim: usize,
    rng: &mut seeds::Rng,
) -> Result<ToyQuantumProtocol> {
    let mut steps = Vec::with_capacity(rounds);
    let mut c = 1usize;
    let mut a = a_dim;
    let mut b = b_dim;
    for round in 1..=rounds {
        let odd = round % 2 == 1;
        let (ctrl, party) = if odd { (x_dim, a) } else { (y_dim, b) };
        let din = party * c;
        let dout = party * c_dim;
        let blocks = (0..ctrl)
            .map(|_| random_isometry(dout, din, rng))
            .collect::<Result<Vec<_>>>()?;
        steps.push(ToyStep::new(blocks, party, c, party, c_dim)?);
        if odd {
            a = party;
        } else {
            b = party;
        }
        c = c_dim;
    }
    ToyQuantumProtocol::new(x_dim, y_dim, a_dim, b_dim, 1, steps)
}
