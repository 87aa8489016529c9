//! Deterministic engine for classical two-party public-coin protocols with
//! exact per-direction bit accounting, plus an exhaustive exact-distribution
//! mode for tiny instances.
//!
//! Public coins are one shared bit string both parties read from the front;
//! each party keeps its own cursor, so as long as both sides consume coins in
//! the same logical order they see identical values at zero communication.

use std::cell::RefCell;

use rand::Rng as _;
use serde_json::json;

use crate::error::{Error, Result};
use crate::qmath::prob::{ProbTable, Variable};
use crate::seeds;

pub const DEFAULT_ENUM_CAP: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Speaker {
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    AtoB,
    BtoA,
}

#[derive(Clone, Debug)]
pub struct Event {
    pub round: usize,
    pub dir: Direction,
    pub bits: Vec<bool>,
}

#[derive(Clone, Debug, Default)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn bits_a_to_b(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.dir == Direction::AtoB)
            .map(|e| e.bits.len())
            .sum()
    }

    pub fn bits_b_to_a(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.dir == Direction::BtoA)
            .map(|e| e.bits.len())
            .sum()
    }

    /// JSON lines, one per event: {"round":r,"dir":"AB"|"BA","bits":"0110"}.
    pub fn to_json_lines(&self) -> String {
        self.events
            .iter()
            .map(|e| {
                let dir = match e.dir {
                    Direction::AtoB => "AB",
                    Direction::BtoA => "BA",
                };
                let bits: String = e.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                json!({"round": e.round, "dir": dir, "bits": bits}).to_string()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub bits_a_to_b: usize,
    pub bits_b_to_a: usize,
    pub rounds: usize,
    pub output: u64,
    pub correct: Option<bool>,
}

/// What a party does on its turn.
pub enum Step {
    /// Send these bits and keep going.
    Send(Vec<bool>),
    /// Send these bits and simultaneously fix the protocol output (early exit).
    SendOutput(Vec<bool>, u64),
    /// Produce the final output without sending (only valid for the output
    /// party once the schedule is exhausted, or as an early exit).
    Output(u64),
}

/// A party's access to randomness during its turn.
pub trait Coins {
    /// Next bit of the shared public-coin string *as seen by this party*
    /// (each party has its own read cursor over the same string).
    fn shared(&mut self) -> Result<bool>;
    /// Next private coin of this party.
    fn private(&mut self) -> Result<bool>;

    fn shared_bits(&mut self, n: usize) -> Result<Vec<bool>> {
        (0..n).map(|_| self.shared()).collect()
    }
}

enum BitSource {
    Rng(seeds::Rng),
    Fixed(Vec<bool>),
}

/// Shared coin string, lazily extended; both parties read prefixes of it.
struct SharedCoins {
    bits: Vec<bool>,
    source: BitSource,
}

impl SharedCoins {
    fn get(&mut self, idx: usize) -> Result<bool> {
        while self.bits.len() <= idx {
            match &mut self.source {
                BitSource::Rng(rng) => {
                    let b: bool = rng.random();
                    self.bits.push(b);
                }
                BitSource::Fixed(_) => return Err(Error::CoinsExhausted),
            }
        }
        Ok(self.bits[idx])
    }
}

struct Tape {
    source: BitSource,
    pos: usize,
}

impl Tape {
    fn next(&mut self) -> Result<bool> {
        match &mut self.source {
            BitSource::Rng(rng) => Ok(rng.random()),
            BitSource::Fixed(bits) => {
                if self.pos < bits.len() {
                    self.pos += 1;
                    Ok(bits[self.pos - 1])
                } else {
                    Err(Error::CoinsExhausted)
                }
            }
        }
    }
}

struct PartyCoins<'a> {
    shared: &'a RefCell<SharedCoins>,
    cursor: &'a mut usize,
    private: &'a mut Tape,
}

impl Coins for PartyCoins<'_> {
    fn shared(&mut self) -> Result<bool> {
        let b = self.shared.borrow_mut().get(*self.cursor)?;
        *self.cursor += 1;
        Ok(b)
    }

    fn private(&mut self) -> Result<bool> {
        self.private.next()
    }
}

pub type PartyFn<I> = Box<dyn Fn(&I, &mut dyn Coins, &Transcript) -> Result<Step>>;

/// Finite coin domains for exact enumeration.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactCoins {
    pub shared_bits: usize,
    pub alice_bits: usize,
    pub bob_bits: usize,
}

impl ExactCoins {
    pub fn total(&self) -> usize {
        self.shared_bits + self.alice_bits + self.bob_bits
    }
}

pub struct ProtocolSpec<A, B> {
    pub schedule: Vec<Speaker>,
    pub alice: PartyFn<A>,
    pub bob: PartyFn<B>,
    pub output_party: Speaker,
    /// Declared finite coin domains; required for `exact_joint`.
    pub exact_coins: Option<ExactCoins>,
}

pub struct RunOutcome {
    pub output: u64,
    pub transcript: Transcript,
    pub cost: CostReport,
}

fn run_with_sources<A, B>(
    protocol: &ProtocolSpec<A, B>,
    a_in: &A,
    b_in: &B,
    shared: BitSource,
    alice_priv: BitSource,
    bob_priv: BitSource,
) -> Result<RunOutcome> {
    let shared = RefCell::new(SharedCoins { bits: Vec::new(), source: shared });
    let mut a_cursor = 0usize;
    let mut b_cursor = 0usize;
    let mut a_tape = Tape { source: alice_priv, pos: 0 };
    let mut b_tape = Tape { source: bob_priv, pos: 0 };
    let mut transcript = Transcript::default();
    let mut output: Option<u64> = None;

    for (round, &speaker) in protocol.schedule.iter().enumerate() {
        let step = match speaker {
            Speaker::Alice => {
                let mut coins = PartyCoins {
                    shared: &shared,
                    cursor: &mut a_cursor,
                    private: &mut a_tape,
                };
                (protocol.alice)(a_in, &mut coins, &transcript)?
            }
            Speaker::Bob => {
                let mut coins = PartyCoins {
                    shared: &shared,
                    cursor: &mut b_cursor,
                    private: &mut b_tape,
                };
                (protocol.bob)(b_in, &mut coins, &transcript)?
            }
        };
        let dir = match speaker {
            Speaker::Alice => Direction::AtoB,
            Speaker::Bob => Direction::BtoA,
        };
        match step {
            Step::Send(bits) => transcript.events.push(Event { round, dir, bits }),
            Step::SendOutput(bits, v) => {
                transcript.events.push(Event { round, dir, bits });
                output = Some(v);
                break;
            }
            Step::Output(v) => {
                output = Some(v);
                break;
            }
        }
    }

    let output = match output {
        Some(v) => v,
        None => {
            // schedule exhausted: ask the declared output party once more
            let step = match protocol.output_party {
                Speaker::Alice => {
                    let mut coins = PartyCoins {
                        shared: &shared,
                        cursor: &mut a_cursor,
                        private: &mut a_tape,
                    };
                    (protocol.alice)(a_in, &mut coins, &transcript)?
                }
                Speaker::Bob => {
                    let mut coins = PartyCoins {
                        shared: &shared,
                        cursor: &mut b_cursor,
                        private: &mut b_tape,
                    };
                    (protocol.bob)(b_in, &mut coins, &transcript)?
                }
            };
            match step {
                Step::Output(v) => v,
                _ => return Err(Error::MaxRounds),
            }
        }
    };

    let cost = CostReport {
        bits_a_to_b: transcript.bits_a_to_b(),
        bits_b_to_a: transcript.bits_b_to_a(),
        rounds: transcript.events.len(),
        output,
        correct: None,
    };
    Ok(RunOutcome { output, transcript, cost })
}

/// Run once. Deterministic given (inputs, seed): the shared string and both
/// private tapes come from fixed substreams of `seed`.
pub fn run<A, B>(protocol: &ProtocolSpec<A, B>, a_in: &A, b_in: &B, seed: u64) -> Result<RunOutcome> {
    run_with_sources(
        protocol,
        a_in,
        b_in,
        BitSource::Rng(seeds::stream(seed, 0)),
        BitSource::Rng(seeds::stream(seed, 1)),
        BitSource::Rng(seeds::stream(seed, 2)),
    )
}

#[derive(Clone, Debug)]
pub struct CostStats {
    pub mean_a_to_b: f64,
    pub max_a_to_b: usize,
    pub mean_b_to_a: f64,
    pub max_b_to_a: usize,
    pub mean_rounds: f64,
}

#[derive(Clone, Debug)]
pub struct ErrorEstimate {
    pub error_rate: f64,
    pub trials: usize,
    pub stats: CostStats,
}

/// Monte-Carlo error estimate against a task oracle. Trial `i` draws its
/// inputs from `sampler(stream(seed, 2i))` and runs under stream(seed, 2i+1),
/// so trials are order-independent.
pub fn estimate_error<A, B>(
    protocol: &ProtocolSpec<A, B>,
    task: impl Fn(&A, &B) -> u64,
    sampler: impl Fn(u64) -> (A, B),
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be ≥ 1".into()));
    }
    let mut errors = 0usize;
    let mut sum_a = 0usize;
    let mut sum_b = 0usize;
    let mut sum_r = 0usize;
    let mut max_a = 0usize;
    let mut max_b = 0usize;
    for i in 0..trials {
        let (a_in, b_in) = sampler(seed.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (2 * i as u64));
        let out = run(protocol, &a_in, &b_in, seed ^ (0x5851_f42d_4c95_7f2d_u64.wrapping_mul(2 * i as u64 + 1)))
            .map_err(|e| Error::Trial { trial: i, source: Box::new(e) })?;
        if out.output != task(&a_in, &b_in) {
            errors += 1;
        }
        sum_a += out.cost.bits_a_to_b;
        sum_b += out.cost.bits_b_to_a;
        sum_r += out.cost.rounds;
        max_a = max_a.max(out.cost.bits_a_to_b);
        max_b = max_b.max(out.cost.bits_b_to_a);
    }
    Ok(ErrorEstimate {
        error_rate: errors as f64 / trials as f64,
        trials,
        stats: CostStats {
            mean_a_to_b: sum_a as f64 / trials as f64,
            max_a_to_b: max_a,
            mean_b_to_a: sum_b as f64 / trials as f64,
            max_b_to_a: max_b,
            mean_rounds: sum_r as f64 / trials as f64,
        },
    })
}

fn bits_to_value(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Exact joint distribution over (inputs, per-round messages, output) by full
/// enumeration of the input distribution's atoms and all declared coin
/// assignments. Message variables are named m1…mR; runs ending before round r
/// contribute the sentinel value (the largest) for mr.
pub fn exact_joint<A, B>(
    protocol: &ProtocolSpec<A, B>,
    input_dist: &ProbTable,
    decode: impl Fn(&[usize]) -> (A, B),
    cap: usize,
) -> Result<ProbTable> {
    let coins = protocol
        .exact_coins
        .ok_or_else(|| Error::Domain("exact_coins not declared".into()))?;
    let coin_space = 1usize
        .checked_shl(coins.total() as u32)
        .ok_or(Error::Size { estimate: usize::MAX, cap })?;
    let estimate = input_dist.n_atoms().saturating_mul(coin_space);
    if estimate > cap {
        return Err(Error::Size { estimate, cap });
    }

    struct Rec {
        assignment: Vec<usize>,
        msgs: Vec<Option<Vec<bool>>>,
        output: u64,
        weight: f64,
    }
    let mut recs: Vec<Rec> = Vec::with_capacity(estimate);
    let n_rounds = protocol.schedule.len();
    let coin_w = 1.0 / coin_space as f64;
    for (assignment, w) in input_dist.atoms() {
        let (a_in, b_in) = decode(assignment);
        for mask in 0..coin_space {
            let bit = |i: usize| (mask >> i) & 1 == 1;
            let shared: Vec<bool> = (0..coins.shared_bits).map(bit).collect();
            let alice: Vec<bool> = (0..coins.alice_bits).map(|i| bit(coins.shared_bits + i)).collect();
            let bob: Vec<bool> = (0..coins.bob_bits)
                .map(|i| bit(coins.shared_bits + coins.alice_bits + i))
                .collect();
            let out = run_with_sources(
                protocol,
                &a_in,
                &b_in,
                BitSource::Fixed(shared),
                BitSource::Fixed(alice),
                BitSource::Fixed(bob),
            )?;
            let mut msgs: Vec<Option<Vec<bool>>> = vec![None; n_rounds];
            for e in &out.transcript.events {
                msgs[e.round] = Some(e.bits.clone());
            }
            recs.push(Rec {
                assignment: assignment.clone(),
                msgs,
                output: out.output,
                weight: w * coin_w,
            });
        }
    }

    // message variable cardinalities: observed max value + sentinel if needed
    let mut card = vec![(0usize, false); n_rounds]; // (max value, any missing)
    let mut out_max = 0u64;
    for r in &recs {
        for (i, m) in r.msgs.iter().enumerate() {
            match m {
                Some(bits) => card[i].0 = card[i].0.max(bits_to_value(bits)),
                None => card[i].1 = true,
            }
        }
        out_max = out_max.max(r.output);
    }
    let mut vars: Vec<Variable> = input_dist.vars().to_vec();
    let msg_cards: Vec<usize> = card
        .iter()
        .map(|&(mx, missing)| mx + 1 + missing as usize)
        .collect();
    for (i, &c) in msg_cards.iter().enumerate() {
        vars.push(Variable::new(format!("m{}", i + 1), c));
    }
    vars.push(Variable::new("out", out_max as usize + 1));

    let mut weights: std::collections::BTreeMap<Vec<usize>, f64> = Default::default();
    for r in recs {
        let mut key = r.assignment;
        for (i, m) in r.msgs.iter().enumerate() {
            key.push(match m {
                Some(bits) => bits_to_value(bits),
                None => msg_cards[i] - 1, // sentinel = largest value
            });
        }
        key.push(r.output as usize);
        *weights.entry(key).or_insert(0.0) += r.weight;
    }
    ProbTable::new(vars, weights.into_iter().collect())
}
