//! The Greater-Than trade-off protocol: shared-hash equality tests, interval
//! partition, noisy binary search over prefixes, final-interval reveal.
//!
//! Budget accounting (Bob sends `b` bits, hard bound):
//!   1 bit for the initial whole-string equality verdict, plus 1 verdict bit
//!   per search step, with s = max(1, b−2) search steps (one tree level per
//!   step) — so Bob sends at most 1+s ≤ b bits in every run. Alice sends t
//!   hash bits per test plus the ⌈n/2^s⌉-bit reveal, t = ⌈log₂((s+1)/ε)⌉ so a
//!   union bound over all s+1 tests keeps the failure probability ≤ ε.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::protocol::{
    estimate_error, exact_joint, Coins, ExactCoins, ProtocolSpec, Speaker, Step, Transcript,
    DEFAULT_ENUM_CAP,
};
use crate::qmath::prob::{ProbTable, Variable};
use crate::seeds;

/// Walk steps per tree level for the standalone search (extra levels buy
/// leaf confirmations and backtracking slack).
pub const WALK_STEPS_PER_LEVEL: usize = 4;

/// 1 iff integer(x) ≥ integer(y), most-significant bit first.
pub fn gt(x: &[bool], y: &[bool]) -> Result<u8> {
    if x.len() != y.len() {
        return Err(Error::Domain("gt inputs must have equal length".into()));
    }
    for (a, b) in x.iter().zip(y) {
        if a != b {
            return Ok(*a as u8);
        }
    }
    Ok(1) // x = y counts as x ≥ y
}

fn ceil_log2(n: usize) -> usize {
    (usize::BITS - (n.max(1) - 1).leading_zeros()) as usize
}

#[derive(Clone, Copy, Debug)]
pub struct BudgetConfig {
    pub n: usize,
    /// Bob's total bit budget (hard bound).
    pub b: usize,
    /// Hash width per equality test.
    pub t: usize,
    /// Interval-count exponent: m = 2^s intervals.
    pub s: usize,
    /// Target error.
    pub eps: f64,
}

impl BudgetConfig {
    pub fn derive(n: usize, b: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("n must be ≥ 1".into()));
        }
        if b < 2 {
            return Err(Error::Config("Bob's budget b must be ≥ 2".into()));
        }
        if !(0.0..1.0).contains(&eps) || eps <= 0.0 {
            return Err(Error::Config("eps must lie in (0,1)".into()));
        }
        let s = b.saturating_sub(2).clamp(1, ceil_log2(n).max(1));
        let tests = s + 1;
        let t = ((tests as f64 / eps).log2().ceil() as usize).max(1);
        let cfg = BudgetConfig { n, b, t, s, eps };
        // budget identity: Bob spends 1 verdict bit per test
        if 1 + s > b {
            return Err(Error::Config(format!(
                "budget identity violated: 1+s = {} > b = {b}",
                1 + s
            )));
        }
        Ok(cfg)
    }

    pub fn blocks(&self) -> usize {
        1 << self.s
    }

    pub fn block_len(&self) -> usize {
        self.n.div_ceil(self.blocks())
    }

    /// Length of the prefix covering the first `blocks` blocks, clipped to n.
    fn prefix_len(&self, blocks: usize) -> usize {
        (blocks * self.block_len()).min(self.n)
    }

    fn block_range(&self, i: usize) -> (usize, usize) {
        let lo = (i * self.block_len()).min(self.n);
        let hi = ((i + 1) * self.block_len()).min(self.n);
        (lo, hi)
    }
}

/// One shared-hash equality test: t inner products against fresh shared
/// masks. One-sided — equal slices always pass. Returns Alice's hash bits;
/// the caller compares against the other side's.
fn hash_bits(slice: &[bool], t: usize, coins: &mut dyn Coins) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        let mut acc = false;
        for &xb in slice {
            let m = coins.shared()?;
            acc ^= m & xb;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Standalone `hash_equal`: both sides hashed against the same masks drawn
/// from `rng` (the shared coins). Returns (verdict, alice_bits, bob_bits).
pub fn hash_equal(
    x_slice: &[bool],
    y_slice: &[bool],
    t: usize,
    rng: &mut seeds::Rng,
) -> Result<(bool, usize, usize)> {
    if x_slice.len() != y_slice.len() {
        return Err(Error::Domain("hash_equal slices must have equal length".into()));
    }
    let mut equal = true;
    for _ in 0..t {
        let mut ax = false;
        let mut ay = false;
        for i in 0..x_slice.len() {
            let m: bool = rng.random();
            ax ^= m & x_slice[i];
            ay ^= m & y_slice[i];
        }
        if ax != ay {
            equal = false;
        }
    }
    Ok((equal, t, 1))
}

/// Which prefix (in blocks) the next walk step tests, and what it expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkTest {
    /// Descend: equal ⇒ first difference is in the right half.
    Internal { prefix_blocks: usize },
    /// Leaf confirmation, expects equal (everything before the leaf agrees).
    LeafLow { prefix_blocks: usize },
    /// Leaf confirmation, expects unequal (the leaf block really differs).
    LeafHigh { prefix_blocks: usize },
}

impl WalkTest {
    pub fn prefix_blocks(&self) -> usize {
        match *self {
            WalkTest::Internal { prefix_blocks }
            | WalkTest::LeafLow { prefix_blocks }
            | WalkTest::LeafHigh { prefix_blocks } => prefix_blocks,
        }
    }
}

/// Checking walk on the binary search tree over block prefixes. Internal
/// nodes descend on the verdict; at a leaf the walk alternates the two
/// confirmation tests and backtracks on contradictory evidence.
#[derive(Clone, Debug)]
pub struct Walk {
    stack: Vec<(usize, usize)>,
    leaf_high: bool,
}

impl Walk {
    pub fn new(m: usize) -> Self {
        Walk { stack: vec![(0, m)], leaf_high: false }
    }

    fn current(&self) -> (usize, usize) {
        *self.stack.last().expect("stack never empty")
    }

    pub fn next_test(&self) -> WalkTest {
        let (lo, hi) = self.current();
        if hi - lo > 1 {
            WalkTest::Internal { prefix_blocks: (lo + hi) / 2 }
        } else if self.leaf_high {
            WalkTest::LeafHigh { prefix_blocks: lo + 1 }
        } else {
            WalkTest::LeafLow { prefix_blocks: lo }
        }
    }

    pub fn advance(&mut self, equal: bool) {
        let (lo, hi) = self.current();
        if hi - lo > 1 {
            let mid = (lo + hi) / 2;
            self.stack.push(if equal { (mid, hi) } else { (lo, mid) });
            self.leaf_high = false;
        } else if self.leaf_high {
            // expected unequal
            if equal {
                self.backtrack();
            } else {
                self.leaf_high = false;
            }
        } else {
            // expected equal
            if equal {
                self.leaf_high = true;
            } else {
                self.backtrack();
            }
        }
    }

    fn backtrack(&mut self) {
        if self.stack.len() > 1 {
            self.stack.pop();
        }
        self.leaf_high = false;
    }

    /// Leaf the walk has settled on, if any; otherwise the low end of the
    /// current interval as the best guess.
    pub fn result(&self) -> Option<usize> {
        let (lo, hi) = self.current();
        (hi - lo == 1).then_some(lo)
    }

    pub fn best_guess(&self) -> usize {
        self.current().0
    }
}

/// Noisy first-difference search over m = 2^s equal blocks (last padded).
/// With probability ≥ 1−eps returns the smallest block index (0-based) where
/// x and y differ, or NONE when x = y (guaranteed: hashes are one-sided).
pub fn noisy_find_first_diff(
    x: &[bool],
    y: &[bool],
    m: usize,
    eps: f64,
    rng: &mut seeds::Rng,
) -> Result<(Option<usize>, usize, usize)> {
    if x.len() != y.len() {
        return Err(Error::Domain("inputs must have equal length".into()));
    }
    if !m.is_power_of_two() || m < 2 {
        return Err(Error::Domain("block count must be a power of two ≥ 2".into()));
    }
    let n = x.len();
    let s = m.trailing_zeros() as usize;
    let steps = WALK_STEPS_PER_LEVEL * s;
    let tests = steps + 1;
    let t = ((tests as f64 / eps).log2().ceil() as usize).max(1);
    let block_len = n.div_ceil(m);
    let mut alice_bits = 0usize;
    let mut bob_bits = 0usize;

    let mut test = |len: usize, rng: &mut seeds::Rng| -> Result<bool> {
        let (v, a, b) = hash_equal(&x[..len], &y[..len], t, rng)?;
        alice_bits += a;
        bob_bits += b;
        Ok(v)
    };

    if test(n, rng)? {
        return Ok((None, alice_bits, bob_bits));
    }
    let mut walk = Walk::new(m);
    for _ in 0..steps {
        let len = (walk.next_test().prefix_blocks() * block_len).min(n);
        let verdict = test(len, rng)?;
        walk.advance(verdict);
    }
    Ok((
        Some(walk.result().unwrap_or_else(|| walk.best_guess())),
        alice_bits,
        bob_bits,
    ))
}

/// Walk state implied by the verdict bits already on the transcript.
fn replay_walk(cfg: &BudgetConfig, walk_verdicts: &[bool]) -> Walk {
    let mut walk = Walk::new(cfg.blocks());
    for &v in walk_verdicts {
        walk.advance(v);
    }
    walk
}

/// Verdict bits (B→A events) after the initial equality check.
fn walk_verdicts(t: &Transcript) -> Vec<bool> {
    t.events
        .iter()
        .filter(|e| e.dir == crate::protocol::Direction::BtoA)
        .skip(1)
        .map(|e| e.bits[0])
        .collect()
}

/// The budgeted trade-off protocol. Rounds:
///   A: t whole-string hash bits; B: verdict (equal ⇒ output 1, early exit);
///   s × (A: t prefix hash bits; B: verdict), descending the search tree;
///   A: her bits of the found block; Bob compares inside the block and
///   outputs gt(x,y).
pub fn gt_tradeoff_protocol(config: BudgetConfig) -> ProtocolSpec<Vec<bool>, Vec<bool>> {
    let cfg = config;
    let mut schedule = Vec::with_capacity(2 * (cfg.s + 1) + 1);
    for _ in 0..=cfg.s {
        schedule.push(Speaker::Alice);
        schedule.push(Speaker::Bob);
    }
    schedule.push(Speaker::Alice);

    let alice_cfg = cfg;
    let bob_cfg = cfg;
    ProtocolSpec {
        schedule,
        alice: Box::new(move |x: &Vec<bool>, coins, t: &Transcript| {
            let cfg = &alice_cfg;
            let e = t.events.len();
            if e == 2 * (cfg.s + 1) {
                // reveal round: block of the walk's leaf
                let walk = replay_walk(cfg, &walk_verdicts(t));
                let leaf = walk.result().unwrap_or_else(|| walk.best_guess());
                let (lo, hi) = cfg.block_range(leaf);
                return Ok(Step::Send(x[lo..hi].to_vec()));
            }
            let q = e / 2; // test index
            let len = if q == 0 {
                cfg.n
            } else {
                let walk = replay_walk(cfg, &walk_verdicts(t));
                cfg.prefix_len(walk.next_test().prefix_blocks())
            };
            Ok(Step::Send(hash_bits(&x[..len], cfg.t, coins)?))
        }),
        bob: Box::new(move |y: &Vec<bool>, coins, t: &Transcript| {
            let cfg = &bob_cfg;
            let e = t.events.len();
            if e == 2 * (cfg.s + 1) + 1 {
                // Alice revealed her block: decide inside it
                let walk = replay_walk(cfg, &walk_verdicts(t));
                let leaf = walk.result().unwrap_or_else(|| walk.best_guess());
                let (lo, _hi) = cfg.block_range(leaf);
                let x_block = &t.events.last().expect("reveal event").bits;
                for (i, &xb) in x_block.iter().enumerate() {
                    if xb != y[lo + i] {
                        return Ok(Step::Output(xb as u64));
                    }
                }
                // block agrees although the search claimed a difference there:
                // some hash test failed; fall back to the tie answer
                return Ok(Step::Output(1));
            }
            let q = (e - 1) / 2;
            let len = if q == 0 {
                cfg.n
            } else {
                let walk = replay_walk(cfg, &walk_verdicts(t));
                cfg.prefix_len(walk.next_test().prefix_blocks())
            };
            let mine = hash_bits(&y[..len], cfg.t, coins)?;
            let theirs = &t.events.last().expect("hash event").bits;
            let equal = mine == *theirs;
            if q == 0 && equal {
                // x = y (one-sided): x ≥ y
                return Ok(Step::SendOutput(vec![true], 1));
            }
            if q == 0 {
                return Ok(Step::Send(vec![false]));
            }
            Ok(Step::Send(vec![equal]))
        }),
        output_party: Speaker::Bob,
        exact_coins: None,
    }
}

/// Hard input pair: J uniform on [n/2], X_{<J} = Y_{<J}, remaining bits
/// uniform and independent.
pub fn sample_hard_pair(n: usize, rng: &mut seeds::Rng) -> (Vec<bool>, Vec<bool>) {
    let j = rng.random_range(1..=(n / 2).max(1));
    let x: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut y: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    y[..(j - 1)].copy_from_slice(&x[..(j - 1)]);
    (x, y)
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: usize,
    pub b: usize,
    pub trials: usize,
    pub alice_bits_mean: f64,
    pub alice_bits_max: usize,
    pub bob_bits_mean: f64,
    pub bob_bits_max: usize,
    pub rounds_mean: f64,
    pub error_rate: f64,
    pub seed: u64,
}

pub const SWEEP_CSV_HEADER: &str =
    "n,b,trials,alice_bits_mean,alice_bits_max,bob_bits_mean,bob_bits_max,rounds_mean,error_rate,seed";

impl SweepRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.b,
            self.trials,
            self.alice_bits_mean,
            self.alice_bits_max,
            self.bob_bits_mean,
            self.bob_bits_max,
            self.rounds_mean,
            self.error_rate,
            self.seed
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    for r in rows {
        out.push('\n');
        out.push_str(&r.to_csv_line());
    }
    out.push('\n');
    out
}

/// One row per budget, over inputs mixed 50/50 between the hard distribution
/// and independent uniform pairs (so both protocol branches are exercised).
pub fn sweep(n: usize, budgets: &[usize], trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(budgets.len());
    for (bi, &b) in budgets.iter().enumerate() {
        let cfg = BudgetConfig::derive(n, b, 1.0 / 3.0)?;
        let proto = gt_tradeoff_protocol(cfg);
        let row_seed = seed.wrapping_add(bi as u64);
        let est = estimate_error(
            &proto,
            |x, y| gt(x, y).expect("equal lengths") as u64,
            |s| {
                let mut rng = seeds::stream(row_seed, s);
                if rng.random() {
                    sample_hard_pair(n, &mut rng)
                } else {
                    (
                        (0..n).map(|_| rng.random()).collect(),
                        (0..n).map(|_| rng.random()).collect(),
                    )
                }
            },
            trials,
            row_seed,
        )?;
        if est.stats.max_b_to_a > b {
            return Err(Error::Invariant(format!(
                "hard budget violated: Bob sent {} > b = {b}",
                est.stats.max_b_to_a
            )));
        }
        rows.push(SweepRow {
            n,
            b,
            trials,
            alice_bits_mean: est.stats.mean_a_to_b,
            alice_bits_max: est.stats.max_a_to_b,
            bob_bits_mean: est.stats.mean_b_to_a,
            bob_bits_max: est.stats.max_b_to_a,
            rounds_mean: est.stats.mean_rounds,
            error_rate: est.error_rate,
            seed: row_seed,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct InfoCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Exact one-way information bound under the hard distribution: for a single
/// c-bit message from Alice, I(M B; X_J | X_{<J} J) ≤ 4c/n. Bob's pre-message
/// state B is his input Y (with Y_{<J} = X_{<J}); J ranges over [n/2].
pub fn oneway_info_check(
    message: impl Fn(&[bool]) -> Vec<bool> + 'static,
    c: usize,
    n: usize,
) -> Result<InfoCheck> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Domain("n must be even and ≥ 2".into()));
    }
    if n > 8 {
        return Err(Error::Size { estimate: 1 << n, cap: 1 << 8 });
    }
    // hard distribution over (j, x, y): j uniform on [n/2] (stored 0-based),
    // x uniform, y uniform conditioned on y_{<j} = x_{<j}
    let mut vars = vec![Variable::new("j", n / 2)];
    for i in 1..=n {
        vars.push(Variable::new(format!("x{i}"), 2));
    }
    for i in 1..=n {
        vars.push(Variable::new(format!("y{i}"), 2));
    }
    let mut atoms = Vec::new();
    for j in 1..=(n / 2) {
        let free_y = n - (j - 1);
        let w = 1.0 / ((n / 2) as f64 * (1u64 << n) as f64 * (1u64 << free_y) as f64);
        for xv in 0..(1usize << n) {
            let xbits: Vec<usize> = (0..n).map(|i| (xv >> (n - 1 - i)) & 1).collect();
            for yfree in 0..(1usize << free_y) {
                let mut a = vec![j - 1];
                a.extend(&xbits);
                let mut ybits = xbits[..(j - 1)].to_vec();
                ybits.extend((0..free_y).map(|i| (yfree >> (free_y - 1 - i)) & 1));
                a.extend(ybits);
                atoms.push((a, w));
            }
        }
    }
    let dist = ProbTable::new(vars, atoms)?;

    let msg = std::rc::Rc::new(message);
    let msg_a = msg.clone();
    let proto: ProtocolSpec<Vec<bool>, ()> = ProtocolSpec {
        schedule: vec![Speaker::Alice],
        alice: Box::new(move |x: &Vec<bool>, _c, _t| {
            let m = msg_a(x);
            Ok(Step::Send(m))
        }),
        bob: Box::new(|_, _, _| Ok(Step::Output(0))),
        output_party: Speaker::Bob,
        exact_coins: Some(ExactCoins::default()),
    };
    let joint = exact_joint(
        &proto,
        &dist,
        |a| (a[1..=n].iter().map(|&v| v == 1).collect(), ()),
        DEFAULT_ENUM_CAP,
    )?;

    let y_names: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let mut lhs = 0.0;
    for j in 1..=(n / 2) {
        let (pj, cond) = joint.condition("j", j - 1)?;
        let mut a_group: Vec<&str> = vec!["m1"];
        a_group.extend(y_names.iter().map(String::as_str));
        let xj = format!("x{j}");
        let prev: Vec<String> = (1..j).map(|i| format!("x{i}")).collect();
        let prev_refs: Vec<&str> = prev.iter().map(String::as_str).collect();
        lhs += pj * cond.conditional_mutual_information(&a_group, &[&xj], &prev_refs)?;
    }
    let rhs = 4.0 * c as f64 / n as f64;
    Ok(InfoCheck { lhs, rhs, pass: lhs <= rhs + 1e-10 })
}
