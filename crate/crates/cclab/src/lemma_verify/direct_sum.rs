//! Direct-sum bounds for the hidden-index decomposition X = X₁…X_n, J
//! uniform: one-way, I(X_J; C B Y₁ᴶ R_{Y₁ᴶ} | J X_{<J}) ≤ 2ℓ/n; multi-round
//! classical, the round-r bound ℓ_{A,r}·2^{2ℓ_{B,r}+2}/n. Classical cases are
//! enumerated exactly through probability tables; the quantum one-way case is
//! spot-checked on classical-quantum message states.

use num_complex::Complex64;
use rand::Rng as _;

use crate::error::Result;
use crate::lemma_verify::worst;
use crate::protocol::{exact_joint, ExactCoins, ProtocolSpec, Speaker, Step, DEFAULT_ENUM_CAP};
use crate::qmath::measures::conditional_mutual_information as qcmi;
use crate::qmath::prob::{ProbTable, Variable};
use crate::qmath::random::random_pure;
use crate::qmath::state::DensityMatrix;
use crate::qmath::system::{Register, RegisterSystem};
use crate::seeds;

fn bit_vars(prefix: &str, n: usize) -> Vec<Variable> {
    (1..=n).map(|i| Variable::new(format!("{prefix}{i}"), 2)).collect()
}

fn names(prefix: &str, range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

/// (1/n)·Σ_j I(group; x_j | x_{<j}) on a classical joint table.
fn averaged_cmi(joint: &ProbTable, group: &[&str], n: usize) -> Result<f64> {
    let mut total = 0.0;
    for j in 1..=n {
        let xj = format!("x{j}");
        let prev = names("x", 1..=(j - 1));
        let prev_refs: Vec<&str> = prev.iter().map(String::as_str).collect();
        total += joint.conditional_mutual_information(group, &[&xj], &prev_refs)?;
    }
    Ok(total / n as f64)
}

/// Structured family of message maps {0,1}^n → {0,1}^ℓ: constants,
/// single-bit projections, prefixes, parities over index subsets, and seeded
/// random lookup tables.
pub fn message_family(n: usize, ell: usize, random_count: usize, seed: u64) -> Vec<Vec<Vec<bool>>> {
    // each map is a lookup table indexed by the n-bit input value
    let size = 1usize << n;
    let mut maps: Vec<Vec<Vec<bool>>> = Vec::new();
    // constants 0…0 and 1…1
    maps.push(vec![vec![false; ell]; size]);
    maps.push(vec![vec![true; ell]; size]);
    // projections: first output bit = x_i, rest zero
    for i in 0..n {
        maps.push(
            (0..size)
                .map(|x| {
                    let mut m = vec![false; ell];
                    m[0] = x >> (n - 1 - i) & 1 == 1;
                    m
                })
                .collect(),
        );
    }
    // prefix of min(ℓ, n) input bits
    maps.push(
        (0..size)
            .map(|x| (0..ell).map(|b| b < n && x >> (n - 1 - b) & 1 == 1).collect())
            .collect(),
    );
    // parities over every nonempty subset, one per output bit rotation
    for mask in 1..size {
        maps.push(
            (0..size)
                .map(|x| {
                    let mut m = vec![false; ell];
                    m[0] = ((x & mask).count_ones() % 2) == 1;
                    m
                })
                .collect(),
        );
    }
    // seeded random lookup tables
    let mut rng = seeds::rng(seed);
    for _ in 0..random_count {
        maps.push((0..size).map(|_| (0..ell).map(|_| rng.random()).collect()).collect());
    }
    maps
}

/// Joint table (x₁…x_n, [y, ry,] m) for a one-way map on uniform X, with an
/// optional independent uniform bit Y mirrored into a classical reference.
fn oneway_joint(map: &[Vec<bool>], n: usize, ell: usize, with_y: bool) -> Result<ProbTable> {
    let mut vars = bit_vars("x", n);
    if with_y {
        vars.push(Variable::new("y", 2));
        vars.push(Variable::new("ry", 2));
    }
    vars.push(Variable::new("m", 1 << ell));
    let size = 1usize << n;
    let mut atoms = Vec::new();
    let y_range = if with_y { 2 } else { 1 };
    let w = 1.0 / (size * y_range) as f64;
    for x in 0..size {
        let mval = map[x]
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize);
        for y in 0..y_range {
            let mut a: Vec<usize> = (0..n).map(|i| x >> (n - 1 - i) & 1).collect();
            if with_y {
                a.push(y);
                a.push(y);
            }
            a.push(mval);
            atoms.push((a, w));
        }
    }
    ProbTable::new(vars, atoms)
}

/// Exhaustive classical one-way family: max of lhs − 2ℓ/n over all maps in
/// the structured enumeration, n ∈ {2,3,4}, ℓ ∈ {1,2}.
pub fn verify_oneway_directsum_classical(seed: u64) -> Result<(f64, u64, usize)> {
    let mut results = Vec::new();
    let mut count = 0usize;
    for &n in &[2usize, 3, 4] {
        for &ell in &[1usize, 2] {
            let fam = message_family(n, ell, 8, seed ^ (n as u64) << 8 ^ ell as u64);
            for (idx, map) in fam.iter().enumerate() {
                for with_y in [false, true] {
                    let joint = oneway_joint(map, n, ell, with_y)?;
                    let group: Vec<&str> =
                        if with_y { vec!["m", "y", "ry"] } else { vec!["m"] };
                    let lhs = averaged_cmi(&joint, &group, n)?;
                    let rhs = 2.0 * ell as f64 / n as f64;
                    results.push((idx as u64, lhs - rhs));
                    count += 1;
                }
            }
        }
    }
    let (v, s) = worst(results);
    Ok((v, s, count))
}

/// Quantum one-way spot check: ρ_{XC} = Σ_x 2^{−n}|x⟩⟨x| ⊗ |φ_x⟩⟨φ_x| with
/// random message states on ℓ qubits; checks (1/n)·Σ_j I(C; X_j | X_{<j}) ≤
/// 2ℓ/n per instance.
pub fn verify_oneway_directsum_quantum(cases: usize, seed: u64) -> Result<(f64, u64)> {
    let mut results = Vec::with_capacity(cases);
    for t in 0..cases {
        let mut rng = seeds::stream(seed, t as u64);
        let n = 2 + (t % 3); // 2, 3, 4
        let ell = 1 + (t % 2);
        let cdim = 1usize << ell;
        let size = 1usize << n;
        let mut regs: Vec<Register> = (1..=n).map(|i| Register::new(format!("x{i}"), 2)).collect();
        regs.push(Register::new("C", cdim));
        let sys = RegisterSystem::new(regs)?;
        let csys = RegisterSystem::of(&[("C", cdim)])?;
        let dim = sys.dim();
        let mut mat = crate::qmath::linalg::CMat::from_element(
            dim,
            dim,
            Complex64::new(0.0, 0.0),
        );
        let w = 1.0 / size as f64;
        for x in 0..size {
            let phi = random_pure(csys.clone(), &mut rng);
            for a in 0..cdim {
                for b in 0..cdim {
                    let v = phi.amps()[a] * phi.amps()[b].conj() * w;
                    mat[(x * cdim + a, x * cdim + b)] = v;
                }
            }
        }
        let rho = DensityMatrix::new(sys, mat)?;
        let mut lhs = 0.0;
        for j in 1..=n {
            let xj = format!("x{j}");
            let prev = names("x", 1..=(j - 1));
            let prev_refs: Vec<&str> = prev.iter().map(String::as_str).collect();
            lhs += qcmi(&rho, &["C"], &[&xj], &prev_refs)?;
        }
        lhs /= n as f64;
        let rhs = 2.0 * ell as f64 / n as f64;
        results.push((t as u64, lhs - rhs));
    }
    Ok(worst(results))
}

/// Combined one-way verification (classical family + quantum spot checks):
/// returns the worst violation across both parts.
pub fn verify_oneway_directsum(quantum_cases: usize, seed: u64) -> Result<(f64, u64)> {
    let (vc, sc, _) = verify_oneway_directsum_classical(seed)?;
    let (vq, sq) = verify_oneway_directsum_quantum(quantum_cases, seed)?;
    Ok(if vc >= vq { (vc, sc) } else { (vq, sq) })
}

/// A small deterministic interactive protocol given by per-round lookup
/// tables over (own input value, transcript so far).
struct TableProtocol {
    schedule: Vec<Speaker>,
    // tables[r][input][transcript_value] = message bit
    tables: Vec<Vec<Vec<bool>>>,
}

impl TableProtocol {
    fn random(schedule: Vec<Speaker>, n: usize, y_bits: usize, rng: &mut seeds::Rng) -> Self {
        let tables = schedule
            .iter()
            .enumerate()
            .map(|(r, sp)| {
                let inputs = 1usize << if *sp == Speaker::Alice { n } else { y_bits };
                let transcripts = 1usize << r;
                (0..inputs)
                    .map(|_| (0..transcripts).map(|_| rng.random()).collect())
                    .collect()
            })
            .collect();
        TableProtocol { schedule, tables }
    }

    fn spec(self) -> ProtocolSpec<Vec<bool>, Vec<bool>> {
        fn pick(tables: &[Vec<Vec<bool>>], input: &[bool], t: &crate::protocol::Transcript) -> bool {
            let r = t.events.len();
            let iv = input.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            let tv = t
                .events
                .iter()
                .flat_map(|e| e.bits.iter())
                .fold(0usize, |acc, &b| (acc << 1) | b as usize);
            tables[r][iv][tv]
        }
        let rounds = self.schedule.len();
        let tables_a = std::rc::Rc::new(self.tables);
        let tables_b = tables_a.clone();
        ProtocolSpec {
            schedule: self.schedule,
            alice: Box::new(move |x: &Vec<bool>, _c, t| {
                Ok(Step::Send(vec![pick(&tables_a, x, t)]))
            }),
            bob: Box::new(move |y: &Vec<bool>, _c, t| {
                if t.events.len() == rounds {
                    return Ok(Step::Output(0)); // post-schedule call; value unused
                }
                Ok(Step::Send(vec![pick(&tables_b, y, t)]))
            }),
            output_party: Speaker::Bob,
            exact_coins: Some(ExactCoins::default()),
        }
    }
}

/// Per-round check on one protocol: for each r, (1/n)·Σ_j I(M₁…M_r [Y R_Y];
/// X_j | X_{<j}) ≤ ℓ_{A,r}·2^{2ℓ_{B,r}+2}/n. Returns the worst round slack.
fn multiround_violation(
    proto: &ProtocolSpec<Vec<bool>, Vec<bool>>,
    n: usize,
    y_bits: usize,
) -> Result<f64> {
    let mut vars = bit_vars("x", n);
    vars.extend(bit_vars("y", y_bits));
    let dist = ProbTable::uniform(vars)?;
    let joint = exact_joint(
        proto,
        &dist,
        |a| {
            (
                a[..n].iter().map(|&v| v == 1).collect(),
                a[n..n + y_bits].iter().map(|&v| v == 1).collect(),
            )
        },
        DEFAULT_ENUM_CAP,
    )?;
    let rounds = proto.schedule.len();
    let mut worst_slack = f64::NEG_INFINITY;
    for r in 1..=rounds {
        let ell_a = proto.schedule[..r].iter().filter(|s| **s == Speaker::Alice).count();
        let ell_b = r - ell_a;
        let msgs = names("m", 1..=r);
        let mut group: Vec<&str> = msgs.iter().map(String::as_str).collect();
        let ys = names("y", 1..=y_bits);
        group.extend(ys.iter().map(String::as_str));
        let lhs = averaged_cmi(&joint, &group, n)?;
        let rhs = ell_a as f64 * 2f64.powi(2 * ell_b as i32 + 2) / n as f64;
        worst_slack = worst_slack.max(lhs - rhs);
    }
    Ok(worst_slack)
}

/// Random small interactive classical protocols (1 bit per round, ℓ_A, ℓ_B ≤
/// 2, n ≤ 4): exact CMI against the per-round bound.
pub fn verify_multiround_directsum_classical(cases: usize, seed: u64) -> Result<(f64, u64)> {
    let schedules: Vec<Vec<Speaker>> = vec![
        vec![Speaker::Alice, Speaker::Bob],
        vec![Speaker::Alice, Speaker::Bob, Speaker::Alice],
        vec![Speaker::Alice, Speaker::Bob, Speaker::Alice, Speaker::Bob],
        vec![Speaker::Bob, Speaker::Alice],
        vec![Speaker::Bob, Speaker::Alice, Speaker::Bob, Speaker::Alice],
    ];
    let mut results = Vec::with_capacity(cases);
    for t in 0..cases {
        let mut rng = seeds::stream(seed, t as u64);
        let n = 2 + (t % 3); // 2..4
        let y_bits = 1 + (t % 2);
        let schedule = schedules[t % schedules.len()].clone();
        let proto = TableProtocol::random(schedule, n, y_bits, &mut rng).spec();
        results.push((t as u64, multiround_violation(&proto, n, y_bits)?));
    }
    Ok(worst(results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_message_has_zero_information() {
        let map = vec![vec![false]; 4]; // n=2, ℓ=1 constant
        let joint = oneway_joint(&map, 2, 1, false).unwrap();
        let lhs = averaged_cmi(&joint, &["m"], 2).unwrap();
        assert!(lhs.abs() < 1e-12);
    }

    #[test]
    fn first_bit_message_at_n2_gives_half() {
        // message = x₁: I(X_J; C | J X_{<J}) = ½·1 + ½·0 = ½ ≤ 2/2
        let map: Vec<Vec<bool>> = (0..4).map(|x| vec![x >> 1 & 1 == 1]).collect();
        let joint = oneway_joint(&map, 2, 1, false).unwrap();
        let lhs = averaged_cmi(&joint, &["m"], 2).unwrap();
        assert!((lhs - 0.5).abs() < 1e-12, "lhs {lhs}");
    }

    #[test]
    fn classical_family_never_violates() {
        let (v, _, count) = verify_oneway_directsum_classical(17).unwrap();
        assert!(v <= 1e-10, "violation {v}");
        assert!(count >= 200, "only {count} cases");
    }

    #[test]
    fn quantum_spot_checks_never_violate() {
        let (v, _) = verify_oneway_directsum_quantum(40, 18).unwrap();
        assert!(v <= 1e-8, "violation {v}");
    }

    #[test]
    fn bob_silent_reduces_to_scaled_oneway_bound() {
        // one Alice bit, no Bob rounds: bound = 1·2^{0+2}/n = 4/n
        let map: Vec<Vec<bool>> = (0..8).map(|x| vec![(x as u32).count_ones() % 2 == 1]).collect();
        let joint = oneway_joint(&map, 3, 1, false).unwrap();
        let lhs = averaged_cmi(&joint, &["m"], 3).unwrap();
        assert!(lhs <= 4.0 / 3.0 + 1e-12);
    }

    #[test]
    fn echo_round_does_not_add_information() {
        // Alice sends x₁, Bob echoes it: the CMI with {m1,m2} equals the CMI
        // with {m1} while the bound gains a factor 2^{2ℓ_B}
        let mut rng = seeds::rng(4);
        let n = 2;
        let mut tp = TableProtocol::random(vec![Speaker::Alice, Speaker::Bob], n, 1, &mut rng);
        for x in 0..4usize {
            tp.tables[0][x][0] = x >> 1 & 1 == 1; // Alice: send x₁
        }
        for y in 0..2usize {
            tp.tables[1][y][0] = false; // Bob echoes transcript value 0 → 0
            tp.tables[1][y][1] = true; // transcript value 1 → 1
        }
        let proto = tp.spec();
        let mut vars = bit_vars("x", n);
        vars.extend(bit_vars("y", 1));
        let dist = ProbTable::uniform(vars).unwrap();
        let joint = exact_joint(
            &proto,
            &dist,
            |a| {
                (
                    a[..n].iter().map(|&v| v == 1).collect(),
                    a[n..n + 1].iter().map(|&v| v == 1).collect(),
                )
            },
            DEFAULT_ENUM_CAP,
        )
        .unwrap();
        let one = averaged_cmi(&joint, &["m1", "y1"], n).unwrap();
        let two = averaged_cmi(&joint, &["m1", "m2", "y1"], n).unwrap();
        assert!((one - two).abs() < 1e-12, "{one} vs {two}");
    }

    #[test]
    fn random_small_protocols_never_violate() {
        let (v, _) = verify_multiround_directsum_classical(40, 19).unwrap();
        assert!(v <= 1e-10, "violation {v}");
    }
}
