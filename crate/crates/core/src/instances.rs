//! Instance generators and the online adversary driver.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::colour_spans;
use crate::model::{Colour, Instance, Item, Packing};
use crate::online::OnlineAlgorithm;
use crate::rational::Rational;

/// What a generator knows about its output.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub family: String,
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt_bins: Option<usize>,
    /// Known OPT(I_c), possibly for only some colours.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_colour_opt: BTreeMap<Colour, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InstanceMeta {
    fn new(family: &str, params: &[(&str, String)]) -> Self {
        InstanceMeta {
            family: family.into(),
            params: params
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub instance: Instance,
    pub meta: InstanceMeta,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// `n` items of size `1 − δ` (colours `1..=n`) followed by `n` items of
/// size `δ` of colour `n + 1`, where `δ = 2ε`.
pub fn gen_theorem1(n: u32, eps: Rational) -> Result<Generated> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if eps.is_zero() || eps.numer() != 1 {
        return Err(invalid(format!("ε must be 1/x for an integer x, got {eps}")));
    }
    if eps >= Rational::frac(1, 4) {
        return Err(invalid(format!("ε must be below 1/4, got {eps}")));
    }
    let delta = eps.mul_int(2);
    let big = Rational::ONE - delta;
    let mut sizes: Vec<(Rational, Colour)> = (1..=n).map(|c| (big, c)).collect();
    sizes.extend((0..n).map(|_| (delta, n + 1)));
    let instance = Instance::from_sizes(n + 1, sizes)?;

    let mut meta = InstanceMeta::new("theorem1", &[("n", n.to_string()), ("epsilon", eps.to_string())]);
    meta.opt_bins = Some(n as usize);
    meta.per_colour_opt = (1..=n).map(|c| (c, 1)).collect();
    let small_total = delta.mul_int(n as u128);
    meta.per_colour_opt.insert(n + 1, small_total.ceil() as usize);
    if !small_total.is_integer() || !eps.mul_int(n as u128).is_integer() {
        meta.notes.push("δn or εn is not an integer".into());
    }
    Ok(Generated { instance, meta })
}

/// `l_0 = 1`, `l_{k+1} = l_k (l_k + 1)`; returns `l_0..=l_k`.
pub fn sylvester_sequence(k: usize) -> Result<Vec<u128>> {
    let mut out = vec![1u128];
    while out.len() <= k {
        let l = *out.last().expect("non-empty");
        let next = l
            .checked_add(1)
            .and_then(|p| p.checked_mul(l))
            .ok_or(Error::Rational(crate::rational::RationalError::Overflow))?;
        out.push(next);
    }
    Ok(out)
}

/// `Σ_{i=0}^{m} 1/l_i`.
pub fn sylvester_bound(m: usize) -> Result<Rational> {
    let mut sum = Rational::ZERO;
    for l in sylvester_sequence(m)? {
        sum = sum.checked_add(Rational::frac(1, l))?;
    }
    Ok(sum)
}

pub const MAX_SYLVESTER_M: u32 = 5;

/// `m + 1` colours with `n` items each; colour `i + 1` has items of size
/// `1/(l_i + 1) + ε`, so exactly `l_i` of them share a bin.
pub fn gen_sylvester(m: u32, n: u32, eps: Rational) -> Result<Generated> {
    if m == 0 || m > MAX_SYLVESTER_M {
        return Err(invalid(format!("m must lie in 1..={MAX_SYLVESTER_M}, got {m}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let l = sylvester_sequence(m as usize + 1)?;
    for &li in &l[..=m as usize] {
        if !(n as u128).is_multiple_of(li) {
            return Err(invalid(format!("l = {li} does not divide n = {n}")));
        }
    }
    // l_i items fit iff ε ≤ 1/(l_i(l_i+1)) = 1/l_{i+1}
    let eps_max = Rational::frac(1, l[m as usize + 1]);
    if eps.is_zero() || eps > eps_max {
        return Err(invalid(format!("ε must lie in (0, {eps_max}], got {eps}")));
    }
    let mut sizes = Vec::with_capacity(((m + 1) * n) as usize);
    let mut meta = InstanceMeta::new(
        "sylvester",
        &[("m", m.to_string()), ("n", n.to_string()), ("epsilon", eps.to_string())],
    );
    for (i, &li) in l[..=m as usize].iter().enumerate() {
        let colour = i as Colour + 1;
        let size = Rational::frac(1, li + 1).checked_add(eps)?;
        sizes.extend((0..n).map(|_| (size, colour)));
        meta.per_colour_opt.insert(colour, (n as u128 / li) as usize);
    }
    meta.params.insert("bound".into(), sylvester_bound(m as usize)?.to_string());
    let instance = Instance::from_sizes(m + 1, sizes)?;
    Ok(Generated { instance, meta })
}

/// Pairs of colours `(c, c')`, arriving pair after pair. Colour `c` gets
/// `1/2^(j-i)` then `1/2^(j-i) + γ` for even `i` in `0..=j-2`; colour `c'`
/// gets `1/2^(j-i) + γ` then `1/2^(j-i)` for odd `i` in `1..=j-3`.
pub fn gen_tightness(j: u32, gamma: Rational, pairs: u32) -> Result<Generated> {
    if j < 4 || !j.is_multiple_of(2) || j > 62 {
        return Err(invalid(format!("j must be even with 4 ≤ j ≤ 62, got {j}")));
    }
    if pairs == 0 {
        return Err(invalid("pairs must be positive"));
    }
    let gamma_max = Rational::frac(1, (j as u128 - 1) << j);
    if gamma.is_zero() || gamma > gamma_max {
        return Err(invalid(format!("γ must lie in (0, {gamma_max}], got {gamma}")));
    }
    let unit = |i: u32| Rational::frac(1, 1u128 << (j - i));
    let mut first = Vec::new();
    for i in (0..=j - 2).step_by(2) {
        first.push(unit(i));
        first.push(unit(i) + gamma);
    }
    let mut second = Vec::new();
    for i in (1..=j - 3).step_by(2) {
        second.push(unit(i) + gamma);
        second.push(unit(i));
    }
    let pair_total: Rational = first.iter().chain(&second).copied().sum();
    debug_assert!(pair_total <= Rational::ONE);

    let mut sizes = Vec::with_capacity(pairs as usize * (first.len() + second.len()));
    for p in 0..pairs {
        let (c, c2) = (2 * p + 1, 2 * p + 2);
        sizes.extend(first.iter().map(|&s| (s, c)));
        sizes.extend(second.iter().map(|&s| (s, c2)));
    }
    let instance = Instance::from_sizes(2 * pairs, sizes)?;
    let mut meta = InstanceMeta::new(
        "tightness",
        &[("j", j.to_string()), ("gamma", gamma.to_string()), ("pairs", pairs.to_string())],
    );
    meta.params.insert("epsilon".into(), Rational::frac(1, 1u128 << j).to_string());
    meta.params.insert("pair_total".into(), pair_total.to_string());
    meta.per_colour_opt = (1..=2 * pairs).map(|c| (c, 1)).collect();
    // each pair fits one bin, and the weight bound meets that when tight
    if pair_total.mul_int(pairs as u128).ceil() == pairs as u128 {
        meta.opt_bins = Some(pairs as usize);
    }
    Ok(Generated { instance, meta })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeLaw {
    /// Uniform on the grid `k/denominator` within `[lo, hi]`.
    Uniform { lo: Rational, hi: Rational },
    /// Uniform choice from a fixed set.
    Discrete(Vec<Rational>),
}

pub const DEFAULT_DENOMINATOR: u128 = 1 << 20;

/// Random instance; identical for identical arguments.
pub fn gen_random(n: usize, m: u32, law: &SizeLaw, seed: u64, denominator: u128) -> Result<Generated> {
    if m == 0 {
        return Err(invalid("m must be positive"));
    }
    if denominator == 0 {
        return Err(invalid("denominator must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw: Box<dyn FnMut(&mut ChaCha8Rng) -> Rational> = match law {
        SizeLaw::Uniform { lo, hi } => {
            if lo.is_zero() || *hi > Rational::ONE || lo > hi {
                return Err(invalid(format!("need 0 < lo ≤ hi ≤ 1, got [{lo}, {hi}]")));
            }
            let a = lo.mul_int(denominator).ceil();
            let b = hi.mul_int(denominator).floor();
            if a > b {
                return Err(invalid(format!(
                    "no multiple of 1/{denominator} lies in [{lo}, {hi}]"
                )));
            }
            Box::new(move |rng| Rational::frac(rng.random_range(a..=b), denominator))
        }
        SizeLaw::Discrete(set) => {
            if set.is_empty() || set.iter().any(|s| s.is_zero() || *s > Rational::ONE) {
                return Err(invalid("discrete sizes must be non-empty and in (0, 1]"));
            }
            let set = set.clone();
            Box::new(move |rng| set[rng.random_range(0..set.len())])
        }
    };
    let mut sizes = Vec::with_capacity(n);
    for _ in 0..n {
        let size = draw(&mut rng);
        let colour = rng.random_range(1..=m);
        sizes.push((size, colour));
    }
    let instance = Instance::from_sizes(m, sizes)?;
    let law_desc = match law {
        SizeLaw::Uniform { lo, hi } => format!("uniform({lo},{hi})"),
        SizeLaw::Discrete(set) => {
            let parts: Vec<String> = set.iter().map(|s| s.to_string()).collect();
            format!("discrete({})", parts.join(","))
        }
    };
    let meta = InstanceMeta::new(
        "random",
        &[
            ("n", n.to_string()),
            ("m", m.to_string()),
            ("law", law_desc),
            ("seed", seed.to_string()),
            ("denominator", denominator.to_string()),
        ],
    );
    Ok(Generated { instance, meta })
}

/// State after one adversary round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryRound {
    pub round: usize,
    pub bins: usize,
    pub max_span: usize,
    /// `bins / OPT(I)` with `OPT(I)` = rounds so far.
    pub bin_stretch_lb: Rational,
    /// `max_span / ⌈round / n⌉`.
    pub colour_stretch_lb: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdversaryRun {
    pub algorithm: String,
    pub n: usize,
    pub trajectory: Vec<AdversaryRound>,
    /// Why the run stopped early, if it did.
    pub stopped: Option<String>,
    pub packing: Packing,
    pub instance: Instance,
}

/// Feeds `rounds` rounds of `n` items of size `1/n`, one of each colour
/// `1..=n`, recording stretch after every round.
pub fn run_adversary(alg: &mut dyn OnlineAlgorithm, n: usize, rounds: usize) -> Result<AdversaryRun> {
    if n < 2 {
        return Err(invalid(format!("n must be at least 2, got {n}")));
    }
    alg.reset();
    let size = Rational::frac(1, n as u128);
    let mut fed = Vec::with_capacity(n * rounds);
    let mut trajectory = Vec::with_capacity(rounds);
    let mut stopped = None;
    'rounds: for round in 1..=rounds {
        for c in 1..=n {
            let item = Item {
                id: fed.len(),
                size,
                colour: c as Colour,
            };
            if let Err(e) = alg.pack(&item) {
                stopped = Some(format!("round {round}, item {}: {e}", item.id));
                break 'rounds;
            }
            fed.push(item);
        }
        let packing = alg.snapshot();
        let bins = packing.total_bins();
        let max_span = colour_spans(&packing, n as u32)
            .values()
            .copied()
            .max()
            .unwrap_or(0);
        let colour_opt = round.div_ceil(n);
        trajectory.push(AdversaryRound {
            round,
            bins,
            max_span,
            bin_stretch_lb: Rational::frac(bins as u128, round as u128),
            colour_stretch_lb: Rational::frac(max_span as u128, colour_opt as u128),
        });
    }
    Ok(AdversaryRun {
        algorithm: alg.name(),
        n,
        trajectory,
        stopped,
        packing: alg.snapshot(),
        instance: Instance::new(n as u32, fed)?,
    })
}
