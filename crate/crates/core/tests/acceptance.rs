//! The acceptance suite. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion does.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locpack::aptas::{aptas_detailed, solve_lps, AptasConfig, LpsBin, LpsProblem};
use locpack::classic::replay_bbf;
use locpack::instances::{gen_random, gen_theorem1, gen_tightness, run_adversary, SizeLaw};
use locpack::metrics::colour_spans;
use locpack::offline::{offline_17_1plus_eps, offline_1plus_eps, VlConfig};
use locpack::online::{audit_levels, run_online, FirstFitOnline, LevelScheme, OnlineAlgorithm, RegionRule, ThresholdScheme};
use locpack::oracle::{self, exhaustive_search, Objective, OracleConfig, SearchLimits};
use locpack::{validate_packing, Bin, Colour, Error, Instance, Item, Packing, Rational};

fn r(n: u128, d: u128) -> Rational {
    Rational::frac(n, d)
}

/// Counts every packing checked for criterion 10.
#[derive(Default)]
struct Feasibility {
    checked: usize,
    failures: Vec<String>,
}

impl Feasibility {
    fn check(&mut self, label: &str, packing: &Packing, instance: &Instance) {
        self.checked += 1;
        let report = validate_packing(packing, instance);
        if !report.is_valid() {
            self.failures.push(format!("{label}: {report}"));
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    match limit {
        Some(limit) => {
            let in_time = elapsed < limit;
            out.detail = format!("{} [{:.2?} of {:?}]", out.detail, elapsed, limit);
            out.pass &= in_time;
        }
        None => out.detail = format!("{} [{:.2?}]", out.detail, elapsed),
    }
    out
}

fn random_corpus(count: usize, max_n: usize, max_m: u32, law: &SizeLaw, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(1..=max_n);
            let m = rng.random_range(1..=max_m);
            gen_random(n, m, law, seed.wrapping_mul(1000) + i as u64, 1 << 20)
                .expect("valid law")
                .instance
        })
        .collect()
}

fn spans(packing: &Packing, instance: &Instance) -> BTreeMap<Colour, usize> {
    colour_spans(packing, instance.m)
}

// ---------------------------------------------------------------------------

fn random_packing(items: &[Item], rng: &mut ChaCha8Rng) -> Packing {
    let mut order = items.to_vec();
    order.shuffle(rng);
    let mut bins: Vec<Bin> = Vec::new();
    for e in order {
        let fitting: Vec<usize> = (0..bins.len()).filter(|&i| bins[i].fits(e.size)).collect();
        if !fitting.is_empty() && rng.random_bool(0.7) {
            let i = fitting[rng.random_range(0..fitting.len())];
            bins[i].push(e);
        } else {
            let mut b = Bin::new(bins.len());
            b.push(e);
            bins.push(b);
        }
    }
    Packing::new(bins, Default::default())
}

fn criterion1(feas: &mut Feasibility) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let law = SizeLaw::Uniform { lo: r(1, 64), hi: Rational::ONE };
    let k = 2;
    let mut ok = 0;
    let mut worst = String::new();
    let trials = 500;
    for t in 0..trials {
        let n = rng.random_range(1..=12);
        let m = rng.random_range(1..=3);
        let inst = gen_random(n, m, &law, 10_000 + t, 1 << 20).unwrap().instance;
        let packing = random_packing(&inst.items, &mut rng);
        let x = packing.total_bins();

        let pre = rng.random_range(0..=2usize);
        let mut all = inst.items.clone();
        let mut initial = Vec::new();
        for b in 0..pre {
            let mut bin = Bin::new(1000 + b);
            let size = Rational::frac(rng.random_range(1..=1u128 << 20), 1 << 20);
            let item = Item { id: all.len(), size, colour: rng.random_range(1..=m) };
            bin.push(item.clone());
            all.push(item);
            initial.push(bin);
        }
        let full = Instance::new(m, all).unwrap();
        let replay = replay_bbf(&packing, k, initial).unwrap();
        feas.check("c1 replay", &replay, &full);
        if replay.total_bins() <= k + x {
            ok += 1;
        } else if worst.is_empty() {
            worst = format!("; first violation trial {t}: {} > {k} + {x}", replay.total_bins());
        }
    }
    Outcome {
        pass: ok == trials,
        detail: format!("{ok}/{trials} replays within k + x{worst}"),
    }
}

fn offline_corpus() -> Vec<(Instance, locpack::OracleResult)> {
    let law = SizeLaw::Uniform { lo: r(1, 32), hi: Rational::ONE };
    random_corpus(200, 12, 3, &law, 2)
        .into_iter()
        .map(|inst| {
            let o = oracle::solve(&inst, OracleConfig::default(), None).unwrap();
            (inst, o)
        })
        .collect()
}

fn criterion2(corpus: &[(Instance, locpack::OracleResult)], feas: &mut Feasibility) -> Outcome {
    let eps = r(1, 4);
    let factor = Rational::ONE + eps.mul_int(2);
    let mut colour_fail = 0;
    let mut bin_fail = 0;
    for (inst, o) in corpus {
        let p = offline_17_1plus_eps(inst, eps, VlConfig::default()).unwrap();
        feas.check("c2 off17", &p, inst);
        for (c, span) in spans(&p, inst) {
            let bound = factor.mul_int(o.per_colour_opt[&c] as u128) + Rational::integer(3);
            if Rational::integer(span as u128) > bound {
                colour_fail += 1;
            }
        }
        let bound = r(17, 10).mul_int(o.opt_bins as u128) + Rational::integer(3);
        if Rational::integer(p.total_bins() as u128) > bound {
            bin_fail += 1;
        }
    }
    Outcome {
        pass: colour_fail == 0 && bin_fail == 0,
        detail: format!(
            "{} instances: {colour_fail} colour-bound violations, {bin_fail} bin-bound violations",
            corpus.len()
        ),
    }
}

fn criterion3(corpus: &[(Instance, locpack::OracleResult)], feas: &mut Feasibility) -> Outcome {
    let eps = r(1, 4);
    let factor = Rational::ONE + eps.mul_int(2);
    let mut colour_fail = 0;
    let mut bin_fail = 0;
    let mut worst_total = Rational::ZERO;
    for (inst, o) in corpus {
        let p = offline_1plus_eps(inst, eps, VlConfig::default()).unwrap();
        feas.check("c3 vl1eps", &p, inst);
        let bound = factor.mul_int(o.opt_bins as u128) + Rational::integer(2);
        let total = Rational::integer(p.total_bins() as u128);
        if total > bound {
            bin_fail += 1;
        }
        worst_total = worst_total.max(Rational::frac(p.total_bins() as u128, o.opt_bins.max(1) as u128));
        for (c, span) in spans(&p, inst) {
            let bound = Rational::integer(o.per_colour_opt[&c] as u128) / eps + Rational::integer(2);
            if Rational::integer(span as u128) > bound {
                colour_fail += 1;
            }
        }
    }
    Outcome {
        pass: colour_fail == 0 && bin_fail == 0,
        detail: format!(
            "{} instances: {bin_fail} bin-bound violations, {colour_fail} colour-bound violations, worst P/OPT {}",
            corpus.len(),
            worst_total
        ),
    }
}

fn criterion4(feas: &mut Feasibility) -> Outcome {
    let mut runs = 0;
    let mut violations = Vec::new();
    let mut min_avg: Option<Rational> = None;
    let mut check = |label: String, eps: Rational, inst: &Instance, feas: &mut Feasibility| {
        for rule in [RegionRule::NextFit, RegionRule::FirstFit] {
            let mut alg = LevelScheme::new(eps, rule, true).unwrap();
            let (p, _) = run_online(&mut alg, &inst.items).unwrap();
            feas.check(&label, &p, inst);
            let audit = audit_levels(&p);
            runs += 1;
            if !audit.average_fill_at_least_third() {
                violations.push(format!("{label} {rule:?}"));
            }
            if audit.full_bins > 0 {
                let avg = audit.full_fill.div_int(audit.full_bins as u128);
                min_avg = Some(min_avg.map_or(avg, |m: Rational| m.min(avg)));
            }
        }
    };
    for (i, eps) in [r(1, 4), r(1, 8), r(1, 16)].into_iter().enumerate() {
        let law = SizeLaw::Uniform { lo: eps, hi: Rational::ONE };
        for (k, inst) in random_corpus(100, 60, 6, &law, 40 + i as u64).iter().enumerate() {
            check(format!("c4 random eps={eps} #{k}"), eps, inst, feas);
        }
        let small = SizeLaw::Uniform { lo: eps, hi: eps.mul_int(4) };
        for (k, inst) in random_corpus(100, 60, 6, &small, 50 + i as u64).iter().enumerate() {
            check(format!("c4 small eps={eps} #{k}"), eps, inst, feas);
        }
    }
    for j in [4u32, 6, 8, 10] {
        let gamma = Rational::frac(1, (j as u128 - 1) << j);
        for pairs in [1u32, 5, 50] {
            let g = gen_tightness(j, gamma, pairs).unwrap();
            check(format!("c4 tightness j={j} pairs={pairs}"), r(1, 1 << j), &g.instance, feas);
        }
    }
    Outcome {
        pass: violations.is_empty(),
        detail: format!(
            "{runs} runs, {} violations, lowest full-bin average fill {}",
            violations.len(),
            min_avg.map_or("n/a".to_string(), |a| format!("{a} ≈ {:.4}", a.to_f64()))
        ),
    }
}

fn criterion5(feas: &mut Feasibility) -> Outcome {
    let j = 10;
    let g = gen_tightness(j, Rational::frac(1, 9 << 10), 50).unwrap();
    let lb = g.instance.weight_bound();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rule) in [("MNF", RegionRule::NextFit), ("MFF", RegionRule::FirstFit)] {
        let mut alg = LevelScheme::new(r(1, 1 << j), rule, true).unwrap();
        let (p, _) = run_online(&mut alg, &g.instance.items).unwrap();
        feas.check("c5", &p, &g.instance);
        let stretch = Rational::frac(p.total_bins() as u128, lb as u128);
        let within = stretch >= r(26, 10) && stretch <= Rational::integer(3);
        pass &= within;
        parts.push(format!("{name} {} / {lb} = {:.3}", p.total_bins(), stretch.to_f64()));
    }
    Outcome {
        pass,
        detail: format!("{} (band [2.6, 3.0])", parts.join(", ")),
    }
}

fn criterion6(feas: &mut Feasibility) -> Outcome {
    let n = 6u32;
    let eps = r(1, 8);
    let g = gen_theorem1(n, eps).unwrap();
    let max_bins = (Rational::ONE + eps).mul_int(n as u128).floor() as usize;
    let limits = SearchLimits { max_bins: Some(max_bins), span_caps: BTreeMap::new() };
    let outcome = exhaustive_search(&g.instance, &limits, Objective::SpanOf(n + 1), 16).unwrap();
    let threshold = (r(1, 2) + eps).mul_int(n as u128);
    match outcome {
        Some(o) => {
            feas.check("c6", &o.packing, &g.instance);
            Outcome {
                pass: Rational::integer(o.value as u128) >= threshold,
                detail: format!(
                    "min span of colour {} over packings with ≤ {max_bins} bins = {} (threshold {threshold}), {} nodes",
                    n + 1,
                    o.value,
                    o.nodes
                ),
            }
        }
        None => Outcome { pass: false, detail: format!("no packing with ≤ {max_bins} bins") },
    }
}

fn criterion7(feas: &mut Feasibility) -> Outcome {
    let n = 6;
    let rounds = 60;
    let algs: Vec<(&str, Box<dyn OnlineAlgorithm>)> = vec![
        ("ff", Box::new(FirstFitOnline::new())),
        ("threshold eps=1/6", Box::new(ThresholdScheme::new(r(1, 6)).unwrap())),
        ("level17 eps=1/8", Box::new(LevelScheme::three_seventeen(r(1, 8)).unwrap())),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, mut alg) in algs {
        let run = run_adversary(alg.as_mut(), n, rounds).unwrap();
        feas.check("c7", &run.packing, &run.instance);
        if let Some(why) = &run.stopped {
            pass = false;
            parts.push(format!("{name}: stopped ({why})"));
            continue;
        }
        let bounded = run.trajectory.iter().all(|t| t.bin_stretch_lb <= Rational::integer(3));
        let at10 = run.trajectory[9].colour_stretch_lb;
        let at60 = run.trajectory[rounds - 1].colour_stretch_lb;
        if bounded {
            let grows = at60 > at10.mul_int(3);
            pass &= grows;
            parts.push(format!(
                "{name}: colour stretch {at10} → {at60} ({})",
                if grows { "grows >3×" } else { "does not grow 3×" }
            ));
        } else {
            parts.push(format!("{name}: bin usage exceeds 3× OPT, exempt"));
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

// Exact LP oracle: dense simplex with Bland's rule over big rationals,
// for max c·x subject to A x ≤ b, x ≥ 0 with b ≥ 0.
fn simplex_max(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> BigRational {
    let rows = a.len();
    let cols = c.len();
    let width = cols + rows + 1;
    let mut t: Vec<Vec<BigRational>> = Vec::with_capacity(rows + 1);
    for i in 0..rows {
        let mut row = vec![BigRational::zero(); width];
        row[..cols].clone_from_slice(&a[i]);
        row[cols + i] = BigRational::one();
        row[width - 1] = b[i].clone();
        t.push(row);
    }
    let mut obj = vec![BigRational::zero(); width];
    for j in 0..cols {
        obj[j] = -c[j].clone();
    }
    t.push(obj);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    while let Some(enter) = (0..width - 1).find(|&j| t[rows][j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave.expect("bounded LP");
        let pivot = t[pr][enter].clone();
        for v in t[pr].iter_mut() {
            *v = &*v / &pivot;
        }
        let prow = t[pr].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != pr && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v = &*v - &(&f * p);
                }
            }
        }
        basis[pr] = enter;
    }
    t[rows][width - 1].clone()
}

fn big(x: Rational) -> BigRational {
    BigRational::new(BigInt::from(x.numer()), BigInt::from(x.denom()))
}

fn lps_by_simplex(p: &LpsProblem) -> BigRational {
    let vars: Vec<(usize, Colour)> = p
        .bins
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.colours.iter().filter(|c| p.supplies.contains_key(c)).map(move |&c| (i, c)))
        .collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (i, bin) in p.bins.iter().enumerate() {
        a.push(vars.iter().map(|&(vi, _)| if vi == i { BigRational::one() } else { BigRational::zero() }).collect());
        b.push(big(Rational::ONE - bin.load));
    }
    for (&c, &s) in &p.supplies {
        a.push(vars.iter().map(|&(_, vc)| if vc == c { BigRational::one() } else { BigRational::zero() }).collect());
        b.push(big(s));
    }
    let c = vec![BigRational::one(); vars.len()];
    simplex_max(&a, &b, &c)
}

fn criterion8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 200;
    let mut equal = 0;
    let mut first_diff = String::new();
    for t in 0..trials {
        let nb = rng.random_range(1..=4);
        let nc = rng.random_range(1..=3u32);
        let bins = (0..nb)
            .map(|_| LpsBin {
                load: Rational::frac(rng.random_range(0..=20), 20),
                colours: (1..=nc).filter(|_| rng.random_bool(0.6)).collect(),
            })
            .collect();
        let supplies = (1..=nc).map(|c| (c, Rational::frac(rng.random_range(0..=40), 20))).collect();
        let problem = LpsProblem { bins, supplies };
        let flow = solve_lps(&problem).unwrap();
        let lp = lps_by_simplex(&problem);
        if big(flow.value) == lp {
            equal += 1;
        } else if first_diff.is_empty() {
            first_diff = format!("; trial {t}: flow {} vs LP {lp}", flow.value);
        }
    }
    Outcome {
        pass: equal == trials,
        detail: format!("{equal}/{trials} flow optima equal the simplex optimum{first_diff}"),
    }
}

fn criterion9(feas: &mut Feasibility) -> Outcome {
    let eps = r(1, 2);
    let beta = Rational::integer(2);
    let law = SizeLaw::Uniform { lo: r(1, 16), hi: Rational::ONE };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut tested = 0;
    let mut bin_fail = 0;
    let mut colour_fail = 0;
    let mut errors = Vec::new();
    let mut seed = 90_000u64;
    while tested < 50 {
        seed += 1;
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=2);
        let inst = gen_random(n, m, &law, seed, 1 << 20).unwrap().instance;
        let per_colour = oracle::per_colour_opt(&inst, 16).unwrap();
        let opt_beta = match oracle::exact_opt_beta_with(&inst, beta, &per_colour, 10) {
            Ok(v) => v,
            Err(Error::Infeasible(_)) => continue,
            Err(e) => panic!("oracle failed: {e}"),
        };
        tested += 1;
        let config = AptasConfig { per_colour_opt: Some(per_colour.clone()), ..AptasConfig::default() };
        let out = match aptas_detailed(&inst, eps, Some(beta), &config) {
            Ok(out) => out,
            Err(e) => {
                errors.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        feas.check("c9 aptas", &out.packing, &inst);
        if out.packing.total_bins() > opt_beta + 3 {
            bin_fail += 1;
        }
        let factor = beta * (Rational::ONE + eps.mul_int(2));
        for (c, span) in spans(&out.packing, &inst) {
            let opt = per_colour[&c].max(1) as u128;
            // span / OPT_c ≤ β(1 + 2ε) + 3 / OPT_c
            if Rational::integer(span as u128) > factor.mul_int(opt) + Rational::integer(3) {
                colour_fail += 1;
            }
        }
    }
    Outcome {
        pass: bin_fail == 0 && colour_fail == 0 && errors.is_empty(),
        detail: format!(
            "{tested} admissible instances: {bin_fail} bin-bound violations, {colour_fail} colour-bound violations, {} errors{}",
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    }
}

#[test]
fn acceptance() {
    let mut feas = Feasibility::default();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    results.push((1, "Lemma 1 replay property", timed(Some(Duration::from_secs(10)), || criterion1(&mut feas))));
    let corpus = offline_corpus();
    results.push((2, "(1.7, 1+ε) colour bound", timed(Some(Duration::from_secs(60)), || criterion2(&corpus, &mut feas))));
    results.push((3, "(1+ε, O(1/ε)) scheme", timed(Some(Duration::from_secs(60)), || criterion3(&corpus, &mut feas))));
    results.push((4, "Lemma 2 fill invariant", timed(None, || criterion4(&mut feas))));
    results.push((5, "Tightness reproduction", timed(Some(Duration::from_secs(10)), || criterion5(&mut feas))));
    results.push((6, "Theorem 1 tension", timed(Some(Duration::from_secs(300)), || criterion6(&mut feas))));
    results.push((7, "Online impossibility trajectory", timed(Some(Duration::from_secs(10)), || criterion7(&mut feas))));
    results.push((8, "LPS exactness", timed(Some(Duration::from_secs(10)), criterion8)));
    results.push((9, "APTAS end-to-end", timed(Some(Duration::from_secs(300)), || criterion9(&mut feas))));
    results.push((
        10,
        "Feasibility universal",
        Outcome {
            pass: feas.failures.is_empty() && feas.checked > 0,
            detail: format!(
                "{} packings validated, {} invalid{}",
                feas.checked,
                feas.failures.len(),
                feas.failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
            ),
        },
    ));

    for (id, name, out) in &results {
        println!(
            "criterion {id:>2} {:<4} {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    let failed: Vec<usize> = results.iter().filter(|(_, _, o)| !o.pass).map(|(id, _, _)| *id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
