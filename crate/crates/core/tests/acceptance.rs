//! Acceptance suite. Prints one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasichain::basis::{enumerate_basis, evaluate_expansion, expand};
use quasichain::cli;
use quasichain::counting::{big_phi, count_disjoint, homogenize, phi, sample_defect, Oracle};
use quasichain::cover::{lift_chain, schreier_basis, scl_via_cover, validate_table, CosetTable, CoverBound};
use quasichain::rational::{format_rational, int, ratio, Rational};
use quasichain::words::{are_conjugate, is_effective, Letter};
use quasichain::{Alphabet, Word};

type Outcome = Result<String, String>;

/// Name, check, time budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

/// Criteria whose literal statement no correct implementation can meet.
const EXPECTED_FAILURES: &[usize] = &[7];

fn f2() -> Alphabet {
    Alphabet::with_rank(2).unwrap()
}

fn w(a: &Alphabet, s: &str) -> Word {
    a.parse_word(s).unwrap()
}

/// Every reduced word of length exactly `n`.
fn reduced_words(a: &Alphabet, n: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    for _ in 0..n {
        let mut next = Vec::new();
        for u in &out {
            for l in a.letters() {
                if u.last().is_some_and(|&x| a.inverse(x) == l) {
                    continue;
                }
                let mut v: Vec<Letter> = u.to_vec();
                v.push(l);
                next.push(a.reduce(v));
            }
        }
        out = next;
    }
    out
}

fn cyclically_reduced_words(a: &Alphabet, n: usize) -> Vec<Word> {
    reduced_words(a, n).into_iter().filter(|g| a.is_cyclically_reduced(g)).collect()
}

fn c1_even_exponent_coefficients() -> Outcome {
    let a = f2();
    let e = expand(&a, &Oracle::parse(&a, "evenexp").map_err(|e| e.to_string())?, 11).map_err(|e| e.to_string())?;
    for name in ["a", "b", "ab"] {
        let r = e.coefficient(&a, name);
        if !r.is_zero() {
            return Err(format!("r_{name} = {}", format_rational(&r)));
        }
    }
    for n in 2..=10 {
        let name = format!("{}b", "a".repeat(n));
        let r = e.coefficient(&a, &name);
        let expected = int(if n % 2 == 0 { 1 } else { -1 });
        if r != expected {
            return Err(format!("r_{name} = {}", format_rational(&r)));
        }
    }
    Ok(format!("{} nonzero coefficients up to length 11", e.coefficients.len()))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("quasichain").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn c2_chain_constant() -> Outcome {
    let cases = [
        ("1*abAB", "bound 1/8 witness abAB value 1"),
        ("1*a + 1*A", "zero"),
        ("1*a", "not_a_boundary"),
    ];
    for (chain, expected) in cases {
        let (code, out) = run_cli(&["sclbound", chain]);
        if code != 0 || out.trim_end() != expected {
            return Err(format!("sclbound {chain:?} gave {out:?} (exit {code})"));
        }
    }
    Ok("1/8, zero, not_a_boundary".into())
}

fn c3_effective_vanishing() -> Outcome {
    let a = f2();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 1000 {
        let len = rng.gen_range(2..=6);
        let pattern = a.random_cyclic_word(len, &mut rng);
        if !is_effective(&a, &pattern) {
            continue;
        }
        let g = a.random_cyclic_word(rng.gen_range(0..len), &mut rng);
        let value = phi(&a, &pattern, &g).map_err(|e| e.to_string())?;
        if !value.is_zero() {
            return Err(format!("phi({}, {}) = {}", a.format(&pattern), a.format(&g), format_rational(&value)));
        }
        for n in 1..=6 {
            let c = count_disjoint(&pattern, &a.power(&g, n)).unwrap();
            if c != 0 {
                return Err(format!("C_{}({}^{n}) = {c}", a.format(&pattern), a.format(&g)));
            }
        }
        checked += 1;
    }
    Ok("1000 pairs, 0 violations".into())
}

fn c4_equal_length() -> Outcome {
    let a = f2();
    let mut pairs = 0;
    for n in 1..=4 {
        let words = cyclically_reduced_words(&a, n);
        for p in &words {
            for g in &words {
                let expected = if are_conjugate(&a, g, p) {
                    int(1)
                } else if are_conjugate(&a, g, &a.invert(p)) {
                    int(-1)
                } else {
                    int(0)
                };
                let value = phi(&a, p, g).map_err(|e| e.to_string())?;
                if value != expected {
                    return Err(format!(
                        "phi({}, {}) = {}, expected {}",
                        a.format(p),
                        a.format(g),
                        format_rational(&value),
                        format_rational(&expected)
                    ));
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs"))
}

fn c5_defects() -> Outcome {
    let a = f2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_raw, mut worst_hom) = (Rational::zero(), Rational::zero());
    for i in 0..20 {
        let mut pattern = Word::identity();
        while pattern.is_empty() {
            pattern = a.random_word(rng.gen_range(1..=4), &mut rng);
        }
        let raw = sample_defect(&a, &Oracle::Counting(pattern.clone()), 10_000, 10, 500 + i)
            .map_err(|e| e.to_string())?;
        let hom = sample_defect(&a, &Oracle::CountingHomogeneous(pattern.clone()), 10_000, 10, 900 + i)
            .map_err(|e| e.to_string())?;
        if raw > int(2) || hom > int(4) {
            return Err(format!(
                "pattern {}: Φ defect {}, φ defect {}",
                a.format(&pattern),
                format_rational(&raw),
                format_rational(&hom)
            ));
        }
        worst_raw = worst_raw.max(raw);
        worst_hom = worst_hom.max(hom);
    }
    Ok(format!(
        "20 patterns x 10000 pairs, max Φ defect {}, max φ defect {}",
        format_rational(&worst_raw),
        format_rational(&worst_hom)
    ))
}

/// Maximum number of pairwise disjoint occurrences, by trying every subset.
fn brute_force_count(pattern: &[Letter], text: &[Letter]) -> usize {
    let m = pattern.len();
    if m > text.len() {
        return 0;
    }
    let occ: Vec<usize> = (0..=text.len() - m).filter(|&i| &text[i..i + m] == pattern).collect();
    let mut best = 0;
    for mask in 0u32..(1 << occ.len()) {
        let chosen: Vec<usize> = (0..occ.len()).filter(|&k| mask >> k & 1 == 1).map(|k| occ[k]).collect();
        if chosen.windows(2).all(|p| p[1] >= p[0] + m) {
            best = best.max(chosen.len());
        }
    }
    best
}

fn c6_greedy_counting() -> Outcome {
    let a = f2();
    let texts: Vec<Word> = (0..=8).flat_map(|n| reduced_words(&a, n)).collect();
    let patterns: Vec<Word> = (1..=4).flat_map(|n| reduced_words(&a, n)).collect();
    for p in &patterns {
        for t in &texts {
            let greedy = count_disjoint(p, t).unwrap();
            let brute = brute_force_count(p, t);
            if greedy != brute {
                return Err(format!("C_{}({}) greedy {greedy}, brute {brute}", a.format(p), a.format(t)));
            }
        }
    }
    Ok(format!("{} patterns x {} words", patterns.len(), texts.len()))
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    a / gcd(a, b) * b
}

fn c7_homogenization() -> Outcome {
    let a = f2();
    let half = phi(&a, &w(&a, "aa"), &w(&a, "a")).map_err(|e| e.to_string())?;
    if half != ratio(1, 2) {
        return Err(format!("phi(aa, a) = {}", format_rational(&half)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = Vec::new();
    let mut exact_mismatches = 0;
    for _ in 0..200 {
        let mut pattern = Word::identity();
        while pattern.is_empty() {
            pattern = a.random_word(rng.gen_range(1..=4), &mut rng);
        }
        let g = a.random_word(rng.gen_range(0..=4), &mut rng);
        let slope = homogenize(&a, &Oracle::Counting(pattern.clone()), &g).map_err(|e| e.to_string())?;
        let v = |n: i64| big_phi(&a, &pattern, &a.power(&g, n)).unwrap();
        let estimate = ratio(v(50) - v(25), 25);
        if slope != estimate {
            mismatches.push(format!(
                "({}, {}): slope {} vs estimate {}",
                a.format(&pattern),
                a.format(&g),
                format_rational(&slope),
                format_rational(&estimate)
            ));
        }
        // span divisible by every possible period of n ↦ Φ_w(gⁿ)
        let span = (1..=2 * pattern.len() as i64).fold(1, lcm);
        if slope != ratio(v(50 + span) - v(50), span) || slope != phi(&a, &pattern, &g).unwrap() {
            exact_mismatches += 1;
        }
    }
    if mismatches.is_empty() && exact_mismatches == 0 {
        Ok("phi(aa, a) = 1/2; 200 samples agree with (Φ(g^50) - Φ(g^25))/25".into())
    } else {
        Err(format!(
            "{} of 200 samples differ from (Φ(g^50) - Φ(g^25))/25, e.g. {}; \
             {exact_mismatches} differ from the full-period quotient and exact phi",
            mismatches.len(),
            mismatches[..mismatches.len().min(3)].join(", ")
        ))
    }
}

fn c8_reconstruction() -> Outcome {
    let a = f2();
    let o = Oracle::parse(&a, "evenexp-raw").map_err(|e| e.to_string())?;
    let e = expand(&a, &o, 6).map_err(|e| e.to_string())?;
    let mut count = 0;
    for n in 0..=6 {
        for g in cyclically_reduced_words(&a, n) {
            let v = evaluate_expansion(&a, &e, &g);
            let h = homogenize(&a, &o, &g).map_err(|e| e.to_string())?;
            if v.truncated || v.value != h {
                return Err(format!(
                    "at {}: expansion {} vs homogenization {}",
                    a.format(&g),
                    format_rational(&v.value),
                    format_rational(&h)
                ));
            }
            count += 1;
        }
    }
    Ok(format!("{count} cyclically reduced words"))
}

fn c9_indicator() -> Outcome {
    let a = f2();
    let basis = enumerate_basis(&a, 3).map_err(|e| e.to_string())?;
    for b in &basis.words {
        let e = expand(&a, &Oracle::CountingHomogeneous(b.word().clone()), 4).map_err(|e| e.to_string())?;
        let ok = e.coefficients.len() == 1 && e.coefficients.get(b) == Some(&int(1));
        if !ok {
            let got: Vec<String> = e
                .coefficients
                .iter()
                .map(|(k, r)| format!("{}:{}", a.format(k.word()), format_rational(r)))
                .collect();
            return Err(format!("expand(phi_{}) = {{{}}}", a.format(b.word()), got.join(", ")));
        }
    }
    Ok(format!("{} basis words", basis.words.len()))
}

fn random_table<R: Rng>(a: &Alphabet, rng: &mut R) -> CosetTable {
    use rand::seq::SliceRandom;
    loop {
        let d = rng.gen_range(1..=6);
        let action = (0..a.rank())
            .map(|_| {
                let mut p: Vec<usize> = (0..d).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        let t = CosetTable::new(action);
        if validate_table(a, &t).is_ok() {
            return t;
        }
    }
}

fn c10_cover() -> Outcome {
    let a = f2();
    let table = CosetTable::parse(&a, "a: 1 0\nb: 0 1\n").map_err(|e| e.to_string())?;
    let data = schreier_basis(&a, &table).map_err(|e| e.to_string())?;
    let gens: Vec<String> = data.generators.iter().map(|g| a.format(&g.expression)).collect();
    if gens != ["aa", "b", "abA"] {
        return Err(format!("Schreier basis {gens:?}"));
    }
    let g = w(&a, "abAB");
    let lifts = lift_chain(&a, &data, &g).map_err(|e| e.to_string())?;
    let names: Vec<(String, usize)> = lifts.iter().map(|l| (data.subgroup.format(&l.element), l.degree)).collect();
    if names != [("x3X2".to_string(), 1), ("x1x2X1X3".to_string(), 1)] {
        return Err(format!("lifts {names:?}"));
    }
    for l in &lifts {
        if !are_conjugate(&a, &data.substitute(&a, &l.element), &g) {
            return Err(format!("substituted lift {} not conjugate to abAB", data.subgroup.format(&l.element)));
        }
    }
    match scl_via_cover(&a, &data, &g).map_err(|e| e.to_string())? {
        CoverBound::Bound { bound, .. } if bound == ratio(1, 16) => {}
        other => return Err(format!("scl_via_cover gave {other:?}")),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let t = random_table(&a, &mut rng);
        let data = schreier_basis(&a, &t).map_err(|e| e.to_string())?;
        let mut g = Word::identity();
        while g.is_empty() {
            g = a.random_word(rng.gen_range(1..=8), &mut rng);
        }
        let lifts = lift_chain(&a, &data, &g).map_err(|e| e.to_string())?;
        let total: usize = lifts.iter().map(|l| l.degree).sum();
        if total != t.index() {
            return Err(format!("degrees sum to {total} on a table of index {}", t.index()));
        }
        for l in &lifts {
            let back = data.substitute(&a, &l.element);
            if !are_conjugate(&a, &back, &a.power(&g, l.degree as i64)) {
                return Err(format!("lift of {} from coset {} does not substitute back", a.format(&g), l.start_coset));
            }
        }
    }
    Ok("index-2 example exact; 100 random tables".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("expand evenexp 11 coefficients", c1_even_exponent_coefficients, 60),
        ("sclbound constant", c2_chain_constant, 1),
        ("effective-word vanishing", c3_effective_vanishing, 30),
        ("equal-length trichotomy", c4_equal_length, 60),
        ("defect bounds", c5_defects, 120),
        ("greedy counting", c6_greedy_counting, 120),
        ("homogenization slopes", c7_homogenization, 120),
        ("basis reconstruction", c8_reconstruction, 300),
        ("indicator probe", c9_indicator, 60),
        ("cover correctness", c10_cover, 60),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(*budget) => {
                Err(format!("{detail}, but took {elapsed:.1?} (budget {budget}s)"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    let unexpected: Vec<usize> = failed.iter().copied().filter(|c| !EXPECTED_FAILURES.contains(c)).collect();
    let unexpected_pass: Vec<usize> = EXPECTED_FAILURES.iter().copied().filter(|c| !failed.contains(c)).collect();
    println!("acceptance: {} of 10 criteria pass, failing {failed:?}", 10 - failed.len());
    if !unexpected.is_empty() || !unexpected_pass.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}, unexpected passes {unexpected_pass:?}");
        std::process::exit(1);
    }
    if !failed.is_empty() {
        println!(
            "acceptance: criterion 7 compares exact slopes with (Φ(g^50) - Φ(g^25))/25, which is off by the \
             periodic term whenever the period of n -> Φ(g^n) does not divide 25 (already for (aa, a))"
        );
    }
}
