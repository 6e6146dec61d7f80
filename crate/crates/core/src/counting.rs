//! Counting quasimorphisms and homogenization.
//!
//! `C_w(g)` is the maximal number of pairwise disjoint copies of `w` in the
//! reduced form of `g`, `Φ_w = C_w − C_{w⁻¹}`, and `φ_w` is the
//! homogenization `lim Φ_w(gⁿ)/n`. All values are exact rationals.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::{int, Rational};
use crate::words::{abelianize, cyclic_reduce, failure_function, Alphabet, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("counting pattern must be a nonempty word")]
    EmptyPattern,
    #[error("period not found for {word} within start {start}, max period {max_period}")]
    PeriodNotFound { word: String, start: usize, max_period: usize },
    #[error("the even-exponent quasimorphism needs generators named a and b")]
    EvenExponentAlphabet,
    #[error("generator {0:?} is not in the alphabet")]
    UnknownGenerator(String),
    #[error("unknown oracle {0:?} (expected count:<word>, phi:<word>, evenexp, evenexp-raw or abelian:<generator>)")]
    UnknownOracle(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Leftmost-greedy count of non-overlapping occurrences of `pattern` in `text`.
///
/// All occurrences have the same length, so taking the earliest-ending one
/// each time is optimal (interval scheduling).
pub fn count_disjoint(pattern: &[Letter], text: &[Letter]) -> Result<usize, CountingError> {
    if pattern.is_empty() {
        return Err(CountingError::EmptyPattern);
    }
    let fail = failure_function(pattern);
    let mut count = 0;
    let mut k = 0;
    for &c in text {
        while k > 0 && c != pattern[k] {
            k = fail[k];
        }
        if c == pattern[k] {
            k += 1;
        }
        if k == pattern.len() {
            count += 1;
            k = 0;
        }
    }
    Ok(count)
}

/// `Φ_w(g) = C_w(g) − C_{w⁻¹}(g)`.
pub fn big_phi(alphabet: &Alphabet, pattern: &Word, g: &Word) -> Result<i64, CountingError> {
    let forward = count_disjoint(pattern, g)? as i64;
    let backward = count_disjoint(&alphabet.invert(pattern), g)? as i64;
    Ok(forward - backward)
}

/// Exact homogenization `φ_w(g)`.
///
/// Runs the greedy scan on the periodic word `c c c …` (with `c` the cyclic
/// core of `g`) and stops as soon as the scan pointer revisits a residue
/// mod `|c|`; from then on the picks repeat, so picks per copy of `c` over
/// that cycle is the limit. The conjugator only changes `Φ_w(gⁿ)` by a
/// bounded amount and does not affect the slope.
pub fn phi(alphabet: &Alphabet, pattern: &Word, g: &Word) -> Result<Rational, CountingError> {
    if pattern.is_empty() {
        return Err(CountingError::EmptyPattern);
    }
    let core = cyclic_reduce(alphabet, g).core;
    if core.is_empty() {
        return Ok(Rational::zero());
    }
    let inverse = alphabet.invert(pattern);
    Ok(periodic_density(pattern, &core) - periodic_density(&inverse, &core))
}

/// Limit of `C_w(cⁿ)/n` for a cyclically reduced `core`.
fn periodic_density(pattern: &[Letter], core: &[Letter]) -> Rational {
    let n = core.len();
    let m = pattern.len();
    // occurs[r]: the pattern matches c^∞ starting at offset r
    let copies = m.div_ceil(n) + 1;
    let text: Vec<Letter> = core.iter().copied().cycle().take(n * copies + n).collect();
    let mut occurs = vec![false; n];
    let fail = failure_function(pattern);
    let mut k = 0;
    for (i, &c) in text.iter().enumerate() {
        while k > 0 && (k == m || c != pattern[k]) {
            k = fail[k];
        }
        if c == pattern[k] {
            k += 1;
        }
        if k == m {
            let start = i + 1 - m;
            if start < n {
                occurs[start] = true;
            }
        }
    }
    if !occurs.iter().any(|&b| b) {
        return Rational::zero();
    }
    // seen[r] = (picks, pointer) the first time the pointer sat at residue r
    let mut seen: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut picks = 0usize;
    let mut pointer = 0usize;
    loop {
        let r = pointer % n;
        if let Some((p0, t0)) = seen[r] {
            return Rational::new(((picks - p0) * n).into(), (pointer - t0).into());
        }
        seen[r] = Some((picks, pointer));
        let skip = (0..n).find(|d| occurs[(r + d) % n]).expect("some occurrence exists");
        pointer += skip + m;
        picks += 1;
    }
}

/// Start index and longest period tried by the slope-periodicity search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub max_period: usize,
}

impl Window {
    /// Default for oracles with no better bound, keyed on the cyclic core length.
    pub fn generic(core_len: usize) -> Self {
        Window { start: core_len + 4, max_period: 2 * core_len + 2 }
    }

    /// For `Φ_w`. The greedy scan on `cⁿ` is eventually periodic in `n`, with
    /// preperiod at most `|w| + |c| + ⌈|w|/|c|⌉` and period below `2|w|`
    /// for each of `C_w`, `C_{w⁻¹}`; their difference has period dividing the
    /// lcm, hence at most `4|w|²`.
    pub fn counting(pattern_len: usize, core_len: usize) -> Self {
        let c = core_len.max(1);
        let start = 2 * pattern_len.div_ceil(c) + 2 + pattern_len + core_len;
        Window { start, max_period: 4 * pattern_len * pattern_len + 2 }
    }
}

/// `lim o(gⁿ)/n` by slope periodicity: evaluate `v_n = o(gⁿ)` for `n` in
/// `[start, start + 2P]`, find the least `p ≤ P` with `v_{n+p} − v_n`
/// constant over the window, and return that constant over `p`.
pub fn homogenize_with(
    alphabet: &Alphabet,
    oracle: &Oracle,
    g: &Word,
    window: Window,
) -> Result<Rational, CountingError> {
    if g.is_empty() {
        return Ok(Rational::zero());
    }
    let Window { start, max_period } = window;
    let values = (start..=start + 2 * max_period)
        .map(|n| oracle.evaluate(alphabet, &alphabet.power(g, n as i64)))
        .collect::<Result<Vec<_>, _>>()?;
    for p in 1..=max_period {
        let d = &values[p] - &values[0];
        if (1..values.len() - p).all(|i| &values[i + p] - &values[i] == d) {
            return Ok(d / int(p as i64));
        }
    }
    Err(CountingError::PeriodNotFound { word: alphabet.format(g), start, max_period })
}

/// [`homogenize_with`] using the oracle's own window.
pub fn homogenize(alphabet: &Alphabet, oracle: &Oracle, g: &Word) -> Result<Rational, CountingError> {
    let core_len = cyclic_reduce(alphabet, g).core.len();
    homogenize_with(alphabet, oracle, g, oracle.window(core_len))
}

/// A user-supplied function on words.
#[derive(Clone)]
pub struct UserOracle {
    pub name: String,
    pub homogeneous: bool,
    pub window: Option<Window>,
    #[allow(clippy::type_complexity)]
    pub function: Arc<dyn Fn(&Alphabet, &Word) -> Rational + Send + Sync>,
}

impl fmt::Debug for UserOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserOracle")
            .field("name", &self.name)
            .field("homogeneous", &self.homogeneous)
            .finish()
    }
}

/// A function on the free group that can be evaluated, homogenized,
/// sampled for defect and expanded in the counting basis.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// `Φ_w`
    Counting(Word),
    /// `φ_w`
    CountingHomogeneous(Word),
    /// Positive minus negative even syllable exponents of the reduced word.
    EvenExponent,
    EvenExponentHomogeneous,
    /// Exponent sum of one generator.
    Abelian(usize),
    User(UserOracle),
    /// Any oracle evaluated through [`homogenize`].
    Homogenization(Box<Oracle>),
}

impl Oracle {
    /// Parses `count:<w>`, `phi:<w>`, `evenexp`, `evenexp-raw`, `abelian:<g>`.
    pub fn parse(alphabet: &Alphabet, name: &str) -> Result<Self, CountingError> {
        let name = name.trim();
        let pattern = |text: &str| -> Result<Word, CountingError> {
            let w = alphabet.parse_word(text)?;
            if w.is_empty() {
                return Err(CountingError::EmptyPattern);
            }
            Ok(w)
        };
        if let Some(rest) = name.strip_prefix("count:") {
            return Ok(Oracle::Counting(pattern(rest)?));
        }
        if let Some(rest) = name.strip_prefix("phi:") {
            return Ok(Oracle::CountingHomogeneous(pattern(rest)?));
        }
        if let Some(rest) = name.strip_prefix("abelian:") {
            let index = alphabet
                .generator_names()
                .iter()
                .position(|g| g == rest.trim())
                .ok_or_else(|| CountingError::UnknownGenerator(rest.trim().to_string()))?;
            return Ok(Oracle::Abelian(index));
        }
        match name {
            "evenexp" => Ok(Oracle::EvenExponentHomogeneous),
            "evenexp-raw" => Ok(Oracle::EvenExponent),
            _ => Err(CountingError::UnknownOracle(name.to_string())),
        }
    }

    /// Inverse of [`Oracle::parse`].
    pub fn describe(&self, alphabet: &Alphabet) -> String {
        match self {
            Oracle::Counting(w) => format!("count:{}", alphabet.format(w)),
            Oracle::CountingHomogeneous(w) => format!("phi:{}", alphabet.format(w)),
            Oracle::EvenExponent => "evenexp-raw".into(),
            Oracle::EvenExponentHomogeneous => "evenexp".into(),
            Oracle::Abelian(i) => format!("abelian:{}", alphabet.generator_names()[*i]),
            Oracle::User(u) => u.name.clone(),
            Oracle::Homogenization(inner) => format!("homogenized {}", inner.describe(alphabet)),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        match self {
            Oracle::Counting(_) | Oracle::EvenExponent => false,
            Oracle::CountingHomogeneous(_) | Oracle::EvenExponentHomogeneous | Oracle::Abelian(_) => true,
            Oracle::User(u) => u.homogeneous,
            Oracle::Homogenization(_) => true,
        }
    }

    /// The homogeneous counterpart: `Φ_w ↦ φ_w`, raw even-exponent to its
    /// homogenization; homogeneous oracles map to themselves. Raw user
    /// oracles are wrapped in [`Oracle::Homogenization`].
    pub fn homogenized(&self) -> Oracle {
        match self {
            Oracle::Counting(w) => Oracle::CountingHomogeneous(w.clone()),
            Oracle::EvenExponent => Oracle::EvenExponentHomogeneous,
            Oracle::User(u) if !u.homogeneous => Oracle::Homogenization(Box::new(self.clone())),
            other => other.clone(),
        }
    }

    /// Known upper bound on the defect, where there is one.
    pub fn defect_bound(&self) -> Option<Rational> {
        match self {
            Oracle::Counting(_) => Some(int(2)),
            Oracle::CountingHomogeneous(_) => Some(int(4)),
            Oracle::Abelian(_) => Some(Rational::zero()),
            _ => None,
        }
    }

    pub fn window(&self, core_len: usize) -> Window {
        match self {
            Oracle::Counting(w) => Window::counting(w.len(), core_len),
            // syllables stop merging after two copies; a single syllable has
            // parity period two
            Oracle::EvenExponent => Window { start: 4, max_period: 4 },
            Oracle::User(UserOracle { window: Some(w), .. }) => *w,
            _ => Window::generic(core_len),
        }
    }

    pub fn evaluate(&self, alphabet: &Alphabet, g: &Word) -> Result<Rational, CountingError> {
        match self {
            Oracle::Counting(w) => Ok(int(big_phi(alphabet, w, g)?)),
            Oracle::CountingHomogeneous(w) => phi(alphabet, w, g),
            Oracle::EvenExponent => Ok(int(even_exponent(alphabet, g)?)),
            Oracle::EvenExponentHomogeneous => {
                even_exponent_generators(alphabet)?;
                homogenize(alphabet, &Oracle::EvenExponent, g)
            }
            Oracle::Abelian(i) => Ok(int(abelianize(alphabet, g)[*i])),
            Oracle::User(u) => Ok((u.function)(alphabet, g)),
            Oracle::Homogenization(inner) => homogenize(alphabet, inner, g),
        }
    }
}

fn even_exponent_generators(alphabet: &Alphabet) -> Result<(), CountingError> {
    let names = alphabet.generator_names();
    if names.iter().any(|n| n == "a") && names.iter().any(|n| n == "b") {
        Ok(())
    } else {
        Err(CountingError::EvenExponentAlphabet)
    }
}

/// Writes the reduced word as `x₁^{e₁} x₂^{e₂} …` with maximal syllables and
/// returns (#positive even exponents) − (#negative even exponents). Every
/// generator's syllables count, so at rank 2 this is exactly the
/// `a^{p₁}b^{q₁}…` rule.
pub fn even_exponent(alphabet: &Alphabet, g: &Word) -> Result<i64, CountingError> {
    even_exponent_generators(alphabet)?;
    let mut total = 0;
    let mut i = 0;
    while i < g.len() {
        let (gen, sign) = alphabet.generator_of(g[i]);
        let mut j = i;
        while j < g.len() && alphabet.generator_of(g[j]) == (gen, sign) {
            j += 1;
        }
        if (j - i) % 2 == 0 {
            total += sign;
        }
        i = j;
    }
    Ok(total)
}

/// Largest `|o(gh) − o(g) − o(h)|` over `trials` random pairs of reduced
/// words with lengths up to `max_len`. A lower bound on the defect.
pub fn sample_defect(
    alphabet: &Alphabet,
    oracle: &Oracle,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> Result<Rational, CountingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Rational::zero();
    for _ in 0..trials {
        let g = alphabet.random_word(rng.gen_range(0..=max_len), &mut rng);
        let h = alphabet.random_word(rng.gen_range(0..=max_len), &mut rng);
        let gh = alphabet.multiply(&g, &h);
        let deviation =
            (oracle.evaluate(alphabet, &gh)? - oracle.evaluate(alphabet, &g)? - oracle.evaluate(alphabet, &h)?).abs();
        if deviation > worst {
            worst = deviation;
        }
    }
    Ok(worst)
}
