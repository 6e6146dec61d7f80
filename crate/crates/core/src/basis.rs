//! The basis `B` of effective words and expansions of homogeneous class
//! functions as `φ = Σ r_w φ_w`.
//!
//! `B` holds one word from each pair `{w, w̄}` of effective words with `w̄`
//! the effective representative of `w⁻¹`, namely the well-order-smaller
//! one (see [`orient`]). The coefficients are defined by induction along
//! the well order,
//!
//! ```text
//! r_w = φ(w) − Σ_{w' ∈ B, w' < w} r_{w'} φ_{w'}(w),
//! ```
//!
//! and only words `w'` of length `< |w|` occurring in `w^∞` or `w^{-∞}`
//! can contribute to the sum. Truncating at a length cutoff is therefore
//! exact for every coefficient it keeps.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{phi, CountingError, Oracle};
use crate::rational::{format_rational, int, parse_rational, ParseRationalError, Rational};
use crate::words::{
    conjugacy_length, effective_rep, is_effective, orient, Alphabet, EffectiveWord, Letter, Orientation, Word,
    WordError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BasisError {
    #[error("length cutoff must be at least 1")]
    ZeroCutoff,
    #[error("oracle is not homogeneous: o({word}²) ≠ 2·o({word})")]
    NotHomogeneous { word: String },
    #[error("oracle is not a class function: o({conjugator}·{word}·{conjugator}⁻¹) ≠ o({word})")]
    NotClassFunction { word: String, conjugator: String },
    #[error("{0} is not a basis word")]
    NotBasisWord(String),
    #[error("invalid expansion JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Oracle(#[from] CountingError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
}

/// Basis words of length at most `cutoff`, in the well order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisEnumeration {
    pub cutoff: usize,
    pub words: Vec<EffectiveWord>,
}

pub fn in_basis(alphabet: &Alphabet, w: &EffectiveWord) -> bool {
    orient(alphabet, w).1 == Orientation::Positive
}

pub fn enumerate_basis(alphabet: &Alphabet, cutoff: usize) -> Result<BasisEnumeration, BasisError> {
    if cutoff == 0 {
        return Err(BasisError::ZeroCutoff);
    }
    let letters: Vec<Letter> = alphabet.letters().collect();
    let mut by_length: Vec<Vec<EffectiveWord>> = vec![Vec::new(); cutoff + 1];
    let mut prefix = Vec::with_capacity(cutoff);
    extend_prenecklaces(alphabet, &letters, &mut prefix, 0, cutoff, &mut by_length);
    let words = by_length.into_iter().flatten().collect();
    Ok(BasisEnumeration { cutoff, words })
}

/// Depth-first generation of reduced prenecklaces (prefixes of Lyndon
/// words) in lexicographic order; `period` is the FKM period of `prefix`.
fn extend_prenecklaces(
    alphabet: &Alphabet,
    letters: &[Letter],
    prefix: &mut Vec<Letter>,
    period: usize,
    cutoff: usize,
    out: &mut [Vec<EffectiveWord>],
) {
    let n = prefix.len();
    if n > 0 && n == period && alphabet.is_cyclically_reduced(&Word(prefix.clone())) {
        let w = EffectiveWord::new(alphabet, Word(prefix.clone())).expect("reduced Lyndon words are effective");
        if in_basis(alphabet, &w) {
            out[n].push(w);
        }
    }
    if n == cutoff {
        return;
    }
    for &x in letters {
        if let Some(&last) = prefix.last() {
            if x == alphabet.inverse(last) {
                continue;
            }
        }
        let next_period = if n == 0 {
            1
        } else {
            let compare = prefix[n - period];
            if x < compare {
                continue;
            } else if x == compare {
                period
            } else {
                n + 1
            }
        };
        prefix.push(x);
        extend_prenecklaces(alphabet, letters, prefix, next_period, cutoff, out);
        prefix.pop();
    }
}

/// Coefficients `r_w` for basis words up to a length cutoff. Zeros are omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub cutoff: usize,
    pub oracle: String,
    pub coefficients: BTreeMap<EffectiveWord, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionJson {
    pub cutoff: usize,
    pub oracle: String,
    /// Basis word to nonzero coefficient.
    pub coefficients: BTreeMap<String, String>,
}

impl Expansion {
    pub fn coefficient(&self, alphabet: &Alphabet, word: &str) -> Rational {
        alphabet
            .parse_word(word)
            .ok()
            .and_then(|w| self.coefficients.iter().find(|(k, _)| *k.word() == w))
            .map(|(_, r)| r.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> ExpansionJson {
        ExpansionJson {
            cutoff: self.cutoff,
            oracle: self.oracle.clone(),
            coefficients: self
                .coefficients
                .iter()
                .map(|(w, r)| (alphabet.format(w.word()), format_rational(r)))
                .collect(),
        }
    }

    pub fn from_json(alphabet: &Alphabet, json: &ExpansionJson) -> Result<Self, BasisError> {
        let mut coefficients = BTreeMap::new();
        for (name, coeff) in &json.coefficients {
            let word = alphabet.parse_word(name)?;
            let w = EffectiveWord::new(alphabet, word).map_err(|_| BasisError::NotBasisWord(name.clone()))?;
            if !in_basis(alphabet, &w) || w.len() > json.cutoff {
                return Err(BasisError::NotBasisWord(name.clone()));
            }
            let r = parse_rational(coeff)?;
            if !r.is_zero() {
                coefficients.insert(w, r);
            }
        }
        Ok(Expansion { cutoff: json.cutoff, oracle: json.oracle.clone(), coefficients })
    }

    pub fn parse_json(alphabet: &Alphabet, text: &str) -> Result<Self, BasisError> {
        let json: ExpansionJson = serde_json::from_str(text).map_err(|e| BasisError::Json(e.to_string()))?;
        Self::from_json(alphabet, &json)
    }
}

const SPOT_CHECKS: usize = 32;
const SPOT_CHECK_SEED: u64 = 0x5eed;

/// Rejects oracles that visibly fail `o(g²) = 2·o(g)` or `o(hgh⁻¹) = o(g)`
/// on a fixed random sample. Passing proves nothing.
pub fn spot_check_homogeneous(alphabet: &Alphabet, oracle: &Oracle) -> Result<(), BasisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SPOT_CHECK_SEED);
    for _ in 0..SPOT_CHECKS {
        let g = alphabet.random_word(rng.gen_range(1..=6), &mut rng);
        let h = alphabet.random_word(rng.gen_range(1..=4), &mut rng);
        let value = oracle.evaluate(alphabet, &g)?;
        if oracle.evaluate(alphabet, &alphabet.power(&g, 2))? != int(2) * &value {
            return Err(BasisError::NotHomogeneous { word: alphabet.format(&g) });
        }
        if oracle.evaluate(alphabet, &alphabet.conjugate(&g, &h))? != value {
            return Err(BasisError::NotClassFunction { word: alphabet.format(&g), conjugator: alphabet.format(&h) });
        }
    }
    Ok(())
}

/// Expands the homogenization of `oracle` over basis words of length at
/// most `cutoff`.
pub fn expand(alphabet: &Alphabet, oracle: &Oracle, cutoff: usize) -> Result<Expansion, BasisError> {
    let oracle = oracle.homogenized();
    spot_check_homogeneous(alphabet, &oracle)?;
    let basis = enumerate_basis(alphabet, cutoff)?;

    let mut nonzero: HashMap<Vec<Letter>, Rational> = HashMap::new();
    let mut coefficients = BTreeMap::new();
    for w in &basis.words {
        let mut r = oracle.evaluate(alphabet, w.word())?;
        for u in contributing_words(alphabet, w.word(), &nonzero) {
            let ru = &nonzero[u.as_slice()];
            r -= ru * phi(alphabet, &Word(u.clone()), w.word())?;
        }
        if !r.is_zero() {
            nonzero.insert(w.word().to_vec(), r.clone());
            coefficients.insert(w.clone(), r);
        }
    }
    Ok(Expansion { cutoff, oracle: oracle.describe(alphabet), coefficients })
}

/// Keys of `nonzero` that are proper subwords of `w^∞` or `(w⁻¹)^∞`.
/// Any other basis word `u < w` has `φ_u(w) = 0`.
fn contributing_words(alphabet: &Alphabet, w: &Word, nonzero: &HashMap<Vec<Letter>, Rational>) -> Vec<Vec<Letter>> {
    let n = w.len();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for text in [w.clone(), alphabet.invert(w)] {
        let doubled: Vec<Letter> = text.iter().chain(text.iter()).copied().collect();
        for start in 0..n {
            for len in 1..n {
                let sub = &doubled[start..start + len];
                if nonzero.contains_key(sub) && seen.insert(sub.to_vec()) {
                    out.push(sub.to_vec());
                }
            }
        }
    }
    out.sort_by(|a, b| crate::words::well_order_compare(a, b));
    out
}

/// Value of a truncated expansion at `g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionValue {
    pub value: Rational,
    /// `|g|_C` exceeds the cutoff, so omitted coefficients may matter.
    pub truncated: bool,
}

pub fn evaluate_expansion(alphabet: &Alphabet, expansion: &Expansion, g: &Word) -> ExpansionValue {
    let value = expansion
        .coefficients
        .iter()
        .map(|(w, r)| r * phi(alphabet, w.word(), g).expect("basis words are nonempty"))
        .fold(Rational::zero(), |acc, x| acc + x);
    ExpansionValue { value, truncated: conjugacy_length(alphabet, g) > expansion.cutoff }
}

/// The basis word representing `g` up to conjugacy and inversion, with
/// the sign and exponent: `g ≡ sign · m · b` in the chain quotient.
pub fn basis_coordinate(alphabet: &Alphabet, g: &Word) -> Result<(EffectiveWord, i64), WordError> {
    let (root, m) = crate::words::primitive_decompose(alphabet, g)?;
    let e = effective_rep(alphabet, &root)?;
    let (b, sign) = orient(alphabet, &e);
    Ok((b, sign.signum() * m as i64))
}

/// Whether a word is a member of `B` (effective and positively oriented).
pub fn is_basis_word(alphabet: &Alphabet, w: &Word) -> bool {
    is_effective(alphabet, w) && in_basis(alphabet, &EffectiveWord::new(alphabet, w.clone()).unwrap())
}
