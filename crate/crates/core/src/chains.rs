//! Rational 1-chains, their normal form over the basis of effective words,
//! and certified scl lower bounds.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::phi;
use crate::rational::{format_rational, int, parse_rational, ParseRationalError, Rational};
use crate::words::{abelianize, effective_root, orient, Alphabet, EffectiveWord, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("chain term {0} is the identity")]
    IdentityTerm(usize),
    #[error("malformed chain term {0:?}")]
    Syntax(String),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("invalid chain JSON: {0}")]
    Json(String),
}

/// A finite formal sum `Σ rᵢ gᵢ` with nonzero coefficients and nontrivial elements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chain {
    terms: Vec<(Rational, Word)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTermJson {
    pub coeff: String,
    pub word: String,
}

impl Chain {
    /// Zero coefficients are dropped; identity elements are rejected.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Word)>) -> Result<Self, ChainError> {
        let mut out = Vec::new();
        for (i, (r, g)) in terms.into_iter().enumerate() {
            if g.is_empty() {
                return Err(ChainError::IdentityTerm(i));
            }
            if !r.is_zero() {
                out.push((r, g));
            }
        }
        Ok(Chain { terms: out })
    }

    pub fn terms(&self) -> &[(Rational, Word)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenation of the term lists.
    pub fn sum(&self, other: &Chain) -> Chain {
        Chain { terms: self.terms.iter().chain(other.terms.iter()).cloned().collect() }
    }

    /// Parses `3/2*abAB - 2*ab + b`.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self, ChainError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(ChainError::Syntax(text.to_string()));
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut negative = false;
        let mut current = String::new();
        for (i, c) in compact.chars().enumerate() {
            if c == '+' || c == '-' {
                if current.is_empty() && i != 0 {
                    return Err(ChainError::Syntax(text.to_string()));
                }
                if !current.is_empty() {
                    pieces.push((negative, std::mem::take(&mut current)));
                }
                negative = c == '-';
            } else {
                current.push(c);
            }
        }
        if current.is_empty() {
            return Err(ChainError::Syntax(text.to_string()));
        }
        pieces.push((negative, current));

        let mut terms = Vec::with_capacity(pieces.len());
        for (negative, body) in pieces {
            let (coeff, word) = match body.split_once('*') {
                Some((q, w)) => (parse_rational(q)?, w),
                None => (int(1), body.as_str()),
            };
            if word.is_empty() {
                return Err(ChainError::Syntax(body.clone()));
            }
            let coeff = if negative { -coeff } else { coeff };
            terms.push((coeff, alphabet.parse_word(word)?));
        }
        Chain::from_terms(terms)
    }

    pub fn from_json(alphabet: &Alphabet, json: &str) -> Result<Self, ChainError> {
        let raw: Vec<ChainTermJson> = serde_json::from_str(json).map_err(|e| ChainError::Json(e.to_string()))?;
        let terms = raw
            .iter()
            .map(|t| Ok((parse_rational(&t.coeff)?, alphabet.parse_word(&t.word)?)))
            .collect::<Result<Vec<_>, ChainError>>()?;
        Chain::from_terms(terms)
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> Vec<ChainTermJson> {
        self.terms
            .iter()
            .map(|(r, g)| ChainTermJson { coeff: format_rational(r), word: alphabet.format(g) })
            .collect()
    }

    pub fn format(&self, alphabet: &Alphabet) -> String {
        format_terms(self.terms.iter().map(|(r, g)| (r, alphabet.format(g))))
    }
}

fn format_terms<'a>(terms: impl Iterator<Item = (&'a Rational, String)>) -> String {
    let mut out = String::new();
    for (i, (r, word)) in terms.enumerate() {
        let sign = if r.is_negative() { "-" } else { "+" };
        if i == 0 {
            if r.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        out.push_str(&format!("{}*{}", format_rational(&r.abs()), word));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// The class of a chain in the quotient by `gⁿ − ng` and `g − hgh⁻¹`,
/// written over the basis words. Keys are in the well order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalChain {
    pub coeffs: BTreeMap<EffectiveWord, Rational>,
}

impl NormalChain {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficientwise sum.
    pub fn add(&self, other: &NormalChain) -> NormalChain {
        let mut coeffs = self.coeffs.clone();
        for (k, r) in &other.coeffs {
            accumulate(&mut coeffs, k.clone(), r.clone());
        }
        NormalChain { coeffs }
    }

    pub fn format(&self, alphabet: &Alphabet) -> String {
        format_terms(self.coeffs.iter().map(|(k, r)| (r, alphabet.format(k.word()))))
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> Vec<ChainTermJson> {
        self.coeffs
            .iter()
            .map(|(k, r)| ChainTermJson { coeff: format_rational(r), word: alphabet.format(k.word()) })
            .collect()
    }

    /// The normal form read back as a chain.
    pub fn to_chain(&self) -> Chain {
        Chain { terms: self.coeffs.iter().map(|(k, r)| (r.clone(), k.word().clone())).collect() }
    }
}

fn accumulate(coeffs: &mut BTreeMap<EffectiveWord, Rational>, key: EffectiveWord, r: Rational) {
    let entry = coeffs.entry(key).or_insert_with(Rational::zero);
    *entry += r;
    if entry.is_zero() {
        coeffs.retain(|_, v| !v.is_zero());
    }
}

/// Each term `r·g` with `g ~ uᵐ` contributes `±r·m` to the basis word of `u`.
pub fn normalize(alphabet: &Alphabet, chain: &Chain) -> NormalChain {
    let mut coeffs = BTreeMap::new();
    for (r, g) in &chain.terms {
        let (root, m) = effective_root(alphabet, g).expect("chain terms are nontrivial");
        let (key, sign) = orient(alphabet, &root);
        accumulate(&mut coeffs, key, r * int(m as i64 * sign.signum()));
    }
    NormalChain { coeffs }
}

/// A chain of a free group is a real 1-boundary iff it vanishes in the
/// rational abelianization.
pub fn is_boundary(alphabet: &Alphabet, chain: &Chain) -> bool {
    let mut total = vec![Rational::zero(); alphabet.rank()];
    for (r, g) in &chain.terms {
        for (t, e) in total.iter_mut().zip(abelianize(alphabet, g)) {
            *t += r * int(e);
        }
    }
    total.iter().all(Zero::is_zero)
}

/// `φ_w(c) = Σ rᵢ φ_w(gᵢ)` on the raw chain.
pub fn chain_phi(alphabet: &Alphabet, pattern: &Word, chain: &Chain) -> Rational {
    chain
        .terms
        .iter()
        .map(|(r, g)| r * phi(alphabet, pattern, g).expect("nonempty pattern"))
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Basis words of the normal form in both orientations, each with its
/// `φ`-value on the chain, positive values only.
fn oriented_candidates<'a>(
    alphabet: &'a Alphabet,
    chain: &'a Chain,
    keys: impl Iterator<Item = &'a EffectiveWord> + 'a,
) -> impl Iterator<Item = (EffectiveWord, Rational)> + 'a {
    keys.filter_map(move |key| {
        let value = chain_phi(alphabet, key.word(), chain);
        if value.is_positive() {
            Some((key.clone(), value))
        } else if value.is_negative() {
            let flipped = crate::words::effective_rep(alphabet, &alphabet.invert(key.word()))
                .expect("inverse of an effective word is indivisible");
            Some((flipped, -value))
        } else {
            None
        }
    })
}

/// Largest value first, then the well-order-smaller word.
fn best(candidates: impl Iterator<Item = (EffectiveWord, Rational)>) -> Option<(EffectiveWord, Rational)> {
    candidates.min_by(|(w1, v1), (w2, v2)| match v2.cmp(v1) {
        Ordering::Equal => w1.cmp(w2),
        other => other,
    })
}

/// An effective word `w` with `φ_w(c) > 0`, taken among the longest basis
/// words in the normal form, with the exact value. `None` for the zero chain.
pub fn witness(alphabet: &Alphabet, chain: &Chain) -> Option<(EffectiveWord, Rational)> {
    let normal = normalize(alphabet, chain);
    let longest = normal.coeffs.keys().map(EffectiveWord::len).max()?;
    let found = best(oriented_candidates(
        alphabet,
        chain,
        normal.coeffs.keys().filter(move |k| k.len() == longest),
    ));
    Some(found.expect("a longest basis word always sees the chain"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCertificate {
    pub witness: EffectiveWord,
    /// `φ_witness(c)`
    pub value: Rational,
    /// `value / (2 · defect_bound_used)`
    pub bound: Rational,
    pub defect_bound_used: Rational,
}

impl BoundCertificate {
    pub fn new(witness: EffectiveWord, value: Rational) -> Self {
        let defect = int(4);
        let bound = &value / (int(2) * &defect);
        BoundCertificate { witness, value, bound, defect_bound_used: defect }
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        serde_json::json!({
            "witness": alphabet.format(self.witness.word()),
            "value": format_rational(&self.value),
            "bound": format_rational(&self.bound),
            "defect_bound": format_rational(&self.defect_bound_used),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SclBound {
    /// The chain is not a 1-boundary, so scl is undefined.
    NotABoundary,
    /// The chain vanishes in the quotient and has scl zero.
    Zero,
    Bound(BoundCertificate),
}

impl SclBound {
    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        match self {
            SclBound::NotABoundary => serde_json::json!({ "result": "not_a_boundary" }),
            SclBound::Zero => serde_json::json!({ "result": "zero" }),
            SclBound::Bound(cert) => {
                let mut v = cert.to_json(alphabet);
                v["result"] = "bound".into();
                v
            }
        }
    }

    pub fn format(&self, alphabet: &Alphabet) -> String {
        match self {
            SclBound::NotABoundary => "not_a_boundary".into(),
            SclBound::Zero => "zero".into(),
            SclBound::Bound(c) => format!(
                "bound {} witness {} value {}",
                format_rational(&c.bound),
                alphabet.format(c.witness.word()),
                format_rational(&c.value)
            ),
        }
    }
}

/// Bavard duality with the counting quasimorphisms of every basis word in
/// the normal form: `scl(c) ≥ max φ_w(c) / 8`.
pub fn scl_lower_bound(alphabet: &Alphabet, chain: &Chain) -> SclBound {
    if !is_boundary(alphabet, chain) {
        return SclBound::NotABoundary;
    }
    let normal = normalize(alphabet, chain);
    if normal.is_zero() {
        return SclBound::Zero;
    }
    let (witness, value) =
        best(oriented_candidates(alphabet, chain, normal.coeffs.keys())).expect("nonzero chains have a witness");
    SclBound::Bound(BoundCertificate::new(witness, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn f2() -> Alphabet {
        Alphabet::with_rank(2).unwrap()
    }

    fn chain(a: &Alphabet, s: &str) -> Chain {
        Chain::parse(a, s).unwrap()
    }

    #[test]
    fn parse_grammar() {
        let a = f2();
        let c = chain(&a, "3/2*abAB - 2*ab + b");
        assert_eq!(c.terms().len(), 3);
        assert_eq!(c.terms()[0].0, ratio(3, 2));
        assert_eq!(c.terms()[1].0, int(-2));
        assert_eq!(c.terms()[2].0, int(1));
        assert_eq!(chain(&a, "-3*ab").terms()[0].0, int(-3));
        assert_eq!(c.format(&a), "3/2*abAB - 2*ab + 1*b");
        assert!(matches!(Chain::parse(&a, "1*aA"), Err(ChainError::IdentityTerm(0))));
        assert!(Chain::parse(&a, "2*").is_err());
        assert!(Chain::parse(&a, "a +").is_err());
        assert!(Chain::parse(&a, "a ++ b").is_err());
        assert!(Chain::parse(&a, "x*a").is_err());
        assert!(Chain::parse(&a, "").is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = f2();
        let c = chain(&a, "3/2*abAB - 2*ab + b");
        let text = serde_json::to_string(&c.to_json(&a)).unwrap();
        assert_eq!(Chain::from_json(&a, &text).unwrap(), c);
    }

    #[test]
    fn normalize_examples() {
        let a = f2();
        assert_eq!(normalize(&a, &chain(&a, "1*abAB")).format(&a), "1*abAB");
        assert!(normalize(&a, &chain(&a, "1*a + 1*A")).is_zero());
        assert_eq!(normalize(&a, &chain(&a, "1*abab")).format(&a), "2*ab");
        assert_eq!(normalize(&a, &chain(&a, "BA")).format(&a), "-1*ab");
    }

    #[test]
    fn boundary_examples() {
        let a = f2();
        assert!(is_boundary(&a, &chain(&a, "1*abAB")));
        assert!(!is_boundary(&a, &chain(&a, "1*a")));
        assert!(is_boundary(&a, &chain(&a, "1*ab + 1*BA")));
        assert!(is_boundary(&a, &chain(&a, "1/2*aa - 1*a")));
    }

    #[test]
    fn witness_examples() {
        let a = f2();
        let (w, v) = witness(&a, &chain(&a, "1*abAB")).unwrap();
        assert_eq!((a.format(w.word()), v), ("abAB".into(), int(1)));
        let (w, v) = witness(&a, &chain(&a, "-3*ab")).unwrap();
        assert_eq!((a.format(w.word()), v), ("AB".into(), int(3)));
        assert!(witness(&a, &chain(&a, "1*a + 1*A")).is_none());
    }

    #[test]
    fn scl_bound_examples() {
        let a = f2();
        match scl_lower_bound(&a, &chain(&a, "1*abAB")) {
            SclBound::Bound(c) => {
                assert_eq!(a.format(c.witness.word()), "abAB");
                assert_eq!(c.value, int(1));
                assert_eq!(c.bound, ratio(1, 8));
                assert_eq!(c.defect_bound_used, int(4));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(scl_lower_bound(&a, &chain(&a, "1*a + 1*A")), SclBound::Zero);
        assert_eq!(scl_lower_bound(&a, &chain(&a, "1*a")), SclBound::NotABoundary);
        assert_eq!(
            scl_lower_bound(&a, &chain(&a, "abAB")).format(&a),
            "bound 1/8 witness abAB value 1"
        );
    }

    #[test]
    fn bound_uses_best_basis_word() {
        let a = f2();
        let c = chain(&a, "3*ab - 3*ba + 1*abAB");
        match scl_lower_bound(&a, &c) {
            SclBound::Bound(cert) => assert_eq!(cert.value, int(1)),
            other => panic!("{other:?}"),
        }
        // φ_ab and φ_AABB both give 1; the tie goes to the shorter word
        let c = chain(&a, "ab + ab + AABB");
        match scl_lower_bound(&a, &c) {
            SclBound::Bound(cert) => {
                assert_eq!(a.format(cert.witness.word()), "ab");
                assert_eq!(cert.value, int(1));
                assert_eq!(cert.bound * int(8), cert.value.clone());
            }
            other => panic!("{other:?}"),
        }
    }
}
