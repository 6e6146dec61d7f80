//! Reduced words in a finitely generated free group.
//!
//! Letters are stored by their rank in the alphabet order, so the derived
//! ordering on [`Word`] is the lexicographic order of the alphabet. Anything
//! that needs inverses (reduction, conjugation, orientation) goes through an
//! [`Alphabet`].

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("unknown symbol {symbol:?} at byte {position}")]
    UnknownSymbol { symbol: String, position: usize },
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("identity has no primitive root")]
    Identity,
    #[error("word is divisible: it is conjugate to ({root})^{exponent}")]
    Divisible { root: String, exponent: usize },
    #[error("word {0} is not effective")]
    NotEffective(String),
}

/// A symbol, identified by its position in the alphabet order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(pub(crate) u32);

impl Letter {
    pub fn rank(self) -> usize {
        self.0 as usize
    }
}

/// An ordered, symmetric, free generating set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    inverse: Vec<Letter>,
    // (generator index, +1 or -1) per letter
    generator: Vec<(usize, i64)>,
    generators: Vec<String>,
}

impl Alphabet {
    /// The default alphabet `a < A < b < B < ...` of the given rank.
    pub fn with_rank(rank: usize) -> Result<Self, WordError> {
        if rank == 0 || rank > 26 {
            return Err(WordError::InvalidAlphabet(format!(
                "rank must be between 1 and 26, got {rank}"
            )));
        }
        let order: String = (0..rank)
            .flat_map(|i| {
                let c = (b'a' + i as u8) as char;
                [c, c.to_ascii_uppercase()]
            })
            .collect();
        Self::from_order(&order)
    }

    /// An alphabet from an explicit symbol order such as `"aAbB"` or `"abAB"`.
    /// Lowercase letters are generators, the matching uppercase letters their inverses.
    pub fn from_order(order: &str) -> Result<Self, WordError> {
        let chars: Vec<char> = order.chars().collect();
        if chars.is_empty() {
            return Err(WordError::InvalidAlphabet("empty symbol order".into()));
        }
        let mut generators = Vec::new();
        for &c in &chars {
            if !c.is_ascii_alphabetic() {
                return Err(WordError::InvalidAlphabet(format!("symbol {c:?} is not an ASCII letter")));
            }
            if chars.iter().filter(|&&d| d == c).count() > 1 {
                return Err(WordError::InvalidAlphabet(format!("symbol {c:?} repeated")));
            }
            let partner = if c.is_ascii_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() };
            if !chars.contains(&partner) {
                return Err(WordError::InvalidAlphabet(format!("symbol {c:?} has no inverse {partner:?}")));
            }
            if c.is_ascii_lowercase() {
                generators.push(c.to_string());
            }
        }
        let position = |c: char| chars.iter().position(|&d| d == c).unwrap();
        let names = chars.iter().map(|c| c.to_string()).collect();
        let inverse = chars
            .iter()
            .map(|&c| {
                let partner = if c.is_ascii_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() };
                Letter(position(partner) as u32)
            })
            .collect();
        let generator = chars
            .iter()
            .map(|&c| {
                let lower = c.to_ascii_lowercase().to_string();
                let index = generators.iter().position(|g| *g == lower).unwrap();
                (index, if c.is_ascii_lowercase() { 1 } else { -1 })
            })
            .collect();
        Ok(Alphabet { names, inverse, generator, generators })
    }

    /// Generators named `{prefix}1, {PREFIX}1, {prefix}2, ...` in that order.
    /// Used for free bases of subgroups, whose rank may exceed 26.
    pub fn indexed(rank: usize, prefix: char) -> Result<Self, WordError> {
        if rank == 0 {
            return Err(WordError::InvalidAlphabet("rank must be positive".into()));
        }
        let lower = prefix.to_ascii_lowercase();
        let upper = prefix.to_ascii_uppercase();
        let mut names = Vec::with_capacity(2 * rank);
        let mut inverse = Vec::with_capacity(2 * rank);
        let mut generator = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            names.push(format!("{lower}{}", i + 1));
            names.push(format!("{upper}{}", i + 1));
            inverse.push(Letter(2 * i as u32 + 1));
            inverse.push(Letter(2 * i as u32));
            generator.push((i, 1));
            generator.push((i, -1));
        }
        let generators = (0..rank).map(|i| format!("{lower}{}", i + 1)).collect();
        Ok(Alphabet { names, inverse, generator, generators })
    }

    /// Parses `--alphabet` values: a rank (`"3"`) or a symbol order (`"aAbB"`).
    pub fn parse_arg(arg: &str) -> Result<Self, WordError> {
        let arg = arg.trim();
        match arg.parse::<usize>() {
            Ok(rank) => Self::with_rank(rank),
            Err(_) => Self::from_order(arg),
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.names.len() as u32).map(Letter)
    }

    pub fn inverse(&self, letter: Letter) -> Letter {
        self.inverse[letter.rank()]
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter.rank()]
    }

    /// Generator index and exponent sign of a letter.
    pub fn generator_of(&self, letter: Letter) -> (usize, i64) {
        self.generator[letter.rank()]
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generators
    }

    /// The letter for generator `index` raised to +1.
    pub fn generator_letter(&self, index: usize) -> Letter {
        let pos = self.generator.iter().position(|&(g, s)| g == index && s == 1).expect("generator index in range");
        Letter(pos as u32)
    }

    pub fn letter_named(&self, name: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == name).map(|i| Letter(i as u32))
    }

    /// Parses and freely reduces a word. `""` and `"1"` denote the identity.
    /// Whitespace and `.` are ignored between symbols.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        let text = text.trim();
        if text == "1" {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(text.len());
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < text.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() || c == b'.' {
                i += 1;
                continue;
            }
            // longest match so that "x12" is not read as "x1" "2"
            let rest = &text[i..];
            let found = self
                .names
                .iter()
                .enumerate()
                .filter(|(_, n)| rest.starts_with(n.as_str()))
                .max_by_key(|(_, n)| n.len());
            match found {
                Some((k, n)) => {
                    letters.push(Letter(k as u32));
                    i += n.len();
                }
                None => {
                    let symbol = rest.chars().next().unwrap().to_string();
                    return Err(WordError::UnknownSymbol { symbol, position: i });
                }
            }
        }
        Ok(self.reduce(letters))
    }

    /// Renders a word, with `1` for the identity.
    pub fn format(&self, word: &Word) -> String {
        if word.is_empty() {
            return "1".to_string();
        }
        word.iter().map(|&l| self.name(l)).collect()
    }

    pub fn display<'a>(&'a self, word: &'a Word) -> DisplayWord<'a> {
        DisplayWord { alphabet: self, word }
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce(&self, letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&self.inverse(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word(stack)
    }

    pub fn invert(&self, word: &Word) -> Word {
        Word(word.iter().rev().map(|&l| self.inverse(l)).collect())
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        self.reduce(u.iter().chain(v.iter()).copied())
    }

    pub fn conjugate(&self, g: &Word, by: &Word) -> Word {
        self.reduce(by.iter().chain(g.iter()).chain(self.invert(by).iter()).copied())
    }

    /// `g^n` for any integer `n`. Uses the cyclic form so the result is
    /// reduced by plain concatenation.
    pub fn power(&self, g: &Word, n: i64) -> Word {
        if n == 0 || g.is_empty() {
            return Word::identity();
        }
        let base = if n < 0 { self.invert(g) } else { g.clone() };
        let form = cyclic_reduce(self, &base);
        let reps = n.unsigned_abs() as usize;
        let mut letters = Vec::with_capacity(2 * form.conjugator.len() + reps * form.core.len());
        letters.extend_from_slice(&form.conjugator);
        for _ in 0..reps {
            letters.extend_from_slice(&form.core);
        }
        letters.extend(self.invert(&form.conjugator).iter().copied());
        Word(letters)
    }

    pub fn is_reduced(&self, letters: &[Letter]) -> bool {
        letters.windows(2).all(|p| p[1] != self.inverse(p[0]))
    }

    pub fn is_cyclically_reduced(&self, word: &Word) -> bool {
        match (word.first(), word.last()) {
            (Some(&f), Some(&l)) => word.len() == 1 || l != self.inverse(f),
            _ => true,
        }
    }

    /// A uniformly random reduced word of exactly `len` letters.
    pub fn random_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        let n = self.names.len() as u32;
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        while letters.len() < len {
            let l = Letter(rng.gen_range(0..n));
            if letters.last().is_none_or(|&p| self.inverse(p) != l) {
                letters.push(l);
            }
        }
        Word(letters)
    }

    /// A random cyclically reduced word of exactly `len` letters.
    pub fn random_cyclic_word<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Word {
        loop {
            let w = self.random_word(len, rng);
            if self.is_cyclically_reduced(&w) {
                return w;
            }
        }
    }
}

pub struct DisplayWord<'a> {
    alphabet: &'a Alphabet,
    word: &'a Word,
}

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.alphabet.format(self.word))
    }
}

/// A freely reduced word. Only an [`Alphabet`] can build one from raw letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub(crate) Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Rotation starting at `offset`. The caller is responsible for the
    /// word being cyclically reduced if the result must be reduced.
    pub fn rotated(&self, offset: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len());
        v.extend_from_slice(&self.0[offset..]);
        v.extend_from_slice(&self.0[..offset]);
        Word(v)
    }
}

impl std::ops::Deref for Word {
    type Target = [Letter];

    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

/// `conjugator · core · conjugator⁻¹` with a cyclically reduced core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicForm {
    pub core: Word,
    pub conjugator: Word,
}

pub fn free_reduce(alphabet: &Alphabet, raw: &str) -> Result<Word, WordError> {
    alphabet.parse_word(raw)
}

pub fn cyclic_reduce(alphabet: &Alphabet, g: &Word) -> CyclicForm {
    let n = g.len();
    let mut k = 0;
    while 2 * k + 1 < n && g[n - 1 - k] == alphabet.inverse(g[k]) {
        k += 1;
    }
    CyclicForm {
        core: Word(g[k..n - k].to_vec()),
        conjugator: Word(g[..k].to_vec()),
    }
}

/// Conjugacy length `|g|_C`.
pub fn conjugacy_length(alphabet: &Alphabet, g: &Word) -> usize {
    cyclic_reduce(alphabet, g).core.len()
}

/// Knuth–Morris–Pratt failure function: `fail[i]` is the length of the
/// longest proper border of `s[..i]`.
pub(crate) fn failure_function<T: PartialEq>(s: &[T]) -> Vec<usize> {
    let mut fail = vec![0; s.len() + 1];
    let mut k = 0;
    for i in 1..s.len() {
        while k > 0 && s[i] != s[k] {
            k = fail[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    fail
}

/// Smallest `p` dividing `s.len()` with `s` a power of `s[..p]`.
pub(crate) fn rotational_period<T: PartialEq>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let p = n - failure_function(s)[n];
    if n.is_multiple_of(p) {
        p
    } else {
        n
    }
}

/// Offset of the lexicographically least rotation (Booth).
pub(crate) fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let at = |i: usize| &s[i % n];
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = at(j);
        let mut i = f[j - k - 1];
        while i != -1 && sj != at(k + i as usize + 1) {
            if sj < at(k + i as usize + 1) {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if sj != at(k + (i + 1) as usize) {
            // i == -1 here
            if sj < at(k) {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k % n
}

/// Primitive root and exponent: `g` is conjugate to `root^exponent` with
/// `root` cyclically reduced and indivisible.
pub fn primitive_decompose(alphabet: &Alphabet, g: &Word) -> Result<(Word, usize), WordError> {
    let core = cyclic_reduce(alphabet, g).core;
    if core.is_empty() {
        return Err(WordError::Identity);
    }
    let p = rotational_period(&core);
    Ok((Word(core[..p].to_vec()), core.len() / p))
}

/// Cyclically reduced, indivisible and least among its rotations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EffectiveWord(Word);

impl EffectiveWord {
    pub fn new(alphabet: &Alphabet, word: Word) -> Result<Self, WordError> {
        if is_effective(alphabet, &word) {
            Ok(EffectiveWord(word))
        } else {
            Err(WordError::NotEffective(alphabet.format(&word)))
        }
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn into_word(self) -> Word {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Ordered by the well order: length first, then lexicographically.
impl Ord for EffectiveWord {
    fn cmp(&self, other: &Self) -> Ordering {
        well_order_compare(&self.0, &other.0)
    }
}

impl PartialOrd for EffectiveWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn is_effective(alphabet: &Alphabet, w: &Word) -> bool {
    !w.is_empty()
        && alphabet.is_reduced(w)
        && alphabet.is_cyclically_reduced(w)
        && is_lyndon(w)
}

/// Strictly smaller than every proper rotation, i.e. aperiodic and least.
pub(crate) fn is_lyndon<T: Ord>(s: &[T]) -> bool {
    let n = s.len();
    if n == 0 {
        return false;
    }
    // Duval: s is Lyndon iff the first Lyndon factor spans all of s.
    let (mut i, mut j) = (0, 1);
    while j < n {
        match s[i].cmp(&s[j]) {
            Ordering::Less => {
                i = 0;
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
            Ordering::Greater => return false,
        }
    }
    i == 0
}

/// The effective representative of an indivisible element.
pub fn effective_rep(alphabet: &Alphabet, g: &Word) -> Result<EffectiveWord, WordError> {
    let (root, exponent) = primitive_decompose(alphabet, g)?;
    if exponent > 1 {
        return Err(WordError::Divisible { root: alphabet.format(&root), exponent });
    }
    Ok(EffectiveWord(root.rotated(least_rotation(&root))))
}

/// Effective representative of the primitive root of `g`, with the exponent.
pub fn effective_root(alphabet: &Alphabet, g: &Word) -> Result<(EffectiveWord, usize), WordError> {
    let (root, exponent) = primitive_decompose(alphabet, g)?;
    Ok((EffectiveWord(root.rotated(least_rotation(&root))), exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn signum(self) -> i64 {
        match self {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }
}

/// Maps an effective word to the basis representative of `{w, w⁻¹}` up to
/// conjugacy: the well-order-smaller of `w` and the effective
/// representative of `w⁻¹`.
pub fn orient(alphabet: &Alphabet, w: &EffectiveWord) -> (EffectiveWord, Orientation) {
    let other = effective_rep(alphabet, &alphabet.invert(&w.0))
        .expect("inverse of an indivisible word is indivisible");
    assert_ne!(
        other, *w,
        "{} is conjugate to its own inverse, impossible in a free group",
        alphabet.format(&w.0)
    );
    if *w < other {
        (w.clone(), Orientation::Positive)
    } else {
        (other, Orientation::Negative)
    }
}

/// Shorter first; equal lengths compare lexicographically.
pub fn well_order_compare(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn are_conjugate(alphabet: &Alphabet, g: &Word, h: &Word) -> bool {
    let cg = cyclic_reduce(alphabet, g).core;
    let ch = cyclic_reduce(alphabet, h).core;
    cg.len() == ch.len() && cg.rotated(least_rotation(&cg)) == ch.rotated(least_rotation(&ch))
}

/// Signed letter counts per generator.
pub fn abelianize(alphabet: &Alphabet, g: &Word) -> Vec<i64> {
    let mut v = vec![0; alphabet.rank()];
    for &l in g.iter() {
        let (gen, sign) = alphabet.generator_of(l);
        v[gen] += sign;
    }
    v
}
