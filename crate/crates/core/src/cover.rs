//! Finite-index subgroups of a free group given by coset tables.
//!
//! Cosets are right cosets `Hx` and words act on them from the right, one
//! letter at a time, left to right. Coset `0` is `H` itself. The Schreier
//! transversal is built breadth first in alphabet order, and the free
//! basis of `H` is numbered `x1, x2, …` in the order generator-major,
//! coset-minor.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{scl_lower_bound, BoundCertificate, Chain, SclBound};
use crate::rational::{format_rational, int, Rational};
use crate::words::{are_conjugate, Alphabet, Letter, Word, WordError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    MissingGenerator { generator: String },
    UnknownGenerator { generator: String },
    WrongLength { generator: String, expected: usize, found: usize },
    OutOfRange { generator: String, coset: usize, image: usize },
    NotPermutation { generator: String, image: usize, cosets: (usize, usize) },
    NotTransitive { reachable: usize, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "table has no cosets"),
            Violation::MissingGenerator { generator } => write!(f, "no column for generator {generator}"),
            Violation::UnknownGenerator { generator } => write!(f, "column {generator} is not a generator"),
            Violation::WrongLength { generator, expected, found } => {
                write!(f, "column {generator} has {found} entries, expected {expected}")
            }
            Violation::OutOfRange { generator, coset, image } => {
                write!(f, "column {generator} sends coset {coset} to {image}, out of range")
            }
            Violation::NotPermutation { generator, image, cosets: (c1, c2) } => {
                write!(f, "column {generator} is not a permutation: cosets {c1} and {c2} both go to {image}")
            }
            Violation::NotTransitive { reachable, index } => {
                write!(f, "not transitive: only {reachable} of {index} cosets reachable from coset 0")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("invalid coset table: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidTable(Vec<Violation>),
    #[error("malformed table line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot lift the identity")]
    TrivialElement,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Generator columns: `action[i][c]` is the coset `c · xᵢ`, with `xᵢ` the
/// `i`-th generator of the alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    pub action: Vec<Vec<usize>>,
}

impl CosetTable {
    pub fn new(action: Vec<Vec<usize>>) -> Self {
        CosetTable { action }
    }

    pub fn index(&self) -> usize {
        self.action.first().map_or(0, Vec::len)
    }

    /// The index-one table, `H = F`.
    pub fn trivial(alphabet: &Alphabet) -> Self {
        CosetTable { action: vec![vec![0]; alphabet.rank()] }
    }

    /// One line per generator, `a: 1 0`. Blank lines and `#` comments are skipped.
    pub fn parse_text(alphabet: &Alphabet, text: &str) -> Result<Self, CoverError> {
        let mut columns: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut unknown = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (name, images) = line.split_once(':').ok_or_else(|| CoverError::Syntax {
                line: n + 1,
                message: "expected `<generator>: <images>`".into(),
            })?;
            let images = images
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CoverError::Syntax { line: n + 1, message: e.to_string() })?;
            match alphabet.generator_names().iter().position(|g| g == name.trim()) {
                Some(i) => {
                    if columns.insert(i, images).is_some() {
                        return Err(CoverError::Syntax { line: n + 1, message: format!("{} repeated", name.trim()) });
                    }
                }
                None => unknown.push(Violation::UnknownGenerator { generator: name.trim().to_string() }),
            }
        }
        Self::from_columns(alphabet, columns, unknown)
    }

    /// `{"a": [1, 0], "b": [0, 1]}`.
    pub fn parse_json(alphabet: &Alphabet, text: &str) -> Result<Self, CoverError> {
        let raw: BTreeMap<String, Vec<usize>> =
            serde_json::from_str(text).map_err(|e| CoverError::Syntax { line: e.line(), message: e.to_string() })?;
        let mut columns = BTreeMap::new();
        let mut unknown = Vec::new();
        for (name, images) in raw {
            match alphabet.generator_names().iter().position(|g| *g == name) {
                Some(i) => {
                    columns.insert(i, images);
                }
                None => unknown.push(Violation::UnknownGenerator { generator: name }),
            }
        }
        Self::from_columns(alphabet, columns, unknown)
    }

    /// JSON when the text starts with `{`, otherwise the line format.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Self, CoverError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(alphabet, text)
        } else {
            Self::parse_text(alphabet, text)
        }
    }

    fn from_columns(
        alphabet: &Alphabet,
        mut columns: BTreeMap<usize, Vec<usize>>,
        mut violations: Vec<Violation>,
    ) -> Result<Self, CoverError> {
        let mut action = Vec::with_capacity(alphabet.rank());
        for (i, name) in alphabet.generator_names().iter().enumerate() {
            match columns.remove(&i) {
                Some(col) => action.push(col),
                None => violations.push(Violation::MissingGenerator { generator: name.clone() }),
            }
        }
        if violations.is_empty() {
            Ok(CosetTable { action })
        } else {
            Err(CoverError::InvalidTable(violations))
        }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (name, col) in alphabet.generator_names().iter().zip(&self.action) {
            let images: Vec<String> = col.iter().map(ToString::to_string).collect();
            out.push_str(&format!("{name}: {}\n", images.join(" ")));
        }
        out
    }

    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        let map: BTreeMap<&str, &Vec<usize>> =
            alphabet.generator_names().iter().map(String::as_str).zip(&self.action).collect();
        serde_json::to_value(map).expect("plain map")
    }
}

/// Checks that every column is a permutation of the cosets and that the
/// generated action is transitive.
pub fn validate_table(alphabet: &Alphabet, table: &CosetTable) -> Result<(), Vec<Violation>> {
    let d = table.index();
    let mut violations = Vec::new();
    if d == 0 {
        return Err(vec![Violation::Empty]);
    }
    let names = alphabet.generator_names();
    if table.action.len() != names.len() {
        for name in names.iter().skip(table.action.len()) {
            violations.push(Violation::MissingGenerator { generator: name.clone() });
        }
    }
    for (name, col) in names.iter().zip(&table.action) {
        if col.len() != d {
            violations.push(Violation::WrongLength { generator: name.clone(), expected: d, found: col.len() });
            continue;
        }
        let mut preimage: Vec<Option<usize>> = vec![None; d];
        for (c, &image) in col.iter().enumerate() {
            if image >= d {
                violations.push(Violation::OutOfRange { generator: name.clone(), coset: c, image });
            } else if let Some(prev) = preimage[image] {
                violations.push(Violation::NotPermutation { generator: name.clone(), image, cosets: (prev, c) });
            } else {
                preimage[image] = Some(c);
            }
        }
    }
    if !violations.is_empty() {
        return Err(violations);
    }
    let mut seen = vec![false; d];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(c) = queue.pop_front() {
        for col in &table.action {
            // columns are permutations of a finite set, so forward edges alone reach the orbit
            let next = col[c];
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
    }
    let reachable = seen.iter().filter(|&&s| s).count();
    if reachable < d {
        return Err(vec![Violation::NotTransitive { reachable, index: d }]);
    }
    Ok(())
}

/// A validated table with inverse columns, acting by letters.
#[derive(Debug, Clone)]
struct Action {
    forward: Vec<Vec<usize>>,
    backward: Vec<Vec<usize>>,
}

impl Action {
    fn new(alphabet: &Alphabet, table: &CosetTable) -> Result<Self, CoverError> {
        validate_table(alphabet, table).map_err(CoverError::InvalidTable)?;
        let backward = table
            .action
            .iter()
            .map(|col| {
                let mut inv = vec![0; col.len()];
                for (c, &image) in col.iter().enumerate() {
                    inv[image] = c;
                }
                inv
            })
            .collect();
        Ok(Action { forward: table.action.clone(), backward })
    }

    fn index(&self) -> usize {
        self.forward[0].len()
    }

    fn apply(&self, alphabet: &Alphabet, coset: usize, letter: Letter) -> usize {
        let (gen, sign) = alphabet.generator_of(letter);
        if sign > 0 {
            self.forward[gen][coset]
        } else {
            self.backward[gen][coset]
        }
    }

    fn apply_word(&self, alphabet: &Alphabet, coset: usize, word: &[Letter]) -> usize {
        word.iter().fold(coset, |c, &l| self.apply(alphabet, c, l))
    }
}

/// A nontrivial Schreier generator `rep(c) · x · rep(c·x)⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchreierGenerator {
    pub coset: usize,
    pub generator: usize,
    pub expression: Word,
}

#[derive(Debug, Clone)]
pub struct SchreierData {
    /// Prefix-closed transversal; `representatives[0]` is the identity.
    pub representatives: Vec<Word>,
    pub generators: Vec<SchreierGenerator>,
    /// `edges[i][c]`: the basis generator read along `c --xᵢ--> c·xᵢ`, if any.
    pub edges: Vec<Vec<Option<usize>>>,
    /// Alphabet for words over the free basis of `H`: `x1 < X1 < x2 < …`.
    pub subgroup: Alphabet,
    action: Action,
}

impl SchreierData {
    pub fn index(&self) -> usize {
        self.representatives.len()
    }

    /// Replaces each basis symbol by its expression in the ambient group.
    pub fn substitute(&self, alphabet: &Alphabet, h: &Word) -> Word {
        let letters = h.iter().flat_map(|&l| {
            let (k, sign) = self.subgroup.generator_of(l);
            let e = &self.generators[k].expression;
            if sign > 0 {
                e.to_vec()
            } else {
                alphabet.invert(e).to_vec()
            }
        });
        alphabet.reduce(letters.collect::<Vec<_>>())
    }

    /// Reidemeister–Schreier rewriting of a loop based at `start`.
    pub fn rewrite(&self, alphabet: &Alphabet, start: usize, word: &[Letter]) -> Word {
        let mut coset = start;
        let mut out = Vec::new();
        for &l in word {
            let (gen, sign) = alphabet.generator_of(l);
            if sign > 0 {
                if let Some(k) = self.edges[gen][coset] {
                    out.push(self.subgroup.generator_letter(k));
                }
                coset = self.action.forward[gen][coset];
            } else {
                let prev = self.action.backward[gen][coset];
                if let Some(k) = self.edges[gen][prev] {
                    out.push(self.subgroup.inverse(self.subgroup.generator_letter(k)));
                }
                coset = prev;
            }
        }
        self.subgroup.reduce(out)
    }
}

pub fn schreier_basis(alphabet: &Alphabet, table: &CosetTable) -> Result<SchreierData, CoverError> {
    let action = Action::new(alphabet, table)?;
    let d = action.index();

    let mut representatives: Vec<Option<Word>> = vec![None; d];
    representatives[0] = Some(Word::identity());
    let mut queue = VecDeque::from([0]);
    while let Some(c) = queue.pop_front() {
        for l in alphabet.letters() {
            let next = action.apply(alphabet, c, l);
            if representatives[next].is_none() {
                let mut rep = representatives[c].clone().unwrap();
                rep.0.push(l);
                representatives[next] = Some(rep);
                queue.push_back(next);
            }
        }
    }
    let representatives: Vec<Word> = representatives.into_iter().map(Option::unwrap).collect();

    let mut order: Vec<usize> = (0..alphabet.rank()).collect();
    order.sort_by_key(|&i| alphabet.generator_letter(i));
    let mut generators = Vec::new();
    let mut edges = vec![vec![None; d]; alphabet.rank()];
    for &i in &order {
        let x = alphabet.generator_letter(i);
        for c in 0..d {
            let target = action.forward[i][c];
            let expression = alphabet.reduce(
                representatives[c]
                    .iter()
                    .copied()
                    .chain([x])
                    .chain(alphabet.invert(&representatives[target]).iter().copied()),
            );
            if !expression.is_empty() {
                edges[i][c] = Some(generators.len());
                generators.push(SchreierGenerator { coset: c, generator: i, expression });
            }
        }
    }
    let subgroup = Alphabet::indexed(generators.len(), 'x')?;
    Ok(SchreierData { representatives, generators, edges, subgroup, action })
}

/// A closed lift of `g`: `element` is `g^degree` read from `start_coset`,
/// written over the basis of `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    pub element: Word,
    pub degree: usize,
    pub start_coset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftJson {
    pub element: String,
    pub ambient: String,
    pub degree: usize,
    pub start_coset: usize,
}

/// One lift per cycle of `g` acting on the cosets, ordered by the
/// smallest coset in each cycle.
pub fn lift_chain(alphabet: &Alphabet, data: &SchreierData, g: &Word) -> Result<Vec<Lift>, CoverError> {
    if g.is_empty() {
        return Err(CoverError::TrivialElement);
    }
    let d = data.index();
    let mut visited = vec![false; d];
    let mut lifts = Vec::new();
    for start in 0..d {
        if visited[start] {
            continue;
        }
        let mut degree = 0;
        let mut c = start;
        loop {
            visited[c] = true;
            degree += 1;
            c = data.action.apply_word(alphabet, c, g);
            if c == start {
                break;
            }
        }
        let power: Vec<Letter> = (0..degree).flat_map(|_| g.iter().copied()).collect();
        lifts.push(Lift { element: data.rewrite(alphabet, start, &power), degree, start_coset: start });
    }
    Ok(lifts)
}

pub fn lifts_to_json(alphabet: &Alphabet, data: &SchreierData, lifts: &[Lift]) -> Vec<LiftJson> {
    lifts
        .iter()
        .map(|l| LiftJson {
            element: data.subgroup.format(&l.element),
            ambient: alphabet.format(&data.substitute(alphabet, &l.element)),
            degree: l.degree,
            start_coset: l.start_coset,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverBound {
    NotABoundary,
    Zero,
    Bound {
        index: usize,
        /// Certificate for the lifted chain in `H`.
        certificate: BoundCertificate,
        /// `certificate.bound / index`
        bound: Rational,
    },
}

impl CoverBound {
    pub fn format(&self, data: &SchreierData) -> String {
        match self {
            CoverBound::NotABoundary => "not_a_boundary".into(),
            CoverBound::Zero => "zero".into(),
            CoverBound::Bound { index, certificate, bound } => format!(
                "bound {} index {} witness {} value {}",
                format_rational(bound),
                index,
                data.subgroup.format(certificate.witness.word()),
                format_rational(&certificate.value)
            ),
        }
    }

    pub fn to_json(&self, data: &SchreierData) -> serde_json::Value {
        match self {
            CoverBound::NotABoundary => serde_json::json!({ "result": "not_a_boundary" }),
            CoverBound::Zero => serde_json::json!({ "result": "zero" }),
            CoverBound::Bound { index, certificate, bound } => serde_json::json!({
                "result": "bound",
                "bound": format_rational(bound),
                "index": index,
                "subgroup_certificate": certificate.to_json(&data.subgroup),
            }),
        }
    }
}

/// `scl_F(g) = scl_H(Σ lifts) / [F:H]`, with the chain bound applied in `H`.
pub fn scl_via_cover(alphabet: &Alphabet, data: &SchreierData, g: &Word) -> Result<CoverBound, CoverError> {
    let lifts = lift_chain(alphabet, data, g)?;
    let chain = Chain::from_terms(lifts.into_iter().map(|l| (Rational::one(), l.element)))
        .expect("lifts of a nontrivial element are nontrivial");
    Ok(match scl_lower_bound(&data.subgroup, &chain) {
        SclBound::NotABoundary => CoverBound::NotABoundary,
        SclBound::Zero => CoverBound::Zero,
        SclBound::Bound(certificate) => {
            let index = data.index();
            let bound = &certificate.bound / int(index as i64);
            CoverBound::Bound { index, certificate, bound }
        }
    })
}

/// First pair `(i, j)`, `i ≤ j`, with `lifts[i]` conjugate to `lifts[j]⁻¹`.
pub fn power_conjugate_inverse(alphabet: &Alphabet, lifts: &[Word]) -> Option<(usize, usize)> {
    for i in 0..lifts.len() {
        for j in i..lifts.len() {
            if are_conjugate(alphabet, &lifts[i], &alphabet.invert(&lifts[j])) {
                return Some((i, j));
            }
        }
    }
    None
}
