//! Delayed mass-action networks and their text format.
//!
//! ```text
//! # comment
//! species X1 X2 X3
//! subnet trio {
//!   X2 + X1 <-> 2 X1 [k=1,1, tau=0.1,0.1]
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: rate constant must be positive (got {value})")]
    NonPositiveRate { line: usize, value: f64 },
    #[error("line {line}: delay must be nonnegative (got {value})")]
    NegativeDelay { line: usize, value: f64 },
    #[error("line {line}: species {name} declared more than once")]
    DuplicateSpeciesDecl { line: usize, name: String },
    #[error("network has no reactions")]
    EmptyNetwork,
    #[error("network has no subnetwork partition")]
    NoPartition,
    #[error("block {block} out of range ({count} blocks)")]
    BlockOutOfRange { block: usize, count: usize },
    #[error("unknown species {0}")]
    UnknownSpecies(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Species {
    pub index: usize,
    pub name: String,
}

/// Sparse nonnegative integer combination of species. The empty map is the
/// zero complex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex {
    coeffs: BTreeMap<usize, u32>,
}

impl Complex {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (usize, u32)>>(terms: I) -> Self {
        let mut c = Self::zero();
        for (s, k) in terms {
            c.add(s, k);
        }
        c
    }

    pub fn add(&mut self, species: usize, coeff: u32) {
        if coeff > 0 {
            *self.coeffs.entry(species).or_insert(0) += coeff;
        }
    }

    pub fn coeff(&self, species: usize) -> u32 {
        self.coeffs.get(&species).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.coeffs.iter().map(|(&s, &k)| (s, k))
    }

    pub fn support(&self) -> SpeciesSet {
        SpeciesSet::from_iter(self.coeffs.keys().copied())
    }

    /// Bitmask of the support; only valid for species indices below 64.
    pub fn support_mask(&self) -> u64 {
        self.coeffs.keys().fold(0u64, |m, &s| m | (1u64 << s))
    }

    /// Keeps only the coefficients of species in `keep`.
    pub fn project(&self, keep: &SpeciesSet) -> Complex {
        Complex {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(s, _)| keep.contains(**s))
                .map(|(&s, &k)| (s, k))
                .collect(),
        }
    }

    /// Mass-action monomial `x^y`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.terms().map(|(s, k)| x[s].powi(k as i32)).product()
    }

    pub fn dense(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for (s, k) in self.terms() {
            v[s] = k as i64;
        }
        v
    }

    pub fn display<'a>(&'a self, names: &'a [Species]) -> ComplexDisplay<'a> {
        ComplexDisplay {
            complex: self,
            names,
        }
    }
}

pub struct ComplexDisplay<'a> {
    complex: &'a Complex,
    names: &'a [Species],
}

impl fmt::Display for ComplexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complex.is_zero() {
            return write!(f, "0");
        }
        for (i, (s, k)) in self.complex.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if k > 1 {
                write!(f, "{k} ")?;
            }
            write!(f, "{}", self.names[s].name)?;
        }
        Ok(())
    }
}

/// Set of species indices, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeciesSet(BTreeSet<usize>);

impl SpeciesSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|i| mask >> i & 1 == 1).collect())
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |m, &i| m | (1u64 << i))
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(&s)
    }

    pub fn insert(&mut self, s: usize) -> bool {
        self.0.insert(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.iter().copied().collect()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(self.0.intersection(&other.0).copied().collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Complement within `0..n`.
    pub fn complement(&self, n: usize) -> Self {
        Self((0..n).filter(|i| !self.0.contains(i)).collect())
    }

    pub fn names(&self, net: &ReactionNetwork) -> Vec<String> {
        self.iter().map(|i| net.species()[i].name.clone()).collect()
    }
}

impl FromIterator<usize> for SpeciesSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub reactant: Complex,
    pub product: Complex,
    pub rate_k: f64,
    pub delay_tau: f64,
}

impl Reaction {
    pub fn new(reactant: Complex, product: Complex, rate_k: f64, delay_tau: f64) -> Self {
        Self {
            reactant,
            product,
            rate_k,
            delay_tau,
        }
    }

    /// Net change vector `y' - y`.
    pub fn vector(&self, n: usize) -> Vec<i64> {
        let mut v = self.product.dense(n);
        for (s, k) in self.reactant.terms() {
            v[s] -= k as i64;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    partition: Option<Vec<Vec<usize>>>,
    block_names: Vec<String>,
}

impl ReactionNetwork {
    /// Assembles a network without checking invariants; see [`validate_network`].
    pub fn from_parts(
        species_names: Vec<String>,
        reactions: Vec<Reaction>,
        partition: Option<Vec<Vec<usize>>>,
    ) -> Self {
        let species = species_names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Species { index, name })
            .collect();
        let block_names = partition
            .as_ref()
            .map(|p| (0..p.len()).map(|i| format!("block{i}")).collect())
            .unwrap_or_default();
        Self {
            species,
            reactions,
            partition,
            block_names,
        }
    }

    pub fn with_block_names(mut self, names: Vec<String>) -> Self {
        self.block_names = names;
        self
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn partition(&self) -> Option<&[Vec<usize>]> {
        self.partition.as_deref()
    }

    pub fn block_names(&self) -> &[String] {
        &self.block_names
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    /// Resolves a list of species names.
    pub fn species_set(&self, names: &[&str]) -> Result<SpeciesSet, NetError> {
        names
            .iter()
            .map(|n| {
                self.species_index(n.trim())
                    .ok_or_else(|| NetError::UnknownSpecies(n.trim().to_string()))
            })
            .collect()
    }

    pub fn all_species(&self) -> SpeciesSet {
        SpeciesSet::full(self.n_species())
    }

    /// Returns the explicit partition or a single block holding every reaction.
    pub fn blocks_or_single(&self) -> Vec<Vec<usize>> {
        match &self.partition {
            Some(p) => p.clone(),
            None => vec![(0..self.reactions.len()).collect()],
        }
    }

    /// Same network with delays replaced.
    pub fn with_delays(&self, delays: &[f64]) -> Self {
        assert_eq!(delays.len(), self.reactions.len());
        let mut out = self.clone();
        for (r, &t) in out.reactions.iter_mut().zip(delays) {
            r.delay_tau = t;
        }
        out
    }

    /// Same network with rate constants replaced.
    pub fn with_rates(&self, rates: &[f64]) -> Self {
        assert_eq!(rates.len(), self.reactions.len());
        let mut out = self.clone();
        for (r, &k) in out.reactions.iter_mut().zip(rates) {
            r.rate_k = k;
        }
        out
    }

    /// Sub-network made of the given reactions; species indexing is unchanged.
    pub fn subnetwork(&self, reactions: &[usize]) -> Self {
        Self {
            species: self.species.clone(),
            reactions: reactions.iter().map(|&i| self.reactions[i].clone()).collect(),
            partition: None,
            block_names: Vec::new(),
        }
    }

    pub fn reaction_label(&self, i: usize) -> String {
        let r = &self.reactions[i];
        format!(
            "{} -> {}",
            r.reactant.display(&self.species),
            r.product.display(&self.species)
        )
    }
}

/// Union of reactant and product supports over block `p`.
pub fn species_of_block(net: &ReactionNetwork, p: usize) -> Result<SpeciesSet, NetError> {
    let blocks = net.partition().ok_or(NetError::NoPartition)?;
    let block = blocks.get(p).ok_or(NetError::BlockOutOfRange {
        block: p,
        count: blocks.len(),
    })?;
    Ok(reactions_species(net, block))
}

pub(crate) fn reactions_species(net: &ReactionNetwork, reactions: &[usize]) -> SpeciesSet {
    let mut set = SpeciesSet::new();
    for &i in reactions {
        let r = &net.reactions()[i];
        for (s, _) in r.reactant.terms().chain(r.product.terms()) {
            set.insert(s);
        }
    }
    set
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub invariant: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Lists every violated network invariant. Empty means well formed.
pub fn validate_network(net: &ReactionNetwork) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |invariant: &'static str, message: String| {
        out.push(Diagnostic { invariant, message })
    };
    let n = net.n_species();

    if net.reactions().is_empty() {
        diag("nonempty", "network has no reactions".into());
    }
    let mut seen = BTreeSet::new();
    for s in net.species() {
        if !valid_name(&s.name) {
            diag("species-name", format!("species name {:?} is not an identifier", s.name));
        }
        if !seen.insert(s.name.as_str()) {
            diag("species-unique", format!("species {} declared twice", s.name));
        }
    }
    for (idx, s) in net.species().iter().enumerate() {
        if s.index != idx {
            diag("species-index", format!("species {} has index {} at position {idx}", s.name, s.index));
        }
    }

    let mut used = vec![false; n];
    for (i, r) in net.reactions().iter().enumerate() {
        if !(r.rate_k > 0.0 && r.rate_k.is_finite()) {
            diag("rate-positive", format!("reaction {i} has non-positive rate {}", r.rate_k));
        }
        if !(r.delay_tau >= 0.0 && r.delay_tau.is_finite()) {
            diag("delay-nonnegative", format!("reaction {i} has invalid delay {}", r.delay_tau));
        }
        if r.reactant == r.product {
            diag("no-self-loop", format!("reaction {i} has identical reactant and product"));
        }
        for (s, _) in r.reactant.terms().chain(r.product.terms()) {
            if s >= n {
                diag("species-range", format!("reaction {i} references species index {s}"));
            } else {
                used[s] = true;
            }
        }
    }
    for (s, u) in used.iter().enumerate() {
        if !u {
            diag("species-used", format!("species {} unused", net.species()[s].name));
        }
    }

    if let Some(blocks) = net.partition() {
        let mut owner: Vec<Option<usize>> = vec![None; net.n_reactions()];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                diag("partition-nonempty", format!("partition block {b} is empty"));
            }
            for &i in block {
                if i >= net.n_reactions() {
                    diag("partition-range", format!("partition block {b} references reaction {i}"));
                    continue;
                }
                if owner[i].is_some() {
                    diag("partition-disjoint", format!("partition blocks overlap at reaction {i}"));
                } else {
                    owner[i] = Some(b);
                }
            }
        }
        for (i, o) in owner.iter().enumerate() {
            if o.is_none() {
                diag("partition-cover", format!("reaction {i} not covered by partition"));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing

struct Parser {
    species: Vec<String>,
    declared: bool,
    reactions: Vec<Reaction>,
    blocks: Vec<(String, Vec<usize>)>,
    open_block: Option<usize>,
    top_level_line: Option<usize>,
}

impl Parser {
    fn species_id(&mut self, name: &str, line: usize) -> Result<usize, NetError> {
        if let Some(i) = self.species.iter().position(|s| s == name) {
            return Ok(i);
        }
        if self.declared {
            return Err(NetError::Parse {
                line,
                msg: format!("species {name} not declared in species directive"),
            });
        }
        if !valid_name(name) {
            return Err(NetError::Parse {
                line,
                msg: format!("invalid species name {name:?}"),
            });
        }
        self.species.push(name.to_string());
        Ok(self.species.len() - 1)
    }

    fn parse_complex(&mut self, text: &str, line: usize) -> Result<Complex, NetError> {
        let text = text.trim();
        if text == "0" {
            return Ok(Complex::zero());
        }
        if text.is_empty() {
            return Err(NetError::Parse {
                line,
                msg: "empty complex (write 0 for the zero complex)".into(),
            });
        }
        let mut c = Complex::zero();
        for term in text.split('+') {
            let term = term.trim();
            let digits: String = term.chars().take_while(|c| c.is_ascii_digit()).collect();
            let name = term[digits.len()..].trim();
            let coeff = if digits.is_empty() {
                1
            } else {
                digits.parse::<u32>().map_err(|_| NetError::Parse {
                    line,
                    msg: format!("bad coefficient in {term:?}"),
                })?
            };
            if coeff == 0 {
                return Err(NetError::Parse {
                    line,
                    msg: format!("coefficient must be at least 1 in {term:?}"),
                });
            }
            if name.is_empty() || !valid_name(name) {
                return Err(NetError::Parse {
                    line,
                    msg: format!("bad term {term:?}"),
                });
            }
            let s = self.species_id(name, line)?;
            c.add(s, coeff);
        }
        Ok(c)
    }

    fn parse_reaction(&mut self, text: &str, line: usize) -> Result<(), NetError> {
        let perr = |msg: String| NetError::Parse { line, msg };
        let open = text.find('[').ok_or_else(|| perr("missing [k=..., tau=...] attributes".into()))?;
        let close = text.rfind(']').ok_or_else(|| perr("unterminated attribute list".into()))?;
        if close < open || !text[close + 1..].trim().is_empty() {
            return Err(perr("malformed attribute list".into()));
        }
        let body = &text[..open];
        let attrs = parse_attrs(&text[open + 1..close], line)?;

        let (lhs, rhs, reversible) = if let Some((l, r)) = body.split_once("<->") {
            (l, r, true)
        } else if let Some((l, r)) = body.split_once("->") {
            (l, r, false)
        } else {
            return Err(perr("expected -> or <->".into()));
        };
        if rhs.contains("->") {
            return Err(perr("more than one arrow".into()));
        }
        let reactant = self.parse_complex(lhs, line)?;
        let product = self.parse_complex(rhs, line)?;
        if reactant == product {
            return Err(perr("reactant and product are identical".into()));
        }

        let want = if reversible { 2 } else { 1 };
        let rates = attrs.get("k").ok_or_else(|| perr("missing rate k".into()))?;
        if rates.len() != want {
            return Err(perr(format!("expected {want} rate value(s), got {}", rates.len())));
        }
        let delays = match attrs.get("tau") {
            Some(d) => d.clone(),
            None => vec![0.0; want],
        };
        if delays.len() != want {
            return Err(perr(format!("expected {want} delay value(s), got {}", delays.len())));
        }
        if let Some(key) = attrs.keys().find(|k| *k != "k" && *k != "tau") {
            return Err(perr(format!("unknown attribute {key}")));
        }
        for &k in rates {
            if k.is_nan() || k <= 0.0 {
                return Err(NetError::NonPositiveRate { line, value: k });
            }
        }
        for &t in &delays {
            if t < 0.0 {
                return Err(NetError::NegativeDelay { line, value: t });
            }
        }

        let mut push = |r: Reaction| {
            self.reactions.push(r);
            let idx = self.reactions.len() - 1;
            match self.open_block {
                Some(b) => self.blocks[b].1.push(idx),
                None => {
                    self.top_level_line.get_or_insert(line);
                }
            }
        };
        push(Reaction::new(reactant.clone(), product.clone(), rates[0], delays[0]));
        if reversible {
            push(Reaction::new(product, reactant, rates[1], delays[1]));
        }
        Ok(())
    }
}

fn parse_attrs(text: &str, line: usize) -> Result<BTreeMap<String, Vec<f64>>, NetError> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for piece in text.split(',') {
        let piece = piece.trim();
        let value = if let Some((key, value)) = piece.split_once('=') {
            let key = key.trim().to_string();
            if out.contains_key(&key) {
                return Err(NetError::Parse {
                    line,
                    msg: format!("attribute {key} given twice"),
                });
            }
            out.insert(key.clone(), Vec::new());
            current = Some(key);
            value
        } else {
            piece
        };
        let key = current.as_ref().ok_or_else(|| NetError::Parse {
            line,
            msg: "attribute value without a key".into(),
        })?;
        let v: f64 = value.trim().parse().map_err(|_| NetError::Parse {
            line,
            msg: format!("bad number {:?}", value.trim()),
        })?;
        if !v.is_finite() {
            return Err(NetError::Parse {
                line,
                msg: format!("non-finite number {v}"),
            });
        }
        out.get_mut(key).expect("key inserted").push(v);
    }
    Ok(out)
}

/// Parses the line-oriented network format.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, NetError> {
    let mut p = Parser {
        species: Vec::new(),
        declared: false,
        reactions: Vec::new(),
        blocks: Vec::new(),
        open_block: None,
        top_level_line: None,
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut rest = raw.split('#').next().unwrap_or("").trim();
        while !rest.is_empty() {
            if let Some(after) = strip_keyword(rest, "species") {
                if p.declared {
                    return Err(NetError::Parse {
                        line,
                        msg: "species directive given twice".into(),
                    });
                }
                if !p.species.is_empty() {
                    return Err(NetError::Parse {
                        line,
                        msg: "species directive must precede reactions".into(),
                    });
                }
                for name in after.split_whitespace() {
                    if !valid_name(name) {
                        return Err(NetError::Parse {
                            line,
                            msg: format!("invalid species name {name:?}"),
                        });
                    }
                    if p.species.iter().any(|s| s == name) {
                        return Err(NetError::DuplicateSpeciesDecl {
                            line,
                            name: name.to_string(),
                        });
                    }
                    p.species.push(name.to_string());
                }
                p.declared = true;
                rest = "";
            } else if let Some(after) = strip_keyword(rest, "subnet") {
                if p.open_block.is_some() {
                    return Err(NetError::Parse {
                        line,
                        msg: "nested subnet blocks are not allowed".into(),
                    });
                }
                let (name, tail) = after.split_once('{').ok_or_else(|| NetError::Parse {
                    line,
                    msg: "expected `subnet NAME {`".into(),
                })?;
                let name = name.trim();
                if !valid_name(name) {
                    return Err(NetError::Parse {
                        line,
                        msg: format!("invalid subnet name {name:?}"),
                    });
                }
                if p.blocks.iter().any(|(b, _)| b == name) {
                    return Err(NetError::Parse {
                        line,
                        msg: format!("subnet {name} defined twice"),
                    });
                }
                p.blocks.push((name.to_string(), Vec::new()));
                p.open_block = Some(p.blocks.len() - 1);
                rest = tail.trim();
            } else if let Some(pos) = rest.find('}') {
                let (head, tail) = rest.split_at(pos);
                if !head.trim().is_empty() {
                    p.parse_reaction(head.trim(), line)?;
                }
                if p.open_block.take().is_none() {
                    return Err(NetError::Parse {
                        line,
                        msg: "unmatched }".into(),
                    });
                }
                rest = tail[1..].trim();
            } else if rest.contains('{') {
                return Err(NetError::Parse {
                    line,
                    msg: "unexpected {".into(),
                });
            } else {
                p.parse_reaction(rest, line)?;
                rest = "";
            }
        }
    }

    if p.open_block.is_some() {
        return Err(NetError::Parse {
            line: text.lines().count(),
            msg: "unterminated subnet block".into(),
        });
    }
    if !p.blocks.is_empty() {
        if let Some(line) = p.top_level_line {
            return Err(NetError::Parse {
                line,
                msg: "reaction outside a subnet block while subnets are in use".into(),
            });
        }
    }
    if p.reactions.is_empty() {
        return Err(NetError::EmptyNetwork);
    }

    let (partition, names) = if p.blocks.is_empty() {
        (None, Vec::new())
    } else {
        let names = p.blocks.iter().map(|(n, _)| n.clone()).collect();
        (Some(p.blocks.into_iter().map(|(_, r)| r).collect()), names)
    };
    Ok(ReactionNetwork::from_parts(p.species, p.reactions, partition).with_block_names(names))
}

fn strip_keyword<'a>(text: &'a str, kw: &str) -> Option<&'a str> {
    let after = text.strip_prefix(kw)?;
    if after.is_empty() || after.starts_with(char::is_whitespace) || after.starts_with('{') {
        Some(after)
    } else {
        None
    }
}

/// Canonical text form: explicit species directive, one irreversible
/// reaction per line, shortest round-trip float formatting.
pub fn serialize_network(net: &ReactionNetwork) -> String {
    let mut out = String::new();
    let names: Vec<&str> = net.species().iter().map(|s| s.name.as_str()).collect();
    out.push_str(&format!("species {}\n", names.join(" ")));
    let line = |i: usize| {
        let r = &net.reactions()[i];
        format!(
            "{} -> {} [k={:?}, tau={:?}]",
            r.reactant.display(net.species()),
            r.product.display(net.species()),
            r.rate_k,
            r.delay_tau
        )
    };
    match net.partition() {
        None => {
            for i in 0..net.n_reactions() {
                out.push_str(&line(i));
                out.push('\n');
            }
        }
        Some(blocks) => {
            for (b, block) in blocks.iter().enumerate() {
                let name = net
                    .block_names()
                    .get(b)
                    .cloned()
                    .unwrap_or_else(|| format!("block{b}"));
                out.push_str(&format!("subnet {name} {{\n"));
                for &i in block {
                    out.push_str("  ");
                    out.push_str(&line(i));
                    out.push('\n');
                }
                out.push_str("}\n");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_reaction() {
        let net = parse_network("X1 -> X2 [k=1, tau=0.5]").unwrap();
        assert_eq!(net.n_reactions(), 1);
        assert_eq!(net.species()[0].name, "X1");
        assert_eq!(net.species()[1].name, "X2");
        assert_eq!(net.reactions()[0].rate_k, 1.0);
        assert_eq!(net.reactions()[0].delay_tau, 0.5);
        assert!(net.partition().is_none());
    }

    #[test]
    fn reversible_pair_from_text_example() {
        let text = "X2 + X1 <-> 2 X1 [k=1,1, tau=0.1,0.1]\nX3 + X1 <-> 2 X1 [k=1,1, tau=0.1,0.1]\n";
        let net = parse_network(text).unwrap();
        assert_eq!(net.n_reactions(), 4);
        assert_eq!(net.n_species(), 3);
        let r = net.reactions();
        assert_eq!(r[0].reactant, r[1].product);
        assert_eq!(r[0].product, r[1].reactant);
        let x1 = net.species_index("X1").unwrap();
        assert_eq!(r[0].product.coeff(x1), 2);
    }

    #[test]
    fn negative_rate_rejected() {
        assert!(matches!(
            parse_network("X1 -> X2 [k=-1, tau=0]"),
            Err(NetError::NonPositiveRate { line: 1, .. })
        ));
        assert!(matches!(
            parse_network("X1 -> X2 [k=0, tau=0]"),
            Err(NetError::NonPositiveRate { .. })
        ));
    }

    #[test]
    fn negative_delay_rejected() {
        assert!(matches!(
            parse_network("\nX1 -> X2 [k=1, tau=-0.5]"),
            Err(NetError::NegativeDelay { line: 2, .. })
        ));
    }

    #[test]
    fn duplicate_species_declaration() {
        assert!(matches!(
            parse_network("species A B A\nA -> B [k=1]"),
            Err(NetError::DuplicateSpeciesDecl { .. })
        ));
    }

    #[test]
    fn empty_network() {
        assert_eq!(parse_network("# nothing\n\n"), Err(NetError::EmptyNetwork));
        assert_eq!(parse_network("species A B\n"), Err(NetError::EmptyNetwork));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = parse_network("A -> B [k=1]\nA => B [k=1]").unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 2, .. }), "{err}");
        assert!(parse_network("A -> B").is_err());
        assert!(parse_network("A -> A [k=1]").is_err());
        assert!(parse_network("0A -> B [k=1]").is_err());
        assert!(parse_network("A -> B [k=1, rate=3]").is_err());
        assert!(parse_network("A <-> B [k=1]").is_err());
        assert!(parse_network("subnet s {\nA -> B [k=1]\n").is_err());
        assert!(parse_network("subnet s {\nA -> B [k=1]\n}\nB -> C [k=1]").is_err());
    }

    #[test]
    fn species_directive_fixes_order() {
        let net = parse_network("species X1 X2\nX2 -> X1 [k=1]").unwrap();
        assert_eq!(net.species_index("X1"), Some(0));
        assert!(parse_network("species X1\nX2 -> X1 [k=1]").is_err());
    }

    #[test]
    fn zero_complex_and_compact_terms() {
        let net = parse_network("0 -> X1 [k=2]\n2X1 -> 0 [k=1, tau=1]").unwrap();
        assert!(net.reactions()[0].reactant.is_zero());
        assert_eq!(net.reactions()[1].reactant.coeff(0), 2);
        assert_eq!(net.reactions()[0].delay_tau, 0.0);
    }

    #[test]
    fn subnet_blocks() {
        let text = "subnet a {\n X1 <-> X2 [k=1,1, tau=0,0]\n}\nsubnet b { X2 <-> X3 [k=1,1, tau=0,0] }\n";
        let net = parse_network(text).unwrap();
        assert_eq!(net.partition().unwrap(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(net.block_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn validate_reports_overlap_and_unused() {
        let mut net = parse_network("species X1 X2 X9\nX1 <-> X2 [k=1,1]").unwrap();
        let msgs: Vec<String> = validate_network(&net).iter().map(|d| d.to_string()).collect();
        assert_eq!(msgs, vec!["species X9 unused".to_string()]);

        net = ReactionNetwork::from_parts(
            vec!["X1".into(), "X2".into()],
            net.reactions().to_vec(),
            Some(vec![vec![0], vec![0, 1]]),
        );
        let msgs: Vec<String> = validate_network(&net).iter().map(|d| d.to_string()).collect();
        assert_eq!(msgs, vec!["partition blocks overlap at reaction 0".to_string()]);
    }

    #[test]
    fn block_species() {
        let text = "species X1 X2 X3\nsubnet a { X2 + X1 <-> 2 X1 [k=1,1] }\nsubnet b { X3 + X1 <-> 2 X1 [k=1,1] }";
        let net = parse_network(text).unwrap();
        assert_eq!(species_of_block(&net, 0).unwrap(), SpeciesSet::from_iter([0, 1]));
        assert_eq!(
            species_of_block(&net, 2),
            Err(NetError::BlockOutOfRange { block: 2, count: 2 })
        );
        let flat = parse_network("X1 -> X2 [k=1]").unwrap();
        assert_eq!(species_of_block(&flat, 0), Err(NetError::NoPartition));
    }

    #[test]
    fn serialize_round_trip() {
        let text = "species X1 X2 X3\nsubnet a { X2 + X1 <-> 2 X1 [k=0.1,3, tau=0.25,0] }\nsubnet b { X3 -> 0 [k=1e-3] \n 0 -> X3 [k=7] }";
        let net = parse_network(text).unwrap();
        let again = parse_network(&serialize_network(&net)).unwrap();
        assert_eq!(net, again);
    }
}
