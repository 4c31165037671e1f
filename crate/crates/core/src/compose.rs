//! Combined networks: per-block restrictions of semilocking sets, case
//! labels, and the persistence rule engine.

use rayon::prelude::*;
use thiserror::Error;

use crate::balance::{self, BalanceError, ComplexGraph};
use crate::linalg::{self, Rational};
use crate::network::{ReactionNetwork, SpeciesSet};
use crate::reduce;
use crate::siphon::{self, SemilockingReport, SiphonError};
use crate::stoich;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("network has no partition into blocks")]
    NoPartition,
    #[error("species set is empty")]
    EmptySet,
    #[error("species index {0} is not in the network")]
    UnknownSpecies(usize),
    #[error("set is not semilocking")]
    NotSemilocking,
    #[error("network has {n} species, enumeration cap is {max}")]
    TooLarge { n: usize, max: usize },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

impl From<SiphonError> for ComposeError {
    fn from(e: SiphonError) -> Self {
        match e {
            SiphonError::EmptySet => ComposeError::EmptySet,
            SiphonError::UnknownSpecies(s) => ComposeError::UnknownSpecies(s),
            SiphonError::TooLarge { n, max } => ComposeError::TooLarge { n, max },
            SiphonError::NotSemilocking => ComposeError::NotSemilocking,
        }
    }
}

impl From<stoich::StoichError> for ComposeError {
    fn from(e: stoich::StoichError) -> Self {
        match e {
            stoich::StoichError::UnknownSpecies(s) => ComposeError::UnknownSpecies(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub blocks: Vec<Vec<usize>>,
    pub block_names: Vec<String>,
    pub block_species: Vec<SpeciesSet>,
    /// Species appearing in at least two blocks.
    pub intersecting: SpeciesSet,
    pub block_dims: Vec<usize>,
    /// True when the network had no partition and was treated as one block.
    pub implicit: bool,
}

impl Decomposition {
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_label(&self, p: usize) -> String {
        match self.block_names.get(p) {
            Some(name) if !name.is_empty() => format!("block {p} ({name})"),
            _ => format!("block {p}"),
        }
    }
}

fn build_decomposition(net: &ReactionNetwork, blocks: Vec<Vec<usize>>, implicit: bool) -> Decomposition {
    let block_species: Vec<SpeciesSet> = (0..blocks.len())
        .map(|p| {
            blocks[p]
                .iter()
                .flat_map(|&i| {
                    let r = &net.reactions()[i];
                    r.reactant.terms().chain(r.product.terms()).map(|(s, _)| s).collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();
    let intersecting = (0..net.n_species())
        .filter(|&s| block_species.iter().filter(|b| b.contains(s)).count() >= 2)
        .collect();
    let block_dims = blocks
        .iter()
        .map(|b| {
            let m = stoich::block_matrix(net, b);
            if m.n_reactions() == 0 {
                0
            } else {
                m.to_rational().rank()
            }
        })
        .collect();
    let block_names = if implicit {
        Vec::new()
    } else {
        net.block_names().to_vec()
    };
    Decomposition {
        blocks,
        block_names,
        block_species,
        intersecting,
        block_dims,
        implicit,
    }
}

pub fn decompose(net: &ReactionNetwork) -> Result<Decomposition, ComposeError> {
    let blocks = net.partition().ok_or(ComposeError::NoPartition)?.to_vec();
    Ok(build_decomposition(net, blocks, false))
}

/// Uses the declared partition, or the whole network as a single block.
pub fn decompose_or_single(net: &ReactionNetwork) -> Decomposition {
    match net.partition() {
        Some(p) => build_decomposition(net, p.to_vec(), false),
        None => build_decomposition(net, vec![(0..net.n_reactions()).collect()], true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RestrictionClass {
    Empty,
    FacetType,
    VertexType,
    OtherType(usize),
}

impl RestrictionClass {
    pub fn label(&self) -> String {
        match self {
            RestrictionClass::Empty => "empty".into(),
            RestrictionClass::FacetType => "facet".into(),
            RestrictionClass::VertexType => "vertex".into(),
            RestrictionClass::OtherType(d) => format!("other({d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub block: usize,
    pub members: SpeciesSet,
    pub class: RestrictionClass,
    /// Face dimension inside the block; zero for an empty restriction.
    pub face_dim: usize,
    pub block_dim: usize,
}

impl Restriction {
    /// Face of codimension one in the block. In a one-dimensional block this
    /// holds for restrictions labelled vertex-type as well.
    pub fn facet_like(&self) -> bool {
        self.class != RestrictionClass::Empty && self.block_dim >= 1 && self.face_dim + 1 == self.block_dim
    }

    pub fn is_empty(&self) -> bool {
        self.class == RestrictionClass::Empty
    }
}

pub fn restrict_semilocking(
    net: &ReactionNetwork,
    dec: &Decomposition,
    w: &SpeciesSet,
    p: usize,
) -> Result<Restriction, ComposeError> {
    if p >= dec.n_blocks() {
        return Err(ComposeError::InternalInconsistency(format!(
            "block {p} out of range ({} blocks)",
            dec.n_blocks()
        )));
    }
    let members = w.intersection(&dec.block_species[p]);
    let block_dim = dec.block_dims[p];
    if members.is_empty() {
        return Ok(Restriction {
            block: p,
            members,
            class: RestrictionClass::Empty,
            face_dim: 0,
            block_dim,
        });
    }
    let sub = net.subnetwork(&dec.blocks[p]);
    if let Some(i) = siphon::violating_reaction(&sub, &members) {
        return Err(ComposeError::InternalInconsistency(format!(
            "restriction to {} is not semilocking there (reaction {})",
            dec.block_label(p),
            sub.reaction_label(i)
        )));
    }
    let face_dim = stoich::face_dimension(&sub, &members)?;
    let class = match siphon::BoundaryClass::from_dims(face_dim, block_dim) {
        siphon::BoundaryClass::Vertex => RestrictionClass::VertexType,
        siphon::BoundaryClass::Facet => RestrictionClass::FacetType,
        siphon::BoundaryClass::Other(d) => RestrictionClass::OtherType(d),
    };
    Ok(Restriction {
        block: p,
        members,
        class,
        face_dim,
        block_dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    CaseI,
    CaseII,
    CaseIII,
    Unclassified,
}

impl CaseLabel {
    pub fn label(&self) -> &'static str {
        match self {
            CaseLabel::CaseI => "I",
            CaseLabel::CaseII => "II",
            CaseLabel::CaseIII => "III",
            CaseLabel::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseAnalysis {
    pub members: SpeciesSet,
    pub restrictions: Vec<Restriction>,
    pub case_label: CaseLabel,
    pub meets_sc: bool,
    /// Complement species living only in blocks that `W` meets.
    pub cv: SpeciesSet,
    /// Complement species living in some block that `W` misses.
    pub cn: SpeciesSet,
}

impl CaseAnalysis {
    /// Restrictions that are nonempty.
    pub fn participating(&self) -> impl Iterator<Item = &Restriction> {
        self.restrictions.iter().filter(|r| !r.is_empty())
    }
}

pub fn case_label(
    net: &ReactionNetwork,
    dec: &Decomposition,
    w: &SpeciesSet,
) -> Result<CaseAnalysis, ComposeError> {
    if !siphon::is_semilocking(net, w)? {
        return Err(ComposeError::NotSemilocking);
    }
    let restrictions = (0..dec.n_blocks())
        .map(|p| restrict_semilocking(net, dec, w, p))
        .collect::<Result<Vec<_>, _>>()?;
    let has = |c: RestrictionClass| restrictions.iter().any(|r| r.class == c);
    let case_label = if has(RestrictionClass::FacetType) {
        CaseLabel::CaseI
    } else if restrictions.iter().any(|r| matches!(r.class, RestrictionClass::OtherType(_))) {
        CaseLabel::Unclassified
    } else if restrictions.iter().all(|r| r.class == RestrictionClass::VertexType) {
        CaseLabel::CaseII
    } else if has(RestrictionClass::VertexType) {
        CaseLabel::CaseIII
    } else {
        CaseLabel::Unclassified
    };
    let mut cv = SpeciesSet::new();
    let mut cn = SpeciesSet::new();
    for s in w.complement(net.n_species()).iter() {
        let in_missed_block = restrictions
            .iter()
            .any(|r| r.is_empty() && dec.block_species[r.block].contains(s));
        if in_missed_block {
            cn.insert(s);
        } else {
            cv.insert(s);
        }
    }
    Ok(CaseAnalysis {
        members: w.clone(),
        restrictions,
        case_label,
        meets_sc: !w.is_disjoint(&dec.intersecting),
        cv,
        cn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    TrivialConservation,
    Undecided,
}

impl Rule {
    pub const ORDER: [Rule; 9] = [
        Rule::R1,
        Rule::R2,
        Rule::R3,
        Rule::R4,
        Rule::R5,
        Rule::R6,
        Rule::R7,
        Rule::R8,
        Rule::TrivialConservation,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
            Rule::R5 => "R5",
            Rule::R6 => "R6",
            Rule::R7 => "R7",
            Rule::R8 => "R8",
            Rule::TrivialConservation => "TrivialConservation",
            Rule::Undecided => "Undecided",
        }
    }

    /// Short name of the argument behind the rule.
    pub fn citation(&self) -> &'static str {
        match self {
            Rule::R1 => "facet restriction away from intersecting species",
            Rule::R2 => "vertex restrictions combine to a vertex",
            Rule::R3 => "vertex or empty restrictions, complement confined to met blocks",
            Rule::R4 => "vertex or empty restrictions, complement in missed blocks",
            Rule::R5 => "all restrictions facet or empty",
            Rule::R6 => "species held only by facet restrictions",
            Rule::R7 => "totally free complement species",
            Rule::R8 => "conservative reduced system",
            Rule::TrivialConservation => "nonnegative conservation law",
            Rule::Undecided => "none",
        }
    }

    /// Rules stated for two-dimensional blocks only.
    fn needs_2d(&self) -> bool {
        matches!(self, Rule::R2 | Rule::R3 | Rule::R4 | Rule::R7)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    FacetBlock { block: usize },
    VertexFace { face_dim: usize },
    ConfinedComplement { cv: SpeciesSet },
    MissedBlocks { blocks: Vec<usize> },
    FacetBlocks { blocks: Vec<usize> },
    FacetOnlySpecies { species: usize, blocks: Vec<usize> },
    FreeSpecies { tf: SpeciesSet },
    ReducedDims { reduced_dim: usize, set_size: usize },
    Conservation { vector: Vec<Rational> },
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discharge {
    pub rule: Rule,
    pub witness: Witness,
    pub justification: String,
}

impl Discharge {
    pub fn undecided(reason: impl Into<String>) -> Self {
        Discharge {
            rule: Rule::Undecided,
            witness: Witness::None,
            justification: reason.into(),
        }
    }

    pub fn citation(&self) -> &'static str {
        self.rule.citation()
    }
}

enum Check {
    No,
    Yes(Witness, String),
}

fn blocks_of<'a>(it: impl Iterator<Item = &'a Restriction>) -> Vec<usize> {
    it.map(|r| r.block).collect()
}

fn names(net: &ReactionNetwork, set: &SpeciesSet) -> String {
    set.names(net).join(",")
}

/// Evaluates one rule's hypotheses, ignoring the two-dimensional gate.
fn check_rule(
    net: &ReactionNetwork,
    report: &SemilockingReport,
    a: &CaseAnalysis,
    rule: Rule,
) -> Result<Check, ComposeError> {
    let w = &a.members;
    Ok(match rule {
        Rule::R1 => match a.restrictions.iter().find(|r| r.facet_like()) {
            Some(r) if !a.meets_sc => Check::Yes(
                Witness::FacetBlock { block: r.block },
                format!(
                    "restriction to block {} has face dimension {} = {} - 1 and W avoids the intersecting species",
                    r.block, r.face_dim, r.block_dim
                ),
            ),
            _ => Check::No,
        },
        Rule::R2 => {
            if a.case_label == CaseLabel::CaseII && !a.meets_sc && report.face_dim == 0 {
                Check::Yes(
                    Witness::VertexFace { face_dim: 0 },
                    "every restriction is vertex-type, W avoids the intersecting species, and W is vertex-type in the whole network".into(),
                )
            } else {
                Check::No
            }
        }
        Rule::R3 => {
            if a.case_label == CaseLabel::CaseIII && !a.cv.is_empty() && !a.meets_sc {
                Check::Yes(
                    Witness::ConfinedComplement { cv: a.cv.clone() },
                    format!(
                        "restrictions are vertex-type or empty, W avoids the intersecting species, and {{{}}} lives only in blocks W meets",
                        names(net, &a.cv)
                    ),
                )
            } else {
                Check::No
            }
        }
        Rule::R4 => {
            if a.case_label == CaseLabel::CaseIII && a.cv.is_empty() && !a.meets_sc {
                let missed = blocks_of(a.restrictions.iter().filter(|r| r.is_empty()));
                Check::Yes(
                    Witness::MissedBlocks { blocks: missed },
                    "restrictions are vertex-type or empty, W avoids the intersecting species, and every complement species lives in a block W misses".into(),
                )
            } else {
                Check::No
            }
        }
        Rule::R5 => {
            if a.participating().next().is_some()
                && a.restrictions.iter().all(|r| r.is_empty() || r.facet_like())
            {
                Check::Yes(
                    Witness::FacetBlocks {
                        blocks: blocks_of(a.participating()),
                    },
                    "every nonempty restriction is facet-type in its block".into(),
                )
            } else {
                Check::No
            }
        }
        Rule::R6 => {
            let found = w.iter().find_map(|s| {
                let holding: Vec<&Restriction> =
                    a.restrictions.iter().filter(|r| r.members.contains(s)).collect();
                (!holding.is_empty() && holding.iter().all(|r| r.facet_like()))
                    .then(|| (s, blocks_of(holding.into_iter())))
            });
            match found {
                Some((s, blocks)) => Check::Yes(
                    Witness::FacetOnlySpecies { species: s, blocks },
                    format!(
                        "{} appears only in facet-type restrictions",
                        net.species()[s].name
                    ),
                ),
                None => Check::No,
            }
        }
        Rule::R7 => {
            let part = &report.complement_partition;
            if part.sr.is_empty() && !part.tf.is_empty() {
                Check::Yes(
                    Witness::FreeSpecies { tf: part.tf.clone() },
                    format!(
                        "no semi-restricted complement species and {{{}}} is totally free",
                        names(net, &part.tf)
                    ),
                )
            } else {
                Check::No
            }
        }
        Rule::R8 => {
            let rs = reduce::reduce_on(net, w).map_err(|e| ComposeError::InternalInconsistency(e.to_string()))?;
            let d = reduce::reduced_subspace_dim(&rs);
            if d < w.len() {
                Check::Yes(
                    Witness::ReducedDims {
                        reduced_dim: d,
                        set_size: w.len(),
                    },
                    format!("reduced system on W has stoichiometric dimension {d} < {}", w.len()),
                )
            } else {
                Check::No
            }
        }
        Rule::TrivialConservation => {
            if !report.trivial {
                return Ok(Check::No);
            }
            match stoich::has_nonnegative_conservation(&stoich::stoich_matrix(net)) {
                Some(vector) => Check::Yes(
                    Witness::Conservation { vector },
                    "a nonnegative conservation law keeps the origin out of every positive compatibility class".into(),
                ),
                None => Check::No,
            }
        }
        Rule::Undecided => Check::No,
    })
}

/// Dimension of the first participating block that is not two-dimensional.
fn non_2d_block(a: &CaseAnalysis) -> Option<&Restriction> {
    a.participating().find(|r| r.block_dim != 2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOutcome {
    pub discharge: Discharge,
    /// Rules whose hypotheses held but that were withheld before the
    /// discharging rule was reached.
    pub caveats: Vec<String>,
}

fn withheld_caveat(net: &ReactionNetwork, a: &CaseAnalysis, rule: Rule, r: &Restriction) -> String {
    format!(
        "W={{{}}}: {} withheld, block {} has dimension {} and the rule needs two-dimensional blocks",
        names(net, &a.members),
        rule.label(),
        r.block,
        r.block_dim
    )
}

fn evaluate(
    net: &ReactionNetwork,
    report: &SemilockingReport,
    a: &CaseAnalysis,
    rules: &[Rule],
    first_only: bool,
) -> Result<(Vec<Discharge>, Vec<String>), ComposeError> {
    let mut found = Vec::new();
    let mut caveats = Vec::new();
    for &rule in rules {
        if let Check::Yes(witness, justification) = check_rule(net, report, a, rule)? {
            if rule.needs_2d() {
                if let Some(r) = non_2d_block(a) {
                    caveats.push(withheld_caveat(net, a, rule, r));
                    continue;
                }
            }
            found.push(Discharge {
                rule,
                witness,
                justification,
            });
            if first_only {
                break;
            }
        }
    }
    Ok((found, caveats))
}

/// First applicable rule in the fixed order R1..R8, TrivialConservation.
pub fn apply_rules(
    net: &ReactionNetwork,
    report: &SemilockingReport,
    analysis: &CaseAnalysis,
) -> Result<RuleOutcome, ComposeError> {
    let (mut found, caveats) = evaluate(net, report, analysis, &Rule::ORDER, true)?;
    let discharge = found
        .pop()
        .unwrap_or_else(|| Discharge::undecided("no rule applies"));
    Ok(RuleOutcome { discharge, caveats })
}

/// Every rule whose hypotheses hold, in order.
pub fn applicable_rules(
    net: &ReactionNetwork,
    report: &SemilockingReport,
    analysis: &CaseAnalysis,
) -> Result<Vec<Discharge>, ComposeError> {
    Ok(evaluate(net, report, analysis, &Rule::ORDER, false)?.0)
}

/// The whole species set is only discharged by a nonnegative conservation law.
pub fn discharge_trivial(net: &ReactionNetwork, report: &SemilockingReport) -> Discharge {
    match stoich::has_nonnegative_conservation(&stoich::stoich_matrix(net)) {
        Some(vector) if report.trivial => Discharge {
            rule: Rule::TrivialConservation,
            witness: Witness::Conservation { vector },
            justification: "a nonnegative conservation law keeps the origin out of every positive compatibility class".into(),
        },
        _ => Discharge::undecided("open network: no nonnegative conservation law for the whole species set"),
    }
}

/// Re-derives a discharge's hypotheses and witness from the raw network.
pub fn verify_discharge(net: &ReactionNetwork, w: &SpeciesSet, d: &Discharge) -> bool {
    let Ok(true) = siphon::is_semilocking(net, w) else {
        return false;
    };
    let dec = decompose_or_single(net);
    let Ok(a) = case_label(net, &dec, w) else {
        return false;
    };
    let sc_free = w.is_disjoint(&dec.intersecting);
    let block_facet = |p: usize| -> bool {
        let members = w.intersection(&dec.block_species[p]);
        let sub = net.subnetwork(&dec.blocks[p]);
        match stoich::face_dimension(&sub, &members) {
            Ok(f) => !members.is_empty() && f + 1 == stoich::dimension(&sub),
            Err(_) => false,
        }
    };
    let twod = || {
        (0..dec.n_blocks()).all(|p| w.is_disjoint(&dec.block_species[p]) || dec.block_dims[p] == 2)
    };
    match (&d.rule, &d.witness) {
        (Rule::R1, Witness::FacetBlock { block }) => sc_free && *block < dec.n_blocks() && block_facet(*block),
        (Rule::R2, Witness::VertexFace { face_dim: 0 }) => {
            sc_free
                && twod()
                && a.case_label == CaseLabel::CaseII
                && stoich::face_dimension(net, w) == Ok(0)
        }
        (Rule::R3, Witness::ConfinedComplement { cv }) => {
            sc_free && twod() && a.case_label == CaseLabel::CaseIII && !cv.is_empty() && *cv == a.cv
        }
        (Rule::R4, Witness::MissedBlocks { .. }) => {
            sc_free && twod() && a.case_label == CaseLabel::CaseIII && a.cv.is_empty()
        }
        (Rule::R5, Witness::FacetBlocks { blocks }) => {
            !blocks.is_empty()
                && (0..dec.n_blocks()).all(|p| {
                    let meets = !w.is_disjoint(&dec.block_species[p]);
                    meets == blocks.contains(&p) && (!meets || block_facet(p))
                })
        }
        (Rule::R6, Witness::FacetOnlySpecies { species, blocks }) => {
            w.contains(*species)
                && !blocks.is_empty()
                && (0..dec.n_blocks()).all(|p| {
                    !dec.block_species[p].contains(*species) || (blocks.contains(&p) && block_facet(p))
                })
        }
        (Rule::R7, Witness::FreeSpecies { tf }) => match siphon::partition_complement(net, w) {
            Ok(part) => twod() && part.sr.is_empty() && !tf.is_empty() && *tf == part.tf,
            Err(_) => false,
        },
        (Rule::R8, Witness::ReducedDims { reduced_dim, set_size }) => {
            match reduce::is_reduced_conservative(net, w) {
                Ok(c) => c.conservative && c.reduced_dim == *reduced_dim && c.set_size == *set_size,
                Err(_) => false,
            }
        }
        (Rule::TrivialConservation, Witness::Conservation { vector }) => {
            let m = stoich::stoich_matrix(net);
            w.len() == net.n_species()
                && linalg::is_nonnegative(vector)
                && vector.iter().any(|v| *v != linalg::rat(0))
                && m.columns().iter().all(|c| {
                    let col: Vec<Rational> = c.iter().map(|&x| linalg::rat(x)).collect();
                    linalg::dot(vector, &col) == linalg::rat(0)
                })
        }
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BalanceStatus {
    /// Deficiency zero and weakly reversible: balanced for every choice of rates.
    DeficiencyZero,
    /// A balanced equilibrium was found for the given rates.
    Found { residual: f64, concentrations: Vec<f64> },
    Unverified { reason: String },
}

impl BalanceStatus {
    pub fn verified(&self) -> bool {
        !matches!(self, BalanceStatus::Unverified { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            BalanceStatus::DeficiencyZero => "deficiency-zero",
            BalanceStatus::Found { .. } => "found",
            BalanceStatus::Unverified { .. } => "unverified",
        }
    }
}

/// Complex balance of `net` (a block or the whole network).
pub fn balance_status(net: &ReactionNetwork) -> BalanceStatus {
    let g = ComplexGraph::new(net);
    if !balance::is_weakly_reversible(&g) {
        return BalanceStatus::Unverified {
            reason: "not weakly reversible".into(),
        };
    }
    if balance::deficiency(net) == 0 {
        return BalanceStatus::DeficiencyZero;
    }
    match balance::find_complex_balanced_equilibrium(net) {
        Ok(eq) => BalanceStatus::Found {
            residual: eq.residual,
            concentrations: eq.concentrations,
        },
        Err(BalanceError::NotFound { residual }) => BalanceStatus::Unverified {
            reason: format!("no balanced equilibrium for these rates (residual {residual:e})"),
        },
        Err(e) => BalanceStatus::Unverified { reason: e.to_string() },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WRecord {
    pub report: SemilockingReport,
    pub analysis: CaseAnalysis,
    pub discharge: Discharge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Persistent,
    Undecided,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Persistent => "Persistent",
            Verdict::Undecided => "Undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceCertificate {
    pub decomposition: Decomposition,
    pub records: Vec<WRecord>,
    pub verdict: Verdict,
    /// Per block, then the whole network when there is more than one block.
    pub balance: Vec<(String, BalanceStatus)>,
    /// Some complex balance hypothesis is unverified.
    pub conditional: bool,
    pub caveats: Vec<String>,
}

impl PersistenceCertificate {
    pub fn verdict_text(&self) -> String {
        match (self.verdict, self.conditional) {
            (Verdict::Persistent, true) => "Persistent (conditional on complex balance)".into(),
            (v, _) => v.label().into(),
        }
    }

    pub fn record(&self, w: &SpeciesSet) -> Option<&WRecord> {
        self.records.iter().find(|r| &r.report.members == w)
    }
}

pub fn certify_persistence(net: &ReactionNetwork, max_n: usize) -> Result<PersistenceCertificate, ComposeError> {
    let dec = decompose_or_single(net);
    let reports = siphon::enumerate_semilocking(net, max_n)?;
    let outcomes: Vec<(WRecord, Vec<String>)> = reports
        .into_par_iter()
        .map(|report| {
            let analysis = case_label(net, &dec, &report.members)?;
            let (discharge, caveats) = if report.trivial {
                (discharge_trivial(net, &report), Vec::new())
            } else {
                let o = apply_rules(net, &report, &analysis)?;
                (o.discharge, o.caveats)
            };
            Ok((
                WRecord {
                    report,
                    analysis,
                    discharge,
                },
                caveats,
            ))
        })
        .collect::<Result<_, ComposeError>>()?;

    let mut records = Vec::with_capacity(outcomes.len());
    let mut caveats = Vec::new();
    for (rec, cv) in outcomes {
        if rec.discharge.rule == Rule::Undecided {
            caveats.push(format!(
                "W={{{}}}: undecided ({})",
                names(net, &rec.report.members),
                rec.discharge.justification
            ));
        }
        caveats.extend(cv);
        records.push(rec);
    }

    let mut balance = Vec::new();
    for p in 0..dec.n_blocks() {
        balance.push((format!("block {p}"), balance_status(&net.subnetwork(&dec.blocks[p]))));
    }
    if dec.n_blocks() > 1 {
        balance.push(("network".to_string(), balance_status(net)));
    }
    for (who, status) in &balance {
        if let BalanceStatus::Unverified { reason } = status {
            caveats.push(format!("{who}: complex balance unverified ({reason})"));
        }
    }
    let conditional = balance.iter().any(|(_, s)| !s.verified());
    let verdict = if records.iter().all(|r| r.discharge.rule != Rule::Undecided) {
        Verdict::Persistent
    } else {
        Verdict::Undecided
    };
    Ok(PersistenceCertificate {
        decomposition: dec,
        records,
        verdict,
        balance,
        conditional,
        caveats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::parse_network;
    use crate::siphon::DEFAULT_MAX_N;

    fn set(v: &[usize]) -> SpeciesSet {
        SpeciesSet::from_iter(v.iter().copied())
    }

    fn analyze(net: &ReactionNetwork, w: &[usize]) -> (SemilockingReport, CaseAnalysis) {
        let dec = decompose_or_single(net);
        let w = set(w);
        (siphon::report_for(net, &w).unwrap(), case_label(net, &dec, &w).unwrap())
    }

    fn first_rule(net: &ReactionNetwork, w: &[usize]) -> Rule {
        let (r, a) = analyze(net, w);
        apply_rules(net, &r, &a).unwrap().discharge.rule
    }

    #[test]
    fn decompositions() {
        assert_eq!(decompose(&fixtures::net_trio()), Err(ComposeError::NoPartition));
        let single = decompose_or_single(&fixtures::net_trio());
        assert!(single.implicit);
        assert!(single.intersecting.is_empty());
        assert_eq!(single.block_dims, vec![2]);

        let comb = decompose(&fixtures::net_comb_open()).unwrap();
        assert!(comb.intersecting.is_empty());
        assert_eq!(comb.block_dims, vec![2, 1]);
        assert_eq!(comb.block_species, vec![set(&[0, 1, 2]), set(&[3, 4])]);

        let chain = decompose(&fixtures::net_chain()).unwrap();
        assert_eq!(chain.intersecting, set(&[1]));
        assert_eq!(chain.block_dims, vec![1, 1]);
    }

    #[test]
    fn restrictions() {
        let chain = fixtures::net_chain();
        let dec = decompose(&chain).unwrap();
        let r = restrict_semilocking(&chain, &dec, &set(&[0, 1, 2]), 0).unwrap();
        assert_eq!(r.members, set(&[0, 1]));
        assert_eq!(r.class, RestrictionClass::VertexType);
        assert!(r.facet_like());

        let comb = fixtures::net_comb_open();
        let dec = decompose(&comb).unwrap();
        let r = restrict_semilocking(&comb, &dec, &set(&[0, 1]), 1).unwrap();
        assert_eq!(r.class, RestrictionClass::Empty);

        let trio = fixtures::net_trio();
        let dec = decompose_or_single(&trio);
        let r = restrict_semilocking(&trio, &dec, &set(&[0]), 0).unwrap();
        assert_eq!(r.class, RestrictionClass::FacetType);
    }

    #[test]
    fn restriction_of_non_semilocking_set_is_reported() {
        // Restrictions of genuine semilocking sets always pass; a set that
        // breaks the precondition must be caught rather than classified.
        let net = fixtures::net_trio_split();
        let dec = decompose(&net).unwrap();
        assert!(matches!(
            restrict_semilocking(&net, &dec, &set(&[1]), 0),
            Err(ComposeError::InternalInconsistency(_))
        ));
    }

    #[test]
    fn case_labels() {
        let trio = fixtures::net_trio();
        assert_eq!(analyze(&trio, &[0]).1.case_label, CaseLabel::CaseI);
        assert_eq!(analyze(&trio, &[0, 1]).1.case_label, CaseLabel::CaseII);

        let comb = fixtures::net_comb_open();
        let (_, a) = analyze(&comb, &[0, 1]);
        assert_eq!(a.case_label, CaseLabel::CaseIII);
        assert_eq!(a.cv, set(&[2]));
        assert!(set(&[3, 4]).is_subset(&a.cn));
        assert!(!a.meets_sc);

        let dec = decompose_or_single(&trio);
        assert_eq!(case_label(&trio, &dec, &set(&[1])), Err(ComposeError::NotSemilocking));
    }

    #[test]
    fn rule_examples() {
        let trio = fixtures::net_trio();
        assert_eq!(first_rule(&trio, &[0]), Rule::R1);
        assert_eq!(first_rule(&trio, &[0, 1]), Rule::R2);
        assert_eq!(first_rule(&trio, &[0, 2]), Rule::R2);

        let chain = fixtures::net_chain();
        let (r, a) = analyze(&chain, &[0, 1, 2]);
        assert!(a.meets_sc);
        assert_eq!(apply_rules(&chain, &r, &a).unwrap().discharge.rule, Rule::R5);

        let semi = fixtures::net_semi();
        let (r, a) = analyze(&semi, &[0, 1]);
        let all = applicable_rules(&semi, &r, &a).unwrap();
        let r8 = all.iter().find(|d| d.rule == Rule::R8).unwrap();
        assert_eq!(r8.witness, Witness::ReducedDims { reduced_dim: 1, set_size: 2 });
    }

    #[test]
    fn trivial_set() {
        let trio = fixtures::net_trio();
        let r = siphon::report_for(&trio, &set(&[0, 1, 2])).unwrap();
        let d = discharge_trivial(&trio, &r);
        assert_eq!(d.rule, Rule::TrivialConservation);
        assert_eq!(
            d.witness,
            Witness::Conservation {
                vector: vec![linalg::rat(1); 3]
            }
        );
        let open = parse_network("X1 -> 0 [k=1]").unwrap();
        let r = siphon::report_for(&open, &set(&[0])).unwrap();
        assert_eq!(discharge_trivial(&open, &r).rule, Rule::Undecided);
    }

    #[test]
    fn trio_certificate() {
        let trio = fixtures::net_trio();
        let cert = certify_persistence(&trio, DEFAULT_MAX_N).unwrap();
        assert_eq!(cert.verdict, Verdict::Persistent);
        assert!(!cert.conditional);
        let rules: Vec<(SpeciesSet, Rule)> = cert
            .records
            .iter()
            .map(|r| (r.report.members.clone(), r.discharge.rule))
            .collect();
        assert_eq!(
            rules,
            vec![
                (set(&[0]), Rule::R1),
                (set(&[0, 1]), Rule::R2),
                (set(&[0, 2]), Rule::R2),
                (set(&[0, 1, 2]), Rule::TrivialConservation),
            ]
        );
        for r in &cert.records {
            assert!(verify_discharge(&trio, &r.report.members, &r.discharge), "{r:?}");
        }
    }

    #[test]
    fn comb_open_certificate() {
        let comb = fixtures::net_comb_open();
        let cert = certify_persistence(&comb, DEFAULT_MAX_N).unwrap();
        assert_eq!(cert.verdict, Verdict::Persistent);
        let rule = |w: &[usize]| cert.record(&set(w)).unwrap().discharge.rule;
        assert_eq!(rule(&[0, 1]), Rule::R3);
        assert_eq!(rule(&[0, 2]), Rule::R3);
        assert_eq!(rule(&[0, 1, 2]), Rule::R4);
        assert_eq!(rule(&[3, 4]), Rule::R1);
        assert_eq!(rule(&[0, 1, 2, 3, 4]), Rule::TrivialConservation);
        for r in &cert.records {
            assert!(verify_discharge(&comb, &r.report.members, &r.discharge), "{r:?}");
        }
    }

    #[test]
    fn case_three_containments() {
        for net in [fixtures::net_comb_open(), fixtures::net_trio_split(), fixtures::net_chain()] {
            let cert = certify_persistence(&net, DEFAULT_MAX_N).unwrap();
            for r in cert.records.iter().filter(|r| !r.analysis.meets_sc && r.analysis.case_label == CaseLabel::CaseIII) {
                let part = &r.report.complement_partition;
                assert!(r.analysis.cv.is_subset(&part.tr), "{r:?}");
                assert!(r.analysis.cn.is_subset(&part.tf), "{r:?}");
            }
        }
    }

    #[test]
    fn open_network_caveat() {
        let net = fixtures::a_to_b();
        let cert = certify_persistence(&net, DEFAULT_MAX_N).unwrap();
        assert!(cert.conditional);
        assert!(cert.caveats.iter().any(|c| c.starts_with("block 0: complex balance unverified")));
        assert_eq!(cert.verdict_text(), "Persistent (conditional on complex balance)");
    }

    #[test]
    fn withheld_rules_emit_caveats() {
        // W meets only a one-dimensional block, where R4's hypotheses hold.
        let net = parse_network(
            "species X1 X2 X3 X4\nsubnet a {\n X1 + X2 -> 2 X1 [k=1]\n 2 X1 -> X1 + X2 [k=1]\n}\nsubnet b {\n X3 <-> X4 [k=1,1]\n}",
        )
        .unwrap();
        let (r, a) = analyze(&net, &[0, 1]);
        assert_eq!(a.case_label, CaseLabel::CaseIII);
        let (found, caveats) = evaluate(&net, &r, &a, &[Rule::R4], true).unwrap();
        assert!(found.is_empty());
        assert!(caveats[0].contains("R4 withheld"), "{caveats:?}");
        // R1 still discharges it through the facet check in the 1-d block.
        assert_eq!(apply_rules(&net, &r, &a).unwrap().discharge.rule, Rule::R1);
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let trio = fixtures::net_trio();
        let bad = Discharge {
            rule: Rule::R1,
            witness: Witness::FacetBlock { block: 0 },
            justification: String::new(),
        };
        assert!(verify_discharge(&trio, &set(&[0]), &bad));
        assert!(!verify_discharge(&trio, &set(&[0, 1]), &bad));
        let bad8 = Discharge {
            rule: Rule::R8,
            witness: Witness::ReducedDims { reduced_dim: 0, set_size: 1 },
            justification: String::new(),
        };
        assert!(!verify_discharge(&trio, &set(&[0]), &bad8));
    }
}
