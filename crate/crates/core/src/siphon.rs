//! Semilocking sets (siphons) and the structure of their boundary faces.

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{ReactionNetwork, SpeciesSet};
use crate::stoich::{self, StoichError, SubspaceBasis};

pub const DEFAULT_MAX_N: usize = 24;
/// Subsets are enumerated as `u64` masks.
const HARD_MAX_N: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SiphonError {
    #[error("species set is empty")]
    EmptySet,
    #[error("species index {0} is not in the network")]
    UnknownSpecies(usize),
    #[error("network has {n} species, enumeration cap is {max}")]
    TooLarge { n: usize, max: usize },
    #[error("set is not semilocking")]
    NotSemilocking,
}

impl From<StoichError> for SiphonError {
    fn from(e: StoichError) -> Self {
        match e {
            StoichError::UnknownSpecies(s) => SiphonError::UnknownSpecies(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryClass {
    Vertex,
    Facet,
    Other(usize),
}

impl BoundaryClass {
    /// Vertex takes precedence when a one-dimensional subspace makes both
    /// conditions hold.
    pub fn from_dims(face_dim: usize, dim: usize) -> Self {
        if face_dim == 0 {
            BoundaryClass::Vertex
        } else if dim >= 1 && face_dim == dim - 1 {
            BoundaryClass::Facet
        } else {
            BoundaryClass::Other(face_dim)
        }
    }

    pub fn label(&self) -> String {
        match self {
            BoundaryClass::Vertex => "vertex".into(),
            BoundaryClass::Facet => "facet".into(),
            BoundaryClass::Other(d) => format!("other({d})"),
        }
    }
}

/// Split of `W^c` into totally free, semi-restricted and totally restricted species.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComplementPartition {
    pub tf: SpeciesSet,
    pub sr: SpeciesSet,
    pub tr: SpeciesSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilockingReport {
    pub members: SpeciesSet,
    pub trivial: bool,
    pub boundary: BoundaryClass,
    /// `dim(S ∩ ker π_W)`.
    pub face_dim: usize,
    /// `dim π_{W^c}(S)`, reported alongside for comparison.
    pub complement_projection_dim: usize,
    pub face_kernel: SubspaceBasis,
    pub complement_partition: ComplementPartition,
}

fn check_set(net: &ReactionNetwork, w: &SpeciesSet) -> Result<(), SiphonError> {
    if w.is_empty() {
        return Err(SiphonError::EmptySet);
    }
    match w.iter().find(|&s| s >= net.n_species()) {
        Some(s) => Err(SiphonError::UnknownSpecies(s)),
        None => Ok(()),
    }
}

/// First reaction whose product meets `W` while its reactant does not.
pub fn violating_reaction(net: &ReactionNetwork, w: &SpeciesSet) -> Option<usize> {
    net.reactions().iter().position(|r| {
        let hits_product = r.product.terms().any(|(s, _)| w.contains(s));
        let hits_reactant = r.reactant.terms().any(|(s, _)| w.contains(s));
        hits_product && !hits_reactant
    })
}

pub fn is_semilocking(net: &ReactionNetwork, w: &SpeciesSet) -> Result<bool, SiphonError> {
    check_set(net, w)?;
    Ok(violating_reaction(net, w).is_none())
}

fn cap(net: &ReactionNetwork, max_n: usize) -> Result<usize, SiphonError> {
    let max = max_n.min(HARD_MAX_N);
    let n = net.n_species();
    if n > max {
        Err(SiphonError::TooLarge { n, max })
    } else {
        Ok(n)
    }
}

/// All semilocking sets, ordered by size and then lexicographically.
pub fn semilocking_sets(net: &ReactionNetwork, max_n: usize) -> Result<Vec<SpeciesSet>, SiphonError> {
    let n = cap(net, max_n)?;
    let supports: Vec<(u64, u64)> = net
        .reactions()
        .iter()
        .map(|r| (r.reactant.support_mask(), r.product.support_mask()))
        .collect();
    let top: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut masks: Vec<u64> = (1..=top)
        .into_par_iter()
        .filter(|&w| {
            supports
                .iter()
                .all(|&(reac, prod)| w & prod == 0 || w & reac != 0)
        })
        .collect();
    masks.sort_by_cached_key(|&m| (m.count_ones(), SpeciesSet::from_mask(m).to_vec()));
    Ok(masks.into_iter().map(SpeciesSet::from_mask).collect())
}

pub fn enumerate_semilocking(
    net: &ReactionNetwork,
    max_n: usize,
) -> Result<Vec<SemilockingReport>, SiphonError> {
    let sets = semilocking_sets(net, max_n)?;
    sets.into_par_iter().map(|w| report_for(net, &w)).collect()
}

/// Inclusion-minimal semilocking sets.
pub fn minimal_semilocking(net: &ReactionNetwork, max_n: usize) -> Result<Vec<SpeciesSet>, SiphonError> {
    let sets = semilocking_sets(net, max_n)?;
    let masks: Vec<u64> = sets.iter().map(SpeciesSet::mask).collect();
    Ok(sets
        .into_iter()
        .zip(&masks)
        .filter(|(_, &m)| !masks.iter().any(|&o| o != m && o & m == o))
        .map(|(s, _)| s)
        .collect())
}

pub fn classify_boundary(net: &ReactionNetwork, w: &SpeciesSet) -> Result<BoundaryClass, SiphonError> {
    if !is_semilocking(net, w)? {
        return Err(SiphonError::NotSemilocking);
    }
    let face = stoich::face_dimension(net, w)?;
    Ok(BoundaryClass::from_dims(face, stoich::dimension(net)))
}

/// Reactions whose reactant and product supports both avoid `W`; they can
/// fire on the boundary face.
pub fn free_reactions(net: &ReactionNetwork, w: &SpeciesSet) -> Vec<usize> {
    net.reactions()
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            r.reactant.terms().chain(r.product.terms()).all(|(s, _)| !w.contains(s))
        })
        .map(|(i, _)| i)
        .collect()
}

fn partition_with_kernel(
    net: &ReactionNetwork,
    w: &SpeciesSet,
    kernel: &SubspaceBasis,
) -> ComplementPartition {
    let free = free_reactions(net, w);
    let mut part = ComplementPartition::default();
    for s in w.complement(net.n_species()).iter() {
        let changes_freely = free.iter().any(|&i| {
            let r = &net.reactions()[i];
            r.product.coeff(s) != r.reactant.coeff(s)
        });
        if changes_freely {
            part.tf.insert(s);
        } else if kernel.vectors.iter().any(|v| !v[s].is_zero()) {
            part.sr.insert(s);
        } else {
            part.tr.insert(s);
        }
    }
    part
}

pub fn partition_complement(
    net: &ReactionNetwork,
    w: &SpeciesSet,
) -> Result<ComplementPartition, SiphonError> {
    if !is_semilocking(net, w)? {
        return Err(SiphonError::NotSemilocking);
    }
    let kernel = stoich::face_kernel(net, w)?;
    Ok(partition_with_kernel(net, w, &kernel))
}

/// Full report for a set already known to be semilocking.
pub fn report_for(net: &ReactionNetwork, w: &SpeciesSet) -> Result<SemilockingReport, SiphonError> {
    if !is_semilocking(net, w)? {
        return Err(SiphonError::NotSemilocking);
    }
    let m = stoich::stoich_matrix(net);
    let dim = stoich::dimension(net);
    let kernel = stoich::face_kernel_of(&m, w)?;
    let face_dim = kernel.dim();
    let complement = w.complement(net.n_species());
    Ok(SemilockingReport {
        members: w.clone(),
        trivial: w.len() == net.n_species(),
        boundary: BoundaryClass::from_dims(face_dim, dim),
        face_dim,
        complement_projection_dim: stoich::projected_dimension_of(&m, &complement)?,
        complement_partition: partition_with_kernel(net, w, &kernel),
        face_kernel: kernel,
    })
}
