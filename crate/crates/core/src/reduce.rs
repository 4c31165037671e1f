//! Reduced systems: project a network onto a species subset and fold the
//! eliminated reactant species into time-varying rate factors.

use std::fmt;

use thiserror::Error;

use crate::linalg::RationalMatrix;
use crate::network::{Complex, ReactionNetwork, Species, SpeciesSet};
use crate::siphon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("kept species set is empty")]
    EmptyKeepSet,
    #[error("species index {0} is not in the network")]
    UnknownSpecies(usize),
    #[error("set is not semilocking")]
    NotSemilocking,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedReaction {
    /// Index of the originating reaction.
    pub source: usize,
    pub reactant: Complex,
    pub product: Complex,
    pub base_rate: f64,
    pub delay: f64,
    /// Eliminated species and their reactant exponents; the effective rate
    /// is `base_rate * prod x_j^e`.
    pub modulation: Complex,
}

impl ReducedReaction {
    pub fn modulation_at(&self, full_state: &[f64]) -> f64 {
        self.modulation.monomial(full_state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub kept_species: SpeciesSet,
    pub reactions: Vec<ReducedReaction>,
    pub dropped: Vec<usize>,
    /// Names of the full network's species, for display.
    pub names: Vec<Species>,
}

pub fn reduce_on(net: &ReactionNetwork, keep: &SpeciesSet) -> Result<ReducedSystem, ReduceError> {
    if keep.is_empty() {
        return Err(ReduceError::EmptyKeepSet);
    }
    if let Some(s) = keep.iter().find(|&s| s >= net.n_species()) {
        return Err(ReduceError::UnknownSpecies(s));
    }
    let eliminated = keep.complement(net.n_species());
    let mut reactions = Vec::new();
    let mut dropped = Vec::new();
    for (i, r) in net.reactions().iter().enumerate() {
        let reactant = r.reactant.project(keep);
        let product = r.product.project(keep);
        if reactant.is_zero() && product.is_zero() {
            dropped.push(i);
            continue;
        }
        reactions.push(ReducedReaction {
            source: i,
            reactant,
            product,
            base_rate: r.rate_k,
            delay: r.delay_tau,
            modulation: r.reactant.project(&eliminated),
        });
    }
    Ok(ReducedSystem {
        kept_species: keep.clone(),
        reactions,
        dropped,
        names: net.species().to_vec(),
    })
}

impl ReducedSystem {
    /// Reduces further onto `keep`, a subset of the kept species.
    pub fn restrict(&self, keep: &SpeciesSet) -> Result<ReducedSystem, ReduceError> {
        if keep.is_empty() {
            return Err(ReduceError::EmptyKeepSet);
        }
        if let Some(s) = keep.iter().find(|&s| !self.kept_species.contains(s)) {
            return Err(ReduceError::UnknownSpecies(s));
        }
        let eliminated = self.kept_species.difference(keep);
        let mut reactions = Vec::new();
        let mut dropped = self.dropped.clone();
        for r in &self.reactions {
            let reactant = r.reactant.project(keep);
            let product = r.product.project(keep);
            if reactant.is_zero() && product.is_zero() {
                dropped.push(r.source);
                continue;
            }
            let mut modulation = r.modulation.clone();
            for (s, e) in r.reactant.project(&eliminated).terms() {
                modulation.add(s, e);
            }
            reactions.push(ReducedReaction {
                reactant,
                product,
                modulation,
                ..r.clone()
            });
        }
        dropped.sort_unstable();
        Ok(ReducedSystem {
            kept_species: keep.clone(),
            reactions,
            dropped,
            names: self.names.clone(),
        })
    }

    /// Projected reaction vectors over the kept species (in index order).
    pub fn vectors(&self) -> Vec<Vec<i64>> {
        let kept = self.kept_species.to_vec();
        self.reactions
            .iter()
            .map(|r| {
                kept.iter()
                    .map(|&s| r.product.coeff(s) as i64 - r.reactant.coeff(s) as i64)
                    .collect()
            })
            .collect()
    }

    /// Right-hand side over the kept species. `kept_delayed[i]` is the kept
    /// state at `t - tau_i` for reaction `i`; `mod_now` and `mod_delayed`
    /// are the modulation factors at `t` and `t - tau_i`.
    pub fn rhs(
        &self,
        kept_now: &[f64],
        kept_delayed: &[Vec<f64>],
        mod_now: &[f64],
        mod_delayed: &[f64],
    ) -> Vec<f64> {
        let kept = self.kept_species.to_vec();
        let local = |c: &Complex, x: &[f64]| -> f64 {
            kept.iter()
                .enumerate()
                .map(|(li, &s)| x[li].powi(c.coeff(s) as i32))
                .product()
        };
        let mut dx = vec![0.0; kept.len()];
        for (i, r) in self.reactions.iter().enumerate() {
            let produced = r.base_rate * mod_delayed[i] * local(&r.reactant, &kept_delayed[i]);
            let consumed = r.base_rate * mod_now[i] * local(&r.reactant, kept_now);
            for (li, &s) in kept.iter().enumerate() {
                dx[li] += produced * r.product.coeff(s) as f64 - consumed * r.reactant.coeff(s) as f64;
            }
        }
        dx
    }
}

/// Exact rank of the projected reaction vectors.
pub fn reduced_subspace_dim(rs: &ReducedSystem) -> usize {
    let vectors = rs.vectors();
    if vectors.is_empty() {
        return 0;
    }
    RationalMatrix::from_i64_rows(&vectors).rank()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConservativeCheck {
    pub conservative: bool,
    pub reduced_dim: usize,
    pub set_size: usize,
}

/// Whether the reduced system on `W` has stoichiometric dimension below `|W|`.
pub fn is_reduced_conservative(
    net: &ReactionNetwork,
    w: &SpeciesSet,
) -> Result<ConservativeCheck, ReduceError> {
    match siphon::is_semilocking(net, w) {
        Ok(true) => {}
        Ok(false) => return Err(ReduceError::NotSemilocking),
        Err(siphon::SiphonError::UnknownSpecies(s)) => return Err(ReduceError::UnknownSpecies(s)),
        Err(_) => return Err(ReduceError::EmptyKeepSet),
    }
    let reduced_dim = reduced_subspace_dim(&reduce_on(net, w)?);
    Ok(ConservativeCheck {
        conservative: reduced_dim < w.len(),
        reduced_dim,
        set_size: w.len(),
    })
}

impl fmt::Display for ReducedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kept: Vec<&str> = self
            .kept_species
            .iter()
            .map(|s| self.names[s].name.as_str())
            .collect();
        writeln!(f, "species {}", kept.join(" "))?;
        for r in &self.reactions {
            let mut rate = format!("{:?}", r.base_rate);
            for (s, e) in r.modulation.terms() {
                rate.push_str(&format!("*{}^{}", self.names[s].name, e));
            }
            writeln!(
                f,
                "{} -> {} [k={}, tau={:?}]",
                r.reactant.display(&self.names),
                r.product.display(&self.names),
                rate,
                r.delay
            )?;
        }
        for &i in &self.dropped {
            writeln!(f, "# dropped reaction {i}")?;
        }
        Ok(())
    }
}
