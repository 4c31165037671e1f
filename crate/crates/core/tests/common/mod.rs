#![allow(dead_code)]

use std::collections::BTreeSet;

use crnp::network::{Complex, Reaction, ReactionNetwork};
use proptest::prelude::*;
use rand::Rng;

/// Random complex over `n` species: each species enters with probability
/// about one third and coefficient 1 or 2.
fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Complex {
    let mut c = Complex::zero();
    for s in 0..n {
        if rng.gen_bool(0.3) {
            c.add(s, rng.gen_range(1..=2));
        }
    }
    c
}

pub fn random_network<R: Rng>(rng: &mut R, max_n: usize, max_r: usize) -> ReactionNetwork {
    let n = rng.gen_range(1..=max_n);
    let r = rng.gen_range(1..=max_r);
    let species = (0..n).map(|i| format!("S{i}")).collect();
    let mut reactions = Vec::with_capacity(r);
    while reactions.len() < r {
        let a = random_complex(rng, n);
        let b = random_complex(rng, n);
        if a != b {
            reactions.push(Reaction::new(a, b, rng.gen_range(0.5..2.0), 0.0));
        }
    }
    ReactionNetwork::from_parts(species, reactions, None)
}

fn complex_strategy(n: usize) -> impl Strategy<Value = Complex> {
    prop::collection::vec(0u32..=2, n).prop_map(|coeffs| {
        Complex::from_terms(coeffs.into_iter().enumerate().filter(|(_, c)| *c > 0))
    })
}

/// Networks with up to `max_n` species and `max_r` reactions; rates in
/// `[0.5, 2]`, no delays, no partition.
pub fn network_strategy(max_n: usize, max_r: usize) -> impl Strategy<Value = ReactionNetwork> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((complex_strategy(n), complex_strategy(n), 0.5f64..2.0), 1..=max_r).prop_map(
            move |raw| {
                let reactions: Vec<Reaction> = raw
                    .into_iter()
                    .filter(|(a, b, _)| a != b)
                    .map(|(a, b, k)| Reaction::new(a, b, k, 0.0))
                    .collect();
                let reactions = if reactions.is_empty() {
                    vec![Reaction::new(Complex::from_terms([(0, 1)]), Complex::zero(), 1.0, 0.0)]
                } else {
                    reactions
                };
                ReactionNetwork::from_parts((0..n).map(|i| format!("S{i}")).collect(), reactions, None)
            },
        )
    })
}

/// Semilocking sets straight from the definition: every reaction whose
/// product meets `W` has a reactant meeting `W`.
pub fn brute_force_semilocking(net: &ReactionNetwork) -> BTreeSet<BTreeSet<usize>> {
    let n = net.n_species();
    let mut out = BTreeSet::new();
    let mut chosen = vec![false; n];
    fn walk(net: &ReactionNetwork, k: usize, chosen: &mut Vec<bool>, out: &mut BTreeSet<BTreeSet<usize>>) {
        if k == chosen.len() {
            let w: BTreeSet<usize> = (0..chosen.len()).filter(|&s| chosen[s]).collect();
            if w.is_empty() {
                return;
            }
            let ok = net.reactions().iter().all(|r| {
                let meets = |c: &Complex| c.terms().any(|(s, _)| w.contains(&s));
                !meets(&r.product) || meets(&r.reactant)
            });
            if ok {
                out.insert(w);
            }
            return;
        }
        chosen[k] = false;
        walk(net, k + 1, chosen, out);
        chosen[k] = true;
        walk(net, k + 1, chosen, out);
    }
    walk(net, 0, &mut chosen, &mut out);
    out
}
