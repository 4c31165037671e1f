//! JSON documents for certificates and simulation runs.
//!
//! Values that must survive a round trip exactly are strings: rationals as
//! `"p/q"`, floats with 17 significant digits.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::compose::{BalanceStatus, PersistenceCertificate, Restriction, WRecord, Witness};
use crate::linalg;
use crate::network::{serialize_network, ReactionNetwork, SpeciesSet};
use crate::sim::{ProbeSummary, RunReport};

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn float_string(x: f64) -> String {
    format!("{x:.16e}")
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::String(float_string(x))).collect())
}

pub fn network_sha256(net: &ReactionNetwork) -> String {
    let digest = Sha256::digest(serialize_network(net).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn names(net: &ReactionNetwork, set: &SpeciesSet) -> Value {
    json!(set.names(net))
}

fn witness_json(net: &ReactionNetwork, w: &Witness) -> Value {
    match w {
        Witness::FacetBlock { block } => json!({"kind": "facet_block", "block": block}),
        Witness::VertexFace { face_dim } => json!({"kind": "vertex_face", "face_dimension": face_dim}),
        Witness::ConfinedComplement { cv } => json!({"kind": "confined_complement", "cv": names(net, cv)}),
        Witness::MissedBlocks { blocks } => json!({"kind": "missed_blocks", "blocks": blocks}),
        Witness::FacetBlocks { blocks } => json!({"kind": "facet_blocks", "blocks": blocks}),
        Witness::FacetOnlySpecies { species, blocks } => json!({
            "kind": "facet_only_species",
            "species": net.species()[*species].name,
            "blocks": blocks,
        }),
        Witness::FreeSpecies { tf } => json!({"kind": "free_species", "tf": names(net, tf)}),
        Witness::ReducedDims { reduced_dim, set_size } => json!({
            "kind": "reduced_dimension",
            "reduced_dimension": reduced_dim,
            "set_size": set_size,
        }),
        Witness::Conservation { vector } => json!({
            "kind": "conservation_law",
            "vector": vector.iter().map(linalg::rat_string).collect::<Vec<_>>(),
        }),
        Witness::None => Value::Null,
    }
}

fn restriction_json(net: &ReactionNetwork, r: &Restriction) -> Value {
    json!({
        "block": r.block,
        "members": names(net, &r.members),
        "class": r.class.label(),
        "face_dimension": r.face_dim,
        "block_dimension": r.block_dim,
    })
}

fn record_json(net: &ReactionNetwork, rec: &WRecord) -> Value {
    let rep = &rec.report;
    let a = &rec.analysis;
    let d = &rec.discharge;
    json!({
        "members": names(net, &rep.members),
        "trivial": rep.trivial,
        "boundary": rep.boundary.label(),
        "face_dimension": rep.face_dim,
        "complement_projection_dimension": rep.complement_projection_dim,
        "face_kernel": rep.face_kernel.as_strings(),
        "partition": {
            "tf": names(net, &rep.complement_partition.tf),
            "sr": names(net, &rep.complement_partition.sr),
            "tr": names(net, &rep.complement_partition.tr),
        },
        "case": a.case_label.label(),
        "meets_intersecting": a.meets_sc,
        "cv": names(net, &a.cv),
        "cn": names(net, &a.cn),
        "restrictions": a.restrictions.iter().map(|r| restriction_json(net, r)).collect::<Vec<_>>(),
        "rule": d.rule.label(),
        "witnesses": witness_json(net, &d.witness),
        "citation": d.citation(),
        "justification": d.justification,
    })
}

fn balance_json(scope: &str, status: &BalanceStatus) -> Value {
    let mut m = Map::new();
    m.insert("scope".into(), json!(scope));
    m.insert("status".into(), json!(status.label()));
    match status {
        BalanceStatus::DeficiencyZero => {}
        BalanceStatus::Found { residual, concentrations } => {
            m.insert("residual".into(), json!(float_string(*residual)));
            m.insert("equilibrium".into(), floats(concentrations));
        }
        BalanceStatus::Unverified { reason } => {
            m.insert("reason".into(), json!(reason));
        }
    }
    Value::Object(m)
}

/// The full certificate document. Everything outside `"meta"` is a pure
/// function of the network.
pub fn certificate_document(net: &ReactionNetwork, cert: &PersistenceCertificate) -> Value {
    let dec = &cert.decomposition;
    let blocks: Vec<Value> = (0..dec.n_blocks())
        .map(|p| {
            json!({
                "index": p,
                "name": dec.block_names.get(p).cloned().unwrap_or_default(),
                "reactions": dec.blocks[p].iter().map(|&i| net.reaction_label(i)).collect::<Vec<_>>(),
                "species": names(net, &dec.block_species[p]),
                "dimension": dec.block_dims[p],
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "network_sha256": network_sha256(net),
        "species": net.species().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "decomposition": {
            "implicit": dec.implicit,
            "blocks": blocks,
            "intersecting": names(net, &dec.intersecting),
        },
        "complex_balance": cert.balance.iter().map(|(s, b)| balance_json(s, b)).collect::<Vec<_>>(),
        "semilocking_sets": cert.records.iter().map(|r| record_json(net, r)).collect::<Vec<_>>(),
        "verdict": cert.verdict.label(),
        "conditional_on_complex_balance": cert.conditional,
        "verdict_text": cert.verdict_text(),
        "caveats": cert.caveats,
        "meta": {"tool_version": TOOL_VERSION},
    })
}

pub fn run_report_json(net: &ReactionNetwork, rep: &RunReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "network_sha256": network_sha256(net),
        "species": net.species().iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "conservation_drift": float_string(rep.conservation_drift),
        "lyapunov_reference": rep.lyapunov_reference.as_deref().map(floats),
        "lyapunov_series": rep.lyapunov_series.iter()
            .map(|&(t, v)| json!([float_string(t), float_string(v)]))
            .collect::<Vec<_>>(),
        "min_concentration": floats(&rep.min_concentration),
        "terminal_state": floats(&rep.terminal_state),
        "equilibrium_residual": float_string(rep.equilibrium_residual),
        "rounding_warnings": rep.rounding_warnings,
        "meta": {"tool_version": TOOL_VERSION},
    })
}

pub fn probe_json(net: &ReactionNetwork, probe: &ProbeSummary, seed: u64) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "network_sha256": network_sha256(net),
        "seed": seed,
        "floor": float_string(probe.floor),
        "floor_breached": probe.floor_breached,
        "min_concentration": float_string(probe.min_concentration),
        "trials": probe.trials.iter().map(|t| json!({
            "delays": floats(&t.delays),
            "history": floats(&t.history),
            "min_concentration": floats(&t.min_concentration),
            "terminal_state": floats(&t.terminal_state),
        })).collect::<Vec<_>>(),
        "meta": {"tool_version": TOOL_VERSION},
    })
}
