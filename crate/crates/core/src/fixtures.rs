//! Small reference networks shipped with the crate.

use crate::network::{parse_network, ReactionNetwork};

pub const NET_AB: &str = include_str!("../fixtures/net_ab.crn");
pub const NET_TRIO: &str = include_str!("../fixtures/net_trio.crn");
pub const NET_TRIO_SPLIT: &str = include_str!("../fixtures/net_trio_split.crn");
pub const NET_EDEL: &str = include_str!("../fixtures/net_edel.crn");
pub const NET_COMB_OPEN: &str = include_str!("../fixtures/net_comb_open.crn");
pub const NET_CHAIN: &str = include_str!("../fixtures/net_chain.crn");
pub const NET_SEMI: &str = include_str!("../fixtures/net_semi.crn");
pub const A_TO_B: &str = include_str!("../fixtures/a_to_b.crn");

pub const ALL: &[(&str, &str)] = &[
    ("net_ab", NET_AB),
    ("net_trio", NET_TRIO),
    ("net_trio_split", NET_TRIO_SPLIT),
    ("net_edel", NET_EDEL),
    ("net_comb_open", NET_COMB_OPEN),
    ("net_chain", NET_CHAIN),
    ("net_semi", NET_SEMI),
    ("a_to_b", A_TO_B),
];

fn load(text: &str) -> ReactionNetwork {
    parse_network(text).expect("bundled fixture parses")
}

pub fn net_ab() -> ReactionNetwork {
    load(NET_AB)
}

pub fn net_trio() -> ReactionNetwork {
    load(NET_TRIO)
}

pub fn net_trio_split() -> ReactionNetwork {
    load(NET_TRIO_SPLIT)
}

pub fn net_edel() -> ReactionNetwork {
    load(NET_EDEL)
}

pub fn net_comb_open() -> ReactionNetwork {
    load(NET_COMB_OPEN)
}

pub fn net_chain() -> ReactionNetwork {
    load(NET_CHAIN)
}

pub fn net_semi() -> ReactionNetwork {
    load(NET_SEMI)
}

pub fn a_to_b() -> ReactionNetwork {
    load(A_TO_B)
}
