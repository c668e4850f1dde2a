//! Per-stage seeds: the first 8 bytes (little endian) of
//! `SHA-256(master_seed_le || stage_name)`.

use sha2::{Digest, Sha256};

pub fn derive_seed(master: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

pub const RADIO: &str = "radio";
pub const RECEIVERS: &str = "receivers";
pub const SPLIT: &str = "split";
pub const CV: &str = "cv";
pub const PRM_INITIAL: &str = "prm.initial";
pub const PRM_REPLAN: &str = "prm.replan";

pub const STAGES: [&str; 6] = [RADIO, RECEIVERS, SPLIT, CV, PRM_INITIAL, PRM_REPLAN];

/// Roadmap seed of one sweep repetition; shared by every look-ahead value.
pub fn sweep_seed(master: u64, nodes: usize, d_max: f64, repetition: usize) -> u64 {
    derive_seed(master, &format!("sweep/{nodes}/{d_max}/{repetition}"))
}
