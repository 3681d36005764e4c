//! One global seed fans out to per-stage seeds through a fixed name hash,
//! so each stage is independently reproducible.

/// FNV-1a over the stage name, mixed into the global seed.
pub fn stage_seed(global: u64, stage: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stage.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    global ^ h
}
