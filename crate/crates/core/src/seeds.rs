//! Deterministic seed derivation: every random stream in the system is
//! split from one root seed by a named stream id and an index.

/// Stream ids.
pub mod stream {
    pub const MAP: u64 = 1;
    pub const OBSTACLES: u64 = 2;
    pub const WORLD: u64 = 3;
    pub const POLICY: u64 = 4;
    pub const WORKER: u64 = 5;
    pub const INIT: u64 = 6;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream` under `root`.
pub fn derive_seed(root: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ stream) ^ index)
}
