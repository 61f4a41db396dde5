pub mod deim;
pub mod error;
pub mod jacobian_approx;
pub mod linalg;
pub mod models;
pub mod persist;
pub mod pod;
pub mod rom;
pub mod snapshots;

pub use error::{Error, Result};

/// 64-bit FNV-1a hash, stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
