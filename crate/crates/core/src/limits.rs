//! Process-wide enumeration cap.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default bound on the number of words any enumeration may visit.
pub const DEFAULT_ENUM_CAP: u64 = 1 << 26;

static ENUM_CAP: AtomicU64 = AtomicU64::new(DEFAULT_ENUM_CAP);

pub fn enum_cap() -> u64 {
    ENUM_CAP.load(Ordering::Relaxed)
}

pub fn set_enum_cap(cap: u64) {
    ENUM_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Refuses when `base^exp` exceeds the cap.
pub fn check_power(what: &str, base: usize, exp: usize) -> Result<()> {
    let needed = (base as f64).powi(exp as i32);
    let cap = enum_cap();
    if needed > cap as f64 {
        return Err(Error::CapExceeded {
            what: what.to_string(),
            needed,
            cap,
        });
    }
    Ok(())
}
