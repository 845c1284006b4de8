//! Deterministic train/validation/test assignment by video identifier.
//!
//! The identifier is hashed with 64-bit FNV-1a, passed through the SplitMix64
//! finalizer to spread similar identifiers, and mapped to `[0, 1)`, so a
//! video always lands in the same split regardless of which other videos
//! are present.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn tag(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            val: 0.2,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0))
            || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "split ratios {}/{}/{} must be non-negative and sum to 1",
                self.train, self.val, self.test
            )));
        }
        Ok(())
    }

    pub fn assign(&self, video_id: &str) -> Split {
        let u = (mix64(fnv1a(video_id.as_bytes())) >> 11) as f64 / (1u64 << 53) as f64;
        if u < self.train {
            Split::Train
        } else if u < self.train + self.val {
            Split::Val
        } else {
            Split::Test
        }
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn proportions_roughly_match() {
        let r = SplitRatios::default();
        let mut counts = [0usize; 3];
        for i in 0..10_000 {
            counts[r.assign(&format!("vid{i:04}")) as usize] += 1;
        }
        assert!((counts[0] as f64 / 1e4 - 0.7).abs() < 0.02, "{counts:?}");
        assert!((counts[1] as f64 / 1e4 - 0.2).abs() < 0.02, "{counts:?}");
        assert!((counts[2] as f64 / 1e4 - 0.1).abs() < 0.02, "{counts:?}");
    }

    #[test]
    fn assignment_is_stable_and_validated() {
        let r = SplitRatios::default();
        assert_eq!(r.assign("driver-17"), r.assign("driver-17"));
        assert!(SplitRatios {
            train: 0.5,
            val: 0.2,
            test: 0.1
        }
        .validate()
        .is_err());
        assert_eq!(Split::from_tag("val"), Some(Split::Val));
    }
}
