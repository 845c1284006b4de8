use crate::error::{Error, Result};

/// Backbone features for one clip of one video.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRecord {
    pub video_id: String,
    pub window_index: usize,
    pub cabin: Vec<f64>,
    pub face: Vec<f64>,
}

/// Configured per-view feature lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureDims {
    pub cabin: usize,
    pub face: usize,
}

impl FeatureDims {
    pub fn new(cabin: usize, face: usize) -> Result<Self> {
        if cabin == 0 || face == 0 {
            return Err(Error::Config(format!(
                "feature dimensions must be >= 1 (cabin {cabin}, face {face})"
            )));
        }
        Ok(FeatureDims { cabin, face })
    }
}

/// Which camera views feed the head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ViewMode {
    #[default]
    TwoView,
    Cabin,
    Face,
}

impl ViewMode {
    pub fn input_dim(self, dims: FeatureDims) -> usize {
        match self {
            ViewMode::TwoView => dims.cabin + dims.face,
            ViewMode::Cabin => dims.cabin,
            ViewMode::Face => dims.face,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ViewMode::TwoView => "two-view",
            ViewMode::Cabin => "cabin",
            ViewMode::Face => "face",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "two-view" => Some(ViewMode::TwoView),
            "cabin" => Some(ViewMode::Cabin),
            "face" => Some(ViewMode::Face),
            _ => None,
        }
    }
}

/// Head input for `record`: cabin then face features, or a single view.
pub fn stack_features(
    record: &FeatureRecord,
    dims: FeatureDims,
    view: ViewMode,
) -> Result<Vec<f64>> {
    if record.cabin.len() != dims.cabin {
        return Err(Error::Dimension {
            what: "cabin features",
            expected: dims.cabin,
            got: record.cabin.len(),
        });
    }
    if record.face.len() != dims.face {
        return Err(Error::Dimension {
            what: "face features",
            expected: dims.face,
            got: record.face.len(),
        });
    }
    let stacked = match view {
        ViewMode::TwoView => {
            let mut v = Vec::with_capacity(dims.cabin + dims.face);
            v.extend_from_slice(&record.cabin);
            v.extend_from_slice(&record.face);
            v
        }
        ViewMode::Cabin => record.cabin.clone(),
        ViewMode::Face => record.face.clone(),
    };
    if stacked.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("features"));
    }
    Ok(stacked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(cabin: &[f64], face: &[f64]) -> FeatureRecord {
        FeatureRecord {
            video_id: "v".into(),
            window_index: 0,
            cabin: cabin.to_vec(),
            face: face.to_vec(),
        }
    }

    #[test]
    fn concatenates_cabin_then_face() {
        let dims = FeatureDims::new(2, 1).unwrap();
        assert_eq!(
            stack_features(&rec(&[1.0, 2.0], &[3.0]), dims, ViewMode::TwoView).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            stack_features(&rec(&[1.0, 2.0], &[3.0]), dims, ViewMode::Cabin).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            stack_features(&rec(&[1.0, 2.0], &[3.0]), dims, ViewMode::Face).unwrap(),
            vec![3.0]
        );
    }

    #[test]
    fn empty_cabin_rejected() {
        assert!(FeatureDims::new(0, 1).is_err());
        let dims = FeatureDims::new(1, 1).unwrap();
        assert!(matches!(
            stack_features(&rec(&[], &[5.0]), dims, ViewMode::TwoView),
            Err(Error::Dimension {
                what: "cabin features",
                ..
            })
        ));
    }
}
