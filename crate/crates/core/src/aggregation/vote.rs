use crate::domain::{BehaviorClass, ClipScores, ClipWindow, CLIP_SECONDS, STRIDE_SECONDS};
use crate::error::{Error, Result};

/// Windows covering one 2 s segment.
const SEGMENTS_PER_WINDOW: usize = (CLIP_SECONDS / STRIDE_SECONDS) as usize;

/// One 2 s cell of the segment grid with its majority-vote class.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// Grid index; the segment spans `[2·cell, 2·cell + 2)`.
    pub cell: usize,
    pub class: BehaviorClass,
    /// Argmax votes per class from the covering windows.
    pub votes: Vec<u32>,
    /// Summed softmax probability per class over the covering windows.
    pub mass: Vec<f64>,
}

impl Segment {
    pub fn start(&self) -> f64 {
        self.cell as f64 * STRIDE_SECONDS
    }

    /// A segment carrying only a class, for callers that already have labels.
    pub fn labeled(cell: usize, class: BehaviorClass) -> Self {
        Segment {
            cell,
            class,
            votes: Vec::new(),
            mass: Vec::new(),
        }
    }
}

/// Grid cell of a window start, or an error if the start is off the 2 s grid.
pub(crate) fn window_cell(index: usize, window: &ClipWindow) -> Result<usize> {
    let k = (window.start / STRIDE_SECONDS).round();
    if !window.start.is_finite()
        || window.start < 0.0
        || (k * STRIDE_SECONDS - window.start).abs() > 1e-9
    {
        return Err(Error::MisalignedWindow {
            index,
            start: window.start,
        });
    }
    Ok(k as usize)
}

/// Majority-votes the argmax class of every window covering each 2 s segment.
///
/// Ties on vote count go to the class with the highest summed softmax
/// probability, then to the lower class index. Per-class contributions are
/// summed in ascending order so equal multisets give bit-equal sums.
pub fn vote_segments(windows: &[ClipWindow], scores: &[ClipScores]) -> Result<Vec<Segment>> {
    if windows.len() != scores.len() {
        return Err(Error::Misaligned {
            windows: windows.len(),
            scores: scores.len(),
        });
    }
    let Some(first) = scores.first() else {
        return Ok(Vec::new());
    };
    let n_classes = first.class_logits.len();
    if n_classes == 0 {
        return Err(Error::Empty("class logits"));
    }

    let mut cells = Vec::with_capacity(windows.len());
    for (i, (w, s)) in windows.iter().zip(scores).enumerate() {
        if s.class_logits.len() != n_classes {
            return Err(Error::Dimension {
                what: "class logits",
                expected: n_classes,
                got: s.class_logits.len(),
            });
        }
        if s.class_logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("class logits"));
        }
        cells.push(window_cell(i, w)?);
    }
    let mut seen = cells.clone();
    seen.sort_unstable();
    if let Some(pos) = seen.windows(2).position(|p| p[0] == p[1]) {
        let dup = seen[pos];
        let index = cells.iter().rposition(|&c| c == dup).unwrap_or(0);
        return Err(Error::MisalignedWindow {
            index,
            start: windows[index].start,
        });
    }

    let n_cells = seen.last().map_or(0, |&k| k + SEGMENTS_PER_WINDOW);
    let mut votes = vec![vec![0u32; n_classes]; n_cells];
    let mut contrib: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n_classes]; n_cells];
    let mut covered = vec![false; n_cells];
    for (&k, s) in cells.iter().zip(scores) {
        let winner = s.argmax().index();
        let probs = s.softmax();
        for cell in k..k + SEGMENTS_PER_WINDOW {
            covered[cell] = true;
            votes[cell][winner] += 1;
            for (c, p) in probs.iter().enumerate() {
                contrib[cell][c].push(*p);
            }
        }
    }

    let mut segments = Vec::new();
    for cell in 0..n_cells {
        if !covered[cell] {
            continue;
        }
        let mass: Vec<f64> = contrib[cell]
            .iter_mut()
            .map(|ps| {
                ps.sort_by(|a, b| a.total_cmp(b));
                ps.iter().sum()
            })
            .collect();
        let v = &votes[cell];
        let mut best = 0;
        for c in 1..n_classes {
            if v[c] > v[best] || (v[c] == v[best] && mass[c] > mass[best]) {
                best = c;
            }
        }
        segments.push(Segment {
            cell,
            class: BehaviorClass(best),
            votes: votes[cell].clone(),
            mass,
        });
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logits_for(class: usize, n: usize) -> ClipScores {
        let mut l = vec![0.0; n];
        l[class] = 5.0;
        ClipScores {
            class_logits: l,
            p_start: 0.5,
            p_end: 0.5,
        }
    }

    fn windows(n: usize) -> Vec<ClipWindow> {
        (0..n)
            .map(|k| ClipWindow::new("v", 2.0 * k as f64).unwrap())
            .collect()
    }

    #[test]
    fn clear_mode_wins() {
        // Cell 3 is covered by windows 0..=3.
        let scores: Vec<_> = [2, 2, 1, 2].iter().map(|&c| logits_for(c, 3)).collect();
        let segs = vote_segments(&windows(4), &scores).unwrap();
        let s = segs.iter().find(|s| s.cell == 3).unwrap();
        assert_eq!(s.class, BehaviorClass(2));
        assert_eq!(s.votes, vec![0, 1, 3]);
        assert_eq!(segs.len(), 7);
    }

    #[test]
    fn tie_broken_by_summed_softmax() {
        // Two windows vote 2 with modest confidence, two vote 1 barely.
        let mk = |l: [f64; 3]| ClipScores {
            class_logits: l.to_vec(),
            p_start: 0.5,
            p_end: 0.5,
        };
        let scores = vec![
            mk([0.0, 0.0, 1.0]),
            mk([0.0, 0.0, 1.0]),
            mk([0.0, 0.2, 0.1]),
            mk([0.0, 0.2, 0.1]),
        ];
        let mass2: f64 = scores.iter().map(|s| s.softmax()[2]).sum();
        let mass1: f64 = scores.iter().map(|s| s.softmax()[1]).sum();
        assert!(mass2 > mass1);
        let segs = vote_segments(&windows(4), &scores).unwrap();
        let s = segs.iter().find(|s| s.cell == 3).unwrap();
        assert_eq!(s.votes[1], 2);
        assert_eq!(s.votes[2], 2);
        assert_eq!(s.class, BehaviorClass(2));
    }

    #[test]
    fn exact_tie_goes_to_lower_class() {
        let scores = vec![
            logits_for(0, 3),
            logits_for(0, 3),
            logits_for(2, 3),
            logits_for(2, 3),
        ];
        let segs = vote_segments(&windows(4), &scores).unwrap();
        let s = segs.iter().find(|s| s.cell == 3).unwrap();
        assert_eq!(s.mass[0].to_bits(), s.mass[2].to_bits());
        assert_eq!(s.class, BehaviorClass(0));
    }

    #[test]
    fn head_segment_single_window() {
        let segs = vote_segments(
            &windows(3),
            &[logits_for(1, 3), logits_for(2, 3), logits_for(2, 3)],
        )
        .unwrap();
        assert_eq!(segs[0].cell, 0);
        assert_eq!(segs[0].class, BehaviorClass(1));
        assert_eq!(segs[0].votes.iter().sum::<u32>(), 1);
    }

    #[test]
    fn misaligned_inputs_rejected() {
        let w = vec![ClipWindow::new("v", 1.0).unwrap()];
        assert!(matches!(
            vote_segments(&w, &[logits_for(0, 3)]),
            Err(Error::MisalignedWindow { index: 0, .. })
        ));
        assert!(matches!(
            vote_segments(&windows(2), &[logits_for(0, 3)]),
            Err(Error::Misaligned { .. })
        ));
        let dup = vec![
            ClipWindow::new("v", 2.0).unwrap(),
            ClipWindow::new("v", 2.0).unwrap(),
        ];
        assert!(vote_segments(&dup, &[logits_for(0, 3), logits_for(0, 3)]).is_err());
        assert!(vote_segments(&[], &[]).unwrap().is_empty());
    }
}
