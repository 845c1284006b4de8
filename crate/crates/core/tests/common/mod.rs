//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the library code it checks.

#![allow(dead_code)]

use phoneloc::aggregation::Segment;
use phoneloc::classifier::{Example, HeadWeights};
use phoneloc::domain::{BehaviorClass, Chunk, ClipLabels};
use phoneloc::rng::SimRng;

/// Cells per second of the segment grid.
const CELL: f64 = 2.0;

/// Random segment sequence of length 0..=max_len over `n_classes`, with a
/// bias towards repeating the previous class so runs and short gaps appear.
pub fn random_segments(rng: &mut SimRng, max_len: usize, n_classes: usize) -> Vec<Segment> {
    let len = rng.int_inclusive(0, max_len as u64) as usize;
    let mut prev = 0usize;
    (0..len)
        .map(|cell| {
            if rng.bernoulli(0.45) {
                prev = rng.below(n_classes as u64) as usize;
            }
            Segment::labeled(cell, BehaviorClass(prev))
        })
        .collect()
}

/// Cell-level reference aggregation.
///
/// Chunks are sets of cells. Steps run to a fixpoint in whatever order pairs
/// are found, which is valid only if the rules are order independent.
/// `blocking` holds peak times; a gap `(a, b)` is blocked when some time `t`
/// satisfies `a < t < b`.
pub fn oracle_aggregate(classes: &[usize], gap_seconds: f64, blocking: &[f64]) -> Vec<Chunk> {
    let n = classes.len();
    let mut spans: Vec<(usize, usize, usize)> = Vec::new(); // (class, start, end)
                                                            // Step 1: every maximal run, found by checking both ends explicitly.
    for c in 1..=classes.iter().copied().max().unwrap_or(0) {
        for s in 0..n {
            if classes[s] != c || (s > 0 && classes[s - 1] == c) {
                continue;
            }
            let mut e = s;
            while e < n && classes[e] == c {
                e += 1;
            }
            spans.push((c, s, e));
        }
    }
    // Step 2: merge any two same-class chunks with nothing of that class
    // between them and a short, unblocked gap, until nothing changes.
    loop {
        let mut merged = None;
        'search: for i in 0..spans.len() {
            for j in 0..spans.len() {
                let (ci, si, ei) = spans[i];
                let (cj, sj, ej) = spans[j];
                if i == j || ci != cj || ei > sj {
                    continue;
                }
                let between = spans.iter().any(|&(c, s, _)| c == ci && s >= ei && s < sj);
                let gap = (sj - ei) as f64 * CELL;
                let (a, b) = (ei as f64 * CELL, sj as f64 * CELL);
                let blocked = blocking.iter().any(|&t| a < t && t < b);
                if !between && gap <= gap_seconds && !blocked {
                    merged = Some((i, j, (ci, si, ej)));
                    break 'search;
                }
            }
        }
        match merged {
            Some((i, j, span)) => {
                spans[i] = span;
                spans.remove(j);
            }
            None => break,
        }
    }
    // Step 3a: drop chunks covered by a longer one (identical spans: lower class stays).
    let cells = |&(_, s, e): &(usize, usize, usize)| -> Vec<usize> { (s..e).collect() };
    let covers = |y: &(usize, usize, usize), x: &(usize, usize, usize)| y.1 <= x.1 && x.2 <= y.2;
    let survivors: Vec<(usize, usize, usize)> = spans
        .iter()
        .filter(|x| {
            !spans.iter().any(|y| {
                y != *x
                    && covers(y, x)
                    && ((y.2 - y.1) > (x.2 - x.1) || (y.2 - y.1 == x.2 - x.1 && y.0 < x.0))
            })
        })
        .copied()
        .collect();
    // Step 3b: remove every cell claimed by more than one survivor.
    let mut claims = vec![0usize; n + 1];
    for s in &survivors {
        for c in cells(s) {
            claims[c] += 1;
        }
    }
    let mut out = Vec::new();
    for s in &survivors {
        let kept: Vec<usize> = cells(s).into_iter().filter(|&c| claims[c] == 1).collect();
        // Emit maximal runs of kept cells.
        let mut i = 0;
        while i < kept.len() {
            let mut j = i;
            while j + 1 < kept.len() && kept[j + 1] == kept[j] + 1 {
                j += 1;
            }
            out.push(
                Chunk::new(
                    BehaviorClass(s.0),
                    kept[i] as f64 * CELL,
                    (kept[j] + 1) as f64 * CELL,
                )
                .unwrap(),
            );
            i = j + 1;
        }
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.class.cmp(&b.class)));
    out
}

/// Segments reconstructed from chunks over `len` cells; uncovered cells are class 0.
pub fn expand_chunks(chunks: &[Chunk], len: usize) -> Vec<Segment> {
    let mut classes = vec![0usize; len];
    for c in chunks {
        let (s, e) = ((c.start / CELL) as usize, (c.end / CELL) as usize);
        for cell in classes.iter_mut().take(e).skip(s) {
            *cell = c.class.index();
        }
    }
    classes
        .into_iter()
        .enumerate()
        .map(|(i, c)| Segment::labeled(i, BehaviorClass(c)))
        .collect()
}

/// Confusion-free recount of one curve point: (tpr, fpr, precision).
pub fn recount(scores: &[f64], truths: &[bool], threshold: f64) -> (f64, f64, f64) {
    let (mut tp, mut fp, mut fnn, mut tn) = (0u32, 0u32, 0u32, 0u32);
    for (&s, &t) in scores.iter().zip(truths) {
        match (s >= threshold, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fnn += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    (
        tp as f64 / (tp + fnn) as f64,
        fp as f64 / (fp + tn) as f64,
        precision,
    )
}

/// Violations of the retained-peak properties on one score sequence on the
/// 2 s window grid; empty when all hold.
pub fn peak_violations(values: &[f64], kept: &[usize], min_sep: f64, theta: f64) -> Vec<String> {
    let mut bad = Vec::new();
    let start = |i: usize| i as f64 * CELL;
    for (a, &i) in kept.iter().enumerate() {
        if values[i] < theta {
            bad.push(format!("peak {i} below theta"));
        }
        let left = if i == 0 {
            f64::NEG_INFINITY
        } else {
            values[i - 1]
        };
        let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if !(values[i] > left && values[i] > right) {
            bad.push(format!("peak {i} is not a strict local maximum"));
        }
        for &j in &kept[a + 1..] {
            if (start(j) - start(i)).abs() <= min_sep {
                bad.push(format!("peaks {i} and {j} within {min_sep} s"));
            }
        }
    }
    // Every strict local maximum at or above theta that was dropped must lie
    // within the separation of a kept peak at least as high.
    for i in 0..values.len() {
        let left = if i == 0 {
            f64::NEG_INFINITY
        } else {
            values[i - 1]
        };
        let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        let is_max = values[i] > left && values[i] > right;
        if is_max && values[i] >= theta && !kept.contains(&i) {
            let suppressed = kept
                .iter()
                .any(|&k| (start(k) - start(i)).abs() <= min_sep && values[k] >= values[i]);
            if !suppressed {
                bad.push(format!(
                    "local maximum {i} dropped without a higher neighbour"
                ));
            }
        }
    }
    bad
}

/// Mean loss written out from the loss definitions, parameters passed flat.
pub fn reference_loss(
    n_classes: usize,
    dim: usize,
    theta: &[f64],
    data: &[Example],
    lambda: f64,
) -> f64 {
    let eps = 1e-7;
    let w = &theta[..n_classes * dim];
    let b = &theta[n_classes * dim..n_classes * dim + n_classes];
    let off = n_classes * dim + n_classes;
    let ws = &theta[off..off + dim];
    let bs = theta[off + dim];
    let we = &theta[off + dim + 1..off + 2 * dim + 1];
    let be = theta[off + 2 * dim + 1];
    let sig = |z: f64| 1.0 / (1.0 + (-z).exp());
    let bce = |p: f64, y: bool| {
        let p = p.clamp(eps, 1.0 - eps);
        if y {
            -p.ln()
        } else {
            -(1.0 - p).ln()
        }
    };
    let mut total = 0.0;
    for ex in data {
        let x = &ex.features;
        let z: Vec<f64> = (0..n_classes)
            .map(|k| (0..dim).map(|d| w[k * dim + d] * x[d]).sum::<f64>() + b[k])
            .collect();
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        let ClipLabels {
            class,
            start_inclusion,
            end_inclusion,
        } = ex.labels;
        let mut loss = lse - z[class.index()];
        if class.index() >= 1 {
            let ps = sig((0..dim).map(|d| ws[d] * x[d]).sum::<f64>() + bs);
            let pe = sig((0..dim).map(|d| we[d] * x[d]).sum::<f64>() + be);
            loss += lambda * 0.5 * (bce(ps, start_inclusion) + bce(pe, end_inclusion));
        }
        total += loss;
    }
    total / data.len() as f64
}

/// Parameters flattened in block order.
pub fn flatten(w: &HeadWeights) -> Vec<f64> {
    w.blocks().iter().flat_map(|b| b.iter().copied()).collect()
}

/// Block lengths in block order.
pub fn block_lengths(w: &HeadWeights) -> Vec<usize> {
    w.blocks().iter().map(|b| b.len()).collect()
}

/// Random head and batch for derivative checks.
pub fn random_instance(seed: u64) -> (HeadWeights, Vec<Example>) {
    let mut rng = SimRng::new(seed);
    let n_classes = 3 + rng.below(2) as usize;
    let dim = 2 + rng.below(6) as usize;
    let mut w = HeadWeights::init(n_classes, dim, seed);
    for b in w.b_cls.iter_mut() {
        *b = rng.range(-0.5, 0.5);
    }
    w.b_start = rng.range(-0.5, 0.5);
    w.b_end = rng.range(-0.5, 0.5);
    let batch = (0..1 + rng.below(8) as usize)
        .map(|_| Example {
            features: (0..dim).map(|_| rng.normal()).collect(),
            labels: ClipLabels {
                class: BehaviorClass(rng.below(n_classes as u64) as usize),
                start_inclusion: rng.bernoulli(0.5),
                end_inclusion: rng.bernoulli(0.5),
            },
        })
        .collect();
    (w, batch)
}

/// Largest per-block relative error between an analytic gradient and
/// central differences of [`reference_loss`] with step `h`.
///
/// Entry error is `|a - n| / max(|a|, |n|)`; entries where both are below
/// `1e-10` count as exact.
pub fn gradient_check(
    w: &HeadWeights,
    analytic: &HeadWeights,
    batch: &[Example],
    lambda: f64,
    h: f64,
) -> Vec<f64> {
    let theta = flatten(w);
    let grad = flatten(analytic);
    let mut out = Vec::new();
    let mut offset = 0;
    for len in block_lengths(w) {
        let mut worst: f64 = 0.0;
        for i in offset..offset + len {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[i] += h;
            minus[i] -= h;
            let numeric = (reference_loss(w.n_classes, w.dim, &plus, batch, lambda)
                - reference_loss(w.n_classes, w.dim, &minus, batch, lambda))
                / (2.0 * h);
            let a = grad[i];
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-10 {
                worst = worst.max((a - numeric).abs() / scale);
            }
        }
        out.push(worst);
        offset += len;
    }
    out
}
