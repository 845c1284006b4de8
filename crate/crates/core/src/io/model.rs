//! Model file: a `key = value` header followed by one `[block]` per
//! parameter block, weights first and momentum buffers after. Values use
//! the shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use crate::classifier::{
    FeatureDims, HeadParameters, HeadWeights, TrainConfig, ViewMode, BLOCK_NAMES,
};
use crate::domain::ClassScheme;
use crate::error::{Error, Result};
use crate::io::{read_text, write_atomic};

const MAGIC: &str = "# phoneloc head v1";

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub scheme: ClassScheme,
    pub dims: FeatureDims,
    pub view: ViewMode,
    pub config: TrainConfig,
    pub params: HeadParameters,
}

pub fn render_model(m: &ModelFile) -> String {
    let mut out = String::new();
    let c = &m.config;
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "n_classes = {}", m.scheme.n_classes());
    let _ = writeln!(out, "cabin_dim = {}", m.dims.cabin);
    let _ = writeln!(out, "face_dim = {}", m.dims.face);
    let _ = writeln!(out, "view = {}", m.view.tag());
    let _ = writeln!(out, "input_dim = {}", m.params.weights.dim);
    let _ = writeln!(out, "learning_rate = {:e}", c.learning_rate);
    let _ = writeln!(out, "momentum = {:e}", c.momentum);
    let _ = writeln!(out, "weight_decay = {:e}", c.weight_decay);
    let _ = writeln!(out, "epochs = {}", c.epochs);
    let _ = writeln!(out, "lr_step = {}", c.lr_step);
    let _ = writeln!(out, "lr_factor = {:e}", c.lr_factor);
    let _ = writeln!(out, "batch_size = {}", c.batch_size);
    let _ = writeln!(out, "lambda = {:e}", c.lambda);
    let _ = writeln!(out, "seed = {}", c.seed);
    for (prefix, w) in [("", &m.params.weights), ("momentum.", &m.params.momentum)] {
        for (name, block) in BLOCK_NAMES.iter().zip(w.blocks()) {
            let _ = writeln!(out, "[{prefix}{name}]");
            let row_len = if *name == "w_cls" {
                w.dim
            } else {
                block.len().max(1)
            };
            for row in block.chunks(row_len.max(1)) {
                let vals: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(out, "{}", vals.join(" "));
            }
        }
    }
    out
}

pub fn parse_model(path: &Path, text: &str) -> Result<ModelFile> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        record: line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(err(1, format!("missing '{MAGIC}' header"))),
    }

    let mut header: Vec<(usize, String, String)> = Vec::new();
    let mut blocks: Vec<(usize, String, Vec<f64>)> = Vec::new();
    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            blocks.push((no, name.to_string(), Vec::new()));
        } else if let Some((_, _, vals)) = blocks.last_mut() {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|e| err(no, format!("'{tok}': {e}")))?;
                if !v.is_finite() {
                    return Err(err(no, "non-finite parameter".into()));
                }
                vals.push(v);
            }
        } else {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(no, "expected key = value".into()))?;
            header.push((no, k.trim().to_string(), v.trim().to_string()));
        }
    }

    let get = |key: &str| -> Result<(usize, &str)> {
        header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(no, _, v)| (*no, v.as_str()))
            .ok_or_else(|| err(0, format!("missing header key '{key}'")))
    };
    fn num<T: std::str::FromStr>(
        v: (usize, &str),
        err: &dyn Fn(usize, String) -> Error,
    ) -> Result<T> {
        v.1.parse()
            .map_err(|_| err(v.0, format!("bad value '{}'", v.1)))
    }
    let e = &err;
    let scheme = ClassScheme::from_count(num(get("n_classes")?, e)?)?;
    let dims = FeatureDims::new(num(get("cabin_dim")?, e)?, num(get("face_dim")?, e)?)?;
    let (vno, vtag) = get("view")?;
    let view =
        ViewMode::from_tag(vtag).ok_or_else(|| err(vno, format!("unknown view '{vtag}'")))?;
    let dim: usize = num(get("input_dim")?, e)?;
    if dim != view.input_dim(dims) {
        return Err(err(
            0,
            format!("input_dim {dim} inconsistent with view {vtag}"),
        ));
    }
    let config = TrainConfig {
        learning_rate: num(get("learning_rate")?, e)?,
        momentum: num(get("momentum")?, e)?,
        weight_decay: num(get("weight_decay")?, e)?,
        epochs: num(get("epochs")?, e)?,
        lr_step: num(get("lr_step")?, e)?,
        lr_factor: num(get("lr_factor")?, e)?,
        batch_size: num(get("batch_size")?, e)?,
        lambda: num(get("lambda")?, e)?,
        seed: num(get("seed")?, e)?,
    };

    let n = scheme.n_classes();
    let mut weights = HeadWeights::zeros(n, dim);
    let mut momentum = HeadWeights::zeros(n, dim);
    let expected: Vec<String> = BLOCK_NAMES
        .iter()
        .map(|b| b.to_string())
        .chain(BLOCK_NAMES.iter().map(|b| format!("momentum.{b}")))
        .collect();
    if blocks.len() != expected.len() {
        return Err(err(
            0,
            format!(
                "expected {} parameter blocks, found {}",
                expected.len(),
                blocks.len()
            ),
        ));
    }
    let targets = weights
        .blocks_mut()
        .into_iter()
        .chain(momentum.blocks_mut());
    for (((no, name, vals), want), dst) in blocks.into_iter().zip(&expected).zip(targets) {
        if &name != want {
            return Err(err(no, format!("block '{name}', expected '{want}'")));
        }
        if vals.len() != dst.len() {
            return Err(err(
                no,
                format!(
                    "block '{name}' has {} values, expected {}",
                    vals.len(),
                    dst.len()
                ),
            ));
        }
        dst.copy_from_slice(&vals);
    }
    Ok(ModelFile {
        scheme,
        dims,
        view,
        config,
        params: HeadParameters { weights, momentum },
    })
}

pub fn write_model(path: &Path, m: &ModelFile) -> Result<()> {
    write_atomic(path, render_model(m).as_bytes())
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    parse_model(path, &read_text(path)?)
}
