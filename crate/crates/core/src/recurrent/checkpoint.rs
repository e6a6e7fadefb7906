//! Text checkpoints. Floats are written in shortest round-trip form, so a
//! save/load cycle reproduces every parameter bit for bit.
//!
//! ```text
//! orderless-checkpoint 1
//! cell lstm
//! activation tanh
//! hidden 100
//! embed 16
//! layers 1
//! vocab anonymized            (or: vocab labeled A B C ...)
//! calibration <shift> <scale>
//! params <count>
//! <one value per line, in buffer order>
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use super::{Activation, CellKind, ModelConfig, ModelError, RecurrentModel};
use crate::codec::{VocabMode, Vocabulary};

pub const CHECKPOINT_MAGIC: &str = "orderless-checkpoint 1";

pub fn write_checkpoint(model: &RecurrentModel, mut out: impl Write) -> Result<(), ModelError> {
    let cfg = model.config();
    writeln!(out, "{CHECKPOINT_MAGIC}")?;
    writeln!(out, "cell {}", cfg.cell.name())?;
    writeln!(out, "activation {}", cfg.activation.name())?;
    writeln!(out, "hidden {}", cfg.hidden_width)?;
    writeln!(out, "embed {}", cfg.embed_width)?;
    writeln!(out, "layers {}", cfg.layers)?;
    match model.vocab().mode() {
        VocabMode::Anonymized => writeln!(out, "vocab anonymized")?,
        VocabMode::Labeled => writeln!(out, "vocab labeled {}", model.vocab().symbols().join(" "))?,
    }
    let (shift, scale) = model.output_calibration();
    writeln!(out, "calibration {shift:?} {scale:?}")?;
    writeln!(out, "params {}", model.param_count())?;
    for p in model.params() {
        writeln!(out, "{p:?}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_checkpoint(model: &RecurrentModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let file = std::fs::File::create(path)?;
    write_checkpoint(model, std::io::BufWriter::new(file))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<RecurrentModel, ModelError> {
    let file = std::fs::File::open(path)?;
    read_checkpoint(std::io::BufReader::new(file))
}

pub fn read_checkpoint(input: impl BufRead) -> Result<RecurrentModel, ModelError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |expect: &str| -> Result<(usize, Vec<String>), ModelError> {
        let (no, line) = lines.next().ok_or(ModelError::Checkpoint {
            line: 0,
            message: format!("unexpected end of file, wanted {expect}"),
        })?;
        let line = line?;
        let fields: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if expect != "value" && fields.first().map(String::as_str) != Some(expect) {
            return Err(ModelError::Checkpoint {
                line: no,
                message: format!("expected `{expect}`"),
            });
        }
        Ok((no, fields))
    };
    let bad = |line: usize, message: &str| ModelError::Checkpoint {
        line,
        message: message.to_string(),
    };
    let (no, magic) = next("orderless-checkpoint")?;
    if magic.join(" ") != CHECKPOINT_MAGIC {
        return Err(bad(no, "unsupported checkpoint version"));
    }
    let single = |(no, f): (usize, Vec<String>)| -> Result<(usize, String), ModelError> {
        match f.as_slice() {
            [_, v] => Ok((no, v.clone())),
            _ => Err(bad(no, "expected exactly one value")),
        }
    };
    let count = |(no, v): (usize, String)| v.parse::<usize>().map_err(|_| bad(no, "expected an integer"));

    let (no, cell) = single(next("cell")?)?;
    let cell = CellKind::parse(&cell).ok_or_else(|| bad(no, "unknown cell kind"))?;
    let (no, act) = single(next("activation")?)?;
    let activation = Activation::parse(&act).ok_or_else(|| bad(no, "unknown activation"))?;
    let hidden_width = count(single(next("hidden")?)?)?;
    let embed_width = count(single(next("embed")?)?)?;
    let layers = count(single(next("layers")?)?)?;
    let (no, vocab) = next("vocab")?;
    let vocab = match vocab.get(1).map(String::as_str) {
        Some("anonymized") if vocab.len() == 2 => Vocabulary::anonymized(),
        Some("labeled") => Vocabulary::labeled(vocab[2..].iter().cloned()).map_err(|e| bad(no, &e.to_string()))?,
        _ => return Err(bad(no, "bad vocabulary line")),
    };
    let (no, cal) = next("calibration")?;
    let float = |no: usize, s: &str| s.parse::<f64>().map_err(|_| bad(no, "expected a number"));
    let (shift, scale) = match cal.as_slice() {
        [_, a, b] => (float(no, a)?, float(no, b)?),
        _ => return Err(bad(no, "expected shift and scale")),
    };
    let cfg = ModelConfig {
        cell,
        hidden_width,
        embed_width,
        layers,
        activation,
    };
    let mut model = RecurrentModel::zeros(cfg, vocab)?;
    model.set_output_calibration(shift, scale);
    let (no, n) = single(next("params")?)?;
    let n = count((no, n))?;
    if n != model.param_count() {
        return Err(bad(no, &format!("parameter count {n} does not match shape ({})", model.param_count())));
    }
    for i in 0..n {
        let (no, f) = next("value")?;
        match f.as_slice() {
            [v] => model.params_mut()[i] = float(no, v)?,
            _ => return Err(bad(no, "expected one value")),
        }
    }
    if let Ok((no, f)) = next("value") {
        if !f.is_empty() {
            return Err(bad(no, "trailing data"));
        }
    }
    Ok(model)
}
