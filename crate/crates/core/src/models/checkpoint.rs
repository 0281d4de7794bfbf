//! Plain-text checkpoints.
//!
//! ```text
//! # habcnn checkpoint v1
//! arch=te
//! embed_dim=50
//! ...
//! lr=0.05
//! tensor sentence_conv.weight 90 100
//! <one row per line, space-separated>
//! tensor sentence_conv.bias 90
//! <values>
//! end
//! ```
//!
//! Values use Rust's shortest round-trip exponent form, so reading back
//! reproduces every bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Arch, ModelConfig, ModelParams, PARAM_NAMES};
use crate::error::{Error, Result};

const MAGIC: &str = "# habcnn checkpoint v1";
const CONFIG_KEYS: [&str; 7] = [
    "arch",
    "embed_dim",
    "hidden",
    "sentence_width",
    "snippet_width",
    "k_sentence",
    "k_snippet",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    /// Free-form header entries such as the seed and hyperparameters.
    pub metadata: BTreeMap<String, String>,
}

pub fn write_checkpoint(params: &ModelParams, metadata: &BTreeMap<String, String>) -> String {
    let c = &params.config;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "arch={}", c.arch).unwrap();
    writeln!(out, "embed_dim={}", c.embed_dim).unwrap();
    writeln!(out, "hidden={}", c.hidden).unwrap();
    writeln!(out, "sentence_width={}", c.sentence_width).unwrap();
    writeln!(out, "snippet_width={}", c.snippet_width).unwrap();
    writeln!(out, "k_sentence={}", c.k_sentence).unwrap();
    writeln!(out, "k_snippet={}", c.k_snippet).unwrap();
    for (k, v) in metadata {
        assert!(
            !CONFIG_KEYS.contains(&k.as_str()),
            "metadata key {k} shadows a model field"
        );
        writeln!(out, "{k}={v}").unwrap();
    }
    for (name, t) in params.blocks.tensors() {
        let shape: Vec<String> = t.shape().iter().map(|d| d.to_string()).collect();
        writeln!(out, "tensor {name} {}", shape.join(" ")).unwrap();
        let row_len = *t.shape().last().unwrap();
        let flat: Vec<f64> = t.iter().copied().collect();
        for row in flat.chunks(row_len) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(" ")).unwrap();
        }
    }
    writeln!(out, "end").unwrap();
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

fn field<T: std::str::FromStr>(header: &BTreeMap<String, String>, key: &str) -> Result<T> {
    header
        .get(key)
        .ok_or_else(|| bad(format!("missing header field {key}")))?
        .parse()
        .map_err(|_| bad(format!("invalid value for {key}")))
}

pub fn read_checkpoint(text: &str) -> Result<Checkpoint> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(bad("missing checkpoint header line")),
    }
    let mut header = BTreeMap::new();
    while let Some((_, line)) = lines.peek() {
        if line.starts_with("tensor ") || line.trim() == "end" {
            break;
        }
        let (i, line) = lines.next().unwrap();
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected key=value", i + 1)))?;
        header.insert(k.trim().to_string(), v.trim().to_string());
    }

    let arch: Arch = header
        .get("arch")
        .ok_or_else(|| bad("missing header field arch"))?
        .parse()
        .map_err(|e: String| bad(e))?;
    let config = ModelConfig {
        arch,
        embed_dim: field(&header, "embed_dim")?,
        hidden: field(&header, "hidden")?,
        sentence_width: field(&header, "sentence_width")?,
        snippet_width: field(&header, "snippet_width")?,
        k_sentence: field(&header, "k_sentence")?,
        k_snippet: field(&header, "k_snippet")?,
    };
    if [
        config.embed_dim,
        config.hidden,
        config.sentence_width,
        config.snippet_width,
        config.k_sentence,
        config.k_snippet,
    ]
    .contains(&0)
    {
        return Err(bad("zero dimension in header"));
    }
    let mut params = ModelParams::zeros(config);

    let mut seen = 0;
    for (expected, (_, mut tensor)) in PARAM_NAMES.iter().zip(params.blocks.tensors_mut()) {
        let (i, line) = lines
            .next()
            .ok_or_else(|| bad(format!("missing tensor {expected}")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("tensor") || parts.next() != Some(*expected) {
            return Err(bad(format!("line {}: expected tensor {expected}", i + 1)));
        }
        let shape: Vec<usize> = parts
            .map(|p| p.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("line {}: bad shape", i + 1)))?;
        if shape != tensor.shape() {
            return Err(bad(format!(
                "tensor {expected}: shape {shape:?} does not match header {:?}",
                tensor.shape()
            )));
        }
        let row_len = *shape.last().unwrap();
        let rows = tensor.len() / row_len;
        let mut values = Vec::with_capacity(tensor.len());
        for _ in 0..rows {
            let (i, line) = lines
                .next()
                .ok_or_else(|| bad(format!("tensor {expected} truncated")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|p| p.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(format!("line {}: bad number", i + 1)))?;
            if row.len() != row_len {
                return Err(bad(format!(
                    "line {}: expected {row_len} values, found {}",
                    i + 1,
                    row.len()
                )));
            }
            values.extend(row);
        }
        for (dst, v) in tensor.iter_mut().zip(values) {
            *dst = v;
        }
        seen += 1;
    }
    debug_assert_eq!(seen, PARAM_NAMES.len());
    match lines.next() {
        Some((_, l)) if l.trim() == "end" => {}
        _ => return Err(bad("missing end marker")),
    }

    for k in CONFIG_KEYS {
        header.remove(k);
    }
    Ok(Checkpoint {
        params,
        metadata: header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small(arch: Arch) -> ModelConfig {
        ModelConfig {
            arch,
            embed_dim: 3,
            hidden: 4,
            sentence_width: 2,
            snippet_width: 2,
            k_sentence: 1,
            k_snippet: 3,
        }
    }

    #[test]
    fn round_trip_bit_exact() {
        let mut p = ModelParams::init(small(Arch::Qap), 9);
        p.blocks.highway.bias[0] = -0.0;
        p.blocks.highway.bias[1] = 1e-300;
        p.blocks.highway.bias[2] = f64::MAX;
        p.blocks.classifier.bias[5] = 0.1 + 0.2;
        let meta: BTreeMap<String, String> = [("seed".to_string(), "9".to_string())].into();
        let text = write_checkpoint(&p, &meta);
        let back = read_checkpoint(&text).unwrap();
        assert_eq!(back.metadata, meta);
        for ((_, a), (_, b)) in p
            .blocks
            .tensors()
            .iter()
            .zip(back.params.blocks.tensors().iter())
        {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(back.params.config, p.config);
    }

    #[test]
    fn corrupted_inputs_are_checkpoint_errors() {
        let p = ModelParams::init(small(Arch::Te), 1);
        let text = write_checkpoint(&p, &BTreeMap::new());
        let cases = [
            String::new(),
            text.replace("arch=te", "arch=xx"),
            text.replace("tensor highway.weight 4 4", "tensor highway.weight 4 5"),
            text.lines().take(20).collect::<Vec<_>>().join("\n"),
            text.replacen("e-1", "e-1x", 1),
            text.replace("end\n", ""),
        ];
        for c in cases {
            let err = read_checkpoint(&c).unwrap_err();
            assert!(matches!(err, Error::Checkpoint(_)));
            assert!(err.to_string().contains("checkpoint"));
        }
    }

    proptest! {
        #[test]
        fn any_finite_values_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 4)) {
            let mut p = ModelParams::zeros(small(Arch::Te));
            for (i, v) in vals.iter().enumerate() {
                p.blocks.snippet_conv.bias[i] = *v;
            }
            let back = read_checkpoint(&write_checkpoint(&p, &BTreeMap::new())).unwrap();
            for (a, b) in p.blocks.snippet_conv.bias.iter().zip(back.params.blocks.snippet_conv.bias.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
