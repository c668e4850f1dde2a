//! Plain-text model file:
//!
//! ```text
//! svcmodel v1
//! convention=covered_if_decision_gt_threshold
//! gamma=...
//! C=...
//! bias=...
//! threshold=...
//! dim=...
//! norm_mean=a,b,...        (or `normalization=none`)
//! norm_scale=a,b,...
//! support_vectors=K
//! v1,...,vm,coef           (K lines)
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a reload reproduces
//! every decision value bit for bit.

use std::fmt::Write as _;

use super::SvcModel;
use crate::dataset::Normalization;
use crate::error::{Error, Result};

const MAGIC: &str = "svcmodel v1";
const CONVENTION: &str = "covered_if_decision_gt_threshold";

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub(super) fn to_text(m: &SvcModel) -> String {
    let mut s = String::new();
    let dim = m.dim().unwrap_or(0);
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "convention={CONVENTION}");
    let _ = writeln!(s, "gamma={:?}", m.gamma);
    let _ = writeln!(s, "C={:?}", m.penalty);
    let _ = writeln!(s, "bias={:?}", m.bias);
    let _ = writeln!(s, "threshold={:?}", m.decision_threshold);
    let _ = writeln!(s, "dim={dim}");
    match &m.normalization {
        Some(n) => {
            let _ = writeln!(s, "norm_mean={}", join(&n.mean));
            let _ = writeln!(s, "norm_scale={}", join(&n.scale));
        }
        None => {
            let _ = writeln!(s, "normalization=none");
        }
    }
    let _ = writeln!(s, "support_vectors={}", m.support_vectors.len());
    for (sv, c) in m.support_vectors.iter().zip(&m.dual_coefficients) {
        let _ = writeln!(s, "{},{c:?}", join(sv));
    }
    s
}

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("model: bad number `{s}`")))
}

fn nums(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(num).collect()
}

pub(super) fn from_text(text: &str) -> Result<SvcModel> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(Error::Parse(format!("model: missing `{MAGIC}` header")));
    }
    let mut gamma = None;
    let mut c = None;
    let mut bias = None;
    let mut threshold = None;
    let mut dim = None;
    let mut mean = None;
    let mut scale = None;
    let mut sv_count = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("model: expected key=value, got `{line}`")))?;
        match key {
            "convention" if value != CONVENTION => {
                return Err(Error::Parse(format!("model: unknown convention `{value}`")))
            }
            "convention" | "normalization" => {}
            "gamma" => gamma = Some(num(value)?),
            "C" => c = Some(num(value)?),
            "bias" => bias = Some(num(value)?),
            "threshold" => threshold = Some(num(value)?),
            "dim" => {
                dim = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("model: bad dim `{value}`")))?,
                )
            }
            "norm_mean" => mean = Some(nums(value)?),
            "norm_scale" => scale = Some(nums(value)?),
            "support_vectors" => {
                sv_count = Some(value.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("model: bad support vector count `{value}`"))
                })?);
                break;
            }
            other => return Err(Error::Parse(format!("model: unknown key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("model: missing `{k}`"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    let sv_count = sv_count.ok_or_else(|| missing("support_vectors"))?;
    let mut support_vectors = Vec::with_capacity(sv_count);
    let mut dual_coefficients = Vec::with_capacity(sv_count);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut v = nums(line)?;
        if v.len() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: v.len(),
            });
        }
        dual_coefficients.push(v.pop().expect("non-empty"));
        support_vectors.push(v);
    }
    if support_vectors.len() != sv_count {
        return Err(Error::Parse(format!(
            "model: expected {sv_count} support vectors, found {}",
            support_vectors.len()
        )));
    }
    let normalization = match (mean, scale) {
        (Some(mean), Some(scale)) if mean.len() == dim && scale.len() == dim => {
            Some(Normalization { mean, scale })
        }
        (None, None) => None,
        _ => return Err(Error::Parse("model: inconsistent normalization".into())),
    };
    Ok(SvcModel {
        support_vectors,
        dual_coefficients,
        bias: bias.ok_or_else(|| missing("bias"))?,
        gamma: gamma.ok_or_else(|| missing("gamma"))?,
        penalty: c.ok_or_else(|| missing("C"))?,
        decision_threshold: threshold.ok_or_else(|| missing("threshold"))?,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_normalization_and_infinite_threshold() {
        let m = SvcModel {
            support_vectors: vec![vec![0.1, -2.5e-7], vec![1.0 / 3.0, 4.0]],
            dual_coefficients: vec![0.75, -0.75],
            bias: -0.123456789012345,
            gamma: 2.0,
            penalty: 10.0,
            decision_threshold: f64::NEG_INFINITY,
            normalization: Some(Normalization {
                mean: vec![1.0, 2.0],
                scale: vec![0.5, 3.0],
            }),
        };
        let text = to_text(&m);
        assert!(text.starts_with("svcmodel v1\n"));
        assert_eq!(from_text(&text).unwrap(), m);
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_text("hello").is_err());
        assert!(from_text("svcmodel v1\ngamma=1\n").is_err());
        let bad_row = "svcmodel v1\ngamma=1\nC=1\nbias=0\nthreshold=0\ndim=2\nnormalization=none\nsupport_vectors=1\n1,2\n";
        assert!(from_text(bad_row).is_err());
    }
}
