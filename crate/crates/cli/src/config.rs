//! Run configuration and argument parsers.

use std::path::{Path, PathBuf};

use harperlab_core::gauge::AlphaSpec;
use harperlab_core::model::{make_family, CustomFamily};
use harperlab_core::{CfExpansion, CoefficientFamily, FamilyKind, Fraction};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const DEFAULT_CACHE_DIR: &str = ".harperlab-cache";

/// A parsed `--model` argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    /// Canonical label; custom models are labelled by a hash of their file.
    pub label: String,
    pub lambda: Option<f64>,
    pub kind: FamilyKind,
}

impl ModelSpec {
    pub fn family(&self) -> anyhow::Result<CoefficientFamily> {
        Ok(make_family(self.kind.clone())?)
    }
}

pub fn parse_model(s: &str) -> Result<ModelSpec, String> {
    if let Some(path) = s.strip_prefix("custom:") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
        let custom = CustomFamily::from_json(&text).map_err(|e| e.to_string())?;
        let digest = hex::encode(Sha256::digest(text.as_bytes()));
        return Ok(ModelSpec { label: format!("custom:{}", &digest[..16]), lambda: None, kind: FamilyKind::Custom(custom) });
    }
    let kind = FamilyKind::parse_builtin(s).map_err(|e| e.to_string())?;
    let (label, lambda) = match &kind {
        FamilyKind::Amo { lambda } => (format!("amo:{lambda}"), Some(*lambda)),
        FamilyKind::ChiralAmo => ("chiral".to_string(), None),
        FamilyKind::ShiftedChiralAmo { alpha } => (format!("shifted-chiral:{alpha}"), None),
        FamilyKind::Custom(_) => unreachable!("custom models are handled above"),
    };
    Ok(ModelSpec { label, lambda, kind })
}

pub fn parse_fraction(s: &str) -> Result<Fraction, String> {
    s.parse::<Fraction>().map_err(|e| e.to_string())
}

pub fn parse_cf(s: &str) -> Result<CfExpansion, String> {
    s.parse::<CfExpansion>().map_err(|e| e.to_string())
}

pub fn parse_alpha_spec(s: &str) -> Result<AlphaSpec, String> {
    s.parse::<AlphaSpec>().map_err(|e| e.to_string())
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !(hi >= lo) {
        return Err(format!("need step > 0 and hi >= lo in {s:?}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + step * i as f64).collect())
}

/// Everything that determines a run's outputs. Serialized into file headers.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub args: Vec<String>,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub version: &'static str,
}

impl RunConfig {
    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Writes `contents` to `dir/sub/name`, creating directories as needed.
pub fn write_artifact(dir: &Path, sub: &str, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
    let d = dir.join(sub);
    std::fs::create_dir_all(&d)?;
    let path = d.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// Frequency for the cocycle: `p/q` stays exact, anything else is a real.
pub fn parse_alpha(s: &str) -> Result<harperlab_core::model::Alpha, String> {
    use harperlab_core::model::Alpha;
    let t = s.trim();
    if t.contains('/') {
        return parse_fraction(t).map(Alpha::Rational);
    }
    match t {
        "golden" | "silver" => Ok(Alpha::Real(parse_cf(t)?.value_f64())),
        _ => t.parse::<f64>().map(Alpha::Real).map_err(|e| format!("bad alpha {t:?}: {e}")),
    }
}
