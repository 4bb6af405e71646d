use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Result};
use serde::Serialize;
use skmmse::{Method, Profile};

/// How the loss mask of each image is obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSpec {
    Dispersed,
    Random,
    /// Read from a mask file (255 = available, 0 = lost).
    Mask(PathBuf),
}

impl FromStr for PatternSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dispersed" => Ok(PatternSpec::Dispersed),
            "random" => Ok(PatternSpec::Random),
            _ => match s.strip_prefix("mask:") {
                Some(path) if !path.is_empty() => Ok(PatternSpec::Mask(path.into())),
                _ => Err(format!("unknown pattern `{s}` (expected dispersed, random or mask:<path>)")),
            },
        }
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::Dispersed => f.write_str("dispersed"),
            PatternSpec::Random => f.write_str("random"),
            PatternSpec::Mask(p) => write!(f, "mask:{}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Brl,
    Idl,
    Hql,
    /// Alias for scalable concealment with the HQL-only sentinel thresholds.
    Kmmse,
    Skmmse,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Brl => "brl",
            MethodKind::Idl => "idl",
            MethodKind::Hql => "hql",
            MethodKind::Kmmse => "kmmse",
            MethodKind::Skmmse => "skmmse",
        }
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "brl" => Ok(MethodKind::Brl),
            "idl" => Ok(MethodKind::Idl),
            "hql" => Ok(MethodKind::Hql),
            "kmmse" | "k-mmse" => Ok(MethodKind::Kmmse),
            "skmmse" | "sk-mmse" => Ok(MethodKind::Skmmse),
            _ => Err(format!("unknown method `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format `{s}`")),
        }
    }
}

/// One concrete concealment setting run over every input image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MethodRun {
    pub kind: MethodKind,
    pub profile: Option<Profile>,
}

impl MethodRun {
    pub fn method(&self) -> Method {
        match self.kind {
            MethodKind::Brl => Method::Brl,
            MethodKind::Idl => Method::Idl,
            MethodKind::Hql => Method::Hql,
            MethodKind::Kmmse => Method::kmmse(),
            MethodKind::Skmmse => Method::Scalable(self.profile.expect("validated")),
        }
    }

    /// Short label used in file names and report rows.
    pub fn label(&self) -> String {
        match (self.kind, self.profile) {
            (MethodKind::Skmmse, Some(p)) => format!("skmmse-{}", p.name),
            (kind, _) => kind.as_str().to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub pattern: PatternSpec,
    pub rate: f64,
    pub seed: u64,
    pub methods: Vec<MethodKind>,
    pub profiles: Vec<Profile>,
    pub out_dir: PathBuf,
    pub report: ReportFormat,
    pub psnr_lost_only: bool,
    pub layer_map: bool,
    pub parallel: bool,
    pub timing_strict: bool,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            inputs,
            pattern: PatternSpec::Dispersed,
            rate: 0.25,
            seed: 1,
            methods: vec![MethodKind::Skmmse],
            profiles: vec![Profile::EFFICIENT],
            out_dir: out_dir.into(),
            report: ReportFormat::Json,
            psnr_lost_only: false,
            layer_map: false,
            parallel: false,
            timing_strict: false,
        }
    }

    /// Expands methods and profiles into the runs to perform, in order.
    pub fn runs(&self) -> Result<Vec<MethodRun>> {
        if self.methods.is_empty() {
            bail!("no method selected");
        }
        if !(0.0..=1.0).contains(&self.rate) {
            bail!("loss rate {} outside [0, 1]", self.rate);
        }
        let mut runs = Vec::new();
        for &kind in &self.methods {
            if kind == MethodKind::Skmmse {
                if self.profiles.is_empty() {
                    bail!("method skmmse requires --profile or --t-phi/--t-nu");
                }
                runs.extend(self.profiles.iter().map(|&p| MethodRun { kind, profile: Some(p) }));
            } else {
                let profile = (kind == MethodKind::Kmmse).then_some(Profile::KMMSE);
                runs.push(MethodRun { kind, profile });
            }
        }
        Ok(runs)
    }
}
