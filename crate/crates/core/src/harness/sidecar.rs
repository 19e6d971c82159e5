//! File-based protocol with the external embedding sidecar.
//!
//! The harness writes a JSON request, runs the configured command with the
//! request path as its last argument, and expects two outputs: the DVEC file
//! named in `out`, and `<request>.done`, a JSON reply echoing the request plus
//! the output shape.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::representations::{load_embeddings, FeatureMatrix};
use crate::{Error, Result};

pub const DEFAULT_EPOCHS_MLM: usize = 10;
pub const DEFAULT_EPOCHS_ATC: usize = 5;
pub const DEFAULT_LR: f64 = 5e-5;

/// Fine-tuning path applied before embeddings are extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Pre-trained encoder as is.
    None,
    /// Masked-language-model adaptation on the unlabeled pool only.
    MlmOnly,
    /// Supervised tuning on the labeled subset only.
    OneStep,
    /// MLM adaptation on the pool, then supervised tuning on the labeled subset.
    Dotcal,
}

impl Variant {
    pub fn needs_labels(self) -> bool {
        matches!(self, Variant::OneStep | Variant::Dotcal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::None => "none",
            Variant::MlmOnly => "mlm_only",
            Variant::OneStep => "one_step",
            Variant::Dotcal => "dotcal",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Variant::None),
            "mlm_only" => Ok(Variant::MlmOnly),
            "one_step" => Ok(Variant::OneStep),
            "dotcal" => Ok(Variant::Dotcal),
            other => Err(Error::InvalidArgument(format!("unknown sidecar variant {other:?}"))),
        }
    }
}

/// How to launch the sidecar and which defaults to put in requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarConfig {
    /// Program and leading arguments; the request path is appended.
    pub command: Vec<String>,
    pub model: String,
    #[serde(default = "default_epochs_mlm")]
    pub epochs_mlm: usize,
    #[serde(default = "default_epochs_atc")]
    pub epochs_atc: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Where request, text and DVEC files go. Defaults to a directory under the system temp dir.
    #[serde(default)]
    pub work_dir: Option<PathBuf>,
}

fn default_epochs_mlm() -> usize {
    DEFAULT_EPOCHS_MLM
}

fn default_epochs_atc() -> usize {
    DEFAULT_EPOCHS_ATC
}

fn default_lr() -> f64 {
    DEFAULT_LR
}

impl SidecarConfig {
    pub fn new(command: Vec<String>, model: impl Into<String>) -> Self {
        SidecarConfig {
            command,
            model: model.into(),
            epochs_mlm: DEFAULT_EPOCHS_MLM,
            epochs_atc: DEFAULT_EPOCHS_ATC,
            lr: DEFAULT_LR,
            work_dir: None,
        }
    }

    pub fn work_dir(&self) -> PathBuf {
        self.work_dir
            .clone()
            .unwrap_or_else(|| std::env::temp_dir().join(format!("alcs-sidecar-{}", std::process::id())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRef {
    pub id: usize,
    pub label: String,
}

/// One line of the `pool_texts` file. Rows of the output DVEC follow file order.
/// Only `split == "pool"` rows may be used for training.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: usize,
    pub text: String,
    pub split: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRequest {
    pub variant: Variant,
    pub model: String,
    pub pool_texts: PathBuf,
    pub labeled: Vec<LabeledRef>,
    pub out: PathBuf,
    pub epochs_mlm: usize,
    pub epochs_atc: usize,
    pub lr: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SidecarRequest {
    pub fn validate(&self) -> Result<()> {
        match (self.variant.needs_labels(), self.labeled.is_empty()) {
            (true, true) => Err(Error::InvalidArgument(format!(
                "variant {} needs labeled instances",
                self.variant
            ))),
            (false, false) => Err(Error::InvalidArgument(format!(
                "variant {} must not receive labels",
                self.variant
            ))),
            _ => Ok(()),
        }
    }
}

/// Contents of `<request>.done`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarReply {
    #[serde(flatten)]
    pub request: SidecarRequest,
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(default)]
    pub truncated: usize,
    #[serde(default)]
    pub steps: Vec<String>,
}

pub fn reply_path(request_path: &Path) -> PathBuf {
    let mut s = request_path.as_os_str().to_owned();
    s.push(".done");
    PathBuf::from(s)
}

/// Write `texts` in the `pool_texts` JSONL layout.
pub fn write_texts(path: &Path, texts: &[TextRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for t in texts {
        serde_json::to_writer(&mut buf, t)?;
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Run the sidecar for `request` and return the validated embeddings (rows carry
/// the ids from `pool_texts`) together with the reply manifest.
pub fn invoke_sidecar(
    config: &SidecarConfig,
    request: &SidecarRequest,
    request_path: &Path,
    expected_ids: &[usize],
) -> Result<(FeatureMatrix, SidecarReply)> {
    request.validate()?;
    let (program, args) = config.command.split_first().ok_or_else(|| Error::Sidecar {
        message: "sidecar command is empty".into(),
        log: String::new(),
    })?;
    fs::write(request_path, serde_json::to_vec_pretty(request)?).map_err(|e| Error::io(request_path, e))?;
    let done = reply_path(request_path);
    let _ = fs::remove_file(&done);

    let output = Command::new(program)
        .args(args)
        .arg(request_path)
        .env("ALCS_SIDECAR_REQUEST", request_path)
        .output()
        .map_err(|e| Error::Sidecar {
            message: format!("cannot launch {program:?}: {e}"),
            log: String::new(),
        })?;
    let log = format!(
        "{}{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    let fail = |message: String| Error::Sidecar {
        message,
        log: log.clone(),
    };
    if !output.status.success() {
        return Err(fail(format!("sidecar exited with {}", output.status)));
    }
    let raw = fs::read(&done).map_err(|e| fail(format!("missing reply {}: {e}", done.display())))?;
    let reply: SidecarReply =
        serde_json::from_slice(&raw).map_err(|e| fail(format!("malformed reply {}: {e}", done.display())))?;
    if reply.request.variant != request.variant || reply.request.labeled != request.labeled {
        return Err(fail("reply does not echo the request's variant and labels".into()));
    }
    let matrix =
        load_embeddings(&request.out).map_err(|e| fail(format!("bad output {}: {e}", request.out.display())))?;
    if matrix.n_rows() != expected_ids.len() || reply.n_rows != expected_ids.len() {
        return Err(fail(format!(
            "expected {} rows, DVEC has {} and reply claims {}",
            expected_ids.len(),
            matrix.n_rows(),
            reply.n_rows
        )));
    }
    if reply.n_cols != matrix.n_cols() {
        return Err(fail(format!(
            "reply claims {} columns, DVEC has {}",
            reply.n_cols,
            matrix.n_cols()
        )));
    }
    let matrix = matrix.with_ids(expected_ids.to_vec())?;
    Ok((matrix, reply))
}
