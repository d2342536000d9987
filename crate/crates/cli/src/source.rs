//! Where a command's system comes from: explicit Verblunsky data or a named
//! closed-form family.

use std::f64::consts::TAU;
use std::fs;

use clap::Args;
use opuc::families::{build_family, FamilyInstance, FamilyKind};
use opuc::{Complex, VerblunskySequence};
use serde_json::Value;

use crate::error::CliError;
use crate::json;

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Verblunsky data: a file path or inline JSON such as
    /// '{"a":[[0,0]],"omega":[1,0]}'. Exported documents are accepted too.
    #[arg(long, value_name = "FILE|JSON")]
    pub verblunsky: Option<String>,

    /// Closed-form family: free, single_moment, single_moment_dual,
    /// single_moment_persymmetric, krawtchouk.
    #[arg(long, value_parser = parse_family, conflicts_with = "verblunsky")]
    pub family: Option<FamilyKind>,

    /// Truncation order N of the family.
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,

    /// ω = exp(iσ), σ in radians. Sets ω for --verblunsky input and for the
    /// krawtchouk and free families.
    #[arg(long, value_name = "SIGMA", allow_negative_numbers = true)]
    pub omega_arg: Option<f64>,

    /// ω = exp(2πiν) for the free family.
    #[arg(long, value_name = "NU", allow_negative_numbers = true, conflicts_with = "omega_arg")]
    pub nu: Option<f64>,
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: opuc::OpucError| e.to_string())
}

/// A loaded system and, for families, the instance it came from.
pub struct Source {
    pub verblunsky: VerblunskySequence,
    pub family: Option<FamilyInstance>,
}

impl SourceArgs {
    pub fn load(&self) -> Result<Source, CliError> {
        match (&self.verblunsky, self.family) {
            (Some(spec), None) => {
                if self.n.is_some() || self.nu.is_some() {
                    return Err(CliError::InvalidInput(
                        "--n and --nu only apply to --family".into(),
                    ));
                }
                let value = read_json_arg(spec)?;
                Ok(Source {
                    verblunsky: json::parse_verblunsky(&value, self.omega_arg)?,
                    family: None,
                })
            }
            (None, Some(kind)) => {
                let n = self
                    .n
                    .ok_or_else(|| CliError::InvalidInput(format!("--family {kind} needs --n")))?;
                let takes_omega = matches!(kind, FamilyKind::Free | FamilyKind::Krawtchouk);
                if self.omega_arg.is_some() && !takes_omega {
                    return Err(CliError::InvalidInput(format!(
                        "family {kind} has a fixed omega; --omega-arg does not apply"
                    )));
                }
                if self.nu.is_some() && kind != FamilyKind::Free {
                    return Err(CliError::InvalidInput("--nu only applies to the free family".into()));
                }
                let sigma = self.omega_arg.unwrap_or(0.0);
                let nu = self.nu.unwrap_or(sigma / TAU);
                let f = build_family(kind, n, nu, Complex::from_polar(1.0, sigma))?;
                Ok(Source {
                    verblunsky: f.verblunsky.clone(),
                    family: Some(f),
                })
            }
            _ => Err(CliError::InvalidInput(
                "exactly one of --verblunsky or --family is required".into(),
            )),
        }
    }
}

/// Inline JSON when the argument starts with `{` or `[`, a file path otherwise.
pub fn read_json_arg(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::io(arg, e))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::InvalidInput(format!("malformed JSON: {e}")))
}
