//! Flat `key = value` parameter files.
//!
//! Keys are the [`SystemParams`] field names plus the drive and emission
//! pattern. `#` starts a comment. Numbers may be written as multiples of
//! `pi` (`pi/4`, `3*pi/4`, `0.5pi`), and `delta = opt` selects
//! `Delta_opt(delta_c)` once the other keys are known.

use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::delta_opt;
use crate::error::{Error, Result};
use crate::model::{Drive, EmissionKind, EmissionPattern, SystemParams, NU};

pub const KEYS: &[&str] = &[
    "gamma",
    "kappa",
    "g",
    "phi",
    "omega",
    "delta",
    "delta_c",
    "nu",
    "eta",
    "theta_L",
    "theta_c",
    "drive",
    "phi_L",
    "emission",
    "emission_cdf",
];

/// Everything a parameter file can set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamFile {
    pub params: SystemParams,
    pub emission: EmissionPattern,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

/// Parses `1.5`, `pi`, `pi/4`, `3*pi/4`, `-pi/2`, `0.25pi`.
pub fn parse_number(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t),
    };
    let pos = t.find("pi")?;
    let (before, after) = (
        t[..pos].trim().trim_end_matches('*').trim(),
        t[pos + 2..].trim(),
    );
    let factor = if before.is_empty() {
        1.0
    } else {
        before.parse::<f64>().ok()?
    };
    let divisor = if after.is_empty() {
        1.0
    } else {
        after.strip_prefix('/')?.trim().parse::<f64>().ok()?
    };
    Some(sign * factor * std::f64::consts::PI / divisor)
}

#[derive(Default)]
struct Pending {
    drive: Option<String>,
    phi_l: Option<f64>,
    emission: Option<String>,
    cdf: Option<Vec<f64>>,
    delta_opt: bool,
}

/// Applies one `key = value` assignment; `line` is only used for messages.
fn apply(
    file: &mut ParamFile,
    pending: &mut Pending,
    key: &str,
    value: &str,
    line: usize,
) -> Result<()> {
    let num = || {
        parse_number(value)
            .ok_or_else(|| config_err(line, format!("`{key}`: cannot parse number `{value}`")))
    };
    let p = &mut file.params;
    match key {
        "gamma" => p.gamma = num()?,
        "kappa" => p.kappa = num()?,
        "g" => p.g = num()?,
        "phi" => p.phi = num()?,
        "omega" => p.omega = num()?,
        "delta" => {
            if value.trim() == "opt" {
                pending.delta_opt = true;
            } else {
                pending.delta_opt = false;
                p.delta = num()?;
            }
        }
        "delta_c" => p.delta_c = num()?,
        "nu" => {
            if num()? != NU {
                return Err(config_err(
                    line,
                    "`nu` is the unit of frequency and must be 1",
                ));
            }
        }
        "eta" => p.eta = num()?,
        "theta_L" => p.theta_l = num()?,
        "theta_c" => p.theta_c = num()?,
        "drive" => pending.drive = Some(value.trim().to_ascii_lowercase()),
        "phi_L" => pending.phi_l = Some(num()?),
        "emission" => pending.emission = Some(value.trim().to_ascii_lowercase()),
        "emission_cdf" => {
            let cdf: Option<Vec<f64>> = value
                .split(',')
                .map(|v| v.trim().parse::<f64>().ok())
                .collect();
            pending.cdf = Some(cdf.ok_or_else(|| {
                config_err(line, "`emission_cdf`: expected comma-separated numbers")
            })?);
        }
        _ => {
            let hint = KEYS
                .iter()
                .find(|k| k.eq_ignore_ascii_case(key))
                .map(|k| format!(" (did you mean `{k}`?)"))
                .unwrap_or_default();
            return Err(config_err(line, format!("unknown key `{key}`{hint}")));
        }
    }
    Ok(())
}

fn finish(mut file: ParamFile, pending: Pending) -> Result<ParamFile> {
    let phase = pending.phi_l.unwrap_or(std::f64::consts::FRAC_PI_2);
    file.params.drive = match pending.drive.as_deref() {
        None => match pending.phi_l {
            Some(_) => Drive::StandingWave { phase },
            None => file.params.drive,
        },
        Some("traveling") | Some("travelling") => Drive::TravelingWave,
        Some("standing") => Drive::StandingWave { phase },
        Some(other) => {
            return Err(config_err(
                0,
                format!("`drive`: expected traveling or standing, got `{other}`"),
            ))
        }
    };
    file.emission = match (pending.emission.as_deref(), pending.cdf) {
        (None, None) => file.emission,
        (Some("dipole"), None) => EmissionPattern::dipole(),
        (Some("isotropic"), None) => EmissionPattern::isotropic(),
        (Some("tabulated") | None, Some(cdf)) => EmissionPattern::tabulated(cdf)?,
        (Some("tabulated"), None) => {
            return Err(config_err(0, "`emission = tabulated` needs `emission_cdf`"))
        }
        (Some(other), _) => {
            return Err(config_err(
                0,
                format!("`emission`: unknown pattern `{other}`"),
            ))
        }
    };
    if pending.delta_opt {
        file.params.delta = delta_opt(file.params.delta_c, &file.params)?;
    }
    file.params.validate()?;
    Ok(file)
}

/// Parses a whole file on top of `base`.
pub fn parse_onto(base: ParamFile, text: &str) -> Result<ParamFile> {
    let mut file = base;
    let mut pending = Pending::default();
    let mut seen: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{body}`")))?;
        let key = key.trim();
        if seen.iter().any(|k| k == key) {
            return Err(config_err(line, format!("duplicate key `{key}`")));
        }
        seen.push(key.to_string());
        apply(&mut file, &mut pending, key, value, line)?;
    }
    finish(file, pending)
}

pub fn parse(text: &str) -> Result<ParamFile> {
    parse_onto(ParamFile::default(), text)
}

pub fn load(path: &Path) -> Result<ParamFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Applies `(key, value)` overrides, e.g. from command-line flags.
pub fn apply_overrides(base: ParamFile, overrides: &[(String, String)]) -> Result<ParamFile> {
    // drive and emission stay as in `base` unless overridden
    let mut pending = Pending::default();
    let mut file = base;
    let mut seen: Vec<&str> = Vec::new();
    for (i, (k, v)) in overrides.iter().enumerate() {
        if seen.contains(&k.as_str()) {
            return Err(config_err(i + 1, format!("duplicate override `{k}`")));
        }
        seen.push(k);
        apply(&mut file, &mut pending, k, v, i + 1)?;
    }
    if let (Drive::StandingWave { phase }, None, None) =
        (file.params.drive, &pending.drive, pending.phi_l)
    {
        pending.phi_l = Some(phase);
    }
    finish(file, pending)
}

/// Canonical text form; [`parse`] of the output reproduces the input exactly.
pub fn emit(file: &ParamFile) -> String {
    let p = &file.params;
    let mut s = String::new();
    for (k, v) in [
        ("gamma", p.gamma),
        ("kappa", p.kappa),
        ("g", p.g),
        ("phi", p.phi),
        ("omega", p.omega),
        ("delta", p.delta),
        ("delta_c", p.delta_c),
        ("nu", NU),
        ("eta", p.eta),
        ("theta_L", p.theta_l),
        ("theta_c", p.theta_c),
    ] {
        let _ = writeln!(s, "{k} = {v:?}");
    }
    match p.drive {
        Drive::TravelingWave => s.push_str("drive = traveling\n"),
        Drive::StandingWave { phase } => {
            let _ = writeln!(s, "drive = standing\nphi_L = {phase:?}");
        }
    }
    match file.emission.kind() {
        EmissionKind::Dipole1D => s.push_str("emission = dipole\n"),
        EmissionKind::Isotropic => s.push_str("emission = isotropic\n"),
        EmissionKind::Tabulated { cdf } => {
            let list: Vec<String> = cdf.iter().map(|c| format!("{c:?}")).collect();
            let _ = writeln!(
                s,
                "emission = tabulated\nemission_cdf = {}",
                list.join(", ")
            );
        }
    }
    s
}

/// SHA-256 of [`emit`], hex encoded.
pub fn params_hash(file: &ParamFile) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(emit(file).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
