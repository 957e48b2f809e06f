//! Enhancement configuration: defaults, TOML files and command-line
//! overrides, applied in that order of increasing precedence.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::elea::{EleaParams, RhoMode};
use crate::error::{Error, Result};
use crate::image::MIN_DIMENSION;
use crate::io::BitDepth;
use crate::phase::DEFAULT_RELATIVE_GUARD;
use crate::spectral::AssdParams;

/// Default square working resolution.
pub const DEFAULT_WORKING_SIZE: usize = 448;

/// Which feature maps are written to disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitFlags {
    pub lwpa: bool,
    pub lpe: bool,
    pub elea: bool,
    pub mf: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self {
            lwpa: true,
            lpe: true,
            elea: true,
            mf: true,
        }
    }
}

impl FromStr for EmitFlags {
    type Err = String;

    /// Comma-separated subset of `lwpa,lpe,elea,mf`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut flags = EmitFlags {
            lwpa: false,
            lpe: false,
            elea: false,
            mf: false,
        };
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "lwpa" => flags.lwpa = true,
                "lpe" => flags.lpe = true,
                "elea" => flags.elea = true,
                "mf" => flags.mf = true,
                other => {
                    return Err(format!(
                        "unknown feature {other:?} (expected lwpa, lpe, elea, mf)"
                    ))
                }
            }
        }
        Ok(flags)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnhanceConfig {
    /// Square edge the input is resized to; 0 keeps the native resolution.
    pub working_size: usize,
    /// LwPA guard relative to the largest multi-scale odd energy.
    pub guard: f64,
    pub output_bit_depth: BitDepth,
    pub emit: EmitFlags,
    pub assd: AssdParams,
    pub elea: EleaParams,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            working_size: DEFAULT_WORKING_SIZE,
            guard: DEFAULT_RELATIVE_GUARD,
            output_bit_depth: BitDepth::Eight,
            emit: EmitFlags::default(),
            assd: AssdParams::default(),
            elea: EleaParams::default(),
        }
    }
}

impl EnhanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.working_size != 0 && self.working_size < MIN_DIMENSION {
            return Err(Error::config(
                "working_size",
                format!("{} (must be 0 or >= {MIN_DIMENSION})", self.working_size),
            ));
        }
        if !(self.guard > 0.0 && self.guard.is_finite()) {
            return Err(Error::config(
                "guard",
                format!("{} (must be > 0)", self.guard),
            ));
        }
        self.assd.validate()?;
        self.elea.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse_toml(text, Path::new("<inline>"))
    }

    fn parse_toml(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_owned(),
            message: e.message().to_owned(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    /// Hex SHA-256 of the canonical JSON form; identifies the full
    /// parameter set.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config is always serializable");
        hex::encode(Sha256::digest(&json))
    }
}

/// Command-line overrides; `None` leaves the file/default value in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub working_size: Option<usize>,
    pub guard: Option<f64>,
    pub output_bit_depth: Option<BitDepth>,
    pub emit: Option<EmitFlags>,
    pub alpha: Option<f64>,
    pub s0: Option<f64>,
    pub scale_multiplier: Option<f64>,
    pub num_scales: Option<usize>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub rho: Option<RhoMode>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut EnhanceConfig) {
        fn set<T: Copy>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut config.working_size, self.working_size);
        set(&mut config.guard, self.guard);
        set(&mut config.output_bit_depth, self.output_bit_depth);
        set(&mut config.emit, self.emit);
        set(&mut config.assd.alpha, self.alpha);
        set(&mut config.assd.s0, self.s0);
        set(&mut config.assd.scale_multiplier, self.scale_multiplier);
        set(&mut config.assd.num_scales, self.num_scales);
        set(&mut config.elea.lambda, self.lambda);
        set(&mut config.elea.epsilon, self.epsilon);
        set(&mut config.elea.delta, self.delta);
        set(&mut config.elea.rho, self.rho);
    }
}

/// Defaults, then the optional TOML file, then `overrides`; the merged
/// result is validated once.
pub fn parse_config(path: Option<&Path>, overrides: &ConfigOverrides) -> Result<EnhanceConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str(&text).map_err(|e| Error::ConfigParse {
                path: p.to_owned(),
                message: e.message().to_owned(),
            })?
        }
        None => EnhanceConfig::default(),
    };
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_file_no_flags_gives_defaults() {
        let c = parse_config(None, &ConfigOverrides::default()).unwrap();
        assert_eq!(c, EnhanceConfig::default());
        assert_eq!(c.elea.lambda, 2.0);
        assert_eq!(c.elea.epsilon, 1e-4);
        assert_eq!(c.elea.delta, 0.85);
        assert_eq!(c.assd.num_scales, 2);
        assert_eq!(c.elea.rho, RhoMode::MeanOfLpe);
    }

    #[test]
    fn flag_beats_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        std::fs::write(&path, "[elea]\nlambda = 3.0\n").unwrap();
        let from_file = parse_config(Some(&path), &ConfigOverrides::default()).unwrap();
        assert_eq!(from_file.elea.lambda, 3.0);
        let overrides = ConfigOverrides {
            lambda: Some(5.0),
            ..Default::default()
        };
        assert_eq!(
            parse_config(Some(&path), &overrides).unwrap().elea.lambda,
            5.0
        );
    }

    #[test]
    fn out_of_range_delta_is_named() {
        let err = EnhanceConfig::from_toml_str("[elea]\ndelta = -1\n").unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "delta"));
        assert!(err.to_string().contains("`delta`"));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = EnhanceConfig::from_toml_str("[elea]\nlamda = 2\n").unwrap_err();
        assert!(matches!(&err, Error::ConfigParse { message, .. } if message.contains("lamda")));
        assert!(EnhanceConfig::from_toml_str("colour = 1\n").is_err());
    }

    #[test]
    fn rho_and_bit_depth_in_toml() {
        let c = EnhanceConfig::from_toml_str("output_bit_depth = 16\n[elea]\nrho = 0.4\n").unwrap();
        assert_eq!(c.output_bit_depth, BitDepth::Sixteen);
        assert_eq!(c.elea.rho, RhoMode::Fixed(0.4));
        assert!(EnhanceConfig::from_toml_str("output_bit_depth = 12\n").is_err());
    }

    #[test]
    fn toml_round_trip_and_digest() {
        let mut c = EnhanceConfig::default();
        c.elea.rho = RhoMode::Fixed(0.3);
        c.emit.lpe = false;
        let back = EnhanceConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.digest(), c.digest());
        assert_ne!(c.digest(), EnhanceConfig::default().digest());
    }

    #[test]
    fn emit_list_parsing() {
        let f: EmitFlags = "mf, lwpa".parse().unwrap();
        assert!(f.mf && f.lwpa && !f.lpe && !f.elea);
        assert!("mf,edges".parse::<EmitFlags>().is_err());
    }
}
