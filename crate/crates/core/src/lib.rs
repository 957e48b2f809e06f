//! Local-phase enhancement of grayscale radiographs.
//!
//! The pipeline filters an image with a bank of alpha-scale-space bandpass
//! filters, forms the monogenic signal of each band with the Riesz pair, and
//! reduces it to three feature maps:
//!
//! * **LwPA**, the local weighted mean phase angle;
//! * **LPE**, the LwPA-weighted local phase energy;
//! * **ELEA**, the enhanced local energy attenuation image, recovered from
//!   LPE through a transmission map estimated by weighted-L1 contextual
//!   regularization (half-quadratic splitting).
//!
//! The three maps are stacked into a 3-channel multi-feature (MF) image.
//!
//! ```no_run
//! use cxr_phase::{enhance_image, load_image, BankCache, EnhanceConfig};
//!
//! let img = load_image("chest.png")?;
//! let features = enhance_image(&img, &EnhanceConfig::default(), &BankCache::new())?;
//! println!("solver ran {} iterations", features.solver_iterations);
//! # Ok::<(), cxr_phase::Error>(())
//! ```

pub mod config;
pub mod elea;
pub mod error;
pub mod image;
pub mod io;
pub mod manifest;
pub mod phase;
pub mod pipeline;
pub mod spectral;

pub use config::{parse_config, ConfigOverrides, EmitFlags, EnhanceConfig};
pub use error::{Error, Result};
pub use image::{normalize_minmax, resize_bilinear, GrayImage, MultiChannelImage};
pub use io::{load_image, save_image, BitDepth};
pub use manifest::{read_manifest, ClassLabel, Manifest, ManifestEntry};
pub use pipeline::{
    enhance_file, enhance_image, enhance_image_traced, run_batch, BankCache, BatchOptions,
    BatchReport, PhaseFeatures, RunRecord, RunStatus,
};
