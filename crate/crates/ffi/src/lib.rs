//! C ABI for the `cxr-phase` enhancement pipeline.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_load` function and released by the matching `*_free`.
//! Fallible calls return [`CxrStatus`]; on failure the message is available
//! from [`cxr_last_error_message`] on the same thread.

mod error;

use std::ffi::{CStr, CString};
use std::path::PathBuf;

use cxr_phase::elea::RhoMode;
use cxr_phase::io::load_multichannel;
use cxr_phase::{
    enhance_image, load_image, save_image, BankCache, BitDepth, EnhanceConfig, GrayImage,
    MultiChannelImage, PhaseFeatures,
};
use libc::{c_char, size_t};

pub use error::{cxr_last_error_message, CxrStatus};
use error::{guard, Failure};

/// Enhancement parameters.
pub struct CxrConfig {
    inner: EnhanceConfig,
}

/// Single-channel image with values stored as doubles, row-major.
pub struct CxrImage {
    inner: GrayImage,
}

/// Configuration plus a cache of filter banks reused across runs.
pub struct CxrEnhancer {
    config: EnhanceConfig,
    cache: BankCache,
}

/// Output of one enhancement run.
pub struct CxrFeatures {
    inner: PhaseFeatures,
}

/// Scalar parameters addressable through [`cxr_config_set`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CxrParam {
    /// Square working edge in pixels; 0 keeps the native size.
    WorkingSize = 0,
    Guard = 1,
    /// 8 or 16.
    OutputBitDepth = 2,
    Alpha = 3,
    S0 = 4,
    ScaleMultiplier = 5,
    NumScales = 6,
    Lambda = 7,
    Epsilon = 8,
    Delta = 9,
    /// NaN selects the mean of the LPE map.
    Rho = 10,
}

/// Feature map selector for [`cxr_features_map`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CxrFeature {
    /// Phase angle in radians.
    Lwpa = 0,
    /// Unnormalized local phase energy.
    Lpe = 1,
    Elea = 2,
    Transmission = 3,
    MfLwpa = 4,
    MfLpe = 5,
    MfElea = 6,
}

fn borrow<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass handles obtained from this library.
    unsafe { ptr.as_ref() }.ok_or_else(|| Failure::null(name))
}

fn borrow_mut<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: callers pass handles obtained from this library.
    unsafe { ptr.as_mut() }.ok_or_else(|| Failure::null(name))
}

fn text<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::null(name));
    }
    // SAFETY: non-null and NUL-terminated by contract.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Failure::invalid(format!("`{name}` is not valid UTF-8")))
}

fn path(ptr: *const c_char, name: &str) -> Result<PathBuf, Failure> {
    text(ptr, name).map(PathBuf::from)
}

fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = borrow_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn release<T>(ptr: *mut T) {
    if !ptr.is_null() {
        // SAFETY: pointer came from `Box::into_raw` in `emit`.
        drop(unsafe { Box::from_raw(ptr) });
    }
}

fn bit_depth(bits: u32) -> Result<BitDepth, Failure> {
    u8::try_from(bits)
        .map_err(|_| format!("bit depth must be 8 or 16, got {bits}"))
        .and_then(BitDepth::try_from)
        .map_err(Failure::invalid)
}

fn whole(value: f64, param: CxrParam) -> Result<usize, Failure> {
    if value.is_finite() && value >= 0.0 && value.fract() == 0.0 && value <= usize::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Failure::invalid(format!(
            "{param:?} needs a non-negative integer, got {value}"
        )))
    }
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cxr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_new(out: *mut *mut CxrConfig) -> CxrStatus {
    guard(|| {
        emit(
            out,
            CxrConfig {
                inner: EnhanceConfig::default(),
            },
        )
    })
}

/// Parses TOML text; omitted keys keep their defaults.
///
/// # Safety
/// `toml` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_from_toml(
    toml: *const c_char,
    out: *mut *mut CxrConfig,
) -> CxrStatus {
    guard(|| {
        let inner = EnhanceConfig::from_toml_str(text(toml, "toml")?)?;
        emit(out, CxrConfig { inner })
    })
}

/// Reads a TOML file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_load(
    path: *const c_char,
    out: *mut *mut CxrConfig,
) -> CxrStatus {
    guard(|| {
        let p = self::path(path, "path")?;
        let inner = cxr_phase::parse_config(Some(&p), &Default::default())?;
        emit(out, CxrConfig { inner })
    })
}

/// Sets one parameter. The configuration is left unchanged if the new
/// value fails validation.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_set(
    config: *mut CxrConfig,
    param: CxrParam,
    value: f64,
) -> CxrStatus {
    guard(|| {
        let config = borrow_mut(config, "config")?;
        let mut next = config.inner;
        match param {
            CxrParam::WorkingSize => next.working_size = whole(value, param)?,
            CxrParam::Guard => next.guard = value,
            CxrParam::OutputBitDepth => {
                next.output_bit_depth =
                    bit_depth(whole(value, param)?.min(u32::MAX as usize) as u32)?
            }
            CxrParam::Alpha => next.assd.alpha = value,
            CxrParam::S0 => next.assd.s0 = value,
            CxrParam::ScaleMultiplier => next.assd.scale_multiplier = value,
            CxrParam::NumScales => next.assd.num_scales = whole(value, param)?,
            CxrParam::Lambda => next.elea.lambda = value,
            CxrParam::Epsilon => next.elea.epsilon = value,
            CxrParam::Delta => next.elea.delta = value,
            CxrParam::Rho => {
                next.elea.rho = if value.is_nan() {
                    RhoMode::MeanOfLpe
                } else {
                    RhoMode::Fixed(value)
                }
            }
        }
        next.validate()?;
        config.inner = next;
        Ok(())
    })
}

/// Reads one parameter. `Rho` reads as NaN when it tracks the LPE mean.
///
/// # Safety
/// `config` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_get(
    config: *const CxrConfig,
    param: CxrParam,
    value: *mut f64,
) -> CxrStatus {
    guard(|| {
        let c = &borrow(config, "config")?.inner;
        *borrow_mut(value, "value")? = match param {
            CxrParam::WorkingSize => c.working_size as f64,
            CxrParam::Guard => c.guard,
            CxrParam::OutputBitDepth => u8::from(c.output_bit_depth) as f64,
            CxrParam::Alpha => c.assd.alpha,
            CxrParam::S0 => c.assd.s0,
            CxrParam::ScaleMultiplier => c.assd.scale_multiplier,
            CxrParam::NumScales => c.assd.num_scales as f64,
            CxrParam::Lambda => c.elea.lambda,
            CxrParam::Epsilon => c.elea.epsilon,
            CxrParam::Delta => c.elea.delta,
            CxrParam::Rho => match c.elea.rho {
                RhoMode::MeanOfLpe => f64::NAN,
                RhoMode::Fixed(v) => v,
            },
        };
        Ok(())
    })
}

/// Serializes the configuration as TOML. Release with [`cxr_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_to_toml(
    config: *const CxrConfig,
    out: *mut *mut c_char,
) -> CxrStatus {
    guard(|| {
        let toml = borrow(config, "config")?.inner.to_toml();
        let s = CString::new(toml).map_err(|e| Failure::invalid(e.to_string()))?;
        *borrow_mut(out, "out")? = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cxr_config_free(config: *mut CxrConfig) {
    release(config);
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cxr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copies `width * height` finite doubles into a new image.
///
/// # Safety
/// `pixels` must point to `width * height` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_new(
    width: size_t,
    height: size_t,
    pixels: *const f64,
    out: *mut *mut CxrImage,
) -> CxrStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(Failure::null("pixels"));
        }
        let len = width
            .checked_mul(height)
            .ok_or_else(|| Failure::invalid("image dimensions overflow"))?;
        let data = std::slice::from_raw_parts(pixels, len).to_vec();
        let inner = GrayImage::new(width, height, data)?;
        inner.ensure_finite()?;
        emit(out, CxrImage { inner })
    })
}

/// Loads a PNG or PGM as grayscale in `[0, 1]`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_load(path: *const c_char, out: *mut *mut CxrImage) -> CxrStatus {
    guard(|| {
        let inner = load_image(self::path(path, "path")?)?;
        emit(out, CxrImage { inner })
    })
}

/// Writes a grayscale PNG. Pixels must lie in `[0, 1]`.
///
/// # Safety
/// `image` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_save(
    image: *const CxrImage,
    path: *const c_char,
    bits: u32,
) -> CxrStatus {
    guard(|| {
        let img = &borrow(image, "image")?.inner;
        save_image(img, self::path(path, "path")?, bit_depth(bits)?)?;
        Ok(())
    })
}

/// Width in pixels, or 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_width(image: *const CxrImage) -> size_t {
    image.as_ref().map_or(0, |i| i.inner.width())
}

/// Height in pixels, or 0 for NULL.
///
/// # Safety
/// `image` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_height(image: *const CxrImage) -> size_t {
    image.as_ref().map_or(0, |i| i.inner.height())
}

/// Copies the pixels, row-major, into `dst`; `len` must equal
/// `width * height`.
///
/// # Safety
/// `dst` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_copy_pixels(
    image: *const CxrImage,
    dst: *mut f64,
    len: size_t,
) -> CxrStatus {
    guard(|| {
        let src = borrow(image, "image")?.inner.pixels();
        if dst.is_null() {
            return Err(Failure::null("dst"));
        }
        if len != src.len() {
            return Err(Failure::invalid(format!(
                "buffer holds {len} values, image has {}",
                src.len()
            )));
        }
        std::slice::from_raw_parts_mut(dst, len).copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `image` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cxr_image_free(image: *mut CxrImage) {
    release(image);
}

/// Creates an enhancer holding a copy of `config`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_enhancer_new(
    config: *const CxrConfig,
    out: *mut *mut CxrEnhancer,
) -> CxrStatus {
    guard(|| {
        let config = borrow(config, "config")?.inner;
        config.validate()?;
        emit(
            out,
            CxrEnhancer {
                config,
                cache: BankCache::new(),
            },
        )
    })
}

/// Runs the full pipeline on `image`. Filter banks are cached inside the
/// enhancer, so repeated calls at one working size skip the setup cost.
/// An enhancer may be used from several threads at once.
///
/// # Safety
/// `enhancer` and `image` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_enhancer_run(
    enhancer: *const CxrEnhancer,
    image: *const CxrImage,
    out: *mut *mut CxrFeatures,
) -> CxrStatus {
    guard(|| {
        let e = borrow(enhancer, "enhancer")?;
        let img = &borrow(image, "image")?.inner;
        let inner = enhance_image(img, &e.config, &e.cache)?;
        emit(out, CxrFeatures { inner })
    })
}

/// # Safety
/// `enhancer` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cxr_enhancer_free(enhancer: *mut CxrEnhancer) {
    release(enhancer);
}

/// Copies one feature map into a new image handle.
///
/// # Safety
/// `features` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cxr_features_map(
    features: *const CxrFeatures,
    which: CxrFeature,
    out: *mut *mut CxrImage,
) -> CxrStatus {
    guard(|| {
        let f = &borrow(features, "features")?.inner;
        let inner = match which {
            CxrFeature::Lwpa => f.lwpa.clone(),
            CxrFeature::Lpe => f.lpe.clone(),
            CxrFeature::Elea => f.elea.clone(),
            CxrFeature::Transmission => f.transmission.field().clone(),
            CxrFeature::MfLwpa => f.mf.channel(0).clone(),
            CxrFeature::MfLpe => f.mf.channel(1).clone(),
            CxrFeature::MfElea => f.mf.channel(2).clone(),
        };
        emit(out, CxrImage { inner })
    })
}

/// Writes the 3-channel MF image as an RGB PNG.
///
/// # Safety
/// `features` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cxr_features_save_mf(
    features: *const CxrFeatures,
    path: *const c_char,
    bits: u32,
) -> CxrStatus {
    guard(|| {
        let mf: &MultiChannelImage = &borrow(features, "features")?.inner.mf;
        save_image(mf, self::path(path, "path")?, bit_depth(bits)?)?;
        Ok(())
    })
}

/// Loads an MF PNG back into its three channels.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must point to three writable
/// handle slots.
#[no_mangle]
pub unsafe extern "C" fn cxr_mf_load(path: *const c_char, out: *mut *mut CxrImage) -> CxrStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let mf = load_multichannel(self::path(path, "path")?)?;
        for (i, inner) in mf.into_channels().into_iter().enumerate() {
            *out.add(i) = Box::into_raw(Box::new(CxrImage { inner }));
        }
        Ok(())
    })
}

/// Number of solver iterations performed, or 0 for NULL.
///
/// # Safety
/// `features` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_features_solver_iterations(features: *const CxrFeatures) -> size_t {
    features.as_ref().map_or(0, |f| f.inner.solver_iterations)
}

/// Final regularization objective, or NaN for NULL.
///
/// # Safety
/// `features` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cxr_features_final_objective(features: *const CxrFeatures) -> f64 {
    features
        .as_ref()
        .map_or(f64::NAN, |f| f.inner.final_objective)
}

/// # Safety
/// `features` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cxr_features_free(features: *mut CxrFeatures) {
    release(features);
}
