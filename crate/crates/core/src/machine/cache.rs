use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::BitString;

use super::{enumerate_halting, Enumeration, MachineConfig};

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cache file {path} has digest {found}, expected {expected}; refusing to recompute")]
    DigestMismatch { path: PathBuf, expected: String, found: String },
    #[error("cache file {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// An enumeration together with the SHA-256 digest of its cache file body.
#[derive(Debug, Clone)]
pub struct CachedEnumeration {
    pub enumeration: Enumeration,
    pub digest: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

fn file_stem(cfg: MachineConfig, aux: &BitString) -> String {
    let tag = if aux.is_empty() {
        "noaux".to_string()
    } else {
        format!("aux-{}", &sha256_hex(aux.to_string().as_bytes())[..16])
    };
    format!("enum-L{}-t{}-{}", cfg.max_program_len, cfg.fuel, tag)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.to_path_buf(), source }
}

/// Loads the enumeration for `(cfg, aux)` from `dir`, or computes and stores
/// it there. A stored body whose digest disagrees with its `.sha256`
/// companion is an error, never a silent rebuild. With no directory the
/// enumeration is computed in memory.
pub fn load_or_build(
    cfg: MachineConfig,
    aux: &BitString,
    dir: Option<&Path>,
) -> Result<CachedEnumeration, CacheError> {
    let Some(dir) = dir else {
        let enumeration = enumerate_halting(cfg, aux);
        let digest = sha256_hex(enumeration.to_tsv().as_bytes());
        return Ok(CachedEnumeration { enumeration, digest });
    };
    let stem = file_stem(cfg, aux);
    let body_path = dir.join(format!("{stem}.tsv"));
    let digest_path = dir.join(format!("{stem}.sha256"));
    if body_path.exists() {
        let body = fs::read_to_string(&body_path).map_err(io_err(&body_path))?;
        let expected = fs::read_to_string(&digest_path).map_err(io_err(&digest_path))?;
        let expected = expected.trim().to_string();
        let found = sha256_hex(body.as_bytes());
        if found != expected {
            return Err(CacheError::DigestMismatch { path: body_path, expected, found });
        }
        let enumeration = Enumeration::from_tsv(cfg, aux.clone(), &body)
            .map_err(|message| CacheError::Parse { path: body_path.clone(), message })?;
        return Ok(CachedEnumeration { enumeration, digest: found });
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let enumeration = enumerate_halting(cfg, aux);
    let body = enumeration.to_tsv();
    let digest = sha256_hex(body.as_bytes());
    fs::write(&body_path, &body).map_err(io_err(&body_path))?;
    fs::write(&digest_path, format!("{digest}\n")).map_err(io_err(&digest_path))?;
    Ok(CachedEnumeration { enumeration, digest })
}
