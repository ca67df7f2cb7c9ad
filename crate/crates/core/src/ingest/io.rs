//! On-disk volume format: a `<id>.vol.json` sidecar describing dims and
//! spacing, `<id>.vol.raw` little-endian f32 intensities, and
//! `<id>.mask.raw` u8 0/1 mask, all x-fastest. Round-trips are bit-exact
//! at f32 precision.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, IngestError, Volume};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub dtype: String,
    pub order: String,
}

pub fn validate_id(id: &str) -> Result<(), IngestError> {
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        return Err(IngestError::BadId(id.to_string()));
    }
    Ok(())
}

/// Writes `<id>.vol.json`, `<id>.vol.raw` and `<id>.mask.raw` under `dir`.
/// Intensities are rounded to f32.
pub fn write_volume(dir: &Path, id: &str, v: &Volume) -> Result<(), IngestError> {
    validate_id(id)?;
    let (nx, ny, nz) = v.dims();
    let (sx, sy, sz) = v.spacing();
    let header = VolumeHeader {
        dims: [nx, ny, nz],
        spacing_mm: [sx, sy, sz],
        dtype: "f32".to_string(),
        order: "x-fastest".to_string(),
    };
    let hpath = dir.join(format!("{id}.vol.json"));
    let htext = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(&hpath, htext).map_err(|e| io_err(&hpath, e))?;

    let mut raw = Vec::with_capacity(v.voxels().len() * 4);
    for &val in v.voxels() {
        raw.extend_from_slice(&(val as f32).to_le_bytes());
    }
    let vpath = dir.join(format!("{id}.vol.raw"));
    fs::write(&vpath, raw).map_err(|e| io_err(&vpath, e))?;

    let mpath = dir.join(format!("{id}.mask.raw"));
    fs::write(&mpath, v.mask()).map_err(|e| io_err(&mpath, e))?;
    Ok(())
}

/// Reads the volume triple written by [`write_volume`].
pub fn read_volume(dir: &Path, id: &str) -> Result<Volume, IngestError> {
    validate_id(id)?;
    let hpath = dir.join(format!("{id}.vol.json"));
    let htext = fs::read_to_string(&hpath).map_err(|e| io_err(&hpath, e))?;
    let header: VolumeHeader =
        serde_json::from_str(&htext).map_err(|e| IngestError::BadHeader {
            path: hpath.display().to_string(),
            reason: e.to_string(),
        })?;
    if header.dtype != "f32" {
        return Err(IngestError::BadHeader {
            path: hpath.display().to_string(),
            reason: format!("unsupported dtype {:?}", header.dtype),
        });
    }
    if header.order != "x-fastest" {
        return Err(IngestError::BadHeader {
            path: hpath.display().to_string(),
            reason: format!("unsupported order {:?}", header.order),
        });
    }
    let dims = (header.dims[0], header.dims[1], header.dims[2]);
    let want = dims.0 * dims.1 * dims.2;

    let vpath = dir.join(format!("{id}.vol.raw"));
    let raw = fs::read(&vpath).map_err(|e| io_err(&vpath, e))?;
    if raw.len() != want * 4 {
        return Err(IngestError::BadHeader {
            path: vpath.display().to_string(),
            reason: format!("raw file has {} bytes, expected {}", raw.len(), want * 4),
        });
    }
    let voxels: Vec<f64> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();

    let mpath = dir.join(format!("{id}.mask.raw"));
    let mask = fs::read(&mpath).map_err(|e| io_err(&mpath, e))?;
    if mask.len() != want {
        return Err(IngestError::BadHeader {
            path: mpath.display().to_string(),
            reason: format!("mask file has {} bytes, expected {}", mask.len(), want),
        });
    }

    Volume::new(
        dims,
        (
            header.spacing_mm[0],
            header.spacing_mm[1],
            header.spacing_mm[2],
        ),
        voxels,
        mask,
    )
}

/// Reads a `id,label` manifest with labels in {0,1}. A header row is
/// accepted and skipped.
pub fn read_labels(path: &Path) -> Result<Vec<(String, u8)>, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.eq_ignore_ascii_case("id,label") {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let id = parts.next().unwrap_or("").trim().to_string();
        let label = parts.next().map(str::trim).unwrap_or("");
        let label: u8 = label.parse().map_err(|_| IngestError::BadHeader {
            path: path.display().to_string(),
            reason: format!("line {}: label {:?} is not 0 or 1", lineno + 1, label),
        })?;
        if label > 1 {
            return Err(IngestError::BadHeader {
                path: path.display().to_string(),
                reason: format!("line {}: label {} is not 0 or 1", lineno + 1, label),
            });
        }
        validate_id(&id)?;
        out.push((id, label));
    }
    Ok(out)
}
