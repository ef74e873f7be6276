//! IDX image/label ingestion (the MNIST container format).
//!
//! Big-endian throughout; magic 0x00000803 for image files, 0x00000801 for
//! label files. Pixels are scaled to `[0, 1]` and flattened row-major.

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use eprune_core::data::Dataset;
use eprune_core::matrix::Matrix;

use crate::error::CliError;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: bad magic {got:#010x}, expected {expected:#010x}")]
    BadMagic { path: String, expected: u32, got: u32 },
    #[error("{path}: truncated file")]
    Truncated { path: String },
    #[error("image file holds {images} samples but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("invalid dataset: {0}")]
    Dataset(String),
}

impl From<IdxError> for CliError {
    fn from(e: IdxError) -> Self {
        match &e {
            IdxError::Open { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingFile(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, IdxError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|source| IdxError::Open {
            path: path.display().to_string(),
            source,
        })
}

fn truncated(path: &Path) -> IdxError {
    IdxError::Truncated {
        path: path.display().to_string(),
    }
}

/// Reads an IDX image file: `(count, rows, cols, pixels in [0, 1])`.
pub fn read_idx_images(path: &Path) -> Result<(usize, usize, usize, Vec<f64>), IdxError> {
    let mut reader = open(path)?;
    let magic = reader
        .read_u32::<BigEndian>()
        .map_err(|_| truncated(path))?;
    if magic != IMAGE_MAGIC {
        return Err(IdxError::BadMagic {
            path: path.display().to_string(),
            expected: IMAGE_MAGIC,
            got: magic,
        });
    }
    let count = reader.read_u32::<BigEndian>().map_err(|_| truncated(path))? as usize;
    let rows = reader.read_u32::<BigEndian>().map_err(|_| truncated(path))? as usize;
    let cols = reader.read_u32::<BigEndian>().map_err(|_| truncated(path))? as usize;
    let mut raw = vec![0u8; count * rows * cols];
    reader.read_exact(&mut raw).map_err(|_| truncated(path))?;
    let pixels = raw.iter().map(|&p| p as f64 / 255.0).collect();
    Ok((count, rows, cols, pixels))
}

/// Reads an IDX label file as raw class bytes.
pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>, IdxError> {
    let mut reader = open(path)?;
    let magic = reader
        .read_u32::<BigEndian>()
        .map_err(|_| truncated(path))?;
    if magic != LABEL_MAGIC {
        return Err(IdxError::BadMagic {
            path: path.display().to_string(),
            expected: LABEL_MAGIC,
            got: magic,
        });
    }
    let count = reader.read_u32::<BigEndian>().map_err(|_| truncated(path))? as usize;
    let mut raw = vec![0u8; count];
    reader.read_exact(&mut raw).map_err(|_| truncated(path))?;
    Ok(raw)
}

/// Loads an image/label pair as a dataset; class count is the largest
/// label plus one (at least 2).
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset, IdxError> {
    let (count, rows, cols, pixels) = read_idx_images(images)?;
    let raw_labels = read_idx_labels(labels)?;
    if count != raw_labels.len() {
        return Err(IdxError::CountMismatch {
            images: count,
            labels: raw_labels.len(),
        });
    }
    let classes = raw_labels.iter().copied().max().unwrap_or(0) as usize + 1;
    build(count, rows * cols, pixels, &raw_labels, classes.max(2))
}

/// Loads a pair with an explicit class count (so train/test agree even if
/// one split misses a class).
pub fn load_idx_with_classes(
    images: &Path,
    labels: &Path,
    classes: usize,
) -> Result<Dataset, IdxError> {
    let (count, rows, cols, pixels) = read_idx_images(images)?;
    let raw_labels = read_idx_labels(labels)?;
    if count != raw_labels.len() {
        return Err(IdxError::CountMismatch {
            images: count,
            labels: raw_labels.len(),
        });
    }
    build(count, rows * cols, pixels, &raw_labels, classes)
}

fn build(
    count: usize,
    dim: usize,
    pixels: Vec<f64>,
    raw_labels: &[u8],
    classes: usize,
) -> Result<Dataset, IdxError> {
    Dataset::new(
        Matrix::from_vec(count, dim, pixels),
        raw_labels.iter().map(|&l| l as usize).collect(),
        classes,
    )
    .map_err(|e| IdxError::Dataset(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    /// Builds a tiny synthetic IDX pair on disk.
    pub(crate) fn write_fixture(
        dir: &std::path::Path,
        images: &[Vec<u8>],
        rows: usize,
        cols: usize,
        labels: &[u8],
    ) -> (std::path::PathBuf, std::path::PathBuf) {
        let image_path = dir.join("images-idx3-ubyte");
        let label_path = dir.join("labels-idx1-ubyte");
        let mut f = std::fs::File::create(&image_path).unwrap();
        f.write_all(&IMAGE_MAGIC.to_be_bytes()).unwrap();
        f.write_all(&(images.len() as u32).to_be_bytes()).unwrap();
        f.write_all(&(rows as u32).to_be_bytes()).unwrap();
        f.write_all(&(cols as u32).to_be_bytes()).unwrap();
        for image in images {
            f.write_all(image).unwrap();
        }
        let mut f = std::fs::File::create(&label_path).unwrap();
        f.write_all(&LABEL_MAGIC.to_be_bytes()).unwrap();
        f.write_all(&(labels.len() as u32).to_be_bytes()).unwrap();
        f.write_all(labels).unwrap();
        (image_path, label_path)
    }

    #[test]
    fn fixture_round_trips_with_unit_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = write_fixture(
            dir.path(),
            &[vec![0, 128, 255, 64, 32, 16], vec![255; 6]],
            2,
            3,
            &[1, 0],
        );
        let ds = load_idx(&images, &labels).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 6);
        assert_eq!(ds.labels(), &[1, 0]);
        assert_eq!(ds.features().row(1), &[1.0; 6]);
        assert_eq!(ds.features().row(0)[2], 1.0); // pixel 255 -> 1.0
        assert_eq!(ds.features().row(0)[0], 0.0);
    }

    #[test]
    fn bad_magic_and_truncation_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (images, labels) = write_fixture(dir.path(), &[vec![1, 2, 3, 4]], 2, 2, &[0]);
        // Swapping the files triggers the magic check.
        assert!(matches!(
            load_idx(&labels, &images),
            Err(IdxError::BadMagic { .. })
        ));
        // Truncate the image payload.
        let bytes = std::fs::read(&images).unwrap();
        let cut = dir.path().join("cut");
        std::fs::write(&cut, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(
            read_idx_images(&cut),
            Err(IdxError::Truncated { .. })
        ));
        assert!(matches!(
            load_idx(dir.path().join("nope").as_path(), &labels),
            Err(IdxError::Open { .. })
        ));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let (images, _) = write_fixture(dir.path(), &[vec![1, 2, 3, 4]], 2, 2, &[0]);
        let other = tempfile::tempdir().unwrap();
        let (_, labels2) = write_fixture(
            other.path(),
            &[vec![0; 4], vec![0; 4], vec![0; 4]],
            2,
            2,
            &[0, 1, 0],
        );
        assert!(matches!(
            load_idx(&images, &labels2),
            Err(IdxError::CountMismatch { images: 1, labels: 3 })
        ));
    }
}
