//! Plain-text mask files, auditable with standard tools.
//!
//! ```text
//! # eprune mask v1
//! # layers: 64,64
//! 0101...        (one line of D characters in {0,1}, layer-major)
//! ```

use std::path::Path;

use eprune_core::nn::{StateVector, UnitLayout};

use crate::error::CliError;

pub fn save_mask(path: &Path, mask: &StateVector, layout: &UnitLayout) -> Result<(), CliError> {
    let widths: Vec<String> = layout.widths().iter().map(|w| w.to_string()).collect();
    let bits: String = mask.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
    let text = format!("# eprune mask v1\n# layers: {}\n{bits}\n", widths.join(","));
    std::fs::write(path, text).map_err(|e| CliError::io(&format!("mask {}", path.display()), e))
}

/// Returns the mask and the per-layer unit widths from the header.
pub fn load_mask(path: &Path) -> Result<(StateVector, Vec<usize>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(&format!("mask {}", path.display()), e))?;
    let corrupt = |what: &str| CliError::Other(format!("mask {}: {what}", path.display()));

    let mut lines = text.lines();
    match lines.next() {
        Some(line) if line.trim() == "# eprune mask v1" => {}
        _ => return Err(corrupt("missing version header")),
    }
    let widths_line = lines.next().ok_or_else(|| corrupt("missing layout header"))?;
    let widths_str = widths_line
        .trim()
        .strip_prefix("# layers:")
        .ok_or_else(|| corrupt("missing layout header"))?;
    let widths: Vec<usize> = widths_str
        .split(',')
        .map(|w| w.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| corrupt("unparseable layer widths"))?;
    let bits_line = lines.next().ok_or_else(|| corrupt("missing bit line"))?;
    let bits: Vec<bool> = bits_line
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(corrupt(&format!("invalid bit character {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    let total: usize = widths.iter().sum();
    if bits.len() != total {
        return Err(corrupt(&format!(
            "bit line holds {} bits but layout sums to {total}",
            bits.len()
        )));
    }
    Ok((StateVector::from_bits(bits), widths))
}
