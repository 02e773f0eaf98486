//! Packed shot dumps: detector bits plus the observable bit per shot.
//!
//! Layout: one text header line `# bits-v1 detectors=<n> shots=<N>`, then
//! `N` fixed-stride binary rows. Row byte `i >> 3`, bit `i & 7` holds
//! detector `i`; bit index `n` (right after the detectors) is the logical
//! readout flip. The stride is `ceil((n + 1) / 8)` bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use qeclab_core::sim::ShotBatch;

/// Schema tag of the packed dump format.
pub const BITS_VERSION: &str = "bits-v1";

fn stride(n_detectors: u32) -> usize {
    (n_detectors as usize + 1).div_ceil(8)
}

/// Stream 64-shot batches into a packed dump file.
///
/// The iterator must yield `ceil(shots / 64)` batches of `n_detectors`
/// words; trailing lanes of the last batch are dropped.
pub fn write_shots(
    path: &Path,
    n_detectors: u32,
    shots: u64,
    batches: impl Iterator<Item = ShotBatch>,
) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# {BITS_VERSION} detectors={n_detectors} shots={shots}")?;
    let stride = stride(n_detectors);
    let mut written = 0u64;
    for (index, batch) in batches.enumerate() {
        if batch.detectors.len() != n_detectors as usize {
            bail!(
                "batch {index} carries {} detector words, expected {n_detectors}",
                batch.detectors.len()
            );
        }
        let lanes = (shots - written).min(64);
        for lane in 0..lanes {
            let mut row = vec![0u8; stride];
            for (i, word) in batch.detectors.iter().enumerate() {
                if word >> lane & 1 == 1 {
                    row[i >> 3] |= 1 << (i & 7);
                }
            }
            if batch.observable >> lane & 1 == 1 {
                let i = n_detectors as usize;
                row[i >> 3] |= 1 << (i & 7);
            }
            out.write_all(&row)?;
        }
        written += lanes;
    }
    if written != shots {
        bail!("dump holds {written} shots, header promised {shots}");
    }
    out.flush()?;
    Ok(())
}

/// Read a packed dump back into 64-shot batches plus the shot count.
///
/// The last batch's unused lanes are zero; [`ShotBatch`] lane order is
/// preserved, so a write/read round trip is exact.
pub fn read_shots(path: &Path) -> Result<(u32, u64, Vec<ShotBatch>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .with_context(|| format!("{}: missing header line", path.display()))?;
    let header = std::str::from_utf8(&bytes[..header_end]).context("header is not UTF-8")?;
    let mut parts = header.split_whitespace();
    if (parts.next(), parts.next()) != (Some("#"), Some(BITS_VERSION)) {
        bail!("{}: unknown schema {header:?}, this tool reads {BITS_VERSION:?}", path.display());
    }
    let mut n_detectors: Option<u32> = None;
    let mut shots: Option<u64> = None;
    for part in parts {
        if let Some(v) = part.strip_prefix("detectors=") {
            n_detectors = Some(v.parse().context("detectors field")?);
        } else if let Some(v) = part.strip_prefix("shots=") {
            shots = Some(v.parse().context("shots field")?);
        } else {
            bail!("{}: unknown header field {part:?}", path.display());
        }
    }
    let n_detectors = n_detectors.context("header lacks detectors=")?;
    let shots = shots.context("header lacks shots=")?;
    let stride = stride(n_detectors);
    let body = &bytes[header_end + 1..];
    if body.len() as u64 != shots * stride as u64 {
        bail!(
            "{}: body is {} bytes, expected {} ({} shots x {stride})",
            path.display(),
            body.len(),
            shots * stride as u64,
            shots
        );
    }
    let mut batches = vec![];
    for chunk_base in (0..shots).step_by(64) {
        let lanes = (shots - chunk_base).min(64);
        let mut batch =
            ShotBatch { detectors: vec![0u64; n_detectors as usize], observable: 0 };
        for lane in 0..lanes {
            let row_start = (chunk_base + lane) as usize * stride;
            let row = &body[row_start..row_start + stride];
            for i in 0..n_detectors as usize {
                if row[i >> 3] >> (i & 7) & 1 == 1 {
                    batch.detectors[i] |= 1 << lane;
                }
            }
            let i = n_detectors as usize;
            if row[i >> 3] >> (i & 7) & 1 == 1 {
                batch.observable |= 1 << lane;
            }
        }
        batches.push(batch);
    }
    Ok((n_detectors, shots, batches))
}
