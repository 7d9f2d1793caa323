//! Binary PGM rendering of a bitstream.

use crate::bits::BitStream;
use crate::stats::StatsError;

/// P5 image of the first `width * height` bits, row-major. A one bit is a
/// black pixel unless `invert` is set.
pub fn render_pgm(stream: &BitStream, width: usize, height: usize, invert: bool) -> Result<Vec<u8>, StatsError> {
    if width == 0 || height == 0 {
        return Err(StatsError::Parameter("image dimensions must be positive".into()));
    }
    let pixels = width
        .checked_mul(height)
        .ok_or_else(|| StatsError::Parameter("image too large".into()))?;
    if stream.len() < pixels {
        return Err(StatsError::InsufficientData {
            test: "image".into(),
            needed: pixels,
            got: stream.len(),
        });
    }
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + pixels);
    out.extend_from_slice(header.as_bytes());
    out.extend(
        stream
            .iter()
            .take(pixels)
            .map(|bit| if bit != invert { 0u8 } else { 255u8 }),
    );
    Ok(out)
}
