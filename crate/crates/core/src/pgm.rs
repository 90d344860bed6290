//! Binary greyscale PGM ("P5") export of feature channels.

use crate::error::{Error, Result};

/// `P5` image with maxval 255. Each value maps to
/// `floor(255 · (v - min) / (max - min))`; a constant image maps to 128.
pub fn encode_pgm(values: &[f64], width: usize, height: usize) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(Error::Shape(format!(
            "{} values for a {width}x{height} image",
            values.len()
        )));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(values.len());
    if !(max > min) {
        out.extend(std::iter::repeat_n(128u8, values.len()));
        return Ok(out);
    }
    let span = max - min;
    out.extend(
        values
            .iter()
            .map(|&v| (255.0 * (v - min) / span).floor().clamp(0.0, 255.0) as u8),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_mid_grey() {
        let img = encode_pgm(&[0.0; 1024], 32, 32).unwrap();
        assert_eq!(img.len(), 13 + 1024);
        assert!(img[13..].iter().all(|&p| p == 128));
    }

    #[test]
    fn linear_map_with_floor() {
        let img = encode_pgm(&[-1.0, 0.0, 1.0, 0.5], 2, 2).unwrap();
        assert_eq!(&img[..11], b"P5\n2 2\n255\n");
        assert_eq!(&img[11..], &[0, 127, 255, 191]);
    }
}
