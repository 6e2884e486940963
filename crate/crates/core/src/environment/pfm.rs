//! Grayscale Portable FloatMap (`Pf`) reading and writing.
//!
//! Layout: `Pf\n`, `W H\n`, a scale line whose sign gives the byte order
//! (negative = little-endian), then `H × W` 32-bit floats, bottom row first.

use std::fs;
use std::path::Path;

use super::RadianceMap;
use crate::error::{Error, Result};
use crate::sphere::SphereGrid;

pub fn load_radiance_map(path: impl AsRef<Path>) -> Result<RadianceMap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_pfm(&bytes)
}

pub fn save_radiance_map(map: &RadianceMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_pfm(map)).map_err(|e| Error::io(path, e))
}

/// Reads the next whitespace-delimited token, consuming exactly one trailing
/// whitespace byte.
fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::MalformedHeader("unexpected end of header".into()));
    }
    let tok = std::str::from_utf8(&bytes[start..*pos])
        .map_err(|_| Error::MalformedHeader("header is not ASCII".into()))?;
    if *pos < bytes.len() {
        *pos += 1;
    }
    Ok(tok)
}

pub fn read_pfm(bytes: &[u8]) -> Result<RadianceMap> {
    let mut pos = 0;
    match token(bytes, &mut pos)? {
        "Pf" => {}
        "PF" => {
            return Err(Error::MalformedHeader(
                "color PFM (PF) is not supported, expected grayscale Pf".into(),
            ))
        }
        other => return Err(Error::MalformedHeader(format!("bad magic {other:?}"))),
    }
    let dim = |pos: &mut usize, what: &str| -> Result<usize> {
        let t = token(bytes, pos)?;
        t.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::MalformedHeader(format!("bad {what} {t:?}")))
    };
    let width = dim(&mut pos, "width")?;
    let height = dim(&mut pos, "height")?;
    let scale_tok = token(bytes, &mut pos)?;
    let scale: f64 = scale_tok
        .parse()
        .ok()
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| Error::MalformedHeader(format!("bad scale {scale_tok:?}")))?;
    if width != 2 * height {
        return Err(Error::DimensionMismatch { width, height });
    }

    let data = &bytes[pos..];
    let expected = width * height * 4;
    if data.len() != expected {
        return Err(Error::MalformedHeader(format!(
            "expected {expected} bytes of float data, found {}",
            data.len()
        )));
    }
    let little = scale < 0.0;
    let mut values = vec![0.0; width * height];
    for (k, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        } as f64;
        // file scanlines run bottom to top
        let file_row = k / width;
        let col = k % width;
        let row = height - 1 - file_row;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidTexel { row, col, value: v });
        }
        values[row * width + col] = v;
    }
    RadianceMap::new(SphereGrid::new(width, height), values)
}

/// Encodes as little-endian `Pf` with scale `-1`. Values are stored as `f32`.
pub fn write_pfm(map: &RadianceMap) -> Vec<u8> {
    let g = map.grid();
    let header = format!("Pf\n{} {}\n-1\n", g.width, g.height);
    let mut out = Vec::with_capacity(header.len() + g.len() * 4);
    out.extend_from_slice(header.as_bytes());
    for row in (0..g.height).rev() {
        for col in 0..g.width {
            out.extend_from_slice(&(map.get(row, col) as f32).to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn file(header: &str, floats: &[f32], little: bool) -> Vec<u8> {
        let mut b = header.as_bytes().to_vec();
        for f in floats {
            b.extend_from_slice(&if little { f.to_le_bytes() } else { f.to_be_bytes() });
        }
        b
    }

    #[test]
    fn uniform_four_by_two() {
        let m = read_pfm(&file("Pf\n4 2\n-1.0\n", &[1.0; 8], true)).unwrap();
        assert_eq!(m.grid(), SphereGrid::new(4, 2));
        assert!(m.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn honors_byte_order_and_row_flip() {
        let floats: Vec<f32> = (0..8).map(|i| i as f32).collect();
        let le = read_pfm(&file("Pf\n4 2\n-1\n", &floats, true)).unwrap();
        let be = read_pfm(&file("Pf\n4 2\n1\n", &floats, false)).unwrap();
        assert_eq!(le, be);
        // first scanline in the file is the bottom row
        assert_eq!(le.get(1, 0), 0.0);
        assert_eq!(le.get(0, 3), 7.0);
        // wrong byte order gives different values
        let swapped = read_pfm(&file("Pf\n4 2\n1\n", &floats, true));
        assert!(swapped.map(|m| m != le).unwrap_or(true));
    }

    #[test]
    fn nan_is_reported_with_texel() {
        let mut floats = [1.0f32; 8];
        floats[1] = f32::NAN;
        match read_pfm(&file("Pf\n4 2\n-1\n", &floats, true)) {
            Err(Error::InvalidTexel { row: 1, col: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            read_pfm(&file("P6\n4 2\n-1\n", &[1.0; 8], true)),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pfm(&file("PF\n4 2\n-1\n", &[1.0; 24], true)),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pfm(&file("Pf\n4 x\n-1\n", &[1.0; 8], true)),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pfm(&file("Pf\n4 2\n0\n", &[1.0; 8], true)),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pfm(&file("Pf\n4 2\n-1\n", &[1.0; 7], true)),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            read_pfm(&file("Pf\n4 4\n-1\n", &[1.0; 16], true)),
            Err(Error::DimensionMismatch { width: 4, height: 4 })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pfm");
        let g = SphereGrid::new(8, 4);
        let m = RadianceMap::new(g, (0..32).map(|i| (i as f32 * 0.37) as f64).collect()).unwrap();
        save_radiance_map(&m, &path).unwrap();
        assert_eq!(load_radiance_map(&path).unwrap(), m);
        assert!(matches!(
            load_radiance_map(dir.path().join("missing.pfm")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn load_save_is_bit_identical(h in 1usize..6, seed in prop::collection::vec(0.0f32..1e6, 72)) {
            let g = SphereGrid::with_height(h);
            let values: Vec<f64> = seed.iter().cycle().take(g.len()).map(|&v| v as f64).collect();
            let m = RadianceMap::new(g, values).unwrap();
            let bytes = write_pfm(&m);
            let back = read_pfm(&bytes).unwrap();
            prop_assert!(back.values().iter().zip(m.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(write_pfm(&back), bytes);
        }
    }
}
