//! Image and matrix file formats: binary PGM (P5), flat CSV, Matrix Market.

use super::operator::SparseOperator;
use super::tv::ImageShape;
use crate::error::{Error, Result};
use std::io::{BufRead, Read, Write};

/// Quantizes to 8 bits: `round(clamp(v / scale_max, 0, 1) * 255)`.
pub fn quantize(data: &[f64], scale_max: f64) -> Vec<u8> {
    let scale = if scale_max > 0.0 { scale_max } else { 1.0 };
    data.iter()
        .map(|&v| ((v / scale).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Writes a binary PGM (P5, maxval 255, row-major).
pub fn write_pgm<W: Write>(
    mut w: W,
    shape: ImageShape,
    data: &[f64],
    scale_max: f64,
) -> Result<()> {
    if data.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.len(),
            found: data.len(),
        });
    }
    write!(w, "P5\n{} {}\n255\n", shape.width, shape.height)?;
    w.write_all(&quantize(data, scale_max))?;
    Ok(())
}

fn next_token<R: Read>(
    bytes: &mut std::iter::Peekable<std::io::Bytes<std::io::BufReader<R>>>,
) -> Result<String> {
    let mut tok = String::new();
    while let Some(b) = bytes.next() {
        let b = b?;
        if b == b'#' {
            for c in bytes.by_ref() {
                if c? == b'\n' {
                    break;
                }
            }
            continue;
        }
        if b.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            return Ok(tok);
        }
        tok.push(b as char);
    }
    if tok.is_empty() {
        Err(Error::Parse("unexpected end of PGM header".into()))
    } else {
        Ok(tok)
    }
}

/// Reads a binary PGM with maxval 255.
pub fn read_pgm<R: Read>(r: R) -> Result<(ImageShape, Vec<u8>)> {
    let mut bytes = std::io::BufReader::new(r).bytes().peekable();
    if next_token(&mut bytes)? != "P5" {
        return Err(Error::Parse("not a P5 PGM".into()));
    }
    let mut num = || -> Result<usize> {
        next_token(&mut bytes)?
            .parse()
            .map_err(|e| Error::Parse(format!("PGM header: {e}")))
    };
    let width = num()?;
    let height = num()?;
    let maxval = num()?;
    if maxval != 255 {
        return Err(Error::Parse(format!("unsupported maxval {maxval}")));
    }
    let pixels: Vec<u8> = bytes.take(width * height).collect::<std::io::Result<_>>()?;
    if pixels.len() != width * height {
        return Err(Error::Parse("truncated PGM raster".into()));
    }
    Ok((ImageShape { height, width }, pixels))
}

/// Writes one image row per CSV line in shortest round-trip notation.
pub fn write_image_csv<W: Write>(w: W, shape: ImageShape, data: &[f64]) -> Result<()> {
    if data.len() != shape.len() {
        return Err(Error::DimensionMismatch {
            expected: shape.len(),
            found: data.len(),
        });
    }
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in data.chunks(shape.width) {
        wr.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_image_csv<R: Read>(r: R) -> Result<(ImageShape, Vec<f64>)> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut data = Vec::new();
    let mut width = None;
    let mut height = 0;
    for rec in rd.records() {
        let rec = rec?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(Error::Parse("ragged image CSV".into()));
        }
        for field in rec.iter() {
            data.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{field}: {e}")))?,
            );
        }
        height += 1;
    }
    Ok((
        ImageShape {
            height,
            width: width.unwrap_or(0),
        },
        data,
    ))
}

/// Matrix Market coordinate format, 1-based indices.
pub fn write_matrix_market<W: Write>(mut w: W, a: &SparseOperator) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for (r, c, v) in a.triplets() {
        writeln!(w, "{} {} {v:e}", r + 1, c + 1)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<SparseOperator> {
    let mut lines = r.lines();
    let banner = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let banner_lc = banner.to_ascii_lowercase();
    if !banner_lc.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(Error::Parse(format!("unsupported banner: {banner}")));
    }
    let parse_err = |what: &str| Error::Parse(format!("bad {what} line"));
    let mut size = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err("size"));
                }
                let v: Vec<usize> = fields
                    .iter()
                    .map(|f| f.parse().map_err(|_| parse_err("size")))
                    .collect::<Result<_>>()?;
                size = Some((v[0], v[1], v[2]));
                triplets.reserve(v[2]);
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(parse_err("entry"));
                }
                let r: usize = fields[0].parse().map_err(|_| parse_err("entry"))?;
                let c: usize = fields[1].parse().map_err(|_| parse_err("entry"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_err("entry"))?;
                if r == 0 || c == 0 {
                    return Err(parse_err("entry"));
                }
                triplets.push((r - 1, c - 1, v));
            }
        }
    }
    let (rows, cols, nnz) = size.ok_or_else(|| parse_err("size"))?;
    if triplets.len() != nnz {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    SparseOperator::from_triplets(rows, cols, triplets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::phantom::make_phantom;
    use crate::problems::projector::build_projector;

    #[test]
    fn pgm_round_trip() {
        let shape = ImageShape {
            height: 3,
            width: 5,
        };
        let data: Vec<f64> = (0..15).map(|i| i as f64 / 14.0).collect();
        let mut buf = Vec::new();
        write_pgm(&mut buf, shape, &data, 1.0).unwrap();
        assert!(buf.starts_with(b"P5\n5 3\n255\n"));
        let (s, px) = read_pgm(&buf[..]).unwrap();
        assert_eq!(s, shape);
        assert_eq!(px, quantize(&data, 1.0));
        assert_eq!(px[0], 0);
        assert_eq!(px[14], 255);
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let buf = b"P5\n# made by hand\n2 1\n255\n\x07\x08".to_vec();
        let (s, px) = read_pgm(&buf[..]).unwrap();
        assert_eq!(
            s,
            ImageShape {
                height: 1,
                width: 2
            }
        );
        assert_eq!(px, vec![7, 8]);
        assert!(read_pgm(&b"P2\n1 1\n255\n0"[..]).is_err());
        assert!(read_pgm(&b"P5\n2 2\n255\n\x00"[..]).is_err());
    }

    #[test]
    fn csv_is_lossless_and_matches_pgm_quantization() {
        let shape = ImageShape::square(8);
        let img = make_phantom(8).unwrap();
        let mut csv_buf = Vec::new();
        write_image_csv(&mut csv_buf, shape, &img).unwrap();
        let (s, back) = read_image_csv(&csv_buf[..]).unwrap();
        assert_eq!(s, shape);
        assert_eq!(back, img);
        let mut pgm = Vec::new();
        write_pgm(&mut pgm, shape, &img, 1.0).unwrap();
        assert_eq!(read_pgm(&pgm[..]).unwrap().1, quantize(&back, 1.0));
    }

    #[test]
    fn matrix_market_round_trip() {
        let a = build_projector(6, 3).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let b = read_matrix_market(&buf[..]).unwrap();
        assert_eq!(a, b);
        assert!(read_matrix_market(&b"%%MatrixMarket matrix array real general\n"[..]).is_err());
        assert!(read_matrix_market(
            &b"%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.0\n"[..]
        )
        .is_err());
    }
}
