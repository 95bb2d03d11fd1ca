//! Grayscale raster ingestion: PGM (P2 ascii / P5 binary) and CSV grids.

use crate::CliError;
use std::fs;
use std::path::Path;

pub struct Raster {
    pub width: usize,
    pub height: usize,
    /// row-major intensities, arbitrary nonnegative scale
    pub intensities: Vec<f64>,
}

pub fn read_raster(path: &Path) -> Result<Raster, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext.to_ascii_lowercase().as_str() {
        "pgm" => read_pgm(path),
        "csv" => read_csv(path),
        other => Err(CliError::Data(format!(
            "{}: unsupported raster extension '{other}' (expected .pgm or .csv)",
            path.display()
        ))),
    }
}

fn read_csv(path: &Path) -> Result<Raster, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), lineno + 1)))
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        rows.push(row);
    }
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    if height == 0 || width == 0 || rows.iter().any(|r| r.len() != width) {
        return Err(CliError::Data(format!("{}: empty or ragged CSV raster", path.display())));
    }
    let intensities: Vec<f64> = rows.into_iter().flatten().collect();
    if intensities.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(CliError::Data(format!(
            "{}: negative or non-finite intensity",
            path.display()
        )));
    }
    Ok(Raster { width, height, intensities })
}

fn read_pgm(path: &Path) -> Result<Raster, CliError> {
    let bytes =
        fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let bad = |msg: &str| CliError::Data(format!("{}: {msg}", path.display()));
    let mut pos = 0usize;

    // header tokens, skipping whitespace and # comments
    let token = |bytes: &[u8], pos: &mut usize| -> Result<String, CliError> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(CliError::Data(format!("{}: truncated header", path.display())));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = token(&bytes, &mut pos)?;
    if magic != "P2" && magic != "P5" {
        return Err(bad("not a P2/P5 PGM file"));
    }
    let width: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad height"))?;
    let maxval: u32 = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad maxval"))?;
    if width == 0 || height == 0 || maxval == 0 {
        return Err(bad("degenerate dimensions"));
    }
    let pixels = width * height;
    let mut intensities = Vec::with_capacity(pixels);
    if magic == "P2" {
        for _ in 0..pixels {
            let v: u32 = token(&bytes, &mut pos)?.parse().map_err(|_| bad("bad pixel"))?;
            intensities.push(v as f64 / maxval as f64);
        }
    } else {
        pos += 1; // single whitespace after maxval
        let wide = maxval > 255;
        let need = pixels * if wide { 2 } else { 1 };
        if bytes.len() < pos + need {
            return Err(bad("truncated pixel data"));
        }
        for i in 0..pixels {
            let v = if wide {
                u16::from_be_bytes([bytes[pos + 2 * i], bytes[pos + 2 * i + 1]]) as u32
            } else {
                bytes[pos + i] as u32
            };
            intensities.push(v as f64 / maxval as f64);
        }
    }
    Ok(Raster { width, height, intensities })
}
