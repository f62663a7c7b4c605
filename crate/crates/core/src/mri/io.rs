//! Field and image files.
//!
//! * PGM (`P5`/`P2`, 8 or 16 bit) for phantom input and display output.
//! * A lossless binary field format:
//!
//! ```text
//! magic   b"NLSF"
//! version u32 LE (= 1)
//! rows    u32 LE
//! cols    u32 LE
//! ulen    u16 LE, followed by `ulen` bytes of UTF-8 unit label
//! data    rows·cols f64 LE, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use ndarray::{Array1, ArrayView1};

use super::phantom::TissueMaps;
use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

const FIELD_MAGIC: &[u8; 4] = b"NLSF";
const FIELD_VERSION: u32 = 1;

/// A grayscale image with intensities scaled to `[0, 1]` by the format maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = ImageReader::open(path)?
        .with_guessed_format()?
        .decode()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    let (cols, rows) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(g) => {
            g.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect()
        }
        _ => {
            return Err(Error::Input(format!(
                "{}: expected a grayscale image",
                path.display()
            )))
        }
    };
    Ok(GrayImage { rows, cols, data })
}

/// Writes `field` as an 8-bit PGM, linearly mapping `[min, max]` to `[0, 255]`.
pub fn write_pgm<T: Real>(
    path: impl AsRef<Path>,
    field: ArrayView1<T>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    check_len("pgm field", rows * cols, field.len())?;
    let values: Vec<f64> = field.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let bytes: Vec<u8> = values
        .iter()
        .map(|&v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let writer = BufWriter::new(File::create(path)?);
    PnmEncoder::new(writer)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, cols as u32, rows as u32, ExtendedColorType::L8)
        .map_err(|e| Error::Input(e.to_string()))
}

pub fn write_field<T: Real>(
    path: impl AsRef<Path>,
    field: ArrayView1<T>,
    rows: usize,
    cols: usize,
    units: &str,
) -> Result<()> {
    check_len("field", rows * cols, field.len())?;
    let units = units.as_bytes();
    if units.len() > u16::MAX as usize {
        return Err(Error::param("units", "label too long"));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FIELD_VERSION.to_le_bytes())?;
    w.write_all(&(rows as u32).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    w.write_all(&(units.len() as u16).to_le_bytes())?;
    w.write_all(units)?;
    for v in field.iter() {
        w.write_all(&v.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub rows: usize,
    pub cols: usize,
    pub units: String,
    pub data: Array1<f64>,
}

pub fn read_field(path: impl AsRef<Path>) -> Result<FieldFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::Input("not a field file (bad magic)".into()));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r)?;
    if version != FIELD_VERSION {
        return Err(Error::Input(format!("unsupported field version {version}")));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)?;
    let mut units = vec![0u8; u16::from_le_bytes(u16buf) as usize];
    r.read_exact(&mut units)?;
    let units = String::from_utf8(units).map_err(|e| Error::Input(e.to_string()))?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut f64buf = [0u8; 8];
    for _ in 0..rows * cols {
        r.read_exact(&mut f64buf)?;
        data.push(f64::from_le_bytes(f64buf));
    }
    Ok(FieldFile {
        rows,
        cols,
        units,
        data: Array1::from(data),
    })
}

/// Builds tissue maps from a PD and a T1 grayscale image of equal size.
///
/// PD is the PD image divided by its maximum; T1 is the T1 image intensity
/// (in `[0, 1]`) times `t1_max_ms`. Where PD is zero T1 becomes the background
/// floor; elsewhere T1 is floored at 1 ms.
pub fn load_phantom_files<T: Real>(
    pd_path: impl AsRef<Path>,
    t1_path: impl AsRef<Path>,
    t1_max_ms: f64,
) -> Result<TissueMaps<T>> {
    let pd = read_pgm(pd_path)?;
    let t1 = read_pgm(t1_path)?;
    if (pd.rows, pd.cols) != (t1.rows, t1.cols) {
        return Err(Error::Input(format!(
            "PD image is {}x{} but T1 image is {}x{}",
            pd.rows, pd.cols, t1.rows, t1.cols
        )));
    }
    let peak = pd.data.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::Input("PD image is empty".into()));
    }
    let pd_field: Array1<T> = pd.data.iter().map(|&v| T::lit(v / peak)).collect();
    let t1_field: Array1<T> = t1
        .data
        .iter()
        .map(|&v| T::lit((v * t1_max_ms).max(super::phantom::BACKGROUND_T1_MS)))
        .collect();
    TissueMaps::new(pd.rows, pd.cols, pd_field, t1_field)
}
