//! Bitmap file formats: PBM (P1 ASCII and P4 binary, bit-exact) and PNG
//! as a convenience (8-bit grayscale, thresholded at 128 on read).

use std::io::Cursor;
use std::path::Path;

use crate::codec::BitImage;
use crate::error::{Error, Result};

/// Serializes as ASCII P1. Rows wrap at 64 digits.
pub fn to_p1_bytes(image: &BitImage) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", image.width(), image.height()).into_bytes();
    let mut col = 0;
    for y in 0..image.height() {
        for x in 0..image.width() {
            out.push(if image.get(x, y) { b'1' } else { b'0' });
            col += 1;
            if col == 64 {
                out.push(b'\n');
                col = 0;
            } else {
                out.push(b' ');
            }
        }
    }
    if *out.last().unwrap() != b'\n' {
        out.push(b'\n');
    }
    out
}

/// Serializes as binary P4: rows padded to whole bytes, high bit first,
/// 1 = black.
pub fn to_p4_bytes(image: &BitImage) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", image.width(), image.height()).into_bytes();
    let row_bytes = (image.width() as usize + 7) / 8;
    for y in 0..image.height() {
        let mut row = vec![0u8; row_bytes];
        for x in 0..image.width() {
            if image.get(x, y) {
                row[(x / 8) as usize] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

/// Parses P1 or P4 from raw bytes.
pub fn from_pbm_bytes(data: &[u8]) -> Result<BitImage> {
    let magic = data.get(..2).ok_or_else(|| malformed("truncated header"))?;
    match magic {
        b"P1" => parse_p1(&data[2..]),
        b"P4" => parse_p4(&data[2..]),
        _ => Err(malformed("expected a P1 or P4 magic number")),
    }
}

fn malformed(detail: &str) -> Error {
    Error::Format {
        what: "PBM image",
        detail: detail.to_string(),
    }
}

/// Tokenizer over the header area: whitespace separated, `#` comments run
/// to end of line.
struct HeaderScanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderScanner<'a> {
    fn skip_separators(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed("expected a number"));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad number"))
    }
}

fn read_dims(scanner: &mut HeaderScanner) -> Result<(u32, u32)> {
    let width = scanner.number()?;
    let height = scanner.number()?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if (width as u64) * (height as u64) > (1 << 31) {
        return Err(malformed("image too large"));
    }
    Ok((width, height))
}

fn parse_p1(data: &[u8]) -> Result<BitImage> {
    let mut scanner = HeaderScanner { data, pos: 0 };
    let (width, height) = read_dims(&mut scanner)?;
    let mut image = BitImage::white(width, height)?;
    let mut count = 0u64;
    let total = width as u64 * height as u64;
    while scanner.pos < data.len() && count < total {
        scanner.skip_separators();
        if scanner.pos >= data.len() {
            break;
        }
        let bit = match data[scanner.pos] {
            b'0' => false,
            b'1' => true,
            other => {
                return Err(malformed(&format!(
                    "unexpected byte {other:#x} in P1 raster"
                )))
            }
        };
        scanner.pos += 1;
        let x = (count % width as u64) as u32;
        let y = (count / width as u64) as u32;
        image.set(x, y, bit);
        count += 1;
    }
    if count != total {
        return Err(malformed("P1 raster ended early"));
    }
    Ok(image)
}

fn parse_p4(data: &[u8]) -> Result<BitImage> {
    let mut scanner = HeaderScanner { data, pos: 0 };
    let (width, height) = read_dims(&mut scanner)?;
    // exactly one whitespace byte separates the header from the raster
    if scanner.pos >= data.len() || !data[scanner.pos].is_ascii_whitespace() {
        return Err(malformed("missing raster separator"));
    }
    scanner.pos += 1;
    let row_bytes = (width as usize + 7) / 8;
    let needed = row_bytes * height as usize;
    let raster = data
        .get(scanner.pos..scanner.pos + needed)
        .ok_or_else(|| malformed("P4 raster ended early"))?;
    let mut image = BitImage::white(width, height)?;
    for y in 0..height {
        let row = &raster[y as usize * row_bytes..][..row_bytes];
        for x in 0..width {
            let byte = row[(x / 8) as usize];
            if byte & (0x80 >> (x % 8)) != 0 {
                image.set(x, y, true);
            }
        }
    }
    Ok(image)
}

/// Encodes as 8-bit grayscale PNG (black pixel -> 0).
pub fn to_png_bytes(image: &BitImage) -> Result<Vec<u8>> {
    let mut luma = image::GrayImage::new(image.width(), image.height());
    for y in 0..image.height() {
        for x in 0..image.width() {
            luma.put_pixel(x, y, image::Luma([if image.get(x, y) { 0 } else { 255 }]));
        }
    }
    let mut out = Cursor::new(Vec::new());
    image::DynamicImage::ImageLuma8(luma)
        .write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Bitmap(e.to_string()))?;
    Ok(out.into_inner())
}

/// Decodes a PNG, thresholding gray values at 128 (below = black).
pub fn from_png_bytes(data: &[u8]) -> Result<BitImage> {
    let decoded = image::load_from_memory_with_format(data, image::ImageFormat::Png)
        .map_err(|e| Error::Bitmap(e.to_string()))?
        .into_luma8();
    let mut image = BitImage::white(decoded.width(), decoded.height())?;
    for y in 0..decoded.height() {
        for x in 0..decoded.width() {
            if decoded.get_pixel(x, y)[0] < 128 {
                image.set(x, y, true);
            }
        }
    }
    Ok(image)
}

/// Loads a bitmap by extension: `.pbm` (P1/P4) or `.png`.
pub fn load_image(path: &Path) -> Result<BitImage> {
    let data = std::fs::read(path)?;
    match extension_of(path)?.as_str() {
        "pbm" | "pnm" => from_pbm_bytes(&data),
        "png" => from_png_bytes(&data),
        ext => Err(Error::Bitmap(format!("unsupported image extension .{ext}"))),
    }
}

/// Saves a bitmap by extension: `.pbm` writes binary P4, `.png` grayscale.
pub fn save_image(image: &BitImage, path: &Path) -> Result<()> {
    let bytes = encode_for_path(image, path)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

/// The exact bytes [`save_image`] would write.
pub fn encode_for_path(image: &BitImage, path: &Path) -> Result<Vec<u8>> {
    match extension_of(path)?.as_str() {
        "pbm" | "pnm" => Ok(to_p4_bytes(image)),
        "png" => to_png_bytes(image),
        ext => Err(Error::Bitmap(format!("unsupported image extension .{ext}"))),
    }
}

fn extension_of(path: &Path) -> Result<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .ok_or_else(|| Error::Bitmap(format!("{} has no usable extension", path.display())))
}
