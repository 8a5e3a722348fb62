//! Raw video ingest: planar YUV 4:2:0 sequences, binary PGM disparity maps,
//! and edge-safe block extraction.
//!
//! Samples are promoted to `f64` once at load; every kernel downstream works
//! on real values. Out-of-bounds reads everywhere use clamp-to-edge
//! replication, so block extraction is a total function.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A single-channel 2D sample grid (luma, chroma or disparity), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

/// A fixed 4x4 real-valued block, the unit of the cyclopean pipeline.
pub type Block4 = [[f64; 4]; 4];

impl Plane {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(format!(
                "plane dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "plane {width}x{height} needs {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            samples: vec![value; width * height],
        }
    }

    /// Build a plane by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            samples,
        }
    }

    /// Promote 8-bit samples to real values.
    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "plane {width}x{height} needs {} bytes, got {}",
                width * height,
                bytes.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples: bytes.iter().map(|&b| f64::from(b)).collect(),
        })
    }

    /// Quantize back to 8 bits: round to nearest, clamp to [0, 255].
    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    /// Read with clamp-to-edge replication; any integer coordinate is valid.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> f64 {
        let cx = x.clamp(0, self.width as i64 - 1) as usize;
        let cy = y.clamp(0, self.height as i64 - 1) as usize;
        self.samples[cy * self.width + cx]
    }

    /// Extract a `w x h` block with its top-left corner at `(x0, y0)`.
    /// Out-of-bounds coordinates replicate the nearest edge pixel, so the
    /// result is always full-size.
    pub fn block_at(&self, x0: i64, y0: i64, w: usize, h: usize) -> Plane {
        let mut samples = Vec::with_capacity(w * h);
        for dy in 0..h {
            for dx in 0..w {
                samples.push(self.get_clamped(x0 + dx as i64, y0 + dy as i64));
            }
        }
        Plane {
            width: w,
            height: h,
            samples,
        }
    }

    /// 4x4 specialization of [`Plane::block_at`] returning a fixed array.
    pub fn block4_at(&self, x0: i64, y0: i64) -> Block4 {
        let mut out = [[0.0; 4]; 4];
        for (dy, row) in out.iter_mut().enumerate() {
            for (dx, v) in row.iter_mut().enumerate() {
                *v = self.get_clamped(x0 + dx as i64, y0 + dy as i64);
            }
        }
        out
    }

    pub fn min_sample(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_sample(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One 4:2:0 video frame: full-resolution luma plus half-resolution chroma.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub y: Plane,
    pub u: Plane,
    pub v: Plane,
}

impl Frame {
    pub fn new(y: Plane, u: Plane, v: Plane) -> Result<Self> {
        if y.width() % 2 != 0 || y.height() % 2 != 0 {
            return Err(Error::OddDimensions {
                width: y.width(),
                height: y.height(),
            });
        }
        let (cw, ch) = (y.width() / 2, y.height() / 2);
        if u.width() != cw || u.height() != ch || v.width() != cw || v.height() != ch {
            return Err(Error::DimensionMismatch(format!(
                "chroma must be {cw}x{ch} for {}x{} luma, got u {}x{} v {}x{}",
                y.width(),
                y.height(),
                u.width(),
                u.height(),
                v.width(),
                v.height()
            )));
        }
        Ok(Self { y, u, v })
    }

    pub fn width(&self) -> usize {
        self.y.width()
    }

    pub fn height(&self) -> usize {
        self.y.height()
    }

    /// Serialize to I420 plane order (Y, then U, then V).
    pub fn to_i420_bytes(&self) -> Vec<u8> {
        let mut out = self.y.to_bytes();
        out.extend(self.u.to_bytes());
        out.extend(self.v.to_bytes());
        out
    }
}

/// A matched left/right frame pair plus the disparity map for that pair.
#[derive(Debug, Clone)]
pub struct StereoFrame {
    pub left: Frame,
    pub right: Frame,
    pub disparity: Plane,
}

impl StereoFrame {
    pub fn new(left: Frame, right: Frame, disparity: Plane) -> Result<Self> {
        if left.width() != right.width() || left.height() != right.height() {
            return Err(Error::DimensionMismatch(format!(
                "left {}x{} vs right {}x{}",
                left.width(),
                left.height(),
                right.width(),
                right.height()
            )));
        }
        if disparity.width() != left.width() || disparity.height() != left.height() {
            return Err(Error::DimensionMismatch(format!(
                "disparity {}x{} must match luma {}x{}",
                disparity.width(),
                disparity.height(),
                left.width(),
                left.height()
            )));
        }
        Ok(Self {
            left,
            right,
            disparity,
        })
    }

    pub fn width(&self) -> usize {
        self.left.width()
    }

    pub fn height(&self) -> usize {
        self.left.height()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eye {
    Left,
    Right,
}

/// Where per-frame disparity maps come from.
#[derive(Debug, Clone)]
pub enum DisparitySource {
    /// A directory holding one binary PGM per frame, named `000000.pgm`,
    /// `000001.pgm`, ... (zero-padded frame index).
    Files(PathBuf),
    /// Estimate from the luma planes with block SAD search up to `max_disp`.
    Estimate { max_disp: u32 },
}

/// Description of one stereo YUV sequence on disk.
#[derive(Debug, Clone)]
pub struct SequenceSpec {
    pub left: PathBuf,
    pub right: PathBuf,
    pub disparity: DisparitySource,
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
}

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width % 2 != 0 || self.height % 2 != 0 {
            return Err(Error::OddDimensions {
                width: self.width,
                height: self.height,
            });
        }
        if self.frame_count == 0 {
            return Err(Error::InvalidInput("frame_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Bytes per 4:2:0 frame at this geometry.
    pub fn frame_bytes(&self) -> usize {
        self.width * self.height * 3 / 2
    }

    fn eye_path(&self, eye: Eye) -> &Path {
        match eye {
            Eye::Left => &self.left,
            Eye::Right => &self.right,
        }
    }
}

/// Zero-padded PGM file name for a frame index, shared by loaders and writers.
pub fn disparity_file_name(frame_index: usize) -> String {
    format!("{frame_index:06}.pgm")
}

/// Load every frame of one eye of a raw I420 sequence.
///
/// The file size must be exactly `frame_count` whole frames; anything else is
/// reported as a size mismatch with the expected and actual byte counts.
pub fn load_yuv_sequence(spec: &SequenceSpec, eye: Eye) -> Result<Vec<Frame>> {
    spec.validate()?;
    let path = spec.eye_path(eye);
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let frame_bytes = spec.frame_bytes();
    let expected = frame_bytes as u64 * spec.frame_count as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
            frames: spec.frame_count,
            frame_bytes,
        });
    }
    decode_i420(&bytes, spec.width, spec.height, spec.frame_count)
}

/// Split a raw I420 byte run into frames. `bytes` must hold exactly
/// `frame_count` frames.
pub fn decode_i420(
    bytes: &[u8],
    width: usize,
    height: usize,
    frame_count: usize,
) -> Result<Vec<Frame>> {
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::OddDimensions { width, height });
    }
    let luma = width * height;
    let chroma = luma / 4;
    let frame_bytes = luma + 2 * chroma;
    if bytes.len() != frame_bytes * frame_count {
        return Err(Error::InvalidInput(format!(
            "expected {} bytes for {frame_count} frame(s), got {}",
            frame_bytes * frame_count,
            bytes.len()
        )));
    }
    let mut frames = Vec::with_capacity(frame_count);
    for i in 0..frame_count {
        let base = i * frame_bytes;
        let y = Plane::from_bytes(width, height, &bytes[base..base + luma])?;
        let u = Plane::from_bytes(width / 2, height / 2, &bytes[base + luma..base + luma + chroma])?;
        let v = Plane::from_bytes(
            width / 2,
            height / 2,
            &bytes[base + luma + chroma..base + frame_bytes],
        )?;
        frames.push(Frame::new(y, u, v)?);
    }
    Ok(frames)
}

/// Write frames back to a raw I420 file (quantizing to 8 bits).
pub fn write_yuv_sequence(path: &Path, frames: &[Frame]) -> Result<()> {
    let mut out = Vec::new();
    for f in frames {
        out.extend(f.to_i420_bytes());
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load an 8-bit binary PGM (P5) disparity map.
pub fn load_disparity_pgm(path: &Path) -> Result<Plane> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    parse_pgm(&bytes).map_err(|reason| Error::PgmParse {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<Plane, String> {
    let mut pos = 0usize;

    // Header tokens are separated by whitespace; '#' starts a comment that
    // runs to end of line.
    let mut next_token = |bytes: &[u8]| -> std::result::Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("unexpected end of header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = next_token(bytes)?;
    if magic != "P5" {
        return Err(format!("unsupported PGM variant {magic:?} (need binary P5)"));
    }
    let width: usize = next_token(bytes)?
        .parse()
        .map_err(|_| "bad width".to_string())?;
    let height: usize = next_token(bytes)?
        .parse()
        .map_err(|_| "bad height".to_string())?;
    let maxval: u32 = next_token(bytes)?
        .parse()
        .map_err(|_| "bad maxval".to_string())?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("maxval {maxval} out of supported range [1, 255]"));
    }
    if width == 0 || height == 0 {
        return Err(format!("degenerate dimensions {width}x{height}"));
    }
    // Exactly one whitespace byte separates the header from the payload.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err("missing separator before payload".into());
    }
    pos += 1;
    let payload = &bytes[pos..];
    if payload.len() != width * height {
        return Err(format!(
            "payload holds {} bytes, header promises {}",
            payload.len(),
            width * height
        ));
    }
    Plane::from_bytes(width, height, payload).map_err(|e| e.to_string())
}

/// Write a plane as an 8-bit binary PGM (P5).
pub fn write_disparity_pgm(path: &Path, plane: &Plane) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", plane.width(), plane.height()).into_bytes();
    out.extend(plane.to_bytes());
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load a full stereo sequence: both eyes plus one disparity map per frame.
pub fn load_stereo_sequence(spec: &SequenceSpec) -> Result<Vec<StereoFrame>> {
    let left = load_yuv_sequence(spec, Eye::Left)?;
    let right = load_yuv_sequence(spec, Eye::Right)?;
    let mut frames = Vec::with_capacity(left.len());
    for (i, (l, r)) in left.into_iter().zip(right).enumerate() {
        let disparity = match &spec.disparity {
            DisparitySource::Files(dir) => load_disparity_pgm(&dir.join(disparity_file_name(i)))?,
            DisparitySource::Estimate { max_disp } => {
                crate::disparity::estimate_disparity(&l.y, &r.y, *max_disp)?
            }
        };
        frames.push(StereoFrame::new(l, r, disparity)?);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use tempfile::TempDir;

    fn spec(dir: &TempDir, w: usize, h: usize, frames: usize) -> SequenceSpec {
        SequenceSpec {
            left: dir.path().join("left.yuv"),
            right: dir.path().join("right.yuv"),
            disparity: DisparitySource::Estimate { max_disp: 8 },
            width: w,
            height: h,
            frame_count: frames,
        }
    }

    #[test]
    fn loads_single_480x800_frame() {
        let dir = TempDir::new().unwrap();
        let s = spec(&dir, 480, 800, 1);
        assert_eq!(s.frame_bytes(), 576_000);
        fs::write(&s.left, vec![0u8; 576_000]).unwrap();
        let frames = load_yuv_sequence(&s, Eye::Left).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].y.width(), 480);
        assert_eq!(frames[0].y.height(), 800);
        assert_eq!(frames[0].u.width(), 240);
        assert_eq!(frames[0].u.height(), 400);
    }

    #[test]
    fn truncated_file_reports_byte_counts() {
        let dir = TempDir::new().unwrap();
        let s = spec(&dir, 480, 800, 1);
        fs::write(&s.left, vec![0u8; 575_999]).unwrap();
        match load_yuv_sequence(&s, Eye::Left) {
            Err(Error::SizeMismatch {
                expected, actual, ..
            }) => {
                assert_eq!(expected, 576_000);
                assert_eq!(actual, 575_999);
            }
            other => panic!("expected size mismatch, got {other:?}"),
        }
    }

    #[test]
    fn odd_dimensions_rejected() {
        let dir = TempDir::new().unwrap();
        let mut s = spec(&dir, 480, 800, 1);
        s.width = 479;
        fs::write(&s.left, vec![0u8; 10]).unwrap();
        assert!(matches!(
            load_yuv_sequence(&s, Eye::Left),
            Err(Error::OddDimensions { .. })
        ));
    }

    #[test]
    fn two_frame_4x4_fixture() {
        // Hand-built 4x4 4:2:0 fixture: 24 bytes per frame, two frames.
        let dir = TempDir::new().unwrap();
        let s = spec(&dir, 4, 4, 2);
        assert_eq!(s.frame_bytes(), 24);
        let bytes: Vec<u8> = (0u8..48).collect();
        fs::write(&s.left, &bytes).unwrap();
        let frames = load_yuv_sequence(&s, Eye::Left).unwrap();
        assert_eq!(frames.len(), 2);
        // Frame order and plane order are preserved verbatim.
        assert_eq!(frames[0].y.get(0, 0), 0.0);
        assert_eq!(frames[0].y.get(3, 3), 15.0);
        assert_eq!(frames[0].u.get(0, 0), 16.0);
        assert_eq!(frames[0].v.get(1, 1), 23.0);
        assert_eq!(frames[1].y.get(0, 0), 24.0);
        assert_eq!(frames[1].v.get(1, 1), 47.0);
    }

    #[test]
    fn pgm_round_trip_and_comments() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("d.pgm");
        fs::write(&path, b"P5\n# a comment\n2 2\n# another\n255\n\x00\x0a\x14\x1e").unwrap();
        let p = load_disparity_pgm(&path).unwrap();
        assert_eq!(p.samples(), &[0.0, 10.0, 20.0, 30.0]);

        // Writer output reloads to the same samples.
        let out = dir.path().join("out.pgm");
        write_disparity_pgm(&out, &p).unwrap();
        assert_eq!(load_disparity_pgm(&out).unwrap(), p);
    }

    #[test]
    fn ascii_pgm_rejected() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("d.pgm");
        fs::write(&path, b"P2\n2 2\n255\n0 10 20 30\n").unwrap();
        match load_disparity_pgm(&path) {
            Err(Error::PgmParse { reason, .. }) => {
                assert!(reason.contains("unsupported PGM variant"), "{reason}")
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn pgm_maxval_and_payload_validated() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("d.pgm");
        fs::write(&path, b"P5\n2 2\n65535\n\x00\x00\x00\x00").unwrap();
        assert!(matches!(
            load_disparity_pgm(&path),
            Err(Error::PgmParse { .. })
        ));
        fs::write(&path, b"P5\n2 2\n255\n\x00\x00\x00").unwrap();
        assert!(matches!(
            load_disparity_pgm(&path),
            Err(Error::PgmParse { .. })
        ));
    }

    #[test]
    fn block_at_clamps_left_edge() {
        let p = Plane::from_fn(8, 8, |x, y| (y * 8 + x) as f64);
        let b = p.block_at(-2, 0, 4, 4);
        // First two columns replicate column 0.
        for y in 0..4 {
            assert_eq!(b.get(0, y), p.get(0, y));
            assert_eq!(b.get(1, y), p.get(0, y));
            assert_eq!(b.get(2, y), p.get(0, y));
            assert_eq!(b.get(3, y), p.get(1, y));
        }
    }

    #[test]
    fn corner_window_matches_scalar_clamp_oracle() {
        // 28x28 window centered на nothing special: top-left corner block of a
        // large plane, checked pixel-by-pixel against an explicit clamp loop.
        let p = Plane::from_fn(480, 800, |x, y| ((x * 31 + y * 17) % 251) as f64);
        let b = p.block_at(-12, -12, 28, 28);
        for dy in 0..28i64 {
            for dx in 0..28i64 {
                let sx = (dx - 12).max(0).min(479) as usize;
                let sy = (dy - 12).max(0).min(799) as usize;
                assert_eq!(b.get(dx as usize, dy as usize), p.get(sx, sy));
            }
        }
    }

    #[test]
    fn ingest_range_is_8bit() {
        let p = Plane::from_bytes(3, 2, &[0, 255, 7, 9, 128, 200]).unwrap();
        assert!(p.min_sample() >= 0.0);
        assert!(p.max_sample() <= 255.0);
    }

    proptest! {
        #[test]
        fn in_bounds_block_is_verbatim(
            w in 4usize..32, h in 4usize..32,
            x0 in 0usize..28, y0 in 0usize..28,
            bw in 1usize..4, bh in 1usize..4,
        ) {
            let x0 = x0.min(w - bw.min(w));
            let y0 = y0.min(h - bh.min(h));
            prop_assume!(x0 + bw <= w && y0 + bh <= h);
            let p = Plane::from_fn(w, h, |x, y| (x * 7 + y * 13) as f64);
            let b = p.block_at(x0 as i64, y0 as i64, bw, bh);
            for dy in 0..bh {
                for dx in 0..bw {
                    prop_assert_eq!(b.get(dx, dy), p.get(x0 + dx, y0 + dy));
                }
            }
        }

        #[test]
        fn i420_round_trip(w in 1usize..9, h in 1usize..9, seed in 0u8..200) {
            let w = w * 2;
            let h = h * 2;
            let mk = |pw: usize, ph: usize, off: u8| {
                Plane::from_bytes(pw, ph, &(0..pw * ph)
                    .map(|i| ((i as u8).wrapping_mul(31)).wrapping_add(seed).wrapping_add(off))
                    .collect::<Vec<_>>()).unwrap()
            };
            let f = Frame::new(mk(w, h, 0), mk(w / 2, h / 2, 77), mk(w / 2, h / 2, 154)).unwrap();
            let bytes = f.to_i420_bytes();
            let back = decode_i420(&bytes, w, h, 1).unwrap();
            prop_assert_eq!(&back[0], &f);
        }
    }
}
