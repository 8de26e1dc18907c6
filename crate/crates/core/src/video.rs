//! Video output: y4m streams and PNG frame sequences.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_project, MockupId, Project, ScenarioId, Violation};
use crate::raster::{render_frame, Frame, RasterError};
use crate::replay::{sample_frames, unfocused_key_events, ReplayConfig, ReplayError, ScenarioPlayer};
use crate::store::{AssetStore, StoreError};

/// Frames rendered in parallel before being handed to the writer.
const RENDER_BATCH: usize = 64;

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("no frames to write")]
    NoFrames,
    #[error("frame {index} is {actual_w}x{actual_h}, stream is {width}x{height}")]
    DimensionMismatch { index: u64, width: u32, height: u32, actual_w: u32, actual_h: u32 },
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("project is invalid ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0} exists and holds files other than exported frames")]
    OutputInUse(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> VideoError + '_ {
    move |source| VideoError::Io { path: path.to_path_buf(), source }
}

/// Full-range BT.601 conversion, rounded half up, in exact integer
/// arithmetic (coefficients scaled by 10^6).
pub fn rgb_to_ycbcr([r, g, b]: [u8; 3]) -> [u8; 3] {
    let (r, g, b) = (i64::from(r), i64::from(g), i64::from(b));
    let conv = |v: i64| (v + 500_000).div_euclid(1_000_000).clamp(0, 255) as u8;
    [
        conv(299_000 * r + 587_000 * g + 114_000 * b),
        conv(128_000_000 - 168_736 * r - 331_264 * g + 500_000 * b),
        conv(128_000_000 + 500_000 * r - 418_688 * g - 81_312 * b),
    ]
}

pub fn y4m_header(width: u32, height: u32, fps: u32) -> String {
    format!("YUV4MPEG2 W{width} H{height} F{fps}:1 Ip A1:1 C444\n")
}

/// Streams frames into a YUV4MPEG2 container with 4:4:4 sampling.
pub struct Y4mWriter<W: Write> {
    out: W,
    width: u32,
    height: u32,
    frames: u64,
    bytes: u64,
    planes: Vec<u8>,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut out: W, width: u32, height: u32, fps: u32) -> io::Result<Self> {
        let header = y4m_header(width, height, fps);
        out.write_all(header.as_bytes())?;
        let plane = width as usize * height as usize;
        Ok(Self { out, width, height, frames: 0, bytes: header.len() as u64, planes: vec![0; plane * 3] })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<(), VideoError> {
        if (frame.width(), frame.height()) != (self.width, self.height) {
            return Err(VideoError::DimensionMismatch {
                index: self.frames,
                width: self.width,
                height: self.height,
                actual_w: frame.width(),
                actual_h: frame.height(),
            });
        }
        let plane = self.planes.len() / 3;
        let (y, rest) = self.planes.split_at_mut(plane);
        let (cb, cr) = rest.split_at_mut(plane);
        for (i, px) in frame.pixels().chunks_exact(3).enumerate() {
            let [py, pb, pr] = rgb_to_ycbcr([px[0], px[1], px[2]]);
            y[i] = py;
            cb[i] = pb;
            cr[i] = pr;
        }
        let io = |source| VideoError::Io { path: PathBuf::new(), source };
        self.out.write_all(b"FRAME\n").map_err(io)?;
        self.out.write_all(&self.planes).map_err(io)?;
        self.frames += 1;
        self.bytes += 6 + self.planes.len() as u64;
        Ok(())
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    /// Flushes and returns the underlying writer.
    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Writes all frames to a y4m file. Returns the file size in bytes.
pub fn write_y4m(frames: &[Frame], fps: u32, path: &Path) -> Result<u64, VideoError> {
    let first = frames.first().ok_or(VideoError::NoFrames)?;
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut writer = Y4mWriter::new(BufWriter::new(file), first.width(), first.height(), fps).map_err(io_err(path))?;
    for frame in frames {
        writer.write_frame(frame).map_err(|e| with_path(e, path))?;
    }
    let bytes = writer.bytes();
    writer.finish().map_err(io_err(path))?.into_inner().map_err(|e| io_err(path)(e.into_error()))?.sync_all().map_err(io_err(path))?;
    Ok(bytes)
}

fn with_path(e: VideoError, path: &Path) -> VideoError {
    match e {
        VideoError::Io { source, .. } => VideoError::Io { path: path.to_path_buf(), source },
        other => other,
    }
}

pub fn png_frame_name(index: u64) -> String {
    format!("frame_{index:06}.png")
}

/// Writes `frame_000000.png`, `frame_000001.png`, ... into `dir`.
pub fn write_png_sequence(frames: &[Frame], dir: &Path) -> Result<usize, VideoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.join(png_frame_name(i as u64));
        fs::write(&path, frame.encode_png()).map_err(io_err(&path))?;
    }
    Ok(frames.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Y4m,
    PngSequence,
}

impl ExportFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::Y4m => "y4m",
            ExportFormat::PngSequence => "png_sequence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportConfig {
    pub format: ExportFormat,
    /// Target file for y4m, target directory for PNG sequences.
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExportReport {
    pub frames: u64,
    pub duration_ms: u64,
    pub bytes: u64,
    pub output: PathBuf,
    pub unfocused_key_events: usize,
}

impl ExportReport {
    /// Single-line `key=value` summary.
    pub fn line(&self) -> String {
        format!(
            "frames={} duration_ms={} bytes={} output={}",
            self.frames,
            self.duration_ms,
            self.bytes,
            self.output.display()
        )
    }
}

enum Sink {
    Y4m(Y4mWriter<BufWriter<fs::File>>),
    Png { dir: PathBuf, count: u64, bytes: u64 },
}

impl Sink {
    fn write(&mut self, frame: &Frame, partial: &Path) -> Result<(), VideoError> {
        match self {
            Sink::Y4m(w) => w.write_frame(frame).map_err(|e| with_path(e, partial)),
            Sink::Png { dir, count, bytes } => {
                let path = dir.join(png_frame_name(*count));
                let png = frame.encode_png();
                fs::write(&path, &png).map_err(io_err(&path))?;
                *count += 1;
                *bytes += png.len() as u64;
                Ok(())
            }
        }
    }

    fn finish(self, partial: &Path) -> Result<u64, VideoError> {
        match self {
            Sink::Y4m(w) => {
                let bytes = w.bytes();
                let file = w.finish().map_err(io_err(partial))?.into_inner().map_err(|e| io_err(partial)(e.into_error()))?;
                file.sync_all().map_err(io_err(partial))?;
                Ok(bytes)
            }
            Sink::Png { bytes, .. } => Ok(bytes),
        }
    }
}

fn partial_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    output.with_file_name(name)
}

/// A directory may be replaced by a PNG export only if it holds nothing but
/// frames of an earlier export.
fn replaceable_frame_dir(dir: &Path) -> Result<(), VideoError> {
    if !dir.exists() {
        return Ok(());
    }
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    for entry in entries {
        let name = entry.map_err(io_err(dir))?.file_name();
        let name = name.to_string_lossy();
        let is_frame = name.len() == 16
            && name.starts_with("frame_")
            && name.ends_with(".png")
            && name[6..12].bytes().all(|b| b.is_ascii_digit());
        if !is_frame {
            return Err(VideoError::OutputInUse(dir.to_path_buf()));
        }
    }
    Ok(())
}

fn remove_any(path: &Path) {
    if path.is_dir() {
        let _ = fs::remove_dir_all(path);
    } else {
        let _ = fs::remove_file(path);
    }
}

/// Replays a scenario and writes every sampled frame.
///
/// Output is produced under a `.partial` name and moved into place only once
/// complete, so a failed export leaves nothing behind.
pub fn export_scenario_video(
    project: &Project,
    assets: &AssetStore,
    scenario_id: &ScenarioId,
    replay: &ReplayConfig,
    export: &ExportConfig,
) -> Result<ExportReport, VideoError> {
    let scenario = project.scenario(scenario_id).ok_or_else(|| VideoError::UnknownScenario(scenario_id.to_string()))?;
    if replay.fps == 0 {
        return Err(ReplayError::InvalidFps.into());
    }
    if scenario.entries.is_empty() {
        return Err(ReplayError::EmptyScenario.into());
    }
    let violations = validate_project(project, assets);
    if !violations.is_empty() {
        return Err(VideoError::Invalid(violations));
    }
    let mut player = ScenarioPlayer::new(project, scenario, replay)?;
    let (canvas_w, canvas_h) = player.canvas_size();

    let mut images: HashMap<&MockupId, Frame> = HashMap::new();
    let mut unfocused = 0;
    for entry in &scenario.entries {
        let mockup = project.entry_mockup(entry).expect("validated");
        unfocused += unfocused_key_events(mockup, &entry.sequence);
        if !images.contains_key(&mockup.id) {
            images.insert(&mockup.id, assets.load_frame(&mockup.image_ref)?);
        }
    }
    if unfocused > 0 {
        tracing::warn!(scenario = %scenario_id, count = unfocused, "key events without a focused text input are ignored");
    }

    if export.format == ExportFormat::PngSequence {
        replaceable_frame_dir(&export.output)?;
    }
    let partial = partial_path(&export.output);
    remove_any(&partial);
    let result = (|| {
        let mut sink = match export.format {
            ExportFormat::Y4m => {
                let file = fs::File::create(&partial).map_err(io_err(&partial))?;
                Sink::Y4m(Y4mWriter::new(BufWriter::new(file), canvas_w, canvas_h, replay.fps).map_err(io_err(&partial))?)
            }
            ExportFormat::PngSequence => {
                fs::create_dir_all(&partial).map_err(io_err(&partial))?;
                Sink::Png { dir: partial.clone(), count: 0, bytes: 0 }
            }
        };
        let timeline = player.timeline().clone();
        let mut samples = sample_frames(&timeline, replay);
        let mut frames = 0u64;
        loop {
            let batch: Vec<_> = samples
                .by_ref()
                .take(RENDER_BATCH)
                .map(|s| player.entry_state(s.span, s.local_t_ms))
                .collect();
            if batch.is_empty() {
                break;
            }
            let rendered: Vec<Frame> = batch
                .par_iter()
                .map(|(mockup, state)| render_frame(mockup, &images[&mockup.id], state, canvas_w, canvas_h))
                .collect::<Result<_, _>>()?;
            for frame in &rendered {
                sink.write(frame, &partial)?;
            }
            frames += rendered.len() as u64;
        }
        let bytes = sink.finish(&partial)?;
        if export.format == ExportFormat::PngSequence && export.output.is_dir() {
            fs::remove_dir_all(&export.output).map_err(io_err(&export.output))?;
        }
        fs::rename(&partial, &export.output).map_err(io_err(&export.output))?;
        Ok(ExportReport {
            frames,
            duration_ms: timeline.total_ms,
            bytes,
            output: export.output.clone(),
            unfocused_key_events: unfocused,
        })
    })();
    if result.is_err() {
        remove_any(&partial);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference conversion in floating point, used as an independent check.
    fn float_ycbcr([r, g, b]: [u8; 3]) -> [u8; 3] {
        let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
        let c = |v: f64| (v + 0.5).floor().clamp(0.0, 255.0) as u8;
        [
            c(0.299 * r + 0.587 * g + 0.114 * b),
            c(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
            c(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b),
        ]
    }

    #[test]
    fn reference_colors() {
        assert_eq!(rgb_to_ycbcr([255, 255, 255]), [255, 128, 128]);
        assert_eq!(rgb_to_ycbcr([0, 0, 0]), [0, 128, 128]);
        assert_eq!(rgb_to_ycbcr([255, 0, 0]), [76, 85, 255]);
        assert_eq!(rgb_to_ycbcr([0, 0, 255]), [29, 255, 107]);
    }

    #[test]
    fn grays_are_chroma_neutral() {
        for v in 0..=255u8 {
            let [y, cb, cr] = rgb_to_ycbcr([v, v, v]);
            assert_eq!((y, cb, cr), (v, 128, 128));
        }
    }

    #[test]
    fn agrees_with_float_reference_away_from_ties() {
        let mut step = 0u32;
        for r in (0..=255u8).step_by(5) {
            for g in (0..=255u8).step_by(7) {
                for b in (0..=255u8).step_by(3) {
                    step += 1;
                    let exact = rgb_to_ycbcr([r, g, b]);
                    let approx = float_ycbcr([r, g, b]);
                    for (e, a) in exact.iter().zip(approx) {
                        assert!(e.abs_diff(a) <= 1, "rgb {r},{g},{b}: {exact:?} vs {approx:?}");
                    }
                }
            }
        }
        assert!(step > 10_000);
    }

    #[test]
    fn size_law_on_tiny_stream() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.y4m");
        let frames = vec![Frame::filled(4, 4, [255, 255, 255]), Frame::filled(4, 4, [0, 0, 0])];
        let bytes = write_y4m(&frames, 30, &path).unwrap();
        let data = fs::read(&path).unwrap();
        let header = "YUV4MPEG2 W4 H4 F30:1 Ip A1:1 C444\n";
        assert!(data.starts_with(header.as_bytes()));
        assert_eq!(data.len() as u64, bytes);
        assert_eq!(data.len(), header.len() + 2 * (6 + 3 * 16));
        let f0 = &data[header.len()..header.len() + 6 + 48];
        assert_eq!(&f0[..6], b"FRAME\n");
        assert!(f0[6..22].iter().all(|&v| v == 255));
        assert!(f0[22..].iter().all(|&v| v == 128));
    }

    #[test]
    fn mismatched_frames_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let frames = vec![Frame::new(4, 4), Frame::new(5, 4)];
        assert!(matches!(write_y4m(&frames, 30, &dir.path().join("x.y4m")), Err(VideoError::DimensionMismatch { index: 1, .. })));
        assert!(matches!(write_y4m(&[], 30, &dir.path().join("y.y4m")), Err(VideoError::NoFrames)));
    }

    #[test]
    fn png_sequence_naming() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<_> = (0..45u8).map(|i| Frame::filled(3, 2, [i, i, i])).collect();
        assert_eq!(write_png_sequence(&frames, dir.path()).unwrap(), 45);
        assert!(dir.path().join("frame_000044.png").is_file());
        assert!(!dir.path().join("frame_000045.png").exists());
        let first = Frame::decode(&fs::read(dir.path().join("frame_000000.png")).unwrap()).unwrap();
        assert_eq!(first, frames[0]);
    }
}
