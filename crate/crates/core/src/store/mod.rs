//! Project persistence: the text document, the asset directory beside it and
//! mockup image export.

mod format;
mod parse;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use format::{event_statement, quote, to_canonical_string};
pub use parse::{parse_events, parse_project, ParseError, ParseReason};

use crate::model::{validate_project, AssetCatalog, AssetProblem, Project, Violation};
use crate::raster::{Frame, RasterError};

/// Conventional extension of project documents.
pub const PROJECT_EXTENSION: &str = "mrp";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("{0}")]
    UnsupportedVersion(ParseError),
    #[error("project is invalid ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
    #[error("cannot decode image {path}: {source}")]
    Decode { path: PathBuf, source: RasterError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("export stopped after {written} file(s): {source}")]
    PartialExport { written: usize, source: Box<StoreError> },
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io { path: path.to_path_buf(), source }
    }

    pub fn is_io(&self) -> bool {
        match self {
            StoreError::Io { .. } => true,
            StoreError::PartialExport { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

impl From<ParseError> for StoreError {
    fn from(e: ParseError) -> Self {
        if e.reason == ParseReason::UnsupportedSchemaVersion {
            StoreError::UnsupportedVersion(e)
        } else {
            StoreError::Parse(e)
        }
    }
}

/// Directory holding the project document.
pub fn project_dir(project_path: &Path) -> &Path {
    match project_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers see either the old or the new content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = project_dir(path);
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        StoreError::io(path, e)
    })
}

/// Parses a project document without touching the file system.
pub fn project_from_bytes(bytes: &[u8]) -> Result<Project, StoreError> {
    Ok(parse_project(bytes)?)
}

/// Reads, parses and validates a project, resolving images under its
/// asset directory.
pub fn load_project(path: &Path) -> Result<Project, StoreError> {
    let bytes = fs::read(path).map_err(|e| StoreError::io(path, e))?;
    let project = project_from_bytes(&bytes)?;
    let assets = AssetStore::for_project(path, &project);
    let violations = validate_project(&project, &assets);
    if !violations.is_empty() {
        return Err(StoreError::Invalid(violations));
    }
    Ok(project)
}

/// Validates and writes the canonical document. Returns the bytes written.
pub fn save_project(project: &Project, path: &Path) -> Result<u64, StoreError> {
    let assets = AssetStore::for_project(path, project);
    let violations = validate_project(project, &assets);
    if !violations.is_empty() {
        return Err(StoreError::Invalid(violations));
    }
    let text = to_canonical_string(project);
    write_atomic(path, text.as_bytes())?;
    Ok(text.len() as u64)
}

/// Result of importing an image into the asset store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportedImage {
    pub image_ref: String,
    pub width_px: u32,
    pub height_px: u32,
}

/// Content-addressed image directory. Every stored image is a lossless
/// RGB PNG named after a digest of its pixels.
#[derive(Debug, Clone)]
pub struct AssetStore {
    root: PathBuf,
}

impl AssetStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// The asset directory of the project stored at `project_path`.
    pub fn for_project(project_path: &Path, project: &Project) -> Self {
        Self::new(project_dir(project_path).join(&project.asset_dir))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, image_ref: &str) -> PathBuf {
        self.root.join(image_ref)
    }

    /// Image reference a frame would be stored under.
    pub fn image_ref_for(frame: &Frame) -> String {
        let mut hasher = Sha256::new();
        hasher.update(frame.width().to_be_bytes());
        hasher.update(frame.height().to_be_bytes());
        hasher.update(frame.pixels());
        let digest = hasher.finalize();
        format!("{}.png", &hex::encode(digest)[..32])
    }

    /// Decodes and stores an image file. A file that cannot be decoded leaves
    /// the store untouched.
    pub fn import(&self, source: &Path) -> Result<ImportedImage, StoreError> {
        let bytes = fs::read(source).map_err(|e| StoreError::io(source, e))?;
        let frame = Frame::decode(&bytes).map_err(|e| StoreError::Decode { path: source.to_path_buf(), source: e })?;
        self.store_frame(&frame)
    }

    pub fn store_frame(&self, frame: &Frame) -> Result<ImportedImage, StoreError> {
        let image_ref = Self::image_ref_for(frame);
        let path = self.path_of(&image_ref);
        if !path.is_file() {
            fs::create_dir_all(&self.root).map_err(|e| StoreError::io(&self.root, e))?;
            write_atomic(&path, &frame.encode_png())?;
        }
        Ok(ImportedImage { image_ref, width_px: frame.width(), height_px: frame.height() })
    }

    pub fn load_frame(&self, image_ref: &str) -> Result<Frame, StoreError> {
        let path = self.path_of(image_ref);
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        Frame::decode(&bytes).map_err(|e| StoreError::Decode { path, source: e })
    }
}

impl AssetCatalog for AssetStore {
    fn image_dimensions(&self, image_ref: &str) -> Result<(u32, u32), AssetProblem> {
        let path = self.path_of(image_ref);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(AssetProblem::Missing),
            Err(e) => return Err(AssetProblem::Undecodable(e.to_string())),
        };
        Frame::decode(&bytes).map(|f| (f.width(), f.height())).map_err(|e| AssetProblem::Undecodable(e.to_string()))
    }
}

/// Writes `<mockup_id>.png` for every mockup into `out_dir`. On failure the
/// files already written stay in place and their count is reported.
pub fn export_mockup_images(project: &Project, assets: &AssetStore, out_dir: &Path) -> Result<usize, StoreError> {
    let mut written = 0;
    let partial = |written, source| StoreError::PartialExport { written, source: Box::new(source) };
    fs::create_dir_all(out_dir).map_err(|e| partial(0, StoreError::io(out_dir, e)))?;
    for mockup in &project.mockups {
        let frame = assets.load_frame(&mockup.image_ref).map_err(|e| partial(written, e))?;
        let path = out_dir.join(format!("{}.png", mockup.id));
        fs::write(&path, frame.encode_png()).map_err(|e| partial(written, StoreError::io(&path, e)))?;
        written += 1;
    }
    Ok(written)
}
