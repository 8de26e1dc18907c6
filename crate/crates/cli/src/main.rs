//! `mockrec` command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Record, replay and export interaction scenarios on mockup images.
///
/// Exit codes: 0 success, 1 validation or parse failure, 2 usage error,
/// 3 I/O failure.
#[derive(Debug, Parser)]
#[command(name = "mockrec", version)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a project and list every violation, one per line.
    Validate { project: PathBuf },
    /// Print mockup, scenario and timing summary.
    Info {
        project: PathBuf,
        #[command(flatten)]
        timing: Timing,
    },
    /// Export a scenario as a y4m video or PNG frame sequence.
    Export {
        project: PathBuf,
        scenario: String,
        #[command(flatten)]
        timing: Timing,
        #[arg(long, value_enum, default_value_t = Format::Y4m)]
        format: Format,
        /// Output file (y4m) or directory (png).
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Render the scenario frame at one point in time as PNG.
    RenderFrame {
        project: PathBuf,
        scenario: String,
        #[arg(long)]
        t_ms: u64,
        #[arg(long, default_value_t = 500)]
        hold_ms: u64,
        #[arg(long, default_value_t = 100)]
        press_flash_ms: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write every mockup image as <mockup_id>.png.
    ExportImages { project: PathBuf, out_dir: PathBuf },
    /// Apply one edit and save the project; the file is unchanged on failure.
    Edit {
        project: PathBuf,
        #[command(subcommand)]
        edit: Edit,
    },
    /// Create an empty project document.
    Init { project: PathBuf },
    /// Generate the web-store sample project into an empty directory.
    FixtureWebstore { out_dir: PathBuf },
    /// Host the project over HTTP for the recorder UI until interrupted.
    Serve {
        project: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8765")]
        bind: String,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Timing {
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(1..))]
    fps: u32,
    #[arg(long, default_value_t = 500)]
    hold_ms: u64,
    #[arg(long, default_value_t = 100)]
    press_flash_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Y4m,
    Png,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Button,
    TextInput,
    Checkbox,
    Hotspot,
}

#[derive(Debug, Subcommand)]
pub enum Edit {
    /// Import an image and add a mockup for it.
    AddMockup {
        image: PathBuf,
        #[arg(long)]
        name: String,
    },
    /// Add a responsive control to a mockup.
    AddControl {
        mockup: String,
        #[arg(long, value_enum)]
        kind: Kind,
        /// x,y,w,h in mockup pixels.
        #[arg(long)]
        bbox: String,
        /// `pressed`, `checked` or initial text; defaults to released, unchecked, empty.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        label: Option<String>,
    },
    AddScenario { name: String },
    /// Append an entry showing a mockup to the end of a scenario.
    AddEntry { scenario: String, mockup: String },
    /// Move an entry to a new position (0-based).
    MoveEntry { scenario: String, entry: String, index: usize },
    DeleteEntry { scenario: String, entry: String },
    /// Remove every event of an entry.
    ClearSeq { entry: String },
    /// Append the events of a file to an entry.
    Record {
        entry: String,
        #[arg(long)]
        events: PathBuf,
    },
    /// Insert the events of a file at a position of an entry's sequence.
    InsertEvent {
        entry: String,
        #[arg(long)]
        at: usize,
        #[arg(long)]
        events: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).with_target(false).init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mockrec: {e}");
            ExitCode::from(e.code())
        }
    }
}
