use std::path::PathBuf;

use byteaxis::Rgb;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "byteaxis",
    version,
    about = "Byte-axis plots of MAC and IPv6 address allocations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plot MAC observations, one grid per OUI.
    Mac(MacArgs),
    /// Plot IPv6 probe responses, one grid per base prefix.
    V6(V6Args),
    /// Write allocation reports as JSON without rendering.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Plain,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorModeArg {
    Mono,
    Categorical,
    Responder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Auto,
    Mac,
    V6,
}

#[derive(Debug, Args)]
pub struct Ingest {
    /// Input files; standard input when none are given.
    pub inputs: Vec<PathBuf>,
    /// Fail on the first malformed line (default).
    #[arg(long, overrides_with = "lenient")]
    pub strict: bool,
    /// Skip malformed lines and report how many were skipped.
    #[arg(long, overrides_with = "strict")]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct MacInput {
    #[arg(long, value_enum, default_value = "plain")]
    pub format: InputFormat,
    /// OUI to plot (XX:XX:XX), or `auto` for every OUI in the data.
    #[arg(long, default_value = "auto")]
    pub oui: String,
    /// Keep locally-assigned MACs, which are dropped by default.
    #[arg(long)]
    pub keep_local: bool,
    /// IEEE oui.txt used to name OUIs in titles and reports.
    #[arg(long)]
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub min_row_fill: f64,
    #[arg(long, default_value_t = 1)]
    pub max_gap_rows: usize,
}

#[derive(Debug, Args)]
pub struct Style {
    #[arg(long, value_enum)]
    pub color_mode: Option<ColorModeArg>,
    #[arg(long, default_value = "ff0000", value_parser = parse_rgb)]
    pub foreground: Rgb,
    #[arg(long, default_value = "000000", value_parser = parse_rgb)]
    pub background: Rgb,
    #[arg(long, default_value_t = 3)]
    pub scale: u32,
    /// Draw a legend (always on in categorical mode).
    #[arg(long)]
    pub legend: bool,
    #[arg(long, env = "BYTEAXIS_HUE_SEED", default_value_t = 0)]
    pub hue_seed: u64,
    /// Image path; `.svg` selects SVG, anything else PNG. `{base}` expands to
    /// the grid's base and is required when more than one base may be plotted.
    #[arg(long, default_value = "{base}.png")]
    pub out: String,
    /// Also write the allocation report as JSON.
    #[arg(long)]
    pub report: Option<String>,
    /// Also export each grid (`.csv` or `.json`).
    #[arg(long)]
    pub grid_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct MacArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    #[command(flatten)]
    pub input: MacInput,
    #[command(flatten)]
    pub style: Style,
    #[command(flatten)]
    pub bands: BandArgs,
}

#[derive(Debug, Args)]
pub struct V6Args {
    #[command(flatten)]
    pub ingest: Ingest,
    /// Base prefix (CIDR, byte-aligned), or `auto` for one grid per observed /48.
    #[arg(long, default_value = "auto")]
    pub prefix: String,
    #[command(flatten)]
    pub style: Style,
    #[command(flatten)]
    pub bands: BandArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub ingest: Ingest,
    /// Input type; `auto` looks for a `probed,responder` header.
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: InputKind,
    #[command(flatten)]
    pub input: MacInput,
    #[arg(long, default_value = "auto")]
    pub prefix: String,
    #[command(flatten)]
    pub bands: BandArgs,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<String>,
}

fn parse_rgb(s: &str) -> Result<Rgb, String> {
    s.parse()
}
