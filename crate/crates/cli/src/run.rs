use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use byteaxis::{
    assign_colors, build_mac_grid, build_v6_grid, group_mac_by_oui, group_v6_by_prefix,
    load_mac_observations, load_oui_registry, load_v6_observations, render_png, render_svg,
    summarize, write_grid_csv, write_grid_json, AllocationReport, BandParams, ByteAxisGrid,
    ColorMode, GridBase, IngestError, Ipv6Prefix, LoadOptions, MacFormat, MacObservation, Oui,
    OuiRegistry, RenderConfig, V6Observation,
};
use thiserror::Error;

use crate::args::{
    AnalyzeArgs, BandArgs, ColorModeArg, Ingest, InputFormat, InputKind, MacArgs, MacInput, Style,
    V6Args,
};

/// Exit status 1 for bad input or arguments, 2 for I/O failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Auto-discovered V6 bases are /48s.
const AUTO_PREFIX_LEN: u8 = 48;
const BASE_PLACEHOLDER: &str = "{base}";

struct Source {
    name: String,
    data: Vec<u8>,
}

fn read_sources(paths: &[PathBuf]) -> Result<Vec<Source>> {
    if paths.is_empty() {
        let mut data = Vec::new();
        io::stdin()
            .read_to_end(&mut data)
            .map_err(|e| CliError::Io(format!("<stdin>: {e}")))?;
        return Ok(vec![Source {
            name: "<stdin>".into(),
            data,
        }]);
    }
    paths
        .iter()
        .map(|p| {
            fs::read(p)
                .map(|data| Source {
                    name: p.display().to_string(),
                    data,
                })
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn ingest_error(name: &str, e: IngestError) -> CliError {
    match e {
        IngestError::Io(io) => CliError::Io(format!("{name}: {io}")),
        other => CliError::Input(format!("{name}: {other}")),
    }
}

fn load_options(ingest: &Ingest, keep_local: bool) -> LoadOptions {
    LoadOptions {
        strict: !ingest.lenient,
        keep_locally_assigned: keep_local,
    }
}

fn report_policy(name: &str, dropped: usize, skipped: &[u64]) {
    if dropped > 0 {
        eprintln!("warning: {name}: dropped {dropped} locally-assigned MAC(s)");
    }
    if !skipped.is_empty() {
        let shown: Vec<String> = skipped.iter().take(10).map(u64::to_string).collect();
        eprintln!(
            "warning: {name}: skipped {} malformed line(s) (lines {}{})",
            skipped.len(),
            shown.join(", "),
            if skipped.len() > 10 { ", ..." } else { "" }
        );
    }
}

fn load_macs(sources: &[Source], ingest: &Ingest, input: &MacInput) -> Result<Vec<MacObservation>> {
    let fmt = match input.format {
        InputFormat::Plain => MacFormat::Plain,
        InputFormat::Csv => MacFormat::Csv,
    };
    let opts = load_options(ingest, input.keep_local);
    let mut out = Vec::new();
    for s in sources {
        let loaded = load_mac_observations(s.data.as_slice(), fmt, opts)
            .map_err(|e| ingest_error(&s.name, e))?;
        report_policy(&s.name, loaded.dropped, &loaded.skipped);
        out.extend(loaded.records);
    }
    Ok(out)
}

fn load_v6(sources: &[Source], ingest: &Ingest) -> Result<Vec<V6Observation>> {
    let opts = load_options(ingest, false);
    let mut out = Vec::new();
    for s in sources {
        let loaded =
            load_v6_observations(s.data.as_slice(), opts).map_err(|e| ingest_error(&s.name, e))?;
        report_policy(&s.name, loaded.dropped, &loaded.skipped);
        out.extend(loaded.records);
    }
    Ok(out)
}

fn load_registry(path: Option<&Path>) -> Result<Option<OuiRegistry>> {
    let Some(path) = path else { return Ok(None) };
    let f = fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_oui_registry(f)
        .map(Some)
        .map_err(|e| ingest_error(&path.display().to_string(), e))
}

/// Grids plus whether the base was chosen explicitly.
struct Selection {
    grids: Vec<ByteAxisGrid>,
    explicit: bool,
}

/// An explicit OUI missing from the data yields no grid when plotting and an
/// empty one when `keep_empty` is set.
fn mac_grids(obs: Vec<MacObservation>, oui: &str, keep_empty: bool) -> Result<Selection> {
    let mut groups = group_mac_by_oui(obs);
    let explicit = !oui.eq_ignore_ascii_case("auto");
    let selected: Vec<(Oui, Vec<MacObservation>)> = if explicit {
        let want: Oui = oui
            .parse()
            .map_err(|e: byteaxis::AddrError| CliError::Input(e.to_string()))?;
        match groups.remove(&want) {
            Some(v) => vec![(want, v)],
            None if keep_empty => vec![(want, Vec::new())],
            None => {
                eprintln!("warning: OUI {want} does not occur in the input; nothing to plot");
                Vec::new()
            }
        }
    } else {
        groups.into_iter().collect()
    };
    let grids = selected
        .into_iter()
        .map(|(oui, obs)| build_mac_grid(oui, &obs).map_err(|e| CliError::Input(e.to_string())))
        .collect::<Result<_>>()?;
    Ok(Selection { grids, explicit })
}

fn v6_grids(obs: Vec<V6Observation>, prefix: &str) -> Result<Selection> {
    if prefix.eq_ignore_ascii_case("auto") {
        let grids = group_v6_by_prefix(obs, AUTO_PREFIX_LEN)
            .into_iter()
            .map(|(base, obs)| {
                build_v6_grid(base, &obs).map_err(|e| CliError::Input(e.to_string()))
            })
            .collect::<Result<_>>()?;
        return Ok(Selection {
            grids,
            explicit: false,
        });
    }
    let base: Ipv6Prefix = prefix
        .parse()
        .map_err(|e: byteaxis::AddrError| CliError::Input(e.to_string()))?;
    let mut grid = ByteAxisGrid::for_prefix(base).map_err(|e| CliError::Input(e.to_string()))?;
    for o in &obs {
        grid.add_v6(o)
            .map_err(|e| CliError::Input(format!("row {},{}: {e}", o.probed(), o.responder)))?;
    }
    Ok(Selection {
        grids: vec![grid],
        explicit: true,
    })
}

fn band_params(b: &BandArgs) -> Result<BandParams> {
    if !(b.min_row_fill.is_finite() && b.min_row_fill > 0.0 && b.min_row_fill <= 1.0) {
        return Err(CliError::Input(format!(
            "--min-row-fill must be in (0, 1], got {}",
            b.min_row_fill
        )));
    }
    Ok(BandParams {
        min_row_fill: b.min_row_fill,
        max_gap_rows: b.max_gap_rows,
    })
}

fn expand(template: &str, base: &GridBase) -> String {
    template.replace(BASE_PLACEHOLDER, &base.slug())
}

fn write_file(path: &str, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn annotate(mut report: AllocationReport, registry: Option<&OuiRegistry>) -> AllocationReport {
    if let (GridBase::MacOui { oui }, Some(reg)) = (&report.base, registry) {
        report.base = GridBase::MacOui {
            oui: reg.annotate(oui),
        };
    }
    report
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| CliError::Input(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

/// One object per file when the path has `{base}`; otherwise a single object
/// for an explicit base or an array under auto discovery.
fn emit_reports(reports: &[AllocationReport], explicit: bool, dest: Option<&str>) -> Result<()> {
    match dest {
        Some(t) if t.contains(BASE_PLACEHOLDER) => {
            for r in reports {
                write_file(&expand(t, &r.base), &to_json(r)?)?;
            }
            Ok(())
        }
        _ => {
            let doc = if explicit && reports.len() == 1 {
                to_json(&reports[0])?
            } else {
                to_json(&reports)?
            };
            match dest {
                Some(path) => write_file(path, &doc),
                None => io::stdout()
                    .write_all(&doc)
                    .map_err(|e| CliError::Io(format!("<stdout>: {e}"))),
            }
        }
    }
}

fn check_template(flag: &str, template: &str, explicit: bool) -> Result<()> {
    if !explicit && !template.contains(BASE_PLACEHOLDER) {
        return Err(CliError::Input(format!(
            "{flag} {template:?} must contain {BASE_PLACEHOLDER} when the base is auto-discovered"
        )));
    }
    Ok(())
}

fn title(base: &GridBase, registry: Option<&OuiRegistry>) -> String {
    match base {
        GridBase::MacOui { oui } => match registry.and_then(|r| r.get(oui)) {
            Some(org) => format!("OUI {oui} {org}"),
            None => format!("OUI {oui}"),
        },
        GridBase::V6Prefix { prefix } => prefix.to_string(),
    }
}

fn plot(
    sel: Selection,
    style: &Style,
    default_mode: ColorModeArg,
    bands: &BandArgs,
    registry: Option<&OuiRegistry>,
) -> Result<()> {
    check_template("--out", &style.out, sel.explicit)?;
    if let Some(g) = &style.grid_out {
        check_template("--grid-out", g, sel.explicit)?;
    }
    let params = band_params(bands)?;
    let mode_arg = style.color_mode.unwrap_or(default_mode);
    let mode = match mode_arg {
        ColorModeArg::Mono => ColorMode::monochrome(style.foreground),
        ColorModeArg::Categorical => ColorMode::categorical(),
        ColorModeArg::Responder => ColorMode::responder(style.hue_seed),
    };
    let svg = style.out.to_ascii_lowercase().ends_with(".svg");
    let mut reports = Vec::new();
    for grid in &sel.grids {
        let colors = assign_colors(grid, &mode, style.background);
        for w in &colors.warnings {
            eprintln!("warning: {}: {w}", grid.base());
        }
        let cfg = RenderConfig {
            background: style.background,
            scale: style.scale,
            legend: style.legend || mode_arg == ColorModeArg::Categorical,
            title: Some(title(grid.base(), registry)),
            ..RenderConfig::default()
        };
        let bytes = if svg {
            render_svg(grid, &colors, &cfg).map(String::into_bytes)
        } else {
            render_png(grid, &colors, &cfg)
        }
        .map_err(|e| CliError::Input(e.to_string()))?;
        let path = expand(&style.out, grid.base());
        write_file(&path, &bytes)?;
        eprintln!(
            "wrote {path} ({} observations, {} cells)",
            grid.total(),
            grid.occupied_count()
        );

        if let Some(t) = &style.grid_out {
            let path = expand(t, grid.base());
            let mut buf = Vec::new();
            let res = if path.to_ascii_lowercase().ends_with(".csv") {
                write_grid_csv(grid, &mut buf)
            } else {
                write_grid_json(grid, &mut buf)
            };
            res.map_err(|e| CliError::Input(e.to_string()))?;
            write_file(&path, &buf)?;
        }
        if style.report.is_some() {
            reports.push(annotate(summarize(grid, &params), registry));
        }
    }
    if let Some(dest) = &style.report {
        emit_reports(&reports, sel.explicit, Some(dest))?;
    }
    Ok(())
}

pub fn run_mac(args: &MacArgs) -> Result<()> {
    let sources = read_sources(&args.ingest.inputs)?;
    let registry = load_registry(args.input.registry.as_deref())?;
    let obs = load_macs(&sources, &args.ingest, &args.input)?;
    let sel = mac_grids(obs, &args.input.oui, false)?;
    plot(
        sel,
        &args.style,
        ColorModeArg::Mono,
        &args.bands,
        registry.as_ref(),
    )
}

pub fn run_v6(args: &V6Args) -> Result<()> {
    let sources = read_sources(&args.ingest.inputs)?;
    let obs = load_v6(&sources, &args.ingest)?;
    let sel = v6_grids(obs, &args.prefix)?;
    plot(sel, &args.style, ColorModeArg::Responder, &args.bands, None)
}

fn looks_like_v6(sources: &[Source]) -> bool {
    let Some(first) = sources.first() else {
        return false;
    };
    String::from_utf8_lossy(&first.data)
        .lines()
        .map(|l| l.trim_start_matches('\u{feff}').trim())
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.to_ascii_lowercase().starts_with("probed"))
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<()> {
    let params = band_params(&args.bands)?;
    let sources = read_sources(&args.ingest.inputs)?;
    let v6 = match args.kind {
        InputKind::V6 => true,
        InputKind::Mac => false,
        InputKind::Auto => !args.prefix.eq_ignore_ascii_case("auto") || looks_like_v6(&sources),
    };
    let registry = load_registry(args.input.registry.as_deref())?;
    let sel = if v6 {
        v6_grids(load_v6(&sources, &args.ingest)?, &args.prefix)?
    } else {
        mac_grids(
            load_macs(&sources, &args.ingest, &args.input)?,
            &args.input.oui,
            true,
        )?
    };
    let reports: Vec<_> = sel
        .grids
        .iter()
        .map(|g| annotate(summarize(g, &params), registry.as_ref()))
        .collect();
    emit_reports(&reports, sel.explicit, args.out.as_deref())
}
