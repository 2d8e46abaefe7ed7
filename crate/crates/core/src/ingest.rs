//! Observation loaders and the IEEE registry reader.
//!
//! File formats:
//! - plain MAC list: one address per line, `#` starts a comment line;
//! - MAC CSV: header `mac,label[,count]`, empty label means unlabeled;
//! - V6 CSV: header `probed,responder`, `probed` is a `/64` or a bare address;
//! - `oui.txt` as published by the IEEE (`XX-XX-XX   (hex)\t\tOrg`).

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addr::{
    extract_mac_from_eui64, oui_of, parse_ipv6, parse_mac, parse_prefix, AddrError, Ipv6Address,
    Ipv6Prefix, MacAddress, Oui,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {msg}")]
    Line { line: u64, msg: String },
    #[error("missing or malformed header: expected {expected:?}, found {found:?}")]
    Header {
        expected: &'static str,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl IngestError {
    fn line(line: u64, msg: impl ToString) -> Self {
        IngestError::Line {
            line,
            msg: msg.to_string(),
        }
    }
}

impl From<csv::Error> for IngestError {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => IngestError::Io(io),
            kind => IngestError::line(line, format!("{kind:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MacFormat {
    #[default]
    Plain,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Fail on the first malformed line instead of skipping it.
    pub strict: bool,
    pub keep_locally_assigned: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            strict: true,
            keep_locally_assigned: false,
        }
    }
}

/// Records plus what was left out and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    /// Parseable lines excluded by policy (locally-assigned MACs).
    pub dropped: usize,
    /// Malformed lines skipped in lenient mode, by line number.
    pub skipped: Vec<u64>,
}

impl<T> Default for Loaded<T> {
    fn default() -> Self {
        Loaded {
            records: Vec::new(),
            dropped: 0,
            skipped: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MacObservation {
    pub mac: MacAddress,
    pub label: Option<String>,
    pub weight: u64,
}

impl MacObservation {
    pub fn new(mac: MacAddress) -> Self {
        MacObservation {
            mac,
            label: None,
            weight: 1,
        }
    }

    /// Attaches a label; blank labels are treated as absent.
    pub fn with_label(mut self, label: &str) -> Self {
        let t = label.trim();
        self.label = (!t.is_empty()).then(|| t.to_string());
        self
    }

    pub fn with_weight(mut self, weight: u64) -> Self {
        assert!(weight >= 1, "observation weight must be positive");
        self.weight = weight;
        self
    }
}

/// A probed /64 and the address that answered for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct V6Observation {
    probed: Ipv6Prefix,
    pub responder: Ipv6Address,
}

impl V6Observation {
    /// `probed` is truncated to its /64.
    pub fn new(probed: Ipv6Address, responder: Ipv6Address) -> Self {
        V6Observation {
            probed: Ipv6Prefix::containing(probed, 64),
            responder,
        }
    }

    pub fn from_prefix(probed: Ipv6Prefix, responder: Ipv6Address) -> Result<Self, AddrError> {
        if probed.len() != 64 {
            return Err(AddrError::Prefix {
                input: probed.to_string(),
                reason: "probed prefix must be a /64",
            });
        }
        Ok(V6Observation { probed, responder })
    }

    pub fn probed(&self) -> Ipv6Prefix {
        self.probed
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn strip_bom(s: &str) -> &str {
    s.strip_prefix('\u{feff}').unwrap_or(s)
}

pub fn load_mac_observations<R: Read>(
    source: R,
    format: MacFormat,
    opts: LoadOptions,
) -> Result<Loaded<MacObservation>, IngestError> {
    match format {
        MacFormat::Plain => load_plain(io::BufReader::new(source), opts),
        MacFormat::Csv => load_mac_csv(source, opts),
    }
}

fn push_mac(out: &mut Loaded<MacObservation>, obs: MacObservation, opts: LoadOptions) {
    if obs.mac.is_locally_assigned() && !opts.keep_locally_assigned {
        out.dropped += 1;
    } else {
        out.records.push(obs);
    }
}

fn load_plain<R: BufRead>(
    source: R,
    opts: LoadOptions,
) -> Result<Loaded<MacObservation>, IngestError> {
    let mut out = Loaded::default();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i as u64 + 1;
        let text = if i == 0 { strip_bom(&line) } else { &line };
        if is_skippable(text) {
            continue;
        }
        match parse_mac(text) {
            Ok(mac) => push_mac(&mut out, MacObservation::new(mac), opts),
            Err(e) if opts.strict => return Err(IngestError::line(lineno, e)),
            Err(_) => out.skipped.push(lineno),
        }
    }
    Ok(out)
}

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(source)
}

fn check_header(
    rdr: &mut csv::Reader<impl Read>,
    expected: &'static str,
    required: &[&str],
    optional: &[&str],
) -> Result<(), IngestError> {
    let h = rdr.headers()?.clone();
    let names: Vec<String> = h
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let f = if i == 0 { strip_bom(f) } else { f };
            f.trim().to_ascii_lowercase()
        })
        .collect();
    // an empty stream has no header at all
    if names.is_empty() {
        return Ok(());
    }
    let ok = names.len() >= required.len()
        && names.len() <= required.len() + optional.len()
        && names
            .iter()
            .zip(required.iter().chain(optional))
            .all(|(n, want)| n == want);
    if ok {
        Ok(())
    } else {
        Err(IngestError::Header {
            expected,
            found: names.join(","),
        })
    }
}

fn load_mac_csv<R: Read>(
    source: R,
    opts: LoadOptions,
) -> Result<Loaded<MacObservation>, IngestError> {
    let mut rdr = csv_reader(source);
    check_header(&mut rdr, "mac,label[,count]", &["mac", "label"], &["count"])?;
    let mut out = Loaded::default();
    for rec in rdr.records() {
        let rec = rec?;
        let lineno = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        match parse_mac_record(&rec) {
            Ok(obs) => push_mac(&mut out, obs, opts),
            Err(msg) if opts.strict => return Err(IngestError::line(lineno, msg)),
            Err(_) => out.skipped.push(lineno),
        }
    }
    Ok(out)
}

fn parse_mac_record(rec: &csv::StringRecord) -> Result<MacObservation, String> {
    if rec.len() < 2 || rec.len() > 3 {
        return Err(format!("expected 2 or 3 fields, found {}", rec.len()));
    }
    let mac = parse_mac(&rec[0]).map_err(|e| e.to_string())?;
    let mut obs = MacObservation::new(mac).with_label(&rec[1]);
    if let Some(c) = rec.get(2).map(str::trim).filter(|c| !c.is_empty()) {
        match c.parse::<u64>() {
            Ok(w) if w >= 1 => obs.weight = w,
            _ => return Err(format!("invalid count {c:?}")),
        }
    }
    Ok(obs)
}

pub fn load_v6_observations<R: Read>(
    source: R,
    opts: LoadOptions,
) -> Result<Loaded<V6Observation>, IngestError> {
    let mut rdr = csv_reader(source);
    check_header(&mut rdr, "probed,responder", &["probed", "responder"], &[])?;
    let mut out = Loaded::default();
    for rec in rdr.records() {
        let rec = rec?;
        let lineno = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        match parse_v6_record(&rec) {
            Ok(obs) => out.records.push(obs),
            Err(msg) if opts.strict => return Err(IngestError::line(lineno, msg)),
            Err(_) => out.skipped.push(lineno),
        }
    }
    Ok(out)
}

fn parse_v6_record(rec: &csv::StringRecord) -> Result<V6Observation, String> {
    if rec.len() != 2 {
        return Err(format!("expected 2 fields, found {}", rec.len()));
    }
    let probed = rec[0].trim();
    let responder = parse_ipv6(&rec[1]).map_err(|e| e.to_string())?;
    if probed.contains('/') {
        let p = parse_prefix(probed).map_err(|e| e.to_string())?;
        V6Observation::from_prefix(p, responder).map_err(|e| e.to_string())
    } else {
        let a = parse_ipv6(probed).map_err(|e| e.to_string())?;
        Ok(V6Observation::new(a, responder))
    }
}

/// MACs recovered from EUI-64 interface identifiers; other addresses are skipped.
pub fn derive_macs_from_v6<'a, I>(addrs: I) -> Vec<MacObservation>
where
    I: IntoIterator<Item = &'a Ipv6Address>,
{
    addrs
        .into_iter()
        .filter_map(|a| extract_mac_from_eui64(*a))
        .map(MacObservation::new)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OuiRegistry {
    entries: HashMap<[u8; 3], String>,
}

impl OuiRegistry {
    pub fn get(&self, oui: &Oui) -> Option<&str> {
        self.entries.get(&oui.prefix).map(String::as_str)
    }

    pub fn insert(&mut self, oui: &Oui, org: impl Into<String>) {
        self.entries.insert(oui.prefix, org.into());
    }

    /// Copy of `oui` with its organization name filled in, when known.
    pub fn annotate(&self, oui: &Oui) -> Oui {
        Oui {
            prefix: oui.prefix,
            org_name: self.get(oui).map(str::to_string),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn parse_registry_line(line: &str) -> Option<(Oui, String)> {
    let line = line.trim_start();
    let (hex, rest) = line.split_once(char::is_whitespace)?;
    let rest = rest.trim_start().strip_prefix("(hex)")?;
    if hex.len() != 8 || !hex.contains('-') {
        return None;
    }
    let oui: Oui = hex.parse().ok()?;
    let org = rest.trim();
    Some((oui, org.to_string()))
}

/// Reads the IEEE `oui.txt` listing. Lines not in the `(hex)` layout are ignored.
pub fn load_oui_registry<R: Read>(source: R) -> Result<OuiRegistry, IngestError> {
    let mut reg = OuiRegistry::default();
    let mut buf = Vec::new();
    let mut rdr = io::BufReader::new(source);
    loop {
        buf.clear();
        if rdr.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        // the published file is not always clean UTF-8
        let line = String::from_utf8_lossy(&buf);
        if let Some((oui, org)) = parse_registry_line(&line) {
            reg.entries.insert(oui.prefix, org);
        }
    }
    Ok(reg)
}

/// Partitions observations by OUI, keeping input order within each group.
pub fn group_mac_by_oui<I>(obs: I) -> BTreeMap<Oui, Vec<MacObservation>>
where
    I: IntoIterator<Item = MacObservation>,
{
    let mut groups: BTreeMap<Oui, Vec<MacObservation>> = BTreeMap::new();
    for o in obs {
        groups.entry(oui_of(o.mac)).or_default().push(o);
    }
    groups
}

/// Partitions V6 observations by the /`len` prefix of the probed network.
pub fn group_v6_by_prefix<I>(obs: I, len: u8) -> BTreeMap<Ipv6Prefix, Vec<V6Observation>>
where
    I: IntoIterator<Item = V6Observation>,
{
    let mut groups: BTreeMap<Ipv6Prefix, Vec<V6Observation>> = BTreeMap::new();
    for o in obs {
        groups
            .entry(Ipv6Prefix::containing(o.probed.base(), len))
            .or_default()
            .push(o);
    }
    groups
}
