//! The 256×256 cell matrix behind every plot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::addr::{mac_cell, v6_cell, AddrError, CellCoord, Ipv6Prefix, MacAddress, Oui};
use crate::ingest::{MacObservation, V6Observation};

pub const GRID_SIDE: usize = 256;
pub const GRID_CELLS: usize = GRID_SIDE * GRID_SIDE;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("{mac} does not belong to OUI {oui}")]
    OuiMismatch { mac: MacAddress, oui: Oui },
    #[error(transparent)]
    Addr(#[from] AddrError),
    #[error("cannot combine grids over different bases ({0} vs {1})")]
    BaseMismatch(GridBase, GridBase),
    #[error("{0}")]
    Invalid(String),
}

/// The allocation block a grid covers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridBase {
    MacOui { oui: Oui },
    V6Prefix { prefix: Ipv6Prefix },
}

impl GridBase {
    pub fn is_mac(&self) -> bool {
        matches!(self, GridBase::MacOui { .. })
    }

    pub fn slug(&self) -> String {
        match self {
            GridBase::MacOui { oui } => oui.slug(),
            GridBase::V6Prefix { prefix } => prefix.slug(),
        }
    }
}

impl fmt::Display for GridBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridBase::MacOui { oui } => write!(f, "{oui}"),
            GridBase::V6Prefix { prefix } => write!(f, "{prefix}"),
        }
    }
}

/// Aggregated observations for one cell. Labels are a multiset
/// (label → multiplicity); responders are canonical IPv6 text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cell {
    pub count: u64,
    pub labels: BTreeMap<String, u64>,
    pub responders: BTreeSet<String>,
}

impl Cell {
    pub fn is_occupied(&self) -> bool {
        self.count > 0
    }

    /// Most frequent label; ties go to the lexicographically smallest.
    pub fn majority_label(&self) -> Option<&str> {
        let mut best: Option<(&str, u64)> = None;
        // BTreeMap iterates in ascending key order, so `>` keeps the smallest on ties
        for (label, &n) in &self.labels {
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((label, n));
            }
        }
        best.map(|(l, _)| l)
    }

    /// Smallest responder key, used as the cell's representative.
    pub fn representative_responder(&self) -> Option<&str> {
        self.responders.iter().next().map(String::as_str)
    }

    fn absorb(&mut self, other: &Cell) {
        self.count += other.count;
        for (l, n) in &other.labels {
            *self.labels.entry(l.clone()).or_insert(0) += n;
        }
        self.responders.extend(other.responders.iter().cloned());
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteAxisGrid {
    base: GridBase,
    cells: Vec<Cell>,
    total: u64,
}

impl ByteAxisGrid {
    pub fn new(base: GridBase) -> Self {
        ByteAxisGrid {
            base,
            cells: vec![Cell::default(); GRID_CELLS],
            total: 0,
        }
    }

    pub fn for_oui(oui: Oui) -> Self {
        ByteAxisGrid::new(GridBase::MacOui { oui })
    }

    /// Fails if `prefix` is not byte-aligned or is longer than /112.
    pub fn for_prefix(prefix: Ipv6Prefix) -> Result<Self, GridError> {
        prefix.grid_octet()?;
        Ok(ByteAxisGrid::new(GridBase::V6Prefix { prefix }))
    }

    pub fn base(&self) -> &GridBase {
        &self.base
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cell(&self, c: CellCoord) -> &Cell {
        &self.cells[usize::from(c.offset())]
    }

    fn cell_mut(&mut self, c: CellCoord) -> &mut Cell {
        &mut self.cells[usize::from(c.offset())]
    }

    /// All cells in offset order (y-major).
    pub fn cells(&self) -> impl Iterator<Item = (CellCoord, &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (CellCoord::from_offset(i as u16), c))
    }

    pub fn occupied(&self) -> impl Iterator<Item = (CellCoord, &Cell)> {
        self.cells().filter(|(_, c)| c.is_occupied())
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_occupied()).count()
    }

    /// Occupied cells in row `y`.
    pub fn row_occupancy(&self, y: u8) -> usize {
        let start = usize::from(y) * GRID_SIDE;
        self.cells[start..start + GRID_SIDE]
            .iter()
            .filter(|c| c.is_occupied())
            .count()
    }

    pub fn add_mac(&mut self, obs: &MacObservation) -> Result<(), GridError> {
        let oui = match &self.base {
            GridBase::MacOui { oui } => oui,
            other => {
                return Err(GridError::Invalid(format!(
                    "MAC observation {} added to {other} grid",
                    obs.mac
                )))
            }
        };
        if !oui.contains(&obs.mac) {
            return Err(GridError::OuiMismatch {
                mac: obs.mac,
                oui: oui.clone(),
            });
        }
        let w = obs.weight;
        let cell = self.cell_mut(mac_cell(obs.mac));
        cell.count += w;
        if let Some(l) = &obs.label {
            *cell.labels.entry(l.clone()).or_insert(0) += w;
        }
        self.total += w;
        Ok(())
    }

    pub fn add_v6(&mut self, obs: &V6Observation) -> Result<(), GridError> {
        let prefix = match &self.base {
            GridBase::V6Prefix { prefix } => *prefix,
            other => {
                return Err(GridError::Invalid(format!(
                    "IPv6 observation {} added to {other} grid",
                    obs.probed()
                )))
            }
        };
        let coord = v6_cell(obs.probed().base(), &prefix)?;
        let cell = self.cell_mut(coord);
        cell.count += 1;
        cell.responders.insert(obs.responder.to_string());
        self.total += 1;
        Ok(())
    }

    /// Inserts a whole cell, used when reading exports back.
    pub(crate) fn put_cell(&mut self, c: CellCoord, cell: Cell) -> Result<(), GridError> {
        if cell.count == 0 {
            return Err(GridError::Invalid(format!("cell {c:?} has zero count")));
        }
        let label_sum: u64 = cell.labels.values().sum();
        if cell.labels.values().any(|&n| n == 0)
            || label_sum > cell.count
            || cell.responders.len() as u64 > cell.count
        {
            return Err(GridError::Invalid(format!(
                "cell {c:?} holds more labels or responders than observations"
            )));
        }
        if self.cell(c).is_occupied() {
            return Err(GridError::Invalid(format!("cell {c:?} listed twice")));
        }
        self.total += cell.count;
        *self.cell_mut(c) = cell;
        Ok(())
    }
}

pub fn build_mac_grid<'a, I>(oui: Oui, obs: I) -> Result<ByteAxisGrid, GridError>
where
    I: IntoIterator<Item = &'a MacObservation>,
{
    let mut g = ByteAxisGrid::for_oui(oui);
    for o in obs {
        g.add_mac(o)?;
    }
    Ok(g)
}

pub fn build_v6_grid<'a, I>(base: Ipv6Prefix, obs: I) -> Result<ByteAxisGrid, GridError>
where
    I: IntoIterator<Item = &'a V6Observation>,
{
    let mut g = ByteAxisGrid::for_prefix(base)?;
    for o in obs {
        g.add_v6(o)?;
    }
    Ok(g)
}

/// Cellwise sum of counts, multiset union of labels, set union of responders.
pub fn merge_grids(a: &ByteAxisGrid, b: &ByteAxisGrid) -> Result<ByteAxisGrid, GridError> {
    if a.base != b.base {
        return Err(GridError::BaseMismatch(a.base.clone(), b.base.clone()));
    }
    let mut out = a.clone();
    for (dst, src) in out.cells.iter_mut().zip(&b.cells) {
        if src.is_occupied() {
            dst.absorb(src);
        }
    }
    out.total += b.total;
    Ok(out)
}

/// Fraction of the 65 536 cells with at least one observation.
pub fn occupancy(grid: &ByteAxisGrid) -> f64 {
    grid.occupied_count() as f64 / GRID_CELLS as f64
}
