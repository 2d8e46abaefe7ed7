//! Grid exports.
//!
//! CSV has one row per occupied cell under the header
//! `y,x,count,responders,labels`. `responders` is `;`-separated canonical IPv6
//! text; `labels` is a JSON object mapping label to multiplicity (empty field
//! when the cell has no labels). The base is not part of the CSV and must be
//! supplied when reading it back.
//!
//! JSON mirrors the grid: `{"base": .., "total": .., "cells": [..]}` with
//! occupied cells listed in offset order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::addr::CellCoord;
use crate::grid::{ByteAxisGrid, Cell, GridBase, GridError};

pub const GRID_CSV_HEADER: [&str; 5] = ["y", "x", "count", "responders", "labels"];

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("row {row}: {msg}")]
    Row { row: u64, msg: String },
}

pub fn write_grid_csv<W: Write>(grid: &ByteAxisGrid, out: W) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(GRID_CSV_HEADER)?;
    for (c, cell) in grid.occupied() {
        let responders = cell
            .responders
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(";");
        let labels = if cell.labels.is_empty() {
            String::new()
        } else {
            serde_json::to_string(&cell.labels)?
        };
        w.write_record([
            c.y.to_string(),
            c.x.to_string(),
            cell.count.to_string(),
            responders,
            labels,
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_grid_csv<R: Read>(base: GridBase, input: R) -> Result<ByteAxisGrid, ExportError> {
    let mut grid = ByteAxisGrid::new(base);
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != GRID_CSV_HEADER {
        return Err(ExportError::Row {
            row: 1,
            msg: format!("expected header {}", GRID_CSV_HEADER.join(",")),
        });
    }
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |msg: String| ExportError::Row { row, msg };
        if rec.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", rec.len())));
        }
        let y: u8 = rec[0]
            .parse()
            .map_err(|_| bad(format!("bad y {:?}", &rec[0])))?;
        let x: u8 = rec[1]
            .parse()
            .map_err(|_| bad(format!("bad x {:?}", &rec[1])))?;
        let count: u64 = rec[2]
            .parse()
            .map_err(|_| bad(format!("bad count {:?}", &rec[2])))?;
        let responders: BTreeSet<String> = rec[3]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let labels: BTreeMap<String, u64> = if rec[4].is_empty() {
            BTreeMap::new()
        } else {
            serde_json::from_str(&rec[4])?
        };
        let cell = Cell {
            count,
            labels,
            responders,
        };
        grid.put_cell(CellCoord::new(x, y), cell)
            .map_err(|e| bad(e.to_string()))?;
    }
    Ok(grid)
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    y: u8,
    x: u8,
    count: u64,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    responders: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, u64>,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    base: GridBase,
    total: u64,
    cells: Vec<CellDoc>,
}

impl Serialize for ByteAxisGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GridDoc {
            base: self.base().clone(),
            total: self.total(),
            cells: self
                .occupied()
                .map(|(c, cell)| CellDoc {
                    y: c.y,
                    x: c.x,
                    count: cell.count,
                    responders: cell.responders.clone(),
                    labels: cell.labels.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ByteAxisGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = GridDoc::deserialize(d)?;
        let mut g = ByteAxisGrid::new(doc.base);
        for c in doc.cells {
            let cell = Cell {
                count: c.count,
                labels: c.labels,
                responders: c.responders,
            };
            g.put_cell(CellCoord::new(c.x, c.y), cell)
                .map_err(D::Error::custom)?;
        }
        if g.total() != doc.total {
            return Err(D::Error::custom(format!(
                "total {} does not match cell sum {}",
                doc.total,
                g.total()
            )));
        }
        Ok(g)
    }
}

pub fn write_grid_json<W: Write>(grid: &ByteAxisGrid, out: W) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(out, grid)?;
    Ok(())
}

pub fn read_grid_json<R: Read>(input: R) -> Result<ByteAxisGrid, ExportError> {
    Ok(serde_json::from_reader(input)?)
}
