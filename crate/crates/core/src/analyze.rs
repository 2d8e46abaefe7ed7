//! Allocation structure recovered from grid geometry.
//!
//! MAC grids: horizontal bands of densely occupied rows (runs of the fourth
//! octet a vendor assigns sequentially).
//!
//! IPv6 grids: for every responder, the alignment envelope of its cells. Cells
//! are numbered by the 16-bit offset `o = y·256 + x`; the envelope is the
//! smallest `k` for which all of a responder's offsets agree on `o >> k`. A
//! responder confined to a 2^k-cell aligned block behind a /L base has at
//! least a /(L + 16 − k) (for a /48, a /(64 − k)).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::addr::{CellCoord, Ipv6Address, Ipv6Prefix};
use crate::grid::{occupancy, ByteAxisGrid, GridBase, GRID_SIDE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    /// A row is active when at least this fraction of its 256 cells is occupied.
    pub min_row_fill: f64,
    /// Inactive rows allowed inside one band.
    pub max_gap_rows: usize,
}

impl Default for BandParams {
    fn default() -> Self {
        BandParams {
            min_row_fill: 1.0 / 64.0,
            max_gap_rows: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub y_start: u8,
    pub y_end: u8,
    /// Occupied fraction of the cells in rows `y_start..=y_end`.
    pub density: f64,
}

impl Band {
    pub fn rows(&self) -> usize {
        usize::from(self.y_end - self.y_start) + 1
    }
}

pub fn detect_bands(grid: &ByteAxisGrid, params: &BandParams) -> Vec<Band> {
    let threshold = params.min_row_fill * GRID_SIDE as f64;
    let per_row: Vec<usize> = (0..=255u8).map(|y| grid.row_occupancy(y)).collect();
    let active = |y: usize| per_row[y] > 0 && per_row[y] as f64 >= threshold;

    // maximal runs of active rows, merged across short gaps
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for y in 0..GRID_SIDE {
        if !active(y) {
            continue;
        }
        match runs.last_mut() {
            Some((_, end)) if y - *end - 1 <= params.max_gap_rows => *end = y,
            _ => runs.push((y, y)),
        }
    }
    runs.into_iter()
        .map(|(s, e)| {
            let occupied: usize = per_row[s..=e].iter().sum();
            Band {
                y_start: s as u8,
                y_end: e as u8,
                density: occupied as f64 / ((e - s + 1) * GRID_SIDE) as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferredAllocation {
    pub responder_key: String,
    pub prefix_len: u8,
    /// The aligned block implied by `prefix_len`.
    pub envelope: Ipv6Prefix,
    /// Occupied cells attributed to this responder.
    pub cells: usize,
    /// Whether every cell of the envelope is occupied by this responder.
    pub exact_fill: bool,
    pub members: Vec<CellCoord>,
}

/// Smallest `k` with `a >> k == b >> k` for the extreme offsets of a set.
pub fn envelope_bits(min: u16, max: u16) -> u32 {
    16 - (min ^ max).leading_zeros()
}

/// One entry per responder key, sorted by key. Empty for MAC grids.
pub fn infer_allocation_units(grid: &ByteAxisGrid) -> Vec<InferredAllocation> {
    let base = match grid.base() {
        GridBase::V6Prefix { prefix } => *prefix,
        GridBase::MacOui { .. } => return Vec::new(),
    };
    let Ok(octet) = base.grid_octet() else {
        return Vec::new();
    };
    let mut by_key: BTreeMap<&str, Vec<u16>> = BTreeMap::new();
    for (c, cell) in grid.occupied() {
        for r in &cell.responders {
            by_key.entry(r.as_str()).or_default().push(c.offset());
        }
    }
    by_key
        .into_iter()
        .map(|(key, offsets)| {
            // offsets arrive in ascending order from the cell scan
            let (min, max) = (offsets[0], offsets[offsets.len() - 1]);
            let k = envelope_bits(min, max);
            let block = if k == 16 { 0 } else { (min >> k) << k };
            let mut o = base.base().octets();
            o[octet] = (block >> 8) as u8;
            o[octet + 1] = block as u8;
            let prefix_len = base.len() + 16 - k as u8;
            let envelope = Ipv6Prefix::containing(Ipv6Address(o), prefix_len);
            InferredAllocation {
                responder_key: key.to_string(),
                prefix_len,
                envelope,
                cells: offsets.len(),
                exact_fill: offsets.len() as u64 == 1u64 << k,
                members: offsets.into_iter().map(CellCoord::from_offset).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub base: GridBase,
    pub total: u64,
    pub occupied_cells: usize,
    pub occupancy: f64,
    /// Distinct responders (IPv6) or distinct labels (MAC).
    pub distinct_keys: usize,
    pub bands: Vec<Band>,
    /// Inferred prefix length → number of responders.
    pub unit_histogram: BTreeMap<u8, usize>,
    pub allocations: Vec<InferredAllocation>,
}

pub fn summarize(grid: &ByteAxisGrid, params: &BandParams) -> AllocationReport {
    let (bands, allocations, distinct_keys) = match grid.base() {
        GridBase::MacOui { .. } => {
            let labels: BTreeSet<&str> = grid
                .occupied()
                .flat_map(|(_, c)| c.labels.keys().map(String::as_str))
                .collect();
            (detect_bands(grid, params), Vec::new(), labels.len())
        }
        GridBase::V6Prefix { .. } => {
            let allocs = infer_allocation_units(grid);
            let n = allocs.len();
            (Vec::new(), allocs, n)
        }
    };
    let mut unit_histogram = BTreeMap::new();
    for a in &allocations {
        *unit_histogram.entry(a.prefix_len).or_insert(0) += 1;
    }
    AllocationReport {
        base: grid.base().clone(),
        total: grid.total(),
        occupied_cells: grid.occupied_count(),
        occupancy: occupancy(grid),
        distinct_keys,
        bands,
        unit_histogram,
        allocations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::{MacAddress, Oui};
    use crate::grid::build_mac_grid;
    use crate::ingest::{MacObservation, V6Observation};

    fn oui() -> Oui {
        "08:3c:0c".parse().unwrap()
    }

    fn mac_rows(rows: impl IntoIterator<Item = u8>, xs: impl Fn(u8) -> Vec<u8>) -> ByteAxisGrid {
        let obs: Vec<_> = rows
            .into_iter()
            .flat_map(|y| {
                xs(y)
                    .into_iter()
                    .map(move |x| MacObservation::new(MacAddress([8, 0x3c, 0x0c, y, x, 0])))
            })
            .collect();
        build_mac_grid(oui(), &obs).unwrap()
    }

    fn v6_grid(cells: &[(u8, u8, &str)]) -> ByteAxisGrid {
        let base: Ipv6Prefix = "2a02:27b0:4a01::/48".parse().unwrap();
        let obs: Vec<_> = cells
            .iter()
            .map(|&(y, x, r)| {
                let mut o = base.base().octets();
                o[6] = y;
                o[7] = x;
                V6Observation::new(Ipv6Address(o), r.parse().unwrap())
            })
            .collect();
        crate::grid::build_v6_grid(base, &obs).unwrap()
    }

    #[test]
    fn envelope_bits_brute_force() {
        // independent check: search k upward until the shifted values agree
        let brute = |a: u16, b: u16| {
            (0..=16u32)
                .find(|&k| {
                    let sh = |v: u16| if k == 16 { 0 } else { v >> k };
                    sh(a) == sh(b)
                })
                .unwrap()
        };
        for (a, b) in [
            (0, 0),
            (0, 1),
            (0x1240, 0x124f),
            (0x3700, 0x37ff),
            (0, 0xffff),
            (0x7fff, 0x8000),
            (5, 6),
        ] {
            assert_eq!(envelope_bits(a, b), brute(a, b), "{a:#x} {b:#x}");
        }
    }

    #[test]
    fn two_dense_bands() {
        let g = mac_rows((0x00..=0x28).chain(0x68..=0xb8), |_| (0..64).collect());
        let bands = detect_bands(&g, &BandParams::default());
        assert_eq!(bands.len(), 2);
        assert_eq!((bands[0].y_start, bands[0].y_end), (0x00, 0x28));
        assert_eq!((bands[1].y_start, bands[1].y_end), (0x68, 0xb8));
        assert_eq!(bands[0].density, 0.25);
    }

    #[test]
    fn empty_and_full() {
        let g = ByteAxisGrid::for_oui(oui());
        assert!(detect_bands(&g, &BandParams::default()).is_empty());
        let full = mac_rows(0..=255, |_| (0..=255).collect());
        let bands = detect_bands(&full, &BandParams::default());
        assert_eq!(bands.len(), 1);
        assert_eq!((bands[0].y_start, bands[0].y_end), (0, 255));
        assert_eq!(bands[0].density, 1.0);
    }

    #[test]
    fn gap_bridging_and_threshold() {
        // rows 10..=20 dense, 21 empty, 22..=30 dense, 31..=32 empty, 33..=40 dense
        let rows = (10..=20).chain(22..=30).chain(33..=40);
        let g = mac_rows(rows, |_| (0..8).collect());
        let b = detect_bands(&g, &BandParams::default());
        assert_eq!(
            b.iter().map(|b| (b.y_start, b.y_end)).collect::<Vec<_>>(),
            vec![(10, 30), (33, 40)]
        );
        let strict = BandParams {
            min_row_fill: 1e-9,
            max_gap_rows: 0,
        };
        assert_eq!(detect_bands(&g, &strict).len(), 3);
        // 3 cells per row is below the default 4-cell threshold
        let sparse = mac_rows(0..=50, |_| vec![1, 2, 3]);
        assert!(detect_bands(&sparse, &BandParams::default()).is_empty());
    }

    #[test]
    fn aligned_sixty() {
        let r = "2a02:27b0:4a01:1240::1";
        let cells: Vec<_> = (0x40..=0x4f).map(|x| (0x12, x, r)).collect();
        let a = infer_allocation_units(&v6_grid(&cells));
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].prefix_len, 60);
        assert!(a[0].exact_fill);
        assert_eq!(a[0].cells, 16);
        assert_eq!(a[0].envelope.to_string(), "2a02:27b0:4a01:1240::/60");
    }

    #[test]
    fn full_row_is_fifty_six() {
        let r = "2a02:27b0:4a01:3700::1";
        let cells: Vec<_> = (0..=255).map(|x| (0x37, x, r)).collect();
        let a = infer_allocation_units(&v6_grid(&cells));
        assert_eq!(a[0].prefix_len, 56);
        assert!(a[0].exact_fill);
        assert_eq!(a[0].envelope.to_string(), "2a02:27b0:4a01:3700::/56");
    }

    #[test]
    fn single_cell_is_sixty_four() {
        let a = infer_allocation_units(&v6_grid(&[(0xab, 0x12, "2a02:27b0:4a01:ab12::9")]));
        assert_eq!(a[0].prefix_len, 64);
        assert!(a[0].exact_fill);
        assert_eq!(a[0].members, vec![CellCoord::new(0x12, 0xab)]);
    }

    #[test]
    fn straddling_responder_widens() {
        // 0x0f and 0x10 share no 4-bit block: envelope is the /59 at 0x00..0x1f
        let a = infer_allocation_units(&v6_grid(&[(0, 0x0f, "::1"), (0, 0x10, "::1")]));
        assert_eq!(a[0].prefix_len, 59);
        assert!(!a[0].exact_fill);
        let spread = infer_allocation_units(&v6_grid(&[(0, 0, "::2"), (0xff, 0xff, "::2")]));
        assert_eq!(spread[0].prefix_len, 48);
        assert_eq!(spread[0].envelope.to_string(), "2a02:27b0:4a01::/48");
    }

    #[test]
    fn summaries() {
        let empty = ByteAxisGrid::for_oui(oui());
        let r = summarize(&empty, &BandParams::default());
        assert_eq!(r.occupancy, 0.0);
        assert!(r.bands.is_empty());
        assert!(r.unit_histogram.is_empty());

        let cells: Vec<(u8, u8, String)> = (0..20u8)
            .map(|i| (i * 3, i * 7, format!("2001:db8::{i:x}")))
            .collect();
        let refs: Vec<_> = cells.iter().map(|(y, x, r)| (*y, *x, r.as_str())).collect();
        let r = summarize(&v6_grid(&refs), &BandParams::default());
        assert_eq!(r.unit_histogram, BTreeMap::from([(64, 20)]));
        assert_eq!(r.distinct_keys, 20);
        let json = serde_json::to_string(&r.unit_histogram).unwrap();
        assert_eq!(json, r#"{"64":20}"#);
    }

    #[test]
    fn multi_responder_cell_counts_for_both() {
        let a = infer_allocation_units(&v6_grid(&[(1, 1, "::a"), (1, 1, "::b"), (1, 2, "::b")]));
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].responder_key, "::a");
        assert_eq!(a[0].prefix_len, 64);
        assert_eq!(a[1].prefix_len, 62);
        assert!(!a[1].exact_fill);
    }
}
