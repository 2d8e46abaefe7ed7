//! Byte-axis plots for MAC and IPv6 address allocations.
//!
//! A byte-axis plot is a 256×256 grid over one allocation block: an OUI for MAC
//! addresses, or a byte-aligned prefix (normally a /48) for IPv6. Two low-order
//! bytes of every observed address pick the cell, y from the first and x from
//! the second. The crate ingests observations, aggregates them into
//! [`ByteAxisGrid`]s, renders PNG/SVG plots and infers allocation structure
//! (MAC assignment bands, IPv6 customer prefix sizes).

pub mod addr;
pub mod analyze;
pub mod export;
pub mod grid;
pub mod ingest;
pub mod render;

pub use addr::{
    extract_mac_from_eui64, is_locally_assigned, mac_cell, oui_of, parse_ipv6, parse_mac,
    parse_prefix, v6_cell, AddrError, CellCoord, Ipv6Address, Ipv6Prefix, MacAddress, Oui,
};
pub use analyze::{
    detect_bands, infer_allocation_units, summarize, AllocationReport, Band, BandParams,
    InferredAllocation,
};
pub use export::{read_grid_csv, read_grid_json, write_grid_csv, write_grid_json, ExportError};
pub use grid::{
    build_mac_grid, build_v6_grid, merge_grids, occupancy, ByteAxisGrid, Cell, GridBase, GridError,
};
pub use ingest::{
    derive_macs_from_v6, group_mac_by_oui, group_v6_by_prefix, load_mac_observations,
    load_oui_registry, load_v6_observations, IngestError, LoadOptions, Loaded, MacFormat,
    MacObservation, OuiRegistry, V6Observation,
};
pub use render::{
    assign_colors, render_png, render_svg, responder_color, ColorAssignment, ColorMode,
    RenderConfig, RenderError, Rgb,
};
