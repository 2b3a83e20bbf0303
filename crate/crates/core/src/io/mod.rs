//! Files in and out: CSV data and masks, range transformation, heatmap
//! rendering and the TOML run configuration.

pub mod config;
mod csv;
mod render;
mod transform;

pub use self::csv::{
    load_amputed, load_csv, load_mask, read_amputed, read_complete, save_amputed, save_assignment,
    save_complete, save_mask, save_matrix, write_amputed, write_complete, write_mask, csv_number,
};
pub use render::{render_heatmap, write_heatmap, HeatmapFormat, Palette};
pub use transform::range_transform;
