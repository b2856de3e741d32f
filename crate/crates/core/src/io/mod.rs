//! Configuration, tabular output and plot data.

mod config;
mod plot;
mod table;

pub use config::{parse_n_list, OutputFormat, RunConfig};
pub use plot::{emit_plot_data, plot_data, plot_script, PLOT_CLIP};
pub use table::{
    curve_json, read_curve_csv, write_curve_csv, write_scaling_csv, write_ssh_csv, CURVE_HEADER, SCALING_HEADER,
    SSH_HEADER,
};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report") + "\n"
}
