mod format;
mod parse;

pub use format::{format_ground, format_model, format_saturation, format_trace, format_verdict, format_witness};
pub use parse::{format_problem, parse_problem, ParseError, Problem};
