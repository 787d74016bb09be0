//! Command-line tools and file formats for the `twinpeak-core` library.

pub mod app;
pub mod instance_file;
pub mod output;
