//! Configuration, file formats and the command-line front end for
//! [`etc_lab_core`].

pub mod batch;
pub mod cli;
pub mod config;
pub mod io;
