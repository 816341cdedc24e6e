//! Reading, writing, validating and translating OML documents.
//!
//! The model and reasoning live in [`oml_core`]; this crate adds the XML
//! subset reader, the generic-style grammar, DTD parsing and validation,
//! the generic/specific style translations, RDF/S and XOL exchange, and the
//! `oml` command-line tool.

pub mod cli;
pub mod dtd;
pub mod error;
pub mod interop;
pub mod load;
pub mod styles;
pub mod xml;
pub mod xmlio;

pub use error::{Error, Result};
pub use oml_core;
