//! Exchange with RDF/S (line-based triples) and XOL.

pub mod rdf;
pub mod xol;
