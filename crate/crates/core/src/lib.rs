pub mod aca;
pub mod api;
pub mod defaults;
pub mod monitor;
pub mod policy;
pub mod rdf;
pub mod schema;
pub mod sim;
