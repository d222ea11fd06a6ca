pub mod alternation;
pub mod cli;
pub mod erasure;
pub mod harness;
pub mod registry;
pub mod scheme;
pub mod service;
pub mod stego;
pub mod whitemark;
