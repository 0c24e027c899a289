//! krlab: an exact, desk-scale simulator and security analyzer for
//! key-relay protocols (KRP) and secure network coding (SNC) variants over
//! undirected graphs.
//!
//! The library covers:
//!
//! - exact GF(2) linear algebra and GF(2^m) arithmetic ([`gf2`], [`field`]);
//! - topologies with user pairs and wiretap collections ([`net`]);
//! - one-shot linear protocols in four settings with symbolic transcripts,
//!   concrete sampled runs and tamper-response checks ([`proto`], [`exec`],
//!   [`run`]);
//! - exact soundness/secrecy verdicts with a brute-force mutual-information
//!   oracle ([`sec`]);
//! - the constructive conversions between settings ([`transform`]);
//! - the ring-of-butterflies counterexample graph, the relay protocol that
//!   is secure on it, no-go diagnostics and the subset-cover search
//!   ([`g0`]);
//! - polynomial universal hashing for key verification ([`auth`]).

pub mod auth;
pub mod demo;
pub mod error;
pub mod exec;
pub mod expr;
pub mod field;
pub mod g0;
pub mod gf2;
pub mod net;
pub mod proto;
pub mod run;
pub mod sec;
pub mod transform;

pub use error::KrlabError;
