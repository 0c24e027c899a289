//! Everything specific to the counterexample graph: its construction, the
//! relay protocol that is secure on it, the no-go diagnostics, and the
//! subset-cover search.

mod cover;
mod diagnostics;
mod families;
mod flood;
mod graph;
mod lkrp;

pub use cover::{cover_search, CoverReport};
pub use diagnostics::{
    check_path_consistency, check_requirements, PathConsistencyReport, PathReport,
    RequirementReport, SubgraphRequirements,
};
pub use families::{check_items_234, subset_families, CandidateSubset, FamilyTag, ItemViolation};
pub use flood::{build_flood, FloodSeed};
pub use graph::{build_g0, Entity, G0Labels, StandardPath, PATHS, SUBGRAPH_NODES};
pub use lkrp::{build_lkrp, build_lkrp_interactive, verify_lkrp};
