//! The shipped fixture files are the public contract for the on-disk
//! formats; these tests load each one and check it against the in-crate
//! builders and its documented verdicts.

use std::path::{Path, PathBuf};

use krlab::exec::symbolic_execute;
use krlab::net::WiretapCollection;
use krlab::proto::{Protocol, ProtocolDoc};
use krlab::sec::{analyze, Verdict};

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn load(name: &str) -> (Protocol, Option<WiretapCollection>) {
    let path = demo_dir().join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    let doc: ProtocolDoc =
        serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {name}: {e}"));
    Protocol::from_doc(&doc, path.parent()).unwrap_or_else(|e| panic!("resolve {name}: {e}"))
}

#[test]
fn fig1_file_analyzes_secure() {
    let (p, w) = load("fig1.json");
    let w = w.unwrap_or_else(WiretapCollection::empty_member);
    let report = analyze(&p, &w).unwrap();
    assert_eq!(report.verdict, Verdict::Secure);
}

#[test]
fn fig3a_file_matches_builder() {
    let (p, _) = load("fig3a.json");
    let built = krlab::demo::fig3a(4);
    assert_eq!(
        symbolic_execute(&p).unwrap().outputs,
        symbolic_execute(&built).unwrap().outputs
    );
}

#[test]
fn fig3b_file_carries_its_wiretap_collection() {
    let (p, w) = load("fig3b.json");
    let w = w.expect("fig3b ships with its two-route collection");
    assert_eq!(w.members.len(), 2);
    assert_eq!(analyze(&p, &w).unwrap().verdict, Verdict::Secure);
}

#[test]
fn g0_topology_file_is_canonical() {
    let path = demo_dir().join("g0_topology.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: krlab::net::TopologyDoc = serde_json::from_str(&text).unwrap();
    let graph = krlab::net::Graph::from_doc(&doc).unwrap();
    assert_eq!(graph.node_count(), 126);
    assert_eq!(graph.edge_count(), 171);
    assert!(krlab::g0::G0Labels::for_graph(&graph).is_ok());
}

#[test]
fn lkrp_files_match_builders() {
    type Builder = fn() -> (Protocol, krlab::g0::G0Labels);
    for (name, builder) in [
        ("g0_lkrp.json", krlab::g0::build_lkrp as Builder),
        (
            "g0_lkrp_interactive.json",
            krlab::g0::build_lkrp_interactive as Builder,
        ),
    ] {
        let (p, _) = load(name);
        let (built, _) = builder();
        assert_eq!(p.schedule, built.schedule, "{name}");
        assert_eq!(p.outputs, built.outputs, "{name}");
        assert_eq!(
            analyze(&p, &WiretapCollection::empty_member())
                .unwrap()
                .verdict,
            Verdict::Secure
        );
    }
}

#[test]
fn flood_file_is_valid_but_not_independent() {
    let (p, _) = load("g0_flood.json");
    assert!(p.validate().is_valid());
    let report = analyze(&p, &WiretapCollection::empty_member()).unwrap();
    assert!(!report.soundness.independent);
    assert_eq!(report.verdict, Verdict::Insecure);
}

#[test]
fn reports_are_byte_deterministic() {
    let (p, _) = load("fig1.json");
    let w = WiretapCollection::empty_member();
    let a = serde_json::to_string(&analyze(&p, &w).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(&p, &w).unwrap()).unwrap();
    assert_eq!(a, b);
    let rebuilt = krlab::demo::fig1();
    let c = serde_json::to_string(&analyze(&rebuilt, &w).unwrap()).unwrap();
    assert_eq!(a, c);
}
