use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};

use braidwork::geometry::{Bounds, DefectStrand, LatticePoint as P, StrandKind, TopoCircuit};
use braidwork::moves::{replay, MoveLog};
use braidwork::service::Service;
use braidwork::tqc::{parse_tqc, to_tqc};

/// A square loop `a`, a ring `r` through it, and a free decoration loop.
fn puzzle() -> TopoCircuit {
    TopoCircuit::new(Bounds::from_extents(12, 12, 12))
        .with_strand(DefectStrand::closed(
            "a",
            StrandKind::Primal,
            vec![P::new(2, 2, 5), P::new(8, 2, 5), P::new(8, 8, 5), P::new(2, 8, 5)],
        ))
        .with_strand(DefectStrand::closed(
            "r",
            StrandKind::Dual,
            vec![P::new(5, 0, 3), P::new(5, 4, 3), P::new(5, 4, 7), P::new(5, 0, 7)],
        ))
        .with_strand(DefectStrand::closed(
            "deco",
            StrandKind::Primal,
            vec![P::new(10, 10, 10), P::new(11, 10, 10), P::new(11, 11, 10), P::new(10, 11, 10)],
        ))
}

fn call(s: &Service, req: Value) -> Value {
    serde_json::from_str(&s.handle_line(&req.to_string())).unwrap()
}

fn open_with_puzzle() -> (tempfile::TempDir, Service) {
    let dir = tempfile::tempdir().unwrap();
    let s = Service::open(dir.path()).unwrap();
    let r = call(&s, json!({"v": 1, "op": "add_puzzle", "id": "p", "title": "ring", "tqc": to_tqc(&puzzle())}));
    assert_eq!(r["ok"], true, "{r}");
    (dir, s)
}

#[test]
fn deleting_a_decoration_shrinks_the_child() {
    let (_dir, s) = open_with_puzzle();
    let r = call(&s, json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 0, "author": "ann",
        "move": {"kind": "delete_loop", "strand": "deco"}}));
    assert_eq!(r["ok"], true, "{r}");
    let tree = call(&s, json!({"v": 1, "op": "get_tree", "puzzle": "p"}));
    let nodes = tree["result"]["nodes"].as_array().unwrap();
    assert!(nodes[1]["volume"].as_i64().unwrap() < nodes[0]["volume"].as_i64().unwrap());
}

#[test]
fn slide_through_blocker_names_it() {
    let (_dir, s) = open_with_puzzle();
    // Segment 0 of `a` runs along y = 2; sliding it +y by 3 sweeps through the ring side at y in [0, 4].
    let mv = "slide a 0 0 1 0 3";
    let check = call(&s, json!({"v": 1, "op": "check_move", "puzzle": "p", "node": 0, "move": mv}));
    assert_eq!(check["result"]["valid"], false, "{check}");
    let r = call(&s, json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 0, "move": mv, "author": "x"}));
    assert_eq!(r["error"]["code"], "rejected");
    let blockers: Vec<&str> = r["error"]["details"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|v| v["strands"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()))
        .collect();
    assert!(blockers.contains(&"r"), "{r}");
    let tree = call(&s, json!({"v": 1, "op": "get_tree", "puzzle": "p"}));
    assert_eq!(tree["result"]["nodes"].as_array().unwrap().len(), 1);
}

#[test]
fn concurrent_siblings_and_leaderboard() {
    let (_dir, s) = open_with_puzzle();
    let s = Arc::new(s);
    let handles: Vec<_> = ["delete deco", "slide a 2 0 -1 0 1"]
        .into_iter()
        .enumerate()
        .map(|(i, mv)| {
            let s = Arc::clone(&s);
            thread::spawn(move || {
                call(&s, json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 0, "move": mv, "author": format!("c{i}")}))
            })
        })
        .collect();
    for h in handles {
        let r = h.join().unwrap();
        assert_eq!(r["ok"], true, "{r}");
    }
    let tree = call(&s, json!({"v": 1, "op": "get_tree", "puzzle": "p"}));
    let nodes = tree["result"]["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 3);
    assert!(nodes[1..].iter().all(|n| n["parent"] == 0));
    let min = nodes.iter().map(|n| n["volume"].as_i64().unwrap()).min().unwrap();
    let board = call(&s, json!({"v": 1, "op": "leaderboard", "puzzle": "p"}));
    assert_eq!(board["result"][0]["volume"].as_i64().unwrap(), min);
}

#[test]
fn exports_replay_to_the_node() {
    let (_dir, s) = open_with_puzzle();
    call(&s, json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 0, "move": "delete deco", "author": "a"}));
    call(&s, json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 1, "move": "slide a 2 0 -1 0 1", "author": "a"}));
    let tqc = call(&s, json!({"v": 1, "op": "export", "puzzle": "p", "node": 2, "format": "tqc"}));
    let moves = call(&s, json!({"v": 1, "op": "export", "puzzle": "p", "node": 2, "format": "moves"}));
    let log = MoveLog::parse(moves["result"]["content"].as_str().unwrap()).unwrap();
    assert_eq!(log.moves.len(), 2);
    let out = replay(&puzzle(), &log).unwrap();
    assert_eq!(to_tqc(&out), tqc["result"]["content"].as_str().unwrap());
    assert_eq!(parse_tqc(tqc["result"]["content"].as_str().unwrap()).unwrap(), out);
}

#[test]
fn malformed_requests() {
    let (_dir, s) = open_with_puzzle();
    let bad: Vec<(String, &str)> = vec![
        ("{".into(), "bad_request"),
        (json!({"op": "list_puzzles"}).to_string(), "bad_request"),
        (json!({"v": 9, "op": "list_puzzles"}).to_string(), "unsupported_version"),
        (json!({"v": 1, "op": "dance"}).to_string(), "bad_request"),
        (json!({"v": 1, "op": "get_puzzle", "puzzle": "nope"}).to_string(), "not_found"),
        (json!({"v": 1, "op": "check_move", "puzzle": "p", "node": 99, "move": "delete deco"}).to_string(), "not_found"),
        (json!({"v": 1, "op": "submit_move", "puzzle": "p", "node": 0, "move": "twist a"}).to_string(), "bad_request"),
        (json!({"v": 1, "op": "add_puzzle", "id": "p", "tqc": to_tqc(&puzzle())}).to_string(), "bad_request"),
        (json!({"v": 1, "op": "add_puzzle", "id": "../x", "tqc": to_tqc(&puzzle())}).to_string(), "bad_request"),
    ];
    for (line, code) in bad {
        let r: Value = serde_json::from_str(&s.handle_line(&line)).unwrap();
        assert_eq!(r["ok"], false, "{line}");
        assert_eq!(r["error"]["code"], code, "{line} -> {r}");
    }
}
