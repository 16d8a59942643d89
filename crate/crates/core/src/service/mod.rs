//! Shared puzzle sessions: newline-delimited JSON requests over TCP.
//!
//! Every request carries `"v": 1` and an `"op"`:
//!
//! | op             | fields                                   | result |
//! |----------------|------------------------------------------|--------|
//! | `list_puzzles` |                                          | `[{id, title, best_known_volume, nodes}]` |
//! | `get_puzzle`   | `puzzle`                                 | `{id, title, tqc, base_volume, best_known_volume, created_at}` |
//! | `get_tree`     | `puzzle`                                 | `{puzzle, root, nodes: [{id, parent, move, volume, author}]}` |
//! | `check_move`   | `puzzle`, `node`, `move`                 | `{valid, volume}` or `{valid: false, code, reason, violations}` |
//! | `submit_move`  | `puzzle`, `node`, `move`, `author`       | `{node, volume}` |
//! | `leaderboard`  | optional `puzzle`                        | `[{puzzle, volume, author, node}]` |
//! | `export`       | `puzzle`, `node`, `format` (`tqc`/`moves`) | `{format, content}` |
//! | `add_puzzle`   | `id`, `title`, `tqc`                     | `{id, base_volume}` |
//!
//! A `move` is either an object (`{"kind": "slide", "strand": "q0",
//! "segment": 1, "direction": [0, -1, 0], "distance": 1}`) or a `.moves`
//! record string (`"slide q0 1 0 -1 0 1"`).
//!
//! Responses are `{"v": 1, "ok": true, "result": ...}` or
//! `{"v": 1, "ok": false, "error": {"code", "message", "details"?}}` with codes
//! `not_found`, `rejected`, `bad_request`, `unsupported_version`, `io`.

pub mod server;
pub mod store;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::moves::{Move, MoveError};
pub use store::{Node, Puzzle, PuzzleState, StoreError};

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceError {
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl ServiceError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into(), details: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new("bad_request", message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new("not_found", message)
    }
}

fn rejection(e: &MoveError) -> Value {
    let violations = match e {
        MoveError::Blocked(r) => serde_json::to_value(&r.violations).unwrap_or(Value::Null),
        _ => json!([]),
    };
    json!({ "code": e.code(), "reason": e.to_string(), "violations": violations })
}

impl From<StoreError> for ServiceError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownNode(_) => ServiceError::not_found(e.to_string()),
            StoreError::Rejected(ref m) => {
                ServiceError { code: "rejected", message: e.to_string(), details: Some(rejection(m)) }
            }
            StoreError::InvalidPuzzle(_) | StoreError::Exists(_) => ServiceError::bad_request(e.to_string()),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => ServiceError::new("io", e.to_string()),
        }
    }
}

/// All puzzles of one data directory.
pub struct Service {
    dir: PathBuf,
    puzzles: RwLock<BTreeMap<String, Arc<RwLock<PuzzleState>>>>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Service {
    /// Opens `dir`, replaying every `*.jsonl` log in it.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(|source| StoreError::Io { path: dir.to_path_buf(), source })?;
        let mut puzzles = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|source| StoreError::Io { path: dir.to_path_buf(), source })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let state = PuzzleState::load(&path)?;
            puzzles.insert(state.puzzle.id.clone(), Arc::new(RwLock::new(state)));
        }
        Ok(Self { dir: dir.to_path_buf(), puzzles: RwLock::new(puzzles) })
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    pub fn add_puzzle(&self, id: &str, title: &str, tqc: &str) -> Result<i64, StoreError> {
        let valid_id = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
        if !valid_id {
            return Err(StoreError::InvalidPuzzle(format!("puzzle id \"{id}\" must be [A-Za-z0-9_-]+")));
        }
        let mut all = self.puzzles.write().expect("registry lock");
        if all.contains_key(id) {
            return Err(StoreError::Exists(id.to_string()));
        }
        let puzzle = Puzzle { id: id.into(), title: title.into(), tqc: tqc.into(), created_at: now() };
        let state = PuzzleState::create(&self.dir, puzzle)?;
        let volume = state.nodes[0].volume;
        all.insert(id.to_string(), Arc::new(RwLock::new(state)));
        Ok(volume)
    }

    pub fn has_puzzle(&self, id: &str) -> bool {
        self.puzzles.read().expect("registry lock").contains_key(id)
    }

    fn puzzle(&self, id: &str) -> Result<Arc<RwLock<PuzzleState>>, ServiceError> {
        self.puzzles
            .read()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::not_found(format!("unknown puzzle {id}")))
    }

    /// Handles one request line and renders the response line (without newline).
    pub fn handle_line(&self, line: &str) -> String {
        let response = match serde_json::from_str::<Value>(line) {
            Ok(req) => self.handle(&req),
            Err(e) => Err(ServiceError::bad_request(format!("malformed JSON: {e}"))),
        };
        let body = match response {
            Ok(result) => json!({ "v": PROTOCOL_VERSION, "ok": true, "result": result }),
            Err(e) => {
                let mut err = json!({ "code": e.code, "message": e.message });
                if let Some(d) = e.details {
                    err["details"] = d;
                }
                json!({ "v": PROTOCOL_VERSION, "ok": false, "error": err })
            }
        };
        body.to_string()
    }

    pub fn handle(&self, req: &Value) -> Result<Value, ServiceError> {
        match req.get("v").and_then(Value::as_u64) {
            Some(PROTOCOL_VERSION) => {}
            Some(v) => return Err(ServiceError::new("unsupported_version", format!("protocol version {v} is not supported"))),
            None => return Err(ServiceError::bad_request("missing \"v\"")),
        }
        let op = req.get("op").and_then(Value::as_str).ok_or_else(|| ServiceError::bad_request("missing \"op\""))?;
        let text = |k: &str| {
            req.get(k).and_then(Value::as_str).ok_or_else(|| ServiceError::bad_request(format!("missing string field \"{k}\"")))
        };
        let node = || {
            req.get("node")
                .and_then(Value::as_u64)
                .map(|n| n as usize)
                .ok_or_else(|| ServiceError::bad_request("missing integer field \"node\""))
        };
        match op {
            "list_puzzles" => {
                let all = self.puzzles.read().expect("registry lock");
                let list: Vec<Value> = all
                    .values()
                    .map(|p| {
                        let p = p.read().expect("puzzle lock");
                        json!({
                            "id": p.puzzle.id,
                            "title": p.puzzle.title,
                            "best_known_volume": p.best().volume,
                            "nodes": p.nodes.len(),
                        })
                    })
                    .collect();
                Ok(Value::Array(list))
            }
            "get_puzzle" => {
                let p = self.puzzle(text("puzzle")?)?;
                let p = p.read().expect("puzzle lock");
                Ok(json!({
                    "id": p.puzzle.id,
                    "title": p.puzzle.title,
                    "tqc": p.puzzle.tqc,
                    "base_volume": p.nodes[0].volume,
                    "best_known_volume": p.best().volume,
                    "created_at": p.puzzle.created_at,
                }))
            }
            "get_tree" => {
                let p = self.puzzle(text("puzzle")?)?;
                let p = p.read().expect("puzzle lock");
                Ok(json!({ "puzzle": p.puzzle.id, "root": 0, "nodes": p.nodes }))
            }
            "check_move" => {
                let mv = parse_move(req)?;
                let p = self.puzzle(text("puzzle")?)?;
                let p = p.read().expect("puzzle lock");
                match p.check(node()?, &mv) {
                    Ok(next) => Ok(json!({ "valid": true, "volume": crate::geometry::bounding_volume(&next) })),
                    Err(StoreError::Rejected(e)) => {
                        let mut v = rejection(&e);
                        v["valid"] = json!(false);
                        Ok(v)
                    }
                    Err(e) => Err(e.into()),
                }
            }
            "submit_move" => {
                let mv = parse_move(req)?;
                let author = req.get("author").and_then(Value::as_str).unwrap_or("").to_string();
                let p = self.puzzle(text("puzzle")?)?;
                let mut p = p.write().expect("puzzle lock");
                let id = p.submit(node()?, mv, author)?;
                Ok(json!({ "node": id, "volume": p.nodes[id].volume }))
            }
            "leaderboard" => {
                let filter = req.get("puzzle").and_then(Value::as_str);
                let all = self.puzzles.read().expect("registry lock");
                if let Some(f) = filter {
                    if !all.contains_key(f) {
                        return Err(ServiceError::not_found(format!("unknown puzzle {f}")));
                    }
                }
                let rows: Vec<Value> = all
                    .iter()
                    .filter(|(id, _)| filter.is_none_or(|f| f == id.as_str()))
                    .map(|(id, p)| {
                        let p = p.read().expect("puzzle lock");
                        let best = p.best();
                        json!({ "puzzle": id, "volume": best.volume, "author": best.author, "node": best.id })
                    })
                    .collect();
                Ok(Value::Array(rows))
            }
            "export" => {
                let p = self.puzzle(text("puzzle")?)?;
                let p = p.read().expect("puzzle lock");
                let n = node()?;
                let format = req.get("format").and_then(Value::as_str).unwrap_or("tqc");
                let content = match format {
                    "tqc" => p.export_tqc(n)?,
                    "moves" => p.path_log(n)?.to_text(),
                    other => return Err(ServiceError::bad_request(format!("unknown export format {other}"))),
                };
                Ok(json!({ "format": format, "content": content }))
            }
            "add_puzzle" => {
                let id = text("id")?;
                let title = req.get("title").and_then(Value::as_str).unwrap_or(id);
                let volume = self.add_puzzle(id, title, text("tqc")?)?;
                Ok(json!({ "id": id, "base_volume": volume }))
            }
            other => Err(ServiceError::bad_request(format!("unknown op {other}"))),
        }
    }
}

fn parse_move(req: &Value) -> Result<Move, ServiceError> {
    match req.get("move") {
        Some(Value::String(s)) => s.parse().map_err(ServiceError::bad_request),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| ServiceError::bad_request(format!("bad move: {e}"))),
        None => Err(ServiceError::bad_request("missing \"move\"")),
    }
}
