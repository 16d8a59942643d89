//! Puzzles, solution trees and their append-only logs.
//!
//! Each puzzle lives in `<data_dir>/<id>.jsonl`. The first record holds the
//! base geometry; every later record is one accepted node (parent, move,
//! author). Volumes are never stored: they are recomputed by replaying moves,
//! so the log is the only source of truth.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{bounding_volume, validate_geometry, TopoCircuit};
use crate::moves::{apply_move, Move, MoveError, MoveLog};
use crate::tqc::{parse_tqc, to_tqc};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupt log {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("invalid puzzle: {0}")]
    InvalidPuzzle(String),
    #[error("puzzle {0} already exists")]
    Exists(String),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error(transparent)]
    Rejected(#[from] MoveError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Puzzle {
    pub id: String,
    pub title: String,
    /// Canonical `.tqc` text of the root circuit.
    pub tqc: String,
    pub created_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(rename = "move")]
    pub mv: Option<Move>,
    pub volume: i64,
    pub author: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Record {
    Puzzle(Puzzle),
    Node {
        id: usize,
        parent: usize,
        #[serde(rename = "move")]
        mv: Move,
        author: String,
    },
}

/// A puzzle with its replayed solution tree. Node 0 is the base circuit.
#[derive(Debug)]
pub struct PuzzleState {
    pub puzzle: Puzzle,
    pub nodes: Vec<Node>,
    circuits: Vec<Arc<TopoCircuit>>,
    log_path: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

fn append_record(path: &Path, record: &Record) -> Result<(), StoreError> {
    let mut line = serde_json::to_string(record).expect("records serialize");
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    f.write_all(line.as_bytes()).map_err(io_err(path))?;
    f.sync_data().map_err(io_err(path))
}

impl PuzzleState {
    fn with_root(puzzle: Puzzle, log_path: PathBuf) -> Result<Self, StoreError> {
        let base = parse_tqc(&puzzle.tqc).map_err(|e| StoreError::InvalidPuzzle(e.to_string()))?;
        let r = validate_geometry(&base);
        if !r.is_valid() {
            return Err(StoreError::InvalidPuzzle(r.to_string()));
        }
        let root = Node { id: 0, parent: None, mv: None, volume: bounding_volume(&base), author: String::new() };
        Ok(Self { puzzle, nodes: vec![root], circuits: vec![Arc::new(base)], log_path })
    }

    /// Creates a new puzzle log; fails if one exists.
    pub fn create(dir: &Path, puzzle: Puzzle) -> Result<Self, StoreError> {
        let path = dir.join(format!("{}.jsonl", puzzle.id));
        if path.exists() {
            return Err(StoreError::Exists(puzzle.id));
        }
        let state = Self::with_root(puzzle, path.clone())?;
        append_record(&path, &Record::Puzzle(state.puzzle.clone()))?;
        Ok(state)
    }

    /// Rebuilds a tree by replaying its log. A torn final line (a write cut
    /// short by a crash, never acknowledged) is ignored.
    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let f = File::open(path).map_err(io_err(path))?;
        let lines: Vec<String> = BufReader::new(f).lines().collect::<Result<_, _>>().map_err(io_err(path))?;
        let corrupt = |line: usize, message: String| StoreError::Corrupt { path: path.to_path_buf(), line, message };
        let mut state: Option<PuzzleState> = None;
        for (i, text) in lines.iter().enumerate() {
            if text.trim().is_empty() {
                continue;
            }
            let record: Record = match serde_json::from_str(text) {
                Ok(r) => r,
                Err(_) if i + 1 == lines.len() => break,
                Err(e) => return Err(corrupt(i + 1, e.to_string())),
            };
            match (record, state.as_mut()) {
                (Record::Puzzle(p), None) => state = Some(Self::with_root(p, path.to_path_buf())?),
                (Record::Node { id, parent, mv, author }, Some(s)) => {
                    if id != s.nodes.len() {
                        return Err(corrupt(i + 1, format!("expected node {}, found {id}", s.nodes.len())));
                    }
                    s.attach(parent, mv, author).map_err(|e| corrupt(i + 1, e.to_string()))?;
                }
                _ => return Err(corrupt(i + 1, "unexpected record".into())),
            }
        }
        state.ok_or_else(|| corrupt(1, "missing puzzle header".into()))
    }

    pub fn circuit(&self, node: usize) -> Result<&Arc<TopoCircuit>, StoreError> {
        self.circuits.get(node).ok_or(StoreError::UnknownNode(node))
    }

    /// Validates `mv` against `node` and returns the resulting circuit.
    pub fn check(&self, node: usize, mv: &Move) -> Result<TopoCircuit, StoreError> {
        Ok(apply_move(self.circuit(node)?, mv)?)
    }

    fn attach(&mut self, parent: usize, mv: Move, author: String) -> Result<usize, StoreError> {
        let next = self.check(parent, &mv)?;
        let id = self.nodes.len();
        self.nodes.push(Node { id, parent: Some(parent), mv: Some(mv), volume: bounding_volume(&next), author });
        self.circuits.push(Arc::new(next));
        Ok(id)
    }

    /// Validates, durably logs, then adds a child of `parent`.
    pub fn submit(&mut self, parent: usize, mv: Move, author: String) -> Result<usize, StoreError> {
        let next = self.check(parent, &mv)?;
        let id = self.nodes.len();
        append_record(&self.log_path, &Record::Node { id, parent, mv: mv.clone(), author: author.clone() })?;
        self.nodes.push(Node { id, parent: Some(parent), mv: Some(mv), volume: bounding_volume(&next), author });
        self.circuits.push(Arc::new(next));
        Ok(id)
    }

    /// Smallest-volume node; ties go to the older node.
    pub fn best(&self) -> &Node {
        self.nodes.iter().min_by_key(|n| (n.volume, n.id)).expect("root exists")
    }

    /// Moves from the root to `node`, as a log against the base.
    pub fn path_log(&self, node: usize) -> Result<MoveLog, StoreError> {
        if node >= self.nodes.len() {
            return Err(StoreError::UnknownNode(node));
        }
        let mut moves = Vec::new();
        let mut cur = node;
        while let Some(parent) = self.nodes[cur].parent {
            moves.push(self.nodes[cur].mv.clone().expect("non-root nodes carry a move"));
            cur = parent;
        }
        moves.reverse();
        let mut log = MoveLog::for_base(&self.circuits[0]);
        log.moves = moves;
        Ok(log)
    }

    pub fn export_tqc(&self, node: usize) -> Result<String, StoreError> {
        Ok(to_tqc(self.circuit(node)?))
    }
}
