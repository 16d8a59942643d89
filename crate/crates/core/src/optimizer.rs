//! Volume minimization over the move set.
//!
//! Candidates come from [`enumerate_with_results`] and are scored in parallel;
//! the collected scores keep enumeration order, so the chosen move never
//! depends on the number of worker threads.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{bounding_volume, validate_geometry, TopoCircuit};
use crate::moves::{apply_move, enumerate_with_results, Move, MoveLog};
use crate::topology::{signature, signatures_equal};
use crate::tqc::circuit_digest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Greedy,
    Anneal,
    Beam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    BoundingVolume,
    OccupiedCells,
}

impl Objective {
    pub fn eval(self, c: &TopoCircuit) -> i64 {
        match self {
            Objective::BoundingVolume => bounding_volume(c),
            Objective::OccupiedCells => c.occupied_count() as i64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub t0: f64,
    pub cooling: f64,
    pub steps_per_temp: usize,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self { t0: 4.0, cooling: 0.9, steps_per_temp: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub strategy: Strategy,
    pub seed: u64,
    pub max_steps: usize,
    pub anneal: AnnealParams,
    pub beam_width: usize,
    pub objective: Objective,
    /// Cap on candidates enumerated per state.
    pub move_budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Greedy,
            seed: 0,
            max_steps: 200,
            anneal: AnnealParams::default(),
            beam_width: 4,
            objective: Objective::BoundingVolume,
            move_budget: 5000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.move_budget == 0 || self.beam_width == 0 || self.anneal.steps_per_temp == 0 {
            return Err("budgets must be positive".into());
        }
        if !(self.anneal.cooling > 0.0 && self.anneal.cooling < 1.0) {
            return Err("cooling must lie in (0, 1)".into());
        }
        if !(self.anneal.t0 > 0.0) {
            return Err("t0 must be positive".into());
        }
        Ok(())
    }
}

/// One row of the objective trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub objective: i64,
    pub accepted: bool,
    pub move_kind: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeResult {
    pub final_circuit: TopoCircuit,
    pub log: MoveLog,
    pub initial_volume: i64,
    pub final_volume: i64,
    pub steps_taken: usize,
    /// Objective after each step, starting with the input's.
    pub objective_trace: Vec<i64>,
    pub trace: Vec<TraceRow>,
}

impl OptimizeResult {
    /// `step,objective,accepted,move_kind` CSV.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,objective,accepted,move_kind\n");
        for r in &self.trace {
            out.push_str(&format!("{},{},{},{}\n", r.step, r.objective, r.accepted, r.move_kind));
        }
        out
    }
}

fn scored(c: &TopoCircuit, objective: Objective, budget: usize) -> Vec<(Move, TopoCircuit, i64)> {
    enumerate_with_results(c, budget)
        .into_par_iter()
        .map(|(m, next)| {
            let v = objective.eval(&next);
            (m, next, v)
        })
        .collect()
}

/// The best strictly improving candidate; ties go to the earlier candidate.
pub fn greedy_step(c: &TopoCircuit, objective: Objective, budget: usize) -> Option<(Move, TopoCircuit, i64)> {
    let current = objective.eval(c);
    let mut best: Option<(Move, TopoCircuit, i64)> = None;
    for (m, next, v) in scored(c, objective, budget) {
        if v < current && best.as_ref().is_none_or(|b| v < b.2) {
            best = Some((m, next, v));
        }
    }
    best
}

struct Run {
    log: MoveLog,
    trace: Vec<TraceRow>,
    objective_trace: Vec<i64>,
}

impl Run {
    fn new(c: &TopoCircuit, v: i64) -> Self {
        Self {
            log: MoveLog::for_base(c),
            trace: vec![TraceRow { step: 0, objective: v, accepted: true, move_kind: "start".into() }],
            objective_trace: vec![v],
        }
    }

    fn record(&mut self, step: usize, objective: i64, accepted: bool, kind: &str) {
        self.trace.push(TraceRow { step, objective, accepted, move_kind: kind.to_string() });
        self.objective_trace.push(objective);
    }
}

pub fn optimize(c: &TopoCircuit, cfg: &SearchConfig) -> OptimizeResult {
    match cfg.strategy {
        Strategy::Greedy => greedy(c, cfg),
        Strategy::Anneal => anneal(c, cfg),
        Strategy::Beam => beam(c, cfg),
    }
}

fn finish(run: Run, initial: i64, final_circuit: TopoCircuit, final_volume: i64, steps: usize) -> OptimizeResult {
    OptimizeResult {
        final_circuit,
        log: run.log,
        initial_volume: initial,
        final_volume,
        steps_taken: steps,
        objective_trace: run.objective_trace,
        trace: run.trace,
    }
}

fn greedy(c: &TopoCircuit, cfg: &SearchConfig) -> OptimizeResult {
    let initial = cfg.objective.eval(c);
    let mut run = Run::new(c, initial);
    let mut cur = c.clone();
    let mut v = initial;
    let mut steps = 0;
    while steps < cfg.max_steps {
        let Some((m, next, nv)) = greedy_step(&cur, cfg.objective, cfg.move_budget) else { break };
        steps += 1;
        run.record(steps, nv, true, m.kind_name());
        run.log.moves.push(m);
        cur = next;
        v = nv;
    }
    finish(run, initial, cur, v, steps)
}

fn anneal(c: &TopoCircuit, cfg: &SearchConfig) -> OptimizeResult {
    let p = cfg.anneal;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let initial = cfg.objective.eval(c);
    let mut run = Run::new(c, initial);
    let mut cur = c.clone();
    let mut v = initial;
    let mut path: Vec<Move> = Vec::new();
    let (mut best, mut best_v, mut best_len) = (c.clone(), initial, 0);
    let mut steps = 0;
    while steps < cfg.max_steps {
        let mut cands = enumerate_with_results(&cur, cfg.move_budget);
        if cands.is_empty() {
            break;
        }
        steps += 1;
        let t = p.t0 * p.cooling.powi((steps / p.steps_per_temp) as i32);
        let k = rng.random_range(0..cands.len());
        let (m, next) = cands.swap_remove(k);
        let nv = cfg.objective.eval(&next);
        let delta = (nv - v) as f64;
        let u: f64 = rng.random();
        let accepted = delta <= 0.0 || u < (-delta / t).exp();
        if accepted {
            run.record(steps, nv, true, m.kind_name());
            path.push(m);
            cur = next;
            v = nv;
            if v < best_v {
                best = cur.clone();
                best_v = v;
                best_len = path.len();
            }
        } else {
            run.record(steps, v, false, m.kind_name());
        }
    }
    path.truncate(best_len);
    run.log.moves = path;
    finish(run, initial, best, best_v, steps)
}

fn beam(c: &TopoCircuit, cfg: &SearchConfig) -> OptimizeResult {
    let initial = cfg.objective.eval(c);
    let mut run = Run::new(c, initial);
    let mut frontier: Vec<(TopoCircuit, Vec<Move>, i64)> = vec![(c.clone(), Vec::new(), initial)];
    let (mut best, mut best_moves, mut best_v) = (c.clone(), Vec::new(), initial);
    let mut seen: HashSet<String> = HashSet::from([circuit_digest(c)]);
    let mut steps = 0;
    while steps < cfg.max_steps {
        let mut children: Vec<(TopoCircuit, Vec<Move>, i64, String)> = Vec::new();
        for (state, moves, _) in &frontier {
            let expanded: Vec<_> = scored(state, cfg.objective, cfg.move_budget)
                .into_par_iter()
                .map(|(m, next, v)| {
                    let digest = circuit_digest(&next);
                    (m, next, v, digest)
                })
                .collect();
            for (m, next, v, digest) in expanded {
                let mut path = moves.clone();
                path.push(m);
                children.push((next, path, v, digest));
            }
        }
        // stable: equal objectives keep parent-then-enumeration order
        children.sort_by_key(|ch| ch.2);
        let mut next_frontier = Vec::new();
        for (state, path, v, digest) in children {
            if next_frontier.len() >= cfg.beam_width {
                break;
            }
            if seen.insert(digest) {
                next_frontier.push((state, path, v));
            }
        }
        if next_frontier.is_empty() {
            break;
        }
        steps += 1;
        let (lead, lead_path, lead_v) = &next_frontier[0];
        let improved = *lead_v < best_v;
        run.record(steps, (*lead_v).min(best_v), improved, lead_path.last().map(|m| m.kind_name()).unwrap_or("none"));
        if improved {
            best = lead.clone();
            best_moves = lead_path.clone();
            best_v = *lead_v;
        }
        frontier = next_frontier;
    }
    run.log.moves = best_moves;
    finish(run, initial, best, best_v, steps)
}

/// Replays `result.log` from `input`, checking geometry and signature at every step.
pub fn verify_result(input: &TopoCircuit, result: &OptimizeResult) -> Result<(), String> {
    let reference = signature(input).map_err(|e| e.to_string())?;
    let mut cur = input.clone();
    for (i, m) in result.log.moves.iter().enumerate() {
        cur = apply_move(&cur, m).map_err(|e| format!("step {i}: {e}"))?;
        let r = validate_geometry(&cur);
        if !r.is_valid() {
            return Err(format!("step {i}: invalid geometry: {r}"));
        }
        let sig = signature(&cur).map_err(|e| format!("step {i}: {e}"))?;
        let diff = signatures_equal(&reference, &sig);
        if !diff.is_equal() {
            return Err(format!("step {i}: signature changed: {:?}", diff.differences));
        }
    }
    if cur != result.final_circuit {
        return Err("replayed circuit differs from the reported final circuit".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, DefectStrand, LatticePoint as P, PortFace, PortLabel, StrandKind};

    fn rect() -> TopoCircuit {
        TopoCircuit::new(Bounds::from_extents(6, 6, 6)).with_strand(DefectStrand::closed(
            "a",
            StrandKind::Primal,
            vec![P::new(2, 2, 3), P::new(3, 2, 3), P::new(3, 3, 3), P::new(2, 3, 3)],
        ))
    }

    #[test]
    fn pinned_wire_is_already_minimal() {
        let mut c = TopoCircuit::new(Bounds::from_extents(6, 4, 4));
        c.ports.push(PortLabel { name: "i".into(), position: P::new(0, 2, 2), face: PortFace::Input });
        c.ports.push(PortLabel { name: "o".into(), position: P::new(6, 2, 2), face: PortFace::Output });
        c.strands.push(DefectStrand::open("w", StrandKind::Primal, vec![P::new(0, 2, 2), P::new(6, 2, 2)], "i", "o"));
        let r = optimize(&c, &SearchConfig::default());
        assert_eq!(r.final_volume, r.initial_volume);
        assert_eq!(r.final_volume, 6);
        assert!(r.log.moves.is_empty());
    }

    #[test]
    fn greedy_deletes_free_loop_under_cell_objective() {
        let c = rect();
        let cfg = SearchConfig { objective: Objective::OccupiedCells, ..Default::default() };
        let r = optimize(&c, &cfg);
        assert_eq!(r.final_volume, 0);
        assert_eq!(r.log.moves, vec![Move::DeleteLoop { strand: "a".into() }]);
        verify_result(&c, &r).unwrap();
    }

    #[test]
    fn anneal_never_returns_worse() {
        let c = rect();
        let cfg = SearchConfig { strategy: Strategy::Anneal, max_steps: 40, seed: 7, ..Default::default() };
        let r = optimize(&c, &cfg);
        assert!(r.final_volume <= r.initial_volume);
        assert_eq!(*r.objective_trace.iter().min().unwrap(), r.final_volume);
        assert_eq!(r.trace.len(), r.steps_taken + 1);
        assert_eq!(optimize(&c, &cfg).log, r.log);
        verify_result(&c, &r).unwrap();
    }
}
