//! Optimal alignments of a trace against a process net.
//!
//! The search space is the synchronous product of the trace (positions
//! `0..=n`) and the net's reachability graph. Exact cost-to-goal is computed
//! for every product state by a backward Dijkstra from the goal state
//! `(n, final marking)`. An alignment is then read off by walking forward
//! from `(0, initial marking)` and taking, at each state, the first move in
//! preference order that stays on an optimal path.
//!
//! Costs are compared lexicographically as (cost, moves), so among optimal
//! alignments the shortest is returned and zero-cost cycles cannot stall the
//! forward walk. Move preference: synchronous, invisible model, visible
//! model, log; then label name; then transition index.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::ConformanceError;
use crate::label::EventClass;
use crate::model::{ProcessNet, ReachabilityGraph, TransitionId};

/// Upper bound on explored markings per net.
pub const MARKING_LIMIT: usize = 100_000;

/// Costs of non-synchronous moves. Synchronous and invisible model moves
/// always cost zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostFunction {
    pub log_only: u32,
    pub visible_model_only: u32,
}

impl Default for CostFunction {
    fn default() -> Self {
        CostFunction {
            log_only: 1,
            visible_model_only: 1,
        }
    }
}

impl CostFunction {
    pub fn new(log_only: u32, visible_model_only: u32) -> Result<Self, ConformanceError> {
        let c = CostFunction {
            log_only,
            visible_model_only,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConformanceError> {
        if self.log_only == 0 || self.visible_model_only == 0 {
            return Err(ConformanceError::InvalidCost(
                "log-only and visible model-only costs must be positive".into(),
            ));
        }
        Ok(())
    }

    fn model_move(&self, visible: bool) -> u64 {
        if visible {
            self.visible_model_only as u64
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    Synchronous {
        label: EventClass,
        transition: TransitionId,
    },
    LogOnly {
        label: EventClass,
    },
    ModelOnly {
        transition: TransitionId,
        label: Option<EventClass>,
        visible: bool,
    },
}

impl Move {
    pub fn cost(&self, cost: &CostFunction) -> u64 {
        match self {
            Move::Synchronous { .. } => 0,
            Move::LogOnly { .. } => cost.log_only as u64,
            Move::ModelOnly { visible, .. } => cost.model_move(*visible),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: u64,
}

impl Alignment {
    /// Verifies that the log projection equals `trace`, that the model
    /// projection fires from the initial to the final marking, and that the
    /// cost is the sum of move costs.
    pub fn check(&self, trace: &[EventClass], net: &ProcessNet, cost: &CostFunction) -> Result<(), String> {
        let log_side: Vec<EventClass> = self
            .moves
            .iter()
            .filter_map(|m| match m {
                Move::Synchronous { label, .. } | Move::LogOnly { label } => Some(*label),
                Move::ModelOnly { .. } => None,
            })
            .collect();
        if log_side != trace {
            return Err("log projection differs from the trace".into());
        }
        let mut marking = net.initial_marking().clone();
        for m in &self.moves {
            let t = match m {
                Move::Synchronous { transition, label } => {
                    if net.transitions()[*transition].label != Some(*label) {
                        return Err(format!("synchronous move on {label} fires a differently labelled transition"));
                    }
                    *transition
                }
                Move::ModelOnly { transition, visible, .. } => {
                    if net.transitions()[*transition].is_visible() != *visible {
                        return Err("model move visibility is wrong".into());
                    }
                    *transition
                }
                Move::LogOnly { .. } => continue,
            };
            marking = net
                .fire(&marking, t)
                .ok_or_else(|| format!("transition {} is not enabled", net.transitions()[t].name))?;
        }
        if &marking != net.final_marking() {
            return Err("model projection does not reach the final marking".into());
        }
        let total: u64 = self.moves.iter().map(|m| m.cost(cost)).sum();
        if total != self.cost {
            return Err(format!("cost {} differs from the sum of move costs {total}", self.cost));
        }
        Ok(())
    }
}

/// A net prepared for repeated alignment: reachability graph plus the
/// cheapest complete model run.
#[derive(Debug, Clone)]
pub struct Aligner<'a> {
    net: &'a ProcessNet,
    graph: ReachabilityGraph,
    cost: CostFunction,
    final_id: usize,
    cheapest_run: u64,
}

type Dist = (u64, u32);
const UNREACHED: Dist = (u64::MAX, u32::MAX);

impl<'a> Aligner<'a> {
    pub fn new(net: &'a ProcessNet, cost: CostFunction) -> Result<Self, ConformanceError> {
        cost.validate()?;
        let graph = net.reachability(MARKING_LIMIT)?;
        let final_id = graph.final_marking.ok_or(ConformanceError::FinalMarkingUnreachable)?;
        let mut aligner = Aligner {
            net,
            graph,
            cost,
            final_id,
            cheapest_run: 0,
        };
        let dist = aligner.cost_to_goal(&[]);
        let (c, _) = dist[aligner.graph.initial];
        if c == u64::MAX {
            return Err(ConformanceError::FinalMarkingUnreachable);
        }
        aligner.cheapest_run = c;
        Ok(aligner)
    }

    pub fn net(&self) -> &ProcessNet {
        self.net
    }

    pub fn cost_function(&self) -> &CostFunction {
        &self.cost
    }

    /// Cost of the cheapest firing sequence from the initial to the final
    /// marking, counting visible transitions only.
    pub fn cheapest_model_run(&self) -> u64 {
        self.cheapest_run
    }

    /// Every event as a log move plus the cheapest model run.
    pub fn worst_case_cost(&self, trace_len: usize) -> u64 {
        trace_len as u64 * self.cost.log_only as u64 + self.cheapest_run
    }

    fn state(&self, pos: usize, marking: usize) -> usize {
        pos * self.graph.len() + marking
    }

    /// Exact (cost, moves) from every product state to the goal.
    fn cost_to_goal(&self, trace: &[EventClass]) -> Vec<Dist> {
        let m_count = self.graph.len();
        let n = trace.len();
        let mut dist = vec![UNREACHED; (n + 1) * m_count];
        let mut heap = BinaryHeap::new();
        let goal = self.state(n, self.final_id);
        dist[goal] = (0, 0);
        heap.push(Reverse((0u64, 0u32, n, self.final_id)));

        while let Some(Reverse((c, k, pos, m))) = heap.pop() {
            if (c, k) > dist[self.state(pos, m)] {
                continue;
            }
            let mut relax = |p: usize, mm: usize, step: u64, heap: &mut BinaryHeap<_>| {
                let cand = (c + step, k + 1);
                let s = self.state(p, mm);
                if cand < dist[s] {
                    dist[s] = cand;
                    heap.push(Reverse((cand.0, cand.1, p, mm)));
                }
            };
            for &(t, prev) in &self.graph.predecessors[m] {
                let tr = &self.net.transitions()[t];
                relax(pos, prev, self.cost.model_move(tr.is_visible()), &mut heap);
                if pos > 0 && tr.label == Some(trace[pos - 1]) {
                    relax(pos - 1, prev, 0, &mut heap);
                }
            }
            if pos > 0 {
                relax(pos - 1, m, self.cost.log_only as u64, &mut heap);
            }
        }
        dist
    }

    pub fn align(&self, trace: &[EventClass]) -> Alignment {
        let dist = self.cost_to_goal(trace);
        let n = trace.len();
        let mut pos = 0;
        let mut m = self.graph.initial;
        let (total, _) = dist[self.state(0, m)];
        debug_assert!(total != u64::MAX, "goal reachable by construction");
        let mut moves = Vec::new();

        while (pos, m) != (n, self.final_id) {
            let (c, k) = dist[self.state(pos, m)];
            let on_path = |p: usize, mm: usize, step: u64| {
                let (c2, k2) = dist[self.state(p, mm)];
                c2 != u64::MAX && c2 + step == c && k2 + 1 == k
            };

            // (rank, label name, transition, move, next state)
            let mut best: Option<(u8, String, usize, Move, usize, usize)> = None;
            let mut consider = |cand: (u8, String, usize, Move, usize, usize)| {
                let better = match &best {
                    None => true,
                    Some(b) => (cand.0, &cand.1, cand.2) < (b.0, &b.1, b.2),
                };
                if better {
                    best = Some(cand);
                }
            };
            for &(t, next) in &self.graph.successors[m] {
                let tr = &self.net.transitions()[t];
                if pos < n && tr.label == Some(trace[pos]) && on_path(pos + 1, next, 0) {
                    let label = trace[pos];
                    consider((
                        0,
                        label.to_string(),
                        t,
                        Move::Synchronous { label, transition: t },
                        pos + 1,
                        next,
                    ));
                }
                let visible = tr.is_visible();
                if on_path(pos, next, self.cost.model_move(visible)) {
                    let (rank, name) = match tr.label {
                        Some(l) => (2, l.to_string()),
                        None => (1, tr.name.clone()),
                    };
                    let mv = Move::ModelOnly {
                        transition: t,
                        label: tr.label,
                        visible,
                    };
                    consider((rank, name, t, mv, pos, next));
                }
            }
            if pos < n && on_path(pos + 1, m, self.cost.log_only as u64) {
                let label = trace[pos];
                consider((3, label.to_string(), 0, Move::LogOnly { label }, pos + 1, m));
            }

            let (_, _, _, mv, p, mm) = best.expect("an optimal move exists from every state with finite cost");
            moves.push(mv);
            pos = p;
            m = mm;
        }

        Alignment { moves, cost: total }
    }
}

/// Minimum-cost alignment of `trace` against `net`.
pub fn optimal_alignment(trace: &[EventClass], net: &ProcessNet, cost: &CostFunction) -> Result<Alignment, ConformanceError> {
    Ok(Aligner::new(net, *cost)?.align(trace))
}

/// `|trace|` log moves plus the cheapest visible model run.
pub fn worst_case_cost(trace: &[EventClass], net: &ProcessNet, cost: &CostFunction) -> Result<u64, ConformanceError> {
    Ok(Aligner::new(net, *cost)?.worst_case_cost(trace.len()))
}
