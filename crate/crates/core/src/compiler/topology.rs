use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::ir::{Gate, Opcode};

use super::CompileError;

/// Device connectivity plus gate durations in cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    num_positions: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
    distance: Vec<Vec<usize>>,
    durations: BTreeMap<Opcode, u32>,
    native_swap: bool,
}

pub fn default_duration(op: Opcode) -> u32 {
    match op {
        Opcode::PrepZ | Opcode::MeasureZ => 4,
        Opcode::Cnot | Opcode::Cz | Opcode::Swap | Opcode::Mcz => 2,
        _ => 1,
    }
}

#[derive(Debug, Deserialize)]
struct GridSpec {
    rows: usize,
    cols: usize,
}

/// On-disk topology description.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    grid: Option<GridSpec>,
    edges: Option<Vec<[usize; 2]>>,
    num_positions: Option<usize>,
    #[serde(default)]
    durations: BTreeMap<String, u32>,
    #[serde(default = "default_native_swap")]
    native_swap: bool,
}

fn default_native_swap() -> bool {
    true
}

#[derive(Serialize)]
struct TopologyOut<'a> {
    num_positions: usize,
    edges: Vec<[usize; 2]>,
    durations: BTreeMap<&'a str, u32>,
    native_swap: bool,
}

impl Topology {
    /// Validate and build. Edges are undirected; duplicates are merged.
    pub fn new(
        num_positions: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, CompileError> {
        if num_positions == 0 {
            return Err(CompileError::InvalidTopology("no positions".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(CompileError::InvalidTopology(format!("self-edge at {a}")));
            }
            if a.max(b) >= num_positions {
                return Err(CompileError::InvalidTopology(format!(
                    "edge ({a}, {b}) outside {num_positions} positions"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbours = vec![Vec::new(); num_positions];
        for &(a, b) in &set {
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        for n in &mut neighbours {
            n.sort_unstable();
        }
        let distance: Vec<Vec<usize>> = (0..num_positions).map(|s| bfs(&neighbours, s)).collect();
        if distance[0].contains(&usize::MAX) {
            return Err(CompileError::InvalidTopology("graph is not connected".into()));
        }
        Ok(Topology {
            num_positions,
            edges: set,
            neighbours,
            distance,
            durations: Opcode::ALL.iter().map(|&op| (op, default_duration(op))).collect(),
            native_swap: true,
        })
    }

    /// Row-major `rows x cols` grid with 4-neighbour edges.
    pub fn grid(rows: usize, cols: usize) -> Result<Self, CompileError> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let p = r * cols + c;
                if c + 1 < cols {
                    edges.push((p, p + 1));
                }
                if r + 1 < rows {
                    edges.push((p, p + cols));
                }
            }
        }
        Topology::new(rows * cols, edges)
    }

    /// Positions `0 - 1 - ... - (n-1)`.
    pub fn line(n: usize) -> Result<Self, CompileError> {
        Topology::grid(1, n)
    }

    /// Every pair adjacent.
    pub fn all_to_all(n: usize) -> Result<Self, CompileError> {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Topology::new(n, edges)
    }

    pub fn from_json(text: &str) -> Result<Self, CompileError> {
        let file: TopologyFile =
            serde_json::from_str(text).map_err(|e| CompileError::InvalidTopology(e.to_string()))?;
        let mut topo = match (file.grid, file.edges) {
            (Some(g), None) => {
                if file.num_positions.is_some_and(|n| n != g.rows * g.cols) {
                    return Err(CompileError::InvalidTopology(
                        "num_positions disagrees with grid size".into(),
                    ));
                }
                Topology::grid(g.rows, g.cols)?
            }
            (None, Some(edges)) => {
                let implied = edges.iter().flatten().max().map_or(0, |m| m + 1);
                let n = file.num_positions.unwrap_or(implied);
                Topology::new(n, edges.into_iter().map(|[a, b]| (a, b)))?
            }
            _ => {
                return Err(CompileError::InvalidTopology(
                    "exactly one of `grid` or `edges` is required".into(),
                ))
            }
        };
        for (name, cycles) in file.durations {
            let op: Opcode = name
                .parse()
                .map_err(|e: crate::ir::UnknownOpcode| CompileError::InvalidTopology(e.to_string()))?;
            topo = topo.with_duration(op, cycles)?;
        }
        Ok(topo.with_native_swap(file.native_swap))
    }

    pub fn to_json(&self) -> String {
        let out = TopologyOut {
            num_positions: self.num_positions,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            durations: self.durations.iter().map(|(op, &d)| (op.name(), d)).collect(),
            native_swap: self.native_swap,
        };
        serde_json::to_string(&out).expect("topology serializes")
    }

    pub fn with_duration(mut self, op: Opcode, cycles: u32) -> Result<Self, CompileError> {
        if cycles == 0 {
            return Err(CompileError::InvalidTopology(format!(
                "duration of {op} must be positive"
            )));
        }
        self.durations.insert(op, cycles);
        Ok(self)
    }

    pub fn with_native_swap(mut self, native_swap: bool) -> Self {
        self.native_swap = native_swap;
        self
    }

    pub fn num_positions(&self) -> usize {
        self.num_positions
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn neighbours(&self, p: usize) -> &[usize] {
        &self.neighbours[p]
    }

    pub fn native_swap(&self) -> bool {
        self.native_swap
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Hop count between two positions.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distance[a][b]
    }

    pub fn duration(&self, op: Opcode) -> u32 {
        self.durations[&op]
    }

    pub fn gate_duration(&self, gate: &Gate) -> u32 {
        self.duration(gate.opcode())
    }
}

fn bfs(neighbours: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; neighbours.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(p) = queue.pop_front() {
        for &n in &neighbours[p] {
            if dist[n] == usize::MAX {
                dist[n] = dist[p] + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}
