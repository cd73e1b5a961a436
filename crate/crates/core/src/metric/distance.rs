//! Graph distances on the jump lattice.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::MetricError;
use crate::heat::GridModel;

#[derive(Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn adjacency(grid: &GridModel) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); grid.nodes()];
    for (i, j) in grid.edges() {
        adj[i].push(j as u32);
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn dijkstra(adj: &[Vec<u32>], step: f64, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        for &j in &adj[i] {
            let j = j as usize;
            let nd = d + step;
            if nd < dist[j] {
                dist[j] = nd;
                heap.push(Reverse((Key(nd), j)));
            }
        }
    }
    dist
}

/// Shortest-path lengths from `source`. Every jump follows a unit horizontal
/// field for time `h`, so each edge is a subunit curve of length `h`.
pub fn graph_distances(grid: &GridModel, source: usize) -> Vec<f64> {
    dijkstra(&adjacency(grid), grid.h(), source)
}

/// Distances from a set of source nodes to every node.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    nodes: usize,
    sources: Vec<usize>,
    data: Vec<f64>,
    index: HashMap<usize, usize>,
}

impl DistanceMatrix {
    fn from_parts(nodes: usize, sources: Vec<usize>, data: Vec<f64>) -> Self {
        let index = sources.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        DistanceMatrix { nodes, sources, data, index }
    }

    /// Build directly from a square table, for hand-made metrics.
    pub fn from_square(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let data = rows.into_iter().flatten().collect::<Vec<_>>();
        assert_eq!(data.len(), n * n);
        Self::from_parts(n, (0..n).collect(), data)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn is_square(&self) -> bool {
        self.sources.len() == self.nodes && self.sources.iter().enumerate().all(|(k, &s)| k == s)
    }

    pub fn row(&self, source: usize) -> Option<&[f64]> {
        self.index.get(&source).map(|&k| &self.data[k * self.nodes..(k + 1) * self.nodes])
    }

    /// `d(x, y)` when either endpoint is a source.
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.row(x).map(|r| r[y]).or_else(|| self.row(y).map(|r| r[x]))
    }

    /// Largest violation of symmetry, zero diagonal and the triangle
    /// inequality over all source triples.
    pub fn axiom_defect(&self) -> f64 {
        let s = &self.sources;
        let mut worst: f64 = 0.0;
        for &a in s {
            worst = worst.max(self.get(a, a).unwrap().abs());
            for &b in s {
                let ab = self.get(a, b).unwrap();
                worst = worst.max((ab - self.row(b).unwrap()[a]).abs());
                for &c in s {
                    worst = worst.max(ab - self.get(a, c).unwrap() - self.get(c, b).unwrap());
                }
            }
        }
        worst
    }

    fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(b"SGDM")?;
        w.write_all(&(self.nodes as u64).to_le_bytes())?;
        w.write_all(&(self.sources.len() as u64).to_le_bytes())?;
        for &s in &self.sources {
            w.write_all(&(s as u64).to_le_bytes())?;
        }
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    fn read_from(mut r: impl Read) -> std::io::Result<Self> {
        let bad = || std::io::Error::new(std::io::ErrorKind::InvalidData, "corrupt distance sidecar");
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"SGDM" {
            return Err(bad());
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> std::io::Result<u64> {
            r.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let nodes = next(&mut r)? as usize;
        let count = next(&mut r)? as usize;
        let sources = (0..count).map(|_| next(&mut r).map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
        let mut data = Vec::with_capacity(nodes * count);
        for _ in 0..nodes * count {
            data.push(f64::from_bits(next(&mut r)?));
        }
        if sources.iter().any(|&s| s >= nodes) {
            return Err(bad());
        }
        Ok(Self::from_parts(nodes, sources, data))
    }
}

/// Dijkstra from every node in `sources`.
pub fn subriemannian_distance(grid: &GridModel, sources: &[usize]) -> Result<DistanceMatrix, MetricError> {
    let adj = adjacency(grid);
    let rows: Vec<Vec<f64>> = sources.par_iter().map(|&s| dijkstra(&adj, grid.h(), s)).collect();
    for (k, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|d| d.is_infinite()) {
            return Err(MetricError::Disconnected { from: sources[k], to: j });
        }
    }
    Ok(DistanceMatrix::from_parts(grid.nodes(), sources.to_vec(), rows.concat()))
}

/// Dijkstra from every node in `sources`, leaving nodes outside the source's
/// jump component at `+∞`.
pub fn component_distance(grid: &GridModel, sources: &[usize]) -> DistanceMatrix {
    let adj = adjacency(grid);
    let rows: Vec<Vec<f64>> = sources.par_iter().map(|&s| dijkstra(&adj, grid.h(), s)).collect();
    DistanceMatrix::from_parts(grid.nodes(), sources.to_vec(), rows.concat())
}

/// Key for the sidecar cache: model name, grid spec and sources.
pub fn grid_hash(grid: &GridModel, sources: &[usize]) -> String {
    let mut h = Sha256::new();
    h.update(grid.name.as_bytes());
    h.update(format!("{:?}", grid.spec()).as_bytes());
    for s in sources {
        h.update((*s as u64).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sidecar_path(dir: &Path, grid: &GridModel, sources: &[usize]) -> PathBuf {
    dir.join(format!("dist-{}.bin", &grid_hash(grid, sources)[..16]))
}

/// Load distances from the sidecar in `dir` or compute and store them.
pub fn cached_distance(grid: &GridModel, sources: &[usize], dir: &Path) -> Result<DistanceMatrix, MetricError> {
    let path = sidecar_path(dir, grid, sources);
    if let Ok(file) = fs::File::open(&path) {
        if let Ok(d) = DistanceMatrix::read_from(std::io::BufReader::new(file)) {
            if d.nodes == grid.nodes() && d.sources == sources {
                return Ok(d);
            }
        }
    }
    let d = subriemannian_distance(grid, sources)?;
    fs::create_dir_all(dir)?;
    let file = fs::File::create(&path)?;
    d.write_to(std::io::BufWriter::new(file))?;
    Ok(d)
}
