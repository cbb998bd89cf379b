//! Parallel aggregation: quasi-random vertex scores, distance-3 coarse-vertex
//! selection and multi-pass aggregate formation.
//!
//! Each pass scores the still-unprocessed vertices, picks every vertex whose
//! score beats all unprocessed vertices within graph distance two, and grows
//! an aggregate around each pick. Picks are pairwise at distance three or
//! more, so no two aggregates compete for the same neighbour and the pass
//! needs no synchronization beyond the per-phase barrier.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const UNASSIGNED: usize = usize::MAX;

/// A non-overlapping partition of a level's vertices into aggregates.
///
/// Aggregate `k` is seeded by vertex `coarse_vertex_of_agg[k]`; seeds are
/// strictly increasing, so the numbering does not depend on the order in
/// which aggregates were formed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregation {
    n_fine: usize,
    n_coarse: usize,
    vertex_to_agg: Vec<usize>,
    agg_sizes: Vec<usize>,
    coarse_vertex_of_agg: Vec<usize>,
}

impl Aggregation {
    /// Checks cover, nonempty aggregates, seed membership and seed order.
    pub fn new(vertex_to_agg: Vec<usize>, coarse_vertex_of_agg: Vec<usize>) -> Result<Self> {
        let n_fine = vertex_to_agg.len();
        let n_coarse = coarse_vertex_of_agg.len();
        let mut agg_sizes = vec![0usize; n_coarse];
        for (v, &k) in vertex_to_agg.iter().enumerate() {
            if k >= n_coarse {
                return Err(Error::InvalidStructure(format!(
                    "vertex {v} mapped to aggregate {k}, only {n_coarse} exist"
                )));
            }
            agg_sizes[k] += 1;
        }
        if let Some(k) = agg_sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidStructure(format!("aggregate {k} is empty")));
        }
        for (k, &c) in coarse_vertex_of_agg.iter().enumerate() {
            if c >= n_fine || vertex_to_agg[c] != k {
                return Err(Error::InvalidStructure(format!("seed {c} of aggregate {k} is not one of its members")));
            }
        }
        if coarse_vertex_of_agg.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStructure("aggregate seeds are not strictly increasing".into()));
        }
        Ok(Self { n_fine, n_coarse, vertex_to_agg, agg_sizes, coarse_vertex_of_agg })
    }

    /// Builds an aggregation from a bare vertex map, taking the smallest
    /// member of each aggregate as its seed and renumbering aggregates in
    /// seed order. Labels need not be contiguous.
    pub fn from_map(map: &[usize]) -> Result<Self> {
        let mut first: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for (v, &label) in map.iter().enumerate() {
            first.entry(label).or_insert(v);
        }
        let mut seeds: Vec<(usize, usize)> = first.into_iter().map(|(label, v)| (v, label)).collect();
        seeds.sort_unstable();
        let relabel: std::collections::HashMap<usize, usize> =
            seeds.iter().enumerate().map(|(k, &(_, label))| (label, k)).collect();
        let vertex_to_agg = map.iter().map(|l| relabel[l]).collect();
        Self::new(vertex_to_agg, seeds.into_iter().map(|(v, _)| v).collect())
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            n_fine: n,
            n_coarse: n,
            vertex_to_agg: (0..n).collect(),
            agg_sizes: vec![1; n],
            coarse_vertex_of_agg: (0..n).collect(),
        }
    }

    pub fn n_fine(&self) -> usize {
        self.n_fine
    }

    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    pub fn vertex_to_agg(&self) -> &[usize] {
        &self.vertex_to_agg
    }

    pub fn agg_sizes(&self) -> &[usize] {
        &self.agg_sizes
    }

    pub fn coarse_vertex_of_agg(&self) -> &[usize] {
        &self.coarse_vertex_of_agg
    }

    pub fn max_size(&self) -> usize {
        self.agg_sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn coarsening_ratio(&self) -> f64 {
        self.n_fine as f64 / self.n_coarse as f64
    }

    /// CSR-style grouping of members: aggregate `k` owns
    /// `members[offsets[k]..offsets[k + 1]]`, listed in increasing vertex order.
    pub fn members(&self) -> (Vec<usize>, Vec<usize>) {
        let mut offsets = vec![0usize; self.n_coarse + 1];
        for (k, s) in self.agg_sizes.iter().enumerate() {
            offsets[k + 1] = offsets[k] + s;
        }
        let mut next = offsets.clone();
        let mut members = vec![0usize; self.n_fine];
        for (v, &k) in self.vertex_to_agg.iter().enumerate() {
            members[next[k]] = v;
            next[k] += 1;
        }
        (offsets, members)
    }

    /// Map composition: `self` groups fine vertices, `coarser` groups the
    /// aggregates of `self`.
    pub fn compose(&self, coarser: &Aggregation) -> Result<Aggregation> {
        if coarser.n_fine != self.n_coarse {
            return Err(Error::DimensionMismatch { expected: self.n_coarse, found: coarser.n_fine });
        }
        let vertex_to_agg = self.vertex_to_agg.iter().map(|&k| coarser.vertex_to_agg[k]).collect();
        let seeds = coarser.coarse_vertex_of_agg.iter().map(|&k| self.coarse_vertex_of_agg[k]).collect();
        Aggregation::new(vertex_to_agg, seeds)
    }

    /// True when both aggregations induce the same vertex partition,
    /// irrespective of aggregate numbering.
    pub fn same_partition(&self, other: &Aggregation) -> bool {
        if self.n_fine != other.n_fine || self.n_coarse != other.n_coarse {
            return false;
        }
        let mut fwd = vec![UNASSIGNED; self.n_coarse];
        for (&a, &b) in self.vertex_to_agg.iter().zip(&other.vertex_to_agg) {
            if fwd[a] == UNASSIGNED {
                fwd[a] = b;
            } else if fwd[a] != b {
                return false;
            }
        }
        let mut hit = vec![false; self.n_coarse];
        fwd.iter().all(|&b| !std::mem::replace(&mut hit[b], true))
    }

    /// Every aggregate induces a connected subgraph of `a`.
    pub fn is_connected_in(&self, a: &CsrMatrix) -> bool {
        let (offsets, members) = self.members();
        let mut seen = vec![false; self.n_fine];
        (0..self.n_coarse).all(|k| {
            let group = &members[offsets[k]..offsets[k + 1]];
            let mut stack = vec![group[0]];
            seen[group[0]] = true;
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for &w in a.row(u).0 {
                    if !seen[w] && self.vertex_to_agg[w] == k {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            count == group.len()
        })
    }

    /// Text dump: header `agg n_fine n_coarse`, then one aggregate index per
    /// fine vertex.
    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "agg {} {}", self.n_fine, self.n_coarse)?;
        for k in &self.vertex_to_agg {
            writeln!(w, "{k}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the text dump. Aggregates are renumbered by smallest member, so
    /// the result equals the input up to aggregate numbering.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })??;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let bad = |line, msg: &str| Error::Parse { line, msg: msg.into() };
        if toks.len() != 3 || toks[0] != "agg" {
            return Err(bad(1, "expected 'agg n_fine n_coarse' header"));
        }
        let n_fine: usize = toks[1].parse().map_err(|_| bad(1, "bad n_fine"))?;
        let n_coarse: usize = toks[2].parse().map_err(|_| bad(1, "bad n_coarse"))?;
        let mut map = Vec::with_capacity(n_fine);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let k: usize = line.trim().parse().map_err(|_| bad(i + 2, "bad aggregate index"))?;
            if k >= n_coarse {
                return Err(bad(i + 2, "aggregate index out of range"));
            }
            map.push(k);
        }
        if map.len() != n_fine {
            return Err(bad(1, "vertex count does not match header"));
        }
        let agg = Self::from_map(&map)?;
        if agg.n_coarse != n_coarse {
            return Err(bad(1, "aggregate count does not match header"));
        }
        Ok(agg)
    }
}

/// Which vertices may join an aggregate grown around a coarse vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reach {
    /// The coarse vertex and its unprocessed direct neighbours.
    Neighbors,
    /// Additionally unprocessed vertices at distance two, reached through a
    /// kept neighbour.
    DistanceTwo,
}

/// Order in which candidates are kept when the size cap truncates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborOrder {
    /// Increasing vertex index.
    Index,
    /// Decreasing connection strength `|a_ij|`, ties by increasing index.
    Strength,
}

impl FromStr for Reach {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "neighbors" | "1" => Ok(Self::Neighbors),
            "distance-two" | "2" => Ok(Self::DistanceTwo),
            _ => Err(format!("unknown reach '{s}' (neighbors|distance-two)")),
        }
    }
}

impl FromStr for NeighborOrder {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "index" => Ok(Self::Index),
            "strength" => Ok(Self::Strength),
            _ => Err(format!("unknown neighbor order '{s}' (index|strength)")),
        }
    }
}

impl fmt::Display for Reach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Neighbors => "neighbors",
            Self::DistanceTwo => "distance-two",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AggregationConfig {
    /// Largest allowed aggregate size `t`; `None` is unlimited.
    pub size_cap: Option<usize>,
    pub seed: u64,
    pub max_passes: usize,
    /// 2 aggregates twice and composes the maps (skips a level).
    pub passes_per_level: usize,
    pub reach: Reach,
    pub neighbor_order: NeighborOrder,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            size_cap: Some(5),
            seed: 0,
            max_passes: 20,
            passes_per_level: 1,
            reach: Reach::Neighbors,
            neighbor_order: NeighborOrder::Index,
        }
    }
}

impl AggregationConfig {
    pub fn with_cap(size_cap: Option<usize>, seed: u64) -> Self {
        Self { size_cap, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size_cap == Some(0) {
            return Err(Error::InvalidConfig("size cap t must be at least 1".into()));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be at least 1".into()));
        }
        if !(1..=2).contains(&self.passes_per_level) {
            return Err(Error::InvalidConfig("passes_per_level must be 1 or 2".into()));
        }
        Ok(())
    }

    fn cap(&self) -> usize {
        self.size_cap.unwrap_or(usize::MAX)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based uniform draw in `[0, 1)` keyed by `(seed, pass, vertex)`.
pub fn unit_random(seed: u64, pass: usize, vertex: usize) -> f64 {
    let h = splitmix64(seed ^ splitmix64((pass as u64) ^ splitmix64(vertex as u64).rotate_left(17)));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `degree + ((vertex mod 12) + rand) / 12`.
pub fn quasi_random_score(degree: usize, vertex: usize, rand: f64) -> f64 {
    degree as f64 + ((vertex % 12) as f64 + rand) / 12.0
}

/// Scores for every vertex of `a` in the given pass. The degree is the
/// number of stored off-diagonal entries of the row.
pub fn quasi_random_scores(a: &CsrMatrix, seed: u64, pass: usize) -> Vec<f64> {
    (0..a.n_rows())
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| quasi_random_score(a.off_diagonal_count(i), i, unit_random(seed, pass, i)))
        .collect()
}

/// Strict total order on vertices: higher score wins, equal scores go to
/// the smaller index.
#[inline]
fn beats(scores: &[f64], i: usize, j: usize) -> bool {
    scores[i] > scores[j] || (scores[i] == scores[j] && i < j)
}

/// All unprocessed vertices that beat every other unprocessed vertex in
/// their row of the distance-two pattern. Returned in increasing order.
///
/// The result is nonempty whenever an unprocessed vertex exists (the overall
/// winner always qualifies) and its members are pairwise at graph distance
/// three or more.
pub fn select_coarse_vertices(pattern: &CsrMatrix, scores: &[f64], processed: &[bool]) -> Vec<usize> {
    (0..pattern.n_rows())
        .into_par_iter()
        .with_min_len(256)
        .filter(|&i| !processed[i] && pattern.row(i).0.iter().all(|&j| j == i || processed[j] || beats(scores, i, j)))
        .collect()
}

fn ordered_candidates(a: &CsrMatrix, i: usize, keep: impl Fn(usize) -> bool, order: NeighborOrder) -> Vec<usize> {
    let (cols, vals) = a.row(i);
    let mut cand: Vec<(usize, f64)> =
        cols.iter().zip(vals).filter(|(&j, _)| j != i && keep(j)).map(|(&j, &v)| (j, v.abs())).collect();
    if order == NeighborOrder::Strength {
        cand.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    }
    cand.into_iter().map(|(j, _)| j).collect()
}

/// Grows one aggregate per coarse vertex and marks its members processed.
///
/// `owner[v]` receives the coarse vertex of the aggregate `v` joined. With
/// [`Reach::DistanceTwo`], a distance-two vertex reachable from several
/// coarse vertices joins the higher-scored one.
pub fn aggregate_pass(
    a: &CsrMatrix,
    centers: &[usize],
    scores: &[f64],
    processed: &mut [bool],
    owner: &mut [usize],
    cfg: &AggregationConfig,
) {
    let cap = cfg.cap();
    let free = |j: usize| !processed[j];
    let mut groups: Vec<Vec<usize>> = centers
        .par_iter()
        .map(|&i| {
            let mut g = vec![i];
            g.extend(ordered_candidates(a, i, free, cfg.neighbor_order).into_iter().take(cap.saturating_sub(1)));
            g
        })
        .collect();

    if cfg.reach == Reach::DistanceTwo {
        let mut claimed = vec![false; a.n_rows()];
        for g in &groups {
            for &v in g {
                claimed[v] = true;
            }
        }
        // (vertex, strength to the kept group, group index)
        let offers: Vec<Vec<(usize, f64)>> = groups
            .par_iter()
            .map(|g| {
                if g.len() >= cap {
                    return Vec::new();
                }
                let mut best: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
                for &k in &g[1..] {
                    let (cols, vals) = a.row(k);
                    for (&j, &v) in cols.iter().zip(vals) {
                        if j != k && !processed[j] && !claimed[j] {
                            let e = best.entry(j).or_insert(0.0);
                            *e = e.max(v.abs());
                        }
                    }
                }
                best.into_iter().collect()
            })
            .collect();
        let mut winner = vec![UNASSIGNED; a.n_rows()];
        for (gi, list) in offers.iter().enumerate() {
            for &(j, _) in list {
                let c = groups[gi][0];
                if winner[j] == UNASSIGNED || beats(scores, c, groups[winner[j]][0]) {
                    winner[j] = gi;
                }
            }
        }
        for (gi, list) in offers.into_iter().enumerate() {
            let mut mine: Vec<(usize, f64)> = list.into_iter().filter(|&(j, _)| winner[j] == gi).collect();
            match cfg.neighbor_order {
                NeighborOrder::Index => mine.sort_by_key(|e| e.0),
                NeighborOrder::Strength => mine.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0))),
            }
            let room = cap - groups[gi].len();
            groups[gi].extend(mine.into_iter().take(room).map(|(j, _)| j));
        }
    }

    for g in &groups {
        let c = g[0];
        for &v in g {
            debug_assert!(!processed[v], "vertex {v} claimed twice");
            processed[v] = true;
            owner[v] = c;
        }
    }
}

/// Coarse vertices chosen in each pass, with the unprocessed set they were
/// chosen from.
#[derive(Debug, Clone)]
pub struct PassRecord {
    pub centers: Vec<usize>,
    pub unprocessed_before: Vec<bool>,
}

/// Runs the multi-pass aggregation on the matrix graph of `a`.
pub fn aggregate(a: &CsrMatrix, cfg: &AggregationConfig) -> Result<Aggregation> {
    cfg.validate()?;
    let first = aggregate_traced(a, cfg)?.0;
    if cfg.passes_per_level == 1 {
        return Ok(first);
    }
    let coarse = crate::hierarchy::galerkin_coarse(a, &first)?;
    let second = aggregate_traced(&coarse, cfg)?.0;
    first.compose(&second)
}

/// Single-level aggregation that also records every pass.
pub fn aggregate_traced(a: &CsrMatrix, cfg: &AggregationConfig) -> Result<(Aggregation, Vec<PassRecord>)> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() });
    }
    let n = a.n_rows();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let pattern = a.squared_pattern()?;
    let mut processed = vec![false; n];
    let mut owner = vec![UNASSIGNED; n];
    let mut remaining = n;
    let mut records = Vec::new();

    for pass in 0..cfg.max_passes {
        if remaining == 0 {
            break;
        }
        let scores = quasi_random_scores(a, cfg.seed, pass);
        let centers = select_coarse_vertices(&pattern, &scores, &processed);
        let before = processed.clone();
        aggregate_pass(a, &centers, &scores, &mut processed, &mut owner, cfg);
        let now = processed.iter().filter(|&&p| !p).count();
        debug_assert!(now < remaining, "pass {pass} made no progress");
        remaining = now;
        log::trace!("aggregation pass {pass}: {} centers, {remaining} unprocessed", centers.len());
        records.push(PassRecord { centers, unprocessed_before: before.iter().map(|p| !p).collect() });
    }
    for (v, o) in owner.iter_mut().enumerate() {
        if *o == UNASSIGNED {
            *o = v;
        }
    }

    // Exclusive prefix sum over seed flags numbers aggregates by seed index.
    let mut ids = vec![0usize; n];
    let mut next = 0;
    for v in 0..n {
        if owner[v] == v {
            ids[v] = next;
            next += 1;
        }
    }
    let seeds: Vec<usize> = (0..n).filter(|&v| owner[v] == v).collect();
    let vertex_to_agg = owner.iter().map(|&c| ids[c]).collect();
    Ok((Aggregation::new(vertex_to_agg, seeds)?, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{generate_structured_grid, BoundaryCondition, GraphProblem};

    fn path(n: usize) -> CsrMatrix {
        let edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        GraphProblem::new(n, edges, vec![]).unwrap().assemble_laplacian()
    }

    fn complete(n: usize) -> CsrMatrix {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, 1.0));
            }
        }
        GraphProblem::new(n, edges, vec![]).unwrap().assemble_laplacian()
    }

    #[test]
    fn score_formula() {
        assert_eq!(quasi_random_score(4, 0, 0.0), 4.0);
        assert_eq!(quasi_random_score(2, 1, 0.5), 2.125);
        assert_eq!(quasi_random_score(3, 25, 0.0), 3.0 + 1.0 / 12.0);
    }

    #[test]
    fn unit_random_range_and_reproducibility() {
        for v in 0..1000 {
            let r = unit_random(42, 3, v);
            assert!((0.0..1.0).contains(&r));
            assert_eq!(r, unit_random(42, 3, v));
        }
        assert_ne!(unit_random(42, 3, 7), unit_random(42, 4, 7));
        assert_ne!(unit_random(42, 3, 7), unit_random(43, 3, 7));
    }

    #[test]
    fn selection_on_path5() {
        let a = path(5);
        let p = a.squared_pattern().unwrap();
        let c = select_coarse_vertices(&p, &[5.0, 1.0, 2.0, 3.0, 4.0], &[false; 5]);
        assert_eq!(c, vec![0, 4]);
    }

    #[test]
    fn selection_with_equal_scores_is_greedy_by_index() {
        let a = path(7);
        let p = a.squared_pattern().unwrap();
        // Vertex 0 beats 1 and 2; 3 loses to 1, so only 0 qualifies first.
        let c = select_coarse_vertices(&p, &[1.0; 7], &[false; 7]);
        assert_eq!(c, vec![0]);
        let processed = [true, true, true, false, false, false, false];
        assert_eq!(select_coarse_vertices(&p, &[1.0; 7], &processed), vec![3]);
    }

    #[test]
    fn selection_single_unprocessed() {
        let a = path(4);
        let p = a.squared_pattern().unwrap();
        let c = select_coarse_vertices(&p, &[0.0, 9.0, 9.0, 9.0], &[true, true, false, true]);
        assert_eq!(c, vec![2]);
    }

    #[test]
    fn pass_distance_two_path5() {
        let a = path(5);
        let scores = [5.0, 1.0, 2.0, 3.0, 4.0];
        let cfg = AggregationConfig { size_cap: None, reach: Reach::DistanceTwo, ..Default::default() };
        let mut processed = [false; 5];
        let mut owner = [UNASSIGNED; 5];
        aggregate_pass(&a, &[0, 4], &scores, &mut processed, &mut owner, &cfg);
        assert_eq!(owner, [0, 0, 0, 4, 4]);
    }

    #[test]
    fn pass_neighbors_path5_leaves_middle() {
        let a = path(5);
        let scores = [5.0, 1.0, 2.0, 3.0, 4.0];
        let cfg = AggregationConfig { size_cap: None, ..Default::default() };
        let mut processed = [false; 5];
        let mut owner = [UNASSIGNED; 5];
        aggregate_pass(&a, &[0, 4], &scores, &mut processed, &mut owner, &cfg);
        assert_eq!(owner, [0, 0, UNASSIGNED, 4, 4]);
        assert!(!processed[2]);
    }

    #[test]
    fn pass_cap_one_gives_singletons() {
        let a = path(5);
        let cfg = AggregationConfig { size_cap: Some(1), ..Default::default() };
        let mut processed = [false; 5];
        let mut owner = [UNASSIGNED; 5];
        aggregate_pass(&a, &[0, 4], &[5.0, 1.0, 2.0, 3.0, 4.0], &mut processed, &mut owner, &cfg);
        assert_eq!(processed, [true, false, false, false, true]);
    }

    #[test]
    fn k4_single_aggregate() {
        let a = complete(4);
        for reach in [Reach::Neighbors, Reach::DistanceTwo] {
            let cfg = AggregationConfig { size_cap: None, reach, ..Default::default() };
            let mut processed = [false; 4];
            let mut owner = [UNASSIGNED; 4];
            aggregate_pass(&a, &[0], &[4.0, 3.0, 2.0, 1.0], &mut processed, &mut owner, &cfg);
            assert_eq!(owner, [0; 4]);
        }
    }

    #[test]
    fn strength_order_keeps_strong_neighbour() {
        let g = GraphProblem::new(3, vec![(0, 1, 1.0), (0, 2, 10.0)], vec![]).unwrap();
        let a = g.assemble_laplacian();
        let cfg =
            AggregationConfig { size_cap: Some(2), neighbor_order: NeighborOrder::Strength, ..Default::default() };
        let mut processed = [false; 3];
        let mut owner = [UNASSIGNED; 3];
        aggregate_pass(&a, &[0], &[3.0, 1.0, 1.0], &mut processed, &mut owner, &cfg);
        assert_eq!(owner, [0, UNASSIGNED, 0]);
    }

    #[test]
    fn single_vertex_graph() {
        let a = CsrMatrix::from_diagonal(&[1.0]);
        let agg = aggregate(&a, &AggregationConfig::default()).unwrap();
        assert_eq!(agg.n_coarse(), 1);
    }

    #[test]
    fn empty_matrix_is_an_error() {
        assert!(matches!(aggregate(&CsrMatrix::zeros(0, 0), &AggregationConfig::default()), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn grid_aggregation_invariants() {
        let a = generate_structured_grid(20, BoundaryCondition::Dirichlet, (1.0, 1.0)).unwrap().assemble_laplacian();
        for t in 2..=5 {
            let agg = aggregate(&a, &AggregationConfig::with_cap(Some(t), 3)).unwrap();
            assert!(agg.max_size() <= t);
            assert!(agg.is_connected_in(&a));
            assert!(agg.coarse_vertex_of_agg().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn passes_per_level_two_composes() {
        let a = generate_structured_grid(12, BoundaryCondition::Neumann, (1.0, 1.0)).unwrap().assemble_laplacian();
        let one = aggregate(&a, &AggregationConfig::default()).unwrap();
        let two = aggregate(&a, &AggregationConfig { passes_per_level: 2, ..Default::default() }).unwrap();
        assert!(two.n_coarse() < one.n_coarse());
        assert!(two.is_connected_in(&a));
    }

    #[test]
    fn compose_and_partition_equality() {
        let fine = Aggregation::new(vec![0, 0, 1, 1, 2], vec![0, 2, 4]).unwrap();
        let coarse = Aggregation::new(vec![0, 0, 1], vec![0, 2]).unwrap();
        let c = fine.compose(&coarse).unwrap();
        assert_eq!(c.vertex_to_agg(), &[0, 0, 0, 0, 1]);
        assert_eq!(c.coarse_vertex_of_agg(), &[0, 4]);
        let relabeled = Aggregation::from_map(&[7, 7, 7, 7, 3]).unwrap();
        assert!(relabeled.same_partition(&c));
        assert!(!relabeled.same_partition(&fine));
    }

    #[test]
    fn invalid_aggregations_rejected() {
        assert!(Aggregation::new(vec![0, 2], vec![0, 1, 1]).is_err());
        assert!(Aggregation::new(vec![1, 0], vec![0, 1]).is_err());
        assert!(Aggregation::new(vec![0, 0, 1], vec![0]).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let a = generate_structured_grid(6, BoundaryCondition::Neumann, (1.0, 1.0)).unwrap().assemble_laplacian();
        let agg = aggregate(&a, &AggregationConfig::default()).unwrap();
        let mut buf = Vec::new();
        agg.write(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("agg 36 {}\n", agg.n_coarse())));
        let back = Aggregation::read(buf.as_slice()).unwrap();
        assert!(back.same_partition(&agg));
        assert!(Aggregation::read("agg 2 1\n0\n".as_bytes()).is_err());
        assert!(Aggregation::read("agg 2 1\n0\n1\n".as_bytes()).is_err());
    }
}
