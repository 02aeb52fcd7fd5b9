//! Immutable simple undirected graphs on vertices `0..n`.
//!
//! Adjacency is stored in compressed form with every neighbor list sorted,
//! which gives deterministic iteration order, `O(log deg)` membership tests
//! and a canonical edge-list serialization.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    regular_degree: Option<usize>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges may come in either
    /// orientation; loops, duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(LabError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(LabError::InvalidGraph(format!("self-loop at {u}")));
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        for (u, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(LabError::InvalidGraph(format!(
                    "duplicate edge {{{}, {}}}",
                    u.min(w[0]),
                    u.max(w[0])
                )));
            }
        }
        Ok(Self::from_sorted_lists(lists))
    }

    /// Builds from per-vertex neighbor lists that are already symmetric,
    /// sorted and free of loops and duplicates.
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<usize>>) -> Self {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for list in &lists {
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        let regular_degree = match lists.first() {
            Some(first) if lists.iter().all(|l| l.len() == first.len()) => Some(first.len()),
            None => Some(0),
            _ => None,
        };
        Self {
            n,
            offsets,
            neighbors,
            regular_degree,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_lists(vec![Vec::new(); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    /// The common degree when the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        self.regular_degree
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(LabError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    /// Dense adjacency matrix, row major.
    pub fn adjacency_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (u, v) in self.edges() {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        a
    }

    /// Dense Laplacian `D - A`, row major.
    pub fn laplacian_dense(&self) -> Vec<Vec<f64>> {
        let mut l = self.adjacency_dense();
        for (u, row) in l.iter_mut().enumerate() {
            for x in row.iter_mut() {
                *x = -*x;
            }
            row[u] = self.degree(u) as f64;
        }
        l
    }

    /// Writes the canonical edge-list text: `n m` followed by one `u v` line
    /// per edge, `u < v`, in ascending lexicographic order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edge_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (line_no, header) = lines.next().ok_or(LabError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let (n, m) = parse_pair(&header, line_no)?;
        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            let (u, v) = parse_pair(&line?, line_no)?;
            if u == v {
                return Err(LabError::Parse { line: line_no, msg: format!("self-loop at {u}") });
            }
            if u >= n || v >= n {
                return Err(LabError::Parse {
                    line: line_no,
                    msg: format!("endpoint out of range for n = {n}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(LabError::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, &edges).map_err(|e| LabError::Parse { line: 0, msg: e.to_string() })
    }
}

fn parse_pair(line: &str, line_no: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(str::parse::<usize>);
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(LabError::Parse {
            line: line_no,
            msg: format!("expected two non-negative integers, got {line:?}"),
        }),
    }
}

/// A set of vertices, kept as a strictly increasing list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn all(n: usize) -> Self {
        Self { members: (0..n).collect() }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Size of the complement within a graph on `n` vertices.
    pub fn complement_len(&self, n: usize) -> usize {
        n - self.members.len()
    }

    pub fn complement(&self, n: usize) -> Self {
        Self {
            members: (0..n).filter(|v| !self.contains(*v)).collect(),
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.members.len() && j < other.members.len() {
            match self.members[i].cmp(&other.members[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    fn check_within(&self, g: &Graph) -> Result<()> {
        match self.members.last() {
            Some(&v) if v >= g.n() => Err(LabError::VertexOutOfRange { vertex: v, n: g.n() }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Number of edges with one endpoint in `s` and the other in `t`.
pub fn edges_between(g: &Graph, s: &VertexSet, t: &VertexSet) -> Result<usize> {
    s.check_within(g)?;
    t.check_within(g)?;
    if !s.is_disjoint(t) {
        return Err(LabError::Precondition("edges_between requires disjoint sets".into()));
    }
    // Iterate over the smaller side.
    let (small, large) = if s.len() <= t.len() { (s, t) } else { (t, s) };
    Ok(small
        .members()
        .iter()
        .map(|&u| g.neighbors(u).iter().filter(|&&w| large.contains(w)).count())
        .sum())
}

/// Number of edges with both endpoints in `s`.
pub fn edges_within(g: &Graph, s: &VertexSet) -> Result<usize> {
    s.check_within(g)?;
    let inner: usize = s
        .members()
        .iter()
        .map(|&u| g.neighbors(u).iter().filter(|&&w| s.contains(w)).count())
        .sum();
    Ok(inner / 2)
}

/// External neighborhood: vertices outside `s` adjacent to some member of `s`.
pub fn neighborhood(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    s.check_within(g)?;
    let mut mark = vec![false; g.n()];
    for &u in s.members() {
        for &w in g.neighbors(u) {
            mark[w] = true;
        }
    }
    for &u in s.members() {
        mark[u] = false;
    }
    Ok(VertexSet {
        members: (0..g.n()).filter(|&v| mark[v]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityProfile {
    pub connected: bool,
    pub bipartite: bool,
}

/// BFS 2-coloring of every component.
pub fn connectivity_profile(g: &Graph) -> ConnectivityProfile {
    let n = g.n();
    let mut color: Vec<Option<bool>> = vec![None; n];
    let mut components = 0;
    let mut bipartite = true;
    let mut queue = std::collections::VecDeque::new();
    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        components += 1;
        color[root] = Some(false);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let cu = color[u].unwrap_or(false);
            for &w in g.neighbors(u) {
                match color[w] {
                    None => {
                        color[w] = Some(!cu);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cu => bipartite = false,
                    Some(_) => {}
                }
            }
        }
    }
    ConnectivityProfile {
        connected: components <= 1,
        bipartite,
    }
}

pub fn is_connected(g: &Graph) -> bool {
    connectivity_profile(g).connected
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{fixture, Fixture};

    fn set(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn edges_between_examples() {
        let k4 = fixture(Fixture::Complete, 4).unwrap();
        assert_eq!(edges_between(&k4, &set(&[0]), &set(&[1, 2])).unwrap(), 2);
        assert_eq!(edges_between(&k4, &set(&[]), &VertexSet::all(4)).unwrap(), 0);
        let c6 = fixture(Fixture::Cycle, 6).unwrap();
        assert_eq!(edges_between(&c6, &set(&[0, 2, 4]), &set(&[1, 3, 5])).unwrap(), 6);
    }

    #[test]
    fn edges_between_rejects_overlap() {
        let k4 = fixture(Fixture::Complete, 4).unwrap();
        assert!(matches!(
            edges_between(&k4, &set(&[0, 1]), &set(&[1, 2])),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn neighborhood_examples() {
        let c5 = fixture(Fixture::Cycle, 5).unwrap();
        assert_eq!(neighborhood(&c5, &set(&[0])).unwrap(), set(&[1, 4]));
        let k5 = fixture(Fixture::Complete, 5).unwrap();
        assert_eq!(neighborhood(&k5, &set(&[0, 1])).unwrap(), set(&[2, 3, 4]));
        let p = fixture(Fixture::Petersen, 10).unwrap();
        assert_eq!(neighborhood(&p, &set(&[0])).unwrap().members(), p.neighbors(0));
        assert_eq!(p.neighbors(0).len(), 3);
    }

    #[test]
    fn connectivity_examples() {
        let c4 = fixture(Fixture::Cycle, 4).unwrap();
        assert_eq!(
            connectivity_profile(&c4),
            ConnectivityProfile { connected: true, bipartite: true }
        );
        let k5 = fixture(Fixture::Complete, 5).unwrap();
        assert_eq!(
            connectivity_profile(&k5),
            ConnectivityProfile { connected: true, bipartite: false }
        );
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            connectivity_profile(&two),
            ConnectivityProfile { connected: false, bipartite: true }
        );
    }

    #[test]
    fn from_edges_rejects_loops_and_duplicates() {
        assert!(Graph::from_edges(3, &[(1, 1)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn edge_list_roundtrip_and_rejections() {
        let p = fixture(Fixture::Petersen, 10).unwrap();
        let text = p.to_edge_list();
        assert!(text.starts_with("10 15\n0 1\n"));
        let back = Graph::parse_edge_list(text.as_bytes()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_edge_list(), text);

        assert!(Graph::parse_edge_list("3 2\n0 1\n0 1\n".as_bytes()).is_err());
        assert!(Graph::parse_edge_list("3 1\n2 2\n".as_bytes()).is_err());
        assert!(Graph::parse_edge_list("3 2\n0 1\n".as_bytes()).is_err());
        assert!(Graph::parse_edge_list("3 1\n0 x\n".as_bytes()).is_err());
    }

    #[test]
    fn regular_degree_accessor() {
        let p = fixture(Fixture::Petersen, 10).unwrap();
        assert_eq!(p.regular_degree(), Some(3));
        let path = fixture(Fixture::Path, 4).unwrap();
        assert_eq!(path.regular_degree(), None);
    }
}
