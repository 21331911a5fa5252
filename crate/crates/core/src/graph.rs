//! Simple undirected graphs with 0-based contiguous vertex ids.
//!
//! Edges are stored once as ordered pairs `(u, v)` with `u < v`, sorted
//! lexicographically; this canonical order is what conductance assignment
//! consumes, so a graph's identity fixes every downstream random draw.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

/// Connected-component labels, ids assigned in order of discovery from
/// vertex 0 upward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub component_of: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

impl Graph {
    /// Builds a graph, normalizing each edge to `(min, max)` order and
    /// rejecting self-loops, duplicates, and out-of-range endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument(alloc::string::String::from(
                "vertex count must be positive",
            )));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= n {
                return Err(Error::IndexOutOfRange { index: a, len: n });
            }
            if b >= n {
                return Err(Error::IndexOutOfRange { index: b, len: n });
            }
            if a == b {
                return Err(Error::SelfLoop { vertex: a });
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge { u: w[0].0, v: w[0].1 });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, edges: normalized, adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical order: `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.adj[v].len())
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.check_vertex(v)?;
        Ok(&self.adj[v])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: v, len: self.n })
        }
    }

    pub fn components(&self) -> ComponentLabeling {
        let mut component_of = vec![usize::MAX; self.n];
        let mut sizes = Vec::new();
        let mut queue = Vec::new();
        for root in 0..self.n {
            if component_of[root] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0usize;
            component_of[root] = id;
            queue.push(root);
            while let Some(v) = queue.pop() {
                size += 1;
                for &w in &self.adj[v] {
                    if component_of[w] == usize::MAX {
                        component_of[w] = id;
                        queue.push(w);
                    }
                }
            }
            sizes.push(size);
        }
        ComponentLabeling { component_of, sizes }
    }

    pub fn is_connected(&self) -> bool {
        self.components().count() == 1
    }

    /// True when every component is 2-colorable.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        let mut queue = alloc::collections::VecDeque::new();
        for root in 0..self.n {
            if color[root] != u8::MAX {
                continue;
            }
            color[root] = 0;
            queue.push_back(root);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        queue.push_back(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Minimum BFS distance from any vertex of `from` to any vertex of `to`.
    /// `None` when no path exists. Overlapping sets have distance 0.
    pub fn min_distance_between(&self, from: &[usize], to: &[usize]) -> Result<Option<usize>> {
        for &v in from.iter().chain(to) {
            self.check_vertex(v)?;
        }
        let mut target = vec![false; self.n];
        for &v in to {
            target[v] = true;
        }
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = alloc::collections::VecDeque::new();
        for &v in from {
            if dist[v] == usize::MAX {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            if target[v] {
                return Ok(Some(dist[v]));
            }
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        Ok(None)
    }

    /// Every simple cycle of length 3..=`max_len`, each reported exactly once
    /// in canonical form: the cycle starts at its smallest vertex and runs in
    /// the direction whose second vertex is smaller than its last. The list
    /// is sorted by length, then lexicographically.
    ///
    /// Enumeration cost grows with the cycle count itself, which explodes
    /// combinatorially on dense graphs once `max_len` passes ~10.
    pub fn cycles_up_to(&self, max_len: usize) -> Result<Vec<Vec<usize>>> {
        if max_len < 3 {
            return Err(Error::Argument(format!(
                "cycle length bound must be at least 3, got {max_len}"
            )));
        }
        let mut out = Vec::new();
        let mut path = Vec::with_capacity(max_len);
        let mut on_path = vec![false; self.n];
        for root in 0..self.n {
            path.push(root);
            on_path[root] = true;
            self.enumerate_from(root, root, max_len, &mut path, &mut on_path, &mut out);
            on_path[root] = false;
            path.pop();
        }
        out.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn enumerate_from(
        &self,
        root: usize,
        v: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        for &w in &self.adj[v] {
            if w == root {
                // Keeping only one direction (second < last) halves the DFS
                // hits down to one per cycle.
                if path.len() >= 3 && path[1] < path[path.len() - 1] {
                    out.push(path.clone());
                }
            } else if w > root && !on_path[w] && path.len() < max_len {
                path.push(w);
                on_path[w] = true;
                self.enumerate_from(root, w, max_len, path, on_path, out);
                on_path[w] = false;
                path.pop();
            }
        }
    }

    /// Finds one simple cycle of exactly `len` vertices, if any exists.
    /// Odd lengths short-circuit on bipartite graphs.
    pub fn cycle_of_length(&self, len: usize) -> Result<Option<Vec<usize>>> {
        if len < 3 {
            return Err(Error::Argument(format!(
                "cycle length must be at least 3, got {len}"
            )));
        }
        if len % 2 == 1 && self.is_bipartite() {
            return Ok(None);
        }
        let mut path = Vec::with_capacity(len);
        let mut on_path = vec![false; self.n];
        for root in 0..self.n {
            path.push(root);
            on_path[root] = true;
            let found = self.find_exact(root, root, len, &mut path, &mut on_path);
            on_path[root] = false;
            path.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    fn find_exact(
        &self,
        root: usize,
        v: usize,
        len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
    ) -> Option<Vec<usize>> {
        for &w in &self.adj[v] {
            if w == root && path.len() == len {
                return Some(path.clone());
            }
            if w > root && !on_path[w] && path.len() < len {
                path.push(w);
                on_path[w] = true;
                let found = self.find_exact(root, w, len, path, on_path);
                on_path[w] = false;
                path.pop();
                if found.is_some() {
                    return found;
                }
            }
        }
        None
    }

    /// The subgraph on the vertices not in `excluded`, plus the map from new
    /// ids back to original ids (ascending, so relative order is preserved).
    pub fn without_vertices(&self, excluded: &[usize]) -> Result<(Graph, Vec<usize>)> {
        let mut drop = vec![false; self.n];
        for &v in excluded {
            self.check_vertex(v)?;
            drop[v] = true;
        }
        let mut to_parent = Vec::new();
        let mut from_parent = vec![usize::MAX; self.n];
        for v in 0..self.n {
            if !drop[v] {
                from_parent[v] = to_parent.len();
                to_parent.push(v);
            }
        }
        if to_parent.is_empty() {
            return Err(Error::Argument(format!(
                "excluded set covers all {} vertices",
                self.n
            )));
        }
        let edges = self
            .edges
            .iter()
            .filter(|(u, v)| !drop[*u] && !drop[*v])
            .map(|&(u, v)| (from_parent[u], from_parent[v]))
            .collect();
        let graph = Graph::new(to_parent.len(), edges)?;
        Ok((graph, to_parent))
    }
}
