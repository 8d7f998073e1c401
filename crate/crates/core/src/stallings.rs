//! Stallings subgroup graphs: folding, cores, conjugacy of finitely
//! generated subgroups, and the visible-reducibility test.

use std::collections::VecDeque;
use std::fmt;

use crate::autom::OuterAutomorphism;
use crate::words::{FreeWord, Letter};

/// Directed edge `from --label--> to`, `label` a zero-based basis index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledEdge {
    pub from: usize,
    pub label: usize,
    pub to: usize,
}

/// A graph whose edges are labeled by basis letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    num_vertices: usize,
    edges: Vec<LabeledEdge>,
    base: Option<usize>,
}

/// Two edges that can be identified by one fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldPair {
    pub first: usize,
    pub second: usize,
}

impl LabeledGraph {
    pub fn new(num_vertices: usize, edges: Vec<LabeledEdge>, base: Option<usize>) -> Self {
        LabeledGraph { num_vertices, edges, base }
    }

    /// Wedge of loops at a base vertex, one loop per nontrivial generator.
    pub fn wedge(generators: &[FreeWord]) -> Self {
        let mut g = LabeledGraph { num_vertices: 1, edges: Vec::new(), base: Some(0) };
        for w in generators {
            let letters = w.letters();
            if letters.is_empty() {
                continue;
            }
            let mut cur = 0;
            for (i, &x) in letters.iter().enumerate() {
                let next = if i + 1 == letters.len() {
                    0
                } else {
                    g.num_vertices += 1;
                    g.num_vertices - 1
                };
                g.push_letter(cur, x, next);
                cur = next;
            }
        }
        g
    }

    fn push_letter(&mut self, from: usize, x: Letter, to: usize) {
        let e = if x.is_inverse() {
            LabeledEdge { from: to, label: x.index(), to: from }
        } else {
            LabeledEdge { from, label: x.index(), to }
        };
        self.edges.push(e);
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[LabeledEdge] {
        &self.edges
    }

    pub fn base(&self) -> Option<usize> {
        self.base
    }

    pub fn is_empty(&self) -> bool {
        self.num_vertices == 0
    }

    /// Valence of every vertex; loops count twice.
    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0; self.num_vertices];
        for e in &self.edges {
            val[e.from] += 1;
            val[e.to] += 1;
        }
        val
    }

    /// Sorted, deduplicated edge labels.
    pub fn labels(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.edges.iter().map(|e| e.label).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Rank of the fundamental group of a connected graph.
    pub fn betti(&self) -> usize {
        if self.num_vertices == 0 {
            return 0;
        }
        self.edges.len() + 1 - self.num_vertices
    }

    pub fn is_folded(&self) -> bool {
        self.fold_pairs().is_empty()
    }

    /// All pairs of distinct edges that share a label and an origin or a terminus.
    pub fn fold_pairs(&self) -> Vec<FoldPair> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                let (a, b) = (self.edges[i], self.edges[j]);
                if a.label == b.label && (a.from == b.from || a.to == b.to) {
                    out.push(FoldPair { first: i, second: j });
                }
            }
        }
        out
    }

    /// Folds one pair at a time, letting `choose` pick among the available
    /// pairs. Quadratic per step; meant for small graphs.
    pub fn fold_by<F: FnMut(&[FoldPair]) -> usize>(&self, mut choose: F) -> LabeledGraph {
        let mut g = self.clone();
        loop {
            let pairs = g.fold_pairs();
            if pairs.is_empty() {
                return g.compact();
            }
            let p = pairs[choose(&pairs) % pairs.len()];
            let (a, b) = (g.edges[p.first], g.edges[p.second]);
            let (keep, drop) = if a.from == b.from { (a.to, b.to) } else { (a.from, b.from) };
            if keep != drop {
                for e in g.edges.iter_mut() {
                    if e.from == drop {
                        e.from = keep;
                    }
                    if e.to == drop {
                        e.to = keep;
                    }
                }
                if g.base == Some(drop) {
                    g.base = Some(keep);
                }
            }
            g.edges.remove(p.second);
        }
    }

    /// Folds to the unique folded graph, with union-find merging.
    pub fn fold(&self) -> LabeledGraph {
        let n = self.num_vertices;
        let mut parent: Vec<usize> = (0..n).collect();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut pending: Vec<(usize, usize)> = Vec::new();

        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        fn add(
            parent: &mut [usize],
            adj: &mut [Vec<(usize, usize)>],
            pending: &mut Vec<(usize, usize)>,
            u: usize,
            dir: usize,
            w: usize,
        ) {
            let u = find(parent, u);
            let w = find(parent, w);
            if let Some(&(_, w2)) = adj[u].iter().find(|&&(d, _)| d == dir) {
                if find(parent, w2) != w {
                    pending.push((w2, w));
                }
            } else {
                adj[u].push((dir, w));
            }
        }

        for e in &self.edges {
            add(&mut parent, &mut adj, &mut pending, e.from, 2 * e.label, e.to);
            add(&mut parent, &mut adj, &mut pending, e.to, 2 * e.label + 1, e.from);
        }
        while let Some((x, y)) = pending.pop() {
            let x = find(&mut parent, x);
            let y = find(&mut parent, y);
            if x == y {
                continue;
            }
            let (big, small) = if adj[x].len() >= adj[y].len() { (x, y) } else { (y, x) };
            parent[small] = big;
            let moved = std::mem::take(&mut adj[small]);
            for (d, w) in moved {
                add(&mut parent, &mut adj, &mut pending, big, d, w);
            }
        }

        let mut id = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            let r = find(&mut parent, v);
            if id[r] == usize::MAX {
                id[r] = count;
                count += 1;
            }
        }
        let mut edges = Vec::new();
        for v in 0..n {
            if find(&mut parent, v) != v {
                continue;
            }
            for &(d, w) in &adj[v] {
                if d % 2 == 0 {
                    let w = find(&mut parent, w);
                    edges.push(LabeledEdge { from: id[v], label: d / 2, to: id[w] });
                }
            }
        }
        edges.sort_unstable();
        let base = self.base.map(|b| id[find(&mut parent, b)]);
        LabeledGraph { num_vertices: count, edges, base }
    }

    /// Renumbers vertices to drop unused ids (keeping the base).
    fn compact(&self) -> LabeledGraph {
        let mut used = vec![false; self.num_vertices];
        for e in &self.edges {
            used[e.from] = true;
            used[e.to] = true;
        }
        if let Some(b) = self.base {
            used[b] = true;
        }
        let mut id = vec![usize::MAX; self.num_vertices];
        let mut count = 0;
        for v in 0..self.num_vertices {
            if used[v] {
                id[v] = count;
                count += 1;
            }
        }
        let mut edges: Vec<LabeledEdge> = self
            .edges
            .iter()
            .map(|e| LabeledEdge { from: id[e.from], label: e.label, to: id[e.to] })
            .collect();
        edges.sort_unstable();
        LabeledGraph { num_vertices: count, edges, base: self.base.map(|b| id[b]) }
    }

    fn trim(&self, keep_base: bool) -> LabeledGraph {
        let mut alive = vec![true; self.num_vertices];
        let mut edge_alive = vec![true; self.edges.len()];
        let mut val = self.valences();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.num_vertices];
        for (i, e) in self.edges.iter().enumerate() {
            incident[e.from].push(i);
            if e.to != e.from {
                incident[e.to].push(i);
            }
        }
        let protected = if keep_base { self.base } else { None };
        let mut stack: Vec<usize> = (0..self.num_vertices).filter(|&v| val[v] <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] || val[v] > 1 || Some(v) == protected {
                continue;
            }
            alive[v] = false;
            for &i in &incident[v] {
                if !edge_alive[i] {
                    continue;
                }
                edge_alive[i] = false;
                let e = self.edges[i];
                let other = if e.from == v { e.to } else { e.from };
                val[other] -= 1;
                val[v] -= 1;
                if val[other] <= 1 {
                    stack.push(other);
                }
            }
        }
        let mut id = vec![usize::MAX; self.num_vertices];
        let mut count = 0;
        for v in 0..self.num_vertices {
            if alive[v] {
                id[v] = count;
                count += 1;
            }
        }
        let mut edges: Vec<LabeledEdge> = self
            .edges
            .iter()
            .zip(&edge_alive)
            .filter(|(_, &a)| a)
            .map(|(e, _)| LabeledEdge { from: id[e.from], label: e.label, to: id[e.to] })
            .collect();
        edges.sort_unstable();
        let base = protected.map(|b| id[b]);
        LabeledGraph { num_vertices: count, edges, base }
    }

    /// Unbased core: valence-one (and isolated) vertices removed until none remain.
    pub fn core(&self) -> LabeledGraph {
        self.trim(false)
    }

    /// Core relative to the base vertex, which is never removed.
    pub fn based_core(&self) -> LabeledGraph {
        self.trim(true)
    }

    /// Direction table of a folded graph: `table[v][2*label + backward]`.
    fn direction_table(&self, rank: usize) -> Vec<Vec<Option<usize>>> {
        let mut t = vec![vec![None; 2 * rank]; self.num_vertices];
        for e in &self.edges {
            t[e.from][2 * e.label] = Some(e.to);
            t[e.to][2 * e.label + 1] = Some(e.from);
        }
        t
    }

    /// Whether `w` reads a closed path at the base of a folded graph.
    pub fn accepts(&self, w: &FreeWord) -> bool {
        let Some(base) = self.base else { return false };
        let rank = self.labels().last().map_or(0, |l| l + 1).max(w.min_rank());
        let t = self.direction_table(rank);
        let mut v = base;
        for &x in w.letters() {
            match t[v][x.order_key() as usize] {
                Some(next) => v = next,
                None => return false,
            }
        }
        v == base
    }

    /// Breadth-first code from `start` exploring directions in letter order.
    fn code_from(table: &[Vec<Option<usize>>], start: usize) -> Vec<usize> {
        let n = table.len();
        let mut num = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::new();
        num[start] = 0;
        order.push(start);
        queue.push_back(start);
        let mut code = Vec::new();
        while let Some(v) = queue.pop_front() {
            for t in &table[v] {
                match t {
                    None => code.push(0),
                    Some(w) => {
                        if num[*w] == usize::MAX {
                            num[*w] = order.len();
                            order.push(*w);
                            queue.push_back(*w);
                        }
                        code.push(num[*w] + 1);
                    }
                }
            }
        }
        // Disconnected remainders make the code incomplete; mark them.
        if order.len() != n {
            code.push(usize::MAX);
        }
        code
    }

    /// Label-preserving isomorphism invariant of a folded, connected,
    /// unbased graph: the least breadth-first code over all start vertices.
    pub fn canonical_code(&self, rank: usize) -> Vec<usize> {
        let t = self.direction_table(rank);
        (0..self.num_vertices).map(|s| Self::code_from(&t, s)).min().unwrap_or_default()
    }

    /// Single vertex carrying one loop per label; returns the labels.
    pub fn rose_labels(&self) -> Option<Vec<usize>> {
        if self.num_vertices != 1 {
            return None;
        }
        let labels = self.labels();
        (labels.len() == self.edges.len()).then_some(labels)
    }
}

impl fmt::Display for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices {}", self.num_vertices)?;
        if let Some(b) = self.base {
            writeln!(f, "base {b}")?;
        }
        for e in &self.edges {
            let l = Letter::gen(e.label);
            writeln!(f, "{} {} {}", e.from, l, e.to)?;
        }
        Ok(())
    }
}

/// Based folded graph whose based loops read exactly `⟨generators⟩`.
pub fn subgroup_graph(generators: &[FreeWord]) -> LabeledGraph {
    LabeledGraph::wedge(generators).fold().based_core()
}

/// Whether `⟨u⟩` and `⟨v⟩` are conjugate, by comparing unbased cores.
pub fn conjugate_subgroups(u: &[FreeWord], v: &[FreeWord]) -> bool {
    let cu = subgroup_graph(u).core();
    let cv = subgroup_graph(v).core();
    if cu.num_vertices != cv.num_vertices || cu.edges.len() != cv.edges.len() {
        return false;
    }
    if cu.labels() != cv.labels() {
        return false;
    }
    let rank = cu.labels().last().map_or(0, |l| l + 1);
    cu.canonical_code(rank) == cv.canonical_code(rank)
}

fn subset_letters(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// For a basis subset `S`, the subset `T` with `φ(⟨S⟩)` conjugate to `⟨T⟩`, if any.
fn image_factor(phi: &OuterAutomorphism, mask: u64) -> Option<u64> {
    let size = mask.count_ones() as usize;
    let images: Vec<&FreeWord> = subset_letters(mask).map(|i| phi.image(i)).collect();
    // The cyclic core of every image must already live in T.
    let mut seen = 0u64;
    for w in &images {
        let (c, _) = w.cyclic_reduce();
        for x in c.letters() {
            seen |= 1 << x.index();
        }
        if seen.count_ones() as usize > size {
            return None;
        }
    }
    let gens: Vec<FreeWord> = images.into_iter().cloned().collect();
    let core = LabeledGraph::wedge(&gens).fold().core();
    let labels = core.rose_labels()?;
    if labels.len() != size {
        return None;
    }
    Some(labels.iter().fold(0u64, |m, &l| m | 1 << l))
}

/// Disjoint basis subsets `B_1, …, B_k` whose generated free factors `φ`
/// permutes cyclically up to conjugacy (`B_1` proper when `k = 1`).
/// Among all such families, returns one of least total size.
pub fn visibly_reducible(phi: &OuterAutomorphism) -> Option<Vec<Vec<usize>>> {
    let n = phi.rank();
    assert!(n < 64, "visible reducibility limited to rank < 64");
    let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut image = vec![None; (full + 1) as usize];
    for mask in 1..full {
        image[mask as usize] = image_factor(phi, mask);
    }
    let mut best: Option<(usize, Vec<u64>)> = None;
    for start in 1..full {
        let mut family = vec![start];
        let mut used = start;
        let mut cur = start;
        let closed = loop {
            let Some(next) = image[cur as usize] else { break false };
            if next == start {
                break true;
            }
            // Each family is visited from its least member only.
            if next < start || used & next != 0 {
                break false;
            }
            used |= next;
            family.push(next);
            cur = next;
        };
        if !closed {
            continue;
        }
        let total = used.count_ones() as usize;
        if best.as_ref().is_none_or(|(t, f)| (total, &family) < (*t, f)) {
            best = Some((total, family));
        }
    }
    best.map(|(_, f)| f.into_iter().map(|m| subset_letters(m).collect()).collect())
}
