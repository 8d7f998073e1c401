//! The CMT generating set of `Out(F_n)`: outer automorphisms induced by
//! changing the maximal tree of a graph of rank `n`, closed under the graph
//! automorphisms of the rose.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autom::{Endo, OuterAutomorphism};
use crate::error::{Error, Result};
use crate::words::{FreeWord, Letter};

/// An undirected multigraph; each edge is stored with an orientation
/// `(tail, head)` used when reading paths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopGraph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

/// One traversal of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

impl Step {
    pub fn rev(self) -> Step {
        Step { edge: self.edge, forward: !self.forward }
    }
}

impl TopGraph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.iter().any(|&(u, v)| u >= num_vertices || v >= num_vertices) {
            return Err(Error::Precondition("edge endpoint out of range".into()));
        }
        Ok(TopGraph { num_vertices, edges })
    }

    pub fn rose(rank: usize) -> Self {
        TopGraph { num_vertices: 1, edges: vec![(0, 0); rank] }
    }

    pub fn theta() -> Self {
        TopGraph { num_vertices: 2, edges: vec![(0, 1); 3] }
    }

    pub fn dumbbell() -> Self {
        TopGraph { num_vertices: 2, edges: vec![(0, 0), (0, 1), (1, 1)] }
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    pub fn valences(&self) -> Vec<usize> {
        let mut val = vec![0; self.num_vertices];
        for &(u, v) in &self.edges {
            val[u] += 1;
            val[v] += 1;
        }
        val
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return false;
        }
        let mut uf = UnionFind::new(self.num_vertices);
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        (0..self.num_vertices).all(|v| uf.find(v) == uf.find(0))
    }

    pub fn tail(&self, s: Step) -> usize {
        let (u, v) = self.edges[s.edge];
        if s.forward {
            u
        } else {
            v
        }
    }

    pub fn head(&self, s: Step) -> usize {
        let (u, v) = self.edges[s.edge];
        if s.forward {
            v
        } else {
            u
        }
    }

    /// Steps leaving each vertex; a loop contributes both directions.
    pub fn out_steps(&self) -> Vec<Vec<Step>> {
        let mut out = vec![Vec::new(); self.num_vertices];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            out[u].push(Step { edge: i, forward: true });
            out[v].push(Step { edge: i, forward: false });
        }
        out
    }

    /// Minimal sorted edge list over all vertex relabelings.
    pub fn canonical_code(&self) -> Vec<(usize, usize)> {
        let n = self.num_vertices;
        let mut best: Option<Vec<(usize, usize)>> = None;
        for perm in permutations(n) {
            let mut code: Vec<(usize, usize)> = self
                .edges
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (perm[u], perm[v]);
                    (a.min(b), a.max(b))
                })
                .collect();
            code.sort_unstable();
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
        best.unwrap_or_default()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for i in 0..n {
                if !p.contains(&i) {
                    let mut q = p.clone();
                    q.push(i);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a] = b;
        true
    }
}

/// All connected multigraphs of rank `n` with every vertex of valence at
/// least three, one per isomorphism class. For `n = 1` this is the
/// one-loop rose.
pub fn enumerate_rank_graphs(n: usize) -> Vec<TopGraph> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![TopGraph::rose(1)];
    }
    let mut seen: BTreeSet<(usize, Vec<(usize, usize)>)> = BTreeSet::new();
    for v in 1..=2 * n - 2 {
        let e = v + n - 1;
        if 2 * e < 3 * v {
            continue;
        }
        let pairs: Vec<(usize, usize)> =
            (0..v).flat_map(|i| (i..v).map(move |j| (i, j))).collect();
        let mut mult = vec![0usize; pairs.len()];
        let mut deg = vec![0usize; v];
        let max_deg = 2 * e - 3 * (v - 1);
        let mut found = Vec::new();
        fill(&pairs, 0, e, &mut mult, &mut deg, max_deg, &mut found);
        for edges in found {
            let g = TopGraph { num_vertices: v, edges };
            if g.is_connected() {
                seen.insert((v, g.canonical_code()));
            }
        }
    }
    seen.into_iter().map(|(v, edges)| TopGraph { num_vertices: v, edges }).collect()
}

fn fill(
    pairs: &[(usize, usize)],
    idx: usize,
    remaining: usize,
    mult: &mut [usize],
    deg: &mut [usize],
    max_deg: usize,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if idx == pairs.len() {
        if remaining == 0 && deg.iter().all(|&d| d >= 3) {
            let mut edges = Vec::new();
            for (p, &m) in pairs.iter().zip(mult.iter()) {
                edges.extend(std::iter::repeat_n(*p, m));
            }
            out.push(edges);
        }
        return;
    }
    let (i, j) = pairs[idx];
    // Vertex i is complete once its last pair (i, v-1) is decided.
    let closes_row = j == deg.len() - 1;
    for m in 0..=remaining {
        let add_i = if i == j { 2 * m } else { m };
        if deg[i] + add_i > max_deg || (i != j && deg[j] + m > max_deg) {
            break;
        }
        if closes_row && deg[i] + add_i < 3 {
            continue;
        }
        mult[idx] = m;
        deg[i] += add_i;
        if i != j {
            deg[j] += m;
        }
        fill(pairs, idx + 1, remaining - m, mult, deg, max_deg, out);
        deg[i] -= add_i;
        if i != j {
            deg[j] -= m;
        }
    }
    mult[idx] = 0;
}

/// A maximal tree, as a sorted list of edge indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanningTree {
    edges: Vec<usize>,
}

impl SpanningTree {
    pub fn new(graph: &TopGraph, mut edges: Vec<usize>) -> Result<Self> {
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != graph.num_vertices() {
            return Err(Error::Precondition("tree has the wrong number of edges".into()));
        }
        let mut uf = UnionFind::new(graph.num_vertices());
        for &e in &edges {
            let (u, v) = *graph
                .edges()
                .get(e)
                .ok_or_else(|| Error::Precondition(format!("no edge {e}")))?;
            if !uf.union(u, v) {
                return Err(Error::Precondition("edge set contains a cycle".into()));
            }
        }
        Ok(SpanningTree { edges })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Edges outside the tree, in increasing index order.
    pub fn complement(&self, graph: &TopGraph) -> Vec<usize> {
        (0..graph.num_edges()).filter(|&e| !self.contains(e)).collect()
    }

    /// Tree path from `root` to every vertex.
    pub fn paths_from(&self, graph: &TopGraph, root: usize) -> Vec<Vec<Step>> {
        let out = graph.out_steps();
        let mut paths: Vec<Option<Vec<Step>>> = vec![None; graph.num_vertices()];
        paths[root] = Some(Vec::new());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &s in &out[v] {
                if !self.contains(s.edge) {
                    continue;
                }
                let w = graph.head(s);
                if paths[w].is_none() {
                    let mut p = paths[v].clone().unwrap();
                    p.push(s);
                    paths[w] = Some(p);
                    queue.push_back(w);
                }
            }
        }
        paths.into_iter().map(|p| p.expect("spanning")).collect()
    }
}

/// All maximal trees of a connected graph. Loops never belong to a tree.
pub fn maximal_trees(graph: &TopGraph) -> Vec<SpanningTree> {
    let k = graph.num_vertices() - 1;
    let candidates: Vec<usize> =
        (0..graph.num_edges()).filter(|&e| graph.edges()[e].0 != graph.edges()[e].1).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(
        graph: &TopGraph,
        cand: &[usize],
        start: usize,
        k: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<SpanningTree>,
    ) {
        if chosen.len() == k {
            if let Ok(t) = SpanningTree::new(graph, chosen.clone()) {
                out.push(t);
            }
            return;
        }
        for i in start..cand.len() {
            if cand.len() - i < k - chosen.len() {
                break;
            }
            chosen.push(cand[i]);
            rec(graph, cand, i + 1, k, chosen, out);
            chosen.pop();
        }
    }
    rec(graph, &candidates, 0, k, &mut chosen, &mut out);
    out
}

/// Assignment of basis letters to the edges outside a maximal tree: the
/// `k`-th non-tree edge (by index), traversed forward, reads `letters[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub letters: Vec<Letter>,
}

impl Labeling {
    pub fn standard(rank: usize) -> Self {
        Labeling { letters: (0..rank).map(Letter::gen).collect() }
    }

    fn check(&self, rank: usize) -> Result<()> {
        let mut seen = vec![false; rank];
        if self.letters.len() != rank {
            return Err(Error::Labeling(format!("{} letters for rank {rank}", self.letters.len())));
        }
        for x in &self.letters {
            if x.index() >= rank || seen[x.index()] {
                return Err(Error::Labeling("labeling is not a bijection".into()));
            }
            seen[x.index()] = true;
        }
        Ok(())
    }

    /// Letter read by each step, `None` on tree edges.
    pub(crate) fn step_letters(&self, graph: &TopGraph, tree: &SpanningTree) -> Vec<Option<Letter>> {
        let mut map = vec![None; graph.num_edges()];
        for (k, e) in tree.complement(graph).into_iter().enumerate() {
            map[e] = Some(self.letters[k]);
        }
        map
    }
}

/// Collapses `tree`, reading a path as a word in the labeling's letters.
pub(crate) fn collapse_path(letters: &[Option<Letter>], path: &[Step]) -> FreeWord {
    FreeWord::reduce(path.iter().filter_map(|s| {
        letters[s.edge].map(|x| if s.forward { x } else { x.inv() })
    }))
}

/// Loop at vertex 0 through each non-tree edge, indexed by the letter it
/// represents (reversed when the labeling inverts the edge).
pub(crate) fn basis_loops(
    graph: &TopGraph,
    tree: &SpanningTree,
    labeling: &Labeling,
) -> Vec<Vec<Step>> {
    let paths = tree.paths_from(graph, 0);
    let rank = graph.rank();
    let mut loops = vec![Vec::new(); rank];
    for (k, e) in tree.complement(graph).into_iter().enumerate() {
        let (u, v) = graph.edges()[e];
        let mut p = paths[u].clone();
        p.push(Step { edge: e, forward: true });
        p.extend(paths[v].iter().rev().map(|s| s.rev()));
        let x = labeling.letters[k];
        if x.is_inverse() {
            p = p.into_iter().rev().map(Step::rev).collect();
        }
        loops[x.index()] = p;
    }
    loops
}

/// The outer automorphism `ρ_{T′} ρ_T⁻¹` induced by changing the maximal tree
/// from `t` (labeled by `lt`) to `t2` (labeled by `lt2`).
pub fn cmt_automorphism(
    graph: &TopGraph,
    t: &SpanningTree,
    lt: &Labeling,
    t2: &SpanningTree,
    lt2: &Labeling,
) -> Result<OuterAutomorphism> {
    let rank = graph.rank();
    lt.check(rank)?;
    lt2.check(rank)?;
    let loops = basis_loops(graph, t, lt);
    let letters2 = lt2.step_letters(graph, t2);
    let images = loops.iter().map(|p| collapse_path(&letters2, p)).collect();
    OuterAutomorphism::new(Endo::from_images_unchecked(images))
}

/// A CMT automorphism together with its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmtGenerator {
    pub forward: OuterAutomorphism,
    pub inverse: OuterAutomorphism,
}

impl CmtGenerator {
    fn from_forward(forward: OuterAutomorphism) -> Self {
        let inverse = forward.inverse();
        CmtGenerator { forward, inverse }
    }
}

/// The CMT generators of rank `n`, deduplicated by outer class and sorted
/// by canonical key. Includes the identity and every rose symmetry; every
/// generator's inverse class is present.
pub fn cmt_generators(n: usize) -> Vec<CmtGenerator> {
    let symmetries = Endo::rose_symmetries(n);
    let mut base: HashMap<Endo, OuterAutomorphism> = HashMap::new();
    for graph in enumerate_rank_graphs(n) {
        let trees = maximal_trees(&graph);
        let lab = Labeling::standard(n);
        for t in &trees {
            for t2 in &trees {
                let phi = cmt_automorphism(&graph, t, &lab, t2, &lab)
                    .expect("tree change induces an automorphism");
                let key = phi.canonical_key();
                base.entry(key).or_insert(phi);
            }
        }
    }
    let mut base: Vec<(Endo, OuterAutomorphism)> = base.into_iter().collect();
    base.sort_by(|a, b| a.0.cmp(&b.0));

    // Close under σ·ρ·τ; orbits partition the result, so each orbit is
    // generated once.
    let mut classes: HashSet<Endo> = HashSet::new();
    let mut out: Vec<(Endo, OuterAutomorphism)> = Vec::new();
    for (key, rho) in base {
        if classes.contains(&key) {
            continue;
        }
        for sigma in &symmetries {
            let left = sigma.then_after(rho.repr());
            for tau in &symmetries {
                let phi = OuterAutomorphism::new_unchecked(left.then_after(tau));
                let k = phi.canonical_key();
                if classes.insert(k.clone()) {
                    out.push((k.clone(), OuterAutomorphism::new_unchecked(k)));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, phi)| CmtGenerator::from_forward(phi)).collect()
}

const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format_version: u32,
    rank: usize,
    generators: Vec<CmtGenerator>,
}

pub fn cache_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("cmt-gens-v{CACHE_FORMAT_VERSION}-rank{n}.json"))
}

/// Loads the rank-`n` generators from `dir`, building and storing them when
/// the file is absent, unreadable, or from another format version.
pub fn load_or_build(n: usize, dir: Option<&Path>) -> Result<Vec<CmtGenerator>> {
    let Some(dir) = dir else { return Ok(cmt_generators(n)) };
    let path = cache_path(dir, n);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(file) = serde_json::from_str::<CacheFile>(&text) {
            if file.format_version == CACHE_FORMAT_VERSION && file.rank == n {
                return Ok(file.generators);
            }
        }
    }
    let generators = cmt_generators(n);
    fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let file = CacheFile { format_version: CACHE_FORMAT_VERSION, rank: n, generators };
    let text = serde_json::to_string(&file).map_err(|e| Error::Cache(e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::Cache(e.to_string()))?;
    Ok(file.generators)
}
