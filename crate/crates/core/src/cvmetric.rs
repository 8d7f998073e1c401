//! Marked metric graphs of volume one, candidate loops, stretching factors
//! and displacements, thinness, and adjacent uniform roses.
//!
//! A marking is recorded as one closed edge path per basis letter, all based
//! at a common vertex. Loops are read back as words by collapsing a maximal
//! tree and inverting the induced map on fundamental groups.

use std::fmt;

use num_traits::{One, Zero};

use crate::autom::{Endo, OuterAutomorphism};
use crate::cmt::{basis_loops, collapse_path, maximal_trees, Labeling, SpanningTree, Step, TopGraph};
use crate::error::{Error, Result};
use crate::words::{FreeWord, Letter};
use crate::Rational;

/// Shape of a candidate loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    SimpleLoop,
    FigureEight,
    Barbell,
}

/// A closed immersed edge path of one of the candidate shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateLoop {
    pub path: Vec<Step>,
    pub shape: Shape,
}

/// A point of volume-one Outer space: a metric graph with a marking.
#[derive(Clone, Debug)]
pub struct MarkedMetricGraph {
    graph: TopGraph,
    lengths: Vec<Rational>,
    base: usize,
    marking: Vec<Vec<Step>>,
    // Reading loops back as words: non-tree edge letters and the inverse
    // of the marking read through the same tree.
    tree_letters: Vec<Option<Letter>>,
    unmark: Endo,
}

/// Cancels adjacent `e ē` pairs.
fn tighten(path: impl IntoIterator<Item = Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::new();
    for s in path {
        if out.last() == Some(&s.rev()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

/// Tightens a closed path to the immersed loop in its free homotopy class.
fn tighten_cyclic(path: impl IntoIterator<Item = Step>) -> Vec<Step> {
    let p = tighten(path);
    let n = p.len();
    let mut k = 0;
    while 2 * k + 1 < n && p[k] == p[n - 1 - k].rev() {
        k += 1;
    }
    p[k..n - k].to_vec()
}

fn reverse_path(p: &[Step]) -> Vec<Step> {
    p.iter().rev().map(|s| s.rev()).collect()
}

impl MarkedMetricGraph {
    /// Validates closedness of the marking loops, that they generate the
    /// fundamental group, positivity of lengths and unit volume.
    pub fn new(
        graph: TopGraph,
        lengths: Vec<Rational>,
        base: usize,
        marking: Vec<Vec<Step>>,
    ) -> Result<Self> {
        if lengths.len() != graph.num_edges() {
            return Err(Error::Marking("one length per edge required".into()));
        }
        if lengths.iter().any(|l| *l <= Rational::zero()) {
            return Err(Error::Marking("edge lengths must be positive".into()));
        }
        let volume: Rational = lengths.iter().sum();
        if !volume.is_one() {
            return Err(Error::Marking(format!("volume is {volume}, expected 1")));
        }
        if !graph.is_connected() || base >= graph.num_vertices() {
            return Err(Error::Marking("graph must be connected with a valid base".into()));
        }
        let rank = graph.rank();
        if marking.len() != rank {
            return Err(Error::Marking(format!("{} marking loops for rank {rank}", marking.len())));
        }
        for p in &marking {
            let mut v = base;
            for s in p {
                if s.edge >= graph.num_edges() || graph.tail(*s) != v {
                    return Err(Error::Marking("marking path is not a path".into()));
                }
                v = graph.head(*s);
            }
            if v != base {
                return Err(Error::Marking("marking path is not closed at the base".into()));
            }
        }
        let tree = maximal_trees(&graph)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Marking("graph has no maximal tree".into()))?;
        let tree_letters = Labeling::standard(rank).step_letters(&graph, &tree);
        let mark = Endo::new(marking.iter().map(|p| collapse_path(&tree_letters, p)).collect())?;
        let unmark = mark
            .inverse()
            .ok_or_else(|| Error::Marking("marking loops do not generate the fundamental group".into()))?;
        Ok(MarkedMetricGraph { graph, lengths, base, marking, tree_letters, unmark })
    }

    /// Marking read from a maximal tree: letter `k` runs through the `k`-th
    /// non-tree edge, based at vertex 0.
    pub fn with_tree_marking(graph: TopGraph, lengths: Vec<Rational>, tree: &SpanningTree) -> Result<Self> {
        let rank = graph.rank();
        let marking = basis_loops(&graph, tree, &Labeling::standard(rank));
        MarkedMetricGraph::new(graph, lengths, 0, marking)
    }

    pub fn rose(lengths: Vec<Rational>) -> Result<Self> {
        let rank = lengths.len();
        let marking = (0..rank).map(|i| vec![Step { edge: i, forward: true }]).collect();
        MarkedMetricGraph::new(TopGraph::rose(rank), lengths, 0, marking)
    }

    /// The rose with all petals of length `1/n`, marked by the basis.
    pub fn uniform_rose(rank: usize) -> Self {
        let l = Rational::new(1.into(), (rank as i64).into());
        MarkedMetricGraph::rose(vec![l; rank]).expect("uniform rose is valid")
    }

    /// The same metric graph with marking precomposed by `phi`: letter `x`
    /// now runs along the loop that used to represent `phi(x)`.
    pub fn remarked(&self, phi: &Endo) -> Result<Self> {
        if phi.rank() != self.rank() {
            return Err(Error::RankMismatch(phi.rank(), self.rank()));
        }
        let marking = phi.images().iter().map(|w| self.marking_path(w)).collect();
        MarkedMetricGraph::new(self.graph.clone(), self.lengths.clone(), self.base, marking)
    }

    pub fn graph(&self) -> &TopGraph {
        &self.graph
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn marking(&self) -> &[Vec<Step>] {
        &self.marking
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn rank(&self) -> usize {
        self.graph.rank()
    }

    pub fn volume(&self) -> Rational {
        self.lengths.iter().sum()
    }

    /// Based, tightened edge path realizing `w` through the marking.
    pub fn marking_path(&self, w: &FreeWord) -> Vec<Step> {
        tighten(w.letters().iter().flat_map(|x| {
            let p = &self.marking[x.index()];
            if x.is_inverse() {
                reverse_path(p)
            } else {
                p.clone()
            }
        }))
    }

    fn path_length(&self, p: &[Step]) -> Rational {
        p.iter().map(|s| &self.lengths[s.edge]).sum()
    }

    /// Length of the immersed loop freely homotopic to the image of `w`.
    pub fn loop_length(&self, w: &FreeWord) -> Rational {
        let p = tighten_cyclic(self.marking_path(w));
        self.path_length(&p)
    }

    /// The word (up to conjugacy) that a closed path represents.
    pub fn read_loop(&self, path: &[Step]) -> FreeWord {
        self.unmark.map(&collapse_path(&self.tree_letters, path))
    }

    /// Embedded simple loops, one per edge set.
    fn simple_cycles(&self) -> Vec<Vec<Step>> {
        let g = &self.graph;
        let out = g.out_steps();
        let mut found: Vec<Vec<Step>> = Vec::new();
        let mut seen_sets: Vec<Vec<usize>> = Vec::new();
        for start in 0..g.num_vertices() {
            let mut path: Vec<Step> = Vec::new();
            let mut on_path = vec![false; g.num_vertices()];
            on_path[start] = true;
            self.cycle_dfs(start, start, &out, &mut path, &mut on_path, &mut found, &mut seen_sets);
        }
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn cycle_dfs(
        &self,
        start: usize,
        v: usize,
        out: &[Vec<Step>],
        path: &mut Vec<Step>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<Step>>,
        seen: &mut Vec<Vec<usize>>,
    ) {
        for &s in &out[v] {
            if path.iter().any(|p| p.edge == s.edge) {
                continue;
            }
            let w = self.graph.head(s);
            if w == start {
                path.push(s);
                let mut set: Vec<usize> = path.iter().map(|p| p.edge).collect();
                set.sort_unstable();
                if !seen.contains(&set) {
                    seen.push(set);
                    found.push(path.clone());
                }
                path.pop();
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                path.push(s);
                self.cycle_dfs(start, w, out, path, on_path, found, seen);
                path.pop();
                on_path[w] = false;
            }
        }
    }

    fn cycle_vertices(&self, c: &[Step]) -> Vec<usize> {
        c.iter().map(|s| self.graph.tail(*s)).collect()
    }

    /// Rotates a cycle to start at vertex `v`, which must lie on it.
    fn rotate_to(&self, c: &[Step], v: usize) -> Vec<Step> {
        let i = c.iter().position(|s| self.graph.tail(*s) == v).expect("vertex on cycle");
        let mut r = c[i..].to_vec();
        r.extend_from_slice(&c[..i]);
        r
    }

    /// Embedded paths from a vertex of `a` to a vertex of `b` meeting
    /// `a ∪ b` only at their endpoints.
    fn connecting_paths(&self, a: &[usize], b: &[usize]) -> Vec<Vec<Step>> {
        let out = self.graph.out_steps();
        let mut result = Vec::new();
        for &start in a {
            let mut visited = vec![false; self.graph.num_vertices()];
            visited[start] = true;
            let mut path = Vec::new();
            self.path_dfs(start, a, b, &out, &mut visited, &mut path, &mut result);
        }
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn path_dfs(
        &self,
        v: usize,
        a: &[usize],
        b: &[usize],
        out: &[Vec<Step>],
        visited: &mut [bool],
        path: &mut Vec<Step>,
        result: &mut Vec<Vec<Step>>,
    ) {
        for &s in &out[v] {
            let w = self.graph.head(s);
            if visited[w] || a.contains(&w) {
                continue;
            }
            path.push(s);
            if b.contains(&w) {
                result.push(path.clone());
            } else {
                visited[w] = true;
                self.path_dfs(w, a, b, out, visited, path, result);
                visited[w] = false;
            }
            path.pop();
        }
    }

    /// Embedded simple loops, figure-eights (two embedded loops sharing one
    /// vertex) and barbells (two disjoint embedded loops joined by an
    /// embedded arc). Figure-eights and barbells come in both relative
    /// orientations of their second loop.
    pub fn candidates(&self) -> Vec<CandidateLoop> {
        let cycles = self.simple_cycles();
        let verts: Vec<Vec<usize>> = cycles.iter().map(|c| self.cycle_vertices(c)).collect();
        let mut out: Vec<CandidateLoop> = cycles
            .iter()
            .map(|c| CandidateLoop { path: c.clone(), shape: Shape::SimpleLoop })
            .collect();
        for i in 0..cycles.len() {
            for j in i + 1..cycles.len() {
                let shared: Vec<usize> =
                    verts[i].iter().copied().filter(|v| verts[j].contains(v)).collect();
                if shared.len() == 1 {
                    let v = shared[0];
                    let a = self.rotate_to(&cycles[i], v);
                    let b = self.rotate_to(&cycles[j], v);
                    for second in [b.clone(), reverse_path(&b)] {
                        let mut p = a.clone();
                        p.extend(second);
                        out.push(CandidateLoop { path: p, shape: Shape::FigureEight });
                    }
                } else if shared.is_empty() {
                    for arc in self.connecting_paths(&verts[i], &verts[j]) {
                        let s = self.graph.tail(arc[0]);
                        let t = self.graph.head(*arc.last().unwrap());
                        let a = self.rotate_to(&cycles[i], s);
                        let b = self.rotate_to(&cycles[j], t);
                        for second in [b.clone(), reverse_path(&b)] {
                            let mut p = a.clone();
                            p.extend(arc.iter().copied());
                            p.extend(second);
                            p.extend(reverse_path(&arc));
                            out.push(CandidateLoop { path: p, shape: Shape::Barbell });
                        }
                    }
                }
            }
        }
        out
    }

    /// Length of a closed edge path.
    pub fn candidate_length(&self, c: &CandidateLoop) -> Rational {
        self.path_length(&c.path)
    }

    /// Whether some essential loop has length at most `eps`.
    pub fn is_thin(&self, eps: &Rational) -> Result<bool> {
        if *eps <= Rational::zero() {
            return Err(Error::Precondition("thinness threshold must be positive".into()));
        }
        Ok(self.systole() <= *eps)
    }

    /// Length of the shortest essential loop, always an embedded one.
    pub fn systole(&self) -> Rational {
        self.simple_cycles()
            .iter()
            .map(|c| self.path_length(c))
            .min()
            .expect("rank at least one")
    }

    /// Collapses `tree` and rescales to the uniform rose, carrying the marking.
    pub fn adjacent_uniform_rose(&self, tree: &SpanningTree) -> Result<MarkedMetricGraph> {
        if tree.edges().len() + 1 != self.graph.num_vertices() {
            return Err(Error::Precondition("tree does not span".into()));
        }
        let rank = self.rank();
        let non_tree = tree.complement(&self.graph);
        let mut petal = vec![None; self.graph.num_edges()];
        for (k, &e) in non_tree.iter().enumerate() {
            petal[e] = Some(k);
        }
        let marking = self
            .marking
            .iter()
            .map(|p| {
                tighten(p.iter().filter_map(|s| {
                    petal[s.edge].map(|k| Step { edge: k, forward: s.forward })
                }))
            })
            .collect();
        let l = Rational::new(1.into(), (rank as i64).into());
        MarkedMetricGraph::new(TopGraph::rose(rank), vec![l; rank], 0, marking)
    }

    /// Parses the text format written by `Display`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut num_vertices = None;
        let mut edges = Vec::new();
        let mut lengths = Vec::new();
        let mut base = 0;
        let mut marks: Vec<Option<Vec<Step>>> = Vec::new();
        let bad = |line: &str| Error::Parse(format!("bad graph line '{line}'"));
        for line in text.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "vertices" if fields.len() == 2 => {
                    num_vertices = Some(fields[1].parse::<usize>().map_err(|_| bad(line))?)
                }
                "edge" if fields.len() == 4 => {
                    let u = fields[1].parse::<usize>().map_err(|_| bad(line))?;
                    let v = fields[2].parse::<usize>().map_err(|_| bad(line))?;
                    let l = fields[3].parse::<Rational>().map_err(|_| bad(line))?;
                    edges.push((u, v));
                    lengths.push(l);
                }
                "base" if fields.len() == 2 => base = fields[1].parse().map_err(|_| bad(line))?,
                "mark" if fields.len() >= 2 => {
                    let mut chars = fields[1].chars();
                    let x = match (chars.next().and_then(Letter::from_char), chars.next()) {
                        (Some(x), None) if !x.is_inverse() => x,
                        _ => return Err(bad(line)),
                    };
                    let mut path = Vec::new();
                    for tok in &fields[2..] {
                        let (num, forward) = match tok.strip_suffix('+') {
                            Some(n) => (n, true),
                            None => (tok.strip_suffix('-').ok_or_else(|| bad(line))?, false),
                        };
                        let edge = num.parse::<usize>().map_err(|_| bad(line))?;
                        path.push(Step { edge, forward });
                    }
                    if marks.len() <= x.index() {
                        marks.resize(x.index() + 1, None);
                    }
                    marks[x.index()] = Some(path);
                }
                _ => return Err(bad(line)),
            }
        }
        let graph = TopGraph::new(num_vertices.ok_or_else(|| Error::Parse("missing vertices".into()))?, edges)?;
        let marking = marks
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::Parse(format!("missing mark for '{}'", Letter::gen(i)))))
            .collect::<Result<Vec<_>>>()?;
        MarkedMetricGraph::new(graph, lengths, base, marking)
    }
}

impl fmt::Display for MarkedMetricGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices {}", self.graph.num_vertices())?;
        for (&(u, v), l) in self.graph.edges().iter().zip(&self.lengths) {
            writeln!(f, "edge {u} {v} {l}")?;
        }
        writeln!(f, "base {}", self.base)?;
        for (i, p) in self.marking.iter().enumerate() {
            write!(f, "mark {}", Letter::gen(i))?;
            for s in p {
                write!(f, " {}{}", s.edge, if s.forward { '+' } else { '-' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// `Λ(X, Y)`: the largest ratio `L_Y(γ)/L_X(γ)` over candidates `γ` of `X`.
pub fn stretch(x: &MarkedMetricGraph, y: &MarkedMetricGraph) -> Result<Rational> {
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch(x.rank(), y.rank()));
    }
    Ok(x.candidates()
        .iter()
        .map(|c| y.loop_length(&x.read_loop(&c.path)) / x.candidate_length(c))
        .max()
        .expect("candidates exist in positive rank"))
}

/// `λ_φ(X) = Λ(X, φX)`, evaluated on candidates of `X`.
pub fn displacement(x: &MarkedMetricGraph, phi: &OuterAutomorphism) -> Result<Rational> {
    if x.rank() != phi.rank() {
        return Err(Error::RankMismatch(x.rank(), phi.rank()));
    }
    Ok(x.candidates()
        .iter()
        .map(|c| {
            let w = x.read_loop(&c.path);
            x.loop_length(&phi.repr().map(&w)) / x.candidate_length(c)
        })
        .max()
        .expect("candidates exist in positive rank"))
}

/// `1 / ((3n−3)·μ^{3n−2})`: below this thinness an automorphism with
/// Lipschitz constant under `μ` is reducible.
pub fn thinness_constant(n: usize, mu: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::Precondition("thinness constant needs rank at least 2".into()));
    }
    if *mu <= Rational::one() {
        return Err(Error::Precondition("mu must exceed 1".into()));
    }
    let denom = Rational::from_integer((3 * n as i64 - 3).into()) * num_traits::pow(mu.clone(), 3 * n - 2);
    Ok(denom.recip())
}
