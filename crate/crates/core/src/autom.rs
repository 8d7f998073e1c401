//! Endomorphisms of a free group given by images of a basis, and outer
//! automorphism classes: application, composition, the norm ‖φ‖_B,
//! equality up to inner automorphisms, and canonical class keys.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stallings::LabeledGraph;
use crate::words::{word_conjugator, FreeWord, Letter};
use crate::Rational;

/// An endomorphism of `F_n` recorded by the images of the basis letters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endo {
    images: Vec<FreeWord>,
}

impl Endo {
    pub fn new(images: Vec<FreeWord>) -> Result<Self> {
        let rank = images.len();
        for w in &images {
            if w.min_rank() > rank {
                return Err(Error::LetterOutOfRange { index: w.min_rank() - 1, rank });
            }
        }
        Ok(Endo { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<FreeWord>) -> Self {
        Endo { images }
    }

    pub fn identity(rank: usize) -> Self {
        Endo { images: (0..rank).map(FreeWord::gen).collect() }
    }

    /// The basis permutation `x_i ↦ x_{perm[i]}^{±1}`.
    pub fn signed_permutation(perm: &[usize], inverted: &[bool]) -> Self {
        Endo {
            images: perm
                .iter()
                .zip(inverted)
                .map(|(&p, &s)| FreeWord::letter(Letter::new(p, s)))
                .collect(),
        }
    }

    /// All `2ⁿ·n!` graph automorphisms of the rank-`n` rose.
    pub fn rose_symmetries(rank: usize) -> Vec<Endo> {
        let mut perms = vec![Vec::new()];
        for _ in 0..rank {
            let mut next = Vec::new();
            for p in &perms {
                for i in 0..rank {
                    if !p.contains(&i) {
                        let mut q = p.clone();
                        q.push(i);
                        next.push(q);
                    }
                }
            }
            perms = next;
        }
        let mut out = Vec::new();
        for p in &perms {
            for signs in 0..(1u32 << rank) {
                let inv: Vec<bool> = (0..rank).map(|i| signs >> i & 1 == 1).collect();
                out.push(Endo::signed_permutation(p, &inv));
            }
        }
        out
    }

    /// Parses `a->ab, b->a`. The rank is the number of left-hand sides,
    /// which must be exactly the first `rank` basis letters.
    pub fn parse(text: &str) -> Result<Self> {
        let mut slots: Vec<Option<FreeWord>> = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (lhs, rhs) = part
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected 'letter->word' in '{part}'")))?;
            let lhs = lhs.trim();
            let mut chars = lhs.chars();
            let x = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => Letter::from_char(c).unwrap(),
                _ => return Err(Error::Parse(format!("left-hand side '{lhs}' is not a basis letter"))),
            };
            let image = FreeWord::parse(rhs)?;
            let i = x.index();
            if slots.len() <= i {
                slots.resize(i + 1, None);
            }
            if slots[i].is_some() {
                return Err(Error::Parse(format!("duplicate left-hand side '{lhs}'")));
            }
            slots[i] = Some(image);
        }
        if slots.is_empty() {
            return Err(Error::Parse("empty automorphism".into()));
        }
        let rank = slots.len();
        let mut images = Vec::with_capacity(rank);
        for (i, s) in slots.into_iter().enumerate() {
            match s {
                Some(w) => images.push(w),
                None => {
                    return Err(Error::Parse(format!(
                        "missing image for basis letter '{}'",
                        Letter::gen(i)
                    )))
                }
            }
        }
        for w in &images {
            if w.min_rank() > rank {
                let bad = w.letters().iter().find(|x| x.index() >= rank).unwrap();
                return Err(Error::Parse(format!("unknown letter '{bad}' for rank {rank}")));
            }
        }
        Ok(Endo { images })
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &FreeWord {
        &self.images[i]
    }

    /// Image of `w`. Panics if `w` uses letters outside the rank.
    pub fn map(&self, w: &FreeWord) -> FreeWord {
        let mut buf: Vec<Letter> = Vec::new();
        for &x in w.letters() {
            let img = self.images[x.index()].letters();
            if x.is_inverse() {
                for &y in img.iter().rev() {
                    push(&mut buf, y.inv());
                }
            } else {
                for &y in img {
                    push(&mut buf, y);
                }
            }
        }
        FreeWord::from_reduced_unchecked(buf)
    }

    pub fn apply(&self, w: &FreeWord) -> Result<FreeWord> {
        if w.min_rank() > self.rank() {
            return Err(Error::RankMismatch(w.min_rank(), self.rank()));
        }
        Ok(self.map(w))
    }

    /// `self ∘ other`: `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Endo) -> Result<Endo> {
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch(self.rank(), other.rank()));
        }
        Ok(self.then_after(other))
    }

    pub(crate) fn then_after(&self, other: &Endo) -> Endo {
        Endo { images: other.images.iter().map(|w| self.map(w)).collect() }
    }

    /// Post-composition with the inner automorphism of `g`.
    pub fn twisted_by(&self, g: &FreeWord) -> Endo {
        Endo { images: self.images.iter().map(|w| w.conjugate_by(g)).collect() }
    }

    /// Whether the images form a basis of `F_n`: the folded wedge of image
    /// loops must have the rank-`n` rose as its based core.
    pub fn is_automorphism(&self) -> bool {
        let n = self.rank();
        if self.images.iter().any(FreeWord::is_identity) {
            return false;
        }
        let g = LabeledGraph::wedge(&self.images).fold().based_core();
        g.rose_labels().is_some_and(|l| l.len() == n)
    }

    /// Inverse automorphism, by folding the wedge of image loops while
    /// tracking which product of the images each edge reads.
    /// Returns `None` when `self` is not an automorphism.
    pub fn inverse(&self) -> Option<Endo> {
        if !self.is_automorphism() {
            return None;
        }
        let n = self.rank();
        // Edge (from, label, to, tag); tags are words in the images.
        let mut edges: Vec<(usize, usize, usize, FreeWord)> = Vec::new();
        let mut nv = 1;
        for (i, w) in self.images.iter().enumerate() {
            let letters = w.letters();
            let mut cur = 0;
            for (k, &x) in letters.iter().enumerate() {
                let last = k + 1 == letters.len();
                let next = if last {
                    0
                } else {
                    nv += 1;
                    nv - 1
                };
                let tag = if last { FreeWord::gen(i) } else { FreeWord::identity() };
                if x.is_inverse() {
                    edges.push((next, x.index(), cur, tag.inverse()));
                } else {
                    edges.push((cur, x.index(), next, tag));
                }
                cur = next;
            }
        }
        loop {
            let mut found = None;
            'search: for i in 0..edges.len() {
                for j in i + 1..edges.len() {
                    if edges[i].1 != edges[j].1 {
                        continue;
                    }
                    if edges[i].0 == edges[j].0 || edges[i].2 == edges[j].2 {
                        found = Some((i, j));
                        break 'search;
                    }
                }
            }
            let Some((i, j)) = found else { break };
            let shared_origin = edges[i].0 == edges[j].0;
            // Ends to be identified, seen from the shared vertex.
            let (ui, uj) =
                if shared_origin { (edges[i].2, edges[j].2) } else { (edges[i].0, edges[j].0) };
            if ui != uj {
                // Gauge the non-base end so both edges carry the same tag, then merge it.
                let (moved, keep, e_moved, e_keep) =
                    if ui == 0 { (uj, ui, j, i) } else { (ui, uj, i, j) };
                let c = if shared_origin {
                    edges[e_moved].3.inverse().mul(&edges[e_keep].3)
                } else {
                    edges[e_keep].3.mul(&edges[e_moved].3.inverse())
                };
                // With shared origin the ends are termini (gauge by c on the right);
                // with shared terminus the ends are origins (gauge by c⁻¹ on the left).
                let c = if shared_origin { c } else { c.inverse() };
                let ci = c.inverse();
                for e in edges.iter_mut() {
                    if e.2 == moved {
                        e.3 = e.3.mul(&c);
                    }
                    if e.0 == moved {
                        e.3 = ci.mul(&e.3);
                    }
                }
                for e in edges.iter_mut() {
                    if e.0 == moved {
                        e.0 = keep;
                    }
                    if e.2 == moved {
                        e.2 = keep;
                    }
                }
            }
            debug_assert_eq!(edges[i].3, edges[j].3);
            edges.remove(j);
        }
        let mut images = vec![FreeWord::identity(); n];
        for (from, label, to, tag) in edges {
            debug_assert!(from == 0 && to == 0);
            images[label] = tag;
        }
        Some(Endo { images })
    }

    /// Integer matrix of the induced map on the abelianization; column `j`
    /// holds the exponent sums of the image of `x_j`.
    pub fn abelianization(&self) -> Vec<Vec<i64>> {
        let n = self.rank();
        let mut m = vec![vec![0i64; n]; n];
        for (j, w) in self.images.iter().enumerate() {
            for x in w.letters() {
                m[x.index()][j] += if x.is_inverse() { -1 } else { 1 };
            }
        }
        m
    }
}

#[inline]
fn push(buf: &mut Vec<Letter>, x: Letter) {
    if buf.last() == Some(&x.inv()) {
        buf.pop();
    } else {
        buf.push(x);
    }
}

impl fmt::Display for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}->{}", Letter::gen(i), w)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Endo({self})")
    }
}

/// An outer automorphism class, held through a verified representative.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Endo", into = "Endo")]
pub struct OuterAutomorphism {
    repr: Endo,
}

impl TryFrom<Endo> for OuterAutomorphism {
    type Error = Error;
    fn try_from(e: Endo) -> Result<Self> {
        OuterAutomorphism::new(e)
    }
}

impl From<OuterAutomorphism> for Endo {
    fn from(o: OuterAutomorphism) -> Endo {
        o.repr
    }
}

/// Norm as an unreduced fraction of cyclic lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormRatio {
    pub num: usize,
    pub den: usize,
}

impl NormRatio {
    fn beats(self, other: NormRatio) -> bool {
        self.num * other.den > other.num * self.den
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.num.into(), self.den.into())
    }
}

impl OuterAutomorphism {
    pub fn new(repr: Endo) -> Result<Self> {
        if !repr.is_automorphism() {
            return Err(Error::NotAutomorphism(repr.to_string()));
        }
        Ok(OuterAutomorphism { repr })
    }

    pub(crate) fn new_unchecked(repr: Endo) -> Self {
        OuterAutomorphism { repr }
    }

    pub fn parse(text: &str) -> Result<Self> {
        OuterAutomorphism::new(Endo::parse(text)?)
    }

    pub fn identity(rank: usize) -> Self {
        OuterAutomorphism { repr: Endo::identity(rank) }
    }

    pub fn repr(&self) -> &Endo {
        &self.repr
    }

    pub fn rank(&self) -> usize {
        self.repr.rank()
    }

    pub fn image(&self, i: usize) -> &FreeWord {
        self.repr.image(i)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OuterAutomorphism) -> Result<OuterAutomorphism> {
        Ok(OuterAutomorphism { repr: self.repr.compose(&other.repr)? })
    }

    /// `ζ·self·ζ⁻¹`, with the inverse of `ζ` supplied.
    pub fn conjugated(&self, zeta: &Endo, zeta_inv: &Endo) -> OuterAutomorphism {
        OuterAutomorphism { repr: zeta.then_after(&self.repr.then_after(zeta_inv)) }
    }

    pub fn inverse(&self) -> OuterAutomorphism {
        OuterAutomorphism { repr: self.repr.inverse().expect("verified automorphism") }
    }

    /// The norm as a fraction: the largest stretch `‖φ(w)‖/‖w‖` over
    /// cyclic words of length one and two.
    pub fn norm_ratio(&self) -> NormRatio {
        let n = self.rank();
        let mut best = NormRatio { num: 0, den: 1 };
        for i in 0..n {
            let r = NormRatio { num: self.repr.images[i].cyclic_len(), den: 1 };
            if r.beats(best) {
                best = r;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let u = &self.repr.images[i];
                let v = &self.repr.images[j];
                for w in [u.mul(v), u.mul(&v.inverse())] {
                    let r = NormRatio { num: w.cyclic_len(), den: 2 };
                    if r.beats(best) {
                        best = r;
                    }
                }
            }
        }
        best
    }

    pub fn norm(&self) -> Rational {
        self.norm_ratio().to_rational()
    }

    /// Whether `self` and `other` differ by an inner automorphism.
    pub fn outer_equal(&self, other: &OuterAutomorphism) -> bool {
        if self.rank() != other.rank() {
            return false;
        }
        let n = self.rank();
        if n == 0 {
            return true;
        }
        let Some(c) = word_conjugator(self.image(0), other.image(0)) else { return false };
        let targets = &self.repr.images;
        let sources = &other.repr.images;
        let total: usize =
            targets.iter().map(FreeWord::len).sum::<usize>() + sources.iter().map(FreeWord::len).sum::<usize>();
        let root_cyclic = c.root.cyclic_len().max(1);
        let bound = ((total + 2 * c.root.len() + c.conjugator.len()) / root_cyclic + 2) as i64;
        let check = |g: &FreeWord| (0..n).all(|i| sources[i].conjugate_by(g) == targets[i]);
        if check(&c.conjugator) {
            return true;
        }
        let r = &c.root;
        let ri = r.inverse();
        let mut up = c.conjugator.clone();
        let mut down = c.conjugator.clone();
        for _ in 0..bound {
            up = r.mul(&up);
            down = ri.mul(&down);
            if check(&up) || check(&down) {
                return true;
            }
        }
        false
    }

    /// Canonical representative of the outer class; equal keys iff
    /// `outer_equal`.
    pub fn canonical_key(&self) -> Endo {
        canonical_representative(&self.repr)
    }

    pub fn canonical(&self) -> OuterAutomorphism {
        OuterAutomorphism { repr: self.canonical_key() }
    }
}

impl fmt::Display for OuterAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.repr.fmt(f)
    }
}

impl fmt::Debug for OuterAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Out({})", self.repr)
    }
}

/// Conjugates the first nontrivial image to its canonical cyclic rotation
/// `R`. What remains is conjugation by powers of the root `ρ` of `R`; the
/// total length of the other images is convex in the exponent, so descend to
/// its minimum and take the lexicographically least tuple there.
fn canonical_representative(phi: &Endo) -> Endo {
    let n = phi.rank();
    let Some(anchor) = phi.images.iter().position(|w| !w.is_identity()) else {
        return phi.clone();
    };
    if n < 2 {
        return phi.clone();
    }
    let (core, c) = phi.images[anchor].cyclic_reduce();
    let g0 = c.inverse();
    let base: Vec<FreeWord> = phi.images.iter().map(|w| w.conjugate_by(&g0)).collect();
    let rho = core.root().to_word();
    let rho_inv = rho.inverse();

    // Other images that commute with ρ do not feel the exponent.
    let free = base
        .iter()
        .enumerate()
        .any(|(i, w)| i != anchor && !w.is_identity() && w.mul(&rho) != rho.mul(w));
    if !free {
        return Endo { images: base };
    }

    let shift = |k: i64| -> FreeWord { if k >= 0 { rho.pow(k) } else { rho_inv.pow(-k) } };
    let cost = |k: i64| -> usize {
        let g = shift(k);
        base.iter().enumerate().filter(|&(i, _)| i != anchor).map(|(_, w)| w.conjugate_by(&g).len()).sum()
    };
    let slope = |k: i64| cost(k + 1) as i64 - cost(k) as i64;

    // First k with a nonnegative slope.
    let mut hi = 0i64;
    let mut step = 1i64;
    while slope(hi) < 0 {
        hi += step;
        step *= 2;
    }
    let mut lo = -1i64;
    step = 1;
    while slope(lo) >= 0 {
        lo -= step;
        step *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if slope(mid) < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let state = |k: i64| -> Vec<FreeWord> {
        let g = shift(k);
        base.iter().map(|w| w.conjugate_by(&g)).collect()
    };
    let mut k = hi;
    let mut least = state(k);
    while slope(k) == 0 {
        k += 1;
        let s = state(k);
        if compare_tuples(&s, &least) == Ordering::Less {
            least = s;
        }
    }
    Endo { images: least }
}

fn compare_tuples(a: &[FreeWord], b: &[FreeWord]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.letters().cmp(y.letters()) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}
