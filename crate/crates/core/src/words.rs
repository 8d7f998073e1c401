//! Reduced and cyclically reduced words in a free group with a fixed basis.
//!
//! Letters are signed basis indices. In text, `a`..`z` are the first 26 basis
//! letters and `A`..`Z` their inverses; the empty word is written `1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A basis letter or its inverse. Stored as `±(index + 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: usize, inverted: bool) -> Self {
        let v = index as i32 + 1;
        Letter(if inverted { -v } else { v })
    }

    pub fn gen(index: usize) -> Self {
        Letter::new(index, false)
    }

    /// Zero-based basis index.
    #[inline]
    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    #[inline]
    pub fn inv(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the total order a < A < b < B < ...
    #[inline]
    pub fn order_key(self) -> u32 {
        2 * self.index() as u32 + self.is_inverse() as u32
    }

    pub fn from_order_key(key: u32) -> Self {
        Letter::new((key / 2) as usize, key % 2 == 1)
    }

    pub fn from_char(c: char) -> Option<Self> {
        if c.is_ascii_lowercase() {
            Some(Letter::gen((c as u8 - b'a') as usize))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new((c as u8 - b'A') as usize, true))
        } else {
            None
        }
    }

    pub fn to_char(self) -> Option<char> {
        let i = self.index();
        if i >= 26 {
            return None;
        }
        let base = if self.is_inverse() { b'A' } else { b'a' };
        Some((base + i as u8) as char)
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_char() {
            Some(c) => write!(f, "{c}"),
            None if self.is_inverse() => write!(f, "x{}^-1", self.index()),
            None => write!(f, "x{}", self.index()),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Appends `x` to a reduced buffer, cancelling against the last letter.
#[inline]
fn push_reduced(buf: &mut Vec<Letter>, x: Letter) {
    if buf.last() == Some(&x.inv()) {
        buf.pop();
    } else {
        buf.push(x);
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord { letters: Vec::new() }
    }

    pub fn letter(x: Letter) -> Self {
        FreeWord { letters: vec![x] }
    }

    pub fn gen(index: usize) -> Self {
        FreeWord::letter(Letter::gen(index))
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Self {
        let mut buf = Vec::new();
        for x in raw {
            push_reduced(&mut buf, x);
        }
        FreeWord { letters: buf }
    }

    /// Like [`FreeWord::reduce`], rejecting letters outside a rank-`rank` basis.
    pub fn reduce_in_rank<I: IntoIterator<Item = Letter>>(raw: I, rank: usize) -> Result<Self> {
        let mut buf = Vec::new();
        for x in raw {
            if x.index() >= rank {
                return Err(Error::LetterOutOfRange { index: x.index(), rank });
            }
            push_reduced(&mut buf, x);
        }
        Ok(FreeWord { letters: buf })
    }

    /// Wraps a sequence that must already be freely reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Result<Self> {
        if letters.windows(2).any(|p| p[0] == p[1].inv()) {
            return Err(Error::NotReduced(render(&letters)));
        }
        Ok(FreeWord { letters })
    }

    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inv()));
        FreeWord { letters }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "1" || t.is_empty() {
            return Ok(FreeWord::identity());
        }
        let mut raw = Vec::with_capacity(t.len());
        for c in t.chars() {
            match Letter::from_char(c) {
                Some(x) => raw.push(x),
                None => return Err(Error::Parse(format!("bad letter '{c}' in word '{t}'"))),
            }
        }
        Ok(FreeWord::reduce(raw))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// One more than the largest basis index used, or 0 for the identity.
    pub fn min_rank(&self) -> usize {
        self.letters.iter().map(|x| x.index() + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        FreeWord { letters: self.letters.iter().rev().map(|x| x.inv()).collect() }
    }

    pub fn mul(&self, other: &FreeWord) -> Self {
        let a = &self.letters;
        let b = &other.letters;
        let mut k = 0;
        while k < a.len() && k < b.len() && a[a.len() - 1 - k] == b[k].inv() {
            k += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * k);
        letters.extend_from_slice(&a[..a.len() - k]);
        letters.extend_from_slice(&b[k..]);
        FreeWord { letters }
    }

    /// `g · self · g⁻¹`.
    pub fn conjugate_by(&self, g: &FreeWord) -> Self {
        g.mul(self).mul(&g.inverse())
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != l.inv(),
            _ => true,
        }
    }

    /// Number of letters cancelled from each end by cyclic reduction.
    fn cyclic_trim(&self) -> usize {
        let w = &self.letters;
        let n = w.len();
        let mut k = 0;
        while 2 * k + 1 < n && w[k] == w[n - 1 - k].inv() {
            k += 1;
        }
        k
    }

    /// ‖w‖: the length of the cyclic reduction.
    pub fn cyclic_len(&self) -> usize {
        self.letters.len() - 2 * self.cyclic_trim()
    }

    /// Splits `self = conjugator · core · conjugator⁻¹` with `core` a
    /// cyclically reduced word in canonical rotation.
    pub fn cyclic_reduce(&self) -> (CyclicWord, FreeWord) {
        let k = self.cyclic_trim();
        let n = self.letters.len();
        let inner = &self.letters[k..n - k];
        let r = least_rotation(inner);
        // inner = p·s with p = inner[..r]; rotation s·p, and inner = p·(s·p)·p⁻¹.
        let mut core = Vec::with_capacity(inner.len());
        core.extend_from_slice(&inner[r..]);
        core.extend_from_slice(&inner[..r]);
        let mut conj = Vec::with_capacity(k + r);
        conj.extend_from_slice(&self.letters[..k]);
        conj.extend_from_slice(&inner[..r]);
        (CyclicWord { letters: core }, FreeWord { letters: conj })
    }

    /// The canonical cyclic word of the conjugacy class of `self`.
    pub fn cyclic_word(&self) -> CyclicWord {
        self.cyclic_reduce().0
    }

    /// Whether `self` and `other` are conjugate in the free group.
    pub fn is_conjugate_to(&self, other: &FreeWord) -> bool {
        self.cyclic_len() == other.cyclic_len() && self.cyclic_word() == other.cyclic_word()
    }

    /// Free generator of the centralizer of a nontrivial element.
    pub fn primitive_root(&self) -> FreeWord {
        if self.is_identity() {
            return FreeWord::identity();
        }
        let (core, c) = self.cyclic_reduce();
        let p = core.period();
        let root = FreeWord { letters: core.letters[..p].to_vec() };
        root.conjugate_by(&c)
    }
}

fn render(letters: &[Letter]) -> String {
    if letters.is_empty() {
        return "1".to_string();
    }
    letters.iter().map(|x| x.to_string()).collect()
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.letters))
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeWord({self})")
    }
}

impl From<FreeWord> for String {
    fn from(w: FreeWord) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for FreeWord {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        FreeWord::parse(&s)
    }
}

/// Start index of the lexicographically least rotation.
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    // Two-candidate scan (Shiloach / Duval style), O(n).
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        match a.cmp(&b) {
            Ordering::Equal => k += 1,
            Ordering::Greater => {
                i += k + 1;
                if i <= j {
                    i = j + 1;
                }
                k = 0;
            }
            Ordering::Less => {
                j += k + 1;
                if j <= i {
                    j = i + 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// A cyclically reduced word stored in its least rotation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> FreeWord {
        FreeWord { letters: self.letters.clone() }
    }

    /// Smallest period of the stored rotation.
    pub fn period(&self) -> usize {
        let n = self.letters.len();
        (1..=n)
            .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| self.letters[i] == self.letters[i - p]))
            .unwrap_or(0)
    }

    /// The primitive cyclic word whose power this is.
    pub fn root(&self) -> CyclicWord {
        CyclicWord { letters: self.letters[..self.period()].to_vec() }
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.letters))
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord({self})")
    }
}

/// Witness that two elements are conjugate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conjugation {
    /// Some `g` with `u = g·v·g⁻¹`.
    pub conjugator: FreeWord,
    /// Generator of the centralizer of `u`; every conjugator is `rootᵏ·g`.
    pub root: FreeWord,
}

/// Finds `g` with `u = g·v·g⁻¹` for nontrivial `u`, `v`.
pub fn word_conjugator(u: &FreeWord, v: &FreeWord) -> Option<Conjugation> {
    if u.is_identity() || v.is_identity() {
        return None;
    }
    let (cu, gu) = u.cyclic_reduce();
    let (cv, gv) = v.cyclic_reduce();
    if cu != cv {
        return None;
    }
    Some(Conjugation { conjugator: gu.mul(&gv.inverse()), root: u.primitive_root() })
}

/// All freely reduced words of length exactly `len` over a rank-`rank` basis.
pub fn reduced_words(rank: usize, len: usize) -> Vec<FreeWord> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * (2 * rank));
        for w in &out {
            for key in 0..(2 * rank) as u32 {
                let x = Letter::from_order_key(key);
                let w: &Vec<Letter> = w;
                if w.last() == Some(&x.inv()) {
                    continue;
                }
                let mut nw = w.clone();
                nw.push(x);
                next.push(nw);
            }
        }
        out = next;
    }
    out.into_iter().map(|letters| FreeWord { letters }).collect()
}

/// Canonical representatives of all nontrivial conjugacy classes with
/// cyclic length at most `max_len`.
pub fn cyclic_words_up_to(rank: usize, max_len: usize) -> Vec<CyclicWord> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for w in reduced_words(rank, len) {
            if w.is_cyclically_reduced() {
                let c = w.cyclic_word();
                if c.letters == w.letters {
                    out.push(c);
                }
            }
        }
    }
    out
}
