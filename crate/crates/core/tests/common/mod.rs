#![allow(dead_code)]

use num_traits::Zero;
use outfn::{Endo, FreeWord, Letter, OuterAutomorphism, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn word(s: &str) -> FreeWord {
    FreeWord::parse(s).unwrap()
}

pub fn out(s: &str) -> OuterAutomorphism {
    OuterAutomorphism::parse(s).unwrap()
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn fibonacci() -> OuterAutomorphism {
    out("a->ab, b->a")
}

pub fn all_letters(rank: usize) -> Vec<Letter> {
    (0..rank).flat_map(|i| [Letter::new(i, false), Letter::new(i, true)]).collect()
}

pub fn random_word<R: Rng>(rng: &mut R, rank: usize, max_len: usize) -> FreeWord {
    let len = rng.gen_range(0..=max_len);
    let letters = all_letters(rank);
    let mut out: Vec<Letter> = Vec::with_capacity(len);
    while out.len() < len {
        let x = *letters.choose(rng).unwrap();
        if out.last() == Some(&x.inv()) {
            continue;
        }
        out.push(x);
    }
    FreeWord::from_reduced(out).unwrap()
}

pub fn random_nonempty_word<R: Rng>(rng: &mut R, rank: usize, max_len: usize) -> FreeWord {
    loop {
        let w = random_word(rng, rank, max_len);
        if !w.is_identity() {
            return w;
        }
    }
}

/// Straight substitution followed by free reduction, independent of the
/// library's composition code.
pub fn substitute(images: &[FreeWord], w: &FreeWord) -> FreeWord {
    let mut raw = Vec::new();
    for &x in w.letters() {
        let img = images[x.index()].letters();
        if x.is_inverse() {
            raw.extend(img.iter().rev().map(|y| y.inv()));
        } else {
            raw.extend(img.iter().copied());
        }
    }
    FreeWord::reduce(raw)
}

pub fn cyclic_length(letters: &[Letter]) -> usize {
    let mut i = 0;
    let mut j = letters.len();
    while j - i >= 2 && letters[i] == letters[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    j - i
}

/// Every Whitehead automorphism of `F_rank`: signed permutations, and for
/// each letter `a` and subset `A` of the other letters, `x ↦ x a` when
/// `x ∈ A`, `x ↦ a⁻¹ x` when `x⁻¹ ∈ A`.
pub fn whitehead_automorphisms(rank: usize) -> Vec<Endo> {
    let mut out = signed_permutations(rank);
    for pivot in all_letters(rank) {
        let others: Vec<Letter> =
            all_letters(rank).into_iter().filter(|l| l.index() != pivot.index()).collect();
        for mask in 1u32..(1 << others.len()) {
            let chosen = |l: Letter| others.iter().position(|&o| o == l).is_some_and(|p| mask >> p & 1 == 1);
            let images = (0..rank)
                .map(|i| {
                    let x = Letter::gen(i);
                    if i == pivot.index() {
                        return FreeWord::letter(x);
                    }
                    let mut w = vec![x];
                    if chosen(x) {
                        w.push(pivot);
                    }
                    if chosen(x.inv()) {
                        w.insert(0, pivot.inv());
                    }
                    FreeWord::reduce(w)
                })
                .collect();
            out.push(Endo::new(images).unwrap());
        }
    }
    out
}

pub fn signed_permutations(rank: usize) -> Vec<Endo> {
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
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
    for p in perms {
        for signs in 0u32..(1 << rank) {
            let images =
                (0..rank).map(|i| FreeWord::letter(Letter::new(p[i], signs >> i & 1 == 1))).collect();
            out.push(Endo::new(images).unwrap());
        }
    }
    out
}

/// A product of `1..=max_factors` random Whitehead automorphisms.
pub fn random_whitehead_product<R: Rng>(rng: &mut R, pool: &[Endo], max_factors: usize) -> OuterAutomorphism {
    let k = rng.gen_range(1..=max_factors);
    let mut images: Vec<FreeWord> = (0..pool[0].rank()).map(FreeWord::gen).collect();
    for _ in 0..k {
        let f = pool.choose(rng).unwrap();
        images = f.images().iter().map(|w| substitute(&images, w)).collect();
    }
    OuterAutomorphism::new(Endo::new(images).unwrap()).unwrap()
}

/// Integer matrix of the induced map on `Z^n`; column `j` is the image of
/// the `j`-th generator.
pub fn abelian_matrix(phi: &OuterAutomorphism) -> Vec<Vec<i64>> {
    let n = phi.rank();
    let mut m = vec![vec![0i64; n]; n];
    for (j, w) in phi.repr().images().iter().enumerate() {
        for x in w.letters() {
            m[x.index()][j] += if x.is_inverse() { -1 } else { 1 };
        }
    }
    m
}

pub fn trace(m: &[Vec<i64>]) -> i64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

pub fn determinant(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0;
    for c in 0..n {
        let minor: Vec<Vec<i64>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &v)| v).collect()).collect();
        let sign = if c % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][c] * determinant(&minor);
    }
    total
}

/// Whether `x² − t·x + d` has no rational root.
pub fn quadratic_irreducible(t: i64, d: i64) -> bool {
    let disc = t * t - 4 * d;
    if disc < 0 {
        return true;
    }
    let r = (disc as f64).sqrt().round() as i64;
    !(r - 1..=r + 1).any(|s| s >= 0 && s * s == disc)
}

/// Largest `num/den` among pairs, compared exactly.
pub fn max_ratio(pairs: impl IntoIterator<Item = (usize, usize)>) -> Rational {
    let mut best = Rational::zero();
    for (num, den) in pairs {
        let r = rat(num as i64, den as i64);
        if r > best {
            best = r;
        }
    }
    best
}
