//! Closure sets `S_{φ,μ}` and the two decision procedures built on them:
//! conjugacy of irreducible outer automorphisms and irreducibility detection.
//!
//! The closure is grown breadth-first, one level at a time. Conjugates of a
//! level are computed in parallel and merged in (member, generator) order,
//! so the member list does not depend on the thread count.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::autom::{Endo, NormRatio, OuterAutomorphism};
use crate::cmt::{cmt_generators, CmtGenerator};
use crate::error::{Error, Result};
use crate::stallings::visibly_reducible;
use crate::Rational;

/// `K = n·(3n−3)·μ^{3n−1}`.
pub fn cap_constant(n: usize, mu: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::Precondition("cap constant needs rank at least 2".into()));
    }
    if *mu <= Rational::one() {
        return Err(Error::Precondition("mu must exceed 1".into()));
    }
    let coeff = Rational::from_integer(((n * (3 * n - 3)) as i64).into());
    Ok(coeff * num_traits::pow(mu.clone(), 3 * n - 1))
}

/// Generators and thread budget shared by the decision procedures.
pub struct Context {
    rank: usize,
    generators: Vec<CmtGenerator>,
    threads: usize,
}

impl Context {
    pub fn new(rank: usize) -> Self {
        Context { rank, generators: cmt_generators(rank), threads: 1 }
    }

    pub fn with_generators(rank: usize, generators: Vec<CmtGenerator>) -> Self {
        Context { rank, generators, threads: 1 }
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[CmtGenerator] {
        &self.generators
    }

    fn check_rank(&self, phi: &OuterAutomorphism) -> Result<()> {
        if phi.rank() != self.rank {
            return Err(Error::RankMismatch(phi.rank(), self.rank));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Member {
    pub class: Arc<Endo>,
    pub norm: NormRatio,
    /// Member and generator it was first reached from.
    pub parent: Option<(usize, usize)>,
}

/// The fixpoint `S_{φ,μ}`: outer classes reachable from the seed by CMT
/// conjugations while staying within norm `K`.
#[derive(Clone, Debug)]
pub struct ClosureSet {
    pub rank: usize,
    pub mu: Rational,
    pub cap: Rational,
    members: Vec<Member>,
    index: HashMap<Arc<Endo>, usize>,
    complete: bool,
}

impl ClosureSet {
    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// False when the search stopped early on a hit.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn seed(&self) -> OuterAutomorphism {
        self.member(0)
    }

    pub fn member(&self, i: usize) -> OuterAutomorphism {
        OuterAutomorphism::new_unchecked(self.members[i].class.as_ref().clone())
    }

    pub fn contains(&self, phi: &OuterAutomorphism) -> bool {
        self.index.contains_key(&phi.canonical_key())
    }

    pub fn position(&self, phi: &OuterAutomorphism) -> Option<usize> {
        self.index.get(&phi.canonical_key()).copied()
    }

    pub fn max_norm(&self) -> Rational {
        self.members.iter().map(|m| m.norm.to_rational()).max().unwrap_or_else(Rational::one)
    }

    /// Generator indices leading from the seed to member `i`:
    /// member `i` is `ζ_k ⋯ ζ_1 · seed · ζ_1⁻¹ ⋯ ζ_k⁻¹`.
    pub fn path_to(&self, mut i: usize) -> Vec<usize> {
        let mut path = Vec::new();
        while let Some((p, g)) = self.members[i].parent {
            path.push(g);
            i = p;
        }
        path.reverse();
        path
    }

    fn insert(&mut self, class: Endo, norm: NormRatio, parent: Option<(usize, usize)>) -> Option<usize> {
        if self.index.contains_key(&class) {
            return None;
        }
        let class = Arc::new(class);
        let i = self.members.len();
        self.index.insert(class.clone(), i);
        self.members.push(Member { class, norm, parent });
        Some(i)
    }
}

/// A conjugate `ζ·σ·ζ⁻¹` produced while growing the closure.
struct Conjugate {
    from: usize,
    generator: usize,
    class: Endo,
    norm: NormRatio,
}

enum Flow {
    Continue,
    Stop,
}

fn within_cap(norm: NormRatio, cap: &Rational) -> bool {
    Rational::new(norm.num.into(), norm.den.into()) <= *cap
}

/// Grows the closure of `seed`. `visit` sees every conjugate produced
/// (these are the elements of `S⁺`), in deterministic order, and may stop
/// the search.
fn explore<F>(ctx: &Context, seed: &OuterAutomorphism, mu: &Rational, mut visit: F) -> Result<ClosureSet>
where
    F: FnMut(&ClosureSet, usize, usize, &Endo) -> Flow,
{
    ctx.check_rank(seed)?;
    let seed_norm = seed.norm_ratio();
    if *mu <= seed_norm.to_rational() {
        return Err(Error::Precondition(format!(
            "mu = {mu} must exceed the seed norm {}",
            seed_norm.to_rational()
        )));
    }
    let cap = cap_constant(ctx.rank, mu)?;
    let mut set = ClosureSet {
        rank: ctx.rank,
        mu: mu.clone(),
        cap: cap.clone(),
        members: Vec::new(),
        index: HashMap::new(),
        complete: false,
    };
    set.insert(seed.canonical_key(), seed_norm, None);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.threads)
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let gens = &ctx.generators;
    let mut frontier: Vec<usize> = vec![0];
    while !frontier.is_empty() {
        let snapshot: Vec<(usize, Arc<Endo>)> =
            frontier.iter().map(|&i| (i, set.members[i].class.clone())).collect();
        let produce = |&(i, ref class): &(usize, Arc<Endo>)| -> Vec<Conjugate> {
            let sigma = OuterAutomorphism::new_unchecked(class.as_ref().clone());
            gens.iter()
                .enumerate()
                .map(|(g, z)| {
                    let c = sigma.conjugated(z.forward.repr(), z.inverse.repr());
                    Conjugate { from: i, generator: g, norm: c.norm_ratio(), class: c.canonical_key() }
                })
                .collect()
        };
        let batches: Vec<Vec<Conjugate>> = if ctx.threads > 1 {
            pool.install(|| snapshot.par_iter().map(produce).collect())
        } else {
            snapshot.iter().map(produce).collect()
        };
        let mut next = Vec::new();
        for c in batches.into_iter().flatten() {
            if let Flow::Stop = visit(&set, c.from, c.generator, &c.class) {
                return Ok(set);
            }
            if within_cap(c.norm, &cap) {
                if let Some(i) = set.insert(c.class, c.norm, Some((c.from, c.generator))) {
                    next.push(i);
                }
            }
        }
        frontier = next;
    }
    set.complete = true;
    Ok(set)
}

/// The completed closure set `S_{φ,μ}`.
pub fn closure_set(ctx: &Context, phi: &OuterAutomorphism, mu: &Rational) -> Result<ClosureSet> {
    explore(ctx, phi, mu, |_, _, _, _| Flow::Continue)
}

/// `S⁺`: one more round of CMT conjugation of a completed closure, without
/// the norm cap. Deduplicated by outer class, in discovery order.
pub fn s_plus(ctx: &Context, set: &ClosureSet) -> Vec<OuterAutomorphism> {
    let mut seen: HashMap<Endo, ()> = HashMap::new();
    let mut out = Vec::new();
    for m in set.members() {
        let sigma = OuterAutomorphism::new_unchecked(m.class.as_ref().clone());
        for z in &ctx.generators {
            let key = sigma.conjugated(z.forward.repr(), z.inverse.repr()).canonical_key();
            if seen.insert(key.clone(), ()).is_none() {
                out.push(OuterAutomorphism::new_unchecked(key));
            }
        }
    }
    out
}

fn default_mu(norms: &[Rational]) -> Rational {
    norms.iter().max().cloned().unwrap_or_else(Rational::one) + Rational::one()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyOutcome {
    pub conjugate: bool,
    /// Generator indices `[g_1, …, g_k]` with
    /// `ψ = ζ_k ⋯ ζ_1 · φ · ζ_1⁻¹ ⋯ ζ_k⁻¹` up to inner automorphisms.
    pub conjugator: Option<Vec<usize>>,
    pub members: usize,
    #[serde(serialize_with = "ser_rational")]
    pub max_norm: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu: Rational,
}

pub(crate) fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// Decides whether irreducible `φ` and `ψ` are conjugate in `Out(F_n)`.
/// Irreducibility is the caller's responsibility.
pub fn conjugacy_irreducible(
    ctx: &Context,
    phi: &OuterAutomorphism,
    psi: &OuterAutomorphism,
    mu: Option<Rational>,
) -> Result<ConjugacyOutcome> {
    ctx.check_rank(phi)?;
    ctx.check_rank(psi)?;
    let (np, nq) = (phi.norm(), psi.norm());
    let mu = mu.unwrap_or_else(|| default_mu(&[np.clone(), nq.clone()]));
    if mu <= np || mu <= nq {
        return Err(Error::Precondition(format!("mu = {mu} must exceed both norms ({np}, {nq})")));
    }
    let target = psi.canonical_key();
    let mut hit: Option<(usize, usize)> = None;
    let same = phi.canonical_key() == target;
    let set = explore(ctx, phi, &mu, |_, from, g, class| {
        if same {
            return Flow::Stop;
        }
        if *class == target {
            hit = Some((from, g));
            return Flow::Stop;
        }
        Flow::Continue
    })?;
    let conjugator = if same {
        Some(Vec::new())
    } else {
        hit.map(|(from, g)| {
            let mut p = set.path_to(from);
            p.push(g);
            p
        })
    };
    Ok(ConjugacyOutcome {
        conjugate: conjugator.is_some(),
        conjugator,
        members: set.len(),
        max_norm: set.max_norm(),
        mu,
    })
}

/// Visibly reducible representative found in `S⁺`.
#[derive(Clone, Debug, Serialize)]
pub struct ReducibilityWitness {
    pub witness: OuterAutomorphism,
    pub partition: Vec<Vec<usize>>,
    /// Generator indices conjugating the input to the witness.
    pub path: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub enum Verdict {
    Reducible(ReducibilityWitness),
    Irreducible,
}

#[derive(Clone, Debug, Serialize)]
pub struct IrreducibilityOutcome {
    pub verdict: Verdict,
    pub members: usize,
    /// Conjugates examined, counted with multiplicity.
    pub scanned: usize,
    #[serde(serialize_with = "ser_rational")]
    pub max_norm: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub mu: Rational,
}

impl IrreducibilityOutcome {
    pub fn is_irreducible(&self) -> bool {
        matches!(self.verdict, Verdict::Irreducible)
    }
}

/// Scans `S⁺` for a visibly reducible representative; irreducible if none.
pub fn detect_irreducible(
    ctx: &Context,
    phi: &OuterAutomorphism,
    mu: Option<Rational>,
) -> Result<IrreducibilityOutcome> {
    ctx.check_rank(phi)?;
    let norm = phi.norm();
    let mu = mu.unwrap_or_else(|| default_mu(std::slice::from_ref(&norm)));
    if mu <= norm {
        return Err(Error::Precondition(format!("mu = {mu} must exceed the norm {norm}")));
    }
    // The seed lies in S ⊆ S⁺.
    if let Some(partition) = visibly_reducible(phi) {
        return Ok(IrreducibilityOutcome {
            verdict: Verdict::Reducible(ReducibilityWitness {
                witness: phi.clone(),
                partition,
                path: Vec::new(),
            }),
            members: 1,
            scanned: 1,
            max_norm: norm,
            mu,
        });
    }
    let mut found: Option<ReducibilityWitness> = None;
    let mut scanned = 1;
    let set = explore(ctx, phi, &mu, |set, from, g, class| {
        scanned += 1;
        let candidate = OuterAutomorphism::new_unchecked(class.clone());
        match visibly_reducible(&candidate) {
            Some(partition) => {
                let mut path = set.path_to(from);
                path.push(g);
                found = Some(ReducibilityWitness { witness: candidate, partition, path });
                Flow::Stop
            }
            None => Flow::Continue,
        }
    })?;
    let verdict = match found {
        Some(w) => Verdict::Reducible(w),
        None => Verdict::Irreducible,
    };
    Ok(IrreducibilityOutcome { verdict, members: set.len(), scanned, max_norm: set.max_norm(), mu })
}
