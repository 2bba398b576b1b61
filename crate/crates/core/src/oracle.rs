//! Exhaustive and randomized checks of the tuple/morphism correspondence on
//! instances small enough to enumerate.
//!
//! Morphisms are enumerated without reference to exponentials: [`HopfSolver`]
//! solves the comultiplication equations one generator at a time. On
//! `F_p[t']/(t'^{p^r}) ⊗ F_p[t'']/(t''^{p^r})` the equation for a generator reads
//! `binom(a + b, a) f_{a+b} = R_{a,b}` for `a, b >= 1`, where `R` collects the
//! cross terms of `Δ(Y_g)` evaluated on earlier generators. Each `f_m` is
//! therefore forced unless all `binom(m, a)` with `0 < a < m` vanish mod `p`, and
//! the solver finds those free degrees from the binomial table.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    nullspace, ArithError, BinomialTable, Fp, Mat, Modulus, MultiPoly, TruncatedPoly,
};
use crate::exponential::{
    extract_tuple, one_param_from_tuple, tuple_to_infinitesimal, CommutingTuple, ExpError,
};
use crate::morphisms::{monomial_image, GeneratorChange, InfinitesimalSubgroup, MorphismError};
use crate::par;
use crate::unipotent::{BlockUnipotentGroup, UnipotentError};

/// Default cap on candidate tuples or coefficient vectors per instance.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Restarts allowed when a random partial solution turns out inconsistent.
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance needs {required} candidates, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("group is not abelian ({blocks} blocks)")]
    NotAbelian { blocks: usize },
    #[error("no consistent random sample after {0} attempts")]
    SamplingFailed(usize),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Exp(#[from] ExpError),
}

/// A failed check together with the offending data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

impl Failure {
    fn new(check: &str, detail: impl Into<String>) -> Self {
        Failure {
            check: check.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub instance: String,
    pub counts: BTreeMap<String, u64>,
    pub failures: Vec<Failure>,
    pub wall_time_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EnumerationReport {
    fn start(group: &BlockUnipotentGroup, r: u32, seed: Option<u64>) -> (Self, Instant) {
        let instance = format!("blocks={:?} p={} r={}", group.blocks(), group.p(), r);
        (
            EnumerationReport {
                instance,
                counts: BTreeMap::new(),
                failures: Vec::new(),
                wall_time_ms: 0,
                seed,
            },
            Instant::now(),
        )
    }

    fn finish(mut self, started: Instant) -> Self {
        self.wall_time_ms = started.elapsed().as_millis() as u64;
        self
    }

    fn count(&mut self, key: &str, value: u64) {
        self.counts.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }
}

/// `p^(n(U) * r)`, saturating.
pub fn candidate_count(group: &BlockUnipotentGroup, r: u32) -> u64 {
    let exp = group.num_generators() as u32 * r;
    group.p().checked_pow(exp).unwrap_or(u64::MAX)
}

fn check_budget(required: u64, budget: u64) -> Result<(), OracleError> {
    if required > budget {
        return Err(OracleError::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Every element of `Lie(U)(F_p)`, in lexicographic order of generator coordinates.
pub fn lie_elements(group: &BlockUnipotentGroup) -> Vec<Mat<Fp>> {
    let p = group.p();
    let ngen = group.num_generators();
    let total = p.pow(ngen as u32);
    (0..total)
        .map(|code| {
            let mut m = Mat::zeros_mod(group.modulus(), group.n());
            let mut rest = code;
            for g in group.generators().iter().rev() {
                m.set(g.row, g.col, Fp::new((rest % p) as i64, group.modulus()));
                rest /= p;
            }
            m
        })
        .collect()
}

/// All of `C_r(u)(F_p)`: `r`-tuples of pairwise commuting elements of `Lie(U)`.
pub fn enumerate_commuting_tuples(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    budget: u64,
) -> Result<Vec<CommutingTuple>, OracleError> {
    check_budget(candidate_count(group, r), budget)?;
    if r == 0 {
        return Ok(vec![CommutingTuple::zero(group, 0)]);
    }
    let elements = lie_elements(group);
    let r = r as usize;
    let per_first = par::map_range(elements.len(), |first| {
        let mut out = Vec::new();
        extend_commuting(&elements, &mut vec![first], r, &mut out);
        out
    });
    per_first
        .into_iter()
        .flatten()
        .map(|indices| {
            let entries = indices.iter().map(|&i| elements[i].clone()).collect();
            Ok(CommutingTuple::new(group, entries)?)
        })
        .collect()
}

fn extend_commuting(
    elements: &[Mat<Fp>],
    stack: &mut Vec<usize>,
    r: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if stack.len() == r {
        out.push(stack.clone());
        return;
    }
    for (j, candidate) in elements.iter().enumerate() {
        if stack.iter().all(|&i| elements[i].commutes_with(candidate)) {
            stack.push(j);
            extend_commuting(elements, stack, r, out);
            stack.pop();
        }
    }
}

/// Whether every entry of `a` commutes with every entry of `b`.
pub fn tuples_commute(a: &CommutingTuple, b: &CommutingTuple) -> bool {
    a.entries()
        .iter()
        .all(|x| b.entries().iter().all(|y| x.commutes_with(y)))
}

fn describe(tuple: &CommutingTuple) -> String {
    format!("tuple {:?}", tuple.coords())
}

struct TupleOutcome {
    morphism: Option<InfinitesimalSubgroup>,
    failures: Vec<Failure>,
    commuting_neighbor: bool,
}

/// Map every tuple of `C_r(u)` to its height-`r` morphism and check validity,
/// injectivity, `restrict ∘ lift = id`, that the lift is the exponential product,
/// that peeling recovers the tuple, and commutation against the next tuple at
/// the infinitesimal, global and matrix levels.
pub fn verify_bijection(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    budget: u64,
) -> Result<EnumerationReport, OracleError> {
    let (mut report, started) = EnumerationReport::start(group, r, None);
    let tuples = enumerate_commuting_tuples(group, r, budget)?;
    let outcomes = par::map_range(tuples.len(), |k| check_tuple(&tuples, k, r));

    let mut seen: HashMap<&InfinitesimalSubgroup, usize> = HashMap::new();
    let mut round_trips = 0;
    let mut commuting_neighbors = 0;
    for (k, outcome) in outcomes.iter().enumerate() {
        if outcome.failures.is_empty() {
            round_trips += 1;
        }
        commuting_neighbors += u64::from(outcome.commuting_neighbor);
        report.failures.extend(outcome.failures.iter().cloned());
        if let Some(phi) = &outcome.morphism {
            if let Some(&earlier) = seen.get(phi) {
                report.failures.push(Failure::new(
                    "injectivity",
                    format!(
                        "{} and {} give the same morphism",
                        describe(&tuples[earlier]),
                        describe(&tuples[k])
                    ),
                ));
            } else {
                seen.insert(phi, k);
            }
        }
    }
    report.count("tuples", tuples.len() as u64);
    report.count("distinct_morphisms", seen.len() as u64);
    report.count("round_trips", round_trips);
    report.count("commutation_checks", tuples.len() as u64);
    report.count("commuting_neighbors", commuting_neighbors);
    Ok(report.finish(started))
}

fn check_tuple(tuples: &[CommutingTuple], k: usize, r: u32) -> TupleOutcome {
    let tuple = &tuples[k];
    let mut outcome = TupleOutcome {
        morphism: None,
        failures: Vec::new(),
        commuting_neighbor: false,
    };
    let fail =
        |check: &str, msg: String| Failure::new(check, format!("{}: {msg}", describe(tuple)));
    let phi = match tuple_to_infinitesimal(tuple, r) {
        Ok(phi) => phi,
        Err(e) => {
            outcome.failures.push(fail("validity", e.to_string()));
            return outcome;
        }
    };
    outcome.morphism = Some(phi.clone());
    let psi = match phi.lift() {
        Ok(psi) => psi,
        Err(e) => {
            outcome.failures.push(fail("lift", e.to_string()));
            return outcome;
        }
    };
    match psi.restrict(r) {
        Ok(back) if back == phi => {}
        Ok(_) => outcome.failures.push(fail(
            "restrict-lift",
            "restriction of the lift differs".into(),
        )),
        Err(e) => outcome.failures.push(fail("restrict-lift", e.to_string())),
    }
    match one_param_from_tuple(tuple) {
        Ok(global) if global == psi => {}
        Ok(_) => outcome.failures.push(fail(
            "lift-is-exponential",
            "lift differs from the exponential product".into(),
        )),
        Err(e) => outcome
            .failures
            .push(fail("lift-is-exponential", e.to_string())),
    }
    match extract_tuple(&psi) {
        Ok(back) if back.padded(r as usize) == *tuple => {}
        Ok(back) => outcome
            .failures
            .push(fail("extract", format!("peeled {:?}", back.coords()))),
        Err(e) => outcome.failures.push(fail("extract", e.to_string())),
    }

    let other = &tuples[(k + 1) % tuples.len()];
    let verdicts = (|| -> Result<[bool; 3], OracleError> {
        let phi2 = tuple_to_infinitesimal(other, r)?;
        let psi2 = phi2.lift()?;
        Ok([
            phi.commutes_with(&phi2)?,
            psi.commutes_with(&psi2)?,
            tuples_commute(tuple, other),
        ])
    })();
    match verdicts {
        Ok([a, b, c]) if a == b && b == c => outcome.commuting_neighbor = a,
        Ok(v) => outcome.failures.push(fail(
            "commutation",
            format!(
                "against {}: infinitesimal {}, lifted {}, bracket {}",
                describe(other),
                v[0],
                v[1],
                v[2]
            ),
        )),
        Err(e) => outcome.failures.push(fail("commutation", e.to_string())),
    }
    outcome
}

/// Solver for the comultiplication equations, one generator at a time in grade order.
pub struct HopfSolver {
    group: Arc<BlockUnipotentGroup>,
    r: u32,
    len: usize,
    free: Vec<usize>,
    binom: BinomialTable,
}

impl HopfSolver {
    pub fn new(group: &Arc<BlockUnipotentGroup>, r: u32) -> Result<Self, OracleError> {
        let len = TruncatedPoly::length(group.modulus(), r)?;
        let binom = BinomialTable::new(len.saturating_sub(1), group.p());
        let free = (1..len)
            .filter(|&m| (1..m).all(|a| binom.get(m, a) == 0))
            .collect();
        Ok(HopfSolver {
            group: group.clone(),
            r,
            len,
            free,
            binom,
        })
    }

    /// Degrees whose coefficient is unconstrained by the equations.
    pub fn free_degrees(&self) -> &[usize] {
        &self.free
    }

    /// The solution for generator `g` with every free coefficient zero, given
    /// images (length `p^r`) of generators `0..g`; `None` if there is none.
    pub fn particular(&self, images: &[Vec<u64>], g: usize) -> Option<Vec<u64>> {
        let p = self.group.p();
        let len = self.len;
        let ngen = self.group.num_generators();
        let refs: Vec<&[u64]> = (0..ngen)
            .map(|h| images.get(h).map_or(&[][..], |v| &v[..]))
            .collect();
        let mut grid = vec![0u64; len * len];
        for (mono, c) in self.group.comultiplication(g).terms() {
            let linear = mono.iter().sum::<u32>() == 1 && (mono[g] == 1 || mono[ngen + g] == 1);
            if linear {
                continue;
            }
            debug_assert!(mono
                .iter()
                .enumerate()
                .all(|(v, &e)| e == 0 || v % ngen < g));
            let left = monomial_image(&mono[..ngen], &refs, p, Some(len));
            let right = monomial_image(&mono[ngen..], &refs, p, Some(len));
            for (a, &x) in left.iter().enumerate() {
                for (b, &y) in right.iter().enumerate() {
                    let cell = &mut grid[a * len + b];
                    *cell = (*cell + x * y % p * c) % p;
                }
            }
        }
        let rhs = |a: usize, b: usize| grid[a * len + b];
        // Terms with a leg of degree zero or total degree >= p^r cannot be matched.
        for a in 0..len {
            for b in 0..len {
                if (a == 0 || b == 0 || a + b >= len) && rhs(a, b) != 0 {
                    return None;
                }
            }
        }
        let modulus = self.group.modulus();
        let mut f = vec![0u64; len];
        for m in 2..len {
            let pivot = (1..m).find(|&a| self.binom.get(m, a) != 0);
            if let Some(a) = pivot {
                let inv = Fp::new(self.binom.get(m, a) as i64, modulus)
                    .inverse()
                    .ok()?
                    .value();
                f[m] = rhs(a, m - a) * inv % p;
            }
            if (1..m).any(|a| self.binom.get(m, a) * f[m] % p != rhs(a, m - a)) {
                return None;
            }
        }
        Some(f)
    }

    /// Every height-`r` morphism, depth-first over generators; each is re-validated.
    pub fn enumerate(&self, budget: u64) -> Result<Vec<InfinitesimalSubgroup>, OracleError> {
        let mut found = Vec::new();
        let mut visited = 0u64;
        let mut images = Vec::new();
        self.descend(&mut images, &mut found, &mut visited, budget)?;
        found.into_iter().map(|imgs| self.build(imgs)).collect()
    }

    fn descend(
        &self,
        images: &mut Vec<Vec<u64>>,
        found: &mut Vec<Vec<Vec<u64>>>,
        visited: &mut u64,
        budget: u64,
    ) -> Result<(), OracleError> {
        let g = images.len();
        if g == self.group.num_generators() {
            found.push(images.clone());
            return Ok(());
        }
        let Some(base) = self.particular(images, g) else {
            return Ok(());
        };
        let p = self.group.p();
        for code in 0..p.pow(self.free.len() as u32) {
            *visited += 1;
            check_budget(*visited, budget)?;
            let mut img = base.clone();
            let mut rest = code;
            for &m in &self.free {
                img[m] = (img[m] + rest % p) % p;
                rest /= p;
            }
            images.push(img);
            self.descend(images, found, visited, budget)?;
            images.pop();
        }
        Ok(())
    }

    fn build(&self, images: Vec<Vec<u64>>) -> Result<InfinitesimalSubgroup, OracleError> {
        let modulus = self.group.modulus();
        let polys = images
            .into_iter()
            .map(|c| {
                TruncatedPoly::new(
                    modulus,
                    self.r,
                    &c.iter().map(|&v| v as i64).collect::<Vec<_>>(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(InfinitesimalSubgroup::new(&self.group, self.r, polys)?)
    }

    /// A random morphism. Free coefficients are uniform half the time and otherwise
    /// a random multiple of one shared direction, which keeps non-abelian cross
    /// terms solvable often. Generators outside `support` are forced to zero.
    pub fn sample<R: Rng>(
        &self,
        rng: &mut R,
        support: Option<&[bool]>,
    ) -> Result<InfinitesimalSubgroup, OracleError> {
        let p = self.group.p();
        let ngen = self.group.num_generators();
        'attempt: for _ in 0..MAX_ATTEMPTS {
            let direction: Vec<u64> = self.free.iter().map(|_| rng.gen_range(0..p)).collect();
            let mut images: Vec<Vec<u64>> = Vec::with_capacity(ngen);
            for g in 0..ngen {
                let Some(mut img) = self.particular(&images, g) else {
                    continue 'attempt;
                };
                if support.is_some_and(|s| !s[g]) {
                    if img.iter().any(|&c| c != 0) {
                        continue 'attempt;
                    }
                } else {
                    let scale = rng.gen_range(0..p);
                    let uniform = rng.gen_bool(0.5);
                    for (k, &m) in self.free.iter().enumerate() {
                        let c = if uniform {
                            rng.gen_range(0..p)
                        } else {
                            direction[k] * scale % p
                        };
                        img[m] = (img[m] + c) % p;
                    }
                }
                images.push(img);
            }
            return self.build(images);
        }
        Err(OracleError::SamplingFailed(MAX_ATTEMPTS))
    }
}

/// All height-`r` morphisms via the pruned generator-by-generator search.
pub fn enumerate_morphisms(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    budget: u64,
) -> Result<Vec<InfinitesimalSubgroup>, OracleError> {
    HopfSolver::new(group, r)?.enumerate(budget)
}

/// All height-`r` morphisms of an abelian `U`: every generator image ranges over
/// `Σ a_i t^{p^i}` and each candidate is validated.
pub fn enumerate_morphisms_abelian(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    budget: u64,
) -> Result<Vec<InfinitesimalSubgroup>, OracleError> {
    if !group.is_abelian() {
        return Err(OracleError::NotAbelian {
            blocks: group.blocks().len(),
        });
    }
    check_budget(candidate_count(group, r), budget)?;
    let p = group.p();
    let ngen = group.num_generators();
    let len = TruncatedPoly::length(group.modulus(), r)?;
    let total = candidate_count(group, r);
    let mut found = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut images = Vec::with_capacity(ngen);
        for _ in 0..ngen {
            let mut coeffs = vec![0i64; len];
            let mut degree = 1;
            for _ in 0..r {
                coeffs[degree] = (rest % p) as i64;
                rest /= p;
                degree *= p as usize;
            }
            images.push(TruncatedPoly::new(group.modulus(), r, &coeffs)?);
        }
        match InfinitesimalSubgroup::new(group, r, images) {
            Ok(phi) => found.push(phi),
            Err(MorphismError::HopfFailure { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(found)
}

/// Compare the set of all morphisms with the image of `C_r(u)`. Abelian groups use
/// the additive enumeration and the solver; others use the solver only.
pub fn certify_surjectivity(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    budget: u64,
) -> Result<EnumerationReport, OracleError> {
    let (mut report, started) = EnumerationReport::start(group, r, None);
    let solved: HashSet<InfinitesimalSubgroup> =
        enumerate_morphisms(group, r, budget)?.into_iter().collect();
    report.count("morphisms", solved.len() as u64);
    if group.is_abelian() {
        let additive: HashSet<InfinitesimalSubgroup> =
            enumerate_morphisms_abelian(group, r, budget)?
                .into_iter()
                .collect();
        report.count("additive_morphisms", additive.len() as u64);
        if additive != solved {
            report.failures.push(Failure::new(
                "abelian-enumeration",
                "additive enumeration and solver disagree",
            ));
        }
    }
    let tuples = enumerate_commuting_tuples(group, r, budget)?;
    report.count("tuples", tuples.len() as u64);
    let images: HashSet<InfinitesimalSubgroup> = tuples
        .iter()
        .map(|t| tuple_to_infinitesimal(t, r))
        .collect::<Result<_, _>>()?;
    report.count("tuple_images", images.len() as u64);
    if tuples.len() != solved.len() {
        report.failures.push(Failure::new(
            "count",
            format!("{} tuples but {} morphisms", tuples.len(), solved.len()),
        ));
    }
    for phi in solved.difference(&images) {
        report.failures.push(Failure::new(
            "surjectivity",
            format!(
                "not hit: {}",
                serde_json::to_string(&phi.to_json()).unwrap_or_default()
            ),
        ));
    }
    for phi in images.difference(&solved) {
        report.failures.push(Failure::new(
            "solver",
            format!(
                "missed: {}",
                serde_json::to_string(&phi.to_json()).unwrap_or_default()
            ),
        ));
    }
    Ok(report.finish(started))
}

/// Where [`verify_commutation_equivalence`] gets its pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    /// Every ordered pair of morphisms coming from `C_r(u)`.
    AllTuples,
    /// Random morphisms from the solver; every other pair is a commuting pair
    /// `(φ, φ ∘ (b -> c b^{p^k}))`.
    Random { samples: usize, seed: u64 },
}

/// `φ ∘ (b -> c b^{p^k})`, which commutes with `φ` because `G_{a(r)}` is commutative.
pub fn reparametrize(
    phi: &InfinitesimalSubgroup,
    c: u64,
    k: u32,
) -> Result<InfinitesimalSubgroup, OracleError> {
    let group = phi.group();
    let p = group.p();
    let step = p.pow(k) as usize;
    let modulus = group.modulus();
    let images = phi
        .images()
        .iter()
        .map(|img| {
            let len = img.len();
            let mut coeffs = vec![0i64; len];
            let mut cm = 1u64;
            for (m, &a) in img.coeffs().iter().enumerate() {
                if m > 0 {
                    cm = cm * (c % p) % p;
                }
                if m * step < len {
                    coeffs[m * step] = (a * cm % p) as i64;
                }
            }
            TruncatedPoly::new(modulus, phi.height(), &coeffs)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InfinitesimalSubgroup::new(group, phi.height(), images)?)
}

/// Commutation at height `r`, after lifting, and of the underlying tuples must agree.
pub fn verify_commutation_equivalence(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    source: SampleSource,
    budget: u64,
) -> Result<EnumerationReport, OracleError> {
    let seed = match source {
        SampleSource::Random { seed, .. } => Some(seed),
        SampleSource::AllTuples => None,
    };
    let (mut report, started) = EnumerationReport::start(group, r, seed);
    let morphisms: Vec<InfinitesimalSubgroup> = match source {
        SampleSource::AllTuples => enumerate_commuting_tuples(group, r, budget)?
            .iter()
            .map(|t| tuple_to_infinitesimal(t, r))
            .collect::<Result<_, _>>()?,
        SampleSource::Random { samples, seed } => {
            let solver = HopfSolver::new(group, r)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(2 * samples);
            for s in 0..samples {
                let phi = solver.sample(&mut rng, None)?;
                let psi = if s % 2 == 0 {
                    solver.sample(&mut rng, None)?
                } else {
                    let c = rng.gen_range(0..group.p());
                    let k = rng.gen_range(0..r);
                    reparametrize(&phi, c, k)?
                };
                out.push(phi);
                out.push(psi);
            }
            out
        }
    };
    let prepared = par::map(&morphisms, |phi| -> Result<_, OracleError> {
        let psi = phi.lift()?;
        let tuple = extract_tuple(&psi)?.padded(r as usize);
        Ok((psi, tuple))
    });
    let prepared = prepared.into_iter().collect::<Result<Vec<_>, _>>()?;

    let pairs: Vec<(usize, usize)> = match source {
        SampleSource::AllTuples => {
            let n = morphisms.len();
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
        }
        SampleSource::Random { samples, .. } => (0..samples).map(|s| (2 * s, 2 * s + 1)).collect(),
    };
    let verdicts = par::map(&pairs, |&(i, j)| -> Result<[bool; 3], OracleError> {
        Ok([
            morphisms[i].commutes_with(&morphisms[j])?,
            prepared[i].0.commutes_with(&prepared[j].0)?,
            tuples_commute(&prepared[i].1, &prepared[j].1),
        ])
    });
    let mut commuting = 0;
    for (&(i, j), verdict) in pairs.iter().zip(verdicts) {
        let v = verdict?;
        if v[0] == v[1] && v[1] == v[2] {
            commuting += u64::from(v[0]);
        } else {
            report.failures.push(Failure::new(
                "commutation",
                format!(
                    "{} vs {}: infinitesimal {}, lifted {}, bracket {}",
                    describe(&prepared[i].1),
                    describe(&prepared[j].1),
                    v[0],
                    v[1],
                    v[2]
                ),
            ));
        }
    }
    report.count("pairs", pairs.len() as u64);
    report.count("commuting_pairs", commuting);
    Ok(report.finish(started))
}

/// Kinds of conjugating element sampled by [`verify_equivariance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugatorKind {
    Diagonal,
    Unitriangular,
    Levi,
    /// `u_1 w u_2` with `u_i ∈ U(F_p)` and `w` a signed permutation of determinant 1.
    PermutationComposed,
}

impl ConjugatorKind {
    pub const ALL: [ConjugatorKind; 4] = [
        ConjugatorKind::Diagonal,
        ConjugatorKind::Unitriangular,
        ConjugatorKind::Levi,
        ConjugatorKind::PermutationComposed,
    ];

    fn label(self) -> &'static str {
        match self {
            ConjugatorKind::Diagonal => "diagonal",
            ConjugatorKind::Unitriangular => "unitriangular",
            ConjugatorKind::Levi => "levi",
            ConjugatorKind::PermutationComposed => "permutation_composed",
        }
    }
}

/// Random invertible diagonal matrix.
pub fn random_diagonal<R: Rng>(modulus: Modulus, n: usize, rng: &mut R) -> Mat<Fp> {
    let p = modulus.get();
    Mat::from_fn(n, |i, j| {
        Fp::new(
            if i == j {
                rng.gen_range(1..p) as i64
            } else {
                0
            },
            modulus,
        )
    })
}

/// Random upper unitriangular matrix (a point of the Borel's unipotent radical).
pub fn random_unitriangular<R: Rng>(modulus: Modulus, n: usize, rng: &mut R) -> Mat<Fp> {
    let p = modulus.get();
    Mat::from_fn(n, |i, j| {
        Fp::new(
            match i.cmp(&j) {
                std::cmp::Ordering::Equal => 1,
                std::cmp::Ordering::Less => rng.gen_range(0..p) as i64,
                std::cmp::Ordering::Greater => 0,
            },
            modulus,
        )
    })
}

/// Random invertible matrix.
pub fn random_invertible<R: Rng>(modulus: Modulus, n: usize, rng: &mut R) -> Mat<Fp> {
    let p = modulus.get();
    loop {
        let m = Mat::from_fn(n, |_, _| Fp::new(rng.gen_range(0..p) as i64, modulus));
        if m.inverse().is_ok() {
            return m;
        }
    }
}

/// Random invertible block-diagonal matrix for the Levi of the group's parabolic.
pub fn random_levi<R: Rng>(group: &BlockUnipotentGroup, rng: &mut R) -> Mat<Fp> {
    let modulus = group.modulus();
    let mut m = Mat::zeros_mod(modulus, group.n());
    let mut offset = 0;
    for &size in group.blocks() {
        let block = random_invertible(modulus, size, rng);
        for i in 0..size {
            for j in 0..size {
                m.set(offset + i, offset + j, *block.get(i, j));
            }
        }
        offset += size;
    }
    m
}

/// Signed permutation matrix `w` with determinant 1, `w e_j = ± e_{σ(j)}`, and `σ`.
pub fn random_signed_permutation<R: Rng>(
    modulus: Modulus,
    n: usize,
    rng: &mut R,
) -> (Mat<Fp>, Vec<usize>) {
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(rng);
    let mut signs: Vec<i64> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
        .collect();
    let inversions = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| sigma[i] > sigma[j])
        .count();
    let det = signs.iter().product::<i64>() * if inversions % 2 == 0 { 1 } else { -1 };
    if det != 1 {
        signs[0] = -signs[0];
    }
    let mut w = Mat::zeros_mod(modulus, n);
    for j in 0..n {
        w.set(sigma[j], j, Fp::new(signs[j], modulus));
    }
    (w, sigma)
}

/// Check `lift(x·φ) = x·lift(φ)` for `samples` random pairs, cycling through
/// [`ConjugatorKind::ALL`]. For parabolic `x` the conjugate is also recomputed
/// through `x^*` on the coordinate ring. Permutation-composed `x = u_1 w u_2`
/// are paired with `φ = u_1 φ_1 u_1^{-1}`, where `φ_1` is supported on the
/// generators that `w` keeps inside `U`, so both `φ` and `x·φ` factor through `U`.
pub fn verify_equivariance(
    group: &Arc<BlockUnipotentGroup>,
    r: u32,
    samples: usize,
    seed: u64,
) -> Result<EnumerationReport, OracleError> {
    let (mut report, started) = EnumerationReport::start(group, r, Some(seed));
    let solver = HopfSolver::new(group, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modulus = group.modulus();
    let n = group.n();
    let mut per_kind: BTreeMap<&str, u64> = BTreeMap::new();
    let mut nontrivial = 0;
    let mut outside_parabolic = 0;
    for s in 0..samples {
        let kind = ConjugatorKind::ALL[s % ConjugatorKind::ALL.len()];
        *per_kind.entry(kind.label()).or_default() += 1;
        let (x, phi) = match kind {
            ConjugatorKind::Diagonal => (
                random_diagonal(modulus, n, &mut rng),
                solver.sample(&mut rng, None)?,
            ),
            ConjugatorKind::Unitriangular => (
                random_unitriangular(modulus, n, &mut rng),
                solver.sample(&mut rng, None)?,
            ),
            ConjugatorKind::Levi => (random_levi(group, &mut rng), solver.sample(&mut rng, None)?),
            ConjugatorKind::PermutationComposed => {
                let (w, sigma) = random_signed_permutation(modulus, n, &mut rng);
                let mut inv = vec![0; n];
                for (j, &s) in sigma.iter().enumerate() {
                    inv[s] = j;
                }
                let support: Vec<bool> = group
                    .generators()
                    .iter()
                    .map(|g| group.generator_at(inv[g.row], inv[g.col]).is_some())
                    .collect();
                let phi1 = solver.sample(&mut rng, Some(&support))?;
                let coords = |rng: &mut ChaCha8Rng| -> Vec<u64> {
                    (0..group.num_generators())
                        .map(|_| rng.gen_range(0..group.p()))
                        .collect()
                };
                let u1 = group.element(&coords(&mut rng)).matrix().clone();
                let u2 = group.element(&coords(&mut rng)).matrix().clone();
                let phi = phi1.conjugate(&u1.inverse()?)?;
                (u1.mul(&w).mul(&u2), phi)
            }
        };
        let label = format!(
            "{} x = {:?}, φ = {}",
            kind.label(),
            x.to_residues(),
            serde_json::to_string(&phi.to_json()).unwrap_or_default()
        );
        let conj = match phi.conjugate(&x) {
            Ok(c) => c,
            Err(e) => {
                report
                    .failures
                    .push(Failure::new("conjugate", format!("{label}: {e}")));
                continue;
            }
        };
        nontrivial += u64::from(!phi.is_trivial());
        outside_parabolic += u64::from(!group.is_in_parabolic(&x));
        let left = conj.lift()?;
        match phi.lift()?.conjugate(&x) {
            Ok(right) if right == left => {}
            Ok(_) => report
                .failures
                .push(Failure::new("equivariance", label.clone())),
            Err(e) => report
                .failures
                .push(Failure::new("equivariance", format!("{label}: {e}"))),
        }
        if kind != ConjugatorKind::PermutationComposed {
            for (g, img) in conj.images().iter().enumerate() {
                let y = MultiPoly::var(group.coordinate_ring().clone(), g);
                let via_ring = phi.apply(&group.act_by_conjugation(&x, &y)?)?;
                if &via_ring != img {
                    report.failures.push(Failure::new(
                        "comorphism-route",
                        format!("{label}: generator {g}"),
                    ));
                }
            }
        }
    }
    report.count("samples", samples as u64);
    report.count("nontrivial", nontrivial);
    report.count("outside_parabolic", outside_parabolic);
    for (kind, count) in per_kind {
        report.count(kind, count);
    }
    Ok(report.finish(started))
}

/// Random triangular change of generators `X_g = c_g Y_g + h_g` with `h_g` a
/// short combination of monomials in earlier generators of total grade `< p`,
/// plus a constant.
pub fn random_generator_change<R: Rng>(
    group: &Arc<BlockUnipotentGroup>,
    rng: &mut R,
) -> Result<GeneratorChange, OracleError> {
    let p = group.p();
    let ring = group.coordinate_ring();
    let ngen = group.num_generators();
    let scalars: Vec<u64> = (0..ngen).map(|_| rng.gen_range(1..p)).collect();
    let shifts = (0..ngen)
        .map(|g| {
            let mut terms = vec![(vec![0u32; ngen], rng.gen_range(0..p))];
            for _ in 0..rng.gen_range(0..=3) {
                let mut exps = vec![0u32; ngen];
                let mut grade = 0;
                while g > 0 && rng.gen_bool(0.7) {
                    let h = rng.gen_range(0..g);
                    let next = grade + group.generators()[h].grade;
                    if next as u64 >= p {
                        break;
                    }
                    exps[h] += 1;
                    grade = next;
                }
                terms.push((exps, rng.gen_range(0..p)));
            }
            MultiPoly::from_residue_terms(ring.clone(), terms)
        })
        .collect();
    Ok(GeneratorChange::new(group, &scalars, shifts)?)
}

/// Basis of `{y supported on positions : [x, y] = 0 for all x in xs}`.
pub fn centralizer_basis(
    modulus: Modulus,
    n: usize,
    positions: &[(usize, usize)],
    xs: &[Mat<Fp>],
) -> Vec<Mat<Fp>> {
    let p = modulus.get();
    let units: Vec<Mat<Fp>> = positions
        .iter()
        .map(|&(i, j)| Mat::unit(modulus, n, i, j))
        .collect();
    let mut rows = Vec::new();
    for x in xs {
        let brackets: Vec<Vec<u64>> = units
            .iter()
            .map(|e| x.commutator(e).to_residues())
            .collect();
        for entry in 0..n * n {
            rows.push(brackets.iter().map(|b| b[entry]).collect());
        }
    }
    nullspace(rows, positions.len(), p)
        .into_iter()
        .map(|v| {
            let mut m = Mat::zeros_mod(modulus, n);
            for (&c, &(i, j)) in v.iter().zip(positions) {
                m.set(i, j, Fp::new(c as i64, modulus));
            }
            m
        })
        .collect()
}

fn random_combination<R: Rng>(
    modulus: Modulus,
    n: usize,
    basis: &[Mat<Fp>],
    rng: &mut R,
) -> Mat<Fp> {
    basis.iter().fold(Mat::zeros_mod(modulus, n), |acc, b| {
        acc.add(&b.scale(&Fp::new(rng.gen_range(0..modulus.get()) as i64, modulus)))
    })
}

/// A random tuple in `C_r(u)`: each entry uniform in the centralizer of the earlier ones.
pub fn random_commuting_tuple<R: Rng>(
    group: &Arc<BlockUnipotentGroup>,
    r: usize,
    rng: &mut R,
) -> Result<CommutingTuple, OracleError> {
    let positions: Vec<(usize, usize)> =
        group.generators().iter().map(|g| (g.row, g.col)).collect();
    let mut entries: Vec<Mat<Fp>> = Vec::with_capacity(r);
    for _ in 0..r {
        let basis = centralizer_basis(group.modulus(), group.n(), &positions, &entries);
        entries.push(random_combination(group.modulus(), group.n(), &basis, rng));
    }
    Ok(CommutingTuple::new(group, entries)?)
}

/// `k` pairwise commuting nilpotent `n x n` matrices in general position: commuting
/// strictly upper triangular matrices conjugated by a random invertible matrix.
pub fn random_commuting_nilpotents<R: Rng>(
    modulus: Modulus,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Vec<Mat<Fp>> {
    let positions: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut upper: Vec<Mat<Fp>> = Vec::with_capacity(k);
    for _ in 0..k {
        let basis = centralizer_basis(modulus, n, &positions, &upper);
        upper.push(random_combination(modulus, n, &basis, rng));
    }
    let h = random_invertible(modulus, n, rng);
    let h_inv = h.inverse().expect("sampled invertible");
    upper.iter().map(|x| h.mul(x).mul(&h_inv)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unipotent::make_group;

    #[test]
    fn tuple_counts() {
        let g = make_group(&[2, 1], 3).unwrap();
        assert_eq!(
            enumerate_commuting_tuples(&g, 2, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            81
        );
        let h = make_group(&[1, 1, 1], 3).unwrap();
        assert_eq!(
            enumerate_commuting_tuples(&h, 1, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            27
        );
        // Pairs (a, b), (a', b') in F_3^2 with ab' = a'b: 81 - |GL_2(F_3)| = 33, times 3^2 for E_13.
        assert_eq!(
            enumerate_commuting_tuples(&h, 2, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            297
        );
    }

    #[test]
    fn budget_refusal() {
        let g = make_group(&[1, 1, 1], 5).unwrap();
        let err = enumerate_commuting_tuples(&g, 2, 1000).unwrap_err();
        assert_eq!(
            err,
            OracleError::BudgetExceeded {
                required: 15625,
                budget: 1000
            }
        );
    }

    #[test]
    fn solver_free_degrees_are_prime_powers() {
        let g = make_group(&[1, 1], 3).unwrap();
        assert_eq!(HopfSolver::new(&g, 3).unwrap().free_degrees(), &[1, 3, 9]);
        let g5 = make_group(&[1, 1], 5).unwrap();
        assert_eq!(HopfSolver::new(&g5, 2).unwrap().free_degrees(), &[1, 5]);
    }

    #[test]
    fn solver_matches_brute_force_on_tiny_instance() {
        // Every coefficient vector of F_3[t]/(t^9) with zero constant term.
        let g = make_group(&[1, 1], 3).unwrap();
        let mut brute = HashSet::new();
        for code in 0..3i64.pow(8) {
            let coeffs: Vec<i64> = std::iter::once(0)
                .chain((0..8).map(|k| code / 3i64.pow(k) % 3))
                .collect();
            if let Ok(phi) = InfinitesimalSubgroup::from_coeffs(&g, 2, &[coeffs]) {
                brute.insert(phi);
            }
        }
        let solved: HashSet<_> = enumerate_morphisms(&g, 2, DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(brute.len(), 9);
        assert_eq!(brute, solved);
    }

    #[test]
    fn abelian_morphism_counts() {
        let g = make_group(&[1, 1], 3).unwrap();
        assert_eq!(
            enumerate_morphisms_abelian(&g, 2, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            9
        );
        let g = make_group(&[2, 1], 3).unwrap();
        assert_eq!(
            enumerate_morphisms_abelian(&g, 1, DEFAULT_BUDGET)
                .unwrap()
                .len(),
            9
        );
        let h = make_group(&[1, 1, 1], 3).unwrap();
        assert!(matches!(
            enumerate_morphisms_abelian(&h, 1, DEFAULT_BUDGET),
            Err(OracleError::NotAbelian { .. })
        ));
    }

    #[test]
    fn heisenberg_p3_r2_surjectivity() {
        let h = make_group(&[1, 1, 1], 3).unwrap();
        let report = certify_surjectivity(&h, 2, DEFAULT_BUDGET).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.get("morphisms"), 297);
        assert_eq!(report.get("tuples"), 297);
    }

    #[test]
    fn small_bijection() {
        let h = make_group(&[1, 1, 1], 3).unwrap();
        let report = verify_bijection(&h, 2, DEFAULT_BUDGET).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.get("distinct_morphisms"), 297);
    }

    #[test]
    fn random_samples_validate() {
        let g = make_group(&[1, 1, 1, 1], 5).unwrap();
        let solver = HopfSolver::new(&g, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut nontrivial = 0;
        for _ in 0..20 {
            let phi = solver.sample(&mut rng, None).unwrap();
            nontrivial += usize::from(!phi.is_trivial());
        }
        assert!(nontrivial > 10);
    }

    #[test]
    fn reparametrization_commutes() {
        let g = make_group(&[1, 2, 1], 5).unwrap();
        let solver = HopfSolver::new(&g, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = solver.sample(&mut rng, None).unwrap();
        let twisted = reparametrize(&phi, 3, 1).unwrap();
        assert!(phi.commutes_with(&twisted).unwrap());
        assert_eq!(reparametrize(&phi, 1, 0).unwrap(), phi);
    }

    #[test]
    fn small_commutation_and_equivariance() {
        let h = make_group(&[1, 1, 1], 3).unwrap();
        let report =
            verify_commutation_equivalence(&h, 1, SampleSource::AllTuples, DEFAULT_BUDGET).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.get("pairs"), 27 * 27);
        let report = verify_equivariance(&h, 2, 24, 11).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn random_nilpotents_commute() {
        let m = Modulus::new(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs = random_commuting_nilpotents(m, 4, 2, &mut rng);
        assert!(xs[0].commutes_with(&xs[1]));
        assert!(xs.iter().all(Mat::is_nilpotent));
    }
}
