//! Seeded instance generators. Every function they emit has been re-checked
//! with [`check_convexity`](crate::convexity::check_convexity).

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::certificate::check_max_nonneg;
use crate::convexity::{fn_combine, fn_max, is_convex};
use crate::error::{Error, Result};
use crate::instance::{ConvexityParams, Function, Instance, Magma};
use crate::kkt::solve_mp_bruteforce;
use crate::opcalc::OpTerm;
use crate::scalar::{max_of, min_of, Scalar};

pub type GenRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MagmaKind {
    RandomTable,
    CyclicAddition,
    MaxSemilattice,
}

impl MagmaKind {
    pub const ALL: [MagmaKind; 3] = [MagmaKind::RandomTable, MagmaKind::CyclicAddition, MagmaKind::MaxSemilattice];
}

impl fmt::Display for MagmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MagmaKind::RandomTable => "random-table",
            MagmaKind::CyclicAddition => "cyclic-addition",
            MagmaKind::MaxSemilattice => "max-semilattice",
        })
    }
}

impl FromStr for MagmaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random-table" => Ok(MagmaKind::RandomTable),
            "cyclic-addition" => Ok(MagmaKind::CyclicAddition),
            "max-semilattice" => Ok(MagmaKind::MaxSemilattice),
            other => Err(format!("unknown magma kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FnStrategy {
    /// Sample bounded integer functions and keep the convex ones.
    Rejection,
    /// Lower values until every pair satisfies the inequality.
    Repair,
    /// Nonnegative combinations and maxima of known convex seeds.
    Structured,
}

impl FnStrategy {
    pub const ALL: [FnStrategy; 3] = [FnStrategy::Rejection, FnStrategy::Repair, FnStrategy::Structured];
}

impl fmt::Display for FnStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FnStrategy::Rejection => "rejection",
            FnStrategy::Repair => "repair",
            FnStrategy::Structured => "structured",
        })
    }
}

impl FromStr for FnStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rejection" => Ok(FnStrategy::Rejection),
            "repair" => Ok(FnStrategy::Repair),
            "structured" => Ok(FnStrategy::Structured),
            other => Err(format!("unknown function strategy {other:?}")),
        }
    }
}

/// Integer values are drawn from `[-VALUE_RANGE, VALUE_RANGE]`.
pub const VALUE_RANGE: i64 = 4;
/// Draws per function before a strategy gives up.
pub const ATTEMPT_BUDGET: usize = 4000;
/// Attempts per constraint, and restarts, in the constrained-problem generator.
pub const KKT_ATTEMPTS: usize = 16;
/// Repair runs per function; each run is far costlier than one draw.
pub const REPAIR_RUNS: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec<T> {
    pub magma_kind: MagmaKind,
    pub m: usize,
    pub params: ConvexityParams<T>,
    pub fn_strategy: FnStrategy,
    pub seed: u64,
    /// Number of instances.
    pub count: usize,
    /// Functions per instance.
    pub functions: usize,
    /// Only emit families whose pointwise maximum is nonnegative.
    pub max_nonneg: bool,
}

pub fn random_magma(kind: MagmaKind, m: usize, rng: &mut impl Rng) -> Magma {
    match kind {
        MagmaKind::RandomTable => {
            let table = (0..m).map(|_| (0..m).map(|_| rng.random_range(0..m)).collect()).collect();
            Magma::new(table).expect("indices drawn below m")
        }
        MagmaKind::CyclicAddition => Magma::cyclic_addition(m),
        MagmaKind::MaxSemilattice => Magma::max_semilattice(m),
    }
}

fn random_ints<T: Scalar>(m: usize, range: i64, rng: &mut impl Rng) -> Vec<T> {
    (0..m).map(|_| T::from_int(rng.random_range(-range..=range))).collect()
}

/// Arbitrary integer-valued functions, not necessarily convex.
pub fn random_family<T: Scalar>(m: usize, n: usize, range: i64, rng: &mut impl Rng) -> Vec<Function<T>> {
    (0..n).map(|i| Function::new(format!("f{}", i + 1), random_ints(m, range, rng))).collect()
}

fn rejection<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, rng: &mut impl Rng) -> Result<Function<T>> {
    for _ in 0..ATTEMPT_BUDGET {
        let f = Function::new("f", random_ints(magma.size(), VALUE_RANGE, rng));
        if is_convex(magma, params, &f)? {
            return Ok(f);
        }
    }
    Err(Error::Generator(format!("rejection: 0 of {ATTEMPT_BUDGET} draws convex")))
}

/// Outcome of one repair run from a given start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RepairOutcome<T> {
    Converged(Function<T>),
    /// A value fell below the floor.
    Diverged { floor: T },
    /// No fixpoint within the sweep cap.
    Capped { sweeps: usize },
}

/// Repeats `f(x∘y) <- min(f(x∘y), p f(x) + q f(y))` over all pairs until
/// nothing changes, with floor `-(p+q+1) · max|start| · m` and at most
/// `10 m²` sweeps.
///
/// `start` must be integer valued. Lowered values are rounded down to the
/// next integer, so every update drops by at least 1 and a run either
/// reaches an integer fixpoint or trips the floor.
pub fn repair<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, start: Vec<T>) -> RepairOutcome<T> {
    let m = magma.size();
    let scale = max_of(start.iter().map(|v| v.abs()).collect::<Vec<_>>().iter()).unwrap_or_else(T::zero);
    let floor = -((params.p().clone() + params.q().clone() + T::one()) * scale.clone() * T::from_int(m as i64));
    let top = int_ceil(&scale, 0);
    let bottom = -int_ceil(&-floor.clone(), 0);
    let mut f = start;
    let cap = 10 * m * m;
    for _ in 0..cap {
        let mut changed = false;
        for x in 0..m {
            for y in 0..m {
                let z = magma.op(x, y);
                let bound = params.p().clone() * f[x].clone() + params.q().clone() * f[y].clone();
                if f[z] > bound {
                    if bound < floor {
                        return RepairOutcome::Diverged { floor };
                    }
                    f[z] = T::from_int(int_floor(&bound, bottom, top));
                    changed = true;
                }
            }
        }
        if !changed {
            return RepairOutcome::Converged(Function::new("f", f));
        }
    }
    RepairOutcome::Capped { sweeps: cap }
}

/// Least integer `>= v`, searching upward from `from <= v`.
fn int_ceil<T: Scalar>(v: &T, from: i64) -> i64 {
    let mut n = from;
    while T::from_int(n) < *v {
        n = if n == 0 { 1 } else { n * 2 };
    }
    let mut lo = n / 2;
    while lo < n {
        let mid = lo + (n - lo) / 2;
        if T::from_int(mid) < *v {
            lo = mid + 1;
        } else {
            n = mid;
        }
    }
    n
}

/// Greatest integer `<= v` for `lo <= v < hi`.
fn int_floor<T: Scalar>(v: &T, mut lo: i64, mut hi: i64) -> i64 {
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if T::from_int(mid) <= *v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn repair_strategy<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, rng: &mut impl Rng) -> Result<Function<T>> {
    let (mut diverged, mut capped) = (0, 0);
    for _ in 0..REPAIR_RUNS {
        let start = (0..magma.size()).map(|_| T::from_int(rng.random_range(-1..=VALUE_RANGE))).collect();
        match repair(magma, params, start) {
            RepairOutcome::Converged(f) => {
                if is_convex(magma, params, &f)? {
                    return Ok(f);
                }
                return Err(Error::Invariant("repair fixpoint is not convex".into()));
            }
            RepairOutcome::Diverged { .. } => diverged += 1,
            RepairOutcome::Capped { .. } => capped += 1,
        }
    }
    Err(Error::Generator(format!("repair: {diverged} runs hit the floor, {capped} hit the sweep cap")))
}

/// Constants and validated step functions `c·1_A + d`.
fn convex_seeds<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, rng: &mut impl Rng) -> Result<Vec<Function<T>>> {
    let m = magma.size();
    let excess = params.p().clone() + params.q().clone() - T::one();
    let mut seeds = vec![Function::constant("zero", m, T::zero())];
    for c in 1..=2 {
        // constant c satisfies c <= (p+q)c iff (p+q-1)c >= 0
        let c = T::from_int(c);
        if !excess.is_negative() {
            seeds.push(Function::constant("const", m, c.clone()));
        }
        if !excess.is_positive() {
            seeds.push(Function::constant("const", m, -c));
        }
    }
    for _ in 0..8 * m {
        let height = T::from_int(rng.random_range(-VALUE_RANGE..=VALUE_RANGE));
        let offset = T::from_int(rng.random_range(-2..=2));
        let values = (0..m)
            .map(|_| if rng.random_bool(0.5) { height.clone() + offset.clone() } else { offset.clone() })
            .collect();
        let step = Function::new("step", values);
        if is_convex(magma, params, &step)? {
            seeds.push(step);
        }
    }
    Ok(seeds)
}

fn structured<T: Scalar>(magma: &Magma, params: &ConvexityParams<T>, rng: &mut impl Rng) -> Result<Function<T>> {
    let seeds = convex_seeds(magma, params, rng)?;
    fn combination<T: Scalar>(seeds: &[Function<T>], rng: &mut impl Rng) -> Result<Function<T>> {
        let k = rng.random_range(1..=3usize);
        let picked: Vec<Function<T>> = (0..k).map(|_| seeds.choose(rng).expect("nonempty").clone()).collect();
        let weights: Vec<T> = (0..k)
            .map(|_| T::from_int(rng.random_range(1..=3)) / T::from_int(rng.random_range(1..=2)))
            .collect();
        fn_combine(&weights, &picked)
    }
    let mut f = combination(&seeds, rng)?;
    if rng.random_bool(0.5) {
        let g = combination(&seeds, rng)?;
        f = fn_max(&[f, g])?;
    }
    if !is_convex(magma, params, &f)? {
        return Err(Error::Invariant("structured combination lost convexity".into()));
    }
    Ok(f.with_name("f"))
}

/// One `(∘,p,q)`-convex function drawn with `strategy`.
pub fn random_convex_function<T: Scalar>(
    magma: &Magma,
    params: &ConvexityParams<T>,
    strategy: FnStrategy,
    rng: &mut impl Rng,
) -> Result<Function<T>> {
    match strategy {
        FnStrategy::Rejection => rejection(magma, params, rng),
        FnStrategy::Repair => repair_strategy(magma, params, rng),
        FnStrategy::Structured => structured(magma, params, rng),
    }
}

/// Adds the least constant that makes `max_i f_i >= 0` everywhere, when that
/// is sound (`p + q >= 1` for an upward shift). Returns `None` otherwise.
pub fn lift_to_max_nonneg<T: Scalar>(
    fns: &[Function<T>],
    magma: &Magma,
    params: &ConvexityParams<T>,
) -> Result<Option<Vec<Function<T>>>> {
    if check_max_nonneg(fns)?.is_none() {
        return Ok(Some(fns.to_vec()));
    }
    if params.p().clone() + params.q().clone() < T::one() {
        return Ok(None);
    }
    let pointwise: Vec<T> = (0..magma.size())
        .map(|x| max_of(fns.iter().map(|f| f.at(x))).expect("nonempty family"))
        .collect();
    let c = -min_of(&pointwise).expect("nonempty magma");
    let lifted: Vec<Function<T>> = fns
        .iter()
        .map(|f| Function::new(f.name.clone(), f.values.iter().map(|v| v.clone() + c.clone()).collect()))
        .collect();
    for f in &lifted {
        if !is_convex(magma, params, f)? {
            return Err(Error::Invariant("upward shift lost convexity with p + q >= 1".into()));
        }
    }
    Ok(Some(lifted))
}

/// `n` convex functions, optionally lifted or filtered to a nonnegative maximum.
pub fn random_convex_family<T: Scalar>(
    magma: &Magma,
    params: &ConvexityParams<T>,
    n: usize,
    strategy: FnStrategy,
    max_nonneg: bool,
    rng: &mut impl Rng,
) -> Result<Vec<Function<T>>> {
    for _ in 0..ATTEMPT_BUDGET / 20 {
        let fns = (0..n)
            .map(|i| Ok(random_convex_function(magma, params, strategy, rng)?.with_name(format!("f{}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if !max_nonneg {
            return Ok(fns);
        }
        if let Some(lifted) = lift_to_max_nonneg(&fns, magma, params)? {
            return Ok(lifted);
        }
    }
    Err(Error::Generator("no family with nonnegative maximum".into()))
}

/// Instances per `spec`. The same spec always yields the same instances.
pub fn generate_instances<T: Scalar>(spec: &GeneratorSpec<T>) -> Result<Vec<Instance<T>>> {
    if spec.m == 0 {
        return Err(Error::Generator("m must be at least 1".into()));
    }
    if spec.functions == 0 {
        return Err(Error::Generator("need at least one function per instance".into()));
    }
    let mut rng = rng_from_seed(spec.seed);
    (0..spec.count)
        .map(|_| {
            let magma = random_magma(spec.magma_kind, spec.m, &mut rng);
            let fns = random_convex_family(&magma, &spec.params, spec.functions, spec.fn_strategy, spec.max_nonneg, &mut rng)?;
            Instance::new(magma, spec.params.clone(), fns)
        })
        .collect()
}

/// A constrained problem satisfying the multiplier theorem's hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktInstance<T> {
    pub magma: Magma,
    pub params: ConvexityParams<T>,
    pub objective: Function<T>,
    pub constraints: Vec<Function<T>>,
    pub x0: usize,
}

/// Draws convex constraints with a nonempty admissible set and builds an
/// objective whose admissible minimum is exactly 0.
///
/// Constraints are drawn one at a time, each redrawn until it is `<= 0`
/// somewhere on the admissible set so far. The objective is `h - min_A h`
/// when that shift provably keeps convexity, else `max(h, 0)` when that
/// vanishes somewhere on `A`, else `max(f_1, .., f_n, 0)`, which vanishes
/// exactly on `A`.
pub fn random_kkt_instance<T: Scalar>(
    magma: &Magma,
    params: &ConvexityParams<T>,
    constraints: usize,
    strategy: FnStrategy,
    rng: &mut impl Rng,
) -> Result<KktInstance<T>> {
    let m = magma.size();
    let zero = Function::constant("zero", m, T::zero());
    let excess = params.p().clone() + params.q().clone() - T::one();
    'attempt: for _ in 0..KKT_ATTEMPTS {
        let mut admissible: Vec<usize> = (0..m).collect();
        let mut cons = Vec::with_capacity(constraints);
        for i in 0..constraints {
            let mut accepted = None;
            for _ in 0..KKT_ATTEMPTS {
                let f = random_convex_function(magma, params, strategy, rng)?;
                if admissible.iter().any(|&x| !f.at(x).is_positive()) {
                    accepted = Some(f);
                    break;
                }
            }
            let Some(f) = accepted else { continue 'attempt };
            admissible.retain(|&x| !f.at(x).is_positive());
            cons.push(f.with_name(format!("f{}", i + 1)));
        }
        let h = random_convex_function(magma, params, strategy, rng)?;
        let v = min_of(admissible.iter().map(|&x| h.at(x))).expect("admissible set is nonempty");
        // subtracting v is sound when (p+q-1)(-v) >= 0
        let objective = if !(excess.clone() * -v.clone()).is_negative() {
            Function::new("f0", h.values.iter().map(|u| u.clone() - v.clone()).collect())
        } else if !v.is_positive() {
            fn_max(&[h, zero.clone()])?.with_name("f0")
        } else {
            let mut parts = cons.clone();
            parts.push(zero.clone());
            fn_max(&parts)?.with_name("f0")
        };
        if !is_convex(magma, params, &objective)? {
            return Err(Error::Invariant("objective construction lost convexity".into()));
        }
        let minimizers = solve_mp_bruteforce(&objective, &cons)?;
        let Some(&x0) = minimizers.iter().find(|&&x| objective.at(x).is_zero()) else {
            return Err(Error::Invariant("objective has admissible minimum other than 0".into()));
        };
        return Ok(KktInstance { magma: magma.clone(), params: params.clone(), objective, constraints: cons, x0 });
    }
    Err(Error::Generator("no constrained instance with a nonempty admissible set".into()))
}

/// A uniformly shaped random term of depth at most `max_depth`.
pub fn random_term<T: Scalar>(params: &ConvexityParams<T>, max_depth: usize, rng: &mut impl Rng) -> OpTerm<T> {
    if max_depth == 0 || rng.random_bool(0.25) {
        return OpTerm::base(params);
    }
    if rng.random_bool(0.35) {
        OpTerm::swap(random_term(params, max_depth - 1, rng))
    } else {
        let s = random_term(params, max_depth - 1, rng);
        let t = random_term(params, max_depth - 1, rng);
        OpTerm::compose(s, t)
    }
}

/// A rational interval `[lo, hi] ⊂ (0, 1)` with `hi - lo >= 1/100`.
pub fn random_interval<T: Scalar>(rng: &mut impl Rng) -> (T, T) {
    let den: i64 = rng.random_range(100..=1000);
    let width_min = (den + 99) / 100;
    let lo_num = rng.random_range(1..den - width_min);
    let hi_num = rng.random_range(lo_num + width_min..den);
    let d = T::from_int(den);
    (T::from_int(lo_num) / d.clone(), T::from_int(hi_num) / d)
}
