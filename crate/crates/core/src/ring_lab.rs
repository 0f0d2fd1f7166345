//! Constructions on undirected rings: a distance function whose inequality
//! needs exponentially large entries to be eliminated, its extension to graphs
//! with a long cycle, and the randomized rounding that shows most distance
//! functions are eliminated by ones with polynomially bounded entries.
//!
//! Edge `i` of a ring joins vertices `i` and `i + 1`, edge `|E|` closes it.

use num_bigint::{BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::elimination::bounded_candidates;
use crate::error::{Error, Result};
use crate::japanese::{is_nontrivial, small_length, subtree_length, DistanceFunction};
use crate::network::{enumerate_arc_intervals, ring_problem, EdgeSet, Network, Problem, SessionPolicy};
use crate::numerics::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RingConfig {
    pub edge_count: usize,
    pub policy: SessionPolicy,
}

impl RingConfig {
    pub fn new(edge_count: usize, policy: SessionPolicy) -> Result<Self> {
        if edge_count < 3 {
            return Err(Error::InvalidArgument("a ring needs at least 3 edges".into()));
        }
        Ok(RingConfig { edge_count, policy })
    }

    pub fn problem(&self) -> Result<Problem> {
        ring_problem(self.edge_count, self.policy, Rational::one())
    }
}

/// `2^floor((|E|-2)/3)`.
pub fn ring_beta(edge_count: usize) -> BigUint {
    BigUint::one() << ((edge_count.saturating_sub(2)) / 3)
}

/// `beta` on edges `e = 1 mod 3`, `2^floor((e-2)/3)` elsewhere.
pub fn ring_lower_bound_distance(edge_count: usize) -> Result<DistanceFunction> {
    if edge_count < 5 {
        return Err(Error::InvalidArgument(format!(
            "the construction needs at least 5 edges, got {edge_count}"
        )));
    }
    let beta = ring_beta(edge_count);
    Ok(DistanceFunction::new(
        (1..=edge_count)
            .map(|e| {
                if e % 3 == 1 {
                    beta.clone()
                } else {
                    BigUint::one() << ((e - 2) / 3)
                }
            })
            .collect(),
    ))
}

/// The relations any eliminator of [`ring_lower_bound_distance`] must obey:
/// the maximum is attained on every edge `e = 1 mod 3`,
/// `f(3s-4) + f(3s-3) = f(3s-1)` for `2 <= s <= |E|/3`, and
/// `f(3s-4) = f(3s-3)` for `2 <= s <= (|E|+1)/3`.
pub fn satisfies_forced_relations(f: &DistanceFunction, edge_count: usize) -> bool {
    if f.len() != edge_count || edge_count < 5 {
        return false;
    }
    let at = |e: usize| f.get(e);
    let max = f.max_entry();
    if (1..=edge_count).filter(|e| e % 3 == 1).any(|e| *at(e) != max) {
        return false;
    }
    if (2..=edge_count / 3).any(|s| at(3 * s - 4) + at(3 * s - 3) != *at(3 * s - 1)) {
        return false;
    }
    (2..=(edge_count + 1) / 3).all(|s| at(3 * s - 4) == at(3 * s - 3))
}

/// Outcome of the exhaustive search for small eliminators.
#[derive(Clone, Debug)]
pub struct LowerBoundReport {
    pub edge_count: usize,
    pub f_cap: u64,
    pub beta: BigUint,
    pub candidates: u64,
    /// Nontrivial eliminators that are not multiples of the target.
    pub eliminators: Vec<DistanceFunction>,
    /// Proper multiples of the target, which induce the same inequality.
    pub multiples: Vec<DistanceFunction>,
}

impl LowerBoundReport {
    pub fn holds(&self) -> bool {
        self.eliminators.is_empty()
    }

    pub fn to_record(&self) -> Value {
        json!({
            "edge_count": self.edge_count,
            "f_cap": self.f_cap,
            "beta": self.beta.to_string(),
            "candidates": self.candidates,
            "holds": self.holds(),
            "eliminators": self.eliminators.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
            "multiples": self.multiples.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Searches every `f` with entries in `0..=f_cap` for an eliminator of
/// [`ring_lower_bound_distance`] under the given session policy.
pub fn verify_ring_lower_bound(
    edge_count: usize,
    f_cap: u64,
    policy: SessionPolicy,
    cap: u64,
) -> Result<LowerBoundReport> {
    let g = ring_lower_bound_distance(edge_count)?;
    let problem = ring_problem(edge_count, policy, Rational::one())?;
    let candidates = bounded_candidates(edge_count, f_cap, cap)?;
    let gs = g.small().expect("entries are far below 2^56");

    // Per session: every subtree, and the g-shortest ones. Larger sessions
    // first since they reject most candidates.
    let mut sessions: Vec<(&[EdgeSet], Vec<EdgeSet>)> = problem
        .subtrees
        .iter()
        .map(|trees| {
            let min = trees.iter().map(|t| small_length(gs, *t)).min().unwrap_or(0);
            let short = trees.iter().copied().filter(|t| small_length(gs, *t) == min).collect();
            (&trees[..], short)
        })
        .collect();
    sessions.sort_by_key(|(trees, _)| std::cmp::Reverse(trees.len()));
    let g_support = g.support();

    let mut report = LowerBoundReport {
        edge_count,
        f_cap,
        beta: ring_beta(edge_count),
        candidates: 0,
        eliminators: Vec::new(),
        multiples: Vec::new(),
    };
    for f in candidates {
        report.candidates += 1;
        let fs = f.small().expect("candidates are small");
        if f.support().0 & !g_support.0 != 0 {
            continue;
        }
        let keeps_shortest = sessions.iter().all(|(trees, short)| {
            let min = trees.iter().map(|t| small_length(fs, *t)).min().unwrap_or(0);
            short.iter().all(|t| small_length(fs, *t) == min)
        });
        if !keeps_shortest || f == g || !is_nontrivial(&problem, &f) {
            continue;
        }
        if f.is_multiple_of(&g) {
            report.multiples.push(f);
        } else {
            report.eliminators.push(f);
        }
    }
    Ok(report)
}

/// Longest simple cycle length of an undirected graph, by exhaustive search.
pub fn longest_cycle(net: &Network) -> usize {
    let n = net.vertex_count;
    let mut adj = vec![Vec::new(); n + 1];
    for e in &net.edges {
        adj[e.tail].push(e.head);
        adj[e.head].push(e.tail);
    }
    fn walk(adj: &[Vec<usize>], start: usize, v: usize, depth: usize, seen: &mut [bool], best: &mut usize) {
        for &w in &adj[v] {
            if w == start && depth >= 3 {
                *best = (*best).max(depth);
            } else if w > start && !seen[w] {
                seen[w] = true;
                walk(adj, start, w, depth + 1, seen, best);
                seen[w] = false;
            }
        }
    }
    let mut best = 0;
    let mut seen = vec![false; n + 1];
    for s in 1..=n {
        seen[s] = true;
        walk(&adj, s, s, 1, &mut seen, &mut best);
        seen[s] = false;
    }
    best
}

/// Vertex sequence of the closed walk given by `cycle`, if it is a simple cycle.
fn cycle_vertices(net: &Network, cycle: &[usize]) -> Option<Vec<usize>> {
    let k = cycle.len();
    if k < 3 || cycle.iter().any(|&e| e == 0 || e > net.edge_count()) {
        return None;
    }
    let ends = |id: usize| {
        let e = net.edge(id);
        (e.tail, e.head)
    };
    let (a, b) = ends(cycle[0]);
    let (c, d) = ends(cycle[1]);
    let mut v = if b == c || b == d { a } else { b };
    let mut verts = vec![v];
    for &id in cycle {
        let (x, y) = ends(id);
        v = if x == v {
            y
        } else if y == v {
            x
        } else {
            return None;
        };
        verts.push(v);
    }
    if verts[k] != verts[0] {
        return None;
    }
    verts.pop();
    let mut sorted = verts.clone();
    sorted.sort_unstable();
    sorted.dedup();
    (sorted.len() == k).then_some(verts)
}

/// Lays [`ring_lower_bound_distance`] along a maximum cycle (in the given edge
/// order) and puts `1 + |C| * beta` on every other edge, so no shortest
/// subtree leaves the cycle when it does not have to.
pub fn embed_on_cycle(net: &Network, cycle: &[usize]) -> Result<DistanceFunction> {
    if net.directed {
        return Err(Error::InvalidArgument("cycle embedding needs an undirected graph".into()));
    }
    if cycle_vertices(net, cycle).is_none() {
        return Err(Error::InvalidArgument(format!(
            "edges {cycle:?} do not form a simple cycle in the given order"
        )));
    }
    let longest = longest_cycle(net);
    if cycle.len() != longest {
        return Err(Error::InvalidArgument(format!(
            "cycle has length {} but the longest cycle has length {longest}",
            cycle.len()
        )));
    }
    let on_cycle = ring_lower_bound_distance(cycle.len())?;
    let off = BigUint::one() + ring_beta(cycle.len()) * BigUint::from(cycle.len());
    let mut values = vec![off; net.edge_count()];
    for (pos, &id) in cycle.iter().enumerate() {
        values[id - 1] = on_cycle.values()[pos].clone();
    }
    Ok(DistanceFunction::new(values))
}

/// `g` rounded down to multiples of `phi = floor(g_max / |E|^m)`.
#[derive(Clone, Debug)]
pub struct Rounding {
    pub f: DistanceFunction,
    pub phi: BigUint,
}

pub fn round_down(g: &DistanceFunction, m: u32) -> Result<Rounding> {
    let scale = BigUint::from(g.len()).pow(m);
    let phi = g.max_entry() / &scale;
    if phi.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "maximum entry {} is below |E|^m = {scale}, so the rounding grid is zero",
            g.max_entry()
        )));
    }
    let f = DistanceFunction::new(g.values().iter().map(|v| v - (v % &phi)).collect());
    Ok(Rounding { f, phi })
}

/// True iff for every ordered pair of edge-disjoint arcs, `g(E1) <= g(E2)`
/// implies `f(E1) <= f(E2)`.
pub fn order_preserving(f: &DistanceFunction, g: &DistanceFunction, arcs: &[EdgeSet]) -> bool {
    let total = |h: &DistanceFunction| -> Vec<BigUint> { arcs.iter().map(|a| subtree_length(h, *a)).collect() };
    if let (Some(fs), Some(gs)) = (f.small(), g.small()) {
        let lf: Vec<u64> = arcs.iter().map(|a| small_length(fs, *a)).collect();
        let lg: Vec<u64> = arcs.iter().map(|a| small_length(gs, *a)).collect();
        return disjoint_pairs(arcs).all(|(i, j)| lg[i] > lg[j] || lf[i] <= lf[j]);
    }
    let (lf, lg) = (total(f), total(g));
    disjoint_pairs(arcs).all(|(i, j)| lg[i] > lg[j] || lf[i] <= lf[j])
}

fn disjoint_pairs(arcs: &[EdgeSet]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..arcs.len()).flat_map(move |i| {
        (0..arcs.len())
            .filter(move |&j| i != j && arcs[i].is_disjoint(&arcs[j]))
            .map(move |j| (i, j))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundingParams {
    pub m: u32,
    pub g_max: BigUint,
    pub trials: u64,
    pub seed: u64,
}

impl RoundingParams {
    /// `|E|^m / (1 - |E|^m / g_max)`, defined once `g_max > |E|^m`.
    pub fn threshold(&self, edge_count: usize) -> Result<BigRational> {
        let scale = BigUint::from(edge_count).pow(self.m);
        if self.g_max <= scale {
            return Err(Error::InvalidArgument(format!(
                "g_max = {} must exceed |E|^m = {scale}",
                self.g_max
            )));
        }
        let num = Rational::from(&(&scale * &self.g_max)).to_big();
        let den = Rational::from(&(&self.g_max - &scale)).to_big();
        Ok(num / den)
    }

    pub fn validate(&self, edge_count: usize) -> Result<BigRational> {
        if self.m < 6 {
            return Err(Error::InvalidArgument(format!("m must be at least 6, got {}", self.m)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("at least one trial is required".into()));
        }
        let threshold = self.threshold(edge_count)?;
        if Rational::from(&self.g_max).to_big() <= threshold {
            return Err(Error::InvalidArgument(format!(
                "g_max = {} does not exceed the threshold {threshold}",
                self.g_max
            )));
        }
        Ok(threshold)
    }

    /// `1 - 4/|E|^(m-5) - 1/|E|^(m(|E|-1))`.
    pub fn success_bound(&self, edge_count: usize) -> Rational {
        let n = BigUint::from(edge_count);
        let a = Rational::from(&n.pow(self.m - 5));
        let b = Rational::from(&n.pow(self.m * (edge_count as u32 - 1)));
        Rational::one() - &(Rational::from(4) / &a) - &(Rational::one() / &b)
    }
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub g: DistanceFunction,
    pub f: DistanceFunction,
    pub order_preserving: bool,
    /// At least two edges with `f(e) > 0`.
    pub two_positive: bool,
    /// Some session has positive shortest length under `f`.
    pub nontrivial: bool,
    /// `max f / phi <= threshold`.
    pub scaled_within: bool,
    /// Disjoint arc pairs whose residual `|dg - df|` reached `phi |E|`.
    pub residual_violations: u64,
    pub pairs: u64,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.order_preserving && self.two_positive && self.scaled_within
    }
}

/// Rounds one given `g` and evaluates every success condition.
pub fn rounding_trial(
    problem: &Problem,
    arcs: &[EdgeSet],
    g: &DistanceFunction,
    m: u32,
    threshold: &BigRational,
) -> Result<TrialOutcome> {
    let Rounding { f, phi } = round_down(g, m)?;
    let n = g.len();
    let limit = &phi * BigUint::from(n);
    let lf: Vec<BigUint> = arcs.iter().map(|a| subtree_length(&f, *a)).collect();
    let lg: Vec<BigUint> = arcs.iter().map(|a| subtree_length(g, *a)).collect();
    let (mut residual_violations, mut pairs) = (0, 0);
    for (i, j) in disjoint_pairs(arcs) {
        pairs += 1;
        // dg - df = (g_i - f_i) - (g_j - f_j), and g >= f arcwise
        let (ri, rj) = (&lg[i] - &lf[i], &lg[j] - &lf[j]);
        let residual = if ri >= rj { ri - rj } else { rj - ri };
        if residual >= limit {
            residual_violations += 1;
        }
    }
    let scaled = BigRational::new(f.max_entry().into(), phi.clone().into());
    Ok(TrialOutcome {
        order_preserving: order_preserving(&f, g, arcs),
        two_positive: f.values().iter().filter(|v| !v.is_zero()).count() >= 2,
        nontrivial: is_nontrivial(problem, &f),
        scaled_within: &scaled <= threshold,
        residual_violations,
        pairs,
        g: g.clone(),
        f,
    })
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub edge_count: usize,
    pub m: u32,
    pub g_max: BigUint,
    pub phi: BigUint,
    pub trials: u64,
    pub seed: u64,
    pub successes: u64,
    pub nontrivial: u64,
    pub residual_violations: u64,
    pub pairs: u64,
    pub success_bound: Rational,
}

impl ExperimentReport {
    pub fn empirical(&self) -> Rational {
        Rational::new(self.successes, self.trials).expect("trials > 0")
    }

    pub fn to_record(&self) -> Value {
        json!({
            "edge_count": self.edge_count,
            "m": self.m,
            "g_max": self.g_max.to_string(),
            "phi": self.phi.to_string(),
            "trials": self.trials,
            "seed": self.seed,
            "successes": self.successes,
            "empirical": self.empirical().to_string(),
            "success_bound": self.success_bound.to_string(),
            "nontrivial": self.nontrivial,
            "residual_violations": self.residual_violations,
            "pairs": self.pairs,
        })
    }
}

/// Random `g` for trial `trial`: `g(|E|) = g_max`, the other entries uniform
/// on `0..=g_max`. Each trial draws from its own stream of the seeded
/// generator, so trials are reproducible independently.
pub fn sample_distance(edge_count: usize, g_max: &BigUint, seed: u64, trial: u64) -> DistanceFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let bound = g_max + BigUint::one();
    let mut values: Vec<BigUint> = (1..edge_count).map(|_| rng.gen_biguint_below(&bound)).collect();
    values.push(g_max.clone());
    DistanceFunction::new(values)
}

pub fn rounding_experiment(ring: &RingConfig, params: &RoundingParams) -> Result<ExperimentReport> {
    let threshold = params.validate(ring.edge_count)?;
    let problem = ring.problem()?;
    let arcs = enumerate_arc_intervals(&problem.network)?;
    let phi = &params.g_max / BigUint::from(ring.edge_count).pow(params.m);
    let mut report = ExperimentReport {
        edge_count: ring.edge_count,
        m: params.m,
        g_max: params.g_max.clone(),
        phi,
        trials: params.trials,
        seed: params.seed,
        successes: 0,
        nontrivial: 0,
        residual_violations: 0,
        pairs: 0,
        success_bound: params.success_bound(ring.edge_count),
    };
    for trial in 0..params.trials {
        let g = sample_distance(ring.edge_count, &params.g_max, params.seed, trial);
        let out = rounding_trial(&problem, &arcs, &g, params.m, &threshold)?;
        report.successes += out.success() as u64;
        report.nontrivial += out.nontrivial as u64;
        report.residual_violations += out.residual_violations;
        report.pairs += out.pairs;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ring_network, triangle_problem};

    fn d(v: &[u64]) -> DistanceFunction {
        DistanceFunction::from_u64(v)
    }

    #[test]
    fn lower_bound_distance_values() {
        assert_eq!(ring_lower_bound_distance(5).unwrap(), d(&[2, 1, 1, 2, 2]));
        assert_eq!(ring_lower_bound_distance(8).unwrap(), d(&[4, 1, 1, 4, 2, 2, 4, 4]));
        assert!(ring_lower_bound_distance(4).is_err());
        for n in 5..=32 {
            let g = ring_lower_bound_distance(n).unwrap();
            assert_eq!(g.max_entry(), ring_beta(n));
        }
    }

    #[test]
    fn forced_relations() {
        let g = ring_lower_bound_distance(8).unwrap();
        assert!(satisfies_forced_relations(&g, 8));
        assert!(satisfies_forced_relations(&g.scaled(&BigUint::from(3u32)), 8));
        assert!(!satisfies_forced_relations(&d(&[1; 8]), 8));
        assert!(!satisfies_forced_relations(&g, 7));
    }

    #[test]
    fn small_ring_search() {
        let r = verify_ring_lower_bound(5, 1, SessionPolicy::AllMulticast, 1 << 20).unwrap();
        assert_eq!(r.candidates, 32);
        assert!(r.holds() && r.multiples.is_empty());
        let cap = verify_ring_lower_bound(5, 1, SessionPolicy::AllMulticast, 31);
        assert!(matches!(cap, Err(Error::Resource(_))));
    }

    #[test]
    fn embedding() {
        let ring = ring_network(5, Rational::one()).unwrap();
        let g = embed_on_cycle(&ring, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(g, ring_lower_bound_distance(5).unwrap());

        let mut edges: Vec<_> = (1..=5).map(|i| (i, i % 5 + 1, Rational::one())).collect();
        edges.push((1, 3, Rational::one()));
        let chord = Network::new(false, 5, edges).unwrap();
        let g = embed_on_cycle(&chord, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(g, d(&[2, 1, 1, 2, 2, 11]));
        assert!(embed_on_cycle(&chord, &[1, 2, 6, 4, 5]).is_err());
        assert!(embed_on_cycle(&chord, &[1, 3, 2, 4, 5]).is_err());
        assert!(embed_on_cycle(&chord, &[1, 2, 3, 4]).is_err());
    }

    #[test]
    fn longest_cycles() {
        let tri = triangle_problem(Rational::one()).unwrap();
        assert_eq!(longest_cycle(&tri.network), 3);
        let path = Network::new(false, 3, vec![(1, 2, Rational::one()), (2, 3, Rational::one())]).unwrap();
        assert_eq!(longest_cycle(&path), 0);
    }

    #[test]
    fn rounding_grid() {
        let g_max = BigUint::from(8u32).pow(7);
        let mut v: Vec<BigUint> = [13u64, 7, 16, 0, 1, 9, 64].iter().map(|&x| BigUint::from(x)).collect();
        v.push(g_max.clone());
        let r = round_down(&DistanceFunction::new(v), 6).unwrap();
        assert_eq!(r.phi, BigUint::from(8u32));
        assert_eq!(&r.f.values()[..7], &d(&[8, 0, 16, 0, 0, 8, 64]).values()[..]);
        assert!(round_down(&d(&[5, 5, 5, 5, 5, 5, 5, 5]), 6).is_err());
        let aligned = d(&[8, 16, 24, 0, 8, 8, 8, 8 * 8 * 8 * 8 * 8 * 8 * 8]);
        assert_eq!(round_down(&aligned, 6).unwrap().f, aligned);
    }

    #[test]
    fn parameters() {
        let p = RoundingParams {
            m: 6,
            g_max: BigUint::from(8u32).pow(7),
            trials: 1,
            seed: 0,
        };
        let t = p.validate(8).unwrap();
        assert_eq!(t, BigRational::new(BigUint::from(8u32).pow(7).into(), 7u32.into()));
        assert!(RoundingParams { m: 5, ..p.clone() }.validate(8).is_err());
        assert!(RoundingParams { g_max: BigUint::from(100u32), ..p.clone() }.validate(8).is_err());
        let b = p.success_bound(8);
        assert!(b < Rational::new(1, 2).unwrap());
        assert!(b > Rational::new(49, 100).unwrap());
    }

    #[test]
    fn order_preservation() {
        let ring = ring_network(3, Rational::one()).unwrap();
        let arcs = enumerate_arc_intervals(&ring).unwrap();
        let g = d(&[3, 1, 2]);
        assert!(order_preserving(&g, &g, &arcs));
        assert!(order_preserving(&g.scaled(&BigUint::from(5u32)), &g, &arcs));
        // {e1} vs {e2,e3} ties under g but not under f
        assert!(!order_preserving(&d(&[2, 0, 1]), &g, &arcs));
    }

    #[test]
    fn degenerate_trial() {
        let ring = RingConfig::new(8, SessionPolicy::AllMulticast).unwrap();
        let params = RoundingParams {
            m: 6,
            g_max: BigUint::from(8u32).pow(7),
            trials: 1,
            seed: 7,
        };
        let threshold = params.validate(8).unwrap();
        let problem = ring.problem().unwrap();
        let arcs = enumerate_arc_intervals(&problem.network).unwrap();
        let g = DistanceFunction::new(vec![params.g_max.clone(); 8]);
        let out = rounding_trial(&problem, &arcs, &g, 6, &threshold).unwrap();
        assert!(out.success() && out.nontrivial);
        assert_eq!(out.f, g);
        assert_eq!(out.residual_violations, 0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let g_max = BigUint::from(1000u32);
        let a = sample_distance(8, &g_max, 42, 3);
        assert_eq!(a, sample_distance(8, &g_max, 42, 3));
        assert_ne!(a, sample_distance(8, &g_max, 42, 4));
        assert_eq!(a.get(8), &g_max);
        assert!(a.max_entry() <= g_max);
    }
}
