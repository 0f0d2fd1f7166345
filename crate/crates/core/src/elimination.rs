//! Capacity-independent redundancy between distance-function inequalities.
//!
//! `f` eliminates `g` when `f` vanishes wherever `g` does and, for every
//! session, each `g`-shortest subtree is also `f`-shortest. The relation only
//! depends on the support and the shortest-subtree sets, so candidates are
//! compared through a [`Signature`].

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::japanese::{is_nontrivial, make_inequality, shortest_set, DistanceFunction, Inequality};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::network::{EdgeSet, Problem};
use crate::numerics::{lcm_of_denominators, size_of_integer, Rational, SizeReport};

pub const DEFAULT_ENUMERATION_CAP: u64 = 20_000_000;

/// Support of a distance function together with its shortest-subtree sets,
/// one bitset of subtree indices per session.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub support: EdgeSet,
    shortest: Vec<Vec<u64>>,
}

impl Signature {
    pub fn of(problem: &Problem, f: &DistanceFunction) -> Self {
        let shortest = problem
            .subtrees
            .iter()
            .map(|trees| {
                let mut words = vec![0u64; trees.len().div_ceil(64)];
                for j in shortest_set(f, trees).1 {
                    words[j / 64] |= 1 << (j % 64);
                }
                words
            })
            .collect();
        Signature {
            support: f.support(),
            shortest,
        }
    }

    /// Indices of the shortest subtrees of session `s`.
    pub fn shortest(&self, s: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, word) in self.shortest[s].iter().enumerate() {
            let mut m = *word;
            while m != 0 {
                out.push(w * 64 + m.trailing_zeros() as usize);
                m &= m - 1;
            }
        }
        out
    }

    /// The elimination relation on signatures: smaller support, larger
    /// shortest sets. Reflexive and transitive.
    pub fn dominates(&self, other: &Signature) -> bool {
        self.support.0 & !other.support.0 == 0
            && self
                .shortest
                .iter()
                .zip(&other.shortest)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| y & !x == 0))
    }
}

fn check_pair(problem: &Problem, f: &DistanceFunction, g: &DistanceFunction) -> Result<()> {
    f.check_len(problem)?;
    g.check_len(problem)?;
    if f == g {
        return Err(Error::InvalidArgument(format!(
            "elimination needs two different distance functions, got {f} twice"
        )));
    }
    for h in [f, g] {
        if !is_nontrivial(problem, h) {
            return Err(Error::InvalidArgument(format!("distance function {h} is trivial")));
        }
    }
    Ok(())
}

/// True iff the inequality of `f` makes the inequality of `g` redundant for
/// every capacity assignment.
pub fn eliminates(problem: &Problem, f: &DistanceFunction, g: &DistanceFunction) -> Result<bool> {
    check_pair(problem, f, g)?;
    Ok(eliminates_unchecked(problem, f, g))
}

/// [`eliminates`] without the argument checks, with early exit.
pub(crate) fn eliminates_unchecked(problem: &Problem, f: &DistanceFunction, g: &DistanceFunction) -> bool {
    if f.support().0 & !g.support().0 != 0 {
        return false;
    }
    problem.subtrees.iter().all(|trees| {
        let (_, g_short) = shortest_set(g, trees);
        let (f_min, _) = shortest_set(f, trees);
        g_short
            .iter()
            .all(|&j| crate::japanese::subtree_length(f, trees[j]) == f_min)
    })
}

/// A surviving inequality and the candidates it accounts for.
#[derive(Clone, Debug)]
pub struct Survivor {
    /// Normal form; `distance` is the representative distance function.
    pub inequality: Inequality,
    pub eliminated: Vec<DistanceFunction>,
}

#[derive(Clone, Debug)]
pub struct Description {
    pub max_distance: u64,
    pub survivors: Vec<Survivor>,
}

impl Description {
    pub fn inequalities(&self) -> impl Iterator<Item = &Inequality> {
        self.survivors.iter().map(|s| &s.inequality)
    }

    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    pub fn to_records(&self, problem: &Problem) -> Vec<Value> {
        self.survivors
            .iter()
            .map(|s| {
                let mut rec = s.inequality.to_record(problem);
                rec["max_distance"] = json!(self.max_distance);
                rec["provenance"] = Value::Array(s.eliminated.iter().map(|d| d.to_json()).collect());
                rec
            })
            .collect()
    }
}

/// Cheaper-looking representative first: smaller maximum entry, then
/// lexicographically smaller values.
fn representative_order(a: &DistanceFunction, b: &DistanceFunction) -> std::cmp::Ordering {
    a.max_entry()
        .cmp(&b.max_entry())
        .then_with(|| a.values().cmp(b.values()))
}

/// Minimal description relative to all distance functions with entries in
/// `0..=max_distance`.
pub fn minimal_description(problem: &Problem, max_distance: u64, cap: u64) -> Result<Description> {
    let candidates = bounded_candidates(problem.edge_count(), max_distance, cap)?;
    description_from_candidates(problem, candidates, max_distance)
}

/// Every vector in `{0,...,max}^n`, in odometer order.
pub fn bounded_candidates(
    n: usize,
    max: u64,
    cap: u64,
) -> Result<impl Iterator<Item = DistanceFunction>> {
    if max == 0 {
        return Err(Error::InvalidArgument("maximum distance must be at least 1".into()));
    }
    let total = (max as u128 + 1)
        .checked_pow(n as u32)
        .filter(|&t| t <= cap as u128)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{}^{} candidate distance functions exceed the enumeration cap {}",
                max + 1,
                n,
                cap
            ))
        })?;
    let mut cur = vec![0u64; n];
    let mut left = total;
    Ok(std::iter::from_fn(move || {
        if left == 0 {
            return None;
        }
        left -= 1;
        let out = DistanceFunction::from_u64(&cur);
        for x in cur.iter_mut() {
            if *x < max {
                *x += 1;
                break;
            }
            *x = 0;
        }
        Some(out)
    }))
}

/// Minimal description over an explicit candidate family. The result does
/// not depend on the order of `candidates`.
pub fn description_from_candidates(
    problem: &Problem,
    candidates: impl IntoIterator<Item = DistanceFunction>,
    max_distance: u64,
) -> Result<Description> {
    // Candidates with equal signatures eliminate each other; keep one per class.
    let mut classes: HashMap<Signature, Vec<DistanceFunction>> = HashMap::new();
    for f in candidates {
        f.check_len(problem)?;
        if !is_nontrivial(problem, &f) {
            continue;
        }
        classes.entry(Signature::of(problem, &f)).or_default().push(f);
    }
    let mut sigs: Vec<Signature> = classes.keys().cloned().collect();
    sigs.sort();
    let minimal: Vec<&Signature> = sigs
        .iter()
        .filter(|s| !sigs.iter().any(|t| t != *s && t.dominates(s)))
        .collect();

    struct Kept<'a> {
        sig: &'a Signature,
        inequality: Inequality,
        key: (Vec<BigUint>, Rational),
    }
    let mut kept: Vec<Kept> = Vec::new();
    for sig in minimal {
        let rep = classes[sig]
            .iter()
            .min_by(|a, b| representative_order(a, b))
            .expect("classes are nonempty");
        let inequality = make_inequality(problem, rep)?.normalized()?;
        let key = (inequality.coefficients.clone(), inequality.rhs.clone());
        kept.push(Kept {
            sig,
            inequality,
            key,
        });
    }
    kept.sort_by(|a, b| {
        a.key
            .cmp(&b.key)
            .then_with(|| representative_order(&a.inequality.distance, &b.inequality.distance))
    });
    // Distinct minimal classes can still induce the same halfspace.
    let mut survivors: Vec<(Kept, Vec<DistanceFunction>)> = Vec::new();
    let mut merged: Vec<(usize, &Signature)> = Vec::new();
    for k in kept {
        match survivors.iter().position(|(s, _)| s.key == k.key) {
            Some(i) => merged.push((i, k.sig)),
            None => survivors.push((k, Vec::new())),
        }
    }

    let merged_into: BTreeMap<&Signature, usize> = merged.iter().map(|(i, s)| (*s, *i)).collect();
    for sig in &sigs {
        let owner = survivors
            .iter()
            .position(|(k, _)| k.sig.dominates(sig))
            .or_else(|| merged_into.get(sig).copied())
            .ok_or_else(|| Error::Internal("candidate not accounted for by any survivor".into()))?;
        for f in &classes[sig] {
            if *f != survivors[owner].0.inequality.distance {
                survivors[owner].1.push(f.clone());
            }
        }
    }

    let survivors = survivors
        .into_iter()
        .map(|(k, mut eliminated)| {
            eliminated.sort_by(|a, b| a.values().cmp(b.values()));
            Survivor {
                inequality: k.inequality,
                eliminated,
            }
        })
        .collect();
    Ok(Description {
        max_distance,
        survivors,
    })
}

/// Homogeneous system `A g <= 0` over one variable per edge whose
/// nonnegative integral solutions are the distance functions eliminating `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationSystem {
    pub matrix: Vec<Vec<i8>>,
    pub labels: Vec<String>,
}

impl EliminationSystem {
    pub fn num_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn satisfied_by(&self, g: &[BigUint]) -> bool {
        self.matrix.iter().all(|row| {
            let (mut pos, mut neg) = (BigUint::zero(), BigUint::zero());
            for (a, x) in row.iter().zip(g) {
                match a {
                    1 => pos += x,
                    -1 => neg += x,
                    _ => {}
                }
            }
            pos <= neg
        })
    }

    pub fn entries_are_unit(&self) -> bool {
        self.matrix.iter().flatten().all(|a| (-1..=1).contains(a))
    }
}

pub fn build_elimination_system(problem: &Problem, f: &DistanceFunction) -> Result<EliminationSystem> {
    f.check_len(problem)?;
    if !is_nontrivial(problem, f) {
        return Err(Error::InvalidArgument(format!("distance function {f} is trivial")));
    }
    let n = problem.edge_count();
    let incidence = |t: EdgeSet| -> Vec<i8> { (1..=n).map(|e| t.contains(e) as i8).collect() };
    let mut rows: Vec<Vec<i8>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push = |row: Vec<i8>, rows: &mut Vec<Vec<i8>>| {
        if seen.insert(row.clone()) {
            rows.push(row);
        }
    };
    for trees in &problem.subtrees {
        for j in shortest_set(f, trees).1 {
            let t = incidence(trees[j]);
            for (k, other) in trees.iter().enumerate() {
                if k == j {
                    continue;
                }
                let o = incidence(*other);
                push(t.iter().zip(&o).map(|(a, b)| a - b).collect(), &mut rows);
            }
        }
    }
    for e in 0..n {
        let mut row = vec![0i8; n];
        row[e] = -1;
        push(row, &mut rows);
    }
    for e in 0..n {
        if f.values()[e].is_zero() {
            let mut row = vec![0i8; n];
            row[e] = 1;
            push(row, &mut rows);
        }
    }
    Ok(EliminationSystem {
        matrix: rows,
        labels: (1..=n).map(|e| format!("g{e}")).collect(),
    })
}

/// Outcome of searching for a small integral eliminator of `f`.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub solution: DistanceFunction,
    pub max_entry_size: SizeReport,
    pub bound_bits: u64,
    pub within_bound: bool,
    pub solves_system: bool,
    /// False when the LP produced nothing usable and `solution` is `f` itself.
    pub from_lp: bool,
}

impl BoundReport {
    pub fn to_record(&self) -> Value {
        json!({
            "solution": self.solution.to_json(),
            "max_entry_bits": self.max_entry_size.bits,
            "bound_bits": self.bound_bits,
            "within_bound": self.within_bound,
            "solves_system": self.solves_system,
            "from_lp": self.from_lp,
        })
    }
}

/// `24|E|^3 + 8|E|^2`.
pub fn entry_size_bound(edge_count: usize) -> u64 {
    let n = edge_count as u64;
    24 * n * n * n + 8 * n * n
}

/// Solves the elimination system of `f` for a vertex solution normalized on
/// one of `f`'s shortest subtrees, clears denominators, and compares the size
/// of the largest entry against [`entry_size_bound`].
pub fn check_entry_size_bound(problem: &Problem, f: &DistanceFunction) -> Result<BoundReport> {
    let system = build_elimination_system(problem, f)?;
    let n = problem.edge_count();
    let mut lp = LinearProgram::new(n);
    for row in &system.matrix {
        let terms: Vec<(usize, Rational)> = row
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0)
            .map(|(e, a)| (e, Rational::from(*a as i64)))
            .collect();
        lp.add_sparse(&terms, Relation::Le, Rational::zero());
    }
    let anchor = problem
        .subtrees
        .iter()
        .find_map(|trees| {
            let (len, idx) = shortest_set(f, trees);
            (!len.is_zero()).then(|| trees[idx[0]])
        })
        .expect("nontrivial f has a session with positive shortest length");
    let terms: Vec<(usize, Rational)> = anchor.ids().map(|e| (e - 1, Rational::one())).collect();
    lp.add_sparse(&terms, Relation::Ge, Rational::one());
    lp.set_objective(vec![-Rational::one(); n]);

    let lp_solution = match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let scale = Rational::from_integer(lcm_of_denominators(&x));
            x.iter()
                .map(|v| (v * &scale).to_biguint())
                .collect::<Option<Vec<BigUint>>>()
        }
        _ => None,
    };
    let (values, from_lp) = match lp_solution {
        Some(v) => (v, true),
        None => (f.values().to_vec(), false),
    };
    let solution = DistanceFunction::new(values);
    let max_entry_size = size_of_integer(&solution.max_entry());
    let bound_bits = entry_size_bound(n);
    Ok(BoundReport {
        solves_system: system.satisfied_by(solution.values()),
        within_bound: max_entry_size.bits <= bound_bits,
        max_entry_size,
        bound_bits,
        solution,
        from_lp,
    })
}
