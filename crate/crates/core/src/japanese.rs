//! Distance functions and the inequalities they induce on session rates:
//! `sum_i l_f(M_i) R_{M_i} <= sum_e f(e) C_e`, where `l_f(M)` is the length of
//! a shortest subtree of `M` under the edge lengths `f`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::network::{EdgeSet, Problem};
use crate::numerics::Rational;

/// Entries at or below this bound take the `u64` path; sums over at most 64
/// edges cannot overflow.
const SMALL_ENTRY: u64 = 1 << 56;

/// Nonnegative integer edge lengths, indexed by edge id - 1.
#[derive(Clone)]
pub struct DistanceFunction {
    values: Vec<BigUint>,
    small: Option<Vec<u64>>,
}

impl DistanceFunction {
    pub fn new(values: Vec<BigUint>) -> Self {
        let small = values
            .iter()
            .map(|v| v.to_u64().filter(|&x| x <= SMALL_ENTRY))
            .collect::<Option<Vec<u64>>>();
        DistanceFunction { values, small }
    }

    pub fn from_u64(values: &[u64]) -> Self {
        DistanceFunction::new(values.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn zero(edge_count: usize) -> Self {
        DistanceFunction::from_u64(&vec![0; edge_count])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn small(&self) -> Option<&[u64]> {
        self.small.as_deref()
    }

    /// Value on edge `id` (1-based).
    pub fn get(&self, id: usize) -> &BigUint {
        &self.values[id - 1]
    }

    pub fn max_entry(&self) -> BigUint {
        self.values.iter().max().cloned().unwrap_or_default()
    }

    pub fn support(&self) -> EdgeSet {
        EdgeSet::from_ids(
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, _)| i + 1),
        )
    }

    pub fn scaled(&self, c: &BigUint) -> Self {
        DistanceFunction::new(self.values.iter().map(|v| v * c).collect())
    }

    /// True if `self = c * other` for some positive integer `c`.
    pub fn is_multiple_of(&self, other: &DistanceFunction) -> bool {
        let Some(pivot) = other.values.iter().position(|v| !v.is_zero()) else {
            return false;
        };
        let (q, r) = self.values[pivot].div_rem(&other.values[pivot]);
        if !r.is_zero() || q.is_zero() {
            return false;
        }
        self.values.iter().zip(&other.values).all(|(a, b)| *a == b * &q)
    }

    /// Parses a comma-separated list such as `2,1,3`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigUint>()
                    .map_err(|_| Error::Parse(format!("invalid distance entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DistanceFunction::new(values))
    }

    pub fn check_len(&self, problem: &Problem) -> Result<()> {
        if self.len() != problem.edge_count() {
            return Err(Error::InvalidArgument(format!(
                "distance function has {} entries but the network has {} edges",
                self.len(),
                problem.edge_count()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.values
                .iter()
                .map(|v| match v.to_u64() {
                    Some(x) => json!(x),
                    None => json!(v.to_string()),
                })
                .collect(),
        )
    }
}

impl PartialEq for DistanceFunction {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Eq for DistanceFunction {}

impl std::hash::Hash for DistanceFunction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.values.hash(state);
    }
}

impl fmt::Debug for DistanceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DistanceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub(crate) fn small_length(f: &[u64], t: EdgeSet) -> u64 {
    let mut mask = t.0;
    let mut sum = 0u64;
    while mask != 0 {
        let b = mask.trailing_zeros() as usize;
        sum += f[b];
        mask &= mask - 1;
    }
    sum
}

/// `L_f(T)`: sum of `f` over the subtree's edges.
pub fn subtree_length(f: &DistanceFunction, t: EdgeSet) -> BigUint {
    match f.small() {
        Some(s) => BigUint::from(small_length(s, t)),
        None => t.ids().map(|id| f.get(id)).sum(),
    }
}

/// Minimum length over `trees` and every index attaining it.
pub fn shortest_set(f: &DistanceFunction, trees: &[EdgeSet]) -> (BigUint, Vec<usize>) {
    if let Some(s) = f.small() {
        let lens: Vec<u64> = trees.iter().map(|t| small_length(s, *t)).collect();
        let min = lens.iter().copied().min().unwrap_or(0);
        let idx = (0..lens.len()).filter(|&j| lens[j] == min).collect();
        return (BigUint::from(min), idx);
    }
    let lens: Vec<BigUint> = trees.iter().map(|t| subtree_length(f, *t)).collect();
    let min = lens.iter().min().cloned().unwrap_or_default();
    let idx = (0..lens.len()).filter(|&j| lens[j] == min).collect();
    (min, idx)
}

/// `l_f(M)` for every session of the problem.
pub fn shortest_lengths(problem: &Problem, f: &DistanceFunction) -> Vec<BigUint> {
    problem
        .subtrees
        .iter()
        .map(|trees| shortest_set(f, trees).0)
        .collect()
}

/// True iff `l_f(M) > 0` for at least one session.
pub fn is_nontrivial(problem: &Problem, f: &DistanceFunction) -> bool {
    match f.small() {
        Some(s) => problem
            .subtrees
            .iter()
            .any(|trees| trees.iter().all(|t| small_length(s, *t) > 0)),
        None => shortest_lengths(problem, f).iter().any(|l| !l.is_zero()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub distance: DistanceFunction,
    /// `l_f(M_i)`, aligned with the problem's session order.
    pub coefficients: Vec<BigUint>,
    pub rhs: Rational,
}

pub fn make_inequality(problem: &Problem, f: &DistanceFunction) -> Result<Inequality> {
    f.check_len(problem)?;
    let coefficients = shortest_lengths(problem, f);
    let rhs = problem
        .network
        .edges
        .iter()
        .filter(|e| !f.get(e.id).is_zero())
        .map(|e| Rational::from(f.get(e.id)) * &e.capacity)
        .sum();
    Ok(Inequality {
        distance: f.clone(),
        coefficients,
        rhs,
    })
}

impl Inequality {
    pub fn is_trivial(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_zero())
    }

    /// Divides coefficients and rhs by the gcd of the coefficients. Two
    /// nontrivial inequalities bound the same halfspace iff their normal forms
    /// agree.
    pub fn normalized(&self) -> Result<Inequality> {
        if self.is_trivial() {
            return Err(Error::InvalidArgument("trivial inequality has no normal form".into()));
        }
        let g = self
            .coefficients
            .iter()
            .fold(BigUint::zero(), |acc, c| acc.gcd(c));
        let g_q = Rational::from(&g);
        Ok(Inequality {
            distance: self.distance.clone(),
            coefficients: self.coefficients.iter().map(|c| c / &g).collect(),
            rhs: &self.rhs / &g_q,
        })
    }

    /// `(coefficients, rhs)` of the normal form.
    pub fn normal_key(&self) -> Result<(Vec<BigUint>, Rational)> {
        let n = self.normalized()?;
        Ok((n.coefficients, n.rhs))
    }

    /// Evaluates the left-hand side at a rate vector in session order.
    pub fn lhs_at(&self, rates: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(rates)
            .filter(|(c, r)| !c.is_zero() && !r.is_zero())
            .map(|(c, r)| Rational::from(c) * r)
            .sum()
    }

    pub fn to_record(&self, problem: &Problem) -> Value {
        let mut coeffs = Map::new();
        for (s, c) in problem.sessions.iter().zip(&self.coefficients) {
            let v = match c.to_u64() {
                Some(x) => json!(x),
                None => json!(c.to_string()),
            };
            coeffs.insert(s.id.clone(), v);
        }
        json!({
            "distance": self.distance.to_json(),
            "coefficients": Value::Object(coeffs),
            "rhs": self.rhs.to_string(),
            "trivial": self.is_trivial(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ring_problem, triangle_problem, SessionPolicy};

    fn coeffs(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn triangle_lengths_and_shortest_sets() {
        let p = triangle_problem(Rational::one()).unwrap();
        let g = DistanceFunction::from_u64(&[2, 1, 3]);
        assert_eq!(subtree_length(&g, EdgeSet::from_ids([1, 2])), BigUint::from(3u32));
        // 3->1 is session index 4: both paths have length 3
        let (len, idx) = shortest_set(&g, &p.subtrees[4]);
        assert_eq!(len, BigUint::from(3u32));
        assert_eq!(idx, vec![0, 1]);
        let (len, idx) = shortest_set(&g, &p.subtrees[0]);
        assert_eq!(len, BigUint::from(2u32));
        assert_eq!(idx, vec![0]);
        let zero = DistanceFunction::zero(3);
        let (len, idx) = shortest_set(&zero, &p.subtrees[6]);
        assert!(len.is_zero());
        assert_eq!(idx.len(), 3);
    }

    #[test]
    fn triangle_inequalities() {
        let p = triangle_problem(Rational::one()).unwrap();
        let g = make_inequality(&p, &DistanceFunction::from_u64(&[2, 1, 3])).unwrap();
        assert_eq!(g.coefficients, coeffs(&[2, 2, 1, 1, 3, 3, 3, 3, 3]));
        assert_eq!(g.rhs, Rational::from(6));
        let f = make_inequality(&p, &DistanceFunction::from_u64(&[1, 0, 1])).unwrap();
        assert_eq!(f.coefficients, coeffs(&[1, 1, 0, 0, 1, 1, 1, 1, 1]));
        assert_eq!(f.rhs, Rational::from(2));
        let z = make_inequality(&p, &DistanceFunction::zero(3)).unwrap();
        assert!(z.is_trivial());
        assert!(z.normalized().is_err());
        assert!(make_inequality(&p, &DistanceFunction::zero(2)).is_err());
    }

    #[test]
    fn ring_arc_length() {
        let p = ring_problem(5, SessionPolicy::UnicastBroadcast, Rational::one()).unwrap();
        let g = DistanceFunction::from_u64(&[2, 1, 1, 2, 2]);
        assert_eq!(subtree_length(&g, EdgeSet::from_ids([2, 3])), BigUint::from(2u32));
        assert!(is_nontrivial(&p, &g));
    }

    #[test]
    fn normal_form_divides_by_gcd() {
        let iq = Inequality {
            distance: DistanceFunction::zero(1),
            coefficients: coeffs(&[2, 2, 0]),
            rhs: Rational::from(4),
        };
        let n = iq.normalized().unwrap();
        assert_eq!(n.coefficients, coeffs(&[1, 1, 0]));
        assert_eq!(n.rhs, Rational::from(2));
        assert_eq!(n.normalized().unwrap(), n);
    }

    #[test]
    fn scaled_triangle_inequality_has_same_normal_form() {
        let p = triangle_problem(Rational::one()).unwrap();
        let g = DistanceFunction::from_u64(&[2, 1, 3]);
        let three = BigUint::from(3u32);
        let a = make_inequality(&p, &g).unwrap();
        let b = make_inequality(&p, &g.scaled(&three)).unwrap();
        let tripled: Vec<BigUint> = a.coefficients.iter().map(|c| c * &three).collect();
        assert_eq!(b.coefficients, tripled);
        assert_eq!(b.rhs, &a.rhs * &Rational::from(3));
        assert_eq!(a.normal_key().unwrap(), b.normal_key().unwrap());
    }

    #[test]
    fn parse_distance_vectors() {
        let f = DistanceFunction::parse("2, 1,3").unwrap();
        assert_eq!(f, DistanceFunction::from_u64(&[2, 1, 3]));
        assert!(DistanceFunction::parse("1,-1").is_err());
        let big = DistanceFunction::parse("340282366920938463463374607431768211456,1").unwrap();
        assert!(big.small().is_none());
        assert_eq!(subtree_length(&big, EdgeSet::from_ids([2])), BigUint::from(1u32));
    }

    #[test]
    fn multiples_are_detected() {
        let g = DistanceFunction::from_u64(&[2, 1, 1, 2, 2]);
        assert!(DistanceFunction::from_u64(&[4, 2, 2, 4, 4]).is_multiple_of(&g));
        assert!(!DistanceFunction::from_u64(&[4, 2, 2, 4, 3]).is_multiple_of(&g));
        assert!(!DistanceFunction::zero(5).is_multiple_of(&g));
    }
}
