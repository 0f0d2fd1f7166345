//! Rate-tuple feasibility over subtree flows, boundary points, and the
//! hyperplane characterization of boundary rate-tuples.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::japanese::{make_inequality, shortest_set, DistanceFunction};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::network::Problem;
use crate::numerics::Rational;

pub use crate::lp::LinearSystem;

/// Session rates in the problem's session order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateTuple {
    pub rates: Vec<Rational>,
}

impl RateTuple {
    pub fn new(problem: &Problem, rates: Vec<Rational>) -> Result<Self> {
        if rates.len() != problem.session_count() {
            return Err(Error::InvalidArgument(format!(
                "rate tuple has {} entries for {} sessions",
                rates.len(),
                problem.session_count()
            )));
        }
        if let Some(i) = rates.iter().position(|r| r.is_negative()) {
            return Err(Error::Validation(format!(
                "rate of session {} is negative",
                problem.sessions[i].id
            )));
        }
        Ok(RateTuple { rates })
    }

    pub fn zero(problem: &Problem) -> Self {
        RateTuple {
            rates: vec![Rational::zero(); problem.session_count()],
        }
    }

    /// Builds a tuple from `(session_id, rate)` pairs; unnamed sessions get 0.
    pub fn from_pairs<'a>(
        problem: &Problem,
        pairs: impl IntoIterator<Item = (&'a str, Rational)>,
    ) -> Result<Self> {
        let mut rates = vec![Rational::zero(); problem.session_count()];
        for (id, r) in pairs {
            let i = problem
                .session_index(id)
                .ok_or_else(|| Error::Validation(format!("unknown session {id:?}")))?;
            rates[i] = r;
        }
        RateTuple::new(problem, rates)
    }

    /// Parses a rate file: a JSON object or TOML table mapping session ids to
    /// rationals such as `"3/2"`.
    pub fn parse(problem: &Problem, text: &str) -> Result<Self> {
        let map: BTreeMap<String, Rational> = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
        };
        RateTuple::from_pairs(problem, map.iter().map(|(k, v)| (k.as_str(), v.clone())))
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        RateTuple {
            rates: self.rates.iter().map(|r| r * t).collect(),
        }
    }

    pub fn to_record(&self, problem: &Problem) -> Value {
        let mut m = Map::new();
        for (s, r) in problem.sessions.iter().zip(&self.rates) {
            m.insert(s.id.clone(), json!(r.to_string()));
        }
        Value::Object(m)
    }
}

/// Flow per (session, subtree index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowAssignment {
    pub flows: Vec<Vec<Rational>>,
}

impl FlowAssignment {
    pub fn zero(problem: &Problem) -> Self {
        FlowAssignment {
            flows: problem
                .subtrees
                .iter()
                .map(|t| vec![Rational::zero(); t.len()])
                .collect(),
        }
    }

    /// Total flow on each edge, indexed by edge id - 1.
    pub fn edge_loads(&self, problem: &Problem) -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); problem.edge_count()];
        for (trees, flows) in problem.subtrees.iter().zip(&self.flows) {
            for (t, r) in trees.iter().zip(flows) {
                if r.is_zero() {
                    continue;
                }
                for id in t.ids() {
                    loads[id - 1] += r;
                }
            }
        }
        loads
    }

    /// Re-evaluates both invariant families; returns a description of the first
    /// violation.
    pub fn check(&self, problem: &Problem, rates: &RateTuple) -> std::result::Result<(), String> {
        if self.flows.len() != problem.session_count() {
            return Err("flow table has the wrong number of sessions".into());
        }
        for (i, (flows, trees)) in self.flows.iter().zip(&problem.subtrees).enumerate() {
            if flows.len() != trees.len() {
                return Err(format!("session {}: wrong subtree count", problem.sessions[i].id));
            }
            if flows.iter().any(|r| r.is_negative()) {
                return Err(format!("session {}: negative flow", problem.sessions[i].id));
            }
            let total: Rational = flows.iter().sum();
            if total != rates.rates[i] {
                return Err(format!(
                    "session {}: flows sum to {total}, rate is {}",
                    problem.sessions[i].id, rates.rates[i]
                ));
            }
        }
        for (load, e) in self.edge_loads(problem).iter().zip(&problem.network.edges) {
            if *load > e.capacity {
                return Err(format!("edge {} carries {load} > capacity {}", e.id, e.capacity));
            }
        }
        Ok(())
    }

    pub fn to_records(&self, problem: &Problem) -> Vec<Value> {
        let mut out = Vec::new();
        for (i, (flows, trees)) in self.flows.iter().zip(&problem.subtrees).enumerate() {
            for (t, r) in trees.iter().zip(flows) {
                if r.is_zero() {
                    continue;
                }
                out.push(json!({
                    "session_id": problem.sessions[i].id,
                    "subtree_edges": t.to_vec(),
                    "flow": r.to_string(),
                }));
            }
        }
        out
    }
}

/// Dual proof of infeasibility: with `u` free per session and `v >= 0` per
/// edge, `u_s + sum_{e in T} v_e >= 0` for every subtree `T` of every session
/// while `sum u_s R_s + sum v_e C_e < 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub session_multipliers: Vec<Rational>,
    pub edge_multipliers: Vec<Rational>,
}

impl InfeasibilityCertificate {
    pub fn verify(&self, problem: &Problem, rates: &RateTuple) -> bool {
        if self.session_multipliers.len() != problem.session_count()
            || self.edge_multipliers.len() != problem.edge_count()
        {
            return false;
        }
        if self.edge_multipliers.iter().any(|v| v.is_negative()) {
            return false;
        }
        for (u, trees) in self.session_multipliers.iter().zip(&problem.subtrees) {
            for t in trees {
                let s: Rational = t.ids().map(|id| &self.edge_multipliers[id - 1]).sum();
                if (u + &s).is_negative() {
                    return false;
                }
            }
        }
        let total: Rational = self
            .session_multipliers
            .iter()
            .zip(&rates.rates)
            .map(|(u, r)| u * r)
            .sum::<Rational>()
            + self
                .edge_multipliers
                .iter()
                .zip(&problem.network.edges)
                .map(|(v, e)| v * &e.capacity)
                .sum::<Rational>();
        total.is_negative()
    }

    pub fn to_record(&self, problem: &Problem) -> Value {
        let mut sessions = Map::new();
        for (s, u) in problem.sessions.iter().zip(&self.session_multipliers) {
            sessions.insert(s.id.clone(), json!(u.to_string()));
        }
        let edges: Map<String, Value> = problem
            .network
            .edges
            .iter()
            .zip(&self.edge_multipliers)
            .map(|(e, v)| (e.id.to_string(), json!(v.to_string())))
            .collect();
        json!({ "sessions": sessions, "edges": edges })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(FlowAssignment),
    Infeasible(InfeasibilityCertificate),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&FlowAssignment> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible(_) => None,
        }
    }
}

/// Flow LP over a subset of subtrees. `allowed(i, j)` selects which subtrees of
/// session `i` may carry flow; `tight(e)` turns the capacity row of edge `e`
/// (1-based) into an equality.
struct FlowProgram {
    lp: LinearProgram,
    /// (session, subtree) for each column.
    columns: Vec<(usize, usize)>,
    session_rows: Vec<Option<usize>>,
    edge_rows: Vec<usize>,
}

fn flow_program(
    problem: &Problem,
    rates: &RateTuple,
    allowed: &dyn Fn(usize, usize) -> bool,
    tight: &dyn Fn(usize) -> bool,
) -> FlowProgram {
    let mut columns = Vec::new();
    for (i, trees) in problem.subtrees.iter().enumerate() {
        if rates.rates[i].is_zero() {
            continue;
        }
        for j in 0..trees.len() {
            if allowed(i, j) {
                columns.push((i, j));
            }
        }
    }
    let mut lp = LinearProgram::new(columns.len());
    let mut session_rows = vec![None; problem.session_count()];
    for i in 0..problem.session_count() {
        if rates.rates[i].is_zero() {
            continue;
        }
        let terms: Vec<(usize, Rational)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| *s == i)
            .map(|(c, _)| (c, Rational::one()))
            .collect();
        session_rows[i] = Some(lp.constraints().len());
        lp.add_sparse(&terms, Relation::Eq, rates.rates[i].clone());
    }
    let mut edge_rows = Vec::with_capacity(problem.edge_count());
    for e in &problem.network.edges {
        let terms: Vec<(usize, Rational)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (s, j))| problem.subtrees[*s][*j].contains(e.id))
            .map(|(c, _)| (c, Rational::one()))
            .collect();
        edge_rows.push(lp.constraints().len());
        let rel = if tight(e.id) { Relation::Eq } else { Relation::Le };
        lp.add_sparse(&terms, rel, e.capacity.clone());
    }
    FlowProgram {
        lp,
        columns,
        session_rows,
        edge_rows,
    }
}

impl FlowProgram {
    fn assignment(&self, problem: &Problem, x: &[Rational]) -> FlowAssignment {
        let mut w = FlowAssignment::zero(problem);
        for (c, &(i, j)) in self.columns.iter().enumerate() {
            w.flows[i][j] = x[c].clone();
        }
        w
    }
}

/// Decides feasibility exactly; returns a flow witness or a checked dual
/// certificate.
pub fn is_feasible(problem: &Problem, rates: &RateTuple) -> Result<Feasibility> {
    let fp = flow_program(problem, rates, &|_, _| true, &|_| false);
    match fp.lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let w = fp.assignment(problem, &x);
            w.check(problem, rates).map_err(Error::Internal)?;
            Ok(Feasibility::Feasible(w))
        }
        LpOutcome::Infeasible(farkas) => {
            if !farkas.verify(&fp.lp) {
                return Err(Error::Internal("LP returned an invalid Farkas certificate".into()));
            }
            let mut u = vec![Rational::zero(); problem.session_count()];
            for (i, row) in fp.session_rows.iter().enumerate() {
                if let Some(r) = row {
                    u[i] = farkas.multipliers[*r].clone();
                }
            }
            let v = fp
                .edge_rows
                .iter()
                .map(|&r| farkas.multipliers[r].clone())
                .collect();
            let cert = InfeasibilityCertificate {
                session_multipliers: u,
                edge_multipliers: v,
            };
            if !cert.verify(problem, rates) {
                return Err(Error::Internal("infeasibility certificate failed re-check".into()));
            }
            Ok(Feasibility::Infeasible(cert))
        }
        LpOutcome::Unbounded => Err(Error::Internal("feasibility LP reported unbounded".into())),
    }
}

/// Largest `t` with `t * direction` feasible, plus a witness at that point.
pub fn max_along(problem: &Problem, direction: &[Rational]) -> Result<(Rational, FlowAssignment)> {
    let dir = RateTuple::new(problem, direction.to_vec())?;
    if dir.rates.iter().all(|d| d.is_zero()) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    // Same flow columns as for the direction; session rows become r - d_s t = 0.
    let base = flow_program(problem, &dir, &|_, _| true, &|_| false);
    let n = base.columns.len();
    let mut lp = LinearProgram::new(n + 1);
    for i in 0..problem.session_count() {
        if dir.rates[i].is_zero() {
            continue;
        }
        let mut terms: Vec<(usize, Rational)> = base
            .columns
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| *s == i)
            .map(|(c, _)| (c, Rational::one()))
            .collect();
        terms.push((n, -&dir.rates[i]));
        lp.add_sparse(&terms, Relation::Eq, Rational::zero());
    }
    for e in &problem.network.edges {
        let terms: Vec<(usize, Rational)> = base
            .columns
            .iter()
            .enumerate()
            .filter(|(_, (s, j))| problem.subtrees[*s][*j].contains(e.id))
            .map(|(c, _)| (c, Rational::one()))
            .collect();
        lp.add_sparse(&terms, Relation::Le, e.capacity.clone());
    }
    let mut obj = vec![Rational::zero(); n + 1];
    obj[n] = Rational::one();
    lp.set_objective(obj);
    match lp.solve()? {
        LpOutcome::Optimal { x, value } => {
            let w = base.assignment(problem, &x[..n]);
            w.check(problem, &dir.scaled(&value)).map_err(Error::Internal)?;
            Ok((value, w))
        }
        LpOutcome::Unbounded => Err(Error::InvalidArgument(
            "direction is unbounded (no capacity constrains it)".into(),
        )),
        LpOutcome::Infeasible(_) => Err(Error::Internal("t = 0 should always be feasible".into())),
    }
}

/// Exact evaluation of `sum l_f(M_i) R_i == sum f(e) C_e`, without checking feasibility.
pub fn lies_on_hyperplane(problem: &Problem, rates: &RateTuple, f: &DistanceFunction) -> Result<bool> {
    let iq = make_inequality(problem, f)?;
    Ok(iq.lhs_at(&rates.rates) == iq.rhs)
}

/// Searches for an assignment routing only on `f`-shortest subtrees that
/// saturates every edge with `f(e) > 0`. Does not check feasibility of `rates`.
pub fn boundary_witness(
    problem: &Problem,
    rates: &RateTuple,
    f: &DistanceFunction,
) -> Result<Option<FlowAssignment>> {
    f.check_len(problem)?;
    let shortest: Vec<Vec<bool>> = problem
        .subtrees
        .iter()
        .map(|trees| {
            let (_, idx) = shortest_set(f, trees);
            let mut mask = vec![false; trees.len()];
            idx.into_iter().for_each(|j| mask[j] = true);
            mask
        })
        .collect();
    let fp = flow_program(
        problem,
        rates,
        &|i, j| shortest[i][j],
        &|e| !f.get(e).is_zero(),
    );
    match fp.lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let w = fp.assignment(problem, &x);
            w.check(problem, rates).map_err(Error::Internal)?;
            Ok(Some(w))
        }
        LpOutcome::Infeasible(_) => Ok(None),
        LpOutcome::Unbounded => Err(Error::Internal("boundary LP reported unbounded".into())),
    }
}

fn require_feasible(problem: &Problem, rates: &RateTuple) -> Result<()> {
    if !is_feasible(problem, rates)?.is_feasible() {
        return Err(Error::InvalidArgument("rate tuple is infeasible".into()));
    }
    Ok(())
}

/// Whether a feasible rate-tuple lies on the hyperplane of `f`.
pub fn on_hyperplane(problem: &Problem, rates: &RateTuple, f: &DistanceFunction) -> Result<bool> {
    require_feasible(problem, rates)?;
    lies_on_hyperplane(problem, rates, f)
}

/// The flow-side characterization of lying on `f`'s hyperplane, for a
/// feasible rate-tuple.
pub fn boundary_conditions(
    problem: &Problem,
    rates: &RateTuple,
    f: &DistanceFunction,
) -> Result<Option<FlowAssignment>> {
    require_feasible(problem, rates)?;
    boundary_witness(problem, rates, f)
}

/// Checks that `w` routes only on `f`-shortest subtrees and saturates every
/// positive-distance edge.
pub fn satisfies_boundary_conditions(problem: &Problem, w: &FlowAssignment, f: &DistanceFunction) -> bool {
    for (trees, flows) in problem.subtrees.iter().zip(&w.flows) {
        let (_, idx) = shortest_set(f, trees);
        for (j, r) in flows.iter().enumerate() {
            if !r.is_zero() && !idx.contains(&j) {
                return false;
            }
        }
    }
    w.edge_loads(problem)
        .iter()
        .zip(&problem.network.edges)
        .all(|(load, e)| f.get(e.id).is_zero() || *load == e.capacity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{triangle_problem, Network, Session};

    fn tri() -> Problem {
        triangle_problem(Rational::one()).unwrap()
    }

    fn rates(p: &Problem, pairs: &[(&str, i64)]) -> RateTuple {
        RateTuple::from_pairs(p, pairs.iter().map(|(k, v)| (*k, Rational::from(*v)))).unwrap()
    }

    #[test]
    fn unicast_cycle_is_feasible() {
        let p = tri();
        let r = rates(&p, &[("1->2", 1), ("2->3", 1), ("3->1", 1)]);
        let v = is_feasible(&p, &r).unwrap();
        let w = v.witness().expect("feasible");
        assert!(w.check(&p, &r).is_ok());
    }

    #[test]
    fn double_broadcast_is_infeasible() {
        let p = tri();
        let r = rates(&p, &[("1->{2,3}", 2)]);
        match is_feasible(&p, &r).unwrap() {
            Feasibility::Infeasible(cert) => assert!(cert.verify(&p, &r)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_edge_threshold() {
        let net = Network::new(false, 2, vec![(1, 2, Rational::from(5))]).unwrap();
        let p = Problem::new(net, vec![Session::new(1, [2])]).unwrap();
        assert!(is_feasible(&p, &rates(&p, &[("1->2", 5)])).unwrap().is_feasible());
        assert!(!is_feasible(&p, &rates(&p, &[("1->2", 6)])).unwrap().is_feasible());
        let (t, _) = max_along(&p, &[Rational::one()]).unwrap();
        assert_eq!(t, Rational::from(5));
    }

    #[test]
    fn max_along_triangle_directions() {
        let p = tri();
        let mut d = vec![Rational::zero(); 9];
        d[0] = Rational::one();
        assert_eq!(max_along(&p, &d).unwrap().0, Rational::from(2));
        let mut d = vec![Rational::zero(); 9];
        d[6] = Rational::one();
        assert_eq!(max_along(&p, &d).unwrap().0, "3/2".parse().unwrap());
        assert!(max_along(&p, &vec![Rational::zero(); 9]).is_err());
    }

    #[test]
    fn hyperplane_checks_on_worked_example() {
        let p = tri();
        let r = rates(&p, &[("1->2", 1), ("2->3", 1), ("3->1", 1)]);
        let g = DistanceFunction::from_u64(&[2, 1, 3]);
        let f = DistanceFunction::from_u64(&[1, 0, 1]);
        assert!(on_hyperplane(&p, &r, &g).unwrap());
        assert!(on_hyperplane(&p, &r, &f).unwrap());
        let w = boundary_conditions(&p, &r, &f).unwrap().expect("conditions hold");
        assert!(satisfies_boundary_conditions(&p, &w, &f));
        let zero = RateTuple::zero(&p);
        assert!(!on_hyperplane(&p, &zero, &f).unwrap());
        assert!(boundary_conditions(&p, &zero, &f).unwrap().is_none());
    }

    #[test]
    fn unsaturated_positive_edge_fails_conditions() {
        let p = tri();
        let r = rates(&p, &[("1->2", 1)]);
        let g = DistanceFunction::from_u64(&[2, 1, 3]);
        assert!(!on_hyperplane(&p, &r, &g).unwrap());
        assert!(boundary_conditions(&p, &r, &g).unwrap().is_none());
    }

    #[test]
    fn infeasible_tuples_are_rejected_by_boundary_ops() {
        let p = tri();
        let r = rates(&p, &[("1->{2,3}", 2)]);
        let g = DistanceFunction::from_u64(&[2, 1, 3]);
        assert!(on_hyperplane(&p, &r, &g).is_err());
        assert!(boundary_conditions(&p, &r, &g).is_err());
    }

    #[test]
    fn rate_files_parse_in_both_notations() {
        let p = tri();
        let a = RateTuple::parse(&p, r#"{"1->2": "1/2", "3->1": 1}"#).unwrap();
        let b = RateTuple::parse(&p, "\"1->2\" = \"1/2\"\n\"3->1\" = \"1\"\n").unwrap();
        assert_eq!(a, b);
        assert!(RateTuple::parse(&p, r#"{"9->9": "1"}"#).is_err());
        assert!(RateTuple::parse(&p, r#"{"1->2": "-1"}"#).is_err());
    }

    #[test]
    fn zero_rate_sessions_need_no_flow() {
        let p = tri();
        let r = RateTuple::zero(&p);
        let w = is_feasible(&p, &r).unwrap();
        assert!(w.witness().unwrap().flows.iter().flatten().all(|x| x.is_zero()));
    }
}
